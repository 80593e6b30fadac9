//! Shared numerical kernels: bracketed root finding, adaptive quadrature,
//! band LU and power-law fitting. All kernels are deterministic.

mod banded;
mod fit;
mod quadrature;
mod roots;

pub use banded::{solve_banded, BandLu, BandMatrix, BandedSystem};
pub use fit::fit_power_exponent;
pub(crate) use quadrature::gauss_legendre8;
pub use quadrature::{integrate_adaptive, integrate_adaptive_estimate, Quadrature};
pub use roots::{find_root_monotone, Bracket};
