//! Compressible subsonic jet flows issuing from a two-dimensional
//! convergent nozzle into a prescribed surrounding pressure.
//!
//! The flow is computed in potential-stream coordinates `(φ, ψ)`, where the
//! jet occupies the rectangle `(0, ξ) × (0, m)` and the unknown is
//! `Q = A(q)`. The pieces are:
//!
//! - [`gasdyn`]: gas law, flux functions `A`, `B` and problem constants;
//! - [`numerics`]: root finding, quadrature, band LU, exponent fits;
//! - [`symmetric`]: the exact radial jet, used as an oracle;
//! - [`fixedbvp`]: Newton solver for the problem with `ζ` and `ξ` fixed;
//! - [`freebnd`]: shooting for `ξ`, the threshold `ζ*` and the match to a
//!   wall radius `R`;
//! - [`physmap`]: flow angle and the physical-plane geometry.

// Negated comparisons are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Index loops mirror the stencil and factorization formulas.
#![allow(clippy::needless_range_loop)]

pub mod error;
pub mod gasdyn;
pub mod numerics;
pub mod physmap;
pub mod fixedbvp;
pub mod freebnd;
pub mod symmetric;

pub use error::{Error, Result};
pub use gasdyn::{derive_constants, DerivedConstants, FlowConfig, GasModel};
