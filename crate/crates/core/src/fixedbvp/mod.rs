//! Finite-difference solver for the problem with `ζ` and `ξ` fixed, in the
//! unknown `Q = A(q)` on the rectangle `[0, ξ] × [0, m]`.
//!
//! The `ψ` flux is written as a second difference of `F(Q) = B(A⁻¹(Q))`,
//! which keeps the divergence form of the equation and gives a Jacobian
//! with the sign pattern of a monotone scheme.

mod corner;
mod grid;
mod residual;
mod solve;

pub use corner::{corner_exponent, corner_samples, MIN_CORNER_LEVELS};
pub use grid::{
    build_grid, build_grid_split, check_potential_window, default_split, Grid, MIN_PHI_CELLS,
    MIN_PSI_CELLS,
};
pub use residual::{assemble_residual, node_kind, Discretization, InletData, NodeKind};
pub use solve::{
    clamp_floor_speed, newton, picard_iterate, picard_t, picard_t_on_grid, solve_fixed,
    solve_on_grid, subsolution, PicardRun, SolverOptions, SpeedField,
};

/// A failed invariant of a converged field.
#[derive(Debug, Clone, PartialEq)]
pub struct InvariantViolation {
    pub check: &'static str,
    pub i: usize,
    pub j: usize,
    pub value: f64,
}

/// Checks the bounds `c_l < q < c_e` off the Dirichlet set, exact
/// Dirichlet values, and monotonicity of `q` in `φ` and `ψ` up to `tol`.
pub fn check_invariants(
    field: &SpeedField,
    c_l: f64,
    c_e: f64,
    a_e: f64,
    tol: f64,
) -> Vec<InvariantViolation> {
    let g = &field.grid;
    let mut out = Vec::new();
    let mut push = |check, i, j, value| out.push(InvariantViolation { check, i, j, value });
    for i in 0..=g.n_phi() {
        for j in 0..=g.n_psi() {
            let q = field.q_at(i, j);
            if node_kind(g, i, j) == NodeKind::Dirichlet {
                if field.big_q_at(i, j) != a_e {
                    push("dirichlet", i, j, field.big_q_at(i, j));
                }
            } else if !(q > c_l && q < c_e) {
                push("bounds", i, j, q);
            }
            if i < g.n_phi() && field.q_at(i + 1, j) - q < -tol {
                push("monotone_phi", i, j, field.q_at(i + 1, j) - q);
            }
            if j < g.n_psi() && field.q_at(i, j + 1) - q < -tol {
                push("monotone_psi", i, j, field.q_at(i, j + 1) - q);
            }
        }
    }
    out
}
