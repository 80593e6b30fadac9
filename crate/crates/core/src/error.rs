use thiserror::Error;

/// Errors produced by the jet-flow solvers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{what}: argument {value} outside its domain")]
    Domain { what: &'static str, value: f64 },

    #[error("{what}: value {value} outside the invertible range")]
    Range { what: &'static str, value: f64 },

    #[error("surrounding pressure {p_e} outside the subsonic window ({p_sonic}, {p_stag})")]
    InfeasiblePressure { p_e: f64, p_sonic: f64, p_stag: f64 },

    #[error("mass flux {m} outside the admissible window ({lower}, {upper})")]
    InfeasibleFlux { m: f64, lower: f64, upper: f64 },

    #[error("invalid flow configuration: {0}")]
    InvalidConfig(String),

    #[error("no sign change on [{lo}, {hi}] (f(lo)={f_lo}, f(hi)={f_hi})")]
    NoSignChange {
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },

    #[error("{what}: no convergence after {iters} iterations")]
    MaxIterations { what: &'static str, iters: usize },

    #[error("quadrature did not reach tolerance {tol} within {panels} panels (estimate {estimate})")]
    Quadrature { tol: f64, panels: usize, estimate: f64 },

    #[error("singular pivot in column {column}")]
    SingularPivot { column: usize },

    #[error("need at least {needed} samples, got {got}")]
    InsufficientSamples { needed: usize, got: usize },

    #[error("potential-plane constraint violated: {0}")]
    Constraint(String),

    #[error("Newton iteration did not converge after {iters} iterations (residual {residual:e})")]
    Nonconvergence { iters: usize, residual: f64 },

    #[error("no solution in the admissible space: {0}")]
    Nonexistence(String),

    #[error("nozzle too long: R = {r} < R_hat = {r_hat} (R* = {r_star})")]
    LongNozzle { r: f64, r_hat: f64, r_star: f64 },

    #[error("nozzle too short: R = {r} > R* = {r_star} (R_hat = {r_hat})")]
    ShortNozzle { r: f64, r_hat: f64, r_star: f64 },

    #[error("insufficient resolution: {0}")]
    InsufficientResolution(String),

    #[error("physical map folds over at cell ({i}, {j})")]
    FoldOver { i: usize, j: usize },

    #[error("flow-angle paths disagree: {discrepancy:e} > {bound:e}")]
    Consistency { discrepancy: f64, bound: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
