use super::solve::SpeedField;
use crate::error::{Error, Result};
use crate::numerics::fit_power_exponent;

/// Fewest dyadic distance levels used in the corner fit.
pub const MIN_CORNER_LEVELS: usize = 5;

/// Samples `(distance, |Q - A(c_e)|)` on the column `φ = ζ` at dyadic
/// distances of 1, 2, 4, ... cells below the corner `(ζ, m)`, going no
/// further than a quarter of the column, largest distance first.
pub fn corner_samples(field: &SpeedField, a_e: f64) -> Result<Vec<(f64, f64)>> {
    let grid = &field.grid;
    if grid.is_symmetric() {
        return Err(Error::InsufficientResolution(
            "no Dirichlet/Neumann junction when zeta = xi".into(),
        ));
    }
    let mm = grid.n_psi();
    let k = grid.h_psi();
    let mut out = Vec::new();
    let mut d = 1;
    while 4 * d <= mm {
        let v = (field.big_q_at(grid.zeta_index, mm - d) - a_e).abs();
        out.push((d as f64 * k, v));
        d *= 2;
    }
    if out.len() < MIN_CORNER_LEVELS {
        return Err(Error::InsufficientResolution(format!(
            "{} distance levels below the corner, need {MIN_CORNER_LEVELS}",
            out.len()
        )));
    }
    out.reverse();
    Ok(out)
}

/// Local Hölder exponent of `Q` at the corner `(ζ, m)` from a log-log fit.
pub fn corner_exponent(field: &SpeedField, a_e: f64) -> Result<f64> {
    fit_power_exponent(&corner_samples(field, a_e)?)
}
