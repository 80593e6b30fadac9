use crate::error::{Error, Result};

/// Tensor-product grid on `[0, ξ] × [0, m]` with a node pinned at `φ = ζ`.
///
/// Spacing is uniform on `[0, ζ]` and on `[ζ, ξ]` separately and uniform in
/// `ψ`. Unknowns are numbered with `ψ` fastest, so the coupling between
/// neighbouring `φ` columns sits one column height off the diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub xi: f64,
    pub zeta: f64,
    pub m: f64,
    pub phi: Vec<f64>,
    pub psi: Vec<f64>,
    pub zeta_index: usize,
}

/// Smallest cell counts accepted by [`build_grid`].
pub const MIN_PHI_CELLS: usize = 16;
pub const MIN_PSI_CELLS: usize = 8;
const MIN_SEGMENT_CELLS: usize = 4;

impl Grid {
    /// Number of cells in `φ`.
    pub fn n_phi(&self) -> usize {
        self.phi.len() - 1
    }

    /// Number of cells in `ψ`.
    pub fn n_psi(&self) -> usize {
        self.psi.len() - 1
    }

    /// Column height, i.e. nodes per `φ` station.
    pub fn stride(&self) -> usize {
        self.psi.len()
    }

    pub fn len(&self) -> usize {
        self.phi.len() * self.psi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        i * self.psi.len() + j
    }

    pub fn h_psi(&self) -> f64 {
        self.m / self.n_psi() as f64
    }

    /// Spacing on `[0, ζ]`.
    pub fn h_wall(&self) -> f64 {
        self.zeta / self.zeta_index as f64
    }

    /// Spacing on `[ζ, ξ]`, or `None` when `ξ = ζ`.
    pub fn h_jet(&self) -> Option<f64> {
        let n2 = self.n_phi() - self.zeta_index;
        (n2 > 0).then(|| (self.xi - self.zeta) / n2 as f64)
    }

    pub fn h_phi_max(&self) -> f64 {
        self.h_jet().map_or(self.h_wall(), |h| h.max(self.h_wall()))
    }

    /// Ratio of the two `φ` spacings (jet over wall), 1 when `ξ = ζ`.
    pub fn spacing_ratio(&self) -> f64 {
        self.h_jet().map_or(1.0, |h| h / self.h_wall())
    }

    pub fn is_symmetric(&self) -> bool {
        self.zeta_index == self.n_phi()
    }
}

/// Checks `0 < ζ < R0 c_l` and `ζ ≤ ξ ≤ R0 c_l`.
pub fn check_potential_window(zeta: f64, xi: f64, xi_cap: f64) -> Result<()> {
    if !(zeta > 0.0) {
        return Err(Error::Constraint(format!("0 < zeta fails (zeta = {zeta})")));
    }
    if !(zeta < xi_cap) {
        return Err(Error::Constraint(format!(
            "zeta < R0*c_l fails (zeta = {zeta}, R0*c_l = {xi_cap})"
        )));
    }
    if !(zeta <= xi) {
        return Err(Error::Constraint(format!(
            "zeta <= xi fails (zeta = {zeta}, xi = {xi})"
        )));
    }
    if !(xi <= xi_cap) {
        return Err(Error::Constraint(format!(
            "xi <= R0*c_l fails (xi = {xi}, R0*c_l = {xi_cap})"
        )));
    }
    Ok(())
}

/// Default split of `n_phi` cells between `[0, ζ]` and `[ζ, ξ]`,
/// proportional to length with at least four cells on each side.
pub fn default_split(zeta: f64, xi: f64, n_phi: usize) -> (usize, usize) {
    if xi <= zeta {
        return (n_phi, 0);
    }
    let n2 = ((xi - zeta) / xi * n_phi as f64).round() as usize;
    let n2 = n2.clamp(MIN_SEGMENT_CELLS, n_phi - MIN_SEGMENT_CELLS);
    (n_phi - n2, n2)
}

/// Builds the grid with the default cell split.
pub fn build_grid(
    zeta: f64,
    xi: f64,
    m: f64,
    n_phi: usize,
    n_psi: usize,
    xi_cap: f64,
) -> Result<Grid> {
    let (n1, n2) = default_split(zeta, xi, n_phi.max(2 * MIN_SEGMENT_CELLS));
    build_grid_split(zeta, xi, m, n1, n2, n_psi, xi_cap)
}

/// Builds the grid with an explicit split: `n_wall` cells on `[0, ζ]` and
/// `n_jet` on `[ζ, ξ]` (`n_jet = 0` exactly when `ξ = ζ`).
pub fn build_grid_split(
    zeta: f64,
    xi: f64,
    m: f64,
    n_wall: usize,
    n_jet: usize,
    n_psi: usize,
    xi_cap: f64,
) -> Result<Grid> {
    check_potential_window(zeta, xi, xi_cap)?;
    if !(m > 0.0) {
        return Err(Error::Constraint(format!("m = {m} must be positive")));
    }
    let n_phi = n_wall + n_jet;
    if n_phi < MIN_PHI_CELLS || n_psi < MIN_PSI_CELLS {
        return Err(Error::Constraint(format!(
            "grid {n_phi}x{n_psi} below the minimum {MIN_PHI_CELLS}x{MIN_PSI_CELLS}"
        )));
    }
    if (xi > zeta) != (n_jet > 0) || (n_jet > 0 && n_jet < MIN_SEGMENT_CELLS) {
        return Err(Error::Constraint(format!(
            "cell split {n_wall}+{n_jet} inconsistent with zeta = {zeta}, xi = {xi}"
        )));
    }
    if n_wall < MIN_SEGMENT_CELLS {
        return Err(Error::Constraint(format!(
            "need at least {MIN_SEGMENT_CELLS} cells on [0, zeta]"
        )));
    }
    let h1 = zeta / n_wall as f64;
    let mut phi: Vec<f64> = (0..n_wall).map(|i| i as f64 * h1).collect();
    phi.push(zeta);
    if n_jet > 0 {
        let h2 = (xi - zeta) / n_jet as f64;
        phi.extend((1..n_jet).map(|i| zeta + i as f64 * h2));
        phi.push(xi);
    }
    let k = m / n_psi as f64;
    let mut psi: Vec<f64> = (0..n_psi).map(|j| j as f64 * k).collect();
    psi.push(m);
    Ok(Grid {
        xi,
        zeta,
        m,
        phi,
        psi,
        zeta_index: n_wall,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_grid() {
        let g = build_grid(0.1, 0.1, 0.25, 32, 8, 0.2).unwrap();
        assert_eq!(g.zeta_index, 32);
        assert!(g.is_symmetric());
        assert_eq!(*g.phi.last().unwrap(), 0.1);
        assert_eq!(*g.psi.last().unwrap(), 0.25);
    }

    #[test]
    fn zeta_beyond_cap() {
        let e = build_grid(0.3, 0.3, 0.25, 32, 8, 0.2).unwrap_err();
        match e {
            Error::Constraint(msg) => assert!(msg.contains("zeta < R0*c_l")),
            other => panic!("{other:?}"),
        }
        assert!(build_grid(0.1, 0.05, 0.25, 32, 8, 0.2).is_err());
        assert!(build_grid(0.1, 0.25, 0.25, 32, 8, 0.2).is_err());
        assert!(build_grid(0.1, 0.15, 0.25, 8, 8, 0.2).is_err());
    }

    #[test]
    fn two_segments() {
        let (zhat, cap) = (0.104_449_5, 0.231_213);
        let g = build_grid(0.5 * zhat, 0.9 * cap, 0.25, 128, 32, cap).unwrap();
        assert_eq!(g.phi[g.zeta_index], 0.5 * zhat);
        assert_eq!(*g.phi.last().unwrap(), 0.9 * cap);
        let r = g.spacing_ratio();
        assert!((0.5..=2.0).contains(&r), "{r}");
        assert!(g.zeta_index >= 4 && g.n_phi() - g.zeta_index >= 4);
        for w in g.phi.windows(2) {
            assert!(w[1] > w[0]);
        }
    }
}
