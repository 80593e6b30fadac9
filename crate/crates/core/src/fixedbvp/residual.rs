use super::grid::Grid;
use crate::error::{Error, Result};
use crate::gasdyn::GasModel;
use crate::numerics::BandMatrix;

/// Role of a node in the discrete problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    Interior,
    /// `φ = 0`, `0 < ψ < m`.
    Inlet,
    /// `φ = 0`, `ψ = 0`.
    InletAxis,
    /// `φ = 0`, `ψ = m`.
    InletWall,
    /// `ψ = 0`, `0 < φ < ξ`.
    Axis,
    /// `ψ = m`, `0 < φ < ζ`.
    Wall,
    /// `φ = ξ`, or `ψ = m` with `φ ≥ ζ`.
    Dirichlet,
}

pub fn node_kind(grid: &Grid, i: usize, j: usize) -> NodeKind {
    let (n, mm, iz) = (grid.n_phi(), grid.n_psi(), grid.zeta_index);
    if i == n || (j == mm && i >= iz) {
        NodeKind::Dirichlet
    } else if i == 0 {
        match j {
            0 => NodeKind::InletAxis,
            j if j == mm => NodeKind::InletWall,
            _ => NodeKind::Inlet,
        }
    } else if j == 0 {
        NodeKind::Axis
    } else if j == mm {
        NodeKind::Wall
    } else {
        NodeKind::Interior
    }
}

/// Data imposed on the inlet column.
#[derive(Debug, Clone, Copy)]
pub enum InletData<'a> {
    /// `∂Q/∂φ = 1/(R0 q ρ)` with `q` the unknown inlet speed.
    Robin,
    /// `∂Q/∂φ` prescribed per `ψ` node.
    Prescribed(&'a [f64]),
}

/// The discrete operator for a fixed grid.
///
/// Rows are written in first-derivative units: interior rows are the
/// five-point operator multiplied by the mean `φ` spacing, and boundary
/// rows are the boundary derivative corrected by the PDE so that they are
/// second-order accurate on two-point stencils. Dirichlet rows are
/// `Q - A(c_e)`.
#[derive(Debug, Clone, Copy)]
pub struct Discretization<'a> {
    pub grid: &'a Grid,
    pub gas: &'a GasModel,
    pub r0: f64,
    pub a_e: f64,
    pub inlet: InletData<'a>,
}

#[derive(Debug, Clone, Copy, Default)]
struct NodeState {
    f: f64,
    fp: f64,
    g: f64,
    gp: f64,
}

struct Row<'s> {
    r: f64,
    row: usize,
    jac: Option<&'s mut BandMatrix>,
}

impl Row<'_> {
    fn q(&mut self, q: &[f64], col: usize, c: f64) {
        self.r += c * q[col];
        if let Some(j) = self.jac.as_deref_mut() {
            j.add(self.row, col, c);
        }
    }

    fn f(&mut self, st: &[NodeState], col: usize, c: f64) {
        self.r += c * st[col].f;
        if let Some(j) = self.jac.as_deref_mut() {
            j.add(self.row, col, c * st[col].fp);
        }
    }

    fn g(&mut self, st: &[NodeState], col: usize, c: f64) {
        self.r += c * st[col].g;
        if let Some(j) = self.jac.as_deref_mut() {
            j.add(self.row, col, c * st[col].gp);
        }
    }
}

impl<'a> Discretization<'a> {
    fn states(&self, qf: &[f64]) -> Result<Vec<NodeState>> {
        let grid = self.grid;
        if qf.len() != grid.len() {
            return Err(Error::InvalidConfig(format!(
                "field has {} values, grid has {} nodes",
                qf.len(),
                grid.len()
            )));
        }
        if let InletData::Prescribed(d) = self.inlet {
            if d.len() != grid.stride() {
                return Err(Error::InvalidConfig(format!(
                    "inlet data has {} values, grid column has {}",
                    d.len(),
                    grid.stride()
                )));
            }
        }
        let mut st = vec![NodeState::default(); qf.len()];
        for (p, s) in st.iter_mut().enumerate() {
            let q = self.gas.flux_a_inverse(qf[p])?;
            s.f = self.gas.flux_b(q)?;
            s.fp = self.gas.flux_ratio(q);
            if p < grid.stride() {
                match self.inlet {
                    InletData::Robin => {
                        s.g = 1.0 / (self.r0 * self.gas.mass_flux(q));
                        s.gp = -1.0 / (self.r0 * q);
                    }
                    InletData::Prescribed(d) => s.g = d[p],
                }
            }
        }
        Ok(st)
    }

    /// Residual, and the Jacobian when `jac` is given (it must be zeroed
    /// with bandwidths of one column height).
    pub fn evaluate(&self, qf: &[f64], mut jac: Option<&mut BandMatrix>) -> Result<Vec<f64>> {
        let st = self.states(qf)?;
        let grid = self.grid;
        let (n, mm) = (grid.n_phi(), grid.n_psi());
        let s = grid.stride();
        let k = grid.h_psi();
        let k2 = k * k;
        let mut res = vec![0.0; grid.len()];
        for i in 0..=n {
            let hm = if i > 0 { grid.phi[i] - grid.phi[i - 1] } else { 0.0 };
            let hp = if i < n { grid.phi[i + 1] - grid.phi[i] } else { 0.0 };
            let hbar = 0.5 * (hm + hp);
            for j in 0..=mm {
                let p = grid.idx(i, j);
                let mut row = Row {
                    r: 0.0,
                    row: p,
                    jac: jac.as_deref_mut(),
                };
                let kind = node_kind(grid, i, j);
                // Nonuniform second difference in φ, scaled by `scale`.
                let d2phi = |row: &mut Row, scale: f64| {
                    row.q(qf, p + s, scale / (hp * hbar));
                    row.q(qf, p, -scale * (1.0 / hp + 1.0 / hm) / hbar);
                    row.q(qf, p - s, scale / (hm * hbar));
                };
                match kind {
                    NodeKind::Dirichlet => {
                        row.q(qf, p, 1.0);
                        row.r -= self.a_e;
                    }
                    NodeKind::Interior => {
                        d2phi(&mut row, hbar);
                        row.f(&st, p + 1, hbar / k2);
                        row.f(&st, p, -2.0 * hbar / k2);
                        row.f(&st, p - 1, hbar / k2);
                    }
                    NodeKind::Axis => {
                        row.f(&st, p + 1, 1.0 / k);
                        row.f(&st, p, -1.0 / k);
                        d2phi(&mut row, 0.5 * k);
                    }
                    NodeKind::Wall => {
                        row.f(&st, p - 1, 1.0 / k);
                        row.f(&st, p, -1.0 / k);
                        d2phi(&mut row, 0.5 * k);
                    }
                    NodeKind::Inlet | NodeKind::InletAxis | NodeKind::InletWall => {
                        row.q(qf, p + s, 1.0 / hp);
                        row.q(qf, p, -1.0 / hp);
                        row.g(&st, p, -1.0);
                        match kind {
                            NodeKind::Inlet => {
                                let c = 0.5 * hp / k2;
                                row.f(&st, p + 1, c);
                                row.f(&st, p, -2.0 * c);
                                row.f(&st, p - 1, c);
                            }
                            NodeKind::InletAxis => {
                                row.f(&st, p + 1, hp / k2);
                                row.f(&st, p, -hp / k2);
                            }
                            _ => {
                                row.f(&st, p - 1, hp / k2);
                                row.f(&st, p, -hp / k2);
                            }
                        }
                    }
                }
                res[p] = row.r;
            }
        }
        Ok(res)
    }

    pub fn residual(&self, qf: &[f64]) -> Result<Vec<f64>> {
        self.evaluate(qf, None)
    }

    pub fn residual_and_jacobian(&self, qf: &[f64]) -> Result<(Vec<f64>, BandMatrix)> {
        let s = self.grid.stride();
        let mut jac = BandMatrix::zeros(self.grid.len(), s, s);
        let r = self.evaluate(qf, Some(&mut jac))?;
        Ok((r, jac))
    }

    /// First row whose Jacobian breaks the sign pattern of a monotone
    /// scheme: negative diagonal and nonnegative off-diagonals on equation
    /// rows, identity on Dirichlet rows.
    pub fn sign_pattern_violation(&self, jac: &BandMatrix) -> Option<usize> {
        let grid = self.grid;
        (0..grid.len()).find(|&p| {
            let (i, j) = (p / grid.stride(), p % grid.stride());
            let dirichlet = node_kind(grid, i, j) == NodeKind::Dirichlet;
            jac.row(p).any(|(c, v)| {
                if c == p {
                    if dirichlet {
                        v != 1.0
                    } else {
                        !(v < 0.0)
                    }
                } else if dirichlet {
                    v != 0.0
                } else {
                    v < 0.0
                }
            })
        })
    }
}

/// Residual of the Robin problem for the field `qf` on `grid`.
pub fn assemble_residual(
    grid: &Grid,
    qf: &[f64],
    gas: &GasModel,
    r0: f64,
    a_e: f64,
) -> Result<Vec<f64>> {
    Discretization {
        grid,
        gas,
        r0,
        a_e,
        inlet: InletData::Robin,
    }
    .residual(qf)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixedbvp::grid::build_grid;
    use crate::gasdyn::{derive_constants, FlowConfig};
    use crate::symmetric::SymmetricSolution;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn desk() -> (GasModel, FlowConfig) {
        (GasModel::new(1.4).unwrap(), FlowConfig::new(1.0, PI / 6.0, 0.25, 0.8))
    }

    #[test]
    fn constant_field() {
        let (gas, cfg) = desk();
        let k = derive_constants(&gas, &cfg).unwrap();
        let grid = build_grid(k.zeta_hat, k.zeta_hat, cfg.m, 32, 8, k.xi_cap(&cfg)).unwrap();
        let qf = vec![k.a_e; grid.len()];
        let r = assemble_residual(&grid, &qf, &gas, cfg.r0, k.a_e).unwrap();
        let inlet = -1.0 / (cfg.r0 * gas.mass_flux(cfg.c_e));
        for i in 0..=grid.n_phi() {
            for j in 0..=grid.n_psi() {
                let v = r[grid.idx(i, j)];
                if i == 0 {
                    assert!((v - inlet).abs() < 1e-12, "{v}");
                } else {
                    assert!(v.abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn symmetric_field_is_nearly_exact() {
        let (gas, cfg) = desk();
        let sym = SymmetricSolution::new(&gas, &cfg).unwrap();
        let k = *sym.constants();
        let grid = build_grid(k.zeta_hat, k.zeta_hat, cfg.m, 64, 16, k.xi_cap(&cfg)).unwrap();
        let mut qf = vec![0.0; grid.len()];
        for i in 0..=grid.n_phi() {
            for j in 0..=grid.n_psi() {
                qf[grid.idx(i, j)] = sym.a_hat(grid.phi[i]);
            }
        }
        let r = assemble_residual(&grid, &qf, &gas, cfg.r0, k.a_e).unwrap();
        let max = r.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        assert!(max < 1e-10, "{max}");
    }

    #[test]
    fn out_of_range_field() {
        let (gas, cfg) = desk();
        let k = derive_constants(&gas, &cfg).unwrap();
        let grid = build_grid(k.zeta_hat, k.zeta_hat, cfg.m, 16, 8, k.xi_cap(&cfg)).unwrap();
        let mut qf = vec![k.a_e; grid.len()];
        qf[3] = 0.5;
        assert!(assemble_residual(&grid, &qf, &gas, cfg.r0, k.a_e).is_err());
    }

    fn random_field(grid: &Grid, a_lo: f64, a_hi: f64, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..grid.len()).map(|_| rng.gen_range(a_lo..a_hi)).collect()
    }

    #[test]
    fn stencil_locality() {
        let (gas, cfg) = desk();
        let k = derive_constants(&gas, &cfg).unwrap();
        let cap = k.xi_cap(&cfg);
        let grid = build_grid(0.5 * k.zeta_hat, 0.9 * cap, cfg.m, 32, 16, cap).unwrap();
        let a_lo = gas.flux_a(k.c_l).unwrap();
        let qf = random_field(&grid, a_lo, k.a_e, 3);
        let r0 = assemble_residual(&grid, &qf, &gas, cfg.r0, k.a_e).unwrap();
        let (i, j) = (10, 7);
        let p = grid.idx(i, j);
        let mut q2 = qf.clone();
        q2[p] += 1e-3;
        let r1 = assemble_residual(&grid, &q2, &gas, cfg.r0, k.a_e).unwrap();
        let s = grid.stride();
        let stencil = [p, p + 1, p - 1, p + s, p - s];
        for (c, (a, b)) in r0.iter().zip(&r1).enumerate() {
            assert_eq!(a != b, stencil.contains(&c), "node {c}");
        }
    }

    #[test]
    fn jacobian_matches_directional_differences() {
        let (gas, cfg) = desk();
        let k = derive_constants(&gas, &cfg).unwrap();
        let cap = k.xi_cap(&cfg);
        let grid = build_grid(0.5 * k.zeta_hat, 0.8 * cap, cfg.m, 24, 12, cap).unwrap();
        let a_lo = gas.flux_a(k.c_l).unwrap();
        let data: Vec<f64> = (0..grid.stride()).map(|j| 1.5 + 0.01 * j as f64).collect();
        for (seed, inlet) in [(5, InletData::Robin), (6, InletData::Prescribed(&data))] {
            let d = Discretization {
                grid: &grid,
                gas: &gas,
                r0: cfg.r0,
                a_e: k.a_e,
                inlet,
            };
            let qf = random_field(&grid, a_lo, 0.9 * k.a_e, seed);
            let v = random_field(&grid, -1.0, 1.0, seed + 100);
            let (_, jac) = d.residual_and_jacobian(&qf).unwrap();
            let jv = jac.mul_vec(&v);
            let eps = 1e-7;
            let plus: Vec<f64> = qf.iter().zip(&v).map(|(q, d)| q + eps * d).collect();
            let minus: Vec<f64> = qf.iter().zip(&v).map(|(q, d)| q - eps * d).collect();
            let rp = d.residual(&plus).unwrap();
            let rm = d.residual(&minus).unwrap();
            let scale = jv.iter().fold(0.0f64, |a, x| a.max(x.abs()));
            for p in 0..grid.len() {
                let fd = (rp[p] - rm[p]) / (2.0 * eps);
                assert!((fd - jv[p]).abs() <= 1e-6 * scale, "row {p}: {fd} vs {}", jv[p]);
            }
            assert_eq!(d.sign_pattern_violation(&jac), None);
        }
    }
}
