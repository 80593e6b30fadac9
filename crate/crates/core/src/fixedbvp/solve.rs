use super::grid::{build_grid, Grid};
use super::residual::{Discretization, InletData};
use crate::error::{Error, Result};
use crate::gasdyn::{DerivedConstants, FlowConfig, GasModel};

/// Solver controls shared by the fixed- and free-boundary solvers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Cells in `φ`.
    pub n_phi: usize,
    /// Cells in `ψ`.
    pub n_psi: usize,
    /// Residual max-norm at which Newton stops.
    pub tol: f64,
    pub max_iters: usize,
    /// Tolerance on the inlet defect when shooting for `ξ`; `None` means
    /// `1e-8 R0 ϑ`.
    pub shoot_tol: Option<f64>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            n_phi: 128,
            n_psi: 32,
            tol: 1e-10,
            max_iters: 100,
            shoot_tol: None,
        }
    }
}

impl SolverOptions {
    pub fn with_grid(mut self, n_phi: usize, n_psi: usize) -> Self {
        self.n_phi = n_phi;
        self.n_psi = n_psi;
        self
    }

    pub fn shoot_tol(&self, cfg: &FlowConfig) -> f64 {
        self.shoot_tol.unwrap_or(1e-8 * cfg.r0 * cfg.vartheta)
    }
}

/// Converged nodal field `Q = A(q)` with the speeds `q`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpeedField {
    pub grid: Grid,
    /// `Q = A(q)`, numbered as [`Grid::idx`].
    pub big_q: Vec<f64>,
    /// `q = A⁻¹(Q)`.
    pub q: Vec<f64>,
    pub residual_norm: f64,
    pub newton_iters: usize,
}

impl SpeedField {
    #[inline]
    pub fn q_at(&self, i: usize, j: usize) -> f64 {
        self.q[self.grid.idx(i, j)]
    }

    #[inline]
    pub fn big_q_at(&self, i: usize, j: usize) -> f64 {
        self.big_q[self.grid.idx(i, j)]
    }

    /// Speeds on the inlet column `φ = 0`.
    pub fn inlet_trace(&self) -> Vec<f64> {
        self.q[..self.grid.stride()].to_vec()
    }

    /// Speeds along `ψ = m`.
    pub fn top_trace(&self) -> Vec<f64> {
        (0..=self.grid.n_phi())
            .map(|i| self.q_at(i, self.grid.n_psi()))
            .collect()
    }

    /// Speeds along the axis `ψ = 0`.
    pub fn axis_trace(&self) -> Vec<f64> {
        (0..=self.grid.n_phi()).map(|i| self.q_at(i, 0)).collect()
    }
}

fn max_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |a, x| a.max(x.abs()))
}

/// Lower clamp for Newton iterates: `max(1e-4 c*, c_l / 2)`.
pub fn clamp_floor_speed(gas: &GasModel, consts: &DerivedConstants) -> f64 {
    gas.q_floor().max(0.5 * consts.c_l)
}

/// The subsolution `A(c_e) - (ξ - φ) / (R0 c_l ρ(c_l²))` on `grid`.
pub fn subsolution(
    grid: &Grid,
    gas: &GasModel,
    cfg: &FlowConfig,
    consts: &DerivedConstants,
) -> Vec<f64> {
    let slope = 1.0 / (cfg.r0 * gas.mass_flux(consts.c_l));
    let mut qf = Vec::with_capacity(grid.len());
    for &phi in &grid.phi {
        let v = consts.a_e - (grid.xi - phi) * slope;
        qf.extend(std::iter::repeat_n(v, grid.stride()));
    }
    qf
}

/// Damped Newton on a prepared discretization.
pub fn newton(
    disc: &Discretization<'_>,
    initial: Vec<f64>,
    q_lo: f64,
    opts: &SolverOptions,
) -> Result<SpeedField> {
    let grid = disc.grid;
    let gas = disc.gas;
    let a_lo = gas.flux_a(q_lo)?;
    let a_hi = disc.a_e;
    let clamp = |v: f64| v.clamp(a_lo, a_hi);
    let mut qf: Vec<f64> = initial.into_iter().map(clamp).collect();
    let mut res = disc.residual(&qf)?;
    let mut norm = max_norm(&res);
    let mut iters = 0;
    let mut tol = opts.tol;
    while norm > tol {
        if iters == opts.max_iters {
            return Err(Error::Nonconvergence {
                iters,
                residual: norm,
            });
        }
        iters += 1;
        let (_, jac) = disc.residual_and_jacobian(&qf)?;
        debug_assert_eq!(disc.sign_pattern_violation(&jac), None);
        // Rows with very large coefficients (thin strips) cannot be
        // resolved below rounding of their largest term.
        let diag = (0..grid.len()).fold(0.0f64, |a, p| a.max(jac.get(p, p).abs()));
        tol = opts.tol.max(64.0 * f64::EPSILON * a_lo.abs() * diag);
        if norm <= tol {
            break;
        }
        let lu = jac.factor()?;
        let mut step: Vec<f64> = res.iter().map(|r| -r).collect();
        lu.solve_in_place(&mut step);
        let mut alpha = 1.0;
        loop {
            let trial: Vec<f64> = qf
                .iter()
                .zip(&step)
                .map(|(q, d)| clamp(q + alpha * d))
                .collect();
            let r = disc.residual(&trial)?;
            let n = max_norm(&r);
            if n < norm {
                qf = trial;
                res = r;
                norm = n;
                break;
            }
            alpha *= 0.5;
            if alpha < 2f64.powi(-20) {
                return Err(Error::Nonconvergence {
                    iters,
                    residual: norm,
                });
            }
        }
    }
    let q = qf
        .iter()
        .map(|&a| gas.flux_a_inverse(a))
        .collect::<Result<Vec<_>>>()?;
    Ok(SpeedField {
        grid: grid.clone(),
        big_q: qf,
        q,
        residual_norm: norm,
        newton_iters: iters,
    })
}

fn check_admissible(cfg: &FlowConfig, gas: &GasModel, consts: &DerivedConstants) -> Result<()> {
    if consts.admissible {
        return Ok(());
    }
    Err(Error::InfeasibleFlux {
        m: cfg.m,
        lower: cfg.r0 * cfg.vartheta * gas.mass_flux(consts.c_l),
        upper: cfg.r0 * cfg.vartheta * gas.mass_flux(consts.c_e),
    })
}

/// Solves the Robin problem on a given grid, optionally from a warm start.
pub fn solve_on_grid(
    grid: &Grid,
    cfg: &FlowConfig,
    gas: &GasModel,
    consts: &DerivedConstants,
    initial: Option<&[f64]>,
    opts: &SolverOptions,
) -> Result<SpeedField> {
    check_admissible(cfg, gas, consts)?;
    let disc = Discretization {
        grid,
        gas,
        r0: cfg.r0,
        a_e: consts.a_e,
        inlet: InletData::Robin,
    };
    let init = match initial {
        Some(v) if v.len() == grid.len() => v.to_vec(),
        _ => subsolution(grid, gas, cfg, consts),
    };
    newton(&disc, init, clamp_floor_speed(gas, consts), opts)
}

/// Solves the fixed-boundary problem for given `ζ ≤ ξ`.
pub fn solve_fixed(
    zeta: f64,
    xi: f64,
    cfg: &FlowConfig,
    gas: &GasModel,
    consts: &DerivedConstants,
    opts: &SolverOptions,
) -> Result<SpeedField> {
    let grid = build_grid(zeta, xi, cfg.m, opts.n_phi, opts.n_psi, consts.xi_cap(cfg))?;
    solve_on_grid(&grid, cfg, gas, consts, None, opts)
}

/// The map `g ↦ q(0, ·)`: solves the problem with inlet derivative data
/// `1/(R0 g ρ(g²))` and returns the new inlet speeds.
pub fn picard_t(
    g: &[f64],
    zeta: f64,
    xi: f64,
    cfg: &FlowConfig,
    gas: &GasModel,
    consts: &DerivedConstants,
    opts: &SolverOptions,
) -> Result<Vec<f64>> {
    let grid = build_grid(zeta, xi, cfg.m, opts.n_phi, opts.n_psi, consts.xi_cap(cfg))?;
    picard_t_on_grid(g, &grid, cfg, gas, consts, None, opts).map(|f| f.inlet_trace())
}

/// [`picard_t`] on a given grid, returning the whole field.
pub fn picard_t_on_grid(
    g: &[f64],
    grid: &Grid,
    cfg: &FlowConfig,
    gas: &GasModel,
    consts: &DerivedConstants,
    initial: Option<&[f64]>,
    opts: &SolverOptions,
) -> Result<SpeedField> {
    check_admissible(cfg, gas, consts)?;
    if g.len() != grid.stride() {
        return Err(Error::InvalidConfig(format!(
            "inlet profile has {} values, grid column has {}",
            g.len(),
            grid.stride()
        )));
    }
    let slack = 1e-12;
    for &v in g {
        if !(v >= consts.c_l * (1.0 - slack) && v < gas.c_star()) {
            return Err(Error::Range {
                what: "inlet profile (needs c_l <= g < c*)",
                value: v,
            });
        }
    }
    let data: Vec<f64> = g.iter().map(|&v| 1.0 / (cfg.r0 * gas.mass_flux(v))).collect();
    let disc = Discretization {
        grid,
        gas,
        r0: cfg.r0,
        a_e: consts.a_e,
        inlet: InletData::Prescribed(&data),
    };
    let init = match initial {
        Some(v) if v.len() == grid.len() => v.to_vec(),
        _ => subsolution(grid, gas, cfg, consts),
    };
    newton(&disc, init, clamp_floor_speed(gas, consts), opts)
}

/// Outcome of [`picard_iterate`].
#[derive(Debug, Clone, PartialEq)]
pub struct PicardRun {
    pub field: SpeedField,
    pub iterations: usize,
    /// Max-norm change of the inlet trace in the last step.
    pub last_change: f64,
}

/// Iterates [`picard_t`] from `g0` until the inlet trace moves less than
/// `tol`.
#[allow(clippy::too_many_arguments)]
pub fn picard_iterate(
    g0: &[f64],
    zeta: f64,
    xi: f64,
    cfg: &FlowConfig,
    gas: &GasModel,
    consts: &DerivedConstants,
    opts: &SolverOptions,
    tol: f64,
    max_iters: usize,
) -> Result<PicardRun> {
    let grid = build_grid(zeta, xi, cfg.m, opts.n_phi, opts.n_psi, consts.xi_cap(cfg))?;
    let mut g = g0.to_vec();
    let mut warm: Option<Vec<f64>> = None;
    for it in 1..=max_iters {
        let field = picard_t_on_grid(&g, &grid, cfg, gas, consts, warm.as_deref(), opts)?;
        let next = field.inlet_trace();
        let change = next
            .iter()
            .zip(&g)
            .fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
        if change < tol {
            return Ok(PicardRun {
                field,
                iterations: it,
                last_change: change,
            });
        }
        g = next;
        warm = Some(field.big_q);
    }
    Err(Error::MaxIterations {
        what: "picard iteration",
        iters: max_iters,
    })
}
