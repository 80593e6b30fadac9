//! Flow angle from the Chaplygin system and the map back to the physical
//! plane: nodal coordinates, the boundary curves and geometric diagnostics.

use crate::error::{Error, Result};
use crate::fixedbvp::{node_kind, Grid, NodeKind, SpeedField};
use crate::gasdyn::{FlowConfig, GasModel};

/// Nodal flow angle in radians.
#[derive(Debug, Clone, PartialEq)]
pub struct AngleField {
    pub grid: Grid,
    /// `θ` from `θ_ψ = -∂A/∂φ`, anchored at `θ = 0` on the axis.
    pub theta: Vec<f64>,
    /// `θ` from `θ_φ = ∂B/∂ψ`, anchored on the inlet arc.
    pub theta_cross: Vec<f64>,
    /// `max |theta - theta_cross|`.
    pub discrepancy: f64,
    /// Bound the discrepancy is checked against.
    pub bound: f64,
}

impl AngleField {
    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.theta[self.grid.idx(i, j)]
    }
}

/// Derivative at `xs[c]` of the quadratic through three nodes.
fn lagrange_slope(xs: [f64; 3], ys: [f64; 3], c: usize) -> f64 {
    let [x0, x1, x2] = xs;
    let x = xs[c];
    let l0 = ((x - x1) + (x - x2)) / ((x0 - x1) * (x0 - x2));
    let l1 = ((x - x0) + (x - x2)) / ((x1 - x0) * (x1 - x2));
    let l2 = ((x - x0) + (x - x1)) / ((x2 - x0) * (x2 - x1));
    l0 * ys[0] + l1 * ys[1] + l2 * ys[2]
}

/// Second-order derivative of samples `ys` at positions `xs`, centred in
/// the interior and one-sided at the ends.
fn derivative(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    let n = xs.len();
    (0..n)
        .map(|i| {
            let (s, c) = match i {
                0 => (0, 0),
                i if i == n - 1 => (n - 3, 2),
                i => (i - 1, 1),
            };
            lagrange_slope([xs[s], xs[s + 1], xs[s + 2]], [ys[s], ys[s + 1], ys[s + 2]], c)
        })
        .collect()
}

/// Cumulative trapezoid starting from `start`.
fn cumulative(xs: &[f64], ys: &[f64], start: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(xs.len());
    let mut acc = start;
    out.push(acc);
    for w in 1..xs.len() {
        acc += 0.5 * (xs[w] - xs[w - 1]) * (ys[w] + ys[w - 1]);
        out.push(acc);
    }
    out
}

/// Inlet arc length `S_in(ψ)`: cumulative trapezoid of `1/(qρ)`.
pub fn inlet_arclength(field: &SpeedField, gas: &GasModel) -> Vec<f64> {
    let g = &field.grid;
    let vals: Vec<f64> = (0..=g.n_psi())
        .map(|j| 1.0 / gas.mass_flux(field.q_at(0, j)))
        .collect();
    cumulative(&g.psi, &vals, 0.0)
}

/// Both `θ` paths on the sub-lattice `is × js` of node indices.
fn theta_paths(
    field: &SpeedField,
    b: &[f64],
    s_in: &[f64],
    r0: f64,
    is: &[usize],
    js: &[usize],
) -> (Vec<f64>, Vec<f64>) {
    let g = &field.grid;
    let phis: Vec<f64> = is.iter().map(|&i| g.phi[i]).collect();
    let psis: Vec<f64> = js.iter().map(|&j| g.psi[j]).collect();
    let (ni, nj) = (is.len(), js.len());
    // Path 1: integrate -∂Q/∂φ up each column.
    let mut dq = vec![0.0; ni * nj];
    for (b_j, &j) in js.iter().enumerate() {
        let row: Vec<f64> = is.iter().map(|&i| field.big_q_at(i, j)).collect();
        for (a, d) in derivative(&phis, &row).into_iter().enumerate() {
            dq[a * nj + b_j] = d;
        }
    }
    let mut t1 = vec![0.0; ni * nj];
    for a in 0..ni {
        let col: Vec<f64> = (0..nj).map(|b_j| -dq[a * nj + b_j]).collect();
        t1[a * nj..(a + 1) * nj].copy_from_slice(&cumulative(&psis, &col, 0.0));
    }
    // Path 2: integrate ∂B/∂ψ along each row from the inlet arc.
    let mut db = vec![0.0; ni * nj];
    for (a, &i) in is.iter().enumerate() {
        let col: Vec<f64> = js.iter().map(|&j| b[g.idx(i, j)]).collect();
        db[a * nj..(a + 1) * nj].copy_from_slice(&derivative(&psis, &col));
    }
    let mut t2 = vec![0.0; ni * nj];
    for (b_j, &j) in js.iter().enumerate() {
        let row: Vec<f64> = (0..ni).map(|a| db[a * nj + b_j]).collect();
        for (a, v) in cumulative(&phis, &row, -s_in[j] / r0).into_iter().enumerate() {
            t2[a * nj + b_j] = v;
        }
    }
    (t1, t2)
}

/// Every other index of `0..=n`, keeping `keep` and `n`.
fn coarse_indices(n: usize, keep: usize) -> Vec<usize> {
    let mut out: Vec<usize> = (0..=keep).step_by(2).collect();
    if *out.last().unwrap() != keep {
        out.push(keep);
    }
    let mut i = keep + 2;
    while i < n {
        out.push(i);
        i += 2;
    }
    if *out.last().unwrap() != n {
        out.push(n);
    }
    out
}

/// Recovers `θ` from `∂θ/∂ψ = -∂A/∂φ` and cross-checks it against
/// `∂θ/∂φ = ∂B/∂ψ` integrated from the inlet, where `θ = -S_in/R0`.
///
/// The truncation error of each path is estimated by repeating it on the
/// lattice of every other node; the paths must agree within ten times the
/// sum of those estimates plus the effect of the discrete residual.
pub fn recover_theta(field: &SpeedField, gas: &GasModel, cfg: &FlowConfig) -> Result<AngleField> {
    let g = &field.grid;
    let (n, mm) = (g.n_phi(), g.n_psi());
    if mm < 4 || n < 4 {
        return Err(Error::InsufficientResolution("grid too small for angle recovery".into()));
    }
    let b = field
        .q
        .iter()
        .map(|&q| gas.flux_b(q))
        .collect::<Result<Vec<_>>>()?;
    let s_in = inlet_arclength(field, gas);
    let all_i: Vec<usize> = (0..=n).collect();
    let all_j: Vec<usize> = (0..=mm).collect();
    let (t1, t2) = theta_paths(field, &b, &s_in, cfg.r0, &all_i, &all_j);
    let ci = coarse_indices(n, g.zeta_index);
    let cj = coarse_indices(mm, mm);
    let (c1, c2) = theta_paths(field, &b, &s_in, cfg.r0, &ci, &cj);
    let mut est1 = 0.0f64;
    let mut est2 = 0.0f64;
    for (a, &i) in ci.iter().enumerate() {
        for (bj, &j) in cj.iter().enumerate() {
            let p = g.idx(i, j);
            let q = a * cj.len() + bj;
            est1 = est1.max((t1[p] - c1[q]).abs() / 3.0);
            est2 = est2.max((t2[p] - c2[q]).abs() / 3.0);
        }
    }
    let h_min = g
        .phi
        .windows(2)
        .fold(f64::INFINITY, |a, w| a.min(w[1] - w[0]));
    let residual_term = g.xi * g.m * field.residual_norm / h_min;
    let bound = 10.0 * (est1 + est2 + residual_term);
    let discrepancy = t1
        .iter()
        .zip(&t2)
        .fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
    if discrepancy > bound {
        return Err(Error::Consistency { discrepancy, bound });
    }
    Ok(AngleField {
        grid: g.clone(),
        theta: t1,
        theta_cross: t2,
        discrepancy,
        bound,
    })
}

/// A boundary curve as physical-plane points.
pub type Curve = Vec<(f64, f64)>;

/// Physical-plane image of the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalField {
    pub grid: Grid,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// Nodes `(0, j)`.
    pub inlet_curve: Curve,
    /// Nodes `(i, m)` with `φ ≤ ζ`.
    pub wall_curve: Curve,
    /// Nodes `(i, m)` with `ζ ≤ φ ≤ ξ`; empty when `ζ = ξ`.
    pub free_streamline: Curve,
    /// Nodes `(ξ, j)`.
    pub outlet_curve: Curve,
    /// `∫ ρ q dl` across each `φ = const` node line.
    pub level_flux: Vec<f64>,
    /// Flux across the outlet curve.
    pub mass_flux_out: f64,
    /// Smallest oriented cell area divided by its `(φ, ψ)` area.
    pub min_cell_jacobian: f64,
}

impl PhysicalField {
    #[inline]
    pub fn point(&self, i: usize, j: usize) -> (f64, f64) {
        let p = self.grid.idx(i, j);
        (self.x[p], self.y[p])
    }
}

fn cell_area(p: [(f64, f64); 4]) -> f64 {
    let mut a = 0.0;
    for k in 0..4 {
        let (x0, y0) = p[k];
        let (x1, y1) = p[(k + 1) % 4];
        a += x0 * y1 - x1 * y0;
    }
    0.5 * a
}

/// Maps the grid to the physical plane: the inlet column is placed on the
/// arc of radius `R0` by arclength, then each `ψ` row is marched in `φ` with
/// the trapezoid rule for `(cos θ / q, sin θ / q)`.
pub fn reconstruct(
    field: &SpeedField,
    angles: &AngleField,
    cfg: &FlowConfig,
    gas: &GasModel,
) -> Result<PhysicalField> {
    let g = &field.grid;
    if angles.grid != *g {
        return Err(Error::InvalidConfig("angle field is on a different grid".into()));
    }
    let (n, mm) = (g.n_phi(), g.n_psi());
    let s_in = inlet_arclength(field, gas);
    let mut x = vec![0.0; g.len()];
    let mut y = vec![0.0; g.len()];
    for j in 0..=mm {
        let t = s_in[j] / cfg.r0;
        let p = g.idx(0, j);
        x[p] = -cfg.r0 * t.cos();
        y[p] = cfg.r0 * t.sin();
        for i in 1..=n {
            let (a, b) = (g.idx(i - 1, j), g.idx(i, j));
            let h = g.phi[i] - g.phi[i - 1];
            let (ta, tb) = (angles.theta[a], angles.theta[b]);
            let (qa, qb) = (field.q[a], field.q[b]);
            x[b] = x[a] + 0.5 * h * (ta.cos() / qa + tb.cos() / qb);
            y[b] = y[a] + 0.5 * h * (ta.sin() / qa + tb.sin() / qb);
        }
    }
    let pt = |i: usize, j: usize| (x[g.idx(i, j)], y[g.idx(i, j)]);
    let k = g.h_psi();
    let mut min_jac = f64::INFINITY;
    for i in 0..n {
        let h = g.phi[i + 1] - g.phi[i];
        for j in 0..mm {
            let a = cell_area([pt(i, j), pt(i + 1, j), pt(i + 1, j + 1), pt(i, j + 1)]) / (h * k);
            if !(a > 0.0) {
                return Err(Error::FoldOver { i, j });
            }
            min_jac = min_jac.min(a);
        }
    }
    let mut level_flux = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let mut f = 0.0;
        for j in 0..mm {
            let (x0, y0) = pt(i, j);
            let (x1, y1) = pt(i, j + 1);
            let flux = 0.5
                * (gas.mass_flux(field.q_at(i, j)) + gas.mass_flux(field.q_at(i, j + 1)));
            f += flux * (x1 - x0).hypot(y1 - y0);
        }
        level_flux.push(f);
    }
    let iz = g.zeta_index;
    let free_streamline = if iz < n {
        (iz..=n).map(|i| pt(i, mm)).collect()
    } else {
        Vec::new()
    };
    Ok(PhysicalField {
        grid: g.clone(),
        inlet_curve: (0..=mm).map(|j| pt(0, j)).collect(),
        wall_curve: (0..=iz).map(|i| pt(i, mm)).collect(),
        free_streamline,
        outlet_curve: (0..=mm).map(|j| pt(n, j)).collect(),
        mass_flux_out: level_flux[n],
        level_flux,
        min_cell_jacobian: min_jac,
        x,
        y,
    })
}

/// The free streamline `W` and the outlet curve `J` as point lists.
pub fn boundary_curves(phys: &PhysicalField) -> (Curve, Curve) {
    (phys.free_streamline.clone(), phys.outlet_curve.clone())
}

/// How a geometric check compares its measurement with the tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bound {
    /// Passes when `measured <= tolerance`.
    AtMost,
    /// Passes when `measured > tolerance` (a positive margin).
    Above,
}

/// Outcome of one geometric check.
#[derive(Debug, Clone, PartialEq)]
pub struct GeometryCheck {
    pub name: &'static str,
    pub bound: Bound,
    /// `None` when the check does not apply (e.g. no free streamline).
    pub passed: Option<bool>,
    pub measured: f64,
    pub tolerance: f64,
}

impl GeometryCheck {
    fn at_most(name: &'static str, measured: f64, tolerance: f64) -> Self {
        Self {
            name,
            bound: Bound::AtMost,
            passed: Some(measured <= tolerance),
            measured,
            tolerance,
        }
    }

    fn above(name: &'static str, measured: f64, tolerance: f64) -> Self {
        Self {
            name,
            bound: Bound::Above,
            passed: Some(measured > tolerance),
            measured,
            tolerance,
        }
    }

    fn skipped(name: &'static str) -> Self {
        Self {
            name,
            bound: Bound::Above,
            passed: None,
            measured: f64::NAN,
            tolerance: f64::NAN,
        }
    }

    pub fn failed(&self) -> bool {
        self.passed == Some(false)
    }
}

/// Cross products of consecutive segments, normalised to curvature.
fn turning(points: &[(f64, f64)]) -> Vec<f64> {
    points
        .windows(3)
        .map(|w| {
            let (ax, ay) = (w[1].0 - w[0].0, w[1].1 - w[0].1);
            let (bx, by) = (w[2].0 - w[1].0, w[2].1 - w[1].1);
            let (cx, cy) = (w[2].0 - w[0].0, w[2].1 - w[0].1);
            2.0 * (ax * by - ay * bx) / (ax.hypot(ay) * bx.hypot(by) * cx.hypot(cy))
        })
        .collect()
}

fn slopes(points: &[(f64, f64)], dy_dx: bool) -> Vec<f64> {
    points
        .windows(2)
        .map(|w| {
            let (dx, dy) = (w[1].0 - w[0].0, w[1].1 - w[0].1);
            if dy_dx {
                dy / dx
            } else {
                dx / dy
            }
        })
        .collect()
}

fn min_of(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().fold(f64::INFINITY, f64::min)
}

fn max_of(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().fold(f64::NEG_INFINITY, f64::max)
}

/// Geometric diagnostics of a reconstructed flow. Never fails; each entry
/// states what was measured and the tolerance it was held to.
///
/// The inlet-normality tolerance absorbs the truncation error of the
/// one-sided `φ` derivative and scales with `h² ϑ`, `h` being the largest
/// grid spacing relative to the extent of the rectangle. The mass-flux
/// tolerance is `1e-3 m`, widened to `h² m` on grids too coarse for it.
pub fn geometry_checks(
    field: &SpeedField,
    phys: &PhysicalField,
    angles: &AngleField,
    cfg: &FlowConfig,
    gas: &GasModel,
    c_l: f64,
    c_e: f64,
) -> Vec<GeometryCheck> {
    let g = &field.grid;
    let (n, mm, iz) = (g.n_phi(), g.n_psi(), g.zeta_index);
    let h_rel = (g.h_phi_max() / g.xi).max(g.h_psi() / g.m);
    let tol_angle = 1e-10 + h_rel * h_rel * cfg.vartheta;
    let strict = 1e-10;
    let tan = cfg.vartheta.tan();
    let (sv, cv) = cfg.vartheta.sin_cos();
    let mut out = Vec::new();

    let circ = max_of(phys.inlet_curve.iter().map(|&(x, y)| (x.hypot(y) - cfg.r0).abs()));
    out.push(GeometryCheck::at_most("inlet_circularity", circ, 1e-6 * cfg.r0));

    let s_in = inlet_arclength(field, gas);
    let normal = max_of((0..=mm).map(|j| (angles.at(0, j) + s_in[j] / cfg.r0).abs()));
    out.push(GeometryCheck::at_most("inlet_normality", normal, tol_angle));

    // The corner node (ζ, m) is left out of the wall checks: θ has a
    // singular derivative there and its recovered value converges like h^½.
    let tol_wall = 1e-6 * cfg.r0;
    let wall = &phys.wall_curve[..iz];
    let coll = max_of(wall.iter().map(|&(x, y)| (x * sv + y * cv).abs()));
    out.push(GeometryCheck::at_most("wall_collinearity", coll, tol_wall));

    let wall_angle = max_of((0..iz).map(|i| (angles.at(i, mm) + cfg.vartheta).abs()));
    out.push(GeometryCheck::at_most("wall_angle", wall_angle, 1e-6));

    let axis = max_of((0..=n).map(|i| angles.at(i, 0).abs()));
    out.push(GeometryCheck::at_most("axis_angle", axis, strict));

    // Interior angle bounds -ϑ < θ < 0.
    let mut theta_margin = f64::INFINITY;
    let mut speed_margin = f64::INFINITY;
    for i in 0..=n {
        for j in 0..=mm {
            let kind = node_kind(g, i, j);
            if kind != NodeKind::Dirichlet {
                let q = field.q_at(i, j);
                speed_margin = speed_margin.min((q - c_l).min(c_e - q));
            }
            if i > 0 && i < n && j > 0 && j < mm {
                let t = angles.at(i, j);
                theta_margin = theta_margin.min((-t).min(t + cfg.vartheta));
            }
        }
    }
    out.push(GeometryCheck::above("theta_bounds", theta_margin, 0.0));
    out.push(GeometryCheck::above("speed_bounds", speed_margin, 0.0));

    out.push(GeometryCheck::above("fold_over", phys.min_cell_jacobian, 0.0));

    let flux_err = max_of(phys.level_flux.iter().map(|f| (f - cfg.m).abs()));
    let tol_flux = cfg.m * (1e-3f64).max(h_rel * h_rel);
    out.push(GeometryCheck::at_most("mass_flux", flux_err, tol_flux));

    if phys.free_streamline.len() >= 3 {
        let s = slopes(&phys.free_streamline, true);
        let margin = min_of(s.iter().map(|&w| (-w).min(w + tan)));
        out.push(GeometryCheck::above("free_slope", margin, 0.0));
        let k = min_of(turning(&phys.free_streamline));
        out.push(GeometryCheck::above("free_convexity", k, strict));
    } else {
        out.push(GeometryCheck::skipped("free_slope"));
        out.push(GeometryCheck::skipped("free_convexity"));
    }
    let s = slopes(&phys.outlet_curve, false);
    let margin = min_of(s.iter().map(|&w| w.min(tan - w)));
    out.push(GeometryCheck::above("outlet_slope", margin, 0.0));
    let k = min_of(turning(&phys.outlet_curve).into_iter().map(|t| -t));
    out.push(GeometryCheck::above("outlet_convexity", k, strict));
    out.push(GeometryCheck::at_most("chaplygin_compatibility", angles.discrepancy, angles.bound));
    out
}
