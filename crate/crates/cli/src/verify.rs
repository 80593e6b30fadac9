use crate::config::Problem;
use crate::output::{CheckLine, Status};
use jetstream_core::fixedbvp::{
    build_grid_split, corner_exponent, node_kind, solve_fixed, solve_on_grid, NodeKind, SpeedField,
};
use jetstream_core::freebnd::{inlet_defect, log_spaced, solve_outlet, FreeSolution};
use jetstream_core::physmap::{geometry_checks, Bound, reconstruct, recover_theta, AngleField, PhysicalField};
use jetstream_core::symmetric::{sym_wall_length, SymmetricSolution};
use jetstream_core::{Error, Result};

/// `ζ / ζ̂` of the non-symmetric runs.
pub const ZETA_FRACTION: f64 = 0.6;

/// Geometry checks that fault injection makes fail.
pub const PLANTED: [&str; 3] = ["geometry.wall_collinearity", "geometry.wall_angle", "geometry.speed_bounds"];

#[derive(Debug, Clone, PartialEq, Default)]
pub struct VerifyRun {
    pub lines: Vec<CheckLine>,
    /// Names of the checks with planted faults; empty without injection.
    pub planted: Vec<String>,
}

struct Lines(Vec<CheckLine>);

impl Lines {
    fn push(&mut self, name: &str, status: Status, measured: f64, tolerance: String) {
        self.0.push(CheckLine {
            name: name.to_string(),
            status,
            measured,
            tolerance,
        });
    }

    /// `measured <= tol`.
    fn at_most(&mut self, name: &str, measured: f64, tol: f64) {
        let ok = measured <= tol;
        self.push(name, pass(ok), measured, format!("<={tol:?}"));
    }

    /// `measured >= tol`, or `> tol` when `strict`.
    fn at_least(&mut self, name: &str, measured: f64, tol: f64, strict: bool) {
        let ok = if strict { measured > tol } else { measured >= tol };
        let op = if strict { ">" } else { ">=" };
        self.push(name, pass(ok), measured, format!("{op}{tol:?}"));
    }

    fn within(&mut self, name: &str, measured: f64, lo: f64, hi: f64) {
        let ok = measured >= lo && measured <= hi;
        self.push(name, pass(ok), measured, format!("[{lo:?},{hi:?}]"));
    }

    fn error(&mut self, name: &str, e: &Error) {
        self.push(name, Status::Fail, f64::NAN, format!("error:{}", sanitize(&e.to_string())));
    }

    fn skipped(&mut self, name: &str, why: &str) {
        self.push(name, Status::Skipped, f64::NAN, sanitize(why));
    }
}

fn pass(ok: bool) -> Status {
    if ok {
        Status::Pass
    } else {
        Status::Fail
    }
}

/// Keeps report fields free of whitespace.
fn sanitize(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join("_")
}

/// Runs every invariant check on the configuration. With `inject`, known
/// faults are planted in the geometry of the non-symmetric run first.
pub fn run_suite(p: &Problem, inject: bool) -> VerifyRun {
    let mut out = Lines(Vec::new());
    gas_checks(p, &mut out);
    if let Err(e) = symmetric_checks(p, &mut out) {
        out.error("oracle", &e);
    }
    if let Err(e) = comparison_checks(p, &mut out) {
        out.error("comparison", &e);
    }
    let mut planted = Vec::new();
    match solve_outlet(ZETA_FRACTION * p.consts.zeta_hat, &p.flow, &p.gas, &p.consts, &p.opts) {
        Ok(sol) => {
            field_checks(p, &sol, &mut out);
            corner_checks(p, &sol.field, &mut out);
            match geometry(p, &sol.field) {
                Ok((angles, phys)) => {
                    if inject {
                        let (f, a, ph) = plant_faults(p, &sol.field, &angles, &phys);
                        push_geometry(p, "geometry", &f, &a, &ph, &mut out);
                        planted = PLANTED.iter().map(|s| s.to_string()).collect();
                    } else {
                        push_geometry(p, "geometry", &sol.field, &angles, &phys, &mut out);
                    }
                }
                Err(e) => out.error("geometry", &e),
            }
        }
        Err(e) => out.error("free", &e),
    }
    if let Err(e) = sweep_check(p, &mut out) {
        out.error("sweep.xi_monotone", &e);
    }
    VerifyRun {
        lines: out.0,
        planted,
    }
}

fn gas_checks(p: &Problem, out: &mut Lines) {
    let (gas, k, cfg) = (&p.gas, &p.consts, &p.flow);
    let qs: Vec<f64> = (1..=64).map(|i| gas.c_star() * i as f64 / 65.0).collect();
    let rel = |inv: &dyn Fn(f64) -> Result<f64>| -> Result<f64> {
        let mut worst = 0.0f64;
        for &q in &qs {
            worst = worst.max((inv(q)? - q).abs() / q);
        }
        Ok(worst)
    };
    match rel(&|q| gas.flux_a_inverse(gas.flux_a(q)?)) {
        Ok(v) => out.at_most("gas.a_round_trip", v, 1e-12),
        Err(e) => out.error("gas.a_round_trip", &e),
    }
    match rel(&|q| gas.flux_b_inverse(gas.flux_b(q)?)) {
        Ok(v) => out.at_most("gas.b_round_trip", v, 1e-12),
        Err(e) => out.error("gas.b_round_trip", &e),
    }
    let id_l = gas.density(k.c_l).map(|r| (r * (k.a_e - k.a_l) - 1.0).abs());
    match id_l {
        Ok(v) => out.at_most("const.c_l_identity", v, 1e-10),
        Err(e) => out.error("const.c_l_identity", &e),
    }
    let id_m = (cfg.m / gas.mass_flux(k.c_m) - cfg.r0 * cfg.vartheta).abs();
    out.at_most("const.c_m_identity", id_m, 1e-10);
    let wall = SymmetricSolution::with_constants(gas, cfg, *k).and_then(|s| sym_wall_length(&s));
    match wall {
        Ok(l) => out.at_most("const.sym_wall_length", (l - (cfg.r0 - k.r_hat)).abs(), 1e-6),
        Err(e) => out.error("const.sym_wall_length", &e),
    }
}

fn symmetric_checks(p: &Problem, out: &mut Lines) -> Result<()> {
    let k = &p.consts;
    let sol = solve_outlet(k.zeta_hat, &p.flow, &p.gas, k, &p.opts)?;
    let g = &sol.field.grid;
    out.at_most("oracle.xi", (sol.xi - k.zeta_hat).abs(), 2.0 * g.h_phi_max());
    let sym = SymmetricSolution::with_constants(&p.gas, &p.flow, *k)?;
    let mut err = 0.0f64;
    for i in 0..=g.n_phi() {
        let qh = sym.q_hat(g.phi[i].min(k.zeta_hat))?;
        for j in 0..=g.n_psi() {
            err = err.max((sol.field.q_at(i, j) - qh).abs());
        }
    }
    out.at_most("oracle.field", err, 1e-8);
    match geometry(p, &sol.field) {
        Ok((a, ph)) => push_geometry(p, "symmetric", &sol.field, &a, &ph, out),
        Err(e) => out.error("symmetric", &e),
    }
    Ok(())
}

fn comparison_checks(p: &Problem, out: &mut Lines) -> Result<()> {
    let (k, cfg) = (&p.consts, &p.flow);
    let cap = k.xi_cap(cfg);
    let zeta = ZETA_FRACTION * k.zeta_hat;
    // Same φ spacing on both grids so the shorter grid's nodes are shared.
    let n_wall = (p.opts.n_phi / 4).max(4);
    let n_short = p.opts.n_phi - n_wall;
    let extra = (p.opts.n_phi / 4).max(4);
    let h = (0.95 * cap - zeta) / (n_short + extra) as f64;
    let xi1 = zeta + n_short as f64 * h;
    let xi2 = zeta + (n_short + extra) as f64 * h;
    let g1 = build_grid_split(zeta, xi1, cfg.m, n_wall, n_short, p.opts.n_psi, cap)?;
    let g2 = build_grid_split(zeta, xi2, cfg.m, n_wall, n_short + extra, p.opts.n_psi, cap)?;
    let f1 = solve_on_grid(&g1, cfg, &p.gas, k, None, &p.opts)?;
    let f2 = solve_on_grid(&g2, cfg, &p.gas, k, None, &p.opts)?;
    let mut margin = f64::INFINITY;
    for i in 0..=g1.n_phi() {
        for j in 0..=g1.n_psi() {
            // Both fields equal c_e on the shorter grid's Dirichlet set.
            if node_kind(&g1, i, j) != NodeKind::Dirichlet {
                margin = margin.min(f1.q_at(i, j) - f2.q_at(i, j));
            }
        }
    }
    out.at_least("comparison.nodal", margin, -1e-8, false);

    let mut defects = Vec::new();
    for s in 0..5 {
        let xi = zeta + (s as f64 + 0.5) / 5.0 * (cap - zeta);
        let f = solve_fixed(zeta, xi, cfg, &p.gas, k, &p.opts)?;
        defects.push(inlet_defect(&f, cfg, &p.gas));
    }
    let step = defects
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min);
    out.at_least("comparison.defect_increasing", step, 0.0, true);
    Ok(())
}

fn field_checks(p: &Problem, sol: &FreeSolution, out: &mut Lines) {
    let f = &sol.field;
    let g = &f.grid;
    let k = &p.consts;
    out.at_most("free.inlet_defect", sol.inlet_defect.abs(), p.opts.shoot_tol(&p.flow));
    let (mut bounds, mut dphi, mut dpsi) = (f64::INFINITY, f64::INFINITY, f64::INFINITY);
    for i in 0..=g.n_phi() {
        for j in 0..=g.n_psi() {
            let q = f.q_at(i, j);
            if node_kind(g, i, j) != NodeKind::Dirichlet {
                bounds = bounds.min((q - k.c_l).min(k.c_e - q));
            }
            if i < g.n_phi() {
                dphi = dphi.min(f.q_at(i + 1, j) - q);
            }
            if j < g.n_psi() {
                dpsi = dpsi.min(f.q_at(i, j + 1) - q);
            }
        }
    }
    out.at_least("field.bounds", bounds, 0.0, true);
    out.at_least("field.monotone_phi", dphi, -1e-8, false);
    out.at_least("field.monotone_psi", dpsi, -1e-8, false);
}

fn corner_checks(p: &Problem, field: &SpeedField, out: &mut Lines) {
    match corner_exponent(field, p.consts.a_e) {
        Ok(e) => out.within("corner.exponent", e, 0.40, 0.55),
        Err(Error::InsufficientResolution(why)) => out.skipped("corner.exponent", &why),
        Err(e) => out.error("corner.exponent", &e),
    }
    // A planted r^½ profile on the same grid checks the fit itself.
    let g = &field.grid;
    let (zeta, m) = (g.zeta, g.m);
    let big_q: Vec<f64> = (0..g.len())
        .map(|p_| {
            let (i, j) = (p_ / g.stride(), p_ % g.stride());
            let (dx, dy) = (g.phi[i] - zeta, m - g.psi[j]);
            p.consts.a_e - 0.1 * dx.hypot(dy).sqrt() * (1.0 + 0.5 * (0.5 * dy.atan2(dx)).sin())
        })
        .collect();
    let q = big_q.iter().map(|&a| p.gas.flux_a_inverse(a).unwrap_or(f64::NAN)).collect();
    let planted = SpeedField {
        grid: g.clone(),
        q,
        big_q,
        residual_norm: 0.0,
        newton_iters: 0,
    };
    match corner_exponent(&planted, p.consts.a_e) {
        Ok(e) => out.within("corner.planted_half", e, 0.48, 0.52),
        Err(Error::InsufficientResolution(why)) => out.skipped("corner.planted_half", &why),
        Err(e) => out.error("corner.planted_half", &e),
    }
}

fn geometry(p: &Problem, field: &SpeedField) -> Result<(AngleField, PhysicalField)> {
    let angles = recover_theta(field, &p.gas, &p.flow)?;
    let phys = reconstruct(field, &angles, &p.flow, &p.gas)?;
    Ok((angles, phys))
}

fn push_geometry(
    p: &Problem,
    prefix: &str,
    field: &SpeedField,
    angles: &AngleField,
    phys: &PhysicalField,
    out: &mut Lines,
) {
    for c in geometry_checks(field, phys, angles, &p.flow, &p.gas, p.consts.c_l, p.consts.c_e) {
        let name = format!("{prefix}.{}", c.name);
        match c.passed {
            None => out.skipped(&name, "not_applicable"),
            Some(ok) => {
                let op = match c.bound {
                    Bound::AtMost => "<=",
                    Bound::Above => ">",
                };
                out.push(&name, pass(ok), c.measured, format!("{op}{:?}", c.tolerance))
            }
        }
    }
}

/// Plants three faults: a wall angle off by 0.1 rad, a wall node moved
/// 1e-5 R0 off the wall ray, and an interior speed above `c_e`.
pub fn plant_faults(
    p: &Problem,
    field: &SpeedField,
    angles: &AngleField,
    phys: &PhysicalField,
) -> (SpeedField, AngleField, PhysicalField) {
    let g = &field.grid;
    let (mm, iz) = (g.n_psi(), g.zeta_index);
    let mut a = angles.clone();
    a.theta[g.idx(iz.min(2), mm)] += 0.1;
    let mut ph = phys.clone();
    let w = iz / 2;
    let node = g.idx(w, mm);
    let (sv, cv) = p.flow.vartheta.sin_cos();
    let shift = 1e-5 * p.flow.r0;
    ph.x[node] += shift * sv;
    ph.y[node] += shift * cv;
    ph.wall_curve[w] = (ph.x[node], ph.y[node]);
    let mut f = field.clone();
    f.q[g.idx(g.n_phi() / 2, mm / 2)] = 1.01 * p.consts.c_e;
    (f, a, ph)
}

fn sweep_check(p: &Problem, out: &mut Lines) -> Result<()> {
    let k = &p.consts;
    let mut xs = Vec::new();
    for z in log_spaced(0.3 * k.zeta_hat, k.zeta_hat, 4) {
        xs.push(solve_outlet(z, &p.flow, &p.gas, k, &p.opts)?.xi);
    }
    let step = xs.windows(2).map(|w| w[0] - w[1]).fold(f64::INFINITY, f64::min);
    out.at_least("sweep.xi_monotone", step, 0.0, true);
    Ok(())
}
