//! Acceptance criteria on the reference configuration (gamma = 1.4,
//! R0 = 1, vartheta = pi/6, c_e = 0.8, m = 0.25). Prints one line per
//! criterion and exits nonzero if a criterion fails that is not listed in
//! [`KNOWN_UNATTAINABLE`].

use jetstream_cli::commands::{classify, sweep_lower_end};
use jetstream_cli::output::Summary;
use jetstream_cli::{parse_config, resolve, run, Command, Problem, Request};
use jetstream_core::fixedbvp::*;
use jetstream_core::freebnd::*;
use jetstream_core::physmap::*;
use jetstream_core::symmetric::{sym_wall_length, SymmetricSolution};
use jetstream_core::Result;
use std::time::Instant;

/// Sub-checks that cannot hold as stated; they are printed as FAIL but do
/// not fail the target.
///
/// `AC6.halving`: for a strictly monotone `ξ(ζ)`, inserting midpoints
/// splits each step `Δ` into two parts summing to `Δ`, so the largest
/// fine step is at least half the largest coarse step. Equality needs an
/// exactly linear `ξ` on the largest step, which the sweep does not have.
const KNOWN_UNATTAINABLE: &[&str] = &["AC6.halving"];

fn desk(n_phi: usize, n_psi: usize) -> Problem {
    let text = format!(
        "[gas]\ngamma = 1.4\n[flow]\nR0 = 1.0\nvartheta = {:?}\nm = 0.25\nc_e = 0.8\n\
         [solver]\nn_phi = {n_phi}\nn_psi = {n_psi}\n",
        std::f64::consts::PI / 6.0
    );
    resolve(parse_config(&text).unwrap()).unwrap()
}

struct Check {
    name: String,
    ok: bool,
    detail: String,
}

#[derive(Default)]
struct Criterion {
    checks: Vec<Check>,
}

impl Criterion {
    fn check(&mut self, name: &str, ok: bool, detail: String) {
        self.checks.push(Check {
            name: name.to_string(),
            ok,
            detail,
        });
    }

    fn error(&mut self, name: &str, e: impl std::fmt::Display) {
        self.check(name, false, format!("error: {e}"));
    }
}

/// Every converged field seen by the suite, for the bounds and the
/// angle-consistency criteria.
#[derive(Default)]
struct Fields(Vec<(String, SpeedField)>);

fn max_q_error(sol: &FreeSolution, p: &Problem) -> Result<f64> {
    let sym = SymmetricSolution::with_constants(&p.gas, &p.flow, p.consts)?;
    let g = &sol.field.grid;
    let mut err = 0.0f64;
    for i in 0..=g.n_phi() {
        let qh = sym.q_hat(g.phi[i].min(p.consts.zeta_hat))?;
        for j in 0..=g.n_psi() {
            err = err.max((sol.field.q_at(i, j) - qh).abs());
        }
    }
    Ok(err)
}

fn ac1(fields: &mut Fields) -> Criterion {
    let mut c = Criterion::default();
    let start = Instant::now();
    let mut errs = Vec::new();
    for (n, m) in [(64, 32), (128, 64), (256, 128)] {
        let p = desk(n, m);
        match solve_outlet(p.consts.zeta_hat, &p.flow, &p.gas, &p.consts, &p.opts) {
            Ok(sol) => {
                let h = sol.field.grid.h_phi_max();
                let dxi = (sol.xi - p.consts.zeta_hat).abs();
                c.check(&format!("AC1.xi_{}x{}", n + 1, m + 1), dxi <= 2.0 * h, format!("|xi-zeta_hat|={dxi:e} <= {:e}", 2.0 * h));
                match max_q_error(&sol, &p) {
                    Ok(e) => errs.push(e),
                    Err(e) => c.error("AC1.error", e),
                }
                fields.0.push((format!("symmetric {}x{}", n + 1, m + 1), sol.field));
            }
            Err(e) => c.error("AC1.solve", e),
        }
    }
    if errs.len() == 3 {
        let orders: Vec<f64> = errs.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
        // The radial flow is reproduced exactly by the scheme, so errors
        // at the solver tolerance carry no order information.
        let exact = errs.iter().all(|&e| e <= 1e-9);
        let ok = exact || orders.iter().all(|&o| o >= 1.8);
        c.check("AC1.order", ok, format!("errors {errs:?}, orders {orders:.2?}, exact={exact}"));
    }
    let t = start.elapsed().as_secs_f64();
    c.check("AC1.runtime", t < 60.0, format!("{t:.1} s < 60 s"));
    c
}

fn ac2() -> Criterion {
    let mut c = Criterion::default();
    let p = desk(64, 16);
    let (gas, k, cfg) = (&p.gas, &p.consts, &p.flow);
    let id_l = (gas.density(k.c_l).unwrap() * (k.a_e - k.a_l) - 1.0).abs();
    c.check("AC2.c_l", id_l <= 1e-10, format!("{id_l:e} <= 1e-10"));
    let id_m = (cfg.m / (k.c_m * gas.density(k.c_m).unwrap()) - cfg.r0 * cfg.vartheta).abs();
    c.check("AC2.c_m", id_m <= 1e-10, format!("{id_m:e} <= 1e-10"));
    match SymmetricSolution::new(gas, cfg).and_then(|s| sym_wall_length(&s)) {
        Ok(l) => {
            let d = (l - (cfg.r0 - k.r_hat)).abs();
            c.check("AC2.wall_length", d <= 1e-6, format!("{d:e} <= 1e-6"));
        }
        Err(e) => c.error("AC2.wall_length", e),
    }
    c
}

fn ac3(fields: &mut Fields) -> Criterion {
    let mut c = Criterion::default();
    let p = desk(128, 32);
    let (k, cfg) = (&p.consts, &p.flow);
    let cap = k.xi_cap(cfg);
    let zeta = 0.6 * k.zeta_hat;
    let run = || -> Result<(f64, Vec<f64>, Vec<SpeedField>)> {
        let (n_wall, n1, extra) = (32, 64, 32);
        let h = (0.95 * cap - zeta) / (n1 + extra) as f64;
        let g1 = build_grid_split(zeta, zeta + n1 as f64 * h, cfg.m, n_wall, n1, 32, cap)?;
        let g2 = build_grid_split(zeta, zeta + (n1 + extra) as f64 * h, cfg.m, n_wall, n1 + extra, 32, cap)?;
        let f1 = solve_on_grid(&g1, cfg, &p.gas, k, None, &p.opts)?;
        let f2 = solve_on_grid(&g2, cfg, &p.gas, k, None, &p.opts)?;
        let mut margin = f64::INFINITY;
        for i in 0..=g1.n_phi() {
            for j in 0..=g1.n_psi() {
                if node_kind(&g1, i, j) != NodeKind::Dirichlet {
                    margin = margin.min(f1.q_at(i, j) - f2.q_at(i, j));
                }
            }
        }
        let mut defects = Vec::new();
        let mut fs = vec![f1, f2];
        for s in 0..6 {
            let xi = zeta + (s as f64 + 0.5) / 6.0 * (cap - zeta);
            let f = solve_fixed(zeta, xi, cfg, &p.gas, k, &p.opts)?;
            defects.push(inlet_defect(&f, cfg, &p.gas));
            fs.push(f);
        }
        Ok((margin, defects, fs))
    };
    match run() {
        Ok((margin, d, fs)) => {
            c.check("AC3.comparison", margin >= -1e-8, format!("min(q1-q2)={margin:e} >= -1e-8"));
            let inc = d.windows(2).all(|w| w[1] > w[0]);
            c.check("AC3.defect", inc && d.len() >= 5, format!("{} samples, strictly increasing={inc}", d.len()));
            for (i, f) in fs.into_iter().enumerate() {
                fields.0.push((format!("comparison #{i}"), f));
            }
        }
        Err(e) => c.error("AC3", e),
    }
    c
}

fn ac4(fields: &Fields) -> Criterion {
    let mut c = Criterion::default();
    let k = desk(64, 16).consts;
    let mut bad = 0;
    let mut first = String::new();
    for (name, f) in &fields.0 {
        let v = check_invariants(f, k.c_l, k.c_e, k.a_e, 1e-8);
        if !v.is_empty() && first.is_empty() {
            first = format!("{name}: {:?}", v[0]);
        }
        bad += v.len();
    }
    c.check("AC4", bad == 0, format!("{} fields, {bad} violations {first}", fields.0.len()));
    c
}

fn planted_exponent(p: &Problem) -> Result<f64> {
    let cap = p.consts.xi_cap(&p.flow);
    let grid = build_grid(0.5 * p.consts.zeta_hat, 0.9 * cap, p.flow.m, 128, 128, cap)?;
    let mut big_q = vec![0.0; grid.len()];
    for i in 0..=grid.n_phi() {
        for j in 0..=grid.n_psi() {
            let (dx, dy) = (grid.phi[i] - grid.zeta, p.flow.m - grid.psi[j]);
            big_q[grid.idx(i, j)] = p.consts.a_e - 0.1 * dx.hypot(dy).sqrt() * (1.0 + 0.5 * (0.5 * dy.atan2(dx)).sin());
        }
    }
    let q = big_q.iter().map(|&a| p.gas.flux_a_inverse(a)).collect::<Result<Vec<_>>>()?;
    let field = SpeedField {
        grid,
        big_q,
        q,
        residual_norm: 0.0,
        newton_iters: 0,
    };
    corner_exponent(&field, p.consts.a_e)
}

fn ac5(fine: &Result<FreeSolution>, p: &Problem) -> Criterion {
    let mut c = Criterion::default();
    match fine {
        Ok(sol) => match corner_exponent(&sol.field, p.consts.a_e) {
            Ok(e) => c.check("AC5.exponent", (0.40..=0.55).contains(&e), format!("{e:.4} in [0.40, 0.55]")),
            Err(e) => c.error("AC5.exponent", e),
        },
        Err(e) => c.error("AC5.solve", e),
    }
    match planted_exponent(p) {
        Ok(e) => c.check("AC5.planted", (e - 0.5).abs() <= 0.02, format!("{e:.4} = 0.50 +- 0.02")),
        Err(e) => c.error("AC5.planted", e),
    }
    c
}

fn interp(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let k = xs.partition_point(|&v| v <= x).clamp(1, xs.len() - 1);
    let t = (x - xs[k - 1]) / (xs[k] - xs[k - 1]);
    ys[k - 1] + t * (ys[k] - ys[k - 1])
}

fn max_step(xs: &[f64]) -> f64 {
    xs.windows(2).map(|w| (w[1] - w[0]).abs()).fold(0.0, f64::max)
}

fn ac6(fields: &mut Fields) -> Criterion {
    let mut c = Criterion::default();
    let p = desk(64, 16);
    let run = |count: usize, lo: f64| -> Result<Vec<FreeSolution>> {
        sweep_zeta(count, lo, &p.flow, &p.gas, &p.consts, &p.opts, 1)?
            .into_iter()
            .map(|(row, sol)| row.outcome.map(|_| sol.expect("solution kept with its row")))
            .collect()
    };
    let lo = match find_zeta_star(&p.flow, &p.gas, &p.consts, &p.opts) {
        Ok(star) => sweep_lower_end(&star, p.consts.zeta_hat),
        Err(e) => {
            c.error("AC6.zeta_star", e);
            return c;
        }
    };
    let (coarse, fine) = match (run(8, lo), run(15, lo)) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => {
            c.error("AC6.sweep", e);
            return c;
        }
    };
    let xi: Vec<f64> = coarse.iter().map(|s| s.xi).collect();
    let dec = xi.windows(2).all(|w| w[1] < w[0]);
    c.check("AC6.decreasing", dec && xi.len() == 8, format!("{} rows, strictly decreasing={dec}", xi.len()));
    let xf: Vec<f64> = fine.iter().map(|s| s.xi).collect();
    let ratio = max_step(&xf) / max_step(&xi);
    c.check("AC6.halving", ratio <= 0.5, format!("max|dxi| ratio {ratio:.3} <= 0.5"));
    let mut worst = f64::NEG_INFINITY;
    for (a, b) in coarse.iter().zip(&coarse[1..]) {
        let (ta, tb) = (a.field.axis_trace(), b.field.axis_trace());
        for (i, &phi) in a.field.grid.phi.iter().enumerate() {
            if phi <= b.xi {
                worst = worst.max(ta[i] - interp(&b.field.grid.phi, &tb, phi));
            }
        }
    }
    c.check("AC6.axis_ordering", worst <= 1e-8, format!("max(q[z1]-q[z2]) on axis {worst:e} <= 1e-8"));
    for s in coarse {
        fields.0.push((format!("sweep zeta={:e}", s.zeta), s.field));
    }
    c
}

fn ac7() -> Criterion {
    let mut c = Criterion::default();
    let p = desk(64, 16);
    let verdict = |r: f64| -> std::result::Result<(&'static str, Summary), String> {
        let mut s = Summary::default();
        classify(r, &p, &mut s).map(|v| (v, s)).map_err(|e| e.to_string())
    };
    let r_hat = p.consts.r_hat;
    match verdict(0.5 * r_hat) {
        Ok((v, _)) => c.check("AC7.long", v == "NO_SOLUTION_LONG", v.to_string()),
        Err(e) => c.error("AC7.long", e),
    }
    let r_star = match verdict(r_hat) {
        Ok((v, s)) => {
            let zeta: f64 = s.get("zeta").map_or(f64::NAN, |z| z.parse().unwrap());
            let dz = (zeta - p.consts.zeta_hat).abs();
            c.check("AC7.symmetric", v == "EXISTS" && dz <= 1e-3, format!("{v}, |zeta-zeta_hat|={dz:e}"));
            s.get("R_star").map(|r| r.parse::<f64>().unwrap())
        }
        Err(e) => {
            c.error("AC7.symmetric", e);
            None
        }
    };
    if let Some(r_star) = r_star {
        let eps = 1e-3 * p.flow.r0;
        let below = verdict(r_star - eps).map(|v| v.0);
        let above = verdict(r_star + eps).map(|v| v.0);
        let ok = below == Ok("EXISTS") && above == Ok("NO_SOLUTION_SHORT");
        c.check("AC7.r_star", ok, format!("R*={r_star}: R*-eps {below:?}, R*+eps {above:?}"));
    }
    c
}

fn ac8(fine: &Result<FreeSolution>, p: &Problem) -> Criterion {
    let mut c = Criterion::default();
    let sym = desk(128, 32);
    let run = || -> Result<(f64, f64)> {
        let sol = solve_outlet(sym.consts.zeta_hat, &sym.flow, &sym.gas, &sym.consts, &sym.opts)?;
        let a = recover_theta(&sol.field, &sym.gas, &sym.flow)?;
        let ph = reconstruct(&sol.field, &a, &sym.flow, &sym.gas)?;
        let (sv, cv) = sym.flow.vartheta.sin_cos();
        let coll = ph.wall_curve.iter().fold(0.0f64, |m, &(x, y)| m.max((x * sv + y * cv).abs()));
        let circ = ph.inlet_curve.iter().fold(0.0f64, |m, &(x, y)| m.max((x.hypot(y) - sym.flow.r0).abs()));
        Ok((coll, circ))
    };
    match run() {
        Ok((coll, circ)) => {
            let tol = 1e-6 * sym.flow.r0;
            c.check("AC8.symmetric", coll <= tol && circ <= tol, format!("collinearity {coll:e}, circularity {circ:e} <= {tol:e}"));
        }
        Err(e) => c.error("AC8.symmetric", e),
    }
    let sol = match fine {
        Ok(s) => s,
        Err(e) => {
            c.error("AC8.solve", e);
            return c;
        }
    };
    let geo = recover_theta(&sol.field, &p.gas, &p.flow)
        .and_then(|a| reconstruct(&sol.field, &a, &p.flow, &p.gas).map(|ph| (a, ph)));
    match geo {
        Ok((a, ph)) => {
            let checks = geometry_checks(&sol.field, &ph, &a, &p.flow, &p.gas, p.consts.c_l, p.consts.c_e);
            for name in ["free_convexity", "outlet_convexity", "free_slope", "outlet_slope", "theta_bounds"] {
                let g = checks.iter().find(|g| g.name == name).unwrap();
                c.check(&format!("AC8.{name}"), g.passed == Some(true), format!("margin {:e}", g.measured));
            }
            let dm = (ph.mass_flux_out - p.flow.m).abs();
            c.check("AC8.mass_flux", dm <= 1e-3 * p.flow.m, format!("|flux-m|={dm:e} <= {:e}", 1e-3 * p.flow.m));
        }
        Err(e) => c.error("AC8.geometry", e),
    }
    c
}

fn ac9(fields: &Fields, p: &Problem) -> Criterion {
    let mut c = Criterion::default();
    let mut worst = 0.0f64;
    let mut failures = Vec::new();
    for (name, f) in &fields.0 {
        match recover_theta(f, &p.gas, &p.flow) {
            Ok(a) => worst = worst.max(a.discrepancy / a.bound),
            Err(e) => failures.push(format!("{name}: {e}")),
        }
    }
    c.check(
        "AC9",
        failures.is_empty(),
        format!("{} fields, max discrepancy/bound {worst:.3} {failures:?}", fields.0.len()),
    );
    c
}

fn ac10() -> Criterion {
    let mut c = Criterion::default();
    let p = desk(64, 16);
    let dirs: Vec<tempfile::TempDir> = (0..2).map(|_| tempfile::tempdir().unwrap()).collect();
    let mut outputs = Vec::new();
    for (d, jobs) in dirs.iter().zip([1, 2]) {
        let mut files = Vec::new();
        for (cmd, req) in [
            (Command::Physmap, Request { zeta: Some(0.6 * p.consts.zeta_hat), ..Default::default() }),
            (Command::Sweep, Request { n: Some(5), jobs, ..Default::default() }),
        ] {
            let req = Request {
                out: Some(d.path().join(cmd.name())),
                ..req
            };
            match run(cmd, &p, &req) {
                Ok(o) => files.extend(o.files),
                Err(e) => c.error("AC10.run", e),
            }
        }
        outputs.push(files);
    }
    let mut same = outputs[0].len() == outputs[1].len() && !outputs[0].is_empty();
    for (a, b) in outputs[0].iter().zip(&outputs[1]) {
        same &= std::fs::read(a).ok() == std::fs::read(b).ok();
    }
    c.check("AC10", same, format!("{} files byte-identical={same}", outputs[0].len()));
    c
}

fn main() {
    let total = Instant::now();
    let mut fields = Fields::default();
    let fine_p = desk(512, 128);
    let fine = solve_outlet(0.6 * fine_p.consts.zeta_hat, &fine_p.flow, &fine_p.gas, &fine_p.consts, &fine_p.opts);
    if let Ok(s) = &fine {
        fields.0.push(("zeta=0.6 zeta_hat 513x129".into(), s.field.clone()));
    }
    let mut results: Vec<(&str, Criterion)> = vec![
        ("AC1 symmetric oracle", ac1(&mut fields)),
        ("AC2 scalar identities", ac2()),
        ("AC3 comparison principle", ac3(&mut fields)),
    ];
    let c6 = ac6(&mut fields);
    results.push(("AC4 bounds and monotonicity", ac4(&fields)));
    results.push(("AC5 corner exponent", ac5(&fine, &fine_p)));
    results.push(("AC6 free-boundary monotonicity", c6));
    results.push(("AC7 classification", ac7()));
    results.push(("AC8 physical geometry", ac8(&fine, &fine_p)));
    results.push(("AC9 angle consistency", ac9(&fields, &fine_p)));
    results.push(("AC10 determinism", ac10()));

    let mut unexpected = 0;
    for (title, crit) in &results {
        let ok = crit.checks.iter().all(|c| c.ok);
        println!("{} {title}", if ok { "PASS" } else { "FAIL" });
        for ch in &crit.checks {
            let known = KNOWN_UNATTAINABLE.contains(&ch.name.as_str());
            let tag = match (ch.ok, known) {
                (true, _) => "ok",
                (false, true) => "FAIL (known unattainable)",
                (false, false) => "FAIL",
            };
            println!("    {:<22} {tag}: {}", ch.name, ch.detail);
            if !ch.ok && !known {
                unexpected += 1;
            }
        }
    }
    println!("acceptance: {:.1} s, {unexpected} unexpected failure(s)", total.elapsed().as_secs_f64());
    if unexpected > 0 {
        std::process::exit(1);
    }
}
