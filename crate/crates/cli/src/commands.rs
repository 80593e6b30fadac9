use crate::config::{Format, Problem};
use crate::output::{curve_table, render_report, Status, Summary, Table};
use crate::{verify, CliError};
use jetstream_core::fixedbvp::{solve_fixed, SpeedField};
use jetstream_core::freebnd::{find_zeta_star, match_r, solve_outlet, sweep_zeta, FreeSolution, ZetaStar};
use jetstream_core::physmap::{geometry_checks, recover_theta, reconstruct, AngleField};
use jetstream_core::symmetric::SymmetricSolution;
use jetstream_core::Error;
use std::path::PathBuf;
use std::time::Instant;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    SolveFixed,
    SolveFree,
    Classify,
    Sweep,
    Physmap,
    Verify,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::SolveFixed => "solve-fixed",
            Command::SolveFree => "solve-free",
            Command::Classify => "classify",
            Command::Sweep => "sweep",
            Command::Physmap => "physmap",
            Command::Verify => "verify",
        }
    }
}

/// Command-line arguments beyond the configuration.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Request {
    pub zeta: Option<f64>,
    pub xi: Option<f64>,
    pub radius: Option<f64>,
    /// Number of sweep points.
    pub n: Option<usize>,
    pub jobs: usize,
    /// Overrides `outputs.directory`.
    pub out: Option<PathBuf>,
    /// Plants known faults before the geometry checks of `verify`.
    pub inject: bool,
    /// Adds wall-clock time to the summary, which makes it run-dependent.
    pub timings: bool,
}

/// What a command produced: text for stdout and the written files.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Outcome {
    pub stdout: String,
    pub files: Vec<PathBuf>,
    pub summary: Summary,
    /// Failed checks (physmap and verify); nonzero maps to a failing exit.
    pub failed: usize,
}

const DEFAULT_SWEEP_POINTS: usize = 8;

const FIELD_COLUMNS: [(&str, &str); 5] = [
    ("phi", "L*c0"),
    ("psi", "rho0*c0*L"),
    ("q", "c0"),
    ("Q", "1/rho0"),
    ("theta", "rad"),
];

struct Writer<'a> {
    dir: PathBuf,
    problem: &'a Problem,
    files: Vec<PathBuf>,
}

impl Writer<'_> {
    fn table(&mut self, name: &str, t: &Table) -> Result<(), CliError> {
        if self.problem.wants(Format::Csv) {
            let p = self.dir.join(name);
            t.write(&p)?;
            self.files.push(p);
        }
        Ok(())
    }

    fn summary(&mut self, s: &Summary) -> Result<(), CliError> {
        if self.problem.wants(Format::Kv) {
            let p = self.dir.join("summary.kv");
            s.write(&p)?;
            self.files.push(p);
        }
        Ok(())
    }

    fn report(&mut self, text: &str) -> Result<(), CliError> {
        if self.problem.wants(Format::Report) {
            let p = self.dir.join("verify.report");
            std::fs::write(&p, text)?;
            self.files.push(p);
        }
        Ok(())
    }
}

fn field_table(field: &SpeedField, angles: &AngleField) -> Table {
    let g = &field.grid;
    let mut t = Table::new(&FIELD_COLUMNS);
    for i in 0..=g.n_phi() {
        for j in 0..=g.n_psi() {
            t.push(vec![g.phi[i], g.psi[j], field.q_at(i, j), field.big_q_at(i, j), angles.at(i, j)]);
        }
    }
    t
}

fn base_summary(cmd: Command, p: &Problem) -> Summary {
    let mut s = Summary::default();
    let k = &p.consts;
    s.text("command", cmd.name());
    s.num("gamma", p.gas.gamma());
    s.num("R0", p.flow.r0);
    s.num("vartheta", p.flow.vartheta);
    s.num("m", p.flow.m);
    s.num("c_star", p.gas.c_star());
    s.num("c_e", k.c_e);
    s.num("c_m", k.c_m);
    s.num("c_l", k.c_l);
    s.num("R_hat", k.r_hat);
    s.num("zeta_hat", k.zeta_hat);
    s.int("n_phi", p.opts.n_phi);
    s.int("n_psi", p.opts.n_psi);
    s
}

fn field_summary(s: &mut Summary, field: &SpeedField, angles: &AngleField) {
    s.num("residual_norm", field.residual_norm);
    s.int("newton_iters", field.newton_iters);
    s.num("theta_discrepancy", angles.discrepancy);
    s.num("theta_bound", angles.bound);
}

fn free_summary(s: &mut Summary, sol: &FreeSolution) {
    s.num("zeta", sol.zeta);
    s.num("xi", sol.xi);
    s.num("sup_phi", sol.sup_phi());
    s.num("inlet_defect", sol.inlet_defect);
    s.num("L", sol.wall_length);
    s.num("R_equiv", sol.r_equiv);
    s.int("solves", sol.solves);
}

fn star_summary(s: &mut Summary, z: &ZetaStar) {
    s.num("zeta_star", z.zeta_star);
    s.num("zeta_floor", z.floor);
    s.text("cap_binding", if z.cap_binding { "true" } else { "false" });
    s.num("R_star", z.r_star);
}

/// Max nodal `|q - q̂|` when the field is on the symmetric configuration.
fn oracle_error(p: &Problem, field: &SpeedField) -> Result<Option<f64>, CliError> {
    let g = &field.grid;
    let zh = p.consts.zeta_hat;
    if (g.zeta - zh).abs() > 1e-12 * zh || (g.xi - zh).abs() > 1e-12 * zh {
        return Ok(None);
    }
    let sym = SymmetricSolution::with_constants(&p.gas, &p.flow, p.consts)?;
    let mut err = 0.0f64;
    for i in 0..=g.n_phi() {
        let qh = sym.q_hat(g.phi[i])?;
        for j in 0..=g.n_psi() {
            err = err.max((field.q_at(i, j) - qh).abs());
        }
    }
    Ok(Some(err))
}

fn zeta_arg(req: &Request, p: &Problem) -> f64 {
    req.zeta.unwrap_or(p.consts.zeta_hat)
}

fn reject_unused(cmd: Command, req: &Request) -> Result<(), CliError> {
    let allowed: &[&str] = match cmd {
        Command::SolveFixed => &["zeta", "xi"],
        Command::SolveFree | Command::Physmap => &["zeta"],
        Command::Classify => &["radius"],
        Command::Sweep => &["n", "jobs"],
        Command::Verify => &["inject"],
    };
    let given = [
        ("zeta", req.zeta.is_some()),
        ("xi", req.xi.is_some()),
        ("radius", req.radius.is_some()),
        ("n", req.n.is_some()),
        ("jobs", req.jobs > 1),
        ("inject", req.inject),
    ];
    for (name, set) in given {
        if set && !allowed.contains(&name) {
            return Err(CliError::Config(format!(
                "--{name} does not apply to {}",
                cmd.name()
            )));
        }
    }
    Ok(())
}

/// Runs one command, writing its outputs under the output directory.
/// Failed checks are counted in [`Outcome::failed`], not returned as errors.
pub fn run(cmd: Command, p: &Problem, req: &Request) -> Result<Outcome, CliError> {
    reject_unused(cmd, req)?;
    let dir = output_dir(p, req);
    std::fs::create_dir_all(&dir)?;
    let mut w = Writer {
        dir,
        problem: p,
        files: Vec::new(),
    };
    let start = Instant::now();
    let mut s = base_summary(cmd, p);
    let mut stdout = String::new();
    let mut failed = 0;
    match cmd {
        Command::SolveFixed => {
            let zeta = zeta_arg(req, p);
            let xi = req.xi.unwrap_or(zeta);
            let field = solve_fixed(zeta, xi, &p.flow, &p.gas, &p.consts, &p.opts)?;
            let angles = recover_theta(&field, &p.gas, &p.flow)?;
            s.num("zeta", zeta);
            s.num("xi", xi);
            s.num(
                "inlet_defect",
                jetstream_core::freebnd::inlet_defect(&field, &p.flow, &p.gas),
            );
            field_summary(&mut s, &field, &angles);
            if let Some(e) = oracle_error(p, &field)? {
                s.num("oracle_max_error", e);
            }
            w.table("field.csv", &field_table(&field, &angles))?;
        }
        Command::SolveFree => {
            let sol = solve_outlet(zeta_arg(req, p), &p.flow, &p.gas, &p.consts, &p.opts)?;
            let angles = recover_theta(&sol.field, &p.gas, &p.flow)?;
            free_summary(&mut s, &sol);
            field_summary(&mut s, &sol.field, &angles);
            if let Some(e) = oracle_error(p, &sol.field)? {
                s.num("oracle_max_error", e);
            }
            w.table("field.csv", &field_table(&sol.field, &angles))?;
        }
        Command::Classify => {
            let r = req.radius.or(p.flow.radius).ok_or_else(|| {
                CliError::Config("classify needs --radius or flow.R".into())
            })?;
            s.num("R", r);
            let verdict = classify(r, p, &mut s)?;
            s.text("verdict", verdict);
            stdout = format!("{verdict}\n");
        }
        Command::Sweep => {
            let count = req.n.unwrap_or(DEFAULT_SWEEP_POINTS);
            let star = find_zeta_star(&p.flow, &p.gas, &p.consts, &p.opts)?;
            star_summary(&mut s, &star);
            let lo = sweep_lower_end(&star, p.consts.zeta_hat);
            let rows = sweep_zeta(count, lo, &p.flow, &p.gas, &p.consts, &p.opts, req.jobs.max(1))?;
            let mut t = Table::new(&[
                ("zeta", "L*c0"),
                ("xi", "L*c0"),
                ("L", "L"),
                ("R_equiv", "L"),
                ("sup_phi", "L*c0"),
            ]);
            for (row, _) in &rows {
                let v = row.outcome.clone()?;
                t.push(vec![row.zeta, v.xi, v.wall_length, v.r_equiv, v.sup_phi]);
            }
            s.int("rows", rows.len());
            w.table("sweep.csv", &t)?;
        }
        Command::Physmap => {
            let sol = solve_outlet(zeta_arg(req, p), &p.flow, &p.gas, &p.consts, &p.opts)?;
            let angles = recover_theta(&sol.field, &p.gas, &p.flow)?;
            let phys = reconstruct(&sol.field, &angles, &p.flow, &p.gas)?;
            free_summary(&mut s, &sol);
            field_summary(&mut s, &sol.field, &angles);
            s.num("mass_flux_out", phys.mass_flux_out);
            s.num("min_cell_jacobian", phys.min_cell_jacobian);
            let checks = geometry_checks(&sol.field, &phys, &angles, &p.flow, &p.gas, p.consts.c_l, p.consts.c_e);
            for c in &checks {
                let status = match c.passed {
                    None => Status::Skipped,
                    Some(true) => Status::Pass,
                    Some(false) => {
                        failed += 1;
                        Status::Fail
                    }
                };
                s.text(&format!("check.{}", c.name), status.as_str());
            }
            w.table("field.csv", &field_table(&sol.field, &angles))?;
            let g = &sol.field.grid;
            let mut coords = Table::new(&[("phi", "L*c0"), ("psi", "rho0*c0*L"), ("x", "L"), ("y", "L")]);
            for i in 0..=g.n_phi() {
                for j in 0..=g.n_psi() {
                    let (x, y) = phys.point(i, j);
                    coords.push(vec![g.phi[i], g.psi[j], x, y]);
                }
            }
            w.table("coords.csv", &coords)?;
            w.table("curves_inlet.csv", &curve_table(&phys.inlet_curve))?;
            w.table("curves_wall.csv", &curve_table(&phys.wall_curve))?;
            w.table("curves_free.csv", &curve_table(&phys.free_streamline))?;
            w.table("curves_outlet.csv", &curve_table(&phys.outlet_curve))?;
        }
        Command::Verify => {
            let run = verify::run_suite(p, req.inject);
            failed = run.lines.iter().filter(|l| l.status == Status::Fail).count();
            for l in &run.lines {
                s.text(&format!("check.{}", l.name), l.status.as_str());
            }
            if !run.planted.is_empty() {
                s.text("planted", &run.planted.join(","));
            }
            s.int("failed", failed);
            let text = render_report(&run.lines);
            w.report(&text)?;
            stdout = text;
        }
    }
    if req.timings {
        s.num("time_s", start.elapsed().as_secs_f64());
    }
    w.summary(&s)?;
    Ok(Outcome {
        stdout,
        files: w.files,
        summary: s,
        failed,
    })
}

/// Lower end of a sweep: `ζ*`, nudged inside when the cap binds there,
/// or the floor when `ζ* = 0`.
pub fn sweep_lower_end(star: &ZetaStar, zeta_hat: f64) -> f64 {
    let lo = star.zeta_star.max(star.floor);
    if star.cap_binding {
        lo + 1e-6 * (zeta_hat - lo)
    } else {
        lo
    }
}

/// Classifies a wall radius, filling the summary; returns the verdict word.
pub fn classify(r: f64, p: &Problem, s: &mut Summary) -> Result<&'static str, CliError> {
    match match_r(r, &p.flow, &p.gas, &p.consts, &p.opts) {
        Ok(m) => {
            star_summary(s, &m.zeta_star);
            free_summary(s, &m.solution);
            s.text("r_direction", &m.r_direction.to_string());
            Ok("EXISTS")
        }
        Err(Error::LongNozzle { r_star, .. }) => {
            s.num("R_star", r_star);
            Ok("NO_SOLUTION_LONG")
        }
        Err(Error::ShortNozzle { r_star, .. }) => {
            s.num("R_star", r_star);
            Ok("NO_SOLUTION_SHORT")
        }
        Err(e) => Err(e.into()),
    }
}

/// Output directory a request resolves to.
pub fn output_dir(p: &Problem, req: &Request) -> PathBuf {
    req.out.clone().unwrap_or_else(|| p.raw.outputs.directory.clone())
}

