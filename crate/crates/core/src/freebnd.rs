//! The free constants: the outlet potential `ξ` from the inlet mass-flux
//! condition, the existence threshold `ζ*`, and the correspondence between
//! the wall radius `R` and the detachment potential `ζ`.

use crate::error::{Error, Result};
use crate::fixedbvp::{build_grid_split, default_split, solve_on_grid, SolverOptions, SpeedField};
use crate::gasdyn::{DerivedConstants, FlowConfig, GasModel};
use crate::numerics::{find_root_monotone, Bracket};

const MAX_SHOTS: usize = 60;
/// Grids at least this many `φ` cells get a coarse pre-shoot.
const COARSE_LEVEL_FROM: usize = 96;
/// Smallest `ζ / ζ̂` tried when looking for `ζ*`.
pub const ZETA_FLOOR_FRACTION: f64 = 1e-4;

/// A solution of the free-boundary problem for one value of `ζ`.
#[derive(Debug, Clone, PartialEq)]
pub struct FreeSolution {
    pub field: SpeedField,
    pub zeta: f64,
    pub xi: f64,
    pub inlet_defect: f64,
    /// `∫_0^ζ dφ / q(φ, m)` by the trapezoid rule on grid nodes.
    pub wall_length: f64,
    /// `R0 - wall_length`.
    pub r_equiv: f64,
    /// Number of fixed-boundary solves spent on the shooting.
    pub solves: usize,
}

impl FreeSolution {
    /// Largest potential in the flow, i.e. the outlet value `ξ`.
    pub fn sup_phi(&self) -> f64 {
        self.xi
    }
}

/// `∫_0^m dψ / (q ρ(q²))` on the inlet column (trapezoid) minus `R0 ϑ`.
pub fn inlet_defect(field: &SpeedField, cfg: &FlowConfig, gas: &GasModel) -> f64 {
    let g = &field.grid;
    let k = g.h_psi();
    let vals: Vec<f64> = (0..=g.n_psi())
        .map(|j| 1.0 / gas.mass_flux(field.q_at(0, j)))
        .collect();
    trapezoid_uniform(&vals, k) - cfg.r0 * cfg.vartheta
}

/// Trapezoid of `1 / q(φ, m)` over the wall nodes `0 ≤ φ ≤ ζ`.
pub fn wall_length(field: &SpeedField) -> f64 {
    let g = &field.grid;
    let mm = g.n_psi();
    let vals: Vec<f64> = (0..=g.zeta_index).map(|i| 1.0 / field.q_at(i, mm)).collect();
    trapezoid_uniform(&vals, g.h_wall())
}

fn trapezoid_uniform(v: &[f64], h: f64) -> f64 {
    let n = v.len();
    let inner: f64 = v[1..n - 1].iter().sum();
    h * (inner + 0.5 * (v[0] + v[n - 1]))
}

struct Level<'a> {
    zeta: f64,
    n_wall: usize,
    n_jet: usize,
    cfg: &'a FlowConfig,
    gas: &'a GasModel,
    consts: &'a DerivedConstants,
    opts: SolverOptions,
    warm: Option<Vec<f64>>,
    solves: usize,
}

impl Level<'_> {
    fn eval(&mut self, xi: f64) -> Result<(f64, SpeedField)> {
        let n_jet = if xi > self.zeta { self.n_jet } else { 0 };
        let n_wall = if n_jet == 0 {
            self.n_wall + self.n_jet
        } else {
            self.n_wall
        };
        let grid = build_grid_split(
            self.zeta,
            xi,
            self.cfg.m,
            n_wall,
            n_jet,
            self.opts.n_psi,
            self.consts.xi_cap(self.cfg),
        )?;
        let warm = self.warm.as_deref().filter(|w| w.len() == grid.len() && n_jet > 0);
        let field = solve_on_grid(&grid, self.cfg, self.gas, self.consts, warm, &self.opts)?;
        self.solves += 1;
        if n_jet > 0 {
            self.warm = Some(field.big_q.clone());
        }
        Ok((inlet_defect(&field, self.cfg, self.gas), field))
    }
}

struct Shot {
    xi: f64,
    defect: f64,
    field: SpeedField,
}

/// Monotone shooting for the root of the increasing defect on
/// `(lo.0, cap]`, with `lo.1 < 0`. Starts from `x0` and steps by secants
/// through the last two shots; once a positive value brackets the root,
/// secants outside the bracket or a bracket that fails to halve over three
/// steps trigger bisection.
fn shoot(
    level: &mut Level<'_>,
    lo: (f64, f64),
    cap: f64,
    x0: f64,
    slope0: Option<f64>,
    tol: f64,
) -> Result<Shot> {
    let min_gap = 1e-9 * cap;
    let mut lo = lo;
    let mut hi: Option<(f64, f64)> = None;
    let mut prev: Option<(f64, f64)> = None;
    let mut x = x0.clamp(lo.0 + min_gap, cap);
    let mut best: Option<Shot> = None;
    // Bracket widths after each bracketed step, for the stall guard.
    let mut widths: Vec<f64> = Vec::new();
    for _ in 0..MAX_SHOTS {
        let (d, field) = level.eval(x)?;
        if best.as_ref().is_none_or(|b| d.abs() < b.defect.abs()) {
            best = Some(Shot {
                xi: x,
                defect: d,
                field,
            });
        }
        if d.abs() <= tol {
            return Ok(best.expect("just stored"));
        }
        if d < 0.0 {
            lo = (x, d);
        } else {
            hi = Some((x, d));
        }
        let slope = match prev {
            Some((xp, dp)) if xp != x => (d - dp) / (x - xp),
            _ => slope0.unwrap_or_else(|| (d - lo.1) / (x - lo.0)),
        };
        let secant = if slope > 0.0 && slope.is_finite() {
            x - d / slope
        } else {
            f64::NAN
        };
        prev = Some((x, d));
        x = match hi {
            Some((xh, _)) => {
                let width = xh - lo.0;
                if width <= 4.0 * f64::EPSILON * cap {
                    break;
                }
                widths.push(width);
                let stalled = widths.len() > 3 && width > 0.5 * widths[widths.len() - 4];
                if !stalled && secant > lo.0 && secant < xh {
                    secant
                } else {
                    widths.clear();
                    lo.0 + 0.5 * width
                }
            }
            None => {
                if x >= cap {
                    return Err(Error::Nonexistence(format!(
                        "inlet defect {d:e} < 0 at xi = R0*c_l = {cap}: zeta is below zeta*"
                    )));
                }
                if secant.is_nan() {
                    0.5 * (x + cap)
                } else {
                    secant.clamp(x + min_gap, cap)
                }
            }
        };
    }
    let best = best.expect("at least one shot");
    if best.defect.abs() <= 100.0 * tol {
        return Ok(best);
    }
    Err(Error::Nonconvergence {
        iters: MAX_SHOTS,
        residual: best.defect,
    })
}

fn finish(
    field: SpeedField,
    zeta: f64,
    xi: f64,
    defect: f64,
    cfg: &FlowConfig,
    solves: usize,
) -> FreeSolution {
    let wall = wall_length(&field);
    FreeSolution {
        field,
        zeta,
        xi,
        inlet_defect: defect,
        wall_length: wall,
        r_equiv: cfg.r0 - wall,
        solves,
    }
}

/// Finds `ξ ∈ [ζ, R0 c_l]` at which the inlet defect vanishes.
///
/// The defect is increasing in `ξ`. A nonnegative defect at `ξ = ζ` (beyond
/// the shooting tolerance) means `ζ > ζ̂`; a negative defect at the cap
/// means `ζ < ζ*`. Both are reported as [`Error::Nonexistence`].
pub fn solve_outlet(
    zeta: f64,
    cfg: &FlowConfig,
    gas: &GasModel,
    consts: &DerivedConstants,
    opts: &SolverOptions,
) -> Result<FreeSolution> {
    let cap = consts.xi_cap(cfg);
    let tol = opts.shoot_tol(cfg);
    crate::fixedbvp::check_potential_window(zeta, zeta, cap)?;

    // With ξ = ζ the discrete solution is linear in φ whatever the grid, so
    // its defect is exact and can be computed once on the coarsest level.
    let coarse_opts = SolverOptions {
        n_phi: (opts.n_phi / 4).max(16),
        n_psi: (opts.n_psi / 4).max(8),
        ..*opts
    };
    let use_coarse = opts.n_phi >= COARSE_LEVEL_FROM;
    let first = if use_coarse { coarse_opts } else { *opts };
    let (n1, n2) = default_split(zeta, cap, first.n_phi);
    let mut level = Level {
        zeta,
        n_wall: n1,
        n_jet: n2,
        cfg,
        gas,
        consts,
        opts: first,
        warm: None,
        solves: 0,
    };
    let (d_zeta, degenerate) = level.eval(zeta)?;
    if d_zeta.abs() <= tol {
        let (field, solves) = if use_coarse {
            let grid = build_grid_split(zeta, zeta, cfg.m, opts.n_phi, 0, opts.n_psi, cap)?;
            (solve_on_grid(&grid, cfg, gas, consts, None, opts)?, level.solves + 1)
        } else {
            (degenerate, level.solves)
        };
        let d = inlet_defect(&field, cfg, gas);
        return Ok(finish(field, zeta, zeta, d, cfg, solves));
    }
    if d_zeta > 0.0 {
        return Err(Error::Nonexistence(format!(
            "inlet defect {d_zeta:e} > 0 already at xi = zeta = {zeta}: zeta exceeds zeta_hat"
        )));
    }
    if zeta >= cap {
        return Err(Error::Nonexistence(format!(
            "no room for xi above zeta = {zeta} (R0*c_l = {cap})"
        )));
    }

    // Start at the cap: a negative defect there settles nonexistence.
    let shot = shoot(&mut level, (zeta, d_zeta), cap, cap, None, tol)?;
    if !use_coarse {
        let solves = level.solves;
        return Ok(finish(shot.field, zeta, shot.xi, shot.defect, cfg, solves));
    }
    let coarse_solves = level.solves;
    let slope = (shot.defect - d_zeta) / (shot.xi - zeta);
    let (n1, n2) = default_split(zeta, shot.xi, opts.n_phi);
    let mut fine = Level {
        zeta,
        n_wall: n1,
        n_jet: n2,
        cfg,
        gas,
        consts,
        opts: *opts,
        warm: None,
        solves: 0,
    };
    let fine_shot = shoot(&mut fine, (zeta, d_zeta), cap, shot.xi, Some(slope), tol)?;
    Ok(finish(
        fine_shot.field,
        zeta,
        fine_shot.xi,
        fine_shot.defect,
        cfg,
        coarse_solves + fine.solves,
    ))
}

/// Result of [`find_zeta_star`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZetaStar {
    /// `ζ*`, or 0 when every tested `ζ` down to the floor was solvable.
    pub zeta_star: f64,
    /// The smallest `ζ` tried.
    pub floor: f64,
    /// Whether `ζ*` lies above the floor, so that `ξ[ζ*] = R0 c_l`.
    pub cap_binding: bool,
    /// Defect at `(ζ*, R0 c_l)`.
    pub defect_at_cap: f64,
    /// `R*`: `R0 - L` at `(ζ*, R0 c_l)`, or at the floor when `ζ* = 0`
    /// (the largest radius verified to be attainable).
    pub r_star: f64,
}

/// Defect and field at `ξ = R0 c_l` for the given `ζ`.
fn defect_at_cap(
    zeta: f64,
    cfg: &FlowConfig,
    gas: &GasModel,
    consts: &DerivedConstants,
    opts: &SolverOptions,
) -> Result<(f64, SpeedField)> {
    let cap = consts.xi_cap(cfg);
    let (n1, n2) = default_split(zeta, cap, opts.n_phi);
    let grid = build_grid_split(zeta, cap, cfg.m, n1, n2, opts.n_psi, cap)?;
    let field = solve_on_grid(&grid, cfg, gas, consts, None, opts)?;
    Ok((inlet_defect(&field, cfg, gas), field))
}

/// Finds `ζ*`: the `ζ` at which the shooting for `ξ` reaches `R0 c_l`.
///
/// The defect at `ξ = R0 c_l` increases with `ζ`; `ζ*` is its root on
/// `[floor, ζ̂)`, or the floor when it is already nonnegative there.
pub fn find_zeta_star(
    cfg: &FlowConfig,
    gas: &GasModel,
    consts: &DerivedConstants,
    opts: &SolverOptions,
) -> Result<ZetaStar> {
    let zhat = consts.zeta_hat;
    let floor = ZETA_FLOOR_FRACTION * zhat;
    let (d_floor, f_floor) = defect_at_cap(floor, cfg, gas, consts, opts)?;
    if d_floor >= 0.0 {
        let l = wall_length(&f_floor);
        return Ok(ZetaStar {
            zeta_star: 0.0,
            floor,
            cap_binding: false,
            defect_at_cap: d_floor,
            r_star: cfg.r0 - l,
        });
    }
    let (d_hat, _) = defect_at_cap(zhat, cfg, gas, consts, opts)?;
    let mut failure = None;
    let f = |z: f64| match defect_at_cap(z, cfg, gas, consts, opts) {
        Ok((d, _)) => d,
        Err(e) => {
            failure.get_or_insert(e);
            f64::NAN
        }
    };
    let bracket = Bracket::from_values(floor, zhat, d_floor, d_hat)?;
    let root = find_root_monotone(f, bracket, 1e-9 * zhat);
    if let Some(e) = failure {
        return Err(e);
    }
    let zs = root?;
    let (d, field) = defect_at_cap(zs, cfg, gas, consts, opts)?;
    Ok(ZetaStar {
        zeta_star: zs,
        floor,
        cap_binding: true,
        defect_at_cap: d,
        r_star: cfg.r0 - wall_length(&field),
    })
}

/// One row of [`sweep_zeta`].
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub zeta: f64,
    pub outcome: std::result::Result<SweepValues, Error>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepValues {
    pub xi: f64,
    pub wall_length: f64,
    pub r_equiv: f64,
    pub sup_phi: f64,
}

/// `count` values log-spaced on `[lo, hi]`, ascending, with exact ends.
pub fn log_spaced(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| match i {
            0 => lo,
            i if i == count - 1 => hi,
            i => (a + (b - a) * i as f64 / (count - 1) as f64).exp(),
        })
        .collect()
}

/// Solves the free problem at `count` values of `ζ` log-spaced on
/// `[zeta_lo, ζ̂]`. Rows come back in ascending `ζ`; failures are recorded
/// per row. `jobs > 1` spreads rows over threads without changing results.
pub fn sweep_zeta(
    count: usize,
    zeta_lo: f64,
    cfg: &FlowConfig,
    gas: &GasModel,
    consts: &DerivedConstants,
    opts: &SolverOptions,
    jobs: usize,
) -> Result<Vec<(SweepRow, Option<FreeSolution>)>> {
    if count < 3 {
        return Err(Error::InvalidConfig(format!(
            "sweep needs at least 3 points, got {count}"
        )));
    }
    if !(zeta_lo > 0.0 && zeta_lo < consts.zeta_hat) {
        return Err(Error::Constraint(format!(
            "sweep lower end {zeta_lo} must lie in (0, zeta_hat = {})",
            consts.zeta_hat
        )));
    }
    let zetas = log_spaced(zeta_lo, consts.zeta_hat, count);
    let run = |z: f64| {
        let r = solve_outlet(z, cfg, gas, consts, opts);
        let row = SweepRow {
            zeta: z,
            outcome: r.as_ref().map_err(Clone::clone).map(|s| SweepValues {
                xi: s.xi,
                wall_length: s.wall_length,
                r_equiv: s.r_equiv,
                sup_phi: s.sup_phi(),
            }),
        };
        (row, r.ok())
    };
    let jobs = jobs.clamp(1, count);
    if jobs == 1 {
        return Ok(zetas.into_iter().map(run).collect());
    }
    let next = std::sync::atomic::AtomicUsize::new(0);
    let mut slots: Vec<Option<(SweepRow, Option<FreeSolution>)>> = vec![None; count];
    let results = std::sync::Mutex::new(&mut slots);
    std::thread::scope(|s| {
        for _ in 0..jobs {
            s.spawn(|| loop {
                let i = next.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                if i >= count {
                    break;
                }
                let out = run(zetas[i]);
                results.lock().expect("sweep worker panicked")[i] = Some(out);
            });
        }
    });
    Ok(slots.into_iter().map(|s| s.expect("every row filled")).collect())
}

/// Classification of a wall radius.
#[derive(Debug, Clone, PartialEq)]
pub struct Matched {
    pub solution: FreeSolution,
    pub zeta_star: ZetaStar,
    /// `+1` when the equivalent radius increases with `ζ`, `-1` otherwise.
    pub r_direction: i8,
}

/// Finds the flow whose wall has radius `r`: a `ζ ∈ [ζ*, ζ̂]` with
/// `R0 - L(ζ) = r`.
///
/// `r < R̂` is a long nozzle and `r > R*` a short one (including
/// `r ≥ R0`); both are errors carrying `R̂` and `R*`. `|r - R*| ≤ tol`
/// counts as existent.
pub fn match_r(
    r: f64,
    cfg: &FlowConfig,
    gas: &GasModel,
    consts: &DerivedConstants,
    opts: &SolverOptions,
) -> Result<Matched> {
    if !(r > 0.0) {
        return Err(Error::Constraint(format!("wall radius R = {r} must be positive")));
    }
    let tol = opts.shoot_tol(cfg);
    let r_hat = consts.r_hat;
    let star = find_zeta_star(cfg, gas, consts, opts)?;
    if r < r_hat - tol {
        return Err(Error::LongNozzle {
            r,
            r_hat,
            r_star: star.r_star,
        });
    }
    if r > star.r_star + tol {
        return Err(Error::ShortNozzle {
            r,
            r_hat,
            r_star: star.r_star,
        });
    }

    // Tabulate R_equiv on [ζ*, ζ̂] to find the direction and a bracket.
    let zs_lo = star.zeta_star.max(star.floor);
    let z_lo_solvable = if star.cap_binding {
        // At ζ* itself the shooting sits on the cap; step inside slightly.
        zs_lo + 1e-6 * (consts.zeta_hat - zs_lo)
    } else {
        zs_lo
    };
    let zetas = log_spaced(z_lo_solvable, consts.zeta_hat, 6);
    let mut table = Vec::with_capacity(zetas.len());
    for &z in &zetas {
        let s = solve_outlet(z, cfg, gas, consts, opts)?;
        table.push((z, s.r_equiv, s));
    }
    let diffs: Vec<f64> = table.windows(2).map(|w| w[1].1 - w[0].1).collect();
    let direction: i8 = if diffs.iter().all(|d| *d > 0.0) {
        1
    } else if diffs.iter().all(|d| *d < 0.0) {
        -1
    } else {
        return Err(Error::Consistency {
            discrepancy: diffs.iter().fold(f64::INFINITY, |a, d| a.min(d.abs())),
            bound: 0.0,
        });
    };
    let matched = |s: FreeSolution| Matched {
        solution: s,
        zeta_star: star,
        r_direction: direction,
    };
    // Exact hits and ends of the tabulated range.
    let (first, last) = (&table[0], &table[table.len() - 1]);
    let outside = |v: f64| {
        let (a, b) = (first.1.min(last.1), first.1.max(last.1));
        if v <= a {
            Some(a)
        } else if v >= b {
            Some(b)
        } else {
            None
        }
    };
    if let Some(end) = outside(r) {
        let idx = if end == first.1 { 0 } else { table.len() - 1 };
        return Ok(matched(table.swap_remove(idx).2));
    }
    let k = table
        .windows(2)
        .position(|w| (w[0].1 - r) * (w[1].1 - r) <= 0.0)
        .expect("r lies inside the tabulated range");
    let (za, ra) = (table[k].0, table[k].1 - r);
    let (zb, rb) = (table[k + 1].0, table[k + 1].1 - r);
    let mut failure = None;
    let mut last_sol: Option<FreeSolution> = None;
    let f = |z: f64| match solve_outlet(z, cfg, gas, consts, opts) {
        Ok(s) => {
            let v = s.r_equiv - r;
            last_sol = Some(s);
            v
        }
        Err(e) => {
            failure.get_or_insert(e);
            f64::NAN
        }
    };
    let z = find_root_monotone(f, Bracket::from_values(za, zb, ra, rb)?, 1e-10 * consts.zeta_hat);
    if let Some(e) = failure {
        return Err(e);
    }
    let z = z?;
    let sol = match last_sol {
        Some(s) if s.zeta == z => s,
        _ => solve_outlet(z, cfg, gas, consts, opts)?,
    };
    Ok(matched(sol))
}
