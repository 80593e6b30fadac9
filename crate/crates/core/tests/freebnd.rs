use jetstream_core::fixedbvp::*;
use jetstream_core::freebnd::*;
use jetstream_core::*;
use std::f64::consts::PI;

fn desk() -> (GasModel, FlowConfig, DerivedConstants) {
    let gas = GasModel::new(1.4).unwrap();
    let cfg = FlowConfig::new(1.0, PI / 6.0, 0.25, 0.8);
    let k = derive_constants(&gas, &cfg).unwrap();
    (gas, cfg, k)
}

fn opts(n: usize, m: usize) -> SolverOptions {
    SolverOptions::default().with_grid(n, m)
}

fn uniform_field(zeta: f64, xi: f64, q: f64, gas: &GasModel, cfg: &FlowConfig, k: &DerivedConstants) -> SpeedField {
    let grid = build_grid(zeta, xi, cfg.m, 32, 8, k.xi_cap(cfg)).unwrap();
    let a = gas.flux_a(q).unwrap();
    SpeedField {
        big_q: vec![a; grid.len()],
        q: vec![q; grid.len()],
        grid,
        residual_norm: 0.0,
        newton_iters: 0,
    }
}

/// Linear interpolation of a nodal trace.
fn interp(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let k = xs.partition_point(|&v| v <= x).clamp(1, xs.len() - 1);
    let t = (x - xs[k - 1]) / (xs[k] - xs[k - 1]);
    ys[k - 1] + t * (ys[k] - ys[k - 1])
}

#[test]
fn inlet_defect_sign_of_uniform_speeds() {
    let (gas, cfg, k) = desk();
    let (z, x) = (0.5 * k.zeta_hat, k.zeta_hat);
    // Fast fluid carries the flux through a short inlet arc and vice versa.
    assert!(inlet_defect(&uniform_field(z, x, k.c_e, &gas, &cfg, &k), &cfg, &gas) < 0.0);
    assert!(inlet_defect(&uniform_field(z, x, k.c_l, &gas, &cfg, &k), &cfg, &gas) > 0.0);
}

#[test]
fn wall_length_of_uniform_speed() {
    let (gas, cfg, k) = desk();
    let f = uniform_field(0.5 * k.zeta_hat, k.zeta_hat, 0.7, &gas, &cfg, &k);
    assert!((wall_length(&f) - 0.5 * k.zeta_hat / 0.7).abs() < 1e-14);
}

#[test]
fn symmetric_jet_recovered() {
    let (gas, cfg, k) = desk();
    let s = solve_outlet(k.zeta_hat, &cfg, &gas, &k, &opts(64, 16)).unwrap();
    assert!((s.xi - k.zeta_hat).abs() <= 2.0 * s.field.grid.h_phi_max());
    assert!((s.wall_length - (cfg.r0 - k.r_hat)).abs() <= 1e-6);
    assert!((s.r_equiv - k.r_hat).abs() <= 1e-6);
    assert_eq!(s.sup_phi(), s.xi);
}

#[test]
fn zeta_beyond_symmetric_value_has_no_solution() {
    let (gas, cfg, k) = desk();
    let e = solve_outlet(1.2 * k.zeta_hat, &cfg, &gas, &k, &opts(32, 8));
    assert!(matches!(e, Err(Error::Nonexistence(_))), "{e:?}");
}

#[test]
fn defect_increases_with_outlet_potential() {
    let (gas, cfg, k) = desk();
    let zeta = 0.6 * k.zeta_hat;
    let cap = k.xi_cap(&cfg);
    let d: Vec<f64> = (0..6)
        .map(|s| {
            let xi = zeta + (s as f64 + 0.5) / 6.0 * (cap - zeta);
            let f = solve_fixed(zeta, xi, &cfg, &gas, &k, &opts(48, 12)).unwrap();
            inlet_defect(&f, &cfg, &gas)
        })
        .collect();
    assert!(d.windows(2).all(|w| w[1] > w[0]), "{d:?}");
}

#[test]
fn free_solution_at_interior_zeta() {
    let (gas, cfg, k) = desk();
    let o = opts(64, 16);
    let s = solve_outlet(0.6 * k.zeta_hat, &cfg, &gas, &k, &o).unwrap();
    assert!(s.inlet_defect.abs() <= o.shoot_tol(&cfg));
    assert!(s.xi > s.zeta && s.xi < k.xi_cap(&cfg));
    assert!(check_invariants(&s.field, k.c_l, k.c_e, k.a_e, 1e-8).is_empty());
}

#[test]
fn sweep_is_monotone_and_thread_independent() {
    let (gas, cfg, k) = desk();
    let o = opts(48, 12);
    let lo = 0.3 * k.zeta_hat;
    let serial = sweep_zeta(5, lo, &cfg, &gas, &k, &o, 1).unwrap();
    let parallel = sweep_zeta(5, lo, &cfg, &gas, &k, &o, 3).unwrap();
    let rows: Vec<SweepValues> = serial.iter().map(|(r, _)| r.outcome.clone().unwrap()).collect();
    for w in rows.windows(2) {
        assert!(w[1].xi < w[0].xi);
        assert!(w[1].wall_length > w[0].wall_length);
    }
    for ((a, _), (b, _)) in serial.iter().zip(&parallel) {
        assert_eq!(a, b);
    }
    // Axis speeds rise with ζ on the common part of the potential range.
    let sols: Vec<&FreeSolution> = serial.iter().map(|(_, s)| s.as_ref().unwrap()).collect();
    for w in sols.windows(2) {
        let (a, b) = (&w[0].field, &w[1].field);
        let (ta, tb) = (a.axis_trace(), b.axis_trace());
        for (i, &phi) in a.grid.phi.iter().enumerate() {
            if phi <= w[1].xi {
                assert!(ta[i] < interp(&b.grid.phi, &tb, phi) + 1e-8, "phi = {phi}");
            }
        }
    }
}

#[test]
fn sweep_rejects_bad_ranges() {
    let (gas, cfg, k) = desk();
    let o = opts(32, 8);
    assert!(matches!(sweep_zeta(2, 0.5 * k.zeta_hat, &cfg, &gas, &k, &o, 1), Err(Error::InvalidConfig(_))));
    assert!(matches!(sweep_zeta(4, 2.0 * k.zeta_hat, &cfg, &gas, &k, &o, 1), Err(Error::Constraint(_))));
}

#[test]
fn log_spacing_has_exact_ends() {
    let v = log_spaced(0.01, 1.0, 5);
    assert_eq!(v[0], 0.01);
    assert_eq!(v[4], 1.0);
    assert!((v[2] - 0.1).abs() < 1e-15);
}

#[test]
fn wall_radius_classification() {
    let (gas, cfg, k) = desk();
    let o = opts(48, 12);
    assert!(matches!(match_r(0.5 * k.r_hat, &cfg, &gas, &k, &o), Err(Error::LongNozzle { .. })));
    assert!(matches!(match_r(1.1 * cfg.r0, &cfg, &gas, &k, &o), Err(Error::ShortNozzle { .. })));
    let m = match_r(k.r_hat, &cfg, &gas, &k, &o).unwrap();
    assert!((m.solution.zeta - k.zeta_hat).abs() <= 1e-3);
    assert_eq!(m.r_direction, -1);
    let star = m.zeta_star;
    let eps = 1e-3 * cfg.r0;
    assert!(match_r(star.r_star - eps, &cfg, &gas, &k, &o).is_ok());
    assert!(matches!(match_r(star.r_star + eps, &cfg, &gas, &k, &o), Err(Error::ShortNozzle { .. })));
}

#[test]
fn matched_radius_is_reproduced() {
    let (gas, cfg, k) = desk();
    let o = opts(48, 12);
    let r = 0.5 * (k.r_hat + cfg.r0) - 0.02;
    let m = match_r(r, &cfg, &gas, &k, &o).unwrap();
    assert!((m.solution.r_equiv - r).abs() < 1e-6, "{}", m.solution.r_equiv);
}
