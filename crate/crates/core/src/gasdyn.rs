//! Isentropic polytropic gas relations and the constants of the nozzle
//! problem.
//!
//! Units are normalized so that the stagnation density is 1 and the
//! pressure law is `P(ρ) = ρ^γ / γ`. The flux functions
//!
//! ```text
//! A(q) = ∫_{c*}^{q} (1 - s²/c²(s)) / (s ρ(s²)) ds,    B(q) = ∫_{c*}^{q} ρ(s²)/s ds
//! ```
//!
//! are evaluated from a table of exact panel integrals in `u = ln q`, where
//! both integrands are smooth and bounded; between table nodes the remaining
//! piece is integrated with an 8-point Gauss-Legendre rule, so the hot path
//! is accurate to rounding.

use crate::error::{Error, Result};
use crate::numerics::{find_root_monotone, gauss_legendre8, integrate_adaptive, Bracket};

/// Lowest speed covered by the flux tables, relative to `c*`.
const TABLE_FLOOR: f64 = 1e-6;
const TABLE_PANELS: usize = 4096;
/// `flux_a_inverse` is guaranteed down to this fraction of `c*`.
pub const Q_FLOOR_FRACTION: f64 = 1e-4;

/// The gas law: adiabatic exponent and derived sonic quantities.
#[derive(Debug, Clone)]
pub struct GasModel {
    gamma: f64,
    c_star: f64,
    q_max: f64,
    table: FluxTable,
}

#[derive(Debug, Clone)]
struct FluxTable {
    u0: f64,
    du: f64,
    /// `A` and `B` at the nodes `u0 + i du`; the last node is `c*`.
    a: Vec<f64>,
    b: Vec<f64>,
}

impl GasModel {
    pub fn new(gamma: f64) -> Result<Self> {
        if !(gamma > 1.0) || !gamma.is_finite() {
            return Err(Error::Domain {
                what: "adiabatic exponent",
                value: gamma,
            });
        }
        let c_star = (2.0 / (gamma + 1.0)).sqrt();
        let q_max = (2.0 / (gamma - 1.0)).sqrt();
        let mut gas = Self {
            gamma,
            c_star,
            q_max,
            table: FluxTable {
                u0: 0.0,
                du: 0.0,
                a: Vec::new(),
                b: Vec::new(),
            },
        };
        gas.table = gas.build_table();
        Ok(gas)
    }

    fn build_table(&self) -> FluxTable {
        let u_top = self.c_star.ln();
        let u0 = (TABLE_FLOOR * self.c_star).ln();
        let du = (u_top - u0) / TABLE_PANELS as f64;
        let mut a = vec![0.0; TABLE_PANELS + 1];
        let mut b = vec![0.0; TABLE_PANELS + 1];
        for i in (0..TABLE_PANELS).rev() {
            let lo = u0 + i as f64 * du;
            let hi = if i + 1 == TABLE_PANELS {
                u_top
            } else {
                lo + du
            };
            a[i] = a[i + 1] - gauss_legendre8(|u| self.da_du(u.exp()), lo, hi);
            b[i] = b[i + 1] - gauss_legendre8(|u| self.db_du(u.exp()), lo, hi);
        }
        FluxTable { u0, du, a, b }
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Sonic speed `c* = sqrt(2/(γ+1))`.
    pub fn c_star(&self) -> f64 {
        self.c_star
    }

    /// Limit speed `sqrt(2/(γ-1))` at which the density vanishes.
    pub fn q_max(&self) -> f64 {
        self.q_max
    }

    /// Lowest speed for which [`flux_a_inverse`](Self::flux_a_inverse) is guaranteed.
    pub fn q_floor(&self) -> f64 {
        Q_FLOOR_FRACTION * self.c_star
    }

    /// Squared sound speed `c²(q) = 1 - (γ-1) q²/2`.
    #[inline]
    pub fn sound_speed_sq(&self, q: f64) -> f64 {
        1.0 - 0.5 * (self.gamma - 1.0) * q * q
    }

    #[inline]
    fn rho_unchecked(&self, q: f64) -> f64 {
        self.sound_speed_sq(q).max(0.0).powf(1.0 / (self.gamma - 1.0))
    }

    /// Bernoulli density `ρ(q²)`.
    pub fn density(&self, q: f64) -> Result<f64> {
        if !(q >= 0.0 && q < self.q_max) {
            return Err(Error::Domain {
                what: "density",
                value: q,
            });
        }
        Ok(self.rho_unchecked(q))
    }

    /// Normalized pressure `ρ^γ / γ`.
    pub fn pressure(&self, rho: f64) -> Result<f64> {
        if !(rho > 0.0) {
            return Err(Error::Domain {
                what: "pressure",
                value: rho,
            });
        }
        Ok(rho.powf(self.gamma) / self.gamma)
    }

    /// Pressure at the sonic state, the lower end of the subsonic window.
    pub fn sonic_pressure(&self) -> f64 {
        self.rho_unchecked(self.c_star).powf(self.gamma) / self.gamma
    }

    /// Mass flux density `q ρ(q²)`.
    #[inline]
    pub fn mass_flux(&self, q: f64) -> f64 {
        q * self.rho_unchecked(q)
    }

    /// `A'(q) = (1 - q²/c²) / (q ρ)`.
    #[inline]
    pub fn flux_a_prime(&self, q: f64) -> f64 {
        let c2 = self.sound_speed_sq(q);
        (1.0 - q * q / c2) / (q * self.rho_unchecked(q))
    }

    /// `B'(q) = ρ / q`.
    #[inline]
    pub fn flux_b_prime(&self, q: f64) -> f64 {
        self.rho_unchecked(q) / q
    }

    /// `B'/A' = ρ² c² / (c² - q²)`, positive on the subsonic branch.
    #[inline]
    pub fn flux_ratio(&self, q: f64) -> f64 {
        let c2 = self.sound_speed_sq(q);
        let rho = self.rho_unchecked(q);
        rho * rho * c2 / (c2 - q * q)
    }

    #[inline]
    fn da_du(&self, q: f64) -> f64 {
        let c2 = self.sound_speed_sq(q);
        (1.0 - q * q / c2) / self.rho_unchecked(q)
    }

    #[inline]
    fn db_du(&self, q: f64) -> f64 {
        self.rho_unchecked(q)
    }

    #[inline]
    fn table_interval(&self, u: f64) -> usize {
        let t = &self.table;
        let k = ((u - t.u0) / t.du).floor();
        (k.max(0.0) as usize).min(TABLE_PANELS - 1)
    }

    #[inline]
    fn node_u(&self, i: usize) -> f64 {
        if i == TABLE_PANELS {
            self.c_star.ln()
        } else {
            self.table.u0 + i as f64 * self.table.du
        }
    }

    fn table_floor(&self) -> f64 {
        TABLE_FLOOR * self.c_star
    }

    /// `A(q)` on the subsonic branch `0 < q ≤ c*`.
    pub fn flux_a(&self, q: f64) -> Result<f64> {
        if !(q > 0.0 && q <= self.c_star) {
            return Err(Error::Domain {
                what: "flux_A",
                value: q,
            });
        }
        if q == self.c_star {
            return Ok(0.0);
        }
        if q < self.table_floor() {
            let lo = self.table_floor().ln();
            let tail = integrate_adaptive(|u| self.da_du(u.exp()), lo, q.ln(), 1e-13)?;
            return Ok(self.table.a[0] + tail);
        }
        let u = q.ln();
        let i = self.table_interval(u);
        Ok(self.a_in_interval(i, u))
    }

    #[inline]
    fn a_in_interval(&self, i: usize, u: f64) -> f64 {
        self.table.a[i] + gauss_legendre8(|s| self.da_du(s.exp()), self.node_u(i), u)
    }

    #[inline]
    fn b_in_interval(&self, i: usize, u: f64) -> f64 {
        self.table.b[i] + gauss_legendre8(|s| self.db_du(s.exp()), self.node_u(i), u)
    }

    /// `B(q)` for `0 < q < sqrt(2/(γ-1))`.
    pub fn flux_b(&self, q: f64) -> Result<f64> {
        if !(q > 0.0 && q < self.q_max) {
            return Err(Error::Domain {
                what: "flux_B",
                value: q,
            });
        }
        if q == self.c_star {
            return Ok(0.0);
        }
        if q > self.c_star {
            return integrate_adaptive(|s| self.flux_b_prime(s), self.c_star, q, 1e-13);
        }
        if q < self.table_floor() {
            let lo = self.table_floor().ln();
            let tail = integrate_adaptive(|u| self.db_du(u.exp()), lo, q.ln(), 1e-13)?;
            return Ok(self.table.b[0] + tail);
        }
        let u = q.ln();
        Ok(self.b_in_interval(self.table_interval(u), u))
    }

    /// Slow path: `A(q)` by adaptive quadrature of the closed-form integrand.
    pub fn flux_a_quadrature(&self, q: f64) -> Result<f64> {
        if !(q > 0.0 && q <= self.c_star) {
            return Err(Error::Domain {
                what: "flux_A",
                value: q,
            });
        }
        integrate_adaptive(|s| self.flux_a_prime(s), self.c_star, q, 1e-12)
    }

    /// Slow path: `B(q)` by adaptive quadrature.
    pub fn flux_b_quadrature(&self, q: f64) -> Result<f64> {
        if !(q > 0.0 && q < self.q_max) {
            return Err(Error::Domain {
                what: "flux_B",
                value: q,
            });
        }
        integrate_adaptive(|s| self.flux_b_prime(s), self.c_star, q, 1e-12)
    }

    /// Inverse of `A` restricted to `(0, c*]`, valid for `A(q_floor) ≤ a ≤ 0`.
    pub fn flux_a_inverse(&self, a: f64) -> Result<f64> {
        if !(a <= 0.0) || a < self.a_floor() {
            return Err(Error::Range {
                what: "flux_A_inverse",
                value: a,
            });
        }
        Ok(self.invert_table(a, &self.table.a, |g, q| g.da_du(q), |g, i, u| {
            g.a_in_interval(i, u)
        }))
    }

    /// `A(q_floor)`, the lowest value accepted by [`flux_a_inverse`](Self::flux_a_inverse).
    pub fn a_floor(&self) -> f64 {
        let u = self.q_floor().ln();
        self.a_in_interval(self.table_interval(u), u)
    }

    /// Inverse of `B` on `(0, c*]` for values inside the table range.
    pub fn flux_b_inverse(&self, b: f64) -> Result<f64> {
        if !(b <= 0.0) || b < self.table.b[0] {
            return Err(Error::Range {
                what: "flux_B_inverse",
                value: b,
            });
        }
        Ok(self.invert_table(b, &self.table.b, |g, q| g.db_du(q), |g, i, u| {
            g.b_in_interval(i, u)
        }))
    }

    /// Safeguarded Newton in `u = ln q` inside the bracketing table panel.
    fn invert_table(
        &self,
        target: f64,
        values: &[f64],
        deriv: impl Fn(&Self, f64) -> f64,
        eval: impl Fn(&Self, usize, f64) -> f64,
    ) -> f64 {
        if target == 0.0 {
            return self.c_star;
        }
        // values is increasing; find i with values[i] <= target <= values[i+1].
        let i = match values.partition_point(|&v| v <= target) {
            0 => 0,
            k => (k - 1).min(TABLE_PANELS - 1),
        };
        let (mut lo, mut hi) = (self.node_u(i), self.node_u(i + 1));
        let (v_lo, v_hi) = (values[i], values[i + 1]);
        let mut u = if v_hi > v_lo {
            lo + (hi - lo) * ((target - v_lo) / (v_hi - v_lo)).clamp(0.0, 1.0)
        } else {
            0.5 * (lo + hi)
        };
        for _ in 0..100 {
            let f = eval(self, i, u) - target;
            if f == 0.0 {
                return u.exp();
            }
            if f < 0.0 {
                lo = u;
            } else {
                hi = u;
            }
            let d = deriv(self, u.exp());
            let mut next = u - f / d;
            if !(d > 0.0) || !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - u).abs() <= 4.0 * f64::EPSILON * u.abs().max(1.0) || hi - lo <= f64::EPSILON
            {
                return next.exp().min(self.c_star);
            }
            u = next;
        }
        u.exp().min(self.c_star)
    }

    /// `q ↦ q ρ(q²)` inverted on the subsonic branch `(0, c*)`.
    pub fn mass_flux_inverse(&self, j: f64) -> Result<f64> {
        let j_star = self.mass_flux(self.c_star);
        if !(j > 0.0 && j <= j_star) {
            return Err(Error::Range {
                what: "mass_flux_inverse",
                value: j,
            });
        }
        if j == j_star {
            return Ok(self.c_star);
        }
        let f = |q: f64| self.mass_flux(q) - j;
        let bracket = Bracket::from_values(0.0, self.c_star, -j, j_star - j)?;
        find_root_monotone(f, bracket, 1e-16)
    }

    /// `E(s) = A(B⁻¹(s))`.
    pub fn flux_e(&self, s: f64) -> Result<f64> {
        let q = self.flux_b_inverse(s)?;
        self.flux_a(q)
    }

    /// Outlet speed whose pressure equals `p_e`, inside the subsonic window.
    pub fn outlet_speed_from_pressure(&self, p_e: f64) -> Result<f64> {
        let p_sonic = self.sonic_pressure();
        let p_stag = 1.0 / self.gamma;
        if !(p_e > p_sonic && p_e < p_stag) {
            return Err(Error::InfeasiblePressure {
                p_e,
                p_sonic,
                p_stag,
            });
        }
        let rho = (self.gamma * p_e).powf(1.0 / self.gamma);
        let q2 = 2.0 / (self.gamma - 1.0) * (1.0 - rho.powf(self.gamma - 1.0));
        Ok(q2.max(0.0).sqrt())
    }
}

/// Nozzle and jet data: inlet radius, half-angle, mass flux, outlet speed
/// and optional wall-end radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowConfig {
    pub r0: f64,
    pub vartheta: f64,
    pub m: f64,
    pub c_e: f64,
    pub radius: Option<f64>,
}

impl FlowConfig {
    pub fn new(r0: f64, vartheta: f64, m: f64, c_e: f64) -> Self {
        Self {
            r0,
            vartheta,
            m,
            c_e,
            radius: None,
        }
    }

    /// Builds the configuration from the surrounding pressure instead of
    /// the outlet speed.
    pub fn from_pressure(gas: &GasModel, r0: f64, vartheta: f64, m: f64, p_e: f64) -> Result<Self> {
        let c_e = gas.outlet_speed_from_pressure(p_e)?;
        Ok(Self::new(r0, vartheta, m, c_e))
    }

    pub fn with_radius(mut self, radius: f64) -> Self {
        self.radius = Some(radius);
        self
    }

    pub fn validate(&self, gas: &GasModel) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.r0 > 0.0 && self.r0.is_finite()) {
            return bad(format!("R0 = {} must be positive", self.r0));
        }
        if !(self.vartheta > 0.0 && self.vartheta < std::f64::consts::FRAC_PI_2) {
            return bad(format!("vartheta = {} must lie in (0, pi/2)", self.vartheta));
        }
        if !(self.m > 0.0 && self.m.is_finite()) {
            return bad(format!("m = {} must be positive", self.m));
        }
        if !(self.c_e > 0.0 && self.c_e < gas.c_star()) {
            return bad(format!(
                "c_e = {} must lie in (0, c* = {})",
                self.c_e,
                gas.c_star()
            ));
        }
        if let Some(r) = self.radius {
            if !(r > 0.0 && r < self.r0) {
                return bad(format!("R = {r} must lie in (0, R0 = {})", self.r0));
            }
        }
        Ok(())
    }
}

/// Constants derived from a [`FlowConfig`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedConstants {
    pub c_e: f64,
    /// Inlet speed of the radial flow.
    pub c_m: f64,
    /// Minimal admissible speed.
    pub c_l: f64,
    pub r_hat: f64,
    pub zeta_hat: f64,
    /// `A(c_e)`, the Dirichlet value of the unknown on the free boundary.
    pub a_e: f64,
    /// `A(c_l)`.
    pub a_l: f64,
    /// Whether `R0 ϑ c_l ρ(c_l²) < m < R0 ϑ c_e ρ(c_e²)`.
    pub admissible: bool,
}

impl DerivedConstants {
    /// `R0 c_l`, the cap on the outlet potential.
    pub fn xi_cap(&self, cfg: &FlowConfig) -> f64 {
        cfg.r0 * self.c_l
    }
}

/// Solves for `c_m`, `c_l`, `R̂`, `ζ̂` and the admissibility flag.
pub fn derive_constants(gas: &GasModel, cfg: &FlowConfig) -> Result<DerivedConstants> {
    cfg.validate(gas)?;
    let FlowConfig {
        r0, vartheta, m, c_e, ..
    } = *cfg;
    let rho_e = gas.density(c_e)?;
    let upper = r0 * vartheta * c_e * rho_e;
    let a_e = gas.flux_a(c_e)?;

    // c_l: rho(q^2)(A(c_e) - A(q)) = 1, left side strictly decreasing on (0, c_e).
    let h = |q: f64| -> f64 {
        match gas.flux_a(q) {
            Ok(a) => gas.rho_unchecked(q) * (a_e - a) - 1.0,
            Err(_) => f64::NAN,
        }
    };
    let mut lo = 0.5 * c_e;
    while h(lo) <= 0.0 {
        lo *= 0.5;
        if lo < gas.q_floor() {
            return Err(Error::Range {
                what: "minimal speed c_l",
                value: lo,
            });
        }
    }
    let c_l = find_root_monotone(h, Bracket::new(h, lo, c_e)?, 1e-15)?;
    let lower = r0 * vartheta * c_l * gas.rho_unchecked(c_l);

    if !(m < upper) {
        return Err(Error::InfeasibleFlux { m, lower, upper });
    }
    let c_m = gas.mass_flux_inverse(m / (r0 * vartheta))?;
    let zeta_hat = m * (a_e - gas.flux_a(c_m)?) / vartheta;
    let r_hat = m / (vartheta * c_e * rho_e);
    Ok(DerivedConstants {
        c_e,
        c_m,
        c_l,
        r_hat,
        zeta_hat,
        a_e,
        a_l: gas.flux_a(c_l)?,
        admissible: lower < m && m < upper,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn air() -> GasModel {
        GasModel::new(1.4).unwrap()
    }

    fn desk() -> FlowConfig {
        FlowConfig::new(1.0, PI / 6.0, 0.25, 0.8)
    }

    /// Composite Simpson rule on a uniform grid; independent test oracle.
    fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for k in 1..n {
            let w = if k % 2 == 1 { 4.0 } else { 2.0 };
            s += w * f(a + k as f64 * h);
        }
        s * h / 3.0
    }

    #[test]
    fn density_values() {
        let g = air();
        assert_eq!(g.density(0.0).unwrap(), 1.0);
        assert!((g.density(g.c_star()).unwrap() - 0.633_938_145_260_608_9).abs() < 1e-14);
        assert!((g.density(0.8).unwrap() - 0.710_053_728_630_187_5).abs() < 1e-14);
        assert!(g.density(g.q_max()).is_err());
        assert!(g.density(-0.1).is_err());
    }

    #[test]
    fn pressure_values() {
        let g = air();
        assert!((g.pressure(1.0).unwrap() - 1.0 / 1.4).abs() < 1e-15);
        let rs = g.density(g.c_star()).unwrap();
        assert!((g.pressure(rs).unwrap() - 0.377_344_134_083_695_8).abs() < 1e-14);
        assert!((g.sonic_pressure() - g.pressure(rs).unwrap()).abs() < 1e-15);
        assert!(g.pressure(1e-300).unwrap() < 1e-300);
        assert!(g.pressure(0.0).is_err());
    }

    #[test]
    fn flux_values_at_sonic() {
        let g = air();
        assert_eq!(g.flux_a(g.c_star()).unwrap(), 0.0);
        assert_eq!(g.flux_b(g.c_star()).unwrap(), 0.0);
    }

    #[test]
    fn flux_a_matches_simpson_oracle() {
        let g = air();
        let oracle = simpson(|s| g.flux_a_prime(s), g.c_star(), 0.8, 20_000);
        // Reference value from an arbitrary-precision computation.
        assert!((oracle - (-0.027_154_685_015_621_84)).abs() < 1e-13);
        assert!((g.flux_a(0.8).unwrap() - oracle).abs() < 1e-10);
        assert!((g.flux_a_quadrature(0.8).unwrap() - oracle).abs() < 1e-10);
        let b_oracle = simpson(|s| g.flux_b_prime(s), g.c_star(), 0.8, 20_000);
        assert!((g.flux_b(0.8).unwrap() - b_oracle).abs() < 1e-10);
        assert!((b_oracle - (-0.088_855_798_213_587_85)).abs() < 1e-13);
    }

    #[test]
    fn table_path_agrees_with_quadrature() {
        let g = air();
        for &q in &[1e-4, 0.01, 0.2, 0.5, 0.8, 0.9, 0.91] {
            let fast = g.flux_a(q).unwrap();
            let slow = g.flux_a_quadrature(q).unwrap();
            assert!((fast - slow).abs() < 1e-11, "A at {q}: {fast} vs {slow}");
            let fast = g.flux_b(q).unwrap();
            let slow = g.flux_b_quadrature(q).unwrap();
            assert!((fast - slow).abs() < 1e-11, "B at {q}");
        }
        // Below the table and above c* for B.
        assert!((g.flux_a(1e-7).unwrap() - g.flux_a_quadrature(1e-7).unwrap()).abs() < 1e-9);
        assert!(g.flux_b(1.0).unwrap() > 0.0);
        assert!(g.flux_a(1.0).is_err());
    }

    #[test]
    fn monotone_on_subsonic_branch() {
        let g = air();
        let n = 1000;
        let qs: Vec<f64> = (1..n)
            .map(|k| g.c_star() * k as f64 / n as f64)
            .collect();
        for w in qs.windows(2) {
            assert!(g.density(w[1]).unwrap() < g.density(w[0]).unwrap());
            assert!(g.flux_a(w[1]).unwrap() > g.flux_a(w[0]).unwrap());
            assert!(g.flux_b(w[1]).unwrap() > g.flux_b(w[0]).unwrap());
        }
        assert!(qs.iter().all(|&q| g.flux_a(q).unwrap() < 0.0));
        assert!(qs.iter().all(|&q| g.flux_b(q).unwrap() < 0.0));
        assert!(qs.iter().all(|&q| g.flux_a_prime(q) > 0.0));
        assert!(qs.iter().all(|&q| g.flux_b_prime(q) > 0.0));
    }

    #[test]
    fn closed_form_derivative_matches_differences() {
        let g = air();
        for &q in &[0.05, 0.3, 0.6, 0.85] {
            let h = 1e-5;
            let fd = (g.flux_a(q + h).unwrap() - g.flux_a(q - h).unwrap()) / (2.0 * h);
            assert!((fd - g.flux_a_prime(q)).abs() < 1e-6 * g.flux_a_prime(q).max(1.0));
        }
    }

    #[test]
    fn inverse_round_trips() {
        let g = air();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let q = rng.gen_range(g.q_floor()..g.c_star());
            let a = g.flux_a(q).unwrap();
            assert!((g.flux_a_inverse(a).unwrap() - q).abs() < 1e-10);
            let j = g.mass_flux(q);
            assert!((g.mass_flux_inverse(j).unwrap() - q).abs() < 1e-10 * q.max(0.1));
        }
        assert_eq!(g.flux_a_inverse(0.0).unwrap(), g.c_star());
        assert!(g.flux_a_inverse(1e-3).is_err());
        assert!(g.flux_a_inverse(g.a_floor() - 1.0).is_err());
    }

    #[test]
    fn mass_flux_inverse_values() {
        let g = air();
        let j_star = g.mass_flux(g.c_star());
        assert!((j_star - 0.578_703_703_703_703_7).abs() < 1e-14);
        assert_eq!(g.mass_flux_inverse(j_star).unwrap(), g.c_star());
        assert!((g.mass_flux_inverse(j_star * (1.0 - 1e-12)).unwrap() - g.c_star()).abs() < 1e-5);
        let c_m = g.mass_flux_inverse(0.25 / (PI / 6.0)).unwrap();
        assert!((c_m - 0.562_100_960_722_814_3).abs() < 1e-12);
        assert!(g.mass_flux_inverse(0.6).is_err());
    }

    #[test]
    fn flux_e_properties() {
        let g = air();
        let s0 = g.flux_b(0.55).unwrap();
        assert!((g.flux_e(s0).unwrap() - g.flux_a(0.55).unwrap()).abs() < 1e-12);
        assert!(g.flux_e(-1e-14).unwrap().abs() < 1e-6);
        let s = g.flux_b(0.7).unwrap();
        let h = 1e-6;
        let fd = (g.flux_e(s + h).unwrap() - g.flux_e(s - h).unwrap()) / (2.0 * h);
        let chain = g.flux_a_prime(0.7) / g.flux_b_prime(0.7);
        assert!((chain - 0.764_993_932_839_713_5).abs() < 1e-12);
        assert!((fd - chain).abs() < 1e-6);
        // Concavity diagnostics: E'' < 0 sampled by second differences.
        for &q in &[0.3, 0.5, 0.7] {
            let s = g.flux_b(q).unwrap();
            let h = 1e-3;
            let d2 = g.flux_e(s + h).unwrap() - 2.0 * g.flux_e(s).unwrap() + g.flux_e(s - h).unwrap();
            assert!(d2 < 0.0);
        }
    }

    #[test]
    fn desk_constants() {
        let g = air();
        let k = derive_constants(&g, &desk()).unwrap();
        // Frozen from a 30-digit bisection oracle.
        assert!((k.c_m - 0.562_100_960_722_814_3).abs() < 1e-12);
        assert!((k.c_l - 0.231_213_006_417_217_2).abs() < 1e-12);
        assert!((k.r_hat - 0.840_543_486_400_662_2).abs() < 1e-12);
        assert!((k.zeta_hat - 0.104_449_500_489_729_88).abs() < 1e-11);
        assert!(k.admissible);
        let rho_l = g.density(k.c_l).unwrap();
        assert!((rho_l * (k.a_e - k.a_l) - 1.0).abs() < 1e-10);
        let rho_m = g.density(k.c_m).unwrap();
        assert!((0.25 / (k.c_m * rho_m) - PI / 6.0).abs() < 1e-10);
        assert!(k.c_l < k.c_m && k.c_m < k.c_e);
    }

    #[test]
    fn flux_window_boundary_is_rejected() {
        let g = air();
        let mut cfg = desk();
        cfg.m = cfg.r0 * cfg.vartheta * cfg.c_e * g.density(cfg.c_e).unwrap();
        assert!(matches!(
            derive_constants(&g, &cfg),
            Err(Error::InfeasibleFlux { .. })
        ));
        cfg.m = 0.05;
        assert!(!derive_constants(&g, &cfg).unwrap().admissible);
    }

    #[test]
    fn pressure_window() {
        let g = air();
        assert!(matches!(
            g.outlet_speed_from_pressure(g.sonic_pressure()),
            Err(Error::InfeasiblePressure { .. })
        ));
        assert!(g.outlet_speed_from_pressure(1.0 / 1.4).is_err());
        let p = g.pressure(g.density(0.8).unwrap()).unwrap();
        assert!((g.outlet_speed_from_pressure(p).unwrap() - 0.8).abs() < 1e-12);
    }

    #[test]
    fn admissibility_matches_potential_cap() {
        let g = air();
        for &c_e in &[0.4, 0.6, 0.8, 0.9] {
            let rho_e = g.density(c_e).unwrap();
            let upper = PI / 6.0 * c_e * rho_e;
            for k in 1..20 {
                let m = upper * k as f64 / 20.0;
                let cfg = FlowConfig::new(1.0, PI / 6.0, m, c_e);
                let d = derive_constants(&g, &cfg).unwrap();
                // The mass-flux window is the same as zeta_hat < R0 c_m; it
                // implies zeta_hat < R0 c_l, and together with c_m > c_l is
                // equivalent to it.
                assert_eq!(d.admissible, d.zeta_hat < cfg.r0 * d.c_m, "c_e={c_e} m={m}");
                assert_eq!(
                    d.admissible,
                    d.zeta_hat < cfg.r0 * d.c_l && d.c_m > d.c_l,
                    "c_e={c_e} m={m}"
                );
            }
        }
    }
}
