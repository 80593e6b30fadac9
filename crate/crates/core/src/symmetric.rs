//! The exact radial jet, where the wall ends exactly where the flow reaches
//! the outlet speed and no free streamline leaves the wall.
//!
//! In the potential plane `A(q̂)` is linear in `φ`; in the physical plane the
//! flow fills the annular sector `R̂ ≤ r ≤ R0` and every streamline is a ray.

use crate::error::{Error, Result};
use crate::gasdyn::{derive_constants, DerivedConstants, FlowConfig, GasModel};
use crate::numerics::integrate_adaptive;

const QUAD_TOL: f64 = 1e-13;

#[derive(Debug, Clone, Copy)]
pub struct SymmetricSolution<'g> {
    gas: &'g GasModel,
    cfg: FlowConfig,
    consts: DerivedConstants,
}

impl<'g> SymmetricSolution<'g> {
    pub fn new(gas: &'g GasModel, cfg: &FlowConfig) -> Result<Self> {
        let consts = derive_constants(gas, cfg)?;
        Self::with_constants(gas, cfg, consts)
    }

    pub fn with_constants(
        gas: &'g GasModel,
        cfg: &FlowConfig,
        consts: DerivedConstants,
    ) -> Result<Self> {
        if !consts.admissible {
            return Err(Error::InfeasibleFlux {
                m: cfg.m,
                lower: cfg.r0 * cfg.vartheta * consts.c_l * gas.density(consts.c_l)?,
                upper: cfg.r0 * cfg.vartheta * consts.c_e * gas.density(consts.c_e)?,
            });
        }
        Ok(Self {
            gas,
            cfg: *cfg,
            consts,
        })
    }

    pub fn constants(&self) -> &DerivedConstants {
        &self.consts
    }

    pub fn config(&self) -> &FlowConfig {
        &self.cfg
    }

    pub fn gas(&self) -> &'g GasModel {
        self.gas
    }

    /// `ζ̂`, the outlet potential of the radial flow.
    pub fn zeta_hat(&self) -> f64 {
        self.consts.zeta_hat
    }

    /// `A(q̂(φ))`, linear in `φ`.
    pub fn a_hat(&self, phi: f64) -> f64 {
        self.consts.a_e - self.cfg.vartheta * (self.consts.zeta_hat - phi) / self.cfg.m
    }

    /// Speed of the radial flow at potential `φ ∈ [0, ζ̂]`.
    pub fn q_hat(&self, phi: f64) -> Result<f64> {
        let z = self.consts.zeta_hat;
        let slack = 1e-14 * z;
        if !(phi >= -slack && phi <= z + slack) {
            return Err(Error::Domain {
                what: "q_hat",
                value: phi,
            });
        }
        if phi >= z {
            return Ok(self.consts.c_e);
        }
        self.gas.flux_a_inverse(self.a_hat(phi.max(0.0)))
    }

    /// Speed on the circle of radius `r`: the subsonic root of
    /// `q ρ(q²) = m / (ϑ r)`.
    pub fn speed_at_radius(&self, r: f64) -> Result<f64> {
        self.gas.mass_flux_inverse(self.cfg.m / (self.cfg.vartheta * r))
    }

    fn potential_of_radius(&self, r: f64) -> Result<f64> {
        let mut err = None;
        let v = integrate_adaptive(
            |s| match self.speed_at_radius(s) {
                Ok(q) => q,
                Err(e) => {
                    err.get_or_insert(e);
                    0.0
                }
            },
            r,
            self.cfg.r0,
            QUAD_TOL,
        )?;
        match err {
            Some(e) => Err(e),
            None => Ok(v),
        }
    }

    /// Velocity potential of the radial flow at a physical point of the
    /// annular sector `R̂ ≤ r ≤ R0`, `0 ≤ y ≤ -x tan ϑ`.
    pub fn phi_hat(&self, x: f64, y: f64) -> Result<f64> {
        let r = x.hypot(y);
        let tol = 1e-12 * self.cfg.r0;
        let in_sector = r >= self.consts.r_hat - tol
            && r <= self.cfg.r0 + tol
            && x <= tol
            && y >= -tol
            && y <= -x * self.cfg.vartheta.tan() + tol;
        if !in_sector {
            return Err(Error::Domain {
                what: "phi_hat (outside the radial sector)",
                value: r,
            });
        }
        let r = r.clamp(self.consts.r_hat, self.cfg.r0);
        self.potential_of_radius(r)
    }

    /// Radius reached at potential `φ` along any ray; inverse of `phi_hat`.
    pub fn radius_of_potential(&self, phi: f64) -> Result<f64> {
        let len = integrate_adaptive(
            |p| self.q_hat(p).map(|q| 1.0 / q).unwrap_or(f64::NAN),
            0.0,
            phi,
            QUAD_TOL,
        )?;
        Ok(self.cfg.r0 - len)
    }

    /// Length of the wall, `∫_0^ζ̂ dφ / q̂(φ)`; equals `R0 - R̂`.
    pub fn wall_length(&self) -> Result<f64> {
        let v = integrate_adaptive(
            |p| self.q_hat(p).map(|q| 1.0 / q).unwrap_or(f64::NAN),
            0.0,
            self.consts.zeta_hat,
            QUAD_TOL,
        )?;
        if v.is_nan() {
            return Err(Error::Domain {
                what: "wall_length",
                value: v,
            });
        }
        Ok(v)
    }
}

/// Free function form of [`SymmetricSolution::wall_length`].
pub fn sym_wall_length(sym: &SymmetricSolution<'_>) -> Result<f64> {
    sym.wall_length()
}
