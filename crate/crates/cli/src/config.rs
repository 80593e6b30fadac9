use crate::CliError;
use jetstream_core::fixedbvp::{SolverOptions, MIN_PHI_CELLS, MIN_PSI_CELLS};
use jetstream_core::{derive_constants, DerivedConstants, FlowConfig, GasModel};
use serde::Deserialize;
use std::path::{Path, PathBuf};

/// Parsed run configuration, as written in the TOML file.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub gas: GasSection,
    pub flow: FlowSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub outputs: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GasSection {
    pub gamma: f64,
}

/// Flow data. Exactly one of `P_e` and `c_e` must be given; angles are in
/// radians.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowSection {
    #[serde(rename = "R0")]
    pub r0: f64,
    pub vartheta: f64,
    pub m: f64,
    #[serde(rename = "P_e")]
    pub p_e: Option<f64>,
    pub c_e: Option<f64>,
    #[serde(rename = "R")]
    pub r: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSection {
    pub n_phi: usize,
    pub n_psi: usize,
    pub tol: f64,
    pub shoot_tol: Option<f64>,
    pub max_iters: usize,
}

impl Default for SolverSection {
    fn default() -> Self {
        let o = SolverOptions::default();
        Self {
            n_phi: o.n_phi,
            n_psi: o.n_psi,
            tol: o.tol,
            shoot_tol: o.shoot_tol,
            max_iters: o.max_iters,
        }
    }
}

/// Output kinds a run may write.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    /// Field, coordinate, curve and sweep tables.
    Csv,
    /// `summary.kv`.
    Kv,
    /// `verify.report`.
    Report,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub directory: PathBuf,
    pub formats: Vec<Format>,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            directory: PathBuf::from("out"),
            formats: vec![Format::Csv, Format::Kv, Format::Report],
        }
    }
}

/// A configuration with the gas model and derived constants resolved.
#[derive(Debug, Clone)]
pub struct Problem {
    pub raw: RunConfig,
    pub gas: GasModel,
    pub flow: FlowConfig,
    pub consts: DerivedConstants,
    pub opts: SolverOptions,
}

impl Problem {
    pub fn wants(&self, f: Format) -> bool {
        self.raw.outputs.formats.contains(&f)
    }
}

pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
}

pub fn load_config(path: &Path) -> Result<Problem, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    resolve(parse_config(&text)?)
}

/// Validates a parsed configuration and derives the problem constants.
pub fn resolve(raw: RunConfig) -> Result<Problem, CliError> {
    let gas = GasModel::new(raw.gas.gamma)?;
    let f = &raw.flow;
    let mut flow = match (f.p_e, f.c_e) {
        (Some(p), None) => FlowConfig::from_pressure(&gas, f.r0, f.vartheta, f.m, p)?,
        (None, Some(c)) => FlowConfig::new(f.r0, f.vartheta, f.m, c),
        _ => {
            return Err(CliError::Config(
                "flow needs exactly one of P_e and c_e".into(),
            ))
        }
    };
    if let Some(r) = f.r {
        flow = flow.with_radius(r);
    }
    flow.validate(&gas)?;
    let consts = derive_constants(&gas, &flow)?;
    let s = &raw.solver;
    if s.n_phi < MIN_PHI_CELLS || s.n_psi < MIN_PSI_CELLS {
        return Err(CliError::Config(format!(
            "grid needs n_phi >= {MIN_PHI_CELLS} and n_psi >= {MIN_PSI_CELLS}, got {} x {}",
            s.n_phi, s.n_psi
        )));
    }
    if !(s.tol > 0.0) || s.shoot_tol.is_some_and(|t| !(t > 0.0)) || s.max_iters == 0 {
        return Err(CliError::Config(
            "solver tolerances and max_iters must be positive".into(),
        ));
    }
    let opts = SolverOptions {
        n_phi: s.n_phi,
        n_psi: s.n_psi,
        tol: s.tol,
        max_iters: s.max_iters,
        shoot_tol: s.shoot_tol,
    };
    Ok(Problem {
        raw,
        gas,
        flow,
        consts,
        opts,
    })
}
