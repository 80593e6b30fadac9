//! Python bindings: the gas model, the configured jet problem and its
//! solutions.

use jetstream_core::fixedbvp::{corner_exponent, solve_fixed, SolverOptions, SpeedField};
use jetstream_core::freebnd::{
    find_zeta_star, inlet_defect, match_r, solve_outlet, sweep_zeta, FreeSolution,
};
use jetstream_core::physmap::{geometry_checks, reconstruct, recover_theta};
use jetstream_core::{derive_constants, DerivedConstants, Error, FlowConfig, GasModel};
use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use pyo3::types::PyDict;

/// `(zeta, xi, L, R_equiv, sup_phi)`.
type SweepTuple = (f64, f64, f64, f64, f64);

create_exception!(jetstream, JetstreamError, PyException);
create_exception!(jetstream, ConfigError, JetstreamError);
create_exception!(jetstream, ConstraintError, JetstreamError);
create_exception!(jetstream, NonconvergenceError, JetstreamError);
create_exception!(jetstream, NonexistenceError, JetstreamError);

fn to_py(e: Error) -> PyErr {
    let msg = e.to_string();
    match e {
        Error::InvalidConfig(_) | Error::Domain { .. } | Error::Range { .. } => ConfigError::new_err(msg),
        Error::Constraint(_) | Error::InfeasibleFlux { .. } | Error::InfeasiblePressure { .. } => {
            ConstraintError::new_err(msg)
        }
        Error::Nonconvergence { .. }
        | Error::MaxIterations { .. }
        | Error::NoSignChange { .. }
        | Error::Quadrature { .. }
        | Error::SingularPivot { .. } => NonconvergenceError::new_err(msg),
        Error::Nonexistence(_) | Error::LongNozzle { .. } | Error::ShortNozzle { .. } => {
            NonexistenceError::new_err(msg)
        }
        _ => JetstreamError::new_err(msg),
    }
}

/// Polytropic gas with ratio of specific heats `gamma`.
#[pyclass(name = "GasModel", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyGasModel(GasModel);

#[pymethods]
impl PyGasModel {
    #[new]
    fn new(gamma: f64) -> PyResult<Self> {
        GasModel::new(gamma).map(Self).map_err(to_py)
    }

    #[getter]
    fn gamma(&self) -> f64 {
        self.0.gamma()
    }

    #[getter]
    fn c_star(&self) -> f64 {
        self.0.c_star()
    }

    fn density(&self, q: f64) -> PyResult<f64> {
        self.0.density(q).map_err(to_py)
    }

    fn mass_flux(&self, q: f64) -> f64 {
        self.0.mass_flux(q)
    }

    fn flux_a(&self, q: f64) -> PyResult<f64> {
        self.0.flux_a(q).map_err(to_py)
    }

    fn flux_a_inverse(&self, a: f64) -> PyResult<f64> {
        self.0.flux_a_inverse(a).map_err(to_py)
    }

    fn flux_b(&self, q: f64) -> PyResult<f64> {
        self.0.flux_b(q).map_err(to_py)
    }

    fn flux_b_inverse(&self, b: f64) -> PyResult<f64> {
        self.0.flux_b_inverse(b).map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!("GasModel(gamma={:?})", self.0.gamma())
    }
}

/// Converged speed field on the `(phi, psi)` grid; nodal arrays are
/// indexed `[i][j]` with `i` along `phi`.
#[pyclass(name = "SpeedField", frozen)]
struct PySpeedField {
    field: SpeedField,
    gas: GasModel,
    flow: FlowConfig,
    a_e: f64,
}

impl PySpeedField {
    fn nodal(&self, v: &[f64]) -> Vec<Vec<f64>> {
        v.chunks(self.field.grid.stride()).map(<[f64]>::to_vec).collect()
    }
}

#[pymethods]
impl PySpeedField {
    #[getter]
    fn phi(&self) -> Vec<f64> {
        self.field.grid.phi.clone()
    }

    #[getter]
    fn psi(&self) -> Vec<f64> {
        self.field.grid.psi.clone()
    }

    #[getter]
    fn zeta(&self) -> f64 {
        self.field.grid.zeta
    }

    #[getter]
    fn xi(&self) -> f64 {
        self.field.grid.xi
    }

    #[getter]
    fn q(&self) -> Vec<Vec<f64>> {
        self.nodal(&self.field.q)
    }

    /// `Q = A(q)`.
    #[getter(Q)]
    fn big_q(&self) -> Vec<Vec<f64>> {
        self.nodal(&self.field.big_q)
    }

    #[getter]
    fn residual_norm(&self) -> f64 {
        self.field.residual_norm
    }

    #[getter]
    fn newton_iters(&self) -> usize {
        self.field.newton_iters
    }

    /// Flow angle at every node.
    fn theta(&self) -> PyResult<Vec<Vec<f64>>> {
        let a = recover_theta(&self.field, &self.gas, &self.flow).map_err(to_py)?;
        Ok(self.nodal(&a.theta))
    }

    fn inlet_defect(&self) -> f64 {
        inlet_defect(&self.field, &self.flow, &self.gas)
    }

    fn corner_exponent(&self) -> PyResult<f64> {
        corner_exponent(&self.field, self.a_e).map_err(to_py)
    }
}

/// Solution of the free problem for one `zeta`.
#[pyclass(name = "FreeSolution", frozen)]
struct PyFreeSolution {
    #[pyo3(get)]
    zeta: f64,
    #[pyo3(get)]
    xi: f64,
    #[pyo3(get)]
    inlet_defect: f64,
    #[pyo3(get)]
    wall_length: f64,
    #[pyo3(get)]
    r_equiv: f64,
    #[pyo3(get)]
    solves: usize,
    #[pyo3(get)]
    field: Py<PySpeedField>,
}

/// Physical-plane reconstruction with its geometric checks.
#[pyclass(name = "PhysicalField", frozen)]
struct PyPhysicalField {
    /// Nodal coordinates, `[i][j]`.
    #[pyo3(get)]
    x: Vec<Vec<f64>>,
    #[pyo3(get)]
    y: Vec<Vec<f64>>,
    #[pyo3(get)]
    inlet: Vec<(f64, f64)>,
    #[pyo3(get)]
    wall: Vec<(f64, f64)>,
    #[pyo3(get)]
    free: Vec<(f64, f64)>,
    #[pyo3(get)]
    outlet: Vec<(f64, f64)>,
    #[pyo3(get)]
    mass_flux_out: f64,
    /// `(name, passed, measured, tolerance)`; `passed` is `None` when the
    /// check does not apply.
    #[pyo3(get)]
    checks: Vec<(String, Option<bool>, f64, f64)>,
    #[pyo3(get)]
    solution: Py<PyFreeSolution>,
}

/// A jet problem: gas, nozzle and jet data, and solver controls. Give
/// exactly one of `c_e` and `P_e`; angles are in radians.
#[pyclass(name = "Jet", frozen)]
struct PyJet {
    gas: GasModel,
    flow: FlowConfig,
    consts: DerivedConstants,
    opts: SolverOptions,
}

impl PyJet {
    fn wrap_field(&self, py: Python<'_>, field: SpeedField) -> PyResult<Py<PySpeedField>> {
        Py::new(
            py,
            PySpeedField {
                field,
                gas: self.gas.clone(),
                flow: self.flow,
                a_e: self.consts.a_e,
            },
        )
    }

    fn wrap_free(&self, py: Python<'_>, s: FreeSolution) -> PyResult<Py<PyFreeSolution>> {
        let sol = PyFreeSolution {
            zeta: s.zeta,
            xi: s.xi,
            inlet_defect: s.inlet_defect,
            wall_length: s.wall_length,
            r_equiv: s.r_equiv,
            solves: s.solves,
            field: self.wrap_field(py, s.field)?,
        };
        Py::new(py, sol)
    }
}

#[pymethods]
impl PyJet {
    #[new]
    #[pyo3(signature = (gamma, r0, vartheta, m, *, c_e=None, p_e=None, n_phi=128, n_psi=32, tol=1e-10, max_iters=100, shoot_tol=None))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        gamma: f64,
        r0: f64,
        vartheta: f64,
        m: f64,
        c_e: Option<f64>,
        p_e: Option<f64>,
        n_phi: usize,
        n_psi: usize,
        tol: f64,
        max_iters: usize,
        shoot_tol: Option<f64>,
    ) -> PyResult<Self> {
        let gas = GasModel::new(gamma).map_err(to_py)?;
        let flow = match (c_e, p_e) {
            (Some(c), None) => FlowConfig::new(r0, vartheta, m, c),
            (None, Some(p)) => FlowConfig::from_pressure(&gas, r0, vartheta, m, p).map_err(to_py)?,
            _ => return Err(ConfigError::new_err("give exactly one of c_e and p_e")),
        };
        flow.validate(&gas).map_err(to_py)?;
        let consts = derive_constants(&gas, &flow).map_err(to_py)?;
        let opts = SolverOptions {
            n_phi,
            n_psi,
            tol,
            max_iters,
            shoot_tol,
        };
        Ok(Self {
            gas,
            flow,
            consts,
            opts,
        })
    }

    #[getter]
    fn gas(&self) -> PyGasModel {
        PyGasModel(self.gas.clone())
    }

    /// Derived constants: `c_e, c_m, c_l, R_hat, zeta_hat, A_e, A_l,
    /// admissible`.
    fn constants<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let d = PyDict::new(py);
        let k = &self.consts;
        d.set_item("c_e", k.c_e)?;
        d.set_item("c_m", k.c_m)?;
        d.set_item("c_l", k.c_l)?;
        d.set_item("R_hat", k.r_hat)?;
        d.set_item("zeta_hat", k.zeta_hat)?;
        d.set_item("A_e", k.a_e)?;
        d.set_item("A_l", k.a_l)?;
        d.set_item("admissible", k.admissible)?;
        Ok(d)
    }

    fn solve_fixed(&self, py: Python<'_>, zeta: f64, xi: f64) -> PyResult<Py<PySpeedField>> {
        let f = py
            .detach(|| solve_fixed(zeta, xi, &self.flow, &self.gas, &self.consts, &self.opts))
            .map_err(to_py)?;
        self.wrap_field(py, f)
    }

    fn solve_free(&self, py: Python<'_>, zeta: f64) -> PyResult<Py<PyFreeSolution>> {
        let s = py
            .detach(|| solve_outlet(zeta, &self.flow, &self.gas, &self.consts, &self.opts))
            .map_err(to_py)?;
        self.wrap_free(py, s)
    }

    /// `(zeta_star, R_star, cap_binding)`.
    fn zeta_star(&self, py: Python<'_>) -> PyResult<(f64, f64, bool)> {
        let z = py
            .detach(|| find_zeta_star(&self.flow, &self.gas, &self.consts, &self.opts))
            .map_err(to_py)?;
        Ok((z.zeta_star, z.r_star, z.cap_binding))
    }

    /// `("EXISTS", solution)`, `("NO_SOLUTION_LONG", None)` or
    /// `("NO_SOLUTION_SHORT", None)`.
    fn classify(&self, py: Python<'_>, radius: f64) -> PyResult<(&'static str, Option<Py<PyFreeSolution>>)> {
        match py.detach(|| match_r(radius, &self.flow, &self.gas, &self.consts, &self.opts)) {
            Ok(m) => Ok(("EXISTS", Some(self.wrap_free(py, m.solution)?))),
            Err(Error::LongNozzle { .. }) => Ok(("NO_SOLUTION_LONG", None)),
            Err(Error::ShortNozzle { .. }) => Ok(("NO_SOLUTION_SHORT", None)),
            Err(e) => Err(to_py(e)),
        }
    }

    /// Rows `(zeta, xi, L, R_equiv, sup_phi)` for `n` values of `zeta`
    /// log-spaced on `[zeta_lo, zeta_hat]`.
    #[pyo3(signature = (n, zeta_lo, jobs=1))]
    fn sweep(&self, py: Python<'_>, n: usize, zeta_lo: f64, jobs: usize) -> PyResult<Vec<SweepTuple>> {
        let rows = py
            .detach(|| sweep_zeta(n, zeta_lo, &self.flow, &self.gas, &self.consts, &self.opts, jobs))
            .map_err(to_py)?;
        rows.into_iter()
            .map(|(row, _)| {
                let v = row.outcome.map_err(to_py)?;
                Ok((row.zeta, v.xi, v.wall_length, v.r_equiv, v.sup_phi))
            })
            .collect()
    }

    /// Solves the free problem at `zeta` and maps it to the physical plane.
    fn physmap(&self, py: Python<'_>, zeta: f64) -> PyResult<PyPhysicalField> {
        let (sol, phys, checks) = py
            .detach(|| {
                let sol = solve_outlet(zeta, &self.flow, &self.gas, &self.consts, &self.opts)?;
                let angles = recover_theta(&sol.field, &self.gas, &self.flow)?;
                let phys = reconstruct(&sol.field, &angles, &self.flow, &self.gas)?;
                let checks = geometry_checks(
                    &sol.field,
                    &phys,
                    &angles,
                    &self.flow,
                    &self.gas,
                    self.consts.c_l,
                    self.consts.c_e,
                );
                Ok((sol, phys, checks))
            })
            .map_err(to_py)?;
        let stride = phys.grid.stride();
        let nodal = |v: &[f64]| v.chunks(stride).map(<[f64]>::to_vec).collect();
        Ok(PyPhysicalField {
            x: nodal(&phys.x),
            y: nodal(&phys.y),
            inlet: phys.inlet_curve.clone(),
            wall: phys.wall_curve.clone(),
            free: phys.free_streamline.clone(),
            outlet: phys.outlet_curve.clone(),
            mass_flux_out: phys.mass_flux_out,
            checks: checks
                .into_iter()
                .map(|c| (c.name.to_string(), c.passed, c.measured, c.tolerance))
                .collect(),
            solution: self.wrap_free(py, sol)?,
        })
    }
}

#[pymodule]
fn jetstream(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGasModel>()?;
    m.add_class::<PyJet>()?;
    m.add_class::<PySpeedField>()?;
    m.add_class::<PyFreeSolution>()?;
    m.add_class::<PyPhysicalField>()?;
    let py = m.py();
    m.add("JetstreamError", py.get_type::<JetstreamError>())?;
    m.add("ConfigError", py.get_type::<ConfigError>())?;
    m.add("ConstraintError", py.get_type::<ConstraintError>())?;
    m.add("NonconvergenceError", py.get_type::<NonconvergenceError>())?;
    m.add("NonexistenceError", py.get_type::<NonexistenceError>())?;
    Ok(())
}
