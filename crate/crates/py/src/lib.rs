//! Python bindings: `import pyrde3`.

use num_complex::Complex64;
use pyo3::exceptions::{PyArithmeticError, PyKeyError, PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use rde3::analysis::{self, Component};
use rde3::bounds;
use rde3::convergence::{self, RateSettings};
use rde3::dynamics::{self, Termination, DEFAULT_CAP};
use rde3::scenario::{self, Scenario};
use rde3::stability;
use rde3::Error;

fn to_py(err: Error) -> PyErr {
    let msg = err.to_string();
    match err {
        Error::UnknownPreset(_) => PyKeyError::new_err(msg),
        Error::Io { .. } => PyOSError::new_err(msg),
        Error::InsufficientData(_) => PyRuntimeError::new_err(msg),
        Error::Convergence { .. } | Error::Numeric(_) | Error::Overflow { .. } => {
            PyArithmeticError::new_err(msg)
        }
        _ => PyValueError::new_err(msg),
    }
}

fn component(name: &str) -> PyResult<Component> {
    match name {
        "x" => Ok(Component::X),
        "y" => Ok(Component::Y),
        other => Err(PyValueError::new_err(format!(
            "component must be 'x' or 'y', got {other:?}"
        ))),
    }
}

type Violation = (&'static str, i64, f64, &'static str);
type CycleRow = (&'static str, &'static str, i64, usize, bool);

fn initial(x: [f64; 3], y: [f64; 3]) -> PyResult<dynamics::InitialConditions> {
    dynamics::InitialConditions::new(x, y).map_err(to_py)
}

/// System parameters `alpha, p, q`, all positive.
#[pyclass(frozen, eq, skip_from_py_object, name = "Params", module = "pyrde3")]
#[derive(Clone, Copy, PartialEq)]
struct PyParams(dynamics::Params);

#[pymethods]
impl PyParams {
    #[new]
    fn new(alpha: f64, p: f64, q: f64) -> PyResult<Self> {
        dynamics::Params::new(alpha, p, q)
            .map(PyParams)
            .map_err(to_py)
    }

    #[getter]
    fn alpha(&self) -> f64 {
        self.0.alpha()
    }

    #[getter]
    fn p(&self) -> f64 {
        self.0.p()
    }

    #[getter]
    fn q(&self) -> f64 {
        self.0.q()
    }

    /// `(x_bar, y_bar)`.
    fn equilibrium(&self) -> (f64, f64) {
        let eq = self.0.equilibrium();
        (eq.x_bar, eq.y_bar)
    }

    fn swapped(&self) -> Self {
        PyParams(self.0.swapped())
    }

    fn __repr__(&self) -> String {
        format!(
            "Params(alpha={}, p={}, q={})",
            self.0.alpha(),
            self.0.p(),
            self.0.q()
        )
    }
}

/// A simulated orbit; `x[k]`, `y[k]` hold index `k - 2`.
#[pyclass(frozen, name = "Orbit", module = "pyrde3")]
struct PyOrbit(dynamics::Orbit);

#[pymethods]
impl PyOrbit {
    #[getter]
    fn x(&self) -> Vec<f64> {
        self.0.xs()
    }

    #[getter]
    fn y(&self) -> Vec<f64> {
        self.0.ys()
    }

    #[getter]
    fn n(&self) -> Vec<i64> {
        self.0.indexed().map(|(n, _, _)| n).collect()
    }

    #[getter]
    fn last_index(&self) -> i64 {
        self.0.last_index()
    }

    /// `"completed"`, `"overflow"` or `"not-finite"`.
    #[getter]
    fn termination(&self) -> &'static str {
        match self.0.termination() {
            Termination::Completed => "completed",
            Termination::Overflow(_) => "overflow",
            Termination::NotFinite(_) => "not-finite",
        }
    }

    fn get(&self, n: i64) -> Option<(f64, f64)> {
        self.0.get(n)
    }

    fn final_distance(&self) -> Option<f64> {
        self.0.final_distance(&self.0.params().equilibrium())
    }

    fn to_csv(&self) -> String {
        rde3::report::orbit_csv(&self.0)
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }
}

#[pyfunction]
#[pyo3(signature = (params, x_init, y_init, n_steps = 500, cap = DEFAULT_CAP))]
fn simulate(
    params: &PyParams,
    x_init: [f64; 3],
    y_init: [f64; 3],
    n_steps: usize,
    cap: f64,
) -> PyResult<PyOrbit> {
    let init = initial(x_init, y_init)?;
    Ok(PyOrbit(dynamics::simulate(&params.0, &init, n_steps, cap)))
}

/// One step from the window `x = [x[n-2], x[n-1], x[n]]`, same for `y`.
#[pyfunction]
#[pyo3(signature = (params, x, y, cap = DEFAULT_CAP))]
fn step(params: &PyParams, x: [f64; 3], y: [f64; 3], cap: f64) -> PyResult<(f64, f64)> {
    let window = dynamics::Window::new(x, y).map_err(to_py)?;
    dynamics::step(&params.0, &window, cap).map_err(to_py)
}

/// Built-in scenario as `(params, x_init, y_init)`.
#[pyfunction]
fn preset(name: &str) -> PyResult<(PyParams, [f64; 3], [f64; 3])> {
    let sc = Scenario::preset(name).map_err(to_py)?;
    Ok((PyParams(sc.params), sc.init.x(), sc.init.y()))
}

#[pyfunction]
fn presets() -> Vec<&'static str> {
    scenario::PRESETS.to_vec()
}

/// Stability report as a dict.
#[pyfunction]
fn classify<'py>(py: Python<'py>, params: &PyParams) -> PyResult<Bound<'py, PyDict>> {
    let report = stability::classify(&params.0).map_err(to_py)?;
    let out = PyDict::new(py);
    let eigs: Vec<Complex64> = report.eigenvalues().to_vec();
    out.set_item("eigenvalues", eigs)?;
    out.set_item("spectral_radius", report.spectral_radius)?;
    out.set_item("char_residual", report.char_residual())?;
    out.set_item("hypotheses_hold", report.hypotheses_hold)?;
    out.set_item("classification", report.classification.as_str())?;
    match report.certificate {
        Ok(c) => {
            let cert = PyDict::new(py);
            cert.set_item("epsilon", c.epsilon)?;
            cert.set_item("weights", c.weights.to_vec())?;
            cert.set_item("norm_value", c.norm_value)?;
            out.set_item("certificate", cert)?;
        }
        Err(r) => {
            out.set_item("certificate", py.None())?;
            out.set_item("refusal", r.to_string())?;
        }
    }
    Ok(out)
}

/// `(a, b, c)` of the geometric envelopes; needs `alpha > 1`.
#[pyfunction]
fn envelope(params: &PyParams) -> PyResult<(f64, f64, f64)> {
    let c = bounds::envelope_coeffs(&params.0).map_err(to_py)?;
    Ok((c.a, c.b, c.c))
}

#[pyfunction]
fn envelope_at(params: &PyParams, component_name: &str, seed: f64, n: u32) -> PyResult<f64> {
    let c = bounds::envelope_coeffs(&params.0).map_err(to_py)?;
    Ok(c.envelope_at(component(component_name)?, seed, n))
}

/// Bounds audit; returns `(checked, violations)` with each violation as
/// `(component, index, value, kind)`.
#[pyfunction]
#[pyo3(signature = (orbit, slack = bounds::DEFAULT_SLACK))]
fn audit_bounds(orbit: &PyOrbit, slack: f64) -> PyResult<(usize, Vec<Violation>)> {
    let params = *orbit.0.params();
    let audit = bounds::audit_bounds(&orbit.0, &params, slack).map_err(to_py)?;
    let violations = audit
        .violations
        .iter()
        .map(|v| {
            let kind = match v.kind {
                bounds::ViolationKind::Lower => "lower",
                bounds::ViolationKind::Upper => "upper",
            };
            (v.component.as_str(), v.index, v.value, kind)
        })
        .collect();
    Ok((audit.checked, violations))
}

/// Semi-cycles of an orbit as `(component, sign, start, length, open)`
/// plus whether the length rule holds on the joint list.
#[pyfunction]
fn semicycles(
    params: &PyParams,
    x_init: [f64; 3],
    y_init: [f64; 3],
    n_steps: usize,
) -> PyResult<(Vec<CycleRow>, bool)> {
    let init = initial(x_init, y_init)?;
    let dev = dynamics::simulate_deviations(&params.0, &init, n_steps);
    let cycles = analysis::semicycles_of(&dev);
    let rule = analysis::check_semicycle_rule(&cycles.joint);
    let rows = cycles
        .x
        .iter()
        .chain(cycles.y.iter())
        .copied()
        .chain(cycles.joint.iter().map(|j| j.as_semicycle()))
        .map(|c| {
            (
                c.component.as_str(),
                c.sign.as_str(),
                c.start,
                c.length,
                c.open,
            )
        })
        .collect();
    Ok((rows, rule.holds))
}

/// Oscillation status of `(x, y, joint)`.
#[pyfunction]
fn oscillation(
    params: &PyParams,
    x_init: [f64; 3],
    y_init: [f64; 3],
    n_steps: usize,
) -> PyResult<(&'static str, &'static str, &'static str)> {
    let init = initial(x_init, y_init)?;
    let r = analysis::classify_oscillation_of(&dynamics::simulate_deviations(
        &params.0, &init, n_steps,
    ));
    Ok((
        r.x_status.as_str(),
        r.y_status.as_str(),
        r.joint_status.as_str(),
    ))
}

/// Grid search for period-two solutions; returns `(found_nontrivial, max_distance)`.
#[pyfunction]
#[pyo3(signature = (params, points = 11, tol = 1e-6))]
fn find_period2(params: &PyParams, points: usize, tol: f64) -> (bool, f64) {
    let mut grid = analysis::Period2Grid::default_for(&params.0);
    grid.points = points;
    let r = analysis::find_period2(&params.0, &grid, tol);
    (r.found_nontrivial, r.max_distance)
}

/// Perron rate of a converging orbit as a dict.
#[pyfunction]
#[pyo3(signature = (params, x_init, y_init, n_steps = 1000, burn_in = convergence::DEFAULT_BURN_IN))]
fn perron_rate<'py>(
    py: Python<'py>,
    params: &PyParams,
    x_init: [f64; 3],
    y_init: [f64; 3],
    n_steps: usize,
    burn_in: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let init = initial(x_init, y_init)?;
    let settings = RateSettings {
        n_steps,
        burn_in,
        ..RateSettings::default()
    };
    let rate = convergence::perron_rate(&params.0, &init, &settings).map_err(to_py)?;
    let out = PyDict::new(py);
    out.set_item("ratio_estimate", rate.ratio_estimate)?;
    out.set_item("root_estimate", rate.root_estimate)?;
    out.set_item("matched_modulus", rate.matched.map(|m| m.modulus))?;
    out.set_item("gap", rate.matched.map(|m| m.gap))?;
    Ok(out)
}

/// Rate from a list of error norms.
#[pyfunction]
#[pyo3(signature = (norms, burn_in = convergence::DEFAULT_BURN_IN, window = None))]
fn estimate_rate(norms: Vec<f64>, burn_in: usize, window: Option<usize>) -> PyResult<(f64, f64)> {
    let r = convergence::estimate_rate(&norms, burn_in, window).map_err(to_py)?;
    Ok((r.ratio_estimate, r.root_estimate))
}

#[pymodule]
fn pyrde3(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyParams>()?;
    m.add_class::<PyOrbit>()?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(step, m)?)?;
    m.add_function(wrap_pyfunction!(preset, m)?)?;
    m.add_function(wrap_pyfunction!(presets, m)?)?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    m.add_function(wrap_pyfunction!(envelope, m)?)?;
    m.add_function(wrap_pyfunction!(envelope_at, m)?)?;
    m.add_function(wrap_pyfunction!(audit_bounds, m)?)?;
    m.add_function(wrap_pyfunction!(semicycles, m)?)?;
    m.add_function(wrap_pyfunction!(oscillation, m)?)?;
    m.add_function(wrap_pyfunction!(find_period2, m)?)?;
    m.add_function(wrap_pyfunction!(perron_rate, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_rate, m)?)?;
    Ok(())
}
