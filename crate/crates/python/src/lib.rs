//! Python bindings. Inputs are plain lists of floats; curves come back as lists.

use gelkde::nalgebra::DMatrix;
use gelkde::simulation::{self, IhsModel, Obs, PredictionSetup, ScenarioConfig};
use gelkde::{CarrierFamily, GelOptions, ResidualModel, WeightedSample};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn py_err(e: gelkde::Error) -> PyErr {
    if e.is_numerical() {
        PyRuntimeError::new_err(e.to_string())
    } else {
        PyValueError::new_err(e.to_string())
    }
}

fn family(s: &str) -> PyResult<CarrierFamily> {
    CarrierFamily::parse(s).map_err(py_err)
}

fn rows_to_matrix(rows: &[Vec<f64>]) -> gelkde::Result<DMatrix<f64>> {
    let cols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != cols) {
        return Err(gelkde::Error::invalid(
            "rows of the moment matrix differ in length",
        ));
    }
    Ok(DMatrix::from_fn(rows.len(), cols, |i, j| rows[i][j]))
}

fn sample(points: Vec<f64>, weights: Option<Vec<f64>>) -> gelkde::Result<WeightedSample> {
    match weights {
        Some(w) => WeightedSample::new(points, w),
        None => WeightedSample::uniform(points),
    }
}

/// `sinh(theta t) / theta`
#[pyfunction]
fn ihs(theta: f64, t: f64) -> f64 {
    simulation::ihs(theta, t)
}

/// `arsinh(theta y) / theta`
#[pyfunction]
fn ihs_inverse(theta: f64, y: f64) -> f64 {
    simulation::ihs_inverse(theta, y)
}

/// Multiplier maximising the inner criterion for moment rows `g`; returns `(lambda, criterion)`.
#[pyfunction]
#[pyo3(signature = (g, family_name = "el", tol = 1e-10))]
fn solve_lambda(g: Vec<Vec<f64>>, family_name: &str, tol: f64) -> PyResult<(Vec<f64>, f64)> {
    let gmat = rows_to_matrix(&g).map_err(py_err)?;
    let sol = gelkde::solve_lambda(&gmat, family(family_name)?, tol).map_err(py_err)?;
    Ok((sol.lambda.iter().copied().collect(), sol.criterion))
}

/// GEL fit of `arsinh(theta y)/theta = delta + gamma x + u` with instruments `(1, x, ..., x^{d_g-1})`.
#[pyfunction]
#[pyo3(signature = (y, x, d_g = 4, family_name = "el"))]
fn fit<'py>(
    py: Python<'py>,
    y: Vec<f64>,
    x: Vec<f64>,
    d_g: usize,
    family_name: &str,
) -> PyResult<Bound<'py, PyDict>> {
    if y.len() != x.len() {
        return Err(PyValueError::new_err("y and x differ in length"));
    }
    let data: Vec<Obs> = y.iter().zip(&x).map(|(&y, &x)| Obs { y, x }).collect();
    let model = IhsModel::new(d_g).map_err(py_err)?;
    let fam = family(family_name)?;
    let sol = py
        .detach(|| gelkde::gel_fit(&model, &data, fam, &GelOptions::default()))
        .map_err(py_err)?;
    let beta = sol.beta();
    let residuals: Vec<f64> = data.iter().map(|z| model.residual(z, &beta)).collect();
    let overid = gelkde::overid_statistic(&sol);
    let d = PyDict::new(py);
    d.set_item("beta_hat", &sol.beta_hat)?;
    d.set_item("lambda_hat", &sol.lambda_hat)?;
    d.set_item("pi", &sol.pi)?;
    d.set_item("pi_shrunk", sol.shrunk_pi())?;
    d.set_item("residuals", residuals)?;
    d.set_item("criterion", sol.criterion)?;
    d.set_item("converged", sol.converged)?;
    d.set_item("overid_statistic", overid.stat)?;
    d.set_item("overid_dof", overid.dof)?;
    d.set_item("overid_p_value", overid.p_value)?;
    Ok(d)
}

/// Weighted kernel density estimate on `grid` with the Gaussian-based kernel of order `2r`.
#[pyfunction]
#[pyo3(signature = (points, bandwidth, grid, weights = None, r = 2))]
fn kde(
    points: Vec<f64>,
    bandwidth: f64,
    grid: Vec<f64>,
    weights: Option<Vec<f64>>,
    r: usize,
) -> PyResult<Vec<f64>> {
    let k = gelkde::gaussian_kernel(r).map_err(py_err)?;
    let s = sample(points, weights).map_err(py_err)?;
    Ok(gelkde::weighted_kde(&s, &k, bandwidth, &grid)
        .map_err(py_err)?
        .values)
}

/// Weighted kernel distribution function estimate on `grid`.
#[pyfunction]
#[pyo3(signature = (points, bandwidth, grid, weights = None, r = 2))]
fn kcdf(
    points: Vec<f64>,
    bandwidth: f64,
    grid: Vec<f64>,
    weights: Option<Vec<f64>>,
    r: usize,
) -> PyResult<Vec<f64>> {
    let k = gelkde::gaussian_kernel(r).map_err(py_err)?;
    let s = sample(points, weights).map_err(py_err)?;
    Ok(gelkde::weighted_kcdf(&s, &k, bandwidth, &grid)
        .map_err(py_err)?
        .values)
}

/// AMISE-optimal density bandwidth for roughness `R(f^{(2r)})`.
#[pyfunction]
#[pyo3(signature = (roughness, n, r = 2))]
fn amise_bandwidth_pdf(roughness: f64, n: usize, r: usize) -> PyResult<f64> {
    let k = gelkde::gaussian_kernel(r).map_err(py_err)?;
    gelkde::amise_bandwidth_pdf(&k, roughness, n).map_err(py_err)
}

/// Predicted relative integrated variance of the feasible density estimator in scenario 1.
#[pyfunction]
#[pyo3(signature = (n, d_g = 4, r = 2))]
fn predict_ivar(n: usize, d_g: usize, r: usize) -> PyResult<f64> {
    let k = gelkde::gaussian_kernel(r).map_err(py_err)?;
    Ok(
        simulation::scenario1_relative_ivar_prediction(n, d_g, &k, &PredictionSetup::reference())
            .map_err(py_err)?
            .value,
    )
}

#[pyfunction]
fn tau_d_tau(d_g: usize) -> PyResult<f64> {
    simulation::tau_d_tau(d_g, &PredictionSetup::reference()).map_err(py_err)
}

/// Run a Monte Carlo scenario; `config_json` holds scenario fields, the report comes back as JSON.
#[pyfunction]
#[pyo3(signature = (config_json = "{}"))]
fn run_mc(py: Python<'_>, config_json: &str) -> PyResult<String> {
    let cfg: ScenarioConfig =
        serde_json::from_str(config_json).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let report = py.detach(|| simulation::run_mc(&cfg)).map_err(py_err)?;
    serde_json::to_string(&report).map_err(|e| PyRuntimeError::new_err(e.to_string()))
}

#[pymodule]
fn gelkde_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(ihs, m)?)?;
    m.add_function(wrap_pyfunction!(ihs_inverse, m)?)?;
    m.add_function(wrap_pyfunction!(solve_lambda, m)?)?;
    m.add_function(wrap_pyfunction!(fit, m)?)?;
    m.add_function(wrap_pyfunction!(kde, m)?)?;
    m.add_function(wrap_pyfunction!(kcdf, m)?)?;
    m.add_function(wrap_pyfunction!(amise_bandwidth_pdf, m)?)?;
    m.add_function(wrap_pyfunction!(predict_ivar, m)?)?;
    m.add_function(wrap_pyfunction!(tau_d_tau, m)?)?;
    m.add_function(wrap_pyfunction!(run_mc, m)?)?;
    Ok(())
}
