//! Python bindings for `bellsphere`.

use bellsphere::analysis::{self, CHSH_PAIRS};
use bellsphere::oracles;
use bellsphere::{
    AngularMomentumVector, Axis, ChshMode, ChshResult, DetectorModel, Ensemble, Feasibility,
    MonteCarlo, PairSource, Sign,
};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn model(name: &str, p_hi: Option<f64>) -> PyResult<DetectorModel> {
    let m: DetectorModel = name.parse().map_err(err)?;
    match (m, p_hi) {
        (DetectorModel::StochasticSign { .. }, Some(p)) => DetectorModel::stochastic_sign(p).map_err(err),
        (_, Some(_)) => Err(PyValueError::new_err("p_hi only applies to the stochastic model")),
        (m, None) => Ok(m),
    }
}

fn sign(s: i32) -> PyResult<Sign> {
    match s {
        1 => Ok(Sign::Plus),
        -1 => Ok(Sign::Minus),
        _ => Err(PyValueError::new_err("sign must be +1 or -1")),
    }
}

/// `None` is the full sphere, `(theta, ±1)` a hemisphere.
fn ensemble(spec: Option<(f64, i32)>) -> PyResult<Ensemble> {
    match spec {
        None => Ok(Ensemble::FullSphere),
        Some((theta, s)) => Ok(Ensemble::hemisphere(Axis::new(theta), sign(s)?)),
    }
}

fn plan(seed: u64, workers: usize) -> MonteCarlo {
    MonteCarlo::new(seed).with_workers(workers)
}

fn chsh_dict<'py>(py: Python<'py>, r: &ChshResult) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("model", r.model.name())?;
    d.set_item("angles", r.angles.to_vec())?;
    d.set_item("c", r.c)?;
    d.set_item("std_err", r.std_err)?;
    d.set_item("v_max", r.v_max)?;
    d.set_item("violated", r.violated)?;
    Ok(d)
}

/// Projection of the unit vector `(x, y, z)` onto the axis at angle `theta`.
#[pyfunction]
fn project(j: (f64, f64, f64), theta: f64) -> f64 {
    AngularMomentumVector::new(j.0, j.1, j.2).project(Axis::new(theta))
}

#[pyfunction]
fn separation(theta_a: f64, theta_b: f64) -> f64 {
    bellsphere::geometry::separation(theta_a, theta_b)
}

#[pyfunction]
#[pyo3(signature = (model_name, theta_a, theta_b, p_hi=None))]
fn e_closed(model_name: &str, theta_a: f64, theta_b: f64, p_hi: Option<f64>) -> PyResult<f64> {
    Ok(analysis::e_closed(&model(model_name, p_hi)?, theta_a, theta_b))
}

#[pyfunction]
fn lune_probability(k: f64, k_prime: f64, delta: f64) -> f64 {
    analysis::lune_probability(k, k_prime, delta)
}

#[pyfunction]
#[pyo3(signature = (ensemble_spec, theta))]
fn mean_projection(ensemble_spec: Option<(f64, i32)>, theta: f64) -> PyResult<f64> {
    Ok(ensemble(ensemble_spec)?.mean_projection(Axis::new(theta)))
}

#[pyfunction]
#[pyo3(signature = (model_name, theta_a, theta_b, n, seed=1, workers=0, rotating=false, p_hi=None))]
#[allow(clippy::too_many_arguments)]
fn estimate_correlation<'py>(
    py: Python<'py>,
    model_name: &str,
    theta_a: f64,
    theta_b: f64,
    n: usize,
    seed: u64,
    workers: usize,
    rotating: bool,
    p_hi: Option<f64>,
) -> PyResult<Bound<'py, PyDict>> {
    let m = model(model_name, p_hi)?;
    let src = if rotating { PairSource::RotatingHemispheres } else { PairSource::StaticSphere };
    let mc = plan(seed, workers);
    let r = py
        .detach(|| analysis::estimate_correlation(&m, &src, Axis::new(theta_a), Axis::new(theta_b), n, &mc))
        .map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("model", m.name())?;
    d.set_item("theta_a", r.theta_a)?;
    d.set_item("theta_b", r.theta_b)?;
    d.set_item("n_trials", r.n_trials)?;
    d.set_item("e_hat", r.e_hat)?;
    d.set_item("std_err", r.std_err)?;
    d.set_item("e_closed", r.e_closed)?;
    d.set_item("z_score", r.z_score())?;
    Ok(d)
}

/// CHSH value at `(a, b, a', b')`; Monte Carlo when `trials` is given.
#[pyfunction]
#[pyo3(signature = (model_name, angles, trials=None, seed=1, workers=0, p_hi=None))]
fn chsh<'py>(
    py: Python<'py>,
    model_name: &str,
    angles: [f64; 4],
    trials: Option<usize>,
    seed: u64,
    workers: usize,
    p_hi: Option<f64>,
) -> PyResult<Bound<'py, PyDict>> {
    let m = model(model_name, p_hi)?;
    let mode = match trials {
        None => ChshMode::Closed,
        Some(n) => ChshMode::MonteCarlo { n, mc: plan(seed, workers) },
    };
    let r = py.detach(|| bellsphere::chsh(&m, angles, &mode)).map_err(err)?;
    chsh_dict(py, &r)
}

/// Closed-form sweep; returns the maximal record.
#[pyfunction]
#[pyo3(signature = (model_name, step, p_hi=None))]
fn sweep_chsh<'py>(py: Python<'py>, model_name: &str, step: f64, p_hi: Option<f64>) -> PyResult<Bound<'py, PyDict>> {
    let m = model(model_name, p_hi)?;
    let (best, _) = py.detach(|| bellsphere::sweep_chsh(&m, step, &ChshMode::Closed)).map_err(err)?;
    chsh_dict(py, &best)
}

/// Returns `(feasible, data)`: the 16 joint probabilities, or the Farkas multipliers.
#[pyfunction]
#[pyo3(signature = (correlations, marginals=None, v_max=0.5))]
fn fine_feasible(correlations: [f64; 4], marginals: Option<[f64; 4]>, v_max: f64) -> PyResult<(bool, Vec<f64>)> {
    let marg = marginals.unwrap_or([0.5; 4]).map(|p| [p, 1.0 - p]);
    Ok(match bellsphere::fine_feasible(correlations, marg, v_max).map_err(err)? {
        Feasibility::Feasible(t) => (true, t.probabilities().to_vec()),
        Feasibility::Infeasible(c) => (false, c.y),
    })
}

/// CHSH correlations `E(a,b), E(a,b'), E(a',b), E(a',b')` in closed form.
#[pyfunction]
#[pyo3(signature = (model_name, angles, p_hi=None))]
fn chsh_correlations(model_name: &str, angles: [f64; 4], p_hi: Option<f64>) -> PyResult<[f64; 4]> {
    let m = model(model_name, p_hi)?;
    Ok(CHSH_PAIRS.map(|(i, j)| analysis::e_closed(&m, angles[i], angles[j])))
}

#[pyfunction]
#[pyo3(signature = (axes, initial=None))]
fn sequence_tree_mean(axes: Vec<f64>, initial: Option<(f64, i32)>) -> PyResult<f64> {
    let axes: Vec<Axis> = axes.into_iter().map(Axis::new).collect();
    oracles::sequence_tree_mean(&ensemble(initial)?, &axes).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (model_name, delta, p_hi=None))]
fn enumerate_pointlike_e(model_name: &str, delta: f64, p_hi: Option<f64>) -> PyResult<f64> {
    oracles::enumerate_pointlike_e(&model(model_name, p_hi)?, delta).map_err(err)
}

#[pyfunction]
fn enumerate_ensemble_e(delta: f64) -> f64 {
    oracles::enumerate_ensemble_e(delta)
}

/// Counter-based random stream.
#[pyclass(name = "RngStream")]
struct PyRngStream {
    inner: bellsphere::RngStream,
}

#[pymethods]
impl PyRngStream {
    #[new]
    #[pyo3(signature = (seed, stream=0))]
    fn new(seed: u64, stream: u64) -> Self {
        Self { inner: bellsphere::RngStream::new(seed, stream) }
    }

    fn uniform(&mut self) -> f64 {
        self.inner.uniform()
    }

    /// Draws from the full sphere, or a hemisphere `(theta, ±1)`.
    #[pyo3(signature = (ensemble_spec=None))]
    fn sample(&mut self, ensemble_spec: Option<(f64, i32)>) -> PyResult<[f64; 3]> {
        Ok(ensemble(ensemble_spec)?.sample(&mut self.inner).map_err(err)?.components())
    }

    /// One measurement: returns the outcome and `(theta, ±1)` of the collapsed ensemble.
    #[pyo3(signature = (theta, ensemble_spec=None))]
    fn measure(&mut self, theta: f64, ensemble_spec: Option<(f64, i32)>) -> PyResult<(f64, (f64, i32))> {
        let e = ensemble(ensemble_spec)?;
        let (out, post) = bellsphere::detectors::measure_ensemble(&e, Axis::new(theta), &mut self.inner).map_err(err)?;
        match post {
            Ensemble::Hemisphere { axis, sign } => Ok((out.value(), (axis.theta(), sign.value() as i32))),
            _ => Err(PyValueError::new_err("unexpected post-measurement ensemble")),
        }
    }
}

#[pymodule]
fn bellsphere_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(project, m)?)?;
    m.add_function(wrap_pyfunction!(separation, m)?)?;
    m.add_function(wrap_pyfunction!(e_closed, m)?)?;
    m.add_function(wrap_pyfunction!(lune_probability, m)?)?;
    m.add_function(wrap_pyfunction!(mean_projection, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_correlation, m)?)?;
    m.add_function(wrap_pyfunction!(chsh, m)?)?;
    m.add_function(wrap_pyfunction!(sweep_chsh, m)?)?;
    m.add_function(wrap_pyfunction!(fine_feasible, m)?)?;
    m.add_function(wrap_pyfunction!(chsh_correlations, m)?)?;
    m.add_function(wrap_pyfunction!(sequence_tree_mean, m)?)?;
    m.add_function(wrap_pyfunction!(enumerate_pointlike_e, m)?)?;
    m.add_function(wrap_pyfunction!(enumerate_ensemble_e, m)?)?;
    m.add_class::<PyRngStream>()?;
    Ok(())
}
