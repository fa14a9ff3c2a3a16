//! Python bindings. Reports come back as plain dicts and lists.

use pyo3::exceptions::{PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;

use qlwave::charflow::CharFlow;
use qlwave::config::RunConfig;
use qlwave::experiments::{self, scaling::default_test_field};
use qlwave::geometry::causal_speed_set;
use qlwave::profiles::{InitialData, ProfileKind, ProfileParams};
use qlwave::Error;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Io(_) => PyOSError::new_err(e.to_string()),
        Error::Quadrature(_) | Error::NonUniqueMaximizer { .. } => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn to_dict<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn config(text: Option<&str>) -> PyResult<RunConfig> {
    text.map_or_else(|| Ok(RunConfig::default()), |t| RunConfig::from_toml(t).map_err(to_py))
}

fn params(alpha: f64, beta: f64, delta: f64, epsilon: f64, lam: f64) -> ProfileParams {
    ProfileParams { alpha, beta, delta, epsilon, lambda: lam, ..ProfileParams::default() }
}

/// Problems found in a TOML config; empty when valid.
#[pyfunction]
#[pyo3(signature = (config_toml=None))]
fn validate(config_toml: Option<&str>) -> PyResult<Vec<String>> {
    Ok(config(config_toml)?.violations())
}

/// Blow-up time `t_eps` and focusing label `nu_eps`.
#[pyfunction]
#[pyo3(signature = (epsilon=1e-3, alpha=0.11, beta=0.6, delta=0.05, lam=0.01))]
fn blowup_time(epsilon: f64, alpha: f64, beta: f64, delta: f64, lam: f64) -> PyResult<(f64, f64)> {
    let flow = CharFlow::new(params(alpha, beta, delta, epsilon, lam)).map_err(to_py)?;
    Ok((flow.t_eps, flow.nu_eps))
}

/// Rows `(x1, value, d1, d2)` of one profile at the given abscissae.
#[pyfunction]
#[pyo3(signature = (kind, xs, x2=0.0, epsilon=1e-3, alpha=0.11, beta=0.6, delta=0.05, lam=0.01))]
#[allow(clippy::too_many_arguments)]
fn profile(
    kind: &str,
    xs: Vec<f64>,
    x2: f64,
    epsilon: f64,
    alpha: f64,
    beta: f64,
    delta: f64,
    lam: f64,
) -> PyResult<Vec<[f64; 4]>> {
    let kind: ProfileKind = kind.parse().map_err(to_py)?;
    let data = InitialData::new(params(alpha, beta, delta, epsilon, lam)).map_err(to_py)?;
    Ok(data.tabulate(kind, &xs, x2).map_err(to_py)?.rows)
}

/// `v`, `v_x`, `v_xx` at time `t` from the characteristic solution.
#[pyfunction]
#[pyo3(signature = (t, xs, epsilon=1e-3, alpha=0.11))]
fn field_at_t<'py>(py: Python<'py>, t: f64, xs: Vec<f64>, epsilon: f64, alpha: f64) -> PyResult<Bound<'py, PyAny>> {
    let flow = CharFlow::new(ProfileParams { alpha, epsilon, ..ProfileParams::default() }).map_err(to_py)?;
    to_dict(py, &flow.sample_field(t, &xs).map_err(to_py)?)
}

/// `n` boundary points of the causal velocity ellipse for field value `v`.
#[pyfunction]
#[pyo3(signature = (v, n=10_000))]
fn causal_ellipse(v: f64, n: usize) -> PyResult<Vec<[f64; 2]>> {
    Ok(causal_speed_set(v).map_err(to_py)?.boundary(n))
}

/// Runs one experiment by CLI name and returns its report.
#[pyfunction]
#[pyo3(signature = (experiment, config_toml=None, seed=None))]
fn run<'py>(py: Python<'py>, experiment: &str, config_toml: Option<&str>, seed: Option<u64>) -> PyResult<Bound<'py, PyAny>> {
    let cfg = config(config_toml)?;
    let p = cfg.params;
    let seed = seed.unwrap_or(cfg.seed);
    let flow = || CharFlow::new(p).map_err(to_py);
    match experiment {
        "dyadic" => to_dict(py, &experiments::run_dyadic(p, &cfg.dyadic).map_err(to_py)?),
        "blowup" => to_dict(py, &experiments::run_blowup(&flow()?, &cfg.blowup).map_err(to_py)?),
        "lifespan" => to_dict(py, &experiments::lifespan_sweep(p, &cfg.lifespan.eps_list).map_err(to_py)?),
        "scaling" => {
            let s = &cfg.scaling;
            let r = experiments::scale_norm_check(&default_test_field(), s.omega, s.gamma, &s.lam_list, s.beta.unwrap_or(p.beta));
            to_dict(py, &r.map_err(to_py)?)
        }
        "glue" => to_dict(py, &experiments::build_glued_sequence(p.alpha, p.beta, &cfg.glue).map_err(to_py)?),
        "geometry" => to_dict(py, &experiments::run_geometry(p, &cfg.geometry, seed).map_err(to_py)?),
        "fdcheck" => to_dict(py, &experiments::run_fdcheck(&flow()?, &cfg.fdcheck).map_err(to_py)?),
        "norms-selftest" => to_dict(py, &experiments::norms_selftest(cfg.selftest.nodes).map_err(to_py)?),
        other => Err(PyValueError::new_err(format!("unknown experiment '{other}'"))),
    }
}

#[pymodule]
fn qlwave_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_function(wrap_pyfunction!(validate, m)?)?;
    m.add_function(wrap_pyfunction!(blowup_time, m)?)?;
    m.add_function(wrap_pyfunction!(profile, m)?)?;
    m.add_function(wrap_pyfunction!(field_at_t, m)?)?;
    m.add_function(wrap_pyfunction!(causal_ellipse, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    Ok(())
}
