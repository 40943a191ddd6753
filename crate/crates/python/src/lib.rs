//! Python module `jps`.

use jps_core::coeffs::CoefficientSet;
use jps_core::design::Observation;
use jps_core::efficiency;
use jps_core::estimators;
use jps_core::{rng, DistributionSpec, GFunction, JpsSample, Ranker, WeightScheme};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn err(e: jps_core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse<T: std::str::FromStr<Err = jps_core::Error>>(s: &str) -> PyResult<T> {
    s.parse().map_err(err)
}

fn coeff_dict<'py>(py: Python<'py>, c: &CoefficientSet) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("scheme", c.scheme.to_string())?;
    d.set_item("n", c.n)?;
    d.set_item("h", c.h)?;
    d.set_item("e_c1", c.e_c1)?;
    d.set_item("v_c1", c.v_c1)?;
    d.set_item("cov_c1c2", c.cov_c1c2)?;
    d.set_item("e_j1c1sq", c.e_j1c1sq)?;
    d.set_item("m1", c.m1)?;
    d.set_item("m2", c.m2)?;
    d.set_item("k1", c.k1)?;
    d.set_item("k2", c.k2)?;
    Ok(d)
}

/// Weight-scheme coefficients for sample size `n` and class size `h`.
#[pyfunction]
#[pyo3(signature = (scheme, n, h))]
fn coefficients<'py>(py: Python<'py>, scheme: &str, n: u64, h: u64) -> PyResult<Bound<'py, PyDict>> {
    let c = jps_core::coefficient_set(parse(scheme)?, n, h).map_err(err)?;
    coeff_dict(py, &c)
}

/// Judgment-stratum means and variances of `g(X)` under perfect ranking.
#[pyfunction]
#[pyo3(signature = (dist, h, g = "identity"))]
fn stratum_moments<'py>(py: Python<'py>, dist: &str, h: usize, g: &str) -> PyResult<Bound<'py, PyDict>> {
    let dist: DistributionSpec = parse(dist)?;
    let g: GFunction = parse(g)?;
    let sm = jps_core::stratum_moments(&dist, &g, h).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("mu_g", sm.mu_g)?;
    d.set_item("sigma2_g", sm.sigma2_g)?;
    d.set_item("mu_r", sm.mu_r)?;
    d.set_item("sigma2_r", sm.sigma2_r)?;
    d.set_item("delta_g", sm.delta_g)?;
    Ok(d)
}

/// Exact variance of the class estimator of `E g(X)`.
#[pyfunction]
#[pyo3(signature = (dist, n, h, scheme = "jps", g = "identity"))]
fn theoretical_variance(dist: &str, n: u64, h: usize, scheme: &str, g: &str) -> PyResult<f64> {
    let sm = jps_core::stratum_moments(&parse(dist)?, &parse(g)?, h).map_err(err)?;
    let c = jps_core::coefficient_set(parse(scheme)?, n, h as u64).map_err(err)?;
    estimators::theoretical_variance(&c, &sm).map_err(err)
}

/// Efficiency of the class mean estimator relative to the SRS mean.
#[pyfunction]
#[pyo3(signature = (dist, n, h, scheme = "jps"))]
fn re_vs_srs(dist: &str, n: u64, h: usize, scheme: &str) -> PyResult<f64> {
    let sm = jps_core::stratum_moments(&parse(dist)?, &GFunction::Identity, h).map_err(err)?;
    let c = jps_core::coefficient_set(parse(scheme)?, n, h as u64).map_err(err)?;
    efficiency::re_vs_srs(&c, sm.delta_g).map_err(err)
}

/// `(h_opt, mre)` for the standard JPS mean.
#[pyfunction]
#[pyo3(signature = (dist, n, h_max = 25))]
fn optimal_h(dist: &str, n: u64, h_max: usize) -> PyResult<(usize, f64)> {
    let r = efficiency::optimal_h(n, &parse(dist)?, WeightScheme::StandardJps, h_max).map_err(err)?;
    Ok((r.h_opt, r.mre))
}

/// Draws a JPS sample; returns `(values, ranks)`.
#[pyfunction]
#[pyo3(signature = (dist, n, h, seed = 0, ranker = "perfect"))]
fn simulate_jps(dist: &str, n: usize, h: usize, seed: u64, ranker: &str) -> PyResult<(Vec<f64>, Vec<usize>)> {
    let ranker: Ranker = parse(ranker)?;
    let mut rng = rng::stream(seed, 0);
    let s = jps_core::draw_jps(&mut rng, &parse(dist)?, n, h, ranker).map_err(err)?;
    Ok(s.observations().iter().map(|o| (o.x, o.rank)).unzip())
}

/// Estimate of `E g(X)` from values and 1-based judgment ranks.
#[pyfunction]
#[pyo3(signature = (values, ranks, h, scheme = "jps", g = "identity"))]
fn estimate(values: Vec<f64>, ranks: Vec<usize>, h: usize, scheme: &str, g: &str) -> PyResult<f64> {
    if values.len() != ranks.len() {
        return Err(PyValueError::new_err("values and ranks differ in length"));
    }
    let obs = values.into_iter().zip(ranks).map(|(x, rank)| Observation { x, rank }).collect();
    let sample = JpsSample::new(h, obs).map_err(err)?;
    Ok(estimators::estimate_g_mean(&sample, &parse(g)?, parse(scheme)?).value)
}

#[pymodule]
fn jps(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(coefficients, m)?)?;
    m.add_function(wrap_pyfunction!(stratum_moments, m)?)?;
    m.add_function(wrap_pyfunction!(theoretical_variance, m)?)?;
    m.add_function(wrap_pyfunction!(re_vs_srs, m)?)?;
    m.add_function(wrap_pyfunction!(optimal_h, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_jps, m)?)?;
    m.add_function(wrap_pyfunction!(estimate, m)?)?;
    Ok(())
}
