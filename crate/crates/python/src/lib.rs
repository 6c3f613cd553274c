//! Python bindings. Errors surface as `darkspin.DarkspinError` (a
//! `ValueError`), with `CapacityError` for oracle size limits.

use std::collections::BTreeMap;

use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use darkspin::channels::{self, Quantity};
use darkspin::cli::{self as dcli, Dataset, RunConfig};
use darkspin::protocol::{self, DecayRate, ProtocolSetup, PulseSchedule};
use darkspin::{model, pairwise, squeezing, ChannelKind, ChannelStrength, Error, ModelParams};

create_exception!(darkspin, DarkspinError, PyValueError);
create_exception!(darkspin, CapacityError, DarkspinError);

/// Complex numbers cross the boundary as `(re, im)`.
type Complex = (f64, f64);

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Capacity(_) => CapacityError::new_err(e.to_string()),
        _ => DarkspinError::new_err(e.to_string()),
    }
}

fn params(
    atoms: u32,
    excitations: u32,
    theta: f64,
    k: f64,
    pair_sep: u32,
) -> PyResult<ModelParams> {
    ModelParams::new(atoms, excitations, theta)
        .and_then(|p| p.with_wave_vector(k))
        .and_then(|p| p.with_pair_sep(pair_sep))
        .map_err(py_err)
}

fn channel(kind: &str, p: f64) -> PyResult<(ChannelKind, ChannelStrength)> {
    let kind = kind.parse().map_err(py_err)?;
    Ok((kind, ChannelStrength::new(p).map_err(py_err)?))
}

/// Photon-number distribution `w_k`, `k = 0..=n`.
#[pyfunction]
#[pyo3(signature = (atoms, excitations, theta))]
fn photon_weights(atoms: u32, excitations: u32, theta: f64) -> PyResult<Vec<f64>> {
    Ok(model::photon_weights(&params(atoms, excitations, theta, 0.0, 1)?).weights)
}

/// Dark-state normalization `A`.
#[pyfunction]
fn normalization(atoms: u32, excitations: u32, theta: f64) -> PyResult<f64> {
    Ok(model::normalization_a(&params(
        atoms,
        excitations,
        theta,
        0.0,
        1,
    )?))
}

/// Collective and photon moments as a dict.
#[pyfunction]
#[pyo3(signature = (atoms, excitations, theta, k=0.0))]
fn moments(
    atoms: u32,
    excitations: u32,
    theta: f64,
    k: f64,
) -> PyResult<BTreeMap<&'static str, f64>> {
    let m = model::collective_moments(&params(atoms, excitations, theta, k, 1)?);
    Ok(BTreeMap::from([
        ("jz", m.jz_mean),
        ("jz2", m.jz2_mean),
        ("j2", m.j2_mean),
        ("n", m.n_mean),
        ("n2fact", m.n2fact_mean),
    ]))
}

fn report(r: squeezing::SqueezingReport) -> BTreeMap<&'static str, f64> {
    BTreeMap::from([
        ("xi1_sq", r.xi1_sq),
        ("xi2_sq", r.xi2_sq),
        ("xi3_sq", r.xi3_sq),
        ("varsigma_sq", r.varsigma_sq),
        ("zeta3_sq", r.zeta3_sq),
    ])
}

/// Squeezing parameters of the ideal dark state.
#[pyfunction]
#[pyo3(name = "squeezing", signature = (atoms, excitations, theta, k=0.0))]
fn dark_squeezing(
    atoms: u32,
    excitations: u32,
    theta: f64,
    k: f64,
) -> PyResult<BTreeMap<&'static str, f64>> {
    let p = params(atoms, excitations, theta, k, 1)?;
    squeezing::dark_state_squeezing(&p)
        .map(report)
        .map_err(py_err)
}

/// Reduced pair state as `(v_plus, v_minus, w, y, u)`.
#[pyfunction]
#[pyo3(signature = (atoms, excitations, theta, k=0.0, pair_sep=1))]
fn rho12(
    atoms: u32,
    excitations: u32,
    theta: f64,
    k: f64,
    pair_sep: u32,
) -> PyResult<(f64, f64, f64, Complex, Complex)> {
    let s = pairwise::rho12(&params(atoms, excitations, theta, k, pair_sep)?).map_err(py_err)?;
    Ok((s.v_plus, s.v_minus, s.w, (s.y.re, s.y.im), (s.u.re, s.u.im)))
}

/// Pairwise concurrence of the ideal dark state.
#[pyfunction]
#[pyo3(signature = (atoms, excitations, theta, k=0.0, pair_sep=1))]
fn concurrence(atoms: u32, excitations: u32, theta: f64, k: f64, pair_sep: u32) -> PyResult<f64> {
    let s = pairwise::rho12(&params(atoms, excitations, theta, k, pair_sep)?).map_err(py_err)?;
    Ok(pairwise::concurrence_x(&s))
}

/// Smallest positive `K` where `ξ₃²` reaches one.
#[pyfunction]
fn critical_k(atoms: u32, excitations: u32, theta: f64) -> PyResult<f64> {
    squeezing::critical_k(atoms, excitations, theta).map_err(py_err)
}

/// Squeezing parameters after a channel (`adc`, `pdc` or `dpc`) of strength `p`.
#[pyfunction]
fn evolved_squeezing(
    atoms: u32,
    excitations: u32,
    theta: f64,
    channel_kind: &str,
    p: f64,
) -> PyResult<BTreeMap<&'static str, f64>> {
    let (kind, strength) = channel(channel_kind, p)?;
    let prm = params(atoms, excitations, theta, 0.0, 1)?;
    channels::evolved_squeezing(kind, strength, &prm)
        .map(report)
        .map_err(py_err)
}

/// Concurrence after a channel of strength `p`.
#[pyfunction]
fn evolved_concurrence(
    atoms: u32,
    excitations: u32,
    theta: f64,
    channel_kind: &str,
    p: f64,
) -> PyResult<f64> {
    let (kind, strength) = channel(channel_kind, p)?;
    let prm = params(atoms, excitations, theta, 0.0, 1)?;
    channels::evolved_concurrence(kind, strength, &prm).map_err(py_err)
}

/// Strength at which `quantity` (`squeezing` or `concurrence`) vanishes, or `None`.
#[pyfunction]
fn sudden_death(
    atoms: u32,
    excitations: u32,
    theta: f64,
    channel_kind: &str,
    quantity: &str,
) -> PyResult<Option<f64>> {
    let kind: ChannelKind = channel_kind.parse().map_err(py_err)?;
    let q: Quantity = quantity.parse().map_err(py_err)?;
    let prm = params(atoms, excitations, theta, 0.0, 1)?;
    channels::sudden_death(kind, &prm, q).map_err(py_err)
}

/// Retrieval efficiency at dimensionless decay `gamma_t`.
#[pyfunction]
fn retrieval_efficiency(atoms: u32, excitations: u32, theta: f64, gamma_t: f64) -> PyResult<f64> {
    protocol::retrieval_efficiency(atoms, excitations, theta, gamma_t).map_err(py_err)
}

/// Time traces of the storage protocol as a dict of lists.
#[pyfunction]
#[pyo3(signature = (atoms, excitations, channel_kind, gamma, tau, omega_m, a=None, grid=1500))]
#[allow(clippy::too_many_arguments)]
fn protocol_trace<'py>(
    py: Python<'py>,
    atoms: u32,
    excitations: u32,
    channel_kind: &str,
    gamma: f64,
    tau: f64,
    omega_m: f64,
    a: Option<f64>,
    grid: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let kind: ChannelKind = channel_kind.parse().map_err(py_err)?;
    let schedule = PulseSchedule::new(omega_m, tau, a.unwrap_or(tau / 5.0)).map_err(py_err)?;
    let decay = DecayRate::new(gamma).map_err(py_err)?;
    let prm = params(atoms, excitations, 0.0, 0.0, 1)?;
    let setup = ProtocolSetup::new(prm, schedule, kind, decay).map_err(py_err)?;
    let tr = protocol::protocol_trace(&setup, grid).map_err(py_err)?;
    let d = PyDict::new(py);
    d.set_item("t", tr.times)?;
    d.set_item("theta", tr.theta_t)?;
    d.set_item("p", tr.p_t)?;
    d.set_item("zeta3", tr.zeta3_t)?;
    d.set_item("concurrence", tr.conc_t)?;
    d.set_item("retrieval", tr.gamma_t)?;
    d.set_item("t1", tr.t1)?;
    d.set_item("t2", tr.t2)?;
    d.set_item("warnings", tr.warnings)?;
    Ok(d)
}

fn dataset<'py>(py: Python<'py>, ds: Dataset) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("metadata", ds.metadata)?;
    d.set_item("columns", ds.columns)?;
    d.set_item("labels", ds.row_labels)?;
    d.set_item("rows", ds.rows)?;
    Ok(d)
}

fn config(toml: Option<&str>) -> PyResult<RunConfig> {
    toml.map_or_else(|| Ok(RunConfig::default()), RunConfig::from_toml)
        .map_err(py_err)
}

/// Dataset behind a figure tag, with optional TOML overrides.
#[pyfunction]
#[pyo3(signature = (tag, config_toml=None))]
fn figure<'py>(
    py: Python<'py>,
    tag: &str,
    config_toml: Option<&str>,
) -> PyResult<Bound<'py, PyDict>> {
    let cfg = config(config_toml)?;
    dataset(py, dcli::figure::figure(tag, &cfg).map_err(py_err)?)
}

/// Closed-form versus oracle deviation table.
#[pyfunction]
#[pyo3(signature = (config_toml=None))]
fn oracle_check<'py>(py: Python<'py>, config_toml: Option<&str>) -> PyResult<Bound<'py, PyDict>> {
    let cfg = config(config_toml)?;
    dataset(py, dcli::oracle_check::oracle_check(&cfg).map_err(py_err)?)
}

#[pymodule]
#[pyo3(name = "darkspin")]
fn darkspin_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", darkspin::VERSION)?;
    m.add("DarkspinError", m.py().get_type::<DarkspinError>())?;
    m.add("CapacityError", m.py().get_type::<CapacityError>())?;
    m.add_function(wrap_pyfunction!(photon_weights, m)?)?;
    m.add_function(wrap_pyfunction!(normalization, m)?)?;
    m.add_function(wrap_pyfunction!(moments, m)?)?;
    m.add_function(wrap_pyfunction!(dark_squeezing, m)?)?;
    m.add_function(wrap_pyfunction!(rho12, m)?)?;
    m.add_function(wrap_pyfunction!(concurrence, m)?)?;
    m.add_function(wrap_pyfunction!(critical_k, m)?)?;
    m.add_function(wrap_pyfunction!(evolved_squeezing, m)?)?;
    m.add_function(wrap_pyfunction!(evolved_concurrence, m)?)?;
    m.add_function(wrap_pyfunction!(sudden_death, m)?)?;
    m.add_function(wrap_pyfunction!(retrieval_efficiency, m)?)?;
    m.add_function(wrap_pyfunction!(protocol_trace, m)?)?;
    m.add_function(wrap_pyfunction!(figure, m)?)?;
    m.add_function(wrap_pyfunction!(oracle_check, m)?)?;
    Ok(())
}
