use pyo3::exceptions::{PyArithmeticError, PyValueError};
use pyo3::prelude::*;

use dicke_stirap::certification::{self, CertificationRecord};
use dicke_stirap::dark;
use dicke_stirap::evolution::{self, AdiabaticPreset, ModelTag, RunOptions};
use dicke_stirap::measurement::{self, ShotConfig};
use dicke_stirap::model::{self, SystemParams};
use dicke_stirap::observables::{self, SpinState};
use dicke_stirap::repro;
use dicke_stirap::spin::{self, Axis};
use dicke_stirap::Error;

fn to_py(e: Error) -> PyErr {
    if e.is_numerical() {
        PyArithmeticError::new_err(e.to_string())
    } else {
        PyValueError::new_err(e.to_string())
    }
}

fn parse_axis(axis: &str) -> PyResult<Axis> {
    axis.parse().map_err(to_py)
}

#[pyclass(name = "DarkState", frozen)]
struct PyDarkState {
    #[pyo3(get)]
    n_ions: usize,
    #[pyo3(get)]
    coeffs: Vec<f64>,
    #[pyo3(get)]
    norm_constant: f64,
    /// Normalized amplitudes on |D^0>, |D^2>, .., |D^N>.
    #[pyo3(get)]
    amplitudes: Vec<f64>,
}

#[pymethods]
impl PyDarkState {
    #[new]
    fn new(n_ions: usize, omega_r: f64, omega_b: f64) -> PyResult<Self> {
        let s = dark::dark_coefficients(n_ions, omega_r, omega_b).map_err(to_py)?;
        Ok(Self {
            n_ions,
            coeffs: s.coeffs().to_vec(),
            norm_constant: s.norm_constant(),
            amplitudes: s.amplitudes().to_vec(),
        })
    }

    fn __repr__(&self) -> String {
        format!("DarkState(n_ions={}, amplitudes={:?})", self.n_ions, self.amplitudes)
    }
}

#[pyclass(name = "CertificationRecord", frozen)]
struct PyCertificationRecord {
    #[pyo3(get)]
    n_ions: usize,
    #[pyo3(get)]
    axis: String,
    #[pyo3(get)]
    witness: f64,
    #[pyo3(get)]
    populations: Vec<f64>,
    #[pyo3(get)]
    lower: f64,
    #[pyo3(get)]
    upper: f64,
    #[pyo3(get)]
    sigma_lower: f64,
    #[pyo3(get)]
    sigma_upper: f64,
}

impl PyCertificationRecord {
    fn from_record(r: CertificationRecord, sigma_lower: f64, sigma_upper: f64) -> Self {
        Self {
            n_ions: r.n_ions,
            axis: r.axis.label().to_string(),
            witness: r.witness,
            populations: r.populations,
            lower: r.lower,
            upper: r.upper,
            sigma_lower,
            sigma_upper,
        }
    }
}

#[pymethods]
impl PyCertificationRecord {
    /// True when the lower bound exceeds the GHZ overlap 3/4.
    fn excludes_ghz(&self) -> bool {
        self.lower > observables::GHZ_DICKE_MAX_OVERLAP
    }

    fn __repr__(&self) -> String {
        format!(
            "CertificationRecord(n_ions={}, witness={}, lower={}, upper={})",
            self.n_ions, self.witness, self.lower, self.upper
        )
    }
}

/// <D^{m+1}| J_+ |D^m>.
#[pyfunction]
fn coupling_r(n_ions: usize, m: usize) -> PyResult<f64> {
    spin::coupling_r(n_ions, m).map_err(to_py)
}

/// Ladder Hamiltonian as nested lists, `coupling_scale` 1 for the printed matrix.
#[pyfunction]
#[pyo3(signature = (n_ions, omega_r, omega_b, delta, eta=1.0, coupling_scale=1.0))]
fn reduced_hamiltonian(
    n_ions: usize,
    omega_r: f64,
    omega_b: f64,
    delta: f64,
    eta: f64,
    coupling_scale: f64,
) -> PyResult<Vec<Vec<f64>>> {
    let params = SystemParams::new(n_ions)
        .with_amplitudes(omega_r, omega_b)
        .with_delta(delta)
        .with_eta(eta);
    let h = model::reduced_hamiltonian_scaled(&params, coupling_scale).map_err(to_py)?;
    let m = h.matrix();
    Ok((0..m.nrows()).map(|r| m.row(r).iter().copied().collect()).collect())
}

/// Runs a preset schedule and returns sample times with <J_z> and the
/// instantaneous dark-state fidelity.
#[pyfunction]
#[pyo3(signature = (n_ions, preset="strict", model="reduced", samples=201))]
fn evolve(
    n_ions: usize,
    preset: &str,
    model: &str,
    samples: usize,
) -> PyResult<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let preset: AdiabaticPreset = preset.parse().map_err(to_py)?;
    let tag: ModelTag = model.parse().map_err(to_py)?;
    if samples < 2 {
        return Err(PyValueError::new_err("samples must be at least 2"));
    }
    let (schedule, params) = preset.build(n_ions).map_err(to_py)?;
    let options = RunOptions {
        times: Some(
            (0..samples)
                .map(|k| schedule.total_time * k as f64 / (samples - 1) as f64)
                .collect(),
        ),
        ..RunOptions::default()
    };
    let traj = match tag {
        ModelTag::Reduced => {
            evolution::integrate_reduced_with(&schedule, &params, evolution::default_reduced_dt(&schedule, &params), &options)
        }
        ModelTag::Full => {
            evolution::integrate_full_with(&schedule, &params, evolution::default_full_dt(&schedule, &params), &options)
        }
    }
    .map_err(to_py)?;
    let mut jz = Vec::with_capacity(traj.len());
    let mut dark_fid = Vec::with_capacity(traj.len());
    for i in 0..traj.len() {
        let m = observables::spin_moments(&traj.spin_state(i).map_err(to_py)?).map_err(to_py)?;
        jz.push(m.mean_jz);
        dark_fid.push(traj.dark_fidelity(i, &schedule).unwrap_or(f64::NAN));
    }
    Ok((traj.times.clone(), jz, dark_fid))
}

fn symmetric_state(amplitudes: Vec<f64>) -> PyResult<SpinState> {
    let v = nalgebra::DVector::from_iterator(
        amplitudes.len(),
        amplitudes.into_iter().map(|a| num_complex::Complex64::new(a, 0.0)),
    );
    SpinState::symmetric(v).map_err(to_py)
}

/// (mean_jx, mean_jy, mean_jz, var_jx, var_jy, var_jz) of a real symmetric-basis state.
#[pyfunction]
fn spin_moments(amplitudes: Vec<f64>) -> PyResult<(f64, f64, f64, f64, f64, f64)> {
    let m = observables::spin_moments(&symmetric_state(amplitudes)?).map_err(to_py)?;
    Ok((m.mean_jx, m.mean_jy, m.mean_jz, m.var_jx, m.var_jy, m.var_jz))
}

/// Certification of a real symmetric-basis state against the Dicke state along `axis`.
#[pyfunction]
#[pyo3(signature = (amplitudes, axis="x"))]
fn certify(amplitudes: Vec<f64>, axis: &str) -> PyResult<PyCertificationRecord> {
    let r = certification::certify_from_state(&symmetric_state(amplitudes)?, parse_axis(axis)?).map_err(to_py)?;
    Ok(PyCertificationRecord::from_record(r, 0.0, 0.0))
}

/// (lower, upper) bounds from a witness value and populations ordered -j_M..j_M.
#[pyfunction]
fn fidelity_bounds(witness: f64, populations: Vec<f64>) -> PyResult<(f64, f64)> {
    let r = CertificationRecord::from_measurements(Axis::X, witness, populations).map_err(to_py)?;
    Ok((r.lower, r.upper))
}

/// (sigma_lower, sigma_upper) from independent standard errors.
#[pyfunction]
fn propagate_uncertainty(sigma_witness: f64, sigma_populations: Vec<f64>) -> PyResult<(f64, f64)> {
    let e = certification::propagate_uncertainty(sigma_witness, &sigma_populations).map_err(to_py)?;
    Ok((e.lower, e.upper))
}

#[pyfunction]
fn parity_fidelity(p_minus: f64, p_plus: f64, amplitude: f64) -> f64 {
    observables::parity_fidelity(p_minus, p_plus, amplitude)
}

/// Four-ion pipeline on the strict-schedule midpoint state; exact when `shots` is None.
#[pyfunction]
#[pyo3(signature = (shots=None, seed=0))]
fn simulated_experiment(shots: Option<u64>, seed: u64) -> PyResult<PyCertificationRecord> {
    let state = repro::strict_midpoint_state(4).map_err(to_py)?;
    let config = shots.map(|n| ShotConfig::new(n, seed)).transpose().map_err(to_py)?;
    let e = measurement::simulated_experiment(&state, config).map_err(to_py)?;
    Ok(PyCertificationRecord::from_record(e.record, e.errors.lower, e.errors.upper))
}

/// (passed, detail) for acceptance criterion `id`.
#[pyfunction]
fn run_criterion(id: usize) -> (bool, String) {
    let r = repro::run_criterion(id);
    (r.passed, r.detail)
}

#[pymodule]
fn dicke_stirap_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDarkState>()?;
    m.add_class::<PyCertificationRecord>()?;
    m.add_function(wrap_pyfunction!(coupling_r, m)?)?;
    m.add_function(wrap_pyfunction!(reduced_hamiltonian, m)?)?;
    m.add_function(wrap_pyfunction!(evolve, m)?)?;
    m.add_function(wrap_pyfunction!(spin_moments, m)?)?;
    m.add_function(wrap_pyfunction!(certify, m)?)?;
    m.add_function(wrap_pyfunction!(fidelity_bounds, m)?)?;
    m.add_function(wrap_pyfunction!(propagate_uncertainty, m)?)?;
    m.add_function(wrap_pyfunction!(parity_fidelity, m)?)?;
    m.add_function(wrap_pyfunction!(simulated_experiment, m)?)?;
    m.add_function(wrap_pyfunction!(run_criterion, m)?)?;
    m.add("WITNESS_THRESHOLD", observables::FOUR_PARTITE_WITNESS_THRESHOLD)?;
    Ok(())
}
