//! Schrödinger-equation integration of the reduced ladder and the full
//! spin-phonon model under a STIRAP pulse schedule.
//!
//! The schedule is parameterized by a mixing angle `theta(t)` rising from 0
//! to pi, with sideband couplings `eta Omega_b = Omega_bar (1 - cos theta)`
//! and `eta Omega_r = Omega_bar (1 + cos theta)`. The system starts in
//! `|D^0>|0>`, dark under the pure red sideband, and follows the dark state to
//! `|D^N>|0>`. Amplitudes stored in [`SystemParams`] are ignored during a
//! scheduled run.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::dark::dark_coefficients;
use crate::error::{Error, Result};
use crate::model::{embed_ladder_state, full_index, FullHamiltonian, ReducedHamiltonian, SystemParams};
use crate::observables::{Space, SpinState};

/// Below this adiabaticity figure a schedule is flagged as non-adiabatic.
pub const MIN_ADIABATICITY: f64 = 5.0;
/// Largest accepted norm drift before a run is declared failed.
pub const MAX_NORM_DRIFT: f64 = 1e-6;
/// Phonon population in the top Fock level that triggers a truncation warning.
pub const LEAKAGE_WARNING: f64 = 1e-3;
/// Number of samples kept by the default trajectory grid.
pub const DEFAULT_SAMPLES: usize = 201;

pub type RampFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Mixing angle as a function of normalized time `s = t / T`.
#[derive(Clone)]
pub enum Ramp {
    /// `theta = pi s`.
    Linear,
    /// `theta = pi (3 s^2 - 2 s^3)`, flat at both ends.
    Smoothstep,
    Custom(RampFn),
}

impl Ramp {
    pub fn theta(&self, s: f64) -> f64 {
        match self {
            Ramp::Linear => std::f64::consts::PI * s,
            Ramp::Smoothstep => std::f64::consts::PI * s * s * (3.0 - 2.0 * s),
            Ramp::Custom(f) => f(s),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Ramp::Linear => "linear",
            Ramp::Smoothstep => "smoothstep",
            Ramp::Custom(_) => "custom",
        }
    }
}

impl fmt::Debug for Ramp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl std::str::FromStr for Ramp {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(Ramp::Linear),
            "smoothstep" => Ok(Ramp::Smoothstep),
            other => Err(Error::Parse(format!("unknown ramp '{other}' (linear|smoothstep)"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct PulseSchedule {
    pub total_time: f64,
    pub ramp: Ramp,
    /// Coupling scale `eta Omega_bar`.
    pub omega_bar: f64,
    /// Stop the pulse early at this time.
    pub truncation_time: Option<f64>,
    /// Run the ramp backwards, `theta -> pi - theta`.
    pub reversed: bool,
}

impl PulseSchedule {
    pub fn new(total_time: f64, omega_bar: f64, ramp: Ramp) -> Result<Self> {
        if !(total_time.is_finite() && total_time > 0.0) {
            return Err(Error::Config(format!("pulse length must be positive, got {total_time}")));
        }
        if !(omega_bar.is_finite() && omega_bar >= 0.0) {
            return Err(Error::Config(format!("coupling scale must be nonnegative, got {omega_bar}")));
        }
        Ok(Self {
            total_time,
            ramp,
            omega_bar,
            truncation_time: None,
            reversed: false,
        })
    }

    pub fn linear(total_time: f64, omega_bar: f64) -> Result<Self> {
        Self::new(total_time, omega_bar, Ramp::Linear)
    }

    pub fn with_truncation(mut self, tau: f64) -> Result<Self> {
        if !(0.0..=self.total_time).contains(&tau) {
            return Err(Error::Config(format!(
                "truncation time {tau} outside [0, {}]",
                self.total_time
            )));
        }
        self.truncation_time = Some(tau);
        Ok(self)
    }

    pub fn reversed(mut self) -> Self {
        self.reversed = !self.reversed;
        self
    }

    pub fn end_time(&self) -> f64 {
        self.truncation_time.unwrap_or(self.total_time)
    }

    pub fn theta(&self, t: f64) -> f64 {
        let s = (t / self.total_time).clamp(0.0, 1.0);
        let theta = self.ramp.theta(s);
        if self.reversed {
            std::f64::consts::PI - theta
        } else {
            theta
        }
    }

    /// `(eta Omega_r, eta Omega_b)` at time `t`.
    pub fn couplings(&self, t: f64) -> (f64, f64) {
        let c = self.theta(t).cos();
        (self.omega_bar * (1.0 + c), self.omega_bar * (1.0 - c))
    }

    /// Dimensionless adiabaticity `eta Omega_bar T`, with the coupling quoted
    /// as a cycle frequency (`eta Omega_bar / 2 pi`), the convention under which
    /// 14 kHz x 340 us gives about 5.
    pub fn adiabaticity(&self) -> f64 {
        self.omega_bar * self.total_time / (2.0 * std::f64::consts::PI)
    }
}

/// Named parameter sets for scheduled runs.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum AdiabaticPreset {
    /// `eta Omega_bar = 2 pi`, `T = 40`, `delta = 20 eta Omega_bar`: adiabaticity 40.
    Strict,
    /// Laboratory scale in ms: `eta Omega = 2 pi x 14 kHz`, `T = 0.34 ms`,
    /// `delta = 20 eta Omega`.
    Experimental,
}

impl std::str::FromStr for AdiabaticPreset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "strict" => Ok(AdiabaticPreset::Strict),
            "experimental" => Ok(AdiabaticPreset::Experimental),
            other => Err(Error::Parse(format!("unknown preset '{other}' (strict|experimental)"))),
        }
    }
}

impl AdiabaticPreset {
    pub fn build(self, n_ions: usize) -> Result<(PulseSchedule, SystemParams)> {
        let (omega_bar, total_time) = match self {
            AdiabaticPreset::Strict => (2.0 * std::f64::consts::PI, 40.0),
            AdiabaticPreset::Experimental => (2.0 * std::f64::consts::PI * 14.0, 0.34),
        };
        let schedule = PulseSchedule::linear(total_time, omega_bar)?;
        let params = SystemParams::new(n_ions).with_delta(20.0 * omega_bar);
        Ok((schedule, params))
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum ModelTag {
    Reduced,
    Full,
}

impl ModelTag {
    pub fn label(self) -> &'static str {
        match self {
            ModelTag::Reduced => "reduced",
            ModelTag::Full => "full",
        }
    }
}

impl std::str::FromStr for ModelTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "reduced" => Ok(ModelTag::Reduced),
            "full" => Ok(ModelTag::Full),
            other => Err(Error::Parse(format!("unknown model '{other}' (reduced|full)"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Warning {
    /// `eta Omega_bar T` below [`MIN_ADIABATICITY`].
    LowAdiabaticity(f64),
    /// Peak coupling too close to the detuning for the reduced ladder.
    ReducedModelInvalid,
    /// Largest population found in the top Fock level.
    PhononLeakage(f64),
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Warning::LowAdiabaticity(a) => write!(f, "adiabaticity eta*Omega*T = {a:.3} below {MIN_ADIABATICITY}"),
            Warning::ReducedModelInvalid => write!(f, "2*delta does not exceed 10x the peak coupling"),
            Warning::PhononLeakage(p) => write!(f, "population {p:.2e} in the top phonon level"),
        }
    }
}

/// Sampled states of one integration.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub model: ModelTag,
    pub n_ions: usize,
    /// Phonon cut-off of the full model.
    pub n_max: Option<usize>,
    pub delta: f64,
    pub times: Vec<f64>,
    pub states: Vec<DVector<C64>>,
    pub warnings: Vec<Warning>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_state(&self) -> &DVector<C64> {
        self.states.last().expect("trajectory has at least one sample")
    }

    /// Spin density matrix with the phonon traced out, on the Dicke basis.
    pub fn spin_density(&self, i: usize) -> DMatrix<C64> {
        let psi = &self.states[i];
        let d = self.n_ions + 1;
        match self.model {
            ModelTag::Reduced => ladder_spin_density(psi),
            ModelTag::Full => {
                let stride = self.n_max.unwrap_or(0) + 1;
                DMatrix::from_fn(d, d, |r, c| {
                    (0..stride).map(|n| psi[r * stride + n] * psi[c * stride + n].conj()).sum()
                })
            }
        }
    }

    pub fn spin_state(&self, i: usize) -> Result<SpinState> {
        let rho = self.spin_density(i);
        let tr = rho.trace().re;
        SpinState::mixed(Space::Symmetric(self.n_ions), rho / C64::new(tr, 0.0))
    }

    /// `|<v|psi(t_i)>|^2` for a ladder-basis vector `v`, embedded into the full
    /// model's frame when needed.
    pub fn ladder_fidelity(&self, i: usize, v: &DVector<C64>) -> Result<f64> {
        let psi = &self.states[i];
        let target = match self.model {
            ModelTag::Reduced => v.clone(),
            ModelTag::Full => embed_ladder_state(v, self.times[i], self.delta, self.n_max.unwrap_or(1))?,
        };
        if target.len() != psi.len() {
            return Err(Error::DimensionMismatch {
                expected: psi.len(),
                got: target.len(),
            });
        }
        Ok(target.dotc(psi).norm_sqr())
    }

    /// Fidelity with the instantaneous dark state of `schedule` at sample `i`.
    pub fn dark_fidelity(&self, i: usize, schedule: &PulseSchedule) -> Result<f64> {
        let (g_r, g_b) = schedule.couplings(self.times[i]);
        let dark = dark_coefficients(self.n_ions, g_r, g_b)?;
        self.ladder_fidelity(i, &dark.spin_vector())
    }

    /// Index of the sample closest to `t`.
    pub fn nearest(&self, t: f64) -> usize {
        self.times
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - t).abs().total_cmp(&(b.1 - t).abs()))
            .map(|(i, _)| i)
            .unwrap_or(0)
    }
}

/// Spin density of a ladder state. Rung `k` holds `|D^k>` with phonon number
/// `k mod 2`, so tracing out the phonon removes coherences between rungs of
/// opposite parity.
pub fn ladder_spin_density(psi: &DVector<C64>) -> DMatrix<C64> {
    let d = psi.len();
    DMatrix::from_fn(d, d, |r, c| {
        if r % 2 == c % 2 {
            psi[r] * psi[c].conj()
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

/// Normalized spin marginal of a ladder state.
pub fn ladder_spin_state(psi: &DVector<C64>) -> Result<SpinState> {
    let rho = ladder_spin_density(psi);
    let tr = rho.trace().re;
    SpinState::mixed(Space::Symmetric(psi.len().saturating_sub(1)), rho / C64::new(tr, 0.0))
}

/// Integration settings beyond the step size.
#[derive(Clone, Debug)]
pub struct RunOptions {
    /// Sample times; `None` uses [`DEFAULT_SAMPLES`] points over the pulse.
    pub times: Option<Vec<f64>>,
    /// Global factor on the ladder couplings (reduced model only).
    pub coupling_scale: f64,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            times: None,
            coupling_scale: 1.0,
        }
    }
}

/// Step that keeps `dt (delta + N Omega_bar)` at 0.02.
pub fn default_reduced_dt(schedule: &PulseSchedule, params: &SystemParams) -> f64 {
    let rate = params.delta + params.n_ions as f64 * schedule.omega_bar;
    if rate > 0.0 {
        (0.02 / rate).min(schedule.total_time / 100.0)
    } else {
        schedule.total_time / 100.0
    }
}

/// Step that resolves the `exp(i delta t)` phases with `dt delta = 0.01`.
pub fn default_full_dt(schedule: &PulseSchedule, params: &SystemParams) -> f64 {
    let mut dt = schedule.total_time / 100.0;
    if params.delta > 0.0 {
        dt = dt.min(0.01 / params.delta);
    }
    let coupling = params.n_ions as f64 * schedule.omega_bar;
    if coupling > 0.0 {
        dt = dt.min(0.02 / coupling);
    }
    dt
}

fn sample_grid(schedule: &PulseSchedule, options: &RunOptions) -> Result<Vec<f64>> {
    let end = schedule.end_time();
    let times = match &options.times {
        Some(t) => t.clone(),
        None => (0..DEFAULT_SAMPLES)
            .map(|k| end * k as f64 / (DEFAULT_SAMPLES - 1) as f64)
            .collect(),
    };
    if times.is_empty() {
        return Err(Error::Config("no sample times requested".into()));
    }
    if times.iter().any(|t| !(0.0..=end).contains(t)) {
        return Err(Error::Config(format!("sample times must lie in [0, {end}]")));
    }
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Config("sample times must be ascending".into()));
    }
    Ok(times)
}

/// Fixed-step RK4 for `d psi/dt = -i H(t) psi`, recording the state at each
/// requested time. Steps within a segment are shortened so every sample time
/// is hit exactly.
fn rk4_sampled<F>(apply: F, mut psi: DVector<C64>, times: &[f64], dt: f64) -> Result<Vec<DVector<C64>>>
where
    F: Fn(f64, &DVector<C64>) -> DVector<C64>,
{
    let minus_i = C64::new(0.0, -1.0);
    let rhs = |t: f64, v: &DVector<C64>| apply(t, v) * minus_i;
    let mut t = 0.0;
    let mut out = Vec::with_capacity(times.len());
    for &target in times {
        let span = target - t;
        if span > 0.0 {
            let steps = (span / dt - 1e-9).ceil().max(1.0) as usize;
            let h = span / steps as f64;
            for _ in 0..steps {
                let k1 = rhs(t, &psi);
                let k2 = rhs(t + h / 2.0, &(&psi + &k1 * C64::new(h / 2.0, 0.0)));
                let k3 = rhs(t + h / 2.0, &(&psi + &k2 * C64::new(h / 2.0, 0.0)));
                let k4 = rhs(t + h, &(&psi + &k3 * C64::new(h, 0.0)));
                psi += (k1 + k2 * C64::new(2.0, 0.0) + k3 * C64::new(2.0, 0.0) + k4) * C64::new(h / 6.0, 0.0);
                t += h;
            }
            t = target;
        }
        let drift = (psi.norm() - 1.0).abs();
        if drift > MAX_NORM_DRIFT {
            return Err(Error::Integration(format!(
                "norm drift {drift:.2e} at t = {target} exceeds {MAX_NORM_DRIFT:.0e}; reduce the step"
            )));
        }
        out.push(psi.clone());
    }
    Ok(out)
}

fn schedule_warnings(schedule: &PulseSchedule, params: &SystemParams) -> Vec<Warning> {
    let mut warnings = Vec::new();
    if schedule.adiabaticity() < MIN_ADIABATICITY {
        warnings.push(Warning::LowAdiabaticity(schedule.adiabaticity()));
    }
    if 2.0 * params.delta <= 10.0 * 2.0 * schedule.omega_bar {
        warnings.push(Warning::ReducedModelInvalid);
    }
    warnings
}

/// Dicke level of the initial dark state: `|D^0>`, or `|D^N>` when reversed.
fn initial_excitation(schedule: &PulseSchedule, n_ions: usize) -> usize {
    if schedule.reversed {
        n_ions
    } else {
        0
    }
}

pub fn integrate_reduced(schedule: &PulseSchedule, params: &SystemParams, dt: f64) -> Result<Trajectory> {
    integrate_reduced_with(schedule, params, dt, &RunOptions::default())
}

pub fn integrate_reduced_with(
    schedule: &PulseSchedule,
    params: &SystemParams,
    dt: f64,
    options: &RunOptions,
) -> Result<Trajectory> {
    params.validate()?;
    let n = params.n_ions;
    let resolution = dt * (params.delta + n as f64 * schedule.omega_bar);
    if !(dt > 0.0) || resolution > 0.1 {
        return Err(Error::Config(format!(
            "step {dt} too coarse: dt*(delta + N*Omega_bar) = {resolution:.3} exceeds 0.1"
        )));
    }
    let times = sample_grid(schedule, options)?;
    let scale = options.coupling_scale;
    let delta = params.delta;
    let apply = |t: f64, psi: &DVector<C64>| {
        let (g_r, g_b) = schedule.couplings(t);
        ReducedHamiltonian::from_couplings(n, g_r, g_b, delta, scale)
            .and_then(|h| h.apply(psi))
            .expect("ladder dimensions are fixed by the initial state")
    };
    let mut psi0 = DVector::zeros(n + 1);
    psi0[initial_excitation(schedule, n)] = C64::new(1.0, 0.0);
    let states = rk4_sampled(apply, psi0, &times, dt)?;
    Ok(Trajectory {
        model: ModelTag::Reduced,
        n_ions: n,
        n_max: None,
        delta,
        times,
        states,
        warnings: schedule_warnings(schedule, params),
    })
}

pub fn integrate_full(schedule: &PulseSchedule, params: &SystemParams, dt: f64) -> Result<Trajectory> {
    integrate_full_with(schedule, params, dt, &RunOptions::default())
}

pub fn integrate_full_with(
    schedule: &PulseSchedule,
    params: &SystemParams,
    dt: f64,
    options: &RunOptions,
) -> Result<Trajectory> {
    let h = FullHamiltonian::new(*params)?;
    if !(dt > 0.0) || dt * params.delta > 0.05 {
        return Err(Error::Config(format!(
            "step {dt} does not resolve the detuning: dt*delta = {:.3} exceeds 0.05",
            dt * params.delta
        )));
    }
    if dt * params.n_ions as f64 * schedule.omega_bar > 0.1 {
        return Err(Error::Config(format!("step {dt} too coarse for the coupling scale")));
    }
    let times = sample_grid(schedule, options)?;
    let apply = |t: f64, psi: &DVector<C64>| {
        let (g_r, g_b) = schedule.couplings(t);
        h.apply_with(t, g_r, g_b, psi)
    };
    let mut psi0 = DVector::zeros(h.dim());
    psi0[full_index(initial_excitation(schedule, params.n_ions), 0, params.n_max)] = C64::new(1.0, 0.0);
    let states = rk4_sampled(apply, psi0, &times, dt)?;

    let mut warnings: Vec<Warning> = schedule_warnings(schedule, params)
        .into_iter()
        .filter(|w| matches!(w, Warning::LowAdiabaticity(_)))
        .collect();
    let stride = params.n_max + 1;
    let top = states
        .iter()
        .map(|psi| (0..=params.n_ions).map(|m| psi[m * stride + params.n_max].norm_sqr()).sum::<f64>())
        .fold(0.0, f64::max);
    if top > LEAKAGE_WARNING {
        warnings.push(Warning::PhononLeakage(top));
    }
    Ok(Trajectory {
        model: ModelTag::Full,
        n_ions: params.n_ions,
        n_max: Some(params.n_max),
        delta: params.delta,
        times,
        states,
        warnings,
    })
}

/// States at each cut time from a single reduced-model pass, in input order.
pub fn truncated_scan(
    schedule: &PulseSchedule,
    params: &SystemParams,
    cut_times: &[f64],
) -> Result<Vec<(f64, DVector<C64>)>> {
    let mut order: Vec<usize> = (0..cut_times.len()).collect();
    order.sort_by(|a, b| cut_times[*a].total_cmp(&cut_times[*b]));
    let sorted: Vec<f64> = order.iter().map(|i| cut_times[*i]).collect();
    if sorted.iter().any(|t| !(0.0..=schedule.total_time).contains(t)) {
        return Err(Error::Config(format!("cut times must lie in [0, {}]", schedule.total_time)));
    }
    let mut full_schedule = schedule.clone();
    full_schedule.truncation_time = None;
    let options = RunOptions {
        times: Some(sorted),
        ..RunOptions::default()
    };
    let dt = default_reduced_dt(&full_schedule, params);
    let traj = integrate_reduced_with(&full_schedule, params, dt, &options)?;
    let mut out = vec![(0.0, DVector::zeros(0)); cut_times.len()];
    for (slot, i) in order.into_iter().enumerate() {
        out[i] = (traj.times[slot], traj.states[slot].clone());
    }
    Ok(out)
}
