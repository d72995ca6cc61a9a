use std::fmt;
use std::fs;
use std::io;

use rayon::prelude::*;

use dicke_stirap::certification::{certify_from_state, target_fidelity, BoundsInput};
use dicke_stirap::dark::{dark_coefficients, verify_dark};
use dicke_stirap::evolution::{
    default_full_dt, default_reduced_dt, integrate_full_with, integrate_reduced_with, ladder_spin_state,
    truncated_scan, AdiabaticPreset, PulseSchedule, Ramp, RunOptions, Trajectory, Warning,
};
use dicke_stirap::measurement::{
    azimuth_grid, sample_parities, sample_populations, simulated_experiment, ShotConfig, GENERATOR,
};
use dicke_stirap::model::{reduced_hamiltonian, SystemParams};
use dicke_stirap::observables::{
    certifies_four_partite, fit_parity, jphi_scan, parity_fidelity, parity_scan, phase_grid, spin_moments, witness,
    SpinState, FOUR_PARTITE_WITNESS_THRESHOLD,
};
use dicke_stirap::repro;
use dicke_stirap::spin::{dicke_state_along, Axis};
use dicke_stirap::Error;

use crate::output::{num, Report};
use crate::{
    AxisArg, BoundsArgs, Command, DarkArgs, EvolveArgs, ModelArg, ParityArgs, Preset, RampArg, ReproArgs, ScanArgs,
    ScheduleArgs, StateArg, SweepArgs, WitnessArgs,
};

#[derive(Debug)]
pub enum CliError {
    Core(Error),
    Io(io::Error),
}

impl CliError {
    /// 1 usage or I/O, 2 physics precondition, 3 numerical failure.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if e.is_numerical() => 3,
            CliError::Core(Error::Parse(_)) | CliError::Io(_) => 1,
            CliError::Core(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

type Outcome = Result<u8, CliError>;

pub fn run(command: Command) -> Outcome {
    match command {
        Command::Darkstate(a) => darkstate(a),
        Command::Evolve(a) => evolve(a),
        Command::ScanNoise(a) => scan_noise(a),
        Command::Parity(a) => parity(a),
        Command::Witness(a) => witness_cmd(a),
        Command::Bounds(a) => bounds(a),
        Command::Sweep(a) => sweep(a),
        Command::Repro(a) => repro_cmd(a),
    }
}

fn axis(a: AxisArg) -> Axis {
    match a {
        AxisArg::X => Axis::X,
        AxisArg::Y => Axis::Y,
        AxisArg::Z => Axis::Z,
    }
}

fn ramp(r: RampArg) -> Ramp {
    match r {
        RampArg::Linear => Ramp::Linear,
        RampArg::Smoothstep => Ramp::Smoothstep,
    }
}

fn resolve_schedule(n: usize, s: &ScheduleArgs, report: &mut Report) -> Result<(PulseSchedule, SystemParams), CliError> {
    let preset = match s.preset {
        Preset::Strict => AdiabaticPreset::Strict,
        Preset::Experimental => AdiabaticPreset::Experimental,
    };
    let (base, base_params) = preset.build(n.max(1))?;
    let omega_bar = s.omega_bar.unwrap_or(base.omega_bar);
    let t_total = s.t_total.unwrap_or(base.total_time);
    let ratio = s.delta_ratio.unwrap_or(base_params.delta / base.omega_bar);
    let schedule = PulseSchedule::new(t_total, omega_bar, ramp(s.ramp))?;
    let mut params = SystemParams::new(n).with_delta(ratio * omega_bar);
    if let Some(m) = s.n_max {
        params = params.with_n_max(m);
    }
    params.validate()?;
    report
        .config("n", n)
        .config("adiabatic_preset", format!("{:?}", s.preset).to_lowercase())
        .config("t_total", num(t_total))
        .config("omega_bar", num(omega_bar))
        .config("delta_ratio", num(ratio))
        .config("ramp", schedule.ramp.label())
        .config("n_max", params.n_max);
    Ok((schedule, params))
}

fn midpoint_state(schedule: &PulseSchedule, params: &SystemParams) -> Result<SpinState, CliError> {
    let options = RunOptions {
        times: Some(vec![0.0, schedule.total_time / 2.0]),
        ..RunOptions::default()
    };
    let traj = integrate_reduced_with(schedule, params, default_reduced_dt(schedule, params), &options)?;
    Ok(traj.spin_state(1)?)
}

fn report_warnings(warnings: &[Warning]) -> u8 {
    let mut code = 0;
    for w in warnings {
        eprintln!("warning: {w}");
        if matches!(w, Warning::PhononLeakage(_)) {
            code = 3;
        }
    }
    code
}

fn darkstate(a: DarkArgs) -> Outcome {
    let theta = if a.omega_r.is_none() { Some(a.theta.unwrap_or(std::f64::consts::FRAC_PI_2)) } else { None };
    let (r, b) = match theta {
        Some(t) => (1.0 + t.cos(), 1.0 - t.cos()),
        None => (a.omega_r.unwrap_or(1.0), a.omega_b.unwrap_or(1.0)),
    };
    // cos(pi) rounding can leave a tiny negative amplitude
    let (r, b) = (if r.abs() < 1e-15 { 0.0 } else { r }, if b.abs() < 1e-15 { 0.0 } else { b });
    let mut report = Report::new("darkstate", &["excitation", "coefficient", "amplitude"]);
    report.config("n", a.n);
    if let Some(t) = theta {
        report.config("theta", num(t));
    }
    report.config("omega_r", num(r)).config("omega_b", num(b));
    let state = dark_coefficients(a.n, r, b)?;
    for (i, (c, amp)) in state.coeffs().iter().zip(state.amplitudes()).enumerate() {
        report.row(&[(2 * i).to_string(), num(*c), num(*amp)]);
    }
    let h = reduced_hamiltonian(&SystemParams::new(a.n).with_amplitudes(r, b))?;
    let m = spin_moments(&SpinState::symmetric(state.spin_vector())?)?;
    report
        .summary("norm_constant", num(state.norm_constant()))
        .summary("residual", num(verify_dark(&state, &h)?))
        .summary("mean_jz", num(m.mean_jz))
        .summary("var_jx", num(m.var_jx))
        .summary("var_jy", num(m.var_jy))
        .summary("var_jz", num(m.var_jz));
    report.emit(a.out.output.as_deref(), a.out.summary.as_deref())?;
    Ok(0)
}

fn sample_times(end: f64, samples: usize) -> Result<Vec<f64>, CliError> {
    if samples < 2 {
        return Err(Error::Config(format!("need at least 2 samples, got {samples}")).into());
    }
    Ok((0..samples).map(|k| end * k as f64 / (samples - 1) as f64).collect())
}

fn run_model(
    model: ModelArg,
    schedule: &PulseSchedule,
    params: &SystemParams,
    dt: Option<f64>,
    options: &RunOptions,
) -> Result<Trajectory, CliError> {
    Ok(match model {
        ModelArg::Reduced => {
            let dt = dt.unwrap_or_else(|| default_reduced_dt(schedule, params));
            integrate_reduced_with(schedule, params, dt, options)?
        }
        ModelArg::Full => {
            let dt = dt.unwrap_or_else(|| default_full_dt(schedule, params));
            integrate_full_with(schedule, params, dt, options)?
        }
    })
}

fn evolve(a: EvolveArgs) -> Outcome {
    let mut report = Report::new(
        "evolve",
        &["t", "theta", "g_r", "g_b", "mean_jz", "var_jx", "var_jy", "var_jz", "dark_fidelity"],
    );
    let (mut schedule, params) = resolve_schedule(a.n, &a.schedule, &mut report)?;
    if let Some(tau) = a.truncate {
        schedule = schedule.with_truncation(tau)?;
    }
    if a.reverse {
        schedule = schedule.reversed();
    }
    let options = RunOptions {
        times: Some(sample_times(schedule.end_time(), a.samples)?),
        coupling_scale: a.coupling_scale,
    };
    report
        .config("model", format!("{:?}", a.model).to_lowercase())
        .config("dt", a.dt.map_or("default".into(), num))
        .config("samples", a.samples)
        .config("truncate", a.truncate.map_or("none".into(), num))
        .config("reverse", a.reverse)
        .config("coupling_scale", num(a.coupling_scale));
    let traj = run_model(a.model, &schedule, &params, a.dt, &options)?;

    let mut mid_fidelity = f64::NAN;
    let mid = traj.nearest(schedule.total_time / 2.0);
    for i in 0..traj.len() {
        let t = traj.times[i];
        let (g_r, g_b) = schedule.couplings(t);
        let m = spin_moments(&traj.spin_state(i)?)?;
        let dark = traj.dark_fidelity(i, &schedule).unwrap_or(f64::NAN);
        if i == mid {
            mid_fidelity = dark;
        }
        report.row(&[
            num(t),
            num(schedule.theta(t)),
            num(g_r),
            num(g_b),
            num(m.mean_jz),
            num(m.var_jx),
            num(m.var_jy),
            num(m.var_jz),
            num(dark),
        ]);
    }
    let last = spin_moments(&traj.spin_state(traj.len() - 1)?)?;
    let warnings: Vec<String> = traj.warnings.iter().map(|w| w.to_string()).collect();
    report
        .summary("adiabaticity", num(schedule.adiabaticity()))
        .summary("final_mean_jz", num(last.mean_jz))
        .summary("midpoint_dark_fidelity", num(mid_fidelity))
        .summary("warnings", if warnings.is_empty() { "none".into() } else { warnings.join("; ") });
    report.emit(a.out.output.as_deref(), a.out.summary.as_deref())?;
    Ok(report_warnings(&traj.warnings))
}

fn scan_noise(a: ScanArgs) -> Outcome {
    let mut report = Report::new("scan-noise", &["tau_c", "mean_jz", "var_jx", "var_jy", "var_jz"]);
    let (schedule, params) = resolve_schedule(a.n, &a.schedule, &mut report)?;
    report.config("cuts", a.cuts);
    let cuts = sample_times(schedule.total_time, a.cuts)?;
    let mut min_var_jx = (f64::INFINITY, 0.0);
    for (tau, psi) in truncated_scan(&schedule, &params, &cuts)? {
        let m = spin_moments(&ladder_spin_state(&psi)?)?;
        if m.var_jx < min_var_jx.0 {
            min_var_jx = (m.var_jx, tau);
        }
        report.row(&[num(tau), num(m.mean_jz), num(m.var_jx), num(m.var_jy), num(m.var_jz)]);
    }
    report
        .summary("min_var_jx", num(min_var_jx.0))
        .summary("min_var_jx_at", num(min_var_jx.1));
    report.emit(a.out.output.as_deref(), a.out.summary.as_deref())?;
    Ok(0)
}

fn chosen_state(
    kind: StateArg,
    n: usize,
    target_axis: Axis,
    schedule: &ScheduleArgs,
    report: &mut Report,
) -> Result<SpinState, CliError> {
    report.config("state", format!("{kind:?}").to_lowercase());
    match kind {
        StateArg::Ideal => {
            report.config("n", n);
            Ok(SpinState::symmetric(dicke_state_along(n, n / 2, target_axis)?)?)
        }
        StateArg::Midpoint => {
            let (s, p) = resolve_schedule(n, schedule, report)?;
            midpoint_state(&s, &p)
        }
    }
}

fn parity(a: ParityArgs) -> Outcome {
    let mut report = Report::new("parity", &["phi", "parity", "std_error"]);
    let state = chosen_state(a.state, 2, Axis::X, &a.schedule, &mut report)?;
    let phases = phase_grid(a.phases);
    report.config("phases", a.phases);
    let (amplitude, phase_offset, offset, p_minus, p_plus) = match a.shots {
        None => {
            report.config("shots", "exact");
            let scan = parity_scan(&state, &phases)?;
            for (phi, p) in phases.iter().zip(&scan.parities) {
                report.row(&[num(*phi), num(*p), num(0.0)]);
            }
            let (pm, pp) = scan.extreme_populations;
            (scan.amplitude, scan.phase_offset, scan.offset, pm, pp)
        }
        Some(shots) => {
            report.config("shots", shots).config("generator", GENERATOR).seed(a.seed);
            let config = ShotConfig::new(shots, a.seed)?;
            let sampled = sample_parities(&state, &phases, &config)?;
            for (phi, (p, err)) in phases.iter().zip(&sampled) {
                report.row(&[num(*phi), num(*p), num(*err)]);
            }
            let values: Vec<f64> = sampled.iter().map(|s| s.0).collect();
            let (amp, phase, off) = fit_parity(&phases, &values)?;
            let z = sample_populations(&state, &config.with_stream(phases.len() as u64), Axis::Z)?;
            (amp, phase, off, z.probabilities[0], z.probabilities[2])
        }
    };
    report
        .summary("amplitude", num(amplitude))
        .summary("phase_offset", num(phase_offset))
        .summary("offset", num(offset))
        .summary("p_minus", num(p_minus))
        .summary("p_plus", num(p_plus))
        .summary("fidelity", num(parity_fidelity(p_minus, p_plus, amplitude)));
    report.emit(a.out.output.as_deref(), a.out.summary.as_deref())?;
    Ok(0)
}

fn witness_cmd(a: WitnessArgs) -> Outcome {
    let mut report = Report::new("witness", &["phi", "jphi_squared", "std_error"]);
    let target = axis(a.axis);
    let state = chosen_state(a.state, a.n, target, &a.schedule, &mut report)?;
    let (b, c) = target.complement();
    let label = format!("W_{}{}", b.label(), c.label());
    report.config("axis", target.label());
    match a.shots {
        None => {
            report.config("shots", "exact");
            let grid = azimuth_grid();
            let scan = jphi_scan(&state, &grid)?;
            for (phi, v) in grid.iter().zip(&scan.values) {
                report.row(&[num(*phi), num(*v), num(0.0)]);
            }
            let w = witness(&state, (b, c))?;
            report.summary(&label, num(w));
            if a.n == 4 {
                report
                    .summary("threshold", num(FOUR_PARTITE_WITNESS_THRESHOLD))
                    .summary("genuine_four_partite", certifies_four_partite(a.n, w));
            }
            if a.n % 2 == 0 {
                let r = certify_from_state(&state, target)?;
                report
                    .summary("F_lo", num(r.lower))
                    .summary("F_hi", num(r.upper))
                    .summary("fidelity", num(target_fidelity(&state, target)?))
                    .summary("excludes_ghz", r.excludes_ghz());
            }
        }
        Some(shots) => {
            if target != Axis::X {
                return Err(Error::Config("sampled witness runs target the x axis".into()).into());
            }
            report.config("shots", shots).config("generator", GENERATOR).seed(a.seed);
            let e = simulated_experiment(&state, Some(ShotConfig::new(shots, a.seed)?))?;
            for (phi, rec) in azimuth_grid().iter().zip(&e.measurements[2..]) {
                let (v, err) = rec.second_moment();
                report.row(&[num(*phi), num(v), num(err)]);
            }
            report
                .summary(&label, num(e.record.witness))
                .summary("sigma_W", num(e.sigma_witness))
                .summary("jphi_grid_max", num(e.jphi_grid_max))
                .summary("threshold", num(FOUR_PARTITE_WITNESS_THRESHOLD))
                .summary("genuine_four_partite", certifies_four_partite(4, e.record.witness))
                .summary("F_lo", num(e.record.lower))
                .summary("sigma_F_lo", num(e.errors.lower))
                .summary("F_hi", num(e.record.upper))
                .summary("sigma_F_hi", num(e.errors.upper))
                .summary("excludes_ghz", e.record.excludes_ghz());
        }
    }
    report.emit(a.out.output.as_deref(), a.out.summary.as_deref())?;
    Ok(0)
}

/// Value and error at two decimals, as results are usually quoted.
fn quote(x: f64, sigma: f64) -> String {
    // nudge past binary representation error so decimal ties round up
    let round = |v: f64| (v * 100.0 + v.signum() * 1e-9).round() / 100.0;
    format!("{:.2} ± {:.2}", round(x), round(sigma))
}

fn bounds(a: BoundsArgs) -> Outcome {
    let text = fs::read_to_string(&a.input)?;
    let input = BoundsInput::parse(&text)?;
    let result = input.evaluate()?;
    let mut report = Report::new("bounds", &["key", "index", "value"]);
    report.config("input", a.input.display());
    for line in input.echo_csv().lines().skip(1) {
        report.row(&[line.to_string()]);
    }
    report.row(&["F_lo".into(), "0".into(), num(result.lower)]);
    report.row(&["F_hi".into(), "0".into(), num(result.upper)]);
    report
        .summary("F_lo", quote(result.lower, result.errors.lower))
        .summary("F_hi", quote(result.upper, result.errors.upper))
        .summary("F_lo_exact", num(result.lower))
        .summary("F_hi_exact", num(result.upper))
        .summary("sigma_F_lo", num(result.errors.lower))
        .summary("sigma_F_hi", num(result.errors.upper))
        .summary("excludes_ghz", result.excludes_ghz);
    report.emit(a.out.output.as_deref(), a.out.summary.as_deref())?;
    Ok(0)
}

struct SweepRow {
    values: Vec<String>,
    leaked: bool,
}

fn sweep_point(a: &SweepArgs, n: usize, t_total: f64, ratio: f64) -> Result<SweepRow, CliError> {
    let schedule = PulseSchedule::new(t_total, a.omega_bar, ramp(a.ramp))?;
    let params = SystemParams::new(n).with_delta(ratio * a.omega_bar);
    let options = RunOptions {
        times: Some(vec![0.0, t_total / 2.0, t_total]),
        ..RunOptions::default()
    };
    let traj = run_model(a.model, &schedule, &params, None, &options)?;
    let mid = traj.spin_state(1)?;
    let final_jz = spin_moments(&traj.spin_state(2)?)?.mean_jz;
    let (dicke, w) = if n % 2 == 0 {
        let target = dicke_state_along(n, n / 2, Axis::X)?;
        (
            dicke_stirap::observables::direct_fidelity(&mid, &target)?,
            witness(&mid, (Axis::Y, Axis::Z))?,
        )
    } else {
        (f64::NAN, f64::NAN)
    };
    Ok(SweepRow {
        values: vec![
            n.to_string(),
            num(t_total),
            num(ratio),
            num(schedule.adiabaticity()),
            num(final_jz),
            num(traj.dark_fidelity(1, &schedule).unwrap_or(f64::NAN)),
            num(dicke),
            num(w),
            traj.warnings.len().to_string(),
        ],
        leaked: traj.warnings.iter().any(|w| matches!(w, Warning::PhononLeakage(_))),
    })
}

fn sweep(a: SweepArgs) -> Outcome {
    let mut report = Report::new(
        "sweep",
        &[
            "n",
            "t_total",
            "delta_ratio",
            "adiabaticity",
            "final_mean_jz",
            "midpoint_dark_fidelity",
            "midpoint_dicke_fidelity",
            "midpoint_w_yz",
            "warnings",
        ],
    );
    let join = |v: &[String]| v.join(";");
    report
        .config("n", join(&a.n.iter().map(|x| x.to_string()).collect::<Vec<_>>()))
        .config("t_total", join(&a.t_total.iter().map(|x| num(*x)).collect::<Vec<_>>()))
        .config("delta_ratio", join(&a.delta_ratio.iter().map(|x| num(*x)).collect::<Vec<_>>()))
        .config("omega_bar", num(a.omega_bar))
        .config("ramp", ramp(a.ramp).label())
        .config("model", format!("{:?}", a.model).to_lowercase());
    let mut jobs: Vec<(usize, f64, f64)> = Vec::new();
    for n in &a.n {
        for t in &a.t_total {
            for r in &a.delta_ratio {
                jobs.push((*n, *t, *r));
            }
        }
    }
    let run = || -> Vec<Result<SweepRow, CliError>> {
        jobs.par_iter().map(|(n, t, r)| sweep_point(&a, *n, *t, *r)).collect()
    };
    let rows = match a.threads {
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .map_err(|e| Error::Config(format!("cannot start {k} worker threads: {e}")))?
            .install(run),
        None => run(),
    };
    let mut leaked = 0;
    for row in rows {
        let row = row?;
        leaked += row.leaked as usize;
        report.row(&row.values);
    }
    report.summary("runs", jobs.len()).summary("runs_with_phonon_leakage", leaked);
    report.emit(a.out.output.as_deref(), a.out.summary.as_deref())?;
    Ok(if leaked > 0 { 3 } else { 0 })
}

fn repro_cmd(a: ReproArgs) -> Outcome {
    let ids: Vec<usize> = if a.only.is_empty() { (1..=repro::CRITERIA.len()).collect() } else { a.only.clone() };
    if let Some(bad) = ids.iter().find(|i| !(1..=repro::CRITERIA.len()).contains(*i)) {
        return Err(Error::Config(format!("no criterion {bad}; valid ids are 1 to {}", repro::CRITERIA.len())).into());
    }
    let results: Vec<_> = ids.par_iter().map(|i| repro::run_criterion(*i)).collect();
    let mut report = Report::new("repro", &["criterion", "name", "passed", "detail"]);
    report.config("only", if a.only.is_empty() { "all".into() } else { join_ids(&ids) });
    for r in &results {
        println!("{}", r.line());
        report.row(&[r.id.to_string(), r.name.to_string(), r.passed.to_string(), format!("\"{}\"", r.detail)]);
    }
    let passed = results.iter().filter(|r| r.passed).count();
    println!("passed {passed}/{}", results.len());
    report.summary("passed", passed).summary("total", results.len());
    if let Some(p) = &a.out.output {
        fs::write(p, report.csv())?;
    }
    if let Some(p) = &a.out.summary {
        fs::write(p, report.summary_text())?;
    }
    Ok(0)
}

fn join_ids(ids: &[usize]) -> String {
    ids.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(";")
}
