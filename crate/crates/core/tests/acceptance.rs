//! Acceptance criteria 1 to 10. Each test prints one PASS/FAIL line and then
//! asserts. Reference values come from constructions local to this file:
//! Pauli products on the qubit space, hand-built ladder and spin-phonon
//! Hamiltonians, and a matrix-exponential propagator in place of RK4.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Exp1, StandardNormal};
use std::f64::consts::{FRAC_1_SQRT_2, PI};

use dicke_stirap::certification::{certify_from_state, fidelity_lower, fidelity_sandwich_4ion, fidelity_upper};
use dicke_stirap::dark::dark_coefficients;
use dicke_stirap::evolution::{default_reduced_dt, integrate_reduced_with, AdiabaticPreset, RunOptions};
use dicke_stirap::measurement::{sample_populations, ShotConfig};
use dicke_stirap::observables::{parity_fidelity, parity_scan, phase_grid, witness, Space, SpinState};
use dicke_stirap::repro::full_reduced_midpoint_fidelity;
use dicke_stirap::spin::{coupling_r, Axis};

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

fn report(id: usize, name: &str, passed: bool, detail: String) {
    println!(
        "criterion {id:>2} {name:<30} {}  {detail}",
        if passed { "PASS" } else { "FAIL" }
    );
}

// ---- qubit-space reference constructions, basis order (down, up) ----

fn kron(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    DMatrix::from_fn(ar * br, ac * bc, |r, col| a[(r / br, col / bc)] * b[(r % br, col % bc)])
}

fn pauli(which: char) -> DMatrix<C64> {
    let z = c(0.0);
    let i = C64::new(0.0, 1.0);
    match which {
        'x' => DMatrix::from_row_slice(2, 2, &[z, c(1.0), c(1.0), z]),
        'y' => DMatrix::from_row_slice(2, 2, &[z, i, -i, z]),
        'z' => DMatrix::from_row_slice(2, 2, &[c(-1.0), z, z, c(1.0)]),
        '+' => DMatrix::from_row_slice(2, 2, &[z, z, c(1.0), z]),
        _ => unreachable!(),
    }
}

/// `sum_i factor * sigma_i` acting on qubit `i` of `n`.
fn collective(n: usize, which: char, factor: f64) -> DMatrix<C64> {
    let mut total = DMatrix::zeros(1 << n, 1 << n);
    for site in 0..n {
        let mut op = DMatrix::identity(1, 1);
        for q in (0..n).rev() {
            let f = if q == site { pauli(which) * c(factor) } else { DMatrix::identity(2, 2) };
            op = kron(&op, &f);
        }
        total += op;
    }
    total
}

fn dicke_z(n: usize, m: usize) -> DVector<C64> {
    let count = (0..1usize << n).filter(|k| k.count_ones() as usize == m).count() as f64;
    DVector::from_fn(1 << n, |k, _| if k.count_ones() as usize == m { c(1.0 / count.sqrt()) } else { c(0.0) })
}

/// `R_y(pi/2)` on every qubit.
fn to_x_frame(n: usize) -> DMatrix<C64> {
    let h = FRAC_1_SQRT_2;
    let ry = DMatrix::from_row_slice(2, 2, &[c(h), c(h), c(-h), c(h)]);
    (0..n).fold(DMatrix::identity(1, 1), |acc, _| kron(&acc, &ry))
}

fn dicke_x(n: usize, m: usize) -> DVector<C64> {
    to_x_frame(n) * dicke_z(n, m)
}

/// Symmetric-basis coordinates of a symmetric qubit-space vector.
fn to_symmetric(v: &DVector<C64>, n: usize) -> DVector<C64> {
    DVector::from_fn(n + 1, |m, _| dicke_z(n, m).dotc(v))
}

fn expect(op: &DMatrix<C64>, v: &DVector<C64>) -> f64 {
    v.dotc(&(op * v)).re
}

fn variance(op: &DMatrix<C64>, v: &DVector<C64>) -> f64 {
    expect(&(op * op), v) - expect(op, v).powi(2)
}

// ---- reference dynamics ----

fn ladder_hamiltonian(n: usize, g_r: f64, g_b: f64, delta: f64) -> DMatrix<C64> {
    let mut h = DMatrix::zeros(n + 1, n + 1);
    for k in 0..=n {
        if k % 2 == 1 {
            h[(k, k)] = c(delta);
        }
        if k < n {
            let r = (((n - k) * (k + 1)) as f64).sqrt();
            let g = if k % 2 == 0 { g_b } else { g_r };
            h[(k, k + 1)] = c(r * g);
            h[(k + 1, k)] = c(r * g);
        }
    }
    h
}

/// Piecewise-constant propagation with `exp(-i H(t_mid) dt)`.
fn propagate<F: Fn(f64) -> DMatrix<C64>>(h: F, mut psi: DVector<C64>, t0: f64, t1: f64, steps: usize) -> DVector<C64> {
    let dt = (t1 - t0) / steps as f64;
    for s in 0..steps {
        let t = t0 + (s as f64 + 0.5) * dt;
        psi = (h(t) * C64::new(0.0, -dt)).exp() * psi;
    }
    psi
}

struct Strict {
    omega_bar: f64,
    delta: f64,
    total: f64,
}

const STRICT: Strict = Strict {
    omega_bar: 2.0 * PI,
    delta: 40.0 * PI,
    total: 40.0,
};

fn couplings(t: f64) -> (f64, f64) {
    let theta = PI * t / STRICT.total;
    (STRICT.omega_bar * (1.0 + theta.cos()), STRICT.omega_bar * (1.0 - theta.cos()))
}

/// Reference ladder states at the midpoint and the end of the strict schedule.
fn reference_ladder(n: usize) -> (DVector<C64>, DVector<C64>) {
    let h = |t: f64| {
        let (r, b) = couplings(t);
        ladder_hamiltonian(n, r, b, STRICT.delta)
    };
    let mut psi = DVector::zeros(n + 1);
    psi[0] = c(1.0);
    let mid = propagate(h, psi, 0.0, STRICT.total / 2.0, 8000);
    let end = propagate(h, mid.clone(), STRICT.total / 2.0, STRICT.total, 8000);
    (mid, end)
}

/// Fidelity of a ladder state's spin marginal with a symmetric-basis target.
fn ladder_fidelity(psi: &DVector<C64>, target: &DVector<C64>) -> f64 {
    let part = |parity: usize| -> f64 {
        (0..psi.len())
            .filter(|k| k % 2 == parity)
            .map(|k| target[k].conj() * psi[k])
            .sum::<C64>()
            .norm_sqr()
    };
    part(0) + part(1)
}

fn ladder_mean_jz(psi: &DVector<C64>) -> f64 {
    let n = psi.len() - 1;
    psi.iter().enumerate().map(|(k, a)| a.norm_sqr() * (k as f64 - n as f64 / 2.0)).sum()
}

fn library_strict(n: usize) -> dicke_stirap::evolution::Trajectory {
    let (s, p) = AdiabaticPreset::Strict.build(n).unwrap();
    let options = RunOptions {
        times: Some(vec![0.0, s.total_time / 2.0, s.total_time]),
        ..RunOptions::default()
    };
    integrate_reduced_with(&s, &p, default_reduced_dt(&s, &p), &options).unwrap()
}

#[test]
fn criterion_01_dark_state_algebra() {
    let mut worst_h: f64 = 0.0;
    let mut worst_jx: f64 = 0.0;
    for n in [2, 4, 6] {
        for i in 0..10 {
            for j in 0..10 {
                let (r, b) = (0.2 + 0.35 * i as f64, 0.15 + 0.4 * j as f64);
                let v = dark_coefficients(n, r, b).unwrap().spin_vector();
                worst_h = worst_h.max((ladder_hamiltonian(n, r, b, 7.0) * &v).norm());
            }
        }
        let sym = |v: &DVector<C64>| -> DVector<C64> {
            DVector::from_fn(1 << n, |k, _| {
                let m = k.count_ones() as usize;
                let count = (0..1usize << n).filter(|q| q.count_ones() as usize == m).count() as f64;
                v[m] / c(count.sqrt())
            })
        };
        let v = sym(&dark_coefficients(n, 1.0, 1.0).unwrap().spin_vector());
        worst_jx = worst_jx.max((collective(n, 'x', 0.5) * v).norm());
    }
    let h = FRAC_1_SQRT_2;
    let q = (3.0f64 / 8.0).sqrt();
    let mut printed: f64 = 0.0;
    for (n, expect) in [(2, vec![h, -h]), (4, vec![q, -0.5, q])] {
        for (a, e) in dark_coefficients(n, 1.0, 1.0).unwrap().amplitudes().iter().zip(expect) {
            printed = printed.max((a - e).abs());
        }
    }
    let pass = worst_h < 1e-10 && worst_jx < 1e-10 && printed < 1e-12;
    report(
        1,
        "dark-state algebra",
        pass,
        format!("|H psi| {worst_h:.1e}, |Jx psi| {worst_jx:.1e}, printed {printed:.1e}"),
    );
    assert!(pass);
}

#[test]
fn criterion_02_coupling_oracle() {
    let mut worst: f64 = 0.0;
    for n in 1..=8 {
        let jp = collective(n, '+', 1.0);
        for m in 0..n {
            let element = dicke_z(n, m + 1).dotc(&(&jp * dicke_z(n, m)));
            worst = worst.max((element - c(coupling_r(n, m).unwrap())).norm());
        }
    }
    let pass = worst < 1e-12;
    report(2, "coupling oracle", pass, format!("max deviation {worst:.1e} for N <= 8"));
    assert!(pass);
}

#[test]
fn criterion_03_adiabatic_transfer() {
    let traj = library_strict(4);
    let target = to_symmetric(&dicke_x(4, 2), 4);
    let mid = ladder_fidelity(&traj.states[1], &target);
    let jz = ladder_mean_jz(&traj.states[2]);
    let (ref_mid, ref_end) = reference_ladder(4);
    let ref_fid = ladder_fidelity(&ref_mid, &target);
    let ref_jz = ladder_mean_jz(&ref_end);
    let agree = (mid - ref_fid).abs() < 1e-4 && (jz - ref_jz).abs() < 1e-4;
    let pass = jz >= 1.98 && mid >= 0.99 && agree;
    report(
        3,
        "adiabatic transfer",
        pass,
        format!(
            "final <Jz> {jz:.5} (>= 1.98), midpoint fidelity {mid:.5} (>= 0.99); reference propagator {ref_jz:.5}, {ref_fid:.5}"
        ),
    );
    assert!(agree, "library and reference dynamics disagree");
    assert!(jz >= 1.98, "final <Jz> {jz}");
    assert!(mid >= 0.99, "midpoint fidelity {mid}");
}

/// Two-ion spin-phonon Hamiltonian with the phonon cut at `n_max`.
fn full_hamiltonian_two_ions(t: f64, g_r: f64, g_b: f64, delta: f64, n_max: usize) -> DMatrix<C64> {
    let spin_dim = 3;
    let ph = n_max + 1;
    let mut a = DMatrix::<C64>::zeros(ph, ph);
    for k in 1..ph {
        a[(k - 1, k)] = c((k as f64).sqrt());
    }
    let mut jp = DMatrix::<C64>::zeros(spin_dim, spin_dim);
    for m in 0..2 {
        jp[(m + 1, m)] = c(coupling_r(2, m).unwrap());
    }
    let red = kron(&jp, &a) * (C64::from_polar(g_r / 2.0, -delta * t));
    let blue = kron(&jp, &a.adjoint()) * (C64::from_polar(g_b / 2.0, delta * t));
    &red + red.adjoint() + &blue + blue.adjoint()
}

#[test]
fn criterion_04_full_vs_reduced() {
    let mut pass = true;
    let mut parts = Vec::new();
    for n in [2, 4] {
        let base = full_reduced_midpoint_fidelity(n, 1.0).unwrap();
        let doubled = full_reduced_midpoint_fidelity(n, 2.0).unwrap();
        pass &= base >= 0.95 && doubled > base;
        parts.push(format!("N={n} F {base:.7} -> {doubled:.7}"));
    }
    // independent two-ion check: reference full model vs reference ladder at half coupling
    let n_max = 5;
    let h = |t: f64| {
        let (r, b) = couplings(t);
        full_hamiltonian_two_ions(t, r, b, STRICT.delta, n_max)
    };
    let mut psi = DVector::zeros(3 * (n_max + 1));
    psi[0] = c(1.0);
    let t_mid = STRICT.total / 2.0;
    let full = propagate(h, psi, 0.0, t_mid, 60_000);
    let ladder = |t: f64| {
        let (r, b) = couplings(t);
        ladder_hamiltonian(2, r / 2.0, b / 2.0, STRICT.delta)
    };
    let mut l0 = DVector::zeros(3);
    l0[0] = c(1.0);
    let lad = propagate(ladder, l0, 0.0, t_mid, 8000);
    let mut embedded = DVector::zeros(3 * (n_max + 1));
    for k in 0..3 {
        let phase = if k % 2 == 1 { C64::from_polar(1.0, STRICT.delta * t_mid) } else { c(1.0) };
        embedded[k * (n_max + 1) + k % 2] = lad[k] * phase;
    }
    let reference = embedded.dotc(&full).norm_sqr();
    let library = full_reduced_midpoint_fidelity(2, 1.0).unwrap();
    let agree = (reference - library).abs() < 1e-3;
    pass &= agree;
    parts.push(format!("reference N=2 F {reference:.6}"));
    report(4, "full-vs-reduced consistency", pass, parts.join(", "));
    assert!(agree, "reference {reference} vs library {library}");
    assert!(pass);
}

#[test]
fn criterion_05_spin_noise_profile() {
    let n = 4;
    let ops: Vec<DMatrix<C64>> = ['x', 'y', 'z'].iter().map(|w| collective(n, *w, 0.5)).collect();
    let embed = |v: DVector<C64>| -> DVector<C64> {
        (0..=n).fold(DVector::zeros(1 << n), |acc, m| acc + dicke_z(n, m) * v[m])
    };
    let points = 181;
    let mut min = (f64::INFINITY, 0);
    let mut endpoint = [0.0; 3];
    for k in 0..points {
        let theta = PI * k as f64 / (points - 1) as f64;
        let (r, b) = (1.0 + theta.cos(), (1.0 - theta.cos()).max(0.0));
        let v = embed(dark_coefficients(n, r, b).unwrap().spin_vector());
        let var_x = variance(&ops[0], &v);
        if var_x < min.0 {
            min = (var_x, k);
        }
        if k == 0 {
            for (i, op) in ops.iter().enumerate() {
                endpoint[i] = variance(op, &v);
            }
        }
    }
    let at = PI * min.1 as f64 / (points - 1) as f64;
    let end_err = (endpoint[0] - 1.0).abs().max((endpoint[1] - 1.0).abs()).max(endpoint[2].abs());
    let pass = min.0 < 1e-10 && min.1 == (points - 1) / 2 && end_err < 1e-10;
    report(
        5,
        "spin-noise profile",
        pass,
        format!("min var_jx {:.1e} at theta {at:.6}, endpoint error {end_err:.1e}", min.0),
    );
    assert!(pass);
}

#[test]
fn criterion_06_witness() {
    let n = 4;
    let jy = collective(n, 'y', 0.5);
    let jz = collective(n, 'z', 0.5);
    let ideal = dicke_x(n, 2);
    let w_ref = expect(&(&jy * &jy), &ideal) + expect(&(&jz * &jz), &ideal);
    let lib_state = SpinState::pure(Space::Full(n), ideal.clone()).unwrap();
    let w_lib = witness(&lib_state, (Axis::Y, Axis::Z)).unwrap();
    let mid = library_strict(n).spin_state(1).unwrap();
    let w_mid = witness(&mid, (Axis::Y, Axis::Z)).unwrap();
    // reference midpoint witness from the exponential propagator
    let (ref_mid, _) = reference_ladder(n);
    let sym_y = DMatrix::from_fn(n + 1, n + 1, |r, col| dicke_z(n, r).dotc(&(&jy * &jy * dicke_z(n, col))));
    let sym_z = DMatrix::from_fn(n + 1, n + 1, |r, col| dicke_z(n, r).dotc(&(&jz * &jz * dicke_z(n, col))));
    let mut w_ref_mid = 0.0;
    for parity in 0..2 {
        let part = DVector::from_fn(n + 1, |k, _| if k % 2 == parity { ref_mid[k] } else { c(0.0) });
        w_ref_mid += expect(&sym_y, &part) + expect(&sym_z, &part);
    }
    let pass = (w_ref - 6.0).abs() < 1e-9 && (w_lib - 6.0).abs() < 1e-9 && w_lib > 5.23 && w_mid >= 5.9;
    report(
        6,
        "witness",
        pass,
        format!("ideal W_yz {w_lib:.10} (reference {w_ref:.10}), midpoint {w_mid:.5} (reference {w_ref_mid:.5})"),
    );
    assert!((w_mid - w_ref_mid).abs() < 1e-3);
    assert!(pass);
}

#[test]
fn criterion_07_paper_arithmetic() {
    let p = [0.00, 0.03, 0.88, 0.03, 0.03];
    let w = 5.46;
    let by_hand = w / 4.0 - 0.5 * p[2] - 1.25 * (p[1] + p[3]) - 0.5 * (p[0] + p[4]);
    let lower = fidelity_lower(w, &p, 2.0).unwrap();
    let upper = fidelity_upper(&p).unwrap();
    let f2 = parity_fidelity(0.516, 0.451, 0.95);
    let f2_hand = (0.516 + 0.451 + 0.95) / 2.0;
    // the quoted values carry two decimals; 1e-12 absorbs binary rounding of the data
    let within = |x: f64, q: f64| (x - q).abs() <= 0.005 + 1e-12;
    let pass = within(lower, 0.84) && within(upper, 0.88) && within(f2, 0.96);
    report(
        7,
        "paper-arithmetic reproduction",
        pass,
        format!("F_lo {lower:.4} (0.84), F_hi {upper:.4} (0.88), F2 {f2:.4} (0.96)"),
    );
    assert!((lower - by_hand).abs() < 1e-12 && (f2 - f2_hand).abs() < 1e-12);
    assert!(pass);
}

fn random_vector(dim: usize, rng: &mut ChaCha20Rng) -> DVector<C64> {
    let v = DVector::from_fn(dim, |_, _| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)));
    let norm = v.norm();
    v / c(norm)
}

#[test]
fn criterion_08_bound_sandwich() {
    let n = 4;
    let target = dicke_z(n, 2);
    let mut rng = ChaCha20Rng::seed_from_u64(88);
    let mut violations = 0;
    let mut min_gap = f64::INFINITY;
    for k in 0..200 {
        let (state, fid) = if k < 100 {
            let v = random_vector(16, &mut rng);
            let f = target.dotc(&v).norm_sqr();
            (SpinState::pure(Space::Full(n), v).unwrap(), f)
        } else {
            let parts = 1 + k % 6;
            let weights: Vec<f64> = (0..parts).map(|_| rng.sample::<f64, _>(Exp1)).collect();
            let total: f64 = weights.iter().sum();
            let mut rho = DMatrix::<C64>::zeros(16, 16);
            for w in weights {
                let v = random_vector(16, &mut rng);
                rho += &v * v.adjoint() * c(w / total);
            }
            let f = target.dotc(&(&rho * &target)).re;
            (SpinState::mixed(Space::Full(n), rho).unwrap(), f)
        };
        let r = certify_from_state(&state, Axis::Z).unwrap();
        if !(r.lower - 1e-9 <= fid && fid <= r.upper + 1e-9) {
            violations += 1;
        }
        min_gap = min_gap.min(fid - r.lower).min(r.upper - fid);
    }
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let w = rng.random_range(0.0..6.0);
        let p: Vec<f64> = (0..5).map(|_| rng.random::<f64>()).collect();
        let (lo, hi) = fidelity_sandwich_4ion(w, &p).unwrap();
        worst = worst.max((lo - fidelity_lower(w, &p, 2.0).unwrap()).abs());
        worst = worst.max((hi - p[2]).abs());
    }
    let pass = violations == 0 && worst < 1e-12;
    report(
        8,
        "bound-sandwich oracle",
        pass,
        format!("{violations}/200 violations (min slack {min_gap:.2e}), four-ion vs general {worst:.1e}"),
    );
    assert!(pass);
}

/// Parity after `exp(-i pi/4 (cos phi sigma_x + sin phi sigma_y))` on both ions.
fn reference_parity(v: &DVector<C64>, phi: f64) -> f64 {
    let gen = pauli('x') * c(phi.cos()) + pauli('y') * c(phi.sin());
    let u1 = (gen * C64::new(0.0, -PI / 4.0)).exp();
    let u = kron(&u1, &u1);
    let zz = kron(&pauli('z'), &pauli('z'));
    expect(&zz, &(u * v))
}

#[test]
fn criterion_09_parity_pipeline() {
    let ideal_full = dicke_x(2, 1);
    let ideal = SpinState::pure(Space::Full(2), ideal_full.clone()).unwrap();
    let phases = phase_grid(32);
    let scan = parity_scan(&ideal, &phases).unwrap();
    let reference: Vec<f64> = phases.iter().map(|p| reference_parity(&ideal_full, *p)).collect();
    let curve_err = scan
        .parities
        .iter()
        .zip(&reference)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let mid = library_strict(2).spin_state(1).unwrap();
    let mid_scan = parity_scan(&mid, &phases).unwrap();
    let pass = scan.amplitude >= 0.999 && (scan.fidelity - 1.0).abs() < 1e-6 && mid_scan.fidelity >= 0.99;
    report(
        9,
        "parity pipeline",
        pass,
        format!(
            "ideal A_p {:.6} F {:.8}, midpoint F {:.5}, curve vs reference {curve_err:.1e}",
            scan.amplitude, scan.fidelity, mid_scan.fidelity
        ),
    );
    assert!(curve_err < 1e-10);
    assert!(pass);
}

#[test]
fn criterion_10_shot_noise() {
    let n = 4;
    let v = dicke_z(n, 2);
    // populations along x from the qubit-space projectors
    let rotated = to_x_frame(n).adjoint() * &v;
    let mut exact = vec![0.0; n + 1];
    for (k, a) in rotated.iter().enumerate() {
        exact[k.count_ones() as usize] += a.norm_sqr();
    }
    let state = SpinState::pure(Space::Full(n), v).unwrap();
    let config = ShotConfig::new(1_000_000, 777).unwrap();
    let a = sample_populations(&state, &config, Axis::X).unwrap();
    let b = sample_populations(&state, &config, Axis::X).unwrap();
    let shots = config.n_shots as f64;
    let mut worst: f64 = 0.0;
    for (p_hat, p) in a.probabilities.iter().zip(&exact) {
        let sigma = (p * (1.0 - p) / shots).sqrt();
        worst = worst.max((p_hat - p).abs() / sigma);
    }
    let identical = a.to_csv().into_bytes() == b.to_csv().into_bytes();
    let pass = worst <= 3.0 && identical && a.counts.iter().sum::<u64>() == config.n_shots;
    report(
        10,
        "shot-noise statistics",
        pass,
        format!("max deviation {worst:.2} sigma at 1e6 shots, replay identical: {identical}"),
    );
    assert!(pass);
}
