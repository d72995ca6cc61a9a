//! Spin-phonon sideband Hamiltonians.
//!
//! The full model acts on `spin (x) phonon` with index `m * (n_max + 1) + n`.
//! The reduced model is the (N+1)-level ladder
//! `|D^0>|0>, |D^1>|1>, |D^2>|0>, ...` obtained once the phonon-number
//! changing ("horizontal") Raman paths are dropped.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::spin::coupling_r;

/// Physical parameters of the two-tone sideband drive.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SystemParams {
    pub n_ions: usize,
    /// Lamb-Dicke factor.
    pub eta: f64,
    pub omega_r: f64,
    pub omega_b: f64,
    /// Sideband detuning.
    pub delta: f64,
    /// Highest phonon Fock level kept in the full model.
    pub n_max: usize,
}

impl SystemParams {
    /// `eta = 1`, unit amplitudes, `delta = 20` and the default phonon cut-off.
    pub fn new(n_ions: usize) -> Self {
        Self {
            n_ions,
            eta: 1.0,
            omega_r: 1.0,
            omega_b: 1.0,
            delta: 20.0,
            n_max: default_n_max(n_ions),
        }
    }

    pub fn with_amplitudes(mut self, omega_r: f64, omega_b: f64) -> Self {
        self.omega_r = omega_r;
        self.omega_b = omega_b;
        self
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = delta;
        self
    }

    pub fn with_eta(mut self, eta: f64) -> Self {
        self.eta = eta;
        self
    }

    pub fn with_n_max(mut self, n_max: usize) -> Self {
        self.n_max = n_max;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_ions == 0 {
            return Err(Error::Domain("ion number must be positive".into()));
        }
        for (name, v) in [
            ("eta", self.eta),
            ("omega_r", self.omega_r),
            ("omega_b", self.omega_b),
            ("delta", self.delta),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::Domain(format!("{name} must be finite and nonnegative, got {v}")));
            }
        }
        Ok(())
    }

    /// Whether horizontal Raman transitions are far enough detuned for the
    /// reduced ladder to be trusted: `2 delta > 10 eta max(omega_r, omega_b)`.
    pub fn reduced_model_valid(&self) -> bool {
        2.0 * self.delta > 10.0 * self.eta * self.omega_r.max(self.omega_b)
    }

    /// Smallest `n_max` the full model accepts.
    pub fn min_n_max(&self) -> usize {
        self.n_ions / 2 + 2
    }
}

pub fn default_n_max(n_ions: usize) -> usize {
    n_ions / 2 + 4
}

/// Real symmetric tridiagonal ladder Hamiltonian in the rotating frame.
#[derive(Clone, Debug, PartialEq)]
pub struct ReducedHamiltonian {
    n_ions: usize,
    delta: f64,
    coupling_scale: f64,
    matrix: DMatrix<f64>,
}

impl ReducedHamiltonian {
    /// Builds the ladder from the sideband couplings `g_r = eta Omega_r`,
    /// `g_b = eta Omega_b`. Link `k -> k+1` carries `R_k g_b` for even `k` and
    /// `R_k g_r` for odd `k`, times `coupling_scale`; odd rungs sit at `delta`.
    pub fn from_couplings(n_ions: usize, g_r: f64, g_b: f64, delta: f64, coupling_scale: f64) -> Result<Self> {
        if n_ions == 0 {
            return Err(Error::Domain("ion number must be positive".into()));
        }
        let d = n_ions + 1;
        let mut matrix = DMatrix::zeros(d, d);
        for k in 0..d {
            if k % 2 == 1 {
                matrix[(k, k)] = delta;
            }
        }
        for k in 0..n_ions {
            let g = if k % 2 == 0 { g_b } else { g_r };
            let link = coupling_scale * coupling_r(n_ions, k)? * g;
            matrix[(k, k + 1)] = link;
            matrix[(k + 1, k)] = link;
        }
        Ok(Self {
            n_ions,
            delta,
            coupling_scale,
            matrix,
        })
    }

    pub fn n_ions(&self) -> usize {
        self.n_ions
    }

    pub fn dim(&self) -> usize {
        self.n_ions + 1
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn coupling_scale(&self) -> f64 {
        self.coupling_scale
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// `(spin excitation, phonon number)` of each ladder position.
    pub fn basis(&self) -> Vec<(usize, usize)> {
        (0..self.dim()).map(|k| (k, k % 2)).collect()
    }

    pub fn complex_matrix(&self) -> DMatrix<C64> {
        self.matrix.map(|v| C64::new(v, 0.0))
    }

    /// `H psi` using the tridiagonal structure.
    pub fn apply(&self, psi: &DVector<C64>) -> Result<DVector<C64>> {
        let d = self.dim();
        if psi.len() != d {
            return Err(Error::DimensionMismatch { expected: d, got: psi.len() });
        }
        Ok(DVector::from_fn(d, |k, _| {
            let mut acc = psi[k] * self.matrix[(k, k)];
            if k > 0 {
                acc += psi[k - 1] * self.matrix[(k, k - 1)];
            }
            if k + 1 < d {
                acc += psi[k + 1] * self.matrix[(k, k + 1)];
            }
            acc
        }))
    }
}

/// Ladder coupling scale matching the full model, whose sideband terms carry
/// `eta Omega / 2` where the printed ladder has `eta Omega`.
pub const FULL_MODEL_COUPLING_SCALE: f64 = 0.5;

/// The printed ladder matrix, taken literally (unit coupling scale).
pub fn reduced_hamiltonian(params: &SystemParams) -> Result<ReducedHamiltonian> {
    reduced_hamiltonian_scaled(params, 1.0)
}

/// Ladder matrix with a global factor on every coupling. A scale of 1/2
/// reproduces the sideband prefactors of the full interaction Hamiltonian.
pub fn reduced_hamiltonian_scaled(params: &SystemParams, coupling_scale: f64) -> Result<ReducedHamiltonian> {
    params.validate()?;
    ReducedHamiltonian::from_couplings(
        params.n_ions,
        params.eta * params.omega_r,
        params.eta * params.omega_b,
        params.delta,
        coupling_scale,
    )
}

/// Maps a ladder state at time `t` into the interaction-picture spin-phonon
/// space. Odd rungs carry the frame phase `exp(i delta t)`.
pub fn embed_ladder_state(psi: &DVector<C64>, t: f64, delta: f64, n_max: usize) -> Result<DVector<C64>> {
    if n_max < 1 {
        return Err(Error::Config("ladder embedding needs n_max >= 1".into()));
    }
    let n_ions = psi.len().checked_sub(1).ok_or(Error::DimensionMismatch { expected: 1, got: 0 })?;
    let stride = n_max + 1;
    let mut out = DVector::zeros((n_ions + 1) * stride);
    let phase = C64::from_polar(1.0, delta * t);
    for (k, amp) in psi.iter().enumerate() {
        let n = k % 2;
        out[k * stride + n] = if n == 1 { amp * phase } else { *amp };
    }
    Ok(out)
}

/// Time-dependent interaction-picture Hamiltonian on spin (x) phonon,
/// `(g_r/2)(a J+ e^{-i delta t} + h.c.) + (g_b/2)(a^dag J+ e^{i delta t} + h.c.)`.
#[derive(Clone, Debug)]
pub struct FullHamiltonian {
    params: SystemParams,
    /// Nonzero entries `(row, col, value)` of `J+ (x) a`.
    red: Vec<(usize, usize, f64)>,
    /// Nonzero entries of `J+ (x) a^dag`.
    blue: Vec<(usize, usize, f64)>,
}

impl FullHamiltonian {
    pub fn new(params: SystemParams) -> Result<Self> {
        params.validate()?;
        if params.n_max < params.min_n_max() {
            return Err(Error::Config(format!(
                "phonon cut-off n_max={} below the required {} for {} ions",
                params.n_max,
                params.min_n_max(),
                params.n_ions
            )));
        }
        let stride = params.n_max + 1;
        let mut red = Vec::new();
        let mut blue = Vec::new();
        for m in 0..params.n_ions {
            let r = coupling_r(params.n_ions, m)?;
            for n in 0..=params.n_max {
                // a: |n> -> sqrt(n)|n-1>
                if n >= 1 {
                    red.push(((m + 1) * stride + n - 1, m * stride + n, r * (n as f64).sqrt()));
                }
                // a^dag: |n> -> sqrt(n+1)|n+1>
                if n < params.n_max {
                    blue.push(((m + 1) * stride + n + 1, m * stride + n, r * ((n + 1) as f64).sqrt()));
                }
            }
        }
        Ok(Self { params, red, blue })
    }

    pub fn params(&self) -> &SystemParams {
        &self.params
    }

    pub fn dim(&self) -> usize {
        (self.params.n_ions + 1) * (self.params.n_max + 1)
    }

    /// Same model with new sideband couplings `g_r = eta Omega_r`, `g_b = eta Omega_b`.
    pub(crate) fn term_weights(&self, t: f64, g_r: f64, g_b: f64) -> (C64, C64) {
        let phase = C64::from_polar(1.0, -self.params.delta * t);
        // red raising carries e^{-i delta t}, blue raising e^{+i delta t}
        (phase * (g_r / 2.0), phase.conj() * (g_b / 2.0))
    }

    /// `H(t) psi` for explicit couplings, without forming the matrix.
    pub fn apply_with(&self, t: f64, g_r: f64, g_b: f64, psi: &DVector<C64>) -> DVector<C64> {
        let (wr, wb) = self.term_weights(t, g_r, g_b);
        let mut out = DVector::zeros(psi.len());
        for &(r, c, v) in &self.red {
            out[r] += wr * v * psi[c];
            out[c] += wr.conj() * v * psi[r];
        }
        for &(r, c, v) in &self.blue {
            out[r] += wb * v * psi[c];
            out[c] += wb.conj() * v * psi[r];
        }
        out
    }

    /// Dense `H(t)` at the stored amplitudes.
    pub fn at(&self, t: f64) -> DMatrix<C64> {
        let p = &self.params;
        let (wr, wb) = self.term_weights(t, p.eta * p.omega_r, p.eta * p.omega_b);
        let d = self.dim();
        let mut h = DMatrix::zeros(d, d);
        for &(r, c, v) in &self.red {
            h[(r, c)] += wr * v;
            h[(c, r)] += wr.conj() * v;
        }
        for &(r, c, v) in &self.blue {
            h[(r, c)] += wb * v;
            h[(c, r)] += wb.conj() * v;
        }
        h
    }
}

pub fn full_hamiltonian_at(t: f64, params: &SystemParams) -> Result<DMatrix<C64>> {
    Ok(FullHamiltonian::new(*params)?.at(t))
}

/// Index of `|D^m>|n>` in the full model.
pub fn full_index(m: usize, n: usize, n_max: usize) -> usize {
    m * (n_max + 1) + n
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spin::{build_collective, Collective};
    use std::f64::consts::PI;

    fn max_abs(m: &DMatrix<C64>) -> f64 {
        m.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn two_ion_ladder() {
        let p = SystemParams::new(2).with_amplitudes(1.0, 1.0).with_delta(10.0);
        let h = reduced_hamiltonian(&p).unwrap();
        let s = 2f64.sqrt();
        let expect = DMatrix::from_row_slice(3, 3, &[0.0, s, 0.0, s, 10.0, s, 0.0, s, 0.0]);
        assert!((h.matrix() - expect).abs().max() < 1e-15);
        assert_eq!(h.basis(), vec![(0, 0), (1, 1), (2, 0)]);
    }

    #[test]
    fn ladder_pattern_general_n() {
        let p = SystemParams::new(6).with_amplitudes(0.3, 0.7).with_delta(5.0).with_eta(0.1);
        let h = reduced_hamiltonian(&p).unwrap();
        for k in 0..7 {
            assert_eq!(h.matrix()[(k, k)], if k % 2 == 1 { 5.0 } else { 0.0 });
        }
        for k in 0..6 {
            let g = if k % 2 == 0 { 0.07 } else { 0.03 };
            assert!((h.matrix()[(k, k + 1)] - coupling_r(6, k).unwrap() * g).abs() < 1e-15);
        }
        assert_eq!(h.matrix(), &h.matrix().transpose());
    }

    #[test]
    fn blue_off_leaves_vacuum_dark() {
        for n in 1..=7 {
            let p = SystemParams::new(n).with_amplitudes(1.3, 0.0);
            let h = reduced_hamiltonian(&p).unwrap();
            let mut v = DVector::zeros(n + 1);
            v[0] = C64::new(1.0, 0.0);
            assert_eq!(h.apply(&v).unwrap().norm(), 0.0);
        }
    }

    #[test]
    fn up_down_mirror_symmetry() {
        // reversing the ladder and swapping the tones leaves the matrix fixed
        for n in [2, 4, 6] {
            let a = reduced_hamiltonian(&SystemParams::new(n).with_amplitudes(0.4, 1.1)).unwrap();
            let b = reduced_hamiltonian(&SystemParams::new(n).with_amplitudes(1.1, 0.4)).unwrap();
            let d = n + 1;
            let flipped = DMatrix::from_fn(d, d, |r, c| b.matrix()[(n - r, n - c)]);
            assert!((a.matrix() - flipped).abs().max() < 1e-15);
        }
    }

    #[test]
    fn apply_matches_dense() {
        let h = reduced_hamiltonian(&SystemParams::new(5).with_amplitudes(0.2, 0.9)).unwrap();
        let psi = DVector::from_fn(6, |k, _| C64::new(k as f64 * 0.1, 1.0 - k as f64 * 0.2));
        let dense = h.complex_matrix() * &psi;
        assert!((h.apply(&psi).unwrap() - dense).norm() < 1e-14);
    }

    /// Dense construction from tensor products, independent of the sparse path.
    fn tensor_reference(p: &SystemParams, t: f64) -> DMatrix<C64> {
        let jp = build_collective(p.n_ions, Collective::JPlus).unwrap().into_matrix();
        let f = p.n_max + 1;
        let a = DMatrix::<C64>::from_fn(f, f, |r, c| {
            if c == r + 1 {
                C64::new((c as f64).sqrt(), 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        let red = jp.kronecker(&a) * C64::from_polar(1.0, -p.delta * t);
        let blue = jp.kronecker(&a.adjoint()) * C64::from_polar(1.0, p.delta * t);
        let g_r = p.eta * p.omega_r / 2.0;
        let g_b = p.eta * p.omega_b / 2.0;
        (&red + red.adjoint()) * C64::new(g_r, 0.0) + (&blue + blue.adjoint()) * C64::new(g_b, 0.0)
    }

    #[test]
    fn full_matches_tensor_reference() {
        let p = SystemParams::new(4).with_amplitudes(0.8, 1.3).with_eta(0.1).with_delta(3.0);
        let h = FullHamiltonian::new(p).unwrap();
        for t in [0.0, 0.37, 2.9] {
            let dense = h.at(t);
            assert!(max_abs(&(&dense - tensor_reference(&p, t))) < 1e-14);
            assert!(max_abs(&(&dense - dense.adjoint())) < 1e-12);
            let psi = DVector::from_fn(h.dim(), |k, _| C64::new((k as f64).sin(), (k as f64 * 0.3).cos()));
            let lhs = h.apply_with(t, p.eta * p.omega_r, p.eta * p.omega_b, &psi);
            assert!((lhs - &dense * &psi).norm() < 1e-12);
        }
    }

    #[test]
    fn full_matrix_element_and_period() {
        let p = SystemParams::new(2).with_amplitudes(0.9, 0.4).with_eta(0.2).with_delta(7.0);
        let h = FullHamiltonian::new(p).unwrap();
        let h0 = h.at(0.0);
        let el = h0[(full_index(1, 0, p.n_max), full_index(0, 1, p.n_max))];
        let expect = 0.2 * 0.9 / 2.0 * coupling_r(2, 0).unwrap();
        assert!((el - C64::new(expect, 0.0)).norm() < 1e-15);
        let t = 0.813;
        let period = 2.0 * PI / p.delta;
        assert!(max_abs(&(h.at(t) - h.at(t + period))) < 1e-12);
    }

    #[test]
    fn full_zero_amplitudes() {
        let p = SystemParams::new(3).with_amplitudes(0.0, 0.0);
        assert_eq!(max_abs(&full_hamiltonian_at(1.2, &p).unwrap()), 0.0);
    }

    #[test]
    fn full_truncation_guard() {
        let p = SystemParams::new(4).with_n_max(3);
        assert!(matches!(FullHamiltonian::new(p), Err(Error::Config(_))));
        assert!(FullHamiltonian::new(p.with_n_max(4)).is_ok());
    }

    #[test]
    fn validity_flag() {
        let p = SystemParams::new(4).with_amplitudes(1.0, 1.0).with_delta(20.0);
        assert!(p.reduced_model_valid());
        assert!(!p.with_delta(4.0).reduced_model_valid());
        assert!(p.with_delta(-1.0).validate().is_err());
    }

    #[test]
    fn embedding_phases() {
        let psi = DVector::from_vec(vec![C64::new(0.6, 0.0), C64::new(0.0, 0.8), C64::new(0.0, 0.0)]);
        let e = embed_ladder_state(&psi, 0.5, 2.0, 3).unwrap();
        assert_eq!(e.len(), 12);
        assert_eq!(e[full_index(0, 0, 3)], C64::new(0.6, 0.0));
        assert!((e[full_index(1, 1, 3)] - C64::new(0.0, 0.8) * C64::from_polar(1.0, 1.0)).norm() < 1e-15);
    }
}
