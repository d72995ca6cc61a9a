//! Closed-form dark states of the ladder Hamiltonian for even ion numbers.
//!
//! The dark state lives on even excitations with the phonon in vacuum:
//! amplitude of `|D^{2i}>|0>` is `A C_i Omega_b^i Omega_r^{N/2-i}` with
//! `C_0 = 1` and `C_i = (-1)^i prod_{j=1..i} R_{2j-2} / R_{2j-1}`.

use nalgebra::DVector;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::model::{embed_ladder_state, ReducedHamiltonian};
use crate::spin::{build_collective, coupling_r, dicke_state_along, Axis, Collective};

#[derive(Clone, Debug, PartialEq)]
pub struct DarkState {
    n_ions: usize,
    omega_r: f64,
    omega_b: f64,
    coeffs: Vec<f64>,
    norm: f64,
    amplitudes: Vec<f64>,
}

impl DarkState {
    pub fn n_ions(&self) -> usize {
        self.n_ions
    }

    pub fn omegas(&self) -> (f64, f64) {
        (self.omega_r, self.omega_b)
    }

    /// Unnormalized `C_0 .. C_{N/2}`.
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Normalizing constant `A`.
    pub fn norm_constant(&self) -> f64 {
        self.norm
    }

    /// Normalized amplitudes on `|D^0>, |D^2>, .., |D^N>`.
    pub fn amplitudes(&self) -> &[f64] {
        &self.amplitudes
    }

    /// The state over all N+1 Dicke levels (zeros on odd excitations). This is
    /// also its representation in the ladder basis, since ladder position `k`
    /// holds `|D^k>` and even positions have the phonon in vacuum.
    pub fn spin_vector(&self) -> DVector<C64> {
        let mut v = DVector::zeros(self.n_ions + 1);
        for (i, a) in self.amplitudes.iter().enumerate() {
            v[2 * i] = C64::new(*a, 0.0);
        }
        v
    }

    /// Embedding into the full spin (x) phonon space.
    pub fn full_vector(&self, n_max: usize) -> Result<DVector<C64>> {
        embed_ladder_state(&self.spin_vector(), 0.0, 0.0, n_max)
    }
}

pub fn dark_coefficients(n_ions: usize, omega_r: f64, omega_b: f64) -> Result<DarkState> {
    if n_ions == 0 || n_ions % 2 == 1 {
        return Err(Error::Unsupported(format!(
            "dark states are defined for even ion numbers only, got {n_ions}"
        )));
    }
    if !(omega_r.is_finite() && omega_b.is_finite()) || omega_r < 0.0 || omega_b < 0.0 {
        return Err(Error::Domain("sideband amplitudes must be finite and nonnegative".into()));
    }
    if omega_r == 0.0 && omega_b == 0.0 {
        return Err(Error::Domain("both sideband amplitudes are zero; the dark state is undefined".into()));
    }
    let half = n_ions / 2;
    let mut coeffs = Vec::with_capacity(half + 1);
    coeffs.push(1.0);
    for i in 1..=half {
        let ratio = coupling_r(n_ions, 2 * i - 2)? / coupling_r(n_ions, 2 * i - 1)?;
        coeffs.push(-coeffs[i - 1] * ratio);
    }
    // Scale the amplitudes by the larger tone first so that large N does not
    // overflow; the common factor drops out under normalization.
    let scale = omega_r.max(omega_b);
    let (r, b) = (omega_r / scale, omega_b / scale);
    let raw: Vec<f64> = coeffs
        .iter()
        .enumerate()
        .map(|(i, c)| c * b.powi(i as i32) * r.powi((half - i) as i32))
        .collect();
    let norm2: f64 = raw.iter().map(|a| a * a).sum();
    let rescale = scale.powi(half as i32);
    let norm = 1.0 / (norm2.sqrt() * rescale);
    let amplitudes = raw.iter().map(|a| a / norm2.sqrt()).collect();
    Ok(DarkState {
        n_ions,
        omega_r,
        omega_b,
        coeffs,
        norm,
        amplitudes,
    })
}

/// `|| H psi ||` for the dark state in the ladder basis.
pub fn verify_dark(state: &DarkState, h: &ReducedHamiltonian) -> Result<f64> {
    if h.n_ions() != state.n_ions {
        return Err(Error::DimensionMismatch {
            expected: state.n_ions + 1,
            got: h.dim(),
        });
    }
    Ok(h.apply(&state.spin_vector())?.norm())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JxCheck {
    /// `|| J_x psi_d(Omega, Omega) ||`.
    pub residual: f64,
    /// `|<psi_d(Omega, Omega)| R_y(pi/2) |D^{N/2}_z>|^2`.
    pub rotated_fidelity: f64,
}

/// Checks that the equal-amplitude dark state is the `J_x = 0` Dicke state.
pub fn jx_annihilation_check(n_ions: usize) -> Result<JxCheck> {
    if n_ions > 10 {
        return Err(Error::Resource(format!("J_x check limited to N <= 10, got {n_ions}")));
    }
    let psi = dark_coefficients(n_ions, 1.0, 1.0)?.spin_vector();
    let jx = build_collective(n_ions, Collective::Jx)?;
    let residual = jx.apply(&psi)?.norm();
    let target = dicke_state_along(n_ions, n_ions / 2, Axis::X)?;
    let rotated_fidelity = psi.dotc(&target).norm_sqr();
    Ok(JxCheck {
        residual,
        rotated_fidelity,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{reduced_hamiltonian, SystemParams};
    use nalgebra::DMatrix;
    use proptest::prelude::*;

    #[test]
    fn printed_two_and_four_ion_states() {
        let s = dark_coefficients(2, 1.0, 1.0).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((s.amplitudes()[0] - h).abs() < 1e-12);
        assert!((s.amplitudes()[1] + h).abs() < 1e-12);

        let s = dark_coefficients(4, 2.5, 2.5).unwrap();
        let expect = [(3.0f64 / 8.0).sqrt(), -(0.25f64).sqrt(), (3.0f64 / 8.0).sqrt()];
        for (a, e) in s.amplitudes().iter().zip(expect) {
            assert!((a - e).abs() < 1e-12);
        }
    }

    #[test]
    fn endpoint_limits() {
        let s = dark_coefficients(4, 1.0, 0.0).unwrap();
        assert_eq!(s.amplitudes(), &[1.0, 0.0, 0.0]);
        let s = dark_coefficients(4, 0.0, 1.0).unwrap();
        assert_eq!(s.amplitudes(), &[0.0, 0.0, 1.0]);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(matches!(dark_coefficients(3, 1.0, 1.0), Err(Error::Unsupported(_))));
        assert!(matches!(dark_coefficients(4, 0.0, 0.0), Err(Error::Domain(_))));
        assert!(matches!(dark_coefficients(4, -1.0, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn normalization_constant() {
        let s = dark_coefficients(6, 0.7, 1.9).unwrap();
        let (r, b) = s.omegas();
        for (i, (c, a)) in s.coeffs().iter().zip(s.amplitudes()).enumerate() {
            let expect = s.norm_constant() * c * b.powi(i as i32) * r.powi(3 - i as i32);
            assert!((expect - a).abs() < 1e-12);
        }
        let total: f64 = s.amplitudes().iter().map(|a| a * a).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn residual_on_grid() {
        for n in [2, 4, 6] {
            for i in 0..10 {
                for j in 0..10 {
                    let (r, b) = (0.1 + 0.3 * i as f64, 0.05 + 0.25 * j as f64);
                    let s = dark_coefficients(n, r, b).unwrap();
                    let h = reduced_hamiltonian(&SystemParams::new(n).with_amplitudes(r, b)).unwrap();
                    assert!(verify_dark(&s, &h).unwrap() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn perturbed_state_fails_check() {
        let s = dark_coefficients(4, 1.0, 1.0).unwrap();
        let h = reduced_hamiltonian(&SystemParams::new(4)).unwrap();
        let mut v = s.spin_vector();
        v[1] += C64::new(0.01, 0.0);
        assert!(h.apply(&v).unwrap().norm() > 1e-3);
        let wrong = reduced_hamiltonian(&SystemParams::new(6)).unwrap();
        assert!(matches!(verify_dark(&s, &wrong), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn jx_null_vector() {
        assert!(jx_annihilation_check(2).unwrap().residual < 1e-12);
        for n in [2, 4, 6, 8, 10] {
            let c = jx_annihilation_check(n).unwrap();
            assert!(c.residual < 1e-10, "n={n}");
            assert!((c.rotated_fidelity - 1.0).abs() < 1e-10, "n={n}");
        }
    }

    #[test]
    fn one_dimensional_kernel() {
        for n in [2, 4, 6, 8] {
            let p = SystemParams::new(n).with_amplitudes(0.8, 1.3).with_delta(4.0);
            let h = reduced_hamiltonian(&p).unwrap();
            let svd = h.matrix().clone().svd(true, true);
            let tol = 1e-12 * svd.singular_values.max();
            let nullity = svd.singular_values.iter().filter(|s| **s < tol).count();
            assert_eq!(nullity, 1, "n={n}");
            // the kernel vector is the analytic state up to sign
            let v_t: DMatrix<f64> = svd.v_t.unwrap();
            let idx = svd.singular_values.imin();
            let kernel = v_t.row(idx);
            let s = dark_coefficients(n, 0.8, 1.3).unwrap().spin_vector();
            let overlap: f64 = kernel.iter().zip(s.iter()).map(|(k, a)| k * a.re).sum();
            assert!((overlap.abs() - 1.0).abs() < 1e-10);
        }
    }

    proptest! {
        #[test]
        fn scale_invariance(r in 0.01f64..10.0, b in 0.01f64..10.0, c in 0.01f64..100.0) {
            let a = dark_coefficients(6, r, b).unwrap();
            let s = dark_coefficients(6, c * r, c * b).unwrap();
            for (x, y) in a.amplitudes().iter().zip(s.amplitudes()) {
                prop_assert!((x - y).abs() < 1e-14);
            }
        }
    }
}
