//! Fidelity bounds for the half-excited Dicke state from a collective witness
//! and projection populations, without tomography.
//!
//! With `W = <J^2> - <J_a^2>` and `p_k` the populations of `J_a = k` along the
//! Dicke axis `a`, the target fidelity satisfies
//!
//! ```text
//! W/(2 j_M) - (j_M - 1)/2 p_0 - sum_{k != 0} ((j_M + 1)/2 - k^2/(2 j_M)) p_k  <=  F  <=  p_0
//! ```
//!
//! on the full qubit space, including the non-symmetric multiplets.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rand::Rng;
use rand_distr::{Exp1, StandardNormal};

use crate::error::{Error, Result};
use crate::observables::{direct_fidelity, populations_along, witness, Space, SpinState, GHZ_DICKE_MAX_OVERLAP};
use crate::spin::{dicke_state_along, symmetric_isometry, Axis};

/// Largest ion number accepted by [`certify_from_state`].
pub const MAX_CERTIFY_IONS: usize = 8;

#[derive(Clone, Debug, PartialEq)]
pub struct CertificationRecord {
    pub n_ions: usize,
    /// Axis of the target Dicke state; the witness uses the other two.
    pub axis: Axis,
    pub witness: f64,
    /// Populations ordered from projection `-j_M` to `+j_M`.
    pub populations: Vec<f64>,
    pub lower: f64,
    pub upper: f64,
}

impl CertificationRecord {
    /// Builds a record from measured (possibly unnormalized) data.
    pub fn from_measurements(axis: Axis, witness: f64, populations: Vec<f64>) -> Result<Self> {
        let n_ions = check_populations(&populations)?;
        let j_max = n_ions as f64 / 2.0;
        Ok(Self {
            n_ions,
            axis,
            witness,
            lower: fidelity_lower(witness, &populations, j_max)?,
            upper: fidelity_upper(&populations)?,
            populations,
        })
    }

    pub fn j_max(&self) -> f64 {
        self.n_ions as f64 / 2.0
    }

    /// A lower bound above the GHZ-Dicke overlap rules out the GHZ class.
    pub fn excludes_ghz(&self) -> bool {
        self.lower > GHZ_DICKE_MAX_OVERLAP
    }
}

/// Returns the ion number implied by the population count.
fn check_populations(p: &[f64]) -> Result<usize> {
    if p.len() < 3 || p.len() % 2 == 0 {
        return Err(Error::Domain(format!(
            "need populations for an even ion number (odd count >= 3), got {}",
            p.len()
        )));
    }
    if p.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::Domain("populations must be finite and nonnegative".into()));
    }
    Ok(p.len() - 1)
}

/// `p_0`.
pub fn fidelity_upper(p: &[f64]) -> Result<f64> {
    let n = check_populations(p)?;
    Ok(p[n / 2])
}

pub fn fidelity_lower(w: f64, p: &[f64], j_max: f64) -> Result<f64> {
    let n = check_populations(p)?;
    if (2.0 * j_max - n as f64).abs() > 1e-12 {
        return Err(Error::Domain(format!(
            "j_M = {j_max} inconsistent with {} populations",
            p.len()
        )));
    }
    let mut bound = w / (2.0 * j_max) - (j_max - 1.0) / 2.0 * p[n / 2];
    for (k, pk) in p.iter().enumerate() {
        if k == n / 2 {
            continue;
        }
        let jz = k as f64 - j_max;
        bound -= ((j_max + 1.0) / 2.0 - jz * jz / (2.0 * j_max)) * pk;
    }
    Ok(bound)
}

/// Four-ion form: `W/4 - ((p_-2 + p_2 + p_0)/2 + 5 (p_-1 + p_1)/4) <= F <= p_0`.
pub fn fidelity_sandwich_4ion(w: f64, p: &[f64]) -> Result<(f64, f64)> {
    if p.len() != 5 {
        return Err(Error::Domain(format!("four-ion bounds need 5 populations, got {}", p.len())));
    }
    check_populations(p)?;
    let lower = w / 4.0 - ((p[0] + p[4] + p[2]) / 2.0 + 5.0 * (p[1] + p[3]) / 4.0);
    Ok((lower, p[2]))
}

/// Half-excited Dicke state along `axis` in the given space.
pub fn target_state(space: Space, axis: Axis) -> Result<DVector<C64>> {
    let n = space.n_ions();
    let sym = dicke_state_along(n, n / 2, axis)?;
    match space {
        Space::Symmetric(_) => Ok(sym),
        Space::Full(_) => Ok(symmetric_isometry(n)? * sym),
    }
}

/// Exact fidelity of `state` with the half-excited Dicke state along `axis`.
pub fn target_fidelity(state: &SpinState, axis: Axis) -> Result<f64> {
    direct_fidelity(state, &target_state(state.space(), axis)?)
}

/// Computes the witness and populations exactly and applies the bounds.
pub fn certify_from_state(state: &SpinState, axis: Axis) -> Result<CertificationRecord> {
    let n = state.space().n_ions();
    if n % 2 == 1 {
        return Err(Error::Unsupported(format!("bounds need an even ion number, got {n}")));
    }
    if n > MAX_CERTIFY_IONS {
        return Err(Error::Resource(format!("certification limited to {MAX_CERTIFY_IONS} ions, got {n}")));
    }
    let w = witness(state, axis.complement())?;
    let p = populations_along(state, axis)?;
    CertificationRecord::from_measurements(axis, w, p.values().to_vec())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundErrors {
    pub lower: f64,
    pub upper: f64,
}

/// Linear propagation of independent standard errors through both bounds.
pub fn propagate_uncertainty(sigma_w: f64, sigma_p: &[f64]) -> Result<BoundErrors> {
    if !(sigma_w.is_finite() && sigma_w >= 0.0) || sigma_p.iter().any(|s| !s.is_finite() || *s < 0.0) {
        return Err(Error::Domain("standard errors must be finite and nonnegative".into()));
    }
    let n = check_populations(&vec![0.0; sigma_p.len()])?;
    let j_max = n as f64 / 2.0;
    let mut var = (sigma_w / (2.0 * j_max)).powi(2);
    for (k, s) in sigma_p.iter().enumerate() {
        let jz = k as f64 - j_max;
        let coeff = if k == n / 2 {
            (j_max - 1.0) / 2.0
        } else {
            (j_max + 1.0) / 2.0 - jz * jz / (2.0 * j_max)
        };
        var += (coeff * s).powi(2);
    }
    Ok(BoundErrors {
        lower: var.sqrt(),
        upper: sigma_p[n / 2],
    })
}

/// Haar-random pure state on `dim` levels.
pub fn random_pure_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DVector<C64> {
    let v = DVector::from_fn(dim, |_, _| {
        C64::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
    });
    let norm = v.norm();
    v / C64::new(norm, 0.0)
}

/// Haar-random pure state on the full 2^N space.
pub fn random_pure_state<R: Rng + ?Sized>(n_ions: usize, rng: &mut R) -> Result<SpinState> {
    let space = Space::Full(n_ions);
    symmetric_isometry(n_ions)?;
    SpinState::pure(space, random_pure_vector(space.dim(), rng))
}

/// Convex mixture of `components` Haar-random pure states with flat-Dirichlet weights.
pub fn random_mixed_state<R: Rng + ?Sized>(n_ions: usize, components: usize, rng: &mut R) -> Result<SpinState> {
    if components == 0 {
        return Err(Error::Domain("mixture needs at least one component".into()));
    }
    let space = Space::Full(n_ions);
    symmetric_isometry(n_ions)?;
    let weights: Vec<f64> = (0..components).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let total: f64 = weights.iter().sum();
    let mut rho = DMatrix::<C64>::zeros(space.dim(), space.dim());
    for w in weights {
        let v = random_pure_vector(space.dim(), rng);
        rho += &v * v.adjoint() * C64::new(w / total, 0.0);
    }
    SpinState::mixed(space, rho)
}

/// Measured inputs for the bounds, read from `key = value` text.
///
/// Keys: `W`, `sigma_W`, `p_list`, `sigma_list`, `j_M`. Lists are comma
/// separated, optionally in brackets; `#` starts a comment. `j_M` defaults to
/// the value implied by `p_list`, and missing errors default to zero.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundsInput {
    pub witness: f64,
    pub sigma_witness: f64,
    pub populations: Vec<f64>,
    pub sigmas: Vec<f64>,
    pub j_max: f64,
    /// Raw value tokens per key, in file order.
    raw: Vec<(String, Vec<String>)>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundsReport {
    pub lower: f64,
    pub upper: f64,
    pub errors: BoundErrors,
    pub excludes_ghz: bool,
}

impl BoundsInput {
    pub fn parse(text: &str) -> Result<Self> {
        let mut raw: Vec<(String, Vec<String>)> = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .or_else(|| line.split_once(':'))
                .ok_or_else(|| Error::Parse(format!("line {}: expected key = value", lineno + 1)))?;
            let key = key.trim().to_string();
            if !["W", "sigma_W", "p_list", "sigma_list", "j_M"].contains(&key.as_str()) {
                return Err(Error::Parse(format!("line {}: unknown key '{key}'", lineno + 1)));
            }
            if raw.iter().any(|(k, _)| *k == key) {
                return Err(Error::Parse(format!("line {}: duplicate key '{key}'", lineno + 1)));
            }
            let tokens: Vec<String> = value
                .trim()
                .trim_start_matches(['[', '{'])
                .trim_end_matches([']', '}'])
                .split(',')
                .map(|t| t.trim().to_string())
                .filter(|t| !t.is_empty())
                .collect();
            if tokens.is_empty() {
                return Err(Error::Parse(format!("line {}: '{key}' has no value", lineno + 1)));
            }
            raw.push((key, tokens));
        }

        let numbers = |key: &str| -> Result<Option<Vec<f64>>> {
            raw.iter()
                .find(|(k, _)| k == key)
                .map(|(_, toks)| {
                    toks.iter()
                        .map(|t| t.parse::<f64>().map_err(|_| Error::Parse(format!("'{key}': bad number '{t}'"))))
                        .collect()
                })
                .transpose()
        };
        let scalar = |key: &str| -> Result<Option<f64>> {
            match numbers(key)? {
                None => Ok(None),
                Some(v) if v.len() == 1 => Ok(Some(v[0])),
                Some(_) => Err(Error::Parse(format!("'{key}' must be a single number"))),
            }
        };

        let witness = scalar("W")?.ok_or_else(|| Error::Parse("missing key 'W'".into()))?;
        let populations = numbers("p_list")?.ok_or_else(|| Error::Parse("missing key 'p_list'".into()))?;
        let n = check_populations(&populations)?;
        let sigma_witness = scalar("sigma_W")?.unwrap_or(0.0);
        let sigmas = numbers("sigma_list")?.unwrap_or_else(|| vec![0.0; populations.len()]);
        if sigmas.len() != populations.len() {
            return Err(Error::Parse(format!(
                "sigma_list has {} entries, p_list has {}",
                sigmas.len(),
                populations.len()
            )));
        }
        let j_max = scalar("j_M")?.unwrap_or(n as f64 / 2.0);
        if (2.0 * j_max - n as f64).abs() > 1e-12 {
            return Err(Error::Parse(format!("j_M = {j_max} inconsistent with {} populations", n + 1)));
        }
        Ok(Self {
            witness,
            sigma_witness,
            populations,
            sigmas,
            j_max,
            raw,
        })
    }

    pub fn evaluate(&self) -> Result<BoundsReport> {
        let lower = fidelity_lower(self.witness, &self.populations, self.j_max)?;
        let upper = fidelity_upper(&self.populations)?;
        Ok(BoundsReport {
            lower,
            upper,
            errors: propagate_uncertainty(self.sigma_witness, &self.sigmas)?,
            excludes_ghz: lower > GHZ_DICKE_MAX_OVERLAP,
        })
    }

    /// Inputs echoed as `key,index,value` with the value text exactly as read.
    pub fn echo_csv(&self) -> String {
        let mut out = String::from("key,index,value\n");
        for (key, toks) in &self.raw {
            for (i, t) in toks.iter().enumerate() {
                out.push_str(&format!("{key},{i},{t}\n"));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spin::DickeBasis;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    const MEASURED_P: [f64; 5] = [0.00, 0.03, 0.88, 0.03, 0.03];

    #[test]
    fn upper_bound_reads_center() {
        assert_eq!(fidelity_upper(&MEASURED_P).unwrap(), 0.88);
        assert_eq!(fidelity_upper(&[0.2; 5]).unwrap(), 0.2);
        assert!(fidelity_upper(&[0.5, 0.5]).is_err());
    }

    #[test]
    fn measured_lower_bound() {
        let lo = fidelity_lower(5.46, &MEASURED_P, 2.0).unwrap();
        let by_hand = 5.46 / 4.0 - 0.5 * 0.88 - 1.25 * 0.06 - 0.5 * 0.03;
        assert!((lo - by_hand).abs() < 1e-12);
        assert!((lo - 0.835).abs() < 1e-12);
        assert!(fidelity_lower(5.46, &MEASURED_P, 1.5).is_err());
    }

    #[test]
    fn tight_at_target() {
        let p = [0.0, 0.0, 1.0, 0.0, 0.0];
        assert!((fidelity_lower(6.0, &p, 2.0).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(fidelity_sandwich_4ion(6.0, &p).unwrap(), (1.0, 1.0));
        assert!(fidelity_lower(0.0, &[1.0, 0.0, 0.0, 0.0, 0.0], 2.0).unwrap() <= 0.0);
    }

    #[test]
    fn sandwich_arity() {
        assert!(fidelity_sandwich_4ion(5.0, &[0.2; 3]).is_err());
        let (lo, hi) = fidelity_sandwich_4ion(5.46, &MEASURED_P).unwrap();
        assert_eq!((lo * 100.0).round() / 100.0, 0.84);
        assert_eq!(hi, 0.88);
    }

    #[test]
    fn target_state_bounds_collapse() {
        for axis in [Axis::X, Axis::Y, Axis::Z] {
            let s = SpinState::symmetric(target_state(Space::Symmetric(4), axis).unwrap()).unwrap();
            let r = certify_from_state(&s.to_full().unwrap(), axis).unwrap();
            assert!((r.lower - 1.0).abs() < 1e-10 && (r.upper - 1.0).abs() < 1e-10, "{axis:?} {r:?}");
            assert!(r.excludes_ghz());
        }
    }

    #[test]
    fn random_states_respect_bounds() {
        let mut rng = ChaCha20Rng::seed_from_u64(7);
        for n in [2, 4, 6] {
            for k in 0..20 {
                let s = if k % 2 == 0 {
                    random_pure_state(n, &mut rng).unwrap()
                } else {
                    random_mixed_state(n, 4, &mut rng).unwrap()
                };
                for axis in [Axis::X, Axis::Z] {
                    let r = certify_from_state(&s, axis).unwrap();
                    let f = target_fidelity(&s, axis).unwrap();
                    assert!(r.lower - 1e-9 <= f && f <= r.upper + 1e-9, "n={n} {r:?} f={f}");
                }
            }
        }
    }

    #[test]
    fn non_symmetric_sector_respects_bounds() {
        // singlet-like state on two of four qubits: j < j_M everywhere
        let mut v = DVector::<C64>::zeros(16);
        v[0b0001] = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        v[0b0010] = C64::new(-std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let s = SpinState::pure(Space::Full(4), v).unwrap();
        let r = certify_from_state(&s, Axis::Z).unwrap();
        let f = target_fidelity(&s, Axis::Z).unwrap();
        assert!(f.abs() < 1e-12);
        assert!(r.lower <= f + 1e-9 && f <= r.upper + 1e-9);
    }

    #[test]
    fn odd_ion_number_rejected() {
        let s = SpinState::symmetric(DickeBasis::new(3).unwrap().state(0).unwrap()).unwrap();
        assert!(matches!(certify_from_state(&s, Axis::Z), Err(Error::Unsupported(_))));
    }

    #[test]
    fn uncertainty_propagation() {
        let zero = propagate_uncertainty(0.0, &[0.0; 5]).unwrap();
        assert_eq!(zero, BoundErrors { lower: 0.0, upper: 0.0 });
        let sig = [0.00, 0.02, 0.03, 0.02, 0.02];
        let e = propagate_uncertainty(0.07, &sig).unwrap();
        assert!(e.lower / 0.03 <= 1.5 && 0.03 / e.lower <= 1.5, "{e:?}");
        assert_eq!(e.upper, 0.03);
        let doubled = propagate_uncertainty(0.14, &sig.map(|s| 2.0 * s)).unwrap();
        assert!((doubled.lower - 2.0 * e.lower).abs() < 1e-15);
        assert!(propagate_uncertainty(-0.1, &sig).is_err());
    }

    #[test]
    fn monotonicity() {
        let base = fidelity_lower(5.0, &[0.1, 0.1, 0.6, 0.1, 0.1], 2.0).unwrap();
        assert!(fidelity_lower(5.1, &[0.1, 0.1, 0.6, 0.1, 0.1], 2.0).unwrap() > base);
        let bumped = fidelity_lower(5.0, &[0.1, 0.1, 0.7, 0.1, 0.1], 2.0).unwrap();
        assert!((base - bumped - 0.05).abs() < 1e-12);
    }

    #[test]
    fn parse_bounds_file() {
        let text = "# measured\nW = 5.46\nsigma_W = 0.07\np_list = 0.00, 0.03, 0.88, 0.03, 0.03\n\
                    sigma_list = [0.00, 0.02, 0.03, 0.02, 0.02]\nj_M = 2\n";
        let input = BoundsInput::parse(text).unwrap();
        assert_eq!(input.populations, MEASURED_P.to_vec());
        let report = input.evaluate().unwrap();
        assert!((report.lower - 0.835).abs() < 1e-12 && report.upper == 0.88);
        assert!(report.excludes_ghz);
        let echo = input.echo_csv();
        assert!(echo.contains("p_list,0,0.00\n") && echo.contains("W,0,5.46\n"));

        assert!(BoundsInput::parse("W = 5\n").is_err());
        assert!(BoundsInput::parse("W = 5\np_list = 0.2, 0.8\n").is_err());
        assert!(BoundsInput::parse("W = x\np_list = 0,1,0\n").is_err());
        assert!(BoundsInput::parse("W = 1\np_list = 0,1,0\nj_M = 2\n").is_err());
        assert!(BoundsInput::parse("W = 1\nfoo = 3\n").is_err());
    }
}
