//! Spin observables on pure or mixed states, in either the symmetric Dicke
//! space or the full 2^N qubit space.

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::spin::{
    azimuth_rotation, axis_rotation, build_collective, equatorial_rotation, symmetric_isometry, Axis, Collective,
    FullSpaceOperator,
};

/// Witness value above which four qubits are genuinely four-partite entangled.
pub const FOUR_PARTITE_WITNESS_THRESHOLD: f64 = 5.23;

/// Largest overlap between the four-ion GHZ state and the half-excited Dicke state.
pub const GHZ_DICKE_MAX_OVERLAP: f64 = 0.75;

/// Normalization slack accepted on input states.
pub const NORM_TOLERANCE: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Space {
    /// Symmetric Dicke subspace of dimension N+1.
    Symmetric(usize),
    /// Full qubit space of dimension 2^N.
    Full(usize),
}

impl Space {
    pub fn n_ions(self) -> usize {
        match self {
            Space::Symmetric(n) | Space::Full(n) => n,
        }
    }

    pub fn dim(self) -> usize {
        match self {
            Space::Symmetric(n) => n + 1,
            Space::Full(n) => 1 << n,
        }
    }

    pub fn operator(self, which: Collective) -> Result<DMatrix<C64>> {
        match self {
            Space::Symmetric(n) => Ok(build_collective(n, which)?.into_matrix()),
            Space::Full(n) => Ok(FullSpaceOperator::collective(n, which)?.matrix().clone()),
        }
    }

    /// Unitary taking `J_z` to the component along `frame`.
    pub fn frame_rotation(self, frame: Frame) -> Result<DMatrix<C64>> {
        match (self, frame) {
            (Space::Symmetric(n), Frame::Axis(a)) => Ok(axis_rotation(n, a)?.into_matrix()),
            (Space::Symmetric(n), Frame::Azimuth(phi)) => Ok(azimuth_rotation(n, phi)?.into_matrix()),
            (Space::Full(n), Frame::Axis(a)) => Ok(FullSpaceOperator::axis_rotation(n, a)?.matrix().clone()),
            (Space::Full(n), Frame::Azimuth(phi)) => {
                let to_x = FullSpaceOperator::axis_rotation(n, Axis::X)?;
                let about_z = FullSpaceOperator::product_rotation(n, Axis::Z, phi)?;
                Ok(about_z.matrix() * to_x.matrix())
            }
        }
    }

    /// Projectors onto the eigenspaces of `J_z`, ordered by ascending projection.
    fn z_projector_diagonals(self) -> Vec<Vec<usize>> {
        let n = self.n_ions();
        let mut groups = vec![Vec::new(); n + 1];
        match self {
            Space::Symmetric(_) => {
                for (m, g) in groups.iter_mut().enumerate() {
                    g.push(m);
                }
            }
            Space::Full(_) => {
                for k in 0..self.dim() {
                    groups[k.count_ones() as usize].push(k);
                }
            }
        }
        groups
    }
}

/// Measurement direction: a Cartesian axis or an equatorial axis at azimuth phi.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Frame {
    Axis(Axis),
    Azimuth(f64),
}

#[derive(Clone, Debug, PartialEq)]
pub enum SpinState {
    Pure { space: Space, vector: DVector<C64> },
    Mixed { space: Space, density: DMatrix<C64> },
}

impl SpinState {
    pub fn pure(space: Space, vector: DVector<C64>) -> Result<Self> {
        check_dim(space, vector.len())?;
        let norm = vector.norm();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::Domain(format!("state is not normalized (norm {norm})")));
        }
        Ok(SpinState::Pure { space, vector })
    }

    pub fn mixed(space: Space, density: DMatrix<C64>) -> Result<Self> {
        check_dim(space, density.nrows())?;
        if density.ncols() != density.nrows() {
            return Err(Error::DimensionMismatch {
                expected: density.nrows(),
                got: density.ncols(),
            });
        }
        let tr = density.trace();
        if (tr.re - 1.0).abs() > NORM_TOLERANCE || tr.im.abs() > NORM_TOLERANCE {
            return Err(Error::Domain(format!("density matrix trace {tr} is not 1")));
        }
        Ok(SpinState::Mixed { space, density })
    }

    pub fn symmetric(vector: DVector<C64>) -> Result<Self> {
        let n = vector
            .len()
            .checked_sub(1)
            .filter(|n| *n > 0)
            .ok_or(Error::Domain("symmetric state needs at least two levels".into()))?;
        Self::pure(Space::Symmetric(n), vector)
    }

    pub fn space(&self) -> Space {
        match self {
            SpinState::Pure { space, .. } | SpinState::Mixed { space, .. } => *space,
        }
    }

    pub fn density(&self) -> DMatrix<C64> {
        match self {
            SpinState::Pure { vector, .. } => vector * vector.adjoint(),
            SpinState::Mixed { density, .. } => density.clone(),
        }
    }

    /// `Tr(rho O)`.
    pub fn expect(&self, op: &DMatrix<C64>) -> C64 {
        match self {
            SpinState::Pure { vector, .. } => vector.dotc(&(op * vector)),
            SpinState::Mixed { density, .. } => (density * op).trace(),
        }
    }

    /// Lifts a symmetric-space state into the full qubit space.
    pub fn to_full(&self) -> Result<Self> {
        match self.space() {
            Space::Full(_) => Ok(self.clone()),
            Space::Symmetric(n) => {
                let v = symmetric_isometry(n)?;
                Ok(match self {
                    SpinState::Pure { vector, .. } => SpinState::Pure {
                        space: Space::Full(n),
                        vector: &v * vector,
                    },
                    SpinState::Mixed { density, .. } => SpinState::Mixed {
                        space: Space::Full(n),
                        density: &v * density * v.adjoint(),
                    },
                })
            }
        }
    }
}

fn check_dim(space: Space, got: usize) -> Result<()> {
    if got != space.dim() {
        return Err(Error::DimensionMismatch {
            expected: space.dim(),
            got,
        });
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpinMoments {
    pub mean_jx: f64,
    pub mean_jy: f64,
    pub mean_jz: f64,
    pub var_jx: f64,
    pub var_jy: f64,
    pub var_jz: f64,
}

pub fn spin_moments(state: &SpinState) -> Result<SpinMoments> {
    let space = state.space();
    let mut means = [0.0; 3];
    let mut vars = [0.0; 3];
    for (i, which) in [Collective::Jx, Collective::Jy, Collective::Jz].into_iter().enumerate() {
        let op = space.operator(which)?;
        let mean = state.expect(&op).re;
        let square = state.expect(&(&op * &op)).re;
        means[i] = mean;
        vars[i] = (square - mean * mean).max(0.0);
    }
    Ok(SpinMoments {
        mean_jx: means[0],
        mean_jy: means[1],
        mean_jz: means[2],
        var_jx: vars[0],
        var_jy: vars[1],
        var_jz: vars[2],
    })
}

/// `<J_i^2> + <J_j^2>` for two orthogonal axes.
pub fn witness(state: &SpinState, axes: (Axis, Axis)) -> Result<f64> {
    if axes.0 == axes.1 {
        return Err(Error::Domain(format!(
            "witness axes must be orthogonal, got {0}{0}",
            axes.0.label()
        )));
    }
    let space = state.space();
    let mut total = 0.0;
    for a in [axes.0, axes.1] {
        let op = space.operator(a.component())?;
        total += state.expect(&(&op * &op)).re;
    }
    Ok(total)
}

/// Genuine four-partite entanglement verdict for a four-ion witness value.
pub fn certifies_four_partite(n_ions: usize, value: f64) -> bool {
    n_ions == 4 && value > FOUR_PARTITE_WITNESS_THRESHOLD
}

/// `<J_phi^2>` over azimuths, `J_phi = cos(phi) J_x + sin(phi) J_y`.
#[derive(Clone, Debug, PartialEq)]
pub struct JPhiScan {
    pub phases: Vec<f64>,
    pub values: Vec<f64>,
    /// Largest value on the grid.
    pub grid_max: f64,
    /// Value at `phi = pi/2`, i.e. `<J_y^2>`.
    pub at_half_pi: f64,
}

pub fn jphi_scan(state: &SpinState, phases: &[f64]) -> Result<JPhiScan> {
    let space = state.space();
    let jx = space.operator(Collective::Jx)?;
    let jy = space.operator(Collective::Jy)?;
    let xx = state.expect(&(&jx * &jx)).re;
    let yy = state.expect(&(&jy * &jy)).re;
    let sym = state.expect(&(&jx * &jy + &jy * &jx)).re;
    let eval = |phi: f64| {
        let (c, s) = (phi.cos(), phi.sin());
        c * c * xx + s * s * yy + c * s * sym
    };
    let values: Vec<f64> = phases.iter().map(|p| eval(*p)).collect();
    let grid_max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(JPhiScan {
        phases: phases.to_vec(),
        values,
        grid_max,
        at_half_pi: yy,
    })
}

/// Probabilities of the `J_frame` eigenvalues, ordered from `-N/2` to `N/2`.
#[derive(Clone, Debug, PartialEq)]
pub struct Populations {
    n_ions: usize,
    values: Vec<f64>,
}

impl Populations {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::Domain("populations need at least two levels".into()));
        }
        if values.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::Domain("populations must be finite and nonnegative".into()));
        }
        Ok(Self {
            n_ions: values.len() - 1,
            values,
        })
    }

    pub fn n_ions(&self) -> usize {
        self.n_ions
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Spin projection of entry `k`.
    pub fn projection(&self, k: usize) -> f64 {
        k as f64 - self.n_ions as f64 / 2.0
    }

    /// Population at integer projection `i`, if present.
    pub fn at(&self, i: i64) -> Option<f64> {
        if self.n_ions % 2 == 1 {
            return None;
        }
        let k = i + (self.n_ions / 2) as i64;
        usize::try_from(k).ok().and_then(|k| self.values.get(k).copied())
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }
}

/// Populations along `frame`, from projectors rotated into that frame.
pub fn populations_in_frame(state: &SpinState, frame: Frame) -> Result<Populations> {
    let space = state.space();
    let u = space.frame_rotation(frame)?;
    let groups = space.z_projector_diagonals();
    let mut values = Vec::with_capacity(groups.len());
    for g in groups {
        // P = U (sum_k |k><k|) U^dagger
        let cols = DMatrix::from_fn(space.dim(), g.len(), |r, c| u[(r, g[c])]);
        let projector = &cols * cols.adjoint();
        values.push(state.expect(&projector).re.max(0.0));
    }
    Populations::new(values)
}

pub fn populations_along(state: &SpinState, axis: Axis) -> Result<Populations> {
    populations_in_frame(state, Frame::Axis(axis))
}

pub fn populations_x(state: &SpinState) -> Result<Populations> {
    populations_along(state, Axis::X)
}

/// `<target| rho |target>`.
pub fn direct_fidelity(state: &SpinState, target: &DVector<C64>) -> Result<f64> {
    check_dim(state.space(), target.len())?;
    let f = match state {
        SpinState::Pure { vector, .. } => target.dotc(vector).norm_sqr(),
        SpinState::Mixed { density, .. } => target.dotc(&(density * target)).re,
    };
    Ok(f.clamp(0.0, 1.0))
}

/// `(|D^0> + |D^N>)/sqrt(2)` in the symmetric basis.
pub fn ghz_state(n_ions: usize) -> DVector<C64> {
    let mut v = DVector::zeros(n_ions + 1);
    v[0] = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    v[n_ions] = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    v
}

/// Two-ion parity oscillation and the fidelity read off from it.
#[derive(Clone, Debug, PartialEq)]
pub struct ParityScan {
    pub phases: Vec<f64>,
    pub parities: Vec<f64>,
    /// Fitted `A` of `A cos(2 phi + phi0) + c`, nonnegative.
    pub amplitude: f64,
    pub phase_offset: f64,
    pub offset: f64,
    /// `p_{-1}`, `p_{+1}`: z-basis populations of both-down and both-up.
    pub extreme_populations: (f64, f64),
    pub fidelity: f64,
}

/// `(p_{-1} + p_{+1} + A_p) / 2`.
pub fn parity_fidelity(p_minus: f64, p_plus: f64, amplitude: f64) -> f64 {
    (p_minus + p_plus + amplitude) / 2.0
}

/// Parity `<prod sigma_z>` after a global pi/2 pulse with phase `phi`,
/// evaluated in the full two-qubit space.
pub fn parity_values(state: &SpinState, phases: &[f64]) -> Result<Vec<f64>> {
    if state.space().n_ions() != 2 {
        return Err(Error::Domain(format!(
            "parity analysis is defined for two ions, got {}",
            state.space().n_ions()
        )));
    }
    let full = state.to_full()?;
    let parity = FullSpaceOperator::parity(2)?;
    let jx = FullSpaceOperator::collective(2, Collective::Jx)?;
    let jy = FullSpaceOperator::collective(2, Collective::Jy)?;
    phases
        .iter()
        .map(|&phi| {
            if !phi.is_finite() {
                return Err(Error::Domain("analysis phase must be finite".into()));
            }
            let gen = jx.matrix() * C64::new(phi.cos(), 0.0) + jy.matrix() * C64::new(phi.sin(), 0.0);
            let u = (gen * C64::new(0.0, -std::f64::consts::FRAC_PI_2)).exp();
            let observable = u.adjoint() * parity.matrix() * &u;
            Ok(full.expect(&observable).re.clamp(-1.0, 1.0))
        })
        .collect()
}

/// Least-squares fit of `A cos(2 phi + phi0) + c`, returning `(A, phi0, c)`.
pub fn fit_parity(phases: &[f64], parities: &[f64]) -> Result<(f64, f64, f64)> {
    if phases.len() != parities.len() {
        return Err(Error::DimensionMismatch {
            expected: phases.len(),
            got: parities.len(),
        });
    }
    if phases.len() < 3 {
        return Err(Error::Domain("parity fit needs at least three phases".into()));
    }
    // linear in (a, b, c) with A cos(2phi + phi0) = a cos 2phi + b sin 2phi
    let mut normal = Matrix3::<f64>::zeros();
    let mut rhs = Vector3::<f64>::zeros();
    for (phi, y) in phases.iter().zip(parities) {
        let row = Vector3::new((2.0 * phi).cos(), (2.0 * phi).sin(), 1.0);
        normal += row * row.transpose();
        rhs += row * *y;
    }
    let sol = normal
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Domain("parity phases do not determine the fit".into()))?;
    let amplitude = sol[0].hypot(sol[1]);
    let phase_offset = (-sol[1]).atan2(sol[0]);
    Ok((amplitude, phase_offset, sol[2]))
}

pub fn parity_scan(state: &SpinState, phases: &[f64]) -> Result<ParityScan> {
    let parities = parity_values(state, phases)?;
    let (amplitude, phase_offset, offset) = fit_parity(phases, &parities)?;
    let z = populations_along(state, Axis::Z)?;
    let (p_minus, p_plus) = (z.values()[0], z.values()[2]);
    Ok(ParityScan {
        phases: phases.to_vec(),
        parities,
        amplitude,
        phase_offset,
        offset,
        extreme_populations: (p_minus, p_plus),
        fidelity: parity_fidelity(p_minus, p_plus, amplitude),
    })
}

/// Uniform grid of `count` phases on `[0, 2 pi)`.
pub fn phase_grid(count: usize) -> Vec<f64> {
    (0..count)
        .map(|k| 2.0 * std::f64::consts::PI * k as f64 / count as f64)
        .collect()
}

/// Applies a global pulse `exp(-i angle J_phi)` to a symmetric pure state.
pub fn apply_equatorial_pulse(state: &DVector<C64>, phi: f64, angle: f64) -> Result<DVector<C64>> {
    let n = state.len().saturating_sub(1);
    equatorial_rotation(n, phi, angle)?.apply(state)
}
