//! Collective angular-momentum algebra on the symmetric Dicke subspace.
//!
//! Dicke index `m` counts excitations and runs from 0 (all spins down) to N
//! (all spins up). `J_z` has eigenvalue `m - N/2` on `|D^m>`. The full
//! 2^N-dimensional qubit space is available for validation; there basis index
//! bit `i` set means qubit `i` is up.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Largest ion number for which the full 2^N space is built densely.
pub const MAX_FULL_SPACE_IONS: usize = 10;

const I: C64 = C64::new(0.0, 1.0);

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub fn label(self) -> &'static str {
        match self {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Z => "z",
        }
    }

    /// The two axes orthogonal to this one, in cyclic order.
    pub fn complement(self) -> (Axis, Axis) {
        match self {
            Axis::X => (Axis::Y, Axis::Z),
            Axis::Y => (Axis::Z, Axis::X),
            Axis::Z => (Axis::X, Axis::Y),
        }
    }

    pub fn component(self) -> Collective {
        match self {
            Axis::X => Collective::Jx,
            Axis::Y => Collective::Jy,
            Axis::Z => Collective::Jz,
        }
    }
}

impl std::str::FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "x" => Ok(Axis::X),
            "y" => Ok(Axis::Y),
            "z" => Ok(Axis::Z),
            other => Err(Error::Parse(format!("unknown axis '{other}'"))),
        }
    }
}

/// Which collective operator to build.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum Collective {
    JPlus,
    JMinus,
    Jx,
    Jy,
    Jz,
    JSquared,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub struct DickeBasis {
    n_ions: usize,
}

impl DickeBasis {
    pub fn new(n_ions: usize) -> Result<Self> {
        if n_ions == 0 {
            return Err(Error::Domain("ion number must be positive".into()));
        }
        Ok(Self { n_ions })
    }

    pub fn n_ions(&self) -> usize {
        self.n_ions
    }

    pub fn dim(&self) -> usize {
        self.n_ions + 1
    }

    /// Maximum projection `j_M = N/2`.
    pub fn j_max(&self) -> f64 {
        self.n_ions as f64 / 2.0
    }

    /// `J_z` eigenvalue of `|D^m>`.
    pub fn jz_eigenvalue(&self, m: usize) -> f64 {
        m as f64 - self.j_max()
    }

    /// `|D^m>` as a unit vector.
    pub fn state(&self, m: usize) -> Result<DVector<C64>> {
        if m > self.n_ions {
            return Err(Error::Domain(format!(
                "excitation {m} exceeds ion number {}",
                self.n_ions
            )));
        }
        let mut v = DVector::zeros(self.dim());
        v[m] = C64::new(1.0, 0.0);
        Ok(v)
    }
}

/// An operator on the (N+1)-dimensional symmetric subspace.
#[derive(Clone, Debug, PartialEq)]
pub struct CollectiveOperator {
    basis: DickeBasis,
    matrix: DMatrix<C64>,
    hermitian: bool,
}

impl CollectiveOperator {
    pub fn new(basis: DickeBasis, matrix: DMatrix<C64>, hermitian: bool) -> Result<Self> {
        let d = basis.dim();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: matrix.nrows(),
            });
        }
        Ok(Self {
            basis,
            matrix,
            hermitian,
        })
    }

    pub fn basis(&self) -> DickeBasis {
        self.basis
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.matrix
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn adjoint(&self) -> Self {
        Self {
            basis: self.basis,
            matrix: self.matrix.adjoint(),
            hermitian: self.hermitian,
        }
    }

    pub fn apply(&self, state: &DVector<C64>) -> Result<DVector<C64>> {
        if state.len() != self.basis.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.basis.dim(),
                got: state.len(),
            });
        }
        Ok(&self.matrix * state)
    }

    /// Operator product `self * rhs`.
    pub fn compose(&self, rhs: &CollectiveOperator) -> Result<Self> {
        if self.basis != rhs.basis {
            return Err(Error::DimensionMismatch {
                expected: self.basis.dim(),
                got: rhs.basis.dim(),
            });
        }
        Ok(Self {
            basis: self.basis,
            matrix: &self.matrix * &rhs.matrix,
            hermitian: false,
        })
    }
}

/// Collective coupling `R_m = <D^{m+1}| J_+ |D^m>`.
///
/// `(N-m) sqrt(C(N,m) / C(N,m+1))` reduces to `sqrt((N-m)(m+1))`, which is
/// evaluated with a single rounding.
pub fn coupling_r(n_ions: usize, m: usize) -> Result<f64> {
    if n_ions == 0 || m >= n_ions {
        return Err(Error::Domain(format!(
            "coupling index m={m} outside [0, {}]",
            n_ions.saturating_sub(1)
        )));
    }
    Ok((((n_ions - m) * (m + 1)) as f64).sqrt())
}

pub fn build_collective(n_ions: usize, which: Collective) -> Result<CollectiveOperator> {
    let basis = DickeBasis::new(n_ions)?;
    let d = basis.dim();
    let mut raise = DMatrix::<C64>::zeros(d, d);
    for m in 0..n_ions {
        raise[(m + 1, m)] = C64::new(coupling_r(n_ions, m)?, 0.0);
    }
    let (matrix, hermitian) = match which {
        Collective::JPlus => (raise, false),
        Collective::JMinus => (raise.adjoint(), false),
        Collective::Jx => ((&raise + raise.adjoint()) * C64::new(0.5, 0.0), true),
        Collective::Jy => ((&raise - raise.adjoint()) / (2.0 * I), true),
        Collective::Jz => (
            DMatrix::from_fn(d, d, |r, c| {
                if r == c {
                    C64::new(basis.jz_eigenvalue(r), 0.0)
                } else {
                    C64::new(0.0, 0.0)
                }
            }),
            true,
        ),
        Collective::JSquared => {
            let j = basis.j_max();
            (DMatrix::identity(d, d) * C64::new(j * (j + 1.0), 0.0), true)
        }
    };
    CollectiveOperator::new(basis, matrix, hermitian)
}

/// `exp(-i angle J_y)`.
pub fn rotation_y(n_ions: usize, angle: f64) -> Result<CollectiveOperator> {
    rotation(n_ions, Axis::Y, angle)
}

/// `exp(-i angle J_axis)` on the symmetric subspace.
pub fn rotation(n_ions: usize, axis: Axis, angle: f64) -> Result<CollectiveOperator> {
    if !angle.is_finite() {
        return Err(Error::Domain("rotation angle must be finite".into()));
    }
    let generator = build_collective(n_ions, axis.component())?;
    let u = (generator.matrix() * C64::new(0.0, -angle)).exp();
    CollectiveOperator::new(generator.basis(), u, false)
}

/// `exp(-i angle (cos(phi) J_x + sin(phi) J_y))`: a global pulse about an
/// equatorial axis at azimuth `phi`.
pub fn equatorial_rotation(n_ions: usize, phi: f64, angle: f64) -> Result<CollectiveOperator> {
    if !(angle.is_finite() && phi.is_finite()) {
        return Err(Error::Domain("rotation angles must be finite".into()));
    }
    let jx = build_collective(n_ions, Collective::Jx)?;
    let jy = build_collective(n_ions, Collective::Jy)?;
    let gen = jx.matrix() * C64::new(phi.cos(), 0.0) + jy.matrix() * C64::new(phi.sin(), 0.0);
    CollectiveOperator::new(jx.basis(), (gen * C64::new(0.0, -angle)).exp(), false)
}

/// Rotation `U` with `U J_z U^dagger = J_axis`, so that `U |D^m_z>` is the
/// Dicke state along `axis` with the same projection.
pub fn axis_rotation(n_ions: usize, axis: Axis) -> Result<CollectiveOperator> {
    match axis {
        Axis::X => rotation(n_ions, Axis::Y, std::f64::consts::FRAC_PI_2),
        Axis::Y => rotation(n_ions, Axis::X, -std::f64::consts::FRAC_PI_2),
        Axis::Z => {
            let basis = DickeBasis::new(n_ions)?;
            CollectiveOperator::new(basis, DMatrix::identity(basis.dim(), basis.dim()), true)
        }
    }
}

/// Rotation taking `J_z` to `J_phi = cos(phi) J_x + sin(phi) J_y`.
pub fn azimuth_rotation(n_ions: usize, phi: f64) -> Result<CollectiveOperator> {
    let to_x = rotation(n_ions, Axis::Y, std::f64::consts::FRAC_PI_2)?;
    rotation(n_ions, Axis::Z, phi)?.compose(&to_x)
}

/// `|D^m>` along `axis`.
pub fn dicke_state_along(n_ions: usize, m: usize, axis: Axis) -> Result<DVector<C64>> {
    let basis = DickeBasis::new(n_ions)?;
    axis_rotation(n_ions, axis)?.apply(&basis.state(m)?)
}

/// Operator on the full 2^N qubit space.
#[derive(Clone, Debug, PartialEq)]
pub struct FullSpaceOperator {
    n_ions: usize,
    matrix: DMatrix<C64>,
}

impl FullSpaceOperator {
    pub fn new(n_ions: usize, matrix: DMatrix<C64>) -> Result<Self> {
        let d = full_dim(n_ions)?;
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: matrix.nrows(),
            });
        }
        Ok(Self { n_ions, matrix })
    }

    /// Collective sum of single-site operators.
    pub fn collective(n_ions: usize, which: Collective) -> Result<Self> {
        let d = full_dim(n_ions)?;
        let mut raise = DMatrix::<C64>::zeros(d, d);
        for k in 0..d {
            for site in 0..n_ions {
                if k & (1 << site) == 0 {
                    raise[(k | (1 << site), k)] += C64::new(1.0, 0.0);
                }
            }
        }
        let matrix = match which {
            Collective::JPlus => raise,
            Collective::JMinus => raise.adjoint(),
            Collective::Jx => (&raise + raise.adjoint()) * C64::new(0.5, 0.0),
            Collective::Jy => (&raise - raise.adjoint()) / (2.0 * I),
            Collective::Jz => DMatrix::from_diagonal(&DVector::from_fn(d, |k, _| {
                C64::new(k.count_ones() as f64 - n_ions as f64 / 2.0, 0.0)
            })),
            Collective::JSquared => {
                let jx = (&raise + raise.adjoint()) * C64::new(0.5, 0.0);
                let jy = (&raise - raise.adjoint()) / (2.0 * I);
                let jz = Self::collective(n_ions, Collective::Jz)?.matrix;
                &jx * &jx + &jy * &jy + &jz * &jz
            }
        };
        Self::new(n_ions, matrix)
    }

    /// Product of identical single-qubit rotations `exp(-i angle sigma_axis / 2)`.
    pub fn product_rotation(n_ions: usize, axis: Axis, angle: f64) -> Result<Self> {
        full_dim(n_ions)?;
        let (c, s) = ((angle / 2.0).cos(), (angle / 2.0).sin());
        // single-qubit basis order (down, up)
        let u = match axis {
            Axis::X => DMatrix::from_row_slice(
                2,
                2,
                &[C64::new(c, 0.0), C64::new(0.0, -s), C64::new(0.0, -s), C64::new(c, 0.0)],
            ),
            Axis::Y => DMatrix::from_row_slice(
                2,
                2,
                &[C64::new(c, 0.0), C64::new(s, 0.0), C64::new(-s, 0.0), C64::new(c, 0.0)],
            ),
            Axis::Z => DMatrix::from_row_slice(
                2,
                2,
                &[C64::new(c, s), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(c, -s)],
            ),
        };
        let mut total = DMatrix::<C64>::identity(1, 1);
        for _ in 0..n_ions {
            total = total.kronecker(&u);
        }
        Self::new(n_ions, total)
    }

    /// Full-space counterpart of [`axis_rotation`].
    pub fn axis_rotation(n_ions: usize, axis: Axis) -> Result<Self> {
        match axis {
            Axis::X => Self::product_rotation(n_ions, Axis::Y, std::f64::consts::FRAC_PI_2),
            Axis::Y => Self::product_rotation(n_ions, Axis::X, -std::f64::consts::FRAC_PI_2),
            Axis::Z => Self::new(n_ions, DMatrix::identity(1 << n_ions, 1 << n_ions)),
        }
    }

    /// Product of `sigma_z` over all sites.
    pub fn parity(n_ions: usize) -> Result<Self> {
        let d = full_dim(n_ions)?;
        let diag = DVector::from_fn(d, |k, _| {
            let down = n_ions as u32 - k.count_ones();
            C64::new(if down % 2 == 0 { 1.0 } else { -1.0 }, 0.0)
        });
        Self::new(n_ions, DMatrix::from_diagonal(&diag))
    }

    pub fn n_ions(&self) -> usize {
        self.n_ions
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    /// Conjugate by the qubit swap `i <-> j`.
    pub fn swap_qubits(&self, i: usize, j: usize) -> Self {
        let d = self.matrix.nrows();
        let perm: Vec<usize> = (0..d).map(|k| swap_bits(k, i, j)).collect();
        let matrix = DMatrix::from_fn(d, d, |r, c| self.matrix[(perm[r], perm[c])]);
        Self {
            n_ions: self.n_ions,
            matrix,
        }
    }
}

fn swap_bits(k: usize, i: usize, j: usize) -> usize {
    let (bi, bj) = ((k >> i) & 1, (k >> j) & 1);
    if bi == bj {
        k
    } else {
        k ^ ((1 << i) | (1 << j))
    }
}

fn full_dim(n_ions: usize) -> Result<usize> {
    if n_ions == 0 {
        return Err(Error::Domain("ion number must be positive".into()));
    }
    if n_ions > MAX_FULL_SPACE_IONS {
        return Err(Error::Resource(format!(
            "full qubit space limited to {MAX_FULL_SPACE_IONS} ions, got {n_ions}"
        )));
    }
    Ok(1 << n_ions)
}

/// Columns are the symmetric Dicke states `|D^m>` written in the 2^N space.
pub fn symmetric_isometry(n_ions: usize) -> Result<DMatrix<C64>> {
    let d = full_dim(n_ions)?;
    let mut v = DMatrix::<C64>::zeros(d, n_ions + 1);
    for m in 0..=n_ions {
        let amp = 1.0 / binomial(n_ions, m).sqrt();
        for k in (0..d).filter(|k| k.count_ones() as usize == m) {
            v[(k, m)] = C64::new(amp, 0.0);
        }
    }
    Ok(v)
}

/// Brute-force collective operator in the 2^N space together with the
/// symmetric-sector isometry.
#[derive(Clone, Debug)]
pub struct FullSpaceOracle {
    pub operator: FullSpaceOperator,
    pub isometry: DMatrix<C64>,
}

impl FullSpaceOracle {
    /// `V^dagger M V`: the operator restricted to the symmetric sector.
    pub fn project(&self) -> DMatrix<C64> {
        self.isometry.adjoint() * self.operator.matrix() * &self.isometry
    }
}

pub fn full_space_oracle(n_ions: usize, which: Collective) -> Result<FullSpaceOracle> {
    Ok(FullSpaceOracle {
        operator: FullSpaceOperator::collective(n_ions, which)?,
        isometry: symmetric_isometry(n_ions)?,
    })
}

pub(crate) fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}
