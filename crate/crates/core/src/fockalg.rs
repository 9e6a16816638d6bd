//! Dense operator algebra over truncated Fock ⊗ qubit spaces.
//!
//! Global ordering: mode occupations run slowest (row-major over
//! `(n_1, …, n_M)`), qubits run fastest. For two qubits the qubit block is
//! `{gg, ge, eg, ee}`, the first qubit's label varying slowest. Single-qubit
//! convention: index 0 is `|g⟩`, index 1 is `|e⟩`, `σ_z|e⟩ = +|e⟩`.

use nalgebra::{DMatrix, DVector, SymmetricEigen, SVD};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Default relative tolerance for [`nullspace`].
pub const NULLSPACE_TOL: f64 = 1e-10;
/// Default interior margin for commutator checks of photon-shifting operators.
pub const INTERIOR_MARGIN: usize = 2;
/// Hermiticity tolerance applied to operators flagged Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-14;

pub const GG: usize = 0;
pub const GE: usize = 1;
pub const EG: usize = 2;
pub const EE: usize = 3;

const EIG_EPS: f64 = 1e-15;
const EIG_MAX_ITER: usize = 0;

/// Two-qubit block index for the given excitation labels.
pub fn qubit_index(first_excited: bool, second_excited: bool) -> usize {
    2 * usize::from(first_excited) + usize::from(second_excited)
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BasisDescriptor {
    mode_truncations: Vec<usize>,
    qubit_count: usize,
}

impl BasisDescriptor {
    pub fn new(mode_truncations: Vec<usize>, qubit_count: usize) -> Result<Self> {
        if let Some(&n) = mode_truncations.iter().find(|&&n| n < 1) {
            return Err(Error::InvalidTruncation(format!(
                "photon cutoff must be at least 1, got {n}"
            )));
        }
        if qubit_count > 16 {
            return Err(Error::InvalidArgument(format!(
                "unsupported qubit count {qubit_count}"
            )));
        }
        Ok(Self {
            mode_truncations,
            qubit_count,
        })
    }

    pub fn two_qubit(cutoffs: &[usize]) -> Result<Self> {
        Self::new(cutoffs.to_vec(), 2)
    }

    pub fn single_mode(cutoff: usize) -> Result<Self> {
        Self::new(vec![cutoff], 0)
    }

    pub fn qubits_only(qubit_count: usize) -> Result<Self> {
        Self::new(Vec::new(), qubit_count)
    }

    pub fn mode_truncations(&self) -> &[usize] {
        &self.mode_truncations
    }

    pub fn qubit_count(&self) -> usize {
        self.qubit_count
    }

    pub fn mode_count(&self) -> usize {
        self.mode_truncations.len()
    }

    pub fn qubit_dim(&self) -> usize {
        1 << self.qubit_count
    }

    pub fn mode_dim(&self) -> usize {
        self.mode_truncations.iter().map(|n| n + 1).product()
    }

    pub fn dim(&self) -> usize {
        self.mode_dim() * self.qubit_dim()
    }

    pub fn min_cutoff(&self) -> Option<usize> {
        self.mode_truncations.iter().copied().min()
    }

    /// Dimensions of the tensor slots in order: one per mode, then one per qubit.
    pub fn slot_dims(&self) -> Vec<usize> {
        self.mode_truncations
            .iter()
            .map(|n| n + 1)
            .chain(std::iter::repeat_n(2, self.qubit_count))
            .collect()
    }

    pub fn index(&self, occupations: &[usize], qubit: usize) -> usize {
        debug_assert_eq!(occupations.len(), self.mode_truncations.len());
        debug_assert!(qubit < self.qubit_dim());
        let mode = occupations
            .iter()
            .zip(&self.mode_truncations)
            .fold(0, |acc, (&n, &cut)| {
                debug_assert!(n <= cut);
                acc * (cut + 1) + n
            });
        mode * self.qubit_dim() + qubit
    }

    /// Inverse of [`BasisDescriptor::index`].
    pub fn decompose(&self, index: usize) -> (Vec<usize>, usize) {
        let qubit = index % self.qubit_dim();
        let mut mode = index / self.qubit_dim();
        let mut occ = vec![0; self.mode_truncations.len()];
        for (slot, &cut) in occ.iter_mut().zip(&self.mode_truncations).rev() {
            *slot = mode % (cut + 1);
            mode /= cut + 1;
        }
        (occ, qubit)
    }

    /// Indices whose every mode occupation is at most `N_i - margin`.
    pub fn interior_indices(&self, margin: usize) -> Result<Vec<usize>> {
        if let Some(min_cutoff) = self.min_cutoff() {
            if margin >= min_cutoff {
                return Err(Error::InvalidMargin { margin, min_cutoff });
            }
        }
        Ok((0..self.dim())
            .filter(|&i| {
                let (occ, _) = self.decompose(i);
                occ.iter()
                    .zip(&self.mode_truncations)
                    .all(|(&n, &cut)| n + margin <= cut)
            })
            .collect())
    }

    fn ensure_same(&self, other: &Self) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::BasisMismatch)
        }
    }
}

#[derive(Clone, Debug)]
pub struct Operator {
    matrix: CMatrix,
    basis: BasisDescriptor,
    hermitian: bool,
}

impl Operator {
    /// Wraps a matrix without asserting Hermiticity.
    pub fn new(matrix: CMatrix, basis: BasisDescriptor) -> Result<Self> {
        check_square(&matrix, basis.dim())?;
        Ok(Self {
            matrix,
            basis,
            hermitian: false,
        })
    }

    /// Wraps a matrix and flags it Hermitian, rejecting it when
    /// `‖M − M†‖_max` exceeds [`HERMITIAN_TOL`] (relative to `max(1, ‖M‖_max)`).
    pub fn new_hermitian(matrix: CMatrix, basis: BasisDescriptor) -> Result<Self> {
        check_square(&matrix, basis.dim())?;
        let err = hermiticity_error(&matrix);
        let scale = max_abs(&matrix).max(1.0);
        if err > HERMITIAN_TOL * scale {
            return Err(Error::NotHermitian);
        }
        Ok(Self {
            matrix,
            basis,
            hermitian: true,
        })
    }

    pub fn from_real(matrix: &DMatrix<f64>, basis: BasisDescriptor, hermitian: bool) -> Result<Self> {
        let m = matrix.map(|x| C64::new(x, 0.0));
        if hermitian {
            Self::new_hermitian(m, basis)
        } else {
            Self::new(m, basis)
        }
    }

    pub fn identity(basis: &BasisDescriptor) -> Self {
        Self {
            matrix: CMatrix::identity(basis.dim(), basis.dim()),
            basis: basis.clone(),
            hermitian: true,
        }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn basis(&self) -> &BasisDescriptor {
        &self.basis
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.matrix)
    }

    pub fn max_imag(&self) -> f64 {
        self.matrix.iter().fold(0.0, |m, z| m.max(z.im.abs()))
    }

    pub fn hermiticity_error(&self) -> f64 {
        hermiticity_error(&self.matrix)
    }

    pub fn is_diagonal(&self) -> bool {
        let n = self.dim();
        (0..n).all(|c| (0..n).all(|r| r == c || self.matrix[(r, c)] == C64::new(0.0, 0.0)))
    }

    pub fn diagonal(&self) -> Vec<C64> {
        self.matrix.diagonal().iter().copied().collect()
    }

    pub fn adjoint(&self) -> Self {
        Self {
            matrix: self.matrix.adjoint(),
            basis: self.basis.clone(),
            hermitian: self.hermitian,
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            matrix: &self.matrix * C64::new(factor, 0.0),
            basis: self.basis.clone(),
            hermitian: self.hermitian,
        }
    }

    pub fn plus(&self, other: &Self) -> Result<Self> {
        self.basis.ensure_same(&other.basis)?;
        Ok(Self {
            matrix: &self.matrix + &other.matrix,
            basis: self.basis.clone(),
            hermitian: self.hermitian && other.hermitian,
        })
    }

    pub fn minus(&self, other: &Self) -> Result<Self> {
        self.plus(&other.scaled(-1.0))
    }

    pub fn product(&self, other: &Self) -> Result<Self> {
        self.basis.ensure_same(&other.basis)?;
        Ok(Self {
            matrix: &self.matrix * &other.matrix,
            basis: self.basis.clone(),
            hermitian: false,
        })
    }

    /// `[self, other] = self·other − other·self`.
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.basis.ensure_same(&other.basis)?;
        Ok(Self {
            matrix: &self.matrix * &other.matrix - &other.matrix * &self.matrix,
            basis: self.basis.clone(),
            hermitian: false,
        })
    }

    pub fn apply(&self, psi: &StateVector) -> Result<CVector> {
        self.basis.ensure_same(&psi.basis)?;
        Ok(&self.matrix * &psi.amplitudes)
    }

    /// `⟨ψ|O|ψ⟩` for a normalized state.
    pub fn expectation(&self, psi: &StateVector) -> Result<C64> {
        let applied = self.apply(psi)?;
        Ok(psi.amplitudes.dotc(&applied))
    }

    /// Principal submatrix on the given global indices.
    pub fn restrict(&self, indices: &[usize]) -> CMatrix {
        restrict(&self.matrix, indices)
    }
}

fn check_square(matrix: &CMatrix, dim: usize) -> Result<()> {
    if matrix.nrows() != dim || matrix.ncols() != dim {
        return Err(Error::DimensionMismatch(format!(
            "matrix is {}x{}, basis dimension is {dim}",
            matrix.nrows(),
            matrix.ncols()
        )));
    }
    Ok(())
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn hermiticity_error(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut err: f64 = 0.0;
    for c in 0..n {
        for r in c..n {
            err = err.max((m[(r, c)] - m[(c, r)].conj()).norm());
        }
    }
    err
}

pub fn restrict(m: &CMatrix, indices: &[usize]) -> CMatrix {
    CMatrix::from_fn(indices.len(), indices.len(), |r, c| m[(indices[r], indices[c])])
}

#[derive(Clone, Debug)]
pub struct StateVector {
    amplitudes: CVector,
    basis: BasisDescriptor,
    label: String,
}

impl StateVector {
    pub fn new(amplitudes: CVector, basis: BasisDescriptor, label: impl Into<String>) -> Result<Self> {
        if amplitudes.len() != basis.dim() {
            return Err(Error::DimensionMismatch(format!(
                "state has {} amplitudes, basis dimension is {}",
                amplitudes.len(),
                basis.dim()
            )));
        }
        Ok(Self {
            amplitudes,
            basis,
            label: label.into(),
        })
    }

    /// Builds and normalizes a state; a zero vector is rejected.
    pub fn normalized(amplitudes: CVector, basis: BasisDescriptor, label: impl Into<String>) -> Result<Self> {
        let norm = amplitudes.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::InvalidArgument("cannot normalize a zero state".into()));
        }
        Self::new(amplitudes / C64::new(norm, 0.0), basis, label)
    }

    /// Normalized state from sparse real components `(global index, amplitude)`.
    pub fn from_components(
        basis: BasisDescriptor,
        components: &[(usize, f64)],
        label: impl Into<String>,
    ) -> Result<Self> {
        let mut amps = CVector::zeros(basis.dim());
        for &(i, a) in components {
            if i >= basis.dim() {
                return Err(Error::DimensionMismatch(format!(
                    "component index {i} outside dimension {}",
                    basis.dim()
                )));
            }
            amps[i] += C64::new(a, 0.0);
        }
        Self::normalized(amps, basis, label)
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn basis(&self) -> &BasisDescriptor {
        &self.basis
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    /// `⟨self|other⟩`.
    pub fn overlap(&self, other: &Self) -> Result<C64> {
        self.basis.ensure_same(&other.basis)?;
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    /// Lifts the state into a basis with the same structure and cutoffs at
    /// least as large. Amplitudes are copied by occupation labels.
    pub fn embed(&self, target: &BasisDescriptor) -> Result<Self> {
        let src = &self.basis;
        let compatible = src.qubit_count == target.qubit_count
            && src.mode_count() == target.mode_count()
            && src
                .mode_truncations
                .iter()
                .zip(&target.mode_truncations)
                .all(|(s, t)| t >= s);
        if !compatible {
            return Err(Error::BasisMismatch);
        }
        let mut amps = CVector::zeros(target.dim());
        for (i, a) in self.amplitudes.iter().enumerate() {
            let (occ, q) = src.decompose(i);
            amps[target.index(&occ, q)] = *a;
        }
        Self::new(amps, target.clone(), self.label.clone())
    }
}

/// Slot factor for [`tensor`].
#[derive(Clone, Debug)]
pub enum Factor {
    Identity,
    Matrix(CMatrix),
}

/// Kronecker product of per-slot factors following the global ordering
/// (modes first, then qubits).
pub fn tensor(basis: &BasisDescriptor, factors: &[Factor]) -> Result<Operator> {
    let dims = basis.slot_dims();
    if factors.len() != dims.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} factors supplied for {} tensor slots",
            factors.len(),
            dims.len()
        )));
    }
    let mut mats = Vec::with_capacity(dims.len());
    let mut hermitian = true;
    for (slot, (factor, &d)) in factors.iter().zip(&dims).enumerate() {
        match factor {
            Factor::Identity => mats.push(CMatrix::identity(d, d)),
            Factor::Matrix(m) => {
                if m.nrows() != d || m.ncols() != d {
                    return Err(Error::DimensionMismatch(format!(
                        "slot {slot} expects {d}x{d}, got {}x{}",
                        m.nrows(),
                        m.ncols()
                    )));
                }
                hermitian &= hermiticity_error(m) == 0.0;
                mats.push(m.clone());
            }
        }
    }
    let matrix = kron_all(&mats);
    Ok(Operator {
        matrix,
        basis: basis.clone(),
        hermitian,
    })
}

pub fn kron_all(mats: &[CMatrix]) -> CMatrix {
    mats.iter()
        .fold(CMatrix::identity(1, 1), |acc, m| acc.kronecker(m))
}

/// `(⊗ᵢ modeᵢ) ⊗ qubit`, identity on every mode not listed.
pub fn embed_modes(cutoffs: &[usize], mode_ops: &[(usize, &CMatrix)], qubit: &CMatrix) -> CMatrix {
    let mut mats: Vec<CMatrix> = cutoffs.iter().map(|&n| CMatrix::identity(n + 1, n + 1)).collect();
    for &(i, m) in mode_ops {
        mats[i] = m.clone();
    }
    mats.push(qubit.clone());
    kron_all(&mats)
}

/// Single-slot building blocks.
pub mod local {
    use super::{C64, CMatrix};

    /// `a` on a mode with cutoff `n`: `⟨k−1|a|k⟩ = √k`.
    pub fn annihilation(n: usize) -> CMatrix {
        let mut m = CMatrix::zeros(n + 1, n + 1);
        for k in 1..=n {
            m[(k - 1, k)] = C64::new((k as f64).sqrt(), 0.0);
        }
        m
    }

    pub fn creation(n: usize) -> CMatrix {
        annihilation(n).transpose()
    }

    pub fn number(n: usize) -> CMatrix {
        CMatrix::from_diagonal(&nalgebra::DVector::from_fn(n + 1, |k, _| C64::new(k as f64, 0.0)))
    }

    /// `a + a†`.
    pub fn quadrature(n: usize) -> CMatrix {
        let a = annihilation(n);
        &a + a.transpose()
    }

    /// `exp(iπ a†a)`.
    pub fn photon_parity(n: usize) -> CMatrix {
        CMatrix::from_diagonal(&nalgebra::DVector::from_fn(n + 1, |k, _| {
            C64::new(if k % 2 == 0 { 1.0 } else { -1.0 }, 0.0)
        }))
    }

    pub fn sigma_x() -> CMatrix {
        real2([[0.0, 1.0], [1.0, 0.0]])
    }

    /// `σ_z` with `σ_z|e⟩ = +|e⟩`, `σ_z|g⟩ = −|g⟩`.
    pub fn sigma_z() -> CMatrix {
        real2([[-1.0, 0.0], [0.0, 1.0]])
    }

    /// Lowering `σ = |g⟩⟨e|`.
    pub fn sigma_minus() -> CMatrix {
        real2([[0.0, 1.0], [0.0, 0.0]])
    }

    /// Raising `σ† = |e⟩⟨g|`.
    pub fn sigma_plus() -> CMatrix {
        real2([[0.0, 0.0], [1.0, 0.0]])
    }

    fn real2(rows: [[f64; 2]; 2]) -> CMatrix {
        CMatrix::from_fn(2, 2, |r, c| C64::new(rows[r][c], 0.0))
    }
}

/// Photon annihilation operator on a single mode with cutoff `n`.
pub fn annihilation_op(n: usize) -> Result<Operator> {
    if n < 1 {
        return Err(Error::InvalidTruncation(format!(
            "photon cutoff must be at least 1, got {n}"
        )));
    }
    Operator::new(local::annihilation(n), BasisDescriptor::single_mode(n)?)
}

#[derive(Clone, Debug)]
pub struct Eigensystem {
    /// Ascending eigenvalues.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors as columns, aligned with `values`.
    pub vectors: CMatrix,
}

impl Eigensystem {
    pub fn vector(&self, k: usize) -> CVector {
        self.vectors.column(k).into_owned()
    }
}

/// Full eigendecomposition of an operator flagged Hermitian.
pub fn eig_hermitian(h: &Operator) -> Result<Eigensystem> {
    if !h.is_hermitian() {
        return Err(Error::NotHermitian);
    }
    eigh(h.matrix())
}

/// Eigendecomposition of a Hermitian matrix (the upper triangle is trusted).
/// Real-valued input takes the real symmetric path.
pub fn eigh(m: &CMatrix) -> Result<Eigensystem> {
    let n = m.nrows();
    if n == 0 {
        return Ok(Eigensystem {
            values: Vec::new(),
            vectors: CMatrix::zeros(0, 0),
        });
    }
    let (values, vectors) = if m.iter().all(|z| z.im == 0.0) {
        let re = m.map(|z| z.re);
        let eig = SymmetricEigen::try_new(re, EIG_EPS, EIG_MAX_ITER)
            .ok_or_else(|| Error::Numerical("symmetric eigensolver did not converge".into()))?;
        (eig.eigenvalues, eig.eigenvectors.map(|x| C64::new(x, 0.0)))
    } else {
        let eig = SymmetricEigen::try_new(m.clone(), EIG_EPS, EIG_MAX_ITER)
            .ok_or_else(|| Error::Numerical("Hermitian eigensolver did not converge".into()))?;
        (eig.eigenvalues, eig.eigenvectors)
    };
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let sorted_values = order.iter().map(|&k| values[k]).collect();
    let sorted_vectors = CMatrix::from_fn(n, n, |r, c| vectors[(r, order[c])]);
    Ok(Eigensystem {
        values: sorted_values,
        vectors: sorted_vectors,
    })
}

/// Ascending eigenvalues of a Hermitian matrix, without eigenvectors.
pub fn eigvalsh(m: &CMatrix) -> Vec<f64> {
    let mut values: Vec<f64> = if m.iter().all(|z| z.im == 0.0) {
        m.map(|z| z.re).symmetric_eigenvalues().iter().copied().collect()
    } else {
        m.symmetric_eigenvalues().iter().copied().collect()
    };
    values.sort_by(f64::total_cmp);
    values
}

/// Max-norm of `[A, B]` restricted to rows and columns whose mode occupations
/// are all at most `N_i − margin`.
pub fn commutator_interior_norm(a: &Operator, b: &Operator, margin: usize) -> Result<f64> {
    let comm = a.commutator(b)?;
    let interior = a.basis().interior_indices(margin)?;
    let mut norm: f64 = 0.0;
    for &c in &interior {
        for &r in &interior {
            norm = norm.max(comm.matrix[(r, c)].norm());
        }
    }
    Ok(norm)
}

/// Orthonormal basis of `{v : ‖Mv‖ < tol·‖M‖₂}` via the singular value
/// decomposition. A zero matrix yields the full column space.
pub fn nullspace(m: &CMatrix, tol: f64) -> Vec<CVector> {
    let (rows, cols) = m.shape();
    if cols == 0 {
        return Vec::new();
    }
    // Pad wide matrices so the SVD returns a full set of right singular vectors.
    let padded;
    let work = if rows < cols {
        padded = {
            let mut p = CMatrix::zeros(cols, cols);
            p.view_mut((0, 0), (rows, cols)).copy_from(m);
            p
        };
        &padded
    } else {
        m
    };
    let svd = SVD::new(work.clone(), false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let sigma = &svd.singular_values;
    let largest = sigma.iter().fold(0.0f64, |a, &s| a.max(s));
    let cutoff = tol * largest;
    sigma
        .iter()
        .enumerate()
        .filter(|&(_, &s)| largest == 0.0 || s < cutoff)
        .map(|(k, _)| v_t.row(k).adjoint())
        .collect()
}
