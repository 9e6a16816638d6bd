//! Parameter records and Hamiltonian builders for the two-qubit Rabi,
//! Jaynes–Cummings and multimode families.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fockalg::{eigh, embed_modes as embed, local, BasisDescriptor, CMatrix, Operator, C64};

/// Dimensions above this trigger a warning; dense storage gets expensive.
pub const DENSE_WARN_DIM: usize = 4000;
/// Hard limit on the dense Hilbert-space dimension.
pub const DENSE_MAX_DIM: usize = 16_384;
/// Relative tolerance for the equal-frequency and coupling-ratio checks.
pub const TRANSFORM_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Aqrm2Params {
    #[serde(default = "unit")]
    pub omega: f64,
    pub delta1: f64,
    pub delta2: f64,
    pub g1: f64,
    pub g2: f64,
    pub eps1: f64,
    pub eps2: f64,
}

impl Default for Aqrm2Params {
    fn default() -> Self {
        Self {
            omega: 1.0,
            delta1: 0.0,
            delta2: 0.0,
            g1: 0.0,
            g2: 0.0,
            eps1: 0.0,
            eps2: 0.0,
        }
    }
}

impl Aqrm2Params {
    pub fn validate(&self) -> Result<()> {
        check_omega(self.omega)?;
        check_finite(&[self.delta1, self.delta2, self.g1, self.g2, self.eps1, self.eps2])
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Jc2Params {
    #[serde(default = "unit")]
    pub omega: f64,
    pub delta1: f64,
    pub delta2: f64,
    pub g1: f64,
    pub g2: f64,
}

impl Default for Jc2Params {
    fn default() -> Self {
        Self {
            omega: 1.0,
            delta1: 0.0,
            delta2: 0.0,
            g1: 0.0,
            g2: 0.0,
        }
    }
}

impl Jc2Params {
    pub fn validate(&self) -> Result<()> {
        check_omega(self.omega)?;
        check_finite(&[self.delta1, self.delta2, self.g1, self.g2])
    }

    /// Photon detunings `δ_i = 2Δ_i − ω`.
    pub fn detunings(&self) -> (f64, f64) {
        (2.0 * self.delta1 - self.omega, 2.0 * self.delta2 - self.omega)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MultimodeParams {
    pub omegas: Vec<f64>,
    pub g_col1: Vec<f64>,
    pub g_col2: Vec<f64>,
    pub delta1: f64,
    pub delta2: f64,
    pub eps1: f64,
    pub eps2: f64,
}

impl MultimodeParams {
    pub fn mode_count(&self) -> usize {
        self.omegas.len()
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.omegas.len();
        if m < 2 {
            return Err(Error::InvalidArgument(format!("multimode model needs at least 2 modes, got {m}")));
        }
        if self.g_col1.len() != m || self.g_col2.len() != m {
            return Err(Error::InvalidArgument(format!(
                "coupling columns have lengths {} and {}, expected {m}",
                self.g_col1.len(),
                self.g_col2.len()
            )));
        }
        for &w in &self.omegas {
            check_omega(w)?;
        }
        check_finite(&self.g_col1)?;
        check_finite(&self.g_col2)?;
        check_finite(&[self.delta1, self.delta2, self.eps1, self.eps2])
    }

    /// Frequency and effective collective couplings `(ω, g_b1, g_b2)` of the
    /// Bogoliubov-rotated model. Requires equal frequencies and proportional
    /// coupling columns. The collective mode is aligned with column 1 (column 2
    /// when column 1 vanishes); `g_b2` keeps the sign of the column ratio.
    pub fn collective_couplings(&self) -> Result<(f64, f64, f64)> {
        self.validate()?;
        let omega = self.omegas[0];
        if let Some(w) = self
            .omegas
            .iter()
            .find(|&&w| (w - omega).abs() > TRANSFORM_TOL * omega.abs().max(1.0))
        {
            return Err(Error::ParameterCondition(format!(
                "mode frequencies must be equal for the Bogoliubov transform (found {omega} and {w})"
            )));
        }
        let scale = self
            .g_col1
            .iter()
            .chain(&self.g_col2)
            .fold(0.0f64, |m, g| m.max(g.abs()));
        let scale2 = (scale * scale).max(1.0);
        let m = self.mode_count();
        for i in 0..m {
            for k in (i + 1)..m {
                let cross = self.g_col1[i] * self.g_col2[k] - self.g_col2[i] * self.g_col1[k];
                if cross.abs() > TRANSFORM_TOL * scale2 {
                    return Err(Error::ParameterCondition(format!(
                        "coupling ratio condition g_{{{i}1}}/g_{{{k}1}} = g_{{{i}2}}/g_{{{k}2}} violated \
                         (cross product {cross:.3e})"
                    )));
                }
            }
        }
        let norm1 = self.g_col1.iter().map(|g| g * g).sum::<f64>().sqrt();
        let norm2 = self.g_col2.iter().map(|g| g * g).sum::<f64>().sqrt();
        if norm1 > 0.0 {
            let proj: f64 = self.g_col1.iter().zip(&self.g_col2).map(|(a, b)| a * b).sum();
            Ok((omega, norm1, proj / norm1))
        } else {
            Ok((omega, 0.0, norm2))
        }
    }
}

fn unit() -> f64 {
    1.0
}

fn check_omega(omega: f64) -> Result<()> {
    if omega.is_finite() && omega > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("cavity frequency must be positive and finite, got {omega}")))
    }
}

fn check_finite(values: &[f64]) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidArgument("model parameters must be finite".into()))
    }
}

/// Validates Hamiltonian cutoffs (each at least 2) and the dense size limit.
pub fn hamiltonian_basis(cutoffs: &[usize]) -> Result<BasisDescriptor> {
    if let Some(&n) = cutoffs.iter().find(|&&n| n < 2) {
        return Err(Error::InvalidTruncation(format!(
            "Hamiltonian cutoffs must be at least 2, got {n}"
        )));
    }
    let dim = cutoffs
        .iter()
        .try_fold(4usize, |acc, &n| acc.checked_mul(n + 1))
        .unwrap_or(usize::MAX);
    if dim > DENSE_MAX_DIM {
        return Err(Error::DimensionOverflow {
            dim,
            limit: DENSE_MAX_DIM,
        });
    }
    if dim > DENSE_WARN_DIM {
        log::warn!("dense Hamiltonian of dimension {dim} exceeds {DENSE_WARN_DIM}");
    }
    BasisDescriptor::two_qubit(cutoffs)
}

/// Two-qubit operators on the 4-dimensional qubit block.
struct QubitOps {
    s1x: CMatrix,
    s2x: CMatrix,
    s1z: CMatrix,
    s2z: CMatrix,
    s1m: CMatrix,
    s2m: CMatrix,
}

impl QubitOps {
    fn new() -> Self {
        let id = CMatrix::identity(2, 2);
        let on1 = |m: CMatrix| m.kronecker(&id);
        let on2 = |m: CMatrix| id.kronecker(&m);
        Self {
            s1x: on1(local::sigma_x()),
            s2x: on2(local::sigma_x()),
            s1z: on1(local::sigma_z()),
            s2z: on2(local::sigma_z()),
            s1m: on1(local::sigma_minus()),
            s2m: on2(local::sigma_minus()),
        }
    }
}

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn qubit_static(q: &QubitOps, delta1: f64, delta2: f64, eps1: f64, eps2: f64) -> CMatrix {
    &q.s1z * c(delta1) + &q.s2z * c(delta2) + &q.s1x * c(eps1) + &q.s2x * c(eps2)
}

/// Two-qubit asymmetric Rabi Hamiltonian
/// `ωa†a + (g₁σ₁ₓ + g₂σ₂ₓ)(a†+a) + Δ₁σ₁_z + Δ₂σ₂_z + ε₁σ₁ₓ + ε₂σ₂ₓ`.
pub fn build_aqrm2(p: &Aqrm2Params, cutoff: usize) -> Result<Operator> {
    p.validate()?;
    let basis = hamiltonian_basis(&[cutoff])?;
    let q = QubitOps::new();
    let cut = [cutoff];
    let id4 = CMatrix::identity(4, 4);
    let coupling = &q.s1x * c(p.g1) + &q.s2x * c(p.g2);
    let h = embed(&cut, &[(0, &local::number(cutoff))], &id4) * c(p.omega)
        + embed(&cut, &[(0, &local::quadrature(cutoff))], &coupling)
        + embed(&cut, &[], &qubit_static(&q, p.delta1, p.delta2, p.eps1, p.eps2));
    Operator::new_hermitian(h, basis)
}

/// Two-qubit Jaynes–Cummings Hamiltonian `ωa†a + Σᵢ gᵢ(aσᵢ† + a†σᵢ) + Δᵢσᵢ_z`.
pub fn build_jc2(p: &Jc2Params, cutoff: usize) -> Result<Operator> {
    p.validate()?;
    let basis = hamiltonian_basis(&[cutoff])?;
    let q = QubitOps::new();
    let cut = [cutoff];
    let a = local::annihilation(cutoff);
    let ad = local::creation(cutoff);
    let id4 = CMatrix::identity(4, 4);
    let mut h = embed(&cut, &[(0, &local::number(cutoff))], &id4) * c(p.omega)
        + embed(&cut, &[], &qubit_static(&q, p.delta1, p.delta2, 0.0, 0.0));
    for (g, sm) in [(p.g1, &q.s1m), (p.g2, &q.s2m)] {
        let sp = sm.transpose();
        h += (embed(&cut, &[(0, &a)], &sp) + embed(&cut, &[(0, &ad)], sm)) * c(g);
    }
    Operator::new_hermitian(h, basis)
}

/// Multimode two-qubit Rabi Hamiltonian in the original mode basis.
pub fn build_multimode(p: &MultimodeParams, cutoffs: &[usize]) -> Result<Operator> {
    p.validate()?;
    if cutoffs.len() != p.mode_count() {
        return Err(Error::InvalidTruncation(format!(
            "{} cutoffs given for {} modes",
            cutoffs.len(),
            p.mode_count()
        )));
    }
    let basis = hamiltonian_basis(cutoffs)?;
    let q = QubitOps::new();
    let id4 = CMatrix::identity(4, 4);
    let mut h = embed(cutoffs, &[], &qubit_static(&q, p.delta1, p.delta2, p.eps1, p.eps2));
    for (i, &n) in cutoffs.iter().enumerate() {
        let coupling = &q.s1x * c(p.g_col1[i]) + &q.s2x * c(p.g_col2[i]);
        h += embed(cutoffs, &[(i, &local::number(n))], &id4) * c(p.omegas[i]);
        h += embed(cutoffs, &[(i, &local::quadrature(n))], &coupling);
    }
    Operator::new_hermitian(h, basis)
}

/// Multimode Hamiltonian after the Bogoliubov rotation, built directly in the
/// `b`-mode basis: the collective mode `b₁` (cutoff `cutoff`) couples to the
/// qubits and `b₂…b_M` (cutoffs `rest_cutoffs`) are free.
pub fn build_transformed_multimode(p: &MultimodeParams, cutoff: usize, rest_cutoffs: &[usize]) -> Result<Operator> {
    let (omega, gb1, gb2) = p.collective_couplings()?;
    if rest_cutoffs.len() + 1 != p.mode_count() {
        return Err(Error::InvalidTruncation(format!(
            "{} free-mode cutoffs given for {} modes",
            rest_cutoffs.len(),
            p.mode_count()
        )));
    }
    let cutoffs: Vec<usize> = std::iter::once(cutoff).chain(rest_cutoffs.iter().copied()).collect();
    let basis = hamiltonian_basis(&cutoffs)?;
    let q = QubitOps::new();
    let id4 = CMatrix::identity(4, 4);
    let coupling = &q.s1x * c(gb1) + &q.s2x * c(gb2);
    let mut h = embed(&cutoffs, &[], &qubit_static(&q, p.delta1, p.delta2, p.eps1, p.eps2))
        + embed(&cutoffs, &[(0, &local::quadrature(cutoff))], &coupling);
    for (j, &n) in cutoffs.iter().enumerate() {
        h += embed(&cutoffs, &[(j, &local::number(n))], &id4) * c(omega);
    }
    Operator::new_hermitian(h, basis)
}

/// Eigenvalues of the qubit block `Δ₁σ₁_z + Δ₂σ₂_z + ε₁σ₁ₓ + ε₂σ₂ₓ`, ascending.
pub fn qubit_block_spectrum(p: &Aqrm2Params) -> Result<[f64; 4]> {
    let q = QubitOps::new();
    let block = qubit_static(&q, p.delta1, p.delta2, p.eps1, p.eps2);
    let eig = eigh(&block)?;
    Ok([eig.values[0], eig.values[1], eig.values[2], eig.values[3]])
}

/// A model family together with its truncation. Couplings stored in the
/// parameters act as a profile: [`Model::with_coupling`] multiplies them.
#[derive(Clone, Debug, PartialEq)]
pub enum Model {
    Aqrm2 { params: Aqrm2Params, cutoff: usize },
    Jc2 { params: Jc2Params, cutoff: usize },
    Multimode { params: MultimodeParams, cutoffs: Vec<usize> },
    MultimodeTransformed {
        params: MultimodeParams,
        cutoff: usize,
        rest_cutoffs: Vec<usize>,
    },
}

impl Model {
    pub fn family(&self) -> &'static str {
        match self {
            Model::Aqrm2 { .. } => "aqrm2",
            Model::Jc2 { .. } => "jc2",
            Model::Multimode { .. } => "multimode",
            Model::MultimodeTransformed { .. } => "multimode_transformed",
        }
    }

    pub fn hamiltonian(&self) -> Result<Operator> {
        match self {
            Model::Aqrm2 { params, cutoff } => build_aqrm2(params, *cutoff),
            Model::Jc2 { params, cutoff } => build_jc2(params, *cutoff),
            Model::Multimode { params, cutoffs } => build_multimode(params, cutoffs),
            Model::MultimodeTransformed {
                params,
                cutoff,
                rest_cutoffs,
            } => build_transformed_multimode(params, *cutoff, rest_cutoffs),
        }
    }

    pub fn truncation(&self) -> Vec<usize> {
        match self {
            Model::Aqrm2 { cutoff, .. } | Model::Jc2 { cutoff, .. } => vec![*cutoff],
            Model::Multimode { cutoffs, .. } => cutoffs.clone(),
            Model::MultimodeTransformed {
                cutoff, rest_cutoffs, ..
            } => std::iter::once(*cutoff).chain(rest_cutoffs.iter().copied()).collect(),
        }
    }

    pub fn basis(&self) -> Result<BasisDescriptor> {
        hamiltonian_basis(&self.truncation())
    }

    pub fn omega(&self) -> f64 {
        match self {
            Model::Aqrm2 { params, .. } => params.omega,
            Model::Jc2 { params, .. } => params.omega,
            Model::Multimode { params, .. } | Model::MultimodeTransformed { params, .. } => {
                params.omegas.first().copied().unwrap_or(1.0)
            }
        }
    }

    /// Same model with every coupling multiplied by `g`.
    pub fn with_coupling(&self, g: f64) -> Model {
        let mut m = self.clone();
        match &mut m {
            Model::Aqrm2 { params, .. } => {
                params.g1 *= g;
                params.g2 *= g;
            }
            Model::Jc2 { params, .. } => {
                params.g1 *= g;
                params.g2 *= g;
            }
            Model::Multimode { params, .. } | Model::MultimodeTransformed { params, .. } => {
                params.g_col1.iter_mut().for_each(|x| *x *= g);
                params.g_col2.iter_mut().for_each(|x| *x *= g);
            }
        }
        m
    }

    /// Same model with every mode truncated at `cutoff`.
    pub fn with_cutoff(&self, n: usize) -> Model {
        let mut m = self.clone();
        match &mut m {
            Model::Aqrm2 { cutoff, .. } | Model::Jc2 { cutoff, .. } => *cutoff = n,
            Model::Multimode { cutoffs, .. } => cutoffs.iter_mut().for_each(|c| *c = n),
            Model::MultimodeTransformed {
                cutoff, rest_cutoffs, ..
            } => {
                *cutoff = n;
                rest_cutoffs.iter_mut().for_each(|c| *c = n);
            }
        }
        m
    }
}

/// Real part of a Hamiltonian; builders only produce real entries.
pub fn real_part(op: &Operator) -> DMatrix<f64> {
    op.matrix().map(|z| z.re)
}
