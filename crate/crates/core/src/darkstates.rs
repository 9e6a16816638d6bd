//! Finite-photon dark states: closed-form constructors, the bias condition,
//! the one-photon ansatz solver and residual checks.
//!
//! Closed forms are evaluated in units of the cavity frequency (`ω = 1`) and
//! the resulting state is an eigenvector of the unscaled Hamiltonian with
//! energy `ω` (or `(N+1)ω` for the Jaynes–Cummings ladder).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fockalg::{
    nullspace, BasisDescriptor, CVector, Operator, StateVector, C64, EE, EG, GE, GG, NULLSPACE_TOL,
};
use crate::models::{build_aqrm2, hamiltonian_basis, Aqrm2Params, Jc2Params, MultimodeParams};

/// Absolute tolerance on parameter identities (bias condition, resonance,
/// branch relations).
pub const PARAM_TOL: f64 = 1e-10;
const DENOMINATOR_TOL: f64 = 1e-12;

/// Relative sign between the two qubits' couplings: `g₂ = ±g₁`, `ε₂ = ±ε₁`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Branch {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Branch::Plus => "+",
            Branch::Minus => "-",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Construction {
    ClosedForm,
    Nullspace,
}

#[derive(Clone, Debug)]
pub struct DarkStateResult {
    pub state: StateVector,
    pub energy: f64,
    /// `None` for nullspace states whose couplings match neither branch.
    pub branch: Option<Branch>,
    pub construction: Construction,
}

/// `[Δ₁⁴ + (Δ₂² − 1)² − 2Δ₁²(1 + Δ₂²)] / 4` in units of `ω`.
pub fn epsilon_condition_expression(delta1: f64, delta2: f64) -> f64 {
    let d1sq = delta1 * delta1;
    let d2sq = delta2 * delta2;
    (d1sq * d1sq + (d2sq - 1.0) * (d2sq - 1.0) - 2.0 * d1sq * (1.0 + d2sq)) / 4.0
}

/// Bias `ε ≥ 0` for which the one-photon dark state exists (units of `ω`).
pub fn epsilon_condition(delta1: f64, delta2: f64) -> Result<f64> {
    let value = epsilon_condition_expression(delta1, delta2);
    if value < 0.0 || !value.is_finite() {
        return Err(Error::NoDarkBias { value });
    }
    Ok(value.sqrt())
}

fn check_close(what: &str, actual: f64, expected: f64) -> Result<()> {
    if (actual - expected).abs() <= PARAM_TOL {
        Ok(())
    } else {
        Err(Error::ParameterCondition(format!(
            "{what}: expected {expected}, got {actual}"
        )))
    }
}

fn check_denominator(what: &str, value: f64) -> Result<()> {
    if value.abs() > DENOMINATOR_TOL {
        Ok(())
    } else {
        Err(Error::SingularDenominator(format!("{what} vanishes")))
    }
}

/// Amplitudes of the biased one-photon dark state, indexed `[n][qubit]` for
/// `n ∈ {0, 1}`, all quantities in units of `ω`. `g` multiplies the one-photon
/// part. The lower branch is the `σ₂_z` image of the upper one.
fn closed_form_amplitudes(d1: f64, d2: f64, g: f64, eps: f64, branch: Branch) -> Result<[[f64; 4]; 2]> {
    let b = branch.sign();
    let d = d1 - d2;
    let s = d1 + d2;
    let mut amp = [[0.0; 4]; 2];
    if d.abs() <= PARAM_TOL {
        // Δ₁ = Δ₂: every term but the spin singlet carries a factor Δ₁ − Δ₂
        amp[1][EG] = 1.0;
        amp[1][GE] = -b;
        return Ok(amp);
    }
    let required = epsilon_condition(d1, d2)?;
    if (eps - required).abs() > PARAM_TOL {
        return Err(Error::ParameterCondition(format!(
            "epsilon does not satisfy the dark-state condition: eps1/omega = {eps}, required {required}"
        )));
    }
    let den_minus = d - 1.0;
    let den_plus = 1.0 + d;
    let den_mix = d1 + d1 * d1 + d2 - d2 * d2;
    check_denominator("-1 + delta1 - delta2", den_minus)?;
    check_denominator("1 + delta1 - delta2", den_plus)?;
    check_denominator("delta1 + delta1^2 + delta2 - delta2^2", den_mix)?;

    amp[0][GG] = d * (s - 1.0) / 2.0;
    amp[0][EE] = -b * d * (1.0 + s) / 2.0;
    amp[0][EG] = eps * d / den_minus;
    amp[0][GE] = -b * eps * d / den_plus;

    let mix = 2.0 * eps * d / (den_minus * den_mix);
    amp[1][EG] = g;
    amp[1][GE] = -b * g;
    amp[1][GG] = mix * g;
    amp[1][EE] = -b * mix * g;
    Ok(amp)
}

fn check_branch(g1: f64, g2: f64, eps1: f64, eps2: f64, branch: Branch) -> Result<()> {
    let b = branch.sign();
    check_close(&format!("branch {}: g2 = {}g1", branch.symbol(), branch.symbol()), g2, b * g1)?;
    check_close(
        &format!("branch {}: eps2 = {}eps1", branch.symbol(), branch.symbol()),
        eps2,
        b * eps1,
    )
}

/// One-photon dark state of the biased two-qubit Rabi model with energy `ω`.
///
/// Requires `g₂ = ±g₁`, `ε₂ = ±ε₁` and `ε₁` on the bias condition, except for
/// `Δ₁ = Δ₂` where the spin singlet `|1⟩(|e,g⟩ ∓ |g,e⟩)/√2` is returned for
/// any bias.
pub fn dark_state_aqrm2(p: &Aqrm2Params, branch: Branch, cutoff: usize) -> Result<DarkStateResult> {
    p.validate()?;
    let basis = hamiltonian_basis(&[cutoff])?;
    check_branch(p.g1, p.g2, p.eps1, p.eps2, branch)?;
    let w = p.omega;
    let amp = closed_form_amplitudes(p.delta1 / w, p.delta2 / w, p.g1 / w, p.eps1 / w, branch)?;
    let mut comps = Vec::with_capacity(8);
    for (n, row) in amp.iter().enumerate() {
        for (q, &a) in row.iter().enumerate() {
            comps.push((basis.index(&[n], q), a));
        }
    }
    let state = StateVector::from_components(basis, &comps, format!("aqrm2-dark{}", branch.symbol()))?;
    Ok(DarkStateResult {
        state,
        energy: w,
        branch: Some(branch),
        construction: Construction::ClosedForm,
    })
}

/// Unbiased dark state `(Δ₁−Δ₂)|0,e,e⟩ + g|1⟩(|g,e⟩ ∓ |e,g⟩)` for `Δ₁+Δ₂ = ω`.
pub fn dark_state_aqrm2_unbiased(p: &Aqrm2Params, branch: Branch, cutoff: usize) -> Result<DarkStateResult> {
    p.validate()?;
    let basis = hamiltonian_basis(&[cutoff])?;
    check_close("unbiased dark state: eps1", p.eps1, 0.0)?;
    check_close("unbiased dark state: eps2", p.eps2, 0.0)?;
    check_close("unbiased dark state: delta1 + delta2 = omega", p.delta1 + p.delta2, p.omega)?;
    check_branch(p.g1, p.g2, 0.0, 0.0, branch)?;
    let b = branch.sign();
    let comps = [
        (basis.index(&[0], EE), p.delta1 - p.delta2),
        (basis.index(&[1], GE), p.g1),
        (basis.index(&[1], EG), -b * p.g1),
    ];
    let state = StateVector::from_components(basis, &comps, format!("aqrm2-unbiased-dark{}", branch.symbol()))
        .map_err(|_| Error::ParameterCondition("unbiased dark state vanishes for delta1 = delta2 and g = 0".into()))?;
    Ok(DarkStateResult {
        state,
        energy: p.omega,
        branch: Some(branch),
        construction: Construction::ClosedForm,
    })
}

fn check_resonance(p: &Jc2Params) -> Result<()> {
    check_close("resonance delta1 + delta2 = omega", p.delta1 + p.delta2, p.omega)
}

/// Jaynes–Cummings ladder state `√(N+2)|N,e,e⟩ − √(N+1)|N+2,g,g⟩` with energy
/// `(N+1)ω`, in the excitation sector `C = N+2`.
///
/// The two components cancel the `|N+1⟩` population only for `g₁ = g₂`, which
/// is enforced together with `Δ₁ + Δ₂ = ω`.
pub fn jc_dark_state(n_exc: usize, p: &Jc2Params, cutoff: usize) -> Result<DarkStateResult> {
    p.validate()?;
    check_resonance(p)?;
    check_close("ladder dark state requires g2 = g1", p.g2, p.g1)?;
    let state = jc_ladder_vector(n_exc, cutoff)?;
    Ok(DarkStateResult {
        state,
        energy: (n_exc as f64 + 1.0) * p.omega,
        branch: None,
        construction: Construction::ClosedForm,
    })
}

/// Normalized `√(N+2)|N,e,e⟩ − √(N+1)|N+2,g,g⟩` without parameter checks.
pub fn jc_ladder_vector(n_exc: usize, cutoff: usize) -> Result<StateVector> {
    if cutoff < n_exc + 2 {
        return Err(Error::InvalidTruncation(format!(
            "cutoff {cutoff} cannot hold |{}⟩",
            n_exc + 2
        )));
    }
    let basis = hamiltonian_basis(&[cutoff])?;
    let n = n_exc as f64;
    let comps = [
        (basis.index(&[n_exc], EE), (n + 2.0).sqrt()),
        (basis.index(&[n_exc + 2], GG), -(n + 1.0).sqrt()),
    ];
    StateVector::from_components(basis, &comps, format!("jc-dark-{n_exc}"))
}

/// `(Δ₁−Δ₂)|N,e,e⟩ + √(N+1)g|N+1⟩(|g,e⟩ ∓ |e,g⟩)` with energy `(N+1)ω`.
pub fn jc_dark_state_mixed(n_exc: usize, p: &Jc2Params, branch: Branch, cutoff: usize) -> Result<DarkStateResult> {
    p.validate()?;
    check_resonance(p)?;
    check_branch(p.g1, p.g2, 0.0, 0.0, branch)?;
    if cutoff < n_exc + 1 {
        return Err(Error::InvalidTruncation(format!(
            "cutoff {cutoff} cannot hold |{}⟩",
            n_exc + 1
        )));
    }
    let basis = hamiltonian_basis(&[cutoff])?;
    let b = branch.sign();
    let lift = ((n_exc + 1) as f64).sqrt() * p.g1;
    let comps = [
        (basis.index(&[n_exc], EE), p.delta1 - p.delta2),
        (basis.index(&[n_exc + 1], GE), lift),
        (basis.index(&[n_exc + 1], EG), -b * lift),
    ];
    let state = StateVector::from_components(basis, &comps, format!("jc-mixed-dark{}-{n_exc}", branch.symbol()))
        .map_err(|_| Error::ParameterCondition("mixed dark state vanishes for delta1 = delta2 and g = 0".into()))?;
    Ok(DarkStateResult {
        state,
        energy: (n_exc as f64 + 1.0) * p.omega,
        branch: Some(branch),
        construction: Construction::ClosedForm,
    })
}

/// Multimode dark state: the single-mode closed form with `|1⟩` replaced by
/// the W state `g_b⁻¹ Σᵢ g′ᵢ|0…1ᵢ…0⟩` and `g` by `g_b = (Σᵢ g′ᵢ²)^½`.
pub fn dark_state_multimode(p: &MultimodeParams, branch: Branch, cutoffs: &[usize]) -> Result<DarkStateResult> {
    let (omega, gb, _) = p.collective_couplings()?;
    if cutoffs.len() != p.mode_count() {
        return Err(Error::InvalidTruncation(format!(
            "{} cutoffs given for {} modes",
            cutoffs.len(),
            p.mode_count()
        )));
    }
    let basis = hamiltonian_basis(cutoffs)?;
    let b = branch.sign();
    for (i, (g1, g2)) in p.g_col1.iter().zip(&p.g_col2).enumerate() {
        check_close(&format!("branch {}: g_{{{i}2}} = {}g_{{{i}1}}", branch.symbol(), branch.symbol()), *g2, b * g1)?;
    }
    check_close(&format!("branch {}: eps2 = {}eps1", branch.symbol(), branch.symbol()), p.eps2, b * p.eps1)?;
    let amp = closed_form_amplitudes(p.delta1 / omega, p.delta2 / omega, gb / omega, p.eps1 / omega, branch)?;

    let m = p.mode_count();
    let vacuum = vec![0; m];
    let w_weights: Vec<f64> = if gb > 0.0 {
        p.g_col1.iter().map(|g| g / gb).collect()
    } else {
        (0..m).map(|i| if i == 0 { 1.0 } else { 0.0 }).collect()
    };
    let mut comps = Vec::new();
    for (q, (&a0, &a1)) in amp[0].iter().zip(&amp[1]).enumerate() {
        comps.push((basis.index(&vacuum, q), a0));
        for (i, &wi) in w_weights.iter().enumerate() {
            let mut occ = vacuum.clone();
            occ[i] = 1;
            comps.push((basis.index(&occ, q), a1 * wi));
        }
    }
    let state = StateVector::from_components(basis, &comps, format!("multimode-dark{}", branch.symbol()))?;
    Ok(DarkStateResult {
        state,
        energy: omega,
        branch: Some(branch),
        construction: Construction::ClosedForm,
    })
}

/// Rectangular block of `H − E` mapping the `n ≤ 1` sector (8 columns) into
/// the `n ≤ 2` sector (12 rows).
pub fn one_photon_ansatz_matrix(p: &Aqrm2Params, energy: f64) -> Result<crate::fockalg::CMatrix> {
    let h = build_aqrm2(p, 2)?;
    let shifted = h.matrix() - crate::fockalg::CMatrix::identity(12, 12) * C64::new(energy, 0.0);
    Ok(shifted.columns(0, 8).into_owned())
}

/// Every eigenstate of the biased two-qubit Rabi model with at most one
/// photon at energy `E`, found from the nullspace of the ansatz matrix. No
/// parameter relation is assumed; an empty list means no such state exists.
/// States live in the cutoff-2 basis (use [`StateVector::embed`] to lift).
pub fn one_photon_ansatz_solve(p: &Aqrm2Params, energy: f64) -> Result<Vec<DarkStateResult>> {
    let m = one_photon_ansatz_matrix(p, energy)?;
    let basis = BasisDescriptor::two_qubit(&[2])?;
    let branch = if (p.g2 - p.g1).abs() <= PARAM_TOL && (p.eps2 - p.eps1).abs() <= PARAM_TOL {
        Some(Branch::Plus)
    } else if (p.g2 + p.g1).abs() <= PARAM_TOL && (p.eps2 + p.eps1).abs() <= PARAM_TOL {
        Some(Branch::Minus)
    } else {
        None
    };
    nullspace(&m, NULLSPACE_TOL)
        .into_iter()
        .enumerate()
        .map(|(k, v)| {
            let mut amps = CVector::zeros(basis.dim());
            amps.rows_mut(0, 8).copy_from(&v);
            let state = StateVector::normalized(fix_phase(amps), basis.clone(), format!("ansatz-nullspace-{k}"))?;
            Ok(DarkStateResult {
                state,
                energy,
                branch,
                construction: Construction::Nullspace,
            })
        })
        .collect()
}

/// Rotates the global phase so the largest component is real and positive.
fn fix_phase(v: CVector) -> CVector {
    let pivot = v
        .iter()
        .copied()
        .max_by(|a, b| a.norm().total_cmp(&b.norm()))
        .unwrap_or(C64::new(0.0, 0.0));
    if pivot.norm() == 0.0 {
        return v;
    }
    let phase = pivot.conj() / pivot.norm();
    v * phase
}

/// `‖Hψ − Eψ‖₂`.
pub fn residual(h: &Operator, psi: &StateVector, energy: f64) -> Result<f64> {
    let applied = h.apply(psi)?;
    Ok((applied - psi.amplitudes() * C64::new(energy, 0.0)).norm())
}
