//! Symmetry and conserved-quantity operators, with commutator certification.
//!
//! Photon-shifting operators are compared with the Hamiltonian on the
//! interior of the truncated space (every occupation at most `N_i − margin`).

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fockalg::{
    commutator_interior_norm, embed_modes, local, BasisDescriptor, CMatrix, Operator, StateVector, C64, EE, EG,
    GE, GG,
};
use crate::models::{Aqrm2Params, MultimodeParams};

/// Default commutator threshold for a `commutes` verdict.
pub const COMMUTATOR_THRESHOLD: f64 = 1e-10;
/// Orthogonality tolerance accepted by [`mode_number_ops`].
pub const ORTHOGONALITY_TOL: f64 = 1e-12;

const PARAM_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Commutes,
    Violates,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SymmetryReport {
    pub operator_name: String,
    pub interior_commutator_norm: f64,
    pub margin: usize,
    pub verdict: Verdict,
    pub threshold: f64,
}

/// Interior commutator norm of `op` with `h` and the resulting verdict.
pub fn check_symmetry(
    name: &str,
    op: &Operator,
    h: &Operator,
    margin: usize,
    threshold: f64,
) -> Result<SymmetryReport> {
    let norm = commutator_interior_norm(op, h, margin)?;
    Ok(SymmetryReport {
        operator_name: name.to_string(),
        interior_commutator_norm: norm,
        margin,
        verdict: if norm < threshold {
            Verdict::Commutes
        } else {
            Verdict::Violates
        },
        threshold,
    })
}

fn cx(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// `R = exp(iπa†a) σ₁_z σ₂_z`.
pub fn parity_op(cutoff: usize) -> Result<Operator> {
    let basis = BasisDescriptor::two_qubit(&[cutoff])?;
    let zz = local::sigma_z().kronecker(&local::sigma_z());
    Operator::new_hermitian(embed_modes(&[cutoff], &[(0, &local::photon_parity(cutoff))], &zz), basis)
}

/// `C = a†a + (σ₁_z + σ₂_z + 2)/2`.
pub fn excitation_number_op(cutoff: usize) -> Result<Operator> {
    let basis = BasisDescriptor::two_qubit(&[cutoff])?;
    let id2 = CMatrix::identity(2, 2);
    let z_sum = local::sigma_z().kronecker(&id2) + id2.kronecker(&local::sigma_z());
    let qubit = (z_sum + CMatrix::identity(4, 4) * cx(2.0)) * cx(0.5);
    let m = embed_modes(&[cutoff], &[(0, &local::number(cutoff))], &CMatrix::identity(4, 4))
        + embed_modes(&[cutoff], &[], &qubit);
    Operator::new_hermitian(m, basis)
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= PARAM_TOL * a.abs().max(b.abs()).max(1.0)
}

fn check_hidden_conditions(omega: f64, delta1: f64, delta2: f64, g1: f64, g2: f64, eps1: f64, eps2: f64) -> Result<()> {
    if !close(delta1, delta2) {
        return Err(Error::ParameterCondition(format!(
            "hidden symmetry requires Δ₁ = Δ₂ (got {delta1} and {delta2})"
        )));
    }
    if !close(eps1, omega / 2.0) || eps2 != 0.0 {
        return Err(Error::ParameterCondition(format!(
            "hidden symmetry requires ε₁ = ω/2 and ε₂ = 0 (got {eps1} and {eps2})"
        )));
    }
    if !close(g1, g2) {
        return Err(Error::ParameterCondition(format!(
            "hidden symmetry requires g₁ = g₂ (got {g1} and {g2})"
        )));
    }
    if g1 == 0.0 {
        return Err(Error::SingularDenominator("hidden symmetry operator divides by g = 0".into()));
    }
    Ok(())
}

/// `e^{iπa†a} M(a, a†)` on mode 0 of `cutoffs`, identity on the remaining
/// modes. `delta` and `g` are in units of ω.
fn hidden_matrix(cutoffs: &[usize], delta: f64, g: f64) -> CMatrix {
    let n = cutoffs[0];
    let a = local::annihilation(n);
    let ad = local::creation(n);
    let id = CMatrix::identity(n + 1, n + 1);
    let quad = &ad + &a;
    let diff = &ad - &a;
    let r = delta / g;
    let zero = CMatrix::zeros(n + 1, n + 1);

    // Rows and columns in the order {ee, eg, ge, gg}.
    let order = [EE, EG, GE, GG];
    let blocks: [[CMatrix; 4]; 4] = [
        [&diff + &id * cx(4.0 * g + r), zero.clone(), quad.clone(), zero.clone()],
        [zero.clone(), -&diff - &id * cx(r), &id * cx(-4.0 * g), -&quad],
        [-&quad, &id * cx(-4.0 * g), -&diff + &id * cx(r), zero.clone()],
        [zero.clone(), quad.clone(), zero.clone(), &diff + &id * cx(4.0 * g - r)],
    ];
    let mut m = CMatrix::zeros(n + 1, n + 1).kronecker(&CMatrix::zeros(4, 4));
    for (bi, row) in blocks.iter().enumerate() {
        for (bj, block) in row.iter().enumerate() {
            let mut unit = CMatrix::zeros(4, 4);
            unit[(order[bi], order[bj])] = cx(1.0);
            m += block.kronecker(&unit);
        }
    }
    let parity = local::photon_parity(n).kronecker(&CMatrix::identity(4, 4));
    let single = parity * m;

    let rest: usize = cutoffs[1..].iter().map(|c| c + 1).product();
    if rest == 1 {
        return single;
    }
    // Insert the identity on the free modes between b₁ and the qubits.
    let dim = (n + 1) * rest * 4;
    let mut out = CMatrix::zeros(dim, dim);
    for col in 0..(n + 1) * 4 {
        let (m1, q1) = (col / 4, col % 4);
        for row in 0..(n + 1) * 4 {
            let v = single[(row, col)];
            if v == C64::new(0.0, 0.0) {
                continue;
            }
            let (n1, q0) = (row / 4, row % 4);
            for k in 0..rest {
                out[((n1 * rest + k) * 4 + q0, (m1 * rest + k) * 4 + q1)] = v;
            }
        }
    }
    out
}

/// Hidden-symmetry operator of the two-qubit model at `ε₁ = ω/2`, `ε₂ = 0`,
/// `Δ₁ = Δ₂`, `g₁ = g₂`.
pub fn hidden_symmetry_j(p: &Aqrm2Params, cutoff: usize) -> Result<Operator> {
    p.validate()?;
    check_hidden_conditions(p.omega, p.delta1, p.delta2, p.g1, p.g2, p.eps1, p.eps2)?;
    let basis = BasisDescriptor::two_qubit(&[cutoff])?;
    Operator::new(hidden_matrix(&[cutoff], p.delta1 / p.omega, p.g1 / p.omega), basis)
}

/// Hidden-symmetry operator on the collective mode `b₁` of the rotated
/// multimode model, identity on `b₂ … b_M`. Basis matches
/// [`crate::models::build_transformed_multimode`].
pub fn hidden_symmetry_j_multimode(p: &MultimodeParams, cutoff: usize, rest_cutoffs: &[usize]) -> Result<Operator> {
    let (omega, gb1, gb2) = p.collective_couplings()?;
    if rest_cutoffs.len() + 1 != p.mode_count() {
        return Err(Error::InvalidTruncation(format!(
            "{} free-mode cutoffs given for {} modes",
            rest_cutoffs.len(),
            p.mode_count()
        )));
    }
    check_hidden_conditions(omega, p.delta1, p.delta2, gb1, gb2, p.eps1, p.eps2)?;
    let cutoffs: Vec<usize> = std::iter::once(cutoff).chain(rest_cutoffs.iter().copied()).collect();
    let basis = BasisDescriptor::two_qubit(&cutoffs)?;
    Operator::new(hidden_matrix(&cutoffs, p.delta1 / omega, gb1 / omega), basis)
}

/// Rank-one projector `|ψ⟩⟨ψ|`.
pub fn dark_projector(psi: &StateVector) -> Result<Operator> {
    let norm = psi.norm();
    if (norm - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidArgument(format!("projector needs a unit vector, norm is {norm}")));
    }
    let v = psi.amplitudes();
    let m = v * v.adjoint();
    let m = (&m + m.adjoint()) * cx(0.5);
    Operator::new_hermitian(m, psi.basis().clone())
}

/// Coefficient matrix `T` with `b_j = Σᵢ T_ji aᵢ`. Row 1 is the normalized
/// coupling column; row `j > 1` mixes the first `j` modes.
pub fn bogoliubov_coeffs(g_col: &[f64]) -> Result<DMatrix<f64>> {
    let m = g_col.len();
    if m == 0 {
        return Err(Error::InvalidArgument("empty coupling column".into()));
    }
    if g_col.iter().any(|g| !g.is_finite()) {
        return Err(Error::InvalidArgument("couplings must be finite".into()));
    }
    let partial: Vec<f64> = g_col
        .iter()
        .scan(0.0, |s, g| {
            *s += g * g;
            Some(*s)
        })
        .collect();
    if partial[m - 1] == 0.0 {
        return Err(Error::SingularDenominator("coupling column vanishes".into()));
    }
    if m > 1 && partial[0] == 0.0 {
        return Err(Error::SingularDenominator(
            "leading coupling vanishes, so the mixing rows are undefined".into(),
        ));
    }
    let total = partial[m - 1].sqrt();
    let mut t = DMatrix::zeros(m, m);
    for i in 0..m {
        t[(0, i)] = g_col[i] / total;
    }
    for j in 1..m {
        let den = (partial[j] * partial[j - 1]).sqrt();
        if den == 0.0 {
            return Err(Error::SingularDenominator(format!("row {} has a zero denominator", j + 1)));
        }
        for i in 0..j {
            t[(j, i)] = g_col[i] * g_col[j] / den;
        }
        t[(j, j)] = -partial[j - 1] / den;
    }
    Ok(t)
}

fn check_orthogonal(coeffs: &DMatrix<f64>) -> Result<()> {
    if !coeffs.is_square() {
        return Err(Error::DimensionMismatch("coefficient matrix must be square".into()));
    }
    let m = coeffs.nrows();
    let err = (coeffs * coeffs.transpose() - DMatrix::<f64>::identity(m, m)).amax();
    if err > ORTHOGONALITY_TOL {
        return Err(Error::InvalidArgument(format!("coefficient rows are not orthonormal (error {err:.3e})")));
    }
    Ok(())
}

/// `b_j†b_j = Σ_{i,k} T_ji T_jk aᵢ†a_k` in the original mode basis, `j` zero-based.
pub fn bogoliubov_number_op(coeffs: &DMatrix<f64>, j: usize, cutoffs: &[usize]) -> Result<Operator> {
    check_orthogonal(coeffs)?;
    let m = coeffs.nrows();
    if cutoffs.len() != m {
        return Err(Error::DimensionMismatch(format!("{} cutoffs for {m} modes", cutoffs.len())));
    }
    if j >= m {
        return Err(Error::InvalidArgument(format!("mode index {j} out of range for {m} modes")));
    }
    let basis = BasisDescriptor::two_qubit(cutoffs)?;
    let id4 = CMatrix::identity(4, 4);
    let mut out = CMatrix::zeros(basis.dim(), basis.dim());
    for i in 0..m {
        for k in 0..m {
            let w = coeffs[(j, i)] * coeffs[(j, k)];
            if w == 0.0 {
                continue;
            }
            let term = if i == k {
                embed_modes(cutoffs, &[(i, &local::number(cutoffs[i]))], &id4)
            } else {
                let ad = local::creation(cutoffs[i]);
                let a = local::annihilation(cutoffs[k]);
                embed_modes(cutoffs, &[(i, &ad), (k, &a)], &id4)
            };
            out += term * cx(w);
        }
    }
    let out = (&out + out.adjoint()) * cx(0.5);
    Operator::new_hermitian(out, basis)
}

/// `b_j†b_j` for `j = 2, …, M`.
pub fn mode_number_ops(coeffs: &DMatrix<f64>, cutoffs: &[usize]) -> Result<Vec<Operator>> {
    check_orthogonal(coeffs)?;
    (1..coeffs.nrows())
        .map(|j| bogoliubov_number_op(coeffs, j, cutoffs))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::darkstates::{dark_state_aqrm2, Branch};
    use crate::fockalg::max_abs;
    use crate::models::{build_aqrm2, build_jc2, build_multimode, build_transformed_multimode, Jc2Params};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn fig1b(g: f64) -> Aqrm2Params {
        Aqrm2Params {
            delta1: 0.8,
            delta2: 0.8,
            g1: g,
            g2: g,
            eps1: 0.5,
            eps2: 0.0,
            ..Default::default()
        }
    }

    fn full_comm(a: &Operator, b: &Operator) -> f64 {
        a.commutator(b).unwrap().max_abs()
    }

    #[test]
    fn parity_is_involution() {
        let r = parity_op(7).unwrap();
        let r2 = r.product(&r).unwrap();
        assert_eq!(r2.matrix(), Operator::identity(r.basis()).matrix());
        assert!(r.is_diagonal());
    }

    #[test]
    fn parity_commutes_without_bias() {
        let p = Aqrm2Params {
            delta1: 0.6,
            delta2: 0.3,
            g1: 0.5,
            g2: -0.7,
            ..Default::default()
        };
        let h = build_aqrm2(&p, 12).unwrap();
        assert_eq!(full_comm(&parity_op(12).unwrap(), &h), 0.0);
    }

    #[test]
    fn bias_breaks_parity() {
        let eps = 1729f64.sqrt() / 200.0;
        let p = Aqrm2Params {
            delta1: 0.6,
            delta2: 0.3,
            g1: 0.5,
            g2: 0.5,
            eps1: eps,
            eps2: eps,
            ..Default::default()
        };
        let h = build_aqrm2(&p, 12).unwrap();
        assert!(full_comm(&parity_op(12).unwrap(), &h) > 0.1);
        for (e1, e2) in [(0.1, 0.0), (0.0, 0.1)] {
            let q = Aqrm2Params { eps1: e1, eps2: e2, ..p.clone() };
            assert!(full_comm(&parity_op(12).unwrap(), &build_aqrm2(&q, 12).unwrap()) > 0.0);
        }
    }

    #[test]
    fn excitation_number_spectrum() {
        let n = 6;
        let c = excitation_number_op(n).unwrap();
        let b = c.basis().clone();
        assert!(c.is_diagonal());
        assert_eq!(c.matrix()[(b.index(&[0], GG), b.index(&[0], GG))].re, 0.0);
        assert_eq!(c.matrix()[(b.index(&[n], EE), b.index(&[n], EE))].re, n as f64 + 2.0);
        for z in c.diagonal() {
            assert!(z.re >= 0.0 && z.re.fract() == 0.0 && z.im == 0.0);
        }
    }

    #[test]
    fn excitation_number_conserved_by_jc() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let p = Jc2Params {
                omega: rng.gen_range(0.5..2.0),
                delta1: rng.gen_range(-1.0..1.0),
                delta2: rng.gen_range(-1.0..1.0),
                g1: rng.gen_range(-1.0..1.0),
                g2: rng.gen_range(-1.0..1.0),
            };
            let h = build_jc2(&p, 9).unwrap();
            assert_eq!(full_comm(&excitation_number_op(9).unwrap(), &h), 0.0);
        }
    }

    #[test]
    fn counter_rotating_terms_break_excitation_number_linearly() {
        let n = 10;
        let jc = Jc2Params {
            delta1: 0.5,
            delta2: 0.4,
            g1: 0.3,
            g2: 0.2,
            ..Default::default()
        };
        let c = excitation_number_op(n).unwrap();
        let h_jc = build_jc2(&jc, n).unwrap();
        // g(aσ† + a†σ) + γ(aσ + a†σ†) = AQRM coupling at γ = g; isolate the counter-rotating part
        let rabi = |g1: f64, g2: f64| {
            build_aqrm2(
                &Aqrm2Params {
                    delta1: 0.5,
                    delta2: 0.4,
                    g1,
                    g2,
                    ..Default::default()
                },
                n,
            )
            .unwrap()
        };
        let cr = rabi(1.0, 1.0).minus(&build_jc2(&Jc2Params { g1: 1.0, g2: 1.0, ..jc.clone() }, n).unwrap()).unwrap();
        let at = |gamma: f64| full_comm(&c, &h_jc.plus(&cr.scaled(gamma)).unwrap());
        let (n1, n2) = (at(0.05), at(0.1));
        assert!(n1 > 0.0);
        assert_abs_diff_eq!(n2 / n1, 2.0, epsilon = 0.02);
        assert!(full_comm(&c, &rabi(0.3, 0.2)) > 0.0);
    }

    #[test]
    fn hidden_symmetry_commutes_at_fig1b() {
        for g in [0.1, 0.3, 0.5, 1.0] {
            let p = fig1b(g);
            let j = hidden_symmetry_j(&p, 30).unwrap();
            let h = build_aqrm2(&p, 30).unwrap();
            let report = check_symmetry("J", &j, &h, 2, COMMUTATOR_THRESHOLD).unwrap();
            assert_eq!(report.verdict, Verdict::Commutes, "g = {g}: {report:?}");
            assert!(j.max_imag() == 0.0);
            let off: f64 = (0..j.dim())
                .flat_map(|c| (0..j.dim()).map(move |r| (r, c)))
                .filter(|(r, c)| r != c)
                .map(|(r, c)| j.matrix()[(r, c)].norm())
                .fold(0.0, f64::max);
            assert!(off > 0.0);
        }
    }

    #[test]
    fn hidden_symmetry_fails_off_condition() {
        let p = Aqrm2Params { eps1: 0.45, ..fig1b(0.3) };
        assert!(matches!(hidden_symmetry_j(&p, 10), Err(Error::ParameterCondition(_))));
        let p = Aqrm2Params { delta2: 0.7, ..fig1b(0.3) };
        assert!(matches!(hidden_symmetry_j(&p, 10), Err(Error::ParameterCondition(_))));
        assert!(matches!(hidden_symmetry_j(&fig1b(0.0), 10), Err(Error::SingularDenominator(_))));
    }

    fn fig3c(g: f64, g22: f64) -> MultimodeParams {
        MultimodeParams {
            omegas: vec![1.0, 1.0],
            g_col1: vec![g, g],
            g_col2: vec![g, g22],
            delta1: 0.3,
            delta2: 0.3,
            eps1: 0.5,
            eps2: 0.0,
        }
    }

    #[test]
    fn multimode_hidden_symmetry_commutes() {
        let p = fig3c(0.2, 0.2);
        let j = hidden_symmetry_j_multimode(&p, 16, &[4]).unwrap();
        let h = build_transformed_multimode(&p, 16, &[4]).unwrap();
        assert!(commutator_interior_norm(&j, &h, 2).unwrap() < 1e-10);

        let basis = j.basis().clone();
        let free = Operator::new_hermitian(embed_modes(&[16, 4], &[(1, &local::number(4))], &CMatrix::identity(4, 4)), basis)
            .unwrap();
        assert_eq!(full_comm(&j, &free), 0.0);
    }

    #[test]
    fn multimode_hidden_symmetry_reduces_to_single_mode() {
        let p = fig3c(0.25, 0.25);
        let (_, gb, _) = p.collective_couplings().unwrap();
        let single = hidden_symmetry_j(&Aqrm2Params { delta1: 0.3, delta2: 0.3, g1: gb, g2: gb, eps1: 0.5, ..Default::default() }, 8)
            .unwrap();
        let multi = hidden_symmetry_j_multimode(&p, 8, &[3]).unwrap();
        let b = multi.basis().clone();
        let sb = single.basis().clone();
        for col in 0..b.dim() {
            let (oc, qc) = b.decompose(col);
            for row in 0..b.dim() {
                let (or, qr) = b.decompose(row);
                let expect = if or[1] == oc[1] {
                    single.matrix()[(sb.index(&[or[0]], qr), sb.index(&[oc[0]], qc))]
                } else {
                    C64::new(0.0, 0.0)
                };
                assert_eq!(multi.matrix()[(row, col)], expect);
            }
        }
    }

    #[test]
    fn dark_projector_properties() {
        let eps = 1729f64.sqrt() / 200.0;
        let p = Aqrm2Params {
            delta1: 0.6,
            delta2: 0.3,
            g1: 0.4,
            g2: 0.4,
            eps1: eps,
            eps2: eps,
            ..Default::default()
        };
        let dark = dark_state_aqrm2(&p, Branch::Plus, 10).unwrap();
        let s = dark_projector(&dark.state).unwrap();
        let s2 = s.product(&s).unwrap();
        assert!(max_abs(&(s2.matrix() - s.matrix())) < 1e-15);
        let trace: f64 = s.diagonal().iter().map(|z| z.re).sum();
        assert_abs_diff_eq!(trace, 1.0, epsilon = 1e-14);
        let h = build_aqrm2(&p, 10).unwrap();
        assert!(full_comm(&s, &h) < 1e-10);

        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let amps = crate::fockalg::CVector::from_fn(h.dim(), |_, _| C64::new(rng.gen_range(-1.0..1.0), 0.0));
        let random = StateVector::normalized(amps, h.basis().clone(), "random").unwrap();
        assert!(full_comm(&dark_projector(&random).unwrap(), &h) > 1e-3);
    }

    #[test]
    fn bogoliubov_two_mode_rows() {
        let t = bogoliubov_coeffs(&[0.3, 0.3]).unwrap();
        let r = 0.5f64.sqrt();
        for (got, want) in t.iter().zip([r, r, r, -r]) {
            // column-major: (0,0), (1,0), (0,1), (1,1)
            assert_abs_diff_eq!(*got, want, epsilon = 1e-15);
        }
    }

    #[test]
    fn bogoliubov_rejects_zero_leading_coupling() {
        assert!(matches!(bogoliubov_coeffs(&[0.0, 0.4]), Err(Error::SingularDenominator(_))));
        assert!(matches!(bogoliubov_coeffs(&[0.0, 0.0]), Err(Error::SingularDenominator(_))));
        assert!(bogoliubov_coeffs(&[]).is_err());
    }

    proptest! {
        #[test]
        fn bogoliubov_rows_orthonormal(g in proptest::collection::vec(0.01f64..2.0, 1..=6)) {
            let t = bogoliubov_coeffs(&g).unwrap();
            let m = g.len();
            let err = (&t * t.transpose() - DMatrix::<f64>::identity(m, m)).amax();
            prop_assert!(err < 1e-14, "error {err:e}");
        }
    }

    #[test]
    fn mode_numbers_commute_with_multimode() {
        let p = fig3c(0.2, 0.2);
        let t = bogoliubov_coeffs(&p.g_col1).unwrap();
        let cut = [8, 8];
        let h = build_multimode(&p, &cut).unwrap();
        let ops = mode_number_ops(&t, &cut).unwrap();
        assert_eq!(ops.len(), 1);
        assert!(commutator_interior_norm(&ops[0], &h, 2).unwrap() < 1e-10);

        let broken = build_multimode(&fig3c(0.2, 0.22), &cut).unwrap();
        assert!(commutator_interior_norm(&ops[0], &broken, 2).unwrap() > 1e-3);
    }

    #[test]
    fn mode_numbers_sum_to_total_photon_number() {
        let g = [0.2, 0.5, 0.1];
        let t = bogoliubov_coeffs(&g).unwrap();
        let cut = [3, 3, 3];
        let basis = BasisDescriptor::two_qubit(&cut).unwrap();
        let id4 = CMatrix::identity(4, 4);
        let mut total = CMatrix::zeros(basis.dim(), basis.dim());
        let mut sum = CMatrix::zeros(basis.dim(), basis.dim());
        for i in 0..3 {
            total += embed_modes(&cut, &[(i, &local::number(3))], &id4);
            sum += bogoliubov_number_op(&t, i, &cut).unwrap().into_matrix();
        }
        let interior = basis.interior_indices(1).unwrap();
        for &c in &interior {
            for &r in &interior {
                assert!((sum[(r, c)] - total[(r, c)]).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn mode_numbers_need_orthogonal_coefficients() {
        let t = DMatrix::from_row_slice(2, 2, &[1.0, 0.1, 0.0, 1.0]);
        assert!(mode_number_ops(&t, &[3, 3]).is_err());
    }
}
