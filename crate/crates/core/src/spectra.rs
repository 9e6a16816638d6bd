//! Coupling sweeps, truncation convergence and level-crossing analysis.
//!
//! A [`SweepSetup`] holds the coupling profile; the sweep variable `g`
//! multiplies every coupling of the stored model. Optional pieces: an
//! excitation sector, a registered dark state and a label operator.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::darkstates::{
    dark_state_aqrm2, dark_state_aqrm2_unbiased, dark_state_multimode, jc_dark_state, jc_dark_state_mixed, Branch,
    DarkStateResult,
};
use crate::error::{Error, Result};
use crate::fockalg::{eigh, eigvalsh, embed_modes, local, CMatrix, CVector, Operator, StateVector, C64};
use crate::models::{hamiltonian_basis, Aqrm2Params, Model};
use crate::symmetry::{
    bogoliubov_coeffs, bogoliubov_number_op, dark_projector, excitation_number_op, hidden_symmetry_j,
    hidden_symmetry_j_multimode, parity_op,
};

/// Gap below which two levels count as crossing.
pub const CROSSING_TOL: f64 = 1e-8;
/// Gap above which a local minimum is an avoided crossing.
pub const AVOIDED_GAP: f64 = 1e-6;
/// Width in `g` at which crossing refinement stops.
pub const BISECTION_TOL: f64 = 1e-10;
/// Eigenvalues closer than this form one degenerate cluster.
pub const DEGENERACY_TOL: f64 = 1e-8;
/// Distance from `g*` at which crossing labels are evaluated.
pub const OUTSIDE_OFFSET: f64 = 1e-4;
/// Levels within this distance below the dark energy are not counted in `m(g)`.
pub const COUNT_MARGIN: f64 = 1e-11;
/// Required `|λ − E_dark|` at a refined dark crossing.
pub const DARK_ENERGY_TOL: f64 = 1e-10;
/// Default sweep grid.
pub const DEFAULT_GRID_POINTS: usize = 101;

const MAX_REFINE_STEPS: usize = 200;
const GOLDEN: f64 = 0.618_033_988_749_894_9;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sector {
    #[default]
    Full,
    /// Eigenspace of the excitation number `C` (single-mode models only).
    Excitation(usize),
}

/// Dark state registered on a sweep, rebuilt at every coupling.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DarkSpec {
    Aqrm2 { branch: Branch },
    Aqrm2Unbiased { branch: Branch },
    JcLadder { n: usize },
    JcMixed { n: usize, branch: Branch },
    Multimode { branch: Branch },
}

impl DarkSpec {
    pub fn state(&self, model: &Model) -> Result<DarkStateResult> {
        match (self, model) {
            (DarkSpec::Aqrm2 { branch }, Model::Aqrm2 { params, cutoff }) => dark_state_aqrm2(params, *branch, *cutoff),
            (DarkSpec::Aqrm2Unbiased { branch }, Model::Aqrm2 { params, cutoff }) => {
                dark_state_aqrm2_unbiased(params, *branch, *cutoff)
            }
            (DarkSpec::JcLadder { n }, Model::Jc2 { params, cutoff }) => jc_dark_state(*n, params, *cutoff),
            (DarkSpec::JcMixed { n, branch }, Model::Jc2 { params, cutoff }) => {
                jc_dark_state_mixed(*n, params, *branch, *cutoff)
            }
            (DarkSpec::Multimode { branch }, Model::Multimode { params, cutoffs }) => {
                dark_state_multimode(params, *branch, cutoffs)
            }
            (
                DarkSpec::Multimode { branch },
                Model::MultimodeTransformed {
                    params,
                    cutoff,
                    rest_cutoffs,
                },
            ) => {
                let (omega, gb1, gb2) = params.collective_couplings()?;
                let single = Aqrm2Params {
                    omega,
                    delta1: params.delta1,
                    delta2: params.delta2,
                    g1: gb1,
                    g2: gb2,
                    eps1: params.eps1,
                    eps2: params.eps2,
                };
                let dark = dark_state_aqrm2(&single, *branch, *cutoff)?;
                let mut cutoffs = vec![*cutoff];
                cutoffs.extend_from_slice(rest_cutoffs);
                let target = hamiltonian_basis(&cutoffs)?;
                let src = dark.state.basis().clone();
                let mut amps = CVector::zeros(target.dim());
                for (i, a) in dark.state.amplitudes().iter().enumerate() {
                    let (occ, q) = src.decompose(i);
                    let mut full = vec![0; cutoffs.len()];
                    full[0] = occ[0];
                    amps[target.index(&full, q)] = *a;
                }
                Ok(DarkStateResult {
                    state: StateVector::new(amps, target, format!("multimode-dark{}", branch.symbol()))?,
                    ..dark
                })
            }
            _ => Err(Error::InvalidArgument(format!(
                "dark state {self:?} does not apply to the {} family",
                model.family()
            ))),
        }
    }
}

/// Conserved quantity used to label levels.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LabelSpec {
    Excitation,
    Parity,
    /// `b_j†b_j`, `j` counted from 1.
    ModeNumber { mode: usize },
    DarkProjector,
    HiddenJ,
}

impl LabelSpec {
    pub fn name(&self) -> String {
        match self {
            LabelSpec::Excitation => "C".into(),
            LabelSpec::Parity => "R".into(),
            LabelSpec::ModeNumber { mode } => format!("n_b{mode}"),
            LabelSpec::DarkProjector => "S".into(),
            LabelSpec::HiddenJ => "J".into(),
        }
    }

    /// Label operator for `profile` scaled to coupling `g`.
    pub fn operator(&self, profile: &Model, g: f64, dark: Option<&StateVector>) -> Result<Operator> {
        let model = profile.with_coupling(g);
        let unsupported = || {
            Error::InvalidArgument(format!(
                "label {} is not available for the {} family",
                self.name(),
                model.family()
            ))
        };
        match (self, &model) {
            (LabelSpec::Excitation, Model::Aqrm2 { cutoff, .. } | Model::Jc2 { cutoff, .. }) => {
                excitation_number_op(*cutoff)
            }
            (LabelSpec::Parity, Model::Aqrm2 { cutoff, .. } | Model::Jc2 { cutoff, .. }) => parity_op(*cutoff),
            (LabelSpec::ModeNumber { mode }, _) => {
                let cutoffs = model.truncation();
                if *mode == 0 || *mode > cutoffs.len() {
                    return Err(Error::InvalidArgument(format!(
                        "mode number label b_{mode} out of range for {} modes",
                        cutoffs.len()
                    )));
                }
                match profile {
                    Model::Multimode { params, .. } => {
                        let col = if params.g_col1.iter().any(|&x| x != 0.0) {
                            &params.g_col1
                        } else {
                            &params.g_col2
                        };
                        bogoliubov_number_op(&bogoliubov_coeffs(col)?, mode - 1, &cutoffs)
                    }
                    Model::MultimodeTransformed { .. } => {
                        let basis = hamiltonian_basis(&cutoffs)?;
                        let m = embed_modes(
                            &cutoffs,
                            &[(mode - 1, &local::number(cutoffs[mode - 1]))],
                            &CMatrix::identity(4, 4),
                        );
                        Operator::new_hermitian(m, basis)
                    }
                    _ => Err(unsupported()),
                }
            }
            (LabelSpec::DarkProjector, _) => dark_projector(dark.ok_or(Error::DarkStateNotRegistered)?),
            (LabelSpec::HiddenJ, Model::Aqrm2 { params, cutoff }) => hidden_symmetry_j(params, *cutoff),
            (
                LabelSpec::HiddenJ,
                Model::MultimodeTransformed {
                    params,
                    cutoff,
                    rest_cutoffs,
                },
            ) => hidden_symmetry_j_multimode(params, *cutoff, rest_cutoffs),
            _ => Err(unsupported()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepSetup {
    /// Model whose couplings define the profile scaled by `g`.
    pub model: Model,
    pub sector: Sector,
    pub dark: Option<DarkSpec>,
    pub label: Option<LabelSpec>,
    /// Number of lowest levels reported per grid point.
    pub keep: usize,
}

impl SweepSetup {
    pub fn new(model: Model, keep: usize) -> Self {
        Self {
            model,
            sector: Sector::Full,
            dark: None,
            label: None,
            keep,
        }
    }

    pub fn with_sector(mut self, sector: Sector) -> Self {
        self.sector = sector;
        self
    }

    pub fn with_dark(mut self, dark: DarkSpec) -> Self {
        self.dark = Some(dark);
        self
    }

    pub fn with_label(mut self, label: LabelSpec) -> Self {
        self.label = Some(label);
        self
    }

    /// Basis indices spanning the selected sector, `None` for the full space.
    pub fn sector_indices(&self) -> Result<Option<Vec<usize>>> {
        match self.sector {
            Sector::Full => Ok(None),
            Sector::Excitation(c) => {
                let cutoff = match &self.model {
                    Model::Aqrm2 { cutoff, .. } | Model::Jc2 { cutoff, .. } => *cutoff,
                    other => {
                        return Err(Error::InvalidArgument(format!(
                            "excitation sectors need a single-mode model, got {}",
                            other.family()
                        )))
                    }
                };
                if c > cutoff {
                    return Err(Error::InvalidTruncation(format!(
                        "sector C = {c} is not complete below cutoff {cutoff}"
                    )));
                }
                let op = excitation_number_op(cutoff)?;
                let idx: Vec<usize> = op
                    .diagonal()
                    .iter()
                    .enumerate()
                    .filter(|(_, z)| z.re == c as f64)
                    .map(|(i, _)| i)
                    .collect();
                Ok(Some(idx))
            }
        }
    }

    /// Diagonalizes at coupling `g`.
    /// Ascending sector eigenvalues at coupling scale `g`.
    pub fn eigenvalues(&self, g: f64) -> Result<Vec<f64>> {
        let h = self.model.with_coupling(g).hamiltonian()?;
        Ok(match self.sector_indices()? {
            Some(idx) => eigvalsh(&h.restrict(&idx)),
            None => eigvalsh(h.matrix()),
        })
    }

    pub fn solve(&self, g: f64) -> Result<PointSolution> {
        let model = self.model.with_coupling(g);
        let h = model.hamiltonian()?;
        let indices = self.sector_indices()?;
        let matrix = match &indices {
            Some(idx) => h.restrict(idx),
            None => h.matrix().clone(),
        };
        let eig = eigh(&matrix)?;
        let dark = match &self.dark {
            Some(spec) => {
                let d = spec.state(&model)?;
                let full = d.state.amplitudes();
                let restricted = match &indices {
                    Some(idx) => CVector::from_iterator(idx.len(), idx.iter().map(|&i| full[i])),
                    None => full.clone(),
                };
                if (restricted.norm() - 1.0).abs() > 1e-12 {
                    return Err(Error::ParameterCondition(
                        "registered dark state lies outside the selected sector".into(),
                    ));
                }
                Some(RegisteredDark {
                    full: d.state,
                    restricted,
                    energy: d.energy,
                })
            }
            None => None,
        };
        let overlaps = dark.as_ref().map(|d| {
            (0..eig.values.len())
                .map(|k| eig.vectors.column(k).dotc(&d.restricted).norm_sqr())
                .collect::<Vec<f64>>()
        });
        Ok(PointSolution {
            g,
            values: eig.values,
            vectors: eig.vectors,
            indices,
            dark,
            overlaps,
        })
    }
}

#[derive(Clone, Debug)]
pub struct RegisteredDark {
    pub full: StateVector,
    pub restricted: CVector,
    pub energy: f64,
}

/// Full sector eigensystem at one coupling.
#[derive(Clone, Debug)]
pub struct PointSolution {
    pub g: f64,
    pub values: Vec<f64>,
    pub vectors: CMatrix,
    pub indices: Option<Vec<usize>>,
    pub dark: Option<RegisteredDark>,
    /// `|⟨ψ_d|v_k⟩|²` for every level.
    pub overlaps: Option<Vec<f64>>,
}

impl PointSolution {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// Ranges of consecutive levels closer than [`DEGENERACY_TOL`].
    pub fn clusters(&self) -> Vec<std::ops::Range<usize>> {
        let mut out = Vec::new();
        let mut start = 0;
        for k in 1..=self.values.len() {
            if k == self.values.len() || self.values[k] - self.values[k - 1] > DEGENERACY_TOL {
                out.push(start..k);
                start = k;
            }
        }
        out
    }

    /// Dark level (largest single overlap inside the cluster with the largest
    /// summed overlap) and that cluster's summed overlap.
    pub fn dark_level(&self) -> Option<(usize, f64)> {
        let ov = self.overlaps.as_ref()?;
        let mut best: Option<(std::ops::Range<usize>, f64)> = None;
        for c in self.clusters() {
            let s: f64 = ov[c.clone()].iter().sum();
            if best.as_ref().is_none_or(|(_, b)| s > *b) {
                best = Some((c, s));
            }
        }
        let (range, sum) = best?;
        let level = range
            .clone()
            .max_by(|&a, &b| ov[a].total_cmp(&ov[b]).then(b.cmp(&a)))
            .unwrap_or(range.start);
        Some((level, sum))
    }

    /// `m(g)`: levels other than the dark one lying below `energy − COUNT_MARGIN`.
    pub fn count_below(&self, energy: f64) -> Option<usize> {
        let (dark, _) = self.dark_level()?;
        Some(
            self.values
                .iter()
                .enumerate()
                .filter(|&(k, &v)| k != dark && v < energy - COUNT_MARGIN)
                .count(),
        )
    }

    /// Label expectation values for `levels`, jointly diagonalized inside
    /// degenerate clusters when the label is Hermitian.
    pub fn label_values(&self, op: &Operator, levels: std::ops::Range<usize>) -> Vec<f64> {
        let l = match &self.indices {
            Some(idx) => op.restrict(idx),
            None => op.matrix().clone(),
        };
        let hermitian = op.hermiticity_error() <= 1e-12 * op.max_abs().max(1.0);
        let mut out = vec![0.0; levels.len()];
        for cluster in self.clusters() {
            if cluster.end <= levels.start || cluster.start >= levels.end {
                continue;
            }
            let v = self.vectors.columns(cluster.start, cluster.len()).into_owned();
            let sub = v.adjoint() * &l * &v;
            let values: Vec<f64> = if hermitian && cluster.len() > 1 {
                let sub = (&sub + sub.adjoint()) * C64::new(0.5, 0.0);
                eigh(&sub).map(|e| e.values).unwrap_or_else(|_| sub.diagonal().iter().map(|z| z.re).collect())
            } else {
                sub.diagonal().iter().map(|z| z.re).collect()
            };
            for (offset, value) in values.into_iter().enumerate() {
                let k = cluster.start + offset;
                if levels.contains(&k) {
                    out[k - levels.start] = value;
                }
            }
        }
        out
    }

    /// Evaluation noise of label expectation values.
    pub fn label_noise(&self, op: &Operator) -> f64 {
        f64::EPSILON * self.dim() as f64 * op.max_abs().max(1.0)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepResult {
    #[serde(skip)]
    pub setup: SweepSetup,
    pub family: String,
    pub truncation: Vec<usize>,
    pub sector: Sector,
    pub sector_dim: usize,
    pub g_grid: Vec<f64>,
    /// Lowest `keep` eigenvalues per grid point, ascending.
    pub levels: Vec<Vec<f64>>,
    /// Full sector spectrum per grid point.
    #[serde(skip)]
    pub spectrum: Vec<Vec<f64>>,
    pub dark_energy: Option<f64>,
    /// `|⟨ψ_d|v_k⟩|²` for the kept levels.
    pub dark_overlaps: Option<Vec<Vec<f64>>>,
    pub dark_level: Option<Vec<usize>>,
    pub dark_cluster_overlap: Option<Vec<f64>>,
    /// Overlap of the dark state with the identified dark level alone.
    pub dark_level_overlap: Option<Vec<f64>>,
    pub label_name: Option<String>,
    /// Label values for the kept levels; `None` where the label is undefined.
    pub labels: Option<Vec<Option<Vec<f64>>>>,
}

/// Evenly spaced grid of `points` couplings on `[start, stop]`.
pub fn linear_grid(start: f64, stop: f64, points: usize) -> Result<Vec<f64>> {
    if points < 1 || !start.is_finite() || !stop.is_finite() || stop < start {
        return Err(Error::InvalidArgument(format!(
            "invalid grid [{start}, {stop}] with {points} points"
        )));
    }
    if points == 1 {
        return Ok(vec![start]);
    }
    let step = (stop - start) / (points - 1) as f64;
    Ok((0..points)
        .map(|i| if i == points - 1 { stop } else { start + step * i as f64 })
        .collect())
}

struct PointRecord {
    spectrum: Vec<f64>,
    overlaps: Option<Vec<f64>>,
    dark: Option<(usize, f64, f64, f64)>,
    labels: Option<Vec<f64>>,
}

fn record_point(setup: &SweepSetup, g: f64) -> Result<PointRecord> {
    let sol = setup.solve(g)?;
    if setup.keep > sol.dim() {
        return Err(Error::InvalidArgument(format!(
            "keep = {} exceeds the sector dimension {}",
            setup.keep,
            sol.dim()
        )));
    }
    let dark = sol.dark_level().map(|(k, s)| {
        let single = sol.overlaps.as_ref().map_or(f64::NAN, |o| o[k]);
        (k, s, single, sol.dark.as_ref().map_or(f64::NAN, |d| d.energy))
    });
    let labels = match &setup.label {
        Some(spec) => match spec.operator(&setup.model, g, sol.dark.as_ref().map(|d| &d.full)) {
            Ok(op) => Some(sol.label_values(&op, 0..setup.keep)),
            Err(Error::SingularDenominator(_)) => None,
            Err(e) => return Err(e),
        },
        None => None,
    };
    Ok(PointRecord {
        overlaps: sol.overlaps.as_ref().map(|o| o[..setup.keep].to_vec()),
        spectrum: sol.values,
        dark,
        labels,
    })
}

/// Diagonalizes at every grid point (in parallel) and assembles the results
/// in grid order.
pub fn sweep(setup: &SweepSetup, g_grid: &[f64]) -> Result<SweepResult> {
    if g_grid.is_empty() {
        return Err(Error::InvalidArgument("empty coupling grid".into()));
    }
    if g_grid.windows(2).any(|w| !(w[1] > w[0])) || g_grid.iter().any(|g| !g.is_finite()) {
        return Err(Error::InvalidArgument("coupling grid must be finite and strictly ascending".into()));
    }
    if setup.keep == 0 {
        return Err(Error::InvalidArgument("keep must be at least 1".into()));
    }
    let records: Vec<PointRecord> = g_grid
        .par_iter()
        .map(|&g| record_point(setup, g))
        .collect::<Result<_>>()?;

    let has_dark = setup.dark.is_some();
    let sector_dim = records[0].spectrum.len();
    Ok(SweepResult {
        family: setup.model.family().to_string(),
        truncation: setup.model.truncation(),
        sector: setup.sector,
        sector_dim,
        g_grid: g_grid.to_vec(),
        levels: records.iter().map(|r| r.spectrum[..setup.keep].to_vec()).collect(),
        spectrum: records.iter().map(|r| r.spectrum.clone()).collect(),
        dark_energy: records[0].dark.map(|d| d.3),
        dark_overlaps: has_dark.then(|| records.iter().map(|r| r.overlaps.clone().unwrap_or_default()).collect()),
        dark_level: has_dark.then(|| records.iter().map(|r| r.dark.map_or(0, |d| d.0)).collect()),
        dark_cluster_overlap: has_dark.then(|| records.iter().map(|r| r.dark.map_or(0.0, |d| d.1)).collect()),
        dark_level_overlap: has_dark.then(|| records.iter().map(|r| r.dark.map_or(0.0, |d| d.2)).collect()),
        label_name: setup.label.map(|l| l.name()),
        labels: setup.label.map(|_| records.iter().map(|r| r.labels.clone()).collect()),
        setup: setup.clone(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub g: f64,
    pub cutoffs: Vec<usize>,
    pub levels: usize,
    pub tol: f64,
    /// Max change over the lowest levels between consecutive cutoffs.
    pub changes: Vec<f64>,
    pub converged: bool,
}

/// Compares the lowest `k` eigenvalues across ascending cutoffs.
pub fn convergence_check(model: &Model, g: f64, cutoffs: &[usize], k: usize, tol: f64) -> Result<ConvergenceReport> {
    if cutoffs.len() < 2 {
        return Err(Error::InvalidArgument("convergence check needs at least two cutoffs".into()));
    }
    if cutoffs.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("cutoffs must be strictly ascending".into()));
    }
    let spectra: Vec<Vec<f64>> = cutoffs
        .par_iter()
        .map(|&n| {
            let h = model.with_cutoff(n).with_coupling(g).hamiltonian()?;
            let values = eigh(h.matrix())?.values;
            if k > values.len() {
                return Err(Error::InvalidArgument(format!(
                    "{k} levels requested at dimension {}",
                    values.len()
                )));
            }
            Ok(values[..k].to_vec())
        })
        .collect::<Result<_>>()?;
    let changes: Vec<f64> = spectra
        .windows(2)
        .map(|w| w[0].iter().zip(&w[1]).fold(0.0f64, |m, (a, b)| m.max((a - b).abs())))
        .collect();
    let converged = changes.last().is_some_and(|&c| c < tol);
    Ok(ConvergenceReport {
        g,
        cutoffs: cutoffs.to_vec(),
        levels: k,
        tol,
        changes,
        converged,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CrossingKind {
    DarkCrossing,
    SymmetrySectorCrossing,
    Avoided,
    Unclassified,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossingEvent {
    pub g_star: f64,
    pub energy: f64,
    pub level_indices: [usize; 2],
    pub kind: CrossingKind,
    pub gap: f64,
    /// Label values on the two levels just below `g*`.
    pub labels: Option<[f64; 2]>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Classification {
    pub kind: CrossingKind,
    pub gap: f64,
    pub labels: Option<[f64; 2]>,
}

/// Classifies the level pair at `g_star` from its gap, the dark overlaps and
/// the label values just outside the crossing.
pub fn classify_crossing(setup: &SweepSetup, g_star: f64, levels: [usize; 2]) -> Result<Classification> {
    let [i, j] = levels;
    let at = setup.solve(g_star)?;
    if j >= at.dim() || i >= j {
        return Err(Error::InvalidArgument(format!("invalid level pair ({i}, {j})")));
    }
    let gap = at.values[j] - at.values[i];
    if gap > AVOIDED_GAP {
        return Ok(Classification {
            kind: CrossingKind::Avoided,
            gap,
            labels: None,
        });
    }

    let mut labels: Option<[f64; 2]> = None;
    let mut distinct = setup.label.is_some();
    let mut dark = false;
    for (side, g) in [g_star - OUTSIDE_OFFSET, g_star + OUTSIDE_OFFSET].into_iter().enumerate() {
        let sol = setup.solve(g)?;
        if let Some(ov) = &sol.overlaps {
            dark |= ov[i] > 0.5 || ov[j] > 0.5;
        }
        if let Some(spec) = &setup.label {
            match spec.operator(&setup.model, g, sol.dark.as_ref().map(|d| &d.full)) {
                Ok(op) => {
                    let v = sol.label_values(&op, i..j + 1);
                    let pair = [v[0], v[j - i]];
                    distinct &= (pair[0] - pair[1]).abs() > 10.0 * sol.label_noise(&op);
                    if side == 0 {
                        labels = Some(pair);
                    }
                }
                Err(Error::SingularDenominator(_)) => distinct = false,
                Err(e) => return Err(e),
            }
        }
    }

    let kind = if gap >= CROSSING_TOL {
        CrossingKind::Unclassified
    } else if distinct {
        CrossingKind::SymmetrySectorCrossing
    } else if dark {
        CrossingKind::DarkCrossing
    } else {
        CrossingKind::Unclassified
    };
    Ok(Classification { kind, gap, labels })
}

fn dark_energy_of(sweep: &SweepResult) -> Result<f64> {
    sweep.dark_energy.ok_or(Error::DarkStateNotRegistered)
}

/// Crossings of the dark level with the rest of the spectrum, located by
/// bisecting every grid interval on which `m(g)` changes.
pub fn detect_dark_crossings(sweep: &SweepResult, e_dark: f64) -> Result<Vec<CrossingEvent>> {
    dark_energy_of(sweep)?;
    let setup = &sweep.setup;
    let counts: Vec<usize> = (0..sweep.g_grid.len())
        .map(|p| {
            let dark = sweep.dark_level.as_ref().map_or(usize::MAX, |d| d[p]);
            sweep.spectrum[p]
                .iter()
                .enumerate()
                .filter(|&(k, &v)| k != dark && v < e_dark - COUNT_MARGIN)
                .count()
        })
        .collect();
    let mut start = (sweep.g_grid[0], counts[0]);
    if counts.len() > 1 && touches_dark_energy(&sweep.spectrum[0], sweep.dark_level.as_ref().map(|d| d[0]), e_dark) {
        let g = sweep.g_grid[0] + OUTSIDE_OFFSET.min(0.5 * (sweep.g_grid[1] - sweep.g_grid[0]));
        let m = setup.solve(g)?.count_below(e_dark).ok_or(Error::DarkStateNotRegistered)?;
        start = (g, m);
    }
    let intervals: Vec<usize> = (0..counts.len().saturating_sub(1))
        .filter(|&p| (if p == 0 { start.1 } else { counts[p] }) != counts[p + 1])
        .collect();
    let found: Vec<Vec<f64>> = intervals
        .par_iter()
        .map(|&p| {
            let mut out = Vec::new();
            let left = if p == 0 { start } else { (sweep.g_grid[p], counts[p]) };
            bisect_count(setup, e_dark, left, (sweep.g_grid[p + 1], counts[p + 1]), &mut out)?;
            Ok(out)
        })
        .collect::<Result<_>>()?;

    let mut events = Vec::new();
    for g_star in found.into_iter().flatten() {
        let sol = setup.solve(g_star)?;
        let (dark, _) = sol.dark_level().ok_or(Error::DarkStateNotRegistered)?;
        let k = (0..sol.dim())
            .filter(|&k| k != dark)
            .min_by(|&a, &b| (sol.values[a] - e_dark).abs().total_cmp(&(sol.values[b] - e_dark).abs()))
            .ok_or_else(|| Error::Numerical("no level besides the dark one".into()))?;
        let pair = [k.min(dark), k.max(dark)];
        let class = classify_crossing(setup, g_star, pair)?;
        events.push(CrossingEvent {
            g_star,
            energy: sol.values[k],
            level_indices: pair,
            kind: class.kind,
            gap: class.gap,
            labels: class.labels,
        });
    }
    Ok(events)
}

/// A level other than the dark one already sits on the dark energy at the
/// first grid point. Bisection then starts `OUTSIDE_OFFSET` into the sweep so
/// that levels leaving a degeneracy at the endpoint are not reported.
fn touches_dark_energy(values: &[f64], dark: Option<usize>, e_dark: f64) -> bool {
    values
        .iter()
        .enumerate()
        .any(|(k, v)| Some(k) != dark && (v - e_dark).abs() < DARK_ENERGY_TOL)
}

/// Midpoint counts use eigenvalues alone; the dark level sits on `e_dark`
/// and never falls below the counting margin.
fn bisect_count(
    setup: &SweepSetup,
    e_dark: f64,
    (mut a, ma): (f64, usize),
    (mut b, mb): (f64, usize),
    out: &mut Vec<f64>,
) -> Result<()> {
    for _ in 0..MAX_REFINE_STEPS {
        let c = 0.5 * (a + b);
        if b - a <= BISECTION_TOL {
            let sol = setup.solve(c)?;
            let (dark, _) = sol.dark_level().ok_or(Error::DarkStateNotRegistered)?;
            let closest = sol
                .values
                .iter()
                .enumerate()
                .filter(|&(k, _)| k != dark)
                .map(|(_, v)| (v - e_dark).abs())
                .fold(f64::INFINITY, f64::min);
            if closest < DARK_ENERGY_TOL || c <= a || c >= b {
                out.push(c);
                return Ok(());
            }
        }
        let mc = setup.eigenvalues(c)?.iter().filter(|&&v| v < e_dark - COUNT_MARGIN).count();
        if mc != ma && mc != mb {
            bisect_count(setup, e_dark, (a, ma), (c, mc), out)?;
            return bisect_count(setup, e_dark, (c, mc), (b, mb), out);
        }
        if mc == ma {
            a = c;
        } else {
            b = c;
        }
    }
    log::warn!("crossing bisection hit the step limit near g = {}", 0.5 * (a + b));
    out.push(0.5 * (a + b));
    Ok(())
}

/// Local minima of adjacent-level gaps among the kept levels, refined by
/// golden-section search and classified. Minima whose grid gap exceeds
/// `max_gap` are skipped.
pub fn detect_gap_minima(sweep: &SweepResult, max_gap: f64) -> Result<Vec<CrossingEvent>> {
    let setup = &sweep.setup;
    let n = sweep.g_grid.len();
    let keep = setup.keep;
    let mut candidates = Vec::new();
    for k in 0..keep.saturating_sub(1) {
        let gap: Vec<f64> = sweep.levels.iter().map(|l| l[k + 1] - l[k]).collect();
        for i in 1..n.saturating_sub(1) {
            let deeper = gap[i] <= gap[i - 1] && gap[i] <= gap[i + 1];
            let pronounced = gap[i - 1].max(gap[i + 1]) - gap[i] > CROSSING_TOL;
            if deeper && pronounced && gap[i] < max_gap {
                candidates.push((k, sweep.g_grid[i - 1], sweep.g_grid[i + 1]));
            }
        }
    }
    let mut events: Vec<CrossingEvent> = candidates
        .par_iter()
        .map(|&(k, lo, hi)| {
            let g_star = golden_gap_minimum(setup, k, lo, hi)?;
            let class = classify_crossing(setup, g_star, [k, k + 1])?;
            let sol = setup.solve(g_star)?;
            Ok(CrossingEvent {
                g_star,
                energy: 0.5 * (sol.values[k] + sol.values[k + 1]),
                level_indices: [k, k + 1],
                kind: class.kind,
                gap: class.gap,
                labels: class.labels,
            })
        })
        .collect::<Result<_>>()?;
    events.sort_by(|a, b| a.g_star.total_cmp(&b.g_star).then(a.level_indices.cmp(&b.level_indices)));
    Ok(events)
}

fn golden_gap_minimum(setup: &SweepSetup, k: usize, mut lo: f64, mut hi: f64) -> Result<f64> {
    let gap = |g: f64| -> Result<f64> {
        let v = setup.eigenvalues(g)?;
        Ok(v[k + 1] - v[k])
    };
    let mut x1 = hi - GOLDEN * (hi - lo);
    let mut x2 = lo + GOLDEN * (hi - lo);
    let mut f1 = gap(x1)?;
    let mut f2 = gap(x2)?;
    for _ in 0..MAX_REFINE_STEPS {
        if hi - lo <= BISECTION_TOL {
            break;
        }
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - GOLDEN * (hi - lo);
            f1 = gap(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + GOLDEN * (hi - lo);
            f2 = gap(x2)?;
        }
    }
    Ok(if f1 <= f2 { x1 } else { x2 })
}

/// Baseline energies `nω − g²/ω ± ε`, returned as `(+ε, −ε)`.
pub fn baseline_energy(n: usize, g: f64, epsilon: f64, omega: f64) -> Result<(f64, f64)> {
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(Error::InvalidArgument(format!("omega must be positive, got {omega}")));
    }
    let base = n as f64 * omega - g * g / omega;
    Ok((base + epsilon, base - epsilon))
}
