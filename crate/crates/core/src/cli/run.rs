//! Task execution, figure checks and the run manifest.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::darkstates::{jc_ladder_vector, residual};
use crate::error::Error;
use crate::fockalg::{commutator_interior_norm, NULLSPACE_TOL, INTERIOR_MARGIN, HERMITIAN_TOL};
use crate::models::Model;
use crate::spectra::{
    convergence_check, detect_dark_crossings, detect_gap_minima, sweep, CrossingEvent, CrossingKind, LabelSpec,
    SweepResult, AVOIDED_GAP, BISECTION_TOL, CROSSING_TOL, DARK_ENERGY_TOL, DEGENERACY_TOL,
};
use crate::symmetry::{
    bogoliubov_coeffs, check_symmetry, dark_projector, excitation_number_op, hidden_symmetry_j,
    hidden_symmetry_j_multimode, mode_number_ops, parity_op, SymmetryReport, COMMUTATOR_THRESHOLD,
};

use super::config::{Format, Panel, RunConfig, Task};
use super::emit::{baselines, csv, sidecar, sweep_columns, to_json, write_atomic, BaselineCurve};
use super::presets::{preset, single_mode_partner};
use super::CliError;

/// Environment variable overriding the worker thread count.
pub const THREADS_ENV: &str = "DARKRABI_THREADS";
/// Energy window for levels counted as sitting on a dark line.
pub const LEVEL_MATCH_TOL: f64 = 1e-10;
/// Tolerance for the pinned dark level in figure checks.
pub const PINNING_TOL: f64 = 1e-8;
/// Minimum dark overlap away from crossings in figure checks.
pub const OVERLAP_TOL: f64 = 1e-6;
/// Distance from a crossing inside which cluster overlaps are used.
pub const CROSSING_NEIGHBOURHOOD: f64 = 1e-3;
/// Agreement required between two-mode `n_b = 0` levels and the single-mode spectrum.
pub const EQUIVALENCE_TOL: f64 = 1e-6;
/// Levels compared in the multimode equivalence check.
pub const EQUIVALENCE_LEVELS: usize = 8;

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub out_dir: Option<PathBuf>,
    pub threads: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskVerdict {
    Pass,
    Fail,
    Completed,
}

#[derive(Clone, Debug, Serialize)]
pub struct TaskRecord {
    pub task: String,
    pub verdict: TaskVerdict,
    pub files: Vec<String>,
    pub summary: Value,
}

#[derive(Clone, Debug, Serialize)]
pub struct Tolerances {
    pub crossing: f64,
    pub avoided_gap: f64,
    pub bisection: f64,
    pub degeneracy: f64,
    pub dark_energy: f64,
    pub nullspace: f64,
    pub hermitian: f64,
    pub commutator: f64,
    pub interior_margin: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            crossing: CROSSING_TOL,
            avoided_gap: AVOIDED_GAP,
            bisection: BISECTION_TOL,
            degeneracy: DEGENERACY_TOL,
            dark_energy: DARK_ENERGY_TOL,
            nullspace: NULLSPACE_TOL,
            hermitian: HERMITIAN_TOL,
            commutator: COMMUTATOR_THRESHOLD,
            interior_margin: INTERIOR_MARGIN,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Manifest {
    pub config_sha256: String,
    pub family: String,
    pub truncation: Vec<usize>,
    pub tolerances: Tolerances,
    pub tasks: Vec<TaskRecord>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn run_path(path: &Path, opts: &RunOptions) -> Result<Manifest, CliError> {
    let text = fs::read_to_string(path)?;
    run_text(&text, opts)
}

pub fn run_figure(panel: Panel, opts: &RunOptions) -> Result<Manifest, CliError> {
    run_text(preset(panel), opts)
}

pub fn run_text(text: &str, opts: &RunOptions) -> Result<Manifest, CliError> {
    let cfg = RunConfig::parse(text)?;
    let out = opts
        .out_dir
        .clone()
        .or_else(|| cfg.output.dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    let sha = sha256_hex(text.as_bytes());
    match thread_count(opts.threads)? {
        Some(k) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(k)
                .build()
                .map_err(|e| CliError::Parse(format!("thread pool: {e}")))?;
            pool.install(|| execute(&cfg, sha, &out))
        }
        None => execute(&cfg, sha, &out),
    }
}

fn thread_count(flag: Option<usize>) -> Result<Option<usize>, CliError> {
    if flag.is_some() {
        return Ok(flag);
    }
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map(Some)
            .map_err(|_| CliError::Parse(format!("{THREADS_ENV} must be a positive integer, got `{v}`"))),
        Err(_) => Ok(None),
    }
}

struct Context<'a> {
    cfg: &'a RunConfig,
    model: Model,
    out: &'a Path,
    sweep: Option<SweepResult>,
}

impl Context<'_> {
    fn sweep(&mut self) -> Result<&SweepResult, CliError> {
        if self.sweep.is_none() {
            let setup = self.cfg.setup(&self.model).ok_or_else(no_sweep)?;
            let grid = self.cfg.grid()?.ok_or_else(no_sweep)?;
            self.sweep = Some(sweep(&setup, &grid)?);
        }
        Ok(self.sweep.as_ref().expect("sweep just computed"))
    }

    fn write(&self, name: &str, contents: &str, files: &mut Vec<String>) -> Result<(), CliError> {
        write_atomic(&self.out.join(name), contents.as_bytes())?;
        files.push(name.to_string());
        Ok(())
    }
}

fn no_sweep() -> CliError {
    CliError::Precondition(Error::InvalidArgument("this task needs a sweep block".into()))
}

fn execute(cfg: &RunConfig, sha: String, out: &Path) -> Result<Manifest, CliError> {
    let model = cfg.model()?;
    validate(cfg, &model)?;
    fs::create_dir_all(out)?;
    let mut ctx = Context {
        cfg,
        model: model.clone(),
        out,
        sweep: None,
    };
    let mut records = Vec::new();
    for task in &cfg.tasks {
        log::info!("running task {task}");
        let record = match task {
            Task::Spectrum => task_spectrum(&mut ctx)?,
            Task::Crossings => task_crossings(&mut ctx)?,
            Task::DarkState => task_dark_state(&ctx)?,
            Task::SymmetryCheck => task_symmetry(&ctx)?,
            Task::Convergence => task_convergence(&ctx)?,
            Task::Figure(panel) => task_figure(*panel, out)?,
        };
        records.push(record);
    }
    let manifest = Manifest {
        config_sha256: sha,
        family: model.family().to_string(),
        truncation: model.truncation(),
        tolerances: Tolerances::default(),
        tasks: records,
    };
    write_atomic(&out.join("manifest.json"), to_json(&manifest).as_bytes())?;
    Ok(manifest)
}

/// Checks every task's preconditions before anything runs.
fn validate(cfg: &RunConfig, model: &Model) -> Result<(), CliError> {
    let needs_sweep = cfg.tasks.iter().any(|t| matches!(t, Task::Spectrum | Task::Crossings));
    if needs_sweep && cfg.sweep.is_none() {
        return Err(no_sweep());
    }
    if let (Some(setup), Some(grid)) = (cfg.setup(model), cfg.grid()?) {
        if needs_sweep {
            let g = *grid.last().expect("grid is non-empty");
            let sol = setup.solve(g)?;
            if setup.keep == 0 || setup.keep > sol.dim() {
                return Err(CliError::Precondition(Error::InvalidArgument(format!(
                    "keep = {} must lie in 1..={}",
                    setup.keep,
                    sol.dim()
                ))));
            }
            if let Some(label) = &setup.label {
                label.operator(&setup.model, g, sol.dark.as_ref().map(|d| &d.full))?;
            }
        }
    }
    if cfg.tasks.contains(&Task::DarkState) {
        let spec = cfg.dark.ok_or(CliError::Precondition(Error::DarkStateNotRegistered))?;
        for &g in &dark_state_points(cfg) {
            spec.state(&model.with_coupling(g))?;
        }
    }
    if cfg.tasks.contains(&Task::Convergence) && cfg.convergence.is_none() {
        return Err(CliError::Precondition(Error::InvalidArgument(
            "convergence task needs a convergence block".into(),
        )));
    }
    Ok(())
}

fn dark_state_points(cfg: &RunConfig) -> Vec<f64> {
    cfg.dark_state.as_ref().map_or_else(|| vec![0.5], |d| d.g.clone())
}

fn task_spectrum(ctx: &mut Context) -> Result<TaskRecord, CliError> {
    let cfg = ctx.cfg;
    let s = ctx.sweep()?.clone();
    let cols = sweep_columns(&s);
    let base = match &cfg.baselines {
        Some(b) => baselines(&s, b.n_max, b.epsilon)?,
        None => Vec::new(),
    };
    let mut files = Vec::new();
    if cfg.wants(Format::Csv) {
        ctx.write("spectrum.csv", &csv(&format!("{} spectrum", s.family), &cols), &mut files)?;
    }
    if cfg.wants(Format::Json) {
        ctx.write("spectrum.json", &to_json(&sidecar(&s, &cols, &[], &base, Value::Null)), &mut files)?;
    }
    Ok(TaskRecord {
        task: Task::Spectrum.to_string(),
        verdict: TaskVerdict::Completed,
        files,
        summary: json!({"points": s.g_grid.len(), "keep": s.setup.keep, "sector_dim": s.sector_dim}),
    })
}

fn find_crossings(cfg: &RunConfig, s: &SweepResult) -> Result<(Vec<CrossingEvent>, Vec<CrossingEvent>), CliError> {
    let dark = match s.dark_energy {
        Some(e) => detect_dark_crossings(s, e)?,
        None => Vec::new(),
    };
    let max_gap = cfg.crossings.as_ref().map_or(0.05, |c| c.max_gap);
    let minima = if s.setup.label.is_some() {
        detect_gap_minima(s, max_gap)?
    } else {
        Vec::new()
    };
    Ok((dark, minima))
}

fn kind_counts(events: &[CrossingEvent]) -> Value {
    let count = |k: CrossingKind| events.iter().filter(|e| e.kind == k).count();
    json!({
        "dark_crossing": count(CrossingKind::DarkCrossing),
        "symmetry_sector_crossing": count(CrossingKind::SymmetrySectorCrossing),
        "avoided": count(CrossingKind::Avoided),
        "unclassified": count(CrossingKind::Unclassified),
    })
}

fn task_crossings(ctx: &mut Context) -> Result<TaskRecord, CliError> {
    let cfg = ctx.cfg;
    let s = ctx.sweep()?.clone();
    let (dark, minima) = find_crossings(cfg, &s)?;
    let mut files = Vec::new();
    if cfg.wants(Format::Json) {
        ctx.write(
            "crossings.json",
            &to_json(&json!({"dark_crossings": dark, "gap_minima": minima})),
            &mut files,
        )?;
    }
    Ok(TaskRecord {
        task: Task::Crossings.to_string(),
        verdict: TaskVerdict::Completed,
        files,
        summary: json!({"dark_crossings": kind_counts(&dark), "gap_minima": kind_counts(&minima)}),
    })
}

fn task_dark_state(ctx: &Context) -> Result<TaskRecord, CliError> {
    let spec = ctx.cfg.dark.ok_or(CliError::Precondition(Error::DarkStateNotRegistered))?;
    let mut entries = Vec::new();
    let mut worst: f64 = 0.0;
    for g in dark_state_points(ctx.cfg) {
        let model = ctx.model.with_coupling(g);
        let dark = spec.state(&model)?;
        let h = model.hamiltonian()?;
        let r = residual(&h, &dark.state, dark.energy)?;
        worst = worst.max(r);
        let basis = dark.state.basis();
        let components: Vec<Value> = dark
            .state
            .amplitudes()
            .iter()
            .enumerate()
            .filter(|(_, a)| a.norm() > 0.0)
            .map(|(i, a)| {
                let (occ, q) = basis.decompose(i);
                let qubits = ["gg", "ge", "eg", "ee"][q];
                json!({"index": i, "photons": occ, "qubits": qubits, "re": a.re, "im": a.im})
            })
            .collect();
        entries.push(json!({
            "g": g,
            "label": dark.state.label(),
            "energy": dark.energy,
            "residual": r,
            "branch": dark.branch,
            "construction": dark.construction,
            "components": components,
        }));
    }
    let mut files = Vec::new();
    if ctx.cfg.wants(Format::Json) {
        ctx.write("dark_state.json", &to_json(&entries), &mut files)?;
    }
    Ok(TaskRecord {
        task: Task::DarkState.to_string(),
        verdict: if worst < DARK_ENERGY_TOL {
            TaskVerdict::Pass
        } else {
            TaskVerdict::Fail
        },
        files,
        summary: json!({"max_residual": worst, "threshold": DARK_ENERGY_TOL}),
    })
}

#[derive(Serialize)]
struct GReport {
    g: f64,
    #[serde(flatten)]
    report: SymmetryReport,
}

fn symmetry_reports(cfg: &RunConfig, model: &Model, g: f64) -> Result<Vec<SymmetryReport>, CliError> {
    let margin = cfg.symmetry.as_ref().map_or(INTERIOR_MARGIN, |s| s.margin);
    let threshold = cfg.symmetry.as_ref().map_or(COMMUTATOR_THRESHOLD, |s| s.threshold);
    let scaled = model.with_coupling(g);
    let h = scaled.hamiltonian()?;
    let mut out = Vec::new();
    let skip_condition = |e: Error| match e {
        Error::ParameterCondition(_) | Error::SingularDenominator(_) => Ok(()),
        other => Err(other),
    };
    match &scaled {
        Model::Aqrm2 { params, cutoff } => {
            out.push(check_symmetry("R", &parity_op(*cutoff)?, &h, 0, threshold)?);
            out.push(check_symmetry("C", &excitation_number_op(*cutoff)?, &h, 0, threshold)?);
            match hidden_symmetry_j(params, *cutoff) {
                Ok(j) => out.push(check_symmetry("J", &j, &h, margin, threshold)?),
                Err(e) => skip_condition(e)?,
            }
        }
        Model::Jc2 { cutoff, .. } => {
            out.push(check_symmetry("C", &excitation_number_op(*cutoff)?, &h, 0, threshold)?);
            out.push(check_symmetry("R", &parity_op(*cutoff)?, &h, 0, threshold)?);
        }
        Model::Multimode { cutoffs, .. } => {
            let Model::Multimode { params: profile, .. } = model else { unreachable!() };
            let coeffs = bogoliubov_coeffs(&profile.g_col1)?;
            for (j, op) in mode_number_ops(&coeffs, cutoffs)?.iter().enumerate() {
                out.push(check_symmetry(&format!("n_b{}", j + 2), op, &h, margin, threshold)?);
            }
        }
        Model::MultimodeTransformed {
            params,
            cutoff,
            rest_cutoffs,
        } => match hidden_symmetry_j_multimode(params, *cutoff, rest_cutoffs) {
            Ok(j) => out.push(check_symmetry("J", &j, &h, margin, threshold)?),
            Err(e) => skip_condition(e)?,
        },
    }
    if let Some(spec) = &cfg.dark {
        let dark = spec.state(&scaled)?;
        out.push(check_symmetry("S", &dark_projector(&dark.state)?, &h, 0, threshold)?);
    }
    Ok(out)
}

fn task_symmetry(ctx: &Context) -> Result<TaskRecord, CliError> {
    let points = ctx.cfg.symmetry.as_ref().map_or_else(|| vec![0.5], |s| s.g.clone());
    let mut reports = Vec::new();
    for g in points {
        for report in symmetry_reports(ctx.cfg, &ctx.model, g)? {
            reports.push(GReport { g, report });
        }
    }
    let mut files = Vec::new();
    if ctx.cfg.wants(Format::Json) {
        ctx.write("symmetry.json", &to_json(&reports), &mut files)?;
    }
    let summary: Vec<Value> = reports
        .iter()
        .map(|r| json!({"operator": r.report.operator_name, "g": r.g, "verdict": r.report.verdict}))
        .collect();
    Ok(TaskRecord {
        task: Task::SymmetryCheck.to_string(),
        verdict: TaskVerdict::Completed,
        files,
        summary: Value::Array(summary),
    })
}

fn task_convergence(ctx: &Context) -> Result<TaskRecord, CliError> {
    let c = ctx.cfg.convergence.as_ref().ok_or_else(|| {
        CliError::Precondition(Error::InvalidArgument("convergence task needs a convergence block".into()))
    })?;
    let report = convergence_check(&ctx.model, c.g, &c.cutoffs, c.levels, c.tol)?;
    let mut files = Vec::new();
    if ctx.cfg.wants(Format::Json) {
        ctx.write("convergence.json", &to_json(&report), &mut files)?;
    }
    Ok(TaskRecord {
        task: Task::Convergence.to_string(),
        verdict: if report.converged {
            TaskVerdict::Pass
        } else {
            TaskVerdict::Fail
        },
        files,
        summary: json!({"changes": report.changes, "tol": report.tol}),
    })
}

/// Sweep, crossings and the panel's own check for a shipped figure.
pub struct FigureData {
    pub config: RunConfig,
    pub sweep: SweepResult,
    pub dark_crossings: Vec<CrossingEvent>,
    pub gap_minima: Vec<CrossingEvent>,
    pub baselines: Vec<BaselineCurve>,
    pub verdict: TaskVerdict,
    pub check: Value,
}

pub fn figure_data(panel: Panel) -> Result<FigureData, CliError> {
    let config = RunConfig::parse(preset(panel))?;
    let model = config.model()?;
    let setup = config.setup(&model).ok_or_else(no_sweep)?;
    let grid = config.grid()?.ok_or_else(no_sweep)?;
    let s = sweep(&setup, &grid)?;
    let (dark, minima) = find_crossings(&config, &s)?;
    let base = match &config.baselines {
        Some(b) => baselines(&s, b.n_max, b.epsilon)?,
        None => Vec::new(),
    };
    let (pass, check) = match panel {
        Panel::P1a | Panel::P3b => pinning_check(&s, &dark),
        Panel::P1b | Panel::P3d => hidden_check(&config, &model, &minima)?,
        Panel::P2a => ladder_check(&s)?,
        Panel::P2b => degeneracy_check(&s, &dark),
        Panel::P3a | Panel::P3c => {
            let partner = single_mode_partner(panel).expect("two-mode panels have a partner");
            equivalence_check(&s, partner)?
        }
    };
    Ok(FigureData {
        config,
        sweep: s,
        dark_crossings: dark,
        gap_minima: minima,
        baselines: base,
        verdict: if pass { TaskVerdict::Pass } else { TaskVerdict::Fail },
        check,
    })
}

fn task_figure(panel: Panel, out: &Path) -> Result<TaskRecord, CliError> {
    let data = figure_data(panel)?;
    let cols = sweep_columns(&data.sweep);
    let id = panel.id();
    let mut files = Vec::new();
    let csv_name = format!("fig{id}.csv");
    write_atomic(&out.join(&csv_name), csv(&format!("figure {id}"), &cols).as_bytes())?;
    files.push(csv_name);
    let mut events = data.dark_crossings.clone();
    events.extend(data.gap_minima.iter().cloned());
    let json_name = format!("fig{id}.json");
    let side = sidecar(&data.sweep, &cols, &events, &data.baselines, data.check.clone());
    write_atomic(&out.join(&json_name), to_json(&side).as_bytes())?;
    files.push(json_name);
    Ok(TaskRecord {
        task: Task::Figure(panel).to_string(),
        verdict: data.verdict,
        files,
        summary: json!({
            "check": data.check,
            "dark_crossings": kind_counts(&data.dark_crossings),
            "gap_minima": kind_counts(&data.gap_minima),
        }),
    })
}

/// Dark level within [`PINNING_TOL`] of its energy at every point, with
/// overlap above `1 − OVERLAP_TOL` (cluster overlap near crossings).
pub fn pinning_check(s: &SweepResult, crossings: &[CrossingEvent]) -> (bool, Value) {
    let (Some(levels), Some(single), Some(cluster), Some(e)) =
        (&s.dark_level, &s.dark_level_overlap, &s.dark_cluster_overlap, s.dark_energy)
    else {
        return (false, json!({"error": "no dark state registered"}));
    };
    let mut max_dev: f64 = 0.0;
    let mut min_overlap: f64 = 1.0;
    for (p, &g) in s.g_grid.iter().enumerate() {
        max_dev = max_dev.max((s.spectrum[p][levels[p]] - e).abs());
        let near = crossings.iter().any(|c| (c.g_star - g).abs() < CROSSING_NEIGHBOURHOOD);
        min_overlap = min_overlap.min(if near { cluster[p] } else { single[p] });
    }
    let real = crossings.iter().filter(|c| c.g_star > 0.0).count();
    let pass = max_dev < PINNING_TOL && min_overlap > 1.0 - OVERLAP_TOL && real >= 1;
    (
        pass,
        json!({
            "dark_energy": e,
            "max_energy_deviation": max_dev,
            "min_overlap": min_overlap,
            "crossings": real,
        }),
    )
}

fn hidden_check(cfg: &RunConfig, model: &Model, minima: &[CrossingEvent]) -> Result<(bool, Value), CliError> {
    let points = cfg.symmetry.as_ref().map_or_else(|| vec![0.1, 0.5, 1.0], |s| s.g.clone());
    let margin = cfg.symmetry.as_ref().map_or(INTERIOR_MARGIN, |s| s.margin);
    let mut norms = Vec::new();
    for &g in &points {
        let scaled = model.with_coupling(g);
        let h = scaled.hamiltonian()?;
        let j = LabelSpec::HiddenJ.operator(model, g, None)?;
        norms.push(commutator_interior_norm(&j, &h, margin)?);
    }
    let crossings: Vec<&CrossingEvent> = minima.iter().filter(|e| e.gap < CROSSING_TOL).collect();
    let labelled = crossings
        .iter()
        .filter(|e| e.kind == CrossingKind::SymmetrySectorCrossing)
        .count();
    let pass = norms.iter().all(|&n| n < COMMUTATOR_THRESHOLD) && !crossings.is_empty() && labelled == crossings.len();
    Ok((
        pass,
        json!({
            "g": points,
            "interior_commutator_norms": norms,
            "margin": margin,
            "crossings": crossings.len(),
            "distinct_label_crossings": labelled,
        }),
    ))
}

/// Sector levels within [`LEVEL_MATCH_TOL`] of `energy` at each point.
pub fn levels_at(s: &SweepResult, energy: f64) -> Vec<Vec<usize>> {
    s.spectrum
        .iter()
        .map(|spec| {
            spec.iter()
                .enumerate()
                .filter(|(_, v)| (*v - energy).abs() < LEVEL_MATCH_TOL)
                .map(|(k, _)| k)
                .collect()
        })
        .collect()
}

/// Exactly one level at `E = ω` carrying the ladder state with overlap
/// above `1 − 1e−10`, at every point.
fn ladder_check(s: &SweepResult) -> Result<(bool, Value), CliError> {
    let setup = &s.setup;
    let Model::Jc2 { params, cutoff } = &setup.model else {
        return Err(CliError::Precondition(Error::InvalidArgument("ladder check needs the jc2 family".into())));
    };
    let psi = jc_ladder_vector(0, *cutoff)?;
    let idx = setup.sector_indices()?;
    let amps = psi.amplitudes();
    let restricted: Vec<_> = match &idx {
        Some(idx) => idx.iter().map(|&i| amps[i]).collect(),
        None => amps.iter().copied().collect(),
    };
    let mut matches = Vec::new();
    for &g in &s.g_grid {
        let sol = setup.solve(g)?;
        let n = sol
            .values
            .iter()
            .enumerate()
            .filter(|(_, v)| (*v - params.omega).abs() < LEVEL_MATCH_TOL)
            .filter(|&(k, _)| {
                let col = sol.vectors.column(k);
                let ov: crate::fockalg::C64 = col.iter().zip(&restricted).map(|(a, b)| a.conj() * b).sum();
                ov.norm_sqr() > 1.0 - 1e-10
            })
            .count();
        matches.push(n);
    }
    let pass = matches.iter().all(|&n| n == 1);
    let on_line: Vec<usize> = levels_at(s, params.omega).iter().map(Vec::len).collect();
    Ok((pass, json!({"ladder_state_levels": matches, "levels_at_omega": on_line})))
}

fn degeneracy_check(s: &SweepResult, dark: &[CrossingEvent]) -> (bool, Value) {
    let e = s.dark_energy.unwrap_or(1.0);
    let counts: Vec<usize> = levels_at(s, e).iter().map(Vec::len).collect();
    let pass = counts.iter().all(|&n| n == 2) && dark.is_empty();
    (pass, json!({"levels_at_dark_energy": counts, "dark_crossings": dark.len()}))
}

/// Lowest `n_b = 0` levels of a two-mode sweep against the single-mode panel.
fn equivalence_check(s: &SweepResult, partner: Panel) -> Result<(bool, Value), CliError> {
    let cfg = RunConfig::parse(preset(partner))?;
    let model = cfg.model()?;
    let mut setup = cfg.setup(&model).ok_or_else(no_sweep)?;
    setup.keep = EQUIVALENCE_LEVELS;
    let single = sweep(&setup, &s.g_grid)?;
    let labels = s.labels.as_ref().ok_or_else(|| {
        CliError::Precondition(Error::InvalidArgument("equivalence check needs mode-number labels".into()))
    })?;
    let mut deviations = Vec::new();
    for (p, lab) in labels.iter().enumerate() {
        let lab = lab.as_ref().ok_or_else(|| CliError::Numerical(Error::Numerical("missing labels".into())))?;
        let zero: Vec<f64> = s.levels[p]
            .iter()
            .zip(lab)
            .filter(|(_, l)| l.abs() < 1e-6)
            .map(|(e, _)| *e)
            .take(EQUIVALENCE_LEVELS)
            .collect();
        let dev = if zero.len() < EQUIVALENCE_LEVELS {
            f64::INFINITY
        } else {
            zero.iter()
                .zip(&single.levels[p])
                .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
        };
        deviations.push(dev);
    }
    let pass = deviations.iter().all(|&d| d < EQUIVALENCE_TOL);
    let worst = deviations.iter().copied().filter(|d| d.is_finite()).fold(0.0f64, f64::max);
    let short = deviations.iter().filter(|d| !d.is_finite()).count();
    Ok((
        pass,
        json!({
            "partner": format!("figure:{}", partner.id()),
            "levels": EQUIVALENCE_LEVELS,
            "max_finite_deviation": worst,
            "points_short_of_levels": short,
            "deviation_per_point": deviations,
        }),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_is_hex_sha256() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn empty_task_list_writes_manifest_only() {
        let dir = tempfile::tempdir().unwrap();
        let text = r#"{"family": "aqrm2", "params": {"delta1": 0.6, "delta2": 0.3, "g1": 1.0, "g2": 1.0, "eps1": 0.0, "eps2": 0.0}, "truncation": {"cutoffs": [6]}}"#;
        let opts = RunOptions {
            out_dir: Some(dir.path().to_path_buf()),
            threads: Some(1),
        };
        let m = run_text(text, &opts).unwrap();
        assert!(m.tasks.is_empty());
        let names: Vec<_> = fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
        assert_eq!(names, vec![std::ffi::OsString::from("manifest.json")]);
    }

    #[test]
    fn missing_sweep_is_precondition() {
        let text = r#"{"family": "aqrm2", "params": {"delta1": 0.6, "delta2": 0.3, "g1": 1.0, "g2": 1.0, "eps1": 0.0, "eps2": 0.0}, "truncation": {"cutoffs": [6]}, "tasks": ["spectrum"]}"#;
        let dir = tempfile::tempdir().unwrap();
        let opts = RunOptions {
            out_dir: Some(dir.path().to_path_buf()),
            threads: Some(1),
        };
        assert_eq!(run_text(text, &opts).unwrap_err().exit_code(), 3);
    }
}
