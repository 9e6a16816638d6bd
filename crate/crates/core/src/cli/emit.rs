//! CSV and JSON emission with atomic file writes.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};

use crate::spectra::{baseline_energy, CrossingEvent, SweepResult};

/// Writes `bytes` to a sibling temporary file and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let tmp = path.with_file_name(format!(".{name}.tmp"));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)
}

/// Seventeen significant digits.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else {
        format!("{x:.16e}")
    }
}

/// Pretty JSON via `serde_json::Value`, so re-serializing parsed output is
/// byte-identical.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let v = serde_json::to_value(value).expect("serializable value");
    let mut s = serde_json::to_string_pretty(&v).expect("serializable value");
    s.push('\n');
    s
}

pub struct Column {
    pub name: String,
    pub doc: String,
    pub cells: Vec<String>,
}

impl Column {
    pub fn numeric(name: impl Into<String>, doc: impl Into<String>, values: impl IntoIterator<Item = f64>) -> Self {
        Self {
            name: name.into(),
            doc: doc.into(),
            cells: values.into_iter().map(fmt_num).collect(),
        }
    }
}

/// CSV with `#` comment lines documenting every column.
pub fn csv(title: &str, columns: &[Column]) -> String {
    let mut out = format!("# {title}\n");
    for c in columns {
        out.push_str(&format!("# {}: {}\n", c.name, c.doc));
    }
    let names: Vec<&str> = columns.iter().map(|c| c.name.as_str()).collect();
    out.push_str(&names.join(","));
    out.push('\n');
    let rows = columns.first().map_or(0, |c| c.cells.len());
    for r in 0..rows {
        let row: Vec<&str> = columns.iter().map(|c| c.cells[r].as_str()).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Grid column, kept eigenvalues, dark-level data and label values.
pub fn sweep_columns(sweep: &SweepResult) -> Vec<Column> {
    let keep = sweep.setup.keep;
    let mut cols = vec![Column::numeric("g", "coupling scale applied to the coupling profile", sweep.g_grid.iter().copied())];
    for k in 0..keep {
        cols.push(Column::numeric(
            format!("E{}", k + 1),
            format!("eigenvalue {} in ascending order", k + 1),
            sweep.levels.iter().map(|l| l[k]),
        ));
    }
    if let (Some(dark), Some(cluster)) = (&sweep.dark_level, &sweep.dark_cluster_overlap) {
        cols.push(Column::numeric(
            "dark_energy",
            "eigenvalue of the level identified with the registered dark state",
            dark.iter().zip(&sweep.spectrum).map(|(&d, s)| s[d]),
        ));
        cols.push(Column {
            name: "dark_level".into(),
            doc: "1-based index of that level".into(),
            cells: dark.iter().map(|d| (d + 1).to_string()).collect(),
        });
        cols.push(Column::numeric(
            "dark_overlap",
            "summed squared overlap of the dark state with its degenerate cluster",
            cluster.iter().copied(),
        ));
    }
    if let (Some(labels), Some(name)) = (&sweep.labels, &sweep.label_name) {
        for k in 0..keep {
            cols.push(Column::numeric(
                format!("{name}_{}", k + 1),
                format!("expectation value of {name} on level {}", k + 1),
                labels.iter().map(|l| l.as_ref().map_or(f64::NAN, |v| v[k])),
            ));
        }
    }
    cols
}

#[derive(Clone, Debug, Serialize)]
pub struct BaselineCurve {
    pub n: usize,
    pub sign: &'static str,
    pub values: Vec<f64>,
}

/// Baselines `nω − g²/ω ± ε` over the sweep grid for `n ≤ n_max`.
pub fn baselines(sweep: &SweepResult, n_max: usize, epsilon: f64) -> crate::Result<Vec<BaselineCurve>> {
    let omega = sweep.setup.model.omega();
    let mut out = Vec::new();
    for n in 0..=n_max {
        let pairs: Vec<(f64, f64)> = sweep
            .g_grid
            .iter()
            .map(|&g| baseline_energy(n, g, epsilon, omega))
            .collect::<crate::Result<_>>()?;
        out.push(BaselineCurve {
            n,
            sign: "+",
            values: pairs.iter().map(|p| p.0).collect(),
        });
        out.push(BaselineCurve {
            n,
            sign: "-",
            values: pairs.iter().map(|p| p.1).collect(),
        });
    }
    Ok(out)
}

/// JSON sidecar accompanying a sweep CSV.
pub fn sidecar(
    sweep: &SweepResult,
    columns: &[Column],
    crossings: &[CrossingEvent],
    baselines: &[BaselineCurve],
    extra: Value,
) -> Value {
    json!({
        "family": sweep.family,
        "truncation": sweep.truncation,
        "sector": sweep.sector,
        "sector_dim": sweep.sector_dim,
        "points": sweep.g_grid.len(),
        "keep": sweep.setup.keep,
        "dark_energy": sweep.dark_energy,
        "label": sweep.label_name,
        "columns": columns.iter().map(|c| json!({"name": c.name, "doc": c.doc})).collect::<Vec<_>>(),
        "crossings": crossings,
        "baselines": baselines,
        "extra": extra,
    })
}
