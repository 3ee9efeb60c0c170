//! Sweep results and their CSV / JSON serialisation.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use super::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::stats::Estimate;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Axis {
    pub name: String,
    pub unit: String,
}

/// One grid point of one series.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub series: String,
    pub axis_value: f64,
    pub analytic: Option<f64>,
    pub mc: Option<Estimate>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultTable {
    pub figure: u32,
    pub title: String,
    pub axis: Axis,
    /// Unit of the analytic and Monte Carlo columns.
    pub value_unit: String,
    /// How the analytic column is obtained.
    pub analytic_source: String,
    pub rows: Vec<Row>,
    pub seed: u64,
    pub config: ExperimentConfig,
}

/// Shortest representation that parses back to the same `f64`, in
/// scientific notation outside `[1e-4, 1e16)`.
fn fmt_f64(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || (1e-4..1e16).contains(&a) || !a.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

impl ResultTable {
    pub fn header(&self) -> String {
        let u = &self.value_unit;
        format!(
            "series,{} [{}],analytic [{u}],mc_mean [{u}],mc_std_error [{u}],replications,unit,analytic_source",
            self.axis.name, self.axis.unit
        )
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{}", self.header())?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{}",
                csv_field(&r.series),
                fmt_f64(r.axis_value),
                fmt_opt(r.analytic),
                fmt_opt(r.mc.map(|e| e.mean)),
                fmt_opt(r.mc.map(|e| e.std_error)),
                r.mc.map(|e| e.replications.to_string()).unwrap_or_default(),
                csv_field(&self.value_unit),
                csv_field(&self.analytic_source),
            )?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("CSV is UTF-8")
    }

    /// Run metadata: config snapshot, seed, crate version and a timestamp.
    pub fn metadata(&self, created: SystemTime) -> serde_json::Value {
        let secs = created.duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        serde_json::json!({
            "figure": self.figure,
            "title": self.title,
            "axis": self.axis,
            "value_unit": self.value_unit,
            "analytic_source": self.analytic_source,
            "columns": self.header().split(',').collect::<Vec<_>>(),
            "rows": self.rows.len(),
            "seed": self.seed,
            "seed_rule": "grid point i draws from ChaCha8 stream i of the master seed",
            "code_version": env!("CARGO_PKG_VERSION"),
            "created_unix": secs,
            "config": self.config,
        })
    }

    /// Writes the CSV to `path` and the metadata next to it with a `.json`
    /// extension. Returns the sidecar path.
    pub fn write_files(&self, path: &Path) -> Result<PathBuf> {
        let io = |e: std::io::Error| Error::Config(format!("cannot write {}: {e}", path.display()));
        let file = std::fs::File::create(path).map_err(io)?;
        let mut w = std::io::BufWriter::new(file);
        self.write_csv(&mut w).map_err(io)?;
        w.flush().map_err(io)?;
        let sidecar = path.with_extension("json");
        let text = serde_json::to_string_pretty(&self.metadata(SystemTime::now())).expect("metadata serialises");
        std::fs::write(&sidecar, text + "\n")
            .map_err(|e| Error::Config(format!("cannot write {}: {e}", sidecar.display())))?;
        Ok(sidecar)
    }

    /// Rows of one series in grid order.
    pub fn series(&self, name: &str) -> Vec<&Row> {
        self.rows.iter().filter(|r| r.series == name).collect()
    }

    /// Series names in first-appearance order.
    pub fn series_names(&self) -> Vec<String> {
        let mut names: Vec<String> = Vec::new();
        for r in &self.rows {
            if !names.contains(&r.series) {
                names.push(r.series.clone());
            }
        }
        names
    }

    /// Largest analytic value of a series and the axis value where it occurs.
    pub fn analytic_max(&self, name: &str) -> Option<(f64, f64)> {
        self.series(name)
            .into_iter()
            .filter_map(|r| r.analytic.map(|v| (r.axis_value, v)))
            .max_by(|a, b| a.1.total_cmp(&b.1))
    }
}
