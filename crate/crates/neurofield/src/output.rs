//! CSV and JSON artifacts.

use std::io::Write;
use std::path::Path;

use neurofield_core::observer::{Mode, SwitchDirection, Warning};
use neurofield_core::sim::{Row, TrajectoryRecord};
use serde::Serialize;

use crate::error::{CliError, CliResult};

pub const TRAJECTORY_HEADER: [&str; 14] =
    ["t", "v0", "v1", "v2", "y", "vhat0", "vhat1", "vhat2", "zhat0", "zhat1", "zhat2", "zhat3", "mode", "err"];

pub const LOGERR_HEADER: [&str; 4] = ["t", "err", "log10_err", "mode"];

/// Floor applied before taking `log10` of an error.
pub const LOG_FLOOR: f64 = 1e-16;

pub const DEFAULT_STRIDE: usize = 100;

/// Indices of the rows kept with a given stride; the last row is always kept.
pub fn strided(len: usize, stride: usize) -> impl Iterator<Item = usize> {
    let stride = stride.max(1);
    (0..len).filter(move |&i| i % stride == 0 || i + 1 == len)
}

pub fn mode_label(mode: Option<Mode>) -> &'static str {
    match mode {
        Some(Mode::ZMode) => "z",
        Some(Mode::VMode) => "v",
        None => "",
    }
}

fn num(x: f64) -> String {
    x.to_string()
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn row_fields(r: &Row) -> [String; 14] {
    let vh = |i: usize| opt(r.v_hat.map(|v| v[i]));
    let zh = |i: usize| opt(r.z_hat.map(|z| z[i]));
    [
        num(r.t),
        num(r.v[0]),
        num(r.v[1]),
        num(r.v[2]),
        num(r.y),
        vh(0),
        vh(1),
        vh(2),
        zh(0),
        zh(1),
        zh(2),
        zh(3),
        mode_label(r.mode).to_string(),
        opt(r.err),
    ]
}

fn open(path: &Path) -> CliResult<csv::Writer<std::fs::File>> {
    csv::Writer::from_path(path).map_err(|e| CliError::csv(path, e))
}

/// Trajectory CSV with the fixed 14-column header. Values use the shortest
/// decimal form that parses back to the same `f64`.
pub fn write_csv(rec: &TrajectoryRecord, path: &Path, stride: usize) -> CliResult<()> {
    let mut w = open(path)?;
    w.write_record(TRAJECTORY_HEADER).map_err(|e| CliError::csv(path, e))?;
    for i in strided(rec.rows.len(), stride) {
        w.write_record(row_fields(&rec.rows[i])).map_err(|e| CliError::csv(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

/// `t, err, log10_err, mode` over the observer rows.
pub fn write_logerr(rec: &TrajectoryRecord, path: &Path, stride: usize) -> CliResult<()> {
    let mut w = open(path)?;
    w.write_record(LOGERR_HEADER).map_err(|e| CliError::csv(path, e))?;
    for i in strided(rec.rows.len(), stride) {
        let r = &rec.rows[i];
        let Some(err) = r.err else { continue };
        let fields = [num(r.t), num(err), num(err.max(LOG_FLOOR).log10()), mode_label(r.mode).to_string()];
        w.write_record(fields).map_err(|e| CliError::csv(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SwitchEntry {
    pub t: f64,
    pub to: &'static str,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub steps: usize,
    pub t_final: f64,
    pub switches: Vec<SwitchEntry>,
    pub terminal_error: Option<f64>,
    pub max_error: Option<f64>,
    /// Largest error before the first switch (the whole run without switches).
    pub initial_peak: Option<f64>,
    pub warnings: Vec<String>,
    pub failure: Option<String>,
}

pub fn warning_text(w: &Warning) -> String {
    match w {
        Warning::DeltaAboveDeltaStar { delta, delta_star } => format!(
            "delta = {delta} is not below delta_star = {delta_star}; the passage-time estimate does not apply"
        ),
    }
}

impl Summary {
    pub fn of(rec: &TrajectoryRecord) -> Self {
        let t_final = rec.last().map_or(0.0, |r| r.t);
        let first_switch = rec.switches.first().map_or(t_final, |s| s.t);
        Summary {
            steps: rec.rows.len().saturating_sub(1),
            t_final,
            switches: rec
                .switches
                .iter()
                .map(|s| SwitchEntry {
                    t: s.t,
                    to: match s.direction {
                        SwitchDirection::ToVMode => "v",
                        SwitchDirection::ToZMode => "z",
                    },
                })
                .collect(),
            terminal_error: rec.last().and_then(|r| r.err),
            max_error: rec.max_err(f64::NEG_INFINITY, f64::INFINITY),
            initial_peak: rec.max_err(f64::NEG_INFINITY, first_switch),
            warnings: rec.warnings.iter().map(warning_text).collect(),
            failure: rec.failure.as_ref().map(|e| e.to_string()),
        }
    }

    /// Human-readable block for standard output.
    pub fn write_text(&self, out: &mut dyn Write) -> std::io::Result<()> {
        let f = |x: Option<f64>| x.map_or_else(|| "n/a".to_string(), |v| format!("{v:.6e}"));
        writeln!(out, "steps: {}", self.steps)?;
        writeln!(out, "t_final: {}", self.t_final)?;
        let times: Vec<String> = self.switches.iter().map(|s| format!("{}->{}", s.t, s.to)).collect();
        writeln!(out, "switches: {} [{}]", self.switches.len(), times.join(", "))?;
        writeln!(out, "terminal_error: {}", f(self.terminal_error))?;
        writeln!(out, "max_error: {}", f(self.max_error))?;
        writeln!(out, "initial_peak: {}", f(self.initial_peak))?;
        if let Some(e) = &self.failure {
            writeln!(out, "failure: {e}")?;
        }
        Ok(())
    }

    pub fn write_json(&self, path: &Path) -> CliResult<()> {
        let text = serde_json::to_string_pretty(self).expect("summary serializes");
        std::fs::write(path, text + "\n").map_err(|e| CliError::io(path, e))
    }
}
