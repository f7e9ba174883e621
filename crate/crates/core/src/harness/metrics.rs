//! Per-task metrics files and the fraction-solved curve built from them.
//!
//! Metrics CSV, one file per (method, trial), columns in order:
//!
//! ```text
//! method,trial,task,timesteps,solved,fraction,options,leaves
//! ```
//!
//! `timesteps` is cumulative within the trial, `solved` is 0 or 1 and
//! `fraction` is the share of the trial's tasks solved so far.
//!
//! Curve CSV: `method,steps,mean,std`, one row per method and step
//! checkpoint, with the population standard deviation across trials.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

pub const METRICS_HEADER: &str = "method,trial,task,timesteps,solved,fraction,options,leaves";
pub const CURVE_HEADER: &str = "method,steps,mean,std";

/// Spacing of curve checkpoints in environment steps.
pub const CURVE_STEP: u64 = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRow {
    pub method: String,
    pub trial: usize,
    pub task: usize,
    /// Cumulative environment steps at the end of this task.
    pub timesteps: u64,
    pub solved: bool,
    pub fraction: f64,
    pub options: usize,
    pub leaves: usize,
}

impl MetricsRow {
    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            self.method,
            self.trial,
            self.task,
            self.timesteps,
            self.solved as u8,
            self.fraction,
            self.options,
            self.leaves
        )
    }

    pub fn from_csv(line: &str, line_no: usize) -> Result<MetricsRow> {
        let f: Vec<&str> = line.trim().split(',').collect();
        if f.len() != 8 {
            return Err(Error::parse(
                line_no,
                format!("expected 8 fields, got {}", f.len()),
            ));
        }
        let num = |i: usize| {
            f[i].parse::<u64>()
                .map_err(|_| Error::parse(line_no, format!("bad integer `{}`", f[i])))
        };
        let solved = match f[4] {
            "0" => false,
            "1" => true,
            s => return Err(Error::parse(line_no, format!("bad solved flag `{s}`"))),
        };
        let fraction: f64 = f[5]
            .parse()
            .map_err(|_| Error::parse(line_no, format!("bad fraction `{}`", f[5])))?;
        Ok(MetricsRow {
            method: f[0].to_string(),
            trial: num(1)? as usize,
            task: num(2)? as usize,
            timesteps: num(3)?,
            solved,
            fraction,
            options: num(6)? as usize,
            leaves: num(7)? as usize,
        })
    }
}

pub fn write_metrics(path: &Path, rows: &[MetricsRow]) -> Result<()> {
    let mut out = String::from(METRICS_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.to_csv());
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

pub fn read_metrics(path: &Path) -> Result<Vec<MetricsRow>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_metrics(&text)
}

pub fn parse_metrics(text: &str) -> Result<Vec<MetricsRow>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == METRICS_HEADER => {}
        _ => return Err(Error::parse(1, "missing metrics header")),
    }
    lines
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| MetricsRow::from_csv(l, i + 1))
        .collect()
}

/// One point of a curve.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    pub method: String,
    pub steps: u64,
    pub mean: f64,
    pub std: f64,
}

/// Fraction solved of one trial after `steps` environment steps.
fn fraction_at(rows: &[&MetricsRow], steps: u64) -> f64 {
    rows.iter()
        .take_while(|r| r.timesteps <= steps)
        .last()
        .map_or(0.0, |r| r.fraction)
}

/// Mean and standard deviation of the fraction solved across trials at
/// every multiple of `every` steps, per method. A trial that has finished
/// keeps its final fraction.
pub fn curve(rows: &[MetricsRow], every: u64) -> Result<Vec<CurvePoint>> {
    if rows.is_empty() {
        return Err(Error::Invalid("no metrics rows".into()));
    }
    if every == 0 {
        return Err(Error::Invalid("curve spacing must be positive".into()));
    }
    let mut by_method: BTreeMap<&str, BTreeMap<usize, Vec<&MetricsRow>>> = BTreeMap::new();
    for r in rows {
        by_method
            .entry(&r.method)
            .or_default()
            .entry(r.trial)
            .or_default()
            .push(r);
    }
    let mut out = Vec::new();
    for (method, trials) in by_method {
        let mut trials: Vec<Vec<&MetricsRow>> = trials.into_values().collect();
        for t in &mut trials {
            t.sort_by_key(|r| (r.timesteps, r.task));
        }
        let end = trials
            .iter()
            .filter_map(|t| t.last().map(|r| r.timesteps))
            .max()
            .unwrap_or(0);
        let last = end.div_ceil(every) * every;
        let mut steps = 0;
        while steps <= last {
            let xs: Vec<f64> = trials.iter().map(|t| fraction_at(t, steps)).collect();
            let n = xs.len() as f64;
            let mean = xs.iter().sum::<f64>() / n;
            let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
            out.push(CurvePoint {
                method: method.to_string(),
                steps,
                mean,
                std: var.sqrt(),
            });
            steps += every;
        }
    }
    Ok(out)
}

pub fn format_curve(points: &[CurvePoint]) -> String {
    let mut out = String::from(CURVE_HEADER);
    out.push('\n');
    for p in points {
        let _ = writeln!(out, "{},{},{},{}", p.method, p.steps, p.mean, p.std);
    }
    out
}

/// Reads metrics files and writes their curve to `out`.
pub fn emit_curve(inputs: &[impl AsRef<Path>], out: &Path) -> Result<Vec<CurvePoint>> {
    if inputs.is_empty() {
        return Err(Error::Invalid("no metrics files given".into()));
    }
    let mut rows = Vec::new();
    for p in inputs {
        rows.extend(read_metrics(p.as_ref())?);
    }
    let points = curve(&rows, CURVE_STEP)?;
    std::fs::write(out, format_curve(&points)).map_err(|e| Error::io(out, e))?;
    Ok(points)
}
