//! `plot`: turn a trace CSV into a self-contained SVG chart.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use kpg_core::trace::ConvergenceTrace;

use crate::csvio;
use crate::error::LabError;
use crate::svg::{self, Figure, Series};

/// Chart kinds supported by `plot`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum PlotKind {
    /// Distance to the reference point over updates, one series per
    /// reasoning level (movement per level when no reference exists).
    Trajectory,
    /// Distance to the reference point versus level k for the last
    /// recorded update.
    KConvergence,
    /// Recorded return over updates.
    LearningCurve,
}

impl PlotKind {
    fn file_tag(self) -> &'static str {
        match self {
            PlotKind::Trajectory => "trajectory",
            PlotKind::KConvergence => "k-convergence",
            PlotKind::LearningCurve => "learning-curve",
        }
    }
}

/// Distance series grouped by level: one polyline per k.
fn trajectory_figure(trace: &ConvergenceTrace) -> Result<Figure, LabError> {
    let has_dist = trace.rows.iter().any(|r| r.dist_star.is_some());
    let metric = if has_dist { "dist_star" } else { "step_dist" };
    let mut by_level: BTreeMap<usize, Vec<(f64, f64)>> = BTreeMap::new();
    for row in &trace.rows {
        let value = if has_dist { row.dist_star } else { row.step_dist };
        if let Some(v) = value {
            by_level.entry(row.k).or_default().push((row.update as f64, v));
        }
    }
    if by_level.is_empty() {
        return Err(LabError::Config(
            "trace has neither `dist_star` nor `step_dist` values — nothing to plot".into(),
        ));
    }
    Ok(Figure {
        title: format!("{metric} per update, colored by level"),
        x_label: "update".into(),
        y_label: metric.into(),
        series: by_level
            .into_iter()
            .map(|(k, points)| Series { label: format!("k={k}"), points })
            .collect(),
    })
}

/// Within-update convergence: distance to the reference versus level for
/// the last update carrying distances.
fn k_convergence_figure(trace: &ConvergenceTrace) -> Result<Figure, LabError> {
    let last_with_dist = trace
        .rows
        .iter()
        .filter(|r| r.dist_star.is_some())
        .map(|r| r.update)
        .max()
        .ok_or_else(|| {
            LabError::Config("trace has no `dist_star` values — nothing to plot".into())
        })?;
    let points: Vec<(f64, f64)> = trace
        .rows_for_update(last_with_dist)
        .filter_map(|r| r.dist_star.map(|d| (r.k as f64, d)))
        .collect();
    Ok(Figure {
        title: format!("distance to reference across levels (update {last_with_dist})"),
        x_label: "level k".into(),
        y_label: "dist_star".into(),
        series: vec![Series { label: format!("update {last_with_dist}"), points }],
    })
}

/// Return per committed update.
fn learning_curve_figure(trace: &ConvergenceTrace) -> Result<Figure, LabError> {
    let points: Vec<(f64, f64)> = trace
        .rows
        .iter()
        .filter_map(|r| r.ret.map(|v| (r.update as f64, v)))
        .collect();
    if points.is_empty() {
        return Err(LabError::Config(
            "trace has no `return` values — nothing to plot".into(),
        ));
    }
    Ok(Figure {
        title: "return per update".into(),
        x_label: "update".into(),
        y_label: "return".into(),
        series: vec![Series { label: "mean return".into(), points }],
    })
}

/// Entry point for the `plot` subcommand. Writes
/// `{trace stem}.{kind}.svg` (or `--out` verbatim) and returns the path.
pub fn cmd_plot(
    trace_path: &Path,
    kind: PlotKind,
    out: Option<&Path>,
) -> Result<PathBuf, LabError> {
    let trace = csvio::read_trace(trace_path)?;
    if trace.rows.is_empty() {
        return Err(LabError::Config(format!(
            "{}: trace has a header but no rows — nothing to plot",
            trace_path.display()
        )));
    }
    let figure = match kind {
        PlotKind::Trajectory => trajectory_figure(&trace)?,
        PlotKind::KConvergence => k_convergence_figure(&trace)?,
        PlotKind::LearningCurve => learning_curve_figure(&trace)?,
    };
    let path = match out {
        Some(p) => p.to_path_buf(),
        None => {
            let stem = trace_path.with_extension("");
            PathBuf::from(format!("{}.{}.svg", stem.display(), kind.file_tag()))
        }
    };
    std::fs::write(&path, svg::render(&figure)).map_err(|e| LabError::io(&path, e))?;
    log::info!("wrote {}", path.display());
    Ok(path)
}
