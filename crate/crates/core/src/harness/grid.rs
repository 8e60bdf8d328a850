use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::report::{ensure_writable, execute, write_csv, write_json, RunReport};
use super::ExperimentConfig;
use crate::engine::Method;
use crate::error::{Error, Result};
use crate::schedule::ScheduleKind;

pub const GRID_FILE: &str = "grid.csv";
pub const GRID_STATS_FILE: &str = "grid_stats.csv";
pub const GRID_REPORT_FILE: &str = "grid.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub row: String,
    pub steps: usize,
    pub report: RunReport,
}

/// Rows by columns of run reports; columns are migration step counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridReport {
    /// Name of the row axis, `given_domains` or `schedule`.
    pub row_axis: String,
    pub rows: Vec<String>,
    pub step_counts: Vec<usize>,
    /// Row-major.
    pub cells: Vec<GridCell>,
}

impl GridReport {
    pub fn cell(&self, row: &str, steps: usize) -> Option<&GridCell> {
        self.cells.iter().find(|c| c.row == row && c.steps == steps)
    }
}

/// One row of `grid_stats.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridStatsRow {
    pub row: String,
    pub steps: usize,
    pub n: usize,
    pub mean: f64,
    pub sd: Option<f64>,
    pub ci95: Option<f64>,
}

fn run_grid(
    row_axis: &str,
    rows: Vec<(String, ExperimentConfig)>,
    step_counts: &[usize],
) -> Result<GridReport> {
    if rows.is_empty() || step_counts.is_empty() {
        return Err(Error::Config(format!(
            "grid needs at least one {row_axis} value and one step count"
        )));
    }
    let jobs: Vec<(String, usize, ExperimentConfig)> = rows
        .iter()
        .flat_map(|(label, cfg)| {
            step_counts.iter().map(move |&s| {
                let mut cell = cfg.clone();
                cell.adapt.steps = s;
                (label.clone(), s, cell)
            })
        })
        .collect();
    let cells = jobs
        .into_par_iter()
        .map(|(row, steps, cfg)| {
            Ok(GridCell {
                row,
                steps,
                report: execute(&cfg)?.report,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GridReport {
        row_axis: row_axis.into(),
        rows: rows.into_iter().map(|(l, _)| l).collect(),
        step_counts: step_counts.to_vec(),
        cells,
    })
}

/// Accuracy against the number of given domains (rows) and migration steps
/// (columns). Each row regenerates the sequence with that many domains over
/// the same shift range.
pub fn sweep_intermediates(
    base: &ExperimentConfig,
    given_domains: &[usize],
    step_counts: &[usize],
) -> Result<GridReport> {
    base.validate()?;
    let rows = given_domains
        .iter()
        .map(|&g| {
            let mut cfg = base.clone();
            cfg.dataset = base.dataset.with_domains(g);
            (g.to_string(), cfg)
        })
        .collect();
    run_grid("given_domains", rows, step_counts)
}

/// STDW accuracy per schedule kind (rows) and migration steps (columns).
pub fn ablate_schedules(
    base: &ExperimentConfig,
    kinds: &[ScheduleKind],
    step_counts: &[usize],
) -> Result<GridReport> {
    base.validate()?;
    let rows = kinds
        .iter()
        .map(|&k| {
            let mut cfg = base.clone();
            cfg.method = Method::Stdw;
            cfg.adapt.schedule = k;
            (k.to_string(), cfg)
        })
        .collect();
    run_grid("schedule", rows, step_counts)
}

/// Writes `grid.csv` (mean target accuracy, rows by `s=<k>` columns),
/// `grid_stats.csv` (one line per cell) and `grid.json` (all reports).
pub fn write_grid(grid: &GridReport, dir: &Path) -> Result<Vec<PathBuf>> {
    ensure_writable(dir)?;
    let paths = [GRID_FILE, GRID_STATS_FILE, GRID_REPORT_FILE].map(|f| dir.join(f));

    let mut w = csv::Writer::from_path(&paths[0])?;
    let mut header = vec![grid.row_axis.clone()];
    header.extend(grid.step_counts.iter().map(|s| format!("s={s}")));
    w.write_record(&header)?;
    for row in &grid.rows {
        let mut record = vec![row.clone()];
        for &s in &grid.step_counts {
            let cell = grid.cell(row, s).expect("full grid");
            record.push(cell.report.target.mean.to_string());
        }
        w.write_record(&record)?;
    }
    w.flush().map_err(Error::io_at(&paths[0]))?;

    write_csv(
        grid.cells.iter().map(|c| GridStatsRow {
            row: c.row.clone(),
            steps: c.steps,
            n: c.report.target.n,
            mean: c.report.target.mean,
            sd: c.report.target.sd,
            ci95: c.report.target.ci95,
        }),
        &paths[1],
    )?;
    write_json(grid, &paths[2])?;
    Ok(paths.to_vec())
}
