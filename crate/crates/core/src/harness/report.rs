use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{ExperimentConfig, Summary};
use crate::data::DomainSequence;
use crate::engine::{adapt, AdaptConfig, AdaptTrace, Method};
use crate::error::{Error, Result};

pub const REPORT_FILE: &str = "report.json";
pub const TRACE_FILE: &str = "trace.csv";
pub const ACCURACY_FILE: &str = "accuracy.csv";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepeatResult {
    pub repeat: usize,
    pub seed: u64,
    /// Domain index of each entry below.
    pub domains: Vec<usize>,
    pub accuracy: Vec<f64>,
    pub error_rate: Vec<f64>,
}

impl RepeatResult {
    pub fn target_accuracy(&self) -> f64 {
        *self.accuracy.last().expect("at least source and target")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainSummary {
    pub domain: usize,
    pub accuracy: Summary,
    pub error_rate: Summary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub method: Method,
    pub repeats: Vec<RepeatResult>,
    pub domains: Vec<DomainSummary>,
    pub target: Summary,
    pub config: ExperimentConfig,
    pub wall_clock_seconds: f64,
}

/// A report plus the per-repeat step traces behind it.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub report: RunReport,
    pub traces: Vec<AdaptTrace>,
}

/// Domain indices a method's accuracy vector refers to.
fn evaluated_domains(method: Method, n: usize) -> Vec<usize> {
    match method {
        Method::Direct => vec![0, n],
        _ => (0..=n).collect(),
    }
}

pub fn repeat_seed(base: u64, repeat: usize) -> u64 {
    base.wrapping_add(repeat as u64)
}

/// Runs `cfg.repeats` seeded repeats on one sequence, without touching disk.
pub fn execute(cfg: &ExperimentConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let start = Instant::now();
    let seq = cfg.dataset.build(cfg.adapt.seed)?;
    execute_on(cfg, &seq, start)
}

fn execute_on(cfg: &ExperimentConfig, seq: &DomainSequence, start: Instant) -> Result<RunOutput> {
    let runs: Vec<(RepeatResult, AdaptTrace)> = (0..cfg.repeats)
        .into_par_iter()
        .map(|r| {
            let seed = repeat_seed(cfg.adapt.seed, r);
            let adapt_cfg = AdaptConfig {
                seed,
                ..cfg.adapt.clone()
            };
            let (_, trace) = adapt(cfg.method, seq, &adapt_cfg)?;
            let accuracy = trace.domain_accuracy.clone();
            let result = RepeatResult {
                repeat: r,
                seed,
                domains: evaluated_domains(cfg.method, seq.n()),
                error_rate: accuracy.iter().map(|a| 1.0 - a).collect(),
                accuracy,
            };
            Ok((result, trace))
        })
        .collect::<Result<_>>()?;
    let (repeats, traces): (Vec<_>, Vec<_>) = runs.into_iter().unzip();

    let domains = evaluated_domains(cfg.method, seq.n())
        .into_iter()
        .enumerate()
        .map(|(pos, domain)| {
            let acc: Vec<f64> = repeats.iter().map(|r| r.accuracy[pos]).collect();
            let err: Vec<f64> = repeats.iter().map(|r| r.error_rate[pos]).collect();
            DomainSummary {
                domain,
                accuracy: Summary::of(&acc),
                error_rate: Summary::of(&err),
            }
        })
        .collect::<Vec<_>>();
    let target = domains.last().expect("non-empty").accuracy;
    Ok(RunOutput {
        report: RunReport {
            method: cfg.method,
            repeats,
            domains,
            target,
            config: cfg.clone(),
            wall_clock_seconds: start.elapsed().as_secs_f64(),
        },
        traces,
    })
}

/// Creates `dir` if needed and proves it accepts writes.
pub fn ensure_writable(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(Error::io_at(dir))?;
    let probe = dir.join(".write-probe");
    fs::write(&probe, b"").map_err(Error::io_at(&probe))?;
    fs::remove_file(&probe).map_err(Error::io_at(&probe))?;
    Ok(())
}

/// Runs the experiment and writes `report.json`, `trace.csv` and
/// `accuracy.csv` into `cfg.out`. The directory is checked before training.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunReport> {
    cfg.validate()?;
    ensure_writable(&cfg.out)?;
    let out = execute(cfg)?;
    write_outputs(&out, &cfg.out)?;
    Ok(out.report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub method: Method,
    pub repeat: usize,
    pub domain_t: usize,
    pub stage: usize,
    pub rho: f64,
    pub step: usize,
    pub left_batch: usize,
    pub right_batch: usize,
    pub loss_mixed: f64,
    pub loss_left: f64,
    pub loss_right: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyRow {
    pub method: Method,
    pub repeat: usize,
    pub seed: u64,
    pub domain: usize,
    pub accuracy: f64,
    pub error_rate: f64,
}

pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text).map_err(Error::io_at(path))
}

pub fn write_csv<T: Serialize>(rows: impl IntoIterator<Item = T>, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(Error::io_at(path))
}

/// Writes the three run files into `dir`; returns their paths.
pub fn write_outputs(out: &RunOutput, dir: &Path) -> Result<Vec<PathBuf>> {
    let report = &out.report;
    let last = report.domains.last().map_or(0, |d| d.domain);
    let trace_rows = out.traces.iter().enumerate().flat_map(|(r, trace)| {
        trace.steps.iter().map(move |s| TraceRow {
            method: trace.method,
            repeat: r,
            // direct runs on (D_0, D_n) re-indexed as (0, 1)
            domain_t: if trace.method == Method::Direct {
                last
            } else {
                s.domain_t
            },
            stage: s.stage,
            rho: s.rho,
            step: s.step,
            left_batch: s.left_batch,
            right_batch: s.right_batch,
            loss_mixed: s.loss_mixed,
            loss_left: s.loss_left,
            loss_right: s.loss_right,
        })
    });
    let acc_rows = report.repeats.iter().flat_map(|r| {
        (0..r.domains.len()).map(move |i| AccuracyRow {
            method: report.method,
            repeat: r.repeat,
            seed: r.seed,
            domain: r.domains[i],
            accuracy: r.accuracy[i],
            error_rate: r.error_rate[i],
        })
    });
    let paths = [REPORT_FILE, TRACE_FILE, ACCURACY_FILE].map(|f| dir.join(f));
    write_json(report, &paths[0])?;
    write_csv(trace_rows, &paths[1])?;
    write_csv(acc_rows, &paths[2])?;
    Ok(paths.to_vec())
}

/// Reads a `report.json` back.
pub fn load_report(path: impl AsRef<Path>) -> Result<RunReport> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(Error::io_at(path))?;
    Ok(serde_json::from_str(&text)?)
}
