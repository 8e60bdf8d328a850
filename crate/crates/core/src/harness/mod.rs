//! Experiment orchestration: TOML configs, repeated seeded runs, the
//! intermediate-domain sweep and schedule ablation grids, and their files.

mod config;
mod grid;
mod lyapunov;
mod report;
mod stats;

pub use config::{DatasetSpec, ExperimentConfig, GridSpec, IdxSpec, IntensitySpec, MoonsSpec};
pub use grid::{
    ablate_schedules, sweep_intermediates, write_grid, GridCell, GridReport, GridStatsRow,
    GRID_FILE, GRID_REPORT_FILE, GRID_STATS_FILE,
};
pub use lyapunov::{lyapunov_suite, LyapunovCase, LyapunovSuite};
pub use report::{
    ensure_writable, execute, load_report, repeat_seed, run_experiment, write_outputs, AccuracyRow,
    DomainSummary, RepeatResult, RunOutput, RunReport, TraceRow, ACCURACY_FILE, REPORT_FILE,
    TRACE_FILE,
};
pub use stats::{t_quantile_975, Summary};

pub use crate::metrics::{evaluate, Accuracy};
