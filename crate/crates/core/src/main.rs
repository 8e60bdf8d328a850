use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use stdw::data::export_sequence;
use stdw::engine::Method;
use stdw::harness::{
    ablate_schedules, ensure_writable, lyapunov_suite, run_experiment, sweep_intermediates,
    write_grid, DatasetSpec, ExperimentConfig, GridReport, IdxSpec, RunReport,
};
use stdw::schedule::ScheduleKind;
use stdw::{Error, Result};

#[derive(Parser)]
#[command(
    name = "stdw",
    version,
    about = "Gradual domain adaptation experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a domain sequence to CSV files plus a manifest.
    Generate(Overrides),
    /// Run one method with repeats; writes report.json, trace.csv, accuracy.csv.
    Train(Overrides),
    /// Accuracy over given-domain counts and migration steps; writes grid.csv.
    Sweep {
        #[command(flatten)]
        over: Overrides,
        /// Comma-separated domain counts, e.g. 2,6.
        #[arg(long, value_delimiter = ',')]
        given_domains: Option<Vec<usize>>,
        /// Comma-separated migration step counts.
        #[arg(long, value_delimiter = ',')]
        step_counts: Option<Vec<usize>>,
    },
    /// STDW accuracy over schedule kinds and migration steps; writes grid.csv.
    Ablate {
        #[command(flatten)]
        over: Overrides,
        /// Comma-separated schedule kinds: equal, fixed, rand, sorted.
        #[arg(long, value_delimiter = ',')]
        kinds: Option<Vec<ScheduleKind>>,
        #[arg(long, value_delimiter = ',')]
        step_counts: Option<Vec<usize>>,
    },
    /// Gradient descent on random strongly convex quadratics, counting
    /// steps that break the Lyapunov decrease bound.
    Lyapunov {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Gradient steps per quadratic.
        #[arg(long, default_value_t = 500)]
        steps: usize,
        /// Number of quadratics.
        #[arg(long, default_value_t = 50)]
        repeats: usize,
        /// Directory for lyapunov.json.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Flags layered on top of the config file (or the defaults).
#[derive(Args)]
struct Overrides {
    /// TOML experiment config.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    method: Option<Method>,
    #[arg(long)]
    schedule: Option<ScheduleKind>,
    /// Migration steps per transition.
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    repeats: Option<usize>,
    #[arg(long)]
    gst_drop_fraction: Option<f64>,
    /// IDX image file; switches the dataset to rotated images.
    #[arg(long, requires = "idx_labels")]
    idx_images: Option<PathBuf>,
    #[arg(long, requires = "idx_images")]
    idx_labels: Option<PathBuf>,
}

impl Overrides {
    fn resolve(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        if let Some(v) = self.seed {
            cfg.adapt.seed = v;
        }
        if let Some(v) = self.method {
            cfg.method = v;
        }
        if let Some(v) = self.schedule {
            cfg.adapt.schedule = v;
        }
        if let Some(v) = self.steps {
            cfg.adapt.steps = v;
        }
        if let Some(v) = self.epochs {
            cfg.adapt.epochs = v;
        }
        if let Some(v) = self.batch_size {
            cfg.adapt.batch_size = v;
        }
        if let Some(v) = &self.out {
            cfg.out = v.clone();
        }
        if let Some(v) = self.repeats {
            cfg.repeats = v;
        }
        if let Some(v) = self.gst_drop_fraction {
            cfg.adapt.gst_drop_fraction = v;
        }
        if let (Some(images), Some(labels)) = (&self.idx_images, &self.idx_labels) {
            let mut spec = match &cfg.dataset {
                DatasetSpec::Idx(s) => s.clone(),
                _ => IdxSpec::default(),
            };
            spec.images = images.clone();
            spec.labels = labels.clone();
            cfg.dataset = DatasetSpec::Idx(spec);
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn print_report(report: &RunReport) {
    let t = &report.target;
    let spread = t.ci95.map(|h| format!(" ± {h:.4}")).unwrap_or_default();
    println!(
        "{}: target accuracy {:.4}{spread} over {} repeat(s) in {:.1}s",
        report.method, t.mean, t.n, report.wall_clock_seconds
    );
}

fn print_grid(grid: &GridReport) {
    let cols: Vec<String> = grid.step_counts.iter().map(|s| format!("s={s}")).collect();
    println!("{:>14} {}", grid.row_axis, cols.join("  "));
    for row in &grid.rows {
        let vals: Vec<String> = grid
            .step_counts
            .iter()
            .map(|&s| {
                format!(
                    "{:.3}",
                    grid.cell(row, s).expect("full grid").report.target.mean
                )
            })
            .collect();
        println!("{row:>14} {}", vals.join("  "));
    }
}

fn print_paths(paths: &[PathBuf]) {
    for p in paths {
        println!("wrote {}", p.display());
    }
}

fn grid_axes<T: Clone>(flag: &Option<Vec<T>>, fallback: &[T]) -> Vec<T> {
    flag.clone().unwrap_or_else(|| fallback.to_vec())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate(over) => {
            let cfg = over.resolve()?;
            ensure_writable(&cfg.out)?;
            let seq = cfg.dataset.build(cfg.adapt.seed)?;
            let manifest = export_sequence(&seq, &cfg.out, cfg.adapt.seed)?;
            println!(
                "wrote {} domains ({} features, {} classes) to {}",
                manifest.n + 1,
                manifest.d,
                manifest.k,
                cfg.out.display()
            );
        }
        Command::Train(over) => {
            let cfg = over.resolve()?;
            let report = run_experiment(&cfg)?;
            print_report(&report);
            print_paths(&[
                cfg.out.join(stdw::harness::REPORT_FILE),
                cfg.out.join(stdw::harness::TRACE_FILE),
                cfg.out.join(stdw::harness::ACCURACY_FILE),
            ]);
        }
        Command::Sweep {
            over,
            given_domains,
            step_counts,
        } => {
            let cfg = over.resolve()?;
            ensure_writable(&cfg.out)?;
            let grid = sweep_intermediates(
                &cfg,
                &grid_axes(&given_domains, &cfg.grid.given_domains),
                &grid_axes(&step_counts, &cfg.grid.step_counts),
            )?;
            print_grid(&grid);
            print_paths(&write_grid(&grid, &cfg.out)?);
        }
        Command::Ablate {
            over,
            kinds,
            step_counts,
        } => {
            let cfg = over.resolve()?;
            ensure_writable(&cfg.out)?;
            let grid = ablate_schedules(
                &cfg,
                &grid_axes(&kinds, &cfg.grid.kinds),
                &grid_axes(&step_counts, &cfg.grid.step_counts),
            )?;
            print_grid(&grid);
            print_paths(&write_grid(&grid, &cfg.out)?);
        }
        Command::Lyapunov {
            seed,
            steps,
            repeats,
            out,
        } => {
            if let Some(dir) = &out {
                ensure_writable(dir)?;
            }
            let suite = lyapunov_suite(repeats, steps, seed)?;
            println!(
                "{} quadratics, {} steps each: {} violations",
                suite.cases.len(),
                steps,
                suite.total_violations
            );
            if let Some(dir) = out {
                let path = dir.join("lyapunov.json");
                write_lyapunov(&suite, &path)?;
                print_paths(&[path]);
            }
            if suite.total_violations > 0 {
                return Err(Error::Numeric {
                    msg: format!("{} decrease-bound violations", suite.total_violations),
                    layer: None,
                });
            }
        }
    }
    Ok(())
}

fn write_lyapunov(suite: &stdw::harness::LyapunovSuite, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(suite)?;
    std::fs::write(path, text).map_err(|source| Error::IoAt {
        path: path.into(),
        source,
    })
}

fn exit_code(err: &Error) -> u8 {
    match err.category() {
        "config" | "usage" => 2,
        "io" => 3,
        "format" => 4,
        "shape" => 5,
        _ => 6,
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("stdw: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}
