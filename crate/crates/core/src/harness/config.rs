use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::data::{
    gen_intensity_shift, gen_rotating_moons, load_idx_images, make_rotated_sequence, DomainSequence,
};
use crate::engine::{AdaptConfig, Method};
use crate::error::{Error, Result};
use crate::schedule::ScheduleKind;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MoonsSpec {
    pub n_domains: usize,
    pub angle_start: f64,
    pub angle_end: f64,
    pub samples_per_domain: usize,
    pub noise_sd: f64,
}

impl Default for MoonsSpec {
    fn default() -> Self {
        Self {
            n_domains: 13,
            angle_start: 0.0,
            angle_end: 120.0,
            samples_per_domain: 500,
            noise_sd: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntensitySpec {
    pub n_domains: usize,
    pub offset_start: f64,
    pub offset_end: f64,
    pub samples_per_domain: usize,
}

impl Default for IntensitySpec {
    fn default() -> Self {
        Self {
            n_domains: 5,
            offset_start: 0.0,
            offset_end: 1.0,
            samples_per_domain: 500,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IdxSpec {
    pub images: PathBuf,
    pub labels: PathBuf,
    pub n_domains: usize,
    pub angle_start: f64,
    pub angle_end: f64,
    pub per_domain: usize,
}

impl Default for IdxSpec {
    fn default() -> Self {
        Self {
            images: PathBuf::new(),
            labels: PathBuf::new(),
            n_domains: 5,
            angle_start: 0.0,
            angle_end: 45.0,
            per_domain: 2000,
        }
    }
}

/// Where the domain sequence comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DatasetSpec {
    Moons(MoonsSpec),
    Intensity(IntensitySpec),
    Idx(IdxSpec),
}

impl Default for DatasetSpec {
    fn default() -> Self {
        DatasetSpec::Moons(MoonsSpec::default())
    }
}

impl DatasetSpec {
    pub fn n_domains(&self) -> usize {
        match self {
            DatasetSpec::Moons(s) => s.n_domains,
            DatasetSpec::Intensity(s) => s.n_domains,
            DatasetSpec::Idx(s) => s.n_domains,
        }
    }

    /// Same dataset with a different number of domains over the same shift range.
    pub fn with_domains(&self, n_domains: usize) -> Self {
        let mut out = self.clone();
        match &mut out {
            DatasetSpec::Moons(s) => s.n_domains = n_domains,
            DatasetSpec::Intensity(s) => s.n_domains = n_domains,
            DatasetSpec::Idx(s) => s.n_domains = n_domains,
        }
        out
    }

    pub fn build(&self, seed: u64) -> Result<DomainSequence> {
        match self {
            DatasetSpec::Moons(s) => gen_rotating_moons(
                s.n_domains,
                s.angle_start,
                s.angle_end,
                s.samples_per_domain,
                s.noise_sd,
                seed,
            ),
            DatasetSpec::Intensity(s) => gen_intensity_shift(
                s.n_domains,
                s.offset_start,
                s.offset_end,
                s.samples_per_domain,
                seed,
            ),
            DatasetSpec::Idx(s) => {
                let raw = load_idx_images(&s.images, &s.labels)?;
                if raw.rows != raw.cols {
                    return Err(Error::Shape(format!(
                        "images are {}x{}, rotation needs square images",
                        raw.rows, raw.cols
                    )));
                }
                make_rotated_sequence(
                    &raw.images,
                    &raw.labels,
                    raw.rows,
                    s.n_domains,
                    s.angle_start,
                    s.angle_end,
                    s.per_domain,
                    seed,
                )
            }
        }
    }
}

/// Axes of the sweep and ablation grids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    pub given_domains: Vec<usize>,
    pub step_counts: Vec<usize>,
    pub kinds: Vec<ScheduleKind>,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            given_domains: vec![2, 3, 4, 5, 6],
            step_counts: vec![0, 1, 2, 3, 4],
            kinds: ScheduleKind::ALL.to_vec(),
        }
    }
}

/// One experiment: a dataset, a method, training knobs and where to write.
///
/// Parsed from TOML:
///
/// ```toml
/// method = "stdw"
/// repeats = 5
/// out = "runs/moons"
///
/// [dataset]
/// kind = "moons"        # or "intensity", "idx"
/// n_domains = 13
/// angle_end = 120.0
///
/// [adapt]
/// steps = 4
/// epochs = 2
/// seed = 1
///
/// [adapt.optimizer]
/// kind = "adam"
/// learning_rate = 0.005
///
/// [grid]
/// given_domains = [2, 6]
/// step_counts = [4]
/// kinds = ["equal", "fixed", "rand"]
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub method: Method,
    pub repeats: usize,
    pub out: PathBuf,
    pub dataset: DatasetSpec,
    pub adapt: AdaptConfig,
    pub grid: GridSpec,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            method: Method::Stdw,
            repeats: 1,
            out: PathBuf::from("out"),
            dataset: DatasetSpec::default(),
            adapt: AdaptConfig::default(),
            grid: GridSpec::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(Error::io_at(path))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.repeats == 0 {
            return Err(Error::Config("repeats must be at least 1".into()));
        }
        self.adapt.validate()
    }
}
