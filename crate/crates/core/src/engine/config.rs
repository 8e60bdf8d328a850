use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::OptimConfig;
use crate::schedule::ScheduleKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Stdw,
    Gst,
    Direct,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Stdw => "stdw",
            Method::Gst => "gst",
            Method::Direct => "direct",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "stdw" => Ok(Method::Stdw),
            "gst" => Ok(Method::Gst),
            "direct" => Ok(Method::Direct),
            _ => Err(Error::Config(format!(
                "unknown method {s:?}; expected stdw, gst or direct"
            ))),
        }
    }
}

/// Training knobs shared by all methods.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdaptConfig {
    /// Migration steps per transition. `0` runs a single stage at ρ = 1.
    pub steps: usize,
    /// Passes over the right domain per ρ stage (STDW) or per domain (GST).
    pub epochs: usize,
    /// Supervised epochs on the source before adaptation.
    pub pretrain_epochs: usize,
    pub batch_size: usize,
    /// Hidden layer widths.
    pub hidden: Vec<usize>,
    pub optimizer: OptimConfig,
    pub schedule: ScheduleKind,
    pub fixed_value: f64,
    pub seed: u64,
    pub gst_drop_fraction: f64,
}

impl Default for AdaptConfig {
    fn default() -> Self {
        Self {
            steps: 4,
            epochs: 2,
            pretrain_epochs: 40,
            batch_size: 64,
            hidden: vec![64, 64],
            optimizer: OptimConfig::default(),
            schedule: ScheduleKind::Equal,
            fixed_value: 0.5,
            seed: 1,
            gst_drop_fraction: 0.1,
        }
    }
}

impl AdaptConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::Config("epochs must be at least 1".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch_size must be at least 1".into()));
        }
        if self.hidden.contains(&0) {
            return Err(Error::Config("hidden widths must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.fixed_value) {
            return Err(Error::Config(format!(
                "fixed_value {} outside [0, 1]",
                self.fixed_value
            )));
        }
        if !(0.0..1.0).contains(&self.gst_drop_fraction) {
            return Err(Error::Config(format!(
                "gst_drop_fraction {} outside [0, 1)",
                self.gst_drop_fraction
            )));
        }
        self.optimizer.validate()
    }
}
