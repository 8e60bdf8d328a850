//! Gradual domain adaptation through a sequence of shifting domains by
//! self-training with a dynamically weighted two-domain loss.
//!
//! The crate is organized bottom-up:
//!
//! - [`nn`]: dense networks, softmax cross-entropy, backprop, SGD/Adam.
//! - [`data`]: domain sequences (rotating two-moons, shifted blobs, rotated
//!   IDX images) and mini-batch partitioning.
//! - [`schedule`]: cyclic batch pairing and ρ schedules.
//! - [`pseudo_label`]: hard labels, dynamic labeling, confidence filtering.
//! - [`engine`]: the ρ-weighted update, STDW, GST/direct baselines and the
//!   Lyapunov decrease check.
//! - [`harness`]: repeated seeded experiments, sweeps, ablations, reports.

pub mod data;
pub mod engine;
mod error;
pub mod harness;
pub mod metrics;
pub mod nn;
pub mod pseudo_label;
pub mod schedule;
pub mod seed;
pub mod tensor;

pub use error::{Error, Result};
pub use tensor::Tensor2;
