//! Domain sequences: synthetic generators, IDX image ingestion, and
//! deterministic mini-batch partitioning.

mod batches;
mod domain;
mod export;
mod idx;
mod rotate;
mod synthetic;

pub use batches::{partition_batches, partition_batches_of, BatchPlan};
pub use domain::{Domain, DomainSequence, EvalSplit, Sample};
pub use export::{export_sequence, Manifest};
pub use idx::{
    load_idx_images, write_idx_images, write_idx_labels, IdxHeader, IdxImages, IMAGES_MAGIC,
    LABELS_MAGIC,
};
pub use rotate::rotate_flat_images;
pub use synthetic::{
    gen_intensity_shift, gen_rotating_moons, linear_shift, make_rotated_sequence, rotate_point,
};
