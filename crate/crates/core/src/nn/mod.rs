//! Dense feed-forward networks with exact backpropagation.
//!
//! Hidden layers use ReLU, the output layer is linear and produces logits.
//! Everything is `f64` so that finite-difference checks stay tight.

mod gradcheck;
mod io;
mod loss;
mod model;
mod optim;

pub use gradcheck::{gradient_check, max_relative_error, numeric_gradients};
pub use io::{FORMAT_VERSION, MAGIC};
pub use loss::{ce_loss, ce_loss_and_grad, softmax_rows};
pub use model::{init_model, Activation, Dense, ForwardCache, Gradients, LayerGrad, Model};
pub use optim::{OptimConfig, OptimKind, OptimState};
