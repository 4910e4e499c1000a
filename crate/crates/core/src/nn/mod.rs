//! Small dense networks with hand-written backpropagation, Adam, categorical
//! heads and finite-difference gradient checks. Double precision throughout.

mod adam;
mod categorical;
mod gradcheck;
mod mlp;

use thiserror::Error;

pub use adam::{clip_grad_norm, Adam};
pub use categorical::{categorical_head, Categorical};
pub use gradcheck::{finite_diff_check, gradient_check, projection, RELATIVE_FLOOR};
pub use mlp::{Activation, Cache, Checkpoint, Mlp, CHECKPOINT_FORMAT, CHECKPOINT_VERSION};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NnError {
    #[error("expected length {expected}, found {found}")]
    ShapeError { expected: usize, found: usize },
    #[error("cache does not belong to the current parameters")]
    CacheMismatch,
    #[error("gradient contains a non-finite value")]
    NonFiniteGradient,
    #[error("logits contain a non-finite value")]
    NonFiniteLogits,
    #[error("categorical head needs at least one logit")]
    EmptyLogits,
    #[error("invalid architecture: {0}")]
    InvalidArchitecture(String),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
}
