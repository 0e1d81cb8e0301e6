//! The dialect decision model: a small multilayer perceptron, replicated
//! on both endpoints, that deterministically maps every request string to
//! a dialect id.
//!
//! The model is trained without labels. Its objective blends two batch
//! properties — spread predictions uniformly across dialects, or
//! concentrate them on cheap dialects — under a trade-off factor, plus a
//! small per-sample confidence term so individual predictions stay sharp.
//! Inference is plain `f32` arithmetic in a fixed evaluation order, so two
//! processes loading the same model file produce bit-identical outputs.

mod io;
mod losses;
mod model;
mod train;
mod vectorize;

pub use io::ModelIoError;
pub use losses::{consolidated_loss, cost_loss, mean_entropy, uniformity_loss};
pub use model::MlpModel;
pub use train::{train, Adam, TrainState, TrainingConfig, TrainingReport};
pub use vectorize::{vectorize_request, RequestVector, INPUT_DIM};

/// Width of the two hidden layers.
pub const HIDDEN_DIM: usize = 128;

/// Errors from loss evaluation and training.
#[derive(Debug, PartialEq, thiserror::Error)]
pub enum DdmError {
    #[error("batch carries no probability vectors")]
    EmptyBatch,
    #[error("probability vector has length {got}, expected {want}")]
    DimensionMismatch { want: usize, got: usize },
    #[error("trade-off factor must lie in [0, 1], got {0}")]
    InvalidTradeOff(f64),
    #[error("training requires at least one request")]
    EmptyDataset,
    #[error("cost table needs at least two dialects, got {0}")]
    TooFewDialects(usize),
    #[error("invalid hyperparameter: {0}")]
    InvalidHyperparameter(&'static str),
}
