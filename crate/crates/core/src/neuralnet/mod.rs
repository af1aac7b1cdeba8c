//! From-scratch fully connected network: forward, backprop, and training.

pub mod activation;
pub mod loss;
pub mod network;
pub mod optimizer;

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum NeuralNetError {
    #[error("unknown {kind} tag: {tag}")]
    UnknownTag { kind: &'static str, tag: String },
    #[error("shape mismatch: expected {expected}, got {got}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("non-finite value in {context}")]
    NonFinite { context: &'static str },
    #[error("training diverged at iteration {iteration}")]
    Diverged { iteration: u64 },
}

pub use activation::ActivationKind;
pub use loss::{loss_and_grad, LossKind, Target};
pub use network::{train, DataStream, NetworkSpec, NetworkState, PoolStream, TrainOutcome};
pub use optimizer::{OptimizerKind, OptimizerState};
