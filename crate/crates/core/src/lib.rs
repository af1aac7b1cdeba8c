//! Coordinate-wise hyperparameter search over a neural symbol detector for
//! M-QAM on simulated optical channels.
//!
//! The crate is organized bottom-up: `special` (gamma and Bessel K), `seed`
//! (deterministic RNG derivation), `grid` (the search space), `modem`
//! (constellations and SER), `channel` (free-space and fiber impairments),
//! `neuralnet` (the from-scratch MLP), `objective` (point -> SER), `tuner`
//! (the search methods), and `report` (logs and tables).

pub mod channel;
pub mod grid;
pub mod modem;
pub mod neuralnet;
pub mod objective;
pub mod report;
pub mod seed;
pub mod special;
pub mod stats;
pub mod tuner;

pub use channel::{ChannelModel, FiberParams, FsoParams};
pub use grid::{HyperparamGrid, HyperparamPoint, PointKey};
pub use neuralnet::{ActivationKind, LossKind, NetworkSpec, NetworkState, OptimizerKind};
pub use objective::SystemConfig;
pub use tuner::{Evaluation, Objective, SearchConfig, TrialResult, TuneReport};
