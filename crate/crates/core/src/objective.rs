//! Turns one hyperparameter point into one SER score: generate data, pass it
//! through the channel, train the detector, score on a held-out stream.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::{ChannelError, ChannelModel};
use crate::grid::{
    point_key, GridError, HyperparamPoint, AXIS_ACTIVATION, AXIS_BATCH_SIZE, AXIS_ITERATIONS,
    AXIS_LEARNING_RATE, AXIS_LOSS_FUNCTION, AXIS_NUM_LAYERS, AXIS_NUM_NEURONS, AXIS_OPTIMIZER,
    AXIS_SAMPLE_TO_BATCH_RATIO,
};
use crate::modem::{generate_symbols, ml_baseline_detect, qam_constellation, ser, ModemError};
use crate::neuralnet::{
    train, ActivationKind, LossKind, NetworkSpec, NeuralNetError, OptimizerKind, PoolStream,
};
use crate::seed::derive_seed;
use crate::tuner::{Evaluation, Objective};

#[derive(Debug, Error)]
pub enum ObjectiveError {
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Modem(#[from] ModemError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    NeuralNet(#[from] NeuralNetError),
    #[error("invalid system config: {0}")]
    InvalidConfig(String),
}

/// Fixed per-system settings; everything swept lives on the grid.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct SystemConfig {
    pub modulation_order: usize,
    pub channel: ChannelModel,
    pub test_symbols: usize,
    /// Standardize inputs by training-set mean/std per component.
    pub normalization: bool,
    pub base_seed: u64,
}

impl SystemConfig {
    pub fn new(channel: ChannelModel) -> Self {
        SystemConfig {
            modulation_order: 16,
            channel,
            test_symbols: 1 << 14,
            normalization: true,
            base_seed: 0,
        }
    }

    pub fn validate(&self) -> Result<(), ObjectiveError> {
        qam_constellation(self.modulation_order)
            .map_err(|e| ObjectiveError::InvalidConfig(e.to_string()))?;
        if self.test_symbols < 1024 {
            return Err(ObjectiveError::InvalidConfig(format!(
                "test_symbols must be >= 1024, got {}",
                self.test_symbols
            )));
        }
        Ok(())
    }
}

/// Mean and standard deviation per input component, fit on the training set
/// and applied to both sets.
struct Standardizer {
    mean: [f64; 2],
    std: [f64; 2],
}

impl Standardizer {
    fn fit(samples: &[Complex64]) -> Self {
        let n = samples.len() as f64;
        let mean = [
            samples.iter().map(|c| c.re).sum::<f64>() / n,
            samples.iter().map(|c| c.im).sum::<f64>() / n,
        ];
        let var = [
            samples.iter().map(|c| (c.re - mean[0]).powi(2)).sum::<f64>() / n,
            samples.iter().map(|c| (c.im - mean[1]).powi(2)).sum::<f64>() / n,
        ];
        let std = var.map(|v| if v > 0.0 { v.sqrt() } else { 1.0 });
        Standardizer { mean, std }
    }

    fn identity() -> Self {
        Standardizer { mean: [0.0; 2], std: [1.0; 2] }
    }

    fn apply(&self, samples: &[Complex64]) -> Vec<Vec<f64>> {
        samples
            .iter()
            .map(|c| {
                vec![
                    (c.re - self.mean[0]) / self.std[0],
                    (c.im - self.mean[1]) / self.std[1],
                ]
            })
            .collect()
    }
}

/// Fully deterministic given (point, sys, trial_seed); divergence comes back
/// as a failed Evaluation scoring 1.0 rather than an error.
pub fn evaluate_point(
    point: &HyperparamPoint,
    sys: &SystemConfig,
    trial_seed: u64,
) -> Result<Evaluation, ObjectiveError> {
    sys.validate()?;
    let constellation = qam_constellation(sys.modulation_order)?;

    let lr = point.f64(AXIS_LEARNING_RATE)?;
    let iterations = point.usize(AXIS_ITERATIONS)? as u64;
    let layers = point.usize(AXIS_NUM_LAYERS)?;
    let neurons = point.usize(AXIS_NUM_NEURONS)?;
    let activation = ActivationKind::from_tag(point.tag(AXIS_ACTIVATION)?)?;
    let optimizer = OptimizerKind::from_tag(point.tag(AXIS_OPTIMIZER)?, lr)?;
    let ratio = point.usize(AXIS_SAMPLE_TO_BATCH_RATIO)?;
    let batch_size = point.usize(AXIS_BATCH_SIZE)?;
    let loss = LossKind::from_tag(point.tag(AXIS_LOSS_FUNCTION)?)?;
    let n_train = ratio * batch_size;

    let train_batch = generate_symbols(
        derive_seed(trial_seed, &["train_symbols"]),
        &constellation,
        n_train,
    );
    let train_rx = sys
        .channel
        .apply(&train_batch.mapped, derive_seed(trial_seed, &["train_channel"]))?;
    let standardizer = if sys.normalization {
        Standardizer::fit(&train_rx)
    } else {
        Standardizer::identity()
    };
    let train_inputs = standardizer.apply(&train_rx);

    let spec = NetworkSpec {
        input_dim: 2,
        output_dim: sys.modulation_order,
        hidden_layers: layers,
        hidden_width: neurons,
        activation,
    };
    let mut stream = PoolStream::new(
        train_inputs,
        train_batch.indices.clone(),
        derive_seed(trial_seed, &["batch_stream"]),
    );
    let outcome = match train(
        spec,
        optimizer,
        loss,
        derive_seed(trial_seed, &["weights"]),
        &mut stream,
        iterations,
        batch_size,
    ) {
        Ok(o) => o,
        Err(NeuralNetError::Diverged { iteration }) => {
            let mut e = Evaluation::failure();
            e.diagnostics = Some(serde_json::json!({ "diverged_at": iteration }));
            return Ok(e);
        }
        Err(other) => return Err(other.into()),
    };

    let test_batch = generate_symbols(
        derive_seed(trial_seed, &["test_symbols"]),
        &constellation,
        sys.test_symbols,
    );
    let test_rx = sys
        .channel
        .apply(&test_batch.mapped, derive_seed(trial_seed, &["test_channel"]))?;
    let test_inputs = standardizer.apply(&test_rx);
    let logits = outcome.state.forward(&test_inputs)?;
    let predicted: Vec<usize> = logits.iter().map(|z| argmax(z)).collect();
    let score = ser(&predicted, &test_batch.indices)?;

    let mut eval = Evaluation::ok(score);
    eval.diagnostics = Some(serde_json::json!({
        "final_loss": outcome.loss_trace.last().copied(),
        "n_train": n_train,
    }));
    Ok(eval)
}

fn argmax(z: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in z.iter().enumerate().skip(1) {
        if v > z[best] {
            best = i;
        }
    }
    best
}

impl Objective for SystemConfig {
    fn evaluate(&self, point: &HyperparamPoint, seed: u64) -> Evaluation {
        match evaluate_point(point, self, seed) {
            Ok(e) => e,
            Err(err) => {
                let mut e = Evaluation::failure();
                e.diagnostics = Some(serde_json::json!({ "error": err.to_string() }));
                e
            }
        }
    }
}

/// Mean score of a point over independent trial seeds derived from the
/// system's base seed.
pub fn average_score(
    point: &HyperparamPoint,
    sys: &SystemConfig,
    n_seeds: u32,
) -> Result<f64, ObjectiveError> {
    let key = point_key(point);
    let mut sum = 0.0;
    for r in 0..n_seeds {
        let seed = derive_seed(sys.base_seed, &[key.as_str(), &r.to_string()]);
        sum += evaluate_point(point, sys, seed)?.score;
    }
    Ok(sum / n_seeds as f64)
}

/// SER of the nearest-neighbor baseline on the same test stream the trained
/// detector sees.
pub fn ml_baseline_score(sys: &SystemConfig, trial_seed: u64) -> Result<f64, ObjectiveError> {
    let constellation = qam_constellation(sys.modulation_order)?;
    let test_batch = generate_symbols(
        derive_seed(trial_seed, &["test_symbols"]),
        &constellation,
        sys.test_symbols,
    );
    let test_rx = sys
        .channel
        .apply(&test_batch.mapped, derive_seed(trial_seed, &["test_channel"]))?;
    let predicted = ml_baseline_detect(&test_rx, &constellation);
    Ok(ser(&predicted, &test_batch.indices)?)
}
