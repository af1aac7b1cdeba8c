//! Hidden-layer activation functions and their backward passes.
//!
//! All kinds except Crelu and Softmax are elementwise. Crelu concatenates the
//! positive and negative parts, doubling the layer width; Softmax normalizes
//! over the layer vector (it is a legal, if poor, hidden activation here and
//! is implemented literally).

use serde::{Deserialize, Serialize};

use super::NeuralNetError;

pub const SELU_ALPHA: f64 = 1.6732;
pub const SELU_LAMBDA: f64 = 1.0507;
const ELU_ALPHA: f64 = 1.0;

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ActivationKind {
    Tanh,
    Relu,
    Elu,
    Selu,
    Relu6,
    Crelu,
    Softmax,
    Softsign,
    Softplus,
}

impl ActivationKind {
    pub fn from_tag(tag: &str) -> Result<Self, NeuralNetError> {
        use ActivationKind::*;
        Ok(match tag {
            "tanh" => Tanh,
            "relu" => Relu,
            "elu" => Elu,
            "selu" => Selu,
            "relu6" => Relu6,
            "crelu" => Crelu,
            "softmax" => Softmax,
            "softsign" => Softsign,
            "softplus" => Softplus,
            _ => return Err(NeuralNetError::UnknownTag { kind: "activation", tag: tag.to_string() }),
        })
    }

    pub fn tag(&self) -> &'static str {
        use ActivationKind::*;
        match self {
            Tanh => "tanh",
            Relu => "relu",
            Elu => "elu",
            Selu => "selu",
            Relu6 => "relu6",
            Crelu => "crelu",
            Softmax => "softmax",
            Softsign => "softsign",
            Softplus => "softplus",
        }
    }

    /// Width of the activated vector for a pre-activation of width `n`.
    pub fn output_width(&self, n: usize) -> usize {
        match self {
            ActivationKind::Crelu => 2 * n,
            _ => n,
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        use ActivationKind::*;
        match self {
            Tanh => x.iter().map(|&v| v.tanh()).collect(),
            Relu => x.iter().map(|&v| v.max(0.0)).collect(),
            Elu => x
                .iter()
                .map(|&v| if v > 0.0 { v } else { ELU_ALPHA * (v.exp() - 1.0) })
                .collect(),
            Selu => x
                .iter()
                .map(|&v| {
                    SELU_LAMBDA * if v > 0.0 { v } else { SELU_ALPHA * (v.exp() - 1.0) }
                })
                .collect(),
            Relu6 => x.iter().map(|&v| v.clamp(0.0, 6.0)).collect(),
            Crelu => {
                let mut out = Vec::with_capacity(2 * x.len());
                out.extend(x.iter().map(|&v| v.max(0.0)));
                out.extend(x.iter().map(|&v| (-v).max(0.0)));
                out
            }
            Softmax => softmax(x),
            Softsign => x.iter().map(|&v| v / (1.0 + v.abs())).collect(),
            Softplus => x.iter().map(|&v| softplus(v)).collect(),
        }
    }

    /// dL/dx from the pre-activation `x`, the activated output `y`, and dL/dy.
    ///
    /// One-sided conventions at kinks: Relu/Crelu/Relu6 use the derivative of
    /// the `x <= 0` (resp. `x >= 6`) branch at the kink itself, i.e. 0.
    pub fn backprop(&self, x: &[f64], y: &[f64], dy: &[f64]) -> Vec<f64> {
        use ActivationKind::*;
        match self {
            Tanh => x
                .iter()
                .zip(y)
                .zip(dy)
                .map(|((_, &yi), &gi)| gi * (1.0 - yi * yi))
                .collect(),
            Relu => x
                .iter()
                .zip(dy)
                .map(|(&xi, &gi)| if xi > 0.0 { gi } else { 0.0 })
                .collect(),
            Elu => x
                .iter()
                .zip(y)
                .zip(dy)
                .map(|((&xi, &yi), &gi)| if xi > 0.0 { gi } else { gi * (yi + ELU_ALPHA) })
                .collect(),
            Selu => x
                .iter()
                .zip(dy)
                .map(|(&xi, &gi)| {
                    if xi > 0.0 {
                        gi * SELU_LAMBDA
                    } else {
                        gi * SELU_LAMBDA * SELU_ALPHA * xi.exp()
                    }
                })
                .collect(),
            Relu6 => x
                .iter()
                .zip(dy)
                .map(|(&xi, &gi)| if xi > 0.0 && xi < 6.0 { gi } else { 0.0 })
                .collect(),
            Crelu => {
                let n = x.len();
                x.iter()
                    .enumerate()
                    .map(|(i, &xi)| {
                        let pos = if xi > 0.0 { dy[i] } else { 0.0 };
                        let neg = if xi < 0.0 { -dy[n + i] } else { 0.0 };
                        pos + neg
                    })
                    .collect()
            }
            Softmax => {
                let dot: f64 = y.iter().zip(dy).map(|(&s, &g)| s * g).sum();
                y.iter().zip(dy).map(|(&s, &g)| s * (g - dot)).collect()
            }
            Softsign => x
                .iter()
                .zip(dy)
                .map(|(&xi, &gi)| gi / (1.0 + xi.abs()).powi(2))
                .collect(),
            Softplus => x
                .iter()
                .zip(dy)
                .map(|(&xi, &gi)| gi * sigmoid(xi))
                .collect(),
        }
    }
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

pub fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

/// Numerically stable softmax over the whole slice.
pub fn softmax(x: &[f64]) -> Vec<f64> {
    let max = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = x.iter().map(|&v| (v - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}
