//! Per-sample loss functions on logits, each returning the value together
//! with its analytic gradient with respect to the logits.

use serde::{Deserialize, Serialize};

use super::activation::{sigmoid, softmax};
use super::NeuralNetError;

#[derive(Clone, Copy, PartialEq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    SoftmaxCe,
    /// Identical to `SoftmaxCe` in value and logit gradient; the v2 variant
    /// differs only in target gradients, which nothing here needs.
    SoftmaxCeV2,
    SigmoidCe,
    WeightedCe {
        pos_weight: f64,
    },
    SparseSoftmaxCe,
    Mse,
}

impl LossKind {
    pub fn from_tag(tag: &str) -> Result<Self, NeuralNetError> {
        Ok(match tag {
            "softmax_ce" => LossKind::SoftmaxCe,
            "softmax_ce_v2" => LossKind::SoftmaxCeV2,
            "sigmoid_ce" => LossKind::SigmoidCe,
            "weighted_ce" => LossKind::WeightedCe { pos_weight: 2.0 },
            "sparse_softmax_ce" => LossKind::SparseSoftmaxCe,
            "mse" => LossKind::Mse,
            _ => {
                return Err(NeuralNetError::UnknownTag {
                    kind: "loss",
                    tag: tag.to_string(),
                })
            }
        })
    }
}

/// Target for one sample: either a probability/one-hot vector or a class index.
#[derive(Clone, Debug)]
pub enum Target<'a> {
    Probs(&'a [f64]),
    Class(usize),
}

impl Target<'_> {
    fn as_probs(&self, dim: usize) -> Result<Vec<f64>, NeuralNetError> {
        match self {
            Target::Probs(p) => {
                if p.len() != dim {
                    return Err(NeuralNetError::ShapeMismatch {
                        expected: dim,
                        got: p.len(),
                    });
                }
                Ok(p.to_vec())
            }
            Target::Class(c) => {
                if *c >= dim {
                    return Err(NeuralNetError::ShapeMismatch { expected: dim, got: *c });
                }
                let mut t = vec![0.0; dim];
                t[*c] = 1.0;
                Ok(t)
            }
        }
    }
}

/// Loss value and gradient with respect to `logits` for a single sample.
pub fn loss_and_grad(
    kind: LossKind,
    logits: &[f64],
    target: &Target,
) -> Result<(f64, Vec<f64>), NeuralNetError> {
    if logits.iter().any(|v| !v.is_finite()) {
        return Err(NeuralNetError::NonFinite { context: "logits" });
    }
    let m = logits.len();
    let t = target.as_probs(m)?;

    match kind {
        LossKind::SoftmaxCe | LossKind::SoftmaxCeV2 | LossKind::SparseSoftmaxCe => {
            let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let lse = max
                + logits
                    .iter()
                    .map(|&z| (z - max).exp())
                    .sum::<f64>()
                    .ln();
            let value = lse - logits.iter().zip(&t).map(|(&z, &ti)| z * ti).sum::<f64>();
            let s = softmax(logits);
            let grad = s.iter().zip(&t).map(|(&si, &ti)| si - ti).collect();
            Ok((value, grad))
        }
        LossKind::SigmoidCe => {
            let value = logits
                .iter()
                .zip(&t)
                .map(|(&z, &ti)| z.max(0.0) - z * ti + (-z.abs()).exp().ln_1p())
                .sum();
            let grad = logits.iter().zip(&t).map(|(&z, &ti)| sigmoid(z) - ti).collect();
            Ok((value, grad))
        }
        LossKind::WeightedCe { pos_weight } => {
            // (1-t)z + (1 + (q-1)t) (ln(1+e^{-|z|}) + max(-z, 0))
            let value = logits
                .iter()
                .zip(&t)
                .map(|(&z, &ti)| {
                    let l = 1.0 + (pos_weight - 1.0) * ti;
                    (1.0 - ti) * z + l * ((-z.abs()).exp().ln_1p() + (-z).max(0.0))
                })
                .sum();
            let grad = logits
                .iter()
                .zip(&t)
                .map(|(&z, &ti)| {
                    let l = 1.0 + (pos_weight - 1.0) * ti;
                    (1.0 - ti) + l * (sigmoid(z) - 1.0)
                })
                .collect();
            Ok((value, grad))
        }
        LossKind::Mse => {
            // mean squared difference after softmax
            let s = softmax(logits);
            let value = s
                .iter()
                .zip(&t)
                .map(|(&si, &ti)| (si - ti).powi(2))
                .sum::<f64>()
                / m as f64;
            let diffs: Vec<f64> = s.iter().zip(&t).map(|(&si, &ti)| si - ti).collect();
            let dot: f64 = diffs.iter().zip(&s).map(|(&d, &si)| d * si).sum();
            let grad = s
                .iter()
                .zip(&diffs)
                .map(|(&si, &di)| 2.0 / m as f64 * si * (di - dot))
                .collect();
            Ok((value, grad))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::Rng;

    fn fd_grad(kind: LossKind, logits: &[f64], target: &Target) -> Vec<f64> {
        let h = 1e-6;
        (0..logits.len())
            .map(|i| {
                let mut zp = logits.to_vec();
                zp[i] += h;
                let mut zm = logits.to_vec();
                zm[i] -= h;
                let (fp, _) = loss_and_grad(kind, &zp, target).unwrap();
                let (fm, _) = loss_and_grad(kind, &zm, target).unwrap();
                (fp - fm) / (2.0 * h)
            })
            .collect()
    }

    #[test]
    fn softmax_ce_uniform_logits() {
        let (v, g) = loss_and_grad(LossKind::SoftmaxCe, &[0.0; 4], &Target::Class(0)).unwrap();
        assert_relative_eq!(v, 4f64.ln(), epsilon = 1e-12);
        assert_relative_eq!(g[0], 0.25 - 1.0, epsilon = 1e-12);
        assert_relative_eq!(g[1], 0.25, epsilon = 1e-12);
    }

    #[test]
    fn sigmoid_ce_at_zero() {
        let (v, _) = loss_and_grad(LossKind::SigmoidCe, &[0.0], &Target::Probs(&[1.0])).unwrap();
        assert_relative_eq!(v, 2f64.ln(), epsilon = 1e-12);
    }

    #[test]
    fn weighted_ce_degenerates_to_sigmoid_ce() {
        let mut rng = crate::seed::rng_from(12);
        for _ in 0..10 {
            let z: Vec<f64> = (0..4).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let c = rng.gen_range(0..4);
            let (v1, g1) =
                loss_and_grad(LossKind::WeightedCe { pos_weight: 1.0 }, &z, &Target::Class(c)).unwrap();
            let (v2, g2) = loss_and_grad(LossKind::SigmoidCe, &z, &Target::Class(c)).unwrap();
            assert_relative_eq!(v1, v2, epsilon = 1e-12);
            for (a, b) in g1.iter().zip(&g2) {
                assert_relative_eq!(a, b, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn sparse_and_dense_softmax_ce_agree() {
        let z = [0.4, -1.1, 2.2, 0.0];
        let onehot = [0.0, 0.0, 1.0, 0.0];
        let (v1, g1) = loss_and_grad(LossKind::SparseSoftmaxCe, &z, &Target::Class(2)).unwrap();
        let (v2, g2) = loss_and_grad(LossKind::SoftmaxCe, &z, &Target::Probs(&onehot)).unwrap();
        assert_relative_eq!(v1, v2, epsilon = 1e-14);
        assert_eq!(g1, g2);
    }

    #[test]
    fn gradients_match_finite_differences() {
        let mut rng = crate::seed::rng_from(77);
        let kinds = [
            LossKind::SoftmaxCe,
            LossKind::SoftmaxCeV2,
            LossKind::SigmoidCe,
            LossKind::WeightedCe { pos_weight: 2.5 },
            LossKind::SparseSoftmaxCe,
            LossKind::Mse,
        ];
        for kind in kinds {
            for _ in 0..5 {
                let z: Vec<f64> = (0..5).map(|_| rng.gen_range(-2.0..2.0)).collect();
                let c = rng.gen_range(0..5);
                let target = Target::Class(c);
                let (_, ana) = loss_and_grad(kind, &z, &target).unwrap();
                let num = fd_grad(kind, &z, &target);
                for (a, n) in ana.iter().zip(&num) {
                    assert_relative_eq!(a, n, max_relative = 1e-6, epsilon = 1e-9);
                }
            }
        }
    }

    #[test]
    fn stable_form_matches_naive_on_well_scaled_inputs() {
        let z = [0.7, -0.3, 1.9, -2.2];
        let t = [0.0, 1.0, 0.0, 0.0];
        let naive = -softmax(&z)
            .iter()
            .zip(&t)
            .map(|(&s, &ti)| ti * s.ln())
            .sum::<f64>();
        let (v, _) = loss_and_grad(LossKind::SoftmaxCe, &z, &Target::Probs(&t)).unwrap();
        assert_relative_eq!(v, naive, epsilon = 1e-10);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(loss_and_grad(LossKind::SoftmaxCe, &[f64::NAN, 0.0], &Target::Class(0)).is_err());
        assert!(loss_and_grad(LossKind::SoftmaxCe, &[0.0; 4], &Target::Probs(&[1.0, 0.0])).is_err());
        assert!(loss_and_grad(LossKind::SoftmaxCe, &[0.0; 4], &Target::Class(9)).is_err());
    }
}
