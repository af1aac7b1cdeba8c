//! First-order update rules. Each step consumes one gradient per parameter
//! tensor and mutates the tensor in place.
//!
//! Nesterov uses the standard reformulation that evaluates the gradient at
//! the current iterate: v' = γv + ηg, θ -= γv' + ηg. Ftrl and the proximal
//! variants follow their original published updates with l1/l2 strengths
//! defaulting to 0 so they degenerate to their base rules.

use serde::{Deserialize, Serialize};

use super::NeuralNetError;

pub const DEFAULT_MOMENTUM: f64 = 0.9;
pub const DEFAULT_BETA1: f64 = 0.9;
pub const DEFAULT_BETA2: f64 = 0.999;
pub const DEFAULT_EPSILON: f64 = 1e-8;
pub const DEFAULT_RMS_DECAY: f64 = 0.9;
/// Ftrl accumulator starting value, so the very first update is well defined.
pub const FTRL_INITIAL_ACCUMULATOR: f64 = 0.1;

#[derive(Clone, Copy, PartialEq, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OptimizerKind {
    GradientDescent { lr: f64 },
    Momentum { lr: f64, gamma: f64 },
    Nesterov { lr: f64, gamma: f64 },
    Adagrad { lr: f64, eps: f64 },
    Adadelta { rho: f64, eps: f64 },
    Adam { lr: f64, beta1: f64, beta2: f64, eps: f64 },
    RmsProp { lr: f64, decay: f64, eps: f64 },
    Ftrl { lr: f64, l1: f64, l2: f64 },
    ProximalGradientDescent { lr: f64, l1: f64, l2: f64 },
    ProximalAdagrad { lr: f64, l1: f64, l2: f64, eps: f64 },
}

impl OptimizerKind {
    /// Builds a kind from its grid tag with the given learning rate and
    /// default secondary parameters.
    pub fn from_tag(tag: &str, lr: f64) -> Result<Self, NeuralNetError> {
        use OptimizerKind::*;
        Ok(match tag {
            "gradient_descent" => GradientDescent { lr },
            "momentum" => Momentum { lr, gamma: DEFAULT_MOMENTUM },
            "nesterov" => Nesterov { lr, gamma: DEFAULT_MOMENTUM },
            "adagrad" => Adagrad { lr, eps: DEFAULT_EPSILON },
            "adadelta" => Adadelta { rho: DEFAULT_MOMENTUM, eps: DEFAULT_EPSILON },
            "adam" => Adam {
                lr,
                beta1: DEFAULT_BETA1,
                beta2: DEFAULT_BETA2,
                eps: DEFAULT_EPSILON,
            },
            "rmsprop" => RmsProp { lr, decay: DEFAULT_RMS_DECAY, eps: DEFAULT_EPSILON },
            "ftrl" => Ftrl { lr, l1: 0.0, l2: 0.0 },
            "proximal_gradient_descent" => ProximalGradientDescent { lr, l1: 0.0, l2: 0.0 },
            "proximal_adagrad" => ProximalAdagrad { lr, l1: 0.0, l2: 0.0, eps: DEFAULT_EPSILON },
            _ => {
                return Err(NeuralNetError::UnknownTag {
                    kind: "optimizer",
                    tag: tag.to_string(),
                })
            }
        })
    }

    fn slots_needed(&self) -> usize {
        use OptimizerKind::*;
        match self {
            GradientDescent { .. } | ProximalGradientDescent { .. } => 0,
            Momentum { .. } | Nesterov { .. } | Adagrad { .. } | RmsProp { .. }
            | ProximalAdagrad { .. } => 1,
            Adadelta { .. } | Adam { .. } | Ftrl { .. } => 2,
        }
    }
}

/// Per-tensor accumulators plus the shared step counter.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizerState {
    kind: OptimizerKind,
    /// `slots[tensor][slot]`: up to two accumulator vectors per tensor.
    slots: Vec<Vec<Vec<f64>>>,
    t: u64,
}

impl OptimizerState {
    /// `initial_params` is needed because Ftrl represents the parameter as a
    /// function of its accumulator `z`, which must start consistent with the
    /// initial parameter values.
    pub fn new(kind: OptimizerKind, initial_params: &[&[f64]]) -> Self {
        let n_slots = kind.slots_needed();
        let slots = initial_params
            .iter()
            .map(|p| {
                let mut s = vec![vec![0.0; p.len()]; n_slots];
                if let OptimizerKind::Ftrl { lr, l2, .. } = kind {
                    // slot 0 = n (init 0.1), slot 1 = z with z0 chosen so the
                    // closed form reproduces the initial parameter
                    let denom = FTRL_INITIAL_ACCUMULATOR.sqrt() / lr + l2;
                    for (i, &theta) in p.iter().enumerate() {
                        s[0][i] = FTRL_INITIAL_ACCUMULATOR;
                        s[1][i] = -theta * denom;
                    }
                }
                s
            })
            .collect();
        OptimizerState { kind, slots, t: 0 }
    }

    pub fn kind(&self) -> &OptimizerKind {
        &self.kind
    }

    pub fn step_count(&self) -> u64 {
        self.t
    }

    /// Applies one update to every tensor. Panics on shape drift, which is a
    /// programmer error.
    pub fn step(&mut self, params: &mut [&mut [f64]], grads: &[&[f64]]) -> Result<(), NeuralNetError> {
        assert_eq!(params.len(), self.slots.len());
        assert_eq!(grads.len(), self.slots.len());
        for (p, g) in params.iter().zip(grads) {
            if p.len() != g.len() {
                return Err(NeuralNetError::ShapeMismatch { expected: p.len(), got: g.len() });
            }
            if g.iter().any(|v| !v.is_finite()) {
                return Err(NeuralNetError::NonFinite { context: "gradient" });
            }
        }
        self.t += 1;
        let t = self.t;
        for ((p, g), slots) in params.iter_mut().zip(grads).zip(&mut self.slots) {
            update_tensor(self.kind, t, p, g, slots);
        }
        Ok(())
    }
}

fn soft_threshold(x: f64, limit: f64) -> f64 {
    x.signum() * (x.abs() - limit).max(0.0)
}

fn update_tensor(kind: OptimizerKind, t: u64, p: &mut [f64], g: &[f64], slots: &mut [Vec<f64>]) {
    use OptimizerKind::*;
    match kind {
        GradientDescent { lr } => {
            for (pi, &gi) in p.iter_mut().zip(g) {
                *pi -= lr * gi;
            }
        }
        Momentum { lr, gamma } => {
            let v = &mut slots[0];
            for ((pi, &gi), vi) in p.iter_mut().zip(g).zip(v.iter_mut()) {
                *vi = gamma * *vi + lr * gi;
                *pi -= *vi;
            }
        }
        Nesterov { lr, gamma } => {
            let v = &mut slots[0];
            for ((pi, &gi), vi) in p.iter_mut().zip(g).zip(v.iter_mut()) {
                *vi = gamma * *vi + lr * gi;
                *pi -= gamma * *vi + lr * gi;
            }
        }
        Adagrad { lr, eps } => {
            let acc = &mut slots[0];
            for ((pi, &gi), ai) in p.iter_mut().zip(g).zip(acc.iter_mut()) {
                *ai += gi * gi;
                *pi -= lr * gi / (*ai + eps).sqrt();
            }
        }
        Adadelta { rho, eps } => {
            let (eg, ed) = slots.split_at_mut(1);
            let eg = &mut eg[0];
            let ed = &mut ed[0];
            for (((pi, &gi), egi), edi) in p.iter_mut().zip(g).zip(eg.iter_mut()).zip(ed.iter_mut()) {
                *egi = rho * *egi + (1.0 - rho) * gi * gi;
                let delta = -((*edi + eps).sqrt() / (*egi + eps).sqrt()) * gi;
                *pi += delta;
                *edi = rho * *edi + (1.0 - rho) * delta * delta;
            }
        }
        Adam { lr, beta1, beta2, eps } => {
            let (m, v) = slots.split_at_mut(1);
            let m = &mut m[0];
            let v = &mut v[0];
            let bc1 = 1.0 - beta1.powi(t as i32);
            let bc2 = 1.0 - beta2.powi(t as i32);
            for (((pi, &gi), mi), vi) in p.iter_mut().zip(g).zip(m.iter_mut()).zip(v.iter_mut()) {
                *mi = beta1 * *mi + (1.0 - beta1) * gi;
                *vi = beta2 * *vi + (1.0 - beta2) * gi * gi;
                let m_hat = *mi / bc1;
                let v_hat = *vi / bc2;
                *pi -= lr * m_hat / (v_hat.sqrt() + eps);
            }
        }
        RmsProp { lr, decay, eps } => {
            let acc = &mut slots[0];
            for ((pi, &gi), ai) in p.iter_mut().zip(g).zip(acc.iter_mut()) {
                *ai = decay * *ai + (1.0 - decay) * gi * gi;
                *pi -= lr * gi / (*ai + eps).sqrt();
            }
        }
        Ftrl { lr, l1, l2 } => {
            let (n, z) = slots.split_at_mut(1);
            let n = &mut n[0];
            let z = &mut z[0];
            for (((pi, &gi), ni), zi) in p.iter_mut().zip(g).zip(n.iter_mut()).zip(z.iter_mut()) {
                let n_new = *ni + gi * gi;
                let sigma = (n_new.sqrt() - ni.sqrt()) / lr;
                *zi += gi - sigma * *pi;
                *ni = n_new;
                *pi = if zi.abs() <= l1 {
                    0.0
                } else {
                    -soft_threshold(*zi, l1) / (ni.sqrt() / lr + l2)
                };
            }
        }
        ProximalGradientDescent { lr, l1, l2 } => {
            for (pi, &gi) in p.iter_mut().zip(g) {
                let stepped = *pi - lr * gi;
                *pi = soft_threshold(stepped, lr * l1) / (1.0 + lr * l2);
            }
        }
        ProximalAdagrad { lr, l1, l2, eps } => {
            let acc = &mut slots[0];
            for ((pi, &gi), ai) in p.iter_mut().zip(g).zip(acc.iter_mut()) {
                *ai += gi * gi;
                let rate = lr / (*ai + eps).sqrt();
                let stepped = *pi - rate * gi;
                *pi = soft_threshold(stepped, rate * l1) / (1.0 + rate * l2);
            }
        }
    }
}
