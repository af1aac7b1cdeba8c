//! MLP architecture, parameter storage, forward/backward passes, and the
//! training loop.
//!
//! Hidden layers are affine maps followed by the spec's activation; the output
//! layer is affine only (logits). Crelu doubles the activated width, which the
//! shape inference accounts for when sizing the next layer.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::seed::rng_from;

use super::activation::ActivationKind;
use super::loss::{loss_and_grad, LossKind, Target};
use super::optimizer::{OptimizerKind, OptimizerState};
use super::NeuralNetError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkSpec {
    pub input_dim: usize,
    pub output_dim: usize,
    pub hidden_layers: usize,
    pub hidden_width: usize,
    pub activation: ActivationKind,
}

impl NetworkSpec {
    /// (fan_in, fan_out) for every affine layer, hidden layers first.
    pub fn layer_shapes(&self) -> Vec<(usize, usize)> {
        let mut shapes = Vec::with_capacity(self.hidden_layers + 1);
        let mut width = self.input_dim;
        for _ in 0..self.hidden_layers {
            shapes.push((width, self.hidden_width));
            width = self.activation.output_width(self.hidden_width);
        }
        shapes.push((width, self.output_dim));
        shapes
    }

    pub fn param_count(&self) -> usize {
        self.layer_shapes()
            .iter()
            .map(|&(fi, fo)| fi * fo + fo)
            .sum()
    }
}

/// One affine layer, weights row-major with shape (fan_out, fan_in).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dense {
    pub fan_in: usize,
    pub fan_out: usize,
    pub w: Vec<f64>,
    pub b: Vec<f64>,
}

impl Dense {
    fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut out = self.b.clone();
        for (o, row) in out.iter_mut().zip(self.w.chunks(self.fan_in)) {
            *o += row.iter().zip(x).map(|(&wi, &xi)| wi * xi).sum::<f64>();
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetworkState {
    pub spec: NetworkSpec,
    pub layers: Vec<Dense>,
    opt: OptimizerState,
}

/// Gradients with the same shapes as the parameter tensors.
#[derive(Clone, Debug, PartialEq)]
pub struct Gradients {
    pub layers: Vec<(Vec<f64>, Vec<f64>)>,
}

impl NetworkState {
    /// Seeded fan-balanced init: weights uniform in ±sqrt(6/(fan_in+fan_out)),
    /// biases zero.
    pub fn init(spec: NetworkSpec, optimizer: OptimizerKind, seed: u64) -> Self {
        let mut rng = rng_from(seed);
        let layers: Vec<Dense> = spec
            .layer_shapes()
            .into_iter()
            .map(|(fi, fo)| {
                let bound = (6.0 / (fi + fo) as f64).sqrt();
                let w = (0..fi * fo).map(|_| rng.gen_range(-bound..bound)).collect();
                Dense { fan_in: fi, fan_out: fo, w, b: vec![0.0; fo] }
            })
            .collect();
        let param_refs: Vec<&[f64]> = layers
            .iter()
            .flat_map(|l| [l.w.as_slice(), l.b.as_slice()])
            .collect();
        let opt = OptimizerState::new(optimizer, &param_refs);
        NetworkState { spec, layers, opt }
    }

    pub fn optimizer(&self) -> &OptimizerState {
        &self.opt
    }

    /// Logits for a batch of inputs.
    pub fn forward(&self, inputs: &[Vec<f64>]) -> Result<Vec<Vec<f64>>, NeuralNetError> {
        inputs
            .iter()
            .map(|x| self.forward_one(x).map(|c| c.logits))
            .collect()
    }

    fn forward_one(&self, x: &[f64]) -> Result<ForwardCache, NeuralNetError> {
        if x.len() != self.spec.input_dim {
            return Err(NeuralNetError::ShapeMismatch {
                expected: self.spec.input_dim,
                got: x.len(),
            });
        }
        let n_hidden = self.layers.len() - 1;
        let mut activated = x.to_vec();
        let mut pre = Vec::with_capacity(n_hidden);
        let mut post = Vec::with_capacity(n_hidden);
        for layer in &self.layers[..n_hidden] {
            let z = layer.apply(&activated);
            let a = self.spec.activation.apply(&z);
            if a.iter().any(|v| !v.is_finite()) {
                return Err(NeuralNetError::NonFinite { context: "hidden layer" });
            }
            pre.push(z);
            post.push(a.clone());
            activated = a;
        }
        let logits = self.layers[n_hidden].apply(&activated);
        if logits.iter().any(|v| !v.is_finite()) {
            return Err(NeuralNetError::NonFinite { context: "output layer" });
        }
        Ok(ForwardCache { input: x.to_vec(), pre, post, logits })
    }

    /// Mean batch loss and its exact gradient with respect to every W, b.
    pub fn backward(
        &self,
        inputs: &[Vec<f64>],
        targets: &[usize],
        loss: LossKind,
    ) -> Result<(f64, Gradients), NeuralNetError> {
        if inputs.len() != targets.len() || inputs.is_empty() {
            return Err(NeuralNetError::ShapeMismatch {
                expected: inputs.len(),
                got: targets.len(),
            });
        }
        let k = inputs.len() as f64;
        let mut grads: Vec<(Vec<f64>, Vec<f64>)> = self
            .layers
            .iter()
            .map(|l| (vec![0.0; l.w.len()], vec![0.0; l.b.len()]))
            .collect();
        let mut total = 0.0;
        let n_hidden = self.layers.len() - 1;
        for (x, &t) in inputs.iter().zip(targets) {
            let cache = self.forward_one(x)?;
            let (value, dlogits) = loss_and_grad(loss, &cache.logits, &Target::Class(t))?;
            total += value;
            // output layer
            let mut dy = dlogits;
            for li in (0..self.layers.len()).rev() {
                let layer = &self.layers[li];
                let layer_in: &[f64] = if li == 0 { &cache.input } else { &cache.post[li - 1] };
                let (gw, gb) = &mut grads[li];
                for (o, &dyi) in dy.iter().enumerate() {
                    gb[o] += dyi / k;
                    let row = &mut gw[o * layer.fan_in..(o + 1) * layer.fan_in];
                    for (gwi, &xi) in row.iter_mut().zip(layer_in) {
                        *gwi += dyi * xi / k;
                    }
                }
                if li == 0 {
                    break;
                }
                // dL/d(activated input of this layer)
                let mut dx = vec![0.0; layer.fan_in];
                for (o, &dyi) in dy.iter().enumerate() {
                    let row = &layer.w[o * layer.fan_in..(o + 1) * layer.fan_in];
                    for (dxi, &wi) in dx.iter_mut().zip(row) {
                        *dxi += dyi * wi;
                    }
                }
                // through the previous hidden activation
                let h = li - 1;
                debug_assert!(h < n_hidden);
                dy = self
                    .spec
                    .activation
                    .backprop(&cache.pre[h], &cache.post[h], &dx);
            }
        }
        Ok((total / k, Gradients { layers: grads }))
    }

    /// One optimizer step with the given gradients.
    pub fn step(&mut self, grads: &Gradients) -> Result<(), NeuralNetError> {
        let grad_refs: Vec<&[f64]> = grads
            .layers
            .iter()
            .flat_map(|(w, b)| [w.as_slice(), b.as_slice()])
            .collect();
        let mut param_refs: Vec<&mut [f64]> = self
            .layers
            .iter_mut()
            .flat_map(|l| [l.w.as_mut_slice(), l.b.as_mut_slice()])
            .collect();
        self.opt.step(&mut param_refs, &grad_refs)
    }
}

struct ForwardCache {
    input: Vec<f64>,
    pre: Vec<Vec<f64>>,
    post: Vec<Vec<f64>>,
    logits: Vec<f64>,
}

/// Source of training batches.
pub trait DataStream {
    fn next_batch(&mut self, n: usize) -> (Vec<Vec<f64>>, Vec<usize>);
}

/// Resamples batches with replacement from a finite pool, seeded.
pub struct PoolStream {
    inputs: Vec<Vec<f64>>,
    targets: Vec<usize>,
    rng: rand_chacha::ChaCha8Rng,
}

impl PoolStream {
    pub fn new(inputs: Vec<Vec<f64>>, targets: Vec<usize>, seed: u64) -> Self {
        assert_eq!(inputs.len(), targets.len());
        assert!(!inputs.is_empty());
        PoolStream { inputs, targets, rng: rng_from(seed) }
    }
}

impl DataStream for PoolStream {
    fn next_batch(&mut self, n: usize) -> (Vec<Vec<f64>>, Vec<usize>) {
        let mut xs = Vec::with_capacity(n);
        let mut ts = Vec::with_capacity(n);
        for _ in 0..n {
            let i = self.rng.gen_range(0..self.inputs.len());
            xs.push(self.inputs[i].clone());
            ts.push(self.targets[i]);
        }
        (xs, ts)
    }
}

pub struct TrainOutcome {
    pub state: NetworkState,
    pub loss_trace: Vec<f64>,
}

/// Runs exactly `iterations` optimizer steps, each on a fresh batch drawn
/// from the stream. Non-finite loss aborts with `Diverged`.
pub fn train(
    spec: NetworkSpec,
    optimizer: OptimizerKind,
    loss: LossKind,
    init_seed: u64,
    stream: &mut dyn DataStream,
    iterations: u64,
    batch_size: usize,
) -> Result<TrainOutcome, NeuralNetError> {
    let mut state = NetworkState::init(spec, optimizer, init_seed);
    let mut trace = Vec::with_capacity(iterations as usize);
    for it in 0..iterations {
        let (xs, ts) = stream.next_batch(batch_size);
        let (value, grads) = state
            .backward(&xs, &ts, loss)
            .map_err(|e| match e {
                NeuralNetError::NonFinite { .. } => NeuralNetError::Diverged { iteration: it },
                other => other,
            })?;
        if !value.is_finite() {
            return Err(NeuralNetError::Diverged { iteration: it });
        }
        state.step(&grads).map_err(|e| match e {
            NeuralNetError::NonFinite { .. } => NeuralNetError::Diverged { iteration: it },
            other => other,
        })?;
        trace.push(value);
    }
    Ok(TrainOutcome { state, loss_trace: trace })
}
