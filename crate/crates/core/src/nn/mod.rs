//! Dense feed-forward network with inverted dropout.
//!
//! Hidden layers use ReLU followed by dropout; the output layer is linear.
//! Dropout is *inverted*: kept activations are scaled by `1 / (1 - d)` when a
//! mask is applied, so the deterministic pass needs no rescaling and `d = 0`
//! makes every stochastic pass identical to it.
//!
//! Weights are stored row-major with shape `(out_dim, in_dim)`.

mod adam;
mod checkpoint;
mod train;

pub use adam::AdamState;
pub use checkpoint::Checkpoint;
pub use train::TrainReport;

use rand::Rng;
use rand_distr::{Distribution, Uniform};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// An `(input, target)` pair borrowed from some dataset.
pub type Example<'a> = (&'a [f64], &'a [f64]);

/// Losses above this are treated as a diverged optimisation.
pub const DIVERGENCE_LOSS: f64 = 1e6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NnError {
    #[error("invalid network config: {0}")]
    InvalidConfig(String),
    #[error("input has length {got}, network expects {expected}")]
    InputShape { expected: usize, got: usize },
    #[error("target has length {got}, network outputs {expected}")]
    TargetShape { expected: usize, got: usize },
    #[error("dropout mask shape does not match the hidden layers")]
    MaskShape,
    #[error("gradient shape does not match the parameters")]
    GradientShape,
    #[error("empty batch")]
    EmptyBatch,
    #[error("empty dataset")]
    EmptyDataset,
    #[error("training diverged (loss = {loss})")]
    Diverged { loss: f64 },
    #[error("non-finite gradient entry")]
    NonFiniteGradient,
    #[error("malformed checkpoint: {0}")]
    Checkpoint(String),
}

/// Architecture and optimiser hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NetConfig {
    /// Input dim, hidden dims, output dim.
    pub layer_sizes: Vec<usize>,
    /// Dropout probability `d` on every hidden layer.
    pub dropout: f64,
    pub learning_rate: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_epsilon: f64,
    /// Weight on the sum of squared weights (biases are not penalised).
    pub l2_weight: f64,
    pub train_epochs: usize,
    pub batch_size: usize,
    /// Keep parameters between successive `train` calls (ADAM moments are
    /// always reset). When false the network is re-initialised first.
    pub warm_start: bool,
}

impl Default for NetConfig {
    fn default() -> Self {
        Self {
            layer_sizes: vec![1, 64, 64, 32, 1],
            dropout: 0.05,
            learning_rate: 1e-3,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_epsilon: 1e-8,
            l2_weight: 1e-5,
            train_epochs: 100,
            batch_size: 32,
            warm_start: true,
        }
    }
}

impl NetConfig {
    /// Default hyperparameters with the 64-64-32 hidden stack between the
    /// given input and output widths.
    pub fn novice(input_dim: usize, output_dim: usize) -> Self {
        Self {
            layer_sizes: vec![input_dim, 64, 64, 32, output_dim],
            ..Self::default()
        }
    }

    pub fn input_dim(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.layer_sizes.last().unwrap()
    }

    pub fn validate(&self) -> Result<(), NnError> {
        let bad = |msg: &str| Err(NnError::InvalidConfig(msg.to_owned()));
        if self.layer_sizes.len() < 2 {
            return bad("layer_sizes needs at least an input and an output width");
        }
        if self.layer_sizes.contains(&0) {
            return bad("every layer width must be >= 1");
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return bad("dropout must lie in [0, 1)");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be positive");
        }
        if !(self.adam_beta1 > 0.0 && self.adam_beta1 < 1.0) {
            return bad("adam_beta1 must lie in (0, 1)");
        }
        if !(self.adam_beta2 > 0.0 && self.adam_beta2 < 1.0) {
            return bad("adam_beta2 must lie in (0, 1)");
        }
        if !(self.adam_epsilon > 0.0) {
            return bad("adam_epsilon must be positive");
        }
        if !(self.l2_weight >= 0.0 && self.l2_weight.is_finite()) {
            return bad("l2_weight must be nonnegative");
        }
        if self.train_epochs == 0 {
            return bad("train_epochs must be >= 1");
        }
        if self.batch_size == 0 {
            return bad("batch_size must be >= 1");
        }
        Ok(())
    }
}

/// One dense affine layer.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    in_dim: usize,
    out_dim: usize,
    weights: Vec<f64>,
    biases: Vec<f64>,
}

impl Layer {
    pub fn zeros(in_dim: usize, out_dim: usize) -> Self {
        Self {
            in_dim,
            out_dim,
            weights: vec![0.0; in_dim * out_dim],
            biases: vec![0.0; out_dim],
        }
    }

    /// Glorot-uniform weights, zero biases.
    fn glorot<R: Rng + ?Sized>(in_dim: usize, out_dim: usize, rng: &mut R) -> Self {
        let limit = (6.0 / (in_dim + out_dim) as f64).sqrt();
        let dist = Uniform::new_inclusive(-limit, limit).expect("finite limit");
        let mut layer = Self::zeros(in_dim, out_dim);
        for w in &mut layer.weights {
            *w = dist.sample(rng);
        }
        layer
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn biases(&self) -> &[f64] {
        &self.biases
    }

    pub fn weights_mut(&mut self) -> &mut [f64] {
        &mut self.weights
    }

    pub fn biases_mut(&mut self) -> &mut [f64] {
        &mut self.biases
    }

    fn affine(&self, x: &[f64], out: &mut [f64]) {
        for (i, (o, b)) in out.iter_mut().zip(&self.biases).enumerate() {
            let row = &self.weights[i * self.in_dim..(i + 1) * self.in_dim];
            *o = b + dot(row, x);
        }
    }
}

/// Dot product with four independent accumulators so the loop vectorises.
#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f64; 4];
    let ca = a.chunks_exact(4);
    let cb = b.chunks_exact(4);
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        acc[0] += x[0] * y[0];
        acc[1] += x[1] * y[1];
        acc[2] += x[2] * y[2];
        acc[3] += x[3] * y[3];
    }
    let mut tail = 0.0;
    for (x, y) in ra.iter().zip(rb) {
        tail += x * y;
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

#[inline]
fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Binary keep-vector for one hidden layer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DropoutMask {
    keep: Vec<bool>,
}

impl DropoutMask {
    pub fn new(keep: Vec<bool>) -> Self {
        Self { keep }
    }

    pub fn all_kept(width: usize) -> Self {
        Self { keep: vec![true; width] }
    }

    pub fn all_dropped(width: usize) -> Self {
        Self { keep: vec![false; width] }
    }

    /// Each unit kept independently with probability `1 - d`.
    pub fn sample<R: Rng + ?Sized>(width: usize, dropout: f64, rng: &mut R) -> Self {
        let keep = (0..width)
            .map(|_| dropout == 0.0 || rng.random::<f64>() >= dropout)
            .collect();
        Self { keep }
    }

    pub fn len(&self) -> usize {
        self.keep.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keep.is_empty()
    }

    pub fn keeps(&self) -> &[bool] {
        &self.keep
    }
}

/// Gradient (or any parameter-shaped quantity) for one layer.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerGradients {
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

/// Parameter-shaped gradient set.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<LayerGradients>,
}

impl Gradients {
    pub fn zeros_like(net: &Mlp) -> Self {
        Self {
            layers: net
                .layers
                .iter()
                .map(|l| LayerGradients {
                    weights: vec![0.0; l.weights.len()],
                    biases: vec![0.0; l.biases.len()],
                })
                .collect(),
        }
    }

    /// Weights of every layer followed by its biases, layer by layer.
    pub fn flatten(&self) -> Vec<f64> {
        self.layers
            .iter()
            .flat_map(|l| l.weights.iter().chain(&l.biases).copied())
            .collect()
    }

    pub fn is_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.weights.iter().chain(&l.biases).all(|g| g.is_finite()))
    }

    fn matches(&self, net: &Mlp) -> bool {
        self.layers.len() == net.layers.len()
            && self.layers.iter().zip(&net.layers).all(|(g, l)| {
                g.weights.len() == l.weights.len() && g.biases.len() == l.biases.len()
            })
    }
}

/// Multilayer perceptron with its optimiser state.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    layers: Vec<Layer>,
    config: NetConfig,
    adam: AdamState,
}

/// Per-example activations kept for the backward pass.
struct Trace {
    /// Pre-activations of every layer.
    pre: Vec<Vec<f64>>,
    /// Inputs fed to every layer (`post[0]` is the network input).
    post: Vec<Vec<f64>>,
}

impl Trace {
    fn new(net: &Mlp) -> Self {
        let pre = net.layers.iter().map(|l| vec![0.0; l.out_dim]).collect();
        let post = net.layers.iter().map(|l| vec![0.0; l.in_dim]).collect();
        Self { pre, post }
    }
}

impl Mlp {
    /// Seeded Glorot initialisation.
    pub fn new<R: Rng + ?Sized>(config: NetConfig, rng: &mut R) -> Result<Self, NnError> {
        config.validate()?;
        let layers = config
            .layer_sizes
            .windows(2)
            .map(|w| Layer::glorot(w[0], w[1], rng))
            .collect();
        Ok(Self::assemble(config, layers))
    }

    /// Network with every weight and bias zero.
    pub fn zeros(config: NetConfig) -> Result<Self, NnError> {
        config.validate()?;
        let layers = config
            .layer_sizes
            .windows(2)
            .map(|w| Layer::zeros(w[0], w[1]))
            .collect();
        Ok(Self::assemble(config, layers))
    }

    /// Builds a network from explicit layers; widths must chain and agree
    /// with `config.layer_sizes`.
    pub fn from_layers(config: NetConfig, layers: Vec<Layer>) -> Result<Self, NnError> {
        config.validate()?;
        let chained = layers.len() + 1 == config.layer_sizes.len()
            && layers.iter().enumerate().all(|(i, l)| {
                l.in_dim == config.layer_sizes[i]
                    && l.out_dim == config.layer_sizes[i + 1]
                    && l.weights.len() == l.in_dim * l.out_dim
                    && l.biases.len() == l.out_dim
            });
        if !chained {
            return Err(NnError::InvalidConfig(
                "layer shapes do not chain with layer_sizes".into(),
            ));
        }
        Ok(Self::assemble(config, layers))
    }

    fn assemble(config: NetConfig, layers: Vec<Layer>) -> Self {
        let mut net = Self {
            layers,
            config,
            adam: AdamState::default(),
        };
        net.adam = AdamState::new(&net);
        net
    }

    /// Layer with explicit weights and biases, for hand-built networks.
    pub fn layer(
        in_dim: usize,
        out_dim: usize,
        weights: Vec<f64>,
        biases: Vec<f64>,
    ) -> Result<Layer, NnError> {
        if weights.len() != in_dim * out_dim || biases.len() != out_dim {
            return Err(NnError::InvalidConfig("layer parameter lengths".into()));
        }
        Ok(Layer {
            in_dim,
            out_dim,
            weights,
            biases,
        })
    }

    pub fn config(&self) -> &NetConfig {
        &self.config
    }

    /// Changing the dropout rate does not touch the parameters.
    pub fn set_dropout(&mut self, dropout: f64) -> Result<(), NnError> {
        let mut config = self.config.clone();
        config.dropout = dropout;
        config.validate()?;
        self.config = config;
        Ok(())
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Layer] {
        &mut self.layers
    }

    pub fn adam_state(&self) -> &AdamState {
        &self.adam
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].in_dim
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().unwrap().out_dim
    }

    /// Widths of the hidden layers, i.e. the mask lengths.
    pub fn hidden_widths(&self) -> Vec<usize> {
        self.layers[..self.layers.len() - 1]
            .iter()
            .map(|l| l.out_dim)
            .collect()
    }

    pub fn parameter_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.len() + l.biases.len())
            .sum()
    }

    /// Same ordering as [`Gradients::flatten`].
    pub fn flat_params(&self) -> Vec<f64> {
        self.layers
            .iter()
            .flat_map(|l| l.weights.iter().chain(&l.biases).copied())
            .collect()
    }

    pub fn set_flat_params(&mut self, params: &[f64]) -> Result<(), NnError> {
        if params.len() != self.parameter_count() {
            return Err(NnError::GradientShape);
        }
        let mut it = params.iter().copied();
        for l in &mut self.layers {
            for w in l.weights.iter_mut().chain(l.biases.iter_mut()) {
                *w = it.next().unwrap();
            }
        }
        Ok(())
    }

    fn check_input(&self, input: &[f64]) -> Result<(), NnError> {
        if input.len() != self.input_dim() {
            return Err(NnError::InputShape {
                expected: self.input_dim(),
                got: input.len(),
            });
        }
        Ok(())
    }

    fn check_masks(&self, masks: &[DropoutMask]) -> Result<(), NnError> {
        let widths = self.hidden_widths();
        if masks.len() != widths.len() || masks.iter().zip(&widths).any(|(m, &w)| m.len() != w) {
            return Err(NnError::MaskShape);
        }
        Ok(())
    }

    /// Draws one mask per hidden layer with keep probability `1 - d`.
    pub fn sample_masks<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<DropoutMask> {
        self.hidden_widths()
            .into_iter()
            .map(|w| DropoutMask::sample(w, self.config.dropout, rng))
            .collect()
    }

    /// Dropout-free expected pass.
    pub fn forward_deterministic(&self, input: &[f64]) -> Result<Vec<f64>, NnError> {
        self.check_input(input)?;
        let mut trace = Trace::new(self);
        Ok(self.run(input, None, &mut trace))
    }

    /// One MC-dropout sample: fresh masks on every hidden layer.
    pub fn forward_stochastic<R: Rng + ?Sized>(
        &self,
        input: &[f64],
        rng: &mut R,
    ) -> Result<Vec<f64>, NnError> {
        self.check_input(input)?;
        let mut trace = Trace::new(self);
        if self.config.dropout == 0.0 {
            return Ok(self.run(input, None, &mut trace));
        }
        let masks = self.sample_masks(rng);
        Ok(self.run(input, Some(&masks), &mut trace))
    }

    /// Forward pass under caller-supplied masks (one per hidden layer).
    pub fn forward_masked(
        &self,
        input: &[f64],
        masks: &[DropoutMask],
    ) -> Result<Vec<f64>, NnError> {
        self.check_input(input)?;
        self.check_masks(masks)?;
        let mut trace = Trace::new(self);
        Ok(self.run(input, Some(masks), &mut trace))
    }

    fn keep_scale(&self) -> f64 {
        1.0 / (1.0 - self.config.dropout)
    }

    /// Shapes must already be validated.
    fn run(&self, input: &[f64], masks: Option<&[DropoutMask]>, trace: &mut Trace) -> Vec<f64> {
        let n = self.layers.len();
        let scale = self.keep_scale();
        trace.post[0].copy_from_slice(input);
        for (li, layer) in self.layers.iter().enumerate() {
            let (pre, post) = (&mut trace.pre[li], &trace.post[li]);
            layer.affine(post, pre);
            if li + 1 < n {
                let next = &mut trace.post[li + 1];
                for (j, (h, z)) in next.iter_mut().zip(pre.iter()).enumerate() {
                    let a = z.max(0.0);
                    *h = match masks {
                        Some(m) if m[li].keep[j] => a * scale,
                        Some(_) => 0.0,
                        None => a,
                    };
                }
            }
        }
        trace.pre[n - 1].clone()
    }

    fn l2_penalty(&self) -> f64 {
        self.config.l2_weight
            * self
                .layers
                .iter()
                .map(|l| l.weights.iter().map(|w| w * w).sum::<f64>())
                .sum::<f64>()
    }

    fn check_batch(&self, batch: &[Example]) -> Result<(), NnError> {
        if batch.is_empty() {
            return Err(NnError::EmptyBatch);
        }
        for (x, y) in batch {
            self.check_input(x)?;
            if y.len() != self.output_dim() {
                return Err(NnError::TargetShape {
                    expected: self.output_dim(),
                    got: y.len(),
                });
            }
        }
        Ok(())
    }

    /// Mean squared error (over batch and output dims) plus the L2 penalty,
    /// using the deterministic pass.
    pub fn loss(&self, batch: &[Example]) -> Result<f64, NnError> {
        self.loss_masked(batch, None)
    }

    /// As [`Mlp::loss`], with one mask set per example.
    pub fn loss_masked(
        &self,
        batch: &[Example],
        masks: Option<&[Vec<DropoutMask>]>,
    ) -> Result<f64, NnError> {
        self.check_batch(batch)?;
        self.check_mask_sets(batch.len(), masks)?;
        let mut trace = Trace::new(self);
        let mut sse = 0.0;
        for (k, (x, y)) in batch.iter().enumerate() {
            let out = self.run(x, masks.map(|m| m[k].as_slice()), &mut trace);
            sse += out.iter().zip(*y).map(|(p, t)| (p - t) * (p - t)).sum::<f64>();
        }
        let mse = sse / (batch.len() * self.output_dim()) as f64;
        Ok(mse + self.l2_penalty())
    }

    fn check_mask_sets(
        &self,
        batch_len: usize,
        masks: Option<&[Vec<DropoutMask>]>,
    ) -> Result<(), NnError> {
        if let Some(m) = masks {
            if m.len() != batch_len {
                return Err(NnError::MaskShape);
            }
            for set in m {
                self.check_masks(set)?;
            }
        }
        Ok(())
    }

    /// Exact gradient of [`Mlp::loss_masked`] by backpropagation, together
    /// with the loss value itself.
    pub fn gradients(
        &self,
        batch: &[Example],
        masks: Option<&[Vec<DropoutMask>]>,
    ) -> Result<(Gradients, f64), NnError> {
        self.check_batch(batch)?;
        self.check_mask_sets(batch.len(), masks)?;
        let mut grads = Gradients::zeros_like(self);
        let mut trace = Trace::new(self);
        let n = self.layers.len();
        let scale = self.keep_scale();
        let norm = 2.0 / (batch.len() * self.output_dim()) as f64;
        let mut sse = 0.0;
        let mut delta: Vec<f64> = Vec::new();
        let mut back: Vec<f64> = Vec::new();

        for (k, (x, y)) in batch.iter().enumerate() {
            let example_masks = masks.map(|m| m[k].as_slice());
            let out = self.run(x, example_masks, &mut trace);
            delta.clear();
            for (p, t) in out.iter().zip(*y) {
                sse += (p - t) * (p - t);
                delta.push(norm * (p - t));
            }
            for li in (0..n).rev() {
                let layer = &self.layers[li];
                let g = &mut grads.layers[li];
                let input = &trace.post[li];
                for (i, &d) in delta.iter().enumerate() {
                    if d != 0.0 {
                        axpy(d, input, &mut g.weights[i * layer.in_dim..(i + 1) * layer.in_dim]);
                    }
                    g.biases[i] += d;
                }
                if li == 0 {
                    break;
                }
                back.clear();
                back.resize(layer.in_dim, 0.0);
                for (i, &d) in delta.iter().enumerate() {
                    if d != 0.0 {
                        axpy(d, &layer.weights[i * layer.in_dim..(i + 1) * layer.in_dim], &mut back);
                    }
                }
                // Through the mask and the ReLU of the previous layer.
                let pre = &trace.pre[li - 1];
                for (j, b) in back.iter_mut().enumerate() {
                    let active = pre[j] > 0.0;
                    let m = match example_masks {
                        Some(m) if m[li - 1].keep[j] => scale,
                        Some(_) => 0.0,
                        None => 1.0,
                    };
                    *b = if active { *b * m } else { 0.0 };
                }
                std::mem::swap(&mut delta, &mut back);
            }
        }

        let l2 = self.config.l2_weight;
        if l2 > 0.0 {
            for (g, l) in grads.layers.iter_mut().zip(&self.layers) {
                axpy(2.0 * l2, &l.weights, &mut g.weights);
            }
        }
        let loss = sse / (batch.len() * self.output_dim()) as f64 + self.l2_penalty();
        Ok((grads, loss))
    }

    /// Resets the optimiser moments and step counter.
    pub fn reset_optimizer(&mut self) {
        self.adam = AdamState::new(self);
    }

    /// Fresh Glorot parameters and optimiser state, same config.
    pub fn reinitialize<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        let fresh = Self::new(self.config.clone(), rng).expect("config already validated");
        *self = fresh;
    }

    /// Order-sensitive FNV-1a hash of every parameter's bit pattern.
    pub fn checksum(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for p in self.flat_params() {
            for byte in p.to_bits().to_le_bytes() {
                h ^= byte as u64;
                h = h.wrapping_mul(0x0100_0000_01b3);
            }
        }
        h
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn config(sizes: &[usize], dropout: f64) -> NetConfig {
        NetConfig {
            layer_sizes: sizes.to_vec(),
            dropout,
            ..NetConfig::default()
        }
    }

    /// 2-3-1 network with hand-set parameters.
    fn hand_net() -> Mlp {
        let l0 = Mlp::layer(
            2,
            3,
            vec![1.0, 2.0, -1.0, 0.5, 0.0, 3.0],
            vec![0.1, 0.2, -0.3],
        )
        .unwrap();
        let l1 = Mlp::layer(3, 1, vec![1.0, -2.0, 0.5], vec![0.25]).unwrap();
        Mlp::from_layers(config(&[2, 3, 1], 0.0), vec![l0, l1]).unwrap()
    }

    #[test]
    fn zero_network_outputs_zero() {
        let net = Mlp::zeros(config(&[4, 5, 3], 0.0)).unwrap();
        let out = net.forward_deterministic(&[1.0, -2.0, 3.0, 4.0]).unwrap();
        assert_eq!(out, vec![0.0; 3]);
    }

    #[test]
    fn identity_single_layer() {
        let l = Mlp::layer(3, 3, vec![1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0], vec![0.0; 3])
            .unwrap();
        let net = Mlp::from_layers(config(&[3, 3], 0.0), vec![l]).unwrap();
        let v = [0.5, -7.0, 2.25];
        assert_eq!(net.forward_deterministic(&v).unwrap(), v.to_vec());
    }

    #[test]
    fn hand_computed_two_three_one() {
        // Input [1, -1]:
        //   z0 = [1-2+0.1, -1-0.5+0.2, 0-3-0.3] = [-0.9, -1.3, -3.3]
        // Every hidden unit is inactive, so the output is the bias 0.25.
        // A second input exercises active units: [2, 1]
        //   z0 = [2+2+0.1, -2+0.5+0.2, 0+3-0.3] = [4.1, -1.3, 2.7]
        //   h  = [4.1, 0, 2.7]; y = 4.1 - 0 + 1.35 + 0.25 = 5.7
        let net = hand_net();
        assert_eq!(net.forward_deterministic(&[1.0, -1.0]).unwrap(), vec![0.25]);
        let y = net.forward_deterministic(&[2.0, 1.0]).unwrap()[0];
        assert!((y - 5.7).abs() < 1e-12, "{y}");
    }

    #[test]
    fn input_shape_error() {
        let net = hand_net();
        assert_eq!(
            net.forward_deterministic(&[1.0]),
            Err(NnError::InputShape { expected: 2, got: 1 })
        );
    }

    #[test]
    fn no_dropout_stochastic_equals_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let net = Mlp::new(config(&[3, 8, 8, 2], 0.0), &mut rng).unwrap();
        let x = [0.3, -1.2, 2.0];
        let det = net.forward_deterministic(&x).unwrap();
        for _ in 0..20 {
            assert_eq!(net.forward_stochastic(&x, &mut rng).unwrap(), det);
        }
    }

    #[test]
    fn fully_dropped_layer_gives_bias_propagation() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let net = Mlp::new(config(&[3, 6, 5, 2], 0.5), &mut rng).unwrap();
        let masks: Vec<_> = net.hidden_widths().into_iter().map(DropoutMask::all_dropped).collect();
        let out = net.forward_masked(&[1.0, 2.0, 3.0], &masks).unwrap();
        assert_eq!(out, net.layers().last().unwrap().biases().to_vec());
    }

    #[test]
    fn mask_entries_and_lengths() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let net = Mlp::new(config(&[2, 7, 3, 1], 0.3), &mut rng).unwrap();
        let masks = net.sample_masks(&mut rng);
        assert_eq!(masks.iter().map(|m| m.len()).collect::<Vec<_>>(), vec![7, 3]);
        let bad = vec![DropoutMask::all_kept(7)];
        assert_eq!(net.forward_masked(&[0.0, 0.0], &bad), Err(NnError::MaskShape));
    }

    #[test]
    fn inverted_dropout_is_unbiased_on_equal_units() {
        // Single hidden layer of identical units feeding a summing output.
        // The masked, scaled sum has mean equal to the deterministic output.
        let width = 4;
        let l0 = Mlp::layer(1, width, vec![1.0; width], vec![0.0; width]).unwrap();
        let l1 = Mlp::layer(width, 1, vec![1.0; width], vec![0.0]).unwrap();
        let net = Mlp::from_layers(config(&[1, width, 1], 0.5), vec![l0, l1]).unwrap();
        let x = [1.0];
        let target = net.forward_deterministic(&x).unwrap()[0];
        let mut rng = ChaCha8Rng::seed_from_u64(20_240_601);
        let n = 100_000;
        let samples: Vec<f64> = (0..n)
            .map(|_| net.forward_stochastic(&x, &mut rng).unwrap()[0])
            .collect();
        let mean = samples.iter().sum::<f64>() / n as f64;
        let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let se = (var / n as f64).sqrt();
        assert!((mean - target).abs() <= 3.0 * se, "mean {mean} target {target} se {se}");
    }

    #[test]
    fn loss_values() {
        let net = Mlp::zeros(config(&[1, 1], 0.0)).unwrap();
        let x = [3.0];
        assert_eq!(net.loss(&[(&x, &[0.0])]).unwrap(), 0.0);
        // Prediction 0, target -2: squared error 4.
        assert_eq!(net.loss(&[(&x, &[-2.0])]).unwrap(), 4.0);
        assert_eq!(net.loss(&[]), Err(NnError::EmptyBatch));
    }

    #[test]
    fn zero_error_zero_weights_gives_zero_gradient() {
        let net = Mlp::zeros(config(&[2, 3, 1], 0.0)).unwrap();
        let (g, loss) = net.gradients(&[(&[1.0, 2.0], &[0.0])], None).unwrap();
        assert_eq!(loss, 0.0);
        assert!(g.flatten().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn l2_gradient_is_twice_weight_times_lambda() {
        // Output layer weights act on all-zero hidden units (negative
        // pre-activations), and the output bias matches the target, so the
        // data term contributes nothing.
        let l0 = Mlp::layer(1, 2, vec![-1.0, -2.0], vec![-1.0, -1.0]).unwrap();
        let l1 = Mlp::layer(2, 1, vec![0.7, -0.4], vec![0.5]).unwrap();
        let mut cfg = config(&[1, 2, 1], 0.0);
        cfg.l2_weight = 0.01;
        let net = Mlp::from_layers(cfg, vec![l0, l1]).unwrap();
        let (g, _) = net.gradients(&[(&[1.0], &[0.5])], None).unwrap();
        for (gl, l) in g.layers.iter().zip(net.layers()) {
            for (gw, w) in gl.weights.iter().zip(l.weights()) {
                assert!((gw - 2.0 * 0.01 * w).abs() < 1e-15);
            }
            assert!(gl.biases.iter().all(|&b| b == 0.0));
        }
    }

    #[test]
    fn invalid_configs() {
        assert!(config(&[3], 0.0).validate().is_err());
        assert!(config(&[3, 0, 1], 0.0).validate().is_err());
        assert!(config(&[3, 1], 1.0).validate().is_err());
        assert!(config(&[3, 1], -0.1).validate().is_err());
    }

    #[test]
    fn dot_matches_naive() {
        let a: Vec<f64> = (0..11).map(|i| i as f64 * 0.5 - 2.0).collect();
        let b: Vec<f64> = (0..11).map(|i| (i * i) as f64 * 0.1).collect();
        let naive: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
        assert!((dot(&a, &b) - naive).abs() < 1e-12);
    }
}
