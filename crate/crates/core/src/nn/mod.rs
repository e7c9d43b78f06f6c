//! Dense-network substrate: fully connected layers, batch normalization, ReLU
//! and sigmoid activations, with exact hand-written backpropagation.
//!
//! Everything runs in `f64` and is single threaded, so identical inputs give
//! bit-identical outputs, gradients and updates.

mod adam;
mod loss;

pub use adam::{AdamConfig, AdamState};
pub use loss::{bce, bce_batch, reconstruction_loss, LossKind};

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::rng;

/// Standard deviation of the Normal initializer for linear weights.
pub const INIT_STD: f64 = 0.02;
pub const BN_MOMENTUM: f64 = 0.1;
pub const BN_EPS: f64 = 1e-5;

const SIGMOID_FLOOR: f64 = 1e-15;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LayerSpec {
    Linear { input: usize, output: usize },
    BatchNorm { dim: usize },
    Relu,
    Sigmoid,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Train,
    Eval,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Linear {
    /// `input x output`, so a forward pass is `x · weight + bias`.
    pub weight: DenseMatrix,
    pub bias: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BatchNorm {
    pub gamma: Vec<f64>,
    pub beta: Vec<f64>,
    pub running_mean: Vec<f64>,
    pub running_var: Vec<f64>,
    pub momentum: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Layer {
    Linear(Linear),
    BatchNorm(BatchNorm),
    Relu,
    Sigmoid,
}

impl Layer {
    pub fn spec(&self) -> LayerSpec {
        match self {
            Layer::Linear(l) => LayerSpec::Linear {
                input: l.weight.rows(),
                output: l.weight.cols(),
            },
            Layer::BatchNorm(b) => LayerSpec::BatchNorm { dim: b.gamma.len() },
            Layer::Relu => LayerSpec::Relu,
            Layer::Sigmoid => LayerSpec::Sigmoid,
        }
    }
}

/// Serialized form of one layer's state, parallel to its [`LayerSpec`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LayerWeights {
    Linear {
        weight: Vec<Vec<f64>>,
        bias: Vec<f64>,
    },
    BatchNorm {
        gamma: Vec<f64>,
        beta: Vec<f64>,
        running_mean: Vec<f64>,
        running_var: Vec<f64>,
        momentum: f64,
    },
    None,
}

/// An ordered stack of layers together with all trainable parameters and
/// batch-normalization running statistics.
#[derive(Clone, Debug, PartialEq)]
pub struct Network {
    layers: Vec<Layer>,
}

/// Checks that a layer stack is dimensionally consistent and returns
/// `(input_dim, output_dim)`.
pub fn validate_specs(specs: &[LayerSpec]) -> Result<(usize, usize)> {
    let mut width: Option<usize> = None;
    let mut input = None;
    for (i, spec) in specs.iter().enumerate() {
        match *spec {
            LayerSpec::Linear { input: d_in, output } => {
                if d_in == 0 || output == 0 {
                    return Err(Error::Architecture(format!("layer {i}: zero-width linear layer")));
                }
                if let Some(w) = width {
                    if w != d_in {
                        return Err(Error::Architecture(format!(
                            "layer {i}: linear expects {d_in} inputs but receives {w}"
                        )));
                    }
                }
                input.get_or_insert(d_in);
                width = Some(output);
            }
            LayerSpec::BatchNorm { dim } => {
                if dim == 0 {
                    return Err(Error::Architecture(format!("layer {i}: zero-width batch norm")));
                }
                if let Some(w) = width {
                    if w != dim {
                        return Err(Error::Architecture(format!(
                            "layer {i}: batch norm over {dim} features but receives {w}"
                        )));
                    }
                }
                input.get_or_insert(dim);
                width = Some(dim);
            }
            LayerSpec::Relu => {
                if width.is_none() {
                    return Err(Error::Architecture(format!(
                        "layer {i}: activation before any sized layer"
                    )));
                }
            }
            LayerSpec::Sigmoid => {
                if width.is_none() {
                    return Err(Error::Architecture(format!(
                        "layer {i}: activation before any sized layer"
                    )));
                }
                if i + 1 != specs.len() {
                    return Err(Error::Architecture(format!(
                        "layer {i}: sigmoid is only allowed as the final layer"
                    )));
                }
            }
        }
    }
    match (input, width) {
        (Some(i), Some(o)) => Ok((i, o)),
        _ => Err(Error::Architecture("empty layer stack".into())),
    }
}

/// Builds a network with Normal(0, 0.02) linear weights, zero biases and
/// identity batch norms, drawing from the `init` stream of `seed`.
pub fn init_network(specs: &[LayerSpec], seed: u64) -> Result<Network> {
    let mut rng = rng::stream(seed, "init");
    init_network_with(specs, &mut rng)
}

pub fn init_network_with<R: Rng>(specs: &[LayerSpec], rng: &mut R) -> Result<Network> {
    validate_specs(specs)?;
    let normal = Normal::new(0.0, INIT_STD).expect("valid normal");
    let layers = specs
        .iter()
        .map(|spec| match *spec {
            LayerSpec::Linear { input, output } => {
                let data = (0..input * output).map(|_| normal.sample(rng)).collect();
                Layer::Linear(Linear {
                    weight: DenseMatrix::from_vec(input, output, data).expect("sized"),
                    bias: vec![0.0; output],
                })
            }
            LayerSpec::BatchNorm { dim } => Layer::BatchNorm(BatchNorm {
                gamma: vec![1.0; dim],
                beta: vec![0.0; dim],
                running_mean: vec![0.0; dim],
                running_var: vec![1.0; dim],
                momentum: BN_MOMENTUM,
            }),
            LayerSpec::Relu => Layer::Relu,
            LayerSpec::Sigmoid => Layer::Sigmoid,
        })
        .collect();
    Ok(Network { layers })
}

/// Per-layer record of what a train-mode forward pass saw.
#[derive(Clone, Debug)]
pub enum LayerCache {
    Linear {
        input: DenseMatrix,
    },
    BatchNorm {
        normalized: DenseMatrix,
        inv_std: Vec<f64>,
        batch_mean: Vec<f64>,
        batch_var: Vec<f64>,
    },
    Relu {
        input: DenseMatrix,
    },
    Sigmoid {
        output: DenseMatrix,
    },
}

#[derive(Clone, Debug)]
pub struct ForwardCache {
    layers: Vec<LayerCache>,
    batch_rows: usize,
}

impl ForwardCache {
    pub fn batch_rows(&self) -> usize {
        self.batch_rows
    }

    pub fn layers(&self) -> &[LayerCache] {
        &self.layers
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum LayerGrad {
    Linear { weight: DenseMatrix, bias: Vec<f64> },
    BatchNorm { gamma: Vec<f64>, beta: Vec<f64> },
    None,
}

/// Gradients for every trainable parameter and for the network input.
#[derive(Clone, Debug, PartialEq)]
pub struct Gradients {
    pub layers: Vec<LayerGrad>,
    pub input: DenseMatrix,
}

impl Gradients {
    /// Adds `other` element-wise; used when one loss feeds several passes
    /// through the same network.
    pub fn accumulate(&mut self, other: &Gradients) -> Result<()> {
        if self.layers.len() != other.layers.len() {
            return Err(Error::Shape("gradient records have different depths".into()));
        }
        for (a, b) in self.layers.iter_mut().zip(&other.layers) {
            match (a, b) {
                (LayerGrad::Linear { weight, bias }, LayerGrad::Linear { weight: w2, bias: b2 }) => {
                    weight.add_assign(w2)?;
                    add_into(bias, b2)?;
                }
                (LayerGrad::BatchNorm { gamma, beta }, LayerGrad::BatchNorm { gamma: g2, beta: b2 }) => {
                    add_into(gamma, g2)?;
                    add_into(beta, b2)?;
                }
                (LayerGrad::None, LayerGrad::None) => {}
                _ => return Err(Error::Shape("gradient records have different layer kinds".into())),
            }
        }
        self.input.add_assign(&other.input)
    }

    /// Parameter gradients flattened in the same order as
    /// [`Network::params_mut`].
    pub fn param_slices(&self) -> Vec<&[f64]> {
        let mut out = Vec::new();
        for g in &self.layers {
            match g {
                LayerGrad::Linear { weight, bias } => {
                    out.push(weight.as_slice());
                    out.push(bias.as_slice());
                }
                LayerGrad::BatchNorm { gamma, beta } => {
                    out.push(gamma.as_slice());
                    out.push(beta.as_slice());
                }
                LayerGrad::None => {}
            }
        }
        out
    }
}

impl Network {
    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Layer] {
        &mut self.layers
    }

    pub fn specs(&self) -> Vec<LayerSpec> {
        self.layers.iter().map(Layer::spec).collect()
    }

    pub fn input_dim(&self) -> usize {
        validate_specs(&self.specs()).map(|d| d.0).unwrap_or(0)
    }

    pub fn output_dim(&self) -> usize {
        validate_specs(&self.specs()).map(|d| d.1).unwrap_or(0)
    }

    pub fn param_count(&self) -> usize {
        self.params().iter().map(|p| p.len()).sum()
    }

    /// Trainable parameters in a fixed order: weight, bias per linear layer and
    /// gamma, beta per batch norm.
    pub fn params(&self) -> Vec<&[f64]> {
        let mut out = Vec::new();
        for layer in &self.layers {
            match layer {
                Layer::Linear(l) => {
                    out.push(l.weight.as_slice());
                    out.push(l.bias.as_slice());
                }
                Layer::BatchNorm(b) => {
                    out.push(b.gamma.as_slice());
                    out.push(b.beta.as_slice());
                }
                Layer::Relu | Layer::Sigmoid => {}
            }
        }
        out
    }

    pub fn params_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out = Vec::new();
        for layer in &mut self.layers {
            match layer {
                Layer::Linear(l) => {
                    out.push(l.weight.as_mut_slice());
                    out.push(l.bias.as_mut_slice());
                }
                Layer::BatchNorm(b) => {
                    out.push(b.gamma.as_mut_slice());
                    out.push(b.beta.as_mut_slice());
                }
                Layer::Relu | Layer::Sigmoid => {}
            }
        }
        out
    }

    pub fn forward(&mut self, batch: &DenseMatrix, mode: Mode) -> Result<(DenseMatrix, Option<ForwardCache>)> {
        match mode {
            Mode::Train => {
                let (out, cache) = self.forward_cached(batch)?;
                self.commit_batch_stats(&cache)?;
                Ok((out, Some(cache)))
            }
            Mode::Eval => Ok((self.predict(batch)?, None)),
        }
    }

    /// Train-mode forward pass (batch statistics in every batch norm) that
    /// leaves the running statistics untouched. Pair with
    /// [`Network::commit_batch_stats`] to get the full train-mode behaviour.
    pub fn forward_cached(&self, batch: &DenseMatrix) -> Result<(DenseMatrix, ForwardCache)> {
        self.check_input(batch)?;
        let has_bn = self.layers.iter().any(|l| matches!(l, Layer::BatchNorm(_)));
        if has_bn && batch.rows() < 2 {
            return Err(Error::BatchTooSmall { rows: batch.rows() });
        }
        let mut caches = Vec::with_capacity(self.layers.len());
        let mut x = batch.clone();
        for layer in &self.layers {
            x = match layer {
                Layer::Linear(l) => {
                    let out = linear_forward(l, &x)?;
                    caches.push(LayerCache::Linear { input: x });
                    out
                }
                Layer::BatchNorm(b) => {
                    let n = x.rows() as f64;
                    let mean = x.column_means();
                    let mut var = vec![0.0; x.cols()];
                    for row in x.row_iter() {
                        for ((v, &xi), &m) in var.iter_mut().zip(row).zip(&mean) {
                            *v += (xi - m) * (xi - m);
                        }
                    }
                    var.iter_mut().for_each(|v| *v /= n);
                    let inv_std: Vec<f64> = var.iter().map(|v| 1.0 / (v + BN_EPS).sqrt()).collect();
                    let mut normalized = x.clone();
                    let mut out = x;
                    for r in 0..normalized.rows() {
                        let nrow = normalized.row_mut(r);
                        for (j, v) in nrow.iter_mut().enumerate() {
                            *v = (*v - mean[j]) * inv_std[j];
                        }
                        let orow = out.row_mut(r);
                        for (j, v) in orow.iter_mut().enumerate() {
                            *v = b.gamma[j] * normalized.get(r, j) + b.beta[j];
                        }
                    }
                    caches.push(LayerCache::BatchNorm {
                        normalized,
                        inv_std,
                        batch_mean: mean,
                        batch_var: var,
                    });
                    out
                }
                Layer::Relu => {
                    let out = x.map(|v| v.max(0.0));
                    caches.push(LayerCache::Relu { input: x });
                    out
                }
                Layer::Sigmoid => {
                    let out = x.map(sigmoid);
                    caches.push(LayerCache::Sigmoid { output: out.clone() });
                    out
                }
            };
        }
        if !x.is_finite() {
            return Err(Error::NonFinite("forward pass"));
        }
        Ok((
            x,
            ForwardCache {
                layers: caches,
                batch_rows: batch.rows(),
            },
        ))
    }

    /// Folds the batch statistics recorded in `cache` into the running
    /// statistics (momentum update, unbiased variance).
    pub fn commit_batch_stats(&mut self, cache: &ForwardCache) -> Result<()> {
        self.check_cache(cache)?;
        let n = cache.batch_rows as f64;
        let unbias = if n > 1.0 { n / (n - 1.0) } else { 1.0 };
        for (layer, lc) in self.layers.iter_mut().zip(&cache.layers) {
            if let (Layer::BatchNorm(b), LayerCache::BatchNorm { batch_mean, batch_var, .. }) = (layer, lc) {
                let m = b.momentum;
                for j in 0..b.gamma.len() {
                    b.running_mean[j] = (1.0 - m) * b.running_mean[j] + m * batch_mean[j];
                    b.running_var[j] = (1.0 - m) * b.running_var[j] + m * batch_var[j] * unbias;
                }
            }
        }
        Ok(())
    }

    /// Eval-mode forward pass using running statistics. Pure.
    pub fn predict(&self, batch: &DenseMatrix) -> Result<DenseMatrix> {
        self.check_input(batch)?;
        let mut x = batch.clone();
        for layer in &self.layers {
            x = match layer {
                Layer::Linear(l) => linear_forward(l, &x)?,
                Layer::BatchNorm(b) => {
                    let scale: Vec<f64> = b
                        .running_var
                        .iter()
                        .zip(&b.gamma)
                        .map(|(v, g)| g / (v + BN_EPS).sqrt())
                        .collect();
                    let mut out = x;
                    for r in 0..out.rows() {
                        for (j, v) in out.row_mut(r).iter_mut().enumerate() {
                            *v = (*v - b.running_mean[j]) * scale[j] + b.beta[j];
                        }
                    }
                    out
                }
                Layer::Relu => x.map(|v| v.max(0.0)),
                Layer::Sigmoid => x.map(sigmoid),
            };
        }
        if !x.is_finite() {
            return Err(Error::NonFinite("forward pass"));
        }
        Ok(x)
    }

    /// Backpropagates `output_grad` (dLoss/dOutput) through the pass recorded
    /// in `cache`.
    pub fn backward(&self, cache: &ForwardCache, output_grad: &DenseMatrix) -> Result<Gradients> {
        self.check_cache(cache)?;
        let out_dim = self.output_dim();
        if output_grad.shape() != (cache.batch_rows, out_dim) {
            return Err(Error::Shape(format!(
                "output gradient is {}x{}, expected {}x{}",
                output_grad.rows(),
                output_grad.cols(),
                cache.batch_rows,
                out_dim
            )));
        }
        let mut grads = Vec::with_capacity(self.layers.len());
        let mut g = output_grad.clone();
        for (layer, lc) in self.layers.iter().zip(&cache.layers).rev() {
            match (layer, lc) {
                (Layer::Linear(l), LayerCache::Linear { input }) => {
                    let dw = input.t_matmul(&g)?;
                    let mut db = vec![0.0; g.cols()];
                    for row in g.row_iter() {
                        for (d, v) in db.iter_mut().zip(row) {
                            *d += v;
                        }
                    }
                    g = g.matmul_t(&l.weight)?;
                    grads.push(LayerGrad::Linear { weight: dw, bias: db });
                }
                (
                    Layer::BatchNorm(b),
                    LayerCache::BatchNorm {
                        normalized, inv_std, ..
                    },
                ) => {
                    let n = g.rows() as f64;
                    let d = g.cols();
                    let mut dgamma = vec![0.0; d];
                    let mut dbeta = vec![0.0; d];
                    for (grow, nrow) in g.row_iter().zip(normalized.row_iter()) {
                        for j in 0..d {
                            dgamma[j] += grow[j] * nrow[j];
                            dbeta[j] += grow[j];
                        }
                    }
                    // with dxhat = g * gamma:
                    // dx = inv_std / n * (n * dxhat - sum(dxhat) - xhat * sum(dxhat * xhat))
                    let sum_dxhat: Vec<f64> = (0..d).map(|j| dbeta[j] * b.gamma[j]).collect();
                    let sum_dxhat_xhat: Vec<f64> = (0..d).map(|j| dgamma[j] * b.gamma[j]).collect();
                    let mut dx = DenseMatrix::zeros(g.rows(), d);
                    for r in 0..g.rows() {
                        let grow = g.row(r);
                        let nrow = normalized.row(r);
                        let out = dx.row_mut(r);
                        for j in 0..d {
                            let dxhat = grow[j] * b.gamma[j];
                            out[j] = inv_std[j] / n * (n * dxhat - sum_dxhat[j] - nrow[j] * sum_dxhat_xhat[j]);
                        }
                    }
                    g = dx;
                    grads.push(LayerGrad::BatchNorm {
                        gamma: dgamma,
                        beta: dbeta,
                    });
                }
                (Layer::Relu, LayerCache::Relu { input }) => {
                    for (gv, &x) in g.as_mut_slice().iter_mut().zip(input.as_slice()) {
                        if x <= 0.0 {
                            *gv = 0.0;
                        }
                    }
                    grads.push(LayerGrad::None);
                }
                (Layer::Sigmoid, LayerCache::Sigmoid { output }) => {
                    for (gv, &y) in g.as_mut_slice().iter_mut().zip(output.as_slice()) {
                        *gv *= y * (1.0 - y);
                    }
                    grads.push(LayerGrad::None);
                }
                _ => unreachable!("check_cache verified layer kinds"),
            }
        }
        grads.reverse();
        if !g.is_finite() || grads.iter().any(|lg| !layer_grad_finite(lg)) {
            return Err(Error::NonFinite("backward pass"));
        }
        Ok(Gradients { layers: grads, input: g })
    }

    pub fn to_weights(&self) -> Vec<LayerWeights> {
        self.layers
            .iter()
            .map(|layer| match layer {
                Layer::Linear(l) => LayerWeights::Linear {
                    weight: l.weight.row_iter().map(<[f64]>::to_vec).collect(),
                    bias: l.bias.clone(),
                },
                Layer::BatchNorm(b) => LayerWeights::BatchNorm {
                    gamma: b.gamma.clone(),
                    beta: b.beta.clone(),
                    running_mean: b.running_mean.clone(),
                    running_var: b.running_var.clone(),
                    momentum: b.momentum,
                },
                Layer::Relu | Layer::Sigmoid => LayerWeights::None,
            })
            .collect()
    }

    /// Rebuilds a network from a spec list and its parallel weight records,
    /// validating every shape.
    pub fn from_parts(specs: &[LayerSpec], weights: &[LayerWeights]) -> Result<Network> {
        validate_specs(specs)?;
        if specs.len() != weights.len() {
            return Err(Error::Architecture(format!(
                "{} layer specs but {} weight records",
                specs.len(),
                weights.len()
            )));
        }
        let mut layers = Vec::with_capacity(specs.len());
        for (i, (spec, w)) in specs.iter().zip(weights).enumerate() {
            let bad = |what: &str| Error::Architecture(format!("layer {i}: {what}"));
            let layer = match (*spec, w) {
                (LayerSpec::Linear { input, output }, LayerWeights::Linear { weight, bias }) => {
                    if weight.len() != input || weight.iter().any(|r| r.len() != output) || bias.len() != output {
                        return Err(bad("linear weight shape does not match spec"));
                    }
                    if bias.iter().any(|v| !v.is_finite()) {
                        return Err(bad("non-finite bias"));
                    }
                    Layer::Linear(Linear {
                        weight: DenseMatrix::from_rows(weight)?,
                        bias: bias.clone(),
                    })
                }
                (
                    LayerSpec::BatchNorm { dim },
                    LayerWeights::BatchNorm {
                        gamma,
                        beta,
                        running_mean,
                        running_var,
                        momentum,
                    },
                ) => {
                    if [gamma, beta, running_mean, running_var].iter().any(|v| v.len() != dim) {
                        return Err(bad("batch norm vector length does not match spec"));
                    }
                    if running_var.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
                        return Err(bad("running variance must be positive"));
                    }
                    if !(0.0..=1.0).contains(momentum) {
                        return Err(bad("momentum outside [0, 1]"));
                    }
                    Layer::BatchNorm(BatchNorm {
                        gamma: gamma.clone(),
                        beta: beta.clone(),
                        running_mean: running_mean.clone(),
                        running_var: running_var.clone(),
                        momentum: *momentum,
                    })
                }
                (LayerSpec::Relu, LayerWeights::None) => Layer::Relu,
                (LayerSpec::Sigmoid, LayerWeights::None) => Layer::Sigmoid,
                _ => return Err(bad("weight record kind does not match spec")),
            };
            layers.push(layer);
        }
        Ok(Network { layers })
    }

    fn check_input(&self, batch: &DenseMatrix) -> Result<()> {
        let dim = self.input_dim();
        if batch.cols() != dim {
            return Err(Error::Shape(format!(
                "batch has {} columns, network expects {dim}",
                batch.cols()
            )));
        }
        if !batch.is_finite() {
            return Err(Error::NonFinite("network input"));
        }
        Ok(())
    }

    fn check_cache(&self, cache: &ForwardCache) -> Result<()> {
        if cache.layers.len() != self.layers.len() {
            return Err(Error::CacheMismatch(format!(
                "cache has {} layers, network has {}",
                cache.layers.len(),
                self.layers.len()
            )));
        }
        for (i, (layer, lc)) in self.layers.iter().zip(&cache.layers).enumerate() {
            let ok = match (layer, lc) {
                (Layer::Linear(l), LayerCache::Linear { input }) => input.cols() == l.weight.rows(),
                (Layer::BatchNorm(b), LayerCache::BatchNorm { normalized, .. }) => normalized.cols() == b.gamma.len(),
                (Layer::Relu, LayerCache::Relu { .. }) | (Layer::Sigmoid, LayerCache::Sigmoid { .. }) => true,
                _ => false,
            };
            if !ok {
                return Err(Error::CacheMismatch(format!("layer {i} differs")));
            }
        }
        Ok(())
    }
}

fn add_into(a: &mut [f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::Shape(format!("{} vs {} gradient entries", a.len(), b.len())));
    }
    a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
    Ok(())
}

fn layer_grad_finite(g: &LayerGrad) -> bool {
    match g {
        LayerGrad::Linear { weight, bias } => weight.is_finite() && bias.iter().all(|v| v.is_finite()),
        LayerGrad::BatchNorm { gamma, beta } => gamma.iter().chain(beta).all(|v| v.is_finite()),
        LayerGrad::None => true,
    }
}

fn linear_forward(l: &Linear, x: &DenseMatrix) -> Result<DenseMatrix> {
    let mut out = x.matmul(&l.weight)?;
    for r in 0..out.rows() {
        for (v, b) in out.row_mut(r).iter_mut().zip(&l.bias) {
            *v += b;
        }
    }
    Ok(out)
}

/// Logistic function, kept strictly inside (0, 1).
pub fn sigmoid(z: f64) -> f64 {
    let y = if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    };
    y.clamp(SIGMOID_FLOOR, 1.0 - SIGMOID_FLOOR)
}
