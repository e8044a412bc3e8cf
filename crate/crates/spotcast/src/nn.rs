//! From-scratch feed-forward classifier: ReLU hidden layers, softmax
//! output, cross-entropy loss, Adam optimizer.

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum NnError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimMismatch { expected: usize, got: usize },
    #[error("degenerate dataset: fewer than two classes present")]
    DegenerateDataset,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig { learning_rate: 1e-3, beta1: 0.9, beta2: 0.999, epsilon: 1e-8 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub max_epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub adam: AdamConfig,
    /// Stop after this many consecutive epochs with loss improvement
    /// below `min_improvement`.
    pub patience: usize,
    pub min_improvement: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            max_epochs: 300,
            batch_size: 32,
            seed: 7,
            adam: AdamConfig::default(),
            patience: 10,
            min_improvement: 1e-6,
        }
    }
}

/// One dense layer, row-major weights of shape `(out, in)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
    pub fan_in: usize,
    pub fan_out: usize,
}

/// Feed-forward classifier with ReLU hidden layers and softmax output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    pub version: u32,
    pub layers: Vec<Layer>,
    pub input_dim: usize,
    pub n_classes: usize,
    /// Output index -> class label.
    pub label_map: Vec<String>,
}

/// He-uniform initialization for the given architecture; deterministic
/// per seed.
pub fn init_model(input_dim: usize, hidden_sizes: &[usize], n_classes: usize, seed: u64) -> MlpModel {
    assert!(input_dim >= 1 && n_classes >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut dims = vec![input_dim];
    dims.extend_from_slice(hidden_sizes);
    dims.push(n_classes);
    let layers = dims
        .windows(2)
        .map(|w| {
            let (fan_in, fan_out) = (w[0], w[1]);
            let bound = (6.0 / fan_in as f64).sqrt();
            Layer {
                weights: (0..fan_in * fan_out).map(|_| rng.gen_range(-bound..bound)).collect(),
                biases: vec![0.0; fan_out],
                fan_in,
                fan_out,
            }
        })
        .collect();
    MlpModel { version: 1, layers, input_dim, n_classes, label_map: Vec::new() }
}

fn affine(layer: &Layer, x: &[f64]) -> Vec<f64> {
    let mut out = layer.biases.clone();
    for (o, out_v) in out.iter_mut().enumerate() {
        let row = &layer.weights[o * layer.fan_in..(o + 1) * layer.fan_in];
        *out_v += row.iter().zip(x).map(|(w, xi)| w * xi).sum::<f64>();
    }
    out
}

fn softmax(logits: &[f64]) -> Vec<f64> {
    // log-sum-exp stabilization
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&l| (l - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

struct ForwardTrace {
    // activations per layer, starting with the input
    activations: Vec<Vec<f64>>,
    probs: Vec<f64>,
}

fn forward_trace(model: &MlpModel, x: &[f64]) -> ForwardTrace {
    let mut activations = vec![x.to_vec()];
    let n_layers = model.layers.len();
    for (i, layer) in model.layers.iter().enumerate() {
        let mut z = affine(layer, activations.last().unwrap());
        if i + 1 < n_layers {
            for v in &mut z {
                *v = v.max(0.0);
            }
        }
        activations.push(z);
    }
    let probs = softmax(activations.last().unwrap());
    ForwardTrace { activations, probs }
}

/// Class probabilities for one input.
pub fn forward(model: &MlpModel, x: &[f64]) -> Result<Vec<f64>, NnError> {
    if x.len() != model.input_dim {
        return Err(NnError::DimMismatch { expected: model.input_dim, got: x.len() });
    }
    Ok(forward_trace(model, x).probs)
}

/// Argmax class and its probability; ties break to the lowest index.
pub fn predict_top(model: &MlpModel, x: &[f64]) -> Result<(usize, f64), NnError> {
    let probs = forward(model, x)?;
    let (idx, &p) = probs
        .iter()
        .enumerate()
        .max_by(|(ia, a), (ib, b)| a.partial_cmp(b).unwrap().then(ib.cmp(ia)))
        .expect("at least one class");
    Ok((idx, p))
}

/// Classes ranked by descending probability, ties by ascending index.
pub fn rank_classes(model: &MlpModel, x: &[f64]) -> Result<Vec<usize>, NnError> {
    let probs = forward(model, x)?;
    let mut order: Vec<usize> = (0..probs.len()).collect();
    order.sort_by(|&a, &b| probs[b].partial_cmp(&probs[a]).unwrap().then(a.cmp(&b)));
    Ok(order)
}

// gradients of mean cross-entropy over a batch, flattened per layer as
// (weight grads, bias grads)
fn batch_gradients(
    model: &MlpModel,
    batch: &[(&[f64], usize)],
) -> (Vec<(Vec<f64>, Vec<f64>)>, f64) {
    let mut grads: Vec<(Vec<f64>, Vec<f64>)> = model
        .layers
        .iter()
        .map(|l| (vec![0.0; l.weights.len()], vec![0.0; l.biases.len()]))
        .collect();
    let mut loss = 0.0;
    let scale = 1.0 / batch.len() as f64;
    for &(x, y) in batch {
        let trace = forward_trace(model, x);
        loss += -trace.probs[y].max(1e-300).ln() * scale;
        // delta at the output: (p - onehot(y)) / batch
        let mut delta: Vec<f64> = trace
            .probs
            .iter()
            .enumerate()
            .map(|(i, &p)| (p - f64::from(i == y)) * scale)
            .collect();
        for (li, layer) in model.layers.iter().enumerate().rev() {
            let input = &trace.activations[li];
            let (gw, gb) = &mut grads[li];
            for o in 0..layer.fan_out {
                let d = delta[o];
                gb[o] += d;
                let row = &mut gw[o * layer.fan_in..(o + 1) * layer.fan_in];
                for (r, &xi) in row.iter_mut().zip(input.iter()) {
                    *r += d * xi;
                }
            }
            if li > 0 {
                let mut prev = vec![0.0; layer.fan_in];
                for o in 0..layer.fan_out {
                    let d = delta[o];
                    let row = &layer.weights[o * layer.fan_in..(o + 1) * layer.fan_in];
                    for (p, &w) in prev.iter_mut().zip(row.iter()) {
                        *p += d * w;
                    }
                }
                // ReLU gate on the pre-activation (== activation sign)
                for (p, &a) in prev.iter_mut().zip(trace.activations[li].iter()) {
                    if a <= 0.0 {
                        *p = 0.0;
                    }
                }
                delta = prev;
            }
        }
    }
    (grads, loss)
}

struct AdamState {
    m: Vec<(Vec<f64>, Vec<f64>)>,
    v: Vec<(Vec<f64>, Vec<f64>)>,
    t: u64,
}

impl AdamState {
    fn new(model: &MlpModel) -> Self {
        let zeros: Vec<(Vec<f64>, Vec<f64>)> = model
            .layers
            .iter()
            .map(|l| (vec![0.0; l.weights.len()], vec![0.0; l.biases.len()]))
            .collect();
        AdamState { m: zeros.clone(), v: zeros, t: 0 }
    }

    fn step(&mut self, model: &mut MlpModel, grads: &[(Vec<f64>, Vec<f64>)], cfg: &AdamConfig) {
        self.t += 1;
        let t = self.t as f64;
        let bc1 = 1.0 - cfg.beta1.powf(t);
        let bc2 = 1.0 - cfg.beta2.powf(t);
        for (li, layer) in model.layers.iter_mut().enumerate() {
            let apply = |p: &mut [f64], g: &[f64], m: &mut [f64], v: &mut [f64]| {
                for i in 0..p.len() {
                    m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
                    v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
                    let mh = m[i] / bc1;
                    let vh = v[i] / bc2;
                    p[i] -= cfg.learning_rate * mh / (vh.sqrt() + cfg.epsilon);
                }
            };
            apply(&mut layer.weights, &grads[li].0, &mut self.m[li].0, &mut self.v[li].0);
            apply(&mut layer.biases, &grads[li].1, &mut self.m[li].1, &mut self.v[li].1);
        }
    }
}

/// Mini-batch Adam on mean cross-entropy. Returns the per-epoch loss
/// history; stops early when the loss improvement stays below
/// `min_improvement` for `patience` consecutive epochs.
pub fn train(
    model: &mut MlpModel,
    dataset: &[(Vec<f64>, usize)],
    cfg: &TrainConfig,
) -> Result<Vec<f64>, NnError> {
    let classes: std::collections::BTreeSet<usize> = dataset.iter().map(|(_, y)| *y).collect();
    if classes.len() < 2 {
        return Err(NnError::DegenerateDataset);
    }
    for (x, y) in dataset {
        if x.len() != model.input_dim {
            return Err(NnError::DimMismatch { expected: model.input_dim, got: x.len() });
        }
        assert!(*y < model.n_classes, "label out of range");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut adam = AdamState::new(model);
    let mut history = Vec::new();
    let mut stall = 0usize;
    let mut order: Vec<usize> = (0..dataset.len()).collect();
    for _epoch in 0..cfg.max_epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        let mut batches = 0usize;
        for chunk in order.chunks(cfg.batch_size.max(1)) {
            let batch: Vec<(&[f64], usize)> =
                chunk.iter().map(|&i| (dataset[i].0.as_slice(), dataset[i].1)).collect();
            let (grads, loss) = batch_gradients(model, &batch);
            adam.step(model, &grads, &cfg.adam);
            epoch_loss += loss;
            batches += 1;
        }
        let loss = epoch_loss / batches as f64;
        let improved = history
            .last()
            .map_or(true, |&prev: &f64| prev - loss >= cfg.min_improvement);
        history.push(loss);
        stall = if improved { 0 } else { stall + 1 };
        if stall >= cfg.patience {
            break;
        }
    }
    Ok(history)
}

/// Compare analytic gradients against central finite differences on one
/// sample; returns the maximum relative error over all parameters.
pub fn gradient_check(model: &MlpModel, x: &[f64], y: usize, epsilon: f64) -> f64 {
    assert!(epsilon > 0.0);
    let (grads, _) = batch_gradients(model, &[(x, y)]);
    let loss_of = |m: &MlpModel| -> f64 {
        -forward_trace(m, x).probs[y].max(1e-300).ln()
    };
    let mut max_rel = 0.0f64;
    for li in 0..model.layers.len() {
        for (is_weight, len) in [(true, model.layers[li].weights.len()), (false, model.layers[li].biases.len())] {
            for i in 0..len {
                let mut plus = model.clone();
                let mut minus = model.clone();
                {
                    let (p, m) = (&mut plus.layers[li], &mut minus.layers[li]);
                    if is_weight {
                        p.weights[i] += epsilon;
                        m.weights[i] -= epsilon;
                    } else {
                        p.biases[i] += epsilon;
                        m.biases[i] -= epsilon;
                    }
                }
                let numeric = (loss_of(&plus) - loss_of(&minus)) / (2.0 * epsilon);
                let analytic = if is_weight { grads[li].0[i] } else { grads[li].1[i] };
                let denom = analytic.abs().max(numeric.abs()).max(1e-8);
                max_rel = max_rel.max((analytic - numeric).abs() / denom);
            }
        }
    }
    max_rel
}

/// Fixture generator: `n` points around 3 separated centroids in
/// `dim`-dimensional space, seeded.
pub fn blob_dataset(n: usize, dim: usize, seed: u64) -> Vec<(Vec<f64>, usize)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centers = Vec::new();
    for c in 0..3 {
        let center: Vec<f64> = (0..dim).map(|d| if d % 3 == c { 3.0 } else { 0.0 }).collect();
        centers.push(center);
    }
    (0..n)
        .map(|i| {
            let c = i % 3;
            let x: Vec<f64> = centers[c]
                .iter()
                .map(|&m| m + rng.gen_range(-0.5..0.5))
                .collect();
            (x, c)
        })
        .collect()
}
