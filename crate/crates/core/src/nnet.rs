//! Input-dimension-preserving reconstruction networks trained on minority
//! samples, and reconstruction-distance scoring.
//!
//! The trainer is deliberately plain: mini-batch gradient descent at a fixed
//! learning rate, MSE loss, no regularization and no validation split --
//! overfitting the minority set is the point. Inputs are expected in [0, 1];
//! internally the network operates on centered coordinates (x - 1/2), which
//! keeps the tanh layers in their near-linear range.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const INPUT_CENTER: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NetworkKind {
    Feedforward,
    Autoencoder,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Tanh,
    Relu,
}

impl Activation {
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Tanh => z.tanh(),
            Activation::Relu => z.max(0.0),
        }
    }

    fn derivative(self, z: f64) -> f64 {
        match self {
            Activation::Tanh => {
                let t = z.tanh();
                1.0 - t * t
            }
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

/// Layer widths plus the architecture family. First and last sizes are the
/// input dimension; an autoencoder must have a strictly smaller interior
/// layer than its input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetworkSpec {
    pub layer_sizes: Vec<usize>,
    pub kind: NetworkKind,
    pub hidden_activation: Activation,
}

impl NetworkSpec {
    pub fn new(
        layer_sizes: Vec<usize>,
        kind: NetworkKind,
        hidden_activation: Activation,
    ) -> Result<NetworkSpec> {
        if layer_sizes.len() < 2 {
            return Err(Error::ConfigError("network needs at least two layers".into()));
        }
        if layer_sizes.iter().any(|&s| s == 0) {
            return Err(Error::ConfigError("layer sizes must be positive".into()));
        }
        let first = layer_sizes[0];
        let last = *layer_sizes.last().unwrap();
        if first != last {
            return Err(Error::ConfigError(format!(
                "reconstruction network must preserve dimension, got {first} -> {last}"
            )));
        }
        if kind == NetworkKind::Autoencoder {
            let interior_min = layer_sizes[1..layer_sizes.len() - 1]
                .iter()
                .copied()
                .min()
                .unwrap_or(first);
            if interior_min >= first {
                return Err(Error::ConfigError(
                    "autoencoder needs a bottleneck smaller than the input".into(),
                ));
            }
        }
        Ok(NetworkSpec {
            layer_sizes,
            kind,
            hidden_activation,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.layer_sizes[0]
    }
}

/// Architecture rule: more than `threshold` attributes gets an autoencoder
/// with interior sizes [ceil(0.75 m), ceil(0.5 m), ceil(0.75 m)], anything
/// else a feedforward net with two hidden layers of five units.
pub fn choose_architecture(m: usize, threshold: usize) -> NetworkSpec {
    if m > threshold {
        let h = (3 * m).div_ceil(4);
        let mid = m.div_ceil(2);
        NetworkSpec::new(
            vec![m, h, mid, h, m],
            NetworkKind::Autoencoder,
            Activation::Tanh,
        )
        .expect("autoencoder sizes valid for m > threshold")
    } else {
        NetworkSpec::new(
            vec![m, 5, 5, m],
            NetworkKind::Feedforward,
            Activation::Tanh,
        )
        .expect("feedforward sizes valid")
    }
}

pub const DEFAULT_ARCHITECTURE_THRESHOLD: usize = 30;

/// Trainer settings. The defaults reach the 1e-3 reconstruction target on
/// the benchmark minority sets; training stops as soon as the target is met.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub max_epochs: usize,
    pub target_mse: f64,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            max_epochs: 6000,
            target_mse: 1e-3,
            learning_rate: 0.1,
            batch_size: 32,
            seed: 0,
        }
    }
}

impl TrainConfig {
    fn validate(&self) -> Result<()> {
        if self.max_epochs == 0 {
            return Err(Error::ConfigError("max_epochs must be >= 1".into()));
        }
        if !(self.target_mse > 0.0) {
            return Err(Error::ConfigError("target_mse must be positive".into()));
        }
        if !(self.learning_rate > 0.0) || !self.learning_rate.is_finite() {
            return Err(Error::ConfigError("learning_rate must be positive".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::ConfigError("batch_size must be >= 1".into()));
        }
        Ok(())
    }
}

/// A fitted reconstruction network.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedReconstructor {
    spec: NetworkSpec,
    /// weights[l] has shape (fan_out, fan_in)
    weights: Vec<Array2<f64>>,
    biases: Vec<Array1<f64>>,
    final_training_mse: f64,
}

impl TrainedReconstructor {
    pub fn spec(&self) -> &NetworkSpec {
        &self.spec
    }

    pub fn weights(&self) -> &[Array2<f64>] {
        &self.weights
    }

    pub fn biases(&self) -> &[Array1<f64>] {
        &self.biases
    }

    pub fn final_training_mse(&self) -> f64 {
        self.final_training_mse
    }

    pub fn input_dim(&self) -> usize {
        self.spec.input_dim()
    }

    /// Assemble a model from explicit parameters. Shapes must agree with the
    /// spec; used by the JSON loader and by tests that need fixed weights.
    pub fn from_parts(
        spec: NetworkSpec,
        weights: Vec<Array2<f64>>,
        biases: Vec<Array1<f64>>,
        final_training_mse: f64,
    ) -> Result<TrainedReconstructor> {
        let n_layers = spec.layer_sizes.len() - 1;
        if weights.len() != n_layers || biases.len() != n_layers {
            return Err(Error::ConfigError(format!(
                "expected {n_layers} weight/bias pairs, got {}/{}",
                weights.len(),
                biases.len()
            )));
        }
        for l in 0..n_layers {
            let (fan_out, fan_in) = (spec.layer_sizes[l + 1], spec.layer_sizes[l]);
            if weights[l].dim() != (fan_out, fan_in) || biases[l].len() != fan_out {
                return Err(Error::ConfigError(format!(
                    "layer {l} parameter shapes do not match sizes {fan_in} -> {fan_out}"
                )));
            }
        }
        Ok(TrainedReconstructor {
            spec,
            weights,
            biases,
            final_training_mse,
        })
    }

    /// Forward pass over a batch of rows (one row per sample).
    pub fn reconstruct_batch(&self, x: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        if x.ncols() != self.input_dim() {
            return Err(Error::ShapeError {
                expected: self.input_dim(),
                got: x.ncols(),
            });
        }
        let mut a = x.to_owned() - INPUT_CENTER;
        let last = self.weights.len() - 1;
        for (l, (w, b)) in self.weights.iter().zip(self.biases.iter()).enumerate() {
            let mut z = a.dot(&w.t());
            z += b;
            if l < last {
                z.mapv_inplace(|v| self.spec.hidden_activation.apply(v));
            }
            a = z;
        }
        a += INPUT_CENTER;
        Ok(a)
    }

    /// Forward pass for a single sample.
    pub fn reconstruct(&self, x: ArrayView1<'_, f64>) -> Result<Array1<f64>> {
        if x.len() != self.input_dim() {
            return Err(Error::ShapeError {
                expected: self.input_dim(),
                got: x.len(),
            });
        }
        let batch = x.insert_axis(Axis(0));
        let out = self.reconstruct_batch(batch)?;
        Ok(out.row(0).to_owned())
    }

    /// Mean squared reconstruction error over a matrix (mean over rows and
    /// features).
    pub fn mse(&self, x: ArrayView2<'_, f64>) -> Result<f64> {
        let out = self.reconstruct_batch(x)?;
        let diff = &out - &x;
        Ok(diff.mapv(|v| v * v).mean().unwrap_or(0.0))
    }

    pub fn to_json(&self) -> String {
        let doc = ModelDoc {
            layer_sizes: self.spec.layer_sizes.clone(),
            kind: self.spec.kind,
            hidden_activation: self.spec.hidden_activation,
            input_center: INPUT_CENTER,
            weights: self
                .weights
                .iter()
                .map(|w| w.iter().copied().collect())
                .collect(),
            biases: self.biases.iter().map(|b| b.to_vec()).collect(),
            final_training_mse: self.final_training_mse,
        };
        serde_json::to_string_pretty(&doc).expect("model serializes")
    }

    pub fn from_json(s: &str) -> Result<TrainedReconstructor> {
        let doc: ModelDoc = serde_json::from_str(s)?;
        let spec = NetworkSpec::new(doc.layer_sizes, doc.kind, doc.hidden_activation)?;
        let n_layers = spec.layer_sizes.len() - 1;
        if doc.weights.len() != n_layers || doc.biases.len() != n_layers {
            return Err(Error::ConfigError("layer count mismatch in model document".into()));
        }
        let mut weights = Vec::with_capacity(n_layers);
        let mut biases = Vec::with_capacity(n_layers);
        for l in 0..n_layers {
            let (fan_out, fan_in) = (spec.layer_sizes[l + 1], spec.layer_sizes[l]);
            let w = Array2::from_shape_vec((fan_out, fan_in), doc.weights[l].clone())
                .map_err(|e| Error::ConfigError(format!("bad weight shape: {e}")))?;
            weights.push(w);
            if doc.biases[l].len() != fan_out {
                return Err(Error::ConfigError(format!(
                    "bias length mismatch in layer {l}"
                )));
            }
            biases.push(Array1::from_vec(doc.biases[l].clone()));
        }
        TrainedReconstructor::from_parts(spec, weights, biases, doc.final_training_mse)
    }
}

/// Row-major JSON layout for model dump/load.
#[derive(Serialize, Deserialize)]
struct ModelDoc {
    layer_sizes: Vec<usize>,
    kind: NetworkKind,
    hidden_activation: Activation,
    input_center: f64,
    weights: Vec<Vec<f64>>,
    biases: Vec<Vec<f64>>,
    final_training_mse: f64,
}

struct Network {
    spec: NetworkSpec,
    weights: Vec<Array2<f64>>,
    biases: Vec<Array1<f64>>,
}

impl Network {
    fn init(spec: &NetworkSpec, rng: &mut ChaCha8Rng) -> Network {
        use rand::Rng;
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for l in 0..spec.layer_sizes.len() - 1 {
            let (fan_in, fan_out) = (spec.layer_sizes[l], spec.layer_sizes[l + 1]);
            let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
            let w = Array2::from_shape_fn((fan_out, fan_in), |_| {
                (rng.random::<f64>() * 2.0 - 1.0) * bound
            });
            weights.push(w);
            biases.push(Array1::zeros(fan_out));
        }
        Network {
            spec: spec.clone(),
            weights,
            biases,
        }
    }

    /// Forward pass on centered inputs, keeping pre-activations for backprop.
    /// Returns (pre-activations per layer, activations per layer incl. input).
    fn forward_trace(&self, x_centered: &Array2<f64>) -> (Vec<Array2<f64>>, Vec<Array2<f64>>) {
        let last = self.weights.len() - 1;
        let mut pre = Vec::with_capacity(self.weights.len());
        let mut act = Vec::with_capacity(self.weights.len() + 1);
        act.push(x_centered.clone());
        for l in 0..self.weights.len() {
            let mut z = act[l].dot(&self.weights[l].t());
            z += &self.biases[l];
            let a = if l < last {
                z.mapv(|v| self.spec.hidden_activation.apply(v))
            } else {
                z.clone()
            };
            pre.push(z);
            act.push(a);
        }
        (pre, act)
    }

    /// MSE loss and parameter gradients for one batch (targets = inputs).
    /// Loss is averaged over batch rows and feature columns.
    fn loss_and_gradients(
        &self,
        x_centered: &Array2<f64>,
    ) -> (f64, Vec<Array2<f64>>, Vec<Array1<f64>>) {
        let (pre, act) = self.forward_trace(x_centered);
        let n = x_centered.nrows() as f64;
        let m = x_centered.ncols() as f64;
        let out = act.last().unwrap();
        let diff = out - x_centered;
        let loss = diff.mapv(|v| v * v).sum() / (n * m);

        let last = self.weights.len() - 1;
        let mut d_weights = vec![Array2::zeros((0, 0)); self.weights.len()];
        let mut d_biases = vec![Array1::zeros(0); self.weights.len()];

        // delta for the linear output layer
        let mut delta = diff.mapv(|v| 2.0 * v / (n * m));
        for l in (0..=last).rev() {
            d_weights[l] = delta.t().dot(&act[l]);
            d_biases[l] = delta.sum_axis(Axis(0));
            if l > 0 {
                let back = delta.dot(&self.weights[l]);
                let dz = pre[l - 1].mapv(|v| self.spec.hidden_activation.derivative(v));
                delta = back * dz;
            }
        }
        (loss, d_weights, d_biases)
    }

    fn apply_gradients(&mut self, lr: f64, dw: &[Array2<f64>], db: &[Array1<f64>]) {
        for l in 0..self.weights.len() {
            self.weights[l].scaled_add(-lr, &dw[l]);
            self.biases[l].scaled_add(-lr, &db[l]);
        }
    }

    fn full_mse(&self, x_centered: &Array2<f64>) -> f64 {
        let (_, act) = self.forward_trace(x_centered);
        let diff = act.last().unwrap() - x_centered;
        diff.mapv(|v| v * v).mean().unwrap_or(0.0)
    }
}

/// Train a reconstruction network on the given rows (typically the minority
/// class, min-max scaled). Deterministic for a fixed config seed: the same
/// inputs always produce bitwise-identical weights.
pub fn train_reconstructor(
    minority: ArrayView2<'_, f64>,
    spec: &NetworkSpec,
    cfg: &TrainConfig,
) -> Result<TrainedReconstructor> {
    cfg.validate()?;
    if minority.nrows() == 0 {
        return Err(Error::EmptyInput);
    }
    if minority.ncols() != spec.input_dim() {
        return Err(Error::ShapeError {
            expected: spec.input_dim(),
            got: minority.ncols(),
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut net = Network::init(spec, &mut rng);

    let x = minority.to_owned() - INPUT_CENTER;
    let n = x.nrows();
    let batch = cfg.batch_size.min(n);
    let mut order: Vec<usize> = (0..n).collect();
    let mut mse = net.full_mse(&x);

    for _ in 0..cfg.max_epochs {
        if mse <= cfg.target_mse {
            break;
        }
        order.shuffle(&mut rng);
        for chunk in order.chunks(batch) {
            let xb = x.select(Axis(0), chunk);
            let (_, dw, db) = net.loss_and_gradients(&xb);
            net.apply_gradients(cfg.learning_rate, &dw, &db);
        }
        mse = net.full_mse(&x);
    }

    Ok(TrainedReconstructor {
        spec: net.spec,
        weights: net.weights,
        biases: net.biases,
        final_training_mse: mse,
    })
}

use rand::seq::SliceRandom;

/// One scored row: original index plus squared Euclidean distance between
/// the row and its reconstruction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceRecord {
    pub index: usize,
    pub dist: f64,
}

/// Score the given rows and sort by distance descending; ties break toward
/// the smaller original index.
pub fn reconstruction_distances(
    model: &TrainedReconstructor,
    rows: &[usize],
    data: ArrayView2<'_, f64>,
) -> Vec<DistanceRecord> {
    assert_eq!(data.ncols(), model.input_dim(), "column count mismatch");
    let subset = data.select(Axis(0), rows);
    let out = model
        .reconstruct_batch(subset.view())
        .expect("shape checked above");
    let mut records: Vec<DistanceRecord> = rows
        .iter()
        .enumerate()
        .map(|(pos, &index)| {
            let diff = &subset.row(pos) - &out.row(pos);
            let dist = diff.iter().map(|v| v * v).sum();
            DistanceRecord { index, dist }
        })
        .collect();
    sort_distances_desc(&mut records);
    records
}

/// Descending by distance, ascending by index on ties.
pub fn sort_distances_desc(records: &mut [DistanceRecord]) {
    records.sort_by(|a, b| {
        b.dist
            .total_cmp(&a.dist)
            .then_with(|| a.index.cmp(&b.index))
    });
}
