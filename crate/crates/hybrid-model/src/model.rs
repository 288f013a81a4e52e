//! Sequential models, weight flattening, and local training.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::layers::{Activation, Layer, MhaParams};
use crate::ops::{cross_entropy, cross_entropy_grad, softmax};
use crate::optim::{adam_step, sgd_step, AdamState, OptimizerKind};
use crate::tensor::Tensor;
use crate::{ModelError, Result};

/// Declarative layer description; shapes are validated when building.
#[derive(Debug, Clone, PartialEq)]
pub enum LayerSpec {
    Dense {
        inputs: usize,
        outputs: usize,
        activation: Activation,
    },
    Conv2d {
        channels: usize,
        kernel: usize,
        activation: Activation,
    },
    MaxPool {
        k: usize,
    },
    Mha {
        heads: usize,
        d_model: usize,
    },
    Quantum {
        qubits: usize,
        layers: usize,
    },
    SoftmaxHead,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub input_shape: Vec<usize>,
    pub layers: Vec<LayerSpec>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    layers: Vec<Layer>,
    input_shape: Vec<usize>,
    output_dim: usize,
}

/// One (input, label) classification sample set.
#[derive(Debug, Clone, Default)]
pub struct Dataset {
    pub samples: Vec<(Tensor, usize)>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    /// Rate applied after the plateau rule triggers.
    pub plateau_learning_rate: f64,
    /// Improvement threshold and epoch patience for the plateau rule.
    pub plateau_epsilon: f64,
    pub plateau_patience: usize,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
    pub optimizer: OptimizerKind,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-3,
            plateau_learning_rate: 3e-3,
            plateau_epsilon: 1e-4,
            plateau_patience: 3,
            batch_size: 16,
            epochs: 10,
            seed: 0,
            optimizer: OptimizerKind::Adam,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct TrainMetrics {
    pub loss_history: Vec<f64>,
    pub accuracy_history: Vec<f64>,
    pub plateau_triggered: bool,
}

/// Flat weight vector plus the manifest needed to reassemble it.
#[derive(Debug, Clone, PartialEq)]
pub struct FlatWeights {
    pub values: Vec<f64>,
    pub manifest: WeightManifest,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightManifest {
    pub entries: Vec<(String, Vec<usize>)>,
}

impl WeightManifest {
    pub fn total_len(&self) -> usize {
        self.entries.iter().map(|(_, s)| s.iter().product::<usize>()).sum()
    }

    /// FNV-1a over the entry names and shapes.
    pub fn hash(&self) -> u64 {
        let mut h: u64 = 0xcbf29ce484222325;
        let mut eat = |byte: u8| {
            h ^= byte as u64;
            h = h.wrapping_mul(0x100000001b3);
        };
        for (name, shape) in &self.entries {
            for b in name.bytes() {
                eat(b);
            }
            for &d in shape {
                for b in (d as u64).to_le_bytes() {
                    eat(b);
                }
            }
        }
        h
    }

    pub fn describe(&self) -> String {
        format!("{} tensors / {} weights", self.entries.len(), self.total_len())
    }
}

/// Uniform Xavier/Glorot initialization.
pub fn xavier_init<R: Rng>(shape: Vec<usize>, fan_in: usize, fan_out: usize, rng: &mut R) -> Tensor {
    let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
    let count: usize = shape.iter().product();
    let data = (0..count).map(|_| rng.gen_range(-limit..limit)).collect();
    Tensor::new(shape, data).expect("init values are finite")
}

/// Freshly initialized attention parameters.
pub fn init_mha<R: Rng>(heads: usize, d_model: usize, rng: &mut R) -> Result<MhaParams> {
    let d_k = MhaParams::validate(heads, d_model)?;
    Ok(MhaParams {
        heads,
        d_model,
        d_k,
        wq: xavier_init(vec![d_model, d_model], d_model, d_model, rng),
        wk: xavier_init(vec![d_model, d_model], d_model, d_model, rng),
        wv: xavier_init(vec![d_model, d_model], d_model, d_model, rng),
        wo: xavier_init(vec![d_model, d_model], d_model, d_model, rng),
    })
}

/// Freshly initialized dense layer.
pub fn init_dense<R: Rng>(
    inputs: usize,
    outputs: usize,
    activation: Activation,
    rng: &mut R,
) -> Layer {
    Layer::Dense {
        w: xavier_init(vec![outputs, inputs], inputs, outputs, rng),
        b: Tensor::zeros(vec![outputs]),
        activation,
    }
}

/// Freshly initialized quantum layer with small random angles.
pub fn init_quantum<R: Rng>(qubits: usize, layers: usize, rng: &mut R) -> Layer {
    let data = (0..layers * qubits).map(|_| rng.gen_range(-0.5..0.5)).collect();
    Layer::Quantum {
        qubits,
        layers,
        angles: Tensor::new(vec![layers, qubits], data).expect("finite init"),
    }
}

impl Model {
    /// Builds and validates the layer stack; init is a pure function of the
    /// seed.
    pub fn build(spec: &ModelSpec, seed: u64) -> Result<Model> {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let mut shape = spec.input_shape.clone();
        let mut layers = Vec::with_capacity(spec.layers.len());
        for ls in &spec.layers {
            let layer = match ls {
                LayerSpec::Dense {
                    inputs,
                    outputs,
                    activation,
                } => init_dense(*inputs, *outputs, *activation, &mut rng),
                LayerSpec::Conv2d {
                    channels,
                    kernel,
                    activation,
                } => {
                    if shape.len() != 3 {
                        return Err(ModelError::Shape(format!(
                            "conv2d needs [c, h, w] input, got {shape:?}"
                        )));
                    }
                    let ic = shape[0];
                    let fan_in = ic * kernel * kernel;
                    Layer::Conv2d {
                        w: xavier_init(
                            vec![*channels, ic, *kernel, *kernel],
                            fan_in,
                            *channels,
                            &mut rng,
                        ),
                        b: Tensor::zeros(vec![*channels]),
                        activation: *activation,
                    }
                }
                LayerSpec::MaxPool { k } => Layer::MaxPool { k: *k },
                LayerSpec::Mha { heads, d_model } => Layer::Mha(init_mha(*heads, *d_model, &mut rng)?),
                LayerSpec::Quantum { qubits, layers: l } => init_quantum(*qubits, *l, &mut rng),
                LayerSpec::SoftmaxHead => Layer::SoftmaxHead,
            };
            shape = layer.out_shape(&shape)?;
            layers.push(layer);
        }
        if shape.len() != 1 {
            return Err(ModelError::Shape(format!(
                "model must end in a vector of logits, got {shape:?}"
            )));
        }
        Ok(Model {
            layers,
            input_shape: spec.input_shape.clone(),
            output_dim: shape[0],
        })
    }

    pub fn output_dim(&self) -> usize {
        self.output_dim
    }

    pub fn input_shape(&self) -> &[usize] {
        &self.input_shape
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn forward(&self, x: &Tensor) -> Result<Tensor> {
        let mut cur = x.clone();
        for layer in &self.layers {
            cur = layer.forward(&cur)?.0;
        }
        Ok(cur)
    }

    pub fn forward_cached(&self, x: &Tensor) -> Result<(Tensor, Vec<crate::layers::LayerCache>)> {
        let mut cur = x.clone();
        let mut caches = Vec::with_capacity(self.layers.len());
        for layer in &self.layers {
            let (out, cache) = layer.forward(&cur)?;
            caches.push(cache);
            cur = out;
        }
        Ok((cur, caches))
    }

    /// Backpropagates d(loss)/d(logits); returns the flat gradient vector
    /// aligned with `flatten_weights`.
    pub fn backward(
        &self,
        caches: &[crate::layers::LayerCache],
        d_logits: &Tensor,
    ) -> Result<Vec<f64>> {
        let mut layer_grads: Vec<Vec<Tensor>> = vec![Vec::new(); self.layers.len()];
        let mut dy = d_logits.clone();
        for (idx, layer) in self.layers.iter().enumerate().rev() {
            let (dx, grads) = layer.backward(&caches[idx], &dy)?;
            layer_grads[idx] = grads;
            dy = dx;
        }
        let mut flat = Vec::with_capacity(self.param_count());
        for grads in &layer_grads {
            for g in grads {
                flat.extend_from_slice(g.data());
            }
        }
        Ok(flat)
    }

    pub fn param_count(&self) -> usize {
        self.layers
            .iter()
            .flat_map(|l| l.params())
            .map(|t| t.len())
            .sum()
    }

    pub fn manifest(&self) -> WeightManifest {
        let mut entries = Vec::new();
        for (i, layer) in self.layers.iter().enumerate() {
            for (name, param) in layer.param_names().iter().zip(layer.params()) {
                entries.push((format!("{i}.{name}"), param.shape().to_vec()));
            }
        }
        WeightManifest { entries }
    }

    /// Order-stable, bit-exact weight export.
    pub fn flatten_weights(&self) -> FlatWeights {
        let mut values = Vec::with_capacity(self.param_count());
        for layer in &self.layers {
            for param in layer.params() {
                values.extend_from_slice(param.data());
            }
        }
        FlatWeights {
            values,
            manifest: self.manifest(),
        }
    }

    /// Bit-exact weight import; the manifest must match this model.
    pub fn load_weights(&mut self, weights: &FlatWeights) -> Result<()> {
        let expected = self.manifest();
        if expected != weights.manifest {
            return Err(ModelError::ManifestMismatch {
                expected: expected.describe(),
                got: weights.manifest.describe(),
            });
        }
        if weights.values.len() != self.param_count() {
            return Err(ModelError::ManifestMismatch {
                expected: format!("{} values", self.param_count()),
                got: format!("{} values", weights.values.len()),
            });
        }
        let mut offset = 0;
        for layer in &mut self.layers {
            for param in layer.params_mut() {
                let len = param.len();
                param
                    .data_mut()
                    .copy_from_slice(&weights.values[offset..offset + len]);
                offset += len;
            }
        }
        Ok(())
    }

    /// Mean loss and accuracy over a dataset.
    pub fn evaluate(&self, data: &Dataset) -> Result<(f64, f64)> {
        if data.is_empty() {
            return Err(ModelError::EmptyDataset);
        }
        let mut loss = 0.0;
        let mut correct = 0usize;
        for (x, label) in &data.samples {
            let logits = self.forward(x)?;
            let probs = softmax(logits.data());
            loss += cross_entropy(&probs, *label);
            let pred = argmax(&probs);
            if pred == *label {
                correct += 1;
            }
        }
        Ok((loss / data.len() as f64, correct as f64 / data.len() as f64))
    }
}

pub fn argmax(v: &[f64]) -> usize {
    v.iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).expect("finite"))
        .map(|(i, _)| i)
        .expect("nonempty")
}

/// Mini-batch training; weights, shuffling, and accumulation order are all
/// functions of the seed. Returns the final flat weights and per-epoch
/// metrics. `val` drives the plateau learning-rate rule when present.
pub fn train_local(
    model: &mut Model,
    train: &Dataset,
    val: Option<&Dataset>,
    cfg: &TrainConfig,
) -> Result<(FlatWeights, TrainMetrics)> {
    if train.is_empty() {
        return Err(ModelError::EmptyDataset);
    }
    let mut rng = ChaCha20Rng::seed_from_u64(cfg.seed);
    let mut adam = AdamState::new(model.param_count());
    let mut metrics = TrainMetrics::default();
    let mut lr = cfg.learning_rate;
    let mut best_monitor = f64::INFINITY;
    let mut stale_epochs = 0usize;

    let mut order: Vec<usize> = (0..train.len()).collect();
    for _epoch in 0..cfg.epochs {
        // Fisher-Yates with the epoch-threaded rng
        for i in (1..order.len()).rev() {
            let j = rng.gen_range(0..=i);
            order.swap(i, j);
        }
        for batch in order.chunks(cfg.batch_size.max(1)) {
            let mut grad_acc = vec![0.0; model.param_count()];
            for &idx in batch {
                let (x, label) = &train.samples[idx];
                let (logits, caches) = model.forward_cached(x)?;
                let probs = softmax(logits.data());
                let d_logits = Tensor::vector(cross_entropy_grad(&probs, *label));
                let grads = model.backward(&caches, &d_logits)?;
                for (acc, g) in grad_acc.iter_mut().zip(&grads) {
                    *acc += g;
                }
            }
            let scale = 1.0 / batch.len() as f64;
            for g in grad_acc.iter_mut() {
                *g *= scale;
            }
            let mut flat = model.flatten_weights();
            match cfg.optimizer {
                OptimizerKind::Sgd => sgd_step(&mut flat.values, &grad_acc, lr)?,
                OptimizerKind::Adam => adam_step(&mut flat.values, &grad_acc, lr, &mut adam)?,
            }
            model.load_weights(&flat)?;
        }

        let (train_loss, train_acc) = model.evaluate(train)?;
        metrics.loss_history.push(train_loss);
        metrics.accuracy_history.push(train_acc);

        let monitor = match val {
            Some(v) => model.evaluate(v)?.0,
            None => train_loss,
        };
        if best_monitor - monitor < cfg.plateau_epsilon {
            stale_epochs += 1;
            if stale_epochs >= cfg.plateau_patience && !metrics.plateau_triggered {
                lr = cfg.plateau_learning_rate;
                metrics.plateau_triggered = true;
            }
        } else {
            stale_epochs = 0;
        }
        best_monitor = best_monitor.min(monitor);
    }

    Ok((model.flatten_weights(), metrics))
}
