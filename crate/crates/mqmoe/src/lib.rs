//! Multimodal mixture-of-experts model.
//!
//! Each modality owns one expert: a classical encoder whose output feeds a
//! quantum layer (or a bounded classical head in the quantum-free variant).
//! Expert outputs are stacked as tokens, fused by multi-head attention, and
//! the fused concatenation drives a linear-softmax gating network. The gate
//! weights the expert outputs into one combined feature vector, which every
//! per-modality output head consumes.

mod train;

pub use train::{train_mqmoe, MultiTrainMetrics};

use hybrid_model::{
    cross_entropy, cross_entropy_grad, init_dense, init_mha, init_quantum, mha_backward,
    mha_forward, softmax, xavier_init, Activation, FlatWeights, Layer, LayerCache, LayerSpec,
    Model, ModelError, ModelSpec, Tensor, WeightManifest,
};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MqmoeError {
    #[error("model error: {0}")]
    Model(#[from] ModelError),
    #[error("sample provides {got} modalities, model expects {expected}")]
    ModalityCount { expected: usize, got: usize },
    #[error("gate length {got} != expert count {expected}")]
    GateLength { expected: usize, got: usize },
    #[error("bad configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, MqmoeError>;

/// Expert description: a per-modality encoder ending in `feature_dim`
/// features, optionally passed through a quantum layer of that many qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpertSpec {
    pub modality: String,
    pub input_shape: Vec<usize>,
    pub encoder: Vec<LayerSpec>,
    /// PQC depth; `None` builds the quantum-free expert.
    pub quantum_layers: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MqmoeSpec {
    pub experts: Vec<ExpertSpec>,
    /// Shared expert output dimension (qubit count when quantum).
    pub feature_dim: usize,
    pub gate_heads: usize,
    /// Class count per modality head, aligned with `experts`.
    pub classes: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Expert {
    pub modality: String,
    encoder: Model,
    quantum: Option<Layer>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GatingNetwork {
    mha: Layer,
    /// [experts, experts * feature_dim]; no bias, matching the linear map
    /// over the fused features.
    w_g: Tensor,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MqmoeModel {
    experts: Vec<Expert>,
    gating: GatingNetwork,
    heads: Vec<Layer>,
    feature_dim: usize,
}

/// One multimodal sample: inputs and labels aligned with the expert list.
#[derive(Debug, Clone)]
pub struct MultiSample {
    pub inputs: Vec<Tensor>,
    pub labels: Vec<usize>,
}

#[derive(Debug, Clone, Default)]
pub struct MultiDataset {
    pub samples: Vec<MultiSample>,
}

impl MultiDataset {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Softmax gate over the fused features: softmax(W_g * phi).
pub fn gate(w_g: &Tensor, fused: &[f64]) -> Result<Vec<f64>> {
    let (m, dim) = (w_g.shape()[0], w_g.shape()[1]);
    if fused.len() != dim {
        return Err(MqmoeError::Config(format!(
            "gate input {} != {dim}",
            fused.len()
        )));
    }
    let mut logits = vec![0.0; m];
    for (j, logit) in logits.iter_mut().enumerate() {
        *logit = w_g.data()[j * dim..(j + 1) * dim]
            .iter()
            .zip(fused)
            .map(|(w, f)| w * f)
            .sum();
    }
    Ok(softmax(&logits))
}

/// Exact weighted sum of expert outputs.
pub fn combine(gates: &[f64], expert_outputs: &[Vec<f64>]) -> Result<Vec<f64>> {
    if gates.len() != expert_outputs.len() {
        return Err(MqmoeError::GateLength {
            expected: expert_outputs.len(),
            got: gates.len(),
        });
    }
    let dim = expert_outputs.first().map(|v| v.len()).unwrap_or(0);
    let mut out = vec![0.0; dim];
    for (g, e) in gates.iter().zip(expert_outputs) {
        for (o, v) in out.iter_mut().zip(e) {
            *o += g * v;
        }
    }
    Ok(out)
}

pub struct ForwardTrace {
    pub expert_outputs: Vec<Vec<f64>>,
    pub gates: Vec<f64>,
    pub combined: Vec<f64>,
    pub logits: Vec<Vec<f64>>,
    enc_caches: Vec<Vec<LayerCache>>,
    quantum_caches: Vec<Option<LayerCache>>,
    mha_cache: Option<hybrid_model::MhaCache>,
    fused_flat: Vec<f64>,
    head_caches: Vec<LayerCache>,
}

impl MqmoeModel {
    pub fn build(spec: &MqmoeSpec, seed: u64) -> Result<MqmoeModel> {
        if spec.experts.is_empty() {
            return Err(MqmoeError::Config("at least one expert required".into()));
        }
        if spec.classes.len() != spec.experts.len() {
            return Err(MqmoeError::Config(
                "one output head per modality required".into(),
            ));
        }
        let m = spec.experts.len();
        let d = spec.feature_dim;
        let mut experts = Vec::with_capacity(m);
        for (i, es) in spec.experts.iter().enumerate() {
            let enc_spec = ModelSpec {
                input_shape: es.input_shape.clone(),
                layers: es.encoder.clone(),
            };
            let encoder = Model::build(&enc_spec, seed ^ (0x9e37_79b9 + i as u64))?;
            if encoder.output_dim() != d {
                return Err(MqmoeError::Config(format!(
                    "expert {} encoder emits {} features, expected {d}",
                    es.modality,
                    encoder.output_dim()
                )));
            }
            let quantum = es.quantum_layers.map(|layers| {
                let mut rng = ChaCha20Rng::seed_from_u64(seed ^ (0x85eb_ca6b + i as u64));
                init_quantum(d, layers, &mut rng)
            });
            experts.push(Expert {
                modality: es.modality.clone(),
                encoder,
                quantum,
            });
        }

        // gating: attention over the m expert tokens plus the linear map
        let mut gate_rng = ChaCha20Rng::seed_from_u64(seed ^ 0xc2b2_ae35);
        let mha = Layer::Mha(init_mha(spec.gate_heads, d, &mut gate_rng)?);
        let w_g = xavier_init(vec![m, m * d], m * d, m, &mut gate_rng);

        let mut heads = Vec::with_capacity(m);
        for (i, &c) in spec.classes.iter().enumerate() {
            let mut rng = ChaCha20Rng::seed_from_u64(seed ^ (0x1656_67b1 + i as u64));
            heads.push(init_dense(d, c, Activation::Linear, &mut rng));
        }

        Ok(MqmoeModel {
            experts,
            gating: GatingNetwork { mha, w_g },
            heads,
            feature_dim: d,
        })
    }

    pub fn expert_count(&self) -> usize {
        self.experts.len()
    }

    pub fn feature_dim(&self) -> usize {
        self.feature_dim
    }

    pub fn class_counts(&self) -> Vec<usize> {
        self.heads
            .iter()
            .map(|h| match h {
                Layer::Dense { w, .. } => w.shape()[0],
                _ => unreachable!("heads are dense"),
            })
            .collect()
    }

    /// Encoder then quantum layer for one modality.
    pub fn expert_forward(&self, which: usize, x: &Tensor) -> Result<Vec<f64>> {
        let expert = &self.experts[which];
        let enc_out = expert.encoder.forward(x)?;
        match &expert.quantum {
            Some(q) => Ok(q.forward(&enc_out)?.0.data().to_vec()),
            None => Ok(enc_out.data().to_vec()),
        }
    }

    /// Full forward pass; `fixed_gate` bypasses the gating network (used by
    /// ablations and the combination-linearity checks).
    pub fn forward_traced(
        &self,
        inputs: &[Tensor],
        fixed_gate: Option<&[f64]>,
    ) -> Result<ForwardTrace> {
        if inputs.len() != self.experts.len() {
            return Err(MqmoeError::ModalityCount {
                expected: self.experts.len(),
                got: inputs.len(),
            });
        }
        let m = self.experts.len();
        let d = self.feature_dim;

        let mut expert_outputs = Vec::with_capacity(m);
        let mut enc_caches = Vec::with_capacity(m);
        let mut quantum_caches = Vec::with_capacity(m);
        for (expert, x) in self.experts.iter().zip(inputs) {
            let (enc_out, caches) = expert.encoder.forward_cached(x)?;
            let (features, qcache) = match &expert.quantum {
                Some(q) => {
                    let (out, cache) = q.forward(&enc_out)?;
                    (out.data().to_vec(), Some(cache))
                }
                None => (enc_out.data().to_vec(), None),
            };
            expert_outputs.push(features);
            enc_caches.push(caches);
            quantum_caches.push(qcache);
        }

        let (gates, mha_cache, fused_flat) = match fixed_gate {
            Some(g) => {
                if g.len() != m {
                    return Err(MqmoeError::GateLength {
                        expected: m,
                        got: g.len(),
                    });
                }
                (g.to_vec(), None, Vec::new())
            }
            None => {
                let tokens = Tensor::new(
                    vec![m, d],
                    expert_outputs.iter().flatten().copied().collect(),
                )?;
                let (fused, cache) = match &self.gating.mha {
                    Layer::Mha(p) => {
                        let (out, c) = mha_forward(&tokens, &tokens, &tokens, p)?;
                        (out, c)
                    }
                    _ => unreachable!("gating uses attention"),
                };
                let fused_flat = fused.data().to_vec();
                let gates = gate(&self.gating.w_g, &fused_flat)?;
                (gates, Some(cache), fused_flat)
            }
        };

        let combined = combine(&gates, &expert_outputs)?;
        let combined_t = Tensor::vector(combined.clone());
        let mut logits = Vec::with_capacity(m);
        let mut head_caches = Vec::with_capacity(m);
        for head in &self.heads {
            let (out, cache) = head.forward(&combined_t)?;
            logits.push(out.data().to_vec());
            head_caches.push(cache);
        }

        Ok(ForwardTrace {
            expert_outputs,
            gates,
            combined,
            logits,
            enc_caches,
            quantum_caches,
            mha_cache,
            fused_flat,
            head_caches,
        })
    }

    /// Per-modality logits.
    pub fn forward(&self, inputs: &[Tensor]) -> Result<Vec<Vec<f64>>> {
        Ok(self.forward_traced(inputs, None)?.logits)
    }

    /// Total loss = sum of per-modality cross-entropies.
    pub fn loss(&self, inputs: &[Tensor], labels: &[usize]) -> Result<f64> {
        let trace = self.forward_traced(inputs, None)?;
        Ok(trace
            .logits
            .iter()
            .zip(labels)
            .map(|(l, &y)| cross_entropy(&softmax(l), y))
            .sum())
    }

    /// Joint gradient of the summed cross-entropy over every parameter,
    /// flattened in `flatten_weights` order. `fixed_gate` freezes the gate
    /// vector (no gating-network gradients flow).
    pub fn backward(
        &self,
        inputs: &[Tensor],
        labels: &[usize],
        fixed_gate: Option<&[f64]>,
    ) -> Result<(f64, Vec<f64>)> {
        if labels.len() != self.heads.len() {
            return Err(MqmoeError::ModalityCount {
                expected: self.heads.len(),
                got: labels.len(),
            });
        }
        let trace = self.forward_traced(inputs, fixed_gate)?;
        let m = self.experts.len();
        let d = self.feature_dim;

        let mut loss = 0.0;
        let mut d_combined = vec![0.0; d];
        let mut head_grads = Vec::with_capacity(m);
        for ((head, cache), (logits, &label)) in self
            .heads
            .iter()
            .zip(&trace.head_caches)
            .zip(trace.logits.iter().zip(labels))
        {
            let probs = softmax(logits);
            loss += cross_entropy(&probs, label);
            let d_logits = Tensor::vector(cross_entropy_grad(&probs, label));
            let (dx, grads) = head.backward(cache, &d_logits)?;
            for (acc, v) in d_combined.iter_mut().zip(dx.data()) {
                *acc += v;
            }
            head_grads.push(grads);
        }

        // combine: y = sum_j g_j f_j
        let mut d_gates = vec![0.0; m];
        let mut d_features: Vec<Vec<f64>> = Vec::with_capacity(m);
        for (j, f_j) in trace.expert_outputs.iter().enumerate() {
            d_gates[j] = d_combined.iter().zip(f_j).map(|(dc, f)| dc * f).sum();
            d_features.push(d_combined.iter().map(|dc| dc * trace.gates[j]).collect());
        }

        // gating path (skipped entirely under a fixed gate)
        let mut w_g_grad = Tensor::zeros(self.gating.w_g.shape().to_vec());
        let mut mha_grads: Vec<Tensor> = self
            .gating
            .mha
            .params()
            .iter()
            .map(|p| Tensor::zeros(p.shape().to_vec()))
            .collect();
        if fixed_gate.is_none() {
            let d_gate_logits = {
                // softmax jacobian
                let dot: f64 = trace.gates.iter().zip(&d_gates).map(|(g, dg)| g * dg).sum();
                trace
                    .gates
                    .iter()
                    .zip(&d_gates)
                    .map(|(g, dg)| g * (dg - dot))
                    .collect::<Vec<f64>>()
            };
            let dim = m * d;
            let mut d_fused = vec![0.0; dim];
            {
                let wg = self.gating.w_g.data();
                let gw = w_g_grad.data_mut();
                for (j, &dl) in d_gate_logits.iter().enumerate() {
                    for p in 0..dim {
                        gw[j * dim + p] += dl * trace.fused_flat[p];
                        d_fused[p] += dl * wg[j * dim + p];
                    }
                }
            }
            let d_fused_t = Tensor::new(vec![m, d], d_fused)?;
            let cache = trace.mha_cache.as_ref().expect("gating ran");
            if let Layer::Mha(p) = &self.gating.mha {
                let (dq, dk, dv, grads) = mha_backward(p, cache, &d_fused_t)?;
                mha_grads = vec![grads.wq, grads.wk, grads.wv, grads.wo];
                for j in 0..m {
                    for p_idx in 0..d {
                        d_features[j][p_idx] += dq.data()[j * d + p_idx]
                            + dk.data()[j * d + p_idx]
                            + dv.data()[j * d + p_idx];
                    }
                }
            }
        }

        // experts
        let mut expert_grads: Vec<Vec<f64>> = Vec::with_capacity(m);
        for (j, expert) in self.experts.iter().enumerate() {
            let upstream = Tensor::vector(d_features[j].clone());
            let (d_enc_out, q_grads) = match (&expert.quantum, &trace.quantum_caches[j]) {
                (Some(q), Some(cache)) => {
                    let (dx, grads) = q.backward(cache, &upstream)?;
                    (dx, grads)
                }
                _ => (upstream, vec![]),
            };
            let enc_flat = expert.encoder.backward(&trace.enc_caches[j], &d_enc_out)?;
            let mut flat = enc_flat;
            for g in &q_grads {
                flat.extend_from_slice(g.data());
            }
            expert_grads.push(flat);
        }

        // assemble in flatten_weights order
        let mut flat = Vec::with_capacity(self.param_count());
        for g in &expert_grads {
            flat.extend_from_slice(g);
        }
        for g in &mha_grads {
            flat.extend_from_slice(g.data());
        }
        flat.extend_from_slice(w_g_grad.data());
        for grads in &head_grads {
            for g in grads {
                flat.extend_from_slice(g.data());
            }
        }
        Ok((loss, flat))
    }

    pub fn param_count(&self) -> usize {
        let experts: usize = self
            .experts
            .iter()
            .map(|e| {
                e.encoder.param_count()
                    + e.quantum
                        .as_ref()
                        .map(|q| q.params().iter().map(|t| t.len()).sum())
                        .unwrap_or(0)
            })
            .sum();
        let gating: usize = self
            .gating
            .mha
            .params()
            .iter()
            .map(|t| t.len())
            .sum::<usize>()
            + self.gating.w_g.len();
        let heads: usize = self
            .heads
            .iter()
            .flat_map(|h| h.params())
            .map(|t| t.len())
            .sum();
        experts + gating + heads
    }

    pub fn manifest(&self) -> WeightManifest {
        let mut entries = Vec::new();
        for (j, expert) in self.experts.iter().enumerate() {
            for (name, shape) in expert.encoder.manifest().entries {
                entries.push((format!("expert{j}.{name}"), shape));
            }
            if let Some(q) = &expert.quantum {
                for (name, param) in q.param_names().iter().zip(q.params()) {
                    entries.push((format!("expert{j}.{name}"), param.shape().to_vec()));
                }
            }
        }
        for (name, param) in self.gating.mha.param_names().iter().zip(self.gating.mha.params()) {
            entries.push((format!("gate.{name}"), param.shape().to_vec()));
        }
        entries.push(("gate.w_g".into(), self.gating.w_g.shape().to_vec()));
        for (j, head) in self.heads.iter().enumerate() {
            for (name, param) in head.param_names().iter().zip(head.params()) {
                entries.push((format!("head{j}.{name}"), param.shape().to_vec()));
            }
        }
        WeightManifest { entries }
    }

    pub fn flatten_weights(&self) -> FlatWeights {
        let mut values = Vec::with_capacity(self.param_count());
        for expert in &self.experts {
            values.extend_from_slice(&expert.encoder.flatten_weights().values);
            if let Some(q) = &expert.quantum {
                for p in q.params() {
                    values.extend_from_slice(p.data());
                }
            }
        }
        for p in self.gating.mha.params() {
            values.extend_from_slice(p.data());
        }
        values.extend_from_slice(self.gating.w_g.data());
        for head in &self.heads {
            for p in head.params() {
                values.extend_from_slice(p.data());
            }
        }
        FlatWeights {
            values,
            manifest: self.manifest(),
        }
    }

    pub fn load_weights(&mut self, weights: &FlatWeights) -> Result<()> {
        let expected = self.manifest();
        if expected != weights.manifest || weights.values.len() != self.param_count() {
            return Err(MqmoeError::Model(ModelError::ManifestMismatch {
                expected: expected.describe(),
                got: weights.manifest.describe(),
            }));
        }
        let mut offset = 0usize;
        let mut take = |len: usize| -> Vec<f64> {
            let v = weights.values[offset..offset + len].to_vec();
            offset += len;
            v
        };
        for expert in &mut self.experts {
            let enc_len = expert.encoder.param_count();
            let enc_manifest = expert.encoder.manifest();
            expert.encoder.load_weights(&FlatWeights {
                values: take(enc_len),
                manifest: enc_manifest,
            })?;
            if let Some(q) = &mut expert.quantum {
                for p in q.params_mut() {
                    let len = p.len();
                    p.data_mut().copy_from_slice(&take(len));
                }
            }
        }
        for p in self.gating.mha.params_mut() {
            let len = p.len();
            p.data_mut().copy_from_slice(&take(len));
        }
        {
            let len = self.gating.w_g.len();
            self.gating.w_g.data_mut().copy_from_slice(&take(len));
        }
        for head in &mut self.heads {
            for p in head.params_mut() {
                let len = p.len();
                p.data_mut().copy_from_slice(&take(len));
            }
        }
        Ok(())
    }

    /// Per-modality (loss, accuracy) over a dataset.
    pub fn evaluate(&self, data: &MultiDataset) -> Result<Vec<(f64, f64)>> {
        if data.is_empty() {
            return Err(MqmoeError::Model(ModelError::EmptyDataset));
        }
        let m = self.heads.len();
        let mut loss = vec![0.0; m];
        let mut correct = vec![0usize; m];
        for sample in &data.samples {
            let logits = self.forward(&sample.inputs)?;
            for (j, (l, &y)) in logits.iter().zip(&sample.labels).enumerate() {
                let probs = softmax(l);
                loss[j] += cross_entropy(&probs, y);
                if hybrid_model::argmax(&probs) == y {
                    correct[j] += 1;
                }
            }
        }
        let n = data.len() as f64;
        Ok((0..m)
            .map(|j| (loss[j] / n, correct[j] as f64 / n))
            .collect())
    }
}
