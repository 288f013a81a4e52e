//! Layer implementations with explicit forward caches and backward passes.

use quantum_sim::{param_shift_grad, param_shift_input_grad, quantum_layer_forward, PqcConfig};

use crate::ops::softmax_backward;
use crate::tensor::Tensor;
use crate::{ModelError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Linear,
    Relu,
    Tanh,
}

impl Activation {
    fn apply(&self, z: f64) -> f64 {
        match self {
            Activation::Linear => z,
            Activation::Relu => z.max(0.0),
            Activation::Tanh => z.tanh(),
        }
    }

    fn derivative(&self, z: f64) -> f64 {
        match self {
            Activation::Linear => 1.0,
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => 1.0 - z.tanh().powi(2),
        }
    }
}

/// Multi-head attention parameters. Row-vector convention: a token matrix
/// X of shape [T, d_model] is projected as X * W.
#[derive(Debug, Clone, PartialEq)]
pub struct MhaParams {
    pub heads: usize,
    pub d_model: usize,
    pub d_k: usize,
    pub wq: Tensor,
    pub wk: Tensor,
    pub wv: Tensor,
    pub wo: Tensor,
}

impl MhaParams {
    pub fn validate(heads: usize, d_model: usize) -> Result<usize> {
        if heads == 0 || d_model == 0 || d_model % heads != 0 {
            return Err(ModelError::Config(format!(
                "d_model {d_model} not divisible by {heads} heads"
            )));
        }
        Ok(d_model / heads)
    }
}

#[derive(Debug, Clone)]
pub struct MhaCache {
    q_in: Tensor,
    k_in: Tensor,
    v_in: Tensor,
    q: Vec<f64>,
    k: Vec<f64>,
    v: Vec<f64>,
    /// Per-head attention rows, each [t_q x t_k].
    attn: Vec<Vec<f64>>,
    concat: Vec<f64>,
}

// row-major helpers
fn matmul(a: &[f64], b: &[f64], m: usize, k: usize, n: usize) -> Vec<f64> {
    let mut out = vec![0.0; m * n];
    for i in 0..m {
        for p in 0..k {
            let aip = a[i * k + p];
            if aip == 0.0 {
                continue;
            }
            for j in 0..n {
                out[i * n + j] += aip * b[p * n + j];
            }
        }
    }
    out
}

/// a^T * b with a [k x m], b [k x n] -> [m x n]
fn matmul_tn(a: &[f64], b: &[f64], k: usize, m: usize, n: usize) -> Vec<f64> {
    let mut out = vec![0.0; m * n];
    for p in 0..k {
        for i in 0..m {
            let api = a[p * m + i];
            if api == 0.0 {
                continue;
            }
            for j in 0..n {
                out[i * n + j] += api * b[p * n + j];
            }
        }
    }
    out
}

/// a * b^T with a [m x k], b [n x k] -> [m x n]
fn matmul_nt(a: &[f64], b: &[f64], m: usize, k: usize, n: usize) -> Vec<f64> {
    let mut out = vec![0.0; m * n];
    for i in 0..m {
        for j in 0..n {
            let mut acc = 0.0;
            for p in 0..k {
                acc += a[i * k + p] * b[j * k + p];
            }
            out[i * n + j] = acc;
        }
    }
    out
}

/// Scaled dot-product attention over `heads` column slices, followed by the
/// output projection.
pub fn mha_forward(
    q_in: &Tensor,
    k_in: &Tensor,
    v_in: &Tensor,
    params: &MhaParams,
) -> Result<(Tensor, MhaCache)> {
    let dm = params.d_model;
    for (name, t) in [("q", q_in), ("k", k_in), ("v", v_in)] {
        if t.shape().len() != 2 || t.shape()[1] != dm {
            return Err(ModelError::Shape(format!(
                "{name} input shape {:?}, expected [tokens, {dm}]",
                t.shape()
            )));
        }
    }
    let tq = q_in.shape()[0];
    let tk = k_in.shape()[0];
    if v_in.shape()[0] != tk {
        return Err(ModelError::Shape("key/value token counts differ".into()));
    }

    let q = matmul(q_in.data(), params.wq.data(), tq, dm, dm);
    let k = matmul(k_in.data(), params.wk.data(), tk, dm, dm);
    let v = matmul(v_in.data(), params.wv.data(), tk, dm, dm);

    let dk = params.d_k;
    let scale = 1.0 / (dk as f64).sqrt();
    let mut concat = vec![0.0; tq * dm];
    let mut attn = Vec::with_capacity(params.heads);
    for h in 0..params.heads {
        let off = h * dk;
        let mut head_attn = vec![0.0; tq * tk];
        for i in 0..tq {
            let mut logits = vec![0.0; tk];
            for (j, logit) in logits.iter_mut().enumerate() {
                let mut dot = 0.0;
                for p in 0..dk {
                    dot += q[i * dm + off + p] * k[j * dm + off + p];
                }
                *logit = dot * scale;
            }
            let probs = crate::ops::softmax(&logits);
            head_attn[i * tk..(i + 1) * tk].copy_from_slice(&probs);
            for p in 0..dk {
                let mut acc = 0.0;
                for (j, pr) in probs.iter().enumerate() {
                    acc += pr * v[j * dm + off + p];
                }
                concat[i * dm + off + p] = acc;
            }
        }
        attn.push(head_attn);
    }
    let out = matmul(&concat, params.wo.data(), tq, dm, dm);

    Ok((
        Tensor::new(vec![tq, dm], out)?,
        MhaCache {
            q_in: q_in.clone(),
            k_in: k_in.clone(),
            v_in: v_in.clone(),
            q,
            k,
            v,
            attn,
            concat,
        },
    ))
}

pub struct MhaGrads {
    pub wq: Tensor,
    pub wk: Tensor,
    pub wv: Tensor,
    pub wo: Tensor,
}

/// Backward pass; returns input gradients (q, k, v order) and parameter
/// gradients.
pub fn mha_backward(
    params: &MhaParams,
    cache: &MhaCache,
    d_out: &Tensor,
) -> Result<(Tensor, Tensor, Tensor, MhaGrads)> {
    let dm = params.d_model;
    let dk = params.d_k;
    let tq = cache.q_in.shape()[0];
    let tk = cache.k_in.shape()[0];
    let scale = 1.0 / (dk as f64).sqrt();

    let d_wo = matmul_tn(&cache.concat, d_out.data(), tq, dm, dm);
    let d_concat = matmul_nt(d_out.data(), params.wo.data(), tq, dm, dm);

    let mut dq = vec![0.0; tq * dm];
    let mut dkm = vec![0.0; tk * dm];
    let mut dv = vec![0.0; tk * dm];
    for h in 0..params.heads {
        let off = h * dk;
        let head_attn = &cache.attn[h];
        for i in 0..tq {
            // dA row and dV accumulation
            let mut d_attn_row = vec![0.0; tk];
            for j in 0..tk {
                let mut acc = 0.0;
                for p in 0..dk {
                    acc += d_concat[i * dm + off + p] * cache.v[j * dm + off + p];
                }
                d_attn_row[j] = acc;
            }
            let probs = &head_attn[i * tk..(i + 1) * tk];
            for (j, &pr) in probs.iter().enumerate() {
                for p in 0..dk {
                    dv[j * dm + off + p] += pr * d_concat[i * dm + off + p];
                }
            }
            let d_scores = softmax_backward(probs, &d_attn_row);
            for (j, &ds) in d_scores.iter().enumerate() {
                if ds == 0.0 {
                    continue;
                }
                let ds = ds * scale;
                for p in 0..dk {
                    dq[i * dm + off + p] += ds * cache.k[j * dm + off + p];
                    dkm[j * dm + off + p] += ds * cache.q[i * dm + off + p];
                }
            }
        }
    }

    let d_wq = matmul_tn(cache.q_in.data(), &dq, tq, dm, dm);
    let d_wk = matmul_tn(cache.k_in.data(), &dkm, tk, dm, dm);
    let d_wv = matmul_tn(cache.v_in.data(), &dv, tk, dm, dm);
    let d_q_in = matmul_nt(&dq, params.wq.data(), tq, dm, dm);
    let d_k_in = matmul_nt(&dkm, params.wk.data(), tk, dm, dm);
    let d_v_in = matmul_nt(&dv, params.wv.data(), tk, dm, dm);

    Ok((
        Tensor::new(vec![tq, dm], d_q_in)?,
        Tensor::new(vec![tk, dm], d_k_in)?,
        Tensor::new(vec![tk, dm], d_v_in)?,
        MhaGrads {
            wq: Tensor::new(vec![dm, dm], d_wq)?,
            wk: Tensor::new(vec![dm, dm], d_wk)?,
            wv: Tensor::new(vec![dm, dm], d_wv)?,
            wo: Tensor::new(vec![dm, dm], d_wo)?,
        },
    ))
}

/// A single network layer.
#[derive(Debug, Clone, PartialEq)]
pub enum Layer {
    Dense {
        w: Tensor, // [out, in]
        b: Tensor, // [out]
        activation: Activation,
    },
    Conv2d {
        w: Tensor, // [oc, ic, k, k]
        b: Tensor, // [oc]
        activation: Activation,
    },
    MaxPool {
        k: usize,
    },
    Mha(MhaParams),
    Quantum {
        qubits: usize,
        layers: usize,
        angles: Tensor, // [layers, qubits]
    },
    /// Marks the logits output; the loss applies softmax + cross-entropy.
    SoftmaxHead,
}

#[derive(Debug, Clone)]
pub enum LayerCache {
    Dense { x: Vec<f64>, z: Vec<f64> },
    Conv2d { x: Tensor, z: Tensor },
    MaxPool { in_shape: Vec<usize>, argmax: Vec<usize> },
    Mha(MhaCache),
    Quantum { x: Vec<f64> },
    SoftmaxHead,
}

impl Layer {
    pub fn params(&self) -> Vec<&Tensor> {
        match self {
            Layer::Dense { w, b, .. } => vec![w, b],
            Layer::Conv2d { w, b, .. } => vec![w, b],
            Layer::MaxPool { .. } | Layer::SoftmaxHead => vec![],
            Layer::Mha(p) => vec![&p.wq, &p.wk, &p.wv, &p.wo],
            Layer::Quantum { angles, .. } => vec![angles],
        }
    }

    pub fn params_mut(&mut self) -> Vec<&mut Tensor> {
        match self {
            Layer::Dense { w, b, .. } => vec![w, b],
            Layer::Conv2d { w, b, .. } => vec![w, b],
            Layer::MaxPool { .. } | Layer::SoftmaxHead => vec![],
            Layer::Mha(p) => vec![&mut p.wq, &mut p.wk, &mut p.wv, &mut p.wo],
            Layer::Quantum { angles, .. } => vec![angles],
        }
    }

    pub fn param_names(&self) -> Vec<&'static str> {
        match self {
            Layer::Dense { .. } => vec!["dense.w", "dense.b"],
            Layer::Conv2d { .. } => vec!["conv2d.w", "conv2d.b"],
            Layer::MaxPool { .. } | Layer::SoftmaxHead => vec![],
            Layer::Mha(_) => vec!["mha.wq", "mha.wk", "mha.wv", "mha.wo"],
            Layer::Quantum { .. } => vec!["quantum.angles"],
        }
    }

    /// Output shape for a given input shape; errors if they do not compose.
    pub fn out_shape(&self, in_shape: &[usize]) -> Result<Vec<usize>> {
        match self {
            Layer::Dense { w, .. } => {
                let (out, inp) = (w.shape()[0], w.shape()[1]);
                let flat: usize = in_shape.iter().product();
                if flat != inp {
                    return Err(ModelError::Shape(format!(
                        "dense expects {inp} inputs, got {flat} from {in_shape:?}"
                    )));
                }
                Ok(vec![out])
            }
            Layer::Conv2d { w, .. } => {
                let (oc, ic, k) = (w.shape()[0], w.shape()[1], w.shape()[2]);
                if in_shape.len() != 3 || in_shape[0] != ic {
                    return Err(ModelError::Shape(format!(
                        "conv2d expects [{ic}, h, w], got {in_shape:?}"
                    )));
                }
                let (h, wd) = (in_shape[1], in_shape[2]);
                if h < k || wd < k {
                    return Err(ModelError::Shape(format!(
                        "conv2d kernel {k} larger than input {h}x{wd}"
                    )));
                }
                Ok(vec![oc, h - k + 1, wd - k + 1])
            }
            Layer::MaxPool { k } => {
                if in_shape.len() != 3 {
                    return Err(ModelError::Shape(format!(
                        "maxpool expects [c, h, w], got {in_shape:?}"
                    )));
                }
                let (c, h, wd) = (in_shape[0], in_shape[1], in_shape[2]);
                if h / k == 0 || wd / k == 0 {
                    return Err(ModelError::Shape(format!(
                        "maxpool window {k} larger than input {h}x{wd}"
                    )));
                }
                Ok(vec![c, h / k, wd / k])
            }
            Layer::Mha(p) => {
                if in_shape.len() != 2 || in_shape[1] != p.d_model {
                    return Err(ModelError::Shape(format!(
                        "attention expects [tokens, {}], got {in_shape:?}",
                        p.d_model
                    )));
                }
                Ok(in_shape.to_vec())
            }
            Layer::Quantum { qubits, .. } => {
                let flat: usize = in_shape.iter().product();
                if flat != *qubits {
                    return Err(ModelError::Shape(format!(
                        "quantum layer expects {qubits} features, got {flat}"
                    )));
                }
                Ok(vec![*qubits])
            }
            Layer::SoftmaxHead => Ok(in_shape.to_vec()),
        }
    }

    pub fn forward(&self, x: &Tensor) -> Result<(Tensor, LayerCache)> {
        match self {
            Layer::Dense { w, b, activation } => {
                let (out_dim, in_dim) = (w.shape()[0], w.shape()[1]);
                if x.len() != in_dim {
                    return Err(ModelError::Shape(format!(
                        "dense input {} != {in_dim}",
                        x.len()
                    )));
                }
                let mut z = b.data().to_vec();
                for o in 0..out_dim {
                    let row = &w.data()[o * in_dim..(o + 1) * in_dim];
                    z[o] += row.iter().zip(x.data()).map(|(wi, xi)| wi * xi).sum::<f64>();
                }
                let y: Vec<f64> = z.iter().map(|&v| activation.apply(v)).collect();
                Ok((
                    Tensor::new(vec![out_dim], y)?,
                    LayerCache::Dense {
                        x: x.data().to_vec(),
                        z,
                    },
                ))
            }
            Layer::Conv2d { w, b, activation } => {
                let (oc, ic, k) = (w.shape()[0], w.shape()[1], w.shape()[2]);
                let (h, wd) = (x.shape()[1], x.shape()[2]);
                if x.shape().len() != 3 || x.shape()[0] != ic {
                    return Err(ModelError::Shape("conv2d input shape".into()));
                }
                let (oh, ow) = (h - k + 1, wd - k + 1);
                let mut z = vec![0.0; oc * oh * ow];
                for o in 0..oc {
                    for i in 0..oh {
                        for j in 0..ow {
                            let mut acc = b.data()[o];
                            for c in 0..ic {
                                for u in 0..k {
                                    for v in 0..k {
                                        acc += w.data()[((o * ic + c) * k + u) * k + v]
                                            * x.data()[(c * h + i + u) * wd + j + v];
                                    }
                                }
                            }
                            z[(o * oh + i) * ow + j] = acc;
                        }
                    }
                }
                let y: Vec<f64> = z.iter().map(|&v| activation.apply(v)).collect();
                let z_t = Tensor::new(vec![oc, oh, ow], z)?;
                Ok((
                    Tensor::new(vec![oc, oh, ow], y)?,
                    LayerCache::Conv2d {
                        x: x.clone(),
                        z: z_t,
                    },
                ))
            }
            Layer::MaxPool { k } => {
                let (c, h, wd) = (x.shape()[0], x.shape()[1], x.shape()[2]);
                let (oh, ow) = (h / k, wd / k);
                let mut out = vec![0.0; c * oh * ow];
                let mut argmax = vec![0usize; c * oh * ow];
                for ch in 0..c {
                    for i in 0..oh {
                        for j in 0..ow {
                            let mut best = f64::NEG_INFINITY;
                            let mut best_idx = 0;
                            for u in 0..*k {
                                for v in 0..*k {
                                    let idx = (ch * h + i * k + u) * wd + j * k + v;
                                    if x.data()[idx] > best {
                                        best = x.data()[idx];
                                        best_idx = idx;
                                    }
                                }
                            }
                            out[(ch * oh + i) * ow + j] = best;
                            argmax[(ch * oh + i) * ow + j] = best_idx;
                        }
                    }
                }
                Ok((
                    Tensor::new(vec![c, oh, ow], out)?,
                    LayerCache::MaxPool {
                        in_shape: x.shape().to_vec(),
                        argmax,
                    },
                ))
            }
            Layer::Mha(p) => {
                let (out, cache) = mha_forward(x, x, x, p)?;
                Ok((out, LayerCache::Mha(cache)))
            }
            Layer::Quantum {
                qubits,
                layers,
                angles,
            } => {
                let config = PqcConfig::new(*qubits, *layers, angles.data().to_vec())?;
                let out = quantum_layer_forward(x.data(), &config)?;
                Ok((
                    Tensor::new(vec![*qubits], out)?,
                    LayerCache::Quantum {
                        x: x.data().to_vec(),
                    },
                ))
            }
            Layer::SoftmaxHead => Ok((x.clone(), LayerCache::SoftmaxHead)),
        }
    }

    /// Returns (input gradient, parameter gradients in params() order).
    pub fn backward(&self, cache: &LayerCache, dy: &Tensor) -> Result<(Tensor, Vec<Tensor>)> {
        match (self, cache) {
            (Layer::Dense { w, activation, .. }, LayerCache::Dense { x, z }) => {
                let (out_dim, in_dim) = (w.shape()[0], w.shape()[1]);
                let dz: Vec<f64> = dy
                    .data()
                    .iter()
                    .zip(z)
                    .map(|(dyi, &zi)| dyi * activation.derivative(zi))
                    .collect();
                let mut dw = vec![0.0; out_dim * in_dim];
                let mut dx = vec![0.0; in_dim];
                for o in 0..out_dim {
                    let dzo = dz[o];
                    for i in 0..in_dim {
                        dw[o * in_dim + i] = dzo * x[i];
                        dx[i] += dzo * w.data()[o * in_dim + i];
                    }
                }
                Ok((
                    Tensor::new(vec![in_dim], dx)?,
                    vec![
                        Tensor::new(vec![out_dim, in_dim], dw)?,
                        Tensor::new(vec![out_dim], dz)?,
                    ],
                ))
            }
            (Layer::Conv2d { w, activation, .. }, LayerCache::Conv2d { x, z }) => {
                let (oc, ic, k) = (w.shape()[0], w.shape()[1], w.shape()[2]);
                let (h, wd) = (x.shape()[1], x.shape()[2]);
                let (oh, ow) = (h - k + 1, wd - k + 1);
                let mut dz = vec![0.0; oc * oh * ow];
                for (i, d) in dz.iter_mut().enumerate() {
                    *d = dy.data()[i] * activation.derivative(z.data()[i]);
                }
                let mut dw = vec![0.0; oc * ic * k * k];
                let mut db = vec![0.0; oc];
                let mut dx = vec![0.0; ic * h * wd];
                for o in 0..oc {
                    for i in 0..oh {
                        for j in 0..ow {
                            let g = dz[(o * oh + i) * ow + j];
                            if g == 0.0 {
                                continue;
                            }
                            db[o] += g;
                            for c in 0..ic {
                                for u in 0..k {
                                    for v in 0..k {
                                        dw[((o * ic + c) * k + u) * k + v] +=
                                            g * x.data()[(c * h + i + u) * wd + j + v];
                                        dx[(c * h + i + u) * wd + j + v] +=
                                            g * w.data()[((o * ic + c) * k + u) * k + v];
                                    }
                                }
                            }
                        }
                    }
                }
                Ok((
                    Tensor::new(vec![ic, h, wd], dx)?,
                    vec![
                        Tensor::new(vec![oc, ic, k, k], dw)?,
                        Tensor::new(vec![oc], db)?,
                    ],
                ))
            }
            (Layer::MaxPool { .. }, LayerCache::MaxPool { in_shape, argmax }) => {
                let mut dx = vec![0.0; in_shape.iter().product()];
                for (out_idx, &in_idx) in argmax.iter().enumerate() {
                    dx[in_idx] += dy.data()[out_idx];
                }
                Ok((Tensor::new(in_shape.clone(), dx)?, vec![]))
            }
            (Layer::Mha(p), LayerCache::Mha(cache)) => {
                let (dq, dk, dv, grads) = mha_backward(p, cache, dy)?;
                let mut dx = dq;
                for (d, (a, b)) in dx
                    .data_mut()
                    .iter_mut()
                    .zip(dk.data().iter().zip(dv.data()))
                {
                    *d += a + b;
                }
                Ok((dx, vec![grads.wq, grads.wk, grads.wv, grads.wo]))
            }
            (
                Layer::Quantum {
                    qubits,
                    layers,
                    angles,
                },
                LayerCache::Quantum { x },
            ) => {
                let config = PqcConfig::new(*qubits, *layers, angles.data().to_vec())?;
                let d_angles = param_shift_grad(x, &config, dy.data())?;
                let dx = param_shift_input_grad(x, &config, dy.data())?;
                Ok((
                    Tensor::new(vec![*qubits], dx)?,
                    vec![Tensor::new(vec![*layers, *qubits], d_angles)?],
                ))
            }
            (Layer::SoftmaxHead, LayerCache::SoftmaxHead) => Ok((dy.clone(), vec![])),
            _ => Err(ModelError::Config("cache does not match layer".into())),
        }
    }
}
