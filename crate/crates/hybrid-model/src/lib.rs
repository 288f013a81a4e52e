//! Minimal neural-network layers with explicit backpropagation, composing
//! classical dense/convolutional blocks with statevector quantum layers.
//!
//! Everything is f64 and deterministic: weight init, shuffling, and batch
//! accumulation are pure functions of the seed, so repeated runs produce
//! bit-identical weights.

mod checkpoint;
mod layers;
mod model;
mod ops;
mod optim;
mod tensor;

pub use checkpoint::{load_checkpoint, save_checkpoint, Checkpoint};
pub use layers::{
    mha_backward, mha_forward, Activation, Layer, LayerCache, MhaCache, MhaParams,
};
pub use model::{
    argmax, init_dense, init_mha, init_quantum, train_local, xavier_init, Dataset, FlatWeights,
    LayerSpec, Model, ModelSpec, TrainConfig, TrainMetrics, WeightManifest,
};
pub use ops::{cross_entropy, cross_entropy_grad, softmax};
pub use optim::{adam_step, sgd_step, AdamState, OptimizerKind};
pub use tensor::Tensor;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("bad layer configuration: {0}")]
    Config(String),
    #[error("empty dataset")]
    EmptyDataset,
    #[error("weight manifest mismatch: expected {expected}, got {got}")]
    ManifestMismatch { expected: String, got: String },
    #[error("quantum layer error: {0}")]
    Quantum(#[from] quantum_sim::QsimError),
    #[error("checkpoint i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("checkpoint parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, ModelError>;
