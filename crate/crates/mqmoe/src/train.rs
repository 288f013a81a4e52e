//! Mini-batch training for the mixture-of-experts model; mirrors the
//! single-modality trainer, with the loss summed over modality heads.

use hybrid_model::{adam_step, sgd_step, AdamState, OptimizerKind, TrainConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::{MqmoeError, MqmoeModel, MultiDataset, Result};

#[derive(Debug, Clone, Default)]
pub struct MultiTrainMetrics {
    /// Per-epoch total loss (summed over heads, averaged over samples).
    pub loss_history: Vec<f64>,
    /// Per-epoch accuracy per modality head.
    pub accuracy_history: Vec<Vec<f64>>,
}

pub fn train_mqmoe(
    model: &mut MqmoeModel,
    train: &MultiDataset,
    cfg: &TrainConfig,
) -> Result<MultiTrainMetrics> {
    if train.is_empty() {
        return Err(MqmoeError::Model(hybrid_model::ModelError::EmptyDataset));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(cfg.seed);
    let mut adam = AdamState::new(model.param_count());
    let mut metrics = MultiTrainMetrics::default();

    let mut order: Vec<usize> = (0..train.len()).collect();
    for _epoch in 0..cfg.epochs {
        for i in (1..order.len()).rev() {
            let j = rng.gen_range(0..=i);
            order.swap(i, j);
        }
        for batch in order.chunks(cfg.batch_size.max(1)) {
            let mut grad_acc = vec![0.0; model.param_count()];
            for &idx in batch {
                let sample = &train.samples[idx];
                let (_, grads) = model.backward(&sample.inputs, &sample.labels, None)?;
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
                OptimizerKind::Sgd => {
                    sgd_step(&mut flat.values, &grad_acc, cfg.learning_rate)
                        .map_err(MqmoeError::Model)?;
                }
                OptimizerKind::Adam => {
                    adam_step(&mut flat.values, &grad_acc, cfg.learning_rate, &mut adam)
                        .map_err(MqmoeError::Model)?;
                }
            }
            model.load_weights(&flat)?;
        }
        let eval = model.evaluate(train)?;
        metrics
            .loss_history
            .push(eval.iter().map(|(l, _)| l).sum::<f64>());
        metrics
            .accuracy_history
            .push(eval.iter().map(|(_, a)| *a).collect());
    }
    Ok(metrics)
}
