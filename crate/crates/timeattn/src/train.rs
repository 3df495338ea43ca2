use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use unifi_core::SanitizedWindow;

use crate::config::{ModelConfig, TrainConfig};
use crate::error::{ModelError, Result};
use crate::model::{accuracy, loss_and_grad};
use crate::params::ModelParams;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochLog {
    pub epoch: usize,
    /// Mean of the mini-batch losses over the epoch.
    pub train_loss: f64,
    /// `None` without a validation set.
    pub val_acc: Option<f64>,
}

/// Adam with bias correction (`β₁ = 0.9`, `β₂ = 0.999`, `ε = 1e−8`).
pub struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    m: ModelParams,
    v: ModelParams,
    t: i32,
}

impl Adam {
    pub fn new(params: &ModelParams, lr: f64) -> Self {
        Adam { lr, beta1: 0.9, beta2: 0.999, eps: 1e-8, m: params.zeros_like(), v: params.zeros_like(), t: 0 }
    }

    pub fn step(&mut self, params: &mut ModelParams, grad: &ModelParams) {
        self.t += 1;
        let (b1, b2) = (self.beta1, self.beta2);
        let c1 = 1.0 - b1.powi(self.t);
        let c2 = 1.0 - b2.powi(self.t);
        let step = self.lr * c2.sqrt() / c1;
        let eps_hat = self.eps * c2.sqrt();
        let tensors = params
            .tensors_mut()
            .into_iter()
            .zip(grad.tensors())
            .zip(self.m.tensors_mut())
            .zip(self.v.tensors_mut());
        for (((mut p, g), mut m), mut v) in tensors {
            ndarray::Zip::from(&mut p).and(&g).and(&mut m).and(&mut v).for_each(|p, &g, m, v| {
                *m = b1 * *m + (1.0 - b1) * g;
                *v = b2 * *v + (1.0 - b2) * g * g;
                *p -= step * *m / (v.sqrt() + eps_hat);
            });
        }
    }
}

/// Trains the classifier with Adam over shuffled mini-batches.
/// Deterministic for a given seed. With `epochs = 0` the freshly
/// initialized parameters are returned.
pub fn train(
    train_set: &[SanitizedWindow],
    val_set: &[SanitizedWindow],
    cfg: &ModelConfig,
    tc: &TrainConfig,
) -> Result<(ModelParams, Vec<EpochLog>)> {
    let params = ModelParams::init(cfg, tc.seed)?;
    train_from(params, train_set, val_set, tc)
}

/// Like [`train`], starting from the given parameters.
pub fn train_from(
    mut params: ModelParams,
    train_set: &[SanitizedWindow],
    val_set: &[SanitizedWindow],
    tc: &TrainConfig,
) -> Result<(ModelParams, Vec<EpochLog>)> {
    tc.validate()?;
    if train_set.is_empty() {
        return Err(ModelError::Arg("training set is empty".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(tc.seed ^ 0x7EA1_5EED);
    let mut adam = Adam::new(&params, tc.lr);
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    let val: Vec<&SanitizedWindow> = val_set.iter().collect();
    let mut history = Vec::with_capacity(tc.epochs);
    for epoch in 1..=tc.epochs {
        let last_good = params.clone();
        order.shuffle(&mut rng);
        let mut total = 0.0;
        let mut batches = 0;
        for chunk in order.chunks(tc.batch) {
            let batch: Vec<&SanitizedWindow> = chunk.iter().map(|&i| &train_set[i]).collect();
            let (loss, grad) = match loss_and_grad(&batch, &params) {
                Ok(r) => r,
                Err(ModelError::NonFinite { what }) => {
                    return Err(ModelError::Diverged { epoch, what, last_good: Box::new(last_good) })
                }
                Err(e) => return Err(e),
            };
            adam.step(&mut params, &grad);
            total += loss;
            batches += 1;
        }
        if let Err(ModelError::NonFinite { what }) = params.check_finite("parameter") {
            return Err(ModelError::Diverged { epoch, what, last_good: Box::new(last_good) });
        }
        let val_acc = if val.is_empty() { None } else { Some(accuracy(&val, &params)?) };
        history.push(EpochLog { epoch, train_loss: total / batches as f64, val_acc });
    }
    Ok((params, history))
}
