use ndarray::{Array2, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use unifi_core::SanitizedWindow;

use crate::attention::{attend_backward, attend_queries, encode};
use crate::config::{ModelConfig, TrainConfig};
use crate::error::{ModelError, Result};
use crate::params::ModelParams;
use crate::train::{Adam, EpochLog};

/// A reconstruction example: observations in, values at target times out.
/// Only target entries whose mask is set contribute to the loss.
#[derive(Debug, Clone, PartialEq)]
pub struct ReconSample {
    pub input: SanitizedWindow,
    pub target_ts: Vec<f64>,
    /// Row-major `R × G`.
    pub target_values: Vec<f64>,
    pub target_masks: Vec<bool>,
}

/// Splits a window into observed and held-out rows: about `frac` of the rows
/// become targets, the rest the input. `None` if the window has fewer than
/// two rows.
pub fn holdout_sample(window: &SanitizedWindow, frac: f64, seed: u64) -> Option<ReconSample> {
    let n = window.rows();
    if n < 2 {
        return None;
    }
    let held = ((n as f64 * frac).round() as usize).clamp(1, n - 1);
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut is_target = vec![false; n];
    idx[..held].iter().for_each(|&i| is_target[i] = true);

    let g = window.grid_size;
    let (mut iv, mut im, mut it) = (Vec::new(), Vec::new(), Vec::new());
    let (mut tv, mut tm, mut tt) = (Vec::new(), Vec::new(), Vec::new());
    for (q, &target) in is_target.iter().enumerate() {
        let (v, m, t) = if target { (&mut tv, &mut tm, &mut tt) } else { (&mut iv, &mut im, &mut it) };
        v.extend_from_slice(window.row(q));
        m.extend_from_slice(window.mask_row(q));
        t.push(window.ts[q]);
    }
    let input = SanitizedWindow::new(window.t0_us, window.win_us, g, iv, im, it, window.label)
        .expect("subset of a valid window");
    Some(ReconSample { input, target_ts: tt, target_values: tv, target_masks: tm })
}

/// Values at `target_ts` (`R × G`): attention queried at the target times,
/// mapped through the reconstruction head.
pub fn reconstruct(window: &SanitizedWindow, params: &ModelParams, target_ts: &[f64]) -> Result<Array2<f64>> {
    let enc = encode(window, params)?;
    let att = attend_queries(&enc, target_ts, params);
    Ok(att.out.dot(&params.recon_w) + &params.recon_b)
}

/// Mean squared error over all unmasked target entries of the batch, and
/// its gradient. The GRU and classifier head get zero gradients.
pub fn recon_loss_and_grad(batch: &[&ReconSample], params: &ModelParams) -> Result<(f64, ModelParams)> {
    let g_size = params.cfg.grid_size;
    let mut passes = Vec::with_capacity(batch.len());
    let mut count = 0usize;
    for s in batch {
        let r = s.target_ts.len();
        if s.target_values.len() != r * g_size || s.target_masks.len() != r * g_size {
            return Err(ModelError::Shape("target shape does not match the grid".into()));
        }
        count += s.target_masks.iter().filter(|m| **m).count();
        let enc = encode(&s.input, params)?;
        let att = attend_queries(&enc, &s.target_ts, params);
        passes.push((enc, att));
    }
    if count == 0 {
        return Err(ModelError::Arg("batch has no unmasked target entries".into()));
    }
    let n = count as f64;
    let mut loss = 0.0;
    let mut g = params.zeros_like();
    for (s, (enc, att)) in batch.iter().zip(&passes) {
        let y = att.out.dot(&params.recon_w) + &params.recon_b;
        let mut d_y = Array2::zeros(y.raw_dim());
        for ((idx, &yv), (&t, &m)) in y.indexed_iter().zip(s.target_values.iter().zip(&s.target_masks)) {
            if m {
                let e = yv - t;
                loss += e * e;
                d_y[idx] = 2.0 * e / n;
            }
        }
        g.recon_w += &att.out.t().dot(&d_y);
        g.recon_b += &d_y.sum_axis(Axis(0));
        let d_out = d_y.dot(&params.recon_w.t());
        attend_backward(enc, att, d_out.view(), params, &mut g);
    }
    let loss = loss / n;
    if !loss.is_finite() {
        return Err(ModelError::NonFinite { what: "reconstruction loss".into() });
    }
    g.check_finite("gradient")?;
    Ok((loss, g))
}

/// Trains the attention stack and reconstruction head on MSE with Adam.
pub fn train_recon(samples: &[ReconSample], cfg: &ModelConfig, tc: &TrainConfig) -> Result<(ModelParams, Vec<EpochLog>)> {
    tc.validate()?;
    if samples.is_empty() {
        return Err(ModelError::Arg("no reconstruction samples".into()));
    }
    let mut params = ModelParams::init(cfg, tc.seed)?;
    let mut adam = Adam::new(&params, tc.lr);
    let mut rng = ChaCha8Rng::seed_from_u64(tc.seed ^ 0x2EC0_5EED);
    let mut order: Vec<usize> = (0..samples.len()).collect();
    let mut history = Vec::with_capacity(tc.epochs);
    for epoch in 1..=tc.epochs {
        let last_good = params.clone();
        order.shuffle(&mut rng);
        let (mut total, mut batches) = (0.0, 0);
        for chunk in order.chunks(tc.batch) {
            let batch: Vec<&ReconSample> = chunk.iter().map(|&i| &samples[i]).collect();
            let (loss, grad) = match recon_loss_and_grad(&batch, &params) {
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
        history.push(EpochLog { epoch, train_loss: total / batches as f64, val_acc: None });
    }
    Ok((params, history))
}
