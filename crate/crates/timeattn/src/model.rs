use ndarray::{Array1, Array2, ArrayView2, Axis};
use unifi_core::SanitizedWindow;

use crate::attention::{attend_backward, attend_queries, encode, Attended, Encoded};
use crate::embed::reference_times;
use crate::error::{ModelError, Result};
use crate::gru::{gru_backward, gru_forward, GruTrace};
use crate::params::ModelParams;

struct BatchPass {
    windows: Vec<(Encoded, Attended)>,
    /// GRU inputs per reference time, each `B × d_v`.
    xs: Vec<Array2<f64>>,
    trace: GruTrace,
    logits: Array2<f64>,
}

fn batch_forward(batch: &[&SanitizedWindow], p: &ModelParams) -> Result<BatchPass> {
    let cfg = &p.cfg;
    let tq = reference_times(cfg.q_refs);
    let mut windows = Vec::with_capacity(batch.len());
    let mut xs = vec![Array2::zeros((batch.len(), cfg.d_v)); cfg.q_refs];
    for (b, w) in batch.iter().enumerate() {
        let enc = encode(w, p)?;
        let att = attend_queries(&enc, &tq, p);
        for (q, x) in xs.iter_mut().enumerate() {
            x.row_mut(b).assign(&att.out.row(q));
        }
        windows.push((enc, att));
    }
    let views: Vec<ArrayView2<f64>> = xs.iter().map(|x| x.view()).collect();
    let trace = gru_forward(&views, p);
    let logits = trace.last().dot(&p.head_w) + &p.head_b;
    Ok(BatchPass { windows, xs, trace, logits })
}

/// Class logits for one window.
pub fn forward(window: &SanitizedWindow, params: &ModelParams) -> Result<Array1<f64>> {
    Ok(logits_batch(&[window], params)?.row(0).to_owned())
}

/// Logits for several windows at once, one row per window.
pub fn logits_batch(windows: &[&SanitizedWindow], params: &ModelParams) -> Result<Array2<f64>> {
    if windows.is_empty() {
        return Ok(Array2::zeros((0, params.cfg.n_classes)));
    }
    Ok(batch_forward(windows, params)?.logits)
}

/// Predicted class per window (ties go to the lower class).
pub fn predict(windows: &[&SanitizedWindow], params: &ModelParams) -> Result<Vec<usize>> {
    let mut out = Vec::with_capacity(windows.len());
    for chunk in windows.chunks(64) {
        let logits = logits_batch(chunk, params)?;
        out.extend(logits.axis_iter(Axis(0)).map(|row| {
            row.iter()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |best, (i, &x)| if x > best.1 { (i, x) } else { best })
                .0
        }));
    }
    Ok(out)
}

pub fn accuracy(windows: &[&SanitizedWindow], params: &ModelParams) -> Result<f64> {
    if windows.is_empty() {
        return Err(ModelError::Arg("no windows to evaluate".into()));
    }
    let pred = predict(windows, params)?;
    let hits = pred.iter().zip(windows).filter(|(p, w)| **p == w.label as usize).count();
    Ok(hits as f64 / windows.len() as f64)
}

fn log_softmax_rows(logits: &Array2<f64>) -> Array2<f64> {
    let mut out = logits.clone();
    for mut row in out.axis_iter_mut(Axis(0)) {
        let max = row.fold(f64::NEG_INFINITY, |m, &x| m.max(x));
        let lse = max + row.iter().map(|x| (x - max).exp()).sum::<f64>().ln();
        row -= lse;
    }
    out
}

/// Mean cross-entropy over the batch (labels taken from the windows) and its
/// exact gradient with respect to every parameter. The reconstruction head
/// gets a zero gradient.
pub fn loss_and_grad(batch: &[&SanitizedWindow], params: &ModelParams) -> Result<(f64, ModelParams)> {
    if batch.is_empty() {
        return Err(ModelError::Arg("empty batch".into()));
    }
    let c = params.cfg.n_classes;
    if let Some(w) = batch.iter().find(|w| w.label as usize >= c) {
        return Err(ModelError::Arg(format!("label {} outside {c} classes", w.label)));
    }
    let pass = batch_forward(batch, params)?;
    let n = batch.len() as f64;
    let logp = log_softmax_rows(&pass.logits);
    let loss = -batch.iter().enumerate().map(|(b, w)| logp[[b, w.label as usize]]).sum::<f64>() / n;
    if !loss.is_finite() {
        return Err(ModelError::NonFinite { what: "loss".into() });
    }

    let mut g = params.zeros_like();
    let mut d_logits = logp.mapv(f64::exp);
    for (b, w) in batch.iter().enumerate() {
        d_logits[[b, w.label as usize]] -= 1.0;
    }
    d_logits /= n;
    let h_last = pass.trace.last();
    g.head_w = h_last.t().dot(&d_logits);
    g.head_b = d_logits.sum_axis(Axis(0));
    let d_h = d_logits.dot(&params.head_w.t());

    let views: Vec<ArrayView2<f64>> = pass.xs.iter().map(|x| x.view()).collect();
    let d_xs = gru_backward(&views, &pass.trace, d_h, params, &mut g);
    let mut d_out = Array2::zeros((params.cfg.q_refs, params.cfg.d_v));
    for (b, (enc, att)) in pass.windows.iter().enumerate() {
        for (q, dx) in d_xs.iter().enumerate() {
            d_out.row_mut(q).assign(&dx.row(b));
        }
        attend_backward(enc, att, d_out.view(), params, &mut g);
    }
    g.check_finite("gradient")?;
    Ok((loss, g))
}
