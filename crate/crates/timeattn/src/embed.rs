use ndarray::{Array1, Array2, ArrayView1, ArrayViewMut1, Axis};

use crate::config::ModelConfig;
use crate::error::{ModelError, Result};
use crate::params::ModelParams;

/// `φ(t)`: element 0 is `ω₀t + α₀`, element `i > 0` is `sin(ωᵢt + αᵢ)`.
pub fn time_embed(t: f64, params: &ModelParams) -> Array1<f64> {
    embed_times(&[t], params.time_w.view(), params.time_b.view()).row(0).to_owned()
}

pub(crate) fn embed_times(ts: &[f64], w: ArrayView1<f64>, b: ArrayView1<f64>) -> Array2<f64> {
    let mut out = Array2::zeros((ts.len(), w.len()));
    for (mut row, &t) in out.axis_iter_mut(Axis(0)).zip(ts) {
        for (i, x) in row.iter_mut().enumerate() {
            let a = w[i] * t + b[i];
            *x = if i == 0 { a } else { a.sin() };
        }
    }
    out
}

/// Accumulates `∂L/∂ω` and `∂L/∂α` given `∂L/∂φ` at each time.
pub(crate) fn embed_times_backward(
    ts: &[f64],
    w: ArrayView1<f64>,
    b: ArrayView1<f64>,
    d_phi: &Array2<f64>,
    mut gw: ArrayViewMut1<f64>,
    mut gb: ArrayViewMut1<f64>,
) {
    for (row, &t) in d_phi.axis_iter(Axis(0)).zip(ts) {
        for (i, &d) in row.iter().enumerate() {
            let da = if i == 0 { d } else { d * (w[i] * t + b[i]).cos() };
            gw[i] += da * t;
            gb[i] += da;
        }
    }
}

/// `Q` evenly spaced reference times `q / (Q − 1)`.
pub fn reference_times(q_refs: usize) -> Vec<f64> {
    (0..q_refs).map(|q| q as f64 / (q_refs - 1) as f64).collect()
}

/// Encoder input for a batch of rows: the values, followed by the mask bits
/// when the model is configured to see them.
pub(crate) fn encoder_input(values: &[f64], masks: &[bool], rows: usize, cfg: &ModelConfig) -> Result<Array2<f64>> {
    let g = cfg.grid_size;
    if values.len() != rows * g || masks.len() != rows * g {
        return Err(ModelError::Shape(format!(
            "expected {rows}x{g} values and masks, got {} and {}",
            values.len(),
            masks.len()
        )));
    }
    let mut x = Array2::zeros((rows, cfg.enc_in()));
    for r in 0..rows {
        for j in 0..g {
            let (v, m) = (values[r * g + j], masks[r * g + j]);
            x[[r, j]] = if m { v } else { 0.0 };
            if cfg.use_mask_features {
                x[[r, g + j]] = f64::from(u8::from(m));
            }
        }
    }
    Ok(x)
}

/// `h = tanh(x̃ · A + b)` where `x̃` is `x` with masked entries zeroed, and in
/// mask-feature mode `[x̃, m]`.
pub fn value_embed(x: &[f64], m: &[bool], params: &ModelParams) -> Result<Array1<f64>> {
    let input = encoder_input(x, m, 1, &params.cfg)?;
    let pre = input.dot(&params.enc_w) + &params.enc_b;
    Ok(pre.row(0).mapv(f64::tanh))
}
