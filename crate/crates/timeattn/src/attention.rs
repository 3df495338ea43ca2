use ndarray::{s, Array2, ArrayView2, Axis};
use unifi_core::SanitizedWindow;

use crate::embed::{embed_times, embed_times_backward, encoder_input, reference_times};
use crate::error::{ModelError, Result};
use crate::params::ModelParams;

/// Per-window activations on the observation side of attention.
pub(crate) struct Encoded {
    pub ts: Vec<f64>,
    pub x: Array2<f64>,
    /// `tanh(x·A + b)`.
    pub h: Array2<f64>,
    pub phi: Array2<f64>,
    /// `h · W_h`.
    pub e: Array2<f64>,
    /// Key inputs: `e + φ·U_t`, or `φ·U_t` without content-aware keys.
    pub c: Array2<f64>,
    pub k: Array2<f64>,
    pub v: Array2<f64>,
}

/// Query-side activations for one set of query times.
pub(crate) struct Attended {
    pub tq: Vec<f64>,
    pub phi_q: Array2<f64>,
    pub qm: Array2<f64>,
    /// Attention weights per head, `R × T`.
    pub attn: Vec<Array2<f64>>,
    /// `R × d_v`.
    pub out: Array2<f64>,
}

pub(crate) fn encode(w: &SanitizedWindow, p: &ModelParams) -> Result<Encoded> {
    let cfg = &p.cfg;
    if w.rows() == 0 {
        return Err(ModelError::EmptyWindow);
    }
    if w.grid_size != cfg.grid_size {
        return Err(ModelError::Shape(format!(
            "window grid {} differs from model grid {}",
            w.grid_size, cfg.grid_size
        )));
    }
    let x = encoder_input(&w.values, &w.masks, w.rows(), cfg)?;
    let h = (x.dot(&p.enc_w) + &p.enc_b).mapv_into(f64::tanh);
    let phi = embed_times(&w.ts, p.time_w.view(), p.time_b.view());
    let e = h.dot(&p.w_h);
    let mut c = phi.dot(&p.u_t);
    if cfg.content_aware_keys {
        c += &e;
    }
    let k = c.dot(&p.w_k);
    let v = e.dot(&p.w_v);
    Ok(Encoded { ts: w.ts.clone(), x, h, phi, e, c, k, v })
}

pub(crate) fn attend_queries(enc: &Encoded, tq: &[f64], p: &ModelParams) -> Attended {
    let cfg = &p.cfg;
    let phi_q = embed_times(tq, p.time_w.view(), p.time_b.view());
    let qm = phi_q.dot(&p.w_q);
    let (hk, hv) = (cfg.d_k / cfg.n_heads, cfg.d_v / cfg.n_heads);
    let scale = 1.0 / (hk as f64).sqrt();
    let mut out = Array2::zeros((tq.len(), cfg.d_v));
    let mut attn = Vec::with_capacity(cfg.n_heads);
    for head in 0..cfg.n_heads {
        let q = qm.slice(s![.., head * hk..(head + 1) * hk]);
        let k = enc.k.slice(s![.., head * hk..(head + 1) * hk]);
        let mut a = q.dot(&k.t()) * scale;
        softmax_rows(&mut a);
        let v = enc.v.slice(s![.., head * hv..(head + 1) * hv]);
        out.slice_mut(s![.., head * hv..(head + 1) * hv]).assign(&a.dot(&v));
        attn.push(a);
    }
    Attended { tq: tq.to_vec(), phi_q, qm, attn, out }
}

fn softmax_rows(a: &mut Array2<f64>) {
    for mut row in a.axis_iter_mut(Axis(0)) {
        let max = row.fold(f64::NEG_INFINITY, |m, &x| m.max(x));
        row.mapv_inplace(|x| (x - max).exp());
        let sum = row.sum();
        row /= sum;
    }
}

/// Accumulates into `g` the gradients of every parameter feeding the
/// attention output, given `∂L/∂out`.
pub(crate) fn attend_backward(enc: &Encoded, att: &Attended, d_out: ArrayView2<f64>, p: &ModelParams, g: &mut ModelParams) {
    let cfg = &p.cfg;
    let (hk, hv) = (cfg.d_k / cfg.n_heads, cfg.d_v / cfg.n_heads);
    let scale = 1.0 / (hk as f64).sqrt();
    let t = enc.ts.len();
    let mut d_qm = Array2::zeros(att.qm.raw_dim());
    let mut d_k = Array2::zeros((t, cfg.d_k));
    let mut d_v = Array2::zeros((t, cfg.d_v));
    for (head, a) in att.attn.iter().enumerate() {
        let (ks, vs) = (s![.., head * hk..(head + 1) * hk], s![.., head * hv..(head + 1) * hv]);
        let du = d_out.slice(vs);
        d_v.slice_mut(vs).assign(&a.t().dot(&du));
        let da = du.dot(&enc.v.slice(vs).t());
        // Softmax backward, row by row: dS = A ⊙ (dA − Σ dA⊙A).
        let mut ds = &da * a;
        let row_dot = ds.sum_axis(Axis(1));
        ds -= &(a * &row_dot.insert_axis(Axis(1)));
        ds *= scale;
        d_qm.slice_mut(ks).assign(&ds.dot(&enc.k.slice(ks)));
        d_k.slice_mut(ks).assign(&ds.t().dot(&att.qm.slice(ks)));
    }

    // Queries.
    g.w_q += &att.phi_q.t().dot(&d_qm);
    let d_phi_q = d_qm.dot(&p.w_q.t());
    embed_times_backward(&att.tq, p.time_w.view(), p.time_b.view(), &d_phi_q, g.time_w.view_mut(), g.time_b.view_mut());

    // Keys and values.
    g.w_k += &enc.c.t().dot(&d_k);
    g.w_v += &enc.e.t().dot(&d_v);
    let d_c = d_k.dot(&p.w_k.t());
    let mut d_e = d_v.dot(&p.w_v.t());
    if cfg.content_aware_keys {
        d_e += &d_c;
    }
    g.u_t += &enc.phi.t().dot(&d_c);
    let d_phi = d_c.dot(&p.u_t.t());
    embed_times_backward(&enc.ts, p.time_w.view(), p.time_b.view(), &d_phi, g.time_w.view_mut(), g.time_b.view_mut());

    // Encoder.
    g.w_h += &enc.h.t().dot(&d_e);
    let mut d_pre = d_e.dot(&p.w_h.t());
    d_pre.zip_mut_with(&enc.h, |d, h| *d *= 1.0 - h * h);
    g.enc_w += &enc.x.t().dot(&d_pre);
    g.enc_b += &d_pre.sum_axis(Axis(0));
}

/// Attention output `U_out` (`Q × d_v`) of a window at the reference times.
pub fn attend(window: &SanitizedWindow, params: &ModelParams) -> Result<Array2<f64>> {
    let enc = encode(window, params)?;
    Ok(attend_queries(&enc, &reference_times(params.cfg.q_refs), params).out)
}

/// Attention weights per head at the reference times, each `Q × T′`.
pub fn attention_weights(window: &SanitizedWindow, params: &ModelParams) -> Result<Vec<Array2<f64>>> {
    let enc = encode(window, params)?;
    Ok(attend_queries(&enc, &reference_times(params.cfg.q_refs), params).attn)
}
