use ndarray::{s, Array2, ArrayView2, Axis};

use crate::params::ModelParams;

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Activations of a batched GRU pass, one entry per step.
pub(crate) struct GruTrace {
    /// Hidden states `h₀ … h_Q`, each `B × H`.
    pub h: Vec<Array2<f64>>,
    pub r: Vec<Array2<f64>>,
    pub z: Vec<Array2<f64>>,
    pub n: Vec<Array2<f64>>,
    /// Recurrent candidate term `h·W_hn + b_hn`.
    pub gh_n: Vec<Array2<f64>>,
}

impl GruTrace {
    pub fn last(&self) -> &Array2<f64> {
        self.h.last().expect("h0 is always present")
    }
}

/// Runs the cell over `xs` (one `B × d_v` input per step) from `h₀ = 0`:
/// `r = σ(x W_r + b_r + h U_r + c_r)`, `z = σ(…)`,
/// `n = tanh(x W_n + b_n + r ⊙ (h U_n + c_n))`, `h' = (1 − z) ⊙ n + z ⊙ h`.
pub(crate) fn gru_forward(xs: &[ArrayView2<f64>], p: &ModelParams) -> GruTrace {
    let hd = p.cfg.gru_hidden;
    let b = xs.first().map_or(0, |x| x.nrows());
    let mut tr = GruTrace { h: vec![Array2::zeros((b, hd))], r: vec![], z: vec![], n: vec![], gh_n: vec![] };
    for x in xs {
        let h = tr.last();
        let gx = x.dot(&p.gru_wx) + &p.gru_bx;
        let gh = h.dot(&p.gru_wh) + &p.gru_bh;
        let r = (&gx.slice(s![.., ..hd]) + &gh.slice(s![.., ..hd])).mapv_into(sigmoid);
        let z = (&gx.slice(s![.., hd..2 * hd]) + &gh.slice(s![.., hd..2 * hd])).mapv_into(sigmoid);
        let gh_n = gh.slice(s![.., 2 * hd..]).to_owned();
        let n = (&gx.slice(s![.., 2 * hd..]) + &(&r * &gh_n)).mapv_into(f64::tanh);
        let mut h_next = &n * &z.mapv(|z| 1.0 - z);
        h_next += &(&z * h);
        tr.h.push(h_next);
        tr.r.push(r);
        tr.z.push(z);
        tr.n.push(n);
        tr.gh_n.push(gh_n);
    }
    tr
}

/// Backpropagates `∂L/∂h_Q` through time; accumulates GRU gradients into `g`
/// and returns `∂L/∂x` for every step.
pub(crate) fn gru_backward(xs: &[ArrayView2<f64>], tr: &GruTrace, d_last: Array2<f64>, p: &ModelParams, g: &mut ModelParams) -> Vec<Array2<f64>> {
    let hd = p.cfg.gru_hidden;
    let steps = xs.len();
    let mut dxs = vec![Array2::zeros((0, 0)); steps];
    let mut dh = d_last;
    for q in (0..steps).rev() {
        let (h_prev, r, z, n, gh_n) = (&tr.h[q], &tr.r[q], &tr.z[q], &tr.n[q], &tr.gh_n[q]);
        let b = dh.nrows();
        let mut dgx = Array2::zeros((b, 3 * hd));
        let mut dgh = Array2::zeros((b, 3 * hd));
        // h' = (1 − z) n + z h
        let dn_pre = {
            let mut d = &dh * &z.mapv(|z| 1.0 - z);
            d.zip_mut_with(n, |d, n| *d *= 1.0 - n * n);
            d
        };
        let mut dz_pre = &dh * &(h_prev - n);
        dz_pre.zip_mut_with(z, |d, z| *d *= z * (1.0 - z));
        let mut dr_pre = &dn_pre * gh_n;
        dr_pre.zip_mut_with(r, |d, r| *d *= r * (1.0 - r));

        dgx.slice_mut(s![.., ..hd]).assign(&dr_pre);
        dgx.slice_mut(s![.., hd..2 * hd]).assign(&dz_pre);
        dgx.slice_mut(s![.., 2 * hd..]).assign(&dn_pre);
        dgh.slice_mut(s![.., ..hd]).assign(&dr_pre);
        dgh.slice_mut(s![.., hd..2 * hd]).assign(&dz_pre);
        dgh.slice_mut(s![.., 2 * hd..]).assign(&(&dn_pre * r));

        g.gru_wx += &xs[q].t().dot(&dgx);
        g.gru_bx += &dgx.sum_axis(Axis(0));
        g.gru_wh += &h_prev.t().dot(&dgh);
        g.gru_bh += &dgh.sum_axis(Axis(0));
        dxs[q] = dgx.dot(&p.gru_wx.t());
        let mut dh_prev = &dh * z;
        dh_prev += &dgh.dot(&p.gru_wh.t());
        dh = dh_prev;
    }
    dxs
}
