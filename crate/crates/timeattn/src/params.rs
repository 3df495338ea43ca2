use ndarray::{Array1, Array2, ArrayViewD, ArrayViewMutD};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::ModelConfig;
use crate::error::{ModelError, Result};

/// Diagonal offset of `W_q` at init; sets how sharply the initial attention
/// kernel peaks.
pub const QUERY_GAIN: f64 = 8.0;

/// All learnable tensors. Matrices map row vectors: `y = x · W`, stored
/// `in × out`. GRU gate blocks are ordered (reset, update, candidate).
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub cfg: ModelConfig,
    /// Time embedding frequencies `ω`.
    pub time_w: Array1<f64>,
    /// Time embedding phases `α`.
    pub time_b: Array1<f64>,
    pub enc_w: Array2<f64>,
    pub enc_b: Array1<f64>,
    pub w_h: Array2<f64>,
    pub u_t: Array2<f64>,
    pub w_k: Array2<f64>,
    pub w_v: Array2<f64>,
    pub w_q: Array2<f64>,
    pub gru_wx: Array2<f64>,
    pub gru_wh: Array2<f64>,
    pub gru_bx: Array1<f64>,
    pub gru_bh: Array1<f64>,
    pub head_w: Array2<f64>,
    pub head_b: Array1<f64>,
    pub recon_w: Array2<f64>,
    pub recon_b: Array1<f64>,
}

pub const TENSOR_NAMES: [&str; 17] = [
    "time_w", "time_b", "enc_w", "enc_b", "w_h", "u_t", "w_k", "w_v", "w_q", "gru_wx", "gru_wh",
    "gru_bx", "gru_bh", "head_w", "head_b", "recon_w", "recon_b",
];

impl ModelParams {
    pub fn zeros(cfg: &ModelConfig) -> Result<Self> {
        cfg.validate()?;
        let (g, r, h, k, v, n) = (cfg.grid_size, cfg.d_r, cfg.d_h, cfg.d_k, cfg.d_v, cfg.gru_hidden);
        let m = |a, b| Array2::zeros((a, b));
        let z = |a| Array1::zeros(a);
        Ok(ModelParams {
            cfg: cfg.clone(),
            time_w: z(r),
            time_b: z(r),
            enc_w: m(cfg.enc_in(), h),
            enc_b: z(h),
            w_h: m(h, h),
            u_t: m(r, h),
            w_k: m(h, k),
            w_v: m(h, v),
            w_q: m(r, k),
            gru_wx: m(v, 3 * n),
            gru_wh: m(n, 3 * n),
            gru_bx: z(3 * n),
            gru_bh: z(3 * n),
            head_w: m(n, cfg.n_classes),
            head_b: z(cfg.n_classes),
            recon_w: m(v, g),
            recon_b: z(g),
        })
    }

    /// Affine weights and biases uniform in `±1/√fan_in`; time frequencies
    /// log-spaced from 0.1 to 100 cycles per window, phases zero. `W_q`,
    /// `U_t` and `W_k` additionally get a diagonal offset (`QUERY_GAIN` for
    /// `W_q`, 1 for the others) so attention starts out local in time.
    pub fn init(cfg: &ModelConfig, seed: u64) -> Result<Self> {
        let mut p = Self::zeros(cfg)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let r = cfg.d_r;
        for (i, w) in p.time_w.iter_mut().enumerate() {
            let frac = if r > 1 { i as f64 / (r - 1) as f64 } else { 0.0 };
            *w = std::f64::consts::TAU * 0.1 * 1000f64.powf(frac);
        }
        let mut fill = |a: &mut dyn Iterator<Item = &mut f64>, fan_in: usize| {
            let bound = 1.0 / (fan_in as f64).sqrt();
            a.for_each(|x| *x = rng.random_range(-bound..=bound));
        };
        let (enc_in, d_h, n) = (cfg.enc_in(), cfg.d_h, cfg.gru_hidden);
        fill(&mut p.enc_w.iter_mut(), enc_in);
        fill(&mut p.enc_b.iter_mut(), enc_in);
        fill(&mut p.w_h.iter_mut(), d_h);
        fill(&mut p.u_t.iter_mut(), r);
        fill(&mut p.w_k.iter_mut(), d_h);
        fill(&mut p.w_v.iter_mut(), d_h);
        fill(&mut p.w_q.iter_mut(), r);
        // Identity offsets on the time path make the initial score
        // `q·k ∝ Σ sin(ωt_q) sin(ωt_k)`, a kernel peaked at `t_q = t_k`.
        for i in 0..r {
            if i < cfg.d_k {
                p.w_q[[i, i]] += QUERY_GAIN;
            }
            if i < cfg.d_h {
                p.u_t[[i, i]] += 1.0;
            }
        }
        for i in 0..d_h.min(cfg.d_k) {
            p.w_k[[i, i]] += 1.0;
        }
        fill(&mut p.gru_wx.iter_mut(), n);
        fill(&mut p.gru_wh.iter_mut(), n);
        fill(&mut p.gru_bx.iter_mut(), n);
        fill(&mut p.gru_bh.iter_mut(), n);
        fill(&mut p.head_w.iter_mut(), n);
        fill(&mut p.head_b.iter_mut(), n);
        fill(&mut p.recon_w.iter_mut(), cfg.d_v);
        fill(&mut p.recon_b.iter_mut(), cfg.d_v);
        Ok(p)
    }

    pub fn zeros_like(&self) -> Self {
        Self::zeros(&self.cfg).expect("config already validated")
    }

    /// Tensors in declaration order, paired with [`TENSOR_NAMES`].
    pub fn tensors(&self) -> [ArrayViewD<'_, f64>; 17] {
        [
            self.time_w.view().into_dyn(),
            self.time_b.view().into_dyn(),
            self.enc_w.view().into_dyn(),
            self.enc_b.view().into_dyn(),
            self.w_h.view().into_dyn(),
            self.u_t.view().into_dyn(),
            self.w_k.view().into_dyn(),
            self.w_v.view().into_dyn(),
            self.w_q.view().into_dyn(),
            self.gru_wx.view().into_dyn(),
            self.gru_wh.view().into_dyn(),
            self.gru_bx.view().into_dyn(),
            self.gru_bh.view().into_dyn(),
            self.head_w.view().into_dyn(),
            self.head_b.view().into_dyn(),
            self.recon_w.view().into_dyn(),
            self.recon_b.view().into_dyn(),
        ]
    }

    pub fn tensors_mut(&mut self) -> [ArrayViewMutD<'_, f64>; 17] {
        [
            self.time_w.view_mut().into_dyn(),
            self.time_b.view_mut().into_dyn(),
            self.enc_w.view_mut().into_dyn(),
            self.enc_b.view_mut().into_dyn(),
            self.w_h.view_mut().into_dyn(),
            self.u_t.view_mut().into_dyn(),
            self.w_k.view_mut().into_dyn(),
            self.w_v.view_mut().into_dyn(),
            self.w_q.view_mut().into_dyn(),
            self.gru_wx.view_mut().into_dyn(),
            self.gru_wh.view_mut().into_dyn(),
            self.gru_bx.view_mut().into_dyn(),
            self.gru_bh.view_mut().into_dyn(),
            self.head_w.view_mut().into_dyn(),
            self.head_b.view_mut().into_dyn(),
            self.recon_w.view_mut().into_dyn(),
            self.recon_b.view_mut().into_dyn(),
        ]
    }

    /// Parameters used by classification (everything but the reconstruction
    /// head).
    pub fn n_classifier_params(&self) -> usize {
        self.n_params() - self.recon_w.len() - self.recon_b.len()
    }

    pub fn n_params(&self) -> usize {
        self.tensors().iter().map(|t| t.len()).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.tensors().iter().all(|t| t.iter().all(|x| x.is_finite()))
    }

    /// `self += scale · other`, tensor by tensor.
    pub fn add_scaled(&mut self, other: &ModelParams, scale: f64) {
        for (mut a, b) in self.tensors_mut().into_iter().zip(other.tensors()) {
            a.scaled_add(scale, &b);
        }
    }

    pub fn sq_norm(&self) -> f64 {
        self.tensors().iter().flat_map(|t| t.iter()).map(|x| x * x).sum()
    }

    pub(crate) fn check_finite(&self, what: &str) -> Result<()> {
        if let Some(i) = self.tensors().iter().position(|t| t.iter().any(|x| !x.is_finite())) {
            return Err(ModelError::NonFinite { what: format!("{what} in {}", TENSOR_NAMES[i]) });
        }
        Ok(())
    }
}
