use std::f64::consts::TAU;

use unifi_core::Band;

use crate::config::SceneConfig;

pub const SUBCARRIER_SPACING_HZ: f64 = 312_500.0;

/// Absolute frequency of each subcarrier index on `band`.
pub fn subcarrier_freqs(band: Band, sc_idx: &[i32]) -> Vec<f64> {
    sc_idx
        .iter()
        .map(|&k| band.center_hz() + k as f64 * SUBCARRIER_SPACING_HZ)
        .collect()
}

/// Complex channel response `(re, im)` per frequency at time `t_us`.
pub(crate) fn channel_response(scene: &SceneConfig, t_us: i64, freqs: &[f64]) -> Vec<(f64, f64)> {
    let t = t_us as f64 * 1e-6;
    freqs
        .iter()
        .map(|&f| {
            let mut re = 0.0;
            let mut im = 0.0;
            for p in &scene.static_paths {
                let phase = -TAU * f * p.delay_ns * 1e-9;
                re += p.gain * phase.cos();
                im += p.gain * phase.sin();
            }
            if let Some(m) = &scene.mover {
                let phase = TAU * m.doppler_hz * t - TAU * f * m.reflect_delay_ns * 1e-9;
                re += m.path_gain * phase.cos();
                im += m.path_gain * phase.sin();
            }
            (re, im)
        })
        .collect()
}

/// `|H_k(t)|`: sum of static paths `g·e^{-j2πfτ}` plus the moving reflector
/// `g_m·e^{j2πf_D t}·e^{-j2πfτ_m}`.
pub fn synth_channel(scene: &SceneConfig, t_us: i64, freqs: &[f64]) -> Vec<f64> {
    channel_response(scene, t_us, freqs)
        .into_iter()
        .map(|(re, im)| re.hypot(im))
        .collect()
}
