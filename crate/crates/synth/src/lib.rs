//! Ground-truth synthetic CSI.
//!
//! [`synth_channel`] evaluates a single-antenna multipath channel with an
//! optional moving reflector, [`sample_traffic`] draws packet arrival times
//! for a mix of periodic, Poisson and bursty sources, and [`emit_stream`]
//! turns both into a [`unifi_core::CsiStream`] under per-packet gain,
//! per-cluster preamble shaping and additive estimation error.
//! [`subsample_to_target`] thins a fixed-rate stream to a requested
//! missing rate and sampling irregularity.

mod channel;
mod config;
mod emit;
mod error;
mod subsample;
mod traffic;

pub use channel::{subcarrier_freqs, synth_channel, SUBCARRIER_SPACING_HZ};
pub use config::{
    Arrival, Corruption, GainModel, ImpairmentConfig, Mover, SceneConfig, Shaping, StaticPath,
    SynthConfig, TrafficCluster, TrafficConfig,
};
pub use emit::emit_stream;
pub use error::{Result, SynthError};
pub use subsample::{subsample_to_target, SubsampleOutcome, MR_TOLERANCE, SCV_TOLERANCE};
pub use traffic::{sample_traffic, ArrivalEvent};
