//! Continuous-time attention over irregular CSI windows.
//!
//! Each observation is encoded ([`value_embed`]), keyed by its content and a
//! learnable sinusoidal embedding of its timestamp ([`time_embed`]), and
//! attended to from `Q` evenly spaced reference times ([`attend`]). A GRU
//! reads the `Q` attended vectors in time order and an affine head produces
//! class logits ([`forward`]). Gradients are derived by hand
//! ([`loss_and_grad`]) and optimized with Adam ([`train`]). A regression head
//! on the same attention maps windows to arbitrary target times
//! ([`reconstruct`]).

mod attention;
mod checkpoint;
mod config;
mod embed;
mod error;
mod gru;
mod model;
mod params;
mod recon;
mod train;

pub use attention::{attend, attention_weights};
pub use checkpoint::{load_checkpoint, read_checkpoint, save_checkpoint, write_checkpoint, CHECKPOINT_MAGIC};
pub use config::{ModelConfig, TrainConfig};
pub use embed::{reference_times, time_embed, value_embed};
pub use error::{ModelError, Result};
pub use model::{accuracy, forward, logits_batch, loss_and_grad, predict};
pub use params::{ModelParams, QUERY_GAIN, TENSOR_NAMES};
pub use recon::{holdout_sample, reconstruct, recon_loss_and_grad, train_recon, ReconSample};
pub use train::{train, train_from, Adam, EpochLog};
