//! The view introspection network: a small convolutional encoder over the
//! pooled feature grids plus an ordinal (CORAL) head, trained to imitate
//! the oracle relative reconstruction improvement.

mod checkpoint;
mod labels;
mod net;
mod params;
#[cfg(test)]
pub(crate) mod test_util;
mod train;

pub use checkpoint::{load_checkpoint, save_checkpoint};
pub use labels::{make_labels, soft_clip_z, OrdinalLabel, NUM_CLASSES, NUM_THRESHOLDS};
pub use net::{
    backward, class_from_logits, coral_loss, coral_loss_grad, forward, forward_cached,
    score_from_logits, Activations, Scalar,
};
pub use params::{init_params, ParamSet, VinParams, VinProfile};
pub use train::{train, EpochStats, TrainConfig, TrainingSample};
