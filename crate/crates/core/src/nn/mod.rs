//! Dense neural networks with hand-written backpropagation.
//!
//! Layers cache their forward inputs; [`Network::backward`] consumes those
//! caches and returns one gradient per parameter tensor in
//! [`Network::params`] order, which is what [`AdamState::step`] expects.

mod adam;
pub mod gradcheck;
mod layers;
mod loss;
mod network;
mod train;

pub use adam::{lr_schedule, AdamConfig, AdamState};
pub use layers::{
    relu, sigmoid, softmax, Activation, BatchNormLayer, DenseLayer, DropoutLayer, Mode,
};
pub use loss::{cross_entropy_loss, mse_loss, Loss, PROB_CLIP};
pub use network::{AutoencoderSpec, ClassifierSpec, Layer, Network};
pub use train::{
    evaluate, train, train_observed, BatchSource, EpochRecord, Evaluation, History, Samples, TrainConfig,
    EVAL_CHUNK,
};
