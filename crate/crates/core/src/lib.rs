//! Building blocks for a hybrid quantum-classical MNIST classifier.
//!
//! The pipeline has three stages: a dense autoencoder compresses 784-pixel
//! images to 64 latent features, a 5-qubit statevector circuit turns blocks of
//! latents into measurement features, and a dense classifier with batch
//! normalization and dropout predicts the digit.
//!
//! - [`foundation`]: tensors, the seeded PRNG and the `QHM1` model archive.
//! - [`data`]: IDX parsing, normalization, augmentation and batching.
//! - [`nn`]: layers, losses, backprop, Adam and the training loop.
//! - [`quantum`]: gates, circuits, simulation, sampling and the feature transform.
//!
//! Everything is computed in `f64` and is bit-reproducible for a fixed seed.

pub mod data;
pub mod error;
pub mod foundation;
pub mod nn;
pub mod quantum;

pub use error::{Error, FormatError, Result};
pub use foundation::{Rng, Tensor};
