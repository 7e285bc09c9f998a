//! MNIST ingestion and preparation: IDX parsing, `x / 255` normalization,
//! flattening, one-hot labels, augmentation and mini-batching.

mod augment;
mod batch;
mod dataset;
mod idx;

pub use augment::{augment, augment_grid, flip_horizontal, rotate, translate, AugmentSpec};
pub use batch::{batch_iter, epoch_batches, BatchIter};
pub use dataset::{
    mnist_paths, normalize_and_flatten, one_hot, split_indices, RawDataset, VectorDataset,
    NUM_CLASSES,
};
pub use idx::{
    parse_idx_images, parse_idx_labels, read_maybe_gzip, Images, IMAGE_MAGIC, LABEL_MAGIC,
    MNIST_SIDE,
};
