//! Dense tensors, deterministic randomness and model persistence.

mod archive;
mod rng;
mod tensor;

pub use archive::{read_archive, write_archive, Archive, ARCHIVE_MAGIC};
pub use rng::Rng;
pub use tensor::{matmul, matmul_a_bt, matmul_at_b, Tensor};
