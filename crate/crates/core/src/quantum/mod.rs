//! Statevector simulation of small Ry/H/CNOT circuits and the block-circuit
//! feature transform applied to autoencoder latents.

mod circuit;
mod state;
mod transform;

pub use circuit::{
    build_block_circuit, encode_angles, marginals, sample_counts, sample_indices, simulate,
    Circuit, EncodingAngles, MeasurementCounts, BLOCK_QUBITS,
};
pub use state::{Gate, QuantumState, MAX_QUBITS};
pub use transform::{
    read_quantum_meta, transform_features, transform_row, write_quantum_meta, FeatureKind,
    MeasureMode, QuantumConfig, ScalingStats, PAD_VALUE,
};
