//! Latent features → block-circuit measurement features.
//!
//! Each latent row is min-max scaled to `[0, 1]`, cut into blocks of five
//! (the last block padded with `1.0`, i.e. `θ = 0`), and every block is
//! angle-encoded into the 5-qubit circuit. A block contributes either the
//! per-qubit probabilities of measuring `1` or the full 32-outcome histogram.

use crate::error::{Error, Result};
use crate::foundation::{Archive, Rng, Tensor};
use crate::quantum::circuit::{build_block_circuit, encode_angles, sample_indices, simulate, BLOCK_QUBITS};

pub const PAD_VALUE: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeasureMode {
    /// Exact probabilities from the statevector.
    Exact,
    /// Frequencies from `shots` simulated measurements.
    Sampled { shots: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureKind {
    /// `p(qubit = 1)` per qubit: 5 features per block.
    Marginals,
    /// Probability of each basis outcome: 32 features per block.
    Histogram,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuantumConfig {
    pub mode: MeasureMode,
    pub kind: FeatureKind,
}

impl Default for QuantumConfig {
    fn default() -> Self {
        Self {
            mode: MeasureMode::Exact,
            kind: FeatureKind::Marginals,
        }
    }
}

impl QuantumConfig {
    pub fn features_per_block(&self) -> usize {
        match self.kind {
            FeatureKind::Marginals => BLOCK_QUBITS,
            FeatureKind::Histogram => 1 << BLOCK_QUBITS,
        }
    }

    pub fn output_width(&self, latent_width: usize) -> usize {
        latent_width.div_ceil(BLOCK_QUBITS) * self.features_per_block()
    }

    fn to_tensor(self) -> Tensor {
        let (mode, shots) = match self.mode {
            MeasureMode::Exact => (0.0, 0.0),
            MeasureMode::Sampled { shots } => (1.0, shots as f64),
        };
        let kind = match self.kind {
            FeatureKind::Marginals => 0.0,
            FeatureKind::Histogram => 1.0,
        };
        Tensor::vector(vec![mode, shots, kind]).unwrap()
    }

    fn from_tensor(t: &Tensor) -> Result<Self> {
        let d = t.data();
        if d.len() != 3 {
            return Err(Error::Value("malformed quantum config".into()));
        }
        let mode = match d[0] as i64 {
            0 => MeasureMode::Exact,
            1 => MeasureMode::Sampled { shots: d[1] as u64 },
            m => return Err(Error::Value(format!("unknown measurement mode {m}"))),
        };
        let kind = match d[2] as i64 {
            0 => FeatureKind::Marginals,
            1 => FeatureKind::Histogram,
            k => return Err(Error::Value(format!("unknown feature kind {k}"))),
        };
        Ok(Self { mode, kind })
    }
}

/// Per-feature min/max taken from the training split.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingStats {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl ScalingStats {
    pub fn fit(latent: &Tensor) -> Result<Self> {
        let (n, w) = latent.dims2()?;
        if n == 0 {
            return Err(Error::Argument("cannot fit scaling statistics on zero rows".into()));
        }
        let mut min = vec![f64::INFINITY; w];
        let mut max = vec![f64::NEG_INFINITY; w];
        for i in 0..n {
            for (j, &v) in latent.row(i).iter().enumerate() {
                min[j] = min[j].min(v);
                max[j] = max[j].max(v);
            }
        }
        Ok(Self { min, max })
    }

    pub fn width(&self) -> usize {
        self.min.len()
    }

    /// Scaled and clamped to `[0, 1]`; a constant feature maps to `0.5`.
    pub fn scale(&self, j: usize, v: f64) -> f64 {
        let span = self.max[j] - self.min[j];
        if span <= 0.0 {
            0.5
        } else {
            ((v - self.min[j]) / span).clamp(0.0, 1.0)
        }
    }

    /// Stored as `{prefix}min` and `{prefix}max`.
    pub fn write(&self, archive: &mut Archive, prefix: &str) -> Result<()> {
        archive.push(format!("{prefix}min"), Tensor::vector(self.min.clone())?)?;
        archive.push(format!("{prefix}max"), Tensor::vector(self.max.clone())?)
    }

    pub fn read(archive: &Archive, prefix: &str) -> Result<Self> {
        let min = archive.require(&format!("{prefix}min"))?.data().to_vec();
        let max = archive.require(&format!("{prefix}max"))?.data().to_vec();
        if min.len() != max.len() {
            return Err(Error::Value("scaling min/max widths differ".into()));
        }
        Ok(Self { min, max })
    }
}

/// Writes `qscale/min`, `qscale/max` and `qscale/config`.
pub fn write_quantum_meta(archive: &mut Archive, stats: &ScalingStats, config: &QuantumConfig) -> Result<()> {
    stats.write(archive, "qscale/")?;
    archive.push("qscale/config", config.to_tensor())
}

pub fn read_quantum_meta(archive: &Archive) -> Result<(ScalingStats, QuantumConfig)> {
    Ok((
        ScalingStats::read(archive, "qscale/")?,
        QuantumConfig::from_tensor(archive.require("qscale/config")?)?,
    ))
}

/// Features for one already-scaled row.
pub fn transform_row(scaled: &[f64], config: &QuantumConfig, rng: &mut Rng) -> Result<Vec<f64>> {
    let per_block = config.features_per_block();
    let mut out = Vec::with_capacity(config.output_width(scaled.len()));
    for chunk in scaled.chunks(BLOCK_QUBITS) {
        let mut block = [PAD_VALUE; BLOCK_QUBITS];
        block[..chunk.len()].copy_from_slice(chunk);
        let state = simulate(&build_block_circuit(&encode_angles(&block))?)?;
        match config.mode {
            MeasureMode::Exact => match config.kind {
                FeatureKind::Marginals => out.extend(state.marginals()),
                FeatureKind::Histogram => out.extend(state.probabilities()),
            },
            MeasureMode::Sampled { shots } => {
                let mut hist = vec![0u64; 1 << BLOCK_QUBITS];
                for idx in sample_indices(&state, shots, rng)? {
                    hist[idx] += 1;
                }
                let s = shots as f64;
                match config.kind {
                    FeatureKind::Marginals => {
                        for k in 0..BLOCK_QUBITS {
                            let ones: u64 = hist
                                .iter()
                                .enumerate()
                                .filter(|(i, _)| i >> k & 1 == 1)
                                .map(|(_, &c)| c)
                                .sum();
                            out.push(ones as f64 / s);
                        }
                    }
                    FeatureKind::Histogram => out.extend(hist.iter().map(|&c| c as f64 / s)),
                }
            }
        }
    }
    debug_assert_eq!(out.len(), scaled.len().div_ceil(BLOCK_QUBITS) * per_block);
    Ok(out)
}

/// Maps `[N × w]` latents to `[N × ⌈w/5⌉·k]` quantum features (`k = 5` for
/// marginals, `32` for histograms). Sampled mode draws sample `i` from
/// `rng.split_u64(i)`, so results do not depend on processing order.
pub fn transform_features(
    latent: &Tensor,
    config: &QuantumConfig,
    stats: Option<&ScalingStats>,
    rng: &Rng,
) -> Result<Tensor> {
    let stats = stats.ok_or_else(|| {
        Error::Argument("quantum transform needs scaling statistics from the training split".into())
    })?;
    let (n, w) = latent.dims2()?;
    if w != stats.width() {
        return Err(Error::shape(
            "transform_features",
            latent.shape(),
            &[stats.width()],
        ));
    }
    if let MeasureMode::Sampled { shots: 0 } = config.mode {
        return Err(Error::Argument("shots must be at least 1".into()));
    }
    let width = config.output_width(w);
    let mut data = Vec::with_capacity(n * width);
    let mut scaled = vec![0.0; w];
    for i in 0..n {
        for (j, (s, &v)) in scaled.iter_mut().zip(latent.row(i)).enumerate() {
            *s = stats.scale(j, v);
        }
        let mut sample_rng = rng.split_u64(i as u64);
        data.extend(transform_row(&scaled, config, &mut sample_rng)?);
    }
    Tensor::matrix(n, width, data)
}
