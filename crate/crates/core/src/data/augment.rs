//! On-the-fly image augmentation on the 2-D pixel grid.

use crate::data::idx::MNIST_SIDE;
use crate::error::{Error, Result};
use crate::foundation::Rng;

#[derive(Debug, Clone, PartialEq)]
pub struct AugmentSpec {
    /// Rotation angle is drawn uniformly from `[-rotate_max_deg, rotate_max_deg]`.
    pub rotate_max_deg: f64,
    /// Per-axis integer shift drawn uniformly from `[-shift_max_px, shift_max_px]`.
    pub shift_max_px: usize,
    pub hflip_enabled: bool,
    /// Chance that each enabled transform is applied to a given image.
    pub probability: f64,
}

impl Default for AugmentSpec {
    // Mirrored digits change meaning, so flips stay off unless asked for.
    fn default() -> Self {
        Self {
            rotate_max_deg: 10.0,
            shift_max_px: 2,
            hflip_enabled: false,
            probability: 0.5,
        }
    }
}

impl AugmentSpec {
    pub fn disabled() -> Self {
        Self {
            rotate_max_deg: 0.0,
            shift_max_px: 0,
            hflip_enabled: false,
            probability: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rotate_max_deg >= 0.0 && self.rotate_max_deg.is_finite()) {
            return Err(Error::Argument(format!(
                "rotate_max_deg must be finite and >= 0, got {}",
                self.rotate_max_deg
            )));
        }
        if !(0.0..=1.0).contains(&self.probability) {
            return Err(Error::Argument(format!(
                "augmentation probability {} outside [0, 1]",
                self.probability
            )));
        }
        Ok(())
    }

    pub fn is_identity(&self) -> bool {
        self.probability == 0.0
            || (self.rotate_max_deg == 0.0 && self.shift_max_px == 0 && !self.hflip_enabled)
    }
}

/// Applies rotation, translation and horizontal mirroring to a 28×28 image,
/// each independently with `spec.probability`.
pub fn augment<T: Copy + Default>(image: &[T], spec: &AugmentSpec, rng: &mut Rng) -> Result<Vec<T>> {
    augment_grid(image, MNIST_SIDE, MNIST_SIDE, spec, rng)
}

pub fn augment_grid<T: Copy + Default>(
    image: &[T],
    rows: usize,
    cols: usize,
    spec: &AugmentSpec,
    rng: &mut Rng,
) -> Result<Vec<T>> {
    spec.validate()?;
    if image.len() != rows * cols {
        return Err(Error::Argument(format!(
            "image has {} pixels, expected {rows}x{cols}",
            image.len()
        )));
    }
    let mut out = image.to_vec();
    if spec.is_identity() {
        return Ok(out);
    }
    if spec.rotate_max_deg > 0.0 && rng.bernoulli(spec.probability) {
        let deg = rng.range_f64(-spec.rotate_max_deg, spec.rotate_max_deg);
        out = rotate(&out, rows, cols, deg);
    }
    if spec.shift_max_px > 0 && rng.bernoulli(spec.probability) {
        let span = 2 * spec.shift_max_px as u64 + 1;
        let dx = rng.below(span) as isize - spec.shift_max_px as isize;
        let dy = rng.below(span) as isize - spec.shift_max_px as isize;
        out = translate(&out, rows, cols, dx, dy);
    }
    if spec.hflip_enabled && rng.bernoulli(spec.probability) {
        out = flip_horizontal(&out, rows, cols);
    }
    Ok(out)
}

/// Rotates by `degrees` (counter-clockwise in image coordinates) about the
/// grid center with nearest-neighbour sampling; samples falling outside the
/// grid become `T::default()`.
pub fn rotate<T: Copy + Default>(image: &[T], rows: usize, cols: usize, degrees: f64) -> Vec<T> {
    let (sin, cos) = degrees.to_radians().sin_cos();
    let cy = (rows as f64 - 1.0) / 2.0;
    let cx = (cols as f64 - 1.0) / 2.0;
    let mut out = vec![T::default(); rows * cols];
    for r in 0..rows {
        for c in 0..cols {
            let dx = c as f64 - cx;
            let dy = r as f64 - cy;
            let sx = (cx + cos * dx + sin * dy).round();
            let sy = (cy - sin * dx + cos * dy).round();
            if sx >= 0.0 && sy >= 0.0 && (sx as usize) < cols && (sy as usize) < rows {
                out[r * cols + c] = image[sy as usize * cols + sx as usize];
            }
        }
    }
    out
}

/// Shifts content by `dx` columns and `dy` rows; vacated pixels are zeroed.
pub fn translate<T: Copy + Default>(
    image: &[T],
    rows: usize,
    cols: usize,
    dx: isize,
    dy: isize,
) -> Vec<T> {
    let mut out = vec![T::default(); rows * cols];
    for r in 0..rows as isize {
        for c in 0..cols as isize {
            let (sr, sc) = (r - dy, c - dx);
            if sr >= 0 && sc >= 0 && (sr as usize) < rows && (sc as usize) < cols {
                out[r as usize * cols + c as usize] = image[sr as usize * cols + sc as usize];
            }
        }
    }
    out
}

/// Column `c` maps to column `cols - 1 - c`.
pub fn flip_horizontal<T: Copy>(image: &[T], rows: usize, cols: usize) -> Vec<T> {
    let mut out = image.to_vec();
    for r in 0..rows {
        out[r * cols..(r + 1) * cols].reverse();
    }
    out
}
