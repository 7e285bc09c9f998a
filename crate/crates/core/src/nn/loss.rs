use crate::error::{Error, Result};
use crate::foundation::Tensor;

/// Probabilities are clipped to `[PROB_CLIP, 1]` before taking the log.
pub const PROB_CLIP: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Loss {
    /// Mean squared error over every element.
    Mse,
    /// Categorical cross-entropy on softmax outputs, averaged over rows.
    CrossEntropy,
}

/// `(1/n) Σ (x̂ − x)²` and its gradient `2(x̂ − x)/n` with respect to `x̂`.
pub fn mse_loss(target: &Tensor, prediction: &Tensor) -> Result<(f64, Tensor)> {
    if target.shape() != prediction.shape() {
        return Err(Error::shape("mse_loss", target.shape(), prediction.shape()));
    }
    let n = target.len().max(1) as f64;
    let mut loss = 0.0;
    let grad: Vec<f64> = prediction
        .data()
        .iter()
        .zip(target.data())
        .map(|(p, t)| {
            let d = p - t;
            loss += d * d;
            2.0 * d / n
        })
        .collect();
    Ok((loss / n, Tensor::new(prediction.shape().to_vec(), grad)?))
}

/// `−(1/B) Σ_rows Σ_i y_i log ŷ_i` and the fused softmax + cross-entropy
/// gradient `(ŷ − y)/B` with respect to the pre-softmax logits.
pub fn cross_entropy_loss(y_onehot: &Tensor, probs: &Tensor) -> Result<(f64, Tensor)> {
    if y_onehot.shape() != probs.shape() {
        return Err(Error::shape("cross_entropy_loss", y_onehot.shape(), probs.shape()));
    }
    let rows = y_onehot.rows().max(1) as f64;
    let mut loss = 0.0;
    for (y, p) in y_onehot.data().iter().zip(probs.data()) {
        if *y != 0.0 {
            loss -= y * p.clamp(PROB_CLIP, 1.0).ln();
        }
    }
    let grad = probs
        .data()
        .iter()
        .zip(y_onehot.data())
        .map(|(p, y)| (p - y) / rows)
        .collect();
    Ok((loss / rows, Tensor::new(probs.shape().to_vec(), grad)?))
}
