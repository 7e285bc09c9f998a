//! Central finite-difference checks of the analytic network gradients.

use crate::error::{Error, Result};
use crate::foundation::{Rng, Tensor};
use crate::nn::layers::{Activation, Mode};
use crate::nn::loss::{cross_entropy_loss, mse_loss, Loss};
use crate::nn::network::{Layer, Network};

pub const FD_STEP: f64 = 1e-5;

/// Denominator floor for [`relative_error`]. A gradient that is exactly zero
/// (a bias feeding batch norm, say) leaves only rounding noise on both sides.
pub const SCALE_FLOOR: f64 = 1e-6;

/// `‖a − n‖ / max(‖a‖ + ‖n‖, SCALE_FLOOR)`.
pub fn relative_error(analytic: &[f64], numeric: &[f64]) -> f64 {
    let norm = |v: &mut dyn Iterator<Item = f64>| v.map(|x| x * x).sum::<f64>().sqrt();
    let diff = norm(&mut analytic.iter().zip(numeric).map(|(a, n)| a - n));
    let scale = norm(&mut analytic.iter().copied()) + norm(&mut numeric.iter().copied());
    diff / scale.max(SCALE_FLOOR)
}

/// `(f(x + h·e_i) − f(x − h·e_i)) / 2h` for every coordinate.
pub fn central_difference(
    x: &mut [f64],
    h: f64,
    mut f: impl FnMut(&[f64]) -> Result<f64>,
) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(x.len());
    for i in 0..x.len() {
        let orig = x[i];
        x[i] = orig + h;
        let up = f(x)?;
        x[i] = orig - h;
        let down = f(x)?;
        x[i] = orig;
        out.push((up - down) / (2.0 * h));
    }
    Ok(out)
}

/// Relative errors of one gradient check, one entry per parameter tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientReport {
    pub params: Vec<f64>,
    pub input: f64,
    /// Smallest `|z|` over ReLU pre-activations (infinite without ReLU).
    /// Below roughly the step size a perturbation can cross the kink and the
    /// finite difference is meaningless.
    pub kink_margin: f64,
}

impl GradientReport {
    pub fn worst(&self) -> f64 {
        self.params.iter().copied().fold(self.input, f64::max)
    }
}

fn objective(loss: Loss, target: &Tensor, out: &Tensor) -> Result<(f64, Tensor)> {
    match loss {
        Loss::Mse => mse_loss(target, out),
        Loss::CrossEntropy => cross_entropy_loss(target, out),
    }
}

fn relu_margin(net: &Network, x: &Tensor, seed: u64) -> Result<f64> {
    let mut rng = Rng::seed_from_u64(seed);
    let mut h = x.clone();
    let mut margin = f64::INFINITY;
    for layer in net.layers() {
        h = match layer.clone() {
            Layer::Dense(mut d) => {
                if d.activation() == Activation::Relu {
                    let z = d.pre_activation(&h)?;
                    margin = z.data().iter().fold(margin, |m, v| m.min(v.abs()));
                }
                d.forward(&h)?
            }
            Layer::BatchNorm(mut b) => b.forward(&h, Mode::Training)?,
            Layer::Dropout(mut d) => d.forward(&h, Mode::Training, &mut rng)?,
        };
    }
    Ok(margin)
}

fn loss_at(net: &mut Network, x: &Tensor, target: &Tensor, loss: Loss, seed: u64) -> Result<f64> {
    let out = net.forward(x, &mut Rng::seed_from_u64(seed))?;
    net.clear_caches();
    Ok(objective(loss, target, &out)?.0)
}

/// Compares backprop against central differences of `loss(net(x), target)`
/// for every parameter and for the input, in training mode. Dropout draws
/// its mask from `seed` on every evaluation so the mask stays fixed.
///
/// Cross-entropy uses the fused logit gradient and needs a softmax head.
pub fn check_network(
    net: &Network,
    x: &Tensor,
    target: &Tensor,
    loss: Loss,
    seed: u64,
    h: f64,
) -> Result<GradientReport> {
    if h.is_nan() || h <= 0.0 {
        return Err(Error::Argument(format!("finite-difference step {h} must be positive")));
    }
    let mut net = net.clone();
    net.set_mode(Mode::Training);
    let out = net.forward(x, &mut Rng::seed_from_u64(seed))?;
    let (_, g) = objective(loss, target, &out)?;
    let (grads, dx) = net.backward_full(&g, loss == Loss::CrossEntropy)?;

    let mut params = Vec::with_capacity(grads.len());
    for (p, analytic) in grads.iter().enumerate() {
        let mut values = net.params()[p].data().to_vec();
        let numeric = central_difference(&mut values, h, |v| {
            net.params_mut()[p].data_mut().copy_from_slice(v);
            loss_at(&mut net, x, target, loss, seed)
        })?;
        net.params_mut()[p].data_mut().copy_from_slice(&values);
        params.push(relative_error(analytic.data(), &numeric));
    }

    let mut xin = x.clone();
    let mut values = x.data().to_vec();
    let numeric = central_difference(&mut values, h, |v| {
        xin.data_mut().copy_from_slice(v);
        loss_at(&mut net, &xin, target, loss, seed)
    })?;
    Ok(GradientReport {
        params,
        input: relative_error(dx.data(), &numeric),
        kink_margin: relu_margin(&net, x, seed)?,
    })
}
