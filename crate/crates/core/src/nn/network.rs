use crate::error::{Error, Result};
use crate::foundation::{Archive, Rng, Tensor};
use crate::nn::layers::{Activation, BatchNormLayer, DenseLayer, DropoutLayer, Mode};

#[derive(Debug, Clone)]
pub enum Layer {
    Dense(DenseLayer),
    BatchNorm(BatchNormLayer),
    Dropout(DropoutLayer),
}

impl Layer {
    fn out_width(&self, in_width: usize) -> usize {
        match self {
            Layer::Dense(d) => d.outputs(),
            Layer::BatchNorm(b) => b.width(),
            Layer::Dropout(_) => in_width,
        }
    }

    fn in_width(&self) -> Option<usize> {
        match self {
            Layer::Dense(d) => Some(d.inputs()),
            Layer::BatchNorm(b) => Some(b.width()),
            Layer::Dropout(_) => None,
        }
    }
}

/// Ordered stack of layers with a training/inference switch.
#[derive(Debug, Clone)]
pub struct Network {
    layers: Vec<Layer>,
    mode: Mode,
}

impl Network {
    pub fn new(layers: Vec<Layer>) -> Result<Self> {
        let mut width: Option<usize> = None;
        for (i, layer) in layers.iter().enumerate() {
            if let (Some(w), Some(expected)) = (width, layer.in_width()) {
                if w != expected {
                    return Err(Error::Argument(format!(
                        "layer {i} expects width {expected} but receives {w}"
                    )));
                }
            }
            let w = width.or(layer.in_width());
            width = w.map(|w| layer.out_width(w));
        }
        Ok(Self {
            layers,
            mode: Mode::Inference,
        })
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn set_mode(&mut self, mode: Mode) {
        self.mode = mode;
    }

    pub fn input_width(&self) -> Option<usize> {
        self.layers.iter().find_map(Layer::in_width)
    }

    pub fn output_width(&self) -> Option<usize> {
        let mut w = self.input_width()?;
        for l in &self.layers {
            w = l.out_width(w);
        }
        Some(w)
    }

    /// Forward pass in the current mode, caching what backward needs.
    pub fn forward(&mut self, x: &Tensor, rng: &mut Rng) -> Result<Tensor> {
        let mode = self.mode;
        let mut h = x.clone();
        for layer in &mut self.layers {
            h = match layer {
                Layer::Dense(d) => d.forward(&h)?,
                Layer::BatchNorm(b) => b.forward(&h, mode)?,
                Layer::Dropout(d) => d.forward(&h, mode, rng)?,
            };
        }
        Ok(h)
    }

    /// Inference through every layer without touching caches or statistics.
    pub fn predict(&self, x: &Tensor) -> Result<Tensor> {
        self.predict_range(x, 0, self.layers.len())
    }

    /// Inference through layers `start..end` only.
    pub fn predict_range(&self, x: &Tensor, start: usize, end: usize) -> Result<Tensor> {
        if start > end || end > self.layers.len() {
            return Err(Error::Argument(format!(
                "layer range {start}..{end} outside 0..{}",
                self.layers.len()
            )));
        }
        let mut h = x.clone();
        for layer in &self.layers[start..end] {
            h = match layer {
                Layer::Dense(d) => d.predict(&h)?,
                Layer::BatchNorm(b) => b.predict(&h)?,
                Layer::Dropout(_) => h,
            };
        }
        Ok(h)
    }

    /// Reverse-mode gradients for every parameter, in [`Network::params`]
    /// order, given the gradient of the loss with respect to the output.
    pub fn backward(&mut self, output_grad: &Tensor) -> Result<Vec<Tensor>> {
        Ok(self.backward_impl(output_grad, false)?.0)
    }

    /// Parameter gradients plus the gradient with respect to the network
    /// input. With `from_logits` the incoming gradient is taken with respect
    /// to the final dense layer's pre-activation.
    pub fn backward_full(&mut self, grad: &Tensor, from_logits: bool) -> Result<(Vec<Tensor>, Tensor)> {
        if from_logits {
            self.check_logit_head()?;
        }
        self.backward_impl(grad, from_logits)
    }

    /// Like [`Network::backward`] but `logit_grad` is taken with respect to
    /// the pre-softmax logits of the final dense layer.
    pub fn backward_from_logits(&mut self, logit_grad: &Tensor) -> Result<Vec<Tensor>> {
        self.check_logit_head()?;
        Ok(self.backward_impl(logit_grad, true)?.0)
    }

    fn check_logit_head(&self) -> Result<()> {
        match self.layers.last() {
            Some(Layer::Dense(d)) if d.activation() == Activation::Softmax => Ok(()),
            _ => Err(Error::State(
                "logit gradients need a final dense softmax layer".into(),
            )),
        }
    }

    fn backward_impl(&mut self, grad: &Tensor, logits: bool) -> Result<(Vec<Tensor>, Tensor)> {
        let mut g = grad.clone();
        let mut grads_rev = Vec::new();
        let last = self.layers.len().saturating_sub(1);
        let result: Result<()> = (|| {
            for (i, layer) in self.layers.iter_mut().enumerate().rev() {
                g = match layer {
                    Layer::Dense(d) => {
                        let (dx, dw, db) = d.backward(&g, logits && i == last)?;
                        grads_rev.push(db);
                        grads_rev.push(dw);
                        dx
                    }
                    Layer::BatchNorm(b) => b.backward(&g)?,
                    Layer::Dropout(d) => d.backward(&g)?,
                };
            }
            Ok(())
        })();
        if result.is_err() {
            self.clear_caches();
        }
        result?;
        grads_rev.reverse();
        Ok((grads_rev, g))
    }

    pub fn clear_caches(&mut self) {
        for layer in &mut self.layers {
            match layer {
                Layer::Dense(d) => d.clear_cache(),
                Layer::BatchNorm(b) => b.clear_cache(),
                Layer::Dropout(d) => d.clear_cache(),
            }
        }
    }

    /// Trainable tensors: `weight, bias` for each dense layer in order.
    pub fn params(&self) -> Vec<&Tensor> {
        self.layers
            .iter()
            .filter_map(|l| match l {
                Layer::Dense(d) => Some([&d.weight, &d.bias]),
                _ => None,
            })
            .flatten()
            .collect()
    }

    pub fn params_mut(&mut self) -> Vec<&mut Tensor> {
        self.layers
            .iter_mut()
            .filter_map(|l| match l {
                Layer::Dense(d) => Some([&mut d.weight, &mut d.bias]),
                _ => None,
            })
            .flatten()
            .collect()
    }

    pub fn has_batch_norm(&self) -> bool {
        self.layers.iter().any(|l| matches!(l, Layer::BatchNorm(_)))
    }

    /// Layer structure under `meta/`, parameters and running statistics
    /// under `layer{i}/`.
    pub fn to_archive(&self) -> Archive {
        let mut a = Archive::new();
        let push = |a: &mut Archive, name: String, t: Tensor| {
            a.push(name, t).expect("layer names are unique");
        };
        push(
            &mut a,
            "meta/layer_count".into(),
            Tensor::vector(vec![self.layers.len() as f64]).unwrap(),
        );
        for (i, layer) in self.layers.iter().enumerate() {
            let meta = match layer {
                Layer::Dense(d) => vec![
                    0.0,
                    d.activation().code(),
                    d.inputs() as f64,
                    d.outputs() as f64,
                ],
                Layer::BatchNorm(b) => vec![1.0, b.width() as f64, b.epsilon, b.momentum],
                Layer::Dropout(d) => vec![2.0, d.p()],
            };
            push(&mut a, format!("meta/layer{i}"), Tensor::vector(meta).unwrap());
            match layer {
                Layer::Dense(d) => {
                    push(&mut a, format!("layer{i}/weight"), d.weight.clone());
                    push(&mut a, format!("layer{i}/bias"), d.bias.clone());
                }
                Layer::BatchNorm(b) => {
                    push(&mut a, format!("layer{i}/running_mean"), b.running_mean.clone());
                    push(&mut a, format!("layer{i}/running_var"), b.running_var.clone());
                }
                Layer::Dropout(_) => {}
            }
        }
        a
    }

    pub fn from_archive(a: &Archive) -> Result<Self> {
        let count = a.require("meta/layer_count")?.data()[0] as usize;
        let mut layers = Vec::with_capacity(count);
        for i in 0..count {
            let meta = a.require(&format!("meta/layer{i}"))?.data();
            let bad = || Error::Value(format!("malformed metadata for layer {i}"));
            let layer = match (meta.first().map(|&k| k as i64), meta.len()) {
                (Some(0), 4) => Layer::Dense(DenseLayer::new(
                    a.require(&format!("layer{i}/weight"))?.clone(),
                    a.require(&format!("layer{i}/bias"))?.clone(),
                    Activation::from_code(meta[1])?,
                )?),
                (Some(1), 4) => {
                    let mut b = BatchNormLayer::new(meta[1] as usize, meta[2], meta[3])?;
                    b.running_mean = a.require(&format!("layer{i}/running_mean"))?.clone();
                    b.running_var = a.require(&format!("layer{i}/running_var"))?.clone();
                    if b.running_mean.len() != b.width() || b.running_var.len() != b.width() {
                        return Err(bad());
                    }
                    Layer::BatchNorm(b)
                }
                (Some(2), 2) => Layer::Dropout(DropoutLayer::new(meta[1])?),
                _ => return Err(bad()),
            };
            layers.push(layer);
        }
        Network::new(layers)
    }
}

/// Dense autoencoder `input → hidden → latent → hidden → input`, ReLU
/// everywhere except the sigmoid reconstruction layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AutoencoderSpec {
    pub input: usize,
    pub hidden: usize,
    pub latent: usize,
}

impl Default for AutoencoderSpec {
    fn default() -> Self {
        Self {
            input: 784,
            hidden: 256,
            latent: 64,
        }
    }
}

impl AutoencoderSpec {
    /// Number of leading layers that form the encoder.
    pub const ENCODER_LAYERS: usize = 2;

    pub fn build(&self, rng: &mut Rng) -> Network {
        let layers = vec![
            Layer::Dense(DenseLayer::init(self.input, self.hidden, Activation::Relu, rng)),
            Layer::Dense(DenseLayer::init(self.hidden, self.latent, Activation::Relu, rng)),
            Layer::Dense(DenseLayer::init(self.latent, self.hidden, Activation::Relu, rng)),
            Layer::Dense(DenseLayer::init(self.hidden, self.input, Activation::Sigmoid, rng)),
        ];
        Network::new(layers).expect("autoencoder widths chain")
    }

    pub fn encode(net: &Network, x: &Tensor) -> Result<Tensor> {
        net.predict_range(x, 0, Self::ENCODER_LAYERS)
    }

    pub fn decode(net: &Network, h: &Tensor) -> Result<Tensor> {
        net.predict_range(h, Self::ENCODER_LAYERS, net.layers().len())
    }
}

/// `input → [dense(relu) → batch-norm → dropout] × hidden.len() → dense(softmax)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassifierSpec {
    pub input: usize,
    pub hidden: Vec<usize>,
    pub dropout: f64,
    pub classes: usize,
    pub bn_epsilon: f64,
    pub bn_momentum: f64,
}

impl ClassifierSpec {
    pub fn new(input: usize) -> Self {
        Self {
            input,
            hidden: vec![128, 64, 32],
            dropout: 0.3,
            classes: 10,
            bn_epsilon: 1e-5,
            bn_momentum: 0.9,
        }
    }

    pub fn build(&self, rng: &mut Rng) -> Result<Network> {
        let mut layers = Vec::new();
        let mut width = self.input;
        for &h in &self.hidden {
            layers.push(Layer::Dense(DenseLayer::init(width, h, Activation::Relu, rng)));
            layers.push(Layer::BatchNorm(BatchNormLayer::new(
                h,
                self.bn_epsilon,
                self.bn_momentum,
            )?));
            layers.push(Layer::Dropout(DropoutLayer::new(self.dropout)?));
            width = h;
        }
        layers.push(Layer::Dense(DenseLayer::init(
            width,
            self.classes,
            Activation::Softmax,
            rng,
        )));
        Network::new(layers)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::loss::mse_loss;

    #[test]
    fn single_linear_layer_closed_form() {
        // L = mean((W x - t)^2): dW = 2 (Wx - t) xᵀ / n.
        let w = Tensor::matrix(2, 3, vec![0.5, -1.0, 0.25, 2.0, 0.0, -0.5]).unwrap();
        let layer = DenseLayer::new(w.clone(), Tensor::zeros(&[2]), Activation::Linear).unwrap();
        let mut net = Network::new(vec![Layer::Dense(layer)]).unwrap();
        let x = Tensor::matrix(1, 3, vec![1.0, 2.0, -1.0]).unwrap();
        let t = Tensor::matrix(1, 2, vec![0.3, -0.7]).unwrap();
        let y = net.forward(&x, &mut Rng::seed_from_u64(0)).unwrap();
        let (_, g) = mse_loss(&t, &y).unwrap();
        let grads = net.backward(&g).unwrap();
        let wx = [0.5 - 2.0 - 0.25, 2.0 + 0.5];
        let r = [wx[0] - 0.3, wx[1] + 0.7];
        for (i, ri) in r.iter().enumerate() {
            for j in 0..3 {
                let want = 2.0 * ri * x.data()[j] / 2.0;
                assert!((grads[0].data()[i * 3 + j] - want).abs() < 1e-14);
            }
            assert!((grads[1].data()[i] - r[i]).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_upstream_gradient() {
        let mut rng = Rng::seed_from_u64(7);
        let mut net = ClassifierSpec::new(6).build(&mut rng).unwrap();
        net.set_mode(Mode::Training);
        let x = Tensor::matrix(4, 6, rng.uniform(24).into_data()).unwrap();
        let y = net.forward(&x, &mut rng).unwrap();
        let grads = net.backward(&Tensor::zeros(y.shape())).unwrap();
        assert_eq!(grads.len(), 8);
        assert!(grads.iter().all(|g| g.data().iter().all(|&v| v == 0.0)));
    }

    #[test]
    fn backward_needs_matching_forward() {
        let mut rng = Rng::seed_from_u64(1);
        let mut net = AutoencoderSpec {
            input: 4,
            hidden: 3,
            latent: 2,
        }
        .build(&mut rng);
        assert!(matches!(net.backward(&Tensor::zeros(&[1, 4])), Err(Error::State(_))));
        let x = Tensor::matrix(2, 4, rng.uniform(8).into_data()).unwrap();
        net.forward(&x, &mut rng).unwrap();
        assert!(matches!(net.backward(&Tensor::zeros(&[3, 4])), Err(Error::State(_))));
        // caches were discarded by the failed call
        assert!(matches!(net.backward(&Tensor::zeros(&[2, 4])), Err(Error::State(_))));
        assert!(matches!(
            net.backward_from_logits(&Tensor::zeros(&[2, 4])),
            Err(Error::State(_))
        ));
    }

    #[test]
    fn widths_must_chain() {
        let mut rng = Rng::seed_from_u64(0);
        let layers = vec![
            Layer::Dense(DenseLayer::init(4, 3, Activation::Relu, &mut rng)),
            Layer::Dropout(DropoutLayer::new(0.1).unwrap()),
            Layer::Dense(DenseLayer::init(2, 3, Activation::Relu, &mut rng)),
        ];
        assert!(Network::new(layers).is_err());
    }

    #[test]
    fn archive_round_trip_preserves_predictions() {
        let mut rng = Rng::seed_from_u64(3);
        let mut net = ClassifierSpec::new(5).build(&mut rng).unwrap();
        net.set_mode(Mode::Training);
        let x = Tensor::matrix(6, 5, rng.uniform(30).into_data()).unwrap();
        net.forward(&x, &mut rng).unwrap();
        let bytes = net.to_archive().to_bytes();
        let back = Network::from_archive(&Archive::from_bytes(&bytes).unwrap()).unwrap();
        assert_eq!(back.predict(&x).unwrap(), net.predict(&x).unwrap());
        assert_eq!(back.to_archive().to_bytes(), bytes);
    }

    #[test]
    fn autoencoder_shapes() {
        let mut rng = Rng::seed_from_u64(0);
        let net = AutoencoderSpec::default().build(&mut rng);
        let x = Tensor::zeros(&[3, 784]);
        let h = AutoencoderSpec::encode(&net, &x).unwrap();
        assert_eq!(h.shape(), &[3, 64]);
        let r = AutoencoderSpec::decode(&net, &h).unwrap();
        assert_eq!(r, net.predict(&x).unwrap());
    }

    #[test]
    fn scaling_logits_keeps_argmax() {
        let mut rng = Rng::seed_from_u64(12);
        for _ in 0..50 {
            let z = Tensor::matrix(1, 10, rng.uniform(10).into_data()).unwrap();
            let c = 0.1 + 10.0 * rng.next_f64();
            let scaled = z.map(|v| v * c).unwrap();
            let p = crate::nn::softmax(&scaled);
            assert_eq!(p.argmax_rows(), z.argmax_rows());
        }
    }
}
