use crate::error::{Error, Result};
use crate::foundation::{matmul, matmul_a_bt, matmul_at_b, Rng, Tensor};

/// Whether dropout and batch statistics are active.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Training,
    Inference,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Relu,
    Sigmoid,
    Softmax,
    Linear,
}

impl Activation {
    pub(crate) fn code(self) -> f64 {
        match self {
            Activation::Relu => 0.0,
            Activation::Sigmoid => 1.0,
            Activation::Softmax => 2.0,
            Activation::Linear => 3.0,
        }
    }

    pub(crate) fn from_code(code: f64) -> Result<Self> {
        Ok(match code as i64 {
            0 => Activation::Relu,
            1 => Activation::Sigmoid,
            2 => Activation::Softmax,
            3 => Activation::Linear,
            _ => return Err(Error::Value(format!("unknown activation code {code}"))),
        })
    }

    fn apply_in_place(self, z: &mut Tensor) {
        match self {
            Activation::Relu => z.data_mut().iter_mut().for_each(|v| *v = v.max(0.0)),
            Activation::Sigmoid => z.data_mut().iter_mut().for_each(|v| *v = sigmoid(*v)),
            Activation::Softmax => softmax_in_place(z),
            Activation::Linear => {}
        }
    }

    /// Gradient with respect to the pre-activation given the activation
    /// output `a` and the gradient `g` with respect to `a`.
    fn backward(self, a: &Tensor, g: &Tensor) -> Tensor {
        let mut dz = g.clone();
        match self {
            Activation::Relu => {
                for (d, &av) in dz.data_mut().iter_mut().zip(a.data()) {
                    if av <= 0.0 {
                        *d = 0.0;
                    }
                }
            }
            Activation::Sigmoid => {
                for (d, &av) in dz.data_mut().iter_mut().zip(a.data()) {
                    *d *= av * (1.0 - av);
                }
            }
            Activation::Softmax => {
                for i in 0..a.rows() {
                    let ar = a.row(i);
                    let dot: f64 = ar.iter().zip(g.row(i)).map(|(x, y)| x * y).sum();
                    for (d, &av) in dz.row_mut(i).iter_mut().zip(ar) {
                        *d = av * (*d - dot);
                    }
                }
            }
            Activation::Linear => {}
        }
        dz
    }
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

pub fn relu(z: f64) -> f64 {
    z.max(0.0)
}

fn softmax_in_place(z: &mut Tensor) {
    for i in 0..z.rows() {
        let row = z.row_mut(i);
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        for v in row.iter_mut() {
            *v = (*v - max).exp();
            sum += *v;
        }
        for v in row.iter_mut() {
            *v /= sum;
        }
    }
}

/// Row-wise softmax with max subtraction, so large logits never overflow.
pub fn softmax(z: &Tensor) -> Tensor {
    let mut out = z.clone();
    softmax_in_place(&mut out);
    out
}

#[derive(Debug, Clone)]
struct DenseCache {
    input: Tensor,
    output: Tensor,
}

/// `activation(x · Wᵀ + b)` with `W: [out × in]`.
#[derive(Debug, Clone)]
pub struct DenseLayer {
    pub weight: Tensor,
    pub bias: Tensor,
    activation: Activation,
    cache: Option<DenseCache>,
}

impl DenseLayer {
    pub fn new(weight: Tensor, bias: Tensor, activation: Activation) -> Result<Self> {
        let (out, _) = weight.dims2()?;
        if bias.shape() != [out] {
            return Err(Error::shape("DenseLayer::new", weight.shape(), bias.shape()));
        }
        Ok(Self {
            weight,
            bias,
            activation,
            cache: None,
        })
    }

    /// He-uniform weights for ReLU, Glorot-uniform otherwise; zero biases.
    pub fn init(inputs: usize, outputs: usize, activation: Activation, rng: &mut Rng) -> Self {
        let limit = match activation {
            Activation::Relu => (6.0 / inputs as f64).sqrt(),
            _ => (6.0 / (inputs + outputs) as f64).sqrt(),
        };
        let data = (0..inputs * outputs)
            .map(|_| rng.range_f64(-limit, limit))
            .collect();
        Self {
            weight: Tensor::from_parts_unchecked(vec![outputs, inputs], data),
            bias: Tensor::zeros(&[outputs]),
            activation,
            cache: None,
        }
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn inputs(&self) -> usize {
        self.weight.shape()[1]
    }

    pub fn outputs(&self) -> usize {
        self.weight.shape()[0]
    }

    pub fn pre_activation(&self, x: &Tensor) -> Result<Tensor> {
        let (_, w) = x.dims2()?;
        if w != self.inputs() {
            return Err(Error::shape("dense_forward", x.shape(), self.weight.shape()));
        }
        let mut z = matmul_a_bt(x, &self.weight)?;
        let b = self.bias.data();
        for i in 0..z.rows() {
            for (v, bj) in z.row_mut(i).iter_mut().zip(b) {
                *v += bj;
            }
        }
        z.ensure_finite("dense_forward")
    }

    pub fn predict(&self, x: &Tensor) -> Result<Tensor> {
        let mut z = self.pre_activation(x)?;
        self.activation.apply_in_place(&mut z);
        Ok(z)
    }

    pub fn forward(&mut self, x: &Tensor) -> Result<Tensor> {
        let out = self.predict(x)?;
        self.cache = Some(DenseCache {
            input: x.clone(),
            output: out.clone(),
        });
        Ok(out)
    }

    /// Returns `(dx, dW, db)`. With `grad_is_pre_activation` the incoming
    /// gradient is taken to be with respect to `z` already (used for the
    /// fused softmax + cross-entropy gradient).
    pub fn backward(
        &mut self,
        grad: &Tensor,
        grad_is_pre_activation: bool,
    ) -> Result<(Tensor, Tensor, Tensor)> {
        let cache = self
            .cache
            .take()
            .ok_or_else(|| Error::State("dense backward without a cached forward pass".into()))?;
        if grad.shape() != cache.output.shape() {
            return Err(Error::State(format!(
                "dense backward gradient shape {:?} does not match forward output {:?}",
                grad.shape(),
                cache.output.shape()
            )));
        }
        let dz = if grad_is_pre_activation {
            grad.clone()
        } else {
            self.activation.backward(&cache.output, grad)
        };
        let dw = matmul_at_b(&dz, &cache.input)?;
        let mut db = vec![0.0; self.outputs()];
        for i in 0..dz.rows() {
            for (acc, v) in db.iter_mut().zip(dz.row(i)) {
                *acc += v;
            }
        }
        let dx = matmul(&dz, &self.weight)?;
        Ok((dx, dw, Tensor::from_parts_unchecked(vec![db.len()], db)))
    }

    pub(crate) fn clear_cache(&mut self) {
        self.cache = None;
    }
}

#[derive(Debug, Clone)]
struct NormCache {
    xhat: Tensor,
    inv_std: Vec<f64>,
    training: bool,
}

/// Per-column standardization without a learned scale or shift.
#[derive(Debug, Clone)]
pub struct BatchNormLayer {
    pub epsilon: f64,
    pub momentum: f64,
    pub running_mean: Tensor,
    pub running_var: Tensor,
    cache: Option<NormCache>,
}

impl BatchNormLayer {
    pub fn new(width: usize, epsilon: f64, momentum: f64) -> Result<Self> {
        if epsilon.is_nan() || epsilon <= 0.0 {
            return Err(Error::Argument(format!("batch-norm epsilon must be > 0, got {epsilon}")));
        }
        if !(0.0..1.0).contains(&momentum) {
            return Err(Error::Argument(format!(
                "batch-norm momentum must be in [0, 1), got {momentum}"
            )));
        }
        Ok(Self {
            epsilon,
            momentum,
            running_mean: Tensor::zeros(&[width]),
            running_var: Tensor::filled(&[width], 1.0),
            cache: None,
        })
    }

    pub fn width(&self) -> usize {
        self.running_mean.len()
    }

    fn check_width(&self, h: &Tensor) -> Result<(usize, usize)> {
        let (n, w) = h.dims2()?;
        if w != self.width() {
            return Err(Error::shape("batchnorm_forward", h.shape(), self.running_mean.shape()));
        }
        Ok((n, w))
    }

    /// Inference transform using the running statistics.
    pub fn predict(&self, h: &Tensor) -> Result<Tensor> {
        self.check_width(h)?;
        let mut out = h.clone();
        let mean = self.running_mean.data();
        let inv: Vec<f64> = self
            .running_var
            .data()
            .iter()
            .map(|v| 1.0 / (v + self.epsilon).sqrt())
            .collect();
        for i in 0..out.rows() {
            for ((v, m), s) in out.row_mut(i).iter_mut().zip(mean).zip(&inv) {
                *v = (*v - m) * s;
            }
        }
        Ok(out)
    }

    pub fn forward(&mut self, h: &Tensor, mode: Mode) -> Result<Tensor> {
        let (n, w) = self.check_width(h)?;
        if mode == Mode::Inference {
            let out = self.predict(h)?;
            let inv_std = self
                .running_var
                .data()
                .iter()
                .map(|v| 1.0 / (v + self.epsilon).sqrt())
                .collect();
            self.cache = Some(NormCache {
                xhat: out.clone(),
                inv_std,
                training: false,
            });
            return Ok(out);
        }
        if n < 2 {
            return Err(Error::Argument(format!(
                "batch normalization in training mode needs at least 2 rows, got {n}"
            )));
        }
        let mut mean = vec![0.0; w];
        for i in 0..n {
            for (m, v) in mean.iter_mut().zip(h.row(i)) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n as f64);
        let mut var = vec![0.0; w];
        for i in 0..n {
            for ((s, v), m) in var.iter_mut().zip(h.row(i)).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        var.iter_mut().for_each(|s| *s /= n as f64);
        let inv_std: Vec<f64> = var.iter().map(|v| 1.0 / (v + self.epsilon).sqrt()).collect();

        let mut xhat = h.clone();
        for i in 0..n {
            for ((v, m), s) in xhat.row_mut(i).iter_mut().zip(&mean).zip(&inv_std) {
                *v = (*v - m) * s;
            }
        }
        let k = self.momentum;
        for (r, m) in self.running_mean.data_mut().iter_mut().zip(&mean) {
            *r = k * *r + (1.0 - k) * m;
        }
        for (r, v) in self.running_var.data_mut().iter_mut().zip(&var) {
            *r = k * *r + (1.0 - k) * v;
        }
        self.cache = Some(NormCache {
            xhat: xhat.clone(),
            inv_std,
            training: true,
        });
        Ok(xhat)
    }

    pub fn backward(&mut self, grad: &Tensor) -> Result<Tensor> {
        let cache = self
            .cache
            .take()
            .ok_or_else(|| Error::State("batch-norm backward without a cached forward pass".into()))?;
        if grad.shape() != cache.xhat.shape() {
            return Err(Error::State(format!(
                "batch-norm backward gradient shape {:?} does not match forward output {:?}",
                grad.shape(),
                cache.xhat.shape()
            )));
        }
        let (n, w) = grad.dims2()?;
        let mut dx = grad.clone();
        if !cache.training {
            for i in 0..n {
                for (d, s) in dx.row_mut(i).iter_mut().zip(&cache.inv_std) {
                    *d *= s;
                }
            }
            return Ok(dx);
        }
        // dx = inv_std / n * (n*g - sum(g) - xhat * sum(g*xhat))
        let mut sum_g = vec![0.0; w];
        let mut sum_gx = vec![0.0; w];
        for i in 0..n {
            for (j, (&g, &x)) in grad.row(i).iter().zip(cache.xhat.row(i)).enumerate() {
                sum_g[j] += g;
                sum_gx[j] += g * x;
            }
        }
        let nf = n as f64;
        for i in 0..n {
            let xr = cache.xhat.row(i).to_vec();
            for (j, d) in dx.row_mut(i).iter_mut().enumerate() {
                *d = cache.inv_std[j] / nf * (nf * *d - sum_g[j] - xr[j] * sum_gx[j]);
            }
        }
        Ok(dx)
    }

    pub(crate) fn clear_cache(&mut self) {
        self.cache = None;
    }
}

/// Inverted dropout: survivors are scaled by `1 / (1 - p)` while training so
/// inference is the identity.
#[derive(Debug, Clone)]
pub struct DropoutLayer {
    p: f64,
    mask: Option<Tensor>,
}

impl DropoutLayer {
    pub fn new(p: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&p) {
            return Err(Error::Argument(format!("dropout probability must be in [0, 1), got {p}")));
        }
        Ok(Self { p, mask: None })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn forward(&mut self, h: &Tensor, mode: Mode, rng: &mut Rng) -> Result<Tensor> {
        if mode == Mode::Inference || self.p == 0.0 {
            self.mask = Some(Tensor::filled(h.shape(), 1.0));
            return Ok(h.clone());
        }
        let keep = 1.0 - self.p;
        let scale = 1.0 / keep;
        let mask: Vec<f64> = (0..h.len())
            .map(|_| if rng.next_f64() < keep { scale } else { 0.0 })
            .collect();
        let out: Vec<f64> = h.data().iter().zip(&mask).map(|(v, m)| v * m).collect();
        self.mask = Some(Tensor::from_parts_unchecked(h.shape().to_vec(), mask));
        Ok(Tensor::from_parts_unchecked(h.shape().to_vec(), out))
    }

    pub fn backward(&mut self, grad: &Tensor) -> Result<Tensor> {
        let mask = self
            .mask
            .take()
            .ok_or_else(|| Error::State("dropout backward without a cached forward pass".into()))?;
        if mask.shape() != grad.shape() {
            return Err(Error::State(format!(
                "dropout backward gradient shape {:?} does not match forward {:?}",
                grad.shape(),
                mask.shape()
            )));
        }
        let data = grad.data().iter().zip(mask.data()).map(|(g, m)| g * m).collect();
        Ok(Tensor::from_parts_unchecked(grad.shape().to_vec(), data))
    }

    pub(crate) fn clear_cache(&mut self) {
        self.mask = None;
    }
}
