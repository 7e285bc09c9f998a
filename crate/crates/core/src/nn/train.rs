use crate::data::{epoch_batches, VectorDataset};
use crate::error::{Error, Result};
use crate::foundation::{Rng, Tensor};
use crate::nn::adam::{lr_schedule, AdamConfig, AdamState};
use crate::nn::layers::Mode;
use crate::nn::loss::{cross_entropy_loss, mse_loss, Loss};
use crate::nn::network::Network;

/// Rows used when evaluating a whole dataset in inference mode.
pub const EVAL_CHUNK: usize = 1000;

/// Supplies `(inputs, targets)` for a set of row indices.
///
/// During training `rng` is `Some`, letting a source apply random
/// augmentation; evaluation passes `None` and must get the plain rows.
pub trait BatchSource {
    fn len(&self) -> usize;

    fn batch(&self, indices: &[usize], rng: Option<&mut Rng>) -> Result<(Tensor, Tensor)>;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Plain in-memory inputs and targets with matching row counts.
#[derive(Debug, Clone, Copy)]
pub struct Samples<'a> {
    pub inputs: &'a Tensor,
    pub targets: &'a Tensor,
}

impl<'a> Samples<'a> {
    pub fn new(inputs: &'a Tensor, targets: &'a Tensor) -> Result<Self> {
        if inputs.rows() != targets.rows() {
            return Err(Error::shape("Samples::new", inputs.shape(), targets.shape()));
        }
        Ok(Self { inputs, targets })
    }

    /// Inputs reconstruct themselves, as for an autoencoder.
    pub fn reconstruction(inputs: &'a Tensor) -> Self {
        Self {
            inputs,
            targets: inputs,
        }
    }
}

impl BatchSource for Samples<'_> {
    fn len(&self) -> usize {
        self.inputs.rows()
    }

    fn batch(&self, indices: &[usize], _rng: Option<&mut Rng>) -> Result<(Tensor, Tensor)> {
        Ok((self.inputs.select_rows(indices), self.targets.select_rows(indices)))
    }
}

impl BatchSource for VectorDataset {
    fn len(&self) -> usize {
        VectorDataset::len(self)
    }

    fn batch(&self, indices: &[usize], _rng: Option<&mut Rng>) -> Result<(Tensor, Tensor)> {
        Ok((
            self.features.select_rows(indices),
            self.labels_onehot.select_rows(indices),
        ))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub loss: Loss,
    pub adam: AdamConfig,
    /// Step-decay period in epochs.
    pub lr_step: usize,
    /// Step-decay multiplier, in `(0, 1]`.
    pub lr_factor: f64,
    pub shuffle: bool,
}

impl TrainConfig {
    pub fn new(loss: Loss) -> Self {
        Self {
            epochs: 50,
            batch_size: 128,
            loss,
            adam: AdamConfig::default(),
            lr_step: 15,
            lr_factor: 0.5,
            shuffle: true,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(Error::Argument("batch size must be at least 1".into()));
        }
        if self.lr_step == 0 || !(self.lr_factor > 0.0 && self.lr_factor <= 1.0) {
            return Err(Error::Argument(format!(
                "invalid lr schedule: step {} factor {}",
                self.lr_step, self.lr_factor
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub lr: f64,
    /// Mean training-mode loss over the epoch's batches.
    pub train_loss: f64,
    /// Training-mode accuracy (cross-entropy runs only).
    pub train_accuracy: Option<f64>,
    pub val_loss: Option<f64>,
    pub val_accuracy: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct History {
    pub records: Vec<EpochRecord>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub loss: f64,
    pub accuracy: Option<f64>,
}

fn loss_and_grad(loss: Loss, targets: &Tensor, output: &Tensor) -> Result<(f64, Tensor)> {
    match loss {
        Loss::Mse => mse_loss(targets, output),
        Loss::CrossEntropy => cross_entropy_loss(targets, output),
    }
}

fn correct(output: &Tensor, targets: &Tensor) -> usize {
    output
        .argmax_rows()
        .into_iter()
        .zip(targets.argmax_rows())
        .filter(|(a, b)| a == b)
        .count()
}

/// Inference-mode loss (and accuracy for cross-entropy) over every row.
pub fn evaluate(net: &Network, data: &dyn BatchSource, loss: Loss) -> Result<Evaluation> {
    let n = data.len();
    if n == 0 {
        return Err(Error::Argument("cannot evaluate an empty dataset".into()));
    }
    let mut total = 0.0;
    let mut hits = 0;
    let all: Vec<usize> = (0..n).collect();
    for chunk in all.chunks(EVAL_CHUNK) {
        let (x, y) = data.batch(chunk, None)?;
        let out = net.predict(&x)?;
        let (l, _) = loss_and_grad(loss, &y, &out)?;
        total += l * chunk.len() as f64;
        hits += correct(&out, &y);
    }
    Ok(Evaluation {
        loss: total / n as f64,
        accuracy: (loss == Loss::CrossEntropy).then(|| hits as f64 / n as f64),
    })
}

/// Mini-batch Adam training with step-decay learning rate.
///
/// Each epoch derives its own child stream from `rng` for shuffling, dropout
/// and augmentation, so a fixed seed gives bit-identical parameters. The
/// network is left in inference mode.
pub fn train(
    net: &mut Network,
    train_data: &dyn BatchSource,
    val_data: Option<&dyn BatchSource>,
    config: &TrainConfig,
    rng: &mut Rng,
) -> Result<History> {
    train_observed(net, train_data, val_data, config, rng, &mut |_| {})
}

/// [`train`] that reports each finished epoch to `observer`.
pub fn train_observed(
    net: &mut Network,
    train_data: &dyn BatchSource,
    val_data: Option<&dyn BatchSource>,
    config: &TrainConfig,
    rng: &mut Rng,
    observer: &mut dyn FnMut(&EpochRecord),
) -> Result<History> {
    config.validate()?;
    if train_data.is_empty() {
        return Err(Error::Argument("training set is empty".into()));
    }
    if config.loss == Loss::CrossEntropy {
        match net.layers().last() {
            Some(crate::nn::Layer::Dense(d)) if d.activation() == crate::nn::Activation::Softmax => {}
            _ => {
                return Err(Error::Argument(
                    "cross-entropy training needs a final softmax layer".into(),
                ))
            }
        }
    }
    let mut adam = AdamState::new(config.adam, net.params());
    let mut history = History::default();
    let min_batch = if net.has_batch_norm() { 2 } else { 1 };

    for epoch in 0..config.epochs {
        let lr = lr_schedule(config.adam.lr, epoch, config.lr_step, config.lr_factor);
        adam.set_lr(lr);
        let epoch_rng = rng.split_u64(epoch as u64);
        let mut shuffle_rng = epoch_rng.split("shuffle");
        let mut dropout_rng = epoch_rng.split("dropout");
        let mut augment_rng = epoch_rng.split("augment");

        net.set_mode(Mode::Training);
        let mut loss_sum = 0.0;
        let mut hits = 0;
        let mut seen = 0;
        for idx in epoch_batches(train_data.len(), config.batch_size, config.shuffle, &mut shuffle_rng)? {
            if idx.len() < min_batch {
                continue;
            }
            let (x, y) = train_data.batch(&idx, Some(&mut augment_rng))?;
            let out = net.forward(&x, &mut dropout_rng)?;
            let (l, g) = loss_and_grad(config.loss, &y, &out)?;
            let grads = match config.loss {
                Loss::Mse => net.backward(&g)?,
                Loss::CrossEntropy => net.backward_from_logits(&g)?,
            };
            adam.step(&mut net.params_mut(), &grads)?;
            loss_sum += l * idx.len() as f64;
            hits += correct(&out, &y);
            seen += idx.len();
        }
        net.set_mode(Mode::Inference);

        let seen_f = seen.max(1) as f64;
        let val = val_data
            .filter(|v| !v.is_empty())
            .map(|v| evaluate(net, v, config.loss))
            .transpose()?;
        let record = EpochRecord {
            epoch,
            lr,
            train_loss: loss_sum / seen_f,
            train_accuracy: (config.loss == Loss::CrossEntropy).then(|| hits as f64 / seen_f),
            val_loss: val.map(|v| v.loss),
            val_accuracy: val.and_then(|v| v.accuracy),
        };
        observer(&record);
        history.records.push(record);
    }
    net.set_mode(Mode::Inference);
    net.clear_caches();
    Ok(history)
}
