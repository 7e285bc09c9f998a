//! Pipeline stages and their on-disk artifacts.

use std::cell::OnceCell;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use qhybrid_core::data::{
    augment, normalize_and_flatten, split_indices, AugmentSpec, RawDataset, VectorDataset,
    MNIST_SIDE,
};
use qhybrid_core::foundation::Archive;
use qhybrid_core::nn::{
    evaluate, mse_loss, train_observed, AutoencoderSpec, BatchSource, ClassifierSpec, EpochRecord,
    History, Loss, Network, Samples, TrainConfig,
};
use qhybrid_core::quantum::{
    read_quantum_meta, transform_features, transform_row, write_quantum_meta, QuantumConfig,
    ScalingStats,
};
use qhybrid_core::{Rng, Tensor};

use crate::config::{DataPaths, ExperimentConfig, StageParams};
use crate::error::{CliError, Result, StageContext};
use crate::report::{self, EvalReport, SummaryEntry, SummaryInput};

pub const AE_MODEL: &str = "ae_model.qhm";
pub const AE_LOSS: &str = "ae_loss.csv";
pub const RECON_DIR: &str = "recon";
pub const LATENTS: &str = "latents.qhm";
pub const QFEATURES: &str = "qfeatures.qhm";
pub const SUMMARY: &str = "summary.txt";
const CACHE_DIR: &str = ".cache";

const SPLITS: [&str; 3] = ["train", "val", "test"];

/// Which representation a classifier reads.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureSet {
    Latent,
    Quantum,
}

impl FeatureSet {
    pub fn name(self) -> &'static str {
        match self {
            FeatureSet::Latent => "latent",
            FeatureSet::Quantum => "quantum",
        }
    }

    pub fn model_file(self) -> String {
        format!("clf_{}.qhm", self.name())
    }

    pub fn csv_file(self) -> String {
        format!("clf_{}.csv", self.name())
    }

    pub fn confusion_file(self, split: &str) -> String {
        format!("confusion_{}_{split}.csv", self.name())
    }

    fn source_file(self) -> &'static str {
        match self {
            FeatureSet::Latent => LATENTS,
            FeatureSet::Quantum => QFEATURES,
        }
    }
}

impl fmt::Display for FeatureSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FeatureSet {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "latent" => Ok(FeatureSet::Latent),
            "quantum" => Ok(FeatureSet::Quantum),
            _ => Err(format!("expected latent or quantum, got {s}")),
        }
    }
}

#[derive(Debug)]
struct Splits {
    train: RawDataset,
    val: RawDataset,
    test: RawDataset,
}

impl Splits {
    fn get(&self, name: &str) -> &RawDataset {
        match name {
            "train" => &self.train,
            "val" => &self.val,
            _ => &self.test,
        }
    }
}

#[derive(Debug, Clone)]
pub struct AeOutcome {
    pub history: History,
    pub val_mse: Option<f64>,
}

/// Validation and test reports for one classifier.
#[derive(Debug, Clone)]
pub struct EvalPair {
    pub val: EvalReport,
    pub test: EvalReport,
}

#[derive(Debug, Clone)]
pub struct PipelineOutcome {
    /// Stage names that were recomputed rather than taken from cache.
    pub ran: Vec<&'static str>,
    pub ae_val_mse: Option<f64>,
    pub latent: EvalPair,
    pub quantum: EvalPair,
}

/// Runs stages for one configuration, writing into `cfg.out_dir`.
pub struct Runner {
    cfg: ExperimentConfig,
    paths: DataPaths,
    root: Rng,
    force: bool,
    verbose: bool,
    data: OnceCell<Splits>,
}

fn u64_to_tensor(v: u64) -> Tensor {
    Tensor::vector(vec![(v >> 32) as f64, (v & 0xffff_ffff) as f64]).expect("finite")
}

fn labels_tensor(labels: &[u8]) -> Tensor {
    Tensor::vector(labels.iter().map(|&l| f64::from(l)).collect()).expect("finite")
}

fn tensor_labels(t: &Tensor) -> Result<Vec<u8>> {
    t.data()
        .iter()
        .map(|&v| {
            if (0.0..=9.0).contains(&v) && v.fract() == 0.0 {
                Ok(v as u8)
            } else {
                Err(CliError::Core(qhybrid_core::Error::Value(format!(
                    "stored label {v} is not a class index"
                ))))
            }
        })
        .collect()
}

fn pixels_f64(img: &[u8]) -> impl Iterator<Item = f64> + '_ {
    img.iter().map(|&p| f64::from(p) / 255.0)
}

fn augment_batch(
    raw: &RawDataset,
    spec: &AugmentSpec,
    indices: &[usize],
    rng: &mut Rng,
) -> qhybrid_core::Result<Tensor> {
    let d = raw.images().pixel_count();
    let mut data = Vec::with_capacity(indices.len() * d);
    for &i in indices {
        let img = augment(raw.images().image(i), spec, rng)?;
        data.extend(pixels_f64(&img));
    }
    Tensor::matrix(indices.len(), d, data)
}

/// Training images augmented per batch, reconstructing themselves.
struct AugmentedImages<'a> {
    raw: &'a RawDataset,
    plain: &'a Tensor,
    spec: &'a AugmentSpec,
}

impl BatchSource for AugmentedImages<'_> {
    fn len(&self) -> usize {
        self.raw.len()
    }

    fn batch(&self, indices: &[usize], rng: Option<&mut Rng>) -> qhybrid_core::Result<(Tensor, Tensor)> {
        let x = match rng {
            Some(rng) => augment_batch(self.raw, self.spec, indices, rng)?,
            None => self.plain.select_rows(indices),
        };
        Ok((x.clone(), x))
    }
}

/// Classifier inputs recomputed from augmented images: encoder, then the
/// quantum transform when `quantum` is set. Evaluation uses the cached rows.
struct AugmentedFeatures<'a> {
    raw: &'a RawDataset,
    spec: &'a AugmentSpec,
    cached: &'a VectorDataset,
    encoder: &'a Network,
    quantum: Option<(ScalingStats, QuantumConfig)>,
}

impl BatchSource for AugmentedFeatures<'_> {
    fn len(&self) -> usize {
        self.cached.len()
    }

    fn batch(&self, indices: &[usize], rng: Option<&mut Rng>) -> qhybrid_core::Result<(Tensor, Tensor)> {
        let y = self.cached.labels_onehot.select_rows(indices);
        let Some(rng) = rng else {
            return Ok((self.cached.features.select_rows(indices), y));
        };
        let x = augment_batch(self.raw, self.spec, indices, rng)?;
        let h = AutoencoderSpec::encode(self.encoder, &x)?;
        let features = match &self.quantum {
            None => h,
            Some((stats, config)) => {
                let mut data = Vec::with_capacity(indices.len() * self.cached.width());
                let mut scaled = vec![0.0; h.cols()];
                for i in 0..h.rows() {
                    for (j, (s, &v)) in scaled.iter_mut().zip(h.row(i)).enumerate() {
                        *s = stats.scale(j, v);
                    }
                    data.extend(transform_row(&scaled, config, rng)?);
                }
                Tensor::matrix(indices.len(), self.cached.width(), data)?
            }
        };
        Ok((features, y))
    }
}

impl Runner {
    /// Validates the config, locates the data and creates the output
    /// directory. Nothing is loaded until a stage needs it.
    pub fn new(cfg: ExperimentConfig, force: bool) -> Result<Self> {
        cfg.validate()?;
        let paths = cfg.data_paths()?;
        std::fs::create_dir_all(cfg.out_dir.join(CACHE_DIR))
            .map_err(|e| CliError::io(&cfg.out_dir, e))?;
        Ok(Self {
            root: Rng::seed_from_u64(cfg.seed),
            cfg,
            paths,
            force,
            verbose: false,
            data: OnceCell::new(),
        })
    }

    /// Progress lines on stderr.
    pub fn verbose(mut self, on: bool) -> Self {
        self.verbose = on;
        self
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.cfg
    }

    pub fn out(&self, name: &str) -> PathBuf {
        self.cfg.out_dir.join(name)
    }

    fn log(&self, msg: impl fmt::Display) {
        if self.verbose {
            eprintln!("{msg}");
        }
    }

    fn splits(&self) -> Result<&Splits> {
        if let Some(s) = self.data.get() {
            return Ok(s);
        }
        self.log("loading MNIST");
        let full = RawDataset::load(&self.paths.train_images, &self.paths.train_labels)?;
        let test = RawDataset::load(&self.paths.test_images, &self.paths.test_labels)?;
        let (train_idx, val_idx) = split_indices(
            full.len(),
            self.cfg.train_subset,
            self.cfg.val_fraction,
            &mut self.root.split("split"),
        )?;
        let splits = Splits {
            train: full.select(&train_idx),
            val: full.select(&val_idx),
            test,
        };
        Ok(self.data.get_or_init(|| splits))
    }

    fn train_config(&self, p: &StageParams, loss: Loss) -> TrainConfig {
        let mut t = TrainConfig::new(loss);
        t.epochs = p.epochs;
        t.batch_size = p.batch_size;
        t.adam.lr = p.lr;
        t.lr_step = self.cfg.lr_step;
        t.lr_factor = self.cfg.lr_factor;
        t
    }

    fn progress<'a>(&'a self, stage: &'a str) -> impl FnMut(&EpochRecord) + 'a {
        move |r: &EpochRecord| {
            let mut line = format!("{stage} epoch {} lr {:.6} train_loss {:.6}", r.epoch, r.lr, r.train_loss);
            if let Some(a) = r.train_accuracy {
                line += &format!(" train_acc {a:.4}");
            }
            if let Some(l) = r.val_loss {
                line += &format!(" val_loss {l:.6}");
            }
            if let Some(a) = r.val_accuracy {
                line += &format!(" val_acc {a:.4}");
            }
            self.log(line);
        }
    }

    fn require(&self, name: &str, producer: &str) -> Result<PathBuf> {
        let p = self.out(name);
        if p.is_file() {
            Ok(p)
        } else {
            Err(CliError::Config(format!(
                "{} is missing; run {producer} first",
                p.display()
            )))
        }
    }

    fn recon_files(&self) -> Vec<String> {
        (0..self.cfg.recon_samples)
            .flat_map(|i| {
                [
                    format!("{RECON_DIR}/val_{i:02}_input.pgm"),
                    format!("{RECON_DIR}/val_{i:02}_output.pgm"),
                ]
            })
            .collect()
    }

    /// Trains the autoencoder and writes the model, the loss CSV and
    /// reconstruction pairs from the validation split.
    pub fn train_ae(&self) -> Result<AeOutcome> {
        let splits = self.splits()?;
        let train_set = normalize_and_flatten(&splits.train);
        let val_set = normalize_and_flatten(&splits.val);
        let mut net = AutoencoderSpec::default().build(&mut self.root.split("ae/init"));
        let cfg = self.train_config(&self.cfg.ae, Loss::Mse);
        let val = Samples::reconstruction(&val_set.features);
        let val_src: Option<&dyn BatchSource> = (!val_set.is_empty()).then_some(&val as _);
        let mut observer = self.progress("autoencoder");
        let mut rng = self.root.split("ae/train");
        let history = if self.cfg.ae.augment {
            let src = AugmentedImages {
                raw: &splits.train,
                plain: &train_set.features,
                spec: &self.cfg.augment,
            };
            train_observed(&mut net, &src, val_src, &cfg, &mut rng, &mut observer)?
        } else {
            let src = Samples::reconstruction(&train_set.features);
            train_observed(&mut net, &src, val_src, &cfg, &mut rng, &mut observer)?
        };
        net.to_archive().save(self.out(AE_MODEL))?;
        report::write_ae_loss_csv(&self.out(AE_LOSS), &history)?;

        let recon_dir = self.out(RECON_DIR);
        std::fs::create_dir_all(&recon_dir).map_err(|e| CliError::io(&recon_dir, e))?;
        let n = self.cfg.recon_samples.min(val_set.len());
        if n > 0 {
            let idx: Vec<usize> = (0..n).collect();
            let input = val_set.features.select_rows(&idx);
            let output = net.predict(&input)?;
            let side = MNIST_SIDE;
            for i in 0..n {
                let input_path = recon_dir.join(format!("val_{i:02}_input.pgm"));
                let output_path = recon_dir.join(format!("val_{i:02}_output.pgm"));
                report::write_pgm(&input_path, input.row(i), side, side)?;
                report::write_pgm(&output_path, output.row(i), side, side)?;
            }
        }
        let val_mse = if val_set.is_empty() {
            None
        } else {
            Some(evaluate(&net, &val, Loss::Mse)?.loss)
        };
        Ok(AeOutcome { history, val_mse })
    }

    fn load_ae(&self) -> Result<Network> {
        let path = self.require(AE_MODEL, "train-ae")?;
        let net = Network::from_archive(&Archive::load(path)?)?;
        if net.input_width() != Some(MNIST_SIDE * MNIST_SIDE)
            || net.layers().len() <= AutoencoderSpec::ENCODER_LAYERS
        {
            return Err(CliError::Core(qhybrid_core::Error::Value(format!(
                "{AE_MODEL} is not a 784-wide autoencoder"
            ))));
        }
        Ok(net)
    }

    /// Encodes every split with the stored autoencoder into `latents.qhm`.
    pub fn encode(&self) -> Result<()> {
        let net = self.load_ae()?;
        let splits = self.splits()?;
        let mut out = Archive::new();
        for name in SPLITS {
            let ds = normalize_and_flatten(splits.get(name));
            let h = AutoencoderSpec::encode(&net, &ds.features)?;
            out.push(format!("{name}/features"), h)?;
            out.push(format!("{name}/labels"), labels_tensor(splits.get(name).labels()))?;
        }
        out.save(self.out(LATENTS))?;
        Ok(())
    }

    /// Fits scaling on the training latents and writes quantum features for
    /// every split, with the scaling statistics, mode and seed alongside.
    pub fn qtransform(&self) -> Result<()> {
        let latents = Archive::load(self.require(LATENTS, "encode")?)?;
        let train = latents.require("train/features")?;
        let stats = ScalingStats::fit(train)?;
        let q = &self.cfg.quantum;
        let rng = self.root.split("quantum");
        let mut out = Archive::new();
        for name in SPLITS {
            let f = transform_features(latents.require(&format!("{name}/features"))?, q, Some(&stats), &rng.split(name))?;
            out.push(format!("{name}/features"), f)?;
            out.push(format!("{name}/labels"), latents.require(&format!("{name}/labels"))?.clone())?;
        }
        write_quantum_meta(&mut out, &stats, q)?;
        out.push("meta/seed", u64_to_tensor(self.cfg.seed))?;
        out.save(self.out(QFEATURES))?;
        Ok(())
    }

    fn load_features(&self, which: FeatureSet) -> Result<Archive> {
        let producer = match which {
            FeatureSet::Latent => "encode",
            FeatureSet::Quantum => "qtransform",
        };
        Ok(Archive::load(self.require(which.source_file(), producer)?)?)
    }

    fn dataset(a: &Archive, split: &str) -> Result<VectorDataset> {
        let features = a.require(&format!("{split}/features"))?.clone();
        let labels = tensor_labels(a.require(&format!("{split}/labels"))?)?;
        if features.rows() != labels.len() {
            return Err(CliError::Core(qhybrid_core::Error::Value(format!(
                "{split}: {} feature rows but {} labels",
                features.rows(),
                labels.len()
            ))));
        }
        Ok(VectorDataset::from_labels(features, &labels)?)
    }

    /// Trains a classifier on the chosen feature set and writes the model
    /// and its per-epoch CSV.
    pub fn train_clf(&self, which: FeatureSet) -> Result<History> {
        let a = self.load_features(which)?;
        let train_set = Self::dataset(&a, "train")?;
        let val_set = Self::dataset(&a, "val")?;
        let mut spec = ClassifierSpec::new(train_set.width());
        spec.hidden = self.cfg.clf_hidden.clone();
        spec.dropout = self.cfg.clf_dropout;
        let mut net = spec.build(&mut self.root.split(&format!("clf/{which}/init")))?;
        let cfg = self.train_config(&self.cfg.clf, Loss::CrossEntropy);
        let val_src: Option<&dyn BatchSource> = (!val_set.is_empty()).then_some(&val_set as _);
        let mut rng = self.root.split(&format!("clf/{which}/train"));
        let stage = format!("classifier[{which}]");
        let mut observer = self.progress(&stage);
        let history = if self.cfg.clf.augment {
            let encoder = self.load_ae()?;
            let splits = self.splits()?;
            if splits.train.len() != train_set.len() {
                return Err(CliError::Core(qhybrid_core::Error::Value(format!(
                    "{} has {} training rows but the split has {}",
                    which.source_file(),
                    train_set.len(),
                    splits.train.len()
                ))));
            }
            let quantum = match which {
                FeatureSet::Latent => None,
                FeatureSet::Quantum => Some(read_quantum_meta(&a)?),
            };
            let src = AugmentedFeatures {
                raw: &splits.train,
                spec: &self.cfg.augment,
                cached: &train_set,
                encoder: &encoder,
                quantum,
            };
            train_observed(&mut net, &src, val_src, &cfg, &mut rng, &mut observer)?
        } else {
            train_observed(&mut net, &train_set, val_src, &cfg, &mut rng, &mut observer)?
        };
        net.to_archive().save(self.out(&which.model_file()))?;
        report::write_clf_csv(&self.out(&which.csv_file()), &history)?;
        Ok(history)
    }

    fn evaluate_split(net: &Network, ds: &VectorDataset) -> Result<EvalReport> {
        if net.input_width() != Some(ds.width()) {
            return Err(CliError::Core(qhybrid_core::Error::Value(format!(
                "classifier expects {:?} features, data has {}",
                net.input_width(),
                ds.width()
            ))));
        }
        let loss = evaluate(net, ds, Loss::CrossEntropy)?.loss;
        let pred = net.predict(&ds.features)?.argmax_rows();
        EvalReport::from_predictions(&pred, &ds.labels(), loss)
    }

    /// Validation and test metrics for a stored classifier, without writing.
    pub fn measure(&self, which: FeatureSet) -> Result<EvalPair> {
        let net = Network::from_archive(&Archive::load(self.require(&which.model_file(), "train-clf")?)?)?;
        let a = self.load_features(which)?;
        Ok(EvalPair {
            val: Self::evaluate_split(&net, &Self::dataset(&a, "val")?)?,
            test: Self::evaluate_split(&net, &Self::dataset(&a, "test")?)?,
        })
    }

    /// [`Runner::measure`] plus the two confusion CSVs.
    pub fn eval(&self, which: FeatureSet) -> Result<EvalPair> {
        let pair = self.measure(which)?;
        pair.val.write_confusion_csv(&self.out(&which.confusion_file("val")))?;
        pair.test.write_confusion_csv(&self.out(&which.confusion_file("test")))?;
        Ok(pair)
    }

    /// Reconstruction MSE on the validation split recomputed by decoding the
    /// cached latents.
    pub fn ae_val_mse(&self) -> Result<Option<f64>> {
        let net = self.load_ae()?;
        let latents = Archive::load(self.require(LATENTS, "encode")?)?;
        let h = latents.require("val/features")?;
        if h.rows() == 0 {
            return Ok(None);
        }
        let target = normalize_and_flatten(&self.splits()?.val).features;
        let recon = AutoencoderSpec::decode(&net, h)?;
        Ok(Some(mse_loss(&target, &recon)?.0))
    }

    fn key_path(&self, stage: &str) -> PathBuf {
        self.cfg.out_dir.join(CACHE_DIR).join(format!("{stage}.key"))
    }

    fn is_fresh(&self, stage: &str, key: &str, outputs: &[String]) -> bool {
        !self.force
            && outputs.iter().all(|o| self.out(o).is_file())
            && std::fs::read_to_string(self.key_path(stage)).is_ok_and(|k| k == key)
    }

    fn record_key(&self, stage: &str, key: &str) -> Result<()> {
        let p = self.key_path(stage);
        std::fs::write(&p, key).map_err(|e| CliError::io(p, e))
    }

    /// Runs `body` unless its outputs exist, the stored key matches and no
    /// upstream stage reran. Returns whether it ran.
    fn step(
        &self,
        stage: &'static str,
        key: &str,
        outputs: &[String],
        upstream_ran: bool,
        ran: &mut Vec<&'static str>,
        body: impl FnOnce() -> Result<()>,
    ) -> Result<bool> {
        if !upstream_ran && self.is_fresh(stage, key, outputs) {
            self.log(format!("{stage}: cached"));
            return Ok(false);
        }
        self.log(format!("{stage}: running"));
        // A stale key must not survive a failed run.
        let _ = std::fs::remove_file(self.key_path(stage));
        body().stage(stage)?;
        self.record_key(stage, key)?;
        ran.push(stage);
        Ok(true)
    }

    pub fn stage_keys(&self) -> [String; 5] {
        let ae = self.cfg.ae_key(&self.paths);
        let encode = format!("{ae}encode\n");
        let quantum = format!("{encode}{}", self.cfg.quantum_key());
        let clf = self.cfg.clf_key();
        [
            ae,
            encode.clone(),
            quantum.clone(),
            format!("{encode}{clf}"),
            format!("{quantum}{clf}"),
        ]
    }

    /// Records the key of a stage run directly from its verb, so a later
    /// pipeline can reuse the output.
    pub fn mark_done(&self, stage: &'static str) -> Result<()> {
        let [ae, encode, quantum, latent, q] = self.stage_keys();
        let key = match stage {
            "train-ae" => ae,
            "encode" => encode,
            "qtransform" => quantum,
            "train-clf-latent" => latent,
            "train-clf-quantum" => q,
            _ => return Ok(()),
        };
        self.record_key(stage, &key)
    }

    /// train-ae → encode → qtransform → both classifiers → evaluation and
    /// `summary.txt`, reusing cached stages where possible.
    pub fn pipeline(&self) -> Result<PipelineOutcome> {
        let [ae_key, enc_key, q_key, lat_key, qc_key] = self.stage_keys();
        let mut ran = Vec::new();
        let mut ae_outputs = vec![AE_MODEL.to_string(), AE_LOSS.to_string()];
        ae_outputs.extend(self.recon_files());
        let ae = self.step("train-ae", &ae_key, &ae_outputs, false, &mut ran, || {
            self.train_ae().map(|_| ())
        })?;
        let enc = self.step("encode", &enc_key, &[LATENTS.into()], ae, &mut ran, || self.encode())?;
        let q = self.step("qtransform", &q_key, &[QFEATURES.into()], enc, &mut ran, || self.qtransform())?;
        let lat = FeatureSet::Latent;
        let qf = FeatureSet::Quantum;
        let l = self.step(
            "train-clf-latent",
            &lat_key,
            &[lat.model_file(), lat.csv_file()],
            enc,
            &mut ran,
            || self.train_clf(lat).map(|_| ()),
        )?;
        let c = self.step(
            "train-clf-quantum",
            &qc_key,
            &[qf.model_file(), qf.csv_file()],
            q,
            &mut ran,
            || self.train_clf(qf).map(|_| ()),
        )?;

        let latent = self.measure(lat).stage("eval")?;
        let quantum = self.measure(qf).stage("eval")?;
        let ae_val_mse = self.ae_val_mse().stage("eval")?;
        let report_outputs = vec![
            SUMMARY.to_string(),
            lat.confusion_file("val"),
            lat.confusion_file("test"),
            qf.confusion_file("val"),
            qf.confusion_file("test"),
        ];
        let report_key = format!("{lat_key}{qc_key}");
        self.step("report", &report_key, &report_outputs, l || c, &mut ran, || {
            for (which, pair) in [(lat, &latent), (qf, &quantum)] {
                pair.val.write_confusion_csv(&self.out(&which.confusion_file("val")))?;
                pair.test.write_confusion_csv(&self.out(&which.confusion_file("test")))?;
            }
            let text = report::summary_text(&SummaryInput {
                seed: self.cfg.seed,
                train_samples: self.splits()?.train.len(),
                val_samples: latent.val.total() as usize,
                test_samples: latent.test.total() as usize,
                ae_val_mse,
                quantum: format!("{:?} {:?}", self.cfg.quantum.mode, self.cfg.quantum.kind),
                models: vec![
                    SummaryEntry {
                        model: "latent",
                        val: &latent.val,
                        test: &latent.test,
                    },
                    SummaryEntry {
                        model: "quantum",
                        val: &quantum.val,
                        test: &quantum.test,
                    },
                ],
            });
            let p = self.out(SUMMARY);
            std::fs::write(&p, text).map_err(|e| CliError::io(p, e))
        })?;
        Ok(PipelineOutcome {
            ran,
            ae_val_mse,
            latent,
            quantum,
        })
    }

    pub fn check_ae(&self, val_mse: Option<f64>) -> Result<()> {
        let limit = self.cfg.check.ae_val_mse;
        match val_mse {
            Some(m) if m <= limit => Ok(()),
            Some(m) => Err(CliError::CheckFailed(format!(
                "autoencoder val mse {m:.6} > {limit}"
            ))),
            None => Err(CliError::CheckFailed("no validation split to check".into())),
        }
    }

    /// Quantum features must also reach six times chance.
    pub fn check_accuracy(&self, which: FeatureSet, val_accuracy: f64) -> Result<()> {
        let floor = match which {
            FeatureSet::Latent => self.cfg.check.latent_accuracy,
            FeatureSet::Quantum => self
                .cfg
                .check
                .quantum_accuracy
                .max(6.0 / qhybrid_core::data::NUM_CLASSES as f64),
        };
        if val_accuracy >= floor {
            Ok(())
        } else {
            Err(CliError::CheckFailed(format!(
                "{which} val accuracy {val_accuracy:.4} < {floor}"
            )))
        }
    }

    pub fn check_pipeline(&self, o: &PipelineOutcome) -> Result<()> {
        self.check_ae(o.ae_val_mse)?;
        self.check_accuracy(FeatureSet::Latent, o.latent.val.accuracy)?;
        self.check_accuracy(FeatureSet::Quantum, o.quantum.val.accuracy)
    }
}

/// Reads the summary written by the last pipeline run.
pub fn read_summary(out_dir: &Path) -> Result<String> {
    let p = out_dir.join(SUMMARY);
    std::fs::read_to_string(&p).map_err(|e| CliError::io(p, e))
}
