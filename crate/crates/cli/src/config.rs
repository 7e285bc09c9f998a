//! Flat `key = value` experiment configuration.
//!
//! Blank lines and text after `#` are ignored. Keys may appear at most once;
//! unknown keys are rejected so typos do not silently fall back to defaults.
//! Relative paths resolve against the directory holding the config file.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use qhybrid_core::data::{mnist_paths, AugmentSpec};
use qhybrid_core::quantum::{FeatureKind, MeasureMode, QuantumConfig};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct StageParams {
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub augment: bool,
}

/// Thresholds enforced by `--check`.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckThresholds {
    pub ae_val_mse: f64,
    pub latent_accuracy: f64,
    pub quantum_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub data_dir: PathBuf,
    pub train_images: Option<PathBuf>,
    pub train_labels: Option<PathBuf>,
    pub test_images: Option<PathBuf>,
    pub test_labels: Option<PathBuf>,
    pub seed: u64,
    pub out_dir: PathBuf,
    /// Rows kept from the shuffled training file; `None` keeps all.
    pub train_subset: Option<usize>,
    pub val_fraction: f64,
    pub ae: StageParams,
    pub clf: StageParams,
    pub clf_hidden: Vec<usize>,
    pub clf_dropout: f64,
    pub lr_step: usize,
    pub lr_factor: f64,
    pub augment: AugmentSpec,
    pub quantum: QuantumConfig,
    pub recon_samples: usize,
    pub check: CheckThresholds,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            data_dir: PathBuf::from("data/mnist"),
            train_images: None,
            train_labels: None,
            test_images: None,
            test_labels: None,
            seed: 42,
            out_dir: PathBuf::from("runs/default"),
            train_subset: None,
            val_fraction: 0.1,
            ae: StageParams {
                epochs: 50,
                batch_size: 128,
                lr: 0.001,
                augment: false,
            },
            clf: StageParams {
                epochs: 50,
                batch_size: 128,
                lr: 0.001,
                augment: true,
            },
            clf_hidden: vec![128, 64, 32],
            clf_dropout: 0.3,
            lr_step: 15,
            lr_factor: 0.5,
            augment: AugmentSpec::default(),
            quantum: QuantumConfig::default(),
            recon_samples: 10,
            check: CheckThresholds {
                ae_val_mse: 0.03,
                latent_accuracy: 0.78,
                quantum_accuracy: 0.60,
            },
        }
    }
}

/// Resolved locations of the four IDX files.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DataPaths {
    pub train_images: PathBuf,
    pub train_labels: PathBuf,
    pub test_images: PathBuf,
    pub test_labels: PathBuf,
}

fn bad(key: &str, value: &str, what: &str) -> CliError {
    CliError::Config(format!("{key} = {value}: {what}"))
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| bad(key, value, "not a valid number"))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(bad(key, value, "expected true or false")),
    }
}

impl ExperimentConfig {
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let base = path.parent().unwrap_or(Path::new(""));
        Self::parse(&text, base)
    }

    /// Parses config text; relative paths are joined onto `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let mut seen = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("line {}: expected key = value", n + 1)))?;
            let (k, v) = (k.trim(), v.trim());
            if seen.insert(k.to_string(), v.to_string()).is_some() {
                return Err(CliError::Config(format!("line {}: duplicate key {k}", n + 1)));
            }
        }
        let mut cfg = Self::default();
        let path = |v: &str| base.join(v);
        for (k, v) in &seen {
            let v = v.as_str();
            match k.as_str() {
                "data_dir" => cfg.data_dir = path(v),
                "train_images" => cfg.train_images = Some(path(v)),
                "train_labels" => cfg.train_labels = Some(path(v)),
                "test_images" => cfg.test_images = Some(path(v)),
                "test_labels" => cfg.test_labels = Some(path(v)),
                "out_dir" => cfg.out_dir = path(v),
                "seed" => cfg.seed = parse_num(k, v)?,
                "train_subset" => {
                    cfg.train_subset = match v {
                        "all" => None,
                        _ => Some(parse_num(k, v)?),
                    }
                }
                "val_fraction" => cfg.val_fraction = parse_num(k, v)?,
                "ae_epochs" => cfg.ae.epochs = parse_num(k, v)?,
                "ae_batch_size" => cfg.ae.batch_size = parse_num(k, v)?,
                "ae_lr" => cfg.ae.lr = parse_num(k, v)?,
                "ae_augment" => cfg.ae.augment = parse_bool(k, v)?,
                "clf_epochs" => cfg.clf.epochs = parse_num(k, v)?,
                "clf_batch_size" => cfg.clf.batch_size = parse_num(k, v)?,
                "clf_lr" => cfg.clf.lr = parse_num(k, v)?,
                "clf_augment" => cfg.clf.augment = parse_bool(k, v)?,
                "clf_hidden" => {
                    cfg.clf_hidden = v
                        .split(',')
                        .map(|w| parse_num(k, w.trim()))
                        .collect::<Result<_>>()?
                }
                "clf_dropout" => cfg.clf_dropout = parse_num(k, v)?,
                "lr_step" => cfg.lr_step = parse_num(k, v)?,
                "lr_factor" => cfg.lr_factor = parse_num(k, v)?,
                "augment_rotate_deg" => cfg.augment.rotate_max_deg = parse_num(k, v)?,
                "augment_shift_px" => cfg.augment.shift_max_px = parse_num(k, v)?,
                "augment_hflip" => cfg.augment.hflip_enabled = parse_bool(k, v)?,
                "augment_probability" => cfg.augment.probability = parse_num(k, v)?,
                "quantum_mode" => {
                    cfg.quantum.mode = match v {
                        "exact" => MeasureMode::Exact,
                        "sampled" => MeasureMode::Sampled { shots: 0 },
                        _ => return Err(bad(k, v, "expected exact or sampled")),
                    }
                }
                "quantum_features" => {
                    cfg.quantum.kind = match v {
                        "marginals" => FeatureKind::Marginals,
                        "histogram" => FeatureKind::Histogram,
                        _ => return Err(bad(k, v, "expected marginals or histogram")),
                    }
                }
                "quantum_shots" | "recon_samples" | "check_ae_val_mse" | "check_latent_accuracy"
                | "check_quantum_accuracy" => {}
                _ => return Err(CliError::Config(format!("unknown key {k}"))),
            }
        }
        // Settings that depend on another key regardless of line order.
        if let Some(v) = seen.get("quantum_shots") {
            let shots = parse_num("quantum_shots", v)?;
            match &mut cfg.quantum.mode {
                MeasureMode::Sampled { shots: s } => *s = shots,
                MeasureMode::Exact => {}
            }
        } else if let MeasureMode::Sampled { shots } = &mut cfg.quantum.mode {
            *shots = 1024;
        }
        if let Some(v) = seen.get("recon_samples") {
            cfg.recon_samples = parse_num("recon_samples", v)?;
        }
        if let Some(v) = seen.get("check_ae_val_mse") {
            cfg.check.ae_val_mse = parse_num("check_ae_val_mse", v)?;
        }
        if let Some(v) = seen.get("check_latent_accuracy") {
            cfg.check.latent_accuracy = parse_num("check_latent_accuracy", v)?;
        }
        if let Some(v) = seen.get("check_quantum_accuracy") {
            cfg.check.quantum_accuracy = parse_num("check_quantum_accuracy", v)?;
        }
        Ok(cfg)
    }

    /// Range checks on every numeric setting.
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(CliError::Config(msg));
        if !(self.val_fraction > 0.0 && self.val_fraction < 1.0) {
            return fail(format!("val_fraction {} outside (0, 1)", self.val_fraction));
        }
        if self.train_subset == Some(0) {
            return fail("train_subset must be positive".into());
        }
        for (name, s) in [("ae", &self.ae), ("clf", &self.clf)] {
            if s.batch_size == 0 {
                return fail(format!("{name}_batch_size must be at least 1"));
            }
            if !(s.lr > 0.0 && s.lr.is_finite()) {
                return fail(format!("{name}_lr {} must be positive", s.lr));
            }
        }
        if self.clf_hidden.is_empty() || self.clf_hidden.contains(&0) {
            return fail("clf_hidden needs one or more positive widths".into());
        }
        if !(0.0..1.0).contains(&self.clf_dropout) {
            return fail(format!("clf_dropout {} outside [0, 1)", self.clf_dropout));
        }
        if self.lr_step == 0 || !(self.lr_factor > 0.0 && self.lr_factor <= 1.0) {
            return fail(format!(
                "lr schedule step {} factor {} invalid",
                self.lr_step, self.lr_factor
            ));
        }
        if let MeasureMode::Sampled { shots: 0 } = self.quantum.mode {
            return fail("quantum_shots must be at least 1".into());
        }
        self.augment
            .validate()
            .map_err(|e| CliError::Config(e.to_string()))
    }

    /// Locates the IDX files, failing if any is missing.
    pub fn data_paths(&self) -> Result<DataPaths> {
        let pick = |explicit: &Option<PathBuf>, found: Option<PathBuf>| -> Result<PathBuf> {
            match explicit {
                Some(p) if p.is_file() => Ok(p.clone()),
                Some(p) => Err(CliError::Config(format!("data file {} does not exist", p.display()))),
                None => found.ok_or_else(|| {
                    CliError::Config(format!(
                        "MNIST files not found in {}",
                        self.data_dir.display()
                    ))
                }),
            }
        };
        let train = mnist_paths(&self.data_dir, true).ok();
        let test = mnist_paths(&self.data_dir, false).ok();
        Ok(DataPaths {
            train_images: pick(&self.train_images, train.clone().map(|p| p.0))?,
            train_labels: pick(&self.train_labels, train.map(|p| p.1))?,
            test_images: pick(&self.test_images, test.clone().map(|p| p.0))?,
            test_labels: pick(&self.test_labels, test.map(|p| p.1))?,
        })
    }

    fn write_params(out: &mut String, name: &str, p: &StageParams, aug: &AugmentSpec) {
        let _ = writeln!(
            out,
            "{name}: epochs={} batch={} lr={} augment={}",
            p.epochs, p.batch_size, p.lr, p.augment
        );
        if p.augment {
            let _ = writeln!(
                out,
                "{name}_augment: rotate={} shift={} hflip={} p={}",
                aug.rotate_max_deg, aug.shift_max_px, aug.hflip_enabled, aug.probability
            );
        }
    }

    /// Everything the autoencoder stage's outputs depend on.
    pub fn ae_key(&self, data: &DataPaths) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "data: {} {} {} {}",
            data.train_images.display(),
            data.train_labels.display(),
            data.test_images.display(),
            data.test_labels.display()
        );
        let _ = writeln!(
            s,
            "seed={} subset={:?} val_fraction={} lr_step={} lr_factor={} recon={}",
            self.seed, self.train_subset, self.val_fraction, self.lr_step, self.lr_factor, self.recon_samples
        );
        Self::write_params(&mut s, "ae", &self.ae, &self.augment);
        s
    }

    pub fn quantum_key(&self) -> String {
        format!("quantum: {:?} {:?}\n", self.quantum.mode, self.quantum.kind)
    }

    pub fn clf_key(&self) -> String {
        let mut s = String::new();
        Self::write_params(&mut s, "clf", &self.clf, &self.augment);
        let _ = writeln!(s, "clf_arch: hidden={:?} dropout={}", self.clf_hidden, self.clf_dropout);
        s
    }
}
