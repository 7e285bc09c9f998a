//! Report files: CSV tables, PGM images, evaluation metrics and the summary.

use std::fmt::Write as _;
use std::path::Path;

use qhybrid_core::data::NUM_CLASSES;
use qhybrid_core::nn::History;

use crate::error::{CliError, Result};

/// RFC 4180 with LF record terminators.
pub fn write_csv<S: AsRef<str>>(path: &Path, header: &[&str], rows: &[Vec<S>]) -> Result<()> {
    let csv_err = |source| CliError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)
        .map_err(csv_err)?;
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        w.write_record(row.iter().map(|s| s.as_ref())).map_err(csv_err)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// `epoch,train_mse,val_mse`; an empty history writes only the header.
pub fn write_ae_loss_csv(path: &Path, history: &History) -> Result<()> {
    let rows: Vec<Vec<String>> = history
        .records
        .iter()
        .map(|r| vec![r.epoch.to_string(), r.train_loss.to_string(), opt(r.val_loss)])
        .collect();
    write_csv(path, &["epoch", "train_mse", "val_mse"], &rows)
}

/// `epoch,train_loss,train_acc,val_loss,val_acc`.
pub fn write_clf_csv(path: &Path, history: &History) -> Result<()> {
    let rows: Vec<Vec<String>> = history
        .records
        .iter()
        .map(|r| {
            vec![
                r.epoch.to_string(),
                r.train_loss.to_string(),
                opt(r.train_accuracy),
                opt(r.val_loss),
                opt(r.val_accuracy),
            ]
        })
        .collect();
    write_csv(
        path,
        &["epoch", "train_loss", "train_acc", "val_loss", "val_acc"],
        &rows,
    )
}

/// Binary greymap (`P5`, maxval 255). Values are clamped to `[0, 1]` and
/// rounded to the nearest grey level.
pub fn pgm_bytes(pixels: &[f64], rows: usize, cols: usize) -> Vec<u8> {
    assert_eq!(pixels.len(), rows * cols, "pixel count must match the grid");
    let mut out = format!("P5\n{cols} {rows}\n255\n").into_bytes();
    out.extend(pixels.iter().map(|&v| (v.clamp(0.0, 1.0) * 255.0).round() as u8));
    out
}

pub fn write_pgm(path: &Path, pixels: &[f64], rows: usize, cols: usize) -> Result<()> {
    std::fs::write(path, pgm_bytes(pixels, rows, cols)).map_err(|e| CliError::io(path, e))
}

/// Classification metrics over one evaluated split.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub accuracy: f64,
    /// `None` where the class was never predicted.
    pub precision: Vec<Option<f64>>,
    /// `None` where the class never occurs.
    pub recall: Vec<Option<f64>>,
    /// `confusion[true][predicted]` counts.
    pub confusion: Vec<Vec<u64>>,
    pub loss: f64,
}

impl EvalReport {
    pub fn from_predictions(predicted: &[usize], labels: &[u8], loss: f64) -> Result<Self> {
        if predicted.len() != labels.len() {
            return Err(CliError::Core(qhybrid_core::Error::Argument(format!(
                "{} predictions for {} labels",
                predicted.len(),
                labels.len()
            ))));
        }
        if predicted.is_empty() {
            return Err(CliError::Core(qhybrid_core::Error::Argument(
                "cannot evaluate an empty split".into(),
            )));
        }
        let mut confusion = vec![vec![0u64; NUM_CLASSES]; NUM_CLASSES];
        for (&p, &y) in predicted.iter().zip(labels) {
            if p >= NUM_CLASSES || usize::from(y) >= NUM_CLASSES {
                return Err(CliError::Core(qhybrid_core::Error::Value(format!(
                    "class index out of range: predicted {p}, label {y}"
                ))));
            }
            confusion[usize::from(y)][p] += 1;
        }
        let trace: u64 = (0..NUM_CLASSES).map(|c| confusion[c][c]).sum();
        let ratio = |num: u64, den: u64| (den > 0).then(|| num as f64 / den as f64);
        let precision = (0..NUM_CLASSES)
            .map(|c| ratio(confusion[c][c], confusion.iter().map(|row| row[c]).sum()))
            .collect();
        let recall = (0..NUM_CLASSES)
            .map(|c| ratio(confusion[c][c], confusion[c].iter().sum()))
            .collect();
        Ok(Self {
            accuracy: trace as f64 / predicted.len() as f64,
            precision,
            recall,
            confusion,
            loss,
        })
    }

    pub fn total(&self) -> u64 {
        self.confusion.iter().flatten().sum()
    }

    /// 10×10 counts with a header row and a header column of class indices;
    /// rows are true classes, columns predicted classes.
    pub fn write_confusion_csv(&self, path: &Path) -> Result<()> {
        let mut header = vec![String::from("true\\pred")];
        header.extend((0..NUM_CLASSES).map(|c| c.to_string()));
        let header: Vec<&str> = header.iter().map(String::as_str).collect();
        let rows: Vec<Vec<String>> = self
            .confusion
            .iter()
            .enumerate()
            .map(|(c, row)| {
                std::iter::once(c.to_string())
                    .chain(row.iter().map(u64::to_string))
                    .collect()
            })
            .collect();
        write_csv(path, &header, &rows)
    }
}

/// One evaluated model for the summary table.
#[derive(Debug, Clone)]
pub struct SummaryEntry<'a> {
    pub model: &'a str,
    pub val: &'a EvalReport,
    pub test: &'a EvalReport,
}

#[derive(Debug, Clone)]
pub struct SummaryInput<'a> {
    pub seed: u64,
    pub train_samples: usize,
    pub val_samples: usize,
    pub test_samples: usize,
    pub ae_val_mse: Option<f64>,
    pub quantum: String,
    pub models: Vec<SummaryEntry<'a>>,
}

pub fn summary_text(s: &SummaryInput) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "qhybrid pipeline summary");
    let _ = writeln!(out, "seed: {}", s.seed);
    let _ = writeln!(
        out,
        "samples: train {} / val {} / test {}",
        s.train_samples, s.val_samples, s.test_samples
    );
    match s.ae_val_mse {
        Some(m) => {
            let _ = writeln!(out, "autoencoder val mse: {m:.6}");
        }
        None => {
            let _ = writeln!(out, "autoencoder val mse: n/a");
        }
    }
    let _ = writeln!(out, "quantum features: {}", s.quantum);
    let _ = writeln!(out);
    let _ = writeln!(
        out,
        "{:<10} {:>9} {:>9} {:>9} {:>9}",
        "model", "val_acc", "val_loss", "test_acc", "test_loss"
    );
    for m in &s.models {
        let _ = writeln!(
            out,
            "{:<10} {:>9.4} {:>9.4} {:>9.4} {:>9.4}",
            m.model, m.val.accuracy, m.val.loss, m.test.accuracy, m.test.loss
        );
    }
    for m in &s.models {
        let _ = writeln!(out);
        let _ = writeln!(out, "{} per-class (val): class precision recall", m.model);
        for c in 0..NUM_CLASSES {
            let f = |v: Option<f64>| v.map_or_else(|| "n/a".to_string(), |x| format!("{x:.4}"));
            let _ = writeln!(out, "  {c} {} {}", f(m.val.precision[c]), f(m.val.recall[c]));
        }
    }
    out
}
