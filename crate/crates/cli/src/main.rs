use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qhybrid_cli::stages::EvalPair;
use qhybrid_cli::{CliError, ExperimentConfig, FeatureSet, Result, Runner};

#[derive(Parser)]
#[command(name = "qhybrid", version, about = "Autoencoder, quantum feature map and classifier pipeline on MNIST")]
struct Cli {
    /// Flat `key = value` config file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Overrides the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Overrides the config output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Recompute cached pipeline stages.
    #[arg(long, global = true)]
    force: bool,

    /// Exit with status 3 when results miss the configured thresholds.
    #[arg(long, global = true)]
    check: bool,

    /// Suppress progress output.
    #[arg(long, short, global = true)]
    quiet: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train the autoencoder.
    TrainAe,
    /// Encode every split with the trained autoencoder.
    Encode,
    /// Map latents to quantum circuit features.
    Qtransform,
    /// Train a classifier on latent or quantum features.
    TrainClf {
        #[arg(long)]
        which: FeatureSet,
    },
    /// Evaluate a trained classifier and write confusion matrices.
    Eval {
        #[arg(long)]
        which: FeatureSet,
    },
    /// Run every stage and write the summary.
    Pipeline,
}

fn print_eval(which: FeatureSet, pair: &EvalPair) {
    for (split, r) in [("val", &pair.val), ("test", &pair.test)] {
        println!(
            "{which} {split}: accuracy {:.4} loss {:.4} ({} samples)",
            r.accuracy,
            r.loss,
            r.total()
        );
    }
}

fn run(cli: Cli) -> Result<()> {
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::from_file(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(o) = cli.out {
        cfg.out_dir = o;
    }
    let runner = Runner::new(cfg, cli.force)?.verbose(!cli.quiet);
    match cli.command {
        Command::TrainAe => {
            let o = runner.train_ae()?;
            runner.mark_done("train-ae")?;
            if let Some(m) = o.val_mse {
                println!("autoencoder val mse {m:.6}");
            }
            if cli.check {
                runner.check_ae(o.val_mse)?;
            }
        }
        Command::Encode => {
            runner.encode()?;
            runner.mark_done("encode")?;
        }
        Command::Qtransform => {
            runner.qtransform()?;
            runner.mark_done("qtransform")?;
        }
        Command::TrainClf { which } => {
            runner.train_clf(which)?;
            runner.mark_done(match which {
                FeatureSet::Latent => "train-clf-latent",
                FeatureSet::Quantum => "train-clf-quantum",
            })?;
            let pair = runner.measure(which)?;
            print_eval(which, &pair);
            if cli.check {
                runner.check_accuracy(which, pair.val.accuracy)?;
            }
        }
        Command::Eval { which } => {
            let pair = runner.eval(which)?;
            print_eval(which, &pair);
            if cli.check {
                runner.check_accuracy(which, pair.val.accuracy)?;
            }
        }
        Command::Pipeline => {
            let o = runner.pipeline()?;
            print!("{}", qhybrid_cli::stages::read_summary(&runner.config().out_dir)?);
            if cli.check {
                runner.check_pipeline(&o)?;
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let code: CliError = e;
            ExitCode::from(code.exit_code() as u8)
        }
    }
}
