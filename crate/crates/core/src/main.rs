use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use exprnn::train::{self, TrainConfig, DATA_DIR_ENV};
use exprnn::verify::{self, Scope};

#[derive(Parser)]
#[command(
    name = "exprnn",
    version,
    about = "Orthogonal RNNs through the exponential map"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a model and write metrics.csv, checkpoints and a summary line.
    Train(ConfigArgs),
    /// Evaluate a checkpoint on the task described by the config.
    Eval {
        /// Checkpoint written by `train`.
        #[arg(long)]
        checkpoint: PathBuf,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Run numerical property suites: expm, gradients, retractions, geometry or all.
    Verify {
        #[arg(default_value = "all")]
        scope: String,
    },
}

/// Flags mirror the keys of the config file and override it.
#[derive(Args, Default)]
struct ConfigArgs {
    /// `key = value` config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// copying, mnist or pmnist.
    #[arg(long)]
    task: Option<String>,
    #[arg(long)]
    hidden: Option<usize>,
    /// Copying alphabet size N.
    #[arg(long)]
    alphabet: Option<usize>,
    /// Copying sequence length K.
    #[arg(long)]
    copy_len: Option<usize>,
    /// Copying spacing L.
    #[arg(long)]
    spacing: Option<usize>,
    /// sgd, rmsprop or adam.
    #[arg(long)]
    optimizer: Option<String>,
    /// Learning rate of the non-orthogonal parameters.
    #[arg(long)]
    lr: Option<f64>,
    /// Learning rate of the skew parameter (default lr / 10).
    #[arg(long)]
    ortho_lr: Option<f64>,
    /// henaff or cayley.
    #[arg(long)]
    init: Option<String>,
    #[arg(long)]
    batch: Option<usize>,
    #[arg(long)]
    iterations: Option<usize>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    checkpoint_every: Option<usize>,
    #[arg(long)]
    eval_every: Option<usize>,
    #[arg(long)]
    eval_batch: Option<usize>,
    /// Directory with the MNIST IDX files (also read from EXPRNN_DATA_DIR).
    #[arg(long, env = DATA_DIR_ENV)]
    data_dir: Option<PathBuf>,
    #[arg(long)]
    train_subset: Option<usize>,
    #[arg(long)]
    test_subset: Option<usize>,
    /// Record elapsed time in the wall_ms column.
    #[arg(long)]
    wall_clock: bool,
}

impl ConfigArgs {
    fn resolve(&self) -> exprnn::Result<TrainConfig> {
        let mut cfg = match &self.config {
            Some(path) => TrainConfig::from_file(path)?,
            None => TrainConfig::default(),
        };
        let mut overrides: Vec<(&str, String)> = Vec::new();
        let mut push = |k: &'static str, v: Option<String>| {
            if let Some(v) = v {
                overrides.push((k, v));
            }
        };
        // task first so later keys see the right task
        push("task", self.task.clone());
        push("hidden", self.hidden.map(|v| v.to_string()));
        push("alphabet", self.alphabet.map(|v| v.to_string()));
        push("copy_len", self.copy_len.map(|v| v.to_string()));
        push("spacing", self.spacing.map(|v| v.to_string()));
        push("optimizer", self.optimizer.clone());
        push("lr", self.lr.map(|v| v.to_string()));
        push("ortho_lr", self.ortho_lr.map(|v| v.to_string()));
        push("init", self.init.clone());
        push("batch", self.batch.map(|v| v.to_string()));
        push("iterations", self.iterations.map(|v| v.to_string()));
        push("epochs", self.epochs.map(|v| v.to_string()));
        push("seed", self.seed.map(|v| v.to_string()));
        push(
            "out_dir",
            self.out_dir.as_ref().map(|p| p.display().to_string()),
        );
        push(
            "checkpoint_every",
            self.checkpoint_every.map(|v| v.to_string()),
        );
        push("eval_every", self.eval_every.map(|v| v.to_string()));
        push("eval_batch", self.eval_batch.map(|v| v.to_string()));
        push(
            "data_dir",
            self.data_dir.as_ref().map(|p| p.display().to_string()),
        );
        push("train_subset", self.train_subset.map(|v| v.to_string()));
        push("test_subset", self.test_subset.map(|v| v.to_string()));
        if self.wall_clock {
            push("wall_clock", Some("true".into()));
        }
        for (k, v) in overrides {
            cfg.set(k, &v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match cli.command {
        Command::Train(args) => {
            let result = args.resolve().and_then(|cfg| train::run(&cfg));
            match result {
                Ok(summary) => {
                    println!("{summary}");
                    ExitCode::SUCCESS
                }
                Err(e) => fail(e),
            }
        }
        Command::Eval { checkpoint, config } => {
            match config
                .resolve()
                .and_then(|cfg| train::evaluate_checkpoint(&checkpoint, &cfg))
            {
                Ok(report) => {
                    println!("{report}");
                    ExitCode::SUCCESS
                }
                Err(e) => fail(e),
            }
        }
        Command::Verify { scope } => {
            let scope: Scope = match scope.parse() {
                Ok(s) => s,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            };
            match verify::run(scope) {
                Ok(checks) => {
                    let mut ok = true;
                    for c in &checks {
                        println!("{c}");
                        ok &= c.passed();
                    }
                    let failed = checks.iter().filter(|c| !c.passed()).count();
                    println!("verify {} checks, {failed} failed", checks.len());
                    if ok {
                        ExitCode::SUCCESS
                    } else {
                        ExitCode::FAILURE
                    }
                }
                Err(e) => fail(e),
            }
        }
    }
}

fn fail(e: exprnn::Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::FAILURE
}
