//! Training and evaluation drivers behind the `train` and `eval` commands.
//!
//! Randomness: one ChaCha8 generator seeded from `seed` draws, in order, the
//! model initialization, the training data (copying batches) and the epoch
//! shuffles (MNIST). Copying evaluation sequences come from stream 1 of the
//! same seed, so `eval` can rebuild them from a checkpoint alone.

use std::fmt;
use std::fs::{self, File};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::exprnn::{
    argmax_columns, checkpoint, cross_entropy, KernelInit, ModelOptimizer, Readout, RnnModel,
    SequenceBatch,
};
use crate::optim::OptimizerKind;
use crate::tasks::{
    copying_baseline, gen_copying_batch, load_pixel_dataset, CopyBatch, CopyConfig, PixelDataset,
    PixelSeqConfig,
};

pub const DEFAULT_SEED: u64 = 5544;
pub const DEFAULT_BATCH: usize = 128;
pub const METRICS_HEADER: [&str; 6] = [
    "step",
    "wall_ms",
    "train_loss",
    "eval_metric",
    "ortho_residual",
    "param_norm",
];
pub const METRICS_FILE: &str = "metrics.csv";
pub const FINAL_CHECKPOINT: &str = "final.ckpt";
pub const DATA_DIR_ENV: &str = "EXPRNN_DATA_DIR";
/// Seed for the pixel permutation of `pmnist`, fixed so that training and
/// evaluation agree regardless of `seed`.
pub const PMNIST_PERMUTATION_SEED: u64 = 5544;
const EVAL_STREAM: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Task {
    Copying,
    Mnist,
    Pmnist,
}

impl FromStr for Task {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "copying" => Ok(Self::Copying),
            "mnist" => Ok(Self::Mnist),
            "pmnist" => Ok(Self::Pmnist),
            other => Err(Error::Config(format!("unknown task `{other}`"))),
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Copying => "copying",
            Self::Mnist => "mnist",
            Self::Pmnist => "pmnist",
        })
    }
}

impl Task {
    /// Non-orthogonal learning rate of the smallest model in the reference
    /// hyperparameter table.
    pub fn default_lr(self) -> f64 {
        match self {
            Self::Copying => 2e-4,
            Self::Mnist => 7e-4,
            Self::Pmnist => 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub task: Task,
    pub hidden: usize,
    pub alphabet: usize,
    pub copy_len: usize,
    pub spacing: usize,
    pub optimizer: OptimizerKind,
    /// `None` picks the task default.
    pub lr: Option<f64>,
    /// `None` means `lr / 10`.
    pub ortho_lr: Option<f64>,
    pub init: KernelInit,
    pub batch: usize,
    /// Optimizer steps (copying).
    pub iterations: usize,
    /// Passes over the training set (MNIST).
    pub epochs: usize,
    pub seed: u64,
    pub out_dir: PathBuf,
    /// Write `checkpoint_<step>.ckpt` every this many steps; 0 disables.
    pub checkpoint_every: usize,
    /// Copying: steps between metric rows. MNIST rows are per epoch.
    pub eval_every: usize,
    /// Copying: evaluation sequences.
    pub eval_batch: usize,
    pub data_dir: Option<PathBuf>,
    pub train_subset: Option<usize>,
    pub test_subset: Option<usize>,
    /// Record real elapsed time in `wall_ms`; otherwise it is written as 0
    /// so metrics files are reproducible byte for byte.
    pub wall_clock: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        let copy = CopyConfig::default();
        Self {
            task: Task::Copying,
            hidden: 128,
            alphabet: copy.alphabet,
            copy_len: copy.copy_len,
            spacing: copy.spacing,
            optimizer: OptimizerKind::Rmsprop,
            lr: None,
            ortho_lr: None,
            init: KernelInit::Henaff,
            batch: DEFAULT_BATCH,
            iterations: 2000,
            epochs: 3,
            seed: DEFAULT_SEED,
            out_dir: PathBuf::from("runs"),
            checkpoint_every: 0,
            eval_every: 100,
            eval_batch: 256,
            data_dir: None,
            train_subset: None,
            test_subset: None,
            wall_clock: false,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("bad value `{value}` for `{key}`")))
}

fn parse_optional<T: FromStr>(key: &str, value: &str) -> Result<Option<T>> {
    match value {
        "" | "none" | "default" => Ok(None),
        v => parse(key, v).map(Some),
    }
}

impl TrainConfig {
    /// Sets one field by its config-file key.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key.trim().replace('-', "_").as_str() {
            "task" => self.task = value.parse()?,
            "hidden" => self.hidden = parse(key, value)?,
            "alphabet" => self.alphabet = parse(key, value)?,
            "copy_len" => self.copy_len = parse(key, value)?,
            "spacing" => self.spacing = parse(key, value)?,
            "optimizer" => self.optimizer = value.parse()?,
            "lr" => self.lr = parse_optional(key, value)?,
            "ortho_lr" => self.ortho_lr = parse_optional(key, value)?,
            "init" => self.init = value.parse()?,
            "batch" => self.batch = parse(key, value)?,
            "iterations" => self.iterations = parse(key, value)?,
            "epochs" => self.epochs = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "out_dir" => self.out_dir = PathBuf::from(value),
            "checkpoint_every" => self.checkpoint_every = parse(key, value)?,
            "eval_every" => self.eval_every = parse(key, value)?,
            "eval_batch" => self.eval_batch = parse(key, value)?,
            "data_dir" => self.data_dir = parse_optional(key, value)?,
            "train_subset" => self.train_subset = parse_optional(key, value)?,
            "test_subset" => self.test_subset = parse_optional(key, value)?,
            "wall_clock" => self.wall_clock = parse(key, value)?,
            other => return Err(Error::Config(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    /// Applies `key = value` lines; `#` starts a comment.
    pub fn apply_kv(&mut self, text: &str) -> Result<()> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!(
                    "line {}: expected key = value, got `{raw}`",
                    lineno + 1
                ))
            })?;
            self.set(k, v)
                .map_err(|e| Error::Config(format!("line {}: {e}", lineno + 1)))?;
        }
        Ok(())
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let mut cfg = Self::default();
        cfg.apply_kv(&fs::read_to_string(path)?)?;
        Ok(cfg)
    }

    pub fn lr(&self) -> f64 {
        self.lr.unwrap_or_else(|| self.task.default_lr())
    }

    pub fn ortho_lr(&self) -> f64 {
        self.ortho_lr.unwrap_or_else(|| self.lr() / 10.0)
    }

    pub fn copy_config(&self) -> CopyConfig {
        CopyConfig {
            alphabet: self.alphabet,
            copy_len: self.copy_len,
            spacing: self.spacing,
            batch: self.batch,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.hidden == 0 || self.batch == 0 {
            return Err(Error::Config(
                "hidden size and batch must be positive".into(),
            ));
        }
        for (name, v) in [("lr", self.lr()), ("ortho_lr", self.ortho_lr())] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if self.task == Task::Copying {
            self.copy_config().validate()?;
            if self.eval_every == 0 || self.eval_batch == 0 {
                return Err(Error::Config(
                    "eval_every and eval_batch must be positive".into(),
                ));
            }
        }
        Ok(())
    }

    /// Data directory from the config, else from `EXPRNN_DATA_DIR`.
    pub fn resolve_data_dir(&self) -> Result<PathBuf> {
        self.data_dir
            .clone()
            .or_else(|| std::env::var_os(DATA_DIR_ENV).map(PathBuf::from))
            .ok_or_else(|| {
                Error::Config(format!(
                    "task {} needs MNIST IDX files: pass --data-dir or set {DATA_DIR_ENV}",
                    self.task
                ))
            })
    }

    fn permutation_seed(&self) -> Option<u64> {
        (self.task == Task::Pmnist).then_some(PMNIST_PERMUTATION_SEED)
    }

    pub fn kv_dump(&self) -> String {
        let opt = |v: &Option<f64>| v.map_or("default".to_string(), |x| x.to_string());
        let path = |v: &Option<PathBuf>| {
            v.as_ref()
                .map_or("none".to_string(), |p| p.display().to_string())
        };
        let size = |v: &Option<usize>| v.map_or("none".to_string(), |x| x.to_string());
        format!(
            "task = {}\nhidden = {}\nalphabet = {}\ncopy_len = {}\nspacing = {}\noptimizer = {}\n\
             lr = {}\northo_lr = {}\ninit = {}\nbatch = {}\niterations = {}\nepochs = {}\nseed = {}\n\
             out_dir = {}\ncheckpoint_every = {}\neval_every = {}\neval_batch = {}\ndata_dir = {}\n\
             train_subset = {}\ntest_subset = {}\nwall_clock = {}\n",
            self.task,
            self.hidden,
            self.alphabet,
            self.copy_len,
            self.spacing,
            self.optimizer,
            opt(&self.lr),
            opt(&self.ortho_lr),
            self.init,
            self.batch,
            self.iterations,
            self.epochs,
            self.seed,
            self.out_dir.display(),
            self.checkpoint_every,
            self.eval_every,
            self.eval_batch,
            path(&self.data_dir),
            size(&self.train_subset),
            size(&self.test_subset),
            self.wall_clock,
        )
    }
}

/// One line of the metrics file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsRow {
    pub step: u64,
    pub wall_ms: u64,
    pub train_loss: f64,
    /// Cross entropy (copying) or accuracy (MNIST).
    pub eval_metric: f64,
    pub ortho_residual: f64,
    pub param_norm: f64,
}

/// Shortest round-trip text; scientific notation below `1e-4`.
fn format_float(x: f64) -> String {
    if x != 0.0 && x.abs() < 1e-4 {
        format!("{x:e}")
    } else {
        x.to_string()
    }
}

impl MetricsRow {
    fn fields(&self) -> [String; 6] {
        [
            self.step.to_string(),
            self.wall_ms.to_string(),
            format_float(self.train_loss),
            format_float(self.eval_metric),
            format_float(self.ortho_residual),
            format_float(self.param_norm),
        ]
    }
}

pub struct MetricsWriter {
    inner: csv::Writer<File>,
    last_step: Option<u64>,
}

impl MetricsWriter {
    pub fn create(path: &Path) -> Result<Self> {
        let mut inner = csv::Writer::from_path(path)?;
        inner.write_record(METRICS_HEADER)?;
        inner.flush()?;
        Ok(Self {
            inner,
            last_step: None,
        })
    }

    pub fn write(&mut self, row: &MetricsRow) -> Result<()> {
        if self.last_step.is_some_and(|s| row.step <= s) {
            return Err(Error::InvalidArgument(format!(
                "metrics step {} does not increase",
                row.step
            )));
        }
        self.inner.write_record(row.fields())?;
        self.inner.flush()?;
        self.last_step = Some(row.step);
        Ok(())
    }
}

/// Reads a metrics file back.
pub fn read_metrics(path: &Path) -> Result<Vec<MetricsRow>> {
    let mut reader = csv::Reader::from_path(path)?;
    let header = reader.headers()?.clone();
    if header.iter().ne(METRICS_HEADER) {
        return Err(Error::Config(format!(
            "unexpected metrics header {header:?}"
        )));
    }
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec?;
        let field = |i: usize| rec.get(i).unwrap_or("");
        rows.push(MetricsRow {
            step: parse("step", field(0))?,
            wall_ms: parse("wall_ms", field(1))?,
            train_loss: parse("train_loss", field(2))?,
            eval_metric: parse("eval_metric", field(3))?,
            ortho_residual: parse("ortho_residual", field(4))?,
            param_norm: parse("param_norm", field(5))?,
        });
    }
    Ok(rows)
}

/// `‖BᵀB − I‖_F` of the refreshed kernel and `‖A‖_F`.
fn kernel_stats(model: &mut RnnModel) -> Result<(f64, f64)> {
    model.refresh()?;
    let residual = model.kernel.kernel()?.ortho_residual();
    Ok((residual, model.kernel.param().matrix().fro_norm()))
}

/// Copying-task quality on a fixed set of sequences.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CopyEval {
    pub cross_entropy: f64,
    /// Fraction of recall-region symbols predicted correctly.
    pub recall_accuracy: f64,
}

pub fn copying_eval_set(cfg: &TrainConfig) -> Result<CopyBatch> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(EVAL_STREAM);
    let eval_cfg = CopyConfig {
        batch: cfg.eval_batch,
        ..cfg.copy_config()
    };
    gen_copying_batch(&eval_cfg, &mut rng)
}

pub fn evaluate_copying(
    model: &mut RnnModel,
    copy: &CopyConfig,
    data: &CopyBatch,
) -> Result<CopyEval> {
    model.refresh()?;
    let inputs = SequenceBatch::from_tokens(&data.inputs, copy.vocab())?;
    let targets = data.targets_by_step();
    let (logits, _) = model.forward(&inputs)?;
    let (ce, _) = cross_entropy(&logits, &targets)?;
    let mut hits = 0usize;
    let mut total = 0usize;
    for t in copy.recall_range() {
        let pred = argmax_columns(&logits[t]);
        hits += pred.iter().zip(&targets[t]).filter(|(p, y)| p == y).count();
        total += pred.len();
    }
    Ok(CopyEval {
        cross_entropy: ce,
        recall_accuracy: hits as f64 / total as f64,
    })
}

/// Model shaped for the task, drawn from `rng`.
pub fn build_model(cfg: &TrainConfig, rng: &mut ChaCha8Rng) -> Result<RnnModel> {
    let (d, classes, readout) = match cfg.task {
        Task::Copying => (cfg.alphabet + 2, cfg.alphabet + 2, Readout::EveryStep),
        Task::Mnist | Task::Pmnist => (1, 10, Readout::FinalStep),
    };
    RnnModel::init(cfg.hidden, d, classes, cfg.init, readout, rng)
}

/// Checks that a loaded model fits the task described by `cfg`.
pub fn check_model_shape(model: &RnnModel, cfg: &TrainConfig) -> Result<()> {
    let (d, classes) = match cfg.task {
        Task::Copying => (cfg.alphabet + 2, cfg.alphabet + 2),
        Task::Mnist | Task::Pmnist => (1, 10),
    };
    let got = (model.hidden(), model.input_dim(), model.classes());
    if got != (cfg.hidden, d, classes) {
        return Err(Error::Checkpoint(format!(
            "checkpoint has (hidden, input, classes) = {got:?} but the {} config expects {:?}",
            cfg.task,
            (cfg.hidden, d, classes)
        )));
    }
    Ok(())
}

/// Step-by-step copying trainer; [`run_copying`] drives it with metrics and
/// checkpoints.
pub struct CopyingTrainer {
    pub cfg: TrainConfig,
    pub model: RnnModel,
    pub optimizer: ModelOptimizer,
    pub rng: ChaCha8Rng,
    pub eval_set: CopyBatch,
}

impl CopyingTrainer {
    pub fn new(cfg: TrainConfig) -> Result<Self> {
        cfg.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let model = build_model(&cfg, &mut rng)?;
        let optimizer = ModelOptimizer::new(cfg.optimizer, &model, cfg.lr(), cfg.ortho_lr())?;
        let eval_set = copying_eval_set(&cfg)?;
        Ok(Self {
            cfg,
            model,
            optimizer,
            rng,
            eval_set,
        })
    }

    /// One optimizer step on a fresh batch; returns the batch loss.
    pub fn step(&mut self) -> Result<f64> {
        let copy = self.cfg.copy_config();
        let data = gen_copying_batch(&copy, &mut self.rng)?;
        let inputs = SequenceBatch::from_tokens(&data.inputs, copy.vocab())?;
        train_step(
            &mut self.model,
            &mut self.optimizer,
            &inputs,
            &data.targets_by_step(),
        )
    }

    pub fn evaluate(&mut self) -> Result<CopyEval> {
        evaluate_copying(&mut self.model, &self.cfg.copy_config(), &self.eval_set)
    }
}

/// Refresh, forward, loss, backward (one pullback) and update.
pub fn train_step(
    model: &mut RnnModel,
    optimizer: &mut ModelOptimizer,
    inputs: &SequenceBatch,
    targets: &[Vec<usize>],
) -> Result<f64> {
    model.refresh()?;
    let (logits, tape) = model.forward(inputs)?;
    let (loss, dlogits) = cross_entropy(&logits, targets)?;
    let grads = model.backward(&tape, &dlogits)?;
    optimizer.apply(model, &grads)?;
    Ok(loss)
}

/// What a finished run reports.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainSummary {
    pub task: Task,
    pub steps: u64,
    pub final_train_loss: Option<f64>,
    pub final_eval_metric: f64,
    pub ortho_residual: f64,
    pub expm_evals: u64,
    pub checkpoint: PathBuf,
    pub metrics: PathBuf,
}

impl fmt::Display for TrainSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let loss = self
            .final_train_loss
            .map_or("nan".to_string(), |l| format!("{l:.6}"));
        write!(
            f,
            "summary task={} steps={} train_loss={} eval_metric={:.6} ortho_residual={:.3e} expm_evals={} checkpoint={} metrics={}",
            self.task,
            self.steps,
            loss,
            self.final_eval_metric,
            self.ortho_residual,
            self.expm_evals,
            self.checkpoint.display(),
            self.metrics.display()
        )
    }
}

struct RunFiles {
    metrics: MetricsWriter,
    metrics_path: PathBuf,
    out_dir: PathBuf,
    start: Instant,
    wall_clock: bool,
}

impl RunFiles {
    fn open(cfg: &TrainConfig) -> Result<Self> {
        fs::create_dir_all(&cfg.out_dir)?;
        fs::write(cfg.out_dir.join("config.txt"), cfg.kv_dump())?;
        let metrics_path = cfg.out_dir.join(METRICS_FILE);
        Ok(Self {
            metrics: MetricsWriter::create(&metrics_path)?,
            metrics_path,
            out_dir: cfg.out_dir.clone(),
            start: Instant::now(),
            wall_clock: cfg.wall_clock,
        })
    }

    fn wall_ms(&self) -> u64 {
        if self.wall_clock {
            self.start.elapsed().as_millis() as u64
        } else {
            0
        }
    }

    fn row(
        &mut self,
        model: &mut RnnModel,
        step: u64,
        train_loss: f64,
        eval_metric: f64,
    ) -> Result<f64> {
        let (ortho_residual, param_norm) = kernel_stats(model)?;
        let row = MetricsRow {
            step,
            wall_ms: self.wall_ms(),
            train_loss,
            eval_metric,
            ortho_residual,
            param_norm,
        };
        self.metrics.write(&row)?;
        Ok(ortho_residual)
    }

    fn checkpoint(&self, model: &RnnModel, step: u64) -> Result<()> {
        checkpoint::save(model, &self.out_dir.join(format!("checkpoint_{step}.ckpt")))
    }

    fn finish(&self, model: &RnnModel) -> Result<PathBuf> {
        let path = self.out_dir.join(FINAL_CHECKPOINT);
        checkpoint::save(model, &path)?;
        Ok(path)
    }
}

pub fn run(cfg: &TrainConfig) -> Result<TrainSummary> {
    match cfg.task {
        Task::Copying => run_copying(cfg),
        Task::Mnist | Task::Pmnist => run_pixels(cfg),
    }
}

pub fn run_copying(cfg: &TrainConfig) -> Result<TrainSummary> {
    let mut trainer = CopyingTrainer::new(cfg.clone())?;
    let mut files = RunFiles::open(cfg)?;
    let mut loss_sum = 0.0;
    let mut loss_count = 0usize;
    let mut last_loss = None;
    let mut last_eval = None;
    for step in 1..=cfg.iterations as u64 {
        let loss = trainer.step()?;
        loss_sum += loss;
        loss_count += 1;
        let at_row = step % cfg.eval_every as u64 == 0 || step == cfg.iterations as u64;
        if at_row {
            let eval = trainer.evaluate()?;
            let mean = loss_sum / loss_count as f64;
            files.row(&mut trainer.model, step, mean, eval.cross_entropy)?;
            log::info!(
                "step {step}: train {mean:.5} eval {:.5} recall {:.4} (baseline {:.5})",
                eval.cross_entropy,
                eval.recall_accuracy,
                copying_baseline(&cfg.copy_config())
            );
            last_loss = Some(mean);
            last_eval = Some(eval.cross_entropy);
            loss_sum = 0.0;
            loss_count = 0;
        }
        if cfg.checkpoint_every > 0 && step % cfg.checkpoint_every as u64 == 0 {
            files.checkpoint(&trainer.model, step)?;
        }
    }
    let eval = match last_eval {
        Some(e) => e,
        None => trainer.evaluate()?.cross_entropy,
    };
    let (ortho_residual, _) = kernel_stats(&mut trainer.model)?;
    Ok(TrainSummary {
        task: cfg.task,
        steps: trainer.optimizer.steps(),
        final_train_loss: last_loss,
        final_eval_metric: eval,
        ortho_residual,
        expm_evals: trainer.model.kernel.expm_eval_count(),
        checkpoint: files.finish(&trainer.model)?,
        metrics: files.metrics_path.clone(),
    })
}

fn pixel_batch(data: &PixelDataset, idx: &[usize]) -> Result<(SequenceBatch, Vec<Vec<usize>>)> {
    let seqs: Vec<Vec<f64>> = idx.iter().map(|&i| data.sequences[i].clone()).collect();
    let labels = idx.iter().map(|&i| data.labels[i]).collect();
    Ok((SequenceBatch::from_scalars(&seqs)?, vec![labels]))
}

/// Classification accuracy over a dataset, in batches of `batch`.
pub fn evaluate_pixels(model: &mut RnnModel, data: &PixelDataset, batch: usize) -> Result<f64> {
    model.refresh()?;
    if data.is_empty() {
        return Err(Error::InvalidArgument("empty evaluation set".into()));
    }
    let order: Vec<usize> = (0..data.len()).collect();
    let mut hits = 0usize;
    for chunk in order.chunks(batch.max(1)) {
        let (inputs, targets) = pixel_batch(data, chunk)?;
        let (logits, _) = model.forward(&inputs)?;
        let pred = argmax_columns(&logits[0]);
        hits += pred.iter().zip(&targets[0]).filter(|(p, y)| p == y).count();
    }
    Ok(hits as f64 / data.len() as f64)
}

pub fn load_pixel_split(cfg: &TrainConfig, train: bool) -> Result<PixelDataset> {
    let dir = cfg.resolve_data_dir()?;
    let split = if train {
        PixelSeqConfig::train(&dir, cfg.permutation_seed(), cfg.train_subset)
    } else {
        PixelSeqConfig::test(&dir, cfg.permutation_seed(), cfg.test_subset)
    };
    load_pixel_dataset(&split)
}

pub fn run_pixels(cfg: &TrainConfig) -> Result<TrainSummary> {
    cfg.validate()?;
    let train = load_pixel_split(cfg, true)?;
    let test = load_pixel_split(cfg, false)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut model = build_model(cfg, &mut rng)?;
    let mut optimizer = ModelOptimizer::new(cfg.optimizer, &model, cfg.lr(), cfg.ortho_lr())?;
    let mut files = RunFiles::open(cfg)?;
    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut step = 0u64;
    let mut last_loss = None;
    let mut last_eval = None;
    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        let mut batches = 0usize;
        for chunk in order.chunks(cfg.batch) {
            let (inputs, targets) = pixel_batch(&train, chunk)?;
            loss_sum += train_step(&mut model, &mut optimizer, &inputs, &targets)?;
            batches += 1;
            step += 1;
            if cfg.checkpoint_every > 0 && step % cfg.checkpoint_every as u64 == 0 {
                files.checkpoint(&model, step)?;
            }
        }
        if batches == 0 {
            continue;
        }
        let acc = evaluate_pixels(&mut model, &test, cfg.batch)?;
        let mean = loss_sum / batches as f64;
        files.row(&mut model, step, mean, acc)?;
        log::info!(
            "epoch {}: train {mean:.5} test accuracy {acc:.4}",
            epoch + 1
        );
        last_loss = Some(mean);
        last_eval = Some(acc);
    }
    let eval = match last_eval {
        Some(a) => a,
        None => evaluate_pixels(&mut model, &test, cfg.batch)?,
    };
    let (ortho_residual, _) = kernel_stats(&mut model)?;
    Ok(TrainSummary {
        task: cfg.task,
        steps: optimizer.steps(),
        final_train_loss: last_loss,
        final_eval_metric: eval,
        ortho_residual,
        expm_evals: model.kernel.expm_eval_count(),
        checkpoint: files.finish(&model)?,
        metrics: files.metrics_path.clone(),
    })
}

/// Result of evaluating a checkpoint.
#[derive(Debug, Clone, PartialEq)]
pub enum EvalReport {
    Copying {
        eval: CopyEval,
        baseline: f64,
        uniform: f64,
    },
    Pixels {
        accuracy: f64,
        examples: usize,
    },
}

impl fmt::Display for EvalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Copying { eval, baseline, uniform } => write!(
                f,
                "eval task=copying cross_entropy={:.6} recall_accuracy={:.4} baseline={baseline:.6} uniform={uniform:.6}",
                eval.cross_entropy, eval.recall_accuracy
            ),
            Self::Pixels { accuracy, examples } => {
                write!(f, "eval accuracy={accuracy:.4} examples={examples}")
            }
        }
    }
}

pub fn evaluate_checkpoint(path: &Path, cfg: &TrainConfig) -> Result<EvalReport> {
    cfg.validate()?;
    let mut model = checkpoint::load(path)?;
    check_model_shape(&model, cfg)?;
    match cfg.task {
        Task::Copying => {
            let copy = cfg.copy_config();
            let eval = evaluate_copying(&mut model, &copy, &copying_eval_set(cfg)?)?;
            Ok(EvalReport::Copying {
                eval,
                baseline: copying_baseline(&copy),
                uniform: (copy.vocab() as f64).ln(),
            })
        }
        Task::Mnist | Task::Pmnist => {
            let test = load_pixel_split(cfg, false)?;
            let accuracy = evaluate_pixels(&mut model, &test, cfg.batch)?;
            Ok(EvalReport::Pixels {
                accuracy,
                examples: test.len(),
            })
        }
    }
}
