use rand::Rng;

use super::init::{kernel_init, KernelInit};
use super::modrelu::{modrelu_grad_scalar, modrelu_scalar};
use crate::error::{Error, Result};
use crate::liegroup::{OrthoLayer, SkewParam};
use crate::matcore::Matrix;

/// Pointwise nonlinearity of the cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    ModRelu,
    /// `h = z`; used to check that the kernel is an isometry on hidden states.
    Identity,
}

/// Which timesteps emit logits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Readout {
    /// One prediction per timestep (copying).
    EveryStep,
    /// A single prediction after the last timestep (classification).
    FinalStep,
}

/// Input sequence for a batch: one `d × batch` matrix per timestep.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceBatch {
    steps: Vec<Matrix<f64>>,
    input_dim: usize,
    batch: usize,
}

impl SequenceBatch {
    pub fn new(steps: Vec<Matrix<f64>>) -> Result<Self> {
        let first = steps
            .first()
            .ok_or_else(|| Error::InvalidArgument("empty sequence".into()))?;
        let (input_dim, batch) = first.shape();
        if batch == 0 {
            return Err(Error::InvalidArgument("empty batch".into()));
        }
        if let Some(bad) = steps.iter().find(|m| m.shape() != (input_dim, batch)) {
            return Err(Error::mismatch(
                "SequenceBatch::new",
                (input_dim, batch),
                bad.shape(),
            ));
        }
        Ok(Self {
            steps,
            input_dim,
            batch,
        })
    }

    /// One-hot encodes `tokens[b][t]` over a vocabulary of `vocab` symbols.
    pub fn from_tokens(tokens: &[Vec<usize>], vocab: usize) -> Result<Self> {
        let len = tokens.first().map_or(0, Vec::len);
        if tokens.iter().any(|s| s.len() != len) {
            return Err(Error::InvalidArgument("ragged token batch".into()));
        }
        let mut steps = vec![Matrix::zeros(vocab, tokens.len()); len];
        for (b, seq) in tokens.iter().enumerate() {
            for (t, &tok) in seq.iter().enumerate() {
                if tok >= vocab {
                    return Err(Error::InvalidArgument(format!(
                        "token {tok} outside vocabulary of {vocab}"
                    )));
                }
                steps[t].set(tok, b, 1.0);
            }
        }
        Self::new(steps)
    }

    /// Scalar sequences (`d = 1`), `values[b][t]`.
    pub fn from_scalars(values: &[Vec<f64>]) -> Result<Self> {
        let len = values.first().map_or(0, Vec::len);
        if values.iter().any(|s| s.len() != len) {
            return Err(Error::InvalidArgument("ragged scalar batch".into()));
        }
        let steps = (0..len)
            .map(|t| Matrix::from_fn(1, values.len(), |_, b| values[b][t]))
            .collect();
        Self::new(steps)
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn batch(&self) -> usize {
        self.batch
    }

    pub fn step(&self, t: usize) -> &Matrix<f64> {
        &self.steps[t]
    }
}

/// Stored quantities of one forward timestep.
#[derive(Debug, Clone)]
pub struct TapeStep<'a> {
    pub z: Matrix<f64>,
    pub h: Matrix<f64>,
    pub x: &'a Matrix<f64>,
}

/// Everything `backward` needs from a forward pass.
#[derive(Debug, Clone)]
pub struct Tape<'a> {
    pub h0: Matrix<f64>,
    pub steps: Vec<TapeStep<'a>>,
}

/// Gradients of the loss with respect to every parameter.
#[derive(Debug, Clone)]
pub struct RnnGrads {
    /// Euclidean gradient with respect to the kernel `B`.
    pub kernel_euclid: Matrix<f64>,
    /// Trace-metric gradient on `so(p)` with respect to `A`.
    pub kernel_algebra: Matrix<f64>,
    pub input_map: Matrix<f64>,
    pub bias: Vec<f64>,
    pub readout: Matrix<f64>,
    pub readout_bias: Vec<f64>,
}

/// `h_t = σ(exp(A) h_{t−1} + T x_t)`, `y_t = R h_t + c`, `h_0 = 0`.
#[derive(Debug, Clone)]
pub struct RnnModel {
    pub kernel: OrthoLayer<f64>,
    pub input_map: Matrix<f64>,
    pub bias: Vec<f64>,
    pub readout: Matrix<f64>,
    pub readout_bias: Vec<f64>,
    pub activation: Activation,
    pub readout_mode: Readout,
    /// When false the kernel is held fixed: no pullback, no update.
    pub kernel_trainable: bool,
}

impl RnnModel {
    /// Kernel from `init`; `T` and the readout uniform in `±1/√fan_in`;
    /// biases zero. Draws the kernel first, then `T`, then the readout.
    pub fn init<R: Rng + ?Sized>(
        hidden: usize,
        input_dim: usize,
        classes: usize,
        init: KernelInit,
        readout_mode: Readout,
        rng: &mut R,
    ) -> Result<Self> {
        if input_dim == 0 || classes == 0 {
            return Err(Error::InvalidArgument(
                "input and output sizes must be positive".into(),
            ));
        }
        let param = kernel_init(init, hidden, rng)?;
        let ti = 1.0 / (input_dim as f64).sqrt();
        let input_map = Matrix::from_fn(hidden, input_dim, |_, _| rng.random_range(-ti..=ti));
        let ri = 1.0 / (hidden as f64).sqrt();
        let readout = Matrix::from_fn(classes, hidden, |_, _| rng.random_range(-ri..=ri));
        Ok(Self {
            kernel: OrthoLayer::new(param),
            input_map,
            bias: vec![0.0; hidden],
            readout,
            readout_bias: vec![0.0; classes],
            activation: Activation::ModRelu,
            readout_mode,
            kernel_trainable: true,
        })
    }

    /// Assembles a model from explicit parameters, checking shapes.
    pub fn from_parts(
        param: SkewParam<f64>,
        input_map: Matrix<f64>,
        bias: Vec<f64>,
        readout: Matrix<f64>,
        readout_bias: Vec<f64>,
        activation: Activation,
        readout_mode: Readout,
    ) -> Result<Self> {
        let p = param.n();
        if input_map.rows() != p {
            return Err(Error::mismatch("RnnModel", (p, p), input_map.shape()));
        }
        if bias.len() != p {
            return Err(Error::mismatch("RnnModel", (p, 1), (bias.len(), 1)));
        }
        if readout.cols() != p {
            return Err(Error::mismatch("RnnModel", (p, p), readout.shape()));
        }
        if readout_bias.len() != readout.rows() {
            return Err(Error::mismatch(
                "RnnModel",
                readout.shape(),
                (readout_bias.len(), 1),
            ));
        }
        Ok(Self {
            kernel: OrthoLayer::new(param),
            input_map,
            bias,
            readout,
            readout_bias,
            activation,
            readout_mode,
            kernel_trainable: true,
        })
    }

    pub fn hidden(&self) -> usize {
        self.kernel.n()
    }

    pub fn input_dim(&self) -> usize {
        self.input_map.cols()
    }

    pub fn classes(&self) -> usize {
        self.readout.rows()
    }

    /// Recomputes the cached kernel if the parameter moved.
    pub fn refresh(&mut self) -> Result<()> {
        self.kernel.refresh().map(|_| ())
    }

    /// Forward pass from `h_0 = 0`.
    pub fn forward<'a>(&self, batch: &'a SequenceBatch) -> Result<(Vec<Matrix<f64>>, Tape<'a>)> {
        let h0 = Matrix::zeros(self.hidden(), batch.batch());
        self.forward_from(batch, h0)
    }

    /// Forward pass from an explicit initial state (`p × batch`).
    pub fn forward_from<'a>(
        &self,
        batch: &'a SequenceBatch,
        h0: Matrix<f64>,
    ) -> Result<(Vec<Matrix<f64>>, Tape<'a>)> {
        let b = self.kernel.kernel()?;
        let p = self.hidden();
        if batch.input_dim() != self.input_dim() {
            return Err(Error::mismatch(
                "RnnModel::forward",
                self.input_map.shape(),
                (batch.input_dim(), batch.batch()),
            ));
        }
        if h0.shape() != (p, batch.batch()) {
            return Err(Error::mismatch(
                "RnnModel::forward",
                (p, batch.batch()),
                h0.shape(),
            ));
        }
        let mut steps: Vec<TapeStep<'a>> = Vec::with_capacity(batch.len());
        let mut logits = Vec::new();
        for t in 0..batch.len() {
            let x = batch.step(t);
            let prev = steps.last().map_or(&h0, |s| &s.h);
            let mut z = b.mul_unchecked(prev);
            z += &self.input_map.mul_unchecked(x);
            let h = self.activate(&z);
            let emit = match self.readout_mode {
                Readout::EveryStep => true,
                Readout::FinalStep => t + 1 == batch.len(),
            };
            if emit {
                logits.push(self.readout_logits(&h));
            }
            steps.push(TapeStep { z, h, x });
        }
        Ok((logits, Tape { h0, steps }))
    }

    fn activate(&self, z: &Matrix<f64>) -> Matrix<f64> {
        match self.activation {
            Activation::Identity => z.clone(),
            Activation::ModRelu => {
                let mut h = z.clone();
                let cols = z.cols();
                for (i, &bi) in self.bias.iter().enumerate() {
                    for v in &mut h.as_mut_slice()[i * cols..(i + 1) * cols] {
                        *v = modrelu_scalar(*v, bi);
                    }
                }
                h
            }
        }
    }

    fn readout_logits(&self, h: &Matrix<f64>) -> Matrix<f64> {
        let mut y = self.readout.mul_unchecked(h);
        let cols = y.cols();
        for (i, &c) in self.readout_bias.iter().enumerate() {
            y.as_mut_slice()[i * cols..(i + 1) * cols]
                .iter_mut()
                .for_each(|v| *v += c);
        }
        y
    }

    /// Backpropagation through time. `dlogits` must match the logits
    /// returned by the forward pass that produced `tape`. The kernel
    /// gradient is accumulated over all timesteps and pulled back to
    /// `so(p)` once.
    pub fn backward(&mut self, tape: &Tape<'_>, dlogits: &[Matrix<f64>]) -> Result<RnnGrads> {
        let len = tape.steps.len();
        let expected = match self.readout_mode {
            Readout::EveryStep => len,
            Readout::FinalStep => 1,
        };
        if dlogits.len() != expected {
            return Err(Error::InvalidArgument(format!(
                "expected {expected} logit gradients, got {}",
                dlogits.len()
            )));
        }
        let p = self.hidden();
        let batch = tape.h0.cols();
        if let Some(bad) = dlogits
            .iter()
            .find(|g| g.shape() != (self.classes(), batch))
        {
            return Err(Error::mismatch(
                "RnnModel::backward",
                (self.classes(), batch),
                bad.shape(),
            ));
        }
        let kernel_t = self.kernel.kernel()?.transpose();
        let readout_t = self.readout.transpose();

        let mut d_b = Matrix::zeros(p, p);
        let mut d_t = Matrix::zeros(p, self.input_dim());
        let mut d_bias = vec![0.0; p];
        let mut d_r = Matrix::zeros(self.classes(), p);
        let mut d_c = vec![0.0; self.classes()];
        let mut d_h = Matrix::zeros(p, batch);

        for t in (0..len).rev() {
            let step = &tape.steps[t];
            let dl = match self.readout_mode {
                Readout::EveryStep => Some(&dlogits[t]),
                Readout::FinalStep if t + 1 == len => Some(&dlogits[0]),
                Readout::FinalStep => None,
            };
            if let Some(dl) = dl {
                d_r += &dl.mul_unchecked(&step.h.transpose());
                for (i, c) in d_c.iter_mut().enumerate() {
                    *c += dl.row(i).iter().sum::<f64>();
                }
                d_h += &readout_t.mul_unchecked(dl);
            }
            let d_z = match self.activation {
                Activation::Identity => d_h,
                Activation::ModRelu => {
                    let mut d_z = d_h;
                    for i in 0..p {
                        let bi = self.bias[i];
                        let zrow = step.z.row(i);
                        let mut acc = 0.0;
                        for (g, &z) in d_z.row_mut(i).iter_mut().zip(zrow) {
                            let (dz, db) = modrelu_grad_scalar(z, bi);
                            acc += *g * db;
                            *g *= dz;
                        }
                        d_bias[i] += acc;
                    }
                    d_z
                }
            };
            let prev = if t == 0 {
                &tape.h0
            } else {
                &tape.steps[t - 1].h
            };
            d_b += &d_z.mul_unchecked(&prev.transpose());
            d_t += &d_z.mul_unchecked(&step.x.transpose());
            d_h = kernel_t.mul_unchecked(&d_z);
        }

        let kernel_algebra = if self.kernel_trainable {
            self.kernel.pullback(&d_b)?
        } else {
            Matrix::zeros(p, p)
        };
        Ok(RnnGrads {
            kernel_euclid: d_b,
            kernel_algebra,
            input_map: d_t,
            bias: d_bias,
            readout: d_r,
            readout_bias: d_c,
        })
    }
}

/// Mean softmax cross entropy over every column of every logit matrix,
/// `targets[k][b]` being the class of column `b` of `logits[k]`. Returns the
/// loss and its gradient with respect to each logit matrix.
pub fn cross_entropy(
    logits: &[Matrix<f64>],
    targets: &[Vec<usize>],
) -> Result<(f64, Vec<Matrix<f64>>)> {
    if logits.len() != targets.len() || logits.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "{} logit steps but {} target steps",
            logits.len(),
            targets.len()
        )));
    }
    let count: usize = logits.iter().map(Matrix::cols).sum();
    let scale = 1.0 / count as f64;
    let mut total = 0.0;
    let mut grads = Vec::with_capacity(logits.len());
    for (y, tgt) in logits.iter().zip(targets) {
        let (classes, batch) = y.shape();
        if tgt.len() != batch {
            return Err(Error::mismatch(
                "cross_entropy",
                y.shape(),
                (classes, tgt.len()),
            ));
        }
        let mut g = Matrix::zeros(classes, batch);
        for (b, &label) in tgt.iter().enumerate() {
            if label >= classes {
                return Err(Error::InvalidArgument(format!(
                    "label {label} outside {classes} classes"
                )));
            }
            let mut max = f64::NEG_INFINITY;
            for c in 0..classes {
                max = max.max(y.get(c, b));
            }
            let mut denom = 0.0;
            for c in 0..classes {
                denom += (y.get(c, b) - max).exp();
            }
            let log_denom = denom.ln();
            total -= y.get(label, b) - max - log_denom;
            for c in 0..classes {
                let prob = (y.get(c, b) - max - log_denom).exp();
                let indicator = if c == label { 1.0 } else { 0.0 };
                g.set(c, b, (prob - indicator) * scale);
            }
        }
        grads.push(g);
    }
    Ok((total * scale, grads))
}

/// Index of the largest logit in each column.
pub fn argmax_columns(logits: &Matrix<f64>) -> Vec<usize> {
    (0..logits.cols())
        .map(|b| {
            let mut best = 0;
            for c in 1..logits.rows() {
                if logits.get(c, b) > logits.get(best, b) {
                    best = c;
                }
            }
            best
        })
        .collect()
}
