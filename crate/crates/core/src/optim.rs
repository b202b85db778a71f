//! First-order optimizers over flat parameter vectors.
//!
//! Parameters are split into groups with their own learning rate; the
//! orthogonal kernel is one group (its gradient arrives already pulled back
//! to `so(n)` and flattened) and everything else is another. The optimizers
//! know nothing about the geometry.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::scalar::Real;

pub const RMSPROP_RHO: f64 = 0.99;
pub const ADAM_BETA1: f64 = 0.9;
pub const ADAM_BETA2: f64 = 0.999;
pub const EPSILON: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupTag {
    Orthogonal,
    General,
}

/// A named slice of the model's parameters sharing one learning rate.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamGroup<T> {
    pub id: String,
    pub values: Vec<T>,
    pub lr: T,
    pub tag: GroupTag,
}

impl<T: Real> ParamGroup<T> {
    pub fn new(id: impl Into<String>, values: Vec<T>, lr: T, tag: GroupTag) -> Result<Self> {
        if !(lr > T::zero()) || !lr.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "learning rate must be positive, got {lr}"
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                op: "ParamGroup::new",
            });
        }
        Ok(Self {
            id: id.into(),
            values,
            lr,
            tag,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptimizerKind {
    Sgd,
    Rmsprop,
    Adam,
}

impl FromStr for OptimizerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sgd" => Ok(Self::Sgd),
            "rmsprop" => Ok(Self::Rmsprop),
            "adam" => Ok(Self::Adam),
            other => Err(Error::Config(format!("unknown optimizer `{other}`"))),
        }
    }
}

impl fmt::Display for OptimizerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Sgd => "sgd",
            Self::Rmsprop => "rmsprop",
            Self::Adam => "adam",
        })
    }
}

/// Constants of the adaptive methods.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hyper {
    pub rho: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for Hyper {
    fn default() -> Self {
        Self {
            rho: RMSPROP_RHO,
            beta1: ADAM_BETA1,
            beta2: ADAM_BETA2,
            eps: EPSILON,
        }
    }
}

/// Moment accumulators of one group.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct OptState<T> {
    pub first: Vec<T>,
    pub second: Vec<T>,
    pub step: u64,
}

impl<T: Real> OptState<T> {
    pub fn new(len: usize) -> Self {
        Self {
            first: vec![T::zero(); len],
            second: vec![T::zero(); len],
            step: 0,
        }
    }

    fn ensure_len(&mut self, len: usize) -> Result<()> {
        if self.step == 0 && self.first.is_empty() && len > 0 {
            *self = Self::new(len);
        }
        if self.first.len() != len || self.second.len() != len {
            return Err(Error::mismatch(
                "optimizer state",
                (self.first.len(), 1),
                (len, 1),
            ));
        }
        Ok(())
    }
}

fn check_grad<T: Real>(values: &[T], grad: &[T]) -> Result<()> {
    if values.len() != grad.len() {
        return Err(Error::mismatch(
            "optimizer step",
            (values.len(), 1),
            (grad.len(), 1),
        ));
    }
    if grad.iter().any(|g| !g.is_finite()) {
        return Err(Error::NonFinite {
            op: "optimizer step",
        });
    }
    Ok(())
}

/// `v ← v − lr g`.
pub fn sgd_step<T: Real>(group: &mut ParamGroup<T>, grad: &[T]) -> Result<()> {
    let lr = group.lr;
    sgd_update(&mut group.values, grad, lr)
}

fn sgd_update<T: Real>(values: &mut [T], grad: &[T], lr: T) -> Result<()> {
    check_grad(values, grad)?;
    for (v, &g) in values.iter_mut().zip(grad) {
        *v -= lr * g;
    }
    Ok(())
}

/// `s ← ρ s + (1 − ρ) g²`, `v ← v − lr g / (√s + ε)`.
pub fn rmsprop_step<T: Real>(
    group: &mut ParamGroup<T>,
    state: &mut OptState<T>,
    grad: &[T],
    hyper: &Hyper,
) -> Result<()> {
    let lr = group.lr;
    rmsprop_update(&mut group.values, state, grad, lr, hyper)
}

fn rmsprop_update<T: Real>(
    values: &mut [T],
    state: &mut OptState<T>,
    grad: &[T],
    lr: T,
    hyper: &Hyper,
) -> Result<()> {
    check_grad(values, grad)?;
    state.ensure_len(values.len())?;
    let rho = T::lit(hyper.rho);
    let eps = T::lit(hyper.eps);
    for ((v, s), &g) in values.iter_mut().zip(&mut state.second).zip(grad) {
        *s = rho * *s + (T::one() - rho) * g * g;
        *v -= lr * g / (s.sqrt() + eps);
    }
    state.step += 1;
    Ok(())
}

/// Adam with bias correction.
pub fn adam_step<T: Real>(
    group: &mut ParamGroup<T>,
    state: &mut OptState<T>,
    grad: &[T],
    hyper: &Hyper,
) -> Result<()> {
    let lr = group.lr;
    adam_update(&mut group.values, state, grad, lr, hyper)
}

fn adam_update<T: Real>(
    values: &mut [T],
    state: &mut OptState<T>,
    grad: &[T],
    lr: T,
    hyper: &Hyper,
) -> Result<()> {
    check_grad(values, grad)?;
    state.ensure_len(values.len())?;
    state.step += 1;
    let b1 = T::lit(hyper.beta1);
    let b2 = T::lit(hyper.beta2);
    let eps = T::lit(hyper.eps);
    let t = state.step as i32;
    let corr1 = T::one() - b1.powi(t);
    let corr2 = T::one() - b2.powi(t);
    for (((v, m), s), &g) in values
        .iter_mut()
        .zip(&mut state.first)
        .zip(&mut state.second)
        .zip(grad)
    {
        *m = b1 * *m + (T::one() - b1) * g;
        *s = b2 * *s + (T::one() - b2) * g * g;
        let m_hat = *m / corr1;
        let s_hat = *s / corr2;
        *v -= lr * m_hat / (s_hat.sqrt() + eps);
    }
    Ok(())
}

/// An optimizer bound to a single parameter group's state.
#[derive(Debug, Clone, PartialEq)]
pub struct Optimizer<T> {
    pub kind: OptimizerKind,
    pub hyper: Hyper,
    pub state: OptState<T>,
}

impl<T: Real> Optimizer<T> {
    pub fn new(kind: OptimizerKind, len: usize) -> Self {
        Self {
            kind,
            hyper: Hyper::default(),
            state: OptState::new(len),
        }
    }

    pub fn sgd(len: usize) -> Self {
        Self::new(OptimizerKind::Sgd, len)
    }

    /// Updates `values` in place with learning rate `lr`.
    pub fn update(&mut self, values: &mut [T], grad: &[T], lr: T) -> Result<()> {
        match self.kind {
            OptimizerKind::Sgd => {
                sgd_update(values, grad, lr)?;
                self.state.step += 1;
                Ok(())
            }
            OptimizerKind::Rmsprop => {
                rmsprop_update(values, &mut self.state, grad, lr, &self.hyper)
            }
            OptimizerKind::Adam => adam_update(values, &mut self.state, grad, lr, &self.hyper),
        }
    }

    pub fn step_group(&mut self, group: &mut ParamGroup<T>, grad: &[T]) -> Result<()> {
        let lr = group.lr;
        self.update(&mut group.values, grad, lr)
    }
}
