use super::model::{RnnGrads, RnnModel};
use crate::error::{Error, Result};
use crate::liegroup::skew_len;
use crate::optim::{Optimizer, OptimizerKind};

/// Optimizer state for every parameter tensor of an [`RnnModel`], with the
/// kernel in its own learning-rate group.
#[derive(Debug, Clone)]
pub struct ModelOptimizer {
    pub lr: f64,
    pub ortho_lr: f64,
    kernel: Optimizer<f64>,
    input_map: Optimizer<f64>,
    bias: Optimizer<f64>,
    readout: Optimizer<f64>,
    readout_bias: Optimizer<f64>,
    steps: u64,
}

impl ModelOptimizer {
    pub fn new(kind: OptimizerKind, model: &RnnModel, lr: f64, ortho_lr: f64) -> Result<Self> {
        for (name, v) in [("lr", lr), ("ortho_lr", ortho_lr)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        let p = model.hidden();
        Ok(Self {
            lr,
            ortho_lr,
            kernel: Optimizer::new(kind, skew_len(p)),
            input_map: Optimizer::new(kind, p * model.input_dim()),
            bias: Optimizer::new(kind, p),
            readout: Optimizer::new(kind, model.classes() * p),
            readout_bias: Optimizer::new(kind, model.classes()),
            steps: 0,
        })
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// Applies one update to every parameter. The kernel cache goes stale.
    pub fn apply(&mut self, model: &mut RnnModel, grads: &RnnGrads) -> Result<()> {
        if model.kernel_trainable {
            model.kernel.apply_algebra_gradient(
                &grads.kernel_algebra,
                self.ortho_lr,
                &mut self.kernel,
            )?;
        }
        self.input_map.update(
            model.input_map.as_mut_slice(),
            grads.input_map.as_slice(),
            self.lr,
        )?;
        self.bias.update(&mut model.bias, &grads.bias, self.lr)?;
        self.readout.update(
            model.readout.as_mut_slice(),
            grads.readout.as_slice(),
            self.lr,
        )?;
        self.readout_bias
            .update(&mut model.readout_bias, &grads.readout_bias, self.lr)?;
        self.steps += 1;
        Ok(())
    }
}
