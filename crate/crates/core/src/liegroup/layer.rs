use super::pullback::grad_pullback_with_kernel;
use super::skew::{vec_from_skew, SkewParam};
use crate::error::{Error, Result};
use crate::expm::expm;
use crate::matcore::Matrix;
use crate::optim::Optimizer;
use crate::scalar::Real;

/// `‖A‖_F` at which the layer warns that the parameter may have left the
/// region where `exp` is a diffeomorphism onto its image.
pub const REGION_WARN_NORM: f64 = std::f64::consts::PI;

/// An orthogonal matrix `B = exp(A)` parametrized by a skew `A`, with `B`
/// cached between optimizer steps.
///
/// The cache goes stale whenever the parameter changes and is rebuilt by
/// [`OrthoLayer::refresh`], so a training step costs exactly one
/// exponential and one gradient pullback regardless of how many times the
/// kernel is used inside the step.
#[derive(Debug, Clone)]
pub struct OrthoLayer<T> {
    param: SkewParam<T>,
    cached: Option<Matrix<T>>,
    stale: bool,
    expm_evals: u64,
    pullback_evals: u64,
    outside_region: bool,
}

impl<T: Real> OrthoLayer<T> {
    pub fn new(param: SkewParam<T>) -> Self {
        Self {
            param,
            cached: None,
            stale: true,
            expm_evals: 0,
            pullback_evals: 0,
            outside_region: false,
        }
    }

    pub fn n(&self) -> usize {
        self.param.n()
    }

    pub fn param(&self) -> &SkewParam<T> {
        &self.param
    }

    /// Replaces the parameter; the cache becomes stale.
    pub fn set_param(&mut self, param: SkewParam<T>) -> Result<()> {
        if param.n() != self.n() {
            return Err(Error::mismatch(
                "OrthoLayer::set_param",
                (self.n(), self.n()),
                (param.n(), param.n()),
            ));
        }
        self.param = param;
        self.stale = true;
        Ok(())
    }

    pub fn is_stale(&self) -> bool {
        self.stale
    }

    pub fn expm_eval_count(&self) -> u64 {
        self.expm_evals
    }

    pub fn pullback_eval_count(&self) -> u64 {
        self.pullback_evals
    }

    /// Recomputes `exp(A)` if the parameter changed since the last call.
    pub fn refresh(&mut self) -> Result<&Matrix<T>> {
        if self.stale || self.cached.is_none() {
            let a = self.param.matrix();
            let norm = self.param.frobenius_norm().to_f64_lossy();
            // warn when the bound is first crossed, not on every refresh
            let outside = norm >= REGION_WARN_NORM;
            if outside && !self.outside_region {
                log::warn!(
                    "skew parameter has ‖A‖_F = {norm:.4} >= π; exp may be near a critical point"
                );
            }
            self.outside_region = outside;
            self.cached = Some(expm(&a)?);
            self.expm_evals += 1;
            self.stale = false;
        }
        Ok(self.cached.as_ref().expect("cache filled above"))
    }

    /// The cached kernel; errors if the parameter changed since the last
    /// [`refresh`](Self::refresh).
    pub fn kernel(&self) -> Result<&Matrix<T>> {
        match (&self.cached, self.stale) {
            (Some(b), false) => Ok(b),
            _ => Err(Error::StaleKernel),
        }
    }

    /// Pulls a Euclidean gradient with respect to the kernel back to
    /// `so(n)` (trace-metric gradient), reusing the cached kernel.
    pub fn pullback(&mut self, euclid_grad: &Matrix<T>) -> Result<Matrix<T>> {
        let b = self.kernel()?;
        let a = self.param.matrix();
        let g = grad_pullback_with_kernel(&a, b, euclid_grad)?;
        self.pullback_evals += 1;
        Ok(g)
    }

    /// Moves the parameter with `optimizer` along an already pulled-back
    /// algebra gradient and marks the cache stale.
    pub fn apply_algebra_gradient(
        &mut self,
        algebra_grad: &Matrix<T>,
        eta: T,
        optimizer: &mut Optimizer<T>,
    ) -> Result<()> {
        let g = vec_from_skew(algebra_grad)?;
        optimizer.update(self.param.values_mut(), &g, eta)?;
        self.stale = true;
        Ok(())
    }

    /// Full exponential-parametrization step: pullback of the Euclidean
    /// gradient at `B`, optimizer update of `A`, cache invalidation.
    ///
    /// With plain SGD this is `A ← A − η ∇(f∘exp)(A)`. For `n > 2` the induced
    /// map is not a retraction on `SO(n)`; it differs from Riemannian
    /// gradient descent at second order.
    pub fn expparam_step(
        &mut self,
        euclid_grad: &Matrix<T>,
        eta: T,
        optimizer: &mut Optimizer<T>,
    ) -> Result<()> {
        self.refresh()?;
        let g = self.pullback(euclid_grad)?;
        self.apply_algebra_gradient(&g, eta, optimizer)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stale_until_refreshed() {
        let mut layer = OrthoLayer::new(SkewParam::<f64>::zeros(3));
        assert!(matches!(layer.kernel(), Err(Error::StaleKernel)));
        assert_eq!(layer.refresh().unwrap(), &Matrix::identity(3));
        layer.refresh().unwrap();
        assert_eq!(layer.expm_eval_count(), 1);
        assert!(layer.kernel().is_ok());
    }

    #[test]
    fn zero_step_keeps_parameters() {
        let p = SkewParam::new(3, vec![0.1, -0.2, 0.3]).unwrap();
        let mut layer = OrthoLayer::new(p.clone());
        let mut opt = Optimizer::sgd(3);
        let g = Matrix::from_fn(3, 3, |i, j| (i + j) as f64);
        layer.expparam_step(&g, 0.0, &mut opt).unwrap();
        assert_eq!(layer.param(), &p);
        assert!(layer.is_stale());
        assert_eq!(layer.pullback_eval_count(), 1);
    }

    #[test]
    fn one_by_one_is_trivial() {
        let mut layer = OrthoLayer::new(SkewParam::<f64>::zeros(1));
        assert_eq!(layer.refresh().unwrap(), &Matrix::identity(1));
        let mut opt = Optimizer::sgd(0);
        layer
            .expparam_step(&Matrix::from_rows(&[[3.0]]), 0.1, &mut opt)
            .unwrap();
        assert_eq!(layer.refresh().unwrap(), &Matrix::identity(1));
    }

    #[test]
    fn dimension_checked_on_replace() {
        let mut layer = OrthoLayer::new(SkewParam::<f64>::zeros(3));
        assert!(layer.set_param(SkewParam::zeros(4)).is_err());
    }
}
