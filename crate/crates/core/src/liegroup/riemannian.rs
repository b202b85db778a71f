use crate::error::{Error, Result};
use crate::expm::{cayley, expm, pade_ss, PadeDegree};
use crate::matcore::{jacobi_svd, Matrix};
use crate::scalar::Real;

/// Inputs that must lie on `SO(n)` are accepted when `‖BᵀB − I‖_F` is at
/// most this times `n`.
pub const ORTHO_CHECK_TOL: f64 = 1e-8;

fn require_orthogonal<T: Real>(op: &'static str, b: &Matrix<T>) -> Result<usize> {
    let n = b.require_square(op)?;
    let residual = b.ortho_residual();
    if !(residual <= T::lit(ORTHO_CHECK_TOL * n as f64)) {
        return Err(Error::NotOrthogonal {
            op,
            residual: residual.to_f64_lossy(),
        });
    }
    Ok(n)
}

fn require_same_shape<T: Real>(op: &'static str, a: &Matrix<T>, b: &Matrix<T>) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(Error::mismatch(op, a.shape(), b.shape()));
    }
    Ok(())
}

fn require_step<T: Real>(eta: T) -> Result<()> {
    if !(eta >= T::zero()) || !eta.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "step size must be finite and non-negative, got {eta}"
        )));
    }
    Ok(())
}

/// Trace inner product `tr(XᵀY)`.
pub fn metric_inner<T: Real>(x: &Matrix<T>, y: &Matrix<T>) -> Result<T> {
    x.inner(y)
}

/// Orthogonal projection onto `T_B SO(n)`: `½ (X − B Xᵀ B)`.
pub fn tangent_project<T: Real>(b: &Matrix<T>, x: &Matrix<T>) -> Result<Matrix<T>> {
    require_orthogonal("tangent_project", b)?;
    require_same_shape("tangent_project", b, x)?;
    let bxtb = b.mul_unchecked(&x.transpose()).mul_unchecked(b);
    Ok((x - &bxtb).scaled(T::lit(0.5)))
}

/// Riemannian gradient on `SO(n)`: the tangent component of the ambient
/// gradient.
pub fn riemannian_grad<T: Real>(b: &Matrix<T>, euclid_grad: &Matrix<T>) -> Result<Matrix<T>> {
    tangent_project(b, euclid_grad)
}

/// `Bᵀ ∇̃f(B) = skew(Bᵀ ∇f(B))`, the Riemannian gradient pulled back to the
/// Lie algebra by left translation. Computed directly as a skew part so the
/// result is exactly skew-symmetric.
fn algebra_direction<T: Real>(b: &Matrix<T>, euclid_grad: &Matrix<T>) -> Matrix<T> {
    b.transpose().mul_unchecked(euclid_grad).skew_part()
}

/// One step of Riemannian gradient descent along the geodesic:
/// `B ← B exp(−η Bᵀ ∇̃f(B))`.
pub fn rgd_step<T: Real>(b: &Matrix<T>, euclid_grad: &Matrix<T>, eta: T) -> Result<Matrix<T>> {
    require_orthogonal("rgd_step", b)?;
    require_same_shape("rgd_step", b, euclid_grad)?;
    require_step(eta)?;
    if eta == T::zero() {
        return Ok(b.clone());
    }
    let omega = algebra_direction(b, euclid_grad);
    Ok(b.mul_unchecked(&expm(&omega.scaled(-eta))?))
}

/// Retraction used by [`retraction_step`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RetractionKind {
    /// `B cayley(−η Ω)`.
    Cayley,
    /// `B φ(−η Ω)` with `φ` a fixed-degree Padé approximant plus scaling
    /// and squaring.
    PadeSs(PadeDegree),
    /// Closest orthogonal matrix to `B − η ∇̃f(B)`, from its SVD.
    Projection,
}

/// Retraction-based descent step. Every kind satisfies `r_B(0) = B` and has
/// identity differential at zero.
pub fn retraction_step<T: Real>(
    b: &Matrix<T>,
    euclid_grad: &Matrix<T>,
    eta: T,
    kind: RetractionKind,
) -> Result<Matrix<T>> {
    require_orthogonal("retraction_step", b)?;
    require_same_shape("retraction_step", b, euclid_grad)?;
    require_step(eta)?;
    if eta == T::zero() {
        return Ok(b.clone());
    }
    match kind {
        RetractionKind::Cayley => {
            let omega = algebra_direction(b, euclid_grad).scaled(-eta);
            Ok(b.mul_unchecked(&cayley(&omega)?))
        }
        RetractionKind::PadeSs(m) => {
            let omega = algebra_direction(b, euclid_grad).scaled(-eta);
            Ok(b.mul_unchecked(&pade_ss(&omega, m)?))
        }
        RetractionKind::Projection => {
            let tangent = b.mul_unchecked(&algebra_direction(b, euclid_grad));
            let moved = b - &tangent.scaled(eta);
            let svd = jacobi_svd(&moved)?;
            Ok(svd.u.mul_unchecked(&svd.v.transpose()))
        }
    }
}

/// Retraction on the unit sphere, `(x + v) / ‖x + v‖`.
pub fn sphere_retraction<T: Real>(x: &[T], v: &[T]) -> Result<Vec<T>> {
    if x.len() != v.len() {
        return Err(Error::mismatch(
            "sphere_retraction",
            (x.len(), 1),
            (v.len(), 1),
        ));
    }
    let tol = T::lit(1e-10);
    let norm_x = x.iter().map(|&a| a * a).sum::<T>().sqrt();
    if !((norm_x - T::one()).abs() <= tol) {
        return Err(Error::InvalidArgument(format!(
            "base point must have unit norm, got {norm_x}"
        )));
    }
    let dot: T = x.iter().zip(v).map(|(&a, &b)| a * b).sum();
    if !(dot.abs() <= tol) {
        return Err(Error::InvalidArgument(format!(
            "tangent vector must be orthogonal to the base point, ⟨x, v⟩ = {dot}"
        )));
    }
    if v.iter().all(|&t| t == T::zero()) {
        // exact r_x(0) = x, without renormalizing a base point that is only
        // unit to rounding
        return Ok(x.to_vec());
    }
    let sum: Vec<T> = x.iter().zip(v).map(|(&a, &b)| a + b).collect();
    let norm = sum.iter().map(|&a| a * a).sum::<T>().sqrt();
    if norm == T::zero() {
        return Err(Error::InvalidArgument("x + v is zero".into()));
    }
    Ok(sum.into_iter().map(|a| a / norm).collect())
}
