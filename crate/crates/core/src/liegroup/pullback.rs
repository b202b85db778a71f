use super::skew::vec_from_skew;
use crate::error::{Error, Result};
use crate::expm::{expm, expm_frechet, SKEW_TOLERANCE};
use crate::matcore::Matrix;
use crate::scalar::Real;

/// Gradient of `A ↦ f(exp(A))` on `so(n)` with respect to the trace metric,
/// given the Euclidean gradient `G = ∇f(B)` at `B = exp(A)`:
///
/// `B · L(−A, ½(BᵀG − GᵀB))`
///
/// where `L` is the Fréchet derivative of `exp`. The result is re-skewed
/// before returning so rounding never leaks a symmetric part into the
/// parameters.
///
/// In the coordinates of [`super::SkewParam`] each free entry appears twice
/// in `A`, so the partial derivative with respect to `v_k` (entry `(i, j)`,
/// `i < j`) is `2 · out[i][j]`; see [`coordinate_gradient`].
pub fn grad_pullback<T: Real>(a: &Matrix<T>, euclid_grad: &Matrix<T>) -> Result<Matrix<T>> {
    check_skew(a)?;
    let b = expm(a)?;
    grad_pullback_with_kernel(a, &b, euclid_grad)
}

/// [`grad_pullback`] with `B = exp(A)` supplied by the caller (usually a
/// cached kernel), so only the one block exponential inside the Fréchet
/// derivative is evaluated.
pub fn grad_pullback_with_kernel<T: Real>(
    a: &Matrix<T>,
    b: &Matrix<T>,
    euclid_grad: &Matrix<T>,
) -> Result<Matrix<T>> {
    a.require_square("grad_pullback")?;
    if b.shape() != a.shape() {
        return Err(Error::mismatch("grad_pullback", a.shape(), b.shape()));
    }
    if euclid_grad.shape() != a.shape() {
        return Err(Error::mismatch(
            "grad_pullback",
            a.shape(),
            euclid_grad.shape(),
        ));
    }
    let direction = b.transpose().mul_unchecked(euclid_grad).skew_part();
    let (_, frechet) = expm_frechet(&a.transpose(), &direction)?;
    Ok(b.mul_unchecked(&frechet).skew_part())
}

/// Partial derivatives with respect to the [`super::SkewParam`] coordinates
/// for a metric gradient returned by [`grad_pullback`].
pub fn coordinate_gradient<T: Real>(metric_grad: &Matrix<T>) -> Result<Vec<T>> {
    Ok(vec_from_skew(metric_grad)?
        .into_iter()
        .map(|x| x * T::lit(2.0))
        .collect())
}

fn check_skew<T: Real>(a: &Matrix<T>) -> Result<()> {
    a.require_square("grad_pullback")?;
    let defect = a.skew_defect();
    if defect > T::lit(SKEW_TOLERANCE) * a.fro_norm() {
        return Err(Error::NotSkew {
            op: "grad_pullback",
            asymmetry: defect.to_f64_lossy(),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liegroup::skew_from_vec;

    #[test]
    fn trace_objective_at_origin_has_zero_gradient() {
        let g = grad_pullback(&Matrix::<f64>::zeros(3, 3), &Matrix::identity(3)).unwrap();
        assert_eq!(g.max_abs(), 0.0);
    }

    #[test]
    fn at_origin_it_is_the_skew_part() {
        let g = Matrix::from_fn(3, 3, |i, j| (i as f64 + 1.0) * (j as f64 - 0.5));
        let p = grad_pullback(&Matrix::zeros(3, 3), &g).unwrap();
        assert!((&p - &g.skew_part()).max_abs() < 1e-15);
    }

    #[test]
    fn output_is_exactly_skew() {
        let a = skew_from_vec(&[0.4, -1.1, 0.9, 0.2, 0.3, -0.7], 4).unwrap();
        let g = Matrix::from_fn(4, 4, |i, j| ((3 * i + j) as f64).cos());
        let p = grad_pullback(&a, &g).unwrap();
        assert_eq!(p.skew_defect(), 0.0);
        assert_eq!(coordinate_gradient(&p).unwrap().len(), 6);
    }

    #[test]
    fn rejects_non_skew() {
        let a = Matrix::from_diag(&[1.0, 0.0]);
        assert!(matches!(grad_pullback(&a, &a), Err(Error::NotSkew { .. })));
    }
}
