use crate::scalar::Real;

/// Real modrelu: `sign(z) · max(|z| + b, 0)`, zero at `z = 0`.
#[inline]
pub fn modrelu_scalar<T: Real>(z: T, b: T) -> T {
    if z == T::zero() {
        return T::zero();
    }
    let m = z.abs() + b;
    if m > T::zero() {
        z.signum() * m
    } else {
        T::zero()
    }
}

/// Derivatives `(∂h/∂z, ∂h/∂b)` of [`modrelu_scalar`]. Both are zero in the
/// dead zone, on its boundary and at `z = 0`.
#[inline]
pub fn modrelu_grad_scalar<T: Real>(z: T, b: T) -> (T, T) {
    if z == T::zero() || z.abs() + b <= T::zero() {
        (T::zero(), T::zero())
    } else {
        (T::one(), z.signum())
    }
}

/// Componentwise modrelu of `z` with bias `b`.
pub fn modrelu<T: Real>(z: &[T], b: &[T]) -> Vec<T> {
    assert_eq!(z.len(), b.len(), "modrelu length mismatch");
    z.iter()
        .zip(b)
        .map(|(&z, &b)| modrelu_scalar(z, b))
        .collect()
}
