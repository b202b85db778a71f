use crate::error::{Error, Result};
use crate::expm::SKEW_TOLERANCE;
use crate::matcore::Matrix;
use crate::scalar::Real;

/// Number of free parameters of `so(n)`.
pub const fn skew_len(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// Coordinates of a skew-symmetric matrix: its strictly upper triangle,
/// row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SkewParam<T> {
    n: usize,
    v: Vec<T>,
}

impl<T: Real> SkewParam<T> {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            v: vec![T::zero(); skew_len(n)],
        }
    }

    pub fn new(n: usize, v: Vec<T>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument(
                "skew dimension must be positive".into(),
            ));
        }
        if v.len() != skew_len(n) {
            return Err(Error::InvalidArgument(format!(
                "so({n}) has {} coordinates, got {}",
                skew_len(n),
                v.len()
            )));
        }
        Ok(Self { n, v })
    }

    pub fn from_matrix(a: &Matrix<T>) -> Result<Self> {
        let n = a.require_square("SkewParam::from_matrix")?;
        Ok(Self {
            n,
            v: vec_from_skew(a)?,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[T] {
        &self.v
    }

    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.v
    }

    /// The realized matrix `A - Aᵀ`, `A` strictly upper triangular.
    pub fn matrix(&self) -> Matrix<T> {
        let mut a = Matrix::zeros(self.n, self.n);
        let mut k = 0;
        for i in 0..self.n {
            for j in i + 1..self.n {
                a.set(i, j, self.v[k]);
                a.set(j, i, -self.v[k]);
                k += 1;
            }
        }
        a
    }

    /// `‖A‖_F`, an upper bound on the largest eigenvalue modulus of `A`.
    pub fn frobenius_norm(&self) -> T {
        (T::lit(2.0) * self.v.iter().map(|&x| x * x).sum::<T>()).sqrt()
    }
}

pub fn skew_from_vec<T: Real>(v: &[T], n: usize) -> Result<Matrix<T>> {
    Ok(SkewParam::new(n, v.to_vec())?.matrix())
}

/// Strict upper triangle of a skew-symmetric matrix.
pub fn vec_from_skew<T: Real>(a: &Matrix<T>) -> Result<Vec<T>> {
    let n = a.require_square("vec_from_skew")?;
    let defect = a.skew_defect();
    if defect > T::lit(SKEW_TOLERANCE) * a.fro_norm() {
        return Err(Error::NotSkew {
            op: "vec_from_skew",
            asymmetry: defect.to_f64_lossy(),
        });
    }
    let mut v = Vec::with_capacity(skew_len(n));
    for i in 0..n {
        v.extend_from_slice(&a.row(i)[i + 1..]);
    }
    Ok(v)
}
