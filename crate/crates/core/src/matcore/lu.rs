use super::Matrix;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Smallest pivot magnitude accepted before a matrix is declared singular.
pub const PIVOT_FLOOR: f64 = 1e-300;

/// Partial-pivot LU factorization `P a = L U`, packed in one matrix
/// (unit lower triangle implicit).
#[derive(Debug, Clone)]
pub struct Lu<T> {
    lu: Matrix<T>,
    perm: Vec<usize>,
    sign: T,
}

pub fn lu_factor<T: Real>(a: &Matrix<T>) -> Result<Lu<T>> {
    let n = a.require_square("lu_factor")?;
    if n == 0 {
        return Err(Error::InvalidArgument(
            "lu_factor of an empty matrix".into(),
        ));
    }
    let floor = T::lit(PIVOT_FLOOR).max(T::min_positive_value());
    let mut lu = a.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut sign = T::one();

    for col in 0..n {
        let mut piv = col;
        let mut best = lu.get(col, col).abs();
        for r in col + 1..n {
            let v = lu.get(r, col).abs();
            if v > best {
                best = v;
                piv = r;
            }
        }
        if !(best >= floor) {
            return Err(Error::Singular {
                pivot: best.to_f64_lossy(),
                column: col,
            });
        }
        if piv != col {
            let data = lu.as_mut_slice();
            for j in 0..n {
                data.swap(col * n + j, piv * n + j);
            }
            perm.swap(col, piv);
            sign = -sign;
        }
        let pivot = lu.get(col, col);
        for r in col + 1..n {
            let factor = lu.get(r, col) / pivot;
            lu.set(r, col, factor);
            if factor != T::zero() {
                let data = lu.as_mut_slice();
                let (top, bottom) = data.split_at_mut(r * n);
                let src = &top[col * n + col + 1..col * n + n];
                let dst = &mut bottom[col + 1..n];
                for (d, &s) in dst.iter_mut().zip(src) {
                    *d -= factor * s;
                }
            }
        }
    }
    Ok(Lu { lu, perm, sign })
}

impl<T: Real> Lu<T> {
    pub fn dim(&self) -> usize {
        self.lu.rows()
    }

    /// Packed factors: strict lower triangle holds `L`, upper triangle `U`.
    pub fn factors(&self) -> &Matrix<T> {
        &self.lu
    }

    /// Row permutation: row `i` of `P a` is row `perm[i]` of `a`.
    pub fn permutation(&self) -> &[usize] {
        &self.perm
    }

    pub fn det(&self) -> T {
        let mut d = self.sign;
        for i in 0..self.dim() {
            d *= self.lu.get(i, i);
        }
        d
    }

    /// Solves `a x = b` for a matrix of right-hand sides.
    pub fn solve(&self, b: &Matrix<T>) -> Result<Matrix<T>> {
        let n = self.dim();
        if b.rows() != n {
            return Err(Error::mismatch("lu_solve", (n, n), b.shape()));
        }
        let m = b.cols();
        let mut x = Matrix::zeros(n, m);
        for i in 0..n {
            x.row_mut(i).copy_from_slice(b.row(self.perm[i]));
        }
        let xd = x.as_mut_slice();
        // forward substitution with unit L
        for i in 0..n {
            let (done, rest) = xd.split_at_mut(i * m);
            let xi = &mut rest[..m];
            for k in 0..i {
                let l = self.lu.get(i, k);
                if l != T::zero() {
                    let xk = &done[k * m..(k + 1) * m];
                    for (a, &b) in xi.iter_mut().zip(xk) {
                        *a -= l * b;
                    }
                }
            }
        }
        // back substitution with U
        for i in (0..n).rev() {
            let (head, tail) = xd.split_at_mut((i + 1) * m);
            let xi = &mut head[i * m..];
            for k in i + 1..n {
                let u = self.lu.get(i, k);
                if u != T::zero() {
                    let xk = &tail[(k - i - 1) * m..(k - i) * m];
                    for (a, &b) in xi.iter_mut().zip(xk) {
                        *a -= u * b;
                    }
                }
            }
            let d = self.lu.get(i, i);
            xi.iter_mut().for_each(|v| *v /= d);
        }
        Ok(x)
    }

    pub fn solve_vec(&self, b: &[T]) -> Result<Vec<T>> {
        let col = Matrix::from_vec(b.len(), 1, b.to_vec())?;
        Ok(self.solve(&col)?.into_vec())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn determinant_of_simple_matrices() {
        assert_eq!(Matrix::<f64>::identity(4).det().unwrap(), 1.0);
        assert_eq!(Matrix::from_diag(&[2.0, 3.0]).det().unwrap(), 6.0);
        let swap = Matrix::from_rows(&[[0.0, 1.0], [1.0, 0.0]]);
        assert_eq!(swap.det().unwrap(), -1.0);
    }

    #[test]
    fn singular_matrix_is_reported() {
        let a = Matrix::from_rows(&[[1.0, 2.0], [2.0, 4.0]]);
        assert!(matches!(
            lu_factor(&a),
            Err(Error::Singular { column: 1, .. })
        ));
        assert_eq!(a.det().unwrap(), 0.0);
    }

    #[test]
    fn solves_small_system() {
        let a = Matrix::<f64>::from_rows(&[[2.0, 1.0, 0.0], [1.0, 3.0, 1.0], [0.0, 1.0, 4.0]]);
        let x = [1.0, -2.0, 0.5];
        let b = a.matvec(&x).unwrap();
        let got = lu_factor(&a).unwrap().solve_vec(&b).unwrap();
        for (g, e) in got.iter().zip(x) {
            assert!((g - e).abs() < 1e-14);
        }
    }

    #[test]
    fn rejects_non_square() {
        assert!(matches!(
            lu_factor(&Matrix::<f64>::zeros(2, 3)),
            Err(Error::NotSquare { .. })
        ));
    }
}
