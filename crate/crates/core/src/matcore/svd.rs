use super::Matrix;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Largest matrix the Jacobi kernel accepts.
pub const SVD_MAX_DIM: usize = 512;
/// Sweeps over all column pairs before giving up.
pub const SVD_MAX_SWEEPS: usize = 60;

/// `a = u * diag(sigma) * vᵀ`, singular values descending.
#[derive(Debug, Clone)]
pub struct Svd<T> {
    pub u: Matrix<T>,
    pub sigma: Vec<T>,
    pub v: Matrix<T>,
}

impl<T: Real> Svd<T> {
    pub fn reconstruct(&self) -> Matrix<T> {
        let us = Matrix::from_fn(self.u.rows(), self.u.cols(), |i, j| {
            self.u.get(i, j) * self.sigma[j]
        });
        us.mul_unchecked(&self.v.transpose())
    }
}

/// One-sided (Hestenes) Jacobi SVD of a square matrix.
///
/// Columns of `a` are rotated pairwise until mutually orthogonal; the
/// accumulated rotations form `v`, the column norms are the singular values
/// and the normalized columns form `u`.
pub fn jacobi_svd<T: Real>(a: &Matrix<T>) -> Result<Svd<T>> {
    let n = a.require_square("jacobi_svd")?;
    if n == 0 || n > SVD_MAX_DIM {
        return Err(Error::InvalidArgument(format!(
            "jacobi_svd supports 1 <= n <= {SVD_MAX_DIM}, got {n}"
        )));
    }
    if !a.is_finite() {
        return Err(Error::NonFinite { op: "jacobi_svd" });
    }

    // Rows of `w` are the columns of `a`; rows of `vt` the columns of `v`.
    let mut w = a.transpose();
    let mut vt = Matrix::<T>::identity(n);
    let eps = T::epsilon();
    let mut converged = false;
    let mut worst = T::zero();

    for _sweep in 0..SVD_MAX_SWEEPS {
        worst = T::zero();
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let (alpha, beta, gamma) = {
                    let wp = w.row(p);
                    let wq = w.row(q);
                    let mut alpha = T::zero();
                    let mut beta = T::zero();
                    let mut gamma = T::zero();
                    for (&x, &y) in wp.iter().zip(wq) {
                        alpha += x * x;
                        beta += y * y;
                        gamma += x * y;
                    }
                    (alpha, beta, gamma)
                };
                if gamma == T::zero() {
                    continue;
                }
                let scale = (alpha * beta).sqrt();
                let rel = gamma.abs() / scale;
                if rel > worst {
                    worst = rel;
                }
                if gamma.abs() <= eps * scale {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (T::lit(2.0) * gamma);
                let t = zeta.signum() / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = c * t;
                rotate_rows(&mut w, p, q, c, s);
                rotate_rows(&mut vt, p, q, c, s);
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::SvdNoConvergence {
            sweeps: SVD_MAX_SWEEPS,
            residual: worst.to_f64_lossy(),
        });
    }

    let norms: Vec<T> = (0..n)
        .map(|i| w.row(i).iter().map(|&x| x * x).sum::<T>().sqrt())
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        norms[j]
            .partial_cmp(&norms[i])
            .unwrap_or(std::cmp::Ordering::Equal)
    });

    let tiny = norms[order[0]] * T::epsilon() * T::lit(n as f64);
    let mut u_cols: Vec<Vec<T>> = Vec::with_capacity(n);
    let mut sigma = Vec::with_capacity(n);
    let mut v = Matrix::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        let s = norms[i];
        sigma.push(s);
        for r in 0..n {
            v.set(r, k, vt.get(i, r));
        }
        if s > tiny && s > T::zero() {
            u_cols.push(w.row(i).iter().map(|&x| x / s).collect());
        } else {
            u_cols.push(Vec::new());
        }
    }
    complete_basis(&mut u_cols, n);

    let u = Matrix::from_fn(n, n, |r, c| u_cols[c][r]);
    Ok(Svd { u, sigma, v })
}

fn rotate_rows<T: Real>(m: &mut Matrix<T>, p: usize, q: usize, c: T, s: T) {
    let n = m.cols();
    let data = m.as_mut_slice();
    let (head, tail) = data.split_at_mut(q * n);
    let rp = &mut head[p * n..(p + 1) * n];
    let rq = &mut tail[..n];
    for (x, y) in rp.iter_mut().zip(rq.iter_mut()) {
        let xp = *x;
        let yq = *y;
        *x = c * xp - s * yq;
        *y = s * xp + c * yq;
    }
}

/// Fills empty columns (zero singular values) with unit vectors orthogonal
/// to everything already present, via twice-applied Gram-Schmidt against the
/// standard basis.
fn complete_basis<T: Real>(cols: &mut [Vec<T>], n: usize) {
    let mut candidate = 0;
    for k in 0..n {
        if !cols[k].is_empty() {
            continue;
        }
        loop {
            assert!(candidate < n, "basis completion ran out of candidates");
            let mut e = vec![T::zero(); n];
            e[candidate] = T::one();
            candidate += 1;
            for _ in 0..2 {
                for c in cols.iter().filter(|c| !c.is_empty()) {
                    let d: T = c.iter().zip(&e).map(|(&a, &b)| a * b).sum();
                    for (x, &y) in e.iter_mut().zip(c) {
                        *x -= d * y;
                    }
                }
            }
            let norm = e.iter().map(|&x| x * x).sum::<T>().sqrt();
            if norm > T::lit(0.5) {
                cols[k] = e.into_iter().map(|x| x / norm).collect();
                break;
            }
        }
    }
}
