//! Matrix exponential and its derivatives.
//!
//! [`expm`] is the scaling-and-squaring Padé algorithm: the smallest diagonal
//! Padé degree whose 1-norm threshold covers the input is used directly,
//! otherwise the matrix is scaled by `2^-s` into the degree-13 region and the
//! result squared `s` times.
//!
//! The Fréchet derivative `L(A, E) = d/dt exp(A + tE)|_0` is obtained from the
//! top-right block of `exp([[A, E], [0, A]])` ([`expm_frechet`]). The
//! commutator series [`dexp_series`] and [`dexp_adjoint_series`] evaluate the
//! same maps independently and serve as cross-checks.

use crate::error::{Error, Result};
use crate::matcore::{lu_factor, Matrix};
use crate::scalar::Real;

/// 1-norm bounds below which the degree-`m` diagonal Padé approximant is
/// accurate to double precision unit roundoff (Higham, "The scaling and
/// squaring method for the matrix exponential revisited", SIAM J. Matrix
/// Anal. Appl. 26(4), 2005, Table 2.3).
pub const THETA_3: f64 = 1.495_585_217_958_292e-2;
pub const THETA_5: f64 = 2.539_398_330_063_230e-1;
pub const THETA_7: f64 = 9.504_178_996_162_932e-1;
pub const THETA_9: f64 = 2.097_847_961_257_068e0;
pub const THETA_13: f64 = 5.371_920_351_148_152e0;

/// Norm bound used by [`pade_ss`]: scale until `‖A‖ / 2^s < 1/2`.
pub const PADE_SS_THRESHOLD: f64 = 0.5;

/// Largest input 1-norm accepted by the commutator series.
pub const SERIES_NORM_GUARD: f64 = 20.0;
/// Terms summed before the commutator series gives up.
pub const SERIES_MAX_TERMS: usize = 300;

/// Degree of a diagonal Padé approximant of `exp`.
///
/// The scaling-and-squaring schedule uses 3, 5, 7, 9 and 13; degree 1 is the
/// Cayley map and is accepted so the two can be compared directly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PadeDegree(u8);

impl PadeDegree {
    pub const CAYLEY: PadeDegree = PadeDegree(1);
    pub const M3: PadeDegree = PadeDegree(3);
    pub const M5: PadeDegree = PadeDegree(5);
    pub const M7: PadeDegree = PadeDegree(7);
    pub const M9: PadeDegree = PadeDegree(9);
    pub const M13: PadeDegree = PadeDegree(13);

    /// Degrees used by [`expm`], with their norm thresholds.
    pub const SCHEDULE: [(PadeDegree, f64); 5] = [
        (Self::M3, THETA_3),
        (Self::M5, THETA_5),
        (Self::M7, THETA_7),
        (Self::M9, THETA_9),
        (Self::M13, THETA_13),
    ];

    pub fn new(m: u32) -> Result<Self> {
        match m {
            1 | 3 | 5 | 7 | 9 | 13 => Ok(PadeDegree(m as u8)),
            _ => Err(Error::InvalidArgument(format!(
                "Padé degree must be one of 1, 3, 5, 7, 9, 13; got {m}"
            ))),
        }
    }

    pub fn get(self) -> usize {
        self.0 as usize
    }

    /// `c_0 = 1`, `c_k = c_{k-1} (m + 1 - k) / ((2m + 1 - k) k)`.
    pub fn coefficients(self) -> Vec<f64> {
        let m = self.get();
        let mut c = Vec::with_capacity(m + 1);
        c.push(1.0);
        for k in 1..=m {
            let prev = c[k - 1];
            c.push(prev * (m + 1 - k) as f64 / (((2 * m + 1 - k) * k) as f64));
        }
        c
    }
}

/// What the Padé evaluation needs from its argument: products, linear
/// combinations and the final solve. Implemented for plain matrices and for
/// block upper-triangular pairs `[[x, y], [0, x]]`.
trait PadeOperand<T: Real>: Sized {
    fn identity_like(&self) -> Self;
    fn product(&self, other: &Self) -> Self;
    fn lincomb(terms: &[(T, &Self)]) -> Self;
    fn sum(&self, other: &Self) -> Self;
    fn diff(&self, other: &Self) -> Self;
    /// `q^-1 p`.
    fn solve(q: &Self, p: &Self) -> Result<Self>;
    fn norm1(&self) -> f64;
    fn scaled_by(&self, s: T) -> Self;
}

impl<T: Real> PadeOperand<T> for Matrix<T> {
    fn identity_like(&self) -> Self {
        Matrix::identity(self.rows())
    }

    fn product(&self, other: &Self) -> Self {
        self.mul_unchecked(other)
    }

    fn lincomb(terms: &[(T, &Self)]) -> Self {
        let (r, c) = terms[0].1.shape();
        let mut out = Matrix::zeros(r, c);
        for (coef, m) in terms {
            out.axpy(*coef, m);
        }
        out
    }

    fn sum(&self, other: &Self) -> Self {
        self + other
    }

    fn diff(&self, other: &Self) -> Self {
        self - other
    }

    fn solve(q: &Self, p: &Self) -> Result<Self> {
        lu_factor(q)?.solve(p)
    }

    fn norm1(&self) -> f64 {
        self.one_norm().to_f64_lossy()
    }

    fn scaled_by(&self, s: T) -> Self {
        self.scaled(s)
    }
}

/// The block matrix `[[x, y], [0, x]]`, closed under the operations of the
/// Padé evaluation. Products cost three `n × n` multiplications instead of
/// the eight of the dense `2n × 2n` form.
struct BlockPair<T> {
    x: Matrix<T>,
    y: Matrix<T>,
}

impl<T: Real> PadeOperand<T> for BlockPair<T> {
    fn identity_like(&self) -> Self {
        let n = self.x.rows();
        BlockPair {
            x: Matrix::identity(n),
            y: Matrix::zeros(n, n),
        }
    }

    fn product(&self, other: &Self) -> Self {
        let mut y = self.x.mul_unchecked(&other.y);
        y += &self.y.mul_unchecked(&other.x);
        BlockPair {
            x: self.x.mul_unchecked(&other.x),
            y,
        }
    }

    fn lincomb(terms: &[(T, &Self)]) -> Self {
        let xs: Vec<(T, &Matrix<T>)> = terms.iter().map(|(c, b)| (*c, &b.x)).collect();
        let ys: Vec<(T, &Matrix<T>)> = terms.iter().map(|(c, b)| (*c, &b.y)).collect();
        BlockPair {
            x: Matrix::lincomb(&xs),
            y: Matrix::lincomb(&ys),
        }
    }

    fn sum(&self, other: &Self) -> Self {
        BlockPair {
            x: &self.x + &other.x,
            y: &self.y + &other.y,
        }
    }

    fn diff(&self, other: &Self) -> Self {
        BlockPair {
            x: &self.x - &other.x,
            y: &self.y - &other.y,
        }
    }

    fn solve(q: &Self, p: &Self) -> Result<Self> {
        // [[qx, qy], [0, qx]]^-1 [[px, py], [0, px]]
        let lu = lu_factor(&q.x)?;
        let x = lu.solve(&p.x)?;
        let rhs = &p.y - &q.y.mul_unchecked(&x);
        Ok(BlockPair {
            y: lu.solve(&rhs)?,
            x,
        })
    }

    /// 1-norm of the full block matrix; the right-hand columns dominate.
    fn norm1(&self) -> f64 {
        let n = self.x.rows();
        let mut best = T::zero();
        for j in 0..n {
            let mut s = T::zero();
            for i in 0..n {
                s += self.x.get(i, j).abs() + self.y.get(i, j).abs();
            }
            if s > best || s.is_nan() {
                best = s;
            }
        }
        best.to_f64_lossy()
    }

    fn scaled_by(&self, s: T) -> Self {
        BlockPair {
            x: self.x.scaled(s),
            y: self.y.scaled(s),
        }
    }
}

/// Diagonal Padé approximant `p_m(a) q_m(a)^-1` with no scaling.
pub fn pade<T: Real>(a: &Matrix<T>, m: PadeDegree) -> Result<Matrix<T>> {
    a.require_square("pade")?;
    pade_eval(a, m)
}

fn pade_eval<T: Real, M: PadeOperand<T>>(a: &M, m: PadeDegree) -> Result<M> {
    let c: Vec<T> = m.coefficients().into_iter().map(T::lit).collect();
    let ident = a.identity_like();

    let (u, v) = if m == PadeDegree::M13 {
        let a2 = a.product(a);
        let a4 = a2.product(&a2);
        let a6 = a2.product(&a4);
        let inner_u = M::lincomb(&[(c[13], &a6), (c[11], &a4), (c[9], &a2)])
            .product(&a6)
            .sum(&M::lincomb(&[
                (c[7], &a6),
                (c[5], &a4),
                (c[3], &a2),
                (c[1], &ident),
            ]));
        let u = a.product(&inner_u);
        let v = M::lincomb(&[(c[12], &a6), (c[10], &a4), (c[8], &a2)])
            .product(&a6)
            .sum(&M::lincomb(&[
                (c[6], &a6),
                (c[4], &a4),
                (c[2], &a2),
                (c[0], &ident),
            ]));
        (u, v)
    } else {
        // even powers a^0, a^2, ..., a^(m-1)
        let half = m.get() / 2;
        let mut powers = vec![ident];
        if half >= 1 {
            powers.push(a.product(a));
            for j in 2..=half {
                let next = powers[j - 1].product(&powers[1]);
                powers.push(next);
            }
        }
        let odd: Vec<(T, &M)> = (0..=half).map(|j| (c[2 * j + 1], &powers[j])).collect();
        let even: Vec<(T, &M)> = (0..=half).map(|j| (c[2 * j], &powers[j])).collect();
        (a.product(&M::lincomb(&odd)), M::lincomb(&even))
    };

    M::solve(&v.diff(&u), &v.sum(&u))
}

fn square_times<T: Real, M: PadeOperand<T>>(mut x: M, s: u32) -> M {
    for _ in 0..s {
        x = x.product(&x);
    }
    x
}

/// Number of halvings needed to bring `norm` below `threshold`.
fn halvings(norm: f64, threshold: f64) -> u32 {
    if norm <= threshold {
        0
    } else {
        (norm / threshold).log2().ceil().max(0.0) as u32
    }
}

/// Matrix exponential by scaling and squaring with diagonal Padé approximants.
pub fn expm<T: Real>(a: &Matrix<T>) -> Result<Matrix<T>> {
    a.require_square("expm")?;
    if !a.is_finite() {
        return Err(Error::NonFinite { op: "expm" });
    }
    scaling_and_squaring(a)
}

fn scaling_and_squaring<T: Real, M: PadeOperand<T>>(a: &M) -> Result<M> {
    let norm = a.norm1();
    for (m, theta) in &PadeDegree::SCHEDULE[..4] {
        if norm <= *theta {
            return pade_eval(a, *m);
        }
    }
    let s = halvings(norm, THETA_13);
    let scaled = a.scaled_by(T::lit(0.5f64.powi(s as i32)));
    Ok(square_times(pade_eval(&scaled, PadeDegree::M13)?, s))
}

/// Fixed-degree Padé approximant combined with scaling and squaring: the
/// input is halved until its 1-norm is below [`PADE_SS_THRESHOLD`].
pub fn pade_ss<T: Real>(a: &Matrix<T>, m: PadeDegree) -> Result<Matrix<T>> {
    a.require_square("pade_ss")?;
    if !a.is_finite() {
        return Err(Error::NonFinite { op: "pade_ss" });
    }
    let norm = a.one_norm().to_f64_lossy();
    let s = if norm < PADE_SS_THRESHOLD {
        0
    } else {
        // first s with norm / 2^s < 1/2
        let mut s = halvings(norm, PADE_SS_THRESHOLD);
        while norm / 2f64.powi(s as i32) >= PADE_SS_THRESHOLD {
            s += 1;
        }
        s
    };
    let scaled = a.scaled(T::lit(0.5f64.powi(s as i32)));
    Ok(square_times(pade(&scaled, m)?, s))
}

/// Cayley transform `(I + a/2)(I - a/2)^-1`.
pub fn cayley<T: Real>(a: &Matrix<T>) -> Result<Matrix<T>> {
    let n = a.require_square("cayley")?;
    let half = a.scaled(T::lit(0.5));
    let ident = Matrix::<T>::identity(n);
    let num = &ident + &half;
    let den = &ident - &half;
    // num and den commute, so the left solve equals the right one.
    lu_factor(&den)?.solve(&num)
}

/// Returns `(exp(a), L(a, e))` where `L` is the Fréchet derivative of the
/// exponential at `a` in direction `e`, read off the block exponential
/// `exp([[a, e], [0, a]]) = [[exp(a), L(a, e)], [0, exp(a)]]`.
///
/// The block matrix goes through the same scaling-and-squaring schedule as
/// [`expm`] (degree and squarings chosen from its 1-norm), with every product
/// and solve carried out on the `n × n` blocks.
pub fn expm_frechet<T: Real>(a: &Matrix<T>, e: &Matrix<T>) -> Result<(Matrix<T>, Matrix<T>)> {
    a.require_square("expm_frechet")?;
    if e.shape() != a.shape() {
        return Err(Error::mismatch("expm_frechet", a.shape(), e.shape()));
    }
    if !a.is_finite() || !e.is_finite() {
        return Err(Error::NonFinite { op: "expm_frechet" });
    }
    let block = BlockPair {
        x: a.clone(),
        y: e.clone(),
    };
    let out = scaling_and_squaring(&block)?;
    Ok((out.x, out.y))
}

/// Commutator `[a, y] = a y - y a`.
pub fn ad<T: Real>(a: &Matrix<T>, y: &Matrix<T>) -> Matrix<T> {
    &a.mul_unchecked(y) - &y.mul_unchecked(a)
}

/// Sums `Σ_k (sign · ad_a)^k / (k+1)! (y)` until a term drops below
/// `tol · ‖sum‖`.
fn phi_series<T: Real>(a: &Matrix<T>, y: &Matrix<T>, tol: T, sign: T) -> Result<Matrix<T>> {
    if a.one_norm().to_f64_lossy() > SERIES_NORM_GUARD {
        return Err(Error::InvalidArgument(format!(
            "commutator series needs ‖a‖₁ <= {SERIES_NORM_GUARD}, got {}",
            a.one_norm()
        )));
    }
    let mut sum = y.clone();
    let mut term = y.clone();
    for k in 1..SERIES_MAX_TERMS {
        term = ad(a, &term).scaled(sign / T::lit((k + 1) as f64));
        sum += &term;
        let t = term.fro_norm();
        if t == T::zero() || t < tol * sum.fro_norm() {
            return Ok(sum);
        }
    }
    Err(Error::SeriesNotConverged {
        terms: SERIES_MAX_TERMS,
    })
}

/// Differential of `exp` at `a` applied to `y`, from the commutator series
/// `exp(a) Σ_k (-ad_a)^k / (k+1)! (y)`.
pub fn dexp_series<T: Real>(a: &Matrix<T>, y: &Matrix<T>, tol: T) -> Result<Matrix<T>> {
    a.require_square("dexp_series")?;
    if y.shape() != a.shape() {
        return Err(Error::mismatch("dexp_series", a.shape(), y.shape()));
    }
    let sum = phi_series(a, y, tol, -T::one())?;
    Ok(expm(a)?.mul_unchecked(&sum))
}

fn require_skew<T: Real>(op: &'static str, a: &Matrix<T>) -> Result<()> {
    a.require_square(op)?;
    let defect = a.skew_defect();
    if defect > T::lit(SKEW_TOLERANCE) * a.fro_norm() {
        return Err(Error::NotSkew {
            op,
            asymmetry: defect.to_f64_lossy(),
        });
    }
    Ok(())
}

/// Relative tolerance on `‖a + aᵀ‖_F / ‖a‖_F` for inputs that must be skew.
pub const SKEW_TOLERANCE: f64 = 1e-10;

/// Adjoint of the differential of `exp` at a skew `a` with respect to
/// `⟨X, Y⟩ = tr(XᵀY)`: `Σ_k ad_a^k / (k+1)! (exp(-a) g)`.
///
/// Evaluated as the Fréchet derivative at `aᵀ = -a`, since `L(a, ·)* = L(aᵀ, ·)`.
pub fn dexp_adjoint<T: Real>(a: &Matrix<T>, g: &Matrix<T>) -> Result<Matrix<T>> {
    require_skew("dexp_adjoint", a)?;
    if g.shape() != a.shape() {
        return Err(Error::mismatch("dexp_adjoint", a.shape(), g.shape()));
    }
    Ok(expm_frechet(&a.transpose(), g)?.1)
}

/// [`dexp_adjoint`] through the commutator series instead of the block
/// exponential.
pub fn dexp_adjoint_series<T: Real>(a: &Matrix<T>, g: &Matrix<T>, tol: T) -> Result<Matrix<T>> {
    require_skew("dexp_adjoint_series", a)?;
    if g.shape() != a.shape() {
        return Err(Error::mismatch("dexp_adjoint_series", a.shape(), g.shape()));
    }
    let pulled = expm(&-a)?.mul_unchecked(g);
    phi_series(a, &pulled, tol, T::one())
}
