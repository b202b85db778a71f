//! Property suites behind the `verify` command. Each check prints one
//! `PASS`/`FAIL` line with the measured value and its threshold.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::expm::{
    cayley, dexp_adjoint, dexp_adjoint_series, dexp_series, expm, expm_frechet, PadeDegree,
};
use crate::liegroup::{
    coordinate_gradient, grad_pullback, retraction_step, rgd_step, skew_from_vec, skew_len,
    sphere_retraction, OrthoLayer, RetractionKind, SkewParam,
};
use crate::matcore::{jacobi_svd, Matrix};
use crate::optim::Optimizer;

const SEED: u64 = 5544;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scope {
    Expm,
    Gradients,
    Retractions,
    Geometry,
    All,
}

impl FromStr for Scope {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "expm" => Ok(Self::Expm),
            "gradients" => Ok(Self::Gradients),
            "retractions" => Ok(Self::Retractions),
            "geometry" => Ok(Self::Geometry),
            "all" => Ok(Self::All),
            other => Err(Error::InvalidArgument(format!(
                "unknown scope `{other}` (expected expm, gradients, retractions, geometry or all)"
            ))),
        }
    }
}

/// Outcome of one property check.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub suite: &'static str,
    pub name: &'static str,
    pub measured: f64,
    pub threshold: f64,
    /// `true` when `measured` must stay below the threshold, `false` when it
    /// must exceed it.
    pub upper: bool,
}

impl Check {
    fn below(suite: &'static str, name: &'static str, measured: f64, threshold: f64) -> Self {
        Self {
            suite,
            name,
            measured,
            threshold,
            upper: true,
        }
    }

    fn above(suite: &'static str, name: &'static str, measured: f64, threshold: f64) -> Self {
        Self {
            suite,
            name,
            measured,
            threshold,
            upper: false,
        }
    }

    pub fn passed(&self) -> bool {
        if self.upper {
            self.measured <= self.threshold
        } else {
            self.measured > self.threshold
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {}.{} measured={:.3e} {}={:.3e}",
            if self.passed() { "PASS" } else { "FAIL" },
            self.suite,
            self.name,
            self.measured,
            if self.upper { "max" } else { "min" },
            self.threshold
        )
    }
}

pub fn run(scope: Scope) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    if matches!(scope, Scope::Expm | Scope::All) {
        out.extend(expm_suite()?);
    }
    if matches!(scope, Scope::Gradients | Scope::All) {
        out.extend(gradients_suite()?);
    }
    if matches!(scope, Scope::Retractions | Scope::All) {
        out.extend(retractions_suite()?);
    }
    if matches!(scope, Scope::Geometry | Scope::All) {
        out.extend(geometry_suite()?);
    }
    Ok(out)
}

fn random_skew(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Matrix<f64> {
    let v: Vec<f64> = (0..skew_len(n))
        .map(|_| rng.random_range(-1.0..1.0))
        .collect();
    let a = skew_from_vec(&v, n).expect("length matches");
    let norm = a.fro_norm();
    if norm == 0.0 {
        a
    } else {
        a.scaled(scale / norm)
    }
}

fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix<f64> {
    Matrix::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0))
}

fn rel(diff: &Matrix<f64>, reference: &Matrix<f64>) -> f64 {
    diff.fro_norm() / reference.fro_norm().max(f64::MIN_POSITIVE)
}

fn expm_suite() -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let (mut ortho, mut det, mut inverse, mut squaring, mut cay) =
        (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for i in 0..40 {
        let n = 2 + i % 15;
        let scale = rng.random_range(0.1..50.0);
        let a = random_skew(&mut rng, n, scale);
        let b = expm(&a)?;
        let nf = n as f64;
        ortho = ortho.max(b.ortho_residual() / nf);
        det = det.max((b.det()? - 1.0).abs());
        let prod = b.mul_unchecked(&expm(&-&a)?);
        inverse = inverse.max((&prod - &Matrix::identity(n)).fro_norm() / nf);
        let half = expm(&a.scaled(0.5))?;
        squaring = squaring.max(rel(&(&half.mul_unchecked(&half) - &b), &b) / nf);
        cay = cay.max(cayley(&a)?.ortho_residual() / nf);
    }
    let slope = cayley_slope()?;
    Ok(vec![
        Check::below("expm", "orthogonality_per_n", ortho, 1e-12),
        Check::below("expm", "det_minus_one", det, 1e-9),
        Check::below("expm", "inverse_per_n", inverse, 1e-12),
        Check::below("expm", "squaring_per_n", squaring, 1e-12),
        Check::below("expm", "cayley_orthogonality_per_n", cay, 1e-13),
        Check::below(
            "expm",
            "cayley_order_slope_minus_3",
            (slope - 3.0).abs(),
            0.2,
        ),
    ])
}

/// Least-squares slope of `log ‖cayley(sA) − exp(sA)‖` against `log s`.
fn cayley_slope() -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 1);
    let a = random_skew(&mut rng, 4, 1.0);
    let pts: Vec<(f64, f64)> = (1..=6)
        .map(|k| {
            let s = 0.5f64.powi(k);
            let sa = a.scaled(s);
            let err = (&cayley(&sa)? - &expm(&sa)?).fro_norm();
            Ok((s.ln(), err.ln()))
        })
        .collect::<Result<_>>()?;
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Ok(sxy / sxx)
}

fn procrustes_value(b: &Matrix<f64>, m: &Matrix<f64>) -> f64 {
    m.inner(b).expect("same shape")
}

fn gradients_suite() -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 2);
    let h = 1e-5;
    let mut pull: f64 = 0.0;
    for _ in 0..10 {
        let n = rng.random_range(2..=6);
        let scale = rng.random_range(0.1..3.0);
        let a = random_skew(&mut rng, n, scale);
        let m = random_matrix(&mut rng, n, n);
        let grad = coordinate_gradient(&grad_pullback(&a, &m)?)?;
        let v = crate::liegroup::vec_from_skew(&a)?;
        for k in 0..v.len() {
            let mut vp = v.clone();
            vp[k] += h;
            let mut vm = v.clone();
            vm[k] -= h;
            let fp = procrustes_value(&expm(&skew_from_vec(&vp, n)?)?, &m);
            let fm = procrustes_value(&expm(&skew_from_vec(&vm, n)?)?, &m);
            let fd = (fp - fm) / (2.0 * h);
            pull = pull.max((fd - grad[k]).abs() / fd.abs().max(1.0));
        }
    }
    let (mut frechet_fd, mut series1, mut series10, mut adjoint, mut adj_series) =
        (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for i in 0..20 {
        let n = 3 + i % 3;
        let norm_target = if i % 2 == 0 { 1.0 } else { 10.0 };
        let a = random_skew(&mut rng, n, 1.0);
        let a = a.scaled(norm_target * rng.random_range(0.2..1.0) / a.one_norm());
        let e = random_matrix(&mut rng, n, n);
        let (_, l) = expm_frechet(&a, &e)?;
        let fd = (&expm(&(&a + &e.scaled(h)))? - &expm(&(&a - &e.scaled(h)))?).scaled(0.5 / h);
        frechet_fd = frechet_fd.max(rel(&(&fd - &l), &l));
        let s = dexp_series(&a, &e, 1e-16)?;
        let err = rel(&(&s - &l), &l);
        if norm_target <= 1.0 {
            series1 = series1.max(err);
        } else {
            series10 = series10.max(err);
        }
        let y = random_matrix(&mut rng, n, n);
        let lhs = l.inner(&y)?;
        let adj = dexp_adjoint(&a, &y)?;
        let rhs = e.inner(&adj)?;
        adjoint = adjoint.max((lhs - rhs).abs() / (e.fro_norm() * y.fro_norm()));
        let adj_s = dexp_adjoint_series(&a, &y, 1e-16)?;
        adj_series = adj_series.max(rel(&(&adj_s - &adj), &adj));
    }
    Ok(vec![
        Check::below("gradients", "pullback_vs_finite_differences", pull, 1e-6),
        Check::below(
            "gradients",
            "frechet_vs_finite_differences",
            frechet_fd,
            1e-6,
        ),
        Check::below("gradients", "block_vs_series_norm1", series1, 1e-10),
        Check::below("gradients", "block_vs_series_norm10", series10, 1e-8),
        Check::below("gradients", "adjoint_identity", adjoint, 1e-10),
        Check::below("gradients", "adjoint_block_vs_series", adj_series, 1e-10),
    ])
}

/// `max ‖(r(h) − r(−h)) / 2h + B skew(BᵀG)‖` over a few seeded points.
fn retraction_differential(kind: RetractionKind, rng: &mut ChaCha8Rng) -> Result<(f64, bool)> {
    let h = 1e-6;
    let mut worst: f64 = 0.0;
    let mut exact_at_zero = true;
    for _ in 0..5 {
        let n = rng.random_range(2..=5);
        let b = expm(&random_skew(rng, n, 2.0))?;
        let g = random_matrix(rng, n, n);
        exact_at_zero &= retraction_step(&b, &g, 0.0, kind)? == b;
        let plus = retraction_step(&b, &g, h, kind)?;
        let minus = retraction_step(&b, &-&g, h, kind)?;
        let fd = (&plus - &minus).scaled(0.5 / h);
        let want = -&b.mul_unchecked(&b.transpose().mul_unchecked(&g).skew_part());
        worst = worst.max((&fd - &want).fro_norm() / want.fro_norm().max(1.0));
    }
    Ok((worst, exact_at_zero))
}

fn retractions_suite() -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 3);
    let mut out = Vec::new();
    for (name, kind) in [
        ("cayley", RetractionKind::Cayley),
        ("pade_ss5", RetractionKind::PadeSs(PadeDegree::M5)),
        ("projection", RetractionKind::Projection),
    ] {
        let (err, exact) = retraction_differential(kind, &mut rng)?;
        out.push(Check::below("retractions", name, err, 1e-6));
        out.push(Check::below(
            "retractions",
            "zero_step_exact",
            if exact { 0.0 } else { 1.0 },
            0.0,
        ));
    }
    // sphere S³
    let h = 1e-6;
    let mut sphere: f64 = 0.0;
    let mut sphere_zero = true;
    for _ in 0..5 {
        let raw: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();
        let norm = raw.iter().map(|x| x * x).sum::<f64>().sqrt();
        let x: Vec<f64> = raw.iter().map(|r| r / norm).collect();
        let w: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();
        let d: f64 = x.iter().zip(&w).map(|(a, b)| a * b).sum();
        let v: Vec<f64> = w.iter().zip(&x).map(|(wi, xi)| wi - d * xi).collect();
        sphere_zero &= sphere_retraction(&x, &[0.0; 4])? == x;
        let vp: Vec<f64> = v.iter().map(|t| t * h).collect();
        let vm: Vec<f64> = v.iter().map(|t| -t * h).collect();
        let p = sphere_retraction(&x, &vp)?;
        let m = sphere_retraction(&x, &vm)?;
        for i in 0..4 {
            sphere = sphere.max(((p[i] - m[i]) / (2.0 * h) - v[i]).abs());
        }
    }
    out.push(Check::below("retractions", "sphere", sphere, 1e-6));
    out.push(Check::below(
        "retractions",
        "zero_step_exact",
        if sphere_zero { 0.0 } else { 1.0 },
        0.0,
    ));

    // drift over many steps
    let n = 6;
    let q = expm(&random_skew(&mut rng, n, 3.0))?;
    let mut b = Matrix::identity(n);
    let mut drift: f64 = 0.0;
    for _ in 0..1000 {
        let g = (&b - &q).scaled(2.0);
        b = rgd_step(&b, &g, 0.1 / n as f64)?;
        drift = drift.max(b.ortho_residual());
    }
    out.push(Check::below(
        "retractions",
        "rgd_drift_per_n",
        drift / n as f64,
        1e-11,
    ));
    Ok(out)
}

/// Matrix of `X ↦ L(a, X)` on the standard basis of all `n × n` matrices.
pub fn dexp_operator(a: &Matrix<f64>) -> Result<Matrix<f64>> {
    let n = a.require_square("dexp_operator")?;
    let mut op = Matrix::zeros(n * n, n * n);
    for k in 0..n * n {
        let mut e = Matrix::zeros(n, n);
        e.as_mut_slice()[k] = 1.0;
        let (_, l) = expm_frechet(a, &e)?;
        for (r, &v) in l.as_slice().iter().enumerate() {
            op.set(r, k, v);
        }
    }
    Ok(op)
}

/// Smallest singular value of the differential of `exp` at the so(3)
/// rotation generator of angle `theta` about the z-axis.
pub fn dexp_sigma_min(theta: f64) -> Result<f64> {
    let a = Matrix::from_rows(&[[0.0, theta, 0.0], [-theta, 0.0, 0.0], [0.0, 0.0, 0.0]]);
    let svd = jacobi_svd(&dexp_operator(&a)?)?;
    Ok(*svd.sigma.last().expect("nonempty"))
}

/// Largest `|⟨dexp_A X, dexp_A Y⟩ − ⟨X, Y⟩|` over `trials` seeded triples in
/// `so(n)`.
pub fn isometry_defect(n: usize, trials: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let scale = rng.random_range(0.5..3.0);
        let a = random_skew(&mut rng, n, scale);
        let x = random_skew(&mut rng, n, 1.0);
        let y = random_skew(&mut rng, n, 1.0);
        let dx = expm_frechet(&a, &x)?.1;
        let dy = expm_frechet(&a, &y)?.1;
        worst = worst.max((dx.inner(&dy)? - x.inner(&y)?).abs());
    }
    Ok(worst)
}

/// Distance between one exponential-parametrization SGD step and one
/// Riemannian gradient step on `f(B) = tr(MᵀB)` in `SO(2)`.
pub fn so2_step_gap(seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let scale = rng.random_range(0.1..3.0);
        let a = random_skew(&mut rng, 2, scale);
        let m = random_matrix(&mut rng, 2, 2);
        let eta = rng.random_range(0.01..0.5);
        let mut layer = OrthoLayer::new(SkewParam::from_matrix(&a)?);
        let b = layer.refresh()?.clone();
        let mut opt = Optimizer::sgd(1);
        layer.expparam_step(&m, eta, &mut opt)?;
        let after = layer.refresh()?.clone();
        let rgd = rgd_step(&b, &m, eta)?;
        worst = worst.max((&after - &rgd).fro_norm());
    }
    Ok(worst)
}

fn geometry_suite() -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 4);
    let mut ad_inv: f64 = 0.0;
    for _ in 0..10 {
        let q = expm(&random_skew(&mut rng, 5, 2.0))?;
        let x = random_matrix(&mut rng, 5, 5);
        let y = random_matrix(&mut rng, 5, 5);
        let conj = |m: &Matrix<f64>| q.mul_unchecked(m).mul_unchecked(&q.transpose());
        ad_inv = ad_inv.max((conj(&x).inner(&conj(&y))? - x.inner(&y)?).abs());
    }
    Ok(vec![
        Check::below("geometry", "ad_invariance", ad_inv, 1e-12),
        Check::below(
            "geometry",
            "so2_expparam_equals_rgd",
            so2_step_gap(SEED)?,
            1e-10,
        ),
        Check::below(
            "geometry",
            "so2_isometry",
            isometry_defect(2, 20, SEED)?,
            1e-10,
        ),
        Check::above(
            "geometry",
            "so3_not_isometry",
            isometry_defect(3, 100, SEED)?,
            1e-3,
        ),
        Check::below(
            "geometry",
            "dexp_sigma_min_at_pi",
            dexp_sigma_min(PI)?,
            1e-8,
        ),
        Check::above(
            "geometry",
            "dexp_sigma_min_at_half_pi",
            dexp_sigma_min(FRAC_PI_2)?,
            0.1,
        ),
    ])
}
