//! Reference implementations used as test oracles. Everything here works on
//! plain row-major `Vec<f64>` with textbook loops and shares no code with
//! the library.

#![allow(dead_code)]

use exprnn::exprnn::{cross_entropy, Activation, Readout, RnnModel, SequenceBatch};
use exprnn::liegroup::{coordinate_gradient, vec_from_skew, SkewParam};
use exprnn::matcore::Matrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix<f64> {
    Matrix::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0))
}

/// Random skew matrix scaled to Frobenius norm `norm`.
pub fn random_skew(rng: &mut ChaCha8Rng, n: usize, norm: f64) -> Matrix<f64> {
    let mut a = Matrix::zeros(n, n);
    for i in 0..n {
        for j in i + 1..n {
            let v: f64 = rng.random_range(-1.0..1.0);
            a.set(i, j, v);
            a.set(j, i, -v);
        }
    }
    let f = fro(a.as_slice());
    if f > 0.0 {
        a = Matrix::from_fn(n, n, |i, j| a.get(i, j) * norm / f);
    }
    a
}

pub fn fro(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn diff_fro(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

pub fn rel_diff(got: &[f64], want: &[f64]) -> f64 {
    diff_fro(got, want) / fro(want).max(f64::MIN_POSITIVE)
}

/// `a (m×k) * b (k×n)`, ascending-k accumulation from zero.
pub fn naive_matmul(a: &[f64], b: &[f64], m: usize, k: usize, n: usize) -> Vec<f64> {
    let mut c = vec![0.0; m * n];
    for i in 0..m {
        for j in 0..n {
            let mut s = 0.0;
            for p in 0..k {
                s += a[i * k + p] * b[p * n + j];
            }
            c[i * n + j] = s;
        }
    }
    c
}

pub fn identity(n: usize) -> Vec<f64> {
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    v
}

pub fn transpose(a: &[f64], n: usize) -> Vec<f64> {
    let mut t = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            t[j * n + i] = a[i * n + j];
        }
    }
    t
}

pub fn one_norm(a: &[f64], n: usize) -> f64 {
    (0..n)
        .map(|j| (0..n).map(|i| a[i * n + j].abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Laplace expansion along the first row.
pub fn cofactor_det(a: &[f64], n: usize) -> f64 {
    if n == 1 {
        return a[0];
    }
    let mut det = 0.0;
    for col in 0..n {
        let mut minor = Vec::with_capacity((n - 1) * (n - 1));
        for r in 1..n {
            for c in 0..n {
                if c != col {
                    minor.push(a[r * n + c]);
                }
            }
        }
        let sign = if col % 2 == 0 { 1.0 } else { -1.0 };
        det += sign * a[col] * cofactor_det(&minor, n - 1);
    }
    det
}

/// Taylor polynomial of `exp` with `terms` terms, Horner form
/// `I + A(I + A/2(I + A/3(...)))`.
pub fn taylor_horner(a: &[f64], n: usize, terms: usize) -> Vec<f64> {
    let id = identity(n);
    let mut acc = id.clone();
    for k in (1..terms).rev() {
        let prod = naive_matmul(a, &acc, n, n, n);
        acc = id
            .iter()
            .zip(&prod)
            .map(|(i, p)| i + p / k as f64)
            .collect();
    }
    acc
}

/// `exp(a)`: scale until `‖a / 2^s‖₁ <= 0.25`, Taylor, square back.
pub fn scaled_taylor_expm(a: &[f64], n: usize, terms: usize) -> Vec<f64> {
    let mut s = 0;
    while one_norm(a, n) / 2f64.powi(s) > 0.25 {
        s += 1;
    }
    let scaled: Vec<f64> = a.iter().map(|x| x / 2f64.powi(s)).collect();
    let mut e = taylor_horner(&scaled, n, terms);
    for _ in 0..s {
        e = naive_matmul(&e, &e, n, n, n);
    }
    e
}

/// Eigenvalues of a symmetric 3×3 matrix from its characteristic cubic,
/// descending.
pub fn symmetric_cubic_eigenvalues(s: &[f64]) -> [f64; 3] {
    let tr = s[0] + s[4] + s[8];
    let c2 = s[0] * s[4] - s[1] * s[3] + s[0] * s[8] - s[2] * s[6] + s[4] * s[8] - s[5] * s[7];
    let det = cofactor_det(s, 3);
    // λ³ − tr λ² + c2 λ − det = 0; depress with λ = t + tr/3
    let shift = tr / 3.0;
    let p = c2 - tr * tr / 3.0;
    let q = -2.0 * tr.powi(3) / 27.0 + tr * c2 / 3.0 - det;
    // t³ + p t + q = 0 with three real roots (p <= 0)
    let m = 2.0 * (-p / 3.0).max(0.0).sqrt();
    let mut roots = if m == 0.0 {
        [shift; 3]
    } else {
        let arg = (3.0 * q / (p * m)).clamp(-1.0, 1.0);
        let theta = arg.acos() / 3.0;
        let two_pi_3 = 2.0 * std::f64::consts::PI / 3.0;
        [
            shift + m * theta.cos(),
            shift + m * (theta - two_pi_3).cos(),
            shift + m * (theta - 2.0 * two_pi_3).cos(),
        ]
    };
    roots.sort_by(|a, b| b.partial_cmp(a).unwrap());
    roots
}

/// Composite Simpson rule with `intervals` (even) subintervals.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, intervals: usize) -> f64 {
    assert!(intervals % 2 == 0);
    let h = (b - a) / intervals as f64;
    let mut s = f(a) + f(b);
    for i in 1..intervals {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

/// Central difference `(f(x + h e_k) − f(x − h e_k)) / 2h` for every `k`.
pub fn central_gradient(x: &[f64], h: f64, mut f: impl FnMut(&[f64]) -> f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(x.len());
    let mut probe = x.to_vec();
    for k in 0..x.len() {
        probe[k] = x[k] + h;
        let fp = f(&probe);
        probe[k] = x[k] - h;
        let fm = f(&probe);
        probe[k] = x[k];
        out.push((fp - fm) / (2.0 * h));
    }
    out
}

/// Skew matrix from strictly-upper-triangular entries, row-major.
pub fn skew_oracle(v: &[f64], n: usize) -> Matrix<f64> {
    let mut a = Matrix::zeros(n, n);
    let mut k = 0;
    for i in 0..n {
        for j in i + 1..n {
            a.set(i, j, v[k]);
            a.set(j, i, -v[k]);
            k += 1;
        }
    }
    a
}

/// Objective of `B` with its Euclidean gradient, written out by hand.
pub enum Objective {
    Linear(Matrix<f64>),
    Procrustes(Matrix<f64>),
    Cubic(Matrix<f64>),
}

impl Objective {
    pub fn value(&self, b: &Matrix<f64>) -> f64 {
        match self {
            Self::Linear(m) => m.inner(b).unwrap(),
            Self::Procrustes(q) => {
                let d = b - q;
                d.inner(&d).unwrap()
            }
            Self::Cubic(c) => b
                .as_slice()
                .iter()
                .zip(c.as_slice())
                .map(|(x, w)| w * x * x * x)
                .sum(),
        }
    }

    pub fn grad(&self, b: &Matrix<f64>) -> Matrix<f64> {
        match self {
            Self::Linear(m) => m.clone(),
            Self::Procrustes(q) => (b - q).scaled(2.0),
            Self::Cubic(c) => Matrix::from_fn(b.rows(), b.cols(), |i, j| {
                3.0 * c.get(i, j) * b.get(i, j) * b.get(i, j)
            }),
        }
    }
}

pub const P: usize = 6;
pub const D: usize = 3;
pub const C: usize = 5;
pub const LEN: usize = 8;
pub const BATCH: usize = 4;

pub fn fixture(readout: Readout, seed: u64) -> (RnnModel, SequenceBatch, Vec<Vec<usize>>) {
    let mut r = rng(seed);
    let a = random_skew(&mut r, P, 2.0);
    let model = RnnModel::from_parts(
        SkewParam::from_matrix(&a).unwrap(),
        random_matrix(&mut r, P, D),
        (0..P).map(|_| r.random_range(-0.3..0.3)).collect(),
        random_matrix(&mut r, C, P),
        (0..C).map(|_| r.random_range(-0.5..0.5)).collect(),
        Activation::ModRelu,
        readout,
    )
    .unwrap();
    let steps = (0..LEN).map(|_| random_matrix(&mut r, D, BATCH)).collect();
    let batch = SequenceBatch::new(steps).unwrap();
    let emitted = match readout {
        Readout::EveryStep => LEN,
        Readout::FinalStep => 1,
    };
    let targets = (0..emitted)
        .map(|_| (0..BATCH).map(|_| r.random_range(0..C)).collect())
        .collect();
    (model, batch, targets)
}

pub fn loss(model: &RnnModel, batch: &SequenceBatch, targets: &[Vec<usize>]) -> f64 {
    let mut m = model.clone();
    m.refresh().unwrap();
    let (logits, _) = m.forward(batch).unwrap();
    cross_entropy(&logits, targets).unwrap().0
}

/// Relative error of every parameter group of the analytic BPTT gradient
/// against central differences with `h = 1e-5`.
pub fn bptt_errors(readout: Readout, seed: u64) -> Vec<(&'static str, f64)> {
    let (mut model, batch, targets) = fixture(readout, seed);
    model.refresh().unwrap();
    let (logits, tape) = model.forward(&batch).unwrap();
    let (_, dlogits) = cross_entropy(&logits, &targets).unwrap();
    let grads = model.backward(&tape, &dlogits).unwrap();
    let h = 1e-5;
    let mut out = Vec::new();

    let v = vec_from_skew(&model.kernel.param().matrix()).unwrap();
    let fd = central_gradient(&v, h, |x| {
        let mut m = model.clone();
        m.kernel
            .set_param(SkewParam::new(P, x.to_vec()).unwrap())
            .unwrap();
        loss(&m, &batch, &targets)
    });
    out.push((
        "kernel",
        rel_diff(&coordinate_gradient(&grads.kernel_algebra).unwrap(), &fd),
    ));

    let fd = central_gradient(model.input_map.as_slice(), h, |x| {
        let mut m = model.clone();
        m.input_map.as_mut_slice().copy_from_slice(x);
        loss(&m, &batch, &targets)
    });
    out.push(("input_map", rel_diff(grads.input_map.as_slice(), &fd)));

    let fd = central_gradient(&model.bias, h, |x| {
        let mut m = model.clone();
        m.bias.copy_from_slice(x);
        loss(&m, &batch, &targets)
    });
    out.push(("bias", rel_diff(&grads.bias, &fd)));

    let fd = central_gradient(model.readout.as_slice(), h, |x| {
        let mut m = model.clone();
        m.readout.as_mut_slice().copy_from_slice(x);
        loss(&m, &batch, &targets)
    });
    out.push(("readout", rel_diff(grads.readout.as_slice(), &fd)));

    let fd = central_gradient(&model.readout_bias, h, |x| {
        let mut m = model.clone();
        m.readout_bias.copy_from_slice(x);
        loss(&m, &batch, &targets)
    });
    out.push(("readout_bias", rel_diff(&grads.readout_bias, &fd)));
    out
}
