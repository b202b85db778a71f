use crate::scalar::Real;

const MR: usize = 4;
const NR: usize = 8;

/// `c = a * b` for row-major `a: m x k`, `b: k x n`, `c: m x n`.
///
/// Register tiles of `MR x NR` outputs; each output still accumulates its
/// products in ascending `k` order starting from zero, so the result is
/// bit-identical to the textbook triple loop.
///
/// On x86-64 the same code is also compiled with wider vector extensions and
/// picked at runtime. Multiplies and adds are never fused, so every variant
/// returns identical bits.
pub(super) fn gemm<T: Real>(m: usize, k: usize, n: usize, a: &[T], b: &[T], c: &mut [T]) {
    #[cfg(target_arch = "x86_64")]
    {
        if std::arch::is_x86_feature_detected!("avx512f") {
            // SAFETY: the feature was detected on this CPU.
            return unsafe { gemm_avx512(m, k, n, a, b, c) };
        }
        if std::arch::is_x86_feature_detected!("avx2") {
            // SAFETY: the feature was detected on this CPU.
            return unsafe { gemm_avx2(m, k, n, a, b, c) };
        }
    }
    gemm_portable(m, k, n, a, b, c)
}

#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "avx512f")]
unsafe fn gemm_avx512<T: Real>(m: usize, k: usize, n: usize, a: &[T], b: &[T], c: &mut [T]) {
    gemm_portable(m, k, n, a, b, c)
}

#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "avx2")]
unsafe fn gemm_avx2<T: Real>(m: usize, k: usize, n: usize, a: &[T], b: &[T], c: &mut [T]) {
    gemm_portable(m, k, n, a, b, c)
}

#[inline(always)]
fn gemm_portable<T: Real>(m: usize, k: usize, n: usize, a: &[T], b: &[T], c: &mut [T]) {
    debug_assert_eq!(a.len(), m * k);
    debug_assert_eq!(b.len(), k * n);
    debug_assert_eq!(c.len(), m * n);

    let m_main = m - m % MR;
    let n_main = n - n % NR;

    let mut i = 0;
    while i < m_main {
        let mut j = 0;
        while j < n_main {
            tile(k, n, a, b, c, i, j);
            j += NR;
        }
        if n_main < n {
            for r in i..i + MR {
                edge_row(k, n, a, b, c, r, n_main, n);
            }
        }
        i += MR;
    }
    for r in m_main..m {
        edge_row(k, n, a, b, c, r, 0, n);
    }
}

#[inline(always)]
fn tile<T: Real>(k: usize, n: usize, a: &[T], b: &[T], c: &mut [T], i: usize, j: usize) {
    let mut acc = [[T::zero(); NR]; MR];
    let a0 = &a[i * k..(i + 1) * k];
    let a1 = &a[(i + 1) * k..(i + 2) * k];
    let a2 = &a[(i + 2) * k..(i + 3) * k];
    let a3 = &a[(i + 3) * k..(i + 4) * k];
    for p in 0..k {
        let brow: &[T; NR] = b[p * n + j..p * n + j + NR].try_into().unwrap();
        let av = [a0[p], a1[p], a2[p], a3[p]];
        for r in 0..MR {
            for q in 0..NR {
                acc[r][q] += av[r] * brow[q];
            }
        }
    }
    for (r, row) in acc.iter().enumerate() {
        c[(i + r) * n + j..(i + r) * n + j + NR].copy_from_slice(row);
    }
}

#[inline(always)]
fn edge_row<T: Real>(
    k: usize,
    n: usize,
    a: &[T],
    b: &[T],
    c: &mut [T],
    r: usize,
    j0: usize,
    j1: usize,
) {
    let arow = &a[r * k..(r + 1) * k];
    let crow = &mut c[r * n + j0..r * n + j1];
    crow.iter_mut().for_each(|x| *x = T::zero());
    for (p, &aval) in arow.iter().enumerate() {
        let brow = &b[p * n + j0..p * n + j1];
        for (cv, &bv) in crow.iter_mut().zip(brow) {
            *cv += aval * bv;
        }
    }
}
