use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};
use crate::liegroup::SkewParam;

/// Initial distribution of the recurrent kernel's skew parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelInit {
    /// Block angles `s ~ U[-π, π]`.
    Henaff,
    /// `u ~ U[0, π/2]`, `s = -√((1 - cos u) / (1 + cos u))`.
    Cayley,
}

impl FromStr for KernelInit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "henaff" => Ok(Self::Henaff),
            "cayley" => Ok(Self::Cayley),
            other => Err(Error::Config(format!("unknown init `{other}`"))),
        }
    }
}

impl fmt::Display for KernelInit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Henaff => "henaff",
            Self::Cayley => "cayley",
        })
    }
}

/// Block-diagonal skew matrix with `[[0, s_i], [-s_i, 0]]` on the diagonal.
/// For odd `p` the last row and column stay zero.
pub fn block_diagonal(p: usize, blocks: &[f64]) -> Result<SkewParam<f64>> {
    if blocks.len() != p / 2 {
        return Err(Error::InvalidArgument(format!(
            "p = {p} needs {} block values, got {}",
            p / 2,
            blocks.len()
        )));
    }
    let mut param = SkewParam::zeros(p);
    // (2i, 2i+1) sits at offset row_start(2i) + 0 in the packed upper triangle
    let mut offset = 0;
    let v = param.values_mut();
    for row in 0..p {
        if row % 2 == 0 && row + 1 < p {
            v[offset] = blocks[row / 2];
        }
        offset += p - row - 1;
    }
    Ok(param)
}

/// Cayley-init block value for a given `u ∈ [0, π/2]`.
pub fn cayley_block_value(u: f64) -> f64 {
    -((1.0 - u.cos()) / (1.0 + u.cos())).sqrt()
}

pub fn henaff_blocks<R: Rng + ?Sized>(p: usize, rng: &mut R) -> Vec<f64> {
    (0..p / 2).map(|_| rng.random_range(-PI..=PI)).collect()
}

pub fn cayley_blocks<R: Rng + ?Sized>(p: usize, rng: &mut R) -> Vec<f64> {
    (0..p / 2)
        .map(|_| cayley_block_value(rng.random_range(0.0..=FRAC_PI_2)))
        .collect()
}

pub fn henaff_init<R: Rng + ?Sized>(p: usize, rng: &mut R) -> Result<SkewParam<f64>> {
    check_size(p)?;
    block_diagonal(p, &henaff_blocks(p, rng))
}

pub fn cayley_init<R: Rng + ?Sized>(p: usize, rng: &mut R) -> Result<SkewParam<f64>> {
    check_size(p)?;
    block_diagonal(p, &cayley_blocks(p, rng))
}

pub fn kernel_init<R: Rng + ?Sized>(
    kind: KernelInit,
    p: usize,
    rng: &mut R,
) -> Result<SkewParam<f64>> {
    match kind {
        KernelInit::Henaff => henaff_init(p, rng),
        KernelInit::Cayley => cayley_init(p, rng),
    }
}

fn check_size(p: usize) -> Result<()> {
    if p == 0 {
        return Err(Error::InvalidArgument(
            "hidden size must be positive".into(),
        ));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expm::expm;
    use crate::matcore::Matrix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn forced_quarter_turn_block() {
        let p = block_diagonal(2, &[FRAC_PI_2]).unwrap();
        assert_eq!(
            p.matrix(),
            Matrix::from_rows(&[[0.0, FRAC_PI_2], [-FRAC_PI_2, 0.0]])
        );
    }

    #[test]
    fn odd_size_leaves_last_row_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = henaff_init(5, &mut rng).unwrap().matrix();
        for j in 0..5 {
            assert_eq!(a.get(4, j), 0.0);
            assert_eq!(a.get(j, 4), 0.0);
        }
        assert_ne!(a.get(0, 1), 0.0);
        assert_ne!(a.get(2, 3), 0.0);
        assert_eq!(a.get(0, 2), 0.0);
    }

    #[test]
    fn exponential_is_block_rotation() {
        let s = [0.3, -2.0, 1.1];
        let b = expm(&block_diagonal(6, &s).unwrap().matrix()).unwrap();
        for (i, &si) in s.iter().enumerate() {
            let r = 2 * i;
            assert!((b.get(r, r) - si.cos()).abs() < 1e-15);
            assert!((b.get(r, r + 1) - si.sin()).abs() < 1e-15);
            assert!((b.get(r + 1, r) + si.sin()).abs() < 1e-15);
        }
        assert!(b.get(0, 2).abs() < 1e-16);
    }

    #[test]
    fn cayley_block_endpoints() {
        assert_eq!(cayley_block_value(0.0), 0.0);
        assert!((cayley_block_value(FRAC_PI_2) + 1.0).abs() < 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for s in cayley_blocks(200, &mut rng) {
            assert!((-1.0..=0.0).contains(&s));
        }
    }

    #[test]
    fn rejects_zero_size() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(henaff_init(0, &mut rng).is_err());
    }
}
