use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::idx::{load_images, load_labels};
use crate::error::{Error, Result};

pub const PIXELS: usize = 784;

/// File names of the standard distribution.
pub const TRAIN_IMAGES: &str = "train-images-idx3-ubyte";
pub const TRAIN_LABELS: &str = "train-labels-idx1-ubyte";
pub const TEST_IMAGES: &str = "t10k-images-idx3-ubyte";
pub const TEST_LABELS: &str = "t10k-labels-idx1-ubyte";

/// A fixed bijection on pixel positions. `forward[i]` is the source pixel
/// placed at position `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PixelPermutation {
    forward: Vec<usize>,
    inverse: Vec<usize>,
}

impl PixelPermutation {
    pub fn identity(len: usize) -> Self {
        Self {
            forward: (0..len).collect(),
            inverse: (0..len).collect(),
        }
    }

    /// Seeded shuffle of `0..len`; `None` gives the identity.
    pub fn from_seed(len: usize, seed: Option<u64>) -> Self {
        let Some(seed) = seed else {
            return Self::identity(len);
        };
        let mut forward: Vec<usize> = (0..len).collect();
        forward.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let mut inverse = vec![0; len];
        for (i, &f) in forward.iter().enumerate() {
            inverse[f] = i;
        }
        Self { forward, inverse }
    }

    pub fn len(&self) -> usize {
        self.forward.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forward.is_empty()
    }

    pub fn indices(&self) -> &[usize] {
        &self.forward
    }

    pub fn apply(&self, image: &[f64]) -> Result<Vec<f64>> {
        self.check(image)?;
        Ok(self.forward.iter().map(|&i| image[i]).collect())
    }

    pub fn invert(&self, image: &[f64]) -> Result<Vec<f64>> {
        self.check(image)?;
        Ok(self.inverse.iter().map(|&i| image[i]).collect())
    }

    fn check(&self, image: &[f64]) -> Result<()> {
        if image.len() != self.len() {
            return Err(Error::mismatch(
                "permute_pixels",
                (self.len(), 1),
                (image.len(), 1),
            ));
        }
        Ok(())
    }
}

/// Applies one permutation to every image.
pub fn permute_pixels(images: &[Vec<f64>], perm: &PixelPermutation) -> Result<Vec<Vec<f64>>> {
    images.iter().map(|img| perm.apply(img)).collect()
}

/// Where to find a pixel-sequence dataset and how to present it.
#[derive(Debug, Clone, PartialEq)]
pub struct PixelSeqConfig {
    pub images: PathBuf,
    pub labels: PathBuf,
    /// `Some(seed)` for the permuted variant.
    pub permutation_seed: Option<u64>,
    /// Keep only the first `subset` examples.
    pub subset: Option<usize>,
}

impl PixelSeqConfig {
    pub fn train(dir: &Path, permutation_seed: Option<u64>, subset: Option<usize>) -> Self {
        Self {
            images: dir.join(TRAIN_IMAGES),
            labels: dir.join(TRAIN_LABELS),
            permutation_seed,
            subset,
        }
    }

    pub fn test(dir: &Path, permutation_seed: Option<u64>, subset: Option<usize>) -> Self {
        Self {
            images: dir.join(TEST_IMAGES),
            labels: dir.join(TEST_LABELS),
            permutation_seed,
            subset,
        }
    }
}

/// Images as 784-step scalar sequences with their labels.
#[derive(Debug, Clone, PartialEq)]
pub struct PixelDataset {
    pub sequences: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
}

impl PixelDataset {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

pub fn load_pixel_dataset(cfg: &PixelSeqConfig) -> Result<PixelDataset> {
    let imgs = load_images(&cfg.images)?;
    if imgs.rows * imgs.cols != PIXELS {
        return Err(Error::IdxDimension {
            path: cfg.images.clone(),
            detail: format!("expected 28x28 images, got {}x{}", imgs.rows, imgs.cols),
        });
    }
    let labels = load_labels(&cfg.labels)?;
    if labels.len() != imgs.images.len() {
        return Err(Error::IdxDimension {
            path: cfg.labels.clone(),
            detail: format!("{} labels for {} images", labels.len(), imgs.images.len()),
        });
    }
    let keep = cfg.subset.unwrap_or(labels.len()).min(labels.len());
    let perm = PixelPermutation::from_seed(PIXELS, cfg.permutation_seed);
    let sequences = permute_pixels(&imgs.images[..keep], &perm)?;
    Ok(PixelDataset {
        sequences,
        labels: labels[..keep].iter().map(|&l| usize::from(l)).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_mode_is_unchanged() {
        let img: Vec<f64> = (0..PIXELS).map(|i| i as f64).collect();
        assert_eq!(
            PixelPermutation::from_seed(PIXELS, None)
                .apply(&img)
                .unwrap(),
            img
        );
    }

    #[test]
    fn seeded_permutation_round_trips() {
        let perm = PixelPermutation::from_seed(PIXELS, Some(5544));
        let mut sorted = perm.indices().to_vec();
        sorted.sort_unstable();
        assert_eq!(sorted, (0..PIXELS).collect::<Vec<_>>());
        let img: Vec<f64> = (0..PIXELS).map(|i| (i as f64).sin()).collect();
        let fwd = perm.apply(&img).unwrap();
        assert_ne!(fwd, img);
        assert_ne!(perm.apply(&fwd).unwrap(), img);
        assert_eq!(perm.invert(&fwd).unwrap(), img);
        assert_eq!(perm, PixelPermutation::from_seed(PIXELS, Some(5544)));
        assert!(perm.apply(&img[..10]).is_err());
    }
}
