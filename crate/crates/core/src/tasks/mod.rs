//! Training data: the copying-memory task and pixel-by-pixel MNIST.

mod copying;
pub mod idx;
mod pixels;

pub use copying::{
    copying_baseline, copying_pair, gen_copying_batch, render, CopyBatch, CopyConfig,
};
pub use idx::{load_idx, load_images, load_labels, IdxFile, IdxImages};
pub use pixels::{
    load_pixel_dataset, permute_pixels, PixelDataset, PixelPermutation, PixelSeqConfig, PIXELS,
    TEST_IMAGES, TEST_LABELS, TRAIN_IMAGES, TRAIN_LABELS,
};
