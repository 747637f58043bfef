//! Locally adaptive block thresholding.
//!
//! Grayscale images are binarized block by block. Each block's threshold is
//! restricted to the range that labels its shared border with the upper and
//! left blocks exactly as those blocks' thresholds do, so the binarization
//! stays continuous across block boundaries.
//!
//! ```
//! use labt::{run_labt, BlockDims, GrayImage, LabtConfig, ThresholdMethod};
//!
//! let img = GrayImage::from_fn(64, 64, |r, c| ((r * 3 + c * 5) % 256) as u8).unwrap();
//! let cfg = LabtConfig::new(ThresholdMethod::Otsu).with_block(BlockDims::square(16).unwrap());
//! let res = run_labt(&img, &cfg).unwrap();
//! assert_eq!(res.binary.width(), 64);
//! ```

pub mod cli;
pub mod engine;
mod error;
pub mod image;
pub mod metrics;
pub mod multiscan;
pub mod pgm;
pub mod threshold;

pub use engine::{
    choose_grid, clamp_to_range, effective_range, neighbor_range, resolve_empty, run_labt,
    BlockDims, BlockGrid, BlockMatrix, LabtConfig, LabtResult, RangeMode, ThresholdRange,
};
pub use error::{Error, Result};
pub use image::{
    histogram, pad_to_multiple, variance, BinaryImage, GrayImage, Histogram, Image, Label, Padded,
};
pub use metrics::{continuity_violations, psnr, sweep, time_run, MethodReport, SweepRow};
pub use multiscan::{or_masks, run_multiscan, MultiscanResult};
pub use pgm::{read_pgm, write_pgm, PgmError};
pub use threshold::{
    binarize_global, niblack_binarize, select_threshold, NiblackParams, ThresholdMethod,
};
