//! OR of block thresholding runs under three scan orientations.
//!
//! Raster order favors the top-left corner: thresholds propagate down and
//! to the right only. Running the scan on the vertically and horizontally
//! flipped image, flipping the results back and OR-ing the foreground of
//! all three masks removes part of that bias.

use crate::engine::{run_labt, LabtConfig, LabtResult};
use crate::error::{Error, Result};
use crate::image::{BinaryImage, GrayImage, Image, Label};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiscanResult {
    /// Pixelwise OR of the three scans.
    pub combined: BinaryImage,
    /// Identity, vertical-flip and horizontal-flip scans, each flipped back
    /// to the input orientation.
    pub per_scan: [BinaryImage; 3],
    /// Full result of the identity scan.
    pub primary: LabtResult,
}

/// Pixelwise foreground union.
pub fn or_masks(masks: &[BinaryImage]) -> Result<BinaryImage> {
    let (first, rest) = masks
        .split_first()
        .ok_or_else(|| Error::InvalidParameter("no masks to combine".into()))?;
    let mut labels = first.as_slice().to_vec();
    for mask in rest {
        first.check_dims(mask)?;
        for (acc, &l) in labels.iter_mut().zip(mask.as_slice()) {
            if l.is_foreground() {
                *acc = Label::Foreground;
            }
        }
    }
    Image::from_vec(first.width(), first.height(), labels)
}

pub fn run_multiscan(img: &GrayImage, cfg: &LabtConfig) -> Result<MultiscanResult> {
    let (primary, (vertical, horizontal)) = rayon::join(
        || run_labt(img, cfg),
        || {
            rayon::join(
                || run_labt(&img.flip_vertical(), cfg),
                || run_labt(&img.flip_horizontal(), cfg),
            )
        },
    );
    let primary = primary?;
    let per_scan = [
        primary.binary.clone(),
        vertical?.binary.flip_vertical(),
        horizontal?.binary.flip_horizontal(),
    ];
    Ok(MultiscanResult {
        combined: or_masks(&per_scan)?,
        per_scan,
        primary,
    })
}
