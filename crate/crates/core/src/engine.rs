//! Block thresholding with a neighbor continuity constraint.
//!
//! The padded image is split into equal blocks which are visited in raster
//! order. Each block's base threshold (OT) is clamped into the range of
//! thresholds that classify its top row the way the upper block's final
//! threshold does, intersected with the same range for its left column
//! against the left block. The first block is seeded with the threshold of
//! the whole image (or with its own OT).

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::image::{histogram, pad_to_multiple, BinaryImage, GrayImage, Histogram, Image, Label};
use crate::threshold::{select_threshold, ThresholdMethod};

/// Closed integer interval of admissible thresholds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ThresholdRange {
    lo: u8,
    hi: u8,
}

impl ThresholdRange {
    pub const FULL: ThresholdRange = ThresholdRange { lo: 0, hi: 255 };

    pub fn new(lo: u8, hi: u8) -> Option<Self> {
        (lo <= hi).then_some(Self { lo, hi })
    }

    pub fn point(t: u8) -> Self {
        Self { lo: t, hi: t }
    }

    #[inline]
    pub fn lo(&self) -> u8 {
        self.lo
    }

    #[inline]
    pub fn hi(&self) -> u8 {
        self.hi
    }

    #[inline]
    pub fn contains(&self, t: u8) -> bool {
        self.lo <= t && t <= self.hi
    }

    /// Number of integers in the range, `hi - lo + 1`.
    pub fn width(&self) -> u16 {
        self.hi as u16 - self.lo as u16 + 1
    }

    /// `None` when the intervals are disjoint.
    pub fn intersect(&self, other: &Self) -> Option<Self> {
        Self::new(self.lo.max(other.lo), self.hi.min(other.hi))
    }

    /// Moves `t` to the nearest end of the range when it falls outside.
    pub fn clamp(&self, t: u8) -> u8 {
        t.clamp(self.lo, self.hi)
    }
}

impl fmt::Display for ThresholdRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

/// How border pixels equal to the neighbor's threshold are treated.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum RangeMode {
    /// Every border pixel keeps its label, so the shared line is classified
    /// identically on both sides.
    #[default]
    Strict,
    /// Pixels equal to the neighbor's threshold are dropped from the
    /// bracketing array and may flip from foreground to background.
    Paper,
}

impl FromStr for RangeMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "strict" => Ok(RangeMode::Strict),
            "paper" => Ok(RangeMode::Paper),
            other => Err(Error::InvalidParameter(format!(
                "unknown range mode {other:?}, expected strict or paper"
            ))),
        }
    }
}

/// Range of thresholds that classify `border` the way `t_neighbor` does.
///
/// The neighbor's threshold is bracketed by the nearest border intensities
/// below and above it (sentinels -1 and 256 stand in when none exist);
/// the range runs from one past the lower bracket up to the upper bracket.
/// In [`RangeMode::Strict`] a border pixel equal to `t_neighbor` also caps
/// the range at `t_neighbor`.
pub fn neighbor_range(t_neighbor: u8, border: &[u8], mode: RangeMode) -> ThresholdRange {
    let t = t_neighbor as i16;
    let mut below = -1i16;
    let mut above = 256i16;
    let mut has_equal = false;
    for &p in border {
        let p = p as i16;
        match p.cmp(&t) {
            std::cmp::Ordering::Less => below = below.max(p),
            std::cmp::Ordering::Greater => above = above.min(p),
            std::cmp::Ordering::Equal => has_equal = true,
        }
    }
    let lo = (below + 1).clamp(0, 255) as u8;
    let mut hi = above.clamp(0, 255) as u8;
    if mode == RangeMode::Strict && has_equal {
        hi = t_neighbor;
    }
    ThresholdRange { lo, hi }
}

/// Intersection of the ranges dictated by the upper and left neighbors.
/// Blocks with a single constrained side pass `None` for the other.
pub fn effective_range(
    up: Option<ThresholdRange>,
    left: Option<ThresholdRange>,
) -> Option<ThresholdRange> {
    match (up, left) {
        (Some(u), Some(l)) => u.intersect(&l),
        (Some(r), None) | (None, Some(r)) => Some(r),
        (None, None) => Some(ThresholdRange::FULL),
    }
}

/// `ot` moved to the nearest end of `range` if it lies outside.
pub fn clamp_to_range(ot: u8, range: ThresholdRange) -> u8 {
    range.clamp(ot)
}

/// Number of pixels in `line` labeled differently by `t` and `reference`.
pub fn disagreements(line: &[u8], t: u8, reference: u8) -> usize {
    line.iter()
        .filter(|&&p| (p >= t) != (p >= reference))
        .count()
}

/// Threshold for a block whose upper and left ranges do not overlap.
///
/// Every threshold is scored by the number of top-border and left-border
/// pixels it labels differently from the respective neighbor; the lowest
/// score wins, then the value nearest `ot`, then the smallest value. The
/// range endpoints and both neighbor thresholds are among the candidates.
pub fn resolve_empty(ot: u8, top_border: &[u8], t_up: u8, left_border: &[u8], t_left: u8) -> u8 {
    (0..=255u8)
        .min_by_key(|&t| {
            let score = disagreements(top_border, t, t_up) + disagreements(left_border, t, t_left);
            (score, t.abs_diff(ot), t)
        })
        .expect("non-empty candidate set")
}

/// Side lengths of one block.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BlockDims {
    width: usize,
    height: usize,
}

impl BlockDims {
    pub fn new(width: usize, height: usize) -> Result<Self> {
        if width < 2 || height < 2 {
            return Err(Error::InvalidBlock { width, height });
        }
        Ok(Self { width, height })
    }

    pub fn square(side: usize) -> Result<Self> {
        Self::new(side, side)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }
}

impl FromStr for BlockDims {
    type Err = Error;

    /// Parses `WxH` or a single side length.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("block size {s:?} is not WxH"));
        let (w, h) = match s.split_once(['x', 'X']) {
            Some((w, h)) => (w, h),
            None => (s, s),
        };
        let w = w.trim().parse().map_err(|_| bad())?;
        let h = h.trim().parse().map_err(|_| bad())?;
        Self::new(w, h)
    }
}

impl fmt::Display for BlockDims {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.width, self.height)
    }
}

/// Partition of a padded image into `rows x cols` equal blocks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BlockGrid {
    pub block_w: usize,
    pub block_h: usize,
    pub rows: usize,
    pub cols: usize,
    pub padded_w: usize,
    pub padded_h: usize,
}

impl BlockGrid {
    pub fn new(image_w: usize, image_h: usize, block: BlockDims) -> Self {
        let rows = image_h.div_ceil(block.height);
        let cols = image_w.div_ceil(block.width);
        Self {
            block_w: block.width,
            block_h: block.height,
            rows,
            cols,
            padded_w: cols * block.width,
            padded_h: rows * block.height,
        }
    }

    pub fn block_count(&self) -> usize {
        self.rows * self.cols
    }

    /// Top-left pixel of block `(m, n)` in the padded image.
    pub fn origin(&self, m: usize, n: usize) -> (usize, usize) {
        (m * self.block_h, n * self.block_w)
    }

    /// Pixels of block `(m, n)` in raster order.
    pub fn block_pixels<'a>(&self, img: &'a GrayImage, m: usize, n: usize) -> impl Iterator<Item = &'a u8> + 'a {
        let (r0, c0) = self.origin(m, n);
        let bw = self.block_w;
        (r0..r0 + self.block_h).flat_map(move |r| &img.row(r)[c0..c0 + bw])
    }

    /// The block's top row, shared with the block above.
    pub fn top_border<'a>(&self, img: &'a GrayImage, m: usize, n: usize) -> &'a [u8] {
        let (r0, c0) = self.origin(m, n);
        &img.row(r0)[c0..c0 + self.block_w]
    }

    /// The block's leftmost column, shared with the block to the left.
    pub fn left_border(&self, img: &GrayImage, m: usize, n: usize) -> Vec<u8> {
        let (r0, c0) = self.origin(m, n);
        (r0..r0 + self.block_h).map(|r| img.get(r, c0)).collect()
    }
}

/// Block side from global contrast: 64 below a standard deviation of 32,
/// 32 below 64, 16 otherwise.
pub fn auto_block_side(img: &GrayImage) -> usize {
    let sigma = histogram(img).std_dev();
    if sigma < 32.0 {
        64
    } else if sigma < 64.0 {
        32
    } else {
        16
    }
}

/// Grid for `img`, using `block` when given and the contrast rule otherwise.
pub fn choose_grid(img: &GrayImage, block: Option<BlockDims>) -> Result<BlockGrid> {
    if img.width() < 2 || img.height() < 2 {
        return Err(Error::ImageTooSmall {
            width: img.width(),
            height: img.height(),
        });
    }
    let block = match block {
        Some(b) => b,
        None => BlockDims::square(auto_block_side(img))?,
    };
    Ok(BlockGrid::new(img.width(), img.height(), block))
}

/// Per-block values in raster order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BlockMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T> BlockMatrix<T> {
    fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Self {
        debug_assert_eq!(data.len(), rows * cols);
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, m: usize, n: usize) -> &T {
        &self.data[m * self.cols + n]
    }

    pub fn iter(&self) -> std::slice::Iter<'_, T> {
        self.data.iter()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LabtConfig {
    pub method: ThresholdMethod,
    /// `None` selects the block size from image contrast.
    pub block: Option<BlockDims>,
    pub mode: RangeMode,
    /// Seed the first block with the whole-image threshold instead of its own.
    pub seed_global: bool,
}

impl Default for LabtConfig {
    fn default() -> Self {
        Self {
            method: ThresholdMethod::Otsu,
            block: None,
            mode: RangeMode::Strict,
            seed_global: true,
        }
    }
}

impl LabtConfig {
    pub fn new(method: ThresholdMethod) -> Self {
        Self {
            method,
            ..Self::default()
        }
    }

    pub fn with_block(mut self, block: BlockDims) -> Self {
        self.block = Some(block);
        self
    }

    pub fn with_mode(mut self, mode: RangeMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_seed_global(mut self, seed_global: bool) -> Self {
        self.seed_global = seed_global;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabtResult {
    /// Output cropped back to the input size.
    pub binary: BinaryImage,
    pub grid: BlockGrid,
    /// Base threshold of every block.
    pub ot: BlockMatrix<u8>,
    /// Applied threshold of every block.
    pub t: BlockMatrix<u8>,
    /// Effective range of every block. The first block records the full
    /// domain; a block whose neighbor ranges were disjoint records the
    /// single threshold it was resolved to.
    pub ranges: BlockMatrix<ThresholdRange>,
    /// Blocks whose base threshold fell outside the effective range.
    pub out_of_range_count: usize,
    /// Blocks whose upper and left ranges were disjoint.
    pub non_overlap_count: usize,
}

impl LabtResult {
    /// Blocks with at least one neighbor, i.e. all but the first.
    pub fn constrained_blocks(&self) -> usize {
        self.grid.block_count() - 1
    }

    /// Mean of `hi - lo + 1` over constrained blocks; 256 when there are none.
    pub fn mean_range_width(&self) -> f64 {
        let n = self.constrained_blocks();
        if n == 0 {
            return 256.0;
        }
        let total: u64 = self.ranges.iter().skip(1).map(|r| r.width() as u64).sum();
        total as f64 / n as f64
    }

    /// Share of constrained blocks whose base threshold was outside its range.
    pub fn out_of_range_fraction(&self) -> f64 {
        match self.constrained_blocks() {
            0 => 0.0,
            n => self.out_of_range_count as f64 / n as f64,
        }
    }
}

/// Runs block thresholding over `img`.
pub fn run_labt(img: &GrayImage, cfg: &LabtConfig) -> Result<LabtResult> {
    cfg.method.validate()?;
    let grid = choose_grid(img, cfg.block)?;
    let padded = pad_to_multiple(img, grid.block_w, grid.block_h)?;
    let pimg = &padded.image;

    // base thresholds are independent of each other
    let ot: Vec<u8> = (0..grid.block_count())
        .into_par_iter()
        .map(|i| {
            let hist = Histogram::from_pixels(grid.block_pixels(pimg, i / grid.cols, i % grid.cols));
            select_threshold(cfg.method, &hist)
        })
        .collect::<Result<_>>()?;

    let seed = if cfg.seed_global {
        select_threshold(cfg.method, &histogram(pimg))?
    } else {
        ot[0]
    };

    let mut t = vec![0u8; ot.len()];
    let mut ranges = vec![ThresholdRange::FULL; ot.len()];
    let mut out_of_range_count = 0;
    let mut non_overlap_count = 0;
    for m in 0..grid.rows {
        for n in 0..grid.cols {
            let i = m * grid.cols + n;
            if i == 0 {
                t[0] = seed;
                continue;
            }
            let up = (m > 0).then(|| {
                let t_up = t[i - grid.cols];
                (t_up, grid.top_border(pimg, m, n))
            });
            let left = (n > 0).then(|| (t[i - 1], grid.left_border(pimg, m, n)));
            let ur = up.map(|(tn, line)| neighbor_range(tn, line, cfg.mode));
            let lr = left.as_ref().map(|(tn, line)| neighbor_range(*tn, line, cfg.mode));

            let (range, ti) = match effective_range(ur, lr) {
                Some(r) => (r, clamp_to_range(ot[i], r)),
                None => {
                    non_overlap_count += 1;
                    let (t_up, top) = up.expect("disjoint ranges need both neighbors");
                    let (t_left, left_line) = left.as_ref().expect("disjoint ranges need both neighbors");
                    let ti = resolve_empty(ot[i], top, t_up, left_line, *t_left);
                    (ThresholdRange::point(ti), ti)
                }
            };
            if !range.contains(ot[i]) {
                out_of_range_count += 1;
            }
            ranges[i] = range;
            t[i] = ti;
        }
    }

    let binary = binarize_blocks(pimg, &grid, &t);
    Ok(LabtResult {
        binary: padded.crop_back(&binary)?,
        grid,
        ot: BlockMatrix::from_vec(grid.rows, grid.cols, ot),
        t: BlockMatrix::from_vec(grid.rows, grid.cols, t),
        ranges: BlockMatrix::from_vec(grid.rows, grid.cols, ranges),
        out_of_range_count,
        non_overlap_count,
    })
}

fn binarize_blocks(img: &GrayImage, grid: &BlockGrid, t: &[u8]) -> BinaryImage {
    let labels: Vec<Label> = (0..img.height())
        .into_par_iter()
        .flat_map_iter(|r| {
            let m = r / grid.block_h;
            img.row(r)
                .iter()
                .enumerate()
                .map(move |(c, &p)| Label::classify(p, t[m * grid.cols + c / grid.block_w]))
        })
        .collect();
    Image::from_vec(img.width(), img.height(), labels).expect("labels cover the padded image")
}
