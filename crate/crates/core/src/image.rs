//! Image value types, geometric transforms and global statistics.
//!
//! A single generic [`Image`] container backs both the grayscale input
//! ([`GrayImage`]) and the binarized output ([`BinaryImage`]), so flips and
//! crops are written once.

use crate::error::{Error, Result};

/// Classification of a pixel after thresholding.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum Label {
    #[default]
    Background,
    Foreground,
}

impl Label {
    /// Label of intensity `value` under threshold `t`: `value >= t` is foreground.
    #[inline]
    pub fn classify(value: u8, t: u8) -> Self {
        if value >= t {
            Label::Foreground
        } else {
            Label::Background
        }
    }

    #[inline]
    pub fn is_foreground(self) -> bool {
        self == Label::Foreground
    }
}

impl From<Label> for u8 {
    fn from(label: Label) -> u8 {
        match label {
            Label::Background => 0,
            Label::Foreground => 255,
        }
    }
}

/// Row-major 2-D raster.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Image<T> {
    width: usize,
    height: usize,
    data: Vec<T>,
}

pub type GrayImage = Image<u8>;
pub type BinaryImage = Image<Label>;

impl<T: Copy> Image<T> {
    /// Builds an image from row-major samples.
    pub fn from_vec(width: usize, height: usize, data: Vec<T>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::EmptyImage);
        }
        let expected = width.checked_mul(height).ok_or(Error::EmptyImage)?;
        if data.len() != expected {
            return Err(Error::BufferSize {
                expected,
                actual: data.len(),
            });
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    /// An image with every sample set to `value`.
    pub fn filled(width: usize, height: usize, value: T) -> Result<Self> {
        Self::from_vec(width, height, vec![value; width.saturating_mul(height)])
    }

    /// Builds an image by evaluating `f(row, col)` for every pixel.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> T) -> Result<Self> {
        let mut data = Vec::with_capacity(width.saturating_mul(height));
        for r in 0..height {
            for c in 0..width {
                data.push(f(r, c));
            }
        }
        Self::from_vec(width, height, data)
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    /// Always false; images have at least one pixel.
    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> T {
        self.data[row * self.width + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: T) {
        self.data[row * self.width + col] = value;
    }

    #[inline]
    pub fn row(&self, row: usize) -> &[T] {
        &self.data[row * self.width..(row + 1) * self.width]
    }

    pub fn same_dims<U>(&self, other: &Image<U>) -> bool {
        self.width == other.width && self.height == other.height
    }

    pub(crate) fn check_dims<U>(&self, other: &Image<U>) -> Result<()> {
        if self.same_dims(other) {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                left: (self.width, self.height),
                right: (other.width, other.height),
            })
        }
    }

    /// Applies `f` to every sample.
    pub fn map<U: Copy>(&self, f: impl Fn(T) -> U) -> Image<U> {
        Image {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Upside-down flip: row `r` moves to row `height - 1 - r`.
    pub fn flip_vertical(&self) -> Self {
        let mut data = Vec::with_capacity(self.data.len());
        for r in (0..self.height).rev() {
            data.extend_from_slice(self.row(r));
        }
        Self {
            width: self.width,
            height: self.height,
            data,
        }
    }

    /// Left-right flip: column `c` moves to column `width - 1 - c`.
    pub fn flip_horizontal(&self) -> Self {
        let mut data = Vec::with_capacity(self.data.len());
        for r in 0..self.height {
            data.extend(self.row(r).iter().rev());
        }
        Self {
            width: self.width,
            height: self.height,
            data,
        }
    }

    /// Top-left `width` x `height` sub-rectangle.
    pub fn crop(&self, width: usize, height: usize) -> Result<Self> {
        if width == 0 || height == 0 || width > self.width || height > self.height {
            return Err(Error::CropOutOfBounds {
                requested: (width, height),
                available: (self.width, self.height),
            });
        }
        let mut data = Vec::with_capacity(width * height);
        for r in 0..height {
            data.extend_from_slice(&self.row(r)[..width]);
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }
}

/// An edge-replicated image together with the size it was padded from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Padded {
    pub image: GrayImage,
    pub original_width: usize,
    pub original_height: usize,
}

impl Padded {
    pub fn crop_back<T: Copy>(&self, img: &Image<T>) -> Result<Image<T>> {
        img.crop(self.original_width, self.original_height)
    }
}

/// Grows `img` to the next multiple of the block dimensions by repeating
/// the last column and last row.
pub fn pad_to_multiple(img: &GrayImage, block_w: usize, block_h: usize) -> Result<Padded> {
    if block_w == 0 || block_h == 0 {
        return Err(Error::InvalidBlock {
            width: block_w,
            height: block_h,
        });
    }
    let w = img.width().div_ceil(block_w) * block_w;
    let h = img.height().div_ceil(block_h) * block_h;
    let image = if w == img.width() && h == img.height() {
        img.clone()
    } else {
        let (sw, sh) = (img.width(), img.height());
        Image::from_fn(w, h, |r, c| img.get(r.min(sh - 1), c.min(sw - 1)))?
    };
    Ok(Padded {
        image,
        original_width: img.width(),
        original_height: img.height(),
    })
}

/// Intensity histogram over the 8-bit domain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Histogram {
    counts: [u64; 256],
    total: u64,
}

impl Default for Histogram {
    fn default() -> Self {
        Self {
            counts: [0; 256],
            total: 0,
        }
    }
}

impl Histogram {
    pub fn from_pixels<'a>(pixels: impl IntoIterator<Item = &'a u8>) -> Self {
        let mut hist = Self::default();
        for &p in pixels {
            hist.counts[p as usize] += 1;
        }
        hist.total = hist.counts.iter().sum();
        hist
    }

    /// Builds a histogram directly from bin counts.
    pub fn from_counts(counts: [u64; 256]) -> Self {
        let total = counts.iter().sum();
        Self { counts, total }
    }

    #[inline]
    pub fn counts(&self) -> &[u64; 256] {
        &self.counts
    }

    #[inline]
    pub fn total(&self) -> u64 {
        self.total
    }

    /// Sum of all intensities.
    pub fn intensity_sum(&self) -> u64 {
        self.counts
            .iter()
            .enumerate()
            .map(|(g, &n)| g as u64 * n)
            .sum()
    }

    /// The single occupied intensity, if the histogram has exactly one.
    pub fn constant_value(&self) -> Option<u8> {
        let mut occupied = self.counts.iter().enumerate().filter(|(_, &n)| n > 0);
        let first = occupied.next()?;
        if occupied.next().is_some() {
            None
        } else {
            Some(first.0 as u8)
        }
    }

    pub fn mean(&self) -> f64 {
        if self.total == 0 {
            return 0.0;
        }
        self.intensity_sum() as f64 / self.total as f64
    }

    /// Population variance (divides by the pixel count).
    pub fn variance(&self) -> f64 {
        if self.total == 0 {
            return 0.0;
        }
        let mean = self.mean();
        let ss: f64 = self
            .counts
            .iter()
            .enumerate()
            .map(|(g, &n)| {
                let d = g as f64 - mean;
                n as f64 * d * d
            })
            .sum();
        ss / self.total as f64
    }

    pub fn std_dev(&self) -> f64 {
        self.variance().sqrt()
    }

    /// Cumulative counts: entry `g` is the number of pixels with intensity `<= g`.
    pub fn cdf(&self) -> [u64; 256] {
        let mut out = [0u64; 256];
        let mut acc = 0;
        for (g, &n) in self.counts.iter().enumerate() {
            acc += n;
            out[g] = acc;
        }
        out
    }
}

pub fn histogram(img: &GrayImage) -> Histogram {
    Histogram::from_pixels(img.as_slice())
}

/// Population variance of the image intensities.
pub fn variance(img: &GrayImage) -> f64 {
    histogram(img).variance()
}
