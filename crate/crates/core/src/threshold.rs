//! Base threshold selection and per-pixel Niblack binarization.

use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};
use crate::image::{BinaryImage, GrayImage, Histogram, Image, Label};

/// Default area fraction for [`ThresholdMethod::Adcdf`].
pub const DEFAULT_RHO: f64 = 0.5;
/// Default weight of the local standard deviation.
pub const DEFAULT_K: f64 = -0.2;
/// Default Niblack window side.
pub const DEFAULT_WINDOW: usize = 15;

/// Threshold selection rule applied to a region's histogram.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ThresholdMethod {
    /// Maximizes between-class variance; ties go to the smallest threshold.
    Otsu,
    /// Area division of the cumulative distribution: the threshold sits just
    /// above the smallest intensity whose CDF reaches `rho` of the pixels.
    Adcdf { rho: f64 },
    /// `round(mean + k * stddev)` over the region.
    MeanK { k: f64 },
}

impl ThresholdMethod {
    pub fn adcdf(rho: f64) -> Result<Self> {
        let m = ThresholdMethod::Adcdf { rho };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            ThresholdMethod::Otsu => Ok(()),
            ThresholdMethod::Adcdf { rho } if rho > 0.0 && rho < 1.0 => Ok(()),
            ThresholdMethod::Adcdf { rho } => Err(Error::InvalidParameter(format!(
                "ADCDF area fraction must lie in (0, 1), got {rho}"
            ))),
            ThresholdMethod::MeanK { k } if k.is_finite() => Ok(()),
            ThresholdMethod::MeanK { k } => {
                Err(Error::InvalidParameter(format!("k must be finite, got {k}")))
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ThresholdMethod::Otsu => "otsu",
            ThresholdMethod::Adcdf { .. } => "adcdf",
            ThresholdMethod::MeanK { .. } => "meank",
        }
    }
}

impl fmt::Display for ThresholdMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ThresholdMethod::Otsu => f.write_str("otsu"),
            ThresholdMethod::Adcdf { rho } => write!(f, "adcdf(rho={rho})"),
            ThresholdMethod::MeanK { k } => write!(f, "meank(k={k})"),
        }
    }
}

/// Picks a threshold for the region summarized by `hist`.
///
/// A region holding a single intensity returns that intensity, so every
/// pixel of it is foreground.
pub fn select_threshold(method: ThresholdMethod, hist: &Histogram) -> Result<u8> {
    if hist.total() == 0 {
        return Err(Error::EmptyRegion);
    }
    method.validate()?;
    if let Some(v) = hist.constant_value() {
        return Ok(v);
    }
    Ok(match method {
        ThresholdMethod::Otsu => otsu(hist),
        ThresholdMethod::Adcdf { rho } => adcdf(hist, rho),
        ThresholdMethod::MeanK { k } => {
            let t = (hist.mean() + k * hist.std_dev()).round();
            t.clamp(0.0, 255.0) as u8
        }
    })
}

fn adcdf(hist: &Histogram, rho: f64) -> u8 {
    let target = rho * hist.total() as f64;
    let cdf = hist.cdf();
    let g = cdf
        .iter()
        .position(|&c| c as f64 >= target)
        .unwrap_or(255);
    (g + 1).min(255) as u8
}

/// Between-class separation of the split `{< t | >= t}`, kept as the exact
/// fraction `d^2 / (n0 * n1)` with `d = N*S0 - n0*S`. It is proportional to
/// the between-class variance for a fixed region.
#[derive(Clone, Copy, Debug)]
struct Separation {
    d_sq: u128,
    q: u128,
}

impl Separation {
    fn new(n0: u64, s0: u64, total: u64, sum: u64) -> Option<Self> {
        let n1 = total - n0;
        if n0 == 0 || n1 == 0 {
            return None;
        }
        let d = (total as i128 * s0 as i128) - (n0 as i128 * sum as i128);
        let d = d.unsigned_abs();
        Some(Self {
            d_sq: d.checked_mul(d)?,
            q: n0 as u128 * n1 as u128,
        })
    }

    fn cmp(&self, other: &Self) -> Ordering {
        // d1^2 / q1 vs d2^2 / q2  <=>  d1^2 * q2 vs d2^2 * q1
        match (self.q.try_into(), other.q.try_into()) {
            (Ok(q1), Ok(q2)) => wide_mul(self.d_sq, q2).cmp(&wide_mul(other.d_sq, q1)),
            _ => {
                let a = self.d_sq as f64 / self.q as f64;
                let b = other.d_sq as f64 / other.q as f64;
                a.total_cmp(&b)
            }
        }
    }
}

/// `a * b` as a (high, low) pair of a 192-bit product.
fn wide_mul(a: u128, b: u64) -> (u128, u64) {
    let lo = (a as u64) as u128 * b as u128;
    let hi = (a >> 64) * b as u128;
    let mid = hi + (lo >> 64);
    (mid, lo as u64)
}

fn otsu(hist: &Histogram) -> u8 {
    let counts = hist.counts();
    let total = hist.total();
    let sum = hist.intensity_sum();
    let mut best: Option<(u8, Separation)> = None;
    let (mut n0, mut s0) = (0u64, 0u64);
    for t in 1..=255usize {
        n0 += counts[t - 1];
        s0 += (t as u64 - 1) * counts[t - 1];
        let Some(sep) = Separation::new(n0, s0, total, sum) else {
            continue;
        };
        if best.is_none_or(|(_, b)| sep.cmp(&b) == Ordering::Greater) {
            best = Some((t as u8, sep));
        }
    }
    best.map_or(0, |(t, _)| t)
}

/// Labels `value >= t` as foreground.
pub fn binarize_global(img: &GrayImage, t: u8) -> BinaryImage {
    img.map(|p| Label::classify(p, t))
}

/// Window and weight for per-pixel Niblack thresholding.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NiblackParams {
    window: usize,
    k: f64,
}

impl Default for NiblackParams {
    fn default() -> Self {
        Self {
            window: DEFAULT_WINDOW,
            k: DEFAULT_K,
        }
    }
}

impl NiblackParams {
    pub fn new(window: usize, k: f64) -> Result<Self> {
        if window < 3 || window.is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!(
                "Niblack window must be odd and at least 3, got {window}"
            )));
        }
        if !k.is_finite() {
            return Err(Error::InvalidParameter(format!("k must be finite, got {k}")));
        }
        Ok(Self { window, k })
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn k(&self) -> f64 {
        self.k
    }
}

/// Summed-area tables of intensities and squared intensities, one row and
/// column larger than the source image.
struct IntegralImages {
    stride: usize,
    sum: Vec<u64>,
    sq: Vec<u64>,
}

impl IntegralImages {
    fn new(img: &GrayImage) -> Self {
        let stride = img.width() + 1;
        let mut sum = vec![0u64; stride * (img.height() + 1)];
        let mut sq = vec![0u64; sum.len()];
        for r in 0..img.height() {
            let (mut row_sum, mut row_sq) = (0u64, 0u64);
            for (c, &p) in img.row(r).iter().enumerate() {
                row_sum += p as u64;
                row_sq += p as u64 * p as u64;
                let i = (r + 1) * stride + c + 1;
                sum[i] = sum[i - stride] + row_sum;
                sq[i] = sq[i - stride] + row_sq;
            }
        }
        Self { stride, sum, sq }
    }

    /// Sums over rows `r0..r1` and columns `c0..c1` (half-open).
    fn rect(&self, r0: usize, r1: usize, c0: usize, c1: usize) -> (u64, u64) {
        let at = |t: &[u64], r: usize, c: usize| t[r * self.stride + c];
        let f = |t: &[u64]| at(t, r1, c1) + at(t, r0, c0) - at(t, r0, c1) - at(t, r1, c0);
        (f(&self.sum), f(&self.sq))
    }
}

/// Local threshold `mean + k * stddev` from window sums.
#[inline]
pub(crate) fn local_threshold(sum: u64, sum_sq: u64, n: u64, k: f64) -> f64 {
    let mean = sum as f64 / n as f64;
    let var_num = n as u128 * sum_sq as u128 - sum as u128 * sum as u128;
    let std = (var_num as f64 / (n as f64 * n as f64)).sqrt();
    mean + k * std
}

/// Per-pixel Niblack binarization. Windows are clipped at the image border.
pub fn niblack_binarize(img: &GrayImage, params: NiblackParams) -> BinaryImage {
    let ii = IntegralImages::new(img);
    let half = params.window / 2;
    let (w, h) = (img.width(), img.height());
    Image::from_fn(w, h, |r, c| {
        let (r0, r1) = (r.saturating_sub(half), (r + half + 1).min(h));
        let (c0, c1) = (c.saturating_sub(half), (c + half + 1).min(w));
        let (s, sq) = ii.rect(r0, r1, c0, c1);
        let n = ((r1 - r0) * (c1 - c0)) as u64;
        let t = local_threshold(s, sq, n, params.k);
        if img.get(r, c) as f64 >= t {
            Label::Foreground
        } else {
            Label::Background
        }
    })
    .expect("same dimensions as a valid image")
}
