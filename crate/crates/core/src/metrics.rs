//! Quality, continuity and timing measurements for comparison reports.

use std::io;
use std::time::{Duration, Instant};

use crate::engine::{run_labt, BlockDims, LabtConfig, LabtResult};
use crate::error::{Error, Result};
use crate::image::{BinaryImage, GrayImage, Label};

/// PSNR in dB between the grayscale original and the binary output mapped
/// to {0, 255}. Identical images give `f64::INFINITY`.
pub fn psnr(original: &GrayImage, binary: &BinaryImage) -> Result<f64> {
    original.check_dims(binary)?;
    let sse: u64 = original
        .as_slice()
        .iter()
        .zip(binary.as_slice())
        .map(|(&p, &l)| {
            let d = p as i64 - u8::from(l) as i64;
            (d * d) as u64
        })
        .sum();
    if sse == 0 {
        return Ok(f64::INFINITY);
    }
    let mse = sse as f64 / original.len() as f64;
    Ok(10.0 * (255.0f64 * 255.0 / mse).log10())
}

/// Border pixels whose label under a block's threshold differs from the
/// label under its upper (top row) or left (left column) neighbor's
/// threshold, summed over all adjacent pairs.
///
/// `padded` is the edge-replicated image the result was computed on.
pub fn continuity_violations(result: &LabtResult, padded: &GrayImage) -> Result<usize> {
    let grid = &result.grid;
    if padded.width() != grid.padded_w || padded.height() != grid.padded_h {
        return Err(Error::DimensionMismatch {
            left: (padded.width(), padded.height()),
            right: (grid.padded_w, grid.padded_h),
        });
    }
    let differs = |p: u8, a: u8, b: u8| Label::classify(p, a) != Label::classify(p, b);
    let mut count = 0;
    for m in 0..grid.rows {
        for n in 0..grid.cols {
            let t = *result.t.get(m, n);
            if m > 0 {
                let t_up = *result.t.get(m - 1, n);
                count += grid
                    .top_border(padded, m, n)
                    .iter()
                    .filter(|&&p| differs(p, t, t_up))
                    .count();
            }
            if n > 0 {
                let t_left = *result.t.get(m, n - 1);
                count += grid
                    .left_border(padded, m, n)
                    .into_iter()
                    .filter(|&p| differs(p, t, t_left))
                    .count();
            }
        }
    }
    Ok(count)
}

/// Runs `task` and returns its output with the elapsed monotonic time.
pub fn time_run<T>(task: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let out = task();
    (out, start.elapsed())
}

/// One line of a method comparison table.
#[derive(Clone, Debug, PartialEq)]
pub struct MethodReport {
    pub method: String,
    pub psnr_db: f64,
    pub elapsed: Duration,
    pub out_of_range_count: usize,
    pub non_overlap_count: usize,
    pub mean_range_width: f64,
    pub continuity_violations: usize,
}

impl MethodReport {
    pub const HEADER: [&'static str; 7] = [
        "method",
        "psnr_db_vs_original",
        "elapsed_s",
        "out_of_range_count",
        "non_overlap_count",
        "mean_range_width",
        "continuity_violations",
    ];

    fn record(&self) -> [String; 7] {
        [
            self.method.clone(),
            format!("{:.4}", self.psnr_db),
            format!("{:.3}", self.elapsed.as_secs_f64()),
            self.out_of_range_count.to_string(),
            self.non_overlap_count.to_string(),
            format!("{:.4}", self.mean_range_width),
            self.continuity_violations.to_string(),
        ]
    }
}

/// Block-size sweep statistics for one image. Both values are taken over
/// the blocks that have a neighbor range (every block but the first).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepRow {
    pub block_size: usize,
    pub mean_range_width: f64,
    pub out_of_range_fraction: f64,
}

impl SweepRow {
    pub fn from_result(block_size: usize, res: &LabtResult) -> Self {
        Self {
            block_size,
            mean_range_width: res.mean_range_width(),
            out_of_range_fraction: res.out_of_range_fraction(),
        }
    }
}

/// One square-block run per entry of `block_sizes`; the rest of `template`
/// is reused as-is.
pub fn sweep(img: &GrayImage, template: &LabtConfig, block_sizes: &[usize]) -> Result<Vec<SweepRow>> {
    block_sizes
        .iter()
        .map(|&size| {
            let cfg = LabtConfig {
                block: Some(BlockDims::square(size)?),
                ..*template
            };
            let res = run_labt(img, &cfg)?;
            Ok(SweepRow::from_result(size, &res))
        })
        .collect()
}

/// Unweighted per-size mean over images. Every inner list must cover the
/// same block sizes in the same order.
pub fn average_sweeps(per_image: &[Vec<SweepRow>]) -> Result<Vec<SweepRow>> {
    let Some(first) = per_image.first() else {
        return Ok(Vec::new());
    };
    let n = per_image.len() as f64;
    first
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut width = 0.0;
            let mut fraction = 0.0;
            for rows in per_image {
                let r = rows.get(i).filter(|r| r.block_size == row.block_size).ok_or_else(|| {
                    Error::InvalidParameter("sweeps cover different block sizes".into())
                })?;
                width += r.mean_range_width;
                fraction += r.out_of_range_fraction;
            }
            Ok(SweepRow {
                block_size: row.block_size,
                mean_range_width: width / n,
                out_of_range_fraction: fraction / n,
            })
        })
        .collect()
}

pub fn write_method_reports<W: io::Write>(out: W, reports: &[MethodReport]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(MethodReport::HEADER)?;
    for r in reports {
        w.write_record(r.record())?;
    }
    w.flush()?;
    Ok(())
}

/// Writes sweep rows; with `image` set, each row is prefixed by that name.
pub fn write_sweep_rows<W: io::Write>(out: W, rows: &[(Option<&str>, SweepRow)]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let named = rows.first().is_some_and(|(name, _)| name.is_some());
    let mut header = vec!["block_size", "mean_range_width", "out_of_range_fraction"];
    if named {
        header.insert(0, "image");
    }
    w.write_record(&header)?;
    for (name, row) in rows {
        let mut rec = vec![
            row.block_size.to_string(),
            format!("{:.6}", row.mean_range_width),
            format!("{:.6}", row.out_of_range_fraction),
        ];
        if named {
            rec.insert(0, name.unwrap_or_default().to_string());
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}
