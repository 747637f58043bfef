//! `labt` command-line front end.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use crate::engine::{run_labt, BlockDims, LabtConfig, RangeMode};
use crate::image::{histogram, pad_to_multiple, BinaryImage, GrayImage};
use crate::metrics::{
    average_sweeps, continuity_violations, psnr, sweep, time_run, write_method_reports,
    write_sweep_rows, MethodReport, SweepRow,
};
use crate::multiscan::run_multiscan;
use crate::pgm::{read_pgm, write_pgm};
use crate::threshold::{
    binarize_global, niblack_binarize, select_threshold, NiblackParams, ThresholdMethod, DEFAULT_K,
    DEFAULT_RHO, DEFAULT_WINDOW,
};

pub const DEFAULT_SWEEP_SIZES: [usize; 5] = [8, 16, 32, 64, 128];

#[derive(Debug, Parser)]
#[command(name = "labt", version, about = "Locally adaptive block thresholding")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Binarize one PGM image.
    Binarize(CommandArgs),
    /// Run global Otsu, Niblack, LABT(Otsu) and LABT(ADCDF) and report metrics.
    Compare(CommandArgs),
    /// Block-size sweep over one image or a directory of PGM images.
    Sweep(CommandArgs),
}

#[derive(Debug, Args)]
pub struct CommandArgs {
    /// Input PGM file (or directory, for sweep).
    pub input: PathBuf,
    /// Output PGM (binarize), output directory (compare) or per-image CSV (sweep).
    pub output: Option<PathBuf>,
    #[command(flatten)]
    pub opts: Options,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Otsu,
    Adcdf,
    Meank,
    Niblack,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Strict,
    Paper,
}

#[derive(Debug, Args)]
pub struct Options {
    #[arg(long, value_enum, default_value = "otsu")]
    pub method: MethodArg,
    /// Standard-deviation weight for meank and niblack.
    #[arg(long, default_value_t = DEFAULT_K, allow_hyphen_values = true)]
    pub k: f64,
    /// Area fraction for adcdf.
    #[arg(long, default_value_t = DEFAULT_RHO)]
    pub rho: f64,
    /// Niblack window side (odd).
    #[arg(long, default_value_t = DEFAULT_WINDOW)]
    pub window: usize,
    /// Block size as WxH, or auto to choose from image contrast.
    #[arg(long, default_value = "auto")]
    pub block: String,
    #[arg(long, value_enum, default_value = "strict")]
    pub mode: ModeArg,
    /// OR the results of identity, vertically and horizontally flipped scans.
    #[arg(long)]
    pub multiscan: bool,
    /// Seed the first block with its own threshold instead of the whole-image one.
    #[arg(long)]
    pub no_global_seed: bool,
    /// CSV report path (compare: method table; sweep: corpus average).
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Block sizes for sweep.
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_SWEEP_SIZES)]
    pub sizes: Vec<usize>,
}

impl Options {
    fn block(&self) -> anyhow::Result<Option<BlockDims>> {
        if self.block.eq_ignore_ascii_case("auto") {
            Ok(None)
        } else {
            Ok(Some(self.block.parse()?))
        }
    }

    fn mode(&self) -> RangeMode {
        match self.mode {
            ModeArg::Strict => RangeMode::Strict,
            ModeArg::Paper => RangeMode::Paper,
        }
    }

    /// Block method; `None` for the per-pixel Niblack baseline.
    fn block_method(&self) -> anyhow::Result<Option<ThresholdMethod>> {
        let m = match self.method {
            MethodArg::Otsu => ThresholdMethod::Otsu,
            MethodArg::Adcdf => ThresholdMethod::Adcdf { rho: self.rho },
            MethodArg::Meank => ThresholdMethod::MeanK { k: self.k },
            MethodArg::Niblack => return Ok(None),
        };
        m.validate()?;
        Ok(Some(m))
    }

    fn labt_config(&self, method: ThresholdMethod) -> anyhow::Result<LabtConfig> {
        Ok(LabtConfig {
            method,
            block: self.block()?,
            mode: self.mode(),
            seed_global: !self.no_global_seed,
        })
    }

    fn niblack(&self) -> anyhow::Result<NiblackParams> {
        Ok(NiblackParams::new(self.window, self.k)?)
    }
}

pub fn run(cli: Cli) -> anyhow::Result<()> {
    let mut stdout = std::io::stdout().lock();
    match cli.command {
        Command::Binarize(args) => cmd_binarize(&args, &mut stdout),
        Command::Compare(args) => cmd_compare(&args, &mut stdout),
        Command::Sweep(args) => cmd_sweep(&args, &mut stdout),
    }
}

fn load(path: &Path) -> anyhow::Result<GrayImage> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    read_pgm(&bytes).with_context(|| format!("parsing {}", path.display()))
}

fn save(path: &Path, img: &BinaryImage) -> anyhow::Result<()> {
    fs::write(path, write_pgm(img)).with_context(|| format!("writing {}", path.display()))
}

fn file_stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "image".into())
}

pub fn cmd_binarize(args: &CommandArgs, out: &mut impl Write) -> anyhow::Result<()> {
    let Some(output) = &args.output else {
        bail!("binarize needs an output path");
    };
    let img = load(&args.input)?;
    let opts = &args.opts;
    let Some(method) = opts.block_method()? else {
        if opts.multiscan {
            bail!("--multiscan applies to block methods, not niblack");
        }
        let binary = niblack_binarize(&img, opts.niblack()?);
        save(output, &binary)?;
        writeln!(out, "out_of_range_count=0")?;
        writeln!(out, "non_overlap_count=0")?;
        return Ok(());
    };
    let cfg = opts.labt_config(method)?;
    let (binary, primary) = if opts.multiscan {
        let res = run_multiscan(&img, &cfg)?;
        (res.combined, res.primary)
    } else {
        let res = run_labt(&img, &cfg)?;
        (res.binary.clone(), res)
    };
    save(output, &binary)?;
    writeln!(out, "block={}x{}", primary.grid.block_w, primary.grid.block_h)?;
    writeln!(out, "out_of_range_count={}", primary.out_of_range_count)?;
    writeln!(out, "non_overlap_count={}", primary.non_overlap_count)?;
    Ok(())
}

/// Metrics row for a block-threshold run.
fn labt_report(
    name: &str,
    img: &GrayImage,
    cfg: &LabtConfig,
    multiscan: bool,
) -> anyhow::Result<(MethodReport, BinaryImage)> {
    let (res, elapsed) = time_run(|| -> anyhow::Result<_> {
        if multiscan {
            let r = run_multiscan(img, cfg)?;
            Ok((r.combined, r.primary))
        } else {
            let r = run_labt(img, cfg)?;
            Ok((r.binary.clone(), r))
        }
    });
    let (binary, primary) = res?;
    let padded = pad_to_multiple(img, primary.grid.block_w, primary.grid.block_h)?.image;
    let report = MethodReport {
        method: name.to_string(),
        psnr_db: psnr(img, &binary)?,
        elapsed,
        out_of_range_count: primary.out_of_range_count,
        non_overlap_count: primary.non_overlap_count,
        mean_range_width: primary.mean_range_width(),
        continuity_violations: continuity_violations(&primary, &padded)?,
    };
    Ok((report, binary))
}

/// Metrics row for a method without blocks; ranges are unconstrained.
fn plain_report(
    name: &str,
    img: &GrayImage,
    task: impl FnOnce() -> anyhow::Result<BinaryImage>,
) -> anyhow::Result<(MethodReport, BinaryImage)> {
    let (binary, elapsed) = time_run(task);
    let binary = binary?;
    let report = MethodReport {
        method: name.to_string(),
        psnr_db: psnr(img, &binary)?,
        elapsed,
        out_of_range_count: 0,
        non_overlap_count: 0,
        mean_range_width: 256.0,
        continuity_violations: 0,
    };
    Ok((report, binary))
}

pub fn cmd_compare(args: &CommandArgs, out: &mut impl Write) -> anyhow::Result<()> {
    let img = load(&args.input)?;
    let opts = &args.opts;
    let dir = args.output.clone().unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let stem = file_stem(&args.input);

    let niblack = opts.niblack()?;
    let adcdf = ThresholdMethod::adcdf(opts.rho)?;
    let rows = vec![
        plain_report("otsu_global", &img, || {
            let t = select_threshold(ThresholdMethod::Otsu, &histogram(&img))?;
            Ok(binarize_global(&img, t))
        })?,
        plain_report("niblack", &img, || Ok(niblack_binarize(&img, niblack)))?,
        labt_report("labt_otsu", &img, &opts.labt_config(ThresholdMethod::Otsu)?, opts.multiscan)?,
        labt_report("labt_adcdf", &img, &opts.labt_config(adcdf)?, opts.multiscan)?,
    ];

    for (report, binary) in &rows {
        let path = dir.join(format!("{stem}_{}.pgm", report.method));
        save(&path, binary)?;
        writeln!(out, "{}: {}", report.method, path.display())?;
    }
    let csv_path = opts
        .csv
        .clone()
        .unwrap_or_else(|| dir.join(format!("{stem}_report.csv")));
    let reports: Vec<MethodReport> = rows.into_iter().map(|(r, _)| r).collect();
    let file = fs::File::create(&csv_path).with_context(|| format!("creating {}", csv_path.display()))?;
    write_method_reports(file, &reports)?;
    writeln!(out, "report: {}", csv_path.display())?;
    Ok(())
}

/// PGM files under `input` (or `input` itself), sorted by path.
fn collect_inputs(input: &Path) -> anyhow::Result<Vec<PathBuf>> {
    if input.is_file() {
        return Ok(vec![input.to_path_buf()]);
    }
    let entries = fs::read_dir(input).with_context(|| format!("reading {}", input.display()))?;
    let mut files = Vec::new();
    for entry in entries {
        let path = entry?.path();
        let is_pgm = path
            .extension()
            .is_some_and(|e| e.eq_ignore_ascii_case("pgm"));
        if path.is_file() && is_pgm {
            files.push(path);
        }
    }
    if files.is_empty() {
        bail!("no .pgm files in {}", input.display());
    }
    files.sort();
    Ok(files)
}

pub fn cmd_sweep(args: &CommandArgs, out: &mut impl Write) -> anyhow::Result<()> {
    let opts = &args.opts;
    let Some(method) = opts.block_method()? else {
        bail!("sweep needs a block method (otsu, adcdf or meank)");
    };
    if opts.sizes.is_empty() {
        bail!("--sizes is empty");
    }
    let template = opts.labt_config(method)?;
    let files = collect_inputs(&args.input)?;

    let per_image: Vec<Vec<SweepRow>> = files
        .par_iter()
        .map(|path| {
            let img = load(path)?;
            sweep(&img, &template, &opts.sizes).with_context(|| format!("sweeping {}", path.display()))
        })
        .collect::<anyhow::Result<_>>()?;

    let per_image_path = args.output.clone().unwrap_or_else(|| PathBuf::from("sweep.csv"));
    let avg_path = opts.csv.clone().unwrap_or_else(|| {
        per_image_path.with_file_name(format!("{}_avg.csv", file_stem(&per_image_path)))
    });

    let names: Vec<String> = files
        .iter()
        .map(|p| p.file_name().map_or_else(|| p.display().to_string(), |n| n.to_string_lossy().into_owned()))
        .collect();
    let named: Vec<(Option<&str>, SweepRow)> = names
        .iter()
        .zip(&per_image)
        .flat_map(|(name, rows)| rows.iter().map(move |r| (Some(name.as_str()), *r)))
        .collect();
    let file = fs::File::create(&per_image_path)
        .with_context(|| format!("creating {}", per_image_path.display()))?;
    write_sweep_rows(file, &named)?;

    let averaged: Vec<(Option<&str>, SweepRow)> = average_sweeps(&per_image)?
        .into_iter()
        .map(|r| (None, r))
        .collect();
    let file = fs::File::create(&avg_path).with_context(|| format!("creating {}", avg_path.display()))?;
    write_sweep_rows(file, &averaged)?;

    writeln!(out, "images={} sizes={}", files.len(), opts.sizes.len())?;
    writeln!(out, "per-image: {}", per_image_path.display())?;
    writeln!(out, "averaged: {}", avg_path.display())?;
    Ok(())
}
