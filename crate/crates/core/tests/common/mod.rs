//! Deterministic test corpus and brute-force oracles shared by the
//! integration suites.

#![allow(dead_code)]

use labt::{GrayImage, Histogram, Label};
use num::{BigInt, BigRational, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const SIDE: usize = 512;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Synthetic,
    /// Photographs, textures and scanned pages.
    Natural,
}

pub struct Sample {
    pub name: String,
    pub kind: Kind,
    /// Invariant under both flips.
    pub flip_symmetric: bool,
    pub image: GrayImage,
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn to_u8(v: f64) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller
    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

fn from_field(side: usize, mut f: impl FnMut(usize, usize) -> f64) -> GrayImage {
    GrayImage::from_fn(side, side, |r, c| to_u8(f(r, c))).unwrap()
}

/// 3x3 box blur with clipped windows.
fn blur(img: &GrayImage) -> GrayImage {
    let (w, h) = (img.width(), img.height());
    GrayImage::from_fn(w, h, |r, c| {
        let mut s = 0u32;
        let mut n = 0u32;
        for rr in r.saturating_sub(1)..(r + 2).min(h) {
            for cc in c.saturating_sub(1)..(c + 2).min(w) {
                s += img.get(rr, cc) as u32;
                n += 1;
            }
        }
        ((s + n / 2) / n) as u8
    })
    .unwrap()
}

/// Multi-octave value noise in [0, 1] from bilinear interpolation of random lattices.
fn value_noise(side: usize, seed: u64, base_cells: usize, octaves: u32) -> Vec<f64> {
    let mut rng = rng(seed);
    let mut out = vec![0.0; side * side];
    let mut amp = 1.0;
    let mut total = 0.0;
    for o in 0..octaves {
        let cells = base_cells << o;
        let lattice: Vec<f64> = (0..(cells + 1) * (cells + 1)).map(|_| rng.gen()).collect();
        let at = |i: usize, j: usize| lattice[i * (cells + 1) + j];
        for r in 0..side {
            let y = r as f64 * cells as f64 / side as f64;
            let (i, fy) = (y.floor() as usize, y.fract());
            for c in 0..side {
                let x = c as f64 * cells as f64 / side as f64;
                let (j, fx) = (x.floor() as usize, x.fract());
                let top = at(i, j) * (1.0 - fx) + at(i, j + 1) * fx;
                let bot = at(i + 1, j) * (1.0 - fx) + at(i + 1, j + 1) * fx;
                out[r * side + c] += amp * (top * (1.0 - fy) + bot * fy);
            }
        }
        total += amp;
        amp *= 0.5;
    }
    out.iter_mut().for_each(|v| *v /= total);
    out
}

/// Dark glyph-like strokes on uneven paper with sensor noise.
fn document(side: usize, seed: u64, glyph: usize, shading: f64, noise: f64) -> GrayImage {
    let mut rng = rng(seed);
    let mut ink = vec![false; side * side];
    let line_h = glyph * 2;
    let mut top = glyph;
    while top + glyph < side - glyph {
        let mut left = glyph + rng.gen_range(0..glyph);
        while left + glyph < side - glyph {
            if rng.gen_bool(0.15) {
                left += glyph; // word gap
                continue;
            }
            let gw = rng.gen_range(glyph / 2..=glyph);
            let strokes = rng.gen_range(2..5);
            for _ in 0..strokes {
                let thick = 1 + glyph / 6;
                if rng.gen_bool(0.5) {
                    let c = left + rng.gen_range(0..gw);
                    for r in top..top + glyph {
                        for dc in 0..thick {
                            ink[r * side + (c + dc).min(side - 1)] = true;
                        }
                    }
                } else {
                    let r = top + rng.gen_range(0..glyph);
                    for c in left..left + gw {
                        for dr in 0..thick {
                            ink[(r + dr).min(side - 1) * side + c] = true;
                        }
                    }
                }
            }
            left += gw + 1 + glyph / 4;
        }
        top += line_h;
    }
    let (cx, cy) = (rng.gen_range(0.0..side as f64), rng.gen_range(0.0..side as f64));
    let img = GrayImage::from_fn(side, side, |r, c| {
        let d = ((r as f64 - cy).powi(2) + (c as f64 - cx).powi(2)).sqrt() / side as f64;
        let paper = 215.0 - shading * d;
        let base = if ink[r * side + c] { 55.0 + 0.3 * (paper - 150.0) } else { paper };
        to_u8(base + noise * gaussian(&mut rng))
    })
    .unwrap();
    blur(&img)
}

/// Smooth textured scene with a few objects of distinct brightness.
fn scene(side: usize, seed: u64, cells: usize, objects: usize) -> GrayImage {
    let noise = value_noise(side, seed, cells, 5);
    let mut rng = rng(seed ^ 0xA5A5);
    let blobs: Vec<(f64, f64, f64, f64, f64)> = (0..objects)
        .map(|_| {
            (
                rng.gen_range(0.0..side as f64),
                rng.gen_range(0.0..side as f64),
                rng.gen_range(side as f64 / 16.0..side as f64 / 4.0),
                rng.gen_range(side as f64 / 16.0..side as f64 / 4.0),
                rng.gen_range(-90.0..90.0),
            )
        })
        .collect();
    let img = GrayImage::from_fn(side, side, |r, c| {
        let mut v = 40.0 + 170.0 * noise[r * side + c];
        for &(cy, cx, ry, rx, delta) in &blobs {
            let d = ((r as f64 - cy) / ry).powi(2) + ((c as f64 - cx) / rx).powi(2);
            if d <= 1.0 {
                v += delta;
            }
        }
        to_u8(v + 4.0 * gaussian(&mut rng))
    })
    .unwrap();
    blur(&img)
}

fn mirrored(side: usize, f: impl Fn(usize, usize) -> f64) -> GrayImage {
    from_field(side, |r, c| f(r.min(side - 1 - r), c.min(side - 1 - c)))
}

pub fn synthetic(side: usize) -> Vec<Sample> {
    let s = side as f64;
    let mut out = Vec::new();
    let mut push = |name: &str, flip_symmetric: bool, image: GrayImage| {
        out.push(Sample {
            name: name.into(),
            kind: Kind::Synthetic,
            flip_symmetric,
            image,
        })
    };
    push("gradient_h", false, from_field(side, |_, c| c as f64 * 255.0 / (s - 1.0)));
    push("gradient_v", false, from_field(side, |r, _| r as f64 * 255.0 / (s - 1.0)));
    push("gradient_diag", false, from_field(side, |r, c| (r + c) as f64 * 255.0 / (2.0 * s - 2.0)));
    push("radial", true, mirrored(side, |r, c| {
        let (dy, dx) = (s / 2.0 - 0.5 - r as f64, s / 2.0 - 0.5 - c as f64);
        255.0 * (1.0 - (dy * dy + dx * dx).sqrt() / (s * 0.71))
    }));
    for seed in [1u64, 2] {
        let mut g = rng(seed);
        let px: Vec<u8> = (0..side * side).map(|_| g.gen()).collect();
        push(&format!("uniform_noise_{seed}"), false, GrayImage::from_vec(side, side, px).unwrap());
    }
    let mut g = rng(3);
    push("gaussian_noise", false, from_field(side, |_, _| 128.0 + 40.0 * gaussian(&mut g)));
    push("checker_16", false, from_field(side, |r, c| if (r / 16 + c / 16) % 2 == 0 { 40.0 } else { 210.0 }));
    push("checker_24_noisy", false, {
        let mut g = rng(4);
        from_field(side, |r, c| {
            let base = if (r / 24 + c / 24) % 2 == 0 { 70.0 } else { 180.0 };
            base + 20.0 * gaussian(&mut g)
        })
    });
    push("mirror_checker", true, mirrored(side, |r, c| if (r / 20 + c / 20) % 2 == 0 { 30.0 } else { 220.0 }));
    push("constant_0", true, GrayImage::filled(side, side, 0).unwrap());
    push("constant_137", true, GrayImage::filled(side, side, 137).unwrap());
    push("stripes", false, from_field(side, |r, c| {
        127.5 + 120.0 * ((c as f64 * 0.15).sin() * (r as f64 * 0.02).cos())
    }));
    out
}

/// Procedural document pages and textured scenes.
pub fn procedural(side: usize) -> Vec<Sample> {
    let mut out = Vec::new();
    let docs = [(11u64, 10usize, 40.0, 6.0), (12, 12, 90.0, 10.0), (13, 8, 60.0, 4.0)];
    for (seed, glyph, shading, noise) in docs {
        out.push(Sample {
            name: format!("procedural_document_{seed}"),
            kind: Kind::Synthetic,
            flip_symmetric: false,
            image: document(side, seed, glyph, shading, noise),
        });
    }
    let scenes = [(21u64, 2usize, 3usize), (22, 3, 5), (23, 4, 2)];
    for (seed, cells, objects) in scenes {
        out.push(Sample {
            name: format!("procedural_scene_{seed}"),
            kind: Kind::Synthetic,
            flip_symmetric: false,
            image: scene(side, seed, cells, objects),
        });
    }
    out
}

/// Photographs, textures and scanned text stored under `tests/data/natural`.
pub fn natural() -> Vec<Sample> {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/natural");
    let mut paths: Vec<_> = std::fs::read_dir(&dir)
        .expect("natural image fixtures")
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "pgm"))
        .collect();
    paths.sort();
    paths
        .into_iter()
        .map(|p| Sample {
            name: p.file_stem().unwrap().to_string_lossy().into_owned(),
            kind: Kind::Natural,
            flip_symmetric: false,
            image: labt::read_pgm(&std::fs::read(&p).unwrap()).unwrap(),
        })
        .collect()
}

pub fn corpus() -> Vec<Sample> {
    let mut all = synthetic(SIDE);
    all.extend(procedural(SIDE));
    all.extend(natural());
    all
}

pub fn random_image(seed: u64, w: usize, h: usize) -> GrayImage {
    let mut g = rng(seed);
    let px = (0..w * h).map(|_| g.gen()).collect();
    GrayImage::from_vec(w, h, px).unwrap()
}

pub fn seeded(seed: u64) -> ChaCha8Rng {
    rng(seed)
}

/// Exhaustive Otsu in exact rational arithmetic: maximizes
/// `w0 * w1 * (mu0 - mu1)^2` over every split `{< t | >= t}`, keeping the
/// first maximizer. A histogram with one occupied bin yields that bin.
pub fn otsu_oracle(hist: &Histogram) -> u8 {
    let counts = hist.counts();
    let occupied: Vec<usize> = (0..256).filter(|&g| counts[g] > 0).collect();
    if occupied.len() == 1 {
        return occupied[0] as u8;
    }
    let total = BigInt::from(hist.total());
    let mut best_t = 0u8;
    let mut best = BigRational::zero();
    for t in 0..=255usize {
        let (mut n0, mut s0, mut n1, mut s1) = (0u64, 0u64, 0u64, 0u64);
        for (g, &n) in counts.iter().enumerate() {
            if g < t {
                n0 += n;
                s0 += n * g as u64;
            } else {
                n1 += n;
                s1 += n * g as u64;
            }
        }
        if n0 == 0 || n1 == 0 {
            continue;
        }
        let w0 = BigRational::new(n0.into(), total.clone());
        let w1 = BigRational::new(n1.into(), total.clone());
        let mu0 = BigRational::new(s0.into(), n0.into());
        let mu1 = BigRational::new(s1.into(), n1.into());
        let diff = mu0 - mu1;
        let v = w0 * w1 * diff.clone() * diff;
        if v > best {
            best = v;
            best_t = t as u8;
        }
    }
    best_t
}

/// Maximal interval of thresholds around `t` under which every border
/// pixel keeps the label `t` gives it. In paper mode pixels equal to `t`
/// are exempt.
pub fn range_oracle(t: u8, border: &[u8], paper_mode: bool) -> (u8, u8) {
    let keeps = |cand: u8| {
        border
            .iter()
            .all(|&p| (paper_mode && p == t) || Label::classify(p, cand) == Label::classify(p, t))
    };
    let mut lo = t;
    while lo > 0 && keeps(lo - 1) {
        lo -= 1;
    }
    let mut hi = t;
    while hi < 255 && keeps(hi + 1) {
        hi += 1;
    }
    (lo, hi)
}

/// Per-pixel Niblack with an explicit window loop.
pub fn niblack_oracle(img: &GrayImage, window: usize, k: f64) -> Vec<Label> {
    let half = window / 2;
    let (w, h) = (img.width(), img.height());
    let mut out = Vec::with_capacity(w * h);
    for r in 0..h {
        for c in 0..w {
            let (mut s, mut sq, mut n) = (0u64, 0u64, 0u64);
            for rr in r.saturating_sub(half)..=(r + half).min(h - 1) {
                for cc in c.saturating_sub(half)..=(c + half).min(w - 1) {
                    let p = img.get(rr, cc) as u64;
                    s += p;
                    sq += p * p;
                    n += 1;
                }
            }
            let mean = s as f64 / n as f64;
            let var_num = n as u128 * sq as u128 - s as u128 * s as u128;
            let std = (var_num as f64 / (n as f64 * n as f64)).sqrt();
            let t = mean + k * std;
            out.push(if img.get(r, c) as f64 >= t { Label::Foreground } else { Label::Background });
        }
    }
    out
}
