//! Netpbm graymap (PGM) codec.
//!
//! Reads binary `P5` and ASCII `P2` graymaps with `maxval <= 255`. Samples
//! are taken as-is, without rescaling to 255. Writing always produces `P5`:
//! the ASCII header `P5\n{width} {height}\n255\n` followed by the raw
//! row-major bytes.

use std::io::Write;

use thiserror::Error;

use crate::image::Image;
use crate::GrayImage;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PgmError {
    #[error("bad magic number {0:?}, expected P2 or P5")]
    BadMagic(Vec<u8>),
    #[error("maxval {0} is outside 1..=255")]
    BadMaxval(u64),
    #[error("image dimensions must be non-zero, got {0}x{1}")]
    ZeroDimension(usize, usize),
    #[error("header ended before {0}")]
    UnexpectedEof(&'static str),
    #[error("truncated payload: expected {expected} samples, found {found}")]
    Truncated { expected: usize, found: usize },
    #[error("non-numeric token {0:?}")]
    InvalidToken(String),
    #[error("image dimensions {0}x{1} are too large")]
    TooLarge(usize, usize),
    #[error("sample {value} exceeds maxval {maxval}")]
    SampleOutOfRange { value: u64, maxval: u64 },
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn skip_space_and_comments(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' {
                while let Some(&b) = self.bytes.get(self.pos) {
                    self.pos += 1;
                    if b == b'\n' || b == b'\r' {
                        break;
                    }
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn token(&mut self) -> Option<&'a [u8]> {
        self.skip_space_and_comments();
        let start = self.pos;
        while let Some(&b) = self.bytes.get(self.pos) {
            if b.is_ascii_whitespace() || b == b'#' {
                break;
            }
            self.pos += 1;
        }
        (self.pos > start).then(|| &self.bytes[start..self.pos])
    }

    fn number(&mut self, what: &'static str) -> Result<u64, PgmError> {
        let tok = self.token().ok_or(PgmError::UnexpectedEof(what))?;
        parse_decimal(tok)
    }
}

fn parse_decimal(tok: &[u8]) -> Result<u64, PgmError> {
    let invalid = || PgmError::InvalidToken(String::from_utf8_lossy(tok).into_owned());
    if !tok.iter().all(u8::is_ascii_digit) {
        return Err(invalid());
    }
    std::str::from_utf8(tok)
        .ok()
        .and_then(|s| s.parse().ok())
        .ok_or_else(invalid)
}

/// Decodes a `P5` or `P2` graymap.
pub fn read_pgm(bytes: &[u8]) -> Result<GrayImage, PgmError> {
    let magic = bytes.get(..2).ok_or(PgmError::UnexpectedEof("magic number"))?;
    let binary = match magic {
        b"P5" => true,
        b"P2" => false,
        other => return Err(PgmError::BadMagic(other.to_vec())),
    };
    let mut cur = Cursor { bytes, pos: 2 };
    if !cur.bytes.get(2).is_some_and(|b| b.is_ascii_whitespace() || *b == b'#') {
        return Err(PgmError::BadMagic(bytes[..bytes.len().min(3)].to_vec()));
    }
    let width = cur.number("width")? as usize;
    let height = cur.number("height")? as usize;
    let maxval = cur.number("maxval")?;
    if width == 0 || height == 0 {
        return Err(PgmError::ZeroDimension(width, height));
    }
    if maxval == 0 || maxval > 255 {
        return Err(PgmError::BadMaxval(maxval));
    }
    let expected = width
        .checked_mul(height)
        .ok_or(PgmError::TooLarge(width, height))?;

    let pixels = if binary {
        // exactly one whitespace byte separates maxval from the raster
        let start = cur.pos + 1;
        let payload = bytes.get(start..).unwrap_or(&[]);
        if payload.len() < expected {
            return Err(PgmError::Truncated {
                expected,
                found: payload.len(),
            });
        }
        let payload = &payload[..expected];
        if let Some(&v) = payload.iter().find(|&&v| u64::from(v) > maxval) {
            return Err(PgmError::SampleOutOfRange {
                value: v.into(),
                maxval,
            });
        }
        payload.to_vec()
    } else {
        let mut px = Vec::with_capacity(expected);
        while px.len() < expected {
            let Some(tok) = cur.token() else {
                return Err(PgmError::Truncated {
                    expected,
                    found: px.len(),
                });
            };
            let value = parse_decimal(tok)?;
            if value > maxval {
                return Err(PgmError::SampleOutOfRange { value, maxval });
            }
            px.push(value as u8);
        }
        px
    };
    Ok(Image::from_vec(width, height, pixels).expect("dimensions validated above"))
}

/// Encodes any 8-bit-convertible image as `P5`. Binary images map
/// background to 0 and foreground to 255.
pub fn write_pgm<T: Copy + Into<u8>>(img: &Image<T>) -> Vec<u8> {
    let mut out = Vec::with_capacity(img.len() + 20);
    write!(out, "P5\n{} {}\n255\n", img.width(), img.height()).expect("writing to a Vec");
    out.extend(img.as_slice().iter().map(|&v| v.into()));
    out
}
