//! PGM (P2/P5, 8 and 16 bit) and a plain-text float grid format.
//!
//! The float grid ("P2F") stores real-valued rasters such as residuals,
//! distorted images and sinograms without quantization:
//!
//! ```text
//! P2F
//! <width> <height>
//! <value> <value> ...   (row-major, one row per line)
//! ```
//!
//! Values use Rust's shortest round-trip formatting so a write/read cycle is
//! lossless.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::raster::Raster;

const FLOAT_MAGIC: &str = "P2F";

/// Reads a PGM or float grid, dispatching on the magic number.
pub fn read_raster(path: impl AsRef<Path>) -> Result<Raster> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    if bytes.starts_with(FLOAT_MAGIC.as_bytes()) {
        parse_float_grid(path, &bytes)
    } else {
        parse_pgm(path, &bytes)
    }
}

/// Writes a float grid when the extension is `.p2f`/`.txt`, otherwise binary PGM.
pub fn write_raster(path: impl AsRef<Path>, img: &Raster) -> Result<()> {
    let path = path.as_ref();
    match path.extension().and_then(|e| e.to_str()) {
        Some("p2f") | Some("txt") => write_float_grid(path, img),
        _ => write_pgm(path, img, PgmEncoding::Binary),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PgmEncoding {
    /// P2
    Ascii,
    /// P5
    Binary,
}

/// Writes `img` as PGM, rounding to the nearest integer and clamping to
/// `[0, 2^depth - 1]`. 16-bit samples are big-endian.
pub fn write_pgm(path: impl AsRef<Path>, img: &Raster, encoding: PgmEncoding) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_pgm(img, encoding)).map_err(|e| Error::io(path, e))
}

pub fn encode_pgm(img: &Raster, encoding: PgmEncoding) -> Vec<u8> {
    let maxval: u32 = if img.depth() == 8 { 255 } else { 65535 };
    let quantized = img
        .data()
        .iter()
        .map(|&v| v.round().clamp(0.0, maxval as f64) as u32);
    let magic = match encoding {
        PgmEncoding::Ascii => "P2",
        PgmEncoding::Binary => "P5",
    };
    let mut out = format!("{magic}\n{} {}\n{maxval}\n", img.width(), img.height()).into_bytes();
    match encoding {
        PgmEncoding::Ascii => {
            let mut text = String::new();
            for (i, q) in quantized.enumerate() {
                let sep = if (i + 1) % img.width() == 0 { '\n' } else { ' ' };
                let _ = write!(text, "{q}{sep}");
            }
            out.extend_from_slice(text.as_bytes());
        }
        PgmEncoding::Binary => {
            for q in quantized {
                if maxval < 256 {
                    out.push(q as u8);
                } else {
                    out.extend_from_slice(&(q as u16).to_be_bytes());
                }
            }
        }
    }
    out
}

pub fn write_float_grid(path: impl AsRef<Path>, img: &Raster) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_float_grid(img)).map_err(|e| Error::io(path, e))
}

pub fn encode_float_grid(img: &Raster) -> String {
    let mut out = format!("{FLOAT_MAGIC}\n{} {}\n", img.width(), img.height());
    for row in img.data().chunks(img.width()) {
        let mut first = true;
        for v in row {
            if !first {
                out.push(' ');
            }
            first = false;
            let _ = write!(out, "{v}");
        }
        out.push('\n');
    }
    out
}

/// Whitespace/comment aware header tokenizer shared by both formats.
struct Tokens<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Tokens<'a> {
    fn new(bytes: &'a [u8]) -> Self {
        Tokens { bytes, pos: 0 }
    }

    fn next_token(&mut self) -> Option<&'a str> {
        loop {
            while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
                self.pos += 1;
            }
            if self.pos < self.bytes.len() && self.bytes[self.pos] == b'#' {
                while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                    self.pos += 1;
                }
                continue;
            }
            break;
        }
        if self.pos >= self.bytes.len() {
            return None;
        }
        let start = self.pos;
        while self.pos < self.bytes.len() && !self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        std::str::from_utf8(&self.bytes[start..self.pos]).ok()
    }

    fn next_usize(&mut self, path: &Path, what: &str) -> Result<usize> {
        self.next_token()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| Error::format(path, format!("missing or invalid {what}")))
    }
}

fn parse_pgm(path: &Path, bytes: &[u8]) -> Result<Raster> {
    let mut tok = Tokens::new(bytes);
    let magic = tok
        .next_token()
        .ok_or_else(|| Error::format(path, "empty file"))?;
    let binary = match magic {
        "P2" => false,
        "P5" => true,
        other => return Err(Error::format(path, format!("unsupported magic {other:?}"))),
    };
    let width = tok.next_usize(path, "width")?;
    let height = tok.next_usize(path, "height")?;
    let maxval = tok.next_usize(path, "maxval")?;
    if maxval == 0 || maxval > 65535 {
        return Err(Error::format(path, format!("maxval {maxval} out of range")));
    }
    let depth = if maxval < 256 { 8 } else { 16 };
    let n = width * height;
    let mut data = Vec::with_capacity(n);
    if binary {
        // exactly one whitespace byte separates the header from the raster
        let start = tok.pos + 1;
        let bps = if maxval < 256 { 1 } else { 2 };
        let body = bytes
            .get(start..start + n * bps)
            .ok_or_else(|| Error::format(path, "truncated raster data"))?;
        if bps == 1 {
            data.extend(body.iter().map(|&b| b as f64));
        } else {
            data.extend(
                body.chunks_exact(2)
                    .map(|c| u16::from_be_bytes([c[0], c[1]]) as f64),
            );
        }
    } else {
        for i in 0..n {
            let v = tok
                .next_token()
                .and_then(|t| t.parse::<u32>().ok())
                .ok_or_else(|| Error::format(path, format!("bad or missing sample {i}")))?;
            data.push(v as f64);
        }
    }
    if let Some(i) = data.iter().position(|&v| v > maxval as f64) {
        return Err(Error::format(path, format!("sample {i} exceeds maxval")));
    }
    Raster::new(width, height, depth, data).map_err(|e| Error::format(path, e.to_string()))
}

fn parse_float_grid(path: &Path, bytes: &[u8]) -> Result<Raster> {
    let mut tok = Tokens::new(bytes);
    tok.next_token();
    let width = tok.next_usize(path, "width")?;
    let height = tok.next_usize(path, "height")?;
    let mut data = Vec::with_capacity(width * height);
    for i in 0..width * height {
        let v = tok
            .next_token()
            .and_then(|t| t.parse::<f64>().ok())
            .ok_or_else(|| Error::format(path, format!("bad or missing sample {i}")))?;
        data.push(v);
    }
    if tok.next_token().is_some() {
        return Err(Error::format(path, "trailing data after raster"));
    }
    Raster::new(width, height, 16, data).map_err(|e| Error::format(path, e.to_string()))
}

/// Reads a body mask; any nonzero pixel marks the body.
pub fn read_mask(path: impl AsRef<Path>) -> Result<Vec<bool>> {
    Ok(read_raster(path)?.data().iter().map(|&v| v != 0.0).collect())
}
