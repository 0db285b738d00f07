use crate::error::{Error, Result};
use crate::raster::Raster;

/// Linear min-max gray-level quantizer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GrayQuant {
    pub levels: usize,
}

impl GrayQuant {
    pub fn new(levels: usize) -> Result<Self> {
        if !(2..=u16::MAX as usize).contains(&levels) {
            return Err(Error::InvalidParameter(format!(
                "quantization levels must be in [2, 65535], got {levels}"
            )));
        }
        Ok(GrayQuant { levels })
    }

    /// Maps `[min, max]` onto `0..levels` by `floor((v - min) / (max - min) * levels)`,
    /// with the maximum folded into the top level. A flat image maps to 0.
    pub fn quantize(&self, img: &Raster) -> QuantImage {
        let (lo, hi) = img.min_max();
        let range = hi - lo;
        let top = (self.levels - 1) as f64;
        let data = img
            .data()
            .iter()
            .map(|&v| {
                if range > 0.0 {
                    ((v - lo) / range * self.levels as f64).floor().min(top) as u16
                } else {
                    0
                }
            })
            .collect();
        QuantImage {
            width: img.width(),
            height: img.height(),
            levels: self.levels,
            data,
        }
    }
}

/// Quantized gray levels in `0..levels`, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuantImage {
    pub width: usize,
    pub height: usize,
    pub levels: usize,
    pub data: Vec<u16>,
}

impl QuantImage {
    #[inline]
    pub fn get(&self, x: usize, y: usize) -> usize {
        self.data[y * self.width + x] as usize
    }

    /// Wraps pre-quantized levels.
    pub fn from_levels(width: usize, height: usize, levels: usize, data: Vec<u16>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::InvalidParameter("level data does not match dimensions".into()));
        }
        if data.iter().any(|&g| g as usize >= levels) {
            return Err(Error::InvalidParameter("gray level out of range".into()));
        }
        Ok(QuantImage {
            width,
            height,
            levels,
            data,
        })
    }

    /// Whether `(x + dx, y + dy)` is inside the image.
    #[inline]
    pub(crate) fn step(&self, x: usize, y: usize, dx: isize, dy: isize) -> Option<(usize, usize)> {
        let nx = x as isize + dx;
        let ny = y as isize + dy;
        (nx >= 0 && ny >= 0 && (nx as usize) < self.width && (ny as usize) < self.height)
            .then_some((nx as usize, ny as usize))
    }
}
