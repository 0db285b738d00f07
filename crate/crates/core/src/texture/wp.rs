//! Two-level wavelet packet subband energies.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::raster::Raster;

use super::{FeatureVector, Method};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Wavelet {
    Haar,
    #[default]
    Db4,
}

const HAAR: [f64; 2] = [std::f64::consts::FRAC_1_SQRT_2, std::f64::consts::FRAC_1_SQRT_2];

// Daubechies, four vanishing moments.
const DB4: [f64; 8] = [
    0.230_377_813_308_855_23,
    0.714_846_570_552_541_5,
    0.630_880_767_929_590_4,
    -0.027_983_769_416_983_85,
    -0.187_034_811_718_881_14,
    0.030_841_381_835_986_965,
    0.032_883_011_666_982_945,
    -0.010_597_401_784_997_278,
];

impl Wavelet {
    pub fn lowpass(self) -> &'static [f64] {
        match self {
            Wavelet::Haar => &HAAR,
            Wavelet::Db4 => &DB4,
        }
    }

    pub fn highpass(self) -> Vec<f64> {
        let h = self.lowpass();
        let l = h.len();
        (0..l)
            .map(|k| if k % 2 == 0 { h[l - 1 - k] } else { -h[l - 1 - k] })
            .collect()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Wavelet::Haar => "haar",
            Wavelet::Db4 => "db4",
        }
    }
}

impl fmt::Display for Wavelet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Wavelet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "haar" => Ok(Wavelet::Haar),
            "db4" => Ok(Wavelet::Db4),
            _ => Err(Error::Parse(format!("unknown wavelet {s:?}"))),
        }
    }
}

/// One periodic analysis step: returns `(approximation, detail)`.
fn analyze(signal: &[f64], lo: &[f64], hi: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = signal.len();
    let half = n / 2;
    let mut a = vec![0.0; half];
    let mut d = vec![0.0; half];
    for i in 0..half {
        for (k, (&l, &h)) in lo.iter().zip(hi).enumerate() {
            let s = signal[(2 * i + k) % n];
            a[i] += l * s;
            d[i] += h * s;
        }
    }
    (a, d)
}

/// Subband as a row-major grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Band {
    pub width: usize,
    pub height: usize,
    pub coeffs: Vec<f64>,
}

impl Band {
    pub fn energy(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum::<f64>() / self.coeffs.len() as f64
    }

    /// Splits into `[LL, LH, HL, HH]`, first letter along rows (x), second
    /// along columns (y).
    pub fn split(&self, wavelet: Wavelet) -> [Band; 4] {
        let lo = wavelet.lowpass();
        let hi = wavelet.highpass();
        let (w, h) = (self.width, self.height);
        let (hw, hh) = (w / 2, h / 2);
        let mut row_lo = vec![0.0; hw * h];
        let mut row_hi = vec![0.0; hw * h];
        for y in 0..h {
            let (a, d) = analyze(&self.coeffs[y * w..(y + 1) * w], lo, &hi);
            row_lo[y * hw..(y + 1) * hw].copy_from_slice(&a);
            row_hi[y * hw..(y + 1) * hw].copy_from_slice(&d);
        }
        let columns = |src: &[f64]| {
            let mut low = vec![0.0; hw * hh];
            let mut high = vec![0.0; hw * hh];
            let mut col = vec![0.0; h];
            for x in 0..hw {
                for (y, c) in col.iter_mut().enumerate() {
                    *c = src[y * hw + x];
                }
                let (a, d) = analyze(&col, lo, &hi);
                for y in 0..hh {
                    low[y * hw + x] = a[y];
                    high[y * hw + x] = d[y];
                }
            }
            (low, high)
        };
        let (ll, lh) = columns(&row_lo);
        let (hl, hh_) = columns(&row_hi);
        [ll, lh, hl, hh_].map(|coeffs| Band {
            width: hw,
            height: hh,
            coeffs,
        })
    }
}

/// Full two-level packet tree: `bands[p][c]` is child `c` of level-one
/// node `p`, both indexed LL, LH, HL, HH.
pub fn packet_tree(roi: &Raster, wavelet: Wavelet) -> Result<[[Band; 4]; 4]> {
    if !roi.width().is_multiple_of(4) || !roi.height().is_multiple_of(4) || roi.is_empty() {
        return Err(Error::InvalidParameter(format!(
            "wavelet packets need sides divisible by 4, got {}x{}",
            roi.width(),
            roi.height()
        )));
    }
    let root = Band {
        width: roi.width(),
        height: roi.height(),
        coeffs: roi.data().to_vec(),
    };
    Ok(root.split(wavelet).map(|b| b.split(wavelet)))
}

/// Energy of the strongest child under each level-one node, in the order
/// LL, LH, HL, HH.
pub fn wp_features(roi: &Raster, wavelet: Wavelet) -> Result<FeatureVector> {
    let tree = packet_tree(roi, wavelet)?;
    let values = tree
        .iter()
        .map(|children| children.iter().map(Band::energy).fold(0.0, f64::max))
        .collect();
    Ok(FeatureVector::new(
        Method::Wp,
        ["ll", "lh", "hl", "hh"].map(|s| format!("max_child_{s}")).to_vec(),
        values,
        false,
    ))
}
