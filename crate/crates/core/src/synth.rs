//! Spectral synthesis of random textures with known generating parameters.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::fft2::{bin_frequency, fft2, C64};
use crate::raster::Raster;
use crate::texture::gmrf::PAIR_OFFSETS;

fn white_spectrum(width: usize, height: usize, seed: u64) -> Vec<C64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut buf: Vec<C64> = (0..width * height)
        .map(|_| C64::new(StandardNormal.sample(&mut rng), 0.0))
        .collect();
    fft2(&mut buf, width, height, false);
    buf
}

fn shape_spectrum(
    width: usize,
    height: usize,
    seed: u64,
    amplitude: impl Fn(f64, f64) -> f64,
) -> Raster {
    let mut buf = white_spectrum(width, height, seed);
    for v in 0..height {
        let fv = bin_frequency(v, height);
        for u in 0..width {
            buf[v * width + u] *= amplitude(bin_frequency(u, width), fv);
        }
    }
    fft2(&mut buf, width, height, true);
    let n = (width * height) as f64;
    Raster::new(width, height, 16, buf.iter().map(|c| c.re / n).collect())
        .expect("synthesized field is finite")
}

/// Periodic conditional autoregressive field on an `n × n` torus whose
/// conditional mean is `Σ αₗ sₗ` over the six symmetric pairs and whose
/// conditional variance is `innovation`.
///
/// Fails when the coefficients do not give a positive spectrum.
pub fn gmrf_field(n: usize, alphas: [f64; 6], innovation: f64, seed: u64) -> Result<Raster> {
    if n < 4 || !(innovation > 0.0) {
        return Err(Error::InvalidParameter("GMRF field needs n ≥ 4 and innovation > 0".into()));
    }
    let denom = |u: f64, v: f64| {
        1.0 - 2.0
            * alphas
                .iter()
                .zip(&PAIR_OFFSETS)
                .map(|(a, &(dx, dy))| a * (2.0 * PI * (u * dx as f64 + v * dy as f64)).cos())
                .sum::<f64>()
    };
    let mut min_denom = f64::INFINITY;
    for v in 0..n {
        for u in 0..n {
            min_denom = min_denom.min(denom(bin_frequency(u, n), bin_frequency(v, n)));
        }
    }
    if min_denom <= 1e-9 {
        return Err(Error::InvalidParameter(format!(
            "GMRF coefficients {alphas:?} are not positive definite"
        )));
    }
    Ok(shape_spectrum(n, n, seed, |u, v| (innovation / denom(u, v)).sqrt()))
}

/// Periodic fractional Brownian surface with Hurst exponent `hurst`,
/// power spectrum ∝ |k|^−(2H+2), zero mean and unit variance.
pub fn fbm_surface(n: usize, hurst: f64, seed: u64) -> Result<Raster> {
    if n < 4 || !(hurst > 0.0 && hurst < 1.0) {
        return Err(Error::InvalidParameter(format!("fBm needs n ≥ 4 and H in (0,1), got H={hurst}")));
    }
    let field = shape_spectrum(n, n, seed, |u, v| {
        let k = (u * u + v * v).sqrt();
        if k == 0.0 {
            0.0
        } else {
            k.powf(-(hurst + 1.0))
        }
    });
    let mean = field.data().iter().sum::<f64>() / field.len() as f64;
    let sd = (field.data().iter().map(|v| (v - mean).powi(2)).sum::<f64>() / field.len() as f64).sqrt();
    Ok(field.map(|v| (v - mean) / sd))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fields_are_deterministic() {
        let a = fbm_surface(32, 0.5, 4).unwrap();
        assert_eq!(a, fbm_surface(32, 0.5, 4).unwrap());
        assert_ne!(a, fbm_surface(32, 0.5, 5).unwrap());
    }

    #[test]
    fn white_field_has_innovation_variance() {
        let f = gmrf_field(128, [0.0; 6], 4.0, 1).unwrap();
        let m = crate::raster::moments(&f).unwrap();
        assert!((m.variance - 4.0).abs() < 0.3, "{}", m.variance);
    }

    #[test]
    fn positive_coefficient_correlates_neighbours() {
        let f = gmrf_field(128, [0.2, 0.0, 0.0, 0.0, 0.0, 0.0], 1.0, 2).unwrap();
        let (mut num, mut den) = (0.0, 0.0);
        for y in 0..128 {
            for x in 0..127 {
                num += f.get(x, y) * f.get(x + 1, y);
                den += f.get(x, y) * f.get(x, y);
            }
        }
        assert!(num / den > 0.15);
    }

    #[test]
    fn rejects_invalid_parameters() {
        assert!(gmrf_field(32, [0.3, 0.3, 0.0, 0.0, 0.0, 0.0], 1.0, 0).is_err());
        assert!(fbm_surface(32, 1.0, 0).is_err());
    }
}
