//! Extractors checked against brute-force reimplementations and
//! generator ground truth.

#![allow(clippy::needless_range_loop)]

use proptest::prelude::*;
use texnoise::noise::{sample, NoiseModel};
use texnoise::synth::fbm_surface;
use texnoise::texture::cm::cm_features_quantized;
use texnoise::texture::gmrf::gmrf_features;
use texnoise::texture::rlm::rlm_features_quantized;
use texnoise::texture::{extract_all, fd, gabor, GrayQuant, QuantImage, TextureConfig};
use texnoise::Raster;

const DIRS: [(i64, i64); 4] = [(1, 0), (1, 1), (0, 1), (-1, 1)];

/// Enumerates every ordered pixel pair and keeps those at the offset.
fn brute_cm(levels: &[u16], side: usize, nlev: usize) -> Vec<f64> {
    let mut out = Vec::new();
    for (dx, dy) in DIRS {
        let mut p = vec![vec![0.0f64; nlev]; nlev];
        let mut total = 0.0;
        for i in 0..side * side {
            for j in 0..side * side {
                let (x1, y1) = ((i % side) as i64, (i / side) as i64);
                let (x2, y2) = ((j % side) as i64, (j / side) as i64);
                if x2 - x1 == dx && y2 - y1 == dy {
                    p[levels[i] as usize][levels[j] as usize] += 1.0;
                    total += 1.0;
                }
            }
        }
        let mut energy = 0.0;
        let mut entropy = 0.0;
        let mut dis = 0.0;
        let mut mx = 0.0;
        let mut my = 0.0;
        for a in 0..nlev {
            for b in 0..nlev {
                if p[a][b] == 0.0 {
                    continue;
                }
                let q = p[a][b] / total;
                energy += q * q;
                entropy -= q * q.log2();
                dis += (a as f64 - b as f64).abs() * q;
                mx += a as f64 * q;
                my += b as f64 * q;
            }
        }
        let (mut vx, mut vy, mut c) = (0.0, 0.0, 0.0);
        for a in 0..nlev {
            for b in 0..nlev {
                if p[a][b] == 0.0 {
                    continue;
                }
                let q = p[a][b] / total;
                vx += (a as f64 - mx) * (a as f64 - mx) * q;
                vy += (b as f64 - my) * (b as f64 - my) * q;
                c += (a as f64 - mx) * (b as f64 - my) * q;
            }
        }
        let corr = if vx > 0.0 && vy > 0.0 { c / (vx.sqrt() * vy.sqrt()) } else { 0.0 };
        out.extend([energy, entropy, dis, corr]);
    }
    out
}

/// Scans each pixel: a run starts where the previous pixel along the
/// direction is absent or different, then extends while the level holds.
fn brute_rlm(levels: &[u16], side: usize, nlev: usize) -> Vec<f64> {
    let s = side as i64;
    let at = |x: i64, y: i64| -> Option<u16> {
        (x >= 0 && y >= 0 && x < s && y < s).then(|| levels[(y * s + x) as usize])
    };
    let mut out = Vec::new();
    for (dx, dy) in DIRS {
        let mut runs: Vec<(usize, usize)> = Vec::new();
        for y in 0..s {
            for x in 0..s {
                let g = at(x, y).unwrap();
                if at(x - dx, y - dy) == Some(g) {
                    continue;
                }
                let mut len = 1;
                while at(x + dx * len as i64, y + dy * len as i64) == Some(g) {
                    len += 1;
                }
                runs.push((g as usize, len));
            }
        }
        let nr = runs.len() as f64;
        let mut sre = 0.0;
        let mut lre = 0.0;
        let mut per_g = vec![0.0; nlev];
        let mut per_len = vec![0.0; side];
        for g in 0..nlev {
            for len in 1..=side {
                let c = runs.iter().filter(|r| **r == (g, len)).count() as f64;
                sre += c / (len * len) as f64;
                lre += c * (len * len) as f64;
                per_g[g] += c;
            }
        }
        for (len, slot) in per_len.iter_mut().enumerate() {
            *slot = runs.iter().filter(|r| r.1 == len + 1).count() as f64;
        }
        let gln: f64 = per_g.iter().map(|c| c * c).sum();
        let rln: f64 = per_len.iter().map(|c| c * c).sum();
        out.extend([sre / nr, lre / nr, gln / nr, rln / nr]);
    }
    out
}

fn bits(v: &[f64]) -> Vec<u64> {
    v.iter().map(|x| x.to_bits()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cm_matches_pair_enumeration(levels in prop::collection::vec(0u16..4, 64)) {
        let q = QuantImage::from_levels(8, 8, 4, levels.clone()).unwrap();
        let fv = cm_features_quantized(&q, 1);
        prop_assert_eq!(bits(&fv.values), bits(&brute_cm(&levels, 8, 4)));
    }

    #[test]
    fn rlm_matches_run_scanner(levels in prop::collection::vec(0u16..4, 64)) {
        let q = QuantImage::from_levels(8, 8, 4, levels.clone()).unwrap();
        let fv = rlm_features_quantized(&q);
        let oracle = brute_rlm(&levels, 8, 4);
        for (a, b) in fv.values.iter().zip(&oracle) {
            prop_assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0), "{} vs {}", a, b);
        }
    }

    #[test]
    fn cm_transpose_swaps_axes(levels in prop::collection::vec(0u16..4, 64)) {
        let img = Raster::new(8, 8, 8, levels.iter().map(|&g| g as f64).collect()).unwrap();
        let quant = GrayQuant::new(4).unwrap();
        let a = cm_features_quantized(&quant.quantize(&img), 1);
        let b = cm_features_quantized(&quant.quantize(&img.transpose()), 1);
        for name in ["energy", "entropy", "dissimilarity", "correlation"] {
            prop_assert_eq!(a.get(&format!("{name}_0")), b.get(&format!("{name}_90")));
            prop_assert_eq!(a.get(&format!("{name}_45")), b.get(&format!("{name}_45")));
        }
    }

    #[test]
    fn gmrf_residual_variance_nonnegative(data in prop::collection::vec(0.0f64..255.0, 144)) {
        let img = Raster::new(12, 12, 8, data).unwrap();
        prop_assert!(gmrf_features(&img).unwrap().values[6] >= 0.0);
    }

    #[test]
    fn extraction_is_bitwise_deterministic(seed in 0u64..1000) {
        let roi = sample(&NoiseModel::erlang(0.5, 4).unwrap(), 32, 32, seed);
        let cfg = TextureConfig::default();
        let a = extract_all(&roi, &cfg).unwrap();
        let b = extract_all(&roi, &cfg).unwrap();
        for (x, y) in a.iter().zip(&b) {
            prop_assert_eq!(bits(&x.values), bits(&y.values));
        }
    }

    #[test]
    fn gabor_ignores_mean_offset(seed in 0u64..1000, offset in -1000.0f64..1000.0) {
        let roi = sample(&NoiseModel::gaussian(0.0, 9.0).unwrap(), 32, 32, seed);
        let a = gabor::gabor_features(&roi).unwrap();
        let b = gabor::gabor_features(&roi.map(|v| v + offset)).unwrap();
        for (x, y) in a.values.iter().zip(&b.values) {
            prop_assert!((x - y).abs() <= 1e-9 * x.abs(), "{} vs {}", x, y);
        }
    }
}

#[test]
fn mean_fd_decreases_with_hurst() {
    let mut wins = 0;
    for seed in 0..20 {
        let rough = fd::fd_features(&fbm_surface(64, 0.3, seed).unwrap()).unwrap().values[0];
        let smooth = fd::fd_features(&fbm_surface(64, 0.7, seed + 1000).unwrap()).unwrap().values[0];
        if rough > smooth {
            wins += 1;
        }
    }
    // one-sided sign test at p < 0.05 needs at least 15 of 20
    assert!(wins >= 15, "only {wins}/20 seeds ordered");
    assert_eq!(wins, 20);
}

#[test]
fn fd_tracks_each_generator_exponent() {
    for h in [0.3, 0.5, 0.7] {
        let s = fbm_surface(128, h, 77).unwrap();
        let mean = fd::fd_features(&s).unwrap().values[0];
        assert!((mean - (3.0 - h)).abs() <= 0.15, "H={h}: mean FD {mean}");
    }
}
