//! Noise family identification on uniform background regions.
//!
//! The background sample's mean and variance are moment-matched to three
//! candidate densities (Gaussian, shifted Rayleigh, Erlang). Each fitted
//! density is integrated over the observed histogram's bins and compared to
//! the observed histogram with the Matusita (Hellinger) distance; the nearest
//! candidate wins.

use std::f64::consts::{PI, SQRT_2};
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, Normal};
use statrs::function::erf::erfc;
use statrs::function::gamma::{gamma_lr, ln_gamma};

use crate::error::{Error, Result};
use crate::raster::{histogram_of, moments_of, Histogram, Raster, RoiSpec};

/// Default histogram resolution used for identification.
pub const DEFAULT_BINS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NoiseFamily {
    Gaussian,
    Rayleigh,
    Erlang,
}

impl NoiseFamily {
    /// Candidate order; also the tie-break order.
    pub const ALL: [NoiseFamily; 3] = [NoiseFamily::Gaussian, NoiseFamily::Rayleigh, NoiseFamily::Erlang];

    pub fn as_str(self) -> &'static str {
        match self {
            NoiseFamily::Gaussian => "gaussian",
            NoiseFamily::Rayleigh => "rayleigh",
            NoiseFamily::Erlang => "erlang",
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for NoiseFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for NoiseFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gaussian" => Ok(NoiseFamily::Gaussian),
            "rayleigh" => Ok(NoiseFamily::Rayleigh),
            "erlang" => Ok(NoiseFamily::Erlang),
            other => Err(Error::Parse(format!("unknown noise family {other:?}"))),
        }
    }
}

/// A fully parameterized candidate noise density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseModel {
    Gaussian { mean: f64, variance: f64 },
    /// Density `(2/b)(z-a)exp(-(z-a)^2/b)` for `z >= a`.
    Rayleigh { offset: f64, scale: f64 },
    /// Density `a^b z^(b-1) e^(-az) / (b-1)!` for `z >= 0`.
    Erlang { rate: f64, shape: u32 },
}

impl NoiseModel {
    pub fn gaussian(mean: f64, variance: f64) -> Result<Self> {
        if !(variance > 0.0) || !mean.is_finite() || !variance.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "gaussian needs finite mean and variance > 0, got ({mean}, {variance})"
            )));
        }
        Ok(NoiseModel::Gaussian { mean, variance })
    }

    pub fn rayleigh(offset: f64, scale: f64) -> Result<Self> {
        if !(scale > 0.0) || !offset.is_finite() || !scale.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "rayleigh needs finite offset and scale > 0, got ({offset}, {scale})"
            )));
        }
        Ok(NoiseModel::Rayleigh { offset, scale })
    }

    pub fn erlang(rate: f64, shape: u32) -> Result<Self> {
        if !(rate > 0.0) || !rate.is_finite() || shape < 1 {
            return Err(Error::InvalidParameter(format!(
                "erlang needs rate > 0 and shape >= 1, got ({rate}, {shape})"
            )));
        }
        Ok(NoiseModel::Erlang { rate, shape })
    }

    pub fn family(&self) -> NoiseFamily {
        match self {
            NoiseModel::Gaussian { .. } => NoiseFamily::Gaussian,
            NoiseModel::Rayleigh { .. } => NoiseFamily::Rayleigh,
            NoiseModel::Erlang { .. } => NoiseFamily::Erlang,
        }
    }

    /// The two family parameters as `(a, b)`: `(mean, variance)`,
    /// `(offset, scale)` or `(rate, shape)`.
    pub fn params(&self) -> (f64, f64) {
        match *self {
            NoiseModel::Gaussian { mean, variance } => (mean, variance),
            NoiseModel::Rayleigh { offset, scale } => (offset, scale),
            NoiseModel::Erlang { rate, shape } => (rate, shape as f64),
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            NoiseModel::Gaussian { mean, .. } => mean,
            NoiseModel::Rayleigh { offset, scale } => offset + (PI * scale / 4.0).sqrt(),
            NoiseModel::Erlang { rate, shape } => shape as f64 / rate,
        }
    }

    pub fn variance(&self) -> f64 {
        match *self {
            NoiseModel::Gaussian { variance, .. } => variance,
            NoiseModel::Rayleigh { scale, .. } => scale * (4.0 - PI) / 4.0,
            NoiseModel::Erlang { rate, shape } => shape as f64 / (rate * rate),
        }
    }

    pub fn pdf(&self, z: f64) -> f64 {
        match *self {
            NoiseModel::Gaussian { mean, variance } => {
                let d = z - mean;
                (-d * d / (2.0 * variance)).exp() / (2.0 * PI * variance).sqrt()
            }
            NoiseModel::Rayleigh { offset, scale } => {
                if z < offset {
                    return 0.0;
                }
                let d = z - offset;
                2.0 / scale * d * (-d * d / scale).exp()
            }
            NoiseModel::Erlang { rate, shape } => {
                if z < 0.0 {
                    return 0.0;
                }
                if z == 0.0 {
                    return if shape == 1 { rate } else { 0.0 };
                }
                let b = shape as f64;
                (b * rate.ln() + (b - 1.0) * z.ln() - rate * z - ln_gamma(b)).exp()
            }
        }
    }

    pub fn cdf(&self, z: f64) -> f64 {
        match *self {
            NoiseModel::Gaussian { mean, variance } => {
                0.5 * erfc(-(z - mean) / (2.0 * variance).sqrt())
            }
            NoiseModel::Rayleigh { offset, scale } => {
                if z <= offset {
                    0.0
                } else {
                    let d = z - offset;
                    -(-d * d / scale).exp_m1()
                }
            }
            NoiseModel::Erlang { rate, shape } => {
                if z <= 0.0 {
                    0.0
                } else {
                    gamma_lr(shape as f64, rate * z)
                }
            }
        }
    }

    /// Probability mass of each bin of `edges`, with the tails below the
    /// first edge and above the last folded into the outermost bins so the
    /// masses sum to one.
    pub fn discretize(&self, edges: &[f64]) -> Vec<f64> {
        let n = edges.len() - 1;
        let mut cum = Vec::with_capacity(n + 1);
        cum.push(0.0);
        for &e in &edges[1..n] {
            cum.push(self.cdf(e));
        }
        cum.push(1.0);
        cum.windows(2).map(|w| (w[1] - w[0]).max(0.0)).collect()
    }
}

/// Moment-matches `family` to the given mean and variance.
pub fn fit_family(family: NoiseFamily, mu: f64, sigma2: f64) -> Result<NoiseModel> {
    if !(sigma2 > 0.0) || !mu.is_finite() || !sigma2.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "variance must be positive and finite, got {sigma2}"
        )));
    }
    match family {
        NoiseFamily::Gaussian => NoiseModel::gaussian(mu, sigma2),
        NoiseFamily::Rayleigh => {
            let scale = 4.0 * sigma2 / (4.0 - PI);
            NoiseModel::rayleigh(mu - (PI * scale / 4.0).sqrt(), scale)
        }
        NoiseFamily::Erlang => {
            if mu <= 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "erlang requires a positive mean, got {mu}"
                )));
            }
            // integer shape, then the rate is re-solved so the mean survives rounding
            let shape = (mu * mu / sigma2).round().max(1.0);
            if shape > u32::MAX as f64 {
                return Err(Error::InvalidParameter(format!(
                    "erlang shape {shape} out of range"
                )));
            }
            NoiseModel::erlang(shape / mu, shape as u32)
        }
    }
}

/// A probability mass function over an explicit bin grid.
#[derive(Debug, Clone, PartialEq)]
pub struct BinnedPmf {
    pub bin_edges: Vec<f64>,
    pub probs: Vec<f64>,
}

impl BinnedPmf {
    pub fn from_histogram(h: &Histogram) -> Self {
        BinnedPmf {
            bin_edges: h.bin_edges.clone(),
            probs: h.normalized(),
        }
    }

    pub fn from_model(model: &NoiseModel, bin_edges: &[f64]) -> Self {
        BinnedPmf {
            bin_edges: bin_edges.to_vec(),
            probs: model.discretize(bin_edges),
        }
    }
}

/// Matusita distance between two distributions on the same bin grid.
pub fn matusita(p: &BinnedPmf, q: &BinnedPmf) -> Result<f64> {
    if p.bin_edges != q.bin_edges || p.probs.len() != q.probs.len() {
        return Err(Error::GridMismatch);
    }
    matusita_probs(&p.probs, &q.probs)
}

/// Matusita distance between two probability vectors of equal length.
pub fn matusita_probs(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::GridMismatch);
    }
    let s: f64 = p
        .iter()
        .zip(q)
        .map(|(&a, &b)| {
            let d = a.max(0.0).sqrt() - b.max(0.0).sqrt();
            d * d
        })
        .sum();
    Ok(s.sqrt().min(SQRT_2))
}

/// Result of identifying the noise in a background region.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseEstimate {
    pub mu: f64,
    pub sigma2: f64,
    pub best: NoiseModel,
    /// Indexed in [`NoiseFamily::ALL`] order. Candidates that cannot be
    /// fitted (Erlang with a non-positive mean) are given the maximal
    /// distance `sqrt(2)`.
    pub distances: [f64; 3],
    pub source_roi: Option<RoiSpec>,
}

impl NoiseEstimate {
    pub fn distance(&self, family: NoiseFamily) -> f64 {
        self.distances[family.index()]
    }

    /// `case_id,family,mu,sigma2,d_gauss,d_rayleigh,d_erlang`
    pub fn csv_row(&self, case_id: &str) -> String {
        format!(
            "{case_id},{},{},{},{},{},{}",
            self.best.family(),
            self.mu,
            self.sigma2,
            self.distances[0],
            self.distances[1],
            self.distances[2]
        )
    }

    pub const CSV_HEADER: &'static str = "case_id,family,mu,sigma2,d_gauss,d_rayleigh,d_erlang";

    /// Estimate for a constant background: a point mass at `mu`, which the
    /// Gaussian limit matches exactly and the other families cannot fit.
    pub fn noise_free(mu: f64) -> Self {
        NoiseEstimate {
            mu,
            sigma2: 0.0,
            best: NoiseModel::Gaussian { mean: mu, variance: 0.0 },
            distances: [0.0, SQRT_2, SQRT_2],
            source_roi: None,
        }
    }
}

impl fmt::Display for NoiseEstimate {
    /// Key-value record: family, moments, fitted parameters and distances.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (a, b) = self.best.params();
        writeln!(f, "family = {}", self.best.family())?;
        writeln!(f, "mu = {}", self.mu)?;
        writeln!(f, "sigma2 = {}", self.sigma2)?;
        writeln!(f, "a = {a}")?;
        writeln!(f, "b = {b}")?;
        writeln!(f, "d_gauss = {}", self.distances[0])?;
        writeln!(f, "d_rayleigh = {}", self.distances[1])?;
        write!(f, "d_erlang = {}", self.distances[2])
    }
}

/// Identifies the noise family of a uniform background raster.
pub fn identify(background: &Raster, bins: usize) -> Result<NoiseEstimate> {
    identify_samples(background.data(), bins)
}

/// Identifies the noise family of an arbitrary background sample (for
/// example the unmasked pixels of a background ROI).
pub fn identify_samples(samples: &[f64], bins: usize) -> Result<NoiseEstimate> {
    let m = moments_of(samples)?;
    if m.degenerate {
        return Err(Error::DegenerateNoise);
    }
    let observed = BinnedPmf::from_histogram(&observation_grid(samples, bins)?);

    let mut distances = [SQRT_2; 3];
    let mut models: [Option<NoiseModel>; 3] = [None; 3];
    for family in NoiseFamily::ALL {
        if let Ok(model) = fit_family(family, m.mean, m.variance) {
            let expected = BinnedPmf::from_model(&model, &observed.bin_edges);
            distances[family.index()] = matusita(&observed, &expected)?;
            models[family.index()] = Some(model);
        }
    }
    // strict `<` keeps the earlier family on ties
    let mut best = NoiseFamily::Gaussian.index();
    for i in 1..3 {
        if models[i].is_some() && distances[i] < distances[best] {
            best = i;
        }
    }
    Ok(NoiseEstimate {
        mu: m.mean,
        sigma2: m.variance,
        best: models[best].expect("gaussian fit cannot fail for positive variance"),
        distances,
        source_roi: None,
    })
}

/// Bin grid for identification. Integer-valued samples spanning fewer
/// levels than `bins` get unit bins centred on the integers, so the observed
/// histogram has no empty aliasing gaps; otherwise `bins` equal-width bins
/// over `[min, max]`.
fn observation_grid(samples: &[f64], bins: usize) -> Result<Histogram> {
    let (lo, hi) = samples
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    let integral = samples.iter().all(|v| v.fract() == 0.0);
    let levels = hi - lo + 1.0;
    if integral && levels <= bins as f64 && levels >= 2.0 {
        let edges: Vec<f64> = (0..=levels as usize).map(|i| lo - 0.5 + i as f64).collect();
        Histogram::from_edges(samples, edges)
    } else {
        histogram_of(samples, bins)
    }
}

/// Draws a `width x height` field of i.i.d. samples from `model`.
pub fn sample(model: &NoiseModel, width: usize, height: usize, seed: u64) -> Raster {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = sample_values(model, width * height, &mut rng);
    Raster::new(width, height, 16, data).expect("sampled values are finite")
}

pub(crate) fn sample_values<R: Rng>(model: &NoiseModel, n: usize, rng: &mut R) -> Vec<f64> {
    match *model {
        NoiseModel::Gaussian { mean, variance } => {
            let d = Normal::new(mean, variance.sqrt()).expect("validated gaussian");
            (0..n).map(|_| d.sample(rng)).collect()
        }
        NoiseModel::Rayleigh { offset, scale } => (0..n)
            .map(|_| {
                let u: f64 = rng.random();
                offset + (-scale * (-u).ln_1p()).sqrt()
            })
            .collect(),
        NoiseModel::Erlang { rate, shape } => {
            let d = Gamma::new(shape as f64, 1.0 / rate).expect("validated erlang");
            (0..n).map(|_| d.sample(rng)).collect()
        }
    }
}
