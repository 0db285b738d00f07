//! End-to-end assessment: noise identification, filtering and distortion,
//! optional reconstruction, feature extraction and Fisher separability.

use std::fmt;
use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::filter::{adaptive_filter, distort, residual};
use crate::io::{read_mask, read_raster};
use crate::noise::{identify_samples, NoiseEstimate};
use crate::raster::{extract_roi, Raster};
use crate::recon::{roundtrip, ScanGeometry};
use crate::separability::{fisher_j, rank_methods, scatter, MethodSeparability, SeparabilityReport};
use crate::texture::{extract_all, normalize_features, FeatureVector, Method, FEATURE_CSV_HEADER};

use super::config::RunConfig;
use super::manifest::{read_manifest, CaseManifestEntry};

/// The three image versions compared per case.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Version {
    Original,
    Clean,
    Distorted,
}

impl Version {
    pub const ALL: [Version; 3] = [Version::Original, Version::Clean, Version::Distorted];

    pub fn as_str(self) -> &'static str {
        match self {
            Version::Original => "original",
            Version::Clean => "clean",
            Version::Distorted => "distorted",
        }
    }
}

impl fmt::Display for Version {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Everything measured on one case.
#[derive(Debug, Clone)]
pub struct CaseResult {
    pub case_id: String,
    pub noise: NoiseEstimate,
    /// Indexed by [`Version::ALL`], each in [`Method::ALL`] order.
    pub features: [Vec<FeatureVector>; 3],
}

#[derive(Debug, Clone, PartialEq)]
pub struct CaseFailure {
    pub case_id: String,
    pub message: String,
}

#[derive(Debug, Clone)]
pub struct Assessment {
    pub report: SeparabilityReport,
    /// Successful cases in manifest order.
    pub cases: Vec<CaseResult>,
    /// Skipped cases in manifest order.
    pub failures: Vec<CaseFailure>,
}

fn background_sample(img: &Raster, mask: Option<&[bool]>, entry: &CaseManifestEntry) -> Result<Vec<f64>> {
    let roi = entry.background_roi;
    extract_roi(img, &roi)?;
    let mut out = Vec::with_capacity(roi.side * roi.side);
    for y in roi.origin_y..roi.origin_y + roi.side {
        for x in roi.origin_x..roi.origin_x + roi.side {
            if !mask.is_some_and(|m| m[y * img.width() + x]) {
                out.push(img.get(x, y));
            }
        }
    }
    if out.len() < 2 {
        return Err(Error::InvalidParameter(
            "background ROI lies entirely inside the body mask".into(),
        ));
    }
    Ok(out)
}

/// Runs every per-case step for one manifest entry.
pub fn process_case(entry: &CaseManifestEntry, cfg: &RunConfig) -> Result<CaseResult> {
    let img = read_raster(&entry.image_path)?;
    let mask = match &entry.body_mask_path {
        Some(p) => {
            let m = read_mask(p)?;
            if m.len() != img.len() {
                return Err(Error::format(p, "mask size differs from the image"));
            }
            Some(m)
        }
        None => None,
    };
    extract_roi(&img, &entry.tumour_roi)?;
    let sample = background_sample(&img, mask.as_deref(), entry)?;
    let mut noise = match identify_samples(&sample, cfg.noise_bins) {
        Err(Error::DegenerateNoise) => NoiseEstimate::noise_free(sample[0]),
        other => other?,
    };
    noise.source_roi = Some(entry.background_roi);

    let clean = adaptive_filter(&img, &cfg.filter_config(noise.sigma2))?;
    let eta = residual(&img, &clean)?;
    let distorted = distort(&img, &eta)?;

    let mut versions = [img, clean, distorted];
    if let Some(filter) = cfg.recon_filter {
        let n = versions[0].width().max(versions[0].height());
        let geom = ScanGeometry::covering(n, cfg.recon_angles, cfg.detector_spacing);
        for v in versions.iter_mut() {
            *v = roundtrip(v, &geom, filter)?;
        }
    }
    let mut features: [Vec<FeatureVector>; 3] = Default::default();
    for (slot, v) in features.iter_mut().zip(&versions) {
        *slot = extract_all(&extract_roi(v, &entry.tumour_roi)?, &cfg.texture)?;
    }
    Ok(CaseResult {
        case_id: entry.case_id.clone(),
        noise,
        features,
    })
}

/// Fisher separability of `version` against the originals for `method`,
/// after z-scoring the pooled two-class sample.
fn method_j(cases: &[CaseResult], method: Method, version: Version, ridge: f64) -> Result<crate::separability::Fisher> {
    let idx = Method::ALL.iter().position(|&m| m == method).expect("known method");
    let vi = Version::ALL.iter().position(|&v| v == version).expect("known version");
    let n = cases.len();
    let pooled: Vec<Vec<f64>> = cases
        .iter()
        .map(|c| c.features[0][idx].values.clone())
        .chain(cases.iter().map(|c| c.features[vi][idx].values.clone()))
        .collect();
    let z = normalize_features(&pooled);
    let pair = scatter(&z[..n], &z[n..])?;
    Ok(fisher_j(&pair, ridge))
}

/// Separability report over already-processed cases.
pub fn separability_report(cases: &[CaseResult], ridge: f64) -> Result<SeparabilityReport> {
    if cases.len() < 2 {
        return Err(Error::IncompleteInput(format!(
            "separability needs at least 2 successful cases, got {}",
            cases.len()
        )));
    }
    let entries = Method::ALL
        .iter()
        .map(|&m| {
            Ok(MethodSeparability {
                method: m,
                j_oc: method_j(cases, m, Version::Clean, ridge)?,
                j_on: method_j(cases, m, Version::Distorted, ridge)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    rank_methods(&entries)
}

/// Processes `entries` on a pool of `cfg.worker_count()` threads. Results
/// are gathered in manifest order, so output does not depend on the
/// worker count.
pub fn assess_entries(entries: &[CaseManifestEntry], cfg: &RunConfig) -> Result<Assessment> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.worker_count())
        .build()
        .map_err(|e| Error::InvalidParameter(format!("cannot start worker pool: {e}")))?;
    let outcomes: Vec<Result<CaseResult>> =
        pool.install(|| entries.par_iter().map(|e| process_case(e, cfg)).collect());

    let mut cases = Vec::new();
    let mut failures = Vec::new();
    for (entry, outcome) in entries.iter().zip(outcomes) {
        match outcome {
            Ok(c) => cases.push(c),
            Err(e) => failures.push(CaseFailure {
                case_id: entry.case_id.clone(),
                message: e.to_string(),
            }),
        }
    }
    if cases.is_empty() {
        return Err(Error::IncompleteInput(format!(
            "no case succeeded ({} failed)",
            failures.len()
        )));
    }
    let report = separability_report(&cases, cfg.ridge)?;
    Ok(Assessment {
        report,
        cases,
        failures,
    })
}

impl Assessment {
    /// `case_id,family,mu,sigma2,d_gauss,d_rayleigh,d_erlang`
    pub fn noise_csv(&self) -> String {
        let mut s = format!("{}\n", NoiseEstimate::CSV_HEADER);
        for c in &self.cases {
            writeln!(s, "{}", c.noise.csv_row(&c.case_id)).unwrap();
        }
        s
    }

    /// `case_id,version,method,feature_name,value`
    pub fn features_csv(&self) -> String {
        let mut s = format!("{FEATURE_CSV_HEADER}\n");
        for c in &self.cases {
            for (v, fvs) in Version::ALL.iter().zip(&c.features) {
                for fv in fvs {
                    for row in fv.csv_rows(&c.case_id, v.as_str()) {
                        s.push_str(&row);
                        s.push('\n');
                    }
                }
            }
        }
        s
    }

    /// `case_id,error`
    pub fn failures_csv(&self) -> String {
        let mut s = String::from("case_id,error\n");
        for f in &self.failures {
            let msg = f.message.replace('"', "'");
            writeln!(s, "{},\"{msg}\"", f.case_id).unwrap();
        }
        s
    }

    /// Writes the report CSVs into `dir`.
    pub fn write(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for (name, body) in [
            (OUTPUT_FILES[0], self.report.separability_csv()),
            (OUTPUT_FILES[1], self.report.ranking_csv()),
            (OUTPUT_FILES[2], self.noise_csv()),
            (OUTPUT_FILES[3], self.features_csv()),
            (OUTPUT_FILES[4], self.failures_csv()),
        ] {
            let p = dir.join(name);
            std::fs::write(&p, body).map_err(|e| Error::io(&p, e))?;
        }
        Ok(())
    }
}

/// Files written by [`Assessment::write`].
pub const OUTPUT_FILES: [&str; 5] = [
    "separability.csv",
    "ranking.csv",
    "noise.csv",
    "features.csv",
    "failures.csv",
];

/// Reads the manifest named in `cfg`, assesses every case and writes the
/// reports to `cfg.output_dir`.
pub fn run_assessment(cfg: &RunConfig) -> Result<Assessment> {
    let entries = read_manifest(&cfg.manifest)?;
    if entries.is_empty() {
        return Err(Error::IncompleteInput("manifest lists no cases".into()));
    }
    let out = assess_entries(&entries, cfg)?;
    out.write(&cfg.output_dir)?;
    Ok(out)
}
