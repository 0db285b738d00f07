//! Case manifest CSV: `case_id,image_path,mask_path,tumour_x,tumour_y,bg_x,bg_y,roi_side`.

use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::raster::RoiSpec;

pub const MANIFEST_HEADER: [&str; 8] = [
    "case_id",
    "image_path",
    "mask_path",
    "tumour_x",
    "tumour_y",
    "bg_x",
    "bg_y",
    "roi_side",
];

#[derive(Debug, Clone, PartialEq)]
pub struct CaseManifestEntry {
    pub case_id: String,
    pub image_path: PathBuf,
    /// Binary body mask; nonzero pixels belong to the patient.
    pub body_mask_path: Option<PathBuf>,
    pub tumour_roi: RoiSpec,
    pub background_roi: RoiSpec,
}

fn field(rec: &csv::StringRecord, i: usize, line: usize) -> Result<&str> {
    rec.get(i)
        .map(str::trim)
        .ok_or_else(|| Error::Parse(format!("manifest line {line}: missing {}", MANIFEST_HEADER[i])))
}

fn coord(rec: &csv::StringRecord, i: usize, line: usize) -> Result<usize> {
    let v = field(rec, i, line)?;
    v.parse().map_err(|_| {
        Error::Parse(format!("manifest line {line}: {} must be a non-negative integer, got {v:?}", MANIFEST_HEADER[i]))
    })
}

/// Parses manifest text. Relative paths are resolved against `base`.
pub fn parse_manifest(text: &str, base: &Path) -> Result<Vec<CaseManifestEntry>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| Error::Parse(e.to_string()))?.clone();
    if header.iter().collect::<Vec<_>>() != MANIFEST_HEADER {
        return Err(Error::Parse(format!(
            "manifest header must be {}",
            MANIFEST_HEADER.join(",")
        )));
    }
    let resolve = |p: &str| {
        let p = PathBuf::from(p);
        if p.is_relative() {
            base.join(p)
        } else {
            p
        }
    };
    let mut out = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| Error::Parse(format!("manifest line {line}: {e}")))?;
        let case_id = field(&rec, 0, line)?.to_string();
        if case_id.is_empty() {
            return Err(Error::Parse(format!("manifest line {line}: empty case_id")));
        }
        if out.iter().any(|e: &CaseManifestEntry| e.case_id == case_id) {
            return Err(Error::Parse(format!("manifest line {line}: duplicate case_id {case_id}")));
        }
        let mask = field(&rec, 2, line)?;
        let side = coord(&rec, 7, line)?;
        out.push(CaseManifestEntry {
            image_path: resolve(field(&rec, 1, line)?),
            body_mask_path: (!mask.is_empty()).then(|| resolve(mask)),
            tumour_roi: RoiSpec::tumour(coord(&rec, 3, line)?, coord(&rec, 4, line)?, side)?,
            background_roi: RoiSpec::background(coord(&rec, 5, line)?, coord(&rec, 6, line)?, side)?,
            case_id,
        });
    }
    Ok(out)
}

pub fn read_manifest(path: impl AsRef<Path>) -> Result<Vec<CaseManifestEntry>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_manifest(&text, path.parent().unwrap_or(Path::new("")))
        .map_err(|e| Error::format(path, e.to_string()))
}

/// Serializes entries; paths are written as given.
pub fn manifest_csv(entries: &[CaseManifestEntry]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(MANIFEST_HEADER).expect("in-memory write");
    for e in entries {
        let t = &e.tumour_roi;
        let b = &e.background_roi;
        w.write_record([
            e.case_id.clone(),
            e.image_path.display().to_string(),
            e.body_mask_path.as_ref().map(|p| p.display().to_string()).unwrap_or_default(),
            t.origin_x.to_string(),
            t.origin_y.to_string(),
            b.origin_x.to_string(),
            b.origin_y.to_string(),
            t.side.to_string(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
}
