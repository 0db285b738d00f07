//! Two-class Fisher separability and the method susceptibility ranking.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::texture::Method;

/// Relative ridge applied to the within-class scatter by default.
pub const DEFAULT_RIDGE: f64 = 1e-6;

/// Finite stand-in for unbounded separability.
pub const J_CAP: f64 = 1e12;

/// Scatter matrices of two feature classes.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatterPair {
    pub s_b: DMatrix<f64>,
    pub s_w: DMatrix<f64>,
    pub class_means: [DVector<f64>; 2],
    pub counts: [usize; 2],
}

impl ScatterPair {
    pub fn dim(&self) -> usize {
        self.s_w.nrows()
    }
}

fn to_matrix(rows: &[Vec<f64>], d: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), d, |i, j| rows[i][j])
}

fn class_mean(x: &DMatrix<f64>) -> DVector<f64> {
    x.row_mean().transpose()
}

/// Within- and between-class scatter of two classes given as rows of
/// feature vectors.
pub fn scatter(class_a: &[Vec<f64>], class_b: &[Vec<f64>]) -> Result<ScatterPair> {
    if class_a.len() < 2 || class_b.len() < 2 {
        return Err(Error::InvalidParameter("each class needs at least 2 samples".into()));
    }
    let d = class_a[0].len();
    if d == 0 || class_a.iter().chain(class_b).any(|r| r.len() != d) {
        return Err(Error::InvalidParameter("feature dimensions differ between samples".into()));
    }
    let xa = to_matrix(class_a, d);
    let xb = to_matrix(class_b, d);
    let (ma, mb) = (class_mean(&xa), class_mean(&xb));
    let (na, nb) = (class_a.len(), class_b.len());
    let pooled = (&ma * na as f64 + &mb * nb as f64) / (na + nb) as f64;

    let mut s_w = DMatrix::zeros(d, d);
    for (x, m) in [(&xa, &ma), (&xb, &mb)] {
        let mut centred = x.clone();
        for mut row in centred.row_iter_mut() {
            row -= m.transpose();
        }
        s_w += centred.transpose() * centred;
    }
    let mut s_b = DMatrix::zeros(d, d);
    for (m, n) in [(&ma, na), (&mb, nb)] {
        let diff = m - &pooled;
        s_b += &diff * diff.transpose() * n as f64;
    }
    Ok(ScatterPair {
        s_b,
        s_w,
        class_means: [ma, mb],
        counts: [na, nb],
    })
}

/// Fisher criterion value with a flag for the capped unbounded case.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fisher {
    pub j: f64,
    pub capped: bool,
}

/// `J = WᵀS_B W / WᵀS̃_W W` at the two-class discriminant
/// `W = S̃_W⁻¹(m₁ − m₂)`, where `S̃_W = S_W + ridge·tr(S_W)/d·I`.
///
/// This is the largest generalized eigenvalue of `(S_B, S̃_W)`.
pub fn fisher_j(pair: &ScatterPair, ridge: f64) -> Fisher {
    let d = pair.dim();
    let delta = &pair.class_means[0] - &pair.class_means[1];
    if delta.iter().all(|&v| v == 0.0) {
        return Fisher { j: 0.0, capped: false };
    }
    let mut s_w = pair.s_w.clone();
    let shift = ridge * s_w.trace() / d as f64;
    for i in 0..d {
        s_w[(i, i)] += shift;
    }
    let unbounded = Fisher { j: J_CAP, capped: true };
    let Some(chol) = s_w.clone().cholesky() else {
        return unbounded;
    };
    let w = chol.solve(&delta);
    let num = (w.transpose() * &pair.s_b * &w)[(0, 0)];
    let den = (w.transpose() * &s_w * &w)[(0, 0)];
    if !(den > 0.0) || !num.is_finite() {
        return unbounded;
    }
    let j = (num / den).max(0.0);
    if j >= J_CAP {
        unbounded
    } else {
        Fisher { j, capped: false }
    }
}

/// Separability of one method's original class against its clean and
/// noisy reconstructions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MethodSeparability {
    pub method: Method,
    pub j_oc: Fisher,
    pub j_on: Fisher,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeparabilityReport {
    /// One entry per method in [`Method::ALL`] order.
    pub entries: Vec<MethodSeparability>,
    /// Methods by ascending `J_oc`; least separable first.
    pub ranking_clean: Vec<Method>,
    /// Methods by ascending `J_on`.
    pub ranking_noisy: Vec<Method>,
}

fn ascending(entries: &[MethodSeparability], key: impl Fn(&MethodSeparability) -> f64) -> Vec<Method> {
    let mut v: Vec<&MethodSeparability> = entries.iter().collect();
    v.sort_by(|a, b| {
        key(a)
            .total_cmp(&key(b))
            .then_with(|| a.method.as_str().cmp(b.method.as_str()))
    });
    v.into_iter().map(|e| e.method).collect()
}

/// Orders the methods by ascending J, ties broken by method name.
pub fn rank_methods(entries: &[MethodSeparability]) -> Result<SeparabilityReport> {
    let mut ordered = Vec::with_capacity(Method::ALL.len());
    for m in Method::ALL {
        let mut found = entries.iter().filter(|e| e.method == m);
        match (found.next(), found.next()) {
            (Some(e), None) => ordered.push(*e),
            (None, _) => return Err(Error::IncompleteInput(format!("no separability for {m}"))),
            (Some(_), Some(_)) => {
                return Err(Error::InvalidParameter(format!("{m} listed more than once")))
            }
        }
    }
    Ok(SeparabilityReport {
        ranking_clean: ascending(&ordered, |e| e.j_oc.j),
        ranking_noisy: ascending(&ordered, |e| e.j_on.j),
        entries: ordered,
    })
}

impl SeparabilityReport {
    pub fn get(&self, method: Method) -> &MethodSeparability {
        self.entries.iter().find(|e| e.method == method).expect("report covers every method")
    }

    /// `method,J_oc,J_on`
    pub fn separability_csv(&self) -> String {
        let mut s = String::from("method,J_oc,J_on\n");
        for e in &self.entries {
            writeln!(s, "{},{},{}", e.method, e.j_oc.j, e.j_on.j).unwrap();
        }
        s
    }

    /// `rank,method_clean,method_noisy`
    pub fn ranking_csv(&self) -> String {
        let mut s = String::from("rank,method_clean,method_noisy\n");
        for (i, (c, n)) in self.ranking_clean.iter().zip(&self.ranking_noisy).enumerate() {
            writeln!(s, "{},{c},{n}", i + 1).unwrap();
        }
        s
    }
}
