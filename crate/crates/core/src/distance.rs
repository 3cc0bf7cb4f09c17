//! Fingerprint distance and similarity functions, and the reference ranking
//! used by nearest-neighbor search.
//!
//! Every function returns a score where smaller means nearer. The ratio
//! family (Sørensen through Tanimoto) are monotone transforms of
//! `Σmin/Σmax`, so they order references identically on positive data.
//!
//! The log-Gaussian family (`Lgd`, `Plgd10`, `Plgd40`) works on raw dBm
//! vectors instead of represented features: a slot holding
//! [`NOT_DETECTED`](crate::dataset::NOT_DETECTED) marks a missing AP.

use std::cmp::Ordering;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataset::is_detected;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum DistanceKind {
    CityBlock,
    Euclidean,
    SquaredEuclidean,
    Sorensen,
    Soergel,
    KulczynskiD,
    KulczynskiS,
    Motyka,
    Ruzicka,
    Tanimoto,
    Neyman,
    Lgd,
    Plgd10,
    Plgd40,
}

impl DistanceKind {
    pub const ALL: [DistanceKind; 14] = [
        DistanceKind::CityBlock,
        DistanceKind::Euclidean,
        DistanceKind::SquaredEuclidean,
        DistanceKind::Sorensen,
        DistanceKind::Soergel,
        DistanceKind::KulczynskiD,
        DistanceKind::KulczynskiS,
        DistanceKind::Motyka,
        DistanceKind::Ruzicka,
        DistanceKind::Tanimoto,
        DistanceKind::Neyman,
        DistanceKind::Lgd,
        DistanceKind::Plgd10,
        DistanceKind::Plgd40,
    ];

    /// Members that rank positive vectors identically.
    pub const RATIO_FAMILY: [DistanceKind; 7] = [
        DistanceKind::Sorensen,
        DistanceKind::Soergel,
        DistanceKind::KulczynskiD,
        DistanceKind::KulczynskiS,
        DistanceKind::Motyka,
        DistanceKind::Ruzicka,
        DistanceKind::Tanimoto,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DistanceKind::CityBlock => "cityblock",
            DistanceKind::Euclidean => "euclidean",
            DistanceKind::SquaredEuclidean => "sqeuclidean",
            DistanceKind::Sorensen => "sorensen",
            DistanceKind::Soergel => "soergel",
            DistanceKind::KulczynskiD => "kulczynski_d",
            DistanceKind::KulczynskiS => "kulczynski_s",
            DistanceKind::Motyka => "motyka",
            DistanceKind::Ruzicka => "ruzicka",
            DistanceKind::Tanimoto => "tanimoto",
            DistanceKind::Neyman => "neyman",
            DistanceKind::Lgd => "lgd",
            DistanceKind::Plgd10 => "plgd10",
            DistanceKind::Plgd40 => "plgd40",
        }
    }

    /// True for the log-Gaussian family, which compares raw dBm values.
    pub fn uses_raw_rss(self) -> bool {
        matches!(self, DistanceKind::Lgd | DistanceKind::Plgd10 | DistanceKind::Plgd40)
    }

    fn default_penalty(self) -> f64 {
        match self {
            DistanceKind::Plgd10 => 10.0,
            DistanceKind::Plgd40 => 40.0,
            _ => 0.0,
        }
    }
}

impl FromStr for DistanceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        DistanceKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown distance `{s}`")))
    }
}

impl fmt::Display for DistanceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "DistanceSpecDe")]
pub struct DistanceSpec {
    pub kind: DistanceKind,
    /// Gaussian spread in dB for the log-Gaussian family.
    pub sigma: f64,
    /// Cost per AP heard in exactly one of the two scans (PLGD).
    pub penalty: f64,
    pub epsilon_guard: f64,
}

impl DistanceSpec {
    pub fn new(kind: DistanceKind) -> Self {
        DistanceSpec {
            kind,
            sigma: 6.0,
            penalty: kind.default_penalty(),
            epsilon_guard: 1e-12,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0 && self.penalty >= 0.0 && self.epsilon_guard > 0.0) {
            return Err(Error::Config(
                "distance requires sigma > 0, penalty >= 0, epsilon_guard > 0".into(),
            ));
        }
        Ok(())
    }
}

// Omitted fields fall back to the defaults of the chosen kind.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DistanceSpecDe {
    #[serde(default)]
    kind: Option<DistanceKind>,
    sigma: Option<f64>,
    penalty: Option<f64>,
    epsilon_guard: Option<f64>,
}

impl From<DistanceSpecDe> for DistanceSpec {
    fn from(d: DistanceSpecDe) -> Self {
        let base = DistanceSpec::new(d.kind.unwrap_or(DistanceKind::CityBlock));
        DistanceSpec {
            sigma: d.sigma.unwrap_or(base.sigma),
            penalty: d.penalty.unwrap_or(base.penalty),
            epsilon_guard: d.epsilon_guard.unwrap_or(base.epsilon_guard),
            ..base
        }
    }
}

impl From<DistanceKind> for String {
    fn from(k: DistanceKind) -> String {
        k.name().to_string()
    }
}

impl TryFrom<String> for DistanceKind {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl Default for DistanceSpec {
    fn default() -> Self {
        DistanceSpec::new(DistanceKind::CityBlock)
    }
}

/// Dense row-major matrix of feature vectors.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FeatureMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl FeatureMatrix {
    pub fn new(dim: usize) -> Self {
        FeatureMatrix { dim, data: Vec::new() }
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let dim = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        let mut m = FeatureMatrix::new(dim);
        for r in rows {
            m.push(r.as_ref())?;
        }
        Ok(m)
    }

    pub fn push(&mut self, row: &[f64]) -> Result<()> {
        if row.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: row.len(),
            });
        }
        self.data.extend_from_slice(row);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len().checked_div(self.dim).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim.max(1))
    }
}

/// Distance between a query `u` and a reference `v`. Argument order matters
/// for `Neyman` (query in the denominator) and is irrelevant for the rest.
pub fn distance(u: &[f64], v: &[f64], spec: &DistanceSpec) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch {
            expected: u.len(),
            actual: v.len(),
        });
    }
    Ok(distance_unchecked(u, v, spec))
}

/// [`distance`] without the length check; `u` and `v` must have equal length.
pub fn distance_unchecked(u: &[f64], v: &[f64], spec: &DistanceSpec) -> f64 {
    let eps = spec.epsilon_guard;
    match spec.kind {
        DistanceKind::CityBlock => pairs(u, v).map(|(a, b)| (a - b).abs()).sum(),
        DistanceKind::Euclidean => squared_euclidean(u, v).sqrt(),
        DistanceKind::SquaredEuclidean => squared_euclidean(u, v),
        DistanceKind::Sorensen => {
            let (diff, sum) = pairs(u, v).fold((0.0, 0.0), |(d, s), (a, b)| (d + (a - b).abs(), s + a + b));
            diff / sum.max(eps)
        }
        DistanceKind::Soergel => {
            let (diff, mx) = pairs(u, v).fold((0.0, 0.0), |(d, m), (a, b)| (d + (a - b).abs(), m + a.max(b)));
            diff / mx.max(eps)
        }
        DistanceKind::KulczynskiD => {
            let (diff, mn) = pairs(u, v).fold((0.0, 0.0), |(d, m), (a, b)| (d + (a - b).abs(), m + a.min(b)));
            diff / mn.max(eps)
        }
        DistanceKind::KulczynskiS => {
            // Reciprocal of the similarity Σmin / Σ|u−v|; identical vectors
            // have infinite similarity and distance 0.
            let (diff, mn) = pairs(u, v).fold((0.0, 0.0), |(d, m), (a, b)| (d + (a - b).abs(), m + a.min(b)));
            let similarity = mn.max(eps) / diff;
            1.0 / similarity
        }
        DistanceKind::Motyka => {
            let (mx, sum) = pairs(u, v).fold((0.0, 0.0), |(m, s), (a, b)| (m + a.max(b), s + a + b));
            mx / sum.max(eps)
        }
        DistanceKind::Ruzicka => {
            let (mn, mx) = pairs(u, v).fold((0.0, 0.0), |(n, m), (a, b)| (n + a.min(b), m + a.max(b)));
            1.0 - mn / mx.max(eps)
        }
        DistanceKind::Tanimoto => {
            let (mn, mx) = pairs(u, v).fold((0.0, 0.0), |(n, m), (a, b)| (n + a.min(b), m + a.max(b)));
            (mx - mn) / mx.max(eps)
        }
        DistanceKind::Neyman => pairs(u, v)
            .filter(|&(a, _)| a >= eps)
            .map(|(a, b)| (a - b) * (a - b) / a)
            .sum(),
        DistanceKind::Lgd | DistanceKind::Plgd10 | DistanceKind::Plgd40 => log_gaussian(u, v, spec),
    }
}

#[inline]
fn pairs<'a>(u: &'a [f64], v: &'a [f64]) -> impl Iterator<Item = (f64, f64)> + 'a {
    u.iter().copied().zip(v.iter().copied())
}

#[inline]
fn squared_euclidean(u: &[f64], v: &[f64]) -> f64 {
    pairs(u, v).map(|(a, b)| (a - b) * (a - b)).sum()
}

fn log_gaussian(u: &[f64], v: &[f64], spec: &DistanceSpec) -> f64 {
    let norm = 1.0 / (spec.sigma * (2.0 * PI).sqrt());
    let two_var = 2.0 * spec.sigma * spec.sigma;
    let mut total = 0.0;
    let mut unmatched = 0usize;
    for (a, b) in pairs(u, v) {
        match (is_detected(a), is_detected(b)) {
            (true, true) => {
                let pdf = norm * (-(a - b) * (a - b) / two_var).exp();
                total -= (pdf + spec.epsilon_guard).ln();
            }
            (false, false) => {}
            _ => unmatched += 1,
        }
    }
    total + spec.penalty * unmatched as f64
}

#[inline]
pub(crate) fn cmp_scored(a: &(f64, usize), b: &(f64, usize)) -> Ordering {
    a.0.total_cmp(&b.0).then(a.1.cmp(&b.1))
}

/// Reference indices sorted by ascending distance to `query`; ties go to the
/// lower index.
pub fn rank_references(query: &[f64], references: &FeatureMatrix, spec: &DistanceSpec) -> Result<Vec<usize>> {
    if references.is_empty() {
        return Err(Error::Empty("reference matrix"));
    }
    if query.len() != references.dim() {
        return Err(Error::DimensionMismatch {
            expected: references.dim(),
            actual: query.len(),
        });
    }
    let mut scored: Vec<(f64, usize)> = references
        .rows()
        .enumerate()
        .map(|(i, r)| (distance_unchecked(query, r, spec), i))
        .collect();
    scored.sort_by(cmp_scored);
    Ok(scored.into_iter().map(|(_, i)| i).collect())
}
