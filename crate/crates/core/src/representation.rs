//! Non-negative feature representations of raw RSS fingerprints.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataset::{is_detected, DEFAULT_MIN_RSS};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RepresentationKind {
    Positive,
    Exponential,
    Powed,
}

impl FromStr for RepresentationKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "positive" => Ok(Self::Positive),
            "exponential" => Ok(Self::Exponential),
            "powed" => Ok(Self::Powed),
            other => Err(Error::Config(format!("unknown representation `{other}`"))),
        }
    }
}

impl fmt::Display for RepresentationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Positive => "positive",
            Self::Exponential => "exponential",
            Self::Powed => "powed",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RepresentationParams {
    pub kind: RepresentationKind,
    pub min_rss: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl Default for RepresentationParams {
    fn default() -> Self {
        Self::new(RepresentationKind::Positive)
    }
}

impl RepresentationParams {
    pub fn new(kind: RepresentationKind) -> Self {
        RepresentationParams {
            kind,
            min_rss: DEFAULT_MIN_RSS,
            alpha: 24.0,
            beta: std::f64::consts::E,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.min_rss < 0.0 && self.min_rss.is_finite()) {
            return Err(Error::Config(format!("min_rss must be negative, got {}", self.min_rss)));
        }
        if !(self.alpha > 0.0 && self.beta > 0.0) {
            return Err(Error::Config("alpha and beta must be positive".into()));
        }
        Ok(())
    }

    /// Maps one detected RSS value. The caller has checked `rss >= min_rss`.
    #[inline]
    fn map(&self, rss: f64) -> f64 {
        let shifted = rss - self.min_rss;
        match self.kind {
            RepresentationKind::Positive => shifted,
            RepresentationKind::Exponential => (shifted / self.alpha).exp() / (-self.min_rss / self.alpha).exp(),
            RepresentationKind::Powed => shifted.powf(self.beta) / (-self.min_rss).powf(self.beta),
        }
    }
}

/// Transforms a raw fingerprint into a feature vector. Undetected slots map
/// to 0.0.
pub fn apply_representation(rss: &[f64], params: &RepresentationParams) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(rss.len());
    apply_representation_into(rss, params, &mut out)?;
    Ok(out)
}

/// As [`apply_representation`], reusing `out`'s allocation.
pub fn apply_representation_into(rss: &[f64], params: &RepresentationParams, out: &mut Vec<f64>) -> Result<()> {
    out.clear();
    for (slot, &v) in rss.iter().enumerate() {
        if !is_detected(v) {
            out.push(0.0);
        } else if v < params.min_rss {
            return Err(Error::RssOutOfRange {
                slot,
                value: v,
                min_rss: params.min_rss,
            });
        } else {
            out.push(params.map(v));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::NOT_DETECTED;
    use proptest::prelude::*;

    fn one(kind: RepresentationKind, rss: f64) -> f64 {
        apply_representation(&[rss], &RepresentationParams::new(kind)).unwrap()[0]
    }

    #[test]
    fn reference_points() {
        use RepresentationKind::*;
        assert_eq!(one(Positive, -104.0), 0.0);
        assert_eq!(one(Positive, -54.0), 50.0);
        assert_eq!(one(Powed, -104.0), 0.0);
        assert!((one(Powed, 0.0) - 1.0).abs() < 1e-15);
        assert!((one(Exponential, 0.0) - 1.0).abs() < 1e-15);
        for k in [Positive, Exponential, Powed] {
            assert_eq!(one(k, NOT_DETECTED), 0.0);
        }
    }

    #[test]
    fn below_min_is_a_range_error() {
        let err = apply_representation(&[-50.0, -110.0], &RepresentationParams::default()).unwrap_err();
        assert!(matches!(err, Error::RssOutOfRange { slot: 1, .. }));
    }

    #[test]
    fn names_parse() {
        assert_eq!(
            "powed".parse::<RepresentationKind>().unwrap(),
            RepresentationKind::Powed
        );
        assert!("log".parse::<RepresentationKind>().is_err());
    }

    proptest! {
        #[test]
        fn monotone_and_bounded(a in -104.0f64..0.0, b in -104.0f64..0.0, k in 0usize..3) {
            let kind = [RepresentationKind::Positive, RepresentationKind::Exponential, RepresentationKind::Powed][k];
            let (va, vb) = (one(kind, a), one(kind, b));
            if b - a > 1e-9 {
                prop_assert!(va < vb);
            }
            let upper = if kind == RepresentationKind::Positive { 104.0 } else { 1.0 };
            prop_assert!(va >= 0.0 && va <= upper + 1e-12);
        }
    }
}
