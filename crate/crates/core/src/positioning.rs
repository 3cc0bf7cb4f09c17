//! k-NN position estimation and per-dataset evaluation.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::akm::{compress_dataset, AkmConfig};
use crate::clustering::{build_clusters, ClusterSpec, ClusteredRadioMap};
use crate::dataset::{Dataset, Fingerprint, Position, Sample};
use crate::distance::{cmp_scored, distance_unchecked, DistanceSpec, FeatureMatrix};
use crate::error::{Error, Result};
use crate::representation::{apply_representation_into, RepresentationParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KnnConfig {
    pub k: usize,
    pub representation: RepresentationParams,
    pub distance: DistanceSpec,
}

impl Default for KnnConfig {
    fn default() -> Self {
        KnnConfig {
            k: 1,
            representation: RepresentationParams::default(),
            distance: DistanceSpec::default(),
        }
    }
}

impl KnnConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::Config("k must be >= 1".into()));
        }
        self.representation.validate()?;
        self.distance.validate()
    }
}

/// A radio map transformed once into the search space of a [`KnnConfig`]:
/// represented features, or raw dBm for the log-Gaussian distances.
#[derive(Debug, Clone)]
pub struct RadioMap {
    features: FeatureMatrix,
    positions: Vec<Position>,
    cfg: KnnConfig,
}

impl RadioMap {
    pub fn build(train: &[Sample], cfg: &KnnConfig) -> Result<Self> {
        cfg.validate()?;
        if train.is_empty() {
            return Err(Error::Empty("radio map"));
        }
        let dim = train[0].fingerprint.len();
        let mut features = FeatureMatrix::new(dim);
        let mut buf = Vec::with_capacity(dim);
        for s in train {
            transform_into(s.fingerprint.values(), cfg, &mut buf)?;
            features.push(&buf)?;
        }
        Ok(RadioMap {
            features,
            positions: train.iter().map(|s| s.position).collect(),
            cfg: *cfg,
        })
    }

    pub fn features(&self) -> &FeatureMatrix {
        &self.features
    }

    pub fn config(&self) -> &KnnConfig {
        &self.cfg
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Maps a raw query into this map's search space.
    pub fn transform_query(&self, rss: &[f64], out: &mut Vec<f64>) -> Result<()> {
        if rss.len() != self.features.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.features.dim(),
                actual: rss.len(),
            });
        }
        transform_into(rss, &self.cfg, out)
    }

    pub fn estimate(&self, query: &Fingerprint) -> Result<Position> {
        let mut q = Vec::with_capacity(query.len());
        self.transform_query(query.values(), &mut q)?;
        Ok(self.estimate_transformed(&q, None))
    }

    /// k-NN over `candidates` (all references when `None`) for an already
    /// transformed query.
    pub fn estimate_transformed(&self, query: &[f64], candidates: Option<&[usize]>) -> Position {
        let spec = &self.cfg.distance;
        let mut scored: Vec<(f64, usize)> = match candidates {
            Some(idx) => idx
                .iter()
                .map(|&i| (distance_unchecked(query, self.features.row(i), spec), i))
                .collect(),
            None => self
                .features
                .rows()
                .enumerate()
                .map(|(i, r)| (distance_unchecked(query, r, spec), i))
                .collect(),
        };
        let k = self.cfg.k.min(scored.len());
        if k == 1 {
            let best = scored.iter().min_by(|a, b| cmp_scored(a, b)).unwrap().1;
            return self.positions[best];
        }
        if k < scored.len() {
            scored.select_nth_unstable_by(k - 1, cmp_scored);
            scored.truncate(k);
        }
        scored.sort_by(cmp_scored);
        centroid(
            scored.iter().map(|&(_, i)| &self.positions[i]),
            self.positions[scored[0].1].floor,
        )
    }
}

fn transform_into(rss: &[f64], cfg: &KnnConfig, out: &mut Vec<f64>) -> Result<()> {
    if cfg.distance.kind.uses_raw_rss() {
        out.clear();
        out.extend_from_slice(rss);
        Ok(())
    } else {
        apply_representation_into(rss, &cfg.representation, out)
    }
}

fn centroid<'a>(positions: impl Iterator<Item = &'a Position>, floor: Option<i32>) -> Position {
    let (mut x, mut y, mut z, mut n) = (0.0, 0.0, 0.0, 0usize);
    for p in positions {
        x += p.x;
        y += p.y;
        z += p.z;
        n += 1;
    }
    let n = n as f64;
    Position::new(x / n, y / n, z / n, floor)
}

/// Unweighted k-NN estimate against the whole radio map of `dataset`.
pub fn knn_estimate(query: &Fingerprint, dataset: &Dataset, cfg: &KnnConfig) -> Result<Position> {
    RadioMap::build(&dataset.train, cfg)?.estimate(query)
}

/// Nearest-cluster search followed by k-NN inside that cluster.
pub fn clustered_estimate(query: &Fingerprint, map: &RadioMap, clustered: &ClusteredRadioMap) -> Result<Position> {
    let mut q = Vec::with_capacity(query.len());
    map.transform_query(query.values(), &mut q)?;
    clustered_estimate_transformed(&q, map, clustered).map(|(p, _)| p)
}

/// As [`clustered_estimate`] on a transformed query; also returns the number
/// of distance evaluations performed.
pub fn clustered_estimate_transformed(
    query: &[f64],
    map: &RadioMap,
    clustered: &ClusteredRadioMap,
) -> Result<(Position, usize)> {
    if clustered.is_empty() {
        return Err(Error::Empty("clustering"));
    }
    let spec = &map.cfg.distance;
    if spec.kind.uses_raw_rss() {
        return Err(Error::Unsupported(format!(
            "cluster selection with the raw-RSS distance `{}`",
            spec.kind
        )));
    }
    if clustered.source_representation != map.cfg.representation {
        return Err(Error::Config(
            "clustered radio map was built with a different representation".into(),
        ));
    }
    let mut best = (f64::INFINITY, 0usize);
    for (c, cluster) in clustered.clusters.iter().enumerate() {
        let d = distance_unchecked(query, &cluster.representative, spec);
        if d < best.0 {
            best = (d, c);
        }
    }
    let members = &clustered.clusters[best.1].member_indices;
    let evaluations = clustered.len() + members.len();
    Ok((map.estimate_transformed(query, Some(members)), evaluations))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodKind {
    PlainKnn,
    ClusteredKnn,
    Akm,
}

/// A complete positioning method as evaluated by the harness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MethodConfig {
    pub id: String,
    pub kind: MethodKind,
    #[serde(default)]
    pub knn: KnnConfig,
    #[serde(default)]
    pub cluster: Option<ClusterSpec>,
    #[serde(default)]
    pub akm: Option<AkmConfig>,
    #[serde(default)]
    pub is_baseline: bool,
}

impl MethodConfig {
    pub fn plain(id: impl Into<String>, knn: KnnConfig) -> Self {
        MethodConfig {
            id: id.into(),
            kind: MethodKind::PlainKnn,
            knn,
            cluster: None,
            akm: None,
            is_baseline: false,
        }
    }

    pub fn clustered(id: impl Into<String>, knn: KnnConfig, cluster: ClusterSpec) -> Self {
        MethodConfig {
            kind: MethodKind::ClusteredKnn,
            cluster: Some(cluster),
            ..MethodConfig::plain(id, knn)
        }
    }

    pub fn akm(id: impl Into<String>, knn: KnnConfig, akm: AkmConfig) -> Self {
        MethodConfig {
            kind: MethodKind::Akm,
            akm: Some(akm),
            ..MethodConfig::plain(id, knn)
        }
    }

    pub fn baseline(mut self) -> Self {
        self.is_baseline = true;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.knn.validate()?;
        match self.kind {
            MethodKind::PlainKnn => Ok(()),
            MethodKind::ClusteredKnn => match &self.cluster {
                Some(c) if !self.knn.distance.kind.uses_raw_rss() => c.validate(),
                Some(_) => Err(Error::Unsupported(format!(
                    "method `{}`: clustered search with the raw-RSS distance `{}`",
                    self.id, self.knn.distance.kind
                ))),
                None => Err(Error::Config(format!("method `{}` needs a cluster spec", self.id))),
            },
            MethodKind::Akm => match &self.akm {
                Some(a) => a.validate(),
                None => Err(Error::Config(format!("method `{}` needs an akm config", self.id))),
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompressionMetrics {
    pub mse_s1: f64,
    pub mse_s2: f64,
    pub cr: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    pub errors_3d: Vec<f64>,
    /// Present when every sample in the dataset carries a floor.
    pub floor_hits: Option<Vec<bool>>,
    /// Wall-clock time of the whole test sweep.
    pub elapsed_seconds: f64,
    pub trial_index: u32,
    pub compression: Option<CompressionMetrics>,
}

/// Runs `method` over the whole test set of `dataset`.
///
/// Radio-map preparation (representation, clustering, compression) happens
/// before the clock starts; the timed region covers query transform, search
/// and estimation for every test sample. Seeded methods derive their seed
/// from the configured seed plus `trial_index`.
pub fn evaluate(dataset: &Dataset, method: &MethodConfig, trial_index: u32) -> Result<TrialResult> {
    method.validate()?;
    let compressed;
    let mut compression = None;
    let data = match method.kind {
        MethodKind::Akm => {
            let cfg = method.akm.as_ref().expect("validated");
            let out = compress_dataset(dataset, cfg)?;
            compression = Some(CompressionMetrics {
                mse_s1: out.mse_s1,
                mse_s2: out.mse_s2,
                cr: out.cr,
            });
            compressed = out.dataset;
            &compressed
        }
        _ => dataset,
    };
    let map = RadioMap::build(&data.train, &method.knn)?;
    let clusters = match method.kind {
        MethodKind::ClusteredKnn => {
            let spec = method.cluster.as_ref().expect("validated");
            let spec = ClusterSpec {
                seed: spec.seed.wrapping_add(u64::from(trial_index)),
                ..spec.clone()
            };
            Some(build_clusters(data, &method.knn.representation, &spec)?)
        }
        _ => None,
    };

    let mut estimates = Vec::with_capacity(data.test.len());
    let mut q = Vec::with_capacity(data.ap_count);
    let start = Instant::now();
    for s in &data.test {
        map.transform_query(s.fingerprint.values(), &mut q)?;
        let p = match &clusters {
            Some(c) => clustered_estimate_transformed(&q, &map, c)?.0,
            None => map.estimate_transformed(&q, None),
        };
        estimates.push(p);
    }
    let elapsed_seconds = start.elapsed().as_secs_f64();

    let errors_3d = estimates
        .iter()
        .zip(&dataset.test)
        .map(|(e, s)| e.distance_3d(&s.position))
        .collect();
    let floor_hits = dataset.has_floors().then(|| {
        estimates
            .iter()
            .zip(&dataset.test)
            .map(|(e, s)| e.floor == s.position.floor)
            .collect()
    });
    Ok(TrialResult {
        errors_3d,
        floor_hits,
        elapsed_seconds,
        trial_index,
        compression,
    })
}
