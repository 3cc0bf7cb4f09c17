//! Clustered radio maps for cluster-restricted nearest-neighbor search.
//!
//! All algorithms work in representation space with Euclidean geometry.
//! Partitions are deterministic given [`ClusterSpec::seed`].

mod affinity;
mod cmeans;
mod dbscan;
mod kmeans;
mod kmedoids;

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::distance::FeatureMatrix;
use crate::error::{Error, Result};
use crate::representation::{apply_representation, RepresentationParams};

pub use affinity::affinity_propagation;
pub use cmeans::fuzzy_cmeans;
pub use dbscan::{dbscan, default_eps};
pub use kmeans::kmeans;
pub use kmedoids::kmedoids;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClusterAlgo {
    KMeans,
    KMedoids,
    CMeans,
    #[serde(rename = "affinity")]
    AffinityPropagation,
    Dbscan,
}

impl FromStr for ClusterAlgo {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "kmeans" => Ok(ClusterAlgo::KMeans),
            "kmedoids" => Ok(ClusterAlgo::KMedoids),
            "cmeans" => Ok(ClusterAlgo::CMeans),
            "affinity" => Ok(ClusterAlgo::AffinityPropagation),
            "dbscan" => Ok(ClusterAlgo::Dbscan),
            other => Err(Error::Config(format!("unknown clustering algorithm `{other}`"))),
        }
    }
}

/// How many clusters to request from the count-driven algorithms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum CountRule {
    Fixed(usize),
    /// √(radio-map size)
    Rfp1,
    /// radio-map size / 25
    Rfp2,
}

impl FromStr for CountRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rfp1" => Ok(CountRule::Rfp1),
            "rfp2" => Ok(CountRule::Rfp2),
            _ => s
                .strip_prefix("fixed:")
                .and_then(|n| n.parse::<usize>().ok())
                .filter(|&n| n >= 1)
                .map(CountRule::Fixed)
                .ok_or_else(|| Error::Config(format!("invalid count rule `{s}` (fixed:N, rfp1, rfp2)"))),
        }
    }
}

impl TryFrom<String> for CountRule {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<CountRule> for String {
    fn from(r: CountRule) -> String {
        r.to_string()
    }
}

impl fmt::Display for CountRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CountRule::Fixed(n) => write!(f, "fixed:{n}"),
            CountRule::Rfp1 => f.write_str("rfp1"),
            CountRule::Rfp2 => f.write_str("rfp2"),
        }
    }
}

pub fn cluster_count(rule: CountRule, n_train: usize) -> usize {
    let n = n_train.max(1);
    match rule {
        CountRule::Fixed(k) => k.min(n).max(1),
        CountRule::Rfp1 => ((n as f64).sqrt().round() as usize).max(1),
        CountRule::Rfp2 => ((n as f64 / 25.0).round() as usize).max(1),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClusterSpec {
    pub algo: ClusterAlgo,
    pub count_rule: CountRule,
    /// Fuzzifier for c-Means.
    pub fuzz_m: f64,
    /// Affinity Propagation damping.
    pub damping: f64,
    /// Defaults to 100, or 200 for Affinity Propagation.
    pub max_iter: Option<usize>,
    pub tol: f64,
    /// DBSCAN radius; defaults to the median 4-NN distance.
    pub eps: Option<f64>,
    pub min_pts: usize,
    pub seed: u64,
}

impl Default for ClusterSpec {
    fn default() -> Self {
        ClusterSpec {
            algo: ClusterAlgo::KMeans,
            count_rule: CountRule::Rfp1,
            fuzz_m: 2.0,
            damping: 0.9,
            max_iter: None,
            tol: 1e-4,
            eps: None,
            min_pts: 5,
            seed: 0,
        }
    }
}

impl ClusterSpec {
    pub fn new(algo: ClusterAlgo, count_rule: CountRule) -> Self {
        ClusterSpec {
            algo,
            count_rule,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(format!("cluster spec: {m}")));
        if let CountRule::Fixed(0) = self.count_rule {
            return bad("fixed cluster count must be >= 1".into());
        }
        if !(self.fuzz_m > 1.0) {
            return bad(format!("fuzz_m must be > 1, got {}", self.fuzz_m));
        }
        if !(self.damping > 0.5 && self.damping < 1.0) {
            return bad(format!("damping must lie in (0.5, 1), got {}", self.damping));
        }
        if self.max_iter == Some(0) || self.min_pts == 0 || !(self.tol >= 0.0) {
            return bad("max_iter and min_pts must be positive, tol non-negative".into());
        }
        if let Some(eps) = self.eps {
            if !(eps > 0.0) {
                return bad(format!("eps must be positive, got {eps}"));
            }
        }
        Ok(())
    }

    pub fn max_iter(&self) -> usize {
        self.max_iter.unwrap_or(match self.algo {
            ClusterAlgo::AffinityPropagation => 200,
            _ => 100,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    pub representative: Vec<f64>,
    pub member_indices: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusteredRadioMap {
    pub clusters: Vec<Cluster>,
    pub source_representation: RepresentationParams,
    /// False when the algorithm hit `max_iter` before converging.
    pub converged: bool,
}

impl ClusteredRadioMap {
    pub fn len(&self) -> usize {
        self.clusters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }

    pub fn max_cluster_size(&self) -> usize {
        self.clusters.iter().map(|c| c.member_indices.len()).max().unwrap_or(0)
    }

    /// One cluster holding every training index, represented by the mean.
    pub fn single(features: &FeatureMatrix, representation: RepresentationParams) -> Self {
        let members: Vec<usize> = (0..features.len()).collect();
        ClusteredRadioMap {
            clusters: vec![Cluster {
                representative: mean_of(features, &members),
                member_indices: members,
            }],
            source_representation: representation,
            converged: true,
        }
    }
}

/// Raw output of one clustering algorithm before assembly.
pub struct Partition {
    pub labels: Vec<usize>,
    /// Row index to use as representative, per label, for exemplar-based
    /// algorithms. `None` means the member mean.
    pub exemplars: Option<Vec<usize>>,
    pub converged: bool,
}

pub fn build_clusters(dataset: &Dataset, repr: &RepresentationParams, spec: &ClusterSpec) -> Result<ClusteredRadioMap> {
    if dataset.train.is_empty() {
        return Err(Error::Empty("training set"));
    }
    let rows = dataset
        .train
        .iter()
        .map(|s| apply_representation(s.fingerprint.values(), repr))
        .collect::<Result<Vec<_>>>()?;
    let features = FeatureMatrix::from_rows(&rows)?;
    cluster_features(&features, *repr, spec)
}

/// Clusters an already represented radio map.
pub fn cluster_features(
    features: &FeatureMatrix,
    representation: RepresentationParams,
    spec: &ClusterSpec,
) -> Result<ClusteredRadioMap> {
    spec.validate()?;
    let n = features.len();
    if n == 0 {
        return Err(Error::Empty("training set"));
    }
    if all_identical(features) {
        return Ok(ClusteredRadioMap::single(features, representation));
    }
    let k = cluster_count(spec.count_rule, n);
    let partition = match spec.algo {
        ClusterAlgo::KMeans => kmeans(features, k, spec.max_iter(), spec.tol, spec.seed),
        ClusterAlgo::KMedoids => kmedoids(features, k, spec.max_iter(), spec.seed),
        ClusterAlgo::CMeans => fuzzy_cmeans(features, k, spec.fuzz_m, spec.max_iter(), spec.tol, spec.seed),
        ClusterAlgo::AffinityPropagation => affinity_propagation(features, spec.damping, spec.max_iter(), spec.seed),
        ClusterAlgo::Dbscan => {
            let eps = spec.eps.unwrap_or_else(|| default_eps(features));
            dbscan(features, eps, spec.min_pts)
        }
    };
    Ok(assemble(features, representation, partition))
}

fn assemble(features: &FeatureMatrix, representation: RepresentationParams, partition: Partition) -> ClusteredRadioMap {
    let n_labels = partition.labels.iter().copied().max().map_or(0, |m| m + 1);
    let mut members = vec![Vec::new(); n_labels];
    for (i, &l) in partition.labels.iter().enumerate() {
        members[l].push(i);
    }
    let clusters = members
        .into_iter()
        .enumerate()
        .filter(|(_, m)| !m.is_empty())
        .map(|(label, member_indices)| {
            let representative = match &partition.exemplars {
                Some(ex) => features.row(ex[label]).to_vec(),
                None => mean_of(features, &member_indices),
            };
            Cluster {
                representative,
                member_indices,
            }
        })
        .collect();
    ClusteredRadioMap {
        clusters,
        source_representation: representation,
        converged: partition.converged,
    }
}

pub(crate) fn mean_of(features: &FeatureMatrix, members: &[usize]) -> Vec<f64> {
    let mut acc = vec![0.0; features.dim()];
    for &i in members {
        for (a, x) in acc.iter_mut().zip(features.row(i)) {
            *a += x;
        }
    }
    let n = members.len().max(1) as f64;
    acc.iter_mut().for_each(|a| *a /= n);
    acc
}

fn all_identical(features: &FeatureMatrix) -> bool {
    let first = features.row(0);
    features.rows().all(|r| r == first)
}

#[inline]
pub(crate) fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Index of the nearest center; ties go to the lower index.
pub(crate) fn nearest(point: &[f64], centers: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (j, c) in centers.iter().enumerate() {
        let d = sq_dist(point, c);
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

/// k-means++ seeding. Returns at most `k` distinct row indices; fewer when
/// the data has fewer distinct points.
pub(crate) fn kmeanspp(features: &FeatureMatrix, k: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let n = features.len();
    let mut chosen = vec![rng.gen_range(0..n)];
    let mut d2: Vec<f64> = features.rows().map(|r| sq_dist(r, features.row(chosen[0]))).collect();
    while chosen.len() < k {
        let total: f64 = d2.iter().sum();
        if !(total > 0.0) {
            break;
        }
        let mut target = rng.gen_range(0.0..total);
        let mut pick = n - 1;
        for (i, &w) in d2.iter().enumerate() {
            if target < w {
                pick = i;
                break;
            }
            target -= w;
        }
        if d2[pick] == 0.0 {
            // Floating-point overshoot landed on an already covered point.
            pick = d2
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.total_cmp(b.1).then(b.0.cmp(&a.0)))
                .map(|(i, _)| i)
                .unwrap();
        }
        chosen.push(pick);
        let c = features.row(pick);
        for (i, r) in features.rows().enumerate() {
            d2[i] = d2[i].min(sq_dist(r, c));
        }
    }
    chosen
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{generate_synthetic, SyntheticConfig};

    fn line(points: &[f64]) -> FeatureMatrix {
        FeatureMatrix::from_rows(&points.iter().map(|&p| vec![p]).collect::<Vec<_>>()).unwrap()
    }

    // SSE of a 1-D partition given as labels.
    fn sse(points: &[f64], labels: &[usize], k: usize) -> f64 {
        (0..k)
            .map(|c| {
                let m: Vec<f64> = points
                    .iter()
                    .zip(labels)
                    .filter(|(_, &l)| l == c)
                    .map(|(&p, _)| p)
                    .collect();
                if m.is_empty() {
                    return 0.0;
                }
                let mean = m.iter().sum::<f64>() / m.len() as f64;
                m.iter().map(|x| (x - mean).powi(2)).sum::<f64>()
            })
            .sum()
    }

    #[test]
    fn count_rules() {
        assert_eq!(cluster_count(CountRule::Rfp1, 100), 10);
        assert_eq!(cluster_count(CountRule::Rfp2, 1000), 40);
        assert_eq!(cluster_count(CountRule::Rfp1, 150), 12);
        assert_eq!(cluster_count(CountRule::Rfp2, 10), 1);
        assert_eq!(cluster_count(CountRule::Fixed(25), 7), 7);
        assert_eq!(cluster_count(CountRule::Fixed(25), 700), 25);
    }

    #[test]
    fn count_rule_names() {
        assert_eq!("fixed:25".parse::<CountRule>().unwrap(), CountRule::Fixed(25));
        assert_eq!("rfp2".parse::<CountRule>().unwrap(), CountRule::Rfp2);
        assert!("fixed:0".parse::<CountRule>().is_err());
        assert!("sqrt".parse::<CountRule>().is_err());
        assert_eq!(CountRule::Fixed(3).to_string(), "fixed:3");
    }

    #[test]
    fn kmeans_matches_best_two_partition() {
        let pts = [0.0, 0.1, 10.0, 10.1];
        // Exhaustive search over all 2-labelings.
        let best = (1..(1u32 << pts.len()) - 1)
            .map(|mask| {
                let labels: Vec<usize> = (0..pts.len()).map(|i| ((mask >> i) & 1) as usize).collect();
                (sse(&pts, &labels, 2), labels)
            })
            .min_by(|a, b| a.0.total_cmp(&b.0))
            .unwrap();
        let spec = ClusterSpec::new(ClusterAlgo::KMeans, CountRule::Fixed(2));
        for seed in 0..10 {
            let map = cluster_features(
                &line(&pts),
                RepresentationParams::default(),
                &ClusterSpec { seed, ..spec.clone() },
            )
            .unwrap();
            let mut groups: Vec<Vec<usize>> = map.clusters.iter().map(|c| c.member_indices.clone()).collect();
            groups.sort();
            assert_eq!(groups, vec![vec![0, 1], vec![2, 3]]);
            let labels: Vec<usize> = (0..4).map(|i| usize::from(i >= 2)).collect();
            assert!((sse(&pts, &labels, 2) - best.0).abs() < 1e-12);
        }
    }

    #[test]
    fn kmedoids_picks_min_sum_point() {
        let pts = [0.0, 2.0, 5.0];
        // Summed distances: 7, 5, 8.
        let spec = ClusterSpec::new(ClusterAlgo::KMedoids, CountRule::Fixed(1));
        let map = cluster_features(&line(&pts), RepresentationParams::default(), &spec).unwrap();
        assert_eq!(map.clusters.len(), 1);
        assert_eq!(map.clusters[0].representative, vec![2.0]);
    }

    #[test]
    fn fixed_one_is_single_cluster() {
        let ds = generate_synthetic(&SyntheticConfig {
            train_count: 60,
            test_count: 5,
            ..Default::default()
        })
        .unwrap();
        for algo in [ClusterAlgo::KMeans, ClusterAlgo::KMedoids, ClusterAlgo::CMeans] {
            let map = build_clusters(
                &ds,
                &RepresentationParams::default(),
                &ClusterSpec::new(algo, CountRule::Fixed(1)),
            )
            .unwrap();
            assert_eq!(map.len(), 1);
            assert_eq!(map.clusters[0].member_indices, (0..60).collect::<Vec<_>>());
        }
    }

    #[test]
    fn identical_points_make_one_cluster() {
        let m = line(&[3.0; 8]);
        for algo in [
            ClusterAlgo::KMeans,
            ClusterAlgo::KMedoids,
            ClusterAlgo::CMeans,
            ClusterAlgo::AffinityPropagation,
            ClusterAlgo::Dbscan,
        ] {
            let map = cluster_features(
                &m,
                RepresentationParams::default(),
                &ClusterSpec::new(algo, CountRule::Fixed(3)),
            )
            .unwrap();
            assert_eq!(map.len(), 1, "{algo:?}");
        }
    }

    #[test]
    fn every_algorithm_partitions_and_is_deterministic() {
        let ds = generate_synthetic(&SyntheticConfig {
            train_count: 150,
            test_count: 5,
            ..Default::default()
        })
        .unwrap();
        let repr = RepresentationParams::default();
        for algo in [
            ClusterAlgo::KMeans,
            ClusterAlgo::KMedoids,
            ClusterAlgo::CMeans,
            ClusterAlgo::AffinityPropagation,
            ClusterAlgo::Dbscan,
        ] {
            let spec = ClusterSpec {
                seed: 9,
                ..ClusterSpec::new(algo, CountRule::Rfp1)
            };
            let a = build_clusters(&ds, &repr, &spec).unwrap();
            let b = build_clusters(&ds, &repr, &spec).unwrap();
            assert_eq!(a, b, "{algo:?}");
            let mut seen = vec![0u32; ds.train.len()];
            for c in &a.clusters {
                assert!(!c.member_indices.is_empty());
                assert_eq!(c.representative.len(), ds.ap_count);
                for &i in &c.member_indices {
                    seen[i] += 1;
                }
            }
            assert!(seen.iter().all(|&s| s == 1), "{algo:?} is not a partition");
        }
    }

    #[test]
    fn invalid_specs_rejected() {
        let m = line(&[0.0, 1.0]);
        let repr = RepresentationParams::default();
        let bad = [
            ClusterSpec {
                fuzz_m: 1.0,
                ..Default::default()
            },
            ClusterSpec {
                damping: 0.4,
                ..Default::default()
            },
            ClusterSpec {
                eps: Some(0.0),
                ..Default::default()
            },
        ];
        for spec in bad {
            assert!(cluster_features(&m, repr, &spec).is_err());
        }
    }
}
