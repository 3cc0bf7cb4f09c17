//! Adaptive k-Means (AkM) compression of RSS values.
//!
//! Stage 1 clusters every detected training RSS value into `K` one-dimensional
//! clusters with an exact dynamic program. Stage 2 shifts each centroid by
//! folding in the test values that fall nearest to it. Undetected slots are
//! carried through untouched.

use serde::{Deserialize, Serialize};

use crate::dataset::{is_detected, Dataset, Fingerprint, Sample};
use crate::error::{Error, Result};
use crate::positioning::{KnnConfig, RadioMap};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AkmConfig {
    #[serde(rename = "k")]
    pub k_clusters: usize,
    #[serde(default = "default_bits")]
    pub original_bits: u32,
}

fn default_bits() -> u32 {
    7
}

impl AkmConfig {
    pub fn new(k_clusters: usize) -> Self {
        AkmConfig {
            k_clusters,
            original_bits: default_bits(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k_clusters < 2 {
            return Err(Error::Config(format!("AkM needs K >= 2, got {}", self.k_clusters)));
        }
        if self.original_bits == 0 {
            return Err(Error::Config("original_bits must be positive".into()));
        }
        Ok(())
    }
}

/// Bits needed to index `k` centroids.
pub fn index_bits(k: usize) -> u32 {
    debug_assert!(k >= 2);
    usize::BITS - (k - 1).leading_zeros()
}

/// Original bits per value over compressed bits per value.
pub fn compression_ratio(k: usize, original_bits: u32) -> f64 {
    f64::from(original_bits) / f64::from(index_bits(k))
}

/// Stage-1 clustering of the flattened training values.
#[derive(Debug, Clone, PartialEq)]
pub struct Stage1 {
    /// Strictly increasing.
    pub centroids: Vec<f64>,
    pub counts: Vec<usize>,
    pub sums: Vec<f64>,
    /// Within-cluster sum of squares of the training values.
    pub sse: f64,
    /// True when fewer distinct values than requested clusters were available.
    pub reduced: bool,
}

/// Optimal 1-D K-clustering (minimum SSE) of `values`. Values equal to the
/// not-detected sentinel are ignored.
pub fn akm_stage1(values: &[f64], k: usize) -> Result<Stage1> {
    if k == 0 {
        return Err(Error::Config("K must be positive".into()));
    }
    let mut sorted: Vec<f64> = values.iter().copied().filter(|&v| is_detected(v)).collect();
    if sorted.is_empty() {
        return Err(Error::Empty("detected RSS values"));
    }
    sorted.sort_by(f64::total_cmp);
    let mut xs: Vec<f64> = Vec::new();
    let mut ws: Vec<f64> = Vec::new();
    for v in sorted {
        if xs.last() == Some(&v) {
            *ws.last_mut().unwrap() += 1.0;
        } else {
            xs.push(v);
            ws.push(1.0);
        }
    }
    let m = xs.len();
    let k_eff = k.min(m);
    let reduced = k_eff < k;

    // Prefix sums over centered values keep the SSE differences accurate.
    let total_w: f64 = ws.iter().sum();
    let mean = xs.iter().zip(&ws).map(|(x, w)| x * w).sum::<f64>() / total_w;
    let mut pw = vec![0.0; m + 1];
    let mut p1 = vec![0.0; m + 1];
    let mut p2 = vec![0.0; m + 1];
    for i in 0..m {
        let c = xs[i] - mean;
        pw[i + 1] = pw[i] + ws[i];
        p1[i + 1] = p1[i] + ws[i] * c;
        p2[i + 1] = p2[i] + ws[i] * c * c;
    }
    // SSE of distinct points j..=i.
    let cost = |j: usize, i: usize| -> f64 {
        let w = pw[i + 1] - pw[j];
        let s = p1[i + 1] - p1[j];
        (p2[i + 1] - p2[j] - s * s / w).max(0.0)
    };

    let mut prev: Vec<f64> = (0..m).map(|i| cost(0, i)).collect();
    let mut starts: Vec<Vec<usize>> = vec![vec![0; m]];
    for layer in 1..k_eff {
        let mut cur = vec![f64::INFINITY; m];
        let mut arg = vec![0usize; m];
        solve_layer(layer, m - 1, layer, m - 1, &prev, &cost, &mut cur, &mut arg);
        prev = cur;
        starts.push(arg);
    }

    // Walk the cluster start indices back from the last point.
    let mut bounds = Vec::with_capacity(k_eff);
    let mut end = m - 1;
    for layer in (0..k_eff).rev() {
        let start = starts[layer][end];
        bounds.push((start, end));
        if layer > 0 {
            end = start - 1;
        }
    }
    bounds.reverse();

    let mut centroids = Vec::with_capacity(k_eff);
    let mut counts = Vec::with_capacity(k_eff);
    let mut sums = Vec::with_capacity(k_eff);
    for &(a, b) in &bounds {
        let w: f64 = ws[a..=b].iter().sum();
        let s: f64 = xs[a..=b].iter().zip(&ws[a..=b]).map(|(x, w)| x * w).sum();
        centroids.push(s / w);
        counts.push(w as usize);
        sums.push(s);
    }
    Ok(Stage1 {
        centroids,
        counts,
        sums,
        sse: prev[m - 1],
        reduced,
    })
}

/// Divide-and-conquer fill of one DP layer: `cur[i] = min_j prev[j-1] + cost(j, i)`
/// with `j` in `[layer, i]`. The optimal split is monotone in `i`.
#[allow(clippy::too_many_arguments)]
fn solve_layer(
    lo: usize,
    hi: usize,
    opt_lo: usize,
    opt_hi: usize,
    prev: &[f64],
    cost: &impl Fn(usize, usize) -> f64,
    cur: &mut [f64],
    arg: &mut [usize],
) {
    if lo > hi {
        return;
    }
    let mid = lo + (hi - lo) / 2;
    let mut best = (f64::INFINITY, opt_lo);
    for j in opt_lo..=opt_hi.min(mid) {
        let v = prev[j - 1] + cost(j, mid);
        if v < best.0 {
            best = (v, j);
        }
    }
    cur[mid] = best.0;
    arg[mid] = best.1;
    if mid > lo {
        solve_layer(lo, mid - 1, opt_lo, best.1, prev, cost, cur, arg);
    }
    solve_layer(mid + 1, hi, best.1, opt_hi, prev, cost, cur, arg);
}

/// Index of the centroid nearest to `v`; ties go to the lower centroid.
pub fn nearest_centroid(v: f64, centroids: &[f64]) -> usize {
    let idx = centroids.partition_point(|&c| c < v);
    if idx == 0 {
        0
    } else if idx == centroids.len() || (v - centroids[idx - 1]).abs() <= (centroids[idx] - v).abs() {
        idx - 1
    } else {
        idx
    }
}

/// Mean squared error of replacing each detected value by its nearest
/// centroid. Zero when no value is detected.
pub fn akm_reconstruct_mse(values: &[f64], centroids: &[f64]) -> f64 {
    if centroids.is_empty() {
        return 0.0;
    }
    let (mut sum, mut n) = (0.0, 0usize);
    for &v in values.iter().filter(|&&v| is_detected(v)) {
        let c = centroids[nearest_centroid(v, centroids)];
        sum += (v - c) * (v - c);
        n += 1;
    }
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

/// Stage 2: one pass that moves every centroid to the mean of its training
/// members plus the test values nearest to it.
pub fn akm_stage2_adapt(stage1: &Stage1, test_values: &[f64]) -> Vec<f64> {
    let k = stage1.centroids.len();
    let mut sums = stage1.sums.clone();
    let mut counts: Vec<f64> = stage1.counts.iter().map(|&c| c as f64).collect();
    for &v in test_values.iter().filter(|&&v| is_detected(v)) {
        let j = nearest_centroid(v, &stage1.centroids);
        sums[j] += v;
        counts[j] += 1.0;
    }
    (0..k)
        .map(|j| {
            if counts[j] > 0.0 {
                sums[j] / counts[j]
            } else {
                stage1.centroids[j]
            }
        })
        .collect()
}

pub fn flatten_rss(samples: &[Sample]) -> Vec<f64> {
    samples
        .iter()
        .flat_map(|s| s.fingerprint.values().iter().copied())
        .collect()
}

/// A dataset with every detected RSS replaced by its stage-2 centroid.
#[derive(Debug, Clone)]
pub struct Compressed {
    pub dataset: Dataset,
    pub stage1: Stage1,
    pub centroids_stage2: Vec<f64>,
    pub mse_s1: f64,
    pub mse_s2: f64,
    pub cr: f64,
}

pub fn compress_dataset(dataset: &Dataset, cfg: &AkmConfig) -> Result<Compressed> {
    cfg.validate()?;
    let train_values = flatten_rss(&dataset.train);
    let test_values = flatten_rss(&dataset.test);
    let stage1 = akm_stage1(&train_values, cfg.k_clusters)?;
    let mse_s1 = akm_reconstruct_mse(&test_values, &stage1.centroids);
    let stage2 = akm_stage2_adapt(&stage1, &test_values);
    let mse_s2 = akm_reconstruct_mse(&test_values, &stage2);

    let quantize = |samples: &[Sample]| -> Result<Vec<Sample>> {
        samples
            .iter()
            .map(|s| {
                let rss = s
                    .fingerprint
                    .values()
                    .iter()
                    .map(|&v| {
                        if is_detected(v) {
                            stage2[nearest_centroid(v, &stage2)]
                        } else {
                            v
                        }
                    })
                    .collect();
                Ok(Sample {
                    fingerprint: Fingerprint::new(rss)?,
                    position: s.position,
                })
            })
            .collect()
    };
    let dataset = Dataset::new(
        dataset.name.clone(),
        quantize(&dataset.train)?,
        quantize(&dataset.test)?,
    )?
    .with_min_rss(dataset.min_rss);
    Ok(Compressed {
        dataset,
        stage1,
        centroids_stage2: stage2,
        mse_s1,
        mse_s2,
        cr: compression_ratio(cfg.k_clusters, cfg.original_bits),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct AkmResult {
    pub mse_s1: f64,
    pub mse_s2: f64,
    pub cr: f64,
    pub epsilon_3d: f64,
    pub centroids_stage1: Vec<f64>,
    pub centroids_stage2: Vec<f64>,
    pub reduced: bool,
}

/// Compresses `dataset` and measures the mean 3-D error of k-NN on the
/// compressed radio map and queries.
pub fn akm_evaluate(dataset: &Dataset, cfg: &AkmConfig, knn: &KnnConfig) -> Result<AkmResult> {
    let c = compress_dataset(dataset, cfg)?;
    let map = RadioMap::build(&c.dataset.train, knn)?;
    let mut total = 0.0;
    for (q, truth) in c.dataset.test.iter().zip(&dataset.test) {
        total += map.estimate(&q.fingerprint)?.distance_3d(&truth.position);
    }
    Ok(AkmResult {
        mse_s1: c.mse_s1,
        mse_s2: c.mse_s2,
        cr: c.cr,
        epsilon_3d: total / dataset.test.len() as f64,
        centroids_stage1: c.stage1.centroids,
        centroids_stage2: c.centroids_stage2,
        reduced: c.stage1.reduced,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::NOT_DETECTED;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    // Minimum SSE over all contiguous partitions of sorted values into k
    // non-empty groups, by enumeration of cut positions.
    fn brute_contiguous(values: &[f64], k: usize) -> f64 {
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let n = v.len();
        let group_sse = |s: &[f64]| {
            let m = s.iter().sum::<f64>() / s.len() as f64;
            s.iter().map(|x| (x - m).powi(2)).sum::<f64>()
        };
        let mut best = f64::INFINITY;
        for mask in 0u32..(1 << (n - 1)) {
            if mask.count_ones() as usize != k - 1 {
                continue;
            }
            let mut start = 0;
            let mut total = 0.0;
            for cut in 0..n - 1 {
                if mask >> cut & 1 == 1 {
                    total += group_sse(&v[start..=cut]);
                    start = cut + 1;
                }
            }
            total += group_sse(&v[start..]);
            best = best.min(total);
        }
        best
    }

    #[test]
    fn two_clusters_of_four() {
        let s = akm_stage1(&[1.0, 2.0, 9.0, 10.0], 2).unwrap();
        assert_eq!(s.centroids, vec![1.5, 9.5]);
        assert_eq!(s.counts, vec![2, 2]);
        assert!((s.sse - brute_contiguous(&[1.0, 2.0, 9.0, 10.0], 2)).abs() < 1e-12);
    }

    #[test]
    fn one_cluster_per_distinct_value() {
        let vals = [-70.0, -60.0, -60.0, -50.0, -40.0];
        let s = akm_stage1(&vals, 4).unwrap();
        assert_eq!(s.centroids, vec![-70.0, -60.0, -50.0, -40.0]);
        assert_eq!(akm_reconstruct_mse(&vals, &s.centroids), 0.0);
        assert!(!s.reduced);
    }

    #[test]
    fn identical_values_reduce_k() {
        let s = akm_stage1(&[-55.0; 6], 5).unwrap();
        assert_eq!(s.centroids, vec![-55.0]);
        assert!(s.reduced);
        assert_eq!(akm_reconstruct_mse(&[-55.0; 6], &s.centroids), 0.0);
    }

    #[test]
    fn sentinel_is_not_clustered() {
        let s = akm_stage1(&[NOT_DETECTED, -50.0, NOT_DETECTED, -52.0], 2).unwrap();
        assert_eq!(s.centroids, vec![-52.0, -50.0]);
        assert!(akm_stage1(&[NOT_DETECTED], 2).is_err());
    }

    #[test]
    fn reconstruction_mse_reference_values() {
        assert_eq!(akm_reconstruct_mse(&[1.0, 3.0], &[1.0, 3.0]), 0.0);
        assert_eq!(akm_reconstruct_mse(&[0.0, 2.0], &[1.0]), 1.0);
        // 2.0 is equidistant from 1 and 3 and goes to the lower centroid.
        assert_eq!(nearest_centroid(2.0, &[1.0, 3.0]), 0);
    }

    #[test]
    fn reconstruction_mse_matches_elementwise_recompute() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let values: Vec<f64> = (0..300).map(|_| rng.gen_range(-100.0..-30.0)).collect();
        let s = akm_stage1(&values, 3).unwrap();
        let oracle = values
            .iter()
            .map(|v| {
                s.centroids
                    .iter()
                    .map(|c| (v - c) * (v - c))
                    .fold(f64::INFINITY, f64::min)
            })
            .sum::<f64>()
            / values.len() as f64;
        assert!((akm_reconstruct_mse(&values, &s.centroids) - oracle).abs() < 1e-9);
    }

    #[test]
    fn stage2_reference_values() {
        let s = akm_stage1(&[5.0, 50.0], 2).unwrap();
        assert_eq!(akm_stage2_adapt(&s, &[]), s.centroids);
        assert_eq!(akm_stage2_adapt(&s, &[7.0]), vec![6.0, 50.0]);
    }

    #[test]
    fn stage2_matches_independent_recomputation() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let train: Vec<f64> = (0..200).map(|_| rng.gen_range(-95.0..-35.0)).collect();
        let test: Vec<f64> = (0..80).map(|_| rng.gen_range(-95.0..-35.0)).collect();
        let s = akm_stage1(&train, 5).unwrap();
        let adapted = akm_stage2_adapt(&s, &test);
        for (j, &c) in s.centroids.iter().enumerate() {
            let owner = |v: &f64| {
                let d: Vec<f64> = s.centroids.iter().map(|c| (v - c).abs()).collect();
                let min = d.iter().copied().fold(f64::INFINITY, f64::min);
                d.iter().position(|&x| x == min).unwrap() == j
            };
            let members: Vec<f64> = train.iter().chain(&test).filter(|v| owner(v)).copied().collect();
            let expected = if members.is_empty() {
                c
            } else {
                members.iter().sum::<f64>() / members.len() as f64
            };
            assert!((adapted[j] - expected).abs() < 1e-9, "centroid {j}");
        }
    }

    #[test]
    fn compression_ratios() {
        assert_eq!(compression_ratio(15, 7), 1.75);
        assert_eq!(compression_ratio(2, 7), 7.0);
        assert_eq!(compression_ratio(35, 7), 7.0 / 6.0);
        assert_eq!(index_bits(4), 2);
        assert_eq!(index_bits(5), 3);
        assert_eq!(index_bits(32), 5);
        assert_eq!(index_bits(33), 6);
        assert!(AkmConfig::new(1).validate().is_err());
    }

    proptest! {
        #[test]
        fn dp_matches_enumeration(values in prop::collection::vec(-100i32..-30, 2..10), k in 1usize..5) {
            let values: Vec<f64> = values.into_iter().map(f64::from).collect();
            let s = akm_stage1(&values, k).unwrap();
            // Weighted distinct DP equals enumeration over the raw values.
            let k_eff = s.centroids.len();
            prop_assert!((s.sse - brute_contiguous(&values, k_eff)).abs() < 1e-9);
            prop_assert!(s.centroids.windows(2).all(|w| w[0] < w[1]));
        }

        #[test]
        fn training_sse_non_increasing_in_k(values in prop::collection::vec(-100.0f64..-30.0, 5..60)) {
            let mut last = f64::INFINITY;
            for k in 1..8 {
                let s = akm_stage1(&values, k).unwrap();
                prop_assert!(s.sse <= last + 1e-9);
                last = s.sse;
            }
        }
    }
}
