use std::collections::VecDeque;

use super::{sq_dist, Partition};
use crate::distance::FeatureMatrix;

/// Median distance from each point to its 4th nearest neighbor.
pub fn default_eps(features: &FeatureMatrix) -> f64 {
    let n = features.len();
    if n < 2 {
        return 1.0;
    }
    let kth = 4.min(n - 1);
    let mut per_point: Vec<f64> = features
        .rows()
        .enumerate()
        .map(|(i, a)| {
            let mut d: Vec<f64> = features
                .rows()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, b)| sq_dist(a, b))
                .collect();
            let (_, v, _) = d.select_nth_unstable_by(kth - 1, f64::total_cmp);
            v.sqrt()
        })
        .collect();
    per_point.sort_by(f64::total_cmp);
    let mid = per_point.len() / 2;
    let median = if per_point.len().is_multiple_of(2) {
        (per_point[mid - 1] + per_point[mid]) / 2.0
    } else {
        per_point[mid]
    };
    if median > 0.0 {
        median
    } else {
        f64::MIN_POSITIVE
    }
}

/// Density-based clustering; each noise point becomes its own cluster.
pub fn dbscan(features: &FeatureMatrix, eps: f64, min_pts: usize) -> Partition {
    let n = features.len();
    let eps2 = eps * eps;
    let neighbors = |i: usize| -> Vec<usize> {
        let a = features.row(i);
        (0..n).filter(|&j| sq_dist(a, features.row(j)) <= eps2).collect()
    };
    let mut labels: Vec<Option<usize>> = vec![None; n];
    let mut visited = vec![false; n];
    let mut next = 0usize;
    for i in 0..n {
        if visited[i] {
            continue;
        }
        visited[i] = true;
        let seeds = neighbors(i);
        if seeds.len() < min_pts {
            continue;
        }
        let label = next;
        next += 1;
        labels[i] = Some(label);
        let mut queue: VecDeque<usize> = seeds.into_iter().collect();
        while let Some(j) = queue.pop_front() {
            if labels[j].is_none() {
                labels[j] = Some(label);
            }
            if visited[j] {
                continue;
            }
            visited[j] = true;
            let nb = neighbors(j);
            if nb.len() >= min_pts {
                queue.extend(nb.into_iter().filter(|&q| !visited[q] || labels[q].is_none()));
            }
        }
    }
    let labels = labels
        .into_iter()
        .map(|l| {
            l.unwrap_or_else(|| {
                next += 1;
                next - 1
            })
        })
        .collect();
    Partition {
        labels,
        exemplars: None,
        converged: true,
    }
}
