use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{kmeanspp, nearest, Partition};
use crate::distance::FeatureMatrix;

/// Lloyd's k-means with k-means++ seeding.
pub fn kmeans(features: &FeatureMatrix, k: usize, max_iter: usize, tol: f64, seed: u64) -> Partition {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centers: Vec<Vec<f64>> = kmeanspp(features, k, &mut rng)
        .into_iter()
        .map(|i| features.row(i).to_vec())
        .collect();
    let n = features.len();
    let dim = features.dim();
    let mut labels = vec![usize::MAX; n];
    let mut prev_sse = f64::INFINITY;
    let mut converged = false;

    for _ in 0..max_iter {
        let mut changed = false;
        let mut sse = 0.0;
        for (i, row) in features.rows().enumerate() {
            let (j, d) = nearest(row, &centers);
            sse += d;
            if labels[i] != j {
                labels[i] = j;
                changed = true;
            }
        }
        // Lloyd iterations never increase the objective.
        debug_assert!(
            sse <= prev_sse * (1.0 + 1e-12) + 1e-9,
            "k-means SSE increased: {prev_sse} -> {sse}"
        );
        let improvement = prev_sse - sse;
        prev_sse = sse;

        let mut sums = vec![vec![0.0; dim]; centers.len()];
        let mut counts = vec![0usize; centers.len()];
        for (i, row) in features.rows().enumerate() {
            counts[labels[i]] += 1;
            for (s, x) in sums[labels[i]].iter_mut().zip(row) {
                *s += x;
            }
        }
        for (j, c) in centers.iter_mut().enumerate() {
            // An emptied cluster keeps its previous center.
            if counts[j] > 0 {
                for (cv, s) in c.iter_mut().zip(&sums[j]) {
                    *cv = s / counts[j] as f64;
                }
            }
        }
        if !changed || improvement <= tol * sse {
            converged = true;
            break;
        }
    }
    // Final assignment against the last centers.
    for (i, row) in features.rows().enumerate() {
        labels[i] = nearest(row, &centers).0;
    }
    Partition {
        labels,
        exemplars: None,
        converged,
    }
}
