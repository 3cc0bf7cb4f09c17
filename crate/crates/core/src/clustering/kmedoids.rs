use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{kmeanspp, Partition};
use crate::distance::FeatureMatrix;

fn dist(a: &[f64], b: &[f64]) -> f64 {
    super::sq_dist(a, b).sqrt()
}

/// Alternating (Voronoi iteration) k-medoids with Euclidean distance.
pub fn kmedoids(features: &FeatureMatrix, k: usize, max_iter: usize, seed: u64) -> Partition {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut medoids = kmeanspp(features, k, &mut rng);
    let mut labels = vec![0usize; features.len()];
    let mut converged = false;

    for _ in 0..max_iter {
        assign(features, &medoids, &mut labels);
        let mut next = medoids.clone();
        for (c, medoid) in next.iter_mut().enumerate() {
            let members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == c).collect();
            let mut best = (*medoid, f64::INFINITY);
            for &cand in &members {
                let cost: f64 = members.iter().map(|&m| dist(features.row(cand), features.row(m))).sum();
                if cost < best.1 || (cost == best.1 && cand < best.0) {
                    best = (cand, cost);
                }
            }
            *medoid = best.0;
        }
        if next == medoids {
            converged = true;
            break;
        }
        medoids = next;
    }
    assign(features, &medoids, &mut labels);
    Partition {
        labels,
        exemplars: Some(medoids),
        converged,
    }
}

fn assign(features: &FeatureMatrix, medoids: &[usize], labels: &mut [usize]) {
    for (i, row) in features.rows().enumerate() {
        let mut best = (0, f64::INFINITY);
        for (c, &m) in medoids.iter().enumerate() {
            let d = dist(row, features.row(m));
            if d < best.1 {
                best = (c, d);
            }
        }
        labels[i] = best.0;
    }
}
