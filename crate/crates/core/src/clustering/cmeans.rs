use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{kmeanspp, sq_dist, Partition};
use crate::distance::FeatureMatrix;

/// Fuzzy c-means. Memberships are defuzzified by argmax.
pub fn fuzzy_cmeans(features: &FeatureMatrix, c: usize, m: f64, max_iter: usize, tol: f64, seed: u64) -> Partition {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centers: Vec<Vec<f64>> = kmeanspp(features, c, &mut rng)
        .into_iter()
        .map(|i| features.row(i).to_vec())
        .collect();
    let n = features.len();
    let dim = features.dim();
    let c = centers.len();
    let mut u = vec![0.0; n * c];
    let mut converged = false;

    for _ in 0..max_iter {
        memberships(features, &centers, m, &mut u);
        let mut shift: f64 = 0.0;
        for (j, center) in centers.iter_mut().enumerate() {
            let mut num = vec![0.0; dim];
            let mut den = 0.0;
            for (i, row) in features.rows().enumerate() {
                let w = u[i * c + j].powf(m);
                den += w;
                for (a, x) in num.iter_mut().zip(row) {
                    *a += w * x;
                }
            }
            if den > 0.0 {
                num.iter_mut().for_each(|a| *a /= den);
                shift = shift.max(sq_dist(&num, center).sqrt());
                *center = num;
            }
        }
        if shift <= tol {
            converged = true;
            break;
        }
    }
    memberships(features, &centers, m, &mut u);
    let labels = (0..n)
        .map(|i| {
            let row = &u[i * c..(i + 1) * c];
            let mut best = 0;
            for j in 1..c {
                if row[j] > row[best] {
                    best = j;
                }
            }
            best
        })
        .collect();
    Partition {
        labels,
        exemplars: None,
        converged,
    }
}

fn memberships(features: &FeatureMatrix, centers: &[Vec<f64>], m: f64, u: &mut [f64]) {
    let c = centers.len();
    let p = 1.0 / (m - 1.0);
    let mut d2 = vec![0.0; c];
    for (i, row) in features.rows().enumerate() {
        for (j, center) in centers.iter().enumerate() {
            d2[j] = sq_dist(row, center);
        }
        let out = &mut u[i * c..(i + 1) * c];
        let zeros = d2.iter().filter(|&&d| d == 0.0).count();
        if zeros > 0 {
            for (o, &d) in out.iter_mut().zip(&d2) {
                *o = if d == 0.0 { 1.0 / zeros as f64 } else { 0.0 };
            }
        } else {
            // u_ij ∝ d_ij^(−2/(m−1)), scaled by the nearest distance.
            let dmin = d2.iter().copied().fold(f64::INFINITY, f64::min);
            let mut total = 0.0;
            for (o, &d) in out.iter_mut().zip(&d2) {
                *o = (dmin / d).powf(p);
                total += *o;
            }
            out.iter_mut().for_each(|o| *o /= total);
        }
        debug_assert!((out.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
    }
}
