use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{sq_dist, Partition};
use crate::distance::FeatureMatrix;

const STABLE_ITERATIONS: usize = 20;

/// Affinity Propagation on negative squared Euclidean similarities with the
/// median similarity as preference.
pub fn affinity_propagation(features: &FeatureMatrix, damping: f64, max_iter: usize, seed: u64) -> Partition {
    let n = features.len();
    if n == 1 {
        return Partition {
            labels: vec![0],
            exemplars: Some(vec![0]),
            converged: true,
        };
    }
    let mut s = vec![0.0; n * n];
    for i in 0..n {
        for k in 0..n {
            if i != k {
                s[i * n + k] = -sq_dist(features.row(i), features.row(k));
            }
        }
    }
    let mut off: Vec<f64> = (0..n * n).filter(|&ik| ik / n != ik % n).map(|ik| s[ik]).collect();
    off.sort_by(f64::total_cmp);
    let mid = off.len() / 2;
    let preference = if off.len().is_multiple_of(2) {
        (off[mid - 1] + off[mid]) / 2.0
    } else {
        off[mid]
    };
    for k in 0..n {
        s[k * n + k] = preference;
    }
    // Tiny seeded jitter breaks exact ties between candidate exemplars.
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for v in s.iter_mut() {
        *v += (f64::EPSILON * *v + f64::MIN_POSITIVE * 100.0) * rng.gen::<f64>();
    }

    let mut r = vec![0.0; n * n];
    let mut a = vec![0.0; n * n];
    let mut exemplars: Vec<usize> = Vec::new();
    let mut stable = 0usize;
    let mut converged = false;
    let keep = damping;
    let take = 1.0 - damping;

    for _ in 0..max_iter {
        // Responsibilities.
        for i in 0..n {
            let row = i * n;
            let (mut first, mut second, mut arg) = (f64::NEG_INFINITY, f64::NEG_INFINITY, 0);
            for k in 0..n {
                let v = a[row + k] + s[row + k];
                if v > first {
                    second = first;
                    first = v;
                    arg = k;
                } else if v > second {
                    second = v;
                }
            }
            for k in 0..n {
                let competitor = if k == arg { second } else { first };
                r[row + k] = keep * r[row + k] + take * (s[row + k] - competitor);
            }
        }
        // Availabilities.
        for k in 0..n {
            let mut pos_sum = 0.0;
            for i in 0..n {
                if i != k {
                    pos_sum += r[i * n + k].max(0.0);
                }
            }
            let rkk = r[k * n + k];
            for i in 0..n {
                let new = if i == k {
                    pos_sum
                } else {
                    (rkk + pos_sum - r[i * n + k].max(0.0)).min(0.0)
                };
                a[i * n + k] = keep * a[i * n + k] + take * new;
            }
        }
        let current: Vec<usize> = (0..n).filter(|&k| a[k * n + k] + r[k * n + k] > 0.0).collect();
        if !current.is_empty() && current == exemplars {
            stable += 1;
            if stable >= STABLE_ITERATIONS {
                converged = true;
                break;
            }
        } else {
            stable = 0;
            exemplars = current;
        }
    }

    if exemplars.is_empty() {
        let best = (0..n)
            .max_by(|&x, &y| {
                (a[x * n + x] + r[x * n + x])
                    .total_cmp(&(a[y * n + y] + r[y * n + y]))
                    .then(y.cmp(&x))
            })
            .unwrap();
        exemplars = vec![best];
    }
    let labels = (0..n)
        .map(|i| {
            if let Some(pos) = exemplars.iter().position(|&e| e == i) {
                return pos;
            }
            let mut best = (0, f64::NEG_INFINITY);
            for (c, &e) in exemplars.iter().enumerate() {
                let sim = -sq_dist(features.row(i), features.row(e));
                if sim > best.1 {
                    best = (c, sim);
                }
            }
            best.0
        })
        .collect();
    Partition {
        labels,
        exemplars: Some(exemplars),
        converged,
    }
}
