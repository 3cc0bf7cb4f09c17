//! Published reference tables embedded for fixture checks: baseline 1-NN
//! means per dataset, the per-trial k-Means (rfp1) results, and the AkM
//! cluster-count sweep.

// Table data; 3.14 is a measured error, not an approximation of pi.
#![allow(clippy::approx_constant)]

use crate::aggregate::MetricMatrix;

pub const BASELINE_METHOD: &str = "plain_1nn";
pub const KMEANS_METHOD: &str = "kmeans_rfp1";

/// One dataset row of the per-trial k-Means (rfp1) results.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FullRow {
    pub scenario: &'static str,
    pub epsilon: [f64; 10],
    pub epsilon_mean: f64,
    pub epsilon_norm: f64,
    pub tau: [f64; 10],
    pub tau_mean: f64,
    pub tau_norm: f64,
}

/// Printed footer: (mean, std) of normalized ε and τ.
pub const KMEANS_RFP1_EPSILON_AGG: (f64, f64) = (1.05, 0.05);
pub const KMEANS_RFP1_TAU_AGG: (f64, f64) = (0.07, 0.04);

/// AkM sweep row: normalized aggregates per cluster count and printed F.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AkmRow {
    pub k: usize,
    pub mse_s1: f64,
    pub mse_s2: f64,
    pub epsilon: f64,
    pub cr: f64,
    pub f: f64,
}

#[rustfmt::skip]
pub const AKM_ROWS: &[AkmRow] = &[
    AkmRow { k: 2, mse_s1: 1.000, mse_s2: 1.000, epsilon: 1.00, cr: 1.00, f: 1.00 },
    AkmRow { k: 4, mse_s1: 0.163, mse_s2: 0.164, epsilon: 0.84, cr: 0.50, f: 0.76 },
    AkmRow { k: 7, mse_s1: 0.050, mse_s2: 0.051, epsilon: 0.81, cr: 0.33, f: 0.73 },
    AkmRow { k: 15, mse_s1: 0.010, mse_s2: 0.010, epsilon: 0.79, cr: 0.25, f: 0.72 },
    AkmRow { k: 25, mse_s1: 0.003, mse_s2: 0.003, epsilon: 0.79, cr: 0.20, f: 0.72 },
    AkmRow { k: 35, mse_s1: 0.001, mse_s2: 0.001, epsilon: 0.79, cr: 0.17, f: 0.73 },
];

pub fn kmeans_rfp1_rows() -> &'static [FullRow] {
    KMEANS_RFP1_ROWS
}

/// Baseline (ε̄, τ̄) per dataset: (name, mean error in m, mean time in s).
pub fn baselines() -> &'static [(&'static str, f64, f64)] {
    BASELINES
}

/// ε and τ matrices: ten k-Means trials per dataset and the baseline's
/// published mean as a single trial.
pub fn kmeans_rfp1_matrices() -> (MetricMatrix, MetricMatrix) {
    let mut eps = MetricMatrix::new("epsilon_3d");
    let mut tau = MetricMatrix::new("tau_db");
    for row in KMEANS_RFP1_ROWS {
        for t in 0..10 {
            eps.insert(KMEANS_METHOD, row.scenario, t as u32 + 1, row.epsilon[t])
                .unwrap();
            tau.insert(KMEANS_METHOD, row.scenario, t as u32 + 1, row.tau[t])
                .unwrap();
        }
    }
    for &(name, e, t) in BASELINES {
        eps.insert(BASELINE_METHOD, name, 1, e).unwrap();
        tau.insert(BASELINE_METHOD, name, 1, t).unwrap();
    }
    (eps, tau)
}

/// The AkM sweep as metric matrices with one scenario, one method per K,
/// and `akm_k2` (all ones) as the baseline.
pub fn akm_matrices() -> Vec<MetricMatrix> {
    let mut out: Vec<MetricMatrix> = ["mse_s1", "mse_s2", "epsilon_3d", "cr"]
        .iter()
        .map(|m| MetricMatrix::new(*m))
        .collect();
    for row in AKM_ROWS {
        let id = format!("akm_k{}", row.k);
        for (m, v) in out.iter_mut().zip([row.mse_s1, row.mse_s2, row.epsilon, row.cr]) {
            m.insert(&id, "aggregate", 1, v).unwrap();
        }
    }
    out
}

#[rustfmt::skip]
pub(crate) const KMEANS_RFP1_ROWS: &[FullRow] = &[
    FullRow { scenario: "DSI1", epsilon: [4.93, 4.97, 5.22, 5.21, 4.99, 5.40, 5.30, 5.29, 5.08, 4.85], epsilon_mean: 5.13, epsilon_norm: 1.04, tau: [0.79, 0.86, 0.97, 0.86, 0.79, 0.81, 0.81, 1.01, 0.90, 0.91], tau_mean: 0.87, tau_norm: 0.07 },
    FullRow { scenario: "DSI2", epsilon: [4.94, 5.13, 5.01, 5.25, 4.72, 4.88, 5.10, 5.75, 4.92, 4.78], epsilon_mean: 5.05, epsilon_norm: 1.02, tau: [0.59, 0.52, 0.53, 0.54, 0.53, 0.53, 0.60, 0.52, 0.62, 0.58], tau_mean: 0.56, tau_norm: 0.11 },
    FullRow { scenario: "LIB1", epsilon: [3.10, 3.16, 3.14, 3.10, 3.13, 3.11, 3.11, 3.12, 3.12, 3.19], epsilon_mean: 3.13, epsilon_norm: 1.04, tau: [4.32, 4.77, 4.21, 4.17, 4.42, 4.17, 4.40, 4.50, 4.55, 4.33], tau_mean: 4.38, tau_norm: 0.09 },
    FullRow { scenario: "LIB2", epsilon: [4.29, 4.18, 4.26, 4.54, 4.07, 4.27, 4.22, 4.19, 4.16, 4.42], epsilon_mean: 4.26, epsilon_norm: 1.02, tau: [4.79, 5.64, 4.54, 4.47, 5.45, 4.62, 4.98, 4.92, 5.67, 4.81], tau_mean: 4.99, tau_norm: 0.11 },
    FullRow { scenario: "MAN1", epsilon: [2.85, 2.89, 2.82, 2.88, 2.95, 2.84, 2.97, 2.84, 2.94, 2.82], epsilon_mean: 2.88, epsilon_norm: 1.02, tau: [2.96, 3.08, 2.92, 2.92, 2.82, 2.89, 2.95, 3.02, 2.98, 2.92], tau_mean: 2.95, tau_norm: 0.02 },
    FullRow { scenario: "MAN2", epsilon: [2.62, 2.46, 2.48, 2.56, 2.45, 2.43, 2.40, 2.60, 2.35, 2.45], epsilon_mean: 2.48, epsilon_norm: 1.01, tau: [0.96, 0.93, 0.92, 1.04, 0.98, 0.94, 0.88, 0.92, 0.98, 1.02], tau_mean: 0.96, tau_norm: 0.07 },
    FullRow { scenario: "SIM", epsilon: [3.27, 3.28, 3.36, 3.33, 3.28, 3.35, 3.31, 3.27, 3.37, 3.35], epsilon_mean: 3.32, epsilon_norm: 1.03, tau: [5.00, 4.95, 4.93, 5.02, 4.88, 4.88, 4.98, 4.94, 4.89, 4.85], tau_mean: 4.93, tau_norm: 0.02 },
    FullRow { scenario: "TUT1", epsilon: [10.06, 9.43, 9.76, 10.03, 8.99, 10.12, 10.77, 9.79, 9.37, 10.36], epsilon_mean: 9.87, epsilon_norm: 1.03, tau: [1.25, 1.15, 1.11, 1.11, 1.06, 1.15, 1.39, 1.17, 1.12, 1.19], tau_mean: 1.17, tau_norm: 0.06 },
    FullRow { scenario: "TUT2", epsilon: [13.84, 13.39, 16.02, 12.42, 13.98, 14.19, 13.33, 14.35, 13.91, 16.83], epsilon_mean: 14.22, epsilon_norm: 0.99, tau: [0.29, 0.33, 0.29, 0.29, 0.31, 0.30, 0.28, 0.35, 0.30, 0.30], tau_mean: 0.30, tau_norm: 0.11 },
    FullRow { scenario: "TUT3", epsilon: [9.96, 10.02, 10.02, 10.10, 9.92, 9.86, 10.14, 9.88, 10.05, 9.94], epsilon_mean: 9.99, epsilon_norm: 1.04, tau: [16.99, 11.62, 13.30, 10.79, 13.69, 13.29, 12.20, 13.28, 11.52, 13.25], tau_mean: 12.99, tau_norm: 0.16 },
    FullRow { scenario: "TUT4", epsilon: [6.62, 6.74, 6.64, 6.67, 6.74, 6.48, 6.54, 6.60, 6.59, 6.69], epsilon_mean: 6.63, epsilon_norm: 1.04, tau: [5.12, 5.31, 5.12, 4.84, 8.17, 4.82, 5.50, 4.88, 6.08, 4.94], tau_mean: 5.48, tau_norm: 0.07 },
    FullRow { scenario: "TUT5", epsilon: [7.74, 7.29, 7.14, 7.13, 7.12, 7.50, 7.51, 7.40, 7.37, 7.10], epsilon_mean: 7.33, epsilon_norm: 1.06, tau: [1.36, 1.30, 1.49, 1.53, 1.39, 1.37, 1.46, 1.63, 1.35, 1.62], tau_mean: 1.45, tau_norm: 0.12 },
    FullRow { scenario: "TUT6", epsilon: [2.25, 2.14, 2.20, 2.11, 2.17, 2.19, 2.21, 2.27, 2.20, 2.13], epsilon_mean: 2.19, epsilon_norm: 1.13, tau: [37.47, 31.15, 35.34, 45.38, 40.16, 33.18, 40.99, 39.89, 33.41, 41.70], tau_mean: 37.87, tau_norm: 0.06 },
    FullRow { scenario: "TUT7", epsilon: [2.91, 2.84, 2.92, 2.87, 2.92, 2.90, 2.88, 2.87, 2.84, 2.93], epsilon_mean: 2.89, epsilon_norm: 1.07, tau: [30.48, 42.74, 29.63, 27.72, 33.01, 31.98, 31.57, 34.87, 29.53, 35.86], tau_mean: 32.74, tau_norm: 0.06 },
    FullRow { scenario: "UJI1", epsilon: [12.76, 12.49, 13.01, 13.10, 12.28, 12.78, 12.72, 12.85, 13.06, 13.23], epsilon_mean: 12.83, epsilon_norm: 1.19, tau: [11.75, 15.42, 12.34, 12.76, 12.40, 11.61, 13.61, 13.38, 10.52, 11.95], tau_mean: 12.57, tau_norm: 0.02 },
    FullRow { scenario: "UJI2", epsilon: [8.72, 8.36, 8.89, 8.54, 8.43, 8.40, 8.51, 8.36, 8.53, 8.61], epsilon_mean: 8.54, epsilon_norm: 1.06, tau: [43.39, 50.69, 48.61, 44.23, 44.27, 49.47, 44.85, 44.20, 49.26, 47.02], tau_mean: 46.60, tau_norm: 0.02 },
];

#[rustfmt::skip]
pub(crate) const BASELINES: &[(&str, f64, f64)] = &[
    ("DSI1", 4.95, 12.21),
    ("DSI2", 4.95, 5.15),
    ("LIB1", 3.02, 46.19),
    ("LIB2", 4.18, 46.39),
    ("MAN1", 2.82, 155.46),
    ("MAN2", 2.47, 14.26),
    ("SIM", 3.24, 252.00),
    ("TUT1", 9.59, 18.93),
    ("TUT2", 14.37, 2.73),
    ("TUT3", 9.59, 79.73),
    ("TUT4", 6.36, 79.88),
    ("TUT5", 6.92, 11.88),
    ("TUT6", 1.94, 620.72),
    ("TUT7", 2.69, 511.70),
    ("UJI1", 10.81, 599.04),
    ("UJI2", 8.05, 2924.69),
];
