//! Benchmarking harness for RSS-fingerprint indoor positioning.
//!
//! Datasets are loaded or synthesized ([`dataset`]), transformed
//! ([`representation`]), searched with k-NN under one of fourteen distances
//! ([`distance`], [`positioning`]), optionally accelerated by clustering
//! ([`clustering`]) or compressed ([`akm`]). Per-trial metrics are
//! normalized against a baseline and summarized across datasets
//! ([`aggregate`]) and drawn as GMMS plots ([`gmms`]).

// `!(x > 0.0)` is used deliberately so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod aggregate;
pub mod akm;
pub mod clustering;
pub mod dataset;
pub mod distance;
pub mod error;
pub mod experiment;
pub mod fixtures;
pub mod gmms;
pub mod io;
pub mod positioning;
pub mod representation;

pub use aggregate::{
    aggregate_metric, aggregate_scenarios, aggregate_trials, error_stats, normalize_to_baseline, weighted_combine,
    AggregateReport, AggregatedMetric, ErrorStats, MetricMatrix, Orientation, Transform, WeightedScore,
};
pub use akm::{akm_evaluate, akm_stage1, akm_stage2_adapt, compression_ratio, AkmConfig, AkmResult};
pub use clustering::{build_clusters, ClusterAlgo, ClusterSpec, ClusteredRadioMap, CountRule};
pub use dataset::{
    generate_synthetic, load_dataset, save_dataset, Dataset, Fingerprint, Position, Sample, SyntheticConfig,
    NOT_DETECTED,
};
pub use distance::{distance, rank_references, DistanceKind, DistanceSpec};
pub use error::{Error, Result};
pub use gmms::{render_gmms, GmmsGrid};
pub use positioning::{
    clustered_estimate, evaluate, knn_estimate, KnnConfig, MethodConfig, MethodKind, RadioMap, TrialResult,
};
pub use representation::{apply_representation, RepresentationKind, RepresentationParams};
