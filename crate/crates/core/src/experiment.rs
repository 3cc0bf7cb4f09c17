//! Experiment orchestration: methods × datasets × trials, metric matrices,
//! aggregate reports and GMMS plots.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::aggregate::{
    error_stats, matrices_to_csv, parse_matrices_csv, AggregateReport, MetricMatrix, WeightedScore,
};
use crate::akm::AkmConfig;
use crate::dataset::{
    bundled_synthetic_configs, generate_synthetic, load_dataset, Dataset, SyntheticConfig, DEFAULT_MIN_RSS,
};
use crate::error::{Error, Result};
use crate::gmms::{render_gmms, GmmsGrid};
use crate::io::write_atomic;
use crate::positioning::{evaluate, MethodConfig, TrialResult};

pub const SCHEMA_VERSION: u32 = 1;
pub const THREADS_ENV: &str = "IPS_BENCH_THREADS";
pub const DEFAULT_CELL_PX: u32 = 60;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    #[serde(rename = "epsilon_3d")]
    Epsilon3d,
    TauDb,
    FloorHitRate,
    Median,
    P75,
    Rmse,
    #[serde(rename = "mse_s1")]
    MseS1,
    #[serde(rename = "mse_s2")]
    MseS2,
    Cr,
}

impl Metric {
    pub const ALL: [Metric; 9] = [
        Metric::Epsilon3d,
        Metric::TauDb,
        Metric::FloorHitRate,
        Metric::Median,
        Metric::P75,
        Metric::Rmse,
        Metric::MseS1,
        Metric::MseS2,
        Metric::Cr,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Epsilon3d => "epsilon_3d",
            Metric::TauDb => "tau_db",
            Metric::FloorHitRate => "floor_hit_rate",
            Metric::Median => "median",
            Metric::P75 => "p75",
            Metric::Rmse => "rmse",
            Metric::MseS1 => "mse_s1",
            Metric::MseS2 => "mse_s2",
            Metric::Cr => "cr",
        }
    }

    /// Value of this metric for one trial, or `None` when it does not apply
    /// (no floor labels, or compression metrics of an uncompressed method).
    pub fn extract(self, trial: &TrialResult) -> Result<Option<f64>> {
        let stats = error_stats(&trial.errors_3d, trial.floor_hits.as_deref())?;
        Ok(match self {
            Metric::Epsilon3d => Some(stats.mean),
            Metric::TauDb => Some(trial.elapsed_seconds),
            Metric::FloorHitRate => stats.floor_hit_rate,
            Metric::Median => Some(stats.median),
            Metric::P75 => Some(stats.p75),
            Metric::Rmse => Some(stats.rmse),
            Metric::MseS1 => trial.compression.map(|c| c.mse_s1),
            Metric::MseS2 => trial.compression.map(|c| c.mse_s2),
            Metric::Cr => Some(trial.compression.map_or(1.0, |c| c.cr)),
        })
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Metric::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown metric `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum DatasetSource {
    /// A train/test CSV pair; relative paths resolve against the config file.
    Files {
        train: PathBuf,
        test: PathBuf,
        #[serde(default)]
        name: Option<String>,
        #[serde(default)]
        min_rss: Option<f64>,
    },
    Synthetic {
        #[serde(default)]
        config: SyntheticConfig,
        #[serde(default)]
        name: Option<String>,
    },
    /// The five bundled synthetic scenarios.
    Bundled,
}

impl DatasetSource {
    pub fn load(&self, base_dir: &Path) -> Result<Vec<Dataset>> {
        match self {
            DatasetSource::Files {
                train,
                test,
                name,
                min_rss,
            } => {
                let mut ds = load_dataset(&base_dir.join(train), &base_dir.join(test))?;
                if let Some(n) = name {
                    ds.name = n.clone();
                }
                if let Some(m) = min_rss {
                    ds = ds.with_min_rss(*m);
                }
                Ok(vec![ds])
            }
            DatasetSource::Synthetic { config, name } => {
                let mut ds = generate_synthetic(config)?;
                if let Some(n) = name {
                    ds.name = n.clone();
                }
                Ok(vec![ds])
            }
            DatasetSource::Bundled => bundled_synthetic_configs().iter().map(generate_synthetic).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GmmsSpec {
    pub color: String,
    pub shape: String,
    #[serde(default = "default_cell_px")]
    pub cell_px: u32,
}

fn default_cell_px() -> u32 {
    DEFAULT_CELL_PX
}

impl Default for GmmsSpec {
    fn default() -> Self {
        GmmsSpec {
            color: Metric::TauDb.name().into(),
            shape: Metric::Epsilon3d.name().into(),
            cell_px: DEFAULT_CELL_PX,
        }
    }
}

fn default_trials() -> u32 {
    10
}

fn default_metrics() -> Vec<Metric> {
    vec![Metric::Epsilon3d, Metric::TauDb]
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("results")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema: u32,
    pub datasets: Vec<DatasetSource>,
    pub methods: Vec<MethodConfig>,
    #[serde(default = "default_trials")]
    pub trials: u32,
    #[serde(default = "default_metrics")]
    pub metrics: Vec<Metric>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub weights: Option<WeightedScore>,
    #[serde(default)]
    pub gmms: Option<GmmsSpec>,
    #[serde(default)]
    pub parallel_timing_unsafe: bool,
}

impl ExperimentConfig {
    pub fn new(datasets: Vec<DatasetSource>, methods: Vec<MethodConfig>) -> Self {
        ExperimentConfig {
            schema: SCHEMA_VERSION,
            datasets,
            methods,
            trials: default_trials(),
            metrics: default_metrics(),
            output_dir: default_output_dir(),
            weights: None,
            gmms: None,
            parallel_timing_unsafe: false,
        }
    }

    pub fn from_json(file: &str, text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| Error::parse(file, e.line(), Some(e.column()), e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&path.display().to_string(), &text)
    }

    pub fn baseline(&self) -> Result<&MethodConfig> {
        let mut it = self.methods.iter().filter(|m| m.is_baseline);
        match (it.next(), it.next()) {
            (Some(b), None) => Ok(b),
            (None, _) => Err(Error::Config(
                "exactly one method must set is_baseline, found none".into(),
            )),
            (Some(_), Some(_)) => Err(Error::Config(
                "exactly one method must set is_baseline, found several".into(),
            )),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "unsupported schema {} (expected {SCHEMA_VERSION})",
                self.schema
            )));
        }
        if self.datasets.is_empty() {
            return Err(Error::Config("at least one dataset is required".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::Config("at least one method is required".into()));
        }
        if self.trials == 0 {
            return Err(Error::Config("trials must be positive".into()));
        }
        if self.metrics.is_empty() {
            return Err(Error::Config("at least one metric is required".into()));
        }
        let mut ids = BTreeSet::new();
        for m in &self.methods {
            if m.id.is_empty() || m.id.contains([',', '\n', '"']) {
                return Err(Error::Config(format!("invalid method id `{}`", m.id)));
            }
            if !ids.insert(m.id.as_str()) {
                return Err(Error::Config(format!("duplicate method id `{}`", m.id)));
            }
            m.validate()?;
        }
        self.baseline()?;
        if let Some(w) = &self.weights {
            w.validate()?;
        }
        Ok(())
    }
}

/// Per-trial records of one (method, dataset) pair.
#[derive(Debug, Clone)]
pub struct CellResult {
    pub method: String,
    pub dataset: String,
    pub trials: Vec<TrialResult>,
}

/// A dataset that declares its own RSS floor passes it to methods whose
/// representation still uses the default floor.
fn method_for(dataset: &Dataset, method: &MethodConfig) -> MethodConfig {
    let mut m = method.clone();
    if m.knn.representation.min_rss == DEFAULT_MIN_RSS {
        m.knn.representation.min_rss = dataset.min_rss;
    }
    m
}

fn run_cell(dataset: &Dataset, method: &MethodConfig, trials: u32) -> Result<CellResult> {
    let method = &method_for(dataset, method);
    let trials = (1..=trials)
        .map(|t| {
            evaluate(dataset, method, t).map_err(|e| Error::Evaluation {
                method: method.id.clone(),
                dataset: dataset.name.clone(),
                trial: t,
                source: Box::new(e),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CellResult {
        method: method.id.clone(),
        dataset: dataset.name.clone(),
        trials,
    })
}

/// Worker count from `IPS_BENCH_THREADS`, if set.
pub fn thread_cap() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Error::Config(format!(
                "{THREADS_ENV} must be a positive integer, got `{v}`"
            ))),
        },
        Err(_) => Ok(None),
    }
}

/// Evaluates every (method, dataset, trial). Sequential unless `parallel`
/// is set, in which case (method, dataset) pairs run concurrently and the
/// timings are no longer comparable.
pub fn run_evaluations(
    datasets: &[Dataset],
    methods: &[MethodConfig],
    trials: u32,
    parallel: bool,
) -> Result<Vec<CellResult>> {
    let pairs: Vec<(&Dataset, &MethodConfig)> = datasets
        .iter()
        .flat_map(|d| methods.iter().map(move |m| (d, m)))
        .collect();
    if !parallel {
        return pairs.into_iter().map(|(d, m)| run_cell(d, m, trials)).collect();
    }
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_cap()? {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    pool.install(|| pairs.par_iter().map(|(d, m)| run_cell(d, m, trials)).collect())
}

/// Converts cell results into one matrix per requested metric.
pub fn collect_matrices(cells: &[CellResult], metrics: &[Metric]) -> Result<Vec<MetricMatrix>> {
    let mut out: Vec<MetricMatrix> = metrics.iter().map(|m| MetricMatrix::new(m.name())).collect();
    for cell in cells {
        for trial in &cell.trials {
            for (metric, matrix) in metrics.iter().zip(out.iter_mut()) {
                if let Some(v) = metric.extract(trial)? {
                    matrix.insert(&cell.method, &cell.dataset, trial.trial_index, v)?;
                }
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub matrices: Vec<MetricMatrix>,
    pub report: AggregateReport,
    pub files: Vec<PathBuf>,
    pub svg: Option<String>,
}

fn write_reports(out_dir: &Path, report: &AggregateReport, files: &mut Vec<PathBuf>) -> Result<()> {
    for (name, body) in [
        ("aggregate.csv", report.to_csv()),
        ("summary.csv", report.summary_csv()),
        ("report.md", report.to_markdown()),
    ] {
        let p = out_dir.join(name);
        write_atomic(&p, body.as_bytes())?;
        files.push(p);
    }
    Ok(())
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// Runs a full experiment. Relative dataset and output paths resolve
/// against `base_dir`. Writes `raw_metrics.csv`, `aggregate.csv`,
/// `summary.csv`, `report.md` and, when both plot metrics are available,
/// `gmms.svg`.
pub fn run_experiment(cfg: &ExperimentConfig, base_dir: &Path) -> Result<RunOutput> {
    cfg.validate()?;
    let mut datasets = Vec::new();
    for src in &cfg.datasets {
        datasets.extend(src.load(base_dir)?);
    }
    let mut names = BTreeSet::new();
    for d in &datasets {
        if !names.insert(d.name.as_str()) {
            return Err(Error::Config(format!("duplicate dataset name `{}`", d.name)));
        }
    }
    let baseline = cfg.baseline()?.id.clone();
    let cells = run_evaluations(&datasets, &cfg.methods, cfg.trials, cfg.parallel_timing_unsafe)?;
    let matrices = collect_matrices(&cells, &cfg.metrics)?;
    let mut report = AggregateReport::build(&matrices, &baseline, cfg.weights.as_ref())?;

    let out_dir = base_dir.join(&cfg.output_dir);
    ensure_dir(&out_dir)?;
    let mut files = Vec::new();
    let raw = out_dir.join("raw_metrics.csv");
    write_atomic(&raw, matrices_to_csv(&matrices).as_bytes())?;
    files.push(raw);

    let spec = cfg.gmms.clone().unwrap_or_default();
    let svg = match GmmsGrid::from_report(&report, &spec.color, &spec.shape) {
        Ok(grid) => Some(render_gmms(&grid, spec.cell_px)?),
        Err(e) => {
            report.warnings.push(format!("GMMS plot skipped: {e}"));
            None
        }
    };
    write_reports(&out_dir, &report, &mut files)?;
    if let Some(svg) = &svg {
        let p = out_dir.join("gmms.svg");
        write_atomic(&p, svg.as_bytes())?;
        files.push(p);
    }
    Ok(RunOutput {
        matrices,
        report,
        files,
        svg,
    })
}

/// Aggregates raw metric CSV files against `baseline` and writes the
/// report files into `out_dir`.
pub fn cmd_aggregate(
    raw_csvs: &[PathBuf],
    baseline: &str,
    weights: Option<&WeightedScore>,
    out_dir: &Path,
) -> Result<AggregateReport> {
    if raw_csvs.is_empty() {
        return Err(Error::Empty("raw metric files"));
    }
    let mut by_metric = BTreeMap::new();
    for p in raw_csvs {
        let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
        parse_matrices_csv(&p.display().to_string(), &text, &mut by_metric)?;
    }
    let matrices: Vec<MetricMatrix> = by_metric.into_values().collect();
    let report = AggregateReport::build(&matrices, baseline, weights)?;
    ensure_dir(out_dir)?;
    write_reports(out_dir, &report, &mut Vec::new())?;
    Ok(report)
}

/// Renders a GMMS plot from an aggregate CSV file.
pub fn cmd_plot(aggregate_csv: &Path, color: &str, shape: &str, out: &Path, cell_px: u32) -> Result<()> {
    let text = std::fs::read_to_string(aggregate_csv).map_err(|e| Error::io(aggregate_csv, e))?;
    let grid = GmmsGrid::from_aggregate_csv(&aggregate_csv.display().to_string(), &text, color, shape)?;
    write_atomic(out, render_gmms(&grid, cell_px)?.as_bytes())
}

/// Cluster-count sweep for AkM over the experiment's datasets. One method
/// per K, using the baseline's k-NN settings; the smallest K is the
/// normalization reference.
pub fn run_akm_sweep(
    cfg: &ExperimentConfig,
    base_dir: &Path,
    ks: &[usize],
    weights: Option<&WeightedScore>,
) -> Result<AkmSweep> {
    cfg.validate()?;
    if ks.is_empty() {
        return Err(Error::Empty("cluster counts"));
    }
    let mut ks = ks.to_vec();
    ks.sort_unstable();
    ks.dedup();
    let knn = cfg.baseline()?.knn;
    let methods: Vec<MethodConfig> = ks
        .iter()
        .map(|&k| MethodConfig::akm(format!("akm_k{k}"), knn, AkmConfig::new(k)))
        .collect::<Vec<_>>();
    for m in &methods {
        m.validate()?;
    }
    let mut datasets = Vec::new();
    for src in &cfg.datasets {
        datasets.extend(src.load(base_dir)?);
    }
    let cells = run_evaluations(&datasets, &methods, cfg.trials, cfg.parallel_timing_unsafe)?;
    let metrics = [Metric::MseS1, Metric::MseS2, Metric::Epsilon3d, Metric::Cr];
    let matrices = collect_matrices(&cells, &metrics)?;
    let default_weights = WeightedScore::akm_default();
    let report = AggregateReport::build(&matrices, &methods[0].id, Some(weights.unwrap_or(&default_weights)))?;

    let out_dir = base_dir.join(&cfg.output_dir);
    ensure_dir(&out_dir)?;
    let sweep = AkmSweep { ks, report };
    write_atomic(
        &out_dir.join("akm_raw_metrics.csv"),
        matrices_to_csv(&matrices).as_bytes(),
    )?;
    write_atomic(&out_dir.join("akm_sweep.csv"), sweep.to_csv().as_bytes())?;
    write_atomic(&out_dir.join("akm_sweep.md"), sweep.to_markdown().as_bytes())?;
    Ok(sweep)
}

#[derive(Debug, Clone)]
pub struct AkmSweep {
    pub ks: Vec<usize>,
    pub report: AggregateReport,
}

impl AkmSweep {
    fn value(&self, metric: &str, k: usize) -> Option<f64> {
        self.report
            .metrics
            .get(metric)
            .and_then(|m| m.get(&format!("akm_k{k}")))
            .map(|a| a.cross_scenario_mean)
    }

    /// Rows of (K, mse_s1, mse_s2, ε, cr, F), normalized to the smallest K.
    pub fn rows(&self) -> Vec<(usize, [Option<f64>; 5])> {
        self.ks
            .iter()
            .map(|&k| {
                let f = self.report.scores.get(&format!("akm_k{k}")).copied();
                (
                    k,
                    [
                        self.value("mse_s1", k),
                        self.value("mse_s2", k),
                        self.value("epsilon_3d", k),
                        self.value("cr", k),
                        f,
                    ],
                )
            })
            .collect()
    }

    /// K with the lowest F, ties to the smaller K.
    pub fn best_k(&self) -> Option<usize> {
        self.rows()
            .into_iter()
            .filter_map(|(k, v)| v[4].map(|f| (k, f)))
            .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
            .map(|(k, _)| k)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,mse_s1,mse_s2,epsilon_3d,cr,f\n");
        for (k, vals) in self.rows() {
            let cols: Vec<String> = vals
                .iter()
                .map(|v| v.map(|x| x.to_string()).unwrap_or_default())
                .collect();
            out.push_str(&format!("{k},{}\n", cols.join(",")));
        }
        out
    }

    pub fn to_markdown(&self) -> String {
        let mut out = String::from("| K | MSE S1 | MSE S2 | ε | CR | F |\n|---|---|---|---|---|---|\n");
        let best = self.best_k();
        for (k, vals) in self.rows() {
            let cells: Vec<String> = vals
                .iter()
                .enumerate()
                .map(|(i, v)| match v {
                    Some(x) if i < 2 => format!("{x:.3}"),
                    Some(x) if i == 4 && Some(k) == best => format!("**{x:.2}**"),
                    Some(x) => format!("{x:.2}"),
                    None => "–".into(),
                })
                .collect();
            out.push_str(&format!("| {k} | {} |\n", cells.join(" | ")));
        }
        for w in &self.report.warnings {
            out.push_str(&format!("\n- {w}"));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clustering::{ClusterAlgo, ClusterSpec, CountRule};
    use crate::positioning::KnnConfig;

    fn small_synth(seed: u64) -> DatasetSource {
        DatasetSource::Synthetic {
            config: SyntheticConfig {
                seed,
                train_count: 120,
                test_count: 30,
                ap_count: 8,
                ..Default::default()
            },
            name: None,
        }
    }

    #[test]
    fn config_json_defaults_and_validation() {
        let text = r#"{
            "schema": 1,
            "datasets": ["bundled", {"synthetic": {"config": {"seed": 9}}}],
            "methods": [
                {"id": "plain_1nn", "kind": "plain_knn", "is_baseline": true},
                {"id": "km", "kind": "clustered_knn",
                 "knn": {"distance": {"kind": "plgd10"}},
                 "cluster": {"algo": "kmeans", "count_rule": "rfp1"}}
            ]
        }"#;
        // Clustered search with a raw-RSS distance is rejected at load time.
        assert!(matches!(
            ExperimentConfig::from_json("exp.json", text),
            Err(Error::Unsupported(_))
        ));
        let text = text.replace("plgd10", "sorensen");
        let cfg = ExperimentConfig::from_json("exp.json", &text).unwrap();
        assert_eq!(cfg.trials, 10);
        assert_eq!(cfg.metrics, [Metric::Epsilon3d, Metric::TauDb]);
        assert_eq!(cfg.methods[1].knn.k, 1);
        let bad = text.replace("\"schema\": 1", "\"schema\": 2");
        assert!(ExperimentConfig::from_json("exp.json", &bad).is_err());
        let two = text.replace(
            "\"kind\": \"clustered_knn\"",
            "\"kind\": \"clustered_knn\", \"is_baseline\": true",
        );
        assert!(ExperimentConfig::from_json("exp.json", &two).is_err());
        let typo = text
            .replace("\"trials\"", "\"trails\"")
            .replace("\"schema\": 1", "\"schema\": 1, \"trails\": 3");
        assert!(matches!(
            ExperimentConfig::from_json("exp.json", &typo),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn plgd_penalty_defaults_per_kind() {
        let k: KnnConfig = serde_json::from_str(r#"{"distance": {"kind": "plgd40"}}"#).unwrap();
        assert_eq!(k.distance.penalty, 40.0);
        assert_eq!(k.distance.sigma, 6.0);
    }

    #[test]
    fn baseline_only_run_is_all_ones() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = ExperimentConfig::new(
            vec![small_synth(3)],
            vec![MethodConfig::plain("b", KnnConfig::default()).baseline()],
        );
        cfg.trials = 2;
        cfg.output_dir = "out".into();
        let out = run_experiment(&cfg, dir.path()).unwrap();
        let raw = std::fs::read_to_string(dir.path().join("out/raw_metrics.csv")).unwrap();
        assert_eq!(raw.lines().filter(|l| l.starts_with("epsilon_3d,")).count(), 2);
        for per in out.report.metrics.values() {
            assert_eq!(per["b"].cross_scenario_mean, 1.0);
            assert_eq!(per["b"].cross_scenario_std, 0.0);
        }
        assert!(dir.path().join("out/gmms.svg").exists());
        assert!(dir.path().join("out/report.md").exists());
    }

    #[test]
    fn deterministic_method_repeats_errors() {
        let mut cfg = ExperimentConfig::new(
            vec![small_synth(4)],
            vec![MethodConfig::plain("b", KnnConfig::default()).baseline()],
        );
        cfg.trials = 3;
        cfg.metrics = vec![
            Metric::Epsilon3d,
            Metric::P75,
            Metric::FloorHitRate,
            Metric::Cr,
            Metric::MseS1,
        ];
        let dir = tempfile::tempdir().unwrap();
        let out = run_experiment(&cfg, dir.path()).unwrap();
        let eps = &out.matrices[0];
        let vals = eps.trials("b", "synth-4");
        assert_eq!(vals.len(), 3);
        assert!(vals.iter().all(|&v| v == vals[0]));
        // Single-floor synthetic data has floor labels; mse applies to AkM only.
        assert_eq!(out.matrices[2].values.len(), 3);
        assert!(out.matrices[3].values.values().all(|&v| v == 1.0));
        assert!(out.matrices[4].values.is_empty());
    }

    #[test]
    fn failing_triple_is_named() {
        let mut spec = ClusterSpec::new(ClusterAlgo::KMeans, CountRule::Rfp1);
        spec.max_iter = Some(5);
        let mut m = MethodConfig::clustered("km", KnnConfig::default(), spec);
        // Representation floor above the data forces a range error at run time.
        m.knn.representation.min_rss = -30.0;
        let cfg = ExperimentConfig::new(
            vec![small_synth(5)],
            vec![MethodConfig::plain("b", KnnConfig::default()).baseline(), m],
        );
        let dir = tempfile::tempdir().unwrap();
        let err = run_experiment(&cfg, dir.path()).unwrap_err();
        match err {
            Error::Evaluation {
                method, dataset, trial, ..
            } => {
                assert_eq!((method.as_str(), dataset.as_str(), trial), ("km", "synth-5", 1));
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn aggregate_command_is_order_independent() {
        let dir = tempfile::tempdir().unwrap();
        let a = "metric,method,scenario,trial,value\neps,b,s1,1,2\neps,x,s1,1,3\neps,b,s2,1,4\neps,x,s2,1,2\n";
        let mut lines: Vec<&str> = a.lines().skip(1).collect();
        lines.reverse();
        let b = format!("metric,method,scenario,trial,value\n{}\n", lines.join("\n"));
        std::fs::write(dir.path().join("a.csv"), a).unwrap();
        std::fs::write(dir.path().join("b.csv"), b).unwrap();
        let ra = cmd_aggregate(&[dir.path().join("a.csv")], "b", None, &dir.path().join("ra")).unwrap();
        let rb = cmd_aggregate(&[dir.path().join("b.csv")], "b", None, &dir.path().join("rb")).unwrap();
        assert_eq!(ra.to_markdown(), rb.to_markdown());
        assert_eq!(ra.metrics["eps"]["x"].cross_scenario_mean, 1.0);
        assert!(matches!(
            cmd_aggregate(&[dir.path().join("a.csv")], "zzz", None, dir.path()),
            Err(Error::UnknownBaseline(_))
        ));
    }

    #[test]
    fn akm_sweep_report() {
        let mut cfg = ExperimentConfig::new(
            vec![small_synth(6)],
            vec![MethodConfig::plain("b", KnnConfig::default()).baseline()],
        );
        cfg.trials = 1;
        let dir = tempfile::tempdir().unwrap();
        let sweep = run_akm_sweep(&cfg, dir.path(), &[4, 2, 7], None).unwrap();
        assert_eq!(sweep.ks, [2, 4, 7]);
        let rows = sweep.rows();
        assert!((rows[0].1[4].unwrap() - 1.0).abs() < 1e-12);
        assert!((rows[1].1[3].unwrap() - 0.5).abs() < 1e-12);
        assert!(sweep.best_k().is_some());
        assert!(dir.path().join("results/akm_sweep.md").exists());
    }
}
