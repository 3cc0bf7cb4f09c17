//! Metric aggregation across trials and scenarios.
//!
//! Raw values `M[method, scenario, trial]` are averaged over trials, divided
//! by the baseline method's trial average in the same scenario, and then
//! summarized across scenarios by mean and sample standard deviation.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Orientation {
    LowerIsBetter,
    HigherIsBetter,
}

impl Orientation {
    /// Conventional orientation for the metric names the harness emits.
    pub fn for_metric(name: &str) -> Self {
        match name {
            "floor_hit_rate" | "cr" => Orientation::HigherIsBetter,
            _ => Orientation::LowerIsBetter,
        }
    }
}

/// Key of one raw observation.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TrialKey {
    pub method: String,
    pub scenario: String,
    pub trial: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricMatrix {
    pub metric_name: String,
    pub orientation: Orientation,
    pub values: BTreeMap<TrialKey, f64>,
}

impl MetricMatrix {
    pub fn new(metric_name: impl Into<String>) -> Self {
        let metric_name = metric_name.into();
        MetricMatrix {
            orientation: Orientation::for_metric(&metric_name),
            metric_name,
            values: BTreeMap::new(),
        }
    }

    pub fn insert(&mut self, method: &str, scenario: &str, trial: u32, value: f64) -> Result<()> {
        if !value.is_finite() {
            return Err(Error::Config(format!(
                "{}: non-finite value for ({method}, {scenario}, {trial})",
                self.metric_name
            )));
        }
        self.values.insert(
            TrialKey {
                method: method.to_string(),
                scenario: scenario.to_string(),
                trial,
            },
            value,
        );
        Ok(())
    }

    pub fn methods(&self) -> BTreeSet<&str> {
        self.values.keys().map(|k| k.method.as_str()).collect()
    }

    pub fn scenarios(&self) -> BTreeSet<&str> {
        self.values.keys().map(|k| k.scenario.as_str()).collect()
    }

    /// Trial values for one (method, scenario) in trial order.
    pub fn trials(&self, method: &str, scenario: &str) -> Vec<f64> {
        self.values
            .iter()
            .filter(|(k, _)| k.method == method && k.scenario == scenario)
            .map(|(_, &v)| v)
            .collect()
    }

    /// Warnings about (method, scenario) cells whose trial indices are not
    /// `1..=n` or whose trial count differs from the most common count.
    pub fn trial_warnings(&self) -> Vec<String> {
        let mut per_cell: BTreeMap<(&str, &str), Vec<u32>> = BTreeMap::new();
        for k in self.values.keys() {
            per_cell.entry((&k.method, &k.scenario)).or_default().push(k.trial);
        }
        let mut freq: BTreeMap<usize, usize> = BTreeMap::new();
        for t in per_cell.values() {
            *freq.entry(t.len()).or_default() += 1;
        }
        let common = freq.iter().max_by_key(|&(n, c)| (*c, *n)).map(|(&n, _)| n).unwrap_or(0);
        let mut out = Vec::new();
        for ((m, s), trials) in &per_cell {
            let contiguous = trials.iter().enumerate().all(|(i, &t)| t as usize == i + 1);
            if !contiguous {
                out.push(format!(
                    "{}: ({m}, {s}) trial indices are not contiguous from 1",
                    self.metric_name
                ));
            }
            if trials.len() != common {
                out.push(format!(
                    "{}: ({m}, {s}) has {} trials, expected {common}; averaging available trials",
                    self.metric_name,
                    trials.len()
                ));
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorStats {
    pub mean: f64,
    pub median: f64,
    pub p75: f64,
    pub rmse: f64,
    pub floor_hit_rate: Option<f64>,
}

/// Quantile by linear interpolation between order statistics at position
/// `q·(n−1)`. `sorted` must be non-empty and ascending.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

pub fn error_stats(errors: &[f64], floor_hits: Option<&[bool]>) -> Result<ErrorStats> {
    if errors.is_empty() {
        return Err(Error::Empty("error list"));
    }
    let n = errors.len() as f64;
    let mut sorted = errors.to_vec();
    sorted.sort_by(f64::total_cmp);
    let floor_hit_rate = match floor_hits {
        Some([]) => return Err(Error::Empty("floor hit list")),
        Some(h) => Some(h.iter().filter(|&&b| b).count() as f64 / h.len() as f64),
        None => None,
    };
    Ok(ErrorStats {
        mean: errors.iter().sum::<f64>() / n,
        median: quantile_sorted(&sorted, 0.5),
        p75: quantile_sorted(&sorted, 0.75),
        rmse: (errors.iter().map(|e| e * e).sum::<f64>() / n).sqrt(),
        floor_hit_rate,
    })
}

/// Mean over trials.
pub fn aggregate_trials(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::Empty("trial values"));
    }
    Ok(values.iter().sum::<f64>() / values.len() as f64)
}

/// Ratio of a method's trial mean to the baseline's trial mean.
pub fn normalize_to_baseline(method_mean: f64, baseline_mean: f64) -> Result<f64> {
    if !(baseline_mean > 0.0) {
        return Err(Error::Normalization {
            metric: String::new(),
            value: baseline_mean,
        });
    }
    Ok(method_mean / baseline_mean)
}

/// Mean and sample standard deviation (divisor N−1; 0 for one scenario).
pub fn aggregate_scenarios(normalized: &[f64]) -> Result<(f64, f64)> {
    if normalized.is_empty() {
        return Err(Error::Empty("scenario values"));
    }
    let n = normalized.len() as f64;
    let mean = normalized.iter().sum::<f64>() / n;
    if normalized.len() == 1 {
        return Ok((mean, 0.0));
    }
    let var = normalized.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    Ok((mean, var.sqrt()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregatedMetric {
    pub metric_name: String,
    pub method: String,
    pub baseline_method: String,
    pub per_scenario_trials: BTreeMap<String, usize>,
    pub per_scenario_mean: BTreeMap<String, f64>,
    pub per_scenario_normalized: BTreeMap<String, f64>,
    pub cross_scenario_mean: f64,
    pub cross_scenario_std: f64,
}

/// Runs trial averaging, baseline normalization and cross-scenario
/// aggregation for every method in `matrix`. Scenarios the baseline did not
/// run are skipped for all methods.
pub fn aggregate_metric(matrix: &MetricMatrix, baseline: &str) -> Result<BTreeMap<String, AggregatedMetric>> {
    if !matrix.methods().contains(baseline) {
        return Err(Error::UnknownBaseline(baseline.to_string()));
    }
    let mut means: BTreeMap<(&str, &str), (f64, usize)> = BTreeMap::new();
    let mut cells: BTreeMap<(&str, &str), Vec<f64>> = BTreeMap::new();
    for (k, &v) in &matrix.values {
        cells.entry((&k.method, &k.scenario)).or_default().push(v);
    }
    for (cell, vals) in &cells {
        means.insert(*cell, (aggregate_trials(vals)?, vals.len()));
    }

    let mut out = BTreeMap::new();
    for method in matrix.methods() {
        let mut agg = AggregatedMetric {
            metric_name: matrix.metric_name.clone(),
            method: method.to_string(),
            baseline_method: baseline.to_string(),
            per_scenario_trials: BTreeMap::new(),
            per_scenario_mean: BTreeMap::new(),
            per_scenario_normalized: BTreeMap::new(),
            cross_scenario_mean: 0.0,
            cross_scenario_std: 0.0,
        };
        for scenario in matrix.scenarios() {
            let (Some(&(m, n)), Some(&(b, _))) = (means.get(&(method, scenario)), means.get(&(baseline, scenario)))
            else {
                continue;
            };
            let norm = if method == baseline {
                // Exact self-ratio, even where b is not representable as m/b == 1.
                if !(b > 0.0) {
                    return Err(Error::Normalization {
                        metric: matrix.metric_name.clone(),
                        value: b,
                    });
                }
                1.0
            } else {
                normalize_to_baseline(m, b).map_err(|_| Error::Normalization {
                    metric: matrix.metric_name.clone(),
                    value: b,
                })?
            };
            agg.per_scenario_trials.insert(scenario.to_string(), n);
            agg.per_scenario_mean.insert(scenario.to_string(), m);
            agg.per_scenario_normalized.insert(scenario.to_string(), norm);
        }
        if agg.per_scenario_normalized.is_empty() {
            continue;
        }
        let normalized: Vec<f64> = agg.per_scenario_normalized.values().copied().collect();
        let (mean, std) = aggregate_scenarios(&normalized)?;
        agg.cross_scenario_mean = mean;
        agg.cross_scenario_std = std;
        out.insert(method.to_string(), agg);
    }
    Ok(out)
}

/// Elementwise transform applied to an aggregated metric before weighting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Transform {
    #[default]
    Identity,
    Square,
    OneMinus,
}

impl Transform {
    pub fn apply(self, v: f64) -> f64 {
        match self {
            Transform::Identity => v,
            Transform::Square => v * v,
            Transform::OneMinus => 1.0 - v,
        }
    }
}

impl FromStr for Transform {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "identity" => Ok(Transform::Identity),
            "square" => Ok(Transform::Square),
            "one_minus" => Ok(Transform::OneMinus),
            other => Err(Error::Config(format!("unknown transform `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WeightedScore {
    pub weights: BTreeMap<String, f64>,
    pub transforms: BTreeMap<String, Transform>,
}

impl WeightedScore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, metric: &str, weight: f64, transform: Transform) -> Self {
        self.weights.insert(metric.to_string(), weight);
        self.transforms.insert(metric.to_string(), transform);
        self
    }

    /// The weighting used to pick the AkM cluster count.
    pub fn akm_default() -> Self {
        WeightedScore::new()
            .with("mse_s1", 0.05, Transform::Identity)
            .with("mse_s2", 0.05, Transform::Identity)
            .with("epsilon_3d", 0.9, Transform::Square)
            .with("cr", 0.2, Transform::OneMinus)
    }

    pub fn validate(&self) -> Result<()> {
        if self.weights.values().any(|w| !(*w >= 0.0 && w.is_finite())) {
            return Err(Error::Config("weights must be non-negative".into()));
        }
        if !self.weights.values().any(|&w| w > 0.0) {
            return Err(Error::Config("at least one weight must be non-zero".into()));
        }
        Ok(())
    }
}

/// `Σ ω_m · t_m(M̃_m)` over the weighted metrics.
pub fn weighted_combine(aggregates: &BTreeMap<String, f64>, score: &WeightedScore) -> Result<f64> {
    score.validate()?;
    let mut total = 0.0;
    for (metric, &w) in &score.weights {
        if w == 0.0 {
            continue;
        }
        let v = aggregates
            .get(metric)
            .ok_or_else(|| Error::MissingMetric(metric.clone()))?;
        let t = score.transforms.get(metric).copied().unwrap_or_default();
        total += w * t.apply(*v);
    }
    Ok(total)
}

/// Aggregates for several metrics against one baseline, plus warnings
/// collected along the way.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AggregateReport {
    pub baseline: String,
    /// metric → method → aggregate
    pub metrics: BTreeMap<String, BTreeMap<String, AggregatedMetric>>,
    /// method → F̃, when a weighting was supplied.
    pub scores: BTreeMap<String, f64>,
    pub warnings: Vec<String>,
}

impl AggregateReport {
    /// Aggregates every matrix. Metrics that cannot be ratio-normalized or
    /// that the baseline never reported are dropped with a warning.
    pub fn build(matrices: &[MetricMatrix], baseline: &str, score: Option<&WeightedScore>) -> Result<Self> {
        if !matrices.iter().any(|m| m.methods().contains(baseline)) {
            return Err(Error::UnknownBaseline(baseline.to_string()));
        }
        let mut report = AggregateReport {
            baseline: baseline.to_string(),
            ..Default::default()
        };
        for m in matrices {
            report.warnings.extend(m.trial_warnings());
            match aggregate_metric(m, baseline) {
                Ok(agg) => {
                    report.metrics.insert(m.metric_name.clone(), agg);
                }
                Err(e @ (Error::Normalization { .. } | Error::UnknownBaseline(_))) => {
                    report.warnings.push(format!("{}: skipped ({e})", m.metric_name));
                }
                Err(e) => return Err(e),
            }
        }
        if let Some(score) = score {
            for method in report.methods() {
                let aggregates: BTreeMap<String, f64> = report
                    .metrics
                    .iter()
                    .filter_map(|(name, per)| per.get(&method).map(|a| (name.clone(), a.cross_scenario_mean)))
                    .collect();
                match weighted_combine(&aggregates, score) {
                    Ok(f) => {
                        report.scores.insert(method, f);
                    }
                    Err(Error::MissingMetric(m)) => report
                        .warnings
                        .push(format!("score for `{method}` skipped: missing metric `{m}`")),
                    Err(e) => return Err(e),
                }
            }
        }
        Ok(report)
    }

    pub fn methods(&self) -> Vec<String> {
        let set: BTreeSet<&String> = self.metrics.values().flat_map(|m| m.keys()).collect();
        set.into_iter().cloned().collect()
    }

    /// Per-scenario rows: `metric,method,scenario,trials,mean,normalized`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("metric,method,scenario,trials,mean,normalized\n");
        for (metric, per) in &self.metrics {
            for (method, a) in per {
                for (scenario, mean) in &a.per_scenario_mean {
                    writeln!(
                        out,
                        "{metric},{method},{scenario},{},{mean},{}",
                        a.per_scenario_trials[scenario], a.per_scenario_normalized[scenario]
                    )
                    .unwrap();
                }
            }
        }
        out
    }

    /// Cross-scenario rows: `metric,method,baseline,scenarios,mean,std`.
    pub fn summary_csv(&self) -> String {
        let mut out = String::from("metric,method,baseline,scenarios,mean,std\n");
        for (metric, per) in &self.metrics {
            for (method, a) in per {
                writeln!(
                    out,
                    "{metric},{method},{},{},{},{}",
                    self.baseline,
                    a.per_scenario_normalized.len(),
                    a.cross_scenario_mean,
                    a.cross_scenario_std
                )
                .unwrap();
            }
        }
        out
    }

    /// One table per metric (scenario rows, mean and normalized columns per
    /// method, aggregate footer) followed by a method summary.
    pub fn to_markdown(&self) -> String {
        let mut out = String::new();
        let methods = self.methods();
        writeln!(out, "# Aggregate report\n\nBaseline: `{}`\n", self.baseline).unwrap();
        writeln!(out, "## Summary (mean (std) of baseline-normalized values)\n").unwrap();
        let metric_names: Vec<&String> = self.metrics.keys().collect();
        write!(out, "| method |").unwrap();
        for m in &metric_names {
            write!(out, " {m} |").unwrap();
        }
        if !self.scores.is_empty() {
            out.push_str(" F |");
        }
        out.push('\n');
        out.push_str("|---|");
        for _ in &metric_names {
            out.push_str("---|");
        }
        if !self.scores.is_empty() {
            out.push_str("---|");
        }
        out.push('\n');
        for method in &methods {
            write!(out, "| {method} |").unwrap();
            for m in &metric_names {
                match self.metrics[*m].get(method) {
                    Some(a) => write!(out, " {:.2} ({:.2}) |", a.cross_scenario_mean, a.cross_scenario_std).unwrap(),
                    None => out.push_str(" – |"),
                }
            }
            if !self.scores.is_empty() {
                match self.scores.get(method) {
                    Some(f) => write!(out, " {f:.2} |").unwrap(),
                    None => out.push_str(" – |"),
                }
            }
            out.push('\n');
        }

        for (metric, per) in &self.metrics {
            writeln!(out, "\n## {metric}\n").unwrap();
            let scenarios: BTreeSet<&String> = per.values().flat_map(|a| a.per_scenario_mean.keys()).collect();
            write!(out, "| scenario |").unwrap();
            for method in per.keys() {
                write!(out, " {method} mean | {method} norm |").unwrap();
            }
            out.push_str("\n|---|");
            for _ in per {
                out.push_str("---|---|");
            }
            out.push('\n');
            for s in &scenarios {
                write!(out, "| {s} |").unwrap();
                for a in per.values() {
                    match (a.per_scenario_mean.get(*s), a.per_scenario_normalized.get(*s)) {
                        (Some(m), Some(n)) => write!(out, " {} | {n:.2} |", fmt_mean(*m)).unwrap(),
                        _ => out.push_str(" – | – |"),
                    }
                }
                out.push('\n');
            }
            write!(out, "| **aggregate** |").unwrap();
            for a in per.values() {
                write!(out, " | {:.2} ({:.2}) |", a.cross_scenario_mean, a.cross_scenario_std).unwrap();
            }
            out.push('\n');
        }
        if !self.warnings.is_empty() {
            out.push_str("\n## Warnings\n\n");
            for w in &self.warnings {
                writeln!(out, "- {w}").unwrap();
            }
        }
        out
    }
}

fn fmt_mean(v: f64) -> String {
    if v != 0.0 && v.abs() < 0.01 {
        format!("{v:.3e}")
    } else {
        format!("{v:.2}")
    }
}

/// Raw matrices as `metric,method,scenario,trial,value` rows.
pub fn matrices_to_csv(matrices: &[MetricMatrix]) -> String {
    let mut out = String::from("metric,method,scenario,trial,value\n");
    for m in matrices {
        for (k, v) in &m.values {
            writeln!(out, "{},{},{},{},{v}", m.metric_name, k.method, k.scenario, k.trial).unwrap();
        }
    }
    out
}

/// Parses raw metric CSV text, merging rows into `into` by metric name.
pub fn parse_matrices_csv(file: &str, text: &str, into: &mut BTreeMap<String, MetricMatrix>) -> Result<()> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| Error::parse(file, 1, None, e.to_string()))?
        .clone();
    let expected = ["metric", "method", "scenario", "trial", "value"];
    if headers.iter().map(str::trim).ne(expected) {
        return Err(Error::parse(
            file,
            1,
            None,
            format!("expected header `{}`", expected.join(",")),
        ));
    }
    for record in reader.records() {
        let record = record.map_err(|e| {
            let row = e.position().map(|p| p.line() as usize).unwrap_or(0);
            Error::parse(file, row, None, e.to_string())
        })?;
        let row = record.position().map(|p| p.line() as usize).unwrap_or(0);
        let trial: u32 = record[3]
            .trim()
            .parse()
            .map_err(|_| Error::parse(file, row, Some(4), format!("invalid trial `{}`", &record[3])))?;
        let value: f64 = record[4]
            .trim()
            .parse()
            .ok()
            .filter(|v: &f64| v.is_finite())
            .ok_or_else(|| Error::parse(file, row, Some(5), format!("invalid value `{}`", &record[4])))?;
        let metric = record[0].trim();
        into.entry(metric.to_string())
            .or_insert_with(|| MetricMatrix::new(metric))
            .insert(record[1].trim(), record[2].trim(), trial, value)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn error_stats_reference_values() {
        let s = error_stats(&[3.0, 4.0], None).unwrap();
        assert_eq!(s.mean, 3.5);
        assert!((s.rmse - 12.5f64.sqrt()).abs() < 1e-15);
        assert_eq!(s.floor_hit_rate, None);
        // Order statistic position 0.75·3 = 2.25 → 3 + 0.25·(4 − 3).
        let s = error_stats(&[4.0, 1.0, 3.0, 2.0], Some(&[true, true, false, true])).unwrap();
        assert_eq!(s.p75, 3.25);
        assert_eq!(s.median, 2.5);
        assert_eq!(s.floor_hit_rate, Some(0.75));
        assert!(error_stats(&[], None).is_err());
    }

    #[test]
    fn trial_average() {
        assert_eq!(aggregate_trials(&[7.5]).unwrap(), 7.5);
        assert_eq!(aggregate_trials(&[2.0, 2.0, 2.0]).unwrap(), 2.0);
        assert!(aggregate_trials(&[]).is_err());
    }

    #[test]
    fn normalization() {
        assert_eq!(normalize_to_baseline(2.82, 2.82).unwrap(), 1.0);
        assert!(normalize_to_baseline(1.0, 0.0).is_err());
        assert!(normalize_to_baseline(1.0, -2.0).is_err());
    }

    #[test]
    fn scenario_aggregation() {
        assert_eq!(aggregate_scenarios(&[1.3]).unwrap(), (1.3, 0.0));
        assert_eq!(aggregate_scenarios(&[1.0; 5]).unwrap(), (1.0, 0.0));
        let (m, s) = aggregate_scenarios(&[1.0, 3.0]).unwrap();
        assert_eq!(m, 2.0);
        assert!((s - 2f64.sqrt()).abs() < 1e-15);
        assert!(aggregate_scenarios(&[]).is_err());
    }

    #[test]
    fn weighted_projection_and_missing() {
        let aggs: BTreeMap<String, f64> = [("a".to_string(), 0.7), ("b".to_string(), 3.0)].into();
        let s = WeightedScore::new()
            .with("a", 1.0, Transform::Identity)
            .with("b", 0.0, Transform::Square);
        assert_eq!(weighted_combine(&aggs, &s).unwrap(), 0.7);
        let s = WeightedScore::new().with("c", 1.0, Transform::Identity);
        assert!(matches!(weighted_combine(&aggs, &s), Err(Error::MissingMetric(_))));
        let zero = WeightedScore::new().with("a", 0.0, Transform::Identity);
        assert!(weighted_combine(&aggs, &zero).is_err());
    }

    fn matrix(rows: &[(&str, &str, u32, f64)]) -> MetricMatrix {
        let mut m = MetricMatrix::new("epsilon_3d");
        for &(me, sc, t, v) in rows {
            m.insert(me, sc, t, v).unwrap();
        }
        m
    }

    #[test]
    fn baseline_is_exactly_one() {
        let m = matrix(&[
            ("b", "s1", 1, 0.3),
            ("b", "s1", 2, 0.7),
            ("b", "s2", 1, 1.1),
            ("x", "s1", 1, 1.0),
            ("x", "s2", 1, 2.2),
        ]);
        let agg = aggregate_metric(&m, "b").unwrap();
        assert!(agg["b"].per_scenario_normalized.values().all(|&v| v == 1.0));
        assert_eq!((agg["b"].cross_scenario_mean, agg["b"].cross_scenario_std), (1.0, 0.0));
        assert_eq!(agg["x"].per_scenario_normalized["s1"], 2.0);
        assert!((agg["x"].per_scenario_normalized["s2"] - 2.0).abs() < 1e-15);
        assert!(matches!(aggregate_metric(&m, "nope"), Err(Error::UnknownBaseline(_))));
    }

    #[test]
    fn trial_gaps_warn() {
        let m = matrix(&[
            ("b", "s", 1, 1.0),
            ("b", "s", 2, 1.0),
            ("x", "s", 1, 1.0),
            ("x", "s", 3, 1.0),
            ("y", "s", 1, 1.0),
        ]);
        let w = m.trial_warnings();
        assert!(w.iter().any(|w| w.contains("(x, s) trial indices")));
        assert!(w.iter().any(|w| w.contains("(y, s) has 1 trials")));
    }

    #[test]
    fn csv_round_trip_and_errors() {
        let m = matrix(&[("b", "s1", 1, 0.25), ("x", "s1", 1, 1.5)]);
        let text = matrices_to_csv(std::slice::from_ref(&m));
        let mut parsed = BTreeMap::new();
        parse_matrices_csv("raw.csv", &text, &mut parsed).unwrap();
        assert_eq!(parsed["epsilon_3d"], m);
        let bad = "metric,method,scenario,trial,value\neps,b,s,one,1\n";
        assert!(matches!(
            parse_matrices_csv("raw.csv", bad, &mut BTreeMap::new()),
            Err(Error::Parse {
                row: 2,
                column: Some(4),
                ..
            })
        ));
    }

    proptest! {
        #[test]
        fn scale_invariance(vals in prop::collection::vec(0.1f64..10.0, 6), c in 0.01f64..100.0) {
            let rows = [("b", 1), ("b", 2), ("x", 1), ("x", 2), ("y", 1), ("y", 2)];
            let mut m1 = MetricMatrix::new("m");
            let mut m2 = MetricMatrix::new("m");
            for ((method, t), v) in rows.iter().zip(&vals) {
                m1.insert(method, "s", *t, *v).unwrap();
                m2.insert(method, "s", *t, v * c).unwrap();
            }
            let (a1, a2) = (aggregate_metric(&m1, "b").unwrap(), aggregate_metric(&m2, "b").unwrap());
            for method in ["x", "y"] {
                let (n1, n2) = (a1[method].per_scenario_normalized["s"], a2[method].per_scenario_normalized["s"]);
                prop_assert!((n1 - n2).abs() <= 1e-12 * n1.abs().max(1.0));
            }
        }

        #[test]
        fn permutation_invariance(mut vals in prop::collection::vec(0.0f64..10.0, 1..20), seed in any::<u64>()) {
            let (m0, s0) = aggregate_scenarios(&vals).unwrap();
            let t0 = aggregate_trials(&vals).unwrap();
            let n = vals.len();
            vals.rotate_left((seed as usize) % n);
            vals.reverse();
            let (m1, s1) = aggregate_scenarios(&vals).unwrap();
            prop_assert!((m0 - m1).abs() < 1e-12 && (s0 - s1).abs() < 1e-12);
            prop_assert!((t0 - aggregate_trials(&vals).unwrap()).abs() < 1e-12);
        }

        #[test]
        fn monotone_in_trial_values(vals in prop::collection::vec(0.1f64..10.0, 2..8), bump in 0.0f64..5.0, idx in 0usize..8) {
            let base = 2.0;
            let before = normalize_to_baseline(aggregate_trials(&vals).unwrap(), base).unwrap();
            let mut up = vals.clone();
            let i = idx % up.len();
            up[i] += bump;
            let after = normalize_to_baseline(aggregate_trials(&up).unwrap(), base).unwrap();
            prop_assert!(after >= before);
        }

        #[test]
        fn identity_weighting_is_linear(a in -5.0f64..5.0, b in -5.0f64..5.0, w in 0.1f64..3.0) {
            let s = WeightedScore::new().with("m", w, Transform::Identity);
            let f = |x: f64| weighted_combine(&[("m".to_string(), x)].into(), &s).unwrap();
            prop_assert!((f(a + b) - (f(a) + f(b))).abs() < 1e-9);
        }
    }
}
