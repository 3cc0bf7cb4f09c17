//! GMMS plot: a method × scenario grid of ellipses. Fill color encodes one
//! normalized metric (green better, red worse), ellipse elongation another
//! (vertical means higher).

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::aggregate::AggregateReport;
use crate::error::{Error, Result};

const WHITE: [f64; 3] = [255.0, 255.0, 255.0];
const GREEN: [f64; 3] = [0.0, 160.0, 0.0];
const RED: [f64; 3] = [200.0, 0.0, 0.0];

fn check_positive(v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositive(v))
    }
}

/// `clamp(log2 v, −2, 2) / 2`.
pub fn color_score(v: f64) -> Result<f64> {
    check_positive(v)?;
    Ok(v.log2().clamp(-2.0, 2.0) / 2.0)
}

/// RGB fill for a color score in [−1, 1].
pub fn fill_rgb(s: f64) -> [u8; 3] {
    let (end, t) = if s < 0.0 { (GREEN, -s) } else { (RED, s) };
    let t = t.min(1.0);
    let mut out = [0u8; 3];
    for i in 0..3 {
        out[i] = (WHITE[i] + (end[i] - WHITE[i]) * t).round() as u8;
    }
    out
}

pub fn fill_color(v: f64) -> Result<String> {
    let [r, g, b] = fill_rgb(color_score(v)?);
    Ok(format!("#{r:02x}{g:02x}{b:02x}"))
}

/// Height-to-width ratio, `clamp(v, 1/3, 3)`.
pub fn shape_aspect(v: f64) -> Result<f64> {
    check_positive(v)?;
    Ok(v.clamp(1.0 / 3.0, 3.0))
}

/// Radii `(rx, ry)` of a constant-area ellipse with the given aspect.
pub fn ellipse_radii(r: f64, aspect: f64) -> (f64, f64) {
    let s = aspect.sqrt();
    (r / s, r * s)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GmmsGrid {
    pub methods: Vec<String>,
    pub scenarios: Vec<String>,
    /// (method, scenario) → (color value, shape value)
    pub cells: BTreeMap<(String, String), (f64, f64)>,
    pub color_label: String,
    pub shape_label: String,
}

impl GmmsGrid {
    pub fn new(color_label: &str, shape_label: &str) -> Self {
        GmmsGrid {
            methods: Vec::new(),
            scenarios: Vec::new(),
            cells: BTreeMap::new(),
            color_label: color_label.to_string(),
            shape_label: shape_label.to_string(),
        }
    }

    /// Adds a cell, appending the method and scenario to the axes on first
    /// sight.
    pub fn insert(&mut self, method: &str, scenario: &str, color: f64, shape: f64) {
        if !self.methods.iter().any(|m| m == method) {
            self.methods.push(method.to_string());
        }
        if !self.scenarios.iter().any(|s| s == scenario) {
            self.scenarios.push(scenario.to_string());
        }
        self.cells
            .insert((method.to_string(), scenario.to_string()), (color, shape));
    }

    pub fn validate(&self) -> Result<()> {
        if self.methods.is_empty() || self.scenarios.is_empty() {
            return Err(Error::Empty("GMMS grid"));
        }
        for m in &self.methods {
            for s in &self.scenarios {
                let &(c, sh) = self
                    .cells
                    .get(&(m.clone(), s.clone()))
                    .ok_or_else(|| Error::Config(format!("GMMS grid is missing cell ({m}, {s})")))?;
                check_positive(c)?;
                check_positive(sh)?;
            }
        }
        Ok(())
    }

    /// Builds a grid from per-scenario normalized values of an aggregate
    /// report.
    pub fn from_report(report: &AggregateReport, color_metric: &str, shape_metric: &str) -> Result<Self> {
        let color = report
            .metrics
            .get(color_metric)
            .ok_or_else(|| Error::MissingMetric(color_metric.to_string()))?;
        let shape = report
            .metrics
            .get(shape_metric)
            .ok_or_else(|| Error::MissingMetric(shape_metric.to_string()))?;
        let mut grid = GmmsGrid::new(color_metric, shape_metric);
        // Baseline row first, the rest in name order.
        let mut order: Vec<(&String, _)> = color.iter().collect();
        order.sort_by_key(|(m, _)| (**m != report.baseline, (*m).clone()));
        for (method, c) in order {
            let sh = shape
                .get(method)
                .ok_or_else(|| Error::Config(format!("method `{method}` lacks `{shape_metric}`")))?;
            for (scenario, &cv) in &c.per_scenario_normalized {
                let sv = *sh
                    .per_scenario_normalized
                    .get(scenario)
                    .ok_or_else(|| Error::Config(format!("missing `{shape_metric}` for ({method}, {scenario})")))?;
                grid.insert(method, scenario, cv, sv);
            }
        }
        grid.validate()?;
        Ok(grid)
    }

    /// Builds a grid from aggregate CSV text
    /// (`metric,method,scenario,trials,mean,normalized`).
    pub fn from_aggregate_csv(file: &str, text: &str, color_metric: &str, shape_metric: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new().from_reader(text.as_bytes());
        let headers = reader
            .headers()
            .map_err(|e| Error::parse(file, 1, None, e.to_string()))?
            .clone();
        let col = |name: &str| {
            headers
                .iter()
                .position(|h| h.trim() == name)
                .ok_or_else(|| Error::parse(file, 1, None, format!("missing column `{name}`")))
        };
        let (ci_metric, ci_method, ci_scenario, ci_norm) =
            (col("metric")?, col("method")?, col("scenario")?, col("normalized")?);
        let mut color: BTreeMap<(String, String), f64> = BTreeMap::new();
        let mut shape: BTreeMap<(String, String), f64> = BTreeMap::new();
        let mut order: Vec<(String, String)> = Vec::new();
        for record in reader.records() {
            let record = record.map_err(|e| Error::parse(file, 0, None, e.to_string()))?;
            let row = record.position().map(|p| p.line() as usize).unwrap_or(0);
            let metric = record[ci_metric].trim();
            let target = if metric == color_metric {
                &mut color
            } else if metric == shape_metric {
                &mut shape
            } else {
                continue;
            };
            let v: f64 = record[ci_norm].trim().parse().map_err(|_| {
                Error::parse(
                    file,
                    row,
                    Some(ci_norm + 1),
                    format!("invalid value `{}`", &record[ci_norm]),
                )
            })?;
            let key = (
                record[ci_method].trim().to_string(),
                record[ci_scenario].trim().to_string(),
            );
            if !order.contains(&key) {
                order.push(key.clone());
            }
            target.insert(key, v);
        }
        if color.is_empty() {
            return Err(Error::MissingMetric(color_metric.to_string()));
        }
        if shape.is_empty() {
            return Err(Error::MissingMetric(shape_metric.to_string()));
        }
        let mut grid = GmmsGrid::new(color_metric, shape_metric);
        for key in order {
            let (Some(&c), Some(&s)) = (color.get(&key), shape.get(&key)) else {
                return Err(Error::Config(format!(
                    "GMMS grid is missing cell ({}, {})",
                    key.0, key.1
                )));
            };
            grid.insert(&key.0, &key.1, c, s);
        }
        grid.validate()?;
        Ok(grid)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn shape_element(out: &mut String, cx: f64, cy: f64, r: f64, aspect: f64, fill: &str) {
    if aspect == 1.0 {
        writeln!(
            out,
            r##"  <circle cx="{cx:.2}" cy="{cy:.2}" r="{r:.2}" fill="{fill}" stroke="#333333" stroke-width="1"/>"##
        )
        .unwrap();
    } else {
        let (rx, ry) = ellipse_radii(r, aspect);
        writeln!(
            out,
            r##"  <ellipse cx="{cx:.2}" cy="{cy:.2}" rx="{rx:.2}" ry="{ry:.2}" fill="{fill}" stroke="#333333" stroke-width="1"/>"##
        )
        .unwrap();
    }
}

/// Renders the grid as an SVG 1.1 document. Output depends only on the
/// inputs: cells are emitted row-major and all coordinates use fixed
/// two-decimal formatting.
pub fn render_gmms(grid: &GmmsGrid, cell_px: u32) -> Result<String> {
    if cell_px == 0 {
        return Err(Error::Config("cell size must be positive".into()));
    }
    grid.validate()?;
    let cell = cell_px as f64;
    let r = cell * 0.25;
    let label_w = 10.0 + 7.0 * grid.methods.iter().map(|m| m.chars().count()).max().unwrap_or(0) as f64;
    let top = 40.0;
    let cols = grid.scenarios.len() as f64;
    let rows = grid.methods.len() as f64;
    let legend_h = 2.0 * cell + 50.0;
    let width = (label_w + cols * cell + 10.0).max(label_w + 5.0 * cell + 10.0);
    let height = top + rows * cell + legend_h;

    let mut out = String::new();
    writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#).unwrap();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width:.2}" height="{height:.2}" viewBox="0 0 {width:.2} {height:.2}" font-family="sans-serif" font-size="12">"#
    )
    .unwrap();
    writeln!(
        out,
        r#"  <rect x="0" y="0" width="{width:.2}" height="{height:.2}" fill="white"/>"#
    )
    .unwrap();
    writeln!(
        out,
        r#"  <title>GMMS: color = {}, shape = {}</title>"#,
        escape(&grid.color_label),
        escape(&grid.shape_label)
    )
    .unwrap();

    for (j, s) in grid.scenarios.iter().enumerate() {
        let x = label_w + (j as f64 + 0.5) * cell;
        writeln!(
            out,
            r#"  <text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            top - 10.0,
            escape(s)
        )
        .unwrap();
    }
    for (i, m) in grid.methods.iter().enumerate() {
        let y = top + (i as f64 + 0.5) * cell;
        writeln!(
            out,
            r#"  <text x="{:.2}" y="{y:.2}" text-anchor="end" dominant-baseline="middle">{}</text>"#,
            label_w - 6.0,
            escape(m)
        )
        .unwrap();
    }
    for (i, m) in grid.methods.iter().enumerate() {
        for (j, s) in grid.scenarios.iter().enumerate() {
            let (cv, sv) = grid.cells[&(m.clone(), s.clone())];
            let cx = label_w + (j as f64 + 0.5) * cell;
            let cy = top + (i as f64 + 0.5) * cell;
            shape_element(&mut out, cx, cy, r, shape_aspect(sv)?, &fill_color(cv)?);
        }
    }

    // Legend: color ramp and shape samples.
    let ly = top + rows * cell + 20.0;
    writeln!(
        out,
        r#"  <text x="{:.2}" y="{ly:.2}">color: {} (0.25 to 4, log scale)</text>"#,
        label_w,
        escape(&grid.color_label)
    )
    .unwrap();
    let sw = cell * 0.8;
    for (k, v) in [0.25, 0.5, 1.0, 2.0, 4.0].into_iter().enumerate() {
        let x = label_w + k as f64 * sw;
        writeln!(
            out,
            r##"  <rect x="{x:.2}" y="{:.2}" width="{sw:.2}" height="12.00" fill="{}" stroke="#333333" stroke-width="0.5"/>"##,
            ly + 6.0,
            fill_color(v)?
        )
        .unwrap();
        writeln!(
            out,
            r#"  <text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="10">{v}</text>"#,
            x + sw / 2.0,
            ly + 30.0
        )
        .unwrap();
    }
    let sy = ly + 50.0;
    writeln!(
        out,
        r#"  <text x="{:.2}" y="{sy:.2}">shape: {} (1/3 to 3)</text>"#,
        label_w,
        escape(&grid.shape_label)
    )
    .unwrap();
    for (k, v) in [1.0 / 3.0, 0.5, 1.0, 2.0, 3.0].into_iter().enumerate() {
        let cx = label_w + (k as f64 + 0.5) * cell;
        let cy = sy + cell * 0.5 + 6.0;
        let (rx, ry) = ellipse_radii(r, v);
        writeln!(
            out,
            r##"  <ellipse cx="{cx:.2}" cy="{cy:.2}" rx="{rx:.2}" ry="{ry:.2}" fill="#dddddd" stroke="#333333" stroke-width="1"/>"##
        )
        .unwrap();
    }
    out.push_str("</svg>\n");
    Ok(out)
}
