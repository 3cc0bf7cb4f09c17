//! Fingerprints, datasets, the CSV interchange format and the seeded
//! log-distance synthetic generator.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sentinel for an access point that was not heard in a scan.
pub const NOT_DETECTED: f64 = 100.0;

/// Lowest RSS accepted as a detected value, in dBm.
pub const RSS_FLOOR_DBM: f64 = -120.0;

/// Default minimal legal RSS used by the representations.
pub const DEFAULT_MIN_RSS: f64 = -104.0;

#[inline]
pub fn is_detected(rss: f64) -> bool {
    rss != NOT_DETECTED
}

/// One RSS scan: one slot per access point, in dBm, or [`NOT_DETECTED`].
#[derive(Debug, Clone, PartialEq)]
pub struct Fingerprint(Vec<f64>);

impl Fingerprint {
    pub fn new(rss: Vec<f64>) -> Result<Self> {
        for (slot, &v) in rss.iter().enumerate() {
            if is_detected(v) && !(v.is_finite() && (RSS_FLOOR_DBM..=0.0).contains(&v)) {
                return Err(Error::Config(format!(
                    "RSS value {v} at slot {slot} is outside [{RSS_FLOOR_DBM}, 0] dBm"
                )));
            }
        }
        Ok(Fingerprint(rss))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn detected_count(&self) -> usize {
        self.0.iter().filter(|&&v| is_detected(v)).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Position {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub floor: Option<i32>,
}

impl Position {
    pub fn new(x: f64, y: f64, z: f64, floor: Option<i32>) -> Self {
        Position { x, y, z, floor }
    }

    pub fn distance_3d(&self, other: &Position) -> f64 {
        let (dx, dy, dz) = (self.x - other.x, self.y - other.y, self.z - other.z);
        (dx * dx + dy * dy + dz * dz).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub fingerprint: Fingerprint,
    pub position: Position,
}

/// A named scenario: a training radio map plus an independent test set.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub name: String,
    pub ap_count: usize,
    pub train: Vec<Sample>,
    pub test: Vec<Sample>,
    /// Minimal legal RSS for the representations (dBm).
    pub min_rss: f64,
}

impl Dataset {
    pub fn new(name: impl Into<String>, train: Vec<Sample>, test: Vec<Sample>) -> Result<Self> {
        let name = name.into();
        if train.is_empty() {
            return Err(Error::Empty("training set"));
        }
        if test.is_empty() {
            return Err(Error::Empty("test set"));
        }
        let ap_count = train[0].fingerprint.len();
        if ap_count == 0 {
            return Err(Error::Config(format!("dataset `{name}` has no access points")));
        }
        for s in train.iter().chain(test.iter()) {
            if s.fingerprint.len() != ap_count {
                return Err(Error::DimensionMismatch {
                    expected: ap_count,
                    actual: s.fingerprint.len(),
                });
            }
            let p = &s.position;
            if !(p.x.is_finite() && p.y.is_finite() && p.z.is_finite()) {
                return Err(Error::Config(format!("dataset `{name}` has a non-finite coordinate")));
            }
        }
        check_floor_consistency(&name, train.iter().chain(test.iter()))?;
        Ok(Dataset {
            name,
            ap_count,
            train,
            test,
            min_rss: DEFAULT_MIN_RSS,
        })
    }

    pub fn with_min_rss(mut self, min_rss: f64) -> Self {
        self.min_rss = min_rss;
        self
    }

    pub fn has_floors(&self) -> bool {
        self.test.iter().all(|s| s.position.floor.is_some()) && self.train.iter().all(|s| s.position.floor.is_some())
    }
}

// Samples at the same height (within 1e-9 m) must agree on the floor index.
fn check_floor_consistency<'a>(name: &str, samples: impl Iterator<Item = &'a Sample>) -> Result<()> {
    let mut floored: Vec<(f64, i32)> = samples
        .filter_map(|s| s.position.floor.map(|f| (s.position.z, f)))
        .collect();
    floored.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    for w in floored.windows(2) {
        if (w[1].0 - w[0].0).abs() <= 1e-9 && w[0].1 != w[1].1 {
            return Err(Error::Config(format!(
                "dataset `{name}`: floors {} and {} share height z={}",
                w[0].1, w[1].1, w[0].0
            )));
        }
    }
    Ok(())
}

/// Reads a train/test pair in the CSV interchange format.
pub fn load_dataset(train_path: &Path, test_path: &Path) -> Result<Dataset> {
    let (train_aps, train) = read_samples(train_path)?;
    let (test_aps, test) = read_samples(test_path)?;
    if train_aps != test_aps {
        return Err(Error::parse(
            test_path.display().to_string(),
            1,
            None,
            format!("header declares {test_aps} access points, training file declares {train_aps}"),
        ));
    }
    let name = train_path
        .file_stem()
        .map(|s| s.to_string_lossy().trim_end_matches("_train").to_string())
        .unwrap_or_else(|| "dataset".to_string());
    Dataset::new(name, train, test)
}

fn read_samples(path: &Path) -> Result<(usize, Vec<Sample>)> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_samples(&path.display().to_string(), &text)
}

/// Parses one CSV file of the interchange format. `file` is used for error
/// locations only.
pub fn parse_samples(file: &str, text: &str) -> Result<(usize, Vec<Sample>)> {
    if text.trim().is_empty() {
        return Err(Error::parse(file, 1, None, "empty file"));
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut records = reader.records();
    let header = match records.next() {
        Some(Ok(h)) => h,
        Some(Err(e)) => return Err(Error::parse(file, 1, None, e.to_string())),
        None => return Err(Error::parse(file, 1, None, "empty file")),
    };
    let ap_count = validate_header(file, &header)?;
    let columns = ap_count + 4;

    let mut samples = Vec::new();
    for record in records {
        let record = record.map_err(|e| {
            let row = e.position().map(|p| p.line() as usize).unwrap_or(0);
            Error::parse(file, row, None, e.to_string())
        })?;
        let row = record.position().map(|p| p.line() as usize).unwrap_or(0);
        if record.len() == 1 && record[0].trim().is_empty() {
            continue;
        }
        if record.len() != columns {
            return Err(Error::parse(
                file,
                row,
                None,
                format!("expected {columns} columns, found {}", record.len()),
            ));
        }
        let num = |col: usize| -> Result<f64> {
            let cell = record[col].trim();
            cell.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::parse(file, row, Some(col + 1), format!("non-numeric cell `{cell}`")))
        };
        let mut rss = Vec::with_capacity(ap_count);
        for col in 0..ap_count {
            let v = num(col)?;
            if is_detected(v) && !(RSS_FLOOR_DBM..=0.0).contains(&v) {
                return Err(Error::parse(
                    file,
                    row,
                    Some(col + 1),
                    format!("RSS {v} outside [{RSS_FLOOR_DBM}, 0] dBm and not the sentinel 100"),
                ));
            }
            rss.push(v);
        }
        let (x, y, z) = (num(ap_count)?, num(ap_count + 1)?, num(ap_count + 2)?);
        let floor_cell = record[ap_count + 3].trim();
        let floor = if floor_cell.is_empty() {
            None
        } else {
            Some(floor_cell.parse::<i32>().map_err(|_| {
                Error::parse(
                    file,
                    row,
                    Some(ap_count + 4),
                    format!("floor `{floor_cell}` is not an integer"),
                )
            })?)
        };
        samples.push(Sample {
            fingerprint: Fingerprint(rss),
            position: Position { x, y, z, floor },
        });
    }
    if samples.is_empty() {
        return Err(Error::parse(file, 2, None, "no sample rows"));
    }
    Ok((ap_count, samples))
}

fn validate_header(file: &str, header: &csv::StringRecord) -> Result<usize> {
    let n = header.len();
    if n < 5 {
        return Err(Error::parse(
            file,
            1,
            None,
            "header needs at least one ap column and x,y,z,floor",
        ));
    }
    let ap_count = n - 4;
    for (i, name) in header.iter().enumerate() {
        let expected = if i < ap_count {
            ap_column_name(i)
        } else {
            ["x", "y", "z", "floor"][i - ap_count].to_string()
        };
        if name.trim() != expected {
            return Err(Error::parse(
                file,
                1,
                Some(i + 1),
                format!("malformed header: expected `{expected}`, found `{name}`"),
            ));
        }
    }
    Ok(ap_count)
}

fn ap_column_name(i: usize) -> String {
    format!("ap_{:04}", i + 1)
}

/// Canonical CSV text for a list of samples. Numbers use the shortest
/// representation that round-trips.
pub fn samples_to_csv(ap_count: usize, samples: &[Sample]) -> String {
    let mut out = String::new();
    for i in 0..ap_count {
        out.push_str(&ap_column_name(i));
        out.push(',');
    }
    out.push_str("x,y,z,floor\n");
    for s in samples {
        for v in s.fingerprint.values() {
            write!(out, "{v},").unwrap();
        }
        let p = &s.position;
        write!(out, "{},{},{},", p.x, p.y, p.z).unwrap();
        if let Some(f) = p.floor {
            write!(out, "{f}").unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn save_dataset(dataset: &Dataset, train_path: &Path, test_path: &Path) -> Result<()> {
    crate::io::write_atomic(train_path, samples_to_csv(dataset.ap_count, &dataset.train).as_bytes())?;
    crate::io::write_atomic(test_path, samples_to_csv(dataset.ap_count, &dataset.test).as_bytes())
}

/// Parameters of the log-distance synthetic radio map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticConfig {
    pub seed: u64,
    pub width: f64,
    pub height: f64,
    pub floors: u32,
    pub floor_height: f64,
    pub ap_count: usize,
    pub train_count: usize,
    pub test_count: usize,
    /// RSS at the 1 m reference distance (dBm).
    pub p0: f64,
    pub path_loss_exponent: f64,
    pub noise_sigma: f64,
    pub detection_threshold: f64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            seed: 1,
            width: 60.0,
            height: 40.0,
            floors: 1,
            floor_height: 3.0,
            ap_count: 20,
            train_count: 500,
            test_count: 100,
            p0: -40.0,
            path_loss_exponent: 2.5,
            noise_sigma: 4.0,
            detection_threshold: -95.0,
        }
    }
}

impl SyntheticConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(format!("synthetic config: {m}")));
        if self.ap_count == 0 || self.train_count == 0 || self.test_count == 0 || self.floors == 0 {
            return bad("counts must be positive");
        }
        if !(self.width > 0.0 && self.height > 0.0 && self.floor_height >= 0.0) {
            return bad("area dimensions must be positive");
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return bad("noise_sigma must be >= 0");
        }
        if !(RSS_FLOOR_DBM..=0.0).contains(&self.detection_threshold) {
            return bad("detection_threshold must lie in [-120, 0]");
        }
        if !(self.p0.is_finite() && self.path_loss_exponent.is_finite() && self.path_loss_exponent >= 0.0) {
            return bad("p0 and path_loss_exponent must be finite, exponent >= 0");
        }
        Ok(())
    }

    /// Noise-free RSS at distance `d` meters; `d` is clamped to the 1 m
    /// reference distance.
    pub fn mean_rss(&self, d: f64) -> f64 {
        self.p0 - 10.0 * self.path_loss_exponent * d.max(1.0).log10()
    }
}

/// Draws a uniformly placed synthetic radio map. A pure function of `config`.
pub fn generate_synthetic(config: &SyntheticConfig) -> Result<Dataset> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let place = |rng: &mut ChaCha8Rng| {
        let x = rng.gen_range(0.0..config.width);
        let y = rng.gen_range(0.0..config.height);
        let floor = rng.gen_range(0..config.floors) as i32;
        Position::new(x, y, floor as f64 * config.floor_height, Some(floor))
    };
    let aps: Vec<Position> = (0..config.ap_count).map(|_| place(&mut rng)).collect();
    let noise = Normal::new(0.0, config.noise_sigma).expect("validated sigma");

    let draw = |count: usize, rng: &mut ChaCha8Rng| -> Vec<Sample> {
        (0..count)
            .map(|_| {
                let position = place(rng);
                let rss = aps
                    .iter()
                    .map(|ap| {
                        let mut v = config.mean_rss(position.distance_3d(ap));
                        if config.noise_sigma > 0.0 {
                            v += noise.sample(rng);
                        }
                        let v = v.min(0.0);
                        if v < config.detection_threshold {
                            NOT_DETECTED
                        } else {
                            v
                        }
                    })
                    .collect();
                Sample {
                    fingerprint: Fingerprint(rss),
                    position,
                }
            })
            .collect()
    };
    let train = draw(config.train_count, &mut rng);
    let test = draw(config.test_count, &mut rng);
    Dataset::new(format!("synth-{}", config.seed), train, test)
}

/// Five desk-scale scenarios with differing geometry, density and noise.
pub fn bundled_synthetic_configs() -> Vec<SyntheticConfig> {
    let base = SyntheticConfig::default();
    vec![
        SyntheticConfig {
            seed: 101,
            ..base.clone()
        },
        SyntheticConfig {
            seed: 202,
            width: 80.0,
            height: 50.0,
            ap_count: 30,
            train_count: 600,
            test_count: 120,
            noise_sigma: 5.0,
            ..base.clone()
        },
        SyntheticConfig {
            seed: 303,
            floors: 3,
            ap_count: 24,
            train_count: 700,
            test_count: 140,
            path_loss_exponent: 3.0,
            ..base.clone()
        },
        SyntheticConfig {
            seed: 404,
            width: 40.0,
            height: 40.0,
            ap_count: 16,
            train_count: 500,
            test_count: 100,
            noise_sigma: 3.0,
            ..base.clone()
        },
        SyntheticConfig {
            seed: 505,
            width: 100.0,
            height: 30.0,
            floors: 2,
            ap_count: 28,
            train_count: 800,
            test_count: 150,
            noise_sigma: 6.0,
            detection_threshold: -100.0,
            ..base
        },
    ]
}
