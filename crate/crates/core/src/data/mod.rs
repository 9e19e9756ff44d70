//! Tabular datasets: loading, preprocessing, splitting and correlation.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub mod adult;
pub mod german;
pub mod raw;
pub mod uci;

pub use raw::{load_csv, ColumnKind, ColumnSchema, RawTable};

#[derive(Debug, thiserror::Error)]
pub enum DataError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("schema mismatch in {path}: missing columns {missing:?}, unexpected columns {extra:?}")]
    Schema {
        path: String,
        missing: Vec<String>,
        extra: Vec<String>,
    },
    #[error("malformed data in {path} at row {row}: {message}")]
    Malformed {
        path: String,
        row: usize,
        message: String,
    },
    #[error("record count mismatch for {dataset}: expected {expected}, found {found}")]
    Integrity {
        dataset: String,
        expected: usize,
        found: usize,
    },
    #[error("cannot download {url}: {message}")]
    Network { url: String, message: String },
    #[error("invalid dataset: {0}")]
    Invalid(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl DataError {
    pub fn io(path: impl AsRef<Path>, source: std::io::Error) -> Self {
        DataError::Io {
            path: path.as_ref().to_path_buf(),
            source,
        }
    }
}

/// How a feature is treated by standardization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureKind {
    Continuous,
    Ordinal,
    Boolean,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Feature {
    pub name: String,
    pub kind: FeatureKind,
}

impl Feature {
    pub fn new(name: impl Into<String>, kind: FeatureKind) -> Self {
        Self {
            name: name.into(),
            kind,
        }
    }
}

/// Protected attribute of every row.
///
/// `values` survive even when the column is removed from the training
/// features, so group metrics stay computable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Protected {
    pub name: String,
    pub column: Option<usize>,
    pub values: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Provenance {
    pub source: String,
    pub dropped_rows: usize,
    pub version: String,
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

/// Binary-target supervised dataset with a row-major feature matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Vec<Feature>,
    x: Vec<f64>,
    y: Vec<u8>,
    protected: Option<Protected>,
    weights: Option<Vec<f64>>,
    row_ids: Vec<usize>,
    pub provenance: Provenance,
}

impl Dataset {
    /// Builds a dataset from row-major features, validating the invariants.
    pub fn new(features: Vec<Feature>, x: Vec<f64>, y: Vec<u8>) -> Result<Self, DataError> {
        let d = features.len();
        if d == 0 {
            return Err(DataError::Invalid("no features".into()));
        }
        if x.len() != d * y.len() {
            return Err(DataError::Invalid(format!(
                "feature matrix has {} values, expected {} rows x {d} columns",
                x.len(),
                y.len()
            )));
        }
        let mut seen = HashSet::new();
        for f in &features {
            if !seen.insert(f.name.as_str()) {
                return Err(DataError::Invalid(format!("duplicate feature name `{}`", f.name)));
            }
        }
        if let Some(i) = x.iter().position(|v| !v.is_finite()) {
            return Err(DataError::Invalid(format!(
                "non-finite value at row {}, column `{}`",
                i / d,
                features[i % d].name
            )));
        }
        if let Some(i) = y.iter().position(|&v| v > 1) {
            return Err(DataError::Invalid(format!("target at row {i} is not binary")));
        }
        let n = y.len();
        Ok(Self {
            features,
            x,
            y,
            protected: None,
            weights: None,
            row_ids: (0..n).collect(),
            provenance: Provenance::default(),
        })
    }

    /// Marks the Boolean feature `name` as protected.
    pub fn with_protected(mut self, name: &str) -> Result<Self, DataError> {
        let j = self
            .feature_index(name)
            .ok_or_else(|| DataError::Invalid(format!("unknown protected feature `{name}`")))?;
        let mut values = Vec::with_capacity(self.n());
        for i in 0..self.n() {
            let v = self.get(i, j);
            if v != 0.0 && v != 1.0 {
                return Err(DataError::Invalid(format!(
                    "protected feature `{name}` is not Boolean at row {i}: {v}"
                )));
            }
            values.push(v as u8);
        }
        self.protected = Some(Protected {
            name: name.to_string(),
            column: Some(j),
            values,
        });
        Ok(self)
    }

    pub fn with_weights(mut self, weights: Vec<f64>) -> Result<Self, DataError> {
        if weights.len() != self.n() {
            return Err(DataError::Invalid("weight count differs from row count".into()));
        }
        self.weights = Some(weights);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn d(&self) -> usize {
        self.features.len()
    }

    pub fn features(&self) -> &[Feature] {
        &self.features
    }

    pub fn feature_names(&self) -> Vec<String> {
        self.features.iter().map(|f| f.name.clone()).collect()
    }

    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.features.iter().position(|f| f.name == name)
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let d = self.d();
        &self.x[i * d..(i + 1) * d]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.x[i * self.d() + j]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.n()).map(|i| self.get(i, j)).collect()
    }

    pub fn matrix(&self) -> &[f64] {
        &self.x
    }

    pub fn targets(&self) -> &[u8] {
        &self.y
    }

    pub fn protected(&self) -> Option<&Protected> {
        self.protected.as_ref()
    }

    pub fn weights(&self) -> Option<&[f64]> {
        self.weights.as_deref()
    }

    /// Identifiers of the rows relative to the dataset they were drawn from.
    pub fn row_ids(&self) -> &[usize] {
        &self.row_ids
    }

    /// Rows `ids` in the given order.
    pub fn select(&self, ids: &[usize]) -> Dataset {
        let d = self.d();
        let mut x = Vec::with_capacity(ids.len() * d);
        for &i in ids {
            x.extend_from_slice(self.row(i));
        }
        Dataset {
            features: self.features.clone(),
            x,
            y: ids.iter().map(|&i| self.y[i]).collect(),
            protected: self.protected.as_ref().map(|p| Protected {
                name: p.name.clone(),
                column: p.column,
                values: ids.iter().map(|&i| p.values[i]).collect(),
            }),
            weights: self
                .weights
                .as_ref()
                .map(|w| ids.iter().map(|&i| w[i]).collect()),
            row_ids: ids.iter().map(|&i| self.row_ids[i]).collect(),
            provenance: self.provenance.clone(),
        }
    }

    /// Removes feature `j`; the protected values are kept as metadata.
    pub fn drop_column(&self, j: usize) -> Dataset {
        let d = self.d();
        let mut x = Vec::with_capacity(self.n() * (d - 1));
        for i in 0..self.n() {
            let row = self.row(i);
            x.extend_from_slice(&row[..j]);
            x.extend_from_slice(&row[j + 1..]);
        }
        let mut features = self.features.clone();
        features.remove(j);
        let protected = self.protected.as_ref().map(|p| Protected {
            name: p.name.clone(),
            column: match p.column {
                Some(c) if c == j => None,
                Some(c) if c > j => Some(c - 1),
                other => other,
            },
            values: p.values.clone(),
        });
        Dataset {
            features,
            x,
            y: self.y.clone(),
            protected,
            weights: self.weights.clone(),
            row_ids: self.row_ids.clone(),
            provenance: self.provenance.clone(),
        }
    }

    /// Copy with feature `j` set to `value` on every row.
    pub fn with_column_value(&self, j: usize, value: f64) -> Dataset {
        let mut out = self.clone();
        let d = self.d();
        for i in 0..self.n() {
            out.x[i * d + j] = value;
        }
        out
    }

    pub fn class_counts(&self) -> [usize; 2] {
        let pos = self.y.iter().filter(|&&v| v == 1).count();
        [self.n() - pos, pos]
    }
}

/// Per-column shift and scale fitted on a training split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    /// Columns that were scaled.
    pub scaled: Vec<bool>,
}

impl Scaler {
    /// Fits continuous columns of `data`. Constant columns are left alone.
    pub fn fit(data: &Dataset) -> Scaler {
        let d = data.d();
        let n = data.n() as f64;
        let mut mean = vec![0.0; d];
        let mut std = vec![1.0; d];
        let mut scaled = vec![false; d];
        for (j, f) in data.features().iter().enumerate() {
            if f.kind != FeatureKind::Continuous || data.n() == 0 {
                continue;
            }
            let col = data.column(j);
            let m = col.iter().sum::<f64>() / n;
            let var = col.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n;
            if var > 0.0 {
                mean[j] = m;
                std[j] = var.sqrt();
                scaled[j] = true;
            } else {
                log::warn!("feature `{}` has zero variance; left unscaled", f.name);
            }
        }
        Scaler { mean, std, scaled }
    }

    pub fn apply(&self, data: &Dataset) -> Dataset {
        let mut out = data.clone();
        let d = data.d();
        for i in 0..data.n() {
            for j in 0..d {
                if self.scaled[j] {
                    let v = &mut out.x[i * d + j];
                    *v = (*v - self.mean[j]) / self.std[j];
                }
            }
        }
        out
    }
}

/// Standardizes continuous columns of `train` and returns the fitted scaler
/// for reuse on other splits.
pub fn standardize(train: &Dataset) -> (Dataset, Scaler) {
    let scaler = Scaler::fit(train);
    (scaler.apply(train), scaler)
}

fn shuffled(mut ids: Vec<usize>, rng: &mut ChaCha8Rng) -> Vec<usize> {
    ids.shuffle(rng);
    ids
}

/// Undersamples the majority target class to the minority count.
///
/// Surviving rows keep their original relative order.
pub fn balance_by_target(data: &Dataset, seed: u64) -> Result<Dataset, DataError> {
    let by_class = |c: u8| -> Vec<usize> { (0..data.n()).filter(|&i| data.y[i] == c).collect() };
    let (neg, pos) = (by_class(0), by_class(1));
    if neg.is_empty() || pos.is_empty() {
        return Err(DataError::Invalid("balancing needs both target classes".into()));
    }
    Ok(data.select(&undersample_to_equal(neg, pos, seed)))
}

/// Randomly trims the larger of two index groups to the size of the smaller
/// and returns the union sorted ascending.
pub(crate) fn undersample_to_equal(a: Vec<usize>, b: Vec<usize>, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let target = a.len().min(b.len());
    let mut keep: Vec<usize> = if a.len() > target {
        let mut s = shuffled(a, &mut rng);
        s.truncate(target);
        s.into_iter().chain(b).collect()
    } else if b.len() > target {
        let mut s = shuffled(b, &mut rng);
        s.truncate(target);
        a.into_iter().chain(s).collect()
    } else {
        a.into_iter().chain(b).collect()
    };
    keep.sort_unstable();
    keep
}

/// Seeded stratified split; `fraction` of every target class goes to train.
pub fn split(data: &Dataset, fraction: f64, seed: u64) -> Result<(Dataset, Dataset), DataError> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(DataError::Invalid(format!("split fraction {fraction} outside (0, 1)")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for class in [0u8, 1] {
        let ids: Vec<usize> = (0..data.n()).filter(|&i| data.y[i] == class).collect();
        let take = (fraction * ids.len() as f64).round() as usize;
        let ids = shuffled(ids, &mut rng);
        train.extend_from_slice(&ids[..take]);
        test.extend_from_slice(&ids[take..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((data.select(&train), data.select(&test)))
}

/// Pearson correlation of two columns; 0 if either has zero variance.
pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        return 0.0;
    }
    (sab / (saa.sqrt() * sbb.sqrt())).clamp(-1.0, 1.0)
}

/// Row-major `d x d` Pearson correlation matrix of the features.
pub fn pearson_matrix(data: &Dataset) -> Vec<Vec<f64>> {
    let d = data.d();
    let cols: Vec<Vec<f64>> = (0..d).map(|j| data.column(j)).collect();
    let mut m = vec![vec![0.0; d]; d];
    for i in 0..d {
        m[i][i] = 1.0;
        for j in (i + 1)..d {
            let r = pearson(&cols[i], &cols[j]);
            m[i][j] = r;
            m[j][i] = r;
        }
    }
    m
}

/// Sidecar metadata written next to a canonical CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CanonicalMeta {
    pub features: Vec<Feature>,
    pub protected: Option<String>,
    pub provenance: Provenance,
}

/// Path of the provenance sidecar of a canonical CSV: `foo.csv` → `foo.provenance.json`.
pub fn sidecar_path(csv: &Path) -> PathBuf {
    csv.with_extension("provenance.json")
}

/// Writes `<feature names>,y` rows plus the provenance sidecar.
pub fn write_canonical(data: &Dataset, path: &Path) -> Result<(), DataError> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = data.feature_names();
    header.push("y".into());
    w.write_record(&header)?;
    let mut record = Vec::with_capacity(data.d() + 1);
    for i in 0..data.n() {
        record.clear();
        record.extend(data.row(i).iter().map(|v| v.to_string()));
        record.push(data.y[i].to_string());
        w.write_record(&record)?;
    }
    w.flush().map_err(|e| DataError::io(path, e))?;
    let meta = CanonicalMeta {
        features: data.features.clone(),
        protected: data.protected.as_ref().map(|p| p.name.clone()),
        provenance: data.provenance.clone(),
    };
    let side = sidecar_path(path);
    let json = serde_json::to_string_pretty(&meta)?;
    std::fs::write(&side, json + "\n").map_err(|e| DataError::io(&side, e))
}

/// Reads a canonical CSV. Feature kinds and the protected attribute come from
/// the sidecar when present; otherwise every column is continuous.
pub fn read_canonical(path: &Path) -> Result<Dataset, DataError> {
    let side = sidecar_path(path);
    let meta: Option<CanonicalMeta> = match std::fs::read_to_string(&side) {
        Ok(s) => Some(serde_json::from_str(&s)?),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => None,
        Err(e) => return Err(DataError::io(&side, e)),
    };
    let file = std::fs::File::open(path).map_err(|e| DataError::io(path, e))?;
    let mut r = csv::Reader::from_reader(file);
    let header: Vec<String> = r.headers()?.iter().map(|s| s.trim().to_string()).collect();
    let shown = path.display().to_string();
    if header.last().map(String::as_str) != Some("y") {
        return Err(DataError::Schema {
            path: shown,
            missing: vec!["y".into()],
            extra: vec![],
        });
    }
    let names = &header[..header.len() - 1];
    let features = match &meta {
        Some(m) => {
            let expected: Vec<&str> = m.features.iter().map(|f| f.name.as_str()).collect();
            if expected != names.iter().map(String::as_str).collect::<Vec<_>>() {
                return Err(DataError::Schema {
                    path: shown,
                    missing: expected
                        .iter()
                        .filter(|e| !names.iter().any(|n| n == *e))
                        .map(|s| s.to_string())
                        .collect(),
                    extra: names
                        .iter()
                        .filter(|n| !expected.contains(&n.as_str()))
                        .cloned()
                        .collect(),
                });
            }
            m.features.clone()
        }
        None => names
            .iter()
            .map(|n| Feature::new(n.clone(), FeatureKind::Continuous))
            .collect(),
    };
    let mut x = Vec::new();
    let mut y = Vec::new();
    for (row, rec) in r.records().enumerate() {
        let rec = rec?;
        if rec.len() != header.len() {
            return Err(DataError::Malformed {
                path: shown,
                row,
                message: format!("expected {} fields, found {}", header.len(), rec.len()),
            });
        }
        for (j, field) in rec.iter().enumerate() {
            let v: f64 = field.trim().parse().map_err(|_| DataError::Malformed {
                path: shown.clone(),
                row,
                message: format!("`{field}` is not a number"),
            })?;
            if j + 1 == header.len() {
                if v != 0.0 && v != 1.0 {
                    return Err(DataError::Malformed {
                        path: shown,
                        row,
                        message: format!("target `{field}` is not 0 or 1"),
                    });
                }
                y.push(v as u8);
            } else {
                x.push(v);
            }
        }
    }
    let mut data = Dataset::new(features, x, y)?;
    if let Some(m) = meta {
        data.provenance = m.provenance;
        if let Some(p) = m.protected {
            data = data.with_protected(&p)?;
        }
    }
    Ok(data)
}

#[cfg(test)]
pub(crate) fn toy(rows: &[&[f64]], y: &[u8], names: &[&str]) -> Dataset {
    let features = names
        .iter()
        .map(|n| Feature::new(*n, FeatureKind::Continuous))
        .collect();
    let x = rows.iter().flat_map(|r| r.iter().copied()).collect();
    Dataset::new(features, x, y.to_vec()).unwrap()
}

/// Like [`toy`], with Boolean column `protected` marked as protected.
#[cfg(test)]
pub(crate) fn toy_protected(rows: &[&[f64]], y: &[u8], names: &[&str], protected: &str) -> Dataset {
    let features = names
        .iter()
        .map(|n| {
            let kind = if *n == protected { FeatureKind::Boolean } else { FeatureKind::Continuous };
            Feature::new(*n, kind)
        })
        .collect();
    let x = rows.iter().flat_map(|r| r.iter().copied()).collect();
    Dataset::new(features, x, y.to_vec()).unwrap().with_protected(protected).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn labelled(n_neg: usize, n_pos: usize) -> Dataset {
        let n = n_neg + n_pos;
        let y: Vec<u8> = (0..n).map(|i| (i >= n_neg) as u8).collect();
        let x: Vec<f64> = (0..n).map(|i| i as f64).collect();
        Dataset::new(vec![Feature::new("a", FeatureKind::Continuous)], x, y).unwrap()
    }

    #[test]
    fn rejects_invalid_inputs() {
        let f = || vec![Feature::new("a", FeatureKind::Continuous)];
        assert!(Dataset::new(f(), vec![f64::NAN], vec![0]).is_err());
        assert!(Dataset::new(f(), vec![1.0], vec![2]).is_err());
        assert!(Dataset::new(f(), vec![1.0, 2.0], vec![0]).is_err());
        let dup = vec![
            Feature::new("a", FeatureKind::Continuous),
            Feature::new("a", FeatureKind::Boolean),
        ];
        assert!(Dataset::new(dup, vec![1.0, 0.0], vec![0]).is_err());
    }

    #[test]
    fn standardize_continuous_columns_only() {
        let features = vec![
            Feature::new("c", FeatureKind::Continuous),
            Feature::new("b", FeatureKind::Boolean),
            Feature::new("k", FeatureKind::Continuous),
        ];
        let x = vec![1.0, 0.0, 5.0, 2.0, 1.0, 5.0, 6.0, 1.0, 5.0, 3.0, 0.0, 5.0];
        let data = Dataset::new(features, x, vec![0, 1, 0, 1]).unwrap();
        let (std, scaler) = standardize(&data);
        let c = std.column(0);
        let mean = c.iter().sum::<f64>() / 4.0;
        let var = c.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 4.0;
        assert!(mean.abs() <= 1e-9);
        assert!((var - 1.0).abs() <= 1e-9);
        assert_eq!(std.column(1), data.column(1));
        assert_eq!(std.column(2), data.column(2));
        assert!(!scaler.scaled[2]);
    }

    #[test]
    fn balance_counts_and_determinism() {
        let data = labelled(300, 100);
        let b = balance_by_target(&data, 3).unwrap();
        assert_eq!(b.class_counts(), [100, 100]);
        assert_eq!(b, balance_by_target(&data, 3).unwrap());
        assert_ne!(b.row_ids(), balance_by_target(&data, 4).unwrap().row_ids());
        let even = labelled(50, 50);
        assert_eq!(balance_by_target(&even, 1).unwrap(), even);
    }

    #[test]
    fn split_partitions_and_stratifies() {
        let data = labelled(700, 300);
        let (train, test) = split(&data, 0.5, 11).unwrap();
        assert_eq!((train.n(), test.n()), (500, 500));
        assert_eq!(train.class_counts(), [350, 150]);
        let mut all: Vec<usize> = train.row_ids().iter().chain(test.row_ids()).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..1000).collect::<Vec<_>>());
        assert!(split(&data, 1.0, 0).is_err());
        assert!(split(&data, 0.0, 0).is_err());
    }

    #[test]
    fn pearson_extremes() {
        let x = [1.0, 2.0, 4.0, 7.0];
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        assert!((pearson(&x, &x) - 1.0).abs() < 1e-15);
        assert!((pearson(&x, &neg) + 1.0).abs() < 1e-15);
        assert_eq!(pearson(&x, &[3.0; 4]), 0.0);
    }

    #[test]
    fn canonical_csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        let features = vec![
            Feature::new("v", FeatureKind::Continuous),
            Feature::new("s", FeatureKind::Boolean),
        ];
        let x = vec![0.1 + 0.2, 1.0, -1.0 / 3.0, 0.0, 1e-300, 1.0];
        let mut data = Dataset::new(features, x, vec![1, 0, 1])
            .unwrap()
            .with_protected("s")
            .unwrap();
        data.provenance.source = "unit".into();
        write_canonical(&data, &path).unwrap();
        let back = read_canonical(&path).unwrap();
        assert_eq!(back, data);
    }

    #[test]
    fn drop_column_keeps_protected_values() {
        let features = vec![
            Feature::new("a", FeatureKind::Continuous),
            Feature::new("s", FeatureKind::Boolean),
            Feature::new("b", FeatureKind::Continuous),
        ];
        let data = Dataset::new(features, vec![1.0, 1.0, 2.0, 3.0, 0.0, 4.0], vec![0, 1])
            .unwrap()
            .with_protected("s")
            .unwrap();
        let dropped = data.drop_column(1);
        assert_eq!(dropped.d(), 2);
        assert_eq!(dropped.row(1), &[3.0, 4.0]);
        let p = dropped.protected().unwrap();
        assert_eq!((p.column, p.values.clone()), (None, vec![1, 0]));
    }

    proptest! {
        #[test]
        fn pearson_matrix_is_a_correlation_matrix(
            rows in prop::collection::vec(prop::collection::vec(-10.0f64..10.0, 4), 2..30)
        ) {
            let n = rows.len();
            let refs: Vec<&[f64]> = rows.iter().map(|r| r.as_slice()).collect();
            let data = toy(&refs, &vec![0; n], &["a", "b", "c", "d"]);
            let m = pearson_matrix(&data);
            for i in 0..4 {
                prop_assert_eq!(m[i][i], 1.0);
                for j in 0..4 {
                    prop_assert_eq!(m[i][j], m[j][i]);
                    prop_assert!((-1.0..=1.0).contains(&m[i][j]));
                }
            }
        }
    }
}
