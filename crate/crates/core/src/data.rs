//! Labeled tabular data with one binary sensitive attribute.
//!
//! A point is `(x, s, y)` with nonsensitive features `x ∈ R^{n-1}`,
//! sensitive value `s ∈ {0,1}` and label `y ∈ {-1,+1}`. Models act on the
//! full feature vector `a = (x, s) ∈ R^n`, with `s` as the last coordinate.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataPoint {
    pub x: Vec<f64>,
    pub s: u8,
    pub y: i8,
}

impl DataPoint {
    pub fn new(x: Vec<f64>, s: u8, y: i8) -> Result<Self> {
        if s > 1 {
            return Err(Error::InvalidArgument(format!("sensitive value {s} not in {{0,1}}")));
        }
        if y != -1 && y != 1 {
            return Err(Error::InvalidArgument(format!("label {y} not in {{-1,+1}}")));
        }
        Ok(Self { x, s, y })
    }

    /// Length of the full feature vector `a = (x, s)`.
    pub fn dim(&self) -> usize {
        self.x.len() + 1
    }

    /// The full feature vector `a = (x, s)`.
    pub fn features(&self) -> Vec<f64> {
        let mut a = Vec::with_capacity(self.dim());
        a.extend_from_slice(&self.x);
        a.push(f64::from(self.s));
        a
    }

    /// `aᵀθ` without materializing `a`.
    #[inline]
    pub fn score(&self, theta: &[f64]) -> f64 {
        let (wx, ws) = theta.split_at(self.x.len());
        self.x.iter().zip(wx).map(|(a, b)| a * b).sum::<f64>() + f64::from(self.s) * ws[0]
    }

    #[inline]
    pub fn label(&self) -> f64 {
        f64::from(self.y)
    }

    pub fn stratum(&self) -> Stratum {
        Stratum::of(self.s, self.y)
    }
}

/// One of the four `(s, y)` cells, ordered `(0,-1) < (0,+1) < (1,-1) < (1,+1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Stratum {
    S0Neg,
    S0Pos,
    S1Neg,
    S1Pos,
}

impl Stratum {
    pub const ALL: [Stratum; 4] = [Stratum::S0Neg, Stratum::S0Pos, Stratum::S1Neg, Stratum::S1Pos];

    pub fn of(s: u8, y: i8) -> Self {
        match (s, y > 0) {
            (0, false) => Stratum::S0Neg,
            (0, true) => Stratum::S0Pos,
            (_, false) => Stratum::S1Neg,
            (_, true) => Stratum::S1Pos,
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn s(self) -> u8 {
        match self {
            Stratum::S0Neg | Stratum::S0Pos => 0,
            Stratum::S1Neg | Stratum::S1Pos => 1,
        }
    }

    pub fn y(self) -> i8 {
        match self {
            Stratum::S0Neg | Stratum::S1Neg => -1,
            Stratum::S0Pos | Stratum::S1Pos => 1,
        }
    }
}

impl fmt::Display for Stratum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "s{}_y{:+}", self.s(), self.y())
    }
}

/// Counts of the four `(s, y)` strata, indexed by [`Stratum::index`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct StratumProportions {
    pub counts: [usize; 4],
}

impl StratumProportions {
    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    pub fn get(&self, stratum: Stratum) -> usize {
        self.counts[stratum.index()]
    }

    pub fn nonempty(&self) -> usize {
        self.counts.iter().filter(|&&c| c > 0).count()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    points: Vec<DataPoint>,
    feature_names: Vec<String>,
    sensitive_name: String,
    label_name: String,
}

impl Dataset {
    pub fn new(
        points: Vec<DataPoint>,
        feature_names: Vec<String>,
        sensitive_name: impl Into<String>,
        label_name: impl Into<String>,
    ) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let width = feature_names.len();
        for p in &points {
            if p.x.len() != width {
                return Err(Error::DimensionMismatch {
                    expected: width,
                    found: p.x.len(),
                });
            }
            DataPoint::new(Vec::new(), p.s, p.y)?;
        }
        Ok(Self {
            points,
            feature_names,
            sensitive_name: sensitive_name.into(),
            label_name: label_name.into(),
        })
    }

    /// Builds a dataset with generated names `x0, x1, ...`, sensitive `s`, label `y`.
    pub fn from_points(points: Vec<DataPoint>) -> Result<Self> {
        let width = points.first().map_or(0, |p| p.x.len());
        let names = (0..width).map(|j| format!("x{j}")).collect();
        Self::new(points, names, "s", "y")
    }

    /// A dataset with the same column names as `self` holding other points.
    pub fn with_points(&self, points: Vec<DataPoint>) -> Result<Self> {
        Self::new(
            points,
            self.feature_names.clone(),
            self.sensitive_name.clone(),
            self.label_name.clone(),
        )
    }

    pub fn points(&self) -> &[DataPoint] {
        &self.points
    }

    pub fn into_points(self) -> Vec<DataPoint> {
        self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Full feature dimension `n` (nonsensitive features plus the sensitive one).
    pub fn dim(&self) -> usize {
        self.feature_names.len() + 1
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn sensitive_name(&self) -> &str {
        &self.sensitive_name
    }

    pub fn label_name(&self) -> &str {
        &self.label_name
    }

    pub fn stratum_counts(&self) -> StratumProportions {
        let mut counts = [0usize; 4];
        for p in &self.points {
            counts[p.stratum().index()] += 1;
        }
        StratumProportions { counts }
    }

    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        self.with_points(indices.iter().map(|&i| self.points[i].clone()).collect())
    }

    /// Concatenates datasets in the given order. Column names come from the first.
    pub fn concat<'a>(parts: impl IntoIterator<Item = &'a Dataset>) -> Result<Self> {
        let mut parts = parts.into_iter();
        let first = parts.next().ok_or(Error::EmptyDataset)?;
        let mut points = first.points.clone();
        for part in parts {
            if part.dim() != first.dim() {
                return Err(Error::DimensionMismatch {
                    expected: first.dim(),
                    found: part.dim(),
                });
            }
            points.extend_from_slice(&part.points);
        }
        first.with_points(points)
    }

    /// Appends a constant-1 feature named `intercept`. Apply after
    /// [`standardize`], which would otherwise zero it.
    pub fn with_intercept(&self) -> Self {
        let mut names = self.feature_names.clone();
        names.push("intercept".to_string());
        let points = self
            .points
            .iter()
            .map(|p| {
                let mut x = p.x.clone();
                x.push(1.0);
                DataPoint { x, s: p.s, y: p.y }
            })
            .collect();
        Self {
            points,
            feature_names: names,
            sensitive_name: self.sensitive_name.clone(),
            label_name: self.label_name.clone(),
        }
    }
}

/// Column roles and value maps for [`load_dataset`].
///
/// Feature columns default to every column that is neither the sensitive nor
/// the label column, in file order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schema {
    pub sensitive: String,
    pub label: String,
    #[serde(default)]
    pub features: Option<Vec<String>>,
    #[serde(default = "default_sensitive_values")]
    pub sensitive_values: BTreeMap<String, u8>,
    #[serde(default = "default_label_values")]
    pub label_values: BTreeMap<String, i8>,
}

fn default_sensitive_values() -> BTreeMap<String, u8> {
    [("0", 0), ("1", 1)].into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

fn default_label_values() -> BTreeMap<String, i8> {
    [("-1", -1), ("1", 1), ("+1", 1)]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect()
}

impl Schema {
    /// Schema of files written by [`write_dataset`]: `s ∈ {0,1}`, `y ∈ {-1,1}`.
    pub fn canonical(sensitive: impl Into<String>, label: impl Into<String>) -> Self {
        Self {
            sensitive: sensitive.into(),
            label: label.into(),
            features: None,
            sensitive_values: default_sensitive_values(),
            label_values: default_label_values(),
        }
    }

    pub fn with_label_values(mut self, pairs: &[(&str, i8)]) -> Self {
        self.label_values = pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect();
        self
    }

    pub fn with_sensitive_values(mut self, pairs: &[(&str, u8)]) -> Self {
        self.sensitive_values = pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect();
        self
    }

    fn validate(&self) -> Result<()> {
        if self.sensitive == self.label {
            return Err(Error::Schema("sensitive and label columns must differ".into()));
        }
        if let Some((k, v)) = self.sensitive_values.iter().find(|(_, &v)| v > 1) {
            return Err(Error::Schema(format!("sensitive value {k:?} maps to {v}, not 0/1")));
        }
        if let Some((k, v)) = self.label_values.iter().find(|(_, &v)| v != 1 && v != -1) {
            return Err(Error::Schema(format!("label value {k:?} maps to {v}, not -1/+1")));
        }
        Ok(())
    }
}

/// Reads a comma-separated file with a header row.
pub fn load_dataset(path: impl AsRef<Path>, schema: &Schema) -> Result<Dataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_dataset(file, schema)
}

/// Like [`load_dataset`] over any reader.
pub fn read_dataset<R: std::io::Read>(reader: R, schema: &Schema) -> Result<Dataset> {
    schema.validate()?;
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    let find = |name: &str| {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Schema(format!("column {name:?} not in header")))
    };
    let s_col = find(&schema.sensitive)?;
    let y_col = find(&schema.label)?;
    let feature_cols: Vec<usize> = match &schema.features {
        Some(names) => names.iter().map(|n| find(n)).collect::<Result<_>>()?,
        None => (0..header.len()).filter(|&c| c != s_col && c != y_col).collect(),
    };
    if feature_cols.contains(&s_col) || feature_cols.contains(&y_col) {
        return Err(Error::Schema("a feature column doubles as sensitive or label".into()));
    }

    let mut points = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record?;
        // Data rows are numbered from 1, after the header.
        let row = i + 1;
        if record.len() != header.len() {
            return Err(Error::RaggedRow {
                row,
                expected: header.len(),
                found: record.len(),
            });
        }
        let x = feature_cols
            .iter()
            .map(|&c| {
                let raw = &record[c];
                raw.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| Error::NonNumericFeature {
                        row,
                        column: header[c].clone(),
                        value: raw.to_string(),
                    })
            })
            .collect::<Result<Vec<_>>>()?;
        let s = *schema
            .sensitive_values
            .get(&record[s_col])
            .ok_or_else(|| Error::UnmappedValue {
                row,
                role: "sensitive",
                value: record[s_col].to_string(),
            })?;
        let y = *schema
            .label_values
            .get(&record[y_col])
            .ok_or_else(|| Error::UnmappedValue {
                row,
                role: "label",
                value: record[y_col].to_string(),
            })?;
        points.push(DataPoint { x, s, y });
    }
    let names = feature_cols.iter().map(|&c| header[c].clone()).collect();
    Dataset::new(points, names, schema.sensitive.clone(), schema.label.clone())
}

/// Writes `ds` as CSV: feature columns, then sensitive (0/1), then label (-1/1).
/// Readable back with [`Schema::canonical`].
pub fn write_dataset(ds: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(file);
    let mut header: Vec<&str> = ds.feature_names.iter().map(String::as_str).collect();
    header.push(&ds.sensitive_name);
    header.push(&ds.label_name);
    w.write_record(&header)?;
    for p in &ds.points {
        let mut row: Vec<String> = p.x.iter().map(|v| v.to_string()).collect();
        row.push(p.s.to_string());
        row.push(p.y.to_string());
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Per-feature affine map fitted by [`standardize`]. Uses the population
/// standard deviation (divide by N). Columns with zero spread have
/// `scale == 0` and map to 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub means: Vec<f64>,
    pub scales: Vec<f64>,
}

impl Standardizer {
    pub fn fit(ds: &Dataset) -> Self {
        let width = ds.feature_names.len();
        let count = ds.len() as f64;
        let mut means = vec![0.0; width];
        for p in &ds.points {
            for (m, v) in means.iter_mut().zip(&p.x) {
                *m += v;
            }
        }
        means.iter_mut().for_each(|m| *m /= count);
        let mut vars = vec![0.0; width];
        for p in &ds.points {
            for ((acc, v), m) in vars.iter_mut().zip(&p.x).zip(&means) {
                *acc += (v - m) * (v - m);
            }
        }
        let scales = vars
            .iter()
            .zip(&means)
            .map(|(var, m)| {
                let sd = (var / count).sqrt();
                if sd <= 1e-12 * m.abs().max(1.0) {
                    0.0
                } else {
                    sd
                }
            })
            .collect();
        Self { means, scales }
    }

    pub fn apply(&self, ds: &Dataset) -> Result<Dataset> {
        if ds.feature_names.len() != self.means.len() {
            return Err(Error::DimensionMismatch {
                expected: self.means.len(),
                found: ds.feature_names.len(),
            });
        }
        let points = ds
            .points
            .iter()
            .map(|p| DataPoint {
                x: p.x
                    .iter()
                    .zip(self.means.iter().zip(&self.scales))
                    .map(|(v, (m, sd))| if *sd == 0.0 { 0.0 } else { (v - m) / sd })
                    .collect(),
                s: p.s,
                y: p.y,
            })
            .collect();
        ds.with_points(points)
    }

    pub fn is_constant(&self, feature: usize) -> bool {
        self.scales[feature] == 0.0
    }
}

/// Standardizes the nonsensitive features to mean 0 and population sd 1.
/// The sensitive column and the label are untouched.
pub fn standardize(ds: &Dataset) -> (Dataset, Standardizer) {
    let scaler = Standardizer::fit(ds);
    let out = scaler.apply(ds).expect("scaler fitted on the same columns");
    (out, scaler)
}

fn shuffled_indices(len: usize, seed: u64) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..len).collect();
    idx.shuffle(&mut rng_from_seed(seed));
    idx
}

/// Index sets for [`partition_clients`]: a seeded shuffle cut into `k`
/// contiguous runs whose sizes differ by at most one (larger runs first).
pub fn partition_indices(len: usize, k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k == 0 {
        return Err(Error::InvalidArgument("client count must be at least 1".into()));
    }
    if k > len {
        return Err(Error::InvalidArgument(format!(
            "client count {k} exceeds dataset size {len}"
        )));
    }
    let idx = shuffled_indices(len, seed);
    let (base, extra) = (len / k, len % k);
    let mut parts = Vec::with_capacity(k);
    let mut start = 0;
    for c in 0..k {
        let size = base + usize::from(c < extra);
        parts.push(idx[start..start + size].to_vec());
        start += size;
    }
    Ok(parts)
}

pub fn partition_clients(ds: &Dataset, k: usize, seed: u64) -> Result<Vec<Dataset>> {
    partition_indices(ds.len(), k, seed)?
        .iter()
        .map(|part| ds.select(part))
        .collect()
}

/// Index sets `(train, test)` for [`train_test_split`].
pub fn split_indices(len: usize, train_fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "train fraction {train_fraction} outside (0,1)"
        )));
    }
    let train_len = (train_fraction * len as f64).round() as usize;
    if train_len == 0 || train_len >= len {
        return Err(Error::InvalidArgument(format!(
            "split of {len} points at {train_fraction} leaves one side empty"
        )));
    }
    let mut idx = shuffled_indices(len, seed);
    let test = idx.split_off(train_len);
    Ok((idx, test))
}

/// Seeded split with `round(train_fraction * N)` training points.
pub fn train_test_split(ds: &Dataset, train_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    let (train, test) = split_indices(ds.len(), train_fraction, seed)?;
    Ok((ds.select(&train)?, ds.select(&test)?))
}

/// Result of [`assign_synthetic_pairs`].
#[derive(Debug, Clone, PartialEq)]
pub struct PairAssignment {
    pub pairs: Vec<(u8, i8)>,
    pub counts: StratumProportions,
    /// Nonempty input strata that received no synthetic point.
    pub dropped: Vec<Stratum>,
}

impl PairAssignment {
    pub fn warning(&self) -> Option<String> {
        (!self.dropped.is_empty()).then(|| {
            let names: Vec<String> = self.dropped.iter().map(ToString::to_string).collect();
            format!("target size too small to represent strata {}", names.join(", "))
        })
    }
}

/// Largest-remainder apportionment of `target` seats over `weights`.
/// Ties in the remainder go to the lower index. Exact integer arithmetic.
pub fn largest_remainder(weights: &[usize; 4], target: usize) -> [usize; 4] {
    let total: usize = weights.iter().sum();
    if total == 0 {
        return [0; 4];
    }
    let mut out = [0usize; 4];
    let mut rems = [0u128; 4];
    for i in 0..4 {
        let num = weights[i] as u128 * target as u128;
        out[i] = (num / total as u128) as usize;
        rems[i] = num % total as u128;
    }
    let assigned: usize = out.iter().sum();
    let mut order: Vec<usize> = (0..4).collect();
    // Stable sort keeps index order among equal remainders.
    order.sort_by(|&a, &b| rems[b].cmp(&rems[a]));
    for &i in order.iter().take(target - assigned) {
        out[i] += 1;
    }
    out
}

/// Chooses the fixed `(ŝ, ŷ)` pairs of a synthetic dataset of size `target`.
///
/// With `target == N` the real pairs are returned in dataset order. Otherwise
/// stratum counts are proportional to the input (largest remainder, ties by
/// stratum order) and pairs are grouped by stratum.
pub fn assign_synthetic_pairs(ds: &Dataset, target: usize) -> Result<PairAssignment> {
    if target == 0 || target > ds.len() {
        return Err(Error::InvalidArgument(format!(
            "synthetic size {target} outside [1, {}]",
            ds.len()
        )));
    }
    let input = ds.stratum_counts();
    if target == ds.len() {
        return Ok(PairAssignment {
            pairs: ds.points.iter().map(|p| (p.s, p.y)).collect(),
            counts: input,
            dropped: Vec::new(),
        });
    }
    let counts = largest_remainder(&input.counts, target);
    let pairs = Stratum::ALL
        .iter()
        .flat_map(|&st| std::iter::repeat_n((st.s(), st.y()), counts[st.index()]))
        .collect();
    let dropped = Stratum::ALL
        .iter()
        .copied()
        .filter(|st| input.counts[st.index()] > 0 && counts[st.index()] == 0)
        .collect();
    Ok(PairAssignment {
        pairs,
        counts: StratumProportions { counts },
        dropped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy(stratum_counts: [usize; 4]) -> Dataset {
        let mut points = Vec::new();
        for st in Stratum::ALL {
            for k in 0..stratum_counts[st.index()] {
                points.push(DataPoint::new(vec![k as f64], st.s(), st.y()).unwrap());
            }
        }
        Dataset::from_points(points).unwrap()
    }

    #[test]
    fn loads_small_file() {
        let text = "f1,race,pass\n1.5,0,1\n2.0,1,0\n-3,1,1\n0,0,0\n";
        let schema = Schema::canonical("race", "pass").with_label_values(&[("0", -1), ("1", 1)]);
        let ds = read_dataset(text.as_bytes(), &schema).unwrap();
        assert_eq!(ds.len(), 4);
        assert_eq!(ds.dim(), 2);
        assert_eq!(ds.points()[1], DataPoint::new(vec![2.0], 1, -1).unwrap());
        assert_eq!(ds.feature_names(), ["f1"]);
    }

    #[test]
    fn rejects_non_numeric_feature() {
        let text = "f1,race,pass\n1.5,0,1\nNA,1,1\n";
        let err = read_dataset(text.as_bytes(), &Schema::canonical("race", "pass")).unwrap_err();
        assert!(err.to_string().contains("non-numeric feature"), "{err}");
    }

    #[test]
    fn rejects_unmapped_ragged_and_empty() {
        let schema = Schema::canonical("race", "pass");
        let unmapped = "f1,race,pass\n1,2,1\n";
        assert!(matches!(
            read_dataset(unmapped.as_bytes(), &schema),
            Err(Error::UnmappedValue { role: "sensitive", .. })
        ));
        let bad_label = "f1,race,pass\n1,0,yes\n";
        assert!(matches!(
            read_dataset(bad_label.as_bytes(), &schema),
            Err(Error::UnmappedValue { role: "label", .. })
        ));
        let ragged = "f1,race,pass\n1,0,1\n1,0\n";
        assert!(matches!(
            read_dataset(ragged.as_bytes(), &schema),
            Err(Error::RaggedRow { row: 2, .. })
        ));
        let empty = "f1,race,pass\n";
        assert!(matches!(read_dataset(empty.as_bytes(), &schema), Err(Error::EmptyDataset)));
        assert!(matches!(load_dataset("/nonexistent/file.csv", &schema), Err(Error::Io { .. })));
    }

    #[test]
    fn write_then_load_preserves_points() {
        let ds = toy([2, 1, 1, 3]);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        write_dataset(&ds, &path).unwrap();
        let back = load_dataset(&path, &Schema::canonical("s", "y")).unwrap();
        assert_eq!(back, ds);
    }

    #[test]
    fn standardize_two_values() {
        let ds = Dataset::from_points(vec![
            DataPoint::new(vec![1.0, 5.0], 0, 1).unwrap(),
            DataPoint::new(vec![3.0, 5.0], 1, -1).unwrap(),
        ])
        .unwrap();
        let (out, scaler) = standardize(&ds);
        assert_eq!(out.points()[0].x, vec![-1.0, 0.0]);
        assert_eq!(out.points()[1].x, vec![1.0, 0.0]);
        assert!(scaler.is_constant(1));
        assert_eq!(out.points()[1].s, 1);
        assert_eq!(out.points()[1].y, -1);
    }

    #[test]
    fn standardize_is_idempotent_on_standardized_data() {
        let ds = toy([3, 4, 2, 5]);
        let (once, _) = standardize(&ds);
        let (twice, _) = standardize(&once);
        for (a, b) in once.points().iter().zip(twice.points()) {
            assert!((a.x[0] - b.x[0]).abs() < 1e-12);
        }
    }

    #[test]
    fn partition_sizes() {
        let ds = toy([3, 3, 2, 2]);
        let parts = partition_clients(&ds, 2, 1).unwrap();
        assert_eq!(parts.iter().map(Dataset::len).collect::<Vec<_>>(), vec![5, 5]);
        let whole = partition_clients(&ds, 1, 1).unwrap();
        assert_eq!(whole[0].len(), 10);
        let ds11 = toy([3, 3, 3, 2]);
        let parts = partition_clients(&ds11, 2, 1).unwrap();
        assert_eq!(parts.iter().map(Dataset::len).collect::<Vec<_>>(), vec![6, 5]);
        assert!(partition_clients(&ds, 11, 1).is_err());
        assert!(partition_clients(&ds, 0, 1).is_err());
    }

    #[test]
    fn split_sizes_and_determinism() {
        let ds = toy([3, 3, 2, 2]);
        let (tr, te) = train_test_split(&ds, 0.8, 3).unwrap();
        assert_eq!((tr.len(), te.len()), (8, 2));
        let (tr2, te2) = train_test_split(&ds, 0.8, 3).unwrap();
        assert_eq!((tr, te), (tr2, te2));
        let ds5 = toy([2, 1, 1, 1]);
        let (tr, te) = train_test_split(&ds5, 0.8, 3).unwrap();
        assert_eq!((tr.len(), te.len()), (4, 1));
        assert!(train_test_split(&ds5, 0.05, 3).is_err());
        assert!(train_test_split(&ds5, 1.0, 3).is_err());
    }

    #[test]
    fn pair_assignment_examples() {
        let ds = toy([4, 1, 4, 1]);
        let full = assign_synthetic_pairs(&ds, 10).unwrap();
        assert_eq!(full.counts.counts, [4, 1, 4, 1]);
        assert_eq!(full.pairs, ds.points().iter().map(|p| (p.s, p.y)).collect::<Vec<_>>());

        let half = assign_synthetic_pairs(&ds, 5).unwrap();
        assert_eq!(half.counts.counts, [2, 1, 2, 0]);
        assert_eq!(half.pairs, vec![(0, -1), (0, -1), (0, 1), (1, -1), (1, -1)]);
        assert_eq!(half.dropped, vec![Stratum::S1Pos]);
        assert!(half.warning().is_some());

        let single = toy([4, 0, 0, 0]);
        let three = assign_synthetic_pairs(&single, 3).unwrap();
        assert_eq!(three.counts.counts, [3, 0, 0, 0]);
        assert!(three.warning().is_none());

        assert!(assign_synthetic_pairs(&ds, 0).is_err());
        assert!(assign_synthetic_pairs(&ds, 11).is_err());
    }
}
