//! Tabular measurement data: CSV ingestion, min-max normalization and
//! seeded train/test and k-fold partitioning.
//!
//! A [`Dataset`] holds named real-valued feature columns and one target
//! column. Values are immutable once constructed and are guaranteed finite.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::Path;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seeded_rng;

/// Column layouts with a fixed meaning.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Schema {
    /// Evacuated-tube solar water heater: six extrinsic design properties
    /// and the heat collection rate.
    Collector,
    /// Indoor air quality: particulate, climate and CO2 readings and the
    /// culturable fungi concentration.
    Iaq,
}

impl Schema {
    pub const ALL: [Schema; 2] = [Schema::Collector, Schema::Iaq];

    pub fn feature_names(self) -> &'static [&'static str] {
        match self {
            Schema::Collector => &[
                "tube_length",
                "tube_number",
                "tube_center_distance",
                "tank_volume",
                "collector_area",
                "tube_ground_angle",
            ],
            Schema::Iaq => &[
                "pm25_in", "pm25_out", "pm10_in", "pm10_out", "temp", "rh", "co2",
            ],
        }
    }

    pub fn target_name(self) -> &'static str {
        match self {
            Schema::Collector => "hcr",
            Schema::Iaq => "fungi",
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            Schema::Collector => "collector",
            Schema::Iaq => "iaq",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Schema> {
        Schema::ALL.into_iter().find(|s| s.tag() == tag)
    }

    fn matches(self, features: &[String], target: &str) -> bool {
        target == self.target_name()
            && features.len() == self.feature_names().len()
            && features
                .iter()
                .zip(self.feature_names())
                .all(|(a, b)| a == b)
    }
}

/// Options for [`load_csv`] and [`parse_csv`].
#[derive(Debug, Clone, Default)]
pub struct CsvOptions {
    /// Name of the target column. Defaults to the last column.
    pub target: Option<String>,
    /// If set, the header must match this schema exactly.
    pub schema: Option<Schema>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    feature_names: Vec<String>,
    target_name: String,
    /// Row-major, `n_rows * n_features`.
    features: Vec<f64>,
    targets: Vec<f64>,
    schema: Option<Schema>,
}

impl Dataset {
    /// Build a dataset from per-row feature vectors and targets.
    pub fn new(
        feature_names: Vec<String>,
        target_name: impl Into<String>,
        rows: Vec<Vec<f64>>,
        targets: Vec<f64>,
    ) -> Result<Self> {
        let target_name = target_name.into();
        let n_features = feature_names.len();
        if n_features == 0 {
            return Err(Error::InvalidDataset(
                "at least one feature column is required".into(),
            ));
        }
        check_names(&feature_names, &target_name)?;
        if rows.is_empty() {
            return Err(Error::InvalidDataset("at least one row is required".into()));
        }
        if rows.len() != targets.len() {
            return Err(Error::InvalidDataset(format!(
                "{} feature rows but {} targets",
                rows.len(),
                targets.len()
            )));
        }
        let mut features = Vec::with_capacity(rows.len() * n_features);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n_features {
                return Err(Error::InvalidDataset(format!(
                    "row {i} has {} features, expected {n_features}",
                    row.len()
                )));
            }
            if let Some(v) = row.iter().find(|v| !v.is_finite()) {
                return Err(Error::InvalidDataset(format!(
                    "row {i} contains non-finite value {v}"
                )));
            }
            features.extend_from_slice(row);
        }
        if let Some((i, t)) = targets.iter().enumerate().find(|(_, t)| !t.is_finite()) {
            return Err(Error::InvalidDataset(format!(
                "row {i} has non-finite target {t}"
            )));
        }
        let schema = Schema::ALL
            .into_iter()
            .find(|s| s.matches(&feature_names, &target_name));
        Ok(Dataset {
            feature_names,
            target_name,
            features,
            targets,
            schema,
        })
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn target_name(&self) -> &str {
        &self.target_name
    }

    /// The known schema whose header this dataset matches, if any.
    pub fn schema(&self) -> Option<Schema> {
        self.schema
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.n_features();
        &self.features[i * n..(i + 1) * n]
    }

    pub fn target(&self, i: usize) -> f64 {
        self.targets[i]
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = (&[f64], f64)> + '_ {
        self.features
            .chunks_exact(self.n_features())
            .zip(self.targets.iter().copied())
    }

    /// Column `c` of the features, in row order.
    pub fn feature_column(&self, c: usize) -> impl Iterator<Item = f64> + '_ {
        self.features
            .iter()
            .skip(c)
            .step_by(self.n_features())
            .copied()
    }

    /// The rows at `indices`, in the given order.
    pub fn subset(&self, indices: &[usize]) -> Result<Dataset> {
        if indices.is_empty() {
            return Err(Error::InvalidDataset(
                "subset must contain at least one row".into(),
            ));
        }
        let n = self.n_features();
        let mut features = Vec::with_capacity(indices.len() * n);
        let mut targets = Vec::with_capacity(indices.len());
        for &i in indices {
            if i >= self.len() {
                return Err(Error::InvalidArgument(format!(
                    "row index {i} out of range for {} rows",
                    self.len()
                )));
            }
            features.extend_from_slice(self.row(i));
            targets.push(self.targets[i]);
        }
        Ok(Dataset {
            feature_names: self.feature_names.clone(),
            target_name: self.target_name.clone(),
            features,
            targets,
            schema: self.schema,
        })
    }

    /// Render as CSV with the target as the last column. Values use the
    /// shortest representation that parses back to the same `f64`.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::new();
        for name in &self.feature_names {
            out.push_str(name);
            out.push(',');
        }
        out.push_str(&self.target_name);
        out.push('\n');
        for (row, t) in self.rows() {
            for v in row {
                let _ = write!(out, "{v},");
            }
            let _ = writeln!(out, "{t}");
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_csv_string()).map_err(|e| Error::io(path, e))
    }
}

fn check_names(features: &[String], target: &str) -> Result<()> {
    let mut seen = HashSet::new();
    for name in features
        .iter()
        .map(String::as_str)
        .chain(std::iter::once(target))
    {
        if name.trim().is_empty() {
            return Err(Error::InvalidDataset(
                "column names must be non-empty".into(),
            ));
        }
        if !seen.insert(name) {
            return Err(Error::InvalidDataset(format!(
                "duplicate column name `{name}`"
            )));
        }
    }
    Ok(())
}

/// Read a CSV file. See [`parse_csv`] for the accepted format.
pub fn load_csv(path: impl AsRef<Path>, opts: &CsvOptions) -> Result<Dataset> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_csv(&text, opts).map_err(|e| e.with_origin(path))
}

/// Parse comma-separated numeric data with a header line.
///
/// Fields are trimmed; blank lines are skipped. Errors carry 1-based
/// physical line and column numbers.
pub fn parse_csv(text: &str, opts: &CsvOptions) -> Result<Dataset> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let header_err = |message: String| Error::Header {
        origin: None,
        message,
    };
    let (_, header) = lines
        .by_ref()
        .find(|(_, l)| !l.trim().is_empty())
        .ok_or_else(|| header_err("missing header line".into()))?;
    let names: Vec<String> = header.split(',').map(|s| s.trim().to_string()).collect();
    if names.len() < 2 {
        return Err(header_err(
            "header needs at least one feature column and a target column".into(),
        ));
    }
    let mut seen = HashSet::new();
    for (i, name) in names.iter().enumerate() {
        if name.is_empty() {
            return Err(header_err(format!("header column {} is empty", i + 1)));
        }
        if !seen.insert(name.as_str()) {
            return Err(header_err(format!("duplicate header name `{name}`")));
        }
    }
    let target_col = match &opts.target {
        None => names.len() - 1,
        Some(t) => names
            .iter()
            .position(|n| n == t)
            .ok_or_else(|| header_err(format!("target column `{t}` not in header")))?,
    };

    let arity = names.len();
    let mut rows = Vec::new();
    let mut targets = Vec::new();
    for (line_no, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != arity {
            return Err(Error::Arity {
                origin: None,
                line: line_no,
                expected: arity,
                found: fields.len(),
            });
        }
        let mut row = Vec::with_capacity(arity - 1);
        let mut target = 0.0;
        for (col, field) in fields.iter().enumerate() {
            let field = field.trim();
            let v: f64 = field.parse().map_err(|_| Error::Csv {
                origin: None,
                line: line_no,
                column: col + 1,
                message: format!("non-numeric value `{field}`"),
            })?;
            if !v.is_finite() {
                return Err(Error::Csv {
                    origin: None,
                    line: line_no,
                    column: col + 1,
                    message: format!("non-finite value `{field}`"),
                });
            }
            if col == target_col {
                target = v;
            } else {
                row.push(v);
            }
        }
        rows.push(row);
        targets.push(target);
    }
    if rows.is_empty() {
        return Err(Error::EmptyBody { origin: None });
    }
    let target_name = names[target_col].clone();
    let feature_names: Vec<String> = names
        .into_iter()
        .enumerate()
        .filter(|&(i, _)| i != target_col)
        .map(|(_, n)| n)
        .collect();
    if let Some(schema) = opts.schema {
        if !schema.matches(&feature_names, &target_name) {
            return Err(Error::SchemaMismatch(format!(
                "expected features [{}] and target `{}` for the {} schema",
                schema.feature_names().join(","),
                schema.target_name(),
                schema.tag()
            )));
        }
    }
    Dataset::new(feature_names, target_name, rows, targets)
}

/// Interval that normalized values are mapped onto.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutputRange {
    pub lo: f64,
    pub hi: f64,
}

impl Default for OutputRange {
    fn default() -> Self {
        OutputRange { lo: 0.1, hi: 0.9 }
    }
}

impl OutputRange {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        let r = OutputRange { lo, hi };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        if self.lo.is_finite() && self.hi.is_finite() && self.lo < self.hi {
            Ok(())
        } else {
            Err(Error::InvalidOutputRange {
                lo: self.lo,
                hi: self.hi,
            })
        }
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }
}

/// Observed extrema of one column.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ColumnStats {
    pub min: f64,
    pub max: f64,
}

impl ColumnStats {
    pub fn from_values(values: impl IntoIterator<Item = f64>) -> Option<Self> {
        values.into_iter().fold(None, |acc, v| match acc {
            None => Some(ColumnStats { min: v, max: v }),
            Some(s) => Some(ColumnStats {
                min: s.min.min(v),
                max: s.max.max(v),
            }),
        })
    }

    pub fn range(&self) -> f64 {
        self.max - self.min
    }

    pub fn is_degenerate(&self) -> bool {
        self.max == self.min
    }

    /// Affine map of `[min, max]` onto `[lo, hi]`.
    pub fn normalize(&self, value: f64, out: OutputRange) -> Result<f64> {
        if self.is_degenerate() {
            return Err(Error::DegenerateColumn(format!("min=max={}", self.min)));
        }
        Ok(out.lo + (value - self.min) * (out.hi - out.lo) / self.range())
    }

    /// Inverse of [`ColumnStats::normalize`].
    pub fn denormalize(&self, value: f64, out: OutputRange) -> Result<f64> {
        if self.is_degenerate() {
            return Err(Error::DegenerateColumn(format!("min=max={}", self.min)));
        }
        Ok(self.min + (value - out.lo) * self.range() / (out.hi - out.lo))
    }
}

/// Per-column extrema for every feature and the target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormStats {
    pub features: Vec<ColumnStats>,
    pub target: ColumnStats,
    pub output_range: OutputRange,
}

/// Width of the extrapolation guard band on each side, in column ranges.
pub const GUARD_BAND_RANGES: f64 = 10.0;

/// Compute per-column extrema of `ds`. Constant columns are reported by
/// [`NormStats::degenerate_features`], not rejected here.
pub fn fit_normalizer(ds: &Dataset, output_range: OutputRange) -> Result<NormStats> {
    output_range.validate()?;
    let features = (0..ds.n_features())
        .map(|c| ColumnStats::from_values(ds.feature_column(c)).expect("dataset is non-empty"))
        .collect();
    let target =
        ColumnStats::from_values(ds.targets().iter().copied()).expect("dataset is non-empty");
    Ok(NormStats {
        features,
        target,
        output_range,
    })
}

impl NormStats {
    pub fn n_features(&self) -> usize {
        self.features.len()
    }

    /// Indices of constant feature columns.
    pub fn degenerate_features(&self) -> Vec<usize> {
        self.features
            .iter()
            .enumerate()
            .filter(|(_, c)| c.is_degenerate())
            .map(|(i, _)| i)
            .collect()
    }

    pub fn target_is_degenerate(&self) -> bool {
        self.target.is_degenerate()
    }

    /// Fail with the name of the first constant feature column, if any.
    pub fn require_non_degenerate(&self, names: &[String]) -> Result<()> {
        match self.degenerate_features().first() {
            Some(&i) => Err(Error::DegenerateColumn(
                names.get(i).cloned().unwrap_or_else(|| format!("#{i}")),
            )),
            None => Ok(()),
        }
    }

    /// Check that every value lies within `GUARD_BAND_RANGES` column ranges
    /// of the observed extrema.
    pub fn check_guard_band(&self, raw: &[f64], names: &[String]) -> Result<()> {
        self.check_len(raw)?;
        for (i, (&v, c)) in raw.iter().zip(&self.features).enumerate() {
            let pad = GUARD_BAND_RANGES * c.range();
            let (lo, hi) = (c.min - pad, c.max + pad);
            if !(lo..=hi).contains(&v) {
                return Err(Error::Extrapolation {
                    feature: names.get(i).cloned().unwrap_or_else(|| format!("#{i}")),
                    value: v,
                    lo,
                    hi,
                });
            }
        }
        Ok(())
    }

    pub fn normalize_features_into(&self, raw: &[f64], out: &mut [f64]) -> Result<()> {
        self.check_len(raw)?;
        for ((o, &v), c) in out.iter_mut().zip(raw).zip(&self.features) {
            *o = c.normalize(v, self.output_range)?;
        }
        Ok(())
    }

    pub fn normalize_features(&self, raw: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; raw.len()];
        self.normalize_features_into(raw, &mut out)?;
        Ok(out)
    }

    /// Normalize a target value. A constant target maps to the midpoint of
    /// the output range.
    pub fn normalize_target(&self, value: f64) -> f64 {
        if self.target.is_degenerate() {
            self.output_range.midpoint()
        } else {
            self.target
                .normalize(value, self.output_range)
                .expect("checked non-degenerate")
        }
    }

    /// Inverse of [`NormStats::normalize_target`]. A constant target
    /// decodes to that constant for every input.
    pub fn denormalize_target(&self, value: f64) -> f64 {
        if self.target.is_degenerate() {
            self.target.min
        } else {
            self.target
                .denormalize(value, self.output_range)
                .expect("checked non-degenerate")
        }
    }

    fn check_len(&self, raw: &[f64]) -> Result<()> {
        if raw.len() != self.features.len() {
            return Err(Error::DimensionMismatch {
                expected: self.features.len(),
                found: raw.len(),
            });
        }
        Ok(())
    }

    pub(crate) fn validate(&self) -> Result<()> {
        self.output_range.validate()?;
        for c in self.features.iter().chain(std::iter::once(&self.target)) {
            if !(c.min.is_finite() && c.max.is_finite() && c.max >= c.min) {
                return Err(Error::InvalidConfig(format!(
                    "column stats must be finite with max >= min, got [{}, {}]",
                    c.min, c.max
                )));
            }
        }
        Ok(())
    }
}

/// Assignment of every row to one of `k` folds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub k: usize,
    pub seed: u64,
    /// Fold index of each row.
    pub assignments: Vec<usize>,
}

impl FoldPlan {
    /// Row indices of fold `f`, ascending.
    pub fn fold_indices(&self, f: usize) -> Vec<usize> {
        self.assignments
            .iter()
            .enumerate()
            .filter(|&(_, &a)| a == f)
            .map(|(i, _)| i)
            .collect()
    }

    /// Row indices outside fold `f`, ascending.
    pub fn complement_indices(&self, f: usize) -> Vec<usize> {
        self.assignments
            .iter()
            .enumerate()
            .filter(|&(_, &a)| a != f)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &a in &self.assignments {
            sizes[a] += 1;
        }
        sizes
    }
}

fn shuffled_indices(n: usize, seed: u64) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut seeded_rng(seed));
    idx
}

/// Seeded shuffle, then contiguous assignment: the first `n mod k` folds
/// get one extra row.
pub fn kfold(ds: &Dataset, k: usize, seed: u64) -> Result<FoldPlan> {
    kfold_n(ds.len(), k, seed)
}

pub fn kfold_n(n: usize, k: usize, seed: u64) -> Result<FoldPlan> {
    if k < 2 || k > n {
        return Err(Error::InvalidArgument(format!(
            "k must satisfy 2 <= k <= {n} (rows), got {k}"
        )));
    }
    let order = shuffled_indices(n, seed);
    let (base, extra) = (n / k, n % k);
    let mut assignments = vec![0; n];
    let mut pos = 0;
    for fold in 0..k {
        let size = base + usize::from(fold < extra);
        for &row in &order[pos..pos + size] {
            assignments[row] = fold;
        }
        pos += size;
    }
    Ok(FoldPlan {
        k,
        seed,
        assignments,
    })
}

/// Number of test rows for a split: `round(n * fraction)`, half away from zero.
pub fn test_count(n: usize, test_fraction: f64) -> usize {
    (n as f64 * test_fraction).round() as usize
}

/// Seeded train/test split. Rows keep their original relative order in
/// both parts.
pub fn split(ds: &Dataset, test_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "test fraction must lie in (0, 1), got {test_fraction}"
        )));
    }
    let n = ds.len();
    let n_test = test_count(n, test_fraction);
    if n_test == 0 || n_test >= n {
        return Err(Error::InvalidArgument(format!(
            "test fraction {test_fraction} of {n} rows leaves an empty part"
        )));
    }
    let order = shuffled_indices(n, seed);
    let mut test: Vec<usize> = order[..n_test].to_vec();
    let mut train: Vec<usize> = order[n_test..].to_vec();
    test.sort_unstable();
    train.sort_unstable();
    Ok((ds.subset(&train)?, ds.subset(&test)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn names(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("x{i}")).collect()
    }

    fn linear_ds(n: usize) -> Dataset {
        let rows = (0..n).map(|i| vec![i as f64, (i * i) as f64]).collect();
        let targets = (0..n).map(|i| 2.0 * i as f64).collect();
        Dataset::new(names(2), "y", rows, targets).unwrap()
    }

    #[test]
    fn parses_iaq_header_and_tags_schema() {
        let mut text = String::from("pm25_in,pm25_out,pm10_in,pm10_out,temp,rh,co2,fungi\n");
        for i in 0..249 {
            text.push_str(&format!("{i},1,2,3,24.5,55,600,{}\n", 100 + i));
        }
        let ds = parse_csv(&text, &CsvOptions::default()).unwrap();
        assert_eq!(ds.n_features(), 7);
        assert_eq!(ds.len(), 249);
        assert_eq!(ds.target_name(), "fungi");
        assert_eq!(ds.schema(), Some(Schema::Iaq));
        assert_eq!(ds.row(10)[0], 10.0);
        assert_eq!(ds.target(248), 348.0);
    }

    #[test]
    fn minimal_file() {
        let ds = parse_csv("x,y\n0,0\n", &CsvOptions::default()).unwrap();
        assert_eq!(ds.n_features(), 1);
        assert_eq!(ds.len(), 1);
        assert_eq!(ds.schema(), None);
    }

    #[test]
    fn non_numeric_cell_reports_line_and_column() {
        let text = "a,b,c,d\n1,2,3,4\n1,2,3,4\n1,2,3,4\n1,2,oops,4\n";
        let err = parse_csv(text, &CsvOptions::default()).unwrap_err();
        match err {
            Error::Csv { line, column, .. } => assert_eq!((line, column), (5, 3)),
            e => panic!("unexpected error {e:?}"),
        }
    }

    #[test]
    fn load_csv_names_the_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "a,b\n1,x\n").unwrap();
        let msg = load_csv(&path, &CsvOptions::default())
            .unwrap_err()
            .to_string();
        assert!(msg.contains("bad.csv"), "{msg}");
        assert!(msg.contains("line 2, column 2"), "{msg}");

        let missing = load_csv(dir.path().join("nope.csv"), &CsvOptions::default()).unwrap_err();
        assert!(matches!(missing, Error::Io { .. }));
    }

    #[test]
    fn rejects_malformed_input() {
        let opts = CsvOptions::default();
        assert!(matches!(
            parse_csv("a,b\n1,2,3\n", &opts),
            Err(Error::Arity {
                line: 2,
                expected: 2,
                found: 3,
                ..
            })
        ));
        assert!(matches!(
            parse_csv("a,b\n", &opts),
            Err(Error::EmptyBody { .. })
        ));
        assert!(matches!(
            parse_csv("a,a\n1,2\n", &opts),
            Err(Error::Header { .. })
        ));
        assert!(matches!(parse_csv("", &opts), Err(Error::Header { .. })));
        assert!(matches!(
            parse_csv("a,b\n1,NaN\n", &opts),
            Err(Error::Csv {
                line: 2,
                column: 2,
                ..
            })
        ));
        assert!(matches!(
            parse_csv("a,b\n1,inf\n", &opts),
            Err(Error::Csv { .. })
        ));
    }

    #[test]
    fn target_override_and_schema_check() {
        let opts = CsvOptions {
            target: Some("a".into()),
            schema: None,
        };
        let ds = parse_csv("a,b,c\n1,2,3\n", &opts).unwrap();
        assert_eq!(ds.target_name(), "a");
        assert_eq!(ds.feature_names(), ["b", "c"]);
        assert_eq!(ds.row(0), [2.0, 3.0]);
        assert_eq!(ds.target(0), 1.0);

        let opts = CsvOptions {
            target: None,
            schema: Some(Schema::Collector),
        };
        assert!(matches!(
            parse_csv("a,b,c\n1,2,3\n", &opts),
            Err(Error::SchemaMismatch(_))
        ));
    }

    #[test]
    fn csv_roundtrip_is_exact() {
        let rows = vec![vec![0.1, -3.25e-7], vec![1.0 / 3.0, 12345.678901234567]];
        let ds = Dataset::new(names(2), "y", rows, vec![std::f64::consts::PI, -0.0]).unwrap();
        let text = ds.to_csv_string();
        assert!(text.ends_with('\n'));
        assert_eq!(parse_csv(&text, &CsvOptions::default()).unwrap(), ds);
    }

    #[test]
    fn dataset_invariants() {
        assert!(Dataset::new(vec![], "y", vec![vec![]], vec![1.0]).is_err());
        assert!(Dataset::new(names(1), "y", vec![], vec![]).is_err());
        assert!(Dataset::new(names(1), "x0", vec![vec![1.0]], vec![1.0]).is_err());
        assert!(Dataset::new(names(2), "y", vec![vec![1.0]], vec![1.0]).is_err());
        assert!(Dataset::new(names(1), "y", vec![vec![f64::NAN]], vec![1.0]).is_err());
    }

    #[test]
    fn normalizer_extrema() {
        let ds = Dataset::new(
            names(2),
            "y",
            vec![vec![2.0, 5.0], vec![4.0, 5.0], vec![6.0, 5.0]],
            vec![1.0, 2.0, 3.0],
        )
        .unwrap();
        let stats = fit_normalizer(&ds, OutputRange::default()).unwrap();
        assert_eq!(stats.features[0], ColumnStats { min: 2.0, max: 6.0 });
        assert!(stats.features[1].is_degenerate());
        assert_eq!(stats.degenerate_features(), vec![1]);
        assert!(matches!(
            stats.require_non_degenerate(ds.feature_names()),
            Err(Error::DegenerateColumn(n)) if n == "x1"
        ));
        assert!(fit_normalizer(&ds, OutputRange { lo: 0.5, hi: 0.5 }).is_err());
    }

    #[test]
    fn normalizer_matches_brute_force_scan_on_mixed_signs() {
        let rows: Vec<Vec<f64>> = (0..37)
            .map(|i| {
                let t = i as f64;
                vec![(t * 0.7).sin() * 10.0 - 3.0, -(t - 18.0).powi(2) + 40.0]
            })
            .collect();
        let targets: Vec<f64> = (0..37).map(|i| (i as f64 * 1.3).cos()).collect();
        let ds = Dataset::new(names(2), "y", rows.clone(), targets.clone()).unwrap();
        let stats = fit_normalizer(&ds, OutputRange::default()).unwrap();
        for c in 0..2 {
            let mut min = f64::INFINITY;
            let mut max = f64::NEG_INFINITY;
            for r in &rows {
                if r[c] < min {
                    min = r[c];
                }
                if r[c] > max {
                    max = r[c];
                }
            }
            assert_eq!(stats.features[c], ColumnStats { min, max });
        }
        assert!(stats.features[0].min < 0.0 && stats.features[1].max > 0.0);
        let tmin = targets.iter().cloned().fold(f64::INFINITY, f64::min);
        assert_eq!(stats.target.min, tmin);
    }

    #[test]
    fn normalize_endpoints_and_midpoint() {
        let c = ColumnStats { min: 2.0, max: 6.0 };
        let r = OutputRange::default();
        assert_eq!(c.normalize(2.0, r).unwrap(), 0.1);
        assert_eq!(c.normalize(6.0, r).unwrap(), 0.9);
        assert!((c.normalize(4.0, r).unwrap() - 0.5).abs() < 1e-15);
        let flat = ColumnStats { min: 5.0, max: 5.0 };
        assert!(matches!(
            flat.normalize(5.0, r),
            Err(Error::DegenerateColumn(_))
        ));
        assert!(matches!(
            flat.denormalize(0.5, r),
            Err(Error::DegenerateColumn(_))
        ));
    }

    #[test]
    fn normalize_roundtrip_1000_values() {
        use rand::Rng;
        let c = ColumnStats {
            min: -50.0,
            max: 250.0,
        };
        let r = OutputRange::default();
        let mut rng = seeded_rng(7);
        let worst = (0..1000)
            .map(|_| {
                let x: f64 = rng.random_range(-50.0..250.0);
                (c.denormalize(c.normalize(x, r).unwrap(), r).unwrap() - x).abs()
            })
            .fold(0.0, f64::max);
        assert!(worst < 1e-12, "{worst}");
    }

    #[test]
    fn constant_target_decodes_to_constant() {
        let ds = Dataset::new(names(1), "y", vec![vec![1.0], vec![2.0]], vec![7.0, 7.0]).unwrap();
        let stats = fit_normalizer(&ds, OutputRange::default()).unwrap();
        assert!(stats.target_is_degenerate());
        assert_eq!(stats.normalize_target(7.0), 0.5);
        assert_eq!(stats.denormalize_target(0.123), 7.0);
    }

    #[test]
    fn guard_band() {
        let ds = Dataset::new(names(1), "y", vec![vec![0.0], vec![1.0]], vec![0.0, 1.0]).unwrap();
        let stats = fit_normalizer(&ds, OutputRange::default()).unwrap();
        assert!(stats.check_guard_band(&[11.0], ds.feature_names()).is_ok());
        assert!(stats.check_guard_band(&[-10.0], ds.feature_names()).is_ok());
        assert!(matches!(
            stats.check_guard_band(&[11.5], ds.feature_names()),
            Err(Error::Extrapolation { .. })
        ));
        assert!(matches!(
            stats.check_guard_band(&[1.0, 2.0], ds.feature_names()),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn kfold_sizes_249_by_5() {
        let plan = kfold_n(249, 5, 42).unwrap();
        let mut sizes = plan.sizes();
        sizes.sort_unstable();
        assert_eq!(sizes, vec![49, 50, 50, 50, 50]);
        assert_eq!(plan.sizes()[4], 49);
    }

    #[test]
    fn kfold_leave_one_out_and_range() {
        let ds = linear_ds(7);
        let plan = kfold(&ds, 7, 3).unwrap();
        assert!(plan.sizes().iter().all(|&s| s == 1));
        assert!(kfold(&ds, 1, 0).is_err());
        assert!(kfold(&ds, 8, 0).is_err());
        assert_eq!(kfold(&ds, 3, 9).unwrap(), kfold(&ds, 3, 9).unwrap());
    }

    #[test]
    fn split_counts() {
        let (tr, te) = split(&linear_ds(10), 0.2, 1).unwrap();
        assert_eq!((tr.len(), te.len()), (8, 2));
        let (tr, te) = split(&linear_ds(249), 0.2, 1).unwrap();
        assert_eq!((tr.len(), te.len()), (199, 50));
        assert!(split(&linear_ds(3), 0.1, 1).is_err());
        assert!(split(&linear_ds(3), 0.9, 1).is_err());
        assert!(split(&linear_ds(3), 1.0, 1).is_err());
    }

    #[test]
    fn split_is_a_partition_and_seed_dependent() {
        let ds = linear_ds(50);
        let members = |seed| {
            let (tr, te) = split(&ds, 0.3, seed).unwrap();
            let test: Vec<f64> = te.feature_column(0).collect();
            let mut all: Vec<f64> = tr.feature_column(0).chain(test.iter().copied()).collect();
            all.sort_by(f64::total_cmp);
            assert_eq!(all, (0..50).map(|i| i as f64).collect::<Vec<_>>());
            test
        };
        assert_eq!(members(1), members(1));
        assert_ne!(members(1), members(2));
    }

    proptest! {
        #[test]
        fn folds_partition_rows(n in 2usize..300, k_frac in 0.0f64..1.0, seed: u64) {
            let k = 2 + ((n - 2) as f64 * k_frac) as usize;
            let plan = kfold_n(n, k, seed).unwrap();
            let mut all: Vec<usize> = (0..k).flat_map(|f| plan.fold_indices(f)).collect();
            all.sort_unstable();
            prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
            let sizes = plan.sizes();
            let (lo, hi) = (sizes.iter().min().unwrap(), sizes.iter().max().unwrap());
            prop_assert!(hi - lo <= 1);
        }

        #[test]
        fn normalize_roundtrip(min in -1e6f64..1e6, width in 1e-3f64..1e6, t in 0.0f64..1.0) {
            let c = ColumnStats { min, max: min + width };
            let r = OutputRange::default();
            let x = min + t * width;
            let back = c.denormalize(c.normalize(x, r).unwrap(), r).unwrap();
            prop_assert!((back - x).abs() <= 1e-12 * x.abs().max(width).max(1.0));
        }

        #[test]
        fn normalize_is_order_preserving(a in -1e3f64..1e3, b in -1e3f64..1e3) {
            prop_assume!(b - a > 1e-9);
            let c = ColumnStats { min: -1e3, max: 1e3 };
            let r = OutputRange::default();
            prop_assert!(c.normalize(a, r).unwrap() < c.normalize(b, r).unwrap());
        }
    }
}
