//! High-throughput screening: stream every combination of discretized
//! design variables through a trained surrogate and keep the best `k`.
//!
//! Candidates are numbered in mixed-radix order with the last variable
//! varying fastest. Ranking is by predicted value in the requested
//! direction, ties by ascending candidate index, so the report does not
//! depend on how the index range is split across workers.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::model::Predictor;

pub const DEFAULT_TOP_K: usize = 2;

/// Hard cap on the number of levels one variable may expand to.
pub const MAX_LEVELS_PER_VARIABLE: usize = 10_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignVariable {
    pub name: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DesignSpace {
    variables: Vec<DesignVariable>,
    total: u64,
}

impl DesignSpace {
    pub fn new(variables: Vec<DesignVariable>) -> Result<Self> {
        let bad = |m: String| Err(Error::ScreenConfig(m));
        if variables.is_empty() {
            return bad("design space has no variables".into());
        }
        let mut total: u64 = 1;
        for (i, v) in variables.iter().enumerate() {
            if v.name.trim().is_empty() {
                return bad(format!("variable {} has an empty name", i + 1));
            }
            if variables[..i].iter().any(|w| w.name == v.name) {
                return bad(format!("variable `{}` is listed twice", v.name));
            }
            if v.values.is_empty() {
                return bad(format!("variable `{}` has no values", v.name));
            }
            if v.values.iter().any(|x| !x.is_finite()) {
                return bad(format!("variable `{}` has a non-finite value", v.name));
            }
            if v.values.windows(2).any(|w| w[0] >= w[1]) {
                return bad(format!("values of `{}` must be strictly ascending", v.name));
            }
            total = total
                .checked_mul(v.values.len() as u64)
                .ok_or(Error::CandidateOverflow)?;
        }
        Ok(DesignSpace { variables, total })
    }

    pub fn variables(&self) -> &[DesignVariable] {
        &self.variables
    }

    pub fn names(&self) -> Vec<String> {
        self.variables.iter().map(|v| v.name.clone()).collect()
    }

    pub fn dims(&self) -> usize {
        self.variables.len()
    }

    /// Product of the per-variable cardinalities.
    pub fn candidate_count(&self) -> u64 {
        self.total
    }

    /// Write candidate `index` into `out`.
    pub fn candidate_into(&self, index: u64, out: &mut [f64]) -> Result<()> {
        if index >= self.total {
            return Err(Error::InvalidArgument(format!(
                "candidate index {index} out of range for {} candidates",
                self.total
            )));
        }
        if out.len() != self.dims() {
            return Err(Error::DimensionMismatch {
                expected: self.dims(),
                found: out.len(),
            });
        }
        let mut rest = index;
        for (slot, var) in out.iter_mut().zip(&self.variables).rev() {
            let radix = var.values.len() as u64;
            *slot = var.values[(rest % radix) as usize];
            rest /= radix;
        }
        Ok(())
    }

    pub fn candidate(&self, index: u64) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.dims()];
        self.candidate_into(index, &mut out)?;
        Ok(out)
    }

    /// All candidates in index order.
    pub fn iter(&self) -> Candidates<'_> {
        self.range(0, self.total)
    }

    /// Candidates with indices in `start..end` (clamped to the space).
    pub fn range(&self, start: u64, end: u64) -> Candidates<'_> {
        let end = end.min(self.total);
        let start = start.min(end);
        let mut digits = vec![0usize; self.dims()];
        let mut rest = start;
        for (d, var) in digits.iter_mut().zip(&self.variables).rev() {
            let radix = var.values.len() as u64;
            *d = (rest % radix) as usize;
            rest /= radix;
        }
        Candidates {
            space: self,
            digits,
            next: start,
            end,
        }
    }

    /// SHA-256 over a canonical rendering of names and values.
    pub fn digest(&self) -> String {
        let mut text = String::new();
        for v in &self.variables {
            text.push_str(&v.name);
            for x in &v.values {
                let _ = write!(text, ",{x}");
            }
            text.push('\n');
        }
        hex::encode(Sha256::digest(text.as_bytes()))
    }
}

/// Odometer over a contiguous index range of a [`DesignSpace`].
pub struct Candidates<'a> {
    space: &'a DesignSpace,
    digits: Vec<usize>,
    next: u64,
    end: u64,
}

impl Candidates<'_> {
    /// Visit each remaining candidate without allocating per item.
    pub fn for_each_ref<F: FnMut(u64, &[f64])>(mut self, mut f: F) {
        let mut buf: Vec<f64> = self
            .digits
            .iter()
            .zip(&self.space.variables)
            .map(|(&d, v)| v.values[d])
            .collect();
        while self.next < self.end {
            f(self.next, &buf);
            self.advance(&mut buf);
        }
    }

    fn advance(&mut self, buf: &mut [f64]) {
        self.next += 1;
        for (pos, var) in self.space.variables.iter().enumerate().rev() {
            self.digits[pos] += 1;
            if self.digits[pos] < var.values.len() {
                buf[pos] = var.values[self.digits[pos]];
                return;
            }
            self.digits[pos] = 0;
            buf[pos] = var.values[0];
        }
    }
}

impl Iterator for Candidates<'_> {
    type Item = (u64, Vec<f64>);

    fn next(&mut self) -> Option<Self::Item> {
        if self.next >= self.end {
            return None;
        }
        let mut buf: Vec<f64> = self
            .digits
            .iter()
            .zip(&self.space.variables)
            .map(|(&d, v)| v.values[d])
            .collect();
        let item = (self.next, buf.clone());
        self.advance(&mut buf);
        Some(item)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = (self.end - self.next) as usize;
        (n, Some(n))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    #[serde(rename = "max", alias = "maximize")]
    Maximize,
    #[serde(rename = "min", alias = "minimize")]
    Minimize,
}

impl Direction {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "max" | "maximize" => Some(Direction::Maximize),
            "min" | "minimize" => Some(Direction::Minimize),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Maximize => "max",
            Direction::Minimize => "min",
        }
    }

    /// Ranking order of `(value, index)` pairs: `Less` ranks first.
    pub fn compare(self, a: (f64, u64), b: (f64, u64)) -> Ordering {
        let by_value = match self {
            Direction::Maximize => b.0.total_cmp(&a.0),
            Direction::Minimize => a.0.total_cmp(&b.0),
        };
        by_value.then(a.1.cmp(&b.1))
    }
}

/// Heap entry whose maximum is the worst-ranked candidate kept so far.
struct Kept {
    direction: Direction,
    value: f64,
    index: u64,
}

impl PartialEq for Kept {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Kept {}

impl PartialOrd for Kept {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Kept {
    fn cmp(&self, other: &Self) -> Ordering {
        self.direction
            .compare((self.value, self.index), (other.value, other.index))
    }
}

/// Bounded selection of the best `k` `(value, index)` pairs.
pub struct TopK {
    direction: Direction,
    k: usize,
    heap: BinaryHeap<Kept>,
}

impl TopK {
    pub fn new(direction: Direction, k: usize) -> Self {
        TopK {
            direction,
            k,
            heap: BinaryHeap::with_capacity(k.saturating_add(1).min(1 << 16)),
        }
    }

    pub fn push(&mut self, value: f64, index: u64) {
        if self.k == 0 {
            return;
        }
        let entry = Kept {
            direction: self.direction,
            value,
            index,
        };
        if self.heap.len() < self.k {
            self.heap.push(entry);
        } else if let Some(worst) = self.heap.peek() {
            if entry < *worst {
                self.heap.pop();
                self.heap.push(entry);
            }
        }
    }

    pub fn merge(&mut self, other: TopK) {
        for e in other.heap {
            self.push(e.value, e.index);
        }
    }

    /// Kept pairs, best first.
    pub fn into_sorted(self) -> Vec<(f64, u64)> {
        self.heap
            .into_sorted_vec()
            .into_iter()
            .map(|e| (e.value, e.index))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScreenOptions {
    pub direction: Direction,
    pub top_k: usize,
    pub workers: usize,
}

impl Default for ScreenOptions {
    fn default() -> Self {
        ScreenOptions {
            direction: Direction::Maximize,
            top_k: DEFAULT_TOP_K,
            workers: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedCandidate {
    pub rank: usize,
    pub index: u64,
    pub values: Vec<f64>,
    pub predicted: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScreeningReport {
    pub variable_names: Vec<String>,
    pub target_name: String,
    pub direction: Direction,
    pub top_k: usize,
    pub total_candidates: u64,
    pub evaluated: u64,
    /// Candidates skipped because they fall outside the model's
    /// extrapolation guard band.
    pub excluded: u64,
    pub entries: Vec<RankedCandidate>,
    pub model_description: String,
    pub model_digest: Option<String>,
    pub space_digest: String,
}

impl ScreeningReport {
    pub fn with_model_digest(mut self, digest: impl Into<String>) -> Self {
        self.model_digest = Some(digest.into());
        self
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("rank,index");
        for n in &self.variable_names {
            out.push(',');
            out.push_str(n);
        }
        let _ = writeln!(out, ",predicted_{}", self.target_name);
        for e in &self.entries {
            let _ = write!(out, "{},{}", e.rank, e.index);
            for v in &e.values {
                let _ = write!(out, ",{v}");
            }
            let _ = writeln!(out, ",{}", e.predicted);
        }
        out
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "direction: {}", self.direction.as_str());
        let _ = writeln!(s, "top_k: {}", self.top_k);
        let _ = writeln!(s, "total_candidates: {}", self.total_candidates);
        let _ = writeln!(s, "evaluated: {}", self.evaluated);
        let _ = writeln!(s, "excluded_extrapolation: {}", self.excluded);
        let _ = writeln!(s, "model: {}", self.model_description);
        let _ = writeln!(
            s,
            "model_sha256: {}",
            self.model_digest.as_deref().unwrap_or("-")
        );
        let _ = writeln!(s, "space_sha256: {}", self.space_digest);
        for e in &self.entries {
            let vars: Vec<String> = self
                .variable_names
                .iter()
                .zip(&e.values)
                .map(|(n, v)| format!("{n}={v}"))
                .collect();
            let _ = writeln!(
                s,
                "#{} index={} {} -> {}={}",
                e.rank,
                e.index,
                vars.join(" "),
                self.target_name,
                e.predicted
            );
        }
        s
    }
}

struct Partial {
    top: TopK,
    evaluated: u64,
    excluded: u64,
}

fn screen_range(
    model: &dyn Predictor,
    space: &DesignSpace,
    direction: Direction,
    k: usize,
    start: u64,
    end: u64,
) -> Result<Partial> {
    let mut part = Partial {
        top: TopK::new(direction, k),
        evaluated: 0,
        excluded: 0,
    };
    let mut failure = None;
    space.range(start, end).for_each_ref(|index, x| {
        if failure.is_some() {
            return;
        }
        match model.predict(x) {
            Ok(y) if y.is_finite() => {
                part.evaluated += 1;
                part.top.push(y, index);
            }
            Ok(y) => failure = Some(Error::NonFinitePrediction(y)),
            Err(Error::Extrapolation { .. }) => part.excluded += 1,
            Err(e) => failure = Some(e),
        }
    });
    match failure {
        Some(e) => Err(e),
        None => Ok(part),
    }
}

/// Predict every candidate in `space` and rank the best `top_k`.
pub fn screen(
    model: &dyn Predictor,
    target_name: &str,
    space: &DesignSpace,
    opts: &ScreenOptions,
) -> Result<ScreeningReport> {
    if opts.top_k == 0 {
        return Err(Error::InvalidArgument("top k must be at least 1".into()));
    }
    if opts.workers == 0 {
        return Err(Error::InvalidArgument(
            "worker count must be at least 1".into(),
        ));
    }
    let names = space.names();
    if names.as_slice() != model.feature_names() {
        return Err(Error::SchemaMismatch(format!(
            "design space variables [{}] do not match model features [{}]",
            names.join(","),
            model.feature_names().join(",")
        )));
    }
    let total = space.candidate_count();
    let workers = (opts.workers as u64).min(total).max(1);
    let chunk = total.div_ceil(workers);
    let bounds: Vec<(u64, u64)> = (0..workers)
        .map(|w| (w * chunk, ((w + 1) * chunk).min(total)))
        .filter(|(s, e)| s < e)
        .collect();

    let parts: Vec<Result<Partial>> = if bounds.len() == 1 {
        vec![screen_range(
            model,
            space,
            opts.direction,
            opts.top_k,
            0,
            total,
        )]
    } else {
        std::thread::scope(|scope| {
            let handles: Vec<_> = bounds
                .iter()
                .map(|&(s, e)| {
                    scope
                        .spawn(move || screen_range(model, space, opts.direction, opts.top_k, s, e))
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("screening worker panicked"))
                .collect()
        })
    };

    let mut top = TopK::new(opts.direction, opts.top_k);
    let (mut evaluated, mut excluded) = (0, 0);
    for part in parts {
        let part = part?;
        evaluated += part.evaluated;
        excluded += part.excluded;
        top.merge(part.top);
    }
    let entries = top
        .into_sorted()
        .into_iter()
        .enumerate()
        .map(|(i, (predicted, index))| {
            Ok(RankedCandidate {
                rank: i + 1,
                index,
                values: space.candidate(index)?,
                predicted,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ScreeningReport {
        variable_names: names,
        target_name: target_name.to_string(),
        direction: opts.direction,
        top_k: opts.top_k,
        total_candidates: total,
        evaluated,
        excluded,
        entries,
        model_description: model.describe(),
        model_digest: None,
        space_digest: space.digest(),
    })
}

/// How the reported candidates rank under a ground-truth function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleCheck {
    /// 1-based true rank of each reported candidate, ties by index.
    pub true_ranks: Vec<u64>,
    pub true_best_index: u64,
    pub true_best_value: f64,
    /// Truth at the reported top candidate.
    pub reported_best_value: f64,
    /// Shortfall of the reported top candidate versus the true best, in the
    /// direction of improvement (never negative).
    pub regret: f64,
    /// Fraction of all candidates whose truth is strictly better than the
    /// reported top candidate's.
    pub better_fraction: f64,
}

/// Evaluate `oracle` on the whole grid and locate the reported candidates.
pub fn verify_against_oracle<F>(
    space: &DesignSpace,
    oracle: F,
    report: &ScreeningReport,
) -> OracleCheck
where
    F: Fn(&[f64]) -> f64,
{
    let dir = report.direction;
    let reported: Vec<(f64, u64)> = report
        .entries
        .iter()
        .map(|e| (oracle(&e.values), e.index))
        .collect();
    let mut ranks = vec![1u64; reported.len()];
    let mut best: Option<(f64, u64)> = None;
    let mut strictly_better = 0u64;
    space.iter().for_each_ref(|index, x| {
        let v = oracle(x);
        for (r, &rep) in ranks.iter_mut().zip(&reported) {
            if dir.compare((v, index), rep) == Ordering::Less {
                *r += 1;
            }
        }
        if let Some(&(top, _)) = reported.first() {
            if dir.compare((v, 0), (top, 0)) == Ordering::Less && v != top {
                strictly_better += 1;
            }
        }
        if best.is_none_or(|b| dir.compare((v, index), b) == Ordering::Less) {
            best = Some((v, index));
        }
    });
    let (true_best_value, true_best_index) = best.expect("space is non-empty");
    let reported_best_value = reported.first().map_or(f64::NAN, |r| r.0);
    let regret = match dir {
        Direction::Maximize => true_best_value - reported_best_value,
        Direction::Minimize => reported_best_value - true_best_value,
    };
    OracleCheck {
        true_ranks: ranks,
        true_best_index,
        true_best_value,
        reported_best_value,
        regret,
        better_fraction: strictly_better as f64 / space.candidate_count() as f64,
    }
}

/// One variable of a screening config: explicit values or an inclusive
/// `min`/`step`/`max` range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VariableGrid {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max: Option<f64>,
}

impl VariableGrid {
    pub fn expand(&self) -> Result<Vec<f64>> {
        let bad = |m: String| {
            Err(Error::ScreenConfig(format!(
                "variable `{}`: {m}",
                self.name
            )))
        };
        match (&self.values, self.min, self.step, self.max) {
            (Some(v), None, None, None) => {
                if v.len() > MAX_LEVELS_PER_VARIABLE {
                    return bad("too many values".into());
                }
                Ok(v.clone())
            }
            (None, Some(min), Some(step), Some(max)) => {
                if !(min.is_finite() && step.is_finite() && max.is_finite()) {
                    return bad("range bounds must be finite".into());
                }
                if step <= 0.0 || max < min {
                    return bad("range needs step > 0 and max >= min".into());
                }
                let span = (max - min) / step;
                if !span.is_finite() || span > MAX_LEVELS_PER_VARIABLE as f64 {
                    return bad("range expands to too many values".into());
                }
                let n = span.round();
                let tol = 1e-9 * step.abs().max(max.abs()).max(1.0);
                if (min + n * step - max).abs() > tol {
                    return bad(format!(
                        "max {max} is not reachable from {min} in steps of {step}"
                    ));
                }
                let n = n as usize;
                let mut out: Vec<f64> = (0..=n).map(|i| min + i as f64 * step).collect();
                out[n] = max;
                Ok(out)
            }
            _ => bad("give either `values` or all of `min`, `step`, `max`".into()),
        }
    }
}

/// Screening run settings as read from a TOML file.
///
/// ```toml
/// model = "out/model.json"
/// direction = "max"
/// top = 2
/// workers = 4
///
/// [[variables]]
/// name = "tube_length"
/// values = [1.5, 1.8, 2.1]
///
/// [[variables]]
/// name = "tube_number"
/// min = 10
/// step = 2
/// max = 30
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScreenConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direction: Option<Direction>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub top: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    pub variables: Vec<VariableGrid>,
}

impl ScreenConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::ScreenConfig(e.to_string().trim().to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("screen config serializes")
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn space(&self) -> Result<DesignSpace> {
        let vars = self
            .variables
            .iter()
            .map(|g| {
                Ok(DesignVariable {
                    name: g.name.clone(),
                    values: g.expand()?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        DesignSpace::new(vars)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::FnPredictor;

    fn var(name: &str, values: &[f64]) -> DesignVariable {
        DesignVariable {
            name: name.into(),
            values: values.to_vec(),
        }
    }

    fn space(levels: &[usize]) -> DesignSpace {
        DesignSpace::new(
            levels
                .iter()
                .enumerate()
                .map(|(i, &n)| {
                    var(
                        &format!("v{i}"),
                        &(0..n).map(|j| j as f64).collect::<Vec<_>>(),
                    )
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn single_variable_in_listed_order() {
        let s = DesignSpace::new(vec![var("a", &[1.0, 2.5, 4.0])]).unwrap();
        let all: Vec<_> = s.iter().collect();
        assert_eq!(all, vec![(0, vec![1.0]), (1, vec![2.5]), (2, vec![4.0])]);
    }

    #[test]
    fn six_binary_variables() {
        let s = space(&[2; 6]);
        assert_eq!(s.candidate_count(), 64);
        let mut count = 0;
        s.iter().for_each_ref(|_, _| count += 1);
        assert_eq!(count, 64);
        assert_eq!(s.candidate(0).unwrap(), vec![0.0; 6]);
        assert_eq!(s.candidate(63).unwrap(), vec![1.0; 6]);
        assert_eq!(s.candidate(1).unwrap(), vec![0.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn iterator_agrees_with_index_mapping() {
        let s = space(&[3, 1, 4, 2]);
        for (i, x) in s.iter() {
            assert_eq!(x, s.candidate(i).unwrap());
        }
        let tail: Vec<u64> = s.range(17, 100).map(|(i, _)| i).collect();
        assert_eq!(tail, (17..24).collect::<Vec<_>>());
        assert!(s.candidate(24).is_err());
    }

    #[test]
    fn rejects_invalid_spaces() {
        assert!(DesignSpace::new(vec![]).is_err());
        assert!(DesignSpace::new(vec![var("a", &[])]).is_err());
        assert!(DesignSpace::new(vec![var("a", &[2.0, 1.0])]).is_err());
        assert!(DesignSpace::new(vec![var("a", &[1.0, 1.0])]).is_err());
        assert!(DesignSpace::new(vec![var("a", &[f64::NAN])]).is_err());
        assert!(DesignSpace::new(vec![var("a", &[1.0]), var("a", &[2.0])]).is_err());
    }

    #[test]
    fn overflow_is_detected() {
        let levels: Vec<f64> = (0..65_536).map(f64::from).collect();
        let vars = (0..5).map(|i| var(&format!("v{i}"), &levels)).collect();
        assert!(matches!(
            DesignSpace::new(vars),
            Err(Error::CandidateOverflow)
        ));
    }

    #[test]
    fn topk_keeps_best_with_index_ties() {
        let mut t = TopK::new(Direction::Maximize, 3);
        for (i, v) in [1.0, 5.0, 5.0, 3.0, 5.0, 0.0].into_iter().enumerate() {
            t.push(v, i as u64);
        }
        assert_eq!(t.into_sorted(), vec![(5.0, 1), (5.0, 2), (5.0, 4)]);
        let mut t = TopK::new(Direction::Minimize, 2);
        for (i, v) in [1.0, 5.0, 0.5, 0.5].into_iter().enumerate() {
            t.push(v, i as u64);
        }
        assert_eq!(t.into_sorted(), vec![(0.5, 2), (0.5, 3)]);
    }

    fn names(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("v{i}")).collect()
    }

    #[test]
    fn monotone_surrogate_picks_largest_value() {
        let s = space(&[4, 5, 3]);
        let model = FnPredictor::new(names(3), "monotone", |x: &[f64]| 2.0 * x[1] + 0.0 * x[0]);
        let opts = ScreenOptions {
            top_k: 1,
            ..Default::default()
        };
        let r = screen(&model, "y", &s, &opts).unwrap();
        assert_eq!(r.entries.len(), 1);
        assert_eq!(r.entries[0].values[1], 4.0);
        // Ties on the predicted value go to the lowest index.
        assert_eq!(r.entries[0].values, vec![0.0, 4.0, 0.0]);
    }

    #[test]
    fn top_all_is_a_full_sort() {
        let s = space(&[3, 4]);
        let model = FnPredictor::new(names(2), "f", |x: &[f64]| (x[0] - 1.0).abs() - x[1] * 0.5);
        let opts = ScreenOptions {
            top_k: 12,
            direction: Direction::Minimize,
            workers: 3,
        };
        let r = screen(&model, "y", &s, &opts).unwrap();
        let mut all: Vec<(f64, u64)> = s
            .iter()
            .map(|(i, x)| ((x[0] - 1.0).abs() - x[1] * 0.5, i))
            .collect();
        all.sort_by(|a, b| Direction::Minimize.compare(*a, *b));
        let got: Vec<(f64, u64)> = r.entries.iter().map(|e| (e.predicted, e.index)).collect();
        assert_eq!(got, all);
        assert_eq!(r.evaluated, 12);
    }

    #[test]
    fn screen_validates_inputs() {
        let s = space(&[2, 2]);
        let model = FnPredictor::new(vec!["v0".into(), "other".into()], "f", |_: &[f64]| 0.0);
        assert!(matches!(
            screen(&model, "y", &s, &ScreenOptions::default()),
            Err(Error::SchemaMismatch(_))
        ));
        let model = FnPredictor::new(names(2), "f", |_: &[f64]| 0.0);
        let zero_k = ScreenOptions {
            top_k: 0,
            ..Default::default()
        };
        assert!(screen(&model, "y", &s, &zero_k).is_err());
        let nan = FnPredictor::new(names(2), "f", |_: &[f64]| f64::NAN);
        assert!(matches!(
            screen(&nan, "y", &s, &ScreenOptions::default()),
            Err(Error::NonFinitePrediction(_))
        ));
    }

    #[test]
    fn single_point_grid() {
        let s = space(&[1, 1]);
        let model = FnPredictor::new(names(2), "f", |_: &[f64]| 3.0);
        let r = screen(&model, "y", &s, &ScreenOptions::default()).unwrap();
        assert_eq!(r.entries.len(), 1);
        assert_eq!(r.to_csv_string().lines().count(), 2);
    }

    #[test]
    fn exact_surrogate_has_zero_regret() {
        let s = space(&[5, 6, 7]);
        let f = |x: &[f64]| -(x[0] - 2.0).powi(2) + x[1] * x[2].sin();
        let model = FnPredictor::new(names(3), "f", f);
        let opts = ScreenOptions {
            top_k: 4,
            ..Default::default()
        };
        let r = screen(&model, "y", &s, &opts).unwrap();
        let check = verify_against_oracle(&s, f, &r);
        assert_eq!(check.regret, 0.0);
        assert_eq!(check.true_ranks, vec![1, 2, 3, 4]);
        assert_eq!(check.better_fraction, 0.0);
        assert_eq!(check.true_best_index, r.entries[0].index);
    }

    #[test]
    fn unrelated_surrogate_gives_wellformed_check() {
        let s = space(&[4, 4, 4]);
        let model = FnPredictor::new(names(3), "noise", |x: &[f64]| {
            ((x[0] * 7.1 + x[1] * 3.3 + x[2]).sin() * 1e4).fract()
        });
        let r = screen(
            &model,
            "y",
            &s,
            &ScreenOptions {
                top_k: 5,
                ..Default::default()
            },
        )
        .unwrap();
        let check = verify_against_oracle(&s, |x: &[f64]| x.iter().sum(), &r);
        assert!(check.true_ranks.iter().all(|&k| (1..=64).contains(&k)));
        assert!(check.regret >= 0.0);
        assert!((0.0..1.0).contains(&check.better_fraction));
    }

    #[test]
    fn config_ranges_and_values() {
        let text = r#"
model = "m.json"
direction = "min"
top = 3
workers = 2

[[variables]]
name = "a"
values = [1.0, 2.0]

[[variables]]
name = "b"
min = 10
step = 0.5
max = 12
"#;
        let cfg = ScreenConfig::from_toml(text).unwrap();
        assert_eq!(cfg.direction, Some(Direction::Minimize));
        let s = cfg.space().unwrap();
        assert_eq!(s.variables()[1].values, vec![10.0, 10.5, 11.0, 11.5, 12.0]);
        assert_eq!(s.candidate_count(), 10);
        assert_eq!(ScreenConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
    }

    #[test]
    fn config_errors() {
        for bad in [
            "variables = []",
            "[[variables]]\nname = \"a\"\n",
            "[[variables]]\nname = \"a\"\nmin = 0\nstep = 0.3\nmax = 1\n",
            "[[variables]]\nname = \"a\"\nmin = 0\nstep = -1\nmax = 1\n",
            "[[variables]]\nname = \"a\"\nvalues = [1]\nmin = 0\n",
            "bogus = 1\n[[variables]]\nname = \"a\"\nvalues = [1]\n",
            "direction = \"sideways\"\n[[variables]]\nname = \"a\"\nvalues = [1]\n",
        ] {
            let parsed = ScreenConfig::from_toml(bad).and_then(|c| c.space());
            assert!(parsed.is_err(), "{bad}");
        }
    }
}
