//! Accuracy metrics, k-fold cross-validation, the hidden-node sweep and the
//! one-axis-at-a-time ("control variable") hyperparameter search.
//!
//! Fold evaluations run in parallel; every aggregate is computed afterwards
//! in fold order, so reports do not depend on scheduling.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{kfold, Dataset};
use crate::error::{Error, Result};
use crate::grnn;
use crate::mlfn::{self, MlfnConfig};
use crate::model::{Predictor, Surrogate};

pub const DEFAULT_TOLERANCE: f64 = 0.30;
pub const DEFAULT_FOLDS: usize = 5;

/// Relative error band used by [`tolerance_accuracy`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToleranceSpec {
    /// Allowed relative error, e.g. 0.30 for +/-30%.
    pub fraction: f64,
    /// Absolute band used where the target is exactly zero.
    pub zero_target_epsilon: f64,
}

impl Default for ToleranceSpec {
    fn default() -> Self {
        ToleranceSpec {
            fraction: DEFAULT_TOLERANCE,
            zero_target_epsilon: 0.0,
        }
    }
}

impl ToleranceSpec {
    pub fn new(fraction: f64) -> Result<Self> {
        let spec = ToleranceSpec {
            fraction,
            ..Default::default()
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.fraction.is_finite() && self.fraction > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "tolerance fraction must be positive, got {}",
                self.fraction
            )));
        }
        if !(self.zero_target_epsilon.is_finite() && self.zero_target_epsilon >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "zero-target epsilon must be non-negative, got {}",
                self.zero_target_epsilon
            )));
        }
        Ok(())
    }

    /// Closed band: the boundary itself counts as inside.
    pub fn within(&self, prediction: f64, target: f64) -> bool {
        let err = (prediction - target).abs();
        if target == 0.0 {
            err <= self.zero_target_epsilon
        } else {
            err <= self.fraction * target.abs()
        }
    }
}

fn check_pairs(predictions: &[f64], targets: &[f64]) -> Result<()> {
    if predictions.len() != targets.len() {
        return Err(Error::InvalidArgument(format!(
            "{} predictions but {} targets",
            predictions.len(),
            targets.len()
        )));
    }
    if predictions.is_empty() {
        return Err(Error::InvalidArgument("no predictions to score".into()));
    }
    Ok(())
}

/// Fraction of predictions inside the tolerance band of their target.
pub fn tolerance_accuracy(
    predictions: &[f64],
    targets: &[f64],
    spec: &ToleranceSpec,
) -> Result<f64> {
    check_pairs(predictions, targets)?;
    spec.validate()?;
    let hits = predictions
        .iter()
        .zip(targets)
        .filter(|(&p, &t)| spec.within(p, t))
        .count();
    Ok(hits as f64 / predictions.len() as f64)
}

pub fn rmse(predictions: &[f64], targets: &[f64]) -> Result<f64> {
    check_pairs(predictions, targets)?;
    let sse: f64 = predictions
        .iter()
        .zip(targets)
        .map(|(p, t)| (p - t) * (p - t))
        .sum();
    Ok((sse / predictions.len() as f64).sqrt())
}

/// What to train inside cross-validation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelSpec {
    Mlfn(MlfnConfig),
    Grnn { sigma: f64 },
}

impl ModelSpec {
    pub fn fit(&self, ds: &Dataset) -> Result<Surrogate> {
        match self {
            ModelSpec::Mlfn(cfg) => Ok(Surrogate::Mlfn(mlfn::train(ds, cfg)?.0)),
            ModelSpec::Grnn { sigma } => Ok(Surrogate::Grnn(grnn::fit(ds, *sigma)?)),
        }
    }

    /// How to retrain `model` with the same settings.
    pub fn of(model: &Surrogate) -> Self {
        match model {
            Surrogate::Mlfn(m) => ModelSpec::Mlfn(m.config.clone()),
            Surrogate::Grnn(m) => ModelSpec::Grnn { sigma: m.sigma },
        }
    }
}

/// Predict every row of `ds`.
pub fn predict_all(model: &dyn Predictor, ds: &Dataset) -> Result<Vec<f64>> {
    ds.rows().map(|(x, _)| model.predict(x)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldScore {
    pub fold: usize,
    pub n_test: usize,
    pub accuracy: f64,
    pub rmse: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub k: usize,
    pub seed: u64,
    pub spec: ModelSpec,
    pub tolerance: ToleranceSpec,
    pub folds: Vec<FoldScore>,
    pub mean_accuracy: f64,
    /// Sample standard deviation over folds.
    pub std_accuracy: f64,
    pub mean_rmse: f64,
    pub std_rmse: f64,
}

pub(crate) fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

impl CvReport {
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("fold,n_test,accuracy,rmse\n");
        for f in &self.folds {
            out.push_str(&format!(
                "{},{},{},{}\n",
                f.fold + 1,
                f.n_test,
                f.accuracy,
                f.rmse
            ));
        }
        out
    }

    pub fn summary(&self) -> String {
        format!(
            "{}-fold cross-validation (seed {}), tolerance +/-{}%\nmean accuracy {:.6} (std {:.6})\nmean rmse {:.6} (std {:.6})\n",
            self.k,
            self.seed,
            self.tolerance.fraction * 100.0,
            self.mean_accuracy,
            self.std_accuracy,
            self.mean_rmse,
            self.std_rmse
        )
    }
}

/// Train on each fold's complement and score on the fold.
pub fn cross_validate(
    ds: &Dataset,
    spec: &ModelSpec,
    k: usize,
    seed: u64,
    tolerance: &ToleranceSpec,
) -> Result<CvReport> {
    tolerance.validate()?;
    let plan = kfold(ds, k, seed)?;
    let folds = (0..k)
        .into_par_iter()
        .map(|f| -> Result<FoldScore> {
            let train = ds.subset(&plan.complement_indices(f))?;
            let test = ds.subset(&plan.fold_indices(f))?;
            let model = spec.fit(&train)?;
            let preds = predict_all(&model, &test)?;
            Ok(FoldScore {
                fold: f,
                n_test: test.len(),
                accuracy: tolerance_accuracy(&preds, test.targets(), tolerance)?,
                rmse: rmse(&preds, test.targets())?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let acc: Vec<f64> = folds.iter().map(|f| f.accuracy).collect();
    let err: Vec<f64> = folds.iter().map(|f| f.rmse).collect();
    let (mean_accuracy, std_accuracy) = mean_std(&acc);
    let (mean_rmse, std_rmse) = mean_std(&err);
    Ok(CvReport {
        k,
        seed,
        spec: spec.clone(),
        tolerance: *tolerance,
        folds,
        mean_accuracy,
        std_accuracy,
        mean_rmse,
        std_rmse,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub value: f64,
    pub mean_accuracy: f64,
    pub std_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub axis: String,
    pub points: Vec<SweepPoint>,
    pub best_value: f64,
}

impl SweepReport {
    fn from_points(axis: &str, points: Vec<SweepPoint>) -> Self {
        let best_value = points
            .iter()
            .fold(None::<&SweepPoint>, |best, p| match best {
                Some(b)
                    if b.mean_accuracy > p.mean_accuracy
                        || (b.mean_accuracy == p.mean_accuracy && b.value <= p.value) =>
                {
                    Some(b)
                }
                _ => Some(p),
            })
            .expect("at least one sweep point")
            .value;
        SweepReport {
            axis: axis.to_string(),
            points,
            best_value,
        }
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = format!("{},mean_accuracy,std_accuracy\n", self.axis);
        for p in &self.points {
            out.push_str(&format!(
                "{},{},{}\n",
                p.value, p.mean_accuracy, p.std_accuracy
            ));
        }
        out
    }
}

/// Cross-validated accuracy for each hidden-layer size. Ties in the
/// argmax go to the smaller node count.
pub fn sweep_hidden_nodes(
    ds: &Dataset,
    base: &MlfnConfig,
    node_values: &[usize],
    k: usize,
    seed: u64,
    tolerance: &ToleranceSpec,
) -> Result<SweepReport> {
    if node_values.is_empty() {
        return Err(Error::InvalidArgument(
            "no hidden-node values to sweep".into(),
        ));
    }
    if node_values.contains(&0) {
        return Err(Error::InvalidArgument(
            "hidden-node values must be at least 1".into(),
        ));
    }
    let mut points = Vec::with_capacity(node_values.len());
    for &n in node_values {
        let cfg = MlfnConfig {
            n_hidden: n,
            ..base.clone()
        };
        let cv = cross_validate(ds, &ModelSpec::Mlfn(cfg), k, seed, tolerance)?;
        points.push(SweepPoint {
            value: n as f64,
            mean_accuracy: cv.mean_accuracy,
            std_accuracy: cv.std_accuracy,
        });
    }
    Ok(SweepReport::from_points("hidden_nodes", points))
}

/// One evaluated coordinate during [`coordinate_search`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoordinateStep {
    pub axis: usize,
    pub value: f64,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoordinateResult {
    pub best: Vec<f64>,
    pub best_score: f64,
    pub trace: Vec<CoordinateStep>,
}

/// Single ordered pass of one-at-a-time search. For each `(coordinate,
/// values)` axis, every value is scored with the other coordinates held at
/// their current values and the best is fixed before the next axis. Ties go
/// to the value closest to the starting coordinate, then to the smaller one.
pub fn coordinate_search<F>(
    start: &[f64],
    axes: &[(usize, Vec<f64>)],
    mut score: F,
) -> Result<CoordinateResult>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    if axes.is_empty() {
        return Err(Error::InvalidArgument("no search axes".into()));
    }
    let mut current = start.to_vec();
    let mut trace = Vec::new();
    let mut best_score = f64::NEG_INFINITY;
    for (axis, values) in axes {
        let axis = *axis;
        if axis >= current.len() {
            return Err(Error::InvalidArgument(format!("axis {axis} out of range")));
        }
        if values.is_empty() {
            return Err(Error::InvalidArgument(format!("axis {axis} has no values")));
        }
        let origin = start[axis];
        let mut chosen: Option<(f64, f64)> = None;
        for &v in values {
            let mut point = current.clone();
            point[axis] = v;
            let s = score(&point)?;
            trace.push(CoordinateStep {
                axis,
                value: v,
                score: s,
            });
            let better = match chosen {
                None => true,
                Some((bv, bs)) => {
                    let (d, bd) = ((v - origin).abs(), (bv - origin).abs());
                    s > bs || (s == bs && (d < bd || (d == bd && v < bv)))
                }
            };
            if better {
                chosen = Some((v, s));
            }
        }
        let (v, s) = chosen.expect("values non-empty");
        current[axis] = v;
        best_score = s;
    }
    Ok(CoordinateResult {
        best: current,
        best_score,
        trace,
    })
}

/// Tunable MLFN hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HyperAxis {
    LearningRate,
    HiddenNodes,
    Epochs,
    Momentum,
}

impl HyperAxis {
    /// The four axes in the default search order.
    pub const ALL: [HyperAxis; 4] = [
        HyperAxis::LearningRate,
        HyperAxis::HiddenNodes,
        HyperAxis::Epochs,
        HyperAxis::Momentum,
    ];

    pub fn name(self) -> &'static str {
        match self {
            HyperAxis::LearningRate => "learning_rate",
            HyperAxis::HiddenNodes => "hidden_nodes",
            HyperAxis::Epochs => "epochs",
            HyperAxis::Momentum => "momentum",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        HyperAxis::ALL.into_iter().find(|a| a.name() == name)
    }

    pub fn default_values(self) -> Vec<f64> {
        match self {
            HyperAxis::LearningRate => vec![0.1, 0.3, 0.5, 0.7, 0.9],
            HyperAxis::HiddenNodes => (3..=10).map(f64::from).collect(),
            HyperAxis::Epochs => vec![50.0, 100.0, 200.0],
            HyperAxis::Momentum => vec![0.0, 0.3, 0.6, 0.9],
        }
    }

    fn get(self, cfg: &MlfnConfig) -> f64 {
        match self {
            HyperAxis::LearningRate => cfg.learning_rate,
            HyperAxis::HiddenNodes => cfg.n_hidden as f64,
            HyperAxis::Epochs => cfg.epochs as f64,
            HyperAxis::Momentum => cfg.momentum,
        }
    }

    fn set(self, cfg: &mut MlfnConfig, v: f64) -> Result<()> {
        let count = |v: f64| {
            if v >= 0.0 && v.fract() == 0.0 && v <= u32::MAX as f64 {
                Ok(v as usize)
            } else {
                Err(Error::InvalidArgument(format!(
                    "{} values must be non-negative integers, got {v}",
                    self.name()
                )))
            }
        };
        match self {
            HyperAxis::LearningRate => cfg.learning_rate = v,
            HyperAxis::HiddenNodes => cfg.n_hidden = count(v)?,
            HyperAxis::Epochs => cfg.epochs = count(v)?,
            HyperAxis::Momentum => cfg.momentum = v,
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchStep {
    pub axis: HyperAxis,
    pub value: f64,
    pub mean_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchOutcome {
    pub best: MlfnConfig,
    pub best_score: f64,
    pub start_score: f64,
    pub k: usize,
    pub seed: u64,
    pub tolerance: ToleranceSpec,
    pub trace: Vec<SearchStep>,
}

impl SearchOutcome {
    pub fn trace_csv_string(&self) -> String {
        let mut out = String::from("axis,value,mean_accuracy\n");
        for s in &self.trace {
            out.push_str(&format!(
                "{},{},{}\n",
                s.axis.name(),
                s.value,
                s.mean_accuracy
            ));
        }
        out
    }
}

/// Control-variable hyperparameter search scored by mean k-fold accuracy.
pub fn control_variable_search(
    ds: &Dataset,
    axes: &[(HyperAxis, Vec<f64>)],
    start: &MlfnConfig,
    k: usize,
    seed: u64,
    tolerance: &ToleranceSpec,
) -> Result<SearchOutcome> {
    start.validate()?;
    let cv_score = |cfg: &MlfnConfig| -> Result<f64> {
        Ok(cross_validate(ds, &ModelSpec::Mlfn(cfg.clone()), k, seed, tolerance)?.mean_accuracy)
    };
    let coords: Vec<f64> = HyperAxis::ALL.iter().map(|a| a.get(start)).collect();
    let index = |a: HyperAxis| {
        HyperAxis::ALL
            .iter()
            .position(|&b| b == a)
            .expect("known axis")
    };
    let to_config = |point: &[f64]| -> Result<MlfnConfig> {
        let mut cfg = start.clone();
        for (a, &v) in HyperAxis::ALL.iter().zip(point) {
            a.set(&mut cfg, v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    };
    let numeric_axes: Vec<(usize, Vec<f64>)> =
        axes.iter().map(|(a, vs)| (index(*a), vs.clone())).collect();
    let result = coordinate_search(&coords, &numeric_axes, |p| cv_score(&to_config(p)?))?;
    Ok(SearchOutcome {
        best: to_config(&result.best)?,
        best_score: result.best_score,
        start_score: cv_score(start)?,
        k,
        seed,
        tolerance: *tolerance,
        trace: result
            .trace
            .iter()
            .map(|s| SearchStep {
                axis: HyperAxis::ALL[s.axis],
                value: s.value,
                mean_accuracy: s.score,
            })
            .collect(),
    })
}
