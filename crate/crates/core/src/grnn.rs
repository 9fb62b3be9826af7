//! General regression neural network: a Gaussian-kernel weighted average of
//! stored exemplar targets (Nadaraya-Watson), with distances measured in
//! normalized feature space.

use serde::{Deserialize, Serialize};

use crate::dataset::{fit_normalizer, Dataset, NormStats, OutputRange};
use crate::error::{Error, Result};
use crate::eval::{cross_validate, ModelSpec, ToleranceSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrnnModel {
    pub sigma: f64,
    /// Normalized exemplar features, row-major.
    pub exemplars: Vec<f64>,
    /// Normalized exemplar targets.
    pub targets: Vec<f64>,
    pub norm: NormStats,
    pub feature_names: Vec<String>,
    pub target_name: String,
}

fn check_sigma(sigma: f64) -> Result<()> {
    if sigma.is_finite() && sigma > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!(
            "sigma must be finite and positive, got {sigma}"
        )))
    }
}

/// Store every row of `ds` in normalized form. No iterative training.
pub fn fit(ds: &Dataset, sigma: f64) -> Result<GrnnModel> {
    check_sigma(sigma)?;
    let norm = fit_normalizer(ds, OutputRange::default())?;
    norm.require_non_degenerate(ds.feature_names())?;
    let mut exemplars = vec![0.0; ds.len() * ds.n_features()];
    for (chunk, (row, _)) in exemplars.chunks_exact_mut(ds.n_features()).zip(ds.rows()) {
        norm.normalize_features_into(row, chunk)?;
    }
    let targets = ds
        .targets()
        .iter()
        .map(|&t| norm.normalize_target(t))
        .collect();
    Ok(GrnnModel {
        sigma,
        exemplars,
        targets,
        norm,
        feature_names: ds.feature_names().to_vec(),
        target_name: ds.target_name().to_string(),
    })
}

impl GrnnModel {
    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn n_exemplars(&self) -> usize {
        self.targets.len()
    }

    /// Kernel-weighted target for a normalized query.
    ///
    /// Exponents are taken relative to the nearest exemplar, so that
    /// exemplar always has weight exactly 1: the weights cannot all
    /// underflow, and a lone exemplar returns its target unchanged.
    pub fn predict_normalized(&self, x: &[f64]) -> Result<f64> {
        let n = self.n_features();
        if x.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: x.len(),
            });
        }
        let d2: Vec<f64> = self
            .exemplars
            .chunks_exact(n)
            .map(|e| e.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum())
            .collect();
        let nearest = d2.iter().cloned().fold(f64::INFINITY, f64::min);
        if !nearest.is_finite() {
            return Err(Error::NonFinitePrediction(nearest));
        }
        let inv = 1.0 / (2.0 * self.sigma * self.sigma);
        let mut num = 0.0;
        let mut den = 0.0;
        for (&d, &t) in d2.iter().zip(&self.targets) {
            let w = (-(d - nearest) * inv).exp();
            num += w * t;
            den += w;
        }
        Ok(num / den)
    }

    /// Predict in raw target units. The result is clamped to the exemplar
    /// target range so rounding cannot push it outside the convex hull.
    pub fn predict(&self, raw: &[f64]) -> Result<f64> {
        self.norm.check_guard_band(raw, &self.feature_names)?;
        let x = self.norm.normalize_features(raw)?;
        let y = self.norm.denormalize_target(self.predict_normalized(&x)?);
        Ok(y.clamp(self.norm.target.min, self.norm.target.max))
    }

    pub(crate) fn validate(&self) -> Result<()> {
        check_sigma(self.sigma)?;
        self.norm.validate()?;
        let n = self.n_features();
        if n == 0 || self.norm.n_features() != n {
            return Err(Error::InvalidConfig("feature count is inconsistent".into()));
        }
        if self.targets.is_empty()
            || Some(self.exemplars.len()) != self.targets.len().checked_mul(n)
        {
            return Err(Error::InvalidConfig(
                "exemplar storage is inconsistent".into(),
            ));
        }
        if self
            .exemplars
            .iter()
            .chain(&self.targets)
            .any(|v| !v.is_finite())
        {
            return Err(Error::InvalidConfig("exemplars must be finite".into()));
        }
        self.norm.require_non_degenerate(&self.feature_names)
    }
}

/// Cross-validated score of every candidate sigma.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SigmaSelection {
    pub best: f64,
    pub scores: Vec<(f64, f64)>,
}

/// Pick the grid sigma with the highest mean k-fold tolerance accuracy;
/// ties go to the smaller sigma.
pub fn select_sigma(
    ds: &Dataset,
    grid: &[f64],
    k: usize,
    seed: u64,
    tolerance: &ToleranceSpec,
) -> Result<SigmaSelection> {
    if grid.is_empty() {
        return Err(Error::InvalidArgument("sigma grid is empty".into()));
    }
    for &s in grid {
        check_sigma(s)?;
    }
    let mut scores = Vec::with_capacity(grid.len());
    for &sigma in grid {
        let report = cross_validate(ds, &ModelSpec::Grnn { sigma }, k, seed, tolerance)?;
        scores.push((sigma, report.mean_accuracy));
    }
    let best = scores
        .iter()
        .copied()
        .reduce(|a, b| {
            if b.1 > a.1 || (b.1 == a.1 && b.0 < a.0) {
                b
            } else {
                a
            }
        })
        .expect("grid is non-empty")
        .0;
    Ok(SigmaSelection { best, scores })
}
