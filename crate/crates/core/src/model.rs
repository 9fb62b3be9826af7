//! Trained surrogates behind one interface, and the versioned model file.
//!
//! A model file is a JSON document:
//!
//! ```text
//! {
//!   "format": "surroscreen-model",
//!   "version": 1,
//!   "kind": "mlfn" | "grnn",
//!   "model": { ... }
//! }
//! ```
//!
//! Floats are written in the shortest form that parses back to the same
//! bits, so a loaded model predicts exactly what the saved one did.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grnn::GrnnModel;
use crate::mlfn::MlfnModel;

pub const MODEL_FORMAT: &str = "surroscreen-model";
pub const MODEL_VERSION: u32 = 1;

/// Anything that maps a raw feature vector to a raw target value.
pub trait Predictor: Sync {
    fn feature_names(&self) -> &[String];

    fn predict(&self, raw: &[f64]) -> Result<f64>;

    /// Short human-readable description of the model and its settings.
    fn describe(&self) -> String;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "model", rename_all = "snake_case")]
pub enum Surrogate {
    Mlfn(MlfnModel),
    Grnn(GrnnModel),
}

impl Surrogate {
    pub fn kind(&self) -> &'static str {
        match self {
            Surrogate::Mlfn(_) => "mlfn",
            Surrogate::Grnn(_) => "grnn",
        }
    }

    pub fn target_name(&self) -> &str {
        match self {
            Surrogate::Mlfn(m) => &m.target_name,
            Surrogate::Grnn(m) => &m.target_name,
        }
    }

    pub fn to_json(&self) -> String {
        let file = ModelFileRef {
            format: MODEL_FORMAT,
            version: MODEL_VERSION,
            surrogate: self,
        };
        let mut s = serde_json::to_string_pretty(&file).expect("model serializes");
        s.push('\n');
        s
    }

    /// Parse and validate a model file.
    pub fn from_json(text: &str) -> Result<Self> {
        let file: ModelFile =
            serde_json::from_str(text).map_err(|e| Error::ModelFormat(e.to_string()))?;
        if file.format != MODEL_FORMAT {
            return Err(Error::ModelFormat(format!(
                "unknown format `{}`",
                file.format
            )));
        }
        if file.version != MODEL_VERSION {
            return Err(Error::ModelFormat(format!(
                "unsupported version {} (expected {MODEL_VERSION})",
                file.version
            )));
        }
        let validated = match &file.surrogate {
            Surrogate::Mlfn(m) => m.validate(),
            Surrogate::Grnn(m) => m.validate(),
        };
        validated.map_err(|e| Error::ModelFormat(e.to_string()))?;
        Ok(file.surrogate)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

#[derive(Serialize)]
struct ModelFileRef<'a> {
    format: &'a str,
    version: u32,
    #[serde(flatten)]
    surrogate: &'a Surrogate,
}

#[derive(Deserialize)]
struct ModelFile {
    format: String,
    version: u32,
    #[serde(flatten)]
    surrogate: Surrogate,
}

impl Predictor for MlfnModel {
    fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    fn predict(&self, raw: &[f64]) -> Result<f64> {
        MlfnModel::predict(self, raw)
    }

    fn describe(&self) -> String {
        let c = &self.config;
        format!(
            "mlfn inputs={} hidden={} lr={} momentum={} epochs={} seed={} init_half_width={}",
            c.n_inputs,
            c.n_hidden,
            c.learning_rate,
            c.momentum,
            c.epochs,
            c.seed,
            c.init_half_width
        )
    }
}

impl Predictor for GrnnModel {
    fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    fn predict(&self, raw: &[f64]) -> Result<f64> {
        GrnnModel::predict(self, raw)
    }

    fn describe(&self) -> String {
        format!(
            "grnn inputs={} exemplars={} sigma={}",
            self.n_features(),
            self.n_exemplars(),
            self.sigma
        )
    }
}

impl Predictor for Surrogate {
    fn feature_names(&self) -> &[String] {
        match self {
            Surrogate::Mlfn(m) => &m.feature_names,
            Surrogate::Grnn(m) => &m.feature_names,
        }
    }

    fn predict(&self, raw: &[f64]) -> Result<f64> {
        match self {
            Surrogate::Mlfn(m) => m.predict(raw),
            Surrogate::Grnn(m) => m.predict(raw),
        }
    }

    fn describe(&self) -> String {
        match self {
            Surrogate::Mlfn(m) => m.describe(),
            Surrogate::Grnn(m) => m.describe(),
        }
    }
}

/// A closure with named inputs, for tests and analytic surrogates.
pub struct FnPredictor<F> {
    names: Vec<String>,
    f: F,
    label: String,
}

impl<F> FnPredictor<F>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    pub fn new(names: Vec<String>, label: impl Into<String>, f: F) -> Self {
        FnPredictor {
            names,
            f,
            label: label.into(),
        }
    }
}

impl<F> Predictor for FnPredictor<F>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    fn feature_names(&self) -> &[String] {
        &self.names
    }

    fn predict(&self, raw: &[f64]) -> Result<f64> {
        if raw.len() != self.names.len() {
            return Err(Error::DimensionMismatch {
                expected: self.names.len(),
                found: raw.len(),
            });
        }
        Ok((self.f)(raw))
    }

    fn describe(&self) -> String {
        self.label.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Dataset;
    use crate::mlfn::{train, MlfnConfig};

    fn data() -> Dataset {
        Dataset::new(
            vec!["a".into(), "b".into()],
            "y",
            (0..30)
                .map(|i| vec![i as f64 * 0.1, ((i * 13) % 11) as f64])
                .collect(),
            (0..30).map(|i| (i as f64 * 0.3).sin() + 2.0).collect(),
        )
        .unwrap()
    }

    #[test]
    fn mlfn_file_roundtrip_is_bit_exact() {
        let cfg = MlfnConfig {
            epochs: 30,
            ..MlfnConfig::new(2)
        };
        let (m, _) = train(&data(), &cfg).unwrap();
        let s = Surrogate::Mlfn(m);
        let json = s.to_json();
        assert!(json.contains("\"kind\": \"mlfn\""));
        assert!(json.contains("\"version\": 1"));
        let back = Surrogate::from_json(&json).unwrap();
        assert_eq!(back, s);
        for i in 0..20 {
            let x = [i as f64 * 0.13, (i % 9) as f64 + 0.5];
            assert_eq!(
                back.predict(&x).unwrap().to_bits(),
                s.predict(&x).unwrap().to_bits()
            );
        }
    }

    #[test]
    fn grnn_file_roundtrip() {
        let s = Surrogate::Grnn(crate::grnn::fit(&data(), 0.2).unwrap());
        let back = Surrogate::from_json(&s.to_json()).unwrap();
        assert_eq!(back, s);
        assert_eq!(back.kind(), "grnn");
    }

    #[test]
    fn rejects_bad_envelopes() {
        let s = Surrogate::Grnn(crate::grnn::fit(&data(), 0.2).unwrap()).to_json();
        for bad in [
            s.replace("surroscreen-model", "other"),
            s.replace("\"version\": 1", "\"version\": 2"),
            s.replace("\"kind\": \"grnn\"", "\"kind\": \"svm\""),
            s.replace("\"sigma\": 0.2", "\"sigma\": -0.2"),
            "{}".to_string(),
            "not json".to_string(),
        ] {
            assert!(
                matches!(Surrogate::from_json(&bad), Err(Error::ModelFormat(_))),
                "{bad}"
            );
        }
    }

    #[test]
    fn rejects_inconsistent_mlfn_shapes() {
        let cfg = MlfnConfig {
            epochs: 1,
            ..MlfnConfig::new(2)
        };
        let (m, _) = train(&data(), &cfg).unwrap();
        let json = Surrogate::Mlfn(m).to_json();
        let bad = json.replace("\"n_hidden\": 7", "\"n_hidden\": 6");
        assert_ne!(bad, json);
        assert!(Surrogate::from_json(&bad).is_err());
    }
}
