//! Multilayer feed-forward network: one sigmoid hidden layer, one sigmoid
//! output, trained online by backpropagation with momentum.
//!
//! Inputs and targets are min-max normalized (see [`crate::dataset`]) before
//! they reach the network; [`MlfnModel::predict`] takes and returns values in
//! raw units.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::{fit_normalizer, Dataset, NormStats, OutputRange};
use crate::error::{Error, Result};
use crate::seeded_rng;

pub const DEFAULT_LEARNING_RATE: f64 = 0.9;
pub const DEFAULT_HIDDEN: usize = 7;
pub const DEFAULT_EPOCHS: usize = 200;
pub const DEFAULT_MOMENTUM: f64 = 0.9;
pub const DEFAULT_INIT_HALF_WIDTH: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlfnConfig {
    pub n_inputs: usize,
    pub n_hidden: usize,
    pub learning_rate: f64,
    pub momentum: f64,
    pub epochs: usize,
    pub seed: u64,
    pub init_half_width: f64,
}

impl MlfnConfig {
    /// Default hyperparameters (lr 0.9, 7 hidden nodes, 200 epochs,
    /// momentum 0.9) for `n_inputs` features.
    pub fn new(n_inputs: usize) -> Self {
        MlfnConfig {
            n_inputs,
            n_hidden: DEFAULT_HIDDEN,
            learning_rate: DEFAULT_LEARNING_RATE,
            momentum: DEFAULT_MOMENTUM,
            epochs: DEFAULT_EPOCHS,
            seed: 0,
            init_half_width: DEFAULT_INIT_HALF_WIDTH,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if self.n_inputs == 0 {
            return bad("n_inputs must be positive");
        }
        if self.n_hidden == 0 {
            return bad("n_hidden must be positive");
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return bad("learning_rate must be a finite positive number");
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return bad("momentum must lie in [0, 1)");
        }
        // Zero is allowed: it yields an all-zero network.
        if !(self.init_half_width.is_finite() && self.init_half_width >= 0.0) {
            return bad("init_half_width must be finite and non-negative");
        }
        Ok(())
    }
}

/// Logistic function, kept strictly inside (0, 1) in floating point.
pub fn sigmoid(t: f64) -> f64 {
    let s = 1.0 / (1.0 + (-t).exp());
    s.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0)
}

/// Parameters of an `n_inputs -> n_hidden -> 1` network, stored flat as
/// `[hidden weights (row-major, n_hidden x n_inputs) | hidden biases |
/// output weights | output bias]`.
///
/// Gradients share this layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Network {
    n_inputs: usize,
    n_hidden: usize,
    params: Vec<f64>,
}

impl Network {
    pub fn zeros(n_inputs: usize, n_hidden: usize) -> Self {
        Network {
            n_inputs,
            n_hidden,
            params: vec![0.0; Self::param_count(n_inputs, n_hidden)],
        }
    }

    pub fn param_count(n_inputs: usize, n_hidden: usize) -> usize {
        n_hidden * n_inputs + 2 * n_hidden + 1
    }

    /// Rebuild from a flat parameter vector in the documented layout.
    pub fn from_params(n_inputs: usize, n_hidden: usize, params: Vec<f64>) -> Result<Self> {
        if n_inputs == 0 || n_hidden == 0 {
            return Err(Error::InvalidConfig(
                "network dimensions must be positive".into(),
            ));
        }
        let expected = n_hidden
            .checked_mul(n_inputs)
            .and_then(|w| w.checked_add(2 * n_hidden + 1))
            .ok_or_else(|| Error::InvalidConfig("network dimensions overflow".into()))?;
        if params.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                found: params.len(),
            });
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidConfig(
                "network parameters must be finite".into(),
            ));
        }
        Ok(Network {
            n_inputs,
            n_hidden,
            params,
        })
    }

    pub fn n_inputs(&self) -> usize {
        self.n_inputs
    }

    pub fn n_hidden(&self) -> usize {
        self.n_hidden
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    fn split(&self) -> (&[f64], &[f64], &[f64], f64) {
        let w = self.n_hidden * self.n_inputs;
        let (hw, rest) = self.params.split_at(w);
        let (hb, rest) = rest.split_at(self.n_hidden);
        let (ow, ob) = rest.split_at(self.n_hidden);
        (hw, hb, ow, ob[0])
    }

    /// Row `j` of the hidden weight matrix.
    pub fn hidden_weights(&self, j: usize) -> &[f64] {
        &self.split().0[j * self.n_inputs..(j + 1) * self.n_inputs]
    }

    pub fn hidden_biases(&self) -> &[f64] {
        self.split().1
    }

    pub fn output_weights(&self) -> &[f64] {
        self.split().2
    }

    pub fn output_bias(&self) -> f64 {
        self.split().3
    }

    pub fn set_output_bias(&mut self, value: f64) {
        *self.params.last_mut().expect("non-empty") = value;
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.n_inputs {
            return Err(Error::DimensionMismatch {
                expected: self.n_inputs,
                found: x.len(),
            });
        }
        Ok(())
    }

    /// Network output for a normalized input vector; strictly in (0, 1).
    pub fn forward(&self, x: &[f64]) -> Result<f64> {
        self.check_input(x)?;
        let (hw, hb, ow, ob) = self.split();
        let net = hw
            .chunks_exact(self.n_inputs)
            .zip(hb)
            .zip(ow)
            .fold(ob, |acc, ((row, b), v)| acc + v * sigmoid(b + dot(row, x)));
        Ok(sigmoid(net))
    }

    /// Gradient of `0.5 * (y - target)^2` with respect to every parameter.
    pub fn gradient(&self, x: &[f64], target: f64) -> Result<Network> {
        let mut grad = Network::zeros(self.n_inputs, self.n_hidden);
        let mut hidden = vec![0.0; self.n_hidden];
        self.gradient_into(x, target, &mut grad, &mut hidden)?;
        Ok(grad)
    }

    /// As [`Network::gradient`], writing into caller-owned buffers. Returns
    /// the network output.
    pub fn gradient_into(
        &self,
        x: &[f64],
        target: f64,
        grad: &mut Network,
        hidden: &mut [f64],
    ) -> Result<f64> {
        self.check_input(x)?;
        let (hw, hb, ow, ob) = self.split();
        let mut net = ob;
        for (j, h) in hidden.iter_mut().enumerate() {
            *h = sigmoid(hb[j] + dot(&hw[j * self.n_inputs..(j + 1) * self.n_inputs], x));
            net += ow[j] * *h;
        }
        let y = sigmoid(net);
        let delta_out = (y - target) * y * (1.0 - y);

        let n_w = self.n_hidden * self.n_inputs;
        let g = &mut grad.params;
        for j in 0..self.n_hidden {
            let h = hidden[j];
            let delta_h = delta_out * ow[j] * h * (1.0 - h);
            for (gw, xi) in g[j * self.n_inputs..(j + 1) * self.n_inputs]
                .iter_mut()
                .zip(x)
            {
                *gw = delta_h * xi;
            }
            g[n_w + j] = delta_h;
            g[n_w + self.n_hidden + j] = delta_out * h;
        }
        g[n_w + 2 * self.n_hidden] = delta_out;
        Ok(y)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(a, b)| a * b).sum()
}

/// One momentum update: `v <- momentum * v - lr * grad; p <- p + v`.
pub fn momentum_step(
    params: &mut [f64],
    velocity: &mut [f64],
    grad: &[f64],
    lr: f64,
    momentum: f64,
) {
    for ((p, v), g) in params.iter_mut().zip(velocity.iter_mut()).zip(grad) {
        *v = -lr * g + momentum * *v;
        *p += *v;
    }
}

fn init_with(config: &MlfnConfig, rng: &mut ChaCha8Rng) -> Network {
    let mut net = Network::zeros(config.n_inputs, config.n_hidden);
    let w = config.init_half_width;
    for p in &mut net.params {
        let u: f64 = rng.random();
        *p = (2.0 * u - 1.0) * w;
    }
    net
}

/// Seeded uniform initialization in `[-init_half_width, init_half_width]`.
pub fn init(config: &MlfnConfig) -> Result<Network> {
    config.validate()?;
    Ok(init_with(config, &mut seeded_rng(config.seed)))
}

/// Mean squared error per epoch, in normalized target space.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainingTrace {
    pub epoch_mse: Vec<f64>,
}

impl TrainingTrace {
    pub fn final_mse(&self) -> Option<f64> {
        self.epoch_mse.last().copied()
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("epoch,mse\n");
        for (i, m) in self.epoch_mse.iter().enumerate() {
            out.push_str(&format!("{},{}\n", i + 1, m));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlfnModel {
    pub network: Network,
    pub config: MlfnConfig,
    pub norm: NormStats,
    pub feature_names: Vec<String>,
    pub target_name: String,
}

impl MlfnModel {
    /// Predict in raw target units.
    pub fn predict(&self, raw: &[f64]) -> Result<f64> {
        self.norm.check_guard_band(raw, &self.feature_names)?;
        let mut x = vec![0.0; raw.len()];
        self.norm.normalize_features_into(raw, &mut x)?;
        let y = self.network.forward(&x)?;
        Ok(self.norm.denormalize_target(y))
    }

    pub(crate) fn validate(&self) -> Result<()> {
        self.config.validate()?;
        self.norm.validate()?;
        if self.network.n_inputs != self.config.n_inputs
            || self.network.n_hidden != self.config.n_hidden
            || self.norm.n_features() != self.config.n_inputs
            || self.feature_names.len() != self.config.n_inputs
        {
            return Err(Error::InvalidConfig("model shapes are inconsistent".into()));
        }
        Network::from_params(
            self.network.n_inputs,
            self.network.n_hidden,
            self.network.params.clone(),
        )?;
        self.norm.require_non_degenerate(&self.feature_names)
    }
}

fn normalized_data(ds: &Dataset, norm: &NormStats) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut xs = vec![0.0; ds.len() * ds.n_features()];
    for (chunk, (row, _)) in xs.chunks_exact_mut(ds.n_features()).zip(ds.rows()) {
        norm.normalize_features_into(row, chunk)?;
    }
    let ts = ds
        .targets()
        .iter()
        .map(|&t| norm.normalize_target(t))
        .collect();
    Ok((xs, ts))
}

/// Train on `ds` with online backpropagation and momentum. Sample order is
/// reshuffled every epoch; the result depends only on `(ds, config)`.
pub fn train(ds: &Dataset, config: &MlfnConfig) -> Result<(MlfnModel, TrainingTrace)> {
    config.validate()?;
    if ds.n_features() != config.n_inputs {
        return Err(Error::DimensionMismatch {
            expected: config.n_inputs,
            found: ds.n_features(),
        });
    }
    let norm = fit_normalizer(ds, OutputRange::default())?;
    norm.require_non_degenerate(ds.feature_names())?;
    let (xs, ts) = normalized_data(ds, &norm)?;
    let n_in = config.n_inputs;

    let mut rng = seeded_rng(config.seed);
    let mut net = init_with(config, &mut rng);
    let mut velocity = vec![0.0; net.params.len()];
    let mut grad = Network::zeros(n_in, config.n_hidden);
    let mut hidden = vec![0.0; config.n_hidden];
    let mut order: Vec<usize> = (0..ds.len()).collect();
    let mut trace = TrainingTrace {
        epoch_mse: Vec::with_capacity(config.epochs),
    };

    for epoch in 1..=config.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            let x = &xs[i * n_in..(i + 1) * n_in];
            net.gradient_into(x, ts[i], &mut grad, &mut hidden)?;
            momentum_step(
                &mut net.params,
                &mut velocity,
                &grad.params,
                config.learning_rate,
                config.momentum,
            );
            if net.params.iter().any(|p| !p.is_finite()) {
                return Err(Error::NumericFailure { epoch, sample: i });
            }
        }
        let mut sse = 0.0;
        for (x, &t) in xs.chunks_exact(n_in).zip(&ts) {
            let y = net.forward(x)?;
            sse += (y - t) * (y - t);
        }
        let mse = sse / ds.len() as f64;
        if !mse.is_finite() {
            return Err(Error::NumericFailure {
                epoch,
                sample: ds.len(),
            });
        }
        trace.epoch_mse.push(mse);
    }

    let model = MlfnModel {
        network: net,
        config: config.clone(),
        norm,
        feature_names: ds.feature_names().to_vec(),
        target_name: ds.target_name().to_string(),
    };
    Ok((model, trace))
}
