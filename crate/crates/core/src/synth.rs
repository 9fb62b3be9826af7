//! Synthetic datasets with known ground truth for both built-in schemas.
//!
//! The ground-truth functions are smooth, physically flavoured stand-ins;
//! they exist so that training, screening and verification can be checked
//! against an exact oracle.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::dataset::{Dataset, Schema};
use crate::error::{Error, Result};
use crate::hts::{DesignSpace, DesignVariable};
use crate::seeded_rng;

/// Sampling interval of each feature, in schema column order.
pub fn feature_bounds(schema: Schema) -> &'static [(f64, f64)] {
    match schema {
        // tube length (m), tube count, centre distance (m), tank volume (L),
        // collector area (m^2), tube-ground angle (deg)
        Schema::Collector => &[
            (1.5, 2.1),
            (10.0, 30.0),
            (0.06, 0.10),
            (100.0, 300.0),
            (1.5, 4.0),
            (30.0, 60.0),
        ],
        // PM2.5 in/out, PM10 in/out (ug/m^3), temperature (C), RH (%), CO2 (ppm)
        Schema::Iaq => &[
            (10.0, 150.0),
            (10.0, 250.0),
            (20.0, 200.0),
            (20.0, 350.0),
            (15.0, 32.0),
            (30.0, 90.0),
            (400.0, 2000.0),
        ],
    }
}

const TUBE_DIAMETER: f64 = 0.047;

/// Heat collection rate (W) of an evacuated-tube collector design.
pub fn collector_hcr(x: &[f64]) -> f64 {
    let (length, tubes, distance, tank, area, angle) = (x[0], x[1], x[2], x[3], x[4], x[5]);
    let absorber = tubes * length * TUBE_DIAMETER;
    let spacing = distance / TUBE_DIAMETER;
    let shading = 1.0 - (-2.0 * (spacing - 1.0)).exp();
    let tilt = (1.2 * (angle - 45.0).to_radians()).cos();
    let storage = 1.0 - 0.3 * (-(tank - 100.0) / 80.0).exp();
    let reflector = 0.7 + 0.3 * (area / 4.0).sqrt();
    600.0 * absorber * shading * tilt * storage * reflector
}

/// Indoor culturable fungi concentration (CFU/m^3).
pub fn iaq_fungi(x: &[f64]) -> f64 {
    let (pm25_in, pm25_out, pm10_in, pm10_out, temp, rh, co2) =
        (x[0], x[1], x[2], x[3], x[4], x[5], x[6]);
    let particulate = 2.0 * pm25_in.powf(0.8) + 0.25 * pm10_in + 0.3 * pm10_out + 0.1 * pm25_out;
    let climate = 8.0 * ((rh - 60.0) / 20.0).exp() * (temp - 10.0);
    let occupancy = 40.0 * ((co2 - 400.0) / 800.0).tanh();
    50.0 + particulate + climate + occupancy
}

pub fn truth(schema: Schema, x: &[f64]) -> f64 {
    match schema {
        Schema::Collector => collector_hcr(x),
        Schema::Iaq => iaq_fungi(x),
    }
}

/// Sample `rows` uniform designs and label each with the ground truth
/// times `1 + noise * N(0, 1)`. The collector tube count is integral.
pub fn generate(schema: Schema, rows: usize, noise: f64, seed: u64) -> Result<Dataset> {
    if rows == 0 {
        return Err(Error::InvalidArgument("row count must be positive".into()));
    }
    if !(noise.is_finite() && noise >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "noise must be non-negative, got {noise}"
        )));
    }
    let bounds = feature_bounds(schema);
    let mut rng = seeded_rng(seed);
    let mut features = Vec::with_capacity(rows);
    let mut targets = Vec::with_capacity(rows);
    for _ in 0..rows {
        let mut x: Vec<f64> = bounds
            .iter()
            .map(|&(lo, hi)| lo + (hi - lo) * rng.random::<f64>())
            .collect();
        if schema == Schema::Collector {
            x[1] = x[1].round();
        }
        let eps: f64 = rng.sample(StandardNormal);
        targets.push(truth(schema, &x) * (1.0 + noise * eps));
        features.push(x);
    }
    let names = schema
        .feature_names()
        .iter()
        .map(|s| s.to_string())
        .collect();
    Dataset::new(names, schema.target_name(), features, targets)
}

/// Evenly spaced grid over the sampling bounds, `levels[i]` values for
/// feature `i`. A single level sits at the midpoint.
pub fn schema_space(schema: Schema, levels: &[usize]) -> Result<DesignSpace> {
    let bounds = feature_bounds(schema);
    if levels.len() != bounds.len() {
        return Err(Error::DimensionMismatch {
            expected: bounds.len(),
            found: levels.len(),
        });
    }
    let vars = schema
        .feature_names()
        .iter()
        .zip(bounds)
        .zip(levels)
        .map(|((name, &(lo, hi)), &n)| {
            let values = match n {
                0 => vec![],
                1 => vec![0.5 * (lo + hi)],
                _ => (0..n)
                    .map(|i| {
                        if i + 1 == n {
                            hi
                        } else {
                            lo + (hi - lo) * i as f64 / (n - 1) as f64
                        }
                    })
                    .collect(),
            };
            DesignVariable {
                name: name.to_string(),
                values,
            }
        })
        .collect();
    DesignSpace::new(vars)
}
