//! Neural-network surrogates for tabular engineering measurements and
//! exhaustive screening of discretized design spaces.
//!
//! The pipeline is: load a [`Dataset`], train a surrogate ([`mlfn`] for a
//! one-hidden-layer backpropagation network, [`grnn`] for a kernel
//! regression network), check it with [`eval`], then rank every design in a
//! [`hts::DesignSpace`] through the surrogate with [`hts::screen`].
//!
//! ```
//! use surroscreen::{hts, mlfn, synth, Schema};
//!
//! let data = synth::generate(Schema::Collector, 200, 0.02, 7).unwrap();
//! let config = mlfn::MlfnConfig { epochs: 20, ..mlfn::MlfnConfig::new(6) };
//! let (model, _trace) = mlfn::train(&data, &config).unwrap();
//!
//! let space = synth::schema_space(Schema::Collector, &[3, 3, 2, 2, 2, 3]).unwrap();
//! let report = hts::screen(&model, "hcr", &space, &hts::ScreenOptions::default()).unwrap();
//! assert_eq!(report.entries.len(), 2);
//! ```

pub mod dataset;
pub mod error;
pub mod eval;
pub mod grnn;
pub mod hts;
pub mod mlfn;
pub mod model;
pub mod synth;

pub use dataset::{load_csv, parse_csv, CsvOptions, Dataset, NormStats, Schema};
pub use error::{Error, Result};
pub use model::{Predictor, Surrogate};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The single source of randomness: a ChaCha8 stream keyed by `seed`.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Hex SHA-256 of `bytes`.
pub fn sha256_hex(bytes: &[u8]) -> String {
    use sha2::{Digest, Sha256};
    hex::encode(Sha256::digest(bytes))
}
