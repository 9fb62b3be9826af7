//! Train on synthetic collector data, screen a ~1e5 design grid, and check
//! the shortlist against the known ground truth.
//!
//!     cargo run --release --example oracle_screen -- [seed]

use surroscreen::hts::{self, ScreenOptions};
use surroscreen::mlfn::{self, MlfnConfig};
use surroscreen::{synth, Schema};

fn main() -> surroscreen::Result<()> {
    let seed: u64 = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(1);
    let data = synth::generate(Schema::Collector, 915, 0.02, seed)?;
    let config = MlfnConfig {
        seed,
        ..MlfnConfig::new(data.n_features())
    };
    let (model, trace) = mlfn::train(&data, &config)?;
    println!(
        "trained {} epochs, final normalized mse {:.6}",
        config.epochs,
        trace.final_mse().unwrap_or(f64::NAN)
    );

    let space = synth::schema_space(Schema::Collector, &[8, 8, 6, 6, 6, 8])?;
    let opts = ScreenOptions {
        workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
        ..ScreenOptions::default()
    };
    let report = hts::screen(&model, "hcr", &space, &opts)?;
    print!("{}", report.summary());

    let check = hts::verify_against_oracle(&space, synth::collector_hcr, &report);
    println!(
        "true ranks {:?} of {}; top-1 regret {:.2} W; {:.4}% of the grid is truly better",
        check.true_ranks,
        space.candidate_count(),
        check.regret,
        100.0 * check.better_fraction
    );
    Ok(())
}
