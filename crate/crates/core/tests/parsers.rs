//! Decoders must reject garbage with an error, never a panic.

use proptest::prelude::*;
use surroscreen::hts::ScreenConfig;
use surroscreen::mlfn::{self, MlfnConfig};
use surroscreen::{grnn, parse_csv, synth, CsvOptions, Schema, Surrogate};

const CSV: &str = "tube_length,tube_number,y\n1.5,10,100\n1.8,20,250.5\n\n2.1, 30 ,-3e2\n";

const SCREEN: &str = r#"
model = "m.json"
direction = "min"
top = 3

[[variables]]
name = "a"
min = 0
step = 0.25
max = 1

[[variables]]
name = "b"
values = [1, 2, 3]
"#;

fn model_json() -> String {
    let ds = synth::generate(Schema::Collector, 12, 0.0, 1).unwrap();
    let cfg = MlfnConfig {
        n_hidden: 2,
        epochs: 2,
        ..MlfnConfig::new(6)
    };
    Surrogate::Mlfn(mlfn::train(&ds, &cfg).unwrap().0).to_json()
}

fn grnn_json() -> String {
    let ds = synth::generate(Schema::Iaq, 5, 0.0, 1).unwrap();
    Surrogate::Grnn(grnn::fit(&ds, 0.3).unwrap()).to_json()
}

/// Overwrite a few bytes of `base`, keeping the result valid UTF-8.
fn mutate(base: &str, edits: &[(usize, u8)]) -> String {
    let mut bytes = base.as_bytes().to_vec();
    for &(pos, b) in edits {
        let i = pos % bytes.len();
        bytes[i] = b;
    }
    String::from_utf8_lossy(&bytes).into_owned()
}

fn edits() -> impl Strategy<Value = Vec<(usize, u8)>> {
    proptest::collection::vec(
        (
            any::<usize>(),
            prop::sample::select(b"0123456789.,-+eE[]{}\"=:\n naxy".to_vec()),
        ),
        1..6,
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn csv_never_panics(text in "\\PC{0,200}", e in edits()) {
        let _ = parse_csv(&text, &CsvOptions::default());
        if let Ok(ds) = parse_csv(&mutate(CSV, &e), &CsvOptions::default()) {
            prop_assert_eq!(parse_csv(&ds.to_csv_string(), &CsvOptions::default()).unwrap(), ds);
        }
    }

    #[test]
    fn screen_config_never_panics(text in "\\PC{0,200}", e in edits()) {
        let _ = ScreenConfig::from_toml(&text);
        if let Ok(cfg) = ScreenConfig::from_toml(&mutate(SCREEN, &e)) {
            if let Ok(space) = cfg.space() {
                prop_assert!(space.candidate(space.candidate_count() - 1).is_ok());
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn model_file_never_panics(e in edits(), grnn in any::<bool>()) {
        let base = if grnn { grnn_json() } else { model_json() };
        if let Ok(m) = Surrogate::from_json(&mutate(&base, &e)) {
            prop_assert_eq!(Surrogate::from_json(&m.to_json()).unwrap(), m);
        }
    }
}
