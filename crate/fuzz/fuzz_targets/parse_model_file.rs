#![no_main]

use libfuzzer_sys::fuzz_target;
use surroscreen::{Predictor, Surrogate};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(model) = Surrogate::from_json(text) {
        let again = Surrogate::from_json(&model.to_json()).expect("reload");
        assert_eq!(again, model);
        // A validated model must predict without panicking.
        let x = vec![0.5; model.feature_names().len()];
        let _ = model.predict(&x);
    }
});
