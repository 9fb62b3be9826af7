#![no_main]

use libfuzzer_sys::fuzz_target;
use surroscreen_cli::{parse_feature_line, parse_nodes};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(nodes) = parse_nodes(text) {
        assert!(!nodes.is_empty() && !nodes.contains(&0));
    }
    if let Ok(values) = parse_feature_line(text, "fuzz") {
        assert!(values.iter().all(|v| v.is_finite()));
    }
});
