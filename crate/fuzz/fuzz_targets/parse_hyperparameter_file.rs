#![no_main]

use std::path::Path;

use libfuzzer_sys::fuzz_target;
use surroscreen_cli::HyperparameterFile;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(file) = HyperparameterFile::from_toml(text, Path::new("fuzz.toml")) {
        let again = HyperparameterFile::from_toml(
            &file.to_toml().expect("serialize"),
            Path::new("fuzz.toml"),
        );
        assert_eq!(again.expect("reparse"), file);
    }
});
