#![no_main]

use libfuzzer_sys::fuzz_target;
use surroscreen::hts::ScreenConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(config) = ScreenConfig::from_toml(text) {
        if let Ok(space) = config.space() {
            let n = space.candidate_count();
            assert!(n > 0);
            let first = space.candidate(0).expect("first candidate");
            let last = space.candidate(n - 1).expect("last candidate");
            assert_eq!(first.len(), last.len());
            assert!(space.candidate(n).is_err());
        }
    }
});
