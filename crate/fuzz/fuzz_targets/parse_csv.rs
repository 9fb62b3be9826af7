#![no_main]

use libfuzzer_sys::fuzz_target;
use surroscreen::{parse_csv, CsvOptions};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(ds) = parse_csv(text, &CsvOptions::default()) {
        // Whatever parses must survive a write/read cycle unchanged.
        let again = parse_csv(&ds.to_csv_string(), &CsvOptions::default()).expect("reparse");
        assert_eq!(again, ds);
    }
});
