#![no_main]

use libfuzzer_sys::fuzz_target;
use vidspam::io::{parse_vector_csv, vector_csv};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(rows) = parse_vector_csv(text) {
        if let Ok(out) = vector_csv(&rows, "v") {
            assert_eq!(parse_vector_csv(&out).unwrap(), rows);
        }
    }
});
