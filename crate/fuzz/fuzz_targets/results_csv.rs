#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(rows) = vidspam::eval::parse_results(text) {
        let _ = vidspam::eval::scatter_svg(&rows);
    }
});
