#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(u) = vidspam::lsa::read_lsau(data) {
        assert!(u.is_finite());
    }
});
