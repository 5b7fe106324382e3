#![no_main]

use libfuzzer_sys::fuzz_target;
use vidspam::dataset::parse_manifest;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(m) = parse_manifest(text) {
        let again = parse_manifest(&m.to_json()).expect("canonical manifest parses");
        assert_eq!(again.to_json(), m.to_json());
    }
});
