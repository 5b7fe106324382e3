#![no_main]

use libfuzzer_sys::fuzz_target;
use vidspam::dataset::{read_descriptor_file, write_descriptor_file};

fuzz_target!(|data: &[u8]| {
    if let Ok(set) = read_descriptor_file(data) {
        // finite payloads survive bit for bit
        assert_eq!(write_descriptor_file(&set).unwrap(), data);
    }
});
