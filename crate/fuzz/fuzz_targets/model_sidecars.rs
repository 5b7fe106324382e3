#![no_main]

use libfuzzer_sys::fuzz_target;
use vidspam::codebook::{Codebook, CodebookMeta};
use vidspam::dataset::read_descriptor_file;
use vidspam::lsa::{LsaMeta, LsaModel};

// first line is the JSON sidecar, the rest the binary payload
fuzz_target!(|data: &[u8]| {
    let split = data.iter().position(|&b| b == b'\n').unwrap_or(data.len());
    let (json, payload) = (&data[..split], data.get(split + 1..).unwrap_or(&[]));
    if let Ok(meta) = serde_json::from_slice::<CodebookMeta>(json) {
        if let Ok(words) = read_descriptor_file(payload) {
            let _ = Codebook::from_parts(&words, &meta);
        }
    }
    if let Ok(meta) = serde_json::from_slice::<LsaMeta>(json) {
        let _ = LsaModel::from_parts(&meta, payload);
    }
});
