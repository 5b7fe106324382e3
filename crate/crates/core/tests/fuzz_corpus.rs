//! Every checked-in fuzz seed is a valid input for its target.

use std::path::PathBuf;

use vidspam::codebook::{Codebook, CodebookMeta};
use vidspam::dataset::{parse_manifest, read_descriptor_file, write_descriptor_file};
use vidspam::eval::parse_results;
use vidspam::io::parse_vector_csv;
use vidspam::lsa::{read_lsau, LsaMeta, LsaModel};
use vidspam::svm::SvmModel;

fn seeds(target: &str) -> Vec<(PathBuf, Vec<u8>)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fuzz/corpus")
        .join(target);
    let mut out: Vec<_> = std::fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| {
            let p = e.unwrap().path();
            let bytes = std::fs::read(&p).unwrap();
            (p, bytes)
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds for {target}");
    out
}

fn text(bytes: &[u8]) -> &str {
    std::str::from_utf8(bytes).unwrap()
}

#[test]
fn manifest_seeds() {
    for (p, b) in seeds("manifest") {
        parse_manifest(text(&b)).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
    }
}

#[test]
fn bvfd_seeds_round_trip() {
    for (p, b) in seeds("bvfd") {
        let set = read_descriptor_file(&b).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
        assert_eq!(write_descriptor_file(&set).unwrap(), b);
    }
}

#[test]
fn lsau_seeds() {
    for (_, b) in seeds("lsau") {
        assert!(read_lsau(&b).unwrap().is_finite());
    }
}

#[test]
fn table_seeds() {
    for (_, b) in seeds("vector_csv") {
        assert!(!parse_vector_csv(text(&b)).unwrap().is_empty());
    }
    for (_, b) in seeds("results_csv") {
        assert_eq!(parse_results(text(&b)).unwrap().len(), 8);
    }
    for (_, b) in seeds("svm_model_json") {
        serde_json::from_slice::<SvmModel>(&b).unwrap().validate().unwrap();
    }
}

#[test]
fn sidecar_seeds() {
    for (p, b) in seeds("model_sidecars") {
        let split = b.iter().position(|&x| x == b'\n').unwrap();
        let (json, payload) = (&b[..split], &b[split + 1..]);
        let ok = match serde_json::from_slice::<CodebookMeta>(json) {
            Ok(meta) => Codebook::from_parts(&read_descriptor_file(payload).unwrap(), &meta).is_ok(),
            Err(_) => LsaModel::from_parts(&serde_json::from_slice::<LsaMeta>(json).unwrap(), payload).is_ok(),
        };
        assert!(ok, "{}", p.display());
    }
}
