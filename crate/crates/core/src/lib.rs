//! Content-based spam detection for threads of video answers.
//!
//! Local descriptors are quantized against a randomly sampled visual
//! codebook into bag-of-visual-features histograms, optionally folded into
//! an LSA topic space, optionally made relative to the thread's head video,
//! and classified by a linear SVM under stratified k-fold evaluation.

pub mod cli;
pub mod codebook;
pub mod context;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod io;
pub mod linalg;
pub mod lsa;
pub mod svm;

pub use error::{Error, ErrorClass, Result};
