//! Dataset model: threads of video answers, their labels, and the local
//! descriptors extracted from each video.

pub(crate) mod bvfd;
mod manifest;
mod store;
mod synth;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use bvfd::{read_descriptor_file, write_descriptor_file, BVFD_HEADER_LEN, BVFD_MAGIC};
pub use manifest::{parse_manifest, DatasetManifest, Thread};
pub use store::{DescriptorStore, DirectoryStore, MemoryStore};
pub use synth::{generate_synthetic_dataset, SyntheticConfig, SyntheticDataset};

/// Family of local descriptor a set was extracted with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureKind {
    /// SIFT-like descriptors computed on keyframes.
    Static,
    /// STIP-like spatio-temporal descriptors computed on the video.
    Dynamic,
}

impl FeatureKind {
    pub const ALL: [FeatureKind; 2] = [FeatureKind::Static, FeatureKind::Dynamic];

    /// Conventional descriptor length for the family (128 for SIFT, 162 for
    /// HOG/HOF STIP).
    pub fn default_dim(self) -> usize {
        match self {
            FeatureKind::Static => 128,
            FeatureKind::Dynamic => 162,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            FeatureKind::Static => "static",
            FeatureKind::Dynamic => "dynamic",
        }
    }

    pub(crate) fn code(self) -> u32 {
        match self {
            FeatureKind::Static => 0,
            FeatureKind::Dynamic => 1,
        }
    }

    pub(crate) fn from_code(code: u32) -> Result<Self> {
        match code {
            0 => Ok(FeatureKind::Static),
            1 => Ok(FeatureKind::Dynamic),
            other => Err(Error::BadFeatureKind(other)),
        }
    }
}

impl fmt::Display for FeatureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FeatureKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "static" | "sift" => Ok(FeatureKind::Static),
            "dynamic" | "stip" => Ok(FeatureKind::Dynamic),
            other => Err(format!("unknown feature kind {other:?} (expected static or dynamic)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Head,
    Answer,
}

/// Class of a video. Spam is the positive class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Spam,
    Legitimate,
    Unlabeled,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::Spam => "spam",
            Label::Legitimate => "legitimate",
            Label::Unlabeled => "unlabeled",
        }
    }

    /// `+1` for spam, `-1` for legitimate.
    pub fn sign(self) -> Option<f64> {
        match self {
            Label::Spam => Some(1.0),
            Label::Legitimate => Some(-1.0),
            Label::Unlabeled => None,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VideoRecord {
    pub video_id: String,
    pub thread_id: String,
    pub role: Role,
    pub label: Label,
}

/// The local descriptors of one video, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DescriptorSet {
    pub video_id: String,
    pub feature_kind: FeatureKind,
    dim: usize,
    values: Vec<f32>,
}

impl DescriptorSet {
    /// Builds a set from row-major values. Fails on `dim == 0`, a length that
    /// is not a multiple of `dim`, or any non-finite entry.
    pub fn new(video_id: impl Into<String>, feature_kind: FeatureKind, dim: usize, values: Vec<f32>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::ZeroDim);
        }
        if !values.len().is_multiple_of(dim) {
            return Err(Error::DimMismatch {
                expected: dim,
                found: values.len() % dim,
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self {
            video_id: video_id.into(),
            feature_kind,
            dim,
            values,
        })
    }

    pub fn from_rows(
        video_id: impl Into<String>,
        feature_kind: FeatureKind,
        dim: usize,
        rows: &[Vec<f32>],
    ) -> Result<Self> {
        let mut values = Vec::with_capacity(rows.len() * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::DimMismatch {
                    expected: dim,
                    found: row.len(),
                });
            }
            values.extend_from_slice(row);
        }
        Self::new(video_id, feature_kind, dim, values)
    }

    pub fn empty(video_id: impl Into<String>, feature_kind: FeatureKind, dim: usize) -> Result<Self> {
        Self::new(video_id, feature_kind, dim, Vec::new())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.values.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> std::slice::ChunksExact<'_, f32> {
        self.values.chunks_exact(self.dim)
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }
}
