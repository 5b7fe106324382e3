use std::collections::{BTreeMap, HashMap};
use std::io::ErrorKind;
use std::path::{Path, PathBuf};

use super::{read_descriptor_file, DatasetManifest, DescriptorSet, FeatureKind};
use crate::error::{Error, Result};

/// Source of per-video descriptor sets.
pub trait DescriptorStore {
    fn load(&self, video_id: &str, kind: FeatureKind) -> Result<DescriptorSet>;
}

/// Descriptor sets held in memory.
#[derive(Debug, Clone, Default)]
pub struct MemoryStore {
    sets: HashMap<(String, FeatureKind), DescriptorSet>,
}

impl MemoryStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, set: DescriptorSet) {
        self.sets.insert((set.video_id.clone(), set.feature_kind), set);
    }

    pub fn remove(&mut self, video_id: &str, kind: FeatureKind) -> Option<DescriptorSet> {
        self.sets.remove(&(video_id.to_string(), kind))
    }

    pub fn get(&self, video_id: &str, kind: FeatureKind) -> Option<&DescriptorSet> {
        self.sets.get(&(video_id.to_string(), kind))
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }
}

impl FromIterator<DescriptorSet> for MemoryStore {
    fn from_iter<I: IntoIterator<Item = DescriptorSet>>(iter: I) -> Self {
        let mut store = Self::new();
        for set in iter {
            store.insert(set);
        }
        store
    }
}

impl DescriptorStore for MemoryStore {
    fn load(&self, video_id: &str, kind: FeatureKind) -> Result<DescriptorSet> {
        self.get(video_id, kind)
            .cloned()
            .ok_or_else(|| Error::MissingDescriptors {
                video: video_id.to_string(),
                kind: kind.to_string(),
            })
    }
}

/// BVFD files resolved through a manifest's descriptor paths, relative to
/// `root` (normally the manifest's directory).
#[derive(Debug, Clone)]
pub struct DirectoryStore {
    root: PathBuf,
    paths: BTreeMap<String, BTreeMap<FeatureKind, String>>,
}

impl DirectoryStore {
    pub fn new(root: impl Into<PathBuf>, manifest: &DatasetManifest) -> Self {
        Self {
            root: root.into(),
            paths: manifest.descriptor_paths().clone(),
        }
    }

    pub fn path_of(&self, video_id: &str, kind: FeatureKind) -> Option<PathBuf> {
        let rel = self.paths.get(video_id)?.get(&kind)?;
        Some(self.root.join(Path::new(rel)))
    }
}

impl DescriptorStore for DirectoryStore {
    fn load(&self, video_id: &str, kind: FeatureKind) -> Result<DescriptorSet> {
        let missing = || Error::MissingDescriptors {
            video: video_id.to_string(),
            kind: kind.to_string(),
        };
        let path = self.path_of(video_id, kind).ok_or_else(missing)?;
        let bytes = match std::fs::read(&path) {
            Ok(b) => b,
            Err(e) if e.kind() == ErrorKind::NotFound => return Err(missing()),
            Err(e) => return Err(Error::io(path, e)),
        };
        let mut set = read_descriptor_file(&bytes)?;
        if set.feature_kind != kind {
            return Err(Error::KindMismatch {
                expected: kind.to_string(),
                found: set.feature_kind.to_string(),
            });
        }
        set.video_id = video_id.to_string();
        Ok(set)
    }
}
