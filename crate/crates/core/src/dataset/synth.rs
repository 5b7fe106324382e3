//! Seeded synthetic threads.
//!
//! Every thread gets a topic center drawn uniformly from the unit hypercube.
//! Heads and legitimate answers scatter around their own thread's center;
//! spam answers scatter around the center of some other thread, so a spam
//! answer is only recognizable relative to its thread.

use std::collections::BTreeMap;
use std::path::Path;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{
    write_descriptor_file, DatasetManifest, DescriptorSet, FeatureKind, Label, MemoryStore, Role, VideoRecord,
};
use crate::error::{Error, Result};
use crate::io::write_atomic;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticConfig {
    pub n_threads: usize,
    pub answers_per_thread: usize,
    pub spam_fraction: f64,
    /// Descriptor length, shared by both feature kinds.
    pub dim: usize,
    pub descriptors_per_video: usize,
    pub topic_noise_sigma: f64,
    pub seed: u64,
}

impl SyntheticConfig {
    /// The reference desk-scale dataset: 84 threads of 24 answers, half spam.
    pub fn standard() -> Self {
        Self {
            n_threads: 84,
            answers_per_thread: 24,
            spam_fraction: 0.5,
            dim: 16,
            descriptors_per_video: 20,
            topic_noise_sigma: 0.05,
            seed: 42,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Config(msg.to_string()));
        if self.n_threads == 0 {
            return bad("n_threads must be at least 1");
        }
        if self.answers_per_thread == 0 {
            return bad("answers_per_thread must be at least 1");
        }
        if self.dim == 0 {
            return bad("dim must be at least 1");
        }
        if self.descriptors_per_video == 0 {
            return bad("descriptors_per_video must be at least 1");
        }
        if !(0.0..=1.0).contains(&self.spam_fraction) {
            return bad("spam_fraction must lie in [0, 1]");
        }
        if !(self.topic_noise_sigma > 0.0 && self.topic_noise_sigma.is_finite()) {
            return bad("topic_noise_sigma must be positive");
        }
        if self.n_threads == 1 && self.spam_per_thread() > 0 {
            return bad("spam needs at least two threads");
        }
        Ok(())
    }

    /// Spam answers in every thread.
    pub fn spam_per_thread(&self) -> usize {
        (self.spam_fraction * self.answers_per_thread as f64).round() as usize
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticDataset {
    pub manifest: DatasetManifest,
    pub store: MemoryStore,
    /// Topic center of every thread, in thread order.
    pub centers: Vec<Vec<f64>>,
    /// For each spam answer, the thread whose topic it was drawn from.
    pub spam_sources: BTreeMap<String, String>,
}

impl SyntheticDataset {
    /// Writes `manifest.json` and one BVFD file per (video, kind) under `dir`.
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        for v in self.manifest.videos() {
            for kind in FeatureKind::ALL {
                let rel = self.manifest.descriptor_path(&v.video_id, kind).expect("path recorded");
                let set = self.store.get(&v.video_id, kind).expect("set generated");
                write_atomic(&dir.join(rel), &write_descriptor_file(set)?)?;
            }
        }
        write_atomic(&dir.join("manifest.json"), self.manifest.to_json().as_bytes())
    }
}

pub fn thread_id(t: usize) -> String {
    format!("t{t:03}")
}

/// Generates the dataset described by `config`. Deterministic in the seed.
pub fn generate_synthetic_dataset(config: &SyntheticConfig) -> Result<SyntheticDataset> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let noise = Normal::new(0.0, config.topic_noise_sigma).map_err(|e| Error::Config(e.to_string()))?;

    let centers: Vec<Vec<f64>> = (0..config.n_threads)
        .map(|_| (0..config.dim).map(|_| rng.random::<f64>()).collect())
        .collect();

    let n_spam = config.spam_per_thread();
    let mut records = Vec::new();
    let mut topic_of = Vec::new();
    let mut spam_sources = BTreeMap::new();
    for t in 0..config.n_threads {
        let tid = thread_id(t);
        records.push(VideoRecord {
            video_id: format!("{tid}_h"),
            thread_id: tid.clone(),
            role: Role::Head,
            label: Label::Unlabeled,
        });
        topic_of.push(t);

        let mut is_spam = vec![false; config.answers_per_thread];
        for i in index::sample(&mut rng, config.answers_per_thread, n_spam) {
            is_spam[i] = true;
        }
        for (i, spam) in is_spam.into_iter().enumerate() {
            let video_id = format!("{tid}_a{i:03}");
            let topic = if spam {
                // uniform over the other threads
                let mut other = rng.random_range(0..config.n_threads - 1);
                if other >= t {
                    other += 1;
                }
                spam_sources.insert(video_id.clone(), thread_id(other));
                other
            } else {
                t
            };
            records.push(VideoRecord {
                video_id,
                thread_id: tid.clone(),
                role: Role::Answer,
                label: if spam { Label::Spam } else { Label::Legitimate },
            });
            topic_of.push(topic);
        }
    }

    let mut store = MemoryStore::new();
    let mut paths: BTreeMap<String, BTreeMap<FeatureKind, String>> = BTreeMap::new();
    for (rec, &topic) in records.iter().zip(&topic_of) {
        for kind in FeatureKind::ALL {
            let center = &centers[topic];
            let mut values = Vec::with_capacity(config.descriptors_per_video * config.dim);
            for _ in 0..config.descriptors_per_video {
                values.extend(center.iter().map(|c| (c + noise.sample(&mut rng)) as f32));
            }
            store.insert(DescriptorSet::new(rec.video_id.clone(), kind, config.dim, values)?);
            paths
                .entry(rec.video_id.clone())
                .or_default()
                .insert(kind, format!("descriptors/{}.{}.bvfd", rec.video_id, kind));
        }
    }

    let manifest = DatasetManifest::from_records(records, paths)?;
    Ok(SyntheticDataset {
        manifest,
        store,
        centers,
        spam_sources,
    })
}
