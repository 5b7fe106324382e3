//! The JSON dataset manifest.
//!
//! ```json
//! {
//!   "threads": [{"thread_id": "t0", "head": "h0", "answers": ["a0", "a1"]}],
//!   "labels": {"a0": "spam", "a1": "legitimate"},
//!   "descriptors": {"a0": {"static": "descriptors/a0.static.bvfd"}}
//! }
//! ```
//!
//! Answers may also be listed in a flat top-level `"answers"` array of
//! `{"video_id", "thread_id"}` records; those are appended to the cited
//! thread after its inline answers. Serialization always emits the nested
//! form.

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use super::{FeatureKind, Label, Role, VideoRecord};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Thread {
    pub thread_id: String,
    pub head: String,
    pub answers: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetManifest {
    threads: Vec<Thread>,
    videos: Vec<VideoRecord>,
    index: HashMap<String, usize>,
    descriptors: BTreeMap<String, BTreeMap<FeatureKind, String>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawManifest {
    threads: Vec<RawThread>,
    #[serde(default)]
    labels: BTreeMap<String, Label>,
    #[serde(default)]
    descriptors: BTreeMap<String, BTreeMap<FeatureKind, String>>,
    #[serde(default)]
    answers: Vec<RawAnswer>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawThread {
    thread_id: String,
    #[serde(default)]
    head: Option<OneOrMany>,
    #[serde(default)]
    answers: Vec<String>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum OneOrMany {
    One(String),
    Many(Vec<String>),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAnswer {
    video_id: String,
    thread_id: String,
}

#[derive(Serialize)]
struct CanonicalManifest<'a> {
    threads: &'a [Thread],
    labels: BTreeMap<&'a str, Label>,
    descriptors: &'a BTreeMap<String, BTreeMap<FeatureKind, String>>,
}

/// Parses and validates a manifest document.
pub fn parse_manifest(text: &str) -> Result<DatasetManifest> {
    let raw: RawManifest = serde_json::from_str(text).map_err(|e| Error::Manifest(e.to_string()))?;

    let mut threads: Vec<Thread> = Vec::with_capacity(raw.threads.len());
    let mut thread_pos: HashMap<String, usize> = HashMap::new();
    for t in raw.threads {
        if t.thread_id.is_empty() {
            return Err(Error::Manifest("empty thread_id".into()));
        }
        if thread_pos.contains_key(&t.thread_id) {
            return Err(Error::DuplicateThread(t.thread_id));
        }
        let head = match t.head {
            Some(OneOrMany::One(h)) => h,
            Some(OneOrMany::Many(mut hs)) if hs.len() == 1 => hs.pop().unwrap(),
            Some(OneOrMany::Many(hs)) if hs.len() > 1 => return Err(Error::MultipleHeads(t.thread_id)),
            _ => return Err(Error::NoHead(t.thread_id)),
        };
        thread_pos.insert(t.thread_id.clone(), threads.len());
        threads.push(Thread {
            thread_id: t.thread_id,
            head,
            answers: t.answers,
        });
    }
    for a in raw.answers {
        let pos = *thread_pos
            .get(&a.thread_id)
            .ok_or_else(|| Error::UnknownThread(a.thread_id.clone()))?;
        threads[pos].answers.push(a.video_id);
    }

    let mut labels = raw.labels;
    let mut videos = Vec::new();
    for t in &threads {
        let head_label = labels.remove(&t.head);
        if matches!(head_label, Some(l) if l != Label::Unlabeled) {
            return Err(Error::BadLabel {
                video: t.head.clone(),
                reason: "a thread head must be unlabeled".into(),
            });
        }
        videos.push(VideoRecord {
            video_id: t.head.clone(),
            thread_id: t.thread_id.clone(),
            role: Role::Head,
            label: Label::Unlabeled,
        });
        for a in &t.answers {
            let label = match labels.remove(a) {
                Some(l @ (Label::Spam | Label::Legitimate)) => l,
                Some(Label::Unlabeled) => {
                    return Err(Error::BadLabel {
                        video: a.clone(),
                        reason: "an answer must be spam or legitimate".into(),
                    })
                }
                None => {
                    // a duplicated answer id already consumed its label
                    if videos.iter().any(|v: &VideoRecord| &v.video_id == a) {
                        return Err(Error::DuplicateVideo(a.clone()));
                    }
                    return Err(Error::BadLabel {
                        video: a.clone(),
                        reason: "answer has no label".into(),
                    });
                }
            };
            videos.push(VideoRecord {
                video_id: a.clone(),
                thread_id: t.thread_id.clone(),
                role: Role::Answer,
                label,
            });
        }
    }
    if let Some(stray) = labels.into_keys().next() {
        return Err(Error::UnknownVideo(stray));
    }
    DatasetManifest::from_records(videos, raw.descriptors)
}

impl DatasetManifest {
    /// Builds a manifest from per-video records. Threads are defined by their
    /// head records and keep first-appearance order; answers keep record
    /// order within their thread.
    pub fn from_records(
        videos: Vec<VideoRecord>,
        descriptors: BTreeMap<String, BTreeMap<FeatureKind, String>>,
    ) -> Result<Self> {
        let mut seen = HashSet::new();
        let mut threads: Vec<Thread> = Vec::new();
        let mut thread_pos: HashMap<&str, usize> = HashMap::new();
        for v in &videos {
            if v.video_id.is_empty() {
                return Err(Error::Manifest("empty video_id".into()));
            }
            if !seen.insert(v.video_id.as_str()) {
                return Err(Error::DuplicateVideo(v.video_id.clone()));
            }
            match (v.role, v.label) {
                (Role::Head, Label::Unlabeled) => {}
                (Role::Answer, Label::Spam | Label::Legitimate) => {}
                (Role::Head, _) => {
                    return Err(Error::BadLabel {
                        video: v.video_id.clone(),
                        reason: "a thread head must be unlabeled".into(),
                    })
                }
                (Role::Answer, _) => {
                    return Err(Error::BadLabel {
                        video: v.video_id.clone(),
                        reason: "an answer must be spam or legitimate".into(),
                    })
                }
            }
            if v.role == Role::Head {
                if thread_pos.contains_key(v.thread_id.as_str()) {
                    return Err(Error::MultipleHeads(v.thread_id.clone()));
                }
                thread_pos.insert(v.thread_id.as_str(), threads.len());
                threads.push(Thread {
                    thread_id: v.thread_id.clone(),
                    head: v.video_id.clone(),
                    answers: Vec::new(),
                });
            }
        }
        for v in videos.iter().filter(|v| v.role == Role::Answer) {
            let pos = *thread_pos
                .get(v.thread_id.as_str())
                .ok_or_else(|| Error::UnknownThread(v.thread_id.clone()))?;
            threads[pos].answers.push(v.video_id.clone());
        }
        for id in descriptors.keys() {
            if !seen.contains(id.as_str()) {
                return Err(Error::UnknownVideo(id.clone()));
            }
        }

        // canonical order: each thread's head followed by its answers
        let mut by_id: HashMap<String, VideoRecord> = videos.into_iter().map(|v| (v.video_id.clone(), v)).collect();
        let mut ordered = Vec::with_capacity(by_id.len());
        for t in &threads {
            ordered.push(by_id.remove(&t.head).unwrap());
            for a in &t.answers {
                ordered.push(by_id.remove(a).unwrap());
            }
        }
        let index = ordered
            .iter()
            .enumerate()
            .map(|(i, v)| (v.video_id.clone(), i))
            .collect();
        Ok(Self {
            threads,
            videos: ordered,
            index,
            descriptors,
        })
    }

    pub fn threads(&self) -> &[Thread] {
        &self.threads
    }

    /// All videos, each thread's head first, then its answers.
    pub fn videos(&self) -> &[VideoRecord] {
        &self.videos
    }

    pub fn video(&self, id: &str) -> Option<&VideoRecord> {
        self.index.get(id).map(|&i| &self.videos[i])
    }

    pub fn heads(&self) -> impl Iterator<Item = &VideoRecord> {
        self.videos.iter().filter(|v| v.role == Role::Head)
    }

    /// Answers in manifest order.
    pub fn answers(&self) -> impl Iterator<Item = &VideoRecord> {
        self.videos.iter().filter(|v| v.role == Role::Answer)
    }

    pub fn thread(&self, id: &str) -> Option<&Thread> {
        self.threads.iter().find(|t| t.thread_id == id)
    }

    /// Head video id of the thread an answer belongs to.
    pub fn head_of(&self, video_id: &str) -> Option<&str> {
        let v = self.video(video_id)?;
        self.thread(&v.thread_id).map(|t| t.head.as_str())
    }

    /// Labels of all answers, keyed by video id.
    pub fn answer_labels(&self) -> BTreeMap<String, Label> {
        self.answers().map(|v| (v.video_id.clone(), v.label)).collect()
    }

    pub fn descriptor_path(&self, video_id: &str, kind: FeatureKind) -> Option<&str> {
        self.descriptors.get(video_id)?.get(&kind).map(String::as_str)
    }

    pub fn descriptor_paths(&self) -> &BTreeMap<String, BTreeMap<FeatureKind, String>> {
        &self.descriptors
    }

    pub fn set_descriptor_path(&mut self, video_id: &str, kind: FeatureKind, path: impl Into<String>) -> Result<()> {
        if !self.index.contains_key(video_id) {
            return Err(Error::UnknownVideo(video_id.to_string()));
        }
        self.descriptors
            .entry(video_id.to_string())
            .or_default()
            .insert(kind, path.into());
        Ok(())
    }

    /// Canonical JSON encoding; `parse_manifest` inverts it.
    pub fn to_json(&self) -> String {
        let doc = CanonicalManifest {
            threads: &self.threads,
            labels: self.answers().map(|v| (v.video_id.as_str(), v.label)).collect(),
            descriptors: &self.descriptors,
        };
        let mut s = serde_json::to_string_pretty(&doc).expect("manifest serializes");
        s.push('\n');
        s
    }
}
