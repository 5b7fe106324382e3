//! Context-aware representations: an answer is described by its difference
//! from the head of its thread.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::dataset::DatasetManifest;
use crate::error::{Error, Result};

/// Space a vector lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Space {
    Bovf,
    Topic,
}

impl Space {
    pub fn as_str(self) -> &'static str {
        match self {
            Space::Bovf => "bovf",
            Space::Topic => "topic",
        }
    }
}

impl fmt::Display for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Space {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "bovf" => Ok(Space::Bovf),
            "topic" | "topics" => Ok(Space::Topic),
            other => Err(format!("unknown space {other:?} (expected bovf or topic)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContextVector {
    pub video_id: String,
    pub thread_id: String,
    pub space: Space,
    pub values: Vec<f64>,
}

/// `answer - head`, elementwise.
pub fn contextualize(answer: &[f64], head: &[f64]) -> Result<Vec<f64>> {
    if answer.len() != head.len() {
        return Err(Error::LengthMismatch(answer.len(), head.len()));
    }
    Ok(answer.iter().zip(head).map(|(a, h)| a - h).collect())
}

/// One context vector per answer, in manifest order. Heads produce none.
pub fn contextualize_dataset(
    manifest: &DatasetManifest,
    vectors: &HashMap<String, Vec<f64>>,
    space: Space,
) -> Result<Vec<ContextVector>> {
    let mut out = Vec::new();
    for thread in manifest.threads() {
        if thread.answers.is_empty() {
            continue;
        }
        let head = vectors
            .get(&thread.head)
            .ok_or_else(|| Error::MissingHead(thread.thread_id.clone()))?;
        for a in &thread.answers {
            let v = vectors.get(a).ok_or_else(|| Error::MissingVector(a.clone()))?;
            out.push(ContextVector {
                video_id: a.clone(),
                thread_id: thread.thread_id.clone(),
                space,
                values: contextualize(v, head)?,
            });
        }
    }
    Ok(out)
}
