//! Small file helpers shared by the pipeline stages: atomic writes and the
//! per-video vector CSV tables (histograms, topic vectors, context vectors).

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

/// Writes `bytes` to `path` through a temporary file in the same directory
/// followed by a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

pub fn read_to_string(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| Error::io(path, e))
}

/// One row of a vector table.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorRow {
    pub video_id: String,
    pub thread_id: Option<String>,
    pub space: Option<String>,
    pub values: Vec<f64>,
}

impl VectorRow {
    pub fn new(video_id: impl Into<String>, values: Vec<f64>) -> Self {
        Self {
            video_id: video_id.into(),
            thread_id: None,
            space: None,
            values,
        }
    }
}

/// Renders rows as CSV. The header is `video_id[,thread_id,space],{prefix}0,...`;
/// the optional columns appear when the first row carries them. Values use
/// the shortest representation that parses back to the same `f64`.
pub fn vector_csv(rows: &[VectorRow], prefix: &str) -> Result<String> {
    let width = rows.first().map_or(0, |r| r.values.len());
    let with_context = rows.first().is_some_and(|r| r.thread_id.is_some());
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["video_id".to_string()];
    if with_context {
        header.push("thread_id".into());
        header.push("space".into());
    }
    header.extend((0..width).map(|i| format!("{prefix}{i}")));
    w.write_record(&header)?;
    for r in rows {
        if r.values.len() != width {
            return Err(Error::LengthMismatch(width, r.values.len()));
        }
        let mut rec = vec![r.video_id.clone()];
        if with_context {
            rec.push(r.thread_id.clone().unwrap_or_default());
            rec.push(r.space.clone().unwrap_or_default());
        }
        rec.extend(r.values.iter().map(|v| format!("{v}")));
        w.write_record(&rec)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Csv(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Parses any vector table written by [`vector_csv`].
pub fn parse_vector_csv(text: &str) -> Result<Vec<VectorRow>> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let header = r.headers()?.clone();
    if header.get(0) != Some("video_id") {
        return Err(Error::Csv("first column must be video_id".into()));
    }
    let thread_col = header.iter().position(|h| h == "thread_id");
    let space_col = header.iter().position(|h| h == "space");
    let meta = 1 + usize::from(thread_col.is_some()) + usize::from(space_col.is_some());
    let mut rows = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec?;
        let values = rec
            .iter()
            .skip(meta)
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| Error::Csv(format!("row {}: bad value {s:?}", line + 1)))
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(VectorRow {
            video_id: rec[0].to_string(),
            thread_id: thread_col.map(|c| rec[c].to_string()),
            space: space_col.map(|c| rec[c].to_string()),
            values,
        });
    }
    Ok(rows)
}
