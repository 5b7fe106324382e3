//! BVFD descriptor files.
//!
//! Layout, all little-endian:
//!
//! ```text
//! offset  size  field
//! 0       4     magic "BVFD"
//! 4       4     u32 version (1)
//! 8       4     u32 feature kind (0 = static, 1 = dynamic)
//! 12      4     u32 dim
//! 16      4     u32 count
//! 20      ...   count * dim f32 values, row-major
//! ```

use super::{DescriptorSet, FeatureKind};
use crate::error::{Error, Result};

pub const BVFD_MAGIC: &[u8; 4] = b"BVFD";
pub const BVFD_HEADER_LEN: usize = 20;
const VERSION: u32 = 1;

/// Decodes a BVFD file. The returned set has an empty `video_id`; callers
/// that know the owning video should set it.
pub fn read_descriptor_file(bytes: &[u8]) -> Result<DescriptorSet> {
    if bytes.len() < 4 || &bytes[..4] != BVFD_MAGIC {
        return Err(Error::BadMagic { expected: "BVFD" });
    }
    if bytes.len() < BVFD_HEADER_LEN {
        return Err(Error::Truncated {
            expected: BVFD_HEADER_LEN,
            found: bytes.len(),
        });
    }
    let version = read_u32(bytes, 4);
    if version != VERSION {
        return Err(Error::BadVersion(version));
    }
    let kind = FeatureKind::from_code(read_u32(bytes, 8))?;
    let dim = read_u32(bytes, 12) as usize;
    let count = read_u32(bytes, 16) as usize;
    if dim == 0 {
        return Err(Error::ZeroDim);
    }
    let values = read_f32_payload(&bytes[BVFD_HEADER_LEN..], count, dim)?;
    DescriptorSet::new(String::new(), kind, dim, values)
}

/// Encodes a set as a BVFD file. Output is a pure function of the values.
pub fn write_descriptor_file(set: &DescriptorSet) -> Result<Vec<u8>> {
    if let Some(i) = set.values().iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(i));
    }
    let mut out = Vec::with_capacity(BVFD_HEADER_LEN + set.values().len() * 4);
    out.extend_from_slice(BVFD_MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&set.feature_kind.code().to_le_bytes());
    out.extend_from_slice(&header_u32(set.dim())?.to_le_bytes());
    out.extend_from_slice(&header_u32(set.len())?.to_le_bytes());
    for v in set.values() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    Ok(out)
}

pub(crate) fn read_u32(bytes: &[u8], at: usize) -> u32 {
    u32::from_le_bytes(bytes[at..at + 4].try_into().unwrap())
}

pub(crate) fn header_u32(n: usize) -> Result<u32> {
    u32::try_from(n).map_err(|_| Error::Config(format!("{n} does not fit a u32 header field")))
}

/// Reads exactly `rows * cols` little-endian f32 values, rejecting short,
/// long, and non-finite payloads.
pub(crate) fn read_f32_payload(payload: &[u8], rows: usize, cols: usize) -> Result<Vec<f32>> {
    let expected = rows
        .checked_mul(cols)
        .and_then(|n| n.checked_mul(4))
        .ok_or(Error::Truncated {
            expected: usize::MAX,
            found: payload.len(),
        })?;
    if payload.len() < expected {
        return Err(Error::Truncated {
            expected,
            found: payload.len(),
        });
    }
    if payload.len() > expected {
        return Err(Error::TrailingBytes(payload.len() - expected));
    }
    payload
        .chunks_exact(4)
        .enumerate()
        .map(|(i, c)| {
            let v = f32::from_le_bytes(c.try_into().unwrap());
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::NonFinite(i))
            }
        })
        .collect()
}
