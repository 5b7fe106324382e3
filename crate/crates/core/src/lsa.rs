//! Latent semantic analysis over visual words.
//!
//! The word × document occurrence matrix is factored by SVD; every singular
//! value above `rel_threshold * sigma_max` is kept as a topic. Documents are
//! folded into topic space with `diag(sigma)^-1 * U^T * d`.

use serde::{Deserialize, Serialize};

use crate::codebook::BovfHistogram;
use crate::dataset::bvfd::{header_u32, read_f32_payload, read_u32};
use crate::error::{Error, Result};
use crate::linalg::{svd, Matrix};

pub const DEFAULT_REL_THRESHOLD: f64 = 1e-10;
pub const LSAU_MAGIC: &[u8; 4] = b"LSAU";
const LSAU_HEADER_LEN: usize = 16;

/// Words × documents matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct OccurrenceMatrix {
    pub entries: Matrix,
    pub doc_ids: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TopicVector {
    pub video_id: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LsaModel {
    /// K × k, orthonormal columns.
    u: Matrix,
    sigma: Vec<f64>,
    threshold: f64,
}

/// JSON sidecar for a persisted model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LsaMeta {
    #[serde(rename = "K")]
    pub n_words: usize,
    pub k: usize,
    pub threshold: f64,
    pub sigma: Vec<f64>,
}

pub fn build_occurrence_matrix(histograms: &[BovfHistogram]) -> Result<OccurrenceMatrix> {
    let docs: Vec<(&str, &[f64])> = histograms
        .iter()
        .map(|h| (h.video_id.as_str(), h.counts.as_slice()))
        .collect();
    OccurrenceMatrix::from_documents(&docs)
}

impl OccurrenceMatrix {
    /// One column per document, in input order.
    pub fn from_documents(docs: &[(&str, &[f64])]) -> Result<Self> {
        let Some((_, first)) = docs.first() else {
            return Err(Error::EmptyInput("no documents"));
        };
        let k = first.len();
        if k == 0 {
            return Err(Error::EmptyInput("zero-length document vectors"));
        }
        let mut entries = Matrix::zeros(k, docs.len());
        for (j, (_, v)) in docs.iter().enumerate() {
            if v.len() != k {
                return Err(Error::DimMismatch {
                    expected: k,
                    found: v.len(),
                });
            }
            for (i, &x) in v.iter().enumerate() {
                entries[(i, j)] = x;
            }
        }
        Ok(Self {
            entries,
            doc_ids: docs.iter().map(|(id, _)| id.to_string()).collect(),
        })
    }

    pub fn n_words(&self) -> usize {
        self.entries.rows()
    }

    pub fn n_docs(&self) -> usize {
        self.entries.cols()
    }
}

/// Fits a topic model keeping every singular value above
/// `rel_threshold * sigma_max`.
pub fn fit_lsa(m: &OccurrenceMatrix, rel_threshold: f64) -> Result<LsaModel> {
    if !(rel_threshold > 0.0 && rel_threshold.is_finite()) {
        return Err(Error::Config(format!(
            "relative threshold must be positive, got {rel_threshold}"
        )));
    }
    let full = svd(&m.entries)?;
    let smax = full.sigma.first().copied().unwrap_or(0.0);
    if smax <= 0.0 {
        return Err(Error::ZeroMatrix);
    }
    let k = full.sigma.iter().take_while(|&&s| s > rel_threshold * smax).count();
    let n_words = m.n_words();
    let mut u = Matrix::zeros(n_words, k);
    for j in 0..k {
        let mut col = full.u.column(j);
        // first entry of largest magnitude is made non-negative
        let pivot = col
            .iter()
            .enumerate()
            .fold(
                (0, 0.0f64),
                |best, (i, &x)| if x.abs() > best.1 { (i, x.abs()) } else { best },
            )
            .0;
        if col[pivot] < 0.0 {
            col.iter_mut().for_each(|x| *x = -*x);
        }
        for (i, x) in col.into_iter().enumerate() {
            u[(i, j)] = x;
        }
    }
    Ok(LsaModel {
        u,
        sigma: full.sigma[..k].to_vec(),
        threshold: rel_threshold,
    })
}

impl LsaModel {
    pub fn n_words(&self) -> usize {
        self.u.rows()
    }

    /// Number of retained topics.
    pub fn k(&self) -> usize {
        self.sigma.len()
    }

    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn u(&self) -> &Matrix {
        &self.u
    }

    pub fn project(&self, video_id: &str, doc: &[f64]) -> Result<TopicVector> {
        Ok(TopicVector {
            video_id: video_id.to_string(),
            values: self.project_values(doc)?,
        })
    }

    pub fn project_values(&self, doc: &[f64]) -> Result<Vec<f64>> {
        if doc.len() != self.n_words() {
            return Err(Error::DimMismatch {
                expected: self.n_words(),
                found: doc.len(),
            });
        }
        let mut out = vec![0.0; self.k()];
        for (i, &d) in doc.iter().enumerate() {
            if d == 0.0 {
                continue;
            }
            for (o, &u) in out.iter_mut().zip(self.u.row(i)) {
                *o += u * d;
            }
        }
        for (o, s) in out.iter_mut().zip(&self.sigma) {
            *o /= s;
        }
        Ok(out)
    }

    pub fn meta(&self) -> LsaMeta {
        LsaMeta {
            n_words: self.n_words(),
            k: self.k(),
            threshold: self.threshold,
            sigma: self.sigma.clone(),
        }
    }

    /// Encodes `U` as an LSAU file: magic, u32 version 1, u32 rows, u32
    /// cols, then rows × cols little-endian f32 values, row-major.
    pub fn u_bytes(&self) -> Result<Vec<u8>> {
        let mut out = Vec::with_capacity(LSAU_HEADER_LEN + self.u.as_slice().len() * 4);
        out.extend_from_slice(LSAU_MAGIC);
        out.extend_from_slice(&1u32.to_le_bytes());
        out.extend_from_slice(&header_u32(self.u.rows())?.to_le_bytes());
        out.extend_from_slice(&header_u32(self.u.cols())?.to_le_bytes());
        for &v in self.u.as_slice() {
            out.extend_from_slice(&(v as f32).to_le_bytes());
        }
        Ok(out)
    }

    /// Restores a model from its sidecar and LSAU bytes.
    pub fn from_parts(meta: &LsaMeta, u_bytes: &[u8]) -> Result<Self> {
        let u = read_lsau(u_bytes)?;
        if u.rows() != meta.n_words {
            return Err(Error::DimMismatch {
                expected: meta.n_words,
                found: u.rows(),
            });
        }
        if u.cols() != meta.k || meta.sigma.len() != meta.k {
            return Err(Error::LengthMismatch(meta.k, u.cols()));
        }
        if meta.k == 0 {
            return Err(Error::ZeroMatrix);
        }
        if meta.sigma.iter().any(|s| !(s.is_finite() && *s > 0.0)) || meta.sigma.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::Config(
                "singular values must be positive and non-increasing".into(),
            ));
        }
        Ok(Self {
            u,
            sigma: meta.sigma.clone(),
            threshold: meta.threshold,
        })
    }
}

/// Decodes an LSAU matrix file.
pub fn read_lsau(bytes: &[u8]) -> Result<Matrix> {
    if bytes.len() < 4 || &bytes[..4] != LSAU_MAGIC {
        return Err(Error::BadMagic { expected: "LSAU" });
    }
    if bytes.len() < LSAU_HEADER_LEN {
        return Err(Error::Truncated {
            expected: LSAU_HEADER_LEN,
            found: bytes.len(),
        });
    }
    let version = read_u32(bytes, 4);
    if version != 1 {
        return Err(Error::BadVersion(version));
    }
    let rows = read_u32(bytes, 8) as usize;
    let cols = read_u32(bytes, 12) as usize;
    let values = read_f32_payload(&bytes[LSAU_HEADER_LEN..], rows, cols)?;
    Matrix::from_row_major(rows, cols, values.into_iter().map(f64::from).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn occ(rows: &[Vec<f64>]) -> OccurrenceMatrix {
        let m = Matrix::from_rows(rows).unwrap();
        let ids: Vec<String> = (0..m.cols()).map(|j| format!("d{j}")).collect();
        OccurrenceMatrix {
            entries: m,
            doc_ids: ids,
        }
    }

    fn random_occ(rows: usize, cols: usize, seed: u64) -> OccurrenceMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        occ(&(0..rows)
            .map(|_| (0..cols).map(|_| rng.random_range(0.0..1.0)).collect())
            .collect::<Vec<_>>())
    }

    fn hist(id: &str, counts: Vec<f64>) -> BovfHistogram {
        BovfHistogram {
            video_id: id.into(),
            counts,
            normalized: true,
            n_descriptors: 1,
        }
    }

    #[test]
    fn occurrence_shapes() {
        let m = build_occurrence_matrix(&[hist("a", vec![1.0, 0.0, 0.0]), hist("b", vec![0.0, 0.5, 0.5])]).unwrap();
        assert_eq!((m.n_words(), m.n_docs()), (3, 2));
        assert_eq!(m.entries.column(1), vec![0.0, 0.5, 0.5]);
        assert_eq!(m.doc_ids, vec!["a", "b"]);

        let single = build_occurrence_matrix(&[hist("a", vec![0.2, 0.8])]).unwrap();
        assert_eq!(single.entries.column(0), vec![0.2, 0.8]);

        assert!(build_occurrence_matrix(&[hist("a", vec![1.0; 3]), hist("b", vec![1.0; 4])]).is_err());
        assert!(build_occurrence_matrix(&[]).is_err());
    }

    #[test]
    fn identity_model() {
        let model = fit_lsa(&occ(&[vec![1.0, 0.0], vec![0.0, 1.0]]), DEFAULT_REL_THRESHOLD).unwrap();
        assert_eq!(model.k(), 2);
        assert_eq!(model.sigma(), &[1.0, 1.0]);
    }

    #[test]
    fn rank_one_model() {
        let model = fit_lsa(&occ(&[vec![1.0, 2.0], vec![2.0, 4.0]]), DEFAULT_REL_THRESHOLD).unwrap();
        assert_eq!(model.k(), 1);
        assert!((model.sigma()[0] - 5.0).abs() < 1e-12);
        // sign rule: largest entry of u is positive
        let u = model.u().column(0);
        assert!(u[1] > 0.0 && (u[1] - 2.0 / 5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn zero_matrix_is_reported() {
        assert!(matches!(
            fit_lsa(&occ(&[vec![0.0, 0.0]]), 1e-10),
            Err(Error::ZeroMatrix)
        ));
        assert!(fit_lsa(&occ(&[vec![1.0]]), 0.0).is_err());
    }

    #[test]
    fn projecting_training_columns_recovers_v() {
        let m = random_occ(5, 4, 8);
        let model = fit_lsa(&m, DEFAULT_REL_THRESHOLD).unwrap();
        assert_eq!(model.k(), 4);
        // independent route: V = M^T U diag(sigma)^-1 from nalgebra's SVD
        let na = nalgebra::DMatrix::from_row_slice(5, 4, m.entries.as_slice());
        let dec = na.svd(true, true);
        let vt = dec.v_t.unwrap();
        let mut order: Vec<usize> = (0..4).collect();
        order.sort_by(|&a, &b| dec.singular_values[b].total_cmp(&dec.singular_values[a]));
        for j in 0..4 {
            let t = model.project_values(&m.entries.column(j)).unwrap();
            for (topic, &o) in order.iter().enumerate() {
                let expect = vt[(o, j)];
                assert!((t[topic].abs() - expect.abs()).abs() < 1e-10, "doc {j} topic {topic}");
            }
        }
    }

    #[test]
    fn projection_is_linear() {
        let model = fit_lsa(&random_occ(8, 12, 2), DEFAULT_REL_THRESHOLD).unwrap();
        assert_eq!(model.project_values(&[0.0; 8]).unwrap(), vec![0.0; model.k()]);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let a: Vec<f64> = (0..8).map(|_| rng.random_range(0.0..1.0)).collect();
            let b: Vec<f64> = (0..8).map(|_| rng.random_range(0.0..1.0)).collect();
            let d: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x - y).collect();
            let pd = model.project_values(&d).unwrap();
            let pa = model.project_values(&a).unwrap();
            let pb = model.project_values(&b).unwrap();
            for i in 0..model.k() {
                assert!((pd[i] - (pa[i] - pb[i])).abs() <= 1e-10);
            }
        }
        assert!(model.project_values(&[0.0; 7]).is_err());
    }

    #[test]
    fn persisted_model_round_trip() {
        let model = fit_lsa(&random_occ(6, 9, 4), DEFAULT_REL_THRESHOLD).unwrap();
        let bytes = model.u_bytes().unwrap();
        assert_eq!(bytes.len(), LSAU_HEADER_LEN + 6 * model.k() * 4);
        let meta: LsaMeta = serde_json::from_str(&serde_json::to_string(&model.meta()).unwrap()).unwrap();
        let back = LsaModel::from_parts(&meta, &bytes).unwrap();
        assert_eq!(back.sigma(), model.sigma());
        for (a, b) in back.u().as_slice().iter().zip(model.u().as_slice()) {
            assert!((a - b).abs() < 1e-6);
        }
        assert!(read_lsau(&bytes[..bytes.len() - 1]).is_err());
        assert!(read_lsau(b"BVFD").is_err());
        let mut wrong = meta.clone();
        wrong.k += 1;
        assert!(LsaModel::from_parts(&wrong, &bytes).is_err());
    }
}
