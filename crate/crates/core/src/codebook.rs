//! Visual codebooks sampled from pooled descriptors, and bag-of-visual-features
//! quantization against them.

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::{DescriptorSet, FeatureKind};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    words: Vec<f32>,
    k: usize,
    dim: usize,
    feature_kind: FeatureKind,
    seed: u64,
}

/// JSON sidecar stored next to a codebook's BVFD file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodebookMeta {
    #[serde(rename = "K")]
    pub k: usize,
    pub dim: usize,
    pub feature_kind: FeatureKind,
    pub seed: u64,
}

/// A video's histogram over codebook words.
#[derive(Debug, Clone, PartialEq)]
pub struct BovfHistogram {
    pub video_id: String,
    pub counts: Vec<f64>,
    pub normalized: bool,
    pub n_descriptors: usize,
}

impl BovfHistogram {
    /// True when the source descriptor set was empty and the histogram is the
    /// zero vector.
    pub fn is_degenerate(&self) -> bool {
        self.n_descriptors == 0
    }
}

/// Samples `size` descriptors uniformly without replacement from the
/// concatenation of `pool`. Words keep sampling order.
pub fn build_codebook(pool: &[DescriptorSet], size: usize, seed: u64) -> Result<Codebook> {
    if size == 0 {
        return Err(Error::ZeroCodebookSize);
    }
    let Some(first) = pool.first() else {
        return Err(Error::InsufficientPool {
            available: 0,
            requested: size,
        });
    };
    let (dim, kind) = (first.dim(), first.feature_kind);
    for set in pool {
        if set.dim() != dim {
            return Err(Error::DimMismatch {
                expected: dim,
                found: set.dim(),
            });
        }
        if set.feature_kind != kind {
            return Err(Error::KindMismatch {
                expected: kind.to_string(),
                found: set.feature_kind.to_string(),
            });
        }
    }

    // offsets[i] = index of the first descriptor of pool[i]
    let mut offsets = Vec::with_capacity(pool.len());
    let mut total = 0usize;
    for set in pool {
        offsets.push(total);
        total += set.len();
    }
    if total < size {
        return Err(Error::InsufficientPool {
            available: total,
            requested: size,
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut words = Vec::with_capacity(size * dim);
    for flat in index::sample(&mut rng, total, size) {
        let set_idx = offsets.partition_point(|&o| o <= flat) - 1;
        words.extend_from_slice(pool[set_idx].row(flat - offsets[set_idx]));
    }
    Ok(Codebook {
        words,
        k: size,
        dim,
        feature_kind: kind,
        seed,
    })
}

#[inline]
fn squared_distance(a: &[f32], b: &[f32], bound: f64) -> f64 {
    let mut acc = 0.0f64;
    for (x, y) in a.iter().zip(b) {
        let d = f64::from(*x) - f64::from(*y);
        acc += d * d;
        // partial sums never decrease, so this word can no longer win
        if acc >= bound {
            return acc;
        }
    }
    acc
}

impl Codebook {
    /// Restores a codebook from its stored words and sidecar.
    pub fn from_parts(words: &DescriptorSet, meta: &CodebookMeta) -> Result<Self> {
        if words.dim() != meta.dim {
            return Err(Error::DimMismatch {
                expected: meta.dim,
                found: words.dim(),
            });
        }
        if words.len() != meta.k {
            return Err(Error::LengthMismatch(meta.k, words.len()));
        }
        if words.feature_kind != meta.feature_kind {
            return Err(Error::KindMismatch {
                expected: meta.feature_kind.to_string(),
                found: words.feature_kind.to_string(),
            });
        }
        if meta.k == 0 {
            return Err(Error::ZeroCodebookSize);
        }
        Ok(Self {
            words: words.values().to_vec(),
            k: meta.k,
            dim: meta.dim,
            feature_kind: meta.feature_kind,
            seed: meta.seed,
        })
    }

    /// Builds a codebook directly from word vectors, in the given order.
    pub fn from_words(words: DescriptorSet, seed: u64) -> Result<Self> {
        let meta = CodebookMeta {
            k: words.len(),
            dim: words.dim(),
            feature_kind: words.feature_kind,
            seed,
        };
        Self::from_parts(&words, &meta)
    }

    pub fn len(&self) -> usize {
        self.k
    }

    pub fn is_empty(&self) -> bool {
        self.k == 0
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn feature_kind(&self) -> FeatureKind {
        self.feature_kind
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn word(&self, i: usize) -> &[f32] {
        &self.words[i * self.dim..(i + 1) * self.dim]
    }

    pub fn meta(&self) -> CodebookMeta {
        CodebookMeta {
            k: self.k,
            dim: self.dim,
            feature_kind: self.feature_kind,
            seed: self.seed,
        }
    }

    pub fn to_descriptor_set(&self) -> DescriptorSet {
        DescriptorSet::new("codebook", self.feature_kind, self.dim, self.words.clone())
            .expect("codebook words are finite")
    }

    /// Index of the nearest word by squared Euclidean distance, lowest index
    /// on ties.
    pub fn assign_word(&self, d: &[f32]) -> Result<usize> {
        if d.len() != self.dim {
            return Err(Error::DimMismatch {
                expected: self.dim,
                found: d.len(),
            });
        }
        Ok(self.nearest(d))
    }

    fn nearest(&self, d: &[f32]) -> usize {
        let mut best = (f64::INFINITY, 0);
        for (i, w) in self.words.chunks_exact(self.dim).enumerate() {
            let dist = squared_distance(w, d, best.0);
            if dist < best.0 {
                best = (dist, i);
            }
        }
        best.1
    }

    /// Counts how many descriptors of `set` fall on each word; with
    /// `normalize` the counts are divided by their total. An empty set
    /// yields the zero vector.
    pub fn quantize_video(&self, set: &DescriptorSet, normalize: bool) -> Result<BovfHistogram> {
        if set.dim() != self.dim {
            return Err(Error::DimMismatch {
                expected: self.dim,
                found: set.dim(),
            });
        }
        let mut counts = vec![0.0; self.k];
        for row in set.rows() {
            counts[self.nearest(row)] += 1.0;
        }
        let n = set.len();
        if n == 0 {
            log::warn!("video {} has no descriptors; histogram is all zeros", set.video_id);
        } else if normalize {
            let total = n as f64;
            counts.iter_mut().for_each(|c| *c /= total);
        }
        Ok(BovfHistogram {
            video_id: set.video_id.clone(),
            counts,
            normalized: normalize,
            n_descriptors: n,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    fn set(id: &str, dim: usize, values: Vec<f32>) -> DescriptorSet {
        DescriptorSet::new(id, FeatureKind::Static, dim, values).unwrap()
    }

    fn two_words() -> Codebook {
        Codebook::from_words(set("cb", 2, vec![0.0, 0.0, 1.0, 1.0]), 0).unwrap()
    }

    /// Plain argmin scan, kept separate from the pruned search.
    fn brute_nearest(cb: &Codebook, d: &[f32]) -> usize {
        let dists: Vec<f64> = (0..cb.len())
            .map(|i| {
                cb.word(i)
                    .iter()
                    .zip(d)
                    .map(|(a, b)| (f64::from(*a) - f64::from(*b)).powi(2))
                    .sum()
            })
            .collect();
        let min = dists.iter().cloned().fold(f64::INFINITY, f64::min);
        dists.iter().position(|&x| x == min).unwrap()
    }

    #[test]
    fn assign_examples() {
        let cb = two_words();
        assert_eq!(cb.assign_word(&[0.1, 0.1]).unwrap(), 0);
        assert_eq!(cb.assign_word(&[1.0, 1.0]).unwrap(), 1);
        assert_eq!(cb.assign_word(&[0.5, 0.5]).unwrap(), 0);
        assert!(matches!(
            cb.assign_word(&[0.5]),
            Err(Error::DimMismatch { expected: 2, found: 1 })
        ));
    }

    #[test]
    fn quantize_examples() {
        let cb = two_words();
        let s = set("v", 2, vec![0.0, 0.1, 0.2, 0.0, 0.9, 1.0]);
        let raw = cb.quantize_video(&s, false).unwrap();
        assert_eq!(raw.counts, vec![2.0, 1.0]);
        let norm = cb.quantize_video(&s, true).unwrap();
        assert_eq!(norm.counts, vec![2.0 / 3.0, 1.0 / 3.0]);
        assert!((norm.counts.iter().sum::<f64>() - 1.0).abs() < 1e-9);

        let empty = cb.quantize_video(&set("e", 2, vec![]), true).unwrap();
        assert_eq!(empty.counts, vec![0.0, 0.0]);
        assert!(empty.is_degenerate());

        assert!(cb.quantize_video(&set("x", 3, vec![0.0; 3]), true).is_err());
    }

    #[test]
    fn exhaustive_sample_permutes_pool() {
        let pool = vec![set("a", 1, vec![1.0, 2.0, 3.0]), set("b", 1, vec![4.0, 5.0])];
        let cb = build_codebook(&pool, 5, 11).unwrap();
        let mut words: Vec<f32> = (0..5).map(|i| cb.word(i)[0]).collect();
        words.sort_by(f32::total_cmp);
        assert_eq!(words, vec![1.0, 2.0, 3.0, 4.0, 5.0]);
    }

    #[test]
    fn build_errors() {
        let pool = vec![set("a", 1, (0..10).map(|i| i as f32).collect())];
        assert!(matches!(
            build_codebook(&pool, 11, 0),
            Err(Error::InsufficientPool {
                available: 10,
                requested: 11
            })
        ));
        assert!(matches!(build_codebook(&pool, 0, 0), Err(Error::ZeroCodebookSize)));
        assert!(matches!(build_codebook(&[], 1, 0), Err(Error::InsufficientPool { .. })));
        let mixed = vec![set("a", 1, vec![0.0]), set("b", 2, vec![0.0, 0.0])];
        assert!(matches!(build_codebook(&mixed, 1, 0), Err(Error::DimMismatch { .. })));
        let kinds = vec![
            set("a", 1, vec![0.0]),
            DescriptorSet::new("b", FeatureKind::Dynamic, 1, vec![1.0]).unwrap(),
        ];
        assert!(matches!(build_codebook(&kinds, 1, 0), Err(Error::KindMismatch { .. })));
    }

    #[test]
    fn seeds_control_sampling() {
        let pool: Vec<DescriptorSet> = (0..20)
            .map(|v| set(&format!("v{v}"), 1, (0..50).map(|i| (v * 50 + i) as f32).collect()))
            .collect();
        let a = build_codebook(&pool, 30, 7).unwrap();
        assert_eq!(a, build_codebook(&pool, 30, 7).unwrap());
        for s in 0..10u64 {
            let x = build_codebook(&pool, 30, 100 + 2 * s).unwrap();
            let y = build_codebook(&pool, 30, 101 + 2 * s).unwrap();
            assert_ne!(x.to_descriptor_set().values(), y.to_descriptor_set().values());
        }
        // no duplicate words when the pool has distinct descriptors
        let mut w: Vec<f32> = a.to_descriptor_set().values().to_vec();
        w.sort_by(f32::total_cmp);
        w.dedup();
        assert_eq!(w.len(), 30);
    }

    #[test]
    fn matches_brute_force_including_ties() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for trial in 0..1000 {
            let dim = rng.random_range(1..6);
            let k = rng.random_range(1..12);
            // small integer grid makes exact ties common
            let words: Vec<f32> = (0..k * dim).map(|_| rng.random_range(-2..3) as f32).collect();
            let cb = Codebook::from_words(set("cb", dim, words), 0).unwrap();
            let d: Vec<f32> = if trial % 2 == 0 {
                (0..dim).map(|_| rng.random_range(-4..5) as f32 * 0.5).collect()
            } else {
                (0..dim).map(|_| rng.random_range(-2.0..2.0)).collect()
            };
            assert_eq!(cb.assign_word(&d).unwrap(), brute_nearest(&cb, &d));
        }
    }

    proptest! {
        #[test]
        fn histogram_sums(
            rows in prop::collection::vec(prop::collection::vec(-10.0f32..10.0, 3), 1..40),
            k in 1usize..8,
            seed in any::<u64>(),
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let words: Vec<f32> = (0..k * 3).map(|_| rng.random_range(-10.0..10.0)).collect();
            let cb = Codebook::from_words(set("cb", 3, words), 0).unwrap();
            let s = DescriptorSet::from_rows("v", FeatureKind::Static, 3, &rows).unwrap();
            let raw = cb.quantize_video(&s, false).unwrap();
            prop_assert_eq!(raw.counts.iter().sum::<f64>(), rows.len() as f64);
            prop_assert!(raw.counts.iter().all(|c| c.fract() == 0.0));
            let norm = cb.quantize_video(&s, true).unwrap();
            prop_assert!((norm.counts.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
        }

        #[test]
        fn permuting_words_permutes_histogram(
            rows in prop::collection::vec(prop::collection::vec(-1.0f32..1.0, 2), 1..30),
            seed in any::<u64>(),
        ) {
            let k = 6;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let words: Vec<Vec<f32>> = (0..k).map(|_| vec![rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)]).collect();
            let perm: Vec<usize> = index::sample(&mut rng, k, k).into_vec();
            let permuted: Vec<Vec<f32>> = perm.iter().map(|&p| words[p].clone()).collect();
            let a = Codebook::from_words(DescriptorSet::from_rows("a", FeatureKind::Static, 2, &words).unwrap(), 0).unwrap();
            let b = Codebook::from_words(DescriptorSet::from_rows("b", FeatureKind::Static, 2, &permuted).unwrap(), 0).unwrap();
            let s = DescriptorSet::from_rows("v", FeatureKind::Static, 2, &rows).unwrap();
            // skip inputs with exact distance ties, where the index rule decides
            let tie_free = rows.iter().all(|r| {
                let mut d: Vec<f64> = words.iter().map(|w| w.iter().zip(r).map(|(a, b)| (f64::from(*a) - f64::from(*b)).powi(2)).sum()).collect();
                d.sort_by(f64::total_cmp);
                d[0] != d[1]
            });
            prop_assume!(tie_free);
            let ha = a.quantize_video(&s, true).unwrap();
            let hb = b.quantize_video(&s, true).unwrap();
            for (j, &p) in perm.iter().enumerate() {
                prop_assert_eq!(hb.counts[j], ha.counts[p]);
            }
        }
    }
}
