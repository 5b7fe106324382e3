use std::collections::hash_map::Entry;
use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::folds::{stratified_kfold, FoldPlan};
use super::metrics::{compute_metrics, mean_rates, Metrics, Rates};
use crate::codebook::{build_codebook, Codebook};
use crate::context::contextualize;
use crate::dataset::{write_descriptor_file, DatasetManifest, DescriptorStore, FeatureKind, Label, Role};
use crate::error::{Error, Result};
use crate::lsa::{fit_lsa, LsaModel, OccurrenceMatrix, DEFAULT_REL_THRESHOLD};
use crate::svm::{train, SvmModel, TrainConfig};

pub const DEFAULT_CODEBOOK_SIZE: usize = 5000;
pub const DEFAULT_FOLDS: usize = 5;

/// One point of the feature × LSA × context grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub feature_kind: FeatureKind,
    pub use_lsa: bool,
    pub use_context: bool,
    pub codebook_size: usize,
    pub folds: usize,
    pub seed: u64,
    pub svm: TrainConfig,
    pub lsa_threshold: f64,
}

impl ExperimentConfig {
    pub fn new(feature_kind: FeatureKind, use_lsa: bool, use_context: bool) -> Self {
        Self {
            feature_kind,
            use_lsa,
            use_context,
            codebook_size: DEFAULT_CODEBOOK_SIZE,
            folds: DEFAULT_FOLDS,
            seed: 0,
            svm: TrainConfig::default(),
            lsa_threshold: DEFAULT_REL_THRESHOLD,
        }
    }

    /// The eight combinations of feature kind, LSA and context, sharing every
    /// other setting with `self`. Order: feature, then LSA, then context.
    pub fn grid(&self) -> Vec<ExperimentConfig> {
        let mut out = Vec::with_capacity(8);
        for kind in FeatureKind::ALL {
            for lsa in [false, true] {
                for context in [false, true] {
                    out.push(ExperimentConfig {
                        feature_kind: kind,
                        use_lsa: lsa,
                        use_context: context,
                        ..self.clone()
                    });
                }
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        if self.folds < 2 {
            return Err(Error::Config("folds must be at least 2".into()));
        }
        if self.codebook_size == 0 {
            return Err(Error::ZeroCodebookSize);
        }
        if !(self.lsa_threshold > 0.0 && self.lsa_threshold.is_finite()) {
            return Err(Error::Config("lsa threshold must be positive".into()));
        }
        self.svm.validate()
    }

    fn codebook_seed(&self, fold: usize) -> u64 {
        splitmix64(self.seed ^ splitmix64(fold as u64 + 1))
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub fold: usize,
    pub n_train: usize,
    pub n_test: usize,
    pub metrics: Metrics,
    pub converged: bool,
    pub epochs: usize,
    pub topics: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub config: ExperimentConfig,
    pub folds: Vec<FoldResult>,
    pub mean: Rates,
    pub converged_folds: usize,
}

impl MetricsReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Codebook and L1 histograms of the videos a fold may learn from: every
/// head plus the training answers.
#[derive(Debug, Clone)]
pub struct QuantizedFold {
    pub codebook: Codebook,
    pub histograms: HashMap<String, Vec<f64>>,
}

/// Videos visible to training in `fold`, in manifest order.
fn training_videos<'a>(
    manifest: &'a DatasetManifest,
    plan: &'a FoldPlan,
    fold: usize,
) -> impl Iterator<Item = &'a crate::dataset::VideoRecord> {
    manifest.videos().iter().filter(move |v| match v.role {
        Role::Head => true,
        Role::Answer => plan.fold_of(&v.video_id).is_some_and(|f| f != fold),
    })
}

pub fn quantize_fold(
    manifest: &DatasetManifest,
    store: &dyn DescriptorStore,
    plan: &FoldPlan,
    fold: usize,
    config: &ExperimentConfig,
) -> Result<QuantizedFold> {
    let sets = training_videos(manifest, plan, fold)
        .map(|v| store.load(&v.video_id, config.feature_kind))
        .collect::<Result<Vec<_>>>()?;
    let codebook = build_codebook(&sets, config.codebook_size, config.codebook_seed(fold))?;
    let mut histograms = HashMap::with_capacity(sets.len());
    for set in &sets {
        histograms.insert(set.video_id.clone(), codebook.quantize_video(set, true)?.counts);
    }
    Ok(QuantizedFold { codebook, histograms })
}

/// Everything learned in one fold.
#[derive(Debug, Clone)]
pub struct FoldModel {
    pub codebook: Codebook,
    pub lsa: Option<LsaModel>,
    pub svm: SvmModel,
    /// Head representation per thread, in the classifier's input space
    /// before context subtraction.
    head_vectors: HashMap<String, Vec<f64>>,
    use_context: bool,
}

impl FoldModel {
    /// Histogram → (topics) → (minus head) for one answer.
    pub fn represent(&self, thread_id: &str, histogram: &[f64]) -> Result<Vec<f64>> {
        let v = match &self.lsa {
            Some(lsa) => lsa.project_values(histogram)?,
            None => histogram.to_vec(),
        };
        if self.use_context {
            let head = self
                .head_vectors
                .get(thread_id)
                .ok_or_else(|| Error::MissingHead(thread_id.to_string()))?;
            contextualize(&v, head)
        } else {
            Ok(v)
        }
    }

    /// Byte encoding of the learned state (codebook words, LSA factors, SVM
    /// weights), for equality checks.
    pub fn fingerprint(&self) -> Vec<u8> {
        let mut out = write_descriptor_file(&self.codebook.to_descriptor_set()).expect("finite codebook");
        if let Some(lsa) = &self.lsa {
            for v in lsa.sigma().iter().chain(lsa.u().as_slice()) {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        for v in &self.svm.w {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }
}

/// Learns one fold's model from heads and training answers only.
pub fn train_fold(
    manifest: &DatasetManifest,
    store: &dyn DescriptorStore,
    plan: &FoldPlan,
    fold: usize,
    config: &ExperimentConfig,
) -> Result<FoldModel> {
    let q = quantize_fold(manifest, store, plan, fold, config)?;
    fit_fold(manifest, plan, fold, config, &q)
}

fn fit_fold(
    manifest: &DatasetManifest,
    plan: &FoldPlan,
    fold: usize,
    config: &ExperimentConfig,
    q: &QuantizedFold,
) -> Result<FoldModel> {
    let visible: Vec<_> = training_videos(manifest, plan, fold).collect();
    let lsa = if config.use_lsa {
        let docs: Vec<(&str, &[f64])> = visible
            .iter()
            .map(|v| (v.video_id.as_str(), q.histograms[&v.video_id].as_slice()))
            .collect();
        Some(fit_lsa(
            &OccurrenceMatrix::from_documents(&docs)?,
            config.lsa_threshold,
        )?)
    } else {
        None
    };
    let space = |h: &[f64]| -> Result<Vec<f64>> {
        match &lsa {
            Some(m) => m.project_values(h),
            None => Ok(h.to_vec()),
        }
    };
    let mut head_vectors = HashMap::new();
    for t in manifest.threads() {
        head_vectors.insert(t.thread_id.clone(), space(&q.histograms[&t.head])?);
    }

    let mut features = Vec::new();
    let mut labels = Vec::new();
    for v in visible.iter().filter(|v| v.role == Role::Answer) {
        let mut x = space(&q.histograms[&v.video_id])?;
        if config.use_context {
            x = contextualize(&x, &head_vectors[&v.thread_id])?;
        }
        features.push(x);
        labels.push(v.label.sign().expect("answers are labeled"));
    }
    let svm = train(&features, &labels, &config.svm)?;
    Ok(FoldModel {
        codebook: q.codebook.clone(),
        lsa,
        svm,
        head_vectors,
        use_context: config.use_context,
    })
}

/// Scores the held-out answers of `fold`.
pub fn evaluate_fold(
    model: &FoldModel,
    manifest: &DatasetManifest,
    store: &dyn DescriptorStore,
    plan: &FoldPlan,
    fold: usize,
    config: &ExperimentConfig,
) -> Result<FoldResult> {
    let mut predictions = Vec::new();
    let mut truth = Vec::new();
    for v in manifest.answers().filter(|v| plan.fold_of(&v.video_id) == Some(fold)) {
        let set = store.load(&v.video_id, config.feature_kind)?;
        let hist = model.codebook.quantize_video(&set, true)?;
        let x = model.represent(&v.thread_id, &hist.counts)?;
        predictions.push(model.svm.predict(&x)?);
        truth.push(v.label);
    }
    let metrics = compute_metrics(&predictions, &truth)?;
    Ok(FoldResult {
        fold,
        n_train: plan.assignments.len() - truth.len(),
        n_test: truth.len(),
        metrics,
        converged: model.svm.converged,
        epochs: model.svm.epochs,
        topics: model.lsa.as_ref().map(LsaModel::k),
    })
}

pub fn fold_plan(manifest: &DatasetManifest, config: &ExperimentConfig) -> Result<FoldPlan> {
    stratified_kfold(&manifest.answer_labels(), config.folds, config.seed)
}

pub fn run_experiment(
    manifest: &DatasetManifest,
    store: &dyn DescriptorStore,
    config: &ExperimentConfig,
) -> Result<MetricsReport> {
    Ok(run_experiments(manifest, store, std::slice::from_ref(config))?.remove(0))
}

/// Runs several configurations, reusing codebooks and histograms between
/// configurations that share feature kind, fold layout and codebook
/// settings. Results are identical to running each configuration alone.
pub fn run_experiments(
    manifest: &DatasetManifest,
    store: &dyn DescriptorStore,
    configs: &[ExperimentConfig],
) -> Result<Vec<MetricsReport>> {
    type Key = (FeatureKind, usize, u64, usize, usize);
    let mut cache: HashMap<Key, QuantizedFold> = HashMap::new();
    let mut reports = Vec::with_capacity(configs.len());
    for config in configs {
        config.validate()?;
        let plan = fold_plan(manifest, config)?;
        let mut results = Vec::with_capacity(config.folds);
        for fold in 0..config.folds {
            let key = (
                config.feature_kind,
                config.folds,
                config.seed,
                config.codebook_size,
                fold,
            );
            if let Entry::Vacant(slot) = cache.entry(key) {
                slot.insert(quantize_fold(manifest, store, &plan, fold, config)?);
            }
            let model = fit_fold(manifest, &plan, fold, config, &cache[&key])?;
            let result = evaluate_fold(&model, manifest, store, &plan, fold, config)?;
            log::info!(
                "{} lsa={} context={} fold {fold}: accuracy {:.4}",
                config.feature_kind,
                config.use_lsa,
                config.use_context,
                result.metrics.rates.accuracy
            );
            results.push(result);
        }
        let mean = mean_rates(&results.iter().map(|r| r.metrics.rates).collect::<Vec<_>>());
        let converged_folds = results.iter().filter(|r| r.converged).count();
        reports.push(MetricsReport {
            config: config.clone(),
            folds: results,
            mean,
            converged_folds,
        });
    }
    Ok(reports)
}

/// Training answers for a fold with their labels, in manifest order.
pub fn training_answers<'a>(
    manifest: &'a DatasetManifest,
    plan: &'a FoldPlan,
    fold: usize,
) -> impl Iterator<Item = (&'a str, Label)> {
    training_videos(manifest, plan, fold)
        .filter(|v| v.role == Role::Answer)
        .map(|v| (v.video_id.as_str(), v.label))
}
