//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage error, 2 data or validation error,
//! 3 numeric failure.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::codebook::{build_codebook, Codebook, CodebookMeta};
use crate::context::{contextualize_dataset, Space};
use crate::dataset::{
    generate_synthetic_dataset, parse_manifest, read_descriptor_file, write_descriptor_file, DatasetManifest,
    DescriptorStore, DirectoryStore, FeatureKind, SyntheticConfig,
};
use crate::error::{Error, ErrorClass, Result};
use crate::eval::{emit_results, parse_results, run_experiments, scatter_svg, ExperimentConfig, ResultRow};
use crate::io::{parse_vector_csv, read_bytes, read_to_string, vector_csv, write_atomic, VectorRow};
use crate::lsa::{fit_lsa, LsaMeta, LsaModel, OccurrenceMatrix, DEFAULT_REL_THRESHOLD};
use crate::svm::{train, SvmModel, TrainConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "vidspam",
    version,
    about = "Context-aware visual spam detection for video answer threads"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a seeded synthetic dataset (manifest plus BVFD descriptor files).
    Synth(SynthArgs),
    /// Sample a visual codebook from every video's descriptors.
    Codebook(CodebookArgs),
    /// Quantize every video into a bag-of-visual-features histogram table.
    Quantize(QuantizeArgs),
    /// Fit an LSA topic model on a histogram table.
    LsaFit(LsaFitArgs),
    /// Fold a histogram table into topic space.
    LsaProject(LsaProjectArgs),
    /// Replace each answer's vector by its difference from the thread head.
    Contextualize(ContextArgs),
    /// Train a linear SVM on the labeled answers of a vector table.
    Train(TrainArgs),
    /// Score a vector table with a trained model.
    Predict(PredictArgs),
    /// Run stratified cross-validation for one configuration or the full grid.
    Experiment(ExperimentArgs),
    /// Render a results table as a TPR/FPR scatter plot and print it.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Switch {
    On,
    Off,
}

impl Switch {
    fn on(self) -> bool {
        self == Switch::On
    }
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Directory receiving manifest.json and descriptors/.
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long, default_value_t = 84, value_parser = clap::value_parser!(u64).range(1..))]
    pub threads: u64,
    #[arg(long, default_value_t = 24, value_parser = clap::value_parser!(u64).range(1..))]
    pub answers_per_thread: u64,
    #[arg(long, default_value_t = 0.5)]
    pub spam_fraction: f64,
    #[arg(long, default_value_t = 16, value_parser = clap::value_parser!(u64).range(1..))]
    pub dim: u64,
    #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u64).range(1..))]
    pub descriptors_per_video: u64,
    /// Standard deviation of descriptors around their topic center.
    #[arg(long, default_value_t = 0.05)]
    pub sigma: f64,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct CodebookArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long, default_value = "static")]
    pub features: FeatureKind,
    /// Number of visual words.
    #[arg(long, default_value_t = 5000, value_parser = clap::value_parser!(u64).range(1..))]
    pub size: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output BVFD path; the JSON sidecar goes next to it with a .json extension.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct QuantizeArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long, default_value = "static")]
    pub features: FeatureKind,
    /// Codebook BVFD path (sidecar read from the matching .json).
    #[arg(long)]
    pub codebook: PathBuf,
    /// Keep raw counts instead of relative frequencies.
    #[arg(long)]
    pub raw: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct LsaFitArgs {
    #[arg(long)]
    pub histograms: PathBuf,
    /// Singular values at or below threshold * sigma_max are dropped.
    #[arg(long, default_value_t = DEFAULT_REL_THRESHOLD)]
    pub threshold: f64,
    /// Output JSON sidecar; U is written next to it with a .lsau extension.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct LsaProjectArgs {
    /// Model JSON sidecar written by lsa-fit.
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub histograms: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ContextArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Histogram or topic table covering every head and answer.
    #[arg(long)]
    pub vectors: PathBuf,
    #[arg(long, value_parser = parse_space)]
    pub space: Space,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SvmArgs {
    /// Soft-margin penalty.
    #[arg(long = "C", default_value_t = 1.0)]
    pub c: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub tolerance: f64,
    #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
    pub max_epochs: u64,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long)]
    pub vectors: PathBuf,
    #[command(flatten)]
    pub svm: SvmArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub vectors: PathBuf,
    /// CSV of video_id,decision,label.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Run all eight feature × LSA × context configurations.
    #[arg(long, conflicts_with_all = ["features", "lsa", "context"])]
    pub grid: bool,
    #[arg(long, required_unless_present = "grid")]
    pub features: Option<FeatureKind>,
    #[arg(long, required_unless_present = "grid")]
    pub lsa: Option<Switch>,
    #[arg(long, required_unless_present = "grid")]
    pub context: Option<Switch>,
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u64).range(2..))]
    pub folds: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 5000, value_parser = clap::value_parser!(u64).range(1..))]
    pub codebook_size: u64,
    #[arg(long, default_value_t = DEFAULT_REL_THRESHOLD)]
    pub lsa_threshold: f64,
    #[command(flatten)]
    pub svm: SvmArgs,
    /// Results CSV.
    #[arg(long)]
    pub out: PathBuf,
    /// Optional TPR/FPR scatter plot.
    #[arg(long)]
    pub svg: Option<PathBuf>,
    /// Optional per-fold JSON reports.
    #[arg(long)]
    pub reports: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(long)]
    pub results: PathBuf,
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

fn parse_space(s: &str) -> std::result::Result<Space, String> {
    s.parse()
}

/// Parses `argv` (including the program name), runs the command and returns
/// the process exit code. Diagnostics go to standard error.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match run(cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            match e.class() {
                ErrorClass::Data => EXIT_DATA,
                ErrorClass::Numeric => EXIT_NUMERIC,
            }
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Synth(a) => synth(a),
        Command::Codebook(a) => codebook(a),
        Command::Quantize(a) => quantize(a),
        Command::LsaFit(a) => lsa_fit(a),
        Command::LsaProject(a) => lsa_project(a),
        Command::Contextualize(a) => context(a),
        Command::Train(a) => train_cmd(a),
        Command::Predict(a) => predict(a),
        Command::Experiment(a) => experiment(a),
        Command::Report(a) => report(a),
    }
}

fn load_manifest(path: &Path) -> Result<(DatasetManifest, DirectoryStore)> {
    let manifest = parse_manifest(&read_to_string(path)?)?;
    let root = path.parent().unwrap_or(Path::new("."));
    let store = DirectoryStore::new(root, &manifest);
    Ok((manifest, store))
}

fn load_vectors(path: &Path) -> Result<Vec<VectorRow>> {
    parse_vector_csv(&read_to_string(path)?)
}

fn to_json_bytes<T: serde::Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s.into_bytes())
}

fn synth(a: SynthArgs) -> Result<()> {
    let config = SyntheticConfig {
        n_threads: a.threads as usize,
        answers_per_thread: a.answers_per_thread as usize,
        spam_fraction: a.spam_fraction,
        dim: a.dim as usize,
        descriptors_per_video: a.descriptors_per_video as usize,
        topic_noise_sigma: a.sigma,
        seed: a.seed,
    };
    let ds = generate_synthetic_dataset(&config)?;
    ds.write_to(&a.out_dir)
}

fn codebook(a: CodebookArgs) -> Result<()> {
    let (manifest, store) = load_manifest(&a.manifest)?;
    let pool = manifest
        .videos()
        .iter()
        .map(|v| store.load(&v.video_id, a.features))
        .collect::<Result<Vec<_>>>()?;
    let cb = build_codebook(&pool, a.size as usize, a.seed)?;
    write_atomic(&a.out, &write_descriptor_file(&cb.to_descriptor_set())?)?;
    write_atomic(&a.out.with_extension("json"), &to_json_bytes(&cb.meta())?)
}

fn load_codebook(path: &Path) -> Result<Codebook> {
    let words = read_descriptor_file(&read_bytes(path)?)?;
    let meta: CodebookMeta = serde_json::from_str(&read_to_string(&path.with_extension("json"))?)?;
    Codebook::from_parts(&words, &meta)
}

fn quantize(a: QuantizeArgs) -> Result<()> {
    let (manifest, store) = load_manifest(&a.manifest)?;
    let cb = load_codebook(&a.codebook)?;
    if cb.feature_kind() != a.features {
        return Err(Error::KindMismatch {
            expected: a.features.to_string(),
            found: cb.feature_kind().to_string(),
        });
    }
    let mut rows = Vec::with_capacity(manifest.videos().len());
    for v in manifest.videos() {
        let set = store.load(&v.video_id, a.features)?;
        let h = cb.quantize_video(&set, !a.raw)?;
        rows.push(VectorRow::new(h.video_id, h.counts));
    }
    write_atomic(&a.out, vector_csv(&rows, "w")?.as_bytes())
}

fn lsa_fit(a: LsaFitArgs) -> Result<()> {
    let rows = load_vectors(&a.histograms)?;
    let docs: Vec<(&str, &[f64])> = rows
        .iter()
        .map(|r| (r.video_id.as_str(), r.values.as_slice()))
        .collect();
    let model = fit_lsa(&OccurrenceMatrix::from_documents(&docs)?, a.threshold)?;
    write_atomic(&a.out.with_extension("lsau"), &model.u_bytes()?)?;
    write_atomic(&a.out, &to_json_bytes(&model.meta())?)
}

fn load_lsa(path: &Path) -> Result<LsaModel> {
    let meta: LsaMeta = serde_json::from_str(&read_to_string(path)?)?;
    LsaModel::from_parts(&meta, &read_bytes(&path.with_extension("lsau"))?)
}

fn lsa_project(a: LsaProjectArgs) -> Result<()> {
    let model = load_lsa(&a.model)?;
    let rows = load_vectors(&a.histograms)?
        .into_iter()
        .map(|r| Ok(VectorRow::new(r.video_id, model.project_values(&r.values)?)))
        .collect::<Result<Vec<_>>>()?;
    write_atomic(&a.out, vector_csv(&rows, "t")?.as_bytes())
}

fn context(a: ContextArgs) -> Result<()> {
    let manifest = parse_manifest(&read_to_string(&a.manifest)?)?;
    let vectors: HashMap<String, Vec<f64>> = load_vectors(&a.vectors)?
        .into_iter()
        .map(|r| (r.video_id, r.values))
        .collect();
    let rows: Vec<VectorRow> = contextualize_dataset(&manifest, &vectors, a.space)?
        .into_iter()
        .map(|c| VectorRow {
            video_id: c.video_id,
            thread_id: Some(c.thread_id),
            space: Some(c.space.to_string()),
            values: c.values,
        })
        .collect();
    write_atomic(&a.out, vector_csv(&rows, "v")?.as_bytes())
}

fn svm_config(a: &SvmArgs, seed: u64) -> TrainConfig {
    TrainConfig {
        c: a.c,
        tolerance: a.tolerance,
        max_epochs: a.max_epochs as usize,
        seed,
    }
}

fn train_cmd(a: TrainArgs) -> Result<()> {
    let manifest = parse_manifest(&read_to_string(&a.manifest)?)?;
    let mut features = Vec::new();
    let mut labels = Vec::new();
    for row in load_vectors(&a.vectors)? {
        let video = manifest
            .video(&row.video_id)
            .ok_or_else(|| Error::UnknownVideo(row.video_id.clone()))?;
        // heads carry no label and are skipped
        if let Some(y) = video.label.sign() {
            features.push(row.values);
            labels.push(y);
        }
    }
    let model = train(&features, &labels, &svm_config(&a.svm, a.seed))?;
    write_atomic(&a.out, &to_json_bytes(&model)?)
}

fn predict(a: PredictArgs) -> Result<()> {
    let model: SvmModel = serde_json::from_str(&read_to_string(&a.model)?)?;
    model.validate()?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["video_id", "decision", "label"])?;
    for row in load_vectors(&a.vectors)? {
        let d = model.decision_value(&row.values)?;
        w.write_record([row.video_id, format!("{d}"), crate::svm::label_for(d).to_string()])?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Csv(e.to_string()))?;
    write_atomic(&a.out, &bytes)
}

fn experiment(a: ExperimentArgs) -> Result<()> {
    let (manifest, store) = load_manifest(&a.manifest)?;
    let base = ExperimentConfig {
        feature_kind: a.features.unwrap_or(FeatureKind::Static),
        use_lsa: a.lsa.is_some_and(Switch::on),
        use_context: a.context.is_some_and(Switch::on),
        codebook_size: a.codebook_size as usize,
        folds: a.folds as usize,
        seed: a.seed,
        svm: svm_config(&a.svm, a.seed),
        lsa_threshold: a.lsa_threshold,
    };
    let configs = if a.grid { base.grid() } else { vec![base] };
    let reports = run_experiments(&manifest, &store, &configs)?;
    let csv = emit_results(&reports);
    if let Some(svg) = &a.svg {
        let rows: Vec<ResultRow> = reports.iter().map(ResultRow::from).collect();
        write_atomic(svg, scatter_svg(&rows).as_bytes())?;
    }
    if let Some(path) = &a.reports {
        write_atomic(path, &to_json_bytes(&reports)?)?;
    }
    write_atomic(&a.out, csv.as_bytes())
}

fn report(a: ReportArgs) -> Result<()> {
    let rows = parse_results(&read_to_string(&a.results)?)?;
    if let Some(svg) = &a.svg {
        write_atomic(svg, scatter_svg(&rows).as_bytes())?;
    }
    println!(
        "{:<8} {:<4} {:<8} {:>8} {:>8} {:>9}",
        "feature", "lsa", "context", "tpr", "fpr", "accuracy"
    );
    for r in &rows {
        println!(
            "{:<8} {:<4} {:<8} {:>8.4} {:>8.4} {:>9.4}",
            r.feature,
            if r.lsa { "on" } else { "off" },
            if r.context { "on" } else { "off" },
            r.tpr,
            r.fpr,
            r.accuracy
        );
    }
    Ok(())
}
