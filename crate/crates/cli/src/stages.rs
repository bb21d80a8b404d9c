//! Deterministic, resumable pipeline stages.
//!
//! Each stage checks its prerequisites, derives its own seed from the
//! master seed, writes outputs atomically into the workdir, and records a
//! manifest of input hashes so an unchanged rerun is a no-op. A lock file
//! serializes stages within one workdir.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use bizsurv_core::corpus::{
    self, filter_restaurants, parse_snapshot, write_snapshot, Snapshot,
};
use bizsurv_core::explain::{
    explain_tabular, explain_text, render_tabular, render_text, RenderFormat,
    TabularExplainerConfig, TextExplainerConfig,
};
use bizsurv_core::learn::{
    assemble_dataset, label_map, oversample, roc_auc, run_ablation, sentiment_dataset,
    stratified_split, train_classifier, AblationConfig, Dataset, FeatureFamily, SplitTag,
    TrainedModel,
};
use bizsurv_core::table::FeatureTable;
use bizsurv_core::text::{
    bow_feature_table, build_corpus_vocabulary, polarity, reviews_by_business,
    select_extreme_reviews, Vocabulary,
};
use bizsurv_core::{attributes, geo, mobility, seed};
use chrono::Duration;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::{RunConfig, Task};
use crate::error::{CliError, Result};
use crate::manifest;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Synth,
    Ingest,
    Label,
    Features,
    Train,
    Evaluate,
    Ablate,
    Explain,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::Synth => "synth",
            Stage::Ingest => "ingest",
            Stage::Label => "label",
            Stage::Features => "features",
            Stage::Train => "train",
            Stage::Evaluate => "evaluate",
            Stage::Ablate => "ablate",
            Stage::Explain => "explain",
        }
    }

    /// Workdir-relative artifacts that must exist before this stage runs.
    /// Ordering matters: the first missing artifact is reported.
    pub fn prerequisites(self, config: &RunConfig) -> Vec<PathBuf> {
        let ingest = vec![
            PathBuf::from("ingest/observation/business.json"),
            PathBuf::from("ingest/prediction/business.json"),
        ];
        let features = vec![
            PathBuf::from("features/geo_features.csv"),
            PathBuf::from("features/mobility_features.csv"),
            PathBuf::from("features/attribute_features.csv"),
            PathBuf::from("features/bow_features.csv"),
        ];
        match self {
            Stage::Synth => vec![],
            Stage::Ingest => vec![],
            Stage::Label => ingest,
            Stage::Features => vec![PathBuf::from("ingest/observation/business.json")],
            Stage::Train | Stage::Ablate => {
                let mut p = match (self, config.task) {
                    (Stage::Train, Task::Sentiment) => vec![
                        PathBuf::from("features/vocabulary.json"),
                        PathBuf::from("features/review_polarity.jsonl"),
                        PathBuf::from("ingest/observation/business.json"),
                    ],
                    _ => features,
                };
                p.push(PathBuf::from("label/labels.jsonl"));
                p
            }
            Stage::Evaluate => vec![
                PathBuf::from("train/model.bin"),
                PathBuf::from("train/split.json"),
            ],
            Stage::Explain => vec![
                PathBuf::from("train/model.bin"),
                PathBuf::from("train/split.json"),
            ],
        }
    }
}

impl FromStr for Stage {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Stage> {
        match s {
            "synth" => Ok(Stage::Synth),
            "ingest" => Ok(Stage::Ingest),
            "label" => Ok(Stage::Label),
            "features" => Ok(Stage::Features),
            "train" => Ok(Stage::Train),
            "evaluate" => Ok(Stage::Evaluate),
            "ablate" => Ok(Stage::Ablate),
            "explain" => Ok(Stage::Explain),
            other => Err(CliError::Other(format!("unknown stage {other:?}"))),
        }
    }
}

/// Extra arguments for the explain stage.
#[derive(Debug, Clone, Default)]
pub struct ExplainRequest {
    pub business_id: Option<String>,
    pub review_id: Option<String>,
    pub model_path: Option<PathBuf>,
    pub top_k: Option<usize>,
    pub num_samples: Option<usize>,
    pub seed: Option<u64>,
    pub format: Option<String>,
}

#[derive(Debug)]
pub struct StageOutcome {
    pub stage: &'static str,
    /// False when the manifest matched and the stage was skipped.
    pub ran: bool,
    pub artifacts: Vec<PathBuf>,
}

/// Atomic write: temp file in the destination directory, then rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let parent = path.parent().unwrap_or_else(|| Path::new("."));
    std::fs::create_dir_all(parent)
        .map_err(|e| CliError::Io(format!("{}: {e}", parent.display())))?;
    let tmp = path.with_extension("tmp");
    {
        let mut f = std::fs::File::create(&tmp)
            .map_err(|e| CliError::Io(format!("{}: {e}", tmp.display())))?;
        f.write_all(bytes)
            .map_err(|e| CliError::Io(format!("{}: {e}", tmp.display())))?;
    }
    std::fs::rename(&tmp, path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

struct WorkdirLock {
    path: PathBuf,
}

impl WorkdirLock {
    fn acquire(workdir: &Path) -> Result<WorkdirLock> {
        std::fs::create_dir_all(workdir)
            .map_err(|e| CliError::Io(format!("{}: {e}", workdir.display())))?;
        let path = workdir.join(".bizsurv.lock");
        match std::fs::OpenOptions::new()
            .write(true)
            .create_new(true)
            .open(&path)
        {
            Ok(mut f) => {
                let _ = writeln!(f, "{}", std::process::id());
                Ok(WorkdirLock { path })
            }
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => {
                Err(CliError::Locked(path))
            }
            Err(e) => Err(CliError::Io(format!("{}: {e}", path.display()))),
        }
    }
}

impl Drop for WorkdirLock {
    fn drop(&mut self) {
        let _ = std::fs::remove_file(&self.path);
    }
}

/// Run one stage end to end: lock, prerequisite check, no-op detection,
/// execution, manifest.
pub fn run_stage(
    stage: Stage,
    config: &RunConfig,
    workdir: &Path,
    explain_request: Option<&ExplainRequest>,
) -> Result<StageOutcome> {
    config.validate()?;
    let _lock = WorkdirLock::acquire(workdir)?;

    for rel in stage.prerequisites(config) {
        let p = workdir.join(&rel);
        if !p.exists() {
            return Err(CliError::MissingPrerequisite(rel));
        }
    }

    let stage_seed = seed::derive(config.seed, stage.name());
    let input_paths = input_paths_for(stage, config, workdir);
    let inputs = manifest::hash_inputs(&input_paths)?;
    // The explain stage takes per-invocation arguments, so its manifest
    // never short-circuits.
    if stage != Stage::Explain
        && manifest::is_up_to_date(workdir, stage.name(), stage_seed, config, &inputs)
    {
        return Ok(StageOutcome {
            stage: stage.name(),
            ran: false,
            artifacts: vec![],
        });
    }

    let artifacts = match stage {
        Stage::Synth => run_synth(config, workdir, stage_seed)?,
        Stage::Ingest => run_ingest(config, workdir)?,
        Stage::Label => run_label(config, workdir)?,
        Stage::Features => run_features(config, workdir, stage_seed)?,
        Stage::Train => run_train(config, workdir)?,
        Stage::Evaluate => run_evaluate(config, workdir)?,
        Stage::Ablate => run_ablate(config, workdir)?,
        Stage::Explain => run_explain(config, workdir, explain_request)?,
    };
    manifest::write_manifest(workdir, stage.name(), stage_seed, config, inputs, &artifacts)?;
    Ok(StageOutcome {
        stage: stage.name(),
        ran: true,
        artifacts,
    })
}

/// External inputs hashed into the stage manifest.
fn input_paths_for(stage: Stage, config: &RunConfig, workdir: &Path) -> Vec<PathBuf> {
    let snapshot_files = |dir: &Path| -> Vec<PathBuf> {
        ["business.json", "review.json", "checkin.json", "photo.json"]
            .iter()
            .map(|f| dir.join(f))
            .filter(|p| p.exists())
            .collect()
    };
    match stage {
        Stage::Synth => vec![],
        Stage::Ingest => {
            let mut v = snapshot_files(&config.resolve(workdir, &config.observation_dir));
            v.extend(snapshot_files(&config.resolve(workdir, &config.prediction_dir)));
            v
        }
        _ => stage
            .prerequisites(config)
            .into_iter()
            .map(|rel| workdir.join(rel))
            .filter(|p| p.exists())
            .collect(),
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let bytes =
        std::fs::read(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    Ok(serde_json::from_slice(&bytes)?)
}

fn jsonl<T: Serialize>(items: impl IntoIterator<Item = T>) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    for item in items {
        serde_json::to_writer(&mut out, &item)?;
        out.push(b'\n');
    }
    Ok(out)
}

// ---------------------------------------------------------------- synth

fn run_synth(config: &RunConfig, workdir: &Path, stage_seed: u64) -> Result<Vec<PathBuf>> {
    let mut synth_config = config.synth.clone();
    synth_config.observation_end = config.observation_end;
    synth_config.prediction_end = config.prediction_end;
    let corpus = corpus::synth::generate(&synth_config, stage_seed).map_err(config_error)?;

    let obs_dir = workdir.join("synthetic/observation");
    let pred_dir = workdir.join("synthetic/prediction");
    write_snapshot(&obs_dir, &corpus.observation)?;
    write_snapshot(&pred_dir, &corpus.prediction)?;
    let truth_path = workdir.join("synthetic/truth.jsonl");
    write_atomic(&truth_path, &jsonl(&corpus.truth)?)?;

    let mut artifacts = vec![truth_path];
    for dir in [obs_dir, pred_dir] {
        for f in ["business.json", "review.json", "checkin.json", "photo.json"] {
            artifacts.push(dir.join(f));
        }
    }
    Ok(artifacts)
}

fn config_error(e: bizsurv_core::Error) -> CliError {
    match e {
        bizsurv_core::Error::InvalidConfig(m) => {
            let (field, message) = m.split_once(" must").map_or_else(
                || ("synth".to_string(), m.clone()),
                |(f, rest)| (f.to_string(), format!("must{rest}")),
            );
            CliError::Config { field, message }
        }
        other => CliError::Core(other),
    }
}

// --------------------------------------------------------------- ingest

#[derive(Serialize, Deserialize)]
struct IngestReport {
    observation: corpus::ParseReport,
    prediction: corpus::ParseReport,
}

fn run_ingest(config: &RunConfig, workdir: &Path) -> Result<Vec<PathBuf>> {
    let obs_src = config.resolve(workdir, &config.observation_dir);
    let pred_src = config.resolve(workdir, &config.prediction_dir);
    if !obs_src.join("business.json").exists() {
        return Err(CliError::MissingPrerequisite(obs_src.join("business.json")));
    }
    let (obs, obs_report) = parse_snapshot(&obs_src, config.observation_end)?;
    let (pred, pred_report) = parse_snapshot(&pred_src, config.prediction_end)?;

    let obs_dir = workdir.join("ingest/observation");
    let pred_dir = workdir.join("ingest/prediction");
    write_snapshot(&obs_dir, &obs)?;
    write_snapshot(&pred_dir, &pred)?;
    let report_path = workdir.join("ingest/report.json");
    let report = IngestReport {
        observation: obs_report,
        prediction: pred_report,
    };
    write_atomic(&report_path, serde_json::to_string_pretty(&report)?.as_bytes())?;

    let mut artifacts = vec![report_path];
    for dir in [obs_dir, pred_dir] {
        for f in ["business.json", "review.json", "checkin.json", "photo.json"] {
            artifacts.push(dir.join(f));
        }
    }
    Ok(artifacts)
}

fn load_ingested(config: &RunConfig, workdir: &Path, which: &str) -> Result<Snapshot> {
    let dir = workdir.join("ingest").join(which);
    let as_of = match which {
        "observation" => config.observation_end,
        _ => config.prediction_end,
    };
    let (snapshot, _) = parse_snapshot(&dir, as_of)?;
    Ok(snapshot)
}

// ---------------------------------------------------------------- label

fn run_label(config: &RunConfig, workdir: &Path) -> Result<Vec<PathBuf>> {
    let obs = filter_restaurants(&load_ingested(config, workdir, "observation")?);
    let pred = filter_restaurants(&load_ingested(config, workdir, "prediction")?);
    let (labels, report) = corpus::derive_labels(&obs, &pred)?;

    let labels_path = workdir.join("label/labels.jsonl");
    write_atomic(&labels_path, &jsonl(&labels)?)?;
    let report_path = workdir.join("label/report.json");
    write_atomic(&report_path, serde_json::to_string_pretty(&report)?.as_bytes())?;
    Ok(vec![labels_path, report_path])
}

fn load_labels(workdir: &Path) -> Result<Vec<corpus::LabeledRestaurant>> {
    let path = workdir.join("label/labels.jsonl");
    let content =
        std::fs::read_to_string(&path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let mut labels = Vec::new();
    for line in content.lines() {
        if !line.trim().is_empty() {
            labels.push(serde_json::from_str(line)?);
        }
    }
    Ok(labels)
}

// ------------------------------------------------------------- features

#[derive(Serialize, Deserialize)]
struct FeatureReport {
    population: usize,
    geo: geo::GeoReport,
    attributes: attributes::AttributeReport,
    transitions: usize,
    transitions_unresolved: usize,
    vocabulary_size: usize,
    restaurants_without_reviews: usize,
}

#[derive(Serialize)]
struct PolarityRecord<'a> {
    review_id: &'a str,
    business_id: &'a str,
    stars: u8,
    polarity: bizsurv_core::text::Polarity,
}

fn run_features(config: &RunConfig, workdir: &Path, stage_seed: u64) -> Result<Vec<PathBuf>> {
    let snapshot = load_ingested(config, workdir, "observation")?;
    let population = snapshot.open_restaurant_ids();
    if population.is_empty() {
        return Err(CliError::Other(
            "no open restaurants in the observation snapshot".to_string(),
        ));
    }

    // Geography.
    let neighborhoods = geo::build_neighborhoods_for(&snapshot, &population, config.radius_m);
    let (geo_feats, geo_report) = geo::geo_features(&snapshot, &neighborhoods);
    let geo_table = geo::geo_feature_table(&geo_feats);
    let geo_path = workdir.join("features/geo_features.csv");
    write_table(&geo_table, &geo_path)?;

    // Mobility.
    let max_gap = config.max_gap_days.map(Duration::days);
    let (transitions, unresolved) = mobility::extract_transitions(&snapshot, max_gap);
    let mobility_options = mobility::MobilityOptions {
        flows_within_neighborhood: config.flows_within_neighborhood,
    };
    let mobility_feats =
        mobility::mobility_features(&snapshot, &neighborhoods, &transitions, mobility_options);
    let mobility_table = mobility::mobility_feature_table(&mobility_feats);
    let mobility_path = workdir.join("features/mobility_features.csv");
    write_table(&mobility_table, &mobility_path)?;
    let mut artifacts = vec![geo_path, mobility_path];
    if config.dump_transitions {
        let path = workdir.join("features/transitions.jsonl");
        write_atomic(&path, &jsonl(&transitions)?)?;
        artifacts.push(path);
    }

    // Attributes.
    let (attr_table, attr_report) = attributes::attribute_feature_table(&snapshot, &population);
    let attr_path = workdir.join("features/attribute_features.csv");
    write_table(&attr_table, &attr_path)?;
    let schema_path = workdir.join("features/attribute_schema.json");
    write_atomic(
        &schema_path,
        serde_json::to_string_pretty(&attributes::attribute_schema())?.as_bytes(),
    )?;
    artifacts.push(attr_path);
    artifacts.push(schema_path);

    // Linguistics.
    let vocab = build_corpus_vocabulary(&snapshot, config.vocab_size)?;
    let bow_table = bow_feature_table(&snapshot, &population, &vocab);
    let bow_path = workdir.join("features/bow_features.csv");
    write_table(&bow_table, &bow_path)?;
    let vocab_path = workdir.join("features/vocabulary.json");
    write_atomic(&vocab_path, serde_json::to_string_pretty(&vocab)?.as_bytes())?;
    artifacts.push(bow_path);
    artifacts.push(vocab_path);

    let polarity_records: Vec<PolarityRecord> = snapshot
        .reviews
        .iter()
        .map(|r| PolarityRecord {
            review_id: &r.review_id,
            business_id: &r.business_id,
            stars: r.stars,
            polarity: polarity(r.stars, config.polarity_map),
        })
        .collect();
    let polarity_path = workdir.join("features/review_polarity.jsonl");
    write_atomic(&polarity_path, &jsonl(polarity_records)?)?;
    artifacts.push(polarity_path);

    // Best/worst review selection, seeded per restaurant for tie breaks.
    let by_business = reviews_by_business(&snapshot);
    let mut rng = ChaCha8Rng::seed_from_u64(seed::derive(stage_seed, "extremes"));
    let mut extremes = Vec::new();
    let mut without_reviews = 0usize;
    for id in &population {
        match by_business.get(id.as_str()) {
            Some(reviews) => {
                extremes.push(select_extreme_reviews(id, reviews, &mut rng)?);
            }
            None => without_reviews += 1,
        }
    }
    let extremes_path = workdir.join("features/extreme_reviews.jsonl");
    write_atomic(&extremes_path, &jsonl(&extremes)?)?;
    artifacts.push(extremes_path);

    let report = FeatureReport {
        population: population.len(),
        geo: geo_report,
        attributes: attr_report,
        transitions: transitions.len(),
        transitions_unresolved: unresolved,
        vocabulary_size: vocab.len(),
        restaurants_without_reviews: without_reviews,
    };
    let report_path = workdir.join("features/report.json");
    write_atomic(&report_path, serde_json::to_string_pretty(&report)?.as_bytes())?;
    artifacts.push(report_path);
    Ok(artifacts)
}

fn write_table(table: &FeatureTable, path: &Path) -> Result<()> {
    let parent = path.parent().unwrap_or_else(|| Path::new("."));
    std::fs::create_dir_all(parent)
        .map_err(|e| CliError::Io(format!("{}: {e}", parent.display())))?;
    let tmp = path.with_extension("csv.tmp");
    table.write_csv(&tmp)?;
    std::fs::rename(&tmp, path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    Ok(())
}

fn family_of(name: &str) -> FeatureFamily {
    match name {
        "geo" => FeatureFamily::Geography,
        "mobility" => FeatureFamily::Mobility,
        "attributes" => FeatureFamily::Attributes,
        _ => FeatureFamily::Linguistic,
    }
}

fn table_file(family: FeatureFamily) -> &'static str {
    match family {
        FeatureFamily::Geography => "geo_features.csv",
        FeatureFamily::Mobility => "mobility_features.csv",
        FeatureFamily::Attributes => "attribute_features.csv",
        FeatureFamily::Linguistic => "bow_features.csv",
    }
}

fn load_table(workdir: &Path, family: FeatureFamily) -> Result<FeatureTable> {
    let path = workdir.join("features").join(table_file(family));
    if !path.exists() {
        return Err(CliError::MissingPrerequisite(
            Path::new("features").join(table_file(family)),
        ));
    }
    Ok(FeatureTable::read_csv(&path, family.table_name())?)
}

// ---------------------------------------------------------------- train

#[derive(Serialize, Deserialize)]
pub struct SplitRecord {
    pub task: Task,
    pub train_ids: Vec<String>,
    pub test_ids: Vec<String>,
}

/// Assemble the survival dataset for the configured feature families.
fn survival_dataset(config: &RunConfig, workdir: &Path) -> Result<Dataset> {
    let labels = label_map(&load_labels(workdir)?);
    let tables: Vec<FeatureTable> = config
        .families
        .iter()
        .map(|f| load_table(workdir, family_of(f)))
        .collect::<Result<_>>()?;
    let refs: Vec<&FeatureTable> = tables.iter().collect();
    let (dataset, _) = assemble_dataset(&refs, &labels)?;
    Ok(dataset)
}

fn sentiment_task_dataset(config: &RunConfig, workdir: &Path) -> Result<Dataset> {
    let snapshot = filter_restaurants(&load_ingested(config, workdir, "observation")?);
    let mut vocab: Vocabulary = read_json(&workdir.join("features/vocabulary.json"))?;
    vocab.rebuild_index();
    Ok(sentiment_dataset(&snapshot, &vocab, config.polarity_map)?)
}

fn run_train(config: &RunConfig, workdir: &Path) -> Result<Vec<PathBuf>> {
    let dataset = match config.task {
        Task::Survival => survival_dataset(config, workdir)?,
        Task::Sentiment => sentiment_task_dataset(config, workdir)?,
    };
    let split_seed = seed::derive(config.seed, "train:split");
    let (train, test) = stratified_split(&dataset, config.test_fraction, split_seed)?;

    // SMOTE balances the survival task's dead minority; the sentiment
    // task's polarity classes are near-balanced and skip it.
    let train = match config.task {
        Task::Survival => {
            let mut rng =
                ChaCha8Rng::seed_from_u64(seed::derive(config.seed, "train:smote"));
            let (augmented, _) = oversample(&train, &config.smote, &mut rng)?;
            augmented
        }
        Task::Sentiment => train,
    };

    let model_seed = seed::derive(config.seed, "train:model");
    let model = train_classifier(config.model_kind, &train, &config.hyper, model_seed)?;
    let model_path = workdir.join("train/model.bin");
    std::fs::create_dir_all(model_path.parent().unwrap())
        .map_err(|e| CliError::Io(e.to_string()))?;
    let tmp = model_path.with_extension("bin.tmp");
    model.save(&tmp)?;
    std::fs::rename(&tmp, &model_path).map_err(|e| CliError::Io(e.to_string()))?;

    let split = SplitRecord {
        task: config.task,
        train_ids: train
            .ids
            .iter()
            .filter(|id| !id.starts_with("smote-"))
            .cloned()
            .collect(),
        test_ids: test.ids.clone(),
    };
    let split_path = workdir.join("train/split.json");
    write_atomic(&split_path, serde_json::to_string_pretty(&split)?.as_bytes())?;
    Ok(vec![model_path, split_path])
}

// ------------------------------------------------------------- evaluate

#[derive(Serialize)]
struct EvalArtifact<'a> {
    task: Task,
    model_kind: bizsurv_core::learn::ModelKind,
    auc: f64,
    positives: usize,
    negatives: usize,
    train_rows: usize,
    test_rows: usize,
    protocol: &'static str,
    roc_points: &'a [(f64, f64)],
    config: &'a RunConfig,
}

fn run_evaluate(config: &RunConfig, workdir: &Path) -> Result<Vec<PathBuf>> {
    let model = TrainedModel::load(&workdir.join("train/model.bin"))?;
    let split: SplitRecord = read_json(&workdir.join("train/split.json"))?;
    let dataset = match config.task {
        Task::Survival => survival_dataset(config, workdir)?,
        Task::Sentiment => sentiment_task_dataset(config, workdir)?,
    };
    let index: BTreeMap<&str, usize> = dataset
        .ids
        .iter()
        .enumerate()
        .map(|(i, id)| (id.as_str(), i))
        .collect();
    let test_idx: Vec<usize> = split
        .test_ids
        .iter()
        .filter_map(|id| index.get(id.as_str()).copied())
        .collect();
    if test_idx.len() != split.test_ids.len() {
        return Err(CliError::Other(
            "test fold ids no longer resolve against the feature tables".to_string(),
        ));
    }
    let test = dataset.subset(&test_idx, Some(SplitTag::Test));
    let scores = model.predict_dataset(&test)?;
    let report = roc_auc(&scores, &test.y)?;

    let artifact = EvalArtifact {
        task: config.task,
        model_kind: model.kind,
        auc: report.auc,
        positives: report.positives,
        negatives: report.negatives,
        train_rows: split.train_ids.len(),
        test_rows: split.test_ids.len(),
        protocol: "stratified split; SMOTE on the training fold only (survival task)",
        roc_points: &report.roc_points,
        config,
    };
    let path = workdir.join("evaluate/eval_report.json");
    write_atomic(&path, serde_json::to_string_pretty(&artifact)?.as_bytes())?;
    Ok(vec![path])
}

// --------------------------------------------------------------- ablate

#[derive(Serialize)]
struct AblateReport<'a> {
    warnings: &'a [String],
    protocol: &'a str,
    config: &'a RunConfig,
}

fn run_ablate(config: &RunConfig, workdir: &Path) -> Result<Vec<PathBuf>> {
    let labels = label_map(&load_labels(workdir)?);
    let mut tables = BTreeMap::new();
    for family in FeatureFamily::all() {
        match load_table(workdir, family) {
            Ok(t) => {
                tables.insert(family, t);
            }
            Err(CliError::MissingPrerequisite(_)) => {}
            Err(e) => return Err(e),
        }
    }
    let ablation_config = AblationConfig {
        test_fraction: config.test_fraction,
        smote: config.smote,
        hyper: config.hyper,
    };
    let table = run_ablation(&tables, &labels, &ablation_config, config.seed)?;
    let csv_path = workdir.join("ablate/ablation.csv");
    std::fs::create_dir_all(csv_path.parent().unwrap())
        .map_err(|e| CliError::Io(e.to_string()))?;
    write_atomic(&csv_path, table.to_csv_string().as_bytes())?;
    for warning in &table.warnings {
        eprintln!("warning: {warning}");
    }
    let report = AblateReport {
        warnings: &table.warnings,
        protocol: &table.protocol,
        config,
    };
    let report_path = workdir.join("ablate/report.json");
    write_atomic(&report_path, serde_json::to_string_pretty(&report)?.as_bytes())?;
    Ok(vec![csv_path, report_path])
}

// -------------------------------------------------------------- explain

fn run_explain(
    config: &RunConfig,
    workdir: &Path,
    request: Option<&ExplainRequest>,
) -> Result<Vec<PathBuf>> {
    let request = request.cloned().unwrap_or_default();
    let model_path = request
        .model_path
        .clone()
        .unwrap_or_else(|| workdir.join("train/model.bin"));
    let model = TrainedModel::load(&model_path)?;
    let split: SplitRecord = read_json(&workdir.join("train/split.json"))?;
    let format = RenderFormat::from_str(request.format.as_deref().unwrap_or("json"))?;
    let explain_seed = request
        .seed
        .unwrap_or_else(|| seed::derive(config.seed, "explain"));

    match config.task {
        Task::Survival => {
            let business_id = request.business_id.clone().ok_or_else(|| CliError::Config {
                field: "explain.business_id".to_string(),
                message: "--business-id is required for survival explanations".to_string(),
            })?;
            let dataset = survival_dataset(config, workdir)?;
            let index: BTreeMap<&str, usize> = dataset
                .ids
                .iter()
                .enumerate()
                .map(|(i, id)| (id.as_str(), i))
                .collect();
            let Some(&row) = index.get(business_id.as_str()) else {
                return Err(CliError::Other(format!(
                    "business {business_id:?} is not in the labeled feature population"
                )));
            };
            let train_idx: Vec<usize> = split
                .train_ids
                .iter()
                .filter_map(|id| index.get(id.as_str()).copied())
                .collect();
            let background = dataset.subset(&train_idx, Some(SplitTag::Train));
            let explainer_config = TabularExplainerConfig {
                top_k: request.top_k.unwrap_or(config.explain.top_k),
                num_samples: request.num_samples.unwrap_or(config.explain.num_samples),
                kernel_width: config.explain.kernel_width,
                ridge_alpha: config.explain.ridge_alpha,
                seed: explain_seed,
            };
            let instance = dataset.x.row(row).to_vec();
            let explanation = explain_tabular(
                &model,
                &business_id,
                &instance,
                &background,
                &explainer_config,
            )?;
            let family_tag = config.families.join("+");
            let json_path = workdir
                .join("explain")
                .join(format!("{business_id}.{family_tag}.explanation.json"));
            write_atomic(
                &json_path,
                render_tabular(&explanation, RenderFormat::Json)?.as_bytes(),
            )?;
            let mut artifacts = vec![json_path];
            if format == RenderFormat::Html {
                let html_path = workdir
                    .join("explain")
                    .join(format!("{business_id}.{family_tag}.explanation.html"));
                write_atomic(&html_path, render_tabular(&explanation, format)?.as_bytes())?;
                artifacts.push(html_path);
            }
            Ok(artifacts)
        }
        Task::Sentiment => {
            let review_id = request.review_id.clone().ok_or_else(|| CliError::Config {
                field: "explain.review_id".to_string(),
                message: "--review-id is required for sentiment explanations".to_string(),
            })?;
            let snapshot =
                filter_restaurants(&load_ingested(config, workdir, "observation")?);
            let Some(review) = snapshot.reviews.iter().find(|r| r.review_id == review_id)
            else {
                return Err(CliError::Other(format!(
                    "review {review_id:?} not found in the observation snapshot"
                )));
            };
            let mut vocab: Vocabulary = read_json(&workdir.join("features/vocabulary.json"))?;
            vocab.rebuild_index();
            let explainer_config = TextExplainerConfig {
                top_k: request.top_k.unwrap_or(config.explain.top_k),
                num_samples: request
                    .num_samples
                    .unwrap_or(config.explain.text_num_samples),
                kernel_width: config.explain.text_kernel_width,
                ridge_alpha: config.explain.ridge_alpha,
                seed: explain_seed,
            };
            let explanation =
                explain_text(&model, &vocab, &review_id, &review.text, &explainer_config)?;
            let json_path = workdir
                .join("explain")
                .join(format!("{review_id}.text.explanation.json"));
            write_atomic(
                &json_path,
                render_text(&explanation, &review.text, RenderFormat::Json)?.as_bytes(),
            )?;
            let mut artifacts = vec![json_path];
            if format == RenderFormat::Html {
                let html_path = workdir
                    .join("explain")
                    .join(format!("{review_id}.text.explanation.html"));
                write_atomic(
                    &html_path,
                    render_text(&explanation, &review.text, format)?.as_bytes(),
                )?;
                artifacts.push(html_path);
            }
            Ok(artifacts)
        }
    }
}
