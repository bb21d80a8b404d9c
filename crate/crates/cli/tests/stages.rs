//! Stage-runner semantics: dependency checks, no-op reruns, exit codes,
//! locking, and explain outputs.

use std::path::Path;

use bizsurv_cli::{run_stage, CliError, ExplainRequest, RunConfig, Stage};
use bizsurv_core::corpus::synth::{PlantedSignal, SynthConfig};

fn small_config() -> RunConfig {
    RunConfig {
        synth: SynthConfig {
            restaurants: 80,
            other_businesses: 40,
            users: 30,
            signal: PlantedSignal::Attributes { weight: 2.0 },
            ..SynthConfig::default()
        },
        ..RunConfig::default()
    }
}

fn run(stage: Stage, config: &RunConfig, workdir: &Path) -> bizsurv_cli::StageOutcome {
    run_stage(stage, config, workdir, None).unwrap_or_else(|e| panic!("{}: {e}", stage.name()))
}

#[test]
fn missing_prerequisite_names_first_artifact_and_maps_to_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_config();
    let err = run_stage(Stage::Train, &config, dir.path(), None).unwrap_err();
    match &err {
        CliError::MissingPrerequisite(path) => {
            assert_eq!(path, Path::new("features/geo_features.csv"));
        }
        other => panic!("unexpected error {other:?}"),
    }
    assert_eq!(err.exit_code(), 2);
}

#[test]
fn invalid_config_maps_to_exit_3_with_field_path() {
    let config = RunConfig {
        vocab_size: 0,
        ..small_config()
    };
    let dir = tempfile::tempdir().unwrap();
    let err = run_stage(Stage::Synth, &config, dir.path(), None).unwrap_err();
    assert_eq!(err.exit_code(), 3);
    assert!(err.to_string().contains("vocab_size"));
}

#[test]
fn rerun_with_unchanged_inputs_is_a_noop() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_config();
    assert!(run(Stage::Synth, &config, dir.path()).ran);
    assert!(!run(Stage::Synth, &config, dir.path()).ran);
    assert!(run(Stage::Ingest, &config, dir.path()).ran);
    assert!(!run(Stage::Ingest, &config, dir.path()).ran);

    // A changed master seed invalidates the stage.
    let reseeded = RunConfig {
        seed: config.seed + 1,
        ..config.clone()
    };
    assert!(run(Stage::Synth, &reseeded, dir.path()).ran);
}

#[test]
fn lock_file_blocks_concurrent_stages_and_clears_on_drop() {
    let dir = tempfile::tempdir().unwrap();
    let lock_path = dir.path().join(".bizsurv.lock");
    std::fs::write(&lock_path, "held").unwrap();
    let err = run_stage(Stage::Synth, &small_config(), dir.path(), None).unwrap_err();
    assert!(matches!(err, CliError::Locked(_)));
    std::fs::remove_file(&lock_path).unwrap();
    run(Stage::Synth, &small_config(), dir.path());
    assert!(!lock_path.exists(), "lock must clear after the stage");
}

#[test]
fn full_survival_pipeline_with_explanation() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_config();
    for stage in [
        Stage::Synth,
        Stage::Ingest,
        Stage::Label,
        Stage::Features,
        Stage::Train,
        Stage::Evaluate,
    ] {
        assert!(run(stage, &config, dir.path()).ran, "{}", stage.name());
    }
    let eval: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("evaluate/eval_report.json")).unwrap())
            .unwrap();
    let auc = eval["auc"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&auc));
    // Config echoed verbatim into the report.
    assert_eq!(eval["config"]["radius_m"], 500.0);

    let labels = std::fs::read_to_string(dir.path().join("label/labels.jsonl")).unwrap();
    let first: serde_json::Value = serde_json::from_str(labels.lines().next().unwrap()).unwrap();
    let business_id = first["business_id"].as_str().unwrap().to_string();
    let request = ExplainRequest {
        business_id: Some(business_id.clone()),
        format: Some("html".to_string()),
        num_samples: Some(500),
        ..ExplainRequest::default()
    };
    let outcome = run_stage(Stage::Explain, &config, dir.path(), Some(&request)).unwrap();
    assert!(outcome.ran);
    let json_path = dir
        .path()
        .join("explain")
        .join(format!("{business_id}.geo+mobility.explanation.json"));
    assert!(json_path.exists());
    let explanation: serde_json::Value =
        serde_json::from_slice(&std::fs::read(&json_path).unwrap()).unwrap();
    assert_eq!(explanation["entries"].as_array().unwrap().len(), 10);
    assert!(json_path.with_extension("html").exists());
}

#[test]
fn ablation_artifact_has_eleven_rows_and_two_model_columns() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_config();
    for stage in [Stage::Synth, Stage::Ingest, Stage::Label, Stage::Features, Stage::Ablate] {
        run(stage, &config, dir.path());
    }
    let csv = std::fs::read_to_string(dir.path().join("ablate/ablation.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "features,gbdt,mlp");
    assert_eq!(lines.len(), 12);
    let row_labels: Vec<&str> = lines[1..].iter().map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(
        row_labels,
        vec!["G", "U", "A", "L", "GU", "ALL", "-GU", "-G", "-U", "-A", "-L"]
    );
    for line in &lines[1..] {
        assert_eq!(line.split(',').count(), 3);
    }
}

/// Optional check against the real Yelp 2017/2019 dumps; set
/// BIZSURV_YELP_2017 and BIZSURV_YELP_2019 to the snapshot directories and
/// run with --ignored. Expected counts: 36,190 open restaurants in 2017,
/// of which 31,546 survived and 4,644 died by the end of 2019.
#[test]
#[ignore = "requires the real Yelp dataset dumps"]
fn real_yelp_label_counts() {
    let obs_dir = std::env::var("BIZSURV_YELP_2017").expect("BIZSURV_YELP_2017 not set");
    let pred_dir = std::env::var("BIZSURV_YELP_2019").expect("BIZSURV_YELP_2019 not set");
    let obs = bizsurv_core::corpus::parse_snapshot(
        Path::new(&obs_dir),
        chrono::NaiveDate::from_ymd_opt(2017, 12, 31).unwrap(),
    )
    .unwrap()
    .0;
    let (pred, pred_report) = bizsurv_core::corpus::parse_snapshot(
        Path::new(&pred_dir),
        chrono::NaiveDate::from_ymd_opt(2019, 12, 31).unwrap(),
    )
    .unwrap();
    // 2019 dump totals.
    assert_eq!(pred_report.businesses.parsed, 209_393);
    assert_eq!(pred_report.reviews.parsed, 7_734_455);
    let obs = bizsurv_core::corpus::filter_restaurants(&obs);
    let pred = bizsurv_core::corpus::filter_restaurants(&pred);
    let (_, report) = bizsurv_core::corpus::derive_labels(&obs, &pred).unwrap();
    assert_eq!(report.considered, 36_190);
    assert_eq!(report.survived, 31_546);
    assert_eq!(report.dead, 4_644);
}
