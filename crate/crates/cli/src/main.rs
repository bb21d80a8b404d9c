use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use bizsurv_cli::manifest::{MANIFEST_SCHEMA_VERSION, TOOL_VERSION};
use bizsurv_cli::{resolve_workdir, run_stage, ExplainRequest, RunConfig, Stage};

/// Restaurant survival prediction pipeline: snapshot labeling, feature
/// extraction, imbalance-aware training, ablation, and local explanations.
///
/// Environment overrides: BIZSURV_SEED, BIZSURV_WORKDIR.
#[derive(Parser)]
#[command(name = "bizsurv", disable_version_flag = true)]
struct Cli {
    /// JSON run configuration file (defaults are used when omitted).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Working directory for stage artifacts (default: current directory).
    #[arg(long, global = true)]
    workdir: Option<PathBuf>,

    /// Master seed; every stage derives its own seed from it.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Print tool and manifest schema versions.
    #[arg(long)]
    version: bool,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a seeded synthetic snapshot pair with planted signal.
    Synth,
    /// Parse and canonicalize the observation/prediction snapshots.
    Ingest,
    /// Derive survival labels for restaurants open at observation end.
    Label,
    /// Compute all four feature-family tables.
    Features,
    /// Train the configured classifier on the configured task.
    Train,
    /// Score the held-out fold and write the evaluation report.
    Evaluate,
    /// Run the eleven-row feature-ablation grid (GBDT and MLP).
    Ablate,
    /// Explain one prediction of the trained model.
    Explain(ExplainArgs),
}

#[derive(Args)]
struct ExplainArgs {
    /// Restaurant to explain (survival task).
    #[arg(long)]
    business_id: Option<String>,

    /// Review to explain (sentiment task).
    #[arg(long)]
    review_id: Option<String>,

    /// Model artifact; defaults to train/model.bin in the workdir.
    #[arg(long)]
    model: Option<PathBuf>,

    /// Number of top features to report.
    #[arg(long)]
    top_k: Option<usize>,

    /// Number of perturbation samples.
    #[arg(long)]
    samples: Option<usize>,

    /// Explainer seed (defaults to a derivation of the master seed).
    #[arg(long)]
    seed: Option<u64>,

    /// Output format: json (always written) or html (adds a report page).
    #[arg(long, default_value = "json")]
    format: String,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.version {
        println!("bizsurv {TOOL_VERSION} (manifest schema v{MANIFEST_SCHEMA_VERSION})");
        return ExitCode::SUCCESS;
    }
    let Some(command) = cli.command else {
        eprintln!("error: no subcommand given; see --help");
        return ExitCode::from(2);
    };

    let workdir = resolve_workdir(cli.workdir);
    let config = match RunConfig::load(cli.config.as_deref(), cli.seed) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };

    let (stage, explain_request) = match command {
        Command::Synth => (Stage::Synth, None),
        Command::Ingest => (Stage::Ingest, None),
        Command::Label => (Stage::Label, None),
        Command::Features => (Stage::Features, None),
        Command::Train => (Stage::Train, None),
        Command::Evaluate => (Stage::Evaluate, None),
        Command::Ablate => (Stage::Ablate, None),
        Command::Explain(args) => (
            Stage::Explain,
            Some(ExplainRequest {
                business_id: args.business_id,
                review_id: args.review_id,
                model_path: args.model,
                top_k: args.top_k,
                num_samples: args.samples,
                seed: args.seed,
                format: Some(args.format),
            }),
        ),
    };

    match run_stage(stage, &config, &workdir, explain_request.as_ref()) {
        Ok(outcome) => {
            if outcome.ran {
                println!("{}: ok ({} artifacts)", outcome.stage, outcome.artifacts.len());
                for artifact in &outcome.artifacts {
                    println!("  {}", artifact.display());
                }
            } else {
                println!("{}: up to date (no-op)", outcome.stage);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
