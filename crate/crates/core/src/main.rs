use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use crowd_ocean::ingest::write_clip;
use crowd_ocean::pipeline::{self, PipelineConfig, ScoresDocument, TrainingSummary};
use crowd_ocean::socialization::MlpWeights;
use crowd_ocean::synth::{generate, ScenarioKind, ScenarioSpec};

#[derive(Parser)]
#[command(
    name = "crowd-ocean",
    version,
    about = "Big-Five personality estimates from pedestrian trajectories"
)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GlobalArgs {
    /// TOML file whose keys mirror the pipeline configuration fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    model: Option<PathBuf>,
    #[arg(long, global = true)]
    baselines: Option<PathBuf>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for clip analysis and training; 0 uses every core.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Count the third questionnaire item toward Extraversion.
    #[arg(long, global = true, value_name = "BOOL", action = clap::ArgAction::Set)]
    strict_paper: Option<bool>,
    /// Log progress to stderr.
    #[arg(short, long, global = true)]
    verbose: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Write synthetic trajectory clips with their metadata sidecars.
    Synth(SynthArgs),
    /// Fit the socialization classifier on a synthetic labeled set.
    Train,
    /// Score trajectory clips with a trained model.
    Analyze { clips: Vec<PathBuf> },
    /// Compare country scores from `analyze` with literature baselines.
    Compare {
        /// Defaults to scores.json in the output directory.
        #[arg(long)]
        scores: Option<PathBuf>,
    },
    /// Analyze clips and, given baselines, write the comparison report.
    Pipeline {
        clips: Vec<PathBuf>,
        /// Train and save the model first instead of loading it.
        #[arg(long)]
        train: bool,
    },
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, default_value = "coherent_group", value_parser = parse_kind)]
    scenario: ScenarioKind,
    #[arg(long, default_value_t = 8)]
    agents: usize,
    #[arg(long, default_value_t = 300)]
    frames: usize,
    /// Meters.
    #[arg(long, default_value_t = 2.0)]
    spacing: f64,
    /// Meters per frame.
    #[arg(long, default_value_t = 0.05)]
    speed: f64,
    /// Heading noise standard deviation, degrees.
    #[arg(long, default_value_t = 0.0)]
    jitter: f64,
    #[arg(long, default_value = "BR")]
    country: String,
    #[arg(long, default_value = "synthetic")]
    video_id: String,
    /// Number of clips; clip i uses seed + i and gets an index suffix.
    #[arg(long, default_value_t = 1)]
    count: usize,
}

fn parse_kind(s: &str) -> std::result::Result<ScenarioKind, String> {
    serde_json::from_value(serde_json::Value::String(s.to_owned()))
        .map_err(|_| "expected coherent_group, random_walk, lone_among_crowd or mixed".to_owned())
}

/// Defaults, then the config file, then flags.
fn resolve_config(global: &GlobalArgs) -> Result<PipelineConfig> {
    let mut config = match &global.config {
        Some(path) => PipelineConfig::load(path)?,
        None => PipelineConfig::default(),
    };
    if let Some(seed) = global.seed {
        config.seed = seed;
    }
    if let Some(jobs) = global.jobs {
        config.jobs = jobs;
    }
    if let Some(strict) = global.strict_paper {
        config.strict_paper = strict;
    }
    if global.model.is_some() {
        config.paths.model = global.model.clone();
    }
    if global.baselines.is_some() {
        config.paths.baselines = global.baselines.clone();
    }
    if global.out.is_some() {
        config.paths.out = global.out.clone();
    }
    config.validate()?;
    Ok(config)
}

fn out_dir(config: &PipelineConfig) -> PathBuf {
    config
        .paths
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn model_path(config: &PipelineConfig) -> PathBuf {
    config
        .paths
        .model
        .clone()
        .unwrap_or_else(|| out_dir(config).join("model.json"))
}

fn clip_paths(given: &[PathBuf], config: &PipelineConfig) -> Vec<PathBuf> {
    if given.is_empty() {
        config.paths.clips.clone()
    } else {
        given.to_vec()
    }
}

fn synth(args: &SynthArgs, config: &PipelineConfig) -> Result<()> {
    let out = out_dir(config);
    for i in 0..args.count {
        let spec = ScenarioSpec {
            kind: args.scenario,
            agent_count: args.agents,
            frames: args.frames,
            base_speed: args.speed,
            spacing: args.spacing,
            heading_jitter: args.jitter,
            seed: config.seed.wrapping_add(i as u64),
            video_id: if args.count == 1 {
                args.video_id.clone()
            } else {
                format!("{}_{i:03}", args.video_id)
            },
            country: args.country.clone(),
            fps: 25.0,
        };
        let path = write_clip(&generate(&spec)?, &out)?;
        println!("{}", path.display());
    }
    Ok(())
}

fn train(config: &PipelineConfig, model: &Path) -> Result<()> {
    let outcome = pipeline::train_model(config)?;
    let summary = TrainingSummary::new(&outcome, config.training_set.samples, config.seed);
    pipeline::write_file(model, &outcome.weights.to_json())?;
    let report = serde_json::to_string_pretty(&summary)? + "\n";
    pipeline::write_file(&out_dir(config).join("training_report.json"), &report)?;
    println!(
        "validation accuracy {:.4} ({} iterations), model written to {}",
        outcome.validation.accuracy,
        outcome.iterations,
        model.display()
    );
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let config = resolve_config(&cli.global)?;
    if config.jobs > 0 {
        // the global pool also bounds the parallel gradient evaluation
        rayon::ThreadPoolBuilder::new()
            .num_threads(config.jobs)
            .build_global()
            .context("configuring worker threads")?;
    }
    let out = out_dir(&config);
    match &cli.command {
        Command::Synth(args) => synth(args, &config),
        Command::Train => train(&config, &model_path(&config)),
        Command::Analyze { clips } => {
            let model = MlpWeights::load(&model_path(&config))?;
            let scores = pipeline::analyze_paths(&clip_paths(clips, &config), &model, &config)?;
            pipeline::write_scores(&scores, &out)?;
            println!(
                "scored {} videos, {} individuals",
                scores.videos.len(),
                scores.individuals.len()
            );
            Ok(())
        }
        Command::Compare { scores } => {
            let scores_path = scores
                .clone()
                .unwrap_or_else(|| out.join(pipeline::SCORES_JSON));
            let text =
                std::fs::read_to_string(&scores_path).map_err(|e| crowd_ocean::Error::Io {
                    context: format!("reading scores {}", scores_path.display()),
                    source: e,
                })?;
            let doc = ScoresDocument::from_json(&text)?;
            let baselines = config
                .paths
                .baselines
                .clone()
                .ok_or_else(|| crowd_ocean::Error::Usage("compare needs --baselines".into()))?;
            let (errors, artifacts) = pipeline::compare_with_baselines(&doc, &baselines)?;
            pipeline::write_report(&artifacts, &out)?;
            print_error_summary(errors.overall_mean_percent_error);
            Ok(())
        }
        Command::Pipeline { clips, train: fit } => {
            let model = model_path(&config);
            if *fit {
                train(&config, &model)?;
            }
            let (scores, errors) = pipeline::run_pipeline(
                &config,
                &clip_paths(clips, &config),
                &model,
                config.paths.baselines.as_deref(),
                &out,
            )?;
            println!(
                "scored {} videos, {} individuals",
                scores.videos.len(),
                scores.individuals.len()
            );
            if let Some(errors) = errors {
                print_error_summary(errors.overall_mean_percent_error);
            }
            Ok(())
        }
    }
}

fn print_error_summary(overall: Option<f64>) {
    match overall {
        Some(e) => println!("overall mean percent error {e:.2}%"),
        None => println!("no country had a usable baseline"),
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    err.chain()
        .find_map(|e| e.downcast_ref::<crowd_ocean::Error>())
        .map_or(3, |e| e.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let level = if cli.global.verbose { "info" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
