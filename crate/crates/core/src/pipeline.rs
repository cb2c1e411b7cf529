//! End-to-end wiring: clip → features → socialization → items → OCEAN,
//! then country aggregation and the baseline comparison.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{compare, emit_report, load_baselines, ErrorReport, ReportArtifacts};
use crate::error::{Error, Result};
use crate::features::{
    extract_features, summarize, CollectivityParams, FeatureFrame, FeatureParams, FeatureSummary,
};
use crate::ingest::{
    load_clip, AgentId, ValidationConfig, ValidationReport, VideoClip, DEFAULT_GAP_THRESHOLD,
};
use crate::ocean::{
    aggregate_country, aggregate_video, answer_items, quantize_items, score_dimensions,
    CountryScore, DimensionWeights, GuardParams, OceanScore, QuantizedItems, RawItems, ScoreRow,
    VideoScore,
};
use crate::socialization::{scg_train, MlpWeights, TrainConfig, TrainOutcome};
use crate::synth::{training_set, TrainingSetSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub social_radius: f64,
    pub collectivity: CollectivityParams,
    pub guards: GuardParams,
    pub dimension_weights: DimensionWeights,
    pub strict_paper: bool,
    pub seed: u64,
    pub gap_threshold: u32,
    pub jobs: usize,
    pub train: TrainConfig,
    pub training_set: TrainingSetSpec,
    pub paths: PathsConfig,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PathsConfig {
    pub clips: Vec<PathBuf>,
    pub model: Option<PathBuf>,
    pub baselines: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            social_radius: crate::features::SOCIAL_SPACE_RADIUS,
            collectivity: CollectivityParams::default(),
            guards: GuardParams::default(),
            dimension_weights: DimensionWeights::default(),
            strict_paper: true,
            seed: 0,
            gap_threshold: DEFAULT_GAP_THRESHOLD,
            jobs: 0,
            train: TrainConfig::default(),
            training_set: TrainingSetSpec::default(),
            paths: PathsConfig::default(),
        }
    }
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(format!("config file: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::io(format!("reading config {}", path.display()), e))?;
        Self::from_toml(&text)
    }

    pub fn feature_params(&self) -> FeatureParams {
        FeatureParams {
            social_radius: self.social_radius,
            collectivity: self.collectivity,
        }
    }

    pub fn validation(&self) -> ValidationConfig {
        ValidationConfig {
            gap_threshold: self.gap_threshold,
            ..ValidationConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.feature_params().validate()?;
        self.guards.validate()?;
        self.dimension_weights.validate()?;
        self.train.validate()
    }
}

/// Generates the synthetic training set and fits the classifier; the
/// top-level seed drives the split and the weight initialization.
pub fn train_model(config: &PipelineConfig) -> Result<TrainOutcome> {
    config.validate()?;
    let samples = training_set(&config.training_set, &config.feature_params())?;
    let social = samples.iter().filter(|s| s.label).count();
    log::info!("training set: {} samples, {} social", samples.len(), social);
    scg_train(
        &samples,
        &TrainConfig {
            seed: config.seed,
            ..config.train
        },
    )
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrainingSummary {
    pub samples: usize,
    pub seed: u64,
    pub iterations: usize,
    pub converged: bool,
    pub initial_loss: f64,
    pub final_loss: f64,
    pub training: crate::socialization::EvalReport,
    pub validation: crate::socialization::EvalReport,
}

impl TrainingSummary {
    pub fn new(outcome: &TrainOutcome, samples: usize, seed: u64) -> Self {
        Self {
            samples,
            seed,
            iterations: outcome.iterations,
            converged: outcome.converged,
            initial_loss: outcome.loss_history.first().copied().unwrap_or(f64::NAN),
            final_loss: outcome.loss_history.last().copied().unwrap_or(f64::NAN),
            training: outcome.training,
            validation: outcome.validation,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndividualResult {
    pub agent_id: AgentId,
    pub summary: FeatureSummary,
    pub raw_items: RawItems,
    pub quantized_items: QuantizedItems,
    pub score: OceanScore,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClipAnalysis {
    pub video: VideoScore,
    pub individuals: Vec<IndividualResult>,
    pub frames: Vec<FeatureFrame>,
}

/// Scores every agent of one (validated, metric) clip and the clip itself.
pub fn analyze_clip(
    clip: &VideoClip,
    model: &MlpWeights,
    config: &PipelineConfig,
) -> Result<ClipAnalysis> {
    let frames = extract_features(clip, &config.feature_params())?;
    let context = |e: Error| match e {
        Error::Input(m) => Error::Input(format!("video {}: {m}", clip.meta.video_id)),
        other => other,
    };

    let mut by_agent: BTreeMap<AgentId, Vec<FeatureFrame>> = BTreeMap::new();
    for f in &frames {
        by_agent.entry(f.agent_id).or_default().push(*f);
    }

    let mut summaries = Vec::with_capacity(by_agent.len());
    for (agent_id, agent_frames) in &by_agent {
        let socialization = agent_frames
            .iter()
            .map(|f| {
                model
                    .predict_socialization(&f.neighborhood, f.collectivity)
                    .map(|s| s.level)
                    .map_err(|e| match e {
                        Error::Input(m) => {
                            Error::Input(format!("agent {agent_id} frame {}: {m}", f.frame))
                        }
                        other => other,
                    })
            })
            .collect::<Result<Vec<f64>>>()
            .map_err(context)?;
        summaries.push(summarize(agent_frames, &socialization)?);
    }

    let raw: Vec<RawItems> = summaries
        .iter()
        .map(|s| answer_items(s, &config.guards))
        .collect();
    let quantized = quantize_items(&raw);
    let individuals: Vec<IndividualResult> = summaries
        .into_iter()
        .zip(raw)
        .zip(quantized)
        .map(|((summary, raw_items), quantized_items)| IndividualResult {
            agent_id: summary.agent_id,
            score: score_dimensions(
                &quantized_items,
                &config.dimension_weights,
                config.strict_paper,
            ),
            summary,
            raw_items,
            quantized_items,
        })
        .collect();

    let scores: Vec<OceanScore> = individuals.iter().map(|i| i.score).collect();
    let video = VideoScore {
        video_id: clip.meta.video_id.clone(),
        country: clip.meta.country.clone(),
        individuals: individuals.len(),
        score: aggregate_video(&scores)?,
    };
    Ok(ClipAnalysis {
        video,
        individuals,
        frames,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoresDocument {
    pub individuals: Vec<ScoreRow>,
    pub videos: Vec<VideoScore>,
    pub countries: Vec<CountryScore>,
    pub dropped: BTreeMap<String, ValidationReport>,
}

impl ScoresDocument {
    pub fn rows(&self) -> Vec<ScoreRow> {
        let mut rows = self.individuals.clone();
        rows.extend(self.videos.iter().map(|v| ScoreRow {
            id: v.video_id.clone(),
            country: v.country.clone(),
            score: v.score,
        }));
        rows.extend(self.countries.iter().map(|c| ScoreRow {
            id: c.country.clone(),
            country: c.country.clone(),
            score: c.score,
        }));
        rows
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("scores are always serializable");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Input(format!("scores file: {e}")))
    }
}

fn thread_pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {jobs} worker threads: {e}")))
}

/// Loads, validates and scores every clip (in parallel up to
/// `config.jobs`, 0 meaning all cores); results are ordered by video id.
pub fn analyze_paths(
    paths: &[PathBuf],
    model: &MlpWeights,
    config: &PipelineConfig,
) -> Result<ScoresDocument> {
    if paths.is_empty() {
        return Err(Error::Usage("no trajectory files given".into()));
    }
    config.validate()?;
    let pool = thread_pool(config.jobs)?;
    let results: Vec<Result<(ClipAnalysis, ValidationReport)>> = pool.install(|| {
        paths
            .par_iter()
            .map(|path| {
                let located = |e: Error| match e {
                    Error::Parse { line, message } => Error::Parse {
                        line,
                        message: format!("{}: {message}", path.display()),
                    },
                    Error::Validation(m) => Error::Validation(format!("{}: {m}", path.display())),
                    Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
                    Error::EmptyInput(m) => Error::EmptyInput(format!("{}: {m}", path.display())),
                    Error::InsufficientData(m) => {
                        Error::InsufficientData(format!("{}: {m}", path.display()))
                    }
                    Error::Input(m) => Error::Input(format!("{}: {m}", path.display())),
                    other => other,
                };
                let (clip, report) = load_clip(path, &config.validation()).map_err(located)?;
                let analysis = analyze_clip(&clip, model, config).map_err(located)?;
                Ok((analysis, report))
            })
            .collect()
    });

    let mut analyses = Vec::with_capacity(results.len());
    for r in results {
        analyses.push(r?);
    }
    analyses.sort_by(|a, b| a.0.video.video_id.cmp(&b.0.video.video_id));
    if let Some(w) = analyses
        .windows(2)
        .find(|w| w[0].0.video.video_id == w[1].0.video.video_id)
    {
        return Err(Error::Validation(format!(
            "video id {} appears twice",
            w[0].0.video.video_id
        )));
    }

    let mut individuals = Vec::new();
    let mut videos = Vec::new();
    let mut dropped = BTreeMap::new();
    for (analysis, report) in analyses {
        for person in &analysis.individuals {
            individuals.push(ScoreRow {
                id: format!("{}:{}", analysis.video.video_id, person.agent_id),
                country: analysis.video.country.clone(),
                score: person.score,
            });
        }
        if !report.is_clean() {
            dropped.insert(analysis.video.video_id.clone(), report);
        }
        videos.push(analysis.video);
    }
    let countries = aggregate_country(&videos);
    Ok(ScoresDocument {
        individuals,
        videos,
        countries,
        dropped,
    })
}

pub fn compare_with_baselines(
    scores: &ScoresDocument,
    baseline_path: &Path,
) -> Result<(ErrorReport, ReportArtifacts)> {
    let text = std::fs::read_to_string(baseline_path)
        .map_err(|e| Error::io(format!("reading baselines {}", baseline_path.display()), e))?;
    let baselines = load_baselines(&text)?;
    let errors = compare(&scores.countries, &baselines)?;
    let artifacts = emit_report(&errors, &scores.countries)?;
    Ok((errors, artifacts))
}

pub const SCORES_JSON: &str = "scores.json";
pub const SCORES_CSV: &str = "scores.csv";
pub const REPORT_JSON: &str = "report.json";
pub const PLOT_CSV: &str = "plot_series.csv";

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)
            .map_err(|e| Error::io(format!("creating {}", dir.display()), e))?;
    }
    std::fs::write(path, contents).map_err(|e| Error::io(format!("writing {}", path.display()), e))
}

pub fn write_scores(scores: &ScoresDocument, out: &Path) -> Result<()> {
    write_file(&out.join(SCORES_JSON), &scores.to_json())?;
    write_file(
        &out.join(SCORES_CSV),
        &crate::ocean::scores_csv(&scores.rows()),
    )
}

pub fn write_report(artifacts: &ReportArtifacts, out: &Path) -> Result<()> {
    write_file(&out.join(REPORT_JSON), &artifacts.json)?;
    write_file(&out.join(PLOT_CSV), &artifacts.plot_csv)
}

/// Analyzes the clips, writes the score tables and, when a baseline file is
/// given, the comparison report.
pub fn run_pipeline(
    config: &PipelineConfig,
    clips: &[PathBuf],
    model_path: &Path,
    baseline_path: Option<&Path>,
    out: &Path,
) -> Result<(ScoresDocument, Option<ErrorReport>)> {
    let model = MlpWeights::load(model_path)?;
    let scores = analyze_paths(clips, &model, config)?;
    write_scores(&scores, out)?;
    let errors = match baseline_path {
        Some(path) => {
            let (errors, artifacts) = compare_with_baselines(&scores, path)?;
            write_report(&artifacts, out)?;
            Some(errors)
        }
        None => None,
    };
    Ok((scores, errors))
}
