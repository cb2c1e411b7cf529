//! Synthetic, labeled trajectory clips.
//!
//! Motion is purely kinematic: constant speed along a heading perturbed by
//! Gaussian jitter. Formation members are pulled back toward their slot so
//! group geometry stays bounded over long clips.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{extract_features, gt_socialization, FeatureParams, SOCIAL_SPACE_RADIUS};
use crate::ingest::{AgentId, ClipMetadata, FrameObservation, VideoClip};
use crate::socialization::{classifier_input, TrainingSample};

/// Fraction of the per-frame formation error corrected each frame.
const FORMATION_PULL: f64 = 0.2;
/// Random walkers stay within this fraction of `spacing` from their anchor.
const TETHER_FRACTION: f64 = 0.3;
/// Extra clearance, in meters, kept between a lone agent and the social
/// space of the nearest cluster member.
const LONE_CLEARANCE: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    /// Agents on a circle of diameter `spacing`, sharing one heading.
    CoherentGroup,
    /// Agents anchored on a square grid of pitch `spacing`, each wandering
    /// with a heading resampled every frame.
    RandomWalk,
    /// A coherent cluster of `agent_count − 1` agents plus one agent that
    /// stays outside everybody's social space.
    LoneAmongCrowd,
    /// A coherent group of random size with random walkers scattered around
    /// it at random distances.
    Mixed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub kind: ScenarioKind,
    pub agent_count: usize,
    pub frames: usize,
    /// Meters per frame.
    pub base_speed: f64,
    /// Meters.
    pub spacing: f64,
    /// Standard deviation of per-frame heading noise, degrees.
    pub heading_jitter: f64,
    pub seed: u64,
    #[serde(default = "default_video_id")]
    pub video_id: String,
    #[serde(default = "default_country")]
    pub country: String,
    #[serde(default = "default_fps")]
    pub fps: f64,
}

fn default_video_id() -> String {
    "synthetic".into()
}

fn default_country() -> String {
    "BR".into()
}

fn default_fps() -> f64 {
    25.0
}

impl ScenarioSpec {
    pub fn new(kind: ScenarioKind, agent_count: usize, frames: usize, seed: u64) -> Self {
        Self {
            kind,
            agent_count,
            frames,
            base_speed: 0.05,
            spacing: 2.0,
            heading_jitter: 0.0,
            seed,
            video_id: default_video_id(),
            country: default_country(),
            fps: default_fps(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(format!("scenario {}: {m}", self.video_id)));
        if self.agent_count < 1 {
            return fail("agent_count must be at least 1".into());
        }
        if self.kind == ScenarioKind::LoneAmongCrowd && self.agent_count < 2 {
            return fail("lone_among_crowd needs at least 2 agents".into());
        }
        if self.frames < 3 {
            return fail(format!("frames must be at least 3, got {}", self.frames));
        }
        if !(self.heading_jitter.is_finite() && self.heading_jitter >= 0.0) {
            return fail(format!(
                "heading_jitter must be non-negative, got {}",
                self.heading_jitter
            ));
        }
        if !(self.base_speed.is_finite() && self.base_speed >= 0.0) {
            return fail(format!(
                "base_speed must be non-negative, got {}",
                self.base_speed
            ));
        }
        if !(self.spacing.is_finite() && self.spacing > 0.0) {
            return fail(format!("spacing must be positive, got {}", self.spacing));
        }
        if !(self.fps.is_finite() && self.fps > 0.0) {
            return fail(format!("fps must be positive, got {}", self.fps));
        }
        if self.country.len() != 2 || !self.country.bytes().all(|b| b.is_ascii_uppercase()) {
            return fail(format!(
                "country {:?} is not an ISO alpha-2 code",
                self.country
            ));
        }
        Ok(())
    }
}

fn unit(heading_rad: f64) -> [f64; 2] {
    [heading_rad.cos(), heading_rad.sin()]
}

/// Agents that hold a slot relative to a moving center.
struct Formation {
    offsets: Vec<[f64; 2]>,
}

impl Formation {
    fn ring(count: usize, diameter: f64, phase: f64) -> Self {
        let offsets = if count == 1 {
            vec![[0.0, 0.0]]
        } else {
            let r = diameter / 2.0;
            (0..count)
                .map(|k| {
                    let a = phase + TAU * k as f64 / count as f64;
                    [r * a.cos(), r * a.sin()]
                })
                .collect()
        };
        Self { offsets }
    }
}

/// Simulates one formation plus optional tethered walkers around the same
/// moving center and returns per-agent position tracks.
struct Simulator<'a> {
    spec: &'a ScenarioSpec,
    rng: ChaCha8Rng,
    jitter: Normal<f64>,
}

impl<'a> Simulator<'a> {
    fn new(spec: &'a ScenarioSpec) -> Self {
        Self {
            spec,
            rng: ChaCha8Rng::seed_from_u64(spec.seed),
            jitter: Normal::new(0.0, spec.heading_jitter.to_radians()).expect("jitter validated"),
        }
    }

    /// `members` follow the center in formation; `walkers` are
    /// `(anchor offset, tether radius)` pairs wandering around their moving
    /// anchor.
    fn run(&mut self, formation: &Formation, walkers: &[([f64; 2], f64)]) -> Vec<Vec<[f64; 2]>> {
        let spec = self.spec;
        let heading: f64 = self.rng.random_range(0.0..TAU);
        let velocity = unit(heading).map(|c| c * spec.base_speed);

        let mut center = [0.0, 0.0];
        let mut tracks: Vec<Vec<[f64; 2]>> = Vec::new();
        let mut members: Vec<[f64; 2]> = formation.offsets.clone();
        let mut walker_pos: Vec<[f64; 2]> = walkers.iter().map(|(o, _)| *o).collect();
        let mut walker_heading: Vec<f64> = walkers
            .iter()
            .map(|_| self.rng.random_range(0.0..TAU))
            .collect();
        tracks.extend(members.iter().map(|p| vec![*p]));
        tracks.extend(walker_pos.iter().map(|p| vec![*p]));

        for _ in 1..spec.frames {
            for (i, p) in members.iter_mut().enumerate() {
                let slot = [
                    center[0] + formation.offsets[i][0],
                    center[1] + formation.offsets[i][1],
                ];
                let step =
                    unit(heading + self.jitter.sample(&mut self.rng)).map(|c| c * spec.base_speed);
                for d in 0..2 {
                    p[d] += step[d] + FORMATION_PULL * (slot[d] - p[d]);
                }
                tracks[i].push(*p);
            }
            center = [center[0] + velocity[0], center[1] + velocity[1]];

            for (w, ((offset, tether), p)) in walkers.iter().zip(walker_pos.iter_mut()).enumerate()
            {
                let anchor = [center[0] + offset[0], center[1] + offset[1]];
                // walkers drift with the anchor and wander on top of it
                for d in 0..2 {
                    p[d] += velocity[d];
                }
                let mut h = walker_heading[w] + self.jitter.sample(&mut self.rng);
                let mut next = [
                    p[0] + spec.base_speed * h.cos(),
                    p[1] + spec.base_speed * h.sin(),
                ];
                if (next[0] - anchor[0]).hypot(next[1] - anchor[1]) > *tether {
                    h = (anchor[1] - p[1]).atan2(anchor[0] - p[0]);
                    next = [
                        p[0] + spec.base_speed * h.cos(),
                        p[1] + spec.base_speed * h.sin(),
                    ];
                    if (next[0] - anchor[0]).hypot(next[1] - anchor[1]) > *tether {
                        next = anchor;
                    }
                }
                walker_heading[w] = h;
                *p = next;
                tracks[formation.offsets.len() + w].push(*p);
            }
        }
        tracks
    }
}

fn grid_offsets(count: usize, pitch: f64) -> Vec<[f64; 2]> {
    let cols = (count as f64).sqrt().ceil().max(1.0) as usize;
    (0..count)
        .map(|k| [(k % cols) as f64 * pitch, (k / cols) as f64 * pitch])
        .collect()
}

/// Worst-case distance a formation member strays from its slot.
fn formation_slack(spec: &ScenarioSpec) -> f64 {
    if spec.heading_jitter == 0.0 {
        0.0
    } else {
        2.0 * spec.base_speed / FORMATION_PULL
    }
}

pub fn generate(spec: &ScenarioSpec) -> Result<VideoClip> {
    spec.validate()?;
    let mut sim = Simulator::new(spec);
    let phase: f64 = sim.rng.random_range(0.0..TAU);
    let tracks = match spec.kind {
        ScenarioKind::CoherentGroup => {
            sim.run(&Formation::ring(spec.agent_count, spec.spacing, phase), &[])
        }
        ScenarioKind::RandomWalk => {
            let tether = TETHER_FRACTION * spec.spacing;
            let walkers: Vec<_> = grid_offsets(spec.agent_count, spec.spacing)
                .into_iter()
                .map(|o| (o, tether))
                .collect();
            sim.run(&Formation { offsets: vec![] }, &walkers)
        }
        ScenarioKind::LoneAmongCrowd => {
            let mut formation = Formation::ring(spec.agent_count - 1, spec.spacing, phase);
            let slack = formation_slack(spec);
            let distance = spec.spacing / 2.0 + SOCIAL_SPACE_RADIUS + 2.0 * slack + LONE_CLEARANCE;
            let side: f64 = sim.rng.random_range(0.0..TAU);
            formation
                .offsets
                .push([distance * side.cos(), distance * side.sin()]);
            sim.run(&formation, &[])
        }
        ScenarioKind::Mixed => {
            let group = sim.rng.random_range(1..=spec.agent_count);
            let formation = Formation::ring(group, spec.spacing, phase);
            let walkers: Vec<_> = (0..spec.agent_count - group)
                .map(|_| {
                    let radius =
                        spec.spacing / 2.0 + sim.rng.random_range(0.5..4.0 * SOCIAL_SPACE_RADIUS);
                    let angle: f64 = sim.rng.random_range(0.0..TAU);
                    let tether = sim.rng.random_range(0.0..TETHER_FRACTION * radius);
                    ([radius * angle.cos(), radius * angle.sin()], tether)
                })
                .collect();
            sim.run(&formation, &walkers)
        }
    };

    let trajectories: BTreeMap<AgentId, Vec<FrameObservation>> = tracks
        .into_iter()
        .enumerate()
        .map(|(i, track)| {
            let agent_id = i as AgentId + 1;
            let obs = track
                .into_iter()
                .enumerate()
                .map(|(frame, position)| FrameObservation {
                    frame: frame as u32,
                    agent_id,
                    position,
                })
                .collect();
            (agent_id, obs)
        })
        .collect();

    Ok(VideoClip {
        meta: ClipMetadata {
            video_id: spec.video_id.clone(),
            country: spec.country.clone(),
            fps: spec.fps,
            scale_m_per_unit: 1.0,
        },
        trajectories,
    })
}

/// Recipe for a classifier training set: a seeded sequence of scenarios,
/// sampled over their first `frames_per_clip` frames until `samples` agent
/// frames are collected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainingSetSpec {
    pub samples: usize,
    pub frames_per_clip: usize,
    pub seed: u64,
    pub min_agents: usize,
    pub max_agents: usize,
    pub max_jitter: f64,
}

impl Default for TrainingSetSpec {
    fn default() -> Self {
        Self {
            samples: 16_000,
            frames_per_clip: 25,
            seed: 2017,
            min_agents: 3,
            max_agents: 16,
            max_jitter: 30.0,
        }
    }
}

impl TrainingSetSpec {
    /// Scenario number `index` of this recipe. Kinds rotate through
    /// mixed, coherent_group, mixed, random_walk, lone_among_crowd; counts,
    /// speed, spacing and jitter are drawn from the recipe's seed.
    pub fn scenario(&self, index: usize) -> ScenarioSpec {
        const ROTATION: [ScenarioKind; 5] = [
            ScenarioKind::Mixed,
            ScenarioKind::CoherentGroup,
            ScenarioKind::Mixed,
            ScenarioKind::RandomWalk,
            ScenarioKind::LoneAmongCrowd,
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index as u64);
        let kind = ROTATION[index % ROTATION.len()];
        let spacing = match kind {
            ScenarioKind::RandomWalk => rng.random_range(1.5..12.0),
            _ => rng.random_range(0.8..3.6),
        };
        ScenarioSpec {
            kind,
            agent_count: rng
                .random_range(self.min_agents.max(2)..=self.max_agents.max(self.min_agents.max(2))),
            frames: self.frames_per_clip.max(3) + 1,
            base_speed: rng.random_range(0.02..0.12),
            spacing,
            heading_jitter: rng.random_range(0.0..=self.max_jitter),
            seed: rng.random(),
            video_id: format!("train_{index:05}"),
            country: default_country(),
            fps: default_fps(),
        }
    }
}

/// Agent-frames labeled by the ground-truth socialization rule.
pub fn labeled_samples(
    clip: &VideoClip,
    params: &FeatureParams,
    max_frame: Option<u32>,
) -> Result<Vec<TrainingSample>> {
    Ok(extract_features(clip, params)?
        .into_iter()
        .filter(|f| max_frame.is_none_or(|m| f.frame <= m))
        .map(|f| TrainingSample {
            input: classifier_input(&f.neighborhood, f.collectivity),
            label: gt_socialization(&f.neighborhood).social,
        })
        .collect())
}

/// Builds exactly `spec.samples` labeled samples.
pub fn training_set(spec: &TrainingSetSpec, params: &FeatureParams) -> Result<Vec<TrainingSample>> {
    if spec.samples == 0 {
        return Err(Error::Config(
            "training set needs at least one sample".into(),
        ));
    }
    let mut out = Vec::with_capacity(spec.samples);
    let mut index = 0;
    while out.len() < spec.samples {
        let clip = generate(&spec.scenario(index))?;
        let samples = labeled_samples(&clip, params, Some(spec.frames_per_clip as u32))?;
        let take = (spec.samples - out.len()).min(samples.len());
        out.extend_from_slice(&samples[..take]);
        index += 1;
    }
    Ok(out)
}
