//! Per-frame pedestrian features and their per-video summaries.
//!
//! Two angle quantities are kept apart on purpose:
//! * `heading_deg`, the absolute direction of motion measured from `(1, 0)`,
//!   which drives the orientation term of the pair affinity;
//! * `angular_variation_deg`, the frame-to-frame change of that heading,
//!   which feeds the questionnaire items.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{AgentId, FrameObservation, VideoClip, MIN_OBSERVATIONS};

/// Radius of the social space, in meters.
pub const SOCIAL_SPACE_RADIUS: f64 = 3.6;

/// Ground-truth level at or above which an agent is labeled social.
pub const SOCIAL_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KinematicState {
    /// Meters per frame.
    pub speed: f64,
    /// Direction of the last displacement in `[0, 360)`.
    pub heading_deg: f64,
    /// Absolute heading change since the previous frame, in `[0, 180]`.
    pub angular_variation_deg: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KinematicSample {
    pub frame: u32,
    pub state: KinematicState,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NeighborhoodStats {
    /// Other agents within the social-space radius (inclusive).
    pub n_social: usize,
    /// Mean distance to every other agent in the frame; 0 when alone.
    pub mean_distance: f64,
    /// Agents present in the frame, including the queried one.
    pub frame_population: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CollectivityParams {
    pub gamma: f64,
    pub beta: f64,
    /// Weight of the speed difference (m/frame).
    pub w1: f64,
    /// Weight of the heading difference (radians).
    pub w2: f64,
    pub pair_cap: f64,
}

impl Default for CollectivityParams {
    fn default() -> Self {
        Self {
            gamma: 1.0,
            beta: 0.3,
            w1: 1.0,
            w2: 1.0,
            pair_cap: 4.34,
        }
    }
}

impl CollectivityParams {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("gamma", self.gamma),
            ("beta", self.beta),
            ("w1", self.w1),
            ("w2", self.w2),
            ("pair_cap", self.pair_cap),
        ];
        for (name, value) in fields {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::Config(format!(
                    "collectivity {name} must be positive, got {value}"
                )));
            }
        }
        if self.gamma > 1.0 {
            return Err(Error::Config(format!(
                "collectivity gamma must not exceed 1 to keep collectivity in [0, 1], got {}",
                self.gamma
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureParams {
    pub social_radius: f64,
    pub collectivity: CollectivityParams,
}

impl Default for FeatureParams {
    fn default() -> Self {
        Self {
            social_radius: SOCIAL_SPACE_RADIUS,
            collectivity: CollectivityParams::default(),
        }
    }
}

impl FeatureParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.social_radius.is_finite() && self.social_radius > 0.0) {
            return Err(Error::Config(format!(
                "social_radius must be positive, got {}",
                self.social_radius
            )));
        }
        self.collectivity.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureFrame {
    pub agent_id: AgentId,
    pub frame: u32,
    pub kinematics: KinematicState,
    pub neighborhood: NeighborhoodStats,
    pub collectivity: f64,
    pub gt_social_level: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub level: f64,
    pub social: bool,
}

/// Per-agent averages over all frames of one video.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureSummary {
    pub agent_id: AgentId,
    pub mean_speed: f64,
    pub mean_angular_variation: f64,
    pub std_angular_variation: f64,
    pub mean_collectivity: f64,
    pub mean_socialization: f64,
    pub mean_isolation: f64,
    pub frame_count: usize,
}

/// Smallest angle between two headings, degrees in `[0, 180]`.
pub fn heading_difference_deg(a: f64, b: f64) -> f64 {
    // |a − b| first so the result is exactly symmetric
    let d = (a - b).abs().rem_euclid(360.0);
    d.min(360.0 - d)
}

fn heading_of(dx: f64, dy: f64) -> f64 {
    let deg = dy.atan2(dx).to_degrees().rem_euclid(360.0);
    // rem_euclid can round up to exactly 360 for tiny negative angles
    if deg >= 360.0 {
        0.0
    } else {
        deg
    }
}

/// Speed, heading and angular variation for every observation after the
/// first.
///
/// The second observation has angular variation 0. A zero displacement keeps
/// the previous heading (0 if there is none yet).
pub fn compute_kinematics(track: &[FrameObservation]) -> Result<Vec<KinematicSample>> {
    if track.len() < MIN_OBSERVATIONS {
        return Err(Error::InsufficientData(format!(
            "kinematics need at least {MIN_OBSERVATIONS} observations, got {}",
            track.len()
        )));
    }
    let mut samples = Vec::with_capacity(track.len() - 1);
    let mut previous_heading: Option<f64> = None;
    for pair in track.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        let gap = b
            .frame
            .checked_sub(a.frame)
            .filter(|&g| g > 0)
            .ok_or_else(|| {
                Error::Validation(format!(
                    "agent {}: frames {} and {} are not strictly increasing",
                    b.agent_id, a.frame, b.frame
                ))
            })?;
        let dx = b.position[0] - a.position[0];
        let dy = b.position[1] - a.position[1];
        let distance = dx.hypot(dy);
        let heading = if distance > 0.0 {
            heading_of(dx, dy)
        } else {
            previous_heading.unwrap_or(0.0)
        };
        let angular_variation =
            previous_heading.map_or(0.0, |prev| heading_difference_deg(heading, prev));
        samples.push(KinematicSample {
            frame: b.frame,
            state: KinematicState {
                speed: distance / f64::from(gap),
                heading_deg: heading,
                angular_variation_deg: angular_variation,
            },
        });
        previous_heading = Some(heading);
    }
    Ok(samples)
}

/// Pairwise motion dissimilarity: weighted speed difference plus weighted
/// heading difference in radians, capped at `pair_cap`.
pub fn pair_affinity(a: &KinematicState, b: &KinematicState, params: &CollectivityParams) -> f64 {
    let speed_term = (a.speed - b.speed).abs() * params.w1;
    let orientation_term =
        heading_difference_deg(a.heading_deg, b.heading_deg).to_radians() * params.w2;
    (speed_term + orientation_term).min(params.pair_cap)
}

/// Ground-truth socialization: `n / population`, or 0 without neighbors.
pub fn gt_socialization(stats: &NeighborhoodStats) -> GroundTruth {
    let level = if stats.n_social == 0 || stats.frame_population == 0 {
        0.0
    } else {
        stats.n_social as f64 / stats.frame_population as f64
    };
    GroundTruth {
        level,
        social: level >= SOCIAL_THRESHOLD,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgentSnapshot {
    pub agent_id: AgentId,
    pub position: [f64; 2],
    pub kinematics: Option<KinematicState>,
}

/// Clip re-indexed by frame, agents sorted by id within each frame.
#[derive(Debug, Clone, Default)]
pub struct FrameTable {
    frames: BTreeMap<u32, Vec<AgentSnapshot>>,
}

impl FrameTable {
    pub fn build(clip: &VideoClip) -> Result<Self> {
        let mut frames: BTreeMap<u32, Vec<AgentSnapshot>> = BTreeMap::new();
        for (&agent_id, track) in &clip.trajectories {
            let kinematics = compute_kinematics(track).map_err(|e| match e {
                Error::InsufficientData(m) => {
                    Error::InsufficientData(format!("agent {agent_id}: {m}"))
                }
                other => other,
            })?;
            // kinematics[k] belongs to track[k + 1]
            for (index, obs) in track.iter().enumerate() {
                frames.entry(obs.frame).or_default().push(AgentSnapshot {
                    agent_id,
                    position: obs.position,
                    kinematics: index.checked_sub(1).map(|k| kinematics[k].state),
                });
            }
        }
        // BTreeMap iteration already visits agents in id order
        Ok(Self { frames })
    }

    /// Builds a table from positions only; collectivity is unavailable.
    pub fn positions_only(clip: &VideoClip) -> Self {
        let mut frames: BTreeMap<u32, Vec<AgentSnapshot>> = BTreeMap::new();
        for (&agent_id, track) in &clip.trajectories {
            for obs in track {
                frames.entry(obs.frame).or_default().push(AgentSnapshot {
                    agent_id,
                    position: obs.position,
                    kinematics: None,
                });
            }
        }
        Self { frames }
    }

    pub fn frames(&self) -> impl Iterator<Item = (u32, &[AgentSnapshot])> {
        self.frames
            .iter()
            .map(|(&f, agents)| (f, agents.as_slice()))
    }

    pub fn frame(&self, frame: u32) -> Option<&[AgentSnapshot]> {
        self.frames.get(&frame).map(Vec::as_slice)
    }

    fn locate(&self, frame: u32, agent: AgentId) -> Result<(&[AgentSnapshot], &AgentSnapshot)> {
        let agents = self
            .frame(frame)
            .ok_or_else(|| Error::Lookup(format!("frame {frame} has no observations")))?;
        let me = agents
            .binary_search_by_key(&agent, |a| a.agent_id)
            .map(|i| &agents[i])
            .map_err(|_| Error::Lookup(format!("agent {agent} is not present in frame {frame}")))?;
        Ok((agents, me))
    }

    pub fn neighborhood(
        &self,
        frame: u32,
        agent: AgentId,
        radius: f64,
    ) -> Result<NeighborhoodStats> {
        let (agents, me) = self.locate(frame, agent)?;
        Ok(neighborhood_of(agents, me, radius))
    }

    /// Mean pair decay `γ·exp(−β·ϖ²)` over social-space neighbors that have
    /// kinematics in this frame; 0 when there are none.
    pub fn collectivity(
        &self,
        frame: u32,
        agent: AgentId,
        radius: f64,
        params: &CollectivityParams,
    ) -> Result<f64> {
        let (agents, me) = self.locate(frame, agent)?;
        let state = me.kinematics.ok_or_else(|| {
            Error::Lookup(format!("agent {agent} has no kinematics at frame {frame}"))
        })?;
        Ok(collectivity_of(agents, me, &state, radius, params))
    }
}

fn distance(a: &[f64; 2], b: &[f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

fn neighborhood_of(agents: &[AgentSnapshot], me: &AgentSnapshot, radius: f64) -> NeighborhoodStats {
    let mut n_social = 0;
    let mut total = 0.0;
    let mut others = 0usize;
    for other in agents.iter().filter(|a| a.agent_id != me.agent_id) {
        let d = distance(&me.position, &other.position);
        if d <= radius {
            n_social += 1;
        }
        total += d;
        others += 1;
    }
    NeighborhoodStats {
        n_social,
        mean_distance: if others == 0 {
            0.0
        } else {
            total / others as f64
        },
        frame_population: agents.len(),
    }
}

fn collectivity_of(
    agents: &[AgentSnapshot],
    me: &AgentSnapshot,
    state: &KinematicState,
    radius: f64,
    params: &CollectivityParams,
) -> f64 {
    let mut sum = 0.0;
    let mut count = 0usize;
    for other in agents.iter().filter(|a| a.agent_id != me.agent_id) {
        let Some(other_state) = other.kinematics else {
            continue;
        };
        if distance(&me.position, &other.position) > radius {
            continue;
        }
        let w = pair_affinity(state, &other_state, params);
        sum += params.gamma * (-params.beta * w * w).exp();
        count += 1;
    }
    if count == 0 {
        0.0
    } else {
        sum / count as f64
    }
}

/// Social-space statistics for one agent in one frame of a clip.
pub fn neighborhood(
    clip: &VideoClip,
    frame: u32,
    agent: AgentId,
    radius: f64,
) -> Result<NeighborhoodStats> {
    let mut agents: Vec<AgentSnapshot> = clip
        .trajectories
        .iter()
        .filter_map(|(&agent_id, track)| {
            track
                .binary_search_by_key(&frame, |o| o.frame)
                .ok()
                .map(|i| AgentSnapshot {
                    agent_id,
                    position: track[i].position,
                    kinematics: None,
                })
        })
        .collect();
    agents.sort_by_key(|a| a.agent_id);
    let me = agents
        .iter()
        .find(|a| a.agent_id == agent)
        .copied()
        .ok_or_else(|| Error::Lookup(format!("agent {agent} is not present in frame {frame}")))?;
    Ok(neighborhood_of(&agents, &me, radius))
}

/// Collectivity of one agent in one frame of a clip.
pub fn collectivity(
    clip: &VideoClip,
    frame: u32,
    agent: AgentId,
    params: &FeatureParams,
) -> Result<f64> {
    FrameTable::build(clip)?.collectivity(frame, agent, params.social_radius, &params.collectivity)
}

/// Feature frames for every agent-frame with defined kinematics, ordered by
/// `(agent_id, frame)`.
pub fn extract_features(clip: &VideoClip, params: &FeatureParams) -> Result<Vec<FeatureFrame>> {
    params.validate()?;
    let table = FrameTable::build(clip)?;
    let mut out = Vec::with_capacity(clip.observation_count());
    for (frame, agents) in table.frames() {
        for me in agents {
            let Some(state) = me.kinematics else { continue };
            let neighborhood = neighborhood_of(agents, me, params.social_radius);
            let collectivity = collectivity_of(
                agents,
                me,
                &state,
                params.social_radius,
                &params.collectivity,
            );
            out.push(FeatureFrame {
                agent_id: me.agent_id,
                frame,
                kinematics: state,
                neighborhood,
                collectivity,
                gt_social_level: gt_socialization(&neighborhood).level,
            });
        }
    }
    out.sort_by_key(|f| (f.agent_id, f.frame));
    Ok(out)
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    sum / n as f64
}

/// Averages one agent's frames. `socialization[k]` is the predicted level
/// for `frames[k]`.
pub fn summarize(frames: &[FeatureFrame], socialization: &[f64]) -> Result<FeatureSummary> {
    if frames.is_empty() {
        return Err(Error::InsufficientData(
            "cannot summarize zero frames".into(),
        ));
    }
    if frames.len() != socialization.len() {
        return Err(Error::Input(format!(
            "{} feature frames but {} socialization values",
            frames.len(),
            socialization.len()
        )));
    }
    let agent_id = frames[0].agent_id;
    if let Some(other) = frames.iter().find(|f| f.agent_id != agent_id) {
        return Err(Error::Input(format!(
            "summary mixes agents {agent_id} and {}",
            other.agent_id
        )));
    }

    let mean_angular_variation = mean(frames.iter().map(|f| f.kinematics.angular_variation_deg));
    let variance = mean(
        frames
            .iter()
            .map(|f| (f.kinematics.angular_variation_deg - mean_angular_variation).powi(2)),
    );
    let mean_socialization = mean(socialization.iter().copied());
    Ok(FeatureSummary {
        agent_id,
        mean_speed: mean(frames.iter().map(|f| f.kinematics.speed)),
        mean_angular_variation,
        std_angular_variation: variance.sqrt(),
        mean_collectivity: mean(frames.iter().map(|f| f.collectivity)),
        mean_socialization,
        mean_isolation: 1.0 - mean_socialization,
        frame_count: frames.len(),
    })
}

pub const FEATURE_DUMP_HEADER: &str =
    "video_id,agent_id,frame,speed,heading_deg,ang_var_deg,n_social,mean_dist,collectivity,gt_social";

/// Optional per-frame feature dump in CSV form.
pub fn feature_dump_csv(video_id: &str, frames: &[FeatureFrame]) -> String {
    let mut out = String::from(FEATURE_DUMP_HEADER);
    out.push('\n');
    for f in frames {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            video_id,
            f.agent_id,
            f.frame,
            f.kinematics.speed,
            f.kinematics.heading_deg,
            f.kinematics.angular_variation_deg,
            f.neighborhood.n_social,
            f.neighborhood.mean_distance,
            f.collectivity,
            f.gt_social_level
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::ClipMetadata;

    fn track(points: &[(f64, f64)]) -> Vec<FrameObservation> {
        points
            .iter()
            .enumerate()
            .map(|(i, &(x, y))| FrameObservation {
                frame: i as u32,
                agent_id: 1,
                position: [x, y],
            })
            .collect()
    }

    fn state(speed: f64, heading_deg: f64) -> KinematicState {
        KinematicState {
            speed,
            heading_deg,
            angular_variation_deg: 0.0,
        }
    }

    fn clip(agents: &[(AgentId, Vec<(f64, f64)>)]) -> VideoClip {
        let trajectories = agents
            .iter()
            .map(|(id, pts)| {
                let obs = pts
                    .iter()
                    .enumerate()
                    .map(|(i, &(x, y))| FrameObservation {
                        frame: i as u32,
                        agent_id: *id,
                        position: [x, y],
                    })
                    .collect();
                (*id, obs)
            })
            .collect();
        VideoClip {
            meta: ClipMetadata {
                video_id: "t".into(),
                country: "BR".into(),
                fps: 25.0,
                scale_m_per_unit: 1.0,
            },
            trajectories,
        }
    }

    #[test]
    fn straight_line_kinematics() {
        let k = compute_kinematics(&track(&[(0.0, 0.0), (1.0, 0.0), (2.0, 0.0)])).unwrap();
        assert_eq!(k.len(), 2);
        assert_eq!(k[0].frame, 1);
        for s in &k {
            assert_eq!(s.state.speed, 1.0);
            assert_eq!(s.state.heading_deg, 0.0);
            assert_eq!(s.state.angular_variation_deg, 0.0);
        }
    }

    #[test]
    fn right_angle_turn() {
        let k = compute_kinematics(&track(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0)])).unwrap();
        assert_eq!(k[0].state.heading_deg, 0.0);
        assert_eq!(k[1].state.heading_deg, 90.0);
        assert_eq!(k[1].state.angular_variation_deg, 90.0);
    }

    #[test]
    fn stationary_agent() {
        let k = compute_kinematics(&track(&[(0.0, 0.0); 3])).unwrap();
        assert!(k
            .iter()
            .all(|s| s.state.speed == 0.0 && s.state.angular_variation_deg == 0.0));
    }

    #[test]
    fn pause_keeps_heading() {
        let k =
            compute_kinematics(&track(&[(0.0, 0.0), (0.0, 1.0), (0.0, 1.0), (0.0, 2.0)])).unwrap();
        assert_eq!(k[1].state.heading_deg, 90.0);
        assert_eq!(k[1].state.angular_variation_deg, 0.0);
        assert_eq!(k[2].state.angular_variation_deg, 0.0);
    }

    #[test]
    fn speed_divides_by_frame_gap() {
        let obs = vec![
            FrameObservation {
                frame: 0,
                agent_id: 1,
                position: [0.0, 0.0],
            },
            FrameObservation {
                frame: 2,
                agent_id: 1,
                position: [2.0, 0.0],
            },
            FrameObservation {
                frame: 3,
                agent_id: 1,
                position: [2.0, -1.0],
            },
        ];
        let k = compute_kinematics(&obs).unwrap();
        assert_eq!(k[0].state.speed, 1.0);
        assert_eq!(k[1].state.heading_deg, 270.0);
        assert_eq!(k[1].state.angular_variation_deg, 90.0);
    }

    #[test]
    fn too_short_for_kinematics() {
        let err = compute_kinematics(&track(&[(0.0, 0.0), (1.0, 0.0)])).unwrap_err();
        assert!(matches!(err, Error::InsufficientData(_)));
    }

    #[test]
    fn heading_wraps_around() {
        assert!((heading_difference_deg(350.0, 10.0) - 20.0).abs() < 1e-12);
        assert_eq!(heading_difference_deg(0.0, 180.0), 180.0);
        assert_eq!(heading_of(1.0, -0.0), 0.0);
        assert!(heading_of(1.0, -1e-300) < 360.0);
    }

    #[test]
    fn neighborhood_cases() {
        let c = clip(&[
            (1, vec![(0.0, 0.0)]),
            (2, vec![(1.0, 0.0)]),
            (3, vec![(0.0, 10.0)]),
        ]);
        let stats = neighborhood(&c, 0, 1, SOCIAL_SPACE_RADIUS).unwrap();
        assert_eq!(stats.n_social, 1);
        assert_eq!(stats.mean_distance, 5.5);
        assert_eq!(stats.frame_population, 3);

        let lone = clip(&[(1, vec![(0.0, 0.0)])]);
        let stats = neighborhood(&lone, 0, 1, SOCIAL_SPACE_RADIUS).unwrap();
        assert_eq!(
            (stats.n_social, stats.mean_distance, stats.frame_population),
            (0, 0.0, 1)
        );

        let boundary = clip(&[(1, vec![(0.0, 0.0)]), (2, vec![(3.6, 0.0)])]);
        assert_eq!(neighborhood(&boundary, 0, 1, 3.6).unwrap().n_social, 1);

        assert!(matches!(
            neighborhood(&c, 0, 9, 3.6).unwrap_err(),
            Error::Lookup(_)
        ));
        assert!(matches!(
            neighborhood(&c, 4, 1, 3.6).unwrap_err(),
            Error::Lookup(_)
        ));
    }

    #[test]
    fn pair_affinity_examples() {
        let p = CollectivityParams::default();
        assert_eq!(pair_affinity(&state(1.0, 45.0), &state(1.0, 45.0), &p), 0.0);
        let w = pair_affinity(&state(1.5, 0.0), &state(0.5, 180.0), &p);
        assert!((w - (1.0 + std::f64::consts::PI)).abs() < 1e-12);
        assert_eq!(
            pair_affinity(&state(3.0, 0.0), &state(0.0, 180.0), &p),
            4.34
        );
    }

    #[test]
    fn collectivity_examples() {
        let p = FeatureParams::default();
        // one neighbor with identical motion
        let c = clip(&[
            (1, vec![(0.0, 0.0), (1.0, 0.0), (2.0, 0.0)]),
            (2, vec![(0.0, 1.0), (1.0, 1.0), (2.0, 1.0)]),
        ]);
        assert_eq!(collectivity(&c, 2, 1, &p).unwrap(), 1.0);

        let far = clip(&[
            (1, vec![(0.0, 0.0), (1.0, 0.0), (2.0, 0.0)]),
            (2, vec![(0.0, 9.0), (1.0, 9.0), (2.0, 9.0)]),
        ]);
        assert_eq!(collectivity(&far, 2, 1, &p).unwrap(), 0.0);

        // first frame has no kinematics
        assert!(matches!(
            collectivity(&c, 0, 1, &p).unwrap_err(),
            Error::Lookup(_)
        ));
    }

    #[test]
    fn collectivity_two_neighbors_mean() {
        // speed differences of 1 and 2 with equal headings give ϖ = 1 and 2
        let p = FeatureParams::default();
        let c = clip(&[
            (1, vec![(0.0, 0.0), (1.0, 0.0), (2.0, 0.0)]),
            (2, vec![(-1.0, 1.0), (1.0, 1.0), (3.0, 1.0)]),
            (3, vec![(-2.0, -1.0), (1.0, -1.0), (4.0, -1.0)]),
        ]);
        let value = collectivity(&c, 2, 1, &p).unwrap();
        let expected = ((-0.3f64).exp() + (-1.2f64).exp()) / 2.0;
        assert!((value - expected).abs() < 1e-12);
        assert!((value - 0.52101).abs() < 1e-5);
    }

    #[test]
    fn gt_socialization_examples() {
        let s = |n, pop| NeighborhoodStats {
            n_social: n,
            mean_distance: 1.0,
            frame_population: pop,
        };
        assert_eq!(
            gt_socialization(&s(0, 10)),
            GroundTruth {
                level: 0.0,
                social: false
            }
        );
        assert_eq!(
            gt_socialization(&s(5, 10)),
            GroundTruth {
                level: 0.5,
                social: true
            }
        );
        assert_eq!(
            gt_socialization(&s(2, 10)),
            GroundTruth {
                level: 0.2,
                social: false
            }
        );
    }

    fn frame_with(av: f64) -> FeatureFrame {
        FeatureFrame {
            agent_id: 1,
            frame: 0,
            kinematics: KinematicState {
                speed: 1.0,
                heading_deg: 0.0,
                angular_variation_deg: av,
            },
            neighborhood: NeighborhoodStats {
                n_social: 0,
                mean_distance: 0.0,
                frame_population: 1,
            },
            collectivity: 0.25,
            gt_social_level: 0.0,
        }
    }

    #[test]
    fn summarize_examples() {
        let frames = vec![frame_with(5.0); 4];
        let s = summarize(&frames, &[0.1; 4]).unwrap();
        assert_eq!(s.mean_angular_variation, 5.0);
        assert_eq!(s.std_angular_variation, 0.0);

        let s = summarize(&frames[..2], &[0.2, 0.8]).unwrap();
        assert_eq!(s.mean_socialization, 0.5);
        assert_eq!(s.mean_isolation, 0.5);

        let single = summarize(&[frame_with(7.0)], &[0.3]).unwrap();
        assert_eq!(single.mean_angular_variation, 7.0);
        assert_eq!(single.std_angular_variation, 0.0);
        assert_eq!(single.mean_collectivity, 0.25);
        assert_eq!(single.frame_count, 1);

        assert!(matches!(
            summarize(&[], &[]).unwrap_err(),
            Error::InsufficientData(_)
        ));
        assert!(matches!(
            summarize(&frames, &[0.1]).unwrap_err(),
            Error::Input(_)
        ));
    }

    #[test]
    fn population_standard_deviation() {
        let frames = vec![frame_with(2.0), frame_with(4.0)];
        assert_eq!(
            summarize(&frames, &[0.0, 0.0])
                .unwrap()
                .std_angular_variation,
            1.0
        );
    }

    #[test]
    fn extract_features_orders_and_skips_first_frame() {
        let c = clip(&[
            (2, vec![(0.0, 1.0), (1.0, 1.0), (2.0, 1.0)]),
            (1, vec![(0.0, 0.0), (1.0, 0.0), (2.0, 0.0)]),
        ]);
        let frames = extract_features(&c, &FeatureParams::default()).unwrap();
        let keys: Vec<_> = frames.iter().map(|f| (f.agent_id, f.frame)).collect();
        assert_eq!(keys, vec![(1, 1), (1, 2), (2, 1), (2, 2)]);
        assert!(frames
            .iter()
            .all(|f| f.collectivity == 1.0 && f.gt_social_level == 0.5));
        let dump = feature_dump_csv("t", &frames);
        assert!(dump.starts_with(FEATURE_DUMP_HEADER));
        assert_eq!(dump.lines().count(), 5);
    }

    #[test]
    fn invalid_params_rejected() {
        let mut p = FeatureParams::default();
        p.collectivity.beta = 0.0;
        assert!(p.validate().is_err());
        p = FeatureParams {
            social_radius: -1.0,
            ..FeatureParams::default()
        };
        assert!(p.validate().is_err());
    }
}
