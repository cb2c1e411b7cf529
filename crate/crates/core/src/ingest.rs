//! Trajectory ingestion: CSV + JSON sidecar parsing, cleaning and metric
//! calibration of tracker output.
//!
//! A clip is stored as one ordered observation sequence per agent. Positions
//! stay in tracker units until [`scale_to_meters`] is applied.

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type AgentId = i64;

pub const CSV_HEADER: [&str; 4] = ["frame", "agent_id", "x", "y"];

/// Frame-step gap above which a trajectory is split into segments.
pub const DEFAULT_GAP_THRESHOLD: u32 = 5;

/// Two consecutive displacements are needed for angular variation.
pub const MIN_OBSERVATIONS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameObservation {
    pub frame: u32,
    pub agent_id: AgentId,
    pub position: [f64; 2],
}

/// Sidecar metadata (`<basename>.meta.json`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClipMetadata {
    pub video_id: String,
    pub country: String,
    pub fps: f64,
    pub scale_m_per_unit: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VideoClip {
    pub meta: ClipMetadata,
    pub trajectories: BTreeMap<AgentId, Vec<FrameObservation>>,
}

impl VideoClip {
    pub fn agent_count(&self) -> usize {
        self.trajectories.len()
    }

    pub fn observation_count(&self) -> usize {
        self.trajectories.values().map(Vec::len).sum()
    }

    /// Serializes the trajectories to the CSV interchange format, rows
    /// ordered by `(agent_id, frame)`.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(32 * self.observation_count() + 16);
        out.push_str(&CSV_HEADER.join(","));
        out.push('\n');
        for obs in self.trajectories.values().flatten() {
            // `{}` on f64 prints the shortest representation that parses back
            // to the same value.
            let _ = writeln!(
                out,
                "{},{},{},{}",
                obs.frame, obs.agent_id, obs.position[0], obs.position[1]
            );
        }
        out
    }

    pub fn metadata_json(&self) -> String {
        serde_json::to_string_pretty(&self.meta).expect("metadata is always serializable")
    }
}

/// Why an agent (or one of its segments) was removed during validation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DroppedAgent {
    pub agent_id: AgentId,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentSplit {
    pub source_agent_id: AgentId,
    pub segment_ids: Vec<AgentId>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub dropped: Vec<DroppedAgent>,
    pub splits: Vec<SegmentSplit>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.dropped.is_empty() && self.splits.is_empty()
    }

    /// The drop report interchange format: a JSON list of `{agent_id, reason}`.
    pub fn drop_report_json(&self) -> String {
        serde_json::to_string_pretty(&self.dropped).expect("drop report is always serializable")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ValidationConfig {
    pub gap_threshold: u32,
    pub min_observations: usize,
}

impl Default for ValidationConfig {
    fn default() -> Self {
        Self {
            gap_threshold: DEFAULT_GAP_THRESHOLD,
            min_observations: MIN_OBSERVATIONS,
        }
    }
}

pub fn parse_metadata(metadata_text: &str) -> Result<ClipMetadata> {
    let meta: ClipMetadata = serde_json::from_str(metadata_text)
        .map_err(|e| Error::Config(format!("metadata sidecar: {e}")))?;
    if meta.video_id.is_empty() {
        return Err(Error::Config("metadata sidecar: empty video_id".into()));
    }
    if meta.country.len() != 2 || !meta.country.bytes().all(|b| b.is_ascii_uppercase()) {
        return Err(Error::Config(format!(
            "metadata sidecar: country {:?} is not an ISO 3166 alpha-2 code",
            meta.country
        )));
    }
    if !(meta.fps.is_finite() && meta.fps > 0.0) {
        return Err(Error::Config(format!(
            "metadata sidecar: fps must be positive, got {}",
            meta.fps
        )));
    }
    if !meta.scale_m_per_unit.is_finite() {
        return Err(Error::Config(
            "metadata sidecar: scale_m_per_unit is not finite".into(),
        ));
    }
    Ok(meta)
}

/// Parses a trajectory CSV and its metadata sidecar into a clip in tracker
/// units. Rows may arrive in any order.
pub fn parse_clip(trajectory_text: &str, metadata_text: &str) -> Result<VideoClip> {
    let meta = parse_metadata(metadata_text)?;

    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(trajectory_text.as_bytes());

    let headers = reader
        .headers()
        .map_err(|e| Error::parse(1, e.to_string()))?;
    if headers.iter().ne(CSV_HEADER.iter().copied()) {
        return Err(Error::parse(
            1,
            format!(
                "expected header `{}`, found `{}`",
                CSV_HEADER.join(","),
                headers.iter().collect::<Vec<_>>().join(",")
            ),
        ));
    }

    let mut observations = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            Error::parse(line, e.to_string())
        })?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        if record.len() != 4 {
            return Err(Error::parse(
                line,
                format!("expected 4 fields, found {}", record.len()),
            ));
        }
        let frame: u32 = record[0]
            .parse()
            .map_err(|_| Error::parse(line, format!("invalid frame index {:?}", &record[0])))?;
        let agent_id: AgentId = record[1]
            .parse()
            .map_err(|_| Error::parse(line, format!("invalid agent_id {:?}", &record[1])))?;
        let x = parse_coordinate(&record[2], "x", line)?;
        let y = parse_coordinate(&record[3], "y", line)?;
        observations.push(FrameObservation {
            frame,
            agent_id,
            position: [x, y],
        });
    }

    observations.sort_by_key(|o| (o.agent_id, o.frame));
    let mut trajectories: BTreeMap<AgentId, Vec<FrameObservation>> = BTreeMap::new();
    for obs in observations {
        let track = trajectories.entry(obs.agent_id).or_default();
        if track.last().is_some_and(|prev| prev.frame == obs.frame) {
            return Err(Error::Validation(format!(
                "duplicate observation for agent {} at frame {}",
                obs.agent_id, obs.frame
            )));
        }
        track.push(obs);
    }

    Ok(VideoClip { meta, trajectories })
}

fn parse_coordinate(field: &str, name: &str, line: u64) -> Result<f64> {
    let value: f64 = field
        .parse()
        .map_err(|_| Error::parse(line, format!("invalid {name} coordinate {field:?}")))?;
    if !value.is_finite() {
        return Err(Error::parse(
            line,
            format!("non-finite {name} coordinate {field:?}"),
        ));
    }
    Ok(value)
}

/// Drops short tracks and splits tracks at frame gaps larger than the
/// configured threshold.
///
/// The first segment of a split track keeps its id; later segments receive
/// fresh ids above the largest id present in the clip, allocated in
/// `(agent_id, segment)` order.
pub fn validate_clip(
    clip: VideoClip,
    config: &ValidationConfig,
) -> Result<(VideoClip, ValidationReport)> {
    let mut report = ValidationReport::default();
    let mut next_id = clip
        .trajectories
        .keys()
        .next_back()
        .map_or(0, |&max| max.saturating_add(1));

    let VideoClip { meta, trajectories } = clip;
    let mut cleaned = BTreeMap::new();

    for (agent_id, track) in trajectories {
        let mut segments: Vec<Vec<FrameObservation>> = Vec::new();
        let mut current: Vec<FrameObservation> = Vec::new();
        for obs in track {
            if let Some(prev) = current.last() {
                if obs.frame - prev.frame > config.gap_threshold {
                    segments.push(std::mem::take(&mut current));
                }
            }
            current.push(obs);
        }
        if !current.is_empty() {
            segments.push(current);
        }

        let split = segments.len() > 1;
        let mut segment_ids = Vec::new();
        for (index, segment) in segments.into_iter().enumerate() {
            let id = if index == 0 {
                agent_id
            } else {
                let id = next_id;
                next_id = next_id.saturating_add(1);
                id
            };
            if segment.len() < config.min_observations {
                let reason = if split {
                    format!(
                        "segment {} (frames {}..={}) has {} observations, fewer than {}",
                        index,
                        segment[0].frame,
                        segment[segment.len() - 1].frame,
                        segment.len(),
                        config.min_observations
                    )
                } else {
                    format!(
                        "{} observations, fewer than {}",
                        segment.len(),
                        config.min_observations
                    )
                };
                report.dropped.push(DroppedAgent { agent_id, reason });
                continue;
            }
            let segment = segment
                .into_iter()
                .map(|o| FrameObservation { agent_id: id, ..o })
                .collect();
            segment_ids.push(id);
            cleaned.insert(id, segment);
        }
        if split {
            report.splits.push(SegmentSplit {
                source_agent_id: agent_id,
                segment_ids,
            });
        }
    }

    if cleaned.is_empty() {
        return Err(Error::EmptyInput(format!(
            "clip {} has no usable trajectories after validation",
            meta.video_id
        )));
    }

    Ok((
        VideoClip {
            meta,
            trajectories: cleaned,
        },
        report,
    ))
}

/// Converts positions to meters using the clip's `scale_m_per_unit`, which
/// is then recorded as 1.0.
pub fn scale_to_meters(mut clip: VideoClip) -> Result<VideoClip> {
    let scale = clip.meta.scale_m_per_unit;
    if !(scale.is_finite() && scale > 0.0) {
        return Err(Error::Config(format!(
            "clip {}: scale_m_per_unit must be positive, got {scale}",
            clip.meta.video_id
        )));
    }
    if scale != 1.0 {
        for obs in clip.trajectories.values_mut().flatten() {
            obs.position[0] *= scale;
            obs.position[1] *= scale;
        }
        clip.meta.scale_m_per_unit = 1.0;
    }
    Ok(clip)
}

/// Sidecar path for a trajectory file: `walk.csv` → `walk.meta.json`.
pub fn sidecar_path(trajectory_path: &Path) -> PathBuf {
    trajectory_path.with_extension("meta.json")
}

/// Reads a trajectory file plus its sidecar, then validates and scales it.
pub fn load_clip(
    trajectory_path: &Path,
    config: &ValidationConfig,
) -> Result<(VideoClip, ValidationReport)> {
    let meta_path = sidecar_path(trajectory_path);
    let csv_text = std::fs::read_to_string(trajectory_path)
        .map_err(|e| Error::io(format!("reading {}", trajectory_path.display()), e))?;
    let meta_text = std::fs::read_to_string(&meta_path)
        .map_err(|e| Error::io(format!("reading {}", meta_path.display()), e))?;
    let clip = parse_clip(&csv_text, &meta_text)?;
    let (clip, report) = validate_clip(clip, config)?;
    Ok((scale_to_meters(clip)?, report))
}

/// Writes `<dir>/<video_id>.csv` and its sidecar; returns the CSV path.
pub fn write_clip(clip: &VideoClip, dir: &Path) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)
        .map_err(|e| Error::io(format!("creating {}", dir.display()), e))?;
    let csv_path = dir.join(format!("{}.csv", clip.meta.video_id));
    std::fs::write(&csv_path, clip.to_csv())
        .map_err(|e| Error::io(format!("writing {}", csv_path.display()), e))?;
    let meta_path = sidecar_path(&csv_path);
    std::fs::write(&meta_path, clip.metadata_json())
        .map_err(|e| Error::io(format!("writing {}", meta_path.display()), e))?;
    Ok(csv_path)
}

/// Frames present in the clip, ascending.
pub fn frame_set(clip: &VideoClip) -> Vec<u32> {
    let frames: HashSet<u32> = clip
        .trajectories
        .values()
        .flatten()
        .map(|o| o.frame)
        .collect();
    let mut frames: Vec<u32> = frames.into_iter().collect();
    frames.sort_unstable();
    frames
}
