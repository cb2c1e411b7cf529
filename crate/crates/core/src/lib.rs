//! # crowd-ocean
//!
//! Estimates Big-Five (OCEAN) personality scores for pedestrians from
//! tracker output, then aggregates them per video and per country.
//!
//! The pipeline is:
//!
//! 1. [`ingest`]: parse, validate and scale trajectory CSV files.
//! 2. [`features`]: per-frame kinematics, social-space statistics,
//!    collectivity and the ground-truth socialization label.
//! 3. [`socialization`]: a 3-10-2 perceptron trained with scaled conjugate
//!    gradient that turns neighborhood statistics into a socialization
//!    probability.
//! 4. [`ocean`]: answer 25 questionnaire items from the averaged features,
//!    quantize them per video, and score the five dimensions.
//! 5. [`baselines`]: compare country scores against normative data.
//!
//! [`synth`] generates labeled synthetic clips and [`pipeline`] wires the
//! stages together for the command-line tool.

pub mod baselines;
pub mod error;
pub mod features;
pub mod ingest;
pub mod ocean;
pub mod pipeline;
pub mod socialization;
pub mod synth;

pub use error::{Error, Result};
