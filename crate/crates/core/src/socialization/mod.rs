//! Socialization classifier: a 3-10-2 perceptron (tanh hidden layer,
//! softmax output) mapping `(collectivity, mean distance, social-space
//! count)` to the probabilities of being social / not social.
//!
//! Inputs are z-scored with training-set statistics stored alongside the
//! weights, so callers always pass raw feature values.

mod dataset;
pub mod scg;
mod train;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::NeighborhoodStats;

pub use dataset::{evaluate, split_dataset, EvalReport, TrainingSample};
pub use train::{cross_entropy, scg_train, TrainConfig, TrainOutcome};

pub const INPUT_DIM: usize = 3;
pub const HIDDEN_DIM: usize = 10;
pub const OUTPUT_DIM: usize = 2;

/// Length of the flat parameter vector: hidden weights and biases followed
/// by output weights and biases.
pub const PARAM_COUNT: usize =
    HIDDEN_DIM * INPUT_DIM + HIDDEN_DIM + OUTPUT_DIM * HIDDEN_DIM + OUTPUT_DIM;

pub const MODEL_FORMAT_VERSION: u32 = 1;

const HIDDEN_W: usize = 0;
const HIDDEN_B: usize = HIDDEN_W + HIDDEN_DIM * INPUT_DIM;
const OUTPUT_W: usize = HIDDEN_B + HIDDEN_DIM;
const OUTPUT_B: usize = OUTPUT_W + OUTPUT_DIM * HIDDEN_DIM;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingMeta {
    pub trained: bool,
    pub seed: u64,
    pub iterations: usize,
    pub validation_accuracy: Option<f64>,
}

impl TrainingMeta {
    pub fn untrained() -> Self {
        Self {
            trained: false,
            seed: 0,
            iterations: 0,
            validation_accuracy: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlpWeights {
    /// Flat parameter vector, see [`PARAM_COUNT`].
    params: Vec<f64>,
    pub norm_mean: [f64; INPUT_DIM],
    pub norm_std: [f64; INPUT_DIM],
    pub meta: TrainingMeta,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SocialProbabilities {
    pub social: f64,
    pub not_social: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SocializationEstimate {
    pub level: f64,
    pub isolation: f64,
}

impl MlpWeights {
    pub fn zeros() -> Self {
        Self::from_params(vec![0.0; PARAM_COUNT]).expect("length is PARAM_COUNT")
    }

    /// Weights with identity normalization and no training metadata.
    pub fn from_params(params: Vec<f64>) -> Result<Self> {
        if params.len() != PARAM_COUNT {
            return Err(Error::Dimension(format!(
                "expected {PARAM_COUNT} parameters, got {}",
                params.len()
            )));
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::Format("weights must be finite".into()));
        }
        Ok(Self {
            params,
            norm_mean: [0.0; INPUT_DIM],
            norm_std: [1.0; INPUT_DIM],
            meta: TrainingMeta::untrained(),
        })
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn hidden_weight(&self, unit: usize, input: usize) -> f64 {
        self.params[HIDDEN_W + unit * INPUT_DIM + input]
    }

    pub fn hidden_bias(&self, unit: usize) -> f64 {
        self.params[HIDDEN_B + unit]
    }

    pub fn output_weight(&self, output: usize, unit: usize) -> f64 {
        self.params[OUTPUT_W + output * HIDDEN_DIM + unit]
    }

    pub fn output_bias(&self, output: usize) -> f64 {
        self.params[OUTPUT_B + output]
    }

    pub fn standardize(&self, input: &[f64; INPUT_DIM]) -> [f64; INPUT_DIM] {
        std::array::from_fn(|i| (input[i] - self.norm_mean[i]) / self.norm_std[i])
    }

    /// Output probabilities for a raw (unstandardized) input.
    pub fn forward(&self, input: &[f64; INPUT_DIM]) -> Result<SocialProbabilities> {
        if input.iter().any(|v| !v.is_finite()) {
            return Err(Error::Input(format!(
                "non-finite classifier input {input:?}"
            )));
        }
        let logits = logits(&self.params, &self.standardize(input)).1;
        let [social, not_social] = softmax(logits);
        Ok(SocialProbabilities { social, not_social })
    }

    /// `p_social` and its complement for one agent-frame.
    pub fn predict_socialization(
        &self,
        stats: &NeighborhoodStats,
        collectivity: f64,
    ) -> Result<SocializationEstimate> {
        if !self.meta.trained {
            return Err(Error::Usage(
                "socialization model has not been trained".into(),
            ));
        }
        let p = self.forward(&classifier_input(stats, collectivity))?;
        Ok(SocializationEstimate {
            level: p.social,
            isolation: 1.0 - p.social,
        })
    }

    pub fn to_json(&self) -> String {
        let file = ModelFile {
            version: MODEL_FORMAT_VERSION,
            dims: vec![INPUT_DIM, HIDDEN_DIM, OUTPUT_DIM],
            hidden_weights: self.params[HIDDEN_W..HIDDEN_B].to_vec(),
            hidden_bias: self.params[HIDDEN_B..OUTPUT_W].to_vec(),
            output_weights: self.params[OUTPUT_W..OUTPUT_B].to_vec(),
            output_bias: self.params[OUTPUT_B..].to_vec(),
            norm_mean: self.norm_mean.to_vec(),
            norm_std: self.norm_std.to_vec(),
            training_meta: self.meta.clone(),
        };
        serde_json::to_string_pretty(&file).expect("model is always serializable")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ModelFile =
            serde_json::from_str(text).map_err(|e| Error::Format(format!("model file: {e}")))?;
        if file.version != MODEL_FORMAT_VERSION {
            return Err(Error::Format(format!(
                "model file version {} is not supported (expected {MODEL_FORMAT_VERSION})",
                file.version
            )));
        }
        if file.dims != [INPUT_DIM, HIDDEN_DIM, OUTPUT_DIM] {
            return Err(Error::Dimension(format!(
                "model dims {:?}, expected [{INPUT_DIM}, {HIDDEN_DIM}, {OUTPUT_DIM}]",
                file.dims
            )));
        }
        let expect = |name: &str, values: &[f64], len: usize| -> Result<()> {
            if values.len() == len {
                Ok(())
            } else {
                Err(Error::Dimension(format!(
                    "{name} has {} values, expected {len}",
                    values.len()
                )))
            }
        };
        expect(
            "hidden_weights",
            &file.hidden_weights,
            HIDDEN_DIM * INPUT_DIM,
        )?;
        expect("hidden_bias", &file.hidden_bias, HIDDEN_DIM)?;
        expect(
            "output_weights",
            &file.output_weights,
            OUTPUT_DIM * HIDDEN_DIM,
        )?;
        expect("output_bias", &file.output_bias, OUTPUT_DIM)?;
        expect("norm_mean", &file.norm_mean, INPUT_DIM)?;
        expect("norm_std", &file.norm_std, INPUT_DIM)?;

        let mut params = file.hidden_weights;
        params.extend(file.hidden_bias);
        params.extend(file.output_weights);
        params.extend(file.output_bias);
        let mut weights = Self::from_params(params)?;
        weights.norm_mean = std::array::from_fn(|i| file.norm_mean[i]);
        weights.norm_std = std::array::from_fn(|i| file.norm_std[i]);
        if weights.norm_mean.iter().any(|v| !v.is_finite())
            || weights
                .norm_std
                .iter()
                .any(|v| !(v.is_finite() && *v > 0.0))
        {
            return Err(Error::Format(
                "normalization constants must be finite with positive std".into(),
            ));
        }
        weights.meta = file.training_meta;
        Ok(weights)
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, self.to_json())
            .map_err(|e| Error::io(format!("writing model {}", path.display()), e))
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::io(format!("reading model {}", path.display()), e))?;
        Self::from_json(&text)
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    version: u32,
    dims: Vec<usize>,
    hidden_weights: Vec<f64>,
    hidden_bias: Vec<f64>,
    output_weights: Vec<f64>,
    output_bias: Vec<f64>,
    norm_mean: Vec<f64>,
    norm_std: Vec<f64>,
    training_meta: TrainingMeta,
}

/// Classifier input in the order the network expects.
pub fn classifier_input(stats: &NeighborhoodStats, collectivity: f64) -> [f64; INPUT_DIM] {
    [collectivity, stats.mean_distance, stats.n_social as f64]
}

/// Hidden activations and output logits for a standardized input.
pub(crate) fn logits(
    params: &[f64],
    x: &[f64; INPUT_DIM],
) -> ([f64; HIDDEN_DIM], [f64; OUTPUT_DIM]) {
    let hidden: [f64; HIDDEN_DIM] = std::array::from_fn(|j| {
        let row = &params[HIDDEN_W + j * INPUT_DIM..HIDDEN_W + (j + 1) * INPUT_DIM];
        let a = params[HIDDEN_B + j] + row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>();
        a.tanh()
    });
    let out: [f64; OUTPUT_DIM] = std::array::from_fn(|k| {
        let row = &params[OUTPUT_W + k * HIDDEN_DIM..OUTPUT_W + (k + 1) * HIDDEN_DIM];
        params[OUTPUT_B + k] + row.iter().zip(&hidden).map(|(w, h)| w * h).sum::<f64>()
    });
    (hidden, out)
}

pub(crate) fn softmax(z: [f64; OUTPUT_DIM]) -> [f64; OUTPUT_DIM] {
    let max = z[0].max(z[1]);
    let e = [(z[0] - max).exp(), (z[1] - max).exp()];
    let total = e[0] + e[1];
    [e[0] / total, e[1] / total]
}
