use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dataset::{evaluate, split_dataset, EvalReport, TrainingSample};
use super::scg::{self, Objective, ScgSettings};
use super::{
    logits, softmax, MlpWeights, TrainingMeta, HIDDEN_B, HIDDEN_DIM, HIDDEN_W, INPUT_DIM, OUTPUT_B,
    OUTPUT_DIM, OUTPUT_W, PARAM_COUNT,
};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub max_iterations: usize,
    pub gradient_tolerance: f64,
    pub sigma0: f64,
    pub lambda0: f64,
    pub split_fraction: f64,
    /// Set from the pipeline's top-level seed rather than a config key.
    #[serde(skip)]
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            max_iterations: 500,
            gradient_tolerance: 1e-6,
            sigma0: 1e-4,
            lambda0: 1e-6,
            split_fraction: 0.7,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.split_fraction > 0.0 && self.split_fraction < 1.0) {
            return Err(Error::Config(format!(
                "split_fraction must lie in (0, 1), got {}",
                self.split_fraction
            )));
        }
        for (name, v) in [
            ("gradient_tolerance", self.gradient_tolerance),
            ("sigma0", self.sigma0),
            ("lambda0", self.lambda0),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    fn scg(&self) -> ScgSettings {
        ScgSettings {
            max_iterations: self.max_iterations,
            gradient_tolerance: self.gradient_tolerance,
            sigma0: self.sigma0,
            lambda0: self.lambda0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub weights: MlpWeights,
    pub validation: EvalReport,
    pub training: EvalReport,
    pub iterations: usize,
    pub converged: bool,
    pub loss_history: Vec<f64>,
}

/// Samples per parallel gradient chunk; partial sums are reduced in chunk
/// order so results do not depend on the thread count.
const CHUNK: usize = 512;

/// Mean cross-entropy over standardized inputs.
pub struct CrossEntropy {
    inputs: Vec<[f64; INPUT_DIM]>,
    targets: Vec<usize>,
}

impl CrossEntropy {
    /// `inputs` must already be standardized. Label `true` is output 0.
    pub fn new(inputs: Vec<[f64; INPUT_DIM]>, labels: &[bool]) -> Self {
        assert_eq!(inputs.len(), labels.len());
        let targets = labels.iter().map(|&social| usize::from(!social)).collect();
        Self { inputs, targets }
    }

    fn chunk_loss(&self, params: &[f64], range: std::ops::Range<usize>) -> f64 {
        range
            .map(|i| {
                let z = logits(params, &self.inputs[i]).1;
                log_sum_exp(z) - z[self.targets[i]]
            })
            .sum()
    }

    fn chunk_gradient(&self, params: &[f64], range: std::ops::Range<usize>) -> (f64, Vec<f64>) {
        let mut grad = vec![0.0; PARAM_COUNT];
        let mut loss = 0.0;
        for i in range {
            let x = &self.inputs[i];
            let (hidden, z) = logits(params, x);
            let p = softmax(z);
            loss += log_sum_exp(z) - z[self.targets[i]];

            let mut dz = p;
            dz[self.targets[i]] -= 1.0;
            let mut dhidden = [0.0; HIDDEN_DIM];
            for k in 0..OUTPUT_DIM {
                grad[OUTPUT_B + k] += dz[k];
                for j in 0..HIDDEN_DIM {
                    grad[OUTPUT_W + k * HIDDEN_DIM + j] += dz[k] * hidden[j];
                    dhidden[j] += dz[k] * params[OUTPUT_W + k * HIDDEN_DIM + j];
                }
            }
            for j in 0..HIDDEN_DIM {
                let da = dhidden[j] * (1.0 - hidden[j] * hidden[j]);
                grad[HIDDEN_B + j] += da;
                for (m, xm) in x.iter().enumerate() {
                    grad[HIDDEN_W + j * INPUT_DIM + m] += da * xm;
                }
            }
        }
        (loss, grad)
    }

    fn chunks(&self) -> Vec<std::ops::Range<usize>> {
        (0..self.inputs.len())
            .step_by(CHUNK)
            .map(|start| start..(start + CHUNK).min(self.inputs.len()))
            .collect()
    }
}

fn log_sum_exp(z: [f64; OUTPUT_DIM]) -> f64 {
    let max = z[0].max(z[1]);
    max + ((z[0] - max).exp() + (z[1] - max).exp()).ln()
}

impl Objective for CrossEntropy {
    fn dimension(&self) -> usize {
        PARAM_COUNT
    }

    fn value(&self, params: &[f64]) -> f64 {
        let partial: Vec<f64> = self
            .chunks()
            .into_par_iter()
            .map(|range| self.chunk_loss(params, range))
            .collect();
        partial.iter().sum::<f64>() / self.inputs.len() as f64
    }

    fn value_and_gradient(&self, params: &[f64]) -> (f64, Vec<f64>) {
        let partial: Vec<(f64, Vec<f64>)> = self
            .chunks()
            .into_par_iter()
            .map(|range| self.chunk_gradient(params, range))
            .collect();
        let n = self.inputs.len() as f64;
        let mut loss = 0.0;
        let mut grad = vec![0.0; PARAM_COUNT];
        for (l, g) in partial {
            loss += l;
            grad.iter_mut().zip(g).for_each(|(a, b)| *a += b);
        }
        grad.iter_mut().for_each(|g| *g /= n);
        (loss / n, grad)
    }
}

/// Mean cross-entropy and its gradient for raw inputs standardized with
/// `weights`' normalization.
pub fn cross_entropy(weights: &MlpWeights, samples: &[TrainingSample]) -> (f64, Vec<f64>) {
    let objective = objective_for(weights, samples);
    objective.value_and_gradient(weights.params())
}

fn objective_for(weights: &MlpWeights, samples: &[TrainingSample]) -> CrossEntropy {
    let inputs = samples
        .iter()
        .map(|s| weights.standardize(&s.input))
        .collect();
    let labels: Vec<bool> = samples.iter().map(|s| s.label).collect();
    CrossEntropy::new(inputs, &labels)
}

fn normalization(samples: &[TrainingSample]) -> ([f64; INPUT_DIM], [f64; INPUT_DIM]) {
    let n = samples.len() as f64;
    let mean: [f64; INPUT_DIM] =
        std::array::from_fn(|i| samples.iter().map(|s| s.input[i]).sum::<f64>() / n);
    let std: [f64; INPUT_DIM] = std::array::from_fn(|i| {
        let var = samples
            .iter()
            .map(|s| (s.input[i] - mean[i]).powi(2))
            .sum::<f64>()
            / n;
        let sd = var.sqrt();
        // constant features pass through centered but unscaled
        if sd > 1e-12 {
            sd
        } else {
            1.0
        }
    });
    (mean, std)
}

/// Full-batch SCG training on a seeded 70/30 (by default) split.
pub fn scg_train(samples: &[TrainingSample], config: &TrainConfig) -> Result<TrainOutcome> {
    config.validate()?;
    for sample in samples {
        sample.validate()?;
    }
    let (train, validation) = split_dataset(samples, config.split_fraction, config.seed)?;

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0x0005_eed0_f5c9);
    let init: Vec<f64> = (0..PARAM_COUNT)
        .map(|_| rng.random_range(-0.5..=0.5))
        .collect();
    let mut weights = MlpWeights::from_params(init)?;
    let (mean, std) = normalization(&train);
    weights.norm_mean = mean;
    weights.norm_std = std;

    let objective = objective_for(&weights, &train);
    let outcome = scg::minimize(&objective, weights.params().to_vec(), &config.scg())?;
    log::info!(
        "scg: {} iterations, loss {:.6} -> {:.6}, |grad| {:.3e}",
        outcome.iterations,
        outcome.initial_loss(),
        outcome.final_loss(),
        outcome.gradient_norm
    );

    let mut trained = MlpWeights::from_params(outcome.params)?;
    trained.norm_mean = mean;
    trained.norm_std = std;
    trained.meta = TrainingMeta {
        trained: true,
        seed: config.seed,
        iterations: outcome.iterations,
        validation_accuracy: None,
    };
    let validation_report = evaluate(&trained, &validation)?;
    let training_report = evaluate(&trained, &train)?;
    trained.meta.validation_accuracy = Some(validation_report.accuracy);

    Ok(TrainOutcome {
        weights: trained,
        validation: validation_report,
        training: training_report,
        iterations: outcome.iterations,
        converged: outcome.converged,
        loss_history: outcome.loss_history,
    })
}
