use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{MlpWeights, INPUT_DIM};
use crate::error::{Error, Result};

/// One labeled agent-frame: `(collectivity, mean distance, social-space
/// count)` and whether the ground truth marks it social.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainingSample {
    pub input: [f64; INPUT_DIM],
    pub label: bool,
}

impl TrainingSample {
    pub fn validate(&self) -> Result<()> {
        let [collectivity, distance, count] = self.input;
        if self.input.iter().any(|v| !v.is_finite()) {
            return Err(Error::Input(format!(
                "non-finite training input {:?}",
                self.input
            )));
        }
        if !(0.0..=1.0).contains(&collectivity) || distance < 0.0 || count < 0.0 {
            return Err(Error::Input(format!(
                "training input out of range {:?}",
                self.input
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub total: usize,
    pub correct: usize,
    pub accuracy: f64,
    pub true_social: usize,
    pub false_social: usize,
    pub true_not_social: usize,
    pub false_not_social: usize,
}

/// Accuracy and confusion counts, predicting "social" when its probability
/// is the (first) maximum.
pub fn evaluate(weights: &MlpWeights, samples: &[TrainingSample]) -> Result<EvalReport> {
    if samples.is_empty() {
        return Err(Error::InsufficientData(
            "cannot evaluate on zero samples".into(),
        ));
    }
    let mut report = EvalReport {
        total: samples.len(),
        correct: 0,
        accuracy: 0.0,
        true_social: 0,
        false_social: 0,
        true_not_social: 0,
        false_not_social: 0,
    };
    for sample in samples {
        let p = weights.forward(&sample.input)?;
        let predicted_social = p.social >= p.not_social;
        match (predicted_social, sample.label) {
            (true, true) => report.true_social += 1,
            (true, false) => report.false_social += 1,
            (false, false) => report.true_not_social += 1,
            (false, true) => report.false_not_social += 1,
        }
    }
    report.correct = report.true_social + report.true_not_social;
    report.accuracy = report.correct as f64 / report.total as f64;
    Ok(report)
}

pub const MIN_SAMPLES: usize = 10;

fn train_size(n: usize, fraction: f64) -> usize {
    // small epsilon so that e.g. 10 × 0.7 floors to 7, not 6
    let raw = (n as f64 * fraction + 1e-9).floor() as usize;
    raw.clamp(1, n - 1)
}

/// Seeded, stratified shuffle-split. The training set receives
/// `floor(n · split_fraction)` samples (at least one sample is always held
/// out) and contains both classes whenever both occur.
pub fn split_dataset(
    samples: &[TrainingSample],
    split_fraction: f64,
    seed: u64,
) -> Result<(Vec<TrainingSample>, Vec<TrainingSample>)> {
    if !(split_fraction > 0.0 && split_fraction < 1.0) {
        return Err(Error::Config(format!(
            "split_fraction must lie in (0, 1), got {split_fraction}"
        )));
    }
    if samples.len() < MIN_SAMPLES {
        return Err(Error::InsufficientData(format!(
            "need at least {MIN_SAMPLES} samples to split, got {}",
            samples.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut social, mut not_social): (Vec<_>, Vec<_>) =
        samples.iter().copied().partition(|s| s.label);
    social.shuffle(&mut rng);
    not_social.shuffle(&mut rng);

    if social.is_empty() || not_social.is_empty() {
        log::warn!(
            "training set contains a single class ({} samples, all {})",
            samples.len(),
            if social.is_empty() {
                "not social"
            } else {
                "social"
            }
        );
    }

    let n = samples.len();
    let n_train = train_size(n, split_fraction);
    let min_social = usize::from(!social.is_empty());
    let min_not = usize::from(!not_social.is_empty());
    let proportional = (n_train as f64 * social.len() as f64 / n as f64).round() as usize;
    let lower = min_social.max(n_train.saturating_sub(not_social.len()));
    let upper = social.len().min(n_train - min_not.min(n_train));
    let social_train = proportional.clamp(lower, upper.max(lower));
    let not_train = n_train - social_train;

    let mut train: Vec<TrainingSample> = social[..social_train]
        .iter()
        .chain(&not_social[..not_train])
        .copied()
        .collect();
    let validation: Vec<TrainingSample> = social[social_train..]
        .iter()
        .chain(&not_social[not_train..])
        .copied()
        .collect();
    train.shuffle(&mut rng);
    Ok((train, validation))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn samples(n_social: usize, n_not: usize) -> Vec<TrainingSample> {
        (0..n_social + n_not)
            .map(|i| TrainingSample {
                input: [0.5, i as f64, (i % 4) as f64],
                label: i < n_social,
            })
            .collect()
    }

    #[test]
    fn seventy_thirty() {
        let (train, val) = split_dataset(&samples(5, 5), 0.7, 1).unwrap();
        assert_eq!((train.len(), val.len()), (7, 3));
    }

    #[test]
    fn deterministic_for_seed() {
        let data = samples(30, 70);
        assert_eq!(
            split_dataset(&data, 0.7, 9).unwrap(),
            split_dataset(&data, 0.7, 9).unwrap()
        );
        assert_ne!(
            split_dataset(&data, 0.7, 9).unwrap(),
            split_dataset(&data, 0.7, 10).unwrap()
        );
    }

    #[test]
    fn keeps_one_validation_sample() {
        let (train, val) = split_dataset(&samples(5, 5), 0.999, 1).unwrap();
        assert_eq!((train.len(), val.len()), (9, 1));
    }

    #[test]
    fn stratified_keeps_rare_class_in_training() {
        let (train, val) = split_dataset(&samples(1, 19), 0.7, 3).unwrap();
        assert_eq!(train.len() + val.len(), 20);
        assert!(train.iter().any(|s| s.label));
        assert!(train.iter().any(|s| !s.label));

        let (train, _) = split_dataset(&samples(19, 1), 0.1, 3).unwrap();
        assert!(train.iter().any(|s| s.label) && train.iter().any(|s| !s.label));
    }

    #[test]
    fn single_class_is_allowed() {
        let (train, val) = split_dataset(&samples(0, 12), 0.7, 3).unwrap();
        assert_eq!((train.len(), val.len()), (8, 4));
    }

    #[test]
    fn split_rejections() {
        assert!(matches!(
            split_dataset(&samples(3, 3), 0.7, 0),
            Err(Error::InsufficientData(_))
        ));
        assert!(matches!(
            split_dataset(&samples(5, 5), 1.0, 0),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn sample_validation() {
        let ok = TrainingSample {
            input: [0.2, 3.0, 1.0],
            label: true,
        };
        assert!(ok.validate().is_ok());
        let bad = TrainingSample {
            input: [1.2, 3.0, 1.0],
            label: true,
        };
        assert!(bad.validate().is_err());
        let bad = TrainingSample {
            input: [0.2, f64::INFINITY, 1.0],
            label: true,
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn constant_predictor_on_balanced_set() {
        // zero weights tie at 0.5 and predict "social" for everything
        let report = evaluate(&MlpWeights::zeros(), &samples(5, 5)).unwrap();
        assert_eq!(report.accuracy, 0.5);
        assert_eq!(report.true_social, 5);
        assert_eq!(report.false_social, 5);
        assert!(evaluate(&MlpWeights::zeros(), &[]).is_err());
    }

    #[test]
    fn perfect_predictor() {
        // one hidden unit copies the count; output 0 grows with it
        let mut params = vec![0.0; super::super::PARAM_COUNT];
        params[2] = 5.0; // hidden 0 ← count
        params[40] = 10.0; // social logit ← hidden 0
        let weights = MlpWeights::from_params(params).unwrap();
        let data: Vec<TrainingSample> = (0..10)
            .map(|i| TrainingSample {
                input: [0.0, 0.0, if i < 5 { 1.0 } else { -1.0 }],
                label: i < 5,
            })
            .collect();
        let report = evaluate(&weights, &data).unwrap();
        assert_eq!(report.accuracy, 1.0);
        assert_eq!(report.correct, 10);
    }
}
