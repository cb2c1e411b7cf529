//! Questionnaire answering and OCEAN scoring.
//!
//! Twenty-five inventory items are answered from an agent's averaged
//! features, quantized to five levels relative to the per-video maximum of
//! each item, optionally reverse-keyed, and summed into the five dimensions.
//! Every dimension is divided by its share of the 25 items, which maps the
//! attainable range onto `[0, 100]`; stored scores are that value / 100.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::FeatureSummary;

pub const ITEM_COUNT: usize = 25;
pub const MAX_LEVEL: u8 = 4;
const LEVELS: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Dimension {
    #[serde(rename = "O")]
    Openness,
    #[serde(rename = "C")]
    Conscientiousness,
    #[serde(rename = "E")]
    Extraversion,
    #[serde(rename = "A")]
    Agreeableness,
    #[serde(rename = "N")]
    Neuroticism,
}

impl Dimension {
    pub const ALL: [Dimension; 5] = [
        Dimension::Openness,
        Dimension::Conscientiousness,
        Dimension::Extraversion,
        Dimension::Agreeableness,
        Dimension::Neuroticism,
    ];

    pub fn letter(self) -> &'static str {
        match self {
            Dimension::Openness => "O",
            Dimension::Conscientiousness => "C",
            Dimension::Extraversion => "E",
            Dimension::Agreeableness => "A",
            Dimension::Neuroticism => "N",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Keying {
    /// Contributes `Q'`.
    Direct,
    /// Contributes `Q* = 4 − Q'`.
    Reversed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ItemKey {
    /// 1-based item number.
    pub item: usize,
    pub dimension: Dimension,
    pub keying: Keying,
}

/// Scoring key for the 25 items.
///
/// With `strict_paper` item 3 ("shy away from crowds") is scored direct on
/// Extraversion, the literal scoring key; otherwise it is reverse-keyed like
/// the other introversion items.
pub fn item_keys(strict_paper: bool) -> [ItemKey; ITEM_COUNT] {
    use Dimension::*;
    use Keying::*;
    std::array::from_fn(|i| {
        let item = i + 1;
        let (dimension, keying) = match item {
            1 => (Conscientiousness, Direct),
            2 => (Openness, Reversed),
            3 if strict_paper => (Extraversion, Direct),
            3 => (Extraversion, Reversed),
            4..=8 => (Extraversion, Reversed),
            9 | 10 => (Agreeableness, Direct),
            11 => (Extraversion, Reversed),
            12 => (Extraversion, Direct),
            13 => (Neuroticism, Direct),
            14 => (Extraversion, Direct),
            15 => (Extraversion, Reversed),
            16..=23 => (Extraversion, Direct),
            24 | 25 => (Neuroticism, Reversed),
            _ => unreachable!("items are numbered 1..=25"),
        };
        ItemKey {
            item,
            dimension,
            keying,
        }
    })
}

/// Share of the 25 items belonging to each dimension.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DimensionWeights {
    pub openness: f64,
    pub conscientiousness: f64,
    pub extraversion: f64,
    pub agreeableness: f64,
    pub neuroticism: f64,
}

impl Default for DimensionWeights {
    fn default() -> Self {
        Self {
            openness: 0.04,
            conscientiousness: 0.04,
            extraversion: 0.72,
            agreeableness: 0.08,
            neuroticism: 0.12,
        }
    }
}

impl DimensionWeights {
    pub fn get(&self, dimension: Dimension) -> f64 {
        match dimension {
            Dimension::Openness => self.openness,
            Dimension::Conscientiousness => self.conscientiousness,
            Dimension::Extraversion => self.extraversion,
            Dimension::Agreeableness => self.agreeableness,
            Dimension::Neuroticism => self.neuroticism,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let total: f64 = Dimension::ALL.iter().map(|&d| self.get(d)).sum();
        if Dimension::ALL
            .iter()
            .any(|&d| !self.get(d).is_finite() || self.get(d) <= 0.0)
            || (total - 1.0).abs() > 1e-9
        {
            return Err(Error::Config(format!(
                "dimension weights must be positive and sum to 1, got {self:?} (sum {total})"
            )));
        }
        Ok(())
    }
}

/// Floors for the reciprocal terms of the item equations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GuardParams {
    /// Degrees; floor for `1/α`.
    pub eps_alpha: f64,
    /// Floor for `1/φ` and `1/Q14`.
    pub eps_phi: f64,
}

impl Default for GuardParams {
    fn default() -> Self {
        Self {
            eps_alpha: 0.1,
            eps_phi: 0.01,
        }
    }
}

impl GuardParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.eps_alpha.is_finite()
            && self.eps_alpha > 0.0
            && self.eps_phi.is_finite()
            && self.eps_phi > 0.0)
        {
            return Err(Error::Config(format!(
                "guards must be positive, got {self:?}"
            )));
        }
        Ok(())
    }
}

/// Unquantized item answers, index 0 holds item 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RawItems(pub [f64; ITEM_COUNT]);

impl RawItems {
    pub fn item(&self, k: usize) -> f64 {
        self.0[k - 1]
    }
}

/// Item levels in `0..=4`, index 0 holds item 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QuantizedItems([u8; ITEM_COUNT]);

impl QuantizedItems {
    pub fn new(levels: [u8; ITEM_COUNT]) -> Result<Self> {
        if let Some(bad) = levels.iter().find(|&&l| l > MAX_LEVEL) {
            return Err(Error::Input(format!(
                "item level {bad} exceeds {MAX_LEVEL}"
            )));
        }
        Ok(Self(levels))
    }

    pub fn levels(&self) -> &[u8; ITEM_COUNT] {
        &self.0
    }

    pub fn item(&self, k: usize) -> u8 {
        self.0[k - 1]
    }

    /// `4 − q` element-wise.
    pub fn reversed(&self) -> Self {
        Self(self.0.map(|l| MAX_LEVEL - l))
    }
}

pub fn reverse_items(q: &QuantizedItems) -> QuantizedItems {
    q.reversed()
}

/// Answers the 25 items from one agent's averaged features.
pub fn answer_items(summary: &FeatureSummary, guards: &GuardParams) -> RawItems {
    let speed = summary.mean_speed;
    let alpha = summary.mean_angular_variation;
    let alpha_std = summary.std_angular_variation;
    let collectivity = summary.mean_collectivity;
    let socialization = summary.mean_socialization;
    let isolation = summary.mean_isolation;

    let inv_alpha = 1.0 / alpha.max(guards.eps_alpha);
    let inv_collectivity = 1.0 / collectivity.max(guards.eps_phi);
    let q14 = collectivity + socialization + inv_alpha;

    RawItems(std::array::from_fn(|i| match i + 1 {
        1 => speed + inv_alpha,
        2 => alpha,
        3..=8 => isolation,
        9 | 10 => collectivity,
        11 => isolation + alpha_std,
        12 => speed + alpha,
        13 => isolation + inv_collectivity,
        14 => q14,
        15 => 1.0 / q14.max(guards.eps_phi),
        16..=21 => socialization,
        22..=25 => socialization + collectivity,
        _ => unreachable!(),
    }))
}

/// Maps each item to five uniform bins of `[0, max]`, where `max` is the
/// largest answer to that item among the agents of one video. The top bin
/// includes the maximum; an item nobody scores above zero is level 0.
pub fn quantize_items(all_raw: &[RawItems]) -> Vec<QuantizedItems> {
    let maxima: [f64; ITEM_COUNT] =
        std::array::from_fn(|k| all_raw.iter().map(|r| r.0[k]).fold(0.0, f64::max));
    all_raw
        .iter()
        .map(|raw| {
            QuantizedItems(std::array::from_fn(|k| {
                if maxima[k] <= 0.0 {
                    0
                } else {
                    let level = (LEVELS * (raw.0[k].max(0.0) / maxima[k])).floor();
                    level.min(f64::from(MAX_LEVEL)) as u8
                }
            }))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScoreLevel {
    Individual,
    Video,
    Country,
}

impl ScoreLevel {
    pub fn as_str(self) -> &'static str {
        match self {
            ScoreLevel::Individual => "individual",
            ScoreLevel::Video => "video",
            ScoreLevel::Country => "country",
        }
    }
}

/// Five dimension scores in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OceanScore {
    #[serde(rename = "O")]
    pub openness: f64,
    #[serde(rename = "C")]
    pub conscientiousness: f64,
    #[serde(rename = "E")]
    pub extraversion: f64,
    #[serde(rename = "A")]
    pub agreeableness: f64,
    #[serde(rename = "N")]
    pub neuroticism: f64,
    pub level: ScoreLevel,
}

impl OceanScore {
    pub fn from_values(values: [f64; 5], level: ScoreLevel) -> Self {
        Self {
            openness: values[0],
            conscientiousness: values[1],
            extraversion: values[2],
            agreeableness: values[3],
            neuroticism: values[4],
            level,
        }
    }

    pub fn values(&self) -> [f64; 5] {
        [
            self.openness,
            self.conscientiousness,
            self.extraversion,
            self.agreeableness,
            self.neuroticism,
        ]
    }

    pub fn get(&self, dimension: Dimension) -> f64 {
        self.values()[dimension.index()]
    }
}

/// Dimension scores on the `[0, 100]` scale, in O, C, E, A, N order.
pub fn raw_dimension_scores(
    q: &QuantizedItems,
    weights: &DimensionWeights,
    strict_paper: bool,
) -> [f64; 5] {
    let mut sums = [0u32; 5];
    for key in item_keys(strict_paper) {
        let level = q.item(key.item);
        let contribution = match key.keying {
            Keying::Direct => level,
            Keying::Reversed => MAX_LEVEL - level,
        };
        sums[key.dimension.index()] += u32::from(contribution);
    }
    std::array::from_fn(|d| f64::from(sums[d]) / weights.get(Dimension::ALL[d]))
}

/// Individual-level OCEAN score.
pub fn score_dimensions(
    q: &QuantizedItems,
    weights: &DimensionWeights,
    strict_paper: bool,
) -> OceanScore {
    let raw = raw_dimension_scores(q, weights, strict_paper);
    OceanScore::from_values(raw.map(|v| v / 100.0), ScoreLevel::Individual)
}

/// Mean that does not depend on input order: values are summed in ascending
/// order.
fn order_free_mean(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    values.iter().sum::<f64>() / values.len() as f64
}

fn mean_score(scores: &[OceanScore], level: ScoreLevel) -> OceanScore {
    let values = std::array::from_fn(|d| {
        let mut column: Vec<f64> = scores.iter().map(|s| s.values()[d]).collect();
        order_free_mean(&mut column)
    });
    OceanScore::from_values(values, level)
}

/// Video score: per-dimension mean over its individuals.
pub fn aggregate_video(scores: &[OceanScore]) -> Result<OceanScore> {
    if scores.is_empty() {
        return Err(Error::InsufficientData(
            "cannot aggregate a video with no individuals".into(),
        ));
    }
    Ok(mean_score(scores, ScoreLevel::Video))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VideoScore {
    pub video_id: String,
    pub country: String,
    pub individuals: usize,
    pub score: OceanScore,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountryScore {
    pub country: String,
    pub videos: usize,
    pub score: OceanScore,
}

/// Country scores: unweighted mean over each country's videos, sorted by
/// country code.
pub fn aggregate_country(videos: &[VideoScore]) -> Vec<CountryScore> {
    let mut grouped: BTreeMap<&str, Vec<OceanScore>> = BTreeMap::new();
    for video in videos {
        grouped
            .entry(video.country.as_str())
            .or_default()
            .push(video.score);
    }
    grouped
        .into_iter()
        .map(|(country, scores)| CountryScore {
            country: country.to_string(),
            videos: scores.len(),
            score: mean_score(&scores, ScoreLevel::Country),
        })
        .collect()
}

/// One row of the scores table; the level comes from the score.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRow {
    pub id: String,
    pub country: String,
    #[serde(flatten)]
    pub score: OceanScore,
}

pub const SCORES_CSV_HEADER: &str = "level,id,country,O,C,E,A,N";

pub fn scores_csv(rows: &[ScoreRow]) -> String {
    let mut out = String::from(SCORES_CSV_HEADER);
    out.push('\n');
    for row in rows {
        let v = row.score.values();
        let _ = writeln!(
            out,
            "{},{},{},{:.4},{:.4},{:.4},{:.4},{:.4}",
            row.score.level.as_str(),
            row.id,
            row.country,
            v[0],
            v[1],
            v[2],
            v[3],
            v[4]
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn summary(
        speed: f64,
        alpha: f64,
        alpha_std: f64,
        collectivity: f64,
        socialization: f64,
    ) -> FeatureSummary {
        FeatureSummary {
            agent_id: 1,
            mean_speed: speed,
            mean_angular_variation: alpha,
            std_angular_variation: alpha_std,
            mean_collectivity: collectivity,
            mean_socialization: socialization,
            mean_isolation: 1.0 - socialization,
            frame_count: 10,
        }
    }

    #[test]
    fn answers_for_fully_social_agent() {
        let q = answer_items(&summary(1.0, 2.0, 0.0, 1.0, 1.0), &GuardParams::default());
        for k in 16..=21 {
            assert_eq!(q.item(k), 1.0);
        }
        for k in 22..=25 {
            assert_eq!(q.item(k), 2.0);
        }
        assert_eq!(q.item(14), 2.5);
        assert_eq!(q.item(15), 0.4);
        assert_eq!(q.item(1), 1.5);
        assert_eq!(q.item(2), 2.0);
        assert_eq!(q.item(3), 0.0);
        assert_eq!(q.item(9), 1.0);
        assert_eq!(q.item(12), 3.0);
    }

    #[test]
    fn guards_bound_reciprocals() {
        let q = answer_items(&summary(0.7, 0.0, 0.0, 0.0, 1.0), &GuardParams::default());
        assert_eq!(q.item(1), 0.7 + 10.0);
        // isolation 0 and collectivity 0
        assert_eq!(q.item(13), 100.0);
    }

    #[test]
    fn quantization_bins() {
        let mut a = [0.0; ITEM_COUNT];
        let mut b = [0.0; ITEM_COUNT];
        a[0] = 10.0;
        b[0] = 4.9;
        b[1] = 3.0;
        let q = quantize_items(&[RawItems(a), RawItems(b)]);
        assert_eq!(q[0].item(1), 4);
        assert_eq!(q[1].item(1), 2);
        assert_eq!(q[0].item(2), 0);
        assert_eq!(q[1].item(2), 4);
        // all-zero item
        assert_eq!(q[0].item(3), 0);
        assert_eq!(q[1].item(3), 0);
    }

    #[test]
    fn reversal() {
        let mut levels = [0u8; ITEM_COUNT];
        levels[1] = 4;
        let q = QuantizedItems::new(levels).unwrap();
        let r = reverse_items(&q);
        assert_eq!(r.item(1), 4);
        assert_eq!(r.item(2), 0);
        assert_eq!(reverse_items(&r), q);
        assert!(QuantizedItems::new([5; ITEM_COUNT]).is_err());
    }

    #[test]
    fn item_partition_matches_weights() {
        for strict in [true, false] {
            let mut counts = [0usize; 5];
            for key in item_keys(strict) {
                counts[key.dimension.index()] += 1;
            }
            assert_eq!(counts, [1, 1, 18, 2, 3]);
            let w = DimensionWeights::default();
            for d in Dimension::ALL {
                assert!((counts[d.index()] as f64 / 25.0 - w.get(d)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn max_cases() {
        let mut levels = [2u8; ITEM_COUNT];
        levels[1] = 0; // Q2
        levels[8] = 4; // Q9
        levels[9] = 4; // Q10
        let s = score_dimensions(
            &QuantizedItems::new(levels).unwrap(),
            &DimensionWeights::default(),
            true,
        );
        assert_eq!(s.openness, 1.0);
        assert_eq!(s.agreeableness, 1.0);
    }

    #[test]
    fn all_fours() {
        let q = QuantizedItems::new([4; ITEM_COUNT]).unwrap();
        let raw = raw_dimension_scores(&q, &DimensionWeights::default(), true);
        assert!((raw[2] - 44.0 / 0.72).abs() < 1e-9);
        let s = score_dimensions(&q, &DimensionWeights::default(), true);
        assert!((s.extraversion - 0.6111111111).abs() < 1e-9);
        assert_eq!(s.conscientiousness, 1.0);
        assert_eq!(s.openness, 0.0);
        // non-strict moves Q3 into the reversed sum
        let s = score_dimensions(&q, &DimensionWeights::default(), false);
        assert!((s.extraversion - 40.0 / 72.0).abs() < 1e-12);
    }

    #[test]
    fn weights_validation() {
        assert!(DimensionWeights::default().validate().is_ok());
        let bad = DimensionWeights {
            openness: 0.5,
            ..DimensionWeights::default()
        };
        assert!(bad.validate().is_err());
    }

    fn with_e(e: f64) -> OceanScore {
        OceanScore::from_values([0.1, 0.2, e, 0.4, 0.5], ScoreLevel::Individual)
    }

    #[test]
    fn video_aggregation() {
        let one = aggregate_video(&[with_e(0.3)]).unwrap();
        assert_eq!(one.values(), with_e(0.3).values());
        assert_eq!(one.level, ScoreLevel::Video);
        let two = aggregate_video(&[with_e(0.2), with_e(0.6)]).unwrap();
        assert!((two.extraversion - 0.4).abs() < 1e-15);
        assert!(aggregate_video(&[]).is_err());
    }

    #[test]
    fn country_aggregation_is_unweighted() {
        let video = |id: &str, country: &str, o: f64, individuals: usize| VideoScore {
            video_id: id.into(),
            country: country.into(),
            individuals,
            score: OceanScore::from_values([o, 0.5, 0.5, 0.5, 0.5], ScoreLevel::Video),
        };
        let countries = aggregate_country(&[
            video("a", "BR", 0.4, 100),
            video("b", "BR", 0.8, 2),
            video("c", "CN", 0.3, 5),
        ]);
        assert_eq!(countries.len(), 2);
        assert_eq!(countries[0].country, "BR");
        assert!((countries[0].score.openness - 0.6).abs() < 1e-15);
        assert_eq!(countries[0].videos, 2);
        assert_eq!(countries[1].score.openness, 0.3);
        assert_eq!(countries[1].score.level, ScoreLevel::Country);
    }

    #[test]
    fn scores_csv_format() {
        let rows = vec![ScoreRow {
            id: "v1".into(),
            country: "BR".into(),
            score: OceanScore::from_values([1.0, 0.5, 0.611111, 0.0, 0.33333], ScoreLevel::Video),
        }];
        assert_eq!(
            scores_csv(&rows),
            "level,id,country,O,C,E,A,N\nvideo,v1,BR,1.0000,0.5000,0.6111,0.0000,0.3333\n"
        );
    }
}
