use std::collections::BTreeMap;

use proptest::prelude::*;

use crowd_ocean::baselines::extremes;
use crowd_ocean::features::{
    gt_socialization, pair_affinity, summarize, CollectivityParams, FeatureFrame, FeatureParams,
    FrameTable, KinematicState, NeighborhoodStats,
};
use crowd_ocean::ingest::{
    parse_clip, validate_clip, ClipMetadata, FrameObservation, ValidationConfig, VideoClip,
};
use crowd_ocean::ocean::{
    reverse_items, score_dimensions, CountryScore, DimensionWeights, OceanScore, QuantizedItems,
    ScoreLevel,
};
use crowd_ocean::socialization::MlpWeights;

fn meta() -> ClipMetadata {
    ClipMetadata {
        video_id: "p".into(),
        country: "BR".into(),
        fps: 25.0,
        scale_m_per_unit: 1.0,
    }
}

/// Agents with strictly increasing (possibly gappy) frames.
fn arb_clip(max_agents: usize) -> impl Strategy<Value = VideoClip> {
    prop::collection::vec(
        prop::collection::vec((1u32..9, -50.0f64..50.0, -50.0f64..50.0), 1..20),
        1..=max_agents,
    )
    .prop_map(|agents| {
        let trajectories = agents
            .into_iter()
            .enumerate()
            .map(|(i, steps)| {
                let id = i as i64 + 1;
                let mut frame = 0;
                let obs = steps
                    .into_iter()
                    .map(|(step, x, y)| {
                        frame += step;
                        FrameObservation {
                            frame,
                            agent_id: id,
                            position: [x, y],
                        }
                    })
                    .collect();
                (id, obs)
            })
            .collect();
        VideoClip {
            meta: meta(),
            trajectories,
        }
    })
}

fn arb_state() -> impl Strategy<Value = KinematicState> {
    (0.0f64..5.0, 0.0f64..360.0, 0.0f64..=180.0).prop_map(
        |(speed, heading_deg, angular_variation_deg)| KinematicState {
            speed,
            heading_deg,
            angular_variation_deg,
        },
    )
}

/// All agents present on frames 0..3 so frame 2 carries full kinematics.
fn arb_crowd(max_agents: usize) -> impl Strategy<Value = VideoClip> {
    prop::collection::vec(
        prop::collection::vec((0.0f64..12.0, 0.0f64..12.0), 3),
        1..=max_agents,
    )
    .prop_map(|agents| {
        let trajectories = agents
            .into_iter()
            .enumerate()
            .map(|(i, pts)| {
                let id = i as i64 + 1;
                let obs = pts
                    .into_iter()
                    .enumerate()
                    .map(|(f, (x, y))| FrameObservation {
                        frame: f as u32,
                        agent_id: id,
                        position: [x, y],
                    })
                    .collect();
                (id, obs)
            })
            .collect();
        VideoClip {
            meta: meta(),
            trajectories,
        }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn csv_round_trip(clip in arb_clip(6)) {
        let back = parse_clip(&clip.to_csv(), &clip.metadata_json()).unwrap();
        prop_assert_eq!(back, clip);
    }

    #[test]
    fn validation_is_idempotent(clip in arb_clip(6)) {
        let config = ValidationConfig::default();
        if let Ok((once, _)) = validate_clip(clip, &config) {
            let (twice, report) = validate_clip(once.clone(), &config).unwrap();
            prop_assert_eq!(twice, once);
            prop_assert!(report.is_clean());
        }
    }

    #[test]
    fn affinity_is_symmetric_and_capped(a in arb_state(), b in arb_state()) {
        let p = CollectivityParams::default();
        let ab = pair_affinity(&a, &b, &p);
        prop_assert_eq!(ab, pair_affinity(&b, &a, &p));
        prop_assert!((0.0..=p.pair_cap).contains(&ab));
        prop_assert_eq!(pair_affinity(&a, &a, &p), 0.0);
    }

    #[test]
    fn collectivity_in_unit_interval(clip in arb_crowd(50)) {
        let table = FrameTable::build(&clip).unwrap();
        let params = FeatureParams::default();
        for id in clip.trajectories.keys() {
            let c = table.collectivity(2, *id, params.social_radius, &params.collectivity).unwrap();
            prop_assert!((0.0..=1.0).contains(&c), "{}", c);
        }
    }

    #[test]
    fn neighborhood_counts_are_consistent(clip in arb_crowd(12)) {
        let table = FrameTable::build(&clip).unwrap();
        let population = clip.trajectories.len();
        for id in clip.trajectories.keys() {
            let stats = table.neighborhood(2, *id, 3.6).unwrap();
            prop_assert_eq!(stats.frame_population, population);
            prop_assert!(stats.n_social < population);
            if population == 1 {
                prop_assert_eq!(stats.mean_distance, 0.0);
            }
        }
    }

    #[test]
    fn socialization_level_is_monotone_in_neighbors(n in 0usize..30, extra in 1usize..10, rho in 1usize..40) {
        let population = rho.max(n + extra + 1);
        let at = |n_social| gt_socialization(&NeighborhoodStats { n_social, mean_distance: 1.0, frame_population: population }).level;
        prop_assert!(at(n) <= at(n + extra));
        prop_assert!((0.0..=1.0).contains(&at(n)));
    }

    #[test]
    fn summary_means_are_bounded(
        rows in prop::collection::vec((0.0f64..3.0, 0.0f64..=180.0, 0.0f64..=1.0, 0.0f64..=1.0), 1..60)
    ) {
        let frames: Vec<FeatureFrame> = rows.iter().enumerate().map(|(i, &(speed, av, c, _))| FeatureFrame {
            agent_id: 1,
            frame: i as u32 + 1,
            kinematics: KinematicState { speed, heading_deg: 0.0, angular_variation_deg: av },
            neighborhood: NeighborhoodStats { n_social: 0, mean_distance: 0.0, frame_population: 1 },
            collectivity: c,
            gt_social_level: 0.0,
        }).collect();
        let social: Vec<f64> = rows.iter().map(|r| r.3).collect();
        let s = summarize(&frames, &social).unwrap();
        let within = |v: f64, xs: Vec<f64>| {
            let lo = xs.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            v >= lo - 1e-12 && v <= hi + 1e-12
        };
        prop_assert!(within(s.mean_speed, rows.iter().map(|r| r.0).collect()));
        prop_assert!(within(s.mean_angular_variation, rows.iter().map(|r| r.1).collect()));
        prop_assert!(within(s.mean_collectivity, rows.iter().map(|r| r.2).collect()));
        prop_assert!(within(s.mean_socialization, social.clone()));
        prop_assert!(s.std_angular_variation >= 0.0);
        prop_assert!((s.mean_isolation + s.mean_socialization - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn agreeableness_and_openness_are_monotone(levels in prop::array::uniform25(0u8..=4), bump in 1u8..=4) {
        let w = DimensionWeights::default();
        let q = QuantizedItems::new(levels).unwrap();
        let base = score_dimensions(&q, &w, true);
        // raising a direct agreeableness item cannot lower A
        let mut up = levels;
        up[8] = (up[8] + bump).min(4);
        let raised = score_dimensions(&QuantizedItems::new(up).unwrap(), &w, true);
        prop_assert!(raised.agreeableness >= base.agreeableness);
        // raising the reversed openness item cannot raise O
        let mut up = levels;
        up[1] = (up[1] + bump).min(4);
        let raised = score_dimensions(&QuantizedItems::new(up).unwrap(), &w, true);
        prop_assert!(raised.openness <= base.openness);
    }

    #[test]
    fn reversal_is_an_involution(levels in prop::array::uniform25(0u8..=4)) {
        let q = QuantizedItems::new(levels).unwrap();
        prop_assert_eq!(reverse_items(&reverse_items(&q)), q);
        prop_assert!(reverse_items(&q).levels().iter().zip(levels).all(|(r, l)| r + l == 4));
    }

    #[test]
    fn extremes_ignore_input_order(
        values in prop::collection::vec(prop::array::uniform5(0u8..=4), 1..8),
        rotation in 0usize..8,
    ) {
        let countries: Vec<CountryScore> = values.iter().enumerate().map(|(i, v)| CountryScore {
            country: format!("{}{}", (b'A' + i as u8) as char, (b'Z' - i as u8) as char),
            videos: 1,
            score: OceanScore::from_values(v.map(|x| f64::from(x) / 4.0), ScoreLevel::Country),
        }).collect();
        let mut shuffled = countries.clone();
        let len = shuffled.len();
        shuffled.rotate_left(rotation % len);
        shuffled.reverse();
        prop_assert_eq!(extremes(&countries), extremes(&shuffled));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn softmax_outputs_are_a_distribution(
        params in prop::collection::vec(-5.0f64..5.0, 62),
        input in (0.0f64..=1.0, 0.0f64..50.0, 0u32..40),
    ) {
        let mut w = MlpWeights::from_params(params).unwrap();
        w.meta.trained = true;
        let stats = NeighborhoodStats { n_social: input.2 as usize, mean_distance: input.1, frame_population: input.2 as usize + 1 };
        let p = w.forward(&[input.0, input.1, f64::from(input.2)]).unwrap();
        prop_assert!(p.social > 0.0 && p.not_social > 0.0);
        prop_assert!((p.social + p.not_social - 1.0).abs() <= 1e-12);
        let estimate = w.predict_socialization(&stats, input.0).unwrap();
        prop_assert_eq!(estimate.level + estimate.isolation, 1.0);
    }
}

/// Brute-force cross-check of the per-frame population, independent of the
/// frame table.
#[test]
fn population_matches_direct_count() {
    let mut frames: BTreeMap<u32, usize> = BTreeMap::new();
    let clip = crowd_ocean::synth::generate(&crowd_ocean::synth::ScenarioSpec::new(
        crowd_ocean::synth::ScenarioKind::Mixed,
        9,
        30,
        4,
    ))
    .unwrap();
    for obs in clip.trajectories.values().flatten() {
        *frames.entry(obs.frame).or_default() += 1;
    }
    let table = FrameTable::positions_only(&clip);
    for (frame, agents) in table.frames() {
        assert_eq!(agents.len(), frames[&frame]);
    }
}
