use bimq_core::features::{classify_pause, extract_features, PauseBand};
use bimq_core::ingest::{parse_journal, parse_tracker, CommandMethod};
use bimq_core::learn::mean;
use bimq_core::quality::{assessment_for_total, score, AssessmentInput};
use bimq_core::session::{concat_sessions, integrate, EventCategory, Session};
use bimq_core::synth::{draw_profile, gen_corpus, gen_designer, true_score, DesignerProfile, GenConfig, Mechanics};
use bimq_core::rng;
use proptest::prelude::*;
use rand::Rng;
use rand_distr::{Distribution, Normal};

fn sessions_of(id: &str, profile: &DesignerProfile, config: &GenConfig) -> Vec<Session> {
    let d = gen_designer(id, profile, config).unwrap();
    d.sessions
        .iter()
        .map(|s| {
            let (journal, jr) = parse_journal(s.journal.lines());
            let (tracker, tr) = parse_tracker(s.tracker.lines()).unwrap();
            assert_eq!(jr.lines_malformed + tr.lines_malformed, 0);
            integrate(&s.index.to_string(), id, &journal, &tracker).unwrap()
        })
        .collect()
}

fn designer_feature(profile: &DesignerProfile, config: &GenConfig, name: &str) -> f64 {
    let seq = concat_sessions(&sessions_of("D001", profile, config)).unwrap();
    extract_features(&seq.events).unwrap().get(name).unwrap()
}

/// Pairs differing in one trait only; counts pairs where `feature` moves with `sign`.
fn planted_hits(trait_index: usize, feature: &str, sign: f64, seed: u64) -> usize {
    let mut config = GenConfig::small();
    config.events_per_designer = (3_000, 3_000);
    let mut r = rng::seeded(seed);
    (0..20)
        .filter(|_| {
            let mut traits = [r.random_range(0.1..0.9), r.random_range(0.1..0.9), r.random_range(0.1..0.9)];
            let lo = r.random_range(0.0..0.4);
            let seed = r.random();
            let mut at = |v: f64| {
                traits[trait_index] = v;
                let p = DesignerProfile { skill: traits[0], intent_stability: traits[1], engagement: traits[2], seed };
                designer_feature(&p, &config, feature)
            };
            let (a, b) = (at(lo), at(lo + 0.6));
            sign * (b - a) > 0.0
        })
        .count()
}

#[test]
fn planted_directions_hold_in_paired_generations() {
    let skill = planted_hits(0, "accelkey_d", 1.0, 1);
    let stability = planted_hits(1, "delete_times_d", -1.0, 2);
    let engagement = planted_hits(2, "idle_gt5_t", -1.0, 3);
    assert!(skill >= 18, "accelkey_d rose with skill in {skill}/20 pairs");
    assert!(stability >= 18, "delete_times_d fell with stability in {stability}/20 pairs");
    assert!(engagement >= 18, "idle_gt5_t fell with engagement in {engagement}/20 pairs");
}

#[test]
fn full_skill_uses_more_shortcuts() {
    let config = GenConfig::small();
    let accel = |skill| {
        let p = DesignerProfile { skill, intent_stability: 0.5, engagement: 0.5, seed: 21 };
        sessions_of("D001", &p, &config)
            .iter()
            .flat_map(|s| &s.events)
            .filter(|e| matches!(e.category, EventCategory::Command { method: CommandMethod::AccelKey, .. }))
            .count()
    };
    assert!(accel(1.0) > accel(0.0));
}

#[test]
fn full_engagement_has_no_long_pauses_within_sessions() {
    let config = GenConfig::small();
    for seed in 0..5 {
        let p = DesignerProfile { skill: 0.5, intent_stability: 0.5, engagement: 1.0, seed };
        for s in sessions_of("D001", &p, &config) {
            for w in s.events.windows(2) {
                let gap = w[1].tick.0 - w[0].tick.0;
                assert_ne!(classify_pause(gap), PauseBand::BandOver5, "gap of {gap} ms");
            }
        }
    }
}

#[test]
fn score_calibration_monte_carlo() {
    let m = Mechanics::default();
    let normal = Normal::new(0.0, 2.0).unwrap();
    let mut r = rng::seeded(7);
    let totals: Vec<f64> =
        (0..20_000).map(|i| true_score(&draw_profile(11, i), normal.sample(&mut r), &m) as f64).collect();
    let mu = mean(&totals);
    let sd = (totals.iter().map(|t| (t - mu) * (t - mu)).sum::<f64>() / (totals.len() - 1) as f64).sqrt();
    assert!((mu - 70.9).abs() <= 2.0, "mean {mu}");
    assert!((sd - 7.61).abs() <= 2.0, "sd {sd}");
    assert!(totals.iter().all(|t| (38.0..=94.0).contains(t)));
}

#[test]
fn corpus_is_a_pure_function_of_config_and_seed() {
    let mut config = GenConfig::small();
    config.n_designers = 3;
    let (a, ta) = gen_corpus(&config, 5).unwrap();
    let (b, tb) = gen_corpus(&config, 5).unwrap();
    assert_eq!(a, b);
    assert_eq!(ta, tb);
    let (c, _) = gen_corpus(&config, 6).unwrap();
    assert_ne!(a[0].sessions, c[0].sessions);
}

#[test]
fn small_preset_shape() {
    let mut config = GenConfig::small();
    config.n_designers = 1;
    let (designers, truth) = gen_corpus(&config, 0).unwrap();
    assert_eq!((designers.len(), truth.designers.len()), (1, 1));
    let d = &designers[0];
    assert!((4_000..=8_000).contains(&d.truth.events));
    assert!((4..=8).contains(&d.sessions.len()));
    assert_eq!(d.truth.parts.total, d.truth.true_score);
    assert_eq!(score(&d.truth.assessment).unwrap(), d.truth.parts);
}

#[test]
fn scoring_examples() {
    let s = |a, e, c, st| {
        score(&AssessmentInput { arch_completeness_delta: a, arch_error_delta: e, complexity_adjustment: c, struct_delta: st })
    };
    let bench = s(0, 0, 0, 0).unwrap();
    assert_eq!((bench.arch_completeness, bench.arch_accuracy, bench.arch_complexity, bench.struct_completeness), (20, 20, 20, 10));
    assert_eq!(bench.total, 70);
    assert_eq!(s(0, 1, 2, -1).unwrap().total, 68);
    let capped = s(99, 0, 0, 99).unwrap();
    assert_eq!((capped.arch_completeness, capped.struct_completeness, capped.total), (24, 16, 80));
    assert!(s(0, 0, 11, 0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn scoring_is_monotone_and_bounded(
        a in -20i32..20, e in -20i32..20, c in -10i32..=10, st in -20i32..20, up in 1i32..10,
    ) {
        let t = |a, e, st| score(&AssessmentInput { arch_completeness_delta: a, arch_error_delta: e, complexity_adjustment: c, struct_delta: st }).unwrap().total;
        let base = t(a, e, st);
        prop_assert!((38..=94).contains(&base));
        prop_assert!(t(a, e + up, st) <= base);
        prop_assert!(t(a + up, e, st) >= base);
        prop_assert!(t(a, e, st + up) >= base);
    }

    #[test]
    fn every_total_in_range_has_an_assessment(total in 38i32..=94) {
        prop_assert_eq!(score(&assessment_for_total(total).unwrap()).unwrap().total, total);
    }
}
