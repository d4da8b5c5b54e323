mod common;

use activity_editor::constraints::{audit, check_logical, check_physical, is_hard_valid, AuditConfig, ConstraintCategory};
use activity_editor::editor::{apply_script, diff, repair};
use activity_editor::metrics::{accuracy, edit_dist, evaluate, Population};
use activity_editor::profile::UserProfile;
use activity_editor::reward::group_advantages;
use activity_editor::schedule::{discretize, episodes, expand_episodes, normalize, ActivitySegment, DaySchedule};
use activity_editor::stats::jsd_counts;
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn discretize_matches_minute_oracle(seed in any::<u64>()) {
        let mut r = rng(seed);
        let s = if r.gen_bool(0.5) { common::valid_schedule(&mut r) } else { common::covering_schedule(&mut r) };
        prop_assert_eq!(discretize(&s).unwrap().0.to_vec(), common::discretize_oracle(&s));
    }

    #[test]
    fn episodes_round_trip(seed in any::<u64>()) {
        let seq = common::slot_sequence(&mut rng(seed));
        let eps = episodes(&seq);
        prop_assert_eq!(expand_episodes(&eps), Some(seq));
        prop_assert!(eps.windows(2).all(|w| w[0].activity != w[1].activity));
    }

    #[test]
    fn repair_is_valid_and_idempotent(seed in any::<u64>()) {
        let s = common::malformed_schedule(&mut rng(seed));
        let fixed = repair(&s).unwrap();
        prop_assert!(is_hard_valid(&fixed), "{} -> {}", s, fixed);
        prop_assert!(fixed.covers_day());
        prop_assert_eq!(repair(&fixed).unwrap(), fixed);
    }

    #[test]
    fn repair_keeps_valid_schedules(seed in any::<u64>()) {
        let s = common::valid_schedule(&mut rng(seed));
        prop_assert_eq!(repair(&s).unwrap(), s);
    }

    #[test]
    fn diff_replays_exactly(seed in any::<u64>()) {
        let mut r = rng(seed);
        let pick = |r: &mut StdRng| match r.gen_range(0..3) {
            0 => common::valid_schedule(r),
            1 => common::covering_schedule(r),
            _ => common::malformed_schedule(r),
        };
        let a = pick(&mut r);
        let b = pick(&mut r);
        let script = diff(&a, &b);
        prop_assert_eq!(apply_script(&a, &script).unwrap(), b.clone());
        prop_assert!(diff(&b, &b).is_empty());
    }

    #[test]
    fn normalize_is_idempotent(seed in any::<u64>()) {
        let s = common::malformed_schedule(&mut rng(seed));
        let once = normalize(&s).unwrap();
        prop_assert_eq!(normalize(&once).unwrap(), once.clone());
        let total = |d: &DaySchedule| d.segments.iter().map(|x| u32::from(x.duration_minutes())).sum::<u32>();
        prop_assert_eq!(total(&once), total(&s));
    }

    #[test]
    fn single_overlap_is_localized(seed in any::<u64>()) {
        let mut r = rng(seed);
        let s = common::valid_schedule(&mut r);
        prop_assume!(s.len() >= 3);
        let i = r.gen_range(0..s.len() - 1);
        let next = s.segments[i + 1];
        prop_assume!(next.duration_minutes() > 1);
        let k = r.gen_range(1..next.duration_minutes());
        let mut segs = s.segments.clone();
        let cur = segs[i];
        segs[i] = ActivitySegment::from_minutes(cur.activity, cur.start().minutes(), cur.end().minutes() + k).unwrap();
        let v = audit(&UserProfile::default(), &DaySchedule::new(segs), &AuditConfig::default()).unwrap();
        let hard: Vec<_> = v.iter().filter(|x| x.is_hard()).collect();
        prop_assert_eq!(hard.len(), 1);
        prop_assert_eq!(hard[0].category, ConstraintCategory::Physical);
        prop_assert_eq!(&hard[0].segment_indices, &vec![i, i + 1]);
    }

    #[test]
    fn valid_generator_is_hard_clean(seed in any::<u64>()) {
        let s = common::valid_schedule(&mut rng(seed));
        prop_assert!(check_physical(&s).is_empty());
        prop_assert!(check_logical(&s).is_empty());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn advantages_center_and_shift(rewards in prop::collection::vec(0.0f64..3.0, 2..16), shift in -5.0f64..5.0) {
        let a = group_advantages(&rewards).unwrap();
        let mean: f64 = a.iter().sum::<f64>() / a.len() as f64;
        prop_assert!(mean.abs() < 1e-9);
        let shifted: Vec<f64> = rewards.iter().map(|r| r + shift).collect();
        let b = group_advantages(&shifted).unwrap();
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() < 1e-6);
        }
    }

    #[test]
    fn jsd_symmetric_and_bounded(p in prop::collection::vec(0.0f64..10.0, 5), q in prop::collection::vec(0.0f64..10.0, 5)) {
        prop_assume!(p.iter().sum::<f64>() > 0.0 && q.iter().sum::<f64>() > 0.0);
        let a = jsd_counts(&p, &q).unwrap();
        let b = jsd_counts(&q, &p).unwrap();
        prop_assert_eq!(a, b);
        prop_assert!((0.0..=1.0).contains(&a));
        prop_assert_eq!(jsd_counts(&p, &p).unwrap(), 0.0);
    }

    #[test]
    fn slot_metric_relations(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = r.gen_range(1..=6);
        let g: Vec<_> = (0..n).map(|_| common::slot_sequence(&mut r)).collect();
        let t: Vec<_> = (0..n).map(|_| common::slot_sequence(&mut r)).collect();
        let gp = Population::from_sequences(g.clone());
        let tp = Population::from_sequences(t.clone());
        let hamming: f64 = g.iter().zip(&t)
            .map(|(a, b)| a.0.iter().zip(b.0.iter()).filter(|(x, y)| x != y).count() as f64 / 96.0)
            .sum::<f64>() / n as f64;
        let acc = accuracy(&gp, &tp).unwrap();
        prop_assert!((acc + hamming - 1.0).abs() < 1e-12);
        prop_assert!(edit_dist(&gp, &tp).unwrap() <= hamming + 1e-12);
        let fwd = evaluate(&gp, &tp).unwrap();
        let back = evaluate(&tp, &gp).unwrap();
        for (f, b) in fwd.entries().iter().zip(back.entries().iter()).skip(6) {
            prop_assert!((f.2 - b.2).abs() < 1e-12, "{} not symmetric", f.0);
        }
        prop_assert_eq!(fwd.act_type, back.act_type);
    }

    #[test]
    fn splitting_a_segment_without_relabeling_changes_nothing(seed in any::<u64>()) {
        let mut r = rng(seed);
        let s = common::valid_schedule(&mut r);
        let i = r.gen_range(0..s.len());
        let seg = s.segments[i];
        prop_assume!(seg.duration_minutes() >= 2);
        let cut = seg.start().minutes() + r.gen_range(1..seg.duration_minutes());
        let mut segs = s.segments.clone();
        segs.splice(i..=i, [
            ActivitySegment::from_minutes(seg.activity, seg.start().minutes(), cut).unwrap(),
            ActivitySegment::from_minutes(seg.activity, cut, seg.end().minutes()).unwrap(),
        ]);
        let split = DaySchedule::new(segs);
        prop_assert_eq!(discretize(&split).unwrap(), discretize(&s).unwrap());
        let reference = Population::from_sequences(vec![discretize(&common::valid_schedule(&mut r)).unwrap()]);
        let a = evaluate(&Population::from_sequences(vec![discretize(&s).unwrap()]), &reference).unwrap();
        let b = evaluate(&Population::from_sequences(vec![discretize(&split).unwrap()]), &reference).unwrap();
        prop_assert_eq!(a, b);
    }
}
