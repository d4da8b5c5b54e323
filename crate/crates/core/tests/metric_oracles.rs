mod common;

use activity_editor::metrics::{evaluate, MetricError, Population};
use activity_editor::schedule::{ActivityType, SlotSequence};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn values(p: &Population, q: &Population) -> [f64; 12] {
    let r = evaluate(p, q).unwrap();
    [
        r.accuracy,
        r.f1_score,
        r.edit_dist,
        r.bleu_score,
        r.macro_hour,
        r.micro_hour,
        r.micro_int,
        r.macro_int,
        r.data_jsd,
        r.act_type,
        r.uni_act_type,
        r.traj_len,
    ]
}

fn rows(p: &[SlotSequence]) -> Vec<Vec<ActivityType>> {
    p.iter().map(|s| s.0.to_vec()).collect()
}

#[test]
fn random_populations_match_oracles() {
    let mut rng = StdRng::seed_from_u64(0x5eed);
    for case in 0..100 {
        let n = rng.gen_range(1..=8);
        let g: Vec<SlotSequence> = (0..n).map(|_| common::slot_sequence(&mut rng)).collect();
        let mut t: Vec<SlotSequence> = (0..n).map(|_| common::slot_sequence(&mut rng)).collect();
        if case % 10 == 0 {
            // exercise shared sequences in data_jsd
            t[0] = g[0];
        }
        let got = values(&Population::from_sequences(g.clone()), &Population::from_sequences(t.clone()));
        let want = common::metrics_oracle(&rows(&g), &rows(&t));
        for (k, (a, b)) in got.iter().zip(want.iter()).enumerate() {
            assert!((a - b).abs() < 1e-9, "case {case} metric {k}: {a} vs {b}");
        }
    }
}

#[test]
fn identical_populations_are_perfect() {
    let mut rng = StdRng::seed_from_u64(7);
    let g: Vec<SlotSequence> = (0..5).map(|_| common::slot_sequence(&mut rng)).collect();
    let p = Population::from_sequences(g);
    let r = evaluate(&p, &p).unwrap();
    assert_eq!((r.accuracy, r.bleu_score, r.edit_dist, r.f1_score), (1.0, 1.0, 0.0, 1.0));
    for (name, _, v, _) in r.entries().iter().skip(6) {
        assert_eq!(*v, 0.0, "{name}");
    }
    assert_eq!((r.macro_int, r.act_type), (0.0, 0.0));
}

#[test]
fn one_substituted_slot() {
    let a = SlotSequence::filled(ActivityType::Home);
    let mut b = a;
    b.0[40] = ActivityType::Work;
    let r = evaluate(&Population::from_sequences(vec![b]), &Population::from_sequences(vec![a])).unwrap();
    assert_eq!(r.accuracy, 95.0 / 96.0);
    assert_eq!(r.edit_dist, 1.0 / 96.0);
}

#[test]
fn shifted_onsets_move_macro_hour() {
    let mut rng = StdRng::seed_from_u64(11);
    let base: Vec<SlotSequence> = (0..4).map(|_| common::slot_sequence(&mut rng)).collect();
    let shifted: Vec<SlotSequence> = base
        .iter()
        .map(|s| {
            let mut out = [s.0[0]; 96];
            out[4..].copy_from_slice(&s.0[..92]);
            SlotSequence(out)
        })
        .collect();
    let got = values(&Population::from_sequences(shifted.clone()), &Population::from_sequences(base.clone()));
    let want = common::metrics_oracle(&rows(&shifted), &rows(&base));
    assert!(got[4] > 0.0);
    assert!((got[4] - want[4]).abs() < 1e-12);
}

#[test]
fn disjoint_sequence_sets() {
    let p = Population::from_sequences(vec![SlotSequence::filled(ActivityType::Home)]);
    let q = Population::from_sequences(vec![SlotSequence::filled(ActivityType::Work)]);
    let r = evaluate(&p, &q).unwrap();
    assert_eq!(r.data_jsd, 1.0);
    assert_eq!(r.f1_score, 0.0);
    assert_eq!(r.bleu_score, 0.0);
}

#[test]
fn paired_metrics_need_matching_ids() {
    let seq = SlotSequence::filled(ActivityType::Home);
    let p = Population::new(vec!["a".into()], vec![seq]).unwrap();
    let q = Population::new(vec!["b".into()], vec![seq]).unwrap();
    assert_eq!(evaluate(&p, &q), Err(MetricError::UnmatchedUser("a".into())));
}
