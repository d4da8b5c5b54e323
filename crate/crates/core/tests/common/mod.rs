//! Random generators and brute-force oracles shared by the integration and
//! acceptance suites. Nothing here calls into the metric or discretization
//! code under test.
#![allow(dead_code)]

use std::collections::BTreeMap;

use activity_editor::schedule::{ActivitySegment, ActivityType, DaySchedule, SlotSequence};
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::Rng;

pub const SLOTS: usize = 96;

pub fn activity(rng: &mut StdRng) -> ActivityType {
    *ActivityType::ALL.choose(rng).unwrap()
}

fn non_home(rng: &mut StdRng) -> ActivityType {
    *ActivityType::ALL[1..].choose(rng).unwrap()
}

fn cut_points(rng: &mut StdRng, pieces: usize) -> Vec<u16> {
    let mut cuts: Vec<u16> = Vec::new();
    while cuts.len() < pieces - 1 {
        let c = rng.gen_range(1..1440);
        if !cuts.contains(&c) {
            cuts.push(c);
        }
    }
    cuts.sort_unstable();
    let mut points = vec![0];
    points.extend(cuts);
    points.push(1440);
    points
}

/// Covering, sorted, home at both ends, no touching repeats; boundaries at
/// arbitrary minutes.
pub fn valid_schedule(rng: &mut StdRng) -> DaySchedule {
    let pieces = rng.gen_range(1..=9);
    let points = cut_points(rng, pieces);
    let mut labels = vec![ActivityType::Home; pieces];
    for i in 1..pieces.saturating_sub(1) {
        loop {
            let a = if i == pieces - 2 { non_home(rng) } else { activity(rng) };
            if a != labels[i - 1] {
                labels[i] = a;
                break;
            }
        }
    }
    if pieces == 2 {
        // two home pieces would touch; merge into one day
        return DaySchedule::all_home();
    }
    let segs = (0..pieces)
        .map(|i| ActivitySegment::from_minutes(labels[i], points[i], points[i + 1]).unwrap())
        .collect();
    DaySchedule::new(segs)
}

/// Covering and sorted, arbitrary labels (touching repeats allowed).
pub fn covering_schedule(rng: &mut StdRng) -> DaySchedule {
    let pieces = rng.gen_range(1..=12);
    let points = cut_points(rng, pieces);
    let segs = (0..pieces)
        .map(|i| ActivitySegment::from_minutes(activity(rng), points[i], points[i + 1]).unwrap())
        .collect();
    DaySchedule::new(segs)
}

/// 1-15 segments with random overlaps, gaps, boundary errors and order.
pub fn malformed_schedule(rng: &mut StdRng) -> DaySchedule {
    let n = rng.gen_range(1..=15);
    let mut segs = Vec::with_capacity(n);
    for _ in 0..n {
        let start = rng.gen_range(0..1440u16);
        let max_len = (1440 - start).min(if rng.gen_bool(0.3) { 1440 } else { 240 });
        let len = rng.gen_range(1..=max_len);
        segs.push(ActivitySegment::from_minutes(activity(rng), start, start + len).unwrap());
    }
    if rng.gen_bool(0.5) {
        segs.sort_by_key(|s| s.start());
    }
    DaySchedule::new(segs)
}

/// Random slot labels built from random episodes.
pub fn slot_sequence(rng: &mut StdRng) -> SlotSequence {
    let mut labels = Vec::with_capacity(SLOTS);
    let k = rng.gen_range(1..=4);
    let palette: Vec<ActivityType> = ActivityType::ALL.choose_multiple(rng, k).copied().collect();
    while labels.len() < SLOTS {
        let len = rng.gen_range(1..=24).min(SLOTS - labels.len());
        let a = *palette.choose(rng).unwrap();
        labels.extend(std::iter::repeat(a).take(len));
    }
    SlotSequence::try_from(labels).unwrap()
}

// ---- oracles ----

/// Minute-resolution discretization: label every minute, then take the
/// per-slot majority, breaking ties by the earliest segment start.
pub fn discretize_oracle(schedule: &DaySchedule) -> Vec<ActivityType> {
    let mut minute: Vec<Option<(ActivityType, u16)>> = vec![None; 1440];
    for seg in &schedule.segments {
        for m in seg.start().minutes()..seg.end().minutes() {
            assert!(minute[m as usize].is_none(), "oracle expects a tiling schedule");
            minute[m as usize] = Some((seg.activity, seg.start().minutes()));
        }
    }
    (0..SLOTS)
        .map(|t| {
            let mut count = [0u32; 10];
            let mut first = [u16::MAX; 10];
            for m in t * 15..t * 15 + 15 {
                let (a, s) = minute[m].expect("covering");
                count[a.index()] += 1;
                first[a.index()] = first[a.index()].min(s);
            }
            let best = (0..10)
                .filter(|&k| count[k] > 0)
                .max_by(|&x, &y| count[x].cmp(&count[y]).then(first[y].cmp(&first[x])))
                .unwrap();
            ActivityType::from_index(best).unwrap()
        })
        .collect()
}

/// Textbook full-matrix Levenshtein.
pub fn levenshtein_oracle<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let mut d = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for (i, row) in d.iter_mut().enumerate() {
        row[0] = i;
    }
    for j in 0..=b.len() {
        d[0][j] = j;
    }
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            let cost = if a[i - 1] == b[j - 1] { 0 } else { 1 };
            d[i][j] = (d[i - 1][j] + 1).min(d[i][j - 1] + 1).min(d[i - 1][j - 1] + cost);
        }
    }
    d[a.len()][b.len()]
}

fn count_occurrences<T: PartialEq>(haystack: &[T], gram: &[T]) -> usize {
    haystack.windows(gram.len()).filter(|w| *w == gram).count()
}

/// BLEU-4 by explicit n-gram enumeration; zero precisions for n >= 2 become
/// 1/(candidates+1), a zero unigram precision gives 0.
pub fn bleu_oracle<T: PartialEq>(reference: &[T], hypothesis: &[T]) -> f64 {
    let mut precisions = Vec::new();
    for n in 1..=4 {
        let grams: Vec<&[T]> = hypothesis.windows(n).collect();
        let mut seen: Vec<&[T]> = Vec::new();
        let mut matched = 0;
        for g in &grams {
            if seen.contains(g) {
                continue;
            }
            seen.push(g);
            matched += count_occurrences(hypothesis, g).min(count_occurrences(reference, g));
        }
        let total = grams.len() as f64;
        let p = if matched > 0 {
            matched as f64 / total
        } else if n == 1 {
            return 0.0;
        } else {
            1.0 / (total + 1.0)
        };
        precisions.push(p);
    }
    let geo = precisions.iter().map(|p| p.powf(0.25)).product::<f64>();
    let bp = if hypothesis.len() >= reference.len() {
        1.0
    } else {
        (1.0 - reference.len() as f64 / hypothesis.len() as f64).exp()
    };
    bp * geo
}

/// JSD in bits over keyed counts; keys missing on one side count as zero.
pub fn jsd_oracle<K: Ord + Clone>(p: &BTreeMap<K, f64>, q: &BTreeMap<K, f64>) -> f64 {
    let sp: f64 = p.values().sum();
    let sq: f64 = q.values().sum();
    let mut keys: Vec<K> = p.keys().cloned().collect();
    keys.extend(q.keys().cloned());
    keys.sort();
    keys.dedup();
    let mut js = 0.0;
    for k in keys {
        let a = p.get(&k).copied().unwrap_or(0.0) / sp;
        let b = q.get(&k).copied().unwrap_or(0.0) / sq;
        let m = (a + b) / 2.0;
        if a > 0.0 {
            js += 0.5 * a * (a / m).ln();
        }
        if b > 0.0 {
            js += 0.5 * b * (b / m).ln();
        }
    }
    js / std::f64::consts::LN_2
}

/// (activity index, start slot, length) for every maximal run.
pub fn runs(seq: &[ActivityType]) -> Vec<(usize, usize, usize)> {
    let mut out = Vec::new();
    let mut start = 0;
    for t in 1..=seq.len() {
        if t == seq.len() || seq[t] != seq[t - 1] {
            out.push((seq[start].index(), start, t - start));
            start = t;
        }
    }
    out
}

fn bump<K: Ord>(map: &mut BTreeMap<K, f64>, key: K, by: f64) {
    *map.entry(key).or_insert(0.0) += by;
}

/// The twelve metrics computed from scratch, in report field order:
/// accuracy, f1, edit, bleu, macro_hour, micro_hour, micro_int, macro_int,
/// data_jsd, act_type, uni_act_type, traj_len. Rows are paired by position.
pub fn metrics_oracle(gen: &[Vec<ActivityType>], reference: &[Vec<ActivityType>]) -> [f64; 12] {
    assert_eq!(gen.len(), reference.len());
    let n = gen.len() as f64;

    let mut hits = 0usize;
    let mut confusion = [[0u64; 10]; 10];
    let mut edit = 0.0;
    let mut bleu = 0.0;
    for (g, t) in gen.iter().zip(reference) {
        for i in 0..SLOTS {
            if g[i] == t[i] {
                hits += 1;
            }
            confusion[g[i].index()][t[i].index()] += 1;
        }
        edit += levenshtein_oracle(g, t) as f64 / SLOTS as f64;
        bleu += bleu_oracle(t, g);
    }
    let accuracy = hits as f64 / (n * SLOTS as f64);

    let mut f1_sum = 0.0;
    let mut classes = 0;
    for k in 0..10 {
        let predicted: u64 = confusion[k].iter().sum();
        let actual: u64 = (0..10).map(|r| confusion[r][k]).sum();
        if predicted + actual == 0 {
            continue;
        }
        classes += 1;
        let tp = confusion[k][k] as f64;
        let precision = if predicted > 0 { tp / predicted as f64 } else { 0.0 };
        let recall = if actual > 0 { tp / actual as f64 } else { 0.0 };
        if precision + recall > 0.0 {
            f1_sum += 2.0 * precision * recall / (precision + recall);
        }
    }

    type Hists = [BTreeMap<(usize, usize), f64>; 7];
    let hist = |rows: &[Vec<ActivityType>]| -> Hists {
        let mut h: Hists = Default::default();
        for row in rows {
            let rs = runs(row);
            for &(a, start, len) in &rs {
                bump(&mut h[0], (0, len), 1.0); // run length
                bump(&mut h[1], (a, len), 1.0); // activity x run length
                bump(&mut h[2], (0, start), 1.0); // onset
                bump(&mut h[3], (a, start), 1.0); // activity x onset
                bump(&mut h[4], (a, 0), len as f64); // time budget
                bump(&mut h[5], (a, 0), 1.0); // episode count
            }
            bump(&mut h[6], (0, rs.len()), 1.0); // episodes per user
        }
        h
    };
    let hg = hist(gen);
    let ht = hist(reference);
    let j = |i: usize| jsd_oracle(&ht[i], &hg[i]);

    let mut seq_t: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
    let mut seq_g: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
    for row in reference {
        bump(&mut seq_t, row.iter().map(|a| a.index()).collect(), 1.0);
    }
    for row in gen {
        bump(&mut seq_g, row.iter().map(|a| a.index()).collect(), 1.0);
    }

    [
        accuracy,
        f1_sum / classes as f64,
        edit / n,
        bleu / n,
        j(2),
        j(3),
        j(1),
        j(0),
        jsd_oracle(&seq_t, &seq_g),
        j(4),
        j(5),
        j(6),
    ]
}
