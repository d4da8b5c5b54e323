//! The 12-metric evaluation suite over populations of 96-slot day sequences.
//!
//! Sequence-similarity metrics (accuracy, macro-F1, edit distance, BLEU) pair
//! generated and reference rows by user id. Temporal-alignment and
//! distributional metrics compare pooled histograms with base-2 JSD and
//! tolerate populations of different sizes.

use std::collections::{HashMap, HashSet};
use std::fmt;

use rayon::prelude::*;
use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::schedule::{episodes, ActivityType, Episode, SlotSequence, SLOTS_PER_DAY};
use crate::stats::{jsd_counts, HistogramError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricError {
    #[error("population is empty")]
    EmptyPopulation,
    #[error("population has {ids} user ids but {rows} rows")]
    RowCountMismatch { ids: usize, rows: usize },
    #[error("duplicate user id {0:?}")]
    DuplicateUser(String),
    #[error("user {0:?} has no counterpart in the other population")]
    UnmatchedUser(String),
    #[error(transparent)]
    Histogram(#[from] HistogramError),
}

/// Rows of slot sequences keyed by user id.
#[derive(Debug, Clone, PartialEq)]
pub struct Population {
    user_ids: Vec<String>,
    sequences: Vec<SlotSequence>,
}

impl Population {
    pub fn new(user_ids: Vec<String>, sequences: Vec<SlotSequence>) -> Result<Self, MetricError> {
        if user_ids.len() != sequences.len() {
            return Err(MetricError::RowCountMismatch {
                ids: user_ids.len(),
                rows: sequences.len(),
            });
        }
        let mut seen = HashSet::new();
        for id in &user_ids {
            if !seen.insert(id.as_str()) {
                return Err(MetricError::DuplicateUser(id.clone()));
            }
        }
        Ok(Self { user_ids, sequences })
    }

    /// Rows with ids `"0"`, `"1"`, ...
    pub fn from_sequences(sequences: Vec<SlotSequence>) -> Self {
        let user_ids = (0..sequences.len()).map(|i| i.to_string()).collect();
        Self { user_ids, sequences }
    }

    pub fn user_ids(&self) -> &[String] {
        &self.user_ids
    }

    pub fn sequences(&self) -> &[SlotSequence] {
        &self.sequences
    }

    pub fn len(&self) -> usize {
        self.sequences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sequences.is_empty()
    }

    fn non_empty(&self) -> Result<&Self, MetricError> {
        if self.is_empty() {
            Err(MetricError::EmptyPopulation)
        } else {
            Ok(self)
        }
    }
}

/// `(generated, reference)` row pairs matched by user id, in generated order.
fn paired<'a>(
    gen: &'a Population,
    reference: &'a Population,
) -> Result<Vec<(&'a SlotSequence, &'a SlotSequence)>, MetricError> {
    gen.non_empty()?;
    reference.non_empty()?;
    let index: HashMap<&str, usize> = reference
        .user_ids
        .iter()
        .enumerate()
        .map(|(i, id)| (id.as_str(), i))
        .collect();
    let mut pairs = Vec::with_capacity(gen.len());
    for (id, seq) in gen.user_ids.iter().zip(&gen.sequences) {
        let j = *index
            .get(id.as_str())
            .ok_or_else(|| MetricError::UnmatchedUser(id.clone()))?;
        pairs.push((seq, &reference.sequences[j]));
    }
    if gen.len() != reference.len() {
        let gen_ids: HashSet<&str> = gen.user_ids.iter().map(String::as_str).collect();
        let missing = reference
            .user_ids
            .iter()
            .find(|id| !gen_ids.contains(id.as_str()))
            .expect("reference has an unpaired id");
        return Err(MetricError::UnmatchedUser(missing.clone()));
    }
    Ok(pairs)
}

/// Slot-level exact match rate.
pub fn accuracy(gen: &Population, reference: &Population) -> Result<f64, MetricError> {
    let pairs = paired(gen, reference)?;
    let hits: usize = pairs
        .iter()
        .map(|(g, t)| g.0.iter().zip(t.0.iter()).filter(|(a, b)| a == b).count())
        .sum();
    Ok(hits as f64 / (pairs.len() * SLOTS_PER_DAY) as f64)
}

/// Mean per-class F1 over the classes observed in either sequence set.
fn macro_f1_pairs<'a>(pairs: impl Iterator<Item = (&'a SlotSequence, &'a SlotSequence)>) -> f64 {
    let mut tp = [0u64; ActivityType::COUNT];
    let mut fp = [0u64; ActivityType::COUNT];
    let mut fneg = [0u64; ActivityType::COUNT];
    for (g, t) in pairs {
        for (a, b) in g.0.iter().zip(t.0.iter()) {
            if a == b {
                tp[a.index()] += 1;
            } else {
                fp[a.index()] += 1;
                fneg[b.index()] += 1;
            }
        }
    }
    let mut sum = 0.0;
    let mut classes = 0usize;
    for k in 0..ActivityType::COUNT {
        if tp[k] + fp[k] + fneg[k] == 0 {
            continue;
        }
        classes += 1;
        // 2PR/(P+R) = 2tp/(2tp+fp+fn); zero when tp is zero
        sum += (2 * tp[k]) as f64 / (2 * tp[k] + fp[k] + fneg[k]) as f64;
    }
    sum / classes as f64
}

pub fn macro_f1(gen: &Population, reference: &Population) -> Result<f64, MetricError> {
    let pairs = paired(gen, reference)?;
    Ok(macro_f1_pairs(pairs.into_iter()))
}

/// Macro-F1 between a single generated and reference sequence.
pub fn macro_f1_single(gen: &SlotSequence, reference: &SlotSequence) -> f64 {
    macro_f1_pairs(std::iter::once((gen, reference)))
}

/// Levenshtein distance with unit costs.
pub fn levenshtein<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0usize; b.len() + 1];
    for (i, x) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, y) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(x != y);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Mean length-normalized Levenshtein distance.
pub fn edit_dist(gen: &Population, reference: &Population) -> Result<f64, MetricError> {
    let pairs = paired(gen, reference)?;
    let total: f64 = pairs
        .par_iter()
        .map(|(g, t)| levenshtein(&g.0, &t.0) as f64 / SLOTS_PER_DAY as f64)
        .sum();
    Ok(total / pairs.len() as f64)
}

/// Sentence-level BLEU-4 with uniform weights.
///
/// A zero n-gram precision for n >= 2 is replaced by `1 / (candidates + 1)`
/// (add-one on the matched and candidate counts); a zero unigram precision
/// yields a score of 0.
pub fn sentence_bleu<T: Eq + std::hash::Hash + Clone>(reference: &[T], hypothesis: &[T]) -> f64 {
    if hypothesis.is_empty() || reference.is_empty() {
        return 0.0;
    }
    let mut log_sum = 0.0;
    for n in 1..=4usize {
        if hypothesis.len() < n {
            return 0.0;
        }
        let mut ref_counts: HashMap<&[T], usize> = HashMap::new();
        for gram in reference.windows(n) {
            *ref_counts.entry(gram).or_default() += 1;
        }
        let mut hyp_counts: HashMap<&[T], usize> = HashMap::new();
        for gram in hypothesis.windows(n) {
            *hyp_counts.entry(gram).or_default() += 1;
        }
        let matched: usize = hyp_counts
            .iter()
            .map(|(gram, &c)| c.min(ref_counts.get(gram).copied().unwrap_or(0)))
            .sum();
        let candidates = hypothesis.len() + 1 - n;
        let precision = if matched > 0 {
            matched as f64 / candidates as f64
        } else if n == 1 {
            return 0.0;
        } else {
            1.0 / (candidates as f64 + 1.0)
        };
        log_sum += 0.25 * precision.ln();
    }
    let (c, r) = (hypothesis.len() as f64, reference.len() as f64);
    let brevity = if c >= r { 1.0 } else { (1.0 - r / c).exp() };
    brevity * log_sum.exp()
}

/// Mean sentence BLEU with the reference row as reference.
pub fn bleu(gen: &Population, reference: &Population) -> Result<f64, MetricError> {
    let pairs = paired(gen, reference)?;
    let total: f64 = pairs.par_iter().map(|(g, t)| sentence_bleu(&t.0, &g.0)).sum();
    Ok(total / pairs.len() as f64)
}

/// Pooled per-population counts feeding the histogram metrics.
#[derive(Debug, Clone)]
struct EpisodeStats {
    run_length: Vec<f64>,
    activity_run_length: Vec<f64>,
    onset: Vec<f64>,
    activity_onset: Vec<f64>,
    slot_budget: Vec<f64>,
    episode_count: Vec<f64>,
    chain_length: Vec<f64>,
}

impl EpisodeStats {
    fn empty() -> Self {
        let joint = ActivityType::COUNT * SLOTS_PER_DAY;
        Self {
            run_length: vec![0.0; SLOTS_PER_DAY],
            activity_run_length: vec![0.0; joint],
            onset: vec![0.0; SLOTS_PER_DAY],
            activity_onset: vec![0.0; joint],
            slot_budget: vec![0.0; ActivityType::COUNT],
            episode_count: vec![0.0; ActivityType::COUNT],
            chain_length: vec![0.0; SLOTS_PER_DAY],
        }
    }

    fn add(&mut self, seq: &SlotSequence) {
        let eps: Vec<Episode> = episodes(seq);
        for ep in &eps {
            let a = ep.activity.index();
            self.run_length[ep.length_slots - 1] += 1.0;
            self.activity_run_length[a * SLOTS_PER_DAY + ep.length_slots - 1] += 1.0;
            self.onset[ep.start_slot] += 1.0;
            self.activity_onset[a * SLOTS_PER_DAY + ep.start_slot] += 1.0;
            self.slot_budget[a] += ep.length_slots as f64;
            self.episode_count[a] += 1.0;
        }
        self.chain_length[eps.len() - 1] += 1.0;
    }

    fn merge(mut self, other: Self) -> Self {
        for (dst, src) in [
            (&mut self.run_length, &other.run_length),
            (&mut self.activity_run_length, &other.activity_run_length),
            (&mut self.onset, &other.onset),
            (&mut self.activity_onset, &other.activity_onset),
            (&mut self.slot_budget, &other.slot_budget),
            (&mut self.episode_count, &other.episode_count),
            (&mut self.chain_length, &other.chain_length),
        ] {
            dst.iter_mut().zip(src).for_each(|(d, s)| *d += s);
        }
        self
    }

    fn of(population: &Population) -> Result<Self, MetricError> {
        population.non_empty()?;
        Ok(population
            .sequences
            .par_iter()
            .fold(Self::empty, |mut acc, seq| {
                acc.add(seq);
                acc
            })
            .reduce(Self::empty, Self::merge))
    }
}

macro_rules! episode_metric {
    ($(#[$doc:meta])* $name:ident, $field:ident) => {
        $(#[$doc])*
        pub fn $name(gen: &Population, reference: &Population) -> Result<f64, MetricError> {
            let g = EpisodeStats::of(gen)?;
            let t = EpisodeStats::of(reference)?;
            Ok(jsd_counts(&t.$field, &g.$field)?)
        }
    };
}

episode_metric!(
    /// JSD of pooled episode-length histograms (lengths 1..=96 slots).
    macro_int, run_length);
episode_metric!(
    /// JSD of the flattened (activity x episode length) joint histogram.
    micro_int, activity_run_length);
episode_metric!(
    /// JSD of pooled episode onset-slot histograms.
    macro_hour, onset);
episode_metric!(
    /// JSD of the flattened (activity x onset slot) joint histogram.
    micro_hour, activity_onset);
episode_metric!(
    /// JSD of per-activity total slot counts.
    act_type, slot_budget);
episode_metric!(
    /// JSD of per-activity episode counts.
    uni_act_type, episode_count);
episode_metric!(
    /// JSD of the per-user episode-count histogram.
    traj_len, chain_length);

/// JSD between the empirical distributions of whole 96-slot sequences.
pub fn data_jsd(gen: &Population, reference: &Population) -> Result<f64, MetricError> {
    gen.non_empty()?;
    reference.non_empty()?;
    let mut support: HashMap<&SlotSequence, usize> = HashMap::new();
    for seq in reference.sequences.iter().chain(&gen.sequences) {
        let next = support.len();
        support.entry(seq).or_insert(next);
    }
    let mut t = vec![0.0; support.len()];
    let mut g = vec![0.0; support.len()];
    for seq in &reference.sequences {
        t[support[seq]] += 1.0;
    }
    for seq in &gen.sequences {
        g[support[seq]] += 1.0;
    }
    Ok(jsd_counts(&t, &g)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Higher,
    Lower,
}

impl Direction {
    pub fn arrow(self) -> &'static str {
        match self {
            Direction::Higher => "↑",
            Direction::Lower => "↓",
        }
    }
}

/// All twelve metrics for one (generated, reference) comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricReport {
    pub accuracy: f64,
    pub f1_score: f64,
    pub edit_dist: f64,
    pub bleu_score: f64,
    pub macro_hour: f64,
    pub micro_hour: f64,
    pub micro_int: f64,
    pub macro_int: f64,
    pub data_jsd: f64,
    pub act_type: f64,
    pub uni_act_type: f64,
    pub traj_len: f64,
}

impl MetricReport {
    /// `(name, short label, value, direction)` with the headline triple first.
    pub fn entries(&self) -> [(&'static str, &'static str, f64, Direction); 12] {
        use Direction::*;
        [
            ("accuracy", "Acc", self.accuracy, Higher),
            ("macro_int", "Mint", self.macro_int, Lower),
            ("act_type", "Atype", self.act_type, Lower),
            ("f1_score", "F1", self.f1_score, Higher),
            ("edit_dist", "Edit", self.edit_dist, Lower),
            ("bleu_score", "BLEU", self.bleu_score, Higher),
            ("macro_hour", "Mhour", self.macro_hour, Lower),
            ("micro_hour", "mhour", self.micro_hour, Lower),
            ("micro_int", "mint", self.micro_int, Lower),
            ("data_jsd", "Data", self.data_jsd, Lower),
            ("uni_act_type", "Utype", self.uni_act_type, Lower),
            ("traj_len", "Tlen", self.traj_len, Lower),
        ]
    }

    /// Aligned two-line text table.
    pub fn to_table(&self) -> String {
        let entries = self.entries();
        let width = 8;
        let header: Vec<String> = entries
            .iter()
            .map(|(_, label, _, dir)| format!("{:>width$}", format!("{label}{}", dir.arrow())))
            .collect();
        let values: Vec<String> = entries
            .iter()
            .map(|(_, _, v, _)| format!("{v:>width$.3}"))
            .collect();
        format!("{}\n{}\n", header.join(" "), values.join(" "))
    }

    pub fn to_document(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

impl Serialize for MetricReport {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Entry {
            value: f64,
            better: Direction,
        }
        let entries = self.entries();
        let mut map = serializer.serialize_map(Some(entries.len()))?;
        for (name, _, value, better) in entries {
            map.serialize_entry(name, &Entry { value, better })?;
        }
        map.end()
    }
}

impl fmt::Display for MetricReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_table())
    }
}

/// Computes the full report.
pub fn evaluate(gen: &Population, reference: &Population) -> Result<MetricReport, MetricError> {
    let g = EpisodeStats::of(gen)?;
    let t = EpisodeStats::of(reference)?;
    Ok(MetricReport {
        accuracy: accuracy(gen, reference)?,
        f1_score: macro_f1(gen, reference)?,
        edit_dist: edit_dist(gen, reference)?,
        bleu_score: bleu(gen, reference)?,
        macro_hour: jsd_counts(&t.onset, &g.onset)?,
        micro_hour: jsd_counts(&t.activity_onset, &g.activity_onset)?,
        micro_int: jsd_counts(&t.activity_run_length, &g.activity_run_length)?,
        macro_int: jsd_counts(&t.run_length, &g.run_length)?,
        data_jsd: data_jsd(gen, reference)?,
        act_type: jsd_counts(&t.slot_budget, &g.slot_budget)?,
        uni_act_type: jsd_counts(&t.episode_count, &g.episode_count)?,
        traj_len: jsd_counts(&t.chain_length, &g.chain_length)?,
    })
}
