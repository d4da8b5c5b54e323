//! Rule-based roll-out reward: formatting, constraint and fidelity terms,
//! plus group-relative advantages for external policy trainers.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::agent::parse::{parse_tagged_output, TaggedOutput};
use crate::constraints::DurationBounds;
use crate::metrics::macro_f1_single;
use crate::schedule::{discretize, episodes, ActivityType, DaySchedule, ScheduleError, SlotSequence, TimeOfDay, SLOTS_PER_DAY};
use crate::stats::{jsd_counts, HistogramError};

/// Fidelity weights: accuracy, macro-F1, activity JSD term, interval JSD term.
pub const SIM_WEIGHTS: [f64; 4] = [0.40, 0.10, 0.25, 0.25];

/// Added to the group standard deviation before dividing.
pub const ADVANTAGE_EPSILON: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RewardError {
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
    #[error(transparent)]
    Histogram(#[from] HistogramError),
    #[error("group advantages need at least 2 roll-outs, got {0}")]
    GroupTooSmall(usize),
}

/// Per-roll-out reward components; `total` is their sum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RewardBreakdown {
    pub r_fmt: f64,
    pub r_con: f64,
    pub r_sim: f64,
    pub total: f64,
    /// Why a component was zeroed, if any.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl RewardBreakdown {
    fn new(r_fmt: f64, r_con: f64, r_sim: f64, notes: Vec<String>) -> Self {
        Self {
            r_fmt,
            r_con,
            r_sim,
            total: r_fmt + r_con + r_sim,
            notes,
        }
    }
}

/// 1.0 with both a `[THOUGHT]` and a `[JSON]` block, 0.5 with one, else 0.
pub fn r_fmt(raw_output: &str) -> f64 {
    format_score(&parse_tagged_output(raw_output))
}

fn format_score(tagged: &TaggedOutput) -> f64 {
    match (tagged.thought.is_some(), tagged.json_block.is_some()) {
        (true, true) => 1.0,
        (true, false) | (false, true) => 0.5,
        (false, false) => 0.0,
    }
}

/// The three boolean checks behind [`r_con`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConstraintIndicators {
    /// Starts at 00:00 and ends at 24:00.
    pub full_day: bool,
    /// No gaps or overlaps between consecutive segments.
    pub continuous: bool,
    /// Every duration inside its activity's bounds.
    pub durations: bool,
}

impl ConstraintIndicators {
    pub fn score(self) -> f64 {
        let hits = [self.full_day, self.continuous, self.durations]
            .iter()
            .filter(|b| **b)
            .count();
        hits as f64 / 3.0
    }
}

pub fn constraint_indicators(schedule: &DaySchedule, bounds: &DurationBounds) -> ConstraintIndicators {
    let mut segs = schedule.segments.clone();
    segs.sort_by_key(|s| s.start());
    if segs.is_empty() {
        return ConstraintIndicators { full_day: false, continuous: false, durations: false };
    }
    let latest_end = segs.iter().map(|s| s.end()).max().expect("non-empty");
    ConstraintIndicators {
        full_day: segs[0].start() == TimeOfDay::MIDNIGHT && latest_end == TimeOfDay::END_OF_DAY,
        continuous: segs.windows(2).all(|w| w[0].end() == w[1].start()),
        durations: segs.iter().all(|s| bounds.contains(s.activity, s.duration_minutes())),
    }
}

/// Mean of the full-day, continuity and duration indicators.
pub fn r_con(schedule: &DaySchedule, bounds: &DurationBounds) -> f64 {
    constraint_indicators(schedule, bounds).score()
}

fn type_histogram(seq: &SlotSequence) -> Vec<f64> {
    let mut h = vec![0.0; ActivityType::COUNT];
    for a in seq.0 {
        h[a.index()] += 1.0;
    }
    h
}

fn run_length_histogram(seq: &SlotSequence) -> Vec<f64> {
    let mut h = vec![0.0; SLOTS_PER_DAY];
    for ep in episodes(seq) {
        h[ep.length_slots - 1] += 1.0;
    }
    h
}

/// The four fidelity ingredients for one (generated, reference) pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FidelityTerms {
    pub accuracy: f64,
    pub macro_f1: f64,
    pub activity_jsd: f64,
    pub interval_jsd: f64,
}

impl FidelityTerms {
    pub fn score(self) -> f64 {
        let [wa, wf, wt, wi] = SIM_WEIGHTS;
        wa * self.accuracy + wf * self.macro_f1 + wt * (1.0 - self.activity_jsd) + wi * (1.0 - self.interval_jsd)
    }
}

pub fn fidelity_terms(gen: &DaySchedule, gt: &DaySchedule) -> Result<FidelityTerms, RewardError> {
    let g = discretize(gen)?;
    let t = discretize(gt)?;
    let hits = g.0.iter().zip(t.0.iter()).filter(|(a, b)| a == b).count();
    Ok(FidelityTerms {
        accuracy: hits as f64 / SLOTS_PER_DAY as f64,
        macro_f1: macro_f1_single(&g, &t),
        activity_jsd: jsd_counts(&type_histogram(&g), &type_histogram(&t))?,
        interval_jsd: jsd_counts(&run_length_histogram(&g), &run_length_histogram(&t))?,
    })
}

/// Weighted slot-level similarity to the ground truth, in `[0, 1]`.
pub fn r_sim(gen: &DaySchedule, gt: &DaySchedule) -> Result<f64, RewardError> {
    Ok(fidelity_terms(gen, gt)?.score().clamp(0.0, 1.0))
}

/// Scores one raw roll-out against a ground-truth day. Never fails: parse or
/// discretization failures zero the affected components and leave a note.
pub fn total_reward(raw_output: &str, gt: &DaySchedule, bounds: &DurationBounds) -> RewardBreakdown {
    let tagged = parse_tagged_output(raw_output);
    let fmt = format_score(&tagged);
    let mut notes = Vec::new();
    let Some(schedule) = tagged.schedule else {
        notes.push(match tagged.json_block {
            Some(_) => "schedule block present but unparseable".to_string(),
            None => "no schedule block".to_string(),
        });
        return RewardBreakdown::new(fmt, 0.0, 0.0, notes);
    };
    let con = r_con(&schedule, bounds);
    let sim = match r_sim(&schedule, gt) {
        Ok(s) => s,
        Err(e) => {
            notes.push(format!("fidelity not scored: {e}"));
            0.0
        }
    };
    RewardBreakdown::new(fmt, con, sim, notes)
}

/// `(r - mean) / (std + 1e-8)` with the population standard deviation.
pub fn group_advantages(rewards: &[f64]) -> Result<Vec<f64>, RewardError> {
    if rewards.len() < 2 {
        return Err(RewardError::GroupTooSmall(rewards.len()));
    }
    let n = rewards.len() as f64;
    let mean = rewards.iter().sum::<f64>() / n;
    let var = rewards.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / n;
    let scale = var.sqrt() + ADVANTAGE_EPSILON;
    Ok(rewards.iter().map(|r| (r - mean) / scale).collect())
}
