//! Schedule edit operations, edit-script synthesis and deterministic repair.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::schedule::{normalize, ActivitySegment, ActivityType, DaySchedule, ScheduleError, TimeOfDay, DAY_MINUTES};

/// A local modification of a schedule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EditOp {
    /// Insert `segment` so that it ends up at `index`.
    Add { index: usize, segment: ActivitySegment },
    Delete { index: usize },
    /// Move both boundaries of the segment at `index`.
    Shift { index: usize, new_start: TimeOfDay, new_end: TimeOfDay },
    Replace { index: usize, new_activity: ActivityType },
    /// Cut the segment at `split_time`; the second half becomes `second_activity`.
    Split { index: usize, split_time: TimeOfDay, second_activity: ActivityType },
}

impl EditOp {
    pub fn index(&self) -> usize {
        match *self {
            EditOp::Add { index, .. }
            | EditOp::Delete { index }
            | EditOp::Shift { index, .. }
            | EditOp::Replace { index, .. }
            | EditOp::Split { index, .. } => index,
        }
    }

    pub fn kind(&self) -> OpKind {
        match self {
            EditOp::Add { .. } => OpKind::Add,
            EditOp::Delete { .. } => OpKind::Delete,
            EditOp::Shift { .. } => OpKind::Shift,
            EditOp::Replace { .. } => OpKind::Replace,
            EditOp::Split { .. } => OpKind::Split,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OpKind {
    Add,
    Delete,
    Shift,
    Replace,
    Split,
}

impl fmt::Display for OpKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OpKind::Add => "ADD",
            OpKind::Delete => "DELETE",
            OpKind::Shift => "SHIFT",
            OpKind::Replace => "REPLACE",
            OpKind::Split => "SPLIT",
        })
    }
}

/// One step of an edit script.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EditStep {
    pub op: EditOp,
    pub rationale: String,
}

/// Flat wire record: `{op, index, <op params>, rationale}`.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EditRecord {
    op: OpKind,
    index: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    activity: Option<ActivityType>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    start_time: Option<TimeOfDay>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    end_time: Option<TimeOfDay>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    new_start: Option<TimeOfDay>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    new_end: Option<TimeOfDay>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    new_activity: Option<ActivityType>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    split_time: Option<TimeOfDay>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    second_activity: Option<ActivityType>,
    #[serde(default)]
    rationale: String,
}

impl From<&EditStep> for EditRecord {
    fn from(step: &EditStep) -> Self {
        let mut r = EditRecord {
            op: step.op.kind(),
            index: step.op.index(),
            activity: None,
            start_time: None,
            end_time: None,
            new_start: None,
            new_end: None,
            new_activity: None,
            split_time: None,
            second_activity: None,
            rationale: step.rationale.clone(),
        };
        match step.op {
            EditOp::Add { segment, .. } => {
                r.activity = Some(segment.activity);
                r.start_time = Some(segment.start());
                r.end_time = Some(segment.end());
            }
            EditOp::Delete { .. } => {}
            EditOp::Shift { new_start, new_end, .. } => {
                r.new_start = Some(new_start);
                r.new_end = Some(new_end);
            }
            EditOp::Replace { new_activity, .. } => r.new_activity = Some(new_activity),
            EditOp::Split { split_time, second_activity, .. } => {
                r.split_time = Some(split_time);
                r.second_activity = Some(second_activity);
            }
        }
        r
    }
}

impl TryFrom<EditRecord> for EditStep {
    type Error = String;

    fn try_from(r: EditRecord) -> Result<Self, Self::Error> {
        let need = |name: &str| format!("{} op requires `{name}`", r.op);
        let index = r.index;
        let op = match r.op {
            OpKind::Add => {
                let segment = ActivitySegment::new(
                    r.activity.ok_or_else(|| need("activity"))?,
                    r.start_time.ok_or_else(|| need("start_time"))?,
                    r.end_time.ok_or_else(|| need("end_time"))?,
                )
                .map_err(|e| e.to_string())?;
                EditOp::Add { index, segment }
            }
            OpKind::Delete => EditOp::Delete { index },
            OpKind::Shift => EditOp::Shift {
                index,
                new_start: r.new_start.ok_or_else(|| need("new_start"))?,
                new_end: r.new_end.ok_or_else(|| need("new_end"))?,
            },
            OpKind::Replace => EditOp::Replace {
                index,
                new_activity: r.new_activity.ok_or_else(|| need("new_activity"))?,
            },
            OpKind::Split => EditOp::Split {
                index,
                split_time: r.split_time.ok_or_else(|| need("split_time"))?,
                second_activity: r.second_activity.ok_or_else(|| need("second_activity"))?,
            },
        };
        Ok(EditStep {
            op,
            rationale: r.rationale,
        })
    }
}

impl Serialize for EditStep {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        EditRecord::from(self).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for EditStep {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        EditRecord::deserialize(deserializer)?
            .try_into()
            .map_err(serde::de::Error::custom)
    }
}

impl fmt::Display for EditStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.op {
            EditOp::Add { index, segment } => write!(
                f,
                "ADD: '{}' at time {} until {} as idx {index}",
                segment.activity,
                segment.start(),
                segment.end()
            )?,
            EditOp::Delete { index } => write!(f, "DELETE: segment at idx {index}")?,
            EditOp::Shift { index, new_start, new_end } => {
                write!(f, "SHIFT: idx {index} to {new_start}-{new_end}")?
            }
            EditOp::Replace { index, new_activity } => {
                write!(f, "REPLACE: idx {index} -> '{new_activity}'")?
            }
            EditOp::Split { index, split_time, second_activity } => write!(
                f,
                "SPLIT: idx {index} at {split_time}, second part '{second_activity}'"
            )?,
        }
        if !self.rationale.is_empty() {
            write!(f, " ({})", self.rationale)?;
        }
        Ok(())
    }
}

/// Ordered list of edit steps.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EditScript {
    pub steps: Vec<EditStep>,
}

impl EditScript {
    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn push(&mut self, op: EditOp, rationale: impl Into<String>) {
        self.steps.push(EditStep {
            op,
            rationale: rationale.into(),
        });
    }

    pub fn to_document(&self) -> String {
        serde_json::to_string_pretty(self).expect("edit script serializes")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EditError {
    #[error("index {index} out of range for {len} segments")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("shift to {start}-{end} leaves a non-positive duration")]
    NonPositiveShift { start: TimeOfDay, end: TimeOfDay },
    #[error("split time {time} is not strictly inside {segment}")]
    SplitOutsideSegment { time: TimeOfDay, segment: ActivitySegment },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("edit step {position} failed: {source}")]
pub struct ScriptError {
    pub position: usize,
    #[source]
    pub source: EditError,
}

fn check_index(index: usize, len: usize) -> Result<(), EditError> {
    if index < len {
        Ok(())
    } else {
        Err(EditError::IndexOutOfRange { index, len })
    }
}

/// Applies one operation without re-normalizing.
pub fn apply_op(schedule: &DaySchedule, op: &EditOp) -> Result<DaySchedule, EditError> {
    let mut segs = schedule.segments.clone();
    let len = segs.len();
    match *op {
        EditOp::Add { index, segment } => {
            if index > len {
                return Err(EditError::IndexOutOfRange { index, len });
            }
            segs.insert(index, segment);
        }
        EditOp::Delete { index } => {
            check_index(index, len)?;
            segs.remove(index);
        }
        EditOp::Shift { index, new_start, new_end } => {
            check_index(index, len)?;
            let activity = segs[index].activity;
            segs[index] = ActivitySegment::new(activity, new_start, new_end)
                .map_err(|_| EditError::NonPositiveShift { start: new_start, end: new_end })?;
        }
        EditOp::Replace { index, new_activity } => {
            check_index(index, len)?;
            segs[index].activity = new_activity;
        }
        EditOp::Split { index, split_time, second_activity } => {
            check_index(index, len)?;
            let seg = segs[index];
            let outside = EditError::SplitOutsideSegment { time: split_time, segment: seg };
            let first = ActivitySegment::new(seg.activity, seg.start(), split_time).map_err(|_| outside.clone())?;
            let second = ActivitySegment::new(second_activity, split_time, seg.end()).map_err(|_| outside)?;
            segs.splice(index..=index, [first, second]);
        }
    }
    Ok(DaySchedule::new(segs))
}

/// Left fold of [`apply_op`]; the first failing step aborts.
pub fn apply_script(schedule: &DaySchedule, script: &EditScript) -> Result<DaySchedule, ScriptError> {
    script
        .steps
        .iter()
        .enumerate()
        .try_fold(schedule.clone(), |acc, (position, step)| {
            apply_op(&acc, &step.op).map_err(|source| ScriptError { position, source })
        })
}

fn overlap(a: &ActivitySegment, b: &ActivitySegment) -> u16 {
    a.overlap_with(b.start().minutes(), b.end().minutes())
}

/// Greedy order-preserving matching: pairs sorted by decreasing overlap are
/// accepted when both ends are free and the pair does not cross an accepted one.
fn match_pairs(
    source: &[ActivitySegment],
    target: &[ActivitySegment],
    same_activity: bool,
    src_of: &mut [Option<usize>],
    tgt_of: &mut [Option<usize>],
) {
    let mut candidates: Vec<(u16, usize, usize)> = Vec::new();
    for (i, s) in source.iter().enumerate() {
        if src_of[i].is_some() {
            continue;
        }
        for (j, t) in target.iter().enumerate() {
            if tgt_of[j].is_some() || (s.activity == t.activity) != same_activity {
                continue;
            }
            let o = overlap(s, t);
            if o > 0 {
                candidates.push((o, i, j));
            }
        }
    }
    candidates.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    for (_, i, j) in candidates {
        if src_of[i].is_some() || tgt_of[j].is_some() {
            continue;
        }
        let crosses = src_of.iter().enumerate().any(|(a, m)| match m {
            Some(b) => (i < a) != (j < *b),
            None => false,
        });
        if !crosses {
            src_of[i] = Some(j);
            tgt_of[j] = Some(i);
        }
    }
}

/// Derives an edit script turning `source` into `target`.
///
/// Ops come out as deletes (descending index), replaces, shifts, then adds
/// (ascending time). Replaying the script reproduces `target` exactly; the
/// script is not guaranteed to be minimal.
pub fn diff(source: &DaySchedule, target: &DaySchedule) -> EditScript {
    let src = &source.segments;
    let tgt = &target.segments;
    let mut src_of: Vec<Option<usize>> = vec![None; src.len()];
    let mut tgt_of: Vec<Option<usize>> = vec![None; tgt.len()];
    match_pairs(src, tgt, true, &mut src_of, &mut tgt_of);
    match_pairs(src, tgt, false, &mut src_of, &mut tgt_of);

    let mut script = EditScript::default();
    for i in (0..src.len()).rev().filter(|&i| src_of[i].is_none()) {
        script.push(
            EditOp::Delete { index: i },
            format!("remove {} {}-{}, absent from target", src[i].activity, src[i].start(), src[i].end()),
        );
    }
    // after deletions, kept source segments sit in target order
    let kept: Vec<(usize, usize)> = src_of
        .iter()
        .enumerate()
        .filter_map(|(i, m)| m.map(|j| (i, j)))
        .collect();
    for (pos, &(i, j)) in kept.iter().enumerate() {
        if src[i].activity != tgt[j].activity {
            script.push(
                EditOp::Replace { index: pos, new_activity: tgt[j].activity },
                format!("{} -> {} to match target", src[i].activity, tgt[j].activity),
            );
        }
    }
    for (pos, &(i, j)) in kept.iter().enumerate() {
        if src[i].start() != tgt[j].start() || src[i].end() != tgt[j].end() {
            script.push(
                EditOp::Shift { index: pos, new_start: tgt[j].start(), new_end: tgt[j].end() },
                format!(
                    "{} {}-{} -> {}-{}",
                    tgt[j].activity,
                    src[i].start(),
                    src[i].end(),
                    tgt[j].start(),
                    tgt[j].end()
                ),
            );
        }
    }
    // ascending target index: every earlier target is already in place
    for j in (0..tgt.len()).filter(|&j| tgt_of[j].is_none()) {
        script.push(
            EditOp::Add { index: j, segment: tgt[j] },
            format!("insert missing {} {}-{}", tgt[j].activity, tgt[j].start(), tgt[j].end()),
        );
    }
    script
}

/// Tunables for [`repair_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RepairConfig {
    /// Gaps shorter than this extend the preceding segment; longer gaps get home.
    pub extend_gap_below_minutes: u16,
    /// Length of home carved at a non-home day boundary.
    pub boundary_home_minutes: u16,
}

impl Default for RepairConfig {
    fn default() -> Self {
        Self {
            extend_gap_below_minutes: 30,
            boundary_home_minutes: 15,
        }
    }
}

pub fn repair(schedule: &DaySchedule) -> Result<DaySchedule, ScheduleError> {
    repair_with(schedule, &RepairConfig::default())
}

#[derive(Debug, Clone, Copy)]
struct Span {
    activity: ActivityType,
    start: u16,
    end: u16,
}

fn carve(spans: Vec<Span>, from: u16, to: u16) -> Vec<Span> {
    let mut out = Vec::with_capacity(spans.len());
    for s in spans {
        if s.end <= from || s.start >= to {
            out.push(s);
            continue;
        }
        if s.start < from {
            out.push(Span { end: from, ..s });
        }
        if s.end > to {
            out.push(Span { start: to, ..s });
        }
    }
    out
}

/// Deterministically turns any non-empty schedule into a hard-valid one.
///
/// Steps: normalize; truncate the later segment of each overlap; fill gaps
/// (extend the predecessor for short gaps, insert home otherwise); pin the
/// day to 00:00 and 24:00; carve home at non-home boundaries; merge repeats.
pub fn repair_with(schedule: &DaySchedule, config: &RepairConfig) -> Result<DaySchedule, ScheduleError> {
    use ActivityType::Home;
    let normalized = normalize(schedule)?;
    let mut spans: Vec<Span> = Vec::with_capacity(normalized.len() + 4);
    for seg in &normalized.segments {
        let mut s = Span {
            activity: seg.activity,
            start: seg.start().minutes(),
            end: seg.end().minutes(),
        };
        if let Some(prev) = spans.last() {
            if s.start < prev.end {
                s.start = prev.end;
                if s.start >= s.end {
                    continue;
                }
            }
        }
        spans.push(s);
    }

    let mut filled: Vec<Span> = Vec::with_capacity(spans.len() * 2);
    for s in spans {
        if let Some(prev) = filled.last_mut() {
            let gap = s.start - prev.end;
            if gap > 0 && gap < config.extend_gap_below_minutes {
                prev.end = s.start;
            } else if gap > 0 {
                let home = Span { activity: Home, start: prev.end, end: s.start };
                filled.push(home);
            }
        }
        filled.push(s);
    }

    let first = filled[0];
    if first.start > 0 {
        if first.activity == Home {
            filled[0].start = 0;
        } else {
            filled.insert(0, Span { activity: Home, start: 0, end: first.start });
        }
    }
    filled.last_mut().expect("non-empty").end = DAY_MINUTES;

    let edge = config.boundary_home_minutes.clamp(1, DAY_MINUTES / 2);
    if filled[0].activity != Home {
        filled = carve(filled, 0, edge);
        filled.insert(0, Span { activity: Home, start: 0, end: edge });
    }
    if filled.last().expect("non-empty").activity != Home {
        filled = carve(filled, DAY_MINUTES - edge, DAY_MINUTES);
        filled.push(Span { activity: Home, start: DAY_MINUTES - edge, end: DAY_MINUTES });
    }

    let segments = filled
        .into_iter()
        .map(|s| ActivitySegment::from_minutes(s.activity, s.start, s.end))
        .collect::<Result<Vec<_>, _>>()?;
    normalize(&DaySchedule::new(segments))
}
