//! Activity types, clock times, day schedules and the 96-slot discretization.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Minutes in a day; the only representable value past 23:59 is 24:00.
pub const DAY_MINUTES: u16 = 1440;
/// Width of one discretization slot in minutes.
pub const SLOT_MINUTES: u16 = 15;
/// Number of slots in a discretized day.
pub const SLOTS_PER_DAY: usize = 96;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScheduleError {
    #[error("malformed time {0:?}, expected HH:MM between 00:00 and 24:00")]
    MalformedTime(String),
    #[error("unknown activity type {0:?}")]
    UnknownActivity(String),
    #[error("segment {start}-{end} has non-positive duration")]
    NonPositiveDuration { start: TimeOfDay, end: TimeOfDay },
    #[error("schedule is empty")]
    Empty,
    #[error("schedule does not tile 00:00-24:00: {0}")]
    NotCovering(String),
}

/// The closed set of activity categories.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ActivityType {
    Home,
    Work,
    Education,
    Shopping,
    Service,
    Medical,
    DineOut,
    Socialize,
    Exercise,
    DropoffPickup,
}

impl ActivityType {
    pub const COUNT: usize = 10;

    pub const ALL: [ActivityType; Self::COUNT] = [
        ActivityType::Home,
        ActivityType::Work,
        ActivityType::Education,
        ActivityType::Shopping,
        ActivityType::Service,
        ActivityType::Medical,
        ActivityType::DineOut,
        ActivityType::Socialize,
        ActivityType::Exercise,
        ActivityType::DropoffPickup,
    ];

    pub fn label(self) -> &'static str {
        match self {
            ActivityType::Home => "home",
            ActivityType::Work => "work",
            ActivityType::Education => "education",
            ActivityType::Shopping => "shopping",
            ActivityType::Service => "service",
            ActivityType::Medical => "medical",
            ActivityType::DineOut => "dine_out",
            ActivityType::Socialize => "socialize",
            ActivityType::Exercise => "exercise",
            ActivityType::DropoffPickup => "dropoff_pickup",
        }
    }

    /// Dense index in `0..COUNT`, stable with the order of [`ActivityType::ALL`].
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(index: usize) -> Option<Self> {
        Self::ALL.get(index).copied()
    }
}

impl fmt::Display for ActivityType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for ActivityType {
    type Err = ScheduleError;

    /// Labels match case-insensitively, surrounding whitespace ignored.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let needle = s.trim();
        Self::ALL
            .iter()
            .copied()
            .find(|a| a.label().eq_ignore_ascii_case(needle))
            .ok_or_else(|| ScheduleError::UnknownActivity(s.to_string()))
    }
}

impl Serialize for ActivityType {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.label())
    }
}

impl<'de> Deserialize<'de> for ActivityType {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

/// Minutes since midnight, `0..=1440`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct TimeOfDay(u16);

impl TimeOfDay {
    pub const MIDNIGHT: TimeOfDay = TimeOfDay(0);
    pub const END_OF_DAY: TimeOfDay = TimeOfDay(DAY_MINUTES);

    pub fn from_minutes(minutes: u16) -> Option<Self> {
        (minutes <= DAY_MINUTES).then_some(TimeOfDay(minutes))
    }

    pub fn from_hm(hour: u16, minute: u16) -> Option<Self> {
        if minute >= 60 {
            return None;
        }
        Self::from_minutes(hour.checked_mul(60)?.checked_add(minute)?)
    }

    pub fn minutes(self) -> u16 {
        self.0
    }
}

/// Parses `H:MM` or `HH:MM`; `24:00` is accepted as the end of day.
pub fn parse_time(text: &str) -> Result<TimeOfDay, ScheduleError> {
    let malformed = || ScheduleError::MalformedTime(text.to_string());
    let (hour, minute) = text.trim().split_once(':').ok_or_else(malformed)?;
    if hour.is_empty()
        || hour.len() > 2
        || minute.len() != 2
        || !hour.bytes().all(|b| b.is_ascii_digit())
        || !minute.bytes().all(|b| b.is_ascii_digit())
    {
        return Err(malformed());
    }
    let hour: u16 = hour.parse().map_err(|_| malformed())?;
    let minute: u16 = minute.parse().map_err(|_| malformed())?;
    TimeOfDay::from_hm(hour, minute).ok_or_else(malformed)
}

pub fn format_time(time: TimeOfDay) -> String {
    time.to_string()
}

impl fmt::Display for TimeOfDay {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:02}:{:02}", self.0 / 60, self.0 % 60)
    }
}

impl FromStr for TimeOfDay {
    type Err = ScheduleError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_time(s)
    }
}

impl Serialize for TimeOfDay {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for TimeOfDay {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        parse_time(&text).map_err(serde::de::Error::custom)
    }
}

/// One typed, timed activity. Always has `start < end`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawSegment")]
pub struct ActivitySegment {
    pub activity: ActivityType,
    #[serde(rename = "start_time")]
    start: TimeOfDay,
    #[serde(rename = "end_time")]
    end: TimeOfDay,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSegment {
    activity: ActivityType,
    start_time: TimeOfDay,
    end_time: TimeOfDay,
}

impl TryFrom<RawSegment> for ActivitySegment {
    type Error = ScheduleError;

    fn try_from(raw: RawSegment) -> Result<Self, Self::Error> {
        ActivitySegment::new(raw.activity, raw.start_time, raw.end_time)
    }
}

impl ActivitySegment {
    pub fn new(
        activity: ActivityType,
        start: TimeOfDay,
        end: TimeOfDay,
    ) -> Result<Self, ScheduleError> {
        if start >= end {
            return Err(ScheduleError::NonPositiveDuration { start, end });
        }
        Ok(Self {
            activity,
            start,
            end,
        })
    }

    /// Builds a segment from raw minute offsets.
    pub fn from_minutes(activity: ActivityType, start: u16, end: u16) -> Result<Self, ScheduleError> {
        let to_time = |m: u16| {
            TimeOfDay::from_minutes(m).ok_or_else(|| ScheduleError::MalformedTime(m.to_string()))
        };
        Self::new(activity, to_time(start)?, to_time(end)?)
    }

    pub fn start(&self) -> TimeOfDay {
        self.start
    }

    pub fn end(&self) -> TimeOfDay {
        self.end
    }

    pub fn duration_minutes(&self) -> u16 {
        self.end.0 - self.start.0
    }

    /// Minutes shared with the half-open window `[from, to)`.
    pub fn overlap_with(&self, from: u16, to: u16) -> u16 {
        let lo = self.start.0.max(from);
        let hi = self.end.0.min(to);
        hi.saturating_sub(lo)
    }

    /// Canonical one-line document form, e.g.
    /// `{"activity": "home", "start_time": "00:00", "end_time": "07:30"}`.
    pub fn to_document(&self) -> String {
        format!(
            r#"{{"activity": "{}", "start_time": "{}", "end_time": "{}"}}"#,
            self.activity, self.start, self.end
        )
    }
}

impl fmt::Display for ActivitySegment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}-{}", self.activity, self.start, self.end)
    }
}

/// An ordered activity chain for one day.
///
/// The list may be transiently empty while an edit script is being replayed;
/// [`normalize`] rejects empty schedules.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DaySchedule {
    pub segments: Vec<ActivitySegment>,
}

impl DaySchedule {
    pub fn new(segments: Vec<ActivitySegment>) -> Self {
        Self { segments }
    }

    /// Convenience constructor from `(activity, start, end)` minute triples.
    pub fn from_minutes(items: &[(ActivityType, u16, u16)]) -> Result<Self, ScheduleError> {
        items
            .iter()
            .map(|&(a, s, e)| ActivitySegment::from_minutes(a, s, e))
            .collect::<Result<Vec<_>, _>>()
            .map(Self::new)
    }

    /// A single home segment spanning the whole day.
    pub fn all_home() -> Self {
        Self::single(ActivityType::Home)
    }

    pub fn single(activity: ActivityType) -> Self {
        Self::new(vec![ActivitySegment {
            activity,
            start: TimeOfDay::MIDNIGHT,
            end: TimeOfDay::END_OF_DAY,
        }])
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    /// Parses a schedule document (a JSON array of segment objects).
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// Canonical document form: one segment object per line, two-space indent.
    pub fn to_document(&self) -> String {
        self.to_document_indented(0)
    }

    /// Like [`DaySchedule::to_document`], with every line after the first
    /// prefixed by `indent` spaces.
    pub fn to_document_indented(&self, indent: usize) -> String {
        if self.segments.is_empty() {
            return "[]".to_string();
        }
        let pad = " ".repeat(indent);
        let body: Vec<String> = self
            .segments
            .iter()
            .map(|s| format!("{pad}  {}", s.to_document()))
            .collect();
        format!("[\n{}\n{pad}]", body.join(",\n"))
    }

    /// True if sorted, gap-free, overlap-free and spanning 00:00-24:00.
    pub fn covers_day(&self) -> bool {
        let (Some(first), Some(last)) = (self.segments.first(), self.segments.last()) else {
            return false;
        };
        first.start == TimeOfDay::MIDNIGHT
            && last.end == TimeOfDay::END_OF_DAY
            && self.segments.windows(2).all(|w| w[0].end == w[1].start)
    }
}

impl fmt::Display for DaySchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.segments.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

/// Sorts segments by start time and merges touching runs of the same activity.
///
/// Overlapping segments are left alone; they are reported by the constraint
/// engine and resolved by repair.
pub fn normalize(schedule: &DaySchedule) -> Result<DaySchedule, ScheduleError> {
    if schedule.is_empty() {
        return Err(ScheduleError::Empty);
    }
    let mut sorted = schedule.segments.clone();
    // stable: equal starts keep their original relative order
    sorted.sort_by_key(|s| s.start);

    let mut merged: Vec<ActivitySegment> = Vec::with_capacity(sorted.len());
    for seg in sorted {
        match merged.last_mut() {
            Some(prev) if prev.activity == seg.activity && prev.end == seg.start => {
                prev.end = seg.end;
            }
            _ => merged.push(seg),
        }
    }
    Ok(DaySchedule::new(merged))
}

/// 96 activity labels, slot `t` covering minutes `[15t, 15t + 15)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SlotSequence(pub [ActivityType; SLOTS_PER_DAY]);

impl SlotSequence {
    pub fn filled(activity: ActivityType) -> Self {
        SlotSequence([activity; SLOTS_PER_DAY])
    }

    pub fn slots(&self) -> &[ActivityType; SLOTS_PER_DAY] {
        &self.0
    }

    pub fn get(&self, slot: usize) -> ActivityType {
        self.0[slot]
    }
}

impl TryFrom<Vec<ActivityType>> for SlotSequence {
    type Error = usize;

    /// Fails with the offending length unless exactly 96 labels are given.
    fn try_from(value: Vec<ActivityType>) -> Result<Self, Self::Error> {
        let len = value.len();
        <[ActivityType; SLOTS_PER_DAY]>::try_from(value)
            .map(SlotSequence)
            .map_err(|_| len)
    }
}

/// Maps a day-covering schedule onto 96 fifteen-minute slots.
///
/// Each slot takes the activity with the most minutes inside the slot; ties go
/// to the activity whose segment starts earliest within the slot.
pub fn discretize(schedule: &DaySchedule) -> Result<SlotSequence, ScheduleError> {
    if schedule.is_empty() {
        return Err(ScheduleError::Empty);
    }
    if !schedule.covers_day() {
        return Err(ScheduleError::NotCovering(schedule.to_string()));
    }
    let mut slots = [ActivityType::Home; SLOTS_PER_DAY];
    let mut cursor = 0usize;
    for (t, slot) in slots.iter_mut().enumerate() {
        let from = t as u16 * SLOT_MINUTES;
        let to = from + SLOT_MINUTES;
        while schedule.segments[cursor].end.0 <= from {
            cursor += 1;
        }
        // (activity, minutes); first-seen order is start order
        let mut totals: Vec<(ActivityType, u16)> = Vec::with_capacity(2);
        for seg in schedule.segments[cursor..].iter().take_while(|s| s.start.0 < to) {
            let minutes = seg.overlap_with(from, to);
            match totals.iter_mut().find(|(a, _)| *a == seg.activity) {
                Some(entry) => entry.1 += minutes,
                None => totals.push((seg.activity, minutes)),
            }
        }
        let mut best = totals[0];
        for &candidate in &totals[1..] {
            if candidate.1 > best.1 {
                best = candidate;
            }
        }
        *slot = best.0;
    }
    Ok(SlotSequence(slots))
}

/// A maximal run of one activity within a [`SlotSequence`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Episode {
    pub activity: ActivityType,
    pub start_slot: usize,
    pub length_slots: usize,
}

/// Run-length encodes a slot sequence.
pub fn episodes(seq: &SlotSequence) -> Vec<Episode> {
    let mut out: Vec<Episode> = Vec::new();
    for (t, &activity) in seq.0.iter().enumerate() {
        match out.last_mut() {
            Some(ep) if ep.activity == activity => ep.length_slots += 1,
            _ => out.push(Episode {
                activity,
                start_slot: t,
                length_slots: 1,
            }),
        }
    }
    out
}

/// Expands episodes back into 96 labels; `None` unless they tile the day.
pub fn expand_episodes(eps: &[Episode]) -> Option<SlotSequence> {
    let mut labels = Vec::with_capacity(SLOTS_PER_DAY);
    for ep in eps {
        if ep.start_slot != labels.len() || ep.length_slots == 0 {
            return None;
        }
        labels.extend(std::iter::repeat(ep.activity).take(ep.length_slots));
    }
    SlotSequence::try_from(labels).ok()
}

#[cfg(test)]
mod tests {
    use super::ActivityType::*;
    use super::*;

    fn sched(items: &[(ActivityType, u16, u16)]) -> DaySchedule {
        DaySchedule::from_minutes(items).unwrap()
    }

    #[test]
    fn parse_time_examples() {
        assert_eq!(parse_time("00:00").unwrap().minutes(), 0);
        assert_eq!(parse_time("07:45").unwrap().minutes(), 465);
        assert_eq!(parse_time("24:00").unwrap().minutes(), 1440);
        assert_eq!(parse_time("7:30").unwrap().minutes(), 450);
    }

    #[test]
    fn parse_time_rejects_malformed() {
        for bad in ["", "24:01", "25:00", "12:60", "1230", "12:3", "ab:cd", "-1:00", "123:00", "12:345"] {
            assert!(parse_time(bad).is_err(), "{bad:?} should fail");
        }
    }

    #[test]
    fn time_round_trip_exhaustive() {
        for m in 0..=DAY_MINUTES {
            let t = TimeOfDay::from_minutes(m).unwrap();
            assert_eq!(parse_time(&format_time(t)).unwrap(), t);
        }
    }

    #[test]
    fn activity_labels_closed() {
        for a in ActivityType::ALL {
            assert_eq!(a.label().parse::<ActivityType>().unwrap(), a);
            assert_eq!(ActivityType::from_index(a.index()), Some(a));
        }
        assert_eq!("Home".parse::<ActivityType>().unwrap(), Home);
        assert!("sleep".parse::<ActivityType>().is_err());
        assert!("travel".parse::<ActivityType>().is_err());
    }

    #[test]
    fn segment_requires_positive_duration() {
        assert!(ActivitySegment::from_minutes(Home, 10, 10).is_err());
        assert!(ActivitySegment::from_minutes(Home, 20, 10).is_err());
        let err = serde_json::from_str::<ActivitySegment>(
            r#"{"activity": "home", "start_time": "08:00", "end_time": "07:00"}"#,
        );
        assert!(err.is_err());
    }

    #[test]
    fn document_format_is_canonical() {
        let s = sched(&[(Home, 0, 450), (Work, 450, 1020), (Home, 1020, 1440)]);
        let doc = s.to_document();
        assert_eq!(
            doc,
            "[\n  {\"activity\": \"home\", \"start_time\": \"00:00\", \"end_time\": \"07:30\"},\n  {\"activity\": \"work\", \"start_time\": \"07:30\", \"end_time\": \"17:00\"},\n  {\"activity\": \"home\", \"start_time\": \"17:00\", \"end_time\": \"24:00\"}\n]"
        );
        assert_eq!(DaySchedule::from_json(&doc).unwrap(), s);
        assert_eq!(DaySchedule::default().to_document(), "[]");
    }

    #[test]
    fn normalize_merges_touching_identicals() {
        let s = sched(&[(Home, 0, 420), (Home, 420, 480)]);
        assert_eq!(normalize(&s).unwrap(), sched(&[(Home, 0, 480)]));
    }

    #[test]
    fn normalize_sorts() {
        let s = sched(&[(Work, 480, 600), (Home, 0, 480)]);
        assert_eq!(normalize(&s).unwrap(), sched(&[(Home, 0, 480), (Work, 480, 600)]));
    }

    #[test]
    fn normalize_fixed_point_and_errors() {
        let s = sched(&[(Home, 0, 450), (Work, 450, 1020), (Home, 1020, 1440)]);
        assert_eq!(normalize(&s).unwrap(), s);
        assert_eq!(normalize(&DaySchedule::default()), Err(ScheduleError::Empty));
    }

    #[test]
    fn normalize_leaves_overlapping_identicals() {
        let s = sched(&[(Home, 0, 500), (Home, 400, 1440)]);
        assert_eq!(normalize(&s).unwrap(), s);
    }

    #[test]
    fn discretize_single_segment() {
        let seq = discretize(&DaySchedule::all_home()).unwrap();
        assert_eq!(seq, SlotSequence::filled(Home));
    }

    #[test]
    fn discretize_case_study_boundary() {
        // 00:00-07:45 home, 07:45-16:30 work, ...
        let s = sched(&[(Home, 0, 465), (Work, 465, 990), (Shopping, 990, 1050), (Home, 1050, 1440)]);
        let seq = discretize(&s).unwrap();
        assert_eq!(seq.get(30), Home);
        assert_eq!(seq.get(31), Work);
    }

    #[test]
    fn discretize_majority_within_slot() {
        // slot 31 = [465, 480): home 5 minutes, work 10 minutes
        let s = sched(&[(Home, 0, 470), (Work, 470, 1440)]);
        assert_eq!(discretize(&s).unwrap().get(31), Work);
        // home 7 minutes, work 8
        let s = sched(&[(Home, 0, 472), (Work, 472, 1440)]);
        assert_eq!(discretize(&s).unwrap().get(31), Work);
    }

    #[test]
    fn discretize_tie_goes_to_earlier_segment() {
        // slot 1 = [15, 30): home 15..20 (5), work 20..25 (5), shopping 25..30 (5)
        let s = sched(&[(Home, 0, 20), (Work, 20, 25), (Shopping, 25, 30), (Home, 30, 1440)]);
        assert_eq!(discretize(&s).unwrap().get(1), Home);
        // home 15..18 + 27..30 = 6 minutes, work 18..27 = 9
        let s = sched(&[(Home, 0, 18), (Work, 18, 27), (Home, 27, 1440)]);
        assert_eq!(discretize(&s).unwrap().get(1), Work);
        // home 15..19 + 26..30 = 8 beats work 7
        let s = sched(&[(Home, 0, 19), (Work, 19, 26), (Home, 26, 1440)]);
        assert_eq!(discretize(&s).unwrap().get(1), Home);
    }

    #[test]
    fn discretize_rejects_gaps() {
        let s = sched(&[(Home, 0, 420), (Work, 480, 1440)]);
        assert!(matches!(discretize(&s), Err(ScheduleError::NotCovering(_))));
        assert!(discretize(&DaySchedule::default()).is_err());
    }

    #[test]
    fn episodes_examples() {
        assert_eq!(
            episodes(&SlotSequence::filled(Home)),
            vec![Episode { activity: Home, start_slot: 0, length_slots: 96 }]
        );
        let mut labels = vec![Home; 30];
        labels.extend(vec![Work; 36]);
        labels.extend(vec![Home; 30]);
        let seq = SlotSequence::try_from(labels).unwrap();
        let eps = episodes(&seq);
        assert_eq!(eps.iter().map(|e| e.start_slot).collect::<Vec<_>>(), vec![0, 30, 66]);
        assert_eq!(expand_episodes(&eps), Some(seq));
    }

    #[test]
    fn slot_sequence_length_checked() {
        assert_eq!(SlotSequence::try_from(vec![Home; 95]), Err(95));
    }
}
