//! Five-category constraint audit of a (profile, schedule) pair.
//!
//! Physical and Logical checks are hard: a schedule failing either is
//! structurally invalid. Commonsense, Temporal and Coherence checks are soft
//! plausibility heuristics and never affect [`is_hard_valid`].

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::profile::UserProfile;
use crate::schedule::{normalize, ActivityType, DaySchedule, ScheduleError, TimeOfDay, DAY_MINUTES};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ConstraintCategory {
    Physical,
    Logical,
    Commonsense,
    Temporal,
    Coherence,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Hardness {
    Hard,
    Soft,
}

impl ConstraintCategory {
    pub fn hardness(self) -> Hardness {
        match self {
            ConstraintCategory::Physical | ConstraintCategory::Logical => Hardness::Hard,
            _ => Hardness::Soft,
        }
    }

    pub fn is_hard(self) -> bool {
        self.hardness() == Hardness::Hard
    }
}

impl fmt::Display for ConstraintCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// How strongly a finding should be acted on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    /// Hard-constraint breach.
    Error,
    /// Soft-constraint breach.
    Warning,
    /// Informational cue, not a breach.
    Note,
}

/// One audit finding. `segment_indices` index the audited (normalized)
/// schedule; an empty list marks a schedule-wide finding.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Violation {
    pub category: ConstraintCategory,
    pub segment_indices: Vec<usize>,
    pub description: String,
    pub severity: Severity,
}

impl Violation {
    fn new(category: ConstraintCategory, segment_indices: Vec<usize>, description: String) -> Self {
        let severity = match category.hardness() {
            Hardness::Hard => Severity::Error,
            Hardness::Soft => Severity::Warning,
        };
        Self {
            category,
            segment_indices,
            description,
            severity,
        }
    }

    pub fn hardness(&self) -> Hardness {
        self.category.hardness()
    }

    pub fn is_hard(&self) -> bool {
        self.category.is_hard()
    }
}

#[derive(Serialize, Deserialize)]
struct ViolationRecord {
    category: ConstraintCategory,
    hardness: Hardness,
    segment_indices: Vec<usize>,
    description: String,
    severity: Severity,
}

impl Serialize for Violation {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        ViolationRecord {
            category: self.category,
            hardness: self.hardness(),
            segment_indices: self.segment_indices.clone(),
            description: self.description.clone(),
            severity: self.severity,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Violation {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let r = ViolationRecord::deserialize(deserializer)?;
        if r.hardness != r.category.hardness() {
            return Err(serde::de::Error::custom(format!(
                "category {} cannot be {:?}",
                r.category, r.hardness
            )));
        }
        Ok(Violation {
            category: r.category,
            segment_indices: r.segment_indices,
            description: r.description,
            severity: r.severity,
        })
    }
}

/// Serializes a violation list as a pretty JSON array.
pub fn report_document(violations: &[Violation]) -> String {
    serde_json::to_string_pretty(violations).expect("violations serialize")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bound {
    pub min_minutes: u16,
    pub max_minutes: u16,
}

/// Plausible duration range for each activity type.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DurationBounds {
    bounds: [Bound; ActivityType::COUNT],
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConfigError {
    #[error("invalid duration bound for {activity}: need 0 < min <= max <= 1440, got [{min}, {max}]")]
    InvalidBound {
        activity: ActivityType,
        min: u16,
        max: u16,
    },
    #[error("malformed configuration: {0}")]
    Malformed(String),
}

impl Default for DurationBounds {
    fn default() -> Self {
        use ActivityType::*;
        let table = [
            (Home, 15, 1440),
            (Work, 30, 960),
            (Education, 30, 720),
            (Shopping, 5, 240),
            (Service, 5, 240),
            (Medical, 10, 480),
            (DineOut, 10, 240),
            (Socialize, 10, 480),
            (Exercise, 10, 300),
            (DropoffPickup, 5, 60),
        ];
        let mut bounds = [Bound { min_minutes: 1, max_minutes: DAY_MINUTES }; ActivityType::COUNT];
        for (a, min, max) in table {
            bounds[a.index()] = Bound { min_minutes: min, max_minutes: max };
        }
        Self { bounds }
    }
}

impl DurationBounds {
    pub fn get(&self, activity: ActivityType) -> Bound {
        self.bounds[activity.index()]
    }

    pub fn set(&mut self, activity: ActivityType, min: u16, max: u16) -> Result<(), ConfigError> {
        if min == 0 || min > max || max > DAY_MINUTES {
            return Err(ConfigError::InvalidBound { activity, min, max });
        }
        self.bounds[activity.index()] = Bound { min_minutes: min, max_minutes: max };
        Ok(())
    }

    pub fn contains(&self, activity: ActivityType, minutes: u16) -> bool {
        let b = self.get(activity);
        (b.min_minutes..=b.max_minutes).contains(&minutes)
    }

    /// Loads overrides from a JSON object `{"work": [30, 960], ...}`;
    /// activities not listed keep their defaults.
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let raw: std::collections::BTreeMap<ActivityType, (u16, u16)> =
            serde_json::from_str(text).map_err(|e| ConfigError::Malformed(e.to_string()))?;
        let mut bounds = Self::default();
        for (activity, (min, max)) in raw {
            bounds.set(activity, min, max)?;
        }
        Ok(bounds)
    }

    pub fn to_json(&self) -> String {
        let map: std::collections::BTreeMap<String, (u16, u16)> = ActivityType::ALL
            .iter()
            .map(|a| {
                let b = self.get(*a);
                (a.label().to_string(), (b.min_minutes, b.max_minutes))
            })
            .collect();
        serde_json::to_string_pretty(&map).expect("bounds serialize")
    }
}

/// How a rule's patterns are compared with profile text (case-insensitive).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchMode {
    Contains,
    Equals,
}

/// Declarative profile-conditioned rule: when the profile matches (or, with
/// `negate`, does not match), every `activity` segment lasting at least
/// `min_minutes` is flagged.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CommonsenseRule {
    pub name: String,
    pub fields: Vec<String>,
    pub patterns: Vec<String>,
    #[serde(default = "default_match_mode")]
    pub match_mode: MatchMode,
    #[serde(default)]
    pub negate: bool,
    pub activity: ActivityType,
    pub min_minutes: u16,
    #[serde(default = "default_severity")]
    pub severity: Severity,
}

fn default_match_mode() -> MatchMode {
    MatchMode::Contains
}

fn default_severity() -> Severity {
    Severity::Warning
}

impl CommonsenseRule {
    fn profile_matches(&self, profile: &UserProfile) -> bool {
        let hit = self.fields.iter().filter_map(|f| profile.field(f)).any(|value| {
            let value = value.to_lowercase();
            self.patterns.iter().any(|p| {
                let p = p.to_lowercase();
                match self.match_mode {
                    MatchMode::Contains => value.contains(&p),
                    MatchMode::Equals => value.trim() == p,
                }
            })
        });
        hit != self.negate
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CommonsenseRules(pub Vec<CommonsenseRule>);

impl Default for CommonsenseRules {
    fn default() -> Self {
        let text = |xs: &[&str]| xs.iter().map(|s| s.to_string()).collect::<Vec<_>>();
        CommonsenseRules(vec![
            CommonsenseRule {
                name: "not-working profile with prolonged work".into(),
                fields: text(&["primary_activity", "employment_status"]),
                patterns: text(&["retired", "unemployed", "not employed", "looking for work"]),
                match_mode: MatchMode::Contains,
                negate: false,
                activity: ActivityType::Work,
                min_minutes: 120,
                severity: Severity::Warning,
            },
            CommonsenseRule {
                name: "works from home".into(),
                fields: text(&["work_from_home"]),
                patterns: text(&["yes", "true", "1", "y"]),
                match_mode: MatchMode::Equals,
                negate: false,
                activity: ActivityType::Work,
                min_minutes: 1,
                severity: Severity::Note,
            },
            CommonsenseRule {
                name: "prolonged education without student indication".into(),
                fields: text(&["primary_activity", "employment_status", "occupation"]),
                patterns: text(&["student", "school"]),
                match_mode: MatchMode::Contains,
                negate: true,
                activity: ActivityType::Education,
                min_minutes: 120,
                severity: Severity::Warning,
            },
        ])
    }
}

impl CommonsenseRules {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let rules: Self = serde_json::from_str(text).map_err(|e| ConfigError::Malformed(e.to_string()))?;
        for rule in &rules.0 {
            if rule.fields.iter().any(|f| UserProfile::default().field(f).is_none()) {
                return Err(ConfigError::Malformed(format!(
                    "rule {:?} names an unknown profile field",
                    rule.name
                )));
            }
        }
        Ok(rules)
    }
}

/// Tunables for the soft checks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuditConfig {
    pub bounds: DurationBounds,
    pub rules: CommonsenseRules,
    /// Maximum number of segments before the day counts as fragmented.
    pub max_episodes: usize,
    /// An A-B-A detour with B shorter than this is flagged.
    pub min_detour_minutes: u16,
}

impl Default for AuditConfig {
    fn default() -> Self {
        Self {
            bounds: DurationBounds::default(),
            rules: CommonsenseRules::default(),
            max_episodes: 12,
            min_detour_minutes: 15,
        }
    }
}

impl AuditConfig {
    pub fn with_bounds(bounds: DurationBounds) -> Self {
        Self {
            bounds,
            ..Self::default()
        }
    }
}

fn span(start: TimeOfDay, end: TimeOfDay) -> String {
    format!("{start}-{end}")
}

/// Overlaps, gaps and day-boundary errors. Expects segments sorted by start.
pub fn check_physical(schedule: &DaySchedule) -> Vec<Violation> {
    use ConstraintCategory::Physical;
    let segs = &schedule.segments;
    let mut out = Vec::new();
    let Some(first) = segs.first() else {
        return vec![Violation::new(Physical, vec![], "schedule has no segments".into())];
    };
    if first.start() != TimeOfDay::MIDNIGHT {
        out.push(Violation::new(
            Physical,
            vec![0],
            format!("day starts at {} instead of 00:00", first.start()),
        ));
    }
    // index of the segment reaching furthest so far
    let mut reach = 0usize;
    for j in 1..segs.len() {
        for i in 0..j {
            if segs[j].start() < segs[i].end() && segs[i].start() < segs[j].end() {
                out.push(Violation::new(
                    Physical,
                    vec![i, j],
                    format!(
                        "overlap: {} {} and {} {}",
                        segs[i].activity,
                        span(segs[i].start(), segs[i].end()),
                        segs[j].activity,
                        span(segs[j].start(), segs[j].end())
                    ),
                ));
            }
        }
        if segs[j].start() > segs[reach].end() {
            out.push(Violation::new(
                Physical,
                vec![reach, j],
                format!("gap: {} uncovered", span(segs[reach].end(), segs[j].start())),
            ));
        }
        if segs[j].end() >= segs[reach].end() {
            reach = j;
        }
    }
    if segs[reach].end() != TimeOfDay::END_OF_DAY {
        out.push(Violation::new(
            Physical,
            vec![reach],
            format!("day ends at {} instead of 24:00", segs[reach].end()),
        ));
    }
    out
}

/// Home boundaries and merge-required repeats.
pub fn check_logical(schedule: &DaySchedule) -> Vec<Violation> {
    use ConstraintCategory::Logical;
    let segs = &schedule.segments;
    let mut out = Vec::new();
    let (Some(first), Some(last)) = (segs.first(), segs.last()) else {
        return out;
    };
    if first.activity != ActivityType::Home {
        out.push(Violation::new(
            Logical,
            vec![0],
            format!("day starts with {} instead of home", first.activity),
        ));
    }
    if last.activity != ActivityType::Home {
        out.push(Violation::new(
            Logical,
            vec![segs.len() - 1],
            format!("day ends with {} instead of home", last.activity),
        ));
    }
    for (i, w) in segs.windows(2).enumerate() {
        if w[0].activity == w[1].activity && w[0].end() == w[1].start() {
            out.push(Violation::new(
                Logical,
                vec![i, i + 1],
                format!(
                    "consecutive identical {} segments must be merged",
                    w[0].activity
                ),
            ));
        }
    }
    out
}

/// Profile-consistency findings from the rule table.
pub fn check_commonsense(
    profile: &UserProfile,
    schedule: &DaySchedule,
    rules: &CommonsenseRules,
) -> Vec<Violation> {
    let mut out = Vec::new();
    for rule in &rules.0 {
        if !rule.profile_matches(profile) {
            continue;
        }
        for (i, seg) in schedule.segments.iter().enumerate() {
            if seg.activity == rule.activity && seg.duration_minutes() >= rule.min_minutes {
                let mut v = Violation::new(
                    ConstraintCategory::Commonsense,
                    vec![i],
                    format!(
                        "{}: {} {} ({} min)",
                        rule.name,
                        seg.activity,
                        span(seg.start(), seg.end()),
                        seg.duration_minutes()
                    ),
                );
                v.severity = rule.severity;
                out.push(v);
            }
        }
    }
    out
}

/// Segments whose duration lies outside the configured range (inclusive).
pub fn check_temporal(schedule: &DaySchedule, bounds: &DurationBounds) -> Vec<Violation> {
    schedule
        .segments
        .iter()
        .enumerate()
        .filter(|(_, seg)| !bounds.contains(seg.activity, seg.duration_minutes()))
        .map(|(i, seg)| {
            let b = bounds.get(seg.activity);
            Violation::new(
                ConstraintCategory::Temporal,
                vec![i],
                format!(
                    "{} lasts {} min, outside [{}, {}]",
                    seg.activity,
                    seg.duration_minutes(),
                    b.min_minutes,
                    b.max_minutes
                ),
            )
        })
        .collect()
}

/// Over-fragmentation: too many segments, or short A-B-A detours.
pub fn check_coherence(schedule: &DaySchedule, max_episodes: usize, min_detour_minutes: u16) -> Vec<Violation> {
    use ConstraintCategory::Coherence;
    let segs = &schedule.segments;
    let mut out = Vec::new();
    if segs.len() > max_episodes {
        out.push(Violation::new(
            Coherence,
            vec![],
            format!("{} segments exceed the cap of {max_episodes}", segs.len()),
        ));
    }
    for (i, w) in segs.windows(3).enumerate() {
        if w[0].activity == w[2].activity
            && w[0].activity != w[1].activity
            && w[1].duration_minutes() < min_detour_minutes
        {
            out.push(Violation::new(
                Coherence,
                vec![i, i + 1, i + 2],
                format!(
                    "fragmented: {} interrupted by {} min of {}",
                    w[0].activity,
                    w[1].duration_minutes(),
                    w[1].activity
                ),
            ));
        }
    }
    out
}

/// Runs all five checks on the normalized schedule, hard findings first.
/// Indices in the result refer to `normalize(schedule)`.
pub fn audit(
    profile: &UserProfile,
    schedule: &DaySchedule,
    config: &AuditConfig,
) -> Result<Vec<Violation>, ScheduleError> {
    let normalized = normalize(schedule)?;
    let mut out = check_physical(&normalized);
    out.extend(check_logical(&normalized));
    out.extend(check_commonsense(profile, &normalized, &config.rules));
    out.extend(check_temporal(&normalized, &config.bounds));
    out.extend(check_coherence(&normalized, config.max_episodes, config.min_detour_minutes));
    Ok(out)
}

pub fn has_hard_violations(violations: &[Violation]) -> bool {
    violations.iter().any(Violation::is_hard)
}

/// True iff the normalized schedule passes the Physical and Logical checks.
pub fn is_hard_valid(schedule: &DaySchedule) -> bool {
    match normalize(schedule) {
        Ok(n) => check_physical(&n).is_empty() && check_logical(&n).is_empty(),
        Err(_) => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::schedule::ActivityType::*;

    fn sched(items: &[(ActivityType, u16, u16)]) -> DaySchedule {
        DaySchedule::from_minutes(items).unwrap()
    }

    fn retired() -> UserProfile {
        UserProfile {
            primary_activity: "Retired".into(),
            employment_status: "Not employed".into(),
            ..UserProfile::default()
        }
    }

    #[test]
    fn hardness_pairing() {
        assert!(ConstraintCategory::Physical.is_hard());
        assert!(ConstraintCategory::Logical.is_hard());
        assert!(!ConstraintCategory::Commonsense.is_hard());
        assert!(!ConstraintCategory::Temporal.is_hard());
        assert!(!ConstraintCategory::Coherence.is_hard());
    }

    #[test]
    fn physical_case_study_overlap() {
        let v = check_physical(&fixtures::case_study_draft());
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].segment_indices, vec![2, 3]);
        assert!(v[0].description.contains("home 16:45-18:00"));
        assert!(v[0].description.contains("work 17:45-19:00"));
    }

    #[test]
    fn physical_gap_and_boundaries() {
        let v = check_physical(&sched(&[(Home, 0, 420), (Work, 480, 1440)]));
        assert_eq!(v.len(), 1);
        assert!(v[0].description.starts_with("gap: 07:00-08:00"));
        assert!(check_physical(&DaySchedule::all_home()).is_empty());
        let v = check_physical(&sched(&[(Home, 30, 1380)]));
        assert_eq!(v.len(), 2);
    }

    #[test]
    fn physical_contained_segment() {
        let v = check_physical(&sched(&[(Home, 0, 1440), (Work, 600, 700)]));
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].segment_indices, vec![0, 1]);
    }

    #[test]
    fn logical_examples() {
        assert!(check_logical(&fixtures::case_study_draft()).is_empty());
        assert_eq!(check_logical(&DaySchedule::single(Work)).len(), 2);
        let v = check_logical(&sched(&[(Home, 0, 400), (Home, 400, 1440)]));
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].segment_indices, vec![0, 1]);
    }

    #[test]
    fn commonsense_examples() {
        let rules = CommonsenseRules::default();
        let day = sched(&[(Home, 0, 480), (Work, 480, 1020), (Home, 1020, 1440)]);
        let v = check_commonsense(&retired(), &day, &rules);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].severity, Severity::Warning);
        assert!(check_commonsense(&retired(), &DaySchedule::all_home(), &rules).is_empty());
        let worker = fixtures::case_study_profile();
        assert!(check_commonsense(&worker, &fixtures::case_study_draft(), &rules)
            .iter()
            .all(|v| v.severity == Severity::Note));
    }

    #[test]
    fn commonsense_notes_and_students() {
        let rules = CommonsenseRules::default();
        let day = sched(&[(Home, 0, 480), (Work, 480, 1020), (Home, 1020, 1440)]);
        let wfh = UserProfile { work_from_home: "Yes".into(), ..UserProfile::default() };
        let v = check_commonsense(&wfh, &day, &rules);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].severity, Severity::Note);

        let school = sched(&[(Home, 0, 480), (Education, 480, 900), (Home, 900, 1440)]);
        assert_eq!(check_commonsense(&UserProfile::default(), &school, &rules).len(), 1);
        let student = UserProfile { primary_activity: "Going to school".into(), ..UserProfile::default() };
        assert!(check_commonsense(&student, &school, &rules).is_empty());
        // "employed" alone is not "unemployed"
        let worker = UserProfile { employment_status: "Employed full-time".into(), ..UserProfile::default() };
        assert!(check_commonsense(&worker, &day, &rules).is_empty());
    }

    #[test]
    fn temporal_examples() {
        let b = DurationBounds::default();
        let v = check_temporal(&sched(&[(DropoffPickup, 480, 1200)]), &b);
        assert_eq!(v.len(), 1);
        assert!(check_temporal(&sched(&[(Work, 465, 990)]), &b).is_empty());
        let at_min: Vec<(ActivityType, u16, u16)> = ActivityType::ALL
            .iter()
            .scan(0u16, |t, a| {
                let m = b.get(*a).min_minutes;
                let seg = (*a, *t, *t + m);
                *t += m;
                Some(seg)
            })
            .collect();
        assert!(check_temporal(&sched(&at_min), &b).is_empty());
    }

    #[test]
    fn coherence_examples() {
        let mut items = Vec::new();
        for k in 0..6u16 {
            let a = if k % 2 == 0 { Home } else { Shopping };
            items.push((a, 600 + 10 * k, 610 + 10 * k));
        }
        let v = check_coherence(&sched(&items), 12, 15);
        assert!(!v.is_empty());
        let day = sched(&[(Home, 0, 450), (Work, 450, 1020), (Home, 1020, 1440)]);
        assert!(check_coherence(&day, 12, 15).is_empty());

        let twelve: Vec<(ActivityType, u16, u16)> = (0..12u16)
            .map(|k| (if k % 2 == 0 { Home } else { Work }, k * 120, (k + 1) * 120))
            .collect();
        assert!(check_coherence(&sched(&twelve), 12, 15).is_empty());
        let mut thirteen = twelve.clone();
        thirteen.last_mut().unwrap().2 = 1380;
        thirteen.push((Home, 1380, 1440));
        assert_eq!(check_coherence(&sched(&thirteen), 12, 15).len(), 1);
    }

    #[test]
    fn audit_case_study() {
        let cfg = AuditConfig::default();
        let v = audit(&fixtures::case_study_profile(), &fixtures::case_study_draft(), &cfg).unwrap();
        let hard: Vec<_> = v.iter().filter(|v| v.is_hard()).collect();
        assert_eq!(hard.len(), 1);
        assert_eq!(hard[0].category, ConstraintCategory::Physical);
        assert!(v.iter().all(|v| v.category != ConstraintCategory::Logical));
    }

    #[test]
    fn audit_hard_first_and_errors() {
        let cfg = AuditConfig::default();
        let day = sched(&[(DropoffPickup, 0, 700), (Home, 800, 1440)]);
        let v = audit(&retired(), &day, &cfg).unwrap();
        let first_soft = v.iter().position(|v| !v.is_hard()).unwrap();
        assert!(v[first_soft..].iter().all(|v| !v.is_hard()));
        assert!(audit(&retired(), &DaySchedule::default(), &cfg).is_err());

        let example = sched(&[(Home, 0, 450), (Work, 450, 1020), (Home, 1020, 1440)]);
        let worker = UserProfile { employment_status: "Employed full-time".into(), ..UserProfile::default() };
        assert!(!has_hard_violations(&audit(&worker, &example, &cfg).unwrap()));
    }

    #[test]
    fn hard_validity() {
        assert!(is_hard_valid(&fixtures::case_study_edited()));
        assert!(!is_hard_valid(&fixtures::case_study_draft()));
        assert!(is_hard_valid(&DaySchedule::all_home()));
        // touching identicals are merged before checking
        assert!(is_hard_valid(&sched(&[(Home, 0, 400), (Home, 400, 1440)])));
        assert!(!is_hard_valid(&DaySchedule::default()));
    }

    #[test]
    fn bounds_config() {
        let b = DurationBounds::from_json(r#"{"work": [60, 600]}"#).unwrap();
        assert_eq!(b.get(Work), Bound { min_minutes: 60, max_minutes: 600 });
        assert_eq!(b.get(Home), DurationBounds::default().get(Home));
        assert!(DurationBounds::from_json(r#"{"work": [0, 600]}"#).is_err());
        assert!(DurationBounds::from_json(r#"{"work": [700, 600]}"#).is_err());
        assert!(DurationBounds::from_json(r#"{"sleep": [1, 2]}"#).is_err());
        let round = DurationBounds::from_json(&DurationBounds::default().to_json()).unwrap();
        assert_eq!(round, DurationBounds::default());
    }

    #[test]
    fn rules_config_round_trip() {
        let text = serde_json::to_string(&CommonsenseRules::default()).unwrap();
        assert_eq!(CommonsenseRules::from_json(&text).unwrap(), CommonsenseRules::default());
        let bad = r#"[{"name": "x", "fields": ["nope"], "patterns": ["a"], "activity": "work", "min_minutes": 1}]"#;
        assert!(CommonsenseRules::from_json(bad).is_err());
    }

    #[test]
    fn violation_serialization() {
        let v = check_physical(&fixtures::case_study_draft());
        let json = serde_json::to_value(&v).unwrap();
        assert_eq!(json[0]["category"], "Physical");
        assert_eq!(json[0]["hardness"], "Hard");
        assert_eq!(json[0]["segment_indices"], serde_json::json!([2, 3]));
        let back: Vec<Violation> = serde_json::from_value(json).unwrap();
        assert_eq!(back, v);
    }
}
