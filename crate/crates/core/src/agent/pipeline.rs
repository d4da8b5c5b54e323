//! Generate-then-edit loop: intention draft, bounded editor rounds with
//! critic feedback, and deterministic repair when the rounds run out.

use serde::{Deserialize, Serialize};

use crate::constraints::{audit, has_hard_violations, report_document, AuditConfig, Violation};
use crate::editor::{repair_with, RepairConfig};
use crate::profile::UserProfile;
use crate::schedule::DaySchedule;

use super::chat::{chat_complete, ChatEndpoint, ChatTransport};
use super::parse::{parse_draft, parse_tagged_output};
use super::prompts::{render_editor_prompt, render_intention_prompt, with_violation_feedback};
use super::AgentError;

#[derive(Debug, Clone)]
pub struct GenerationOptions {
    pub audit: AuditConfig,
    pub repair: RepairConfig,
    /// Attempts per stage; at least 1.
    pub max_rounds: usize,
    /// Sessions in flight at once in [`generate_population`].
    pub concurrency: usize,
}

impl Default for GenerationOptions {
    fn default() -> Self {
        Self {
            audit: AuditConfig::default(),
            repair: RepairConfig::default(),
            max_rounds: 3,
            concurrency: 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Intention,
    Editor,
    Repair,
}

/// One line of a session's provenance log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub stage: Stage,
    /// 1-based within the stage.
    pub round: usize,
    pub raw_output: String,
    pub violations: Vec<Violation>,
    pub fallback_used: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    /// Always hard-valid.
    pub schedule: DaySchedule,
    pub draft: DaySchedule,
    pub log: Vec<RoundRecord>,
    pub fallback_used: bool,
}

impl Trajectory {
    pub fn editor_rounds(&self) -> usize {
        self.log.iter().filter(|r| r.stage == Stage::Editor).count()
    }
}

fn record(stage: Stage, round: usize, raw_output: String) -> RoundRecord {
    RoundRecord {
        stage,
        round,
        raw_output,
        violations: Vec::new(),
        fallback_used: false,
        note: None,
    }
}

/// Runs one user's session. Only endpoint failures are errors; unusable
/// model output is absorbed by the fallback chain.
pub fn generate_trajectory(
    transport: &dyn ChatTransport,
    endpoint: &ChatEndpoint,
    profile: &UserProfile,
    options: &GenerationOptions,
) -> Result<Trajectory, AgentError> {
    if options.max_rounds == 0 {
        return Err(AgentError::InvalidInput("max_rounds must be at least 1".into()));
    }
    let mut log = Vec::new();

    let intention = render_intention_prompt(profile);
    let mut draft = None;
    for round in 1..=options.max_rounds {
        let raw = chat_complete(transport, endpoint, &intention.system, &intention.user)?;
        let parsed = parse_draft(&raw);
        let mut rec = record(Stage::Intention, round, raw);
        if parsed.is_none() {
            rec.note = Some("no schedule in intention output".into());
        }
        log.push(rec);
        if let Some(d) = parsed {
            draft = Some(d.schedule);
            break;
        }
    }
    let draft = draft.unwrap_or_else(|| {
        tracing::warn!("intention stage produced no draft, starting from an all-home day");
        if let Some(last) = log.last_mut() {
            last.fallback_used = true;
            last.note = Some("no parseable draft; using all-home default".into());
        }
        DaySchedule::all_home()
    });

    let base = render_editor_prompt(profile, &draft)?;
    let mut user = base.user.clone();
    let mut last_candidate: Option<DaySchedule> = None;
    for round in 1..=options.max_rounds {
        let raw = chat_complete(transport, endpoint, &base.system, &user)?;
        let tagged = parse_tagged_output(&raw);
        let mut rec = record(Stage::Editor, round, raw);
        let Some(candidate) = tagged.schedule else {
            rec.note = Some("no parseable [JSON] schedule".into());
            log.push(rec);
            continue;
        };
        let violations = match audit(profile, &candidate, &options.audit) {
            Ok(v) => v,
            Err(e) => {
                rec.note = Some(format!("schedule not auditable: {e}"));
                log.push(rec);
                continue;
            }
        };
        let hard = has_hard_violations(&violations);
        rec.violations = violations.clone();
        log.push(rec);
        if !hard {
            return Ok(Trajectory { schedule: candidate, draft, log, fallback_used: false });
        }
        let editor = render_editor_prompt(profile, &candidate)?;
        user = with_violation_feedback(&editor.user, &report_document(&violations));
        last_candidate = Some(candidate);
    }

    let source = last_candidate.unwrap_or_else(|| draft.clone());
    let schedule = repair_with(&source, &options.repair)
        .or_else(|_| repair_with(&DaySchedule::all_home(), &options.repair))
        .expect("all-home day repairs");
    let violations = audit(profile, &schedule, &options.audit).unwrap_or_default();
    log.push(RoundRecord {
        stage: Stage::Repair,
        round: 1,
        raw_output: schedule.to_document(),
        violations,
        fallback_used: true,
        note: Some(format!("editor rounds exhausted after {}", options.max_rounds)),
    });
    Ok(Trajectory { schedule, draft, log, fallback_used: true })
}

/// Runs independent sessions with at most `options.concurrency` in flight.
/// Results keep the order of `profiles`.
pub fn generate_population(
    transport: &dyn ChatTransport,
    endpoint: &ChatEndpoint,
    profiles: &[UserProfile],
    options: &GenerationOptions,
) -> Vec<Result<Trajectory, AgentError>> {
    use rayon::prelude::*;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.concurrency.max(1))
        .build()
        .expect("thread pool");
    pool.install(|| {
        profiles
            .par_iter()
            .map(|p| generate_trajectory(transport, endpoint, p, options))
            .collect()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agent::chat::{RetryPolicy, ScriptedTransport, TransportError};
    use crate::agent::parse::render_tagged;
    use crate::constraints::is_hard_valid;
    use crate::fixtures;

    fn endpoint() -> ChatEndpoint {
        ChatEndpoint { retry: RetryPolicy::immediate(2), ..ChatEndpoint::default() }
    }

    fn draft_reply(s: &DaySchedule) -> String {
        format!("{{\"reasoning\": \"typical weekday\", \"schedule\": {}}}", s.to_document())
    }

    #[test]
    fn case_study_one_round() {
        let t = ScriptedTransport::from_texts([
            draft_reply(&fixtures::case_study_draft()),
            render_tagged("Constraint Checking: fixed overlap", &fixtures::case_study_edited()),
        ]);
        let out = generate_trajectory(&t, &endpoint(), &fixtures::case_study_profile(), &GenerationOptions::default())
            .unwrap();
        assert_eq!(out.schedule, fixtures::case_study_edited());
        assert_eq!(out.draft, fixtures::case_study_draft());
        assert_eq!(out.editor_rounds(), 1);
        assert!(!out.fallback_used);
        let editor_req = &t.requests()[1];
        assert!(editor_req.user.contains(&fixtures::case_study_draft().to_document()));
    }

    #[test]
    fn garbage_forever_falls_back() {
        let t = ScriptedTransport::new(vec![]).then_always(Ok("I cannot help with that.".into()));
        let out = generate_trajectory(&t, &endpoint(), &fixtures::case_study_profile(), &GenerationOptions::default())
            .unwrap();
        assert!(out.fallback_used);
        assert!(is_hard_valid(&out.schedule));
        assert_eq!(out.schedule, DaySchedule::all_home());
        assert_eq!(out.log.len(), 3 + 3 + 1);
        assert_eq!(out.log.last().unwrap().stage, Stage::Repair);
    }

    #[test]
    fn violations_are_fed_back() {
        let flawed = fixtures::case_study_draft();
        let t = ScriptedTransport::from_texts([
            draft_reply(&flawed),
            render_tagged("kept it", &flawed),
            render_tagged("fixed", &fixtures::case_study_edited()),
        ]);
        let out = generate_trajectory(&t, &endpoint(), &fixtures::case_study_profile(), &GenerationOptions::default())
            .unwrap();
        assert_eq!(out.editor_rounds(), 2);
        assert!(!out.log[1].violations.is_empty());
        let second = &t.requests()[2].user;
        assert!(second.contains("\n\nVIOLATIONS DETECTED:\n["));
        assert!(second.contains("Physical"));
    }

    #[test]
    fn flawed_until_exhausted_is_repaired() {
        let flawed = fixtures::case_study_draft();
        let t = ScriptedTransport::from_texts([draft_reply(&flawed)])
            .then_always(Ok(render_tagged("same", &flawed)));
        let opts = GenerationOptions { max_rounds: 2, ..GenerationOptions::default() };
        let out = generate_trajectory(&t, &endpoint(), &fixtures::case_study_profile(), &opts).unwrap();
        assert!(out.fallback_used);
        assert!(is_hard_valid(&out.schedule));
        assert_eq!(out.editor_rounds(), 2);
    }

    #[test]
    fn endpoint_failure_is_typed() {
        let t = ScriptedTransport::new(vec![]).then_always(Err(TransportError::transient("503")));
        let err = generate_trajectory(&t, &endpoint(), &UserProfile::default(), &GenerationOptions::default())
            .unwrap_err();
        assert!(matches!(err, AgentError::Endpoint(e) if e.attempts == 2));
    }

    #[test]
    fn zero_rounds_rejected() {
        let t = ScriptedTransport::new(vec![]);
        let opts = GenerationOptions { max_rounds: 0, ..GenerationOptions::default() };
        assert!(generate_trajectory(&t, &endpoint(), &UserProfile::default(), &opts).is_err());
    }
}
