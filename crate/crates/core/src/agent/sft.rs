//! Supervised training records from teacher traces, with a deterministic
//! diff-based label when the teacher misses the ground truth.

use serde::{Deserialize, Serialize};

use crate::constraints::{audit, has_hard_violations, AuditConfig, ConstraintCategory, Violation};
use crate::editor::{apply_op, diff, EditOp};
use crate::profile::UserProfile;
use crate::schedule::{discretize, DaySchedule};

use super::chat::{chat_complete, ChatEndpoint, ChatTransport};
use super::parse::{parse_tagged_output, render_tagged};
use super::prompts::{render_student_prompt, render_teacher_prompt};
use super::AgentError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: String,
    pub content: String,
}

impl ChatMessage {
    fn new(role: &str, content: String) -> Self {
        Self { role: role.to_string(), content }
    }
}

/// One training line: `{"messages": [system, user, assistant]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SftRecord {
    pub messages: Vec<ChatMessage>,
}

impl SftRecord {
    pub fn assistant(&self) -> Option<&str> {
        self.messages
            .iter()
            .find(|m| m.role == "assistant")
            .map(|m| m.content.as_str())
    }

    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("record serializes")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LabelSource {
    Teacher,
    Rebuilt,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SftExample {
    pub record: SftRecord,
    pub source: LabelSource,
    pub teacher_raw: Option<String>,
}

fn same_slots(a: &DaySchedule, b: &DaySchedule) -> bool {
    matches!((discretize(a), discretize(b)), (Ok(x), Ok(y)) if x == y)
}

const CHECK_LINES: [(ConstraintCategory, &str); 5] = [
    (ConstraintCategory::Physical, "1. Physical (Hard): overlaps? 24h coverage? ends at 24:00?"),
    (ConstraintCategory::Logical, "2. Logical (Hard): starts/ends home? starts at 00:00?"),
    (ConstraintCategory::Commonsense, "3. Common Sense (Soft): activities match profile?"),
    (ConstraintCategory::Temporal, "4. Temporal (Soft): realistic durations?"),
    (ConstraintCategory::Coherence, "5. Coherence (Soft): logical flow? not fragmented?"),
];

fn edit_line(current: &DaySchedule, op: &EditOp, rationale: &str) -> String {
    let name = |i: usize| {
        current
            .segments
            .get(i)
            .map(|s| s.activity.to_string())
            .unwrap_or_default()
    };
    let body = match *op {
        EditOp::Add { index, segment } => format!(
            "ADD: '{}' at time {} until {} at idx {index}",
            segment.activity,
            segment.start(),
            segment.end()
        ),
        EditOp::Delete { index } => format!("DELETE: '{}' at idx {index}", name(index)),
        EditOp::Shift { index, new_start, new_end } => {
            format!("SHIFT: '{}' at idx {index} to {new_start}-{new_end}", name(index))
        }
        EditOp::Replace { index, new_activity } => {
            format!("REPLACE: '{}' -> '{new_activity}' at idx {index}", name(index))
        }
        EditOp::Split { index, split_time, second_activity } => format!(
            "SPLIT: '{}' at idx {index} at {split_time}, then '{second_activity}'",
            name(index)
        ),
    };
    format!("- {body} ({rationale})")
}

/// Deterministic thought in the teacher's layout: per-category checks on the
/// draft, the diff script to the ground truth, and the final verdict.
/// A check answers `Yes` when the category is clean.
pub fn rebuild_thought(
    profile: &UserProfile,
    draft: &DaySchedule,
    ground_truth: &DaySchedule,
    config: &AuditConfig,
) -> String {
    let findings: Vec<Violation> = match audit(profile, draft, config) {
        Ok(v) => v,
        Err(e) => vec![Violation {
            category: ConstraintCategory::Physical,
            segment_indices: Vec::new(),
            description: e.to_string(),
            severity: crate::constraints::Severity::Error,
        }],
    };
    let mut out = String::from("Constraint Checking:\n");
    for (category, question) in CHECK_LINES {
        let hits: Vec<&Violation> = findings.iter().filter(|v| v.category == category).collect();
        let verdict = if hits.is_empty() { "Yes" } else { "No" };
        out.push_str(&format!("{question} -> {verdict}\n"));
        for v in hits {
            out.push_str(&format!("   - {}\n", v.description));
        }
    }

    out.push_str("\nEdits to Match Ground Truth:\n");
    let script = diff(draft, ground_truth);
    if script.is_empty() {
        out.push_str("No edits needed\n");
    } else {
        let mut current = draft.clone();
        for step in &script.steps {
            out.push_str(&edit_line(&current, &step.op, &step.rationale));
            out.push('\n');
            current = apply_op(&current, &step.op).expect("diff scripts replay");
        }
    }

    let satisfied = audit(profile, ground_truth, config)
        .map(|v| !has_hard_violations(&v))
        .unwrap_or(false);
    out.push_str(&format!(
        "\nFinal Result:\nAll constraints satisfied after edits? {}",
        if satisfied { "Yes" } else { "No" }
    ));
    out
}

/// Asks the teacher for a trace and keeps it if its schedule matches the
/// ground truth slot for slot; otherwise the label is rebuilt from the diff.
/// With `fallback_on_endpoint_error`, an unreachable teacher also yields a
/// rebuilt label instead of an error.
pub fn synthesize_sft_example(
    transport: &dyn ChatTransport,
    endpoint: &ChatEndpoint,
    profile: &UserProfile,
    draft: &DaySchedule,
    ground_truth: &DaySchedule,
    config: &AuditConfig,
    fallback_on_endpoint_error: bool,
) -> Result<SftExample, AgentError> {
    let teacher = render_teacher_prompt(profile, draft, ground_truth)?;
    let student = render_student_prompt(profile, draft)?;

    let teacher_raw = match chat_complete(transport, endpoint, &teacher.system, &teacher.user) {
        Ok(raw) => Some(raw),
        Err(e) if fallback_on_endpoint_error => {
            tracing::warn!(error = %e, "teacher unreachable, rebuilding label");
            None
        }
        Err(e) => return Err(e.into()),
    };

    let accepted = teacher_raw.as_deref().and_then(|raw| {
        let tagged = parse_tagged_output(raw);
        match (tagged.thought, tagged.schedule) {
            (Some(thought), Some(s)) if !thought.is_empty() && same_slots(&s, ground_truth) => {
                Some(render_tagged(&thought, &s))
            }
            _ => None,
        }
    });
    let (assistant, source) = match accepted {
        Some(text) => (text, LabelSource::Teacher),
        None => (
            render_tagged(&rebuild_thought(profile, draft, ground_truth, config), ground_truth),
            LabelSource::Rebuilt,
        ),
    };
    Ok(SftExample {
        record: SftRecord {
            messages: vec![
                ChatMessage::new("system", student.system),
                ChatMessage::new("user", student.user),
                ChatMessage::new("assistant", assistant),
            ],
        },
        source,
        teacher_raw,
    })
}
