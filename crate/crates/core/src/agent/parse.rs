//! Extraction of tagged blocks and schedules from free-form model output.

use serde_json::Value;

use crate::schedule::DaySchedule;

pub const THOUGHT_OPEN: &str = "[THOUGHT]";
pub const THOUGHT_CLOSE: &str = "[/THOUGHT]";
pub const JSON_OPEN: &str = "[JSON]";
pub const JSON_CLOSE: &str = "[/JSON]";

/// Structured view of an editor-style response.
#[derive(Debug, Clone, PartialEq)]
pub struct TaggedOutput {
    /// Body of the first well-formed `[THOUGHT]...[/THOUGHT]` block.
    pub thought: Option<String>,
    /// Body of the first well-formed `[JSON]...[/JSON]` block.
    pub json_block: Option<String>,
    /// Schedule parsed from `json_block`; `None` if absent or unparseable.
    pub schedule: Option<DaySchedule>,
    pub raw: String,
}

/// Body between the first `open` and the next `close` after it.
fn block<'a>(raw: &'a str, open: &str, close: &str) -> Option<&'a str> {
    let start = raw.find(open)? + open.len();
    let len = raw[start..].find(close)?;
    Some(&raw[start..start + len])
}

/// Total: absence of blocks is encoded in the optional fields.
pub fn parse_tagged_output(raw: &str) -> TaggedOutput {
    let thought = block(raw, THOUGHT_OPEN, THOUGHT_CLOSE).map(|s| s.trim().to_string());
    let json_block = block(raw, JSON_OPEN, JSON_CLOSE).map(|s| s.trim().to_string());
    let schedule = json_block.as_deref().and_then(parse_schedule_text);
    TaggedOutput {
        thought,
        json_block,
        schedule,
        raw: raw.to_string(),
    }
}

/// Renders the canonical tagged form `[THOUGHT]...[/THOUGHT]\n\n[JSON]...[/JSON]`.
pub fn render_tagged(thought: &str, schedule: &DaySchedule) -> String {
    format!(
        "{THOUGHT_OPEN}\n{}\n{THOUGHT_CLOSE}\n\n{JSON_OPEN}\n{}\n{JSON_CLOSE}",
        thought.trim_end(),
        schedule.to_document()
    )
}

fn strip_fences(text: &str) -> &str {
    let t = text.trim();
    let Some(rest) = t.strip_prefix("```") else {
        return t;
    };
    let body = rest.split_once('\n').map(|(_, b)| b).unwrap_or("");
    body.trim_end().strip_suffix("```").unwrap_or(body).trim()
}

/// Candidate JSON snippets, most specific first.
fn json_candidates(text: &str) -> Vec<&str> {
    let mut out = vec![strip_fences(text)];
    if let Some(b) = block(text, JSON_OPEN, JSON_CLOSE) {
        out.push(strip_fences(b));
    }
    if let Some(b) = block(text, "```json", "```").or_else(|| block(text, "```", "```")) {
        out.push(b.trim());
    }
    for (open, close) in [('{', '}'), ('[', ']')] {
        if let (Some(s), Some(e)) = (text.find(open), text.rfind(close)) {
            if s < e {
                out.push(&text[s..=e]);
            }
        }
    }
    out
}

fn schedule_from_value(value: &Value) -> Option<DaySchedule> {
    let array = match value {
        Value::Array(_) => value,
        Value::Object(map) => map.get("schedule")?,
        _ => return None,
    };
    let schedule: DaySchedule = serde_json::from_value(array.clone()).ok()?;
    (!schedule.is_empty()).then_some(schedule)
}

/// Parses a schedule from a bare array, a `{"schedule": [...]}` object, or
/// either of those wrapped in code fences or prose.
pub fn parse_schedule_text(text: &str) -> Option<DaySchedule> {
    json_candidates(text)
        .into_iter()
        .filter_map(|c| serde_json::from_str::<Value>(c).ok())
        .find_map(|v| schedule_from_value(&v))
}

/// Intention-stage output: free-text reasoning plus a draft schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct Draft {
    pub reasoning: String,
    pub schedule: DaySchedule,
}

/// Accepts `{"reasoning": ..., "schedule": [...]}` or a bare schedule array.
pub fn parse_draft(raw: &str) -> Option<Draft> {
    for candidate in json_candidates(raw) {
        let Ok(value) = serde_json::from_str::<Value>(candidate) else {
            continue;
        };
        if let Some(schedule) = schedule_from_value(&value) {
            let reasoning = value
                .get("reasoning")
                .and_then(Value::as_str)
                .unwrap_or_default()
                .to_string();
            return Some(Draft { reasoning, schedule });
        }
    }
    None
}
