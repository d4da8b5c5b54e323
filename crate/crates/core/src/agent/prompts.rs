//! Prompt templates for the intention, editor, teacher, student and roll-out
//! roles, and their deterministic rendering.

use crate::constraints::is_hard_valid;
use crate::profile::UserProfile;
use crate::schedule::DaySchedule;

use super::AgentError;

const INTENTION_SYSTEM: &str = include_str!("templates/intention_system.txt");
const INTENTION_USER: &str = include_str!("templates/intention_user.txt");
const EDITOR_SYSTEM: &str = include_str!("templates/editor_system.txt");
const EDITOR_USER: &str = include_str!("templates/editor_user.txt");
const TEACHER_SYSTEM: &str = include_str!("templates/teacher_system.txt");
const TEACHER_USER: &str = include_str!("templates/teacher_user.txt");
const STUDENT_SYSTEM: &str = include_str!("templates/student_system.txt");
const STUDENT_USER: &str = include_str!("templates/student_user.txt");
const ROLLOUT_SYSTEM: &str = include_str!("templates/rollout_system.txt");
const ROLLOUT_USER: &str = include_str!("templates/rollout_user.txt");

const PROFILE_SLOT: &str = "{user_profile as JSON}";
const DRAFT_SLOT: &str = "{initial_schedule as JSON}";
const TRUTH_SLOT: &str = "{ground_truth_schedule as JSON}";

/// Prefix of the critic feedback appended to editor re-prompts.
pub const VIOLATIONS_HEADER: &str = "VIOLATIONS DETECTED:";

/// System and user message of a two-message chat.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Prompt {
    pub system: String,
    pub user: String,
}

fn non_empty(schedule: &DaySchedule, what: &str) -> Result<(), AgentError> {
    if schedule.is_empty() {
        Err(AgentError::InvalidInput(format!("{what} schedule is empty")))
    } else {
        Ok(())
    }
}

pub fn render_intention_prompt(profile: &UserProfile) -> Prompt {
    let user = INTENTION_USER
        .replace("{age_range}", &profile.age_range)
        .replace("{gender}", &profile.gender)
        .replace("{race}", &profile.race)
        .replace("{education}", &profile.education)
        .replace("{employment_status}", &profile.employment_status)
        .replace("{work_schedule}", &profile.work_schedule)
        .replace("{occupation}", &profile.occupation)
        .replace("{primary_activity}", &profile.primary_activity)
        .replace("{work_from_home}", &profile.work_from_home)
        .replace("{driver_on_travel_day}", &profile.driver_on_travel_day)
        .replace("{distance_to_work_miles}", &profile.distance_text())
        .replace("{work_state}", &profile.work_state);
    Prompt {
        system: INTENTION_SYSTEM.to_string(),
        user,
    }
}

fn profile_and_draft(template: &str, profile: &UserProfile, draft: &DaySchedule) -> String {
    // the draft goes in last so profile text cannot smuggle in a slot marker
    template
        .replace(PROFILE_SLOT, &profile.to_document())
        .replace(DRAFT_SLOT, &draft.to_document())
}

pub fn render_editor_prompt(profile: &UserProfile, draft: &DaySchedule) -> Result<Prompt, AgentError> {
    non_empty(draft, "draft")?;
    Ok(Prompt {
        system: EDITOR_SYSTEM.to_string(),
        user: profile_and_draft(EDITOR_USER, profile, draft),
    })
}

/// Teacher prompt for trace synthesis; the ground truth must be hard-valid.
pub fn render_teacher_prompt(
    profile: &UserProfile,
    draft: &DaySchedule,
    ground_truth: &DaySchedule,
) -> Result<Prompt, AgentError> {
    non_empty(draft, "draft")?;
    if !is_hard_valid(ground_truth) {
        return Err(AgentError::InvalidInput(
            "ground truth schedule is not hard-valid".into(),
        ));
    }
    let user = TEACHER_USER
        .replace(PROFILE_SLOT, &profile.to_document())
        .replace(TRUTH_SLOT, &ground_truth.to_document())
        .replace(DRAFT_SLOT, &draft.to_document());
    Ok(Prompt {
        system: TEACHER_SYSTEM.to_string(),
        user,
    })
}

/// Prompt the fine-tuned editor is trained on (system + user of SFT records).
pub fn render_student_prompt(profile: &UserProfile, draft: &DaySchedule) -> Result<Prompt, AgentError> {
    non_empty(draft, "draft")?;
    Ok(Prompt {
        system: STUDENT_SYSTEM.to_string(),
        user: profile_and_draft(STUDENT_USER, profile, draft),
    })
}

/// Prompt used when sampling roll-out groups for reward scoring.
pub fn render_rollout_prompt(profile: &UserProfile) -> Prompt {
    Prompt {
        system: ROLLOUT_SYSTEM.to_string(),
        user: ROLLOUT_USER.replace(PROFILE_SLOT, &profile.to_document()),
    }
}

/// Appends serialized violations to an editor user message.
pub fn with_violation_feedback(user: &str, report_json: &str) -> String {
    format!("{user}\n\n{VIOLATIONS_HEADER}\n{report_json}")
}
