//! Daily activity schedules for synthetic mobility: a 96-slot schedule model,
//! a five-category constraint audit, edit operations with diff and repair,
//! rule-based roll-out rewards, population metrics, and an LLM
//! generate-then-edit pipeline.

pub mod agent;
pub mod constraints;
pub mod editor;
pub mod fixtures;
pub mod io;
pub mod metrics;
pub mod profile;
pub mod reward;
pub mod schedule;
pub mod stats;

pub use constraints::{audit, is_hard_valid, AuditConfig, DurationBounds, Violation};
pub use editor::{apply_script, diff, repair, EditOp, EditScript};
pub use metrics::{evaluate, MetricReport, Population};
pub use profile::UserProfile;
pub use reward::{group_advantages, total_reward, RewardBreakdown};
pub use schedule::{discretize, normalize, ActivitySegment, ActivityType, DaySchedule, SlotSequence, TimeOfDay};
