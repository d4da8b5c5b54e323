//! Two-agent generate-then-edit orchestration against a chat-completion
//! endpoint, plus supervised-training data synthesis.

pub mod chat;
pub mod parse;
pub mod pipeline;
pub mod prompts;
pub mod sft;

use thiserror::Error;

pub use chat::{chat_complete, ChatEndpoint, ChatRequest, ChatTransport, EndpointError, HttpTransport, RetryPolicy, RuleTransport, ScriptedTransport, TransportError};
pub use parse::{parse_draft, parse_tagged_output, Draft, TaggedOutput};
pub use pipeline::{generate_population, generate_trajectory, GenerationOptions, RoundRecord, Stage, Trajectory};
pub use prompts::{render_editor_prompt, render_intention_prompt, render_rollout_prompt, render_student_prompt, render_teacher_prompt, Prompt};
pub use sft::{synthesize_sft_example, ChatMessage, LabelSource, SftExample, SftRecord};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AgentError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Endpoint(#[from] EndpointError),
}
