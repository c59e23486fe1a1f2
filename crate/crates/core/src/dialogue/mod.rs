//! Question → query → result → explanation sessions with user amendments.

mod explain;
mod session;
mod store;

pub use explain::{
    classify_flag, explain_deterministic, explain_with_model, parse_model_explanation, Explanation,
    ExplanationSource, Flag,
};
pub use session::{
    run_query, Context, Execution, ExplainMode, ParseResult, Session, SessionTurn, Stage,
    StageFailure, TurnKind, DEFAULT_AMENDMENT_BUDGET, ROW_CAP,
};
pub use store::{SessionHeader, SessionStore};

use crate::llm::LlmError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DialogueError {
    #[error("amendment budget of {budget} exhausted for this question")]
    BudgetExhausted { budget: u32 },
    #[error("no previous query to amend")]
    NothingToAmend,
    #[error("unknown session `{0}`")]
    UnknownSession(String),
    #[error(transparent)]
    Llm(#[from] LlmError),
    #[error("session store: {0}")]
    Store(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
