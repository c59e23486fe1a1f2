use super::explain::{explain_deterministic, explain_with_model, Explanation};
use super::DialogueError;
use crate::engine::{execute, PropertyGraph};
use crate::llm::{clean_query_output, render, ChatModel, LlmError, ModelRef, TemplateKind};
use crate::schema::GraphSchema;
use crate::syntax::{parse_query, print_query, ParseError, QueryAst};
use crate::validate::{validate, Diagnostic};
use serde::{Deserialize, Serialize};

/// Result rows kept per turn; `total_rows` still reports the full count.
pub const ROW_CAP: usize = 200;

pub const DEFAULT_AMENDMENT_BUDGET: u32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExplainMode {
    /// Ask the session model for an explanation.
    #[default]
    Model,
    Deterministic,
    Off,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum TurnKind {
    Ask { question: String },
    Amend { instruction: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum ParseResult {
    Parsed { canonical: String },
    SyntaxError { message: String, line: usize, column: usize },
    Unsupported { feature: String, line: usize, column: usize },
    NotAttempted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Execution {
    Table {
        columns: Vec<String>,
        rows: Vec<Vec<serde_json::Value>>,
        total_rows: usize,
        truncated: bool,
    },
    Error { message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Generate,
    Clean,
    Validate,
    Explain,
}

/// A stage that failed inside a turn.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageFailure {
    pub stage: Stage,
    /// True when the chat provider (or replay lookup) failed.
    pub provider: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub status: Option<u16>,
    pub message: String,
}

impl StageFailure {
    fn from_llm(stage: Stage, e: &LlmError) -> Self {
        let (provider, status) = match e {
            LlmError::Provider { status, .. } => (true, *status),
            LlmError::ReplayMiss { .. } => (true, None),
            _ => (false, None),
        };
        StageFailure {
            stage,
            provider,
            status,
            message: e.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionTurn {
    pub index: usize,
    pub kind: TurnKind,
    /// 1 for the initial query of a question, 2 and 3 for amendments.
    pub attempt: u32,
    pub prompt_sent: String,
    pub raw_output: Option<String>,
    pub cleaned_query: Option<String>,
    pub parse_result: ParseResult,
    pub diagnostics: Vec<Diagnostic>,
    pub execution: Option<Execution>,
    pub explanation: Option<Explanation>,
    #[serde(default)]
    pub failures: Vec<StageFailure>,
}

impl SessionTurn {
    /// Data rows of a successful execution.
    pub fn rows(&self) -> Option<&[Vec<serde_json::Value>]> {
        match &self.execution {
            Some(Execution::Table { rows, .. }) => Some(rows),
            _ => None,
        }
    }

    pub fn provider_failure(&self) -> Option<&StageFailure> {
        self.failures.iter().find(|f| f.provider)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Session {
    pub id: String,
    pub schema_ref: String,
    pub graph_ref: String,
    pub model: ModelRef,
    pub amendment_budget: u32,
    #[serde(default)]
    pub explain: ExplainMode,
    pub turns: Vec<SessionTurn>,
}

/// Shared, read-only collaborators of a session.
pub struct Context<'a> {
    pub schema: &'a GraphSchema,
    pub graph: &'a PropertyGraph,
    pub model: &'a dyn ChatModel,
}

impl Session {
    pub fn new(id: &str, schema_ref: &str, graph_ref: &str, model: ModelRef) -> Self {
        Session {
            id: id.to_string(),
            schema_ref: schema_ref.to_string(),
            graph_ref: graph_ref.to_string(),
            model,
            amendment_budget: DEFAULT_AMENDMENT_BUDGET,
            explain: ExplainMode::default(),
            turns: Vec::new(),
        }
    }

    fn last_ask(&self) -> Option<usize> {
        self.turns
            .iter()
            .rposition(|t| matches!(t.kind, TurnKind::Ask { .. }))
    }

    /// The question the current amendment chain belongs to.
    pub fn current_question(&self) -> Option<&str> {
        match &self.turns[self.last_ask()?].kind {
            TurnKind::Ask { question } => Some(question),
            TurnKind::Amend { .. } => None,
        }
    }

    /// Most recent cleaned query of the current question.
    pub fn current_query(&self) -> Option<&str> {
        let start = self.last_ask()?;
        self.turns[start..]
            .iter()
            .rev()
            .find_map(|t| t.cleaned_query.as_deref())
    }

    pub fn amendments_used(&self) -> u32 {
        self.last_ask()
            .map_or(0, |i| (self.turns.len() - i - 1) as u32)
    }

    pub fn amendments_remaining(&self) -> u32 {
        self.amendment_budget.saturating_sub(self.amendments_used())
    }

    pub fn ask(&mut self, ctx: &Context<'_>, question: &str) -> Result<&SessionTurn, DialogueError> {
        let kind = if ctx.schema.name == "hyena" {
            TemplateKind::HyenaGeneration
        } else {
            TemplateKind::Generation
        };
        let schema_block = ctx.schema.prompt_block();
        let prompt = render(kind, &[("schema", &schema_block), ("question", question)])?;
        let turn = self.run_turn(
            ctx,
            TurnKind::Ask {
                question: question.to_string(),
            },
            1,
            prompt,
        );
        self.turns.push(turn);
        Ok(self.turns.last().expect("just pushed"))
    }

    pub fn amend(&mut self, ctx: &Context<'_>, instruction: &str) -> Result<&SessionTurn, DialogueError> {
        let question = self
            .current_question()
            .ok_or(DialogueError::NothingToAmend)?
            .to_string();
        let current = self
            .current_query()
            .ok_or(DialogueError::NothingToAmend)?
            .to_string();
        if self.amendments_used() >= self.amendment_budget {
            return Err(DialogueError::BudgetExhausted {
                budget: self.amendment_budget,
            });
        }
        let schema_block = ctx.schema.prompt_block();
        let prompt = render(
            TemplateKind::Amendment,
            &[
                ("question", &question),
                ("current_query", &current),
                ("schema", &schema_block),
                ("amendment", instruction),
            ],
        )?;
        let attempt = self.amendments_used() + 2;
        let turn = self.run_turn(
            ctx,
            TurnKind::Amend {
                instruction: instruction.to_string(),
            },
            attempt,
            prompt,
        );
        self.turns.push(turn);
        Ok(self.turns.last().expect("just pushed"))
    }

    fn run_turn(&self, ctx: &Context<'_>, kind: TurnKind, attempt: u32, prompt: String) -> SessionTurn {
        let mut turn = SessionTurn {
            index: self.turns.len(),
            kind,
            attempt,
            prompt_sent: prompt,
            raw_output: None,
            cleaned_query: None,
            parse_result: ParseResult::NotAttempted,
            diagnostics: Vec::new(),
            execution: None,
            explanation: None,
            failures: Vec::new(),
        };
        let raw = match ctx.model.complete(&turn.prompt_sent) {
            Ok(r) => r,
            Err(e) => {
                turn.failures.push(StageFailure::from_llm(Stage::Generate, &e));
                return turn;
            }
        };
        turn.raw_output = Some(raw.clone());
        let cleaned = match clean_query_output(&raw) {
            Ok(c) => c,
            Err(e) => {
                turn.failures.push(StageFailure::from_llm(Stage::Clean, &e));
                return turn;
            }
        };
        turn.cleaned_query = Some(cleaned.clone());
        let ast = match parse_query(&cleaned) {
            Ok(ast) => ast,
            Err(ParseError::Syntax(e)) => {
                turn.parse_result = ParseResult::SyntaxError {
                    message: e.to_string(),
                    line: e.line,
                    column: e.column,
                };
                return turn;
            }
            Err(ParseError::Unsupported {
                feature,
                line,
                column,
            }) => {
                turn.parse_result = ParseResult::Unsupported {
                    feature,
                    line,
                    column,
                };
                return turn;
            }
        };
        turn.parse_result = ParseResult::Parsed {
            canonical: print_query(&ast),
        };
        match validate(&ast, ctx.schema) {
            Ok(d) => turn.diagnostics = d,
            Err(e) => turn.failures.push(StageFailure {
                stage: Stage::Validate,
                provider: false,
                status: None,
                message: e.to_string(),
            }),
        }
        turn.execution = Some(run_query(&ast, ctx.graph));
        match self.explain {
            ExplainMode::Off => {}
            ExplainMode::Deterministic => turn.explanation = Some(explain_deterministic(&ast, ctx.schema)),
            ExplainMode::Model => match explain_with_model(ctx.model, &cleaned) {
                Ok(e) => turn.explanation = Some(e),
                Err(e) => turn.failures.push(StageFailure::from_llm(Stage::Explain, &e)),
            },
        }
        turn
    }
}

/// Executes and renders a result table, keeping at most [`ROW_CAP`] rows.
pub fn run_query(ast: &QueryAst, graph: &PropertyGraph) -> Execution {
    match execute(ast, graph) {
        Ok(table) => {
            let total_rows = table.rows.len();
            let rows = table
                .rows
                .iter()
                .take(ROW_CAP)
                .map(|r| r.iter().map(|v| graph.render(v)).collect())
                .collect();
            Execution::Table {
                columns: table.columns,
                rows,
                total_rows,
                truncated: total_rows > ROW_CAP,
            }
        }
        Err(e) => Execution::Error {
            message: e.to_string(),
        },
    }
}
