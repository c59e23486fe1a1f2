//! Outcome matrices, accuracy tables with Wilson intervals and pairwise
//! exact McNemar tests with Holm adjustment.

mod matrix;
mod report;
mod scoring;
mod stats;

pub use matrix::{Outcome, OutcomeField, OutcomeMatrix};
pub use report::{
    accuracy_report, attempt_breakdown, discordance, generation_report, mcnemar_square,
    pairwise_mcnemar_report, read_counts, read_discordance, text_table, truncate,
    write_accuracy_csv, write_attempts_csv, write_count_reports, write_discordance_reports,
    write_generation_csv, write_matrix_reports, write_mcnemar_csv, AccuracyRow, AttemptBreakdown,
    CountRecord, GenerationRow, GroupBy, EXPLANATION_OUTCOMES,
};
pub use scoring::{detects, score_explanation, score_summary, SummaryScore};
pub use stats::{holm_adjust, mcnemar_exact, mcnemar_family, wilson_ci, McNemarResult, WilsonInterval, Z95};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("outcome matrix: {0}")]
    Matrix(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
