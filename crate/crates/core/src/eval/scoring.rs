use super::matrix::Outcome;
use crate::benchmark::{BenchmarkCase, FactSet};
use crate::dialogue::{Explanation, Flag};
use crate::validate::PerturbationKind;
use regex::Regex;
use serde::{Deserialize, Serialize};
use std::sync::LazyLock;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryScore {
    pub complete: bool,
    /// Gold facts without a match in the summary.
    pub missing: Vec<String>,
    /// Present only for queries with a year constraint.
    pub year_omitted: Option<bool>,
}

static QUOTED: LazyLock<Regex> = LazyLock::new(|| Regex::new(r#""([^"]*)"|'([^']*)'"#).unwrap());
static NUMBER: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"-?\d+(?:\.\d+)?").unwrap());

fn normalize(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut prev_lower = false;
    for c in text.chars() {
        if c.is_uppercase() && prev_lower {
            out.push(' ');
        }
        prev_lower = c.is_lowercase();
        match c {
            '_' | '-' | '`' | '"' | '\'' | '\u{201c}' | '\u{201d}' => out.push(' '),
            _ => out.extend(c.to_lowercase()),
        }
    }
    out.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Literal values a filter text mentions (quoted strings and numbers).
fn literals(text: &str) -> Vec<String> {
    let mut out: Vec<String> = QUOTED
        .captures_iter(text)
        .filter_map(|c| c.get(1).or_else(|| c.get(2)).map(|m| m.as_str().to_string()))
        .collect();
    let unquoted = QUOTED.replace_all(text, " ");
    out.extend(NUMBER.find_iter(&unquoted).map(|m| m.as_str().to_string()));
    out
}

/// Word stem of a relationship type: the first five letters of its longest
/// word, so ACTED_IN matches "acted" and DIRECTED matches "director".
fn rel_stem(rel_type: &str) -> String {
    let longest = rel_type
        .split('_')
        .max_by_key(|w| w.len())
        .unwrap_or(rel_type)
        .to_lowercase();
    longest.chars().take(5).collect()
}

fn mentions(text: &str, phrase: &str) -> bool {
    let p = normalize(phrase);
    !p.is_empty() && text.contains(&p)
}

/// Checks a free-text summary against the gold facts with normalized
/// keyword matching: labels, relationship stems, filter literals, returned
/// property names and year literals.
pub fn score_summary(summary: &str, facts: &FactSet) -> SummaryScore {
    let text = normalize(summary);
    let mut missing = Vec::new();
    for e in &facts.entities {
        if let Some(l) = &e.label {
            if !mentions(&text, l) && !missing.contains(l) {
                missing.push(l.clone());
            }
        }
    }
    for r in &facts.relations {
        if !text.contains(&rel_stem(&r.rel_type)) {
            missing.push(r.rel_type.clone());
        }
    }
    for f in &facts.filters {
        if literals(f).iter().any(|lit| !mentions(&text, lit)) {
            missing.push(f.clone());
        }
    }
    for r in &facts.returns {
        let key = r.rsplit('.').next().unwrap_or(r);
        let counted = r.to_lowercase().starts_with("count(");
        let found = if counted {
            ["count", "number", "how many"].iter().any(|w| text.contains(w))
        } else if r.contains('.') || key.chars().any(char::is_uppercase) {
            mentions(&text, key)
        } else {
            // Bare variables are covered by their entity label.
            true
        };
        if !found {
            missing.push(r.clone());
        }
    }
    let year_omitted = facts.year_constraint.as_ref().map(|y| {
        let lits = literals(y);
        let omitted = lits.iter().any(|l| !mentions(&text, l));
        if omitted {
            missing.push(y.clone());
        }
        omitted
    });
    SummaryScore {
        complete: missing.is_empty(),
        missing,
        year_omitted,
    }
}

/// A flag counts as detecting `kind` when it names that kind or could not be
/// attributed to any.
pub fn detects(flags: &[Flag], kind: PerturbationKind) -> bool {
    flags.iter().any(|f| f.kind.is_none_or(|k| k == kind))
}

/// Grades an explanation of a benchmark case into a matrix cell.
pub fn score_explanation(case: &BenchmarkCase, e: &Explanation) -> Outcome {
    let s = score_summary(&e.summary, &case.gold_facts);
    let clean = case.injected_kind == PerturbationKind::None;
    Outcome {
        correct: s.complete,
        attempts: None,
        flags_correct: (!clean).then(|| detects(&e.flags, case.injected_kind)),
        false_positive: clean.then(|| !e.flags.is_empty()),
        year_omitted: s.year_omitted,
    }
}
