use crate::benchmark::gold_facts;
use crate::llm::{render, ChatModel, LlmError, TemplateKind};
use crate::schema::GraphSchema;
use crate::syntax::{Clause, Direction, NodePattern, Pattern, Projection, QueryAst, ReturnClause};
use crate::validate::{validate, PerturbationKind};
use regex::Regex;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::sync::LazyLock;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExplanationSource {
    Deterministic,
    Model,
}

/// A problem note attached to an explanation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Flag {
    /// Kind of fault the note points at, when it can be told.
    pub kind: Option<PerturbationKind>,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Explanation {
    pub steps: Vec<String>,
    pub summary: String,
    pub flags: Vec<Flag>,
    pub source: ExplanationSource,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub raw: Option<String>,
}

fn join_list(items: &[String]) -> String {
    match items {
        [] => String::new(),
        [one] => one.clone(),
        [init @ .., last] => format!("{} and {last}", init.join(", ")),
    }
}

fn describe_node(n: &NodePattern, seen: &BTreeSet<String>) -> String {
    if let Some(v) = n.variable.as_ref().filter(|v| seen.contains(*v)) {
        return format!("the node bound to `{v}`");
    }
    let mut s = match &n.label {
        Some(l) => format!("a node labeled {l}"),
        None => "any node".to_string(),
    };
    if let Some(v) = &n.variable {
        s.push_str(&format!(" (`{v}`)"));
    }
    if !n.properties.is_empty() {
        let props: Vec<String> = n
            .properties
            .iter()
            .map(|(k, v)| format!("the property {k} set to {v}"))
            .collect();
        s.push_str(&format!(" with {}", join_list(&props)));
    }
    s
}

fn pattern_steps(p: &Pattern, optional: bool, seen: &mut BTreeSet<String>, steps: &mut Vec<String>) {
    let verb = if optional { "optionally looks for" } else { "finds" };
    steps.push(format!("The query {verb} {}.", describe_node(&p.start, seen)));
    seen.extend(p.start.variable.clone());
    let mut prev = p.start.variable.clone();
    for (rel, node) in &p.steps {
        let ty = rel
            .rel_type
            .as_ref()
            .map_or("relationships of any type".to_string(), |t| format!("{t} relationships"));
        let dir = match rel.direction {
            Direction::LeftToRight => "outgoing ",
            Direction::RightToLeft => "incoming ",
            Direction::Undirected => "",
        };
        let from = prev
            .as_ref()
            .map_or("the previous node".to_string(), |v| format!("`{v}`"));
        let target = describe_node(node, seen);
        let lead = if optional { "If present, it follows" } else { "It then follows" };
        steps.push(format!("{lead} {dir}{ty} from {from} to {target}."));
        seen.extend(node.variable.clone());
        prev = node.variable.clone();
    }
}

fn projection_text(p: &Projection) -> String {
    match &p.alias {
        Some(a) => format!("{} as {a}", p.expr),
        None => p.expr.to_string(),
    }
}

fn return_step(r: &ReturnClause) -> String {
    let items: Vec<String> = r.projections.iter().map(projection_text).collect();
    let mut s = format!(
        "Finally, it returns {}{}",
        if r.distinct { "the distinct values of " } else { "" },
        join_list(&items)
    );
    if !r.order_by.is_empty() {
        let keys: Vec<String> = r
            .order_by
            .iter()
            .map(|k| format!("{}{}", k.expr, if k.descending { " descending" } else { "" }))
            .collect();
        s.push_str(&format!(", ordered by {}", join_list(&keys)));
    }
    if let Some(n) = r.limit {
        s.push_str(&format!(", keeping the first {n} rows"));
    }
    s.push('.');
    s
}

/// Template-based explanation read straight off the AST. Its summary names
/// every gold fact of the query and its flags are the validator's findings.
pub fn explain_deterministic(ast: &QueryAst, schema: &GraphSchema) -> Explanation {
    let mut steps = Vec::new();
    let mut seen = BTreeSet::new();
    for clause in &ast.clauses {
        match clause {
            Clause::Match { patterns, optional } => {
                for p in patterns {
                    pattern_steps(p, *optional, &mut seen, &mut steps);
                }
            }
            Clause::Where(cond) => steps.push(format!("It keeps only rows where {cond}.")),
            Clause::With {
                projections,
                distinct,
                filter,
            } => {
                let items: Vec<String> = projections.iter().map(projection_text).collect();
                steps.push(format!(
                    "It carries {}{} forward.",
                    if *distinct { "the distinct values of " } else { "" },
                    join_list(&items)
                ));
                if let Some(f) = filter {
                    steps.push(format!("It keeps only rows where {f}."));
                }
            }
            Clause::Return(r) => steps.push(return_step(r)),
        }
    }

    let facts = gold_facts(ast);
    let entities: Vec<String> = facts
        .entities
        .iter()
        .filter_map(|e| {
            let label = e.label.as_ref()?;
            Some(if e.variable.is_empty() {
                label.clone()
            } else {
                format!("{label} {}", e.variable)
            })
        })
        .collect();
    let relations: Vec<String> = facts
        .relations
        .iter()
        .map(|r| match (r.from_var.as_str(), r.to_var.as_str()) {
            ("", "") => r.rel_type.clone(),
            (f, t) => format!("{} from {f} to {t}", r.rel_type),
        })
        .collect();
    let mut summary = String::from("Overall, this query looks at ");
    summary.push_str(&if entities.is_empty() {
        "the graph".to_string()
    } else {
        join_list(&entities)
    });
    if !relations.is_empty() {
        summary.push_str(&format!(" connected through {}", join_list(&relations)));
    }
    let filters: Vec<String> = facts.filters.iter().cloned().collect();
    if !filters.is_empty() {
        summary.push_str(&format!(", keeping matches where {}", join_list(&filters)));
    }
    if let Some(y) = &facts.year_constraint {
        summary.push_str(&format!(", restricted to {y}"));
    }
    let returns: Vec<String> = facts.returns.iter().cloned().collect();
    summary.push_str(&format!(", and returns {}.", join_list(&returns)));

    let flags = match validate(ast, schema) {
        Ok(diags) => diags
            .into_iter()
            .map(|d| Flag {
                kind: Some(d.kind),
                message: d.message,
            })
            .collect(),
        Err(e) => vec![Flag {
            kind: None,
            message: e.to_string(),
        }],
    };
    Explanation {
        steps,
        summary,
        flags,
        source: ExplanationSource::Deterministic,
        raw: None,
    }
}

static NUMBERED: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^\s*(?:[*_]{2})?\d{1,2}[.)](?:[*_]{2})?\s+(.*\S)\s*$").unwrap());
static LABEL_PREFIX: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(
        r"(?i)^(?:[#*_\s]*)(?:one[- ]sentence summary|summary|purpose(?: \(one line\))?|overall purpose)(?:[*_]*)\s*:\s*(?:[*_]*)\s*",
    )
    .unwrap()
});
static PROBLEM: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(
        r"(?i)\b(wrong|incorrect|error|errors|mistake|mistaken|nonsens\w*|makes no sense|does(?:n't| not) make sense|reversed|flipped|backwards|invalid|problem\w*|issues?|contradict\w*|impossible|illogical|inconsistent|should be|typo|misspel\w*|does(?:n't| not) exist|never be (?:true|satisfied)|cannot be satisfied|suspicious|misleading)\b",
    )
    .unwrap()
});
static NEGATED: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(
        r"(?i)\b(no|nothing|not any|without any|free of|(?:do|did)(?:n't| not) (?:see|notice|find|spot) any|no obvious)\s+(?:\w+\s+){0,2}(wrong|errors?|issues?|problems?|mistakes?|inconsisten\w*)",
    )
    .unwrap()
});

fn sentences(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut chars = text.chars().peekable();
    while let Some(c) = chars.next() {
        cur.push(if c == '\n' { ' ' } else { c });
        let boundary = matches!(c, '.' | '!' | '?') && chars.peek().is_none_or(|n| n.is_whitespace());
        if boundary || (c == '\n' && chars.peek() == Some(&'\n')) {
            let s = cur.split_whitespace().collect::<Vec<_>>().join(" ");
            if !s.is_empty() {
                out.push(s);
            }
            cur.clear();
        }
    }
    let s = cur.split_whitespace().collect::<Vec<_>>().join(" ");
    if !s.is_empty() {
        out.push(s);
    }
    out
}

/// Guesses which fault a problem sentence is about.
pub fn classify_flag(sentence: &str) -> Option<PerturbationKind> {
    let s = sentence.to_lowercase();
    let has = |words: &[&str]| words.iter().any(|w| s.contains(w));
    if has(&["direction", "wrong way", "reversed", "flipped", "backwards", "other way"]) {
        Some(PerturbationKind::FlippedDirection)
    } else if has(&["contradict", "both before and after", "never be true", "cannot be satisfied", "impossible", "mutually exclusive"]) {
        Some(PerturbationKind::ContradictoryWhere)
    } else if has(&["-1", "negative", "illogical", "implausible", "unrealistic"]) {
        Some(PerturbationKind::IllogicalWhereValue)
    } else if has(&["string", "type", "compar"]) && has(&["number", "numeric", "integer", "year"]) {
        Some(PerturbationKind::IllFormedValueTest)
    } else if has(&["relationship", "edge"]) && has(&["sense", "exist", "nonsens", "label", "name"]) {
        Some(PerturbationKind::NonsenseRelLabel)
    } else if has(&["misleading", "no label", "missing label", "without a label", "unlabeled", "unlabelled"]) {
        Some(PerturbationKind::MissingNodeTypeMisleadingName)
    } else if has(&["node", "label"]) && has(&["sense", "exist", "nonsens", "name"]) {
        Some(PerturbationKind::NonsenseNodeLabel)
    } else {
        None
    }
}

/// Splits a free-text model explanation into numbered steps, the summary
/// that follows them and the sentences that point at problems.
pub fn parse_model_explanation(text: &str) -> Explanation {
    let body = crate::llm::strip_reasoning(text);
    let lines: Vec<&str> = body.lines().collect();
    let mut steps: Vec<String> = Vec::new();
    let mut last_step_line = None;
    let mut in_step = false;
    for (i, line) in lines.iter().enumerate() {
        if let Some(c) = NUMBERED.captures(line) {
            steps.push(c[1].to_string());
            last_step_line = Some(i);
            in_step = true;
        } else if line.trim().is_empty() {
            in_step = false;
        } else if in_step && line.starts_with(char::is_whitespace) {
            let s = steps.last_mut().expect("inside a step");
            s.push(' ');
            s.push_str(line.trim());
            last_step_line = Some(i);
        } else {
            in_step = false;
        }
    }

    let summary = match last_step_line {
        None => body.trim().to_string(),
        Some(end) => {
            let rest = lines[end + 1..].join("\n");
            let mut summary = String::new();
            for para in rest.split("\n\n") {
                let para = para.trim();
                let stripped = LABEL_PREFIX.replace(para, "");
                let stripped = stripped.trim();
                if stripped.is_empty() {
                    continue;
                }
                summary = sentences(stripped).into_iter().next().unwrap_or_default();
                break;
            }
            summary
        }
    };

    let flags = sentences(&body)
        .into_iter()
        .filter(|s| PROBLEM.is_match(s) && !NEGATED.is_match(s))
        .map(|s| Flag {
            kind: classify_flag(&s),
            message: s,
        })
        .collect();

    Explanation {
        steps,
        summary,
        flags,
        source: ExplanationSource::Model,
        raw: Some(text.to_string()),
    }
}

/// Asks the model to explain a query and parses its answer.
pub fn explain_with_model(model: &dyn ChatModel, query_text: &str) -> Result<Explanation, LlmError> {
    let prompt = render(TemplateKind::Explanation, &[("query", query_text)])?;
    let answer = model.complete(&prompt)?;
    Ok(parse_model_explanation(&answer))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sentences_split_on_terminal_punctuation() {
        assert_eq!(
            sentences("It is fine. Really?\nYes 1.5 is a number."),
            vec!["It is fine.", "Really?", "Yes 1.5 is a number."]
        );
    }

    #[test]
    fn negated_problem_is_not_a_flag() {
        let e = parse_model_explanation("1. Find x.\n\nOverall it finds x. I see no obvious issues with the query.");
        assert!(e.flags.is_empty(), "{:?}", e.flags);
    }
}
