use super::LlmError;
use regex::Regex;
use std::sync::LazyLock;

static THINK_PAIR: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"(?is)<(think|thinking|reasoning)>.*?</(think|thinking|reasoning)>").unwrap()
});
static THINK_CLOSE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?is)^.*</(think|thinking|reasoning)>").unwrap());
static THINK_OPEN: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?is)<(think|thinking|reasoning)>.*$").unwrap());
static FENCE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?s)```[A-Za-z0-9_-]*[ \t]*\r?\n?(.*?)```").unwrap());
static KEYWORD_UPPER: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"\b(OPTIONAL\s+MATCH|MATCH|UNWIND|CALL|CREATE|MERGE|WITH|RETURN)\b").unwrap()
});
static KEYWORD_ANY: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"(?i)\b(optional\s+match|match|unwind|call|create|merge|with|return)\b").unwrap()
});

pub(crate) fn strip_reasoning(text: &str) -> String {
    let mut s = text.to_string();
    loop {
        let next = THINK_PAIR.replace_all(&s, "").into_owned();
        let next = THINK_CLOSE.replace(&next, "").into_owned();
        let next = THINK_OPEN.replace(&next, "").into_owned();
        if next == s {
            return s;
        }
        s = next;
    }
}

fn keyword_start(text: &str) -> Option<usize> {
    KEYWORD_UPPER
        .find(text)
        .or_else(|| KEYWORD_ANY.find(text))
        .map(|m| m.start())
}

/// Reduces a raw model answer to the query text: drops reasoning tags,
/// unwraps the first fenced block that holds a query, cuts leading prose
/// before the first query keyword and trims whitespace and semicolons.
pub fn clean_query_output(raw: &str) -> Result<String, LlmError> {
    let text = strip_reasoning(raw);
    let body = FENCE
        .captures_iter(&text)
        .map(|c| c.get(1).map_or("", |m| m.as_str()).to_string())
        .find(|inner| keyword_start(inner).is_some())
        .unwrap_or(text);
    let start = keyword_start(&body).ok_or(LlmError::EmptyAfterCleaning)?;
    let mut out = body[start..].trim();
    loop {
        let next = out.trim_end_matches(';').trim();
        if next == out {
            break;
        }
        out = next;
    }
    if out.is_empty() {
        return Err(LlmError::EmptyAfterCleaning);
    }
    Ok(out.to_string())
}
