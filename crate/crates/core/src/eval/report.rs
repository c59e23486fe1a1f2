use super::matrix::{OutcomeField, OutcomeMatrix};
use super::stats::{mcnemar_family, wilson_ci, McNemarResult, WilsonInterval, Z95};
use super::EvalError;
use serde::{Deserialize, Serialize};
use std::io::Read;
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GroupBy {
    Model,
    Question,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyRow {
    pub group: String,
    pub n: u64,
    pub k: u64,
    pub acc: f64,
    pub ci: WilsonInterval,
}

impl AccuracyRow {
    pub fn from_counts(group: &str, k: u64, n: u64) -> Result<Self, EvalError> {
        let ci = wilson_ci(k, n, Z95)?;
        Ok(AccuracyRow {
            group: group.to_string(),
            n,
            k,
            acc: ci.point,
            ci,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationRow {
    pub group: String,
    pub first: AccuracyRow,
    pub within3: AccuracyRow,
}

/// Successes per attempt number plus failures, for one group.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttemptBreakdown {
    pub group: String,
    pub first: u64,
    pub second: u64,
    pub third: u64,
    pub failed: u64,
}

fn groups(m: &OutcomeMatrix, by: GroupBy) -> Vec<(String, Vec<(usize, usize)>)> {
    match by {
        GroupBy::Model => m
            .models
            .iter()
            .enumerate()
            .map(|(mi, name)| (name.clone(), (0..m.items.len()).map(|ii| (mi, ii)).collect()))
            .collect(),
        GroupBy::Question => m
            .items
            .iter()
            .enumerate()
            .map(|(ii, name)| (name.clone(), (0..m.models.len()).map(|mi| (mi, ii)).collect()))
            .collect(),
    }
}

/// Accuracy with a Wilson interval per group, over the cells that carry `field`.
/// Groups without any such cell are skipped.
pub fn accuracy_report(m: &OutcomeMatrix, by: GroupBy, field: OutcomeField) -> Result<Vec<AccuracyRow>, EvalError> {
    let mut out = Vec::new();
    for (name, cells) in groups(m, by) {
        let vals: Vec<bool> = cells
            .iter()
            .filter_map(|&(mi, ii)| field.read(m.cell(mi, ii)))
            .collect();
        if vals.is_empty() {
            continue;
        }
        let k = vals.iter().filter(|v| **v).count() as u64;
        out.push(AccuracyRow::from_counts(&name, k, vals.len() as u64)?);
    }
    Ok(out)
}

/// First-attempt and within-three accuracy side by side.
pub fn generation_report(m: &OutcomeMatrix, by: GroupBy) -> Result<Vec<GenerationRow>, EvalError> {
    let first = accuracy_report(m, by, OutcomeField::FirstTry)?;
    let within = accuracy_report(m, by, OutcomeField::WithinThree)?;
    Ok(first
        .into_iter()
        .zip(within)
        .map(|(f, w)| GenerationRow {
            group: f.group.clone(),
            first: f,
            within3: w,
        })
        .collect())
}

pub fn attempt_breakdown(m: &OutcomeMatrix, by: GroupBy) -> Vec<AttemptBreakdown> {
    groups(m, by)
        .into_iter()
        .map(|(group, cells)| {
            let mut b = AttemptBreakdown {
                group,
                first: 0,
                second: 0,
                third: 0,
                failed: 0,
            };
            for (mi, ii) in cells {
                let o = m.cell(mi, ii);
                match (o.correct, o.attempts) {
                    (true, Some(2)) => b.second += 1,
                    (true, Some(3)) => b.third += 1,
                    (true, _) => b.first += 1,
                    (false, _) => b.failed += 1,
                }
            }
            b
        })
        .collect()
}

/// Discordant counts for every unordered model pair, in model order.
pub fn discordance(m: &OutcomeMatrix, field: OutcomeField) -> Vec<(String, String, u64, u64)> {
    let mut out = Vec::new();
    for a in 0..m.models.len() {
        for b in a + 1..m.models.len() {
            let (mut row_only, mut col_only) = (0, 0);
            for ii in 0..m.items.len() {
                match (field.read(m.cell(a, ii)), field.read(m.cell(b, ii))) {
                    (Some(true), Some(false)) => row_only += 1,
                    (Some(false), Some(true)) => col_only += 1,
                    _ => {}
                }
            }
            out.push((m.models[a].clone(), m.models[b].clone(), row_only, col_only));
        }
    }
    out
}

/// Exact McNemar tests for all model pairs, Holm-adjusted within `field`.
pub fn pairwise_mcnemar_report(m: &OutcomeMatrix, field: OutcomeField) -> Result<Vec<McNemarResult>, EvalError> {
    if m.models.len() < 2 {
        return Err(EvalError::Domain("pairwise tests need at least two models".into()));
    }
    Ok(mcnemar_family(&discordance(m, field)))
}

#[derive(Debug, Deserialize)]
struct DiscordanceRecord {
    row_model: String,
    col_model: String,
    row_only: u64,
    col_only: u64,
}

/// Reads `row_model,col_model,row_only,col_only` records.
pub fn read_discordance(reader: impl Read) -> Result<Vec<(String, String, u64, u64)>, EvalError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    rdr.deserialize()
        .map(|r| {
            let r: DiscordanceRecord = r?;
            Ok((r.row_model, r.col_model, r.row_only, r.col_only))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountRecord {
    pub model: String,
    pub outcome: String,
    pub n: u64,
    pub correct: u64,
}

/// Reads `model,outcome,n,correct` records.
pub fn read_counts(reader: impl Read) -> Result<Vec<CountRecord>, EvalError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    rdr.deserialize().map(|r| r.map_err(EvalError::from)).collect()
}

/// Truncates (not rounds) to `places` decimals.
pub fn truncate(x: f64, places: i32) -> f64 {
    let f = 10f64.powi(places);
    // Nudge so that exact decimals like 0.7 do not fall to 0.699.
    (x * f + 1e-6).floor() / f
}

fn csv_writer(path: &Path) -> Result<csv::Writer<std::fs::File>, EvalError> {
    Ok(csv::Writer::from_path(path)?)
}

/// `model,outcome,n,correct,acc,ci_low,ci_high` with the accuracy truncated
/// to three decimals and the bounds rounded to three.
pub fn write_accuracy_csv(path: &Path, rows: &[(String, AccuracyRow)]) -> Result<(), EvalError> {
    let mut w = csv_writer(path)?;
    w.write_record(["model", "outcome", "n", "correct", "acc", "ci_low", "ci_high"])?;
    for (outcome, r) in rows {
        w.write_record([
            r.group.clone(),
            outcome.clone(),
            r.n.to_string(),
            r.k.to_string(),
            format!("{:.3}", truncate(r.acc, 3)),
            format!("{:.3}", r.ci.low),
            format!("{:.3}", r.ci.high),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_generation_csv(path: &Path, rows: &[GenerationRow]) -> Result<(), EvalError> {
    let mut w = csv_writer(path)?;
    w.write_record([
        "group",
        "first_correct",
        "first_acc",
        "first_low",
        "first_high",
        "within3_correct",
        "within3_acc",
        "within3_low",
        "within3_high",
    ])?;
    for r in rows {
        w.write_record([
            r.group.clone(),
            r.first.k.to_string(),
            format!("{:.6}", r.first.acc),
            format!("{:.3}", r.first.ci.low),
            format!("{:.3}", r.first.ci.high),
            r.within3.k.to_string(),
            format!("{:.6}", r.within3.acc),
            format!("{:.3}", r.within3.ci.low),
            format!("{:.3}", r.within3.ci.high),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Both orientations of every pair, so each row/column cell of the square
/// table is present.
pub fn write_mcnemar_csv(path: &Path, results: &[McNemarResult]) -> Result<(), EvalError> {
    let mut w = csv_writer(path)?;
    w.write_record([
        "row_model",
        "col_model",
        "row_only",
        "col_only",
        "p_raw",
        "p_holm",
        "p_holm_signed",
    ])?;
    for r in results.iter().flat_map(|r| [r.clone(), r.swapped()]) {
        w.write_record([
            r.row_model.clone(),
            r.col_model.clone(),
            r.row_only.to_string(),
            r.col_only.to_string(),
            format!("{:.6e}", r.p_raw),
            r.p_holm.map_or(String::new(), |p| format!("{p:.6}")),
            r.signed_text(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_attempts_csv(path: &Path, rows: &[AttemptBreakdown]) -> Result<(), EvalError> {
    let mut w = csv_writer(path)?;
    w.write_record(["group", "first", "second", "third", "failed"])?;
    for r in rows {
        w.write_record([
            r.group.clone(),
            r.first.to_string(),
            r.second.to_string(),
            r.third.to_string(),
            r.failed.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Left-aligned first column, right-aligned rest.
pub fn text_table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for r in rows {
        for (i, c) in r.iter().enumerate() {
            widths[i] = widths[i].max(c.chars().count());
        }
    }
    let line = |cells: Vec<&str>| {
        cells
            .iter()
            .enumerate()
            .map(|(i, c)| {
                if i == 0 {
                    format!("{c:<w$}", w = widths[i])
                } else {
                    format!("{c:>w$}", w = widths[i])
                }
            })
            .collect::<Vec<_>>()
            .join("  ")
            .trim_end()
            .to_string()
    };
    let mut out = line(header.to_vec());
    out.push('\n');
    out.push_str(&"-".repeat(widths.iter().sum::<usize>() + 2 * (widths.len() - 1)));
    out.push('\n');
    for r in rows {
        out.push_str(&line(r.iter().map(String::as_str).collect()));
        out.push('\n');
    }
    out
}

/// Square table of signed adjusted p-values.
pub fn mcnemar_square(results: &[McNemarResult]) -> String {
    let mut models: Vec<String> = Vec::new();
    for r in results {
        for m in [&r.row_model, &r.col_model] {
            if !models.contains(m) {
                models.push(m.clone());
            }
        }
    }
    let cell = |a: &str, b: &str| -> String {
        if a == b {
            return "-".into();
        }
        results
            .iter()
            .find_map(|r| {
                if r.row_model == a && r.col_model == b {
                    Some(r.signed_text())
                } else if r.row_model == b && r.col_model == a {
                    Some(r.swapped().signed_text())
                } else {
                    None
                }
            })
            .unwrap_or_default()
    };
    let mut header = vec![""];
    header.extend(models.iter().map(String::as_str));
    let rows: Vec<Vec<String>> = models
        .iter()
        .map(|a| {
            std::iter::once(a.clone())
                .chain(models.iter().map(|b| cell(a, b)))
                .collect()
        })
        .collect();
    text_table(&header, &rows)
}

fn accuracy_text(rows: &[(String, AccuracyRow)]) -> String {
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|(o, r)| {
            vec![
                r.group.clone(),
                o.clone(),
                r.n.to_string(),
                r.k.to_string(),
                format!("{:.3}", truncate(r.acc, 3)),
                format!("[{:.3}, {:.3}]", r.ci.low, r.ci.high),
            ]
        })
        .collect();
    text_table(&["model", "outcome", "n", "correct", "acc.", "95% CI"], &body)
}

fn generation_text(rows: &[GenerationRow]) -> String {
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.group.clone(),
                r.first.k.to_string(),
                format!("{:.4}", r.first.acc),
                format!("[{:.3}, {:.3}]", r.first.ci.low, r.first.ci.high),
                r.within3.k.to_string(),
                format!("{:.4}", r.within3.acc),
                format!("[{:.3}, {:.3}]", r.within3.ci.low, r.within3.ci.high),
            ]
        })
        .collect();
    text_table(
        &["", "first", "acc. first", "95% CI first", "within 3", "acc. within 3", "95% CI within 3"],
        &body,
    )
}

/// Outcome columns of an explanation matrix and the names used in reports.
pub const EXPLANATION_OUTCOMES: [(OutcomeField, &str); 3] = [
    (OutcomeField::Correct, "summary"),
    (OutcomeField::FlagsCorrect, "detection"),
    (OutcomeField::NoFalsePositive, "false_positive"),
];

/// Writes every report for a matrix into `dir` and returns the names of the
/// files written.
pub fn write_matrix_reports(m: &OutcomeMatrix, dir: &Path) -> Result<Vec<String>, EvalError> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let mut text = String::new();
    if m.is_generation() {
        for (by, name) in [(GroupBy::Model, "models"), (GroupBy::Question, "questions")] {
            let rows = generation_report(m, by)?;
            write_generation_csv(&dir.join(format!("{name}.csv")), &rows)?;
            written.push(format!("{name}.csv"));
            text.push_str(&format!("Accuracy by {}\n", if by == GroupBy::Model { "model" } else { "question" }));
            text.push_str(&generation_text(&rows));
            text.push('\n');
            let att = attempt_breakdown(m, by);
            write_attempts_csv(&dir.join(format!("attempts_{name}.csv")), &att)?;
            written.push(format!("attempts_{name}.csv"));
        }
    } else {
        let mut acc = Vec::new();
        for (field, label) in EXPLANATION_OUTCOMES {
            for r in accuracy_report(m, GroupBy::Model, field)? {
                acc.push((label.to_string(), r));
            }
        }
        // Group by model so that each model's outcomes are adjacent.
        acc.sort_by_key(|(_, r)| m.models.iter().position(|x| *x == r.group));
        write_accuracy_csv(&dir.join("accuracy.csv"), &acc)?;
        written.push("accuracy.csv".to_string());
        text.push_str("Accuracy\n");
        text.push_str(&accuracy_text(&acc));
        for (field, label) in EXPLANATION_OUTCOMES {
            if accuracy_report(m, GroupBy::Model, field)?.is_empty() {
                continue;
            }
            let res = pairwise_mcnemar_report(m, field)?;
            write_mcnemar_csv(&dir.join(format!("mcnemar_{label}.csv")), &res)?;
            written.push(format!("mcnemar_{label}.csv"));
            text.push_str(&format!("\nPairwise McNemar, Holm-adjusted ({label})\n"));
            text.push_str(&mcnemar_square(&res));
        }
    }
    std::fs::write(dir.join("report.txt"), text)?;
    written.push("report.txt".to_string());
    Ok(written)
}

/// Reports for a discordance table: the tests and the square table.
pub fn write_discordance_reports(
    pairs: &[(String, String, u64, u64)],
    label: &str,
    dir: &Path,
) -> Result<Vec<McNemarResult>, EvalError> {
    std::fs::create_dir_all(dir)?;
    let res = mcnemar_family(pairs);
    write_mcnemar_csv(&dir.join(format!("mcnemar_{label}.csv")), &res)?;
    std::fs::write(dir.join(format!("mcnemar_{label}.txt")), mcnemar_square(&res))?;
    Ok(res)
}

/// Accuracy report from bare counts.
pub fn write_count_reports(counts: &[CountRecord], dir: &Path) -> Result<Vec<(String, AccuracyRow)>, EvalError> {
    std::fs::create_dir_all(dir)?;
    let rows = counts
        .iter()
        .map(|c| Ok((c.outcome.clone(), AccuracyRow::from_counts(&c.model, c.correct, c.n)?)))
        .collect::<Result<Vec<_>, EvalError>>()?;
    write_accuracy_csv(&dir.join("accuracy.csv"), &rows)?;
    std::fs::write(dir.join("accuracy.txt"), accuracy_text(&rows))?;
    Ok(rows)
}
