use super::EvalError;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

/// One model's result on one item.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Outcome {
    pub correct: bool,
    /// Attempt on which a generation task was solved (1 to 3).
    pub attempts: Option<u8>,
    pub flags_correct: Option<bool>,
    pub false_positive: Option<bool>,
    pub year_omitted: Option<bool>,
}

/// Which binary outcome to read from a cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutcomeField {
    Correct,
    FirstTry,
    WithinThree,
    FlagsCorrect,
    NoFalsePositive,
    YearIncluded,
}

impl OutcomeField {
    pub fn name(self) -> &'static str {
        match self {
            OutcomeField::Correct => "correct",
            OutcomeField::FirstTry => "first_try",
            OutcomeField::WithinThree => "within_three",
            OutcomeField::FlagsCorrect => "flags_correct",
            OutcomeField::NoFalsePositive => "no_false_positive",
            OutcomeField::YearIncluded => "year_included",
        }
    }

    /// `None` when the cell does not carry this outcome.
    pub fn read(self, o: &Outcome) -> Option<bool> {
        match self {
            OutcomeField::Correct | OutcomeField::WithinThree => Some(o.correct),
            OutcomeField::FirstTry => Some(o.attempts == Some(1)),
            OutcomeField::FlagsCorrect => o.flags_correct,
            OutcomeField::NoFalsePositive => o.false_positive.map(|b| !b),
            OutcomeField::YearIncluded => o.year_omitted.map(|b| !b),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct Record {
    model: String,
    item: String,
    correct: bool,
    attempts: Option<u8>,
    flags_correct: Option<bool>,
    false_positive: Option<bool>,
    year_omitted: Option<bool>,
}

/// Rectangular model × item table of outcomes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeMatrix {
    pub models: Vec<String>,
    pub items: Vec<String>,
    /// Indexed `[model][item]`.
    pub cells: Vec<Vec<Outcome>>,
}

impl OutcomeMatrix {
    pub fn new(models: Vec<String>, items: Vec<String>, cells: Vec<Vec<Outcome>>) -> Result<Self, EvalError> {
        let m = OutcomeMatrix { models, items, cells };
        m.check()?;
        Ok(m)
    }

    pub fn check(&self) -> Result<(), EvalError> {
        if self.cells.len() != self.models.len() || self.cells.iter().any(|r| r.len() != self.items.len()) {
            return Err(EvalError::Matrix("matrix is not rectangular".into()));
        }
        let generation = self.is_generation();
        for (m, row) in self.models.iter().zip(&self.cells) {
            for (item, o) in self.items.iter().zip(row) {
                match o.attempts {
                    Some(a) if !(1..=3).contains(&a) => {
                        return Err(EvalError::Matrix(format!("{m} / {item}: attempts must be 1, 2 or 3")))
                    }
                    Some(_) if !o.correct => {
                        return Err(EvalError::Matrix(format!("{m} / {item}: attempts given for a failure")))
                    }
                    None if generation && o.correct => {
                        return Err(EvalError::Matrix(format!("{m} / {item}: success without attempt count")))
                    }
                    _ => {}
                }
            }
        }
        Ok(())
    }

    /// True when cells carry attempt counts.
    pub fn is_generation(&self) -> bool {
        self.cells.iter().flatten().any(|o| o.attempts.is_some())
    }

    pub fn cell(&self, model: usize, item: usize) -> &Outcome {
        &self.cells[model][item]
    }

    /// Reads `model,item,correct,attempts,flags_correct,false_positive,year_omitted`
    /// records. Models and items keep first-appearance order.
    pub fn read_csv(reader: impl Read) -> Result<Self, EvalError> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let mut models: Vec<String> = Vec::new();
        let mut items: Vec<String> = Vec::new();
        let mut cells: BTreeMap<(usize, usize), Outcome> = BTreeMap::new();
        for rec in rdr.deserialize() {
            let r: Record = rec?;
            let mi = position_or_push(&mut models, &r.model);
            let ii = position_or_push(&mut items, &r.item);
            let o = Outcome {
                correct: r.correct,
                attempts: r.attempts,
                flags_correct: r.flags_correct,
                false_positive: r.false_positive,
                year_omitted: r.year_omitted,
            };
            if cells.insert((mi, ii), o).is_some() {
                return Err(EvalError::Matrix(format!("duplicate cell {} / {}", r.model, r.item)));
            }
        }
        let mut grid = Vec::with_capacity(models.len());
        for mi in 0..models.len() {
            let mut row = Vec::with_capacity(items.len());
            for ii in 0..items.len() {
                row.push(*cells.get(&(mi, ii)).ok_or_else(|| {
                    EvalError::Matrix(format!("missing cell {} / {}", models[mi], items[ii]))
                })?);
            }
            grid.push(row);
        }
        Self::new(models, items, grid)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, EvalError> {
        Self::read_csv(std::fs::File::open(path)?)
    }

    /// Flat long-format export, one record per cell.
    pub fn write_csv(&self, writer: impl Write) -> Result<(), EvalError> {
        let mut w = csv::Writer::from_writer(writer);
        for (m, row) in self.models.iter().zip(&self.cells) {
            for (item, o) in self.items.iter().zip(row) {
                w.serialize(Record {
                    model: m.clone(),
                    item: item.clone(),
                    correct: o.correct,
                    attempts: o.attempts,
                    flags_correct: o.flags_correct,
                    false_positive: o.false_positive,
                    year_omitted: o.year_omitted,
                })?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

fn position_or_push(v: &mut Vec<String>, s: &str) -> usize {
    match v.iter().position(|x| x == s) {
        Some(i) => i,
        None => {
            v.push(s.to_string());
            v.len() - 1
        }
    }
}
