//! The 90-query explanation benchmark over the movie schema.

use crate::schema::GraphSchema;
use crate::syntax::{
    parse_query, print_query, AggregateArg, BoolExpr, Clause, CompareOp, Direction, Literal,
    Pattern, QueryAst, ValueExpr,
};
use crate::validate::PerturbationKind;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt;
use std::io::{BufRead, Write};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ClauseType {
    Match,
    OptionalMatch,
    WithChain,
    Where,
    Case,
}

impl ClauseType {
    pub const ALL: [ClauseType; 5] = [
        ClauseType::Match,
        ClauseType::OptionalMatch,
        ClauseType::WithChain,
        ClauseType::Where,
        ClauseType::Case,
    ];

    pub fn slug(self) -> &'static str {
        match self {
            ClauseType::Match => "match",
            ClauseType::OptionalMatch => "optional",
            ClauseType::WithChain => "with",
            ClauseType::Where => "where",
            ClauseType::Case => "case",
        }
    }
}

impl fmt::Display for ClauseType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.slug())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Entity {
    pub variable: String,
    pub label: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Relation {
    pub rel_type: String,
    pub from_var: String,
    pub to_var: String,
}

/// What a complete one-sentence summary of a query has to mention.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactSet {
    pub entities: BTreeSet<Entity>,
    pub relations: BTreeSet<Relation>,
    pub filters: BTreeSet<String>,
    pub returns: BTreeSet<String>,
    pub year_constraint: Option<String>,
}

impl FactSet {
    /// The literal strings a summary must contain.
    pub fn required_mentions(&self) -> Vec<String> {
        let mut out: BTreeSet<String> = BTreeSet::new();
        out.extend(self.entities.iter().filter_map(|e| e.label.clone()));
        out.extend(self.relations.iter().map(|r| r.rel_type.clone()));
        out.extend(self.filters.iter().cloned());
        out.extend(self.returns.iter().cloned());
        out.extend(self.year_constraint.iter().cloned());
        out.into_iter().collect()
    }

    /// Mentions missing from `summary`.
    pub fn missing_from(&self, summary: &str) -> Vec<String> {
        self.required_mentions()
            .into_iter()
            .filter(|m| !summary.contains(m.as_str()))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkCase {
    pub id: String,
    #[serde(rename = "query")]
    pub query_text: String,
    pub hops: u8,
    pub extra_hop: bool,
    pub clause_type: ClauseType,
    #[serde(rename = "perturbation")]
    pub injected_kind: PerturbationKind,
    pub has_year: bool,
    pub gold_facts: FactSet,
}

#[derive(Debug, Error)]
pub enum BenchmarkError {
    #[error("schema does not match the benchmark: {0}")]
    SchemaMismatch(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {source}")]
    Decode {
        line: usize,
        source: serde_json::Error,
    },
}

const NONSENSE_RELS: [&str; 3] = ["EATS", "SOLVES", "DRINKS"];
const NONSENSE_LABELS: [&str; 3] = ["Food", "Airplane", "Cloud"];

const REQUIRED_RELS: [(&str, &str, &str); 4] = [
    ("ACTED_IN", "Person", "Movie"),
    ("DIRECTED", "Person", "Movie"),
    ("HAS_FAVORITE", "Critic", "Movie"),
    ("BIRTH_CITY", "Person", "City"),
];

fn base_text(hops: u8, clause: ClauseType) -> String {
    let (path, vars, rets) = match hops {
        1 => ("(p:Person)-[:ACTED_IN]->(m:Movie)", "p, m", "p.name, m.title"),
        2 => (
            "(p:Person)-[:ACTED_IN]->(m:Movie)<-[:HAS_FAVORITE]-(c:Critic)",
            "p, m, c",
            "p.name, m.title, c.name",
        ),
        _ => (
            "(ci:City)<-[:BIRTH_CITY]-(p:Person)-[:ACTED_IN]->(m:Movie)<-[:HAS_FAVORITE]-(c:Critic)",
            "ci, p, m, c",
            "ci.name, p.name, m.title, c.name",
        ),
    };
    let extra = "(m)<-[:DIRECTED]-(d:Person)";
    match clause {
        ClauseType::Match => format!("MATCH {path} RETURN {rets}"),
        ClauseType::OptionalMatch => {
            format!("MATCH {path} OPTIONAL MATCH {extra} RETURN {rets}, d.name")
        }
        ClauseType::WithChain => {
            format!("MATCH {path} WITH {vars} MATCH {extra} RETURN {rets}, d.name")
        }
        ClauseType::Where => format!("MATCH {path} WHERE m.release_year > 2000 RETURN {rets}"),
        ClauseType::Case => format!(
            "MATCH {path} RETURN {rets}, CASE WHEN m.release_year < 2010 THEN \"old\" ELSE \"new\" END AS movie_age"
        ),
    }
}

fn check_schema(schema: &GraphSchema) -> Result<(), BenchmarkError> {
    for label in ["Person", "Movie", "Critic", "City"] {
        if !schema.has_label(label) {
            return Err(BenchmarkError::SchemaMismatch(format!("missing label {label}")));
        }
    }
    for (t, from, to) in REQUIRED_RELS {
        if !schema
            .rel_lookup(t)
            .contains(&(from.to_string(), to.to_string()))
        {
            return Err(BenchmarkError::SchemaMismatch(format!(
                "missing relationship (:{from})-[:{t}]->(:{to})"
            )));
        }
    }
    Ok(())
}

/// Generates the 15 base queries and their 75 perturbations. A pure function
/// of the schema and the seed.
pub fn generate_benchmark(
    schema: &GraphSchema,
    seed: u64,
) -> Result<Vec<BenchmarkCase>, BenchmarkError> {
    check_schema(schema)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cases = Vec::with_capacity(90);
    let mut value_fault_index = 0u64;
    for hops in 1..=3u8 {
        for clause in ClauseType::ALL {
            let base = parse_query(&base_text(hops, clause)).expect("base query parses");
            let extra_hop = matches!(clause, ClauseType::OptionalMatch | ClauseType::WithChain);
            let mut emit = |ast: &QueryAst, kind: PerturbationKind, slug: &str| {
                cases.push(BenchmarkCase {
                    id: format!("h{hops}-{}-{slug}", clause.slug()),
                    query_text: print_query(ast),
                    hops,
                    extra_hop,
                    clause_type: clause,
                    injected_kind: kind,
                    has_year: has_year(ast),
                    gold_facts: gold_facts(ast),
                });
            };
            emit(&base, PerturbationKind::None, "clean");
            emit(&flip_direction(&base, &mut rng), PerturbationKind::FlippedDirection, "flip");
            emit(&nonsense_rel(&base, &mut rng), PerturbationKind::NonsenseRelLabel, "rel");
            emit(&nonsense_label(&base, &mut rng), PerturbationKind::NonsenseNodeLabel, "label");
            emit(
                &misleading_name(&base, schema, &mut rng),
                PerturbationKind::MissingNodeTypeMisleadingName,
                "missing",
            );
            let (ast, kind, slug) = if clause == ClauseType::Where {
                (
                    contradictory_where(&base),
                    PerturbationKind::ContradictoryWhere,
                    "contradictory",
                )
            } else {
                let illogical = (value_fault_index + seed) % 2 == 0;
                value_fault_index += 1;
                if illogical {
                    (
                        insert_value_fault(&base, clause, illogical_test()),
                        PerturbationKind::IllogicalWhereValue,
                        "illogical",
                    )
                } else {
                    (
                        insert_value_fault(&base, clause, ill_formed_test()),
                        PerturbationKind::IllFormedValueTest,
                        "illformed",
                    )
                }
            };
            emit(&ast, kind, slug);
        }
    }
    cases.sort_by(|a, b| a.id.cmp(&b.id));
    Ok(cases)
}

fn pick(rng: &mut ChaCha8Rng, n: usize) -> usize {
    rng.random_range(0..n as u32) as usize
}

fn match_patterns_mut(ast: &mut QueryAst) -> Vec<&mut Pattern> {
    ast.clauses
        .iter_mut()
        .flat_map(|c| match c {
            Clause::Match { patterns, .. } => patterns.iter_mut().collect::<Vec<_>>(),
            _ => Vec::new(),
        })
        .collect()
}

fn flip_direction(base: &QueryAst, rng: &mut ChaCha8Rng) -> QueryAst {
    let mut ast = base.clone();
    let mut rels: Vec<_> = match_patterns_mut(&mut ast)
        .into_iter()
        .flat_map(|p| p.steps.iter_mut().map(|(r, _)| r))
        .collect();
    let i = pick(rng, rels.len());
    rels[i].direction = rels[i].direction.reversed();
    ast
}

fn nonsense_rel(base: &QueryAst, rng: &mut ChaCha8Rng) -> QueryAst {
    let mut ast = base.clone();
    let mut rels: Vec<_> = match_patterns_mut(&mut ast)
        .into_iter()
        .flat_map(|p| p.steps.iter_mut().map(|(r, _)| r))
        .collect();
    let i = pick(rng, rels.len());
    let word = NONSENSE_RELS[pick(rng, NONSENSE_RELS.len())];
    rels[i].rel_type = Some(word.to_string());
    ast
}

fn nonsense_label(base: &QueryAst, rng: &mut ChaCha8Rng) -> QueryAst {
    let mut ast = base.clone();
    let mut nodes: Vec<_> = match_patterns_mut(&mut ast)
        .into_iter()
        .flat_map(|p| p.nodes_mut().collect::<Vec<_>>())
        .filter(|n| n.label.is_some())
        .collect();
    let i = pick(rng, nodes.len());
    let word = NONSENSE_LABELS[pick(rng, NONSENSE_LABELS.len())];
    nodes[i].label = Some(word.to_string());
    ast
}

/// Drops one node label and renames its variable after a different label.
fn misleading_name(base: &QueryAst, schema: &GraphSchema, rng: &mut ChaCha8Rng) -> QueryAst {
    let mut ast = base.clone();
    let labeled: Vec<(String, String)> = ast
        .match_patterns()
        .flat_map(|p| p.nodes())
        .filter_map(|n| Some((n.variable.clone()?, n.label.clone()?)))
        .collect();
    let (var, label) = labeled[pick(rng, labeled.len())].clone();
    let others: Vec<&String> = schema.node_labels.keys().filter(|l| **l != label).collect();
    let new_name = others[pick(rng, others.len())].to_lowercase();
    for p in match_patterns_mut(&mut ast) {
        for n in p.nodes_mut() {
            if n.variable.as_deref() == Some(var.as_str()) {
                n.label = None;
            }
        }
    }
    rename_variable(&mut ast, &var, &new_name);
    ast
}

fn contradictory_where(base: &QueryAst) -> QueryAst {
    let mut ast = base.clone();
    let year = || ValueExpr::property("m", "release_year");
    for c in &mut ast.clauses {
        if let Clause::Where(e) = c {
            *e = BoolExpr::and(
                BoolExpr::compare(CompareOp::Gt, year(), ValueExpr::Literal(Literal::Integer(2020))),
                BoolExpr::compare(CompareOp::Lt, year(), ValueExpr::Literal(Literal::Integer(2019))),
            );
        }
    }
    ast
}

fn illogical_test() -> BoolExpr {
    BoolExpr::compare(
        CompareOp::Eq,
        ValueExpr::property("m", "release_year"),
        ValueExpr::Literal(Literal::Integer(-1)),
    )
}

fn ill_formed_test() -> BoolExpr {
    BoolExpr::compare(
        CompareOp::Gt,
        ValueExpr::property("m", "title"),
        ValueExpr::Literal(Literal::Integer(2020)),
    )
}

/// Places a faulty value test where the clause type naturally filters:
/// a WHERE after the first MATCH, the WITH filter, or the CASE condition.
fn insert_value_fault(base: &QueryAst, clause: ClauseType, fault: BoolExpr) -> QueryAst {
    let mut ast = base.clone();
    match clause {
        ClauseType::WithChain => {
            for c in &mut ast.clauses {
                if let Clause::With { filter, .. } = c {
                    *filter = Some(fault);
                    break;
                }
            }
        }
        ClauseType::Case => {
            if let Some(Clause::Return(r)) = ast.clauses.last_mut() {
                for p in &mut r.projections {
                    if let ValueExpr::Case { branches, .. } = &mut p.expr {
                        let cond = branches[0].0.clone();
                        branches[0].0 = BoolExpr::and(cond, fault);
                        break;
                    }
                }
            }
        }
        _ => ast.clauses.insert(1, Clause::Where(fault)),
    }
    ast
}

pub fn rename_variable(ast: &mut QueryAst, from: &str, to: &str) {
    fn name(s: &mut String, from: &str, to: &str) {
        if s == from {
            *s = to.to_string();
        }
    }
    fn pattern(p: &mut Pattern, from: &str, to: &str) {
        for n in p.nodes_mut() {
            if let Some(v) = &mut n.variable {
                name(v, from, to);
            }
        }
        for (r, _) in &mut p.steps {
            if let Some(v) = &mut r.variable {
                name(v, from, to);
            }
        }
    }
    fn value(e: &mut ValueExpr, from: &str, to: &str) {
        match e {
            ValueExpr::Property { variable, .. } => name(variable, from, to),
            ValueExpr::Variable(v) => name(v, from, to),
            ValueExpr::Literal(_) => {}
            ValueExpr::Aggregate { arg, .. } => {
                if let AggregateArg::Expr(inner) = arg {
                    value(inner, from, to);
                }
            }
            ValueExpr::Case {
                branches,
                otherwise,
            } => {
                for (c, v) in branches {
                    boolean(c, from, to);
                    value(v, from, to);
                }
                value(otherwise, from, to);
            }
            ValueExpr::Arithmetic { lhs, rhs, .. } => {
                value(lhs, from, to);
                value(rhs, from, to);
            }
            ValueExpr::Function { args, .. } => {
                for a in args {
                    value(a, from, to);
                }
            }
        }
    }
    fn boolean(e: &mut BoolExpr, from: &str, to: &str) {
        match e {
            BoolExpr::Compare { lhs, rhs, .. } | BoolExpr::Contains { lhs, rhs } => {
                value(lhs, from, to);
                value(rhs, from, to);
            }
            BoolExpr::And(a, b) | BoolExpr::Or(a, b) => {
                boolean(a, from, to);
                boolean(b, from, to);
            }
            BoolExpr::Not(a) => boolean(a, from, to),
            BoolExpr::Pattern(p) => pattern(p, from, to),
            BoolExpr::IsNull(v) | BoolExpr::IsNotNull(v) => value(v, from, to),
        }
    }
    for c in &mut ast.clauses {
        match c {
            Clause::Match { patterns, .. } => {
                for p in patterns {
                    pattern(p, from, to);
                }
            }
            Clause::Where(e) => boolean(e, from, to),
            Clause::With {
                projections,
                filter,
                ..
            } => {
                for p in projections {
                    value(&mut p.expr, from, to);
                    if let Some(a) = &mut p.alias {
                        name(a, from, to);
                    }
                }
                if let Some(f) = filter {
                    boolean(f, from, to);
                }
            }
            Clause::Return(r) => {
                for p in &mut r.projections {
                    value(&mut p.expr, from, to);
                }
                for k in &mut r.order_by {
                    value(&mut k.expr, from, to);
                }
            }
        }
    }
}

fn is_year_key(key: &str) -> bool {
    key.to_lowercase().contains("year")
}

/// Property key, operator and literal of a `prop op literal` comparison.
fn property_test(e: &BoolExpr) -> Option<(&str, &str, CompareOp, &Literal)> {
    if let BoolExpr::Compare { op, lhs, rhs } = e {
        match (lhs, rhs) {
            (ValueExpr::Property { variable, key }, ValueExpr::Literal(l)) => {
                Some((variable, key, *op, l))
            }
            (ValueExpr::Literal(l), ValueExpr::Property { variable, key }) => {
                Some((variable, key, op.mirrored(), l))
            }
            _ => None,
        }
    } else {
        None
    }
}

fn all_conditions(ast: &QueryAst) -> Vec<&BoolExpr> {
    fn from_value<'a>(e: &'a ValueExpr, out: &mut Vec<&'a BoolExpr>) {
        match e {
            ValueExpr::Case {
                branches,
                otherwise,
            } => {
                for (c, v) in branches {
                    out.push(c);
                    from_value(v, out);
                }
                from_value(otherwise, out);
            }
            ValueExpr::Aggregate {
                arg: AggregateArg::Expr(inner),
                ..
            } => from_value(inner, out),
            ValueExpr::Arithmetic { lhs, rhs, .. } => {
                from_value(lhs, out);
                from_value(rhs, out);
            }
            ValueExpr::Function { args, .. } => args.iter().for_each(|a| from_value(a, out)),
            _ => {}
        }
    }
    let mut out = Vec::new();
    for c in &ast.clauses {
        match c {
            Clause::Where(e) => out.push(e),
            Clause::With {
                projections,
                filter,
                ..
            } => {
                projections.iter().for_each(|p| from_value(&p.expr, &mut out));
                out.extend(filter.iter());
            }
            Clause::Return(r) => r.projections.iter().for_each(|p| from_value(&p.expr, &mut out)),
            Clause::Match { .. } => {}
        }
    }
    out
}

pub fn has_year(ast: &QueryAst) -> bool {
    all_conditions(ast)
        .into_iter()
        .flat_map(|e| e.conjuncts())
        .any(|c| property_test(c).is_some_and(|(_, k, _, _)| is_year_key(k)))
}

/// `key op literal`, the normalized form used for filters and year constraints.
pub fn predicate_text(key: &str, op: CompareOp, lit: &Literal) -> String {
    format!("{key} {} {lit}", op.symbol())
}

pub fn gold_facts(ast: &QueryAst) -> FactSet {
    let mut facts = FactSet::default();
    for p in ast.match_patterns() {
        for n in p.nodes() {
            if let Some(v) = &n.variable {
                facts.entities.insert(Entity {
                    variable: v.clone(),
                    label: n.label.clone(),
                });
            } else if let Some(l) = &n.label {
                facts.entities.insert(Entity {
                    variable: String::new(),
                    label: Some(l.clone()),
                });
            }
            for (k, v) in &n.properties {
                facts.filters.insert(predicate_text(k, CompareOp::Eq, v));
            }
        }
        for (left, rel, right) in p.edges() {
            let Some(t) = &rel.rel_type else { continue };
            let (from, to) = match rel.direction {
                Direction::RightToLeft => (right, left),
                _ => (left, right),
            };
            facts.relations.insert(Relation {
                rel_type: t.clone(),
                from_var: from.variable.clone().unwrap_or_default(),
                to_var: to.variable.clone().unwrap_or_default(),
            });
        }
    }
    // An unlabeled occurrence of an already labeled variable adds nothing.
    let labeled: BTreeSet<String> = facts
        .entities
        .iter()
        .filter(|e| e.label.is_some())
        .map(|e| e.variable.clone())
        .collect();
    facts
        .entities
        .retain(|e| e.label.is_some() || !labeled.contains(&e.variable));

    let mut years = Vec::new();
    for cond in all_conditions(ast) {
        for c in cond.conjuncts() {
            match property_test(c) {
                Some((_, key, op, lit)) if is_year_key(key) => years.push(predicate_text(key, op, lit)),
                Some((_, key, op, lit)) => {
                    facts.filters.insert(predicate_text(key, op, lit));
                }
                None => {
                    facts.filters.insert(c.to_string());
                }
            }
        }
    }
    if !years.is_empty() {
        facts.year_constraint = Some(years.join(" AND "));
    }
    if let Some(r) = ast.return_clause() {
        for p in &r.projections {
            facts.returns.insert(match &p.alias {
                Some(a) => a.clone(),
                None => p.expr.to_string(),
            });
        }
    }
    facts
}

pub fn export_benchmark(cases: &[BenchmarkCase], path: impl AsRef<Path>) -> Result<(), BenchmarkError> {
    let mut sorted: Vec<&BenchmarkCase> = cases.iter().collect();
    sorted.sort_by(|a, b| a.id.cmp(&b.id));
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    for c in sorted {
        serde_json::to_writer(&mut out, c).map_err(std::io::Error::from)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

pub fn import_benchmark(path: impl AsRef<Path>) -> Result<Vec<BenchmarkCase>, BenchmarkError> {
    let reader = std::io::BufReader::new(std::fs::File::open(path)?);
    let mut cases = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        cases.push(
            serde_json::from_str(&line).map_err(|source| BenchmarkError::Decode {
                line: i + 1,
                source,
            })?,
        );
    }
    Ok(cases)
}
