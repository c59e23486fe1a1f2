use super::graph::PropertyGraph;
use super::value::Value;
use crate::syntax::*;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl ResultTable {
    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Rows sorted by the total value order, for order-insensitive comparison.
    pub fn sorted_rows(&self) -> Vec<Vec<Value>> {
        let mut rows = self.rows.clone();
        rows.sort();
        rows
    }

    /// Column-keyed JSON records with nodes rendered as `(:Label {..})`.
    pub fn to_records(&self, graph: &PropertyGraph) -> Vec<serde_json::Map<String, serde_json::Value>> {
        self.rows
            .iter()
            .map(|row| {
                self.columns
                    .iter()
                    .zip(row)
                    .map(|(c, v)| (c.clone(), graph.render(v)))
                    .collect()
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExecError {
    #[error("type error: {0}")]
    TypeError(String),
    #[error("variable `{0}` is not bound")]
    UnknownVariable(String),
    #[error("invalid query: {0}")]
    InvalidQuery(String),
}

/// Variable bindings of one intermediate row.
pub type Binding = BTreeMap<String, Value>;

type Res<T> = Result<T, ExecError>;

pub fn execute(ast: &QueryAst, graph: &PropertyGraph) -> Result<ResultTable, ExecError> {
    Executor { graph }.run(ast)
}

struct Executor<'g> {
    graph: &'g PropertyGraph,
}

impl<'g> Executor<'g> {
    fn run(&self, ast: &QueryAst) -> Res<ResultTable> {
        let mut rows: Vec<Binding> = vec![Binding::new()];
        let mut i = 0;
        while i < ast.clauses.len() {
            match &ast.clauses[i] {
                Clause::Match { patterns, optional } => {
                    let filter = match ast.clauses.get(i + 1) {
                        Some(Clause::Where(w)) => {
                            i += 1;
                            Some(w)
                        }
                        _ => None,
                    };
                    rows = self.match_clause(rows, patterns, *optional, filter)?;
                }
                Clause::Where(w) => rows = self.filter(rows, w)?,
                Clause::With {
                    projections,
                    distinct,
                    filter,
                } => {
                    let (cols, values) = self.project(&rows, projections, *distinct)?;
                    rows = values
                        .into_iter()
                        .map(|v| cols.iter().cloned().zip(v).collect())
                        .collect();
                    if let Some(f) = filter {
                        rows = self.filter(rows, f)?;
                    }
                }
                Clause::Return(r) => return self.finish(&rows, r),
            }
            i += 1;
        }
        Err(ExecError::InvalidQuery("query has no RETURN clause".into()))
    }

    fn filter(&self, rows: Vec<Binding>, cond: &BoolExpr) -> Res<Vec<Binding>> {
        let mut out = Vec::with_capacity(rows.len());
        for row in rows {
            if self.eval_bool(cond, &row)? == Some(true) {
                out.push(row);
            }
        }
        Ok(out)
    }

    fn match_clause(
        &self,
        rows: Vec<Binding>,
        patterns: &[Pattern],
        optional: bool,
        filter: Option<&BoolExpr>,
    ) -> Res<Vec<Binding>> {
        let mut out = Vec::new();
        for mut row in rows {
            let mut found = Vec::new();
            self.match_patterns(patterns, 0, &mut row, &mut Vec::new(), &mut found, None);
            let found = match filter {
                Some(f) => self.filter(found, f)?,
                None => found,
            };
            if found.is_empty() && optional {
                for v in pattern_variables(patterns) {
                    row.entry(v).or_insert(Value::Null);
                }
                out.push(row);
            } else {
                out.extend(found);
            }
        }
        Ok(out)
    }

    /// Enumerates embeddings of `patterns[pi..]` extending `row`. Nodes may
    /// repeat; a relationship is used at most once per clause.
    fn match_patterns(
        &self,
        patterns: &[Pattern],
        pi: usize,
        row: &mut Binding,
        used: &mut Vec<usize>,
        out: &mut Vec<Binding>,
        cap: Option<usize>,
    ) {
        if cap.is_some_and(|c| out.len() >= c) {
            return;
        }
        let Some(p) = patterns.get(pi) else {
            out.push(row.clone());
            return;
        };
        let candidates: Vec<usize> = match p.start.variable.as_ref().and_then(|v| row.get(v)) {
            Some(Value::Node(n)) => vec![*n],
            Some(_) => return,
            None => (0..self.graph.nodes().len()).collect(),
        };
        for n in candidates {
            if !self.node_ok(&p.start, n) {
                continue;
            }
            let fresh = bind(row, p.start.variable.as_deref(), Value::Node(n));
            self.match_steps(patterns, pi, 0, n, row, used, out, cap);
            unbind(row, p.start.variable.as_deref(), fresh);
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn match_steps(
        &self,
        patterns: &[Pattern],
        pi: usize,
        step: usize,
        cur: usize,
        row: &mut Binding,
        used: &mut Vec<usize>,
        out: &mut Vec<Binding>,
        cap: Option<usize>,
    ) {
        let p = &patterns[pi];
        let Some((rel, np)) = p.steps.get(step) else {
            self.match_patterns(patterns, pi + 1, row, used, out, cap);
            return;
        };
        let g = self.graph;
        let mut hops: Vec<(usize, usize)> = Vec::new();
        if rel.direction != Direction::RightToLeft {
            hops.extend(g.outgoing(cur).iter().map(|&e| (e, g.edge(e).to)));
        }
        if rel.direction != Direction::LeftToRight {
            hops.extend(
                g.incoming(cur)
                    .iter()
                    .filter(|&&e| rel.direction != Direction::Undirected || g.edge(e).from != g.edge(e).to)
                    .map(|&e| (e, g.edge(e).from)),
            );
        }
        for (e, next) in hops {
            if cap.is_some_and(|c| out.len() >= c) {
                return;
            }
            if used.contains(&e) || rel.rel_type.as_ref().is_some_and(|t| *t != g.edge(e).rel_type) {
                continue;
            }
            if !consistent(row, rel.variable.as_deref(), &Value::Edge(e))
                || !consistent(row, np.variable.as_deref(), &Value::Node(next))
                || !self.node_ok(np, next)
            {
                continue;
            }
            used.push(e);
            let fresh_r = bind(row, rel.variable.as_deref(), Value::Edge(e));
            let fresh_n = bind(row, np.variable.as_deref(), Value::Node(next));
            self.match_steps(patterns, pi, step + 1, next, row, used, out, cap);
            unbind(row, np.variable.as_deref(), fresh_n);
            unbind(row, rel.variable.as_deref(), fresh_r);
            used.pop();
        }
    }

    fn node_ok(&self, np: &NodePattern, n: usize) -> bool {
        let node = self.graph.node(n);
        if np.label.as_ref().is_some_and(|l| !node.labels.contains(l)) {
            return false;
        }
        np.properties.iter().all(|(k, lit)| {
            node.properties
                .get(k)
                .is_some_and(|v| v.equals(&Value::from(lit)) == Some(true))
        })
    }

    fn eval(&self, e: &ValueExpr, row: &Binding) -> Res<Value> {
        match e {
            ValueExpr::Literal(l) => Ok(Value::from(l)),
            ValueExpr::Variable(v) => row
                .get(v)
                .cloned()
                .ok_or_else(|| ExecError::UnknownVariable(v.clone())),
            ValueExpr::Property { variable, key } => {
                let base = row
                    .get(variable)
                    .ok_or_else(|| ExecError::UnknownVariable(variable.clone()))?;
                self.property(base, key)
            }
            ValueExpr::Aggregate { kind, .. } => Err(ExecError::InvalidQuery(format!(
                "{} is not allowed here",
                kind.keyword()
            ))),
            ValueExpr::Case {
                branches,
                otherwise,
            } => {
                for (cond, val) in branches {
                    if self.eval_bool(cond, row)? == Some(true) {
                        return self.eval(val, row);
                    }
                }
                self.eval(otherwise, row)
            }
            ValueExpr::Arithmetic { op, lhs, rhs } => {
                let (a, b) = (self.eval(lhs, row)?, self.eval(rhs, row)?);
                a.arithmetic(*op, &b).map_err(ExecError::TypeError)
            }
            ValueExpr::Function { name, args } => {
                let vals = args
                    .iter()
                    .map(|a| self.eval(a, row))
                    .collect::<Res<Vec<_>>>()?;
                call_function(name, vals)
            }
        }
    }

    fn property(&self, base: &Value, key: &str) -> Res<Value> {
        let props = match base {
            Value::Null => return Ok(Value::Null),
            Value::Node(n) => &self.graph.node(*n).properties,
            Value::Edge(e) => &self.graph.edge(*e).properties,
            Value::Map(m) => m,
            other => {
                return Err(ExecError::TypeError(format!(
                    "cannot read property `{key}` of a {}",
                    other.type_name()
                )))
            }
        };
        Ok(props.get(key).cloned().unwrap_or(Value::Null))
    }

    fn eval_bool(&self, e: &BoolExpr, row: &Binding) -> Res<Option<bool>> {
        Ok(match e {
            BoolExpr::Compare { op, lhs, rhs } => {
                self.eval(lhs, row)?.compare(*op, &self.eval(rhs, row)?)
            }
            BoolExpr::Contains { lhs, rhs } => {
                match (self.eval(lhs, row)?, self.eval(rhs, row)?) {
                    (Value::Null, _) | (_, Value::Null) => None,
                    (Value::Str(a), Value::Str(b)) => Some(a.contains(&b)),
                    (a, b) => {
                        return Err(ExecError::TypeError(format!(
                            "CONTAINS expects strings, found {} and {}",
                            a.type_name(),
                            b.type_name()
                        )))
                    }
                }
            }
            BoolExpr::And(a, b) => match (self.eval_bool(a, row)?, self.eval_bool(b, row)?) {
                (Some(false), _) | (_, Some(false)) => Some(false),
                (Some(true), Some(true)) => Some(true),
                _ => None,
            },
            BoolExpr::Or(a, b) => match (self.eval_bool(a, row)?, self.eval_bool(b, row)?) {
                (Some(true), _) | (_, Some(true)) => Some(true),
                (Some(false), Some(false)) => Some(false),
                _ => None,
            },
            BoolExpr::Not(a) => self.eval_bool(a, row)?.map(|b| !b),
            BoolExpr::Pattern(p) => {
                let mut scratch = row.clone();
                let mut found = Vec::new();
                self.match_patterns(
                    std::slice::from_ref(p),
                    0,
                    &mut scratch,
                    &mut Vec::new(),
                    &mut found,
                    Some(1),
                );
                Some(!found.is_empty())
            }
            BoolExpr::IsNull(v) => Some(self.eval(v, row)?.is_null()),
            BoolExpr::IsNotNull(v) => Some(!self.eval(v, row)?.is_null()),
        })
    }

    /// Evaluates projections, grouping by the non-aggregate ones when any
    /// projection aggregates.
    fn project(
        &self,
        rows: &[Binding],
        projections: &[Projection],
        distinct: bool,
    ) -> Res<(Vec<String>, Vec<Vec<Value>>)> {
        let cols: Vec<String> = projections.iter().map(column_name).collect();
        let aggregating = projections.iter().any(|p| p.expr.contains_aggregate());
        let mut out = Vec::new();
        if aggregating {
            let keys: Vec<usize> = (0..projections.len())
                .filter(|&i| !projections[i].expr.contains_aggregate())
                .collect();
            let mut index: BTreeMap<Vec<Value>, usize> = BTreeMap::new();
            let mut groups: Vec<(Vec<Value>, Vec<&Binding>)> = Vec::new();
            for row in rows {
                let key = keys
                    .iter()
                    .map(|&i| self.eval(&projections[i].expr, row))
                    .collect::<Res<Vec<_>>>()?;
                match index.get(&key) {
                    Some(&g) => groups[g].1.push(row),
                    None => {
                        index.insert(key.clone(), groups.len());
                        groups.push((key, vec![row]));
                    }
                }
            }
            if groups.is_empty() && keys.is_empty() {
                groups.push((Vec::new(), Vec::new()));
            }
            for (key, members) in groups {
                let mut key_iter = key.into_iter();
                let mut values = Vec::with_capacity(projections.len());
                for p in projections {
                    if p.expr.contains_aggregate() {
                        values.push(self.eval_grouped(&p.expr, &members)?);
                    } else {
                        values.push(key_iter.next().expect("key per grouping projection"));
                    }
                }
                out.push(values);
            }
        } else {
            for row in rows {
                out.push(
                    projections
                        .iter()
                        .map(|p| self.eval(&p.expr, row))
                        .collect::<Res<Vec<_>>>()?,
                );
            }
        }
        if distinct {
            let mut seen = BTreeSet::new();
            out.retain(|r| seen.insert(r.clone()));
        }
        Ok((cols, out))
    }

    fn eval_grouped(&self, e: &ValueExpr, members: &[&Binding]) -> Res<Value> {
        match e {
            ValueExpr::Aggregate {
                kind,
                arg,
                distinct,
            } => self.aggregate(*kind, arg, *distinct, members),
            ValueExpr::Arithmetic { op, lhs, rhs } => {
                let a = self.eval_grouped(lhs, members)?;
                let b = self.eval_grouped(rhs, members)?;
                a.arithmetic(*op, &b).map_err(ExecError::TypeError)
            }
            ValueExpr::Function { name, args } => {
                let vals = args
                    .iter()
                    .map(|a| self.eval_grouped(a, members))
                    .collect::<Res<Vec<_>>>()?;
                call_function(name, vals)
            }
            ValueExpr::Case { branches, .. }
                if branches.iter().any(|(c, _)| c.contains_aggregate()) =>
            {
                Err(ExecError::InvalidQuery(
                    "aggregates inside CASE conditions are not supported".into(),
                ))
            }
            ValueExpr::Case {
                branches,
                otherwise,
            } => {
                let Some(rep) = members.first() else {
                    return Ok(Value::Null);
                };
                for (cond, val) in branches {
                    if self.eval_bool(cond, rep)? == Some(true) {
                        return self.eval_grouped(val, members);
                    }
                }
                self.eval_grouped(otherwise, members)
            }
            other => match members.first() {
                Some(rep) => self.eval(other, rep),
                None => Ok(Value::Null),
            },
        }
    }

    fn aggregate(
        &self,
        kind: AggregateKind,
        arg: &AggregateArg,
        distinct: bool,
        members: &[&Binding],
    ) -> Res<Value> {
        let expr = match arg {
            AggregateArg::Star => return Ok(Value::Int(members.len() as i64)),
            AggregateArg::Expr(e) => e,
        };
        let mut values = Vec::new();
        let mut seen = BTreeSet::new();
        for row in members {
            let v = self.eval(expr, row)?;
            if v.is_null() || (distinct && !seen.insert(v.clone())) {
                continue;
            }
            values.push(v);
        }
        match kind {
            AggregateKind::Count => Ok(Value::Int(values.len() as i64)),
            AggregateKind::Collect => Ok(Value::List(values)),
            AggregateKind::Sum => {
                let mut acc = Value::Int(0);
                for v in values {
                    if v.as_f64().is_none() {
                        return Err(ExecError::TypeError(format!(
                            "SUM expects numbers, found {}",
                            v.type_name()
                        )));
                    }
                    acc = acc.arithmetic(ArithOp::Add, &v).map_err(ExecError::TypeError)?;
                }
                Ok(acc)
            }
        }
    }

    fn finish(&self, rows: &[Binding], r: &ReturnClause) -> Res<ResultTable> {
        let (columns, mut out) = self.project(rows, &r.projections, r.distinct)?;
        if !r.order_by.is_empty() {
            let keys = r
                .order_by
                .iter()
                .map(|k| {
                    let idx = r.projections.iter().position(|p| {
                        p.expr == k.expr
                            || matches!((&k.expr, &p.alias), (ValueExpr::Variable(v), Some(a)) if v == a)
                    });
                    idx.map(|i| (i, k.descending)).ok_or_else(|| {
                        ExecError::InvalidQuery(format!("ORDER BY key `{}` is not projected", k.expr))
                    })
                })
                .collect::<Res<Vec<_>>>()?;
            out.sort_by(|a, b| {
                for &(i, desc) in &keys {
                    let o = order_nulls_last(&a[i], &b[i], desc);
                    if o != Ordering::Equal {
                        return o;
                    }
                }
                Ordering::Equal
            });
        }
        if let Some(limit) = r.limit {
            out.truncate(usize::try_from(limit).unwrap_or(usize::MAX));
        }
        Ok(ResultTable { columns, rows: out })
    }
}

fn order_nulls_last(a: &Value, b: &Value, descending: bool) -> Ordering {
    match (a.is_null(), b.is_null()) {
        (true, true) => Ordering::Equal,
        (true, false) => Ordering::Greater,
        (false, true) => Ordering::Less,
        _ if descending => b.total_cmp(a),
        _ => a.total_cmp(b),
    }
}

fn call_function(name: &str, args: Vec<Value>) -> Res<Value> {
    match (name.to_ascii_lowercase().as_str(), args.as_slice()) {
        ("tofloat", [v]) => match v {
            Value::Null => Ok(Value::Null),
            Value::Int(i) => Ok(Value::Float(*i as f64)),
            Value::Float(f) => Ok(Value::Float(*f)),
            Value::Str(s) => Ok(s.trim().parse::<f64>().map_or(Value::Null, Value::Float)),
            other => Err(ExecError::TypeError(format!(
                "toFloat cannot convert a {}",
                other.type_name()
            ))),
        },
        _ => Err(ExecError::InvalidQuery(format!(
            "unsupported function {name}/{}",
            args.len()
        ))),
    }
}

pub(crate) fn column_name(p: &Projection) -> String {
    match &p.alias {
        Some(a) => a.clone(),
        None => p.expr.to_string(),
    }
}

fn pattern_variables(patterns: &[Pattern]) -> Vec<String> {
    let mut vars = Vec::new();
    for p in patterns {
        vars.extend(p.nodes().filter_map(|n| n.variable.clone()));
        vars.extend(p.rels().filter_map(|r| r.variable.clone()));
    }
    vars
}

fn consistent(row: &Binding, var: Option<&str>, value: &Value) -> bool {
    match var.and_then(|v| row.get(v)) {
        Some(bound) => bound == value,
        None => true,
    }
}

fn bind(row: &mut Binding, var: Option<&str>, value: Value) -> bool {
    match var {
        Some(v) if !row.contains_key(v) => {
            row.insert(v.to_string(), value);
            true
        }
        _ => false,
    }
}

fn unbind(row: &mut Binding, var: Option<&str>, fresh: bool) {
    if fresh {
        if let Some(v) = var {
            row.remove(v);
        }
    }
}
