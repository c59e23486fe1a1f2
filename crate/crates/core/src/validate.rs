//! Schema-aware fault detection over parsed queries.

use crate::schema::{Domain, GraphSchema, PropType};
use crate::syntax::{
    check_scope, AggregateArg, BoolExpr, Clause, CompareOp, Direction, Literal, NodePattern,
    Pattern, QueryAst, ScopeError, ValueExpr,
};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PerturbationKind {
    FlippedDirection,
    NonsenseRelLabel,
    NonsenseNodeLabel,
    MissingNodeTypeMisleadingName,
    ContradictoryWhere,
    IllogicalWhereValue,
    IllFormedValueTest,
    None,
}

impl PerturbationKind {
    pub const ALL_FAULTS: [PerturbationKind; 7] = [
        PerturbationKind::FlippedDirection,
        PerturbationKind::NonsenseRelLabel,
        PerturbationKind::NonsenseNodeLabel,
        PerturbationKind::ContradictoryWhere,
        PerturbationKind::IllFormedValueTest,
        PerturbationKind::IllogicalWhereValue,
        PerturbationKind::MissingNodeTypeMisleadingName,
    ];

    /// Lower is more severe.
    fn rank(self) -> usize {
        Self::ALL_FAULTS
            .iter()
            .position(|k| *k == self)
            .unwrap_or(usize::MAX)
    }

    pub fn name(self) -> &'static str {
        match self {
            PerturbationKind::FlippedDirection => "FlippedDirection",
            PerturbationKind::NonsenseRelLabel => "NonsenseRelLabel",
            PerturbationKind::NonsenseNodeLabel => "NonsenseNodeLabel",
            PerturbationKind::MissingNodeTypeMisleadingName => "MissingNodeTypeMisleadingName",
            PerturbationKind::ContradictoryWhere => "ContradictoryWhere",
            PerturbationKind::IllogicalWhereValue => "IllogicalWhereValue",
            PerturbationKind::IllFormedValueTest => "IllFormedValueTest",
            PerturbationKind::None => "None",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL_FAULTS
            .into_iter()
            .chain([PerturbationKind::None])
            .find(|k| k.name() == s)
    }
}

impl fmt::Display for PerturbationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub kind: PerturbationKind,
    /// Path into the AST, e.g. `clauses[0].patterns[0].steps[1]`.
    pub location: String,
    pub message: String,
    pub evidence: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize)]
pub enum ValidateError {
    #[error("unknown variable `{name}`")]
    UnknownVariable { name: String },
    #[error(transparent)]
    Scope(ScopeError),
}

impl From<ScopeError> for ValidateError {
    fn from(e: ScopeError) -> Self {
        match e {
            ScopeError::UnknownVariable { name } => ValidateError::UnknownVariable { name },
            other => ValidateError::Scope(other),
        }
    }
}

/// Highest-severity kind among the diagnostics, `None` when empty.
pub fn classify(diags: &[Diagnostic]) -> PerturbationKind {
    diags
        .iter()
        .map(|d| d.kind)
        .min_by_key(|k| k.rank())
        .unwrap_or(PerturbationKind::None)
}

pub fn validate(ast: &QueryAst, schema: &GraphSchema) -> Result<Vec<Diagnostic>, ValidateError> {
    check_scope(ast)?;
    let mut v = Validator {
        schema,
        var_labels: BTreeMap::new(),
        diags: Vec::new(),
        reported_nodes: BTreeSet::new(),
    };
    v.collect_labels(ast);
    let patterns = collect_patterns(ast);
    v.check_patterns(&patterns);
    v.check_missing_labels(&patterns);
    for (path, expr) in collect_predicates(ast) {
        v.check_predicate(&path, expr);
    }
    Ok(v.diags)
}

/// Every pattern of the query with its AST path: MATCH patterns first, then
/// pattern predicates.
fn collect_patterns(ast: &QueryAst) -> Vec<(String, &Pattern)> {
    let mut out = Vec::new();
    for (ci, c) in ast.clauses.iter().enumerate() {
        if let Clause::Match { patterns, .. } = c {
            for (pi, p) in patterns.iter().enumerate() {
                out.push((format!("clauses[{ci}].patterns[{pi}]"), p));
            }
        }
    }
    for (path, expr) in collect_predicates(ast) {
        let mut n = 0;
        walk_bool(expr, &mut |e| {
            if let BoolExpr::Pattern(p) = e {
                out.push((format!("{path}.pattern[{n}]"), p));
                n += 1;
            }
        });
    }
    out
}

/// Every boolean expression that filters rows or selects a CASE branch.
fn collect_predicates(ast: &QueryAst) -> Vec<(String, &BoolExpr)> {
    let mut out = Vec::new();
    for (ci, c) in ast.clauses.iter().enumerate() {
        match c {
            Clause::Where(e) => out.push((format!("clauses[{ci}].where"), e)),
            Clause::With {
                projections,
                filter,
                ..
            } => {
                for (i, p) in projections.iter().enumerate() {
                    case_conditions(&p.expr, &format!("clauses[{ci}].projections[{i}]"), &mut out);
                }
                if let Some(e) = filter {
                    out.push((format!("clauses[{ci}].where"), e));
                }
            }
            Clause::Return(r) => {
                for (i, p) in r.projections.iter().enumerate() {
                    case_conditions(&p.expr, &format!("clauses[{ci}].projections[{i}]"), &mut out);
                }
            }
            Clause::Match { .. } => {}
        }
    }
    out
}

fn case_conditions<'a>(e: &'a ValueExpr, path: &str, out: &mut Vec<(String, &'a BoolExpr)>) {
    match e {
        ValueExpr::Case {
            branches,
            otherwise,
        } => {
            for (i, (cond, value)) in branches.iter().enumerate() {
                out.push((format!("{path}.when[{i}]"), cond));
                case_conditions(value, path, out);
            }
            case_conditions(otherwise, path, out);
        }
        ValueExpr::Aggregate {
            arg: AggregateArg::Expr(inner),
            ..
        } => case_conditions(inner, path, out),
        ValueExpr::Arithmetic { lhs, rhs, .. } => {
            case_conditions(lhs, path, out);
            case_conditions(rhs, path, out);
        }
        ValueExpr::Function { args, .. } => {
            for a in args {
                case_conditions(a, path, out);
            }
        }
        _ => {}
    }
}

fn walk_bool<'a>(e: &'a BoolExpr, f: &mut impl FnMut(&'a BoolExpr)) {
    f(e);
    match e {
        BoolExpr::And(a, b) | BoolExpr::Or(a, b) => {
            walk_bool(a, f);
            walk_bool(b, f);
        }
        BoolExpr::Not(a) => walk_bool(a, f),
        _ => {}
    }
}

struct Validator<'s> {
    schema: &'s GraphSchema,
    var_labels: BTreeMap<String, String>,
    diags: Vec<Diagnostic>,
    /// Nodes (by variable or path) already blamed for a label problem.
    reported_nodes: BTreeSet<String>,
}

fn evidence<const N: usize>(pairs: [(&str, String); N]) -> BTreeMap<String, String> {
    pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

fn describe(label: Option<&str>) -> String {
    label.unwrap_or("an unlabeled node").to_string()
}

impl<'s> Validator<'s> {
    fn collect_labels(&mut self, ast: &QueryAst) {
        for (_, p) in collect_patterns(ast) {
            for n in p.nodes() {
                if let (Some(v), Some(l)) = (&n.variable, &n.label) {
                    self.var_labels.entry(v.clone()).or_insert_with(|| l.clone());
                }
            }
        }
        for c in &ast.clauses {
            if let Clause::With { projections, .. } = c {
                for p in projections {
                    if let (ValueExpr::Variable(src), Some(alias)) = (&p.expr, &p.alias) {
                        if let Some(l) = self.var_labels.get(src).cloned() {
                            self.var_labels.entry(alias.clone()).or_insert(l);
                        }
                    }
                }
            }
        }
    }

    fn label_of(&self, n: &NodePattern) -> Option<String> {
        n.label
            .clone()
            .or_else(|| n.variable.as_ref().and_then(|v| self.var_labels.get(v).cloned()))
    }

    fn node_key(n: &NodePattern, path: &str) -> String {
        match &n.variable {
            Some(v) => format!("var:{v}"),
            None => format!("path:{path}"),
        }
    }

    fn blame_label(&mut self, n: &NodePattern, path: &str, message: String, ev: BTreeMap<String, String>) {
        if self.reported_nodes.insert(Self::node_key(n, path)) {
            self.diags.push(Diagnostic {
                kind: PerturbationKind::NonsenseNodeLabel,
                location: path.to_string(),
                message,
                evidence: ev,
            });
        }
    }

    fn unknown_label(&mut self, n: &NodePattern, path: &str) {
        let label = self.label_of(n).unwrap_or_default();
        self.blame_label(
            n,
            path,
            format!("node label {label} does not exist in the schema"),
            evidence([("label", label.clone())]),
        );
    }

    fn check_patterns(&mut self, patterns: &[(String, &Pattern)]) {
        // Nodes next to a relationship type that is not in the schema are
        // not blamed separately.
        let mut covered: BTreeSet<String> = BTreeSet::new();
        for (path, p) in patterns {
            for (i, (left, rel, right)) in p.edges().enumerate() {
                let step_path = format!("{path}.steps[{i}]");
                let Some(t) = &rel.rel_type else { continue };
                if self.schema.has_rel_type(t) {
                    continue;
                }
                let (l, r) = (self.label_of(left), self.label_of(right));
                self.diags.push(Diagnostic {
                    kind: PerturbationKind::NonsenseRelLabel,
                    location: step_path,
                    message: format!(
                        "relationship {t} does not exist between {} and {}",
                        describe(l.as_deref()),
                        describe(r.as_deref())
                    ),
                    evidence: evidence([
                        ("rel_type", t.clone()),
                        ("left", l.unwrap_or_default()),
                        ("right", r.unwrap_or_default()),
                    ]),
                });
                covered.insert(Self::node_key(left, &node_path(path, i)));
                covered.insert(Self::node_key(right, &node_path(path, i + 1)));
            }
        }
        self.reported_nodes.extend(covered);

        for (path, p) in patterns {
            for (i, n) in p.nodes().enumerate() {
                if let Some(l) = self.label_of(n) {
                    if !self.schema.has_label(&l) {
                        self.unknown_label(n, &node_path(path, i));
                    }
                }
            }
            for (i, (left, rel, right)) in p.edges().enumerate() {
                let Some(t) = &rel.rel_type else { continue };
                if !self.schema.has_rel_type(t) {
                    continue;
                }
                let (l, r) = (self.label_of(left), self.label_of(right));
                if l.as_ref().is_some_and(|x| !self.schema.has_label(x))
                    || r.as_ref().is_some_and(|x| !self.schema.has_label(x))
                {
                    continue;
                }
                let pairs = self.schema.rel_lookup(t);
                let fits = |from: &Option<String>, to: &Option<String>| {
                    pairs.iter().any(|(f, tt)| {
                        from.as_ref().is_none_or(|x| x == f) && to.as_ref().is_none_or(|x| x == tt)
                    })
                };
                let (ok, reversed_ok) = match rel.direction {
                    Direction::LeftToRight => (fits(&l, &r), fits(&r, &l)),
                    Direction::RightToLeft => (fits(&r, &l), fits(&l, &r)),
                    Direction::Undirected => (fits(&l, &r) || fits(&r, &l), false),
                };
                if ok {
                    continue;
                }
                let step_path = format!("{path}.steps[{i}]");
                let (from, to) = match rel.direction {
                    Direction::RightToLeft => (&r, &l),
                    _ => (&l, &r),
                };
                let expected = pairs
                    .iter()
                    .map(|(f, tt)| format!("(:{f})-[:{t}]->(:{tt})"))
                    .collect::<Vec<_>>()
                    .join(", ");
                if reversed_ok {
                    self.diags.push(Diagnostic {
                        kind: PerturbationKind::FlippedDirection,
                        location: step_path,
                        message: format!(
                            "relationship {t} points the wrong way: the schema defines {expected} but the query goes from {} to {}",
                            describe(from.as_deref()),
                            describe(to.as_deref())
                        ),
                        evidence: evidence([
                            ("rel_type", t.clone()),
                            ("expected", expected),
                            ("found_from", from.clone().unwrap_or_default()),
                            ("found_to", to.clone().unwrap_or_default()),
                        ]),
                    });
                    continue;
                }
                // Known labels that the relationship cannot connect: blame the
                // endpoint(s) whose label never occurs on that side.
                let from_ok = from
                    .as_ref()
                    .is_none_or(|x| pairs.iter().any(|(f, _)| f == x));
                let to_ok = to.as_ref().is_none_or(|x| pairs.iter().any(|(_, tt)| tt == x));
                let (from_node, to_node, from_idx, to_idx) = match rel.direction {
                    Direction::RightToLeft => (right, left, i + 1, i),
                    _ => (left, right, i, i + 1),
                };
                let mut blame = Vec::new();
                if !from_ok {
                    blame.push((from_node, from_idx, from.clone()));
                }
                if !to_ok || blame.is_empty() {
                    blame.push((to_node, to_idx, to.clone()));
                }
                for (node, idx, label) in blame {
                    let label = label.unwrap_or_default();
                    self.blame_label(
                        node,
                        &node_path(path, idx),
                        format!("label {label} cannot be connected by {t}; the schema allows {expected}"),
                        evidence([
                            ("label", label.clone()),
                            ("rel_type", t.clone()),
                            ("expected", expected.clone()),
                        ]),
                    );
                }
            }
        }
    }

    fn check_missing_labels(&mut self, patterns: &[(String, &Pattern)]) {
        // label candidates inferred per unlabeled variable from adjacent edges
        let mut inferred: BTreeMap<String, Option<BTreeSet<String>>> = BTreeMap::new();
        let mut first_path: BTreeMap<String, String> = BTreeMap::new();
        let mut via: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        for (path, p) in patterns {
            for (i, n) in p.nodes().enumerate() {
                if let Some(v) = &n.variable {
                    if self.label_of(n).is_none() {
                        inferred.entry(v.clone()).or_insert(None);
                        first_path.entry(v.clone()).or_insert_with(|| node_path(path, i));
                    }
                }
            }
            for (left, rel, right) in p.edges() {
                let Some(t) = &rel.rel_type else { continue };
                let pairs = self.schema.rel_lookup(t);
                if pairs.is_empty() {
                    continue;
                }
                let sides: [(&NodePattern, &NodePattern, bool); 2] = match rel.direction {
                    Direction::LeftToRight => [(left, right, true), (right, left, false)],
                    Direction::RightToLeft => [(right, left, true), (left, right, false)],
                    Direction::Undirected => continue,
                };
                for (node, other, is_from) in sides {
                    let Some(v) = &node.variable else { continue };
                    if self.label_of(node).is_some() {
                        continue;
                    }
                    let other_label = self.label_of(other);
                    let set: BTreeSet<String> = pairs
                        .iter()
                        .filter(|(f, tt)| {
                            let o = if is_from { tt } else { f };
                            other_label.as_ref().is_none_or(|x| x == o)
                        })
                        .map(|(f, tt)| if is_from { f.clone() } else { tt.clone() })
                        .collect();
                    let slot = inferred.entry(v.clone()).or_insert(None);
                    *slot = Some(match slot.take() {
                        None => set,
                        Some(prev) => prev.intersection(&set).cloned().collect(),
                    });
                    via.entry(v.clone()).or_default().insert(t.clone());
                }
            }
        }
        for (var, set) in inferred {
            let Some(set) = set else { continue };
            if set.is_empty() {
                continue;
            }
            let name: String = var
                .to_lowercase()
                .chars()
                .filter(|c| !c.is_ascii_digit() && *c != '_')
                .collect();
            if name.len() < 3 {
                continue;
            }
            let suggested: BTreeSet<String> = self
                .schema
                .node_labels
                .keys()
                .filter(|l| {
                    let l = l.to_lowercase();
                    l.starts_with(&name) || name.starts_with(&l)
                })
                .cloned()
                .collect();
            if suggested.is_empty() || !suggested.is_disjoint(&set) {
                continue;
            }
            let key = format!("var:{var}");
            if !self.reported_nodes.insert(key) {
                continue;
            }
            let join = |s: &BTreeSet<String>| s.iter().cloned().collect::<Vec<_>>().join(" or ");
            let rels = join(&via[&var]).replace(" or ", ", ");
            self.diags.push(Diagnostic {
                kind: PerturbationKind::MissingNodeTypeMisleadingName,
                location: first_path[&var].clone(),
                message: format!(
                    "node {var} has no label and its name suggests {}, but {rels} requires {}",
                    join(&suggested),
                    join(&set)
                ),
                evidence: evidence([
                    ("variable", var.clone()),
                    ("suggested", join(&suggested)),
                    ("inferred", join(&set)),
                ]),
            });
        }
    }

    fn prop_label_type(&self, e: &ValueExpr) -> Option<(String, String, String, Option<PropType>)> {
        if let ValueExpr::Property { variable, key } = e {
            let label = self.var_labels.get(variable)?.clone();
            let ty = self.schema.property_type(&label, key);
            Some((variable.clone(), key.clone(), label, ty))
        } else {
            None
        }
    }

    fn check_predicate(&mut self, path: &str, expr: &BoolExpr) {
        // contradictions over the top-level conjunction
        let mut groups: BTreeMap<(String, String), Vec<Constraint>> = BTreeMap::new();
        let mut texts: BTreeMap<(String, String), Vec<String>> = BTreeMap::new();
        for c in expr.conjuncts() {
            if let Some((var, key, con)) = numeric_constraint(c) {
                texts.entry((var.clone(), key.clone())).or_default().push(c.to_string());
                groups.entry((var, key)).or_default().push(con);
            }
        }
        for ((var, key), cons) in groups {
            let integer = self
                .var_labels
                .get(&var)
                .and_then(|l| self.schema.property_type(l, &key))
                == Some(PropType::Integer);
            if !satisfiable(&cons, integer) {
                let shown = texts[&(var.clone(), key.clone())].join(" AND ");
                self.diags.push(Diagnostic {
                    kind: PerturbationKind::ContradictoryWhere,
                    location: path.to_string(),
                    message: format!("conditions on {var}.{key} cannot all hold: {shown}"),
                    evidence: evidence([
                        ("property", format!("{var}.{key}")),
                        ("constraints", shown.clone()),
                    ]),
                });
            }
        }

        let mut compares = Vec::new();
        walk_bool(expr, &mut |e| match e {
            BoolExpr::Compare { .. } | BoolExpr::Contains { .. } => compares.push(e),
            _ => {}
        });
        for e in compares {
            self.check_value_test(path, e);
        }
    }

    fn check_value_test(&mut self, path: &str, e: &BoolExpr) {
        let (op, prop, lit) = match e {
            BoolExpr::Compare { op, lhs, rhs } => match (lhs, rhs) {
                (p @ ValueExpr::Property { .. }, ValueExpr::Literal(l)) => (Some(*op), p, l),
                (ValueExpr::Literal(l), p @ ValueExpr::Property { .. }) => (Some(op.mirrored()), p, l),
                _ => return,
            },
            BoolExpr::Contains {
                lhs: p @ ValueExpr::Property { .. },
                rhs: ValueExpr::Literal(l),
            } => (None, p, l),
            _ => return,
        };
        let Some((var, key, label, ty)) = self.prop_label_type(prop) else {
            return;
        };
        let shown = e.to_string();
        let ill_formed = match (ty, op) {
            (Some(PropType::String), Some(op)) if op.is_ordering() => lit.is_numeric(),
            (Some(t), Some(op)) if t.is_numeric() && op.is_ordering() => {
                matches!(lit, Literal::String(_))
            }
            (Some(t), None) if t.is_numeric() => true,
            _ => false,
        };
        if ill_formed {
            let what = match lit {
                Literal::String(_) => "a string",
                _ => "a number",
            };
            let ty = ty.map(|t| t.to_string().to_lowercase()).unwrap_or_default();
            self.diags.push(Diagnostic {
                kind: PerturbationKind::IllFormedValueTest,
                location: path.to_string(),
                message: format!("{var}.{key} holds {ty} values but is compared with {what} in {shown}"),
                evidence: evidence([
                    ("property", format!("{label}.{key}")),
                    ("property_type", ty),
                    ("test", shown.clone()),
                ]),
            });
            return;
        }
        let Some(domain) = self.schema.domain(&label, &key) else {
            return;
        };
        let illogical = match (domain, op) {
            (Domain::Range { min, max }, Some(op)) => match lit.as_f64() {
                Some(a) => {
                    let integer = ty == Some(PropType::Integer);
                    let cons = [
                        Constraint { op, value: a },
                        Constraint { op: CompareOp::Ge, value: *min },
                        Constraint { op: CompareOp::Le, value: *max },
                    ];
                    !satisfiable(&cons, integer)
                }
                None => false,
            },
            (Domain::NonNumeric, Some(op)) => match lit {
                Literal::String(s) => s.trim().parse::<f64>().is_ok(),
                Literal::Integer(_) | Literal::Float(_) => !op.is_ordering(),
                _ => false,
            },
            _ => false,
        };
        if illogical {
            let range = match domain {
                Domain::Range { min, max } => format!("the plausible range [{min}, {max}]"),
                Domain::NonNumeric => "the non-numeric values it can hold".to_string(),
            };
            self.diags.push(Diagnostic {
                kind: PerturbationKind::IllogicalWhereValue,
                location: path.to_string(),
                message: format!("{shown} lies outside {range} of {label}.{key}"),
                evidence: evidence([
                    ("property", format!("{label}.{key}")),
                    ("test", shown),
                ]),
            });
        }
    }
}

fn node_path(pattern_path: &str, idx: usize) -> String {
    format!("{pattern_path}.nodes[{idx}]")
}

/// `x op value` for a single numeric property.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constraint {
    pub op: CompareOp,
    pub value: f64,
}

fn numeric_constraint(e: &BoolExpr) -> Option<(String, String, Constraint)> {
    let BoolExpr::Compare { op, lhs, rhs } = e else {
        return None;
    };
    let (op, prop, lit) = match (lhs, rhs) {
        (ValueExpr::Property { variable, key }, ValueExpr::Literal(l)) => (*op, (variable, key), l),
        (ValueExpr::Literal(l), ValueExpr::Property { variable, key }) => {
            (op.mirrored(), (variable, key), l)
        }
        _ => return None,
    };
    let value = lit.as_f64()?;
    Some((prop.0.clone(), prop.1.clone(), Constraint { op, value }))
}

/// Whether some value satisfies every constraint, over the integers when
/// `integer` is set and over the reals otherwise.
pub fn satisfiable(cons: &[Constraint], integer: bool) -> bool {
    // (value, inclusive)
    let mut lo: Option<(f64, bool)> = None;
    let mut hi: Option<(f64, bool)> = None;
    let mut excluded: Vec<f64> = Vec::new();
    let tighten_lo = |lo: &mut Option<(f64, bool)>, v: f64, inc: bool| {
        *lo = Some(match *lo {
            None => (v, inc),
            Some((cur, cinc)) if v > cur || (v == cur && !inc && cinc) => (v, inc),
            Some(c) => c,
        })
    };
    let tighten_hi = |hi: &mut Option<(f64, bool)>, v: f64, inc: bool| {
        *hi = Some(match *hi {
            None => (v, inc),
            Some((cur, cinc)) if v < cur || (v == cur && !inc && cinc) => (v, inc),
            Some(c) => c,
        })
    };
    for c in cons {
        match c.op {
            CompareOp::Eq => {
                tighten_lo(&mut lo, c.value, true);
                tighten_hi(&mut hi, c.value, true);
            }
            CompareOp::Ne => excluded.push(c.value),
            CompareOp::Gt => tighten_lo(&mut lo, c.value, false),
            CompareOp::Ge => tighten_lo(&mut lo, c.value, true),
            CompareOp::Lt => tighten_hi(&mut hi, c.value, false),
            CompareOp::Le => tighten_hi(&mut hi, c.value, true),
        }
    }
    if integer {
        let lo_i = lo.map(|(v, inc)| if inc { v.ceil() } else { v.floor() + 1.0 });
        let hi_i = hi.map(|(v, inc)| if inc { v.floor() } else { v.ceil() - 1.0 });
        match (lo_i, hi_i) {
            (Some(a), Some(b)) => {
                if a > b {
                    return false;
                }
                let count = b - a + 1.0;
                if count > excluded.len() as f64 {
                    return true;
                }
                let mut x = a;
                while x <= b {
                    if !excluded.contains(&x) {
                        return true;
                    }
                    x += 1.0;
                }
                false
            }
            _ => true,
        }
    } else {
        match (lo, hi) {
            (Some((a, ainc)), Some((b, binc))) => {
                if a > b {
                    false
                } else if a == b {
                    ainc && binc && !excluded.contains(&a)
                } else {
                    true
                }
            }
            _ => true,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(op: CompareOp, value: f64) -> Constraint {
        Constraint { op, value }
    }

    #[test]
    fn interval_cases() {
        use CompareOp::*;
        assert!(!satisfiable(&[c(Gt, 2020.0), c(Lt, 2019.0)], true));
        assert!(!satisfiable(&[c(Gt, 1.0), c(Lt, 2.0)], true));
        assert!(satisfiable(&[c(Gt, 1.0), c(Lt, 2.0)], false));
        assert!(!satisfiable(&[c(Ge, 1.0), c(Le, 1.0), c(Ne, 1.0)], false));
        assert!(!satisfiable(&[c(Eq, 1.5)], true));
        assert!(satisfiable(&[c(Ne, 3.0)], true));
        assert!(!satisfiable(&[c(Ge, 1.0), c(Le, 2.0), c(Ne, 1.0), c(Ne, 2.0)], true));
    }

    #[test]
    fn classify_priority() {
        let d = |kind| Diagnostic {
            kind,
            location: String::new(),
            message: String::new(),
            evidence: BTreeMap::new(),
        };
        assert_eq!(classify(&[]), PerturbationKind::None);
        assert_eq!(
            classify(&[
                d(PerturbationKind::MissingNodeTypeMisleadingName),
                d(PerturbationKind::IllogicalWhereValue),
                d(PerturbationKind::IllFormedValueTest),
            ]),
            PerturbationKind::IllFormedValueTest
        );
        assert_eq!(
            classify(&[
                d(PerturbationKind::NonsenseNodeLabel),
                d(PerturbationKind::FlippedDirection)
            ]),
            PerturbationKind::FlippedDirection
        );
    }
}
