use super::ast::*;
use serde::Serialize;
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize)]
pub enum ScopeError {
    #[error("variable `{name}` is not defined")]
    UnknownVariable { name: String },
    #[error("ORDER BY key `{key}` must name a projection alias or a projected expression")]
    InvalidOrderKey { key: String },
    #[error("aggregate functions are not allowed in {context}")]
    MisplacedAggregate { context: String },
    #[error("query must end with exactly one RETURN")]
    MissingReturn,
}

/// Checks that every referenced variable is bound by a preceding pattern or
/// WITH projection and that ORDER BY keys refer to projections.
pub fn check_scope(ast: &QueryAst) -> Result<(), ScopeError> {
    let mut scope: BTreeSet<String> = BTreeSet::new();
    let n = ast.clauses.len();
    for (i, clause) in ast.clauses.iter().enumerate() {
        match clause {
            Clause::Match { patterns, .. } => {
                for p in patterns {
                    bind_pattern(p, &mut scope);
                }
            }
            Clause::Where(e) => {
                if e.contains_aggregate() {
                    return Err(ScopeError::MisplacedAggregate {
                        context: "WHERE".into(),
                    });
                }
                check_bool(e, &scope)?;
            }
            Clause::With {
                projections,
                filter,
                ..
            } => {
                let mut next = BTreeSet::new();
                for p in projections {
                    check_value(&p.expr, &scope)?;
                    match (&p.alias, &p.expr) {
                        (Some(a), _) => {
                            next.insert(a.clone());
                        }
                        (None, ValueExpr::Variable(v)) => {
                            next.insert(v.clone());
                        }
                        _ => {}
                    }
                }
                scope = next;
                if let Some(w) = filter {
                    if w.contains_aggregate() {
                        return Err(ScopeError::MisplacedAggregate {
                            context: "WITH ... WHERE".into(),
                        });
                    }
                    check_bool(w, &scope)?;
                }
            }
            Clause::Return(r) => {
                if i + 1 != n {
                    return Err(ScopeError::MissingReturn);
                }
                for p in &r.projections {
                    check_value(&p.expr, &scope)?;
                }
                for key in &r.order_by {
                    let ok = r.projections.iter().any(|p| {
                        p.expr == key.expr
                            || matches!((&key.expr, &p.alias), (ValueExpr::Variable(v), Some(a)) if v == a)
                    });
                    if !ok {
                        return Err(ScopeError::InvalidOrderKey {
                            key: key.expr.to_string(),
                        });
                    }
                }
            }
        }
    }
    match ast.clauses.last() {
        Some(Clause::Return(_)) => Ok(()),
        _ => Err(ScopeError::MissingReturn),
    }
}

fn bind_pattern(p: &Pattern, scope: &mut BTreeSet<String>) {
    for node in p.nodes() {
        if let Some(v) = &node.variable {
            scope.insert(v.clone());
        }
    }
    for rel in p.rels() {
        if let Some(v) = &rel.variable {
            scope.insert(v.clone());
        }
    }
}

fn require(name: &str, scope: &BTreeSet<String>) -> Result<(), ScopeError> {
    if scope.contains(name) {
        Ok(())
    } else {
        Err(ScopeError::UnknownVariable {
            name: name.to_string(),
        })
    }
}

fn check_value(e: &ValueExpr, scope: &BTreeSet<String>) -> Result<(), ScopeError> {
    match e {
        ValueExpr::Property { variable, .. } => require(variable, scope),
        ValueExpr::Variable(v) => require(v, scope),
        ValueExpr::Literal(_) => Ok(()),
        ValueExpr::Aggregate { arg, .. } => match arg {
            AggregateArg::Star => Ok(()),
            AggregateArg::Expr(inner) => check_value(inner, scope),
        },
        ValueExpr::Case {
            branches,
            otherwise,
        } => {
            for (c, v) in branches {
                check_bool(c, scope)?;
                check_value(v, scope)?;
            }
            check_value(otherwise, scope)
        }
        ValueExpr::Arithmetic { lhs, rhs, .. } => {
            check_value(lhs, scope)?;
            check_value(rhs, scope)
        }
        ValueExpr::Function { args, .. } => args.iter().try_for_each(|a| check_value(a, scope)),
    }
}

fn check_bool(e: &BoolExpr, scope: &BTreeSet<String>) -> Result<(), ScopeError> {
    match e {
        BoolExpr::Compare { lhs, rhs, .. } | BoolExpr::Contains { lhs, rhs } => {
            check_value(lhs, scope)?;
            check_value(rhs, scope)
        }
        BoolExpr::And(a, b) | BoolExpr::Or(a, b) => {
            check_bool(a, scope)?;
            check_bool(b, scope)
        }
        BoolExpr::Not(a) => check_bool(a, scope),
        // Pattern predicates may not introduce new named variables.
        BoolExpr::Pattern(p) => {
            for node in p.nodes() {
                if let Some(v) = &node.variable {
                    require(v, scope)?;
                }
            }
            for rel in p.rels() {
                if let Some(v) = &rel.variable {
                    require(v, scope)?;
                }
            }
            Ok(())
        }
        BoolExpr::IsNull(v) | BoolExpr::IsNotNull(v) => check_value(v, scope),
    }
}
