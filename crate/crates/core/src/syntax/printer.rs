use super::ast::*;
use std::fmt::{self, Display, Write};

/// Canonical text: uppercase keywords, single spaces, double-quoted strings,
/// no trailing semicolon.
pub fn print_query(ast: &QueryAst) -> String {
    let mut parts = Vec::with_capacity(ast.clauses.len());
    for clause in &ast.clauses {
        parts.push(clause.to_string());
    }
    parts.join(" ")
}

pub fn print_pattern(p: &Pattern) -> String {
    p.to_string()
}

pub fn print_literal(l: &Literal) -> String {
    l.to_string()
}

fn join<T: Display>(items: &[T], sep: &str) -> String {
    let mut out = String::new();
    for (i, item) in items.iter().enumerate() {
        if i > 0 {
            out.push_str(sep);
        }
        write!(out, "{item}").unwrap();
    }
    out
}

impl Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Clause::Match { patterns, optional } => {
                if *optional {
                    f.write_str("OPTIONAL ")?;
                }
                write!(f, "MATCH {}", join(patterns, ", "))
            }
            Clause::Where(e) => write!(f, "WHERE {e}"),
            Clause::With {
                projections,
                distinct,
                filter,
            } => {
                f.write_str("WITH ")?;
                if *distinct {
                    f.write_str("DISTINCT ")?;
                }
                f.write_str(&join(projections, ", "))?;
                if let Some(w) = filter {
                    write!(f, " WHERE {w}")?;
                }
                Ok(())
            }
            Clause::Return(r) => r.fmt(f),
        }
    }
}

impl Display for ReturnClause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("RETURN ")?;
        if self.distinct {
            f.write_str("DISTINCT ")?;
        }
        f.write_str(&join(&self.projections, ", "))?;
        if !self.order_by.is_empty() {
            write!(f, " ORDER BY {}", join(&self.order_by, ", "))?;
        }
        if let Some(n) = self.limit {
            write!(f, " LIMIT {n}")?;
        }
        Ok(())
    }
}

impl Display for Projection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.alias {
            Some(a) => write!(f, "{} AS {a}", self.expr),
            None => write!(f, "{}", self.expr),
        }
    }
}

impl Display for SortKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.descending {
            write!(f, "{} DESC", self.expr)
        } else {
            write!(f, "{}", self.expr)
        }
    }
}

impl Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.start)?;
        for (rel, node) in &self.steps {
            write!(f, "{rel}{node}")?;
        }
        Ok(())
    }
}

impl Display for NodePattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_char('(')?;
        if let Some(v) = &self.variable {
            f.write_str(v)?;
        }
        if let Some(l) = &self.label {
            write!(f, ":{l}")?;
        }
        if !self.properties.is_empty() {
            if self.variable.is_some() || self.label.is_some() {
                f.write_char(' ')?;
            }
            f.write_char('{')?;
            for (i, (k, v)) in self.properties.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{k}: {v}")?;
            }
            f.write_char('}')?;
        }
        f.write_char(')')
    }
}

impl Display for RelPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (left, right) = match self.direction {
            Direction::LeftToRight => ("-", "->"),
            Direction::RightToLeft => ("<-", "-"),
            Direction::Undirected => ("-", "-"),
        };
        f.write_str(left)?;
        if self.variable.is_some() || self.rel_type.is_some() {
            f.write_char('[')?;
            if let Some(v) = &self.variable {
                f.write_str(v)?;
            }
            if let Some(t) = &self.rel_type {
                write!(f, ":{t}")?;
            }
            f.write_char(']')?;
        }
        f.write_str(right)
    }
}

impl Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Literal::String(s) => {
                f.write_char('"')?;
                for c in s.chars() {
                    match c {
                        '"' => f.write_str("\\\"")?,
                        '\\' => f.write_str("\\\\")?,
                        '\n' => f.write_str("\\n")?,
                        '\t' => f.write_str("\\t")?,
                        '\r' => f.write_str("\\r")?,
                        c => f.write_char(c)?,
                    }
                }
                f.write_char('"')
            }
            Literal::Integer(i) => write!(f, "{i}"),
            Literal::Float(x) => write!(f, "{x:?}"),
            Literal::Boolean(true) => f.write_str("TRUE"),
            Literal::Boolean(false) => f.write_str("FALSE"),
            Literal::Null => f.write_str("NULL"),
        }
    }
}

impl Display for ValueExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValueExpr::Property { variable, key } => write!(f, "{variable}.{key}"),
            ValueExpr::Variable(v) => f.write_str(v),
            ValueExpr::Literal(l) => l.fmt(f),
            ValueExpr::Aggregate {
                kind,
                arg,
                distinct,
            } => {
                write!(f, "{}(", kind.keyword())?;
                if *distinct {
                    f.write_str("DISTINCT ")?;
                }
                match arg {
                    AggregateArg::Star => f.write_char('*')?,
                    AggregateArg::Expr(e) => e.fmt(f)?,
                }
                f.write_char(')')
            }
            ValueExpr::Case {
                branches,
                otherwise,
            } => {
                f.write_str("CASE")?;
                for (cond, value) in branches {
                    write!(f, " WHEN {cond} THEN {value}")?;
                }
                write!(f, " ELSE {otherwise} END")
            }
            ValueExpr::Arithmetic { op, lhs, rhs } => {
                let prec = op.precedence();
                let wrap = |e: &ValueExpr, strict: bool| match e {
                    ValueExpr::Arithmetic { op: inner, .. } => {
                        let p = inner.precedence();
                        if strict {
                            p <= prec
                        } else {
                            p < prec
                        }
                    }
                    _ => false,
                };
                if wrap(lhs, false) {
                    write!(f, "({lhs})")?;
                } else {
                    write!(f, "{lhs}")?;
                }
                write!(f, " {} ", op.symbol())?;
                if wrap(rhs, true) {
                    write!(f, "({rhs})")
                } else {
                    write!(f, "{rhs}")
                }
            }
            ValueExpr::Function { name, args } => write!(f, "{name}({})", join(args, ", ")),
        }
    }
}

fn bool_precedence(e: &BoolExpr) -> u8 {
    match e {
        BoolExpr::Or(..) => 1,
        BoolExpr::And(..) => 2,
        BoolExpr::Not(_) => 3,
        _ => 4,
    }
}

fn write_operand(f: &mut fmt::Formatter<'_>, e: &BoolExpr, min: u8) -> fmt::Result {
    if bool_precedence(e) < min {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

impl Display for BoolExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoolExpr::Compare { op, lhs, rhs } => write!(f, "{lhs} {} {rhs}", op.symbol()),
            BoolExpr::Contains { lhs, rhs } => write!(f, "{lhs} CONTAINS {rhs}"),
            BoolExpr::Or(a, b) => {
                write_operand(f, a, 1)?;
                f.write_str(" OR ")?;
                write_operand(f, b, 2)
            }
            BoolExpr::And(a, b) => {
                write_operand(f, a, 2)?;
                f.write_str(" AND ")?;
                write_operand(f, b, 3)
            }
            BoolExpr::Not(a) => {
                f.write_str("NOT ")?;
                write_operand(f, a, 3)
            }
            BoolExpr::Pattern(p) => p.fmt(f),
            BoolExpr::IsNull(v) => write!(f, "{v} IS NULL"),
            BoolExpr::IsNotNull(v) => write!(f, "{v} IS NOT NULL"),
        }
    }
}
