use serde::{Deserialize, Serialize};
use std::ops::Range;

/// A parsed query in the supported read-only Cypher subset.
///
/// Equality is structural: the source span is ignored so that a query and the
/// re-parse of its canonical printing compare equal.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QueryAst {
    pub clauses: Vec<Clause>,
    #[serde(skip)]
    pub source_span: Option<Range<usize>>,
}

impl PartialEq for QueryAst {
    fn eq(&self, other: &Self) -> bool {
        self.clauses == other.clauses
    }
}

impl QueryAst {
    pub fn new(clauses: Vec<Clause>) -> Self {
        QueryAst {
            clauses,
            source_span: None,
        }
    }

    /// The terminal RETURN clause.
    pub fn return_clause(&self) -> Option<&ReturnClause> {
        match self.clauses.last() {
            Some(Clause::Return(r)) => Some(r),
            _ => None,
        }
    }

    /// All patterns of MATCH / OPTIONAL MATCH clauses, in order.
    pub fn match_patterns(&self) -> impl Iterator<Item = &Pattern> {
        self.clauses.iter().flat_map(|c| match c {
            Clause::Match { patterns, .. } => patterns.as_slice(),
            _ => &[],
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Clause {
    Match {
        patterns: Vec<Pattern>,
        optional: bool,
    },
    Where(BoolExpr),
    With {
        projections: Vec<Projection>,
        distinct: bool,
        filter: Option<BoolExpr>,
    },
    Return(ReturnClause),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReturnClause {
    pub projections: Vec<Projection>,
    pub distinct: bool,
    pub order_by: Vec<SortKey>,
    pub limit: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Projection {
    pub expr: ValueExpr,
    pub alias: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SortKey {
    pub expr: ValueExpr,
    pub descending: bool,
}

/// Alternating node / relationship chain, always starting and ending with a node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pattern {
    pub start: NodePattern,
    pub steps: Vec<(RelPattern, NodePattern)>,
}

impl Pattern {
    pub fn single(node: NodePattern) -> Self {
        Pattern {
            start: node,
            steps: Vec::new(),
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = &NodePattern> {
        std::iter::once(&self.start).chain(self.steps.iter().map(|(_, n)| n))
    }

    pub fn nodes_mut(&mut self) -> impl Iterator<Item = &mut NodePattern> {
        std::iter::once(&mut self.start).chain(self.steps.iter_mut().map(|(_, n)| n))
    }

    pub fn rels(&self) -> impl Iterator<Item = &RelPattern> {
        self.steps.iter().map(|(r, _)| r)
    }

    /// Each relationship together with the node on its left and on its right
    /// as written in the query text.
    pub fn edges(&self) -> impl Iterator<Item = (&NodePattern, &RelPattern, &NodePattern)> {
        self.steps.iter().enumerate().map(move |(i, (rel, right))| {
            let left = if i == 0 { &self.start } else { &self.steps[i - 1].1 };
            (left, rel, right)
        })
    }

    pub fn hop_count(&self) -> usize {
        self.steps.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodePattern {
    pub variable: Option<String>,
    pub label: Option<String>,
    pub properties: Vec<(String, Literal)>,
}

impl NodePattern {
    pub fn new(variable: Option<&str>, label: Option<&str>) -> Self {
        NodePattern {
            variable: variable.map(str::to_string),
            label: label.map(str::to_string),
            properties: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    LeftToRight,
    RightToLeft,
    Undirected,
}

impl Direction {
    pub fn reversed(self) -> Self {
        match self {
            Direction::LeftToRight => Direction::RightToLeft,
            Direction::RightToLeft => Direction::LeftToRight,
            Direction::Undirected => Direction::Undirected,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelPattern {
    pub variable: Option<String>,
    pub rel_type: Option<String>,
    pub direction: Direction,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Literal {
    String(String),
    Integer(i64),
    Float(f64),
    Boolean(bool),
    Null,
}

impl Literal {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Literal::Integer(i) => Some(*i as f64),
            Literal::Float(f) => Some(*f),
            _ => None,
        }
    }

    pub fn is_numeric(&self) -> bool {
        matches!(self, Literal::Integer(_) | Literal::Float(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AggregateKind {
    Count,
    Collect,
    Sum,
}

impl AggregateKind {
    pub fn keyword(self) -> &'static str {
        match self {
            AggregateKind::Count => "COUNT",
            AggregateKind::Collect => "COLLECT",
            AggregateKind::Sum => "SUM",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl ArithOp {
    pub fn symbol(self) -> &'static str {
        match self {
            ArithOp::Add => "+",
            ArithOp::Sub => "-",
            ArithOp::Mul => "*",
            ArithOp::Div => "/",
        }
    }

    pub(crate) fn precedence(self) -> u8 {
        match self {
            ArithOp::Add | ArithOp::Sub => 1,
            ArithOp::Mul | ArithOp::Div => 2,
        }
    }
}

/// Argument of an aggregate: `COUNT(*)` or an expression.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum AggregateArg {
    Star,
    Expr(Box<ValueExpr>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ValueExpr {
    Property {
        variable: String,
        key: String,
    },
    Variable(String),
    Literal(Literal),
    Aggregate {
        kind: AggregateKind,
        arg: AggregateArg,
        distinct: bool,
    },
    Case {
        branches: Vec<(BoolExpr, ValueExpr)>,
        otherwise: Box<ValueExpr>,
    },
    Arithmetic {
        op: ArithOp,
        lhs: Box<ValueExpr>,
        rhs: Box<ValueExpr>,
    },
    Function {
        name: String,
        args: Vec<ValueExpr>,
    },
}

impl ValueExpr {
    pub fn property(variable: &str, key: &str) -> Self {
        ValueExpr::Property {
            variable: variable.to_string(),
            key: key.to_string(),
        }
    }

    pub fn var(name: &str) -> Self {
        ValueExpr::Variable(name.to_string())
    }

    pub fn contains_aggregate(&self) -> bool {
        match self {
            ValueExpr::Aggregate { .. } => true,
            ValueExpr::Property { .. } | ValueExpr::Variable(_) | ValueExpr::Literal(_) => false,
            ValueExpr::Case {
                branches,
                otherwise,
            } => {
                branches
                    .iter()
                    .any(|(c, v)| c.contains_aggregate() || v.contains_aggregate())
                    || otherwise.contains_aggregate()
            }
            ValueExpr::Arithmetic { lhs, rhs, .. } => {
                lhs.contains_aggregate() || rhs.contains_aggregate()
            }
            ValueExpr::Function { args, .. } => args.iter().any(ValueExpr::contains_aggregate),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CompareOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CompareOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CompareOp::Eq => "=",
            CompareOp::Ne => "<>",
            CompareOp::Lt => "<",
            CompareOp::Le => "<=",
            CompareOp::Gt => ">",
            CompareOp::Ge => ">=",
        }
    }

    pub fn is_ordering(self) -> bool {
        matches!(
            self,
            CompareOp::Lt | CompareOp::Le | CompareOp::Gt | CompareOp::Ge
        )
    }

    /// The operator with its operands swapped: `a < b` ⇔ `b > a`.
    pub fn mirrored(self) -> Self {
        match self {
            CompareOp::Lt => CompareOp::Gt,
            CompareOp::Le => CompareOp::Ge,
            CompareOp::Gt => CompareOp::Lt,
            CompareOp::Ge => CompareOp::Le,
            other => other,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum BoolExpr {
    Compare {
        op: CompareOp,
        lhs: ValueExpr,
        rhs: ValueExpr,
    },
    Contains {
        lhs: ValueExpr,
        rhs: ValueExpr,
    },
    And(Box<BoolExpr>, Box<BoolExpr>),
    Or(Box<BoolExpr>, Box<BoolExpr>),
    Not(Box<BoolExpr>),
    Pattern(Pattern),
    IsNull(ValueExpr),
    IsNotNull(ValueExpr),
}

impl BoolExpr {
    pub fn compare(op: CompareOp, lhs: ValueExpr, rhs: ValueExpr) -> Self {
        BoolExpr::Compare { op, lhs, rhs }
    }

    pub fn and(lhs: BoolExpr, rhs: BoolExpr) -> Self {
        BoolExpr::And(Box::new(lhs), Box::new(rhs))
    }

    pub fn contains_aggregate(&self) -> bool {
        match self {
            BoolExpr::Compare { lhs, rhs, .. } | BoolExpr::Contains { lhs, rhs } => {
                lhs.contains_aggregate() || rhs.contains_aggregate()
            }
            BoolExpr::And(a, b) | BoolExpr::Or(a, b) => {
                a.contains_aggregate() || b.contains_aggregate()
            }
            BoolExpr::Not(a) => a.contains_aggregate(),
            BoolExpr::Pattern(_) => false,
            BoolExpr::IsNull(v) | BoolExpr::IsNotNull(v) => v.contains_aggregate(),
        }
    }

    /// Flattens a tree of ANDs into its conjuncts.
    pub fn conjuncts(&self) -> Vec<&BoolExpr> {
        let mut out = Vec::new();
        fn walk<'a>(e: &'a BoolExpr, out: &mut Vec<&'a BoolExpr>) {
            match e {
                BoolExpr::And(a, b) => {
                    walk(a, out);
                    walk(b, out);
                }
                other => out.push(other),
            }
        }
        walk(self, &mut out);
        out
    }
}
