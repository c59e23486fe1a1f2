use super::ast::*;
use super::lexer::{tokenize, Token, TokenKind};
use super::{ParseError, SyntaxError};

const RESERVED: &[&str] = &[
    "MATCH", "OPTIONAL", "WHERE", "WITH", "RETURN", "DISTINCT", "ORDER", "BY", "ASC", "ASCENDING",
    "DESC", "DESCENDING", "LIMIT", "SKIP", "CASE", "WHEN", "THEN", "ELSE", "END", "AS", "AND",
    "OR", "XOR", "NOT", "IS", "NULL", "TRUE", "FALSE", "CONTAINS", "STARTS", "ENDS", "IN",
    "CALL", "CREATE", "MERGE", "DELETE", "DETACH", "SET", "REMOVE", "UNWIND", "UNION", "FOREACH",
    "LOAD", "YIELD",
];

/// Clause keywords outside the supported read-only subset.
const UNSUPPORTED_CLAUSES: &[&str] = &[
    "CALL", "CREATE", "MERGE", "DELETE", "DETACH", "SET", "REMOVE", "UNWIND", "UNION", "FOREACH",
    "LOAD", "SKIP",
];

pub fn is_reserved(word: &str) -> bool {
    RESERVED.iter().any(|k| k.eq_ignore_ascii_case(word))
}

pub fn parse_query(text: &str) -> Result<QueryAst, ParseError> {
    let tokens = tokenize(text).map_err(ParseError::Syntax)?;
    let mut p = Parser {
        src: text,
        tokens,
        pos: 0,
    };
    let clauses = p.query()?;
    let end = p.tokens.last().map(|t| t.start).unwrap_or(0);
    Ok(QueryAst {
        clauses,
        source_span: Some(0..end),
    })
}

/// Parses a `{key: literal, ...}` map as used by inline node properties and
/// by the graph fixture format.
pub fn parse_literal_map(text: &str) -> Result<Vec<(String, Literal)>, ParseError> {
    let tokens = tokenize(text).map_err(ParseError::Syntax)?;
    let mut p = Parser {
        src: text,
        tokens,
        pos: 0,
    };
    let map = p.property_map()?;
    p.expect(&TokenKind::Eof, "end of input")?;
    Ok(map)
}

pub(crate) struct Parser<'a> {
    src: &'a str,
    tokens: Vec<Token>,
    pos: usize,
}

type PResult<T> = Result<T, ParseError>;

impl<'a> Parser<'a> {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos.min(self.tokens.len() - 1)]
    }

    fn peek_at(&self, n: usize) -> &Token {
        &self.tokens[(self.pos + n).min(self.tokens.len() - 1)]
    }

    fn advance(&mut self) -> Token {
        let t = self.peek().clone();
        if self.pos < self.tokens.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn error_at(&self, tok: &Token, message: impl Into<String>) -> ParseError {
        ParseError::Syntax(SyntaxError {
            line: tok.line,
            column: tok.column,
            offset: tok.start,
            found: match tok.kind {
                TokenKind::Eof => "end of input".to_string(),
                _ => tok.text(self.src).to_string(),
            },
            message: message.into(),
        })
    }

    fn error(&self, message: impl Into<String>) -> ParseError {
        self.error_at(self.peek(), message)
    }

    fn unsupported_at(&self, tok: &Token, feature: impl Into<String>) -> ParseError {
        ParseError::Unsupported {
            feature: feature.into(),
            line: tok.line,
            column: tok.column,
        }
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(&self.peek().kind, TokenKind::Word(w) if w.eq_ignore_ascii_case(kw))
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if self.is_kw(kw) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn expect_kw(&mut self, kw: &str) -> PResult<()> {
        if self.eat_kw(kw) {
            Ok(())
        } else {
            Err(self.error(format!("expected {kw}")))
        }
    }

    fn check(&self, kind: &TokenKind) -> bool {
        &self.peek().kind == kind
    }

    fn eat(&mut self, kind: &TokenKind) -> bool {
        if self.check(kind) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, kind: &TokenKind, what: &str) -> PResult<Token> {
        if self.check(kind) {
            Ok(self.advance())
        } else {
            Err(self.error(format!("expected {what}")))
        }
    }

    /// Any bare word, keywords included (labels, property keys, types).
    fn name(&mut self, what: &str) -> PResult<String> {
        match &self.peek().kind {
            TokenKind::Word(w) => {
                let w = w.clone();
                self.advance();
                Ok(w)
            }
            _ => Err(self.error(format!("expected {what}"))),
        }
    }

    /// A word usable as a variable or alias.
    fn identifier(&mut self, what: &str) -> PResult<String> {
        match &self.peek().kind {
            TokenKind::Word(w) if !is_reserved(w) => {
                let w = w.clone();
                self.advance();
                Ok(w)
            }
            _ => Err(self.error(format!("expected {what}"))),
        }
    }

    fn at_identifier(&self) -> bool {
        matches!(&self.peek().kind, TokenKind::Word(w) if !is_reserved(w))
    }

    fn query(&mut self) -> PResult<Vec<Clause>> {
        let mut clauses = Vec::new();
        loop {
            let tok = self.peek().clone();
            if self.is_kw("MATCH") || self.is_kw("OPTIONAL") {
                let optional = self.eat_kw("OPTIONAL");
                self.expect_kw("MATCH")?;
                let mut patterns = vec![self.pattern()?];
                while self.eat(&TokenKind::Comma) {
                    patterns.push(self.pattern()?);
                }
                clauses.push(Clause::Match { patterns, optional });
                if self.eat_kw("WHERE") {
                    clauses.push(Clause::Where(self.bool_expr()?));
                }
            } else if self.eat_kw("WITH") {
                let distinct = self.eat_kw("DISTINCT");
                let projections = self.projections()?;
                if self.is_kw("ORDER") || self.is_kw("LIMIT") || self.is_kw("SKIP") {
                    return Err(self.unsupported_at(&self.peek().clone(), "ORDER BY / LIMIT on WITH"));
                }
                let filter = if self.eat_kw("WHERE") {
                    Some(self.bool_expr()?)
                } else {
                    None
                };
                clauses.push(Clause::With {
                    projections,
                    distinct,
                    filter,
                });
            } else if self.eat_kw("RETURN") {
                clauses.push(Clause::Return(self.return_body()?));
                while self.eat(&TokenKind::Semicolon) {}
                if !self.check(&TokenKind::Eof) {
                    let t = self.peek().clone();
                    if let TokenKind::Word(w) = &t.kind {
                        if UNSUPPORTED_CLAUSES.iter().any(|k| k.eq_ignore_ascii_case(w)) {
                            return Err(self.unsupported_at(&t, w.to_uppercase()));
                        }
                    }
                    return Err(self.error("expected end of query after RETURN"));
                }
                return Ok(clauses);
            } else if self.is_kw("WHERE") {
                return Err(self.error("WHERE must follow MATCH or WITH"));
            } else if let TokenKind::Word(w) = &tok.kind {
                if UNSUPPORTED_CLAUSES.iter().any(|k| k.eq_ignore_ascii_case(w)) {
                    return Err(self.unsupported_at(&tok, w.to_uppercase()));
                }
                return Err(self.error("expected MATCH, OPTIONAL MATCH, WITH or RETURN"));
            } else if tok.kind == TokenKind::Eof {
                return Err(self.error("query must end with RETURN"));
            } else {
                return Err(self.error("expected MATCH, OPTIONAL MATCH, WITH or RETURN"));
            }
        }
    }

    fn return_body(&mut self) -> PResult<ReturnClause> {
        let distinct = self.eat_kw("DISTINCT");
        let projections = self.projections()?;
        let mut order_by = Vec::new();
        if self.eat_kw("ORDER") {
            self.expect_kw("BY")?;
            loop {
                let expr = self.value_expr()?;
                let descending = if self.eat_kw("DESC") || self.eat_kw("DESCENDING") {
                    true
                } else {
                    let _ = self.eat_kw("ASC") || self.eat_kw("ASCENDING");
                    false
                };
                order_by.push(SortKey { expr, descending });
                if !self.eat(&TokenKind::Comma) {
                    break;
                }
            }
        }
        if self.is_kw("SKIP") {
            return Err(self.unsupported_at(&self.peek().clone(), "SKIP"));
        }
        let limit = if self.eat_kw("LIMIT") {
            match self.peek().kind {
                TokenKind::Int(n) if n >= 0 => {
                    self.advance();
                    Some(n as u64)
                }
                _ => return Err(self.error("expected a non-negative integer after LIMIT")),
            }
        } else {
            None
        };
        Ok(ReturnClause {
            projections,
            distinct,
            order_by,
            limit,
        })
    }

    fn projections(&mut self) -> PResult<Vec<Projection>> {
        let mut out = Vec::new();
        loop {
            if self.check(&TokenKind::Star) {
                return Err(self.unsupported_at(&self.peek().clone(), "projection of *"));
            }
            let expr = self.value_expr()?;
            let alias = if self.eat_kw("AS") {
                Some(self.identifier("alias after AS")?)
            } else {
                None
            };
            out.push(Projection { expr, alias });
            if !self.eat(&TokenKind::Comma) {
                return Ok(out);
            }
        }
    }

    fn pattern(&mut self) -> PResult<Pattern> {
        let start = self.node_pattern()?;
        let mut steps = Vec::new();
        while self.check(&TokenKind::Minus)
            || (self.check(&TokenKind::Lt) && self.peek_at(1).kind == TokenKind::Minus)
        {
            let rel = self.rel_pattern()?;
            let node = self.node_pattern()?;
            steps.push((rel, node));
        }
        Ok(Pattern { start, steps })
    }

    fn node_pattern(&mut self) -> PResult<NodePattern> {
        self.expect(&TokenKind::LParen, "(")?;
        let variable = if self.at_identifier() {
            Some(self.identifier("variable")?)
        } else {
            None
        };
        let label = if self.eat(&TokenKind::Colon) {
            let l = self.name("node label")?;
            if self.check(&TokenKind::Colon) {
                return Err(self.unsupported_at(&self.peek().clone(), "multiple node labels"));
            }
            Some(l)
        } else {
            None
        };
        let properties = if self.check(&TokenKind::LBrace) {
            self.property_map()?
        } else {
            Vec::new()
        };
        self.expect(&TokenKind::RParen, ")")?;
        Ok(NodePattern {
            variable,
            label,
            properties,
        })
    }

    fn property_map(&mut self) -> PResult<Vec<(String, Literal)>> {
        self.expect(&TokenKind::LBrace, "{")?;
        let mut props: Vec<(String, Literal)> = Vec::new();
        if self.eat(&TokenKind::RBrace) {
            return Ok(props);
        }
        loop {
            let key_tok = self.peek().clone();
            let key = self.name("property key")?;
            if props.iter().any(|(k, _)| k == &key) {
                return Err(self.error_at(&key_tok, format!("duplicate property key {key}")));
            }
            self.expect(&TokenKind::Colon, ":")?;
            let value = self.literal()?;
            props.push((key, value));
            if !self.eat(&TokenKind::Comma) {
                break;
            }
        }
        self.expect(&TokenKind::RBrace, "}")?;
        Ok(props)
    }

    fn literal(&mut self) -> PResult<Literal> {
        let negative = self.eat(&TokenKind::Minus);
        let tok = self.peek().clone();
        let lit = match (&tok.kind, negative) {
            (TokenKind::Int(i), _) => Literal::Integer(if negative { -*i } else { *i }),
            (TokenKind::Float(f), _) => Literal::Float(if negative { -*f } else { *f }),
            (TokenKind::Str(s), false) => Literal::String(s.clone()),
            (TokenKind::Word(w), false) if w.eq_ignore_ascii_case("TRUE") => Literal::Boolean(true),
            (TokenKind::Word(w), false) if w.eq_ignore_ascii_case("FALSE") => {
                Literal::Boolean(false)
            }
            (TokenKind::Word(w), false) if w.eq_ignore_ascii_case("NULL") => Literal::Null,
            _ => return Err(self.error("expected a literal value")),
        };
        self.advance();
        Ok(lit)
    }

    fn rel_pattern(&mut self) -> PResult<RelPattern> {
        let left_arrow = if self.check(&TokenKind::Lt) {
            self.advance();
            true
        } else {
            false
        };
        self.expect(&TokenKind::Minus, "-")?;
        let mut variable = None;
        let mut rel_type = None;
        if self.eat(&TokenKind::LBracket) {
            if self.at_identifier() {
                variable = Some(self.identifier("relationship variable")?);
            }
            if self.eat(&TokenKind::Colon) {
                rel_type = Some(self.name("relationship type")?);
                if self.check(&TokenKind::Pipe) {
                    return Err(
                        self.unsupported_at(&self.peek().clone(), "relationship type alternatives")
                    );
                }
            }
            if self.check(&TokenKind::Star) {
                return Err(self.unsupported_at(&self.peek().clone(), "variable-length relationships"));
            }
            if self.check(&TokenKind::LBrace) {
                return Err(
                    self.unsupported_at(&self.peek().clone(), "relationship property maps")
                );
            }
            self.expect(&TokenKind::RBracket, "]")?;
        }
        self.expect(&TokenKind::Minus, "-")?;
        let right_arrow = self.eat(&TokenKind::Gt);
        let direction = match (left_arrow, right_arrow) {
            (false, true) => Direction::LeftToRight,
            (true, false) => Direction::RightToLeft,
            _ => Direction::Undirected,
        };
        Ok(RelPattern {
            variable,
            rel_type,
            direction,
        })
    }

    // ---- boolean expressions ----

    pub(crate) fn bool_expr(&mut self) -> PResult<BoolExpr> {
        let mut lhs = self.bool_and()?;
        loop {
            if self.eat_kw("OR") {
                let rhs = self.bool_and()?;
                lhs = BoolExpr::Or(Box::new(lhs), Box::new(rhs));
            } else if self.is_kw("XOR") {
                return Err(self.unsupported_at(&self.peek().clone(), "XOR"));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn bool_and(&mut self) -> PResult<BoolExpr> {
        let mut lhs = self.bool_not()?;
        while self.eat_kw("AND") {
            let rhs = self.bool_not()?;
            lhs = BoolExpr::And(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn bool_not(&mut self) -> PResult<BoolExpr> {
        if self.eat_kw("NOT") {
            Ok(BoolExpr::Not(Box::new(self.bool_not()?)))
        } else {
            self.bool_atom()
        }
    }

    fn bool_atom(&mut self) -> PResult<BoolExpr> {
        if self.check(&TokenKind::LParen) {
            let save = self.pos;
            let mut furthest: Option<ParseError> = None;
            match self.pattern() {
                Ok(p) if !p.steps.is_empty() => return Ok(BoolExpr::Pattern(p)),
                Ok(_) => {}
                Err(e) => furthest = Some(e),
            }
            self.pos = save;
            self.advance();
            match self.bool_expr() {
                Ok(inner) if self.check(&TokenKind::RParen) => {
                    self.advance();
                    if !self.at_value_operator() {
                        return Ok(inner);
                    }
                }
                Ok(_) => {}
                Err(e) => furthest = Some(further(furthest, e)),
            }
            self.pos = save;
            return self.comparison().map_err(|e| match furthest {
                Some(f) => further(Some(f), e),
                None => e,
            });
        }
        self.comparison()
    }

    fn at_value_operator(&self) -> bool {
        matches!(
            self.peek().kind,
            TokenKind::Eq
                | TokenKind::Ne
                | TokenKind::Lt
                | TokenKind::Le
                | TokenKind::Gt
                | TokenKind::Ge
                | TokenKind::Plus
                | TokenKind::Minus
                | TokenKind::Star
                | TokenKind::Slash
        ) || self.is_kw("CONTAINS")
            || self.is_kw("IS")
    }

    fn comparison(&mut self) -> PResult<BoolExpr> {
        let lhs = self.value_expr()?;
        let op = match self.peek().kind {
            TokenKind::Eq => Some(CompareOp::Eq),
            TokenKind::Ne => Some(CompareOp::Ne),
            TokenKind::Lt => Some(CompareOp::Lt),
            TokenKind::Le => Some(CompareOp::Le),
            TokenKind::Gt => Some(CompareOp::Gt),
            TokenKind::Ge => Some(CompareOp::Ge),
            _ => None,
        };
        if let Some(op) = op {
            self.advance();
            let rhs = self.value_expr()?;
            return Ok(BoolExpr::Compare { op, lhs, rhs });
        }
        if self.eat_kw("CONTAINS") {
            let rhs = self.value_expr()?;
            return Ok(BoolExpr::Contains { lhs, rhs });
        }
        if self.eat_kw("IS") {
            let negated = self.eat_kw("NOT");
            self.expect_kw("NULL")?;
            return Ok(if negated {
                BoolExpr::IsNotNull(lhs)
            } else {
                BoolExpr::IsNull(lhs)
            });
        }
        for kw in ["STARTS", "ENDS", "IN"] {
            if self.is_kw(kw) {
                return Err(self.unsupported_at(&self.peek().clone(), kw));
            }
        }
        Err(self.error("expected a comparison, CONTAINS or IS NULL"))
    }

    // ---- value expressions ----

    pub(crate) fn value_expr(&mut self) -> PResult<ValueExpr> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek().kind {
                TokenKind::Plus => ArithOp::Add,
                TokenKind::Minus => ArithOp::Sub,
                _ => return Ok(lhs),
            };
            self.advance();
            let rhs = self.term()?;
            lhs = ValueExpr::Arithmetic {
                op,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
            };
        }
    }

    fn term(&mut self) -> PResult<ValueExpr> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek().kind {
                TokenKind::Star => ArithOp::Mul,
                TokenKind::Slash => ArithOp::Div,
                _ => return Ok(lhs),
            };
            self.advance();
            let rhs = self.unary()?;
            lhs = ValueExpr::Arithmetic {
                op,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
            };
        }
    }

    fn unary(&mut self) -> PResult<ValueExpr> {
        if self.check(&TokenKind::Minus) {
            let tok = self.advance();
            return Ok(match self.unary()? {
                ValueExpr::Literal(Literal::Integer(i)) => ValueExpr::Literal(Literal::Integer(
                    i.checked_neg()
                        .ok_or_else(|| self.error_at(&tok, "integer literal out of range"))?,
                )),
                ValueExpr::Literal(Literal::Float(f)) => ValueExpr::Literal(Literal::Float(-f)),
                other => ValueExpr::Arithmetic {
                    op: ArithOp::Sub,
                    lhs: Box::new(ValueExpr::Literal(Literal::Integer(0))),
                    rhs: Box::new(other),
                },
            });
        }
        self.atom()
    }

    fn atom(&mut self) -> PResult<ValueExpr> {
        let tok = self.peek().clone();
        match &tok.kind {
            TokenKind::Int(i) => {
                self.advance();
                Ok(ValueExpr::Literal(Literal::Integer(*i)))
            }
            TokenKind::Float(f) => {
                self.advance();
                Ok(ValueExpr::Literal(Literal::Float(*f)))
            }
            TokenKind::Str(s) => {
                self.advance();
                Ok(ValueExpr::Literal(Literal::String(s.clone())))
            }
            TokenKind::LParen => {
                self.advance();
                let inner = self.value_expr()?;
                self.expect(&TokenKind::RParen, ")")?;
                Ok(inner)
            }
            TokenKind::LBracket => Err(self.unsupported_at(&tok, "list literals")),
            TokenKind::LBrace => Err(self.unsupported_at(&tok, "map literals")),
            TokenKind::Word(w) => {
                let upper = w.to_ascii_uppercase();
                match upper.as_str() {
                    "TRUE" => {
                        self.advance();
                        return Ok(ValueExpr::Literal(Literal::Boolean(true)));
                    }
                    "FALSE" => {
                        self.advance();
                        return Ok(ValueExpr::Literal(Literal::Boolean(false)));
                    }
                    "NULL" => {
                        self.advance();
                        return Ok(ValueExpr::Literal(Literal::Null));
                    }
                    "CASE" => return self.case_expr(),
                    _ => {}
                }
                if self.peek_at(1).kind == TokenKind::LParen {
                    return self.function_call();
                }
                if self.peek_at(1).kind == TokenKind::Dot
                    && matches!(self.peek_at(2).kind, TokenKind::Word(_))
                    && matches!(self.peek_at(3).kind, TokenKind::Dot | TokenKind::LParen)
                {
                    return Err(self.unsupported_at(&tok, format!("namespaced function {w}.*")));
                }
                let variable = self.identifier("expression")?;
                if self.eat(&TokenKind::Dot) {
                    let key = self.name("property key")?;
                    if self.check(&TokenKind::Dot) {
                        return Err(self.error("nested property access is not supported"));
                    }
                    Ok(ValueExpr::Property { variable, key })
                } else {
                    Ok(ValueExpr::Variable(variable))
                }
            }
            _ => Err(self.error("expected an expression")),
        }
    }

    fn function_call(&mut self) -> PResult<ValueExpr> {
        let tok = self.advance();
        let TokenKind::Word(name) = &tok.kind else {
            unreachable!("function_call called on a word")
        };
        let kind = match name.to_ascii_lowercase().as_str() {
            "count" => Some(AggregateKind::Count),
            "collect" => Some(AggregateKind::Collect),
            "sum" => Some(AggregateKind::Sum),
            "tofloat" => None,
            _ => return Err(self.unsupported_at(&tok, format!("function {name}"))),
        };
        self.expect(&TokenKind::LParen, "(")?;
        match kind {
            Some(kind) => {
                let distinct = self.eat_kw("DISTINCT");
                let arg = if kind == AggregateKind::Count && self.check(&TokenKind::Star) {
                    if distinct {
                        return Err(self.error("COUNT(DISTINCT *) is not valid"));
                    }
                    self.advance();
                    AggregateArg::Star
                } else {
                    let inner_tok = self.peek().clone();
                    let e = self.value_expr()?;
                    if e.contains_aggregate() {
                        return Err(
                            self.error_at(&inner_tok, "aggregate functions cannot be nested")
                        );
                    }
                    AggregateArg::Expr(Box::new(e))
                };
                self.expect(&TokenKind::RParen, ")")?;
                Ok(ValueExpr::Aggregate {
                    kind,
                    arg,
                    distinct,
                })
            }
            None => {
                let arg = self.value_expr()?;
                self.expect(&TokenKind::RParen, ")")?;
                Ok(ValueExpr::Function {
                    name: "toFloat".to_string(),
                    args: vec![arg],
                })
            }
        }
    }

    fn case_expr(&mut self) -> PResult<ValueExpr> {
        self.expect_kw("CASE")?;
        if !self.is_kw("WHEN") {
            return Err(self.unsupported_at(&self.peek().clone(), "simple CASE form"));
        }
        let mut branches = Vec::new();
        while self.eat_kw("WHEN") {
            let cond = self.bool_expr()?;
            self.expect_kw("THEN")?;
            let value = self.value_expr()?;
            branches.push((cond, value));
        }
        let otherwise = if self.eat_kw("ELSE") {
            self.value_expr()?
        } else {
            ValueExpr::Literal(Literal::Null)
        };
        self.expect_kw("END")?;
        Ok(ValueExpr::Case {
            branches,
            otherwise: Box::new(otherwise),
        })
    }
}

fn offset_of(e: &ParseError) -> usize {
    match e {
        ParseError::Syntax(s) => s.offset,
        ParseError::Unsupported { .. } => usize::MAX,
    }
}

fn further(a: Option<ParseError>, b: ParseError) -> ParseError {
    match a {
        Some(a) if offset_of(&a) > offset_of(&b) => a,
        _ => b,
    }
}
