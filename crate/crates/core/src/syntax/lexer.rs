use super::SyntaxError;
use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum TokenKind {
    /// Bare word: identifier or keyword. Keywords are recognised by the parser
    /// case-insensitively so that labels and property keys may reuse them.
    Word(String),
    Str(String),
    Int(i64),
    Float(f64),
    LParen,
    RParen,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Colon,
    Comma,
    Dot,
    Semicolon,
    Pipe,
    Plus,
    Minus,
    Star,
    Slash,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Eof,
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TokenKind::Word(w) => write!(f, "{w}"),
            TokenKind::Str(s) => write!(f, "{s:?}"),
            TokenKind::Int(i) => write!(f, "{i}"),
            TokenKind::Float(x) => write!(f, "{x:?}"),
            TokenKind::LParen => f.write_str("("),
            TokenKind::RParen => f.write_str(")"),
            TokenKind::LBracket => f.write_str("["),
            TokenKind::RBracket => f.write_str("]"),
            TokenKind::LBrace => f.write_str("{"),
            TokenKind::RBrace => f.write_str("}"),
            TokenKind::Colon => f.write_str(":"),
            TokenKind::Comma => f.write_str(","),
            TokenKind::Dot => f.write_str("."),
            TokenKind::Semicolon => f.write_str(";"),
            TokenKind::Pipe => f.write_str("|"),
            TokenKind::Plus => f.write_str("+"),
            TokenKind::Minus => f.write_str("-"),
            TokenKind::Star => f.write_str("*"),
            TokenKind::Slash => f.write_str("/"),
            TokenKind::Eq => f.write_str("="),
            TokenKind::Ne => f.write_str("<>"),
            TokenKind::Lt => f.write_str("<"),
            TokenKind::Le => f.write_str("<="),
            TokenKind::Gt => f.write_str(">"),
            TokenKind::Ge => f.write_str(">="),
            TokenKind::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub kind: TokenKind,
    /// Byte offsets into the source.
    pub start: usize,
    pub end: usize,
    /// 1-based, counted in characters.
    pub line: usize,
    pub column: usize,
}

impl Token {
    pub fn text<'a>(&self, source: &'a str) -> &'a str {
        &source[self.start..self.end]
    }
}

struct Cursor<'a> {
    src: &'a str,
    chars: std::iter::Peekable<std::str::CharIndices<'a>>,
    line: usize,
    column: usize,
}

impl<'a> Cursor<'a> {
    fn peek(&mut self) -> Option<char> {
        self.chars.peek().map(|&(_, c)| c)
    }

    fn peek2(&self) -> Option<char> {
        let mut it = self.chars.clone();
        it.next();
        it.next().map(|(_, c)| c)
    }

    fn offset(&mut self) -> usize {
        self.chars.peek().map(|&(i, _)| i).unwrap_or(self.src.len())
    }

    fn bump(&mut self) -> Option<char> {
        let (_, c) = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }
}

/// Splits query text into tokens. The final token is always `Eof`.
pub fn tokenize(src: &str) -> Result<Vec<Token>, SyntaxError> {
    let mut cur = Cursor {
        src,
        chars: src.char_indices().peekable(),
        line: 1,
        column: 1,
    };
    let mut tokens = Vec::new();
    loop {
        // whitespace and `//` line comments
        loop {
            match cur.peek() {
                Some(c) if c.is_whitespace() => {
                    cur.bump();
                }
                Some('/') if cur.peek2() == Some('/') => {
                    while let Some(c) = cur.peek() {
                        if c == '\n' {
                            break;
                        }
                        cur.bump();
                    }
                }
                _ => break,
            }
        }
        let (line, column, start) = (cur.line, cur.column, cur.offset());
        let Some(c) = cur.peek() else {
            tokens.push(Token {
                kind: TokenKind::Eof,
                start,
                end: start,
                line,
                column,
            });
            return Ok(tokens);
        };
        let err = |found: String| SyntaxError {
            line,
            column,
            offset: start,
            found,
            message: "unexpected character".to_string(),
        };
        let kind = if c.is_ascii_alphabetic() || c == '_' {
            let mut word = String::new();
            while let Some(c) = cur.peek() {
                if c.is_ascii_alphanumeric() || c == '_' {
                    word.push(c);
                    cur.bump();
                } else {
                    break;
                }
            }
            TokenKind::Word(word)
        } else if c.is_ascii_digit() {
            lex_number(&mut cur).map_err(|m| SyntaxError {
                message: m,
                ..err(src[start..cur.offset()].to_string())
            })?
        } else if c == '"' || c == '\'' {
            cur.bump();
            let mut s = String::new();
            loop {
                match cur.bump() {
                    Some(q) if q == c => break,
                    Some('\\') => match cur.bump() {
                        Some('n') => s.push('\n'),
                        Some('t') => s.push('\t'),
                        Some('r') => s.push('\r'),
                        Some(other) => s.push(other),
                        None => break,
                    },
                    Some(other) => s.push(other),
                    None => {
                        return Err(SyntaxError {
                            message: "unterminated string literal".to_string(),
                            ..err(c.to_string())
                        })
                    }
                }
            }
            TokenKind::Str(s)
        } else {
            cur.bump();
            match c {
                '(' => TokenKind::LParen,
                ')' => TokenKind::RParen,
                '[' => TokenKind::LBracket,
                ']' => TokenKind::RBracket,
                '{' => TokenKind::LBrace,
                '}' => TokenKind::RBrace,
                ':' => TokenKind::Colon,
                ',' => TokenKind::Comma,
                '.' => TokenKind::Dot,
                ';' => TokenKind::Semicolon,
                '|' => TokenKind::Pipe,
                '+' => TokenKind::Plus,
                '-' => TokenKind::Minus,
                '*' => TokenKind::Star,
                '/' => TokenKind::Slash,
                '=' => TokenKind::Eq,
                '<' => match cur.peek() {
                    Some('=') => {
                        cur.bump();
                        TokenKind::Le
                    }
                    Some('>') => {
                        cur.bump();
                        TokenKind::Ne
                    }
                    _ => TokenKind::Lt,
                },
                '>' => match cur.peek() {
                    Some('=') => {
                        cur.bump();
                        TokenKind::Ge
                    }
                    _ => TokenKind::Gt,
                },
                '!' if cur.peek() == Some('=') => {
                    cur.bump();
                    TokenKind::Ne
                }
                other => return Err(err(other.to_string())),
            }
        };
        tokens.push(Token {
            kind,
            start,
            end: cur.offset(),
            line,
            column,
        });
    }
}

fn lex_number(cur: &mut Cursor<'_>) -> Result<TokenKind, String> {
    let mut text = String::new();
    let mut is_float = false;
    while let Some(c) = cur.peek() {
        if c.is_ascii_digit() {
            text.push(c);
            cur.bump();
        } else {
            break;
        }
    }
    if cur.peek() == Some('.') && cur.peek2().is_some_and(|c| c.is_ascii_digit()) {
        is_float = true;
        text.push('.');
        cur.bump();
        while let Some(c) = cur.peek() {
            if c.is_ascii_digit() {
                text.push(c);
                cur.bump();
            } else {
                break;
            }
        }
    }
    if matches!(cur.peek(), Some('e') | Some('E')) {
        let next = cur.peek2();
        if next.is_some_and(|c| c.is_ascii_digit() || c == '+' || c == '-') {
            is_float = true;
            text.push('e');
            cur.bump();
            if let Some(sign @ ('+' | '-')) = cur.peek() {
                text.push(sign);
                cur.bump();
            }
            let mut digits = 0;
            while let Some(c) = cur.peek() {
                if c.is_ascii_digit() {
                    text.push(c);
                    cur.bump();
                    digits += 1;
                } else {
                    break;
                }
            }
            if digits == 0 {
                return Err("malformed exponent".to_string());
            }
        }
    }
    if cur.peek().is_some_and(|c| c.is_ascii_alphabetic() || c == '_') {
        return Err("identifier cannot start with a digit".to_string());
    }
    if is_float {
        text.parse::<f64>()
            .map(TokenKind::Float)
            .map_err(|e| e.to_string())
    } else {
        text.parse::<i64>()
            .map(TokenKind::Int)
            .map_err(|_| "integer literal out of range".to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(s: &str) -> Vec<TokenKind> {
        tokenize(s).unwrap().into_iter().map(|t| t.kind).collect()
    }

    #[test]
    fn arrows_split_into_punctuation() {
        assert_eq!(
            kinds("<-[:R]->"),
            vec![
                TokenKind::Lt,
                TokenKind::Minus,
                TokenKind::LBracket,
                TokenKind::Colon,
                TokenKind::Word("R".into()),
                TokenKind::RBracket,
                TokenKind::Minus,
                TokenKind::Gt,
                TokenKind::Eof
            ]
        );
    }

    #[test]
    fn numbers_and_strings() {
        assert_eq!(
            kinds("1 2.5 'a\\'b' \"c\""),
            vec![
                TokenKind::Int(1),
                TokenKind::Float(2.5),
                TokenKind::Str("a'b".into()),
                TokenKind::Str("c".into()),
                TokenKind::Eof
            ]
        );
    }

    #[test]
    fn positions_are_one_based() {
        let toks = tokenize("MATCH\n  (n)").unwrap();
        assert_eq!((toks[0].line, toks[0].column), (1, 1));
        assert_eq!((toks[1].line, toks[1].column), (2, 3));
    }

    #[test]
    fn unterminated_string_reports_position() {
        let err = tokenize("RETURN 'abc").unwrap_err();
        assert_eq!((err.line, err.column), (1, 8));
    }
}
