//! Arithmetic expressions over the variables `r` and `theta`.
//!
//! Grammar (precedence `^` > unary `-` > `*`,`/` > `+`,`-`; `^` is
//! right-associative):
//!
//! ```text
//! expr   := term (("+" | "-") term)*
//! term   := unary (("*" | "/") unary)*
//! unary  := "-" unary | power
//! power  := atom ("^" unary)?
//! atom   := number | "r" | "theta" | ident "(" expr ")" | "(" expr ")"
//! ident  := "ln" | "exp" | "sin" | "cos"
//! ```
//!
//! Numbers are decimal with an optional exponent (`2`, `0.5`, `1e-3`).

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    R,
    Theta,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryOp {
    Neg,
    Ln,
    Exp,
    Sin,
    Cos,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

/// Parsed expression tree.
#[derive(Debug, Clone, PartialEq)]
pub enum ExprTree {
    Number(f64),
    Var(Var),
    Unary(UnaryOp, Box<ExprTree>),
    Binary(BinaryOp, Box<ExprTree>, Box<ExprTree>),
}

impl ExprTree {
    pub fn parse(source: &str) -> Result<ExprTree> {
        parse_expr(source)
    }

    pub fn eval(&self, r: f64, theta: f64) -> f64 {
        match self {
            ExprTree::Number(v) => *v,
            ExprTree::Var(Var::R) => r,
            ExprTree::Var(Var::Theta) => theta,
            ExprTree::Unary(op, a) => apply_unary(*op, a.eval(r, theta)),
            ExprTree::Binary(op, a, b) => apply_binary(*op, a.eval(r, theta), b.eval(r, theta)),
        }
    }

    pub fn uses_theta(&self) -> bool {
        match self {
            ExprTree::Number(_) => false,
            ExprTree::Var(v) => *v == Var::Theta,
            ExprTree::Unary(_, a) => a.uses_theta(),
            ExprTree::Binary(_, a, b) => a.uses_theta() || b.uses_theta(),
        }
    }

    pub fn uses_r(&self) -> bool {
        match self {
            ExprTree::Number(_) => false,
            ExprTree::Var(v) => *v == Var::R,
            ExprTree::Unary(_, a) => a.uses_r(),
            ExprTree::Binary(_, a, b) => a.uses_r() || b.uses_r(),
        }
    }

    /// Parseable text form. `ExprTree::parse(t.print())` evaluates
    /// identically to `t`.
    pub fn print(&self) -> String {
        match self {
            ExprTree::Number(v) => {
                if *v < 0.0 {
                    format!("({v})")
                } else {
                    format!("{v}")
                }
            }
            ExprTree::Var(Var::R) => "r".to_string(),
            ExprTree::Var(Var::Theta) => "theta".to_string(),
            ExprTree::Unary(UnaryOp::Neg, a) => format!("(-{})", a.print()),
            ExprTree::Unary(op, a) => {
                let name = match op {
                    UnaryOp::Ln => "ln",
                    UnaryOp::Exp => "exp",
                    UnaryOp::Sin => "sin",
                    UnaryOp::Cos => "cos",
                    UnaryOp::Neg => unreachable!(),
                };
                format!("{name}({})", a.print())
            }
            ExprTree::Binary(op, a, b) => {
                let sym = match op {
                    BinaryOp::Add => "+",
                    BinaryOp::Sub => "-",
                    BinaryOp::Mul => "*",
                    BinaryOp::Div => "/",
                    BinaryOp::Pow => "^",
                };
                format!("({} {sym} {})", a.print(), b.print())
            }
        }
    }
}

impl std::fmt::Display for ExprTree {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.print())
    }
}

pub(crate) fn apply_unary(op: UnaryOp, a: f64) -> f64 {
    match op {
        UnaryOp::Neg => -a,
        UnaryOp::Ln => a.ln(),
        UnaryOp::Exp => a.exp(),
        UnaryOp::Sin => a.sin(),
        UnaryOp::Cos => a.cos(),
    }
}

pub(crate) fn apply_binary(op: BinaryOp, a: f64, b: f64) -> f64 {
    match op {
        BinaryOp::Add => a + b,
        BinaryOp::Sub => a - b,
        BinaryOp::Mul => a * b,
        BinaryOp::Div => a / b,
        BinaryOp::Pow => a.powf(b),
    }
}

/// Parse `source` into an expression tree.
pub fn parse_expr(source: &str) -> Result<ExprTree> {
    let tokens = lex(source)?;
    let mut parser = Parser { tokens, pos: 0 };
    let tree = parser.expr()?;
    match parser.peek() {
        None => Ok(tree),
        Some(tok) => Err(Error::Parse {
            position: tok.position,
            message: format!("unexpected `{}`", tok.text()),
        }),
    }
}

#[derive(Debug, Clone, PartialEq)]
enum TokenKind {
    Number(f64),
    Ident(String),
    R,
    Theta,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

#[derive(Debug, Clone)]
struct Token {
    kind: TokenKind,
    position: usize,
}

impl Token {
    fn text(&self) -> String {
        match &self.kind {
            TokenKind::Number(v) => format!("{v}"),
            TokenKind::Ident(s) => s.clone(),
            TokenKind::R => "r".into(),
            TokenKind::Theta => "theta".into(),
            TokenKind::Plus => "+".into(),
            TokenKind::Minus => "-".into(),
            TokenKind::Star => "*".into(),
            TokenKind::Slash => "/".into(),
            TokenKind::Caret => "^".into(),
            TokenKind::LParen => "(".into(),
            TokenKind::RParen => ")".into(),
        }
    }
}

fn lex(source: &str) -> Result<Vec<Token>> {
    let bytes = source.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let position = i;
        match c {
            b' ' | b'\t' => {
                i += 1;
            }
            b'+' | b'-' | b'*' | b'/' | b'^' | b'(' | b')' => {
                let kind = match c {
                    b'+' => TokenKind::Plus,
                    b'-' => TokenKind::Minus,
                    b'*' => TokenKind::Star,
                    b'/' => TokenKind::Slash,
                    b'^' => TokenKind::Caret,
                    b'(' => TokenKind::LParen,
                    _ => TokenKind::RParen,
                };
                tokens.push(Token { kind, position });
                i += 1;
            }
            b'0'..=b'9' | b'.' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                if i < bytes.len() && bytes[i] == b'.' {
                    i += 1;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        i = j;
                        while i < bytes.len() && bytes[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let text = &source[start..i];
                let value: f64 = text.parse().map_err(|_| Error::Parse {
                    position: start,
                    message: format!("malformed number `{text}`"),
                })?;
                tokens.push(Token {
                    kind: TokenKind::Number(value),
                    position,
                });
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                let name = &source[start..i];
                let kind = match name {
                    "r" => TokenKind::R,
                    "theta" => TokenKind::Theta,
                    _ => TokenKind::Ident(name.to_string()),
                };
                tokens.push(Token { kind, position });
            }
            _ => {
                return Err(Error::Parse {
                    position,
                    message: format!("unexpected character `{}`", c as char),
                })
            }
        }
    }
    Ok(tokens)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn bump(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn end_position(&self) -> usize {
        self.tokens
            .last()
            .map(|t| t.position + t.text().len())
            .unwrap_or(0)
    }

    fn expr(&mut self) -> Result<ExprTree> {
        let mut lhs = self.term()?;
        while let Some(tok) = self.peek() {
            let op = match tok.kind {
                TokenKind::Plus => BinaryOp::Add,
                TokenKind::Minus => BinaryOp::Sub,
                _ => break,
            };
            self.bump();
            let rhs = self.term()?;
            lhs = ExprTree::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<ExprTree> {
        let mut lhs = self.unary()?;
        while let Some(tok) = self.peek() {
            let op = match tok.kind {
                TokenKind::Star => BinaryOp::Mul,
                TokenKind::Slash => BinaryOp::Div,
                _ => break,
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = ExprTree::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<ExprTree> {
        if matches!(self.peek().map(|t| &t.kind), Some(TokenKind::Minus)) {
            self.bump();
            let inner = self.unary()?;
            return Ok(ExprTree::Unary(UnaryOp::Neg, Box::new(inner)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<ExprTree> {
        let base = self.atom()?;
        if matches!(self.peek().map(|t| &t.kind), Some(TokenKind::Caret)) {
            self.bump();
            // The exponent may itself carry a unary minus: r^-2.
            let exponent = self.unary()?;
            return Ok(ExprTree::Binary(
                BinaryOp::Pow,
                Box::new(base),
                Box::new(exponent),
            ));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<ExprTree> {
        let tok = match self.bump() {
            Some(t) => t,
            None => {
                return Err(Error::Parse {
                    position: self.end_position(),
                    message: "unexpected end of input".into(),
                })
            }
        };
        match tok.kind {
            TokenKind::Number(v) => Ok(ExprTree::Number(v)),
            TokenKind::R => Ok(ExprTree::Var(Var::R)),
            TokenKind::Theta => Ok(ExprTree::Var(Var::Theta)),
            TokenKind::LParen => {
                let inner = self.expr()?;
                self.expect_rparen()?;
                Ok(inner)
            }
            TokenKind::Ident(name) => {
                let op = match name.as_str() {
                    "ln" => UnaryOp::Ln,
                    "exp" => UnaryOp::Exp,
                    "sin" => UnaryOp::Sin,
                    "cos" => UnaryOp::Cos,
                    _ => {
                        return Err(Error::Parse {
                            position: tok.position,
                            message: format!("unknown identifier `{name}`"),
                        })
                    }
                };
                match self.bump() {
                    Some(t) if t.kind == TokenKind::LParen => {}
                    Some(t) => {
                        return Err(Error::Parse {
                            position: t.position,
                            message: format!("expected `(` after `{name}`"),
                        })
                    }
                    None => {
                        return Err(Error::Parse {
                            position: self.end_position(),
                            message: format!("expected `(` after `{name}`"),
                        })
                    }
                }
                let arg = self.expr()?;
                self.expect_rparen()?;
                Ok(ExprTree::Unary(op, Box::new(arg)))
            }
            _ => Err(Error::Parse {
                position: tok.position,
                message: format!("unexpected `{}`", tok.text()),
            }),
        }
    }

    fn expect_rparen(&mut self) -> Result<()> {
        match self.bump() {
            Some(t) if t.kind == TokenKind::RParen => Ok(()),
            Some(t) => Err(Error::Parse {
                position: t.position,
                message: format!("expected `)`, found `{}`", t.text()),
            }),
            None => Err(Error::Parse {
                position: self.end_position(),
                message: "expected `)`".into(),
            }),
        }
    }
}
