//! A small recursive-descent parser for potential expressions.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := ('-' | '+') factor | base ('^' integer)?
//! base   := number | 'x' | 'y' | 'rho' | '(' expr ')' | func '(' expr ')'
//! func   := sin | cos | exp | abs
//! ```
//!
//! `rho` is the Euclidean norm of the evaluation point. Unary minus binds
//! looser than `^`, so `-(1 + x)^2` is `-((1 + x)^2)`.

use std::fmt;

use thiserror::Error;

/// Parse failure; `position` is the 1-based character offset.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("parse error at position {position}: {message}")]
pub struct ParseError {
    pub position: usize,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Abs,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Abs => "abs",
        }
    }

    fn apply(self, v: f64) -> f64 {
        match self {
            Func::Sin => v.sin(),
            Func::Cos => v.cos(),
            Func::Exp => v.exp(),
            Func::Abs => v.abs(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    X,
    Y,
    Rho,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
    Call(Func, Box<Expr>),
}

impl Expr {
    /// Evaluate at a point with one or two coordinates.
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Expr::Num(v) => *v,
            Expr::X => x[0],
            Expr::Y => x.get(1).copied().unwrap_or(0.0),
            Expr::Rho => x.iter().map(|c| c * c).sum::<f64>().sqrt(),
            Expr::Neg(e) => -e.eval(x),
            Expr::Add(l, r) => l.eval(x) + r.eval(x),
            Expr::Sub(l, r) => l.eval(x) - r.eval(x),
            Expr::Mul(l, r) => l.eval(x) * r.eval(x),
            Expr::Div(l, r) => l.eval(x) / r.eval(x),
            Expr::Pow(b, k) => b.eval(x).powi(*k as i32),
            Expr::Call(f, e) => f.apply(e.eval(x)),
        }
    }

    pub fn uses_y(&self) -> bool {
        self.any(&|e| matches!(e, Expr::Y))
    }

    /// True when the expression depends on the point only through `rho`.
    pub fn is_radial(&self) -> bool {
        !self.any(&|e| matches!(e, Expr::X | Expr::Y))
    }

    pub fn is_constant(&self) -> bool {
        !self.any(&|e| matches!(e, Expr::X | Expr::Y | Expr::Rho))
    }

    fn any(&self, pred: &dyn Fn(&Expr) -> bool) -> bool {
        if pred(self) {
            return true;
        }
        match self {
            Expr::Num(_) | Expr::X | Expr::Y | Expr::Rho => false,
            Expr::Neg(e) | Expr::Pow(e, _) | Expr::Call(_, e) => e.any(pred),
            Expr::Add(l, r) | Expr::Sub(l, r) | Expr::Mul(l, r) | Expr::Div(l, r) => {
                l.any(pred) || r.any(pred)
            }
        }
    }
}

/// Fully parenthesised rendering; parsing it yields the same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v:?}"),
            Expr::X => f.write_str("x"),
            Expr::Y => f.write_str("y"),
            Expr::Rho => f.write_str("rho"),
            Expr::Neg(e) => write!(f, "(-{e})"),
            Expr::Add(l, r) => write!(f, "({l} + {r})"),
            Expr::Sub(l, r) => write!(f, "({l} - {r})"),
            Expr::Mul(l, r) => write!(f, "({l} * {r})"),
            Expr::Div(l, r) => write!(f, "({l} / {r})"),
            Expr::Pow(b, k) => write!(f, "({b})^{k}"),
            Expr::Call(func, e) => write!(f, "{}({e})", func.name()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Int(u32),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Num(v) => write!(f, "number {v}"),
            Tok::Int(v) => write!(f, "number {v}"),
            Tok::Ident(s) => write!(f, "'{s}'"),
            Tok::Plus => f.write_str("'+'"),
            Tok::Minus => f.write_str("'-'"),
            Tok::Star => f.write_str("'*'"),
            Tok::Slash => f.write_str("'/'"),
            Tok::Caret => f.write_str("'^'"),
            Tok::LParen => f.write_str("'('"),
            Tok::RParen => f.write_str("')'"),
            Tok::End => f.write_str("end of input"),
        }
    }
}

struct Lexer {
    toks: Vec<(Tok, usize)>,
}

fn lex(src: &str) -> Result<Lexer, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let pos = i + 1;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let single = match c {
            '+' => Some(Tok::Plus),
            '-' => Some(Tok::Minus),
            '*' => Some(Tok::Star),
            '/' => Some(Tok::Slash),
            '^' => Some(Tok::Caret),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            _ => None,
        };
        if let Some(t) = single {
            toks.push((t, pos));
            i += 1;
            continue;
        }
        if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    while j < chars.len() && chars[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            let text: String = chars[start..i].iter().collect();
            let is_int = text.chars().all(|c| c.is_ascii_digit());
            let tok = if is_int {
                match text.parse::<u32>() {
                    Ok(k) => Tok::Int(k),
                    Err(_) => Tok::Num(text.parse::<f64>().map_err(|_| ParseError {
                        position: pos,
                        message: format!("malformed number '{text}'"),
                    })?),
                }
            } else {
                Tok::Num(text.parse::<f64>().map_err(|_| ParseError {
                    position: pos,
                    message: format!("malformed number '{text}'"),
                })?)
            };
            toks.push((tok, pos));
            continue;
        }
        if c.is_ascii_alphabetic() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_alphanumeric() {
                i += 1;
            }
            toks.push((Tok::Ident(chars[start..i].iter().collect()), pos));
            continue;
        }
        return Err(ParseError {
            position: pos,
            message: format!("unexpected character '{c}'"),
        });
    }
    toks.push((Tok::End, chars.len() + 1));
    Ok(Lexer { toks })
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    at: usize,
    allow_y: bool,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> usize {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError {
            position: self.pos(),
            message: message.into(),
        })
    }

    fn expect_rparen(&mut self) -> Result<(), ParseError> {
        if *self.peek() == Tok::RParen {
            self.bump();
            Ok(())
        } else {
            self.error("expected ')'")
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Tok::Minus => {
                    self.bump();
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.factor()?));
                }
                Tok::Slash => {
                    self.bump();
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.factor()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            Tok::Minus => {
                self.bump();
                Ok(Expr::Neg(Box::new(self.factor()?)))
            }
            Tok::Plus => {
                self.bump();
                self.factor()
            }
            _ => {
                let base = self.base()?;
                if *self.peek() == Tok::Caret {
                    self.bump();
                    let pos = self.pos();
                    match self.bump() {
                        Tok::Int(k) => Ok(Expr::Pow(Box::new(base), k)),
                        _ => Err(ParseError {
                            position: pos,
                            message: "exponent must be a non-negative integer".into(),
                        }),
                    }
                } else {
                    Ok(base)
                }
            }
        }
    }

    fn base(&mut self) -> Result<Expr, ParseError> {
        let pos = self.pos();
        match self.bump() {
            Tok::Num(v) => Ok(Expr::Num(v)),
            Tok::Int(k) => Ok(Expr::Num(k as f64)),
            Tok::LParen => {
                let e = self.expr()?;
                self.expect_rparen()?;
                Ok(e)
            }
            Tok::Ident(name) => {
                let func = match name.as_str() {
                    "x" => return Ok(Expr::X),
                    "rho" => return Ok(Expr::Rho),
                    "y" if self.allow_y => return Ok(Expr::Y),
                    "y" => {
                        return Err(ParseError {
                            position: pos,
                            message: "'y' is only available in two dimensions".into(),
                        })
                    }
                    "sin" => Func::Sin,
                    "cos" => Func::Cos,
                    "exp" => Func::Exp,
                    "abs" => Func::Abs,
                    _ => {
                        return Err(ParseError {
                            position: pos,
                            message: format!("unknown symbol '{name}'"),
                        })
                    }
                };
                if *self.peek() != Tok::LParen {
                    return self.error(format!("expected '(' after '{name}'"));
                }
                self.bump();
                let arg = self.expr()?;
                self.expect_rparen()?;
                Ok(Expr::Call(func, Box::new(arg)))
            }
            Tok::End => Err(ParseError {
                position: pos,
                message: "unexpected end of input".into(),
            }),
            other => Err(ParseError {
                position: pos,
                message: format!("unexpected {other}"),
            }),
        }
    }
}

/// Parse an expression valid in two dimensions (`x`, `y`, `rho`).
pub fn parse(src: &str) -> Result<Expr, ParseError> {
    parse_in_dimension(src, 2)
}

/// Parse an expression for a domain of the given dimension; `y` is rejected
/// when `dim == 1`.
pub fn parse_in_dimension(src: &str, dim: usize) -> Result<Expr, ParseError> {
    let lexer = lex(src)?;
    let mut p = Parser {
        toks: lexer.toks,
        at: 0,
        allow_y: dim >= 2,
    };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return p.error("unexpected trailing input");
    }
    Ok(e)
}
