//! The `.surf` expression language for immersions (u,v) -> R^{n+2}.
//!
//! A source file is a preamble of `let`, `domain` and `exclude` statements
//! followed by a component vector:
//!
//! ```text
//! let a = 2;
//! domain u in [-1, 1], v in [-1, 1];
//! exclude disk(0, 0, 0.25);
//! [u, v, a*sin(u), cos(v)]
//! ```
//!
//! Binary `+ - * / ^` (with `^` binding tightest, right-associative), unary
//! minus, functions sin cos exp log sqrt atan, parentheses. Identifiers must
//! be `u`, `v` or a declared parameter. Integer exponents evaluate by
//! repeated multiplication; fractional ones as exp(e*log(b)).

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::{Error, TaylorError};
use crate::immersion::{Disk, Domain};
use crate::taylor::{Real, Scalar};

#[derive(Debug, Clone, PartialEq, Error, Serialize, Deserialize)]
#[error("parse error at {line}:{column}: {message}")]
pub struct ParseError {
    pub byte_offset: usize,
    pub line: usize,
    pub column: usize,
    pub message: String,
    pub expected: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
    Atan,
}

impl Func {
    fn name(&self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Atan => "atan",
        }
    }

    fn from_name(s: &str) -> Option<Func> {
        match s {
            "sin" => Some(Func::Sin),
            "cos" => Some(Func::Cos),
            "exp" => Some(Func::Exp),
            "log" => Some(Func::Log),
            "sqrt" => Some(Func::Sqrt),
            "atan" => Some(Func::Atan),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Expr {
    Num(f64),
    U,
    V,
    Param(String),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

/// Parsed surface definition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceAst {
    pub components: Vec<Expr>,
    pub params: Vec<(String, f64)>,
    pub domain: Domain,
}

// ---------------------------------------------------------------------------
// Lexer
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Sym(char),
    Eof,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    offset: usize,
}

struct Lexer<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer { src, bytes: src.as_bytes(), pos: 0 }
    }

    fn error_at(src: &str, offset: usize, message: String, expected: Vec<String>) -> ParseError {
        let mut line = 1;
        let mut column = 1;
        for (i, c) in src.char_indices() {
            if i >= offset {
                break;
            }
            if c == '\n' {
                line += 1;
                column = 1;
            } else {
                column += 1;
            }
        }
        ParseError { byte_offset: offset, line, column, message, expected }
    }

    fn next_token(&mut self) -> Result<Token, ParseError> {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        let offset = self.pos;
        if self.pos >= self.bytes.len() {
            return Ok(Token { tok: Tok::Eof, offset });
        }
        let c = self.bytes[self.pos] as char;
        if c.is_ascii_digit() || c == '.' {
            let start = self.pos;
            while self.pos < self.bytes.len()
                && (self.bytes[self.pos].is_ascii_digit() || self.bytes[self.pos] == b'.')
            {
                self.pos += 1;
            }
            if self.pos < self.bytes.len() && (self.bytes[self.pos] | 32) == b'e' {
                let mut probe = self.pos + 1;
                if probe < self.bytes.len() && (self.bytes[probe] == b'+' || self.bytes[probe] == b'-') {
                    probe += 1;
                }
                if probe < self.bytes.len() && self.bytes[probe].is_ascii_digit() {
                    self.pos = probe;
                    while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
                        self.pos += 1;
                    }
                }
            }
            let text = &self.src[start..self.pos];
            let value: f64 = text.parse().map_err(|_| {
                Self::error_at(self.src, start, format!("malformed number `{text}`"), vec!["number".into()])
            })?;
            return Ok(Token { tok: Tok::Num(value), offset });
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = self.pos;
            while self.pos < self.bytes.len()
                && ((self.bytes[self.pos] as char).is_ascii_alphanumeric() || self.bytes[self.pos] == b'_')
            {
                self.pos += 1;
            }
            return Ok(Token { tok: Tok::Ident(self.src[start..self.pos].to_string()), offset });
        }
        if "+-*/^()[],;=".contains(c) {
            self.pos += 1;
            return Ok(Token { tok: Tok::Sym(c), offset });
        }
        Err(Self::error_at(
            self.src,
            offset,
            format!("unexpected character `{c}`"),
            vec!["expression".into()],
        ))
    }
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

struct Parser<'a> {
    src: &'a str,
    tokens: Vec<Token>,
    pos: usize,
    params: Vec<(String, f64)>,
}

pub fn parse(source: &str) -> Result<SurfaceAst, ParseError> {
    let mut lexer = Lexer::new(source);
    let mut tokens = Vec::new();
    loop {
        let t = lexer.next_token()?;
        let done = t.tok == Tok::Eof;
        tokens.push(t);
        if done {
            break;
        }
    }
    let mut p = Parser { src: source, tokens, pos: 0, params: Vec::new() };
    p.file()
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn err(&self, offset: usize, message: impl Into<String>, expected: &[&str]) -> ParseError {
        Lexer::error_at(
            self.src,
            offset,
            message.into(),
            expected.iter().map(|s| s.to_string()).collect(),
        )
    }

    fn expect_sym(&mut self, c: char) -> Result<(), ParseError> {
        let t = self.bump();
        if t.tok == Tok::Sym(c) {
            Ok(())
        } else {
            Err(self.err(t.offset, format!("expected `{c}`, found {}", describe(&t.tok)), &[&c.to_string()]))
        }
    }

    fn expect_keyword(&mut self, kw: &str) -> Result<(), ParseError> {
        let t = self.bump();
        match &t.tok {
            Tok::Ident(s) if s == kw => Ok(()),
            other => Err(self.err(t.offset, format!("expected `{kw}`, found {}", describe(other)), &[kw])),
        }
    }

    fn signed_number(&mut self) -> Result<f64, ParseError> {
        let mut sign = 1.0;
        if self.peek().tok == Tok::Sym('-') {
            self.bump();
            sign = -1.0;
        }
        let t = self.bump();
        match t.tok {
            Tok::Num(x) => Ok(sign * x),
            other => Err(self.err(t.offset, format!("expected number, found {}", describe(&other)), &["number"])),
        }
    }

    fn file(&mut self) -> Result<SurfaceAst, ParseError> {
        let mut domain = Domain::default();
        loop {
            match &self.peek().tok {
                Tok::Ident(s) if s == "let" => {
                    self.bump();
                    let t = self.bump();
                    let name = match t.tok {
                        Tok::Ident(n) => n,
                        other => {
                            return Err(self.err(
                                t.offset,
                                format!("expected parameter name, found {}", describe(&other)),
                                &["identifier"],
                            ))
                        }
                    };
                    if name == "u" || name == "v" || Func::from_name(&name).is_some() {
                        return Err(self.err(t.offset, format!("`{name}` is reserved"), &["identifier"]));
                    }
                    self.expect_sym('=')?;
                    let value = self.signed_number()?;
                    self.expect_sym(';')?;
                    self.params.retain(|(n, _)| n != &name);
                    self.params.push((name, value));
                }
                Tok::Ident(s) if s == "domain" => {
                    self.bump();
                    self.expect_keyword("u")?;
                    self.expect_keyword("in")?;
                    self.expect_sym('[')?;
                    let u0 = self.signed_number()?;
                    self.expect_sym(',')?;
                    let u1 = self.signed_number()?;
                    self.expect_sym(']')?;
                    self.expect_sym(',')?;
                    self.expect_keyword("v")?;
                    self.expect_keyword("in")?;
                    self.expect_sym('[')?;
                    let v0 = self.signed_number()?;
                    self.expect_sym(',')?;
                    let v1 = self.signed_number()?;
                    self.expect_sym(']')?;
                    self.expect_sym(';')?;
                    domain.u = (u0, u1);
                    domain.v = (v0, v1);
                }
                Tok::Ident(s) if s == "exclude" => {
                    self.bump();
                    self.expect_keyword("disk")?;
                    self.expect_sym('(')?;
                    let cu = self.signed_number()?;
                    self.expect_sym(',')?;
                    let cv = self.signed_number()?;
                    self.expect_sym(',')?;
                    let r = self.signed_number()?;
                    self.expect_sym(')')?;
                    self.expect_sym(';')?;
                    domain.exclusions.push(Disk { cu, cv, r });
                }
                _ => break,
            }
        }
        let open = self.bump();
        if open.tok != Tok::Sym('[') {
            return Err(self.err(
                open.offset,
                format!("expected component vector `[`, found {}", describe(&open.tok)),
                &["[", "let", "domain", "exclude"],
            ));
        }
        let mut components = vec![self.expr()?];
        loop {
            let t = self.bump();
            match t.tok {
                Tok::Sym(',') => components.push(self.expr()?),
                Tok::Sym(']') => break,
                other => {
                    return Err(self.err(
                        t.offset,
                        format!("expected `,` or `]`, found {}", describe(&other)),
                        &[",", "]"],
                    ))
                }
            }
        }
        let t = self.bump();
        if t.tok != Tok::Eof {
            return Err(self.err(t.offset, format!("trailing input: {}", describe(&t.tok)), &["end of input"]));
        }
        if components.len() < 4 {
            return Err(self.err(
                0,
                format!("ambient dimension {} below 4 (need n >= 2)", components.len()),
                &["at least 4 components"],
            ));
        }
        Ok(SurfaceAst { components, params: self.params.clone(), domain })
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek().tok {
                Tok::Sym('+') => {
                    self.bump();
                    lhs = Expr::Bin(BinOp::Add, Box::new(lhs), Box::new(self.term()?));
                }
                Tok::Sym('-') => {
                    self.bump();
                    lhs = Expr::Bin(BinOp::Sub, Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            match self.peek().tok {
                Tok::Sym('*') => {
                    self.bump();
                    lhs = Expr::Bin(BinOp::Mul, Box::new(lhs), Box::new(self.factor()?));
                }
                Tok::Sym('/') => {
                    self.bump();
                    lhs = Expr::Bin(BinOp::Div, Box::new(lhs), Box::new(self.factor()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        if self.peek().tok == Tok::Sym('-') {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.factor()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if self.peek().tok == Tok::Sym('^') {
            self.bump();
            // right-associative; exponent may carry a unary minus
            let exp = self.factor()?;
            return Ok(Expr::Bin(BinOp::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let t = self.bump();
        match t.tok {
            Tok::Num(x) => Ok(Expr::Num(x)),
            Tok::Sym('(') => {
                let e = self.expr()?;
                self.expect_sym(')')?;
                Ok(e)
            }
            Tok::Ident(name) => {
                if let Some(f) = Func::from_name(&name) {
                    self.expect_sym('(')?;
                    let arg = self.expr()?;
                    self.expect_sym(')')?;
                    return Ok(Expr::Call(f, Box::new(arg)));
                }
                match name.as_str() {
                    "u" => Ok(Expr::U),
                    "v" => Ok(Expr::V),
                    _ => {
                        if self.params.iter().any(|(n, _)| n == &name) {
                            Ok(Expr::Param(name))
                        } else {
                            Err(self.err(
                                t.offset,
                                format!("unknown identifier `{name}`"),
                                &["u", "v", "declared parameter"],
                            ))
                        }
                    }
                }
            }
            other => Err(self.err(
                t.offset,
                format!("expected expression, found {}", describe(&other)),
                &["number", "identifier", "(", "-"],
            )),
        }
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Num(x) => format!("number `{x}`"),
        Tok::Ident(s) => format!("`{s}`"),
        Tok::Sym(c) => format!("`{c}`"),
        Tok::Eof => "end of input".into(),
    }
}

// ---------------------------------------------------------------------------
// Pretty printer (canonical, fully parenthesized; parse . print is identity)
// ---------------------------------------------------------------------------

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(x) => write!(f, "{x}"),
            Expr::U => write!(f, "u"),
            Expr::V => write!(f, "v"),
            Expr::Param(p) => write!(f, "{p}"),
            Expr::Neg(e) => write!(f, "(-{e})"),
            Expr::Bin(op, a, b) => {
                let s = match op {
                    BinOp::Add => "+",
                    BinOp::Sub => "-",
                    BinOp::Mul => "*",
                    BinOp::Div => "/",
                    BinOp::Pow => "^",
                };
                write!(f, "({a} {s} {b})")
            }
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

impl fmt::Display for SurfaceAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (name, value) in &self.params {
            writeln!(f, "let {name} = {value};")?;
        }
        let d = &self.domain;
        writeln!(
            f,
            "domain u in [{}, {}], v in [{}, {}];",
            d.u.0, d.u.1, d.v.0, d.v.1
        )?;
        for disk in &d.exclusions {
            writeln!(f, "exclude disk({}, {}, {});", disk.cu, disk.cv, disk.r)?;
        }
        write!(f, "[")?;
        for (i, c) in self.components.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "]")
    }
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

impl SurfaceAst {
    pub fn ambient_dim(&self) -> usize {
        self.components.len()
    }

    fn param(&self, name: &str) -> f64 {
        self.params
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| *v)
            .expect("identifiers validated at parse time")
    }

    /// Evaluate all components over any scalar; `u` and `v` carry the chart
    /// point (as variables for series, as plain values for floats).
    pub fn eval_components<S: Scalar>(&self, u: &S, v: &S) -> Result<Vec<S>, Error> {
        self.components
            .iter()
            .map(|e| self.eval_expr(e, u, v).map_err(Error::from))
            .collect()
    }

    fn eval_expr<S: Scalar>(&self, e: &Expr, u: &S, v: &S) -> Result<S, TaylorError> {
        Ok(match e {
            Expr::Num(x) => S::of(*x),
            Expr::U => u.clone(),
            Expr::V => v.clone(),
            Expr::Param(p) => S::of(self.param(p)),
            Expr::Neg(a) => -self.eval_expr(a, u, v)?,
            Expr::Call(f, a) => {
                let x = self.eval_expr(a, u, v)?;
                match f {
                    Func::Sin => x.sin(),
                    Func::Cos => x.cos(),
                    Func::Exp => x.exp(),
                    Func::Log => x.ln()?,
                    Func::Sqrt => x.sqrt()?,
                    Func::Atan => x.atan(),
                }
            }
            Expr::Bin(op, a, b) => {
                let x = self.eval_expr(a, u, v)?;
                let y = self.eval_expr(b, u, v)?;
                match op {
                    BinOp::Add => x + y,
                    BinOp::Sub => x - y,
                    BinOp::Mul => x * y,
                    BinOp::Div => x.try_div(&y)?,
                    BinOp::Pow => {
                        if y.is_constant() {
                            let e = y.value().to_f64_lossy();
                            if e.fract() == 0.0 && e.abs() <= 64.0 {
                                x.powi(e as i32)?
                            } else {
                                x.powf(y.value())?
                            }
                        } else {
                            // b^e = exp(e log b)
                            (y * x.ln()?).exp()
                        }
                    }
                }
            }
        })
    }
}
