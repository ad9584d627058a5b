//! Scalar expressions of time: parsing, evaluation and exact symbolic
//! differentiation.
//!
//! The grammar is deliberately small:
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := '-' factor | power
//! power  := atom ('^' factor)?
//! atom   := number | ident | ident '(' expr ')' | '(' expr ')'
//! ```
//!
//! `t` is the time variable and `pi` a built-in constant; every other bare
//! identifier is a named parameter resolved from [`Bindings`] at evaluation
//! time. Call syntax is accepted for `sin`, `cos`, `exp`, `sqrt` and `log`.

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::math;

/// Values for named parameters.
pub type Bindings = BTreeMap<String, f64>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
            BinOp::Pow => '^',
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Sqrt,
    Log,
}

impl Func {
    fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "sqrt" => Func::Sqrt,
            "log" => Func::Log,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Sqrt => "sqrt",
            Func::Log => "log",
        }
    }
}

/// Expression tree. Immutable once built; cheap to share by reference.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Const(f64),
    Time,
    Param(String),
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum ParseError {
    #[error("parse error at byte {offset}: expected {expected}")]
    Unexpected {
        offset: usize,
        expected: &'static str,
    },
    #[error("unknown function `{name}` at byte {offset}")]
    UnknownFunction { name: String, offset: usize },
}

impl ParseError {
    pub fn offset(&self) -> usize {
        match self {
            ParseError::Unexpected { offset, .. } | ParseError::UnknownFunction { offset, .. } => {
                *offset
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DomainKind {
    SqrtOfNegative,
    LogOfNonPositive,
    DivisionByZero,
    NonFinite,
}

impl fmt::Display for DomainKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DomainKind::SqrtOfNegative => "sqrt of negative argument",
            DomainKind::LogOfNonPositive => "log of non-positive argument",
            DomainKind::DivisionByZero => "division by zero",
            DomainKind::NonFinite => "non-finite result",
        })
    }
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("unbound parameter `{0}`")]
    Unbound(String),
    #[error("{kind} at t = {t}")]
    Domain { kind: DomainKind, t: f64 },
}

// ---------------------------------------------------------------------------
// Lexer

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
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

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        let start = i;
        let tok = match b {
            b' ' | b'\t' | b'\r' | b'\n' => {
                i += 1;
                continue;
            }
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'/' => Tok::Slash,
            b'^' => Tok::Caret,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b'0'..=b'9' | b'.' => {
                let mut j = i;
                while j < bytes.len() && bytes[j].is_ascii_digit() {
                    j += 1;
                }
                if j < bytes.len() && bytes[j] == b'.' {
                    j += 1;
                    while j < bytes.len() && bytes[j].is_ascii_digit() {
                        j += 1;
                    }
                }
                if j < bytes.len() && (bytes[j] == b'e' || bytes[j] == b'E') {
                    let mut k = j + 1;
                    if k < bytes.len() && (bytes[k] == b'+' || bytes[k] == b'-') {
                        k += 1;
                    }
                    if k < bytes.len() && bytes[k].is_ascii_digit() {
                        while k < bytes.len() && bytes[k].is_ascii_digit() {
                            k += 1;
                        }
                        j = k;
                    }
                }
                let text = &src[i..j];
                let value = f64::from_str(text).map_err(|_| ParseError::Unexpected {
                    offset: start,
                    expected: "number",
                })?;
                out.push((Tok::Num(value), start));
                i = j;
                continue;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                let mut j = i;
                while j < bytes.len() && (bytes[j].is_ascii_alphanumeric() || bytes[j] == b'_') {
                    j += 1;
                }
                out.push((Tok::Ident(src[i..j].to_string()), start));
                i = j;
                continue;
            }
            _ => {
                return Err(ParseError::Unexpected {
                    offset: start,
                    expected: "expression",
                })
            }
        };
        out.push((tok, start));
        i += 1;
    }
    out.push((Tok::End, src.len()));
    Ok(out)
}

// ---------------------------------------------------------------------------
// Parser

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.factor()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        if *self.peek() == Tok::Minus {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.factor()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if *self.peek() == Tok::Caret {
            self.bump();
            let exponent = self.factor()?;
            return Ok(Expr::Binary(BinOp::Pow, Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let (tok, offset) = self.bump();
        match tok {
            Tok::Num(v) => Ok(Expr::Const(v)),
            Tok::LParen => {
                let inner = self.expr()?;
                self.expect_rparen()?;
                Ok(inner)
            }
            Tok::Ident(name) => {
                if *self.peek() == Tok::LParen {
                    let func = Func::from_name(&name)
                        .ok_or(ParseError::UnknownFunction { name, offset })?;
                    self.bump();
                    let arg = self.expr()?;
                    self.expect_rparen()?;
                    return Ok(Expr::Call(func, Box::new(arg)));
                }
                Ok(match name.as_str() {
                    "t" => Expr::Time,
                    "pi" => Expr::Const(math::PI),
                    _ => Expr::Param(name),
                })
            }
            _ => Err(ParseError::Unexpected {
                offset,
                expected: "expression",
            }),
        }
    }

    fn expect_rparen(&mut self) -> Result<(), ParseError> {
        if *self.peek() == Tok::RParen {
            self.bump();
            Ok(())
        } else {
            Err(ParseError::Unexpected {
                offset: self.offset(),
                expected: "`)`",
            })
        }
    }
}

/// Parse expression text into an [`Expr`].
pub fn parse_expression(src: &str) -> Result<Expr, ParseError> {
    let toks = lex(src)?;
    let mut p = Parser { toks, pos: 0 };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(ParseError::Unexpected {
            offset: p.offset(),
            expected: "operator or end of input",
        });
    }
    Ok(e)
}

impl FromStr for Expr {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_expression(s)
    }
}

// ---------------------------------------------------------------------------
// Construction helpers

impl Expr {
    pub fn constant(v: f64) -> Expr {
        Expr::Const(v)
    }

    pub fn param(name: &str) -> Expr {
        Expr::Param(name.to_string())
    }

    pub fn binary(op: BinOp, lhs: Expr, rhs: Expr) -> Expr {
        Expr::Binary(op, Box::new(lhs), Box::new(rhs))
    }

    pub fn call(func: Func, arg: Expr) -> Expr {
        Expr::Call(func, Box::new(arg))
    }

    pub fn neg(inner: Expr) -> Expr {
        Expr::Neg(Box::new(inner))
    }

    pub fn add(self, rhs: Expr) -> Expr {
        Expr::binary(BinOp::Add, self, rhs)
    }

    pub fn sub(self, rhs: Expr) -> Expr {
        Expr::binary(BinOp::Sub, self, rhs)
    }

    pub fn mul(self, rhs: Expr) -> Expr {
        Expr::binary(BinOp::Mul, self, rhs)
    }

    pub fn div(self, rhs: Expr) -> Expr {
        Expr::binary(BinOp::Div, self, rhs)
    }

    pub fn pow(self, rhs: Expr) -> Expr {
        Expr::binary(BinOp::Pow, self, rhs)
    }

    /// True if `t` occurs anywhere in the tree.
    pub fn depends_on_time(&self) -> bool {
        match self {
            Expr::Const(_) | Expr::Param(_) => false,
            Expr::Time => true,
            Expr::Neg(e) | Expr::Call(_, e) => e.depends_on_time(),
            Expr::Binary(_, l, r) => l.depends_on_time() || r.depends_on_time(),
        }
    }

    /// Named parameters referenced by the tree, sorted and deduplicated.
    pub fn params(&self) -> Vec<&str> {
        fn walk<'a>(e: &'a Expr, out: &mut Vec<&'a str>) {
            match e {
                Expr::Const(_) | Expr::Time => {}
                Expr::Param(p) => out.push(p),
                Expr::Neg(e) | Expr::Call(_, e) => walk(e, out),
                Expr::Binary(_, l, r) => {
                    walk(l, out);
                    walk(r, out);
                }
            }
        }
        let mut out = Vec::new();
        walk(self, &mut out);
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Replace every named parameter by its bound value.
    pub fn bind(&self, bindings: &Bindings) -> Result<Expr, EvalError> {
        Ok(match self {
            Expr::Const(v) => Expr::Const(*v),
            Expr::Time => Expr::Time,
            Expr::Param(p) => Expr::Const(
                *bindings
                    .get(p)
                    .ok_or_else(|| EvalError::Unbound(p.clone()))?,
            ),
            Expr::Neg(e) => Expr::neg(e.bind(bindings)?),
            Expr::Call(f, e) => Expr::call(*f, e.bind(bindings)?),
            Expr::Binary(op, l, r) => Expr::binary(*op, l.bind(bindings)?, r.bind(bindings)?),
        })
    }

    /// Substitute `t -> replacement` throughout.
    pub fn substitute_time(&self, replacement: &Expr) -> Expr {
        match self {
            Expr::Time => replacement.clone(),
            Expr::Const(_) | Expr::Param(_) => self.clone(),
            Expr::Neg(e) => Expr::neg(e.substitute_time(replacement)),
            Expr::Call(f, e) => Expr::call(*f, e.substitute_time(replacement)),
            Expr::Binary(op, l, r) => Expr::binary(
                *op,
                l.substitute_time(replacement),
                r.substitute_time(replacement),
            ),
        }
    }

    /// Evaluate at time `t`.
    pub fn eval(&self, t: f64, bindings: &Bindings) -> Result<f64, EvalError> {
        let domain = |kind| EvalError::Domain { kind, t };
        let finite = |v: f64| {
            if v.is_finite() {
                Ok(v)
            } else {
                Err(domain(DomainKind::NonFinite))
            }
        };
        match self {
            Expr::Const(v) => Ok(*v),
            Expr::Time => Ok(t),
            Expr::Param(p) => bindings
                .get(p)
                .copied()
                .ok_or_else(|| EvalError::Unbound(p.clone())),
            Expr::Neg(e) => Ok(-e.eval(t, bindings)?),
            Expr::Binary(op, l, r) => {
                let a = l.eval(t, bindings)?;
                let b = r.eval(t, bindings)?;
                match op {
                    BinOp::Add => finite(a + b),
                    BinOp::Sub => finite(a - b),
                    BinOp::Mul => finite(a * b),
                    BinOp::Div => {
                        if b == 0.0 {
                            Err(domain(DomainKind::DivisionByZero))
                        } else {
                            finite(a / b)
                        }
                    }
                    BinOp::Pow => {
                        if a == 0.0 && b < 0.0 {
                            Err(domain(DomainKind::DivisionByZero))
                        } else {
                            finite(math::powf(a, b))
                        }
                    }
                }
            }
            Expr::Call(f, e) => {
                let x = e.eval(t, bindings)?;
                match f {
                    Func::Sin => Ok(math::sin(x)),
                    Func::Cos => Ok(math::cos(x)),
                    Func::Exp => finite(math::exp(x)),
                    Func::Sqrt => {
                        if x < 0.0 {
                            Err(domain(DomainKind::SqrtOfNegative))
                        } else {
                            Ok(math::sqrt(x))
                        }
                    }
                    Func::Log => {
                        if x <= 0.0 {
                            Err(domain(DomainKind::LogOfNonPositive))
                        } else {
                            Ok(math::ln(x))
                        }
                    }
                }
            }
        }
    }

    /// Exact derivative with respect to `t`. Parameters are constants.
    /// The result is not simplified.
    pub fn differentiate(&self) -> Expr {
        match self {
            Expr::Const(_) | Expr::Param(_) => Expr::Const(0.0),
            Expr::Time => Expr::Const(1.0),
            Expr::Neg(e) => Expr::neg(e.differentiate()),
            Expr::Binary(op, l, r) => {
                let (u, v) = (l.as_ref(), r.as_ref());
                match op {
                    BinOp::Add => u.differentiate().add(v.differentiate()),
                    BinOp::Sub => u.differentiate().sub(v.differentiate()),
                    BinOp::Mul => u
                        .differentiate()
                        .mul(v.clone())
                        .add(u.clone().mul(v.differentiate())),
                    BinOp::Div => u
                        .differentiate()
                        .mul(v.clone())
                        .sub(u.clone().mul(v.differentiate()))
                        .div(v.clone().mul(v.clone())),
                    BinOp::Pow => {
                        if !v.depends_on_time() {
                            v.clone()
                                .mul(u.clone().pow(v.clone().sub(Expr::Const(1.0))))
                                .mul(u.differentiate())
                        } else if !u.depends_on_time() {
                            self.clone()
                                .mul(Expr::call(Func::Log, u.clone()))
                                .mul(v.differentiate())
                        } else {
                            self.clone().mul(
                                v.differentiate()
                                    .mul(Expr::call(Func::Log, u.clone()))
                                    .add(v.clone().mul(u.differentiate()).div(u.clone())),
                            )
                        }
                    }
                }
            }
            Expr::Call(f, arg) => {
                let inner = arg.differentiate();
                let a = arg.as_ref().clone();
                let outer = match f {
                    Func::Sin => Expr::call(Func::Cos, a),
                    Func::Cos => Expr::neg(Expr::call(Func::Sin, a)),
                    Func::Exp => Expr::call(Func::Exp, a),
                    Func::Sqrt => {
                        Expr::Const(1.0).div(Expr::Const(2.0).mul(Expr::call(Func::Sqrt, a)))
                    }
                    Func::Log => Expr::Const(1.0).div(a),
                };
                outer.mul(inner)
            }
        }
    }
}

impl fmt::Display for Expr {
    /// Fully parenthesised form that parses back to an equivalent tree.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(v) => {
                if *v < 0.0 {
                    write!(f, "(-{})", -v)
                } else {
                    write!(f, "{}", v)
                }
            }
            Expr::Time => f.write_str("t"),
            Expr::Param(p) => f.write_str(p),
            Expr::Neg(e) => write!(f, "(-{})", e),
            Expr::Binary(op, l, r) => write!(f, "({} {} {})", l, op.symbol(), r),
            Expr::Call(func, e) => write!(f, "{}({})", func.name(), e),
        }
    }
}

/// Evaluate `ast` at `t` with the given parameter bindings.
pub fn eval_expression(ast: &Expr, t: f64, bindings: &Bindings) -> Result<f64, EvalError> {
    ast.eval(t, bindings)
}

/// Exact symbolic time derivative.
pub fn differentiate(ast: &Expr) -> Expr {
    ast.differentiate()
}

/// Reduce a general quadratic Lagrangian
/// `L = m xdot^2/2 + a1 x xdot + a2 x^2/2 + a3 xdot + a4 x`
/// to the `(c, e)` pair of `L = m xdot^2/2 - c x^2/2 - e x` by discarding
/// total time derivatives: `c = a1' - a2`, `e = a3' - a4`.
pub fn reduce_general_lagrangian(a1: &Expr, a2: &Expr, a3: &Expr, a4: &Expr) -> (Expr, Expr) {
    let c = a1.differentiate().sub(a2.clone());
    let e = a3.differentiate().sub(a4.clone());
    (c, e)
}
