//! A small expression grammar for level functions.
//!
//! Sums, products and quotients of sines, cosines, exponentials and
//! polynomials in the level coordinates `x0, x1, ...`. Expressions carry
//! exact symbolic derivatives, so functions built from them have analytic
//! gradient oracles.
//!
//! Grammar:
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := factor (('*' | '/') factor)*
//! factor  := unary ('^' integer)?
//! unary   := '-' unary | primary
//! primary := number | 'pi' | 'x'<digits> | ('sin'|'cos'|'exp') '(' expr ')' | '(' expr ')'
//! ```

use crate::error::{Error, Result};
use std::fmt;
use std::sync::Arc;

#[derive(Clone, Debug)]
pub enum Expr {
    Const(f64),
    /// Level coordinate `x<k>`.
    Var(usize),
    Add(Arc<Expr>, Arc<Expr>),
    Sub(Arc<Expr>, Arc<Expr>),
    Mul(Arc<Expr>, Arc<Expr>),
    Div(Arc<Expr>, Arc<Expr>),
    Neg(Arc<Expr>),
    /// Integer power, exponent >= 0.
    Pow(Arc<Expr>, u32),
    Sin(Arc<Expr>),
    Cos(Arc<Expr>),
    Exp(Arc<Expr>),
}

impl Expr {
    pub fn parse(src: &str) -> Result<Expr> {
        Parser::new(src)?.parse_expr_complete()
    }

    pub fn constant(v: f64) -> Expr {
        Expr::Const(v)
    }

    pub fn var(k: usize) -> Expr {
        Expr::Var(k)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Expr::Const(c) => *c,
            Expr::Var(k) => x[*k],
            Expr::Add(a, b) => a.eval(x) + b.eval(x),
            Expr::Sub(a, b) => a.eval(x) - b.eval(x),
            Expr::Mul(a, b) => a.eval(x) * b.eval(x),
            Expr::Div(a, b) => a.eval(x) / b.eval(x),
            Expr::Neg(a) => -a.eval(x),
            Expr::Pow(a, n) => a.eval(x).powi(*n as i32),
            Expr::Sin(a) => a.eval(x).sin(),
            Expr::Cos(a) => a.eval(x).cos(),
            Expr::Exp(a) => a.eval(x).exp(),
        }
    }

    /// Exact partial derivative with respect to coordinate `k`.
    pub fn diff(&self, k: usize) -> Expr {
        match self {
            Expr::Const(_) => Expr::Const(0.0),
            Expr::Var(v) => Expr::Const(if *v == k { 1.0 } else { 0.0 }),
            Expr::Add(a, b) => add(a.diff(k), b.diff(k)),
            Expr::Sub(a, b) => sub(a.diff(k), b.diff(k)),
            Expr::Mul(a, b) => add(
                mul(a.diff(k), b.as_ref().clone()),
                mul(a.as_ref().clone(), b.diff(k)),
            ),
            Expr::Div(a, b) => div(
                sub(
                    mul(a.diff(k), b.as_ref().clone()),
                    mul(a.as_ref().clone(), b.diff(k)),
                ),
                Expr::Pow(b.clone(), 2),
            ),
            Expr::Neg(a) => neg(a.diff(k)),
            Expr::Pow(a, n) => {
                if *n == 0 {
                    Expr::Const(0.0)
                } else {
                    mul(
                        mul(Expr::Const(*n as f64), Expr::Pow(a.clone(), n - 1)),
                        a.diff(k),
                    )
                }
            }
            Expr::Sin(a) => mul(Expr::Cos(a.clone()), a.diff(k)),
            Expr::Cos(a) => neg(mul(Expr::Sin(a.clone()), a.diff(k))),
            Expr::Exp(a) => mul(Expr::Exp(a.clone()), a.diff(k)),
        }
    }

    /// Replace every coordinate by the expression `subs` assigns to it.
    pub fn substitute(&self, subs: &dyn Fn(usize) -> Expr) -> Expr {
        match self {
            Expr::Const(c) => Expr::Const(*c),
            Expr::Var(k) => subs(*k),
            Expr::Add(a, b) => add(a.substitute(subs), b.substitute(subs)),
            Expr::Sub(a, b) => sub(a.substitute(subs), b.substitute(subs)),
            Expr::Mul(a, b) => mul(a.substitute(subs), b.substitute(subs)),
            Expr::Div(a, b) => div(a.substitute(subs), b.substitute(subs)),
            Expr::Neg(a) => neg(a.substitute(subs)),
            Expr::Pow(a, n) => Expr::Pow(Arc::new(a.substitute(subs)), *n),
            Expr::Sin(a) => Expr::Sin(Arc::new(a.substitute(subs))),
            Expr::Cos(a) => Expr::Cos(Arc::new(a.substitute(subs))),
            Expr::Exp(a) => Expr::Exp(Arc::new(a.substitute(subs))),
        }
    }

    /// Largest coordinate index mentioned, if any.
    pub fn max_var(&self) -> Option<usize> {
        match self {
            Expr::Const(_) => None,
            Expr::Var(k) => Some(*k),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                match (a.max_var(), b.max_var()) {
                    (Some(x), Some(y)) => Some(x.max(y)),
                    (x, y) => x.or(y),
                }
            }
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Sin(a) | Expr::Cos(a) | Expr::Exp(a) => {
                a.max_var()
            }
        }
    }
}

// Folding constructors keep derivative expressions from ballooning.

fn add(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        (Expr::Const(x), Expr::Const(y)) => Expr::Const(x + y),
        (Expr::Const(x), _) if *x == 0.0 => b,
        (_, Expr::Const(y)) if *y == 0.0 => a,
        _ => Expr::Add(Arc::new(a), Arc::new(b)),
    }
}

fn sub(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        (Expr::Const(x), Expr::Const(y)) => Expr::Const(x - y),
        (_, Expr::Const(y)) if *y == 0.0 => a,
        (Expr::Const(x), _) if *x == 0.0 => neg(b),
        _ => Expr::Sub(Arc::new(a), Arc::new(b)),
    }
}

fn mul(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        (Expr::Const(x), Expr::Const(y)) => Expr::Const(x * y),
        (Expr::Const(x), _) if *x == 0.0 => Expr::Const(0.0),
        (_, Expr::Const(y)) if *y == 0.0 => Expr::Const(0.0),
        (Expr::Const(x), _) if *x == 1.0 => b,
        (_, Expr::Const(y)) if *y == 1.0 => a,
        _ => Expr::Mul(Arc::new(a), Arc::new(b)),
    }
}

fn div(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        (Expr::Const(x), _) if *x == 0.0 => Expr::Const(0.0),
        (_, Expr::Const(y)) if *y == 1.0 => a,
        _ => Expr::Div(Arc::new(a), Arc::new(b)),
    }
}

fn neg(a: Expr) -> Expr {
    match &a {
        Expr::Const(x) => Expr::Const(-x),
        _ => Expr::Neg(Arc::new(a)),
    }
}

pub mod build {
    //! Programmatic constructors mirroring the folding rules of the parser.
    use super::*;

    pub fn sum(a: Expr, b: Expr) -> Expr {
        add(a, b)
    }
    pub fn product(a: Expr, b: Expr) -> Expr {
        mul(a, b)
    }
    pub fn difference(a: Expr, b: Expr) -> Expr {
        sub(a, b)
    }
    pub fn scaled(c: f64, a: Expr) -> Expr {
        mul(Expr::Const(c), a)
    }
    pub fn sin(a: Expr) -> Expr {
        Expr::Sin(Arc::new(a))
    }
    pub fn cos(a: Expr) -> Expr {
        Expr::Cos(Arc::new(a))
    }
}

/// A random trigonometric polynomial in `n_vars` coordinates: bounded
/// coefficients, frequencies up to `max_freq` scaled per coordinate so the
/// function is periodic with the given periods (pass the coordinate period,
/// or any positive number for an unconstrained coordinate). One random cross
/// term exercises mixed partials.
pub fn random_trig_poly<R: rand::Rng>(periods: &[f64], max_freq: u32, rng: &mut R) -> Expr {
    use build::*;
    let n = periods.len();
    let mut acc = Expr::Const(rng.gen_range(-1.0..1.0));
    for (v, period) in periods.iter().enumerate() {
        let base = std::f64::consts::TAU / period;
        for k in 1..=max_freq {
            let arg = scaled(base * k as f64, Expr::Var(v));
            acc = sum(acc, scaled(rng.gen_range(-1.0..1.0), sin(arg.clone())));
            acc = sum(acc, scaled(rng.gen_range(-1.0..1.0), cos(arg)));
        }
    }
    if n >= 2 {
        let i = rng.gen_range(0..n);
        let mut j = rng.gen_range(0..n);
        if j == i {
            j = (j + 1) % n;
        }
        let arg_i = scaled(std::f64::consts::TAU / periods[i], Expr::Var(i));
        let arg_j = scaled(std::f64::consts::TAU / periods[j], Expr::Var(j));
        acc = sum(
            acc,
            scaled(rng.gen_range(-1.0..1.0), product(cos(arg_i), sin(arg_j))),
        );
    }
    acc
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => write!(f, "{c}"),
            Expr::Var(k) => write!(f, "x{k}"),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "({a} * {b})"),
            Expr::Div(a, b) => write!(f, "({a} / {b})"),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Pow(a, n) => write!(f, "{a}^{n}"),
            Expr::Sin(a) => write!(f, "sin({a})"),
            Expr::Cos(a) => write!(f, "cos({a})"),
            Expr::Exp(a) => write!(f, "exp({a})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(f64),
    Var(usize),
    Name(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn new(src: &str) -> Result<Parser> {
        let mut tokens = Vec::new();
        let chars: Vec<char> = src.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            match c {
                ' ' | '\t' | '\n' => i += 1,
                '+' => {
                    tokens.push(Token::Plus);
                    i += 1;
                }
                '-' => {
                    tokens.push(Token::Minus);
                    i += 1;
                }
                '*' => {
                    tokens.push(Token::Star);
                    i += 1;
                }
                '/' => {
                    tokens.push(Token::Slash);
                    i += 1;
                }
                '^' => {
                    tokens.push(Token::Caret);
                    i += 1;
                }
                '(' => {
                    tokens.push(Token::LParen);
                    i += 1;
                }
                ')' => {
                    tokens.push(Token::RParen);
                    i += 1;
                }
                '0'..='9' | '.' => {
                    let start = i;
                    while i < chars.len()
                        && (chars[i].is_ascii_digit()
                            || chars[i] == '.'
                            || chars[i] == 'e'
                            || chars[i] == 'E'
                            || ((chars[i] == '+' || chars[i] == '-')
                                && i > start
                                && (chars[i - 1] == 'e' || chars[i - 1] == 'E')))
                    {
                        i += 1;
                    }
                    let text: String = chars[start..i].iter().collect();
                    let v: f64 = text
                        .parse()
                        .map_err(|_| Error::Parse(format!("bad number '{text}'")))?;
                    tokens.push(Token::Num(v));
                }
                'a'..='z' | 'A'..='Z' => {
                    let start = i;
                    while i < chars.len() && (chars[i].is_ascii_alphanumeric()) {
                        i += 1;
                    }
                    let name: String = chars[start..i].iter().collect();
                    if let Some(rest) = name.strip_prefix('x') {
                        if !rest.is_empty() && rest.chars().all(|c| c.is_ascii_digit()) {
                            let k: usize = rest
                                .parse()
                                .map_err(|_| Error::Parse(format!("bad variable '{name}'")))?;
                            tokens.push(Token::Var(k));
                            continue;
                        }
                    }
                    tokens.push(Token::Name(name));
                }
                other => return Err(Error::Parse(format!("unexpected character '{other}'"))),
            }
        }
        Ok(Parser { tokens, pos: 0 })
    }

    fn parse_expr_complete(mut self) -> Result<Expr> {
        let e = self.expr()?;
        if self.pos != self.tokens.len() {
            return Err(Error::Parse("trailing input after expression".into()));
        }
        Ok(e)
    }

    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, t: Token) -> Result<()> {
        match self.next() {
            Some(got) if got == t => Ok(()),
            other => Err(Error::Parse(format!("expected {t:?}, found {other:?}"))),
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(Token::Plus) => {
                    self.next();
                    acc = add(acc, self.term()?);
                }
                Some(Token::Minus) => {
                    self.next();
                    acc = sub(acc, self.term()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Some(Token::Star) => {
                    self.next();
                    acc = mul(acc, self.factor()?);
                }
                Some(Token::Slash) => {
                    self.next();
                    acc = div(acc, self.factor()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn factor(&mut self) -> Result<Expr> {
        let base = self.unary()?;
        if let Some(Token::Caret) = self.peek() {
            self.next();
            match self.next() {
                Some(Token::Num(v)) if v >= 0.0 && v.fract() == 0.0 => {
                    Ok(Expr::Pow(Arc::new(base), v as u32))
                }
                other => Err(Error::Parse(format!(
                    "exponent must be a nonnegative integer, found {other:?}"
                ))),
            }
        } else {
            Ok(base)
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if let Some(Token::Minus) = self.peek() {
            self.next();
            return Ok(neg(self.unary()?));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Expr> {
        match self.next() {
            Some(Token::Num(v)) => Ok(Expr::Const(v)),
            Some(Token::Var(k)) => Ok(Expr::Var(k)),
            Some(Token::LParen) => {
                let e = self.expr()?;
                self.expect(Token::RParen)?;
                Ok(e)
            }
            Some(Token::Name(name)) => match name.as_str() {
                "pi" => Ok(Expr::Const(std::f64::consts::PI)),
                "sin" | "cos" | "exp" => {
                    self.expect(Token::LParen)?;
                    let arg = self.expr()?;
                    self.expect(Token::RParen)?;
                    Ok(match name.as_str() {
                        "sin" => Expr::Sin(Arc::new(arg)),
                        "cos" => Expr::Cos(Arc::new(arg)),
                        _ => Expr::Exp(Arc::new(arg)),
                    })
                }
                other => Err(Error::Parse(format!("unknown name '{other}'"))),
            },
            other => Err(Error::Parse(format!("unexpected token {other:?}"))),
        }
    }
}
