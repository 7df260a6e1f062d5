//! Symbolic scalar expressions over declared variables.
//!
//! Lagrangians, Hamiltonians, constraints, and Poisson brackets are all
//! carried as small expression trees. The module provides a recursive-descent
//! parser with byte-offset error reporting, IEEE-double evaluation against a
//! variable binding, exact partial differentiation, and substitution.
//!
//! Simplification is canonicalizing only: `x+0`, `x*1`, `x*0`, `x^0`, `x^1`,
//! and constant folding (including folded negations). There is no general
//! computer-algebra rewriting, so tests that compare derived expressions do
//! it by numeric sampling rather than by structure unless the construction
//! paths are known to coincide.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Error, Result};

/// A variable binding used for evaluation; must cover every variable the
/// evaluated expression references.
pub type Binding = BTreeMap<String, f64>;

/// The fixed function vocabulary. Sufficient for polynomial and
/// trigonometric models; extending the enum extends the parser and the
/// differentiation rules in one place each.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Ln,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Ln => "ln",
        }
    }

    fn from_name(name: &str) -> Option<Func> {
        match name {
            "sin" => Some(Func::Sin),
            "cos" => Some(Func::Cos),
            "exp" => Some(Func::Exp),
            "ln" => Some(Func::Ln),
            _ => None,
        }
    }

    fn apply(self, x: f64) -> f64 {
        match self {
            Func::Sin => x.sin(),
            Func::Cos => x.cos(),
            Func::Exp => x.exp(),
            Func::Ln => x.ln(),
        }
    }
}

/// Expression tree node. Exponents are constant reals stored inline, which
/// keeps differentiation total (the derivative of `f^c` never needs `ln f`
/// unless the user writes it explicitly).
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(String),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, f64),
    Neg(Box<Expr>),
    Call(Func, Box<Expr>),
}

fn is_const(e: &Expr, v: f64) -> bool {
    matches!(e, Expr::Const(c) if *c == v)
}

impl Expr {
    pub fn constant(c: f64) -> Expr {
        Expr::Const(c)
    }

    pub fn var(name: impl Into<String>) -> Expr {
        Expr::Var(name.into())
    }

    /// `a + b` with `x+0` elimination and constant folding.
    pub fn add(a: Expr, b: Expr) -> Expr {
        match (a, b) {
            (Expr::Const(x), Expr::Const(y)) if (x + y).is_finite() => Expr::Const(x + y),
            (a, b) if is_const(&a, 0.0) => b,
            (a, b) if is_const(&b, 0.0) => a,
            (a, b) => Expr::Add(Box::new(a), Box::new(b)),
        }
    }

    /// `a - b`; `a-0` drops the subtraction and `0-b` folds to a negation.
    pub fn sub(a: Expr, b: Expr) -> Expr {
        match (a, b) {
            (Expr::Const(x), Expr::Const(y)) if (x - y).is_finite() => Expr::Const(x - y),
            (a, b) if is_const(&b, 0.0) => a,
            (a, b) if is_const(&a, 0.0) => Expr::neg(b),
            (a, b) => Expr::Sub(Box::new(a), Box::new(b)),
        }
    }

    /// `a * b` with `x*1`, `x*0`, and (nested) constant folding.
    pub fn mul(a: Expr, b: Expr) -> Expr {
        match (a, b) {
            (Expr::Const(x), Expr::Const(y)) if (x * y).is_finite() => Expr::Const(x * y),
            (a, _) | (_, a) if is_const(&a, 0.0) => Expr::Const(0.0),
            (a, b) if is_const(&a, 1.0) => b,
            (a, b) if is_const(&b, 1.0) => a,
            // Collapse c1*(c2*rest) so that chain-rule products of constants
            // (as produced by diff) fold into a single coefficient.
            (Expr::Const(x), Expr::Mul(l, r)) => match *l {
                Expr::Const(y) if (x * y).is_finite() => Expr::mul(Expr::Const(x * y), *r),
                l => Expr::Mul(
                    Box::new(Expr::Const(x)),
                    Box::new(Expr::Mul(Box::new(l), r)),
                ),
            },
            (a, b) => Expr::Mul(Box::new(a), Box::new(b)),
        }
    }

    /// `a / b`; folds constant quotients with a nonzero divisor and drops
    /// division by one.
    pub fn div(a: Expr, b: Expr) -> Expr {
        match (a, b) {
            (Expr::Const(x), Expr::Const(y)) if y != 0.0 && (x / y).is_finite() => {
                Expr::Const(x / y)
            }
            (a, b) if is_const(&b, 1.0) => a,
            (a, b) => Expr::Div(Box::new(a), Box::new(b)),
        }
    }

    /// `base ^ c` with a constant exponent; applies `x^0 -> 1`, `x^1 -> x`,
    /// and constant folding when the result is finite.
    pub fn pow(base: Expr, c: f64) -> Expr {
        if c == 0.0 {
            return Expr::Const(1.0);
        }
        if c == 1.0 {
            return base;
        }
        if let Expr::Const(x) = base {
            let v = powc(x, c);
            if v.is_finite() {
                return Expr::Const(v);
            }
            return Expr::Pow(Box::new(Expr::Const(x)), c);
        }
        Expr::Pow(Box::new(base), c)
    }

    /// `-a`; folds constants and cancels double negation.
    pub fn neg(a: Expr) -> Expr {
        match a {
            Expr::Const(x) => Expr::Const(-x),
            Expr::Neg(inner) => *inner,
            a => Expr::Neg(Box::new(a)),
        }
    }

    /// Function application with constant folding on valid domains.
    pub fn call(f: Func, arg: Expr) -> Expr {
        if let Expr::Const(x) = arg {
            let v = f.apply(x);
            if v.is_finite() {
                return Expr::Const(v);
            }
            return Expr::Call(f, Box::new(Expr::Const(x)));
        }
        Expr::Call(f, Box::new(arg))
    }

    /// The set of variable names referenced anywhere in the tree.
    pub fn variables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Expr::Const(_) => {}
            Expr::Var(name) => {
                out.insert(name.clone());
            }
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Expr::Pow(a, _) | Expr::Neg(a) | Expr::Call(_, a) => a.collect_vars(out),
        }
    }

    /// Evaluate under a binding. Errors identify the offending subexpression
    /// by its printed form: division by zero, `ln` of a non-positive value,
    /// fractional powers of negative bases, unbound variables, and any
    /// non-finite intermediate.
    pub fn eval(&self, binding: &Binding) -> Result<f64> {
        let v = match self {
            Expr::Const(c) => *c,
            Expr::Var(name) => *binding.get(name).ok_or_else(|| Error::Eval {
                node: self.to_string(),
                reason: format!("variable `{name}` is not bound"),
            })?,
            Expr::Add(a, b) => a.eval(binding)? + b.eval(binding)?,
            Expr::Sub(a, b) => a.eval(binding)? - b.eval(binding)?,
            Expr::Mul(a, b) => a.eval(binding)? * b.eval(binding)?,
            Expr::Div(a, b) => {
                let den = b.eval(binding)?;
                if den == 0.0 {
                    return Err(Error::Eval {
                        node: self.to_string(),
                        reason: "division by zero".into(),
                    });
                }
                a.eval(binding)? / den
            }
            Expr::Pow(base, c) => {
                let x = base.eval(binding)?;
                if x < 0.0 && c.fract() != 0.0 {
                    return Err(Error::Eval {
                        node: self.to_string(),
                        reason: "fractional power of a negative base".into(),
                    });
                }
                powc(x, *c)
            }
            Expr::Neg(a) => -a.eval(binding)?,
            Expr::Call(Func::Ln, a) => {
                let x = a.eval(binding)?;
                if x <= 0.0 {
                    return Err(Error::Eval {
                        node: self.to_string(),
                        reason: "ln of a non-positive value".into(),
                    });
                }
                x.ln()
            }
            Expr::Call(f, a) => f.apply(a.eval(binding)?),
        };
        if !v.is_finite() {
            return Err(Error::Eval {
                node: self.to_string(),
                reason: "non-finite result".into(),
            });
        }
        Ok(v)
    }

    /// Evaluate at `len` aligned sample points at once; each variable maps
    /// to a slice of `len` values. Semantics, including the error cases,
    /// match `eval` applied index by index.
    pub fn eval_batch(&self, len: usize, channels: &BTreeMap<&str, &[f64]>) -> Result<Vec<f64>> {
        let v = match self {
            Expr::Const(c) => vec![*c; len],
            Expr::Var(name) => {
                let s = channels.get(name.as_str()).ok_or_else(|| Error::Eval {
                    node: self.to_string(),
                    reason: format!("variable `{name}` is not bound"),
                })?;
                if s.len() != len {
                    return Err(Error::Eval {
                        node: self.to_string(),
                        reason: format!("channel carries {} samples, expected {len}", s.len()),
                    });
                }
                s.to_vec()
            }
            Expr::Add(a, b) => {
                let mut x = a.eval_batch(len, channels)?;
                let y = b.eval_batch(len, channels)?;
                for (xi, yi) in x.iter_mut().zip(&y) {
                    *xi += yi;
                }
                x
            }
            Expr::Sub(a, b) => {
                let mut x = a.eval_batch(len, channels)?;
                let y = b.eval_batch(len, channels)?;
                for (xi, yi) in x.iter_mut().zip(&y) {
                    *xi -= yi;
                }
                x
            }
            Expr::Mul(a, b) => {
                let mut x = a.eval_batch(len, channels)?;
                let y = b.eval_batch(len, channels)?;
                for (xi, yi) in x.iter_mut().zip(&y) {
                    *xi *= yi;
                }
                x
            }
            Expr::Div(a, b) => {
                let mut x = a.eval_batch(len, channels)?;
                let y = b.eval_batch(len, channels)?;
                for (xi, yi) in x.iter_mut().zip(&y) {
                    if *yi == 0.0 {
                        return Err(Error::Eval {
                            node: self.to_string(),
                            reason: "division by zero".into(),
                        });
                    }
                    *xi /= yi;
                }
                x
            }
            Expr::Pow(base, c) => {
                let mut x = base.eval_batch(len, channels)?;
                for xi in x.iter_mut() {
                    if *xi < 0.0 && c.fract() != 0.0 {
                        return Err(Error::Eval {
                            node: self.to_string(),
                            reason: "fractional power of a negative base".into(),
                        });
                    }
                    *xi = powc(*xi, *c);
                }
                x
            }
            Expr::Neg(a) => {
                let mut x = a.eval_batch(len, channels)?;
                for xi in x.iter_mut() {
                    *xi = -*xi;
                }
                x
            }
            Expr::Call(Func::Ln, a) => {
                let mut x = a.eval_batch(len, channels)?;
                for xi in x.iter_mut() {
                    if *xi <= 0.0 {
                        return Err(Error::Eval {
                            node: self.to_string(),
                            reason: "ln of a non-positive value".into(),
                        });
                    }
                    *xi = xi.ln();
                }
                x
            }
            Expr::Call(f, a) => {
                let mut x = a.eval_batch(len, channels)?;
                for xi in x.iter_mut() {
                    *xi = f.apply(*xi);
                }
                x
            }
        };
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::Eval {
                node: self.to_string(),
                reason: "non-finite result".into(),
            });
        }
        Ok(v)
    }

    /// Exact symbolic partial derivative with respect to `var`, simplified
    /// by the canonical rules only.
    pub fn diff(&self, var: &str) -> Expr {
        match self {
            Expr::Const(_) => Expr::Const(0.0),
            Expr::Var(name) => {
                if name == var {
                    Expr::Const(1.0)
                } else {
                    Expr::Const(0.0)
                }
            }
            Expr::Add(a, b) => Expr::add(a.diff(var), b.diff(var)),
            Expr::Sub(a, b) => Expr::sub(a.diff(var), b.diff(var)),
            Expr::Mul(a, b) => Expr::add(
                Expr::mul(a.diff(var), (**b).clone()),
                Expr::mul((**a).clone(), b.diff(var)),
            ),
            Expr::Div(a, b) => Expr::div(
                Expr::sub(
                    Expr::mul(a.diff(var), (**b).clone()),
                    Expr::mul((**a).clone(), b.diff(var)),
                ),
                Expr::pow((**b).clone(), 2.0),
            ),
            Expr::Pow(base, c) => Expr::mul(
                Expr::mul(Expr::Const(*c), Expr::pow((**base).clone(), c - 1.0)),
                base.diff(var),
            ),
            Expr::Neg(a) => Expr::neg(a.diff(var)),
            Expr::Call(Func::Sin, a) => {
                Expr::mul(Expr::call(Func::Cos, (**a).clone()), a.diff(var))
            }
            Expr::Call(Func::Cos, a) => Expr::neg(Expr::mul(
                Expr::call(Func::Sin, (**a).clone()),
                a.diff(var),
            )),
            Expr::Call(Func::Exp, a) => {
                Expr::mul(Expr::call(Func::Exp, (**a).clone()), a.diff(var))
            }
            Expr::Call(Func::Ln, a) => Expr::div(a.diff(var), (**a).clone()),
        }
    }

    /// Replace every occurrence of `var` by `replacement`, rebuilding through
    /// the canonical constructors (so the result is re-simplified).
    pub fn substitute(&self, var: &str, replacement: &Expr) -> Expr {
        match self {
            Expr::Const(c) => Expr::Const(*c),
            Expr::Var(name) => {
                if name == var {
                    replacement.clone()
                } else {
                    Expr::Var(name.clone())
                }
            }
            Expr::Add(a, b) => Expr::add(a.substitute(var, replacement), b.substitute(var, replacement)),
            Expr::Sub(a, b) => Expr::sub(a.substitute(var, replacement), b.substitute(var, replacement)),
            Expr::Mul(a, b) => Expr::mul(a.substitute(var, replacement), b.substitute(var, replacement)),
            Expr::Div(a, b) => Expr::div(a.substitute(var, replacement), b.substitute(var, replacement)),
            Expr::Pow(a, c) => Expr::pow(a.substitute(var, replacement), *c),
            Expr::Neg(a) => Expr::neg(a.substitute(var, replacement)),
            Expr::Call(f, a) => Expr::call(*f, a.substitute(var, replacement)),
        }
    }

    /// Rename variables without touching the tree structure. Names missing
    /// from the map are kept as they are.
    pub fn rename_variables(&self, map: &BTreeMap<String, String>) -> Expr {
        match self {
            Expr::Const(c) => Expr::Const(*c),
            Expr::Var(name) => Expr::Var(map.get(name).cloned().unwrap_or_else(|| name.clone())),
            Expr::Add(a, b) => Expr::Add(
                Box::new(a.rename_variables(map)),
                Box::new(b.rename_variables(map)),
            ),
            Expr::Sub(a, b) => Expr::Sub(
                Box::new(a.rename_variables(map)),
                Box::new(b.rename_variables(map)),
            ),
            Expr::Mul(a, b) => Expr::Mul(
                Box::new(a.rename_variables(map)),
                Box::new(b.rename_variables(map)),
            ),
            Expr::Div(a, b) => Expr::Div(
                Box::new(a.rename_variables(map)),
                Box::new(b.rename_variables(map)),
            ),
            Expr::Pow(a, c) => Expr::Pow(Box::new(a.rename_variables(map)), *c),
            Expr::Neg(a) => Expr::Neg(Box::new(a.rename_variables(map))),
            Expr::Call(f, a) => Expr::Call(*f, Box::new(a.rename_variables(map))),
        }
    }
}

/// Power with integer exponents computed by repeated multiplication, which
/// keeps common cases like squares bit-identical across evaluation paths.
fn powc(x: f64, c: f64) -> f64 {
    if c.fract() == 0.0 && c.abs() <= 512.0 {
        x.powi(c as i32)
    } else {
        x.powf(c)
    }
}

// Printing.
//
// Precedence levels used for parenthesization, mirroring the grammar:
// add/sub 1, mul/div 2, unary minus 3, power 4, atoms 5. A child is wrapped
// in parentheses when its level is below what its position requires, so the
// printed text re-parses to a structurally identical tree.

fn prec(e: &Expr) -> u8 {
    match e {
        Expr::Add(..) | Expr::Sub(..) => 1,
        Expr::Mul(..) | Expr::Div(..) => 2,
        Expr::Neg(_) => 3,
        Expr::Const(c) if *c < 0.0 => 3,
        Expr::Pow(..) => 4,
        _ => 5,
    }
}

fn write_prec(f: &mut fmt::Formatter<'_>, e: &Expr, required: u8) -> fmt::Result {
    if prec(e) < required {
        write!(f, "(")?;
        write_node(f, e)?;
        write!(f, ")")
    } else {
        write_node(f, e)
    }
}

fn write_node(f: &mut fmt::Formatter<'_>, e: &Expr) -> fmt::Result {
    match e {
        Expr::Const(c) => write!(f, "{c}"),
        Expr::Var(name) => write!(f, "{name}"),
        Expr::Add(a, b) => {
            write_prec(f, a, 1)?;
            write!(f, " + ")?;
            write_prec(f, b, 2)
        }
        Expr::Sub(a, b) => {
            write_prec(f, a, 1)?;
            write!(f, " - ")?;
            write_prec(f, b, 2)
        }
        Expr::Mul(a, b) => {
            write_prec(f, a, 2)?;
            write!(f, "*")?;
            write_prec(f, b, 3)
        }
        Expr::Div(a, b) => {
            write_prec(f, a, 2)?;
            write!(f, "/")?;
            write_prec(f, b, 3)
        }
        Expr::Pow(base, c) => {
            write_prec(f, base, 5)?;
            write!(f, "^{c}")
        }
        Expr::Neg(a) => {
            write!(f, "-")?;
            write_prec(f, a, 4)
        }
        Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_node(f, self)
    }
}

// Parsing.

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

fn lex(text: &str) -> Result<Vec<(Token, usize)>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '+' => {
                out.push((Token::Plus, i));
                i += 1;
            }
            '-' => {
                out.push((Token::Minus, i));
                i += 1;
            }
            '*' => {
                out.push((Token::Star, i));
                i += 1;
            }
            '/' => {
                out.push((Token::Slash, i));
                i += 1;
            }
            '^' => {
                out.push((Token::Caret, i));
                i += 1;
            }
            '(' => {
                out.push((Token::LParen, i));
                i += 1;
            }
            ')' => {
                out.push((Token::RParen, i));
                i += 1;
            }
            '0'..='9' => {
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
                let literal = &text[start..i];
                let value: f64 = literal.parse().map_err(|_| Error::Syntax {
                    offset: start,
                    message: format!("invalid numeric literal `{literal}`"),
                })?;
                if !value.is_finite() {
                    return Err(Error::Syntax {
                        offset: start,
                        message: format!("numeric literal `{literal}` out of range"),
                    });
                }
                out.push((Token::Num(value), start));
            }
            'a'..='z' | 'A'..='Z' | '_' => {
                let start = i;
                while i < bytes.len()
                    && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                out.push((Token::Ident(text[start..i].to_string()), start));
            }
            _ => {
                return Err(Error::Syntax {
                    offset: i,
                    message: format!("unexpected character `{c}`"),
                })
            }
        }
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: Vec<(Token, usize)>,
    pos: usize,
    end: usize,
    declared: &'a BTreeSet<String>,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|(t, _)| t)
    }

    fn offset(&self) -> usize {
        self.tokens
            .get(self.pos)
            .map(|(_, o)| *o)
            .unwrap_or(self.end)
    }

    fn advance(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).map(|(t, _)| t.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, t: &Token) -> bool {
        if self.peek() == Some(t) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn parse_expr(&mut self) -> Result<Expr> {
        let mut acc = self.parse_term()?;
        loop {
            if self.eat(&Token::Plus) {
                acc = Expr::add(acc, self.parse_term()?);
            } else if self.eat(&Token::Minus) {
                acc = Expr::sub(acc, self.parse_term()?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn parse_term(&mut self) -> Result<Expr> {
        let mut acc = self.parse_unary()?;
        loop {
            if self.eat(&Token::Star) {
                acc = Expr::mul(acc, self.parse_unary()?);
            } else if self.eat(&Token::Slash) {
                acc = Expr::div(acc, self.parse_unary()?);
            } else {
                return Ok(acc);
            }
        }
    }

    // Unary minus binds looser than `^`, so `-x^2` is `-(x^2)`.
    fn parse_unary(&mut self) -> Result<Expr> {
        if self.eat(&Token::Minus) {
            return Ok(Expr::neg(self.parse_unary()?));
        }
        self.parse_power()
    }

    // `^` is right-associative with a constant exponent; the exponent slot
    // accepts a signed or parenthesized constant expression.
    fn parse_power(&mut self) -> Result<Expr> {
        let base = self.parse_atom()?;
        if self.eat(&Token::Caret) {
            let caret_offset = self.offset();
            let exponent = self.parse_unary()?;
            let c = match exponent {
                Expr::Const(c) => c,
                other => {
                    return Err(Error::Syntax {
                        offset: caret_offset,
                        message: format!("exponent must be a constant, found `{other}`"),
                    })
                }
            };
            return Ok(Expr::pow(base, c));
        }
        Ok(base)
    }

    fn parse_atom(&mut self) -> Result<Expr> {
        let offset = self.offset();
        match self.advance() {
            Some(Token::Num(v)) => Ok(Expr::Const(v)),
            Some(Token::Ident(name)) => {
                if self.peek() == Some(&Token::LParen) {
                    let func = Func::from_name(&name).ok_or_else(|| Error::Syntax {
                        offset,
                        message: format!(
                            "unknown function `{name}` (supported: sin, cos, exp, ln)"
                        ),
                    })?;
                    self.pos += 1;
                    let arg = self.parse_expr()?;
                    if !self.eat(&Token::RParen) {
                        return Err(Error::Syntax {
                            offset: self.offset(),
                            message: "expected `)`".into(),
                        });
                    }
                    Ok(Expr::call(func, arg))
                } else if self.declared.contains(&name) {
                    Ok(Expr::Var(name))
                } else {
                    Err(Error::Undeclared { name, offset })
                }
            }
            Some(Token::LParen) => {
                let inner = self.parse_expr()?;
                if !self.eat(&Token::RParen) {
                    return Err(Error::Syntax {
                        offset: self.offset(),
                        message: "expected `)`".into(),
                    });
                }
                Ok(inner)
            }
            _ => Err(Error::Syntax {
                offset,
                message: "expected a number, variable, function call, or `(`".into(),
            }),
        }
    }
}

/// Parse `text` over the given declared variable names.
///
/// Grammar, loosest to tightest: `+`/`-`, then `*`/`/`, then unary minus,
/// then right-associative `^` with constant exponents, then atoms. Undeclared
/// names are rejected with their byte offset.
pub fn parse(text: &str, declared: &BTreeSet<String>) -> Result<Expr> {
    let tokens = lex(text)?;
    if tokens.is_empty() {
        return Err(Error::Syntax {
            offset: 0,
            message: "empty expression".into(),
        });
    }
    let mut parser = Parser {
        tokens,
        pos: 0,
        end: text.len(),
        declared,
    };
    let expr = parser.parse_expr()?;
    if parser.pos != parser.tokens.len() {
        return Err(Error::Syntax {
            offset: parser.offset(),
            message: "unexpected trailing input".into(),
        });
    }
    Ok(expr)
}

/// Convenience constructor for a declared-variable set.
pub fn name_set<I, S>(names: I) -> BTreeSet<String>
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    names.into_iter().map(Into::into).collect()
}
