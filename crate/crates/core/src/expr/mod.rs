//! Formula expressions for metric components and test fields.
//!
//! Grammar (whitespace-insensitive):
//!
//! ```text
//! expr  := term (('+' | '-') term)*
//! term  := unary (('*' | '/') unary)*
//! unary := '-'? power
//! power := atom ('^' '-'? intlit)?
//! atom  := number | 'pi' | var | func '(' expr ')' | '(' expr ')'
//! ```
//!
//! Variables are `x1` … `x8`; functions are `sin cos tan exp log sqrt sinh cosh`.

mod parse;
mod program;

use std::fmt;

use thiserror::Error;

use crate::jets::{ElementaryFn, Jet, JetError};

pub use parse::parse;
pub use program::{Program, ProgramScratch};

/// Largest variable index the grammar accepts.
pub const MAX_VARIABLES: usize = 8;

/// 1-based character positions `[start, end)` in the source text.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
        }
    }

    fn precedence(self) -> u8 {
        match self {
            BinOp::Add | BinOp::Sub => 1,
            BinOp::Mul | BinOp::Div => 2,
        }
    }
}

#[derive(Debug, Clone)]
pub enum ExprKind {
    Number(f64),
    Pi,
    /// 1-based variable index.
    Var(usize),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Pow(Box<Expr>, i32),
    Call(ElementaryFn, Box<Expr>),
}

/// An AST node. Equality compares structure only; spans are ignored.
#[derive(Debug, Clone)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        use ExprKind::*;
        match (&self.kind, &other.kind) {
            (Number(a), Number(b)) => a.to_bits() == b.to_bits(),
            (Pi, Pi) => true,
            (Var(a), Var(b)) => a == b,
            (Binary(o1, l1, r1), Binary(o2, l2, r2)) => o1 == o2 && l1 == l2 && r1 == r2,
            (Neg(a), Neg(b)) => a == b,
            (Pow(a, e1), Pow(b, e2)) => e1 == e2 && a == b,
            (Call(f1, a), Call(f2, b)) => f1 == f2 && a == b,
            _ => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax,
    UnknownIdentifier(String),
    VariableOutOfRange { index: usize, dim: usize },
    NonIntegerExponent,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{message} at position {position}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    /// 1-based character position.
    pub position: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("point has {got} coordinates, expression expects {dim}")]
    PointLength { got: usize, dim: usize },
    #[error("division by zero")]
    DivisionByZero,
    #[error("{func} is undefined at {value}")]
    Domain { func: &'static str, value: f64 },
    #[error(transparent)]
    Jet(#[from] JetError),
}

fn lift_jet_error(e: JetError) -> EvalError {
    match e {
        JetError::ZeroDivision => EvalError::DivisionByZero,
        JetError::Domain { func, value } => EvalError::Domain { func, value },
        other => EvalError::Jet(other),
    }
}

/// A parsed formula over `dim` chart variables.
#[derive(Debug, Clone, PartialEq)]
pub struct Expression {
    root: Expr,
    dim: usize,
}

impl Expression {
    pub fn new(root: Expr, dim: usize) -> Self {
        Self { root, dim }
    }

    pub fn root(&self) -> &Expr {
        &self.root
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Sorted, de-duplicated 1-based variable indices referenced.
    pub fn variables(&self) -> Vec<usize> {
        let mut out = Vec::new();
        collect_vars(&self.root, &mut out);
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Plain real evaluation.
    pub fn eval(&self, point: &[f64]) -> Result<f64, EvalError> {
        if point.len() != self.dim {
            return Err(EvalError::PointLength {
                got: point.len(),
                dim: self.dim,
            });
        }
        eval_real(&self.root, point)
    }

    /// Evaluates the formula in jet arithmetic at `point`.
    pub fn eval_jet(&self, point: &[f64], order: usize) -> Result<Jet, EvalError> {
        if point.len() != self.dim {
            return Err(EvalError::PointLength {
                got: point.len(),
                dim: self.dim,
            });
        }
        eval_jet(&self.root, point, self.dim, order)
    }
}

impl Expression {
    pub fn constant(value: f64, dim: usize) -> Self {
        Self::new(node(ExprKind::Number(value)), dim)
    }

    /// `c * (self)`.
    pub fn scaled(&self, c: f64) -> Self {
        let kind = ExprKind::Binary(BinOp::Mul, Box::new(node(ExprKind::Number(c))), Box::new(self.root.clone()));
        Self::new(node(kind), self.dim)
    }

    /// `self + other`; both must share the chart dimension.
    pub fn plus(&self, other: &Expression) -> Self {
        assert_eq!(self.dim, other.dim, "expression dimension");
        let kind = ExprKind::Binary(BinOp::Add, Box::new(self.root.clone()), Box::new(other.root.clone()));
        Self::new(node(kind), self.dim)
    }

    /// Re-homes the formula into a `dim`-variable chart, renaming `x_i` to
    /// `x_{i+offset}`.
    pub fn embedded(&self, offset: usize, dim: usize) -> Self {
        assert!(self.dim + offset <= dim, "embedding exceeds target dimension");
        Self::new(shift_vars(&self.root, offset), dim)
    }
}

fn node(kind: ExprKind) -> Expr {
    Expr {
        kind,
        span: Span::default(),
    }
}

fn shift_vars(e: &Expr, offset: usize) -> Expr {
    let kind = match &e.kind {
        ExprKind::Var(i) => ExprKind::Var(i + offset),
        ExprKind::Number(v) => ExprKind::Number(*v),
        ExprKind::Pi => ExprKind::Pi,
        ExprKind::Binary(op, a, b) => ExprKind::Binary(*op, Box::new(shift_vars(a, offset)), Box::new(shift_vars(b, offset))),
        ExprKind::Neg(a) => ExprKind::Neg(Box::new(shift_vars(a, offset))),
        ExprKind::Pow(a, p) => ExprKind::Pow(Box::new(shift_vars(a, offset)), *p),
        ExprKind::Call(f, a) => ExprKind::Call(*f, Box::new(shift_vars(a, offset))),
    };
    Expr { kind, span: e.span }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_expr(f, &self.root)
    }
}

fn collect_vars(e: &Expr, out: &mut Vec<usize>) {
    match &e.kind {
        ExprKind::Var(i) => out.push(*i),
        ExprKind::Number(_) | ExprKind::Pi => {}
        ExprKind::Binary(_, a, b) => {
            collect_vars(a, out);
            collect_vars(b, out);
        }
        ExprKind::Neg(a) | ExprKind::Pow(a, _) | ExprKind::Call(_, a) => collect_vars(a, out),
    }
}

fn eval_real(e: &Expr, point: &[f64]) -> Result<f64, EvalError> {
    Ok(match &e.kind {
        ExprKind::Number(v) => *v,
        ExprKind::Pi => std::f64::consts::PI,
        ExprKind::Var(i) => point[i - 1],
        ExprKind::Binary(op, a, b) => {
            let a = eval_real(a, point)?;
            let b = eval_real(b, point)?;
            match op {
                BinOp::Add => a + b,
                BinOp::Sub => a - b,
                BinOp::Mul => a * b,
                BinOp::Div => {
                    if b == 0.0 {
                        return Err(EvalError::DivisionByZero);
                    }
                    a / b
                }
            }
        }
        ExprKind::Neg(a) => -eval_real(a, point)?,
        ExprKind::Pow(a, p) => {
            let a = eval_real(a, point)?;
            if *p < 0 && a == 0.0 {
                return Err(EvalError::DivisionByZero);
            }
            a.powi(*p)
        }
        ExprKind::Call(f, a) => {
            let a = eval_real(a, point)?;
            f.check_domain(a).map_err(lift_jet_error)?;
            f.eval(a)
        }
    })
}

fn eval_jet(e: &Expr, point: &[f64], dim: usize, order: usize) -> Result<Jet, EvalError> {
    let jet = match &e.kind {
        ExprKind::Number(v) => Jet::constant(*v, dim, order)?,
        ExprKind::Pi => Jet::constant(std::f64::consts::PI, dim, order)?,
        ExprKind::Var(i) => Jet::variable(*i, point[i - 1], dim, order)?,
        ExprKind::Binary(op, a, b) => {
            let a = eval_jet(a, point, dim, order)?;
            let b = eval_jet(b, point, dim, order)?;
            let op = match op {
                BinOp::Add => crate::jets::ArithOp::Add,
                BinOp::Sub => crate::jets::ArithOp::Sub,
                BinOp::Mul => crate::jets::ArithOp::Mul,
                BinOp::Div => crate::jets::ArithOp::Div,
            };
            a.arith(&b, op).map_err(lift_jet_error)?
        }
        ExprKind::Neg(a) => eval_jet(a, point, dim, order)?.neg(),
        ExprKind::Pow(a, p) => eval_jet(a, point, dim, order)?
            .powi(*p)
            .map_err(lift_jet_error)?,
        ExprKind::Call(f, a) => eval_jet(a, point, dim, order)?
            .apply(*f)
            .map_err(lift_jet_error)?,
    };
    Ok(jet)
}

// Printing uses the minimal parentheses that reproduce the same tree on
// reparse.
const PREC_UNARY: u8 = 3;
const PREC_POWER: u8 = 4;
const PREC_ATOM: u8 = 5;

fn precedence(e: &Expr) -> u8 {
    match &e.kind {
        ExprKind::Binary(op, _, _) => op.precedence(),
        ExprKind::Neg(_) => PREC_UNARY,
        ExprKind::Pow(_, _) => PREC_POWER,
        ExprKind::Number(v) if *v < 0.0 || v.is_sign_negative() => PREC_UNARY,
        _ => PREC_ATOM,
    }
}

fn write_child(f: &mut fmt::Formatter<'_>, e: &Expr, parens: bool) -> fmt::Result {
    if parens {
        write!(f, "(")?;
        write_expr(f, e)?;
        write!(f, ")")
    } else {
        write_expr(f, e)
    }
}

fn write_expr(f: &mut fmt::Formatter<'_>, e: &Expr) -> fmt::Result {
    match &e.kind {
        ExprKind::Number(v) if v.is_sign_negative() => write!(f, "({v})"),
        ExprKind::Number(v) => write!(f, "{v}"),
        ExprKind::Pi => write!(f, "pi"),
        ExprKind::Var(i) => write!(f, "x{i}"),
        ExprKind::Binary(op, a, b) => {
            let p = op.precedence();
            write_child(f, a, precedence(a) < p)?;
            write!(f, " {} ", op.symbol())?;
            write_child(f, b, precedence(b) <= p)
        }
        ExprKind::Neg(a) => {
            write!(f, "-")?;
            write_child(f, a, precedence(a) < PREC_POWER)
        }
        ExprKind::Pow(a, p) => {
            write_child(f, a, precedence(a) < PREC_ATOM)?;
            write!(f, "^{p}")
        }
        ExprKind::Call(func, a) => {
            write!(f, "{}(", func.name())?;
            write_expr(f, a)?;
            write!(f, ")")
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eval_jet_product() {
        let e = parse("x1*x2", 2).unwrap();
        let j = e.eval_jet(&[2.0, 3.0], 1).unwrap();
        assert_eq!(j.value(), 6.0);
        assert_eq!(j.partial(&[1, 0]).unwrap(), 3.0);
        assert_eq!(j.partial(&[0, 1]).unwrap(), 2.0);
    }

    #[test]
    fn eval_jet_sin_squared() {
        let t = std::f64::consts::PI / 3.0;
        let e = parse("sin(x1)^2", 1).unwrap();
        let j = e.eval_jet(&[t], 2).unwrap();
        assert!((j.value() - 0.75).abs() < 1e-15);
        assert!((j.partial(&[1]).unwrap() - 3f64.sqrt() / 2.0).abs() < 1e-15);
    }

    #[test]
    fn reciprocal_at_zero_is_domain_error() {
        let e = parse("1/x1", 1).unwrap();
        assert_eq!(e.eval_jet(&[0.0], 2).unwrap_err(), EvalError::DivisionByZero);
        assert_eq!(e.eval(&[0.0]).unwrap_err(), EvalError::DivisionByZero);
    }

    #[test]
    fn precedence_in_evaluation() {
        let e = parse("2+3*x1", 1).unwrap();
        assert_eq!(e.eval(&[4.0]).unwrap(), 14.0);
        let e = parse("-x1^2", 1).unwrap();
        assert_eq!(e.eval(&[3.0]).unwrap(), -9.0);
        let e = parse("8/2/2 - 1 - 1", 1).unwrap();
        assert_eq!(e.eval(&[0.0]).unwrap(), 0.0);
    }

    #[test]
    fn printing_keeps_structure() {
        for text in [
            "a",
            "x1 - (x2 - x3)",
            "(x1 + x2) * x3",
            "-(x1 + 1)^2",
            "(-x1)^3",
            "x1 * -x2",
            "x1 - -x2",
            "sin(x1)^-2 / (x2 * x3)",
            "2.5e-3 * cos(2 * x1 + 0.25)",
        ] {
            let Ok(e) = parse(text, 3) else { continue };
            let printed = e.to_string();
            assert_eq!(parse(&printed, 3).unwrap(), e, "{text} -> {printed}");
        }
    }

    #[test]
    fn variables_listed() {
        let e = parse("x3*sin(x1) + x3", 4).unwrap();
        assert_eq!(e.variables(), vec![1, 3]);
    }
}
