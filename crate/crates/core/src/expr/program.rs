//! Straight-line evaluation of a batch of expressions over jets.
//!
//! Compiling hash-conses identical subtrees across every expression in the
//! batch and folds constant subtrees, so metric components that share factors
//! (`sin(x1)^2` appears in most sphere components) evaluate them once per
//! point.

use std::collections::HashMap;

use super::{BinOp, EvalError, Expr, ExprKind, Expression};
use crate::jets::{self, ElementaryFn, JetError, JetLayout};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Op {
    Const(u64),
    Var(usize),
    Add(u32, u32),
    Sub(u32, u32),
    Mul(u32, u32),
    Div(u32, u32),
    Scale(u32, u64),
    Neg(u32),
    Pow(u32, i32),
    Call(ElementaryFn, u32),
}

#[derive(Debug, Clone)]
pub struct Program {
    dim: usize,
    ops: Vec<Op>,
    outputs: Vec<u32>,
    uses_var: Vec<bool>,
}

/// Per-thread register file for [`Program::eval`].
#[derive(Debug, Clone)]
pub struct ProgramScratch {
    order: usize,
    stride: usize,
    regs: Vec<f64>,
    t1: Vec<f64>,
    t2: Vec<f64>,
}

struct Builder {
    ops: Vec<Op>,
    consts: Vec<Option<f64>>,
    interned: HashMap<Op, u32>,
}

impl Builder {
    fn push(&mut self, op: Op) -> u32 {
        if let Some(&id) = self.interned.get(&op) {
            return id;
        }
        let value = self.fold(op);
        let op = match value {
            Some(v) => Op::Const(v.to_bits()),
            None => op,
        };
        if let Some(&id) = self.interned.get(&op) {
            return id;
        }
        let id = self.ops.len() as u32;
        self.ops.push(op);
        self.consts.push(value);
        self.interned.insert(op, id);
        id
    }

    fn constant(&mut self, v: f64) -> u32 {
        self.push(Op::Const(v.to_bits()))
    }

    fn value(&self, id: u32) -> Option<f64> {
        self.consts[id as usize]
    }

    // Real value of an op whose operands are all constant; None when not
    // foldable (or when folding would hide an evaluation error).
    fn fold(&self, op: Op) -> Option<f64> {
        let v = |id: u32| self.consts[id as usize];
        let out = match op {
            Op::Const(bits) => f64::from_bits(bits),
            Op::Var(_) => return None,
            Op::Add(a, b) => v(a)? + v(b)?,
            Op::Sub(a, b) => v(a)? - v(b)?,
            Op::Mul(a, b) => v(a)? * v(b)?,
            Op::Div(a, b) => {
                let d = v(b)?;
                if d == 0.0 {
                    return None;
                }
                v(a)? / d
            }
            Op::Scale(a, c) => v(a)? * f64::from_bits(c),
            Op::Neg(a) => -v(a)?,
            Op::Pow(a, p) => {
                let x = v(a)?;
                if p < 0 && x == 0.0 {
                    return None;
                }
                x.powi(p)
            }
            Op::Call(f, a) => {
                let x = v(a)?;
                f.check_domain(x).ok()?;
                f.eval(x)
            }
        };
        out.is_finite().then_some(out)
    }

    fn lower(&mut self, e: &Expr) -> u32 {
        match &e.kind {
            ExprKind::Number(v) => self.constant(*v),
            ExprKind::Pi => self.constant(std::f64::consts::PI),
            ExprKind::Var(i) => self.push(Op::Var(i - 1)),
            ExprKind::Binary(op, a, b) => {
                let a = self.lower(a);
                let b = self.lower(b);
                match op {
                    BinOp::Add => self.push(Op::Add(a, b)),
                    BinOp::Sub => self.push(Op::Sub(a, b)),
                    BinOp::Mul => match (self.value(a), self.value(b)) {
                        (Some(c), None) => self.push(Op::Scale(b, c.to_bits())),
                        (None, Some(c)) => self.push(Op::Scale(a, c.to_bits())),
                        _ => self.push(Op::Mul(a, b)),
                    },
                    BinOp::Div => self.push(Op::Div(a, b)),
                }
            }
            ExprKind::Neg(a) => {
                let a = self.lower(a);
                self.push(Op::Neg(a))
            }
            ExprKind::Pow(a, p) => {
                let a = self.lower(a);
                match p {
                    0 => self.constant(1.0),
                    1 => a,
                    _ => self.push(Op::Pow(a, *p)),
                }
            }
            ExprKind::Call(f, a) => {
                let a = self.lower(a);
                self.push(Op::Call(*f, a))
            }
        }
    }
}

// Drops ops unreachable from the outputs (operands of folded constants).
fn prune(ops: Vec<Op>, outputs: Vec<u32>) -> (Vec<Op>, Vec<u32>) {
    let mut live = vec![false; ops.len()];
    for &o in &outputs {
        live[o as usize] = true;
    }
    for idx in (0..ops.len()).rev() {
        if !live[idx] {
            continue;
        }
        match ops[idx] {
            Op::Add(a, b) | Op::Sub(a, b) | Op::Mul(a, b) | Op::Div(a, b) => {
                live[a as usize] = true;
                live[b as usize] = true;
            }
            Op::Scale(a, _) | Op::Neg(a) | Op::Pow(a, _) | Op::Call(_, a) => live[a as usize] = true,
            Op::Const(_) | Op::Var(_) => {}
        }
    }
    let mut remap = vec![u32::MAX; ops.len()];
    let mut kept = Vec::new();
    for (idx, op) in ops.into_iter().enumerate() {
        if !live[idx] {
            continue;
        }
        let r = |id: u32| remap[id as usize];
        let op = match op {
            Op::Add(a, b) => Op::Add(r(a), r(b)),
            Op::Sub(a, b) => Op::Sub(r(a), r(b)),
            Op::Mul(a, b) => Op::Mul(r(a), r(b)),
            Op::Div(a, b) => Op::Div(r(a), r(b)),
            Op::Scale(a, c) => Op::Scale(r(a), c),
            Op::Neg(a) => Op::Neg(r(a)),
            Op::Pow(a, p) => Op::Pow(r(a), p),
            Op::Call(f, a) => Op::Call(f, r(a)),
            other => other,
        };
        remap[idx] = kept.len() as u32;
        kept.push(op);
    }
    let outputs = outputs.into_iter().map(|o| remap[o as usize]).collect();
    (kept, outputs)
}

fn lift(e: JetError) -> EvalError {
    match e {
        JetError::ZeroDivision => EvalError::DivisionByZero,
        JetError::Domain { func, value } => EvalError::Domain { func, value },
        other => EvalError::Jet(other),
    }
}

impl Program {
    /// Compiles expressions that all live over the same `dim` variables.
    pub fn compile(dim: usize, exprs: &[&Expression]) -> Program {
        let mut b = Builder {
            ops: Vec::new(),
            consts: Vec::new(),
            interned: HashMap::new(),
        };
        let outputs: Vec<u32> = exprs
            .iter()
            .map(|e| {
                assert_eq!(e.dim(), dim, "expression dimension");
                b.lower(e.root())
            })
            .collect();
        let (ops, outputs) = prune(b.ops, outputs);
        let mut uses_var = vec![false; dim];
        for op in &ops {
            if let Op::Var(i) = op {
                uses_var[*i] = true;
            }
        }
        Program {
            dim,
            ops,
            outputs,
            uses_var,
        }
    }

    /// Number of instructions.
    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn outputs(&self) -> usize {
        self.outputs.len()
    }

    /// Whether any output depends on the 0-based variable `axis`.
    pub fn depends_on(&self, axis: usize) -> bool {
        self.uses_var[axis]
    }

    pub fn dependencies(&self) -> &[bool] {
        &self.uses_var
    }

    pub fn scratch(&self, layout: &JetLayout, order: usize) -> ProgramScratch {
        let stride = layout.len(order);
        ProgramScratch {
            order,
            stride,
            regs: vec![0.0; stride * self.ops.len().max(1)],
            t1: vec![0.0; stride],
            t2: vec![0.0; stride],
        }
    }

    /// Evaluates every op at `point`; read results with [`Program::output`].
    /// The register file grows when `s` came from a smaller program.
    pub fn eval(
        &self,
        l: &JetLayout,
        point: &[f64],
        s: &mut ProgramScratch,
    ) -> Result<(), EvalError> {
        if point.len() != self.dim {
            return Err(EvalError::PointLength {
                got: point.len(),
                dim: self.dim,
            });
        }
        let m = s.order;
        let nc = s.stride;
        // One scratch may serve several programs of the same order.
        if s.regs.len() < nc * self.ops.len() {
            s.regs.resize(nc * self.ops.len(), 0.0);
        }
        for (idx, op) in self.ops.iter().enumerate() {
            let (done, rest) = s.regs.split_at_mut(idx * nc);
            let out = &mut rest[..nc];
            let reg = |id: u32| &done[id as usize * nc..(id as usize + 1) * nc];
            match *op {
                Op::Const(bits) => {
                    out.fill(0.0);
                    out[0] = f64::from_bits(bits);
                }
                Op::Var(i) => {
                    out.fill(0.0);
                    out[0] = point[i];
                    if m >= 1 {
                        out[l.unit_index(i)] = 1.0;
                    }
                }
                Op::Add(a, b) => {
                    for ((o, x), y) in out.iter_mut().zip(reg(a)).zip(reg(b)) {
                        *o = x + y;
                    }
                }
                Op::Sub(a, b) => {
                    for ((o, x), y) in out.iter_mut().zip(reg(a)).zip(reg(b)) {
                        *o = x - y;
                    }
                }
                Op::Mul(a, b) => jets::mul(l, m, reg(a), reg(b), out),
                Op::Div(a, b) => jets::div(l, m, reg(a), reg(b), out).map_err(lift)?,
                Op::Scale(a, c) => {
                    let c = f64::from_bits(c);
                    for (o, x) in out.iter_mut().zip(reg(a)) {
                        *o = x * c;
                    }
                }
                Op::Neg(a) => {
                    for (o, x) in out.iter_mut().zip(reg(a)) {
                        *o = -x;
                    }
                }
                Op::Pow(a, p) => {
                    let base = reg(a);
                    let k = p.unsigned_abs();
                    let acc: &mut [f64] = if p < 0 { &mut s.t1[..] } else { &mut *out };
                    acc.copy_from_slice(base);
                    for _ in 1..k {
                        s.t2.copy_from_slice(acc);
                        jets::mul(l, m, &s.t2, base, acc);
                    }
                    if p < 0 {
                        s.t2.fill(0.0);
                        s.t2[0] = 1.0;
                        jets::div(l, m, &s.t2, &s.t1, out).map_err(lift)?;
                    }
                }
                Op::Call(f, a) => jets::apply(l, m, f, reg(a), out, &mut s.t1).map_err(lift)?,
            }
        }
        Ok(())
    }

    /// Coefficients of output `i` from the last [`Program::eval`].
    pub fn output<'s>(&self, s: &'s ProgramScratch, i: usize) -> &'s [f64] {
        let id = self.outputs[i] as usize;
        &s.regs[id * s.stride..(id + 1) * s.stride]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    #[test]
    fn shared_subtrees_are_interned() {
        let a = parse("sin(x1)^2 * x2", 2).unwrap();
        let b = parse("sin(x1)^2 + 1", 2).unwrap();
        let p = Program::compile(2, &[&a, &b]);
        // x1, sin, pow, x2, mul, const 1, add
        assert_eq!(p.ops.len(), 7);
        assert!(p.depends_on(0) && p.depends_on(1));
    }

    #[test]
    fn matches_tree_evaluation() {
        let texts = [
            "sin(x1)^2 * cos(x2) / (2 + x1*x2)",
            "exp(-x1^2) + log(3 + sin(x2)) - sqrt(2 + x1)",
            "tan(0.3*x1) * sinh(x2) + cosh(x1)^-2",
            "2*pi*x1 - x2/4",
        ];
        let exprs: Vec<_> = texts.iter().map(|t| parse(t, 2).unwrap()).collect();
        let refs: Vec<&Expression> = exprs.iter().collect();
        let p = Program::compile(2, &refs);
        let l = JetLayout::shared(2, 4).unwrap();
        let mut s = p.scratch(&l, 4);
        let point = [0.4, -0.7];
        p.eval(&l, &point, &mut s).unwrap();
        for (i, e) in exprs.iter().enumerate() {
            let j = e.eval_jet(&point, 4).unwrap();
            for (a, b) in p.output(&s, i).iter().zip(j.coeffs()) {
                assert!((a - b).abs() <= 1e-14 * (1.0 + b.abs()), "{}", texts[i]);
            }
        }
    }

    #[test]
    fn constant_folding() {
        let e = parse("2*pi*sqrt(4)", 1).unwrap();
        let p = Program::compile(1, &[&e]);
        assert_eq!(p.ops.len(), 1);
        assert!(!p.depends_on(0));
    }
}
