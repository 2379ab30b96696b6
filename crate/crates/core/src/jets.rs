//! Truncated multivariate Taylor arithmetic ("jets").
//!
//! A jet of order `K` in `n` variables stores the Taylor coefficients
//! `c_α = ∂^α f(p) / α!` for every multi-index with `|α| ≤ K`. Coefficients are
//! kept in graded lexicographic order: degree by degree, and within one degree
//! lexicographically descending, so `x1` powers come first. With that order a
//! jet of order `m < K` is exactly a prefix of the order-`K` layout, which lets
//! one [`JetLayout`] serve every order up to its maximum and makes truncation a
//! slice operation.
//!
//! The geometry pipeline works directly on coefficient slices through the
//! kernel functions in this module; [`Jet`] is the owned value type used at
//! API boundaries.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum JetError {
    #[error("axis {axis} out of range for a jet in {dim} variables")]
    AxisOutOfRange { axis: usize, dim: usize },
    #[error("jet shape mismatch: (dim {left_dim}, order {left_order}) vs (dim {right_dim}, order {right_order})")]
    ShapeMismatch {
        left_dim: usize,
        left_order: usize,
        right_dim: usize,
        right_order: usize,
    },
    #[error("division by a jet with zero constant term")]
    ZeroDivision,
    #[error("{func} is undefined at {value}")]
    Domain { func: &'static str, value: f64 },
    #[error("order exhausted: need order {requested} but the jet has order {available}")]
    OrderExhausted { requested: usize, available: usize },
    #[error("multi-index has {got} entries, expected {dim}")]
    MultiIndexLength { got: usize, dim: usize },
    #[error("jet dimension must be positive")]
    ZeroDimension,
}

/// Binary jet operations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// Elementary functions with jet (and real) implementations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ElementaryFn {
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
    Sinh,
    Cosh,
}

impl ElementaryFn {
    pub const ALL: [ElementaryFn; 8] = [
        ElementaryFn::Sin,
        ElementaryFn::Cos,
        ElementaryFn::Tan,
        ElementaryFn::Exp,
        ElementaryFn::Log,
        ElementaryFn::Sqrt,
        ElementaryFn::Sinh,
        ElementaryFn::Cosh,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ElementaryFn::Sin => "sin",
            ElementaryFn::Cos => "cos",
            ElementaryFn::Tan => "tan",
            ElementaryFn::Exp => "exp",
            ElementaryFn::Log => "log",
            ElementaryFn::Sqrt => "sqrt",
            ElementaryFn::Sinh => "sinh",
            ElementaryFn::Cosh => "cosh",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|f| f.name() == name)
    }

    /// Checks that `x` lies in the domain on which the jet expansion exists.
    pub fn check_domain(self, x: f64) -> Result<(), JetError> {
        let ok = match self {
            ElementaryFn::Log | ElementaryFn::Sqrt => x > 0.0,
            ElementaryFn::Tan => x.cos() != 0.0,
            _ => true,
        };
        if ok && x.is_finite() {
            Ok(())
        } else {
            Err(JetError::Domain {
                func: self.name(),
                value: x,
            })
        }
    }

    pub fn eval(self, x: f64) -> f64 {
        match self {
            ElementaryFn::Sin => x.sin(),
            ElementaryFn::Cos => x.cos(),
            ElementaryFn::Tan => x.tan(),
            ElementaryFn::Exp => x.exp(),
            ElementaryFn::Log => x.ln(),
            ElementaryFn::Sqrt => x.sqrt(),
            ElementaryFn::Sinh => x.sinh(),
            ElementaryFn::Cosh => x.cosh(),
        }
    }
}

/// Multi-index bookkeeping and product tables for jets in `dim` variables up
/// to order `order`.
#[derive(Debug)]
pub struct JetLayout {
    dim: usize,
    order: usize,
    exponents: Vec<u8>,
    degrees: Vec<u32>,
    counts: Vec<usize>,
    factorials: Vec<f64>,
    lookup: HashMap<Vec<u8>, usize>,
    // rows[i] holds (j, k) with α_i + α_j = α_k, sorted by k.
    rows: Vec<Vec<(u32, u32)>>,
    // row_len[i * (order + 1) + m] = number of row entries with k < counts[m].
    row_len: Vec<u32>,
    // cols[k] holds (i, j) with α_i + α_j = α_k, sorted by i.
    cols: Vec<Vec<(u32, u32)>>,
    // deriv[axis][dst] = (src, factor) for dst < counts[order - 1].
    deriv: Vec<Vec<(u32, f64)>>,
}

fn binomial(n: usize, k: usize) -> usize {
    let k = k.min(n - k);
    let mut acc: usize = 1;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

fn push_compositions(dim: usize, degree: usize, prefix: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
    if prefix.len() + 1 == dim {
        prefix.push(degree as u8);
        out.push(prefix.clone());
        prefix.pop();
        return;
    }
    for first in (0..=degree).rev() {
        prefix.push(first as u8);
        push_compositions(dim, degree - first, prefix, out);
        prefix.pop();
    }
}

impl JetLayout {
    /// Builds a layout. Prefer [`JetLayout::shared`], which caches layouts.
    pub fn new(dim: usize, order: usize) -> Result<Self, JetError> {
        if dim == 0 {
            return Err(JetError::ZeroDimension);
        }
        let mut multi = Vec::new();
        let mut counts = Vec::with_capacity(order + 1);
        for d in 0..=order {
            push_compositions(dim, d, &mut Vec::with_capacity(dim), &mut multi);
            counts.push(multi.len());
        }
        debug_assert_eq!(multi.len(), binomial(dim + order, order));
        let ncoef = multi.len();
        let lookup: HashMap<Vec<u8>, usize> =
            multi.iter().enumerate().map(|(i, a)| (a.clone(), i)).collect();
        let degrees: Vec<u32> = multi
            .iter()
            .map(|a| a.iter().map(|&e| e as u32).sum())
            .collect();
        let factorials: Vec<f64> = multi
            .iter()
            .map(|a| {
                a.iter()
                    .map(|&e| (1..=e as u64).product::<u64>() as f64)
                    .product()
            })
            .collect();

        let mut rows = vec![Vec::new(); ncoef];
        let mut cols = vec![Vec::new(); ncoef];
        let mut sum = vec![0u8; dim];
        for i in 0..ncoef {
            for j in 0..ncoef {
                if degrees[i] + degrees[j] > order as u32 {
                    continue;
                }
                for (s, (a, b)) in sum.iter_mut().zip(multi[i].iter().zip(&multi[j])) {
                    *s = a + b;
                }
                let k = lookup[&sum];
                rows[i].push((j as u32, k as u32));
                cols[k].push((i as u32, j as u32));
            }
        }
        let mut row_len = vec![0u32; ncoef * (order + 1)];
        for (i, row) in rows.iter_mut().enumerate() {
            row.sort_by_key(|&(_, k)| k);
            for m in 0..=order {
                row_len[i * (order + 1) + m] =
                    row.iter().filter(|&&(_, k)| (k as usize) < counts[m]).count() as u32;
            }
        }
        for col in cols.iter_mut() {
            col.sort_by_key(|&(i, _)| i);
        }

        let mut deriv = Vec::with_capacity(dim);
        let lower = if order == 0 { 0 } else { counts[order - 1] };
        for axis in 0..dim {
            let mut table = Vec::with_capacity(lower);
            for beta in &multi[..lower] {
                let mut alpha = beta.clone();
                alpha[axis] += 1;
                table.push((lookup[&alpha] as u32, (beta[axis] as f64) + 1.0));
            }
            deriv.push(table);
        }

        Ok(Self {
            dim,
            order,
            exponents: multi.concat(),
            degrees,
            counts,
            factorials,
            lookup,
            rows,
            row_len,
            cols,
            deriv,
        })
    }

    /// Returns a process-wide cached layout for `(dim, order)`.
    pub fn shared(dim: usize, order: usize) -> Result<Arc<JetLayout>, JetError> {
        static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<JetLayout>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
        if let Some(layout) = guard.get(&(dim, order)) {
            return Ok(layout.clone());
        }
        let layout = Arc::new(JetLayout::new(dim, order)?);
        guard.insert((dim, order), layout.clone());
        Ok(layout)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Number of coefficients of a jet of order `m`.
    pub fn len(&self, m: usize) -> usize {
        self.counts[m]
    }

    pub fn exponents(&self, index: usize) -> &[u8] {
        &self.exponents[index * self.dim..(index + 1) * self.dim]
    }

    pub fn degree(&self, index: usize) -> usize {
        self.degrees[index] as usize
    }

    /// `α!` for the multi-index at `index`.
    pub fn factorial(&self, index: usize) -> f64 {
        self.factorials[index]
    }

    pub fn index_of(&self, alpha: &[u8]) -> Option<usize> {
        self.lookup.get(alpha).copied()
    }

    /// Pairs `(i, j)` with `α_i + α_j = α_k`, sorted by `i`.
    pub(crate) fn cols(&self, k: usize) -> &[(u32, u32)] {
        &self.cols[k]
    }

    /// Index of the first-order monomial on `axis` (0-based).
    pub fn unit_index(&self, axis: usize) -> usize {
        1 + axis
    }
}

// ---------------------------------------------------------------------------
// Slice kernels. Every kernel takes the order `m` of its operands; slices must
// hold at least `layout.len(m)` coefficients.

/// `out += alpha * a * b`, truncated at order `m`.
#[inline]
pub fn mul_add(l: &JetLayout, m: usize, a: &[f64], b: &[f64], out: &mut [f64], alpha: f64) {
    let n = l.counts[m];
    let stride = l.order + 1;
    let b = &b[..n];
    let out = &mut out[..n];
    for i in 0..n {
        let ai = a[i];
        if ai == 0.0 {
            continue;
        }
        let ai = ai * alpha;
        let len = l.row_len[i * stride + m] as usize;
        for &(j, k) in &l.rows[i][..len] {
            out[k as usize] += ai * b[j as usize];
        }
    }
}

/// `out = a * b`.
#[inline]
pub fn mul(l: &JetLayout, m: usize, a: &[f64], b: &[f64], out: &mut [f64]) {
    out[..l.counts[m]].fill(0.0);
    mul_add(l, m, a, b, out, 1.0);
}

/// `out = a / b`.
pub fn div(l: &JetLayout, m: usize, a: &[f64], b: &[f64], out: &mut [f64]) -> Result<(), JetError> {
    let b0 = b[0];
    if b0 == 0.0 || !b0.is_finite() {
        return Err(JetError::ZeroDivision);
    }
    out[0] = a[0] / b0;
    for k in 1..l.counts[m] {
        let mut s = a[k];
        for &(i, j) in &l.cols[k] {
            if i == 0 {
                continue;
            }
            s -= b[i as usize] * out[j as usize];
        }
        out[k] = s / b0;
    }
    Ok(())
}

/// `out = f(a)` by recursive coefficient solves using the Euler operator
/// `D = Σ x_i ∂_i`, which scales the coefficient of `α` by `|α|`.
/// `tmp` must hold `layout.len(m)` values (used by sin/cos/tan pairs).
pub fn apply(
    l: &JetLayout,
    m: usize,
    f: ElementaryFn,
    a: &[f64],
    out: &mut [f64],
    tmp: &mut [f64],
) -> Result<(), JetError> {
    let a0 = a[0];
    f.check_domain(a0)?;
    let n = l.counts[m];
    let deg = |i: u32| l.degrees[i as usize] as f64;
    match f {
        ElementaryFn::Exp => {
            out[0] = a0.exp();
            for k in 1..n {
                let mut s = 0.0;
                for &(i, j) in &l.cols[k] {
                    if i == 0 {
                        continue;
                    }
                    s += deg(i) * a[i as usize] * out[j as usize];
                }
                out[k] = s / l.degrees[k] as f64;
            }
        }
        ElementaryFn::Log => {
            out[0] = a0.ln();
            for k in 1..n {
                let dk = l.degrees[k] as f64;
                let mut s = dk * a[k];
                for &(i, j) in &l.cols[k] {
                    if i == 0 || j == 0 {
                        continue;
                    }
                    s -= a[i as usize] * deg(j) * out[j as usize];
                }
                out[k] = s / (dk * a0);
            }
        }
        ElementaryFn::Sqrt => {
            let c0 = a0.sqrt();
            out[0] = c0;
            for k in 1..n {
                let mut s = a[k];
                for &(i, j) in &l.cols[k] {
                    if i == 0 || j == 0 {
                        continue;
                    }
                    s -= out[i as usize] * out[j as usize];
                }
                out[k] = s / (2.0 * c0);
            }
        }
        ElementaryFn::Sin | ElementaryFn::Cos | ElementaryFn::Tan => {
            let (sin, cos) = if f == ElementaryFn::Cos {
                (&mut tmp[..n], &mut out[..n])
            } else {
                (&mut out[..n], &mut tmp[..n])
            };
            sin_cos(l, m, a, sin, cos, -1.0, a0.sin(), a0.cos());
            if f == ElementaryFn::Tan {
                // tan = sin / cos; out currently holds sin.
                let num: Vec<f64> = out[..n].to_vec();
                div(l, m, &num, &tmp[..n], out)?;
            }
        }
        ElementaryFn::Sinh | ElementaryFn::Cosh => {
            let (sinh, cosh) = if f == ElementaryFn::Cosh {
                (&mut tmp[..n], &mut out[..n])
            } else {
                (&mut out[..n], &mut tmp[..n])
            };
            sin_cos(l, m, a, sinh, cosh, 1.0, a0.sinh(), a0.cosh());
        }
    }
    Ok(())
}

// Coupled solve for (s, c) with D s = c D a and D c = sign * s D a.
#[allow(clippy::too_many_arguments)]
fn sin_cos(l: &JetLayout, m: usize, a: &[f64], s: &mut [f64], c: &mut [f64], sign: f64, s0: f64, c0: f64) {
    s[0] = s0;
    c[0] = c0;
    for k in 1..l.counts[m] {
        let mut ss = 0.0;
        let mut cc = 0.0;
        for &(i, j) in &l.cols[k] {
            if i == 0 {
                continue;
            }
            let da = l.degrees[i as usize] as f64 * a[i as usize];
            ss += da * c[j as usize];
            cc += da * s[j as usize];
        }
        let dk = l.degrees[k] as f64;
        s[k] = ss / dk;
        c[k] = sign * cc / dk;
    }
}

/// `out = ∂a/∂x_axis`; `a` has order `m ≥ 1`, `out` gets order `m - 1`.
#[inline]
pub fn derivative(l: &JetLayout, m: usize, axis: usize, a: &[f64], out: &mut [f64]) {
    debug_assert!(m >= 1);
    let n = l.counts[m - 1];
    for (dst, &(src, factor)) in l.deriv[axis][..n].iter().enumerate() {
        out[dst] = factor * a[src as usize];
    }
}

// ---------------------------------------------------------------------------

/// An owned jet value.
#[derive(Clone)]
pub struct Jet {
    layout: Arc<JetLayout>,
    order: usize,
    coeffs: Vec<f64>,
}

impl std::fmt::Debug for Jet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Jet")
            .field("dim", &self.layout.dim)
            .field("order", &self.order)
            .field("coeffs", &self.coeffs)
            .finish()
    }
}

impl PartialEq for Jet {
    fn eq(&self, other: &Self) -> bool {
        self.dim() == other.dim() && self.order == other.order && self.coeffs == other.coeffs
    }
}

impl Jet {
    pub fn zero(dim: usize, order: usize) -> Result<Self, JetError> {
        let layout = JetLayout::shared(dim, order)?;
        let coeffs = vec![0.0; layout.len(order)];
        Ok(Self {
            layout,
            order,
            coeffs,
        })
    }

    pub fn constant(value: f64, dim: usize, order: usize) -> Result<Self, JetError> {
        let mut jet = Self::zero(dim, order)?;
        jet.coeffs[0] = value;
        Ok(jet)
    }

    /// The jet of the coordinate function `x_axis` (1-based) at `value`.
    pub fn variable(axis: usize, value: f64, dim: usize, order: usize) -> Result<Self, JetError> {
        if axis == 0 || axis > dim {
            return Err(JetError::AxisOutOfRange { axis, dim });
        }
        let mut jet = Self::constant(value, dim, order)?;
        if order >= 1 {
            let k = jet.layout.unit_index(axis - 1);
            jet.coeffs[k] = 1.0;
        }
        Ok(jet)
    }

    /// Builds a jet from coefficients in graded lexicographic order.
    pub fn from_coeffs(dim: usize, order: usize, coeffs: Vec<f64>) -> Result<Self, JetError> {
        let layout = JetLayout::shared(dim, order)?;
        assert_eq!(coeffs.len(), layout.len(order), "coefficient count");
        Ok(Self {
            layout,
            order,
            coeffs,
        })
    }

    pub(crate) fn from_parts(layout: Arc<JetLayout>, order: usize, coeffs: Vec<f64>) -> Self {
        debug_assert!(order <= layout.order());
        debug_assert_eq!(coeffs.len(), layout.len(order));
        Self {
            layout,
            order,
            coeffs,
        }
    }

    pub fn dim(&self) -> usize {
        self.layout.dim
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn layout(&self) -> &Arc<JetLayout> {
        &self.layout
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    /// Taylor coefficient `∂^α f / α!`.
    pub fn coeff(&self, alpha: &[usize]) -> Result<f64, JetError> {
        let index = self.locate(alpha)?;
        Ok(self.coeffs[index])
    }

    /// The partial derivative `∂^α f(p)`.
    pub fn partial(&self, alpha: &[usize]) -> Result<f64, JetError> {
        let index = self.locate(alpha)?;
        Ok(self.coeffs[index] * self.layout.factorial(index))
    }

    fn locate(&self, alpha: &[usize]) -> Result<usize, JetError> {
        if alpha.len() != self.dim() {
            return Err(JetError::MultiIndexLength {
                got: alpha.len(),
                dim: self.dim(),
            });
        }
        let total: usize = alpha.iter().sum();
        if total > self.order {
            return Err(JetError::OrderExhausted {
                requested: total,
                available: self.order,
            });
        }
        let key: Vec<u8> = alpha.iter().map(|&e| e as u8).collect();
        Ok(self.layout.index_of(&key).expect("multi-index within order"))
    }

    fn check_shape(&self, other: &Jet) -> Result<(), JetError> {
        if self.dim() != other.dim() || self.order != other.order {
            return Err(JetError::ShapeMismatch {
                left_dim: self.dim(),
                left_order: self.order,
                right_dim: other.dim(),
                right_order: other.order,
            });
        }
        Ok(())
    }

    pub fn arith(&self, other: &Jet, op: ArithOp) -> Result<Jet, JetError> {
        self.check_shape(other)?;
        let l = &*self.layout;
        let m = self.order;
        let coeffs = match op {
            ArithOp::Add => self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect(),
            ArithOp::Sub => self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect(),
            ArithOp::Mul => {
                let mut out = vec![0.0; l.len(m)];
                mul(l, m, &self.coeffs, &other.coeffs, &mut out);
                out
            }
            ArithOp::Div => {
                let mut out = vec![0.0; l.len(m)];
                div(l, m, &self.coeffs, &other.coeffs, &mut out)?;
                out
            }
        };
        Ok(Jet::from_parts(self.layout.clone(), m, coeffs))
    }

    pub fn add(&self, other: &Jet) -> Result<Jet, JetError> {
        self.arith(other, ArithOp::Add)
    }

    pub fn sub(&self, other: &Jet) -> Result<Jet, JetError> {
        self.arith(other, ArithOp::Sub)
    }

    pub fn mul(&self, other: &Jet) -> Result<Jet, JetError> {
        self.arith(other, ArithOp::Mul)
    }

    pub fn div(&self, other: &Jet) -> Result<Jet, JetError> {
        self.arith(other, ArithOp::Div)
    }

    pub fn neg(&self) -> Jet {
        Jet::from_parts(
            self.layout.clone(),
            self.order,
            self.coeffs.iter().map(|c| -c).collect(),
        )
    }

    pub fn scale(&self, factor: f64) -> Jet {
        Jet::from_parts(
            self.layout.clone(),
            self.order,
            self.coeffs.iter().map(|c| c * factor).collect(),
        )
    }

    pub fn apply(&self, f: ElementaryFn) -> Result<Jet, JetError> {
        let n = self.layout.len(self.order);
        let mut out = vec![0.0; n];
        let mut tmp = vec![0.0; n];
        apply(&self.layout, self.order, f, &self.coeffs, &mut out, &mut tmp)?;
        Ok(Jet::from_parts(self.layout.clone(), self.order, out))
    }

    /// Integer power; negative exponents go through a reciprocal.
    pub fn powi(&self, exponent: i32) -> Result<Jet, JetError> {
        let one = Jet::constant(1.0, self.dim(), self.order)?;
        let mut acc = one.clone();
        for _ in 0..exponent.unsigned_abs() {
            acc = acc.mul(self)?;
        }
        if exponent < 0 {
            one.div(&acc)
        } else {
            Ok(acc)
        }
    }

    /// `∂f/∂x_axis` (1-based axis) as a jet of order `order - 1`.
    pub fn derivative(&self, axis: usize) -> Result<Jet, JetError> {
        if axis == 0 || axis > self.dim() {
            return Err(JetError::AxisOutOfRange {
                axis,
                dim: self.dim(),
            });
        }
        if self.order == 0 {
            return Err(JetError::OrderExhausted {
                requested: 1,
                available: 0,
            });
        }
        let mut out = vec![0.0; self.layout.len(self.order - 1)];
        derivative(&self.layout, self.order, axis - 1, &self.coeffs, &mut out);
        Ok(Jet::from_parts(self.layout.clone(), self.order - 1, out))
    }

    /// Drops every coefficient above `order`.
    pub fn truncate(&self, order: usize) -> Jet {
        let order = order.min(self.order);
        let n = self.layout.len(order);
        Jet::from_parts(self.layout.clone(), order, self.coeffs[..n].to_vec())
    }
}

/// `jet_variable` with a 1-based axis.
pub fn jet_variable(axis: usize, value: f64, dim: usize, order: usize) -> Result<Jet, JetError> {
    Jet::variable(axis, value, dim, order)
}

/// `∂^α f(p)` from a jet.
pub fn extract_partial(jet: &Jet, alpha: &[usize]) -> Result<f64, JetError> {
    jet.partial(alpha)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
    }

    #[test]
    fn layout_counts_are_binomial() {
        for dim in 1..=5 {
            for order in 0..=5 {
                let l = JetLayout::new(dim, order).unwrap();
                for m in 0..=order {
                    assert_eq!(l.len(m), binomial(dim + m, m));
                }
            }
        }
    }

    #[test]
    fn graded_lex_order() {
        let l = JetLayout::new(2, 2).unwrap();
        let listed: Vec<Vec<u8>> = (0..l.len(2)).map(|i| l.exponents(i).to_vec()).collect();
        assert_eq!(
            listed,
            vec![vec![0, 0], vec![1, 0], vec![0, 1], vec![2, 0], vec![1, 1], vec![0, 2]]
        );
    }

    #[test]
    fn variable_jet() {
        let x = jet_variable(1, 0.5, 2, 2).unwrap();
        assert_eq!(x.coeffs(), &[0.5, 1.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(
            jet_variable(2, 0.0, 1, 3).unwrap_err(),
            JetError::AxisOutOfRange { axis: 2, dim: 1 }
        );
        let x = jet_variable(1, 3.0, 2, 3).unwrap();
        assert_eq!(extract_partial(&x, &[1, 0]).unwrap(), 1.0);
    }

    #[test]
    fn one_plus_x_times_one_minus_x() {
        let one = Jet::constant(1.0, 1, 2).unwrap();
        let x = Jet::variable(1, 0.0, 1, 2).unwrap();
        let p = one.add(&x).unwrap().mul(&one.sub(&x).unwrap()).unwrap();
        assert_eq!(p.coeffs(), &[1.0, 0.0, -1.0]);
    }

    #[test]
    fn sine_series_at_zero() {
        let x = Jet::variable(1, 0.0, 1, 3).unwrap();
        let s = x.apply(ElementaryFn::Sin).unwrap();
        assert!(close(s.coeffs()[1], 1.0, 1e-16));
        assert!(close(s.coeffs()[2], 0.0, 1e-16));
        assert!(close(s.coeffs()[3], -1.0 / 6.0, 1e-16));
    }

    #[test]
    fn second_derivative_of_sin_squared() {
        let t = std::f64::consts::PI / 3.0;
        let x = Jet::variable(1, t, 1, 2).unwrap();
        let s = x.apply(ElementaryFn::Sin).unwrap();
        let sq = s.mul(&s).unwrap();
        assert!(close(sq.partial(&[2]).unwrap(), -1.0, 1e-14));
    }

    #[test]
    fn partial_errors_and_constants() {
        let c = Jet::constant(2.5, 3, 2).unwrap();
        assert_eq!(c.partial(&[1, 1, 0]).unwrap(), 0.0);
        let x = Jet::variable(1, 0.7, 1, 2).unwrap();
        assert_eq!(x.mul(&x).unwrap().partial(&[2]).unwrap(), 2.0);
        assert_eq!(
            x.partial(&[3]).unwrap_err(),
            JetError::OrderExhausted {
                requested: 3,
                available: 2
            }
        );
    }

    #[test]
    fn domain_errors() {
        let z = Jet::variable(1, 0.0, 1, 2).unwrap();
        assert!(matches!(z.apply(ElementaryFn::Log), Err(JetError::Domain { .. })));
        assert!(matches!(z.apply(ElementaryFn::Sqrt), Err(JetError::Domain { .. })));
        let one = Jet::constant(1.0, 1, 2).unwrap();
        assert_eq!(one.div(&z).unwrap_err(), JetError::ZeroDivision);
        let a = Jet::constant(1.0, 2, 2).unwrap();
        assert!(matches!(a.add(&one), Err(JetError::ShapeMismatch { .. })));
    }

    #[test]
    fn exp_log_roundtrip() {
        let x = Jet::variable(1, 0.3, 2, 4).unwrap();
        let y = Jet::variable(2, -0.2, 2, 4).unwrap();
        let f = x.mul(&y).unwrap().add(&x).unwrap();
        let back = f.apply(ElementaryFn::Exp).unwrap().apply(ElementaryFn::Log).unwrap();
        for (a, b) in back.coeffs().iter().zip(f.coeffs()) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn derivative_drops_one_order() {
        let x = Jet::variable(1, 1.2, 2, 3).unwrap();
        let y = Jet::variable(2, 0.4, 2, 3).unwrap();
        let f = x.mul(&x).unwrap().mul(&y).unwrap(); // x²y
        let fx = f.derivative(1).unwrap(); // 2xy
        assert_eq!(fx.order(), 2);
        assert!(close(fx.value(), 2.0 * 1.2 * 0.4, 1e-15));
        assert!(close(fx.partial(&[1, 1]).unwrap(), 2.0, 1e-15));
    }
}
