//! Chart families of catalog manifolds and fields defined on them.
//!
//! A catalog manifold is a product of blocks: round spheres in polar
//! coordinates, circles, and plain coordinate boxes. Each sphere block sits
//! in its own Euclidean factor through the polar embedding
//!
//! ```text
//! Y0 = cos t0, Y1 = sin t0 cos t1, …, Yn = sin t0 ⋯ sin t(n−1)
//! ```
//!
//! and permuting the ambient axes gives another polar chart of the same
//! sphere. Coordinate components in a polar chart lose roughly
//! `θ^(−2k)` relative precision near its singular set, where `k` counts
//! derivatives, so pointwise invariants are evaluated in the permuted chart
//! that keeps every polar angle far from `0` and `π`. Quadrature nodes,
//! weights and volume densities always refer to the primary chart.
//!
//! Fields are stored as term lists (round-block metrics, flat constants,
//! ambient polynomials times products of ambient differentials, or fixed
//! chart formulas) and pulled back into whichever chart is requested.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex};

use crate::expr::{BinOp, Expr, ExprKind, Expression, Span};
use crate::geometry::{tri_index, GeometryError, MetricField, ScalarField, SymmetricField};
use crate::jets::ElementaryFn;

/// Identifies one chart of a family: the ambient-axis permutation of every
/// sphere block, concatenated.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ChartKey(Vec<u8>);

impl ChartKey {
    pub fn permutation(&self) -> &[u8] {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Block {
    /// Unit `S^n` on chart axes `offset..offset+n` and ambient axes
    /// `ambient..ambient+n+1`.
    Sphere { offset: usize, n: usize, ambient: usize },
    /// A circle of the given period with ambient `(cos ωx, sin ωx)`.
    Circle { axis: usize, period: f64, ambient: usize },
    /// Axes without an embedding.
    Plain { offset: usize, n: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Family {
    pub dim: usize,
    pub ambient_dim: usize,
    pub blocks: Vec<Block>,
}

impl Family {
    pub fn sphere(n: usize) -> Self {
        Family {
            dim: n,
            ambient_dim: n + 1,
            blocks: vec![Block::Sphere { offset: 0, n, ambient: 0 }],
        }
    }

    pub fn circle(period: f64) -> Self {
        Family {
            dim: 1,
            ambient_dim: 2,
            blocks: vec![Block::Circle {
                axis: 0,
                period,
                ambient: 0,
            }],
        }
    }

    pub fn plain(n: usize) -> Self {
        Family {
            dim: n,
            ambient_dim: 0,
            blocks: vec![Block::Plain { offset: 0, n }],
        }
    }

    pub fn product(a: &Family, b: &Family) -> Self {
        let mut blocks = a.blocks.clone();
        blocks.extend(b.blocks.iter().map(|blk| match *blk {
            Block::Sphere { offset, n, ambient } => Block::Sphere {
                offset: offset + a.dim,
                n,
                ambient: ambient + a.ambient_dim,
            },
            Block::Circle { axis, period, ambient } => Block::Circle {
                axis: axis + a.dim,
                period,
                ambient: ambient + a.ambient_dim,
            },
            Block::Plain { offset, n } => Block::Plain {
                offset: offset + a.dim,
                n,
            },
        }));
        Family {
            dim: a.dim + b.dim,
            ambient_dim: a.ambient_dim + b.ambient_dim,
            blocks,
        }
    }

    pub fn has_spheres(&self) -> bool {
        self.blocks.iter().any(|b| matches!(b, Block::Sphere { .. }))
    }

    /// Every axis belongs to a sphere or circle block.
    pub fn fully_embedded(&self) -> bool {
        !self.blocks.iter().any(|b| matches!(b, Block::Plain { .. }))
    }

    pub fn identity_key(&self) -> ChartKey {
        let mut key = Vec::new();
        for b in &self.blocks {
            if let Block::Sphere { n, .. } = *b {
                key.extend(0..=n as u8);
            }
        }
        ChartKey(key)
    }

    /// Ambient coordinates of a primary-chart point.
    pub fn ambient_point(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.ambient_dim];
        for b in &self.blocks {
            match *b {
                Block::Sphere { offset, n, ambient } => {
                    let mut s = 1.0;
                    for k in 0..n {
                        y[ambient + k] = s * x[offset + k].cos();
                        s *= x[offset + k].sin();
                    }
                    y[ambient + n] = s;
                }
                Block::Circle { axis, period, ambient } => {
                    let w = 2.0 * PI / period;
                    y[ambient] = (w * x[axis]).cos();
                    y[ambient + 1] = (w * x[axis]).sin();
                }
                Block::Plain { .. } => {}
            }
        }
        y
    }

    /// The best-conditioned chart at a primary-chart point and the point's
    /// coordinates there. Ambient axes of each sphere are ordered by
    /// increasing `|Y|`, so the two largest carry the periodic angle and
    /// every polar angle `t` has `sin t ≥ √(2/3)`.
    pub fn locate(&self, x: &[f64]) -> (ChartKey, Vec<f64>) {
        let y = self.ambient_point(x);
        let mut key = Vec::new();
        let mut out = x.to_vec();
        for b in &self.blocks {
            if let Block::Sphere { offset, n, ambient } = *b {
                let mut perm: Vec<usize> = (0..=n).collect();
                perm.sort_by(|&a, &b| y[ambient + a].abs().total_cmp(&y[ambient + b].abs()).then(a.cmp(&b)));
                let z: Vec<f64> = perm.iter().map(|&a| y[ambient + a]).collect();
                for k in 0..n - 1 {
                    let rest = z[k + 1..].iter().map(|v| v * v).sum::<f64>().sqrt();
                    out[offset + k] = rest.atan2(z[k]);
                }
                let mut phi = z[n].atan2(z[n - 1]);
                if phi < 0.0 {
                    phi += 2.0 * PI;
                }
                out[offset + n - 1] = phi;
                key.extend(perm.iter().map(|&a| a as u8));
            }
        }
        (ChartKey(key), out)
    }

    // Ambient coordinates as trig monomials of the chart `key`.
    fn embedding(&self, key: &ChartKey) -> Vec<TrigMonomial> {
        let mut y = vec![TrigMonomial::zero(); self.ambient_dim];
        let mut cursor = 0;
        for b in &self.blocks {
            match *b {
                Block::Sphere { offset, n, ambient } => {
                    let perm = &key.0[cursor..cursor + n + 1];
                    cursor += n + 1;
                    for k in 0..=n {
                        let mut factors: Vec<Factor> = (0..k)
                            .map(|j| Factor {
                                axis: offset + j,
                                freq: 1.0,
                                sin: true,
                            })
                            .collect();
                        if k < n {
                            factors.push(Factor {
                                axis: offset + k,
                                freq: 1.0,
                                sin: false,
                            });
                        }
                        y[ambient + perm[k] as usize] = TrigMonomial { coef: 1.0, factors };
                    }
                }
                Block::Circle { axis, period, ambient } => {
                    let freq = 2.0 * PI / period;
                    for (k, sin) in [(0, false), (1, true)] {
                        y[ambient + k] = TrigMonomial {
                            coef: 1.0,
                            factors: vec![Factor { axis, freq, sin }],
                        };
                    }
                }
                Block::Plain { .. } => {}
            }
        }
        y
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Factor {
    axis: usize,
    freq: f64,
    sin: bool,
}

// coef · Π sin/cos(freq · x_axis), at most one factor per axis.
#[derive(Debug, Clone, PartialEq)]
struct TrigMonomial {
    coef: f64,
    factors: Vec<Factor>,
}

impl TrigMonomial {
    fn zero() -> Self {
        TrigMonomial {
            coef: 0.0,
            factors: Vec::new(),
        }
    }

    fn derivative(&self, axis: usize) -> TrigMonomial {
        let Some(pos) = self.factors.iter().position(|f| f.axis == axis) else {
            return TrigMonomial::zero();
        };
        let mut out = self.clone();
        let f = &mut out.factors[pos];
        out.coef *= if f.sin { f.freq } else { -f.freq };
        f.sin = !f.sin;
        out
    }

    fn to_expr(&self) -> Option<Expr> {
        if self.coef == 0.0 {
            return None;
        }
        let mut acc: Option<Expr> = None;
        for f in &self.factors {
            let arg = if f.freq == 1.0 {
                var(f.axis)
            } else {
                mul(num(f.freq), var(f.axis))
            };
            let func = if f.sin { ElementaryFn::Sin } else { ElementaryFn::Cos };
            let t = call(func, arg);
            acc = Some(match acc {
                None => t,
                Some(a) => mul(a, t),
            });
        }
        Some(match acc {
            None => num(self.coef),
            Some(a) if self.coef == 1.0 => a,
            Some(a) => mul(num(self.coef), a),
        })
    }
}

/// A polynomial in the ambient coordinates: `Σ c_α Y^α`.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly {
    pub terms: Vec<(f64, Vec<u8>)>,
}

impl Poly {
    pub fn constant(c: f64, vars: usize) -> Self {
        Poly {
            terms: vec![(c, vec![0; vars])],
        }
    }

    fn padded(&self, before: usize, after: usize) -> Poly {
        Poly {
            terms: self
                .terms
                .iter()
                .map(|(c, e)| {
                    let mut v = vec![0; before];
                    v.extend_from_slice(e);
                    v.extend(std::iter::repeat_n(0, after));
                    (*c, v)
                })
                .collect(),
        }
    }

    fn to_expr(&self, y: &[Option<Expr>]) -> Option<Expr> {
        let mut terms = Vec::new();
        'term: for (c, e) in &self.terms {
            if *c == 0.0 {
                continue;
            }
            let mut acc: Option<Expr> = None;
            for (a, &p) in e.iter().enumerate() {
                if p == 0 {
                    continue;
                }
                let Some(ya) = &y[a] else {
                    continue 'term;
                };
                let f = if p == 1 { ya.clone() } else { pow(ya.clone(), p as i32) };
                acc = Some(match acc {
                    None => f,
                    Some(x) => mul(x, f),
                });
            }
            terms.push(match acc {
                None => num(*c),
                Some(x) if *c == 1.0 => x,
                Some(x) => mul(num(*c), x),
            });
        }
        sum(terms)
    }
}

/// One additive piece of a symmetric 2-tensor field.
#[derive(Debug, Clone)]
pub enum SymTerm {
    /// `coef` times the unit round metric of sphere block `block`.
    Sphere { block: usize, coef: f64 },
    /// `coef (dx_i dx_j + dx_j dx_i) / 2`, or `coef dx_i²` when `i = j`.
    Flat { i: usize, j: usize, coef: f64 },
    /// `poly(Y) (dφ_a dφ_b + dφ_b dφ_a) / 2` with `φ_a = a · Y`.
    Ambient { poly: Poly, a: Vec<f64>, b: Vec<f64> },
    /// Chart formulas for the primary chart only.
    Fixed(SymmetricField),
}

impl SymTerm {
    pub fn scaled(&self, c: f64) -> Result<SymTerm, GeometryError> {
        Ok(match self {
            SymTerm::Sphere { block, coef } => SymTerm::Sphere {
                block: *block,
                coef: coef * c,
            },
            SymTerm::Flat { i, j, coef } => SymTerm::Flat {
                i: *i,
                j: *j,
                coef: coef * c,
            },
            SymTerm::Ambient { poly, a, b } => SymTerm::Ambient {
                poly: Poly {
                    terms: poly.terms.iter().map(|(k, e)| (k * c, e.clone())).collect(),
                },
                a: a.clone(),
                b: b.clone(),
            },
            SymTerm::Fixed(f) => SymTerm::Fixed(f.scaled(c)?),
        })
    }

    /// Re-homes a term of the left (`left = true`) or right factor of a
    /// product family.
    fn shifted(&self, a: &Family, b: &Family, left: bool) -> Result<SymTerm, GeometryError> {
        let (axis_off, block_off, before, after) = if left {
            (0, 0, 0, b.ambient_dim)
        } else {
            (a.dim, a.blocks.len(), a.ambient_dim, 0)
        };
        let pad = |v: &[f64]| {
            let mut out = vec![0.0; before];
            out.extend_from_slice(v);
            out.extend(std::iter::repeat_n(0.0, after));
            out
        };
        Ok(match self {
            SymTerm::Sphere { block, coef } => SymTerm::Sphere {
                block: block + block_off,
                coef: *coef,
            },
            SymTerm::Flat { i, j, coef } => SymTerm::Flat {
                i: i + axis_off,
                j: j + axis_off,
                coef: *coef,
            },
            SymTerm::Ambient { poly, a: va, b: vb } => SymTerm::Ambient {
                poly: poly.padded(before, after),
                a: pad(va),
                b: pad(vb),
            },
            SymTerm::Fixed(f) => {
                let zero = |n: usize| {
                    SymmetricField::new(n, vec![Expression::constant(0.0, n); n * (n + 1) / 2])
                };
                if left {
                    SymTerm::Fixed(SymmetricField::block_diagonal(f, &zero(b.dim)?)?)
                } else {
                    SymTerm::Fixed(SymmetricField::block_diagonal(&zero(a.dim)?, f)?)
                }
            }
        })
    }
}

/// One additive piece of a scalar field.
#[derive(Debug, Clone)]
pub enum ScalarTerm {
    Ambient(Poly),
    Fixed(Expression),
}

pub(crate) fn shift_sym_terms(
    terms: &[SymTerm],
    a: &Family,
    b: &Family,
    left: bool,
) -> Result<Vec<SymTerm>, GeometryError> {
    terms.iter().map(|t| t.shifted(a, b, left)).collect()
}

pub(crate) fn node(kind: ExprKind) -> Expr {
    Expr {
        kind,
        span: Span::default(),
    }
}

pub(crate) fn num(v: f64) -> Expr {
    node(ExprKind::Number(v))
}

// 0-based axis.
pub(crate) fn var(axis: usize) -> Expr {
    node(ExprKind::Var(axis + 1))
}

pub(crate) fn mul(a: Expr, b: Expr) -> Expr {
    node(ExprKind::Binary(BinOp::Mul, Box::new(a), Box::new(b)))
}

pub(crate) fn add(a: Expr, b: Expr) -> Expr {
    node(ExprKind::Binary(BinOp::Add, Box::new(a), Box::new(b)))
}

pub(crate) fn pow(a: Expr, p: i32) -> Expr {
    node(ExprKind::Pow(Box::new(a), p))
}

pub(crate) fn call(f: ElementaryFn, a: Expr) -> Expr {
    node(ExprKind::Call(f, Box::new(a)))
}

pub(crate) fn sum(terms: Vec<Expr>) -> Option<Expr> {
    terms.into_iter().reduce(add)
}

pub(crate) fn push(slot: &mut Option<Expr>, e: Expr) {
    *slot = Some(match slot.take() {
        None => e,
        Some(a) => add(a, e),
    });
}

// sin(x_o)⋯sin(x_{o+k−1}), left-associated so prefixes are shared.
pub(crate) fn sin_prefix(offset: usize, k: usize) -> Option<Expr> {
    (0..k)
        .map(|j| call(ElementaryFn::Sin, var(offset + j)))
        .reduce(mul)
}

/// Component formulas of a symmetric field in chart `key`.
pub(crate) fn build_sym(family: &Family, terms: &[SymTerm], key: &ChartKey) -> Result<SymmetricField, GeometryError> {
    let n = family.dim;
    let mut comps: Vec<Option<Expr>> = vec![None; n * (n + 1) / 2];
    let needs_embedding = terms.iter().any(|t| matches!(t, SymTerm::Ambient { .. }));
    let (y, dy) = if needs_embedding {
        let y = family.embedding(key);
        let dy: Vec<Vec<Option<Expr>>> = (0..n)
            .map(|i| y.iter().map(|m| m.derivative(i).to_expr()).collect())
            .collect();
        let y: Vec<Option<Expr>> = y.iter().map(TrigMonomial::to_expr).collect();
        (y, dy)
    } else {
        (Vec::new(), Vec::new())
    };
    // dφ_i = Σ_A v_A ∂_i Y^A
    let differential = |v: &[f64], i: usize| -> Option<Expr> {
        let parts: Vec<Expr> = v
            .iter()
            .zip(&dy[i])
            .filter_map(|(&c, d)| match d {
                Some(d) if c != 0.0 => Some(if c == 1.0 { d.clone() } else { mul(num(c), d.clone()) }),
                _ => None,
            })
            .collect();
        sum(parts)
    };
    for term in terms {
        match term {
            SymTerm::Sphere { block, coef } => {
                let Block::Sphere { offset, n: nb, .. } = family.blocks[*block] else {
                    unreachable!("sphere term on a non-sphere block");
                };
                for k in 0..nb {
                    let e = match sin_prefix(offset, k) {
                        None => num(*coef),
                        Some(p) if *coef == 1.0 => pow(p, 2),
                        Some(p) => mul(num(*coef), pow(p, 2)),
                    };
                    push(&mut comps[tri_index(offset + k, offset + k)], e);
                }
            }
            SymTerm::Flat { i, j, coef } => {
                let c = if i == j { *coef } else { 0.5 * coef };
                push(&mut comps[tri_index(*i, *j)], num(c));
            }
            SymTerm::Ambient { poly, a, b } => {
                let Some(p) = poly.to_expr(&y) else { continue };
                let da: Vec<Option<Expr>> = (0..n).map(|i| differential(a, i)).collect();
                let db: Vec<Option<Expr>> = if a == b {
                    da.clone()
                } else {
                    (0..n).map(|i| differential(b, i)).collect()
                };
                for i in 0..n {
                    for j in 0..=i {
                        let prod = |u: &Option<Expr>, v: &Option<Expr>| match (u, v) {
                            (Some(u), Some(v)) => Some(mul(u.clone(), v.clone())),
                            _ => None,
                        };
                        let sym = if a == b {
                            prod(&da[i], &db[j])
                        } else {
                            let parts: Vec<Expr> = [prod(&da[i], &db[j]), prod(&da[j], &db[i])]
                                .into_iter()
                                .flatten()
                                .collect();
                            sum(parts).map(|s| mul(num(0.5), s))
                        };
                        if let Some(s) = sym {
                            push(&mut comps[tri_index(i, j)], mul(p.clone(), s));
                        }
                    }
                }
            }
            SymTerm::Fixed(f) => {
                for i in 0..n {
                    for j in 0..=i {
                        push(&mut comps[tri_index(i, j)], f.component(i, j).root().clone());
                    }
                }
            }
        }
    }
    let exprs = comps
        .into_iter()
        .map(|c| Expression::new(c.unwrap_or_else(|| num(0.0)), n))
        .collect();
    SymmetricField::new(n, exprs)
}

/// Formula of a scalar field in chart `key`.
pub(crate) fn build_scalar(family: &Family, terms: &[ScalarTerm], key: &ChartKey) -> Expression {
    let y: Vec<Option<Expr>> = family.embedding(key).iter().map(TrigMonomial::to_expr).collect();
    let mut acc = None;
    for t in terms {
        match t {
            ScalarTerm::Ambient(p) => {
                if let Some(e) = p.to_expr(&y) {
                    push(&mut acc, e);
                }
            }
            ScalarTerm::Fixed(e) => push(&mut acc, e.root().clone()),
        }
    }
    Expression::new(acc.unwrap_or_else(|| num(0.0)), family.dim)
}

#[derive(Debug, Clone)]
pub enum Terms {
    Sym(Vec<SymTerm>),
    Scalar(Vec<ScalarTerm>),
}

impl Terms {
    fn rechartable(&self) -> bool {
        match self {
            Terms::Sym(t) => !t.iter().any(|t| matches!(t, SymTerm::Fixed(_))),
            Terms::Scalar(t) => !t.iter().any(|t| matches!(t, ScalarTerm::Fixed(_))),
        }
    }
}

/// Objects that can be rebuilt from a term list in any chart.
pub trait ChartObject: Sized + Send + Sync {
    #[doc(hidden)]
    fn build(family: &Family, terms: &Terms, key: &ChartKey) -> Result<Self, GeometryError>;
}

impl ChartObject for SymmetricField {
    fn build(family: &Family, terms: &Terms, key: &ChartKey) -> Result<Self, GeometryError> {
        match terms {
            Terms::Sym(t) => build_sym(family, t, key),
            Terms::Scalar(_) => unreachable!("scalar terms for a tensor field"),
        }
    }
}

impl ChartObject for MetricField {
    fn build(family: &Family, terms: &Terms, key: &ChartKey) -> Result<Self, GeometryError> {
        SymmetricField::build(family, terms, key).map(MetricField::from_field)
    }
}

impl ChartObject for ScalarField {
    fn build(family: &Family, terms: &Terms, key: &ChartKey) -> Result<Self, GeometryError> {
        match terms {
            Terms::Scalar(t) => Ok(ScalarField::new(build_scalar(family, t, key))),
            Terms::Sym(_) => unreachable!("tensor terms for a scalar field"),
        }
    }
}

/// A field on a catalog manifold: its primary-chart formulas plus, when all
/// terms allow it, formulas in every permuted polar chart (built on demand
/// and cached).
pub struct Charted<T> {
    family: Arc<Family>,
    terms: Arc<Terms>,
    primary: Arc<T>,
    variants: Arc<Mutex<HashMap<ChartKey, Arc<T>>>>,
    seed: Option<u64>,
}

impl<T> Clone for Charted<T> {
    fn clone(&self) -> Self {
        Charted {
            family: self.family.clone(),
            terms: self.terms.clone(),
            primary: self.primary.clone(),
            variants: self.variants.clone(),
            seed: self.seed,
        }
    }
}

impl<T: std::fmt::Debug> std::fmt::Debug for Charted<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Charted")
            .field("primary", &self.primary)
            .field("seed", &self.seed)
            .finish_non_exhaustive()
    }
}

impl<T: ChartObject> Charted<T> {
    pub(crate) fn new(family: Arc<Family>, terms: Terms) -> Result<Self, GeometryError> {
        let primary = Arc::new(T::build(&family, &terms, &family.identity_key())?);
        Ok(Charted {
            family,
            terms: Arc::new(terms),
            primary,
            variants: Arc::new(Mutex::new(HashMap::new())),
            seed: None,
        })
    }

    pub(crate) fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub(crate) fn family(&self) -> &Arc<Family> {
        &self.family
    }

    pub(crate) fn terms(&self) -> &Terms {
        &self.terms
    }

    /// Formulas in the primary chart.
    pub fn primary(&self) -> &T {
        &self.primary
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    /// Whether the field can be evaluated in permuted polar charts.
    pub fn rechartable(&self) -> bool {
        self.family.has_spheres() && self.terms.rechartable()
    }

    /// Formulas in chart `key` (`None` is the primary chart).
    pub fn in_chart(&self, key: Option<&ChartKey>) -> Result<Arc<T>, GeometryError> {
        let Some(key) = key else {
            return Ok(self.primary.clone());
        };
        if *key == self.family.identity_key() {
            return Ok(self.primary.clone());
        }
        let mut cache = self.variants.lock().unwrap_or_else(|e| e.into_inner());
        if let Some(v) = cache.get(key) {
            return Ok(v.clone());
        }
        let v = Arc::new(T::build(&self.family, &self.terms, key)?);
        cache.insert(key.clone(), v.clone());
        Ok(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn located_point_has_same_ambient_image() {
        let fam = Family::product(&Family::sphere(4), &Family::circle(2.0 * PI));
        let x = [0.01, 3.1, 0.02, 5.0, 1.0];
        let (key, xp) = fam.locate(&x);
        let y = fam.ambient_point(&x);
        let emb = fam.embedding(&key);
        for (a, m) in emb.iter().enumerate() {
            let v: f64 = m.coef
                * m.factors
                    .iter()
                    .map(|f| if f.sin { (f.freq * xp[f.axis]).sin() } else { (f.freq * xp[f.axis]).cos() })
                    .product::<f64>();
            assert!((v - y[a]).abs() < 1e-14, "ambient {a}: {v} vs {}", y[a]);
        }
        for k in 0..3 {
            assert!(xp[k].sin() > 0.7, "angle {k} = {}", xp[k]);
        }
    }

    #[test]
    fn trig_monomial_derivative() {
        let m = TrigMonomial {
            coef: 2.0,
            factors: vec![
                Factor { axis: 0, freq: 1.0, sin: true },
                Factor { axis: 1, freq: 3.0, sin: false },
            ],
        };
        let d = m.derivative(1);
        assert_eq!(d.coef, -6.0);
        assert!(d.factors[1].sin);
        assert_eq!(m.derivative(2).coef, 0.0);
    }
}
