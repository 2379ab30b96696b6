//! Built-in manifolds, constructors, manifests and seeded random fields.
//!
//! Every manifold is a single coordinate box with per-axis boundary flavor
//! and metric formulas. Round spheres use the polar chart
//! `g = r²(dθ₁² + sin²θ₁ dθ₂² + …)` with open axes `(0, π)` and one periodic
//! axis `(0, 2π)`.

mod charts;
mod manifest;
mod random;

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

use thiserror::Error;

use crate::expr::{Expression, ProgramScratch};
use crate::geometry::{
    point_metric, CurvatureFrame, GeometryError, LocalGeometry, MetricField, PointMetric, ScalarField,
    SymmetricField,
};
use crate::jets::JetLayout;
use crate::quadrature::{Axis, Boundary, Grid, GridSpec, QuadratureError};

pub use charts::{ChartKey, ChartObject, Charted};
pub use manifest::{load_manifest, parse_manifest, ManifestError, ManifestErrorKind};
pub use random::{random_scalar_field, random_symmetric_field};

use charts::{Family, Poly, ScalarTerm, SymTerm, Terms};

/// Largest supported chart dimension.
pub const MAX_DIM: usize = crate::expr::MAX_VARIABLES;

/// A symmetric 2-tensor field on a catalog manifold.
pub type TensorField = Charted<SymmetricField>;

/// A scalar field on a catalog manifold.
pub type ScalarFunction = Charted<ScalarField>;

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("unknown catalog entry `{0}`")]
    UnknownId(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("dimension {0} exceeds the maximum {MAX_DIM}")]
    DimensionOverflow(usize),
    #[error("perturbed metric is not positive definite at {point:?}")]
    NotPositiveDefinite { point: Vec<f64> },
    #[error("field lives on a different manifold")]
    ForeignField,
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Manifest(#[from] ManifestError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
}

/// Properties a catalog entry is expected to have, when known in closed form.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ExpectedFlags {
    pub einstein: Option<bool>,
    pub conformally_flat: Option<bool>,
    pub bach_flat: Option<bool>,
    pub constant_scalar: Option<bool>,
}

impl ExpectedFlags {
    fn all(v: bool) -> Self {
        ExpectedFlags {
            einstein: Some(v),
            conformally_flat: Some(v),
            bach_flat: Some(v),
            constant_scalar: Some(v),
        }
    }
}

// Closed-form facts carried through constructors.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct Facts {
    /// `Ric = μ g`.
    einstein: Option<f64>,
    /// Constant sectional curvature.
    sectional: Option<f64>,
    scalar: Option<f64>,
}

/// A closed manifold given by one coordinate chart.
#[derive(Debug, Clone)]
pub struct ChartManifold {
    name: String,
    axes: Vec<Axis>,
    metric: Charted<MetricField>,
    euler: Option<i64>,
    known: BTreeMap<String, f64>,
    flags: ExpectedFlags,
    facts: Facts,
}

impl ChartManifold {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    /// Metric formulas in the primary chart.
    pub fn metric(&self) -> &MetricField {
        self.metric.primary()
    }

    pub fn metric_family(&self) -> &Charted<MetricField> {
        &self.metric
    }

    pub fn euler_characteristic(&self) -> Option<i64> {
        self.euler
    }

    pub fn known_constants(&self) -> &BTreeMap<String, f64> {
        &self.known
    }

    pub fn known_constant(&self, name: &str) -> Option<f64> {
        self.known.get(name).copied()
    }

    pub fn expected_flags(&self) -> ExpectedFlags {
        self.flags
    }

    /// Scalar curvature when known in closed form.
    pub fn known_scalar_curvature(&self) -> Option<f64> {
        self.facts.scalar
    }

    /// Whether pointwise invariants are evaluated in permuted polar charts.
    pub fn rechartable(&self) -> bool {
        self.metric.rechartable()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim() && self.axes.iter().zip(x).all(|(a, &v)| a.contains(v))
    }

    /// Primary-chart grid for `spec`.
    pub fn grid(&self, spec: &GridSpec) -> Result<Grid, QuadratureError> {
        Grid::new(&self.axes, spec)
    }

    /// Per-worker evaluator with metric jets of the given order.
    pub fn evaluator(&self, order: usize) -> NodeEvaluator<'_> {
        NodeEvaluator::new(self, order)
    }

    /// Curvature frame at a primary-chart point, computed in that chart.
    pub fn frame_at(&self, x: &[f64], order: usize) -> Result<CurvatureFrame, GeometryError> {
        LocalGeometry::new(self.metric(), x, order)?.frame(true)
    }

    /// Wraps chart formulas as a field on this manifold.
    pub fn tensor_field(&self, field: SymmetricField) -> Result<TensorField, CatalogError> {
        if field.dim() != self.dim() {
            return Err(GeometryError::DimMismatch(field.dim(), self.dim()).into());
        }
        let seed = field.seed();
        let f = Charted::new(self.metric.family().clone(), Terms::Sym(vec![SymTerm::Fixed(field)]))?;
        Ok(match seed {
            Some(s) => f.with_seed(s),
            None => f,
        })
    }

    /// Wraps a chart formula as a scalar function on this manifold.
    pub fn scalar_function(&self, expr: Expression) -> Result<ScalarFunction, CatalogError> {
        if expr.dim() != self.dim() {
            return Err(GeometryError::DimMismatch(expr.dim(), self.dim()).into());
        }
        Ok(Charted::new(self.metric.family().clone(), Terms::Scalar(vec![ScalarTerm::Fixed(expr)]))?)
    }

    /// The constant function `c`.
    pub fn constant_function(&self, c: f64) -> Result<ScalarFunction, CatalogError> {
        let fam = self.metric.family();
        let term = if fam.fully_embedded() {
            ScalarTerm::Ambient(Poly::constant(c, fam.ambient_dim))
        } else {
            ScalarTerm::Fixed(Expression::constant(c, self.dim()))
        };
        Ok(Charted::new(fam.clone(), Terms::Scalar(vec![term]))?)
    }

    /// `Σ_b c_b g_b`, where `g_b` is the unit metric of the `b`-th product
    /// factor (round sphere, circle `dx²`, or flat box). Catalog entries
    /// only.
    pub fn factor_combination(&self, coefs: &[f64]) -> Result<TensorField, CatalogError> {
        let fam = self.metric.family();
        if coefs.len() != fam.blocks.len() {
            return Err(CatalogError::InvalidParameter(format!(
                "{} coefficients for {} product factors",
                coefs.len(),
                fam.blocks.len()
            )));
        }
        let mut terms = Vec::new();
        for (b, (blk, &c)) in fam.blocks.iter().zip(coefs).enumerate() {
            match *blk {
                charts::Block::Sphere { .. } => terms.push(SymTerm::Sphere { block: b, coef: c }),
                charts::Block::Circle { axis, .. } => terms.push(SymTerm::Flat { i: axis, j: axis, coef: c }),
                charts::Block::Plain { offset, n } => {
                    terms.extend((offset..offset + n).map(|i| SymTerm::Flat { i, j: i, coef: c }))
                }
            }
        }
        Ok(Charted::new(fam.clone(), Terms::Sym(terms))?)
    }

    fn owns<T: ChartObject>(&self, f: &Charted<T>) -> bool {
        Arc::ptr_eq(f.family(), self.metric.family()) || **f.family() == **self.metric.family()
    }

    fn sym_terms(&self) -> Vec<SymTerm> {
        match self.metric.terms() {
            Terms::Sym(t) => t.clone(),
            Terms::Scalar(_) => unreachable!("metric holds tensor terms"),
        }
    }
}

/// Chart a node is evaluated in: `key = None` is the primary chart.
#[derive(Debug, Clone, PartialEq)]
pub struct Located {
    pub key: Option<ChartKey>,
    pub point: Vec<f64>,
}

/// Per-worker evaluation state: jet layouts and program scratch.
pub struct NodeEvaluator<'m> {
    manifold: &'m ChartManifold,
    layout: Arc<JetLayout>,
    layout0: Arc<JetLayout>,
    scratch: ProgramScratch,
    scratch0: ProgramScratch,
}

impl<'m> NodeEvaluator<'m> {
    fn new(manifold: &'m ChartManifold, order: usize) -> Self {
        let n = manifold.dim();
        let layout = JetLayout::shared(n, order).expect("chart dimension is positive");
        let layout0 = JetLayout::shared(n, 0).expect("chart dimension is positive");
        let scratch = manifold.metric().scratch(&layout, order);
        let scratch0 = manifold.metric().scratch(&layout0, 0);
        NodeEvaluator {
            manifold,
            layout,
            layout0,
            scratch,
            scratch0,
        }
    }

    pub fn manifold(&self) -> &'m ChartManifold {
        self.manifold
    }

    pub fn order(&self) -> usize {
        self.layout.order()
    }

    pub fn layout(&self) -> &Arc<JetLayout> {
        &self.layout
    }

    /// Metric, inverse and `√det g` in the primary chart.
    pub fn point_metric(&mut self, x: &[f64]) -> Result<PointMetric, GeometryError> {
        point_metric(self.manifold.metric(), x, &self.layout0, &mut self.scratch0)
    }

    /// `√det g` in the primary chart.
    pub fn sqrt_det(&mut self, x: &[f64]) -> Result<f64, GeometryError> {
        Ok(self.point_metric(x)?.sqrt_det)
    }

    /// Chooses the evaluation chart for `x`. Recharting happens only when
    /// the metric and `also` (the other fields involved) all allow it.
    pub fn locate(&self, x: &[f64], also: bool) -> Located {
        if also && self.manifold.rechartable() {
            let (key, point) = self.manifold.metric.family().locate(x);
            Located { key: Some(key), point }
        } else {
            Located {
                key: None,
                point: x.to_vec(),
            }
        }
    }

    /// Metric and connection jets in the chart of `at`.
    pub fn geometry(&mut self, at: &Located) -> Result<LocalGeometry, GeometryError> {
        let metric = self.manifold.metric.in_chart(at.key.as_ref())?;
        LocalGeometry::with_scratch(&metric, &at.point, &self.layout, &mut self.scratch)
    }

    /// Full curvature frame at primary-chart point `x` (computed in the
    /// best-conditioned chart) and the primary-chart `√det g`.
    pub fn frame(&mut self, x: &[f64], weyl_laplacian: bool) -> Result<(CurvatureFrame, f64), GeometryError> {
        let at = self.locate(x, true);
        let frame = self.geometry(&at)?.frame(weyl_laplacian)?;
        let sqrt_det = if at.key.is_none() {
            frame.sqrt_det
        } else {
            self.sqrt_det(x)?
        };
        Ok((frame, sqrt_det))
    }
}

fn check_dim(n: usize) -> Result<(), CatalogError> {
    if n == 0 {
        return Err(CatalogError::InvalidParameter("dimension must be positive".into()));
    }
    if n > MAX_DIM {
        return Err(CatalogError::DimensionOverflow(n));
    }
    Ok(())
}

fn positive(name: &str, v: f64) -> Result<(), CatalogError> {
    if !(v > 0.0 && v.is_finite()) {
        return Err(CatalogError::InvalidParameter(format!("{name} must be positive, got {v}")));
    }
    Ok(())
}

fn fmt_num(v: f64) -> String {
    format!("{v}")
}

// Γ(k/2) for positive integers k.
fn gamma_half(k: usize) -> f64 {
    if k % 2 == 0 {
        (1..k / 2).map(|j| j as f64).product()
    } else {
        let mut g = PI.sqrt();
        let mut x = 0.5;
        while x < k as f64 / 2.0 - 0.25 {
            g *= x;
            x += 1.0;
        }
        g
    }
}

/// Volume of the unit `n`-sphere.
pub fn unit_sphere_volume(n: usize) -> f64 {
    2.0 * PI.powf((n as f64 + 1.0) / 2.0) / gamma_half(n + 1)
}

/// Yamabe constant of the round `n`-sphere, `n(n−1) ω_n^{2/n}`.
pub fn sphere_yamabe(n: usize) -> f64 {
    let nf = n as f64;
    nf * (nf - 1.0) * unit_sphere_volume(n).powf(2.0 / nf)
}

/// The round `n`-sphere of radius `r` in polar coordinates. `n = 1` gives a
/// circle of length `2πr`.
pub fn round_sphere(n: usize, r: f64) -> Result<ChartManifold, CatalogError> {
    check_dim(n)?;
    positive("radius", r)?;
    let r2 = r * r;
    let (family, terms) = if n == 1 {
        (Family::circle(2.0 * PI), vec![SymTerm::Flat { i: 0, j: 0, coef: r2 }])
    } else {
        (Family::sphere(n), vec![SymTerm::Sphere { block: 0, coef: r2 }])
    };
    let metric = Charted::new(Arc::new(family), Terms::Sym(terms))?;
    let mut axes: Vec<Axis> = (0..n.saturating_sub(1)).map(|_| Axis::open(0.0, PI)).collect();
    axes.push(Axis::periodic(0.0, 2.0 * PI));
    let nf = n as f64;
    let mut known = BTreeMap::new();
    known.insert("volume".to_string(), unit_sphere_volume(n) * r.powi(n as i32));
    if n >= 3 {
        known.insert("yamabe".to_string(), sphere_yamabe(n));
    }
    let facts = if n == 1 {
        Facts {
            einstein: Some(0.0),
            sectional: Some(0.0),
            scalar: Some(0.0),
        }
    } else {
        Facts {
            einstein: Some((nf - 1.0) / r2),
            sectional: Some(1.0 / r2),
            scalar: Some(nf * (nf - 1.0) / r2),
        }
    };
    Ok(ChartManifold {
        name: format!("round_sphere({n},{})", fmt_num(r)),
        axes,
        metric,
        euler: Some(if n % 2 == 0 { 2 } else { 0 }),
        known,
        flags: ExpectedFlags::all(true),
        facts,
    })
}

/// The flat torus with the given periods.
pub fn flat_torus(n: usize, periods: &[f64]) -> Result<ChartManifold, CatalogError> {
    check_dim(n)?;
    if periods.len() != n {
        return Err(CatalogError::InvalidParameter(format!(
            "{} periods for a {n}-torus",
            periods.len()
        )));
    }
    for &p in periods {
        positive("period", p)?;
    }
    let family = periods
        .iter()
        .map(|&p| Family::circle(p))
        .reduce(|a, b| Family::product(&a, &b))
        .expect("n ≥ 1");
    let terms = (0..n).map(|i| SymTerm::Flat { i, j: i, coef: 1.0 }).collect();
    let metric = Charted::new(Arc::new(family), Terms::Sym(terms))?;
    let mut known = BTreeMap::new();
    known.insert("volume".to_string(), periods.iter().product());
    if n >= 3 {
        known.insert("yamabe".to_string(), 0.0);
    }
    let uniform = periods.windows(2).all(|w| w[0] == w[1]);
    let name = if uniform && periods[0] == 2.0 * PI {
        format!("flat_torus({n})")
    } else {
        let p: Vec<String> = periods.iter().map(|&p| fmt_num(p)).collect();
        format!("flat_torus({n},[{}])", p.join(","))
    };
    Ok(ChartManifold {
        name,
        axes: periods.iter().map(|&p| Axis::periodic(0.0, p)).collect(),
        metric,
        euler: Some(0),
        known,
        flags: ExpectedFlags::all(true),
        facts: Facts {
            einstein: Some(0.0),
            sectional: Some(0.0),
            scalar: Some(0.0),
        },
    })
}

/// Riemannian product; χ multiplies.
pub fn product(a: &ChartManifold, b: &ChartManifold) -> Result<ChartManifold, CatalogError> {
    let n = a.dim() + b.dim();
    if n > MAX_DIM {
        return Err(CatalogError::DimensionOverflow(n));
    }
    let fa = a.metric.family();
    let fb = b.metric.family();
    let family = Arc::new(Family::product(fa, fb));
    let mut terms = charts::shift_sym_terms(&a.sym_terms(), fa, fb, true)?;
    terms.extend(charts::shift_sym_terms(&b.sym_terms(), fa, fb, false)?);
    let metric = Charted::new(family, Terms::Sym(terms))?;
    let mut axes = a.axes.clone();
    axes.extend_from_slice(&b.axes);

    let mut known = BTreeMap::new();
    if let (Some(va), Some(vb)) = (a.known_constant("volume"), b.known_constant("volume")) {
        known.insert("volume".to_string(), va * vb);
    }
    let (fa_, fb_) = (a.facts, b.facts);
    let einstein = match (fa_.einstein, fb_.einstein) {
        (Some(x), Some(y)) if (x - y).abs() <= 1e-12 * (1.0 + x.abs()) => Some(x),
        _ => None,
    };
    let sectional = match (fa_.sectional, fb_.sectional) {
        (Some(x), Some(y)) if x == 0.0 && y == 0.0 => Some(0.0),
        _ => None,
    };
    let scalar = match (fa_.scalar, fb_.scalar) {
        (Some(x), Some(y)) => Some(x + y),
        _ => None,
    };
    // A line or circle times a space form is conformally flat.
    let cf = sectional.is_some()
        || (a.dim() == 1 && fb_.sectional.is_some())
        || (b.dim() == 1 && fa_.sectional.is_some());
    let both = |f: fn(&ExpectedFlags) -> Option<bool>| match (f(&a.flags), f(&b.flags)) {
        (Some(x), Some(y)) => Some(x && y),
        _ => None,
    };
    let constant_scalar = both(|f| f.constant_scalar);
    let known_geometry = fa_.sectional.is_some() && fb_.sectional.is_some();
    let flags = if known_geometry {
        ExpectedFlags {
            einstein: Some(einstein.is_some()),
            conformally_flat: Some(cf),
            bach_flat: Some(einstein.is_some() || cf),
            constant_scalar,
        }
    } else {
        ExpectedFlags {
            constant_scalar,
            ..ExpectedFlags::default()
        }
    };
    Ok(ChartManifold {
        name: format!("product({},{})", a.name, b.name),
        axes,
        metric,
        euler: a.euler.zip(b.euler).map(|(x, y)| x * y),
        known,
        flags,
        facts: Facts {
            einstein,
            sectional,
            scalar,
        },
    })
}

/// The metric `c·g`; χ and the Yamabe constant are preserved.
pub fn scaled(m: &ChartManifold, c: f64) -> Result<ChartManifold, CatalogError> {
    positive("scale", c)?;
    let terms = m.sym_terms().iter().map(|t| t.scaled(c)).collect::<Result<Vec<_>, _>>()?;
    let metric = Charted::new(m.metric.family().clone(), Terms::Sym(terms))?;
    let mut known = m.known.clone();
    if let Some(v) = known.get_mut("volume") {
        *v *= c.powf(m.dim() as f64 / 2.0);
    }
    Ok(ChartManifold {
        name: format!("scaled({},{})", m.name, fmt_num(c)),
        axes: m.axes.clone(),
        metric,
        euler: m.euler,
        known,
        flags: m.flags,
        facts: Facts {
            einstein: m.facts.einstein.map(|x| x / c),
            sectional: m.facts.sectional.map(|x| x / c),
            scalar: m.facts.scalar.map(|x| x / c),
        },
    })
}

/// The metric `g + ε h`. Positive-definiteness is checked on a sample grid
/// (and again at every evaluated node).
pub fn perturbed(m: &ChartManifold, h: &TensorField, eps: f64) -> Result<ChartManifold, CatalogError> {
    if !eps.is_finite() {
        return Err(CatalogError::InvalidParameter(format!("ε must be finite, got {eps}")));
    }
    if !m.owns(h) {
        return Err(CatalogError::ForeignField);
    }
    let Terms::Sym(h_terms) = h.terms() else {
        unreachable!("tensor field holds tensor terms")
    };
    let mut terms = m.sym_terms();
    for t in h_terms {
        terms.push(t.scaled(eps)?);
    }
    let metric = Charted::new(m.metric.family().clone(), Terms::Sym(terms))?;
    let tag = match h.seed() {
        Some(s) => format!("seed {s}"),
        None => "h".to_string(),
    };
    let out = ChartManifold {
        name: format!("perturbed({},{tag},{})", m.name, fmt_num(eps)),
        axes: m.axes.clone(),
        metric,
        euler: m.euler,
        known: BTreeMap::new(),
        flags: ExpectedFlags::default(),
        facts: Facts::default(),
    };
    check_positive_definite(&out)?;
    Ok(out)
}

fn check_positive_definite(m: &ChartManifold) -> Result<(), CatalogError> {
    let n = m.dim();
    let per_axis = ((20_000f64).powf(1.0 / n as f64).floor() as usize).clamp(4, 12);
    let grid = m.grid(&GridSpec::uniform(n, per_axis)?)?;
    let mut ev = m.evaluator(0);
    let mut x = vec![0.0; n];
    for k in 0..grid.len() {
        grid.node(k, &mut x);
        let at = ev.locate(&x, true);
        let metric = m.metric.in_chart(at.key.as_ref())?;
        match point_metric(&metric, &at.point, &ev.layout0, &mut ev.scratch0) {
            Ok(_) => {}
            Err(GeometryError::NotPositiveDefinite { .. } | GeometryError::Singular { .. }) => {
                return Err(CatalogError::NotPositiveDefinite { point: x.clone() });
            }
            Err(e) => return Err(e.into()),
        }
    }
    Ok(())
}

/// Catalog ids in listing order.
pub const BUILTIN_IDS: [&str; 11] = [
    "s3",
    "s4",
    "s5",
    "t4",
    "s2xs2",
    "s2xs2_r12",
    "s1xs3",
    "s1xs3_r12",
    "s3xs2",
    "s4_perturbed",
    "s1xs3_perturbed",
];

/// Constructor expression behind each built-in id.
pub fn builtin_recipe(id: &str) -> Option<&'static str> {
    Some(match id {
        "s3" => "round_sphere(3,1)",
        "s4" => "round_sphere(4,1)",
        "s5" => "round_sphere(5,1)",
        "t4" => "flat_torus(4)",
        "s2xs2" => "product(round_sphere(2,1),round_sphere(2,1))",
        "s2xs2_r12" => "scaled(s2xs2,1/3)",
        "s1xs3" => "product(round_sphere(1,1),round_sphere(3,1))",
        "s1xs3_r12" => "scaled(s1xs3,1/2)",
        "s3xs2" => "scaled(product(round_sphere(3,1),round_sphere(2,0.7071067811865476)),1/2)",
        "s4_perturbed" => "perturbed(s4,7,0.1)",
        "s1xs3_perturbed" => "perturbed(s1xs3,7,0.1)",
        _ => return None,
    })
}

/// A built-in entry by id.
pub fn builtin(id: &str) -> Result<ChartManifold, CatalogError> {
    let recipe = builtin_recipe(id).ok_or_else(|| CatalogError::UnknownId(id.to_string()))?;
    Ok(from_selector(recipe)?.with_name(id))
}

/// Bandwidth and amplitude of the random perturbations behind
/// `perturbed(m, seed, ε)` selectors.
pub const PERTURBATION_BANDWIDTH: usize = 2;
pub const PERTURBATION_AMPLITUDE: f64 = 1.0;

/// Builds a manifold from a selector: a built-in id or a constructor
/// expression such as `scaled(product(round_sphere(2,1),s3),0.5)`,
/// `flat_torus(4)`, `flat_torus(2,[1,2])` or `perturbed(s4,7,0.1)` (seeded
/// random perturbation).
pub fn from_selector(text: &str) -> Result<ChartManifold, CatalogError> {
    let mut p = SelectorParser {
        s: text.as_bytes(),
        pos: 0,
        text,
    };
    let m = p.manifold()?;
    p.skip_ws();
    if p.pos != p.s.len() {
        return Err(p.error("trailing input"));
    }
    Ok(m)
}

struct SelectorParser<'a> {
    s: &'a [u8],
    pos: usize,
    text: &'a str,
}

impl SelectorParser<'_> {
    fn error(&self, what: &str) -> CatalogError {
        CatalogError::InvalidParameter(format!("selector `{}`: {what} at column {}", self.text, self.pos + 1))
    }

    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn eat(&mut self, c: u8) -> bool {
        self.skip_ws();
        if self.s.get(self.pos) == Some(&c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<(), CatalogError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.error(&format!("expected `{}`", c as char)))
        }
    }

    fn ident(&mut self) -> Result<String, CatalogError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.s.len() && (self.s[self.pos].is_ascii_alphanumeric() || self.s[self.pos] == b'_') {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error("expected a name"));
        }
        Ok(self.text[start..self.pos].to_string())
    }

    // A decimal number, optionally `a/b`.
    fn number(&mut self) -> Result<f64, CatalogError> {
        let a = self.plain_number()?;
        if self.eat(b'/') {
            let b = self.plain_number()?;
            return Ok(a / b);
        }
        Ok(a)
    }

    fn plain_number(&mut self) -> Result<f64, CatalogError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.s.len() && matches!(self.s[self.pos], b'0'..=b'9' | b'.' | b'e' | b'E' | b'-' | b'+') {
            self.pos += 1;
        }
        let t = &self.text[start..self.pos];
        if t == "pi" {
            return Ok(PI);
        }
        t.parse().map_err(|_| {
            self.pos = start;
            self.error("expected a number")
        })
    }

    fn integer(&mut self) -> Result<usize, CatalogError> {
        let v = self.plain_number()?;
        if v < 0.0 || v.fract() != 0.0 {
            return Err(self.error("expected a non-negative integer"));
        }
        Ok(v as usize)
    }

    fn manifold(&mut self) -> Result<ChartManifold, CatalogError> {
        let name = self.ident()?;
        if !self.eat(b'(') {
            return builtin(&name);
        }
        let m = match name.as_str() {
            "round_sphere" => {
                let n = self.integer()?;
                let r = if self.eat(b',') { self.number()? } else { 1.0 };
                round_sphere(n, r)?
            }
            "flat_torus" => {
                let n = self.integer()?;
                let periods = if self.eat(b',') {
                    if self.eat(b'[') {
                        let mut v = vec![self.number()?];
                        while self.eat(b',') {
                            v.push(self.number()?);
                        }
                        self.expect(b']')?;
                        v
                    } else {
                        vec![self.number()?; n]
                    }
                } else {
                    vec![2.0 * PI; n]
                };
                flat_torus(n, &periods)?
            }
            "product" => {
                let a = self.manifold()?;
                self.expect(b',')?;
                let b = self.manifold()?;
                product(&a, &b)?
            }
            "scaled" => {
                let a = self.manifold()?;
                self.expect(b',')?;
                let c = self.number()?;
                scaled(&a, c)?
            }
            "perturbed" => {
                let a = self.manifold()?;
                self.expect(b',')?;
                let seed = self.integer()? as u64;
                let eps = if self.eat(b',') { self.number()? } else { 0.1 };
                let h = random_symmetric_field(&a, seed, PERTURBATION_BANDWIDTH, PERTURBATION_AMPLITUDE)?;
                perturbed(&a, &h, eps)?
            }
            other => return Err(CatalogError::UnknownId(other.to_string())),
        };
        self.expect(b')')?;
        Ok(m)
    }
}

/// Listing rows: id, constructor, dimension, χ and expected flags.
pub fn listing() -> Vec<(String, String, usize, Option<i64>, ExpectedFlags)> {
    BUILTIN_IDS
        .iter()
        .map(|id| {
            let m = builtin(id).expect("built-in entries construct");
            (
                id.to_string(),
                builtin_recipe(id).expect("listed id").to_string(),
                m.dim(),
                m.euler,
                m.flags,
            )
        })
        .collect()
}

impl Boundary {
    /// Parses `periodic` or `open`.
    pub fn parse(s: &str) -> Option<Boundary> {
        match s {
            "periodic" => Some(Boundary::Periodic),
            "open" => Some(Boundary::Open),
            _ => None,
        }
    }
}

/// A manifold from explicit chart data: axes, metric formulas and χ.
pub fn from_chart(
    name: impl Into<String>,
    axes: Vec<Axis>,
    metric: MetricField,
    euler: Option<i64>,
) -> Result<ChartManifold, CatalogError> {
    let n = axes.len();
    check_dim(n)?;
    if metric.dim() != n {
        return Err(GeometryError::DimMismatch(metric.dim(), n).into());
    }
    let terms = Terms::Sym(vec![SymTerm::Fixed(metric.as_field().clone())]);
    let metric = Charted::new(Arc::new(Family::plain(n)), terms)?;
    Ok(ChartManifold {
        name: name.into(),
        axes,
        metric,
        euler,
        known: BTreeMap::new(),
        flags: ExpectedFlags::default(),
        facts: Facts::default(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_constants() {
        assert!((unit_sphere_volume(2) - 4.0 * PI).abs() < 1e-14);
        assert!((unit_sphere_volume(3) - 2.0 * PI * PI).abs() < 1e-13);
        assert!((unit_sphere_volume(4) - 8.0 * PI * PI / 3.0).abs() < 1e-13);
        assert!((sphere_yamabe(4) - 8.0 * 6f64.sqrt() * PI).abs() < 1e-12);
    }

    #[test]
    fn selector_errors_name_the_column() {
        let e = from_selector("scaled(s4 0.5)").unwrap_err().to_string();
        assert!(e.contains("column"), "{e}");
        assert!(matches!(from_selector("nope"), Err(CatalogError::UnknownId(_))));
    }
}
