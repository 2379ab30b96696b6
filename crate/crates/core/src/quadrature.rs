//! Tensor-product quadrature over chart boxes.
//!
//! Periodic axes use the midpoint rule, which integrates trigonometric
//! polynomials of degree below the node count exactly. Open axes use
//! Gauss–Legendre nodes, which never touch the interval ends, so the
//! degenerate boundary of a polar chart is never evaluated.
//!
//! Reductions are deterministic: nodes are processed in fixed chunks, each
//! chunk sums pairwise, and chunk partials combine along a fixed binary tree,
//! so results do not depend on the number of worker threads.

use std::f64::consts::PI;

use rayon::prelude::*;
use thiserror::Error;

use crate::catalog::{ChartManifold, NodeEvaluator};
use crate::geometry::{CurvatureFrame, GeometryError};

/// Nodes per axis when nothing else is requested.
pub const DEFAULT_NODES: usize = 24;

/// Smallest accepted node count per axis.
pub const MIN_NODES: usize = 4;

// Nodes per reduction chunk.
const CHUNK: usize = 64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadratureError {
    #[error("axis {axis}: {count} nodes requested, at least {MIN_NODES} needed")]
    TooFewNodes { axis: usize, count: usize },
    #[error("grid has {got} axes but the chart has {want}")]
    GridDimension { got: usize, want: usize },
    #[error("axis interval [{min}, {max}] is empty or not finite")]
    BadInterval { min: f64, max: f64 },
    #[error("exponent p = {0} must be at least 1")]
    BadExponent(f64),
    #[error("evaluation failed at node {point:?}: {source}")]
    Node {
        point: Vec<f64>,
        #[source]
        source: GeometryError,
    },
    #[error("non-finite value in channel {channel} at node {point:?}")]
    NonFinite { channel: usize, point: Vec<f64> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Boundary {
    /// The ends are identified.
    Periodic,
    /// The ends are excluded (e.g. the poles of a polar angle).
    Open,
}

impl Boundary {
    pub fn name(self) -> &'static str {
        match self {
            Boundary::Periodic => "periodic",
            Boundary::Open => "open",
        }
    }
}

/// One coordinate interval of a chart box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    pub boundary: Boundary,
}

impl Axis {
    pub fn new(min: f64, max: f64, boundary: Boundary) -> Result<Self, QuadratureError> {
        if !(min.is_finite() && max.is_finite() && min < max) {
            return Err(QuadratureError::BadInterval { min, max });
        }
        Ok(Axis { min, max, boundary })
    }

    pub fn periodic(min: f64, max: f64) -> Self {
        Axis::new(min, max, Boundary::Periodic).expect("valid interval")
    }

    pub fn open(min: f64, max: f64) -> Self {
        Axis::new(min, max, Boundary::Open).expect("valid interval")
    }

    pub fn length(&self) -> f64 {
        self.max - self.min
    }

    /// Open axes exclude their ends; periodic axes include them.
    pub fn contains(&self, x: f64) -> bool {
        match self.boundary {
            Boundary::Open => x > self.min && x < self.max,
            Boundary::Periodic => x >= self.min && x <= self.max,
        }
    }
}

/// Per-axis node counts.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GridSpec {
    counts: Vec<usize>,
}

impl GridSpec {
    pub fn new(counts: Vec<usize>) -> Result<Self, QuadratureError> {
        if let Some((axis, &count)) = counts.iter().enumerate().find(|(_, &c)| c < MIN_NODES) {
            return Err(QuadratureError::TooFewNodes { axis, count });
        }
        Ok(GridSpec { counts })
    }

    pub fn uniform(dim: usize, count: usize) -> Result<Self, QuadratureError> {
        GridSpec::new(vec![count; dim])
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn dim(&self) -> usize {
        self.counts.len()
    }

    /// Twice as many nodes on every axis.
    pub fn doubled(&self) -> GridSpec {
        GridSpec {
            counts: self.counts.iter().map(|c| 2 * c).collect(),
        }
    }
}

/// Gauss–Legendre nodes (ascending) and weights on `(−1, 1)`.
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; m];
    let mut w = vec![0.0; m];
    for i in 0..m.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre(m, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() <= 1e-16 * z.abs().max(1.0) {
                let (_, d) = legendre(m, z);
                dp = d;
                break;
            }
        }
        x[i] = -z;
        x[m - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[m - 1 - i] = wi;
    }
    if m % 2 == 1 {
        x[m / 2] = 0.0;
    }
    (x, w)
}

// P_m(z) and P_m'(z) by the three-term recurrence.
fn legendre(m: usize, z: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, z);
    if m == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=m {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = m as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Nodes and weights of one axis.
#[derive(Debug, Clone, PartialEq)]
pub struct AxisRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl AxisRule {
    pub fn new(axis: &Axis, count: usize) -> Self {
        match axis.boundary {
            Boundary::Periodic => {
                let h = axis.length() / count as f64;
                AxisRule {
                    nodes: (0..count).map(|k| axis.min + (k as f64 + 0.5) * h).collect(),
                    weights: vec![h; count],
                }
            }
            Boundary::Open => {
                let (x, w) = gauss_legendre(count);
                let half = 0.5 * axis.length();
                let mid = axis.min + half;
                AxisRule {
                    nodes: x.iter().map(|x| mid + half * x).collect(),
                    weights: w.iter().map(|w| half * w).collect(),
                }
            }
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    // One node carrying the whole axis weight.
    fn collapsed(&self) -> AxisRule {
        let mid = self.nodes[self.nodes.len() / 2];
        AxisRule {
            nodes: vec![mid],
            weights: vec![pairwise_sum(&self.weights)],
        }
    }
}

/// A tensor-product grid. Node `k` enumerates the axes with the last axis
/// varying fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    rules: Vec<AxisRule>,
}

impl Grid {
    pub fn new(axes: &[Axis], spec: &GridSpec) -> Result<Self, QuadratureError> {
        if spec.dim() != axes.len() {
            return Err(QuadratureError::GridDimension {
                got: spec.dim(),
                want: axes.len(),
            });
        }
        Ok(Grid {
            rules: axes.iter().zip(spec.counts()).map(|(a, &c)| AxisRule::new(a, c)).collect(),
        })
    }

    /// Replaces every axis with `used[axis] == false` by a single node whose
    /// weight is the axis total. Exact for integrands constant along those
    /// axes.
    pub fn collapse(&self, used: &[bool]) -> Grid {
        Grid {
            rules: self
                .rules
                .iter()
                .zip(used)
                .map(|(r, &u)| if u { r.clone() } else { r.collapsed() })
                .collect(),
        }
    }

    pub fn rules(&self) -> &[AxisRule] {
        &self.rules
    }

    pub fn dim(&self) -> usize {
        self.rules.len()
    }

    /// Number of nodes.
    pub fn len(&self) -> usize {
        self.rules.iter().map(AxisRule::len).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Writes node `k` into `point` and returns its weight.
    pub fn node(&self, mut k: usize, point: &mut [f64]) -> f64 {
        let mut w = 1.0;
        for (axis, rule) in self.rules.iter().enumerate().rev() {
            let i = k % rule.len();
            k /= rule.len();
            point[axis] = rule.nodes[i];
            w *= rule.weights[i];
        }
        w
    }
}

/// Sum with a fixed pairwise tree.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    match v.len() {
        0 => 0.0,
        1 => v[0],
        2 => v[0] + v[1],
        n => {
            let h = n / 2;
            pairwise_sum(&v[..h]) + pairwise_sum(&v[h..])
        }
    }
}

/// Per-channel results of [`reduce`].
///
/// A channel value of NaN at a node marks it absent there: the node then
/// contributes nothing to that channel.
#[derive(Debug, Clone, PartialEq)]
pub struct Reduction {
    /// `Σ w · √det g · v` per channel.
    pub integrals: Vec<f64>,
    pub maxima: Vec<f64>,
    pub minima: Vec<f64>,
    /// Nodes at which the channel was present.
    pub present: Vec<usize>,
    /// `Σ w · √det g`.
    pub volume: f64,
    pub nodes: usize,
}

#[derive(Debug, Clone)]
struct Partial {
    sums: Vec<f64>,
    maxima: Vec<f64>,
    minima: Vec<f64>,
    present: Vec<usize>,
}

impl Partial {
    fn empty(channels: usize) -> Self {
        Partial {
            sums: vec![0.0; channels + 1],
            maxima: vec![f64::NEG_INFINITY; channels],
            minima: vec![f64::INFINITY; channels],
            present: vec![0; channels],
        }
    }

    fn merge(mut self, other: &Partial) -> Self {
        for (a, b) in self.sums.iter_mut().zip(&other.sums) {
            *a += b;
        }
        for c in 0..self.maxima.len() {
            self.maxima[c] = self.maxima[c].max(other.maxima[c]);
            self.minima[c] = self.minima[c].min(other.minima[c]);
            self.present[c] += other.present[c];
        }
        self
    }
}

fn merge_tree(parts: &[Partial]) -> Partial {
    match parts.len() {
        1 => parts[0].clone(),
        n => {
            let h = n / 2;
            merge_tree(&parts[..h]).merge(&merge_tree(&parts[h..]))
        }
    }
}

/// Evaluates `channels` values at every node and reduces them.
///
/// `eval(state, point, values)` fills `values` and returns `√det g` at the
/// node. `init` builds per-worker state (scratch buffers); results never
/// depend on how nodes are spread over workers.
pub fn reduce<S, I, F>(grid: &Grid, channels: usize, init: I, eval: F) -> Result<Reduction, QuadratureError>
where
    I: Fn() -> S + Sync + Send,
    F: Fn(&mut S, &[f64], &mut [f64]) -> Result<f64, GeometryError> + Sync + Send,
{
    let total = grid.len();
    let chunks = total.div_ceil(CHUNK).max(1);
    let dim = grid.dim();
    let parts: Vec<Result<Partial, QuadratureError>> = (0..chunks)
        .into_par_iter()
        .map_init(init, |state, chunk| {
            let start = chunk * CHUNK;
            let end = (start + CHUNK).min(total);
            let mut part = Partial::empty(channels);
            let mut point = vec![0.0; dim];
            let mut values = vec![0.0; channels];
            let mut terms = vec![Vec::with_capacity(CHUNK); channels + 1];
            for k in start..end {
                let w = grid.node(k, &mut point);
                let sqrt_det = eval(state, &point, &mut values).map_err(|source| QuadratureError::Node {
                    point: point.clone(),
                    source,
                })?;
                let ws = w * sqrt_det;
                terms[channels].push(ws);
                for (c, &v) in values.iter().enumerate() {
                    if v.is_nan() {
                        continue;
                    }
                    if !v.is_finite() {
                        return Err(QuadratureError::NonFinite {
                            channel: c,
                            point: point.clone(),
                        });
                    }
                    terms[c].push(ws * v);
                    part.maxima[c] = part.maxima[c].max(v);
                    part.minima[c] = part.minima[c].min(v);
                    part.present[c] += 1;
                }
            }
            for (s, t) in part.sums.iter_mut().zip(&terms) {
                *s = pairwise_sum(t);
            }
            Ok(part)
        })
        .collect();
    let parts: Vec<Partial> = parts.into_iter().collect::<Result<_, _>>()?;
    let merged = merge_tree(&parts);
    Ok(Reduction {
        volume: merged.sums[channels],
        integrals: merged.sums[..channels].to_vec(),
        maxima: merged.maxima,
        minima: merged.minima,
        present: merged.present,
        nodes: total,
    })
}

/// Grid over `m`'s chart, collapsed along axes the metric ignores.
pub fn metric_grid(m: &ChartManifold, spec: &GridSpec) -> Result<Grid, QuadratureError> {
    let grid = Grid::new(m.axes(), spec)?;
    let used: Vec<bool> = (0..m.dim()).map(|a| m.metric().depends_on(a)).collect();
    Ok(grid.collapse(&used))
}

/// `∫ f dv_g` for a pointwise scalar `f` evaluated in the chart.
pub fn integrate<F>(m: &ChartManifold, spec: &GridSpec, f: F) -> Result<f64, QuadratureError>
where
    F: Fn(&[f64]) -> f64 + Sync + Send,
{
    let grid = Grid::new(m.axes(), spec)?;
    let r = reduce(
        &grid,
        1,
        || m.evaluator(0),
        |ev, x, out| {
            out[0] = f(x);
            ev.sqrt_det(x)
        },
    )?;
    Ok(r.integrals[0])
}

/// `Vol(M, g)`.
pub fn volume(m: &ChartManifold, spec: &GridSpec) -> Result<f64, QuadratureError> {
    let grid = metric_grid(m, spec)?;
    let r = reduce(&grid, 0, || m.evaluator(0), |ev, x, _| ev.sqrt_det(x))?;
    Ok(r.volume)
}

// Reduces one frame quantity over the metric grid.
fn frame_channel<F>(m: &ChartManifold, spec: &GridSpec, order: usize, f: F) -> Result<Reduction, QuadratureError>
where
    F: Fn(&CurvatureFrame) -> f64 + Sync + Send,
{
    let grid = metric_grid(m, spec)?;
    reduce(
        &grid,
        1,
        || m.evaluator(order),
        |ev: &mut NodeEvaluator, x, out| {
            let (frame, sqrt_det) = ev.frame(x, false)?;
            out[0] = f(&frame);
            Ok(sqrt_det)
        },
    )
}

/// `(∫ |T|^p dv_g)^{1/p}` where `norm` returns the pointwise `|T|` from a
/// curvature frame computed with metric jets of order `order`.
pub fn lp_norm<F>(m: &ChartManifold, spec: &GridSpec, order: usize, p: f64, norm: F) -> Result<f64, QuadratureError>
where
    F: Fn(&CurvatureFrame) -> f64 + Sync + Send,
{
    if !(p >= 1.0) {
        return Err(QuadratureError::BadExponent(p));
    }
    let r = frame_channel(m, spec, order, |f| norm(f).abs().powf(p))?;
    Ok(r.integrals[0].powf(1.0 / p))
}

/// Largest pointwise `|T|` over the grid nodes. This is a lower
/// approximation of the true supremum.
pub fn linf_norm<F>(m: &ChartManifold, spec: &GridSpec, order: usize, norm: F) -> Result<f64, QuadratureError>
where
    F: Fn(&CurvatureFrame) -> f64 + Sync + Send,
{
    let r = frame_channel(m, spec, order, |f| norm(f).abs())?;
    Ok(r.maxima[0])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(7);
        for deg in 0..14 {
            let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg)).sum();
            let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
            assert!((q - exact).abs() < 1e-14, "degree {deg}");
        }
        assert!(x.windows(2).all(|p| p[0] < p[1]));
    }

    #[test]
    fn node_enumeration_last_axis_fastest() {
        let axes = [Axis::periodic(0.0, 4.0), Axis::periodic(0.0, 4.0)];
        let g = Grid::new(&axes, &GridSpec::uniform(2, 4).unwrap()).unwrap();
        let mut p = [0.0; 2];
        g.node(1, &mut p);
        assert_eq!(p, [0.5, 1.5]);
        g.node(4, &mut p);
        assert_eq!(p, [1.5, 0.5]);
    }

    #[test]
    fn collapse_keeps_total_weight() {
        let axes = [Axis::open(0.0, PI), Axis::periodic(0.0, 2.0 * PI)];
        let g = Grid::new(&axes, &GridSpec::uniform(2, 8).unwrap()).unwrap();
        let c = g.collapse(&[true, false]);
        assert_eq!(c.len(), 8);
        assert!((c.rules()[1].weights[0] - 2.0 * PI).abs() < 1e-14);
    }

    #[test]
    fn rejects_small_grids() {
        assert!(matches!(
            GridSpec::new(vec![24, 3]),
            Err(QuadratureError::TooFewNodes { axis: 1, count: 3 })
        ));
    }
}
