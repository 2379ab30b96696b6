//! The pointwise curvature pipeline.
//!
//! Every quantity is computed in jet arithmetic from the metric's Taylor
//! coefficients at a point. With metric jets of order `K`:
//!
//! | quantity                         | jet order |
//! |----------------------------------|-----------|
//! | `g`                              | `K`       |
//! | `g⁻¹`, `Γ`                       | `K − 1`   |
//! | `Rm`, `Ric`, `R`, `E`, `S`, `W`  | `K − 2`   |
//! | `∇S`, `C`, `∇E`, `∇W`, `dR`      | `K − 3`   |
//! | `∇C`, `∇∇E`, `∇∇R`, `∇∇W`        | `K − 4`   |
//!
//! so the full frame (Bach via `∇C`, the Weyl Laplacian) needs `K ≥ 4`.
//!
//! Sign conventions: `Rm_abcd = ⟨R(∂_a, ∂_b)∂_c, ∂_d⟩`, which makes a space
//! form of sectional curvature `λ` satisfy
//! `Rm_abcd = λ (g_ad g_bc − g_ac g_bd)` and `Ric_bc = g^ad Rm_abcd`
//! positive on round spheres. The Kulkarni–Nomizu product is
//! `(A⊙B)_ijkl = A_il B_jk + A_jk B_il − A_ik B_jl − A_jl B_ik`, so
//! `Rm = W + S⊙g`. The divergence is `(δh)_k = −∇^j h_jk` and the Hessian is
//! `(∇²f)_jk = ∇_j ∇_k f`.
//!
//! The quadratic Weyl term of the Weyl equation on Einstein manifolds,
//! `ΔW − 2(n−1)λW − 2Q(W) = 0`, is
//! `Q(W)_ijkl = B_ijkl − B_jikl + B_ikjl − B_jkil` with
//! `B_ijkl = g^pq g^rs W_pijr W_qkls`, taken literally with the Riemann
//! convention above. Parallel Weyl tensors then satisfy the equation:
//! `Q(W) = −3W` on the product of two round 2-spheres with `λ = 1`, and the
//! same sign works on `S³ × S²` (see the tests).

mod fields;

use std::sync::Arc;

use thiserror::Error;

use crate::expr::{EvalError, ProgramScratch};
use crate::jets::{self, JetError, JetLayout};
use crate::tensor::{self, PointTensor, Slot};

pub use fields::{tri_index, MetricField, ScalarField, SymmetricField};

/// Default metric jet order: enough for Bach.
pub const DEFAULT_JET_ORDER: usize = 4;

/// Metric jet order the full frame needs.
pub const FRAME_JET_ORDER: usize = 4;

/// Overall sign applied to the bracket defining `Q(W)`.
pub const WEYL_QUADRATIC_SIGN: f64 = 1.0;

// Pivots below this fraction of the largest diagonal entry count as zero.
// Polar charts legitimately produce pivots near 1e-13 next to the poles.
const PIVOT_FLOOR: f64 = 1e-28;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("metric is singular at {point:?}")]
    Singular { point: Vec<f64> },
    #[error("metric is not positive definite at {point:?}")]
    NotPositiveDefinite { point: Vec<f64> },
    #[error("jet order {available} is too low; this quantity needs {needed}")]
    OrderExhausted { needed: usize, available: usize },
    #[error("dimension {dim} is below the minimum {needed}")]
    DimensionTooSmall { dim: usize, needed: usize },
    #[error("Q-curvature is only defined in dimension 4, not {0}")]
    NotFourDimensional(usize),
    #[error("dimension mismatch: {0} vs {1}")]
    DimMismatch(usize, usize),
    #[error("expected {want} lower-triangle components, got {got}")]
    ComponentCount { got: usize, want: usize },
    #[error("evaluation failed at {point:?}: {source}")]
    Eval {
        point: Vec<f64>,
        #[source]
        source: EvalError,
    },
    #[error(transparent)]
    Jet(#[from] JetError),
}

/// A dense tensor whose components are jets of one common order.
#[derive(Debug, Clone)]
pub struct JetTensor {
    dim: usize,
    rank: usize,
    order: usize,
    stride: usize,
    data: Vec<f64>,
}

impl JetTensor {
    pub fn zeros(layout: &JetLayout, rank: usize, order: usize) -> Self {
        let dim = layout.dim();
        let stride = layout.len(order);
        JetTensor {
            dim,
            rank,
            order,
            stride,
            data: vec![0.0; stride * dim.pow(rank as u32)],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Number of components, `dim^rank`.
    pub fn count(&self) -> usize {
        self.dim.pow(self.rank as u32)
    }

    /// Taylor coefficients of flat component `c`.
    pub fn comp(&self, c: usize) -> &[f64] {
        &self.data[c * self.stride..(c + 1) * self.stride]
    }

    pub fn comp_mut(&mut self, c: usize) -> &mut [f64] {
        &mut self.data[c * self.stride..(c + 1) * self.stride]
    }

    /// Value (order-0 coefficient) of flat component `c`.
    pub fn value(&self, c: usize) -> f64 {
        self.data[c * self.stride]
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.count()).map(|c| self.value(c)).collect()
    }

    /// Keeps the coefficients up to `order`.
    pub fn truncated(&self, layout: &JetLayout, order: usize) -> JetTensor {
        let order = order.min(self.order);
        let mut out = JetTensor::zeros(layout, self.rank, order);
        for c in 0..self.count() {
            let s = out.stride;
            out.comp_mut(c).copy_from_slice(&self.comp(c)[..s]);
        }
        out
    }

    /// Fully covariant values at the point.
    pub fn to_point(&self) -> PointTensor {
        PointTensor::covariant(self.dim, self.rank, self.values()).expect("rank within bounds")
    }
}

/// Metric, inverse and connection jets at one point.
#[derive(Debug, Clone)]
pub struct LocalGeometry {
    layout: Arc<JetLayout>,
    point: Vec<f64>,
    order: usize,
    g: JetTensor,
    g_inv: JetTensor,
    gamma_low: JetTensor,
    gamma: JetTensor,
    sqrt_det: f64,
}

impl LocalGeometry {
    /// Evaluates `metric` at `point` with jets of the given order.
    pub fn new(metric: &MetricField, point: &[f64], order: usize) -> Result<Self, GeometryError> {
        let layout = JetLayout::shared(metric.dim(), order)?;
        let mut scratch = metric.scratch(&layout, order);
        Self::with_scratch(metric, point, &layout, &mut scratch)
    }

    /// As [`LocalGeometry::new`], reusing a layout and program scratch whose
    /// order fixes the jet order.
    pub fn with_scratch(
        metric: &MetricField,
        point: &[f64],
        layout: &Arc<JetLayout>,
        scratch: &mut ProgramScratch,
    ) -> Result<Self, GeometryError> {
        let order = layout.order();
        let g = metric.as_field().eval_jets(layout, point, order, scratch)?;
        Self::from_metric_jets(layout.clone(), point, g)
    }

    /// Builds the connection from metric jets of order ≥ 1.
    pub fn from_metric_jets(layout: Arc<JetLayout>, point: &[f64], g: JetTensor) -> Result<Self, GeometryError> {
        let order = g.order;
        if order < 1 {
            return Err(GeometryError::OrderExhausted {
                needed: 1,
                available: order,
            });
        }
        let l = &*layout;
        let n = l.dim();
        let (g_inv, sqrt_det) = invert(l, &g, point)?;
        let m = order - 1;

        // dg[a][i][j] = ∂_a g_ij
        let mut dg = JetTensor::zeros(l, 3, m);
        for a in 0..n {
            for ij in 0..n * n {
                jets::derivative(l, order, a, g.comp(ij), dg.comp_mut(a * n * n + ij));
            }
        }
        let mut gamma_low = JetTensor::zeros(l, 3, m);
        for lo in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let dst = gamma_low.comp_mut((lo * n + i) * n + j);
                    let a = dg.comp((i * n + j) * n + lo);
                    let b = dg.comp((j * n + i) * n + lo);
                    let c = dg.comp((lo * n + i) * n + j);
                    for t in 0..dst.len() {
                        dst[t] = 0.5 * (a[t] + b[t] - c[t]);
                    }
                }
            }
        }
        let mut gamma = JetTensor::zeros(l, 3, m);
        for k in 0..n {
            for i in 0..n {
                for j in 0..=i {
                    let c = (k * n + i) * n + j;
                    for lo in 0..n {
                        jets::mul_add(
                            l,
                            m,
                            g_inv.comp(k * n + lo),
                            gamma_low.comp((lo * n + i) * n + j),
                            gamma.comp_mut(c),
                            1.0,
                        );
                    }
                    if i != j {
                        let s = gamma.stride;
                        let src: Vec<f64> = gamma.comp(c).to_vec();
                        gamma.comp_mut((k * n + j) * n + i)[..s].copy_from_slice(&src);
                    }
                }
            }
        }
        Ok(LocalGeometry {
            layout,
            point: point.to_vec(),
            order,
            g,
            g_inv,
            gamma_low,
            gamma,
            sqrt_det,
        })
    }

    pub fn layout(&self) -> &Arc<JetLayout> {
        &self.layout
    }

    pub fn point(&self) -> &[f64] {
        &self.point
    }

    pub fn dim(&self) -> usize {
        self.layout.dim()
    }

    /// Metric jet order.
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn metric(&self) -> &JetTensor {
        &self.g
    }

    pub fn inverse(&self) -> &JetTensor {
        &self.g_inv
    }

    /// `Γ^k_ij` stored as `[k][i][j]`.
    pub fn christoffel(&self) -> &JetTensor {
        &self.gamma
    }

    /// `Γ_{l,ij} = g_lk Γ^k_ij` stored as `[l][i][j]`.
    pub fn christoffel_lower(&self) -> &JetTensor {
        &self.gamma_low
    }

    pub fn sqrt_det(&self) -> f64 {
        self.sqrt_det
    }

    pub fn g_point(&self) -> PointTensor {
        self.g.to_point()
    }

    pub fn g_inv_point(&self) -> PointTensor {
        PointTensor::from_components(self.dim(), vec![Slot::Contravariant; 2], self.g_inv.values())
            .expect("rank 2")
    }

    fn require(&self, needed: usize) -> Result<(), GeometryError> {
        if self.order < needed {
            return Err(GeometryError::OrderExhausted {
                needed,
                available: self.order,
            });
        }
        Ok(())
    }

    // dst = ∇_i T_c at order `mo < t.order`; `c` is a flat index over T's slots.
    fn nabla_component(&self, t: &JetTensor, i: usize, c: usize, mo: usize, dst: &mut [f64]) {
        let l = &*self.layout;
        let n = t.dim;
        jets::derivative(l, mo + 1, i, t.comp(c), dst);
        let mut stride = 1;
        for _ in 0..t.rank {
            let js = (c / stride) % n;
            let base = c - js * stride;
            for p in 0..n {
                let gamma = self.gamma.comp((p * n + i) * n + js);
                let tp = t.comp(base + p * stride);
                if mo == 0 {
                    dst[0] -= tp[0] * gamma[0];
                } else {
                    jets::mul_add(l, mo, tp, gamma, dst, -1.0);
                }
            }
            stride *= n;
        }
    }

    /// `∇T` of a fully covariant tensor, derivative slot first. Consumes one
    /// jet order.
    pub fn nabla(&self, t: &JetTensor) -> Result<JetTensor, GeometryError> {
        if t.order < 1 || t.order > self.order {
            return Err(GeometryError::OrderExhausted {
                needed: t.order.max(1),
                available: self.order,
            });
        }
        Ok(self.nabla_to(t, t.order - 1, false))
    }

    // ∇T at order `mo`. With `symmetric_tail` T is symmetric in its last two
    // slots and only half the components are differentiated.
    fn nabla_to(&self, t: &JetTensor, mo: usize, symmetric_tail: bool) -> JetTensor {
        let n = t.dim;
        let mut out = JetTensor::zeros(&self.layout, t.rank + 1, mo);
        let count = t.count();
        let mut buf = vec![0.0; out.stride];
        for i in 0..n {
            for c in 0..count {
                let (j, k) = ((c / n) % n, c % n);
                if symmetric_tail && j > k {
                    continue;
                }
                self.nabla_component(t, i, c, mo, &mut buf);
                out.comp_mut(i * count + c).copy_from_slice(&buf);
                if symmetric_tail && j != k {
                    out.comp_mut(i * count + c - j * n - k + k * n + j).copy_from_slice(&buf);
                }
            }
        }
        out
    }

    /// `∇T` for a rank-4 tensor with the antisymmetries of a curvature
    /// tensor in its first and last pairs; only independent pairs are
    /// differentiated.
    pub fn nabla_curvature(&self, t: &JetTensor) -> Result<JetTensor, GeometryError> {
        if t.order < 1 {
            return Err(GeometryError::OrderExhausted {
                needed: 1,
                available: t.order,
            });
        }
        Ok(self.nabla_curvature_to(t, t.order - 1))
    }

    fn nabla_curvature_to(&self, t: &JetTensor, mo: usize) -> JetTensor {
        assert_eq!(t.rank, 4, "curvature tensors have rank 4");
        let n = t.dim;
        let mut out = JetTensor::zeros(&self.layout, 5, mo);
        let s = out.stride;
        let mut buf = vec![0.0; s];
        let n4 = n.pow(4);
        for i in 0..n {
            for (a, b, c, d) in pair_reps(n) {
                let idx = ((a * n + b) * n + c) * n + d;
                self.nabla_component(t, i, idx, mo, &mut buf);
                for (sign, (p, q, r, u)) in pair_images(a, b, c, d) {
                    let dst = out.comp_mut(i * n4 + ((p * n + q) * n + r) * n + u);
                    for (x, y) in dst.iter_mut().zip(&buf) {
                        *x = sign * y;
                    }
                }
            }
        }
        out
    }

    /// Riemann tensor at order `K − 2`.
    pub fn riemann(&self) -> Result<JetTensor, GeometryError> {
        self.require(2)?;
        let l = &*self.layout;
        let n = l.dim();
        let m = self.order - 1;
        let mo = m - 1;
        let mut rm = JetTensor::zeros(l, 4, mo);
        let s = rm.stride;
        let mut buf = vec![0.0; s];
        let mut tmp = vec![0.0; s];
        let gl = |f: usize, i: usize, j: usize| self.gamma_low.comp((f * n + i) * n + j);
        let gu = |f: usize, i: usize, j: usize| self.gamma.comp((f * n + i) * n + j);
        for (a, b, c, d) in pair_reps(n) {
            jets::derivative(l, m, a, gl(d, b, c), &mut buf);
            jets::derivative(l, m, b, gl(d, a, c), &mut tmp);
            for (x, y) in buf.iter_mut().zip(&tmp) {
                *x -= y;
            }
            for f in 0..n {
                jets::mul_add(l, mo, gl(f, a, d), gu(f, b, c), &mut buf, -1.0);
                jets::mul_add(l, mo, gl(f, b, d), gu(f, a, c), &mut buf, 1.0);
            }
            for (sign, (p, q, r, u)) in pair_images(a, b, c, d) {
                let dst = rm.comp_mut(((p * n + q) * n + r) * n + u);
                for (x, y) in dst.iter_mut().zip(&buf) {
                    *x = sign * y;
                }
            }
        }
        Ok(rm)
    }

    /// Riemann, Ricci, scalar curvature and the Ricci decomposition at
    /// order `K − 2`.
    pub fn curvature(&self) -> Result<CurvatureJets, GeometryError> {
        let n = self.dim();
        if n < 3 {
            return Err(GeometryError::DimensionTooSmall { dim: n, needed: 3 });
        }
        let rm = self.riemann()?;
        let l = &*self.layout;
        let m = rm.order;
        let mut ric = JetTensor::zeros(l, 2, m);
        for b in 0..n {
            for c in 0..=b {
                let mut acc = vec![0.0; ric.stride];
                for a in 0..n {
                    for d in 0..n {
                        if a == b || c == d {
                            continue;
                        }
                        jets::mul_add(
                            l,
                            m,
                            rm.comp(((a * n + b) * n + c) * n + d),
                            self.g_inv.comp(a * n + d),
                            &mut acc,
                            1.0,
                        );
                    }
                }
                ric.comp_mut(b * n + c).copy_from_slice(&acc);
                ric.comp_mut(c * n + b).copy_from_slice(&acc);
            }
        }
        let mut scalar = JetTensor::zeros(l, 0, m);
        for b in 0..n {
            for c in 0..n {
                jets::mul_add(l, m, ric.comp(b * n + c), self.g_inv.comp(b * n + c), scalar.comp_mut(0), 1.0);
            }
        }
        let nf = n as f64;
        let mut e = ric.clone();
        let mut s = JetTensor::zeros(l, 2, m);
        for c in 0..n * n {
            let r = scalar.comp(0);
            jets::mul_add(l, m, r, self.g.comp(c), e.comp_mut(c), -1.0 / nf);
            let dst = s.comp_mut(c);
            dst.copy_from_slice(ric.comp(c));
            jets::mul_add(l, m, r, self.g.comp(c), dst, -1.0 / (2.0 * (nf - 1.0)));
            for x in dst.iter_mut() {
                *x /= nf - 2.0;
            }
        }
        // W = Rm − S⊙g
        let mut w = JetTensor::zeros(l, 4, m);
        let mut buf = vec![0.0; w.stride];
        for (a, b, c, d) in pair_reps(n) {
            buf.copy_from_slice(rm.comp(((a * n + b) * n + c) * n + d));
            let sc = |i: usize, j: usize| s.comp(i * n + j);
            let gc = |i: usize, j: usize| self.g.comp(i * n + j);
            jets::mul_add(l, m, sc(a, d), gc(b, c), &mut buf, -1.0);
            jets::mul_add(l, m, sc(b, c), gc(a, d), &mut buf, -1.0);
            jets::mul_add(l, m, sc(a, c), gc(b, d), &mut buf, 1.0);
            jets::mul_add(l, m, sc(b, d), gc(a, c), &mut buf, 1.0);
            for (sign, (p, q, r, u)) in pair_images(a, b, c, d) {
                let dst = w.comp_mut(((p * n + q) * n + r) * n + u);
                for (x, y) in dst.iter_mut().zip(&buf) {
                    *x = sign * y;
                }
            }
        }
        Ok(CurvatureJets {
            riemann: rm,
            ricci: ric,
            scalar,
            traceless_ricci: e,
            schouten: s,
            weyl: w,
        })
    }

    /// All curvature quantities at the point. `weyl_laplacian` adds `ΔW`.
    pub fn frame(&self, weyl_laplacian: bool) -> Result<CurvatureFrame, GeometryError> {
        self.require(FRAME_JET_ORDER)?;
        let curv = self.curvature()?;
        let l = &*self.layout;
        let n = self.dim();
        let nf = n as f64;
        let g = self.g.values();
        let gi = self.g_inv.values();

        let nabla_s = self.nabla_to(&curv.schouten, curv.schouten.order - 1, true);
        let n3 = n * n * n;
        let mut cotton = JetTensor::zeros(l, 3, nabla_s.order);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let dst = cotton.comp_mut((i * n + j) * n + k);
                    let a = nabla_s.comp((i * n + j) * n + k);
                    let b = nabla_s.comp((j * n + i) * n + k);
                    for t in 0..dst.len() {
                        dst[t] = a[t] - b[t];
                    }
                }
            }
        }
        let nabla_e = self.nabla_to(&curv.traceless_ricci, curv.traceless_ricci.order - 1, true);
        let mut grad_r = JetTensor::zeros(l, 1, curv.scalar.order - 1);
        for a in 0..n {
            jets::derivative(l, curv.scalar.order, a, curv.scalar.comp(0), grad_r.comp_mut(a));
        }
        let hess_r = self.nabla_to(&grad_r, 0, false);
        let nabla_w = self.nabla_curvature_to(&curv.weyl, if weyl_laplacian { 1 } else { 0 });

        let rm = curv.riemann.values();
        let ric = curv.ricci.values();
        let r = curv.scalar.value(0);
        let e = curv.traceless_ricci.values();
        let s = curv.schouten.values();
        let w = curv.weyl.values();
        let c = cotton.values();
        let ne = nabla_e.values();
        let dr = grad_r.values();
        let hr = hess_r.values();
        let nw = nabla_w.values();

        // div C_jk = g^il ∇_l C_ijk
        let nonzero: Vec<(usize, usize, f64)> = (0..n * n)
            .filter(|&il| gi[il] != 0.0)
            .map(|il| (il / n, il % n, gi[il]))
            .collect();
        let mut div_c = vec![0.0; n * n];
        let mut one = [0.0];
        for jk in 0..n * n {
            let mut acc = 0.0;
            for &(i, lo, gil) in &nonzero {
                self.nabla_component(&cotton, lo, i * n * n + jk, 0, &mut one);
                acc += gil * one[0];
            }
            div_c[jk] = acc;
        }
        let s_up = raise2(n, &s, &gi);
        let e_up = raise2(n, &e, &gi);
        let ws = contract_weyl(n, &w, &s_up);
        let we = contract_weyl(n, &w, &e_up);
        let bach: Vec<f64> = div_c.iter().zip(&ws).map(|(a, b)| a + b).collect();

        // ΔE and ΔR
        let n2 = n * n;
        let mut lap_e = vec![0.0; n2];
        for j in 0..n {
            for k in 0..=j {
                let mut acc = 0.0;
                for &(i, m, gim) in &nonzero {
                    self.nabla_component(&nabla_e, i, m * n2 + j * n + k, 0, &mut one);
                    acc += gim * one[0];
                }
                lap_e[j * n + k] = acc;
                lap_e[k * n + j] = acc;
            }
        }
        let lap_r: f64 = (0..n2).map(|ij| gi[ij] * hr[ij]).sum();
        let e_sq = tensor::sym2_dot(n, &e, &e, &gi);
        let e_times_e = tensor::sym2_times(n, &e, &e, &gi);
        let mut bach_alt = vec![0.0; n2];
        for jk in 0..n2 {
            bach_alt[jk] = lap_e[jk] / (nf - 2.0) - (hr[jk] - g[jk] * lap_r / nf) / (2.0 * (nf - 1.0))
                + 2.0 / (nf - 2.0) * we[jk]
                - nf / ((nf - 2.0) * (nf - 2.0)) * (e_times_e[jk] - e_sq * g[jk] / nf)
                - r / ((nf - 1.0) * (nf - 2.0)) * e[jk];
        }

        // ∇^l W_ijkl = g^lm ∇_m W_ijkl
        let n4 = n2 * n2;
        let mut div_w = vec![0.0; n3];
        for ijk in 0..n3 {
            let mut acc = 0.0;
            for lo in 0..n {
                for m in 0..n {
                    acc += gi[lo * n + m] * nw[m * n4 + ijk * n + lo];
                }
            }
            div_w[ijk] = acc;
        }
        let mut delta_e = vec![0.0; n];
        for k in 0..n {
            let mut acc = 0.0;
            for i in 0..n {
                for j in 0..n {
                    acc += gi[i * n + j] * ne[(i * n + j) * n + k];
                }
            }
            delta_e[k] = -acc;
        }

        let weyl_lap = if weyl_laplacian {
            Some(self.weyl_laplacian(&nabla_w, &gi)?)
        } else {
            None
        };
        let wq = weyl_quadratic_components(n, &w, &gi);
        let q = (n == 4).then(|| -lap_r / 6.0 - 0.5 * e_sq + r * r / 24.0);

        let cov = |rank: usize, v: Vec<f64>| PointTensor::covariant(n, rank, v).expect("rank within bounds");
        Ok(CurvatureFrame {
            point: self.point.clone(),
            sqrt_det: self.sqrt_det,
            g: cov(2, g),
            g_inv: self.g_inv_point(),
            christoffel: PointTensor::from_components(
                n,
                vec![Slot::Contravariant, Slot::Covariant, Slot::Covariant],
                self.gamma.values(),
            )
            .expect("rank 3"),
            riemann: cov(4, rm),
            ricci: cov(2, ric),
            scalar: r,
            lambda: r / (nf * (nf - 1.0)),
            traceless_ricci: cov(2, e),
            schouten: cov(2, s),
            cotton: cov(3, c),
            weyl: cov(4, w),
            bach: cov(2, bach),
            bach_alt: cov(2, bach_alt),
            q_curvature: q,
            weyl_quadratic: cov(4, wq),
            weyl_divergence: cov(3, div_w),
            nabla_weyl: cov(5, nw),
            nabla_traceless_ricci: cov(3, ne),
            delta_traceless_ricci: cov(1, delta_e),
            grad_scalar: cov(1, dr),
            hessian_scalar: cov(2, hr),
            laplacian_scalar: lap_r,
            weyl_laplacian: weyl_lap.map(|v| cov(4, v)),
        })
    }

    // ΔW_abcd = g^im ∇_i ∇_m W_abcd from ∇W (derivative slot first).
    fn weyl_laplacian(&self, nabla_w: &JetTensor, gi: &[f64]) -> Result<Vec<f64>, GeometryError> {
        let l = &*self.layout;
        let n = self.dim();
        let u = nabla_w.truncated(l, 1);
        if u.order < 1 {
            return Err(GeometryError::OrderExhausted {
                needed: FRAME_JET_ORDER,
                available: self.order,
            });
        }
        let n4 = n.pow(4);
        let mut out = vec![0.0; n4];
        let mut buf = vec![0.0; 1];
        for (a, b, c, d) in pair_reps(n) {
            let abcd = ((a * n + b) * n + c) * n + d;
            let mut acc = 0.0;
            for i in 0..n {
                for m in 0..n {
                    let gim = gi[i * n + m];
                    if gim == 0.0 {
                        continue;
                    }
                    self.nabla_component(&u, i, m * n4 + abcd, 0, &mut buf);
                    acc += gim * buf[0];
                }
            }
            for (sign, (p, q, r, s)) in pair_images(a, b, c, d) {
                out[((p * n + q) * n + r) * n + s] = sign * acc;
            }
        }
        Ok(out)
    }
}

/// Curvature jets at order `K − 2`.
#[derive(Debug, Clone)]
pub struct CurvatureJets {
    pub riemann: JetTensor,
    pub ricci: JetTensor,
    pub scalar: JetTensor,
    pub traceless_ricci: JetTensor,
    pub schouten: JetTensor,
    pub weyl: JetTensor,
}

/// Every pointwise curvature quantity, fully covariant unless noted.
#[derive(Debug, Clone)]
pub struct CurvatureFrame {
    pub point: Vec<f64>,
    pub sqrt_det: f64,
    pub g: PointTensor,
    pub g_inv: PointTensor,
    /// `Γ^k_ij` as `[k][i][j]`.
    pub christoffel: PointTensor,
    pub riemann: PointTensor,
    pub ricci: PointTensor,
    pub scalar: f64,
    /// `R / (n(n−1))`.
    pub lambda: f64,
    pub traceless_ricci: PointTensor,
    pub schouten: PointTensor,
    pub cotton: PointTensor,
    pub weyl: PointTensor,
    /// `∇^i C_ijk + W_ijkl S^il`.
    pub bach: PointTensor,
    /// Bach tensor from the traceless-Ricci formula.
    pub bach_alt: PointTensor,
    /// Only in dimension 4.
    pub q_curvature: Option<f64>,
    pub weyl_quadratic: PointTensor,
    /// `∇^l W_ijkl`.
    pub weyl_divergence: PointTensor,
    /// `∇_m W_ijkl` as `[m][i][j][k][l]`.
    pub nabla_weyl: PointTensor,
    /// `∇_i E_jk` as `[i][j][k]`.
    pub nabla_traceless_ricci: PointTensor,
    /// `δE`.
    pub delta_traceless_ricci: PointTensor,
    pub grad_scalar: PointTensor,
    pub hessian_scalar: PointTensor,
    pub laplacian_scalar: f64,
    pub weyl_laplacian: Option<PointTensor>,
}

impl CurvatureFrame {
    pub fn dim(&self) -> usize {
        self.g.dim()
    }

    /// Squared pointwise norm of any covariant frame tensor.
    pub fn norm_sq(&self, t: &PointTensor) -> f64 {
        tensor::norm_sq(t, &self.g, &self.g_inv).expect("frame tensors share the chart dimension")
    }

    pub fn norm(&self, t: &PointTensor) -> f64 {
        self.norm_sq(t).sqrt()
    }

    /// `W(a, b) = W_jikl a^jl b^ik`.
    pub fn weyl_pairing(&self, a: &PointTensor, b: &PointTensor) -> f64 {
        weyl_pairing(self.dim(), self.weyl.components(), a.components(), b.components(), self.g_inv.components())
    }

    /// `tr E³`.
    pub fn cube_trace_e(&self) -> f64 {
        let n = self.dim();
        let e = self.traceless_ricci.components();
        let gi = self.g_inv.components();
        tensor::sym2_dot(n, &tensor::sym2_times(n, e, e, gi), e, gi)
    }

    /// Pointwise Kato pair `(|∇|E||, |∇E|)`; `None` where `|E|` vanishes.
    pub fn kato(&self, floor: f64) -> Option<(f64, f64)> {
        let n = self.dim();
        let e_norm = self.norm(&self.traceless_ricci);
        if e_norm <= floor {
            return None;
        }
        let gi = self.g_inv.components();
        let e_up = raise2(n, self.traceless_ricci.components(), gi);
        let ne = self.nabla_traceless_ricci.components();
        let grad: Vec<f64> = (0..n)
            .map(|i| (0..n * n).map(|jk| e_up[jk] * ne[i * n * n + jk]).sum::<f64>() / e_norm)
            .collect();
        let mut grad_sq = 0.0;
        for i in 0..n {
            for j in 0..n {
                grad_sq += gi[i * n + j] * grad[i] * grad[j];
            }
        }
        Some((grad_sq.max(0.0).sqrt(), self.norm(&self.nabla_traceless_ricci)))
    }

    /// Weyl-equation residual `ΔW − 2(n−1)λW − 2Q(W)`, when `ΔW` was computed.
    pub fn weyl_equation_residual(&self) -> Option<PointTensor> {
        let lap = self.weyl_laplacian.as_ref()?;
        let nf = self.dim() as f64;
        let data = lap
            .components()
            .iter()
            .zip(self.weyl.components())
            .zip(self.weyl_quadratic.components())
            .map(|((d, w), q)| d - 2.0 * (nf - 1.0) * self.lambda * w - 2.0 * q)
            .collect();
        Some(PointTensor::covariant(self.dim(), 4, data).expect("rank 4"))
    }
}

// Index quadruples (a<b, c<d, (a,b) ≤ (c,d)) representing every component of
// a tensor with the symmetries of a curvature tensor.
fn pair_reps(n: usize) -> impl Iterator<Item = (usize, usize, usize, usize)> {
    (0..n).flat_map(move |a| {
        (a + 1..n).flat_map(move |b| {
            (a..n).flat_map(move |c| {
                let d0 = if c == a { b } else { c + 1 };
                (d0..n).map(move |d| (a, b, c, d))
            })
        })
    })
}

fn pair_images(a: usize, b: usize, c: usize, d: usize) -> [(f64, (usize, usize, usize, usize)); 8] {
    [
        (1.0, (a, b, c, d)),
        (-1.0, (b, a, c, d)),
        (-1.0, (a, b, d, c)),
        (1.0, (b, a, d, c)),
        (1.0, (c, d, a, b)),
        (-1.0, (d, c, a, b)),
        (-1.0, (c, d, b, a)),
        (1.0, (d, c, b, a)),
    ]
}

fn raise2(n: usize, a: &[f64], gi: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let mut acc = 0.0;
            for k in 0..n {
                for l in 0..n {
                    acc += gi[i * n + k] * gi[j * n + l] * a[k * n + l];
                }
            }
            out[i * n + j] = acc;
        }
    }
    out
}

// (W·A)_jk = W_ijkl A^il with A already raised.
fn contract_weyl(n: usize, w: &[f64], a_up: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; n * n];
    for j in 0..n {
        for k in 0..n {
            let mut acc = 0.0;
            for i in 0..n {
                for l in 0..n {
                    acc += w[((i * n + j) * n + k) * n + l] * a_up[i * n + l];
                }
            }
            out[j * n + k] = acc;
        }
    }
    out
}

pub(crate) fn weyl_pairing(n: usize, w: &[f64], a: &[f64], b: &[f64], gi: &[f64]) -> f64 {
    let a_up = raise2(n, a, gi);
    let b_up = raise2(n, b, gi);
    let mut acc = 0.0;
    for j in 0..n {
        for i in 0..n {
            for k in 0..n {
                for l in 0..n {
                    acc += w[((j * n + i) * n + k) * n + l] * a_up[j * n + l] * b_up[i * n + k];
                }
            }
        }
    }
    acc
}

/// `Q(W)` from covariant Weyl components; see the module docs for the sign.
pub fn weyl_quadratic_components(n: usize, w: &[f64], gi: &[f64]) -> Vec<f64> {
    let n2 = n * n;
    let n3 = n2 * n;
    // u[q][i][j][s] = g^pq g^rs W_pijr
    let mut u = tensor::transform_slot(w, n, 4, 0, gi);
    u = tensor::transform_slot(&u, n, 4, 3, gi);
    // bq[i][j][k][l] = Σ_{q,s} u[q][i][j][s] W[q][k][l][s]
    let mut bq = vec![0.0; n2 * n2];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let mut acc = 0.0;
                    for q in 0..n {
                        for s in 0..n {
                            acc += u[q * n3 + (i * n + j) * n + s] * w[q * n3 + (k * n + l) * n + s];
                        }
                    }
                    bq[((i * n + j) * n + k) * n + l] = acc;
                }
            }
        }
    }
    let at = |i: usize, j: usize, k: usize, l: usize| bq[((i * n + j) * n + k) * n + l];
    let mut out = vec![0.0; n2 * n2];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    out[((i * n + j) * n + k) * n + l] =
                        WEYL_QUADRATIC_SIGN * (at(i, j, k, l) - at(j, i, k, l) + at(i, k, j, l) - at(j, k, i, l));
                }
            }
        }
    }
    out
}

// Inverse metric jets (order K − 1) and √det g from metric jets of order K.
/// Metric, inverse and `√det g` at a single point, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PointMetric {
    pub g: Vec<f64>,
    pub g_inv: Vec<f64>,
    pub sqrt_det: f64,
}

/// Evaluates `metric` at `point` without derivatives. `scratch` may come
/// from any layout of order 0.
pub fn point_metric(
    metric: &MetricField,
    point: &[f64],
    layout: &JetLayout,
    scratch: &mut ProgramScratch,
) -> Result<PointMetric, GeometryError> {
    let g = metric.as_field().eval_jets(layout, point, 0, scratch)?;
    let (g_inv, sqrt_det) = invert(layout, &g, point)?;
    Ok(PointMetric {
        g: g.values(),
        g_inv: g_inv.values(),
        sqrt_det,
    })
}

fn invert(l: &JetLayout, g: &JetTensor, point: &[f64]) -> Result<(JetTensor, f64), GeometryError> {
    let n = l.dim();
    let nn = n * n;
    let mut a = g.values();
    let mut inv0 = vec![0.0; nn];
    for i in 0..n {
        inv0[i * n + i] = 1.0;
    }
    let max_diag = (0..n).fold(0.0f64, |m, i| m.max(a[i * n + i].abs()));
    let mut det = 1.0;
    for k in 0..n {
        let p = a[k * n + k];
        if !p.is_finite() || p.abs() <= PIVOT_FLOOR * max_diag {
            return Err(GeometryError::Singular { point: point.to_vec() });
        }
        if p < 0.0 {
            return Err(GeometryError::NotPositiveDefinite { point: point.to_vec() });
        }
        det *= p;
        for j in 0..n {
            a[k * n + j] /= p;
            inv0[k * n + j] /= p;
        }
        for r in 0..n {
            if r == k {
                continue;
            }
            let f = a[r * n + k];
            if f == 0.0 {
                continue;
            }
            for j in 0..n {
                a[r * n + j] -= f * a[k * n + j];
                inv0[r * n + j] -= f * inv0[k * n + j];
            }
        }
    }
    symmetrize(n, &mut inv0);

    // Order-0 input yields the plain inverse.
    let mo = g.order.saturating_sub(1);
    let nc = l.len(mo);
    // y[k] is the matrix of order-k coefficients of g⁻¹.
    let mut y = vec![0.0; nc * nn];
    y[..nn].copy_from_slice(&inv0);
    let mut acc = vec![0.0; nn];
    for k in 1..nc {
        acc.fill(0.0);
        for &(i, j) in l.cols(k) {
            if i == 0 {
                continue;
            }
            let (i, j) = (i as usize, j as usize);
            for r in 0..n {
                for c in 0..n {
                    let grc = g.comp(r * n + c)[i];
                    if grc == 0.0 {
                        continue;
                    }
                    for b in 0..n {
                        acc[r * n + b] += grc * y[j * nn + c * n + b];
                    }
                }
            }
        }
        let yk = &mut y[k * nn..(k + 1) * nn];
        for r in 0..n {
            for b in 0..n {
                let mut s = 0.0;
                for c in 0..n {
                    s += inv0[r * n + c] * acc[c * n + b];
                }
                yk[r * n + b] = -s;
            }
        }
        symmetrize(n, yk);
    }
    let mut out = JetTensor::zeros(l, 2, mo);
    for rb in 0..nn {
        let dst = out.comp_mut(rb);
        for k in 0..nc {
            dst[k] = y[k * nn + rb];
        }
    }
    Ok((out, det.sqrt()))
}

fn symmetrize(n: usize, m: &mut [f64]) {
    for i in 0..n {
        for j in 0..i {
            let v = 0.5 * (m[i * n + j] + m[j * n + i]);
            m[i * n + j] = v;
            m[j * n + i] = v;
        }
    }
}

// ---------------------------------------------------------------------------
// Point-level entry points.

/// A field whose covariant derivatives can be taken.
#[derive(Debug, Clone, Copy)]
pub enum FieldRef<'a> {
    Scalar(&'a ScalarField),
    Symmetric(&'a SymmetricField),
}

impl FieldRef<'_> {
    fn dim(&self) -> usize {
        match self {
            FieldRef::Scalar(f) => f.dim(),
            FieldRef::Symmetric(f) => f.dim(),
        }
    }

    fn jets(&self, layout: &Arc<JetLayout>, point: &[f64]) -> Result<JetTensor, GeometryError> {
        let order = layout.order();
        match self {
            FieldRef::Scalar(f) => {
                let mut s = f.scratch(layout, order);
                f.eval_jets(layout, point, order, &mut s)
            }
            FieldRef::Symmetric(f) => {
                let mut s = f.scratch(layout, order);
                f.eval_jets(layout, point, order, &mut s)
            }
        }
    }
}

fn check_dim(metric: &MetricField, dim: usize) -> Result<(), GeometryError> {
    if metric.dim() != dim {
        return Err(GeometryError::DimMismatch(dim, metric.dim()));
    }
    Ok(())
}

/// `Γ^k_ij` at `p`, stored `[k][i][j]`.
pub fn christoffel(metric: &MetricField, p: &[f64]) -> Result<PointTensor, GeometryError> {
    let geo = LocalGeometry::new(metric, p, 1)?;
    Ok(PointTensor::from_components(
        metric.dim(),
        vec![Slot::Contravariant, Slot::Covariant, Slot::Covariant],
        geo.gamma.values(),
    )
    .expect("rank 3"))
}

/// `Rm_abcd` at `p`.
pub fn riemann(metric: &MetricField, p: &[f64]) -> Result<PointTensor, GeometryError> {
    let geo = LocalGeometry::new(metric, p, 2)?;
    Ok(geo.riemann()?.to_point())
}

/// The full frame with metric jets of order `order` (at least 4).
pub fn curvature_frame(metric: &MetricField, p: &[f64], order: usize) -> Result<CurvatureFrame, GeometryError> {
    if order < FRAME_JET_ORDER {
        return Err(GeometryError::OrderExhausted {
            needed: FRAME_JET_ORDER,
            available: order,
        });
    }
    LocalGeometry::new(metric, p, order)?.frame(false)
}

/// `∇T` for a scalar or symmetric field, derivative slot first.
pub fn covariant_derivative(metric: &MetricField, field: FieldRef<'_>, p: &[f64]) -> Result<PointTensor, GeometryError> {
    check_dim(metric, field.dim())?;
    let geo = LocalGeometry::new(metric, p, 1)?;
    let t = field.jets(&geo.layout, p)?;
    Ok(geo.nabla(&t.truncated(&geo.layout, 1))?.to_point())
}

/// `(δh)_k = −g^ij ∇_i h_jk`.
pub fn divergence_delta(metric: &MetricField, h: &SymmetricField, p: &[f64]) -> Result<PointTensor, GeometryError> {
    let nh = covariant_derivative(metric, FieldRef::Symmetric(h), p)?;
    let n = metric.dim();
    let gi = inverse_values(metric, p)?;
    Ok(PointTensor::covariant(n, 1, delta_of(n, nh.components(), &gi)).expect("rank 1"))
}

fn delta_of(n: usize, nh: &[f64], gi: &[f64]) -> Vec<f64> {
    (0..n)
        .map(|k| {
            let mut acc = 0.0;
            for i in 0..n {
                for j in 0..n {
                    acc += gi[i * n + j] * nh[(i * n + j) * n + k];
                }
            }
            -acc
        })
        .collect()
}

fn inverse_values(metric: &MetricField, p: &[f64]) -> Result<Vec<f64>, GeometryError> {
    let l = JetLayout::shared(metric.dim(), 1)?;
    let mut s = metric.scratch(&l, 1);
    let g = metric.as_field().eval_jets(&l, p, 1, &mut s)?;
    Ok(invert(&l, &g, p)?.0.values())
}

/// `ΔT = g^ij ∇_i ∇_j T` for a scalar or symmetric field.
pub fn rough_laplacian(metric: &MetricField, field: FieldRef<'_>, p: &[f64]) -> Result<PointTensor, GeometryError> {
    check_dim(metric, field.dim())?;
    let geo = LocalGeometry::new(metric, p, 2)?;
    let t = field.jets(&geo.layout, p)?;
    let nn = geo.nabla(&geo.nabla(&t)?)?;
    let n = metric.dim();
    let gi = geo.g_inv.values();
    let rest = t.count();
    let out: Vec<f64> = (0..rest)
        .map(|c| {
            let mut acc = 0.0;
            for i in 0..n {
                for j in 0..n {
                    acc += gi[i * n + j] * nn.value((i * n + j) * rest + c);
                }
            }
            acc
        })
        .collect();
    Ok(PointTensor::covariant(n, t.rank(), out).expect("rank within bounds"))
}

/// `C_θ(h)_ijk = ∇_i h_jk − θ ∇_j h_ik`.
pub fn theta_codazzi(metric: &MetricField, h: &SymmetricField, theta: f64, p: &[f64]) -> Result<PointTensor, GeometryError> {
    let nh = covariant_derivative(metric, FieldRef::Symmetric(h), p)?;
    Ok(PointTensor::covariant(metric.dim(), 3, codazzi_of(metric.dim(), nh.components(), theta)).expect("rank 3"))
}

fn codazzi_of(n: usize, nh: &[f64], theta: f64) -> Vec<f64> {
    let mut out = vec![0.0; n * n * n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                out[(i * n + j) * n + k] = nh[(i * n + j) * n + k] - theta * nh[(j * n + i) * n + k];
            }
        }
    }
    out
}

/// `∇^l W_ijkl`.
pub fn weyl_divergence(metric: &MetricField, p: &[f64]) -> Result<PointTensor, GeometryError> {
    Ok(curvature_frame(metric, p, FRAME_JET_ORDER)?.weyl_divergence)
}

/// `Q(W)` at `p`.
pub fn weyl_quadratic(metric: &MetricField, p: &[f64]) -> Result<PointTensor, GeometryError> {
    let geo = LocalGeometry::new(metric, p, 2)?;
    let w = geo.curvature()?.weyl.values();
    let n = metric.dim();
    Ok(PointTensor::covariant(n, 4, weyl_quadratic_components(n, &w, &geo.g_inv.values())).expect("rank 4"))
}

/// `Q = −ΔR/6 − |E|²/2 + R²/24` (dimension 4 only).
pub fn q_curvature(metric: &MetricField, p: &[f64]) -> Result<f64, GeometryError> {
    if metric.dim() != 4 {
        return Err(GeometryError::NotFourDimensional(metric.dim()));
    }
    Ok(curvature_frame(metric, p, FRAME_JET_ORDER)?
        .q_curvature
        .expect("dimension checked"))
}

/// Pointwise ingredients of the θ-Codazzi integral identity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lemma22Terms {
    /// `|∇h|²`.
    pub grad_sq: f64,
    /// `∇_i h_jk ∇^j h^ik`.
    pub transpose_dot: f64,
    /// `|δh|²`.
    pub delta_sq: f64,
    /// `W(h̊, h̊)`.
    pub weyl: f64,
    /// `(2/(n−2)) (tr h) E·h − (n/(n−2)) tr(E×h²)`.
    pub ricci: f64,
    /// `n λ |h̊|²` with the pointwise `λ = R/(n(n−1))`.
    pub lambda: f64,
}

impl Lemma22Terms {
    /// The bracket on the right-hand side.
    pub fn bracket(&self) -> f64 {
        self.delta_sq + self.weyl + self.ricci - self.lambda
    }

    /// `|C_θ(h)|²` expanded through `|∇h|²` and the transposed pairing.
    pub fn codazzi_sq(&self, theta: f64) -> f64 {
        (1.0 + theta * theta) * self.grad_sq - 2.0 * theta * self.transpose_dot
    }

    pub fn rhs(&self, theta: f64) -> f64 {
        2.0 * theta / (1.0 + theta * theta) * self.bracket()
    }
}

/// Both integrands of the identity at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lemma22Integrands {
    pub lhs: f64,
    pub rhs: f64,
}

/// Pointwise terms from metric jets of order ≥ 2 and `h` jets of order ≥ 1.
/// Also returns `|C_θ(h)|²` computed directly for each θ.
pub fn lemma22_terms(
    geo: &LocalGeometry,
    curv: &CurvatureJets,
    h: &JetTensor,
    thetas: &[f64],
) -> Result<(Lemma22Terms, Vec<f64>), GeometryError> {
    let n = geo.dim();
    let nf = n as f64;
    let l = &*geo.layout;
    let nh = geo.nabla(&h.truncated(l, 1))?.values();
    let g = geo.g.values();
    let gi = geo.g_inv.values();
    let hv = h.values();
    let e = curv.traceless_ricci.values();
    let w = curv.weyl.values();
    let r = curv.scalar.value(0);
    let lambda = r / (nf * (nf - 1.0));

    let grad_sq = tensor::covariant_norm_sq(n, 3, &nh, &gi);
    let transposed = codazzi_of(n, &nh, 0.0);
    let mut swapped = vec![0.0; nh.len()];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                swapped[(i * n + j) * n + k] = transposed[(j * n + i) * n + k];
            }
        }
    }
    let raised = {
        let mut t = nh.clone();
        for s in 0..3 {
            t = tensor::transform_slot(&t, n, 3, s, &gi);
        }
        t
    };
    let transpose_dot: f64 = raised.iter().zip(&swapped).map(|(a, b)| a * b).sum();
    let delta = delta_of(n, &nh, &gi);
    let mut delta_sq = 0.0;
    for i in 0..n {
        for j in 0..n {
            delta_sq += gi[i * n + j] * delta[i] * delta[j];
        }
    }
    let tr_h = tensor::sym2_trace(n, &hv, &gi);
    let h0: Vec<f64> = hv.iter().zip(&g).map(|(x, gij)| x - tr_h / nf * gij).collect();
    let weyl = weyl_pairing(n, &w, &h0, &h0, &gi);
    let e_dot_h = tensor::sym2_dot(n, &e, &hv, &gi);
    let e_h_h = tensor::sym2_dot(n, &tensor::sym2_times(n, &e, &hv, &gi), &hv, &gi);
    let ricci = 2.0 / (nf - 2.0) * tr_h * e_dot_h - nf / (nf - 2.0) * e_h_h;
    let lambda_term = nf * lambda * tensor::sym2_dot(n, &h0, &h0, &gi);
    let codazzi = thetas
        .iter()
        .map(|&t| tensor::covariant_norm_sq(n, 3, &codazzi_of(n, &nh, t), &gi))
        .collect();
    Ok((
        Lemma22Terms {
            grad_sq,
            transpose_dot,
            delta_sq,
            weyl,
            ricci,
            lambda: lambda_term,
        },
        codazzi,
    ))
}

/// `lhs = |∇h|² − |C_θ(h)|²/(1+θ²)` and
/// `rhs = (2θ/(1+θ²)) [|δh|² + W(h̊,h̊) + … − nλ|h̊|²]` at `p`.
pub fn lemma22_integrands(
    metric: &MetricField,
    h: &SymmetricField,
    theta: f64,
    p: &[f64],
) -> Result<Lemma22Integrands, GeometryError> {
    check_dim(metric, h.dim())?;
    let geo = LocalGeometry::new(metric, p, 2)?;
    let curv = geo.curvature()?;
    let hj = FieldRef::Symmetric(h).jets(&geo.layout, p)?;
    let (terms, codazzi) = lemma22_terms(&geo, &curv, &hj, &[theta])?;
    Ok(Lemma22Integrands {
        lhs: terms.grad_sq - codazzi[0] / (1.0 + theta * theta),
        rhs: terms.rhs(theta),
    })
}
