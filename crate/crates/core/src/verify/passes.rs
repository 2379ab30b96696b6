//! Grid passes shared by the checks: one full curvature survey, one pass per
//! test tensor `h` (all θ at once) and one per Sobolev trial function.

use crate::catalog::{ChartManifold, NodeEvaluator, ScalarFunction, TensorField};
use crate::geometry::{lemma22_terms, GeometryError};
use crate::jets::JetLayout;
use crate::quadrature::{metric_grid, reduce, Grid, GridSpec, Reduction};

use super::VerifyError;

/// `|E|` below this is treated as zero by the Kato check.
pub const KATO_FLOOR: f64 = 1e-6;

/// Channels of the curvature survey.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(usize)]
pub enum Channel {
    Bach,
    BachGap,
    /// Largest component of `∇^l W_ijkl − (n−3) C_ijk`.
    DivWeylGap,
    Weyl,
    TracelessRicci,
    Cotton,
    Scalar,
    /// `Q + |W|²/4` (dimension 4).
    GaussBonnet,
    WeylSq,
    TracelessRicciSq,
    /// `|W|^{n/2}`.
    WeylHalfN,
    /// `|E|^{n/2}`.
    TracelessRicciHalfN,
    NablaTracelessRicciSq,
    /// `2W(E,E) − (n/(n−2)) tr E³ − n|E|²`.
    Eq31Rhs,
    Eq31RhsAbs,
    /// `|∇|E|| − |∇E|` where `|E| > KATO_FLOOR`.
    KatoExcess,
    NablaWeyl,
    /// `|ΔW − 2(n−1)λW − 2Q(W)|`, when the survey includes `ΔW`.
    WeylEquation,
}

const CHANNELS: usize = Channel::WeylEquation as usize + 1;

/// Integrals and extrema of every survey channel.
#[derive(Debug, Clone)]
pub struct Survey {
    pub reduction: Reduction,
    pub with_weyl_laplacian: bool,
    pub jet_order: usize,
}

impl Survey {
    pub fn run(m: &ChartManifold, spec: &GridSpec, order: usize, weyl_laplacian: bool) -> Result<Survey, VerifyError> {
        let n = m.dim();
        let nf = n as f64;
        let grid = metric_grid(m, spec)?;
        let reduction = reduce(
            &grid,
            CHANNELS,
            || m.evaluator(order),
            |ev: &mut NodeEvaluator, x, out| {
                let (f, sqrt_det) = ev.frame(x, weyl_laplacian)?;
                let set = |out: &mut [f64], c: Channel, v: f64| out[c as usize] = v;
                let w = f.norm(&f.weyl);
                let e = f.norm(&f.traceless_ricci);
                let bach_gap: Vec<f64> = f
                    .bach
                    .components()
                    .iter()
                    .zip(f.bach_alt.components())
                    .map(|(a, b)| a - b)
                    .collect();
                let bach_gap = crate::tensor::PointTensor::covariant(n, 2, bach_gap).expect("rank 2");
                let div_gap = f
                    .weyl_divergence
                    .components()
                    .iter()
                    .zip(f.cotton.components())
                    .map(|(d, c)| (d - (nf - 3.0) * c).abs())
                    .fold(0.0, f64::max);
                set(out, Channel::Bach, f.norm(&f.bach));
                set(out, Channel::BachGap, f.norm(&bach_gap));
                set(out, Channel::DivWeylGap, div_gap);
                set(out, Channel::Weyl, w);
                set(out, Channel::TracelessRicci, e);
                set(out, Channel::Cotton, f.norm(&f.cotton));
                set(out, Channel::Scalar, f.scalar);
                set(out, Channel::GaussBonnet, f.q_curvature.map_or(f64::NAN, |q| q + 0.25 * w * w));
                set(out, Channel::WeylSq, w * w);
                set(out, Channel::TracelessRicciSq, e * e);
                set(out, Channel::WeylHalfN, w.powf(nf / 2.0));
                set(out, Channel::TracelessRicciHalfN, e.powf(nf / 2.0));
                set(out, Channel::NablaTracelessRicciSq, f.norm_sq(&f.nabla_traceless_ricci));
                let rhs = 2.0 * f.weyl_pairing(&f.traceless_ricci, &f.traceless_ricci)
                    - nf / (nf - 2.0) * f.cube_trace_e()
                    - nf * e * e;
                set(out, Channel::Eq31Rhs, rhs);
                set(out, Channel::Eq31RhsAbs, rhs.abs());
                set(out, Channel::KatoExcess, f.kato(KATO_FLOOR).map_or(f64::NAN, |(a, b)| a - b));
                set(out, Channel::NablaWeyl, f.norm(&f.nabla_weyl));
                set(out, Channel::WeylEquation, f.weyl_equation_residual().map_or(f64::NAN, |r| f.norm(&r)));
                Ok(sqrt_det)
            },
        )?;
        Ok(Survey {
            reduction,
            with_weyl_laplacian: weyl_laplacian,
            jet_order: order,
        })
    }

    pub fn integral(&self, c: Channel) -> f64 {
        self.reduction.integrals[c as usize]
    }

    pub fn max(&self, c: Channel) -> f64 {
        self.reduction.maxima[c as usize]
    }

    pub fn min(&self, c: Channel) -> f64 {
        self.reduction.minima[c as usize]
    }

    /// Nodes at which the channel was defined.
    pub fn present(&self, c: Channel) -> usize {
        self.reduction.present[c as usize]
    }

    pub fn volume(&self) -> f64 {
        self.reduction.volume
    }

    /// `‖T‖_{L^{n/2}}` from a `|T|^{n/2}` channel.
    pub fn half_n_norm(&self, c: Channel, n: usize) -> f64 {
        self.integral(c).powf(2.0 / n as f64)
    }

    /// `max R − min R`.
    pub fn scalar_oscillation(&self) -> f64 {
        self.max(Channel::Scalar) - self.min(Channel::Scalar)
    }

    /// `max |R − n(n−1)|`.
    pub fn normalization_residual(&self, n: usize) -> f64 {
        let target = (n * (n - 1)) as f64;
        (self.max(Channel::Scalar) - target)
            .abs()
            .max((self.min(Channel::Scalar) - target).abs())
    }
}

/// Integrals of the identity for one `h` and several θ.
#[derive(Debug, Clone, PartialEq)]
pub struct Lemma22Integrals {
    pub thetas: Vec<f64>,
    /// `∫ |∇h|²`.
    pub grad_sq: f64,
    /// `∫ (|∇h|² − |C_θ(h)|²/(1+θ²))` per θ.
    pub lhs: Vec<f64>,
    /// `∫ (2θ/(1+θ²)) [ … ]` per θ.
    pub rhs: Vec<f64>,
    /// `∫ |C_θ(h)|² / (1+θ²)` per θ.
    pub codazzi: Vec<f64>,
}

// Grid over the axes that the metric or a field depends on.
fn field_grid(m: &ChartManifold, spec: &GridSpec, field_uses: impl Fn(usize) -> bool) -> Result<Grid, VerifyError> {
    let grid = Grid::new(m.axes(), spec)?;
    let used: Vec<bool> = (0..m.dim()).map(|a| m.metric().depends_on(a) || field_uses(a)).collect();
    Ok(grid.collapse(&used))
}

pub fn lemma22_pass(
    m: &ChartManifold,
    h: &TensorField,
    thetas: &[f64],
    spec: &GridSpec,
) -> Result<Lemma22Integrals, VerifyError> {
    let grid = field_grid(m, spec, |a| h.primary().depends_on(a))?;
    let k = thetas.len();
    let channels = 1 + 3 * k;
    let rechart = h.rechartable();
    let r = reduce(
        &grid,
        channels,
        || {
            let ev = m.evaluator(2);
            let hs = h.primary().scratch(ev.layout(), 1);
            (ev, hs)
        },
        |(ev, hs), x, out| {
            let at = ev.locate(x, rechart);
            let geo = ev.geometry(&at)?;
            let curv = geo.curvature()?;
            let field = h.in_chart(at.key.as_ref())?;
            let hj = field.eval_jets(geo.layout(), &at.point, 1, hs)?;
            let (terms, cod) = lemma22_terms(&geo, &curv, &hj, thetas)?;
            out[0] = terms.grad_sq;
            for (i, &t) in thetas.iter().enumerate() {
                let scaled = cod[i] / (1.0 + t * t);
                out[1 + 3 * i] = terms.grad_sq - scaled;
                out[2 + 3 * i] = terms.rhs(t);
                out[3 + 3 * i] = scaled;
            }
            match at.key {
                None => Ok(geo.sqrt_det()),
                Some(_) => ev.sqrt_det(x),
            }
        },
    )?;
    let pick = |off: usize| (0..k).map(|i| r.integrals[off + 3 * i]).collect();
    Ok(Lemma22Integrals {
        thetas: thetas.to_vec(),
        grad_sq: r.integrals[0],
        lhs: pick(1),
        rhs: pick(2),
        codazzi: pick(3),
    })
}

/// Integrals entering the Sobolev inequality and the Yamabe quotient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SobolevIntegrals {
    /// `∫ u^{2n/(n−2)}`.
    pub critical_power: f64,
    /// `∫ |∇u|²`.
    pub grad_sq: f64,
    /// `∫ u²`.
    pub sq: f64,
    pub volume: f64,
}

pub fn sobolev_pass(m: &ChartManifold, u: &ScalarFunction, spec: &GridSpec) -> Result<SobolevIntegrals, VerifyError> {
    let n = m.dim();
    let p = 2.0 * n as f64 / (n as f64 - 2.0);
    let grid = field_grid(m, spec, |a| u.primary().depends_on(a))?;
    let layout1 = JetLayout::shared(n, 1).expect("positive dimension");
    let r = reduce(
        &grid,
        3,
        || (m.evaluator(0), u.primary().scratch(&layout1, 1)),
        |(ev, us), x, out| {
            let pm = ev.point_metric(x)?;
            let uj = u.primary().eval_jets(&layout1, x, 1, us)?;
            let c = uj.comp(0);
            let mut grad_sq = 0.0;
            for i in 0..n {
                for j in 0..n {
                    grad_sq += pm.g_inv[i * n + j] * c[layout1.unit_index(i)] * c[layout1.unit_index(j)];
                }
            }
            out[0] = c[0].abs().powf(p);
            out[1] = grad_sq;
            out[2] = c[0] * c[0];
            Ok(pm.sqrt_det)
        },
    )?;
    Ok(SobolevIntegrals {
        critical_power: r.integrals[0],
        grad_sq: r.integrals[1],
        sq: r.integrals[2],
        volume: r.volume,
    })
}

/// Range of the scalar curvature over the metric grid, from a cheap pass.
pub fn scalar_range(m: &ChartManifold, spec: &GridSpec) -> Result<(f64, f64), VerifyError> {
    let grid = metric_grid(m, spec)?;
    let r = reduce(
        &grid,
        1,
        || m.evaluator(2),
        |ev: &mut NodeEvaluator, x, out| -> Result<f64, GeometryError> {
            let at = ev.locate(x, true);
            let geo = ev.geometry(&at)?;
            out[0] = geo.curvature()?.scalar.value(0);
            Ok(1.0)
        },
    )?;
    Ok((r.minima[0], r.maxima[0]))
}
