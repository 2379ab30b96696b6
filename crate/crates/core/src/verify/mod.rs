//! Identity, inequality and gap-theorem checks producing [`Verdict`]s.
//!
//! A [`Verifier`] owns one manifold and configuration. The curvature survey
//! (a single full-frame pass over the grid) is computed on first use and
//! shared by every check that needs it.

mod constants;
mod passes;

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::time::Instant;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::catalog::{random_scalar_field, random_symmetric_field, CatalogError, ChartManifold, ScalarFunction, TensorField};
use crate::geometry::{GeometryError, FRAME_JET_ORDER};
use crate::quadrature::{GridSpec, QuadratureError};

pub use constants::{gap_constants, GapConstants};
pub use passes::{
    lemma22_pass, scalar_range, sobolev_pass, Channel, Lemma22Integrals, SobolevIntegrals, Survey, KATO_FLOOR,
};

/// Absolute threshold for the gating facts: constant `R`, `R = n(n−1)`,
/// Einstein, Bach-flat and conformally flat.
pub const GATE: f64 = 1e-9;

/// Bound on `‖W‖_∞ + ‖E‖_∞` for an entry to count as spherical.
pub const SPHERICAL_TOL: f64 = 1e-8;

pub const DEFAULT_GRID: usize = 24;

/// Default nodes per axis: [`DEFAULT_GRID`] up to dimension 4, then
/// `⌊24^{4/n}⌋` so the full grid stays near `24⁴` nodes.
pub fn default_grid(dim: usize) -> usize {
    if dim <= 4 {
        return DEFAULT_GRID;
    }
    let budget = (DEFAULT_GRID as f64).powi(4);
    let mut k = budget.powf(1.0 / dim as f64).floor() as usize;
    // Guard the floor against roundoff either way.
    while (k + 1).pow(dim as u32) as f64 <= budget {
        k += 1;
    }
    while k.pow(dim as u32) as f64 > budget {
        k -= 1;
    }
    k.max(4)
}

pub const DEFAULT_TOL_INTEGRAL: f64 = 1e-6;
pub const DEFAULT_TOL_POINTWISE: f64 = 1e-8;
pub const DEFAULT_TOL_WEYL_EQUATION: f64 = 1e-6;
pub const DEFAULT_THETAS: [f64; 3] = [-1.0, 1.0, 2.0];
pub const DEFAULT_SEED: u64 = 7;

/// Random test tensors: bandwidth and amplitude.
pub const TEST_FIELD_BANDWIDTH: usize = 2;
pub const TEST_FIELD_AMPLITUDE: f64 = 0.5;
/// Amplitude of the seeded Sobolev trial function `1 + a·p`.
pub const TRIAL_AMPLITUDE: f64 = 0.1;

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("dimension {0} is below 3")]
    Dimension(usize),
    #[error("α₀ must be positive and finite, got {0}")]
    Alpha0(f64),
    #[error("unknown check `{0}`")]
    UnknownCheck(String),
    #[error("trial function vanishes identically")]
    ZeroFunction,
    #[error("jet order {got} is below the required {need}")]
    JetOrder { got: usize, need: usize },
    #[error("grid has {got} axis counts but the manifold has dimension {dim}")]
    Grid { got: usize, dim: usize },
    #[error("θ must be finite, got {0}")]
    Theta(f64),
    #[error("tolerance must be positive and finite, got {0}")]
    Tolerance(f64),
    #[error("test tensor has dimension {got}, manifold has {dim}")]
    FieldDimension { got: usize, dim: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Skipped(String),
}

impl Status {
    pub fn from_pass(ok: bool) -> Status {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }

    pub fn is_fail(&self) -> bool {
        matches!(self, Status::Fail)
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Status::Pass => f.write_str("pass"),
            Status::Fail => f.write_str("fail"),
            Status::Skipped(r) => write!(f, "skipped: {r}"),
        }
    }
}

impl Serialize for Status {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Status {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        match s.as_str() {
            "pass" => Ok(Status::Pass),
            "fail" => Ok(Status::Fail),
            _ => match s.strip_prefix("skipped: ") {
                Some(r) => Ok(Status::Skipped(r.to_string())),
                None => Err(serde::de::Error::custom(format!("unknown status `{s}`"))),
            },
        }
    }
}

/// Outcome of one check on one manifold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub check: String,
    pub manifold: String,
    pub grid: Vec<usize>,
    pub jet_order: usize,
    /// Only finite values are kept.
    pub values: BTreeMap<String, f64>,
    pub tol: f64,
    pub status: Status,
    pub seconds: Option<f64>,
}

impl Verdict {
    pub fn value(&self, name: &str) -> Option<f64> {
        self.values.get(name).copied()
    }

    /// Reads a 0/1 flag.
    pub fn flag(&self, name: &str) -> Option<bool> {
        self.value(name).map(|v| v != 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CheckId {
    Lemma22,
    CodazziIneq,
    Eq31,
    WeylEq,
    DivWeyl,
    BachConsistency,
    Gbc,
    Sobolev,
    Kato,
    ThmA,
    ThmB,
    ThmC,
}

impl CheckId {
    pub const ALL: [CheckId; 12] = [
        CheckId::Lemma22,
        CheckId::CodazziIneq,
        CheckId::Eq31,
        CheckId::WeylEq,
        CheckId::DivWeyl,
        CheckId::BachConsistency,
        CheckId::Gbc,
        CheckId::Sobolev,
        CheckId::Kato,
        CheckId::ThmA,
        CheckId::ThmB,
        CheckId::ThmC,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CheckId::Lemma22 => "lemma22",
            CheckId::CodazziIneq => "codazzi-ineq",
            CheckId::Eq31 => "eq31",
            CheckId::WeylEq => "weyl-eq",
            CheckId::DivWeyl => "div-weyl",
            CheckId::BachConsistency => "bach-consistency",
            CheckId::Gbc => "gbc",
            CheckId::Sobolev => "sobolev",
            CheckId::Kato => "kato",
            CheckId::ThmA => "thmA",
            CheckId::ThmB => "thmB",
            CheckId::ThmC => "thmC",
        }
    }

    /// Parses one id; `all` expands to every check.
    pub fn parse(s: &str) -> Result<Vec<CheckId>, VerifyError> {
        if s == "all" {
            return Ok(CheckId::ALL.to_vec());
        }
        CheckId::ALL
            .iter()
            .find(|c| c.name() == s)
            .map(|&c| vec![c])
            .ok_or_else(|| VerifyError::UnknownCheck(s.to_string()))
    }

    /// Parses a list of ids, dropping repeats and keeping the canonical order.
    pub fn parse_list<S: AsRef<str>>(items: &[S]) -> Result<Vec<CheckId>, VerifyError> {
        let mut out = Vec::new();
        for s in items {
            out.extend(CheckId::parse(s.as_ref())?);
        }
        out.sort();
        out.dedup();
        Ok(out)
    }
}

impl fmt::Display for CheckId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone)]
pub struct VerifyConfig {
    /// Nodes per axis. Empty means [`default_grid`] on every axis; a single
    /// entry applies to every axis.
    pub grid: Vec<usize>,
    pub jet_order: usize,
    /// Overrides every tolerance below.
    pub tol: Option<f64>,
    pub thetas: Vec<f64>,
    pub alpha0: Option<f64>,
    pub seed: u64,
    /// Record wall-clock seconds in each verdict.
    pub timing: bool,
    /// Test tensor for `lemma22`/`codazzi-ineq`; seeded random when absent.
    pub h: Option<TensorField>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            grid: Vec::new(),
            jet_order: FRAME_JET_ORDER,
            tol: None,
            thetas: DEFAULT_THETAS.to_vec(),
            alpha0: None,
            seed: DEFAULT_SEED,
            timing: false,
            h: None,
        }
    }
}

impl VerifyConfig {
    pub fn tol_integral(&self) -> f64 {
        self.tol.unwrap_or(DEFAULT_TOL_INTEGRAL)
    }

    pub fn tol_pointwise(&self) -> f64 {
        self.tol.unwrap_or(DEFAULT_TOL_POINTWISE)
    }

    pub fn tol_weyl_equation(&self) -> f64 {
        self.tol.unwrap_or(DEFAULT_TOL_WEYL_EQUATION)
    }

    /// Per-axis counts for a manifold of dimension `dim`.
    pub fn grid_spec(&self, dim: usize) -> Result<GridSpec, VerifyError> {
        let counts = match self.grid.len() {
            0 => vec![default_grid(dim); dim],
            1 => vec![self.grid[0]; dim],
            k if k == dim => self.grid.clone(),
            k => return Err(VerifyError::Grid { got: k, dim }),
        };
        Ok(GridSpec::new(counts)?)
    }

    fn validate(&self) -> Result<(), VerifyError> {
        if self.jet_order < FRAME_JET_ORDER {
            return Err(VerifyError::JetOrder {
                got: self.jet_order,
                need: FRAME_JET_ORDER,
            });
        }
        if let Some(t) = self.tol {
            if !(t > 0.0 && t.is_finite()) {
                return Err(VerifyError::Tolerance(t));
            }
        }
        if let Some(&t) = self.thetas.iter().find(|t| !t.is_finite()) {
            return Err(VerifyError::Theta(t));
        }
        if let Some(a) = self.alpha0 {
            if !(a > 0.0 && a.is_finite()) {
                return Err(VerifyError::Alpha0(a));
            }
        }
        Ok(())
    }
}

// Named values of a verdict under construction.
#[derive(Default)]
struct Values(BTreeMap<String, f64>);

impl Values {
    fn set(&mut self, name: &str, v: f64) -> &mut Self {
        if v.is_finite() {
            self.0.insert(name.to_string(), v);
        }
        self
    }

    fn flag(&mut self, name: &str, b: bool) -> &mut Self {
        self.set(name, if b { 1.0 } else { 0.0 })
    }
}

fn relative_gap(a: f64, b: f64) -> f64 {
    (a - b).abs() / (1.0 + a.abs() + b.abs())
}

/// Runs checks on one manifold.
pub struct Verifier<'m> {
    m: &'m ChartManifold,
    cfg: VerifyConfig,
    spec: GridSpec,
    survey: Option<Survey>,
    lemma: Option<Lemma22Integrals>,
    // Set while the survey pass should also compute `ΔW`.
    want_weyl_laplacian: bool,
}

impl<'m> Verifier<'m> {
    pub fn new(m: &'m ChartManifold, cfg: VerifyConfig) -> Result<Self, VerifyError> {
        cfg.validate()?;
        let spec = cfg.grid_spec(m.dim())?;
        if let Some(h) = &cfg.h {
            if h.primary().dim() != m.dim() {
                return Err(VerifyError::FieldDimension {
                    got: h.primary().dim(),
                    dim: m.dim(),
                });
            }
        }
        Ok(Verifier {
            m,
            cfg,
            spec,
            survey: None,
            lemma: None,
            want_weyl_laplacian: false,
        })
    }

    pub fn manifold(&self) -> &'m ChartManifold {
        self.m
    }

    pub fn config(&self) -> &VerifyConfig {
        &self.cfg
    }

    pub fn grid_spec(&self) -> &GridSpec {
        &self.spec
    }

    /// Runs `checks` in order. A check can produce several verdicts (one
    /// per θ or per trial function).
    pub fn run(&mut self, checks: &[CheckId]) -> Result<Vec<Verdict>, VerifyError> {
        // One survey serves every check; include ΔW when it may be needed.
        if checks.contains(&CheckId::WeylEq) && self.m.expected_flags().einstein != Some(false) {
            self.want_weyl_laplacian = true;
        }
        let mut out = Vec::new();
        for &c in checks {
            out.extend(self.check(c)?);
        }
        Ok(out)
    }

    pub fn check(&mut self, c: CheckId) -> Result<Vec<Verdict>, VerifyError> {
        let start = Instant::now();
        let mut verdicts = match c {
            CheckId::Lemma22 => self.lemma22(None)?,
            CheckId::CodazziIneq => self.codazzi(None)?,
            CheckId::Eq31 => vec![self.eq31()?],
            CheckId::WeylEq => vec![self.weyl_equation()?],
            CheckId::DivWeyl => vec![self.div_weyl()?],
            CheckId::BachConsistency => vec![self.bach_consistency()?],
            CheckId::Gbc => vec![self.gbc()?],
            CheckId::Sobolev => self.sobolev(None)?,
            CheckId::Kato => vec![self.kato()?],
            CheckId::ThmA => vec![self.theorem_a()?],
            CheckId::ThmB => vec![self.theorem_b()?],
            CheckId::ThmC => vec![self.theorem_c()?],
        };
        if self.cfg.timing {
            let secs = start.elapsed().as_secs_f64();
            for v in &mut verdicts {
                v.seconds = Some(secs);
            }
        }
        Ok(verdicts)
    }

    fn verdict(&self, check: CheckId, values: Values, tol: f64, status: Status) -> Verdict {
        Verdict {
            check: check.name().to_string(),
            manifold: self.m.name().to_string(),
            grid: self.spec.counts().to_vec(),
            jet_order: self.cfg.jet_order,
            values: values.0,
            tol,
            status,
            seconds: None,
        }
    }

    fn skipped(&self, check: CheckId, values: Values, tol: f64, reason: &str) -> Verdict {
        self.verdict(check, values, tol, Status::Skipped(reason.to_string()))
    }

    /// The shared curvature survey.
    pub fn survey(&mut self) -> Result<&Survey, VerifyError> {
        let stale = match &self.survey {
            None => true,
            Some(s) => self.want_weyl_laplacian && !s.with_weyl_laplacian,
        };
        if stale {
            self.survey = Some(Survey::run(self.m, &self.spec, self.cfg.jet_order, self.want_weyl_laplacian)?);
        }
        Ok(self.survey.as_ref().expect("survey was just computed"))
    }

    fn n(&self) -> usize {
        self.m.dim()
    }

    fn default_h(&self) -> Result<TensorField, VerifyError> {
        match &self.cfg.h {
            Some(h) => Ok(h.clone()),
            None => Ok(random_symmetric_field(
                self.m,
                self.cfg.seed,
                TEST_FIELD_BANDWIDTH,
                TEST_FIELD_AMPLITUDE,
            )?),
        }
    }

    fn lemma_integrals(&mut self, h: Option<&TensorField>) -> Result<Lemma22Integrals, VerifyError> {
        if let Some(h) = h {
            return lemma22_pass(self.m, h, &self.cfg.thetas, &self.spec);
        }
        if self.lemma.is_none() {
            let h = self.default_h()?;
            self.lemma = Some(lemma22_pass(self.m, &h, &self.cfg.thetas, &self.spec)?);
        }
        Ok(self.lemma.clone().expect("cached"))
    }

    /// The integral identity for `h` (default: the configured or seeded
    /// tensor), one verdict per θ. The identity holds with the pointwise
    /// `λ = R/(n(n−1))` on every metric, so it is never skipped.
    pub fn lemma22(&mut self, h: Option<&TensorField>) -> Result<Vec<Verdict>, VerifyError> {
        let tol = self.cfg.tol_integral();
        if self.n() < 3 {
            let mut v = Values::default();
            v.set("n", self.n() as f64);
            return Ok(vec![self.skipped(CheckId::Lemma22, v, tol, "requires dimension ≥ 3")]);
        }
        let li = self.lemma_integrals(h)?;
        Ok((0..li.thetas.len())
            .map(|i| {
                let gap = relative_gap(li.lhs[i], li.rhs[i]);
                let mut v = Values::default();
                v.set("theta", li.thetas[i])
                    .set("lhs", li.lhs[i])
                    .set("rhs", li.rhs[i])
                    .set("relative_gap", gap)
                    .set("grad_sq", li.grad_sq);
                self.verdict(CheckId::Lemma22, v, tol, Status::from_pass(gap <= tol))
            })
            .collect())
    }

    /// `∫|∇h|² ≥ ∫ rhs` with slack equal to `∫|C_θ(h)|²/(1+θ²)`.
    pub fn codazzi(&mut self, h: Option<&TensorField>) -> Result<Vec<Verdict>, VerifyError> {
        let tol = self.cfg.tol_integral();
        if self.n() < 3 {
            let mut v = Values::default();
            v.set("n", self.n() as f64);
            return Ok(vec![self.skipped(CheckId::CodazziIneq, v, tol, "requires dimension ≥ 3")]);
        }
        let li = self.lemma_integrals(h)?;
        Ok((0..li.thetas.len())
            .map(|i| {
                let slack = li.grad_sq - li.rhs[i];
                let expected = li.codazzi[i];
                let slack_gap = (slack - expected).abs() / (1.0 + li.grad_sq.abs() + li.rhs[i].abs());
                let mut v = Values::default();
                v.set("theta", li.thetas[i])
                    .set("grad_sq", li.grad_sq)
                    .set("rhs", li.rhs[i])
                    .set("slack", slack)
                    .set("codazzi_sq", expected)
                    .set("slack_gap", slack_gap);
                let ok = slack >= -GATE && slack_gap <= tol;
                self.verdict(CheckId::CodazziIneq, v, tol, Status::from_pass(ok))
            })
            .collect())
    }

    /// `∫|∇E|² = ∫(2W(E,E) − (n/(n−2)) tr E³ − n|E|²)` on Bach-flat entries
    /// with `R = n(n−1)`.
    pub fn eq31(&mut self) -> Result<Verdict, VerifyError> {
        let n = self.n();
        let tol = self.cfg.tol_integral();
        if n < 3 {
            return Ok(self.skipped(CheckId::Eq31, Values::default(), tol, "requires dimension ≥ 3"));
        }
        let s = self.survey()?;
        let bach = s.max(Channel::Bach);
        let norm_res = s.normalization_residual(n);
        let lhs = s.integral(Channel::NablaTracelessRicciSq);
        let rhs = s.integral(Channel::Eq31Rhs);
        let rhs_max = s.max(Channel::Eq31RhsAbs);
        let volume = s.volume();
        let mut v = Values::default();
        v.set("bach_max", bach)
            .set("normalization_residual", norm_res)
            .set("lhs", lhs)
            .set("rhs", rhs)
            .set("rhs_integrand_max", rhs_max)
            .set("volume", volume);
        if bach > GATE {
            return Ok(self.skipped(CheckId::Eq31, v, tol, "not Bach-flat"));
        }
        if norm_res > GATE {
            return Ok(self.skipped(CheckId::Eq31, v, tol, "R ≠ n(n−1)"));
        }
        let gap = relative_gap(lhs, rhs);
        v.set("relative_gap", gap);
        Ok(self.verdict(CheckId::Eq31, v, tol, Status::from_pass(gap <= tol)))
    }

    /// `‖ΔW − 2(n−1)λW − 2Q(W)‖_∞` on Einstein entries.
    pub fn weyl_equation(&mut self) -> Result<Verdict, VerifyError> {
        let n = self.n();
        let tol = self.cfg.tol_weyl_equation();
        if n < 4 {
            return Ok(self.skipped(CheckId::WeylEq, Values::default(), tol, "requires dimension ≥ 4"));
        }
        // Gate on Einstein first so non-Einstein entries skip the ΔW pass.
        let e_max = match &self.survey {
            Some(s) => s.max(Channel::TracelessRicci),
            None if self.m.expected_flags().einstein == Some(false) => f64::INFINITY,
            None => {
                self.want_weyl_laplacian = true;
                self.survey()?.max(Channel::TracelessRicci)
            }
        };
        let mut v = Values::default();
        if e_max > GATE {
            v.set("traceless_ricci_max", e_max);
            return Ok(self.skipped(CheckId::WeylEq, v, tol, "not Einstein"));
        }
        self.want_weyl_laplacian = true;
        let s = self.survey()?;
        let residual = s.max(Channel::WeylEquation);
        v.set("traceless_ricci_max", e_max)
            .set("residual_max", residual)
            .set("nabla_weyl_max", s.max(Channel::NablaWeyl))
            .set("weyl_max", s.max(Channel::Weyl));
        Ok(self.verdict(CheckId::WeylEq, v, tol, Status::from_pass(residual <= tol)))
    }

    /// Largest component of `∇^l W_ijkl − (n−3) C_ijk`.
    pub fn div_weyl(&mut self) -> Result<Verdict, VerifyError> {
        let tol = self.cfg.tol_pointwise();
        if self.n() < 4 {
            return Ok(self.skipped(CheckId::DivWeyl, Values::default(), tol, "requires dimension ≥ 4"));
        }
        let s = self.survey()?;
        let residual = s.max(Channel::DivWeylGap);
        let mut v = Values::default();
        v.set("residual_max", residual).set("cotton_max", s.max(Channel::Cotton));
        Ok(self.verdict(CheckId::DivWeyl, v, tol, Status::from_pass(residual <= tol)))
    }

    /// The two Bach formulas agree to `tol·(1 + ‖B‖_∞)`.
    pub fn bach_consistency(&mut self) -> Result<Verdict, VerifyError> {
        let tol = self.cfg.tol_pointwise();
        if self.n() < 3 {
            return Ok(self.skipped(CheckId::BachConsistency, Values::default(), tol, "requires dimension ≥ 3"));
        }
        let s = self.survey()?;
        let gap = s.max(Channel::BachGap);
        let bach = s.max(Channel::Bach);
        let mut v = Values::default();
        v.set("difference_max", gap).set("bach_max", bach);
        let ok = gap <= tol * (1.0 + bach);
        Ok(self.verdict(CheckId::BachConsistency, v, tol, Status::from_pass(ok)))
    }

    /// `∫(Q + |W|²/4) = 8π²χ` in dimension 4. The tolerance is relative,
    /// or absolute (pointwise default) when `χ = 0`.
    pub fn gbc(&mut self) -> Result<Verdict, VerifyError> {
        let tol_rel = self.cfg.tol_integral();
        if self.n() != 4 {
            return Ok(self.skipped(CheckId::Gbc, Values::default(), tol_rel, "requires dimension 4"));
        }
        let Some(chi) = self.m.euler_characteristic() else {
            return Ok(self.skipped(CheckId::Gbc, Values::default(), tol_rel, "χ unknown"));
        };
        let expected = 8.0 * PI * PI * chi as f64;
        let integral = self.survey()?.integral(Channel::GaussBonnet);
        let mut v = Values::default();
        v.set("integral", integral).set("expected", expected).set("chi", chi as f64);
        let (err, tol) = if chi == 0 {
            (integral.abs(), self.cfg.tol_pointwise())
        } else {
            ((integral - expected).abs() / expected.abs(), tol_rel)
        };
        v.set("error", err);
        Ok(self.verdict(CheckId::Gbc, v, tol, Status::from_pass(err <= tol)))
    }

    fn scalar_bounds(&mut self) -> Result<(f64, f64), VerifyError> {
        match &self.survey {
            Some(s) => Ok((s.min(Channel::Scalar), s.max(Channel::Scalar))),
            None => scalar_range(self.m, &self.spec),
        }
    }

    /// Sobolev inequality for `u` (default: `u ≡ 1` and a seeded trial
    /// function), one verdict per trial function.
    pub fn sobolev(&mut self, u: Option<&ScalarFunction>) -> Result<Vec<Verdict>, VerifyError> {
        let n = self.n();
        let tol = self.cfg.tol_integral();
        if n < 3 {
            return Ok(vec![self.skipped(CheckId::Sobolev, Values::default(), tol, "requires dimension ≥ 3")]);
        }
        let Some(alpha0) = self.cfg.alpha0 else {
            return Ok(vec![self.skipped(CheckId::Sobolev, Values::default(), tol, "α₀ not given")]);
        };
        let (lo, hi) = self.scalar_bounds()?;
        let target = (n * (n - 1)) as f64;
        let norm_res = (lo - target).abs().max((hi - target).abs());
        if norm_res > GATE {
            let mut v = Values::default();
            v.set("normalization_residual", norm_res);
            return Ok(vec![self.skipped(CheckId::Sobolev, v, tol, "R ≠ n(n−1)")]);
        }
        let trials: Vec<(Option<u64>, ScalarFunction)> = match u {
            Some(u) => vec![(u.seed(), u.clone())],
            None => vec![
                (None, self.m.constant_function(1.0)?),
                (
                    Some(self.cfg.seed),
                    random_scalar_field(self.m, self.cfg.seed, TEST_FIELD_BANDWIDTH, TRIAL_AMPLITUDE)?,
                ),
            ],
        };
        trials
            .iter()
            .map(|(seed, u)| {
                let r = check_sobolev(self.m, alpha0, u, &self.spec, tol)?;
                let mut verdict = self.verdict(CheckId::Sobolev, Values(r.values.clone()), tol, r.status.clone());
                if let Some(s) = seed {
                    verdict.values.insert("seed".to_string(), *s as f64);
                }
                Ok(verdict)
            })
            .collect()
    }

    /// Kato's inequality `|∇|E|| ≤ |∇E|` wherever `|E| > KATO_FLOOR`.
    pub fn kato(&mut self) -> Result<Verdict, VerifyError> {
        let tol = self.cfg.tol_pointwise();
        if self.n() < 3 {
            return Ok(self.skipped(CheckId::Kato, Values::default(), tol, "requires dimension ≥ 3"));
        }
        let s = self.survey()?;
        let nodes = s.present(Channel::KatoExcess);
        let mut v = Values::default();
        v.set("nodes", nodes as f64).set("traceless_ricci_max", s.max(Channel::TracelessRicci));
        if nodes == 0 {
            return Ok(self.skipped(CheckId::Kato, v, tol, "|E| ≤ 1e-6 everywhere"));
        }
        let excess = s.max(Channel::KatoExcess);
        v.set("excess_max", excess);
        Ok(self.verdict(CheckId::Kato, v, tol, Status::from_pass(excess <= tol)))
    }

    // Facts shared by the theorem checks.
    fn hypotheses(&mut self, v: &mut Values) -> Result<(bool, bool, f64, f64), VerifyError> {
        let n = self.n();
        let s = self.survey()?;
        let osc = s.scalar_oscillation();
        let norm_res = s.normalization_residual(n);
        let bach = s.max(Channel::Bach);
        let w = s.max(Channel::Weyl);
        let e = s.max(Channel::TracelessRicci);
        let constant = osc <= GATE;
        let normalized = norm_res <= GATE;
        let bach_flat = bach <= GATE;
        v.set("scalar_oscillation", osc)
            .set("normalization_residual", norm_res)
            .flag("constant_scalar", constant)
            .flag("normalized", normalized)
            .set("bach_max", bach)
            .flag("bach_flat", bach_flat)
            .set("weyl_max", w)
            .set("traceless_ricci_max", e);
        Ok((constant && normalized, bach_flat, w, e))
    }

    // Whether α₀ is at most the known Yamabe constant (unknown: assumed).
    fn alpha0_admissible(&self, alpha0: f64, v: &mut Values) -> bool {
        match self.m.known_constant("yamabe") {
            Some(y) => {
                let ok = alpha0 <= y * (1.0 + 1e-12) + 1e-12;
                v.set("yamabe", y).flag("alpha0_admissible", ok);
                ok
            }
            None => true,
        }
    }

    /// `‖W‖_∞ + ‖E‖_∞ < ε₀` with the remaining hypotheses implies the
    /// entry is spherical. Fails only when that implication is violated.
    pub fn theorem_a(&mut self) -> Result<Verdict, VerifyError> {
        let n = self.n();
        if n < 3 {
            return Ok(self.skipped(CheckId::ThmA, Values::default(), SPHERICAL_TOL, "requires dimension ≥ 3"));
        }
        let mut v = Values::default();
        let (normalized, bach_flat, w, e) = self.hypotheses(&mut v)?;
        let eps0 = (n as f64 - 1.0) / 4.0;
        let sum = w + e;
        let met = normalized && bach_flat && sum < eps0;
        let spherical = sum <= SPHERICAL_TOL;
        let consistent = !met || spherical;
        v.set("s", sum)
            .set("epsilon0", eps0)
            .flag("hypotheses_met", met)
            .flag("spherical", spherical)
            .flag("consistent", consistent);
        Ok(self.verdict(CheckId::ThmA, v, SPHERICAL_TOL, Status::from_pass(consistent)))
    }

    /// `‖W‖_{L^{n/2}} + ‖E‖_{L^{n/2}} < τ₀` version, with the Einstein
    /// sub-check below `δ₀`.
    pub fn theorem_b(&mut self) -> Result<Verdict, VerifyError> {
        let n = self.n();
        if n < 3 {
            return Ok(self.skipped(CheckId::ThmB, Values::default(), SPHERICAL_TOL, "requires dimension ≥ 3"));
        }
        let Some(alpha0) = self.cfg.alpha0 else {
            return Ok(self.skipped(CheckId::ThmB, Values::default(), SPHERICAL_TOL, "α₀ not given"));
        };
        let c = gap_constants(n, alpha0, None)?;
        let mut v = Values::default();
        let (normalized, bach_flat, w, e) = self.hypotheses(&mut v)?;
        let admissible = self.alpha0_admissible(alpha0, &mut v);
        let s = self.survey()?;
        let wn = s.half_n_norm(Channel::WeylHalfN, n);
        let en = s.half_n_norm(Channel::TracelessRicciHalfN, n);
        let sum = wn + en;
        let base = normalized && bach_flat && admissible;
        let met = base && sum < c.tau0;
        let spherical = w + e <= SPHERICAL_TOL;
        let lemma_applies = base && sum < c.delta0;
        let einstein = e <= SPHERICAL_TOL;
        let consistent = (!met || spherical) && (!lemma_applies || einstein);
        v.set("weyl_ln2", wn)
            .set("traceless_ricci_ln2", en)
            .set("s", sum)
            .set("tau0", c.tau0)
            .set("delta0", c.delta0)
            .set("alpha0", alpha0)
            .flag("hypotheses_met", met)
            .flag("spherical", spherical)
            .flag("einstein_subcheck_applies", lemma_applies)
            .flag("einstein", einstein)
            .flag("consistent", consistent);
        Ok(self.verdict(CheckId::ThmB, v, SPHERICAL_TOL, Status::from_pass(consistent)))
    }

    /// `∫|W|² < (32/3)π²(χ−2) + α₀/192` on Bach-flat 4-manifolds. The
    /// conformal conclusion is checked as `W ≡ 0` only on entries with
    /// `R ≡ 12`.
    pub fn theorem_c(&mut self) -> Result<Verdict, VerifyError> {
        if self.n() != 4 {
            return Ok(self.skipped(CheckId::ThmC, Values::default(), SPHERICAL_TOL, "requires dimension 4"));
        }
        let Some(alpha0) = self.cfg.alpha0 else {
            return Ok(self.skipped(CheckId::ThmC, Values::default(), SPHERICAL_TOL, "α₀ not given"));
        };
        let Some(chi) = self.m.euler_characteristic() else {
            return Ok(self.skipped(CheckId::ThmC, Values::default(), SPHERICAL_TOL, "χ unknown"));
        };
        let c = gap_constants(4, alpha0, Some(chi))?;
        let threshold = c.theorem_c_threshold.expect("dimension 4 with χ");
        let mut v = Values::default();
        let (normalized, bach_flat, w, _) = self.hypotheses(&mut v)?;
        let admissible = self.alpha0_admissible(alpha0, &mut v);
        let s = self.survey()?;
        let w2 = s.integral(Channel::WeylSq);
        let e2 = s.integral(Channel::TracelessRicciSq);
        let met = bach_flat && admissible && w2 < threshold;
        let conformally_flat = w <= SPHERICAL_TOL;
        let consistent = !(met && normalized) || conformally_flat;
        v.set("w_l2_sq", w2)
            .set("e_l2_sq", e2)
            .set("squared_sum", w2 + e2)
            .set("unsquared_sum", w2.sqrt() + e2.sqrt())
            .set("alpha0_over_128", alpha0 / 128.0)
            .set("tau0", c.tau0)
            .set("threshold", threshold)
            .set("chi", chi as f64)
            .flag("hypotheses_met", met)
            .flag("conclusion_checkable", normalized)
            .flag("conformally_flat", conformally_flat)
            .flag("consistent", consistent);
        Ok(self.verdict(CheckId::ThmC, v, SPHERICAL_TOL, Status::from_pass(consistent)))
    }
}

/// Result of [`check_sobolev`]: named values and status.
#[derive(Debug, Clone, PartialEq)]
pub struct SobolevReport {
    pub values: BTreeMap<String, f64>,
    pub status: Status,
}

/// `(∫u^{2n/(n−2)})^{(n−2)/n} ≤ C_S ∫(|∇u|² + u²)` for one trial function,
/// plus its Yamabe quotient (an upper bound on the Yamabe constant). The
/// scalar curvature is taken to be `n(n−1)`.
pub fn check_sobolev(
    m: &ChartManifold,
    alpha0: f64,
    u: &ScalarFunction,
    spec: &GridSpec,
    tol: f64,
) -> Result<SobolevReport, VerifyError> {
    let n = m.dim();
    let c = gap_constants(n, alpha0, None)?;
    let r = sobolev_pass(m, u, spec)?;
    if r.sq <= 0.0 {
        return Err(VerifyError::ZeroFunction);
    }
    let nf = n as f64;
    let lhs = r.critical_power.powf((nf - 2.0) / nf);
    let rhs = c.sobolev_constant * (r.grad_sq + r.sq);
    let quotient = (4.0 * (nf - 1.0) / (nf - 2.0) * r.grad_sq + nf * (nf - 1.0) * r.sq) / lhs;
    let mut v = Values::default();
    v.set("lhs", lhs)
        .set("rhs", rhs)
        .set("sobolev_constant", c.sobolev_constant)
        .set("yamabe_quotient", quotient)
        .set("volume", r.volume);
    if let Some(y) = m.known_constant("yamabe") {
        v.set("yamabe", y).flag("alpha0_admissible", alpha0 <= y * (1.0 + 1e-12) + 1e-12);
    }
    Ok(SobolevReport {
        values: v.0,
        status: Status::from_pass(lhs <= rhs + tol),
    })
}
