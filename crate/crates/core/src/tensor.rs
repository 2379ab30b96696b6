//! Dense pointwise tensors with explicit slot valences.
//!
//! Components are stored row-major, so the last slot varies fastest. The
//! curvature pipeline keeps everything fully covariant and produces mixed
//! forms on demand.

use serde::Serialize;
use thiserror::Error;

/// Highest rank the dense representation accepts.
pub const MAX_RANK: usize = 5;

/// Relative tolerance for symmetry flags on inputs.
pub const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Slot {
    Covariant,
    Contravariant,
}

impl Slot {
    fn flipped(self) -> Slot {
        match self {
            Slot::Covariant => Slot::Contravariant,
            Slot::Contravariant => Slot::Covariant,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TensorError {
    #[error("slot {slot} out of range for rank {rank}")]
    SlotOutOfRange { slot: usize, rank: usize },
    #[error("cannot contract slots {a} and {b}: need one covariant and one contravariant slot")]
    IncompatibleValence { a: usize, b: usize },
    #[error("component count {got} does not match dim {dim} and rank {rank}")]
    ShapeMismatch { got: usize, dim: usize, rank: usize },
    #[error("dimension mismatch: {0} vs {1}")]
    DimMismatch(usize, usize),
    #[error("rank {0} exceeds the supported maximum {MAX_RANK}")]
    RankTooHigh(usize),
    #[error("expected a symmetric (0,2) tensor; asymmetry {defect:e} exceeds tolerance")]
    NotSymmetric { defect: f64 },
    #[error("expected a {expected} tensor")]
    WrongShape { expected: &'static str },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointTensor {
    dim: usize,
    valence: Vec<Slot>,
    data: Vec<f64>,
}

impl PointTensor {
    pub fn zeros(dim: usize, valence: Vec<Slot>) -> Result<Self, TensorError> {
        let len = component_count(dim, valence.len())?;
        Ok(PointTensor {
            dim,
            valence,
            data: vec![0.0; len],
        })
    }

    pub fn from_components(dim: usize, valence: Vec<Slot>, data: Vec<f64>) -> Result<Self, TensorError> {
        let len = component_count(dim, valence.len())?;
        if data.len() != len {
            return Err(TensorError::ShapeMismatch {
                got: data.len(),
                dim,
                rank: valence.len(),
            });
        }
        Ok(PointTensor { dim, valence, data })
    }

    /// Fully covariant tensor of the given rank.
    pub fn covariant(dim: usize, rank: usize, data: Vec<f64>) -> Result<Self, TensorError> {
        Self::from_components(dim, vec![Slot::Covariant; rank], data)
    }

    pub fn scalar(value: f64) -> Self {
        PointTensor {
            dim: 1,
            valence: Vec::new(),
            data: vec![value],
        }
    }

    /// The (1,1) identity `δ^i_j`.
    pub fn identity(dim: usize) -> Self {
        let mut data = vec![0.0; dim * dim];
        for i in 0..dim {
            data[i * dim + i] = 1.0;
        }
        PointTensor {
            dim,
            valence: vec![Slot::Contravariant, Slot::Covariant],
            data,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.valence.len()
    }

    pub fn valence(&self) -> &[Slot] {
        &self.valence
    }

    pub fn components(&self) -> &[f64] {
        &self.data
    }

    pub fn components_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_components(self) -> Vec<f64> {
        self.data
    }

    fn offset(&self, index: &[usize]) -> usize {
        debug_assert_eq!(index.len(), self.rank());
        index.iter().fold(0, |acc, &i| acc * self.dim + i)
    }

    /// Component at a 0-based multi-index.
    pub fn get(&self, index: &[usize]) -> f64 {
        self.data[self.offset(index)]
    }

    pub fn set(&mut self, index: &[usize], value: f64) {
        let o = self.offset(index);
        self.data[o] = value;
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn scaled(&self, c: f64) -> PointTensor {
        PointTensor {
            dim: self.dim,
            valence: self.valence.clone(),
            data: self.data.iter().map(|x| c * x).collect(),
        }
    }

    fn same_shape(&self, other: &PointTensor) -> Result<(), TensorError> {
        if self.dim != other.dim {
            return Err(TensorError::DimMismatch(self.dim, other.dim));
        }
        if self.valence != other.valence {
            return Err(TensorError::WrongShape {
                expected: "matching valence",
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &PointTensor) -> Result<PointTensor, TensorError> {
        self.same_shape(other)?;
        Ok(PointTensor {
            dim: self.dim,
            valence: self.valence.clone(),
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn sub(&self, other: &PointTensor) -> Result<PointTensor, TensorError> {
        self.same_shape(other)?;
        Ok(PointTensor {
            dim: self.dim,
            valence: self.valence.clone(),
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        })
    }

    /// Largest `|T_ij - T_ji|` relative to the largest component.
    pub fn asymmetry(&self) -> f64 {
        if self.rank() != 2 {
            return f64::INFINITY;
        }
        let n = self.dim;
        let mut defect: f64 = 0.0;
        for i in 0..n {
            for j in 0..i {
                defect = defect.max((self.data[i * n + j] - self.data[j * n + i]).abs());
            }
        }
        defect / self.max_abs().max(f64::MIN_POSITIVE)
    }

    fn require_sym2(&self) -> Result<(), TensorError> {
        if self.valence != [Slot::Covariant, Slot::Covariant] {
            return Err(TensorError::WrongShape {
                expected: "symmetric (0,2)",
            });
        }
        let defect = self.asymmetry();
        if defect > SYMMETRY_TOL {
            return Err(TensorError::NotSymmetric { defect });
        }
        Ok(())
    }
}

fn component_count(dim: usize, rank: usize) -> Result<usize, TensorError> {
    if rank > MAX_RANK {
        return Err(TensorError::RankTooHigh(rank));
    }
    Ok(dim.pow(rank as u32))
}

/// Applies the n×n matrix `m` to one slot: `out[.., a, ..] = Σ_b m[a][b] t[.., b, ..]`.
pub(crate) fn transform_slot(data: &[f64], n: usize, rank: usize, slot: usize, m: &[f64]) -> Vec<f64> {
    let inner = n.pow((rank - slot - 1) as u32);
    let outer = n.pow(slot as u32);
    let mut out = vec![0.0; data.len()];
    for o in 0..outer {
        for a in 0..n {
            let dst = (o * n + a) * inner;
            for b in 0..n {
                let c = m[a * n + b];
                if c == 0.0 {
                    continue;
                }
                let src = (o * n + b) * inner;
                for t in 0..inner {
                    out[dst + t] += c * data[src + t];
                }
            }
        }
    }
    out
}

fn check_metric_pair(t: &PointTensor, g: &PointTensor, g_inv: &PointTensor) -> Result<(), TensorError> {
    if g.dim != t.dim || g_inv.dim != t.dim {
        return Err(TensorError::DimMismatch(t.dim, g.dim));
    }
    if g.valence != [Slot::Covariant, Slot::Covariant] {
        return Err(TensorError::WrongShape { expected: "(0,2) metric" });
    }
    if g_inv.valence != [Slot::Contravariant, Slot::Contravariant] {
        return Err(TensorError::WrongShape {
            expected: "(2,0) inverse metric",
        });
    }
    Ok(())
}

/// Lowers a contravariant slot with `g` or raises a covariant one with `g_inv`.
pub fn raise_lower(
    t: &PointTensor,
    slot: usize,
    g: &PointTensor,
    g_inv: &PointTensor,
) -> Result<PointTensor, TensorError> {
    if slot >= t.rank() {
        return Err(TensorError::SlotOutOfRange { slot, rank: t.rank() });
    }
    check_metric_pair(t, g, g_inv)?;
    let m = match t.valence[slot] {
        Slot::Covariant => &g_inv.data,
        Slot::Contravariant => &g.data,
    };
    let mut valence = t.valence.clone();
    valence[slot] = valence[slot].flipped();
    Ok(PointTensor {
        dim: t.dim,
        data: transform_slot(&t.data, t.dim, t.rank(), slot, m),
        valence,
    })
}

/// Trace over one covariant and one contravariant slot.
pub fn contract(t: &PointTensor, slot_a: usize, slot_b: usize) -> Result<PointTensor, TensorError> {
    let rank = t.rank();
    for s in [slot_a, slot_b] {
        if s >= rank {
            return Err(TensorError::SlotOutOfRange { slot: s, rank });
        }
    }
    if slot_a == slot_b || t.valence[slot_a] == t.valence[slot_b] {
        return Err(TensorError::IncompatibleValence { a: slot_a, b: slot_b });
    }
    let (lo, hi) = (slot_a.min(slot_b), slot_a.max(slot_b));
    let n = t.dim;
    let valence: Vec<Slot> = t
        .valence
        .iter()
        .enumerate()
        .filter(|&(s, _)| s != lo && s != hi)
        .map(|(_, &v)| v)
        .collect();
    let out_rank = rank - 2;
    let mut out = vec![0.0; n.pow(out_rank as u32)];
    let mut index = vec![0usize; rank];
    for (o, value) in out.iter_mut().enumerate() {
        // Spread the output index over the surviving slots.
        let mut rem = o;
        for s in (0..rank).rev() {
            if s == lo || s == hi {
                continue;
            }
            index[s] = rem % n;
            rem /= n;
        }
        let mut acc = 0.0;
        for k in 0..n {
            index[lo] = k;
            index[hi] = k;
            acc += t.get(&index);
        }
        *value = acc;
    }
    Ok(PointTensor {
        dim: n,
        valence,
        data: out,
    })
}

/// `(A⊙B)_ijkl = A_il B_jk + A_jk B_il − A_ik B_jl − A_jl B_ik`.
pub fn kulkarni_nomizu(a: &PointTensor, b: &PointTensor) -> Result<PointTensor, TensorError> {
    a.require_sym2()?;
    b.require_sym2()?;
    if a.dim != b.dim {
        return Err(TensorError::DimMismatch(a.dim, b.dim));
    }
    let n = a.dim;
    Ok(PointTensor {
        dim: n,
        valence: vec![Slot::Covariant; 4],
        data: kn_components(n, &a.data, &b.data),
    })
}

pub(crate) fn kn_components(n: usize, a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; n.pow(4)];
    let at = |m: &[f64], i: usize, j: usize| m[i * n + j];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    out[((i * n + j) * n + k) * n + l] = at(a, i, l) * at(b, j, k) + at(a, j, k) * at(b, i, l)
                        - at(a, i, k) * at(b, j, l)
                        - at(a, j, l) * at(b, i, k);
                }
            }
        }
    }
    out
}

fn require_inverse(g_inv: &PointTensor, n: usize) -> Result<(), TensorError> {
    if g_inv.dim != n {
        return Err(TensorError::DimMismatch(n, g_inv.dim));
    }
    if g_inv.valence != [Slot::Contravariant, Slot::Contravariant] {
        return Err(TensorError::WrongShape {
            expected: "(2,0) inverse metric",
        });
    }
    Ok(())
}

/// `A·B = A_ij B^ij`.
pub fn dot(a: &PointTensor, b: &PointTensor, g_inv: &PointTensor) -> Result<f64, TensorError> {
    a.require_sym2()?;
    b.require_sym2()?;
    require_inverse(g_inv, a.dim)?;
    Ok(sym2_dot(a.dim, &a.data, &b.data, &g_inv.data))
}

/// `(A×B)_ij = A_ik g^kl B_lj`.
pub fn times(a: &PointTensor, b: &PointTensor, g_inv: &PointTensor) -> Result<PointTensor, TensorError> {
    a.require_sym2()?;
    b.require_sym2()?;
    require_inverse(g_inv, a.dim)?;
    let n = a.dim;
    Ok(PointTensor {
        dim: n,
        valence: vec![Slot::Covariant; 2],
        data: sym2_times(n, &a.data, &b.data, &g_inv.data),
    })
}

/// `tr A = g^ij A_ij`.
pub fn trace(a: &PointTensor, g_inv: &PointTensor) -> Result<f64, TensorError> {
    a.require_sym2()?;
    require_inverse(g_inv, a.dim)?;
    Ok(sym2_trace(a.dim, &a.data, &g_inv.data))
}

/// `tr A³ = A_ij A^j_k A^ki`.
pub fn cube_trace(a: &PointTensor, g_inv: &PointTensor) -> Result<f64, TensorError> {
    a.require_sym2()?;
    require_inverse(g_inv, a.dim)?;
    let n = a.dim;
    let a2 = sym2_times(n, &a.data, &a.data, &g_inv.data);
    Ok(sym2_dot(n, &a2, &a.data, &g_inv.data))
}

/// `Å = A − (tr A / n) g`.
pub fn traceless(a: &PointTensor, g: &PointTensor, g_inv: &PointTensor) -> Result<PointTensor, TensorError> {
    a.require_sym2()?;
    check_metric_pair(a, g, g_inv)?;
    let n = a.dim;
    let t = sym2_trace(n, &a.data, &g_inv.data) / n as f64;
    Ok(PointTensor {
        dim: n,
        valence: a.valence.clone(),
        data: a.data.iter().zip(&g.data).map(|(x, gij)| x - t * gij).collect(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sym2Ops {
    pub dot: f64,
    pub times: PointTensor,
    pub trace: f64,
    pub cube_trace: f64,
    pub traceless: PointTensor,
}

/// All symmetric-2-tensor operations at once: `dot` and `times` pair `A`
/// with `B`; `trace`, `cube_trace` and `traceless` apply to `A`.
pub fn sym2_ops(
    a: &PointTensor,
    b: &PointTensor,
    g: &PointTensor,
    g_inv: &PointTensor,
) -> Result<Sym2Ops, TensorError> {
    Ok(Sym2Ops {
        dot: dot(a, b, g_inv)?,
        times: times(a, b, g_inv)?,
        trace: trace(a, g_inv)?,
        cube_trace: cube_trace(a, g_inv)?,
        traceless: traceless(a, g, g_inv)?,
    })
}

/// Full squared norm: every slot is brought to covariant form and contracted
/// against `g^{-1}`.
pub fn norm_sq(t: &PointTensor, g: &PointTensor, g_inv: &PointTensor) -> Result<f64, TensorError> {
    check_metric_pair(t, g, g_inv)?;
    let n = t.dim;
    let rank = t.rank();
    let mut lowered = t.data.clone();
    for (s, v) in t.valence.iter().enumerate() {
        if *v == Slot::Contravariant {
            lowered = transform_slot(&lowered, n, rank, s, &g.data);
        }
    }
    Ok(covariant_norm_sq(n, rank, &lowered, &g_inv.data))
}

// Flat kernels shared with the geometry pipeline.

pub(crate) fn covariant_norm_sq(n: usize, rank: usize, t: &[f64], g_inv: &[f64]) -> f64 {
    let mut raised = t.to_vec();
    for s in 0..rank {
        raised = transform_slot(&raised, n, rank, s, g_inv);
    }
    let v: f64 = raised.iter().zip(t).map(|(a, b)| a * b).sum();
    v.max(0.0)
}

pub(crate) fn sym2_dot(n: usize, a: &[f64], b: &[f64], g_inv: &[f64]) -> f64 {
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            let mut bij = 0.0;
            for k in 0..n {
                for l in 0..n {
                    bij += g_inv[i * n + k] * g_inv[j * n + l] * b[k * n + l];
                }
            }
            acc += a[i * n + j] * bij;
        }
    }
    acc
}

pub(crate) fn sym2_times(n: usize, a: &[f64], b: &[f64], g_inv: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let mut acc = 0.0;
            for k in 0..n {
                for l in 0..n {
                    acc += a[i * n + k] * g_inv[k * n + l] * b[l * n + j];
                }
            }
            out[i * n + j] = acc;
        }
    }
    out
}

pub(crate) fn sym2_trace(n: usize, a: &[f64], g_inv: &[f64]) -> f64 {
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            acc += g_inv[i * n + j] * a[i * n + j];
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn euclid(n: usize) -> (PointTensor, PointTensor) {
        let mut g = PointTensor::zeros(n, vec![Slot::Covariant; 2]).unwrap();
        let mut gi = PointTensor::zeros(n, vec![Slot::Contravariant; 2]).unwrap();
        for i in 0..n {
            g.set(&[i, i], 1.0);
            gi.set(&[i, i], 1.0);
        }
        (g, gi)
    }

    #[test]
    fn kn_of_identity() {
        let (g, _) = euclid(4);
        let gg = kulkarni_nomizu(&g, &g).unwrap();
        assert_eq!(gg.get(&[0, 1, 0, 1]), -2.0);
        assert_eq!(gg.get(&[0, 1, 1, 0]), 2.0);
    }

    #[test]
    fn contract_identity_gives_dim() {
        let t = contract(&PointTensor::identity(5), 0, 1).unwrap();
        assert_eq!(t.rank(), 0);
        assert_eq!(t.components(), &[5.0]);
    }

    #[test]
    fn contract_rejects_same_valence() {
        let (g, _) = euclid(3);
        assert!(matches!(contract(&g, 0, 1), Err(TensorError::IncompatibleValence { .. })));
        assert!(matches!(contract(&g, 0, 2), Err(TensorError::SlotOutOfRange { .. })));
    }

    #[test]
    fn raise_lower_on_sphere_metric() {
        let th = std::f64::consts::FRAC_PI_3;
        let s2 = th.sin().powi(2);
        let g = PointTensor::covariant(2, 2, vec![1.0, 0.0, 0.0, s2]).unwrap();
        let gi = PointTensor::from_components(2, vec![Slot::Contravariant; 2], vec![1.0, 0.0, 0.0, 1.0 / s2]).unwrap();
        let mixed = raise_lower(&g, 0, &g, &gi).unwrap();
        assert_eq!(mixed.valence(), &[Slot::Contravariant, Slot::Covariant]);
        for i in 0..2 {
            for j in 0..2 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((mixed.get(&[i, j]) - want).abs() < 1e-15);
            }
        }
        let lowered = raise_lower(&raise_lower(&gi, 0, &g, &gi).unwrap(), 1, &g, &gi).unwrap();
        for (a, b) in lowered.components().iter().zip(g.components()) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!(matches!(raise_lower(&g, 2, &g, &gi), Err(TensorError::SlotOutOfRange { .. })));
    }

    #[test]
    fn sym2_basics() {
        let (g, gi) = euclid(4);
        let ops = sym2_ops(&g, &g, &g, &gi).unwrap();
        assert_eq!(ops.dot, 4.0);
        assert_eq!(ops.trace, 4.0);
        assert!(ops.traceless.max_abs() == 0.0);
        assert_eq!(norm_sq(&g, &g, &gi).unwrap(), 4.0);
    }

    #[test]
    fn eigenvalue_arithmetic() {
        let (g, gi) = euclid(4);
        let e = PointTensor::covariant(
            4,
            2,
            vec![-3.0, 0., 0., 0., 0., 1.0, 0., 0., 0., 0., 1.0, 0., 0., 0., 0., 1.0],
        )
        .unwrap();
        assert_eq!(cube_trace(&e, &gi).unwrap(), -24.0);
        assert_eq!(dot(&e, &e, &gi).unwrap(), 12.0);
        assert_eq!(traceless(&e, &g, &gi).unwrap(), e);
    }

    #[test]
    fn asymmetric_input_rejected() {
        let a = PointTensor::covariant(2, 2, vec![1.0, 2.0, 2.5, 1.0]).unwrap();
        let (g, _) = euclid(2);
        assert!(matches!(kulkarni_nomizu(&a, &g), Err(TensorError::NotSymmetric { .. })));
    }
}
