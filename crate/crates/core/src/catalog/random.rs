//! Seeded random symmetric 2-tensors and scalar functions.
//!
//! On products of round spheres and circles the fields are built from the
//! ambient coordinates `Y`:
//!
//! ```text
//! h = Σ_{r<n} c_r(Y) dφ_r²,  φ_r = a_r · Y,  |a_r| = 1
//! ```
//!
//! with `c_r` a polynomial of degree at most `bandwidth` whose coefficients
//! are uniform in `[−1, 1]`. They are smooth on the whole manifold and
//! can be evaluated in every polar chart. Elsewhere the fields are
//! trigonometric polynomials in the chart coordinates with frequencies
//! `|k|₁ ≤ bandwidth`. Open axes carry a `sin²` bump so the field vanishes
//! at their ends.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::expr::{Expr, Expression};
use crate::geometry::SymmetricField;
use crate::jets::ElementaryFn;
use crate::quadrature::Boundary;

use super::charts::{add, call, mul, num, pow, sum, var, Poly, ScalarTerm, SymTerm, Terms};
use super::{CatalogError, ChartManifold, Charted, ScalarFunction, TensorField};

fn check(bandwidth: usize, amplitude: f64) -> Result<(), CatalogError> {
    if bandwidth > 8 {
        return Err(CatalogError::InvalidParameter(format!("bandwidth {bandwidth} exceeds 8")));
    }
    if !amplitude.is_finite() || amplitude < 0.0 {
        return Err(CatalogError::InvalidParameter(format!(
            "amplitude must be finite and non-negative, got {amplitude}"
        )));
    }
    Ok(())
}

// Exponent vectors in `vars` variables with total degree ≤ `deg`.
fn monomials(vars: usize, deg: usize) -> Vec<Vec<u8>> {
    fn rec(vars: usize, left: usize, cur: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
        if cur.len() == vars {
            out.push(cur.clone());
            return;
        }
        for p in 0..=left {
            cur.push(p as u8);
            rec(vars, left - p, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(vars, deg, &mut Vec::new(), &mut out);
    out
}

// Polynomial with `Σ |c_α| ≤ scale`, so `|p(Y)| ≤ scale` for `|Y_A| ≤ 1`.
fn random_poly(rng: &mut ChaCha8Rng, vars: usize, deg: usize, scale: f64) -> Poly {
    let exps = monomials(vars, deg);
    let m = exps.len() as f64;
    Poly {
        terms: exps.into_iter().map(|e| (scale * rng.gen_range(-1.0..=1.0) / m, e)).collect(),
    }
}

fn unit_vector(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        let r = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if r > 0.1 && r <= 1.0 {
            return v.into_iter().map(|x| x / r).collect();
        }
    }
}

// Frequency vectors with |k|₁ ≤ bw: the zero vector plus one of each ±k pair.
fn frequencies(n: usize, bw: usize) -> Vec<Vec<i32>> {
    fn rec(n: usize, left: i32, cur: &mut Vec<i32>, out: &mut Vec<Vec<i32>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for k in -left..=left {
            cur.push(k);
            rec(n, left - k.abs(), cur, out);
            cur.pop();
        }
    }
    let mut all = Vec::new();
    rec(n, bw as i32, &mut Vec::new(), &mut all);
    all.retain(|k| k.iter().find(|&&c| c != 0).is_none_or(|&c| c > 0));
    all
}

// Chart phases: 2π(x − min)/L on periodic axes, π(x − min)/L on open ones.
fn phase(m: &ChartManifold, axis: usize) -> Expr {
    let a = m.axes()[axis];
    let w = match a.boundary {
        Boundary::Periodic => 2.0 * std::f64::consts::PI / a.length(),
        Boundary::Open => std::f64::consts::PI / a.length(),
    };
    let shifted = if a.min == 0.0 {
        var(axis)
    } else {
        add(var(axis), num(-a.min))
    };
    mul(num(w), shifted)
}

// Σ_k (a_k cos k·u + b_k sin k·u) · amplitude / #k, times the open-axis bump.
fn random_trig(rng: &mut ChaCha8Rng, m: &ChartManifold, bw: usize, amplitude: f64) -> Expr {
    let n = m.dim();
    let ks = frequencies(n, bw);
    let scale = amplitude / ks.len() as f64;
    let phases: Vec<Expr> = (0..n).map(|i| phase(m, i)).collect();
    let mut parts = Vec::new();
    for k in &ks {
        let arg = sum(k
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0)
            .map(|(i, &c)| if c == 1 { phases[i].clone() } else { mul(num(c as f64), phases[i].clone()) })
            .collect());
        let a = scale * rng.gen_range(-1.0..=1.0);
        let b = scale * rng.gen_range(-1.0..=1.0);
        match arg {
            None => parts.push(num(a)),
            Some(arg) => {
                parts.push(mul(num(a), call(ElementaryFn::Cos, arg.clone())));
                parts.push(mul(num(b), call(ElementaryFn::Sin, arg)));
            }
        }
    }
    let mut e = sum(parts).expect("the zero frequency is always present");
    for (i, a) in m.axes().iter().enumerate() {
        if a.boundary == Boundary::Open {
            e = mul(e, pow(call(ElementaryFn::Sin, phases[i].clone()), 2));
        }
    }
    e
}

/// A seeded random symmetric 2-tensor with pointwise norm at most
/// `amplitude` (measured in the unit product metric on sphere and circle
/// factors).
pub fn random_symmetric_field(
    m: &ChartManifold,
    seed: u64,
    bandwidth: usize,
    amplitude: f64,
) -> Result<TensorField, CatalogError> {
    check(bandwidth, amplitude)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let family = m.metric_family().family().clone();
    let n = m.dim();
    let field = if family.has_spheres() && family.fully_embedded() {
        let d = family.ambient_dim;
        let terms = (0..n)
            .map(|_| {
                let a = unit_vector(&mut rng, d);
                let poly = random_poly(&mut rng, d, bandwidth, amplitude / n as f64);
                SymTerm::Ambient { poly, a: a.clone(), b: a }
            })
            .collect();
        Charted::new(family, Terms::Sym(terms))?
    } else {
        let mut comps = Vec::with_capacity(n * (n + 1) / 2);
        for _ in 0..n * (n + 1) / 2 {
            comps.push(Expression::new(random_trig(&mut rng, m, bandwidth, amplitude / n as f64), n));
        }
        let f = SymmetricField::new(n, comps)?;
        Charted::new(Arc::clone(&family), Terms::Sym(vec![SymTerm::Fixed(f)]))?
    };
    Ok(field.with_seed(seed))
}

/// A seeded random positive function `1 + amplitude · p` with `|p| ≤ 1`.
pub fn random_scalar_field(
    m: &ChartManifold,
    seed: u64,
    bandwidth: usize,
    amplitude: f64,
) -> Result<ScalarFunction, CatalogError> {
    check(bandwidth, amplitude)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let family = m.metric_family().family().clone();
    let n = m.dim();
    let term = if family.has_spheres() && family.fully_embedded() {
        let mut p = random_poly(&mut rng, family.ambient_dim, bandwidth, amplitude);
        let zero = vec![0u8; family.ambient_dim];
        match p.terms.iter_mut().find(|(_, e)| *e == zero) {
            Some(t) => t.0 += 1.0,
            None => p.terms.push((1.0, zero)),
        }
        ScalarTerm::Ambient(p)
    } else {
        let e = add(num(1.0), random_trig(&mut rng, m, bandwidth, amplitude));
        ScalarTerm::Fixed(Expression::new(e, n))
    };
    Ok(Charted::new(family, Terms::Scalar(vec![term]))?.with_seed(seed))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frequency_half_space() {
        let ks = frequencies(2, 1);
        assert_eq!(ks, vec![vec![0, 0], vec![0, 1], vec![1, 0]]);
        assert_eq!(frequencies(3, 2).len(), (1 + 6 + 18) / 2 + 1);
    }

    #[test]
    fn monomial_count() {
        assert_eq!(monomials(5, 2).len(), 21);
    }
}
