use curvature::catalog::builtin;
use curvature::expr::{parse, Expression};
use curvature::geometry::{
    christoffel, covariant_derivative, curvature_frame, divergence_delta, lemma22_integrands, q_curvature, riemann,
    rough_laplacian, theta_codazzi, tri_index, weyl_divergence, weyl_quadratic, weyl_quadratic_components, FieldRef,
    GeometryError, MetricField, ScalarField, SymmetricField,
};
use curvature::tensor::{kulkarni_nomizu, PointTensor};

const P4: [f64; 4] = [1.1, 0.8, 2.0, 2.5];
const P5: [f64; 5] = [1.1, 0.8, 2.0, 1.3, 2.5];

fn sym(n: usize, entries: &[(usize, usize, &str)]) -> Vec<Expression> {
    let mut c = vec![Expression::constant(0.0, n); n * (n + 1) / 2];
    for &(i, j, text) in entries {
        c[tri_index(i, j)] = parse(text, n).unwrap();
    }
    c
}

fn flat(n: usize) -> MetricField {
    let diag: Vec<(usize, usize, &str)> = (0..n).map(|i| (i, i, "1")).collect();
    MetricField::new(n, sym(n, &diag)).unwrap()
}

fn field(n: usize, entries: &[(usize, usize, &str)]) -> SymmetricField {
    SymmetricField::new(n, sym(n, entries)).unwrap()
}

fn unit_s2() -> MetricField {
    MetricField::new(2, sym(2, &[(0, 0, "1"), (1, 1, "sin(x1)^2")])).unwrap()
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn max_diff(a: &PointTensor, b: &PointTensor) -> f64 {
    a.components().iter().zip(b.components()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn point(m: &curvature::catalog::ChartManifold) -> Vec<f64> {
    if m.dim() == 4 {
        P4.to_vec()
    } else if m.dim() == 5 {
        P5.to_vec()
    } else {
        vec![1.1, 0.8, 2.5]
    }
}

#[test]
fn christoffel_on_the_sphere() {
    let t = std::f64::consts::PI / 3.0;
    let g = christoffel(&unit_s2(), &[t, 0.4]).unwrap();
    assert!((g.get(&[0, 1, 1]) + 3f64.sqrt() / 4.0).abs() < 1e-15);
    // Γ^φ_θφ = cot θ.
    assert!((g.get(&[1, 0, 1]) - 1.0 / t.tan()).abs() < 1e-15);
    assert!((g.get(&[1, 1, 0]) - 1.0 / t.tan()).abs() < 1e-15);
    assert_eq!(christoffel(&flat(4), &P4).unwrap().max_abs(), 0.0);
    let scaled = christoffel(&unit_s2().scaled(7.0).unwrap(), &[t, 0.4]).unwrap();
    assert!(max_diff(&scaled, &g) < 1e-15);
}

#[test]
fn singular_metric_names_the_point() {
    match christoffel(&unit_s2(), &[0.0, 1.0]) {
        Err(GeometryError::Singular { point } | GeometryError::NotPositiveDefinite { point }) => {
            assert_eq!(point, vec![0.0, 1.0])
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn einstein_spheres() {
    for id in ["s3", "s4", "s5"] {
        let m = builtin(id).unwrap();
        let n = m.dim();
        let f = m.frame_at(&point(&m), 4).unwrap();
        let expected = f.g.scaled(n as f64 - 1.0);
        assert!(max_diff(&f.ricci, &expected) < 1e-12, "{id}");
        assert!((f.scalar - (n * (n - 1)) as f64).abs() < 1e-12, "{id}");
        assert!((f.lambda - 1.0).abs() < 1e-13);
        assert!(f.weyl.max_abs() < 1e-12 && f.cotton.max_abs() < 1e-12 && f.bach.max_abs() < 1e-12, "{id}");
        // Rm = λ (g_ad g_bc − g_ac g_bd) = (λ/2) g⊙g.
        let gg = kulkarni_nomizu(&f.g, &f.g).unwrap().scaled(0.5);
        assert!(max_diff(&f.riemann, &gg) < 1e-12, "{id}");
    }
}

#[test]
fn flat_torus_is_flat() {
    let m = flat(4);
    assert_eq!(riemann(&m, &P4).unwrap().max_abs(), 0.0);
    assert_eq!(weyl_divergence(&m, &P4).unwrap().max_abs(), 0.0);
    assert_eq!(q_curvature(&m, &P4).unwrap(), 0.0);
}

#[test]
fn product_of_two_spheres() {
    let m = builtin("s2xs2").unwrap();
    let f = m.frame_at(&P4, 4).unwrap();
    assert!(max_diff(&f.ricci, &f.g) < 1e-12);
    assert!((f.scalar - 4.0).abs() < 1e-12);
    assert!((f.q_curvature.unwrap() - 2.0 / 3.0).abs() < 1e-12);
    assert!((f.norm_sq(&f.weyl) - 16.0 / 3.0).abs() < 1e-11);
    assert!(f.nabla_weyl.max_abs() < 1e-12);
    assert!(f.weyl_laplacian.as_ref().unwrap().max_abs() < 1e-8);
}

#[test]
fn q_curvature_examples() {
    let s4 = builtin("s4").unwrap();
    assert!((q_curvature(s4.metric(), &P4).unwrap() - 6.0).abs() < 1e-12);
    let s1s3 = builtin("s1xs3").unwrap();
    let f = s1s3.frame_at(&P4, 4).unwrap();
    assert!((f.norm_sq(&f.traceless_ricci) - 3.0).abs() < 1e-12);
    assert!(f.q_curvature.unwrap().abs() < 1e-12);
    assert!(f.weyl.max_abs() < 1e-12 && f.cotton.max_abs() < 1e-12 && f.bach.max_abs() < 1e-12);
    assert!(matches!(q_curvature(builtin("s3").unwrap().metric(), &[1.0, 1.0, 1.0]), Err(GeometryError::NotFourDimensional(3))));
}

#[test]
fn parallel_ricci_on_s1xs3() {
    let m = builtin("s1xs3").unwrap();
    let f = m.frame_at(&P4, 4).unwrap();
    assert!(f.nabla_traceless_ricci.max_abs() < 1e-12);
    assert!(f.delta_traceless_ricci.max_abs() < 1e-12);
}

#[test]
fn weyl_equation_sign() {
    // Q(W) = −3W on the product of two 2-spheres with λ = 1.
    let m = builtin("s2xs2_r12").unwrap();
    let qw = weyl_quadratic(m.metric(), &P4).unwrap();
    let f = m.frame_at(&P4, 4).unwrap();
    assert!((f.lambda - 1.0).abs() < 1e-12);
    assert!((f.norm_sq(&f.weyl) - 48.0).abs() < 1e-9);
    assert!(max_diff(&qw, &f.weyl.scaled(-3.0)) < 1e-10);
    // The same sign closes the equation on every Einstein entry with W ≠ 0.
    for id in ["s2xs2_r12", "s2xs2", "s3xs2"] {
        let m = builtin(id).unwrap();
        let f = m.frame_at(&point(&m), 4).unwrap();
        assert!(f.weyl_equation_residual().unwrap().max_abs() < 1e-8, "{id}");
    }
}

#[test]
fn weyl_quadratic_is_quadratic() {
    let m = builtin("s2xs2").unwrap();
    let f = m.frame_at(&P4, 4).unwrap();
    let n = 4;
    let w = f.weyl.components();
    let gi = f.g_inv.components();
    let q1 = weyl_quadratic_components(n, w, gi);
    let w2: Vec<f64> = w.iter().map(|x| 2.0 * x).collect();
    let q2 = weyl_quadratic_components(n, &w2, gi);
    for (a, b) in q1.iter().zip(&q2) {
        assert!((4.0 * a - b).abs() < 1e-12);
    }
    let s4 = builtin("s4").unwrap();
    assert!(weyl_quadratic(s4.metric(), &P4).unwrap().max_abs() < 1e-12);
}

#[test]
fn metric_compatibility() {
    for id in ["s3", "s4", "s2xs2", "s1xs3", "s3xs2", "s4_perturbed", "s1xs3_perturbed"] {
        let m = builtin(id).unwrap();
        let p = point(&m);
        let ng = covariant_derivative(m.metric(), FieldRef::Symmetric(m.metric().as_field()), &p).unwrap();
        assert!(ng.max_abs() < 1e-11, "{id}: {}", ng.max_abs());
        let dg = divergence_delta(m.metric(), m.metric().as_field(), &p).unwrap();
        assert!(dg.max_abs() < 1e-11, "{id}");
        let cg = theta_codazzi(m.metric(), m.metric().as_field(), 0.7, &p).unwrap();
        assert!(cg.max_abs() < 1e-11, "{id}");
    }
}

#[test]
fn torus_test_field() {
    let m = flat(4);
    let h = field(4, &[(0, 1, "sin(x1)")]);
    let p = [0.7f64, 0.3, 1.9, 4.0];
    let c = p[0].cos();
    let nh = covariant_derivative(&m, FieldRef::Symmetric(&h), &p).unwrap();
    assert_eq!(nh.get(&[0, 0, 1]), c);
    assert_eq!(nh.get(&[0, 1, 0]), c);
    assert_eq!(nh.max_abs(), c.abs());
    let d = divergence_delta(&m, &h, &p).unwrap();
    assert_eq!(d.components(), &[0.0, -c, 0.0, 0.0]);
    let ct = theta_codazzi(&m, &h, 2.0, &p).unwrap();
    let sq: f64 = ct.components().iter().map(|x| x * x).sum();
    assert!((sq - 6.0 * c * c).abs() < 1e-15);
    for theta in [-1.0, 0.0, 0.5, 1.0, 2.0] {
        let r = lemma22_integrands(&m, &h, theta, &p).unwrap();
        let want = 2.0 * theta / (1.0 + theta * theta) * c * c;
        assert!((r.lhs - want).abs() < 1e-15 && (r.rhs - want).abs() < 1e-15, "θ={theta}");
    }
}

#[test]
fn laplacians() {
    let m = flat(4);
    let s = ScalarField::new(parse("sin(x1)", 4).unwrap());
    let l = rough_laplacian(&m, FieldRef::Scalar(&s), &P4).unwrap();
    assert!((l.components()[0] + P4[0].sin()).abs() < 1e-15);
    let c = ScalarField::new(Expression::constant(3.0, 4));
    let s4 = builtin("s4").unwrap();
    assert!(rough_laplacian(s4.metric(), FieldRef::Scalar(&c), &P4).unwrap().max_abs() < 1e-15);
    // Δ of the first ambient coordinate cos θ₁ on the unit 4-sphere is −4 cos θ₁.
    let x = ScalarField::new(parse("cos(x1)", 4).unwrap());
    let l = rough_laplacian(s4.metric(), FieldRef::Scalar(&x), &P4).unwrap();
    assert!((l.components()[0] + 4.0 * P4[0].cos()).abs() < 1e-12);
}

#[test]
fn metric_is_the_identity_for_the_lemma() {
    let m = builtin("s4_perturbed").unwrap();
    for theta in [-1.0, 0.5, 2.0] {
        let r = lemma22_integrands(m.metric(), m.metric().as_field(), theta, &P4).unwrap();
        assert!(r.lhs.abs() < 1e-11 && r.rhs.abs() < 1e-11);
    }
}

#[test]
fn perturbed_sphere_identities() {
    let m = builtin("s4_perturbed").unwrap();
    let n = 4;
    let nf = n as f64;
    for p in [P4, [0.4, 2.2, 1.3, 5.0], [2.7, 1.5, 0.6, 0.1]] {
        let f = m.frame_at(&p, 4).unwrap();
        assert!(f.norm(&f.weyl) > 1e-3, "|W| = {}", f.norm(&f.weyl));
        // Decomposition roundtrip.
        let eg = kulkarni_nomizu(&f.traceless_ricci, &f.g).unwrap().scaled(1.0 / (nf - 2.0));
        let gg = kulkarni_nomizu(&f.g, &f.g).unwrap().scaled(f.scalar / (2.0 * nf * (nf - 1.0)));
        let rebuilt = f.weyl.add(&eg).unwrap().add(&gg).unwrap();
        assert!(max_diff(&rebuilt, &f.riemann) < 1e-10);
        // Weyl is trace-free in every pair of slots.
        let gi = f.g_inv.components();
        let w = f.weyl.components();
        for (s1, s2) in [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)] {
            let mut worst = 0.0f64;
            for a in 0..n {
                for b in 0..n {
                    let mut acc = 0.0;
                    for i in 0..n {
                        for j in 0..n {
                            let mut idx = [0; 4];
                            let free: Vec<usize> = (0..4).filter(|&s| s != s1 && s != s2).collect();
                            idx[s1] = i;
                            idx[s2] = j;
                            idx[free[0]] = a;
                            idx[free[1]] = b;
                            acc += gi[i * n + j] * w[((idx[0] * n + idx[1]) * n + idx[2]) * n + idx[3]];
                        }
                    }
                    worst = worst.max(acc.abs());
                }
            }
            assert!(worst < 1e-10, "slots {s1},{s2}: {worst}");
        }
        // Traceless Ricci, Cotton antisymmetry, Bach symmetry.
        assert!(curvature::tensor::trace(&f.traceless_ricci, &f.g_inv).unwrap().abs() < 1e-10);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    assert!((f.cotton.get(&[i, j, k]) + f.cotton.get(&[j, i, k])).abs() < 1e-10);
                }
                assert!((f.bach.get(&[i, j]) - f.bach.get(&[j, i])).abs() < 1e-9);
            }
        }
        // Two independent routes to Bach.
        assert!(max_diff(&f.bach, &f.bach_alt) <= 1e-8 * (1.0 + f.bach.max_abs()));
        // ∇^l W_ijkl = (n−3) C_ijk.
        let c = f.cotton.scaled(nf - 3.0);
        assert!(max_diff(&f.weyl_divergence, &c) < 1e-8);
    }
}

#[test]
fn kato_pointwise() {
    let m = builtin("s1xs3_perturbed").unwrap();
    for p in [P4, [0.4, 2.2, 1.3, 5.0], [5.7, 1.5, 0.6, 0.1]] {
        let f = m.frame_at(&p, 4).unwrap();
        let (a, b) = f.kato(1e-6).expect("|E| ≈ √3 here");
        assert!(a <= b + 1e-8, "{a} > {b}");
    }
    let s4 = builtin("s4").unwrap();
    assert!(s4.frame_at(&P4, 4).unwrap().kato(1e-6).is_none());
}

#[test]
fn frame_needs_order_four() {
    let m = builtin("s4").unwrap();
    assert!(matches!(
        curvature_frame(m.metric(), &P4, 3),
        Err(GeometryError::OrderExhausted { needed: 4, available: 3 })
    ));
    let f6 = curvature_frame(m.metric(), &P4, 6).unwrap();
    assert!((f6.q_curvature.unwrap() - 6.0).abs() < 1e-12);
    assert!(max_abs(f6.bach.components()) < 1e-12);
}
