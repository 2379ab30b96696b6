use std::f64::consts::PI;

use curvature::catalog::{builtin, sphere_yamabe, ChartManifold};
use curvature::expr::{parse, Expression};
use curvature::geometry::{tri_index, SymmetricField};
use curvature::verify::{gap_constants, CheckId, Status, Verdict, Verifier, VerifyConfig, VerifyError};
use proptest::prelude::*;

fn alpha_s4() -> f64 {
    8.0 * 6f64.sqrt() * PI
}

fn run(m: &ChartManifold, grid: usize, alpha0: Option<f64>, checks: &[CheckId]) -> Vec<Verdict> {
    let cfg = VerifyConfig {
        grid: vec![grid],
        alpha0,
        ..Default::default()
    };
    Verifier::new(m, cfg).unwrap().run(checks).unwrap()
}

fn one(m: &ChartManifold, grid: usize, alpha0: Option<f64>, check: CheckId) -> Verdict {
    let mut v = run(m, grid, alpha0, &[check]);
    assert_eq!(v.len(), 1);
    v.pop().unwrap()
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + b.abs())
}

#[test]
fn gap_constant_table() {
    let c = gap_constants(3, 1.0, None).unwrap();
    assert_eq!(c.epsilon0, 0.5);
    assert_eq!(c.lambda_n, 1.0);
    let c = gap_constants(10, 90.0, None).unwrap();
    assert!((c.tau0 - 3.0 / 32.0).abs() < 1e-16);
    assert!((c.delta0 - 0.25).abs() < 1e-16);
    assert_eq!(c.epsilon0, 2.25);
    assert_eq!(c.theorem_c_threshold, None);
    let a = alpha_s4();
    let c = gap_constants(4, a, Some(0)).unwrap();
    assert!(close(c.theorem_c_threshold.unwrap(), a / 192.0 - 64.0 * PI * PI / 3.0, 1e-15));
    assert!(matches!(gap_constants(2, 1.0, None), Err(VerifyError::Dimension(2))));
}

proptest! {
    #[test]
    fn gap_constants_scale_with_alpha0(n in 3usize..=8, a in 0.1f64..200.0, b in 0.1f64..200.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let x = gap_constants(n, lo, Some(2)).unwrap();
        let y = gap_constants(n, hi, Some(2)).unwrap();
        prop_assert!(x.tau0 <= y.tau0 && x.delta0 <= y.delta0);
        prop_assert!(x.sobolev_constant >= y.sobolev_constant);
        prop_assert_eq!(x.epsilon0, y.epsilon0);
        prop_assert!(x.epsilon0 <= x.lambda_n);
        prop_assert!((x.tau0 * x.sobolev_constant - 0.125).abs() < 1e-14);
        prop_assert!((x.delta0 / x.tau0 - 8.0 / 3.0).abs() < 1e-13);
    }
}

#[test]
fn check_ids() {
    assert_eq!(CheckId::parse("thmB").unwrap(), vec![CheckId::ThmB]);
    assert!(matches!(CheckId::parse("thm-b"), Err(VerifyError::UnknownCheck(_))));
    let all = CheckId::parse_list(&["all".to_string()]).unwrap();
    assert_eq!(all, CheckId::ALL.to_vec());
    let l = CheckId::parse_list(&["gbc", "lemma22", "gbc"]).unwrap();
    assert_eq!(l, vec![CheckId::Lemma22, CheckId::Gbc]);
}

#[test]
fn config_validation() {
    let m = builtin("s4").unwrap();
    let bad = |cfg: VerifyConfig| Verifier::new(&m, cfg).err().expect("rejected");
    assert!(matches!(bad(VerifyConfig { jet_order: 3, ..Default::default() }), VerifyError::JetOrder { got: 3, need: 4 }));
    assert!(matches!(bad(VerifyConfig { grid: vec![8, 8], ..Default::default() }), VerifyError::Grid { got: 2, dim: 4 }));
    assert!(bad(VerifyConfig { grid: vec![2], ..Default::default() }).to_string().contains('2'));
    assert!(matches!(bad(VerifyConfig { tol: Some(-1.0), ..Default::default() }), VerifyError::Tolerance(_)));
    assert!(matches!(bad(VerifyConfig { thetas: vec![f64::NAN], ..Default::default() }), VerifyError::Theta(_)));
    assert!(matches!(bad(VerifyConfig { alpha0: Some(0.0), ..Default::default() }), VerifyError::Alpha0(_)));
    let h = builtin("s3").unwrap().factor_combination(&[1.0]).unwrap();
    assert!(matches!(bad(VerifyConfig { h: Some(h), ..Default::default() }), VerifyError::FieldDimension { got: 3, dim: 4 }));
    let ok = Verifier::new(&m, VerifyConfig { grid: vec![5, 6, 7, 8], ..Default::default() }).unwrap();
    assert_eq!(ok.grid_spec().counts(), &[5, 6, 7, 8]);
}

// h_12 = sin x1 on the flat torus: both sides equal (2θ/(1+θ²)) ∫cos²x1.
#[test]
fn lemma_on_the_torus_with_a_hand_field() {
    let m = builtin("t4").unwrap();
    let mut comps = vec![Expression::constant(0.0, 4); 10];
    comps[tri_index(0, 1)] = parse("sin(x1)", 4).unwrap();
    let h = m.tensor_field(SymmetricField::new(4, comps).unwrap()).unwrap();
    let thetas = vec![-1.0, 0.5, 1.0, 2.0];
    let cfg = VerifyConfig {
        grid: vec![6],
        thetas: thetas.clone(),
        h: Some(h),
        ..Default::default()
    };
    let mut v = Verifier::new(&m, cfg).unwrap();
    let lemma = v.run(&[CheckId::Lemma22]).unwrap();
    let codazzi = v.run(&[CheckId::CodazziIneq]).unwrap();
    let integral = 0.5 * (2.0 * PI).powi(4);
    for (i, t) in thetas.iter().enumerate() {
        let want = 2.0 * t / (1.0 + t * t) * integral;
        assert_eq!(lemma[i].status, Status::Pass);
        assert_eq!(lemma[i].value("theta"), Some(*t));
        assert!(close(lemma[i].value("lhs").unwrap(), want, 1e-12));
        assert!(close(lemma[i].value("rhs").unwrap(), want, 1e-12));
        assert!(close(lemma[i].value("grad_sq").unwrap(), 2.0 * integral, 1e-12));
        let c = &codazzi[i];
        assert_eq!(c.status, Status::Pass);
        let slack = c.value("slack").unwrap();
        assert!(slack >= 0.0);
        assert!(close(slack, c.value("codazzi_sq").unwrap(), 1e-12));
    }
}

#[test]
fn lemma_with_seeded_fields() {
    for id in ["s4", "s1xs3", "s4_perturbed"] {
        let m = builtin(id).unwrap();
        for v in run(&m, 12, None, &[CheckId::Lemma22, CheckId::CodazziIneq]) {
            assert_eq!(v.status, Status::Pass, "{id}: {v:?}");
            assert_eq!(v.grid, vec![12; 4]);
            assert_eq!(v.jet_order, 4);
        }
    }
    let s3 = builtin("s3").unwrap();
    assert!(run(&s3, 12, None, &[CheckId::Lemma22]).iter().all(|v| v.status == Status::Pass));
}

#[test]
fn eq31_cases() {
    // On S¹×S³ with R = 12 both sides vanish: ∇E = 0 and −(n/(n−2)) tr E³ = n|E|².
    let v = one(&builtin("s1xs3_r12").unwrap(), 6, None, CheckId::Eq31);
    assert_eq!(v.status, Status::Pass);
    assert!(v.value("lhs").unwrap().abs() < 1e-9);
    assert!(v.value("rhs_integrand_max").unwrap() < 1e-9);
    let v = one(&builtin("s2xs2_r12").unwrap(), 6, None, CheckId::Eq31);
    assert_eq!(v.status, Status::Pass);
    let v = one(&builtin("s2xs2").unwrap(), 6, None, CheckId::Eq31);
    assert_eq!(v.status, Status::Skipped("R ≠ n(n−1)".into()));
    let v = one(&builtin("s4_perturbed").unwrap(), 5, None, CheckId::Eq31);
    assert_eq!(v.status, Status::Skipped("not Bach-flat".into()));
}

#[test]
fn weyl_equation_cases() {
    let v = one(&builtin("s2xs2_r12").unwrap(), 5, None, CheckId::WeylEq);
    assert_eq!(v.status, Status::Pass);
    assert!(v.value("weyl_max").unwrap() > 6.9);
    assert!(v.value("residual_max").unwrap() < 1e-8);
    let v = one(&builtin("s1xs3").unwrap(), 5, None, CheckId::WeylEq);
    assert_eq!(v.status, Status::Skipped("not Einstein".into()));
    let v = one(&builtin("s3").unwrap(), 5, None, CheckId::WeylEq);
    assert_eq!(v.status, Status::Skipped("requires dimension ≥ 4".into()));
}

#[test]
fn pointwise_identities_on_the_perturbed_sphere() {
    let m = builtin("s4_perturbed").unwrap();
    let v = run(&m, 10, None, &[CheckId::DivWeyl, CheckId::BachConsistency, CheckId::Gbc]);
    for x in &v {
        assert_eq!(x.status, Status::Pass, "{x:?}");
    }
    assert!(v[0].value("cotton_max").unwrap() > 1e-4);
    assert!(v[1].value("bach_max").unwrap() > 1e-4);
    assert!(close(v[2].value("integral").unwrap(), 16.0 * PI * PI, 1e-6));
}

#[test]
fn gauss_bonnet_on_products() {
    let v = one(&builtin("s2xs2").unwrap(), 8, None, CheckId::Gbc);
    assert_eq!(v.status, Status::Pass);
    assert!(close(v.value("integral").unwrap(), 32.0 * PI * PI, 1e-10));
    let v = one(&builtin("s1xs3").unwrap(), 8, None, CheckId::Gbc);
    assert_eq!(v.status, Status::Pass);
    assert_eq!(v.tol, 1e-8);
    assert!(v.value("integral").unwrap().abs() < 1e-8);
    let v = one(&builtin("s5").unwrap(), 4, None, CheckId::Gbc);
    assert_eq!(v.status, Status::Skipped("requires dimension 4".into()));
}

#[test]
fn sobolev_cases() {
    let s4 = builtin("s4").unwrap();
    let v = run(&s4, 12, Some(alpha_s4()), &[CheckId::Sobolev]);
    assert_eq!(v.len(), 2);
    for x in &v {
        assert_eq!(x.status, Status::Pass);
        assert!(x.value("lhs").unwrap() <= x.value("rhs").unwrap());
        assert_eq!(x.flag("alpha0_admissible"), Some(true));
    }
    // u ≡ 1 realizes the Yamabe constant of the round sphere.
    assert!(close(v[0].value("yamabe_quotient").unwrap(), alpha_s4(), 1e-8));
    assert!(v[1].value("yamabe_quotient").unwrap() >= alpha_s4() * (1.0 - 1e-6));
    assert_eq!(v[1].value("seed"), Some(7.0));

    // The same α₀ exceeds Y(S³), so the inequality genuinely fails there.
    let s3 = builtin("s3").unwrap();
    let v = run(&s3, 12, Some(alpha_s4()), &[CheckId::Sobolev]);
    assert_eq!(v[0].status, Status::Fail);
    assert_eq!(v[0].flag("alpha0_admissible"), Some(false));
    let v = run(&s3, 12, Some(sphere_yamabe(3)), &[CheckId::Sobolev]);
    assert!(v.iter().all(|x| x.status == Status::Pass));

    assert_eq!(one(&s4, 6, None, CheckId::Sobolev).status, Status::Skipped("α₀ not given".into()));
    let v = one(&builtin("s2xs2").unwrap(), 6, Some(1.0), CheckId::Sobolev);
    assert_eq!(v.status, Status::Skipped("R ≠ n(n−1)".into()));
}

#[test]
fn kato_cases() {
    let v = one(&builtin("s1xs3_perturbed").unwrap(), 5, None, CheckId::Kato);
    assert_eq!(v.status, Status::Pass);
    assert_eq!(v.value("nodes"), Some(625.0));
    assert!(v.value("excess_max").unwrap() <= 1e-8);
    let v = one(&builtin("s4").unwrap(), 5, None, CheckId::Kato);
    assert_eq!(v.status, Status::Skipped("|E| ≤ 1e-6 everywhere".into()));
}

#[test]
fn theorem_checks() {
    let a = alpha_s4();
    let v = run(&builtin("s4").unwrap(), 6, Some(a), &[CheckId::ThmA, CheckId::ThmB, CheckId::ThmC]);
    for x in &v {
        assert_eq!(x.status, Status::Pass, "{x:?}");
        assert_eq!(x.flag("hypotheses_met"), Some(true), "{}", x.check);
        assert_eq!(x.flag("consistent"), Some(true));
    }
    assert_eq!(v[0].flag("spherical"), Some(true));
    assert!(close(v[1].value("tau0").unwrap(), a / 128.0, 1e-15));
    assert!(close(v[2].value("threshold").unwrap(), a / 192.0, 1e-15));

    // Large curvature: hypotheses fail, so the implication holds vacuously.
    let v = run(&builtin("s2xs2_r12").unwrap(), 6, Some(a), &[CheckId::ThmA, CheckId::ThmB, CheckId::ThmC]);
    for x in &v {
        assert_eq!(x.status, Status::Pass);
        assert_eq!(x.flag("hypotheses_met"), Some(false));
    }
    assert!(close(v[0].value("s").unwrap(), 4.0 * 3f64.sqrt(), 1e-10));
    let v = one(&builtin("s1xs3_r12").unwrap(), 12, Some(a), CheckId::ThmC);
    assert_eq!(v.flag("hypotheses_met"), Some(false));
    assert!(close(v.value("e_l2_sq").unwrap(), 12.0 * PI.powi(3), 1e-8));
    assert_eq!(one(&builtin("s4").unwrap(), 6, None, CheckId::ThmB).status, Status::Skipped("α₀ not given".into()));
}

#[test]
fn verdicts_are_reproducible() {
    let m = builtin("s1xs3_perturbed").unwrap();
    let a = run(&m, 5, Some(1.0), &CheckId::ALL);
    let b = run(&m, 5, Some(1.0), &CheckId::ALL);
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    let json = serde_json::to_string(&a).unwrap();
    let back: Vec<Verdict> = serde_json::from_str(&json).unwrap();
    assert_eq!(back.len(), a.len());
    assert!(back.iter().zip(&a).all(|(x, y)| x.check == y.check && x.status == y.status));
    assert!(a.iter().all(|v| v.seconds.is_none()));
    let timed = Verifier::new(&m, VerifyConfig { grid: vec![4], timing: true, ..Default::default() })
        .unwrap()
        .run(&[CheckId::Gbc])
        .unwrap();
    assert!(timed[0].seconds.unwrap() >= 0.0);
}
