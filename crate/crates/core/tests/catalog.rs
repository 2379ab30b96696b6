use std::f64::consts::PI;

use curvature::catalog::{
    builtin, from_selector, listing, load_manifest, parse_manifest, random_scalar_field, random_symmetric_field,
    CatalogError, ChartManifold, ManifestErrorKind, BUILTIN_IDS,
};
use curvature::catalog::NodeEvaluator;
use curvature::expr::ParseErrorKind;
use curvature::quadrature::{integrate, metric_grid, reduce, GridSpec};
use curvature::verify::{CheckId, Status, Verifier, VerifyConfig};

const FLAG_TOL: f64 = 1e-9;

struct Extremes {
    e: f64,
    w: f64,
    b: f64,
    r_min: f64,
    r_max: f64,
}

fn extremes(m: &ChartManifold, per_axis: usize) -> Extremes {
    let grid = metric_grid(m, &GridSpec::uniform(m.dim(), per_axis).unwrap()).unwrap();
    let r = reduce(
        &grid,
        4,
        || m.evaluator(4),
        |ev: &mut NodeEvaluator, x, out| {
            let (f, sqrt_det) = ev.frame(x, false)?;
            out[0] = f.norm(&f.traceless_ricci);
            out[1] = f.norm(&f.weyl);
            out[2] = f.norm(&f.bach);
            out[3] = f.scalar;
            Ok(sqrt_det)
        },
    )
    .unwrap();
    Extremes {
        e: r.maxima[0],
        w: r.maxima[1],
        b: r.maxima[2],
        r_min: r.minima[3],
        r_max: r.maxima[3],
    }
}

#[test]
fn expected_flags_match_the_pipeline() {
    for id in BUILTIN_IDS {
        let m = builtin(id).unwrap();
        let per_axis = if m.dim() > 4 { 4 } else { 6 };
        let x = extremes(&m, per_axis);
        let f = m.expected_flags();
        let check = |name: &str, expected: Option<bool>, measured: f64| {
            if let Some(want) = expected {
                assert_eq!(measured <= FLAG_TOL, want, "{id}: {name} measured {measured:e}");
            }
        };
        check("einstein", f.einstein, x.e);
        check("conformally_flat", f.conformally_flat, x.w);
        check("bach_flat", f.bach_flat, x.b);
        check("constant_scalar", f.constant_scalar, x.r_max - x.r_min);
        if let Some(r) = m.known_scalar_curvature() {
            assert!((x.r_max - r).abs() < 1e-10 && (x.r_min - r).abs() < 1e-10, "{id}");
        }
    }
}

#[test]
fn builtin_facts() {
    let s4 = builtin("s4").unwrap();
    assert_eq!(s4.euler_characteristic(), Some(2));
    assert_eq!(s4.known_scalar_curvature(), Some(12.0));
    let y = s4.known_constant("yamabe").unwrap();
    assert!((y - 8.0 * 6f64.sqrt() * PI).abs() < 1e-12);
    assert!((s4.known_constant("volume").unwrap() - 8.0 * PI * PI / 3.0).abs() < 1e-12);

    let s2s2 = builtin("s2xs2").unwrap();
    assert_eq!(s2s2.euler_characteristic(), Some(4));
    assert_eq!(s2s2.known_scalar_curvature(), Some(4.0));
    assert_eq!(s2s2.expected_flags().einstein, Some(true));
    assert_eq!(s2s2.expected_flags().conformally_flat, Some(false));

    let r12 = builtin("s1xs3_r12").unwrap();
    assert_eq!(r12.known_scalar_curvature(), Some(12.0));
    assert_eq!(r12.expected_flags().bach_flat, Some(true));
    assert_eq!(r12.expected_flags().einstein, Some(false));
    assert_eq!(r12.euler_characteristic(), Some(0));

    let p = builtin("s4_perturbed").unwrap();
    assert_eq!(p.euler_characteristic(), Some(2));
    assert_eq!(p.known_scalar_curvature(), None);
}

#[test]
fn listing_covers_every_builtin() {
    let l = listing();
    let ids: Vec<&str> = l.iter().map(|e| e.0.as_str()).collect();
    assert_eq!(ids, BUILTIN_IDS.to_vec());
    let s2s2 = l.iter().find(|e| e.0 == "s2xs2").unwrap();
    assert_eq!((s2s2.2, s2s2.3), (4, Some(4)));
    assert!(s2s2.1.contains("round_sphere"));
}

#[test]
fn selectors() {
    let m = from_selector("scaled(round_sphere(4,1),2)").unwrap();
    assert_eq!(m.known_scalar_curvature(), Some(6.0));
    let f = m.frame_at(&[1.0, 1.0, 1.0, 1.0], 4).unwrap();
    assert!((f.scalar - 6.0).abs() < 1e-12);
    let t = from_selector("flat_torus(2,[1,2])").unwrap();
    assert_eq!(t.axes()[1].length(), 2.0);
    assert!(matches!(builtin("s7"), Err(CatalogError::UnknownId(_))));
    assert!(from_selector("round_sphere(4,-1)").is_err());
    assert!(from_selector("round_sphere(4,1) junk").is_err());
    assert!(from_selector("product(s4,s5)").is_err());
}

fn torus_manifest(chi: bool) -> String {
    let mut text = String::from("# the flat 4-torus\nmanifold \"torus\"\ndim 4\n");
    if chi {
        text.push_str("chi 0\n");
    }
    for i in 1..=4 {
        text.push_str(&format!("domain x{i} 0 2*pi periodic\n"));
    }
    for i in 1..=4 {
        text.push_str(&format!("metric {i} {i} = \"1\"\n"));
    }
    text
}

#[test]
fn manifest_reproduces_the_builtin_torus() {
    let dir = std::env::temp_dir().join(format!("curvature-catalog-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("torus.manifest");
    std::fs::write(&path, torus_manifest(true)).unwrap();
    let from_file = load_manifest(&path).unwrap();
    std::fs::remove_dir_all(&dir).unwrap();
    assert_eq!(from_file.name(), "torus");
    assert_eq!(from_file.euler_characteristic(), Some(0));

    let t4 = builtin("t4").unwrap();
    let cfg = || VerifyConfig {
        grid: vec![6],
        ..Default::default()
    };
    let checks = [CheckId::Lemma22, CheckId::CodazziIneq, CheckId::Gbc, CheckId::DivWeyl, CheckId::BachConsistency];
    let a = Verifier::new(&from_file, cfg()).unwrap().run(&checks).unwrap();
    let b = Verifier::new(&t4, cfg()).unwrap().run(&checks).unwrap();
    assert_eq!(a.len(), b.len());
    for (x, y) in a.iter().zip(&b) {
        assert_eq!((&x.check, &x.status, &x.values), (&y.check, &y.status, &y.values));
    }
}

#[test]
fn manifest_errors() {
    let bad = "manifold bad\ndim 4\ndomain x1 0 1 periodic\ndomain x2 0 1 periodic\ndomain x3 0 1 periodic\n\
               domain x4 0 1 periodic\ng 1 1 = 1\ng 2 2 = 1\ng 3 3 = 1\ng 4 4 = 1\ng 1 2 = x9\n";
    match parse_manifest(bad) {
        Err(CatalogError::Manifest(e)) => {
            assert_eq!(e.line, 11, "{e}");
            match e.kind {
                ManifestErrorKind::Expression(p) => {
                    assert_eq!(p.kind, ParseErrorKind::VariableOutOfRange { index: 9, dim: 4 })
                }
                other => panic!("{other:?}"),
            }
        }
        other => panic!("{other:?}"),
    }
    assert!(parse_manifest("dim 2\ndomain x1 0 1 periodic\n").is_err());
    assert!(parse_manifest(&torus_manifest(true).replace("dim 4", "dim 4\ndim 4")).is_err());
    assert!(parse_manifest("dim 1\ndomain x1 0 1 periodic\nmetric 1 1 = \"-1\"\n").is_err());
}

#[test]
fn manifest_parameters() {
    let text = "manifold \"warped\"\ndim 2\nchi 0\nparam a = 0.5\n\
                domain x1 0 2*pi periodic\ndomain x2 0 2*pi periodic\n\
                metric 1 1 = \"1\"\nmetric 2 2 = \"(1 + a*cos(x1))^2\"\n";
    let m = parse_manifest(text).unwrap();
    // Vol = ∫∫ (1 + a cos x1) = 4π².
    let v = integrate(&m, &GridSpec::uniform(2, 8).unwrap(), |_| 1.0).unwrap();
    assert!((v - 4.0 * PI * PI).abs() < 1e-10);
}

#[test]
fn manifest_without_chi_skips_gauss_bonnet() {
    let m = parse_manifest(&torus_manifest(false)).unwrap();
    assert_eq!(m.euler_characteristic(), None);
    let cfg = VerifyConfig {
        grid: vec![4],
        alpha0: Some(1.0),
        ..Default::default()
    };
    let v = Verifier::new(&m, cfg).unwrap().run(&[CheckId::Gbc, CheckId::ThmC]).unwrap();
    for verdict in v {
        assert_eq!(verdict.status, Status::Skipped("χ unknown".into()));
        assert_eq!(verdict.status.to_string(), "skipped: χ unknown");
    }
}

fn component_texts(f: &curvature::catalog::TensorField) -> Vec<String> {
    f.primary().components().iter().map(|e| e.to_string()).collect()
}

#[test]
fn random_fields_are_seeded() {
    for id in ["t4", "s4", "s1xs3", "s4_perturbed"] {
        let m = builtin(id).unwrap();
        let a = random_symmetric_field(&m, 5, 2, 0.1).unwrap();
        let b = random_symmetric_field(&m, 5, 2, 0.1).unwrap();
        let c = random_symmetric_field(&m, 6, 2, 0.1).unwrap();
        assert_eq!(component_texts(&a), component_texts(&b), "{id}");
        assert_ne!(component_texts(&a), component_texts(&c), "{id}");
        assert_eq!(a.seed(), Some(5));
        let u = random_scalar_field(&m, 5, 2, 0.1).unwrap();
        let v = random_scalar_field(&m, 5, 2, 0.1).unwrap();
        assert_eq!(u.primary().expression().to_string(), v.primary().expression().to_string());
    }
    assert!(random_symmetric_field(&builtin("t4").unwrap(), 1, 2, -1.0).is_err());
}

// Bandwidth 2 on the torus: every component is orthogonal to all modes of
// frequency 3 on each axis, and the pointwise size respects the amplitude.
#[test]
fn torus_random_field_has_bounded_bandwidth() {
    let m = builtin("t4").unwrap();
    let h = random_symmetric_field(&m, 9, 2, 0.1).unwrap();
    let spec = GridSpec::uniform(4, 8).unwrap();
    let field = h.primary();
    for i in 0..4 {
        for j in 0..=i {
            let e = field.component(i, j);
            for axis in 0..4 {
                for phase in [0.0, PI / 2.0] {
                    let c = integrate(&m, &spec, |x| e.eval(x).unwrap() * (3.0 * x[axis] + phase).cos()).unwrap();
                    assert!(c.abs() < 1e-12, "h{i}{j} axis {axis}: {c}");
                }
            }
        }
    }
    let x = [0.3, 1.7, 4.0, 5.5];
    let mut sq = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            sq += field.component(i, j).eval(&x).unwrap().powi(2);
        }
    }
    assert!(sq.sqrt() <= 0.1 + 1e-12);
}

#[test]
fn factor_combinations() {
    let m = builtin("s1xs3").unwrap();
    let h = m.factor_combination(&[1.0, 1.0]).unwrap();
    let x = [0.5, 1.0, 1.2, 2.0];
    let g = m.metric().eval_matrix(&x).unwrap();
    let hx = h.primary().eval_matrix(&x).unwrap();
    for (a, b) in g.iter().zip(&hx) {
        assert!((a - b).abs() < 1e-15);
    }
    assert!(m.factor_combination(&[1.0]).is_err());
}

#[test]
fn contains_respects_open_and_periodic_axes() {
    let s4 = builtin("s4").unwrap();
    assert!(s4.contains(&[1.0, 1.0, 1.0, 6.0]));
    assert!(!s4.contains(&[1.0, 1.0, 1.0, 7.0]));
    assert!(!s4.contains(&[0.0, 1.0, 1.0, 1.0]));
    assert!(!s4.contains(&[1.0, 1.0, 1.0]));
}
