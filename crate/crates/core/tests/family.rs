mod common;

use common::{fd_first, rng};
use finsler::expr::ScalarField;
use finsler::family::{
    build_structure, closed_form_k, closed_form_k_branches, constant_b_rigidity, construct_alpha_beta,
    deform_and_killing, positivity_check, structure_residuals, AlphaBetaFields, Domain, FamilyFields, FamilyParams,
    FieldSource, Sign, StructureData,
};
use finsler::geometry::{bh_volume_factor, curvature_sample};
use finsler::Error;
use proptest::prelude::*;
use rand::Rng;

fn sf(s: &str) -> ScalarField {
    ScalarField::parse(s).unwrap()
}

fn params(k1: f64, k2: f64) -> FamilyParams {
    FamilyParams::new(k1, k2, Sign::Plus).unwrap()
}

fn rotation_example() -> StructureData {
    StructureData::new(sf("-x2"), sf("x1"), sf("x1^2 + x2^2"), Domain::annulus(0.1, 0.9).unwrap())
}

#[test]
fn square_root_profile() {
    let p = params(-1.0, 0.0);
    let worst = (0..=1800)
        .map(|i| -0.9 + 1.8 * i as f64 / 1800.0)
        .map(|s| (p.phi(s).unwrap() - (1.0 + s).sqrt()).abs())
        .fold(0.0, f64::max);
    assert!(worst <= 1e-10, "{worst:e}");
    let [phi, d1, d2] = p.phi_derivatives(0.5).unwrap();
    assert!((phi - 1.5f64.sqrt()).abs() < 1e-12);
    assert!((d1 - 0.5 / 1.5f64.sqrt()).abs() < 1e-12);
    assert!((d2 + 0.25 * 1.5f64.powf(-1.5)).abs() < 1e-12);
}

/// For `k1 = 0, k2 = 4`: `∫τ = ½ asinh(2s)`.
#[test]
fn closed_primitive() {
    let p = params(0.0, 4.0);
    for s in [-0.7f64, -0.2, 0.0, 0.3, 1.1] {
        let expect = (1.0 + 4.0 * s * s).powf(0.25) * (0.5 * (2.0 * s).asinh()).exp();
        assert!((p.phi(s).unwrap() - expect).abs() < 1e-11, "{s}");
        assert!((p.primitive(s).unwrap() - 0.5 * (2.0 * s).asinh()).abs() < 1e-12);
    }
    assert!((p.phi(0.3).unwrap() - 1.4351705).abs() < 1e-7);
}

#[test]
fn profile_domain_and_parameters() {
    assert!(matches!(FamilyParams::new(1.0, 0.0, Sign::Plus), Err(Error::Domain(_))));
    assert!(matches!(FamilyParams::new(1.0, 1.0, Sign::Plus), Err(Error::Domain(_))));
    assert!(matches!(Sign::from_f64(0.5), Err(Error::Config(_))));
    let p = params(-1.0, 0.0);
    assert!(matches!(p.phi(1.0), Err(Error::Domain(_))));
    assert!(matches!(p.tau(-1.5), Err(Error::Domain(_))));
    for (k1, k2) in [(-2.0, 1.0), (0.5, 1.5), (-0.3, 0.0)] {
        for eps in [Sign::Plus, Sign::Minus] {
            assert_eq!(FamilyParams::new(k1, k2, eps).unwrap().phi(0.0).unwrap(), 1.0);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// `φ₊(s) φ₋(s) = √((1 + k1 s²)(1 + k2 s²))`.
    #[test]
    fn sign_symmetry(k1 in -2.0f64..2.0, gap in 0.05f64..2.0, t in -0.95f64..0.95) {
        let k2 = k1 + gap;
        let p = FamilyParams::new(k1, k2, Sign::Plus).unwrap();
        let m = p.with_eps(Sign::Minus);
        // stay inside the profile domain
        let smax = if k1 < 0.0 { 1.0 / (-k1).sqrt() } else { 2.0 };
        let s = t * smax.min(2.0);
        let prod = p.phi(s).unwrap() * m.phi(s).unwrap();
        let expect = ((1.0 + k1 * s * s) * (1.0 + k2 * s * s)).sqrt();
        prop_assert!((prod - expect).abs() <= 1e-10 * expect);
        prop_assert!((p.phi(s).unwrap() - m.phi(-s).unwrap()).abs() <= 1e-10 * p.phi(s).unwrap());
    }

    /// `φ′` and `φ″` from the series against differences of `φ`.
    #[test]
    fn derivatives_match_differences(k1 in -1.0f64..1.0, gap in 0.1f64..2.0, s in -0.6f64..0.6) {
        let p = FamilyParams::new(k1, k1 + gap, Sign::Minus).unwrap();
        let [phi, d1, d2] = p.phi_derivatives(s).unwrap();
        let f = |q: [f64; 4]| p.phi(q[0]).unwrap();
        let q = [s, 0.0, 0.0, 0.0];
        prop_assert!((phi - p.phi(s).unwrap()).abs() < 1e-14);
        prop_assert!((d1 - fd_first(&f, q, 0, 1e-3)).abs() < 1e-7);
        let fd2 = fd_first(&|q: [f64; 4]| fd_first(&f, q, 0, 1e-3), q, 0, 1e-3);
        prop_assert!((d2 - fd2).abs() < 1e-5);
    }
}

/// The convexity verdict `1 + k1 b² > 0` agrees with direct sampling of
/// the three inequalities, and the quadratic certificates are positive.
#[test]
fn positivity_random_draws() {
    let mut r = rng(31);
    let mut pd_count = 0;
    for _ in 0..100 {
        let k1: f64 = r.gen_range(-2.0..2.0);
        let k2: f64 = r.gen_range(k1..2.0).max(k1 + 1e-3);
        let b: f64 = r.gen_range(0.0..1.5);
        let v = positivity_check(&params(k1, k2), b);
        assert_eq!(v.pd, v.sampled_positive(), "k1={k1} k2={k2} b={b}: {v:?}");
        if v.pd {
            pd_count += 1;
            assert!(v.polynomial_min.iter().all(|m| *m > 0.0), "k1={k1} k2={k2} b={b}: {v:?}");
        }
    }
    assert!(pd_count > 20 && pd_count < 100, "{pd_count}");
}

#[test]
fn norm_of_beta_is_b() {
    let d = rotation_example();
    for (k1, k2) in [(-1.0, 0.0), (0.0, 4.0), (-0.5, 1.5)] {
        let p = params(k1, k2);
        for x in [[0.5, 0.2], [-0.3, 0.4], [0.1, -0.8]] {
            let (rm, of) = construct_alpha_beta(p, &d, x).unwrap();
            let b2 = of.norm_sq_jet(rm.metric_jets()).unwrap().value();
            let expect = d.b.value(x).unwrap();
            assert!((b2 - expect).abs() < 1e-14 * (1.0 + expect), "{b2} vs {expect}");
        }
    }
}

/// For the rotation example `K = k1 √(1 + k2 B) / √(1 + k1 B)`.
#[test]
fn closed_form_on_rotation_example() {
    let d = rotation_example();
    let mut r = rng(5);
    for _ in 0..30 {
        let k1: f64 = r.gen_range(-1.0..1.0);
        let k2: f64 = r.gen_range(k1 + 0.1..2.0);
        let p = params(k1, k2);
        let rad: f64 = r.gen_range(0.15..0.85);
        let t: f64 = r.gen_range(0.0..std::f64::consts::TAU);
        let x = [rad * t.cos(), rad * t.sin()];
        let b = rad * rad;
        let expect = k1 * (1.0 + k2 * b).sqrt() / (1.0 + k1 * b).sqrt();
        let k = closed_form_k(&p, &d, x).unwrap();
        assert!((k - expect).abs() <= 1e-12 * (1.0 + expect.abs()), "{k} vs {expect}");
        let (a, c) = closed_form_k_branches(&p, &d, x).unwrap();
        for branch in [a, c].into_iter().flatten() {
            assert!((branch - expect).abs() <= 1e-10 * (1.0 + expect.abs()));
        }
    }
    let k = closed_form_k(&params(-1.0, 0.0), &d, [0.5, 0.0]).unwrap();
    assert!((k + 1.1547005).abs() < 1e-6);
}

/// A second structure triple: `f(z) = z` (radial flow) with `B` a function
/// of the angle. Numeric `K` is direction independent, matches the closed
/// form, and `S = 0`.
#[test]
fn radial_structure_example() {
    let domain = Domain::new([0.3, 0.9, -0.4, 0.4], vec![]).unwrap();
    let d = build_structure(
        FieldSource::Polynomial(vec![[0.0, 0.0], [1.0, 0.0]]),
        sf("0.5 + 0.2*(x2/x1)^2"),
        domain,
    )
    .unwrap();
    let p = FamilyParams::new(-0.6, 0.8, Sign::Minus).unwrap();
    let f = finsler::family::assemble_finsler(p, d.clone());
    for x in [[0.5, 0.1], [0.7, -0.3], [0.35, 0.2]] {
        assert!(f.fields.admissible(x));
        let kc = closed_form_k(&p, &d, x).unwrap();
        let vol = bh_volume_factor(&f, x).unwrap();
        for y in [[1.0, 0.0], [0.6, 0.8], [-0.28, 0.96]] {
            let c = curvature_sample(&f, x, y, Some(&vol)).unwrap();
            assert!((c.flag - kc).abs() <= 1e-9 * kc.abs().max(1.0), "{} vs {kc}", c.flag);
            assert!((c.s / c.f).abs() < 1e-9);
        }
    }
}

#[test]
fn structure_violations_are_reported() {
    let domain = Domain::annulus(0.1, 0.9).unwrap();
    let perturbed = build_structure(
        FieldSource::Expressions { u: sf("-x2"), v: sf("x1") },
        sf("x1^2 + x2^2 + 0.01*x1"),
        domain.clone(),
    );
    assert!(matches!(perturbed, Err(Error::StructureViolation { equation: "u*B_1 + v*B_2 = 0", .. })));
    let not_holomorphic =
        build_structure(FieldSource::Expressions { u: sf("x1"), v: sf("-x2") }, sf("1"), domain.clone());
    assert!(matches!(not_holomorphic, Err(Error::StructureViolation { equation: "u_1 = v_2", .. })));
    let ok = build_structure(FieldSource::Polynomial(vec![[0.0, 0.0], [0.0, 1.0]]), sf("x1^2 + x2^2"), domain)
        .unwrap();
    assert_eq!(structure_residuals(&ok, [0.3, 0.4]).unwrap(), [0.0; 3]);
}

#[test]
fn deformed_form_is_killing() {
    let d = rotation_example();
    let mut r = rng(8);
    for (k1, k2) in [(-1.0, 0.0), (0.0, 4.0), (-0.5, 1.5), (0.3, 0.9)] {
        let p = params(k1, k2);
        let rad: f64 = r.gen_range(0.2..0.8);
        let x = [rad * 0.6, rad * 0.8];
        let (rm, of) = construct_alpha_beta(p, &d, x).unwrap();
        let (_, res) = deform_and_killing(&p, &rm, &of).unwrap();
        assert!(res <= 1e-12, "{k1} {k2}: {res:e}");
    }
}

#[test]
fn constant_b_is_flat_and_parallel() {
    let d = StructureData::new(sf("1"), sf("0"), sf("0.3"), Domain::new([-1.0, 1.0, -1.0, 1.0], vec![]).unwrap());
    for (k1, k2) in [(-1.0, 0.0), (0.0, 4.0), (-2.0, 2.0)] {
        let p = params(k1, k2);
        let rig = constant_b_rigidity(&p, &d, [0.1, -0.4]).unwrap();
        assert!(rig.flatness <= 1e-9 && rig.parallel <= 1e-9, "{rig:?}");
        assert_eq!(closed_form_k(&p, &d, [0.1, -0.4]).unwrap(), 0.0);
    }
    let fields = FamilyFields::new(params(-1.0, 0.0), d);
    assert!(fields.admissible([0.0, 0.0]));
}
