//! Constructed kernels against the verifier.

use std::sync::Arc;

use rand::Rng;

use rkhs_cert::certificate::HolderCertificate;
use rkhs_cert::constructors::{
    distance_substitution_kernel, feature_mixture_kernel, gaussian_random_features, series_kernel,
    FeatureMixtureSpec, FunctionFamily, OuterFunction, OuterSpec, Primitive,
};
use rkhs_cert::gram::{gram, PreRkhsFunction};
use rkhs_cert::holder::certify_rkhs_holder;
use rkhs_cert::kernel::{KernelHandle, SeparateHolderData};
use rkhs_cert::metric::AmbientMetric;
use rkhs_cert::point::Point;
use rkhs_cert::verifier::{audit_family, certificate_audit, SamplingPlan};

fn p(x: f64) -> Point {
    Point::scalar(x)
}

fn plan() -> SamplingPlan {
    SamplingPlan::interval(-3.0, 3.0).unwrap()
}

fn assert_certified(name: &str, k: &KernelHandle, cert: &HolderCertificate, plan: &SamplingPlan) {
    let r = certificate_audit(k, cert, plan, 50).unwrap();
    assert!(r.pass, "{name}: {:?}", r.violations.first());
    assert!(r.empirical_constant <= cert.constant_per_unit_norm * (1.0 + 1e-6), "{name}");
    if let Some(c) = r.conservatism {
        assert!(c >= 1.0 - 1e-6, "{name}: conservatism {c}");
    }
}

#[test]
fn every_constructor_certificate_survives_audit() {
    let prims = [
        Primitive::sin(),
        Primitive::Hat { center: vec![1.0], width: 0.5 },
        Primitive::Shift { offset: vec![0.5], inner: Box::new(Primitive::ExpDecay { center: vec![0.0], rate: 2.0 }) },
        Primitive::Min {
            a: Box::new(Primitive::Affine { weights: vec![0.5], bias: 0.0 }),
            b: Box::new(Primitive::Scale { factor: -1.0, inner: Box::new(Primitive::cos()) }),
        },
    ];
    let fam = FunctionFamily::from_primitives(&prims, &AmbientMetric::Euclidean, None).unwrap();
    let series = series_kernel(&fam, &AmbientMetric::Euclidean).unwrap();
    assert_eq!(series.certificate.constant_per_unit_norm, (1.0f64 + 4.0 + 4.0 + 1.0).sqrt());
    assert_certified("series", &series.kernel, &series.certificate, &plan());

    let mixture = feature_mixture_kernel(&FeatureMixtureSpec {
        sampler: Arc::new(|rng| vec![rng.random_range(-3.0..3.0)]),
        total_mass: 3.0,
        feature: Arc::new(|x, w, out| {
            out[0] = (1.0 - (x[0] - w[0]).abs()).max(0.0);
            out[1] = (-(x[0] - w[0]).abs()).exp();
        }),
        feature_dim: 2,
        input_dim: Some(1),
        // ‖Φ(x) − Φ(y)‖ ≤ √2·|x − y| for the pair (hat, exp-decay).
        feature_holder: SeparateHolderData::lipschitz(2f64.sqrt()).unwrap(),
        mc_samples: 40,
        seed: 9,
        metric: AmbientMetric::Euclidean,
    })
    .unwrap();
    assert_certified("mixture", &mixture.kernel, &mixture.certificate, &plan());

    let rff = gaussian_random_features(1.0, 1, 256, 42, Some(6.0)).unwrap();
    assert_certified("random features", &rff.kernel, &rff.certificate, &plan());

    for (outer, metric) in [
        (OuterSpec::ExpDecay { rate: 1.5 }, AmbientMetric::Euclidean),
        (OuterSpec::Sqrt, AmbientMetric::Euclidean),
        (OuterSpec::Power { exponent: 0.3 }, AmbientMetric::Manhattan),
        (OuterSpec::Hat { width: 2.0 }, AmbientMetric::power(AmbientMetric::Euclidean, 0.5).unwrap()),
        (OuterSpec::Gaussian { sigma: 0.7 }, AmbientMetric::Euclidean),
    ] {
        let d = distance_substitution_kernel(
            &OuterFunction::from_spec(&outer).unwrap(),
            vec![p(-2.0), p(0.0), p(1.5)],
            vec![0.2, 0.5, 0.3],
            &metric,
        )
        .unwrap();
        assert_certified(&format!("{outer:?}"), &d.kernel, &d.certificate, &plan());
    }
}

#[test]
fn two_dimensional_series_in_chebyshev_metric() {
    let prims = [
        Primitive::Hat { center: vec![0.25, 0.25], width: 0.5 },
        Primitive::Cosine { freq: vec![2.0, -1.0], phase: 0.3 },
    ];
    let fam = FunctionFamily::from_primitives(&prims, &AmbientMetric::Chebyshev, None).unwrap();
    let c = series_kernel(&fam, &AmbientMetric::Chebyshev).unwrap();
    let plan = SamplingPlan::new(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
    assert_certified("chebyshev series", &c.kernel, &c.certificate, &plan);
    let audits = audit_family(&fam, &AmbientMetric::Chebyshev, &plan).unwrap();
    assert!(audits.iter().all(|a| a.holds));
}

#[test]
fn declared_member_data_under_power_metric() {
    // √|x| is ½-Hölder with constant 1 in the Euclidean metric, i.e.
    // Lipschitz-type with constant 1 in d = |x − y|^{1/2}; declare it as α = 1.
    let metric = AmbientMetric::power(AmbientMetric::Euclidean, 0.5).unwrap();
    let fam = FunctionFamily::new(1.0, Some(1)).unwrap().with_member("sqrt|x|", 1.0, |x| x[0].abs().sqrt()).unwrap();
    let c = series_kernel(&fam, &metric).unwrap();
    let plan = SamplingPlan::interval(-1.0, 1.0).unwrap();
    assert_certified("sqrt member", &c.kernel, &c.certificate, &plan);
    let audits = audit_family(&fam, &metric, &plan).unwrap();
    assert!(audits[0].holds && audits[0].empirical > 0.99);
}

#[test]
fn random_features_close_to_gaussian_on_grid() {
    let c = gaussian_random_features(1.0, 1, 4096, 42, Some(6.0)).unwrap();
    let grid: Vec<f64> = (0..101).map(|i| -3.0 + 0.06 * i as f64).collect();
    let mut worst = 0.0f64;
    for &x in &grid {
        for &y in &grid {
            let exact = (-(x - y) * (x - y) / 2.0).exp();
            worst = worst.max((c.kernel.eval(&p(x), &p(y)).unwrap() - exact).abs());
        }
    }
    assert!(worst <= 0.05, "sup |k_hat - k| = {worst}");
}

#[test]
fn frame_members_lie_in_the_rkhs() {
    // fᵢ ∈ H_k: interpolating fᵢ on a few points through the Gram system
    // recovers fᵢ everywhere, with coefficients matching the frame.
    let fam = FunctionFamily::from_primitives(&[Primitive::sin(), Primitive::cos()], &AmbientMetric::Euclidean, None)
        .unwrap();
    let k = series_kernel(&fam, &AmbientMetric::Euclidean).unwrap().kernel;
    let pts = vec![p(0.3), p(1.9)];
    let g = gram(&k, &pts).unwrap();
    for i in 0..2 {
        let f = fam.member(i);
        let rhs = nalgebra::DVector::from_iterator(2, pts.iter().map(|x| f(x.coords())));
        let coef = g.entries.clone().lu().solve(&rhs).unwrap();
        let interp = PreRkhsFunction::new(k.clone(), pts.clone(), coef.iter().copied().collect()).unwrap();
        for t in [-2.0, -0.5, 0.0, 1.0, 2.5] {
            assert!((interp.eval(&p(t)).unwrap() - f(&[t])).abs() < 1e-12);
        }
        // Parseval frame of a 2-dimensional space with 2 members: orthonormal.
        assert!((interp.rkhs_norm().unwrap() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn full_rate_and_half_rate_separation() {
    let plan = plan().with_pairs(2000);
    let fam = FunctionFamily::from_primitives(&[Primitive::sin(), Primitive::cos()], &AmbientMetric::Euclidean, None)
        .unwrap();
    let series = series_kernel(&fam, &AmbientMetric::Euclidean).unwrap();
    let r = certificate_audit(&series.kernel, &series.certificate, &plan, 50).unwrap();
    assert_eq!(r.certificate.alpha, 1.0);
    assert!((r.slope_estimate.unwrap() - 1.0).abs() <= 0.15, "{:?}", r.slope_estimate);

    let g = KernelHandle::gaussian(1.0).unwrap();
    let cert = certify_rkhs_holder(&g, &AmbientMetric::Euclidean).unwrap();
    let r = certificate_audit(&g, &cert, &plan, 50).unwrap();
    assert_eq!(r.certificate.alpha, 0.5);
    assert!((r.slope_estimate.unwrap() - 1.0).abs() <= 0.15, "{:?}", r.slope_estimate);
    assert!(r.pass && r.conservatism.unwrap() > 1.0);
}
