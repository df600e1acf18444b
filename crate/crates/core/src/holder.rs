//! Separate vs. joint Hölder data for symmetric bivariate functions, the
//! half-rate certificate for RKHS functions of Hölder kernels, and the
//! converse kernel bounds implied by RKHS-side Hölder assumptions.
//!
//! The product space `X × X` carries the sum metric
//! `d((x₁,x₂),(x₁',x₂')) = d(x₁,x₁') + d(x₂,x₂')`, under which separate and
//! joint Lipschitz continuity coincide with the same constant.

use serde::{Deserialize, Serialize};

use crate::certificate::{HolderCertificate, Provenance};
use crate::error::{Error, Result};
use crate::kernel::{KernelHandle, SeparateHolderData};
use crate::kernel_metric::{diag_scale, kernel_distance};
use crate::metric::AmbientMetric;
use crate::point::Point;
use crate::predicate::{Inequality, Predicate};

/// `|κ(x₁,x₂) − κ(x₁',x₂')| ≤ L·(d(x₁,x₁')^α + d(x₂,x₂')^α)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointHolderData {
    pub alpha: f64,
    pub constant: f64,
}

/// `|κ(x,x) − κ(x',x')| ≤ constant·d(x,x')^α`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagonalBound {
    pub alpha: f64,
    pub constant: f64,
}

/// Separate to joint for a symmetric kernel: split the joint increment at
/// `(x₁', x₂)` and use symmetry on the second leg. Same α, same constant.
pub fn separate_to_joint(sep: SeparateHolderData) -> JointHolderData {
    JointHolderData {
        alpha: sep.alpha,
        constant: sep.constant,
    }
}

/// Joint to separate: set `x₂ = x₂'`.
pub fn joint_to_separate(joint: JointHolderData) -> SeparateHolderData {
    SeparateHolderData {
        alpha: joint.alpha,
        constant: joint.constant,
    }
}

/// The diagonal `x ↦ κ(x,x)` is α-Hölder with constant `2L`.
pub fn diagonal_holder(sep: SeparateHolderData) -> DiagonalBound {
    DiagonalBound {
        alpha: sep.alpha,
        constant: 2.0 * sep.constant,
    }
}

/// Every `f ∈ H_k` of a kernel with separate data `(α, L)` satisfies
/// `|f(x) − f(x')| ≤ √(2L)·‖f‖_k·d(x,x')^{α/2}`; the same bound holds for
/// `‖Φ(x) − Φ(x')‖` for any feature map of `k`.
///
/// The separate data must be stated with respect to `metric`.
pub fn certify_rkhs_holder(k: &KernelHandle, metric: &AmbientMetric) -> Result<HolderCertificate> {
    let sep = k.regularity().ok_or(Error::NoRegularityData)?;
    certify_from_separate(sep, metric)
}

pub(crate) fn certify_from_separate(
    sep: SeparateHolderData,
    metric: &AmbientMetric,
) -> Result<HolderCertificate> {
    sep.validate()?;
    metric.validate()?;
    Ok(HolderCertificate::new(
        sep.alpha / 2.0,
        (2.0 * sep.constant).sqrt(),
        Provenance::HolderKernel,
        metric.clone().into(),
    )?
    .with_assumption(format!(
        "kernel separately {}-Hölder with constant {} (uniform, U_x = X)",
        sep.alpha, sep.constant
    )))
}

/// Claims implied when every `f ∈ H_k` is α-Hölder with constant `‖f‖_k`:
///
/// * (a) `|k(x₁,x) − k(x₁',x)| ≤ √k(x,x)·d(x₁,x₁')^α`, and `≤ ‖k‖∞·d^α`
/// * (b) `|k(x₁,x₂) − k(x₁',x₂')| ≤ ‖k‖∞·(d(x₁,x₁')^α + d(x₂,x₂')^α)`
/// * (c) `d_k(x,x') ≤ √(2‖k‖∞)·d(x,x')^{α/2}`
///
/// The hypothesis is the caller's, e.g. a full-rate certificate with `C = 1`.
pub fn converse_kernel_bounds(
    k: &KernelHandle,
    alpha: f64,
    sup_norm: f64,
    metric: &AmbientMetric,
) -> Vec<Predicate> {
    let mut out = Vec::new();

    let (kk, m) = (k.clone(), metric.clone());
    out.push(Predicate::new("(a) k(.,x) is alpha-Hölder with sqrt(k(x,x))", move |q| {
        let lhs = (kk.eval(&q.x1, &q.x2)? - kk.eval(&q.x1p, &q.x2)?).abs();
        let rhs = kk.eval(&q.x2, &q.x2)?.max(0.0).sqrt() * m.distance(&q.x1, &q.x1p)?.powf(alpha);
        Ok(Inequality::new(lhs, rhs, diag_scale(&kk, q)?))
    }));

    let (kk, m) = (k.clone(), metric.clone());
    out.push(Predicate::new("(a') k(.,x) is alpha-Hölder with ||k||_inf", move |q| {
        let lhs = (kk.eval(&q.x1, &q.x2)? - kk.eval(&q.x1p, &q.x2)?).abs();
        let rhs = sup_norm * m.distance(&q.x1, &q.x1p)?.powf(alpha);
        Ok(Inequality::new(lhs, rhs, diag_scale(&kk, q)?))
    }));

    let (kk, m) = (k.clone(), metric.clone());
    out.push(Predicate::new("(b) joint alpha-Hölder bound with ||k||_inf", move |q| {
        let lhs = (kk.eval(&q.x1, &q.x2)? - kk.eval(&q.x1p, &q.x2p)?).abs();
        let rhs = sup_norm
            * (m.distance(&q.x1, &q.x1p)?.powf(alpha) + m.distance(&q.x2, &q.x2p)?.powf(alpha));
        Ok(Inequality::new(lhs, rhs, diag_scale(&kk, q)?))
    }));

    let (kk, m) = (k.clone(), metric.clone());
    out.push(Predicate::new("(c) d_k <= sqrt(2||k||_inf) d^(alpha/2)", move |q| {
        let lhs = kernel_distance(&kk, &q.x1, &q.x1p)?;
        let rhs = (2.0 * sup_norm).sqrt() * m.distance(&q.x1, &q.x1p)?.powf(alpha / 2.0);
        Ok(Inequality::new(lhs, rhs, diag_scale(&kk, q)?))
    }));
    out
}

/// `√k(x,x) ≤ d(x, x₀)`, which must hold when every function of the space
/// vanishes at `x₀` and is Lipschitz with constant equal to its norm.
/// A sampled failure refutes that hypothesis for `k` (contrapositive use).
pub fn vanishing_point_rkhs_bound(k: &KernelHandle, x0: Point, metric: &AmbientMetric) -> Predicate {
    let (kk, m) = (k.clone(), metric.clone());
    Predicate::new("sqrt(k(x,x)) <= d(x, x0)", move |q| {
        let kxx = kk.eval(&q.x1, &q.x1)?;
        Ok(Inequality::new(
            kxx.max(0.0).sqrt(),
            m.distance(&q.x1, &x0)?,
            kxx.abs(),
        ))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel_metric::FeatureMapHandle;
    use crate::predicate::Quad;
    use proptest::prelude::*;

    fn p(x: f64) -> Point {
        Point::scalar(x)
    }

    fn sep(alpha: f64, l: f64) -> SeparateHolderData {
        SeparateHolderData::new(alpha, l).unwrap()
    }

    #[test]
    fn separate_joint_conversions() {
        assert_eq!(separate_to_joint(sep(1.0, 1.0)), JointHolderData { alpha: 1.0, constant: 1.0 });
        assert_eq!(separate_to_joint(sep(0.3, 0.0)).constant, 0.0);
        let j = JointHolderData { alpha: 1.0, constant: 2.5 };
        assert_eq!(joint_to_separate(j), sep(1.0, 2.5));
        assert_eq!(joint_to_separate(JointHolderData { alpha: 0.4, constant: 0.0 }).constant, 0.0);
        let e = (-0.5f64).exp();
        assert_eq!(separate_to_joint(sep(1.0, e)).constant, e);
    }

    #[test]
    fn diagonal_examples() {
        assert_eq!(diagonal_holder(sep(1.0, 0.5)).constant, 1.0);
        assert_eq!(diagonal_holder(sep(1.0, 0.0)).constant, 0.0);
        // Linear kernel on [0,1] with L = 1: |x² − x'²| ≤ 2|x − x'|.
        let d = diagonal_holder(sep(1.0, 1.0));
        for i in 0..=100 {
            for j in 0..=100 {
                let (x, y) = (i as f64 / 100.0, j as f64 / 100.0);
                assert!((x * x - y * y).abs() <= d.constant * (x - y).abs() + 1e-15);
            }
        }
    }

    #[test]
    fn certificate_examples() {
        let m = AmbientMetric::Euclidean;
        let unit = KernelHandle::gaussian(1.0).unwrap().with_regularity(sep(1.0, 1.0)).unwrap();
        let c = certify_rkhs_holder(&unit, &m).unwrap();
        assert_eq!((c.alpha, c.constant_per_unit_norm), (0.5, 2f64.sqrt()));
        assert_eq!(c.provenance, Provenance::HolderKernel);

        let flat = KernelHandle::constant(1.0).unwrap().with_regularity(sep(0.6, 0.0)).unwrap();
        let c = certify_rkhs_holder(&flat, &m).unwrap();
        assert_eq!((c.alpha, c.constant_per_unit_norm), (0.3, 0.0));

        let g = KernelHandle::gaussian(1.0).unwrap();
        let c = certify_rkhs_holder(&g, &m).unwrap();
        assert_eq!(c.alpha, 0.5);
        assert!((c.constant_per_unit_norm - 1.101_390_629_806_367_5).abs() < 1e-15);

        let bare = KernelHandle::from_fn("bare", None, |_, _| 1.0);
        assert_eq!(certify_rkhs_holder(&bare, &m), Err(Error::NoRegularityData));
    }

    #[test]
    fn converse_rank_one_hat() {
        let phi = FeatureMapHandle::new(1, Some(1), |x, o| o[0] = (1.0 - x[0].abs()).max(0.0)).unwrap();
        let k = KernelHandle::from_features("hat", phi);
        let preds = converse_kernel_bounds(&k, 1.0, 1.0, &AmbientMetric::Euclidean);
        let c = preds.iter().find(|p| p.name().starts_with("(c)")).unwrap();
        for i in 0..=60 {
            for j in 0..=60 {
                let (x, y) = (-1.5 + i as f64 * 0.05, -1.5 + j as f64 * 0.05);
                let ineq = c.evaluate(&Quad::pair(p(x), p(y))).unwrap();
                assert!(ineq.holds(1e-8), "x={x} y={y} {ineq:?}");
            }
        }
        for pred in &preds {
            let ineq = pred.evaluate(&Quad::pair(p(0.3), p(0.3))).unwrap();
            assert_eq!((ineq.lhs, ineq.rhs), (0.0, 0.0));
        }
    }

    #[test]
    fn vanishing_point_contrapositive() {
        let m = AmbientMetric::Euclidean;
        let brown = vanishing_point_rkhs_bound(&KernelHandle::brownian(), p(0.0), &m);
        // sqrt(x) > x on (0, 1): the Brownian RKHS is not Lipschitz with constant ‖f‖.
        let ineq = brown.evaluate(&Quad::pair(p(0.25), p(0.25))).unwrap();
        assert_eq!((ineq.lhs, ineq.rhs), (0.5, 0.25));
        assert!(!ineq.holds(1e-8));

        let lin = vanishing_point_rkhs_bound(&KernelHandle::linear(1).unwrap(), p(0.0), &m);
        for x in [-2.0, -0.3, 0.7, 3.0] {
            let ineq = lin.evaluate(&Quad::pair(p(x), p(x))).unwrap();
            assert!((ineq.lhs - ineq.rhs).abs() < 1e-15);
            assert!(ineq.holds(1e-8));
        }
        let at0 = brown.evaluate(&Quad::pair(p(0.0), p(0.0))).unwrap();
        assert_eq!((at0.lhs, at0.rhs), (0.0, 0.0));
    }

    proptest! {
        #[test]
        fn conversions_round_trip(alpha in 0.01f64..=1.0, l in 0.0f64..100.0) {
            let s = sep(alpha, l);
            prop_assert_eq!(joint_to_separate(separate_to_joint(s)), s);
        }

        #[test]
        fn builtin_separate_constants_hold(x1 in -4.0f64..4.0, x1p in -4.0f64..4.0, x in -4.0f64..4.0) {
            for k in [KernelHandle::gaussian(0.7).unwrap(), KernelHandle::laplace(1.5).unwrap(),
                      KernelHandle::cos_difference(), KernelHandle::linear_on_ball(1, 4.0).unwrap()] {
                let s = k.regularity().unwrap();
                let lhs = (k.eval(&p(x1), &p(x)).unwrap() - k.eval(&p(x1p), &p(x)).unwrap()).abs();
                prop_assert!(lhs <= s.constant * (x1 - x1p).abs().powf(s.alpha) * (1.0 + 1e-6) + 1e-15);
            }
        }
    }
}
