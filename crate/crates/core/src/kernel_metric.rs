//! The kernel semimetric `d_k(x,x') = ‖k(·,x) − k(·,x')‖_k` and the
//! Lipschitz facts it carries.
//!
//! `d_k` is evaluated through the polarization identity
//! `d_k² = k(x,x) − k(x,x') − k(x',x) + k(x',x')`. Some published versions
//! of this identity print plus signs on the cross terms; that form would give
//! `d_k(x,x) = 2√k(x,x) ≠ 0` and is not what is implemented.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::kernel::KernelHandle;
use crate::point::{check_same_dim, compensated_dot, euclidean, Point};
use crate::predicate::{Inequality, Predicate, Quad};

/// Radicands of `d_k²` down to this value are treated as roundoff and
/// clamped to zero.
pub const RADICAND_TOL: f64 = 1e-10;

type FeatureFn = dyn Fn(&[f64], &mut [f64]) + Send + Sync;

/// A feature map `Φ: X → ℝ^m` into a finite-dimensional feature space.
#[derive(Clone)]
pub struct FeatureMapHandle {
    dim: usize,
    input_dim: Option<usize>,
    map: Arc<FeatureFn>,
}

impl fmt::Debug for FeatureMapHandle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FeatureMapHandle")
            .field("dim", &self.dim)
            .field("input_dim", &self.input_dim)
            .finish()
    }
}

impl FeatureMapHandle {
    /// `map(x, out)` must fill all `dim` entries of `out`.
    pub fn new<F>(dim: usize, input_dim: Option<usize>, map: F) -> Result<Self>
    where
        F: Fn(&[f64], &mut [f64]) + Send + Sync + 'static,
    {
        if dim == 0 {
            return Err(Error::domain("feature dimension must be >= 1"));
        }
        Ok(FeatureMapHandle {
            dim,
            input_dim,
            map: Arc::new(map),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn input_dim(&self) -> Option<usize> {
        self.input_dim
    }

    pub fn eval(&self, x: &Point) -> Result<Vec<f64>> {
        if let Some(d) = self.input_dim {
            if d != x.dim() {
                return Err(Error::domain(format!(
                    "feature map expects dimension {d}, got {}",
                    x.dim()
                )));
            }
        }
        let v = self.eval_raw(x.coords());
        if v.iter().any(|c| !c.is_finite()) {
            return Err(Error::Numerics("non-finite feature value".into()));
        }
        Ok(v)
    }

    pub(crate) fn eval_raw(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        (self.map)(x, &mut out);
        out
    }

    /// `⟨Φ(x), Φ(y)⟩`.
    pub(crate) fn inner_raw(&self, x: &[f64], y: &[f64]) -> f64 {
        compensated_dot(&self.eval_raw(x), &self.eval_raw(y))
    }
}

/// `d_k(x, x')` via polarization.
pub fn kernel_distance(k: &KernelHandle, x: &Point, y: &Point) -> Result<f64> {
    let kxx = k.eval(x, x)?;
    let kxy = k.eval(x, y)?;
    let kyx = k.eval(y, x)?;
    let kyy = k.eval(y, y)?;
    radicand_sqrt((kxx + kyy) - (kxy + kyx))
}

pub(crate) fn radicand_sqrt(r: f64) -> Result<f64> {
    if r < -RADICAND_TOL {
        return Err(Error::PsdViolation {
            what: "d_k radicand".into(),
            value: r,
            tolerance: RADICAND_TOL,
        });
    }
    Ok(r.max(0.0).sqrt())
}

/// `‖Φ(x) − Φ(x')‖₂`, computed directly in feature space.
pub fn feature_distance(phi: &FeatureMapHandle, x: &Point, y: &Point) -> Result<f64> {
    check_same_dim(x, y)?;
    Ok(euclidean(&phi.eval(x)?, &phi.eval(y)?))
}

/// The Lipschitz-in-`d_k` claims about the kernel itself, for a kernel with
/// `‖k‖∞ ≤ sup_norm`:
///
/// * (a) `|k(x₁,x) − k(x₁',x)| ≤ √k(x,x)·d_k(x₁,x₁')` (with `x = x₂`)
/// * (b) `|k(x₁,x₂) − k(x₁',x₂')| ≤ ‖k‖∞·(d_k(x₁,x₁') + d_k(x₂,x₂'))`
/// * (c) `|k(x,x) − k(x',x')| ≤ 2‖k‖∞·d_k(x,x')`
/// * (d) `|√k(x,x) − √k(x',x')| ≤ d_k(x,x')`
///
/// plus, when the kernel has an explicit feature map,
/// (e) `‖Φ(x) − Φ(x')‖ ≤ d_k(x,x')`.
pub fn dk_lipschitz_bounds(k: &KernelHandle, sup_norm: f64) -> Vec<Predicate> {
    let mut out = Vec::new();

    let kk = k.clone();
    out.push(Predicate::new("(a) k(.,x) is sqrt(k(x,x))-Lipschitz in d_k", move |q| {
        let lhs = (kk.eval(&q.x1, &q.x2)? - kk.eval(&q.x1p, &q.x2)?).abs();
        let kxx = kk.eval(&q.x2, &q.x2)?;
        let rhs = kxx.max(0.0).sqrt() * kernel_distance(&kk, &q.x1, &q.x1p)?;
        Ok(Inequality::new(lhs, rhs, diag_scale(&kk, q)?))
    }));

    let kk = k.clone();
    out.push(Predicate::new("(b) k is ||k||_inf-Lipschitz on X x X", move |q| {
        let lhs = (kk.eval(&q.x1, &q.x2)? - kk.eval(&q.x1p, &q.x2p)?).abs();
        let rhs = sup_norm
            * (kernel_distance(&kk, &q.x1, &q.x1p)? + kernel_distance(&kk, &q.x2, &q.x2p)?);
        Ok(Inequality::new(lhs, rhs, diag_scale(&kk, q)?))
    }));

    let kk = k.clone();
    out.push(Predicate::new("(c) diagonal is 2||k||_inf-Lipschitz", move |q| {
        let lhs = (kk.eval(&q.x1, &q.x1)? - kk.eval(&q.x1p, &q.x1p)?).abs();
        let rhs = 2.0 * sup_norm * kernel_distance(&kk, &q.x1, &q.x1p)?;
        Ok(Inequality::new(lhs, rhs, diag_scale(&kk, q)?))
    }));

    let kk = k.clone();
    out.push(Predicate::new("(d) sqrt of diagonal is 1-Lipschitz", move |q| {
        let a = kk.eval(&q.x1, &q.x1)?.max(0.0).sqrt();
        let b = kk.eval(&q.x1p, &q.x1p)?.max(0.0).sqrt();
        let rhs = kernel_distance(&kk, &q.x1, &q.x1p)?;
        Ok(Inequality::new((a - b).abs(), rhs, diag_scale(&kk, q)?))
    }));

    if let Some(phi) = k.features().cloned() {
        let kk = k.clone();
        out.push(Predicate::new("(e) feature map is 1-Lipschitz in d_k", move |q| {
            let lhs = feature_distance(&phi, &q.x1, &q.x1p)?;
            let rhs = kernel_distance(&kk, &q.x1, &q.x1p)?;
            Ok(Inequality::new(lhs, rhs, diag_scale(&kk, q)?))
        }));
    }
    out
}

/// Largest diagonal value among the tuple's points.
pub(crate) fn diag_scale(k: &KernelHandle, q: &Quad) -> Result<f64> {
    let mut m = 0.0f64;
    for p in [&q.x1, &q.x1p, &q.x2, &q.x2p] {
        m = m.max(k.eval(p, p)?.abs());
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(x: f64) -> Point {
        Point::scalar(x)
    }

    fn hat_kernel() -> KernelHandle {
        let phi = FeatureMapHandle::new(1, Some(1), |x, out| out[0] = (1.0 - x[0].abs()).max(0.0))
            .unwrap();
        KernelHandle::from_features("hat", phi)
    }

    #[test]
    fn distance_examples() {
        let g = KernelHandle::gaussian(1.0).unwrap();
        assert_eq!(kernel_distance(&g, &p(0.3), &p(0.3)).unwrap(), 0.0);
        // sqrt(2 - 2 e^{-1/2}) evaluated in extended precision.
        let expected = 0.887_095_643_419_994;
        assert!((kernel_distance(&g, &p(0.0), &p(1.0)).unwrap() - expected).abs() < 1e-12);
        assert!((kernel_distance(&hat_kernel(), &p(0.0), &p(1.0)).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn feature_distance_examples() {
        let lin = KernelHandle::linear(1).unwrap();
        let phi = lin.features().unwrap();
        assert_eq!(feature_distance(phi, &p(0.0), &p(1.0)).unwrap(), 1.0);
        assert_eq!(kernel_distance(&lin, &p(0.0), &p(1.0)).unwrap(), 1.0);
        let constant = FeatureMapHandle::new(3, None, |_, out| out.fill(0.7)).unwrap();
        assert_eq!(feature_distance(&constant, &p(-2.0), &p(5.0)).unwrap(), 0.0);
    }

    #[test]
    fn negative_radicand_is_psd_violation() {
        let bad = KernelHandle::from_fn("bad", None, |x, y| if x == y { 0.0 } else { 1.0 });
        assert!(matches!(
            kernel_distance(&bad, &p(0.0), &p(1.0)),
            Err(Error::PsdViolation { .. })
        ));
        // Tiny negative radicands are clamped.
        assert_eq!(radicand_sqrt(-1e-12).unwrap(), 0.0);
    }

    #[test]
    fn bound_examples() {
        let g = KernelHandle::gaussian(1.0).unwrap();
        let preds = dk_lipschitz_bounds(&g, 1.0);
        let d = preds.iter().find(|p| p.name().starts_with("(d)")).unwrap();
        let ineq = d.evaluate(&Quad::pair(p(0.0), p(1.0))).unwrap();
        assert_eq!(ineq.lhs, 0.0);
        assert!((ineq.rhs - 0.887095643419994).abs() < 1e-12);

        let a = &preds[0];
        let q = Quad {
            x1: p(0.4),
            x1p: p(0.4),
            x2: p(-1.0),
            x2p: p(2.0),
        };
        let ineq = a.evaluate(&q).unwrap();
        assert_eq!((ineq.lhs, ineq.rhs), (0.0, 0.0));

        let c = KernelHandle::cos_difference();
        let preds = dk_lipschitz_bounds(&c, 1.0);
        assert_eq!(preds.len(), 5);
        let claim_c = preds.iter().find(|p| p.name().starts_with("(c)")).unwrap();
        let ineq = claim_c.evaluate(&Quad::pair(p(0.1), p(2.9))).unwrap();
        assert_eq!(ineq.lhs, 0.0);
        assert!(ineq.holds(1e-8));
    }

    proptest! {
        #[test]
        fn semimetric_axioms(a in -3.0f64..3.0, b in -3.0f64..3.0, c in -3.0f64..3.0) {
            for k in [KernelHandle::gaussian(1.0).unwrap(), KernelHandle::laplace(0.5).unwrap(),
                      KernelHandle::cos_difference(), hat_kernel()] {
                let dab = kernel_distance(&k, &p(a), &p(b)).unwrap();
                prop_assert_eq!(dab, kernel_distance(&k, &p(b), &p(a)).unwrap());
                prop_assert_eq!(kernel_distance(&k, &p(a), &p(a)).unwrap(), 0.0);
                let dac = kernel_distance(&k, &p(a), &p(c)).unwrap();
                let dcb = kernel_distance(&k, &p(c), &p(b)).unwrap();
                prop_assert!(dab <= dac + dcb + 1e-8);
            }
        }

        #[test]
        fn feature_and_kernel_distance_agree(a in -3.0f64..3.0, b in -3.0f64..3.0) {
            for k in [KernelHandle::cos_difference(), KernelHandle::linear(1).unwrap(), hat_kernel()] {
                let phi = k.features().unwrap();
                let fd = feature_distance(phi, &p(a), &p(b)).unwrap();
                let kd = kernel_distance(&k, &p(a), &p(b)).unwrap();
                prop_assert!((fd - kd).abs() <= 1e-8);
            }
        }
    }
}
