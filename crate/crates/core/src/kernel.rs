use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel_metric::FeatureMapHandle;
use crate::point::{check_same_dim, euclidean, Point};

/// Absolute tolerance for the symmetry invariant `k(x,x') = k(x',x)`.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// A pure, symmetric, positive semidefinite bivariate function on raw
/// coordinate slices.
pub trait KernelFn: Send + Sync {
    fn eval(&self, x: &[f64], y: &[f64]) -> f64;
}

struct FnKernel<F>(F);

impl<F> KernelFn for FnKernel<F>
where
    F: Fn(&[f64], &[f64]) -> f64 + Send + Sync,
{
    fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        (self.0)(x, y)
    }
}

/// Uniform separate Hölder data: `|k(x₁,x) − k(x₁',x)| ≤ L·d(x₁,x₁')^α`
/// for all `x, x₁, x₁'`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeparateHolderData {
    pub alpha: f64,
    pub constant: f64,
}

impl SeparateHolderData {
    pub fn new(alpha: f64, constant: f64) -> Result<Self> {
        let s = SeparateHolderData { alpha, constant };
        s.validate()?;
        Ok(s)
    }

    pub fn lipschitz(constant: f64) -> Result<Self> {
        Self::new(1.0, constant)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::domain(format!(
                "Hölder exponent {} outside (0, 1]",
                self.alpha
            )));
        }
        if !(self.constant >= 0.0 && self.constant.is_finite()) {
            return Err(Error::domain(format!(
                "Hölder constant {} must be finite and nonnegative",
                self.constant
            )));
        }
        Ok(())
    }
}

/// An evaluable kernel plus optional regularity metadata.
#[derive(Clone)]
pub struct KernelHandle {
    name: String,
    dim: Option<usize>,
    evaluator: Arc<dyn KernelFn>,
    regularity: Option<SeparateHolderData>,
    sup_norm_hint: Option<f64>,
    features: Option<FeatureMapHandle>,
}

impl fmt::Debug for KernelHandle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KernelHandle")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("regularity", &self.regularity)
            .field("sup_norm_hint", &self.sup_norm_hint)
            .field("features", &self.features.as_ref().map(|f| f.dim()))
            .finish()
    }
}

impl KernelHandle {
    pub fn new(name: impl Into<String>, dim: Option<usize>, evaluator: Arc<dyn KernelFn>) -> Self {
        KernelHandle {
            name: name.into(),
            dim,
            evaluator,
            regularity: None,
            sup_norm_hint: None,
            features: None,
        }
    }

    /// Wraps a closure. The caller is responsible for symmetry and PSD.
    pub fn from_fn<F>(name: impl Into<String>, dim: Option<usize>, f: F) -> Self
    where
        F: Fn(&[f64], &[f64]) -> f64 + Send + Sync + 'static,
    {
        Self::new(name, dim, Arc::new(FnKernel(f)))
    }

    /// Kernel `k(x,x') = ⟨Φ(x'), Φ(x)⟩` of an explicit finite feature map.
    pub fn from_features(name: impl Into<String>, features: FeatureMapHandle) -> Self {
        let phi = features.clone();
        let mut k = Self::from_fn(name, features.input_dim(), move |x, y| {
            phi.inner_raw(y, x)
        });
        k.features = Some(features);
        k
    }

    pub fn with_regularity(mut self, data: SeparateHolderData) -> Result<Self> {
        data.validate()?;
        self.regularity = Some(data);
        Ok(self)
    }

    pub fn without_regularity(mut self) -> Self {
        self.regularity = None;
        self
    }

    pub fn with_sup_norm_hint(mut self, hint: f64) -> Result<Self> {
        if !(hint >= 0.0 && hint.is_finite()) {
            return Err(Error::domain(format!("invalid sup-norm hint {hint}")));
        }
        self.sup_norm_hint = Some(hint);
        Ok(self)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> Option<usize> {
        self.dim
    }

    pub fn regularity(&self) -> Option<SeparateHolderData> {
        self.regularity
    }

    pub fn sup_norm_hint(&self) -> Option<f64> {
        self.sup_norm_hint
    }

    /// Explicit feature map, when the kernel was built from one.
    pub fn features(&self) -> Option<&FeatureMapHandle> {
        self.features.as_ref()
    }

    pub(crate) fn check_point(&self, x: &Point) -> Result<()> {
        match self.dim {
            Some(d) if d != x.dim() => Err(Error::domain(format!(
                "kernel '{}' is defined on dimension {d}, got a point of dimension {}",
                self.name,
                x.dim()
            ))),
            _ => Ok(()),
        }
    }

    /// `k(x, x')`, with dimension and finiteness checks.
    pub fn eval(&self, x: &Point, y: &Point) -> Result<f64> {
        check_same_dim(x, y)?;
        self.check_point(x)?;
        let v = self.evaluator.eval(x.coords(), y.coords());
        if !v.is_finite() {
            return Err(Error::Numerics(format!(
                "kernel '{}' returned {v}",
                self.name
            )));
        }
        Ok(v)
    }

    /// Unchecked evaluation for inner loops whose points were validated.
    pub(crate) fn eval_raw(&self, x: &[f64], y: &[f64]) -> f64 {
        self.evaluator.eval(x, y)
    }

    /// `exp(−‖x − x'‖² / (2σ²))`; separately Lipschitz with `e^{−1/2}/σ`.
    pub fn gaussian(sigma: f64) -> Result<Self> {
        positive("sigma", sigma)?;
        let inv = 1.0 / (2.0 * sigma * sigma);
        Self::from_fn(format!("gaussian(sigma={sigma})"), None, move |x, y| {
            let r = euclidean(x, y);
            (-r * r * inv).exp()
        })
        .with_regularity(SeparateHolderData::lipschitz((-0.5f64).exp() / sigma)?)?
        .with_sup_norm_hint(1.0)
    }

    /// `exp(−‖x − x'‖ / γ)`; separately Lipschitz with `1/γ`.
    pub fn laplace(gamma: f64) -> Result<Self> {
        positive("gamma", gamma)?;
        Self::from_fn(format!("laplace(gamma={gamma})"), None, move |x, y| {
            (-euclidean(x, y) / gamma).exp()
        })
        .with_regularity(SeparateHolderData::lipschitz(1.0 / gamma)?)?
        .with_sup_norm_hint(1.0)
    }

    /// `⟨x, x'⟩` with identity feature map; no regularity data.
    pub fn linear(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::domain("linear kernel needs dim >= 1"));
        }
        let phi = FeatureMapHandle::new(dim, Some(dim), |x, out| out.copy_from_slice(x))?;
        Ok(Self::from_features("linear", phi))
    }

    /// Linear kernel restricted to the Euclidean ball of radius `radius`,
    /// where it is separately Lipschitz with constant `radius`.
    pub fn linear_on_ball(dim: usize, radius: f64) -> Result<Self> {
        if !(radius >= 0.0 && radius.is_finite()) {
            return Err(Error::domain(format!("invalid radius {radius}")));
        }
        let mut k = Self::linear(dim)?
            .with_regularity(SeparateHolderData::lipschitz(radius)?)?
            .with_sup_norm_hint(radius)?;
        k.name = format!("linear(radius={radius})");
        Ok(k)
    }

    /// `cos(x − x') = cos x cos x' + sin x sin x'` on the real line.
    pub fn cos_difference() -> Self {
        let phi = FeatureMapHandle::new(2, Some(1), |x, out| {
            out[0] = x[0].sin();
            out[1] = x[0].cos();
        })
        .expect("fixed feature dimension");
        let mut k = Self::from_features("cos_difference", phi);
        k.regularity = Some(SeparateHolderData {
            alpha: 1.0,
            constant: 1.0,
        });
        k.sup_norm_hint = Some(1.0);
        k
    }

    /// Brownian-motion kernel `min(x, x')` on `[0, ∞)`.
    pub fn brownian() -> Self {
        let mut k = Self::from_fn("brownian", Some(1), |x, y| x[0].min(y[0]));
        k.regularity = Some(SeparateHolderData {
            alpha: 1.0,
            constant: 1.0,
        });
        k
    }

    /// Constant kernel `c ≥ 0`; `c = 0` is the zero kernel.
    pub fn constant(c: f64) -> Result<Self> {
        if !(c >= 0.0 && c.is_finite()) {
            return Err(Error::domain(format!("constant kernel needs c >= 0, got {c}")));
        }
        let root = c.sqrt();
        let phi = FeatureMapHandle::new(1, None, move |_, out| out[0] = root)?;
        let mut k = Self::from_features(if c == 0.0 { "zero".to_string() } else { format!("constant({c})") }, phi);
        k.regularity = Some(SeparateHolderData {
            alpha: 1.0,
            constant: 0.0,
        });
        k.sup_norm_hint = Some(root);
        Ok(k)
    }

    pub fn zero() -> Self {
        Self::constant(0.0).expect("zero is a valid constant")
    }
}

fn positive(what: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("{what} must be positive and finite, got {v}")))
    }
}

/// `k(x, x')`.
pub fn eval_kernel(k: &KernelHandle, x: &Point, y: &Point) -> Result<f64> {
    k.eval(x, y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(x: f64) -> Point {
        Point::scalar(x)
    }

    #[test]
    fn gaussian_values() {
        let k = KernelHandle::gaussian(1.0).unwrap();
        assert_eq!(k.eval(&p(0.0), &p(0.0)).unwrap(), 1.0);
        assert!((k.eval(&p(0.0), &p(1.0)).unwrap() - 0.6065306597126334).abs() < 1e-15);
        let reg = k.regularity().unwrap();
        assert_eq!(reg.alpha, 1.0);
        assert!((reg.constant - (-0.5f64).exp()).abs() < 1e-16);
    }

    #[test]
    fn rank_one_hat_value() {
        let hat = |t: f64| (1.0 - t.abs()).max(0.0);
        let k = KernelHandle::from_fn("hat", Some(1), move |x, y| hat(x[0]) * hat(y[0]));
        assert_eq!(k.eval(&p(0.0), &p(0.5)).unwrap(), 0.5);
    }

    #[test]
    fn dimension_mismatch_is_domain_error() {
        let k = KernelHandle::gaussian(1.0).unwrap();
        let e = k.eval(&p(0.0), &Point::new(vec![0.0, 1.0]).unwrap());
        assert!(matches!(e, Err(Error::Domain(_))));
        let c = KernelHandle::cos_difference();
        let two = Point::new(vec![0.0, 1.0]).unwrap();
        assert!(matches!(c.eval(&two, &two), Err(Error::Domain(_))));
    }

    #[test]
    fn non_finite_output_is_numerics_error() {
        let k = KernelHandle::from_fn("bad", None, |_, _| f64::NAN);
        assert!(matches!(k.eval(&p(0.0), &p(0.0)), Err(Error::Numerics(_))));
    }

    #[test]
    fn invalid_parameters() {
        assert!(KernelHandle::gaussian(0.0).is_err());
        assert!(KernelHandle::laplace(-1.0).is_err());
        assert!(KernelHandle::constant(-1.0).is_err());
        assert!(SeparateHolderData::new(1.5, 1.0).is_err());
        assert!(SeparateHolderData::new(0.5, -1.0).is_err());
    }

    proptest! {
        #[test]
        fn builtins_symmetric_and_cauchy_schwarz(a in -3.0f64..3.0, b in -3.0f64..3.0) {
            let kernels = vec![
                KernelHandle::gaussian(0.7).unwrap(),
                KernelHandle::laplace(1.3).unwrap(),
                KernelHandle::linear(1).unwrap(),
                KernelHandle::cos_difference(),
                KernelHandle::constant(2.0).unwrap(),
            ];
            for k in &kernels {
                let kxy = k.eval(&p(a), &p(b)).unwrap();
                let kyx = k.eval(&p(b), &p(a)).unwrap();
                prop_assert!((kxy - kyx).abs() <= SYMMETRY_TOL * kxy.abs().max(1.0));
                let kxx = k.eval(&p(a), &p(a)).unwrap();
                let kyy = k.eval(&p(b), &p(b)).unwrap();
                prop_assert!(kxx >= 0.0);
                prop_assert!(kxy.abs() <= kxx.sqrt() * kyy.sqrt() + 1e-10);
            }
        }
    }
}
