use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::certificate::{HolderCertificate, Provenance};
use crate::constructors::{Construction, MAX_FAMILY_SIZE};
use crate::error::{Error, Result};
use crate::kernel::{KernelHandle, SeparateHolderData};
use crate::kernel_metric::FeatureMapHandle;
use crate::metric::AmbientMetric;
use crate::point::Point;

/// Symbolic outer functions `φ: [0, ∞) → ℝ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OuterSpec {
    /// `exp(−rate·t)`, Lipschitz with `rate`.
    ExpDecay { rate: f64 },
    /// `√t`, ½-Hölder with constant 1.
    Sqrt,
    /// `t^θ`, θ-Hölder with constant 1.
    Power { exponent: f64 },
    /// `max(0, 1 − t/width)`, Lipschitz with `1/width`.
    Hat { width: f64 },
    /// `exp(−t²/(2σ²))`, Lipschitz with `e^{−1/2}/σ`.
    Gaussian { sigma: f64 },
}

/// `φ` together with its Hölder data `(α, L_φ)`.
#[derive(Clone)]
pub struct OuterFunction {
    label: String,
    holder: SeparateHolderData,
    f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl fmt::Debug for OuterFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OuterFunction")
            .field("label", &self.label)
            .field("holder", &self.holder)
            .finish()
    }
}

impl OuterFunction {
    pub fn new<F>(label: impl Into<String>, holder: SeparateHolderData, f: F) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        holder.validate()?;
        Ok(OuterFunction {
            label: label.into(),
            holder,
            f: Arc::new(f),
        })
    }

    pub fn from_spec(spec: &OuterSpec) -> Result<Self> {
        let pos = |what: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(v)
            } else {
                Err(Error::domain(format!("{what} must be > 0, got {v}")))
            }
        };
        match *spec {
            OuterSpec::ExpDecay { rate } => {
                if !(rate >= 0.0 && rate.is_finite()) {
                    return Err(Error::domain(format!("rate must be >= 0, got {rate}")));
                }
                Self::new("exp_decay", SeparateHolderData::lipschitz(rate)?, move |t| (-rate * t).exp())
            }
            OuterSpec::Sqrt => Self::new("sqrt", SeparateHolderData::new(0.5, 1.0)?, f64::sqrt),
            OuterSpec::Power { exponent } => Self::new(
                format!("power({exponent})"),
                SeparateHolderData::new(exponent, 1.0)?,
                move |t| t.powf(exponent),
            ),
            OuterSpec::Hat { width } => {
                let w = pos("hat width", width)?;
                Self::new("hat", SeparateHolderData::lipschitz(1.0 / w)?, move |t| (1.0 - t / w).max(0.0))
            }
            OuterSpec::Gaussian { sigma } => {
                let s = pos("sigma", sigma)?;
                let inv = 1.0 / (2.0 * s * s);
                Self::new(
                    "gaussian",
                    SeparateHolderData::lipschitz((-0.5f64).exp() / s)?,
                    move |t| (-t * t * inv).exp(),
                )
            }
        }
    }

    pub fn holder(&self) -> SeparateHolderData {
        self.holder
    }

    pub fn eval(&self, t: f64) -> f64 {
        (self.f)(t)
    }
}

/// `k(x,x') = Σ_z w_z φ(d(x,z)) φ(d(x',z))` over weighted anchors. Each
/// `x ↦ φ(d(x,z))` inherits `(α, L_φ)` from the reverse triangle
/// inequality, so every RKHS function is α-Hölder with `L_φ·‖f‖_k`.
pub fn distance_substitution_kernel(
    outer: &OuterFunction,
    anchors: Vec<Point>,
    weights: Vec<f64>,
    metric: &AmbientMetric,
) -> Result<Construction> {
    metric.validate()?;
    if anchors.is_empty() || anchors.len() > MAX_FAMILY_SIZE {
        return Err(Error::domain(format!(
            "anchor count {} outside 1..={MAX_FAMILY_SIZE}",
            anchors.len()
        )));
    }
    if weights.len() != anchors.len() {
        return Err(Error::domain(format!(
            "{} weights for {} anchors",
            weights.len(),
            anchors.len()
        )));
    }
    if weights.iter().any(|w| !(*w >= 0.0 && w.is_finite())) {
        return Err(Error::domain("anchor weights must be finite and nonnegative"));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::domain(format!("anchor weights sum to {total}, expected 1")));
    }
    let dim = anchors[0].dim();
    if anchors.iter().any(|a| a.dim() != dim) {
        return Err(Error::domain("anchors must share one dimension"));
    }

    let roots: Vec<f64> = weights.iter().map(|w| w.sqrt()).collect();
    let (phi_fn, m) = (outer.f.clone(), metric.clone());
    let anchor_coords: Vec<Vec<f64>> = anchors.iter().map(|a| a.coords().to_vec()).collect();
    let phi = FeatureMapHandle::new(anchors.len(), Some(dim), move |x, out| {
        for ((o, z), r) in out.iter_mut().zip(&anchor_coords).zip(&roots) {
            *o = r * phi_fn(m.distance_raw(x, z));
        }
    })?;
    let kernel = KernelHandle::from_features(
        format!("distance_substitution({}, anchors={})", outer.label, anchors.len()),
        phi,
    );
    let h = outer.holder;
    let certificate = HolderCertificate::new(
        h.alpha,
        h.constant,
        Provenance::FeatureMixture,
        metric.clone().into(),
    )?
    .with_assumption(format!(
        "outer function {} is {}-Hölder with constant {}",
        outer.label, h.alpha, h.constant
    ));
    Ok(Construction { kernel, certificate })
}
