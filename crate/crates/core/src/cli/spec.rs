//! Kernel spec files: JSON documents discriminated by `"type"`.

use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::certificate::{HolderCertificate, Provenance};
use crate::constructors::{
    cosine_feature, distance_substitution_kernel, feature_mixture_kernel, series_kernel, FeatureFn, FeatureMixtureSpec,
    FunctionFamily, OmegaSampler, OuterFunction, OuterSpec, Primitive, SeedRng,
    truncated_gaussian_sampler,
};
use crate::error::{Error, Result};
use crate::holder::certify_from_separate;
use crate::kernel::{KernelHandle, SeparateHolderData};
use crate::metric::AmbientMetric;
use crate::point::{euclidean, Point};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

/// Certificate stated in the spec file instead of the derived one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeclaredCertificate {
    pub alpha: f64,
    #[serde(rename = "C")]
    pub constant: f64,
}

/// Where the random centers of hat / exp-decay features are drawn from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "dist", rename_all = "snake_case")]
pub enum CenterDistribution {
    Point { at: Vec<f64> },
    Uniform { lo: Vec<f64>, hi: Vec<f64> },
}

/// Feature families `Φ(x, ω)` for mixture kernels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum FeatureFamily {
    /// `√2·cos(ωᵀx + b)`, `ω ~ N(0, σ⁻²I)` truncated to `‖ω‖ ≤ radius`.
    Cosine { sigma: f64, radius: f64 },
    /// `max(0, 1 − ‖x − ω‖/width)`.
    Hat { width: f64, centers: CenterDistribution },
    /// `exp(−rate·‖x − ω‖)`.
    ExpDecay { rate: f64, centers: CenterDistribution },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum KernelKind {
    Gaussian {
        sigma: f64,
    },
    Laplace {
        gamma: f64,
    },
    /// Without `radius`, the largest Euclidean norm on the domain box.
    Linear {
        #[serde(default)]
        radius: Option<f64>,
    },
    Series {
        members: Vec<Primitive>,
        #[serde(default)]
        member_holder: Option<Vec<SeparateHolderData>>,
    },
    FeatureMixture {
        total_mass: f64,
        samples: usize,
        features: FeatureFamily,
    },
    RandomFeature {
        samples: usize,
        features: FeatureFamily,
    },
    DistanceSubstitution {
        outer: OuterSpec,
        anchors: Vec<Vec<f64>>,
        #[serde(default)]
        weights: Option<Vec<f64>>,
    },
}

impl KernelKind {
    pub fn name(&self) -> &'static str {
        match self {
            KernelKind::Gaussian { .. } => "gaussian",
            KernelKind::Laplace { .. } => "laplace",
            KernelKind::Linear { .. } => "linear",
            KernelKind::Series { .. } => "series",
            KernelKind::FeatureMixture { .. } => "feature_mixture",
            KernelKind::RandomFeature { .. } => "random_feature",
            KernelKind::DistanceSubstitution { .. } => "distance_substitution",
        }
    }

    fn provenance(&self) -> Provenance {
        match self {
            KernelKind::Gaussian { .. } | KernelKind::Laplace { .. } | KernelKind::Linear { .. } => {
                Provenance::HolderKernel
            }
            KernelKind::Series { .. } => Provenance::SeriesFrame,
            _ => Provenance::FeatureMixture,
        }
    }
}

fn default_seed() -> u64 {
    42
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelSpecFile {
    pub id: String,
    #[serde(flatten)]
    pub kind: KernelKind,
    pub domain: Domain,
    #[serde(default)]
    pub metric: AmbientMetric,
    #[serde(default)]
    pub certificate: Option<DeclaredCertificate>,
    /// Seed for Monte Carlo draws made at construction.
    #[serde(default = "default_seed")]
    pub seed: u64,
}

/// A spec turned into a kernel and the certificate to audit.
#[derive(Debug, Clone)]
pub struct BuiltKernel {
    pub kernel: KernelHandle,
    pub certificate: HolderCertificate,
}

impl KernelSpecFile {
    pub fn from_json(s: &str) -> Result<Self> {
        let spec: KernelSpecFile =
            serde_json::from_str(s).map_err(|e| Error::domain(format!("invalid kernel spec: {e}")))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let d = &self.domain;
        if d.lo.is_empty() || d.lo.len() != d.hi.len() {
            return Err(Error::domain("domain needs matching nonempty lo/hi"));
        }
        if d.lo.iter().zip(&d.hi).any(|(a, b)| !(a.is_finite() && b.is_finite() && a < b)) {
            return Err(Error::domain("domain sides must be finite with lo < hi"));
        }
        self.metric.validate()?;
        if let Some(c) = &self.certificate {
            if !(c.alpha > 0.0 && c.alpha <= 1.0) || !(c.constant >= 0.0 && c.constant.is_finite()) {
                return Err(Error::domain("declared certificate needs alpha in (0, 1] and C >= 0"));
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.domain.lo.len()
    }

    /// Builds the kernel; the certificate is the declared one when given,
    /// the derived one otherwise.
    pub fn build(&self) -> Result<BuiltKernel> {
        let (kernel, derived) = self.build_derived()?;
        let certificate = match (self.certificate, derived) {
            (Some(c), _) => HolderCertificate::new(
                c.alpha,
                c.constant,
                self.kind.provenance(),
                self.metric.clone().into(),
            )?
            .with_assumption("declared in kernel spec"),
            (None, Ok(c)) => c,
            (None, Err(e)) => return Err(e),
        };
        Ok(BuiltKernel { kernel, certificate })
    }

    /// `c` with `‖x − y‖₂ ≤ c·d(x, y)`, needed to move Euclidean constants
    /// into the spec file's metric.
    fn domination(&self) -> Result<f64> {
        self.metric.euclidean_domination(self.dim()).ok_or_else(|| {
            Error::domain("no derived constant for this metric; declare a certificate or member Hölder data")
        })
    }

    fn builtin_certificate(&self, k: &KernelHandle) -> Result<HolderCertificate> {
        let sep = k.regularity().ok_or(Error::NoRegularityData)?;
        let c = self.domination()?;
        certify_from_separate(SeparateHolderData::new(sep.alpha, sep.constant * c.powf(sep.alpha))?, &self.metric)
    }

    fn build_derived(&self) -> Result<(KernelHandle, Result<HolderCertificate>)> {
        let dim = self.dim();
        Ok(match &self.kind {
            KernelKind::Gaussian { sigma } => {
                let k = KernelHandle::gaussian(*sigma)?;
                let c = self.builtin_certificate(&k);
                (k, c)
            }
            KernelKind::Laplace { gamma } => {
                let k = KernelHandle::laplace(*gamma)?;
                let c = self.builtin_certificate(&k);
                (k, c)
            }
            KernelKind::Linear { radius } => {
                let r = match radius {
                    Some(r) => *r,
                    None => self
                        .domain
                        .lo
                        .iter()
                        .zip(&self.domain.hi)
                        .fold(0.0, |acc: f64, (a, b)| acc.hypot(a.abs().max(b.abs()))),
                };
                let k = KernelHandle::linear_on_ball(dim, r)?;
                let c = self.builtin_certificate(&k);
                (k, c)
            }
            KernelKind::Series { members, member_holder } => {
                let fam = FunctionFamily::from_primitives(members, &self.metric, member_holder.as_deref());
                match fam {
                    Ok(fam) => {
                        let c = series_kernel(&fam, &self.metric)?;
                        (c.kernel, Ok(c.certificate))
                    }
                    Err(e) if self.certificate.is_some() => {
                        // Declared certificate: constants are not needed to build.
                        let decl = vec![SeparateHolderData::new(1.0, 0.0)?; members.len()];
                        let fam = FunctionFamily::from_primitives(members, &AmbientMetric::Euclidean, Some(&decl))?;
                        (series_kernel(&fam, &self.metric)?.kernel, Err(e))
                    }
                    Err(e) => return Err(e),
                }
            }
            KernelKind::FeatureMixture { total_mass, samples, features } => {
                self.mixture(*total_mass, *samples, features)?
            }
            KernelKind::RandomFeature { samples, features } => self.mixture(1.0, *samples, features)?,
            KernelKind::DistanceSubstitution { outer, anchors, weights } => {
                let anchors: Vec<Point> = anchors.iter().cloned().map(Point::new).collect::<Result<_>>()?;
                let n = anchors.len();
                let weights = weights.clone().unwrap_or_else(|| vec![1.0 / n.max(1) as f64; n]);
                let c = distance_substitution_kernel(&OuterFunction::from_spec(outer)?, anchors, weights, &self.metric)?;
                (c.kernel, Ok(c.certificate))
            }
        })
    }

    fn mixture(
        &self,
        total_mass: f64,
        samples: usize,
        family: &FeatureFamily,
    ) -> Result<(KernelHandle, Result<HolderCertificate>)> {
        let dim = self.dim();
        let (sampler, feature, lipschitz): (OmegaSampler, FeatureFn, f64) = match family.clone() {
            FeatureFamily::Cosine { sigma, radius } => {
                if !(sigma > 0.0 && radius > 0.0 && sigma.is_finite() && radius.is_finite()) {
                    return Err(Error::domain("cosine features need sigma > 0 and radius > 0"));
                }
                (
                    truncated_gaussian_sampler(sigma, dim, radius),
                    cosine_feature(),
                    std::f64::consts::SQRT_2 * radius,
                )
            }
            FeatureFamily::Hat { width, centers } => {
                if !(width > 0.0 && width.is_finite()) {
                    return Err(Error::domain("hat width must be > 0"));
                }
                let feature: FeatureFn = Arc::new(move |x: &[f64], w: &[f64], out: &mut [f64]| {
                    out[0] = (1.0 - euclidean(x, w) / width).max(0.0);
                });
                (center_sampler(centers, dim)?, feature, 1.0 / width)
            }
            FeatureFamily::ExpDecay { rate, centers } => {
                if !(rate >= 0.0 && rate.is_finite()) {
                    return Err(Error::domain("decay rate must be >= 0"));
                }
                let feature: FeatureFn = Arc::new(move |x: &[f64], w: &[f64], out: &mut [f64]| {
                    out[0] = (-rate * euclidean(x, w)).exp();
                });
                (center_sampler(centers, dim)?, feature, rate)
            }
        };
        let spec = |l: f64| -> Result<FeatureMixtureSpec> {
            Ok(FeatureMixtureSpec {
                sampler: sampler.clone(),
                total_mass,
                feature: feature.clone(),
                feature_dim: 1,
                input_dim: Some(dim),
                feature_holder: SeparateHolderData::lipschitz(l)?,
                mc_samples: samples,
                seed: self.seed,
                metric: self.metric.clone(),
            })
        };
        match self.domination() {
            Ok(c) => {
                let built = feature_mixture_kernel(&spec(lipschitz * c)?)?;
                Ok((built.kernel, Ok(built.certificate)))
            }
            Err(e) => Ok((feature_mixture_kernel(&spec(lipschitz)?)?.kernel, Err(e))),
        }
    }
}

fn center_sampler(centers: CenterDistribution, dim: usize) -> Result<OmegaSampler> {
    match centers {
        CenterDistribution::Point { at } => {
            if at.len() != dim || at.iter().any(|v| !v.is_finite()) {
                return Err(Error::domain("center point must be finite and match the domain dimension"));
            }
            Ok(Arc::new(move |_: &mut SeedRng| at.clone()))
        }
        CenterDistribution::Uniform { lo, hi } => {
            if lo.len() != dim || hi.len() != dim || lo.iter().zip(&hi).any(|(a, b)| !(a < b)) {
                return Err(Error::domain("center box must match the domain dimension with lo < hi"));
            }
            Ok(Arc::new(move |rng: &mut SeedRng| {
                lo.iter().zip(&hi).map(|(a, b)| rng.random_range(*a..*b)).collect()
            }))
        }
    }
}
