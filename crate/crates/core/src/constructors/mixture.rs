use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;

use crate::certificate::{HolderCertificate, Provenance};
use crate::constructors::{Construction, MAX_FAMILY_SIZE};
use crate::error::{Error, Result};
use crate::kernel::{KernelHandle, SeparateHolderData};
use crate::kernel_metric::FeatureMapHandle;
use crate::metric::AmbientMetric;
use crate::point::dot;

pub type SeedRng = rand_chacha::ChaCha8Rng;
/// Draws one `ω` from `(Ω, μ/μ(Ω))`.
pub type OmegaSampler = Arc<dyn Fn(&mut SeedRng) -> Vec<f64> + Send + Sync>;
/// `(x, ω, out)`: writes `Φ(x, ω)` into `out`.
pub type FeatureFn = Arc<dyn Fn(&[f64], &[f64], &mut [f64]) + Send + Sync>;

/// Kernel `k(x,x') = ∫ ⟨Φ(x',ω), Φ(x,ω)⟩ dμ(ω)` realized with `mc_samples`
/// draws frozen at construction.
#[derive(Clone)]
pub struct FeatureMixtureSpec {
    pub sampler: OmegaSampler,
    pub total_mass: f64,
    pub feature: FeatureFn,
    pub feature_dim: usize,
    pub input_dim: Option<usize>,
    /// `(α, L_Φ)`: every `Φ(·, ω)` is α-Hölder with constant `L_Φ`.
    pub feature_holder: SeparateHolderData,
    pub mc_samples: usize,
    pub seed: u64,
    pub metric: AmbientMetric,
}

impl fmt::Debug for FeatureMixtureSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FeatureMixtureSpec")
            .field("total_mass", &self.total_mass)
            .field("feature_dim", &self.feature_dim)
            .field("feature_holder", &self.feature_holder)
            .field("mc_samples", &self.mc_samples)
            .field("seed", &self.seed)
            .finish()
    }
}

/// Builds `k̂(x,x') = (μ(Ω)/M)·Σⱼ ⟨Φ(x',ωⱼ), Φ(x,ωⱼ)⟩`. Since the draws
/// are frozen, `k̂` is itself a finite series kernel and the certificate
/// `(α, L_Φ·√μ(Ω))` applies to it exactly.
pub fn feature_mixture_kernel(spec: &FeatureMixtureSpec) -> Result<Construction> {
    if spec.mc_samples == 0 || spec.mc_samples > MAX_FAMILY_SIZE {
        return Err(Error::domain(format!(
            "sample count {} outside 1..={MAX_FAMILY_SIZE}",
            spec.mc_samples
        )));
    }
    if !(spec.total_mass > 0.0 && spec.total_mass.is_finite()) {
        return Err(Error::domain(format!("total mass {} must be > 0", spec.total_mass)));
    }
    if spec.feature_dim == 0 {
        return Err(Error::domain("feature dimension must be >= 1"));
    }
    spec.feature_holder.validate()?;
    spec.metric.validate()?;

    let mut rng = SeedRng::seed_from_u64(spec.seed);
    let draws: Vec<Vec<f64>> = (0..spec.mc_samples).map(|_| (spec.sampler)(&mut rng)).collect();
    let fd = spec.feature_dim;
    let scale = (spec.total_mass / spec.mc_samples as f64).sqrt();
    let feature = spec.feature.clone();
    let phi = FeatureMapHandle::new(fd * draws.len(), spec.input_dim, move |x, out| {
        for (chunk, omega) in out.chunks_mut(fd).zip(&draws) {
            feature(x, omega, chunk);
            for v in chunk.iter_mut() {
                *v *= scale;
            }
        }
    })?;
    let kernel = KernelHandle::from_features(
        format!("feature_mixture(M={}, mass={})", spec.mc_samples, spec.total_mass),
        phi,
    );
    let h = spec.feature_holder;
    let certificate = HolderCertificate::new(
        h.alpha,
        h.constant * spec.total_mass.sqrt(),
        Provenance::FeatureMixture,
        spec.metric.clone().into(),
    )?
    .with_assumption(format!(
        "every feature Phi(., omega) is {}-Hölder with constant {}",
        h.alpha, h.constant
    ))
    .with_assumption(format!(
        "{} draws frozen with seed {}; certificate applies to the frozen kernel",
        spec.mc_samples, spec.seed
    ));
    Ok(Construction { kernel, certificate })
}

/// Probability-measure special case: `k̂(x,x') ≈ E[⟨Φ(x'), Φ(x)⟩]` with
/// certificate `(α, L_Φ)`.
#[allow(clippy::too_many_arguments)]
pub fn random_feature_kernel(
    sampler: OmegaSampler,
    feature: FeatureFn,
    feature_dim: usize,
    input_dim: Option<usize>,
    feature_holder: SeparateHolderData,
    samples: usize,
    seed: u64,
    metric: AmbientMetric,
) -> Result<Construction> {
    feature_mixture_kernel(&FeatureMixtureSpec {
        sampler,
        total_mass: 1.0,
        feature,
        feature_dim,
        input_dim,
        feature_holder,
        mc_samples: samples,
        seed,
        metric,
    })
}

const MAX_REJECTIONS: usize = 10_000;

/// `ω ~ N(0, σ⁻²I)` conditioned on `‖ω‖ ≤ radius`, followed by a phase
/// `b ~ U[0, 2π)` as the last coordinate. After `MAX_REJECTIONS` failed
/// attempts the last draw is projected onto the ball.
pub fn truncated_gaussian_sampler(sigma: f64, dim: usize, radius: f64) -> OmegaSampler {
    Arc::new(move |rng: &mut SeedRng| {
        let mut omega = vec![0.0; dim];
        for _ in 0..MAX_REJECTIONS {
            for w in omega.iter_mut() {
                let z: f64 = rng.sample(StandardNormal);
                *w = z / sigma;
            }
            if dot(&omega, &omega).sqrt() <= radius {
                break;
            }
        }
        let norm = dot(&omega, &omega).sqrt();
        if norm > radius {
            for w in omega.iter_mut() {
                *w *= radius / norm;
            }
        }
        omega.push(rng.random_range(0.0..std::f64::consts::TAU));
        omega
    })
}

/// `√2·cos(ωᵀx + b)` for draws `(ω, b)` of [`truncated_gaussian_sampler`].
pub fn cosine_feature() -> FeatureFn {
    Arc::new(|x: &[f64], omega: &[f64], out: &mut [f64]| {
        let (w, b) = omega.split_at(omega.len() - 1);
        out[0] = std::f64::consts::SQRT_2 * (dot(w, x) + b[0]).cos();
    })
}

/// Random Fourier features `√2·cos(ωᵀx + b)` for the Gaussian kernel of
/// width `sigma`, with `ω ~ N(0, σ⁻²I)` and `b ~ U[0, 2π)`.
///
/// The per-draw Lipschitz constant `√2‖ω‖` is unbounded under the Gaussian
/// spectral measure, so a truncation `‖ω‖ ≤ radius` is required; it gives
/// `L_Φ = √2·radius`.
pub fn gaussian_random_features(
    sigma: f64,
    dim: usize,
    samples: usize,
    seed: u64,
    radius: Option<f64>,
) -> Result<Construction> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::domain(format!("sigma {sigma} must be > 0")));
    }
    if dim == 0 {
        return Err(Error::domain("input dimension must be >= 1"));
    }
    let radius = radius.ok_or_else(|| {
        Error::domain(
            "cosine features have per-draw Lipschitz constant sqrt(2)*|omega|, unbounded \
             under a Gaussian spectral measure; supply a truncation radius",
        )
    })?;
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::domain(format!("truncation radius {radius} must be > 0")));
    }
    let (sampler, feature) = (truncated_gaussian_sampler(sigma, dim, radius), cosine_feature());
    let mut c = random_feature_kernel(
        sampler,
        feature,
        1,
        Some(dim),
        SeparateHolderData::lipschitz(std::f64::consts::SQRT_2 * radius)?,
        samples,
        seed,
        AmbientMetric::Euclidean,
    )?;
    c.certificate = c
        .certificate
        .with_assumption(format!("spectral draws truncated to |omega| <= {radius}"));
    Ok(c)
}
