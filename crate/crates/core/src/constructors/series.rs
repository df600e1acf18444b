use std::fmt;
use std::sync::Arc;

use crate::certificate::{HolderCertificate, Provenance};
use crate::constructors::{Construction, Primitive, MAX_FAMILY_SIZE};
use crate::error::{Error, Result};
use crate::kernel::{KernelHandle, SeparateHolderData};
use crate::kernel_metric::FeatureMapHandle;
use crate::metric::AmbientMetric;

pub type MemberFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Finite family `(fᵢ)` of α-Hölder functions with constants `Lᵢ`.
#[derive(Clone)]
pub struct FunctionFamily {
    alpha: f64,
    input_dim: Option<usize>,
    members: Vec<MemberFn>,
    constants: Vec<f64>,
    labels: Vec<String>,
    /// Disjoint member pairs `(i, j, L)` with `‖(fᵢ, fⱼ)(x) − (fᵢ, fⱼ)(y)‖₂ ≤ L·d(x, y)^α`.
    joint: Vec<(usize, usize, f64)>,
}

impl fmt::Debug for FunctionFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FunctionFamily")
            .field("alpha", &self.alpha)
            .field("input_dim", &self.input_dim)
            .field("labels", &self.labels)
            .field("constants", &self.constants)
            .finish()
    }
}

impl FunctionFamily {
    pub fn new(alpha: f64, input_dim: Option<usize>) -> Result<Self> {
        SeparateHolderData::new(alpha, 0.0)?;
        Ok(FunctionFamily {
            alpha,
            input_dim,
            members: Vec::new(),
            constants: Vec::new(),
            labels: Vec::new(),
            joint: Vec::new(),
        })
    }

    /// Adds a member declared α-Hölder with constant `constant`.
    pub fn with_member<F>(mut self, label: impl Into<String>, constant: f64, f: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        if !(constant >= 0.0 && constant.is_finite()) {
            return Err(Error::domain(format!("member constant {constant} must be >= 0")));
        }
        if self.members.len() >= MAX_FAMILY_SIZE {
            return Err(Error::domain(format!("family larger than {MAX_FAMILY_SIZE}")));
        }
        self.members.push(Arc::new(f));
        self.constants.push(constant);
        self.labels.push(label.into());
        Ok(self)
    }

    /// Family of symbolic primitives. Without `declared` data each member
    /// is Lipschitz (α = 1) with its Euclidean constant transferred to
    /// `metric`; with it, all declared exponents must agree.
    pub fn from_primitives(
        prims: &[Primitive],
        metric: &AmbientMetric,
        declared: Option<&[SeparateHolderData]>,
    ) -> Result<Self> {
        let mut dim = None;
        for p in prims {
            if let Some(d) = p.input_dim()? {
                match dim {
                    Some(e) if e != d => {
                        return Err(Error::domain(format!("member dimensions disagree: {e} vs {d}")))
                    }
                    _ => dim = Some(d),
                }
            }
        }
        let mut transfer = None;
        let constants: Vec<(f64, f64)> = match declared {
            Some(decl) => {
                if decl.len() != prims.len() {
                    return Err(Error::domain(format!(
                        "{} declared Hölder entries for {} members",
                        decl.len(),
                        prims.len()
                    )));
                }
                for d in decl {
                    d.validate()?;
                }
                decl.iter().map(|d| (d.alpha, d.constant)).collect()
            }
            None => {
                let c = metric.euclidean_domination(dim.unwrap_or(1)).ok_or_else(|| {
                    Error::domain("no derived Lipschitz constants for this metric; declare member Hölder data")
                })?;
                transfer = Some(c);
                prims.iter().map(|p| (1.0, p.lipschitz() * c)).collect()
            }
        };
        let alpha = constants.first().map(|c| c.0).unwrap_or(1.0);
        if constants.iter().any(|c| c.0 != alpha) {
            return Err(Error::domain("all family members must share one Hölder exponent"));
        }
        let mut fam = FunctionFamily::new(alpha, dim)?;
        for (p, (_, l)) in prims.iter().zip(constants) {
            let prim = p.clone();
            fam = fam.with_member(format!("{p:?}"), l, move |x| prim.eval(x))?;
        }
        if let Some(c) = transfer {
            fam.joint = quadrature_pairs(prims, c);
        }
        Ok(fam)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn input_dim(&self) -> Option<usize> {
        self.input_dim
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn constants(&self) -> &[f64] {
        &self.constants
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn member(&self, i: usize) -> MemberFn {
        self.members[i].clone()
    }

    /// `supᵢ Lᵢ`.
    pub fn sup_constant(&self) -> f64 {
        self.constants.iter().copied().fold(0.0, f64::max)
    }

    /// Hölder constant of the feature map `x ↦ (fᵢ(x))ᵢ` into `ℓ²`:
    /// `√(Σ L_g²)` over matched pairs and remaining single members.
    pub fn frame_constant(&self) -> f64 {
        let mut paired = vec![false; self.len()];
        let mut sq = 0.0;
        for &(i, j, l) in &self.joint {
            paired[i] = true;
            paired[j] = true;
            sq += l * l;
        }
        sq += self
            .constants
            .iter()
            .zip(&paired)
            .filter(|(_, p)| !**p)
            .map(|(l, _)| l * l)
            .sum::<f64>();
        sq.sqrt()
    }
}

/// Pairs `sin(w·x + φ)`, `cos(w·x + φ)` with equal `w, φ`; jointly they move
/// by `2|sin(w·h/2)| ≤ ‖w‖·‖h‖`.
fn quadrature_pairs(prims: &[Primitive], transfer: f64) -> Vec<(usize, usize, f64)> {
    let mut used = vec![false; prims.len()];
    let mut out = Vec::new();
    for (i, a) in prims.iter().enumerate() {
        let Primitive::Sine { freq, phase } = a else { continue };
        let partner = (0..prims.len()).find(|&j| {
            !used[j]
                && matches!(&prims[j], Primitive::Cosine { freq: f, phase: q } if f == freq && q == phase)
        });
        if let Some(j) = partner {
            used[i] = true;
            used[j] = true;
            out.push((i, j, a.lipschitz() * transfer));
        }
    }
    out
}

/// `k(x,x') = Σᵢ fᵢ(x)·fᵢ(x')`. The family is a Parseval frame of the
/// resulting RKHS and `d_k(x, y)² = Σᵢ |fᵢ(x) − fᵢ(y)|²`, so every
/// `f ∈ H_k` is α-Hölder with `frame_constant()·‖f‖_k`. `supᵢ Lᵢ` alone is
/// not enough: `{x, x}` gives `f = 2x` with `‖f‖_k = √2`.
/// The member constants must be stated with respect to `metric`.
pub fn series_kernel(fam: &FunctionFamily, metric: &AmbientMetric) -> Result<Construction> {
    if fam.is_empty() {
        return Err(Error::domain("series kernel needs a nonempty family"));
    }
    metric.validate()?;
    let members = fam.members.clone();
    let phi = FeatureMapHandle::new(members.len(), fam.input_dim, move |x, out| {
        for (o, f) in out.iter_mut().zip(&members) {
            *o = f(x);
        }
    })?;
    let kernel = KernelHandle::from_features(format!("series(m={})", fam.len()), phi);
    let mut cert = HolderCertificate::new(
        fam.alpha,
        fam.frame_constant(),
        Provenance::SeriesFrame,
        metric.clone().into(),
    )?;
    for (label, l) in fam.labels.iter().zip(&fam.constants) {
        cert = cert.with_assumption(format!("member {label} is {}-Hölder with constant {l}", fam.alpha));
    }
    for &(i, j, l) in &fam.joint {
        cert = cert.with_assumption(format!(
            "members {} and {} move jointly with constant {l}",
            fam.labels[i], fam.labels[j]
        ));
    }
    Ok(Construction {
        kernel,
        certificate: cert,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gram::{gram, PreRkhsFunction};
    use crate::point::Point;
    use proptest::prelude::*;

    fn p(x: f64) -> Point {
        Point::scalar(x)
    }

    fn sin_cos() -> Construction {
        let fam = FunctionFamily::from_primitives(&[Primitive::sin(), Primitive::cos()], &AmbientMetric::Euclidean, None)
            .unwrap();
        series_kernel(&fam, &AmbientMetric::Euclidean).unwrap()
    }

    #[test]
    fn sin_cos_is_cos_difference() {
        let c = sin_cos();
        assert_eq!((c.certificate.alpha, c.certificate.constant_per_unit_norm), (1.0, 1.0));
        assert_eq!(c.certificate.provenance, Provenance::SeriesFrame);
        for (a, b) in [(0.0, 1.0), (-2.0, 2.5), (0.3, 0.3)] {
            let v = c.kernel.eval(&p(a), &p(b)).unwrap();
            assert!((v - (a - b).cos()).abs() < 1e-15);
        }
    }

    #[test]
    fn constant_member_gives_constant_kernel() {
        let fam = FunctionFamily::from_primitives(&[Primitive::Constant { value: 1.5 }], &AmbientMetric::Euclidean, None)
            .unwrap();
        let c = series_kernel(&fam, &AmbientMetric::Euclidean).unwrap();
        assert_eq!(c.kernel.eval(&p(-1.0), &p(7.0)).unwrap(), 2.25);
        assert_eq!(c.certificate.constant_per_unit_norm, 0.0);
    }

    #[test]
    fn identity_member_is_tight() {
        let fam = FunctionFamily::new(1.0, Some(1))
            .unwrap()
            .with_member("x", 1.0, |x| x[0])
            .unwrap();
        let c = series_kernel(&fam, &AmbientMetric::Euclidean).unwrap();
        assert_eq!(c.kernel.eval(&p(0.5), &p(0.8)).unwrap(), 0.4);
        assert_eq!(c.certificate.constant_per_unit_norm, 1.0);
        // f₁ = k(·, 1) has norm 1 and Lipschitz constant exactly 1.
        let f = PreRkhsFunction::section(c.kernel, p(1.0)).unwrap();
        assert_eq!(f.rkhs_norm().unwrap(), 1.0);
        assert_eq!(f.eval(&p(0.75)).unwrap() - f.eval(&p(0.25)).unwrap(), 0.5);
    }

    #[test]
    fn repeated_member_needs_root_sum_of_squares() {
        let fam = FunctionFamily::new(1.0, Some(1))
            .unwrap()
            .with_member("x", 1.0, |x| x[0])
            .unwrap()
            .with_member("x", 1.0, |x| x[0])
            .unwrap();
        assert_eq!(fam.sup_constant(), 1.0);
        let c = series_kernel(&fam, &AmbientMetric::Euclidean).unwrap();
        assert_eq!(c.certificate.constant_per_unit_norm, 2f64.sqrt());
        // k = 2xx', f = k(·, 1) = 2x, ‖f‖ = √2: slope 2 = √2·‖f‖.
        let f = PreRkhsFunction::section(c.kernel, p(1.0)).unwrap();
        let slope = f.eval(&p(1.0)).unwrap() - f.eval(&p(0.0)).unwrap();
        assert!((slope - 2f64.sqrt() * f.rkhs_norm().unwrap()).abs() < 1e-15);
    }

    #[test]
    fn quadrature_pairs_matched_once() {
        let w = vec![3.0, 4.0];
        let sin = Primitive::Sine { freq: w.clone(), phase: 0.5 };
        let cos = Primitive::Cosine { freq: w.clone(), phase: 0.5 };
        let other = Primitive::Cosine { freq: w, phase: 0.0 };
        let fam = FunctionFamily::from_primitives(&[sin.clone(), other, cos, sin], &AmbientMetric::Euclidean, None)
            .unwrap();
        // One pair at 5, two singles at 5.
        assert!((fam.frame_constant() - 75f64.sqrt()).abs() < 1e-14);
        let cheb = FunctionFamily::from_primitives(&[Primitive::sin(), Primitive::cos()], &AmbientMetric::Chebyshev, None)
            .unwrap();
        assert_eq!(cheb.frame_constant(), 1.0);
    }

    #[test]
    fn invalid_families() {
        let empty = FunctionFamily::new(1.0, Some(1)).unwrap();
        assert!(matches!(series_kernel(&empty, &AmbientMetric::Euclidean), Err(Error::Domain(_))));
        let power = AmbientMetric::power(AmbientMetric::Euclidean, 0.5).unwrap();
        assert!(FunctionFamily::from_primitives(&[Primitive::sin()], &power, None).is_err());
        let decl = [SeparateHolderData::new(0.5, 1.0).unwrap(), SeparateHolderData::new(1.0, 1.0).unwrap()];
        assert!(FunctionFamily::from_primitives(&[Primitive::sin(), Primitive::cos()], &power, Some(&decl)).is_err());
        assert!(FunctionFamily::new(1.0, None).unwrap().with_member("bad", -1.0, |_| 0.0).is_err());
    }

    proptest! {
        // Parseval: Σᵢ ⟨f, fᵢ⟩² = ‖f‖², with ⟨f, fᵢ⟩ = Σₙ cₙ fᵢ(xₙ) by reproduction.
        #[test]
        fn parseval_identity(xs in prop::collection::vec(-3.0f64..3.0, 1..6),
                             cs in prop::collection::vec(-2.0f64..2.0, 6)) {
            let prims = [Primitive::sin(), Primitive::cos(),
                         Primitive::Hat { center: vec![0.5], width: 1.0 },
                         Primitive::Affine { weights: vec![0.3], bias: 0.1 }];
            let fam = FunctionFamily::from_primitives(&prims, &AmbientMetric::Euclidean, None).unwrap();
            let c = series_kernel(&fam, &AmbientMetric::Euclidean).unwrap();
            let pts: Vec<Point> = xs.iter().map(|&x| p(x)).collect();
            let coeffs = cs[..pts.len()].to_vec();
            let g = gram(&c.kernel, &pts).unwrap();
            let norm_sq = g.quadratic_form(&coeffs);
            let frame: f64 = (0..fam.len()).map(|i| {
                let fi = fam.member(i);
                let coef: f64 = pts.iter().zip(&coeffs).map(|(x, a)| a * fi(x.coords())).sum();
                coef * coef
            }).sum();
            prop_assert!((norm_sq - frame).abs() <= 1e-10 * (1.0 + frame));
        }
    }
}
