//! Finite-quadrature realization of `(S_k g)(x) = ∫ k(x,y) g(y) dμ(y)` and
//! the Hölder bound on its range.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gram::PreRkhsFunction;
use crate::holder::certify_rkhs_holder;
use crate::kernel::{KernelHandle, SeparateHolderData};
use crate::metric::AmbientMetric;
use crate::point::Point;
use crate::verifier::{empirical_holder, SamplingPlan, AUDIT_RTOL};

const EXPONENT_TOL: f64 = 1e-12;

/// `μ = Σⱼ wⱼ δ_{yⱼ}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureMeasure {
    pub nodes: Vec<Point>,
    pub weights: Vec<f64>,
}

impl QuadratureMeasure {
    pub fn new(nodes: Vec<Point>, weights: Vec<f64>) -> Result<Self> {
        let m = QuadratureMeasure { nodes, weights };
        m.validate()?;
        Ok(m)
    }

    /// `n` equispaced nodes on `[lo, hi]` with equal weights summing to `hi − lo`
    /// scaled by `mass`.
    pub fn uniform(lo: f64, hi: f64, n: usize, mass: f64) -> Result<Self> {
        if n == 0 || !(lo <= hi) {
            return Err(Error::domain("uniform quadrature needs n >= 1 and lo <= hi"));
        }
        let nodes = (0..n)
            .map(|i| {
                let t = if n == 1 { lo } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 };
                Point::scalar(t)
            })
            .collect();
        Self::new(nodes, vec![mass / n as f64; n])
    }

    pub fn validate(&self) -> Result<()> {
        if self.nodes.len() != self.weights.len() {
            return Err(Error::domain(format!(
                "{} nodes but {} weights",
                self.nodes.len(),
                self.weights.len()
            )));
        }
        if self.weights.iter().any(|w| !(*w >= 0.0 && w.is_finite())) {
            return Err(Error::domain("quadrature weights must be finite and nonnegative"));
        }
        if let Some(first) = self.nodes.first() {
            if self.nodes.iter().any(|n| n.dim() != first.dim()) {
                return Err(Error::domain("quadrature nodes must share one dimension"));
            }
        }
        Ok(())
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// `g ∈ L^q(μ)` with its exponent `q ∈ (1, ∞)`.
#[derive(Clone)]
pub struct DensityFunction {
    g: Arc<dyn Fn(&Point) -> f64 + Send + Sync>,
    pub q: f64,
}

impl fmt::Debug for DensityFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DensityFunction").field("q", &self.q).finish()
    }
}

impl DensityFunction {
    pub fn new<F>(q: f64, g: F) -> Result<Self>
    where
        F: Fn(&Point) -> f64 + Send + Sync + 'static,
    {
        if !(q > 1.0 && q.is_finite()) {
            return Err(Error::domain(format!("exponent q = {q} outside (1, inf)")));
        }
        Ok(DensityFunction { g: Arc::new(g), q })
    }

    pub fn constant(c: f64, q: f64) -> Result<Self> {
        Self::new(q, move |_| c)
    }

    pub fn eval(&self, y: &Point) -> f64 {
        (self.g)(y)
    }

    /// `a·g + b·h`, keeping this function's exponent.
    pub fn combine(&self, a: f64, other: &DensityFunction, b: f64) -> DensityFunction {
        let (f, h) = (self.g.clone(), other.g.clone());
        DensityFunction {
            g: Arc::new(move |y| a * f(y) + b * h(y)),
            q: self.q,
        }
    }

    /// `(Σⱼ wⱼ |g(yⱼ)|^q)^{1/q}`.
    pub fn lq_norm(&self, mu: &QuadratureMeasure) -> Result<f64> {
        let s: f64 = mu.nodes.iter().zip(&mu.weights).map(|(y, w)| w * self.eval(y).abs().powf(self.q)).sum();
        if !s.is_finite() {
            return Err(Error::Numerics(format!("L^q norm sum {s}")));
        }
        Ok(s.powf(1.0 / self.q))
    }
}

/// Hölder data of `k(·, y)` at the quadrature nodes.
#[derive(Debug, Clone, PartialEq)]
pub enum NodeHolder {
    Uniform(SeparateHolderData),
    PerNode { alpha: f64, constants: Vec<f64> },
}

impl NodeHolder {
    /// The kernel's own separate data, as a uniform bound.
    pub fn from_kernel(k: &KernelHandle) -> Result<Self> {
        k.regularity().map(NodeHolder::Uniform).ok_or(Error::NoRegularityData)
    }

    fn alpha(&self) -> f64 {
        match self {
            NodeHolder::Uniform(s) => s.alpha,
            NodeHolder::PerNode { alpha, .. } => *alpha,
        }
    }

    fn constant(&self, j: usize) -> f64 {
        match self {
            NodeHolder::Uniform(s) => s.constant,
            NodeHolder::PerNode { constants, .. } => constants[j],
        }
    }
}

/// `S_k g` with its absolute Hölder bound: `|f(x) − f(x')| ≤ constant·d^α`.
#[derive(Debug, Clone)]
pub struct SkOutput {
    pub function: PreRkhsFunction,
    pub alpha: f64,
    /// `(Σⱼ wⱼ L(yⱼ)^p)^{1/p}·(Σⱼ wⱼ |g(yⱼ)|^q)^{1/q}`; not per unit norm.
    pub constant: f64,
}

/// `x ↦ Σⱼ wⱼ k(x, yⱼ) g(yⱼ)`, returned as the pre-RKHS function with
/// centers `yⱼ` and coefficients `wⱼ g(yⱼ)`, and the Hölder-inequality bound.
pub fn apply_sk(
    k: &KernelHandle,
    mu: &QuadratureMeasure,
    g: &DensityFunction,
    p: f64,
    holder: &NodeHolder,
) -> Result<SkOutput> {
    mu.validate()?;
    if !(p > 1.0 && p.is_finite()) || (1.0 / p + 1.0 / g.q - 1.0).abs() > EXPONENT_TOL {
        return Err(Error::domain(format!("exponents p = {p}, q = {} are not conjugate", g.q)));
    }
    let alpha = holder.alpha();
    match holder {
        NodeHolder::Uniform(s) => s.validate()?,
        NodeHolder::PerNode { alpha, constants } => {
            SeparateHolderData::new(*alpha, 0.0)?;
            if constants.len() != mu.nodes.len() {
                return Err(Error::domain(format!(
                    "{} node constants for {} nodes",
                    constants.len(),
                    mu.nodes.len()
                )));
            }
            if constants.iter().any(|c| !(*c >= 0.0 && c.is_finite())) {
                return Err(Error::domain("node constants must be finite and nonnegative"));
            }
        }
    }
    let lp: f64 = mu
        .weights
        .iter()
        .enumerate()
        .map(|(j, w)| w * holder.constant(j).powf(p))
        .sum::<f64>()
        .powf(1.0 / p);
    let constant = lp * g.lq_norm(mu)?;
    let coefficients: Vec<f64> = mu.nodes.iter().zip(&mu.weights).map(|(y, w)| w * g.eval(y)).collect();
    let function = PreRkhsFunction::new(k.clone(), mu.nodes.clone(), coefficients)?;
    Ok(SkOutput {
        function,
        alpha,
        constant,
    })
}

/// One Hölder bound and its sampled check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub alpha: f64,
    /// Absolute constant: the bound is `constant·d^α`.
    pub constant: f64,
    pub empirical: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TighterBound {
    Absolute,
    Rkhs,
    Equal,
}

/// `S_k g` as an RKHS member: its norm, the absolute bound from
/// [`apply_sk`], and the half-rate bound `√(2L)·‖f‖_k·d^{α/2}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkMembershipReport {
    pub rkhs_norm: f64,
    pub absolute: BoundCheck,
    pub rkhs: BoundCheck,
    /// Which bound is smaller at the diameter of the sampling box.
    pub tighter_at_diameter: TighterBound,
    /// Distance at which the two bounds cross, when both are nonzero.
    pub crossover_distance: Option<f64>,
}

/// Checks both bounds on `S_k g` over the plan's pairs, in the Euclidean
/// metric in which the kernel's separate data is stated.
pub fn sk_into_rkhs_check(
    k: &KernelHandle,
    mu: &QuadratureMeasure,
    g: &DensityFunction,
    p: f64,
    plan: &SamplingPlan,
) -> Result<SkMembershipReport> {
    let metric = AmbientMetric::Euclidean;
    let out = apply_sk(k, mu, g, p, &NodeHolder::from_kernel(k)?)?;
    let cert = certify_rkhs_holder(k, &metric)?;
    let f = &out.function;
    let norm = f.rkhs_norm()?;

    let check = |alpha: f64, constant: f64| -> Result<BoundCheck> {
        let est = empirical_holder(|x| f.eval_raw(x), &metric, alpha, plan)?;
        Ok(BoundCheck {
            alpha,
            constant,
            empirical: est.ratio,
            holds: est.ratio <= constant * (1.0 + AUDIT_RTOL) + 1e-12,
        })
    };
    let absolute = check(out.alpha, out.constant)?;
    let rkhs = check(cert.alpha, cert.constant_per_unit_norm * norm)?;

    let diam = plan.euclidean_diameter();
    let (a, r) = (absolute.constant * diam.powf(absolute.alpha), rkhs.constant * diam.powf(rkhs.alpha));
    let tighter_at_diameter = if a < r {
        TighterBound::Absolute
    } else if r < a {
        TighterBound::Rkhs
    } else {
        TighterBound::Equal
    };
    // C_a d^α = C_r d^{α/2}  ⇔  d = (C_r / C_a)^{1/(α − α/2)}.
    let gap = absolute.alpha - rkhs.alpha;
    let crossover_distance = (absolute.constant > 0.0 && rkhs.constant > 0.0 && gap > 0.0)
        .then(|| (rkhs.constant / absolute.constant).powf(1.0 / gap));
    Ok(SkMembershipReport {
        rkhs_norm: norm,
        absolute,
        rkhs,
        tighter_at_diameter,
        crossover_distance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn gauss() -> KernelHandle {
        KernelHandle::gaussian(1.0).unwrap()
    }

    fn plan01() -> SamplingPlan {
        SamplingPlan::interval(0.0, 1.0).unwrap()
    }

    #[test]
    fn zero_density() {
        let mu = QuadratureMeasure::uniform(0.0, 1.0, 11, 1.0).unwrap();
        let g = DensityFunction::constant(0.0, 2.0).unwrap();
        let out = apply_sk(&gauss(), &mu, &g, 2.0, &NodeHolder::from_kernel(&gauss()).unwrap()).unwrap();
        assert_eq!(out.constant, 0.0);
        assert_eq!(out.function.eval(&Point::scalar(0.3)).unwrap(), 0.0);
        let r = sk_into_rkhs_check(&gauss(), &mu, &g, 2.0, &plan01().with_pairs(100)).unwrap();
        assert_eq!(r.rkhs_norm, 0.0);
        assert!(r.absolute.holds && r.rkhs.holds);
    }

    #[test]
    fn uniform_quadrature_gaussian() {
        let mu = QuadratureMeasure::uniform(0.0, 1.0, 101, 1.0).unwrap();
        let g = DensityFunction::constant(1.0, 2.0).unwrap();
        let out = apply_sk(&gauss(), &mu, &g, 2.0, &NodeHolder::from_kernel(&gauss()).unwrap()).unwrap();
        assert!((out.constant - (-0.5f64).exp()).abs() < 1e-15);
        let est = empirical_holder(|x| out.function.eval_raw(x), &AmbientMetric::Euclidean, 1.0, &plan01()).unwrap();
        assert!(est.ratio <= out.constant);
    }

    #[test]
    fn single_node_equality() {
        let mu = QuadratureMeasure::new(vec![Point::scalar(0.5)], vec![1.0]).unwrap();
        let g = DensityFunction::constant(-2.0, 3.0).unwrap();
        let holder = NodeHolder::PerNode { alpha: 1.0, constants: vec![0.25] };
        let out = apply_sk(&gauss(), &mu, &g, 1.5, &holder).unwrap();
        assert!((out.constant - 0.5).abs() < 1e-15);
        let two = DensityFunction::constant(-2.0, 2.0).unwrap();
        let out = apply_sk(&gauss(), &mu, &two, 2.0, &holder).unwrap();
        assert!((out.constant - 0.5).abs() < 1e-15);
        assert!((out.function.rkhs_norm().unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn eleven_nodes_both_bounds_hold() {
        let mu = QuadratureMeasure::uniform(0.0, 1.0, 11, 1.0).unwrap();
        let g = DensityFunction::constant(1.0, 2.0).unwrap();
        let r = sk_into_rkhs_check(&gauss(), &mu, &g, 2.0, &plan01()).unwrap();
        assert!(r.absolute.holds && r.rkhs.holds);
        assert!(r.rkhs_norm > 0.9 && r.rkhs_norm <= 1.0);
        assert_eq!(r.tighter_at_diameter, TighterBound::Absolute);
        assert!(r.crossover_distance.unwrap() > 1.0);
    }

    #[test]
    fn exponent_mismatch() {
        let mu = QuadratureMeasure::uniform(0.0, 1.0, 3, 1.0).unwrap();
        let g = DensityFunction::constant(1.0, 2.0).unwrap();
        let h = NodeHolder::from_kernel(&gauss()).unwrap();
        assert!(matches!(apply_sk(&gauss(), &mu, &g, 3.0, &h), Err(Error::Domain(_))));
        assert!(DensityFunction::constant(1.0, 1.0).is_err());
        assert!(QuadratureMeasure::new(vec![Point::scalar(0.0)], vec![-1.0]).is_err());
    }

    proptest! {
        #[test]
        fn linear_in_density(a in -3.0f64..3.0, b in -3.0f64..3.0, x in 0.0f64..1.0) {
            let mu = QuadratureMeasure::uniform(0.0, 1.0, 7, 1.0).unwrap();
            let h = NodeHolder::from_kernel(&gauss()).unwrap();
            let g1 = DensityFunction::new(2.0, |y| y.coords()[0].sin()).unwrap();
            let g2 = DensityFunction::new(2.0, |y| 1.0 - y.coords()[0]).unwrap();
            let x = Point::scalar(x);
            let f1 = apply_sk(&gauss(), &mu, &g1, 2.0, &h).unwrap().function.eval(&x).unwrap();
            let f2 = apply_sk(&gauss(), &mu, &g2, 2.0, &h).unwrap().function.eval(&x).unwrap();
            let fc = apply_sk(&gauss(), &mu, &g1.combine(a, &g2, b), 2.0, &h).unwrap().function.eval(&x).unwrap();
            prop_assert!((fc - (a * f1 + b * f2)).abs() <= 1e-10);
        }

        #[test]
        fn bound_scales_with_density(c in -5.0f64..5.0) {
            let mu = QuadratureMeasure::uniform(0.0, 1.0, 5, 1.0).unwrap();
            let h = NodeHolder::from_kernel(&gauss()).unwrap();
            let g = DensityFunction::new(2.0, |y| 1.0 + y.coords()[0]).unwrap();
            let base = apply_sk(&gauss(), &mu, &g, 2.0, &h).unwrap().constant;
            let zero = DensityFunction::constant(0.0, 2.0).unwrap();
            let scaled = apply_sk(&gauss(), &mu, &g.combine(c, &zero, 0.0), 2.0, &h).unwrap().constant;
            prop_assert!((scaled - c.abs() * base).abs() <= 1e-12 * (1.0 + base));
        }
    }
}
