use serde::{Deserialize, Serialize};

use crate::certificate::HolderCertificate;
use crate::error::{Error, Result};
use crate::gram::sup_norm;
use crate::kernel::{KernelHandle, SeparateHolderData};
use crate::kernel_metric::dk_lipschitz_bounds;
use crate::metric::AmbientMetric;
use crate::par;
use crate::point::Point;
use crate::predicate::{Predicate, Quad};
use crate::verifier::{certificate_audit, SamplingPlan, AUDIT_RTOL, STREAM_QUADS};

/// Absolute tolerance for predicate checks, scaled by `max(1, diagonal)`.
pub const PREDICATE_TOL: f64 = 1e-8;
const DIAGONAL_TUPLES: usize = 64;
const SUITE_FUNCTIONS: usize = 10;
const PARITY_RTOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredicateOutcome {
    pub name: String,
    pub evaluated: usize,
    pub failures: usize,
    /// Largest `lhs − rhs` seen, negative when every instance had room.
    pub max_excess: f64,
    pub witness: Option<Quad>,
    pub pass: bool,
}

/// Evaluates each predicate on every tuple.
pub fn evaluate_predicates(preds: &[Predicate], tuples: &[Quad]) -> Result<Vec<PredicateOutcome>> {
    preds
        .iter()
        .map(|p| {
            let ineqs = par::try_map(tuples, |q| p.evaluate(q))?;
            let excess: Vec<f64> = ineqs.iter().map(|i| i.excess()).collect();
            let failed: Vec<usize> = (0..ineqs.len()).filter(|&i| !ineqs[i].holds(PREDICATE_TOL)).collect();
            let worst = par::argmax(&excess);
            let witness = failed.first().copied().or(worst.map(|w| w.0)).map(|i| tuples[i].clone());
            Ok(PredicateOutcome {
                name: p.name().to_string(),
                evaluated: tuples.len(),
                failures: failed.len(),
                max_excess: worst.map_or(f64::NEG_INFINITY, |w| w.1),
                witness,
                pass: failed.is_empty(),
            })
        })
        .collect()
}

impl SamplingPlan {
    /// Random quadruples, near-diagonal pairs `(x, y, x, y)` from
    /// [`SamplingPlan::pairs`]' grid part, and exact-diagonal tuples
    /// `(x, x, y, y)`.
    pub fn quads(&self) -> Result<Vec<Quad>> {
        let mut rng = self.rng(STREAM_QUADS);
        let n_random = (self.n_pairs / 4).max(1);
        let mut out: Vec<Quad> = (0..n_random)
            .map(|_| Quad {
                x1: self.sample_point(&mut rng),
                x1p: self.sample_point(&mut rng),
                x2: self.sample_point(&mut rng),
                x2p: self.sample_point(&mut rng),
            })
            .collect();
        out.extend(self.pairs()?.into_iter().skip(self.n_pairs).map(|(x, y)| Quad::pair(x, y)));
        for _ in 0..DIAGONAL_TUPLES {
            let x = self.sample_point(&mut rng);
            let y = self.sample_point(&mut rng);
            out.push(Quad {
                x1: x.clone(),
                x1p: x,
                x2: y.clone(),
                x2p: y,
            });
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredicateSuiteReport {
    /// Probed `sup √k(x,x)` used on the right-hand sides.
    pub sup_norm: f64,
    pub items: Vec<PredicateOutcome>,
    pub pass: bool,
}

/// The kernel-metric predicates plus the law
/// `|f(x) − f(x')| ≤ ‖f‖_k·d_k(x,x')` on random pre-RKHS functions.
pub fn dk_predicate_suite(k: &KernelHandle, plan: &SamplingPlan) -> Result<PredicateSuiteReport> {
    plan.validate()?;
    plan.check_kernel(k)?;
    let tuples = plan.quads()?;
    let probe: Vec<Point> = tuples
        .iter()
        .flat_map(|q| [q.x1.clone(), q.x1p.clone(), q.x2.clone(), q.x2p.clone()])
        .collect();
    let s = sup_norm(k, &probe)?;
    let mut items = evaluate_predicates(&dk_lipschitz_bounds(k, s), &tuples)?;

    let law = certificate_audit(k, &HolderCertificate::kernel_metric(), plan, SUITE_FUNCTIONS)?;
    let w = law.violations.first().or(law.max_witness.as_ref());
    items.push(PredicateOutcome {
        name: "(f) |f(x) - f(x')| <= ||f||_k d_k(x, x')".into(),
        evaluated: law.functions_audited * law.pairs_per_function,
        failures: law.violation_count,
        max_excess: w.map_or(f64::NEG_INFINITY, |w| w.increment - w.bound),
        witness: w.map(|w| Quad::pair(w.x.clone(), w.y.clone())),
        pass: law.pass,
    });
    let pass = items.iter().all(|i| i.pass);
    Ok(PredicateSuiteReport { sup_norm: s, items, pass })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParityReport {
    pub alpha: f64,
    /// Max of `|k(x₁,x₂) − k(x₁',x₂')| / (d(x₁,x₁')^α + d(x₂,x₂')^α)`.
    pub joint_max: f64,
    /// Max of `|k(x,z) − k(y,z)| / d(x,y)^α`.
    pub separate_max: f64,
    pub relative_gap: f64,
    pub triples: usize,
    pub quads: usize,
    /// Kernel's own separate data, when stated in the Euclidean metric.
    pub declared: Option<SeparateHolderData>,
    pub within_declared: Option<bool>,
    pub pass: bool,
}

/// Sampled separate and joint Hölder ratios on matched tuple sets: every
/// random quadruple contributes its two split triples
/// `(x₁, x₁'; x₂)` and `(x₂, x₂'; x₁')`, and every triple `(x, y; z)`
/// contributes the degenerate quadruple `(x, y, z, z)`. On such sets the
/// two maxima coincide, since each quadruple ratio is at most the larger of
/// its two triple ratios.
pub fn separate_joint_parity(
    k: &KernelHandle,
    alpha: f64,
    metric: &AmbientMetric,
    plan: &SamplingPlan,
) -> Result<ParityReport> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::domain(format!("exponent {alpha} outside (0, 1]")));
    }
    metric.validate()?;
    plan.validate()?;
    plan.check_kernel(k)?;
    let d = |a: &Point, b: &Point| metric.distance_raw(a.coords(), b.coords());
    let sep_ok = |a: &Point, b: &Point| d(a, b) >= plan.min_separation;

    let mut quads: Vec<Quad> = plan
        .quads()?
        .into_iter()
        .filter(|q| sep_ok(&q.x1, &q.x1p) && sep_ok(&q.x2, &q.x2p))
        .collect();
    let mut triples: Vec<(Point, Point, Point)> = Vec::with_capacity(2 * quads.len());
    for q in &quads {
        triples.push((q.x1.clone(), q.x1p.clone(), q.x2.clone()));
        triples.push((q.x2.clone(), q.x2p.clone(), q.x1p.clone()));
    }
    let grid_pairs = plan.pairs()?.into_iter().skip(plan.n_pairs);
    let anchors = plan.sample_points(plan.n_grid, STREAM_QUADS + 100);
    for ((x, y), z) in grid_pairs.zip(anchors) {
        if sep_ok(&x, &y) {
            triples.push((x, y, z));
        }
    }
    quads.extend(triples.iter().map(|(x, y, z)| Quad {
        x1: x.clone(),
        x1p: y.clone(),
        x2: z.clone(),
        x2p: z.clone(),
    }));

    let sep: Vec<f64> = par::map(&triples, |(x, y, z)| {
        (k.eval_raw(x.coords(), z.coords()) - k.eval_raw(y.coords(), z.coords())).abs() / d(x, y).powf(alpha)
    });
    let joint: Vec<f64> = par::map(&quads, |q| {
        let num = (k.eval_raw(q.x1.coords(), q.x2.coords()) - k.eval_raw(q.x1p.coords(), q.x2p.coords())).abs();
        num / (d(&q.x1, &q.x1p).powf(alpha) + d(&q.x2, &q.x2p).powf(alpha))
    });
    let separate_max = par::argmax(&sep).map_or(0.0, |m| m.1);
    let joint_max = par::argmax(&joint).map_or(0.0, |m| m.1);
    if !(separate_max.is_finite() && joint_max.is_finite()) {
        return Err(Error::Numerics("non-finite sampled ratio".into()));
    }
    let top = separate_max.max(joint_max);
    let relative_gap = if top > 0.0 { (separate_max - joint_max).abs() / top } else { 0.0 };
    let declared = match metric {
        AmbientMetric::Euclidean => k.regularity().filter(|r| r.alpha == alpha),
        _ => None,
    };
    let within_declared = declared.map(|r| separate_max.max(joint_max) <= r.constant * (1.0 + AUDIT_RTOL));
    Ok(ParityReport {
        alpha,
        joint_max,
        separate_max,
        relative_gap,
        triples: triples.len(),
        quads: quads.len(),
        declared,
        within_declared,
        pass: relative_gap <= PARITY_RTOL && within_declared != Some(false),
    })
}
