use serde::{Deserialize, Serialize};

use crate::constructors::FunctionFamily;
use crate::error::Result;
use crate::metric::AmbientMetric;
use crate::par;
use crate::point::Point;
use crate::verifier::SamplingPlan;

/// Largest sampled ratio `|f(x) − f(x')| / d(x,x')^α` and the pair that
/// attained it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HolderEstimate {
    pub ratio: f64,
    pub witness: Option<(Point, Point)>,
    pub pairs_evaluated: usize,
}

/// Lower bound of the α-Hölder constant of `f` on the plan's box, over the
/// plan's pairs with `d ≥ min_separation`.
pub fn empirical_holder<F>(f: F, metric: &AmbientMetric, alpha: f64, plan: &SamplingPlan) -> Result<HolderEstimate>
where
    F: Fn(&[f64]) -> f64 + Sync + Send,
{
    metric.validate()?;
    let pairs = plan.pairs()?;
    let ratios: Vec<f64> = par::map(&pairs, |(x, y)| {
        let d = metric.distance_raw(x.coords(), y.coords());
        if d < plan.min_separation {
            return f64::NAN;
        }
        (f(x.coords()) - f(y.coords())).abs() / d.powf(alpha)
    });
    let evaluated = ratios.iter().filter(|r| !r.is_nan()).count();
    let best = par::argmax(&ratios.iter().map(|r| if r.is_nan() { -1.0 } else { *r }).collect::<Vec<_>>());
    Ok(match best {
        Some((i, r)) if r >= 0.0 => HolderEstimate {
            ratio: r,
            witness: Some(pairs[i].clone()),
            pairs_evaluated: evaluated,
        },
        _ => HolderEstimate {
            ratio: 0.0,
            witness: None,
            pairs_evaluated: 0,
        },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyMemberAudit {
    pub label: String,
    pub declared: f64,
    pub empirical: f64,
    pub holds: bool,
}

/// Samples each member's Hölder ratio against its declared constant.
pub fn audit_family(fam: &FunctionFamily, metric: &AmbientMetric, plan: &SamplingPlan) -> Result<Vec<FamilyMemberAudit>> {
    (0..fam.len())
        .map(|i| {
            let f = fam.member(i);
            let est = empirical_holder(|x| f(x), metric, fam.alpha(), plan)?;
            let declared = fam.constants()[i];
            Ok(FamilyMemberAudit {
                label: fam.labels()[i].clone(),
                declared,
                empirical: est.ratio,
                holds: est.ratio <= declared * (1.0 + super::AUDIT_RTOL) + 1e-12,
            })
        })
        .collect()
}
