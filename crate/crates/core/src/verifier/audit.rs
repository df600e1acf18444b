use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::certificate::HolderCertificate;
use crate::error::Result;
use crate::gram::{eval_many, PreRkhsFunction};
use crate::kernel::KernelHandle;
use crate::par;
use crate::point::Point;
use crate::verifier::{pair_distance, pair_distances, SamplingPlan, STREAM_FUNCTIONS, STREAM_SLOPE};

/// Relative slack before a sampled ratio counts as a violation.
pub const AUDIT_RTOL: f64 = 1e-6;
/// Centers per random audit function.
pub const AUDIT_CENTERS: usize = 20;
const MAX_WITNESSES: usize = 32;
const SLOPE_SCALES: std::ops::RangeInclusive<i32> = 4..=13;
const SLOPE_PAIRS_PER_SCALE: usize = 32;

/// A sampled pair together with the function it was evaluated on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub function: usize,
    pub x: Point,
    pub y: Point,
    pub distance: f64,
    /// `|f(x) − f(y)|`.
    pub increment: f64,
    /// `C·‖f‖_k·d^α`.
    pub bound: f64,
    /// `increment / (‖f‖_k·d^α)`.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub certificate: HolderCertificate,
    /// Largest sampled `|f(x) − f(y)| / (‖f‖_k·d^α)`.
    pub empirical_constant: f64,
    /// Certified constant over the empirical one; `None` when nothing moved.
    pub conservatism: Option<f64>,
    pub violations: Vec<Witness>,
    pub violation_count: usize,
    pub max_witness: Option<Witness>,
    /// Fitted exponent of `sup|f(x) − f(y)|/‖f‖_k` against `d` over dyadic scales.
    pub slope_estimate: Option<f64>,
    pub functions_audited: usize,
    pub pairs_per_function: usize,
    pub rtol: f64,
    pub pass: bool,
}

pub(crate) fn random_function(k: &KernelHandle, plan: &SamplingPlan, index: usize) -> Result<PreRkhsFunction> {
    let mut rng = plan.rng(STREAM_FUNCTIONS + index as u64);
    let centers: Vec<Point> = (0..AUDIT_CENTERS).map(|_| plan.sample_point(&mut rng)).collect();
    let coefficients: Vec<f64> = (0..AUDIT_CENTERS).map(|_| rng.sample(StandardNormal)).collect();
    PreRkhsFunction::new(k.clone(), centers, coefficients)
}

/// Audits `cert` on `n_functions` random pre-RKHS functions (uniform
/// centers in the box, standard normal coefficients) over the plan's pairs.
/// Distances in the kernel metric are taken at their rounding upper bound,
/// which keeps every sampled ratio a lower bound of the true one.
pub fn certificate_audit(
    k: &KernelHandle,
    cert: &HolderCertificate,
    plan: &SamplingPlan,
    n_functions: usize,
) -> Result<VerificationReport> {
    cert.validate()?;
    plan.validate()?;
    plan.check_kernel(k)?;
    let all_pairs = plan.pairs()?;
    let all_d = pair_distances(k, &cert.metric, &all_pairs)?;
    let (pairs, dists): (Vec<_>, Vec<_>) = all_pairs
        .into_iter()
        .zip(all_d)
        .filter(|(_, d)| d.value >= plan.min_separation)
        .unzip();
    let denom: Vec<f64> = dists.iter().map(|d| d.upper.powf(cert.alpha)).collect();
    let c = cert.constant_per_unit_norm;
    let limit = c * (1.0 + AUDIT_RTOL);

    let mut funcs = Vec::with_capacity(n_functions);
    let mut ids = Vec::with_capacity(n_functions);
    let mut norms = Vec::with_capacity(n_functions);
    for i in 0..n_functions {
        let f = random_function(k, plan, i)?;
        let norm = f.rkhs_norm()?;
        if norm > 0.0 {
            funcs.push(f);
            ids.push(i);
            norms.push(norm);
        }
    }
    // increments[j][m] = |f_m(x_j) − f_m(y_j)|
    let increments: Vec<Vec<f64>> = par::map(&pairs, |(x, y)| {
        let fx = eval_many(&funcs, x.coords());
        let fy = eval_many(&funcs, y.coords());
        fx.iter().zip(&fy).map(|(a, b)| (a - b).abs()).collect()
    });

    let mut violations = Vec::new();
    let mut violation_count = 0usize;
    let mut max_witness: Option<Witness> = None;
    for (m, (&i, &norm)) in ids.iter().zip(&norms).enumerate() {
        let ratios: Vec<f64> = increments.iter().zip(&denom).map(|(inc, d)| inc[m] / (norm * d)).collect();
        let witness = |j: usize| Witness {
            function: i,
            x: pairs[j].0.clone(),
            y: pairs[j].1.clone(),
            distance: dists[j].value,
            increment: increments[j][m],
            bound: c * norm * denom[j],
            ratio: ratios[j],
        };
        for (j, r) in ratios.iter().enumerate() {
            if !(*r <= limit) {
                violation_count += 1;
                if violations.len() < MAX_WITNESSES {
                    violations.push(witness(j));
                }
            }
        }
        if let Some((j, r)) = par::argmax(&ratios) {
            if max_witness.as_ref().is_none_or(|w| r > w.ratio) {
                max_witness = Some(witness(j));
            }
        }
    }

    let empirical_constant = max_witness.as_ref().map_or(0.0, |w| w.ratio);
    let slope_estimate = slope_estimate(k, cert, plan, &funcs, &norms)?;
    Ok(VerificationReport {
        certificate: cert.clone(),
        empirical_constant,
        conservatism: (empirical_constant > 0.0).then(|| c / empirical_constant),
        violations,
        violation_count,
        max_witness,
        slope_estimate,
        functions_audited: funcs.len(),
        pairs_per_function: pairs.len(),
        rtol: AUDIT_RTOL,
        pass: violation_count == 0,
    })
}

/// Least-squares slope of `ln max Δ/‖f‖` against the mean `ln d` at dyadic
/// fractions of the box's shortest side.
fn slope_estimate(
    k: &KernelHandle,
    cert: &HolderCertificate,
    plan: &SamplingPlan,
    funcs: &[PreRkhsFunction],
    norms: &[f64],
) -> Result<Option<f64>> {
    if funcs.is_empty() {
        return Ok(None);
    }
    let mut rng = plan.rng(STREAM_SLOPE);
    let mut points = Vec::new();
    for j in SLOPE_SCALES {
        let h = plan.min_side() * 2f64.powi(-j);
        let pairs = plan.pairs_at_scale(h, SLOPE_PAIRS_PER_SCALE, &mut rng);
        let mut log_d = Vec::new();
        let mut best = 0.0f64;
        for (x, y) in &pairs {
            let d = pair_distance(k, &cert.metric, x.coords(), y.coords())?.value;
            if d < plan.min_separation {
                continue;
            }
            log_d.push(d.ln());
            let (fx, fy) = (eval_many(funcs, x.coords()), eval_many(funcs, y.coords()));
            for ((a, b), norm) in fx.iter().zip(&fy).zip(norms) {
                best = best.max((a - b).abs() / norm);
            }
        }
        if best > 0.0 && !log_d.is_empty() {
            points.push((log_d.iter().sum::<f64>() / log_d.len() as f64, best.ln()));
        }
    }
    if points.len() < 2 {
        return Ok(None);
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Ok((sxx > 0.0).then(|| sxy / sxx))
}
