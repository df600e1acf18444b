//! Brute-force oracles: sampled Hölder ratios, PSD checks, certificate
//! audits and predicate suites. Every estimate here is a lower bound of the
//! quantity it samples, so a run can refute a certificate but never prove
//! one; passing reports mean "no violation found".

mod audit;
mod empirical;
mod predicates;
mod psd;

pub use audit::{certificate_audit, VerificationReport, Witness, AUDIT_CENTERS, AUDIT_RTOL};
pub use empirical::{audit_family, empirical_holder, FamilyMemberAudit, HolderEstimate};
pub use predicates::{
    dk_predicate_suite, evaluate_predicates, separate_joint_parity, ParityReport,
    PredicateOutcome, PredicateSuiteReport, PREDICATE_TOL,
};
pub use psd::{psd_check, random_gram_check, PsdReport, MAX_EIGEN_N};

use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::certificate::CertificateMetric;
use crate::constructors::SeedRng;
use crate::error::{Error, Result};
use crate::kernel::KernelHandle;
use crate::kernel_metric::RADICAND_TOL;
use crate::par;
use crate::point::{euclidean, Point};

/// Sampling box and counts. Defaults: 10⁴ random pairs, 1001 grid points
/// per axis, seed 42, minimum separation 1e-6.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingPlan {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub n_pairs: usize,
    pub n_grid: usize,
    pub seed: u64,
    pub min_separation: f64,
}

// Stream ids keep the sample families independent of each other's sizes.
const STREAM_PAIRS: u64 = 1;
const STREAM_GRID: u64 = 2;
pub(crate) const STREAM_QUADS: u64 = 3;
pub(crate) const STREAM_SLOPE: u64 = 4;
pub(crate) const STREAM_GRAM: u64 = 5;
pub(crate) const STREAM_FUNCTIONS: u64 = 1 << 32;

impl SamplingPlan {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        let plan = SamplingPlan {
            lo,
            hi,
            n_pairs: 10_000,
            n_grid: 1001,
            seed: 42,
            min_separation: 1e-6,
        };
        plan.validate()?;
        Ok(plan)
    }

    pub fn interval(lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![lo], vec![hi])
    }

    pub fn with_pairs(mut self, n: usize) -> Self {
        self.n_pairs = n;
        self
    }

    pub fn with_grid(mut self, n: usize) -> Self {
        self.n_grid = n;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_min_separation(mut self, s: f64) -> Self {
        self.min_separation = s;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.lo.is_empty() || self.lo.len() != self.hi.len() {
            return Err(Error::domain("sampling box needs matching nonempty lo/hi"));
        }
        for (a, b) in self.lo.iter().zip(&self.hi) {
            if !(a.is_finite() && b.is_finite() && a < b) {
                return Err(Error::domain(format!("sampling box side [{a}, {b}] is not a proper interval")));
            }
        }
        if self.n_pairs == 0 || self.n_grid < 2 {
            return Err(Error::domain("need at least 1 pair and 2 grid points"));
        }
        if !(self.min_separation > 0.0 && self.min_separation.is_finite()) {
            return Err(Error::domain("min_separation must be > 0"));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    /// Shortest side of the box.
    pub fn min_side(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(a, b)| b - a).fold(f64::INFINITY, f64::min)
    }

    pub fn euclidean_diameter(&self) -> f64 {
        euclidean(&self.lo, &self.hi)
    }

    pub(crate) fn rng(&self, stream: u64) -> SeedRng {
        let mut rng = SeedRng::seed_from_u64(self.seed);
        rng.set_stream(stream);
        rng
    }

    pub(crate) fn sample_point(&self, rng: &mut SeedRng) -> Point {
        Point::from_unchecked(
            self.lo.iter().zip(&self.hi).map(|(a, b)| rng.random_range(*a..*b)).collect(),
        )
    }

    /// `n` uniform points from an independent stream.
    pub fn sample_points(&self, n: usize, stream: u64) -> Vec<Point> {
        let mut rng = self.rng(stream);
        (0..n).map(|_| self.sample_point(&mut rng)).collect()
    }

    /// Reflects `x + step` back into the box along any axis it leaves.
    fn step_inside(&self, x: &Point, step: &[f64]) -> Point {
        let coords = x
            .coords()
            .iter()
            .zip(step)
            .zip(self.lo.iter().zip(&self.hi))
            .map(|((c, s), (a, b))| {
                let y = c + s;
                if y > *b || y < *a {
                    (c - s).clamp(*a, *b)
                } else {
                    y
                }
            })
            .collect();
        Point::from_unchecked(coords)
    }

    /// `n_pairs` uniform random pairs followed by near-diagonal pairs:
    /// consecutive grid points in one dimension, axis-aligned grid-step
    /// offsets from random bases otherwise.
    pub fn pairs(&self) -> Result<Vec<(Point, Point)>> {
        self.validate()?;
        let mut out = Vec::with_capacity(self.n_pairs + self.n_grid);
        let mut rng = self.rng(STREAM_PAIRS);
        for _ in 0..self.n_pairs {
            let x = self.sample_point(&mut rng);
            let y = self.sample_point(&mut rng);
            out.push((x, y));
        }
        let d = self.dim();
        if d == 1 {
            let (a, b) = (self.lo[0], self.hi[0]);
            let h = (b - a) / (self.n_grid - 1) as f64;
            let grid: Vec<f64> = (0..self.n_grid).map(|i| if i + 1 == self.n_grid { b } else { a + i as f64 * h }).collect();
            for w in grid.windows(2) {
                out.push((Point::scalar(w[0]), Point::scalar(w[1])));
            }
        } else {
            let mut rng = self.rng(STREAM_GRID);
            for i in 0..self.n_grid - 1 {
                let axis = i % d;
                let mut step = vec![0.0; d];
                step[axis] = (self.hi[axis] - self.lo[axis]) / (self.n_grid - 1) as f64;
                let x = self.sample_point(&mut rng);
                let y = self.step_inside(&x, &step);
                out.push((x, y));
            }
        }
        Ok(out)
    }

    /// Pairs at Euclidean distance `h` in random directions, `per_scale`
    /// of them, for slope estimation.
    pub(crate) fn pairs_at_scale(&self, h: f64, per_scale: usize, rng: &mut SeedRng) -> Vec<(Point, Point)> {
        let d = self.dim();
        (0..per_scale)
            .map(|_| {
                let x = self.sample_point(rng);
                let mut u: Vec<f64> = (0..d).map(|_| rng.sample(rand_distr::StandardNormal)).collect();
                let n = u.iter().map(|v| v * v).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
                for v in u.iter_mut() {
                    *v *= h / n;
                }
                let y = self.step_inside(&x, &u);
                (x, y)
            })
            .collect()
    }

    pub(crate) fn check_kernel(&self, k: &KernelHandle) -> Result<()> {
        match k.dim() {
            Some(d) if d != self.dim() => Err(Error::domain(format!(
                "kernel '{}' has dimension {d}, sampling box has {}",
                k.name(),
                self.dim()
            ))),
            _ => Ok(()),
        }
    }
}

/// Distance of a pair in a certificate's metric: the computed value and an
/// upper bound that absorbs rounding in the kernel-metric radicand.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct PairDistance {
    pub value: f64,
    pub upper: f64,
}

pub(crate) fn pair_distance(
    k: &KernelHandle,
    metric: &CertificateMetric,
    x: &[f64],
    y: &[f64],
) -> Result<PairDistance> {
    match metric {
        CertificateMetric::Ambient(m) => {
            let d = m.distance_raw(x, y);
            Ok(PairDistance { value: d, upper: d })
        }
        CertificateMetric::Kernel(_) => {
            if let Some(phi) = k.features() {
                let d = euclidean(&phi.eval_raw(x), &phi.eval_raw(y));
                return Ok(PairDistance { value: d, upper: d });
            }
            let (kxx, kyy) = (k.eval_raw(x, x), k.eval_raw(y, y));
            let (kxy, kyx) = (k.eval_raw(x, y), k.eval_raw(y, x));
            let r = (kxx + kyy) - (kxy + kyx);
            if !r.is_finite() {
                return Err(Error::Numerics(format!("d_k radicand {r}")));
            }
            if r < -RADICAND_TOL {
                return Err(Error::PsdViolation {
                    what: "d_k radicand".into(),
                    value: r,
                    tolerance: RADICAND_TOL,
                });
            }
            let err = 8.0 * f64::EPSILON * (kxx.abs() + kyy.abs() + kxy.abs() + kyx.abs());
            Ok(PairDistance {
                value: r.max(0.0).sqrt(),
                upper: (r.max(0.0) + err).sqrt(),
            })
        }
    }
}

pub(crate) fn pair_distances(
    k: &KernelHandle,
    metric: &CertificateMetric,
    pairs: &[(Point, Point)],
) -> Result<Vec<PairDistance>> {
    par::try_map(pairs, |(x, y)| pair_distance(k, metric, x.coords(), y.coords()))
}
