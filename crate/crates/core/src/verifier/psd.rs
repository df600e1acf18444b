use nalgebra::SymmetricEigen;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gram::{gram, GramMatrix, TOL_PSD};
use crate::kernel::KernelHandle;
use crate::verifier::{SamplingPlan, STREAM_GRAM};

/// Largest Gram size accepted by the dense eigensolver.
pub const MAX_EIGEN_N: usize = 500;
const ASYMMETRY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsdReport {
    pub n: usize,
    pub min_eigenvalue: f64,
    pub trace: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Symmetric eigensolve; passes iff `λ_min ≥ −1e-8·max(1, trace)`.
pub fn psd_check(g: &GramMatrix) -> Result<PsdReport> {
    let n = g.len();
    if n == 0 {
        return Err(Error::domain("empty Gram matrix"));
    }
    if n > MAX_EIGEN_N {
        return Err(Error::domain(format!("Gram size {n} exceeds {MAX_EIGEN_N}")));
    }
    let m = &g.entries;
    for i in 0..n {
        for j in 0..i {
            let a = (m[(i, j)] - m[(j, i)]).abs();
            if a > ASYMMETRY_TOL {
                return Err(Error::domain(format!("Gram asymmetry {a} at ({i}, {j})")));
            }
        }
    }
    let eig = SymmetricEigen::new(m.clone());
    let min_eigenvalue = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    if !min_eigenvalue.is_finite() {
        return Err(Error::Numerics(format!("eigenvalue {min_eigenvalue}")));
    }
    let trace = g.trace();
    let tolerance = TOL_PSD * trace.max(1.0);
    Ok(PsdReport {
        n,
        min_eigenvalue,
        trace,
        tolerance,
        pass: min_eigenvalue >= -tolerance,
    })
}

/// PSD check of the Gram on `n` uniform points of the plan's box, drawn
/// from a stream derived from `seed`.
pub fn random_gram_check(k: &KernelHandle, plan: &SamplingPlan, n: usize, seed: u64) -> Result<PsdReport> {
    plan.validate()?;
    plan.check_kernel(k)?;
    let pts = plan.clone().with_seed(seed).sample_points(n, STREAM_GRAM);
    psd_check(&gram(k, &pts)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::point::Point;
    use nalgebra::DMatrix;

    fn matrix(rows: usize, v: Vec<f64>) -> GramMatrix {
        GramMatrix {
            points: (0..rows).map(|i| Point::scalar(i as f64)).collect(),
            entries: DMatrix::from_row_slice(rows, rows, &v),
        }
    }

    #[test]
    fn one_by_one() {
        let r = psd_check(&matrix(1, vec![1.0])).unwrap();
        assert!(r.pass);
        assert_eq!(r.min_eigenvalue, 1.0);
        assert!(!psd_check(&matrix(1, vec![-1.0])).unwrap().pass);
    }

    #[test]
    fn constant_minus_one_kernel_fails() {
        let k = KernelHandle::from_fn("minus_one", None, |_, _| -1.0);
        let plan = SamplingPlan::interval(0.0, 1.0).unwrap();
        assert!(!random_gram_check(&k, &plan, 5, 1).unwrap().pass);
    }

    #[test]
    fn asymmetry_rejected() {
        assert!(matches!(psd_check(&matrix(2, vec![1.0, 0.5, 0.4, 1.0])), Err(Error::Domain(_))));
    }

    #[test]
    fn gaussian_strictly_positive() {
        let g = KernelHandle::gaussian(1.0).unwrap();
        let pts: Vec<Point> = (0..10).map(|i| Point::scalar(i as f64 * 0.7 - 3.0)).collect();
        let r = psd_check(&gram(&g, &pts).unwrap()).unwrap();
        assert!(r.pass && r.min_eigenvalue > 0.0);
    }

    #[test]
    fn size_cap() {
        let g = KernelHandle::gaussian(1.0).unwrap();
        let pts: Vec<Point> = (0..=MAX_EIGEN_N).map(|i| Point::scalar(i as f64)).collect();
        assert!(psd_check(&gram(&g, &pts).unwrap()).is_err());
    }
}
