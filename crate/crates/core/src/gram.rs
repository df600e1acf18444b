//! Gram matrices and the pre-RKHS of finite kernel expansions.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::kernel::KernelHandle;
use crate::par;
use crate::point::{compensated_dot, Point};

/// Relative PSD tolerance for Gram eigenvalues and quadratic forms.
pub const TOL_PSD: f64 = 1e-8;

/// `entries[(i, j)] = k(points[j], points[i])`.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    pub points: Vec<Point>,
    pub entries: DMatrix<f64>,
}

impl GramMatrix {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn trace(&self) -> f64 {
        self.entries.trace()
    }

    /// `cᵀ G c`.
    pub fn quadratic_form(&self, c: &[f64]) -> f64 {
        let n = self.len();
        let mut acc = Vec::with_capacity(n);
        for i in 0..n {
            let row: Vec<f64> = (0..n).map(|j| self.entries[(i, j)]).collect();
            acc.push(c[i] * compensated_dot(&row, c));
        }
        acc.iter().sum()
    }

    /// `Σ |c_i c_j G_ij|`, the magnitude scale of the quadratic form.
    pub(crate) fn abs_quadratic_form(&self, c: &[f64]) -> f64 {
        let n = self.len();
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                s += (c[i] * c[j] * self.entries[(i, j)]).abs();
            }
        }
        s
    }
}

/// Gram matrix of `k` on `pts`. The upper triangle is evaluated (in
/// parallel over rows) and mirrored, so the result is exactly symmetric and
/// independent of thread count.
pub fn gram(k: &KernelHandle, pts: &[Point]) -> Result<GramMatrix> {
    let n = pts.len();
    if n == 0 {
        return Err(Error::domain("Gram matrix needs at least one point"));
    }
    let d = pts[0].dim();
    for p in pts {
        if p.dim() != d {
            return Err(Error::domain("Gram points must share one dimension"));
        }
        k.check_point(p)?;
    }
    let rows = par::map_range(n, |i| {
        (i..n)
            .map(|j| k.eval(&pts[j], &pts[i]))
            .collect::<Result<Vec<f64>>>()
    });
    let mut entries = DMatrix::zeros(n, n);
    for (i, row) in rows.into_iter().enumerate() {
        for (off, v) in row?.into_iter().enumerate() {
            let j = i + off;
            entries[(i, j)] = v;
            entries[(j, i)] = v;
        }
    }
    Ok(GramMatrix {
        points: pts.to_vec(),
        entries,
    })
}

/// Finite expansion `f = Σₙ cₙ k(·, xₙ)`.
#[derive(Debug, Clone)]
pub struct PreRkhsFunction {
    kernel: KernelHandle,
    centers: Vec<Point>,
    coefficients: Vec<f64>,
    /// `Σₙ cₙ Φ(xₙ)` when the kernel has an explicit feature map; lets
    /// evaluation cost one feature evaluation instead of one per center.
    primal: Option<Vec<f64>>,
}

impl PreRkhsFunction {
    pub fn new(kernel: KernelHandle, centers: Vec<Point>, coefficients: Vec<f64>) -> Result<Self> {
        if centers.len() != coefficients.len() {
            return Err(Error::domain(format!(
                "{} centers but {} coefficients",
                centers.len(),
                coefficients.len()
            )));
        }
        if let Some(c) = coefficients.iter().find(|c| !c.is_finite()) {
            return Err(Error::domain(format!("non-finite coefficient {c}")));
        }
        if let Some(first) = centers.first() {
            for c in &centers {
                if c.dim() != first.dim() {
                    return Err(Error::domain("centers must share one dimension"));
                }
                kernel.check_point(c)?;
            }
        }
        let primal = kernel.features().map(|phi| {
            let mut w = vec![0.0; phi.dim()];
            for (c, a) in centers.iter().zip(&coefficients) {
                for (wi, fi) in w.iter_mut().zip(phi.eval_raw(c.coords())) {
                    *wi += a * fi;
                }
            }
            w
        });
        Ok(PreRkhsFunction {
            kernel,
            centers,
            coefficients,
            primal,
        })
    }

    /// `k(·, x)`.
    pub fn section(kernel: KernelHandle, x: Point) -> Result<Self> {
        Self::new(kernel, vec![x], vec![1.0])
    }

    pub fn kernel(&self) -> &KernelHandle {
        &self.kernel
    }

    pub fn centers(&self) -> &[Point] {
        &self.centers
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// `f(x) = Σₙ cₙ k(x, xₙ)`.
    pub fn eval(&self, x: &Point) -> Result<f64> {
        self.kernel.check_point(x)?;
        if let Some(c) = self.centers.first() {
            crate::point::check_same_dim(c, x)?;
        }
        let v = self.eval_raw(x.coords());
        if !v.is_finite() {
            return Err(Error::Numerics(format!("f(x) = {v}")));
        }
        Ok(v)
    }

    pub(crate) fn eval_raw(&self, x: &[f64]) -> f64 {
        match (&self.primal, self.kernel.features()) {
            (Some(w), Some(phi)) => compensated_dot(&phi.eval_raw(x), w),
            _ => self
                .centers
                .iter()
                .zip(&self.coefficients)
                .map(|(c, a)| a * self.kernel.eval_raw(x, c.coords()))
                .sum(),
        }
    }

    /// `⟨f, g⟩_k = Σₙ Σₘ aₙ bₘ k(yₘ, xₙ)`.
    pub fn inner(&self, other: &PreRkhsFunction) -> Result<f64> {
        let mut s = 0.0;
        for (x, a) in self.centers.iter().zip(&self.coefficients) {
            for (y, b) in other.centers.iter().zip(&other.coefficients) {
                s += a * b * self.kernel.eval(y, x)?;
            }
        }
        Ok(s)
    }

    /// `‖f‖_k = √(cᵀ G c)`, clamping roundoff-level negative forms to zero.
    pub fn rkhs_norm(&self) -> Result<f64> {
        if self.centers.is_empty() {
            return Ok(0.0);
        }
        let g = gram(&self.kernel, &self.centers)?;
        norm_from_gram(&g, &self.coefficients)
    }
}

/// Values of several functions over one kernel at `x`; a kernel with a
/// feature map is evaluated once and shared.
pub(crate) fn eval_many(funcs: &[PreRkhsFunction], x: &[f64]) -> Vec<f64> {
    let shared = funcs.first().and_then(|f| f.kernel.features()).map(|phi| phi.eval_raw(x));
    funcs
        .iter()
        .map(|f| match (&shared, &f.primal) {
            (Some(px), Some(w)) => compensated_dot(px, w),
            _ => f.eval_raw(x),
        })
        .collect()
}

/// `√(cᵀ G c)` with the clamp rule: forms in `[−TOL_PSD·s, 0)` report zero,
/// where `s = Σ|cᵢ cⱼ Gᵢⱼ|` is the roundoff scale of the form; anything
/// more negative is a PSD violation.
pub(crate) fn norm_from_gram(g: &GramMatrix, c: &[f64]) -> Result<f64> {
    let q = g.quadratic_form(c);
    let tol = TOL_PSD * g.abs_quadratic_form(c);
    if q < -tol {
        return Err(Error::PsdViolation {
            what: "RKHS quadratic form".into(),
            value: q,
            tolerance: tol,
        });
    }
    Ok(q.max(0.0).sqrt())
}

pub fn rkhs_norm(f: &PreRkhsFunction) -> Result<f64> {
    f.rkhs_norm()
}

pub fn eval_function(f: &PreRkhsFunction, x: &Point) -> Result<f64> {
    f.eval(x)
}

/// Probed lower bound of `‖k‖∞ = sup √k(x,x)`, combined with the kernel's
/// closed-form hint when it has one.
pub fn sup_norm(k: &KernelHandle, probe: &[Point]) -> Result<f64> {
    let diag = par::try_map(probe, |x| k.eval(x, x))?;
    let mut m = 0.0f64;
    for v in diag {
        if v < -1e-12 {
            return Err(Error::PsdViolation {
                what: "diagonal k(x,x)".into(),
                value: v,
                tolerance: 1e-12,
            });
        }
        m = m.max(v.max(0.0).sqrt());
    }
    Ok(match k.sup_norm_hint() {
        Some(h) => m.max(h),
        None => m,
    })
}
