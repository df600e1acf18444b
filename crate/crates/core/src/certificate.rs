use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::AmbientMetric;
use crate::point::Point;

/// Which result a certificate was derived from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Provenance {
    KernelMetric,
    HolderKernel,
    FeatureMixture,
    SeriesFrame,
    IntegralOp,
    Converse,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KernelMetricTag {
    KernelMetric,
}

/// Metric a certificate is stated in: the kernel semimetric `d_k` or an
/// ambient metric on the input space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CertificateMetric {
    Kernel(KernelMetricTag),
    Ambient(AmbientMetric),
}

impl CertificateMetric {
    pub fn kernel() -> Self {
        CertificateMetric::Kernel(KernelMetricTag::KernelMetric)
    }
}

impl From<AmbientMetric> for CertificateMetric {
    fn from(m: AmbientMetric) -> Self {
        CertificateMetric::Ambient(m)
    }
}

/// Claim: `|f(x) − f(x')| ≤ C·‖f‖_k·d(x, x')^α` for every `f` in the RKHS.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HolderCertificate {
    pub alpha: f64,
    #[serde(rename = "C")]
    pub constant_per_unit_norm: f64,
    pub provenance: Provenance,
    pub metric: CertificateMetric,
    /// Hypotheses the certificate rests on (declared constants, truncations).
    #[serde(default)]
    pub assumptions: Vec<String>,
}

impl HolderCertificate {
    pub fn new(
        alpha: f64,
        constant: f64,
        provenance: Provenance,
        metric: CertificateMetric,
    ) -> Result<Self> {
        let c = HolderCertificate {
            alpha,
            constant_per_unit_norm: constant,
            provenance,
            metric,
            assumptions: Vec::new(),
        };
        c.validate()?;
        Ok(c)
    }

    /// `|f(x) − f(x')| ≤ ‖f‖_k d_k(x, x')`, valid for every kernel.
    pub fn kernel_metric() -> Self {
        HolderCertificate {
            alpha: 1.0,
            constant_per_unit_norm: 1.0,
            provenance: Provenance::KernelMetric,
            metric: CertificateMetric::kernel(),
            assumptions: Vec::new(),
        }
    }

    pub fn with_assumption(mut self, a: impl Into<String>) -> Self {
        self.assumptions.push(a.into());
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::domain(format!("certificate exponent {} must be > 0", self.alpha)));
        }
        if !(self.constant_per_unit_norm >= 0.0 && self.constant_per_unit_norm.is_finite()) {
            return Err(Error::domain(format!(
                "certificate constant {} must be finite and >= 0",
                self.constant_per_unit_norm
            )));
        }
        if let CertificateMetric::Ambient(m) = &self.metric {
            m.validate()?;
        }
        Ok(())
    }

    /// Right-hand side `C·norm·d^α` for a given distance.
    pub fn bound(&self, norm: f64, distance: f64) -> f64 {
        self.constant_per_unit_norm * norm * distance.powf(self.alpha)
    }

    /// Ambient distance, or `None` for kernel-metric certificates.
    pub fn ambient_distance(&self, x: &Point, y: &Point) -> Option<Result<f64>> {
        match &self.metric {
            CertificateMetric::Ambient(m) => Some(m.distance(x, y)),
            CertificateMetric::Kernel(_) => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_shape() {
        let c = HolderCertificate::new(0.5, 1.25, Provenance::HolderKernel, AmbientMetric::Euclidean.into())
            .unwrap();
        let s = serde_json::to_string(&c).unwrap();
        assert_eq!(
            s,
            r#"{"alpha":0.5,"C":1.25,"provenance":"HolderKernel","metric":{"kind":"euclidean"},"assumptions":[]}"#
        );
        let back: HolderCertificate = serde_json::from_str(&s).unwrap();
        assert_eq!(back, c);
        let k = serde_json::to_string(&HolderCertificate::kernel_metric()).unwrap();
        assert!(k.contains(r#""metric":{"kind":"kernel_metric"}"#));
        let back: HolderCertificate = serde_json::from_str(&k).unwrap();
        assert_eq!(back.metric, CertificateMetric::kernel());
    }

    #[test]
    fn validation() {
        let m: CertificateMetric = AmbientMetric::Euclidean.into();
        assert!(HolderCertificate::new(0.0, 1.0, Provenance::Converse, m.clone()).is_err());
        assert!(HolderCertificate::new(1.0, -1.0, Provenance::Converse, m.clone()).is_err());
        assert!(HolderCertificate::new(1.0, 0.0, Provenance::Converse, m).is_ok());
    }
}
