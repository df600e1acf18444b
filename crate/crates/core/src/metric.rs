use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::point::{check_same_dim, Point};

/// Metric on the input space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AmbientMetric {
    #[default]
    Euclidean,
    Manhattan,
    Chebyshev,
    /// `d(x, y)^exponent` for a base metric `d`, with `exponent` in (0, 1].
    Power {
        base: Box<AmbientMetric>,
        exponent: f64,
    },
}

impl AmbientMetric {
    pub fn power(base: AmbientMetric, exponent: f64) -> Result<Self> {
        let m = AmbientMetric::Power {
            base: Box::new(base),
            exponent,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if let AmbientMetric::Power { base, exponent } = self {
            if !(*exponent > 0.0 && *exponent <= 1.0) {
                return Err(Error::domain(format!(
                    "power metric exponent {exponent} outside (0, 1]"
                )));
            }
            base.validate()?;
        }
        Ok(())
    }

    pub fn distance(&self, x: &Point, y: &Point) -> Result<f64> {
        check_same_dim(x, y)?;
        Ok(self.distance_raw(x.coords(), y.coords()))
    }

    pub(crate) fn distance_raw(&self, x: &[f64], y: &[f64]) -> f64 {
        match self {
            AmbientMetric::Euclidean => crate::point::euclidean(x, y),
            AmbientMetric::Manhattan => x.iter().zip(y).map(|(a, b)| (a - b).abs()).sum(),
            AmbientMetric::Chebyshev => x
                .iter()
                .zip(y)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max),
            AmbientMetric::Power { base, exponent } => {
                base.distance_raw(x, y).powf(*exponent)
            }
        }
    }

    /// Smallest `c` with `‖x − y‖₂ ≤ c·d(x, y)` on `dim`-dimensional space,
    /// or `None` when no such global constant exists.
    pub fn euclidean_domination(&self, dim: usize) -> Option<f64> {
        match self {
            AmbientMetric::Euclidean | AmbientMetric::Manhattan => Some(1.0),
            AmbientMetric::Chebyshev => Some((dim as f64).sqrt()),
            AmbientMetric::Power { base, exponent } if *exponent == 1.0 => {
                base.euclidean_domination(dim)
            }
            AmbientMetric::Power { .. } => None,
        }
    }
}
