use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::point::{dot, euclidean};

/// Compositional scalar functions `ℝ^d → ℝ` with known Lipschitz constants
/// (with respect to the Euclidean norm).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "primitive", rename_all = "snake_case")]
pub enum Primitive {
    Constant {
        value: f64,
    },
    /// `w·x + b`
    Affine {
        weights: Vec<f64>,
        #[serde(default)]
        bias: f64,
    },
    /// `cos(w·x + phase)`
    Cosine {
        freq: Vec<f64>,
        #[serde(default)]
        phase: f64,
    },
    /// `sin(w·x + phase)`
    Sine {
        freq: Vec<f64>,
        #[serde(default)]
        phase: f64,
    },
    /// `max(0, 1 − ‖x − c‖/width)`
    Hat { center: Vec<f64>, width: f64 },
    /// `exp(−rate·‖x − c‖)`
    ExpDecay { center: Vec<f64>, rate: f64 },
    Min {
        a: Box<Primitive>,
        b: Box<Primitive>,
    },
    Scale {
        factor: f64,
        inner: Box<Primitive>,
    },
    /// `inner(x − offset)`
    Shift {
        offset: Vec<f64>,
        inner: Box<Primitive>,
    },
}

fn finite(what: &str, v: &[f64]) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::domain(format!("{what} must be finite")))
    }
}

fn merge_dim(a: Option<usize>, b: Option<usize>) -> Result<Option<usize>> {
    match (a, b) {
        (Some(x), Some(y)) if x != y => Err(Error::domain(format!(
            "primitive dimensions disagree: {x} vs {y}"
        ))),
        (Some(x), _) | (_, Some(x)) => Ok(Some(x)),
        _ => Ok(None),
    }
}

impl Primitive {
    pub fn sin() -> Self {
        Primitive::Sine {
            freq: vec![1.0],
            phase: 0.0,
        }
    }

    pub fn cos() -> Self {
        Primitive::Cosine {
            freq: vec![1.0],
            phase: 0.0,
        }
    }

    /// Input dimension fixed by the primitive's parameters, if any.
    pub fn input_dim(&self) -> Result<Option<usize>> {
        self.validate()?;
        self.dim_unchecked()
    }

    fn dim_unchecked(&self) -> Result<Option<usize>> {
        use Primitive::*;
        Ok(match self {
            Constant { .. } => None,
            Affine { weights: w, .. } | Cosine { freq: w, .. } | Sine { freq: w, .. } => Some(w.len()),
            Hat { center, .. } | ExpDecay { center, .. } => Some(center.len()),
            Min { a, b } => merge_dim(a.dim_unchecked()?, b.dim_unchecked()?)?,
            Scale { inner, .. } => inner.dim_unchecked()?,
            Shift { offset, inner } => merge_dim(Some(offset.len()), inner.dim_unchecked()?)?,
        })
    }

    pub fn validate(&self) -> Result<()> {
        use Primitive::*;
        match self {
            Constant { value } => finite("constant", &[*value]),
            Affine { weights, bias } => {
                nonempty(weights)?;
                finite("affine weights", weights)?;
                finite("affine bias", &[*bias])
            }
            Cosine { freq, phase } | Sine { freq, phase } => {
                nonempty(freq)?;
                finite("frequency", freq)?;
                finite("phase", &[*phase])
            }
            Hat { center, width } => {
                nonempty(center)?;
                finite("hat center", center)?;
                if !(*width > 0.0 && width.is_finite()) {
                    return Err(Error::domain(format!("hat width {width} must be > 0")));
                }
                Ok(())
            }
            ExpDecay { center, rate } => {
                nonempty(center)?;
                finite("exp-decay center", center)?;
                if !(*rate >= 0.0 && rate.is_finite()) {
                    return Err(Error::domain(format!("exp-decay rate {rate} must be >= 0")));
                }
                Ok(())
            }
            Min { a, b } => {
                a.validate()?;
                b.validate()?;
                merge_dim(a.dim_unchecked()?, b.dim_unchecked()?).map(|_| ())
            }
            Scale { factor, inner } => {
                finite("scale factor", &[*factor])?;
                inner.validate()
            }
            Shift { offset, inner } => {
                nonempty(offset)?;
                finite("shift offset", offset)?;
                inner.validate()?;
                merge_dim(Some(offset.len()), inner.dim_unchecked()?).map(|_| ())
            }
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        use Primitive::*;
        match self {
            Constant { value } => *value,
            Affine { weights, bias } => dot(weights, x) + bias,
            Cosine { freq, phase } => (dot(freq, x) + phase).cos(),
            Sine { freq, phase } => (dot(freq, x) + phase).sin(),
            Hat { center, width } => (1.0 - euclidean(x, center) / width).max(0.0),
            ExpDecay { center, rate } => (-rate * euclidean(x, center)).exp(),
            Min { a, b } => a.eval(x).min(b.eval(x)),
            Scale { factor, inner } => factor * inner.eval(x),
            Shift { offset, inner } => {
                let y: Vec<f64> = x.iter().zip(offset).map(|(a, o)| a - o).collect();
                inner.eval(&y)
            }
        }
    }

    /// Lipschitz constant with respect to the Euclidean norm.
    pub fn lipschitz(&self) -> f64 {
        use Primitive::*;
        match self {
            Constant { .. } => 0.0,
            Affine { weights: w, .. } | Cosine { freq: w, .. } | Sine { freq: w, .. } => {
                dot(w, w).sqrt()
            }
            Hat { width, .. } => 1.0 / width,
            ExpDecay { rate, .. } => *rate,
            Min { a, b } => a.lipschitz().max(b.lipschitz()),
            Scale { factor, inner } => factor.abs() * inner.lipschitz(),
            Shift { inner, .. } => inner.lipschitz(),
        }
    }
}

fn nonempty(v: &[f64]) -> Result<()> {
    if v.is_empty() {
        Err(Error::domain("primitive parameter vector must be nonempty"))
    } else {
        Ok(())
    }
}
