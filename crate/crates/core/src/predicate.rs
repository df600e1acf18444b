//! Checkable inequalities over sampled point quadruples.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::point::Point;

/// Sampled tuple `(x₁, x₁', x₂, x₂')`. Pair-valued claims read `x₁, x₁'`;
/// single-point claims read `x₁`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Quad {
    pub x1: Point,
    pub x1p: Point,
    pub x2: Point,
    pub x2p: Point,
}

impl Quad {
    pub fn pair(x: Point, y: Point) -> Self {
        Quad {
            x1: x.clone(),
            x1p: y.clone(),
            x2: x,
            x2p: y,
        }
    }
}

/// One evaluated instance `lhs ≤ rhs`. `scale` is the magnitude of the raw
/// values the two sides were computed from; it sets the roundoff allowance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Inequality {
    pub lhs: f64,
    pub rhs: f64,
    pub scale: f64,
}

impl Inequality {
    pub fn new(lhs: f64, rhs: f64, scale: f64) -> Self {
        Inequality { lhs, rhs, scale }
    }

    /// `lhs − rhs`, positive when the claim fails before tolerance.
    pub fn excess(&self) -> f64 {
        self.lhs - self.rhs
    }

    pub fn holds(&self, abs_tol: f64) -> bool {
        self.lhs <= self.rhs + abs_tol * self.scale.max(1.0)
    }
}

type Check = dyn Fn(&Quad) -> Result<Inequality> + Send + Sync;

/// A named claim evaluated on sampled tuples.
#[derive(Clone)]
pub struct Predicate {
    name: String,
    check: Arc<Check>,
}

impl fmt::Debug for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Predicate").field("name", &self.name).finish()
    }
}

impl Predicate {
    pub fn new<F>(name: impl Into<String>, check: F) -> Self
    where
        F: Fn(&Quad) -> Result<Inequality> + Send + Sync + 'static,
    {
        Predicate {
            name: name.into(),
            check: Arc::new(check),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn evaluate(&self, q: &Quad) -> Result<Inequality> {
        (self.check)(q)
    }
}
