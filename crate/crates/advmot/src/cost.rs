//! Ground costs on the feature space, their transforms, and group meeting
//! costs.
//!
//! Two cost families are supported: a budget-ball indicator (`0` inside an
//! ε-ball, `+∞` outside) and a power cost `(1/τ)·d(x,x')^p` with `p ∈ {1,2}`.
//! Infinity is represented by `f64::INFINITY` and propagated algebraically;
//! infinite-cost LP columns are omitted upstream, never stored as large
//! floats.
//!
//! [`set_cost`] computes, for a group of points (one per class in a subset),
//! the cheapest total cost of meeting at a common point and that meeting
//! point itself: a Chebyshev center for ball costs (via minimum enclosing
//! ball), the coordinate mean for `p = 2`, and the geometric median
//! (Weiszfeld) for `p = 1`.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub mod meb;
mod weiszfeld;

/// Distance used by a ground cost.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    L2,
    Linf,
}

impl Metric {
    pub fn dist(&self, x: &[f64], y: &[f64]) -> f64 {
        match self {
            Metric::L2 => x
                .iter()
                .zip(y)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt(),
            Metric::Linf => x
                .iter()
                .zip(y)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max),
        }
    }
}

/// Ground cost specification.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum CostSpec {
    /// Indicator of the closed ε-ball: `0` if `d(x,x') <= epsilon`, else `+∞`.
    /// `epsilon` is the adversarial budget; `epsilon = 0` allows no movement.
    Ball { epsilon: f64, metric: Metric },
    /// `(1/tau)·d(x,x')^p` with the Euclidean metric; `p ∈ {1, 2}`.
    Power { p: u32, tau: f64 },
}

impl CostSpec {
    /// Validates parameter ranges (`epsilon >= 0`, `tau > 0`, `p ∈ {1,2}`).
    pub fn validate(&self) -> Result<()> {
        match *self {
            CostSpec::Ball { epsilon, .. } => {
                if !(epsilon.is_finite() && epsilon >= 0.0) {
                    return Err(Error::Config(format!(
                        "epsilon must be >= 0, got {epsilon}"
                    )));
                }
            }
            CostSpec::Power { p, tau } => {
                if !(tau.is_finite() && tau > 0.0) {
                    return Err(Error::Config(format!("tau must be > 0, got {tau}")));
                }
                if p != 1 && p != 2 {
                    return Err(Error::Config(format!("p must be 1 or 2, got {p}")));
                }
            }
        }
        Ok(())
    }

    pub fn metric(&self) -> Metric {
        match self {
            CostSpec::Ball { metric, .. } => *metric,
            CostSpec::Power { .. } => Metric::L2,
        }
    }

    /// Ground cost of moving `x` to `x_to`. Always `0` when the points
    /// coincide. Panics in debug builds on dimension mismatch; use
    /// [`cost`] for a checked entry point.
    pub fn eval(&self, x: &[f64], x_to: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), x_to.len());
        match *self {
            CostSpec::Ball { epsilon, metric } => {
                if metric.dist(x, x_to) <= epsilon {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            CostSpec::Power { p, tau } => {
                let d = Metric::L2.dist(x, x_to);
                match p {
                    1 => d / tau,
                    _ => d * d / tau,
                }
            }
        }
    }
}

/// Checked ground-cost evaluation.
pub fn cost(spec: &CostSpec, x: &[f64], x_to: &[f64]) -> Result<f64> {
    if x.len() != x_to.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: x_to.len(),
        });
    }
    Ok(spec.eval(x, x_to))
}

/// Inf-convolution of values on a finite support with the ground cost:
/// `f^c(x) = min_{x' in support} f(x') + c(x', x)`.
///
/// Returns `+∞` when no support point is reachable (ball cost), meaning
/// "no constraint at x".
#[derive(Debug, Clone)]
pub struct CTransform {
    spec: CostSpec,
    support: Vec<(Vec<f64>, f64)>,
}

impl CTransform {
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.support
            .iter()
            .map(|(xp, v)| v + self.spec.eval(xp, x))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Builds the c-transform evaluator `f^c` of finitely supported values.
pub fn c_transform(spec: &CostSpec, support: Vec<(Vec<f64>, f64)>) -> Result<CTransform> {
    if support.is_empty() {
        return Err(Error::EmptyInput);
    }
    if support.iter().any(|(_, v)| !v.is_finite()) {
        return Err(Error::NonFinite("support values"));
    }
    Ok(CTransform {
        spec: *spec,
        support,
    })
}

/// Sup-deconvolution of values on a finite support with the ground cost:
/// `g^c̄(x') = max_{x in support} g(x) - c(x, x')`.
///
/// Returns `-∞` when no support point is reachable.
#[derive(Debug, Clone)]
pub struct ConjugateCTransform {
    spec: CostSpec,
    support: Vec<(Vec<f64>, f64)>,
}

impl ConjugateCTransform {
    pub fn eval(&self, x_to: &[f64]) -> f64 {
        self.support
            .iter()
            .map(|(xp, v)| v - self.spec.eval(xp, x_to))
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Builds the conjugate c-transform evaluator `g^c̄`.
pub fn conjugate_c_transform(
    spec: &CostSpec,
    support: Vec<(Vec<f64>, f64)>,
) -> Result<ConjugateCTransform> {
    if support.is_empty() {
        return Err(Error::EmptyInput);
    }
    if support.iter().any(|(_, v)| !v.is_finite()) {
        return Err(Error::NonFinite("support values"));
    }
    Ok(ConjugateCTransform {
        spec: *spec,
        support,
    })
}

/// Result of the group meeting-cost problem for one subset of classes.
#[derive(Debug, Clone, PartialEq)]
pub struct SetCostResult {
    /// `min_x' Σ_i c(x', x_i)`, possibly `+∞`.
    pub value: f64,
    /// A minimizing meeting point, present iff `value` is finite. Among
    /// non-unique optima the point closest to the coordinate mean is chosen
    /// (ball costs use the Chebyshev center directly).
    pub witness: Option<Vec<f64>>,
}

/// Relative slack applied to the ball-feasibility test `radius <= epsilon`,
/// so that exact boundary geometries (atoms exactly `2·epsilon` apart) are
/// treated as feasible under the closed-ball convention.
const BALL_FEAS_TOL: f64 = 1e-9;

/// Optimal meeting cost and meeting point for one representative point per
/// class in a subset.
///
/// Ball cost: value `0` with the Chebyshev center as witness iff the minimum
/// enclosing ball radius is at most `epsilon`, else `+∞`. Power `p = 2`: the
/// coordinate mean. Power `p = 1`: the geometric median. A singleton group
/// meets at its own point with cost `0`.
pub fn set_cost(spec: &CostSpec, points: &[&[f64]]) -> SetCostResult {
    assert!(!points.is_empty(), "set_cost needs at least one point");
    if points.len() == 1 {
        return SetCostResult {
            value: 0.0,
            witness: Some(points[0].to_vec()),
        };
    }
    match *spec {
        CostSpec::Ball { epsilon, metric } => {
            let (center, radius) = match metric {
                Metric::L2 => meb::min_enclosing_ball(points),
                Metric::Linf => linf_center(points),
            };
            if radius <= epsilon * (1.0 + BALL_FEAS_TOL) + 1e-12 {
                SetCostResult {
                    value: 0.0,
                    witness: Some(center),
                }
            } else {
                SetCostResult {
                    value: f64::INFINITY,
                    witness: None,
                }
            }
        }
        CostSpec::Power { p: 2, tau } => {
            let mean = coordinate_mean(points);
            let value = points
                .iter()
                .map(|x| {
                    let d = Metric::L2.dist(&mean, x);
                    d * d
                })
                .sum::<f64>()
                / tau;
            SetCostResult {
                value,
                witness: Some(mean),
            }
        }
        CostSpec::Power { tau, .. } => {
            let median = weiszfeld::geometric_median(points);
            let value = points
                .iter()
                .map(|x| Metric::L2.dist(&median, x))
                .sum::<f64>()
                / tau;
            SetCostResult {
                value,
                witness: Some(median),
            }
        }
    }
}

fn coordinate_mean(points: &[&[f64]]) -> Vec<f64> {
    let d = points[0].len();
    let mut mean = vec![0.0; d];
    for x in points {
        for (m, v) in mean.iter_mut().zip(x.iter()) {
            *m += v;
        }
    }
    for m in &mut mean {
        *m /= points.len() as f64;
    }
    mean
}

/// Chebyshev center under the sup norm: per-coordinate midpoint of min/max,
/// radius is half the largest coordinate range. Closed form, no iteration.
fn linf_center(points: &[&[f64]]) -> (Vec<f64>, f64) {
    let d = points[0].len();
    let mut center = Vec::with_capacity(d);
    let mut radius: f64 = 0.0;
    for c in 0..d {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for x in points {
            lo = lo.min(x[c]);
            hi = hi.max(x[c]);
        }
        center.push(0.5 * (lo + hi));
        radius = radius.max(0.5 * (hi - lo));
    }
    (center, radius)
}
