//! # advmot
//!
//! Exact and entropic solvers for the *optimal adversarial risk* of a
//! multiclass classification problem, together with the optimal robust
//! (probabilistic) classifier and an optimal adversarial attack.
//!
//! The adversary may displace training mass within a transport budget
//! (an ε-ball indicator cost or a `(1/τ)·dᵖ` power cost). The worst-case
//! 0-1 risk of the best classifier against that adversary is computed by
//! two equivalent routes, which cross-check each other:
//!
//! 1. a **generalized barycenter** linear program over groupings of class
//!    measures ([`barycenter`]), and
//! 2. a **multimarginal optimal transport (MOT)** problem with one marginal
//!    per class over a ghost-augmented sample space ([`mot`]), solved either
//!    exactly (dense LP) or approximately by a log-domain multimarginal
//!    Sinkhorn iteration.
//!
//! From the dual potentials of either route the crate assembles a robust
//! classifier, and from the primal coupling an optimal attack; the pair is
//! certified as a saddle point of the underlying game ([`classifier`]).
//!
//! ## Quick start
//!
//! ```
//! use advmot::classifier::{adversarial_risk, RiskMode};
//! use advmot::cost::{CostSpec, Metric};
//! use advmot::measure::{LabeledMeasure, LabeledPoint};
//!
//! // two atoms of different classes, one unit apart
//! let measure = LabeledMeasure::new(
//!     vec![
//!         LabeledPoint { coords: vec![0.0, 0.0], label: 1, weight: 0.5 },
//!         LabeledPoint { coords: vec![1.0, 0.0], label: 2, weight: 0.5 },
//!     ],
//!     2,
//! )?;
//! // with budget 0.5 the adversary can merge them at the midpoint:
//! // the best classifier keeps power 1/2, so the risk is 1/2
//! let spec = CostSpec::Ball { epsilon: 0.5, metric: Metric::L2 };
//! let report = adversarial_risk(&measure, &spec, RiskMode::Exact)?;
//! assert!((report.risk - 0.5).abs() < 1e-9);
//! # Ok::<(), advmot::Error>(())
//! ```
//!
//! ## Module map
//!
//! | Module | Contents |
//! |--------|----------|
//! | [`measure`] | labeled empirical measures, ghost index, class-subset tables |
//! | [`cost`] | ground costs, c-transforms, group meeting costs `c_A` / points `T_A` |
//! | [`lp`] | dense revised simplex with Bland's rule (exact, deterministic) |
//! | [`barycenter`] | generalized barycenter LP, mass decomposition, attack reconstruction |
//! | [`mot`] | ghost-augmented MOT: cost tensor, exact LP, multimarginal Sinkhorn, duals |
//! | [`classifier`] | robust classifier, aggregated attack, saddle verification, risk |
//! | [`cases`] | closed-form reference values for binary and three-point configurations |
//! | [`validate`] | seeded random instances and the cross-solver invariant battery |
//! | [`config`], [`run`] | run configuration and the solve/sweep/classify/validate drivers |
//!
//! ## Examples
//!
//! Each major capability has a runnable example:
//!
//! ```text
//! cargo run -p advmot --example binary_risk            # two classes, one budget knob
//! cargo run -p advmot --example three_point_cases      # closed forms vs both solvers
//! cargo run -p advmot --example mot_vs_barycenter      # the two routes agree
//! cargo run -p advmot --example sinkhorn_bounds        # entropic upper bounds vs eta
//! cargo run -p advmot --example attack_reconstruction  # where the adversary moves mass
//! cargo run -p advmot --example robust_classifier_grid # classify a 2-D grid
//! cargo run -p advmot --example saddle_check           # neither player can improve
//! cargo run -p advmot --example risk_sweep             # risk as a function of epsilon
//! ```
//!
//! The thin `advmot` binary exposes the same drivers as subcommands
//! (`solve`, `sweep`, `classify`, `validate`); see the crate README.

use thiserror::Error;

pub mod barycenter;
pub mod cases;
pub mod classifier;
pub mod config;
pub mod cost;
pub mod lp;
pub mod measure;
pub mod mot;
pub mod run;
pub mod validate;

pub use cost::CostSpec;
pub use measure::LabeledMeasure;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("label {label} out of range 1..={num_classes}")]
    LabelOutOfRange { label: usize, num_classes: usize },

    #[error("negative weight {0}")]
    NegativeWeight(f64),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("empty input")]
    EmptyInput,

    #[error("measure has zero total mass")]
    ZeroMass,

    #[error("{0} classes unsupported (need 2..=16)")]
    ClassCount(usize),

    #[error("support too large: {columns} LP columns (bound sum_A prod_(i in A) n_i), cap {cap}")]
    SupportTooLarge { columns: u128, cap: u128 },

    #[error("cost tensor needs {entries} entries, cap {cap}; reduce the number of atoms or classes, or use the sinkhorn solver on a subsample")]
    TensorCapExceeded { entries: u128, cap: u128 },

    #[error("linear program solve failed: {0}")]
    LpFailure(String),

    #[error("marginal {marginal} atom {atom} has no finite-cost tuple: infeasible kernel")]
    InfeasibleKernel { marginal: usize, atom: usize },

    #[error("solver did not converge in {iterations} iterations (marginal residual {residual:.3e}); the emitted record holds the best iterate")]
    NotConverged { iterations: usize, residual: f64 },

    #[error(
        "duals not feasible (violation {violation:.3e}); re-project before building the classifier"
    )]
    DualsInfeasible { violation: f64 },

    #[error("operation requires exactly {expected} classes, measure has {got}")]
    WrongClassCount { expected: usize, got: usize },

    #[error("boundary geometry: {0}")]
    BoundaryGeometry(String),

    #[error("configuration matches no reference case: {0}")]
    NoMatchingCase(String),

    #[error("grid classification requires 2-D input (got dimension {0}); project features first")]
    GridDimension(usize),

    #[error("config error: {0}")]
    Config(String),

    #[error("internal invariant violated: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
