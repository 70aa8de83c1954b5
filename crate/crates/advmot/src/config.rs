//! Run configuration: one JSON document mirrors every CLI flag; flags win.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::cost::{CostSpec, Metric};
use crate::{Error, Result};

/// Solver selection for the MOT route.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverMode {
    Exact,
    Sinkhorn,
}

/// Solver section.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub mode: SolverMode,
    pub eta: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            mode: SolverMode::Exact,
            eta: 0.01,
            tol: 1e-6,
            max_iter: 10_000,
        }
    }
}

/// Sweep section: exactly one grid, strictly increasing.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepConfig {
    pub epsilons: Option<Vec<f64>>,
    pub taus: Option<Vec<f64>>,
}

/// 2-D classification grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    pub xmin: f64,
    pub xmax: f64,
    pub ymin: f64,
    pub ymax: f64,
    pub resolution: usize,
}

/// Full run configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub input: Option<PathBuf>,
    pub cost: CostSpec,
    pub solver: SolverConfig,
    pub sweep: Option<SweepConfig>,
    pub grid: Option<GridConfig>,
    pub out: Option<PathBuf>,
    pub seed: u64,
    /// rescale the input measure to total mass one after loading
    pub normalize: bool,
    /// pad the class count beyond the largest label seen
    pub num_classes: Option<usize>,
    /// cap on materialized cost-tensor entries
    pub tensor_cap: Option<u64>,
    /// cap on stratified-LP columns
    pub column_cap: Option<u64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            input: None,
            cost: CostSpec::Ball {
                epsilon: 0.3,
                metric: Metric::L2,
            },
            solver: SolverConfig::default(),
            sweep: None,
            grid: None,
            out: None,
            seed: 0,
            normalize: false,
            num_classes: None,
            tensor_cap: None,
            column_cap: None,
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("bad config: {e}")))?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Checks invariants: referenced paths exist, grids strictly increase,
    /// the classify grid is sane, solver parameters are in range.
    pub fn validate(&self, needs_input: bool) -> Result<()> {
        self.cost.validate()?;
        if needs_input {
            match &self.input {
                None => return Err(Error::Config("no input file given".into())),
                Some(p) if !p.exists() => {
                    return Err(Error::Config(format!(
                        "input {} does not exist",
                        p.display()
                    )))
                }
                _ => {}
            }
        }
        if self.solver.eta <= 0.0 || !self.solver.eta.is_finite() {
            return Err(Error::Config(format!(
                "eta must be > 0, got {}",
                self.solver.eta
            )));
        }
        if self.solver.tol <= 0.0 || !self.solver.tol.is_finite() {
            return Err(Error::Config(format!(
                "tol must be > 0, got {}",
                self.solver.tol
            )));
        }
        if let Some(sweep) = &self.sweep {
            let grids = [&sweep.epsilons, &sweep.taus];
            let present = grids.iter().filter(|g| g.is_some()).count();
            if present != 1 {
                return Err(Error::Config(
                    "sweep needs exactly one of 'epsilons' or 'taus'".into(),
                ));
            }
            let grid = sweep.epsilons.as_ref().or(sweep.taus.as_ref()).unwrap();
            if grid.len() < 2 {
                return Err(Error::Config(
                    "sweep grid needs at least two entries".into(),
                ));
            }
            if grid.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Config(
                    "sweep grid must be strictly increasing".into(),
                ));
            }
            if sweep.taus.is_some() && grid[0] <= 0.0 {
                return Err(Error::Config("tau grid must be positive".into()));
            }
            if sweep.epsilons.is_some() && grid[0] < 0.0 {
                return Err(Error::Config("epsilon grid must be nonnegative".into()));
            }
        }
        if let Some(g) = &self.grid {
            if g.resolution < 2 {
                return Err(Error::Config("grid resolution must be at least 2".into()));
            }
            if !(g.xmin < g.xmax && g.ymin < g.ymax) {
                return Err(Error::Config(
                    "grid bounds must be strictly increasing".into(),
                ));
            }
        }
        Ok(())
    }
}
