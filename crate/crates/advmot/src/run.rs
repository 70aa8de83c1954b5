//! Drivers behind the command-line surface: solve, sweep, classify,
//! validate. Each driver returns a serializable record; the binary decides
//! where to write it.

use std::fs::File;
use std::io::BufReader;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifier::{
    adversarial_risk, build_attack, PotentialBundle, PotentialSource, RiskMode,
};
use crate::config::{RunConfig, SolverMode};
use crate::cost::CostSpec;
use crate::measure::LabeledMeasure;
use crate::mot::{build_problem_capped, extract_duals, solve_exact, solve_sinkhorn, Coupling};
use crate::validate::{run_validation, ValidationReport};
use crate::{Error, Result};

/// One coupling atom in a solve record.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CouplingAtom {
    pub tuple: Vec<usize>,
    pub mass: f64,
}

/// One attack atom in a solve record.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AttackAtom {
    pub class: usize,
    pub x: Vec<f64>,
    pub mass: f64,
}

/// Result record of `solve`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveRecord {
    pub b_star: f64,
    pub risk: f64,
    pub mot_value: f64,
    pub mode: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    pub iterations: usize,
    pub marginal_residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub duality_gap: Option<f64>,
    pub converged: bool,
    pub mass: f64,
    pub num_atoms: usize,
    pub num_classes: usize,
    pub seed: u64,
    pub potentials: Vec<Vec<f64>>,
    pub coupling_support: Vec<CouplingAtom>,
    pub attack_atoms: Vec<AttackAtom>,
}

fn load_input(cfg: &RunConfig) -> Result<LabeledMeasure> {
    let path = cfg
        .input
        .as_ref()
        .ok_or_else(|| Error::Config("no input file given".into()))?;
    let file = File::open(path)?;
    let m = LabeledMeasure::from_csv(BufReader::new(file), cfg.num_classes)?;
    if cfg.normalize {
        m.normalized()
    } else {
        Ok(m)
    }
}

/// Solves one instance end to end and reports value, risk, potentials,
/// coupling support and the aggregated attack.
pub fn cmd_solve(cfg: &RunConfig) -> Result<SolveRecord> {
    cfg.validate(true)?;
    let measure = load_input(cfg)?;
    let tensor_cap = cfg
        .tensor_cap
        .unwrap_or(crate::mot::DEFAULT_TENSOR_CAP as u64);
    let problem = build_problem_capped(&measure, &cfg.cost, tensor_cap as u128)?;
    let sol = match cfg.solver.mode {
        SolverMode::Exact => solve_exact(&problem)?,
        SolverMode::Sinkhorn => solve_sinkhorn(
            &problem,
            cfg.solver.eta,
            cfg.solver.tol,
            cfg.solver.max_iter,
        )?,
    };
    let duals = extract_duals(&problem, &sol);
    let attack = build_attack(&problem, &sol)?;
    let mass = measure.total_mass();
    let b_star = problem.power_from_value(sol.value);
    let coupling_support = match &sol.coupling {
        Coupling::Sparse(entries) => entries
            .iter()
            .map(|(t, m)| CouplingAtom {
                tuple: t.iter().map(|&x| x as usize).collect(),
                mass: *m,
            })
            .collect(),
        Coupling::Dense(pi) => {
            let mut atoms = Vec::new();
            for (idx, &m) in pi.iter().enumerate() {
                if m > 1e-9 {
                    atoms.push(CouplingAtom {
                        tuple: problem.decode(idx).iter().map(|&x| x as usize).collect(),
                        mass: m,
                    });
                }
            }
            atoms
        }
    };
    let attack_atoms = attack
        .atoms
        .iter()
        .enumerate()
        .flat_map(|(i, class_atoms)| {
            class_atoms.iter().map(move |(x, m)| AttackAtom {
                class: i + 1,
                x: x.clone(),
                mass: *m,
            })
        })
        .collect();
    Ok(SolveRecord {
        b_star,
        risk: mass - b_star,
        mot_value: sol.value,
        mode: match cfg.solver.mode {
            SolverMode::Exact => "exact".into(),
            SolverMode::Sinkhorn => "sinkhorn".into(),
        },
        eta: match cfg.solver.mode {
            SolverMode::Sinkhorn => Some(cfg.solver.eta),
            SolverMode::Exact => None,
        },
        iterations: sol.iterations,
        marginal_residual: sol.marginal_residual,
        duality_gap: sol.duality_gap,
        converged: sol.converged,
        mass,
        num_atoms: measure.num_atoms(),
        num_classes: measure.num_classes(),
        seed: cfg.seed,
        potentials: duals.potentials,
        coupling_support,
        attack_atoms,
    })
}

/// One row of a sweep table.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepRow {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    pub b_star: f64,
    pub risk: f64,
    pub mode: String,
    pub exact: bool,
    pub converged: bool,
    pub num_atoms: usize,
}

/// A budget whose solve failed during a sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepFailure {
    pub budget: f64,
    pub error: String,
}

/// Sweep record: one row per budget, ordered by the grid. Failed budgets
/// are reported separately; the successful rows are preserved.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepRecord {
    pub rows: Vec<SweepRow>,
    pub failures: Vec<SweepFailure>,
    pub seed: u64,
}

/// Risk curve over a budget grid. Exact rows are checked for risk
/// monotonicity (in epsilon); entropic rows are reported as bounds.
pub fn cmd_sweep(cfg: &RunConfig) -> Result<SweepRecord> {
    cfg.validate(true)?;
    let sweep = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| Error::Config("sweep requires a sweep section".into()))?;
    let measure = load_input(cfg)?;
    let is_eps = sweep.epsilons.is_some();
    let grid: Vec<f64> = sweep
        .epsilons
        .clone()
        .or_else(|| sweep.taus.clone())
        .unwrap();
    if is_eps && !matches!(cfg.cost, CostSpec::Ball { .. }) {
        return Err(Error::Config("an epsilon sweep needs a ball cost".into()));
    }
    if !is_eps && !matches!(cfg.cost, CostSpec::Power { .. }) {
        return Err(Error::Config("a tau sweep needs a power cost".into()));
    }
    let mode = cfg.solver.mode;
    let outcomes: Vec<(f64, Result<SweepRow>)> = grid
        .par_iter()
        .map(|&budget| {
            let spec = match (is_eps, cfg.cost) {
                (true, CostSpec::Ball { metric, .. }) => CostSpec::Ball {
                    epsilon: budget,
                    metric,
                },
                (false, CostSpec::Power { p, .. }) => CostSpec::Power { p, tau: budget },
                _ => unreachable!(),
            };
            let row = adversarial_risk(
                &measure,
                &spec,
                match mode {
                    SolverMode::Exact => RiskMode::Exact,
                    SolverMode::Sinkhorn => RiskMode::Sinkhorn {
                        eta: cfg.solver.eta,
                        tol: cfg.solver.tol,
                        max_iter: cfg.solver.max_iter,
                    },
                },
            )
            .map(|report| SweepRow {
                epsilon: is_eps.then_some(budget),
                tau: (!is_eps).then_some(budget),
                b_star: report.power,
                risk: report.risk,
                mode: if report.exact {
                    "exact".into()
                } else {
                    "sinkhorn".into()
                },
                exact: report.exact,
                converged: report.converged,
                num_atoms: measure.num_atoms(),
            });
            (budget, row)
        })
        .collect();
    // per-budget failures are collected, successful rows preserved
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for (budget, outcome) in outcomes {
        match outcome {
            Ok(row) => rows.push(row),
            Err(e) => failures.push(SweepFailure {
                budget,
                error: e.to_string(),
            }),
        }
    }
    if is_eps && mode == SolverMode::Exact {
        for w in rows.windows(2) {
            if w[1].risk < w[0].risk - 1e-9 {
                return Err(Error::Internal(format!(
                    "risk decreased along the epsilon grid ({} -> {}); solver bug",
                    w[0].risk, w[1].risk
                )));
            }
        }
    }
    Ok(SweepRecord {
        rows,
        failures,
        seed: cfg.seed,
    })
}

/// One classified grid cell.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridCell {
    pub x0: f64,
    pub x1: f64,
    /// winning class, 0 = abstain
    pub label: usize,
    pub scores: Vec<f64>,
}

/// Classification grid record.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassifyRecord {
    pub cells: Vec<GridCell>,
    pub approximate: bool,
    pub num_classes: usize,
    pub seed: u64,
}

impl ClassifyRecord {
    /// Delimited text rows `x0,x1,label,score_1..score_K` (abstain = 0,
    /// unreachable scores serialize as `-inf`).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x0,x1,label");
        for i in 1..=self.num_classes {
            out.push_str(&format!(",score_{i}"));
        }
        out.push('\n');
        for c in &self.cells {
            out.push_str(&format!("{},{},{}", c.x0, c.x1, c.label));
            for s in &c.scores {
                if s.is_finite() {
                    out.push_str(&format!(",{s}"));
                } else {
                    out.push_str(",-inf");
                }
            }
            out.push('\n');
        }
        out
    }
}

/// Robust classification of a 2-D grid.
///
/// Exact mode scores come from the generalized-barycenter duals; sinkhorn
/// mode uses projected entropic potentials and marks the record
/// approximate.
pub fn cmd_classify(cfg: &RunConfig) -> Result<ClassifyRecord> {
    cfg.validate(true)?;
    let grid = cfg
        .grid
        .as_ref()
        .ok_or_else(|| Error::Config("classify requires a grid section".into()))?;
    let measure = load_input(cfg)?;
    if measure.dim() != 2 {
        return Err(Error::GridDimension(measure.dim()));
    }
    let (bundle, approximate) = match cfg.solver.mode {
        SolverMode::Exact => {
            let column_cap = cfg
                .column_cap
                .unwrap_or(crate::barycenter::DEFAULT_COLUMN_CAP as u64);
            let sol = crate::barycenter::solve_generalized_barycenter_capped(
                &measure,
                &cfg.cost,
                column_cap as u128,
            )?;
            (
                PotentialBundle::from_barycenter_duals(&measure, &sol.atom_duals, &cfg.cost)?,
                false,
            )
        }
        SolverMode::Sinkhorn => {
            let tensor_cap = cfg
                .tensor_cap
                .unwrap_or(crate::mot::DEFAULT_TENSOR_CAP as u64);
            let problem = build_problem_capped(&measure, &cfg.cost, tensor_cap as u128)?;
            let sol = solve_sinkhorn(
                &problem,
                cfg.solver.eta,
                cfg.solver.tol,
                cfg.solver.max_iter,
            )?;
            let duals = extract_duals(&problem, &sol);
            (
                PotentialBundle::build_psi(&problem, &duals, PotentialSource::Entropic)?,
                true,
            )
        }
    };
    let res = grid.resolution;
    let step = |lo: f64, hi: f64, i: usize| lo + (hi - lo) * i as f64 / (res - 1) as f64;
    let queries: Vec<(f64, f64)> = (0..res)
        .flat_map(|iy| (0..res).map(move |ix| (ix, iy)))
        .map(|(ix, iy)| {
            (
                step(grid.xmin, grid.xmax, ix),
                step(grid.ymin, grid.ymax, iy),
            )
        })
        .collect();
    let cells: Result<Vec<GridCell>> = queries
        .par_iter()
        .map(|&(x0, x1)| {
            let c = bundle.classify(&cfg.cost, &[x0, x1])?;
            Ok(GridCell {
                x0,
                x1,
                label: c.label,
                scores: c.scores,
            })
        })
        .collect();
    Ok(ClassifyRecord {
        cells: cells?,
        approximate,
        num_classes: measure.num_classes(),
        seed: cfg.seed,
    })
}

/// Runs the full validation battery.
pub fn cmd_validate(seed: u64) -> Result<ValidationReport> {
    run_validation(seed)
}

/// Formats a validation report as pass/fail lines.
pub fn format_validation(report: &ValidationReport) -> String {
    let mut out = String::new();
    for g in &report.groups {
        out.push_str(&format!(
            "[{}] {} (max residual {:.3e}): {}\n",
            if g.passed { "PASS" } else { "FAIL" },
            g.name,
            g.max_residual,
            g.detail
        ));
    }
    out.push_str(if report.passed() {
        "all groups passed\n"
    } else {
        "validation FAILED\n"
    });
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_csv(dir: &std::path::Path, name: &str, text: &str) -> std::path::PathBuf {
        let path = dir.join(name);
        let mut f = File::create(&path).unwrap();
        f.write_all(text.as_bytes()).unwrap();
        path
    }

    fn binary_cfg(dir: &std::path::Path) -> RunConfig {
        let input = write_csv(
            dir,
            "binary.csv",
            "x0,x1,label,weight\n0,0,1,0.5\n1,0,2,0.5\n",
        );
        let mut cfg = RunConfig::default();
        cfg.input = Some(input);
        cfg.cost = CostSpec::Ball {
            epsilon: 1.0,
            metric: crate::cost::Metric::L2,
        };
        cfg
    }

    #[test]
    fn solve_record_on_binary_instance() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = binary_cfg(dir.path());
        let rec = cmd_solve(&cfg).unwrap();
        assert!((rec.b_star - 0.5).abs() < 1e-8);
        assert!((rec.risk - 0.5).abs() < 1e-8);
        assert!((rec.mot_value - 0.25).abs() < 1e-9);
        assert_eq!(rec.mode, "exact");
        assert!(rec.duality_gap.unwrap() <= 1e-8);
        assert!(!rec.attack_atoms.is_empty());
        assert!(!rec.coupling_support.is_empty());
    }

    #[test]
    fn solve_is_deterministic_bytes() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = binary_cfg(dir.path());
        let a = serde_json::to_string(&cmd_solve(&cfg).unwrap()).unwrap();
        let b = serde_json::to_string(&cmd_solve(&cfg).unwrap()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn sweep_monotone_and_ordered() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = binary_cfg(dir.path());
        cfg.sweep = Some(crate::config::SweepConfig {
            epsilons: Some(vec![0.0, 0.2, 0.45, 0.55, 2.0]),
            taus: None,
        });
        let rec = cmd_sweep(&cfg).unwrap();
        assert_eq!(rec.rows.len(), 5);
        // distinct supports: zero risk at zero budget
        assert!(rec.rows[0].risk.abs() < 1e-10);
        // atoms at distance 1 pair up from eps = 0.5 onward
        assert!((rec.rows.last().unwrap().risk - 0.5).abs() < 1e-8);
        for w in rec.rows.windows(2) {
            assert!(w[1].risk >= w[0].risk - 1e-9);
        }
    }

    #[test]
    fn classify_grid_covers_and_abstains() {
        // well-separated atoms: the duals are unambiguous (full confidence
        // on each class), so near-atom labels are determined
        let dir = tempfile::tempdir().unwrap();
        let input = write_csv(
            dir.path(),
            "separated.csv",
            "x0,x1,label,weight\n0,0,1,0.5\n5,0,2,0.5\n",
        );
        let mut cfg = RunConfig::default();
        cfg.input = Some(input);
        cfg.cost = CostSpec::Ball {
            epsilon: 1.0,
            metric: crate::cost::Metric::L2,
        };
        cfg.grid = Some(crate::config::GridConfig {
            xmin: -2.0,
            xmax: 7.0,
            ymin: -2.0,
            ymax: 2.0,
            resolution: 10,
        });
        let rec = cmd_classify(&cfg).unwrap();
        assert_eq!(rec.cells.len(), 100);
        assert!(!rec.approximate);
        for c in &rec.cells {
            let d1 = (c.x0.powi(2) + c.x1.powi(2)).sqrt();
            let d2 = ((c.x0 - 5.0).powi(2) + c.x1.powi(2)).sqrt();
            if d1 <= 1.0 {
                assert_eq!(c.label, 1, "cell ({}, {})", c.x0, c.x1);
            } else if d2 <= 1.0 {
                assert_eq!(c.label, 2, "cell ({}, {})", c.x0, c.x1);
            } else {
                assert_eq!(c.label, 0, "cell ({}, {})", c.x0, c.x1);
            }
        }
        let csv = rec.to_csv();
        assert!(csv.starts_with("x0,x1,label,score_1,score_2\n"));
        assert!(csv.contains("-inf"));
    }

    #[test]
    fn tau_sweep_runs_on_power_costs() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = binary_cfg(dir.path());
        cfg.cost = CostSpec::Power { p: 2, tau: 1.0 };
        cfg.sweep = Some(crate::config::SweepConfig {
            epsilons: None,
            taus: Some(vec![0.5, 1.0, 4.0]),
        });
        let rec = cmd_sweep(&cfg).unwrap();
        assert_eq!(rec.rows.len(), 3);
        assert!(rec.failures.is_empty());
        // a cheaper budget (larger tau) can only help the adversary
        for w in rec.rows.windows(2) {
            assert!(w[1].b_star <= w[0].b_star + 1e-9);
        }
        // mismatched cost family is a config error
        cfg.cost = CostSpec::Ball {
            epsilon: 1.0,
            metric: crate::cost::Metric::L2,
        };
        assert!(matches!(cmd_sweep(&cfg), Err(Error::Config(_))));
    }

    #[test]
    fn classify_rejects_non_planar_input() {
        let dir = tempfile::tempdir().unwrap();
        let input = write_csv(
            dir.path(),
            "three_d.csv",
            "x0,x1,x2,label\n0,0,0,1\n1,1,1,2\n",
        );
        let mut cfg = RunConfig::default();
        cfg.input = Some(input);
        cfg.grid = Some(crate::config::GridConfig {
            xmin: 0.0,
            xmax: 1.0,
            ymin: 0.0,
            ymax: 1.0,
            resolution: 3,
        });
        assert!(matches!(cmd_classify(&cfg), Err(Error::GridDimension(3))));
    }

    #[test]
    fn small_budget_grid_agrees_with_nearest_class() {
        // three blobs, small budget: covered cells match the 1-NN labels
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(33);
        let centers = [[0.0f64, 0.0], [2.0, 0.0], [1.0, 1.8]];
        let mut csv = String::from("x0,x1,label\n");
        let mut atoms: Vec<(f64, f64, usize)> = Vec::new();
        for (label, c) in centers.iter().enumerate() {
            for _ in 0..8 {
                let x = c[0] + (rng.gen::<f64>() - 0.5) * 0.8;
                let y = c[1] + (rng.gen::<f64>() - 0.5) * 0.8;
                csv.push_str(&format!("{x},{y},{}\n", label + 1));
                atoms.push((x, y, label + 1));
            }
        }
        let dir = tempfile::tempdir().unwrap();
        let input = write_csv(dir.path(), "blobs.csv", &csv);
        let mut cfg = RunConfig::default();
        cfg.input = Some(input);
        cfg.cost = CostSpec::Ball {
            epsilon: 0.15,
            metric: crate::cost::Metric::L2,
        };
        cfg.grid = Some(crate::config::GridConfig {
            xmin: -1.0,
            xmax: 3.0,
            ymin: -1.0,
            ymax: 2.5,
            resolution: 40,
        });
        let rec = cmd_classify(&cfg).unwrap();
        let mut covered = 0;
        let mut agree = 0;
        for cell in rec.cells.iter().filter(|c| c.label != 0) {
            covered += 1;
            let nn = atoms
                .iter()
                .min_by(|a, b| {
                    let da = (a.0 - cell.x0).powi(2) + (a.1 - cell.x1).powi(2);
                    let db = (b.0 - cell.x0).powi(2) + (b.1 - cell.x1).powi(2);
                    da.total_cmp(&db)
                })
                .unwrap()
                .2;
            if nn == cell.label {
                agree += 1;
            }
        }
        assert!(covered > 20, "grid too coarse to cover the sample");
        let frac = agree as f64 / covered as f64;
        assert!(frac >= 0.8, "1-NN agreement {frac:.2} below 0.8");
    }

    #[test]
    fn sinkhorn_solve_record_reports_bound() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = binary_cfg(dir.path());
        cfg.solver.mode = SolverMode::Sinkhorn;
        cfg.solver.eta = 0.1;
        cfg.solver.tol = 1e-7;
        cfg.solver.max_iter = 20_000;
        let rec = cmd_solve(&cfg).unwrap();
        assert_eq!(rec.mode, "sinkhorn");
        assert_eq!(rec.eta, Some(0.1));
        assert!(rec.converged);
        // power bound from above, risk bound from below
        assert!(rec.b_star >= 0.5 - 1e-9);
        assert!(rec.risk <= 0.5 + 1e-9);
    }
}
