//! Thin command-line front end over the library drivers.
//!
//! Exit codes: 0 success, 1 validation failure, 2 configuration error,
//! 3 resource cap exceeded.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use advmot::config::{GridConfig, RunConfig, SolverMode, SweepConfig};
use advmot::run::{cmd_classify, cmd_solve, cmd_sweep, cmd_validate, format_validation};
use advmot::Error;

#[derive(Parser)]
#[command(
    name = "advmot",
    about = "Optimal adversarial risk, robust classifiers and optimal attacks for multiclass classification"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonFlags {
    /// input table: header x0,...,x{d-1},label[,weight]
    #[arg(long)]
    input: Option<PathBuf>,
    /// JSON config; every flag mirrors a config key, flags win
    #[arg(long)]
    config: Option<PathBuf>,
    /// solver mode: exact | sinkhorn
    #[arg(long)]
    mode: Option<String>,
    /// ball-cost budget
    #[arg(long)]
    epsilon: Option<f64>,
    /// entropic regularization strength
    #[arg(long)]
    eta: Option<f64>,
    /// output directory (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
    /// seed for randomized checks
    #[arg(long)]
    seed: Option<u64>,
    /// rescale the input to total mass one
    #[arg(long)]
    normalize: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one instance: value, risk, potentials, coupling, attack
    Solve {
        #[command(flatten)]
        common: CommonFlags,
    },
    /// Risk curve over a budget grid
    Sweep {
        #[command(flatten)]
        common: CommonFlags,
        /// comma-separated strictly increasing epsilon grid
        #[arg(long)]
        epsilons: Option<String>,
    },
    /// Classify a 2-D grid with the robust classifier
    Classify {
        #[command(flatten)]
        common: CommonFlags,
        /// grid as "xmin,xmax,ymin,ymax,res"
        #[arg(long, allow_hyphen_values = true)]
        grid: Option<String>,
    },
    /// Run the cross-solver invariant battery
    Validate {
        #[command(flatten)]
        common: CommonFlags,
    },
}

fn build_config(common: &CommonFlags) -> Result<RunConfig, Error> {
    let mut cfg = match &common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(input) = &common.input {
        cfg.input = Some(input.clone());
    }
    if let Some(mode) = &common.mode {
        cfg.solver.mode = match mode.as_str() {
            "exact" => SolverMode::Exact,
            "sinkhorn" => SolverMode::Sinkhorn,
            other => return Err(Error::Config(format!("unknown mode '{other}'"))),
        };
    }
    if let Some(eps) = common.epsilon {
        cfg.cost = match cfg.cost {
            advmot::CostSpec::Ball { metric, .. } => advmot::CostSpec::Ball {
                epsilon: eps,
                metric,
            },
            other => {
                return Err(Error::Config(format!(
                    "--epsilon applies to ball costs, config has {other:?}"
                )))
            }
        };
    }
    if let Some(eta) = common.eta {
        cfg.solver.eta = eta;
    }
    if let Some(out) = &common.out {
        cfg.out = Some(out.clone());
    }
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if common.normalize {
        cfg.normalize = true;
    }
    Ok(cfg)
}

fn parse_grid(text: &str) -> Result<GridConfig, Error> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 5 {
        return Err(Error::Config(
            "grid must be \"xmin,xmax,ymin,ymax,res\"".into(),
        ));
    }
    let nums: Result<Vec<f64>, _> = parts[..4].iter().map(|p| p.trim().parse::<f64>()).collect();
    let nums = nums.map_err(|e| Error::Config(format!("bad grid bound: {e}")))?;
    let res: usize = parts[4]
        .trim()
        .parse()
        .map_err(|e| Error::Config(format!("bad grid resolution: {e}")))?;
    Ok(GridConfig {
        xmin: nums[0],
        xmax: nums[1],
        ymin: nums[2],
        ymax: nums[3],
        resolution: res,
    })
}

fn parse_grid_list(text: &str) -> Result<Vec<f64>, Error> {
    text.split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|e| Error::Config(format!("bad grid entry '{p}': {e}")))
        })
        .collect()
}

/// Writes `content` to `<out>/<name>` when an output directory is set,
/// otherwise to stdout.
fn emit(out: &Option<PathBuf>, name: &str, content: &str) -> Result<(), Error> {
    match out {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            std::fs::write(dir.join(name), content)?;
            eprintln!("wrote {}", dir.join(name).display());
            Ok(())
        }
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn error_record(err: &Error) -> String {
    serde_json::json!({
        "error": err.to_string(),
        "kind": match err {
            Error::Config(_) | Error::Csv(_) | Error::Json(_) => "config",
            Error::SupportTooLarge { .. } | Error::TensorCapExceeded { .. } => "resource_cap",
            Error::NotConverged { .. } => "non_convergence",
            _ => "runtime",
        },
    })
    .to_string()
}

fn exit_code_for(err: &Error) -> ExitCode {
    match err {
        Error::Config(_) | Error::Csv(_) | Error::Json(_) => ExitCode::from(2),
        Error::SupportTooLarge { .. } | Error::TensorCapExceeded { .. } => ExitCode::from(3),
        _ => ExitCode::from(1),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Solve { common } => build_config(common).and_then(|cfg| {
            let record = cmd_solve(&cfg)?;
            let mut line = serde_json::to_string(&record)?;
            line.push('\n');
            emit(&cfg.out, "solve.jsonl", &line)?;
            if !record.converged {
                return Err(Error::NotConverged {
                    iterations: record.iterations,
                    residual: record.marginal_residual,
                });
            }
            Ok(())
        }),
        Command::Sweep { common, epsilons } => build_config(common).and_then(|cfg| {
            let mut cfg = cfg;
            if let Some(text) = epsilons {
                cfg.sweep = Some(SweepConfig {
                    epsilons: Some(parse_grid_list(text)?),
                    taus: None,
                });
            }
            let record = cmd_sweep(&cfg)?;
            let mut lines = String::new();
            for row in &record.rows {
                lines.push_str(&serde_json::to_string(row)?);
                lines.push('\n');
            }
            // partial results are preserved; failures still fail the run
            emit(&cfg.out, "sweep.jsonl", &lines)?;
            if !record.failures.is_empty() {
                return Err(Error::Internal(format!(
                    "{} of {} budgets failed; first: {} at budget {}",
                    record.failures.len(),
                    record.failures.len() + record.rows.len(),
                    record.failures[0].error,
                    record.failures[0].budget
                )));
            }
            Ok(())
        }),
        Command::Classify { common, grid } => build_config(common).and_then(|cfg| {
            let mut cfg = cfg;
            if let Some(text) = grid {
                cfg.grid = Some(parse_grid(text)?);
            }
            let record = cmd_classify(&cfg)?;
            emit(&cfg.out, "grid.csv", &record.to_csv())
        }),
        Command::Validate { common } => build_config(common).and_then(|cfg| {
            let report = cmd_validate(cfg.seed)?;
            let text = format_validation(&report);
            emit(&cfg.out, "validate.txt", &text)?;
            if report.passed() {
                Ok(())
            } else {
                Err(Error::Internal("validation failed".into()))
            }
        }),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("{}", error_record(&err));
            exit_code_for(&err)
        }
    }
}
