//! Entropic solves upper-bound the exact power; smaller regularization
//! refines the bound (at the price of slower marginal convergence).
//!
//!     cargo run -p advmot --example sinkhorn_bounds

use advmot::cost::{CostSpec, Metric};
use advmot::measure::{LabeledMeasure, LabeledPoint};
use advmot::mot::{build_problem, solve_exact, solve_sinkhorn};

fn main() -> advmot::Result<()> {
    let measure = LabeledMeasure::new(
        vec![
            LabeledPoint {
                coords: vec![0.0, 0.0],
                label: 1,
                weight: 0.4,
            },
            LabeledPoint {
                coords: vec![0.9, 0.0],
                label: 2,
                weight: 0.35,
            },
            LabeledPoint {
                coords: vec![0.45, 0.8],
                label: 3,
                weight: 0.25,
            },
        ],
        3,
    )?;
    let spec = CostSpec::Ball {
        epsilon: 0.5,
        metric: Metric::L2,
    };
    let problem = build_problem(&measure, &spec)?;
    let exact = solve_exact(&problem)?;
    println!("exact MOT value: {:.9}\n", exact.value);
    println!(
        "{:>8} {:>12} {:>12} {:>8} {:>10}",
        "eta", "value", "gap", "sweeps", "converged"
    );
    for eta in [3.0, 1.0, 0.3, 0.1, 0.03, 0.01] {
        let sk = solve_sinkhorn(&problem, eta, 1e-7, 20_000)?;
        println!(
            "{eta:>8} {:>12.9} {:>12.3e} {:>8} {:>10}",
            sk.value,
            sk.value - exact.value,
            sk.iterations,
            sk.converged
        );
        assert!(sk.value >= exact.value - 1e-9, "bound violated");
    }
    println!("\nevery entropic value sits above the exact one: the rounded");
    println!("iterate is a feasible coupling, so its cost cannot be lower.");
    Ok(())
}
