//! The two exact routes must agree: the stratified grouping LP and the
//! ghost-augmented multimarginal transport compute the same power.
//!
//!     cargo run -p advmot --example mot_vs_barycenter

use advmot::barycenter::solve_generalized_barycenter;
use advmot::mot::{build_problem, solve_exact};
use advmot::validate::suite;

fn main() -> advmot::Result<()> {
    println!(
        "{:>4} {:>3} {:>3} {:>22} {:>14} {:>14} {:>10}",
        "inst", "n", "K", "cost", "barycenter", "2*mass*mot", "spread"
    );
    let mut worst = 0.0f64;
    for inst in suite(12, 2024) {
        let bary = solve_generalized_barycenter(&inst.measure, &inst.spec)?.value;
        let problem = build_problem(&inst.measure, &inst.spec)?;
        let mot = problem.power_from_value(solve_exact(&problem)?.value);
        let spread = (bary - mot).abs();
        worst = worst.max(spread);
        println!(
            "{:>4} {:>3} {:>3} {:>22} {:>14.10} {:>14.10} {:>10.2e}",
            inst.index,
            inst.measure.num_atoms(),
            inst.measure.num_classes(),
            format!("{:?}", inst.spec),
            bary,
            mot,
            spread
        );
    }
    println!("\nworst spread: {worst:.3e}");
    Ok(())
}
