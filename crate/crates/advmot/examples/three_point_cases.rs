//! The catalogue of three-point configurations: closed forms vs solvers.
//!
//!     cargo run -p advmot --example three_point_cases

use advmot::barycenter::solve_generalized_barycenter;
use advmot::cases::{standard_cases, toy_measure};
use advmot::cost::{CostSpec, Metric};
use advmot::mot::{build_problem, solve_exact};

fn main() -> advmot::Result<()> {
    println!(
        "{:<24} {:>9} {:>12} {:>12}",
        "case", "expected", "barycenter", "2*mass*mot"
    );
    for case in standard_cases() {
        let measure = toy_measure(&case)?;
        let spec = CostSpec::Ball {
            epsilon: case.epsilon,
            metric: Metric::L2,
        };
        let bary = solve_generalized_barycenter(&measure, &spec)?;
        let problem = build_problem(&measure, &spec)?;
        let mot = solve_exact(&problem)?;
        println!(
            "{:<24} {:>9.4} {:>12.9} {:>12.9}",
            format!("{:?}", case.id),
            case.expected_power,
            bary.value,
            problem.power_from_value(mot.value),
        );
        println!("    attack: {}", case.attack_description);
    }
    Ok(())
}
