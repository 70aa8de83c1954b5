//! Neither player can improve unilaterally: verify the saddle property of
//! the classifier/attack pair on a toy configuration.
//!
//!     cargo run -p advmot --example saddle_check

use advmot::cases::{standard_cases, toy_measure};
use advmot::classifier::{build_saddle, verify_saddle};
use advmot::cost::{CostSpec, Metric};
use advmot::mot::{build_problem, solve_exact};

fn main() -> advmot::Result<()> {
    for case in standard_cases() {
        let measure = toy_measure(&case)?;
        let spec = CostSpec::Ball {
            epsilon: case.epsilon,
            metric: Metric::L2,
        };
        let problem = build_problem(&measure, &spec)?;
        let sol = solve_exact(&problem)?;
        let pair = build_saddle(&problem, &sol)?;
        let report = verify_saddle(&measure, &spec, &pair, 400, 17)?;
        println!(
            "{:<24} value {:.6} vs certified {:.6} | learner gain {:+.2e} | adversary slack {:+.2e} | {}",
            format!("{:?}", case.id),
            report.value,
            report.certified_power,
            report.learner_gain,
            report.adversary_slack,
            if report.passed() { "saddle holds" } else { "VIOLATED" }
        );
    }
    Ok(())
}
