//! Two classes, one budget knob: how the optimal adversarial risk reacts.
//!
//!     cargo run -p advmot --example binary_risk

use advmot::classifier::{adversarial_risk, RiskMode};
use advmot::cost::{CostSpec, Metric};
use advmot::measure::{LabeledMeasure, LabeledPoint};

fn main() -> advmot::Result<()> {
    // two atoms, one per class, distance 1 apart
    let measure = LabeledMeasure::new(
        vec![
            LabeledPoint {
                coords: vec![0.0, 0.0],
                label: 1,
                weight: 0.5,
            },
            LabeledPoint {
                coords: vec![1.0, 0.0],
                label: 2,
                weight: 0.5,
            },
        ],
        2,
    )?;
    println!("two atoms at distance 1, masses 1/2 each\n");
    println!("{:>8} {:>10} {:>10}", "epsilon", "power", "risk");
    for epsilon in [0.0, 0.2, 0.4, 0.49, 0.5, 0.6, 1.0] {
        let spec = CostSpec::Ball {
            epsilon,
            metric: Metric::L2,
        };
        let report = adversarial_risk(&measure, &spec, RiskMode::Exact)?;
        println!(
            "{epsilon:>8.2} {:>10.4} {:>10.4}",
            report.power, report.risk
        );
    }
    println!("\nthe atoms pair up exactly when the budget reaches half their distance:");
    println!("below 0.5 the classifier keeps full power, from 0.5 on it loses half.");
    Ok(())
}
