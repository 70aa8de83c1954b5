//! Risk as a function of the adversarial budget on a synthetic sample.
//!
//!     cargo run -p advmot --example risk_sweep

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use advmot::classifier::{adversarial_risk, RiskMode};
use advmot::cost::{CostSpec, Metric};
use advmot::measure::{LabeledMeasure, LabeledPoint};

fn main() -> advmot::Result<()> {
    // three Gaussian-style blobs, 8 points each
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let centers = [[0.0, 0.0], [2.2, 0.0], [1.1, 1.9]];
    let mut points = Vec::new();
    for (label, c) in centers.iter().enumerate() {
        for _ in 0..8 {
            let g =
                |r: &mut ChaCha8Rng| (r.gen::<f64>() + r.gen::<f64>() + r.gen::<f64>() - 1.5) * 0.5;
            points.push(LabeledPoint {
                coords: vec![c[0] + g(&mut rng), c[1] + g(&mut rng)],
                label: label + 1,
                weight: 1.0 / 24.0,
            });
        }
    }
    let measure = LabeledMeasure::new(points, 3)?;
    println!("{:>8} {:>10} {:>10}", "epsilon", "power", "risk");
    for epsilon in [0.0, 0.1, 0.25, 0.5, 0.75, 1.0, 1.5, 2.5] {
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
    println!("\nrisk grows with the budget and saturates at 1 - max class mass.");
    Ok(())
}
