//! Where does the adversary move mass? Reconstruct the optimal attack for
//! a three-point configuration with cyclic overlaps.
//!
//!     cargo run -p advmot --example attack_reconstruction

use advmot::barycenter::solve_generalized_barycenter;
use advmot::cost::{CostSpec, Metric};
use advmot::measure::{LabeledMeasure, LabeledPoint};

fn main() -> advmot::Result<()> {
    // near-equilateral triangle, side 1.9, budget 1: each pair can meet,
    // the triple cannot
    let sqrt3 = 3.0f64.sqrt();
    let measure = LabeledMeasure::new(
        vec![
            LabeledPoint {
                coords: vec![0.0, 0.0],
                label: 1,
                weight: 0.4,
            },
            LabeledPoint {
                coords: vec![1.9, 0.0],
                label: 2,
                weight: 0.35,
            },
            LabeledPoint {
                coords: vec![0.95, 0.95 * sqrt3],
                label: 3,
                weight: 0.25,
            },
        ],
        3,
    )?;
    let spec = CostSpec::Ball {
        epsilon: 1.0,
        metric: Metric::L2,
    };
    let sol = solve_generalized_barycenter(&measure, &spec)?;
    println!(
        "optimal power: {:.6}  (risk {:.6})\n",
        sol.value,
        1.0 - sol.value
    );
    println!("barycenter support (meeting points and their masses):");
    for (point, mass) in &sol.lambda {
        println!("  ({:>7.4}, {:>7.4})  mass {:.4}", point[0], point[1], mass);
    }
    println!("\ntransports (class: source -> target, mass):");
    for t in &sol.attacks.transports {
        println!(
            "  class {}: ({:>7.4}, {:>7.4}) -> ({:>7.4}, {:>7.4})  mass {:.4}",
            t.class, t.source[0], t.source[1], t.target[0], t.target[1], t.mass
        );
    }
    println!("\nper-class attack masses (conserved):");
    for class in 1..=3 {
        println!(
            "  class {}: {:.4} (original {:.4})",
            class,
            sol.attacks.class_mass(class),
            measure.class_mass(class)
        );
    }
    Ok(())
}
