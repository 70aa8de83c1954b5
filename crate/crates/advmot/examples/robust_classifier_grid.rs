//! Classify a 2-D grid with the robust classifier and render it as text.
//!
//!     cargo run -p advmot --example robust_classifier_grid

use advmot::barycenter::solve_generalized_barycenter;
use advmot::classifier::PotentialBundle;
use advmot::cost::{CostSpec, Metric};
use advmot::measure::{LabeledMeasure, LabeledPoint};

fn main() -> advmot::Result<()> {
    let measure = LabeledMeasure::new(
        vec![
            LabeledPoint {
                coords: vec![-1.0, -0.6],
                label: 1,
                weight: 0.4,
            },
            LabeledPoint {
                coords: vec![1.0, -0.6],
                label: 2,
                weight: 0.35,
            },
            LabeledPoint {
                coords: vec![0.0, 1.1],
                label: 3,
                weight: 0.25,
            },
        ],
        3,
    )?;
    for epsilon in [0.6, 1.2] {
        let spec = CostSpec::Ball {
            epsilon,
            metric: Metric::L2,
        };
        let sol = solve_generalized_barycenter(&measure, &spec)?;
        let bundle = PotentialBundle::from_barycenter_duals(&measure, &sol.atom_duals, &spec)?;
        println!("budget {epsilon}: power {:.4}; '.' = abstain", sol.value);
        for iy in (0..18).rev() {
            let y = -2.0 + 4.0 * iy as f64 / 17.0;
            let mut row = String::new();
            for ix in 0..36 {
                let x = -2.5 + 5.0 * ix as f64 / 35.0;
                let c = bundle.classify(&spec, &[x, y])?;
                row.push(match c.label {
                    0 => '.',
                    l => char::from_digit(l as u32, 10).unwrap(),
                });
            }
            println!("  {row}");
        }
        println!();
    }
    Ok(())
}
