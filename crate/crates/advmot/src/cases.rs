//! Closed-form reference values for small configurations, used as ground
//! truth when testing the solvers.
//!
//! Two families are covered: binary (two-class) instances, whose optimal
//! power is a plain two-marginal transport over pairings of the data with
//! itself, and three-point/three-class configurations under a ball cost,
//! which fall into five geometric cases with known optimal values, attacks,
//! and classifiers.

use serde::{Deserialize, Serialize};

use crate::cost::{set_cost, CostSpec, Metric};
use crate::lp::{solve_lp, LinearProgram, LpStatus};
use crate::measure::LabeledMeasure;
use crate::{Error, Result};

/// Geometric case of a three-point, three-class ball-cost configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CaseId {
    /// every pair farther than twice the budget: nothing can be grouped
    Separated,
    /// some point lies within the budget of all three: everything groups
    SharedIntersection,
    /// exactly one pair within twice the budget, the third point isolated
    IsolatedPair,
    /// all pairs within twice the budget but no common point, and no class
    /// outweighs the other two: pairwise grouping covers all mass
    CyclicOverlapBalanced,
    /// same geometry, but the heaviest class outweighs the other two
    CyclicOverlapDominant,
}

/// A classified three-point configuration with its closed-form optimum.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ToyCase {
    pub id: CaseId,
    pub points: Vec<Vec<f64>>,
    pub epsilon: f64,
    /// class weights, `weights[i]` for class `i+1`; positive, summing to 1
    pub weights: Vec<f64>,
    /// closed-form optimal classification power
    pub expected_power: f64,
    pub attack_description: String,
    pub classifier_description: String,
}

/// Relative tolerance for boundary detection in the case predicates.
const BOUNDARY_TOL: f64 = 1e-9;

/// Optimal classification power of a two-class instance by direct pairing:
/// a transport of the labeled measure onto itself where pairing two atoms
/// costs `1/2` if they carry different labels and can meet within the
/// budget, else `1`.
pub fn binary_value(measure: &LabeledMeasure, epsilon: f64) -> Result<f64> {
    if measure.num_classes() != 2 {
        return Err(Error::WrongClassCount {
            expected: 2,
            got: measure.num_classes(),
        });
    }
    let points = measure.points();
    let n = points.len();
    let mut rhs: Vec<f64> = points.iter().map(|p| p.weight).collect();
    rhs.extend(points.iter().map(|p| p.weight));
    let mut lp = LinearProgram::new(2 * n, rhs);
    for i in 0..n {
        for j in 0..n {
            let meet = points[i].label != points[j].label
                && Metric::L2.dist(&points[i].coords, &points[j].coords)
                    <= 2.0 * epsilon * (1.0 + BOUNDARY_TOL);
            let pair_cost = if meet { 0.0 } else { 1.0 };
            lp.add_column(
                vec![i as u32, j as u32],
                (pair_cost + 1.0) / 2.0,
                &[(i, 1.0), (n + j, 1.0)],
            );
        }
    }
    let sol = solve_lp(&lp)?;
    if sol.status != LpStatus::Optimal {
        return Err(Error::Internal(format!(
            "binary pairing LP should always be solvable, got {:?}",
            sol.status
        )));
    }
    Ok(sol.objective)
}

/// Classifies a three-point, three-class ball-cost configuration into its
/// geometric case and attaches the closed-form optimum.
///
/// `weights[i]` is the mass of class `i+1` at `points[i]`; weights must be
/// positive and sum to 1 (any order; the formulas use the relevant maxima).
/// Geometries on a case boundary (a pair at exactly twice the budget, or a
/// triple intersection that barely closes) are rejected: the closed form
/// there depends on the ball convention.
pub fn classify_toy(points: &[Vec<f64>], weights: &[f64], epsilon: f64) -> Result<ToyCase> {
    if points.len() != 3 || weights.len() != 3 {
        return Err(Error::WrongClassCount {
            expected: 3,
            got: points.len(),
        });
    }
    if weights.iter().any(|&w| w <= 0.0) {
        return Err(Error::Config("weights must be positive".into()));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::Config(format!("weights must sum to 1, got {total}")));
    }
    if epsilon <= 0.0 {
        return Err(Error::Config("budget must be positive".into()));
    }
    let d01 = Metric::L2.dist(&points[0], &points[1]);
    let d02 = Metric::L2.dist(&points[0], &points[2]);
    let d12 = Metric::L2.dist(&points[1], &points[2]);
    let scale = 2.0 * epsilon;
    for (d, pair) in [(d01, "1-2"), (d02, "1-3"), (d12, "2-3")] {
        if (d - scale).abs() <= BOUNDARY_TOL * scale {
            return Err(Error::BoundaryGeometry(format!(
                "pair {pair} sits at exactly twice the budget; the value depends on the ball convention"
            )));
        }
    }
    let close = [d01 < scale, d02 < scale, d12 < scale];
    let num_close = close.iter().filter(|&&c| c).count();
    let refs: Vec<&[f64]> = points.iter().map(|p| p.as_slice()).collect();
    let spec = CostSpec::Ball {
        epsilon,
        metric: Metric::L2,
    };
    let triple = set_cost(&spec, &refs);
    // triple-intersection boundary: the enclosing radius within a hair of
    // the budget
    {
        let (_, radius) = crate::cost::meb::min_enclosing_ball(&refs);
        if (radius - epsilon).abs() <= BOUNDARY_TOL * epsilon.max(1.0) {
            return Err(Error::BoundaryGeometry(
                "triple intersection closes exactly at the budget".into(),
            ));
        }
    }
    let heaviest = weights
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap();
    let w_max = weights[heaviest];
    let (id, expected_power, attack, classifier) = if num_close == 0 {
        (
            CaseId::Separated,
            1.0,
            "no-move attack: every class stays on its own point".to_string(),
            "indicator of each budget ball classifies its own class".to_string(),
        )
    } else if triple.value.is_finite() {
        (
            CaseId::SharedIntersection,
            w_max,
            "all classes collapse onto a common reachable point".to_string(),
            format!("constant vote for the heaviest class ({})", heaviest + 1),
        )
    } else if num_close == 3 {
        let rest = 1.0 - w_max;
        if w_max < rest {
            (
                CaseId::CyclicOverlapBalanced,
                0.5,
                "each pair meets at a shared point, masses split to equalize the pair".to_string(),
                "half votes on each pairwise meeting region (probabilistic)".to_string(),
            )
        } else {
            (
                CaseId::CyclicOverlapDominant,
                w_max,
                "the two lighter classes pair up fully with the heaviest; its surplus stays"
                    .to_string(),
                format!("constant vote for the dominant class ({})", heaviest + 1),
            )
        }
    } else if num_close == 1 {
        let (pair, lone) = if close[0] {
            ((0usize, 1usize), 2usize)
        } else if close[1] {
            ((0, 2), 1)
        } else {
            ((1, 2), 0)
        };
        let pair_max = weights[pair.0].max(weights[pair.1]);
        (
            CaseId::IsolatedPair,
            pair_max + weights[lone],
            format!(
                "classes {} and {} meet between their points; class {} is untouched",
                pair.0 + 1,
                pair.1 + 1,
                lone + 1
            ),
            format!(
                "the heavier of the close pair claims both balls; class {} keeps its own",
                lone + 1
            ),
        )
    } else {
        return Err(Error::NoMatchingCase(format!(
            "{num_close} pairs within twice the budget with empty triple intersection; no closed form is catalogued"
        )));
    };
    Ok(ToyCase {
        id,
        points: points.to_vec(),
        epsilon,
        weights: weights.to_vec(),
        expected_power,
        attack_description: attack,
        classifier_description: classifier,
    })
}

/// The labeled measure of a toy case (class `i+1` at `points[i]`).
pub fn toy_measure(case: &ToyCase) -> Result<LabeledMeasure> {
    LabeledMeasure::new(
        case.points
            .iter()
            .zip(&case.weights)
            .enumerate()
            .map(|(i, (coords, &weight))| crate::measure::LabeledPoint {
                coords: coords.clone(),
                label: i + 1,
                weight,
            })
            .collect(),
        3,
    )
}

/// The standard catalogue of one concrete instance per case, exportable as
/// test fixtures.
pub fn standard_cases() -> Vec<ToyCase> {
    let e = 1.0;
    let sqrt3 = 3.0f64.sqrt();
    vec![
        // pairwise distance 4 = 4ε
        classify_toy(
            &[vec![0.0, 0.0], vec![4.0, 0.0], vec![2.0, 3.5]],
            &[1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0],
            e,
        )
        .unwrap(),
        // all three within a ball of radius 1/2 around the origin
        classify_toy(
            &[vec![0.3, 0.0], vec![-0.3, 0.1], vec![0.0, -0.3]],
            &[0.5, 0.3, 0.2],
            e,
        )
        .unwrap(),
        // one close pair, one far point
        classify_toy(
            &[vec![0.0, 0.0], vec![1.0, 0.0], vec![9.0, 0.0]],
            &[0.5, 0.3, 0.2],
            e,
        )
        .unwrap(),
        // near-equilateral, side 1.9ε: pairwise close, triple empty
        classify_toy(
            &[vec![0.0, 0.0], vec![1.9, 0.0], vec![0.95, 0.95 * sqrt3]],
            &[0.4, 0.35, 0.25],
            e,
        )
        .unwrap(),
        classify_toy(
            &[vec![0.0, 0.0], vec![1.9, 0.0], vec![0.95, 0.95 * sqrt3]],
            &[0.6, 0.25, 0.15],
            e,
        )
        .unwrap(),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::LabeledPoint;

    fn pt(coords: &[f64], label: usize, weight: f64) -> LabeledPoint {
        LabeledPoint {
            coords: coords.to_vec(),
            label,
            weight,
        }
    }

    #[test]
    fn binary_pairing_values() {
        let close =
            LabeledMeasure::new(vec![pt(&[0.0, 0.0], 1, 0.5), pt(&[1.0, 0.0], 2, 0.5)], 2).unwrap();
        assert!((binary_value(&close, 1.0).unwrap() - 0.5).abs() < 1e-10);
        let far =
            LabeledMeasure::new(vec![pt(&[0.0, 0.0], 1, 0.5), pt(&[5.0, 0.0], 2, 0.5)], 2).unwrap();
        assert!((binary_value(&far, 1.0).unwrap() - 1.0).abs() < 1e-10);
        let single = LabeledMeasure::new(vec![pt(&[0.0, 0.0], 1, 1.0)], 2).unwrap();
        assert!((binary_value(&single, 1.0).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn binary_requires_two_classes() {
        let m = LabeledMeasure::new(vec![pt(&[0.0], 1, 1.0)], 3).unwrap();
        assert!(matches!(
            binary_value(&m, 1.0),
            Err(Error::WrongClassCount { expected: 2, .. })
        ));
    }

    #[test]
    fn case_predicates() {
        let e = 1.0;
        // side-4ε triangle
        let c = classify_toy(
            &[vec![0.0, 0.0], vec![4.0, 0.0], vec![2.0, 3.5]],
            &[1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0],
            e,
        )
        .unwrap();
        assert_eq!(c.id, CaseId::Separated);
        assert_eq!(c.expected_power, 1.0);
        // common ball
        let c = classify_toy(
            &[vec![0.3, 0.0], vec![-0.3, 0.1], vec![0.0, -0.3]],
            &[0.5, 0.3, 0.2],
            e,
        )
        .unwrap();
        assert_eq!(c.id, CaseId::SharedIntersection);
        assert!((c.expected_power - 0.5).abs() < 1e-12);
        // isolated pair
        let c = classify_toy(
            &[vec![0.0, 0.0], vec![1.0, 0.0], vec![9.0, 0.0]],
            &[0.5, 0.3, 0.2],
            e,
        )
        .unwrap();
        assert_eq!(c.id, CaseId::IsolatedPair);
        assert!((c.expected_power - 0.7).abs() < 1e-12);
        // cyclic overlap, balanced weights
        let sqrt3 = 3.0f64.sqrt();
        let tri = [vec![0.0, 0.0], vec![1.9, 0.0], vec![0.95, 0.95 * sqrt3]];
        let c = classify_toy(&tri, &[0.4, 0.35, 0.25], e).unwrap();
        assert_eq!(c.id, CaseId::CyclicOverlapBalanced);
        assert_eq!(c.expected_power, 0.5);
        // same geometry, dominant heaviest class
        let c = classify_toy(&tri, &[0.6, 0.25, 0.15], e).unwrap();
        assert_eq!(c.id, CaseId::CyclicOverlapDominant);
        assert!((c.expected_power - 0.6).abs() < 1e-12);
    }

    #[test]
    fn weight_order_does_not_matter() {
        // the close pair is (2,3); heavier of the pair plus the lone class
        let c = classify_toy(
            &[vec![9.0, 0.0], vec![0.0, 0.0], vec![1.0, 0.0]],
            &[0.2, 0.3, 0.5],
            1.0,
        )
        .unwrap();
        assert_eq!(c.id, CaseId::IsolatedPair);
        assert!((c.expected_power - (0.5 + 0.2)).abs() < 1e-12);
    }

    #[test]
    fn boundary_geometries_are_flagged() {
        // pair at exactly 2ε
        let r = classify_toy(
            &[vec![0.0, 0.0], vec![2.0, 0.0], vec![9.0, 0.0]],
            &[0.5, 0.3, 0.2],
            1.0,
        );
        assert!(matches!(r, Err(Error::BoundaryGeometry(_))));
        // no catalogued case: two close pairs, one far pair
        let r = classify_toy(
            &[vec![0.0, 0.0], vec![1.5, 0.0], vec![-1.5, 0.0]],
            &[0.4, 0.3, 0.3],
            1.0,
        );
        assert!(matches!(r, Err(Error::NoMatchingCase(_))));
    }

    #[test]
    fn seam_consistency_between_overlap_cases() {
        // at w_max = 1/2 the dominant formula also gives 1/2
        let sqrt3 = 3.0f64.sqrt();
        let tri = [vec![0.0, 0.0], vec![1.9, 0.0], vec![0.95, 0.95 * sqrt3]];
        let c = classify_toy(&tri, &[0.5, 0.3, 0.2], 1.0).unwrap();
        assert!((c.expected_power - 0.5).abs() < 1e-12);
    }

    #[test]
    fn catalogue_round_trips_as_fixtures() {
        let cases = standard_cases();
        assert_eq!(cases.len(), 5);
        let json = serde_json::to_string(&cases).unwrap();
        let back: Vec<ToyCase> = serde_json::from_str(&json).unwrap();
        assert_eq!(back.len(), 5);
        for (a, b) in cases.iter().zip(&back) {
            assert_eq!(a.id, b.id);
            assert_eq!(a.expected_power, b.expected_power);
        }
    }
}
