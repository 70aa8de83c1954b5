//! Geometric median by Weiszfeld iteration.

const MOVE_TOL: f64 = 1e-10;
const SINGULARITY_GUARD: f64 = 1e-12;
const MAX_ITER: usize = 10_000;

/// Point minimizing the sum of Euclidean distances to `points`.
///
/// Two points have a segment of minimizers; the midpoint is returned (the
/// minimizer closest to the coordinate mean). When an iterate lands on a
/// data point, the data point is kept if it satisfies the subgradient
/// optimality condition, otherwise the iterate is nudged off by a tiny
/// perturbation and iteration continues.
pub fn geometric_median(points: &[&[f64]]) -> Vec<f64> {
    let dim = points[0].len();
    if points.len() == 1 {
        return points[0].to_vec();
    }
    if points.len() == 2 {
        return points[0]
            .iter()
            .zip(points[1])
            .map(|(a, b)| 0.5 * (a + b))
            .collect();
    }
    let mut y: Vec<f64> = {
        let mut m = vec![0.0; dim];
        for p in points {
            for (mi, pi) in m.iter_mut().zip(*p) {
                *mi += pi;
            }
        }
        for mi in &mut m {
            *mi /= points.len() as f64;
        }
        m
    };
    for _ in 0..MAX_ITER {
        if let Some(hit) = points.iter().position(|p| dist(&y, p) < SINGULARITY_GUARD) {
            if at_optimum_on_data_point(points, hit) {
                return points[hit].to_vec();
            }
            // restart just off the data point
            y = points[hit].iter().map(|v| v + SINGULARITY_GUARD).collect();
        }
        let mut num = vec![0.0; dim];
        let mut den = 0.0;
        for p in points {
            let d = dist(&y, p);
            let w = 1.0 / d;
            den += w;
            for (ni, pi) in num.iter_mut().zip(*p) {
                *ni += w * pi;
            }
        }
        let next: Vec<f64> = num.iter().map(|v| v / den).collect();
        let moved = dist(&y, &next);
        y = next;
        if moved < MOVE_TOL {
            break;
        }
    }
    y
}

/// Subgradient condition: a data point is the median iff the norm of the
/// summed unit vectors toward the other points is at most 1.
fn at_optimum_on_data_point(points: &[&[f64]], idx: usize) -> bool {
    let dim = points[0].len();
    let x = points[idx];
    let mut g = vec![0.0; dim];
    for (j, p) in points.iter().enumerate() {
        if j == idx {
            continue;
        }
        let d = dist(x, p);
        if d < SINGULARITY_GUARD {
            continue;
        }
        for (gi, (pi, xi)) in g.iter_mut().zip(p.iter().zip(x)) {
            *gi += (pi - xi) / d;
        }
    }
    g.iter().map(|v| v * v).sum::<f64>().sqrt() <= 1.0 + 1e-9
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}
