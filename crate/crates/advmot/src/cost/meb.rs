//! Minimum enclosing ball (Euclidean Chebyshev center).
//!
//! Inputs here are tiny (one point per class, so at most 16 points), but the
//! ambient dimension may be large for real feature vectors. Strategy:
//!
//! * project the points onto an orthonormal basis of their affine hull
//!   (an isometry, so center and radius are preserved), which caps the
//!   effective dimension at `n - 1`;
//! * in effective dimension <= 3 run Welzl's algorithm (exact, expected
//!   linear time) with a fixed shuffle seed for reproducibility;
//! * otherwise seed an active set with farthest-point subgradient steps and
//!   refine it by exact circumball enumeration until no point lies outside.
//!
//! Radii are resolved to ~1e-9 in all paths.

// dense kernels below index rows and columns directly
#![allow(clippy::needless_range_loop)]

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const RADIUS_TOL: f64 = 1e-9;

/// Smallest ball containing all points: `(center, radius)`.
///
/// Panics on an empty input.
pub fn min_enclosing_ball(points: &[&[f64]]) -> (Vec<f64>, f64) {
    assert!(!points.is_empty());
    let dim = points[0].len();
    if points.len() == 1 {
        return (points[0].to_vec(), 0.0);
    }
    if dim <= 3 {
        return welzl(points);
    }
    // Project to the affine hull spanned by the points.
    let origin = points[0];
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for p in &points[1..] {
        let mut v: Vec<f64> = p.iter().zip(origin).map(|(a, b)| a - b).collect();
        for b in &basis {
            let proj = dot(&v, b);
            for (vi, bi) in v.iter_mut().zip(b) {
                *vi -= proj * bi;
            }
        }
        let norm = dot(&v, &v).sqrt();
        if norm > 1e-12 {
            for vi in &mut v {
                *vi /= norm;
            }
            basis.push(v);
        }
    }
    let eff_dim = basis.len().max(1);
    let projected: Vec<Vec<f64>> = points
        .iter()
        .map(|p| {
            let diff: Vec<f64> = p.iter().zip(origin).map(|(a, b)| a - b).collect();
            basis.iter().map(|b| dot(&diff, b)).collect()
        })
        .collect();
    let refs: Vec<&[f64]> = projected.iter().map(|p| p.as_slice()).collect();
    let (proj_center, radius) = if eff_dim <= 3 {
        welzl(&refs)
    } else {
        active_set_meb(&refs)
    };
    // Map the center back to the ambient space.
    let mut center = origin.to_vec();
    for (coef, b) in proj_center.iter().zip(&basis) {
        for (c, bi) in center.iter_mut().zip(b) {
            *c += coef * bi;
        }
    }
    (center, radius)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Welzl's algorithm with move-to-front, dimension <= 3.
fn welzl(points: &[&[f64]]) -> (Vec<f64>, f64) {
    let mut pts: Vec<&[f64]> = points.to_vec();
    // fixed seed: identical inputs give identical pivot paths
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eb2_2d01);
    pts.shuffle(&mut rng);
    let mut boundary: Vec<&[f64]> = Vec::new();
    welzl_rec(&mut pts, points.len(), &mut boundary)
}

fn welzl_rec<'a>(
    pts: &mut Vec<&'a [f64]>,
    n: usize,
    boundary: &mut Vec<&'a [f64]>,
) -> (Vec<f64>, f64) {
    let dim = boundary
        .first()
        .or_else(|| pts.first())
        .map_or(0, |p| p.len());
    if n == 0 || boundary.len() == dim + 1 {
        return ball_from_boundary(boundary, dim);
    }
    let p = pts[n - 1];
    let (center, radius) = welzl_rec(pts, n - 1, boundary);
    if dist(&center, p) <= radius * (1.0 + RADIUS_TOL) + 1e-14 {
        return (center, radius);
    }
    boundary.push(p);
    let result = welzl_rec(pts, n - 1, boundary);
    boundary.pop();
    // move-to-front keeps expected time linear
    pts[..n].rotate_right(1);
    result
}

/// Smallest ball with the given points on its boundary (affinely independent,
/// at most dim+1 of them).
fn ball_from_boundary(boundary: &[&[f64]], dim: usize) -> (Vec<f64>, f64) {
    match boundary.len() {
        0 => (vec![0.0; dim], -1.0),
        1 => (boundary[0].to_vec(), 0.0),
        _ => circumball(boundary).unwrap_or((vec![0.0; dim], -1.0)),
    }
}

/// Center equidistant from all points, restricted to their affine hull.
/// Returns `None` when the points are affinely dependent.
fn circumball(points: &[&[f64]]) -> Option<(Vec<f64>, f64)> {
    let m = points.len() - 1;
    let p0 = points[0];
    // Solve  2 (p_i - p0) · u = |p_i - p0|^2  for u in span{p_i - p0},
    // u = Σ λ_j (p_j - p0): an m×m symmetric system in λ.
    let diffs: Vec<Vec<f64>> = points[1..]
        .iter()
        .map(|p| p.iter().zip(p0).map(|(a, b)| a - b).collect())
        .collect();
    let mut a = vec![vec![0.0; m]; m];
    let mut rhs = vec![0.0; m];
    for i in 0..m {
        for j in 0..m {
            a[i][j] = 2.0 * dot(&diffs[i], &diffs[j]);
        }
        rhs[i] = dot(&diffs[i], &diffs[i]);
    }
    let lambda = solve_dense(&mut a, &mut rhs)?;
    let mut center = p0.to_vec();
    for (l, d) in lambda.iter().zip(&diffs) {
        for (c, di) in center.iter_mut().zip(d) {
            *c += l * di;
        }
    }
    let radius = dist(&center, p0);
    Some((center, radius))
}

/// Gaussian elimination with partial pivoting; `None` if singular.
fn solve_dense(a: &mut [Vec<f64>], b: &mut [f64]) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in (col + 1)..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for col in (0..n).rev() {
        let mut s = b[col];
        for k in (col + 1)..n {
            s -= a[col][k] * x[k];
        }
        x[col] = s / a[col][col];
    }
    Some(x)
}

/// Exact MEB for effective dimension > 3: farthest-point descent seeds an
/// active set, which is refined by circumball enumeration over its subsets
/// until every point is enclosed.
fn active_set_meb(points: &[&[f64]]) -> (Vec<f64>, f64) {
    let dim = points[0].len();
    // subgradient warm start (max-distance descent)
    let mut center: Vec<f64> = {
        let mut c = vec![0.0; dim];
        for p in points {
            for (ci, pi) in c.iter_mut().zip(*p) {
                *ci += pi;
            }
        }
        for ci in &mut c {
            *ci /= points.len() as f64;
        }
        c
    };
    for t in 1..=200usize {
        let far = points
            .iter()
            .max_by(|a, b| dist(&center, a).total_cmp(&dist(&center, b)))
            .unwrap();
        let step = 1.0 / (t as f64 + 1.0);
        for (ci, fi) in center.iter_mut().zip(*far) {
            *ci += step * (*fi - *ci);
        }
    }
    let mut radius = points.iter().map(|p| dist(&center, p)).fold(0.0, f64::max);
    let mut active: Vec<usize> = (0..points.len())
        .filter(|&i| dist(&center, points[i]) >= radius * (1.0 - 1e-6))
        .collect();
    for _ in 0..200 {
        let (c, r) = exact_meb_of(points, &active);
        center = c;
        radius = r;
        let mut worst = None;
        let mut worst_d = radius * (1.0 + RADIUS_TOL) + 1e-12;
        for (i, p) in points.iter().enumerate() {
            let d = dist(&center, p);
            if d > worst_d {
                worst_d = d;
                worst = Some(i);
            }
        }
        match worst {
            None => return (center, radius),
            Some(i) => {
                if !active.contains(&i) {
                    active.push(i);
                    active.sort_unstable();
                } else {
                    break;
                }
            }
        }
    }
    (center, radius)
}

/// Exact MEB of a small index set by enumeration over boundary subsets.
fn exact_meb_of(points: &[&[f64]], idx: &[usize]) -> (Vec<f64>, f64) {
    let subset: Vec<&[f64]> = idx.iter().map(|&i| points[i]).collect();
    let dim = subset[0].len();
    let max_boundary = (dim + 1).min(subset.len());
    let mut best: Option<(Vec<f64>, f64)> = None;
    // all boundary subsets of size 1..=max_boundary
    let n = subset.len();
    for mask in 1u32..(1 << n) {
        if mask.count_ones() as usize > max_boundary {
            continue;
        }
        let boundary: Vec<&[f64]> = (0..n)
            .filter(|b| mask & (1 << b) != 0)
            .map(|b| subset[b])
            .collect();
        let cand = if boundary.len() == 1 {
            Some((boundary[0].to_vec(), 0.0))
        } else {
            circumball(&boundary)
        };
        if let Some((c, r)) = cand {
            let encloses = subset
                .iter()
                .all(|p| dist(&c, p) <= r * (1.0 + RADIUS_TOL) + 1e-12);
            if encloses && best.as_ref().is_none_or(|(_, br)| r < *br) {
                best = Some((c, r));
            }
        }
    }
    best.expect("enclosing ball of a finite point set exists")
}
