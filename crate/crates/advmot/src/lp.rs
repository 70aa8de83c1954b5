//! Dense exact linear programming: `min c·x  s.t.  A x = b, x >= 0`.
//!
//! Revised simplex with Bland's anti-cycling rule in both the entering and
//! leaving choices, two phases with artificial variables, an explicitly
//! maintained basis inverse with periodic refactorization, and a certified
//! solution: primal feasibility, complementary slackness and the duality gap
//! are measured after the solve and checked against [`LpTolerances`].
//!
//! Problems in this crate are tiny (at most a few thousand columns), so the
//! priorities are exactness and determinism, not scale. Columns are sorted
//! by caller-supplied tags before solving, which decouples the pivot path
//! from caller enumeration order.

// dense kernels below index rows and columns directly
#![allow(clippy::needless_range_loop)]

use crate::{Error, Result};

/// Opaque, orderable column tag used for canonical pre-sorting and solution
/// read-back.
pub type ColumnTag = Vec<u32>;

#[derive(Debug, Clone)]
struct Column {
    tag: ColumnTag,
    cost: f64,
    /// sparse (row, coefficient) entries
    entries: Vec<(usize, f64)>,
}

/// A dense-equality-form linear program.
#[derive(Debug, Clone)]
pub struct LinearProgram {
    num_rows: usize,
    rhs: Vec<f64>,
    cols: Vec<Column>,
}

/// Solver status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Residuals certifying an optimal solve.
#[derive(Debug, Clone, Copy, Default)]
pub struct LpResiduals {
    /// `max |A x - b|`
    pub primal_feasibility: f64,
    /// `max_j |x_j * (c_j - y·A_j)|`
    pub complementary_slackness: f64,
    /// `|c·x - b·y|`
    pub duality_gap: f64,
    /// most negative reduced cost at termination (dual feasibility)
    pub dual_feasibility: f64,
}

/// Solution record; `primal` follows the caller's column order.
#[derive(Debug, Clone)]
pub struct LpSolution {
    pub status: LpStatus,
    pub primal: Vec<f64>,
    /// one dual multiplier per row (meaningful when optimal)
    pub duals: Vec<f64>,
    pub objective: f64,
    pub residuals: LpResiduals,
}

/// All numeric tolerances used by the solver, centralized.
#[derive(Debug, Clone, Copy)]
pub struct LpTolerances {
    /// entering test: reduced cost must be below `-reduced_cost`
    pub reduced_cost: f64,
    /// pivot element magnitude floor
    pub pivot: f64,
    /// phase-1 objective threshold for declaring infeasibility (relative)
    pub phase1: f64,
    /// certified primal feasibility, relative to `1 + max|b|`
    pub feasibility: f64,
    /// certified complementary slackness
    pub slackness: f64,
    /// certified duality gap, relative to `1 + |objective|`
    pub gap: f64,
    /// basis refactorization interval (pivots)
    pub refactor_every: usize,
}

impl Default for LpTolerances {
    fn default() -> Self {
        Self {
            reduced_cost: 1e-9,
            pivot: 1e-10,
            phase1: 1e-9,
            feasibility: 1e-9,
            slackness: 1e-8,
            gap: 1e-8,
            refactor_every: 64,
        }
    }
}

impl LinearProgram {
    pub fn new(num_rows: usize, rhs: Vec<f64>) -> Self {
        assert_eq!(num_rows, rhs.len());
        Self {
            num_rows,
            rhs,
            cols: Vec::new(),
        }
    }

    /// Adds a column with sparse row entries. Non-finite data is rejected at
    /// solve time (infinite-cost columns must be omitted by the caller).
    pub fn add_column(&mut self, tag: ColumnTag, cost: f64, entries: &[(usize, f64)]) {
        debug_assert!(entries.iter().all(|&(r, _)| r < self.num_rows));
        self.cols.push(Column {
            tag,
            cost,
            entries: entries.to_vec(),
        });
    }

    pub fn num_rows(&self) -> usize {
        self.num_rows
    }

    pub fn num_cols(&self) -> usize {
        self.cols.len()
    }

    pub fn solve(&self, tols: &LpTolerances) -> Result<LpSolution> {
        for c in &self.cols {
            if !c.cost.is_finite() || c.entries.iter().any(|&(_, v)| !v.is_finite()) {
                return Err(Error::LpFailure("non-finite column data".into()));
            }
        }
        if self.rhs.iter().any(|v| !v.is_finite()) {
            return Err(Error::LpFailure("non-finite rhs".into()));
        }
        // canonical order: sort columns by tag
        let mut order: Vec<usize> = (0..self.cols.len()).collect();
        order.sort_by(|&a, &b| self.cols[a].tag.cmp(&self.cols[b].tag));
        let mut sim = Simplex::new(self, &order, tols);
        let status = sim.run()?;
        let mut primal = vec![0.0; self.cols.len()];
        let mut objective = 0.0;
        if status == LpStatus::Optimal {
            for (sorted_idx, &orig) in order.iter().enumerate() {
                let x = sim.primal_value(sorted_idx);
                primal[orig] = x;
                // canonical-order summation keeps the objective bit-identical
                // under caller column permutations
                objective += self.cols[orig].cost * x;
            }
        }
        let duals = sim.duals();
        let mut solution = LpSolution {
            status,
            primal,
            duals,
            objective,
            residuals: LpResiduals::default(),
        };
        if status == LpStatus::Optimal {
            self.certify(&mut solution, tols)?;
        }
        Ok(solution)
    }

    fn certify(&self, sol: &mut LpSolution, tols: &LpTolerances) -> Result<()> {
        let mut ax = vec![0.0; self.num_rows];
        for (col, &x) in self.cols.iter().zip(&sol.primal) {
            if x != 0.0 {
                for &(r, v) in &col.entries {
                    ax[r] += v * x;
                }
            }
        }
        let feas = ax
            .iter()
            .zip(&self.rhs)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let mut slack = 0.0f64;
        let mut dual_feas = 0.0f64;
        for (col, &x) in self.cols.iter().zip(&sol.primal) {
            let ya: f64 = col.entries.iter().map(|&(r, v)| sol.duals[r] * v).sum();
            let rc = col.cost - ya;
            slack = slack.max((x * rc).abs());
            dual_feas = dual_feas.min(rc);
        }
        let by: f64 = self.rhs.iter().zip(&sol.duals).map(|(b, y)| b * y).sum();
        let gap = (sol.objective - by).abs();
        sol.residuals = LpResiduals {
            primal_feasibility: feas,
            complementary_slackness: slack,
            duality_gap: gap,
            dual_feasibility: dual_feas,
        };
        let bmax = self.rhs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if feas > tols.feasibility * (1.0 + bmax)
            || slack > tols.slackness * (1.0 + sol.objective.abs())
            || gap > tols.gap * (1.0 + sol.objective.abs())
        {
            return Err(Error::LpFailure(format!(
                "certification failed: feas {feas:.3e}, slack {slack:.3e}, gap {gap:.3e}"
            )));
        }
        Ok(())
    }
}

/// Solves with default tolerances.
pub fn solve_lp(lp: &LinearProgram) -> Result<LpSolution> {
    lp.solve(&LpTolerances::default())
}

struct Simplex<'a> {
    m: usize,
    /// columns in canonical order; artificial j maps to index n + row
    n: usize,
    cols: Vec<&'a Column>,
    costs: Vec<f64>,
    /// rhs with rows flipped so b >= 0; `row_sign[r]` remembers the flip
    b: Vec<f64>,
    row_sign: Vec<f64>,
    basis: Vec<usize>,
    in_basis: Vec<bool>,
    binv: Vec<f64>,
    xb: Vec<f64>,
    redundant_row: Vec<bool>,
    y: Vec<f64>,
    tols: LpTolerances,
    pivots_since_refactor: usize,
}

impl<'a> Simplex<'a> {
    fn new(lp: &'a LinearProgram, order: &[usize], tols: &LpTolerances) -> Self {
        let m = lp.num_rows;
        let n = order.len();
        let cols: Vec<&Column> = order.iter().map(|&i| &lp.cols[i]).collect();
        let mut b = lp.rhs.clone();
        let mut row_sign = vec![1.0; m];
        for r in 0..m {
            if b[r] < 0.0 {
                b[r] = -b[r];
                row_sign[r] = -1.0;
            }
        }
        let mut binv = vec![0.0; m * m];
        for r in 0..m {
            binv[r * m + r] = 1.0;
        }
        Self {
            m,
            n,
            costs: cols.iter().map(|c| c.cost).collect(),
            cols,
            xb: b.clone(),
            b,
            row_sign,
            basis: (0..m).map(|r| n + r).collect(),
            in_basis: vec![false; n],
            binv,
            redundant_row: vec![false; m],
            y: vec![0.0; m],
            tols: *tols,
            pivots_since_refactor: 0,
        }
    }

    /// column j of A in the sign-flipped row space, densified
    fn col_dense(&self, j: usize, out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        if j < self.n {
            for &(r, v) in &self.cols[j].entries {
                out[r] = v * self.row_sign[r];
            }
        } else {
            out[j - self.n] = 1.0;
        }
    }

    fn cost_of(&self, j: usize, phase1: bool) -> f64 {
        if phase1 {
            if j >= self.n {
                1.0
            } else {
                0.0
            }
        } else if j >= self.n {
            0.0
        } else {
            self.costs[j]
        }
    }

    fn compute_y(&mut self, phase1: bool) {
        // y = c_B^T B^{-1}
        for c in 0..self.m {
            let mut s = 0.0;
            for r in 0..self.m {
                let cb = self.cost_of(self.basis[r], phase1);
                if cb != 0.0 {
                    s += cb * self.binv[r * self.m + c];
                }
            }
            self.y[c] = s;
        }
    }

    fn reduced_cost(&self, j: usize, phase1: bool) -> f64 {
        let mut ya = 0.0;
        if j < self.n {
            for &(r, v) in &self.cols[j].entries {
                ya += self.y[r] * v * self.row_sign[r];
            }
        } else {
            ya = self.y[j - self.n];
        }
        self.cost_of(j, phase1) - ya
    }

    fn refactor(&mut self) -> Result<()> {
        // rebuild B^{-1} by Gauss-Jordan with partial pivoting
        let m = self.m;
        let mut mat = vec![0.0; m * 2 * m];
        let mut col = vec![0.0; m];
        for (bc, &j) in self.basis.iter().enumerate() {
            self.col_dense(j, &mut col);
            for r in 0..m {
                mat[r * 2 * m + bc] = col[r];
            }
        }
        for r in 0..m {
            mat[r * 2 * m + m + r] = 1.0;
        }
        for c in 0..m {
            let pivot = (c..m)
                .max_by(|&i, &j| {
                    mat[i * 2 * m + c]
                        .abs()
                        .total_cmp(&mat[j * 2 * m + c].abs())
                })
                .unwrap();
            if mat[pivot * 2 * m + c].abs() < 1e-13 {
                return Err(Error::LpFailure(
                    "singular basis during refactorization".into(),
                ));
            }
            if pivot != c {
                for k in 0..2 * m {
                    mat.swap(c * 2 * m + k, pivot * 2 * m + k);
                }
            }
            let p = mat[c * 2 * m + c];
            for k in 0..2 * m {
                mat[c * 2 * m + k] /= p;
            }
            for r in 0..m {
                if r != c {
                    let f = mat[r * 2 * m + c];
                    if f != 0.0 {
                        for k in 0..2 * m {
                            mat[r * 2 * m + k] -= f * mat[c * 2 * m + k];
                        }
                    }
                }
            }
        }
        for r in 0..m {
            for c in 0..m {
                self.binv[r * m + c] = mat[r * 2 * m + m + c];
            }
        }
        // xb = B^{-1} b
        for r in 0..m {
            let mut s = 0.0;
            for c in 0..m {
                s += self.binv[r * m + c] * self.b[c];
            }
            self.xb[r] = s.max(0.0);
        }
        self.pivots_since_refactor = 0;
        Ok(())
    }

    fn pivot(&mut self, entering: usize, leave_row: usize, dir: &[f64]) {
        let m = self.m;
        let theta = self.xb[leave_row] / dir[leave_row];
        for r in 0..m {
            if r != leave_row {
                self.xb[r] -= theta * dir[r];
                if self.xb[r] < 0.0 {
                    self.xb[r] = 0.0;
                }
            }
        }
        self.xb[leave_row] = theta;
        // eta update of B^{-1}
        let piv = dir[leave_row];
        for c in 0..m {
            self.binv[leave_row * m + c] /= piv;
        }
        for r in 0..m {
            if r != leave_row {
                let f = dir[r];
                if f != 0.0 {
                    for c in 0..m {
                        self.binv[r * m + c] -= f * self.binv[leave_row * m + c];
                    }
                }
            }
        }
        let old = self.basis[leave_row];
        if old < self.n {
            self.in_basis[old] = false;
        }
        self.basis[leave_row] = entering;
        if entering < self.n {
            self.in_basis[entering] = true;
        }
        self.pivots_since_refactor += 1;
    }

    /// one simplex phase; returns true if optimal, false if unbounded.
    /// Artificial variables never enter (once out, they stay out), which
    /// keeps Bland's termination argument intact on the remaining columns.
    fn phase(&mut self, phase1: bool) -> Result<bool> {
        let m = self.m;
        let mut dir = vec![0.0; m];
        let mut col = vec![0.0; m];
        // hard safety stop; Bland's rule precludes cycling
        let max_pivots = 20_000 + 200 * (self.n + m);
        for _ in 0..max_pivots {
            if self.pivots_since_refactor >= self.tols.refactor_every {
                self.refactor()?;
            }
            self.compute_y(phase1);
            // Bland entering: smallest index with negative reduced cost
            let mut entering = None;
            for j in 0..self.n {
                if self.in_basis[j] {
                    continue;
                }
                if self.reduced_cost(j, phase1) < -self.tols.reduced_cost {
                    entering = Some(j);
                    break;
                }
            }
            let entering = match entering {
                None => return Ok(true),
                Some(j) => j,
            };
            // direction d = B^{-1} A_j
            self.col_dense(entering, &mut col);
            for r in 0..m {
                let mut s = 0.0;
                for c in 0..m {
                    s += self.binv[r * m + c] * col[c];
                }
                dir[r] = s;
            }
            // ratio test with Bland tie-breaking on the basic variable index
            let mut best: Option<(f64, usize, usize)> = None; // (ratio, basis var, row)
            for r in 0..m {
                if dir[r] > self.tols.pivot {
                    let ratio = self.xb[r] / dir[r];
                    match best {
                        None => best = Some((ratio, self.basis[r], r)),
                        Some((br, bv, _)) => {
                            if ratio < br - 1e-12 || (ratio < br + 1e-12 && self.basis[r] < bv) {
                                best = Some((ratio.min(br), self.basis[r], r));
                            }
                        }
                    }
                }
            }
            let (_, _, leave_row) = match best {
                None => return Ok(false), // unbounded direction
                Some(t) => t,
            };
            self.pivot(entering, leave_row, &dir);
        }
        Err(Error::LpFailure("pivot limit exceeded".into()))
    }

    fn run(&mut self) -> Result<LpStatus> {
        // Phase 1: minimize the sum of artificials.
        let optimal = self.phase(true)?;
        if !optimal {
            return Err(Error::LpFailure("phase 1 unbounded".into()));
        }
        let bscale = 1.0 + self.b.iter().fold(0.0f64, |a, &v| a.max(v));
        let phase1_obj: f64 = (0..self.m)
            .filter(|&r| self.basis[r] >= self.n)
            .map(|r| self.xb[r])
            .sum();
        if phase1_obj > self.tols.phase1 * bscale {
            return Ok(LpStatus::Infeasible);
        }
        // Drive artificials out of the basis where a real pivot exists;
        // rows without one are redundant and keep their artificial at zero.
        let m = self.m;
        let mut col = vec![0.0; m];
        for r in 0..m {
            if self.basis[r] < self.n {
                continue;
            }
            let mut pivot_col = None;
            for j in 0..self.n {
                if self.in_basis[j] {
                    continue;
                }
                self.col_dense(j, &mut col);
                let mut d = 0.0;
                for c in 0..m {
                    d += self.binv[r * m + c] * col[c];
                }
                if d.abs() > 1e-8 {
                    pivot_col = Some((j, d));
                    break;
                }
            }
            match pivot_col {
                Some((j, _)) => {
                    self.col_dense(j, &mut col);
                    let mut dir = vec![0.0; m];
                    for rr in 0..m {
                        let mut s = 0.0;
                        for c in 0..m {
                            s += self.binv[rr * m + c] * col[c];
                        }
                        dir[rr] = s;
                    }
                    // degenerate pivot: xb[r] is ~0, so any nonzero pivot works
                    self.pivot(j, r, &dir);
                }
                None => self.redundant_row[r] = true,
            }
        }
        // Phase 2 on the real objective; artificials may not enter.
        let optimal = self.phase(false)?;
        if !optimal {
            return Ok(LpStatus::Unbounded);
        }
        self.refactor()?;
        self.compute_y(false);
        Ok(LpStatus::Optimal)
    }

    fn primal_value(&self, sorted_idx: usize) -> f64 {
        self.basis
            .iter()
            .position(|&bj| bj == sorted_idx)
            .map_or(0.0, |r| self.xb[r])
    }

    fn duals(&self) -> Vec<f64> {
        // un-flip the row signs
        self.y
            .iter()
            .zip(&self.row_sign)
            .map(|(y, s)| y * s)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn trivial_equality() {
        // min x  s.t. x = 1
        let mut lp = LinearProgram::new(1, vec![1.0]);
        lp.add_column(vec![0], 1.0, &[(0, 1.0)]);
        let sol = solve_lp(&lp).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.primal[0] - 1.0).abs() < 1e-12);
        assert!((sol.objective - 1.0).abs() < 1e-12);
        assert!((sol.duals[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unbounded_detected() {
        // min -x  s.t. 0·x = 0
        let mut lp = LinearProgram::new(1, vec![0.0]);
        lp.add_column(vec![0], -1.0, &[]);
        let sol = solve_lp(&lp).unwrap();
        assert_eq!(sol.status, LpStatus::Unbounded);
    }

    #[test]
    fn infeasible_detected() {
        // min x+y  s.t. x+y=1, x-y=3, x,y >= 0  (forces y = -1)
        let mut lp = LinearProgram::new(2, vec![1.0, 3.0]);
        lp.add_column(vec![0], 1.0, &[(0, 1.0), (1, 1.0)]);
        lp.add_column(vec![1], 1.0, &[(0, 1.0), (1, -1.0)]);
        let sol = solve_lp(&lp).unwrap();
        assert_eq!(sol.status, LpStatus::Infeasible);
    }

    #[test]
    fn transport_problem_with_duals() {
        // 2x2 transport: supplies (0.6, 0.4), demands (0.5, 0.5),
        // costs [[0,1],[1,0]] -> optimum ships 0.1 across, value 0.1
        let mut lp = LinearProgram::new(4, vec![0.6, 0.4, 0.5, 0.5]);
        let costs = [[0.0, 1.0], [1.0, 0.0]];
        for i in 0..2 {
            for j in 0..2 {
                lp.add_column(
                    vec![i as u32, j as u32],
                    costs[i][j],
                    &[(i, 1.0), (2 + j, 1.0)],
                );
            }
        }
        let sol = solve_lp(&lp).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.objective - 0.1).abs() < 1e-10);
        // strong duality certified
        assert!(sol.residuals.duality_gap <= 1e-8 * (1.0 + sol.objective.abs()));
    }

    #[test]
    fn redundant_rows_are_handled() {
        // duplicated constraint row: x + y = 1 (twice), min x
        let mut lp = LinearProgram::new(2, vec![1.0, 1.0]);
        lp.add_column(vec![0], 1.0, &[(0, 1.0), (1, 1.0)]);
        lp.add_column(vec![1], 0.0, &[(0, 1.0), (1, 1.0)]);
        let sol = solve_lp(&lp).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!(sol.objective.abs() < 1e-12);
        assert!((sol.primal[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn negative_rhs_rows_are_flipped() {
        // min x s.t. -x = -2  ->  x = 2
        let mut lp = LinearProgram::new(1, vec![-2.0]);
        lp.add_column(vec![0], 1.0, &[(0, -1.0)]);
        let sol = solve_lp(&lp).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.primal[0] - 2.0).abs() < 1e-12);
        // dual of the original row: c - y*(-1) >= 0 at optimum basic col => y = -1
        assert!((sol.duals[0] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_problem_terminates() {
        // classic degeneracy: several identical ratios
        let mut lp = LinearProgram::new(3, vec![1.0, 1.0, 1.0]);
        for j in 0..6u32 {
            let c = [0.1, -0.5, 0.3, -0.2, 0.07, 0.4][j as usize];
            let rows: Vec<(usize, f64)> = (0..3)
                .map(|r| (r, ((j as usize + r) % 3) as f64 + 0.5))
                .collect();
            lp.add_column(vec![j], c, &rows);
        }
        let sol = solve_lp(&lp).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
    }

    proptest! {
        // Column permutation leaves the objective unchanged and permutes the
        // primal solution accordingly (canonical pre-sort by tag).
        #[test]
        fn column_permutation_invariance(seed in 0u64..500) {
            let mut s = seed.wrapping_mul(0x9e3779b97f4a7c15).wrapping_add(1);
            let mut next = move || {
                s ^= s << 13;
                s ^= s >> 7;
                s ^= s << 17;
                (s >> 11) as f64 / (1u64 << 53) as f64
            };
            let m = 3;
            let n = 7;
            let mut cols = Vec::new();
            for j in 0..n {
                let cost = next() * 2.0 - 0.5;
                let entries: Vec<(usize, f64)> =
                    (0..m).map(|r| (r, next() + 0.1)).collect();
                cols.push((vec![j as u32], cost, entries));
            }
            let rhs = vec![1.0 + next(), 1.0 + next(), 1.0 + next()];

            let mut lp1 = LinearProgram::new(m, rhs.clone());
            for (t, c, e) in &cols {
                lp1.add_column(t.clone(), *c, e);
            }
            let mut lp2 = LinearProgram::new(m, rhs);
            for (t, c, e) in cols.iter().rev() {
                lp2.add_column(t.clone(), *c, e);
            }
            let s1 = solve_lp(&lp1).unwrap();
            let s2 = solve_lp(&lp2).unwrap();
            prop_assert_eq!(s1.status, s2.status);
            if s1.status == LpStatus::Optimal {
                prop_assert_eq!(s1.objective, s2.objective);
                for j in 0..n {
                    prop_assert_eq!(s1.primal[j], s2.primal[n - 1 - j]);
                }
            }
        }

        // Strong duality holds on random feasible transport problems.
        #[test]
        fn strong_duality_on_random_transports(seed in 0u64..200) {
            let mut s = seed.wrapping_mul(0x2545f4914f6cdd1d).wrapping_add(7);
            let mut next = move || {
                s ^= s << 13;
                s ^= s >> 7;
                s ^= s << 17;
                (s >> 11) as f64 / (1u64 << 53) as f64
            };
            let n = 4;
            let mut supply: Vec<f64> = (0..n).map(|_| next() + 0.05).collect();
            let demand: Vec<f64> = supply.clone();
            supply.rotate_left(1);
            let mut lp = LinearProgram::new(2 * n, [supply, demand].concat());
            for i in 0..n {
                for j in 0..n {
                    lp.add_column(
                        vec![i as u32, j as u32],
                        next() * 3.0,
                        &[(i, 1.0), (n + j, 1.0)],
                    );
                }
            }
            let sol = solve_lp(&lp).unwrap();
            prop_assert_eq!(sol.status, LpStatus::Optimal);
            prop_assert!(sol.residuals.duality_gap <= 1e-8 * (1.0 + sol.objective.abs()));
            prop_assert!(sol.residuals.primal_feasibility <= 1e-9 * 3.0);
            prop_assert!(sol.residuals.complementary_slackness <= 1e-8 * (1.0 + sol.objective.abs()));
        }
    }
}
