//! The ghost-augmented multimarginal optimal transport problem.
//!
//! All `K` marginals share one distribution: half the normalized data
//! measure, half a point mass on an artificial ghost atom. The cost of a
//! tuple is the optimal classification power of the equal-weight empirical
//! measure on its non-ghost entries (a *local* grouping problem), so the
//! tensor is invariant under coordinate permutations and is built once per
//! multiset of atoms.
//!
//! Two solvers share the problem form: an exact dense LP returning a vertex
//! coupling and row duals, and a log-domain cyclic multimarginal Sinkhorn
//! iteration whose reported value upper-bounds the exact optimum (the
//! iterate is rounded onto the coupling polytope before evaluation, so the
//! bound holds by feasibility).

// dense kernels below index rows and columns directly
#![allow(clippy::needless_range_loop)]

use std::collections::HashMap;

use rayon::prelude::*;

use crate::barycenter::{solve_local, LocalSolution, TupleEntry};
use crate::cost::CostSpec;
use crate::lp::{solve_lp, LinearProgram, LpStatus};
use crate::measure::{GhostIndex, LabeledMeasure};
use crate::{Error, Result};

/// Default cap on materialized cost-tensor entries.
pub const DEFAULT_TENSOR_CAP: u128 = 50_000_000;

/// Cap on LP columns for the exact solver (tuples).
pub const DEFAULT_EXACT_COLUMN_CAP: u128 = 250_000;

/// The assembled MOT instance.
#[derive(Debug, Clone)]
pub struct MotProblem {
    pub measure: LabeledMeasure,
    pub spec: CostSpec,
    pub ghost: GhostIndex,
    /// shared marginal over atoms + ghost; sums to one, ghost carries 1/2
    pub nu: Vec<f64>,
    /// number of marginals (= classes)
    pub k: usize,
    /// dense cost tensor, length `(n+1)^k`, row-major with marginal 0 slowest
    pub tensor: Vec<f64>,
}

/// How a solution was produced.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SolveMode {
    Exact,
    Entropic { eta: f64 },
}

/// Coupling storage: exact vertices are sparse, entropic iterates dense.
#[derive(Debug, Clone)]
pub enum Coupling {
    Sparse(Vec<(Vec<u16>, f64)>),
    Dense(Vec<f64>),
}

/// A solved MOT instance.
#[derive(Debug, Clone)]
pub struct MotSolution {
    pub coupling: Coupling,
    /// primal value `<tensor, coupling>`
    pub value: f64,
    /// dual potentials, one vector of length `n+1` per marginal
    pub potentials: Vec<Vec<f64>>,
    pub mode: SolveMode,
    /// max over marginals of the l1 distance to `nu` (for entropic runs,
    /// measured on the raw iterate before rounding)
    pub marginal_residual: f64,
    pub iterations: usize,
    pub converged: bool,
    /// certified primal-dual gap (exact mode only)
    pub duality_gap: Option<f64>,
}

/// Dual potentials projected into the feasible set of the MOT dual.
#[derive(Debug, Clone)]
pub struct ProjectedDuals {
    pub potentials: Vec<Vec<f64>>,
    /// uniform shift subtracted from the first potential
    pub shift: f64,
    /// dual objective after projection
    pub objective: f64,
    /// worst residual `sum_j phi_j - cost` over all tuples after projection
    pub max_violation: f64,
}

impl MotProblem {
    /// Linear index of a tuple (marginal 0 varies slowest).
    pub fn linear_index(&self, tuple: &[u16]) -> usize {
        let base = self.ghost.len();
        tuple.iter().fold(0usize, |acc, &t| acc * base + t as usize)
    }

    /// Decodes a linear index into tuple indices.
    pub fn decode(&self, mut idx: usize) -> Vec<u16> {
        let base = self.ghost.len();
        let mut tuple = vec![0u16; self.k];
        for slot in (0..self.k).rev() {
            tuple[slot] = (idx % base) as u16;
            idx /= base;
        }
        tuple
    }

    pub fn num_tuples(&self) -> usize {
        self.tensor.len()
    }

    /// Tuple cost, `+∞` possible in principle (never for this cost family).
    pub fn cost_of(&self, tuple: &[u16]) -> f64 {
        self.tensor[self.linear_index(tuple)]
    }

    /// Converts an MOT value to the classification power of the measure.
    pub fn power_from_value(&self, v: f64) -> f64 {
        2.0 * self.measure.total_mass() * v
    }
}

/// Builds the ghost-augmented MOT problem: marginal vector and cost tensor.
///
/// Tensor entries are computed once per multiset of non-ghost atoms
/// (permutation invariance) and computed in parallel.
pub fn build_problem(measure: &LabeledMeasure, spec: &CostSpec) -> Result<MotProblem> {
    build_problem_capped(measure, spec, DEFAULT_TENSOR_CAP)
}

/// [`build_problem`] with an explicit tensor cap.
pub fn build_problem_capped(
    measure: &LabeledMeasure,
    spec: &CostSpec,
    tensor_cap: u128,
) -> Result<MotProblem> {
    spec.validate()?;
    let k = measure.num_classes();
    if !(2..=16).contains(&k) {
        return Err(Error::ClassCount(k));
    }
    let n = measure.num_atoms();
    let base = n + 1;
    let entries = (base as u128).checked_pow(k as u32).unwrap_or(u128::MAX);
    if entries > tensor_cap {
        return Err(Error::TensorCapExceeded {
            entries,
            cap: tensor_cap,
        });
    }
    let num_tuples = entries as usize;
    let ghost = GhostIndex::new(n);
    let mass = measure.total_mass();
    let mut nu: Vec<f64> = measure
        .points()
        .iter()
        .map(|p| p.weight / (2.0 * mass))
        .collect();
    nu.push(0.5);

    // unique multisets of non-ghost atom indices, found by walking all tuples
    let mut keys: HashMap<Vec<u16>, f64> = HashMap::new();
    let mut tuple = vec![0u16; k];
    for _ in 0..num_tuples {
        let mut key: Vec<u16> = tuple
            .iter()
            .copied()
            .filter(|&t| (t as usize) < n)
            .collect();
        key.sort_unstable();
        keys.entry(key).or_insert(f64::NAN);
        if !advance(&mut tuple, base as u16) {
            break;
        }
    }
    let mut key_list: Vec<Vec<u16>> = keys.keys().cloned().collect();
    key_list.sort_unstable();
    let values: Vec<f64> = key_list
        .par_iter()
        .map(|key| local_value_of_multiset(measure, key, k, spec))
        .collect::<Result<Vec<f64>>>()?;
    for (key, v) in key_list.iter().zip(&values) {
        keys.insert(key.clone(), *v);
    }

    let mut tensor = vec![0.0f64; num_tuples];
    let mut tuple = vec![0u16; k];
    for t in tensor.iter_mut() {
        let mut key: Vec<u16> = tuple
            .iter()
            .copied()
            .filter(|&x| (x as usize) < n)
            .collect();
        key.sort_unstable();
        *t = keys[&key];
        advance(&mut tuple, base as u16);
    }
    Ok(MotProblem {
        measure: measure.clone(),
        spec: *spec,
        ghost,
        nu,
        k,
        tensor,
    })
}

fn advance(tuple: &mut [u16], base: u16) -> bool {
    for slot in (0..tuple.len()).rev() {
        tuple[slot] += 1;
        if tuple[slot] < base {
            return true;
        }
        tuple[slot] = 0;
    }
    false
}

/// Local grouping value for a multiset of atom indices, with ghosts filling
/// the remaining slots up to `k`.
fn local_value_of_multiset(
    measure: &LabeledMeasure,
    atoms: &[u16],
    k: usize,
    spec: &CostSpec,
) -> Result<f64> {
    Ok(solve_local_multiset(measure, atoms, k, spec)?.value)
}

/// [`local_value_of_multiset`] including the local attack, reused by the
/// classifier module when aggregating attacks out of a coupling.
pub(crate) fn solve_local_multiset(
    measure: &LabeledMeasure,
    atoms: &[u16],
    k: usize,
    spec: &CostSpec,
) -> Result<LocalSolution> {
    let mut entries: Vec<TupleEntry> = atoms
        .iter()
        .map(|&a| {
            let p = &measure.points()[a as usize];
            TupleEntry::Point {
                coords: p.coords.clone(),
                label: p.label,
            }
        })
        .collect();
    entries.resize_with(k, || TupleEntry::Ghost);
    solve_local(&entries, spec)
}

/// Exact MOT solve: a dense LP over all tuples with `K` marginal-equality
/// blocks. Returns the vertex coupling and the row duals as potentials.
pub fn solve_exact(problem: &MotProblem) -> Result<MotSolution> {
    let base = problem.ghost.len();
    let num_tuples = problem.num_tuples();
    if num_tuples as u128 > DEFAULT_EXACT_COLUMN_CAP {
        return Err(Error::SupportTooLarge {
            columns: num_tuples as u128,
            cap: DEFAULT_EXACT_COLUMN_CAP,
        });
    }
    let k = problem.k;
    let mut rhs = Vec::with_capacity(k * base);
    for _ in 0..k {
        rhs.extend_from_slice(&problem.nu);
    }
    let mut lp = LinearProgram::new(k * base, rhs);
    let mut tuple = vec![0u16; k];
    for t in 0..num_tuples {
        let c = problem.tensor[t];
        if c.is_finite() {
            let entries: Vec<(usize, f64)> = tuple
                .iter()
                .enumerate()
                .map(|(j, &a)| (j * base + a as usize, 1.0))
                .collect();
            lp.add_column(vec![t as u32], c, &entries);
        }
        advance(&mut tuple, base as u16);
    }
    let sol = solve_lp(&lp)?;
    if sol.status != LpStatus::Optimal {
        return Err(Error::Internal(format!(
            "MOT LP should always be solvable, got {:?}",
            sol.status
        )));
    }
    // sparse read-back: column tags are linear tuple indices, but columns
    // with infinite cost were skipped, so recover indices from tag order
    let mut coupling = Vec::new();
    let mut col = 0usize;
    let mut tuple = vec![0u16; k];
    for t in 0..num_tuples {
        if problem.tensor[t].is_finite() {
            let x = sol.primal[col];
            if x > 1e-13 {
                coupling.push((tuple.clone(), x));
            }
            col += 1;
        }
        advance(&mut tuple, base as u16);
    }
    let potentials: Vec<Vec<f64>> = (0..k)
        .map(|j| sol.duals[j * base..(j + 1) * base].to_vec())
        .collect();
    let residual = marginal_residual_sparse(problem, &coupling);
    Ok(MotSolution {
        coupling: Coupling::Sparse(coupling),
        value: sol.objective,
        potentials,
        mode: SolveMode::Exact,
        marginal_residual: residual,
        iterations: 0,
        converged: true,
        duality_gap: Some(sol.residuals.duality_gap),
    })
}

fn marginal_residual_sparse(problem: &MotProblem, coupling: &[(Vec<u16>, f64)]) -> f64 {
    let base = problem.ghost.len();
    let mut worst = 0.0f64;
    for j in 0..problem.k {
        let mut marg = vec![0.0; base];
        for (tuple, mass) in coupling {
            marg[tuple[j] as usize] += mass;
        }
        let l1: f64 = marg
            .iter()
            .zip(&problem.nu)
            .map(|(m, n)| (m - n).abs())
            .sum();
        worst = worst.max(l1);
    }
    worst
}

/// Log-domain cyclic multimarginal Sinkhorn.
///
/// Potentials are updated one marginal at a time,
/// `u_j += eta * (ln nu - ln marginal_j)`, with infinite-cost entries masked
/// out of the kernel. Iteration stops when the worst l1 marginal residual
/// falls below `tol` or after `max_iter` sweeps (flagged, best iterate
/// returned). The reported value is `<cost, round(coupling)>` where the
/// rounding restores the marginals exactly, so the value never falls below
/// the exact optimum.
pub fn solve_sinkhorn(
    problem: &MotProblem,
    eta: f64,
    tol: f64,
    max_iter: usize,
) -> Result<MotSolution> {
    if !(eta.is_finite() && eta > 0.0) {
        return Err(Error::Config(format!("eta must be > 0, got {eta}")));
    }
    let base = problem.ghost.len();
    let k = problem.k;
    let n_tuples = problem.num_tuples();
    // infeasibility guard: every marginal atom needs some finite-cost tuple
    {
        let mut seen = vec![vec![false; base]; k];
        let mut tuple = vec![0u16; k];
        for t in 0..n_tuples {
            if problem.tensor[t].is_finite() {
                for j in 0..k {
                    seen[j][tuple[j] as usize] = true;
                }
            }
            advance(&mut tuple, base as u16);
        }
        for j in 0..k {
            for a in 0..base {
                if problem.nu[a] > 0.0 && !seen[j][a] {
                    return Err(Error::InfeasibleKernel {
                        marginal: j,
                        atom: a,
                    });
                }
            }
        }
    }
    let ln_nu: Vec<f64> = problem.nu.iter().map(|v| v.ln()).collect();
    let mut u = vec![vec![0.0f64; base]; k];
    let mut iterations = 0;
    let mut converged = false;
    let mut residual = f64::INFINITY;
    // streaming logsumexp buckets per marginal atom
    let mut bucket_max = vec![f64::NEG_INFINITY; base];
    let mut bucket_sum = vec![0.0f64; base];
    while iterations < max_iter {
        iterations += 1;
        for j in 0..k {
            bucket_max.iter_mut().for_each(|v| *v = f64::NEG_INFINITY);
            bucket_sum.iter_mut().for_each(|v| *v = 0.0);
            let mut tuple = vec![0u16; k];
            for t in 0..n_tuples {
                let c = problem.tensor[t];
                if c.is_finite() {
                    let mut s = -c;
                    for (l, ul) in u.iter().enumerate() {
                        s += ul[tuple[l] as usize];
                    }
                    let x = s / eta;
                    let a = tuple[j] as usize;
                    if x <= bucket_max[a] {
                        bucket_sum[a] += (x - bucket_max[a]).exp();
                    } else {
                        if bucket_max[a].is_finite() {
                            bucket_sum[a] = bucket_sum[a] * (bucket_max[a] - x).exp() + 1.0;
                        } else {
                            bucket_sum[a] = 1.0;
                        }
                        bucket_max[a] = x;
                    }
                }
                advance(&mut tuple, base as u16);
            }
            for a in 0..base {
                if problem.nu[a] > 0.0 {
                    let log_marg = bucket_max[a] + bucket_sum[a].ln();
                    u[j][a] += eta * (ln_nu[a] - log_marg);
                }
            }
        }
        // sweep residual: all K marginals of the current iterate
        residual = iterate_residual(problem, &u, eta);
        if residual <= tol {
            converged = true;
            break;
        }
    }
    // materialize, round to exact marginals, evaluate
    let mut pi = vec![0.0f64; n_tuples];
    let mut tuple = vec![0u16; k];
    for (t, p) in pi.iter_mut().enumerate() {
        let c = problem.tensor[t];
        if c.is_finite() {
            let mut s = -c;
            for (l, ul) in u.iter().enumerate() {
                s += ul[tuple[l] as usize];
            }
            *p = (s / eta).exp();
        }
        advance(&mut tuple, base as u16);
    }
    round_to_marginals(problem, &mut pi);
    let value: f64 = pi
        .iter()
        .zip(&problem.tensor)
        .filter(|(p, _)| **p > 0.0)
        .map(|(p, c)| p * c)
        .sum();
    Ok(MotSolution {
        coupling: Coupling::Dense(pi),
        value,
        potentials: u,
        mode: SolveMode::Entropic { eta },
        marginal_residual: residual,
        iterations,
        converged,
        duality_gap: None,
    })
}

fn iterate_residual(problem: &MotProblem, u: &[Vec<f64>], eta: f64) -> f64 {
    let base = problem.ghost.len();
    let k = problem.k;
    let mut margs = vec![vec![0.0f64; base]; k];
    let mut tuple = vec![0u16; k];
    for t in 0..problem.num_tuples() {
        let c = problem.tensor[t];
        if c.is_finite() {
            let mut s = -c;
            for (l, ul) in u.iter().enumerate() {
                s += ul[tuple[l] as usize];
            }
            let p = (s / eta).exp();
            for j in 0..k {
                margs[j][tuple[j] as usize] += p;
            }
        }
        advance(&mut tuple, base as u16);
    }
    let mut worst = 0.0f64;
    for j in 0..k {
        let l1: f64 = margs[j]
            .iter()
            .zip(&problem.nu)
            .map(|(m, n)| (m - n).abs())
            .sum();
        worst = worst.max(l1);
    }
    worst
}

/// Rounds a nonnegative tensor onto the coupling polytope: scale down along
/// each marginal, then fill the remaining deficit with a product correction.
fn round_to_marginals(problem: &MotProblem, pi: &mut [f64]) {
    let base = problem.ghost.len();
    let k = problem.k;
    for j in 0..k {
        let mut marg = vec![0.0f64; base];
        let mut tuple = vec![0u16; k];
        for (t, p) in pi.iter().enumerate() {
            marg[tuple[j] as usize] += p;
            let _ = t;
            advance(&mut tuple, base as u16);
        }
        let scale: Vec<f64> = marg
            .iter()
            .zip(&problem.nu)
            .map(|(m, n)| if *m > *n && *m > 0.0 { n / m } else { 1.0 })
            .collect();
        let mut tuple = vec![0u16; k];
        for p in pi.iter_mut() {
            *p *= scale[tuple[j] as usize];
            advance(&mut tuple, base as u16);
        }
    }
    // deficits per marginal
    let mut deficits = vec![vec![0.0f64; base]; k];
    {
        let mut margs = vec![vec![0.0f64; base]; k];
        let mut tuple = vec![0u16; k];
        for p in pi.iter() {
            for j in 0..k {
                margs[j][tuple[j] as usize] += p;
            }
            advance(&mut tuple, base as u16);
        }
        for j in 0..k {
            for a in 0..base {
                deficits[j][a] = (problem.nu[a] - margs[j][a]).max(0.0);
            }
        }
    }
    let delta: f64 = deficits[0].iter().sum();
    if delta > 1e-15 {
        let norm = delta.powi(k as i32 - 1);
        let mut tuple = vec![0u16; k];
        for p in pi.iter_mut() {
            let mut prod = 1.0;
            for j in 0..k {
                prod *= deficits[j][tuple[j] as usize];
                if prod == 0.0 {
                    break;
                }
            }
            if prod > 0.0 {
                *p += prod / norm;
            }
            advance(&mut tuple, base as u16);
        }
    }
}

/// Projects potentials into the dual-feasible set: the worst constraint
/// violation over all tuples is subtracted from the first potential, and
/// the dual objective is recomputed.
pub fn extract_duals(problem: &MotProblem, sol: &MotSolution) -> ProjectedDuals {
    let base = problem.ghost.len();
    let k = problem.k;
    let mut potentials = sol.potentials.clone();
    let mut violation = f64::NEG_INFINITY;
    let mut tuple = vec![0u16; k];
    for t in 0..problem.num_tuples() {
        let c = problem.tensor[t];
        if c.is_finite() {
            let s: f64 = (0..k).map(|j| potentials[j][tuple[j] as usize]).sum();
            violation = violation.max(s - c);
        }
        advance(&mut tuple, base as u16);
    }
    let shift = violation.max(0.0);
    if shift > 0.0 {
        for v in &mut potentials[0] {
            *v -= shift;
        }
    }
    let mut max_violation = f64::NEG_INFINITY;
    let mut tuple = vec![0u16; k];
    for t in 0..problem.num_tuples() {
        let c = problem.tensor[t];
        if c.is_finite() {
            let s: f64 = (0..k).map(|j| potentials[j][tuple[j] as usize]).sum();
            max_violation = max_violation.max(s - c);
        }
        advance(&mut tuple, base as u16);
    }
    let objective: f64 = potentials
        .iter()
        .map(|phi| phi.iter().zip(&problem.nu).map(|(p, n)| p * n).sum::<f64>())
        .sum();
    ProjectedDuals {
        potentials,
        shift,
        objective,
        max_violation,
    }
}

/// Replaces the coupling by its average over coordinate permutations
/// (all `K!` of them up to 720, a fixed deterministic subset beyond).
/// The objective and the marginals are unchanged.
pub fn symmetrize(problem: &MotProblem, sol: &MotSolution) -> MotSolution {
    let perms = permutations(problem.k);
    let weight = 1.0 / perms.len() as f64;
    let mut out = sol.clone();
    match &sol.coupling {
        Coupling::Sparse(entries) => {
            let mut acc: std::collections::BTreeMap<Vec<u16>, f64> =
                std::collections::BTreeMap::new();
            for perm in &perms {
                for (tuple, mass) in entries {
                    let permuted: Vec<u16> = perm.iter().map(|&p| tuple[p]).collect();
                    *acc.entry(permuted).or_insert(0.0) += mass * weight;
                }
            }
            let entries: Vec<(Vec<u16>, f64)> = acc.into_iter().collect();
            out.value = entries.iter().map(|(t, m)| problem.cost_of(t) * m).sum();
            out.coupling = Coupling::Sparse(entries);
        }
        Coupling::Dense(pi) => {
            let base = problem.ghost.len();
            let mut acc = vec![0.0f64; pi.len()];
            let mut tuple = vec![0u16; problem.k];
            for (t, &mass) in pi.iter().enumerate() {
                let _ = t;
                if mass != 0.0 {
                    for perm in &perms {
                        let permuted: Vec<u16> = perm.iter().map(|&p| tuple[p]).collect();
                        let idx = permuted.iter().fold(0usize, |a, &x| a * base + x as usize);
                        acc[idx] += mass * weight;
                    }
                }
                advance(&mut tuple, base as u16);
            }
            out.value = acc
                .iter()
                .zip(&problem.tensor)
                .filter(|(p, _)| **p > 0.0)
                .map(|(p, c)| p * c)
                .sum();
            out.coupling = Coupling::Dense(acc);
        }
    }
    out
}

/// All permutations of `0..k` in a deterministic order, capped at 720
/// (a fixed stride-sampled subset is used beyond `k = 6`).
fn permutations(k: usize) -> Vec<Vec<usize>> {
    let mut all = Vec::new();
    let mut current: Vec<usize> = (0..k).collect();
    heap_permute(&mut current, k, &mut all);
    if all.len() > 720 {
        let stride = all.len() / 720;
        all = all.into_iter().step_by(stride.max(1)).take(720).collect();
    }
    all.sort();
    all
}

fn heap_permute(arr: &mut Vec<usize>, size: usize, out: &mut Vec<Vec<usize>>) {
    if size == 1 {
        out.push(arr.clone());
        return;
    }
    for i in 0..size {
        heap_permute(arr, size - 1, out);
        if size % 2 == 1 {
            arr.swap(0, size - 1);
        } else {
            arr.swap(i, size - 1);
        }
    }
}
