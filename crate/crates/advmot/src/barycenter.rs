//! The generalized barycenter problem on finite supports.
//!
//! The optimal classification power of a labeled measure equals the optimal
//! value of a stratified grouping LP: for every nonempty class subset `A`
//! and every choice of one support atom per class in `A`, a nonnegative mass
//! may be grouped at the optimal meeting point `T_A` at cost
//! `mass * (1 + c_A)`, subject to every atom's weight being fully assigned
//! across the groups it participates in. Columns with infinite meeting cost
//! are never materialized.
//!
//! From an optimal grouping the module reconstructs the barycenter measure
//! (total mass = number-of-groups weighted), the per-class attack measures
//! and their transport plans.

use std::collections::BTreeMap;

/// merged point accumulator keyed by exact coordinate bits
type PointAccumulator = BTreeMap<Vec<u64>, (Vec<f64>, f64)>;

use crate::cost::{set_cost, CostSpec};
use crate::lp::{solve_lp, LinearProgram, LpStatus};
use crate::measure::{LabeledMeasure, LabeledPoint, SubsetTable};
use crate::{Error, Result};

/// Hard cap on stratified LP columns (the support bound is
/// `sum_A prod_(i in A) n_i`; beyond this the exact route is refused).
pub const DEFAULT_COLUMN_CAP: u128 = 200_000;

/// Largest class count accepted by the exact stratified LP.
pub const EXACT_CLASS_CAP: usize = 8;

/// Mass below which plan entries are not reported.
const PLAN_MASS_TOL: f64 = 1e-11;

/// Splits a unit of mass across nested class subsets.
///
/// Given `u` in `[0,1]^K` with `max u = 1` (tolerance 1e-12), returns
/// nonnegative weights `r_A` over subsets with `Σ_A r_A = 1` and
/// `Σ_{A ∋ i} r_A = u_i` for every class, built by the sorted nested-suffix
/// construction: sort `u` ascending, then assign successive differences to
/// the suffix subsets.
pub fn decompose_mass(u: &[f64]) -> Result<Vec<(u32, f64)>> {
    let k = u.len();
    if k == 0 {
        return Err(Error::EmptyInput);
    }
    let mut maxu = f64::NEG_INFINITY;
    for &v in u {
        if !v.is_finite() {
            return Err(Error::NonFinite("mass vector"));
        }
        if !(-1e-12..=1.0 + 1e-12).contains(&v) {
            return Err(Error::Config(format!("mass entry {v} outside [0,1]")));
        }
        maxu = maxu.max(v);
    }
    if (maxu - 1.0).abs() > 1e-12 {
        return Err(Error::Config(format!(
            "mass vector must have max exactly 1, got {maxu}"
        )));
    }
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| u[a].total_cmp(&u[b]).then(a.cmp(&b)));
    let mut out = Vec::new();
    let mut prev = 0.0;
    for (pos, &idx) in order.iter().enumerate() {
        let v = u[idx].clamp(0.0, 1.0);
        if v <= prev + 1e-15 {
            continue;
        }
        // suffix subset: this index and all indices with larger u
        let mut mask = 0u32;
        for &j in &order[pos..] {
            mask |= 1 << j;
        }
        out.push((mask, v - prev));
        prev = v;
    }
    out.sort_by_key(|&(mask, _)| (mask.count_ones(), mask));
    Ok(out)
}

/// One active group of an optimal stratified plan.
#[derive(Debug, Clone)]
pub struct PlanEntry {
    /// classes grouped together (bitmask; bit `i-1` = class `i`)
    pub subset: u32,
    /// global atom index per class in the subset, ascending class order
    pub atoms: Vec<usize>,
    /// mass carried by this group
    pub mass: f64,
    /// common meeting point
    pub witness: Vec<f64>,
    /// total meeting cost `c_A` for one unit of mass
    pub group_cost: f64,
}

/// Optimal stratified grouping: masses per (subset, atom tuple).
#[derive(Debug, Clone, Default)]
pub struct StratifiedPlan {
    pub entries: Vec<PlanEntry>,
}

/// One transported mass chunk of a per-class attack.
#[derive(Debug, Clone)]
pub struct TransportPair {
    /// 1-based class
    pub class: usize,
    /// source atom index into the measure (None when the source is not an
    /// atom of the solved measure, e.g. local tuples)
    pub source_atom: Option<usize>,
    pub source: Vec<f64>,
    pub target: Vec<f64>,
    pub mass: f64,
    /// ground cost of this move per unit mass
    pub unit_cost: f64,
}

/// Per-class attack measures with transport provenance.
#[derive(Debug, Clone, Default)]
pub struct AttackSet {
    /// `atoms[i-1]` lists `(point, mass)` for class `i`, merged and sorted
    pub atoms: Vec<Vec<(Vec<f64>, f64)>>,
    pub transports: Vec<TransportPair>,
}

impl AttackSet {
    pub fn class_mass(&self, label: usize) -> f64 {
        self.atoms[label - 1].iter().map(|(_, m)| m).sum()
    }

    /// Total transport cost of the provenance plan.
    pub fn plan_cost(&self) -> f64 {
        self.transports.iter().map(|t| t.mass * t.unit_cost).sum()
    }
}

/// Solution of the generalized barycenter problem.
#[derive(Debug, Clone)]
pub struct BarycenterSolution {
    /// optimal value (the optimal classification power of the measure)
    pub value: f64,
    pub plan: StratifiedPlan,
    /// the barycenter measure: meeting points with their group masses
    pub lambda: Vec<(Vec<f64>, f64)>,
    /// per-class attacks reconstructed from the plan
    pub attacks: AttackSet,
    /// one dual multiplier per support atom (a feasible dual for the
    /// grouping constraints; used to build robust classifiers)
    pub atom_duals: Vec<f64>,
    /// number of atoms in the solved measure
    pub num_atoms: usize,
}

/// Column-count bound `sum_A prod_(i in A) n_i` for a class-size profile.
pub fn column_bound(class_sizes: &[usize]) -> u128 {
    // sum over nonempty subsets of the product of sizes
    // = prod (1 + n_i) - 1
    let mut prod: u128 = 1;
    for &n in class_sizes {
        prod = prod.saturating_mul(1 + n as u128);
    }
    prod - 1
}

/// Solves the generalized barycenter problem exactly on a finite support.
///
/// Enumerates one LP column per (subset, atom tuple) with finite meeting
/// cost, in a fixed lexicographic order, and solves with the deterministic
/// simplex. The reported value equals the optimal classification power.
pub fn solve_generalized_barycenter(
    measure: &LabeledMeasure,
    spec: &CostSpec,
) -> Result<BarycenterSolution> {
    solve_generalized_barycenter_capped(measure, spec, DEFAULT_COLUMN_CAP)
}

/// [`solve_generalized_barycenter`] with an explicit column cap.
pub fn solve_generalized_barycenter_capped(
    measure: &LabeledMeasure,
    spec: &CostSpec,
    column_cap: u128,
) -> Result<BarycenterSolution> {
    spec.validate()?;
    let k = measure.num_classes();
    if k > EXACT_CLASS_CAP {
        return Err(Error::ClassCount(k));
    }
    let by_class = measure.atoms_by_class();
    let sizes: Vec<usize> = by_class.iter().map(|v| v.len()).collect();
    let bound = column_bound(&sizes);
    if bound > column_cap {
        return Err(Error::SupportTooLarge {
            columns: bound,
            cap: column_cap,
        });
    }
    // Subset enumeration works for K >= 2; a single-class measure still
    // needs its singleton subset.
    let masks: Vec<u32> = if k >= 2 {
        SubsetTable::new(k)?.masks().to_vec()
    } else {
        vec![0b1]
    };
    let points = measure.points();
    let n = points.len();
    let mut lp = LinearProgram::new(n, points.iter().map(|p| p.weight).collect());
    // column metadata parallel to LP columns
    let mut col_meta: Vec<(u32, Vec<usize>, Vec<f64>, f64)> = Vec::new();
    for &mask in &masks {
        let classes = SubsetTable::members(mask);
        if classes.iter().any(|&i| by_class[i - 1].is_empty()) {
            continue;
        }
        // lexicographic product over the class atom lists
        let lists: Vec<&Vec<usize>> = classes.iter().map(|&i| &by_class[i - 1]).collect();
        let mut idx = vec![0usize; classes.len()];
        'tuples: loop {
            let atoms: Vec<usize> = idx.iter().zip(&lists).map(|(&i, l)| l[i]).collect();
            let coords: Vec<&[f64]> = atoms.iter().map(|&a| points[a].coords.as_slice()).collect();
            let group = set_cost(spec, &coords);
            if group.value.is_finite() {
                let mut tag: ColumnTagBuilder = ColumnTagBuilder::new(mask);
                for &a in &atoms {
                    tag.push_atom(a);
                }
                let entries: Vec<(usize, f64)> = atoms.iter().map(|&a| (a, 1.0)).collect();
                lp.add_column(tag.finish(), group.value + 1.0, &entries);
                col_meta.push((mask, atoms, group.witness.unwrap(), group.value));
            }
            // advance the odometer, rightmost position fastest
            let mut pos = idx.len();
            while pos > 0 {
                pos -= 1;
                idx[pos] += 1;
                if idx[pos] < lists[pos].len() {
                    continue 'tuples;
                }
                idx[pos] = 0;
            }
            break;
        }
    }
    let sol = solve_lp(&lp)?;
    if sol.status != LpStatus::Optimal {
        return Err(Error::Internal(format!(
            "stratified LP should always be solvable, got {:?}",
            sol.status
        )));
    }
    let mut plan = StratifiedPlan::default();
    for (x, (mask, atoms, witness, group_cost)) in sol.primal.iter().zip(&col_meta) {
        if *x > PLAN_MASS_TOL {
            plan.entries.push(PlanEntry {
                subset: *mask,
                atoms: atoms.clone(),
                mass: *x,
                witness: witness.clone(),
                group_cost: *group_cost,
            });
        }
    }
    let lambda = assemble_lambda(&plan);
    let attacks = reconstruct_attack_for(measure, &plan);
    Ok(BarycenterSolution {
        value: sol.objective,
        plan,
        lambda,
        attacks,
        atom_duals: sol.duals,
        num_atoms: n,
    })
}

struct ColumnTagBuilder {
    tag: Vec<u32>,
}

impl ColumnTagBuilder {
    fn new(mask: u32) -> Self {
        // popcount-major so column order matches subset table order
        Self {
            tag: vec![(mask.count_ones() << 24) | mask],
        }
    }

    fn push_atom(&mut self, atom: usize) {
        self.tag.push(atom as u32);
    }

    fn finish(self) -> Vec<u32> {
        self.tag
    }
}

/// The barycenter measure: witnesses with their group masses, merged by
/// bit-identical coordinates and sorted.
fn assemble_lambda(plan: &StratifiedPlan) -> Vec<(Vec<f64>, f64)> {
    let mut acc: PointAccumulator = BTreeMap::new();
    for e in &plan.entries {
        let key: Vec<u64> = e.witness.iter().map(|c| c.to_bits()).collect();
        acc.entry(key)
            .and_modify(|(_, m)| *m += e.mass)
            .or_insert_with(|| (e.witness.clone(), e.mass));
    }
    acc.into_values().collect()
}

/// Reconstructs per-class attacks and transport plans from an optimal plan:
/// each group sends its mass from every member atom to the group witness.
pub fn reconstruct_attack(measure: &LabeledMeasure, sol: &BarycenterSolution) -> AttackSet {
    reconstruct_attack_for(measure, &sol.plan)
}

fn reconstruct_attack_for(measure: &LabeledMeasure, plan: &StratifiedPlan) -> AttackSet {
    let k = measure.num_classes();
    let points = measure.points();
    let mut atoms: Vec<PointAccumulator> = vec![BTreeMap::new(); k];
    let mut transports = Vec::new();
    for e in &plan.entries {
        let classes = SubsetTable::members(e.subset);
        for (slot, &class) in classes.iter().enumerate() {
            let atom = e.atoms[slot];
            let src = &points[atom];
            let key: Vec<u64> = e.witness.iter().map(|c| c.to_bits()).collect();
            atoms[class - 1]
                .entry(key)
                .and_modify(|(_, m)| *m += e.mass)
                .or_insert_with(|| (e.witness.clone(), e.mass));
            transports.push(TransportPair {
                class,
                source_atom: Some(atom),
                source: src.coords.clone(),
                target: e.witness.clone(),
                mass: e.mass,
                unit_cost: 0.0, // filled below
            });
        }
    }
    AttackSet {
        atoms: atoms
            .into_iter()
            .map(|m| m.into_values().collect())
            .collect(),
        transports,
    }
}

/// Fills per-unit ground costs on a transport list.
pub fn price_transports(spec: &CostSpec, transports: &mut [TransportPair]) {
    for t in transports {
        t.unit_cost = spec.eval(&t.source, &t.target);
    }
}

/// One slot of a grouping tuple: either the ghost or a labeled point.
#[derive(Debug, Clone)]
pub enum TupleEntry {
    Ghost,
    Point { coords: Vec<f64>, label: usize },
}

/// Outcome of a local (single-tuple) grouping problem.
#[derive(Debug, Clone)]
pub struct LocalSolution {
    /// optimal classification power of the tuple's empirical measure
    pub value: f64,
    /// transported chunks `(class, source, target, mass)`
    pub transports: Vec<(usize, Vec<f64>, Vec<f64>, f64)>,
}

/// The grouping value of one tuple of `K` slots (ghosts allowed): the
/// optimal classification power of the equal-weight empirical measure on the
/// non-ghost entries, each carrying mass `1/K`.
///
/// When every class present appears at a single location the value comes
/// from a small per-subset mass LP; when a class appears at several distinct
/// locations the full stratified solve is used. An all-ghost tuple scores 0.
pub fn local_value(entries: &[TupleEntry], spec: &CostSpec) -> Result<f64> {
    Ok(solve_local(entries, spec)?.value)
}

/// [`local_value`] plus the reconstructed local attack.
pub fn solve_local(entries: &[TupleEntry], spec: &CostSpec) -> Result<LocalSolution> {
    let k = entries.len();
    if k == 0 {
        return Err(Error::EmptyInput);
    }
    let mut max_label = 0usize;
    let mut non_ghost: Vec<(&[f64], usize)> = Vec::new();
    for e in entries {
        if let TupleEntry::Point { coords, label } = e {
            if *label == 0 {
                return Err(Error::LabelOutOfRange {
                    label: 0,
                    num_classes: k,
                });
            }
            non_ghost.push((coords.as_slice(), *label));
            max_label = max_label.max(*label);
        }
    }
    if non_ghost.is_empty() {
        return Ok(LocalSolution {
            value: 0.0,
            transports: Vec::new(),
        });
    }
    // group by class
    let mut locations: Vec<Vec<(&[f64], usize)>> = vec![Vec::new(); max_label];
    for (coords, label) in &non_ghost {
        let slot = &mut locations[label - 1];
        match slot.iter_mut().find(|(c, _)| bits_eq(c, coords)) {
            Some((_, mult)) => *mult += 1,
            None => slot.push((coords, 1)),
        }
    }
    let single_location = locations.iter().all(|l| l.len() <= 1);
    if single_location {
        solve_local_single_location(&locations, k, spec)
    } else {
        // several distinct locations in one class: delegate to the full
        // stratified solve on the tuple's empirical measure
        let pts: Vec<LabeledPoint> = non_ghost
            .iter()
            .map(|(coords, label)| LabeledPoint {
                coords: coords.to_vec(),
                label: *label,
                weight: 1.0 / k as f64,
            })
            .collect();
        let m = LabeledMeasure::new(pts, max_label.max(2))?;
        let sol = solve_generalized_barycenter(&m, spec)?;
        let transports = sol
            .attacks
            .transports
            .iter()
            .map(|t| (t.class, t.source.clone(), t.target.clone(), t.mass))
            .collect();
        Ok(LocalSolution {
            value: sol.value,
            transports,
        })
    }
}

/// Per-subset mass LP for tuples where each present class sits at one
/// location: choose nonnegative masses `m_A` with
/// `Σ_{A ∋ i} m_A = multiplicity_i / K`, minimizing `Σ m_A (1 + c_A)`.
fn solve_local_single_location(
    locations: &[Vec<(&[f64], usize)>],
    k: usize,
    spec: &CostSpec,
) -> Result<LocalSolution> {
    let present: Vec<usize> = (0..locations.len())
        .filter(|&i| !locations[i].is_empty())
        .collect();
    let p = present.len();
    let rhs: Vec<f64> = present
        .iter()
        .map(|&i| locations[i][0].1 as f64 / k as f64)
        .collect();
    let mut lp = LinearProgram::new(p, rhs);
    let mut meta: Vec<(u32, Vec<f64>, f64)> = Vec::new(); // (local mask, witness, c_A)
    for mask in 1u32..(1 << p) {
        let member_rows: Vec<usize> = (0..p).filter(|&r| mask & (1 << r) != 0).collect();
        let coords: Vec<&[f64]> = member_rows
            .iter()
            .map(|&r| locations[present[r]][0].0)
            .collect();
        let group = set_cost(spec, &coords);
        if group.value.is_finite() {
            let entries: Vec<(usize, f64)> = member_rows.iter().map(|&r| (r, 1.0)).collect();
            lp.add_column(
                vec![(mask.count_ones() << 24) | mask],
                group.value + 1.0,
                &entries,
            );
            meta.push((mask, group.witness.unwrap(), group.value));
        }
    }
    let sol = solve_lp(&lp)?;
    if sol.status != LpStatus::Optimal {
        return Err(Error::Internal(format!(
            "local mass LP should always be solvable, got {:?}",
            sol.status
        )));
    }
    let mut transports = Vec::new();
    for (x, (mask, witness, _)) in sol.primal.iter().zip(&meta) {
        if *x > PLAN_MASS_TOL {
            for r in 0..p {
                if mask & (1 << r) != 0 {
                    let class = present[r] + 1;
                    transports.push((
                        class,
                        locations[present[r]][0].0.to_vec(),
                        witness.clone(),
                        *x,
                    ));
                }
            }
        }
    }
    Ok(LocalSolution {
        value: sol.objective,
        transports,
    })
}

fn bits_eq(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::Metric;
    use crate::measure::LabeledPoint;

    fn ball(epsilon: f64) -> CostSpec {
        CostSpec::Ball {
            epsilon,
            metric: Metric::L2,
        }
    }

    fn pt(coords: &[f64], label: usize, weight: f64) -> LabeledPoint {
        LabeledPoint {
            coords: coords.to_vec(),
            label,
            weight,
        }
    }

    fn three_point_measure(points: [[f64; 2]; 3], weights: [f64; 3]) -> LabeledMeasure {
        LabeledMeasure::new(
            (0..3).map(|i| pt(&points[i], i + 1, weights[i])).collect(),
            3,
        )
        .unwrap()
    }

    #[test]
    fn decompose_fully_nested() {
        let r = decompose_mass(&[1.0, 1.0, 1.0]).unwrap();
        assert_eq!(r, vec![(0b111, 1.0)]);
    }

    #[test]
    fn decompose_two_class_example() {
        let r = decompose_mass(&[0.3, 1.0]).unwrap();
        let as_map: BTreeMap<u32, f64> = r.into_iter().collect();
        assert!((as_map[&0b11] - 0.3).abs() < 1e-15);
        assert!((as_map[&0b10] - 0.7).abs() < 1e-15);
    }

    #[test]
    fn decompose_drops_zero_entries() {
        let r = decompose_mass(&[0.0, 0.0, 1.0]).unwrap();
        assert_eq!(r, vec![(0b100, 1.0)]);
    }

    #[test]
    fn decompose_rejects_bad_max() {
        assert!(decompose_mass(&[0.3, 0.9]).is_err());
        assert!(decompose_mass(&[0.3, 1.1]).is_err());
    }

    #[test]
    fn decompose_equalities_fuzz() {
        let mut state = 99u64;
        let mut next = move || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..200 {
            let k = 2 + (next() * 5.0) as usize;
            let mut u: Vec<f64> = (0..k).map(|_| next()).collect();
            let arg = (next() * k as f64) as usize % k;
            u[arg] = 1.0;
            let r = decompose_mass(&u).unwrap();
            let total: f64 = r.iter().map(|(_, v)| v).sum();
            assert!((total - 1.0).abs() <= 1e-12);
            for i in 0..k {
                let ui: f64 = r
                    .iter()
                    .filter(|(mask, _)| mask & (1 << i) != 0)
                    .map(|(_, v)| v)
                    .sum();
                assert!((ui - u[i]).abs() <= 1e-12, "class {i}: {ui} vs {}", u[i]);
            }
            assert!(r.iter().all(|&(_, v)| v >= 0.0));
        }
    }

    // Geometry helpers for the three-point reference configurations.
    fn separated() -> LabeledMeasure {
        // pairwise distances 4 > 2ε for ε = 1
        three_point_measure(
            [[0.0, 0.0], [4.0, 0.0], [2.0, 3.5]],
            [1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0],
        )
    }

    #[test]
    fn separated_classes_keep_full_power() {
        let sol = solve_generalized_barycenter(&separated(), &ball(1.0)).unwrap();
        assert!((sol.value - 1.0).abs() < 1e-9);
        // identity attack: every class stays put
        for (i, class_atoms) in sol.attacks.atoms.iter().enumerate() {
            assert_eq!(class_atoms.len(), 1);
            let (point, mass) = &class_atoms[0];
            assert!((mass - 1.0 / 3.0).abs() < 1e-9);
            assert_eq!(point, &separated().points()[i].coords);
        }
    }

    #[test]
    fn close_pair_value() {
        // d(x1,x2) <= 2ε, x3 far; weights (0.5, 0.3, 0.2)
        let m = three_point_measure([[0.0, 0.0], [1.0, 0.0], [9.0, 0.0]], [0.5, 0.3, 0.2]);
        let sol = solve_generalized_barycenter(&m, &ball(1.0)).unwrap();
        assert!((sol.value - 0.7).abs() < 1e-9);
    }

    #[test]
    fn cyclic_overlap_balanced_value_and_attack() {
        // equilateral, side 2ε: pairwise overlap, no triple overlap
        let e = 1.0;
        let m = three_point_measure(
            [[0.0, 0.0], [2.0 * e, 0.0], [e, e * 3.0f64.sqrt()]],
            [0.4, 0.35, 0.25],
        );
        let sol = solve_generalized_barycenter(&m, &ball(e)).unwrap();
        assert!((sol.value - 0.5).abs() < 1e-9);
        // unique optimal plan: three pair groups with the half-sum masses
        let mut by_mask: BTreeMap<u32, f64> = BTreeMap::new();
        for p in &sol.plan.entries {
            *by_mask.entry(p.subset).or_insert(0.0) += p.mass;
        }
        assert!((by_mask[&0b011] - 0.25).abs() < 1e-9);
        assert!((by_mask[&0b101] - 0.15).abs() < 1e-9);
        assert!((by_mask[&0b110] - 0.10).abs() < 1e-9);
        // class-1 attack: 0.25 at the 1-2 midpoint, 0.15 at the 1-3 midpoint
        let atoms = &sol.attacks.atoms[0];
        assert_eq!(atoms.len(), 2);
        let mid12 = [e, 0.0];
        let mass_at_mid12: f64 = atoms
            .iter()
            .filter(|(p, _)| (p[0] - mid12[0]).abs() < 1e-9 && (p[1] - mid12[1]).abs() < 1e-9)
            .map(|(_, m)| m)
            .sum();
        assert!((mass_at_mid12 - 0.25).abs() < 1e-9);
    }

    #[test]
    fn cyclic_overlap_dominant_value() {
        let e = 1.0;
        let m = three_point_measure(
            [[0.0, 0.0], [2.0 * e, 0.0], [e, e * 3.0f64.sqrt()]],
            [0.6, 0.25, 0.15],
        );
        let sol = solve_generalized_barycenter(&m, &ball(e)).unwrap();
        assert!((sol.value - 0.6).abs() < 1e-9);
    }

    #[test]
    fn single_class_measure_value_is_its_mass() {
        let m = LabeledMeasure::new(vec![pt(&[0.0, 0.0], 1, 0.7)], 2).unwrap();
        let sol = solve_generalized_barycenter(&m, &ball(1.0)).unwrap();
        assert!((sol.value - 0.7).abs() < 1e-12);
        assert_eq!(sol.lambda.len(), 1);
    }

    #[test]
    fn solution_invariants_hold() {
        let e = 0.8;
        let m = three_point_measure([[0.0, 0.0], [1.2, 0.0], [0.6, 1.0]], [0.45, 0.35, 0.2]);
        let spec = ball(e);
        let sol = solve_generalized_barycenter(&m, &spec).unwrap();
        // value = lambda mass + transport cost (ball: transport cost 0)
        let lambda_mass: f64 = sol.lambda.iter().map(|(_, m)| m).sum();
        assert!((sol.value - lambda_mass).abs() < 1e-8);
        // domination: lambda >= each class attack atomwise
        for class_atoms in &sol.attacks.atoms {
            for (point, mass) in class_atoms {
                let lam = sol
                    .lambda
                    .iter()
                    .find(|(p, _)| bits_eq(p, point))
                    .map(|(_, m)| *m)
                    .unwrap_or(0.0);
                assert!(lam >= mass - 1e-10);
            }
        }
        // attacks conserve class masses
        for i in 1..=3 {
            assert!((sol.attacks.class_mass(i) - m.class_mass(i)).abs() < 1e-10);
        }
        // bounds: max class mass <= value <= total mass
        let max_class = (1..=3).map(|i| m.class_mass(i)).fold(0.0, f64::max);
        assert!(sol.value >= max_class - 1e-10);
        assert!(sol.value <= m.total_mass() + 1e-10);
    }

    #[test]
    fn homogeneity_in_the_measure() {
        let m = three_point_measure([[0.0, 0.0], [1.0, 0.0], [0.5, 0.9]], [0.5, 0.3, 0.2]);
        let spec = ball(0.7);
        let base = solve_generalized_barycenter(&m, &spec).unwrap().value;
        for a in [0.5, 2.0] {
            let scaled = solve_generalized_barycenter(&m.scaled(a).unwrap(), &spec)
                .unwrap()
                .value;
            assert!((scaled - a * base).abs() < 1e-10);
        }
    }

    #[test]
    fn local_value_binary_table() {
        let spec = ball(1.0);
        let close = [
            TupleEntry::Point {
                coords: vec![0.0, 0.0],
                label: 1,
            },
            TupleEntry::Point {
                coords: vec![1.0, 0.0],
                label: 2,
            },
        ];
        assert_eq!(local_value(&close, &spec).unwrap(), 0.5);
        let far = [
            TupleEntry::Point {
                coords: vec![0.0, 0.0],
                label: 1,
            },
            TupleEntry::Point {
                coords: vec![5.0, 0.0],
                label: 2,
            },
        ];
        assert_eq!(local_value(&far, &spec).unwrap(), 1.0);
        let one_ghost = [
            TupleEntry::Point {
                coords: vec![0.0, 0.0],
                label: 1,
            },
            TupleEntry::Ghost,
        ];
        assert_eq!(local_value(&one_ghost, &spec).unwrap(), 0.5);
        assert_eq!(
            local_value(&[TupleEntry::Ghost, TupleEntry::Ghost], &spec).unwrap(),
            0.0
        );
    }

    #[test]
    fn local_value_pair_with_ghost_in_three_marginals() {
        let spec = ball(1.0);
        let entries = [
            TupleEntry::Point {
                coords: vec![0.0, 0.0],
                label: 1,
            },
            TupleEntry::Point {
                coords: vec![1.5, 0.0],
                label: 2,
            },
            TupleEntry::Ghost,
        ];
        let v = local_value(&entries, &spec).unwrap();
        assert!((v - 1.0 / 3.0).abs() < 1e-12);
        // cross-check against the full stratified solve on the same measure
        let m = LabeledMeasure::new(
            vec![pt(&[0.0, 0.0], 1, 1.0 / 3.0), pt(&[1.5, 0.0], 2, 1.0 / 3.0)],
            2,
        )
        .unwrap();
        let full = solve_generalized_barycenter(&m, &spec).unwrap().value;
        assert!((v - full).abs() < 1e-12);
    }

    #[test]
    fn local_value_same_class_points() {
        let spec = ball(1.0);
        // three distinct same-class points: no grouping, value = total mass
        let entries: Vec<TupleEntry> = [[0.0, 0.0], [0.5, 0.0], [0.0, 0.5]]
            .iter()
            .map(|c| TupleEntry::Point {
                coords: c.to_vec(),
                label: 1,
            })
            .collect();
        let v = local_value(&entries, &spec).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
        // three copies of one atom: same value through the fast path
        let entries: Vec<TupleEntry> = (0..3)
            .map(|_| TupleEntry::Point {
                coords: vec![0.0, 0.0],
                label: 1,
            })
            .collect();
        assert!((local_value(&entries, &spec).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn column_cap_reports_the_bound() {
        let m = three_point_measure([[0.0, 0.0], [1.0, 0.0], [0.5, 0.9]], [0.5, 0.3, 0.2]);
        let err = solve_generalized_barycenter_capped(&m, &ball(1.0), 3).unwrap_err();
        match err {
            Error::SupportTooLarge { columns, cap } => {
                // one atom per class: sum over subsets = 2^3 - 1
                assert_eq!(columns, 7);
                assert_eq!(cap, 3);
            }
            other => panic!("expected SupportTooLarge, got {other:?}"),
        }
    }

    #[test]
    fn power_cost_groups_pay_transport() {
        // two classes, power cost: grouping cost (1/τ)·(d/2)²·2 vs +1 saved
        let m =
            LabeledMeasure::new(vec![pt(&[0.0, 0.0], 1, 0.5), pt(&[1.0, 0.0], 2, 0.5)], 2).unwrap();
        let spec = CostSpec::Power { p: 2, tau: 1.0 };
        let sol = solve_generalized_barycenter(&m, &spec).unwrap();
        // grouping: 0.5·(1 + 0.5) = 0.75 beats separate 1.0
        assert!((sol.value - 0.75).abs() < 1e-9);
        let mut t = sol.attacks.transports.clone();
        price_transports(&spec, &mut t);
        let cost: f64 = t.iter().map(|tp| tp.mass * tp.unit_cost).sum();
        let lambda_mass: f64 = sol.lambda.iter().map(|(_, m)| m).sum();
        assert!((sol.value - (lambda_mass + cost)).abs() < 1e-9);
    }
}
