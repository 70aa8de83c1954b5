//! Robust classifier, aggregated attack and saddle verification.
//!
//! Feasible MOT dual potentials induce per-class scores on the data support
//! (for an atom `(x, i)`: the sum of all potentials at the atom plus their
//! values at the ghost). Clamped at zero, those scores generate the robust
//! classifier by sup-deconvolution with the ground cost, with the supremum
//! taken over the class's own support only. The optimal coupling induces the
//! matching attack: each coupling tuple is solved locally and its transports
//! are scaled back to data units and accumulated per class.
//!
//! [`verify_saddle`] certifies the pair numerically: no random (or exact
//! best-response) learner deviation improves against the attack, no random
//! budget-feasible adversary deviation improves against the classifier, and
//! the value matches the certified optimum.

use std::collections::{BTreeMap, HashMap};

/// merged point accumulator keyed by exact coordinate bits
type PointAccumulator = BTreeMap<Vec<u64>, (Vec<f64>, f64)>;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::barycenter::{solve_generalized_barycenter, AttackSet, TransportPair};
use crate::cost::CostSpec;
use crate::lp::{solve_lp, LinearProgram, LpStatus};
use crate::measure::{LabeledMeasure, SubsetTable};
use crate::mot::{
    build_problem, solve_local_multiset, solve_sinkhorn, Coupling, MotProblem, MotSolution,
    ProjectedDuals, SolveMode,
};
use crate::{Error, Result};

/// Violation above which a potential bundle is rejected outright.
const PSI_REJECT_TOL: f64 = 1e-6;

/// Where a potential bundle's values came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PotentialSource {
    /// row duals of the exact MOT linear program
    ExactMot,
    /// projected multimarginal Sinkhorn potentials (approximate)
    Entropic,
    /// row duals of the exact generalized-barycenter linear program
    ExactBarycenter,
}

/// Per-class dual scores on the data support, the raw material of the
/// robust classifier.
#[derive(Debug, Clone)]
pub struct PotentialBundle {
    measure: LabeledMeasure,
    /// score per atom (atom order of the measure)
    psi: Vec<f64>,
    pub source: PotentialSource,
    /// worst grouping-constraint violation found during the feasibility scan
    pub max_violation: f64,
}

/// Classification of one query point.
#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    /// per-class scores in `[0,1]`, `-∞` when the class cannot reach the query
    pub scores: Vec<f64>,
    /// winning 1-based class, `0` = abstain (no class reaches the query)
    pub label: usize,
}

impl PotentialBundle {
    /// Builds the per-class support scores from feasible (projected) MOT
    /// duals and checks the grouping constraints, exhaustively when the
    /// tuple count allows and on 10^5 seeded random tuples otherwise.
    pub fn build_psi(
        problem: &MotProblem,
        duals: &ProjectedDuals,
        source: PotentialSource,
    ) -> Result<Self> {
        let ghost = problem.ghost.ghost();
        let ghost_sum: f64 = duals.potentials.iter().map(|phi| phi[ghost]).sum();
        let psi: Vec<f64> = (0..problem.measure.num_atoms())
            .map(|a| duals.potentials.iter().map(|phi| phi[a]).sum::<f64>() + ghost_sum)
            .collect();
        Self::with_psi(problem.measure.clone(), psi, &problem.spec, source)
    }

    /// Builds the bundle directly from the atom duals of the exact
    /// generalized-barycenter LP (they satisfy the same constraints).
    pub fn from_barycenter_duals(
        measure: &LabeledMeasure,
        atom_duals: &[f64],
        spec: &CostSpec,
    ) -> Result<Self> {
        Self::with_psi(
            measure.clone(),
            atom_duals.to_vec(),
            spec,
            PotentialSource::ExactBarycenter,
        )
    }

    fn with_psi(
        measure: LabeledMeasure,
        psi: Vec<f64>,
        spec: &CostSpec,
        source: PotentialSource,
    ) -> Result<Self> {
        let max_violation = check_feasibility(&measure, &psi, spec)?;
        if max_violation > PSI_REJECT_TOL {
            return Err(Error::DualsInfeasible {
                violation: max_violation,
            });
        }
        Ok(Self {
            measure,
            psi,
            source,
            max_violation,
        })
    }

    pub fn measure(&self) -> &LabeledMeasure {
        &self.measure
    }

    /// Raw score of one support atom.
    pub fn psi(&self, atom: usize) -> f64 {
        self.psi[atom]
    }

    /// Score clamped at zero (what the classifier uses).
    pub fn psi_plus(&self, atom: usize) -> f64 {
        self.psi[atom].max(0.0)
    }

    /// Scores the query against every class: the best reachable
    /// clamped support score minus the transport cost, kept in `[0, 1]`;
    /// `-∞` when the class has no finite-cost anchor. Ties go to the
    /// lowest class index; a query no class reaches abstains (label 0).
    pub fn classify(&self, spec: &CostSpec, query: &[f64]) -> Result<Classification> {
        if query.len() != self.measure.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.measure.dim(),
                got: query.len(),
            });
        }
        let k = self.measure.num_classes();
        let mut scores = vec![f64::NEG_INFINITY; k];
        for (a, p) in self.measure.points().iter().enumerate() {
            let c = spec.eval(&p.coords, query);
            if c.is_finite() {
                let s = self.psi_plus(a) - c;
                let slot = &mut scores[p.label - 1];
                if s > *slot {
                    *slot = s;
                }
            }
        }
        for s in &mut scores {
            if s.is_finite() {
                *s = s.clamp(0.0, 1.0);
            }
        }
        let mut label = 0;
        let mut best = f64::NEG_INFINITY;
        for (i, &s) in scores.iter().enumerate() {
            if s.is_finite() && s > best {
                best = s;
                label = i + 1;
            }
        }
        Ok(Classification { scores, label })
    }
}

/// Worst violation of `Σ_{i in A} psi_i(x_i) <= 1 + c_A` over class-subset
/// tuples; exhaustive when at most 10^6 tuples exist, sampled otherwise.
fn check_feasibility(measure: &LabeledMeasure, psi: &[f64], spec: &CostSpec) -> Result<f64> {
    let k = measure.num_classes();
    if k > 16 {
        return Err(Error::ClassCount(k));
    }
    let by_class = measure.atoms_by_class();
    let sizes: Vec<usize> = by_class.iter().map(|v| v.len()).collect();
    let total = crate::barycenter::column_bound(&sizes);
    let masks: Vec<u32> = if k >= 2 {
        SubsetTable::new(k)?.masks().to_vec()
    } else {
        vec![0b1]
    };
    let points = measure.points();
    let mut worst = f64::NEG_INFINITY;
    let mut check = |atoms: &[usize]| {
        let coords: Vec<&[f64]> = atoms.iter().map(|&a| points[a].coords.as_slice()).collect();
        let group = crate::cost::set_cost(spec, &coords);
        if group.value.is_finite() {
            let s: f64 = atoms.iter().map(|&a| psi[a]).sum();
            let v = s - 1.0 - group.value;
            if v > worst {
                worst = v;
            }
        }
    };
    if total <= 1_000_000 {
        for &mask in &masks {
            let classes = SubsetTable::members(mask);
            if classes.iter().any(|&i| by_class[i - 1].is_empty()) {
                continue;
            }
            let lists: Vec<&Vec<usize>> = classes.iter().map(|&i| &by_class[i - 1]).collect();
            let mut idx = vec![0usize; classes.len()];
            'tuples: loop {
                let atoms: Vec<usize> = idx.iter().zip(&lists).map(|(&i, l)| l[i]).collect();
                check(&atoms);
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
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(0x00f3_a51b);
        let nonempty: Vec<usize> = (0..k).filter(|&i| !by_class[i].is_empty()).collect();
        for _ in 0..100_000 {
            let mask_bits = 1 + rng.gen_range(0..(1u64 << nonempty.len()) - 1);
            let atoms: Vec<usize> = nonempty
                .iter()
                .enumerate()
                .filter(|(b, _)| mask_bits & (1 << b) != 0)
                .map(|(_, &i)| by_class[i][rng.gen_range(0..by_class[i].len())])
                .collect();
            if !atoms.is_empty() {
                check(&atoms);
            }
        }
    }
    Ok(worst.max(0.0))
}

/// Aggregates the optimal attack out of a coupling: every coupling tuple is
/// solved locally, and its transports are scaled by the tuple mass times
/// `2·mass(μ)` (undoing the marginal normalization) and accumulated.
///
/// The result conserves every class mass of the original measure.
pub fn build_attack(problem: &MotProblem, sol: &MotSolution) -> Result<AttackSet> {
    let measure = &problem.measure;
    let k = measure.num_classes();
    let scale_back = 2.0 * measure.total_mass();
    let n = measure.num_atoms();
    // atom lookup by (coords bits, label)
    let mut atom_index: HashMap<(Vec<u64>, usize), usize> = HashMap::new();
    for (a, p) in measure.points().iter().enumerate() {
        atom_index.insert((bits_key(&p.coords), p.label), a);
    }
    let mut local_cache: HashMap<Vec<u16>, crate::barycenter::LocalSolution> = HashMap::new();
    let mut atoms: Vec<PointAccumulator> = vec![BTreeMap::new(); k];
    let mut transports: BTreeMap<(usize, Vec<u64>, Vec<u64>), TransportPair> = BTreeMap::new();
    let mut absorb = |key: &Vec<u16>,
                      mass: f64,
                      local_cache: &mut HashMap<Vec<u16>, crate::barycenter::LocalSolution>|
     -> Result<()> {
        if mass <= 1e-13 {
            return Ok(());
        }
        if !local_cache.contains_key(key) {
            let local = solve_local_multiset(measure, key, problem.k, &problem.spec)?;
            local_cache.insert(key.clone(), local);
        }
        let local = &local_cache[key];
        for (class, src, dst, m) in &local.transports {
            let scaled = m * mass * scale_back;
            if scaled <= 0.0 {
                continue;
            }
            atoms[class - 1]
                .entry(bits_key(dst))
                .and_modify(|(_, t)| *t += scaled)
                .or_insert_with(|| (dst.clone(), scaled));
            let tkey = (*class, bits_key(src), bits_key(dst));
            transports
                .entry(tkey)
                .and_modify(|t| t.mass += scaled)
                .or_insert_with(|| TransportPair {
                    class: *class,
                    source_atom: atom_index.get(&(bits_key(src), *class)).copied(),
                    source: src.clone(),
                    target: dst.clone(),
                    mass: scaled,
                    unit_cost: problem.spec.eval(src, dst),
                });
        }
        Ok(())
    };
    match &sol.coupling {
        Coupling::Sparse(entries) => {
            for (tuple, mass) in entries {
                let mut key: Vec<u16> = tuple
                    .iter()
                    .copied()
                    .filter(|&t| (t as usize) < n)
                    .collect();
                key.sort_unstable();
                absorb(&key, *mass, &mut local_cache)?;
            }
        }
        Coupling::Dense(pi) => {
            let base = problem.ghost.len();
            let mut tuple = vec![0u16; problem.k];
            for &mass in pi.iter() {
                if mass > 1e-13 {
                    let mut key: Vec<u16> = tuple
                        .iter()
                        .copied()
                        .filter(|&t| (t as usize) < n)
                        .collect();
                    key.sort_unstable();
                    absorb(&key, mass, &mut local_cache)?;
                }
                advance_tuple(&mut tuple, base as u16);
            }
        }
    }
    Ok(AttackSet {
        atoms: atoms
            .into_iter()
            .map(|m| m.into_values().collect())
            .collect(),
        transports: transports.into_values().collect(),
    })
}

fn advance_tuple(tuple: &mut [u16], base: u16) -> bool {
    for slot in (0..tuple.len()).rev() {
        tuple[slot] += 1;
        if tuple[slot] < base {
            return true;
        }
        tuple[slot] = 0;
    }
    false
}

fn bits_key(coords: &[f64]) -> Vec<u64> {
    coords.iter().map(|c| c.to_bits()).collect()
}

/// A robust classifier together with the matching attack and its certified
/// game value.
#[derive(Debug, Clone)]
pub struct SaddlePair {
    pub bundle: PotentialBundle,
    pub attack: AttackSet,
    /// classification power of the classifier against the attack
    pub power_against_attack: f64,
    /// exact transport cost of the attack
    pub attack_cost: f64,
    /// certified optimal power (from the exact solver)
    pub certified_power: f64,
}

/// Builds classifier and attack from an exact MOT solution and evaluates
/// the pair.
pub fn build_saddle(problem: &MotProblem, sol: &MotSolution) -> Result<SaddlePair> {
    let duals = crate::mot::extract_duals(problem, sol);
    let source = match sol.mode {
        SolveMode::Exact => PotentialSource::ExactMot,
        SolveMode::Entropic { .. } => PotentialSource::Entropic,
    };
    let bundle = PotentialBundle::build_psi(problem, &duals, source)?;
    let attack = build_attack(problem, sol)?;
    let power_against_attack = classification_power(&bundle, &problem.spec, &attack)?;
    let attack_cost = attack_transport_cost(&problem.measure, &problem.spec, &attack)?;
    Ok(SaddlePair {
        bundle,
        attack,
        power_against_attack,
        attack_cost,
        certified_power: problem.power_from_value(sol.value),
    })
}

/// `B(f, μ̃)` for the classifier induced by a bundle: per-class integral of
/// the class score over the attack's class component.
pub fn classification_power(
    bundle: &PotentialBundle,
    spec: &CostSpec,
    attack: &AttackSet,
) -> Result<f64> {
    let mut total = 0.0;
    for (class_idx, class_atoms) in attack.atoms.iter().enumerate() {
        for (point, mass) in class_atoms {
            let c = bundle.classify(spec, point)?;
            let s = c.scores[class_idx];
            if s.is_finite() {
                total += mass * s;
            }
        }
    }
    Ok(total)
}

/// Exact optimal-transport cost of moving every class of `measure` onto the
/// attack's class components (a small transport LP per class; infinite-cost
/// pairs are omitted).
pub fn attack_transport_cost(
    measure: &LabeledMeasure,
    spec: &CostSpec,
    attack: &AttackSet,
) -> Result<f64> {
    let mut total = 0.0;
    for class in 1..=measure.num_classes() {
        let sources: Vec<(Vec<f64>, f64)> = measure
            .points()
            .iter()
            .filter(|p| p.label == class)
            .map(|p| (p.coords.clone(), p.weight))
            .collect();
        let targets = &attack.atoms[class - 1];
        if sources.is_empty() && targets.is_empty() {
            continue;
        }
        if sources.is_empty() != targets.is_empty() {
            return Err(Error::Internal(format!(
                "attack and measure disagree on support of class {class}"
            )));
        }
        total += ot_cost(spec, &sources, targets)?;
    }
    Ok(total)
}

/// Exact two-marginal transport cost between weighted point clouds.
///
/// The target cloud is rescaled to the source mass (guards tiny numerical
/// imbalance); an infeasible budget (no finite-cost matching) is an error.
pub fn ot_cost(spec: &CostSpec, from: &[(Vec<f64>, f64)], to: &[(Vec<f64>, f64)]) -> Result<f64> {
    let from_mass: f64 = from.iter().map(|(_, m)| m).sum();
    let to_mass: f64 = to.iter().map(|(_, m)| m).sum();
    if from_mass <= 0.0 || to_mass <= 0.0 {
        return Err(Error::ZeroMass);
    }
    let rescale = from_mass / to_mass;
    let mut rhs: Vec<f64> = from.iter().map(|(_, m)| *m).collect();
    rhs.extend(to.iter().map(|(_, m)| m * rescale));
    let mut lp = LinearProgram::new(from.len() + to.len(), rhs);
    for (i, (x, _)) in from.iter().enumerate() {
        for (j, (y, _)) in to.iter().enumerate() {
            let c = spec.eval(x, y);
            if c.is_finite() {
                lp.add_column(
                    vec![i as u32, j as u32],
                    c,
                    &[(i, 1.0), (from.len() + j, 1.0)],
                );
            }
        }
    }
    let sol = solve_lp(&lp)?;
    match sol.status {
        LpStatus::Optimal => Ok(sol.objective),
        other => Err(Error::LpFailure(format!(
            "transport LP not solvable ({other:?}): target outside the budget"
        ))),
    }
}

/// Best learner response to an attack: at every support point the largest
/// class mass is collected.
pub fn best_response_power(attack: &AttackSet) -> f64 {
    let mut per_point: BTreeMap<Vec<u64>, Vec<f64>> = BTreeMap::new();
    let k = attack.atoms.len();
    for (class_idx, class_atoms) in attack.atoms.iter().enumerate() {
        for (point, mass) in class_atoms {
            per_point
                .entry(bits_key(point))
                .or_insert_with(|| vec![0.0; k])[class_idx] += mass;
        }
    }
    per_point
        .values()
        .map(|masses| masses.iter().fold(0.0f64, |a, &b| a.max(b)))
        .sum()
}

/// Numeric saddle-verification report.
#[derive(Debug, Clone)]
pub struct SaddleReport {
    /// `B(f*, μ̃*) + C(μ, μ̃*)`
    pub value: f64,
    /// certified optimum it must match
    pub certified_power: f64,
    /// largest learner improvement found (incl. the exact best response)
    pub learner_gain: f64,
    /// smallest adversary slack found (negative would mean an improvement)
    pub adversary_slack: f64,
    pub trials: usize,
    pub seed: u64,
    pub failures: Vec<String>,
}

impl SaddleReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Verifies the saddle-point property of a classifier/attack pair built
/// from exact potentials.
///
/// (a) `trials` random probabilistic classifiers on the attack support,
/// plus the exact best response, must not beat the classifier by more than
/// `1e-8`; (b) `trials` random budget-feasible attacks must not undercut
/// the pair value by more than `1e-8` (transport costs are evaluated by
/// exact OT); (c) the pair value must match the certified optimum to `1e-6`.
pub fn verify_saddle(
    measure: &LabeledMeasure,
    spec: &CostSpec,
    pair: &SaddlePair,
    trials: usize,
    seed: u64,
) -> Result<SaddleReport> {
    if pair.bundle.source == PotentialSource::Entropic {
        return Err(Error::Config(
            "saddle verification requires exact potentials; entropic bundles are approximate"
                .into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = measure.num_classes();
    let saddle_value = pair.power_against_attack + pair.attack_cost;
    let mut failures = Vec::new();
    if (saddle_value - pair.certified_power).abs() > 1e-6 {
        failures.push(format!(
            "pair value {saddle_value} differs from certified power {}",
            pair.certified_power
        ));
    }

    // (a) learner deviations against the fixed attack
    let mut support: BTreeMap<Vec<u64>, Vec<f64>> = BTreeMap::new();
    for (class_idx, class_atoms) in pair.attack.atoms.iter().enumerate() {
        for (point, mass) in class_atoms {
            support
                .entry(bits_key(point))
                .or_insert_with(|| vec![0.0; k])[class_idx] += mass;
        }
    }
    let masses: Vec<&Vec<f64>> = support.values().collect();
    let mut learner_best = best_response_power(&pair.attack);
    for _ in 0..trials {
        let mut b = 0.0;
        for m in &masses {
            // uniform simplex sample
            let mut e: Vec<f64> = (0..k).map(|_| -(rng.gen::<f64>().ln())).collect();
            let s: f64 = e.iter().sum();
            e.iter_mut().for_each(|v| *v /= s);
            b += m.iter().zip(&e).map(|(mi, fi)| mi * fi).sum::<f64>();
        }
        learner_best = learner_best.max(b);
    }
    let learner_gain = learner_best - pair.power_against_attack;
    if learner_gain > 1e-8 {
        failures.push(format!(
            "learner deviation improves by {learner_gain:.3e} over the certified classifier"
        ));
    }

    // (b) adversary deviations against the fixed classifier
    let mut adversary_slack = f64::INFINITY;
    for _ in 0..trials {
        let attack = random_feasible_attack(measure, spec, &mut rng);
        let b = classification_power(&pair.bundle, spec, &attack)?;
        let c = attack_transport_cost(measure, spec, &attack)?;
        let slack = (b + c) - saddle_value;
        adversary_slack = adversary_slack.min(slack);
        if slack < -1e-8 {
            failures.push(format!(
                "adversary deviation improves by {:.3e} (attack value {} < saddle {})",
                -slack,
                b + c,
                saddle_value
            ));
            break;
        }
    }
    Ok(SaddleReport {
        value: saddle_value,
        certified_power: pair.certified_power,
        learner_gain,
        adversary_slack,
        trials,
        seed,
        failures,
    })
}

/// A random attack within the transport budget: every atom's mass is split
/// into a few chunks, each moved either to a random point of the atom's
/// budget ball or toward the midpoint with another atom (the adversarially
/// interesting targets). Power costs move by a Gaussian-ish step (every
/// target is feasible there).
pub fn random_feasible_attack(
    measure: &LabeledMeasure,
    spec: &CostSpec,
    rng: &mut ChaCha8Rng,
) -> AttackSet {
    let k = measure.num_classes();
    let dim = measure.dim();
    let points = measure.points();
    let mut atoms: Vec<PointAccumulator> = vec![BTreeMap::new(); k];
    let mut transports = Vec::new();
    for (a, p) in points.iter().enumerate() {
        let chunks = 1 + rng.gen_range(0..3usize);
        let mut splits: Vec<f64> = (0..chunks).map(|_| rng.gen::<f64>() + 0.1).collect();
        let s: f64 = splits.iter().sum();
        splits.iter_mut().for_each(|v| *v *= p.weight / s);
        for &mass in &splits {
            let target = match *spec {
                CostSpec::Ball { epsilon, .. } => {
                    if rng.gen::<f64>() < 0.5 && points.len() > 1 {
                        // midpoint move toward another atom, projected into
                        // the budget ball
                        let other = &points[rng.gen_range(0..points.len())];
                        let mid: Vec<f64> = p
                            .coords
                            .iter()
                            .zip(&other.coords)
                            .map(|(x, y)| 0.5 * (x + y))
                            .collect();
                        clamp_into_ball(&p.coords, &mid, epsilon, spec)
                    } else {
                        let dir: Vec<f64> =
                            (0..dim).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
                        let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-12);
                        let r = epsilon * rng.gen::<f64>().powf(1.0 / dim.max(1) as f64);
                        let cand: Vec<f64> = p
                            .coords
                            .iter()
                            .zip(&dir)
                            .map(|(x, d)| x + r * d / norm)
                            .collect();
                        clamp_into_ball(&p.coords, &cand, epsilon, spec)
                    }
                }
                CostSpec::Power { tau, .. } => p
                    .coords
                    .iter()
                    .map(|x| x + (rng.gen::<f64>() - 0.5) * tau.sqrt())
                    .collect(),
            };
            atoms[p.label - 1]
                .entry(bits_key(&target))
                .and_modify(|(_, m)| *m += mass)
                .or_insert_with(|| (target.clone(), mass));
            transports.push(TransportPair {
                class: p.label,
                source_atom: Some(a),
                source: p.coords.clone(),
                target,
                mass,
                unit_cost: 0.0,
            });
        }
    }
    let mut set = AttackSet {
        atoms: atoms
            .into_iter()
            .map(|m| m.into_values().collect())
            .collect(),
        transports,
    };
    crate::barycenter::price_transports(spec, &mut set.transports);
    set
}

fn clamp_into_ball(center: &[f64], cand: &[f64], epsilon: f64, spec: &CostSpec) -> Vec<f64> {
    if spec.eval(center, cand) == 0.0 {
        return cand.to_vec();
    }
    let metric = spec.metric();
    let d = metric.dist(center, cand).max(1e-12);
    let t = (epsilon / d) * (1.0 - 1e-12);
    center
        .iter()
        .zip(cand)
        .map(|(c, x)| c + t * (x - c))
        .collect()
}

/// Risk computation mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RiskMode {
    /// exact generalized-barycenter LP
    Exact,
    /// entropic MOT bound (power is over-, risk under-estimated)
    Sinkhorn { eta: f64, tol: f64, max_iter: usize },
}

/// Risk report: optimal classification power and adversarial risk.
#[derive(Debug, Clone)]
pub struct RiskReport {
    pub power: f64,
    pub risk: f64,
    pub exact: bool,
    /// entropic diagnostics when applicable
    pub iterations: usize,
    pub marginal_residual: f64,
    pub converged: bool,
}

/// Optimal adversarial risk `mass(μ) - power` with the power computed by
/// the chosen mode. Entropic mode over-estimates the power, hence
/// under-estimates (lower-bounds) the risk.
pub fn adversarial_risk(
    measure: &LabeledMeasure,
    spec: &CostSpec,
    mode: RiskMode,
) -> Result<RiskReport> {
    let mass = measure.total_mass();
    match mode {
        RiskMode::Exact => {
            let sol = solve_generalized_barycenter(measure, spec)?;
            Ok(RiskReport {
                power: sol.value,
                risk: mass - sol.value,
                exact: true,
                iterations: 0,
                marginal_residual: 0.0,
                converged: true,
            })
        }
        RiskMode::Sinkhorn { eta, tol, max_iter } => {
            let problem = build_problem(measure, spec)?;
            let sol = solve_sinkhorn(&problem, eta, tol, max_iter)?;
            let power = problem.power_from_value(sol.value);
            Ok(RiskReport {
                power,
                risk: mass - power,
                exact: false,
                iterations: sol.iterations,
                marginal_residual: sol.marginal_residual,
                converged: sol.converged,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::Metric;
    use crate::measure::LabeledPoint;
    use crate::mot::solve_exact;

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

    fn binary_separated() -> LabeledMeasure {
        LabeledMeasure::new(vec![pt(&[0.0, 0.0], 1, 0.5), pt(&[5.0, 0.0], 2, 0.5)], 2).unwrap()
    }

    fn binary_close() -> LabeledMeasure {
        LabeledMeasure::new(vec![pt(&[0.0, 0.0], 1, 0.5), pt(&[1.0, 0.0], 2, 0.5)], 2).unwrap()
    }

    #[test]
    fn zero_duals_give_zero_psi() {
        let m = binary_close();
        let spec = ball(1.0);
        let problem = build_problem(&m, &spec).unwrap();
        let duals = ProjectedDuals {
            potentials: vec![vec![0.0; 3]; 2],
            shift: 0.0,
            objective: 0.0,
            max_violation: 0.0,
        };
        let bundle =
            PotentialBundle::build_psi(&problem, &duals, PotentialSource::ExactMot).unwrap();
        assert_eq!(bundle.psi(0), 0.0);
        assert_eq!(bundle.max_violation, 0.0);
    }

    #[test]
    fn separated_binary_classifier_recovers_classes() {
        let m = binary_separated();
        let spec = ball(1.0);
        let problem = build_problem(&m, &spec).unwrap();
        let sol = solve_exact(&problem).unwrap();
        // power = total mass: no meaningful attack
        assert!((problem.power_from_value(sol.value) - 1.0).abs() < 1e-9);
        let pair = build_saddle(&problem, &sol).unwrap();
        // query at the first atom: class 1 with full confidence, class 2 out
        // of reach
        let c = pair.bundle.classify(&spec, &[0.0, 0.0]).unwrap();
        assert_eq!(c.label, 1);
        assert!((c.scores[0] - 1.0).abs() < 1e-9);
        assert_eq!(c.scores[1], f64::NEG_INFINITY);
        // off-support query beyond every budget ball abstains
        let far = pair.bundle.classify(&spec, &[50.0, 50.0]).unwrap();
        assert_eq!(far.label, 0);
    }

    #[test]
    fn tie_breaks_to_lowest_class() {
        let m = binary_close();
        let spec = ball(1.0);
        let problem = build_problem(&m, &spec).unwrap();
        let sol = solve_exact(&problem).unwrap();
        let pair = build_saddle(&problem, &sol).unwrap();
        // the midpoint is reachable from both atoms; symmetric weights give
        // symmetric scores, the tie resolves to class 1
        let c = pair.bundle.classify(&spec, &[0.5, 0.0]).unwrap();
        assert!((c.scores[0] - c.scores[1]).abs() < 1e-9);
        assert_eq!(c.label, 1);
    }

    #[test]
    fn attack_conserves_class_masses() {
        let m = binary_close();
        let spec = ball(1.0);
        let problem = build_problem(&m, &spec).unwrap();
        let sol = solve_exact(&problem).unwrap();
        let attack = build_attack(&problem, &sol).unwrap();
        for class in 1..=2 {
            assert!(
                (attack.class_mass(class) - m.class_mass(class)).abs() < 1e-8,
                "class {class} mass mismatch"
            );
        }
        // both classes collapse onto the shared midpoint
        assert_eq!(attack.atoms[0].len(), 1);
        let (point, _) = &attack.atoms[0][0];
        assert!((point[0] - 0.5).abs() < 1e-9 && point[1].abs() < 1e-9);
        // budget feasibility
        for t in &attack.transports {
            assert!(spec.eval(&t.source, &t.target).is_finite());
        }
    }

    #[test]
    fn saddle_verifies_on_binary_instance() {
        let m = binary_close();
        let spec = ball(1.0);
        let problem = build_problem(&m, &spec).unwrap();
        let sol = solve_exact(&problem).unwrap();
        let pair = build_saddle(&problem, &sol).unwrap();
        let report = verify_saddle(&m, &spec, &pair, 300, 7).unwrap();
        assert!(report.passed(), "failures: {:?}", report.failures);
        assert!((report.value - 0.5).abs() < 1e-6);
    }

    #[test]
    fn entropic_bundle_is_refused_by_the_verifier() {
        let m = binary_close();
        let spec = ball(1.0);
        let problem = build_problem(&m, &spec).unwrap();
        let sk = solve_sinkhorn(&problem, 0.1, 1e-7, 20_000).unwrap();
        let pair = build_saddle(&problem, &sk).unwrap();
        assert!(verify_saddle(&m, &spec, &pair, 10, 1).is_err());
    }

    #[test]
    fn risk_modes_agree_directionally() {
        let m = binary_close();
        let spec = ball(1.0);
        let exact = adversarial_risk(&m, &spec, RiskMode::Exact).unwrap();
        assert!((exact.risk - 0.5).abs() < 1e-8);
        let entropic = adversarial_risk(
            &m,
            &spec,
            RiskMode::Sinkhorn {
                eta: 0.1,
                tol: 1e-7,
                max_iter: 20_000,
            },
        )
        .unwrap();
        // entropic risk is a lower bound
        assert!(entropic.risk <= exact.risk + 1e-9);
    }

    #[test]
    fn risk_at_zero_budget_is_bayes_risk() {
        // distinct atoms: zero budget means zero risk
        let m = binary_separated();
        let spec = ball(0.0);
        let r = adversarial_risk(&m, &spec, RiskMode::Exact).unwrap();
        assert!(r.risk.abs() < 1e-10);
        // co-located atoms of different classes: Bayes risk of the mixture
        let m2 = LabeledMeasure::new(
            vec![
                pt(&[0.0, 0.0], 1, 0.4),
                pt(&[0.0, 0.0], 2, 0.25),
                pt(&[1.0, 0.0], 2, 0.35),
            ],
            2,
        )
        .unwrap();
        let r2 = adversarial_risk(&m2, &spec, RiskMode::Exact).unwrap();
        // at the shared point the learner keeps max(0.4, 0.25)
        assert!((r2.risk - 0.25).abs() < 1e-10);
    }

    #[test]
    fn zero_budget_labels_atoms_by_their_own_class() {
        let m = LabeledMeasure::new(
            vec![
                pt(&[0.0, 0.0], 1, 0.5),
                pt(&[1.0, 0.0], 2, 0.3),
                pt(&[0.0, 1.0], 3, 0.2),
            ],
            3,
        )
        .unwrap();
        let spec = ball(0.0);
        let sol = solve_generalized_barycenter(&m, &spec).unwrap();
        let bundle = PotentialBundle::from_barycenter_duals(&m, &sol.atom_duals, &spec).unwrap();
        for p in m.points() {
            let c = bundle.classify(&spec, &p.coords).unwrap();
            assert_eq!(c.label, p.label, "atom {:?}", p.coords);
        }
    }

    #[test]
    fn reconstructed_attacks_are_optimal_for_the_adversary() {
        // under a ball cost an attack is optimal iff the learner's best
        // response recovers exactly the optimal power; grouping plans are
        // not unique, so this is the right certificate (not atom equality)
        for case in crate::cases::standard_cases() {
            let m = crate::cases::toy_measure(&case).unwrap();
            let spec = ball(case.epsilon);
            let sol = solve_generalized_barycenter(&m, &spec).unwrap();
            let best = best_response_power(&sol.attacks);
            assert!(
                (best - sol.value).abs() < 1e-9,
                "{:?}: best response {best} vs optimal power {}",
                case.id,
                sol.value
            );
        }
    }

    #[test]
    fn barycenter_duals_build_a_bundle() {
        let m = binary_close();
        let spec = ball(1.0);
        let sol = solve_generalized_barycenter(&m, &spec).unwrap();
        let bundle = PotentialBundle::from_barycenter_duals(&m, &sol.atom_duals, &spec).unwrap();
        assert!(bundle.max_violation <= 1e-9);
        let c = bundle.classify(&spec, &[0.5, 0.0]).unwrap();
        assert!(c.label > 0);
    }

    #[test]
    fn classify_rejects_wrong_dimension() {
        let m = binary_close();
        let spec = ball(1.0);
        let sol = solve_generalized_barycenter(&m, &spec).unwrap();
        let bundle = PotentialBundle::from_barycenter_duals(&m, &sol.atom_duals, &spec).unwrap();
        assert!(matches!(
            bundle.classify(&spec, &[0.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn label_scale_invariance() {
        let m = LabeledMeasure::new(
            vec![
                pt(&[0.0, 0.0], 1, 0.5),
                pt(&[1.1, 0.0], 2, 0.3),
                pt(&[0.0, 1.3], 3, 0.2),
            ],
            3,
        )
        .unwrap();
        let spec = ball(0.8);
        let queries = [[0.3, 0.2], [0.9, 0.1], [0.1, 0.9], [0.5, 0.5]];
        let base = solve_generalized_barycenter(&m, &spec).unwrap();
        let base_bundle =
            PotentialBundle::from_barycenter_duals(&m, &base.atom_duals, &spec).unwrap();
        let scaled_m = m.scaled(3.0).unwrap();
        let scaled = solve_generalized_barycenter(&scaled_m, &spec).unwrap();
        // duals scale with the measure; labels must not change
        let scaled_psi: Vec<f64> = scaled.atom_duals.iter().map(|d| d / 3.0).collect();
        let scaled_bundle =
            PotentialBundle::from_barycenter_duals(&scaled_m, &scaled_psi, &spec).unwrap();
        for q in &queries {
            let a = base_bundle.classify(&spec, q).unwrap();
            let b = scaled_bundle.classify(&spec, q).unwrap();
            assert_eq!(a.label, b.label);
        }
    }
}
