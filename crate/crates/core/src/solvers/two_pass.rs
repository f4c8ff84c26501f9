//! Two-pass solvers built on a fair reservoir set.

use std::sync::Arc;

use rand::seq::SliceRandom;

use crate::error::{FmsmError, Result};
use crate::instance::{feasible_witness, Instance};
use crate::matroid::{
    color_upper, greedy_base, max_cardinality_intersection, ContractedExtension, MatroidRef,
    Partition, Restricted,
};
use crate::seed::{derive_seed, rng_for};
use crate::set::normalize;

use super::report::{Guarantee, PassAudit, SolveReport, SolverName};
use super::{fresh, SubSolver};

/// A feasible set assembled from per-colour greedy bases.
///
/// For every colour a maximal independent subset of `V_c` is built greedily
/// in index order; a largest subset of their union that is independent and
/// has at most `ℓ_c` elements of each colour is then taken. If that set
/// misses some lower bound, an exact intersection over the whole ground set
/// is used instead.
pub fn fair_reservoir(inst: &Instance) -> Result<Vec<usize>> {
    let mut pool = Vec::new();
    for group in inst.color_groups() {
        let within = Restricted::new(inst.matroid().clone(), group);
        pool.extend(greedy_base(&within, group.iter().copied()));
    }
    let pool = normalize(pool);
    let lower_caps = Partition::from_labels(inst.colors(), inst.lower().to_vec())?;
    let restricted = Restricted::new(inst.matroid().clone(), &pool);
    let s = max_cardinality_intersection(&restricted, &lower_caps)?;
    if inst.is_feasible(&s) {
        return Ok(s);
    }
    feasible_witness(inst)?.ok_or_else(|| {
        FmsmError::Infeasible("no set satisfies the matroid and fairness constraints".into())
    })
}

/// `⌊β·ℓ⌋`, robust to products that land a hair below an integer.
pub fn beta_floor(beta: f64, lower: usize) -> usize {
    (beta * lower as f64 + 1e-9).floor() as usize
}

/// `S'` from `R` by adding elements of `protected` (ascending) while their
/// colour stays below its upper bound.
fn fill(inst: &Instance, sub_solution: &[usize], protected: &[usize]) -> Vec<usize> {
    let mut counts = inst.color_counts(sub_solution);
    let mut out = sub_solution.to_vec();
    for &e in protected {
        let c = inst.colors()[e];
        if !out.contains(&e) && counts[c] < inst.upper()[c] {
            out.push(e);
            counts[c] += 1;
        }
    }
    normalize(out)
}

fn run_passes(
    inst: &Instance,
    protected: [Vec<usize>; 2],
    sub: &SubSolver,
    seed: u64,
) -> Result<(Vec<usize>, Vec<PassAudit>)> {
    let upper: MatroidRef = Arc::new(color_upper(inst.colors(), inst.upper())?);
    let f = inst.objective();
    let mut passes = Vec::with_capacity(2);
    for (i, s_i) in protected.into_iter().enumerate() {
        let contracted: MatroidRef = Arc::new(ContractedExtension::new(
            inst.matroid().clone(),
            s_i.clone(),
        )?);
        let r = sub.run(&upper, &contracted, f, derive_seed(seed, &[1, i as u64]))?;
        let filled = fill(inst, &r, &s_i);
        passes.push(PassAudit {
            sub_value: f.value(&r),
            value: f.value(&filled),
            protected: s_i,
            sub_solution: r,
            filled,
        });
    }
    let best = if passes[1].value > passes[0].value {
        1
    } else {
        0
    };
    Ok((passes[best].filled.clone(), passes))
}

fn alpha_target(g: &mut Guarantee, sub: &SubSolver, scale: f64) {
    g.alpha_hat = sub.alpha_hat;
    g.target = sub.alpha_hat.map(|a| a * scale);
}

/// Two passes with randomly drawn protected sets of `⌊βℓ_c⌋` elements per
/// colour. The output is independent, respects every upper bound and holds
/// at least `⌊βℓ_c⌋` elements of colour `c`.
pub fn two_pass_nonmonotone(
    inst: &Instance,
    beta: f64,
    sub: &SubSolver,
    seed: u64,
) -> Result<SolveReport> {
    if !(0.0..=0.5).contains(&beta) {
        return Err(FmsmError::Argument(format!(
            "beta must lie in [0, 1/2], got {beta}"
        )));
    }
    sub.check()?;
    let inst = fresh(inst)?;
    let s = fair_reservoir(&inst)?;
    let mut rng = rng_for(seed, &[0]);
    let mut protected = [Vec::new(), Vec::new()];
    let mut floors = Vec::with_capacity(inst.num_colors());
    for (c, group) in inst.color_groups().iter().enumerate() {
        let mut mine: Vec<usize> = s.iter().copied().filter(|e| group.contains(e)).collect();
        mine.shuffle(&mut rng);
        let b = beta_floor(beta, inst.lower()[c]);
        protected[0].extend_from_slice(&mine[..b]);
        protected[1].extend_from_slice(&mine[b..2 * b]);
        floors.push(b);
    }
    let protected = protected.map(normalize);
    let (solution, passes) = run_passes(&inst, protected, sub, seed)?;
    let mut g = Guarantee::new("(1 - beta) * alpha_hat / 2");
    g.beta = Some(beta);
    alpha_target(&mut g, sub, (1.0 - beta) / 2.0);
    let mut report = SolveReport::build(
        SolverName::TwoPassNonmonotone,
        &inst,
        solution,
        &floors,
        g,
        Some(seed),
    );
    report.passes = passes;
    Ok(report)
}

/// Two passes with the reservoir set split deterministically: per colour,
/// the first `⌈|S ∩ V_c|/2⌉` elements in index order are protected in the
/// first pass and the rest in the second. The output holds at least
/// `⌊ℓ_c/2⌋` elements of colour `c`.
pub fn two_pass_monotone(inst: &Instance, sub: &SubSolver) -> Result<SolveReport> {
    if !inst.objective().is_monotone() {
        return Err(FmsmError::Config(
            "two-pass monotone solver needs a monotone objective".into(),
        ));
    }
    sub.check()?;
    let inst = fresh(inst)?;
    let s = fair_reservoir(&inst)?;
    let mut protected = [Vec::new(), Vec::new()];
    for group in inst.color_groups() {
        let mine: Vec<usize> = s.iter().copied().filter(|e| group.contains(e)).collect();
        let half = mine.len().div_ceil(2);
        protected[0].extend_from_slice(&mine[..half]);
        protected[1].extend_from_slice(&mine[half..]);
    }
    let floors: Vec<usize> = inst.lower().iter().map(|l| l / 2).collect();
    let (solution, passes) = run_passes(&inst, protected, sub, 0)?;
    let mut g = Guarantee::new("alpha_hat / 2");
    alpha_target(&mut g, sub, 0.5);
    let mut report = SolveReport::build(
        SolverName::TwoPassMonotone,
        &inst,
        solution,
        &floors,
        g,
        None,
    );
    report.passes = passes;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::Summary;
    use crate::instance::{
        gen_integrality_gap, gen_random, uniform_instance, MatroidKind, ObjectiveKind,
        ObjectiveSpec, RandomParams,
    };

    fn modular(n: usize) -> ObjectiveSpec {
        ObjectiveSpec::Modular {
            weights: (1..=n).map(|w| w as f64).collect(),
        }
    }

    #[test]
    fn reservoir_examples() {
        let inst =
            uniform_instance(2, vec![0, 0, 1, 1], vec![1, 1], vec![1, 2], modular(4)).unwrap();
        let s = fair_reservoir(&inst).unwrap();
        assert_eq!(inst.color_counts(&s), vec![1, 1]);
        assert!(inst.is_feasible(&s));

        let free =
            uniform_instance(2, vec![0, 0, 1, 1], vec![0, 0], vec![2, 2], modular(4)).unwrap();
        assert!(free.is_feasible(&fair_reservoir(&free).unwrap()));

        let gap = gen_integrality_gap(2, 1).unwrap();
        let s = fair_reservoir(&gap).unwrap();
        assert!(gap.is_feasible(&s));
        assert_eq!(s.len(), gap.num_colors());
    }

    #[test]
    fn reservoir_on_random_instances() {
        for seed in 0..40 {
            let p = RandomParams::new(10, 3, MatroidKind::Partition, ObjectiveKind::Coverage);
            let inst = gen_random(p, seed).unwrap();
            assert!(inst.is_feasible(&fair_reservoir(&inst).unwrap()));
        }
    }

    #[test]
    fn beta_out_of_range() {
        let inst =
            uniform_instance(2, vec![0, 0, 1, 1], vec![1, 1], vec![1, 2], modular(4)).unwrap();
        let sub = SubSolver::local_search(1, 0.0, true);
        assert!(matches!(
            two_pass_nonmonotone(&inst, 0.6, &sub, 0),
            Err(FmsmError::Argument(_))
        ));
        assert!(matches!(
            two_pass_nonmonotone(&inst, -0.1, &sub, 0),
            Err(FmsmError::Argument(_))
        ));
    }

    #[test]
    fn half_beta_floor_of_three() {
        let colors = vec![0, 0, 0, 0, 1, 1, 1, 1];
        let inst = uniform_instance(7, colors, vec![3, 3], vec![4, 4], modular(8)).unwrap();
        let r =
            two_pass_nonmonotone(&inst, 0.5, &SubSolver::local_search(1, 0.0, true), 9).unwrap();
        assert!(r.colors.iter().all(|c| c.floor == 1));
        assert!(r.within_floors() && r.independent);
        r.verify_audit(&inst).unwrap();
        assert_eq!(beta_floor(0.29, 100), 29);
    }

    #[test]
    fn zero_beta_has_empty_protected_sets() {
        let inst =
            uniform_instance(3, vec![0, 0, 1, 1, 1], vec![1, 1], vec![2, 2], modular(5)).unwrap();
        let r =
            two_pass_nonmonotone(&inst, 0.0, &SubSolver::local_search(1, 0.0, true), 1).unwrap();
        assert!(r.passes.iter().all(|p| p.protected.is_empty()));
        assert!(r.independent && r.colors.iter().all(|c| c.meets_upper));
    }

    #[test]
    fn monotone_split_halves_each_color() {
        let colors = vec![0, 0, 0, 1, 1, 1];
        let inst = uniform_instance(4, colors, vec![2, 2], vec![3, 3], modular(6)).unwrap();
        let r = two_pass_monotone(&inst, &SubSolver::local_search(1, 0.0, false)).unwrap();
        for p in &r.passes {
            assert_eq!(inst.color_counts(&p.protected), vec![1, 1]);
        }
        assert!(r.within_floors() && r.independent);
        let cut = uniform_instance(
            2,
            vec![0, 1],
            vec![0, 0],
            vec![1, 1],
            ObjectiveSpec::GraphCut { edges: vec![] },
        )
        .unwrap();
        assert!(matches!(
            two_pass_monotone(&cut, &SubSolver::random_greedy()),
            Err(FmsmError::Config(_))
        ));
    }

    #[test]
    fn monotone_zero_lower_bounds_are_feasible() {
        let inst =
            uniform_instance(3, vec![0, 1, 0, 1], vec![0, 0], vec![2, 2], modular(4)).unwrap();
        let r = two_pass_monotone(&inst, &SubSolver::local_search(1, 0.0, false)).unwrap();
        assert!(r.feasible);
    }

    #[test]
    fn reservoir_audit_on_random_instances() {
        for seed in 0..30 {
            let p = RandomParams::new(9, 3, MatroidKind::Partition, ObjectiveKind::GraphCut);
            let inst = gen_random(p, seed).unwrap();
            let r = two_pass_nonmonotone(&inst, 0.5, &SubSolver::random_greedy(), seed).unwrap();
            assert!(
                r.independent && r.within_floors(),
                "seed {seed}: {:?}",
                r.colors
            );
            r.verify_audit(&inst).unwrap();
        }
    }

    #[test]
    fn protected_elements_cost_at_most_beta_fraction() {
        let p = RandomParams::new(10, 2, MatroidKind::Uniform, ObjectiveKind::GraphCut);
        let inst = gen_random(p, 5).unwrap();
        let beta = 0.5;
        let sub = SubSolver::local_search(1, 0.0, true);
        let mut diffs = [Vec::new(), Vec::new()];
        for seed in 0..60 {
            let r = two_pass_nonmonotone(&inst, beta, &sub, seed).unwrap();
            for (i, p) in r.passes.iter().enumerate() {
                diffs[i].push(p.value - (1.0 - beta) * p.sub_value);
            }
        }
        for d in &diffs {
            let s = Summary::of(d);
            assert!(s.mean >= -3.0 * s.stderr(), "{s:?}");
        }
    }
}
