//! Non-monotone maximisation under a uniform matroid, exactly fair.

use std::sync::Arc;

use rand::seq::IndexedRandom;

use crate::analysis::min_inf_norm_uniform;
use crate::error::{FmsmError, Result};
use crate::instance::Instance;
use crate::matroid::{color_upper, ExtendableFair, MatroidRef, Uniform};
use crate::seed::{derive_seed, rng_for};
use crate::set::{complement, normalize};

use super::hartley::hartley_sample;
use super::report::{Guarantee, SolveReport, SolverName};
use super::{fresh, SubSolver};

/// Direct side: maximise over sets that extend to a fair set of size `≤ k`,
/// then top up each colour to `ℓ_c` with uniformly random elements.
fn direct(inst: &Instance, sub: &SubSolver, k: usize, seed: u64) -> Result<Vec<usize>> {
    let n = inst.n();
    let extendable: MatroidRef = Arc::new(ExtendableFair::new(
        inst.colors().to_vec(),
        inst.lower().to_vec(),
        inst.upper().to_vec(),
        k,
    )?);
    let free: MatroidRef = Arc::new(Uniform::free(n));
    let mut s = sub.run(
        &extendable,
        &free,
        inst.objective(),
        derive_seed(seed, &[0]),
    )?;
    let mut rng = rng_for(seed, &[1]);
    let counts = inst.color_counts(&s);
    for (c, group) in inst.color_groups().iter().enumerate() {
        let missing = inst.lower()[c].saturating_sub(counts[c]);
        let pool: Vec<usize> = group.iter().copied().filter(|e| !s.contains(e)).collect();
        s.extend(pool.choose_multiple(&mut rng, missing).copied());
    }
    Ok(normalize(s))
}

/// Complement side: maximise `f̄` under `|S ∩ V_c| ≤ |V_c| − ℓ_c`, extend
/// each colour to at least `|B_c|` elements drawn by systematic sampling
/// from the minimum-norm point of `1 − P_F`, and return `V ∖ S⁺`.
fn complement_side(
    inst: &Instance,
    sub: &SubSolver,
    xbar: &[f64],
    seed: u64,
) -> Result<Vec<usize>> {
    let n = inst.n();
    let caps: Vec<usize> = inst
        .color_groups()
        .iter()
        .zip(inst.lower())
        .map(|(g, &l)| g.len() - l)
        .collect();
    let partition: MatroidRef = Arc::new(color_upper(inst.colors(), &caps)?);
    let free: MatroidRef = Arc::new(Uniform::free(n));
    let fbar = inst.objective().complement();
    let mut s = sub.run(&partition, &free, &fbar, derive_seed(seed, &[2]))?;
    let samples = hartley_sample(xbar, inst.colors(), derive_seed(seed, &[3]))?;
    let counts = inst.color_counts(&s);
    for (c, b) in samples.iter().enumerate() {
        let missing = b.len().saturating_sub(counts[c]);
        let extra: Vec<usize> = b
            .iter()
            .copied()
            .filter(|e| !s.contains(e))
            .take(missing)
            .collect();
        s.extend(extra);
    }
    Ok(complement(n, &normalize(s)))
}

/// Runs both sides and keeps the better feasible set. The guarantee target
/// is `α̂·(1 − r)`.
pub fn uniform_nonmonotone(inst: &Instance, sub: &SubSolver, seed: u64) -> Result<SolveReport> {
    let k = inst
        .uniform_rank()
        .ok_or_else(|| FmsmError::Config("uniform-nonmonotone needs a uniform matroid".into()))?;
    sub.check()?;
    let inst = fresh(inst)?;
    let norm = min_inf_norm_uniform(&inst)?;
    let a = direct(&inst, sub, k, seed)?;
    let b = complement_side(&inst, sub, &norm.witness_comp, seed)?;
    for (name, s) in [("direct", &a), ("complement", &b)] {
        if !inst.is_feasible(s) {
            return Err(FmsmError::Numerical(format!(
                "{name} branch produced an infeasible set {s:?}"
            )));
        }
    }
    let (va, vb) = (inst.objective().value(&a), inst.objective().value(&b));
    let (solution, branch) = if vb > va {
        (b, "complement")
    } else {
        (a, "direct")
    };
    let mut g = Guarantee::new("alpha_hat * (1 - r)");
    g.alpha_hat = sub.alpha_hat;
    g.r = Some(norm.r);
    g.target = sub.alpha_hat.map(|al| al * (1.0 - norm.r));
    let floors = inst.lower().to_vec();
    let mut report = SolveReport::build(
        SolverName::UniformNonmonotone,
        &inst,
        solution,
        &floors,
        g,
        Some(seed),
    );
    report.branch = Some(branch.into());
    Ok(report)
}
