//! Pluggable routines that maximise a submodular function over the
//! intersection of two matroids.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{FmsmError, Result};
use crate::matroid::{max_cardinality_intersection, Matroid, MatroidRef, Restricted};
use crate::objective::SubmodularOracle;
use crate::seed::{derive_seed, rng_for};
use crate::set::{complement, difference, normalize, Combinations};

/// Local search stops after this many accepted moves.
pub const LOCAL_SEARCH_ITERATIONS: usize = 1000;

/// Gains at or below this are treated as zero.
const MIN_GAIN: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SubSolverKind {
    /// Greedy construction followed by add/delete/swap moves touching at
    /// most `swap_size` elements on each side. With `nonmonotone` set, pure
    /// deletions are allowed and a second run on the leftover elements is
    /// kept if it is better.
    LocalSearch {
        swap_size: usize,
        epsilon: f64,
        nonmonotone: bool,
    },
    /// Each step picks uniformly among the `r` best marginal gains, where
    /// `r` is the common rank; non-positive gains count as empty picks.
    RandomGreedy,
}

/// A sub-solver together with its measured approximation ratio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubSolver {
    pub kind: SubSolverKind,
    /// Empirical ratio measured by [`super::calibrate`]; `None` leaves the
    /// guarantee target unreported.
    pub alpha_hat: Option<f64>,
}

impl SubSolver {
    pub fn local_search(swap_size: usize, epsilon: f64, nonmonotone: bool) -> Self {
        SubSolver {
            kind: SubSolverKind::LocalSearch {
                swap_size,
                epsilon,
                nonmonotone,
            },
            alpha_hat: None,
        }
    }

    pub fn random_greedy() -> Self {
        SubSolver {
            kind: SubSolverKind::RandomGreedy,
            alpha_hat: None,
        }
    }

    pub fn with_alpha(mut self, alpha_hat: f64) -> Self {
        self.alpha_hat = Some(alpha_hat);
        self
    }

    /// Handles non-monotone objectives.
    pub fn is_nonmonotone(&self) -> bool {
        match self.kind {
            SubSolverKind::LocalSearch { nonmonotone, .. } => nonmonotone,
            SubSolverKind::RandomGreedy => true,
        }
    }

    pub fn check(&self) -> Result<()> {
        if let SubSolverKind::LocalSearch { epsilon, .. } = self.kind {
            if !(epsilon >= 0.0 && epsilon.is_finite()) {
                return Err(FmsmError::Config(format!(
                    "local search epsilon must be >= 0, got {epsilon}"
                )));
            }
        }
        if let Some(a) = self.alpha_hat {
            if !(0.0..=1.0).contains(&a) {
                return Err(FmsmError::Config(format!(
                    "measured ratio must lie in [0, 1], got {a}"
                )));
            }
        }
        Ok(())
    }

    /// Runs the routine on `m1 ∩ m2`. The result is independent in both.
    pub fn run(
        &self,
        m1: &MatroidRef,
        m2: &MatroidRef,
        f: &SubmodularOracle,
        seed: u64,
    ) -> Result<Vec<usize>> {
        self.check()?;
        let n = f.ground_size();
        if m1.ground_size() != n || m2.ground_size() != n {
            return Err(FmsmError::Argument(
                "matroids and objective have different ground sets".into(),
            ));
        }
        match self.kind {
            SubSolverKind::LocalSearch {
                swap_size,
                epsilon,
                nonmonotone,
            } => {
                let first =
                    two_matroid_local_search(m1, m2, f, swap_size, epsilon, nonmonotone, seed);
                if !nonmonotone {
                    return Ok(first);
                }
                let rest = complement(n, &first);
                let r1: MatroidRef = Arc::new(Restricted::new(m1.clone(), &rest));
                let second = two_matroid_local_search(
                    &r1,
                    m2,
                    f,
                    swap_size,
                    epsilon,
                    true,
                    derive_seed(seed, &[1]),
                );
                Ok(if f.value(&second) > f.value(&first) {
                    second
                } else {
                    first
                })
            }
            SubSolverKind::RandomGreedy => random_greedy(m1.as_ref(), m2.as_ref(), f, seed),
        }
    }
}

fn independent_both(m1: &dyn Matroid, m2: &dyn Matroid, s: &[usize]) -> bool {
    m1.independent(s) && m2.independent(s)
}

/// Greedy by marginal gain, then first-improvement local search over moves
/// `S − D + A` with `|D|, |A| ≤ t`. A move is taken only if it gains more
/// than `max(ε·f(S)/n, 10⁻¹²)`. Ties and scan order follow a seeded
/// permutation of the ground set. `t = 0` returns the greedy set.
pub fn two_matroid_local_search(
    m1: &MatroidRef,
    m2: &MatroidRef,
    f: &SubmodularOracle,
    t: usize,
    epsilon: f64,
    allow_deletions: bool,
    seed: u64,
) -> Vec<usize> {
    let n = f.ground_size();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng_for(seed, &[0]));
    let (m1, m2) = (m1.as_ref(), m2.as_ref());

    let mut s: Vec<usize> = Vec::new();
    let mut value = f.value(&s);
    loop {
        let mut best: Option<(f64, usize)> = None;
        for &e in &order {
            if s.contains(&e) {
                continue;
            }
            let cand = normalize([s.as_slice(), &[e]].concat());
            if !independent_both(m1, m2, &cand) {
                continue;
            }
            let gain = f.value(&cand) - value;
            if gain > MIN_GAIN && best.is_none_or(|(g, _)| gain > g) {
                best = Some((gain, e));
            }
        }
        match best {
            Some((g, e)) => {
                s = normalize([s.as_slice(), &[e]].concat());
                value += g;
            }
            None => break,
        }
    }
    value = f.value(&s);

    for _ in 0..LOCAL_SEARCH_ITERATIONS {
        if t == 0 {
            break;
        }
        let threshold = (epsilon * value.abs() / n as f64).max(MIN_GAIN);
        match improving_move(m1, m2, f, &s, value, t, threshold, allow_deletions, &order) {
            Some((next, v)) => {
                s = next;
                value = v;
            }
            None => break,
        }
    }
    s
}

#[allow(clippy::too_many_arguments)]
fn improving_move(
    m1: &dyn Matroid,
    m2: &dyn Matroid,
    f: &SubmodularOracle,
    s: &[usize],
    value: f64,
    t: usize,
    threshold: f64,
    allow_deletions: bool,
    order: &[usize],
) -> Option<(Vec<usize>, f64)> {
    let outside: Vec<usize> = order.iter().copied().filter(|e| !s.contains(e)).collect();
    let inside: Vec<usize> = order.iter().copied().filter(|e| s.contains(e)).collect();
    for a in 0..=t.min(outside.len()) {
        for d in 0..=t.min(inside.len()) {
            if (a == 0 && d == 0) || (a == 0 && !allow_deletions) {
                continue;
            }
            for add in Combinations::new(outside.len(), a) {
                let add: Vec<usize> = add.iter().map(|&i| outside[i]).collect();
                for del in Combinations::new(inside.len(), d) {
                    let del: Vec<usize> = del.iter().map(|&i| inside[i]).collect();
                    let mut cand = difference(s, &normalize(del));
                    cand.extend_from_slice(&add);
                    let cand = normalize(cand);
                    if !independent_both(m1, m2, &cand) {
                        continue;
                    }
                    let v = f.value(&cand);
                    if v - value > threshold {
                        return Some((cand, v));
                    }
                }
            }
        }
    }
    None
}

/// Random greedy over `m1 ∩ m2`.
pub fn random_greedy(
    m1: &dyn Matroid,
    m2: &dyn Matroid,
    f: &SubmodularOracle,
    seed: u64,
) -> Result<Vec<usize>> {
    let n = f.ground_size();
    let r = max_cardinality_intersection(m1, m2)?.len();
    let mut rng = rng_for(seed, &[0]);
    let mut s: Vec<usize> = Vec::new();
    for _ in 0..r {
        let value = f.value(&s);
        let mut gains: Vec<(f64, usize)> = (0..n)
            .filter(|e| !s.contains(e))
            .filter_map(|e| {
                let cand = normalize([s.as_slice(), &[e]].concat());
                independent_both(m1, m2, &cand).then(|| (f.value(&cand) - value, e))
            })
            .filter(|&(g, _)| g > MIN_GAIN)
            .collect();
        gains.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        gains.truncate(r);
        let pick = rng.random_range(0..r);
        if let Some(&(_, e)) = gains.get(pick) {
            s = normalize([s.as_slice(), &[e]].concat());
        }
    }
    Ok(s)
}
