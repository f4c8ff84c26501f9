//! Randomised swap rounding of convex combinations.
//!
//! Support sets are padded with dummy elements `n..` to a common size `k`,
//! so that they become bases of the padded matroid(s). Bases are then merged
//! pairwise in decreasing weight order; each merge moves one base towards the
//! other by exchanges, choosing the direction with probability proportional
//! to the weights, which keeps `E[1_S] = x`.

use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{FmsmError, Result};
use crate::instance::Instance;
use crate::matroid::{DummyExtended, ExtendableFair, Matroid, MatroidRef, Truncated};
use crate::polytope::ConvexCombination;
use crate::seed::rng_for;
use crate::set::{difference, normalize};

/// Pads every support set with dummies `n, n + 1, …` up to the largest
/// support size. Returns the padded terms (sorted by decreasing weight, ties
/// by position), `k` and the number of dummies.
fn pad(cc: &ConvexCombination) -> (Vec<(f64, Vec<usize>)>, usize, usize) {
    let n = cc.n();
    let k = cc.terms().iter().map(|(_, s)| s.len()).max().unwrap_or(0);
    let min = cc.terms().iter().map(|(_, s)| s.len()).min().unwrap_or(0);
    let mut terms: Vec<(f64, Vec<usize>)> = cc
        .terms()
        .iter()
        .map(|(w, s)| {
            let mut p = s.clone();
            p.extend(n..n + (k - s.len()));
            (*w, normalize(p))
        })
        .collect();
    terms.sort_by(|a, b| b.0.total_cmp(&a.0));
    (terms, k, k - min)
}

fn swap(set: &[usize], out: &[usize], inn: &[usize]) -> Vec<usize> {
    let mut s = difference(set, out);
    s.extend_from_slice(inn);
    normalize(s)
}

/// Merges bases `b1` (weight `w1`) and `b2` of `m` into one base.
fn merge_single(
    m: &dyn Matroid,
    mut b1: Vec<usize>,
    w1: f64,
    mut b2: Vec<usize>,
    w2: f64,
    rng: &mut ChaCha8Rng,
) -> Vec<usize> {
    let p = w1 / (w1 + w2);
    while b1 != b2 {
        let i = *difference(&b1, &b2).iter().min().expect("bases differ");
        let j = difference(&b2, &b1)
            .into_iter()
            .find(|&j| {
                m.independent(&swap(&b1, &[i], &[j])) && m.independent(&swap(&b2, &[j], &[i]))
            })
            .expect("symmetric exchange exists between bases");
        if rng.random::<f64>() < p {
            b2 = swap(&b2, &[j], &[i]);
        } else {
            b1 = swap(&b1, &[i], &[j]);
        }
    }
    b1
}

/// Swap rounding for a single matroid. Every support set must be
/// independent in `matroid`; the result is independent and
/// `E[1_S] = x`.
pub fn swap_round_matroid(
    cc: &ConvexCombination,
    matroid: &MatroidRef,
    seed: u64,
) -> Result<Vec<usize>> {
    let n = cc.n();
    if matroid.ground_size() != n {
        return Err(FmsmError::Argument(
            "matroid and combination have different ground sets".into(),
        ));
    }
    if let Some((_, s)) = cc.terms().iter().find(|(_, s)| !matroid.independent(s)) {
        return Err(FmsmError::Argument(format!(
            "support set {s:?} is not independent"
        )));
    }
    let (terms, k, dummies) = pad(cc);
    let padded = Truncated::new(Arc::new(DummyExtended::new(matroid.clone(), dummies)), k);
    let mut iter = terms.into_iter();
    let (mut weight, mut base) = iter.next().expect("combination is nonempty");
    for (idx, (w, s)) in iter.enumerate() {
        let mut rng = rng_for(seed, &[idx as u64]);
        base = merge_single(&padded, base, weight, s, w, &mut rng);
        weight += w;
    }
    base.retain(|&e| e < n);
    Ok(base)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntersectionRounding {
    pub set: Vec<usize>,
    /// Merges for which no class-respecting exchange existed and the whole
    /// difference was swapped at once.
    pub fallback_merges: usize,
}

struct Exchange<'a> {
    matroids: [&'a dyn Matroid; 2],
    /// Class label of each element under each matroid.
    labels: [Vec<usize>; 2],
}

impl Exchange<'_> {
    fn independent(&self, s: &[usize]) -> bool {
        self.matroids.iter().all(|m| m.independent(s))
    }

    fn one_per_class(&self, part: &[usize]) -> bool {
        self.labels.iter().all(|lab| {
            let mut seen: Vec<usize> = part.iter().map(|&e| lab[e]).collect();
            seen.sort_unstable();
            seen.windows(2).all(|w| w[0] != w[1])
        })
    }

    /// Smallest `(X, Y)` with `X ⊆ I ∖ J`, `Y ⊆ J ∖ I`, `|X| = |Y|`, such that
    /// both `I − X + Y` and `J − Y + X` are independent in both matroids and
    /// every class meets `X` and `Y` at most once.
    fn find(&self, i: &[usize], j: &[usize]) -> Option<(Vec<usize>, Vec<usize>)> {
        let a = difference(i, j);
        let b = difference(j, i);
        for size in 1..=a.len().min(b.len()) {
            for xs in crate::set::Combinations::new(a.len(), size) {
                let x: Vec<usize> = xs.iter().map(|&p| a[p]).collect();
                if !self.one_per_class(&x) {
                    continue;
                }
                for ys in crate::set::Combinations::new(b.len(), size) {
                    let y: Vec<usize> = ys.iter().map(|&p| b[p]).collect();
                    if self.one_per_class(&y)
                        && self.independent(&swap(i, &x, &y))
                        && self.independent(&swap(j, &y, &x))
                    {
                        return Some((x, y));
                    }
                }
            }
        }
        None
    }
}

fn class_labels(m: &dyn Matroid) -> Result<Vec<usize>> {
    let mut lab = vec![usize::MAX; m.ground_size()];
    for (c, class) in m.equivalence_classes()?.iter().enumerate() {
        for &e in class {
            lab[e] = c;
        }
    }
    Ok(lab)
}

/// Swap rounding for `F = I ∩ C`. Support sets are padded with dummies into
/// bases of `I⁺` and of the extendable-fair matroid `C̃⁺_k` (dummies form an
/// extra colour with bounds `[0, |E|]`), merged by class-respecting
/// exchanges, and stripped of dummies. The result is always feasible.
///
/// The objective must be decomposable over the classes and colours unless
/// `force` is set.
pub fn swap_round_intersection(
    cc: &ConvexCombination,
    inst: &Instance,
    seed: u64,
    force: bool,
) -> Result<IntersectionRounding> {
    let n = inst.n();
    if cc.n() != n {
        return Err(FmsmError::Argument(
            "instance and combination have different ground sets".into(),
        ));
    }
    let status = inst.decomposability();
    if !status.holds() && !force {
        return Err(FmsmError::Config(format!(
            "intersection rounding needs a decomposable objective: {status:?}"
        )));
    }
    if let Some((_, s)) = cc.terms().iter().find(|(_, s)| !inst.is_feasible(s)) {
        return Err(FmsmError::Argument(format!(
            "support set {s:?} is not feasible"
        )));
    }
    let (terms, k, dummies) = pad(cc);
    let ind = DummyExtended::new(inst.matroid().clone(), dummies);
    let mut colors = inst.colors().to_vec();
    colors.extend(std::iter::repeat_n(inst.num_colors(), dummies));
    let mut lower = inst.lower().to_vec();
    lower.push(0);
    let mut upper = inst.upper().to_vec();
    upper.push(dummies);
    let fair = ExtendableFair::new(colors, lower, upper, k)?;
    let exchange = Exchange {
        matroids: [&ind, &fair],
        labels: [class_labels(&ind)?, class_labels(&fair)?],
    };

    let mut fallback_merges = 0;
    let mut iter = terms.into_iter();
    let (mut weight, mut base) = iter.next().expect("combination is nonempty");
    for (idx, (w, mut other)) in iter.enumerate() {
        let mut rng = rng_for(seed, &[idx as u64]);
        let p = weight / (weight + w);
        let mut fell_back = false;
        while base != other {
            let (x, y) = match exchange.find(&base, &other) {
                Some(xy) => xy,
                None => {
                    fell_back = true;
                    (difference(&base, &other), difference(&other, &base))
                }
            };
            if rng.random::<f64>() < p {
                other = swap(&other, &y, &x);
            } else {
                base = swap(&base, &x, &y);
            }
        }
        fallback_merges += fell_back as usize;
        weight += w;
    }
    base.retain(|&e| e < n);
    debug_assert!(inst.is_feasible(&base));
    Ok(IntersectionRounding {
        set: base,
        fallback_merges,
    })
}
