//! Matroid independence oracles.
//!
//! A matroid is only ever accessed through [`Matroid::independent`]; the
//! concrete families below (uniform, partition, explicit) and the derived
//! constructions in [`derived`] all implement the same trait so that the
//! intersection and rounding code never special-cases a kind.

pub mod derived;
mod intersection;

use std::collections::HashSet;
use std::fmt::Debug;
use std::sync::Arc;

use crate::error::{FmsmError, Result};
use crate::set::{check_elements, mask_to_vec, vec_to_mask};

pub use derived::{
    color_upper, ContractedExtension, DummyExtended, ExtendableFair, Restricted, Truncated,
};
pub use intersection::max_cardinality_intersection;

/// Largest ground set for which exhaustive checks (axioms, equivalence
/// classes) are attempted.
pub const EXHAUSTIVE_LIMIT: usize = 12;

/// Largest ground set an explicit matroid may have.
pub const EXPLICIT_LIMIT: usize = 20;

pub type MatroidRef = Arc<dyn Matroid>;

pub trait Matroid: Send + Sync + Debug {
    fn ground_size(&self) -> usize;

    /// Membership test. Elements must be distinct and `< ground_size()`;
    /// use [`is_independent`] for a checked query.
    fn independent(&self, set: &[usize]) -> bool;

    /// A partition of the ground set into groups of pairwise equivalent
    /// elements. Structured matroids answer from their structure (possibly a
    /// refinement of the exact classes); the default is exhaustive.
    fn equivalence_classes(&self) -> Result<Vec<Vec<usize>>> {
        exhaustive_equivalence_classes(self)
    }

    /// Rank of the matroid, by greedy in index order.
    fn rank(&self) -> usize {
        greedy_base(self, 0..self.ground_size()).len()
    }
}

/// Checked independence query.
pub fn is_independent(m: &dyn Matroid, set: &[usize]) -> Result<bool> {
    check_elements(m.ground_size(), set).map_err(FmsmError::Argument)?;
    Ok(m.independent(set))
}

/// Greedily extends the empty set with `order`, keeping independence.
pub fn greedy_base<M: Matroid + ?Sized>(
    m: &M,
    order: impl IntoIterator<Item = usize>,
) -> Vec<usize> {
    let mut base = Vec::new();
    for e in order {
        base.push(e);
        if !m.independent(&base) {
            base.pop();
        }
    }
    base
}

#[derive(Debug, Clone)]
pub struct Uniform {
    n: usize,
    k: usize,
}

impl Uniform {
    pub fn new(n: usize, k: usize) -> Self {
        Uniform { n, k }
    }

    /// The free matroid: every subset is independent.
    pub fn free(n: usize) -> Self {
        Uniform { n, k: n }
    }

    pub fn k(&self) -> usize {
        self.k
    }
}

impl Matroid for Uniform {
    fn ground_size(&self) -> usize {
        self.n
    }

    fn independent(&self, set: &[usize]) -> bool {
        set.len() <= self.k
    }

    fn equivalence_classes(&self) -> Result<Vec<Vec<usize>>> {
        if self.n == 0 {
            return Ok(Vec::new());
        }
        Ok(vec![(0..self.n).collect()])
    }

    fn rank(&self) -> usize {
        self.k.min(self.n)
    }
}

/// `|X ∩ G_i| ≤ k_i` for every block `G_i`. Blocks must cover the ground set.
#[derive(Debug, Clone)]
pub struct Partition {
    block_of: Vec<usize>,
    blocks: Vec<Vec<usize>>,
    caps: Vec<usize>,
}

impl Partition {
    pub fn new(n: usize, blocks: Vec<Vec<usize>>, caps: Vec<usize>) -> Result<Self> {
        if blocks.len() != caps.len() {
            return Err(FmsmError::Argument(format!(
                "{} blocks but {} caps",
                blocks.len(),
                caps.len()
            )));
        }
        let mut block_of = vec![usize::MAX; n];
        for (b, block) in blocks.iter().enumerate() {
            for &e in block {
                if e >= n {
                    return Err(FmsmError::Argument(format!(
                        "block {b}: element {e} out of range"
                    )));
                }
                if block_of[e] != usize::MAX {
                    return Err(FmsmError::Argument(format!(
                        "element {e} appears in two blocks"
                    )));
                }
                block_of[e] = b;
            }
        }
        if let Some(e) = block_of.iter().position(|&b| b == usize::MAX) {
            return Err(FmsmError::Argument(format!(
                "element {e} is not covered by any block"
            )));
        }
        let blocks = blocks
            .into_iter()
            .map(|mut b| {
                b.sort_unstable();
                b
            })
            .collect();
        Ok(Partition {
            block_of,
            blocks,
            caps,
        })
    }

    /// Partition matroid whose blocks are given by a labelling.
    pub fn from_labels(labels: &[usize], caps: Vec<usize>) -> Result<Self> {
        let mut blocks = vec![Vec::new(); caps.len()];
        for (e, &l) in labels.iter().enumerate() {
            if l >= caps.len() {
                return Err(FmsmError::Argument(format!(
                    "label {l} of element {e} has no cap"
                )));
            }
            blocks[l].push(e);
        }
        Partition::new(labels.len(), blocks, caps)
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn caps(&self) -> &[usize] {
        &self.caps
    }

    pub fn block_of(&self, e: usize) -> usize {
        self.block_of[e]
    }
}

impl Matroid for Partition {
    fn ground_size(&self) -> usize {
        self.block_of.len()
    }

    fn independent(&self, set: &[usize]) -> bool {
        let mut counts = vec![0usize; self.caps.len()];
        for &e in set {
            let b = self.block_of[e];
            counts[b] += 1;
            if counts[b] > self.caps[b] {
                return false;
            }
        }
        true
    }

    fn equivalence_classes(&self) -> Result<Vec<Vec<usize>>> {
        Ok(self
            .blocks
            .iter()
            .filter(|b| !b.is_empty())
            .cloned()
            .collect())
    }

    fn rank(&self) -> usize {
        self.blocks
            .iter()
            .zip(&self.caps)
            .map(|(b, &c)| b.len().min(c))
            .sum()
    }
}

/// A matroid given extensionally by its independent sets (desk scale only).
#[derive(Debug, Clone)]
pub struct Explicit {
    n: usize,
    family: HashSet<u64>,
}

impl Explicit {
    /// Builds the oracle and validates downward closure and the exchange
    /// axiom exhaustively.
    pub fn new(n: usize, independent_sets: &[Vec<usize>]) -> Result<Self> {
        if n > EXPLICIT_LIMIT {
            return Err(FmsmError::Unsupported(format!(
                "explicit matroids are limited to {EXPLICIT_LIMIT} elements, got {n}"
            )));
        }
        let mut family = HashSet::new();
        for (i, s) in independent_sets.iter().enumerate() {
            check_elements(n, s).map_err(|m| FmsmError::Argument(format!("set {i}: {m}")))?;
            family.insert(vec_to_mask(s));
        }
        let m = Explicit { n, family };
        m.validate()?;
        Ok(m)
    }

    pub fn family_masks(&self) -> impl Iterator<Item = u64> + '_ {
        self.family.iter().copied()
    }

    fn validate(&self) -> Result<()> {
        if !self.family.contains(&0) {
            return Err(FmsmError::Argument(
                "explicit family does not contain the empty set".into(),
            ));
        }
        for &s in &self.family {
            let mut rest = s;
            while rest != 0 {
                let bit = rest & rest.wrapping_neg();
                if !self.family.contains(&(s & !bit)) {
                    return Err(FmsmError::Argument(format!(
                        "explicit family is not downward closed at {:?}",
                        mask_to_vec(s)
                    )));
                }
                rest &= rest - 1;
            }
        }
        let mut by_size: Vec<Vec<u64>> = vec![Vec::new(); self.n + 1];
        for &s in &self.family {
            by_size[s.count_ones() as usize].push(s);
        }
        // Augmentation between consecutive sizes implies the general axiom
        // once downward closure holds.
        for size in 0..self.n {
            for &x in &by_size[size] {
                for &y in &by_size[size + 1] {
                    let mut cand = y & !x;
                    let mut ok = false;
                    while cand != 0 {
                        let bit = cand & cand.wrapping_neg();
                        if self.family.contains(&(x | bit)) {
                            ok = true;
                            break;
                        }
                        cand &= cand - 1;
                    }
                    if !ok {
                        return Err(FmsmError::Argument(format!(
                            "exchange axiom fails for X={:?}, Y={:?}",
                            mask_to_vec(x),
                            mask_to_vec(y)
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

impl Matroid for Explicit {
    fn ground_size(&self) -> usize {
        self.n
    }

    fn independent(&self, set: &[usize]) -> bool {
        self.family.contains(&vec_to_mask(set))
    }
}

/// Computes equivalence classes by testing, for every pair `i, j` and every
/// independent `S` avoiding both, whether `S + i` and `S + j` agree.
pub fn exhaustive_equivalence_classes<M: Matroid + ?Sized>(m: &M) -> Result<Vec<Vec<usize>>> {
    let n = m.ground_size();
    if n > EXHAUSTIVE_LIMIT {
        return Err(FmsmError::Unsupported(format!(
            "exhaustive equivalence classes need n <= {EXHAUSTIVE_LIMIT}, got {n}"
        )));
    }
    let table = independence_table(m);
    let equivalent = |i: usize, j: usize| -> bool {
        let avoid = (1u64 << i) | (1u64 << j);
        (0..(1u64 << n)).all(|s| {
            s & avoid != 0
                || !table[s as usize]
                || table[(s | 1 << i) as usize] == table[(s | 1 << j) as usize]
        })
    };
    let mut class_of = vec![usize::MAX; n];
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for i in 0..n {
        if class_of[i] != usize::MAX {
            continue;
        }
        class_of[i] = classes.len();
        let mut class = vec![i];
        for j in i + 1..n {
            if class_of[j] == usize::MAX && equivalent(i, j) {
                class_of[j] = classes.len();
                class.push(j);
            }
        }
        classes.push(class);
    }
    Ok(classes)
}

/// Independence of every subset, indexed by bitmask.
pub fn independence_table<M: Matroid + ?Sized>(m: &M) -> Vec<bool> {
    let n = m.ground_size();
    (0..(1u64 << n))
        .map(|s| m.independent(&mask_to_vec(s)))
        .collect()
}

/// Exhaustive check of the matroid axioms (n ≤ [`EXHAUSTIVE_LIMIT`]).
pub fn check_axioms<M: Matroid + ?Sized>(m: &M) -> std::result::Result<(), String> {
    let n = m.ground_size();
    if n > EXHAUSTIVE_LIMIT {
        return Err(format!("axiom check needs n <= {EXHAUSTIVE_LIMIT}"));
    }
    let table = independence_table(m);
    if !table[0] {
        return Err("empty set is dependent".into());
    }
    let mut by_size: Vec<Vec<u64>> = vec![Vec::new(); n + 1];
    for s in 0..(1u64 << n) {
        if !table[s as usize] {
            continue;
        }
        let mut rest = s;
        while rest != 0 {
            let bit = rest & rest.wrapping_neg();
            if !table[(s & !bit) as usize] {
                return Err(format!("not downward closed at {:?}", mask_to_vec(s)));
            }
            rest &= rest - 1;
        }
        by_size[s.count_ones() as usize].push(s);
    }
    for size in 0..n {
        for &x in &by_size[size] {
            for &y in &by_size[size + 1] {
                let mut cand = y & !x;
                let mut ok = false;
                while cand != 0 {
                    let bit = cand & cand.wrapping_neg();
                    if table[(x | bit) as usize] {
                        ok = true;
                        break;
                    }
                    cand &= cand - 1;
                }
                if !ok {
                    return Err(format!(
                        "exchange fails for X={:?}, Y={:?}",
                        mask_to_vec(x),
                        mask_to_vec(y)
                    ));
                }
            }
        }
    }
    Ok(())
}
