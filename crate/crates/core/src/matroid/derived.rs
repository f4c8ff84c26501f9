//! Matroids derived from other matroids or from fairness bounds.

use super::{Matroid, MatroidRef, Partition};
use crate::error::{FmsmError, Result};

/// `{X : X ∪ S ∈ I}` for a fixed independent set `S` of the base matroid.
#[derive(Debug, Clone)]
pub struct ContractedExtension {
    base: MatroidRef,
    fixed: Vec<usize>,
}

impl ContractedExtension {
    pub fn new(base: MatroidRef, fixed: Vec<usize>) -> Result<Self> {
        crate::set::check_elements(base.ground_size(), &fixed).map_err(FmsmError::Argument)?;
        if !base.independent(&fixed) {
            return Err(FmsmError::Argument(
                "contracted set is not independent".into(),
            ));
        }
        Ok(ContractedExtension { base, fixed })
    }

    pub fn fixed(&self) -> &[usize] {
        &self.fixed
    }
}

impl Matroid for ContractedExtension {
    fn ground_size(&self) -> usize {
        self.base.ground_size()
    }

    fn independent(&self, set: &[usize]) -> bool {
        let joined = crate::set::union(set, &self.fixed);
        self.base.independent(&joined)
    }
}

/// Upper-bound colour matroid `{X : |X ∩ V_c| ≤ u_c}`.
pub fn color_upper(colors: &[usize], upper: &[usize]) -> Result<Partition> {
    Partition::from_labels(colors, upper.to_vec())
}

/// Sets that extend to a fair set of size at most `k`.
///
/// Membership uses the certificate `|S| ≤ k`, `|S ∩ V_c| ≤ u_c` and
/// `Σ_c max(ℓ_c, |S ∩ V_c|) ≤ k`. Its bases are exactly the fair sets of
/// size `k`.
#[derive(Debug, Clone)]
pub struct ExtendableFair {
    colors: Vec<usize>,
    lower: Vec<usize>,
    upper: Vec<usize>,
    k: usize,
    groups: Vec<Vec<usize>>,
}

impl ExtendableFair {
    pub fn new(colors: Vec<usize>, lower: Vec<usize>, upper: Vec<usize>, k: usize) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(FmsmError::Argument("lower/upper length mismatch".into()));
        }
        let mut groups = vec![Vec::new(); lower.len()];
        for (e, &c) in colors.iter().enumerate() {
            if c >= lower.len() {
                return Err(FmsmError::Argument(format!(
                    "element {e} has unknown color {c}"
                )));
            }
            groups[c].push(e);
        }
        for c in 0..lower.len() {
            if lower[c] > upper[c] || lower[c] > groups[c].len() {
                return Err(FmsmError::Argument(format!(
                    "color {c}: bounds not satisfiable"
                )));
            }
        }
        let need: usize = lower.iter().sum();
        if need > k {
            return Err(FmsmError::Infeasible(format!(
                "no fair set of size <= {k} exists (lower bounds sum to {need})"
            )));
        }
        Ok(ExtendableFair {
            colors,
            lower,
            upper,
            k,
            groups,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }
}

impl Matroid for ExtendableFair {
    fn ground_size(&self) -> usize {
        self.colors.len()
    }

    fn independent(&self, set: &[usize]) -> bool {
        if set.len() > self.k {
            return false;
        }
        let mut counts = vec![0usize; self.lower.len()];
        for &e in set {
            counts[self.colors[e]] += 1;
        }
        let mut total = 0;
        for ((&count, &lo), &hi) in counts.iter().zip(&self.lower).zip(&self.upper) {
            if count > hi {
                return false;
            }
            total += count.max(lo);
        }
        total <= self.k
    }

    fn equivalence_classes(&self) -> Result<Vec<Vec<usize>>> {
        Ok(self
            .groups
            .iter()
            .filter(|g| !g.is_empty())
            .cloned()
            .collect())
    }
}

/// `{S ⊆ V ∪ E : S \ E ∈ I}` where the dummies `E` are indices
/// `n..n + dummies`.
#[derive(Debug, Clone)]
pub struct DummyExtended {
    base: MatroidRef,
    dummies: usize,
}

impl DummyExtended {
    pub fn new(base: MatroidRef, dummies: usize) -> Self {
        DummyExtended { base, dummies }
    }

    pub fn base_size(&self) -> usize {
        self.base.ground_size()
    }
}

impl Matroid for DummyExtended {
    fn ground_size(&self) -> usize {
        self.base.ground_size() + self.dummies
    }

    fn independent(&self, set: &[usize]) -> bool {
        let n = self.base.ground_size();
        let real: Vec<usize> = set.iter().copied().filter(|&e| e < n).collect();
        self.base.independent(&real)
    }

    fn equivalence_classes(&self) -> Result<Vec<Vec<usize>>> {
        let n = self.base.ground_size();
        let mut classes = self.base.equivalence_classes()?;
        if self.dummies > 0 {
            classes.push((n..n + self.dummies).collect());
        }
        Ok(classes)
    }
}

/// `{S ∈ I : |S| ≤ k}`.
#[derive(Debug, Clone)]
pub struct Truncated {
    base: MatroidRef,
    k: usize,
}

impl Truncated {
    pub fn new(base: MatroidRef, k: usize) -> Self {
        Truncated { base, k }
    }
}

impl Matroid for Truncated {
    fn ground_size(&self) -> usize {
        self.base.ground_size()
    }

    fn independent(&self, set: &[usize]) -> bool {
        set.len() <= self.k && self.base.independent(set)
    }

    fn equivalence_classes(&self) -> Result<Vec<Vec<usize>>> {
        self.base.equivalence_classes()
    }
}

/// The base matroid with every element outside `allowed` turned into a loop.
#[derive(Debug, Clone)]
pub struct Restricted {
    base: MatroidRef,
    allowed: Vec<bool>,
}

impl Restricted {
    pub fn new(base: MatroidRef, allowed_elements: &[usize]) -> Self {
        let mut allowed = vec![false; base.ground_size()];
        for &e in allowed_elements {
            allowed[e] = true;
        }
        Restricted { base, allowed }
    }
}

impl Matroid for Restricted {
    fn ground_size(&self) -> usize {
        self.base.ground_size()
    }

    fn independent(&self, set: &[usize]) -> bool {
        set.iter().all(|&e| self.allowed[e]) && self.base.independent(set)
    }

    fn equivalence_classes(&self) -> Result<Vec<Vec<usize>>> {
        let mut classes = Vec::new();
        let mut loops = Vec::new();
        for class in self.base.equivalence_classes()? {
            let (keep, drop): (Vec<usize>, Vec<usize>) =
                class.into_iter().partition(|&e| self.allowed[e]);
            if !keep.is_empty() {
                classes.push(keep);
            }
            loops.extend(drop);
        }
        if !loops.is_empty() {
            loops.sort_unstable();
            classes.push(loops);
        }
        Ok(classes)
    }
}
