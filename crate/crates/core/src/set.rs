//! Small helpers for sets of element indices.
//!
//! Sets are passed around as slices of distinct indices. Canonical form is a
//! sorted `Vec<usize>`; bitmasks are used for exhaustive enumeration.

pub fn normalize(mut set: Vec<usize>) -> Vec<usize> {
    set.sort_unstable();
    set.dedup();
    set
}

pub fn mask_to_vec(mask: u64) -> Vec<usize> {
    let mut out = Vec::with_capacity(mask.count_ones() as usize);
    let mut m = mask;
    while m != 0 {
        let b = m.trailing_zeros() as usize;
        out.push(b);
        m &= m - 1;
    }
    out
}

pub fn vec_to_mask(set: &[usize]) -> u64 {
    set.iter().fold(0u64, |m, &e| m | (1u64 << e))
}

/// Sorted union of two sets.
pub fn union(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out: Vec<usize> = a.iter().chain(b.iter()).copied().collect();
    out.sort_unstable();
    out.dedup();
    out
}

/// `a \ b`, preserving the order of `a`.
pub fn difference(a: &[usize], b: &[usize]) -> Vec<usize> {
    a.iter().copied().filter(|x| !b.contains(x)).collect()
}

pub fn complement(n: usize, set: &[usize]) -> Vec<usize> {
    let mut member = vec![false; n];
    for &e in set {
        member[e] = true;
    }
    (0..n).filter(|&e| !member[e]).collect()
}

/// Checks that every element is `< n` and that no element repeats.
pub fn check_elements(n: usize, set: &[usize]) -> Result<(), String> {
    let mut seen = vec![false; n];
    for &e in set {
        if e >= n {
            return Err(format!(
                "element {e} out of range for ground set of size {n}"
            ));
        }
        if seen[e] {
            return Err(format!("element {e} repeated"));
        }
        seen[e] = true;
    }
    Ok(())
}

/// Lexicographic iterator over all `m`-subsets of `items` (as index vectors).
pub(crate) struct Combinations {
    len: usize,
    idx: Vec<usize>,
    done: bool,
}

impl Combinations {
    pub(crate) fn new(len: usize, m: usize) -> Self {
        Combinations {
            len,
            idx: (0..m).collect(),
            done: m > len,
        }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let current = self.idx.clone();
        let m = self.idx.len();
        let mut i = m;
        loop {
            if i == 0 {
                self.done = true;
                break;
            }
            i -= 1;
            if self.idx[i] < self.len - m + i {
                self.idx[i] += 1;
                for j in i + 1..m {
                    self.idx[j] = self.idx[j - 1] + 1;
                }
                break;
            }
        }
        Some(current)
    }
}
