use std::collections::VecDeque;

use super::Matroid;
use crate::error::{FmsmError, Result};

/// Maximum-cardinality common independent set by repeated shortest
/// augmenting paths in the exchange graph.
///
/// For the current set `S`, arcs `y → x` (y ∈ S, x ∉ S) exist when
/// `S − y + x ∈ I₁`, arcs `x → y` when `S − y + x ∈ I₂`. Sources are the
/// `x ∉ S` with `S + x ∈ I₁`, sinks those with `S + x ∈ I₂`. Neighbours are
/// scanned in increasing index order so the result is deterministic.
pub fn max_cardinality_intersection(m1: &dyn Matroid, m2: &dyn Matroid) -> Result<Vec<usize>> {
    let n = m1.ground_size();
    if m2.ground_size() != n {
        return Err(FmsmError::Argument(format!(
            "ground sets differ: {} vs {}",
            n,
            m2.ground_size()
        )));
    }
    let mut in_set = vec![false; n];
    loop {
        let current: Vec<usize> = (0..n).filter(|&e| in_set[e]).collect();
        match shortest_augmenting_path(m1, m2, &current, &in_set) {
            Some(path) => {
                for e in path {
                    in_set[e] = !in_set[e];
                }
            }
            None => return Ok(current),
        }
    }
}

fn swapped(current: &[usize], out: usize, inn: usize) -> Vec<usize> {
    let mut s: Vec<usize> = current.iter().copied().filter(|&e| e != out).collect();
    s.push(inn);
    s
}

fn shortest_augmenting_path(
    m1: &dyn Matroid,
    m2: &dyn Matroid,
    current: &[usize],
    in_set: &[bool],
) -> Option<Vec<usize>> {
    let n = in_set.len();
    let outside: Vec<usize> = (0..n).filter(|&e| !in_set[e]).collect();
    let mut plus = current.to_vec();
    let mut source = vec![false; n];
    let mut sink = vec![false; n];
    for &x in &outside {
        plus.push(x);
        source[x] = m1.independent(&plus);
        sink[x] = m2.independent(&plus);
        plus.pop();
    }
    let mut prev = vec![usize::MAX; n];
    let mut seen = vec![false; n];
    let mut queue = VecDeque::new();
    for &x in &outside {
        if source[x] {
            seen[x] = true;
            queue.push_back(x);
        }
    }
    while let Some(v) = queue.pop_front() {
        if !in_set[v] && sink[v] {
            let mut path = vec![v];
            let mut cur = v;
            while prev[cur] != usize::MAX {
                cur = prev[cur];
                path.push(cur);
            }
            return Some(path);
        }
        if in_set[v] {
            // y = v ∈ S: arcs y → x when S − y + x ∈ I₁
            for &x in &outside {
                if !seen[x] && m1.independent(&swapped(current, v, x)) {
                    seen[x] = true;
                    prev[x] = v;
                    queue.push_back(x);
                }
            }
        } else {
            // x = v ∉ S: arcs x → y when S − y + x ∈ I₂
            for &y in current {
                if !seen[y] && m2.independent(&swapped(current, y, v)) {
                    seen[y] = true;
                    prev[y] = v;
                    queue.push_back(y);
                }
            }
        }
    }
    None
}
