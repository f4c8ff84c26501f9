use std::sync::Arc;

use super::{Decomposition, SetFunction};
use crate::error::{FmsmError, Result};

fn arg(msg: String) -> FmsmError {
    FmsmError::Argument(msg)
}

fn check_weight(what: &str, w: f64) -> Result<()> {
    if !w.is_finite() || w < 0.0 {
        return Err(arg(format!(
            "{what} must be finite and non-negative, got {w}"
        )));
    }
    Ok(())
}

/// Weighted coverage. Element `e` covers the universe points `covered_by[e]`.
#[derive(Debug, Clone)]
pub struct Coverage {
    words: usize,
    masks: Vec<Vec<u64>>,
    weights: Vec<f64>,
    unit: bool,
}

impl Coverage {
    pub fn new(universe_size: usize, covered_by: &[Vec<usize>], weights: Vec<f64>) -> Result<Self> {
        if weights.len() != universe_size {
            return Err(arg(format!(
                "coverage has {} weights for a universe of {universe_size}",
                weights.len()
            )));
        }
        for &w in &weights {
            check_weight("coverage weight", w)?;
        }
        let words = universe_size.div_ceil(64);
        let mut masks = Vec::with_capacity(covered_by.len());
        for (e, pts) in covered_by.iter().enumerate() {
            let mut m = vec![0u64; words];
            for &p in pts {
                if p >= universe_size {
                    return Err(arg(format!(
                        "element {e} covers point {p} outside the universe"
                    )));
                }
                m[p / 64] |= 1 << (p % 64);
            }
            masks.push(m);
        }
        let unit = weights.iter().all(|&w| w == 1.0);
        Ok(Coverage {
            words,
            masks,
            weights,
            unit,
        })
    }

    pub fn universe_size(&self) -> usize {
        self.weights.len()
    }
}

impl SetFunction for Coverage {
    fn ground_size(&self) -> usize {
        self.masks.len()
    }

    fn eval(&self, set: &[usize]) -> f64 {
        let mut acc = vec![0u64; self.words];
        for &e in set {
            for (a, m) in acc.iter_mut().zip(&self.masks[e]) {
                *a |= m;
            }
        }
        if self.unit {
            return acc.iter().map(|w| w.count_ones()).sum::<u32>() as f64;
        }
        let mut total = 0.0;
        for (wi, &word) in acc.iter().enumerate() {
            let mut bits = word;
            while bits != 0 {
                let b = bits.trailing_zeros() as usize;
                total += self.weights[wi * 64 + b];
                bits &= bits - 1;
            }
        }
        total
    }

    fn is_monotone(&self) -> bool {
        true
    }
}

/// Weighted undirected cut function.
#[derive(Debug, Clone)]
pub struct GraphCut {
    n: usize,
    edges: Vec<(usize, usize, f64)>,
}

impl GraphCut {
    pub fn new(n: usize, edges: Vec<(usize, usize, f64)>) -> Result<Self> {
        for &(u, v, w) in &edges {
            if u >= n || v >= n {
                return Err(arg(format!(
                    "edge ({u}, {v}) has an endpoint outside 0..{n}"
                )));
            }
            check_weight("edge weight", w)?;
        }
        Ok(GraphCut { n, edges })
    }
}

impl SetFunction for GraphCut {
    fn ground_size(&self) -> usize {
        self.n
    }

    fn eval(&self, set: &[usize]) -> f64 {
        let mut inside = vec![false; self.n];
        for &e in set {
            inside[e] = true;
        }
        self.edges
            .iter()
            .filter(|&&(u, v, _)| inside[u] != inside[v])
            .map(|&(_, _, w)| w)
            .sum()
    }

    fn is_monotone(&self) -> bool {
        false
    }
}

/// `f(S) = Σ_clients max_{e ∈ S} values[client][e]`.
#[derive(Debug, Clone)]
pub struct FacilityLocation {
    n: usize,
    values: Vec<Vec<f64>>,
}

impl FacilityLocation {
    pub fn new(n: usize, values: Vec<Vec<f64>>) -> Result<Self> {
        for (c, row) in values.iter().enumerate() {
            if row.len() != n {
                return Err(arg(format!(
                    "client {c} has {} values, expected {n}",
                    row.len()
                )));
            }
            for &v in row {
                check_weight("facility value", v)?;
            }
        }
        Ok(FacilityLocation { n, values })
    }
}

impl SetFunction for FacilityLocation {
    fn ground_size(&self) -> usize {
        self.n
    }

    fn eval(&self, set: &[usize]) -> f64 {
        self.values
            .iter()
            .map(|row| set.iter().map(|&e| row[e]).fold(0.0, f64::max))
            .sum()
    }

    fn is_monotone(&self) -> bool {
        true
    }
}

#[derive(Debug, Clone)]
pub struct Modular {
    weights: Vec<f64>,
}

impl Modular {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        for &w in &weights {
            check_weight("modular weight", w)?;
        }
        Ok(Modular { weights })
    }
}

impl SetFunction for Modular {
    fn ground_size(&self) -> usize {
        self.weights.len()
    }

    fn eval(&self, set: &[usize]) -> f64 {
        set.iter().map(|&e| self.weights[e]).sum()
    }

    fn is_monotone(&self) -> bool {
        true
    }
}

/// Social welfare over `V = agents × items`; element `a * items + i` gives
/// item `i` to agent `a`. Each agent's utility is a coverage function over
/// the items. Declares a decomposition over the agent colour groups.
#[derive(Debug, Clone)]
pub struct Welfare {
    items: usize,
    agent_colors: Vec<usize>,
    utilities: Vec<Coverage>,
}

impl Welfare {
    pub fn new(items: usize, agent_colors: Vec<usize>, utilities: Vec<Coverage>) -> Result<Self> {
        if agent_colors.len() != utilities.len() {
            return Err(arg(format!(
                "{} agent colours for {} utilities",
                agent_colors.len(),
                utilities.len()
            )));
        }
        if let Some(a) = utilities.iter().position(|u| u.ground_size() != items) {
            return Err(arg(format!(
                "utility of agent {a} is not defined over {items} items"
            )));
        }
        Ok(Welfare {
            items,
            agent_colors,
            utilities,
        })
    }

    pub fn agents(&self) -> usize {
        self.utilities.len()
    }

    pub fn items(&self) -> usize {
        self.items
    }

    /// Colour of every ground element.
    pub fn element_colors(&self) -> Vec<usize> {
        self.agent_colors
            .iter()
            .flat_map(|&c| std::iter::repeat_n(c, self.items))
            .collect()
    }
}

impl SetFunction for Welfare {
    fn ground_size(&self) -> usize {
        self.items * self.utilities.len()
    }

    fn eval(&self, set: &[usize]) -> f64 {
        let mut bundles = vec![Vec::new(); self.utilities.len()];
        for &e in set {
            bundles[e / self.items].push(e % self.items);
        }
        self.utilities
            .iter()
            .zip(&bundles)
            .filter(|(_, b)| !b.is_empty())
            .map(|(u, b)| u.eval(b))
            .sum()
    }

    fn is_monotone(&self) -> bool {
        true
    }

    fn decomposition(&self) -> Option<Decomposition> {
        let colors = self.agent_colors.iter().copied().max().map_or(0, |m| m + 1);
        let mut groups = vec![Vec::new(); colors];
        for (a, &c) in self.agent_colors.iter().enumerate() {
            groups[c].extend(a * self.items..(a + 1) * self.items);
        }
        groups.retain(|g| !g.is_empty());
        Some(Decomposition {
            class_groups: Vec::new(),
            color_groups: groups,
        })
    }
}

/// A function given as `Σ_G f_G(S ∩ G) + Σ_c f_c(S ∩ V_c)`.
/// Each part is defined over the local positions `0..|group|` of its group.
#[derive(Debug, Clone)]
pub struct DecomposableSum {
    n: usize,
    class_parts: Vec<(Vec<usize>, Arc<dyn SetFunction>)>,
    color_parts: Vec<(Vec<usize>, Arc<dyn SetFunction>)>,
    local: Vec<usize>,
}

impl DecomposableSum {
    pub fn new(
        n: usize,
        class_parts: Vec<(Vec<usize>, Arc<dyn SetFunction>)>,
        color_parts: Vec<(Vec<usize>, Arc<dyn SetFunction>)>,
    ) -> Result<Self> {
        let mut local = vec![usize::MAX; n];
        for (kind, parts) in [("class", &class_parts), ("color", &color_parts)] {
            let mut seen = vec![false; n];
            for (p, (group, f)) in parts.iter().enumerate() {
                if f.ground_size() != group.len() {
                    return Err(arg(format!(
                        "{kind} part {p} has a function over {} elements for a group of {}",
                        f.ground_size(),
                        group.len()
                    )));
                }
                for (pos, &e) in group.iter().enumerate() {
                    if e >= n {
                        return Err(arg(format!(
                            "{kind} part {p} contains element {e} outside 0..{n}"
                        )));
                    }
                    if seen[e] {
                        return Err(arg(format!("{kind} groups overlap at element {e}")));
                    }
                    seen[e] = true;
                    local[e] = pos;
                }
            }
        }
        Ok(DecomposableSum {
            n,
            class_parts,
            color_parts,
            local,
        })
    }
}

impl SetFunction for DecomposableSum {
    fn ground_size(&self) -> usize {
        self.n
    }

    fn eval(&self, set: &[usize]) -> f64 {
        let mut inside = vec![false; self.n];
        for &e in set {
            inside[e] = true;
        }
        let part = |(group, f): &(Vec<usize>, Arc<dyn SetFunction>)| {
            let sub: Vec<usize> = group
                .iter()
                .filter(|&&e| inside[e])
                .map(|&e| self.local[e])
                .collect();
            f.eval(&sub)
        };
        self.class_parts.iter().map(part).sum::<f64>()
            + self.color_parts.iter().map(part).sum::<f64>()
    }

    fn is_monotone(&self) -> bool {
        self.class_parts
            .iter()
            .chain(&self.color_parts)
            .all(|(_, f)| f.is_monotone())
    }

    fn decomposition(&self) -> Option<Decomposition> {
        Some(Decomposition {
            class_groups: self.class_parts.iter().map(|(g, _)| g.clone()).collect(),
            color_groups: self.color_parts.iter().map(|(g, _)| g.clone()).collect(),
        })
    }
}
