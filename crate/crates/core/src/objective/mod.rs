//! Submodular value oracles.
//!
//! [`SetFunction`] is the raw function; [`SubmodularOracle`] wraps one with a
//! shared atomic call counter and is what the algorithms consume.

mod families;

use std::fmt::Debug;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{FmsmError, Result};
use crate::set::{check_elements, mask_to_vec};

pub use families::{Coverage, DecomposableSum, FacilityLocation, GraphCut, Modular, Welfare};

/// Largest ground set for which a full value table is built.
pub const TABLE_LIMIT: usize = 22;

/// Declared decomposition: the groups over which the parts of the function
/// are defined. Parts over matroid equivalence classes and parts over colour
/// groups are kept apart.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Decomposition {
    pub class_groups: Vec<Vec<usize>>,
    pub color_groups: Vec<Vec<usize>>,
}

pub trait SetFunction: Send + Sync + Debug {
    fn ground_size(&self) -> usize;

    /// Value of a set of distinct in-range elements.
    fn eval(&self, set: &[usize]) -> f64;

    fn is_monotone(&self) -> bool;

    fn decomposition(&self) -> Option<Decomposition> {
        None
    }
}

#[derive(Debug, Clone)]
pub struct SubmodularOracle {
    func: Arc<dyn SetFunction>,
    calls: Arc<AtomicU64>,
}

impl SubmodularOracle {
    pub fn new(func: Arc<dyn SetFunction>) -> Self {
        SubmodularOracle {
            func,
            calls: Arc::new(AtomicU64::new(0)),
        }
    }

    fn derived(&self, func: Arc<dyn SetFunction>) -> Self {
        SubmodularOracle {
            func,
            calls: self.calls.clone(),
        }
    }

    pub fn function(&self) -> &Arc<dyn SetFunction> {
        &self.func
    }

    pub fn ground_size(&self) -> usize {
        self.func.ground_size()
    }

    pub fn is_monotone(&self) -> bool {
        self.func.is_monotone()
    }

    pub fn decomposition(&self) -> Option<Decomposition> {
        self.func.decomposition()
    }

    /// Counted, unchecked evaluation.
    pub fn value(&self, set: &[usize]) -> f64 {
        self.calls.fetch_add(1, Ordering::Relaxed);
        self.func.eval(set)
    }

    /// Counted evaluation with range and duplicate checks.
    pub fn try_value(&self, set: &[usize]) -> Result<f64> {
        check_elements(self.ground_size(), set).map_err(FmsmError::Argument)?;
        Ok(self.value(set))
    }

    /// Number of value queries made through this oracle and everything
    /// derived from it.
    pub fn calls(&self) -> u64 {
        self.calls.load(Ordering::Relaxed)
    }

    /// `S ↦ f(V \ S)`. Shares the call counter with `self`.
    pub fn complement(&self) -> SubmodularOracle {
        self.derived(Arc::new(Complement {
            inner: self.func.clone(),
        }))
    }

    /// `S ↦ f(S \ E)` on `V ∪ E`. Dummy ids must not lie in `V`.
    pub fn dummy_extend(&self, dummies: &[usize]) -> Result<SubmodularOracle> {
        let n = self.ground_size();
        if let Some(&e) = dummies.iter().find(|&&e| e < n) {
            return Err(FmsmError::Argument(format!(
                "dummy element {e} lies in the ground set"
            )));
        }
        let extended = dummies.iter().map(|&e| e + 1).max().unwrap_or(n).max(n);
        Ok(self.derived(Arc::new(DummyIgnoring {
            inner: self.func.clone(),
            extended,
        })))
    }

    /// Values of all `2^n` subsets indexed by bitmask.
    pub fn value_table(&self) -> Result<Vec<f64>> {
        let n = self.ground_size();
        if n > TABLE_LIMIT {
            return Err(FmsmError::Unsupported(format!(
                "value table needs n <= {TABLE_LIMIT}, got {n}"
            )));
        }
        self.calls.fetch_add(1u64 << n, Ordering::Relaxed);
        let f = &self.func;
        Ok((0..(1u64 << n))
            .into_par_iter()
            .map(|m| f.eval(&mask_to_vec(m)))
            .collect())
    }
}

#[derive(Debug)]
struct Complement {
    inner: Arc<dyn SetFunction>,
}

impl SetFunction for Complement {
    fn ground_size(&self) -> usize {
        self.inner.ground_size()
    }

    fn eval(&self, set: &[usize]) -> f64 {
        let rest = crate::set::complement(self.ground_size(), set);
        self.inner.eval(&rest)
    }

    fn is_monotone(&self) -> bool {
        false
    }

    fn decomposition(&self) -> Option<Decomposition> {
        // f(V \ S) = Σ_G f_G(G \ (S ∩ G)): same groups.
        self.inner.decomposition()
    }
}

#[derive(Debug)]
struct DummyIgnoring {
    inner: Arc<dyn SetFunction>,
    extended: usize,
}

impl SetFunction for DummyIgnoring {
    fn ground_size(&self) -> usize {
        self.extended
    }

    fn eval(&self, set: &[usize]) -> f64 {
        let n = self.inner.ground_size();
        let real: Vec<usize> = set.iter().copied().filter(|&e| e < n).collect();
        self.inner.eval(&real)
    }

    fn is_monotone(&self) -> bool {
        self.inner.is_monotone()
    }

    fn decomposition(&self) -> Option<Decomposition> {
        self.inner.decomposition()
    }
}

/// A witness that `f(S + i) + f(S + j) < f(S + i + j) + f(S)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SubmodularityViolation {
    pub base: Vec<usize>,
    pub i: usize,
    pub j: usize,
    pub gap: f64,
}

/// Exhaustive submodularity check through the equivalent pairwise condition
/// `f(S+i) + f(S+j) ≥ f(S+i+j) + f(S)` for all `S` and `i, j ∉ S`.
pub fn check_submodular(
    table: &[f64],
    n: usize,
) -> std::result::Result<(), SubmodularityViolation> {
    for s in 0..(1u64 << n) {
        for i in 0..n {
            if s >> i & 1 == 1 {
                continue;
            }
            for j in i + 1..n {
                if s >> j & 1 == 1 {
                    continue;
                }
                let lhs = table[(s | 1 << i) as usize] + table[(s | 1 << j) as usize];
                let rhs = table[(s | 1 << i | 1 << j) as usize] + table[s as usize];
                let tol = 1e-9 * (1.0 + lhs.abs().max(rhs.abs()));
                if lhs < rhs - tol {
                    return Err(SubmodularityViolation {
                        base: mask_to_vec(s),
                        i,
                        j,
                        gap: rhs - lhs,
                    });
                }
            }
        }
    }
    Ok(())
}

/// `f(S) ≤ f(S + i)` for all `S`, `i`.
pub fn check_monotone(table: &[f64], n: usize) -> bool {
    (0..(1u64 << n)).all(|s| {
        (0..n).all(|i| s >> i & 1 == 1 || table[s as usize] <= table[(s | 1 << i) as usize] + 1e-9)
    })
}

pub fn check_nonnegative(table: &[f64]) -> bool {
    table.iter().all(|&v| v >= -1e-12)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn modular(w: &[f64]) -> SubmodularOracle {
        SubmodularOracle::new(Arc::new(Modular::new(w.to_vec()).unwrap()))
    }

    #[test]
    fn modular_value() {
        assert_eq!(modular(&[3.0, 2.0, 1.0]).try_value(&[0, 2]).unwrap(), 4.0);
    }

    #[test]
    fn out_of_range_query_is_rejected() {
        assert!(modular(&[1.0]).try_value(&[1]).is_err());
    }

    #[test]
    fn complement_of_modular() {
        let o = modular(&[3.0, 2.0, 1.0]);
        let c = o.complement();
        assert_eq!(c.value(&[0]), 3.0);
        assert!(!c.is_monotone());
        let cc = c.complement();
        for m in 0..8u64 {
            let s = mask_to_vec(m);
            assert_eq!(cc.value(&s), o.value(&s));
        }
    }

    #[test]
    fn graph_cut_is_self_complementary() {
        let g = SubmodularOracle::new(Arc::new(
            GraphCut::new(4, vec![(0, 1, 1.0), (1, 2, 2.0), (2, 3, 0.5), (3, 0, 4.0)]).unwrap(),
        ));
        let c = g.complement();
        for m in 0..16u64 {
            let s = mask_to_vec(m);
            assert_eq!(c.value(&s), g.value(&s));
        }
    }

    #[test]
    fn dummy_extension_ignores_dummies() {
        let o = modular(&[3.0, 2.0, 1.0]);
        let d = o.dummy_extend(&[3, 4]).unwrap();
        assert_eq!(d.ground_size(), 5);
        assert_eq!(d.value(&[3, 4]), o.value(&[]));
        assert_eq!(d.value(&[0, 1, 3, 4]), o.value(&[0, 1]));
        assert!(o.dummy_extend(&[2]).is_err());
    }

    #[test]
    fn dummy_extension_keeps_decomposition() {
        let parts = DecomposableSum::new(
            3,
            vec![(
                vec![0, 1],
                Arc::new(Modular::new(vec![1.0, 1.0]).unwrap()) as Arc<dyn SetFunction>,
            )],
            vec![(
                vec![2],
                Arc::new(Modular::new(vec![5.0]).unwrap()) as Arc<dyn SetFunction>,
            )],
        )
        .unwrap();
        let o = SubmodularOracle::new(Arc::new(parts));
        let d = o.dummy_extend(&[3]).unwrap();
        assert_eq!(d.decomposition(), o.decomposition());
        assert!(d.decomposition().is_some());
    }

    #[test]
    fn call_counter_is_shared_with_derived_oracles() {
        let o = modular(&[1.0, 1.0]);
        o.value(&[0]);
        o.complement().value(&[0]);
        assert_eq!(o.calls(), 2);
    }

    #[test]
    fn checkers_detect_violations() {
        // f(S) = |S|^2 is supermodular
        let table: Vec<f64> = (0..8u64).map(|m| (m.count_ones() as f64).powi(2)).collect();
        assert!(check_submodular(&table, 3).is_err());
        assert!(check_monotone(&table, 3));
        let cut = SubmodularOracle::new(Arc::new(GraphCut::new(2, vec![(0, 1, 1.0)]).unwrap()));
        let t = cut.value_table().unwrap();
        assert!(check_submodular(&t, 2).is_ok());
        assert!(!check_monotone(&t, 2));
    }
}
