//! Continuous optimisation of the multilinear extension over `P_F`.
//!
//! Every optimiser returns its fractional point as a [`ConvexCombination`]
//! so that rounding never needs a separate decomposition step.

use crate::error::{FmsmError, Result};
use crate::instance::Instance;
use crate::multilinear::MultilinearEstimator;
use crate::objective::SubmodularOracle;
use crate::polytope::{
    decompose, lp_maximize, min_inf_norm, ConvexCombination, PolytopeDescription,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuousConfig {
    pub epsilon: f64,
    /// Samples per estimate when the ground set is too large for exact
    /// evaluation; `None` uses the default count.
    pub samples: Option<usize>,
    pub seed: u64,
}

impl ContinuousConfig {
    pub fn new(epsilon: f64, seed: u64) -> Result<Self> {
        let cfg = ContinuousConfig {
            epsilon,
            samples: None,
            seed,
        };
        cfg.check()?;
        Ok(cfg)
    }

    pub fn with_samples(mut self, samples: Option<usize>) -> Self {
        self.samples = samples;
        self
    }

    fn check(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon <= 1.0) {
            return Err(FmsmError::Config(format!(
                "epsilon must lie in (0, 1], got {}",
                self.epsilon
            )));
        }
        if self.samples == Some(0) {
            return Err(FmsmError::Config("sample count must be positive".into()));
        }
        Ok(())
    }

    /// `T = ⌈1/ε⌉`.
    pub fn steps(&self) -> usize {
        (1.0 / self.epsilon).ceil() as usize
    }

    fn estimator(&self, oracle: SubmodularOracle, stream: u64) -> Result<MultilinearEstimator> {
        MultilinearEstimator::auto(
            oracle,
            self.samples,
            crate::seed::derive_seed(self.seed, &[stream]),
        )
    }
}

#[derive(Debug, Clone)]
pub struct ContinuousOutput {
    pub combination: ConvexCombination,
    /// Estimated `F` at the returned point.
    pub value: f64,
    /// Estimated `F` after each step.
    pub trace: Vec<f64>,
}

/// Continuous greedy: `T` steps of size `1/T` towards the LP maximiser of
/// the current gradient. Requires a monotone objective.
pub fn continuous_greedy(inst: &Instance, cfg: &ContinuousConfig) -> Result<ContinuousOutput> {
    cfg.check()?;
    if !inst.objective().is_monotone() {
        return Err(FmsmError::Config(
            "continuous greedy needs a monotone objective".into(),
        ));
    }
    let desc = PolytopeDescription::from_instance(inst)?;
    let est = cfg.estimator(inst.objective().clone(), 0)?;
    let n = inst.n();
    let steps = cfg.steps();
    let mut x = vec![0.0; n];
    let mut sets = Vec::with_capacity(steps);
    let mut trace = Vec::with_capacity(steps);
    for t in 0..steps as u64 {
        let g = est.grad_stream(&x, 2 * t)?;
        let v = lp_maximize(&desc, &g)?;
        for &e in &v.set {
            x[e] += 1.0 / steps as f64;
        }
        sets.push((1.0 / steps as f64, v.set));
        trace.push(est.eval_stream(&x, 2 * t + 1)?);
    }
    let mut combination = ConvexCombination::new(n, sets)?;
    combination.renormalize();
    let value = *trace.last().expect("at least one step");
    Ok(ContinuousOutput {
        combination,
        value,
        trace,
    })
}

/// Frank-Wolfe variant for non-monotone objectives over an integral
/// polytope: start at a minimum-ℓ∞ point, then repeatedly move a fraction
/// `ε` of the way to the LP maximiser of the gradient until time `ln 2`.
/// The best iterate is returned.
pub fn frank_wolfe(
    desc: &PolytopeDescription,
    oracle: &SubmodularOracle,
    cfg: &ContinuousConfig,
    stream: u64,
) -> Result<ContinuousOutput> {
    cfg.check()?;
    let est = cfg.estimator(oracle.clone(), stream)?;
    let (_, start) = min_inf_norm(desc)?;
    let mut combination = decompose(desc, &start)?;
    let steps = (std::f64::consts::LN_2 / cfg.epsilon).ceil() as u64;
    let mut x = combination.point();
    let mut best = (est.eval_stream(&x, 0)?, combination.clone());
    let mut trace = vec![best.0];
    for t in 0..steps {
        let g = est.grad_stream(&x, 2 * t + 1)?;
        let v = lp_maximize(desc, &g)?;
        let step = ConvexCombination::single(desc.dim(), v.set)?;
        combination = combination.mix(&step, cfg.epsilon)?;
        combination.renormalize();
        x = combination.point();
        let value = est.eval_stream(&x, 2 * t + 2)?;
        trace.push(value);
        if value > best.0 {
            best = (value, combination.clone());
        }
    }
    Ok(ContinuousOutput {
        combination: best.1,
        value: best.0,
        trace,
    })
}

/// Frank-Wolfe over `P_F` for the instance objective.
pub fn nonmonotone_fw(inst: &Instance, cfg: &ContinuousConfig) -> Result<ContinuousOutput> {
    let desc = PolytopeDescription::from_instance(inst)?;
    frank_wolfe(&desc, inst.objective(), cfg, 0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Direct,
    Complement,
}

#[derive(Debug, Clone)]
pub struct BestOfBoth {
    /// A combination of sets in `F` (complement results are mapped back).
    pub combination: ConvexCombination,
    pub value: f64,
    pub branch: Branch,
    pub direct_value: f64,
    pub complement_value: f64,
}

/// Runs Frank-Wolfe on `(f, P_F)` and on `(f̄, 1 − P_F)` and keeps the better
/// result. The complement run's sets `J` are mapped back to `V ∖ J`, so the
/// returned point is `1 − y` with `F(1 − y) = F̄(y)`.
pub fn best_of_both(inst: &Instance, cfg: &ContinuousConfig) -> Result<BestOfBoth> {
    let desc = PolytopeDescription::from_instance(inst)?;
    let direct = frank_wolfe(&desc, inst.objective(), cfg, 0)?;
    let comp = frank_wolfe(&desc.complement(), &inst.objective().complement(), cfg, 1)?;
    let (combination, value, branch) = if comp.value > direct.value {
        (
            comp.combination.complement(),
            comp.value,
            Branch::Complement,
        )
    } else {
        (direct.combination, direct.value, Branch::Direct)
    };
    Ok(BestOfBoth {
        combination,
        value,
        branch,
        direct_value: direct.value,
        complement_value: comp.value,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{uniform_instance, Edge, ObjectiveSpec};

    fn cfg(eps: f64) -> ContinuousConfig {
        ContinuousConfig::new(eps, 1).unwrap()
    }

    fn cycle_cut() -> ObjectiveSpec {
        ObjectiveSpec::GraphCut {
            edges: (0..4)
                .map(|i| Edge {
                    u: i,
                    v: (i + 1) % 4,
                    weight: 1.0,
                })
                .collect(),
        }
    }

    #[test]
    fn modular_rank_one_continuous_greedy() {
        let inst = uniform_instance(
            1,
            vec![0; 3],
            vec![0],
            vec![1],
            ObjectiveSpec::Modular {
                weights: vec![3.0, 2.0, 1.0],
            },
        )
        .unwrap();
        let out = continuous_greedy(&inst, &cfg(0.1)).unwrap();
        assert_eq!(out.combination.terms(), &[(1.0, vec![0])]);
        assert!((out.value - 3.0).abs() < 1e-12);
        assert!(out.trace.windows(2).all(|w| w[1] >= w[0] - 1e-9));
    }

    #[test]
    fn continuous_greedy_rejects_non_monotone() {
        let inst = uniform_instance(4, vec![0; 4], vec![0], vec![4], cycle_cut()).unwrap();
        assert!(matches!(
            continuous_greedy(&inst, &cfg(0.1)),
            Err(FmsmError::Config(_))
        ));
        assert!(ContinuousConfig::new(0.0, 1).is_err());
    }

    #[test]
    fn tight_instance_vertices_meet_equalities() {
        let inst = uniform_instance(
            3,
            vec![0, 0, 1, 1, 1],
            vec![1, 2],
            vec![1, 2],
            ObjectiveSpec::Modular {
                weights: vec![1.0, 2.0, 3.0, 4.0, 5.0],
            },
        )
        .unwrap();
        let out = continuous_greedy(&inst, &cfg(0.25)).unwrap();
        out.combination.validate(&inst).unwrap();
        for (_, s) in out.combination.terms() {
            assert_eq!(inst.color_counts(s), vec![1, 2]);
        }
    }

    #[test]
    fn frank_wolfe_on_cycle_cut() {
        let inst = uniform_instance(4, vec![0; 4], vec![0], vec![4], cycle_cut()).unwrap();
        let out = nonmonotone_fw(&inst, &cfg(0.05)).unwrap();
        out.combination.validate(&inst).unwrap();
        // OPT = 4 (alternate vertices)
        assert!(out.value >= (0.25 - 0.05) * 4.0);
    }

    #[test]
    fn singleton_polytope_is_returned_unchanged() {
        let inst =
            uniform_instance(3, vec![0, 0, 1], vec![2, 1], vec![2, 1], cycle_cut_3()).unwrap();
        let out = nonmonotone_fw(&inst, &cfg(0.1)).unwrap();
        assert_eq!(out.combination.terms(), &[(1.0, vec![0, 1, 2])]);
    }

    fn cycle_cut_3() -> ObjectiveSpec {
        ObjectiveSpec::GraphCut {
            edges: vec![
                Edge {
                    u: 0,
                    v: 1,
                    weight: 1.0,
                },
                Edge {
                    u: 1,
                    v: 2,
                    weight: 1.0,
                },
            ],
        }
    }

    #[test]
    fn frank_wolfe_matches_greedy_on_modular() {
        let inst = uniform_instance(
            2,
            vec![0, 0, 1, 1],
            vec![0, 1],
            vec![2, 2],
            ObjectiveSpec::Modular {
                weights: vec![4.0, 1.0, 2.0, 3.0],
            },
        )
        .unwrap();
        let eps = 0.05;
        let g = continuous_greedy(&inst, &cfg(eps)).unwrap();
        let f = nonmonotone_fw(&inst, &cfg(eps)).unwrap();
        assert!((g.value - 7.0).abs() < 1e-9);
        // Frank-Wolfe stops at time ln 2, so it reaches a (1 − 1/2) fraction
        // of the linear optimum from its start point.
        assert!(f.value >= 0.5 * 7.0 - 2.0 * eps * 7.0);
    }

    #[test]
    fn complement_branch_wins_when_polytope_hugs_one() {
        // ℓ_1 = |V_1|: every feasible set contains all of color 1, and the
        // value sits on color 2. The direct run starts at x(V_2) = 0 and by
        // time ln 2 has only moved half way; the complement run starts at
        // x(V_2) = 1.
        let inst = uniform_instance(
            6,
            vec![0, 0, 0, 0, 1, 1],
            vec![4, 0],
            vec![4, 2],
            ObjectiveSpec::Modular {
                weights: vec![0.0, 0.0, 0.0, 0.0, 1.0, 1.0],
            },
        )
        .unwrap();
        let out = best_of_both(&inst, &cfg(0.05)).unwrap();
        out.combination.validate(&inst).unwrap();
        assert!(out.value >= out.direct_value.max(out.complement_value) - 1e-12);
        assert_eq!(
            out.branch,
            Branch::Complement,
            "{} vs {}",
            out.direct_value,
            out.complement_value
        );
        for (_, s) in out.combination.terms() {
            assert!(inst.is_feasible(s));
        }
    }
}
