//! Relax-and-round: continuous optimisation over `P_F`, then swap rounding
//! either in the matroid alone (fair in expectation) or in the intersection
//! (exactly fair, for decomposable objectives).

use std::f64::consts::E;

use crate::analysis::{concentration_interval, min_inf_norm_auto, NormReport};
use crate::continuous::{best_of_both, continuous_greedy, Branch, ContinuousConfig};
use crate::error::{FmsmError, Result};
use crate::instance::Instance;
use crate::polytope::ConvexCombination;
use crate::rounding::{swap_round_intersection, swap_round_matroid};

use super::fresh;
use super::report::{Concentration, Guarantee, SolveReport, SolverName};

/// The fractional stage, computed once and rounded many times.
#[derive(Debug, Clone)]
pub struct Relaxation {
    inst: Instance,
    pub combination: ConvexCombination,
    /// Estimated multilinear value at the fractional point.
    pub value: f64,
    /// Which side won for non-monotone objectives.
    pub branch: Option<Branch>,
    /// Norms behind the non-monotone guarantee.
    pub norm: Option<NormReport>,
    pub epsilon: f64,
    calls: u64,
}

impl Relaxation {
    /// Continuous greedy for monotone objectives; otherwise the better of
    /// Frank-Wolfe on the problem and on its complement.
    pub fn new(inst: &Instance, cfg: &ContinuousConfig) -> Result<Relaxation> {
        let inst = fresh(inst)?;
        let (combination, value, branch, norm) = if inst.objective().is_monotone() {
            let out = continuous_greedy(&inst, cfg)?;
            (out.combination, out.value, None, None)
        } else {
            let out = best_of_both(&inst, cfg)?;
            (
                out.combination,
                out.value,
                Some(out.branch),
                Some(min_inf_norm_auto(&inst)?),
            )
        };
        let calls = inst.objective().calls();
        Ok(Relaxation {
            inst,
            combination,
            value,
            branch,
            norm,
            epsilon: cfg.epsilon,
            calls,
        })
    }

    pub fn instance(&self) -> &Instance {
        &self.inst
    }

    pub fn point(&self) -> Vec<f64> {
        self.combination.point()
    }

    fn guarantee(&self) -> Guarantee {
        let mut g = if let Some(norm) = &self.norm {
            let mut g = Guarantee::new("(1 - r - epsilon) / 4");
            g.r = Some(norm.r);
            g.target = Some(((1.0 - norm.r - self.epsilon) / 4.0).max(0.0));
            g
        } else {
            let mut g = Guarantee::new("1 - 1/e - epsilon");
            g.target = Some((1.0 - 1.0 / E - self.epsilon).max(0.0));
            g
        };
        g.epsilon = Some(self.epsilon);
        g
    }

    fn report(
        &self,
        solver: SolverName,
        solution: Vec<usize>,
        floors: &[usize],
        seed: u64,
    ) -> SolveReport {
        // Rounding evaluates the objective once; count from the relaxation
        // so that repeated rounds report the same total.
        let inst = self
            .inst
            .with_objective(crate::objective::SubmodularOracle::new(
                self.inst.objective().function().clone(),
            ))
            .expect("same ground set");
        let mut report = SolveReport::build(
            solver,
            &inst,
            solution,
            floors,
            self.guarantee(),
            Some(seed),
        );
        report.oracle_calls += self.calls;
        report.branch = self.branch.map(|b| format!("{b:?}").to_lowercase());
        report
    }

    /// Swap rounding in the matroid. Colour counts are fair in expectation;
    /// the report says whether this run landed inside the concentration
    /// intervals.
    pub fn round_matroid(&self, seed: u64) -> Result<SolveReport> {
        let s = swap_round_matroid(&self.combination, self.inst.matroid(), seed)?;
        let intervals = concentration_interval(self.inst.lower(), self.inst.upper());
        let counts = self.inst.color_counts(&s);
        let inside = counts
            .iter()
            .zip(&intervals)
            .all(|(&k, &(lo, hi))| k as f64 >= lo - 1e-9 && k as f64 <= hi + 1e-9);
        let floors = vec![0; self.inst.num_colors()];
        let mut report = self.report(SolverName::RelaxRound, s, &floors, seed);
        report.concentration = Some(Concentration { intervals, inside });
        Ok(report)
    }

    /// Swap rounding in the intersection of the matroid and the fairness
    /// matroid. Needs a decomposable objective; the output is feasible.
    pub fn round_intersection(&self, seed: u64) -> Result<SolveReport> {
        let out = swap_round_intersection(&self.combination, &self.inst, seed, false)?;
        let floors = self.inst.lower().to_vec();
        Ok(self.report(SolverName::Decomposable, out.set, &floors, seed))
    }
}

/// Fractional solution then matroid swap rounding.
pub fn relax_round_expected(
    inst: &Instance,
    cfg: &ContinuousConfig,
    seed: u64,
) -> Result<SolveReport> {
    Relaxation::new(inst, cfg)?.round_matroid(seed)
}

/// Fractional solution then intersection swap rounding. Fails with a
/// configuration error unless the objective is decomposable over the
/// feasible family.
pub fn decomposable_solve(
    inst: &Instance,
    cfg: &ContinuousConfig,
    seed: u64,
) -> Result<SolveReport> {
    let status = inst.decomposability();
    if !status.holds() {
        return Err(FmsmError::Config(format!(
            "objective is not decomposable: {status:?}"
        )));
    }
    Relaxation::new(inst, cfg)?.round_intersection(seed)
}
