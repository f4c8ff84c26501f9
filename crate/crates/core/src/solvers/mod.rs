//! End-to-end solvers and the sub-solvers they call.
//!
//! | solver | fairness of the output |
//! |---|---|
//! | [`two_pass_monotone`] | at least `⌊ℓ_c/2⌋`, at most `u_c` |
//! | [`two_pass_nonmonotone`] | at least `⌊βℓ_c⌋`, at most `u_c` |
//! | [`relax_round_expected`] | `[ℓ_c, u_c]` in expectation |
//! | [`uniform_nonmonotone`] | exact |
//! | [`decomposable_solve`] | exact |
//!
//! Guarantee targets that depend on a sub-solver use its measured ratio
//! `α̂` from [`calibrate`].

mod calibration;
mod hartley;
mod relax;
mod report;
mod sub;
mod two_pass;
mod uniform;

use crate::error::Result;
use crate::instance::Instance;
use crate::objective::SubmodularOracle;

pub use calibration::{calibrate, Calibration, CalibrationPlan, CalibrationSetting};
pub use hartley::{hartley_lengths, hartley_sample, SCALE as HARTLEY_SCALE};
pub use relax::{decomposable_solve, relax_round_expected, Relaxation};
pub use report::{
    color_audit, ColorAudit, Concentration, Guarantee, PassAudit, SolveReport, SolverName,
};
pub use sub::{
    random_greedy, two_matroid_local_search, SubSolver, SubSolverKind, LOCAL_SEARCH_ITERATIONS,
};
pub use two_pass::{beta_floor, fair_reservoir, two_pass_monotone, two_pass_nonmonotone};
pub use uniform::uniform_nonmonotone;

/// The instance with its own oracle-call counter.
fn fresh(inst: &Instance) -> Result<Instance> {
    inst.with_objective(SubmodularOracle::new(inst.objective().function().clone()))
}
