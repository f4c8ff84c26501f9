//! Measuring a sub-solver's approximation ratio against brute force.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::brute_force_max;
use crate::error::Result;
use crate::instance::{gen_random, MatroidKind, ObjectiveKind, RandomParams};
use crate::matroid::{color_upper, MatroidRef, Uniform};
use crate::objective::SubmodularOracle;
use crate::seed::derive_seed;

use super::SubSolver;

/// Which constraint shape the corpus exercises.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CalibrationSetting {
    /// A random partition matroid intersected with colour upper bounds, as
    /// in the two-pass solvers.
    TwoMatroid,
    /// Colour caps alone, as in the uniform-matroid solver.
    Partition,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CalibrationPlan {
    pub setting: CalibrationSetting,
    pub monotone: bool,
    pub instances: usize,
    pub n: usize,
    pub seeds: usize,
    pub seed: u64,
}

impl CalibrationPlan {
    pub fn new(setting: CalibrationSetting, monotone: bool) -> Self {
        CalibrationPlan {
            setting,
            monotone,
            instances: 16,
            n: 10,
            seeds: 5,
            seed: 2024,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub plan: CalibrationPlan,
    /// Minimum over instances of the mean ratio.
    pub alpha_hat: f64,
    /// Mean of `f(S)/OPT` over seeds, per instance with `OPT > 0`.
    pub ratios: Vec<f64>,
}

type Case = (MatroidRef, MatroidRef, SubmodularOracle);

fn corpus(plan: &CalibrationPlan) -> Result<Vec<Case>> {
    let objective = if plan.monotone {
        ObjectiveKind::Coverage
    } else {
        ObjectiveKind::GraphCut
    };
    (0..plan.instances as u64)
        .map(|i| {
            let params = RandomParams::new(plan.n, 3, MatroidKind::Partition, objective);
            let inst = gen_random(params, derive_seed(plan.seed, &[i]))?;
            let caps: MatroidRef = Arc::new(color_upper(inst.colors(), inst.upper())?);
            Ok(match plan.setting {
                CalibrationSetting::TwoMatroid => {
                    (inst.matroid().clone(), caps, inst.objective().clone())
                }
                CalibrationSetting::Partition => (
                    caps,
                    Arc::new(Uniform::free(plan.n)) as MatroidRef,
                    inst.objective().clone(),
                ),
            })
        })
        .collect()
}

/// Runs `sub` on a seeded corpus and reports `α̂`.
pub fn calibrate(sub: &SubSolver, plan: CalibrationPlan) -> Result<Calibration> {
    let cases = corpus(&plan)?;
    let per_case: Vec<Option<f64>> = cases
        .par_iter()
        .enumerate()
        .map(|(i, (m1, m2, f))| {
            let opt = brute_force_max(f, |s| m1.independent(s) && m2.independent(s))?.value;
            if opt <= 0.0 {
                return Ok(None);
            }
            let mut total = 0.0;
            for s in 0..plan.seeds as u64 {
                let set = sub.run(m1, m2, f, derive_seed(plan.seed, &[i as u64, s]))?;
                total += f.value(&set) / opt;
            }
            Ok(Some(total / plan.seeds as f64))
        })
        .collect::<Result<_>>()?;
    let ratios: Vec<f64> = per_case.into_iter().flatten().collect();
    let alpha_hat = ratios.iter().copied().fold(1.0, f64::min);
    Ok(Calibration {
        plan,
        alpha_hat,
        ratios,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn calibration_is_deterministic_and_bounded() {
        let plan = CalibrationPlan {
            instances: 4,
            n: 8,
            seeds: 2,
            ..CalibrationPlan::new(CalibrationSetting::TwoMatroid, false)
        };
        let sub = SubSolver::local_search(1, 0.0, true);
        let a = calibrate(&sub, plan).unwrap();
        let b = calibrate(&sub, plan).unwrap();
        assert_eq!(a, b);
        assert!(a.alpha_hat > 0.0 && a.alpha_hat <= 1.0);
        assert_eq!(a.alpha_hat, a.ratios.iter().copied().fold(1.0, f64::min));
    }

    #[test]
    fn partition_setting_runs() {
        let plan = CalibrationPlan {
            instances: 3,
            n: 8,
            seeds: 3,
            ..CalibrationPlan::new(CalibrationSetting::Partition, false)
        };
        let c = calibrate(&SubSolver::random_greedy(), plan).unwrap();
        assert!(c.ratios.iter().all(|r| (0.0..=1.0 + 1e-12).contains(r)));
    }
}
