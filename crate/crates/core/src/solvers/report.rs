use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{FmsmError, Result};
use crate::instance::Instance;
use crate::set::check_elements;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverName {
    TwoPassMonotone,
    TwoPassNonmonotone,
    RelaxRound,
    UniformNonmonotone,
    Decomposable,
}

impl SolverName {
    pub const ALL: [SolverName; 5] = [
        SolverName::TwoPassMonotone,
        SolverName::TwoPassNonmonotone,
        SolverName::RelaxRound,
        SolverName::UniformNonmonotone,
        SolverName::Decomposable,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SolverName::TwoPassMonotone => "two-pass-monotone",
            SolverName::TwoPassNonmonotone => "two-pass-nonmonotone",
            SolverName::RelaxRound => "relax-round",
            SolverName::UniformNonmonotone => "uniform-nonmonotone",
            SolverName::Decomposable => "decomposable",
        }
    }
}

impl fmt::Display for SolverName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SolverName {
    type Err = FmsmError;

    fn from_str(s: &str) -> Result<Self> {
        SolverName::ALL
            .into_iter()
            .find(|n| n.as_str() == s)
            .ok_or_else(|| FmsmError::Argument(format!("unknown solver `{s}`")))
    }
}

/// Count of one colour in the returned set against its bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColorAudit {
    pub color: usize,
    pub count: usize,
    pub lower: usize,
    pub upper: usize,
    /// Smallest count the solver promises (equal to `lower` for exact
    /// solvers, reduced for the two-pass solvers, 0 for relax-and-round).
    pub floor: usize,
    pub meets_lower: bool,
    pub meets_floor: bool,
    pub meets_upper: bool,
    /// `count / lower`, absent when `lower = 0`.
    pub lower_factor: Option<f64>,
    /// `count / upper`, absent when `upper = 0`.
    pub upper_factor: Option<f64>,
}

/// The promised approximation ratio and the quantities it was computed from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Guarantee {
    /// `None` when it depends on an unmeasured sub-solver ratio.
    pub target: Option<f64>,
    pub formula: String,
    pub alpha_hat: Option<f64>,
    pub beta: Option<f64>,
    pub epsilon: Option<f64>,
    pub r: Option<f64>,
}

impl Guarantee {
    pub(crate) fn new(formula: &str) -> Self {
        Guarantee {
            target: None,
            formula: formula.into(),
            alpha_hat: None,
            beta: None,
            epsilon: None,
            r: None,
        }
    }
}

/// One of the two passes of a two-pass solver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PassAudit {
    /// The protected elements `S_i`.
    pub protected: Vec<usize>,
    /// The sub-solver output `R_i`.
    pub sub_solution: Vec<usize>,
    pub sub_value: f64,
    /// `S'_i` after filling from `S_i`.
    pub filled: Vec<usize>,
    pub value: f64,
}

/// Expected-fairness concentration check of a relax-and-round run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Concentration {
    pub intervals: Vec<(f64, f64)>,
    pub inside: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub solver: SolverName,
    pub solution: Vec<usize>,
    pub value: f64,
    pub colors: Vec<ColorAudit>,
    pub independent: bool,
    pub fair: bool,
    pub feasible: bool,
    pub opt: Option<f64>,
    pub ratio: Option<f64>,
    pub guarantee: Guarantee,
    pub oracle_calls: u64,
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub wall_time_ms: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub passes: Vec<PassAudit>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub branch: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub concentration: Option<Concentration>,
}

fn factor(count: usize, bound: usize) -> Option<f64> {
    (bound > 0).then(|| count as f64 / bound as f64)
}

pub fn color_audit(inst: &Instance, set: &[usize], floors: &[usize]) -> Vec<ColorAudit> {
    inst.color_counts(set)
        .into_iter()
        .enumerate()
        .map(|(c, count)| {
            let (lower, upper, floor) = (inst.lower()[c], inst.upper()[c], floors[c]);
            ColorAudit {
                color: c,
                count,
                lower,
                upper,
                floor,
                meets_lower: count >= lower,
                meets_floor: count >= floor,
                meets_upper: count <= upper,
                lower_factor: factor(count, lower),
                upper_factor: factor(count, upper),
            }
        })
        .collect()
}

impl SolveReport {
    pub(crate) fn build(
        solver: SolverName,
        inst: &Instance,
        solution: Vec<usize>,
        floors: &[usize],
        guarantee: Guarantee,
        seed: Option<u64>,
    ) -> SolveReport {
        let value = inst.objective().value(&solution);
        let independent = inst.matroid().independent(&solution);
        let fair = inst.is_fair(&solution);
        SolveReport {
            solver,
            colors: color_audit(inst, &solution, floors),
            value,
            independent,
            fair,
            feasible: independent && fair,
            solution,
            opt: None,
            ratio: None,
            guarantee,
            oracle_calls: inst.objective().calls(),
            seed,
            wall_time_ms: None,
            passes: Vec::new(),
            branch: None,
            concentration: None,
        }
    }

    /// Records the optimum and the ratio `value / opt` (absent when the
    /// optimum is 0).
    pub fn with_opt(mut self, opt: f64) -> Self {
        self.opt = Some(opt);
        self.ratio = (opt > 0.0).then(|| self.value / opt);
        self
    }

    /// Every colour count meets its promised floor and upper bound.
    pub fn within_floors(&self) -> bool {
        self.colors.iter().all(|c| c.meets_floor && c.meets_upper)
    }

    /// Recounts the solution against `inst` and compares with the stored
    /// audit.
    pub fn verify_audit(&self, inst: &Instance) -> Result<()> {
        check_elements(inst.n(), &self.solution).map_err(FmsmError::Argument)?;
        let floors: Vec<usize> = self.colors.iter().map(|c| c.floor).collect();
        if floors.len() != inst.num_colors() {
            return Err(FmsmError::Argument(
                "audit has the wrong number of colours".into(),
            ));
        }
        let fresh = color_audit(inst, &self.solution, &floors);
        if fresh != self.colors {
            return Err(FmsmError::Argument(
                "colour audit does not match the solution".into(),
            ));
        }
        let independent = inst.matroid().independent(&self.solution);
        if independent != self.independent || inst.is_fair(&self.solution) != self.fair {
            return Err(FmsmError::Argument(
                "feasibility flags do not match the solution".into(),
            ));
        }
        Ok(())
    }
}
