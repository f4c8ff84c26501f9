//! FMSM instances: JSON data model, validation, feasibility and generators.

mod generate;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{FmsmError, Result};
use crate::matroid::{max_cardinality_intersection, Explicit, MatroidRef, Partition, Uniform};
use crate::objective::{
    Coverage, DecomposableSum, FacilityLocation, GraphCut, Modular, SetFunction, SubmodularOracle,
    Welfare,
};
use crate::set::check_elements;

pub use generate::{
    gen_integrality_gap, gen_random, gen_welfare, MatroidKind, ObjectiveKind, RandomParams,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceData {
    pub n: usize,
    pub colors: Vec<usize>,
    pub lower: Vec<usize>,
    pub upper: Vec<usize>,
    pub matroid: MatroidSpec,
    pub objective: ObjectiveSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MatroidSpec {
    Uniform {
        k: usize,
    },
    Partition {
        blocks: Vec<Vec<usize>>,
        caps: Vec<usize>,
    },
    Explicit {
        independent_sets: Vec<Vec<usize>>,
    },
}

/// A coverage function: element `e` covers universe points `covered_by[e]`.
/// Missing weights mean unit weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoverageSpec {
    pub universe_size: usize,
    pub covered_by: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub weight: f64,
}

/// A part of a decomposable objective: a function over the local positions
/// `0..group.len()` of `group`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartSpec {
    pub group: Vec<usize>,
    pub objective: ObjectiveSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ObjectiveSpec {
    Coverage {
        universe_size: usize,
        covered_by: Vec<Vec<usize>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        weights: Option<Vec<f64>>,
    },
    GraphCut {
        edges: Vec<Edge>,
    },
    FacilityLocation {
        values: Vec<Vec<f64>>,
    },
    Modular {
        weights: Vec<f64>,
    },
    Welfare {
        items: usize,
        agent_colors: Vec<usize>,
        utilities: Vec<CoverageSpec>,
    },
    Decomposable {
        #[serde(default)]
        class_parts: Vec<PartSpec>,
        #[serde(default)]
        color_parts: Vec<PartSpec>,
    },
}

fn coverage(
    universe_size: usize,
    covered_by: &[Vec<usize>],
    weights: &Option<Vec<f64>>,
) -> Result<Coverage> {
    let w = weights.clone().unwrap_or_else(|| vec![1.0; universe_size]);
    Coverage::new(universe_size, covered_by, w)
}

impl ObjectiveSpec {
    /// Compiles the description into a set function over `n` elements.
    pub fn build(&self, n: usize, path: &str) -> Result<Arc<dyn SetFunction>> {
        let at = |e: FmsmError| match e {
            FmsmError::Argument(m) => FmsmError::validation(path, m),
            other => other,
        };
        let f: Arc<dyn SetFunction> = match self {
            ObjectiveSpec::Coverage {
                universe_size,
                covered_by,
                weights,
            } => Arc::new(coverage(*universe_size, covered_by, weights).map_err(at)?),
            ObjectiveSpec::GraphCut { edges } => Arc::new(
                GraphCut::new(n, edges.iter().map(|e| (e.u, e.v, e.weight)).collect())
                    .map_err(at)?,
            ),
            ObjectiveSpec::FacilityLocation { values } => {
                Arc::new(FacilityLocation::new(n, values.clone()).map_err(at)?)
            }
            ObjectiveSpec::Modular { weights } => {
                Arc::new(Modular::new(weights.clone()).map_err(at)?)
            }
            ObjectiveSpec::Welfare {
                items,
                agent_colors,
                utilities,
            } => {
                let us = utilities
                    .iter()
                    .enumerate()
                    .map(|(a, u)| {
                        coverage(u.universe_size, &u.covered_by, &u.weights)
                            .map_err(|e| at_path(e, &format!("{path}.utilities[{a}]")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Arc::new(Welfare::new(*items, agent_colors.clone(), us).map_err(at)?)
            }
            ObjectiveSpec::Decomposable {
                class_parts,
                color_parts,
            } => {
                let compile = |parts: &[PartSpec], name: &str| {
                    parts
                        .iter()
                        .enumerate()
                        .map(|(i, p)| {
                            let sub = format!("{path}.{name}[{i}].objective");
                            Ok((p.group.clone(), p.objective.build(p.group.len(), &sub)?))
                        })
                        .collect::<Result<Vec<_>>>()
                };
                let cp = compile(class_parts, "class_parts")?;
                let kp = compile(color_parts, "color_parts")?;
                Arc::new(DecomposableSum::new(n, cp, kp).map_err(at)?)
            }
        };
        if f.ground_size() != n {
            return Err(FmsmError::validation(
                path,
                format!(
                    "objective is defined over {} elements, expected {n}",
                    f.ground_size()
                ),
            ));
        }
        Ok(f)
    }
}

fn at_path(e: FmsmError, path: &str) -> FmsmError {
    match e {
        FmsmError::Argument(m) => FmsmError::validation(path, m),
        other => other,
    }
}

/// Whether the objective may be treated as decomposable over the feasible
/// family.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Decomposability {
    /// A single colour: every function is a colour part.
    SingleColor,
    /// A uniform matroid has one equivalence class: every function is a
    /// class part.
    UniformMatroid,
    /// The objective declares parts that fit the classes and colours.
    Declared,
    /// No declaration, or one that does not fit.
    Unavailable(String),
}

impl Decomposability {
    pub fn holds(&self) -> bool {
        !matches!(self, Decomposability::Unavailable(_))
    }
}

/// A validated instance with compiled oracles. Immutable and cheap to clone.
#[derive(Debug, Clone)]
pub struct Instance {
    data: Arc<InstanceData>,
    groups: Arc<Vec<Vec<usize>>>,
    matroid: MatroidRef,
    objective: SubmodularOracle,
}

impl Instance {
    pub fn new(data: InstanceData) -> Result<Instance> {
        let n = data.n;
        if n == 0 {
            return Err(FmsmError::validation("n", "ground set must be nonempty"));
        }
        if data.colors.len() != n {
            return Err(FmsmError::validation(
                "colors",
                format!("expected {n} entries, got {}", data.colors.len()),
            ));
        }
        let num_colors = data.lower.len();
        if data.upper.len() != num_colors {
            return Err(FmsmError::validation(
                "upper",
                format!(
                    "expected {num_colors} entries to match `lower`, got {}",
                    data.upper.len()
                ),
            ));
        }
        let mut groups = vec![Vec::new(); num_colors];
        for (e, &c) in data.colors.iter().enumerate() {
            if c >= num_colors {
                return Err(FmsmError::validation(
                    format!("colors[{e}]"),
                    format!("color {c} has no bounds (there are {num_colors} colors)"),
                ));
            }
            groups[c].push(e);
        }
        for (c, g) in groups.iter().enumerate() {
            if g.is_empty() {
                return Err(FmsmError::validation(
                    format!("lower[{c}]"),
                    format!("color {c} has no elements"),
                ));
            }
            if data.lower[c] > data.upper[c] {
                return Err(FmsmError::validation(
                    format!("lower[{c}]"),
                    format!(
                        "lower bound {} exceeds upper bound {}",
                        data.lower[c], data.upper[c]
                    ),
                ));
            }
            if data.upper[c] > g.len() {
                return Err(FmsmError::validation(
                    format!("upper[{c}]"),
                    format!(
                        "upper bound {} exceeds color size {}",
                        data.upper[c],
                        g.len()
                    ),
                ));
            }
        }
        let matroid: MatroidRef = match &data.matroid {
            MatroidSpec::Uniform { k } => Arc::new(Uniform::new(n, *k)),
            MatroidSpec::Partition { blocks, caps } => {
                for (b, block) in blocks.iter().enumerate() {
                    check_elements(n, block)
                        .map_err(|m| FmsmError::validation(format!("matroid.blocks[{b}]"), m))?;
                }
                Arc::new(
                    Partition::new(n, blocks.clone(), caps.clone())
                        .map_err(|e| at_path(e, "matroid"))?,
                )
            }
            MatroidSpec::Explicit { independent_sets } => Arc::new(
                Explicit::new(n, independent_sets)
                    .map_err(|e| at_path(e, "matroid.independent_sets"))?,
            ),
        };
        let objective = SubmodularOracle::new(data.objective.build(n, "objective")?);
        Ok(Instance {
            data: Arc::new(data),
            groups: Arc::new(groups),
            matroid,
            objective,
        })
    }

    pub fn from_json(text: &str) -> Result<Instance> {
        Instance::new(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&*self.data).expect("instance data always serializes")
    }

    pub fn data(&self) -> &InstanceData {
        &self.data
    }

    pub fn n(&self) -> usize {
        self.data.n
    }

    pub fn num_colors(&self) -> usize {
        self.groups.len()
    }

    pub fn colors(&self) -> &[usize] {
        &self.data.colors
    }

    /// The colour groups `V_c`, each sorted ascending.
    pub fn color_groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    pub fn lower(&self) -> &[usize] {
        &self.data.lower
    }

    pub fn upper(&self) -> &[usize] {
        &self.data.upper
    }

    pub fn matroid(&self) -> &MatroidRef {
        &self.matroid
    }

    pub fn objective(&self) -> &SubmodularOracle {
        &self.objective
    }

    /// The instance with the objective replaced (the data record is kept).
    pub fn with_objective(&self, objective: SubmodularOracle) -> Result<Instance> {
        if objective.ground_size() != self.n() {
            return Err(FmsmError::Argument(format!(
                "objective over {} elements for an instance of {}",
                objective.ground_size(),
                self.n()
            )));
        }
        Ok(Instance {
            objective,
            ..self.clone()
        })
    }

    pub fn uniform_rank(&self) -> Option<usize> {
        match self.data.matroid {
            MatroidSpec::Uniform { k } => Some(k),
            _ => None,
        }
    }

    pub fn color_counts(&self, set: &[usize]) -> Vec<usize> {
        let mut counts = vec![0; self.num_colors()];
        for &e in set {
            counts[self.data.colors[e]] += 1;
        }
        counts
    }

    pub fn is_fair(&self, set: &[usize]) -> bool {
        self.color_counts(set)
            .iter()
            .zip(self.lower().iter().zip(self.upper()))
            .all(|(&n, (&l, &u))| l <= n && n <= u)
    }

    /// `set ∈ I ∩ C`. Out-of-range or repeated elements make a set infeasible.
    pub fn is_feasible(&self, set: &[usize]) -> bool {
        check_elements(self.n(), set).is_ok() && self.matroid.independent(set) && self.is_fair(set)
    }

    pub fn decomposability(&self) -> Decomposability {
        if self.num_colors() == 1 {
            return Decomposability::SingleColor;
        }
        if matches!(self.data.matroid, MatroidSpec::Uniform { .. }) {
            return Decomposability::UniformMatroid;
        }
        let Some(d) = self.objective.decomposition() else {
            return Decomposability::Unavailable("objective declares no decomposition".into());
        };
        let classes = match self.matroid.equivalence_classes() {
            Ok(c) => c,
            Err(e) => return Decomposability::Unavailable(e.to_string()),
        };
        let within = |group: &[usize], family: &[Vec<usize>]| {
            family.iter().any(|f| group.iter().all(|e| f.contains(e)))
        };
        if let Some(g) = d.class_groups.iter().find(|g| !within(g, &classes)) {
            return Decomposability::Unavailable(format!(
                "class part {g:?} is not inside one equivalence class"
            ));
        }
        if let Some(g) = d.color_groups.iter().find(|g| !within(g, &self.groups)) {
            return Decomposability::Unavailable(format!(
                "color part {g:?} is not inside one color group"
            ));
        }
        Decomposability::Declared
    }
}

/// A feasible set if one exists.
///
/// `F ≠ ∅` exactly when `I` and the partition matroid `{|X ∩ V_c| ≤ ℓ_c}`
/// share an independent set of size `Σ ℓ_c`: such a set meets every lower
/// bound with equality, and any feasible set contains one.
pub fn feasible_witness(inst: &Instance) -> Result<Option<Vec<usize>>> {
    let lower_caps = Partition::from_labels(inst.colors(), inst.lower().to_vec())?;
    let s = max_cardinality_intersection(inst.matroid().as_ref(), &lower_caps)?;
    let need: usize = inst.lower().iter().sum();
    Ok((s.len() == need).then_some(s))
}

pub fn feasibility_check(inst: &Instance) -> Result<bool> {
    Ok(feasible_witness(inst)?.is_some())
}

/// Shorthand used by tests and generators: a uniform-matroid instance.
pub fn uniform_instance(
    k: usize,
    colors: Vec<usize>,
    lower: Vec<usize>,
    upper: Vec<usize>,
    objective: ObjectiveSpec,
) -> Result<Instance> {
    Instance::new(InstanceData {
        n: colors.len(),
        colors,
        lower,
        upper,
        matroid: MatroidSpec::Uniform { k },
        objective,
    })
}
