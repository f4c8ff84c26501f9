use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{
    feasibility_check, CoverageSpec, Edge, Instance, InstanceData, MatroidSpec, ObjectiveSpec,
};
use crate::error::{FmsmError, Result};
use crate::seed::rng_for;

const RETRIES: u64 = 100;

/// The integrality-gap family: `t` disjoint paths of `2s + 1` edges between
/// two shared endpoints, as a bipartite matching problem.
///
/// Edge `j` of path `i` has id `i·(2s+1) + j` and joins the path vertices
/// `w_j` and `w_{j+1}`, where `w_0` is the shared vertex on side A and
/// `w_{2s+1}` the shared vertex on side B. A-vertices are the matroid blocks
/// (cap 1), B-vertices are the colours (`ℓ = u = 1`). The objective counts the
/// paths whose even-position edges are touched.
pub fn gen_integrality_gap(t: usize, s: usize) -> Result<Instance> {
    if t < 2 || s < 1 {
        return Err(FmsmError::Argument(format!(
            "need t >= 2 and s >= 1, got t={t}, s={s}"
        )));
    }
    let len = 2 * s + 1;
    let n = t * len;
    let side = t * s + 1;
    let a_vertex = |i: usize, m: usize| if m == 0 { 0 } else { 1 + i * s + (m / 2 - 1) };
    let b_vertex = |i: usize, m: usize| if m == len { 0 } else { 1 + i * s + (m - 1) / 2 };
    let mut blocks = vec![Vec::new(); side];
    let mut colors = vec![0; n];
    let mut covered_by = vec![Vec::new(); n];
    for i in 0..t {
        for j in 0..len {
            let e = i * len + j;
            let (a, b) = if j % 2 == 0 {
                (a_vertex(i, j), b_vertex(i, j + 1))
            } else {
                (a_vertex(i, j + 1), b_vertex(i, j))
            };
            blocks[a].push(e);
            colors[e] = b;
            if j % 2 == 0 {
                covered_by[e].push(i);
            }
        }
    }
    Instance::new(InstanceData {
        n,
        colors,
        lower: vec![1; side],
        upper: vec![1; side],
        matroid: MatroidSpec::Partition {
            blocks,
            caps: vec![1; side],
        },
        objective: ObjectiveSpec::Coverage {
            universe_size: t,
            covered_by,
            weights: None,
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatroidKind {
    Uniform,
    Partition,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectiveKind {
    Coverage,
    GraphCut,
    FacilityLocation,
    Modular,
}

impl FromStr for MatroidKind {
    type Err = FmsmError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(MatroidKind::Uniform),
            "partition" => Ok(MatroidKind::Partition),
            _ => Err(FmsmError::Argument(format!("unknown matroid kind `{s}`"))),
        }
    }
}

impl FromStr for ObjectiveKind {
    type Err = FmsmError;

    fn from_str(s: &str) -> Result<Self> {
        match s.replace('-', "_").as_str() {
            "coverage" => Ok(ObjectiveKind::Coverage),
            "graph_cut" => Ok(ObjectiveKind::GraphCut),
            "facility_location" => Ok(ObjectiveKind::FacilityLocation),
            "modular" => Ok(ObjectiveKind::Modular),
            _ => Err(FmsmError::Argument(format!("unknown objective kind `{s}`"))),
        }
    }
}

impl ObjectiveKind {
    pub fn is_monotone(self) -> bool {
        self != ObjectiveKind::GraphCut
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RandomParams {
    pub n: usize,
    pub colors: usize,
    pub matroid: MatroidKind,
    pub objective: ObjectiveKind,
}

impl RandomParams {
    pub fn new(n: usize, colors: usize, matroid: MatroidKind, objective: ObjectiveKind) -> Self {
        RandomParams {
            n,
            colors,
            matroid,
            objective,
        }
    }
}

fn random_colors(rng: &mut ChaCha8Rng, n: usize, c: usize) -> Vec<usize> {
    let mut colors: Vec<usize> = (0..n)
        .map(|e| if e < c { e } else { rng.random_range(0..c) })
        .collect();
    colors.shuffle(rng);
    colors
}

fn group_sizes(colors: &[usize], c: usize) -> Vec<usize> {
    let mut sizes = vec![0; c];
    for &x in colors {
        sizes[x] += 1;
    }
    sizes
}

fn random_objective(rng: &mut ChaCha8Rng, n: usize, kind: ObjectiveKind) -> ObjectiveSpec {
    match kind {
        ObjectiveKind::Coverage => {
            let universe_size = n.max(2);
            let covered_by = (0..n)
                .map(|_| {
                    let k = rng.random_range(1..=3.min(universe_size));
                    let mut pts: Vec<usize> =
                        rand::seq::index::sample(rng, universe_size, k).into_vec();
                    pts.sort_unstable();
                    pts
                })
                .collect();
            let weights = (0..universe_size)
                .map(|_| rng.random_range(1..=5) as f64)
                .collect();
            ObjectiveSpec::Coverage {
                universe_size,
                covered_by,
                weights: Some(weights),
            }
        }
        ObjectiveKind::GraphCut => {
            let mut edges = Vec::new();
            for u in 0..n {
                for v in u + 1..n {
                    if rng.random_bool(0.35) {
                        edges.push(Edge {
                            u,
                            v,
                            weight: rng.random_range(1..=5) as f64,
                        });
                    }
                }
            }
            ObjectiveSpec::GraphCut { edges }
        }
        ObjectiveKind::FacilityLocation => {
            let clients = (n / 2).max(3);
            let values = (0..clients)
                .map(|_| (0..n).map(|_| rng.random_range(0..=9) as f64).collect())
                .collect();
            ObjectiveSpec::FacilityLocation { values }
        }
        ObjectiveKind::Modular => ObjectiveSpec::Modular {
            weights: (0..n).map(|_| rng.random_range(1..=9) as f64).collect(),
        },
    }
}

fn random_matroid(rng: &mut ChaCha8Rng, n: usize, kind: MatroidKind) -> MatroidSpec {
    match kind {
        MatroidKind::Uniform => {
            let lo = (n / 4).max(1);
            let hi = (n / 2 + 1).max(lo).min(n);
            MatroidSpec::Uniform {
                k: rng.random_range(lo..=hi),
            }
        }
        MatroidKind::Partition => {
            let b = rng.random_range(2.min(n)..=(n / 3).max(2).min(n));
            let labels = random_colors(rng, n, b);
            let mut blocks = vec![Vec::new(); b];
            for (e, &l) in labels.iter().enumerate() {
                blocks[l].push(e);
            }
            let caps = blocks
                .iter()
                .map(|g| rng.random_range(1..=g.len().min(2)))
                .collect();
            MatroidSpec::Partition { blocks, caps }
        }
    }
}

/// A random feasible instance, deterministic in `seed`. Bounds are redrawn
/// until the instance is feasible.
pub fn gen_random(params: RandomParams, seed: u64) -> Result<Instance> {
    let RandomParams {
        n,
        colors: c,
        matroid,
        objective,
    } = params;
    if n == 0 || c == 0 || c > n {
        return Err(FmsmError::Argument(format!(
            "need 1 <= colors <= n, got n={n}, colors={c}"
        )));
    }
    for attempt in 0..RETRIES {
        let mut rng = rng_for(seed, &[attempt]);
        let colors = random_colors(&mut rng, n, c);
        let sizes = group_sizes(&colors, c);
        let lower: Vec<usize> = sizes
            .iter()
            .map(|&s| rng.random_range(0..=s.min(2)))
            .collect();
        let upper = sizes
            .iter()
            .zip(&lower)
            .map(|(&s, &l)| rng.random_range(l.max(1)..=s))
            .collect();
        let matroid = random_matroid(&mut rng, n, matroid);
        let objective = random_objective(&mut rng, n, objective);
        let inst = Instance::new(InstanceData {
            n,
            colors,
            lower,
            upper,
            matroid,
            objective,
        })?;
        if feasibility_check(&inst)? {
            return Ok(inst);
        }
    }
    Err(FmsmError::Generation(format!(
        "no feasible instance after {RETRIES} attempts"
    )))
}

/// A fair submodular welfare instance with `agents × items` elements.
/// Element `a·items + i` assigns item `i` to agent `a`; each item goes to at
/// most one agent; the colour of an element is its agent's colour. Agent
/// utilities are random weighted coverage functions.
pub fn gen_welfare(agents: usize, items: usize, colors: usize, seed: u64) -> Result<Instance> {
    if agents == 0 || items == 0 || colors == 0 || colors > agents {
        return Err(FmsmError::Argument(format!(
            "need agents, items >= 1 and 1 <= colors <= agents, got {agents}, {items}, {colors}"
        )));
    }
    let n = agents * items;
    for attempt in 0..RETRIES {
        let mut rng = rng_for(seed, &[attempt]);
        let agent_colors = random_colors(&mut rng, agents, colors);
        let universe_size = items + 1;
        let utilities: Vec<CoverageSpec> = (0..agents)
            .map(|_| CoverageSpec {
                universe_size,
                covered_by: (0..items)
                    .map(|_| {
                        let k = rng.random_range(1..=2);
                        let mut pts =
                            rand::seq::index::sample(&mut rng, universe_size, k).into_vec();
                        pts.sort_unstable();
                        pts
                    })
                    .collect(),
                weights: Some(
                    (0..universe_size)
                        .map(|_| rng.random_range(1..=4) as f64)
                        .collect(),
                ),
            })
            .collect();
        let element_colors: Vec<usize> = agent_colors
            .iter()
            .flat_map(|&c| std::iter::repeat_n(c, items))
            .collect();
        let sizes = group_sizes(&element_colors, colors);
        let lower: Vec<usize> = (0..colors).map(|_| rng.random_range(0..=1)).collect();
        let upper: Vec<usize> = sizes
            .iter()
            .zip(&lower)
            .map(|(&s, &l)| rng.random_range(l.max(1)..=s.min(items)))
            .collect();
        let blocks = (0..items)
            .map(|i| (0..agents).map(|a| a * items + i).collect())
            .collect();
        let inst = Instance::new(InstanceData {
            n,
            colors: element_colors,
            lower,
            upper,
            matroid: MatroidSpec::Partition {
                blocks,
                caps: vec![1; items],
            },
            objective: ObjectiveSpec::Welfare {
                items,
                agent_colors,
                utilities,
            },
        })?;
        if feasibility_check(&inst)? {
            return Ok(inst);
        }
    }
    Err(FmsmError::Generation(format!(
        "no feasible welfare instance after {RETRIES} attempts"
    )))
}
