//! Ground truth and reporting statistics: brute-force optima, minimum
//! ℓ∞-norm points of `P_F` and `1 − P_F`, the integrality-gap value, and
//! small summary helpers.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{FmsmError, Result};
use crate::instance::{gen_integrality_gap, Instance};
use crate::multilinear::MultilinearEstimator;
use crate::objective::SubmodularOracle;
use crate::polytope::{min_inf_norm, PolytopeDescription};
use crate::set::mask_to_vec;

/// Hard cap on the ground set for exhaustive enumeration.
pub const BRUTE_FORCE_LIMIT: usize = 22;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Optimum {
    pub value: f64,
    pub set: Vec<usize>,
}

fn better(a: Option<Optimum>, b: Option<Optimum>) -> Option<Optimum> {
    match (a, b) {
        (Some(a), Some(b)) => {
            if b.value > a.value || (b.value == a.value && b.set < a.set) {
                Some(b)
            } else {
                Some(a)
            }
        }
        (a, b) => a.or(b),
    }
}

/// `max f(S)` over all `S ⊆ {0..n}` accepted by `member`. Ties go to the
/// lexicographically smallest sorted set.
pub fn brute_force_max(
    oracle: &SubmodularOracle,
    member: impl Fn(&[usize]) -> bool + Sync,
) -> Result<Optimum> {
    let n = oracle.ground_size();
    if n > BRUTE_FORCE_LIMIT {
        return Err(FmsmError::Unsupported(format!(
            "brute force is limited to n <= {BRUTE_FORCE_LIMIT}, got {n}"
        )));
    }
    (0..1u64 << n)
        .into_par_iter()
        .map(|m| {
            let s = mask_to_vec(m);
            member(&s).then(|| Optimum {
                value: oracle.value(&s),
                set: s,
            })
        })
        .reduce(|| None, better)
        .ok_or_else(|| FmsmError::Infeasible("no set satisfies the constraints".into()))
}

/// `OPT = max_{S ∈ F} f(S)` by enumeration.
pub fn brute_force_opt(inst: &Instance) -> Result<Optimum> {
    let masks: Vec<u64> = inst
        .color_groups()
        .iter()
        .map(|g| g.iter().fold(0u64, |m, &e| m | 1 << e))
        .collect();
    let (lower, upper) = (inst.lower(), inst.upper());
    brute_force_max(inst.objective(), |s| {
        let m = crate::set::vec_to_mask(s);
        masks.iter().enumerate().all(|(c, g)| {
            let k = (m & g).count_ones() as usize;
            lower[c] <= k && k <= upper[c]
        }) && inst.matroid().independent(s)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NormMethod {
    ClosedFormUniform,
    Lp,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormReport {
    /// `min_{x ∈ P_F} ‖x‖∞`.
    pub r_p: f64,
    /// `min_{x ∈ 1 − P_F} ‖x‖∞`.
    pub r_comp: f64,
    pub r: f64,
    pub witness_p: Vec<f64>,
    pub witness_comp: Vec<f64>,
    pub method: NormMethod,
}

fn inf_norm(x: &[f64]) -> f64 {
    x.iter().copied().fold(0.0, f64::max)
}

/// Closed form for a uniform matroid of rank `k`.
///
/// Colours are sorted by `ℓ_c / |V_c|` (ties by index) and `t` is the largest
/// prefix length with `(ℓ_t/|V_t|)·Σ_{c≤t}|V_c| + Σ_{c>t} ℓ_c ≤ k`. Then
/// `r_P = max_c ℓ_c/|V_c|` and `r_comp = 1 − min{τ, min_{c≤t} u_c/|V_c|}`
/// with `τ = (k − Σ_{c>t} ℓ_c) / Σ_{c≤t}|V_c|`.
pub fn min_inf_norm_uniform(inst: &Instance) -> Result<NormReport> {
    let k = inst
        .uniform_rank()
        .ok_or_else(|| FmsmError::Config("closed-form norms need a uniform matroid".into()))?;
    let groups = inst.color_groups();
    let (lower, upper) = (inst.lower(), inst.upper());
    let size = |c: usize| groups[c].len();
    let mut order: Vec<usize> = (0..groups.len()).collect();
    order.sort_by(|&a, &b| {
        (lower[a] * size(b))
            .cmp(&(lower[b] * size(a)))
            .then(a.cmp(&b))
    });

    let n = inst.n();
    let mut witness_p = vec![0.0; n];
    for (c, g) in groups.iter().enumerate() {
        for &e in g {
            witness_p[e] = lower[c] as f64 / size(c) as f64;
        }
    }
    let r_p = inf_norm(&witness_p);

    let k = k as f64;
    let mut t = None;
    for (pos, &c) in order.iter().enumerate() {
        let head: usize = order[..=pos].iter().map(|&d| size(d)).sum();
        let tail: usize = order[pos + 1..].iter().map(|&d| lower[d]).sum();
        if lower[c] as f64 / size(c) as f64 * head as f64 + tail as f64 <= k + 1e-12 {
            t = Some(pos);
        }
    }
    let t = t.ok_or_else(|| FmsmError::Infeasible("lower bounds exceed the rank".into()))?;
    let head: usize = order[..=t].iter().map(|&d| size(d)).sum();
    let tail: usize = order[t + 1..].iter().map(|&d| lower[d]).sum();
    let tau = (k - tail as f64) / head as f64;
    let mut x = vec![0.0; n];
    for (pos, &c) in order.iter().enumerate() {
        let v = if pos <= t {
            tau.min(upper[c] as f64 / size(c) as f64)
        } else {
            lower[c] as f64 / size(c) as f64
        };
        for &e in &groups[c] {
            x[e] = v;
        }
    }
    let floor = order[..=t]
        .iter()
        .map(|&c| upper[c] as f64 / size(c) as f64)
        .fold(tau, f64::min);
    let witness_comp: Vec<f64> = x.iter().map(|v| 1.0 - v).collect();
    let r_comp = 1.0 - floor;
    Ok(NormReport {
        r_p,
        r_comp,
        r: r_p.min(r_comp),
        witness_p,
        witness_comp,
        method: NormMethod::ClosedFormUniform,
    })
}

/// Both norms by LP bisection over the explicit description.
pub fn min_inf_norm_lp(inst: &Instance) -> Result<NormReport> {
    let desc = PolytopeDescription::from_instance(inst)?;
    let (r_p, witness_p) = min_inf_norm(&desc)?;
    let (r_comp, witness_comp) = min_inf_norm(&desc.complement())?;
    Ok(NormReport {
        r_p,
        r_comp,
        r: r_p.min(r_comp),
        witness_p,
        witness_comp,
        method: NormMethod::Lp,
    })
}

/// Closed form when available, LP otherwise.
pub fn min_inf_norm_auto(inst: &Instance) -> Result<NormReport> {
    if inst.uniform_rank().is_some() {
        min_inf_norm_uniform(inst)
    } else {
        min_inf_norm_lp(inst)
    }
}

/// `q = 1 − max_c ℓ_c/|V_c|`.
pub fn excess_ratio(inst: &Instance) -> f64 {
    1.0 - inst
        .color_groups()
        .iter()
        .zip(inst.lower())
        .map(|(g, &l)| l as f64 / g.len() as f64)
        .fold(0.0, f64::max)
}

/// `t · (1 − (1 − 1/t)^{s+1})`, the multilinear value of the averaged
/// matchings point of the integrality-gap instance.
pub fn gap_ratio(t: usize, s: usize) -> Result<f64> {
    if t < 2 || s < 1 {
        return Err(FmsmError::Argument(format!(
            "need t >= 2 and s >= 1, got t={t}, s={s}"
        )));
    }
    let t_f = t as f64;
    Ok(t_f * (1.0 - (1.0 - 1.0 / t_f).powi(s as i32 + 1)))
}

/// The averaged-matchings point: `1/t` on the even-position edges of each
/// path and `1 − 1/t` on the others.
pub fn gap_point(t: usize, s: usize) -> Vec<f64> {
    let len = 2 * s + 1;
    (0..t * len)
        .map(|e| {
            if (e % len).is_multiple_of(2) {
                1.0 / t as f64
            } else {
                1.0 - 1.0 / t as f64
            }
        })
        .collect()
}

/// Exact multilinear value at [`gap_point`], by enumeration.
pub fn gap_ratio_exact(t: usize, s: usize) -> Result<f64> {
    let inst = gen_integrality_gap(t, s)?;
    MultilinearEstimator::exact(inst.objective().clone())?.eval(&gap_point(t, s))
}

/// Per-colour interval `[(1 − √(3 ln(2C)/ℓ_c))·ℓ_c, (1 + √(3 ln(2C)/u_c))·u_c]`
/// within which relax-and-round solutions concentrate.
pub fn concentration_interval(lower: &[usize], upper: &[usize]) -> Vec<(f64, f64)> {
    let log = (2.0 * lower.len() as f64).ln();
    let dev = |b: usize| {
        if b == 0 {
            0.0
        } else {
            (3.0 * log / b as f64).sqrt()
        }
    };
    lower
        .iter()
        .zip(upper)
        .map(|(&l, &u)| ((1.0 - dev(l)) * l as f64, (1.0 + dev(u)) * u as f64))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Summary {
    pub count: usize,
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub max: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Summary {
        let count = values.len();
        if count == 0 {
            return Summary {
                count,
                mean: 0.0,
                std: 0.0,
                min: 0.0,
                max: 0.0,
            };
        }
        let mean = values.iter().sum::<f64>() / count as f64;
        let var = if count > 1 {
            values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (count - 1) as f64
        } else {
            0.0
        };
        Summary {
            count,
            mean,
            std: var.sqrt(),
            min: values.iter().copied().fold(f64::INFINITY, f64::min),
            max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        }
    }

    /// Standard error of the mean.
    pub fn stderr(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            self.std / (self.count as f64).sqrt()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{uniform_instance, ObjectiveSpec};

    fn modular(w: &[f64]) -> ObjectiveSpec {
        ObjectiveSpec::Modular {
            weights: w.to_vec(),
        }
    }

    #[test]
    fn gap_instance_optimum_is_one() {
        let opt = brute_force_opt(&gen_integrality_gap(2, 1).unwrap()).unwrap();
        assert_eq!(opt.value, 1.0);
    }

    #[test]
    fn top_two_modular() {
        let inst =
            uniform_instance(2, vec![0; 3], vec![0], vec![2], modular(&[3.0, 2.0, 1.0])).unwrap();
        let opt = brute_force_opt(&inst).unwrap();
        assert_eq!(
            opt,
            Optimum {
                value: 5.0,
                set: vec![0, 1]
            }
        );
    }

    #[test]
    fn single_feasible_set() {
        let inst = uniform_instance(
            2,
            vec![0, 0, 1],
            vec![2, 0],
            vec![2, 0],
            modular(&[1.0, 4.0, 9.0]),
        )
        .unwrap();
        assert_eq!(
            brute_force_opt(&inst).unwrap(),
            Optimum {
                value: 5.0,
                set: vec![0, 1]
            }
        );
    }

    #[test]
    fn ties_break_lexicographically() {
        let inst =
            uniform_instance(1, vec![0; 3], vec![0], vec![1], modular(&[1.0, 1.0, 1.0])).unwrap();
        assert_eq!(brute_force_opt(&inst).unwrap().set, vec![0]);
    }

    #[test]
    fn oversized_instances_are_refused() {
        let inst = uniform_instance(1, vec![0; 23], vec![0], vec![1], modular(&[1.0; 23])).unwrap();
        assert!(matches!(
            brute_force_opt(&inst),
            Err(FmsmError::Unsupported(_))
        ));
    }

    #[test]
    fn worked_uniform_example() {
        let inst = uniform_instance(
            3,
            vec![0, 0, 0, 0, 1, 1],
            vec![1, 1],
            vec![2, 2],
            modular(&[1.0; 6]),
        )
        .unwrap();
        let r = min_inf_norm_uniform(&inst).unwrap();
        assert_eq!(r.r_p, 0.5);
        assert_eq!(r.r_comp, 0.5);
        assert_eq!(r.r, 0.5);
        let lp = min_inf_norm_lp(&inst).unwrap();
        assert!((lp.r - 0.5).abs() < 1e-6);
        let desc = PolytopeDescription::from_instance(&inst).unwrap();
        assert!(desc.contains(&r.witness_p, 1e-9));
        assert!(desc.complement().contains(&r.witness_comp, 1e-9));
        assert!((inf_norm(&r.witness_comp) - r.r_comp).abs() < 1e-12);
    }

    #[test]
    fn no_lower_bounds_means_zero_norm() {
        let inst =
            uniform_instance(2, vec![0, 1, 1], vec![0, 0], vec![1, 2], modular(&[1.0; 3])).unwrap();
        let r = min_inf_norm_uniform(&inst).unwrap();
        assert_eq!((r.r_p, r.r), (0.0, 0.0));
    }

    #[test]
    fn proportional_bounds_give_at_most_half() {
        // k = n, ℓ_c ≤ k|V_c|/n
        let inst = uniform_instance(
            5,
            vec![0, 0, 1, 1, 1],
            vec![2, 1],
            vec![2, 3],
            modular(&[1.0; 5]),
        )
        .unwrap();
        assert!(min_inf_norm_uniform(&inst).unwrap().r <= 0.5);
    }

    #[test]
    fn gap_instance_norm() {
        for t in [2, 3, 4] {
            let r = min_inf_norm_lp(&gen_integrality_gap(t, 1).unwrap()).unwrap();
            assert!(
                (r.r - (1.0 - 1.0 / t as f64)).abs() < 1e-6,
                "t={t}: {}",
                r.r
            );
        }
    }

    #[test]
    fn singleton_polytope_norm_is_one() {
        let inst =
            uniform_instance(2, vec![0, 0, 1], vec![2, 0], vec![2, 0], modular(&[1.0; 3])).unwrap();
        assert!((min_inf_norm_lp(&inst).unwrap().r_p - 1.0).abs() < 1e-6);
    }

    #[test]
    fn gap_ratio_values() {
        assert!((gap_ratio(3, 3).unwrap() - 65.0 / 27.0).abs() < 1e-12);
        assert!((gap_ratio(2, 1).unwrap() - 1.5).abs() < 1e-12);
        assert!((gap_ratio_exact(2, 1).unwrap() - 1.5).abs() < 1e-9);
        let seq: Vec<f64> = (2..=5).map(|t| gap_ratio(t, t).unwrap()).collect();
        assert!(seq.windows(2).all(|w| w[1] > w[0]));
        assert!(gap_ratio(1, 1).is_err());
    }

    #[test]
    fn excess_ratio_examples() {
        let inst = uniform_instance(
            3,
            vec![0, 0, 0, 0, 1, 1],
            vec![1, 1],
            vec![2, 2],
            modular(&[1.0; 6]),
        )
        .unwrap();
        assert_eq!(excess_ratio(&inst), 0.5);
        assert!(
            (excess_ratio(&inst) - (1.0 - min_inf_norm_uniform(&inst).unwrap().r_p)).abs() < 1e-12
        );
        let free =
            uniform_instance(1, vec![0, 1], vec![0, 0], vec![1, 1], modular(&[1.0; 2])).unwrap();
        assert_eq!(excess_ratio(&free), 1.0);
    }

    #[test]
    fn interval_for_two_colors_of_one_hundred() {
        let iv = concentration_interval(&[100, 100], &[100, 100]);
        assert!((iv[0].0 / 100.0 - 0.79607).abs() < 1e-5);
    }
}
