//! Inequality descriptions of the feasible polytope, linear optimisation over
//! them, and fractional points carried as convex combinations of sets.

mod simplex;

use crate::error::{FmsmError, Result};
use crate::instance::{Instance, MatroidSpec};

/// Tolerance for membership and tightness tests.
pub const TOL: f64 = 1e-9;

/// A linear row `lo ≤ Σ a_j x_j ≤ hi`.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub coeffs: Vec<(usize, f64)>,
    pub lo: f64,
    pub hi: f64,
}

impl Row {
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.coeffs.iter().map(|&(j, a)| a * x[j]).sum()
    }

    fn coefficient_sum(&self) -> f64 {
        self.coeffs.iter().map(|&(_, a)| a).sum()
    }
}

/// `{x : lo_r ≤ a_r·x ≤ hi_r, var_lo ≤ x ≤ var_hi}`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolytopeDescription {
    pub rows: Vec<Row>,
    pub var_lo: Vec<f64>,
    pub var_hi: Vec<f64>,
}

impl PolytopeDescription {
    /// `P_F` for a uniform or partition matroid: colour rows `[ℓ_c, u_c]`,
    /// matroid rows, and the unit box.
    pub fn from_instance(inst: &Instance) -> Result<Self> {
        let n = inst.n();
        let mut rows: Vec<Row> = inst
            .color_groups()
            .iter()
            .zip(inst.lower().iter().zip(inst.upper()))
            .map(|(g, (&l, &u))| Row {
                coeffs: g.iter().map(|&e| (e, 1.0)).collect(),
                lo: l as f64,
                hi: u as f64,
            })
            .collect();
        match &inst.data().matroid {
            MatroidSpec::Uniform { k } => rows.push(Row {
                coeffs: (0..n).map(|e| (e, 1.0)).collect(),
                lo: 0.0,
                hi: *k as f64,
            }),
            MatroidSpec::Partition { blocks, caps } => {
                rows.extend(blocks.iter().zip(caps).map(|(b, &cap)| Row {
                    coeffs: b.iter().map(|&e| (e, 1.0)).collect(),
                    lo: 0.0,
                    hi: cap as f64,
                }))
            }
            MatroidSpec::Explicit { .. } => {
                return Err(FmsmError::Config(
                    "linear optimisation needs a uniform or partition matroid".into(),
                ))
            }
        }
        Ok(PolytopeDescription {
            rows,
            var_lo: vec![0.0; n],
            var_hi: vec![1.0; n],
        })
    }

    pub fn dim(&self) -> usize {
        self.var_lo.len()
    }

    /// Membership with absolute tolerance `tol`.
    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(self.var_lo.iter().zip(&self.var_hi))
                .all(|(&v, (&l, &h))| v >= l - tol && v <= h + tol)
            && self.rows.iter().all(|r| {
                let v = r.eval(x);
                v >= r.lo - tol && v <= r.hi + tol
            })
    }

    /// `{y : 1 − y ∈ P}`.
    pub fn complement(&self) -> PolytopeDescription {
        PolytopeDescription {
            rows: self
                .rows
                .iter()
                .map(|r| {
                    let total = r.coefficient_sum();
                    Row {
                        coeffs: r.coeffs.clone(),
                        lo: total - r.hi,
                        hi: total - r.lo,
                    }
                })
                .collect(),
            var_lo: self.var_hi.iter().map(|h| 1.0 - h).collect(),
            var_hi: self.var_lo.iter().map(|l| 1.0 - l).collect(),
        }
    }

    /// Intersection with the box `[lo, hi]`.
    pub fn with_var_bounds(&self, lo: &[f64], hi: &[f64]) -> PolytopeDescription {
        PolytopeDescription {
            rows: self.rows.clone(),
            var_lo: self.var_lo.iter().zip(lo).map(|(a, b)| a.max(*b)).collect(),
            var_hi: self.var_hi.iter().zip(hi).map(|(a, b)| a.min(*b)).collect(),
        }
    }

    fn solve(&self, w: &[f64]) -> Result<Vec<f64>> {
        if w.len() != self.dim() {
            return Err(FmsmError::Argument(format!(
                "objective has {} coordinates, polytope has {}",
                w.len(),
                self.dim()
            )));
        }
        let rows: Vec<_> = self
            .rows
            .iter()
            .map(|r| (r.coeffs.clone(), r.lo, r.hi))
            .collect();
        simplex::solve(&simplex::Problem {
            n: self.dim(),
            rows: &rows,
            var_lo: &self.var_lo,
            var_hi: &self.var_hi,
            objective: w,
        })
    }
}

/// An optimal basic solution of a linear program.
#[derive(Debug, Clone, PartialEq)]
pub struct LpPoint {
    pub x: Vec<f64>,
    pub value: f64,
}

/// An optimal vertex of an integral polytope, also given as a set.
#[derive(Debug, Clone, PartialEq)]
pub struct LpVertex {
    pub x: Vec<f64>,
    pub value: f64,
    pub set: Vec<usize>,
}

/// `max w·x` over the description; any optimal basic solution.
pub fn lp_solve(desc: &PolytopeDescription, w: &[f64]) -> Result<LpPoint> {
    let x = desc.solve(w)?;
    let value = x.iter().zip(w).map(|(a, b)| a * b).sum();
    Ok(LpPoint { x, value })
}

/// `max w·x` over an integral description, returning the optimal vertex as
/// an indicator vector and as a set.
pub fn lp_maximize(desc: &PolytopeDescription, w: &[f64]) -> Result<LpVertex> {
    let LpPoint { x, .. } = lp_solve(desc, w)?;
    let set = integral_support(&x)?;
    let x: Vec<f64> = x.iter().map(|v| v.round()).collect();
    let value = set.iter().map(|&e| w[e]).sum();
    Ok(LpVertex { x, value, set })
}

fn integral_support(x: &[f64]) -> Result<Vec<usize>> {
    if let Some((j, v)) = x
        .iter()
        .enumerate()
        .find(|(_, v)| (*v - v.round()).abs() > 1e-7)
    {
        return Err(FmsmError::Numerical(format!(
            "basic solution is fractional at {j}: {v}"
        )));
    }
    Ok(x.iter()
        .enumerate()
        .filter(|(_, v)| **v > 0.5)
        .map(|(j, _)| j)
        .collect())
}

/// `x = Σ_t α_t 1_{I_t}` with positive weights summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexCombination {
    n: usize,
    terms: Vec<(f64, Vec<usize>)>,
}

impl ConvexCombination {
    /// Merges repeated sets and drops zero weights. Sets are stored sorted.
    pub fn new(n: usize, terms: Vec<(f64, Vec<usize>)>) -> Result<Self> {
        let mut merged: Vec<(f64, Vec<usize>)> = Vec::new();
        for (w, mut s) in terms {
            if !w.is_finite() || w < 0.0 {
                return Err(FmsmError::Argument(format!(
                    "weight {w} is not a non-negative number"
                )));
            }
            crate::set::check_elements(n, &s).map_err(FmsmError::Argument)?;
            s.sort_unstable();
            if w == 0.0 {
                continue;
            }
            match merged.iter_mut().find(|(_, t)| *t == s) {
                Some((acc, _)) => *acc += w,
                None => merged.push((w, s)),
            }
        }
        if merged.is_empty() {
            return Err(FmsmError::Argument(
                "convex combination has no positive weight".into(),
            ));
        }
        Ok(ConvexCombination { n, terms: merged })
    }

    pub fn single(n: usize, set: Vec<usize>) -> Result<Self> {
        ConvexCombination::new(n, vec![(1.0, set)])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &[(f64, Vec<usize>)] {
        &self.terms
    }

    pub fn total_weight(&self) -> f64 {
        self.terms.iter().map(|(w, _)| w).sum()
    }

    /// The coordinates `x_i = Σ_t α_t 1[i ∈ I_t]`.
    pub fn point(&self) -> Vec<f64> {
        let mut x = vec![0.0; self.n];
        for (w, s) in &self.terms {
            for &e in s {
                x[e] += w;
            }
        }
        x
    }

    /// Rescales the weights to sum to exactly one (up to rounding).
    pub fn renormalize(&mut self) {
        let total = self.total_weight();
        for (w, _) in &mut self.terms {
            *w /= total;
        }
    }

    /// `Σ_t α_t 1_{V ∖ I_t}`, i.e. the point `1 − x`.
    pub fn complement(&self) -> ConvexCombination {
        ConvexCombination {
            n: self.n,
            terms: self
                .terms
                .iter()
                .map(|(w, s)| (*w, crate::set::complement(self.n, s)))
                .collect(),
        }
    }

    /// `(1 − λ)·self + λ·other`.
    pub fn mix(&self, other: &ConvexCombination, lambda: f64) -> Result<ConvexCombination> {
        let terms = self
            .terms
            .iter()
            .map(|(w, s)| ((1.0 - lambda) * w, s.clone()))
            .chain(other.terms.iter().map(|(w, s)| (lambda * w, s.clone())))
            .collect();
        ConvexCombination::new(self.n, terms)
    }

    /// Checks that every support set satisfies `member`, that the weights sum
    /// to one within 1e−12, and that the derived point meets the colour
    /// bounds to 1e−9.
    pub fn validate_with(&self, member: impl Fn(&[usize]) -> bool) -> Result<()> {
        if let Some((_, s)) = self.terms.iter().find(|(_, s)| !member(s)) {
            return Err(FmsmError::Argument(format!(
                "support set {s:?} is not in the family"
            )));
        }
        let total = self.total_weight();
        if (total - 1.0).abs() > 1e-12 {
            return Err(FmsmError::Argument(format!("weights sum to {total}")));
        }
        Ok(())
    }

    /// All support sets are in `F`, the weights sum to one, and `x(V_c)` lies
    /// in `[ℓ_c, u_c]`.
    pub fn validate(&self, inst: &Instance) -> Result<()> {
        self.validate_with(|s| inst.is_feasible(s))?;
        let x = self.point();
        for (c, g) in inst.color_groups().iter().enumerate() {
            let mass: f64 = g.iter().map(|&e| x[e]).sum();
            if mass < inst.lower()[c] as f64 - 1e-9 || mass > inst.upper()[c] as f64 + 1e-9 {
                return Err(FmsmError::Argument(format!(
                    "color {c} has mass {mass} outside its bounds"
                )));
            }
        }
        Ok(())
    }
}

/// Writes `y ∈ P` as a convex combination of vertex sets of the integral
/// polytope `P`.
///
/// Repeatedly restricts to the minimal face containing `y`, takes a vertex
/// `v` of that face, and moves `y` away from `v` as far as the face allows.
/// Each step makes at least one more constraint tight, so at most `n + 1`
/// vertices are used.
pub fn decompose(desc: &PolytopeDescription, y: &[f64]) -> Result<ConvexCombination> {
    let n = desc.dim();
    if !desc.contains(y, 1e-7) {
        return Err(FmsmError::Argument(
            "point to decompose lies outside the polytope".into(),
        ));
    }
    let mut y = y.to_vec();
    let mut remaining = 1.0;
    let mut terms = Vec::new();
    for _ in 0..=n + desc.rows.len() {
        let face = minimal_face(desc, &y);
        let v = lp_maximize(&face, &vec![0.0; n])?;
        let lambda = max_step(desc, &y, &v.x);
        terms.push((remaining * lambda, v.set));
        if lambda >= 1.0 - 1e-12 {
            let mut cc = ConvexCombination::new(n, terms)?;
            cc.renormalize();
            return Ok(cc);
        }
        for (yi, vi) in y.iter_mut().zip(&v.x) {
            *yi = ((*yi - lambda * vi) / (1.0 - lambda)).clamp(0.0, 1.0);
        }
        remaining *= 1.0 - lambda;
    }
    Err(FmsmError::Numerical(
        "vertex decomposition did not terminate".into(),
    ))
}

fn minimal_face(desc: &PolytopeDescription, y: &[f64]) -> PolytopeDescription {
    let mut face = desc.clone();
    for j in 0..face.dim() {
        if (y[j] - face.var_lo[j]).abs() <= TOL {
            face.var_hi[j] = face.var_lo[j];
        } else if (y[j] - face.var_hi[j]).abs() <= TOL {
            face.var_lo[j] = face.var_hi[j];
        }
    }
    for row in &mut face.rows {
        let v = row.eval(y);
        if (v - row.lo).abs() <= TOL {
            row.hi = row.lo;
        } else if (v - row.hi).abs() <= TOL {
            row.lo = row.hi;
        }
    }
    face
}

/// Largest `λ ≤ 1` with `(y − λv)/(1 − λ)` still in the polytope.
fn max_step(desc: &PolytopeDescription, y: &[f64], v: &[f64]) -> f64 {
    let mut lambda: f64 = 1.0;
    let mut bound = |gy: f64, gv: f64, b: f64| {
        // constraint g(z) ≤ b, slack at y
        if b - gy > TOL && b - gv > TOL {
            lambda = lambda.min((b - gy) / (b - gv));
        }
    };
    for j in 0..desc.dim() {
        bound(y[j], v[j], desc.var_hi[j]);
        bound(-y[j], -v[j], -desc.var_lo[j]);
    }
    for row in &desc.rows {
        let (gy, gv) = (row.eval(y), row.eval(v));
        bound(gy, gv, row.hi);
        bound(-gy, -gv, -row.lo);
    }
    lambda
}

/// Stopping width of the bisection in [`min_inf_norm`].
pub const BISECTION_TOL: f64 = 1e-7;
const BISECTION_STEPS: usize = 40;

/// `min ‖x‖∞` over the polytope by bisection on `z` with the box `x ≤ z`.
/// Returns the norm of the witness and the witness itself.
pub fn min_inf_norm(desc: &PolytopeDescription) -> Result<(f64, Vec<f64>)> {
    let n = desc.dim();
    let zeros = vec![0.0; n];
    let capped = |z: f64| desc.with_var_bounds(&zeros, &vec![z; n]);
    let feasible = |z: f64| match lp_solve(&capped(z), &zeros) {
        Ok(p) => Ok(Some(p.x)),
        Err(FmsmError::Infeasible(_)) => Ok(None),
        Err(e) => Err(e),
    };
    let mut witness = lp_solve(desc, &zeros)?.x;
    let (mut lo, mut hi) = (0.0, witness.iter().copied().fold(0.0, f64::max));
    if let Some(x) = feasible(0.0)? {
        witness = x;
        hi = 0.0;
    }
    for _ in 0..BISECTION_STEPS {
        if hi - lo <= BISECTION_TOL {
            break;
        }
        let mid = 0.5 * (lo + hi);
        match feasible(mid)? {
            Some(x) => {
                witness = x;
                hi = mid;
            }
            None => lo = mid,
        }
    }
    let norm = witness.iter().copied().fold(0.0, f64::max);
    Ok((norm, witness))
}

#[cfg(test)]
mod tests;
