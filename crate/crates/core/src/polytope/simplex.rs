//! Dense bounded-variable primal simplex with Bland's rule.
//!
//! Solves `max c·x` subject to `lo_r ≤ a_r·x ≤ hi_r` and `l_j ≤ x_j ≤ u_j`,
//! with every bound finite. Each row gets a slack `s_r = a_r·x` so the
//! equality system is `A x − s = 0`.

use crate::error::{FmsmError, Result};

pub(crate) const TOL: f64 = 1e-9;
const MAX_PIVOTS: usize = 100_000;

/// A sparse row `(coefficients, lower, upper)`.
pub(crate) type Row = (Vec<(usize, f64)>, f64, f64);

pub(crate) struct Problem<'a> {
    pub n: usize,
    pub rows: &'a [Row],
    pub var_lo: &'a [f64],
    pub var_hi: &'a [f64],
    pub objective: &'a [f64],
}

struct Tableau {
    m: usize,
    /// `B⁻¹ [A | −I | artificials]`, row-major, `m × width`.
    t: Vec<f64>,
    width: usize,
    lo: Vec<f64>,
    hi: Vec<f64>,
    val: Vec<f64>,
    basis: Vec<usize>,
    is_basic: Vec<bool>,
}

impl Tableau {
    fn at(&self, i: usize, j: usize) -> f64 {
        self.t[i * self.width + j]
    }

    fn pivot(&mut self, r: usize, j: usize) {
        let w = self.width;
        let p = self.t[r * w + j];
        for k in 0..w {
            self.t[r * w + k] /= p;
        }
        for i in 0..self.m {
            if i == r {
                continue;
            }
            let f = self.t[i * w + j];
            if f != 0.0 {
                for k in 0..w {
                    self.t[i * w + k] -= f * self.t[r * w + k];
                }
            }
        }
        self.is_basic[self.basis[r]] = false;
        self.basis[r] = j;
        self.is_basic[j] = true;
    }

    fn reduced_costs(&self, cost: &[f64]) -> Vec<f64> {
        let mut d = cost.to_vec();
        for i in 0..self.m {
            let cb = cost[self.basis[i]];
            if cb != 0.0 {
                for (j, dj) in d.iter_mut().enumerate() {
                    *dj -= cb * self.at(i, j);
                }
            }
        }
        d
    }

    /// Runs primal simplex for `max cost·val` from the current basic
    /// feasible solution.
    fn optimize(&mut self, cost: &[f64]) -> Result<()> {
        for _ in 0..MAX_PIVOTS {
            let d = self.reduced_costs(cost);
            let entering = (0..self.width).find(|&j| {
                !self.is_basic[j]
                    && self.hi[j] - self.lo[j] > TOL
                    && ((d[j] > TOL && self.val[j] < self.hi[j] - TOL)
                        || (d[j] < -TOL && self.val[j] > self.lo[j] + TOL))
            });
            let Some(j) = entering else {
                return Ok(());
            };
            let dir = if d[j] > 0.0 { 1.0 } else { -1.0 };
            // Ratio test; ties go to the smallest basic variable index.
            let mut theta = self.hi[j] - self.lo[j];
            let mut leave: Option<(usize, usize)> = None;
            for i in 0..self.m {
                let alpha = self.at(i, j) * dir;
                let b = self.basis[i];
                let limit = if alpha > TOL {
                    (self.val[b] - self.lo[b]) / alpha
                } else if alpha < -TOL {
                    (self.hi[b] - self.val[b]) / -alpha
                } else {
                    continue;
                };
                let limit = limit.max(0.0);
                if limit < theta - TOL {
                    theta = limit;
                    leave = Some((i, b));
                } else if limit <= theta + TOL {
                    if leave.is_none_or(|(_, lb)| b < lb) {
                        leave = Some((i, b));
                    }
                    theta = theta.min(limit);
                }
            }
            for i in 0..self.m {
                let b = self.basis[i];
                self.val[b] -= self.at(i, j) * dir * theta;
            }
            self.val[j] += dir * theta;
            match leave {
                None => {
                    self.val[j] = if dir > 0.0 { self.hi[j] } else { self.lo[j] };
                }
                Some((r, b)) => {
                    let alpha = self.at(r, j) * dir;
                    self.val[b] = if alpha > 0.0 { self.lo[b] } else { self.hi[b] };
                    self.pivot(r, j);
                }
            }
        }
        Err(FmsmError::Numerical(format!(
            "simplex exceeded {MAX_PIVOTS} pivots"
        )))
    }
}

/// Returns an optimal basic solution `x` or an infeasibility error.
pub(crate) fn solve(p: &Problem<'_>) -> Result<Vec<f64>> {
    let n = p.n;
    let m = p.rows.len();
    for j in 0..n {
        if !(p.var_lo[j] <= p.var_hi[j] + TOL) {
            return Err(FmsmError::Infeasible(format!(
                "variable {j} has empty range [{}, {}]",
                p.var_lo[j], p.var_hi[j]
            )));
        }
    }
    for (r, (_, lo, hi)) in p.rows.iter().enumerate() {
        if !(lo <= &(hi + TOL)) {
            return Err(FmsmError::Infeasible(format!(
                "row {r} has empty range [{lo}, {hi}]"
            )));
        }
    }
    let width = n + 2 * m;
    let mut lo = Vec::with_capacity(width);
    let mut hi = Vec::with_capacity(width);
    lo.extend_from_slice(p.var_lo);
    hi.extend(p.var_hi.iter().zip(p.var_lo).map(|(&h, &l)| h.max(l)));
    for (_, l, h) in p.rows {
        lo.push(*l);
        hi.push(h.max(*l));
    }
    lo.extend(std::iter::repeat_n(0.0, m));
    hi.extend(std::iter::repeat_n(f64::INFINITY, m));

    let mut val = vec![0.0; width];
    val[..n + m].copy_from_slice(&lo[..n + m]);
    let mut t = vec![0.0; m * width];
    for (r, (coeffs, _, _)) in p.rows.iter().enumerate() {
        let mut residual = val[n + r];
        for &(j, a) in coeffs {
            residual -= a * val[j];
        }
        // a·x − s + sign·art = 0 with art = |a·x − s| ≥ 0
        let sign = if residual >= 0.0 { 1.0 } else { -1.0 };
        val[n + m + r] = residual.abs();
        let row = &mut t[r * width..(r + 1) * width];
        for &(j, a) in coeffs {
            row[j] += a;
        }
        row[n + r] = -1.0;
        row[n + m + r] = sign;
        // normalise so the artificial's column is the unit vector
        if sign < 0.0 {
            row.iter_mut().for_each(|v| *v = -*v);
        }
    }
    let mut tab = Tableau {
        m,
        t,
        width,
        lo,
        hi,
        val,
        basis: (n + m..width).collect(),
        is_basic: (0..width).map(|j| j >= n + m).collect(),
    };

    let mut phase1 = vec![0.0; width];
    phase1[n + m..].iter_mut().for_each(|c| *c = -1.0);
    tab.optimize(&phase1)?;
    let infeasibility: f64 = tab.val[n + m..].iter().sum();
    let scale = 1.0
        + p.rows
            .iter()
            .map(|(_, l, h)| l.abs().max(h.abs()))
            .fold(0.0, f64::max);
    if infeasibility > TOL * scale {
        return Err(FmsmError::Infeasible(format!(
            "polytope is empty (phase-one residual {infeasibility:.3e})"
        )));
    }
    for a in n + m..width {
        tab.hi[a] = 0.0;
        tab.val[a] = 0.0;
    }
    // Drive basic artificials out where a structural column allows it.
    for r in 0..m {
        if tab.basis[r] >= n + m {
            if let Some(j) = (0..n + m).find(|&j| !tab.is_basic[j] && tab.at(r, j).abs() > 1e-7) {
                tab.pivot(r, j);
            }
        }
    }

    let mut cost = vec![0.0; width];
    cost[..n].copy_from_slice(p.objective);
    tab.optimize(&cost)?;
    let mut x = tab.val[..n].to_vec();
    for j in 0..n {
        x[j] = x[j].clamp(p.var_lo[j], p.var_hi[j].max(p.var_lo[j]));
    }
    Ok(x)
}
