//! Systematic sampling with exact marginals.
//!
//! Elements are laid out on the real line colour by colour, element `e`
//! owning an interval of length `x̄_e`. A uniform offset `α ∈ [0, 1)` selects
//! every element whose interval meets `ℤ + α`. All arithmetic is done in
//! fixed point with [`SCALE`] units per unit length, so the size properties
//! hold exactly rather than up to rounding.

use rand::Rng;

use crate::error::{FmsmError, Result};
use crate::seed::rng_for;

/// Fixed-point units per unit length.
pub const SCALE: i128 = 1 << 40;

/// Coordinates this far outside `[0, 1]` are clamped instead of rejected.
const CLAMP_TOL: f64 = 1e-9;

/// Group and total lengths this close to an integer are snapped onto it.
const SNAP_TOL: i128 = 1 << 12;

/// Moves `target − sum(q[idx])` units into the entries `idx`, last first,
/// keeping each entry inside `[0, SCALE]`.
fn absorb(q: &mut [i128], idx: &[usize], mut delta: i128) {
    for &e in idx.iter().rev() {
        if delta == 0 {
            break;
        }
        let next = (q[e] + delta).clamp(0, SCALE);
        delta -= next - q[e];
        q[e] = next;
    }
}

fn snap(q: &mut [i128], idx: &[usize]) {
    let total: i128 = idx.iter().map(|&e| q[e]).sum();
    let nearest = ((total + SCALE / 2) / SCALE) * SCALE;
    if total != nearest && (total - nearest).abs() <= SNAP_TOL {
        absorb(q, idx, nearest - total);
    }
}

/// The fixed-point lengths used by [`hartley_sample`], in layout order
/// (colour by colour, ascending element index within a colour).
pub fn hartley_lengths(xbar: &[f64], colors: &[usize]) -> Result<(Vec<i128>, Vec<Vec<usize>>)> {
    if xbar.len() != colors.len() {
        return Err(FmsmError::Argument(format!(
            "point has {} coordinates for {} elements",
            xbar.len(),
            colors.len()
        )));
    }
    let mut q = Vec::with_capacity(xbar.len());
    for (e, &v) in xbar.iter().enumerate() {
        if !v.is_finite() || !(-CLAMP_TOL..=1.0 + CLAMP_TOL).contains(&v) {
            return Err(FmsmError::Argument(format!(
                "coordinate {e} is {v}, outside [0, 1]"
            )));
        }
        q.push((v.clamp(0.0, 1.0) * SCALE as f64).round() as i128);
    }
    let num_colors = colors.iter().max().map_or(0, |&c| c + 1);
    let mut groups = vec![Vec::new(); num_colors];
    for (e, &c) in colors.iter().enumerate() {
        groups[c].push(e);
    }
    for g in &groups {
        snap(&mut q, g);
    }
    let layout: Vec<usize> = groups.iter().flatten().copied().collect();
    snap(&mut q, &layout);
    Ok((q, groups))
}

/// Draws `{B_c}` with `Pr[e ∈ B_c] = x̄_e`, `|B_c| ∈ {⌊x̄(V_c)⌋, ⌈x̄(V_c)⌉}`
/// and `Σ_c |B_c| ∈ {⌊x̄(V)⌋, ⌈x̄(V)⌉}`. Each `B_c` is sorted.
pub fn hartley_sample(xbar: &[f64], colors: &[usize], seed: u64) -> Result<Vec<Vec<usize>>> {
    let (q, groups) = hartley_lengths(xbar, colors)?;
    let offset = rng_for(seed, &[0]).random_range(0..SCALE);
    let mut start: i128 = 0;
    let mut out = Vec::with_capacity(groups.len());
    for g in &groups {
        let mut b = Vec::new();
        for &e in g {
            // First grid point `offset + m·SCALE` at or after `start`.
            let m = (start - offset).div_euclid(SCALE)
                + i128::from((start - offset).rem_euclid(SCALE) != 0);
            let point = offset + m * SCALE;
            if point < start + q[e] {
                b.push(e);
            }
            start += q[e];
        }
        out.push(b);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_element_marginals() {
        let draws = 100_000;
        let mut hits = 0usize;
        for s in 0..draws {
            let b = hartley_sample(&[0.6, 0.5], &[0, 0], s).unwrap();
            assert!(matches!(b[0].len(), 1 | 2));
            hits += usize::from(b[0].contains(&0));
        }
        let p = hits as f64 / draws as f64;
        assert!((p - 0.6).abs() <= 0.015, "empirical {p}");
    }

    #[test]
    fn integral_points_are_deterministic() {
        for s in 0..50 {
            let b = hartley_sample(&[1.0, 0.0, 1.0, 1.0, 0.0], &[0, 0, 1, 1, 1], s).unwrap();
            assert_eq!(b, vec![vec![0], vec![2, 3]]);
            let z = hartley_sample(&[0.0; 4], &[0, 1, 0, 1], s).unwrap();
            assert!(z.iter().all(Vec::is_empty));
        }
    }

    #[test]
    fn near_integral_group_sums_are_snapped() {
        let x = [1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 0.7, 0.3];
        let (q, _) = hartley_lengths(&x, &[0, 0, 0, 1, 1]).unwrap();
        assert_eq!(q[..3].iter().sum::<i128>(), SCALE);
        assert_eq!(q[3..].iter().sum::<i128>(), SCALE);
        for s in 0..200 {
            let b = hartley_sample(&x, &[0, 0, 0, 1, 1], s).unwrap();
            assert_eq!((b[0].len(), b[1].len()), (1, 1));
        }
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(hartley_sample(&[1.2], &[0], 0).is_err());
        assert!(hartley_sample(&[-0.1], &[0], 0).is_err());
        assert!(hartley_sample(&[0.5, 0.5], &[0], 0).is_err());
        assert_eq!(
            hartley_sample(&[1.0 + 1e-12], &[0], 0).unwrap(),
            vec![vec![0]]
        );
    }
}
