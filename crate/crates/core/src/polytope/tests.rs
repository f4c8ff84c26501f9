use rand::Rng;

use super::*;
use crate::instance::{
    gen_integrality_gap, gen_random, uniform_instance, MatroidKind, ObjectiveKind, ObjectiveSpec,
    RandomParams,
};
use crate::seed::rng_for;
use crate::set::mask_to_vec;

fn modular(n: usize) -> ObjectiveSpec {
    ObjectiveSpec::Modular {
        weights: vec![1.0; n],
    }
}

#[test]
fn uniform_rank_one_picks_heaviest() {
    let inst = uniform_instance(1, vec![0, 0, 0], vec![0], vec![1], modular(3)).unwrap();
    let desc = PolytopeDescription::from_instance(&inst).unwrap();
    let v = lp_maximize(&desc, &[3.0, 2.0, 1.0]).unwrap();
    assert_eq!(v.set, vec![0]);
    assert_eq!(v.x, vec![1.0, 0.0, 0.0]);
    assert_eq!(v.value, 3.0);
}

#[test]
fn gap_instance_all_ones_gives_perfect_matching() {
    let inst = gen_integrality_gap(2, 1).unwrap();
    let desc = PolytopeDescription::from_instance(&inst).unwrap();
    let v = lp_maximize(&desc, &[1.0; 6]).unwrap();
    assert_eq!(v.value, 3.0);
    assert!(inst.is_feasible(&v.set));
}

#[test]
fn tight_bounds_with_zero_objective() {
    let inst =
        uniform_instance(3, vec![0, 0, 1, 1, 1], vec![1, 2], vec![1, 2], modular(5)).unwrap();
    let desc = PolytopeDescription::from_instance(&inst).unwrap();
    let v = lp_maximize(&desc, &[0.0; 5]).unwrap();
    assert_eq!(v.value, 0.0);
    assert!(inst.is_feasible(&v.set));
    assert_eq!(inst.color_counts(&v.set), vec![1, 2]);
}

#[test]
fn empty_polytope_is_reported() {
    let inst = uniform_instance(1, vec![0, 1], vec![1, 1], vec![1, 1], modular(2)).unwrap();
    let desc = PolytopeDescription::from_instance(&inst).unwrap();
    assert!(matches!(
        lp_maximize(&desc, &[1.0, 1.0]),
        Err(FmsmError::Infeasible(_))
    ));
}

#[test]
fn explicit_matroids_are_not_supported() {
    let inst = Instance::new(crate::instance::InstanceData {
        n: 2,
        colors: vec![0, 0],
        lower: vec![0],
        upper: vec![2],
        matroid: MatroidSpec::Explicit {
            independent_sets: vec![vec![], vec![0], vec![1]],
        },
        objective: modular(2),
    })
    .unwrap();
    assert!(matches!(
        PolytopeDescription::from_instance(&inst),
        Err(FmsmError::Config(_))
    ));
}

fn brute_force_linear(inst: &Instance, w: &[f64]) -> f64 {
    (0..1u64 << inst.n())
        .map(mask_to_vec)
        .filter(|s| inst.is_feasible(s))
        .map(|s| s.iter().map(|&e| w[e]).sum::<f64>())
        .fold(f64::NEG_INFINITY, f64::max)
}

#[test]
fn lp_matches_brute_force_on_random_instances() {
    for seed in 0..200u64 {
        let mut rng = rng_for(seed, &[99]);
        let n = rng.random_range(4..=12);
        let kind = if seed % 2 == 0 {
            MatroidKind::Uniform
        } else {
            MatroidKind::Partition
        };
        let c = rng.random_range(1..=3.min(n));
        let inst = gen_random(RandomParams::new(n, c, kind, ObjectiveKind::Modular), seed).unwrap();
        let w: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..5.0)).collect();
        let desc = PolytopeDescription::from_instance(&inst).unwrap();
        let v = lp_maximize(&desc, &w).unwrap();
        assert!(inst.is_feasible(&v.set), "seed {seed}");
        assert!(
            (v.value - brute_force_linear(&inst, &w)).abs() < 1e-9,
            "seed {seed}"
        );
        assert!(v.x.iter().all(|&t| t == 0.0 || t == 1.0));
    }
}

#[test]
fn complement_membership_is_reflection() {
    let inst = gen_random(
        RandomParams::new(8, 2, MatroidKind::Partition, ObjectiveKind::Modular),
        4,
    )
    .unwrap();
    let desc = PolytopeDescription::from_instance(&inst).unwrap();
    let comp = desc.complement();
    let mut rng = rng_for(1, &[]);
    let mut inside = 0;
    for _ in 0..1000 {
        let x: Vec<f64> = (0..8).map(|_| rng.random_range(0.0..1.0)).collect();
        let y: Vec<f64> = x.iter().map(|v| 1.0 - v).collect();
        assert_eq!(desc.contains(&x, 1e-12), comp.contains(&y, 1e-12));
        inside += desc.contains(&x, 1e-12) as usize;
    }
    assert!(inside > 0);
    let back = comp.complement();
    for (a, b) in back.rows.iter().zip(&desc.rows) {
        assert!((a.lo - b.lo).abs() < 1e-12 && (a.hi - b.hi).abs() < 1e-12);
    }
    assert_eq!(back.var_lo, desc.var_lo);
    assert_eq!(back.var_hi, desc.var_hi);
}

#[test]
fn complement_of_unconstrained_contains_ones() {
    let inst = uniform_instance(4, vec![0, 0, 1, 1], vec![0, 0], vec![2, 2], modular(4)).unwrap();
    let comp = PolytopeDescription::from_instance(&inst)
        .unwrap()
        .complement();
    assert!(comp.contains(&[1.0; 4], 0.0));
}

#[test]
fn decomposition_reproduces_the_point() {
    for seed in 0..60u64 {
        let kind = if seed % 2 == 0 {
            MatroidKind::Uniform
        } else {
            MatroidKind::Partition
        };
        let inst =
            gen_random(RandomParams::new(10, 3, kind, ObjectiveKind::Modular), seed).unwrap();
        let desc = PolytopeDescription::from_instance(&inst).unwrap();
        let mut rng = rng_for(seed, &[5]);
        let terms: Vec<(f64, Vec<usize>)> = (0..4)
            .map(|_| {
                let w: Vec<f64> = (0..10).map(|_| rng.random_range(-1.0..1.0)).collect();
                (
                    rng.random_range(0.1..1.0),
                    lp_maximize(&desc, &w).unwrap().set,
                )
            })
            .collect();
        let mut cc = ConvexCombination::new(10, terms).unwrap();
        cc.renormalize();
        let y = cc.point();
        let d = decompose(&desc, &y).unwrap();
        d.validate(&inst).unwrap();
        assert!(d.terms().len() <= 11);
        for (a, b) in d.point().iter().zip(&y) {
            assert!((a - b).abs() < 1e-9, "seed {seed}");
        }
    }
}

#[test]
fn decompose_rejects_outside_points() {
    let inst = uniform_instance(1, vec![0, 0], vec![0], vec![1], modular(2)).unwrap();
    let desc = PolytopeDescription::from_instance(&inst).unwrap();
    assert!(decompose(&desc, &[1.0, 1.0]).is_err());
}

#[test]
fn convex_combination_bookkeeping() {
    let cc = ConvexCombination::new(
        3,
        vec![(0.25, vec![1, 0]), (0.5, vec![2]), (0.25, vec![0, 1])],
    )
    .unwrap();
    assert_eq!(cc.terms().len(), 2);
    assert_eq!(cc.point(), vec![0.5, 0.5, 0.5]);
    let comp = cc.complement();
    assert_eq!(comp.point(), vec![0.5, 0.5, 0.5]);
    assert_eq!(comp.terms()[0].1, vec![2]);
    assert!(ConvexCombination::new(3, vec![(-1.0, vec![0])]).is_err());
    assert!(ConvexCombination::new(3, vec![(1.0, vec![3])]).is_err());
    let bad = ConvexCombination::new(3, vec![(0.5, vec![0])]).unwrap();
    assert!(bad.validate_with(|_| true).is_err());
}

#[test]
fn min_norm_of_singleton_polytope_is_one() {
    let inst = uniform_instance(3, vec![0, 0, 1], vec![2, 1], vec![2, 1], modular(3)).unwrap();
    let desc = PolytopeDescription::from_instance(&inst).unwrap();
    let (r, x) = min_inf_norm(&desc).unwrap();
    assert_eq!(r, 1.0);
    assert!(desc.contains(&x, 1e-9));
}
