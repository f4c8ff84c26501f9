use std::sync::Arc;

use fmsm::analysis::{brute_force_max, Summary};
use fmsm::instance::{gen_random, Instance, MatroidKind, ObjectiveKind, RandomParams};
use fmsm::matroid::{max_cardinality_intersection, ExtendableFair, Matroid, Partition};
use fmsm::multilinear::MultilinearEstimator;
use fmsm::objective::{GraphCut, SetFunction, SubmodularOracle};
use fmsm::seed::rng_for;
use fmsm::set::mask_to_vec;
use fmsm::solvers::{hartley_sample, two_pass_nonmonotone, uniform_nonmonotone, SubSolver};
use proptest::prelude::*;
use rand::Rng;

fn matroid_kind() -> impl Strategy<Value = MatroidKind> {
    prop_oneof![Just(MatroidKind::Uniform), Just(MatroidKind::Partition)]
}

fn objective_kind() -> impl Strategy<Value = ObjectiveKind> {
    prop_oneof![
        Just(ObjectiveKind::Coverage),
        Just(ObjectiveKind::GraphCut),
        Just(ObjectiveKind::FacilityLocation),
        Just(ObjectiveKind::Modular),
    ]
}

fn random_instance() -> impl Strategy<Value = Instance> {
    (
        4usize..=11,
        1usize..=3,
        matroid_kind(),
        objective_kind(),
        any::<u64>(),
    )
        .prop_map(|(n, c, m, o, seed)| gen_random(RandomParams::new(n, c, m, o), seed).unwrap())
}

fn labels(n: usize, blocks: usize) -> impl Strategy<Value = Vec<usize>> {
    proptest::collection::vec(0..blocks, n)
}

/// `g(S) = cut(S ∪ A)` on a random graph: non-negative, submodular, and
/// usually not monotone.
#[derive(Debug)]
struct ShiftedCut {
    cut: GraphCut,
    anchor: Vec<usize>,
    n: usize,
}

impl SetFunction for ShiftedCut {
    fn ground_size(&self) -> usize {
        self.n
    }

    fn eval(&self, set: &[usize]) -> f64 {
        let mut s: Vec<usize> = set.iter().chain(&self.anchor).copied().collect();
        s.sort_unstable();
        s.dedup();
        self.cut.eval(&s)
    }

    fn is_monotone(&self) -> bool {
        false
    }
}

fn shifted_cut(n: usize, seed: u64) -> SubmodularOracle {
    let mut rng = rng_for(seed, &[0]);
    let edges = (0..n)
        .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
        .filter(|_| rng.random_bool(0.5))
        .map(|(u, v)| (u, v, 1.0))
        .collect::<Vec<_>>();
    let anchor = (0..n).filter(|&e| e % 3 == 0).collect();
    SubmodularOracle::new(Arc::new(ShiftedCut {
        cut: GraphCut::new(n, edges).unwrap(),
        anchor,
        n,
    }))
}

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 64,
        rng_seed: proptest::test_runner::RngSeed::Fixed(0x5eed),
        ..ProptestConfig::default()
    })]

    #[test]
    fn instance_json_round_trip(inst in random_instance()) {
        let text = inst.to_json();
        let back = Instance::from_json(&text).unwrap();
        prop_assert_eq!(back.to_json(), text);
        prop_assert_eq!(back.objective().value_table().unwrap(), inst.objective().value_table().unwrap());
    }

    #[test]
    fn intersection_matches_brute_force(
        n in 2usize..=10,
        l1 in labels(10, 3),
        l2 in labels(10, 4),
        caps1 in proptest::collection::vec(0usize..=2, 3),
        caps2 in proptest::collection::vec(0usize..=2, 4),
    ) {
        let m1 = Partition::from_labels(&(0..n).map(|e| l1[e].min(2)).collect::<Vec<_>>(), caps1).unwrap();
        let m2 = Partition::from_labels(&(0..n).map(|e| l2[e].min(3)).collect::<Vec<_>>(), caps2).unwrap();
        let s = max_cardinality_intersection(&m1, &m2).unwrap();
        prop_assert!(m1.independent(&s) && m2.independent(&s));
        let best = (0..1u64 << n)
            .map(mask_to_vec)
            .filter(|x| m1.independent(x) && m2.independent(x))
            .map(|x| x.len())
            .max()
            .unwrap();
        prop_assert_eq!(s.len(), best);
    }

    #[test]
    fn extendable_fair_matches_enumeration(
        colors in labels(8, 3),
        lower in proptest::collection::vec(0usize..=2, 3),
        extra in proptest::collection::vec(0usize..=2, 3),
        k in 0usize..=8,
    ) {
        let sizes: Vec<usize> = (0..3).map(|c| colors.iter().filter(|&&x| x == c).count()).collect();
        let lower: Vec<usize> = lower.iter().zip(&sizes).map(|(&l, &s)| l.min(s)).collect();
        let upper: Vec<usize> = lower.iter().zip(&extra).zip(&sizes).map(|((&l, &x), &s)| (l + x).min(s)).collect();
        let Ok(m) = ExtendableFair::new(colors.clone(), lower.clone(), upper.clone(), k) else {
            prop_assume!(false);
            unreachable!()
        };
        let fair = |s: &[usize]| {
            let mut cnt = [0usize; 3];
            s.iter().for_each(|&e| cnt[colors[e]] += 1);
            (0..3).all(|c| lower[c] <= cnt[c] && cnt[c] <= upper[c]) && s.len() <= k
        };
        let fair_masks: Vec<u64> = (0..1u64 << 8).filter(|&t| fair(&mask_to_vec(t))).collect();
        for mask in 0..1u64 << 8 {
            let extends = fair_masks.iter().any(|&t| t & mask == mask);
            prop_assert_eq!(m.independent(&mask_to_vec(mask)), extends, "set {:?}", mask_to_vec(mask));
        }
    }

    #[test]
    fn multilinear_is_affine_in_each_coordinate(
        seed in any::<u64>(),
        x in proptest::collection::vec(0.0f64..=1.0, 7),
        i in 0usize..7,
    ) {
        let est = MultilinearEstimator::exact(shifted_cut(7, seed)).unwrap();
        let (mut lo, mut hi) = (x.clone(), x.clone());
        lo[i] = 0.0;
        hi[i] = 1.0;
        let (f, f0, f1) = (est.eval(&x).unwrap(), est.eval(&lo).unwrap(), est.eval(&hi).unwrap());
        prop_assert!((f - (x[i] * f1 + (1.0 - x[i]) * f0)).abs() < 1e-9);
        let g = est.grad(&x).unwrap();
        prop_assert!((g[i] - (f1 - f0)).abs() < 1e-9);
    }

    #[test]
    fn multilinear_complement_identity(seed in any::<u64>(), x in proptest::collection::vec(0.0f64..=1.0, 6)) {
        let f = shifted_cut(6, seed);
        let direct = MultilinearEstimator::exact(f.clone()).unwrap();
        let comp = MultilinearEstimator::exact(f.complement()).unwrap();
        let flipped: Vec<f64> = x.iter().map(|v| 1.0 - v).collect();
        prop_assert!((comp.eval(&x).unwrap() - direct.eval(&flipped).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn sampled_multilinear_is_unbiased(seed in any::<u64>(), x in proptest::collection::vec(0.0f64..=1.0, 8)) {
        let f = shifted_cut(8, seed);
        let exact = MultilinearEstimator::exact(f.clone()).unwrap().eval(&x).unwrap();
        let sampled = MultilinearEstimator::sampled(f, 4000, seed).unwrap();
        let values = sampled.sample_values(&x, 0).unwrap();
        let s = Summary::of(&values);
        prop_assert!((s.mean - exact).abs() <= 4.0 * s.stderr() + 1e-9, "mean {} exact {}", s.mean, exact);
    }

    #[test]
    fn hartley_sizes_are_exact(
        x in proptest::collection::vec(0.0f64..=1.0, 1..14),
        colors in labels(14, 3),
        seed in any::<u64>(),
    ) {
        let colors = &colors[..x.len()];
        let b = hartley_sample(&x, colors, seed).unwrap();
        let mut total = 0.0;
        let mut drawn = 0;
        for (c, bc) in b.iter().enumerate() {
            let mass: f64 = x.iter().zip(colors).filter(|(_, &k)| k == c).map(|(v, _)| v).sum();
            prop_assert!(bc.len() as f64 >= mass.floor() - 1e-9 && bc.len() as f64 <= mass.ceil() + 1e-9);
            prop_assert!(bc.iter().all(|&e| colors[e] == c && x[e] > 0.0));
            total += mass;
            drawn += bc.len();
        }
        prop_assert!(drawn as f64 >= total.floor() - 1e-9 && drawn as f64 <= total.ceil() + 1e-9);
    }

    #[test]
    fn reports_match_recount(inst in random_instance(), seed in any::<u64>()) {
        let r = two_pass_nonmonotone(&inst, 0.5, &SubSolver::random_greedy(), seed).unwrap();
        r.verify_audit(&inst).unwrap();
        prop_assert!(r.independent && r.within_floors());
        if inst.uniform_rank().is_some() {
            let u = uniform_nonmonotone(&inst, &SubSolver::random_greedy(), seed).unwrap();
            u.verify_audit(&inst).unwrap();
            prop_assert!(u.feasible);
        }
    }
}

/// Sampling each element with probability at most `p`, independently or
/// through the correlated systematic sampler, loses at most a `p` fraction
/// of `g(∅)` in expectation.
#[test]
fn bounded_sampling_keeps_base_value() {
    let draws = 4000u64;
    for case in 0..20u64 {
        let n = 9;
        let g = shifted_cut(n, case);
        let mut rng = rng_for(case, &[1]);
        let probs: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..0.6)).collect();
        let p = probs.iter().copied().fold(0.0, f64::max);
        let base = g.value(&[]);
        let colors: Vec<usize> = (0..n).map(|e| e % 2).collect();
        let independent: Vec<f64> = (0..draws)
            .map(|s| {
                let mut r = rng_for(case, &[2, s]);
                let b: Vec<usize> = (0..n).filter(|&e| r.random::<f64>() < probs[e]).collect();
                g.value(&b)
            })
            .collect();
        let systematic: Vec<f64> = (0..draws)
            .map(|s| {
                let mut b: Vec<usize> = hartley_sample(&probs, &colors, case * draws + s)
                    .unwrap()
                    .concat();
                b.sort_unstable();
                g.value(&b)
            })
            .collect();
        for values in [independent, systematic] {
            let s = Summary::of(&values);
            assert!(
                s.mean >= (1.0 - p) * base - 3.0 * s.stderr(),
                "case {case}: {} vs {}",
                s.mean,
                (1.0 - p) * base
            );
        }
    }
}

#[test]
fn brute_force_respects_membership() {
    let f = shifted_cut(6, 3);
    let opt = brute_force_max(&f, |s| s.len() <= 2).unwrap();
    assert!(opt.set.len() <= 2);
    let all = (0..1u64 << 6)
        .map(mask_to_vec)
        .filter(|s| s.len() <= 2)
        .map(|s| f.value(&s))
        .fold(0.0, f64::max);
    assert_eq!(opt.value, all);
}
