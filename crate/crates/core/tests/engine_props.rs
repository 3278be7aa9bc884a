use metfraisse_core::amalgam::ClassParams;
use metfraisse_core::apx::{limit_of_decreasing, r_surjective, r_total};
use metfraisse_core::banach::{Gurarij, GurarijParams};
use metfraisse_core::engine::backforth::{back_and_forth, homogeneity_check, InitialConstraint};
use metfraisse_core::engine::check::check_extension_property;
use metfraisse_core::engine::urysohn::UrysohnSphere;
use metfraisse_core::engine::{
    build_limit, schedule_tasks, verify_certificate, Bounds, ClassProvider, GenericSeed,
};
use metfraisse_core::rat::q;
use metfraisse_core::sample::random_metric;
use metfraisse_core::{Rat, RatInf};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn sphere(den: u32) -> UrysohnSphere {
    UrysohnSphere::new(ClassParams::sphere(den))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn small_builds_are_deterministic_and_certified(seed in 0u64..1000, max_n in 1usize..=2, max_m in 0usize..=3, seeded in any::<bool>()) {
        let p = sphere(2);
        let bounds = Bounds::new(max_n, max_m, q(1, 4));
        let s = seeded.then_some(GenericSeed(seed));
        let a = build_limit(&p, &bounds, s).unwrap();
        let b = build_limit(&p, &bounds, s).unwrap();
        prop_assert_eq!(&a.space, &b.space);
        prop_assert_eq!(&a.dense, &b.dense);
        prop_assert_eq!(&a.entries, &b.entries);
        prop_assert!(a.space.validate().is_ok());
        prop_assert_eq!(verify_certificate(&p, &a).unwrap(), a.satisfied());
        // One-point extensions over the certified prefix at the build grid.
        let r = check_extension_property(&a.space, a.certified_prefix(), 1, q(1, 2), Rat::ONE, q(1, 4));
        prop_assert!(r.ok(), "{:?}", r.worst);
    }

    #[test]
    fn dense_enumeration_only_appends(n in 1usize..=3, b in 0usize..12, extra in 0usize..12) {
        let p = sphere(2);
        let small = p.enumerate_dense(n, b);
        let big = p.enumerate_dense(n, b + extra);
        prop_assert!(small.len() <= big.len());
        prop_assert_eq!(&big[..small.len()], &small[..]);
        let g = Gurarij::new(GurarijParams::new(q(1, 2), Rat::int(2), 2).unwrap());
        let n = n.min(2);
        let small = g.enumerate_dense(n, b);
        let big = g.enumerate_dense(n, b + extra);
        prop_assert_eq!(&big[..small.len()], &small[..]);
    }

    #[test]
    fn back_and_forth_chains_decrease(seed in any::<u64>(), steps in 0usize..=6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (n, m) = (rng.gen_range(1..=5), rng.gen_range(1..=5));
        let x = random_metric(&mut rng, n, 4, 4);
        let y = random_metric(&mut rng, m, 4, 4);
        let init = InitialConstraint::Empty;
        // Finite spaces run out of partners; only completed runs are checked.
        if let Ok(st) = back_and_forth(&x, &y, &init, steps, q(1, 2)) {
            prop_assert_eq!(st.theta_chain.len(), steps + 1);
            prop_assert_eq!(&limit_of_decreasing(&st.theta_chain).unwrap(), st.theta());
            if let Some(r) = st.r().finite() {
                let rows: Vec<usize> = st.pairs.iter().map(|p| st.rows.iter().position(|&x| x == p.0).unwrap()).collect();
                let cols: Vec<usize> = st.pairs.iter().map(|p| st.cols.iter().position(|&y| y == p.1).unwrap()).collect();
                prop_assert!(r_total(st.theta(), r, &rows));
                prop_assert!(r_surjective(st.theta(), r, &cols));
            } else {
                prop_assert!(st.pairs.is_empty());
            }
        }
    }

    #[test]
    fn identity_maps_extend_to_near_automorphisms(seed in any::<u64>(), k in 0usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(1..=6);
        let x = random_metric(&mut rng, n, 4, 4);
        let f: Vec<(usize, usize)> = (0..k.min(n)).map(|i| (i, i)).collect();
        let h = homogeneity_check(&x, &f, q(1, 4), Some(2 * n)).unwrap();
        prop_assert!(h.success);
        prop_assert!(h.r <= RatInf::Fin(q(1, 4)));
    }
}

#[test]
fn schedule_lists_each_task_once_in_a_fixed_order() {
    let p = sphere(2);
    let bounds = Bounds::new(2, 2, q(1, 4));
    let limit = build_limit(&p, &bounds, None).unwrap();
    let prefix = limit.dense.clone();
    let a = schedule_tasks(&p, &limit.space, &prefix, &bounds).unwrap();
    let b = schedule_tasks(&p, &limit.space, &prefix, &bounds).unwrap();
    assert_eq!(a, b);
    for (i, t) in a.iter().enumerate() {
        assert!(a[..i].iter().all(|u| u != t), "task {} repeats", i);
    }
    let keys: Vec<u64> = a.iter().map(|t| (t.n + t.m) as u64).collect();
    assert!(keys.windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn empty_bounds_build_the_empty_structure() {
    let p = sphere(4);
    let limit = build_limit(&p, &Bounds::new(0, 0, q(1, 4)), None).unwrap();
    assert_eq!(limit.space.len(), 0);
    assert!(limit.entries.is_empty());
}
