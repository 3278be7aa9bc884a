use metfraisse_core::amalgam::*;
use metfraisse_core::apx::*;
use metfraisse_core::metric::{validate_metric, PointTuple};
use metfraisse_core::sample::{random_apx, random_metric, random_partial_isometry, shared};
use metfraisse_core::Rat;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn amalgams_are_metrics(seed in any::<u64>(), den in 1i128..=8, capped in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (n, m) = (rng.gen_range(1..=6), rng.gen_range(1..=6));
        let max_units = if capped { den } else { 2 * den };
        let x = shared(random_metric(&mut rng, n, den, max_units));
        let y = shared(random_metric(&mut rng, m, den, max_units));
        let psi = random_apx(&mut rng, &x, &y, den);
        prop_assume!(psi.is_all_finite());
        let cap = if capped { Some(Rat::ONE) } else { None };
        let am = amalgam_from_apx(&psi, cap).unwrap();
        prop_assert!(validate_metric(&am.space.rows()).is_ok());
        // Uncapped amalgams realize ψ exactly; capped ones realize min(ψ, 1).
        let realized = am.realized(x.clone(), y.clone());
        for i in 0..n {
            for j in 0..m {
                let want = psi.get(i, j).finite().unwrap();
                let want = if capped { want.min(Rat::ONE) } else { want };
                prop_assert_eq!(realized.get(i, j).finite().unwrap(), want);
            }
        }
    }

    #[test]
    fn dk_is_a_pseudo_distance(seed in any::<u64>(), den in 1u32..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let params = ClassParams::sphere(den);
        let d = den as i128;
        let spaces: Vec<_> = (0..3).map(|_| {
            let n = rng.gen_range(1..=3);
            random_metric(&mut rng, n, d, d)
        }).collect();
        let len = rng.gen_range(1..=3);
        let tuples: Vec<PointTuple<'_>> = spaces
            .iter()
            .map(|s| PointTuple::new(s, (0..len).map(|_| rng.gen_range(0..s.len())).collect()).unwrap())
            .collect();
        let ab = dk_metric(&tuples[0], &tuples[1], &params).unwrap();
        let ba = dk_metric(&tuples[1], &tuples[0], &params).unwrap();
        prop_assert_eq!(ab, ba);
        prop_assert!(!ab.is_negative());
        prop_assert_eq!(dk_metric(&tuples[0], &tuples[0], &params).unwrap(), Rat::ZERO);
        prop_assert!(dk_triangle_check(&tuples[0], &tuples[1], &tuples[2], &params).unwrap());
    }

    #[test]
    fn dk_vanishes_on_isometric_copies(seed in any::<u64>(), den in 1i128..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let params = ClassParams::sphere(den as u32);
        let n = rng.gen_range(1..=4);
        let x = shared(random_metric(&mut rng, n, den, den));
        let y = shared(random_metric(&mut rng, n + 1, den, den));
        let k = rng.gen_range(1..=n);
        let must: Vec<usize> = (0..k).collect();
        if let Some(f) = random_partial_isometry(&mut rng, &x, &y, &must, 0) {
            let (dom, img): (Vec<usize>, Vec<usize>) = f.pairs().iter().copied().unzip();
            let a = PointTuple::new(&x, dom).unwrap();
            let b = PointTuple::new(&y, img).unwrap();
            prop_assert_eq!(dk_metric(&a, &b, &params).unwrap(), Rat::ZERO);
        }
    }

    #[test]
    fn nap_realizes_coarsened_partial_maps(seed in any::<u64>(), den in 1u32..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = den as i128;
        let params = ClassParams::sphere(den);
        let (n, m) = (rng.gen_range(1..=4), rng.gen_range(1..=4));
        let x = shared(random_metric(&mut rng, n, d, d));
        let y = shared(random_metric(&mut rng, m, d, d));
        let f = random_partial_isometry(&mut rng, &x, &y, &[], 2).unwrap();
        let eps = Rat::new(rng.gen_range(1..=d), d);
        let am = nap_metric(&x, &y, &f, eps, &params).unwrap();
        prop_assert!(am.space.validate().is_ok());
        prop_assert!(am.space.diameter() <= Rat::ONE);
        if !f.pairs().is_empty() {
            let bound = coarsen(&from_partial(&f), eps).unwrap();
            prop_assert!(leq(&am.realized(x.clone(), y.clone()), &bound).unwrap());
        }
    }
}
