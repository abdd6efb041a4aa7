use std::collections::HashSet;

use aperiodica::modelset::{fixture_spec, generate, Fixture};
use aperiodica::pointsets::{BoxRegion, PointSample};
use aperiodica::windows::Mode;
use aperiodica::QuadExt;
use proptest::prelude::*;

fn exact_set(s: &PointSample) -> HashSet<Vec<QuadExt>> {
    (0..s.len()).map(|i| s.exact_position(i).unwrap()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn fibonacci_cut_is_translation_equivariant(t in -40i64..40, w in -64i64..64, u in -40i64..40) {
        let region = BoxRegion::interval(0.0, 40.0).unwrap();
        let base = fixture_spec(Fixture::Fibonacci, region).unwrap();
        let (t, w, u) = (QuadExt::frac(t, 8), QuadExt::frac(w, 64), QuadExt::frac(u, 8));
        let a = generate(&base.clone().with_shift(vec![t.clone()], vec![w.clone()]).unwrap(), Mode::Closed).unwrap();
        let moved = base
            .with_region(BoxRegion::interval(-u.to_f64(), 40.0 - u.to_f64()).unwrap())
            .unwrap()
            .with_shift(vec![t + u.clone()], vec![w])
            .unwrap();
        let b = generate(&moved, Mode::Closed).unwrap();
        let expected: HashSet<Vec<QuadExt>> = exact_set(&a).into_iter().map(|p| vec![p[0].clone() - u.clone()]).collect();
        prop_assert_eq!(exact_set(&b), expected);
    }

    #[test]
    fn interior_cut_sits_inside_the_closed_cut(w in -64i64..64, v in -64i64..64) {
        let spec = fixture_spec(Fixture::AmmannBeenker, BoxRegion::new(vec![0.0; 2], vec![6.0; 2]).unwrap())
            .unwrap()
            .with_shift(vec![QuadExt::int(0); 2], vec![QuadExt::frac(w, 64), QuadExt::frac(v, 64)])
            .unwrap();
        let inner = exact_set(&generate(&spec, Mode::Interior).unwrap());
        let outer = exact_set(&generate(&spec, Mode::Closed).unwrap());
        prop_assert!(inner.is_subset(&outer));
    }
}
