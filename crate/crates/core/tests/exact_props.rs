use aperiodica::exact_arith::{hnf, hnf_pivots, integer_kernel, IntMatrix};
use aperiodica::QuadExt;
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;

fn quad() -> impl Strategy<Value = QuadExt> {
    (-60i64..60, 1i64..12, -60i64..60, 1i64..12).prop_map(|(p, q, r, s)| QuadExt::from_parts(p, q, r, s, 5).unwrap())
}

fn int_matrix() -> impl Strategy<Value = IntMatrix> {
    (1usize..=8, 1usize..=8)
        .prop_flat_map(|(r, c)| proptest::collection::vec(proptest::collection::vec(-50i64..=50, c), r))
        .prop_map(|rows| IntMatrix::from_rows(&rows))
}

proptest! {
    #[test]
    fn quadratic_field_laws(x in quad(), y in quad(), z in quad()) {
        prop_assert_eq!((x.clone() + y.clone()) - y.clone(), x.clone());
        prop_assert_eq!(x.clone() * y.clone(), y.clone() * x.clone());
        prop_assert_eq!(x.clone() * (y.clone() + z.clone()), x.clone() * y.clone() + x.clone() * z.clone());
        prop_assert_eq!((x.clone() * y.clone()).conjugate(), x.conjugate() * y.conjugate());
        prop_assert_eq!(QuadExt::rational(x.norm()), x.clone() * x.conjugate());
        if !x.is_zero() {
            prop_assert!((x.clone() * x.inv()).is_one());
        }
    }

    #[test]
    fn order_agrees_with_floats(x in quad(), y in quad()) {
        let (a, b) = (x.to_f64(), y.to_f64());
        if (a - b).abs() > 1e-9 {
            prop_assert_eq!(x < y, a < b);
        }
        prop_assert_eq!(x.clone() == y.clone(), x.cmp(&y).is_eq());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn hnf_is_a_unimodular_staircase(m in int_matrix()) {
        let (h, u) = hnf(&m);
        prop_assert_eq!(u.mul(&m).unwrap(), h.clone());
        prop_assert_eq!(u.det().unwrap().abs(), BigInt::one());
        let pivots = hnf_pivots(&h);
        prop_assert!(pivots.windows(2).all(|p| p[0] < p[1]));
        prop_assert_eq!(pivots.len(), m.rank());
        for (i, &p) in pivots.iter().enumerate() {
            prop_assert!(h[(i, p)] > BigInt::zero());
            for k in 0..i {
                prop_assert!(h[(k, p)] >= BigInt::zero() && h[(k, p)] < h[(i, p)]);
            }
        }
        for i in pivots.len()..h.rows() {
            prop_assert!(h.is_zero_row(i));
        }
    }

    #[test]
    fn integer_kernel_has_full_dimension(m in int_matrix()) {
        let kernel = integer_kernel(&m);
        prop_assert_eq!(kernel.len(), m.cols() - m.rank());
        for k in &kernel {
            prop_assert!(m.apply(k).iter().all(Zero::is_zero));
            prop_assert!(k.iter().any(|x| !x.is_zero()));
        }
    }
}
