use num_bigint::BigInt;
use num_traits::Euclid;
use polyprog::polyalg::{coprime_mod_p, is_prime, parse_family, parse_poly, reduce_mod_p, resultant, MultiPoly};
use proptest::prelude::*;

fn poly2() -> impl Strategy<Value = MultiPoly> {
    prop::collection::vec(((0u32..4, 0u32..4), -9i64..=9), 0..6)
        .prop_map(|terms| MultiPoly::from_terms(2, terms.into_iter().map(|((a, b), c)| (vec![a, b], c))).unwrap())
}

fn eval(p: &MultiPoly, x: i64, y: i64) -> BigInt {
    p.eval(&[BigInt::from(x), BigInt::from(y)])
}

proptest! {
    #[test]
    fn ring_operations_commute_with_evaluation(a in poly2(), b in poly2(), x in -5i64..=5, y in -5i64..=5) {
        let sum = a.checked_add(&b).unwrap();
        let prod = a.checked_mul(&b).unwrap();
        prop_assert_eq!(eval(&sum, x, y), eval(&a, x, y) + eval(&b, x, y));
        prop_assert_eq!(eval(&prod, x, y), eval(&a, x, y) * eval(&b, x, y));
        prop_assert_eq!(&prod, &b.checked_mul(&a).unwrap());
    }

    #[test]
    fn display_parses_back(a in poly2()) {
        let text = a.display_with(&["x", "y"]);
        prop_assert_eq!(parse_poly(&text, &["x", "y"]).unwrap(), a);
    }

    #[test]
    fn reduction_agrees_with_evaluation(a in poly2(), x in 0i64..7, y in 0i64..7) {
        let r = reduce_mod_p(&a, 7).unwrap();
        let m7 = |v: BigInt| v.rem_euclid(&BigInt::from(7));
        prop_assert_eq!(m7(eval(&a, x, y)), m7(eval(r.body(), x, y)));
    }

    #[test]
    fn linear_resultant(a in -50i64..50, b in -50i64..50, c in -50i64..50, d in -50i64..50) {
        let p = MultiPoly::from_terms(1, [(vec![0], a), (vec![1], b)]).unwrap();
        let q = MultiPoly::from_terms(1, [(vec![0], c), (vec![1], d)]).unwrap();
        prop_assert_eq!(resultant(&p, &q, 0, 1, 1).unwrap(), MultiPoly::constant(1, a * d - b * c));
    }

    #[test]
    fn common_root_kills_resultant(r in 0i64..11, s in 0i64..11, t in 0i64..11) {
        // (x - r)(x - s) and (x - r)(x - t) share x - r mod 11
        let lin = |v: i64| MultiPoly::from_terms(1, [(vec![1], 1), (vec![0], -v)]).unwrap();
        let a = lin(r).checked_mul(&lin(s)).unwrap();
        let b = lin(r).checked_mul(&lin(t)).unwrap();
        prop_assert!(reduce_mod_p(&resultant(&a, &b, 0, 2, 2).unwrap(), 11).unwrap().is_zero());
        prop_assert!(!coprime_mod_p(&a, &b, 11).unwrap());
    }
}

#[test]
fn miller_rabin_matches_trial_division() {
    let naive = |n: u64| n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d));
    for n in 0..20_000 {
        assert_eq!(is_prime(n), naive(n), "{n}");
    }
    assert!(is_prime(1_000_000_007));
    assert!(!is_prime(3_215_031_751));
}

#[test]
fn family_grammar() {
    let fam = parse_family("m^2 - m\n# comment\n3m; 0", Some(&["m"])).unwrap();
    assert_eq!(fam.polys.len(), 3);
    assert_eq!(fam.polys[1], parse_poly("3*m", &["m"]).unwrap());
    assert!(parse_family("m^^2", Some(&["m"])).is_err());
    assert!(parse_poly("q + 1", &["m"]).is_err());
}
