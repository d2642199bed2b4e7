use num_bigint::BigInt;
use num_rational::BigRational;
use polyprog::localfactors::{complementary_factor, local_factor, SubsetTable, DEFAULT_BUDGET};
use polyprog::polyalg::MultiPoly;
use proptest::prelude::*;

fn family(nvars: usize) -> impl Strategy<Value = Vec<MultiPoly>> {
    let term = (prop::collection::vec(0u32..3, nvars), -6i64..=6);
    prop::collection::vec(prop::collection::vec(term, 1..4), 1..4).prop_map(move |fam| {
        fam.into_iter().map(|terms| MultiPoly::from_terms(nvars, terms).unwrap()).collect()
    })
}

/// Fraction of points of F_p^D where every polynomial vanishes, by direct evaluation.
fn brute_common_zeros(p: u64, polys: &[MultiPoly], nvars: usize) -> BigRational {
    let total = p.pow(nvars as u32);
    let mut hits = 0u64;
    for idx in 0..total {
        let mut rest = idx;
        let point: Vec<BigInt> = (0..nvars)
            .map(|_| {
                let c = rest % p;
                rest /= p;
                BigInt::from(c)
            })
            .collect();
        if polys.iter().all(|q| (q.eval(&point) % BigInt::from(p)) == BigInt::from(0)) {
            hits += 1;
        }
    }
    BigRational::new(BigInt::from(hits), BigInt::from(total))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn local_factor_matches_enumeration(fam in family(2), pi in 0usize..4) {
        let p = [2u64, 3, 5, 7][pi];
        prop_assert_eq!(local_factor(p, &fam).unwrap(), brute_common_zeros(p, &fam, 2));
    }

    #[test]
    fn inclusion_exclusion_is_exact(fam in family(2), pi in 0usize..4) {
        let p = [2u64, 3, 5, 7][pi];
        let t = SubsetTable::build(p, &fam, DEFAULT_BUDGET).unwrap();
        prop_assert_eq!(t.c_bar(), t.inclusion_exclusion());
        prop_assert_eq!(t.c_bar(), complementary_factor(p, &fam).unwrap());
    }

    #[test]
    fn factors_lie_in_unit_interval(fam in family(3), pi in 0usize..3) {
        let p = [2u64, 3, 5][pi];
        let zero = BigRational::from_integer(0.into());
        let one = BigRational::from_integer(1.into());
        for r in [local_factor(p, &fam).unwrap(), complementary_factor(p, &fam).unwrap()] {
            prop_assert!(r >= zero && r <= one);
        }
    }
}

#[test]
fn quadratic_residue_table() {
    let f = vec![MultiPoly::from_terms(1, [(vec![2], 1), (vec![0], 1)]).unwrap()];
    for p in [5u64, 13, 17, 29, 37, 41] {
        assert_eq!(local_factor(p, &f).unwrap(), BigRational::new(2.into(), BigInt::from(p)));
    }
    for p in [3u64, 7, 11, 19, 23, 31] {
        assert_eq!(local_factor(p, &f).unwrap(), BigRational::from_integer(0.into()));
    }
}
