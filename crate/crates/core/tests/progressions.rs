use polyprog::cyclic::CyclicFn;
use polyprog::polyalg::{parse_family, MultiPoly};
use polyprog::progressions::{count_progressions, singular_series, weighted_polynomial_average, ProgressionSpec};
use polyprog::sieve::{PrimeSet, PrimeTable};
use proptest::prelude::*;

fn is_prime(n: i128) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| n % d != 0)
}

fn family() -> impl Strategy<Value = Vec<MultiPoly>> {
    prop::collection::btree_set((-3i64..=3, -2i64..=2), 1..=3).prop_map(|set| {
        let mut out: Vec<MultiPoly> = Vec::new();
        for (a, b) in set {
            let p = MultiPoly::from_terms(1, [(vec![1], a), (vec![2], b)]).unwrap();
            if !out.contains(&p) {
                out.push(p);
            }
        }
        out
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn count_matches_double_loop(polys in family(), n in 1u64..400, m in 1u64..20) {
        let table = PrimeTable::build(2000).unwrap();
        let spec = ProgressionSpec::new(polys.clone(), n, m, PrimeSet::All).unwrap();
        let res = count_progressions(&spec, &table, 5).unwrap();
        let mut naive = Vec::new();
        for x in 1..=n as i128 {
            for mm in 1..=m as i128 {
                let vals: Vec<i128> = polys.iter().map(|p| x + p.eval_i128(&[mm]).unwrap()).collect();
                if vals.iter().all(|&v| is_prime(v)) {
                    naive.push((x as u64, mm as u64));
                }
            }
        }
        prop_assert_eq!(res.count, naive.len() as u64);
        let got: Vec<(u64, u64)> = res.witnesses.iter().map(|w| (w.x, w.m)).collect();
        let mut sorted = naive.clone();
        sorted.sort();
        prop_assert_eq!(got, sorted.into_iter().take(5).collect::<Vec<_>>());
    }

    #[test]
    fn average_scales_multiplicatively(c in 0.1f64..3.0, w in 1u64..4) {
        let polys = parse_family("m; m^2", Some(&["m"])).unwrap().polys;
        let g = CyclicFn::from_fn(400, |x| 1.0 + (x % 5) as f64);
        let base = weighted_polynomial_average(&g, &polys, 4, w).unwrap();
        let scaled = weighted_polynomial_average(&g.scale(c), &polys, 4, w).unwrap();
        prop_assert!((scaled - c * c * base).abs() <= 1e-9 * scaled.abs());
    }

    #[test]
    fn average_is_monotone(w in 1u64..4, bump in 0usize..300) {
        let polys = parse_family("0; 2m", Some(&["m"])).unwrap().polys;
        let g = CyclicFn::from_fn(300, |x| ((x * 7) % 3) as f64 / 2.0);
        let mut bigger = g.values().to_vec();
        bigger[bump] += 1.0;
        let a = weighted_polynomial_average(&g, &polys, 5, w).unwrap();
        let b = weighted_polynomial_average(&CyclicFn::new(bigger), &polys, 5, w).unwrap();
        prop_assert!(b >= a - 1e-15);
    }
}

#[test]
fn singular_series_of_twin_shape() {
    let table = PrimeTable::build(1000).unwrap();
    let polys = parse_family("0; m", Some(&["m"])).unwrap().polys;
    let s = singular_series(&polys, 1000, &table).unwrap();
    assert!(s.terrible.is_none());
    assert_eq!(s.k, 2);
    assert!((s.gamma - 1.0).abs() < 1e-12, "{}", s.gamma);
}
