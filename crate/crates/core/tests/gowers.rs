use polyprog::cyclic::CyclicFn;
use polyprog::gowers::{avg_local_gowers, dual_function, local_gowers_power, GowersSpec};
use polyprog::sieve::EstimatorMode;
use proptest::prelude::*;

fn values(n: usize) -> impl Strategy<Value = CyclicFn> {
    prop::collection::vec(-1.0f64..1.0, n).prop_map(CyclicFn::new)
}

/// Direct expansion of the two-dimensional local box norm.
fn brute_power(f: &CyclicFn, a: [i64; 2], s: i64) -> f64 {
    let n = f.n() as i64;
    let mut total = 0.0;
    for x in 0..n {
        for m1 in 1..=s {
            for m1p in 1..=s {
                for m2 in 1..=s {
                    for m2p in 1..=s {
                        let g = |u: i64, v: i64| f.at(x + a[0] * u + a[1] * v);
                        total += g(m1, m2) * g(m1p, m2) * g(m1, m2p) * g(m1p, m2p);
                    }
                }
            }
        }
    }
    total / (n * s.pow(4)) as f64
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn power_matches_expansion(f in (8usize..24).prop_flat_map(values), a in (1i64..9, 1i64..9), s in 1i64..4) {
        let got = local_gowers_power(&f, &[a.0, a.1], s as u64).unwrap();
        let want = brute_power(&f, [a.0, a.1], s);
        prop_assert!((got - want).abs() <= 1e-12 * want.abs().max(1.0));
    }

    #[test]
    fn dual_pairing_is_the_power(f in (8usize..32).prop_flat_map(values), a in (1i64..9, 1i64..9), s in 2u64..4) {
        let spec = GowersSpec::constant_steps(&[a.0, a.1], s).unwrap();
        let power = avg_local_gowers(&f, &spec, EstimatorMode::Exact).unwrap().power;
        let pairing = f.inner(&dual_function(&f, &spec).unwrap());
        prop_assert!((pairing - power).abs() <= 1e-9 * power.abs().max(1e-300));
    }

    #[test]
    fn translation_invariance(f in (8usize..32).prop_flat_map(values), k in -40i64..40) {
        let spec = GowersSpec::constant_steps(&[1, 3], 3).unwrap();
        let a = avg_local_gowers(&f, &spec, EstimatorMode::Exact).unwrap().power;
        let b = avg_local_gowers(&f.shift(k), &spec, EstimatorMode::Exact).unwrap().power;
        prop_assert!((a - b).abs() <= 1e-12);
    }

    #[test]
    fn power_is_nonnegative(f in (8usize..32).prop_flat_map(values)) {
        let spec = GowersSpec::constant_steps(&[2, 5], 3).unwrap();
        prop_assert!(avg_local_gowers(&f, &spec, EstimatorMode::Exact).unwrap().power >= -1e-15);
    }
}

#[test]
fn constants_have_norm_one() {
    let spec = GowersSpec::constant_steps(&[1, 2], 4).unwrap();
    let est = avg_local_gowers(&CyclicFn::constant(31, 1.0), &spec, EstimatorMode::Exact).unwrap();
    assert!((est.norm - 1.0).abs() < 1e-12);
}

#[test]
fn sampled_estimate_is_reproducible_and_close() {
    let f = CyclicFn::from_fn(64, |x| if x % 3 == 0 { 1.0 } else { -0.5 });
    let spec = GowersSpec::constant_steps(&[1, 2], 4).unwrap();
    let exact = avg_local_gowers(&f, &spec, EstimatorMode::Exact).unwrap().power;
    let mode = EstimatorMode::Sampled { samples: 20_000, seed: 9 };
    let a = avg_local_gowers(&f, &spec, mode).unwrap();
    let b = avg_local_gowers(&f, &spec, mode).unwrap();
    assert_eq!(a, b);
    let se = a.std_error.unwrap();
    assert!((a.power - exact).abs() <= 5.0 * se + 1e-12, "{} vs {exact} (se {se})", a.power);
}
