use polyprog::sieve::{
    check_majorization, nu, params_from_n, prime_weight_f, CutoffChi, PrimeSet, PrimeTable, Scales,
};
use proptest::prelude::*;

fn naive_mu(mut n: u64) -> i8 {
    let mut out = 1;
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            n /= p;
            if n.is_multiple_of(p) {
                return 0;
            }
            out = -out;
        }
        p += 1;
    }
    if n > 1 {
        out = -out;
    }
    out
}

#[test]
fn table_matches_trial_division() {
    let t = PrimeTable::build(5000).unwrap();
    for n in 2..=5000u64 {
        let spf = (2..=n).find(|d| n % d == 0).unwrap();
        assert_eq!(t.spf(n).unwrap(), spf, "{n}");
        assert_eq!(t.mu(n).unwrap(), naive_mu(n), "{n}");
        assert_eq!(t.is_prime(n).unwrap(), spf == n);
    }
    assert_eq!(t.mu(1).unwrap(), 1);
    assert!(t.spf(5001).is_err());
}

#[test]
fn cache_round_trip() {
    let dir = std::env::temp_dir().join(format!("pplt-{}", std::process::id()));
    let t = PrimeTable::build(1000).unwrap();
    t.write_cache(&dir).unwrap();
    let back = PrimeTable::read_cache(&dir).unwrap();
    std::fs::remove_file(&dir).ok();
    assert_eq!(back.primes(), t.primes());
    assert_eq!(back.limit(), 1000);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn majorant_dominates_prime_weight(n in 200u64..3000, w in 2u64..6) {
        let table = PrimeTable::build(30 * (n + 1)).unwrap();
        let r = (n as f64).powf(0.25);
        let params = params_from_n(n, w, &Scales::Direct { m: 8, r, h: 2 }, &PrimeSet::All, &table).unwrap();
        let nu_fn = nu(&params, &CutoffChi::default(), &table).unwrap();
        let f = prime_weight_f(&params, &PrimeSet::All, &table).unwrap();
        prop_assert!(check_majorization(&f, &nu_fn).is_ok());
        prop_assert!(nu_fn.values().iter().all(|v| *v >= 0.0));
    }
}

#[test]
fn cutoff_energy_is_normalized() {
    let chi = CutoffChi::default();
    assert!((chi.energy() - 1.0).abs() <= 1e-6);
    assert_eq!(chi.value(0.0), 1.0);
    assert_eq!(chi.value(1.0), 0.0);
    assert_eq!(chi.value(-2.0), 0.0);
}
