use polyprog::pet::{linearize, make_system, next_target, vdc_step, weight_vector, WeightVector};
use polyprog::polyalg::MultiPoly;
use proptest::prelude::*;

fn quadratic_family() -> impl Strategy<Value = Vec<MultiPoly>> {
    prop::collection::btree_set((-3i64..=3, -2i64..=2), 1..=2).prop_map(|set| {
        let mut out = vec![MultiPoly::zero(1)];
        for (a, b) in set {
            let p = MultiPoly::from_terms(1, [(vec![1], a), (vec![2], b)]).unwrap();
            if !p.is_zero() && !out.contains(&p) {
                out.push(p);
            }
        }
        out
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn quadratic_families_linearize(fam in quadratic_family()) {
        let res = linearize(&make_system(&fam, true).unwrap()).unwrap();
        for s in &res.steps {
            prop_assert!(s.weight_after < s.weight_before, "{} -> {}", s.weight_before, s.weight_after);
        }
        for (i, b) in res.b.iter().enumerate() {
            prop_assert!(!b.is_zero());
            prop_assert!(!res.b[..i].contains(b));
        }
        prop_assert!(res.qvec.len() >= 2);
    }

    #[test]
    fn ordinal_order_reads_from_the_top(a in prop::collection::vec(0u32..4, 0..5), b in prop::collection::vec(0u32..4, 0..5)) {
        let (wa, wb) = (WeightVector::new(a.clone()), WeightVector::new(b.clone()));
        let top = a.len().max(b.len());
        let key = |v: &[u32]| (1..=top).rev().map(|i| v.get(i - 1).copied().unwrap_or(0)).collect::<Vec<_>>();
        prop_assert_eq!(wa.cmp(&wb), key(&a).cmp(&key(&b)));
    }
}

#[test]
fn steps_follow_the_selection_rule() {
    let m = MultiPoly::var(1, 0);
    let fam = vec![MultiPoly::zero(1), m.clone(), m.pow(2)];
    let mut sys = make_system(&fam, true).unwrap();
    let res = linearize(&sys).unwrap();
    for rec in &res.steps {
        assert_eq!(next_target(&sys).unwrap(), Some(rec.target));
        assert_eq!(weight_vector(&sys, rec.target).unwrap(), rec.weight_before);
        sys = vdc_step(&sys, rec.target).unwrap().0;
    }
    assert_eq!(next_target(&sys).unwrap(), None);
}
