use polyprog::cyclic::CyclicFn;
use polyprog::gowers::GowersSpec;
use polyprog::structure::{factor_from_function_with_offset, knvn_decompose, DecomposeParams, Factor};
use proptest::prelude::*;

fn labels(n: usize, k: u8) -> impl Strategy<Value = Vec<u8>> {
    prop::collection::vec(0..k, n)
}

fn func(n: usize) -> impl Strategy<Value = CyclicFn> {
    prop::collection::vec(-2.0f64..2.0, n).prop_map(CyclicFn::new)
}

fn close(a: &CyclicFn, b: &CyclicFn) -> bool {
    a.values().iter().zip(b.values()).all(|(x, y)| (x - y).abs() <= 1e-12)
}

proptest! {
    #[test]
    fn conditional_expectation_is_a_projection(l in labels(24, 4), f in func(24), g in func(24)) {
        let y = Factor::new(&l);
        let ef = y.cond_exp(&f).unwrap();
        prop_assert!(close(&y.cond_exp(&ef).unwrap(), &ef));
        prop_assert!((ef.mean() - f.mean()).abs() <= 1e-12);
        // self-adjoint: <E f, g> = <f, E g>
        let eg = y.cond_exp(&g).unwrap();
        prop_assert!((ef.inner(&g) - f.inner(&eg)).abs() <= 1e-10);
    }

    #[test]
    fn join_refines_both(a in labels(20, 3), b in labels(20, 3), f in func(20)) {
        let (ya, yb) = (Factor::new(&a), Factor::new(&b));
        let j = ya.join(&yb).unwrap();
        prop_assert!(j.atom_count() >= ya.atom_count().max(yb.atom_count()));
        prop_assert!(j.atom_count() <= ya.atom_count() * yb.atom_count());
        // tower property
        let inner = j.cond_exp(&f).unwrap();
        prop_assert!(close(&ya.cond_exp(&inner).unwrap(), &ya.cond_exp(&f).unwrap()));
        prop_assert_eq!(ya.join(&ya).unwrap().atom_count(), ya.atom_count());
    }

    #[test]
    fn binning_is_measurable(f in func(30), alpha in 0.0f64..1.0, eps in 0.05f64..1.0) {
        let y = factor_from_function_with_offset(&f, eps, alpha).unwrap();
        let ef = y.cond_exp(&f).unwrap();
        // within one bin, values differ by less than eps
        prop_assert!(f.values().iter().zip(ef.values()).all(|(a, b)| (a - b).abs() < eps));
    }
}

#[test]
fn decomposition_bounds_on_structured_input() {
    let n = 256;
    let nu = CyclicFn::constant(n, 1.0);
    let g = CyclicFn::from_fn(n, |x| (x % 2 == 0) as u8 as f64);
    let spec = GowersSpec::constant_steps(&[1, 2], 8).unwrap();
    let dec = knvn_decompose(&g, &nu, &spec, &DecomposeParams::new(0.05, 1e-3, 1)).unwrap();
    let ck = dec.check(&g);
    assert!(dec.iterations >= 1 && dec.iterations < dec.cap);
    assert!(ck.structured_min >= -1e-12 && ck.structured_max <= 1.0 + dec.sigma + 1e-12);
    assert!(ck.sum_min >= -1e-12 && ck.sum_excess <= 1e-12);
    assert!(ck.final_correlation <= 0.05);
    for w in dec.trace.windows(2) {
        assert!(w[1].energy >= w[0].energy);
    }
}
