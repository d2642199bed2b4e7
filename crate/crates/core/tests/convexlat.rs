use polyprog::convexlat::{lattice_count, normalized_residue_density, ConvexBody};
use proptest::prelude::*;

fn brute_box(lower: &[f64], upper: &[f64], m: i64, a: &[i64]) -> u128 {
    fn rec(d: usize, lower: &[f64], upper: &[f64], m: i64, a: &[i64]) -> u128 {
        if d == lower.len() {
            return 1;
        }
        let lo = lower[d].floor() as i64;
        let hi = upper[d].ceil() as i64;
        (lo..=hi)
            .filter(|&x| (x as f64) > lower[d] && (x as f64) < upper[d] && (x - a[d]).rem_euclid(m) == 0)
            .map(|_| rec(d + 1, lower, upper, m, a))
            .sum()
    }
    rec(0, lower, upper, m, a)
}

proptest! {
    #[test]
    fn box_count_matches_enumeration(
        corners in prop::collection::vec((-30.0f64..30.0, 0.5f64..25.0), 1..=3),
        m in 1u64..7,
        shift in prop::collection::vec(-10i64..10, 3),
    ) {
        let lower: Vec<f64> = corners.iter().map(|c| c.0).collect();
        let upper: Vec<f64> = corners.iter().map(|c| c.0 + c.1).collect();
        let a = &shift[..lower.len()];
        let body = ConvexBody::new_box(lower.clone(), upper.clone()).unwrap();
        prop_assert_eq!(lattice_count(&body, m, a).unwrap(), brute_box(&lower, &upper, m as i64, a));
    }

    #[test]
    fn count_is_invariant_under_lattice_translation(
        lo in -20.0f64..20.0, len in 1.0f64..40.0, m in 1u64..6, a in 0i64..6, k in -5i64..5,
    ) {
        let body = ConvexBody::new_box(vec![lo, lo], vec![lo + len, lo + len / 2.0]).unwrap();
        let step = (k * m as i64) as f64;
        let moved = body.translate(&[step, -step]);
        prop_assert_eq!(lattice_count(&body, m, &[a, a]).unwrap(), lattice_count(&moved, m, &[a, a]).unwrap());
    }

    #[test]
    fn large_boxes_equidistribute(r in 50.0f64..200.0, m in 1u64..5) {
        let body = ConvexBody::cube(2, 0.0, 2.0 * r).unwrap();
        let dens = normalized_residue_density(&body, m, &[0, 1]).unwrap();
        prop_assert!((dens - 1.0).abs() <= 5.0 * m as f64 / r);
    }
}

#[test]
fn open_box_examples() {
    let b = ConvexBody::new_box(vec![0.0, 0.0], vec![10.0, 10.0]).unwrap();
    // 1..=9 on each axis, residues 0 mod 3: {3, 6, 9}
    assert_eq!(lattice_count(&b, 3, &[0, 0]).unwrap(), 9);
    assert_eq!(lattice_count(&b, 1, &[0, 0]).unwrap(), 81);
}
