use canon_core::retraction::{branch_self_check, check, f1, f2, f2_on_t, g, in_t, sample_csv, sigma, Curve, Point, Point2};
use canon_core::CanonError;
use proptest::prelude::*;

const SLACK: f64 = 1e-12;

fn p(x: f64, y: f64) -> Point {
    Point::new(x, y).unwrap()
}

proptest! {
    #[test]
    fn image_lies_in_square(x in -1e3f64..1e3, y in -1e3f64..1e3) {
        let v = f2(&p(x, y)).unwrap();
        prop_assert!(v.sup_norm() <= 2.0 + SLACK, "{x} {y} -> {v:?}");
    }

    #[test]
    fn square_is_fixed(x in -2f64..=2.0, y in -2f64..=2.0) {
        prop_assert_eq!(f2(&p(x, y)).unwrap(), p(x, y));
    }

    #[test]
    fn linear_relations_are_kept(t in -1e3f64..1e3) {
        let cases = [
            (p(t, 1.0), Curve::YOne),
            (p(1.0, t), Curve::XOne),
            (p(t, 0.0), Curve::YZero),
            (p(0.0, t), Curve::XZero),
            (p(t, 2.0 * t), Curve::YTwiceX),
            (p(2.0 * t, t), Curve::XTwiceY),
        ];
        for (q, cv) in cases {
            let v = f2_on_t(&q).unwrap();
            let ok = match cv {
                Curve::YOne => v.y == 1.0,
                Curve::XOne => v.x == 1.0,
                Curve::YZero => v.y == 0.0,
                Curve::XZero => v.x == 0.0,
                Curve::YTwiceX => (v.y - 2.0 * v.x).abs() <= SLACK,
                Curve::XTwiceY => (v.x - 2.0 * v.y).abs() <= SLACK,
                _ => unreachable!(),
            };
            // Points where two curves cross may take either relation.
            let crossing = Curve::ALL.iter().filter(|c| c.contains(&q)).count() > 1;
            prop_assert!(ok || crossing || q.sup_norm() <= 2.0, "{cv:?} at {q:?} -> {v:?}");
        }
    }

    #[test]
    fn parabolas_map_to_parabolas(t in -1e3f64..1e3) {
        let v = Curve::YSquareX.f2_param(t);
        prop_assert!((v.y - v.x * v.x).abs() <= 1e-9);
        let w = Curve::XSquareY.f2_param(t);
        prop_assert!((w.x - w.y * w.y).abs() <= 1e-9);
    }

    #[test]
    fn clamps(x in -10f64..10.0) {
        prop_assert!((0.0..=1.0).contains(&f1(x)));
        prop_assert!((-2.0..=2.0).contains(&sigma(x)));
        if (0.0..=1.0).contains(&x) {
            prop_assert_eq!(f1(x), x);
        }
    }
}

#[test]
fn continuous_across_curves() {
    for (q, dir) in [(p(7.0, 1.0), (0.0, 1.0)), (p(-3.0, 0.0), (0.0, 1.0)), (p(5.0, 10.0), (1.0, 0.0))] {
        let on = f2(&q).unwrap();
        let mut last = f64::INFINITY;
        for h in [1e-4, 1e-6, 1e-8] {
            let off = p(q.x + h * dir.0, q.y + h * dir.1);
            assert!(!in_t(&off));
            let gap = g(&off).unwrap().dist(&on);
            assert!(gap <= last, "{q:?} at {h}: {gap} > {last}");
            last = gap;
        }
        assert!(last < 1e-5, "{q:?}: {last}");
    }
}

#[test]
fn domain_errors() {
    assert!(matches!(f2_on_t(&p(5.0, 7.0)), Err(CanonError::NotInT(..))));
    assert!(matches!(g(&p(1.0, 1.0)), Err(CanonError::InT(..))));
    assert!(Point::new(f64::NAN, 0.0).is_err());
}

#[test]
fn generic_over_float_width() {
    let q = Point2::<f32>::new(5.0, 1.0).unwrap();
    let v = f2(&q).unwrap();
    assert_eq!(v.y, 1.0);
    assert!(v.sup_norm() <= 2.0);
}

#[test]
fn branches_agree_and_sampled_check_passes() {
    assert!(branch_self_check(1e-12).iter().all(|b| b.agree));
    let r = check(20_000, 1, 1e-9).unwrap();
    assert!(r.passed);
    assert_eq!(r, check(20_000, 1, 1e-9).unwrap());
    let csv = sample_csv(10, 1).unwrap();
    assert_eq!(csv.lines().count(), 11);
}
