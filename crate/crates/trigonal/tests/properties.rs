use proptest::prelude::*;
use std::sync::OnceLock;
use trigonal::curve::default_corpus;
use trigonal::divisor::{a_func, f_func, minus_one_2, minus_one_3, DivisorTuple};
use trigonal::periods::{zeta_pow, PeriodData, V3};
use trigonal::sample::{random_points, rng};
use trigonal::theta::Theta;
use trigonal::verify::{Suite, CHECK_COUNT};
use trigonal::{CurveSpec, Exec, C};

fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

fn curves() -> &'static [CurveSpec] {
    static CURVES: OnceLock<Vec<CurveSpec>> = OnceLock::new();
    CURVES.get_or_init(default_corpus)
}

fn base_periods() -> &'static PeriodData {
    static P: OnceLock<PeriodData> = OnceLock::new();
    P.get_or_init(|| PeriodData::build(&curves()[1], Exec::Sequential).unwrap())
}

fn cx() -> impl Strategy<Value = C> {
    (-3.0..3.0f64, -3.0..3.0f64).prop_map(|(re, im)| c(re, im))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn zeta_action_has_order_three(u0 in cx(), u1 in cx(), u2 in cx()) {
        let u = V3::new(u0, u1, u2);
        let back = zeta_pow(&zeta_pow(&zeta_pow(&u, 1), 1), 1);
        prop_assert!((back - u).norm() < 1e-12 * (1.0 + u.norm()));
        prop_assert!((zeta_pow(&u, 2) - zeta_pow(&u, -1)).norm() < 1e-12 * (1.0 + u.norm()));
    }

    #[test]
    fn sheets_lie_on_the_curve(which in 0..3usize, x in cx()) {
        let curve = &curves()[which];
        prop_assume!(curve.b.iter().all(|&b| (x - b).norm() > 1e-3));
        let pts = curve.sheets_above(x).unwrap();
        for p in &pts {
            prop_assert!((p.y * p.y * p.y - curve.f(x)).norm() < 1e-10 * (1.0 + curve.f(x).norm()));
        }
        // the three sheets differ by cube roots of unity
        prop_assert!((pts[0].y - pts[1].y).norm() > 1e-8 * curve.f(x).norm().cbrt());
    }

    #[test]
    fn a_and_f_are_invariant_under_the_sheet_rotation(which in 0..3usize, seed in any::<u64>(), a in 0..4usize, k in 1..3i64) {
        let curve = &curves()[which];
        let d = DivisorTuple::new(random_points(curve, &mut rng(seed), 3));
        let r = d.rotate(k);
        let (a0, a1) = (a_func(curve, a, &d.points), a_func(curve, a, &r.points));
        prop_assume!(a0.is_ok() && a1.is_ok());
        let (a0, a1) = (a0.unwrap(), a1.unwrap());
        prop_assert!((a0 - a1).norm() < 1e-7 * (1.0 + a0.norm()), "{a0} vs {a1}");
        prop_assert_eq!(f_func(curve, a, &d.points), f_func(curve, a, &r.points));
    }

    #[test]
    fn minus_one_three_is_an_involution(which in 0..3usize, seed in any::<u64>()) {
        let curve = &curves()[which];
        let d = random_points(curve, &mut rng(seed), 3);
        let Ok(img) = minus_one_3(curve, &d[0], &d[1], &d[2]) else { return Ok(()) };
        prop_assume!(img.len() == 3);
        let Ok(back) = minus_one_3(curve, &img.points[0], &img.points[1], &img.points[2]) else { return Ok(()) };
        let dist = DivisorTuple::new(d.clone()).distance(&back);
        let scale = d.iter().map(|p| p.x.norm() + p.y.norm()).fold(1.0, f64::max);
        prop_assert!(dist < 1e-6 * scale, "distance {dist}");
    }

    #[test]
    fn minus_one_two_points_lie_on_the_line_and_curve(which in 0..3usize, seed in any::<u64>()) {
        let curve = &curves()[which];
        let d = random_points(curve, &mut rng(seed), 2);
        let Ok(img) = minus_one_2(curve, &d[0], &d[1]) else { return Ok(()) };
        prop_assert_eq!(img.len(), 2);
        let beta = (d[1].y - d[0].y) / (d[1].x - d[0].x);
        for p in &img.points {
            prop_assert!(curve.residual(p) < 1e-6);
            prop_assert!((p.y - d[0].y - beta * (p.x - d[0].x)).norm() < 1e-7 * (1.0 + p.y.norm()));
        }
    }

    #[test]
    fn theta_is_periodic_and_even(z0 in cx(), z1 in cx(), z2 in cx(), m in prop::array::uniform3(-2i64..=2)) {
        let p = base_periods();
        let th = Theta::new(p.tau.view((0, 0), (3, 3)).into_owned()).unwrap();
        let z = [z0 * 0.1, z1 * 0.1, z2 * 0.1];
        let zero = [0.0; 3];
        let v = th.eval(&z, &zero, &zero, 10).unwrap();
        let shifted: Vec<C> = z.iter().zip(m).map(|(&zi, mi)| zi + mi as f64).collect();
        let w = th.eval(&shifted, &zero, &zero, 10).unwrap();
        prop_assert!((v - w).norm() < 1e-9 * (1.0 + v.norm()), "{v} vs {w}");
        let neg: Vec<C> = z.iter().map(|&zi| -zi).collect();
        let n = th.eval(&neg, &zero, &zero, 10).unwrap();
        prop_assert!((v - n).norm() < 1e-9 * (1.0 + v.norm()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    // an affine change x ↦ αx + β rescales the periods but keeps the
    // bilinear relation exact
    #[test]
    fn legendre_relation_survives_affine_changes(r in 0.5..2.0f64, th in 0.0..std::f64::consts::TAU, shift in cx()) {
        let alpha = C::from_polar(r, th);
        let b = curves()[2].b.map(|bi| alpha * bi + shift);
        let curve = CurveSpec::new(b).unwrap();
        let p = PeriodData::build(&curve, Exec::Sequential).unwrap();
        prop_assert!(p.legendre_residual < 1e-8, "{}", p.legendre_residual);
        prop_assert!(p.min_im_tau_eigenvalue() > 0.0);
        prop_assert!(p.tau_asymmetry() < 1e-8);
    }
}

#[test]
fn suites_cover_every_check_once() {
    let mut all: Vec<u32> =
        [Suite::Frobenius, Suite::Addition, Suite::Residues, Suite::Periodicity, Suite::Hyperelliptic]
            .iter()
            .flat_map(|s| s.checks())
            .collect();
    all.sort_unstable();
    assert_eq!(all, (1..=CHECK_COUNT).collect::<Vec<_>>());
    assert_eq!(Suite::All.checks(), all);
}
