use fracfueter_core::box_domain::{calibrate_orientation, verify_orientation, Box4};
use fracfueter_core::frac1d::{frac_integral, power_rule_oracle, FracOrder, SingularQuadSpec, WeightFunction};
use fracfueter_core::frac_fueter::{axis_integral, op_i, BasePoint, FracOrderVec, FracSpec, WeightVector};
use fracfueter_core::fueter::{fueter_fd, kernel, FDScheme, OperatorSide};
use fracfueter_core::quaternion::{Quaternion, StructuralSet};
use fracfueter_core::testfn::Poly4;
use proptest::prelude::*;

fn quat() -> impl Strategy<Value = Quaternion> {
    prop::array::uniform4(-2.0..2.0f64).prop_map(Quaternion)
}

fn unit_quat() -> impl Strategy<Value = Quaternion> {
    quat()
        .prop_filter("non-degenerate", |q| q.norm() > 0.1)
        .prop_map(|q| q * (1.0 / q.norm()))
}

/// `{u e_k v}` is orthonormal for unit `u`, `v`.
fn rotated_set() -> impl Strategy<Value = StructuralSet> {
    (unit_quat(), unit_quat()).prop_map(|(u, v)| {
        StructuralSet::new(std::array::from_fn(|k| u * Quaternion::basis(k) * v)).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn multiplication_is_associative(p in quat(), q in quat(), r in quat()) {
        let d = (p * q) * r - p * (q * r);
        prop_assert!(d.norm() <= 1e-12 * (p.norm() * q.norm() * r.norm()).max(1.0));
    }

    #[test]
    fn conjugation_reverses_products(p in quat(), q in quat()) {
        prop_assert!(((p * q).conj() - q.conj() * p.conj()).norm() <= 1e-13 * (p.norm() * q.norm()).max(1.0));
    }

    #[test]
    fn norm_is_multiplicative(p in quat(), q in quat()) {
        let lhs = (p * q).norm();
        prop_assert!((lhs - p.norm() * q.norm()).abs() <= 1e-12 * lhs.max(1.0));
    }

    #[test]
    fn structural_coordinates_round_trip(psi in rotated_set(), q in quat()) {
        let back = psi.assemble(&psi.coords(&q));
        prop_assert!((back - q).norm() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn calibration_holds_for_rotated_sets(psi in rotated_set()) {
        let domain = Box4::new([0.0, -0.5, 1.0, 0.2], [1.0, 0.7, 1.5, 2.0]).unwrap();
        let signs = calibrate_orientation(&psi, &domain, 8).unwrap();
        prop_assert!(verify_orientation(&psi, &domain, &signs, 8).unwrap() < 1e-8);
    }

    #[test]
    fn kernel_is_left_and_right_monogenic(psi in rotated_set(), y in prop::array::uniform4(0.5..1.5f64)) {
        let fd = FDScheme::default();
        let k = |x: &[f64; 4]| kernel(&psi, &[x[0], x[1], x[2], x[3]]);
        for side in [OperatorSide::Left, OperatorSide::Right] {
            prop_assert!(fueter_fd(k, &y, &psi, side, &fd).norm() < 1e-7);
        }
    }

    #[test]
    fn fractional_integral_is_linear(
        alpha in 0.1..0.9f64,
        x in 1.1..2.0f64,
        s in -3.0..3.0f64,
        t in -3.0..3.0f64,
    ) {
        let w = WeightFunction::log(1.0, 2.0).unwrap();
        let order = FracOrder::new(alpha).unwrap();
        let quad = SingularQuadSpec::with_nodes(64);
        let f = |y: f64| y * y - 0.5;
        let g = |y: f64| (y - 1.0).sqrt();
        let both = frac_integral(|y| s * f(y) + t * g(y), &w, 1.0, x, order, &quad).unwrap();
        let apart = s * frac_integral(f, &w, 1.0, x, order, &quad).unwrap()
            + t * frac_integral(g, &w, 1.0, x, order, &quad).unwrap();
        prop_assert!((both - apart).abs() < 1e-12 * (1.0 + both.abs()));
    }

    #[test]
    fn power_rule_holds_for_random_orders(alpha in 0.05..0.95f64, p in 0u32..4, x in 0.05..1.0f64) {
        let w = WeightFunction::identity(0.0, 1.0).unwrap();
        let order = FracOrder::new(alpha).unwrap();
        let got = frac_integral(|y: f64| y.powi(p as i32), &w, 0.0, x, order, &SingularQuadSpec::with_nodes(512)).unwrap();
        let want = power_rule_oracle(p as f64, order, &w, 0.0, x);
        prop_assert!((got - want).abs() <= 1e-8 * want.abs(), "{got} vs {want}");
    }

    #[test]
    fn op_i_separates_axes(j in 0usize..4, shift in 0.05..0.3f64, seed in 0u64..1000) {
        let domain = Box4::unit();
        let spec = FracSpec {
            weights: WeightVector::identity(&domain).unwrap(),
            orders: FracOrderVec::new([0.3, 0.5, 0.6, 0.8]).unwrap(),
            quad: SingularQuadSpec::with_nodes(64),
        };
        let f = Poly4::random(seed, 2).to_field();
        let q = BasePoint::center(&domain);
        let x = [0.3, 0.4, 0.5, 0.6];
        let mut moved = x;
        moved[j] += shift;
        let change = op_i(&f, &q, &moved, &spec).unwrap() - op_i(&f, &q, &x, &spec).unwrap();
        let axis_change = axis_integral(&f, q.point(), j, moved[j], &spec).unwrap()
            - axis_integral(&f, q.point(), j, x[j], &spec).unwrap();
        prop_assert!((change - axis_change).norm() < 1e-12);
    }
}
