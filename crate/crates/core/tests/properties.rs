mod common;

use std::f64::consts::PI;

use common::*;
use dqkit::dq::{DualQuaternion, E, I, J, K, ONE};
use dqkit::geometry::{self, Primitive};
use proptest::prelude::*;

fn pure_strategy(scale: f64) -> impl Strategy<Value = DualQuaternion> {
    (-scale..scale, -scale..scale, -scale..scale).prop_map(|(x, y, z)| DualQuaternion::pure(x, y, z))
}

fn axis_strategy() -> impl Strategy<Value = DualQuaternion> {
    pure_strategy(1.0)
        .prop_filter("nonzero axis", |a| a.dot(a).0[0] > 1e-4)
        .prop_map(|a| a * (1.0 / a.dot(&a).0[0].sqrt()))
}

fn unit_strategy() -> impl Strategy<Value = DualQuaternion> {
    (axis_strategy(), -PI..PI, pure_strategy(2.0)).prop_map(|(axis, angle, p)| {
        DualQuaternion::from_rotation_translation(DualQuaternion::rotation_about(axis, angle), p)
    })
}

fn dq_strategy() -> impl Strategy<Value = DualQuaternion> {
    prop::array::uniform8(-2.0..2.0f64).prop_map(DualQuaternion)
}

fn close(a: &DualQuaternion, b: &DualQuaternion, tol: f64) -> bool {
    a.max_abs_diff(b) <= tol
}

fn cross3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn three(p: &DualQuaternion) -> [f64; 3] {
    [p.0[1], p.0[2], p.0[3]]
}

// Golden-section minimum of a convex function on [lo, hi].
fn golden_min(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    while hi - lo > 1e-10 * (1.0 + hi.abs().max(lo.abs())) {
        let a = hi - g * (hi - lo);
        let b = lo + g * (hi - lo);
        if f(a) < f(b) {
            hi = b;
        } else {
            lo = a;
        }
    }
    f(0.5 * (lo + hi))
}

// Products of unit dual quaternions stay unit; checked over a seeded bulk sample.
#[test]
fn product_of_units_is_unit() {
    let mut r = rng(300);
    let mut worst: f64 = 0.0;
    for _ in 0..10_000 {
        let a = random_unit(&mut r);
        let b = random_unit(&mut r);
        let n = (a * b).norm().unwrap();
        worst = worst.max(n.max_abs_diff(&ONE));
    }
    assert!(worst <= 1e-12, "worst unit drift {worst:e}");
}

#[test]
fn sum_matches_coefficient_addition() {
    let mut r = rng(301);
    for _ in 0..1000 {
        let a = random_dq(&mut r);
        let b = random_dq(&mut r);
        let s = a + b;
        for k in 0..8 {
            assert_eq!(s.0[k], a.0[k] + b.0[k]);
        }
        assert_eq!(a + DualQuaternion::scalar(0.0), a);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn product_matches_hamilton_matrices(a in dq_strategy(), b in dq_strategy()) {
        let left = a.hamiplus8() * b.vec8();
        let right = b.haminus8() * a.vec8();
        let ab = (a * b).vec8();
        prop_assert!((left - ab).amax() <= 1e-12);
        prop_assert!((right - ab).amax() <= 1e-12);
    }

    #[test]
    fn hamilton_operators_commute(a in dq_strategy(), b in dq_strategy()) {
        let lhs = a.hamiplus8() * b.haminus8();
        let rhs = b.haminus8() * a.hamiplus8();
        prop_assert!((lhs - rhs).amax() <= 1e-12);
    }

    #[test]
    fn conjugate_reverses_products(a in dq_strategy(), b in dq_strategy()) {
        prop_assert!(close(&(a * b).conj(), &(b.conj() * a.conj()), 1e-12));
    }

    #[test]
    fn norm_is_multiplicative(a in unit_strategy(), b in dq_strategy()) {
        prop_assume!(b.p().vec4().norm() > 0.1);
        let lhs = (a * b).norm().unwrap();
        let rhs = a.norm().unwrap() * b.norm().unwrap();
        prop_assert!(close(&lhs, &rhs, 1e-10));
    }

    #[test]
    fn vector_round_trips(a in dq_strategy()) {
        prop_assert_eq!(DualQuaternion::from_vec(a.vec8().as_slice()).unwrap(), a);
        let q = a.p();
        prop_assert_eq!(DualQuaternion::from_vec(q.vec4().as_slice()).unwrap(), q);
    }

    #[test]
    fn exp_inverts_log(x in unit_strategy()) {
        let back = x.log().unwrap().exp().unwrap();
        // log picks the short rotation, so x and -x are the same pose.
        prop_assert!(close(&back, &x, 1e-10) || close(&back, &(-x), 1e-10));
    }

    #[test]
    fn pose_decomposition_round_trips(axis in axis_strategy(), angle in 0.01..(PI - 0.01), p in pure_strategy(3.0)) {
        let r = DualQuaternion::rotation_about(axis, angle);
        let x = DualQuaternion::from_rotation_translation(r, p);
        prop_assert!(close(&x.translation().unwrap(), &p, 1e-12));
        prop_assert!(close(&x.rotation().unwrap(), &r, 1e-12));
        prop_assert!((x.rotation_angle().unwrap() - angle).abs() <= 1e-9);
        prop_assert!(close(&x.rotation_axis().unwrap(), &axis, 1e-9));
    }

    #[test]
    fn conjugate_is_inverse_for_units(x in unit_strategy()) {
        prop_assert!(close(&(x * x.conj()), &ONE, 1e-12));
    }

    #[test]
    fn square_root_of_rotation(axis in axis_strategy(), angle in -3.0..3.0f64) {
        let r = DualQuaternion::rotation_about(axis, angle);
        let h = r.pow(0.5).unwrap();
        prop_assert!(close(&(h * h), &r, 1e-12));
    }

    #[test]
    fn square_root_of_translation(p in pure_strategy(3.0)) {
        let x = DualQuaternion::from_translation(p);
        let h = x.pow(0.5).unwrap();
        prop_assert!(close(&(h * h), &x, 1e-12));
    }

    #[test]
    fn square_root_of_screw_along_axis(axis in axis_strategy(), angle in -3.0..3.0f64, s in -2.0..2.0f64) {
        let x = DualQuaternion::from_rotation_translation(DualQuaternion::rotation_about(axis, angle), axis * s);
        let h = x.pow(0.5).unwrap();
        prop_assert!(close(&(h * h), &x, 1e-12));
    }

    #[test]
    fn cross_and_dot_match_vector_algebra(a in pure_strategy(2.0), b in pure_strategy(2.0)) {
        let c = a.cross(&b);
        let expected = cross3(three(&a), three(&b));
        prop_assert!(close(&c, &DualQuaternion::from_vec3(expected), 1e-12));
        let d = a.dot(&b).0[0];
        let oracle = three(&a).iter().zip(three(&b)).map(|(x, y)| x * y).sum::<f64>();
        prop_assert!((d - oracle).abs() <= 1e-12);
    }

    #[test]
    fn adjoint_rotates_points(axis in axis_strategy(), angle in -PI..PI, p in pure_strategy(2.0)) {
        let r = DualQuaternion::rotation_about(axis, angle);
        let rotated = r.adjoint(&p).unwrap();
        // Rodrigues formula as the reference.
        let (s, c) = angle.sin_cos();
        let k = three(&axis);
        let v = three(&p);
        let kxv = cross3(k, v);
        let kv: f64 = k.iter().zip(v).map(|(a, b)| a * b).sum();
        let oracle: [f64; 3] = std::array::from_fn(|i| v[i] * c + kxv[i] * s + k[i] * kv * (1.0 - c));
        prop_assert!(close(&rotated, &DualQuaternion::from_vec3(oracle), 1e-12));
    }

    #[test]
    fn plane_offset_is_projection(n in axis_strategy(), p in pure_strategy(3.0)) {
        let plane = geometry::make_plane(n, p).unwrap();
        let d: f64 = three(&n).iter().zip(three(&p)).map(|(a, b)| a * b).sum();
        prop_assert!((plane.offset() - d).abs() <= 1e-12);
    }

    #[test]
    fn lines_satisfy_plucker_condition(dir in pure_strategy(1.0), p in pure_strategy(3.0)) {
        prop_assume!(dir.dot(&dir).0[0] > 1e-4);
        let line = geometry::make_line(dir, p).unwrap();
        prop_assert!((line.direction().dot(&line.direction()).0[0] - 1.0).abs() <= 1e-9);
        prop_assert!(line.direction().dot(&line.moment()).0[0].abs() <= 1e-9);
        prop_assert!(geometry::point_to_line_sqdist(&p, &line).unwrap() <= 1e-12);
    }

    #[test]
    fn distances_are_invariant_under_rigid_motion(
        x in unit_strategy(), p in pure_strategy(2.0), q in pure_strategy(2.0),
        dir in axis_strategy(), dir2 in axis_strategy(), n in axis_strategy(),
    ) {
        let line = geometry::make_line(dir, q).unwrap();
        let line2 = geometry::make_line(dir2, p * 0.5).unwrap();
        let plane = geometry::make_plane(n, q).unwrap();
        let moved = |prim: Primitive| geometry::transform_primitive(&x, &prim).unwrap();
        let (Primitive::Point(p1), Primitive::Point(q1)) = (moved(Primitive::Point(p)), moved(Primitive::Point(q))) else { unreachable!() };
        let Primitive::Line(l1) = moved(Primitive::Line(line)) else { unreachable!() };
        let Primitive::Line(l2) = moved(Primitive::Line(line2)) else { unreachable!() };
        let Primitive::Plane(pl1) = moved(Primitive::Plane(plane)) else { unreachable!() };
        prop_assert!((geometry::point_to_point_sqdist(&p, &q).unwrap() - geometry::point_to_point_sqdist(&p1, &q1).unwrap()).abs() <= 1e-9);
        prop_assert!((geometry::point_to_line_sqdist(&p, &line).unwrap() - geometry::point_to_line_sqdist(&p1, &l1).unwrap()).abs() <= 1e-9);
        prop_assert!((geometry::point_to_plane_dist(&p, &plane).unwrap() - geometry::point_to_plane_dist(&p1, &pl1).unwrap()).abs() <= 1e-9);
        prop_assert!((geometry::line_to_line_dist(&line, &line2) - geometry::line_to_line_dist(&l1, &l2)).abs() <= 1e-9);
    }

    #[test]
    fn point_line_distance_matches_sampled_minimum(dir in axis_strategy(), s in pure_strategy(2.0), p in pure_strategy(2.0)) {
        let line = geometry::make_line(dir, s).unwrap();
        let f = |t: f64| { let d = s + dir * t - p; d.dot(&d).0[0] };
        let best = golden_min(f, -100.0, 100.0);
        let exact = geometry::point_to_line_sqdist(&p, &line).unwrap();
        prop_assert!(exact <= best + 1e-12);
        prop_assert!(best - exact <= 1e-6);
    }
}

#[test]
fn line_to_line_distance_of_parallel_lines_is_offset() {
    let l1 = geometry::make_line(K, DualQuaternion::pure(0.0, 0.0, 0.0)).unwrap();
    let l2 = geometry::make_line(K, DualQuaternion::pure(2.0, 0.0, 5.0)).unwrap();
    assert!((geometry::line_to_line_dist(&l1, &l2) - 2.0).abs() <= 1e-12);
}

#[test]
fn skew_line_distance_matches_sampled_minimum() {
    let mut r = rng(302);
    for _ in 0..50 {
        let d1 = random_point(&mut r, 1.0);
        let d2 = random_point(&mut r, 1.0);
        let s1 = random_point(&mut r, 1.0);
        let s2 = random_point(&mut r, 1.0);
        let l1 = geometry::make_line(d1, s1).unwrap();
        let l2 = geometry::make_line(d2, s2).unwrap();
        let u1 = l1.direction();
        let u2 = l2.direction();
        // Nested searches: the squared gap is jointly convex in both line parameters.
        let gap = |a: f64, b: f64| {
            let g = s1 + u1 * a - s2 - u2 * b;
            g.dot(&g).0[0]
        };
        let best = golden_min(|a| golden_min(|b| gap(a, b), -1e3, 1e3), -1e3, 1e3).sqrt();
        let exact = geometry::line_to_line_dist(&l1, &l2);
        assert!(exact <= best + 1e-9);
        assert!(best - exact <= 1e-6, "exact {exact}, searched {best}");
    }
}

#[test]
fn plane_transform_rotates_normal() {
    let mut r = rng(303);
    for _ in 0..100 {
        let x = random_unit(&mut r);
        let plane = geometry::make_plane(random_point(&mut r, 1.0), random_point(&mut r, 1.0)).unwrap();
        let Primitive::Plane(moved) = geometry::transform_primitive(&x, &Primitive::Plane(plane)).unwrap() else {
            unreachable!()
        };
        let rotated = x.rotation().unwrap().adjoint(&plane.normal()).unwrap();
        assert!(moved.normal().max_abs_diff(&rotated) <= 1e-12);
    }
}

#[test]
fn line_translated_along_itself_is_unchanged() {
    let line = geometry::make_line(J, DualQuaternion::pure(1.0, 0.0, 0.0)).unwrap();
    let x = DualQuaternion::from_translation(J * 3.0);
    let Primitive::Line(moved) = geometry::transform_primitive(&x, &Primitive::Line(line)).unwrap() else {
        unreachable!()
    };
    assert!(moved.dq().max_abs_diff(&line.dq()) <= 1e-15);
    assert!(moved.dq().max_abs_diff(&(J + E * I.cross(&J))) <= 1e-15);
}
