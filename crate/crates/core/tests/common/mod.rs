//! Oracles shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use dqkit::control::QpProblem;
use dqkit::dq::{DualQuaternion, I, J, K};
use dqkit::geometry::{self, Line, Plane, Primitive};
use dqkit::kinematics::{
    self, distance, CooperativeDualTaskSpace, Kinematics, Robot, SerialManipulator, Subchain,
    WholeBodyChain,
};
use dqkit::robots;
use nalgebra::{DMatrix, DVector, Matrix4};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;

pub const FD_STEP: f64 = 1e-6;
pub const FD_TOLERANCE: f64 = 1e-5;
pub const FD_SAMPLES: usize = 100;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_vec(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-scale..scale)).collect()
}

pub fn random_point(rng: &mut ChaCha8Rng, scale: f64) -> DualQuaternion {
    let v = random_vec(rng, 3, scale);
    DualQuaternion::pure(v[0], v[1], v[2])
}

pub fn random_unit(rng: &mut ChaCha8Rng) -> DualQuaternion {
    let axis = loop {
        let a = random_point(rng, 1.0);
        let n = a.vec4().norm();
        if n > 1e-3 {
            break a * (1.0 / n);
        }
    };
    let angle = rng.gen_range(-PI..PI);
    DualQuaternion::from_rotation_translation(
        DualQuaternion::rotation_about(axis, angle),
        random_point(rng, 2.0),
    )
}

pub fn random_dq(rng: &mut ChaCha8Rng) -> DualQuaternion {
    let v = random_vec(rng, 8, 2.0);
    DualQuaternion::from_vec(&v).unwrap()
}

/// Central differences of a vector-valued function.
pub fn numeric_jacobian<F>(f: F, q: &[f64], h: f64) -> DMatrix<f64>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let m = f(q).len();
    let mut jac = DMatrix::zeros(m, q.len());
    let mut qp = q.to_vec();
    for j in 0..q.len() {
        qp[j] = q[j] + h;
        let fp = f(&qp);
        qp[j] = q[j] - h;
        let fm = f(&qp);
        qp[j] = q[j];
        for i in 0..m {
            jac[(i, j)] = (fp[i] - fm[i]) / (2.0 * h);
        }
    }
    jac
}

pub fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    assert_eq!(a.shape(), b.shape());
    (a - b).amax()
}

// ---------------------------------------------------------------- robots

pub fn lwr4() -> SerialManipulator {
    robots::lwr4_kinematics().unwrap()
}

pub fn youbot() -> WholeBodyChain {
    robots::youbot_kinematics().unwrap()
}

/// Base, arm and a reversed second arm, exercising every whole-body branch.
pub fn mixed_chain() -> WholeBodyChain {
    let mut wb = youbot();
    let mut arm = lwr4();
    arm.set_base_frame(DualQuaternion::from_translation(0.1 * K)).unwrap();
    wb.add_reversed(Subchain::Serial(arm));
    wb
}

pub fn random_config(rng: &mut ChaCha8Rng, robot: &Robot) -> Vec<f64> {
    random_vec(rng, robot.dof(), PI)
}

pub fn catalog() -> Vec<Robot> {
    vec![lwr4().into(), youbot().into(), mixed_chain().into()]
}

// ---------------------------------------------------------------- HTM oracle

pub fn htm_rot_z(t: f64) -> Matrix4<f64> {
    let (s, c) = t.sin_cos();
    Matrix4::new(c, -s, 0.0, 0.0, s, c, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0)
}

pub fn htm_rot_x(t: f64) -> Matrix4<f64> {
    let (s, c) = t.sin_cos();
    Matrix4::new(1.0, 0.0, 0.0, 0.0, 0.0, c, -s, 0.0, 0.0, s, c, 0.0, 0.0, 0.0, 0.0, 1.0)
}

pub fn htm_trans(x: f64, y: f64, z: f64) -> Matrix4<f64> {
    let mut m = Matrix4::identity();
    m[(0, 3)] = x;
    m[(1, 3)] = y;
    m[(2, 3)] = z;
    m
}

pub fn htm_dh(theta: f64, d: f64, a: f64, alpha: f64) -> Matrix4<f64> {
    htm_rot_z(theta) * htm_trans(0.0, 0.0, d) * htm_trans(a, 0.0, 0.0) * htm_rot_x(alpha)
}

/// Homogeneous matrix of a unit dual quaternion `r + E (1/2) p r`.
pub fn dq_to_htm(x: &DualQuaternion) -> Matrix4<f64> {
    let c = x.coeffs();
    let (w, a, b, d) = (c[0], c[1], c[2], c[3]);
    // p = 2 D P*
    let (pw, pa, pb, pd) = (c[4], c[5], c[6], c[7]);
    let t = [
        2.0 * (-pw * a + pa * w - pb * d + pd * b),
        2.0 * (-pw * b + pa * d + pb * w - pd * a),
        2.0 * (-pw * d - pa * b + pb * a + pd * w),
    ];
    Matrix4::new(
        1.0 - 2.0 * (b * b + d * d),
        2.0 * (a * b - w * d),
        2.0 * (a * d + w * b),
        t[0],
        2.0 * (a * b + w * d),
        1.0 - 2.0 * (a * a + d * d),
        2.0 * (b * d - w * a),
        t[1],
        2.0 * (a * d - w * b),
        2.0 * (b * d + w * a),
        1.0 - 2.0 * (a * a + b * b),
        t[2],
        0.0,
        0.0,
        0.0,
        1.0,
    )
}

pub fn htm_serial(arm: &SerialManipulator, q: &[f64]) -> Matrix4<f64> {
    let dh = arm.dh();
    let mut m = dq_to_htm(&arm.reference_frame()) * dq_to_htm(&arm.base_frame());
    for (j, qj) in q.iter().enumerate() {
        m *= htm_dh(dh.theta[j] + qj, dh.d[j], dh.a[j], dh.alpha[j]);
    }
    m * dq_to_htm(&arm.effector())
}

/// YouBot chain written out with the published numbers.
pub fn htm_youbot(q: &[f64]) -> Matrix4<f64> {
    let half_pi = PI / 2.0;
    let theta = [0.0, half_pi, 0.0, half_pi, 0.0];
    let d = [0.147, 0.0, 0.0, 0.0, 0.218];
    let a = [0.0, 0.155, 0.135, 0.0, 0.0];
    let alpha = [half_pi, 0.0, 0.0, half_pi, 0.0];
    let mut m = htm_trans(q[0], q[1], 0.0) * htm_rot_z(q[2]) * htm_trans(0.22575, 0.0, 0.1441);
    for j in 0..5 {
        m *= htm_dh(theta[j] + q[3 + j], d[j], a[j], alpha[j]);
    }
    m
}

// ---------------------------------------------------------------- FD suites

/// One named suite result: worst max-abs error over all samples.
pub struct SuiteResult {
    pub name: &'static str,
    pub samples: usize,
    pub worst: f64,
}

fn pose_vec(robot: &Robot, q: &[f64]) -> Vec<f64> {
    robot.fkm(q).unwrap().coeffs().to_vec()
}

fn body_line() -> Line {
    geometry::make_line(0.3 * I + K, 0.05 * J).unwrap()
}

fn body_plane() -> Plane {
    geometry::make_plane(J + 0.2 * K, 0.02 * I).unwrap()
}

fn workspace_line(rng: &mut ChaCha8Rng) -> Line {
    geometry::make_line(random_point(rng, 1.0) + 0.1 * K, random_point(rng, 1.0)).unwrap()
}

fn workspace_plane(rng: &mut ChaCha8Rng) -> Plane {
    geometry::make_plane(random_point(rng, 1.0) + 0.1 * I, random_point(rng, 1.0)).unwrap()
}

fn line_of(x: &DualQuaternion, l: &Line) -> Line {
    match geometry::transform_primitive(x, &Primitive::Line(*l)).unwrap() {
        Primitive::Line(l) => l,
        _ => unreachable!(),
    }
}

fn run_suite<F>(name: &'static str, samples: usize, seed: u64, mut check: F) -> SuiteResult
where
    F: FnMut(&mut ChaCha8Rng, &Robot) -> f64,
{
    let mut r = rng(seed);
    let robots = catalog();
    let mut worst = 0.0f64;
    for k in 0..samples {
        let robot = &robots[k % robots.len()];
        worst = worst.max(check(&mut r, robot));
    }
    SuiteResult {
        name,
        samples,
        worst,
    }
}

pub fn jacobian_suites(samples: usize) -> Vec<SuiteResult> {
    let h = FD_STEP;
    let mut out = Vec::new();

    out.push(run_suite("pose", samples, 1, |rng, robot| {
        let q = random_config(rng, robot);
        let fd = numeric_jacobian(|q| pose_vec(robot, q), &q, h);
        max_abs_diff(&robot.pose_jacobian(&q).unwrap(), &fd)
    }));

    out.push(run_suite("rotation", samples, 2, |rng, robot| {
        let q = random_config(rng, robot);
        let fd = numeric_jacobian(|q| robot.fkm(q).unwrap().rotation().unwrap().vec4().as_slice().to_vec(), &q, h);
        let j = kinematics::rotation_jacobian(&robot.pose_jacobian(&q).unwrap()).unwrap();
        max_abs_diff(&j, &fd)
    }));

    out.push(run_suite("translation", samples, 3, |rng, robot| {
        let q = random_config(rng, robot);
        let fd = numeric_jacobian(
            |q| robot.fkm(q).unwrap().translation().unwrap().vec4().as_slice().to_vec(),
            &q,
            h,
        );
        let j = kinematics::translation_jacobian(&robot.pose_jacobian(&q).unwrap(), &robot.fkm(&q).unwrap()).unwrap();
        max_abs_diff(&j, &fd)
    }));

    out.push(run_suite("line", samples, 4, |rng, robot| {
        let q = random_config(rng, robot);
        let lb = body_line();
        let fd = numeric_jacobian(|q| line_of(&robot.fkm(q).unwrap(), &lb).dq().coeffs().to_vec(), &q, h);
        let j = kinematics::line_jacobian(&robot.pose_jacobian(&q).unwrap(), &robot.fkm(&q).unwrap(), &lb).unwrap();
        max_abs_diff(&j, &fd)
    }));

    out.push(run_suite("plane", samples, 5, |rng, robot| {
        let q = random_config(rng, robot);
        let pb = body_plane();
        let fd = numeric_jacobian(
            |q| kinematics::plane_in_workspace(&robot.fkm(q).unwrap(), &pb).unwrap().dq().coeffs().to_vec(),
            &q,
            h,
        );
        let j = kinematics::plane_jacobian(&robot.pose_jacobian(&q).unwrap(), &robot.fkm(&q).unwrap(), &pb).unwrap();
        max_abs_diff(&j, &fd)
    }));

    out.push(run_suite("point_to_point_distance", samples, 6, |rng, robot| {
        let q = random_config(rng, robot);
        let target = random_point(rng, 1.0);
        let f = |q: &[f64]| {
            let t = robot.fkm(q).unwrap().translation().unwrap();
            vec![geometry::point_to_point_sqdist(&t, &target).unwrap()]
        };
        let x = robot.fkm(&q).unwrap();
        let jt = kinematics::translation_jacobian(&robot.pose_jacobian(&q).unwrap(), &x).unwrap();
        let j = distance::point_to_point_distance_jacobian(&jt, &x.translation().unwrap(), &target).unwrap();
        max_abs_diff(&j, &numeric_jacobian(f, &q, h))
    }));

    out.push(run_suite("point_to_line_distance", samples, 7, |rng, robot| {
        let q = random_config(rng, robot);
        let line = workspace_line(rng);
        let f = |q: &[f64]| {
            let t = robot.fkm(q).unwrap().translation().unwrap();
            vec![geometry::point_to_line_sqdist(&t, &line).unwrap()]
        };
        let x = robot.fkm(&q).unwrap();
        let jt = kinematics::translation_jacobian(&robot.pose_jacobian(&q).unwrap(), &x).unwrap();
        let j = distance::point_to_line_distance_jacobian(&jt, &x.translation().unwrap(), &line).unwrap();
        max_abs_diff(&j, &numeric_jacobian(f, &q, h))
    }));

    out.push(run_suite("point_to_plane_distance", samples, 8, |rng, robot| {
        let q = random_config(rng, robot);
        let plane = workspace_plane(rng);
        let f = |q: &[f64]| {
            let t = robot.fkm(q).unwrap().translation().unwrap();
            vec![geometry::point_to_plane_dist(&t, &plane).unwrap()]
        };
        let x = robot.fkm(&q).unwrap();
        let jt = kinematics::translation_jacobian(&robot.pose_jacobian(&q).unwrap(), &x).unwrap();
        let j = distance::point_to_plane_distance_jacobian(&jt, &x.translation().unwrap(), &plane).unwrap();
        max_abs_diff(&j, &numeric_jacobian(f, &q, h))
    }));

    out.push(run_suite("line_to_point_distance", samples, 9, |rng, robot| {
        let q = random_config(rng, robot);
        let lb = body_line();
        let p = random_point(rng, 1.0);
        let f = |q: &[f64]| {
            let l = line_of(&robot.fkm(q).unwrap(), &lb);
            vec![geometry::point_to_line_sqdist(&p, &l).unwrap()]
        };
        let x = robot.fkm(&q).unwrap();
        let jl = kinematics::line_jacobian(&robot.pose_jacobian(&q).unwrap(), &x, &lb).unwrap();
        let j = distance::line_to_point_distance_jacobian(&jl, &line_of(&x, &lb), &p).unwrap();
        max_abs_diff(&j, &numeric_jacobian(f, &q, h))
    }));

    out.push(run_suite("plane_to_point_distance", samples, 10, |rng, robot| {
        let q = random_config(rng, robot);
        let pb = body_plane();
        let p = random_point(rng, 1.0);
        let f = |q: &[f64]| {
            let pl = kinematics::plane_in_workspace(&robot.fkm(q).unwrap(), &pb).unwrap();
            vec![geometry::point_to_plane_dist(&p, &pl).unwrap()]
        };
        let x = robot.fkm(&q).unwrap();
        let jp = kinematics::plane_jacobian(&robot.pose_jacobian(&q).unwrap(), &x, &pb).unwrap();
        let pw = kinematics::plane_in_workspace(&x, &pb).unwrap();
        let j = distance::plane_to_point_distance_jacobian(&jp, &pw, &p).unwrap();
        max_abs_diff(&j, &numeric_jacobian(f, &q, h))
    }));

    out.push(run_suite("line_to_line_distance", samples, 11, |rng, robot| {
        let q = random_config(rng, robot);
        let lb = body_line();
        let lw = workspace_line(rng);
        let f = |q: &[f64]| vec![geometry::line_to_line_dist(&line_of(&robot.fkm(q).unwrap(), &lb), &lw)];
        let x = robot.fkm(&q).unwrap();
        let jl = kinematics::line_jacobian(&robot.pose_jacobian(&q).unwrap(), &x, &lb).unwrap();
        let j = distance::line_to_line_distance_jacobian(&jl, &line_of(&x, &lb), &lw).unwrap();
        max_abs_diff(&j, &numeric_jacobian(f, &q, h))
    }));

    out.push(run_suite("pose_jacobian_derivative", samples, 12, |rng, robot| {
        let q = random_config(rng, robot);
        let qd = random_vec(rng, robot.dof(), 1.0);
        let shifted = |s: f64| -> DMatrix<f64> {
            let qs: Vec<f64> = q.iter().zip(&qd).map(|(a, b)| a + s * b).collect();
            robot.pose_jacobian(&qs).unwrap()
        };
        let fd = (shifted(h) - shifted(-h)) / (2.0 * h);
        max_abs_diff(&robot.pose_jacobian_derivative(&q, &qd).unwrap(), &fd)
    }));

    let coop = cooperative_pair();
    out.push(run_suite("relative_pose", samples, 13, |rng, _| {
        let q = random_vec(rng, 14, PI);
        let fd = numeric_jacobian(|q| coop.relative_pose(q).unwrap().coeffs().to_vec(), &q, h);
        max_abs_diff(&coop.relative_pose_jacobian(&q).unwrap(), &fd)
    }));

    out.push(run_suite("absolute_pose", samples, 14, |rng, _| {
        let q = random_vec(rng, 14, PI);
        let fd = numeric_jacobian(|q| coop.absolute_pose(q).unwrap().coeffs().to_vec(), &q, h);
        max_abs_diff(&coop.absolute_pose_jacobian(&q).unwrap(), &fd)
    }));

    out
}

pub fn cooperative_pair() -> CooperativeDualTaskSpace {
    let a1 = lwr4();
    let mut a2 = lwr4();
    a2.set_base_frame(DualQuaternion::from_rotation_translation(
        DualQuaternion::rotation_about(K, PI),
        DualQuaternion::pure(1.2, 0.0, 0.0),
    ))
    .unwrap();
    CooperativeDualTaskSpace::new(a1.into(), a2.into())
}

// ---------------------------------------------------------------- QP oracle

/// Random strictly convex QP with at most three variables and a known
/// feasible point.
pub fn random_small_qp(rng: &mut ChaCha8Rng) -> QpProblem {
    let n = rng.gen_range(1..=3);
    let m = rng.gen_range(0..=4);
    let p = rng.gen_range(0..n.min(2) + 1).min(n - 1);
    let l = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    let h = &l * l.transpose() + DMatrix::identity(n, n) * 0.1;
    let f = DVector::from_fn(n, |_, _| rng.gen_range(-3.0..3.0));
    let u0 = DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
    let a = DMatrix::from_fn(m, n, |_, _| rng.gen_range(-1.0..1.0));
    let slack = DVector::from_fn(m, |_, _| rng.gen_range(0.0..0.5));
    let a_ub = &a * &u0 + slack;
    let b = DMatrix::from_fn(p, n, |_, _| rng.gen_range(-1.0..1.0));
    let b_eq = &b * &u0;
    QpProblem::unconstrained(h, f)
        .with_inequalities(a, a_ub)
        .with_equalities(b, b_eq)
}

/// Minimizer found by enumerating every active subset of inequalities and
/// solving the resulting KKT system.
pub fn brute_force_qp(p: &QpProblem) -> Option<DVector<f64>> {
    let n = p.dim();
    let m = p.a.nrows();
    let pe = p.b.nrows();
    let mut best: Option<(f64, DVector<f64>)> = None;
    for mask in 0u32..(1 << m) {
        let active: Vec<usize> = (0..m).filter(|i| mask & (1 << i) != 0).collect();
        let k = pe + active.len();
        let mut kkt = DMatrix::zeros(n + k, n + k);
        let mut rhs = DVector::zeros(n + k);
        kkt.view_mut((0, 0), (n, n)).copy_from(&p.h);
        rhs.rows_mut(0, n).copy_from(&(-&p.f));
        for r in 0..pe {
            for c in 0..n {
                kkt[(n + r, c)] = p.b[(r, c)];
                kkt[(c, n + r)] = p.b[(r, c)];
            }
            rhs[n + r] = p.b_eq[r];
        }
        for (s, &i) in active.iter().enumerate() {
            for c in 0..n {
                kkt[(n + pe + s, c)] = p.a[(i, c)];
                kkt[(c, n + pe + s)] = p.a[(i, c)];
            }
            rhs[n + pe + s] = p.a_ub[i];
        }
        let Some(sol) = kkt.lu().solve(&rhs) else { continue };
        let u = sol.rows(0, n).into_owned();
        if p.max_violation(&u) > 1e-9 {
            continue;
        }
        let value = p.objective(&u);
        if best.as_ref().is_none_or(|(v, _)| value < *v - 1e-12) {
            best = Some((value, u));
        }
    }
    best.map(|(_, u)| u)
}
