//! End-to-end acceptance checks. Runs sequentially and prints one line per
//! criterion; exits nonzero if any fails.

mod common;

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::*;
use dqkit::control::{classic_qp_cost, pseudoinverse_signal, qp_solve, QpProblem};
use dqkit::dq::{DualQuaternion, E, I, J, K, ONE};
use dqkit::kinematics::Kinematics;
use dqkit::sim::{self, SimConfig};
use nalgebra::{DMatrix, DVector};
use rand::Rng;

const ALGEBRA_BUDGET: Duration = Duration::from_millis(1);
const ROTATION_TOLERANCE: f64 = 1e-15;
const UNIT_TOLERANCE: f64 = 1e-12;
const ROUND_TRIP_TOLERANCE: f64 = 0.0;

const REGULATION_GAIN: f64 = 10.0;
const REGULATION_STEP: f64 = 0.001;
const REGULATION_TOLERANCE: f64 = 1e-3;
const REGULATION_ITERATIONS: usize = 808;
const REGULATION_CAP: usize = 1_000_000;
const REGULATION_BUDGET: Duration = Duration::from_secs(10);

const JACOBIAN_BUDGET: Duration = Duration::from_secs(60);
const FKM_SAMPLES: usize = 1000;
const FKM_TOLERANCE: f64 = 1e-10;

const QP_EQUIVALENCE_CASES: usize = 1000;
const QP_EQUIVALENCE_TOLERANCE: f64 = 1e-8;
const QP_BRUTE_FORCE_CASES: usize = 1000;
const QP_BRUTE_FORCE_TOLERANCE: f64 = 1e-6;

const CAPSTONE_DURATION: f64 = 200.0;
const CAPSTONE_STEP: f64 = 0.05;
const CLEARANCE_FLOOR: f64 = -1e-3;
const SETTLE_TIME: f64 = 10.0;
const SETTLED_ERROR: f64 = 1e-2;
const CAPSTONE_BUDGET: Duration = Duration::from_secs(120);

const MUL_SETS: usize = 1000;
const MUL_PER_SET: usize = 1000;
const MUL_BUDGET_US: f64 = 1.0;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn algebra() -> Verdict {
    let start = Instant::now();
    let a = I + E * (1.0 + K);
    let b = -2.0 + J + E * (I + K);
    let sum = a + b;
    let prod = a * b;
    let elapsed = start.elapsed();
    let sum_ok = sum == (-2.0 + I + J) + E * (1.0 + I + 2.0 * K);
    let prod_ok = prod == (-2.0 * I + K) + E * (-3.0 - I - 2.0 * K);
    verdict(
        sum_ok && prod_ok && elapsed < ALGEBRA_BUDGET,
        format!("a+b = {sum}, a*b = {prod}, {elapsed:?}"),
    )
}

fn rotation_composition() -> Verdict {
    let units = I * J == K;
    let rx = DualQuaternion::rotation_about(I, PI);
    let ry = DualQuaternion::rotation_about(J, PI);
    let rz = DualQuaternion::rotation_about(K, PI);
    let err = (rx * ry).max_abs_diff(&rz);
    verdict(
        units && err <= ROTATION_TOLERANCE,
        format!("i*j == k: {units}; r_x r_y vs r_z max diff {err:e}"),
    )
}

fn pose_round_trip() -> Verdict {
    let r = (PI / 2.0).cos() + J * (PI / 2.0).sin();
    let p = 0.1 * I + 0.2 * J + 0.3 * K;
    let x = r + E * 0.5 * p * r;
    let unit = x.norm().map(|n| n.max_abs_diff(&ONE)).unwrap_or(f64::INFINITY);
    let t_err = x.translation().map(|t| t.max_abs_diff(&p)).unwrap_or(f64::INFINITY);
    let r_err = x.rotation().map(|q| q.max_abs_diff(&r)).unwrap_or(f64::INFINITY);
    verdict(
        unit <= UNIT_TOLERANCE && t_err <= ROUND_TRIP_TOLERANCE && r_err <= ROUND_TRIP_TOLERANCE,
        format!("norm drift {unit:e}, translation diff {t_err:e}, rotation diff {r_err:e}"),
    )
}

fn regulation_loop() -> Verdict {
    let start = Instant::now();
    let r = (PI / 2.0).cos() + J * (PI / 2.0).sin();
    let p = 0.1 * I + 0.2 * J + 0.3 * K;
    let xd = r + E * 0.5 * p * r;
    let q0 = [0.0, 0.3770, 0.1257, -0.5655, 0.0, 0.0, 0.0];
    let run = sim::regulate_pose(&lwr4(), &q0, &xd, REGULATION_GAIN, REGULATION_STEP, REGULATION_TOLERANCE, REGULATION_CAP);
    let elapsed = start.elapsed();
    match run {
        Ok(run) => verdict(
            run.converged && run.iterations == REGULATION_ITERATIONS && elapsed < REGULATION_BUDGET,
            format!(
                "{} iterations (frozen {REGULATION_ITERATIONS}), final error {:e}, {elapsed:?}",
                run.iterations, run.error_norm
            ),
        ),
        Err(e) => verdict(false, format!("error: {e}")),
    }
}

fn jacobian_oracle() -> Verdict {
    let start = Instant::now();
    let suites = jacobian_suites(FD_SAMPLES);
    let elapsed = start.elapsed();
    let worst = suites.iter().map(|s| s.worst).fold(0.0, f64::max);
    let failing: Vec<&str> = suites
        .iter()
        .filter(|s| s.worst > FD_TOLERANCE || s.samples < FD_SAMPLES)
        .map(|s| s.name)
        .collect();
    verdict(
        failing.is_empty() && elapsed < JACOBIAN_BUDGET,
        format!("{} suites, worst {worst:e}, failing {failing:?}, {elapsed:?}", suites.len()),
    )
}

fn fkm_oracle() -> Verdict {
    let mut r = rng(900);
    let arm = lwr4();
    let yb = youbot();
    let mut worst: f64 = 0.0;
    for _ in 0..FKM_SAMPLES {
        let q: Vec<f64> = (0..7).map(|_| r.gen_range(-PI..PI)).collect();
        let d = (dq_to_htm(&arm.fkm(&q).unwrap()) - htm_serial(&arm, &q)).amax();
        worst = worst.max(d);
        let q: Vec<f64> = (0..8).map(|_| r.gen_range(-PI..PI)).collect();
        let d = (dq_to_htm(&yb.fkm(&q).unwrap()) - htm_youbot(&q)).amax();
        worst = worst.max(d);
    }
    verdict(worst <= FKM_TOLERANCE, format!("{FKM_SAMPLES} configurations per robot, worst {worst:e}"))
}

fn qp_equivalence() -> Verdict {
    let mut r = rng(901);
    let mut worst_eq: f64 = 0.0;
    for _ in 0..QP_EQUIVALENCE_CASES {
        let m = r.gen_range(1..=8);
        let n = r.gen_range(1..=8);
        let j = DMatrix::from_fn(m, n, |_, _| r.gen_range(-1.0..1.0));
        let e = DVector::from_fn(m, |_, _| r.gen_range(-1.0..1.0));
        let xd_dot = DVector::from_fn(m, |_, _| r.gen_range(-1.0..1.0));
        let gain = r.gen_range(0.1..20.0);
        let damping = r.gen_range(0.01..1.0);
        let (h, f) = classic_qp_cost(&j, &e, &xd_dot, gain, damping).unwrap();
        let u_qp = qp_solve(&QpProblem::unconstrained(h, f)).unwrap().u;
        let u_pinv = pseudoinverse_signal(&j, &e, &xd_dot, gain, damping).unwrap();
        worst_eq = worst_eq.max((u_qp - u_pinv).amax());
    }
    let mut worst_bf: f64 = 0.0;
    let mut mismatched = 0;
    for _ in 0..QP_BRUTE_FORCE_CASES {
        let p = random_small_qp(&mut r);
        match (qp_solve(&p), brute_force_qp(&p)) {
            (Ok(s), Some(u)) => worst_bf = worst_bf.max((s.u - u).amax()),
            _ => mismatched += 1,
        }
    }
    verdict(
        worst_eq <= QP_EQUIVALENCE_TOLERANCE && worst_bf <= QP_BRUTE_FORCE_TOLERANCE && mismatched == 0,
        format!("pseudoinverse gap {worst_eq:e}, brute-force gap {worst_bf:e}, mismatched {mismatched}"),
    )
}

fn capstone() -> Verdict {
    let start = Instant::now();
    let scene = match sim::drawing_scene() {
        Ok(s) => s,
        Err(e) => return verdict(false, format!("scene: {e}")),
    };
    let cfg = SimConfig {
        sampling_time: CAPSTONE_STEP,
        total_time: CAPSTONE_DURATION,
    };
    let out = match sim::run_simulation(&scene, &cfg) {
        Ok(o) => o,
        Err(e) => return verdict(false, format!("run failed: {e}")),
    };
    let elapsed = start.elapsed();
    let rows = &out.report.rows;
    let complete = rows.len() == cfg.tick_count() && rows.last().map(|r| r.t) == Some(CAPSTONE_DURATION);
    let finite = out.report.table().iter().flatten().all(|v| v.is_finite());
    let clearances = out.report.min_clearances();
    let clear = clearances.len() == 3 && clearances.iter().all(|c| *c >= CLEARANCE_FLOOR);
    let settled = rows
        .iter()
        .filter(|r| r.t >= SETTLE_TIME)
        .map(|r| r.err_manipulator)
        .fold(0.0, f64::max);
    verdict(
        complete && finite && clear && settled <= SETTLED_ERROR && elapsed < CAPSTONE_BUDGET,
        format!(
            "{} rows, min clearances {clearances:?}, arm error after {SETTLE_TIME} s {settled:e}, {elapsed:?}",
            rows.len()
        ),
    )
}

fn multiplication_speed() -> Verdict {
    let mut r = rng(902);
    let pairs: Vec<(DualQuaternion, DualQuaternion)> =
        (0..MUL_PER_SET).map(|_| (random_dq(&mut r), random_dq(&mut r))).collect();
    let t = sim::time_multiplications(&pairs, MUL_SETS);
    verdict(
        t.mean_us <= MUL_BUDGET_US,
        format!("{} x {} products, mean {:.4} us, std {:.4} us", t.sets, t.per_set, t.mean_us, t.std_us),
    )
}

type Criterion = (&'static str, fn() -> Verdict);

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("algebra ground truth", algebra),
        ("rotation composition", rotation_composition),
        ("pose round trip", pose_round_trip),
        ("pseudoinverse loop regression", regulation_loop),
        ("jacobian oracle suite", jacobian_oracle),
        ("fkm oracle", fkm_oracle),
        ("qp equivalence", qp_equivalence),
        ("capstone simulation", capstone),
        ("multiplication speed", multiplication_speed),
    ];
    let mut failures = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let v = check();
        if !v.pass {
            failures += 1;
        }
        println!("criterion {}: {} {name}: {}", k + 1, if v.pass { "PASS" } else { "FAIL" }, v.detail);
    }
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failures} criteria failed");
        ExitCode::FAILURE
    }
}
