//! Operations behind the static demo page in `www/`: arm joint frames,
//! the simulated base path and pose interpolation.
//!
//! The plain functions are usable from Rust; the `wasm_bindgen` wrappers
//! turn errors into JavaScript exceptions.

use dqkit::dq::{DualQuaternion, I, J, K};
use dqkit::kinematics::Kinematics;
use dqkit::sim::{self, SimConfig};
use dqkit::{robots, Error};
use wasm_bindgen::prelude::*;

fn msg(e: Error) -> String {
    e.to_string()
}

/// Origins of every LWR4 link frame from the base to the effector, as a flat
/// `[x0, y0, z0, x1, ...]` list. The first point is the base.
pub fn arm_frame_points(q: &[f64]) -> Result<Vec<f64>, String> {
    let arm = robots::lwr4_kinematics().map_err(msg)?;
    if q.len() != arm.dof() {
        return Err(format!("expected {} joint values, got {}", arm.dof(), q.len()));
    }
    let mut out = Vec::with_capacity(3 * (arm.dof() + 2));
    let base = arm.reference_frame() * arm.base_frame();
    push_point(&mut out, &base)?;
    for links in 1..=arm.dof() {
        push_point(&mut out, &arm.fkm_up_to(q, links).map_err(msg)?)?;
    }
    push_point(&mut out, &arm.fkm(q).map_err(msg)?)?;
    Ok(out)
}

fn push_point(out: &mut Vec<f64>, x: &DualQuaternion) -> Result<(), String> {
    let t = x.translation().map_err(msg)?;
    out.extend_from_slice(&t.0[1..4]);
    Ok(())
}

/// Runs the shipped scene and returns `[x, y, min_clearance]` per tick,
/// flattened.
pub fn base_path(duration: f64, dt: f64) -> Result<Vec<f64>, String> {
    let scene = sim::drawing_scene().map_err(msg)?;
    let out = sim::run_simulation(&scene, &SimConfig { sampling_time: dt, total_time: duration }).map_err(msg)?;
    let mut flat = Vec::with_capacity(3 * out.base_path.len());
    for ((x, y), row) in out.base_path.iter().zip(&out.report.rows) {
        let clearance = row.clearances.iter().copied().fold(f64::INFINITY, f64::min);
        flat.extend_from_slice(&[*x, *y, clearance]);
    }
    Ok(flat)
}

/// Obstacles of the shipped scene: `[wall_nx, wall_ny, wall_offset, cx, cy, r, ...]`.
pub fn scene_obstacles() -> Result<Vec<f64>, String> {
    let scene = sim::drawing_scene().map_err(msg)?;
    let mut out = Vec::new();
    match &scene.plane {
        Some(p) => {
            let n = p.normal();
            out.extend_from_slice(&[n.0[1], n.0[2], p.offset()]);
        }
        None => out.extend_from_slice(&[0.0, 0.0, 0.0]),
    }
    for c in &scene.cylinders {
        let p = c.axis.closest_point_to_origin();
        out.extend_from_slice(&[p.0[1], p.0[2], c.radius]);
    }
    out.push(scene.disk_radius);
    Ok(out)
}

/// Pose `x^s` between the identity (`s = 0`) and the goal `x` (`s = 1`),
/// where `x` rotates by `angle` about `axis` (`"x"`, `"y"` or `"z"`) and
/// translates by `(tx, ty, tz)`. The power splits rotation and translation,
/// so the origin moves on a straight line. Returns the translation and the
/// rotation angle at `s`.
pub fn interpolate_pose(axis: &str, angle: f64, tx: f64, ty: f64, tz: f64, s: f64) -> Result<Vec<f64>, String> {
    let axis = match axis {
        "x" => I,
        "y" => J,
        "z" => K,
        other => return Err(format!("unknown axis `{other}`")),
    };
    let goal = DualQuaternion::from_rotation_translation(
        DualQuaternion::rotation_about(axis, angle),
        DualQuaternion::pure(tx, ty, tz),
    );
    let x = goal.pow(s).map_err(msg)?;
    let t = x.translation().map_err(msg)?;
    Ok(vec![t.0[1], t.0[2], t.0[3], x.rotation_angle().map_err(msg)?])
}

#[wasm_bindgen(js_name = armFramePoints)]
pub fn arm_frame_points_js(q: Vec<f64>) -> Result<Vec<f64>, JsError> {
    arm_frame_points(&q).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = basePath)]
pub fn base_path_js(duration: f64, dt: f64) -> Result<Vec<f64>, JsError> {
    base_path(duration, dt).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = sceneObstacles)]
pub fn scene_obstacles_js() -> Result<Vec<f64>, JsError> {
    scene_obstacles().map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = interpolatePose)]
pub fn interpolate_pose_js(axis: &str, angle: f64, tx: f64, ty: f64, tz: f64, s: f64) -> Result<Vec<f64>, JsError> {
    interpolate_pose(axis, angle, tx, ty, tz, s).map_err(|e| JsError::new(&e))
}
