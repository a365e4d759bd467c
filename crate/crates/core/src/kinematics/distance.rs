//! Distance Jacobians between a primitive attached to the robot and a static
//! primitive in the workspace.
//!
//! Each function returns a `1 x n` row `J_d` with `d' = J_d q'`, where `d` is
//! the matching distance in [`crate::geometry`]: squared for point-to-point
//! and point-to-line, signed for point-to-plane, plain for line-to-line.

use nalgebra::DMatrix;

use crate::dq::DualQuaternion;
use crate::error::{check_len, Error, Result};
use crate::geometry::{vec3_cross, vec3_dot, Line, Plane};

use super::dyn4;

fn ensure_point(p: &DualQuaternion) -> Result<()> {
    if p.is_pure_quaternion() {
        Ok(())
    } else {
        Err(Error::domain(format!("{p} is not a point")))
    }
}

fn row(v: &DualQuaternion, j: &DMatrix<f64>) -> DMatrix<f64> {
    DMatrix::from_row_slice(1, 4, &v.0[..4]) * j
}

/// `vec4(a x l) = M(l) vec4(a)` for pure `a`.
fn cross_right(l: &DualQuaternion) -> DMatrix<f64> {
    dyn4(&((l.hm4_primary() - l.hp4_primary()) * 0.5))
}

/// `vec4(p x a) = M(p) vec4(a)` for pure `a`.
fn cross_left(p: &DualQuaternion) -> DMatrix<f64> {
    dyn4(&((p.hp4_primary() - p.hm4_primary()) * 0.5))
}

fn check_rows(context: &'static str, j: &DMatrix<f64>, rows: usize) -> Result<()> {
    check_len(context, rows, j.nrows())
}

/// Rate of `|p_r - p|^2` for the robot point `p_r`.
pub fn point_to_point_distance_jacobian(
    translation_jacobian: &DMatrix<f64>,
    robot_point: &DualQuaternion,
    workspace_point: &DualQuaternion,
) -> Result<DMatrix<f64>> {
    check_rows("translation Jacobian rows", translation_jacobian, 4)?;
    ensure_point(robot_point)?;
    ensure_point(workspace_point)?;
    Ok(row(&(*robot_point - *workspace_point), translation_jacobian) * 2.0)
}

/// Rate of `|p_r x l - m|^2`.
pub fn point_to_line_distance_jacobian(
    translation_jacobian: &DMatrix<f64>,
    robot_point: &DualQuaternion,
    workspace_line: &Line,
) -> Result<DMatrix<f64>> {
    check_rows("translation Jacobian rows", translation_jacobian, 4)?;
    ensure_point(robot_point)?;
    let l = workspace_line.direction();
    let e = vec3_cross(robot_point, &l) - workspace_line.moment();
    Ok(row(&e, &(cross_right(&l) * translation_jacobian)) * 2.0)
}

/// Rate of the signed distance `<p_r, n> - d`.
pub fn point_to_plane_distance_jacobian(
    translation_jacobian: &DMatrix<f64>,
    robot_point: &DualQuaternion,
    workspace_plane: &Plane,
) -> Result<DMatrix<f64>> {
    check_rows("translation Jacobian rows", translation_jacobian, 4)?;
    ensure_point(robot_point)?;
    Ok(row(&workspace_plane.normal(), translation_jacobian))
}

/// Rate of `|p x l_r - m_r|^2` for the robot line `l_r + E m_r`.
pub fn line_to_point_distance_jacobian(
    line_jacobian: &DMatrix<f64>,
    robot_line: &Line,
    workspace_point: &DualQuaternion,
) -> Result<DMatrix<f64>> {
    check_rows("line Jacobian rows", line_jacobian, 8)?;
    ensure_point(workspace_point)?;
    let e = vec3_cross(workspace_point, &robot_line.direction()) - robot_line.moment();
    let jl = line_jacobian.rows(0, 4).into_owned();
    let jm = line_jacobian.rows(4, 4).into_owned();
    Ok(row(&e, &(cross_left(workspace_point) * jl - jm)) * 2.0)
}

/// Rate of the signed distance `<p, n_r> - d_r` from the robot plane.
pub fn plane_to_point_distance_jacobian(
    plane_jacobian: &DMatrix<f64>,
    _robot_plane: &Plane,
    workspace_point: &DualQuaternion,
) -> Result<DMatrix<f64>> {
    check_rows("plane Jacobian rows", plane_jacobian, 8)?;
    ensure_point(workspace_point)?;
    let jn = plane_jacobian.rows(0, 4).into_owned();
    Ok(row(workspace_point, &jn) - plane_jacobian.rows(4, 1))
}

/// Rate of the plain distance between the robot line and a workspace line.
pub fn line_to_line_distance_jacobian(
    line_jacobian: &DMatrix<f64>,
    robot_line: &Line,
    workspace_line: &Line,
) -> Result<DMatrix<f64>> {
    check_rows("line Jacobian rows", line_jacobian, 8)?;
    let (l1, m1) = (robot_line.direction(), robot_line.moment());
    let (l2, m2) = (workspace_line.direction(), workspace_line.moment());
    let jl = line_jacobian.rows(0, 4).into_owned();
    let jm = line_jacobian.rows(4, 4).into_owned();
    let c = vec3_cross(&l1, &l2);
    let sin = vec3_dot(&c, &c).sqrt();
    if sin < 1e-12 {
        // parallel: plain distance from the point s1 = l1 x m1 to the workspace line
        let s1 = vec3_cross(&l1, &m1);
        let js = cross_right(&m1) * &jl + cross_left(&l1) * &jm;
        let e = vec3_cross(&s1, &l2) - m2;
        let dist = vec3_dot(&e, &e).sqrt();
        if dist < 1e-12 {
            return Err(Error::domain("distance Jacobian undefined for coincident lines"));
        }
        return Ok(row(&e, &(cross_right(&l2) * js)) / dist);
    }
    let s = vec3_dot(&l1, &m2) + vec3_dot(&l2, &m1);
    if s.abs() < 1e-12 {
        return Err(Error::domain("distance Jacobian undefined for intersecting lines"));
    }
    let ds = row(&m2, &jl) + row(&l2, &jm);
    let dc = cross_right(&l2) * &jl;
    let dsin = row(&c, &dc) / sin;
    Ok(ds * (s.signum() / sin) - dsin * (s.abs() / (sin * sin)))
}
