//! Points, lines and planes encoded as dual quaternions, and the distances
//! between them.
//!
//! Point distances are squared (`point_to_point`, `point_to_line`) and the
//! point-to-plane distance is signed, matching the distance Jacobians in
//! [`crate::kinematics::distance`].

use crate::dq::{DualQuaternion, E, UNIT_TOLERANCE};
use crate::error::{Error, Result};

fn dot3(a: &DualQuaternion, b: &DualQuaternion) -> f64 {
    a.0[1] * b.0[1] + a.0[2] * b.0[2] + a.0[3] * b.0[3]
}

fn norm3(a: &DualQuaternion) -> f64 {
    dot3(a, a).sqrt()
}

fn cross3(a: &DualQuaternion, b: &DualQuaternion) -> DualQuaternion {
    let (a, b) = (&a.0, &b.0);
    DualQuaternion::pure(
        a[2] * b[3] - a[3] * b[2],
        a[3] * b[1] - a[1] * b[3],
        a[1] * b[2] - a[2] * b[1],
    )
}

fn ensure_point(p: &DualQuaternion) -> Result<()> {
    if p.is_pure_quaternion() {
        Ok(())
    } else {
        Err(Error::domain(format!("{p} is not a point (pure quaternion)")))
    }
}

/// Plane `n + E d` with unit normal `n` and signed offset `d` from the origin.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Plane(DualQuaternion);

impl Plane {
    /// Validates an existing dual quaternion as a plane.
    pub fn try_from_dq(dq: DualQuaternion) -> Result<Self> {
        let c = dq.coeffs();
        let n = dq.p();
        if c[0] != 0.0 || c[5] != 0.0 || c[6] != 0.0 || c[7] != 0.0 {
            return Err(Error::domain(format!("{dq} is not a plane")));
        }
        if (norm3(&n) - 1.0).abs() > UNIT_TOLERANCE {
            return Err(Error::domain(format!("plane normal of {dq} is not unit")));
        }
        Ok(Plane(dq))
    }

    pub fn dq(&self) -> DualQuaternion {
        self.0
    }

    pub fn normal(&self) -> DualQuaternion {
        self.0.p()
    }

    /// Signed distance from the origin along the normal.
    pub fn offset(&self) -> f64 {
        self.0 .0[4]
    }
}

/// Plücker line `l + E m` with unit direction `l` and moment `m = s x l`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Line(DualQuaternion);

impl Line {
    pub fn try_from_dq(dq: DualQuaternion) -> Result<Self> {
        if !dq.is_pure() {
            return Err(Error::domain(format!("{dq} is not a line")));
        }
        let l = dq.p();
        let m = dq.d();
        if (norm3(&l) - 1.0).abs() > UNIT_TOLERANCE {
            return Err(Error::domain(format!("line direction of {dq} is not unit")));
        }
        if dot3(&l, &m).abs() > UNIT_TOLERANCE {
            return Err(Error::domain(format!("{dq} violates the Plücker condition")));
        }
        Ok(Line(dq))
    }

    pub fn dq(&self) -> DualQuaternion {
        self.0
    }

    pub fn direction(&self) -> DualQuaternion {
        self.0.p()
    }

    pub fn moment(&self) -> DualQuaternion {
        self.0.d()
    }

    /// Point of the line closest to the origin, `l x m`.
    pub fn closest_point_to_origin(&self) -> DualQuaternion {
        cross3(&self.direction(), &self.moment())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Primitive {
    Point(DualQuaternion),
    Line(Line),
    Plane(Plane),
}

pub fn make_plane(normal: DualQuaternion, point_on_plane: DualQuaternion) -> Result<Plane> {
    ensure_point(&normal)?;
    ensure_point(&point_on_plane)?;
    let len = norm3(&normal);
    if len == 0.0 {
        return Err(Error::domain("plane normal must be nonzero"));
    }
    let n = normal / len;
    Ok(Plane(n + E * dot3(&point_on_plane, &n)))
}

pub fn make_line(direction: DualQuaternion, point_on_line: DualQuaternion) -> Result<Line> {
    ensure_point(&direction)?;
    ensure_point(&point_on_line)?;
    let len = norm3(&direction);
    if len == 0.0 {
        return Err(Error::domain("line direction must be nonzero"));
    }
    let l = direction / len;
    Ok(Line(l + E * cross3(&point_on_line, &l)))
}

/// Squared Euclidean distance between two points.
pub fn point_to_point_sqdist(p: &DualQuaternion, q: &DualQuaternion) -> Result<f64> {
    ensure_point(p)?;
    ensure_point(q)?;
    let d = *p - *q;
    Ok(dot3(&d, &d))
}

/// Signed distance `<p, n> - d`, positive on the side the normal points to.
pub fn point_to_plane_dist(p: &DualQuaternion, plane: &Plane) -> Result<f64> {
    ensure_point(p)?;
    Ok(dot3(p, &plane.normal()) - plane.offset())
}

/// Squared distance `|p x l - m|^2`.
pub fn point_to_line_sqdist(p: &DualQuaternion, line: &Line) -> Result<f64> {
    ensure_point(p)?;
    let e = cross3(p, &line.direction()) - line.moment();
    Ok(dot3(&e, &e))
}

/// Distance between the common normal's feet, or the point-to-line distance
/// when the lines are parallel.
pub fn line_to_line_dist(l1: &Line, l2: &Line) -> f64 {
    let c = cross3(&l1.direction(), &l2.direction());
    let sin = norm3(&c);
    if sin < 1e-12 {
        let s = l1.closest_point_to_origin();
        let e = cross3(&s, &l2.direction()) - l2.moment();
        return norm3(&e);
    }
    let reciprocal = dot3(&l1.direction(), &l2.moment()) + dot3(&l2.direction(), &l1.moment());
    reciprocal.abs() / sin
}

/// Expresses `prim`, given in frame `b`, in frame `a`, where `x` is the pose
/// of `b` relative to `a`.
pub fn transform_primitive(x: &DualQuaternion, prim: &Primitive) -> Result<Primitive> {
    if !x.is_unit() {
        return Err(Error::domain("transform_primitive requires a unit pose"));
    }
    let r = x.p();
    let t = x.translation()?;
    Ok(match prim {
        Primitive::Point(p) => {
            ensure_point(p)?;
            let w = t + r * *p * r.conj();
            Primitive::Point(DualQuaternion::pure(w.0[1], w.0[2], w.0[3]))
        }
        Primitive::Line(l) => {
            let lw = *x * l.dq() * x.conj();
            Primitive::Line(Line(clean_line(lw)))
        }
        Primitive::Plane(pl) => {
            let n = r * pl.normal() * r.conj();
            let n = DualQuaternion::pure(n.0[1], n.0[2], n.0[3]);
            Primitive::Plane(Plane(n + E * (pl.offset() + dot3(&t, &n))))
        }
    })
}

// Zero the round-off in the real parts so the result passes `is_pure`.
fn clean_line(mut l: DualQuaternion) -> DualQuaternion {
    l.0[0] = 0.0;
    l.0[4] = 0.0;
    l
}

pub(crate) fn vec3_dot(a: &DualQuaternion, b: &DualQuaternion) -> f64 {
    dot3(a, b)
}

pub(crate) fn vec3_cross(a: &DualQuaternion, b: &DualQuaternion) -> DualQuaternion {
    cross3(a, b)
}
