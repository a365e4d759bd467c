//! Forward kinematics and Jacobians for serial manipulators, mobile bases,
//! whole-body chains and two-arm cooperative systems.
//!
//! Every chain implements [`Kinematics`]. Jacobians are dense `DMatrix<f64>`
//! values whose rows follow the scalar-first coefficient order of
//! [`DualQuaternion::vec8`].

mod cooperative;
pub mod distance;
mod mobile;
mod serial;
mod wholebody;

use nalgebra::{DMatrix, DVector, Matrix4};

use crate::dq::{c4, c8, DualQuaternion, Matrix8};
use crate::error::{Error, Result};
use crate::geometry::{Line, Plane};

pub use cooperative::{
    absolute_pose, absolute_pose_jacobian, relative_pose, relative_pose_jacobian,
    CooperativeDualTaskSpace,
};
pub use mobile::{BaseKind, MobileBase};
pub use serial::{dh_joint_transform, DhParameters, SerialManipulator};
pub use wholebody::{Subchain, WholeBodyChain};

/// Common interface of every kinematic chain.
pub trait Kinematics {
    fn dof(&self) -> usize;

    fn fkm(&self, q: &[f64]) -> Result<DualQuaternion>;

    /// `8 x dof` matrix with `vec8(dx/dt) = J dq/dt`.
    fn pose_jacobian(&self, q: &[f64]) -> Result<DMatrix<f64>>;

    /// Time derivative of [`Kinematics::pose_jacobian`] along `q_dot`.
    fn pose_jacobian_derivative(&self, q: &[f64], q_dot: &[f64]) -> Result<DMatrix<f64>>;
}

/// Any of the supported chain models.
#[derive(Clone, Debug, PartialEq)]
pub enum Robot {
    Serial(SerialManipulator),
    Base(MobileBase),
    WholeBody(WholeBodyChain),
}

impl Robot {
    pub fn name(&self) -> &str {
        match self {
            Robot::Serial(s) => &s.name,
            Robot::Base(b) => &b.name,
            Robot::WholeBody(w) => &w.name,
        }
    }
}

impl Kinematics for Robot {
    fn dof(&self) -> usize {
        match self {
            Robot::Serial(s) => s.dof(),
            Robot::Base(b) => b.dof(),
            Robot::WholeBody(w) => w.dof(),
        }
    }

    fn fkm(&self, q: &[f64]) -> Result<DualQuaternion> {
        match self {
            Robot::Serial(s) => s.fkm(q),
            Robot::Base(b) => b.fkm(q),
            Robot::WholeBody(w) => w.fkm(q),
        }
    }

    fn pose_jacobian(&self, q: &[f64]) -> Result<DMatrix<f64>> {
        match self {
            Robot::Serial(s) => s.pose_jacobian(q),
            Robot::Base(b) => b.pose_jacobian(q),
            Robot::WholeBody(w) => w.pose_jacobian(q),
        }
    }

    fn pose_jacobian_derivative(&self, q: &[f64], q_dot: &[f64]) -> Result<DMatrix<f64>> {
        match self {
            Robot::Serial(s) => s.pose_jacobian_derivative(q, q_dot),
            Robot::Base(b) => b.pose_jacobian_derivative(q, q_dot),
            Robot::WholeBody(w) => w.pose_jacobian_derivative(q, q_dot),
        }
    }
}

pub(crate) fn dyn8(m: &Matrix8) -> DMatrix<f64> {
    DMatrix::from_column_slice(8, 8, m.as_slice())
}

pub(crate) fn dyn4(m: &Matrix4<f64>) -> DMatrix<f64> {
    DMatrix::from_column_slice(4, 4, m.as_slice())
}

fn check_jacobian(context: &'static str, j: &DMatrix<f64>, rows: usize) -> Result<()> {
    crate::error::check_len(context, rows, j.nrows())
}

/// First four rows of a pose Jacobian.
pub fn rotation_jacobian(pose_jacobian: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    check_jacobian("rotation_jacobian rows", pose_jacobian, 8)?;
    Ok(pose_jacobian.rows(0, 4).into_owned())
}

/// Jacobian of `vec4(translation(x))`, given the pose Jacobian at `x`.
pub fn translation_jacobian(
    pose_jacobian: &DMatrix<f64>,
    x: &DualQuaternion,
) -> Result<DMatrix<f64>> {
    check_jacobian("translation_jacobian rows", pose_jacobian, 8)?;
    let jp = pose_jacobian.rows(0, 4);
    let jd = pose_jacobian.rows(4, 4);
    let p_conj = x.p().conj();
    let d = x.d();
    Ok((dyn4(&p_conj.hm4_primary()) * jd + dyn4(&(d.hp4_primary() * c4())) * jp) * 2.0)
}

/// Jacobian of the workspace line `Ad(x) line_body` for a line attached to the
/// effector.
pub fn line_jacobian(
    pose_jacobian: &DMatrix<f64>,
    x: &DualQuaternion,
    line_body: &Line,
) -> Result<DMatrix<f64>> {
    check_jacobian("line_jacobian rows", pose_jacobian, 8)?;
    let l = line_body.dq();
    let m = (l * x.conj()).haminus8() + (*x * l).hamiplus8() * c8();
    Ok(dyn8(&m) * pose_jacobian)
}

/// Workspace plane for a plane attached to the effector at pose `x`.
pub fn plane_in_workspace(x: &DualQuaternion, plane_body: &Plane) -> Result<Plane> {
    match crate::geometry::transform_primitive(x, &crate::geometry::Primitive::Plane(*plane_body))? {
        crate::geometry::Primitive::Plane(p) => Ok(p),
        _ => unreachable!(),
    }
}

/// Jacobian of the workspace plane `n_w + E d_w` for a plane attached to the
/// effector. Rows 0..4 map to `vec4(n_w)`, row 4 to `d_w`; rows 5..8 are zero.
pub fn plane_jacobian(
    pose_jacobian: &DMatrix<f64>,
    x: &DualQuaternion,
    plane_body: &Plane,
) -> Result<DMatrix<f64>> {
    check_jacobian("plane_jacobian rows", pose_jacobian, 8)?;
    if !x.is_unit() {
        return Err(Error::domain("plane_jacobian requires a unit pose"));
    }
    let n = pose_jacobian.ncols();
    let r = x.p();
    let nb = plane_body.normal();
    let jr = pose_jacobian.rows(0, 4).into_owned();
    let jn = dyn4(&((nb * r.conj()).hm4_primary() + (r * nb).hp4_primary() * c4())) * &jr;
    let jt = translation_jacobian(pose_jacobian, x)?;
    let nw = r * nb * r.conj();
    let t = x.translation()?;
    let jd = jt.transpose() * nw.vec4_dyn() + jn.transpose() * t.vec4_dyn();

    let mut out = DMatrix::zeros(8, n);
    out.rows_mut(0, 4).copy_from(&jn);
    out.row_mut(4).copy_from(&jd.transpose());
    Ok(out)
}

impl DualQuaternion {
    pub(crate) fn vec4_dyn(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.0[..4])
    }

    pub(crate) fn vec8_dyn(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.0)
    }
}

impl From<SerialManipulator> for Robot {
    fn from(s: SerialManipulator) -> Self {
        Robot::Serial(s)
    }
}

impl From<MobileBase> for Robot {
    fn from(b: MobileBase) -> Self {
        Robot::Base(b)
    }
}

impl From<WholeBodyChain> for Robot {
    fn from(w: WholeBodyChain) -> Self {
        Robot::WholeBody(w)
    }
}
