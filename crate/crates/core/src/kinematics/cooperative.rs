use nalgebra::DMatrix;

use crate::dq::{c8, DualQuaternion};
use crate::error::{check_len, Error, Result};

use super::{dyn4, dyn8, translation_jacobian, Kinematics, Robot};

fn ensure_unit(x: &DualQuaternion, which: &str) -> Result<()> {
    if x.is_unit() {
        Ok(())
    } else {
        Err(Error::domain(format!("{which} must be a unit dual quaternion")))
    }
}

/// `x_r = conj(x2) x1`.
pub fn relative_pose(x1: &DualQuaternion, x2: &DualQuaternion) -> Result<DualQuaternion> {
    ensure_unit(x1, "x1")?;
    ensure_unit(x2, "x2")?;
    Ok(x2.conj() * *x1)
}

/// `x_a = x2 x_r^(1/2)`.
pub fn absolute_pose(x1: &DualQuaternion, x2: &DualQuaternion) -> Result<DualQuaternion> {
    let xr = relative_pose(x1, x2)?;
    Ok(*x2 * xr.pow(0.5)?)
}

/// Jacobian of `vec8(x_r)` with respect to `(q1; q2)`.
pub fn relative_pose_jacobian(
    j1: &DMatrix<f64>,
    j2: &DMatrix<f64>,
    x1: &DualQuaternion,
    x2: &DualQuaternion,
) -> Result<DMatrix<f64>> {
    ensure_unit(x1, "x1")?;
    ensure_unit(x2, "x2")?;
    check_len("relative_pose_jacobian J1 rows", 8, j1.nrows())?;
    check_len("relative_pose_jacobian J2 rows", 8, j2.nrows())?;
    let (n1, n2) = (j1.ncols(), j2.ncols());
    let mut jr = DMatrix::zeros(8, n1 + n2);
    jr.columns_mut(0, n1)
        .copy_from(&(dyn8(&x2.conj().hamiplus8()) * j1));
    jr.columns_mut(n1, n2)
        .copy_from(&(dyn8(&(x1.haminus8() * c8())) * j2));
    Ok(jr)
}

/// Jacobian of `vec8(x_a)` with respect to `(q1; q2)`.
///
/// With `x_r = r + E (1/2) p r`, the half power is `s = r_h + E (p/4) r_h`
/// where `r_h r_h = r`. The rate of `r_h` solves
/// `(H-(r_h) + H+(r_h)) vec4(dr_h) = vec4(dr)`, regular unless `r_h` is pure.
pub fn absolute_pose_jacobian(
    j1: &DMatrix<f64>,
    j2: &DMatrix<f64>,
    x1: &DualQuaternion,
    x2: &DualQuaternion,
) -> Result<DMatrix<f64>> {
    let jr = relative_pose_jacobian(j1, j2, x1, x2)?;
    let xr = relative_pose(x1, x2)?;
    let s = xr.pow(0.5)?;
    let r_h = s.p();
    let p = xr.translation()?;
    let lhs = dyn4(&(r_h.hm4_primary() + r_h.hp4_primary()));
    let jrh = lhs
        .lu()
        .solve(&jr.rows(0, 4).into_owned())
        .ok_or_else(|| Error::domain("absolute pose Jacobian is singular at this relative pose"))?;
    let jp = translation_jacobian(&jr, &xr)?;
    let jd = (dyn4(&r_h.hm4_primary()) * jp + dyn4(&p.hp4_primary()) * &jrh) * 0.25;
    let cols = jr.ncols();
    let mut js = DMatrix::zeros(8, cols);
    js.rows_mut(0, 4).copy_from(&jrh);
    js.rows_mut(4, 4).copy_from(&jd);
    let (n1, n2) = (j1.ncols(), j2.ncols());
    let mut j2_ext = DMatrix::zeros(8, n1 + n2);
    j2_ext.columns_mut(n1, n2).copy_from(j2);
    Ok(dyn8(&s.haminus8()) * j2_ext + dyn8(&x2.hamiplus8()) * js)
}

/// Two-arm system described by its relative and absolute poses. The
/// configuration is `(q1; q2)`.
#[derive(Clone, Debug)]
pub struct CooperativeDualTaskSpace {
    pub robot1: Robot,
    pub robot2: Robot,
}

impl CooperativeDualTaskSpace {
    pub fn new(robot1: Robot, robot2: Robot) -> Self {
        CooperativeDualTaskSpace { robot1, robot2 }
    }

    fn split<'a>(&self, q: &'a [f64]) -> Result<(&'a [f64], &'a [f64])> {
        let n1 = self.robot1.dof();
        check_len("cooperative configuration", n1 + self.robot2.dof(), q.len())?;
        Ok(q.split_at(n1))
    }

    pub fn pose1(&self, q: &[f64]) -> Result<DualQuaternion> {
        let (q1, _) = self.split(q)?;
        self.robot1.fkm(q1)
    }

    pub fn pose2(&self, q: &[f64]) -> Result<DualQuaternion> {
        let (_, q2) = self.split(q)?;
        self.robot2.fkm(q2)
    }

    pub fn pose_jacobian1(&self, q: &[f64]) -> Result<DMatrix<f64>> {
        let (q1, _) = self.split(q)?;
        self.robot1.pose_jacobian(q1)
    }

    pub fn pose_jacobian2(&self, q: &[f64]) -> Result<DMatrix<f64>> {
        let (_, q2) = self.split(q)?;
        self.robot2.pose_jacobian(q2)
    }

    pub fn relative_pose(&self, q: &[f64]) -> Result<DualQuaternion> {
        relative_pose(&self.pose1(q)?, &self.pose2(q)?)
    }

    pub fn absolute_pose(&self, q: &[f64]) -> Result<DualQuaternion> {
        absolute_pose(&self.pose1(q)?, &self.pose2(q)?)
    }

    pub fn relative_pose_jacobian(&self, q: &[f64]) -> Result<DMatrix<f64>> {
        relative_pose_jacobian(
            &self.pose_jacobian1(q)?,
            &self.pose_jacobian2(q)?,
            &self.pose1(q)?,
            &self.pose2(q)?,
        )
    }

    pub fn absolute_pose_jacobian(&self, q: &[f64]) -> Result<DMatrix<f64>> {
        absolute_pose_jacobian(
            &self.pose_jacobian1(q)?,
            &self.pose_jacobian2(q)?,
            &self.pose1(q)?,
            &self.pose2(q)?,
        )
    }
}
