use nalgebra::DMatrix;

use crate::dq::{DualQuaternion, E, I, J, K, ONE};
use crate::error::{check_len, Error, Result};

use super::Kinematics;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BaseKind {
    Holonomic,
    /// Differential drive with wheel radius and axis length in meters.
    Differential { wheel_radius: f64, axis_length: f64 },
}

/// Planar mobile base with configuration `(x, y, phi)`.
#[derive(Clone, Debug, PartialEq)]
pub struct MobileBase {
    pub name: String,
    kind: BaseKind,
    base_frame: DualQuaternion,
    frame_displacement: DualQuaternion,
    diameter: f64,
}

impl MobileBase {
    pub fn holonomic(name: impl Into<String>) -> Self {
        MobileBase {
            name: name.into(),
            kind: BaseKind::Holonomic,
            base_frame: ONE,
            frame_displacement: ONE,
            diameter: 0.0,
        }
    }

    pub fn differential(name: impl Into<String>, wheel_radius: f64, axis_length: f64) -> Result<Self> {
        if !(wheel_radius > 0.0 && axis_length > 0.0) {
            return Err(Error::domain(
                "differential drive needs positive wheel radius and axis length",
            ));
        }
        Ok(MobileBase {
            kind: BaseKind::Differential {
                wheel_radius,
                axis_length,
            },
            ..Self::holonomic(name)
        })
    }

    pub fn kind(&self) -> BaseKind {
        self.kind
    }

    pub fn frame_displacement(&self) -> DualQuaternion {
        self.frame_displacement
    }

    /// Rigid transformation from the planar base frame to the frame where the
    /// next chain is attached.
    pub fn set_frame_displacement(&mut self, x: DualQuaternion) -> Result<()> {
        if !x.is_unit() {
            return Err(Error::domain("frame displacement must be a unit dual quaternion"));
        }
        self.frame_displacement = x;
        Ok(())
    }

    pub fn base_frame(&self) -> DualQuaternion {
        self.base_frame
    }

    pub fn set_base_frame(&mut self, x: DualQuaternion) -> Result<()> {
        if !x.is_unit() {
            return Err(Error::domain("base frame must be a unit dual quaternion"));
        }
        self.base_frame = x;
        Ok(())
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    pub fn set_base_diameter(&mut self, diameter: f64) -> Result<()> {
        if !(diameter >= 0.0 && diameter.is_finite()) {
            return Err(Error::domain("base diameter must be finite and nonnegative"));
        }
        self.diameter = diameter;
        Ok(())
    }

    fn planar(q: &[f64]) -> (DualQuaternion, DualQuaternion) {
        let t = ONE + E * 0.5 * DualQuaternion::pure(q[0], q[1], 0.0);
        let r = DualQuaternion::rotation_about(K, q[2]);
        (t, r)
    }

    /// Pose of the planar base frame, without the frame displacement.
    pub fn raw_fkm(&self, q: &[f64]) -> Result<DualQuaternion> {
        check_len("base configuration", 3, q.len())?;
        let (t, r) = Self::planar(q);
        Ok(self.base_frame * t * r)
    }

    /// Pose Jacobian of [`MobileBase::raw_fkm`].
    pub fn raw_pose_jacobian(&self, q: &[f64]) -> Result<DMatrix<f64>> {
        self.jacobian_with(q, ONE)
    }

    fn jacobian_with(&self, q: &[f64], tail: DualQuaternion) -> Result<DMatrix<f64>> {
        check_len("base configuration", 3, q.len())?;
        let (t, r) = Self::planar(q);
        let cols = [
            self.base_frame * (E * 0.5 * I) * r * tail,
            self.base_frame * (E * 0.5 * J) * r * tail,
            self.base_frame * t * (K * 0.5) * r * tail,
        ];
        let mut jac = DMatrix::zeros(8, 3);
        for (c, col) in cols.iter().enumerate() {
            jac.column_mut(c).copy_from_slice(col.coeffs());
        }
        Ok(jac)
    }

    /// Maps wheel velocities `(w_right, w_left)` to `(dx, dy, dphi)`.
    pub fn constraint_jacobian(&self, phi: f64) -> Result<DMatrix<f64>> {
        match self.kind {
            BaseKind::Holonomic => Err(Error::domain(
                "constraint_jacobian is only defined for differential-drive bases",
            )),
            BaseKind::Differential {
                wheel_radius: r,
                axis_length: l,
            } => {
                let (s, c) = phi.sin_cos();
                Ok(DMatrix::from_row_slice(
                    3,
                    2,
                    &[
                        r / 2.0 * c,
                        r / 2.0 * c,
                        r / 2.0 * s,
                        r / 2.0 * s,
                        r / l,
                        -r / l,
                    ],
                ))
            }
        }
    }

    /// Pose Jacobian with respect to the wheel velocities of a differential
    /// drive, `J_pose * constraint_jacobian`.
    pub fn wheel_pose_jacobian(&self, q: &[f64]) -> Result<DMatrix<f64>> {
        check_len("base configuration", 3, q.len())?;
        Ok(self.pose_jacobian(q)? * self.constraint_jacobian(q[2])?)
    }
}

impl Kinematics for MobileBase {
    fn dof(&self) -> usize {
        3
    }

    fn fkm(&self, q: &[f64]) -> Result<DualQuaternion> {
        Ok(self.raw_fkm(q)? * self.frame_displacement)
    }

    fn pose_jacobian(&self, q: &[f64]) -> Result<DMatrix<f64>> {
        self.jacobian_with(q, self.frame_displacement)
    }

    fn pose_jacobian_derivative(&self, q: &[f64], q_dot: &[f64]) -> Result<DMatrix<f64>> {
        check_len("base configuration", 3, q.len())?;
        check_len("base velocity", 3, q_dot.len())?;
        let (t, r) = Self::planar(q);
        let f = self.base_frame;
        let tail = self.frame_displacement;
        let half_k = K * 0.5;
        let dr = half_k * r * q_dot[2];
        let dt = E * 0.5 * DualQuaternion::pure(q_dot[0], q_dot[1], 0.0);
        let cols = [
            f * (E * 0.5 * I) * dr * tail,
            f * (E * 0.5 * J) * dr * tail,
            f * (dt * half_k * r + t * half_k * dr) * tail,
        ];
        let mut jac = DMatrix::zeros(8, 3);
        for (c, col) in cols.iter().enumerate() {
            jac.column_mut(c).copy_from_slice(col.coeffs());
        }
        Ok(jac)
    }
}
