use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::dq::{DualQuaternion, E, I, K, ONE};
use crate::error::{check_len, Error, Result};

use super::Kinematics;

/// Standard Denavit-Hartenberg table, one entry per revolute joint.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DhParameters {
    pub theta: Vec<f64>,
    pub d: Vec<f64>,
    pub a: Vec<f64>,
    pub alpha: Vec<f64>,
}

impl DhParameters {
    pub fn new(theta: Vec<f64>, d: Vec<f64>, a: Vec<f64>, alpha: Vec<f64>) -> Result<Self> {
        let dh = DhParameters { theta, d, a, alpha };
        dh.validate()?;
        Ok(dh)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.theta.len();
        if n == 0 {
            return Err(Error::domain("DH table must have at least one joint"));
        }
        for (name, col) in [("d", &self.d), ("a", &self.a), ("alpha", &self.alpha)] {
            if col.len() != n {
                return Err(Error::domain(format!(
                    "DH column `{name}` has {} entries, expected {n}",
                    col.len()
                )));
            }
        }
        let all = self.theta.iter().chain(&self.d).chain(&self.a).chain(&self.alpha);
        if all.into_iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("DH table contains non-finite values"));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }
}

/// `r_z(theta) t_z(d) t_x(a) r_x(alpha)` for one standard DH row.
pub fn dh_joint_transform(theta: f64, d: f64, a: f64, alpha: f64) -> DualQuaternion {
    let rz = DualQuaternion::rotation_about(K, theta);
    let tz = ONE + E * (0.5 * d) * K;
    let tx = ONE + E * (0.5 * a) * I;
    let rx = DualQuaternion::rotation_about(I, alpha);
    rz * tz * tx * rx
}

/// Revolute serial chain. Joint `j` rotates about the local `z` axis with
/// angle `theta_j + q_j`.
#[derive(Clone, Debug, PartialEq)]
pub struct SerialManipulator {
    pub name: String,
    dh: DhParameters,
    reference_frame: DualQuaternion,
    base_frame: DualQuaternion,
    effector: DualQuaternion,
}

fn ensure_unit_frame(x: &DualQuaternion, what: &str) -> Result<()> {
    if x.is_unit() {
        Ok(())
    } else {
        Err(Error::domain(format!("{what} must be a unit dual quaternion")))
    }
}

impl SerialManipulator {
    pub fn new(name: impl Into<String>, dh: DhParameters) -> Result<Self> {
        dh.validate()?;
        Ok(SerialManipulator {
            name: name.into(),
            dh,
            reference_frame: ONE,
            base_frame: ONE,
            effector: ONE,
        })
    }

    pub fn dh(&self) -> &DhParameters {
        &self.dh
    }

    pub fn reference_frame(&self) -> DualQuaternion {
        self.reference_frame
    }

    pub fn base_frame(&self) -> DualQuaternion {
        self.base_frame
    }

    pub fn effector(&self) -> DualQuaternion {
        self.effector
    }

    pub fn set_reference_frame(&mut self, x: DualQuaternion) -> Result<()> {
        ensure_unit_frame(&x, "reference frame")?;
        self.reference_frame = x;
        Ok(())
    }

    pub fn set_base_frame(&mut self, x: DualQuaternion) -> Result<()> {
        ensure_unit_frame(&x, "base frame")?;
        self.base_frame = x;
        Ok(())
    }

    pub fn set_effector(&mut self, x: DualQuaternion) -> Result<()> {
        ensure_unit_frame(&x, "effector")?;
        self.effector = x;
        Ok(())
    }

    fn joint(&self, j: usize, qj: f64) -> DualQuaternion {
        dh_joint_transform(self.dh.theta[j] + qj, self.dh.d[j], self.dh.a[j], self.dh.alpha[j])
    }

    fn joints(&self, q: &[f64]) -> Result<Vec<DualQuaternion>> {
        check_len("configuration vector", self.dof(), q.len())?;
        Ok(q.iter().enumerate().map(|(j, &qj)| self.joint(j, qj)).collect())
    }

    /// Pose of the frame after the first `links` joints; the effector is
    /// applied only when `links` equals the joint count.
    pub fn fkm_up_to(&self, q: &[f64], links: usize) -> Result<DualQuaternion> {
        let joints = self.joints(q)?;
        if links > joints.len() {
            return Err(Error::domain(format!(
                "link index {links} exceeds joint count {}",
                joints.len()
            )));
        }
        let mut x = self.reference_frame * self.base_frame;
        for xj in &joints[..links] {
            x = x * *xj;
        }
        if links == joints.len() {
            x = x * self.effector;
        }
        Ok(x)
    }

    /// prefix[j] = F_r F_b x_1 ... x_j, suffix[j] = x_{j+1} ... x_n E (0-based)
    fn prefix_suffix(&self, joints: &[DualQuaternion]) -> (Vec<DualQuaternion>, Vec<DualQuaternion>) {
        let n = joints.len();
        let mut prefix = Vec::with_capacity(n + 1);
        prefix.push(self.reference_frame * self.base_frame);
        for xj in joints {
            let last = *prefix.last().unwrap();
            prefix.push(last * *xj);
        }
        let mut suffix = vec![self.effector; n + 1];
        for j in (0..n).rev() {
            suffix[j] = joints[j] * suffix[j + 1];
        }
        (prefix, suffix)
    }
}

impl Kinematics for SerialManipulator {
    fn dof(&self) -> usize {
        self.dh.len()
    }

    fn fkm(&self, q: &[f64]) -> Result<DualQuaternion> {
        self.fkm_up_to(q, self.dof())
    }

    fn pose_jacobian(&self, q: &[f64]) -> Result<DMatrix<f64>> {
        let joints = self.joints(q)?;
        let (prefix, suffix) = self.prefix_suffix(&joints);
        let half_k = K * 0.5;
        let mut jac = DMatrix::zeros(8, joints.len());
        for j in 0..joints.len() {
            // d x_j / d q_j = (k/2) x_j
            let col = prefix[j] * half_k * suffix[j];
            jac.column_mut(j).copy_from_slice(col.coeffs());
        }
        Ok(jac)
    }

    fn pose_jacobian_derivative(&self, q: &[f64], q_dot: &[f64]) -> Result<DMatrix<f64>> {
        let joints = self.joints(q)?;
        check_len("joint velocity vector", self.dof(), q_dot.len())?;
        let n = joints.len();
        let (prefix, suffix) = self.prefix_suffix(&joints);
        let half_k = K * 0.5;
        // second derivative d2x / dq_lo dq_hi for lo <= hi
        let mixed = |lo: usize, hi: usize| {
            let mid = joints[lo..hi]
                .iter()
                .fold(ONE, |acc, xj| acc * *xj);
            prefix[lo] * half_k * mid * half_k * suffix[hi]
        };
        let mut jac = DMatrix::zeros(8, n);
        for j in 0..n {
            let mut col = DualQuaternion::default();
            for (i, &qd) in q_dot.iter().enumerate() {
                if qd == 0.0 {
                    continue;
                }
                let h = if i <= j { mixed(i, j) } else { mixed(j, i) };
                col = col + h * qd;
            }
            jac.column_mut(j).copy_from_slice(col.coeffs());
        }
        Ok(jac)
    }
}
