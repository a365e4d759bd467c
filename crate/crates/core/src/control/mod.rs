//! Differential-kinematics controllers.
//!
//! A [`ControllerState`] holds what every controller needs (chain, gains,
//! objective, attached primitive, stability tracking). The concrete
//! controllers deref to it, so setters are shared:
//!
//! ```
//! use dqkit::control::{ControlObjective, PseudoinverseController};
//! use dqkit::robots;
//!
//! let mut c = PseudoinverseController::new(robots::lwr4_kinematics().unwrap().into());
//! c.set_gain(10.0).unwrap();
//! c.set_control_objective(ControlObjective::Pose);
//! assert!(c.is_set());
//! ```

pub mod qp;

use std::ops::{Deref, DerefMut};

use nalgebra::{DMatrix, DVector};

use crate::dq::{DualQuaternion, K, ONE};
use crate::error::{check_len, Error, Result};
use crate::geometry::{self, Line, Plane, Primitive};
use crate::kinematics::{self, distance, Kinematics, Robot};

pub use qp::{solve as qp_solve, QpProblem, QpSolution};

pub const DEFAULT_DAMPING: f64 = 0.01;
pub const DEFAULT_STABILITY_THRESHOLD: f64 = 1e-4;
/// Consecutive sub-threshold updates needed to report stability.
pub const STABLE_UPDATES: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ControlObjective {
    /// Squared distance from the effector point to a target point or line.
    Distance,
    /// Signed distance from the effector point to a target plane.
    DistanceToPlane,
    Line,
    Plane,
    Pose,
    Rotation,
    Translation,
}

impl ControlObjective {
    pub fn task_dimension(self) -> usize {
        match self {
            ControlObjective::Pose | ControlObjective::Line | ControlObjective::Plane => 8,
            ControlObjective::Rotation | ControlObjective::Translation => 4,
            ControlObjective::Distance | ControlObjective::DistanceToPlane => 1,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ControllerState {
    robot: Robot,
    gain: f64,
    damping: f64,
    objective: Option<ControlObjective>,
    primitive: DualQuaternion,
    target: Option<Primitive>,
    stability_threshold: f64,
    stable_counter: usize,
    last_error_norm: Option<f64>,
}

impl ControllerState {
    pub fn new(robot: Robot) -> Self {
        ControllerState {
            robot,
            gain: 1.0,
            damping: DEFAULT_DAMPING,
            objective: None,
            primitive: ONE,
            target: None,
            stability_threshold: DEFAULT_STABILITY_THRESHOLD,
            stable_counter: 0,
            last_error_norm: None,
        }
    }

    pub fn robot(&self) -> &Robot {
        &self.robot
    }

    pub fn robot_mut(&mut self) -> &mut Robot {
        &mut self.robot
    }

    pub fn gain(&self) -> f64 {
        self.gain
    }

    pub fn set_gain(&mut self, gain: f64) -> Result<()> {
        if !(gain > 0.0 && gain.is_finite()) {
            return Err(Error::domain("gain must be positive"));
        }
        self.gain = gain;
        Ok(())
    }

    pub fn damping(&self) -> f64 {
        self.damping
    }

    pub fn set_damping(&mut self, damping: f64) -> Result<()> {
        if !(damping >= 0.0 && damping.is_finite()) {
            return Err(Error::domain("damping must be nonnegative"));
        }
        self.damping = damping;
        Ok(())
    }

    pub fn control_objective(&self) -> Option<ControlObjective> {
        self.objective
    }

    pub fn set_control_objective(&mut self, objective: ControlObjective) {
        self.objective = Some(objective);
        self.reset_stability();
    }

    pub fn is_set(&self) -> bool {
        self.objective.is_some()
    }

    /// Primitive rigidly attached to the effector: a pose offset for the
    /// Pose objective, a line or plane for the Line and Plane objectives, a
    /// point for the distance objectives. The identity means "none".
    pub fn set_primitive_to_effector(&mut self, primitive: DualQuaternion) {
        self.primitive = primitive;
    }

    pub fn primitive(&self) -> DualQuaternion {
        self.primitive
    }

    /// Workspace primitive for the distance objectives.
    pub fn set_target_primitive(&mut self, target: Primitive) {
        self.target = Some(target);
    }

    pub fn target_primitive(&self) -> Option<&Primitive> {
        self.target.as_ref()
    }

    pub fn set_stability_threshold(&mut self, threshold: f64) -> Result<()> {
        if !(threshold >= 0.0 && threshold.is_finite()) {
            return Err(Error::domain("stability threshold must be nonnegative"));
        }
        self.stability_threshold = threshold;
        Ok(())
    }

    pub fn stability_threshold(&self) -> f64 {
        self.stability_threshold
    }

    pub fn reset_stability(&mut self) {
        self.stable_counter = 0;
        self.last_error_norm = None;
    }

    /// Records one task error and reports whether the error norm changed by
    /// less than the threshold for the last [`STABLE_UPDATES`] updates. The
    /// first update after a reset only seeds the history.
    pub fn verify_stability(&mut self, error: &DVector<f64>) -> bool {
        let norm = error.norm();
        if let Some(last) = self.last_error_norm {
            if (norm - last).abs() < self.stability_threshold {
                self.stable_counter += 1;
            } else {
                self.stable_counter = 0;
            }
        }
        self.last_error_norm = Some(norm);
        self.system_reached_stable_region()
    }

    pub fn system_reached_stable_region(&self) -> bool {
        self.stable_counter >= STABLE_UPDATES
    }

    fn objective_or_err(&self) -> Result<ControlObjective> {
        self.objective.ok_or(Error::NotSet("control objective"))
    }

    fn attached_line(&self) -> Result<Line> {
        if self.primitive == ONE {
            geometry::make_line(K, DualQuaternion::default())
        } else {
            Line::try_from_dq(self.primitive)
        }
    }

    fn attached_plane(&self) -> Result<Plane> {
        if self.primitive == ONE {
            geometry::make_plane(K, DualQuaternion::default())
        } else {
            Plane::try_from_dq(self.primitive)
        }
    }

    /// Effector point: the attached point expressed in the workspace, or the
    /// effector origin when nothing is attached.
    fn effector_point(&self, x: &DualQuaternion) -> Result<DualQuaternion> {
        if self.primitive == ONE {
            x.translation()
        } else {
            match geometry::transform_primitive(x, &Primitive::Point(self.primitive))? {
                Primitive::Point(p) => Ok(p),
                _ => unreachable!(),
            }
        }
    }

    /// Translation Jacobian of the effector point.
    fn effector_point_jacobian(&self, j: &DMatrix<f64>, x: &DualQuaternion) -> Result<DMatrix<f64>> {
        if self.primitive == ONE {
            kinematics::translation_jacobian(j, x)
        } else {
            let offset = DualQuaternion::from_translation(self.primitive);
            let shifted = DMatrix::from_column_slice(8, 8, offset.haminus8().as_slice()) * j;
            kinematics::translation_jacobian(&shifted, &(*x * offset))
        }
    }

    pub fn task_variable(&self, q: &[f64]) -> Result<DVector<f64>> {
        let objective = self.objective_or_err()?;
        let x = self.robot.fkm(q)?;
        let v = match objective {
            ControlObjective::Pose => (x * self.primitive).vec8_dyn(),
            ControlObjective::Translation => x.translation()?.vec4_dyn(),
            ControlObjective::Rotation => x.rotation()?.vec4_dyn(),
            ControlObjective::Line => {
                let l = geometry::transform_primitive(&x, &Primitive::Line(self.attached_line()?))?;
                primitive_dq(&l).vec8_dyn()
            }
            ControlObjective::Plane => {
                kinematics::plane_in_workspace(&x, &self.attached_plane()?)?.dq().vec8_dyn()
            }
            ControlObjective::Distance => {
                let p = self.effector_point(&x)?;
                let d = match self.target.as_ref().ok_or(Error::NotSet("target primitive"))? {
                    Primitive::Point(t) => geometry::point_to_point_sqdist(&p, t)?,
                    Primitive::Line(l) => geometry::point_to_line_sqdist(&p, l)?,
                    Primitive::Plane(_) => {
                        return Err(Error::domain(
                            "use the DistanceToPlane objective for plane targets",
                        ))
                    }
                };
                DVector::from_element(1, d)
            }
            ControlObjective::DistanceToPlane => {
                let plane = self.target_plane()?;
                let p = self.effector_point(&x)?;
                DVector::from_element(1, geometry::point_to_plane_dist(&p, &plane)?)
            }
        };
        Ok(v)
    }

    fn target_plane(&self) -> Result<Plane> {
        match self.target.as_ref() {
            Some(Primitive::Plane(p)) => Ok(*p),
            Some(_) => Err(Error::domain("DistanceToPlane needs a plane target")),
            None => Err(Error::NotSet("target primitive")),
        }
    }

    pub fn task_jacobian(&self, q: &[f64]) -> Result<DMatrix<f64>> {
        let objective = self.objective_or_err()?;
        let x = self.robot.fkm(q)?;
        let j = self.robot.pose_jacobian(q)?;
        match objective {
            ControlObjective::Pose => {
                if self.primitive == ONE {
                    Ok(j)
                } else {
                    Ok(DMatrix::from_column_slice(8, 8, self.primitive.haminus8().as_slice()) * j)
                }
            }
            ControlObjective::Translation => kinematics::translation_jacobian(&j, &x),
            ControlObjective::Rotation => kinematics::rotation_jacobian(&j),
            ControlObjective::Line => kinematics::line_jacobian(&j, &x, &self.attached_line()?),
            ControlObjective::Plane => kinematics::plane_jacobian(&j, &x, &self.attached_plane()?),
            ControlObjective::Distance => {
                let p = self.effector_point(&x)?;
                let jt = self.effector_point_jacobian(&j, &x)?;
                match self.target.as_ref().ok_or(Error::NotSet("target primitive"))? {
                    Primitive::Point(t) => distance::point_to_point_distance_jacobian(&jt, &p, t),
                    Primitive::Line(l) => distance::point_to_line_distance_jacobian(&jt, &p, l),
                    Primitive::Plane(_) => Err(Error::domain(
                        "use the DistanceToPlane objective for plane targets",
                    )),
                }
            }
            ControlObjective::DistanceToPlane => {
                let plane = self.target_plane()?;
                let p = self.effector_point(&x)?;
                let jt = self.effector_point_jacobian(&j, &x)?;
                distance::point_to_plane_distance_jacobian(&jt, &p, &plane)
            }
        }
    }

    fn task_error(
        &self,
        q: &[f64],
        xd: &DVector<f64>,
        xd_dot: &DVector<f64>,
    ) -> Result<(DMatrix<f64>, DVector<f64>)> {
        let objective = self.objective_or_err()?;
        check_len("robot configuration", self.robot.dof(), q.len())?;
        check_len("desired task value", objective.task_dimension(), xd.len())?;
        check_len("desired task rate", objective.task_dimension(), xd_dot.len())?;
        let x = self.task_variable(q)?;
        let j = self.task_jacobian(q)?;
        Ok((j, x - xd))
    }
}

fn primitive_dq(p: &Primitive) -> DualQuaternion {
    match p {
        Primitive::Point(p) => *p,
        Primitive::Line(l) => l.dq(),
        Primitive::Plane(p) => p.dq(),
    }
}

/// `J' (J J' + damping^2 I)^-1`, or the Moore-Penrose pseudoinverse when
/// `damping == 0`.
pub fn damped_pseudoinverse(j: &DMatrix<f64>, damping: f64) -> Result<DMatrix<f64>> {
    if damping < 0.0 || !damping.is_finite() {
        return Err(Error::domain("damping must be nonnegative"));
    }
    if damping == 0.0 {
        return j
            .clone()
            .pseudo_inverse(1e-12)
            .map_err(|e| Error::domain(format!("pseudoinverse failed: {e}")));
    }
    let m = j * j.transpose() + DMatrix::identity(j.nrows(), j.nrows()) * (damping * damping);
    let chol = m
        .cholesky()
        .ok_or_else(|| Error::domain("damped Gram matrix is not positive definite"))?;
    Ok(chol.solve(j).transpose())
}

/// Shared interface of the controllers.
pub trait KinematicController: DerefMut<Target = ControllerState> {
    fn compute_tracking_control_signal(
        &mut self,
        q: &[f64],
        xd: &DVector<f64>,
        xd_dot: &DVector<f64>,
    ) -> Result<DVector<f64>>;

    fn compute_setpoint_control_signal(&mut self, q: &[f64], xd: &DVector<f64>) -> Result<DVector<f64>> {
        let zero = DVector::zeros(xd.len());
        self.compute_tracking_control_signal(q, xd, &zero)
    }
}

/// `u = J+ (-gain (x - xd) + xd_dot)`.
#[derive(Clone, Debug)]
pub struct PseudoinverseController {
    state: ControllerState,
}

impl PseudoinverseController {
    pub fn new(robot: Robot) -> Self {
        PseudoinverseController {
            state: ControllerState::new(robot),
        }
    }
}

impl Deref for PseudoinverseController {
    type Target = ControllerState;
    fn deref(&self) -> &ControllerState {
        &self.state
    }
}

impl DerefMut for PseudoinverseController {
    fn deref_mut(&mut self) -> &mut ControllerState {
        &mut self.state
    }
}

pub fn pseudoinverse_signal(
    j: &DMatrix<f64>,
    task_error: &DVector<f64>,
    xd_dot: &DVector<f64>,
    gain: f64,
    damping: f64,
) -> Result<DVector<f64>> {
    check_len("task error", j.nrows(), task_error.len())?;
    check_len("desired task rate", j.nrows(), xd_dot.len())?;
    Ok(damped_pseudoinverse(j, damping)? * (xd_dot - task_error * gain))
}

impl KinematicController for PseudoinverseController {
    fn compute_tracking_control_signal(
        &mut self,
        q: &[f64],
        xd: &DVector<f64>,
        xd_dot: &DVector<f64>,
    ) -> Result<DVector<f64>> {
        let (j, e) = self.state.task_error(q, xd, xd_dot)?;
        let u = pseudoinverse_signal(&j, &e, xd_dot, self.state.gain, self.state.damping)?;
        self.state.verify_stability(&e);
        Ok(u)
    }
}

/// Minimizes `|J u + gain (x - xd) - xd_dot|^2 + damping^2 |u|^2` subject to
/// the registered linear constraints.
#[derive(Clone, Debug)]
pub struct ClassicQpController {
    state: ControllerState,
    inequality: Option<(DMatrix<f64>, DVector<f64>)>,
    equality: Option<(DMatrix<f64>, DVector<f64>)>,
}

impl Deref for ClassicQpController {
    type Target = ControllerState;
    fn deref(&self) -> &ControllerState {
        &self.state
    }
}

impl DerefMut for ClassicQpController {
    fn deref_mut(&mut self) -> &mut ControllerState {
        &mut self.state
    }
}

/// `H = 2 J'J + 2 damping^2 I`, `h = 2 J' (gain e - xd_dot)`.
pub fn classic_qp_cost(
    j: &DMatrix<f64>,
    task_error: &DVector<f64>,
    xd_dot: &DVector<f64>,
    gain: f64,
    damping: f64,
) -> Result<(DMatrix<f64>, DVector<f64>)> {
    check_len("task error", j.nrows(), task_error.len())?;
    check_len("desired task rate", j.nrows(), xd_dot.len())?;
    let n = j.ncols();
    let jt = j.transpose();
    let h = (&jt * j) * 2.0 + DMatrix::identity(n, n) * (2.0 * damping * damping);
    let f = jt * (task_error * gain - xd_dot) * 2.0;
    Ok((h, f))
}

impl ClassicQpController {
    pub fn new(robot: Robot) -> Self {
        ClassicQpController {
            state: ControllerState::new(robot),
            inequality: None,
            equality: None,
        }
    }

    /// Replaces the inequality block `A u <= a`.
    pub fn set_inequality_constraint(&mut self, a: DMatrix<f64>, bound: DVector<f64>) -> Result<()> {
        check_len("inequality constraint columns", self.state.robot.dof(), a.ncols())?;
        check_len("inequality constraint rows", a.nrows(), bound.len())?;
        self.inequality = Some((a, bound));
        Ok(())
    }

    /// Replaces the equality block `B u = b`.
    pub fn set_equality_constraint(&mut self, b: DMatrix<f64>, bound: DVector<f64>) -> Result<()> {
        check_len("equality constraint columns", self.state.robot.dof(), b.ncols())?;
        check_len("equality constraint rows", b.nrows(), bound.len())?;
        self.equality = Some((b, bound));
        Ok(())
    }

    pub fn clear_constraints(&mut self) {
        self.inequality = None;
        self.equality = None;
    }

    pub fn assemble_qp(&self, q: &[f64], xd: &DVector<f64>, xd_dot: &DVector<f64>) -> Result<QpProblem> {
        let (j, e) = self.state.task_error(q, xd, xd_dot)?;
        let (h, f) = classic_qp_cost(&j, &e, xd_dot, self.state.gain, self.state.damping)?;
        let mut p = QpProblem::unconstrained(h, f);
        if let Some((a, b)) = &self.inequality {
            p = p.with_inequalities(a.clone(), b.clone());
        }
        if let Some((a, b)) = &self.equality {
            p = p.with_equalities(a.clone(), b.clone());
        }
        Ok(p)
    }
}

impl KinematicController for ClassicQpController {
    fn compute_tracking_control_signal(
        &mut self,
        q: &[f64],
        xd: &DVector<f64>,
        xd_dot: &DVector<f64>,
    ) -> Result<DVector<f64>> {
        let p = self.assemble_qp(q, xd, xd_dot)?;
        let sol = qp::solve(&p)?;
        let e = self.state.task_variable(q)? - xd;
        self.state.verify_stability(&e);
        Ok(sol.u)
    }
}
