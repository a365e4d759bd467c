//! Batch simulation of a fixed arm carrying a whiteboard while a mobile
//! manipulator follows it with a pen and avoids a wall and cylindrical
//! obstacles.
//!
//! Each tick computes both references, a pseudoinverse tracking signal for
//! the arm, a constrained QP tracking signal for the mobile manipulator, and
//! integrates `q <- q + T u`.

use std::f64::consts::FRAC_PI_2;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::control::{
    damped_pseudoinverse, ClassicQpController, ControlObjective, KinematicController,
    PseudoinverseController,
};
use crate::dq::{DualQuaternion, E, J, K, ONE};
use crate::error::{check_len, Error, Result};
use crate::geometry::{self, Line, Plane};
use crate::kinematics::{self, distance, Kinematics, MobileBase, Robot, Subchain, WholeBodyChain};
use crate::robots;

/// Whiteboard thickness offset between the two effectors, in meters.
pub const BOARD_OFFSET: f64 = 0.015;
/// Pen tip within this distance of the board counts as drawing.
pub const DRAWING_DISTANCE: f64 = 0.002;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrajectoryParams {
    pub omega_n: f64,
    pub omega_d: f64,
    pub d_z: f64,
}

impl Default for TrajectoryParams {
    fn default() -> Self {
        TrajectoryParams {
            omega_n: 0.1,
            omega_d: 0.5,
            d_z: 0.1,
        }
    }
}

/// `x_m(t) = r_m(t) x_m(0) p_m(t)` and its time derivative.
pub fn compute_lwr4_reference(
    params: &TrajectoryParams,
    x0: &DualQuaternion,
    t: f64,
) -> (DualQuaternion, DualQuaternion) {
    let (sn, cn) = (params.omega_n * t).sin_cos();
    let (sd, cd) = (params.omega_d * t).sin_cos();
    let phi = FRAC_PI_2 * sn;
    let phi_dot = FRAC_PI_2 * params.omega_n * cn;
    let r = DualQuaternion::rotation_about(K, phi);
    let r_dot = K * r * (0.5 * phi_dot);
    let p = ONE + E * (0.5 * params.d_z * cd) * K;
    let p_dot = E * (-0.5 * params.d_z * params.omega_d * sd) * K;
    let x = r * *x0 * p;
    let x_dot = r_dot * *x0 * p + r * *x0 * p_dot;
    (x, x_dot)
}

/// Constant right factor `x_c j` that turns the board pose into the pen pose.
pub fn pen_offset() -> DualQuaternion {
    (ONE + E * (0.5 * BOARD_OFFSET) * K) * J
}

/// `x_mm = x_m x_c j` and its derivative.
pub fn compute_youbot_reference(
    xm: &DualQuaternion,
    xm_dot: &DualQuaternion,
) -> Result<(DualQuaternion, DualQuaternion)> {
    if !xm.is_unit() {
        return Err(Error::domain("board pose must be a unit dual quaternion"));
    }
    let c = pen_offset();
    let rate = c.haminus8() * xm_dot.vec8();
    Ok((*xm * c, DualQuaternion::from_vec(rate.as_slice())?))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Manipulator,
    MobileManipulator,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RobotEntry {
    pub role: Role,
    /// Shipped model stem (`lwr4`, `youbot`) or a path relative to the scene.
    pub model: String,
    pub q0: Vec<f64>,
    #[serde(default = "default_gain")]
    pub gain: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub damping: Option<f64>,
    /// Radius of the disk enclosing a mobile base.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub disk_radius: Option<f64>,
}

fn default_gain() -> f64 {
    10.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlaneEntry {
    pub normal: [f64; 3],
    pub point: [f64; 3],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CylinderEntry {
    pub direction: [f64; 3],
    pub point: [f64; 3],
    pub radius: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObstaclesEntry {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plane: Option<PlaneEntry>,
    #[serde(default)]
    pub cylinders: Vec<CylinderEntry>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstraintsEntry {
    /// One gain per obstacle, plane first; missing entries default to 1.
    #[serde(default)]
    pub eta_d: Vec<f64>,
    /// Added to every safe distance.
    #[serde(default)]
    pub safe_margin: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub sampling_time: f64,
    pub total_time: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            sampling_time: 0.05,
            total_time: 200.0,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.sampling_time > 0.0 && self.sampling_time.is_finite()) {
            return Err(Error::domain("sampling time must be positive"));
        }
        if !(self.total_time >= 0.0 && self.total_time.is_finite()) {
            return Err(Error::domain("total time must be finite and nonnegative"));
        }
        Ok(())
    }

    /// Rows in the report: none for a zero duration, otherwise one per
    /// sample `t = k T <= total_time`.
    pub fn tick_count(&self) -> usize {
        if self.total_time == 0.0 {
            0
        } else {
            (self.total_time / self.sampling_time + 1e-9).floor() as usize + 1
        }
    }
}

/// On-disk scene description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneFile {
    pub robots: Vec<RobotEntry>,
    #[serde(default)]
    pub obstacles: ObstaclesEntry,
    #[serde(default)]
    pub trajectory: TrajectoryParams,
    #[serde(default)]
    pub constraints: ConstraintsEntry,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simulation: Option<SimConfig>,
}

#[derive(Clone, Debug)]
pub struct Cylinder {
    pub axis: Line,
    pub radius: f64,
}

/// A validated scene ready to simulate.
#[derive(Clone, Debug)]
pub struct Scene {
    pub manipulator: Robot,
    pub manipulator_q0: Vec<f64>,
    pub manipulator_gain: f64,
    pub manipulator_damping: f64,
    pub mobile: WholeBodyChain,
    pub mobile_q0: Vec<f64>,
    pub mobile_gain: f64,
    pub mobile_damping: f64,
    pub disk_radius: f64,
    pub plane: Option<Plane>,
    pub cylinders: Vec<Cylinder>,
    pub plane_eta: f64,
    pub cylinder_eta: Vec<f64>,
    pub safe_margin: f64,
    pub trajectory: TrajectoryParams,
    pub config: Option<SimConfig>,
}

fn scene_err(source: &str, msg: impl std::fmt::Display) -> Error {
    Error::model_file(source, msg.to_string())
}

fn resolve_model(model: &str, base_dir: Option<&Path>, source: &str) -> Result<Robot> {
    if let Some(text) = robots::shipped_model(model) {
        return robots::parse_robot(text, &format!("models/{model}.toml"));
    }
    let path = match base_dir {
        Some(dir) => dir.join(model),
        None => PathBuf::from(model),
    };
    if !path.exists() {
        return Err(scene_err(source, format!("model `{model}` is neither shipped nor a file")));
    }
    robots::load_robot(path)
}

fn mobile_base(chain: &WholeBodyChain) -> Option<&MobileBase> {
    match chain.chain().next() {
        Some((Subchain::Base(b), false)) => Some(b),
        _ => None,
    }
}

fn point3(v: [f64; 3]) -> DualQuaternion {
    DualQuaternion::pure(v[0], v[1], v[2])
}

impl Scene {
    pub fn parse(text: &str, source_name: &str, base_dir: Option<&Path>) -> Result<Scene> {
        let file: SceneFile = toml::from_str(text)
            .map_err(|e| scene_err(source_name, e.to_string().trim_end()))?;
        Scene::from_file(&file, source_name, base_dir)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Scene> {
        let path = path.as_ref();
        let name = path.display().to_string();
        let text = std::fs::read_to_string(path).map_err(|e| scene_err(&name, e))?;
        Scene::parse(&text, &name, path.parent())
    }

    pub fn from_file(file: &SceneFile, source: &str, base_dir: Option<&Path>) -> Result<Scene> {
        let pick = |role: Role| -> Result<&RobotEntry> {
            let mut found = file.robots.iter().filter(|r| r.role == role);
            let entry = found
                .next()
                .ok_or_else(|| scene_err(source, format!("no robot with role {role:?}")))?;
            if found.next().is_some() {
                return Err(scene_err(source, format!("more than one robot with role {role:?}")));
            }
            Ok(entry)
        };
        let m = pick(Role::Manipulator)?;
        let y = pick(Role::MobileManipulator)?;

        let manipulator = resolve_model(&m.model, base_dir, source)?;
        let mobile = match resolve_model(&y.model, base_dir, source)? {
            Robot::WholeBody(w) => w,
            _ => return Err(scene_err(source, "the mobile manipulator must be a whole-body model")),
        };
        let base = mobile_base(&mobile).ok_or_else(|| {
            scene_err(source, "the mobile manipulator must start with a non-reversed base")
        })?;
        if m.q0.len() != manipulator.dof() {
            return Err(scene_err(
                source,
                format!("manipulator q0 has {} entries, model has {} joints", m.q0.len(), manipulator.dof()),
            ));
        }
        if y.q0.len() != mobile.dof() {
            return Err(scene_err(
                source,
                format!("mobile manipulator q0 has {} entries, model has {} joints", y.q0.len(), mobile.dof()),
            ));
        }
        let disk_radius = y.disk_radius.unwrap_or(base.diameter() / 2.0);
        if !disk_radius.is_finite() || disk_radius <= 0.0 {
            return Err(scene_err(source, "disk radius must be positive"));
        }

        let plane = match &file.obstacles.plane {
            Some(p) => Some(geometry::make_plane(point3(p.normal), point3(p.point)).map_err(|e| scene_err(source, e))?),
            None => None,
        };
        let mut cylinders = Vec::new();
        for (k, c) in file.obstacles.cylinders.iter().enumerate() {
            if !c.radius.is_finite() || c.radius <= 0.0 {
                return Err(scene_err(source, format!("cylinder {} radius must be positive", k + 1)));
            }
            let axis = geometry::make_line(point3(c.direction), point3(c.point)).map_err(|e| scene_err(source, e))?;
            cylinders.push(Cylinder {
                axis,
                radius: c.radius,
            });
        }
        let obstacle_count = usize::from(plane.is_some()) + cylinders.len();
        let eta = &file.constraints.eta_d;
        if eta.len() > obstacle_count {
            return Err(scene_err(source, "more eta_d entries than obstacles"));
        }
        if eta.iter().any(|e| !e.is_finite() || *e < 0.0) {
            return Err(scene_err(source, "eta_d must be nonnegative"));
        }
        let eta_at = |k: usize| eta.get(k).copied().unwrap_or(1.0);
        let offset = usize::from(plane.is_some());
        let t = &file.trajectory;
        if ![t.omega_n, t.omega_d, t.d_z].iter().all(|v| v.is_finite()) {
            return Err(scene_err(source, "trajectory parameters must be finite"));
        }

        Ok(Scene {
            manipulator,
            manipulator_q0: m.q0.clone(),
            manipulator_gain: m.gain,
            manipulator_damping: m.damping.unwrap_or(crate::control::DEFAULT_DAMPING),
            mobile_q0: y.q0.clone(),
            mobile_gain: y.gain,
            mobile_damping: y.damping.unwrap_or(crate::control::DEFAULT_DAMPING),
            disk_radius,
            plane_eta: eta_at(0),
            cylinder_eta: (0..cylinders.len()).map(|k| eta_at(k + offset)).collect(),
            plane,
            cylinders,
            safe_margin: file.constraints.safe_margin,
            trajectory: file.trajectory,
            config: file.simulation,
            mobile,
        })
    }

    fn base(&self) -> &MobileBase {
        mobile_base(&self.mobile).expect("validated at construction")
    }

    /// Center of the disk enclosing the mobile base, on the plane `z = 0`,
    /// and its `4 x dof` translation Jacobian.
    pub fn disk_center(&self, q: &[f64]) -> Result<(DualQuaternion, DMatrix<f64>)> {
        check_len("mobile configuration", self.mobile.dof(), q.len())?;
        let base = self.base();
        let xb = base.raw_fkm(&q[..3])?;
        let jb = base.raw_pose_jacobian(&q[..3])?;
        let t = xb.translation()?;
        let jt = kinematics::translation_jacobian(&jb, &xb)?;
        let mut full = DMatrix::zeros(4, self.mobile.dof());
        full.columns_mut(0, 3).copy_from(&jt);
        full.row_mut(3).fill(0.0);
        Ok((DualQuaternion::pure(t.0[1], t.0[2], 0.0), full))
    }

    /// Plain clearances `d - d_safe`, plane first, then each cylinder.
    pub fn clearances(&self, q: &[f64]) -> Result<Vec<f64>> {
        let (p, _) = self.disk_center(q)?;
        let mut out = Vec::new();
        if let Some(plane) = &self.plane {
            out.push(geometry::point_to_plane_dist(&p, plane)? - self.disk_radius - self.safe_margin);
        }
        for c in &self.cylinders {
            let d = geometry::point_to_line_sqdist(&p, &c.axis)?.sqrt();
            out.push(d - c.radius - self.disk_radius - self.safe_margin);
        }
        Ok(out)
    }

    /// Rows `-J_d u <= eta_d d~` for every obstacle. The plane row uses the
    /// signed distance; cylinder rows use squared distances with squared
    /// safe distances.
    pub fn compute_constraints(&self, q: &[f64]) -> Result<(DMatrix<f64>, DVector<f64>)> {
        let (p, jt) = self.disk_center(q)?;
        let rows = usize::from(self.plane.is_some()) + self.cylinders.len();
        let mut a = DMatrix::zeros(rows, self.mobile.dof());
        let mut b = DVector::zeros(rows);
        let mut k = 0;
        if let Some(plane) = &self.plane {
            let jd = distance::point_to_plane_distance_jacobian(&jt, &p, plane)?;
            let d = geometry::point_to_plane_dist(&p, plane)?;
            a.row_mut(k).copy_from(&(-jd).row(0));
            b[k] = self.plane_eta * (d - self.disk_radius - self.safe_margin);
            k += 1;
        }
        for (c, eta) in self.cylinders.iter().zip(&self.cylinder_eta) {
            let jd = distance::point_to_line_distance_jacobian(&jt, &p, &c.axis)?;
            let d2 = geometry::point_to_line_sqdist(&p, &c.axis)?;
            let safe = c.radius + self.disk_radius + self.safe_margin;
            a.row_mut(k).copy_from(&(-jd).row(0));
            b[k] = eta * (d2 - safe * safe);
            k += 1;
        }
        Ok((a, b))
    }

    pub fn obstacle_labels(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.plane.is_some() {
            out.push("dtilde_plane".to_string());
        }
        out.extend((1..=self.cylinders.len()).map(|k| format!("dtilde_cyl{k}")));
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimRow {
    pub t: f64,
    pub q_manipulator: Vec<f64>,
    pub q_mobile: Vec<f64>,
    pub err_manipulator: f64,
    pub err_mobile: f64,
    pub clearances: Vec<f64>,
    /// Pen tip expressed in the whiteboard frame.
    pub pen: [f64; 3],
}

impl SimRow {
    /// Pen tip within [`DRAWING_DISTANCE`] of the board surface.
    pub fn drawing(&self) -> bool {
        (self.pen[2] - BOARD_OFFSET).abs() <= DRAWING_DISTANCE
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimReport {
    pub header: Vec<String>,
    pub rows: Vec<SimRow>,
    /// Obstacles for the SVG view: wall trace and cylinder circles.
    pub plane: Option<Plane>,
    pub cylinders: Vec<(f64, f64, f64)>,
    pub disk_radius: f64,
}

fn header(scene: &Scene) -> Vec<String> {
    let mut h = vec!["t".to_string()];
    h.extend((1..=scene.manipulator.dof()).map(|k| format!("q_lwr4_{k}")));
    h.extend((1..=scene.mobile.dof()).map(|k| format!("q_youbot_{k}")));
    h.push("err_lwr4".into());
    h.push("err_youbot".into());
    h.extend(scene.obstacle_labels());
    h.extend(["pen_x", "pen_y", "pen_z"].map(String::from));
    h
}

impl SimReport {
    fn empty(scene: &Scene) -> Self {
        SimReport {
            header: header(scene),
            rows: Vec::new(),
            plane: scene.plane,
            cylinders: scene
                .cylinders
                .iter()
                .map(|c| {
                    let p = c.axis.closest_point_to_origin();
                    (p.0[1], p.0[2], c.radius)
                })
                .collect(),
            disk_radius: scene.disk_radius,
        }
    }

    /// Smallest clearance per obstacle over the whole run.
    pub fn min_clearances(&self) -> Vec<f64> {
        let n = self.rows.first().map_or(0, |r| r.clearances.len());
        (0..n)
            .map(|k| self.rows.iter().map(|r| r.clearances[k]).fold(f64::INFINITY, f64::min))
            .collect()
    }

    pub fn max_manipulator_error(&self) -> f64 {
        self.rows.iter().map(|r| r.err_manipulator).fold(0.0, f64::max)
    }

    pub fn max_mobile_error(&self) -> f64 {
        self.rows.iter().map(|r| r.err_mobile).fold(0.0, f64::max)
    }

    fn flatten(row: &SimRow) -> Vec<f64> {
        let mut v = vec![row.t];
        v.extend(&row.q_manipulator);
        v.extend(&row.q_mobile);
        v.push(row.err_manipulator);
        v.push(row.err_mobile);
        v.extend(&row.clearances);
        v.extend(row.pen);
        v
    }

    /// CSV text. Floats use the shortest representation that parses back to
    /// the same value.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(Self::flatten(row).iter().map(|v| v.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn emit_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(file))
    }

    /// Reads back the numeric table written by [`SimReport::write_csv`].
    pub fn read_csv_table(path: impl AsRef<Path>) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
        let mut r = csv::Reader::from_path(path)?;
        let header = r.headers()?.iter().map(String::from).collect();
        let mut rows = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            let vals = rec
                .iter()
                .map(|s| s.parse::<f64>().map_err(|e| Error::domain(format!("bad CSV number `{s}`: {e}"))))
                .collect::<Result<Vec<_>>>()?;
            rows.push(vals);
        }
        Ok((header, rows))
    }

    pub fn table(&self) -> Vec<Vec<f64>> {
        self.rows.iter().map(Self::flatten).collect()
    }

    /// Top view: wall trace, cylinder cross-sections, base path and the
    /// enclosing disk at the start and end of the run.
    pub fn svg_topview(&self, base_path: &[(f64, f64)]) -> String {
        let mut xs: Vec<f64> = vec![0.0];
        let mut ys: Vec<f64> = vec![0.0];
        for (x, y) in base_path {
            xs.push(*x);
            ys.push(*y);
        }
        for (x, y, r) in &self.cylinders {
            xs.extend([x - r, x + r]);
            ys.extend([y - r, y + r]);
        }
        let pad = self.disk_radius + 0.3;
        let min_x = xs.iter().copied().fold(f64::INFINITY, f64::min) - pad;
        let max_x = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max) + pad;
        let min_y = ys.iter().copied().fold(f64::INFINITY, f64::min) - pad;
        let max_y = ys.iter().copied().fold(f64::NEG_INFINITY, f64::max) + pad;
        let scale = 200.0;
        let width = (max_x - min_x) * scale;
        let height = (max_y - min_y) * scale;
        let px = |x: f64| (x - min_x) * scale;
        let py = |y: f64| (max_y - y) * scale;

        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.1} {height:.1}">"#
        );
        let _ = writeln!(s, r##"<rect width="100%" height="100%" fill="#fff"/>"##);
        if let Some(plane) = &self.plane {
            // trace of the plane on z = 0: n_x x + n_y y = d
            let n = plane.normal();
            let (nx, ny, d) = (n.0[1], n.0[2], plane.offset());
            let (a, b) = if nx.abs() > ny.abs() {
                ((d - ny * min_y) / nx, (d - ny * max_y) / nx)
            } else {
                (f64::NAN, f64::NAN)
            };
            let line = if a.is_finite() {
                (px(a), py(min_y), px(b), py(max_y))
            } else {
                let ya = (d - nx * min_x) / ny;
                let yb = (d - nx * max_x) / ny;
                (px(min_x), py(ya), px(max_x), py(yb))
            };
            let _ = writeln!(
                s,
                r##"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#555" stroke-width="6"/>"##,
                line.0, line.1, line.2, line.3
            );
        }
        for (x, y, r) in &self.cylinders {
            let _ = writeln!(
                s,
                r##"<circle cx="{:.2}" cy="{:.2}" r="{:.2}" fill="#999"/>"##,
                px(*x),
                py(*y),
                r * scale
            );
        }
        let _ = writeln!(
            s,
            r##"<circle cx="{:.2}" cy="{:.2}" r="6" fill="#c33"/>"##,
            px(0.0),
            py(0.0)
        );
        if !base_path.is_empty() {
            let pts: Vec<String> = base_path
                .iter()
                .map(|(x, y)| format!("{:.2},{:.2}", px(*x), py(*y)))
                .collect();
            let _ = writeln!(
                s,
                r##"<polyline points="{}" fill="none" stroke="#1565c0" stroke-width="2"/>"##,
                pts.join(" ")
            );
            for (x, y) in [base_path[0], base_path[base_path.len() - 1]] {
                let _ = writeln!(
                    s,
                    r##"<circle cx="{:.2}" cy="{:.2}" r="{:.2}" fill="none" stroke="#1565c0" stroke-dasharray="6 4"/>"##,
                    px(x),
                    py(y),
                    self.disk_radius * scale
                );
            }
        }
        s.push_str("</svg>\n");
        s
    }
}

/// Full result of a run: the report plus the base path for plotting.
#[derive(Clone, Debug)]
pub struct SimOutcome {
    pub report: SimReport,
    pub base_path: Vec<(f64, f64)>,
}

impl SimOutcome {
    pub fn emit_svg_topview(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.report.svg_topview(&self.base_path))?;
        Ok(())
    }
}

fn dq_to_dvec(x: &DualQuaternion) -> DVector<f64> {
    DVector::from_column_slice(&x.0)
}

pub fn run_simulation(scene: &Scene, config: &SimConfig) -> Result<SimOutcome> {
    config.validate()?;
    let mut report = SimReport::empty(scene);
    let mut base_path = Vec::new();
    let ticks = config.tick_count();
    if ticks == 0 {
        return Ok(SimOutcome { report, base_path });
    }

    let mut arm = PseudoinverseController::new(scene.manipulator.clone());
    arm.set_control_objective(ControlObjective::Pose);
    arm.set_gain(scene.manipulator_gain)?;
    arm.set_damping(scene.manipulator_damping)?;
    let mut mobile = ClassicQpController::new(Robot::WholeBody(scene.mobile.clone()));
    mobile.set_control_objective(ControlObjective::Pose);
    mobile.set_gain(scene.mobile_gain)?;
    mobile.set_damping(scene.mobile_damping)?;

    let x0 = scene.manipulator.fkm(&scene.manipulator_q0)?;
    let mut qm = DVector::from_column_slice(&scene.manipulator_q0);
    let mut qy = DVector::from_column_slice(&scene.mobile_q0);
    let t_step = config.sampling_time;

    for k in 0..ticks {
        let t = k as f64 * t_step;
        let (xm_d, xm_d_dot) = compute_lwr4_reference(&scene.trajectory, &x0, t);
        let (xy_d, xy_d_dot) = compute_youbot_reference(&xm_d, &xm_d_dot)?;

        let xm = scene.manipulator.fkm(qm.as_slice())?;
        let xy = scene.mobile.fkm(qy.as_slice())?;
        let pen = (xm.conj() * xy).translation()?;
        let base_xy = scene.disk_center(qy.as_slice())?.0;
        base_path.push((base_xy.0[1], base_xy.0[2]));
        report.rows.push(SimRow {
            t,
            q_manipulator: qm.iter().copied().collect(),
            q_mobile: qy.iter().copied().collect(),
            err_manipulator: (xm - xm_d).vec8().norm(),
            err_mobile: (xy - xy_d).vec8().norm(),
            clearances: scene.clearances(qy.as_slice())?,
            pen: [pen.0[1], pen.0[2], pen.0[3]],
        });
        if k + 1 == ticks {
            break;
        }

        let um = arm.compute_tracking_control_signal(qm.as_slice(), &dq_to_dvec(&xm_d), &dq_to_dvec(&xm_d_dot))?;
        let (a, b) = scene.compute_constraints(qy.as_slice())?;
        mobile.set_inequality_constraint(a, b)?;
        let uy = mobile
            .compute_tracking_control_signal(qy.as_slice(), &dq_to_dvec(&xy_d), &dq_to_dvec(&xy_d_dot))
            .map_err(|e| match e {
                Error::Infeasible(msg) => Error::Infeasible(format!("tick {k} (t = {t}): {msg}")),
                other => other,
            })?;
        qm += um * t_step;
        qy += uy * t_step;
    }
    Ok(SimOutcome { report, base_path })
}

/// Outcome of [`regulate_pose`].
#[derive(Clone, Debug, PartialEq)]
pub struct Regulation {
    pub q: Vec<f64>,
    pub iterations: usize,
    pub error_norm: f64,
    pub converged: bool,
}

/// Plain pose regulation with the undamped pseudoinverse,
/// `u = -pinv(J) gain vec8(x - xd)`, integrated with step `t_step` until the
/// error norm drops to `tolerance` or `max_iterations` is hit.
pub fn regulate_pose(
    robot: &dyn Kinematics,
    q0: &[f64],
    xd: &DualQuaternion,
    gain: f64,
    t_step: f64,
    tolerance: f64,
    max_iterations: usize,
) -> Result<Regulation> {
    check_len("initial configuration", robot.dof(), q0.len())?;
    let mut q = DVector::from_column_slice(q0);
    let mut iterations = 0;
    loop {
        let x = robot.fkm(q.as_slice())?;
        let e = (x - *xd).vec8();
        let error_norm = e.norm();
        if error_norm <= tolerance || iterations == max_iterations {
            return Ok(Regulation {
                q: q.iter().copied().collect(),
                iterations,
                error_norm,
                converged: error_norm <= tolerance,
            });
        }
        let j = robot.pose_jacobian(q.as_slice())?;
        let e = DVector::from_column_slice(e.as_slice());
        let u = -(damped_pseudoinverse(&j, 0.0)? * e * gain);
        q += u * t_step;
        iterations += 1;
    }
}

/// Mean and standard deviation, in microseconds, of one multiplication.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MulTiming {
    pub mean_us: f64,
    pub std_us: f64,
    pub sets: usize,
    pub per_set: usize,
}

/// Times `sets` passes over `pairs`; each pass multiplies every pair once.
/// Operand generation is left to the caller and is not timed.
pub fn time_multiplications(pairs: &[(DualQuaternion, DualQuaternion)], sets: usize) -> MulTiming {
    use std::hint::black_box;
    use std::time::Instant;
    let per_set = pairs.len().max(1);
    let mut samples = Vec::with_capacity(sets);
    for _ in 0..sets {
        let start = Instant::now();
        for (a, b) in pairs {
            black_box(black_box(*a) * black_box(*b));
        }
        samples.push(start.elapsed().as_secs_f64() * 1e6 / per_set as f64);
    }
    let n = samples.len().max(1) as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / n;
    MulTiming {
        mean_us: mean,
        std_us: var.sqrt(),
        sets,
        per_set,
    }
}

/// Shipped example scene.
pub const DRAWING_SCENE: &str = include_str!("../scenes/drawing.toml");

pub fn drawing_scene() -> Result<Scene> {
    Scene::parse(DRAWING_SCENE, "scenes/drawing.toml", None)
}
