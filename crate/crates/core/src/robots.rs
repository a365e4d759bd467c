//! Robot model catalog and the TOML model-file format.
//!
//! A model file describes one chain:
//!
//! ```toml
//! name = "planar"
//! kind = "serial"            # serial | holonomic_base | differential_base | wholebody
//! effector = [1, 0, 0, 0, 0, 0, 0, 0.05]
//!
//! [dh]
//! theta = [0.0, 0.0]
//! d = [0.0, 0.0]
//! a = [0.5, 0.4]
//! alpha = [0.0, 0.0]
//! ```
//!
//! Frames are eight coefficients in scalar-first order. Whole-body models
//! list their parts under `[[children]]`, each optionally `reversed = true`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dq::DualQuaternion;
use crate::error::{Error, Result};
use crate::kinematics::{
    BaseKind, DhParameters, MobileBase, Robot, SerialManipulator, Subchain, WholeBodyChain,
};

const LWR4_MODEL: &str = include_str!("../models/lwr4.toml");
const YOUBOT_MODEL: &str = include_str!("../models/youbot.toml");
const DIFFERENTIAL_MODEL: &str = include_str!("../models/differential_base.toml");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Serial,
    HolonomicBase,
    DifferentialBase,
    Wholebody,
}

/// Textual model record, one-to-one with the file format.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelRecord {
    pub name: String,
    pub kind: ModelKind,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub reversed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_frame: Option<[f64; 8]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base_frame: Option<[f64; 8]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub effector: Option<[f64; 8]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frame_displacement: Option<[f64; 8]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wheel_radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axis_length: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diameter: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dh: Option<DhParameters>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<ModelRecord>,
}

struct Ctx<'a> {
    source: &'a str,
    path: String,
}

impl Ctx<'_> {
    fn err(&self, field: &str, message: impl std::fmt::Display) -> Error {
        let at = if self.path.is_empty() {
            format!("field `{field}`")
        } else {
            format!("field `{}.{field}`", self.path)
        };
        Error::model_file(self.source, format!("{at}: {message}"))
    }

    fn child(&self, k: usize) -> Ctx<'_> {
        let prefix = if self.path.is_empty() {
            String::new()
        } else {
            format!("{}.", self.path)
        };
        Ctx {
            source: self.source,
            path: format!("{prefix}children[{k}]"),
        }
    }

    fn frame(&self, field: &str, value: Option<[f64; 8]>) -> Result<Option<DualQuaternion>> {
        match value {
            None => Ok(None),
            Some(c) => {
                let x = DualQuaternion::new(c);
                if x.is_unit() {
                    Ok(Some(x))
                } else {
                    Err(self.err(field, "must be a unit dual quaternion"))
                }
            }
        }
    }

    fn forbid<T>(&self, field: &str, value: &Option<T>, kind: &str) -> Result<()> {
        if value.is_some() {
            Err(self.err(field, format!("not allowed for kind `{kind}`")))
        } else {
            Ok(())
        }
    }
}

fn build_serial(rec: &ModelRecord, ctx: &Ctx) -> Result<SerialManipulator> {
    ctx.forbid("frame_displacement", &rec.frame_displacement, "serial")?;
    ctx.forbid("wheel_radius", &rec.wheel_radius, "serial")?;
    ctx.forbid("axis_length", &rec.axis_length, "serial")?;
    let dh = rec.dh.clone().ok_or_else(|| ctx.err("dh", "missing DH table"))?;
    let mut arm = SerialManipulator::new(&rec.name, dh).map_err(|e| ctx.err("dh", e))?;
    if let Some(x) = ctx.frame("reference_frame", rec.reference_frame)? {
        arm.set_reference_frame(x)?;
    }
    if let Some(x) = ctx.frame("base_frame", rec.base_frame)? {
        arm.set_base_frame(x)?;
    }
    if let Some(x) = ctx.frame("effector", rec.effector)? {
        arm.set_effector(x)?;
    }
    Ok(arm)
}

fn build_base(rec: &ModelRecord, ctx: &Ctx) -> Result<MobileBase> {
    let kind = if rec.kind == ModelKind::HolonomicBase {
        "holonomic_base"
    } else {
        "differential_base"
    };
    ctx.forbid("dh", &rec.dh, kind)?;
    ctx.forbid("effector", &rec.effector, kind)?;
    ctx.forbid("reference_frame", &rec.reference_frame, kind)?;
    let mut base = match rec.kind {
        ModelKind::HolonomicBase => {
            ctx.forbid("wheel_radius", &rec.wheel_radius, kind)?;
            ctx.forbid("axis_length", &rec.axis_length, kind)?;
            MobileBase::holonomic(&rec.name)
        }
        _ => {
            let r = rec
                .wheel_radius
                .ok_or_else(|| ctx.err("wheel_radius", "missing"))?;
            let l = rec
                .axis_length
                .ok_or_else(|| ctx.err("axis_length", "missing"))?;
            MobileBase::differential(&rec.name, r, l).map_err(|e| ctx.err("wheel_radius", e))?
        }
    };
    if let Some(x) = ctx.frame("frame_displacement", rec.frame_displacement)? {
        base.set_frame_displacement(x)?;
    }
    if let Some(x) = ctx.frame("base_frame", rec.base_frame)? {
        base.set_base_frame(x)?;
    }
    if let Some(d) = rec.diameter {
        base.set_base_diameter(d).map_err(|e| ctx.err("diameter", e))?;
    }
    Ok(base)
}

fn build(rec: &ModelRecord, ctx: &Ctx, top_level: bool) -> Result<Robot> {
    if top_level && rec.reversed {
        return Err(ctx.err("reversed", "only allowed on whole-body children"));
    }
    if rec.kind != ModelKind::Wholebody && !rec.children.is_empty() {
        return Err(ctx.err("children", "only whole-body models have children"));
    }
    match rec.kind {
        ModelKind::Serial => Ok(Robot::Serial(build_serial(rec, ctx)?)),
        ModelKind::HolonomicBase | ModelKind::DifferentialBase => Ok(Robot::Base(build_base(rec, ctx)?)),
        ModelKind::Wholebody => {
            for (field, present) in [
                ("dh", rec.dh.is_some()),
                ("effector", rec.effector.is_some()),
                ("frame_displacement", rec.frame_displacement.is_some()),
                ("base_frame", rec.base_frame.is_some()),
            ] {
                if present {
                    return Err(ctx.err(field, "not allowed for kind `wholebody`"));
                }
            }
            if rec.children.is_empty() {
                return Err(ctx.err("children", "a whole-body model needs at least one child"));
            }
            let mut chain: Option<WholeBodyChain> = None;
            for (k, child) in rec.children.iter().enumerate() {
                let cctx = ctx.child(k);
                let sub = match build(child, &cctx, false)? {
                    Robot::Serial(s) => Subchain::Serial(s),
                    Robot::Base(b) => Subchain::Base(b),
                    Robot::WholeBody(_) => {
                        return Err(cctx.err("kind", "whole-body models cannot be nested"))
                    }
                };
                match chain.as_mut() {
                    None if child.reversed => {
                        return Err(cctx.err("reversed", "the first child cannot be reversed"))
                    }
                    None => chain = Some(WholeBodyChain::new(&rec.name, sub)),
                    Some(c) if child.reversed => c.add_reversed(sub),
                    Some(c) => c.add(sub),
                }
            }
            Ok(Robot::WholeBody(chain.expect("at least one child")))
        }
    }
}

/// Parses a model from TOML text. `source_name` labels diagnostics.
pub fn parse_robot(text: &str, source_name: &str) -> Result<Robot> {
    let rec: ModelRecord =
        toml::from_str(text).map_err(|e| Error::model_file(source_name, e.to_string().trim_end()))?;
    robot_from_record(&rec, source_name)
}

pub fn robot_from_record(rec: &ModelRecord, source_name: &str) -> Result<Robot> {
    let ctx = Ctx {
        source: source_name,
        path: String::new(),
    };
    build(rec, &ctx, true)
}

pub fn load_robot(path: impl AsRef<Path>) -> Result<Robot> {
    let path = path.as_ref();
    let name = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| Error::model_file(&name, e.to_string()))?;
    parse_robot(&text, &name)
}

fn identity_to_none(x: DualQuaternion) -> Option<[f64; 8]> {
    if x == crate::dq::ONE {
        None
    } else {
        Some(x.0)
    }
}

fn serial_record(s: &SerialManipulator) -> ModelRecord {
    ModelRecord {
        name: s.name.clone(),
        kind: ModelKind::Serial,
        reversed: false,
        reference_frame: identity_to_none(s.reference_frame()),
        base_frame: identity_to_none(s.base_frame()),
        effector: identity_to_none(s.effector()),
        frame_displacement: None,
        wheel_radius: None,
        axis_length: None,
        diameter: None,
        dh: Some(s.dh().clone()),
        children: Vec::new(),
    }
}

fn base_record(b: &MobileBase) -> ModelRecord {
    let (kind, wheel_radius, axis_length) = match b.kind() {
        BaseKind::Holonomic => (ModelKind::HolonomicBase, None, None),
        BaseKind::Differential {
            wheel_radius,
            axis_length,
        } => (ModelKind::DifferentialBase, Some(wheel_radius), Some(axis_length)),
    };
    ModelRecord {
        name: b.name.clone(),
        kind,
        reversed: false,
        reference_frame: None,
        base_frame: identity_to_none(b.base_frame()),
        effector: None,
        frame_displacement: identity_to_none(b.frame_displacement()),
        wheel_radius,
        axis_length,
        diameter: (b.diameter() != 0.0).then_some(b.diameter()),
        dh: None,
        children: Vec::new(),
    }
}

pub fn record_from_robot(robot: &Robot) -> ModelRecord {
    match robot {
        Robot::Serial(s) => serial_record(s),
        Robot::Base(b) => base_record(b),
        Robot::WholeBody(w) => ModelRecord {
            name: w.name.clone(),
            kind: ModelKind::Wholebody,
            reversed: false,
            reference_frame: None,
            base_frame: None,
            effector: None,
            frame_displacement: None,
            wheel_radius: None,
            axis_length: None,
            diameter: None,
            dh: None,
            children: w
                .chain()
                .map(|(sub, reversed)| {
                    let mut rec = match sub {
                        Subchain::Serial(s) => serial_record(s),
                        Subchain::Base(b) => base_record(b),
                    };
                    rec.reversed = reversed;
                    rec
                })
                .collect(),
        },
    }
}

pub fn robot_to_toml(robot: &Robot) -> Result<String> {
    toml::to_string(&record_from_robot(robot))
        .map_err(|e| Error::model_file(robot.name(), e.to_string()))
}

pub fn save_robot(robot: &Robot, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, robot_to_toml(robot)?)?;
    Ok(())
}

/// KUKA LWR 4 from the shipped model file.
pub fn lwr4_kinematics() -> Result<SerialManipulator> {
    match parse_robot(LWR4_MODEL, "models/lwr4.toml")? {
        Robot::Serial(s) => Ok(s),
        _ => Err(Error::model_file("models/lwr4.toml", "expected a serial model")),
    }
}

/// KUKA YouBot: holonomic base followed by the 5-DOF arm.
pub fn youbot_kinematics() -> Result<WholeBodyChain> {
    match parse_robot(YOUBOT_MODEL, "models/youbot.toml")? {
        Robot::WholeBody(w) => Ok(w),
        _ => Err(Error::model_file("models/youbot.toml", "expected a whole-body model")),
    }
}

pub fn differential_drive_base() -> Result<MobileBase> {
    match parse_robot(DIFFERENTIAL_MODEL, "models/differential_base.toml")? {
        Robot::Base(b) => Ok(b),
        _ => Err(Error::model_file("models/differential_base.toml", "expected a base model")),
    }
}

/// Text of a shipped model, by file stem.
pub fn shipped_model(stem: &str) -> Option<&'static str> {
    match stem {
        "lwr4" => Some(LWR4_MODEL),
        "youbot" => Some(YOUBOT_MODEL),
        "differential_base" => Some(DIFFERENTIAL_MODEL),
        _ => None,
    }
}
