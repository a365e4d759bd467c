//! Dual quaternion algebra, robot kinematics and differential-kinematics
//! control, with a batch simulator for a mobile manipulator working next to
//! a fixed arm.

pub mod dq;
pub mod error;
pub mod geometry;
pub mod control;
pub mod kinematics;
pub mod robots;
pub mod sim;

pub use dq::DualQuaternion;
pub use error::{Error, Result};
