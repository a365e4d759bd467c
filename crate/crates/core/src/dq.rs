//! Dual quaternion algebra.
//!
//! A [`DualQuaternion`] stores eight coefficients in scalar-first order,
//! `(p1, p2, p3, p4, d1, d2, d3, d4)`, for
//! `h = (p1 + p2 i + p3 j + p4 k) + E (d1 + d2 i + d3 j + d4 k)`.
//! Quaternions, pure quaternions (points and directions), unit dual
//! quaternions (poses), lines and planes all share this one type.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use nalgebra::{Matrix4, SMatrix, SVector, Vector4};

use crate::error::{Error, Result};

pub type Matrix8 = SMatrix<f64, 8, 8>;
pub type Vector8 = SVector<f64, 8>;

/// Tolerance used to classify unit dual quaternions.
pub const UNIT_TOLERANCE: f64 = 1e-9;
/// Below this imaginary norm a rotation is treated as the identity.
pub const ROTATION_EPSILON: f64 = 1e-12;
/// Tolerance on real parts accepted by the imaginary-only vector maps and `exp`.
pub const PURE_TOLERANCE: f64 = 1e-12;

/// `diag(1, -1, -1, -1)`: maps `vec4(q)` to `vec4(conj(q))`.
pub fn c4() -> Matrix4<f64> {
    Matrix4::from_diagonal(&Vector4::new(1.0, -1.0, -1.0, -1.0))
}

/// `diag(1, -1, -1, -1, 1, -1, -1, -1)`: maps `vec8(h)` to `vec8(conj(h))`.
pub fn c8() -> Matrix8 {
    Matrix8::from_diagonal(&Vector8::from_column_slice(&[
        1.0, -1.0, -1.0, -1.0, 1.0, -1.0, -1.0, -1.0,
    ]))
}

#[derive(Clone, Copy, PartialEq, Default)]
pub struct DualQuaternion(pub [f64; 8]);

pub const ZERO: DualQuaternion = DualQuaternion([0.0; 8]);
pub const ONE: DualQuaternion = DualQuaternion([1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
pub const I: DualQuaternion = DualQuaternion([0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
pub const J: DualQuaternion = DualQuaternion([0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
pub const K: DualQuaternion = DualQuaternion([0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0]);
/// The dual unit, `E * E = 0`.
pub const E: DualQuaternion = DualQuaternion([0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0]);

#[inline(always)]
fn qmul(a: &[f64], b: &[f64]) -> [f64; 4] {
    [
        a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3],
        a[0] * b[1] + a[1] * b[0] + a[2] * b[3] - a[3] * b[2],
        a[0] * b[2] - a[1] * b[3] + a[2] * b[0] + a[3] * b[1],
        a[0] * b[3] + a[1] * b[2] - a[2] * b[1] + a[3] * b[0],
    ]
}

fn hp4(a: &[f64]) -> Matrix4<f64> {
    Matrix4::new(
        a[0], -a[1], -a[2], -a[3], //
        a[1], a[0], -a[3], a[2], //
        a[2], a[3], a[0], -a[1], //
        a[3], -a[2], a[1], a[0],
    )
}

fn hm4(a: &[f64]) -> Matrix4<f64> {
    Matrix4::new(
        a[0], -a[1], -a[2], -a[3], //
        a[1], a[0], a[3], -a[2], //
        a[2], -a[3], a[0], a[1], //
        a[3], a[2], -a[1], a[0],
    )
}

fn block8(primary: Matrix4<f64>, dual: Matrix4<f64>) -> Matrix8 {
    let mut m = Matrix8::zeros();
    m.fixed_view_mut::<4, 4>(0, 0).copy_from(&primary);
    m.fixed_view_mut::<4, 4>(4, 4).copy_from(&primary);
    m.fixed_view_mut::<4, 4>(4, 0).copy_from(&dual);
    m
}

impl DualQuaternion {
    pub const fn new(coeffs: [f64; 8]) -> Self {
        DualQuaternion(coeffs)
    }

    pub fn from_parts(primary: [f64; 4], dual: [f64; 4]) -> Self {
        let mut c = [0.0; 8];
        c[..4].copy_from_slice(&primary);
        c[4..].copy_from_slice(&dual);
        DualQuaternion(c)
    }

    pub fn quaternion(w: f64, x: f64, y: f64, z: f64) -> Self {
        Self::from_parts([w, x, y, z], [0.0; 4])
    }

    pub fn scalar(s: f64) -> Self {
        Self::quaternion(s, 0.0, 0.0, 0.0)
    }

    /// Pure quaternion `x i + y j + z k`, the encoding of a point or direction.
    pub fn pure(x: f64, y: f64, z: f64) -> Self {
        Self::quaternion(0.0, x, y, z)
    }

    /// Rotation of `angle` radians about the unit `axis` (a pure quaternion).
    pub fn rotation_about(axis: DualQuaternion, angle: f64) -> Self {
        let (s, c) = (angle / 2.0).sin_cos();
        c + axis.p() * s
    }

    /// Pose `r + E (1/2) p r`: translation `p` followed by rotation `r`.
    pub fn from_rotation_translation(r: DualQuaternion, p: DualQuaternion) -> Self {
        r + E * 0.5 * p * r
    }

    /// Pure translation `1 + E (1/2) p`.
    pub fn from_translation(p: DualQuaternion) -> Self {
        ONE + E * 0.5 * p
    }

    #[inline]
    pub fn coeffs(&self) -> &[f64; 8] {
        &self.0
    }

    pub fn primary(&self) -> [f64; 4] {
        [self.0[0], self.0[1], self.0[2], self.0[3]]
    }

    pub fn dual(&self) -> [f64; 4] {
        [self.0[4], self.0[5], self.0[6], self.0[7]]
    }

    /// Primary part.
    pub fn p(&self) -> Self {
        Self::from_parts(self.primary(), [0.0; 4])
    }

    /// Dual part.
    pub fn d(&self) -> Self {
        Self::from_parts(self.dual(), [0.0; 4])
    }

    /// Real component: `Re(P) + E Re(D)`.
    pub fn re(&self) -> Self {
        let c = &self.0;
        Self::new([c[0], 0.0, 0.0, 0.0, c[4], 0.0, 0.0, 0.0])
    }

    /// Imaginary components.
    pub fn im(&self) -> Self {
        let mut c = self.0;
        c[0] = 0.0;
        c[4] = 0.0;
        Self(c)
    }

    pub fn conj(&self) -> Self {
        let c = &self.0;
        Self::new([c[0], -c[1], -c[2], -c[3], c[4], -c[5], -c[6], -c[7]])
    }

    /// Sharp conjugate, `P(h) - E D(h)`.
    pub fn sharp(&self) -> Self {
        let c = &self.0;
        Self::new([c[0], c[1], c[2], c[3], -c[4], -c[5], -c[6], -c[7]])
    }

    fn primary_norm(&self) -> f64 {
        self.0[..4].iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    fn primary_dual_dot(&self) -> f64 {
        self.0[..4].iter().zip(&self.0[4..]).map(|(a, b)| a * b).sum()
    }

    /// Dual-scalar norm `sqrt(h h*)`.
    pub fn norm(&self) -> Result<Self> {
        let np = self.primary_norm();
        if np == 0.0 {
            if self.0[4..].iter().any(|v| *v != 0.0) {
                return Err(Error::domain(
                    "norm is undefined for a dual quaternion with zero primary part",
                ));
            }
            return Ok(ZERO);
        }
        Ok(Self::new([
            np,
            0.0,
            0.0,
            0.0,
            self.primary_dual_dot() / np,
            0.0,
            0.0,
            0.0,
        ]))
    }

    /// Multiplicative inverse; requires a nonzero primary part.
    pub fn inv(&self) -> Result<Self> {
        let sq = self.0[..4].iter().map(|v| v * v).sum::<f64>();
        if sq == 0.0 {
            return Err(Error::domain("inverse requires a nonzero primary part"));
        }
        // (h h*)^-1 is the dual number 1/a - E b/a^2
        let b = 2.0 * self.primary_dual_dot();
        let scale = Self::new([1.0 / sq, 0.0, 0.0, 0.0, -b / (sq * sq), 0.0, 0.0, 0.0]);
        Ok(self.conj() * scale)
    }

    /// Right division `self * inv(rhs)`.
    pub fn right_div(&self, rhs: &Self) -> Result<Self> {
        Ok(*self * rhs.inv()?)
    }

    /// Left division `inv(self) * rhs`.
    pub fn left_div(&self, rhs: &Self) -> Result<Self> {
        Ok(self.inv()? * *rhs)
    }

    pub fn is_unit(&self) -> bool {
        (self.primary_norm() - 1.0).abs() <= UNIT_TOLERANCE
            && self.primary_dual_dot().abs() <= UNIT_TOLERANCE
    }

    /// Real parts vanish, up to [`PURE_TOLERANCE`] round-off.
    pub fn is_pure(&self) -> bool {
        self.0[0].abs() <= PURE_TOLERANCE && self.0[4].abs() <= PURE_TOLERANCE
    }

    /// True when the dual part vanishes, up to [`PURE_TOLERANCE`].
    pub fn is_quaternion(&self) -> bool {
        self.0[4..].iter().all(|v| v.abs() <= PURE_TOLERANCE)
    }

    pub fn is_pure_quaternion(&self) -> bool {
        self.is_pure() && self.is_quaternion()
    }

    fn ensure_unit(&self, op: &str) -> Result<()> {
        if self.is_unit() {
            Ok(())
        } else {
            Err(Error::domain(format!("{op} requires a unit dual quaternion, got {self}")))
        }
    }

    fn ensure_quaternion(&self, op: &str) -> Result<()> {
        if self.is_quaternion() {
            Ok(())
        } else {
            Err(Error::domain(format!("{op} requires a quaternion (zero dual part)")))
        }
    }

    pub fn vec8(&self) -> Vector8 {
        Vector8::from_column_slice(&self.0)
    }

    pub fn vec4(&self) -> Vector4<f64> {
        Vector4::from_column_slice(&self.0[..4])
    }

    pub fn vec3(&self) -> Result<[f64; 3]> {
        if self.0[0].abs() > PURE_TOLERANCE {
            return Err(Error::domain("vec3 requires a zero real part"));
        }
        Ok([self.0[1], self.0[2], self.0[3]])
    }

    pub fn vec6(&self) -> Result<[f64; 6]> {
        if self.0[0].abs() > PURE_TOLERANCE || self.0[4].abs() > PURE_TOLERANCE {
            return Err(Error::domain("vec6 requires zero real parts"));
        }
        let c = &self.0;
        Ok([c[1], c[2], c[3], c[5], c[6], c[7]])
    }

    /// Builds a dual quaternion from 4 (quaternion) or 8 coefficients.
    pub fn from_vec(v: &[f64]) -> Result<Self> {
        match v.len() {
            4 => Ok(Self::quaternion(v[0], v[1], v[2], v[3])),
            8 => {
                let mut c = [0.0; 8];
                c.copy_from_slice(v);
                Ok(Self(c))
            }
            n => Err(Error::domain(format!(
                "coefficient vector must have length 4 or 8, got {n}"
            ))),
        }
    }

    pub fn from_vec3(v: [f64; 3]) -> Self {
        Self::pure(v[0], v[1], v[2])
    }

    pub fn hamiplus4(&self) -> Result<Matrix4<f64>> {
        self.ensure_quaternion("hamiplus4")?;
        Ok(hp4(&self.0[..4]))
    }

    pub fn haminus4(&self) -> Result<Matrix4<f64>> {
        self.ensure_quaternion("haminus4")?;
        Ok(hm4(&self.0[..4]))
    }

    /// Left Hamilton operator of the primary part, ignoring the dual part.
    pub(crate) fn hp4_primary(&self) -> Matrix4<f64> {
        hp4(&self.0[..4])
    }

    pub(crate) fn hm4_primary(&self) -> Matrix4<f64> {
        hm4(&self.0[..4])
    }

    /// `hamiplus8(a) * vec8(b) == vec8(a * b)`.
    pub fn hamiplus8(&self) -> Matrix8 {
        block8(hp4(&self.0[..4]), hp4(&self.0[4..]))
    }

    /// `haminus8(b) * vec8(a) == vec8(a * b)`.
    pub fn haminus8(&self) -> Matrix8 {
        block8(hm4(&self.0[..4]), hm4(&self.0[4..]))
    }

    /// Exponential of a pure dual quaternion.
    pub fn exp(&self) -> Result<Self> {
        if self.0[0].abs() > PURE_TOLERANCE || self.0[4].abs() > PURE_TOLERANCE {
            return Err(Error::domain("exp is defined only for pure dual quaternions"));
        }
        let v = &self.0[1..4];
        let phi = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        let r = if phi == 0.0 {
            ONE
        } else {
            let s = phi.sin() / phi;
            Self::quaternion(phi.cos(), v[0] * s, v[1] * s, v[2] * s)
        };
        Ok(r + E * self.d() * r)
    }

    /// Logarithm of a unit dual quaternion, `(phi n + E p) / 2`.
    pub fn log(&self) -> Result<Self> {
        self.ensure_unit("log")?;
        let c = &self.0;
        let im = (c[1] * c[1] + c[2] * c[2] + c[3] * c[3]).sqrt();
        let primary = if im < ROTATION_EPSILON {
            [0.0; 4]
        } else {
            let half_angle = im.atan2(c[0]);
            let s = half_angle / im;
            [0.0, c[1] * s, c[2] * s, c[3] * s]
        };
        let p = self.translation_unchecked();
        Ok(Self::from_parts(
            primary,
            [0.0, 0.5 * p.0[1], 0.5 * p.0[2], 0.5 * p.0[3]],
        ))
    }

    /// `exp(s log(x))` for unit `x`.
    pub fn pow(&self, s: f64) -> Result<Self> {
        (self.log()? * s).exp()
    }

    /// Rotation (primary part) of a unit dual quaternion.
    pub fn rotation(&self) -> Result<Self> {
        self.ensure_unit("rotation")?;
        Ok(self.p())
    }

    fn translation_unchecked(&self) -> Self {
        let t = qmul(&self.0[4..], &[self.0[0], -self.0[1], -self.0[2], -self.0[3]]);
        Self::pure(2.0 * t[1], 2.0 * t[2], 2.0 * t[3])
    }

    /// Translation `2 D(x) P(x)*` of a unit dual quaternion.
    pub fn translation(&self) -> Result<Self> {
        self.ensure_unit("translation")?;
        Ok(self.translation_unchecked())
    }

    /// Unit rotation axis; `k` for the identity rotation.
    pub fn rotation_axis(&self) -> Result<Self> {
        self.ensure_unit("rotation_axis")?;
        let c = &self.0;
        let im = (c[1] * c[1] + c[2] * c[2] + c[3] * c[3]).sqrt();
        if im < ROTATION_EPSILON {
            return Ok(K);
        }
        Ok(Self::pure(c[1] / im, c[2] / im, c[3] / im))
    }

    /// Rotation angle in `[0, 2 pi)`.
    pub fn rotation_angle(&self) -> Result<f64> {
        self.ensure_unit("rotation_angle")?;
        let c = &self.0;
        let im = (c[1] * c[1] + c[2] * c[2] + c[3] * c[3]).sqrt();
        let phi = 2.0 * im.atan2(c[0]);
        Ok(if phi >= 2.0 * PI { phi - 2.0 * PI } else { phi })
    }

    /// Adjoint `Ad(self) b = self b self*`.
    pub fn adjoint(&self, b: &Self) -> Result<Self> {
        self.ensure_unit("adjoint")?;
        Ok(*self * *b * self.conj())
    }

    /// Sharp adjoint `sharp(self) b conj(sharp(self))`.
    pub fn adjoint_sharp(&self, b: &Self) -> Result<Self> {
        self.ensure_unit("adjoint_sharp")?;
        let s = self.sharp();
        Ok(s * *b * s.conj())
    }

    /// `(a b - b a) / 2`.
    pub fn cross(&self, b: &Self) -> Self {
        (*self * *b - *b * *self) * 0.5
    }

    /// `-(a b + b a) / 2`.
    pub fn dot(&self, b: &Self) -> Self {
        (*self * *b + *b * *self) * -0.5
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl Add for DualQuaternion {
    type Output = Self;
    #[inline]
    fn add(self, rhs: Self) -> Self {
        let mut c = self.0;
        for (a, b) in c.iter_mut().zip(rhs.0) {
            *a += b;
        }
        Self(c)
    }
}

impl Add<f64> for DualQuaternion {
    type Output = Self;
    fn add(mut self, rhs: f64) -> Self {
        self.0[0] += rhs;
        self
    }
}

impl Add<DualQuaternion> for f64 {
    type Output = DualQuaternion;
    fn add(self, rhs: DualQuaternion) -> DualQuaternion {
        rhs + self
    }
}

impl Sub for DualQuaternion {
    type Output = Self;
    #[inline]
    fn sub(self, rhs: Self) -> Self {
        let mut c = self.0;
        for (a, b) in c.iter_mut().zip(rhs.0) {
            *a -= b;
        }
        Self(c)
    }
}

impl Sub<DualQuaternion> for f64 {
    type Output = DualQuaternion;
    fn sub(self, rhs: DualQuaternion) -> DualQuaternion {
        -rhs + self
    }
}

impl Neg for DualQuaternion {
    type Output = Self;
    fn neg(self) -> Self {
        Self(self.0.map(|v| -v))
    }
}

impl Mul for DualQuaternion {
    type Output = Self;
    #[inline]
    fn mul(self, rhs: Self) -> Self {
        let (a, b) = (&self.0, &rhs.0);
        let p = qmul(&a[..4], &b[..4]);
        let d1 = qmul(&a[..4], &b[4..]);
        let d2 = qmul(&a[4..], &b[..4]);
        Self([
            p[0],
            p[1],
            p[2],
            p[3],
            d1[0] + d2[0],
            d1[1] + d2[1],
            d1[2] + d2[2],
            d1[3] + d2[3],
        ])
    }
}

impl Mul<f64> for DualQuaternion {
    type Output = Self;
    fn mul(self, rhs: f64) -> Self {
        Self(self.0.map(|v| v * rhs))
    }
}

impl Mul<DualQuaternion> for f64 {
    type Output = DualQuaternion;
    fn mul(self, rhs: DualQuaternion) -> DualQuaternion {
        rhs * self
    }
}

impl Div<f64> for DualQuaternion {
    type Output = Self;
    fn div(self, rhs: f64) -> Self {
        Self(self.0.map(|v| v / rhs))
    }
}

fn write_part(f: &mut fmt::Formatter<'_>, coeffs: &[f64]) -> fmt::Result {
    const UNITS: [&str; 4] = ["", "i", "j", "k"];
    let mut first = true;
    for (c, unit) in coeffs.iter().zip(UNITS) {
        if *c == 0.0 {
            continue;
        }
        let sign = match (first, c.is_sign_negative()) {
            (true, true) => " - ",
            (true, false) => "",
            (false, true) => " - ",
            (false, false) => " + ",
        };
        write!(f, "{sign}{}{unit}", c.abs())?;
        first = false;
    }
    Ok(())
}

/// Console rendering, e.g. `( - 2 + 1i + 1j) + E*(1 + 1i + 2k)`.
impl fmt::Display for DualQuaternion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let has_p = self.0[..4].iter().any(|v| *v != 0.0);
        let has_d = self.0[4..].iter().any(|v| *v != 0.0);
        match (has_p, has_d) {
            (false, false) => write!(f, "0"),
            (true, false) => write_part(f, &self.0[..4]),
            (false, true) => {
                write!(f, "E*(")?;
                write_part(f, &self.0[4..])?;
                write!(f, ")")
            }
            (true, true) => {
                write!(f, "(")?;
                write_part(f, &self.0[..4])?;
                write!(f, ") + E*(")?;
                write_part(f, &self.0[4..])?;
                write!(f, ")")
            }
        }
    }
}

impl fmt::Debug for DualQuaternion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DQ{:?}", self.0)
    }
}
