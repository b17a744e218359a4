//! Shared vector and geometry types.
//!
//! World space is right-handed, y-up, in meters and seconds. Balance control
//! works in the sagittal plane: the vertical plane spanned by the walking
//! direction and gravity. [`SagittalFrame`] maps between the two.

use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

use crate::error::{Error, Result};

/// Standard gravity, pointing down the y axis.
pub const GRAVITY: Vec3 = Vec3::new(0.0, -9.81, 0.0);

const FRAME_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3::new(0.0, 0.0, 0.0);
    pub const X: Vec3 = Vec3::new(1.0, 0.0, 0.0);
    pub const Y: Vec3 = Vec3::new(0.0, 1.0, 0.0);
    pub const Z: Vec3 = Vec3::new(0.0, 0.0, 1.0);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn dot(self, other: Vec3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn cross(self, other: Vec3) -> Vec3 {
        Vec3::new(
            self.y * other.z - self.z * other.y,
            self.z * other.x - self.x * other.z,
            self.x * other.y - self.y * other.x,
        )
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn norm_squared(self) -> f64 {
        self.dot(self)
    }

    /// Unit vector in the same direction, or `None` for a (near) zero vector.
    pub fn try_normalize(self) -> Option<Vec3> {
        let n = self.norm();
        if n > f64::EPSILON {
            Some(self / n)
        } else {
            None
        }
    }

    /// The vector with its vertical component removed.
    pub fn horizontal(self) -> Vec3 {
        Vec3::new(self.x, 0.0, self.z)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn lerp(self, other: Vec3, t: f64) -> Vec3 {
        self + (other - self) * t
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl AddAssign for Vec3 {
    fn add_assign(&mut self, o: Vec3) {
        *self = *self + o;
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl SubAssign for Vec3 {
    fn sub_assign(&mut self, o: Vec3) {
        *self = *self - o;
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, k: f64) -> Vec3 {
        Vec3::new(self.x * k, self.y * k, self.z * k)
    }
}

impl Mul<Vec3> for f64 {
    type Output = Vec3;
    fn mul(self, v: Vec3) -> Vec3 {
        v * self
    }
}

impl Div<f64> for Vec3 {
    type Output = Vec3;
    fn div(self, k: f64) -> Vec3 {
        Vec3::new(self.x / k, self.y / k, self.z / k)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

/// A point or direction in the sagittal plane: `x` runs along the walking
/// direction, `y` along up.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn try_normalize(self) -> Option<Vec2> {
        let n = self.norm();
        if n > f64::EPSILON {
            Some(Vec2::new(self.x / n, self.y / n))
        } else {
            None
        }
    }

    pub fn midpoint(self, other: Vec2) -> Vec2 {
        Vec2::new(0.5 * (self.x + other.x), 0.5 * (self.y + other.y))
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, k: f64) -> Vec2 {
        Vec2::new(self.x * k, self.y * k)
    }
}

/// The plane spanned by the walking direction and gravity, passing through
/// `origin` (the center of mass).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SagittalFrame {
    origin: Vec3,
    forward: Vec3,
    up: Vec3,
}

impl SagittalFrame {
    /// Builds a frame, checking that `forward` and `up` are orthonormal.
    pub fn new(origin: Vec3, forward: Vec3, up: Vec3) -> Result<Self> {
        let ok = origin.is_finite()
            && (forward.norm() - 1.0).abs() <= FRAME_TOLERANCE
            && (up.norm() - 1.0).abs() <= FRAME_TOLERANCE
            && forward.dot(up).abs() <= FRAME_TOLERANCE;
        if !ok {
            return Err(Error::InvalidParameter(format!(
                "sagittal frame axes are not orthonormal: forward={forward:?} up={up:?}"
            )));
        }
        Ok(Self { origin, forward, up })
    }

    /// Frame through `origin` whose forward axis follows the horizontal part of
    /// `velocity`. Below 1e-6 m/s the previous forward direction is kept.
    pub fn from_velocity(origin: Vec3, velocity: Vec3, previous_forward: Vec3) -> Self {
        let horizontal = velocity.horizontal();
        let forward = if horizontal.norm() < 1e-6 {
            previous_forward.horizontal().try_normalize().unwrap_or(Vec3::X)
        } else {
            horizontal / horizontal.norm()
        };
        Self { origin, forward, up: Vec3::Y }
    }

    pub fn origin(&self) -> Vec3 {
        self.origin
    }

    pub fn forward(&self) -> Vec3 {
        self.forward
    }

    pub fn up(&self) -> Vec3 {
        self.up
    }

    /// Out-of-plane axis, `forward × up`.
    pub fn lateral(&self) -> Vec3 {
        self.forward.cross(self.up)
    }

    pub fn with_origin(&self, origin: Vec3) -> Self {
        Self { origin, ..*self }
    }

    /// In-plane coordinates of `p`; the lateral component is dropped.
    pub fn project(&self, p: Vec3) -> Vec2 {
        let d = p - self.origin;
        Vec2::new(d.dot(self.forward), d.dot(self.up))
    }

    /// Inverse of [`project`](Self::project) for points lying in the plane.
    pub fn embed(&self, q: Vec2) -> Vec3 {
        self.origin + self.forward * q.x + self.up * q.y
    }

    /// In-plane direction of a world vector (no origin offset).
    pub fn project_dir(&self, v: Vec3) -> Vec2 {
        Vec2::new(v.dot(self.forward), v.dot(self.up))
    }

    pub fn embed_dir(&self, v: Vec2) -> Vec3 {
        self.forward * v.x + self.up * v.y
    }
}

/// Free-function form of [`SagittalFrame::project`].
pub fn project_to_sagittal(p: Vec3, frame: &SagittalFrame) -> Vec2 {
    frame.project(p)
}

/// `(v.x, -|v.y|, v.z)`: the same vector with its vertical component forced
/// to point down.
pub fn down_vector(v: Vec3) -> Vec3 {
    Vec3::new(v.x, -v.y.abs(), v.z)
}

/// A segment in the sagittal plane with `a.x <= b.x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment2 {
    a: Vec2,
    b: Vec2,
}

impl Segment2 {
    pub fn new(p: Vec2, q: Vec2) -> Self {
        if p.x <= q.x {
            Self { a: p, b: q }
        } else {
            Self { a: q, b: p }
        }
    }

    pub fn a(&self) -> Vec2 {
        self.a
    }

    pub fn b(&self) -> Vec2 {
        self.b
    }

    pub fn midpoint(&self) -> Vec2 {
        self.a.midpoint(self.b)
    }

    pub fn length(&self) -> f64 {
        (self.b - self.a).norm()
    }
}

/// Cubic ease `3t² - 2t³` on `[0, 1]`, clamped outside.
pub fn smoothstep(t: f64) -> f64 {
    let t = t.clamp(0.0, 1.0);
    t * t * (3.0 - 2.0 * t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn x_frame() -> SagittalFrame {
        SagittalFrame::new(Vec3::new(1.0, 2.0, 3.0), Vec3::X, Vec3::Y).unwrap()
    }

    #[test]
    fn projection_examples() {
        let f = x_frame();
        let o = f.origin();
        assert_eq!(project_to_sagittal(o, &f), Vec2::new(0.0, 0.0));
        assert_eq!(project_to_sagittal(o + f.forward() * 2.0, &f), Vec2::new(2.0, 0.0));
        assert_eq!(project_to_sagittal(o + f.forward() + f.up() * 3.0, &f), Vec2::new(1.0, 3.0));
    }

    #[test]
    fn down_vector_examples() {
        assert_eq!(down_vector(Vec3::new(1.0, 2.0, 0.0)), Vec3::new(1.0, -2.0, 0.0));
        assert_eq!(down_vector(Vec3::new(0.0, -1.0, 0.0)), Vec3::new(0.0, -1.0, 0.0));
        let z = down_vector(Vec3::ZERO);
        assert_eq!((z.x, z.y, z.z), (0.0, 0.0, 0.0));
    }

    #[test]
    fn rejects_skewed_frame() {
        let skew = Vec3::new(1.0, 0.1, 0.0).try_normalize().unwrap();
        assert!(SagittalFrame::new(Vec3::ZERO, skew, Vec3::Y).is_err());
        assert!(SagittalFrame::new(Vec3::ZERO, Vec3::X * 2.0, Vec3::Y).is_err());
    }

    #[test]
    fn frame_reuses_forward_at_rest() {
        let prev = Vec3::new(0.0, 0.0, -1.0);
        let f = SagittalFrame::from_velocity(Vec3::ZERO, Vec3::new(1e-8, 3.0, 0.0), prev);
        assert_eq!(f.forward(), prev);
        let g = SagittalFrame::from_velocity(Vec3::ZERO, Vec3::new(0.0, -1.0, 2.0), prev);
        assert_eq!(g.forward(), Vec3::Z);
        assert_eq!(g.lateral(), Vec3::new(-1.0, 0.0, 0.0));
    }

    #[test]
    fn segment_orders_endpoints() {
        let s = Segment2::new(Vec2::new(0.4, 0.0), Vec2::new(-0.2, 0.1));
        assert_eq!(s.a().x, -0.2);
        assert_eq!(s.b().x, 0.4);
        assert!((s.midpoint().x - 0.1).abs() < 1e-15);
    }

    fn finite() -> impl Strategy<Value = f64> {
        -1e3f64..1e3
    }

    proptest! {
        #[test]
        fn down_vector_idempotent_and_norm_preserving(x in finite(), y in finite(), z in finite()) {
            let v = Vec3::new(x, y, z);
            let d = down_vector(v);
            prop_assert_eq!(down_vector(d), d);
            prop_assert!(d.y <= 0.0);
            prop_assert_eq!(d.norm(), v.norm());
        }

        #[test]
        fn project_embed_recovers_in_plane_component(
            x in finite(), y in finite(), z in finite(), heading in 0.0f64..std::f64::consts::TAU,
        ) {
            let fwd = Vec3::new(heading.cos(), 0.0, heading.sin());
            let frame = SagittalFrame::new(Vec3::new(0.5, -1.0, 2.0), fwd, Vec3::Y).unwrap();
            let p = Vec3::new(x, y, z);
            let back = frame.embed(frame.project(p));
            let lateral = frame.lateral();
            let in_plane = p - lateral * (p - frame.origin()).dot(lateral);
            prop_assert!((back - in_plane).norm() <= 1e-12 * (1.0 + p.norm()));
            let q = Vec2::new(x, y);
            let round = frame.project(frame.embed(q));
            prop_assert!((round - q).norm() <= 1e-12 * (1.0 + q.norm()));
        }
    }
}
