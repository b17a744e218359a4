//! Sagittal tilt controller and the rigid-body proxy it drives.
//!
//! The proxy is an inverted pendulum: a rigid body whose center of mass sits
//! `lever` meters above a ground pivot that follows the walking root. The
//! controller torque is
//!
//! ```text
//! τ = α · (p_target − p_com) · u + β · θ̇ − drag · θ̇
//! ```
//!
//! where `p_target` is the midpoint of the support segment between the feet,
//! `p_com` is the center of mass dropped vertically onto the ground line and
//! `u` is the unit slope direction. Positive tilt leans forward.

use crate::error::{Error, Result};
use crate::heightfield::HeightField;
use crate::math::{SagittalFrame, Segment2, Vec2, Vec3, GRAVITY};

/// Per-frame cap on the pelvis correction toward the IK targets (m).
pub const MAX_IK_OFFSET: f64 = 0.02;

/// Stiffness and damping of the drive that carries the center of mass along
/// its anchor point (critically damped, 25 rad/s).
const DRIVE_STIFFNESS: f64 = 625.0;
const DRIVE_DAMPING: f64 = 50.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BodyState {
    pub com: Vec3,
    /// Lean in the sagittal plane (rad), 0 = upright, positive = forward.
    pub tilt: f64,
    /// Tilt rate (rad/s).
    pub angular_velocity: f64,
    pub linear_velocity: Vec3,
    pub mass: f64,
    /// Rotational inertia about the sagittal normal (kg·m²).
    pub inertia: f64,
    /// Height of the center of mass above the pelvis (m).
    pub com_height_offset: f64,
}

impl BodyState {
    pub fn validate(&self) -> Result<()> {
        if !(self.mass.is_finite() && self.mass > 0.0) {
            return Err(Error::InvalidParameter(format!("mass must be positive, got {}", self.mass)));
        }
        if !(self.inertia.is_finite() && self.inertia > 0.0) {
            return Err(Error::InvalidParameter(format!("inertia must be positive, got {}", self.inertia)));
        }
        if !(self.tilt.abs() < std::f64::consts::FRAC_PI_2) {
            return Err(Error::FallOver { tilt: self.tilt });
        }
        if !(self.com.is_finite() && self.linear_velocity.is_finite() && self.angular_velocity.is_finite()) {
            return Err(Error::InvalidParameter("body state must be finite".into()));
        }
        Ok(())
    }

    /// Gravity torque about the ground pivot for a center of mass `lever`
    /// meters above it; it always pushes the tilt further from upright.
    pub fn tipping_torque(&self, lever: f64) -> f64 {
        self.mass * -GRAVITY.y * lever * self.tilt.sin()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControllerParams {
    /// Gain on the support-midpoint error (N·m per m).
    pub alpha: f64,
    /// Gain on the tilt rate (N·m per rad/s).
    pub beta: f64,
    /// Extra rotational damping (N·m per rad/s).
    pub angular_drag: f64,
}

impl Default for ControllerParams {
    fn default() -> Self {
        Self { alpha: 30.0, beta: 6.0, angular_drag: 10.0 }
    }
}

impl ControllerParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha.is_finite() && self.alpha >= 0.0) {
            return Err(Error::InvalidParameter(format!("alpha must be ≥ 0, got {}", self.alpha)));
        }
        if !self.beta.is_finite() {
            return Err(Error::InvalidParameter(format!("beta must be finite, got {}", self.beta)));
        }
        if !(self.angular_drag.is_finite() && self.angular_drag >= 0.0) {
            return Err(Error::InvalidParameter(format!("angular drag must be ≥ 0, got {}", self.angular_drag)));
        }
        Ok(())
    }
}

/// Support segment between the feet, its midpoint, and the ground direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupportState {
    pub segment: Segment2,
    pub target: Vec2,
    /// Unit ground tangent in the plane, pointing along +forward.
    pub slope_dir: Vec2,
}

/// Builds the support segment from the feet's ground contact points.
pub fn compute_support(feet: [Vec3; 2], frame: &SagittalFrame, field: &HeightField) -> Result<SupportState> {
    let ground = |p: Vec3| -> Result<Vec3> { Ok(Vec3::new(p.x, field.sample_height(p.x, p.z)?, p.z)) };
    let g0 = ground(feet[0])?;
    let g1 = ground(feet[1])?;

    let segment = Segment2::new(frame.project(feet[0]), frame.project(feet[1]));
    let target = segment.midpoint();

    let (back, front) = if frame.project(g0).x <= frame.project(g1).x { (g0, g1) } else { (g1, g0) };
    let spread = frame.project_dir(front - back);
    let slope_dir = if spread.x > field.cell_size() {
        spread
    } else {
        // Feet (nearly) together: central difference around the midpoint.
        let mid = back.lerp(front, 0.5).horizontal();
        let step = frame.forward() * field.cell_size();
        let (a, b) = (mid - step, mid + step);
        let (ha, hb) = match (field.sample_height(a.x, a.z), field.sample_height(b.x, b.z)) {
            (Ok(ha), Ok(hb)) => (ha, hb),
            _ => (g0.y, g1.y),
        };
        frame.project_dir(Vec3::new(b.x, hb, b.z) - Vec3::new(a.x, ha, a.z))
    };
    let slope_dir = slope_dir.try_normalize().unwrap_or(Vec2::new(1.0, 0.0));
    Ok(SupportState { segment, target, slope_dir })
}

/// `(p_target − p_com) · u`, with the center of mass dropped vertically
/// onto the ground line through the target along `u`.
pub fn support_error(body: &BodyState, support: &SupportState, frame: &SagittalFrame) -> f64 {
    let com = frame.project(body.com);
    let u = support.slope_dir;
    // The vertical through the COM meets the ground line at parameter
    // (com.x − target.x) / u.x, so the error along u is the negation.
    (support.target.x - com.x) / u.x
}

pub fn compute_torque(
    body: &BodyState,
    support: &SupportState,
    params: &ControllerParams,
    frame: &SagittalFrame,
) -> f64 {
    let error = support_error(body, support, frame);
    params.alpha * error + params.beta * body.angular_velocity - params.angular_drag * body.angular_velocity
}

/// Semi-implicit Euler step of tilt and linear motion.
pub fn integrate_body(body: &BodyState, torque: f64, external_accel: Vec3, dt: f64) -> Result<BodyState> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidParameter(format!("time step must be positive, got {dt}")));
    }
    let mut next = *body;
    next.angular_velocity += torque / body.inertia * dt;
    next.tilt += next.angular_velocity * dt;
    next.linear_velocity += (GRAVITY + external_accel) * dt;
    next.com += next.linear_velocity * dt;
    if !(next.tilt.abs() < std::f64::consts::FRAC_PI_2) {
        return Err(Error::FallOver { tilt: next.tilt });
    }
    Ok(next)
}

/// Pelvis translation that best closes the gap between the feet and their IK
/// targets, capped at [`MAX_IK_OFFSET`].
pub fn ik_offset_correction(feet: [Vec3; 2], targets: [Vec3; 2]) -> Vec3 {
    // Least squares over a common translation is the mean gap.
    let gap = ((targets[0] - feet[0]) + (targets[1] - feet[1])) * 0.5;
    let n = gap.norm();
    if n > MAX_IK_OFFSET {
        gap * (MAX_IK_OFFSET / n)
    } else {
        gap
    }
}

/// Where the center of mass sits for a pivot at `root` and the current tilt.
pub fn com_anchor(root: Vec3, tilt: f64, lever: f64, frame: &SagittalFrame) -> Vec3 {
    let (s, c) = tilt.sin_cos();
    root + frame.forward() * (lever * s) + frame.up() * (lever * c)
}

/// One proxy update: controller torque plus gravity tipping, and a drive
/// that carries the center of mass along the anchor above `root`.
#[derive(Debug, Clone, Copy)]
pub struct ProxyStep {
    pub body: BodyState,
    /// Controller torque applied this step.
    pub control_torque: f64,
}

#[allow(clippy::too_many_arguments)]
pub fn step_proxy(
    body: &BodyState,
    support: &SupportState,
    params: &ControllerParams,
    frame: &SagittalFrame,
    root: Vec3,
    root_velocity: Vec3,
    lever: f64,
    dt: f64,
) -> Result<ProxyStep> {
    let control_torque = compute_torque(body, support, params, frame);
    let torque = control_torque + body.tipping_torque(lever);

    let anchor = com_anchor(root, body.tilt, lever, frame);
    let (s, c) = body.tilt.sin_cos();
    let swing = body.angular_velocity * lever;
    let anchor_velocity = root_velocity + frame.forward() * (swing * c) - frame.up() * (swing * s);
    let drive = (anchor - body.com) * DRIVE_STIFFNESS + (anchor_velocity - body.linear_velocity) * DRIVE_DAMPING;
    let external = drive - GRAVITY;

    let body = integrate_body(body, torque, external, dt)?;
    Ok(ProxyStep { body, control_torque })
}
