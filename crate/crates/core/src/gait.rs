//! Procedural gait clock, foot targets and analytic two-bone leg IK.
//!
//! A gait cycle is split into two halves. During each half one foot is the
//! stance foot and the other swings from its lift-off point to a landing
//! point one step ahead of the stance foot. Within a half the swing runs on
//! its trajectory for the first [`LANDING_START`] of the time and then holds
//! the landing point, so both feet share the ground briefly before the next
//! half begins.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::heightfield::HeightField;
use crate::math::{smoothstep, SagittalFrame, Vec2, Vec3};
use crate::vegetation::VirtualPlatform;

/// Fraction of a half cycle after which the swing foot holds its landing point.
pub const LANDING_START: f64 = 0.8;

/// Distance from a support surface under which a foot counts as touching it (m).
pub const CONTACT_TOLERANCE: f64 = 1e-4;

/// Reference body height for the default proportions (m).
const REFERENCE_HEIGHT: f64 = 1.7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Foot {
    Left,
    Right,
}

impl Foot {
    pub const BOTH: [Foot; 2] = [Foot::Left, Foot::Right];

    pub fn index(self) -> usize {
        match self {
            Foot::Left => 0,
            Foot::Right => 1,
        }
    }

    pub fn other(self) -> Foot {
        match self {
            Foot::Left => Foot::Right,
            Foot::Right => Foot::Left,
        }
    }

    /// Sign of the foot's offset along the frame's lateral axis.
    pub fn side(self) -> f64 {
        match self {
            Foot::Left => -1.0,
            Foot::Right => 1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Foot::Left => "left",
            Foot::Right => "right",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Morphology {
    pub total_height: f64,
    pub leg_upper: f64,
    pub leg_lower: f64,
    /// Lateral distance between the hip joints (m).
    pub hip_spacing: f64,
    /// Standing height of the pelvis above the ground (m).
    pub pelvis_height: f64,
    pub foot_half_length: f64,
    pub foot_half_width: f64,
}

impl Morphology {
    /// Human proportions scaled linearly from a 1.7 m body, pelvis carried
    /// low enough for a bent stance knee.
    pub fn scaled(total_height: f64) -> Self {
        let k = total_height / REFERENCE_HEIGHT;
        Self {
            total_height,
            leg_upper: 0.46 * k,
            leg_lower: 0.46 * k,
            hip_spacing: 0.2 * k,
            pelvis_height: 0.8 * k,
            foot_half_length: 0.13 * k,
            foot_half_width: 0.05 * k,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let lengths = [
            ("total_height", self.total_height),
            ("leg_upper", self.leg_upper),
            ("leg_lower", self.leg_lower),
            ("hip_spacing", self.hip_spacing),
            ("pelvis_height", self.pelvis_height),
            ("foot_half_length", self.foot_half_length),
            ("foot_half_width", self.foot_half_width),
        ];
        for (name, v) in lengths {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        if self.leg_upper + self.leg_lower >= self.pelvis_height + 0.2 {
            return Err(Error::InvalidParameter(format!(
                "legs ({} m) must be shorter than pelvis height + 0.2 m ({} m)",
                self.leg_upper + self.leg_lower,
                self.pelvis_height + 0.2
            )));
        }
        Ok(())
    }

    pub fn leg_length(&self) -> f64 {
        self.leg_upper + self.leg_lower
    }
}

/// Step length, cycle time and clearance; defaults scale with body height.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaitParams {
    pub step_length: f64,
    pub cycle_duration: f64,
    pub swing_apex: f64,
}

impl GaitParams {
    pub fn scaled(total_height: f64) -> Self {
        let k = total_height / REFERENCE_HEIGHT;
        Self { step_length: 0.5 * k, cycle_duration: 1.2 * k, swing_apex: 0.05 * k }
    }

    /// Forward speed of the walking root (m/s).
    pub fn speed(&self) -> f64 {
        2.0 * self.step_length / self.cycle_duration
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaitState {
    /// Position in the cycle, `[0, 1)`.
    pub phase: f64,
    pub stance: Foot,
    pub step_length: f64,
    pub cycle_duration: f64,
    pub swing_apex: f64,
}

impl GaitState {
    pub fn new(params: &GaitParams, stance: Foot) -> Self {
        Self {
            phase: 0.0,
            stance,
            step_length: params.step_length,
            cycle_duration: params.cycle_duration,
            swing_apex: params.swing_apex,
        }
    }

    pub fn swing(&self) -> Foot {
        self.stance.other()
    }

    /// Position within the current half cycle, `[0, 1)`.
    pub fn half_phase(&self) -> f64 {
        let h = 2.0 * self.phase;
        h - h.floor()
    }

    /// Progress along the swing trajectory, reaching 1 at [`LANDING_START`].
    pub fn swing_progress(&self) -> f64 {
        (self.half_phase() / LANDING_START).min(1.0)
    }
}

/// Advances the phase by `dt / cycle_duration` (mod 1). The stance foot
/// flips each time the phase crosses 0.5 or wraps.
pub fn advance_gait(g: &GaitState, dt: f64) -> GaitState {
    let advanced = g.phase + dt / g.cycle_duration;
    let crossings = (2.0 * advanced).floor() - (2.0 * g.phase).floor();
    let mut next = *g;
    next.phase = advanced - advanced.floor();
    if crossings.rem_euclid(2.0) == 1.0 {
        next.stance = g.stance.other();
    }
    next
}

/// Horizontal anchors of the current swing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwingPlan {
    /// Ground point the swing foot left from.
    pub lift_off: Vec3,
    /// Planted position of the stance foot.
    pub stance: Vec3,
    /// Unit walking direction.
    pub forward: Vec3,
}

impl SwingPlan {
    /// Landing point one step ahead of the stance foot, on the swing foot's
    /// own lateral line; `y` is left at the lift-off height.
    pub fn landing(&self, step_length: f64) -> Vec3 {
        let ahead = (self.stance - self.lift_off).dot(self.forward) + step_length;
        let mut p = self.lift_off + self.forward * ahead;
        p.y = self.lift_off.y;
        p
    }
}

/// IK target of the swing foot for the current phase.
///
/// The foot eases horizontally from lift-off to the landing point and rides
/// `swing_apex · sin(π s)` above the support surface under it (the ground,
/// raised by the platform when one is up). From [`LANDING_START`] on it
/// rests on the support at the landing point.
pub fn swing_target(
    g: &GaitState,
    plan: &SwingPlan,
    field: &HeightField,
    platform: Option<&VirtualPlatform>,
) -> Result<Vec3> {
    let landing = plan.landing(g.step_length);
    let lift = platform.map_or(0.0, |p| p.height_above_ground);

    let s = g.swing_progress();
    let at = if s >= 1.0 { landing } else { plan.lift_off.lerp(landing, smoothstep(s)) };
    let ground = field.sample_height(at.x, at.z)?;
    // Checked even mid-swing so a walk off the grid fails before landing.
    field.sample_height(landing.x, landing.z)?;
    let bump = if s >= 1.0 { 0.0 } else { g.swing_apex * (PI * s).sin() };
    Ok(Vec3::new(at.x, ground + lift + bump, at.z))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LegPose {
    /// Thigh angle from straight down, positive toward forward.
    pub hip_angle: f64,
    /// Interior knee angle, π = straight.
    pub knee_angle: f64,
    /// Foot pitch relative to the shin that keeps the sole level.
    pub ankle_angle: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IkSolution {
    pub pose: LegPose,
    /// Foot position reached by the pose.
    pub foot: Vec3,
    /// False when the target was out of reach and got clamped.
    pub reached: bool,
}

/// Law-of-cosines leg solve in the sagittal plane through the hip.
///
/// The knee always bends toward +forward. Targets closer than
/// `|upper − lower|` or farther than `upper + lower` are pulled onto the
/// reachable shell and reported with `reached = false`. The lateral offset
/// between hip and target is carried over unchanged.
pub fn solve_two_bone_ik(hip: Vec3, target: Vec3, m: &Morphology, frame: &SagittalFrame) -> IkSolution {
    let a = m.leg_upper;
    let b = m.leg_lower;
    let rel = target - hip;
    let lateral = frame.lateral();
    let side = rel.dot(lateral);
    let goal = frame.project_dir(rel);

    let d = goal.norm();
    let (max_reach, min_reach) = (a + b, (a - b).abs());
    let dir = goal.try_normalize().unwrap_or(Vec2::new(0.0, -1.0));
    let (reach, reached) = if d > max_reach {
        (max_reach, false)
    } else if d < min_reach {
        (min_reach, false)
    } else {
        (d, true)
    };
    let foot2 = if reached { goal } else { dir * reach };

    // Knee sits `along` meters down the hip→foot line and `out` meters to its
    // forward side.
    // Angles come from atan2 of the joint positions rather than acos of the
    // law-of-cosines ratio, which loses precision near a straight leg.
    let knee2 = if reach > 0.0 {
        let along = (a * a - b * b + reach * reach) / (2.0 * reach);
        let out = (a * a - along * along).max(0.0).sqrt();
        let normal = Vec2::new(-dir.y, dir.x);
        dir * along + normal * out
    } else {
        Vec2::new(0.0, -a)
    };
    let hip_angle = knee2.x.atan2(-knee2.y);
    let shin = foot2 - knee2;
    let shin_angle = shin.x.atan2(-shin.y);
    let mut bend = hip_angle - shin_angle;
    if bend > PI {
        bend -= 2.0 * PI;
    } else if bend <= -PI {
        bend += 2.0 * PI;
    }
    let knee_angle = PI - bend.clamp(0.0, PI);
    let pose = LegPose { hip_angle, knee_angle, ankle_angle: -shin_angle };

    let foot = hip + frame.embed_dir(leg_fk(&pose, a, b)) + lateral * side;
    IkSolution { pose, foot, reached }
}

/// In-plane foot position relative to the hip for `pose`.
fn leg_fk(pose: &LegPose, upper: f64, lower: f64) -> Vec2 {
    let shin = pose.hip_angle - (PI - pose.knee_angle);
    Vec2::new(upper * pose.hip_angle.sin() + lower * shin.sin(), -upper * pose.hip_angle.cos() - lower * shin.cos())
}

/// Foot position for `pose` with the hip at `hip`.
pub fn forward_kinematics(hip: Vec3, pose: &LegPose, m: &Morphology, frame: &SagittalFrame) -> Vec3 {
    hip + frame.embed_dir(leg_fk(pose, m.leg_upper, m.leg_lower))
}

/// What a foot is standing on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SupportKind {
    Ground,
    Platform,
}

/// Height of a foot and of the surface under it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FootSample {
    pub height: f64,
    pub support_height: f64,
    pub support: SupportKind,
}

impl FootSample {
    pub fn contact(&self) -> Option<SupportKind> {
        (self.height - self.support_height <= CONTACT_TOLERANCE).then_some(self.support)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContactEvent {
    TouchDown { foot: Foot, on: SupportKind },
    LiftOff { foot: Foot },
}

impl ContactEvent {
    pub fn foot(&self) -> Foot {
        match *self {
            ContactEvent::TouchDown { foot, .. } | ContactEvent::LiftOff { foot } => foot,
        }
    }
}

/// Contact transitions between two frames, left foot first.
///
/// A foot touches down when it comes within [`CONTACT_TOLERANCE`] of its
/// support surface, or when the surface under a resting foot changes from
/// platform to ground. It lifts off when it leaves contact.
pub fn foot_contact_events(prev: &[FootSample; 2], next: &[FootSample; 2]) -> Vec<ContactEvent> {
    let mut events = Vec::new();
    for foot in Foot::BOTH {
        let k = foot.index();
        match (prev[k].contact(), next[k].contact()) {
            (None, Some(on)) => events.push(ContactEvent::TouchDown { foot, on }),
            (Some(before), Some(on)) if before != on => events.push(ContactEvent::TouchDown { foot, on }),
            (Some(_), None) => events.push(ContactEvent::LiftOff { foot }),
            _ => {}
        }
    }
    events
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vegetation::{Collapse, PlatformState};
    use proptest::prelude::*;

    fn gait(phase: f64) -> GaitState {
        GaitState { phase, stance: Foot::Left, step_length: 0.5, cycle_duration: 1.2, swing_apex: 0.05 }
    }

    #[test]
    fn advance_examples() {
        let g = advance_gait(&gait(0.2), 0.12);
        assert!((g.phase - 0.3).abs() < 1e-12);
        assert_eq!(g.stance, Foot::Left);

        let g = advance_gait(&gait(0.95), 0.12);
        assert!((g.phase - 0.05).abs() < 1e-12);
        assert_eq!(g.stance, Foot::Right);

        let g = advance_gait(&gait(0.3), 1.2);
        assert!((g.phase - 0.3).abs() < 1e-12);
        assert_eq!(g.stance, Foot::Left);

        let g = advance_gait(&gait(0.45), 0.12);
        assert_eq!(g.stance, Foot::Right);
    }

    fn flat(h: f64) -> HeightField {
        HeightField::flat(100, 100, 0.1, Vec3::ZERO, h).unwrap()
    }

    fn plan() -> SwingPlan {
        SwingPlan { lift_off: Vec3::new(2.0, 0.0, 5.1), stance: Vec3::new(2.5, 0.0, 4.9), forward: Vec3::X }
    }

    #[test]
    fn swing_target_examples() {
        let field = flat(0.0);
        // Mid-trajectory (progress 0.5): apex on flat ground.
        let mid = gait(0.5 * LANDING_START / 2.0);
        let t = swing_target(&mid, &plan(), &field, None).unwrap();
        assert!((t.y - 0.05).abs() < 1e-12);
        assert!((t.x - 2.5).abs() < 1e-12);
        assert_eq!(t.z, 5.1);

        let holding = VirtualPlatform {
            foot: Foot::Right,
            state: PlatformState::Hold,
            height_above_ground: 0.3,
            h_max: 0.3,
            collapse: Collapse::Fall { speed: 2.0 },
        };
        let landing = gait(0.45);
        let t = swing_target(&landing, &plan(), &field, Some(&holding)).unwrap();
        assert!((t.y - 0.3).abs() < 1e-12);
        assert!((t.x - 3.0).abs() < 1e-12);

        let mut carved = flat(0.0);
        let settings = crate::heightfield::PrintSettings::default();
        let mud = crate::heightfield::TerrainMaterial::new("mud", 0.004, 0.0, 0.0).unwrap();
        let stamp = crate::heightfield::FootprintStamp {
            center: Vec3::new(3.0, 0.0, 5.1),
            half_length: 0.3,
            half_width: 0.2,
            yaw: 0.0,
            sole_height: 0.0,
        };
        for _ in 0..10 {
            carved.stamp_footprint(&stamp, &mud, &settings);
        }
        let t = swing_target(&landing, &plan(), &carved, None).unwrap();
        assert!((t.y + 0.04).abs() < 1e-12, "{t:?}");

        let off = SwingPlan { stance: Vec3::new(9.8, 0.0, 5.0), ..plan() };
        assert!(swing_target(&landing, &off, &field, None).is_err());
    }

    #[test]
    fn swing_clears_sloped_ground_and_rising_platform() {
        let field = crate::heightfield::generate_slope(100, 100, 0.1, -0.3, 0, 0.0).unwrap();
        let mut rising = VirtualPlatform {
            foot: Foot::Right,
            state: PlatformState::Rising,
            height_above_ground: 0.0,
            h_max: 0.3,
            collapse: Collapse::Instant,
        };
        for k in 1..48 {
            let g = gait(k as f64 / 100.0);
            let s = g.swing_progress();
            rising.height_above_ground = 0.3 * (s / 0.5).min(1.0);
            for pl in [None, Some(&rising)] {
                let t = swing_target(&g, &plan(), &field, pl).unwrap();
                let support = field.sample_height(t.x, t.z).unwrap() + pl.map_or(0.0, |p| p.height_above_ground);
                let clearance = t.y - support;
                if s < 1.0 {
                    assert!((clearance - 0.05 * (PI * s).sin()).abs() < 1e-12);
                    assert!(clearance > CONTACT_TOLERANCE);
                } else {
                    assert_eq!(clearance, 0.0);
                }
            }
        }
    }

    fn leg() -> Morphology {
        Morphology { leg_upper: 0.45, leg_lower: 0.45, ..Morphology::scaled(1.7) }
    }

    fn frame() -> SagittalFrame {
        SagittalFrame::new(Vec3::ZERO, Vec3::X, Vec3::Y).unwrap()
    }

    #[test]
    fn ik_examples() {
        let hip = Vec3::new(0.0, 1.0, 0.1);
        let straight = solve_two_bone_ik(hip, hip - Vec3::Y * 0.9, &leg(), &frame());
        assert!(straight.reached);
        assert!((straight.pose.knee_angle - PI).abs() < 1e-7);
        assert!((straight.foot - (hip - Vec3::Y * 0.9)).norm() < 1e-12);

        let bent_target = hip - Vec3::Y * (0.45 * 2f64.sqrt());
        let bent = solve_two_bone_ik(hip, bent_target, &leg(), &frame());
        assert!((bent.pose.knee_angle - PI / 2.0).abs() < 1e-12);
        assert!((bent.foot - bent_target).norm() < 1e-12);
        // Knee ahead of the hip–foot line.
        let knee_x = 0.45 * bent.pose.hip_angle.sin();
        assert!(knee_x > 0.0);

        let far = solve_two_bone_ik(hip, hip + Vec3::new(0.0, -1.2, 0.0), &leg(), &frame());
        assert!(!far.reached);
        assert!(((far.foot - hip).norm() - 0.9).abs() < 1e-12);
        assert!((far.pose.knee_angle - PI).abs() < 1e-7);
    }

    #[test]
    fn ik_handles_too_close_targets() {
        let m = Morphology { leg_upper: 0.5, leg_lower: 0.3, ..Morphology::scaled(1.7) };
        let hip = Vec3::new(0.0, 1.0, 0.0);
        let s = solve_two_bone_ik(hip, hip + Vec3::new(0.05, -0.05, 0.0), &m, &frame());
        assert!(!s.reached);
        assert!(((s.foot - hip).norm() - 0.2).abs() < 1e-9);
        let s = solve_two_bone_ik(hip, hip, &leg(), &frame());
        assert!(s.pose.knee_angle.abs() < 1e-12);
    }

    #[test]
    fn contact_event_examples() {
        let sample = |height, support_height, support| FootSample { height, support_height, support };
        let ground = sample(0.0, 0.0, SupportKind::Ground);

        let prev = [sample(0.35, 0.3, SupportKind::Platform), ground];
        let next = [sample(0.29, 0.3, SupportKind::Platform), ground];
        assert_eq!(
            foot_contact_events(&prev, &next),
            vec![ContactEvent::TouchDown { foot: Foot::Left, on: SupportKind::Platform }]
        );

        assert!(foot_contact_events(&[ground, ground], &[ground, ground]).is_empty());

        let up = sample(0.1, 0.0, SupportKind::Ground);
        let events = foot_contact_events(&[up, up], &[ground, ground]);
        assert_eq!(
            events,
            vec![
                ContactEvent::TouchDown { foot: Foot::Left, on: SupportKind::Ground },
                ContactEvent::TouchDown { foot: Foot::Right, on: SupportKind::Ground },
            ]
        );

        let events = foot_contact_events(&[ground, ground], &[ground, up]);
        assert_eq!(events, vec![ContactEvent::LiftOff { foot: Foot::Right }]);

        let on_platform = sample(0.0, 0.0, SupportKind::Platform);
        let events = foot_contact_events(&[on_platform, ground], &[ground, ground]);
        assert_eq!(events, vec![ContactEvent::TouchDown { foot: Foot::Left, on: SupportKind::Ground }]);
    }

    #[test]
    fn morphology_defaults_are_valid() {
        for h in [1.0, 1.3, 1.7, 1.9] {
            Morphology::scaled(h).validate().unwrap();
        }
        let bad = Morphology { leg_upper: 0.8, ..Morphology::scaled(1.7) };
        assert!(bad.validate().is_err());
    }

    proptest! {
        #[test]
        fn fk_of_ik_reproduces_reachable_targets(
            r in 0.0f64..=1.0, ang in -PI..PI, lat in -0.2f64..0.2,
            upper in 0.2f64..0.6, lower in 0.2f64..0.6, heading in 0.0f64..std::f64::consts::TAU,
        ) {
            let m = Morphology { leg_upper: upper, leg_lower: lower, ..Morphology::scaled(1.7) };
            let fwd = Vec3::new(heading.cos(), 0.0, heading.sin());
            let f = SagittalFrame::new(Vec3::ZERO, fwd, Vec3::Y).unwrap();
            let lo = (upper - lower).abs();
            let d = lo + r * (upper + lower - lo);
            let hip = Vec3::new(1.0, 2.0, -3.0);
            let target = hip + f.embed_dir(Vec2::new(d * ang.sin(), -d * ang.cos())) + f.lateral() * lat;
            let s = solve_two_bone_ik(hip, target, &m, &f);
            prop_assert!(s.reached);
            prop_assert!((s.foot - target).norm() < 1e-9);
            let fk = forward_kinematics(hip, &s.pose, &m, &f) + f.lateral() * lat;
            prop_assert!((fk - target).norm() < 1e-9);
            prop_assert!((0.0..=PI).contains(&s.pose.knee_angle));
        }
    }
}
