//! Grass layer: blade displacement around the feet, the virtual platforms
//! that stand in for perceived ground, and the swing-gain ramp.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::gait::{ContactEvent, Foot, SupportKind};
use crate::heightfield::HeightField;
use crate::math::{down_vector, Vec3};

/// Grass height at which the swing gain reaches its floor (m).
pub const MEDIUM_GRASS: f64 = 0.9;

/// Height of short grass (m).
pub const SMALL_GRASS: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Blade {
    pub base: Vec3,
    pub height: f64,
    /// Current displacement of the tip from its rest position.
    pub tip_offset: Vec3,
}

impl Blade {
    pub fn rest_tip(&self) -> Vec3 {
        self.base + Vec3::Y * self.height
    }

    pub fn tip(&self) -> Vec3 {
        self.rest_tip() + self.tip_offset
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VegetationLayer {
    pub blades: Vec<Blade>,
    pub class_height: f64,
}

impl VegetationLayer {
    /// Scatters blades on a jittered grid of `density` blades per m² over the
    /// whole field. Blade heights vary in `[0.85, 1] × class_height`.
    pub fn scatter(field: &HeightField, class_height: f64, density: f64, seed: u64) -> Result<Self> {
        if !(class_height.is_finite() && class_height > 0.0) {
            return Err(Error::InvalidParameter(format!("grass height must be positive, got {class_height}")));
        }
        if !(density.is_finite() && density > 0.0) {
            return Err(Error::InvalidParameter(format!("blade density must be positive, got {density}")));
        }
        let spacing = density.sqrt().recip();
        let (ex, ez) = field.extent();
        let cols = (ex / spacing).floor() as usize;
        let rows = (ez / spacing).floor() as usize;
        let origin = field.origin();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut blades = Vec::with_capacity(cols * rows);
        for r in 0..rows {
            for c in 0..cols {
                let x = origin.x + (c as f64 + rng.gen_range(0.0..1.0)) * spacing;
                let z = origin.z + (r as f64 + rng.gen_range(0.0..1.0)) * spacing;
                let height = class_height * rng.gen_range(0.85..=1.0);
                let y = field.sample_height(x, z)?;
                blades.push(Blade { base: Vec3::new(x, y, z), height, tip_offset: Vec3::ZERO });
            }
        }
        Ok(Self { blades, class_height })
    }

    /// One row per blade: `id base_x base_y base_z tip_x tip_y tip_z`.
    pub fn table(&self) -> String {
        let mut out = String::with_capacity(self.blades.len() * 96);
        out.push_str("# id base_x base_y base_z tip_x tip_y tip_z\n");
        for (id, b) in self.blades.iter().enumerate() {
            let t = b.tip();
            let _ =
                writeln!(out, "{id} {:.6} {:.6} {:.6} {:.6} {:.6} {:.6}", b.base.x, b.base.y, b.base.z, t.x, t.y, t.z);
        }
        out
    }
}

/// Magnitude and reach of the foot's push on nearby blades.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeformParams {
    /// Largest translation (m).
    pub t_max: f64,
    /// Falloff of the translation per meter of distance.
    pub gamma: f64,
}

impl Default for DeformParams {
    fn default() -> Self {
        Self { t_max: 0.3, gamma: 1.5 }
    }
}

impl DeformParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.t_max.is_finite() && self.t_max > 0.0) {
            return Err(Error::InvalidParameter(format!("t_max must be positive, got {}", self.t_max)));
        }
        if !(self.gamma.is_finite() && self.gamma > 0.0) {
            return Err(Error::InvalidParameter(format!("gamma must be positive, got {}", self.gamma)));
        }
        Ok(())
    }

    /// Distance beyond which the push vanishes.
    pub fn radius(&self) -> f64 {
        self.t_max / self.gamma
    }
}

/// Translation of a point `p` pushed by a foot at `foot`.
///
/// The magnitude falls linearly from `t_max` at the foot to zero at
/// `t_max / γ`; the direction is away from the foot with its vertical
/// component forced downward. At the foot itself the push is straight down.
pub fn displacement(p: Vec3, foot: Vec3, params: &DeformParams) -> Vec3 {
    let d = p - foot;
    let dist = d.norm();
    if dist >= params.radius() {
        return Vec3::ZERO;
    }
    let magnitude = (params.t_max - params.gamma * dist).clamp(0.0, params.t_max);
    if dist == 0.0 {
        return Vec3::new(0.0, -params.t_max, 0.0);
    }
    down_vector(d) * (magnitude / dist)
}

/// Recomputes every tip offset from rest as the summed push of all `feet`,
/// limited to the blade's height.
pub fn deform_blades(layer: &mut VegetationLayer, feet: &[Vec3], params: &DeformParams) {
    for blade in &mut layer.blades {
        let tip = blade.rest_tip();
        let mut offset = feet.iter().fold(Vec3::ZERO, |acc, f| acc + displacement(tip, *f, params));
        let n = offset.norm();
        if n > blade.height {
            offset = offset * (blade.height / n);
        }
        blade.tip_offset = offset;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlatformState {
    Inactive,
    Rising,
    Hold,
    Collapsing,
}

impl PlatformState {
    pub fn name(self) -> &'static str {
        match self {
            PlatformState::Inactive => "inactive",
            PlatformState::Rising => "rising",
            PlatformState::Hold => "hold",
            PlatformState::Collapsing => "collapsing",
        }
    }
}

/// How a platform gives way once the foot lands on it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Collapse {
    /// Drops at `speed` m/s.
    Fall { speed: f64 },
    /// Vanishes on the contact frame.
    Instant,
}

/// A fake ground under one foot that rises while the foot lifts, waits at
/// `h_max` while it comes down, and gives way when the foot lands on it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VirtualPlatform {
    pub foot: Foot,
    pub state: PlatformState,
    pub height_above_ground: f64,
    pub h_max: f64,
    pub collapse: Collapse,
}

impl VirtualPlatform {
    /// Platform for grass of `class_height`, topping out at a third of it.
    pub fn for_grass(foot: Foot, class_height: f64, collapse: Collapse) -> Self {
        Self { foot, state: PlatformState::Inactive, height_above_ground: 0.0, h_max: class_height / 3.0, collapse }
    }

    pub fn is_active(&self) -> bool {
        self.state != PlatformState::Inactive
    }

    fn start_collapse(mut self, dt: f64) -> Self {
        match self.collapse {
            Collapse::Instant => {
                self.height_above_ground = 0.0;
                self.state = PlatformState::Inactive;
            }
            Collapse::Fall { speed } => {
                self.state = PlatformState::Collapsing;
                self = self.fall(speed, dt);
            }
        }
        self
    }

    fn fall(mut self, speed: f64, dt: f64) -> Self {
        self.height_above_ground = (self.height_above_ground - speed * dt).max(0.0);
        if self.height_above_ground == 0.0 {
            self.state = PlatformState::Inactive;
        }
        self
    }
}

/// Advances a platform by one frame.
///
/// `swing_progress` is the foot's progress along its swing trajectory, or
/// `None` while it is the stance foot; the first half of the trajectory is
/// the upward motion. `contact` is the foot's contact event from the previous
/// frame, if any.
pub fn update_platform(
    pl: &VirtualPlatform,
    swing_progress: Option<f64>,
    contact: Option<ContactEvent>,
    dt: f64,
) -> VirtualPlatform {
    let landed =
        matches!(contact, Some(ContactEvent::TouchDown { on: SupportKind::Platform, foot }) if foot == pl.foot);
    let mut next = *pl;
    match pl.state {
        PlatformState::Inactive => {
            if let Some(s) = swing_progress {
                next = next.raise(s);
            }
        }
        PlatformState::Rising | PlatformState::Hold if landed => next = next.start_collapse(dt),
        PlatformState::Rising => match swing_progress {
            Some(s) => next = next.raise(s),
            // Swing ended before the foot met the platform.
            None => next = next.start_collapse(dt),
        },
        PlatformState::Hold => {
            if swing_progress.is_none() {
                next = next.start_collapse(dt);
            }
        }
        PlatformState::Collapsing => {
            next = match pl.collapse {
                Collapse::Fall { speed } => next.fall(speed, dt),
                Collapse::Instant => next.start_collapse(dt),
            };
        }
    }
    next
}

impl VirtualPlatform {
    fn raise(mut self, progress: f64) -> Self {
        if progress < 0.5 {
            self.state = PlatformState::Rising;
            self.height_above_ground = self.h_max * (progress / 0.5);
        } else {
            self.state = PlatformState::Hold;
            self.height_above_ground = self.h_max;
        }
        self
    }
}

/// Swing gain for grass of `class_height`: linear from `base_beta` with no
/// grass to `min_beta` at medium grass and above.
pub fn beta_for_vegetation(class_height: f64, base_beta: f64, min_beta: f64) -> f64 {
    let t = (class_height / MEDIUM_GRASS).clamp(0.0, 1.0);
    base_beta + (min_beta - base_beta) * t
}
