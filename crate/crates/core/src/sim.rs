//! Fixed-timestep world: gait, platforms, IK, footprints, grass and balance,
//! in that order every frame.

use std::fmt::Write as _;
use std::fs;
use std::io::BufWriter;
use std::path::Path;
use std::time::Instant;

use crate::balance::{compute_support, ik_offset_correction, step_proxy, BodyState, ControllerParams};
use crate::error::{Error, Result};
use crate::export::{write_obj, write_pgm};
use crate::gait::{
    advance_gait, foot_contact_events, solve_two_bone_ik, swing_target, ContactEvent, Foot, FootSample, GaitState,
    SupportKind, SwingPlan,
};
use crate::heightfield::{generate_slope, FootprintStamp, HeightField};
use crate::math::{SagittalFrame, Vec3};
use crate::scenario::Scenario;
use crate::vegetation::{
    beta_for_vegetation, deform_blades, update_platform, PlatformState, VegetationLayer, VirtualPlatform,
};

/// Environment variable that strips wall-clock columns from traces.
pub const DETERMINISTIC_ENV: &str = "SOFTSTEP_DETERMINISTIC";

/// Runs stop once a landing point comes this close to the far edge (m).
pub const EDGE_MARGIN: f64 = 0.5;

/// Largest vertical pelvis shift built up from IK corrections (m).
pub const MAX_PELVIS_OFFSET: f64 = 0.15;

/// Per-frame decay of the accumulated pelvis shift.
const PELVIS_RELAX: f64 = 0.95;

/// Which interaction layers are live. Turning both off gives the rigid
/// baseline the deformation layers are compared against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Layers {
    pub deformation: bool,
    pub vegetation: bool,
}

impl Default for Layers {
    fn default() -> Self {
        Self { deformation: true, vegetation: true }
    }
}

impl Layers {
    pub const BASELINE: Layers = Layers { deformation: false, vegetation: false };
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FootTrace {
    pub position: Vec3,
    pub target: Vec3,
    pub contact: Option<SupportKind>,
    pub platform: PlatformState,
    pub platform_height: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameTrace {
    pub frame: u64,
    pub time: f64,
    pub com: Vec3,
    pub tilt: f64,
    pub tilt_rate: f64,
    /// Controller torque applied this frame (N·m).
    pub torque: f64,
    pub beta: f64,
    pub feet: [FootTrace; 2],
    /// Volume removed and added by footprints this frame (m³).
    pub carved: f64,
    pub deposited: f64,
    /// Wall-clock time of the step (ms).
    pub step_ms: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[allow(clippy::large_enum_variant)]
pub enum StepOutcome {
    Advanced(FrameTrace),
    /// The next landing point is too close to the far edge; nothing changed.
    EdgeReached,
}

#[derive(Debug, thiserror::Error)]
#[error("frame {frame}: {error}")]
pub struct StepError {
    pub frame: u64,
    #[source]
    pub error: Error,
}

pub struct World {
    field: HeightField,
    scenario: Scenario,
    layers: Layers,
    vegetation: Option<VegetationLayer>,
    platforms: Option<[VirtualPlatform; 2]>,
    gait: GaitState,
    plan: SwingPlan,
    body: BodyState,
    root: Vec3,
    forward: Vec3,
    feet: [Vec3; 2],
    samples: [FootSample; 2],
    events: Vec<ContactEvent>,
    /// Ground height under each foot at its last touchdown.
    print_ref: [Option<f64>; 2],
    pelvis_offset: f64,
    frame: u64,
}

impl World {
    pub fn new(scenario: &Scenario) -> Result<Self> {
        Self::with_layers(scenario, Layers::default())
    }

    pub fn with_layers(scenario: &Scenario, layers: Layers) -> Result<Self> {
        scenario.validate()?;
        let t = &scenario.terrain;
        let field = generate_slope(t.samples, t.samples, t.cell_size(), t.slope, t.noise_seed, t.noise_amp)?;

        let vegetation = match &scenario.vegetation {
            Some(v) => Some(VegetationLayer::scatter(&field, v.class_height, v.density, v.seed)?),
            None => None,
        };
        let platforms = scenario
            .vegetation
            .as_ref()
            .map(|v| Foot::BOTH.map(|f| VirtualPlatform::for_grass(f, v.class_height, v.collapse)));

        let forward = Vec3::X;
        let lateral = forward.cross(Vec3::Y);
        let (_, ez) = field.extent();
        let origin = field.origin();
        let mut root = Vec3::new(origin.x + scenario.run.start_offset, 0.0, origin.z + ez / 2.0);
        root.y = field.sample_height(root.x, root.z)?;

        let gait = GaitState::new(&scenario.gait, Foot::Left);
        let m = &scenario.character.morphology;
        // Half cycles start just after double support, with the stance foot
        // 0.45 steps ahead of the root and the swing foot 0.55 behind.
        let place = |foot: Foot, ahead: f64| -> Result<Vec3> {
            let p = root + forward * (ahead * gait.step_length) + lateral * (foot.side() * m.hip_spacing / 2.0);
            Ok(Vec3::new(p.x, field.sample_height(p.x, p.z)?, p.z))
        };
        let mut feet = [Vec3::ZERO; 2];
        feet[gait.stance.index()] = place(gait.stance, 0.45)?;
        feet[gait.swing().index()] = place(gait.swing(), -0.55)?;
        let plan = SwingPlan { lift_off: feet[gait.swing().index()], stance: feet[gait.stance.index()], forward };

        let c = &scenario.character;
        let lever = m.pelvis_height + c.com_height_offset;
        let frame = SagittalFrame::new(root, forward, Vec3::Y)?;
        let body = BodyState {
            com: crate::balance::com_anchor(root, c.initial_tilt, lever, &frame),
            tilt: c.initial_tilt,
            angular_velocity: c.initial_tilt_rate,
            linear_velocity: forward * scenario.gait.speed(),
            mass: c.mass,
            inertia: c.inertia,
            com_height_offset: c.com_height_offset,
        };
        let samples = feet.map(|f| FootSample { height: f.y, support_height: f.y, support: SupportKind::Ground });

        Ok(Self {
            field,
            scenario: scenario.clone(),
            layers,
            vegetation,
            platforms,
            gait,
            plan,
            body,
            root,
            forward,
            feet,
            samples,
            events: Vec::new(),
            print_ref: feet.map(|f| Some(f.y)),
            pelvis_offset: 0.0,
            frame: 0,
        })
    }

    pub fn field(&self) -> &HeightField {
        &self.field
    }

    pub fn vegetation(&self) -> Option<&VegetationLayer> {
        self.vegetation.as_ref()
    }

    pub fn platforms(&self) -> Option<&[VirtualPlatform; 2]> {
        self.platforms.as_ref()
    }

    pub fn body(&self) -> &BodyState {
        &self.body
    }

    pub fn feet(&self) -> [Vec3; 2] {
        self.feet
    }

    pub fn gait(&self) -> &GaitState {
        &self.gait
    }

    /// Frames stepped so far.
    pub fn frame(&self) -> u64 {
        self.frame
    }

    pub fn step(&mut self) -> std::result::Result<StepOutcome, StepError> {
        let start = Instant::now();
        let frame = self.frame + 1;
        match self.advance(frame) {
            Ok(Some(mut trace)) => {
                trace.step_ms = start.elapsed().as_secs_f64() * 1e3;
                self.frame = frame;
                Ok(StepOutcome::Advanced(trace))
            }
            Ok(None) => Ok(StepOutcome::EdgeReached),
            Err(error) => Err(StepError { frame, error }),
        }
    }

    fn platform_height(&self, foot: Foot) -> f64 {
        self.platforms.map_or(0.0, |p| p[foot.index()].height_above_ground)
    }

    fn support_kind(&self, foot: Foot) -> SupportKind {
        match self.platforms {
            Some(p) if p[foot.index()].is_active() && p[foot.index()].height_above_ground > 0.0 => {
                SupportKind::Platform
            }
            _ => SupportKind::Ground,
        }
    }

    fn advance(&mut self, frame: u64) -> Result<Option<FrameTrace>> {
        let s = &self.scenario;
        let dt = s.run.dt;
        let m = s.character.morphology;

        // 1. Gait phase; a new half cycle plans the next swing.
        let gait = advance_gait(&self.gait, dt);
        let plan = if gait.stance != self.gait.stance {
            SwingPlan {
                lift_off: self.feet[gait.swing().index()],
                stance: self.feet[gait.stance.index()],
                forward: self.forward,
            }
        } else {
            self.plan
        };
        let landing = plan.landing(gait.step_length);
        let far = self.field.origin().x + self.field.extent().0;
        if far - landing.x < EDGE_MARGIN {
            return Ok(None);
        }
        self.gait = gait;
        self.plan = plan;
        let swing = gait.swing();

        // 2. Platforms react to last frame's contacts.
        if self.layers.vegetation {
            if let Some(pls) = &mut self.platforms {
                for foot in Foot::BOTH {
                    let progress = (foot == swing).then(|| gait.swing_progress());
                    let event = self.events.iter().copied().find(|e| e.foot() == foot);
                    pls[foot.index()] = update_platform(&pls[foot.index()], progress, event, dt);
                }
            }
        }

        // 3. Foot targets.
        let prev_root = self.root;
        let mut root = prev_root + self.forward * (s.gait.speed() * dt);
        root.y = self.field.sample_height(root.x, root.z)?;
        let root_velocity = (root - prev_root) / dt;
        self.root = root;

        let moving = self.body.linear_velocity.horizontal();
        let heading = if moving.dot(self.forward) > 0.0 { moving } else { Vec3::ZERO };
        let frame_ref = SagittalFrame::from_velocity(self.body.com, heading, self.forward);
        self.forward = frame_ref.forward();

        let (sin_t, cos_t) = self.body.tilt.sin_cos();
        let pelvis =
            self.body.com - (frame_ref.forward() * sin_t + frame_ref.up() * cos_t) * self.body.com_height_offset;
        let hips = Foot::BOTH.map(|f| pelvis + frame_ref.lateral() * (f.side() * m.hip_spacing / 2.0));

        let mut targets = [Vec3::ZERO; 2];
        for foot in Foot::BOTH {
            let k = foot.index();
            targets[k] = if foot == swing {
                let platform = if self.layers.vegetation { self.platforms.as_ref().map(|p| &p[k]) } else { None };
                swing_target(&gait, &plan, &self.field, platform)?
            } else {
                let anchor = plan.stance;
                let ground = self.field.raycast_down(anchor.x, anchor.z, hips[k].y.max(anchor.y) + 1.0)?;
                ground + Vec3::Y * self.platform_height(foot)
            };
        }

        // 4. Leg IK.
        for foot in Foot::BOTH {
            let k = foot.index();
            self.feet[k] = solve_two_bone_ik(hips[k], targets[k], &m, &frame_ref).foot;
        }

        // 5. Contacts.
        let mut samples = self.samples;
        for foot in Foot::BOTH {
            let k = foot.index();
            let p = self.feet[k];
            let ground = self.field.sample_height(p.x, p.z)?;
            samples[k] = FootSample {
                height: p.y,
                support_height: ground + self.platform_height(foot),
                support: self.support_kind(foot),
            };
        }
        let events = foot_contact_events(&self.samples, &samples);
        for e in &events {
            let k = e.foot().index();
            match *e {
                ContactEvent::TouchDown { on: SupportKind::Ground, .. } => {
                    self.print_ref[k] = Some(samples[k].support_height);
                }
                ContactEvent::TouchDown { on: SupportKind::Platform, .. } => self.print_ref[k] = None,
                ContactEvent::LiftOff { .. } => self.print_ref[k] = None,
            }
        }
        self.samples = samples;
        self.events = events;

        // 6. Footprints.
        let (mut carved, mut deposited) = (0.0, 0.0);
        if self.layers.deformation {
            let yaw = self.forward.z.atan2(self.forward.x);
            for foot in Foot::BOTH {
                let k = foot.index();
                if samples[k].contact() != Some(SupportKind::Ground) {
                    continue;
                }
                let stamp = FootprintStamp {
                    center: self.feet[k],
                    half_length: m.foot_half_length,
                    half_width: m.foot_half_width,
                    yaw,
                    sole_height: self.print_ref[k].unwrap_or(samples[k].support_height),
                };
                let report = self.field.stamp_footprint(&stamp, &s.material, &s.print);
                carved += report.carved;
                deposited += report.deposited;
            }
        }

        // 7. Grass.
        if self.layers.vegetation {
            if let (Some(layer), Some(v)) = (&mut self.vegetation, &s.vegetation) {
                deform_blades(layer, &self.feet, &v.deform);
            }
        }

        // 8. Support and torque gains.
        let class_height = match (&s.vegetation, self.layers.vegetation) {
            (Some(v), true) => v.class_height,
            _ => 0.0,
        };
        let beta = beta_for_vegetation(class_height, s.controller.beta, s.min_beta);
        let params = ControllerParams { beta, ..s.controller };
        let support = compute_support(self.feet, &frame_ref, &self.field)?;

        // 9. Body update and pelvis correction.
        let lever = m.pelvis_height + s.character.com_height_offset;
        let anchor_root = root + frame_ref.up() * self.pelvis_offset;
        let step = step_proxy(&self.body, &support, &params, &frame_ref, anchor_root, root_velocity, lever, dt)?;
        self.body = step.body;
        let correction = ik_offset_correction(self.feet, targets).dot(frame_ref.up());
        self.pelvis_offset =
            (self.pelvis_offset * PELVIS_RELAX + correction).clamp(-MAX_PELVIS_OFFSET, MAX_PELVIS_OFFSET);

        // 10. Trace.
        let feet = Foot::BOTH.map(|foot| {
            let k = foot.index();
            let (platform, platform_height) = match &self.platforms {
                Some(p) => (p[k].state, p[k].height_above_ground),
                None => (PlatformState::Inactive, 0.0),
            };
            FootTrace {
                position: self.feet[k],
                target: targets[k],
                contact: samples[k].contact(),
                platform,
                platform_height,
            }
        });
        Ok(Some(FrameTrace {
            frame,
            time: frame as f64 * dt,
            com: self.body.com,
            tilt: self.body.tilt,
            tilt_rate: self.body.angular_velocity,
            torque: step.control_torque,
            beta,
            feet,
            carved,
            deposited,
            step_ms: 0.0,
        }))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum EndReason {
    Completed,
    EdgeReached,
    FellOver { frame: u64, tilt: f64 },
    Failed { frame: u64, message: String },
}

impl EndReason {
    pub fn name(&self) -> &'static str {
        match self {
            EndReason::Completed => "completed",
            EndReason::EdgeReached => "edge_reached",
            EndReason::FellOver { .. } => "fell_over",
            EndReason::Failed { .. } => "failed",
        }
    }

    /// Process exit status for a run that ended this way.
    pub fn exit_code(&self) -> i32 {
        match self {
            EndReason::Completed | EndReason::EdgeReached => 0,
            EndReason::FellOver { .. } => 2,
            EndReason::Failed { .. } => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Metrics {
    pub frames: usize,
    pub end_reason: EndReason,
    pub step_time_median_ms: f64,
    pub step_time_p99_ms: f64,
    pub total_carved_m3: f64,
    pub total_deposited_m3: f64,
    pub initial_volume_m3: f64,
    pub final_volume_m3: f64,
    pub max_abs_tilt_rad: f64,
}

impl Metrics {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "frames: {}", self.frames);
        let _ = writeln!(s, "end_reason: {}", self.end_reason.name());
        let _ = writeln!(s, "fell_over: {}", matches!(self.end_reason, EndReason::FellOver { .. }));
        match &self.end_reason {
            EndReason::FellOver { frame, .. } | EndReason::Failed { frame, .. } => {
                let _ = writeln!(s, "end_frame: {frame}");
            }
            _ => {}
        }
        let _ = writeln!(s, "step_time_median_ms: {:.6}", self.step_time_median_ms);
        let _ = writeln!(s, "step_time_p99_ms: {:.6}", self.step_time_p99_ms);
        let _ = writeln!(s, "total_carved_m3: {:.12e}", self.total_carved_m3);
        let _ = writeln!(s, "total_deposited_m3: {:.12e}", self.total_deposited_m3);
        let _ = writeln!(s, "initial_volume_m3: {:.12e}", self.initial_volume_m3);
        let _ = writeln!(s, "final_volume_m3: {:.12e}", self.final_volume_m3);
        let _ = writeln!(s, "max_abs_tilt_rad: {:.9e}", self.max_abs_tilt_rad);
        s
    }
}

/// Median and 99th percentile of `samples` (nearest rank).
pub fn percentiles(samples: &[f64]) -> (f64, f64) {
    if samples.is_empty() {
        return (0.0, 0.0);
    }
    let mut v = samples.to_vec();
    v.sort_by(f64::total_cmp);
    let rank = |q: f64| v[((q * v.len() as f64).ceil() as usize).clamp(1, v.len()) - 1];
    (rank(0.5), rank(0.99))
}

pub struct RunArtifacts {
    pub scenario: Scenario,
    pub trace: Vec<FrameTrace>,
    pub initial_field: HeightField,
    pub final_field: HeightField,
    pub vegetation: Option<VegetationLayer>,
    /// Blade tables taken every `blade_table_stride` frames.
    pub blade_tables: Vec<(u64, String)>,
    pub metrics: Metrics,
}

pub fn run(scenario: &Scenario) -> Result<RunArtifacts> {
    run_with_layers(scenario, Layers::default())
}

/// Steps a fresh world for the scenario's duration, stopping early at the far
/// edge or on the first failing frame.
pub fn run_with_layers(scenario: &Scenario, layers: Layers) -> Result<RunArtifacts> {
    let mut world = World::with_layers(scenario, layers)?;
    let initial_field = world.field().clone();
    let frames = (scenario.run.duration / scenario.run.dt).round() as u64;
    let stride = scenario.run.blade_table_stride as u64;
    let mut trace = Vec::with_capacity(frames as usize);
    let mut blade_tables = Vec::new();
    let mut end = EndReason::Completed;
    for _ in 0..frames {
        match world.step() {
            Ok(StepOutcome::Advanced(t)) => {
                if stride > 0 && t.frame % stride == 0 {
                    if let Some(v) = world.vegetation() {
                        blade_tables.push((t.frame, v.table()));
                    }
                }
                trace.push(t);
            }
            Ok(StepOutcome::EdgeReached) => {
                end = EndReason::EdgeReached;
                break;
            }
            Err(StepError { frame, error: Error::FallOver { tilt } }) => {
                end = EndReason::FellOver { frame, tilt };
                break;
            }
            Err(StepError { frame, error }) => {
                end = EndReason::Failed { frame, message: error.to_string() };
                break;
            }
        }
    }

    let times: Vec<f64> = trace.iter().map(|t| t.step_ms).collect();
    let (median, p99) = percentiles(&times);
    let metrics = Metrics {
        frames: trace.len(),
        end_reason: end,
        step_time_median_ms: median,
        step_time_p99_ms: p99,
        total_carved_m3: trace.iter().map(|t| t.carved).sum(),
        total_deposited_m3: trace.iter().map(|t| t.deposited).sum(),
        initial_volume_m3: initial_field.total_volume(),
        final_volume_m3: world.field().total_volume(),
        max_abs_tilt_rad: trace.iter().fold(scenario.character.initial_tilt.abs(), |a, t| a.max(t.tilt.abs())),
    };
    Ok(RunArtifacts {
        scenario: scenario.clone(),
        trace,
        initial_field,
        final_field: world.field().clone(),
        vegetation: world.vegetation().cloned(),
        blade_tables,
        metrics,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TraceOptions {
    /// Leave out the wall-clock column.
    pub deterministic: bool,
}

impl TraceOptions {
    pub fn from_env() -> Self {
        let deterministic = std::env::var(DETERMINISTIC_ENV).is_ok_and(|v| !v.is_empty() && v != "0");
        Self { deterministic }
    }
}

/// Float column format: 9 significant digits, no negative zero.
fn num(out: &mut String, v: f64) {
    let v = if v == 0.0 { 0.0 } else { v };
    let _ = write!(out, ",{v:.8e}");
}

fn contact_name(c: Option<SupportKind>) -> &'static str {
    match c {
        None => "none",
        Some(SupportKind::Ground) => "ground",
        Some(SupportKind::Platform) => "platform",
    }
}

pub fn trace_header(opts: TraceOptions) -> String {
    let mut cols = vec!["frame", "time", "com_x", "com_y", "com_z", "tilt", "tilt_rate", "torque", "beta"];
    let per_foot = ["x", "y", "z", "target_x", "target_y", "target_z", "contact", "platform", "platform_h"];
    let names: Vec<String> =
        ["left", "right"].iter().flat_map(|f| per_foot.iter().map(move |c| format!("{f}_{c}"))).collect();
    cols.extend(names.iter().map(String::as_str));
    cols.extend(["carved", "deposited"]);
    if !opts.deterministic {
        cols.push("step_ms");
    }
    cols.join(",")
}

/// CSV trace: a `#` line with the time step, the column header, then one
/// row per frame.
pub fn trace_csv(trace: &[FrameTrace], dt: f64, opts: TraceOptions) -> String {
    let mut out = String::with_capacity(64 + trace.len() * 480);
    let _ = writeln!(out, "# dt={dt}");
    out.push_str(&trace_header(opts));
    out.push('\n');
    for t in trace {
        let _ = write!(out, "{}", t.frame);
        for v in [t.time, t.com.x, t.com.y, t.com.z, t.tilt, t.tilt_rate, t.torque, t.beta] {
            num(&mut out, v);
        }
        for f in &t.feet {
            for v in [f.position.x, f.position.y, f.position.z, f.target.x, f.target.y, f.target.z] {
                num(&mut out, v);
            }
            let _ = write!(out, ",{},{}", contact_name(f.contact), f.platform.name());
            num(&mut out, f.platform_height);
        }
        num(&mut out, t.carved);
        num(&mut out, t.deposited);
        if !opts.deterministic {
            let _ = write!(out, ",{:.6}", t.step_ms);
        }
        out.push('\n');
    }
    out
}

impl RunArtifacts {
    pub fn trace_csv(&self, opts: TraceOptions) -> String {
        trace_csv(&self.trace, self.scenario.run.dt, opts)
    }

    /// Writes the trace, metrics, resolved scenario, height snapshots and
    /// blade tables into `dir`, creating it if needed.
    pub fn write_to(&self, dir: &Path, opts: TraceOptions) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let put = |name: &str, text: &str| {
            let path = dir.join(name);
            fs::write(&path, text).map_err(|e| Error::io(path, e))
        };
        put("trace.csv", &self.trace_csv(opts))?;
        put("metrics.txt", &self.metrics.to_text())?;
        put("scenario.ini", &self.scenario.to_text())?;

        for (stem, field) in [("initial", &self.initial_field), ("final", &self.final_field)] {
            let path = dir.join(format!("{stem}_heights.pgm"));
            let file = fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
            let mut w = BufWriter::new(file);
            let header = write_pgm(field, &mut w).map_err(|e| Error::io(&path, e))?;
            put(&format!("{stem}_heights.txt"), &header.to_text())?;
        }
        if self.scenario.run.export_obj {
            let path = dir.join("final_terrain.obj");
            let file = fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
            write_obj(&self.final_field, &mut BufWriter::new(file)).map_err(|e| Error::io(&path, e))?;
        }
        if let Some(v) = &self.vegetation {
            put("blades_final.txt", &v.table())?;
            for (frame, table) in &self.blade_tables {
                put(&format!("blades_{frame:06}.txt"), table)?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchReport {
    pub grid: usize,
    pub frames: usize,
    pub median_ms: f64,
    pub p99_ms: f64,
}

impl BenchReport {
    pub fn to_text(&self) -> String {
        format!(
            "grid: {}\nframes: {}\nmedian_ms: {:.6}\np99_ms: {:.6}\n",
            self.grid, self.frames, self.median_ms, self.p99_ms
        )
    }
}

pub const BENCH_GRIDS: [usize; 4] = [128, 256, 512, 1024];

/// Times `frames` steps of a mud walk on a 10 m terrain of `grid`² samples.
/// The world restarts whenever the walk reaches the far edge.
pub fn bench(grid: usize, frames: usize) -> Result<BenchReport> {
    if !BENCH_GRIDS.contains(&grid) {
        return Err(Error::InvalidParameter(format!("grid must be one of {BENCH_GRIDS:?}, got {grid}")));
    }
    let mud = crate::scenario::preset("mud").expect("mud preset");
    let mut scenario = Scenario::with_material(mud, 10f64.to_radians());
    scenario.terrain.samples = grid;
    scenario.run.start_offset = 0.6;
    let mut world = World::new(&scenario)?;
    let mut times = Vec::with_capacity(frames);
    while times.len() < frames {
        match world.step() {
            Ok(StepOutcome::Advanced(t)) => times.push(t.step_ms),
            Ok(StepOutcome::EdgeReached) => world = World::new(&scenario)?,
            Err(e) => return Err(e.error),
        }
    }
    let (median_ms, p99_ms) = percentiles(&times);
    Ok(BenchReport { grid, frames, median_ms, p99_ms })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heightfield::TerrainMaterial;

    fn short(material: TerrainMaterial, slope: f64, seconds: f64) -> Scenario {
        let mut s = Scenario::with_material(material, slope);
        s.terrain.samples = 128;
        s.run.duration = seconds;
        s
    }

    #[test]
    fn frame_count_follows_duration() {
        let a = run(&short(TerrainMaterial::rigid(), 0.0, 2.0)).unwrap();
        assert_eq!(a.trace.len(), 120);
        assert_eq!(a.metrics.end_reason, EndReason::Completed);
        assert!(a.trace.windows(2).all(|w| w[1].frame == w[0].frame + 1));
    }

    #[test]
    fn rigid_ground_is_untouched() {
        let a = run(&short(TerrainMaterial::rigid(), 0.0, 3.0)).unwrap();
        assert_eq!(a.initial_field.heights(), a.final_field.heights());
        assert_eq!(a.metrics.total_carved_m3, 0.0);
    }

    #[test]
    fn walk_alternates_feet_and_prints() {
        let mud = crate::scenario::preset("mud").unwrap();
        let a = run(&short(mud, 0.0, 3.0)).unwrap();
        assert!(a.metrics.total_carved_m3 > 0.0);
        let left_lifts =
            a.trace.windows(2).filter(|w| w[0].feet[0].contact.is_some() && w[1].feet[0].contact.is_none()).count();
        assert!(left_lifts >= 2, "{left_lifts}");
        let last = a.trace.last().unwrap();
        assert!(last.com.x > 1.0 + 2.0);
    }

    #[test]
    fn runs_end_at_the_far_edge() {
        let mut s = short(TerrainMaterial::rigid(), 0.0, 20.0);
        s.run.start_offset = 6.0;
        let a = run(&s).unwrap();
        assert_eq!(a.metrics.end_reason, EndReason::EdgeReached);
        assert!(a.trace.len() < 1200);
    }

    #[test]
    fn percentile_ranks() {
        let v: Vec<f64> = (1..=100).map(f64::from).collect();
        assert_eq!(percentiles(&v), (50.0, 99.0));
        assert_eq!(percentiles(&[3.0]), (3.0, 3.0));
    }

    #[test]
    fn deterministic_header_drops_timing() {
        assert!(trace_header(TraceOptions { deterministic: false }).ends_with(",step_ms"));
        assert!(trace_header(TraceOptions { deterministic: true }).ends_with(",deposited"));
    }
}
