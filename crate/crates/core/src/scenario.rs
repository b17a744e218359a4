//! Scenario files: a sectioned `key = value` text format.
//!
//! ```text
//! # comment
//! [terrain]
//! size = 10
//! samples = 512
//! slope = 0.17453292519943295
//!
//! [material]
//! preset = mud
//! ```
//!
//! Sections are `terrain`, `material`, `vegetation`, `character`,
//! `controller`, `gait` and `run`. Unknown sections and keys are rejected.
//! Lengths are in meters, times in seconds, angles in radians.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use crate::balance::ControllerParams;
use crate::error::{Error, Result};
use crate::gait::{GaitParams, Morphology};
use crate::heightfield::{PrintSettings, TerrainMaterial};
use crate::vegetation::{Collapse, DeformParams};

const PRESETS: &str = include_str!("../presets/materials.ini");

const KEYS: &[(&str, &[&str])] = &[
    ("terrain", &["size", "samples", "slope", "noise_seed", "noise_amp"]),
    ("material", &["preset", "name", "depth", "compression", "smoothness", "max_print_depth", "rim_width"]),
    ("vegetation", &["class_height", "density", "seed", "t_max", "gamma", "collapse", "collapse_speed"]),
    (
        "character",
        &[
            "total_height",
            "leg_upper",
            "leg_lower",
            "hip_spacing",
            "pelvis_height",
            "foot_half_length",
            "foot_half_width",
            "mass",
            "inertia",
            "com_height_offset",
            "initial_tilt",
            "initial_tilt_rate",
        ],
    ),
    ("controller", &["alpha", "beta", "min_beta", "angular_drag"]),
    ("gait", &["step_length", "cycle_duration", "swing_apex"]),
    ("run", &["duration", "dt", "start_offset", "blade_table_stride", "export_obj"]),
];

fn is_known(path: &str) -> bool {
    path.split_once('.').is_some_and(|(sec, key)| KEYS.iter().any(|(s, keys)| *s == sec && keys.contains(&key)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TerrainSpec {
    /// Side of the square terrain (m).
    pub size: f64,
    /// Samples per side.
    pub samples: usize,
    /// Ground slope along the walk (rad), positive uphill.
    pub slope: f64,
    pub noise_seed: u64,
    /// Amplitude of the value noise added on top of the slope (m).
    pub noise_amp: f64,
}

impl Default for TerrainSpec {
    fn default() -> Self {
        Self { size: 10.0, samples: 512, slope: 0.0, noise_seed: 1, noise_amp: 0.0 }
    }
}

impl TerrainSpec {
    pub fn cell_size(&self) -> f64 {
        self.size / self.samples as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VegetationSpec {
    pub class_height: f64,
    /// Blades per square meter.
    pub density: f64,
    pub seed: u64,
    pub deform: DeformParams,
    pub collapse: Collapse,
}

impl VegetationSpec {
    pub fn new(class_height: f64) -> Self {
        Self {
            class_height,
            density: 16.0,
            seed: 7,
            deform: DeformParams::default(),
            collapse: Collapse::Fall { speed: 2.0 },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CharacterSpec {
    pub morphology: Morphology,
    pub mass: f64,
    pub inertia: f64,
    pub com_height_offset: f64,
    pub initial_tilt: f64,
    pub initial_tilt_rate: f64,
}

impl CharacterSpec {
    pub fn new(total_height: f64) -> Self {
        Self {
            morphology: Morphology::scaled(total_height),
            mass: 2.0,
            inertia: 2.0,
            com_height_offset: 0.1,
            initial_tilt: 0.0,
            initial_tilt_rate: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunSpec {
    pub duration: f64,
    pub dt: f64,
    /// Distance of the start line from the near terrain edge (m).
    pub start_offset: f64,
    /// Frames between blade table dumps; 0 keeps only the final table.
    pub blade_table_stride: usize,
    pub export_obj: bool,
}

impl Default for RunSpec {
    fn default() -> Self {
        Self { duration: 10.0, dt: 1.0 / 60.0, start_offset: 1.0, blade_table_stride: 0, export_obj: false }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub terrain: TerrainSpec,
    pub material: TerrainMaterial,
    pub print: PrintSettings,
    pub vegetation: Option<VegetationSpec>,
    pub character: CharacterSpec,
    pub controller: ControllerParams,
    /// Swing gain reached at medium grass.
    pub min_beta: f64,
    pub gait: GaitParams,
    pub run: RunSpec,
}

impl Scenario {
    /// Walk over a 10 m, 512² terrain with the given material and slope.
    pub fn with_material(material: TerrainMaterial, slope: f64) -> Self {
        let character = CharacterSpec::new(1.7);
        Self {
            terrain: TerrainSpec { slope, ..TerrainSpec::default() },
            material,
            print: PrintSettings::default(),
            vegetation: None,
            gait: GaitParams::scaled(character.morphology.total_height),
            character,
            controller: ControllerParams::default(),
            min_beta: 4.0,
            run: RunSpec::default(),
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        Self::parse_with_overrides(text, &[])
    }

    /// Parses `text`, then replaces values with `overrides` given as
    /// `section.key=value`.
    pub fn parse_with_overrides(text: &str, overrides: &[String]) -> Result<Self> {
        let mut doc = Document::parse(text)?;
        for o in overrides {
            doc.apply_override(o)?;
        }
        let s = Self::decode(&doc)?;
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_with_overrides(&text, overrides)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |field: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::scenario(field, format!("must be positive, got {v}")))
            }
        };
        let non_negative = |field: &str, v: f64| {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                Err(Error::scenario(field, format!("must be ≥ 0, got {v}")))
            }
        };
        let finite = |field: &str, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::scenario(field, format!("must be finite, got {v}")))
            }
        };

        positive("terrain.size", self.terrain.size)?;
        if self.terrain.samples < 2 {
            return Err(Error::scenario("terrain.samples", "need at least 2 samples per side"));
        }
        if !(self.terrain.slope.abs() < std::f64::consts::FRAC_PI_2) {
            return Err(Error::scenario("terrain.slope", format!("must be within ±π/2, got {}", self.terrain.slope)));
        }
        non_negative("terrain.noise_amp", self.terrain.noise_amp)?;

        non_negative("material.depth", self.material.depth)?;
        non_negative("material.compression", self.material.compression)?;
        if !(0.0..=1.0).contains(&self.material.smoothness) {
            return Err(Error::scenario(
                "material.smoothness",
                format!("must be in [0, 1], got {}", self.material.smoothness),
            ));
        }
        non_negative("material.max_print_depth", self.print.max_print_depth)?;

        if let Some(v) = &self.vegetation {
            positive("vegetation.class_height", v.class_height)?;
            positive("vegetation.density", v.density)?;
            positive("vegetation.t_max", v.deform.t_max)?;
            positive("vegetation.gamma", v.deform.gamma)?;
            if let Collapse::Fall { speed } = v.collapse {
                positive("vegetation.collapse_speed", speed)?;
            }
        }

        let c = &self.character;
        c.morphology.validate().map_err(|e| Error::scenario("character", e.to_string()))?;
        positive("character.mass", c.mass)?;
        positive("character.inertia", c.inertia)?;
        non_negative("character.com_height_offset", c.com_height_offset)?;
        if !(c.initial_tilt.abs() < std::f64::consts::FRAC_PI_2) {
            return Err(Error::scenario(
                "character.initial_tilt",
                format!("must be within ±π/2, got {}", c.initial_tilt),
            ));
        }
        finite("character.initial_tilt_rate", c.initial_tilt_rate)?;

        non_negative("controller.alpha", self.controller.alpha)?;
        finite("controller.beta", self.controller.beta)?;
        finite("controller.min_beta", self.min_beta)?;
        non_negative("controller.angular_drag", self.controller.angular_drag)?;

        positive("gait.step_length", self.gait.step_length)?;
        positive("gait.cycle_duration", self.gait.cycle_duration)?;
        non_negative("gait.swing_apex", self.gait.swing_apex)?;

        positive("run.duration", self.run.duration)?;
        positive("run.dt", self.run.dt)?;
        if !(self.run.start_offset.is_finite()
            && self.run.start_offset > 0.0
            && self.run.start_offset < self.terrain.size)
        {
            return Err(Error::scenario(
                "run.start_offset",
                format!("must lie inside the terrain, got {}", self.run.start_offset),
            ));
        }
        Ok(())
    }

    /// Writes every field, so `parse(to_text())` gives back the same scenario.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let t = &self.terrain;
        section(&mut out, "terrain");
        kv(&mut out, "size", t.size);
        kv(&mut out, "samples", t.samples);
        kv(&mut out, "slope", t.slope);
        kv(&mut out, "noise_seed", t.noise_seed);
        kv(&mut out, "noise_amp", t.noise_amp);

        let m = &self.material;
        section(&mut out, "material");
        kv(&mut out, "name", &m.name);
        kv(&mut out, "depth", m.depth);
        kv(&mut out, "compression", m.compression);
        kv(&mut out, "smoothness", m.smoothness);
        kv(&mut out, "max_print_depth", self.print.max_print_depth);
        kv(&mut out, "rim_width", self.print.rim_width);

        section(&mut out, "vegetation");
        match &self.vegetation {
            None => kv(&mut out, "class_height", 0),
            Some(v) => {
                kv(&mut out, "class_height", v.class_height);
                kv(&mut out, "density", v.density);
                kv(&mut out, "seed", v.seed);
                kv(&mut out, "t_max", v.deform.t_max);
                kv(&mut out, "gamma", v.deform.gamma);
                match v.collapse {
                    Collapse::Instant => kv(&mut out, "collapse", "instant"),
                    Collapse::Fall { speed } => {
                        kv(&mut out, "collapse", "fall");
                        kv(&mut out, "collapse_speed", speed);
                    }
                }
            }
        }

        let c = &self.character;
        let mo = &c.morphology;
        section(&mut out, "character");
        kv(&mut out, "total_height", mo.total_height);
        kv(&mut out, "leg_upper", mo.leg_upper);
        kv(&mut out, "leg_lower", mo.leg_lower);
        kv(&mut out, "hip_spacing", mo.hip_spacing);
        kv(&mut out, "pelvis_height", mo.pelvis_height);
        kv(&mut out, "foot_half_length", mo.foot_half_length);
        kv(&mut out, "foot_half_width", mo.foot_half_width);
        kv(&mut out, "mass", c.mass);
        kv(&mut out, "inertia", c.inertia);
        kv(&mut out, "com_height_offset", c.com_height_offset);
        kv(&mut out, "initial_tilt", c.initial_tilt);
        kv(&mut out, "initial_tilt_rate", c.initial_tilt_rate);

        section(&mut out, "controller");
        kv(&mut out, "alpha", self.controller.alpha);
        kv(&mut out, "beta", self.controller.beta);
        kv(&mut out, "min_beta", self.min_beta);
        kv(&mut out, "angular_drag", self.controller.angular_drag);

        section(&mut out, "gait");
        kv(&mut out, "step_length", self.gait.step_length);
        kv(&mut out, "cycle_duration", self.gait.cycle_duration);
        kv(&mut out, "swing_apex", self.gait.swing_apex);

        let r = &self.run;
        section(&mut out, "run");
        kv(&mut out, "duration", r.duration);
        kv(&mut out, "dt", r.dt);
        kv(&mut out, "start_offset", r.start_offset);
        kv(&mut out, "blade_table_stride", r.blade_table_stride);
        kv(&mut out, "export_obj", r.export_obj);
        out
    }

    fn decode(doc: &Document) -> Result<Self> {
        let t = TerrainSpec::default();
        let terrain = TerrainSpec {
            size: doc.get("terrain.size", t.size)?,
            samples: doc.get("terrain.samples", t.samples)?,
            slope: doc.get("terrain.slope", t.slope)?,
            noise_seed: doc.get("terrain.noise_seed", t.noise_seed)?,
            noise_amp: doc.get("terrain.noise_amp", t.noise_amp)?,
        };

        let base = match doc.raw("material.preset") {
            Some(name) => {
                preset(name).ok_or_else(|| Error::scenario("material.preset", format!("unknown preset `{name}`")))?
            }
            None => {
                if !doc.has("material.depth") && !doc.has("material.name") {
                    return Err(Error::scenario("material", "needs a preset or explicit coefficients"));
                }
                TerrainMaterial { name: "custom".into(), depth: 0.0, compression: 0.0, smoothness: 0.0 }
            }
        };
        let material = TerrainMaterial {
            name: doc.get("material.name", base.name.clone())?,
            depth: doc.get("material.depth", base.depth)?,
            compression: doc.get("material.compression", base.compression)?,
            smoothness: doc.get("material.smoothness", base.smoothness)?,
        };
        let p = PrintSettings::default();
        let print = PrintSettings {
            max_print_depth: doc.get("material.max_print_depth", p.max_print_depth)?,
            rim_width: doc.get("material.rim_width", p.rim_width)?,
        };

        let class_height: f64 = doc.get("vegetation.class_height", 0.0)?;
        let vegetation = if class_height == 0.0 {
            None
        } else {
            let d = VegetationSpec::new(class_height);
            let speed = match d.collapse {
                Collapse::Fall { speed } => speed,
                Collapse::Instant => 2.0,
            };
            let collapse = match doc.raw("vegetation.collapse").unwrap_or("fall") {
                "fall" => Collapse::Fall { speed: doc.get("vegetation.collapse_speed", speed)? },
                "instant" => Collapse::Instant,
                other => {
                    return Err(Error::scenario(
                        "vegetation.collapse",
                        format!("expected `fall` or `instant`, got `{other}`"),
                    ))
                }
            };
            Some(VegetationSpec {
                class_height,
                density: doc.get("vegetation.density", d.density)?,
                seed: doc.get("vegetation.seed", d.seed)?,
                deform: DeformParams {
                    t_max: doc.get("vegetation.t_max", d.deform.t_max)?,
                    gamma: doc.get("vegetation.gamma", d.deform.gamma)?,
                },
                collapse,
            })
        };

        let total_height: f64 = doc.get("character.total_height", 1.7)?;
        if !(total_height.is_finite() && total_height > 0.0) {
            return Err(Error::scenario("character.total_height", format!("must be positive, got {total_height}")));
        }
        let c = CharacterSpec::new(total_height);
        let m = c.morphology;
        let character = CharacterSpec {
            morphology: Morphology {
                total_height,
                leg_upper: doc.get("character.leg_upper", m.leg_upper)?,
                leg_lower: doc.get("character.leg_lower", m.leg_lower)?,
                hip_spacing: doc.get("character.hip_spacing", m.hip_spacing)?,
                pelvis_height: doc.get("character.pelvis_height", m.pelvis_height)?,
                foot_half_length: doc.get("character.foot_half_length", m.foot_half_length)?,
                foot_half_width: doc.get("character.foot_half_width", m.foot_half_width)?,
            },
            mass: doc.get("character.mass", c.mass)?,
            inertia: doc.get("character.inertia", c.inertia)?,
            com_height_offset: doc.get("character.com_height_offset", c.com_height_offset)?,
            initial_tilt: doc.get("character.initial_tilt", c.initial_tilt)?,
            initial_tilt_rate: doc.get("character.initial_tilt_rate", c.initial_tilt_rate)?,
        };

        let cp = ControllerParams::default();
        let controller = ControllerParams {
            alpha: doc.get("controller.alpha", cp.alpha)?,
            beta: doc.get("controller.beta", cp.beta)?,
            angular_drag: doc.get("controller.angular_drag", cp.angular_drag)?,
        };
        let min_beta = doc.get("controller.min_beta", 4.0)?;

        let g = GaitParams::scaled(total_height);
        let gait = GaitParams {
            step_length: doc.get("gait.step_length", g.step_length)?,
            cycle_duration: doc.get("gait.cycle_duration", g.cycle_duration)?,
            swing_apex: doc.get("gait.swing_apex", g.swing_apex)?,
        };

        let r = RunSpec::default();
        let run = RunSpec {
            duration: doc.get("run.duration", r.duration)?,
            dt: doc.get("run.dt", r.dt)?,
            start_offset: doc.get("run.start_offset", r.start_offset)?,
            blade_table_stride: doc.get("run.blade_table_stride", r.blade_table_stride)?,
            export_obj: doc.get("run.export_obj", r.export_obj)?,
        };

        Ok(Self { terrain, material, print, vegetation, character, controller, min_beta, gait, run })
    }
}

fn section(out: &mut String, name: &str) {
    if !out.is_empty() {
        out.push('\n');
    }
    let _ = writeln!(out, "[{name}]");
}

fn kv(out: &mut String, key: &str, value: impl std::fmt::Display) {
    let _ = writeln!(out, "{key} = {value}");
}

/// Built-in material presets, in file order.
pub fn presets() -> Vec<TerrainMaterial> {
    let doc = parse_sections(PRESETS).expect("built-in presets parse");
    let mut names: Vec<(usize, String)> = Vec::new();
    for (key, (_, line)) in &doc {
        let (sec, _) = key.split_once('.').expect("sectioned key");
        if !names.iter().any(|(_, n)| n == sec) {
            names.push((*line, sec.to_string()));
        }
    }
    names.sort();
    names.into_iter().filter_map(|(_, n)| preset(&n)).collect()
}

/// Looks up a built-in material by name.
pub fn preset(name: &str) -> Option<TerrainMaterial> {
    let doc = parse_sections(PRESETS).expect("built-in presets parse");
    let num = |k: &str| doc.get(&format!("{name}.{k}")).and_then(|(v, _)| v.parse::<f64>().ok());
    Some(TerrainMaterial {
        name: name.to_string(),
        depth: num("depth")?,
        compression: num("compression")?,
        smoothness: num("smoothness")?,
    })
}

type Entries = BTreeMap<String, (String, usize)>;

fn parse_sections(text: &str) -> Result<Entries> {
    let mut entries = Entries::new();
    let mut current: Option<String> = None;
    for (n, raw) in text.lines().enumerate() {
        let line_no = n + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            current = Some(name.trim().to_string());
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::scenario(format!("line {line_no}"), format!("expected `key = value`, got `{line}`")));
        };
        let Some(sec) = &current else {
            return Err(Error::scenario(format!("line {line_no}"), "key outside of any section"));
        };
        let path = format!("{sec}.{}", key.trim());
        if entries.insert(path.clone(), (value.trim().to_string(), line_no)).is_some() {
            return Err(Error::scenario(path, format!("duplicate key on line {line_no}")));
        }
    }
    Ok(entries)
}

/// Raw entries of a scenario file, keyed by `section.key`.
#[derive(Debug, Clone, Default)]
struct Document {
    entries: Entries,
}

impl Document {
    fn parse(text: &str) -> Result<Self> {
        let entries = parse_sections(text)?;
        for (path, (_, line)) in &entries {
            if !is_known(path) {
                return Err(Error::scenario(path.clone(), format!("unknown key on line {line}")));
            }
        }
        Ok(Self { entries })
    }

    fn apply_override(&mut self, spec: &str) -> Result<()> {
        let Some((path, value)) = spec.split_once('=') else {
            return Err(Error::scenario(spec, "override must look like `section.key=value`"));
        };
        let path = path.trim();
        if !is_known(path) {
            return Err(Error::scenario(path, "unknown override path"));
        }
        self.entries.insert(path.to_string(), (value.trim().to_string(), 0));
        Ok(())
    }

    fn has(&self, path: &str) -> bool {
        self.entries.contains_key(path)
    }

    fn raw(&self, path: &str) -> Option<&str> {
        self.entries.get(path).map(|(v, _)| v.as_str())
    }

    fn get<T: FromStr>(&self, path: &str, default: T) -> Result<T> {
        match self.raw(path) {
            None => Ok(default),
            Some(v) => {
                v.parse().map_err(|_| Error::scenario(path, format!("cannot parse `{v}` as {}", short_type::<T>())))
            }
        }
    }
}

fn short_type<T>() -> &'static str {
    let full = std::any::type_name::<T>();
    match full {
        "f64" => "a number",
        "usize" | "u64" => "a non-negative integer",
        "bool" => "true or false",
        _ => "text",
    }
}
