//! Deformable height-field terrain.
//!
//! Heights are stored per cell, row-major with `x` varying fastest. Cell
//! `(i, j)` covers `[origin.x + i·cell, origin.x + (i+1)·cell)` along x (and
//! likewise along z); its height is attached to the cell center. Sampling is
//! bilinear between centers and clamps to the outermost centers near the
//! edge of the extent.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::math::Vec3;

/// Heights must stay inside `[-HEIGHT_LIMIT, HEIGHT_LIMIT]` meters.
pub const HEIGHT_LIMIT: f64 = 100.0;

/// Lattice spacing of the value noise used by [`generate_slope`], in meters.
const NOISE_LATTICE: f64 = 1.0;

#[derive(Debug, Clone, PartialEq)]
pub struct HeightField {
    nx: usize,
    nz: usize,
    cell_size: f64,
    origin: Vec3,
    heights: Vec<f64>,
}

/// Half-open rectangle of cell indices, `[i0, i1) × [j0, j1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CellRect {
    pub i0: usize,
    pub j0: usize,
    pub i1: usize,
    pub j1: usize,
}

impl CellRect {
    pub fn new(i0: usize, j0: usize, i1: usize, j1: usize) -> Self {
        Self { i0, j0, i1, j1 }
    }

    pub fn is_empty(&self) -> bool {
        self.i0 >= self.i1 || self.j0 >= self.j1
    }

    pub fn cell_count(&self) -> usize {
        if self.is_empty() {
            0
        } else {
            (self.i1 - self.i0) * (self.j1 - self.j0)
        }
    }

    /// Grows the rectangle by `n` cells on every side, clipped to `nx × nz`.
    pub fn expand(&self, n: usize, nx: usize, nz: usize) -> Self {
        Self {
            i0: self.i0.saturating_sub(n),
            j0: self.j0.saturating_sub(n),
            i1: (self.i1 + n).min(nx),
            j1: (self.j1 + n).min(nz),
        }
    }

    fn include(&mut self, i: usize, j: usize) {
        if self.is_empty() {
            *self = Self::new(i, j, i + 1, j + 1);
        } else {
            self.i0 = self.i0.min(i);
            self.j0 = self.j0.min(j);
            self.i1 = self.i1.max(i + 1);
            self.j1 = self.j1.max(j + 1);
        }
    }
}

/// Per-frame deformation coefficients of a ground material.
#[derive(Debug, Clone, PartialEq)]
pub struct TerrainMaterial {
    pub name: String,
    /// Height removed per frame from each cell under a contacting foot (m).
    pub depth: f64,
    /// Height added per frame to each cell on the rim of the print (m).
    pub compression: f64,
    /// Blend weight of the Gaussian pass applied after each stamp, `[0, 1]`.
    pub smoothness: f64,
}

impl TerrainMaterial {
    pub fn new(name: impl Into<String>, depth: f64, compression: f64, smoothness: f64) -> Result<Self> {
        let m = Self { name: name.into(), depth, compression, smoothness };
        m.validate()?;
        Ok(m)
    }

    /// A material that never deforms.
    pub fn rigid() -> Self {
        Self { name: "rigid".into(), depth: 0.0, compression: 0.0, smoothness: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str, v: f64| Err(Error::InvalidParameter(format!("material `{}`: {what} = {v}", self.name)));
        if !(self.depth.is_finite() && self.depth >= 0.0) {
            return bad("depth", self.depth);
        }
        if !(self.compression.is_finite() && self.compression >= 0.0) {
            return bad("compression", self.compression);
        }
        if !(0.0..=1.0).contains(&self.smoothness) {
            return bad("smoothness", self.smoothness);
        }
        Ok(())
    }
}

/// Shape limits shared by every footprint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrintSettings {
    /// Deepest a print may go below the sole height it was started at (m).
    pub max_print_depth: f64,
    /// Width of the deposition ring around the print, in cells.
    pub rim_width: usize,
}

impl Default for PrintSettings {
    fn default() -> Self {
        Self { max_print_depth: 0.08, rim_width: 1 }
    }
}

/// Oriented rectangle of a foot sole pressing into the ground.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FootprintStamp {
    pub center: Vec3,
    pub half_length: f64,
    pub half_width: f64,
    /// Heading of the long axis in the ground plane; 0 is +x, positive turns
    /// toward +z.
    pub yaw: f64,
    /// Reference height the depth clamp is measured from.
    pub sole_height: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DeformationReport {
    /// Volume removed from cells under the print (m³).
    pub carved: f64,
    /// Volume added on the rim (m³).
    pub deposited: f64,
    pub covered_cells: usize,
    pub rim_cells: usize,
    /// Bounding rectangle of covered and rim cells.
    pub bounds: Option<CellRect>,
}

impl HeightField {
    /// A flat field at `height`.
    pub fn flat(nx: usize, nz: usize, cell_size: f64, origin: Vec3, height: f64) -> Result<Self> {
        Self::from_heights(nx, nz, cell_size, origin, vec![height; nx.saturating_mul(nz)])
    }

    pub fn from_heights(nx: usize, nz: usize, cell_size: f64, origin: Vec3, heights: Vec<f64>) -> Result<Self> {
        if nx < 2 || nz < 2 {
            return Err(Error::InvalidParameter(format!("grid must be at least 2×2, got {nx}×{nz}")));
        }
        if !(cell_size.is_finite() && cell_size > 0.0) {
            return Err(Error::InvalidParameter(format!("cell size must be positive, got {cell_size}")));
        }
        if !origin.is_finite() {
            return Err(Error::InvalidParameter("origin must be finite".into()));
        }
        if heights.len() != nx * nz {
            return Err(Error::InvalidParameter(format!("expected {} heights, got {}", nx * nz, heights.len())));
        }
        if let Some(h) = heights.iter().find(|h| !(h.is_finite() && h.abs() <= HEIGHT_LIMIT)) {
            return Err(Error::InvalidParameter(format!("height {h} outside ±{HEIGHT_LIMIT} m")));
        }
        Ok(Self { nx, nz, cell_size, origin, heights })
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn nz(&self) -> usize {
        self.nz
    }

    pub fn cell_size(&self) -> f64 {
        self.cell_size
    }

    pub fn origin(&self) -> Vec3 {
        self.origin
    }

    pub fn heights(&self) -> &[f64] {
        &self.heights
    }

    /// Horizontal size of the field along x and z (m).
    pub fn extent(&self) -> (f64, f64) {
        (self.nx as f64 * self.cell_size, self.nz as f64 * self.cell_size)
    }

    pub fn contains(&self, x: f64, z: f64) -> bool {
        let (ex, ez) = self.extent();
        let u = x - self.origin.x;
        let v = z - self.origin.z;
        (0.0..=ex).contains(&u) && (0.0..=ez).contains(&v)
    }

    fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn height_at(&self, i: usize, j: usize) -> f64 {
        self.heights[self.index(i, j)]
    }

    pub fn set_height(&mut self, i: usize, j: usize, h: f64) {
        let k = self.index(i, j);
        self.heights[k] = h.clamp(-HEIGHT_LIMIT, HEIGHT_LIMIT);
    }

    /// World (x, z) of the center of cell `(i, j)`.
    pub fn cell_center(&self, i: usize, j: usize) -> (f64, f64) {
        (self.origin.x + (i as f64 + 0.5) * self.cell_size, self.origin.z + (j as f64 + 0.5) * self.cell_size)
    }

    /// Bilinear height at `(x, z)`.
    pub fn sample_height(&self, x: f64, z: f64) -> Result<f64> {
        if !self.contains(x, z) {
            return Err(Error::OutOfTerrain { x, z });
        }
        let (i0, tx) = Self::lattice_coord((x - self.origin.x) / self.cell_size - 0.5, self.nx);
        let (j0, tz) = Self::lattice_coord((z - self.origin.z) / self.cell_size - 0.5, self.nz);
        let h00 = self.height_at(i0, j0);
        let h10 = self.height_at(i0 + 1, j0);
        let h01 = self.height_at(i0, j0 + 1);
        let h11 = self.height_at(i0 + 1, j0 + 1);
        let near = h00 + (h10 - h00) * tx;
        let far = h01 + (h11 - h01) * tx;
        Ok(near + (far - near) * tz)
    }

    fn lattice_coord(u: f64, n: usize) -> (usize, f64) {
        let u = u.clamp(0.0, (n - 1) as f64);
        let i = (u.floor() as usize).min(n - 2);
        (i, u - i as f64)
    }

    /// Vertical ray from `(x, y_start, z)` down to the surface.
    pub fn raycast_down(&self, x: f64, z: f64, y_start: f64) -> Result<Vec3> {
        let surface = self.sample_height(x, z)?;
        if y_start < surface {
            return Err(Error::RayBelowSurface { y_start, surface });
        }
        Ok(Vec3::new(x, surface, z))
    }

    /// Sum of heights times the cell area (m³).
    pub fn total_volume(&self) -> f64 {
        self.heights.iter().sum::<f64>() * self.cell_size * self.cell_size
    }

    /// Carves the cells under `stamp`, raises the rim ring, then smooths the
    /// touched area with weight `material.smoothness`.
    ///
    /// Cells whose centers lie inside the rectangle are lowered by
    /// `material.depth`, but never below `sole_height - max_print_depth`.
    /// Cells outside the rectangle whose centers are within `rim_width` cells
    /// of it are raised by `material.compression`, then the region is
    /// smoothed. Rim and smoothing only happen when the stamp carved
    /// something, so a stamp that covers no cell center, a zero-depth
    /// material or a print already at full depth leaves the field untouched.
    pub fn stamp_footprint(
        &mut self,
        stamp: &FootprintStamp,
        material: &TerrainMaterial,
        settings: &PrintSettings,
    ) -> DeformationReport {
        let mut report = DeformationReport::default();
        let cs = self.cell_size;
        let rim_reach = settings.rim_width as f64 * cs;
        let radius = stamp.half_length.hypot(stamp.half_width) + rim_reach;
        let Some(scan) = self.cells_near(stamp.center.x, stamp.center.z, radius) else {
            return report;
        };

        let (sin_yaw, cos_yaw) = stamp.yaw.sin_cos();
        let mut covered = Vec::new();
        let mut rim = Vec::new();
        for j in scan.j0..scan.j1 {
            for i in scan.i0..scan.i1 {
                let (cx, cz) = self.cell_center(i, j);
                let dx = cx - stamp.center.x;
                let dz = cz - stamp.center.z;
                let along = dx * cos_yaw + dz * sin_yaw;
                let across = -dx * sin_yaw + dz * cos_yaw;
                let out_along = (along.abs() - stamp.half_length).max(0.0);
                let out_across = (across.abs() - stamp.half_width).max(0.0);
                if out_along == 0.0 && out_across == 0.0 {
                    covered.push((i, j));
                } else if settings.rim_width > 0 && out_along.hypot(out_across) <= rim_reach {
                    rim.push((i, j));
                }
            }
        }
        if covered.is_empty() {
            return report;
        }

        let floor = stamp.sole_height - settings.max_print_depth;
        let mut bounds = CellRect::new(0, 0, 0, 0);
        let mut removed = 0.0;
        for &(i, j) in &covered {
            bounds.include(i, j);
            let h = self.height_at(i, j);
            if h > floor {
                let lowered = h - material.depth.min(h - floor);
                self.set_height(i, j, lowered);
                removed += h - self.height_at(i, j);
            }
        }
        report.covered_cells = covered.len();
        // A print already at full depth pushes no more material aside.
        if removed == 0.0 {
            return report;
        }
        if material.compression > 0.0 {
            for &(i, j) in &rim {
                let h = self.height_at(i, j);
                self.set_height(i, j, h + material.compression);
            }
        }
        for &(i, j) in &rim {
            bounds.include(i, j);
        }

        let area = cs * cs;
        report.carved = removed * area;
        report.deposited = material.compression * rim.len() as f64 * area;
        report.rim_cells = rim.len();
        report.bounds = Some(bounds);

        if material.smoothness > 0.0 {
            let region = bounds.expand(1, self.nx, self.nz);
            self.smooth_region(region, material.smoothness);
        }
        report
    }

    /// Cells whose centers may fall within `radius` of `(x, z)`, clipped to the
    /// grid; `None` when the disc misses the grid entirely.
    fn cells_near(&self, x: f64, z: f64, radius: f64) -> Option<CellRect> {
        let cs = self.cell_size;
        let lo_i = ((x - radius - self.origin.x) / cs - 0.5).floor();
        let hi_i = ((x + radius - self.origin.x) / cs - 0.5).ceil();
        let lo_j = ((z - radius - self.origin.z) / cs - 0.5).floor();
        let hi_j = ((z + radius - self.origin.z) / cs - 0.5).ceil();
        if hi_i < 0.0 || hi_j < 0.0 || lo_i >= self.nx as f64 || lo_j >= self.nz as f64 {
            return None;
        }
        let rect = CellRect::new(
            lo_i.max(0.0) as usize,
            lo_j.max(0.0) as usize,
            ((hi_i + 1.0) as usize).min(self.nx),
            ((hi_j + 1.0) as usize).min(self.nz),
        );
        (!rect.is_empty()).then_some(rect)
    }

    /// Blends each cell of `bounds` toward its 3×3 Gaussian average (σ = 1
    /// cell) with weight `magnitude`.
    ///
    /// Neighbors outside `bounds` are replaced by the nearest cell inside it
    /// (clamped-edge extension), which also covers the grid border. Cells
    /// more than one cell inside `bounds` get the plain convolution, and the
    /// height sum over `bounds` is conserved.
    pub fn apply_gaussian_region(&mut self, bounds: CellRect, magnitude: f64) -> Result<()> {
        if !(0.0..=1.0).contains(&magnitude) {
            return Err(Error::InvalidParameter(format!("smoothing magnitude {magnitude} outside [0, 1]")));
        }
        if bounds.i1 > self.nx || bounds.j1 > self.nz {
            return Err(Error::InvalidParameter(format!("region {bounds:?} exceeds the {}×{} grid", self.nx, self.nz)));
        }
        self.smooth_region(bounds, magnitude);
        Ok(())
    }

    fn smooth_region(&mut self, r: CellRect, magnitude: f64) {
        if r.is_empty() || magnitude == 0.0 {
            return;
        }
        let [w_side, w_center, _] = gaussian_weights();
        let w = r.i1 - r.i0;
        let h = r.j1 - r.j0;

        let mut region = Vec::with_capacity(w * h);
        for j in r.j0..r.j1 {
            let row = self.index(r.i0, j);
            region.extend_from_slice(&self.heights[row..row + w]);
        }

        let mut pass = vec![0.0; w * h];
        for y in 0..h {
            let row = &region[y * w..(y + 1) * w];
            for x in 0..w {
                let left = row[x.saturating_sub(1)];
                let right = row[(x + 1).min(w - 1)];
                pass[y * w + x] = w_side * left + w_center * row[x] + w_side * right;
            }
        }
        for y in 0..h {
            let up = y.saturating_sub(1);
            let down = (y + 1).min(h - 1);
            for x in 0..w {
                let blurred = w_side * pass[up * w + x] + w_center * pass[y * w + x] + w_side * pass[down * w + x];
                let k = self.index(r.i0 + x, r.j0 + y);
                let old = region[y * w + x];
                self.heights[k] = ((1.0 - magnitude) * old + magnitude * blurred).clamp(-HEIGHT_LIMIT, HEIGHT_LIMIT);
            }
        }
    }
}

/// Normalized 1D weights `[side, center, side]` of the σ = 1 cell Gaussian.
pub fn gaussian_weights() -> [f64; 3] {
    let side = (-0.5f64).exp();
    let total = 1.0 + 2.0 * side;
    [side / total, 1.0 / total, side / total]
}

/// Plane sloping up along +x at `slope_angle`, plus seeded value noise of
/// amplitude `noise_amp`. The field origin is the world origin.
pub fn generate_slope(
    nx: usize,
    nz: usize,
    cell_size: f64,
    slope_angle: f64,
    noise_seed: u64,
    noise_amp: f64,
) -> Result<HeightField> {
    if !(slope_angle.abs() < std::f64::consts::FRAC_PI_2) {
        return Err(Error::InvalidParameter(format!("slope angle {slope_angle} rad")));
    }
    if !(noise_amp.is_finite() && noise_amp >= 0.0) {
        return Err(Error::InvalidParameter(format!("noise amplitude {noise_amp}")));
    }
    let mut field = HeightField::flat(nx, nz, cell_size, Vec3::ZERO, 0.0)?;
    let grade = slope_angle.tan();
    let noise = (noise_amp > 0.0).then(|| ValueNoise::new(noise_seed, &field));
    let mut heights = Vec::with_capacity(nx * nz);
    for j in 0..nz {
        for i in 0..nx {
            let (x, z) = field.cell_center(i, j);
            let mut h = grade * x;
            if let Some(n) = &noise {
                h += noise_amp * n.sample(x, z);
            }
            if !(h.abs() <= HEIGHT_LIMIT) {
                return Err(Error::InvalidParameter(format!(
                    "slope {slope_angle} rad over {} m exceeds ±{HEIGHT_LIMIT} m",
                    field.extent().0
                )));
            }
            heights.push(h);
        }
    }
    field.heights = heights;
    Ok(field)
}

/// Smoothly interpolated random lattice values in `[-1, 1]`.
struct ValueNoise {
    cols: usize,
    values: Vec<f64>,
}

impl ValueNoise {
    fn new(seed: u64, field: &HeightField) -> Self {
        let (ex, ez) = field.extent();
        let cols = (ex / NOISE_LATTICE).ceil() as usize + 2;
        let rows = (ez / NOISE_LATTICE).ceil() as usize + 2;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values = (0..cols * rows).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        Self { cols, values }
    }

    fn sample(&self, x: f64, z: f64) -> f64 {
        let u = x / NOISE_LATTICE;
        let v = z / NOISE_LATTICE;
        let (i, j) = (u.floor() as usize, v.floor() as usize);
        let tx = crate::math::smoothstep(u - i as f64);
        let tz = crate::math::smoothstep(v - j as f64);
        let at = |a: usize, b: usize| self.values[b * self.cols + a];
        let near = at(i, j) + (at(i + 1, j) - at(i, j)) * tx;
        let far = at(i, j + 1) + (at(i + 1, j + 1) - at(i, j + 1)) * tx;
        near + (far - near) * tz
    }
}
