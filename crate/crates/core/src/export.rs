//! Height-field snapshots: 16-bit PGM with a text sidecar, and OBJ meshes.

use std::fmt::Write as _;
use std::io::{self, Write};

use crate::heightfield::HeightField;

/// Sidecar metadata needed to turn PGM samples back into heights.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PgmHeader {
    pub width: usize,
    pub height: usize,
    pub min_h: f64,
    pub max_h: f64,
    pub cell_size: f64,
    pub origin_x: f64,
    pub origin_z: f64,
}

impl PgmHeader {
    /// Height represented by a 16-bit sample.
    pub fn decode(&self, sample: u16) -> f64 {
        self.min_h + (self.max_h - self.min_h) * sample as f64 / u16::MAX as f64
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "format: pgm-p5-16bit-be");
        let _ = writeln!(s, "width: {}", self.width);
        let _ = writeln!(s, "height: {}", self.height);
        let _ = writeln!(s, "min_h: {}", self.min_h);
        let _ = writeln!(s, "max_h: {}", self.max_h);
        let _ = writeln!(s, "cell_size: {}", self.cell_size);
        let _ = writeln!(s, "origin_x: {}", self.origin_x);
        let _ = writeln!(s, "origin_z: {}", self.origin_z);
        s
    }

    pub fn parse(text: &str) -> Option<Self> {
        let mut h =
            PgmHeader { width: 0, height: 0, min_h: 0.0, max_h: 0.0, cell_size: 0.0, origin_x: 0.0, origin_z: 0.0 };
        for line in text.lines() {
            let (k, v) = line.split_once(':')?;
            let v = v.trim();
            match k.trim() {
                "format" => {}
                "width" => h.width = v.parse().ok()?,
                "height" => h.height = v.parse().ok()?,
                "min_h" => h.min_h = v.parse().ok()?,
                "max_h" => h.max_h = v.parse().ok()?,
                "cell_size" => h.cell_size = v.parse().ok()?,
                "origin_x" => h.origin_x = v.parse().ok()?,
                "origin_z" => h.origin_z = v.parse().ok()?,
                _ => return None,
            }
        }
        Some(h)
    }
}

/// Writes a binary P5 image, one row per z index, samples big-endian.
/// Heights map linearly from `[min_h, max_h]` onto `[0, 65535]`.
pub fn write_pgm<W: Write>(field: &HeightField, out: &mut W) -> io::Result<PgmHeader> {
    let (min_h, max_h) =
        field.heights().iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), h| (lo.min(*h), hi.max(*h)));
    let span = max_h - min_h;
    write!(out, "P5\n{} {}\n65535\n", field.nx(), field.nz())?;
    let mut bytes = Vec::with_capacity(field.heights().len() * 2);
    for h in field.heights() {
        let sample = if span > 0.0 { ((h - min_h) / span * u16::MAX as f64).round() as u16 } else { 0 };
        bytes.extend_from_slice(&sample.to_be_bytes());
    }
    out.write_all(&bytes)?;
    Ok(PgmHeader {
        width: field.nx(),
        height: field.nz(),
        min_h,
        max_h,
        cell_size: field.cell_size(),
        origin_x: field.origin().x,
        origin_z: field.origin().z,
    })
}

/// Parses a 16-bit P5 image written by [`write_pgm`].
pub fn read_pgm(bytes: &[u8]) -> Option<(usize, usize, Vec<u16>)> {
    let mut fields = Vec::new();
    let mut pos = 0;
    while fields.len() < 4 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        fields.push(std::str::from_utf8(&bytes[start..pos]).ok()?);
    }
    pos += 1;
    if fields[0] != "P5" || fields[3] != "65535" {
        return None;
    }
    let w: usize = fields[1].parse().ok()?;
    let h: usize = fields[2].parse().ok()?;
    let data = bytes.get(pos..pos + w * h * 2)?;
    let samples = data.chunks_exact(2).map(|c| u16::from_be_bytes([c[0], c[1]])).collect();
    Some((w, h, samples))
}

/// Writes a triangle mesh with one vertex per cell center and two triangles
/// per quad of neighboring centers, counter-clockwise seen from +y.
pub fn write_obj<W: Write>(field: &HeightField, out: &mut W) -> io::Result<()> {
    let mut out = io::BufWriter::new(out);
    writeln!(out, "# height field {}x{}", field.nx(), field.nz())?;
    for j in 0..field.nz() {
        for i in 0..field.nx() {
            let (x, z) = field.cell_center(i, j);
            writeln!(out, "v {} {} {}", x, field.height_at(i, j), z)?;
        }
    }
    let nx = field.nx();
    let vid = |i: usize, j: usize| j * nx + i + 1;
    for j in 0..field.nz() - 1 {
        for i in 0..nx - 1 {
            writeln!(out, "f {} {} {}", vid(i, j), vid(i, j + 1), vid(i + 1, j))?;
            writeln!(out, "f {} {} {}", vid(i + 1, j), vid(i, j + 1), vid(i + 1, j + 1))?;
        }
    }
    out.flush()
}
