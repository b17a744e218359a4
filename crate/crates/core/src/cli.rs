//! Command-line front end: `run`, `presets` and `bench`.

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::scenario::{presets, Scenario};
use crate::sim::{bench, run, TraceOptions, BENCH_GRIDS};

#[derive(Debug, Parser)]
#[command(name = "softstep", version, about = "Walk a character over deformable terrain and grass")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a scenario file and write its artifacts.
    Run {
        scenario: PathBuf,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        /// Replace a scenario value, e.g. `--set controller.alpha=40`.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// List the built-in terrain materials.
    Presets,
    /// Time the per-frame pipeline on a synthetic walk.
    Bench {
        #[arg(long, default_value_t = 512)]
        grid: usize,
        #[arg(long, default_value_t = 600)]
        frames: usize,
    },
}

/// Runs a parsed command line and returns the process exit status.
pub fn execute(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    match cli.command {
        Command::Run { scenario, out: dir, overrides } => cmd_run(&scenario, &dir, &overrides, out, err),
        Command::Presets => cmd_presets(out),
        Command::Bench { grid, frames } => cmd_bench(grid, frames, out, err),
    }
}

pub fn cmd_run(
    path: &std::path::Path,
    dir: &std::path::Path,
    overrides: &[String],
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> i32 {
    let scenario = match Scenario::load(path, overrides) {
        Ok(s) => s,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return 1;
        }
    };
    let artifacts = match run(&scenario) {
        Ok(a) => a,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return 1;
        }
    };
    if let Err(e) = artifacts.write_to(dir, TraceOptions::from_env()) {
        let _ = writeln!(err, "error: {e}");
        return 1;
    }
    let m = &artifacts.metrics;
    let _ = writeln!(out, "{} frames, {}", m.frames, m.end_reason.name());
    match &m.end_reason {
        crate::sim::EndReason::FellOver { frame, tilt } => {
            let _ = writeln!(err, "fell over at frame {frame} (tilt {tilt:.4} rad)");
        }
        crate::sim::EndReason::Failed { frame, message } => {
            let _ = writeln!(err, "error at frame {frame}: {message}");
        }
        _ => {}
    }
    m.end_reason.exit_code()
}

pub fn cmd_presets(out: &mut dyn Write) -> i32 {
    let p = presets();
    let _ = writeln!(out, "{:<8} {:>10} {:>12} {:>11}", "name", "depth", "compression", "smoothness");
    for m in &p {
        let _ = writeln!(out, "{:<8} {:>10} {:>12} {:>11}", m.name, m.depth, m.compression, m.smoothness);
    }
    let by = |n: &str| p.iter().find(|m| m.name == n);
    if let (Some(sand), Some(soil), Some(mud), Some(snow)) = (by("sand"), by("soil"), by("mud"), by("snow")) {
        let checks = [
            ("sand is not compressible", sand.compression == 0.0),
            ("soil depth < sand depth", soil.depth < sand.depth),
            ("soil compression > sand compression", soil.compression > sand.compression),
            ("sand smoothness is the largest", p.iter().all(|m| m.smoothness <= sand.smoothness)),
            ("mud and snow carve deeper than sand", mud.depth > sand.depth && snow.depth > sand.depth),
            ("mud prints sharper than snow", mud.smoothness < snow.smoothness),
        ];
        let _ = writeln!(out);
        for (what, ok) in checks {
            let _ = writeln!(out, "[{}] {what}", if ok { "ok" } else { "violated" });
        }
    }
    0
}

pub fn cmd_bench(grid: usize, frames: usize, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    if !BENCH_GRIDS.contains(&grid) {
        let _ = writeln!(err, "error: --grid must be one of {BENCH_GRIDS:?}");
        return 1;
    }
    match bench(grid, frames) {
        Ok(r) => {
            let _ = write!(out, "{}", r.to_text());
            0
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            1
        }
    }
}
