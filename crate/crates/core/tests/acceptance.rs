//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails. `SOFTSTEP_BLESS=1` rewrites the golden traces.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use softstep::balance::{compute_support, compute_torque, step_proxy, BodyState, ControllerParams};
use softstep::gait::{forward_kinematics, solve_two_bone_ik, Foot, LegPose, Morphology};
use softstep::heightfield::{HeightField, TerrainMaterial};
use softstep::math::{SagittalFrame, Vec3};
use softstep::scenario::{preset, Scenario};
use softstep::sim::{bench, run, run_with_layers, Layers, StepOutcome, TraceOptions, World};
use softstep::vegetation::{beta_for_vegetation, displacement, DeformParams, PlatformState, VirtualPlatform};

type Check = Result<String, String>;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn manifest_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn load(name: &str) -> Result<Scenario, String> {
    Scenario::load(&manifest_dir().join("scenarios").join(name), &[]).map_err(|e| e.to_string())
}

fn parameter_fidelity() -> Check {
    let r = load("reference.ini")?;
    ensure(r.controller.alpha == 30.0 && r.controller.beta == 6.0, "reference gains are not α=30, β=6")?;
    ensure(r.terrain.size == 10.0 && r.terrain.samples == 512, "reference terrain is not 10 m at 512²")?;
    let small = load("grass_small.ini")?.vegetation.ok_or("small grass scenario has no grass")?;
    let medium = load("grass_medium.ini")?.vegetation.ok_or("medium grass scenario has no grass")?;
    ensure(small.class_height == 0.5 && medium.class_height == 0.9, "grass classes are not 0.5/0.9 m")?;
    let pl = VirtualPlatform::for_grass(Foot::Left, medium.class_height, medium.collapse);
    ensure(pl.h_max == 0.3, format!("platform height for 0.9 m grass is {}", pl.h_max))?;
    let pl = VirtualPlatform::for_grass(Foot::Left, small.class_height, small.collapse);
    ensure((pl.h_max - 0.5 / 3.0).abs() < 1e-15, "platform height for 0.5 m grass")?;
    let (b0, b9, b45) = (
        beta_for_vegetation(0.0, r.controller.beta, r.min_beta),
        beta_for_vegetation(0.9, r.controller.beta, r.min_beta),
        beta_for_vegetation(0.45, r.controller.beta, r.min_beta),
    );
    ensure(b0 == 6.0 && b9 == 4.0, format!("β(0)={b0}, β(0.9)={b9}"))?;
    ensure((b45 - 5.0).abs() <= 1e-12, format!("β(0.45)={b45}"))?;
    Ok(format!("h_max(0.9)={}, β(0.45)={b45}", 0.9 / 3.0))
}

fn real_time_budget() -> Check {
    let r = bench(512, 600).map_err(|e| e.to_string())?;
    ensure(r.median_ms < 16.6, format!("median {:.4} ms ≥ 16.6 ms", r.median_ms))?;
    Ok(format!("median {:.4} ms, p99 {:.4} ms", r.median_ms, r.p99_ms))
}

fn flat_field() -> HeightField {
    HeightField::flat(200, 200, 0.05, Vec3::new(-5.0, 0.0, -5.0), 0.0).unwrap()
}

fn body(com: Vec3, tilt: f64, rate: f64) -> BodyState {
    BodyState {
        com,
        tilt,
        angular_velocity: rate,
        linear_velocity: Vec3::ZERO,
        mass: 2.0,
        inertia: 2.0,
        com_height_offset: 0.1,
    }
}

fn controller_properties() -> Check {
    let field = flat_field();
    let frame = SagittalFrame::new(Vec3::new(0.0, 0.9, 0.0), Vec3::X, Vec3::Y).unwrap();
    let params = ControllerParams::default();
    let feet = [Vec3::new(-0.25, 0.0, -0.1), Vec3::new(0.25, 0.0, 0.1)];
    let support = compute_support(feet, &frame, &field).map_err(|e| e.to_string())?;

    let eq = compute_torque(&body(Vec3::new(0.0, 0.9, 0.0), 0.0, 0.0), &support, &params, &frame);
    ensure(eq == 0.0, format!("torque at equilibrium is {eq}"))?;

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..1000 {
        let e1: f64 = rng.gen_range(-0.5..0.5);
        let e2: f64 = rng.gen_range(-0.5..0.5);
        let w1: f64 = rng.gen_range(-2.0..2.0);
        let w2: f64 = rng.gen_range(-2.0..2.0);
        let y: f64 = rng.gen_range(0.5..1.5);
        // COM behind the target by e gives error +e.
        let tau = |e: f64, w: f64| compute_torque(&body(Vec3::new(-e, y, 0.0), 0.0, w), &support, &params, &frame);
        let (t1, t2) = (tau(e1, 0.0), tau(e2, 0.0));
        ensure(t1.signum() == e1.signum() || e1 == 0.0, format!("sign of τ({e1}) is wrong"))?;
        ensure((t1 - params.alpha * e1).abs() <= 1e-9, format!("τ({e1}) = {t1}"))?;
        ensure((tau(e1 + e2, 0.0) - (t1 + t2)).abs() <= 1e-9, "position term is not additive")?;
        ensure((tau(0.0, w1 + w2) - (tau(0.0, w1) + tau(0.0, w2))).abs() <= 1e-9, "rate term is not additive")?;
        let k = params.beta - params.angular_drag;
        ensure((tau(0.0, w1) - k * w1).abs() <= 1e-9, "rate gain")?;
        ensure((tau(e1, w1) - (t1 + tau(0.0, w1))).abs() <= 1e-9, "terms do not superpose")?;
    }

    // Standing still from 0.3 rad.
    let m = Morphology::scaled(1.7);
    let lever = m.pelvis_height + 0.1;
    let root = Vec3::ZERO;
    let mut b = body(softstep::balance::com_anchor(root, 0.3, lever, &frame), 0.3, 0.0);
    let mut peak: f64 = 0.3;
    for _ in 0..600 {
        let s = step_proxy(&b, &support, &params, &frame, root, Vec3::ZERO, lever, 1.0 / 60.0)
            .map_err(|e| e.to_string())?;
        b = s.body;
        peak = peak.max(b.tilt.abs());
    }
    ensure(peak <= 0.35, format!("tilt reached {peak} rad"))?;
    Ok(format!("1000 random states, peak tilt {peak:.4} rad from 0.3"))
}

fn deformation_ledger() -> Check {
    let mud = load("mud.ini")?;
    let a = run(&mud).map_err(|e| e.to_string())?;
    let carved: f64 = a.trace.iter().map(|t| t.carved).sum();
    let deposited: f64 = a.trace.iter().map(|t| t.deposited).sum();
    ensure(carved > 0.0, "mud walk carved nothing")?;
    ensure(a.trace.len() as f64 * mud.run.dt >= 9.5, format!("mud walk lasted only {} frames", a.trace.len()))?;
    let (v0, v1) = (a.initial_field.total_volume(), a.final_field.total_volume());
    let rel = (v1 - (v0 - carved + deposited)).abs() / v0.abs().max(carved + deposited);
    ensure(rel <= 1e-6, format!("volume ledger off by {rel:e}"))?;

    let sand = run(&load("sand.ini")?).map_err(|e| e.to_string())?;
    ensure(sand.trace.iter().all(|t| t.deposited == 0.0), "sand deposited material")?;

    let mut no_depth = mud.clone();
    no_depth.material = TerrainMaterial { name: "firm".into(), depth: 0.0, compression: 0.003, smoothness: 0.5 };
    let c = run(&no_depth).map_err(|e| e.to_string())?;
    let same = c.initial_field.heights().iter().zip(c.final_field.heights()).all(|(x, y)| x.to_bits() == y.to_bits());
    ensure(same, "zero-depth walk changed the grid")?;
    Ok(format!("relative ledger error {rel:.2e}, sand deposit 0, zero-depth grid unchanged"))
}

fn displacement_field() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut params = || DeformParams { t_max: rng.gen_range(0.01..1.0), gamma: rng.gen_range(0.1..10.0) };
    let mut pts = ChaCha8Rng::seed_from_u64(6);
    let mut point = |r: f64| Vec3::new(pts.gen_range(-r..r), pts.gen_range(-r..r), pts.gen_range(-r..r));
    for i in 0..10_000 {
        let p = params();
        let foot = point(5.0);
        let radius = p.t_max / p.gamma;
        // Outside the support: scale a random direction past the radius.
        let dir = point(1.0).try_normalize().unwrap_or(Vec3::X);
        let far = foot + dir * (radius * (1.0 + 1e-9 + i as f64 / 10_000.0));
        ensure(displacement(far, foot, &p) == Vec3::ZERO, format!("nonzero push at distance ≥ {radius}"))?;

        let q = foot + point(2.0 * radius);
        let t = displacement(q, foot, &p);
        ensure(t.norm() <= p.t_max * (1.0 + 1e-12), format!("|t| = {} > t_max = {}", t.norm(), p.t_max))?;
        ensure(t.y <= 0.0, format!("upward push {}", t.y))?;
        ensure(displacement(foot, foot, &p) == Vec3::new(0.0, -p.t_max, 0.0), "singular value")?;
    }
    Ok("10000 points per property".into())
}

fn ik_oracle() -> Check {
    let m = Morphology::scaled(1.7);
    let frame = SagittalFrame::new(Vec3::ZERO, Vec3::X, Vec3::Y).unwrap();
    let hip = Vec3::new(0.0, 1.0, 0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst_fk: f64 = 0.0;
    let reach = m.leg_upper + m.leg_lower;
    for _ in 0..1000 {
        let angle = rng.gen_range(-PI..PI);
        let d = rng.gen_range(0.05..0.999) * reach;
        let lateral = rng.gen_range(-0.2..0.2);
        let target = hip + Vec3::new(d * angle.sin(), -d * angle.cos(), lateral);
        let sol = solve_two_bone_ik(hip, target, &m, &frame);
        ensure(sol.reached, format!("reachable target {target:?} reported out of reach"))?;
        let analytic = (sol.foot - target).norm();
        let fk = forward_kinematics(hip, &sol.pose, &m, &frame) + Vec3::Z * lateral;
        worst_fk = worst_fk.max((fk - target).norm());

        let mut best = f64::INFINITY;
        for h in -180..=180 {
            for k in 0..=180 {
                let pose = LegPose {
                    hip_angle: (h as f64).to_radians(),
                    knee_angle: (k as f64).to_radians(),
                    ankle_angle: 0.0,
                };
                let p = forward_kinematics(hip, &pose, &m, &frame) + Vec3::Z * lateral;
                best = best.min((p - target).norm());
            }
        }
        ensure(analytic <= best, format!("analytic error {analytic} > grid error {best}"))?;
    }
    ensure(worst_fk < 1e-9, format!("FK∘IK error {worst_fk}"))?;
    Ok(format!("1000 targets, FK∘IK error {worst_fk:.1e} m"))
}

fn platform_behavior() -> Check {
    let mut s = load("grass_medium.ini")?;
    s.terrain.samples = 256;
    let mut world = World::new(&s).map_err(|e| e.to_string())?;
    let foot = Foot::Right;
    let k = foot.index();
    let mut states: Vec<PlatformState> = vec![];
    let mut hold_heights = vec![];
    let mut last_collapse = f64::INFINITY;
    loop {
        let before = world.field().clone();
        let t = match world.step().map_err(|e| e.to_string())? {
            StepOutcome::Advanced(t) => t,
            StepOutcome::EdgeReached => return Err("walk ended before the platform cycle".into()),
        };
        let f = t.feet[k];
        if states.last() != Some(&f.platform) {
            states.push(f.platform);
        }
        match f.platform {
            PlatformState::Hold => hold_heights.push(f.platform_height),
            PlatformState::Collapsing => {
                ensure(f.platform_height <= last_collapse, "platform rose while collapsing")?;
                last_collapse = f.platform_height;
            }
            _ => {}
        }
        if states.len() >= 2 && f.platform == PlatformState::Inactive {
            // Ground as the foot met it, before this frame's print.
            let ground = before.sample_height(f.position.x, f.position.z).map_err(|e| e.to_string())?;
            let gap = (f.position.y - ground).abs();
            ensure(gap <= 1e-4, format!("foot is {gap} m off the ground after collapse"))?;
            break;
        }
    }
    let expected = [PlatformState::Rising, PlatformState::Hold, PlatformState::Collapsing, PlatformState::Inactive];
    ensure(states == expected, format!("platform sequence {states:?}"))?;
    ensure(hold_heights.iter().all(|h| *h == 0.3), "hold height is not 0.3 m")?;
    Ok("Rising → Hold(0.3 m) → Collapsing → Inactive, foot back on ground".into())
}

fn golden_path(material: &str, degrees: u32) -> PathBuf {
    manifest_dir().join("tests/golden").join(format!("{material}_{degrees}deg.csv"))
}

fn golden_scenario(material: &str, degrees: u32) -> Scenario {
    let mut s = Scenario::with_material(preset(material).unwrap(), (degrees as f64).to_radians());
    s.run.duration = 3.0;
    s
}

fn determinism() -> Check {
    let opts = TraceOptions { deterministic: true };
    let s = load("grass_small.ini")?;
    let a = run(&s).map_err(|e| e.to_string())?.trace_csv(opts);
    let b = run(&s).map_err(|e| e.to_string())?.trace_csv(opts);
    ensure(a == b, "two runs of the same scenario differ")?;

    let bless = std::env::var("SOFTSTEP_BLESS").is_ok_and(|v| v == "1");
    let mut checked = 0;
    for material in ["sand", "soil", "mud", "snow"] {
        for degrees in [0, 10] {
            let trace = run(&golden_scenario(material, degrees)).map_err(|e| e.to_string())?.trace_csv(opts);
            let path = golden_path(material, degrees);
            if bless {
                std::fs::write(&path, &trace).map_err(|e| e.to_string())?;
            }
            let golden = std::fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
            ensure(golden == trace, format!("{} differs from the current trace", rel(&path)))?;
            checked += 1;
        }
    }
    Ok(format!("repeat runs identical, {checked} golden traces match"))
}

fn rel(p: &Path) -> String {
    p.strip_prefix(manifest_dir()).unwrap_or(p).display().to_string()
}

fn layer_isolation() -> Check {
    let mut s = Scenario::with_material(
        TerrainMaterial { name: "rigid".into(), depth: 0.0, compression: 0.0, smoothness: 0.3 },
        10f64.to_radians(),
    );
    s.run.duration = 6.0;
    let opts = TraceOptions { deterministic: true };
    let layered = run(&s).map_err(|e| e.to_string())?;
    let baseline = run_with_layers(&s, Layers::BASELINE).map_err(|e| e.to_string())?;
    ensure(layered.trace_csv(opts) == baseline.trace_csv(opts), "rigid trace differs from the baseline")?;
    ensure(layered.final_field == baseline.final_field, "rigid terrain differs from the baseline")?;
    Ok(format!("{} frames identical", layered.trace.len()))
}

fn main() -> ExitCode {
    type Criterion = (&'static str, fn() -> Check);
    let criteria: [Criterion; 9] = [
        ("1 parameter fidelity", parameter_fidelity),
        ("2 real-time budget", real_time_budget),
        ("3 controller properties", controller_properties),
        ("4 deformation ledger", deformation_ledger),
        ("5 displacement field", displacement_field),
        ("6 IK oracle", ik_oracle),
        ("7 platform behavior", platform_behavior),
        ("8 determinism", determinism),
        ("9 layer isolation", layer_isolation),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        match check() {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL {name}: {why}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
