use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use dqkit::dq::{DualQuaternion, E, I, J, K};
use dqkit::kinematics::{Kinematics, Robot};
use dqkit::sim::{self, Scene, SimConfig};
use dqkit::{robots, Error};
use rand::{Rng, SeedableRng};

#[derive(Parser)]
#[command(name = "dqkit", version, about = "Dual quaternion kinematics toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the two-robot drawing scene and write the per-tick table.
    Simulate {
        /// Scene file, or `drawing` for the shipped scene.
        #[arg(long)]
        scene: String,
        /// Simulated time in seconds; defaults to the scene's value.
        #[arg(long)]
        duration: Option<f64>,
        /// Sampling time in seconds; defaults to the scene's value.
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long)]
        csv: PathBuf,
        /// Optional top-view drawing of the base path and obstacles.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Forward kinematics of a model at one configuration.
    Fkm {
        /// Model file, or a shipped model name (`lwr4`, `youbot`, `differential_base`).
        #[arg(long)]
        model: String,
        /// Joint values, comma separated.
        #[arg(long, allow_hyphen_values = true)]
        q: String,
    },
    /// Pseudoinverse pose regulation of the LWR4 from a fixed start.
    #[command(name = "regress-listing3")]
    RegressRegulation,
    /// Time dual quaternion multiplications on random operands.
    BenchMul {
        /// Total number of products.
        #[arg(long, default_value_t = 1_000_000)]
        iterations: usize,
        /// Products per timed set.
        #[arg(long, default_value_t = 1000)]
        set_size: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Infeasible(_) => 2,
        Error::ModelFile { .. } | Error::Io(_) | Error::Csv(_) => 3,
        _ => 1,
    }
}

fn load_model(model: &str) -> dqkit::Result<Robot> {
    match robots::shipped_model(model) {
        Some(text) => robots::parse_robot(text, model),
        None => robots::load_robot(model),
    }
}

fn parse_list(text: &str) -> dqkit::Result<Vec<f64>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>().map_err(|e| Error::Domain(format!("bad joint value `{s}`: {e}"))))
        .collect()
}

fn simulate(scene: &str, duration: Option<f64>, dt: Option<f64>, csv: &Path, svg: Option<&Path>) -> dqkit::Result<()> {
    let scene = if scene == "drawing" { sim::drawing_scene()? } else { Scene::load(scene)? };
    let base = scene.config.unwrap_or_default();
    let config = SimConfig {
        sampling_time: dt.unwrap_or(base.sampling_time),
        total_time: duration.unwrap_or(base.total_time),
    };
    let out = sim::run_simulation(&scene, &config)?;
    out.report.emit_csv(csv)?;
    if let Some(path) = svg {
        out.emit_svg_topview(path)?;
    }
    let report = &out.report;
    println!("rows: {}", report.rows.len());
    for (label, c) in report.header.iter().filter(|h| h.starts_with("dtilde")).zip(report.min_clearances()) {
        println!("min {label}: {c:.6}");
    }
    println!("max arm error: {:.6e}", report.max_manipulator_error());
    println!("max mobile error: {:.6e}", report.max_mobile_error());
    let drawing = report.rows.iter().filter(|r| r.drawing()).count();
    println!("pen on board: {drawing}/{}", report.rows.len());
    Ok(())
}

fn fkm(model: &str, q: &str) -> dqkit::Result<()> {
    let robot = load_model(model)?;
    let q = parse_list(q)?;
    let x = robot.fkm(&q)?;
    let t = x.translation()?;
    println!("pose: {x}");
    println!("translation: {:.9} {:.9} {:.9}", t.0[1], t.0[2], t.0[3]);
    println!("rotation angle: {:.9}", x.rotation_angle()?);
    Ok(())
}

fn regress_regulation() -> dqkit::Result<bool> {
    let r = (PI / 2.0).cos() + J * (PI / 2.0).sin();
    let p = 0.1 * I + 0.2 * J + 0.3 * K;
    let xd = r + E * 0.5 * p * r;
    let q0 = [0.0, 0.3770, 0.1257, -0.5655, 0.0, 0.0, 0.0];
    let arm = robots::lwr4_kinematics()?;
    let run = sim::regulate_pose(&arm, &q0, &xd, 10.0, 0.001, 1e-3, 1_000_000)?;
    println!("iterations: {}", run.iterations);
    println!("final error: {:.6e}", run.error_norm);
    println!("converged: {}", run.converged);
    Ok(run.converged)
}

fn bench_mul(iterations: usize, set_size: usize, seed: u64) -> dqkit::Result<()> {
    if set_size == 0 || iterations < set_size {
        return Err(Error::Domain("iterations must be at least one set".into()));
    }
    let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
    let mut random = || DualQuaternion(std::array::from_fn(|_| rng.gen_range(-1.0..1.0)));
    let pairs: Vec<_> = (0..set_size).map(|_| (random(), random())).collect();
    let t = sim::time_multiplications(&pairs, iterations / set_size);
    println!("products: {} ({} sets of {})", t.sets * t.per_set, t.sets, t.per_set);
    println!("mean: {:.4} us", t.mean_us);
    println!("std: {:.4} us", t.std_us);
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Simulate { scene, duration, dt, csv, svg } => simulate(&scene, duration, dt, &csv, svg.as_deref()),
        Command::Fkm { model, q } => fkm(&model, &q),
        Command::RegressRegulation => match regress_regulation() {
            Ok(true) => Ok(()),
            Ok(false) => return ExitCode::from(1),
            Err(e) => Err(e),
        },
        Command::BenchMul { iterations, set_size, seed } => bench_mul(iterations, set_size, seed),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
