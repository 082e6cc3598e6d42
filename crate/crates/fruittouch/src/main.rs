use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use fruittouch::config::Config;
use fruittouch::experiments::{geometry, harvest, normal_force, shear, slip, softness};
use fruittouch::io::{self, ForceModels};
use fruittouch::pipeline::PerceptionLoop;
use fruittouch_core::force::fit_normal_force;
use fruittouch_core::frame::TactileFrame;
use fruittouch_core::geometry::reconstruction_error;
use fruittouch_core::harvest::{FruitKind, Strategy};
use fruittouch_core::markers::MarkerSet;
use fruittouch_core::sim::GraspPose;
use fruittouch_core::slip::evaluate_slip_detector;
use fruittouch_core::softness::eval_pairwise_accuracy;

#[derive(Parser)]
#[command(name = "fruittouch", version, about = "Tactile perception toolkit and grasp simulator")]
#[command(after_long_help = Config::key_help())]
struct Cli {
    /// Configuration file of `key = value` lines.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for every random draw.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Scene {
    Calibration,
    Pyramid,
    Slip,
}

#[derive(Clone, Copy, ValueEnum)]
enum Pose {
    Top,
    Side,
}

#[derive(Clone, Copy, ValueEnum)]
enum Target {
    Normals,
    Force,
}

#[derive(Subcommand)]
enum Command {
    /// Write a simulated dataset directory.
    Sim {
        #[arg(long, value_enum)]
        scene: Scene,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "top")]
        pose: Pose,
        #[arg(long, default_value_t = 20.0)]
        load_g: f64,
        #[arg(long, default_value_t = 200)]
        frames: usize,
        /// Grip force behind the recorded motor current, N.
        #[arg(long, default_value_t = 8.0)]
        grip_n: f64,
    },
    /// Fit the RGB-to-normal model from a calibration directory, or the
    /// force models.
    Calibrate {
        #[arg(long, value_enum, default_value = "normals")]
        target: Target,
        /// Calibration directory written by `sim --scene calibration`.
        #[arg(long, required_if_eq("target", "normals"))]
        dir: Option<PathBuf>,
        /// `current_a,force_n` CSV; simulated when absent.
        #[arg(long)]
        samples: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Reconstruct a heightmap from `background.ppm` and `frame.ppm`.
    Reconstruct {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        dir: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Stream per-frame normal and shear force estimates.
    Force {
        #[arg(long)]
        model: PathBuf,
        /// RGB-to-normal model, needed for shear.
        #[arg(long)]
        normals: Option<PathBuf>,
        #[arg(long)]
        dir: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Per-frame slip detection over a sequence directory.
    Slip {
        #[arg(long)]
        normals: PathBuf,
        #[arg(long)]
        dir: PathBuf,
        /// Overrides `slip.threshold_px`.
        #[arg(long)]
        threshold: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train the hardness ranker on simulated replicas.
    SoftnessTrain {
        #[arg(long)]
        out: PathBuf,
    },
    /// Per-hardness pairwise accuracy of a ranker on held-out replicas.
    SoftnessEval {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Harvest ablation over strategies and fruit types.
    HarvestSim {
        /// `open_loop`, `slip`, `slip_force` or `all`.
        #[arg(long, default_value = "all")]
        strategy: String,
        /// `cherry_tomato`, `strawberry` or `all`.
        #[arg(long, default_value = "all")]
        fruit: String,
        /// Overrides `harvest.trials`.
        #[arg(long)]
        trials: Option<usize>,
        /// Per-trial CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => io::write_file(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn frame_name(k: usize) -> String {
    format!("frame_{k:04}.ppm")
}

fn run(cli: Cli) -> Result<()> {
    let cfg = match &cli.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    let seed = cli.seed;
    match cli.command {
        Command::Sim {
            scene,
            out,
            pose,
            load_g,
            frames,
            grip_n,
        } => simulate(&cfg, seed, scene, &out, pose, load_g, frames, grip_n),
        Command::Calibrate {
            target,
            dir,
            samples,
            out,
        } => match target {
            Target::Normals => {
                let dir = dir.context("--dir is required")?;
                let session = load_calibration(&cfg, &dir)?;
                let model = geometry::calibrate(&cfg, &session, seed)?;
                io::write_file(&out, io::rgb2normal_to_text(&model))?;
                println!("presses={}", session.presses.len());
                Ok(())
            }
            Target::Force => {
                let normal = match samples {
                    Some(p) => fit_normal_force(&read_current_force(&p)?)?,
                    None => normal_force::run(&cfg, &Default::default(), seed)?.model,
                };
                let sh = shear::run(&cfg, &Default::default(), seed)?;
                let models = ForceModels {
                    normal,
                    shear: Some(sh.model),
                };
                io::write_file(&out, io::force_models_to_text(&models))?;
                println!("normal_slope={} normal_intercept={}", normal.slope, normal.intercept);
                println!("shear_heldout_r2={:.4} shear_heldout_mape_pct={:.2}", sh.r2, sh.mape);
                Ok(())
            }
        },
        Command::Reconstruct { model, dir, out } => {
            let model = io::rgb2normal_from_text(&io::read_text(&model)?)?;
            let ppm = cfg.gel().px_per_mm();
            let bg = io::load_frame(&dir.join("background.ppm"), ppm)?;
            let frame = io::load_frame(&dir.join("frame.ppm"), ppm)?;
            let h = geometry::reconstruct(&model, &frame, &bg)?;
            if let Some(o) = &out {
                io::save_heightmap(o, &h)?;
            }
            println!("peak_mm={:.4}", h.max());
            let truth = dir.join("truth.csv");
            if truth.exists() {
                let t = io::load_heightmap(&truth, ppm)?;
                println!("mse_mm2={:.6}", reconstruction_error(&h, &t)?);
            }
            Ok(())
        }
        Command::Force {
            model,
            normals,
            dir,
            out,
        } => {
            let models = io::force_models_from_text(&io::read_text(&model)?)?;
            let currents = read_currents(&dir.join("current.csv"))?;
            let mut csv = String::from("frame,f_n,f_x,f_y\n");
            match normals {
                Some(n) => {
                    let rgb = io::rgb2normal_from_text(&io::read_text(&n)?)?;
                    let seq = load_sequence(&cfg, &dir)?;
                    let rest = io::load_markers(&dir.join("rest_markers.csv"))?.into_iter().next();
                    let mut pl = PerceptionLoop::new(&cfg, rgb, models, seq.background, rest)?;
                    for (k, (f, m)) in seq.frames.iter().zip(&seq.markers).enumerate() {
                        let i = *currents.get(k).with_context(|| format!("no current for frame {k}"))?;
                        let t = pl.tick(f, m, i)?;
                        let (fx, fy) = t.shear_n.map_or((String::new(), String::new()), |s| (s[0].to_string(), s[1].to_string()));
                        writeln!(csv, "{k},{},{fx},{fy}", t.normal_force_n)?;
                    }
                }
                None => {
                    for (k, i) in currents.iter().enumerate() {
                        writeln!(csv, "{k},{},,", models.normal.predict(*i).max(0.0))?;
                    }
                }
            }
            emit(out.as_deref(), &csv)
        }
        Command::Slip {
            normals,
            dir,
            threshold,
            out,
        } => {
            let mut cfg = cfg;
            if let Some(t) = threshold {
                cfg.slip.threshold_px = t;
                cfg.validate()?;
            }
            let rgb = io::rgb2normal_from_text(&io::read_text(&normals)?)?;
            let seq = load_sequence(&cfg, &dir)?;
            let frames = slip::detect_sequence(&cfg, &rgb, &seq.background, &seq.frames, &seq.markers)?;
            let mut csv = String::from("frame,object_vx,object_vy,marker_vx,marker_vy,speed_diff,slip\n");
            for (k, f) in frames.iter().enumerate() {
                writeln!(
                    csv,
                    "{k},{:.4},{:.4},{:.4},{:.4},{:.4},{}",
                    f.object_velocity[0],
                    f.object_velocity[1],
                    f.marker_velocity[0],
                    f.marker_velocity[1],
                    f.speed_difference,
                    f.slip as u8
                )?;
            }
            emit(out.as_deref(), &csv)?;
            let predicted: Vec<bool> = frames.iter().map(|f| f.slip).collect();
            let mut summary = format!(
                "summary {{\n  frames: {}\n  slip_frames: {}\n  threshold_px: {}\n",
                frames.len(),
                predicted.iter().filter(|s| **s).count(),
                cfg.slip.threshold_px
            );
            let labels = dir.join("labels.csv");
            if labels.exists() {
                let truth = read_labels(&labels)?;
                let s = evaluate_slip_detector(&[predicted], &[truth], cfg.sim.fps)?;
                writeln!(
                    summary,
                    "  precision: {:.4}\n  recall: {:.4}\n  f1: {:.4}",
                    s.precision, s.recall, s.f1
                )?;
                if let Some(l) = s.mean_lead_time_s {
                    writeln!(summary, "  mean_lead_time_s: {l:.4}")?;
                }
            }
            summary.push_str("}\n");
            if out.is_some() {
                print!("{summary}");
            } else {
                eprint!("{summary}");
            }
            Ok(())
        }
        Command::SoftnessTrain { out } => {
            let data = softness::generate(&cfg, seed)?;
            let r = fruittouch_core::softness::train_ranker(&data.clips, &data.train_pairs(), &cfg.train_options(seed))?;
            io::write_file(&out, io::ranker_to_text(&r.model))?;
            let acc = eval_pairwise_accuracy(&r.model, &data.clips, &data.train_pairs());
            println!(
                "pairs={} initial_loss={:.4} final_loss={:.4} train_accuracy={:.4}",
                data.train_pairs().len(),
                r.loss_history[0],
                r.loss_history.last().copied().unwrap_or(f64::NAN),
                acc.aggregate
            );
            Ok(())
        }
        Command::SoftnessEval { model, out } => {
            let model = io::ranker_from_text(&io::read_text(&model)?)?;
            let data = softness::generate(&cfg, seed)?;
            let rep = eval_pairwise_accuracy(&model, &data.clips, &data.test_pairs());
            let mut csv = String::from("fruit,shore_00,correct,total,accuracy\n");
            for g in &rep.groups {
                writeln!(csv, "{},{},{},{},{:.4}", g.fruit.name(), g.shore_00, g.correct, g.total, g.accuracy())?;
            }
            writeln!(csv, "all,,,,{:.4}", rep.aggregate)?;
            emit(out.as_deref(), &csv)
        }
        Command::HarvestSim {
            strategy,
            fruit,
            trials,
            out,
        } => {
            let strategies: Vec<Strategy> = if strategy == "all" {
                Strategy::ALL.to_vec()
            } else {
                vec![strategy.parse().map_err(|e| anyhow::anyhow!("{e}"))?]
            };
            let kinds: Vec<FruitKind> = if fruit == "all" {
                FruitKind::ALL.to_vec()
            } else {
                vec![fruit.parse().map_err(|e| anyhow::anyhow!("{e}"))?]
            };
            let n = trials.unwrap_or(cfg.harvest.trials);
            let rep = harvest::run(&cfg, &kinds, &strategies, n, seed)?;
            if let Some(o) = &out {
                let mut csv = String::from("fruit,strategy,trial,diameter_mm,success,failure,attempts,peak_force_n\n");
                for t in &rep.trials {
                    writeln!(
                        csv,
                        "{},{},{},{:.3},{},{},{},{:.4}",
                        t.kind.name(),
                        t.strategy.name(),
                        t.trial,
                        t.fruit.diameter_mm,
                        t.outcome.success as u8,
                        t.outcome.failure.name(),
                        t.outcome.attempts,
                        t.outcome.peak_force_n
                    )?;
                }
                io::write_file(o, csv)?;
            }
            println!("fruit,strategy,trials,success_rate,mean_attempts,force_mean_n,force_var_n2,slip_drop,bruise,max_retries");
            for s in &rep.summaries {
                println!(
                    "{},{},{},{:.4},{:.3},{:.4},{:.4},{},{},{}",
                    s.kind.name(),
                    s.strategy.name(),
                    s.trials,
                    s.success_rate,
                    s.mean_attempts,
                    s.force_mean,
                    s.force_var,
                    s.failures[0].1,
                    s.failures[1].1,
                    s.failures[2].1
                );
            }
            Ok(())
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn simulate(cfg: &Config, seed: u64, scene: Scene, out: &Path, pose: Pose, load_g: f64, frames: usize, grip_n: f64) -> Result<()> {
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let sim = cfg.tactile_sim();
    let mut rng: rand_chacha::ChaCha8Rng = rand::SeedableRng::seed_from_u64(seed);
    match scene {
        Scene::Calibration => {
            let s = geometry::simulate_calibration(cfg, &mut rng)?;
            io::save_frame(&out.join("background.ppm"), &s.background)?;
            let mut csv = String::from("file,x_mm,y_mm\n");
            for (k, (f, c)) in s.presses.iter().enumerate() {
                let name = format!("press_{k:02}.ppm");
                io::save_frame(&out.join(&name), f)?;
                writeln!(csv, "{name},{},{}", c[0], c[1])?;
            }
            io::write_file(&out.join("presses.csv"), csv)?;
            println!("presses={}", s.presses.len());
        }
        Scene::Pyramid => {
            let bg = sim.observe(&sim.background(), &mut rng);
            let h = sim.pressed(&geometry::pyramid(), sim.center_mm(), 2.0)?;
            io::save_frame(&out.join("background.ppm"), &bg)?;
            io::save_frame(&out.join("frame.ppm"), &sim.observe(&sim.render(&h), &mut rng))?;
            io::save_heightmap(&out.join("truth.csv"), &h)?;
            println!("peak_mm={:.4}", h.max());
        }
        Scene::Slip => {
            let pose = match pose {
                Pose::Top => GraspPose::Top,
                Pose::Side => GraspPose::Side,
            };
            let seq = sim.slip_sequence(&slip::scene(pose, load_g), frames, &mut rng)?;
            io::save_frame(&out.join("background.ppm"), &seq.background)?;
            for (k, f) in seq.frames.iter().enumerate() {
                io::save_frame(&out.join(frame_name(k)), f)?;
            }
            io::save_markers(&out.join("markers.csv"), &seq.markers)?;
            io::save_markers(&out.join("rest_markers.csv"), std::slice::from_ref(&seq.rest_markers))?;
            let mut labels = String::from("frame,slip\n");
            let mut current = String::from("frame,current_a\n");
            for (k, l) in seq.labels.iter().enumerate() {
                writeln!(labels, "{k},{}", *l as u8)?;
                writeln!(current, "{k},{}", sim.current.sample(grip_n, &mut rng))?;
            }
            io::write_file(&out.join("labels.csv"), labels)?;
            io::write_file(&out.join("current.csv"), current)?;
            println!("frames={} slip_frames={}", seq.len(), seq.labels.iter().filter(|l| **l).count());
        }
    }
    Ok(())
}

fn csv_rows(path: &Path, columns: usize) -> Result<Vec<Vec<String>>> {
    let text = io::read_text(path)?;
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate().skip(1) {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let cells: Vec<String> = line.split(',').map(|c| c.trim().to_string()).collect();
        if cells.len() != columns {
            bail!("{}: line {}: expected {columns} columns", path.display(), i + 1);
        }
        rows.push(cells);
    }
    Ok(rows)
}

fn parse_f64(path: &Path, s: &str) -> Result<f64> {
    s.parse().with_context(|| format!("{}: invalid number `{s}`", path.display()))
}

fn read_currents(path: &Path) -> Result<Vec<f64>> {
    csv_rows(path, 2)?.iter().map(|r| parse_f64(path, &r[1])).collect()
}

fn read_current_force(path: &Path) -> Result<Vec<(f64, f64)>> {
    csv_rows(path, 2)?
        .iter()
        .map(|r| Ok((parse_f64(path, &r[0])?, parse_f64(path, &r[1])?)))
        .collect()
}

fn read_labels(path: &Path) -> Result<Vec<bool>> {
    csv_rows(path, 2)?.iter().map(|r| Ok(parse_f64(path, &r[1])? != 0.0)).collect()
}

fn load_calibration(cfg: &Config, dir: &Path) -> Result<geometry::CalibrationSession> {
    let ppm = cfg.gel().px_per_mm();
    let list = dir.join("presses.csv");
    let background = io::load_frame(&dir.join("background.ppm"), ppm)?;
    let presses = csv_rows(&list, 3)?
        .iter()
        .map(|r| {
            let f = io::load_frame(&dir.join(&r[0]), ppm)?;
            Ok((f, [parse_f64(&list, &r[1])?, parse_f64(&list, &r[2])?]))
        })
        .collect::<Result<Vec<_>>>()?;
    if presses.is_empty() {
        bail!("{}: no calibration presses listed", list.display());
    }
    Ok(geometry::CalibrationSession { background, presses })
}

struct Sequence {
    background: TactileFrame,
    frames: Vec<TactileFrame>,
    markers: Vec<MarkerSet>,
}

fn load_sequence(cfg: &Config, dir: &Path) -> Result<Sequence> {
    let ppm = cfg.gel().px_per_mm();
    let background = io::load_frame(&dir.join("background.ppm"), ppm)?;
    let markers = io::load_markers(&dir.join("markers.csv"))?;
    let frames = (0..markers.len())
        .map(|k| io::load_frame(&dir.join(frame_name(k)), ppm))
        .collect::<fruittouch::Result<Vec<_>>>()?;
    if frames.is_empty() {
        bail!("{}: sequence has no frames", dir.display());
    }
    Ok(Sequence {
        background,
        frames,
        markers,
    })
}
