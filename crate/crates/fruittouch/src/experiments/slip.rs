//! Slip detection benchmark over grasp poses and loads.

use std::time::Instant;

use fruittouch_core::frame::TactileFrame;
use fruittouch_core::geometry::Rgb2NormalModel;
use fruittouch_core::markers::MarkerSet;
use fruittouch_core::sim::{GraspPose, GraspScene};
use fruittouch_core::slip::{evaluate_slip_detector, SlipFrame, SlipSummary};

use crate::config::Config;
use crate::error::Result;
use crate::io::ForceModels;
use crate::pipeline::PerceptionLoop;

#[derive(Debug, Clone, PartialEq)]
pub struct SlipSetup {
    pub poses: Vec<GraspPose>,
    pub loads_g: Vec<f64>,
    pub repeats: usize,
    pub frames: usize,
}

impl Default for SlipSetup {
    fn default() -> Self {
        Self {
            poses: vec![GraspPose::Top, GraspPose::Side],
            loads_g: vec![10.0, 20.0, 50.0],
            repeats: 2,
            frames: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SlipTrial {
    pub pose: GraspPose,
    pub load_g: f64,
    pub repeat: usize,
    pub frames: Vec<SlipFrame>,
    pub labels: Vec<bool>,
}

impl SlipTrial {
    pub fn predicted(&self) -> Vec<bool> {
        self.frames.iter().map(|f| f.slip).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SlipReport {
    pub trials: Vec<SlipTrial>,
    pub summary: SlipSummary,
    /// Mean wall time of one perception tick, ms.
    pub mean_tick_ms: f64,
}

/// Runs the perception loop over a recorded sequence.
pub fn detect_sequence(
    cfg: &Config,
    model: &Rgb2NormalModel,
    background: &TactileFrame,
    frames: &[TactileFrame],
    markers: &[MarkerSet],
) -> Result<Vec<SlipFrame>> {
    if frames.len() != markers.len() {
        return Err(crate::error::format_err(format!(
            "{} frames but {} marker sets",
            frames.len(),
            markers.len()
        )));
    }
    let force = ForceModels {
        normal: cfg.normal_force_model(),
        shear: None,
    };
    let mut pl = PerceptionLoop::new(cfg, model.clone(), force, background.clone(), None)?;
    frames
        .iter()
        .zip(markers)
        .map(|(f, m)| Ok(pl.tick(f, m, 0.0)?.slip))
        .collect()
}

/// Scene for one benchmark cell.
pub fn scene(pose: GraspPose, load_g: f64) -> GraspScene {
    GraspScene {
        pose,
        load_g,
        ..GraspScene::default()
    }
}

pub fn run(cfg: &Config, setup: &SlipSetup, seed: u64) -> Result<SlipReport> {
    let sim = cfg.tactile_sim();
    let mut rng = super::rng(seed);
    let session = super::geometry::simulate_calibration(cfg, &mut rng)?;
    let model = super::geometry::calibrate(cfg, &session, seed)?;
    let mut trials = Vec::new();
    let mut ticks = 0usize;
    let mut tick_time = 0.0;
    for &pose in &setup.poses {
        for &load_g in &setup.loads_g {
            for repeat in 0..setup.repeats {
                let seq = sim.slip_sequence(&scene(pose, load_g), setup.frames, &mut rng)?;
                let t = Instant::now();
                let frames = detect_sequence(cfg, &model, &seq.background, &seq.frames, &seq.markers)?;
                tick_time += t.elapsed().as_secs_f64();
                ticks += frames.len();
                trials.push(SlipTrial {
                    pose,
                    load_g,
                    repeat,
                    frames,
                    labels: seq.labels,
                });
            }
        }
    }
    let preds: Vec<Vec<bool>> = trials.iter().map(SlipTrial::predicted).collect();
    let truth: Vec<Vec<bool>> = trials.iter().map(|t| t.labels.clone()).collect();
    let summary = evaluate_slip_detector(&preds, &truth, sim.fps)?;
    Ok(SlipReport {
        trials,
        summary,
        mean_tick_ms: 1e3 * tick_time / ticks.max(1) as f64,
    })
}
