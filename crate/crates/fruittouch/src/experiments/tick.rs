//! Wall-clock budget of the full perception tick.

use std::time::Instant;

use fruittouch_core::surface::median;

use crate::config::Config;
use crate::error::Result;
use crate::io::ForceModels;
use crate::pipeline::PerceptionLoop;

#[derive(Debug, Clone, PartialEq)]
pub struct TickReport {
    pub ticks: usize,
    pub median_ms: f64,
    pub p95_ms: f64,
    pub max_ms: f64,
    pub resolution: usize,
}

/// Times `ticks` iterations of the loop, shear stage included, on a
/// simulated slip sequence.
pub fn run(cfg: &Config, ticks: usize, seed: u64) -> Result<TickReport> {
    if ticks == 0 {
        return Err(crate::error::format_err("need at least one tick"));
    }
    let sim = cfg.tactile_sim();
    let mut rng = super::rng(seed);
    let session = super::geometry::simulate_calibration(cfg, &mut rng)?;
    let model = super::geometry::calibrate(cfg, &session, seed)?;
    let shear = super::shear::run(cfg, &super::shear::ShearSetup::default(), seed)?.model;
    let current = cfg.current_model();
    let force = ForceModels {
        normal: cfg.normal_force_model(),
        shear: Some(shear),
    };
    let scene = super::slip::scene(fruittouch_core::sim::GraspPose::Top, 20.0);
    let seq = sim.slip_sequence(&scene, ticks.max(10), &mut rng)?;
    let mut pl = PerceptionLoop::new(cfg, model, force, seq.background.clone(), Some(seq.rest_markers.clone()))?;
    let mut times = Vec::with_capacity(ticks);
    for k in 0..ticks {
        let i = k % seq.len();
        let t = Instant::now();
        let out = pl.tick(&seq.frames[i], &seq.markers[i], current.noiseless(8.0))?;
        times.push(1e3 * t.elapsed().as_secs_f64());
        std::hint::black_box(out);
    }
    let mut sorted = times.clone();
    sorted.sort_by(f64::total_cmp);
    let p95_ms = sorted[(sorted.len() * 95 / 100).min(sorted.len() - 1)];
    let max_ms = sorted.last().copied().unwrap_or(0.0);
    Ok(TickReport {
        ticks,
        median_ms: median(times),
        p95_ms,
        max_ms,
        resolution: sim.size(),
    })
}
