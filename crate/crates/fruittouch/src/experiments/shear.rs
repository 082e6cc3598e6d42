//! Shear force regression on simulated marker fields.
//!
//! A sphere presses at a random spot and the gel under it is dragged by a
//! random translation plus a small twist. Force labels are proportional to
//! the translation with multiplicative sensor noise. Features come from the
//! full measurement path: noisy markers, IDW onto the lattice,
//! decomposition and contact-mask averaging.

use fruittouch_core::force::{
    fit_shear_model, interpolate_markers, r_squared, HhdSolver, ShearFeature, ShearModel,
};
use fruittouch_core::sim::{deform_markers, IndenterShape, ShearPattern};
use fruittouch_core::slip::segment_contact;
use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::config::Config;
use crate::error::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct ShearSetup {
    pub samples: usize,
    pub train: usize,
    pub sphere_radius_mm: f64,
    pub depth_mm: f64,
    pub center_jitter_mm: f64,
    pub shear_range_mm: (f64, f64),
    pub max_twist_mm: f64,
    pub stiffness_n_per_mm: f64,
    /// Relative std of the force label noise.
    pub label_noise: f64,
}

impl Default for ShearSetup {
    fn default() -> Self {
        Self {
            samples: 400,
            train: 300,
            sphere_radius_mm: 10.0,
            depth_mm: 1.0,
            center_jitter_mm: 3.0,
            shear_range_mm: (0.4, 2.0),
            max_twist_mm: 0.3,
            stiffness_n_per_mm: 1.0,
            label_noise: 0.06,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShearSample {
    pub feature: ShearFeature,
    pub label: [f64; 2],
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShearReport {
    pub model: ShearModel,
    pub r2: f64,
    /// Mean of `‖F̂ − F‖ / ‖F‖` over held-out samples, percent.
    pub mape: f64,
    pub train: usize,
    pub test: usize,
}

pub fn generate(cfg: &Config, setup: &ShearSetup, seed: u64) -> Result<Vec<ShearSample>> {
    let sim = cfg.tactile_sim();
    let layout = cfg.force_layout()?;
    let solver = HhdSolver::new(layout)?;
    let idw = cfg.idw();
    let rest = sim.gel.rest_markers();
    let ball = IndenterShape::Sphere {
        radius_mm: setup.sphere_radius_mm,
    };
    let noise = Normal::new(0.0, setup.label_noise).map_err(|e| crate::error::format_err(e.to_string()))?;
    let mut rng = super::rng(seed);
    let c0 = sim.center_mm();
    let mut out = Vec::with_capacity(setup.samples);
    for _ in 0..setup.samples {
        let j = setup.center_jitter_mm;
        let c = [c0[0] + rng.random_range(-j..=j), c0[1] + rng.random_range(-j..=j)];
        let h = sim.pressed(&ball, c, setup.depth_mm)?;
        let mask = segment_contact(&h, cfg.slip.contact_threshold_mm)?;
        let mag = rng.random_range(setup.shear_range_mm.0..=setup.shear_range_mm.1);
        let ang = rng.random_range(0.0..std::f64::consts::TAU);
        let t = [mag * ang.cos(), mag * ang.sin()];
        let twist = rng.random_range(-setup.max_twist_mm..=setup.max_twist_mm);
        let moved = deform_markers(
            &rest,
            &mask,
            &[ShearPattern::Translation(t), ShearPattern::Rotation(twist)],
            &sim.gel,
        )?;
        let observed = sim.observe_markers(&moved, &mut rng);
        let v = interpolate_markers(&rest, &observed, layout, idw)?;
        let hhd = solver.decompose(&v)?;
        let feature = fruittouch_core::force::shear_features(&v, &hhd, &mask)?;
        let k = setup.stiffness_n_per_mm * (1.0 + noise.sample(&mut rng));
        out.push(ShearSample {
            feature,
            label: [k * t[0], k * t[1]],
        });
    }
    Ok(out)
}

/// Relative vector error, percent.
pub fn vector_mape(pred: &[[f64; 2]], truth: &[[f64; 2]]) -> f64 {
    let norm = |v: [f64; 2]| v[0].hypot(v[1]);
    let s: f64 = pred
        .iter()
        .zip(truth)
        .map(|(p, t)| norm([p[0] - t[0], p[1] - t[1]]) / norm(*t))
        .sum();
    100.0 * s / pred.len() as f64
}

pub fn run(cfg: &Config, setup: &ShearSetup, seed: u64) -> Result<ShearReport> {
    let data = generate(cfg, setup, seed)?;
    let (train, test) = data.split_at(setup.train.min(data.len()));
    let xs: Vec<ShearFeature> = train.iter().map(|s| s.feature).collect();
    let ys: Vec<[f64; 2]> = train.iter().map(|s| s.label).collect();
    let model = fit_shear_model(&xs, &ys)?;
    let pred: Vec<[f64; 2]> = test.iter().map(|s| model.predict(&s.feature)).collect();
    let truth: Vec<[f64; 2]> = test.iter().map(|s| s.label).collect();
    let flat = |v: &[[f64; 2]]| v.iter().flatten().copied().collect::<Vec<f64>>();
    Ok(ShearReport {
        model,
        r2: r_squared(&flat(&pred), &flat(&truth)),
        mape: vector_mape(&pred, &truth),
        train: train.len(),
        test: test.len(),
    })
}
