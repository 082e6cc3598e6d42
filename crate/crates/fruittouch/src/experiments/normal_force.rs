//! Normal force from gripper motor current.

use fruittouch_core::force::{fit_normal_force, mape, r_squared, NormalForceModel};
use rand::Rng;

use crate::config::Config;
use crate::error::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct NormalForceSetup {
    pub samples: usize,
    pub train: usize,
    pub force_range_n: (f64, f64),
}

impl Default for NormalForceSetup {
    fn default() -> Self {
        Self {
            samples: 10_000,
            train: 8_000,
            force_range_n: (4.0, 14.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormalForceReport {
    pub model: NormalForceModel,
    pub r2: f64,
    /// Percent.
    pub mape: f64,
    pub train: usize,
    pub test: usize,
}

/// `(current, force)` pairs from the configured current model.
pub fn generate(cfg: &Config, setup: &NormalForceSetup, seed: u64) -> Vec<(f64, f64)> {
    let current = cfg.current_model();
    let mut rng = super::rng(seed);
    let (lo, hi) = setup.force_range_n;
    (0..setup.samples)
        .map(|_| {
            let f = rng.random_range(lo..=hi);
            (current.sample(f, &mut rng), f)
        })
        .collect()
}

pub fn run(cfg: &Config, setup: &NormalForceSetup, seed: u64) -> Result<NormalForceReport> {
    let data = generate(cfg, setup, seed);
    let (train, test) = data.split_at(setup.train.min(data.len()));
    let model = fit_normal_force(train)?;
    let pred: Vec<f64> = test.iter().map(|(i, _)| model.predict(*i)).collect();
    let truth: Vec<f64> = test.iter().map(|(_, f)| *f).collect();
    Ok(NormalForceReport {
        model,
        r2: r_squared(&pred, &truth),
        mape: mape(&pred, &truth),
        train: train.len(),
        test: test.len(),
    })
}
