//! Pairwise hardness ranking on simulated fruit replicas.

use fruittouch_core::force::NormalForceModel;
use fruittouch_core::frame::{diff_image, DiffFrame};
use fruittouch_core::sim::{CompressionSetup, FruitTexture, Replica, TactileSim};
use fruittouch_core::softness::{
    eval_pairwise_accuracy, make_pairs, train_ranker, AccuracyReport, ClipFeatures, CompressionClip, RankerModel,
};
use rand::Rng;

use crate::config::Config;
use crate::error::Result;

/// Replica hardness levels, Shore 00.
pub const SHORE_LEVELS: [f64; 4] = [68.4, 64.8, 51.4, 42.2];

/// Simulates one squeeze and converts it to network input, with forces
/// estimated from the noisy motor current.
pub fn simulate_clip<R: Rng>(
    sim: &TactileSim,
    replica: &Replica,
    frames: usize,
    force_model: &NormalForceModel,
    rng: &mut R,
) -> Result<CompressionClip> {
    let d = sim.compression_clip(replica, &CompressionSetup::default(), frames, rng)?;
    let diffs: Vec<DiffFrame> = d
        .frames
        .iter()
        .map(|f| diff_image(f, &d.background))
        .collect::<std::result::Result<_, _>>()?;
    let forces = d.current.iter().map(|i| force_model.predict(*i).max(0.0)).collect();
    Ok(CompressionClip::new(diffs, forces, replica.texture, replica.shore_00)?)
}

/// Every fruit × hardness × trial clip, with trials split into training and
/// held-out indices.
#[derive(Debug, Clone)]
pub struct SoftnessDataset {
    pub clips: Vec<ClipFeatures>,
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

impl SoftnessDataset {
    pub fn train_pairs(&self) -> Vec<(usize, usize, f64)> {
        make_pairs(&self.clips, &self.train)
    }

    pub fn test_pairs(&self) -> Vec<(usize, usize, f64)> {
        make_pairs(&self.clips, &self.test)
    }
}

pub fn generate(cfg: &Config, seed: u64) -> Result<SoftnessDataset> {
    let sim = cfg.tactile_sim();
    let fm = cfg.normal_force_model();
    let s = &cfg.softness;
    let mut rng = super::rng(seed);
    let mut data = SoftnessDataset {
        clips: Vec::new(),
        train: Vec::new(),
        test: Vec::new(),
    };
    for texture in FruitTexture::ALL {
        for shore_00 in SHORE_LEVELS {
            for trial in 0..s.trials {
                let clip = simulate_clip(&sim, &Replica { texture, shore_00 }, s.clip_frames, &fm, &mut rng)?;
                let idx = data.clips.len();
                data.clips.push(ClipFeatures::from_clip(&clip)?);
                if trial < s.train_trials {
                    data.train.push(idx);
                } else {
                    data.test.push(idx);
                }
            }
        }
    }
    Ok(data)
}

#[derive(Debug, Clone)]
pub struct SoftnessReport {
    pub model: RankerModel,
    pub loss_history: Vec<f64>,
    pub train_accuracy: f64,
    pub test: AccuracyReport,
    /// Mean held-out accuracy of randomly initialised models.
    pub untrained_accuracy: f64,
    /// Held-out accuracy of the trained model with its bias zeroed.
    pub zero_bias_accuracy: f64,
}

/// Mean held-out accuracy over `models` random initialisations, using the
/// input scaling of `reference`.
pub fn untrained_accuracy(data: &SoftnessDataset, reference: &RankerModel, models: u64) -> f64 {
    let pairs = data.test_pairs();
    let total: f64 = (0..models)
        .map(|k| {
            let mut m = RankerModel::init(1000 + k);
            m.pixel_norm = reference.pixel_norm;
            m.force_norm = reference.force_norm;
            eval_pairwise_accuracy(&m, &data.clips, &pairs).aggregate
        })
        .sum();
    total / models.max(1) as f64
}

pub fn train_and_evaluate(cfg: &Config, data: &SoftnessDataset, seed: u64) -> Result<SoftnessReport> {
    let train_pairs = data.train_pairs();
    let r = train_ranker(&data.clips, &train_pairs, &cfg.train_options(seed))?;
    let test_pairs = data.test_pairs();
    let test = eval_pairwise_accuracy(&r.model, &data.clips, &test_pairs);
    let mut unbiased = r.model.clone();
    unbiased.set_bias(0.0);
    Ok(SoftnessReport {
        zero_bias_accuracy: eval_pairwise_accuracy(&unbiased, &data.clips, &test_pairs).aggregate,
        train_accuracy: eval_pairwise_accuracy(&r.model, &data.clips, &train_pairs).aggregate,
        untrained_accuracy: untrained_accuracy(data, &r.model, 20),
        test,
        model: r.model,
        loss_history: r.loss_history,
    })
}

pub fn run(cfg: &Config, seed: u64) -> Result<SoftnessReport> {
    train_and_evaluate(cfg, &generate(cfg, seed)?, seed)
}
