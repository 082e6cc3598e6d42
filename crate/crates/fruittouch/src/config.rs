//! Flat `key = value` configuration shared by every subcommand.
//!
//! Keys are dotted (`slip.threshold_px`). Blank lines and `#` comments are
//! ignored. Unknown or repeated keys and unparsable values are errors that
//! name the line.

use std::path::Path;
use std::str::FromStr;

use fruittouch_core::force::{IdwOptions, NormalForceModel};
use fruittouch_core::geometry::{CalibrationOptions, FitOptions, Optimizer};
use fruittouch_core::grid::GridLayout;
use fruittouch_core::harvest::{FruitKind, HarvestSim, Strategy, StrategyConfig};
use fruittouch_core::sim::{CurrentModel, GelModel, LightRig, TactileSim};
use fruittouch_core::softness::TrainOptions;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub gel_size_mm: f64,
    pub resolution: usize,
    /// Overrides `gel_size_mm` as `resolution / px_per_mm` when set.
    pub px_per_mm: Option<f64>,
    pub membrane_sigma_mm: f64,
    pub marker_rows: usize,
    pub marker_cols: usize,
    pub pixel_noise: f64,
    pub marker_noise_px: f64,
    pub fps: f64,
    pub light_azimuth_deg: f64,
    pub light_elevation_deg: f64,
    pub light_intensity: f64,
    pub current_gain_a_per_n: f64,
    pub current_offset_a: f64,
    pub current_noise_a: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeometryConfig {
    pub sphere_radius_mm: f64,
    pub press_depth_mm: f64,
    pub epochs: usize,
    pub learning_rate: f64,
    /// Zero trains on the full batch.
    pub batch_size: usize,
    pub optimizer: Optimizer,
    pub rim_margin_px: f64,
    pub background_stride: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForceConfig {
    pub grid: usize,
    pub idw_neighbors: usize,
    pub idw_power: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SlipConfig {
    pub threshold_px: f64,
    pub contact_threshold_mm: f64,
    pub smoothing_frames: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SoftnessConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub train_bias: bool,
    pub clip_frames: usize,
    pub trials: usize,
    pub train_trials: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HarvestConfig {
    pub trials: usize,
    pub arm_speed_mm: f64,
    pub close_speed_mm: f64,
    pub clearance_mm: f64,
    pub close_margin_mm: f64,
    pub retry_increment_mm: f64,
    pub max_retries: u32,
    pub diameter_noise_mm: f64,
    pub velocity_noise_px: f64,
    pub px_per_mm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub sim: SimConfig,
    pub geometry: GeometryConfig,
    pub force: ForceConfig,
    pub slip: SlipConfig,
    pub softness: SoftnessConfig,
    pub harvest: HarvestConfig,
}

/// `(key, default, description)` for every accepted key.
pub const KEYS: &[(&str, &str, &str)] = &[
    ("sim.gel_size_mm", "30", "edge of the square sensing area, mm"),
    ("sim.resolution", "128", "frame edge, pixels"),
    ("sim.px_per_mm", "unset", "pixels per mm; when set, replaces gel_size_mm"),
    ("sim.membrane_sigma_mm", "0.25", "membrane smoothing of indentations, mm"),
    ("sim.marker_rows", "15", "marker lattice rows"),
    ("sim.marker_cols", "15", "marker lattice columns"),
    ("sim.pixel_noise", "0.008", "camera noise std, intensity units"),
    ("sim.marker_noise_px", "0.1", "marker tracking noise std, px"),
    ("sim.fps", "15", "camera and control rate, Hz"),
    ("sim.light_azimuth_deg", "90", "azimuth of the first light"),
    ("sim.light_elevation_deg", "60", "elevation of all three lights"),
    ("sim.light_intensity", "0.5", "per-light intensity"),
    ("sim.current_gain_a_per_n", "0.05", "motor current per newton"),
    ("sim.current_offset_a", "0.1", "motor current at zero force"),
    ("sim.current_noise_a", "0.015", "motor current noise std"),
    ("geometry.sphere_radius_mm", "5", "calibration ball radius"),
    ("geometry.press_depth_mm", "1", "calibration press depth"),
    ("geometry.epochs", "200", "RGB-to-normal training epochs"),
    ("geometry.learning_rate", "0.01", "RGB-to-normal learning rate"),
    ("geometry.batch_size", "256", "mini-batch size, 0 for full batch"),
    ("geometry.optimizer", "adam", "adam or gd"),
    ("geometry.rim_margin_px", "1.5", "calibration pixels skipped around the contact rim"),
    ("geometry.background_stride", "4", "stride of out-of-contact calibration pixels"),
    ("force.grid", "32", "displacement grid nodes per side"),
    ("force.idw_neighbors", "4", "markers used per interpolated node"),
    ("force.idw_power", "2", "inverse-distance power"),
    ("slip.threshold_px", "10", "slip when object and marker speeds differ by more, px/frame"),
    ("slip.contact_threshold_mm", "0.3", "height above which a pixel is in contact"),
    ("slip.smoothing_frames", "3", "velocity averaging window, 1 disables"),
    ("softness.epochs", "300", "ranker training epochs"),
    ("softness.learning_rate", "0.01", "ranker gradient-descent step"),
    ("softness.train_bias", "true", "learn the comparator bias"),
    ("softness.clip_frames", "20", "frames per simulated squeeze"),
    ("softness.trials", "10", "squeezes per fruit and hardness"),
    ("softness.train_trials", "7", "of which used for training"),
    ("harvest.trials", "50", "trials per strategy"),
    ("harvest.arm_speed_mm", "1.5", "arm retraction per tick"),
    ("harvest.close_speed_mm", "0.25", "finger travel per tick"),
    ("harvest.clearance_mm", "5", "initial opening beyond the measured diameter"),
    ("harvest.close_margin_mm", "2", "position-controlled close below the diameter"),
    ("harvest.retry_increment_mm", "2", "extra closing per slip retry"),
    ("harvest.max_retries", "5", "attempt limit"),
    ("harvest.diameter_noise_mm", "1", "fruit diameter measurement noise std"),
    ("harvest.velocity_noise_px", "1", "slip percept velocity noise std"),
    ("harvest.px_per_mm", "20", "image scale of the slip percept"),
];

impl Default for Config {
    fn default() -> Self {
        Self {
            sim: SimConfig {
                gel_size_mm: 30.0,
                resolution: 128,
                px_per_mm: None,
                membrane_sigma_mm: 0.25,
                marker_rows: 15,
                marker_cols: 15,
                pixel_noise: 0.008,
                marker_noise_px: 0.1,
                fps: 15.0,
                light_azimuth_deg: 90.0,
                light_elevation_deg: 60.0,
                light_intensity: 0.5,
                current_gain_a_per_n: 0.05,
                current_offset_a: 0.1,
                current_noise_a: 0.015,
            },
            geometry: GeometryConfig {
                sphere_radius_mm: 5.0,
                press_depth_mm: 1.0,
                epochs: 200,
                learning_rate: 0.01,
                batch_size: 256,
                optimizer: Optimizer::Adam,
                rim_margin_px: 1.5,
                background_stride: 4,
            },
            force: ForceConfig {
                grid: 32,
                idw_neighbors: 4,
                idw_power: 2.0,
            },
            slip: SlipConfig {
                threshold_px: 10.0,
                contact_threshold_mm: 0.3,
                smoothing_frames: 3,
            },
            softness: SoftnessConfig {
                epochs: 300,
                learning_rate: 0.01,
                train_bias: true,
                clip_frames: 20,
                trials: 10,
                train_trials: 7,
            },
            harvest: HarvestConfig {
                trials: 50,
                arm_speed_mm: 1.5,
                close_speed_mm: 0.25,
                clearance_mm: 5.0,
                close_margin_mm: 2.0,
                retry_increment_mm: 2.0,
                max_retries: 5,
                diameter_noise_mm: 1.0,
                velocity_noise_px: 1.0,
                px_per_mm: 20.0,
            },
        }
    }
}

fn value<T: FromStr>(key: &str, raw: &str) -> std::result::Result<T, String> {
    raw.parse().map_err(|_| format!("invalid value `{raw}` for `{key}`"))
}

fn optimizer(key: &str, raw: &str) -> std::result::Result<Optimizer, String> {
    match raw {
        "adam" => Ok(Optimizer::Adam),
        "gd" => Ok(Optimizer::GradientDescent),
        _ => Err(format!("invalid value `{raw}` for `{key}` (expected adam or gd)")),
    }
}

impl Config {
    /// Applies one `key = value` assignment.
    pub fn set(&mut self, key: &str, raw: &str) -> std::result::Result<(), String> {
        let s = &mut self.sim;
        let g = &mut self.geometry;
        let h = &mut self.harvest;
        match key {
            "sim.gel_size_mm" => s.gel_size_mm = value(key, raw)?,
            "sim.resolution" => s.resolution = value(key, raw)?,
            "sim.px_per_mm" => s.px_per_mm = if raw == "unset" { None } else { Some(value(key, raw)?) },
            "sim.membrane_sigma_mm" => s.membrane_sigma_mm = value(key, raw)?,
            "sim.marker_rows" => s.marker_rows = value(key, raw)?,
            "sim.marker_cols" => s.marker_cols = value(key, raw)?,
            "sim.pixel_noise" => s.pixel_noise = value(key, raw)?,
            "sim.marker_noise_px" => s.marker_noise_px = value(key, raw)?,
            "sim.fps" => s.fps = value(key, raw)?,
            "sim.light_azimuth_deg" => s.light_azimuth_deg = value(key, raw)?,
            "sim.light_elevation_deg" => s.light_elevation_deg = value(key, raw)?,
            "sim.light_intensity" => s.light_intensity = value(key, raw)?,
            "sim.current_gain_a_per_n" => s.current_gain_a_per_n = value(key, raw)?,
            "sim.current_offset_a" => s.current_offset_a = value(key, raw)?,
            "sim.current_noise_a" => s.current_noise_a = value(key, raw)?,
            "geometry.sphere_radius_mm" => g.sphere_radius_mm = value(key, raw)?,
            "geometry.press_depth_mm" => g.press_depth_mm = value(key, raw)?,
            "geometry.epochs" => g.epochs = value(key, raw)?,
            "geometry.learning_rate" => g.learning_rate = value(key, raw)?,
            "geometry.batch_size" => g.batch_size = value(key, raw)?,
            "geometry.optimizer" => g.optimizer = optimizer(key, raw)?,
            "geometry.rim_margin_px" => g.rim_margin_px = value(key, raw)?,
            "geometry.background_stride" => g.background_stride = value(key, raw)?,
            "force.grid" => self.force.grid = value(key, raw)?,
            "force.idw_neighbors" => self.force.idw_neighbors = value(key, raw)?,
            "force.idw_power" => self.force.idw_power = value(key, raw)?,
            "slip.threshold_px" => self.slip.threshold_px = value(key, raw)?,
            "slip.contact_threshold_mm" => self.slip.contact_threshold_mm = value(key, raw)?,
            "slip.smoothing_frames" => self.slip.smoothing_frames = value(key, raw)?,
            "softness.epochs" => self.softness.epochs = value(key, raw)?,
            "softness.learning_rate" => self.softness.learning_rate = value(key, raw)?,
            "softness.train_bias" => self.softness.train_bias = value(key, raw)?,
            "softness.clip_frames" => self.softness.clip_frames = value(key, raw)?,
            "softness.trials" => self.softness.trials = value(key, raw)?,
            "softness.train_trials" => self.softness.train_trials = value(key, raw)?,
            "harvest.trials" => h.trials = value(key, raw)?,
            "harvest.arm_speed_mm" => h.arm_speed_mm = value(key, raw)?,
            "harvest.close_speed_mm" => h.close_speed_mm = value(key, raw)?,
            "harvest.clearance_mm" => h.clearance_mm = value(key, raw)?,
            "harvest.close_margin_mm" => h.close_margin_mm = value(key, raw)?,
            "harvest.retry_increment_mm" => h.retry_increment_mm = value(key, raw)?,
            "harvest.max_retries" => h.max_retries = value(key, raw)?,
            "harvest.diameter_noise_mm" => h.diameter_noise_mm = value(key, raw)?,
            "harvest.velocity_noise_px" => h.velocity_noise_px = value(key, raw)?,
            "harvest.px_per_mm" => h.px_per_mm = value(key, raw)?,
            _ => return Err(format!("unknown key `{key}`")),
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Config::default();
        let mut seen = std::collections::HashSet::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, val)) = content.split_once('=') else {
                return Err(Error::Parse {
                    line,
                    msg: format!("expected `key = value`, got `{content}`"),
                });
            };
            let (key, val) = (key.trim(), val.trim());
            cfg.set(key, val).map_err(|msg| Error::Parse { line, msg })?;
            if !seen.insert(key.to_string()) {
                return Err(Error::Parse {
                    line,
                    msg: format!("duplicate key `{key}`"),
                });
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.tactile_sim().gel.validate()?;
        LightRig::new(self.light_rig().lights)?;
        let bad = |msg: &str| Err(Error::Format(msg.to_string()));
        if self.sim.px_per_mm.is_some_and(|p| !(p > 0.0)) {
            return bad("sim.px_per_mm must be positive");
        }
        if self.force.grid < 8 {
            return bad("force.grid must be at least 8");
        }
        if !(self.slip.threshold_px >= 0.0) || !(self.slip.contact_threshold_mm > 0.0) {
            return bad("slip thresholds must be non-negative and the contact threshold positive");
        }
        if self.slip.smoothing_frames == 0 {
            return bad("slip.smoothing_frames must be at least 1");
        }
        if self.softness.train_trials == 0 || self.softness.train_trials >= self.softness.trials {
            return bad("softness.train_trials must be between 1 and softness.trials - 1");
        }
        if self.softness.clip_frames < fruittouch_core::softness::MIN_CLIP_FRAMES {
            return bad("softness.clip_frames must be at least 4");
        }
        for st in Strategy::ALL {
            self.strategy_config(st, FruitKind::CherryTomato).validate()?;
        }
        Ok(())
    }

    pub fn gel(&self) -> GelModel {
        let s = &self.sim;
        GelModel {
            gel_size_mm: s.px_per_mm.map_or(s.gel_size_mm, |p| s.resolution as f64 / p),
            resolution: s.resolution,
            membrane_sigma_mm: s.membrane_sigma_mm,
            marker_rows: s.marker_rows,
            marker_cols: s.marker_cols,
            ..GelModel::default()
        }
    }

    pub fn light_rig(&self) -> LightRig {
        let s = &self.sim;
        LightRig::tri_color(s.light_azimuth_deg, s.light_elevation_deg, s.light_intensity)
    }

    pub fn current_model(&self) -> CurrentModel {
        CurrentModel {
            gain_a_per_n: self.sim.current_gain_a_per_n,
            offset_a: self.sim.current_offset_a,
            noise_a: self.sim.current_noise_a,
        }
    }

    /// Inverse of the current model, the force estimate the gripper uses.
    pub fn normal_force_model(&self) -> NormalForceModel {
        let c = self.current_model();
        NormalForceModel {
            slope: 1.0 / c.gain_a_per_n,
            intercept: -c.offset_a / c.gain_a_per_n,
        }
    }

    pub fn tactile_sim(&self) -> TactileSim {
        TactileSim {
            gel: self.gel(),
            rig: self.light_rig(),
            pixel_noise: self.sim.pixel_noise,
            marker_noise_px: self.sim.marker_noise_px,
            current: self.current_model(),
            fps: self.sim.fps,
            slip_threshold_px: self.slip.threshold_px,
        }
    }

    pub fn fit_options(&self, seed: u64) -> FitOptions {
        let g = &self.geometry;
        FitOptions {
            epochs: g.epochs,
            learning_rate: g.learning_rate,
            optimizer: g.optimizer,
            batch_size: (g.batch_size > 0).then_some(g.batch_size),
            seed,
        }
    }

    pub fn calibration_options(&self) -> CalibrationOptions {
        CalibrationOptions {
            rim_margin_px: self.geometry.rim_margin_px,
            background_stride: self.geometry.background_stride,
        }
    }

    pub fn idw(&self) -> IdwOptions {
        IdwOptions {
            neighbors: self.force.idw_neighbors,
            power: self.force.idw_power,
        }
    }

    pub fn force_layout(&self) -> Result<GridLayout> {
        let n = self.sim.resolution;
        Ok(GridLayout::new(self.force.grid, self.force.grid, n, n)?)
    }

    pub fn train_options(&self, seed: u64) -> TrainOptions {
        TrainOptions {
            epochs: self.softness.epochs,
            learning_rate: self.softness.learning_rate,
            seed,
            train_bias: self.softness.train_bias,
        }
    }

    pub fn harvest_sim(&self) -> HarvestSim {
        let h = &self.harvest;
        HarvestSim {
            fps: self.sim.fps,
            arm_speed_mm: h.arm_speed_mm,
            clearance_mm: h.clearance_mm,
            diameter_noise_mm: h.diameter_noise_mm,
            current: self.current_model(),
            force_model: self.normal_force_model(),
            px_per_mm: h.px_per_mm,
            slip_threshold_px: self.slip.threshold_px,
            velocity_noise_px: h.velocity_noise_px,
            ..HarvestSim::default()
        }
    }

    pub fn strategy_config(&self, strategy: Strategy, kind: FruitKind) -> StrategyConfig {
        let h = &self.harvest;
        StrategyConfig {
            close_margin_mm: h.close_margin_mm,
            retry_increment_mm: h.retry_increment_mm,
            max_retries: h.max_retries,
            close_speed_mm: h.close_speed_mm,
            ..StrategyConfig::new(strategy, kind)
        }
    }

    /// Help text listing every key with its default.
    pub fn key_help() -> String {
        let width = KEYS.iter().map(|k| k.0.len()).max().unwrap_or(0);
        let mut out = String::from("Config keys (key = default: meaning):\n");
        for (k, d, doc) in KEYS {
            out.push_str(&format!("  {k:width$} = {d}: {doc}\n"));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        assert_eq!(Config::parse("").unwrap(), Config::default());
        assert_eq!(Config::parse("# only a comment\n\n").unwrap(), Config::default());
    }

    #[test]
    fn documented_defaults_match() {
        for (k, d, _) in KEYS {
            let mut c = Config::default();
            c.set(k, d).unwrap();
            assert_eq!(c, Config::default(), "{k}");
        }
    }

    #[test]
    fn every_key_is_documented() {
        let mut c = Config::default();
        assert!(c.set("slip.nope", "1").is_err());
        assert_eq!(KEYS.len(), 45);
        for (k, _, _) in KEYS {
            assert!(Config::key_help().contains(k));
        }
    }

    #[test]
    fn threshold_parses() {
        let c = Config::parse("slip.threshold_px = 10\n").unwrap();
        assert_eq!(c.slip.threshold_px, 10.0);
        let c = Config::parse("slip.threshold_px=12.5 # tighter\n").unwrap();
        assert_eq!(c.slip.threshold_px, 12.5);
    }

    #[test]
    fn bad_value_names_line_and_key() {
        let e = Config::parse("force.grid = 32\nslip.threshold_px=abc\n").unwrap_err().to_string();
        assert!(e.contains("line 2"), "{e}");
        assert!(e.contains("slip.threshold_px"), "{e}");
    }

    #[test]
    fn unknown_and_duplicate_keys_are_rejected() {
        let e = Config::parse("\nslip.speed = 3\n").unwrap_err().to_string();
        assert!(e.contains("line 2") && e.contains("slip.speed"), "{e}");
        let e = Config::parse("force.grid=16\nforce.grid=16\n").unwrap_err().to_string();
        assert!(e.contains("duplicate"), "{e}");
        assert!(Config::parse("just text\n").is_err());
    }

    #[test]
    fn px_per_mm_overrides_gel_size() {
        let c = Config::parse("sim.px_per_mm = 4\n").unwrap();
        assert_eq!(c.gel().gel_size_mm, 32.0);
        assert_eq!(Config::default().gel(), GelModel::default());
    }

    #[test]
    fn defaults_build_the_default_components() {
        let c = Config::default();
        assert_eq!(c.tactile_sim(), TactileSim::default());
        assert_eq!(c.harvest_sim(), HarvestSim::default());
        assert_eq!(c.fit_options(0), FitOptions::default());
        assert_eq!(c.calibration_options(), CalibrationOptions::default());
        assert_eq!(c.idw(), IdwOptions::default());
        assert_eq!(c.train_options(0), TrainOptions::default());
        let st = StrategyConfig::new(Strategy::SlipForce, FruitKind::Strawberry);
        assert_eq!(c.strategy_config(Strategy::SlipForce, FruitKind::Strawberry), st);
    }

    #[test]
    fn invalid_combinations_are_rejected() {
        assert!(Config::parse("force.grid = 4\n").is_err());
        assert!(Config::parse("softness.train_trials = 10\n").is_err());
        assert!(Config::parse("slip.smoothing_frames = 0\n").is_err());
        assert!(Config::parse("harvest.max_retries = 0\n").is_err());
    }
}
