//! Simulated fruit picking with open-loop, slip and slip+force control.
//!
//! The plant is a pair of spring fingers on a compliant fruit hanging from a
//! stem. Contact force is `k·max(0, D − opening)`; the two contacts can
//! transmit at most `2μF` of pull before the fruit slides. The arm retracts
//! at a fixed speed each tick, loading the stem until it detaches or the
//! fruit slides out of the fingers.

use alloc::format;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;
#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Error, Result};
use crate::force::NormalForceModel;
use crate::sim::{gaussian, CurrentModel};
use crate::slip::detect_slip;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FruitKind {
    CherryTomato,
    Strawberry,
}

impl FruitKind {
    pub const ALL: [FruitKind; 2] = [FruitKind::CherryTomato, FruitKind::Strawberry];

    pub fn name(self) -> &'static str {
        match self {
            Self::CherryTomato => "cherry_tomato",
            Self::Strawberry => "strawberry",
        }
    }
}

impl fmt::Display for FruitKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FruitKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cherry_tomato" | "tomato" => Ok(Self::CherryTomato),
            "strawberry" => Ok(Self::Strawberry),
            _ => Err(invalid(format!("unknown fruit type `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FruitModel {
    pub kind: FruitKind,
    pub diameter_mm: f64,
    pub stiffness_n_per_mm: f64,
    pub detachment_force_n: f64,
    pub bruise_force_n: f64,
    pub friction: f64,
    /// Stem load per millimetre of arm retraction, N/mm.
    pub stem_stiffness: f64,
}

impl FruitModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.diameter_mm > 0.0) {
            return Err(invalid("fruit diameter must be positive"));
        }
        if !(self.stiffness_n_per_mm > 0.0) || !(self.friction > 0.0) || !(self.stem_stiffness > 0.0) {
            return Err(invalid("fruit stiffness, friction and stem stiffness must be positive"));
        }
        if !(self.detachment_force_n >= 0.0) || !(self.bruise_force_n >= 0.0) {
            return Err(invalid("detachment and bruise forces must be non-negative"));
        }
        Ok(())
    }

    /// Whether the stem can be broken without exceeding the bruise force.
    pub fn is_harvestable(&self) -> bool {
        0.0 < self.detachment_force_n && self.detachment_force_n < self.bruise_force_n
    }

    /// Radius of the flattened contact patch at the given opening.
    pub fn contact_radius_mm(&self, opening_mm: f64) -> f64 {
        let depth = (self.diameter_mm - opening_mm).max(0.0);
        (0.5 * self.diameter_mm * depth).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FruitResponse {
    pub contact_force_n: f64,
    /// Fraction of arm motion lost to sliding, in `[0, 1]`.
    pub slip_rate: f64,
    pub detached: bool,
    pub bruised: bool,
}

pub fn fruit_response(fruit: &FruitModel, opening_mm: f64, pull_n: f64) -> Result<FruitResponse> {
    if !(opening_mm >= 0.0) {
        return Err(invalid("opening must be non-negative"));
    }
    let fc = fruit.stiffness_n_per_mm * (fruit.diameter_mm - opening_mm).max(0.0);
    let capacity = 2.0 * fruit.friction * fc;
    let pull = pull_n.max(0.0);
    let slip_rate = if capacity <= 0.0 {
        1.0
    } else if pull <= capacity {
        0.0
    } else {
        1.0 - capacity / pull
    };
    Ok(FruitResponse {
        contact_force_n: fc,
        slip_rate,
        detached: pull.min(capacity) > fruit.detachment_force_n,
        bruised: fc > fruit.bruise_force_n,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Spread {
    Normal { mean: f64, sd: f64 },
    Uniform { low: f64, high: f64 },
}

impl Spread {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Self::Normal { mean, sd } => mean + gaussian(rng, sd),
            Self::Uniform { low, high } => low + (high - low) * rng.random::<f64>(),
        }
    }
}

/// Distribution of fruit used by [`run_experiment`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FruitPopulation {
    pub kind: FruitKind,
    pub diameter_mm: Spread,
    pub stiffness_n_per_mm: f64,
    pub friction: f64,
    pub stem_stiffness: f64,
    pub detachment_force_n: Spread,
    pub bruise_force_n: Spread,
}

impl FruitPopulation {
    pub fn default_for(kind: FruitKind) -> Self {
        match kind {
            FruitKind::CherryTomato => Self {
                kind,
                diameter_mm: Spread::Normal { mean: 28.3, sd: 1.5 },
                stiffness_n_per_mm: 0.7,
                friction: 0.6,
                stem_stiffness: 0.5,
                detachment_force_n: Spread::Normal { mean: 1.5, sd: 0.3 },
                bruise_force_n: Spread::Normal { mean: 3.5, sd: 0.4 },
            },
            FruitKind::Strawberry => Self {
                kind,
                diameter_mm: Spread::Uniform { low: 25.0, high: 35.0 },
                stiffness_n_per_mm: 0.9,
                friction: 0.5,
                stem_stiffness: 1.0,
                detachment_force_n: Spread::Normal { mean: 3.0, sd: 0.8 },
                bruise_force_n: Spread::Normal { mean: 4.2, sd: 0.6 },
            },
        }
    }

    /// Draws a harvestable fruit: bruise force is redrawn until it exceeds
    /// the detachment force.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> FruitModel {
        let diameter_mm = self.diameter_mm.sample(rng).max(1.0);
        let detachment_force_n = self.detachment_force_n.sample(rng).max(0.05);
        let mut bruise_force_n = self.bruise_force_n.sample(rng);
        for _ in 0..64 {
            if bruise_force_n > detachment_force_n {
                break;
            }
            bruise_force_n = self.bruise_force_n.sample(rng);
        }
        FruitModel {
            kind: self.kind,
            diameter_mm,
            stiffness_n_per_mm: self.stiffness_n_per_mm,
            detachment_force_n,
            bruise_force_n: bruise_force_n.max(detachment_force_n + 0.05),
            friction: self.friction,
            stem_stiffness: self.stem_stiffness,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Strategy {
    OpenLoop,
    Slip,
    SlipForce,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [Strategy::OpenLoop, Strategy::Slip, Strategy::SlipForce];

    pub fn name(self) -> &'static str {
        match self {
            Self::OpenLoop => "open_loop",
            Self::Slip => "slip",
            Self::SlipForce => "slip_force",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "open_loop" => Ok(Self::OpenLoop),
            "slip" => Ok(Self::Slip),
            "slip_force" => Ok(Self::SlipForce),
            _ => Err(invalid(format!("unknown strategy `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StrategyConfig {
    pub strategy: Strategy,
    pub close_margin_mm: f64,
    pub retry_increment_mm: f64,
    pub initial_force_n: f64,
    pub force_increment_n: f64,
    pub max_retries: u32,
    /// Finger travel per tick while closing.
    pub close_speed_mm: f64,
}

impl StrategyConfig {
    pub fn new(strategy: Strategy, kind: FruitKind) -> Self {
        let (initial_force_n, force_increment_n) = match kind {
            FruitKind::CherryTomato => (1.2, 0.3),
            FruitKind::Strawberry => (2.0, 1.0),
        };
        Self {
            strategy,
            close_margin_mm: 2.0,
            retry_increment_mm: 2.0,
            initial_force_n,
            force_increment_n,
            max_retries: 5,
            close_speed_mm: 0.25,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.retry_increment_mm > 0.0) || !(self.force_increment_n > 0.0) {
            return Err(invalid("retry increments must be positive"));
        }
        if !(self.close_speed_mm > 0.0) || !(self.initial_force_n > 0.0) || !(self.close_margin_mm >= 0.0) {
            return Err(invalid("closing speed and initial force must be positive, margin non-negative"));
        }
        if self.max_retries == 0 {
            return Err(invalid("max_retries must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraspPhase {
    Detect,
    Approach,
    Close,
    HoldPull,
    Retry,
    Done,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraspState {
    pub phase: GraspPhase,
    pub opening_mm: f64,
    /// Opening the position-controlled strategies close to.
    pub target_opening_mm: f64,
    pub commanded_force_n: f64,
    pub attempt: u32,
    pub peak_force_n: f64,
}

impl GraspState {
    /// Fingers open by `clearance_mm` around a fruit measured at
    /// `measured_diameter_mm`.
    pub fn start(measured_diameter_mm: f64, clearance_mm: f64, cfg: &StrategyConfig) -> Self {
        Self {
            phase: GraspPhase::Detect,
            opening_mm: (measured_diameter_mm + clearance_mm).max(0.0),
            target_opening_mm: (measured_diameter_mm - cfg.close_margin_mm).max(0.0),
            commanded_force_n: cfg.initial_force_n,
            attempt: 1,
            peak_force_n: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Percepts {
    pub slip: bool,
    pub force_n: f64,
}

/// One controller tick.
pub fn step_controller(state: &GraspState, percepts: Percepts, cfg: &StrategyConfig) -> GraspState {
    let mut s = *state;
    match s.phase {
        GraspPhase::Detect => s.phase = GraspPhase::Approach,
        GraspPhase::Approach => s.phase = GraspPhase::Close,
        GraspPhase::Close => match cfg.strategy {
            Strategy::OpenLoop | Strategy::Slip => {
                s.opening_mm = (s.opening_mm - cfg.close_speed_mm).max(s.target_opening_mm);
                if s.opening_mm <= s.target_opening_mm {
                    s.phase = GraspPhase::HoldPull;
                }
            }
            Strategy::SlipForce => {
                if percepts.force_n >= s.commanded_force_n || s.opening_mm <= 0.0 {
                    s.phase = GraspPhase::HoldPull;
                } else {
                    s.opening_mm = (s.opening_mm - cfg.close_speed_mm).max(0.0);
                }
            }
        },
        GraspPhase::HoldPull => {
            if percepts.slip && cfg.strategy != Strategy::OpenLoop {
                if s.attempt >= cfg.max_retries {
                    s.phase = GraspPhase::Done;
                } else {
                    s.attempt += 1;
                    match cfg.strategy {
                        Strategy::Slip => {
                            s.target_opening_mm = (s.target_opening_mm - cfg.retry_increment_mm).max(0.0)
                        }
                        _ => s.commanded_force_n += cfg.force_increment_n,
                    }
                    s.phase = GraspPhase::Retry;
                }
            }
        }
        GraspPhase::Retry => s.phase = GraspPhase::Close,
        GraspPhase::Done => {}
    }
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FailureMode {
    None,
    SlipDrop,
    Bruise,
    MaxRetries,
}

impl FailureMode {
    pub fn name(self) -> &'static str {
        match self {
            Self::None => "none",
            Self::SlipDrop => "slip_drop",
            Self::Bruise => "bruise",
            Self::MaxRetries => "max_retries",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub success: bool,
    pub failure: FailureMode,
    pub attempts: u32,
    pub peak_force_n: f64,
    /// True contact force at every tick.
    pub force_trace: Vec<f64>,
}

/// Sensing and actuation settings of the simulated picking cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HarvestSim {
    pub fps: f64,
    pub arm_speed_mm: f64,
    pub clearance_mm: f64,
    pub diameter_noise_mm: f64,
    pub current: CurrentModel,
    pub force_model: NormalForceModel,
    pub px_per_mm: f64,
    pub slip_threshold_px: f64,
    pub velocity_noise_px: f64,
    pub max_ticks: usize,
}

impl Default for HarvestSim {
    fn default() -> Self {
        let current = CurrentModel::default();
        Self {
            fps: 15.0,
            arm_speed_mm: 1.5,
            clearance_mm: 5.0,
            diameter_noise_mm: 1.0,
            current,
            force_model: NormalForceModel {
                slope: 1.0 / current.gain_a_per_n,
                intercept: -current.offset_a / current.gain_a_per_n,
            },
            px_per_mm: 20.0,
            slip_threshold_px: crate::slip::DEFAULT_THRESHOLD_PX,
            velocity_noise_px: 1.0,
            max_ticks: 2000,
        }
    }
}

impl HarvestSim {
    /// A cell whose sensors and diameter estimate are exact.
    pub fn noiseless() -> Self {
        Self {
            diameter_noise_mm: 0.0,
            current: CurrentModel {
                noise_a: 0.0,
                ..CurrentModel::default()
            },
            velocity_noise_px: 0.0,
            ..Self::default()
        }
    }

    pub fn run_trial(&self, fruit: &FruitModel, cfg: &StrategyConfig, seed: u64) -> Result<TrialOutcome> {
        fruit.validate()?;
        cfg.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let measured = fruit.diameter_mm + gaussian(&mut rng, self.diameter_noise_mm);
        let mut state = GraspState::start(measured, self.clearance_mm, cfg);
        let mut stem_mm = 0.0;
        let mut slid_mm = 0.0;
        let mut trace = Vec::new();
        let finish = |state: &GraspState, trace: Vec<f64>, failure| TrialOutcome {
            success: failure == FailureMode::None,
            failure,
            attempts: state.attempt,
            peak_force_n: state.peak_force_n,
            force_trace: trace,
        };
        for _ in 0..self.max_ticks {
            let pulling = state.phase == GraspPhase::HoldPull;
            let pull = fruit.stem_stiffness * (stem_mm + if pulling { self.arm_speed_mm } else { 0.0 });
            let r = fruit_response(fruit, state.opening_mm, pull)?;
            trace.push(r.contact_force_n);
            state.peak_force_n = state.peak_force_n.max(r.contact_force_n);
            if r.bruised {
                return Ok(finish(&state, trace, FailureMode::Bruise));
            }
            let mut slip_mm = 0.0;
            if pulling {
                if r.detached {
                    return Ok(finish(&state, trace, FailureMode::None));
                }
                slip_mm = r.slip_rate * self.arm_speed_mm;
                stem_mm += self.arm_speed_mm - slip_mm;
                slid_mm += slip_mm;
                if slid_mm > fruit.contact_radius_mm(state.opening_mm) {
                    return Ok(finish(&state, trace, FailureMode::SlipDrop));
                }
            }
            let noise = self.velocity_noise_px;
            let object_v = [
                gaussian(&mut rng, noise),
                slip_mm * self.px_per_mm + gaussian(&mut rng, noise),
            ];
            let marker_v = [gaussian(&mut rng, noise), gaussian(&mut rng, noise)];
            let percepts = Percepts {
                slip: detect_slip(object_v, marker_v, self.slip_threshold_px),
                force_n: self.force_model.predict(self.current.sample(r.contact_force_n, &mut rng)),
            };
            state = step_controller(&state, percepts, cfg);
            if state.phase == GraspPhase::Done {
                return Ok(finish(&state, trace, FailureMode::MaxRetries));
            }
        }
        Ok(finish(&state, trace, FailureMode::MaxRetries))
    }
}

/// [`HarvestSim::run_trial`] with default cell settings.
pub fn run_trial(fruit: &FruitModel, cfg: &StrategyConfig, seed: u64) -> Result<TrialOutcome> {
    HarvestSim::default().run_trial(fruit, cfg, seed)
}

/// One row of the ablation table.
#[derive(Debug, Clone, PartialEq)]
pub struct StrategySummary {
    pub kind: FruitKind,
    pub strategy: Strategy,
    pub trials: usize,
    pub success_rate: f64,
    pub mean_attempts: f64,
    pub force_mean: f64,
    /// Sample variance of the per-trial peak force.
    pub force_var: f64,
    pub failures: [(FailureMode, usize); 3],
}

pub const MIN_TRIALS: usize = 8;

/// Per-trial fruit and trial seed. Every strategy sees the same fruit
/// sequence and sensor noise.
pub fn trial_plan(population: &FruitPopulation, trials: usize, seed: u64) -> Vec<(FruitModel, u64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..trials).map(|_| (population.sample(&mut rng), rng.random())).collect()
}

pub fn summarize(kind: FruitKind, strategy: Strategy, outcomes: &[TrialOutcome]) -> StrategySummary {
    let n = outcomes.len();
    let nf = n as f64;
    let mean = outcomes.iter().map(|o| o.peak_force_n).sum::<f64>() / nf;
    let var = if n > 1 {
        outcomes.iter().map(|o| (o.peak_force_n - mean).powi(2)).sum::<f64>() / (nf - 1.0)
    } else {
        0.0
    };
    let count = |m| outcomes.iter().filter(|o| o.failure == m).count();
    StrategySummary {
        kind,
        strategy,
        trials: n,
        success_rate: outcomes.iter().filter(|o| o.success).count() as f64 / nf,
        mean_attempts: outcomes.iter().map(|o| o.attempts as f64).sum::<f64>() / nf,
        force_mean: mean,
        force_var: var,
        failures: [
            (FailureMode::SlipDrop, count(FailureMode::SlipDrop)),
            (FailureMode::Bruise, count(FailureMode::Bruise)),
            (FailureMode::MaxRetries, count(FailureMode::MaxRetries)),
        ],
    }
}

/// Runs every strategy on the same `trials` fruit drawn from `population`.
pub fn run_experiment(
    sim: &HarvestSim,
    population: &FruitPopulation,
    strategies: &[Strategy],
    trials: usize,
    seed: u64,
) -> Result<Vec<StrategySummary>> {
    if trials < MIN_TRIALS {
        return Err(invalid(format!("need at least {MIN_TRIALS} trials per cell, got {trials}")));
    }
    let plan = trial_plan(population, trials, seed);
    strategies
        .iter()
        .map(|&st| {
            let cfg = StrategyConfig::new(st, population.kind);
            let outcomes = plan
                .iter()
                .map(|(fruit, s)| sim.run_trial(fruit, &cfg, *s))
                .collect::<Result<Vec<_>>>()?;
            Ok(summarize(population.kind, st, &outcomes))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tomato() -> FruitModel {
        FruitModel {
            kind: FruitKind::CherryTomato,
            diameter_mm: 28.0,
            stiffness_n_per_mm: 0.7,
            detachment_force_n: 1.5,
            bruise_force_n: 3.5,
            friction: 0.6,
            stem_stiffness: 0.5,
        }
    }

    #[test]
    fn open_fingers_hold_nothing() {
        let r = fruit_response(&tomato(), 30.0, 0.1).unwrap();
        assert_eq!(r.contact_force_n, 0.0);
        assert_eq!(r.slip_rate, 1.0);
        assert!(!r.detached);
    }

    #[test]
    fn bruise_threshold() {
        let f = tomato();
        let r = fruit_response(&f, 28.0 - 3.6 / 0.7, 0.0).unwrap();
        assert!(r.bruised);
        assert!(!fruit_response(&f, 28.0 - 3.4 / 0.7, 0.0).unwrap().bruised);
    }

    #[test]
    fn slip_rate_falls_with_force() {
        let f = tomato();
        let mut prev = f64::INFINITY;
        for i in 0..=200 {
            let r = fruit_response(&f, 28.0 - i as f64 * 0.05, 2.0).unwrap();
            assert!(r.slip_rate <= prev);
            prev = r.slip_rate;
        }
    }

    #[test]
    fn negative_opening_is_rejected() {
        assert!(fruit_response(&tomato(), -1.0, 0.0).is_err());
    }

    #[test]
    fn open_loop_never_retries() {
        let cfg = StrategyConfig::new(Strategy::OpenLoop, FruitKind::CherryTomato);
        let mut s = GraspState::start(28.0, 5.0, &cfg);
        s.phase = GraspPhase::HoldPull;
        for _ in 0..20 {
            s = step_controller(&s, Percepts { slip: true, force_n: 0.0 }, &cfg);
            assert_eq!(s.phase, GraspPhase::HoldPull);
            assert_eq!(s.attempt, 1);
        }
    }

    #[test]
    fn slip_retry_closes_two_more_millimetres() {
        let cfg = StrategyConfig::new(Strategy::Slip, FruitKind::CherryTomato);
        let mut s = GraspState::start(28.0, 5.0, &cfg);
        s.phase = GraspPhase::HoldPull;
        let t0 = s.target_opening_mm;
        let s = step_controller(&s, Percepts { slip: true, force_n: 0.0 }, &cfg);
        assert_eq!(s.phase, GraspPhase::Retry);
        assert_eq!(s.attempt, 2);
        assert!((t0 - s.target_opening_mm - 2.0).abs() < 1e-12);
        assert_eq!(step_controller(&s, Percepts { slip: false, force_n: 0.0 }, &cfg).phase, GraspPhase::Close);
    }

    #[test]
    fn slip_force_command_sequence() {
        let cfg = StrategyConfig::new(Strategy::SlipForce, FruitKind::CherryTomato);
        let mut s = GraspState::start(28.0, 5.0, &cfg);
        let mut seen = alloc::vec![s.commanded_force_n];
        for _ in 0..2 {
            s.phase = GraspPhase::HoldPull;
            s = step_controller(&s, Percepts { slip: true, force_n: 0.0 }, &cfg);
            seen.push(s.commanded_force_n);
        }
        for (a, b) in seen.iter().zip([1.2, 1.5, 1.8]) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn attempts_are_capped_and_done_absorbs() {
        let cfg = StrategyConfig::new(Strategy::Slip, FruitKind::Strawberry);
        let mut s = GraspState::start(30.0, 5.0, &cfg);
        for _ in 0..100 {
            if s.phase == GraspPhase::Close {
                s.phase = GraspPhase::HoldPull;
            }
            s = step_controller(&s, Percepts { slip: true, force_n: 0.0 }, &cfg);
            assert!(s.attempt <= cfg.max_retries);
        }
        assert_eq!(s.phase, GraspPhase::Done);
        assert_eq!(step_controller(&s, Percepts { slip: false, force_n: 9.0 }, &cfg), s);
    }

    #[test]
    fn free_fruit_is_picked_first_time() {
        let mut f = tomato();
        f.detachment_force_n = 0.0;
        let sim = HarvestSim::noiseless();
        for st in Strategy::ALL {
            let o = sim.run_trial(&f, &StrategyConfig::new(st, f.kind), 3).unwrap();
            assert!(o.success, "{st}: {o:?}");
            assert_eq!(o.attempts, 1);
        }
    }

    #[test]
    fn fragile_fruit_bruises_open_loop_but_not_force_control() {
        let mut f = tomato();
        f.detachment_force_n = 3.0;
        f.bruise_force_n = 2.0;
        let sim = HarvestSim::noiseless();
        let mut ol = StrategyConfig::new(Strategy::OpenLoop, f.kind);
        ol.close_margin_mm = 4.0;
        assert_eq!(sim.run_trial(&f, &ol, 1).unwrap().failure, FailureMode::Bruise);
        // commands 1.2, 1.5, 1.8 N all stay under the bruise force
        let mut sf = StrategyConfig::new(Strategy::SlipForce, f.kind);
        sf.max_retries = 3;
        let o = sim.run_trial(&f, &sf, 1).unwrap();
        assert_eq!(o.failure, FailureMode::MaxRetries);
        assert_eq!(o.attempts, 3);
        assert!(o.peak_force_n < f.bruise_force_n);
    }

    #[test]
    fn easy_fruit_takes_one_force_controlled_attempt() {
        let mut f = tomato();
        f.detachment_force_n = 1.0;
        let sim = HarvestSim::noiseless();
        let cfg = StrategyConfig::new(Strategy::SlipForce, f.kind);
        let o = sim.run_trial(&f, &cfg, 0).unwrap();
        assert!(o.success);
        assert_eq!(o.attempts, 1);
        assert!(o.peak_force_n <= cfg.initial_force_n + f.stiffness_n_per_mm * cfg.close_speed_mm + 1e-12);
    }

    #[test]
    fn trials_are_reproducible() {
        let sim = HarvestSim::default();
        let cfg = StrategyConfig::new(Strategy::SlipForce, FruitKind::CherryTomato);
        assert_eq!(sim.run_trial(&tomato(), &cfg, 9).unwrap(), sim.run_trial(&tomato(), &cfg, 9).unwrap());
    }

    #[test]
    fn small_experiments_are_rejected() {
        let pop = FruitPopulation::default_for(FruitKind::CherryTomato);
        assert!(run_experiment(&HarvestSim::default(), &pop, &Strategy::ALL, 7, 0).is_err());
    }

    #[test]
    fn names_round_trip() {
        for s in Strategy::ALL {
            assert_eq!(s.name().parse::<Strategy>().unwrap(), s);
        }
        for k in FruitKind::ALL {
            assert_eq!(k.name().parse::<FruitKind>().unwrap(), k);
        }
        assert!("greedy".parse::<Strategy>().is_err());
    }
}
