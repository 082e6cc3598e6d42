//! Strategy ablation on simulated fruit populations.

use std::time::Instant;

use fruittouch_core::harvest::{
    summarize, trial_plan, FruitKind, FruitModel, FruitPopulation, Strategy, StrategySummary, TrialOutcome, MIN_TRIALS,
};
use rayon::prelude::*;

use crate::config::Config;
use crate::error::{format_err, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub kind: FruitKind,
    pub strategy: Strategy,
    pub trial: usize,
    pub fruit: FruitModel,
    pub outcome: TrialOutcome,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HarvestReport {
    pub trials: Vec<TrialRecord>,
    pub summaries: Vec<StrategySummary>,
    pub seconds: f64,
}

impl HarvestReport {
    pub fn summary(&self, kind: FruitKind, strategy: Strategy) -> Option<&StrategySummary> {
        self.summaries.iter().find(|s| s.kind == kind && s.strategy == strategy)
    }
}

/// Runs every strategy on the same seeded fruit sequence per kind. Trials
/// run in parallel; results do not depend on the thread count.
pub fn run(cfg: &Config, kinds: &[FruitKind], strategies: &[Strategy], trials: usize, seed: u64) -> Result<HarvestReport> {
    if trials < MIN_TRIALS {
        return Err(format_err(format!("need at least {MIN_TRIALS} trials per cell, got {trials}")));
    }
    let start = Instant::now();
    let sim = cfg.harvest_sim();
    let mut records = Vec::new();
    let mut summaries = Vec::new();
    for &kind in kinds {
        let plan = trial_plan(&FruitPopulation::default_for(kind), trials, seed);
        for &strategy in strategies {
            let sc = cfg.strategy_config(strategy, kind);
            let outcomes = plan
                .par_iter()
                .map(|(fruit, s)| sim.run_trial(fruit, &sc, *s))
                .collect::<std::result::Result<Vec<_>, _>>()?;
            summaries.push(summarize(kind, strategy, &outcomes));
            records.extend(plan.iter().zip(outcomes).enumerate().map(|(trial, ((fruit, _), outcome))| TrialRecord {
                kind,
                strategy,
                trial,
                fruit: *fruit,
                outcome,
            }));
        }
    }
    Ok(HarvestReport {
        trials: records,
        summaries,
        seconds: start.elapsed().as_secs_f64(),
    })
}

/// Success ordering and force variance trend for one fruit kind.
pub fn trends_hold(report: &HarvestReport, kind: FruitKind) -> bool {
    let get = |s| report.summary(kind, s);
    match (get(Strategy::OpenLoop), get(Strategy::Slip), get(Strategy::SlipForce)) {
        (Some(o), Some(s), Some(f)) => {
            f.success_rate >= s.success_rate && s.success_rate >= o.success_rate && f.force_var < s.force_var
        }
        _ => false,
    }
}
