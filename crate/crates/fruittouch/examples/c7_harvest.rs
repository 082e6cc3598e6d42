//! Strategy ablation for both fruit populations.

use fruittouch::config::Config;
use fruittouch::experiments::harvest;
use fruittouch_core::harvest::{FruitKind, Strategy};

fn main() -> fruittouch::Result<()> {
    let r = harvest::run(&Config::default(), &FruitKind::ALL, &Strategy::ALL, 50, 0)?;
    for s in &r.summaries {
        println!(
            "{:<14} {:<10} success {:.2}  attempts {:.2}  F {:.3} ± {:.3} N  failures {:?}",
            s.kind.name(),
            s.strategy.name(),
            s.success_rate,
            s.mean_attempts,
            s.force_mean,
            s.force_var.sqrt(),
            s.failures
        );
    }
    for k in FruitKind::ALL {
        println!("{} trends hold: {}", k.name(), harvest::trends_hold(&r, k));
    }
    Ok(())
}
