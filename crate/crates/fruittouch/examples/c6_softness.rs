//! Hardness ranking per fruit and Shore level over three simulated datasets.

use fruittouch::config::Config;
use fruittouch::experiments::softness;

fn main() -> fruittouch::Result<()> {
    let cfg = Config::default();
    for seed in 1..=3 {
        let data = softness::generate(&cfg, seed)?;
        let r = softness::train_and_evaluate(&cfg, &data, 0)?;
        println!(
            "dataset {seed}: loss {:.4} -> {:.4}, train {:.3}, held-out {:.3}, untrained {:.3}, zero bias {:.3}",
            r.loss_history[0],
            r.loss_history.last().copied().unwrap_or(f64::NAN),
            r.train_accuracy,
            r.test.aggregate,
            r.untrained_accuracy,
            r.zero_bias_accuracy
        );
        for g in &r.test.groups {
            println!("  {:<14} {:>5.1}: {:.3}", g.fruit.name(), g.shore_00, g.accuracy());
        }
    }
    Ok(())
}
