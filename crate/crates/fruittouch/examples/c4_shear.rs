//! Shear regression from decomposed marker fields.

use fruittouch::config::Config;
use fruittouch::experiments::shear::{run, ShearSetup};

fn main() -> fruittouch::Result<()> {
    for seed in 0..3 {
        let r = run(&Config::default(), &ShearSetup::default(), seed)?;
        println!("seed {seed}: held-out ({}) R² {:.4}, MAPE {:.2}%", r.test, r.r2, r.mape);
    }
    Ok(())
}
