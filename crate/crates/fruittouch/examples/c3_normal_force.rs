//! Linear force-from-current fit on 10,000 noisy samples.

use fruittouch::config::Config;
use fruittouch::experiments::normal_force::{run, NormalForceSetup};

fn main() -> fruittouch::Result<()> {
    let r = run(&Config::default(), &NormalForceSetup::default(), 0)?;
    println!(
        "F = {:.4}·I + {:.4}; held-out ({}): R² {:.4}, MAPE {:.2}%",
        r.model.slope, r.model.intercept, r.test, r.r2, r.mape
    );
    Ok(())
}
