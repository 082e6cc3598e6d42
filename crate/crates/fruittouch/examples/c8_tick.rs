//! Timing of the full perception tick at 128².

use fruittouch::config::Config;
use fruittouch::experiments::tick;

fn main() -> fruittouch::Result<()> {
    let r = tick::run(&Config::default(), 100, 0)?;
    println!(
        "{} ticks at {}²: median {:.1} ms, p95 {:.1} ms, max {:.1} ms",
        r.ticks, r.resolution, r.median_ms, r.p95_ms, r.max_ms
    );
    Ok(())
}
