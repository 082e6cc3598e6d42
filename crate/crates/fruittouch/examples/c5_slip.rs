//! Slip benchmark over two poses, three loads and two repeats.

use fruittouch::config::Config;
use fruittouch::experiments::slip::{run, SlipSetup};
use fruittouch_core::slip::evaluate_slip_detector;

fn main() -> fruittouch::Result<()> {
    let cfg = Config::default();
    let r = run(&cfg, &SlipSetup::default(), 0)?;
    for t in &r.trials {
        let s = evaluate_slip_detector(&[t.predicted()], std::slice::from_ref(&t.labels), cfg.sim.fps)?;
        println!("{:?} {:>4} g #{}: F1 {:.3}", t.pose, t.load_g, t.repeat, s.f1);
    }
    let s = r.summary;
    println!(
        "overall: P {:.3} R {:.3} F1 {:.3}, lead {:?} s, {:.1} ms/tick",
        s.precision, s.recall, s.f1, s.mean_lead_time_s, r.mean_tick_ms
    );
    Ok(())
}
