//! Decomposition of random fields, checked against a dense QR projection.

#[path = "../tests/common/hhd_oracle.rs"]
mod hhd_oracle;

use fruittouch::experiments::hhd;
use fruittouch_core::force::HhdSolver;
use fruittouch_core::grid::GridLayout;
use rand::SeedableRng;

fn main() -> fruittouch::Result<()> {
    let r = hhd::run(100, 0)?;
    println!("{} fields in {:.3}s, worst {:?}", r.fields, r.seconds, r.worst);
    let layout = GridLayout::new(32, 32, 128, 128)?;
    let solver = HhdSolver::new(layout)?;
    let oracle = hhd_oracle::DenseHhdOracle::new(layout);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
    let mut gap: f64 = 0.0;
    for _ in 0..100 {
        let v = hhd::random_field(layout, &mut rng);
        let d = solver.decompose(&v)?;
        gap = gap.max(oracle.max_relative_gap(&v, &d.p, &d.s));
    }
    println!("largest gap to the dense projection: {gap:.2e}");
    Ok(())
}
