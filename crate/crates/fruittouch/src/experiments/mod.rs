//! Synthetic experiments behind each acceptance criterion.
//!
//! Every runner is deterministic given its seed and the config.

pub mod geometry;
pub mod harvest;
pub mod hhd;
pub mod normal_force;
pub mod shear;
pub mod slip;
pub mod softness;
pub mod tick;

pub(crate) fn rng(seed: u64) -> rand_chacha::ChaCha8Rng {
    rand::SeedableRng::seed_from_u64(seed)
}
