#![no_std]
extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod error;
pub mod field;
pub mod force;
pub mod frame;
pub mod geometry;
pub mod grid;
pub mod harvest;
pub mod linalg;
pub mod markers;
pub mod poisson;
pub mod sim;
pub mod slip;
pub mod softness;
pub mod surface;

pub use error::{Error, Result};
