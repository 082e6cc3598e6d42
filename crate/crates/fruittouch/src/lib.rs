pub mod config;
pub mod error;
pub mod experiments;
pub mod io;
pub mod pipeline;

pub use error::{Error, Result};
