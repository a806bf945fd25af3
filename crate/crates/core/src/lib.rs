pub mod cli;
pub mod dynamic;
pub mod embed;
pub mod error;
pub mod eval;
pub mod graph;
pub mod parallel;

pub use error::{Error, Result};
