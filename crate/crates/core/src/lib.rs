pub mod error;
pub mod conic;
pub mod matrix;
pub mod problem;
pub mod hierarchy;
pub mod solver;
pub mod oracles;
pub mod applications;
pub mod cli;

pub use error::{Error, Result};
