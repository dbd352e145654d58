pub mod error;
pub mod poly;

pub use error::{Error, Result};
pub mod problem;
pub mod count;
pub mod rampoly;
pub mod solver;
