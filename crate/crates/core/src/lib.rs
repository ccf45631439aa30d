pub mod cli;
pub mod detection;
pub mod error;
pub mod exponents;
pub mod jscc;
pub mod numerics;
pub mod simulator;
pub use error::{Error, Result};
