pub mod approx;
pub mod cli;
pub mod error;
pub mod harness;
pub mod mrs;
pub mod numeric;
pub mod operators;
pub mod orthopoly;
pub mod quadrature;
pub mod weights;

pub use error::{Error, Result};
