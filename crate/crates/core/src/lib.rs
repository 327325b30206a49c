pub mod algebra;
pub mod branch;
pub mod cli;
pub mod endpoints;
pub mod error;
pub mod families;
pub mod quadrature;
pub mod recurrence;
pub mod representation;
pub mod resolvent;

pub use error::{Error, Result};
