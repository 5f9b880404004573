pub mod error;
pub mod grape;
pub mod chain;
pub mod cli;
pub mod decompose;
pub mod linalg;
pub mod mirror;
pub mod pauli;
pub mod selftest;

pub use error::{Error, Result};
