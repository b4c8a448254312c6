pub mod error;
pub mod generators;
pub mod io;
pub mod lattice;
pub mod measure;
pub mod palm;
pub mod preserving;
pub mod stats;
pub mod rng;
pub mod selftest;

pub use error::{Error, Result};
