//! Generators, verification suites and the acceptance checks behind the
//! `cocycle-forge` command line.

pub mod acceptance;
pub mod error;
pub mod generate;
pub mod oracle;
pub mod suite;

pub use error::{ForgeError, Result};
pub use generate::{generate, Generated, GeneratorSpec, Kind, Metadata};
