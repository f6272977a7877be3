//! Command-line surface for `cochain-core`: expression and tensor document
//! parsing plus the `cochain` commands.

pub mod app;
pub mod doc;
pub mod sexpr;

pub use app::{run, Outcome, EXIT_INPUT, EXIT_VERIFIED, EXIT_VIOLATION, SEED_ENV};
