//! Library surface of the `affekt` command-line tool, exposed so the
//! integration and acceptance suites can drive runs in-process.

pub mod config;
pub mod convert;
pub mod pipeline;
pub mod recipe;

pub use config::PipelineConfig;
pub use pipeline::{run, retabulate, Report, RunOutcome};
pub use recipe::SynthRecipe;
