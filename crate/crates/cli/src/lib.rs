//! Command-line front end for `ctmc-mlmc`: TOML model files, the bundled
//! example models, a thread-pool executor and report serialization.

pub mod bundled;
pub mod cli;
pub mod exec;
pub mod job;
pub mod model_file;
pub mod observable_spec;
pub mod report;

pub use job::{CliError, JobConfig};
pub use model_file::{parse_model, Model, ModelError, ModelFile};
