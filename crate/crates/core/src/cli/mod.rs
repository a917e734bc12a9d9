//! Command-line front end: config parsing, experiment dispatch and artifact
//! output. The binary is a thin argument parser over [`run`].

pub mod config;
pub mod dispatch;

use std::path::Path;

pub use config::{
    parse_config, parse_config_str, BouncingSpec, ContinualSpec, DataSpec, EvalSpec, Experiment, ModelSpec,
    OutputSpec, Overrides, RunConfig, TaskSpec, TextSpec, TrainSpec, ZeroshotSpec,
};
pub use dispatch::{build_dataset, build_learner, dispatch, exit_code, Dataset, Summary};

/// Parses the config at `path`, runs it and returns the process exit code,
/// reporting any error on stderr.
pub fn run(path: &Path, ov: &Overrides) -> i32 {
    let outcome = parse_config(path, ov).and_then(|cfg| dispatch(&cfg));
    match outcome {
        Ok(summary) => {
            print!("{}", summary.render());
            0
        }
        Err(e) => {
            eprintln!("tncn: {e}");
            exit_code(&e)
        }
    }
}
