use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use tncn::cli::{run, Experiment, Overrides};

/// Online sequence learning experiments.
#[derive(Parser, Debug)]
#[command(name = "tncn", version)]
struct Args {
    /// train, eval, zeroshot, continual, bench or gendata
    subcommand: String,
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Override a config value, e.g. `--set hyperparams.beta=0.1`.
    #[arg(long = "set", value_name = "SECTION.KEY=VALUE")]
    set: Vec<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write zeros in the wall-time column.
    #[arg(long)]
    no_timing: bool,
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let experiment: Experiment = match args.subcommand.parse() {
        Ok(x) => x,
        Err(e) => {
            eprintln!("tncn: {e}");
            return ExitCode::from(1);
        }
    };
    let ov = Overrides {
        experiment: Some(experiment),
        set: args.set,
        seed: args.seed,
        out: args.out,
        no_timing: args.no_timing,
    };
    ExitCode::from(run(&args.config, &ov) as u8)
}
