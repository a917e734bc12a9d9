//! Per-step wall time against hidden width, with the fitted log-log slope
//! for each learner.

use tncn::harness::{benchmark_scaling, BenchConfig};

fn main() -> tncn::Result<()> {
    let cfg = BenchConfig {
        widths: vec![16, 32, 64, 128],
        ..BenchConfig::default()
    };
    let report = benchmark_scaling(&cfg, 0)?;
    print!("{}", report.to_csv());
    for (name, slope) in &report.slopes {
        println!("{name:<6} slope {slope:.2}");
    }
    Ok(())
}
