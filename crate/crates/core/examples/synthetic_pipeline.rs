//! Runs every stage on a synthetic corpus and prints the summary.
//!
//! `cargo run --release --example synthetic_pipeline -- [out_dir] [seed]`

use citerank::pipeline::{report, run_pipeline, PipelineConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let mut args = std::env::args().skip(1);
    let out = args.next().unwrap_or_else(|| "artifacts".into());
    let seed = args.next().map(|s| s.parse()).transpose()?.unwrap_or(42);

    let cfg = PipelineConfig { seed, output_dir: out.clone().into(), ..Default::default() };
    let manifest = run_pipeline(&cfg)?;
    for s in &manifest.stages {
        println!("{:<7} {:?} ({} outputs)", s.name, s.status, s.outputs.len());
    }
    println!();
    print!("{}", report(out.as_ref())?);
    Ok(())
}
