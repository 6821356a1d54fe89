//! Run the full pipeline on a configuration file and write the reports.
//!
//!     cargo run --release --example run_config -- configs/interval_c10.conf /tmp/out

use std::path::PathBuf;

use morse_shrink::config::parse_config;
use morse_shrink::pipeline::{run_pipeline, RunOptions};
use morse_shrink::report::{emit_reports, render_report};

fn main() -> anyhow::Result<()> {
    let mut args = std::env::args().skip(1);
    let path = args
        .next()
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/configs/interval_c10.conf").to_string());
    let spec = parse_config(&std::fs::read_to_string(&path)?)?;
    let out = args.next().map_or(spec.output_dir.clone(), PathBuf::from);
    let bundle = run_pipeline(&spec, RunOptions::default());
    print!("{}", render_report(&bundle));
    for p in emit_reports(&bundle, &out)? {
        println!("wrote {}", p.display());
    }
    std::process::exit(bundle.exit_code());
}
