//! Loads a scenario file, runs it and writes the report bundle.
//!
//! cargo run --release --example scenario_report -- scenarios/skew.toml [out-dir]

use std::path::PathBuf;

use domsplit::report::{emit_report, ReportFormat};
use domsplit::run::run_config;
use domsplit::scenario::load_config;

fn main() -> domsplit::Result<()> {
    let mut args = std::env::args().skip(1);
    let path = PathBuf::from(args.next().unwrap_or_else(|| "scenarios/diagonal.toml".into()));
    let out = PathBuf::from(args.next().unwrap_or_else(|| "target/reports".into()));

    let cfg = load_config(&path)?;
    print!("{cfg}");
    let run = run_config(&cfg)?;
    println!("\nverdict {:?} (exit code {})", run.verdict, run.verdict.exit_code());

    let dir = out.join(&cfg.name);
    for f in emit_report(&run.bundle, &dir, &[ReportFormat::Json, ReportFormat::CsvTables])? {
        println!("wrote {}", f.display());
    }
    // The JSON is the source of truth; the CSVs are for plotting.
    if let Some(csv) = run.bundle.table_csv("domination_table")? {
        println!("\ndomination_table.csv (head)");
        for line in csv.lines().take(5) {
            println!("  {line}");
        }
    }
    Ok(())
}
