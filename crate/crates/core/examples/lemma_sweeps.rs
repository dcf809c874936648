//! Runs every lemma suite and prints per-check statistics.
//!
//! cargo run --release --example lemma_sweeps -- [trials] [dim] [seed]

use std::time::Instant;

use domsplit::lemmas::{run_suite, Suite, SweepOptions};

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let arg = |i: usize, default: u64| args.get(i).and_then(|s| s.parse().ok()).unwrap_or(default);
    let opts = SweepOptions { trials: arg(0, 1000) as usize, dim: arg(1, 4) as usize, seed: arg(2, 0) };
    for suite in Suite::ALL {
        let t = Instant::now();
        let report = run_suite(suite, &opts).expect("sweep");
        println!("{suite} ({:.2?})", t.elapsed());
        for c in &report.checks {
            println!(
                "  {:<34} evaluated {:>6}  skipped {:>5}  violations {}  worst lhs-rhs {:.3e}",
                c.name, c.evaluated, c.skipped, c.violations, c.worst_margin
            );
        }
        if let Some(cx) = &report.counterexample {
            println!("  counterexample: {cx:?}");
        }
    }
}
