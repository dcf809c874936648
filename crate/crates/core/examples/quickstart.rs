//! The smallest end-to-end run: a constant hyperbolic cocycle diag(2, 1).
//!
//! cargo run --release --example quickstart

use nalgebra::DMatrix;

use domsplit::cocycle::{analyze, AnalysisParams, CocycleSystem};
use domsplit::Norm;

fn main() -> domsplit::Result<()> {
    let a = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 1.0]);
    let c = CocycleSystem::constant(a, Norm::Euclidean)?;
    let out = analyze(&c, &AnalysisParams::default())?;

    let cert = &out.certificate;
    println!("dominated: {}  K = {:.4}  tau = {:.4}", cert.pass, cert.k_fit, cert.tau_fit);

    let s = out.splitting.as_ref().expect("dominated cocycles get a splitting");
    let p = &s.points[0];
    println!("E = span{:?}", p.e.basis().column(0).as_slice());
    println!("F = span{:?}", p.f.basis().column(0).as_slice());

    let v = out.verification.as_ref().unwrap();
    println!("verified: {}  (ratios resolved through n = {})", v.pass, v.resolved_through);
    for row in v.domination_table.iter().take(6) {
        println!("  n = {:>2}  |A^n|F| / m(A^n|E) = {:.6}", row.n, row.value);
    }

    if let Some(r) = &out.r_e {
        println!("volume ratio on E: {:.4} >= exp({:.2})", r.estimate, r.log_lower_bound);
    }
    Ok(())
}
