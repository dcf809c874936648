//! Energy scan for the almost Mathieu cocycle [[E - 2 lambda cos(2 pi x), -1], [1, 0]]
//! over the golden rotation. Energies in a spectral gap give a uniformly
//! hyperbolic, hence dominated, cocycle. For lambda < 1 the exponent vanishes
//! on the spectrum and the detector reports no gap there. For lambda > 1 the
//! exponent is at least log(lambda) at every energy, so a finite horizon cannot
//! separate the spectrum from the gaps.
//!
//! cargo run --release --example schrodinger_scan -- [lambda]

use std::f64::consts::PI;

use nalgebra::DMatrix;

use domsplit::cocycle::{detect_domination, BaseSystem, CocycleSystem, Criterion};
use domsplit::Norm;

fn main() -> domsplit::Result<()> {
    let lambda: f64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0.5);
    let golden = (5f64.sqrt() - 1.0) / 2.0;
    let edge = 2.0 + 2.0 * lambda;
    println!("lambda = {lambda}; the spectrum lies inside [-{edge:.1}, {edge:.1}]");
    println!("   E      dominated   tau_fit");
    for i in 0..=24 {
        let energy = -(edge + 1.0) + (edge + 1.0) * i as f64 / 12.0;
        let base = BaseSystem::rotation(golden, 64)?;
        let c = CocycleSystem::new(base, 2, Norm::Euclidean, move |x: &[f64]| {
            let v = 2.0 * lambda * (2.0 * PI * x[0]).cos();
            DMatrix::from_row_slice(2, 2, &[energy - v, -1.0, 1.0, 0.0])
        })?;
        let cert = detect_domination(&c, 1, 60, Criterion::Bogo)?;
        println!("  {energy:+5.2}   {:<9}   {:.4}", cert.pass, cert.tau_fit);
    }
    Ok(())
}
