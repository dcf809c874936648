//! A skew product over an irrational rotation: diag(4, 1) conjugated by a
//! rotation whose angle varies with the base point. Prints the convergence
//! of the upper and lower bundles and how far the bundles move along the
//! circle.
//!
//! cargo run --release --example skew_product -- [amplitude]

use std::f64::consts::PI;

use nalgebra::DMatrix;

use domsplit::cocycle::{analyze, AnalysisParams, BaseSystem, CocycleSystem};
use domsplit::linalg::rotation;
use domsplit::Norm;

fn main() -> domsplit::Result<()> {
    let amp: f64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0.1);
    let golden = (5f64.sqrt() - 1.0) / 2.0;
    let base = BaseSystem::rotation(golden, 128)?;
    let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![4.0, 1.0]));
    let c = CocycleSystem::new(base, 2, Norm::Euclidean, move |x: &[f64]| {
        let r = rotation(2, 0, 1, amp * (2.0 * PI * x[0]).sin());
        &r * &d * r.transpose()
    })?;

    let out = analyze(&c, &AnalysisParams::default())?;
    let cert = &out.certificate;
    println!("amplitude {amp}: dominated {} (tau_fit {:.4}, K_fit {:.4})", cert.pass, cert.tau_fit, cert.k_fit);
    let Some(s) = &out.splitting else { return Ok(()) };

    println!("\nupper bundle: sup over samples of d_H(E_n, E_(n+1))");
    for row in &s.convergence_table {
        println!("  {:>2}  {:.3e}", row.n, row.value);
    }
    if let Some(env) = &s.convergence_envelope {
        println!("  envelope {:.3} * {:.4}^n", env.constant, env.rate);
    }
    println!("lower bundle converged in {} steps", s.lower_convergence_table.len());

    // The bundles as angles on the circle.
    println!("\n   x       angle(E)   angle(F)");
    for p in s.points.iter().step_by(16) {
        let e = p.e.basis().column(0);
        let f = p.f.basis().column(0);
        println!("  {:.3}   {:+.5}   {:+.5}", p.x[0], e[1].atan2(e[0]), f[1].atan2(f[0]));
    }

    if let (Some(v), Some(r)) = (&out.verification, &out.r_e) {
        println!("\nequivariance residuals: E {:.2e}, F {:.2e}", v.equivariance_residual_e, v.equivariance_residual_f);
        println!("R_E estimate {:.5}, lower bound exp({:.2})", r.estimate, r.log_lower_bound);
    }
    if let Some(cv) = &out.converse {
        println!("converse: K' = {:.3} holds through n = {}: {}", cv.k_prime, cv.checked_through, cv.holds);
    }
    Ok(())
}
