//! A quasi-periodically forced linear ODE x' = (diag(1, -1) + eps P(phi^t y)) x
//! on the 2-torus. The continuous-time check, then the splitting of the
//! time-1/m maps for several m.
//!
//! cargo run --release --example flow_splitting -- [forcing]

use std::time::Instant;

use nalgebra::{DMatrix, DVector};

use domsplit::flow::{continuous_domination_check, flow_splitting, FlowBase, FlowCocycle, FlowParams};
use domsplit::scenario::forced_field;
use domsplit::Norm;

fn main() -> domsplit::Result<()> {
    let eps: f64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0.2);
    let base = FlowBase::Torus { frequency: vec![1.0, 2f64.sqrt()] };
    let d = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, -1.0]));
    let fc = FlowCocycle::new(base, 2, Norm::Euclidean, move |y: &[f64]| forced_field(&d, eps, y), 8)?;

    let t0 = Instant::now();
    let cert = continuous_domination_check(&fc, 1, 8.0, 33)?;
    println!(
        "continuous check ({:.2?}): pass {}  gamma {:.4}  C {:.4}",
        t0.elapsed(),
        cert.pass,
        cert.gamma,
        cert.c_const
    );
    for row in cert.ratio_table.iter().step_by(4) {
        println!("  t = {:>5.2}  sup ratio {:.4e}", row.t, row.value);
    }
    if !cert.pass {
        println!("{}", cert.diagnosis.unwrap_or_default());
        return Ok(());
    }

    let t0 = Instant::now();
    let out = flow_splitting(&fc, 1, &[1, 2, 3], &FlowParams::default())?;
    println!("\ndiscretizations ({:.2?})", t0.elapsed());
    for d in &out.discretizations {
        println!("  m = {}  tau_fit {:.5}  -> gamma {:.4}", d.m, d.tau_fit, -(d.tau_fit.ln()) * d.m as f64);
    }
    println!("largest disagreement between the splittings: {:.2e}", out.agreement);
    println!("|B^1 on F| <= {:.4}, m(B^1 on E) >= {:.4}", out.sup_norm_unit_time, out.min_norm_unit_time);
    println!("pass {}", out.pass);
    Ok(())
}
