//! The paring construction of a singular-value splitting in a general norm,
//! compared with the orthogonal one.
//!
//! cargo run --release --example gen_svd

use nalgebra::{DMatrix, DVector};

use domsplit::extremal::SearchOptions;
use domsplit::svd_split::{banach_gen_svd, hilbert_svd_split};
use domsplit::{geometry, Norm, Subspace};

fn show(label: &str, s: &Subspace) {
    let rows: Vec<String> = s
        .basis()
        .column_iter()
        .map(|c| format!("[{}]", c.iter().map(|x| format!("{x:+.4}")).collect::<Vec<_>>().join(", ")))
        .collect();
    println!("  {label:<3} {}", rows.join(" "));
}

fn main() -> domsplit::Result<()> {
    let a = DMatrix::from_row_slice(3, 3, &[4.0, 0.5, 0.0, 0.3, 2.0, 0.2, 0.0, 0.1, 1.0]);
    let e = Subspace::from_columns(&DMatrix::from_columns(&[
        DVector::from_vec(vec![1.0, 0.2, 0.0]),
        DVector::from_vec(vec![0.0, 1.0, 0.1]),
    ]))?;

    let h = hilbert_svd_split(&a, &e)?;
    println!("orthogonal construction (r = {:.4})", h.r);
    show("F", &h.f);
    show("F'", &h.f_image);
    for c in &h.checks {
        println!("  {:<28} {:.5} <= {:.5}  {}", c.name, c.check.lhs, c.check.rhs, c.check.holds);
    }

    for norm in [Norm::Euclidean, Norm::linf(), Norm::l1()] {
        let g = banach_gen_svd(&a, &e, &norm, &SearchOptions::default())?;
        println!("\n{norm}: paring construction");
        show("F", &g.pair.f);
        show("F'", &g.pair.f_image);
        println!("  |pi_E//F| = {:.4}, |pi_E'//F'| = {:.4}", g.pair.proj_norm_domain, g.pair.proj_norm_image);
        println!("  |A|F| = {:.4}, c_3(A) = {:.4}", g.pair.sup_norm_on_f, g.c_next);
        println!("  measured D = {:.4}; r^-(2^k - 1) = {:.4}", g.empirical_d, g.d_shape);
        println!("  A F in F': residual {:.2e}", g.pair.containment_residual);
        println!("  distance to the orthogonal F: {:.2e}", geometry::hausdorff(&g.pair.f, &h.f, &Norm::Euclidean));
    }
    Ok(())
}
