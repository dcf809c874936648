//! Singular values against Gelfand and Kolmogorov numbers and volume growth
//! in non-Euclidean norms. In the Euclidean norm the three coincide; in l1
//! and l-infinity they separate, and the ratios V_q / (c_q V_(q-1)) show how far.
//!
//! cargo run --release --example banach_snumbers

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use domsplit::extremal::SearchOptions;
use domsplit::lemmas::random_matrix;
use domsplit::snumbers::{gelfand, gelfand_volume_ratio, kolmogorov, volume_growth};
use domsplit::{linalg, Norm};

fn main() -> domsplit::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let a: DMatrix<f64> = random_matrix(&mut rng, 3);
    println!("A =\n{a:.4}");
    println!("singular values: {:.5?}", linalg::singular_values(&a).as_slice());

    for norm in [Norm::Euclidean, Norm::l1(), Norm::linf(), "lp:3".parse()?] {
        // Polytope norms are enumerated exactly; smooth lp norms go through
        // the nested sphere/Grassmannian search, which is much slower.
        let opts = if norm.is_polytope() || norm.is_hilbert() {
            SearchOptions::default()
        } else {
            SearchOptions { starts: 8, ..SearchOptions::default() }
        };
        println!("\n{norm}");
        println!("  q   c_q        x_q        V_q        V_q/(c_q V_q-1)");
        for q in 1..=3 {
            let c = gelfand(&a, q, &norm, &opts)?;
            let x = kolmogorov(&a, q, &norm, &opts)?;
            let v = volume_growth(&a, q, &norm, &opts)?;
            let r = gelfand_volume_ratio(&a, q, &norm, &opts)?;
            println!("  {q}   {:<10.5} {:<10.5} {:<10.5} {:.4}   ({:?})", c.value, x.value, v.value, r, c.method);
        }
    }
    Ok(())
}
