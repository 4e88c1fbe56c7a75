//! The closed-form constants: unit-ball volumes, sphere measures, and
//! the sharp embedding constant, with the one case that collapses to an
//! elementary expression.
//!
//! Run with `cargo run --example sharp_constants`.

use gagliardo::constants::{alpha_n, gamma, omega_n, sharp_sobolev_constant};
use gagliardo::Result;

fn main() -> Result<()> {
    println!("  n   alpha_n (ball volume)   omega_n (sphere measure)");
    for n in 1..=6 {
        println!("{n:>3}   {:>20.12}   {:>21.12}", alpha_n(n), omega_n(n));
    }

    // Spot check the recurrence the volumes are built on.
    for x in [0.5, 2.7, 6.9] {
        let drift = (gamma(x + 1.0)? - x * gamma(x)?).abs();
        println!(
            "gamma({:.1} + 1) vs {:.1} gamma({:.1}): drift {drift:.2e}",
            x, x, x
        );
    }

    println!("sharp embedding constants S(n, sigma):");
    for (n, sigma) in [(2usize, 0.5f64), (2, 0.75), (3, 0.5), (3, 0.9)] {
        println!(
            "  S({n}, {sigma}) = {:.12}",
            sharp_sobolev_constant(n, sigma)?
        );
    }
    let s = sharp_sobolev_constant(2, 0.5)?;
    let elementary = 4.0 * std::f64::consts::PI.powf(1.5);
    println!("S(2, 1/2) = {s:.15}");
    println!("4 pi^3/2  = {elementary:.15}");
    assert!((s - elementary).abs() <= 1e-12 * elementary);
    Ok(())
}
