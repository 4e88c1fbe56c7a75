//! Critical-norm against energy on the unit disk: the squared critical
//! Lebesgue norm stays within a uniform multiple of the domain energy,
//! and the observed ratios sit below the full-space sharp constant's
//! reciprocal scale.
//!
//! Run with `cargo run --release --example embedding_ratio`.

use gagliardo::constants::FracParams;
use gagliardo::experiments::{build_bump, sobolev_from_hardy_check, BumpSpec};
use gagliardo::geometry::Domain;
use gagliardo::Result;

fn main() -> Result<()> {
    let disk = Domain::ball(&[0.0, 0.0], 1.0);
    let params = FracParams::new(2, 0.6, 2.0)?;
    let q = 2.0 * params.n as f64 / (params.n as f64 - 2.0 * params.sigma);
    println!("critical exponent q = {q:.6}");

    println!("  bump (center, radius)      |u|_q^2      energy     ratio");
    let mut max_ratio = 0.0f64;
    for (center, eps) in [
        (vec![0.0, 0.0], 0.4),
        (vec![0.3, 0.0], 0.3),
        (vec![0.5, 0.2], 0.2),
        (vec![-0.55, -0.25], 0.15),
    ] {
        let u = build_bump(&BumpSpec::new(center.clone(), eps)?, eps / 10.0)?;
        let (lhs, rhs) = sobolev_from_hardy_check(&u, &disk, &params)?;
        let ratio = lhs / rhs;
        max_ratio = max_ratio.max(ratio);
        println!(
            "  (({:>5.2}, {:>5.2}), {eps:<4})  {lhs:>10.6} {rhs:>10.4} {ratio:>10.6}",
            center[0], center[1]
        );
    }
    println!("largest ratio: {max_ratio:.6}");
    assert!(max_ratio.is_finite() && max_ratio > 0.0);
    Ok(())
}
