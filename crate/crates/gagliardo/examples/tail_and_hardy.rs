//! The complement tail kernel F(x) and the pointwise first-exit bound
//! that dominates it, sampled across a domain with a hole.
//!
//! Run with `cargo run --example tail_and_hardy`.

use gagliardo::constants::FracParams;
use gagliardo::geometry::Domain;
use gagliardo::kernel::{hardy_pointwise_bound, tail_kernel};
use gagliardo::Result;

fn main() -> Result<()> {
    // At the center of (-1, 1) with sigma p = 1/2 the tail is elementary:
    // 2 * integral_1^inf r^(-3/2) dr = 4.
    let interval = Domain::interval(-1.0, 1.0);
    let half = FracParams::new(1, 0.25, 2.0)?;
    let tail = tail_kernel(&interval, &[0.0], &half)?;
    println!("tail at the center of (-1,1), sigma p = 1/2: {tail:.12} (exact 4)");

    // A planar domain with a circular hole. The bound replaces the true
    // exit set in each direction with everything past the first exit, so
    // it can only overestimate.
    let annulus_like = Domain::Union {
        parts: vec![
            Domain::ball(&[-0.9, 0.0], 0.85),
            Domain::ball(&[0.9, 0.0], 0.85),
        ],
    };
    let params = FracParams::new(2, 0.6, 2.0)?;
    println!("two overlapping disks, sigma = 0.6, p = 2:");
    println!("  x                     F(x)         bound      slack");
    let mut worst_ratio = 0.0f64;
    for x in annulus_like.interior_lattice_points(12)? {
        let b = hardy_pointwise_bound(&annulus_like, &x, &params)?;
        worst_ratio = worst_ratio.max(b.lhs / b.rhs);
        println!(
            "  ({:>6.3}, {:>6.3})   {:>10.4} {:>10.4} {:>10.4}",
            x[0],
            x[1],
            b.lhs,
            b.rhs,
            b.rhs - b.lhs
        );
    }
    println!("largest F(x)/bound ratio: {worst_ratio:.4} (must stay <= 1)");
    assert!(worst_ratio <= 1.0 + 1e-6);
    Ok(())
}
