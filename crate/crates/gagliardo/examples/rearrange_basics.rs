//! Symmetric decreasing rearrangement of a small planar grid function:
//! the shell table, and the invariants that survive the rearrangement.
//!
//! Run with `cargo run --example rearrange_basics`.

use gagliardo::rearrange::{distribution, rearrange, GridFunction};
use gagliardo::Result;

fn main() -> Result<()> {
    // An 8x8 patch with three occupied cells at different levels. The
    // outermost ring must stay zero so the function extends by zero.
    let mut values = vec![0.0; 64];
    values[2 * 8 + 3] = 2.0;
    values[3 * 8 + 3] = 1.0;
    values[3 * 8 + 4] = 1.0;
    values[4 * 8 + 4] = 0.5;
    let u = GridFunction::new(vec![-1.0, -1.0], 0.25, vec![8, 8], values)?;

    let star = rearrange(&u);
    println!("shells of u* (level, cells, r_inner..r_outer):");
    let bp = star.breakpoints();
    for (j, (level, count)) in star.levels.iter().zip(&star.counts).enumerate() {
        println!(
            "  level {level:>4}  cells {count}  radius {:.6}..{:.6}",
            bp[j],
            bp[j + 1]
        );
    }

    // Equimeasurability: every superlevel set keeps its measure.
    for t in [0.25, 0.75, 1.5] {
        let before = distribution(&u, t)?;
        let after = star.distribution_measure(t)?;
        println!("measure of {{u > {t}}}: grid {before:.6}, profile {after:.6}");
        assert_eq!(before, after);
    }

    // Norm preservation, exact because the cell multiset is unchanged.
    for q in [1.0, 2.0, f64::INFINITY] {
        let a = u.lp_norm(q)?;
        let b = star.lp_norm(q)?;
        println!("L^{q} norm: {a:.12} -> {b:.12}");
    }

    println!(
        "support: {} cells, radius {:.6}",
        star.total_cells(),
        star.support_radius()
    );
    Ok(())
}
