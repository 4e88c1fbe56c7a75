//! Radial-weight integrals before and after symmetrization: near the
//! singularity the symmetrized domain collects more mass, far from it
//! the original complement does.
//!
//! Run with `cargo run --example lemma_decrease`.

use gagliardo::geometry::Domain;
use gagliardo::kernel::{lemma_decrease_inside, lemma_decrease_outside};
use gagliardo::Result;

fn main() -> Result<()> {
    let domains: Vec<(&str, Domain)> = vec![
        ("shifted interval (-0.5, 1.5)", Domain::interval(-0.5, 1.5)),
        (
            "two intervals (-0.3,1.0) u (1.2,1.7)",
            Domain::Union {
                parts: vec![Domain::interval(-0.3, 1.0), Domain::interval(1.2, 1.7)],
            },
        ),
    ];
    for (name, d) in &domains {
        // alpha below the dimension: integrate |x|^(-alpha) over the
        // domain; the centered ball of equal measure wins.
        let inside = lemma_decrease_inside(d, 0.5)?;
        // alpha above the dimension: integrate over the complement
        // instead; now the original domain's complement wins.
        let outside = lemma_decrease_outside(d, 3.0)?;
        println!("{name}:");
        println!(
            "  alpha 0.5 over the ball      {:>12.6} > {:>12.6} over the domain",
            inside.lhs, inside.rhs
        );
        println!(
            "  alpha 3.0 over the complement {:>11.6} > {:>12.6} over the ball's",
            outside.lhs, outside.rhs
        );
        assert!(inside.lhs > inside.rhs && outside.lhs > outside.rhs);
    }

    let plate = Domain::Rect {
        lo: vec![-0.6, -0.5],
        hi: vec![1.0, 0.7],
    };
    let inside = lemma_decrease_inside(&plate, 1.3)?;
    println!("planar plate, alpha 1.3:");
    println!(
        "  {:>12.6} > {:>12.6}, margin {:.2e} vs quadrature error {:.2e}",
        inside.lhs,
        inside.rhs,
        inside.lhs - inside.rhs,
        inside.quadrature_error
    );
    Ok(())
}
