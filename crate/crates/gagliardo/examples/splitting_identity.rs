//! The full-space energy splits into a domain part plus twice a cross
//! term, and the hull used to truncate the far field does not matter.
//!
//! Run with `cargo run --example splitting_identity`.

use gagliardo::constants::FracParams;
use gagliardo::experiments::{build_bump, BumpSpec};
use gagliardo::geometry::Domain;
use gagliardo::seminorm::{cross_term, energy_domain, energy_fullspace};
use gagliardo::Result;

fn main() -> Result<()> {
    let params = FracParams::new(1, 0.6, 2.0)?;
    let d = Domain::interval(-1.0, 1.0);
    let u = build_bump(&BumpSpec::new(vec![0.3], 0.2)?, 1.0 / 128.0)?;

    let domain = energy_domain(&u, &d, &params)?;
    let cross = cross_term(&u, &d, &params)?;
    let narrow = energy_fullspace(&u, &params, &Domain::interval(-1.0, 1.0))?;
    let wide = energy_fullspace(&u, &params, &Domain::interval(-4.0, 4.0))?;

    println!("domain energy        {:.12}", domain.value);
    println!("cross term           {:.12}", cross);
    println!("domain + 2 cross     {:.12}", domain.value + 2.0 * cross);
    println!("fullspace, hull +-1  {:.12}", narrow.value);
    println!("fullspace, hull +-4  {:.12}", wide.value);

    let split_gap = (domain.value + 2.0 * cross - narrow.value).abs();
    let hull_gap = (narrow.value - wide.value).abs();
    println!("splitting identity gap   {split_gap:.3e}");
    println!(
        "hull independence gap    {hull_gap:.3e} (estimates {:.3e}, {:.3e})",
        narrow.error_estimate, wide.error_estimate
    );
    assert!(hull_gap <= narrow.error_estimate + wide.error_estimate);
    Ok(())
}
