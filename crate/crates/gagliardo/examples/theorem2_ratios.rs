//! The reversal is bounded: however a function is placed in its domain,
//! the rearranged energy exceeds the domain energy by at most a fixed
//! factor. A corpus of random bump sums probes that factor.
//!
//! Run with `cargo run --release --example theorem2_ratios`.

use gagliardo::constants::FracParams;
use gagliardo::experiments::{theorem2_corpus, theorem2_ratio_suite};
use gagliardo::Result;

fn main() -> Result<()> {
    let params = FracParams::new(1, 0.7, 2.0)?;
    let corpus = theorem2_corpus(1.0 / 128.0, 0)?;
    let suite = theorem2_ratio_suite(&corpus, &params)?;

    println!("|u*|_W(Omega*) / |u|_W(Omega) over 10 random bump sums on (-1,1):");
    for (i, r) in suite.ratios.iter().enumerate() {
        println!("  case {i:>2}: {r:.6}");
    }
    println!("largest ratio: {:.6}", suite.max_ratio);
    assert!(suite.max_ratio.is_finite());
    Ok(())
}
