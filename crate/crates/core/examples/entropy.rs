//! Partition entropy slopes compared with the sum of positive exponents.

use ergolab::attractors::grid_samples;
use ergolab::entropy_mixing::pesin_residual;
use ergolab::{Params, Partition, SystemSpec};

fn main() -> ergolab::Result<()> {
    for (name, samples) in [("tent", 100_000), ("expanding", 100_000), ("rotation", 100_000), ("cat_map", 1_000_000)] {
        let s = SystemSpec::build(name, &Params::new())?;
        let part = Partition::new(s.space, 2)?;
        let r = pesin_residual(&s, &grid_samples(&s.space, samples), &part, 24)?;
        println!(
            "{name:<10} slope {:.4} over {} levels, Σχ⁺ {:.4}, residual {:+.4}",
            r.entropy.slope, r.entropy.n_reliable, r.positive_exponent_sum, r.residual
        );
        if let Some(w) = &r.entropy.warning {
            println!("  warning: {w}");
        }
    }
    Ok(())
}
