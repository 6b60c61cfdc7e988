//! SRB-like measures as clusters of empirical measures.

use ergolab::attractors::{grid_samples, srb_like_estimate};
use ergolab::measures::default_family;
use ergolab::phase_space::DEFAULT_MODULUS;
use ergolab::{Params, Partition, SystemSpec};

fn main() -> ergolab::Result<()> {
    for (name, exact) in [("north_south", false), ("cat_map", true), ("identity", false)] {
        let mut s = SystemSpec::build(name, &Params::new())?;
        if exact {
            s = s.with_exact_modulus(DEFAULT_MODULUS)?;
        }
        let k = if s.dim() == 1 { 64 } else { 16 };
        let part = Partition::new(s.space, k)?;
        let samples = if exact { s.space.lebesgue_grid(16) } else { grid_samples(&s.space, 256) };
        let rep = srb_like_estimate(&s, &samples, 5000, &default_family(&s.space), 64, 0.05, &part)?;
        println!("{name}: {} clusters", rep.clusters.len());
        for c in rep.clusters.iter().take(3) {
            println!("  basin fraction {:.3}, invariance residual {:.2e} (bound {:.2e})", c.basin_fraction, c.invariance_residual, c.residual_bound);
        }
    }
    Ok(())
}
