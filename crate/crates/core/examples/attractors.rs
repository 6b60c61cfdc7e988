//! Minimal statistical attractors, basins and the orbital stability probe.

use ergolab::attractors::{grid_samples, minimal_statistical_attractor, orbital_stability_probe, statistical_basin_fraction};
use ergolab::{GridSet, Params, Partition, Point, SystemSpec};

fn main() -> ergolab::Result<()> {
    let ns = SystemSpec::build("north_south", &Params::new())?;
    let part = Partition::new(ns.space, 256)?;
    let att = minimal_statistical_attractor(&ns, &grid_samples(&ns.space, 256), 10_000, 1.0, &part)?;
    let centres: Vec<f64> = att.candidate.cells().iter().map(|&c| part.cell_center(c).coords()[0]).collect();
    println!("north-south attractor cells at {centres:?}, basin {}", att.statistical_basin_fraction);

    let disc = SystemSpec::build("disc_b", &Params::new())?;
    let part = Partition::new(disc.space, 64)?;
    let k = GridSet::covering(part, &[Point::float(&[1.0, 0.0])]);
    let basin = statistical_basin_fraction(&disc, &k, &grid_samples(&disc.space, 1000), 100_000, 0.02)?;
    println!("disc B: statistical basin of the fixed point {basin:.3}");
    for p in orbital_stability_probe(&disc, &k, &[1e-1, 1e-2, 1e-3], 1.0 / 6.0, 400, 1000)? {
        println!("  δ = {:.0e}: max excursion {:.3}", p.delta, p.max_excursion);
    }
    Ok(())
}
