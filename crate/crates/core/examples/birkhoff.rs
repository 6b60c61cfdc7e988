//! Birkhoff averages, sojourn frequencies and recurrence.

use std::f64::consts::PI;

use ergolab::ergodic_stats::{birkhoff_average, geometric_checkpoints, recurrence_fraction, sojourn_frequency};
use ergolab::attractors::grid_samples;
use ergolab::{GridSet, Params, Partition, Point, SystemSpec};

fn main() -> ergolab::Result<()> {
    let rot = SystemSpec::build("rotation", &Params::new())?;
    let x = Point::float(&[0.1]);
    let psi = |p: &Point| (1.0 + (2.0 * PI * p.coords()[0]).cos()) / 2.0;
    let n = 100_000;
    let avg = birkhoff_average(&rot, &x, psi, n, Some(&geometric_checkpoints(n, 10)))?;
    print!("{}", avg.to_csv());

    let part = Partition::new(rot.space, 10)?;
    let a = GridSet::new(part, [0, 1, 2])?;
    println!("sojourn in [0, 0.3): {:.5}", sojourn_frequency(&rot, &x, &a, n)?);

    let cat = SystemSpec::build("cat_map", &Params::new())?;
    let part = Partition::new(cat.space, 8)?;
    let cell = GridSet::new(part, [3])?;
    let starts: Vec<Point> = grid_samples(&cat.space, 20_000).into_iter().filter(|p| cell.contains_point(p)).collect();
    println!("cat-map recurrence to cell 3: {:.4}", recurrence_fraction(&cat, &cell, &starts, 10_000, 1)?);
    Ok(())
}
