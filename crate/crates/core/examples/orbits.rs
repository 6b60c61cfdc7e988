//! Orbits of a few built-in systems, in float and exact arithmetic.

use ergolab::phase_space::DEFAULT_MODULUS;
use ergolab::systems::catalog;
use ergolab::{Iterate, Params, Point, SystemSpec};

fn main() -> ergolab::Result<()> {
    for entry in catalog() {
        println!("{:<12} {:?}", entry.name, entry.space);
    }

    let tent = SystemSpec::build("tent", &Params::new())?;
    let orbit = tent.orbit(&Point::float(&[0.3]), 8)?;
    let xs: Vec<f64> = orbit.points.iter().map(|p| p.coords()[0]).collect();
    println!("tent from 0.3: {xs:.4?}");

    let cat = SystemSpec::build("cat_map", &Params::new())?.with_exact_modulus(DEFAULT_MODULUS)?;
    let x = Point::exact(&[1, 0], DEFAULT_MODULUS);
    let y = cat.iterate(&x, 1_000_000)?;
    println!("exact cat map, 10^6 steps from (1,0)/q: {:?}", y.point().map(|p| p.coords().to_vec()));

    let horseshoe = SystemSpec::build("horseshoe", &Params::new())?;
    match horseshoe.iterate(&Point::float(&[0.5, 0.5]), 10)? {
        Iterate::Inside(p) => println!("horseshoe stayed at {:?}", p.coords()),
        Iterate::Escaped { at } => println!("horseshoe orbit left the square at step {at}"),
    }
    Ok(())
}
