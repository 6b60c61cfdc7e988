//! Weak* distances between measures and the Krylov–Bogoliubov construction.

use ergolab::measures::{
    default_family, invariance_residual, krylov_bogoliubov, pushforward, weak_star_distance, HistogramMeasure, Measure,
};
use ergolab::{Params, Partition, Point, SystemSpec};

fn main() -> ergolab::Result<()> {
    let rot = SystemSpec::build("rotation", &Params::new())?;
    let family = default_family(&rot.space);
    let lebesgue = Measure::Histogram(HistogramMeasure::uniform(Partition::new(rot.space, 512)?));
    let dirac = Measure::dirac(&rot.space, Point::float(&[0.1]));
    println!("d(δ, Leb) = {:.4}", weak_star_distance(&dirac, &lebesgue, &family, 64)?);

    for n in [10, 100, 1000, 10_000] {
        let mu = krylov_bogoliubov(&rot, &dirac, n)?;
        let r = invariance_residual(&rot, &mu, &family, 64)?;
        let d = weak_star_distance(&mu, &lebesgue, &family, 64)?;
        println!("n = {n:>5}: residual {r:.2e}, distance to Lebesgue {d:.2e}");
    }

    let tent = SystemSpec::build("tent", &Params::new())?;
    let uniform = Measure::Histogram(HistogramMeasure::uniform(Partition::new(tent.space, 1024)?));
    let pushed = pushforward(&tent, &uniform)?;
    let d = weak_star_distance(&pushed.measure, &uniform, &default_family(&tent.space), 64)?;
    println!("tent pushforward of Lebesgue moves it by {d:.2e}");
    Ok(())
}
