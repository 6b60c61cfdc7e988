//! Correlation decay: the tent map mixes, an irrational rotation does not.

use ergolab::attractors::grid_samples;
use ergolab::entropy_mixing::{correlation_series, default_window, mixing_verdict, DEFAULT_MIXING_TOL};
use ergolab::{GridSet, Params, Partition, SystemSpec};

fn main() -> ergolab::Result<()> {
    for (name, n_max) in [("tent", 20), ("cat_map", 20), ("rotation", 2000)] {
        let s = SystemSpec::build(name, &Params::new())?;
        let part = Partition::new(s.space, 2)?;
        let a = GridSet::new(part, [0])?;
        let c = correlation_series(&s, &a, &a, &grid_samples(&s.space, 10_000), n_max)?;
        let verdict = mixing_verdict(&c, DEFAULT_MIXING_TOL, default_window(&c));
        let head: Vec<String> = c.values.iter().take(6).map(|v| format!("{v:.3}")).collect();
        println!("{name}: c_n = {} ..., target {:.3}, {verdict:?}", head.join(" "), c.target);
    }
    Ok(())
}
