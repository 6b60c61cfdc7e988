//! Topological and statistical attractors on a grid, SRB-like measures and
//! orbital stability.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ergodic_stats::single_linkage;
use crate::error::{Error, Result};
use crate::measures::{
    invariance_residual, weak_star_from_moments, HistogramMeasure, Measure, MomentAccumulator,
    TestFunctionFamily,
};
use crate::phase_space::{GridSet, Partition, PhaseSpace, Point};
use crate::systems::SystemSpec;

/// Grid resolution per axis for Lebesgue sampling.
pub const DEFAULT_GRID_PER_AXIS: usize = 64;

/// Margin of the frequency/Cesàro comparison.
pub const DEFAULT_MARGIN: f64 = 0.05;

/// Exactly `count` points of a uniform grid of the space, thinned evenly
/// from the smallest grid with at least that many points inside.
pub fn grid_samples(space: &PhaseSpace, count: usize) -> Vec<Point> {
    if count == 0 {
        return Vec::new();
    }
    let d = space.dim() as f64;
    let mut per_axis = (count as f64).powf(1.0 / d).ceil().max(1.0) as usize;
    loop {
        let g = space.lebesgue_grid(per_axis);
        if g.len() >= count {
            let len = g.len();
            return (0..count).map(|i| g[i * len / count]).collect();
        }
        let scale = (count as f64 / g.len().max(1) as f64).powf(1.0 / d);
        per_axis = ((per_axis as f64 * scale).ceil() as usize).max(per_axis + 1);
    }
}

/// Cells whose closed box meets the circle `|z| = radius` (planar spaces).
pub fn cells_meeting_circle(partition: &Partition, radius: f64) -> GridSet {
    GridSet::from_fn(*partition, |c| {
        let (lo, hi) = partition.cell_box(c);
        let near = (lo[0].max(0.0).min(hi[0])).hypot(lo[1].max(0.0).min(hi[1]));
        let far = lo[0].abs().max(hi[0].abs()).hypot(lo[1].abs().max(hi[1].abs()));
        near <= radius && far >= radius
    })
}

/// `f^from x … f^{to−1} x` with consecutive repeats merged; `None` if the
/// orbit escapes first.
fn orbit_runs(system: &SystemSpec, x: &Point, from: usize, to: usize) -> Option<Vec<(Point, usize)>> {
    let mut p = *x;
    let mut runs: Vec<(Point, usize)> = Vec::new();
    let mut j = 0;
    while j < to {
        if j >= from {
            match runs.last_mut() {
                Some((q, c)) if *q == p => *c += 1,
                _ => runs.push((p, 1)),
            }
        }
        if j + 1 == to {
            break;
        }
        let next = system.forward(&p)?;
        if next == p {
            // fixed point: the rest of the orbit repeats it
            let first = (j + 1).max(from);
            if first < to {
                match runs.last_mut() {
                    Some((q, c)) if *q == p => *c += to - first,
                    _ => runs.push((p, to - first)),
                }
            }
            break;
        }
        p = next;
        j += 1;
    }
    Some(runs)
}

fn check_set(system: &SystemSpec, k: &GridSet) -> Result<()> {
    let ks = k.partition().space;
    if ks.kind != system.space.kind || ks.dim() != system.space.dim() {
        return Err(Error::SpaceMismatch("cell set is on another space".into()));
    }
    Ok(())
}

/// Attraction data of one orbit segment `[burn_in, n)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleAttraction {
    pub escaped: bool,
    /// Largest distance to `K` over the segment.
    pub max_distance: f64,
    /// Mean distance to `K` over the segment.
    pub cesaro_distance: f64,
}

impl SampleAttraction {
    pub fn topological(&self, tol: f64) -> bool {
        !self.escaped && self.max_distance < tol
    }

    pub fn statistical(&self, tol: f64) -> bool {
        !self.escaped && self.cesaro_distance < tol
    }
}

pub fn classify_sample(system: &SystemSpec, k: &GridSet, x: &Point, n: usize, burn_in: usize) -> Result<SampleAttraction> {
    check_set(system, k)?;
    system.check_point(x)?;
    if burn_in >= n {
        return Err(Error::InvalidArgument("burn_in must be below n".into()));
    }
    Ok(classify_unchecked(system, k, x, n, burn_in))
}

fn classify_unchecked(system: &SystemSpec, k: &GridSet, x: &Point, n: usize, burn_in: usize) -> SampleAttraction {
    match orbit_runs(system, x, burn_in, n) {
        None => SampleAttraction { escaped: true, max_distance: f64::INFINITY, cesaro_distance: f64::INFINITY },
        Some(runs) => {
            let mut max: f64 = 0.0;
            let mut sum = 0.0;
            for (p, c) in &runs {
                let d = k.distance(p);
                max = max.max(d);
                sum += d * *c as f64;
            }
            SampleAttraction { escaped: false, max_distance: max, cesaro_distance: sum / (n - burn_in) as f64 }
        }
    }
}

fn classify_all(system: &SystemSpec, k: &GridSet, samples: &[Point], n: usize, burn_in: usize) -> Result<Vec<SampleAttraction>> {
    check_set(system, k)?;
    if samples.is_empty() {
        return Err(Error::InvalidArgument("no samples".into()));
    }
    if burn_in >= n {
        return Err(Error::InvalidArgument("burn_in must be below n".into()));
    }
    for s in samples {
        system.check_point(s)?;
    }
    Ok(samples.par_iter().map(|x| classify_unchecked(system, k, x, n, burn_in)).collect())
}

/// Fraction of samples with `dist(fʲx, K) < tol` for every `j ∈ [burn_in, n)`.
pub fn topological_basin_fraction(
    system: &SystemSpec,
    k: &GridSet,
    samples: &[Point],
    n: usize,
    burn_in: usize,
    tol: f64,
) -> Result<f64> {
    if !(tol > k.partition().cell_diameter()) {
        return Err(Error::InvalidArgument("tolerance must exceed the cell diameter".into()));
    }
    let cls = classify_all(system, k, samples, n, burn_in)?;
    Ok(cls.iter().filter(|c| c.topological(tol)).count() as f64 / samples.len() as f64)
}

/// Fraction of samples with `(1/n) Σ_{j<n} dist(fʲx, K) < tol`.
pub fn statistical_basin_fraction(
    system: &SystemSpec,
    k: &GridSet,
    samples: &[Point],
    n: usize,
    tol: f64,
) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument("tolerance must be positive".into()));
    }
    let cls = classify_all(system, k, samples, n, 0)?;
    Ok(cls.iter().filter(|c| c.statistical(tol)).count() as f64 / samples.len() as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VisitFrequencyReport {
    pub eps: Vec<f64>,
    /// `σ_{n,x}(V(ε))` for each `ε`, where `V(ε) = {y : dist(y, K) < ε}`.
    pub frequencies: Vec<f64>,
    /// `(1/n) Σ dist(fʲx, K)`.
    pub cesaro_distance: f64,
    /// Every frequency is at least `1 − margin`.
    pub frequency_attracted: bool,
    /// The Cesàro distance is below `margin · min ε`.
    pub cesaro_attracted: bool,
    /// Both bounds linking the two criteria hold:
    /// `σ(V(ε)) ≥ 1 − D/ε` and `D ≤ ε·σ(V(ε)) + diam·(1 − σ(V(ε)))`.
    pub consistent: bool,
    pub escaped_at: Option<usize>,
}

impl VisitFrequencyReport {
    /// Whenever the Cesàro criterion classifies the orbit as attracted, the
    /// frequency criterion does too.
    pub fn agree(&self) -> bool {
        !self.cesaro_attracted || self.frequency_attracted
    }
}

/// Compares the two characterisations of statistical attraction on one
/// orbit: visit frequencies of every neighbourhood of `K` tending to one,
/// and Cesàro means of the distance to `K` tending to zero.
pub fn visit_frequency_equivalence(
    system: &SystemSpec,
    k: &GridSet,
    x: &Point,
    n: usize,
    eps_list: &[f64],
    margin: f64,
) -> Result<VisitFrequencyReport> {
    check_set(system, k)?;
    system.check_point(x)?;
    if eps_list.is_empty() || eps_list.iter().any(|e| !(*e > 0.0)) {
        return Err(Error::InvalidArgument("eps_list must hold positive values".into()));
    }
    if n == 0 || !(margin > 0.0 && margin < 1.0) {
        return Err(Error::InvalidArgument("need n ≥ 1 and 0 < margin < 1".into()));
    }
    let mut hits = vec![0usize; eps_list.len()];
    let mut sum = 0.0;
    let mut total = 0usize;
    let mut escaped_at = None;
    let mut p = *x;
    for j in 0..n {
        let d = k.distance(&p);
        let fixed = if j + 1 < n {
            match system.forward(&p) {
                Some(q) => {
                    let same = q == p;
                    p = q;
                    same
                }
                None => {
                    escaped_at = Some(j + 1);
                    false
                }
            }
        } else {
            false
        };
        let reps = if fixed { n - j } else { 1 };
        total += reps;
        sum += d * reps as f64;
        for (h, e) in hits.iter_mut().zip(eps_list) {
            if d < *e {
                *h += reps;
            }
        }
        if fixed || escaped_at.is_some() {
            break;
        }
    }
    let freqs: Vec<f64> = hits.iter().map(|&h| h as f64 / total as f64).collect();
    let cesaro = sum / total as f64;
    let eps_min = eps_list.iter().cloned().fold(f64::INFINITY, f64::min);
    let diam = system.space.diameter();
    let consistent = freqs.iter().zip(eps_list).all(|(&s, &e)| {
        s >= 1.0 - cesaro / e - 1e-12 && cesaro <= e * s + diam * (1.0 - s) + 1e-12
    });
    Ok(VisitFrequencyReport {
        eps: eps_list.to_vec(),
        frequency_attracted: freqs.iter().all(|&s| s >= 1.0 - margin),
        frequencies: freqs,
        cesaro_attracted: cesaro < margin * eps_min,
        cesaro_distance: cesaro,
        consistent,
        escaped_at,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttractorReport {
    pub candidate: GridSet,
    /// Samples whose orbit stays within `tolerance` of the candidate after
    /// the burn-in.
    pub topological_basin_fraction: f64,
    /// Samples whose post-burn-in Cesàro distance to the candidate is below
    /// `tolerance`.
    pub statistical_basin_fraction: f64,
    pub alpha: f64,
    pub alpha_attained: bool,
    pub n: usize,
    pub burn_in: usize,
    pub tolerance: f64,
    /// The candidate is inclusion-minimal among grid sets of this
    /// resolution (cells per axis).
    pub resolution: usize,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct AttractorOptions {
    /// Defaults to `n/10`.
    pub burn_in: Option<usize>,
    /// Cesàro tolerance; defaults to `0.01 · side / cell_count`.
    pub tolerance: Option<f64>,
}

/// Greedy inclusion-minimal α-observable statistical attractor with
/// default options.
pub fn minimal_statistical_attractor(
    system: &SystemSpec,
    samples: &[Point],
    n: usize,
    alpha: f64,
    partition: &Partition,
) -> Result<AttractorReport> {
    minimal_statistical_attractor_with(system, samples, n, alpha, partition, &AttractorOptions::default())
}

/// Starts from every cell visited after the burn-in and sweeps the cells in
/// ascending order of visit count (lowest index first on ties), dropping a
/// cell whenever the statistical basin of the rest still holds a fraction
/// `alpha` of the samples. Sweeps repeat until nothing changes.
pub fn minimal_statistical_attractor_with(
    system: &SystemSpec,
    samples: &[Point],
    n: usize,
    alpha: f64,
    partition: &Partition,
    opts: &AttractorOptions,
) -> Result<AttractorReport> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidArgument("alpha must lie in (0, 1]".into()));
    }
    if samples.is_empty() {
        return Err(Error::InvalidArgument("no samples".into()));
    }
    check_set(system, &GridSet::empty(*partition))?;
    for s in samples {
        system.check_point(s)?;
    }
    let burn_in = opts.burn_in.unwrap_or(n / 10);
    if burn_in >= n {
        return Err(Error::InvalidArgument("burn_in must be below n".into()));
    }
    let tol = opts
        .tolerance
        .unwrap_or(0.01 * partition.min_side() / partition.cell_count() as f64);
    let len = (n - burn_in) as f64;
    let m = samples.len();

    let segments: Vec<Option<Vec<(Point, usize)>>> =
        samples.par_iter().map(|x| orbit_runs(system, x, burn_in, n)).collect();

    let cells = partition.cell_count();
    let mut freq = vec![0usize; cells];
    // state per run: nearest cell of the candidate and distance to it
    let mut nearest: Vec<Vec<(usize, f64)>> = Vec::with_capacity(m);
    let mut owner: Vec<Vec<(u32, u32)>> = vec![Vec::new(); cells];
    for (s, seg) in segments.iter().enumerate() {
        let mut st = Vec::new();
        if let Some(runs) = seg {
            for (r, (p, c)) in runs.iter().enumerate() {
                let cell = partition.cell_index(p);
                freq[cell] += c;
                owner[cell].push((s as u32, r as u32));
                st.push((cell, 0.0));
            }
        }
        nearest.push(st);
    }
    let mut k = GridSet::from_fn(*partition, |c| freq[c] > 0);
    let mut sums = vec![0.0; m];
    let attracted = |s: usize, sum: f64| segments[s].is_some() && sum / len < tol;
    let mut failures = (0..m).filter(|&s| !attracted(s, 0.0)).count();
    let allowed = ((1.0 - alpha) * m as f64 + 1e-9).floor() as usize;
    let alpha_attained = failures <= allowed && !k.is_empty();

    if alpha_attained {
        loop {
            let mut changed = false;
            let mut order: Vec<usize> = k.cells().to_vec();
            order.sort_by_key(|&c| (freq[c], c));
            for c in order {
                if k.len() == 1 {
                    break;
                }
                let trial = k.without(c);
                let mut updates: Vec<(u32, u32, usize, f64)> = Vec::with_capacity(owner[c].len());
                let mut delta: std::collections::HashMap<usize, f64> = std::collections::HashMap::new();
                let mut new_failures = failures;
                let mut rejected = false;
                for &(s, r) in &owner[c] {
                    let (s, r) = (s as usize, r as usize);
                    let runs = segments[s].as_ref().expect("owned runs exist");
                    let (p, cnt) = &runs[r];
                    let (cell, d) = trial.nearest(p).expect("trial is nonempty");
                    let old = nearest[s][r].1;
                    let dd = delta.entry(s).or_insert(0.0);
                    let before = attracted(s, sums[s] + *dd);
                    *dd += (d - old) * *cnt as f64;
                    if before && !attracted(s, sums[s] + *dd) {
                        new_failures += 1;
                        if new_failures > allowed {
                            rejected = true;
                            break;
                        }
                    }
                    updates.push((s as u32, r as u32, cell, d));
                }
                if rejected {
                    continue;
                }
                for (s, dd) in delta {
                    sums[s] += dd;
                }
                for (s, r, cell, d) in updates {
                    nearest[s as usize][r as usize] = (cell, d);
                    owner[cell].push((s, r));
                }
                owner[c].clear();
                failures = new_failures;
                k = trial;
                changed = true;
            }
            if !changed {
                break;
            }
        }
    }

    let stat = (0..m).filter(|&s| attracted(s, sums[s])).count() as f64 / m as f64;
    let topo = (0..m)
        .filter(|&s| segments[s].is_some() && nearest[s].iter().all(|&(_, d)| d < tol))
        .count() as f64
        / m as f64;
    Ok(AttractorReport {
        candidate: k,
        topological_basin_fraction: topo,
        statistical_basin_fraction: stat,
        alpha,
        alpha_attained,
        n,
        burn_in,
        tolerance: tol,
        resolution: partition.cells_per_axis,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SrbCluster {
    /// Medoid of the cluster's empirical measures.
    pub representative: Measure,
    /// Fraction of all samples whose empirical measure joined the cluster.
    pub basin_fraction: f64,
    pub members: usize,
    pub invariance_residual: f64,
    /// `4/n`, the bound the residual is checked against.
    pub residual_bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SRBLikeReport {
    /// Sorted by decreasing basin fraction.
    pub clusters: Vec<SrbCluster>,
    pub epsilon: f64,
    /// Cells carrying at least `0.1/cell_count` of the orbit of some
    /// representative after the first `n/10` iterates.
    pub support_cells: GridSet,
    pub escaped_fraction: f64,
    pub n: usize,
}

/// Clusters the empirical measures `σ_{n,x}` of the samples under the weak*
/// metric (single linkage at `eps`). Every cluster is a candidate
/// SRB-like measure whose ε-basin has positive sampled volume.
pub fn srb_like_estimate(
    system: &SystemSpec,
    samples: &[Point],
    n: usize,
    family: &TestFunctionFamily,
    n_terms: usize,
    eps: f64,
    partition: &Partition,
) -> Result<SRBLikeReport> {
    if !(eps > 0.0) || n == 0 || n_terms == 0 {
        return Err(Error::InvalidArgument("need eps > 0, n ≥ 1 and n_terms ≥ 1".into()));
    }
    if samples.is_empty() {
        return Err(Error::InvalidArgument("no samples".into()));
    }
    check_set(system, &GridSet::empty(*partition))?;
    for s in samples {
        system.check_point(s)?;
    }
    let moments: Vec<Option<Vec<f64>>> = samples
        .par_iter()
        .map(|x| {
            let runs = orbit_runs(system, x, 0, n)?;
            let mut acc = MomentAccumulator::new(family, n_terms);
            for (p, c) in &runs {
                acc.push_weighted(p, *c);
            }
            Some(acc.moments())
        })
        .collect();
    let live: Vec<usize> = (0..samples.len()).filter(|&i| moments[i].is_some()).collect();
    let mo: Vec<&Vec<f64>> = live.iter().map(|&i| moments[i].as_ref().expect("live")).collect();
    let dist: Vec<Vec<f64>> = (0..live.len())
        .into_par_iter()
        .map(|i| (0..live.len()).map(|j| weak_star_from_moments(mo[i], mo[j])).collect())
        .collect();
    let labels = single_linkage(&dist, eps);
    let count = labels.iter().max().map_or(0, |l| l + 1);
    let mut clusters = Vec::with_capacity(count);
    let mut support = vec![false; partition.cell_count()];
    let threshold = 0.1 / partition.cell_count() as f64;
    for c in 0..count {
        let members: Vec<usize> = (0..live.len()).filter(|&i| labels[i] == c).collect();
        let medoid = *members
            .iter()
            .min_by(|&&a, &&b| {
                let sa: f64 = members.iter().map(|&j| dist[a][j]).sum();
                let sb: f64 = members.iter().map(|&j| dist[b][j]).sum();
                sa.total_cmp(&sb)
            })
            .expect("clusters are nonempty");
        let orbit = system.orbit(&samples[live[medoid]], n)?;
        let hist = HistogramMeasure::from_points(*partition, &orbit.points[n / 10..])?;
        for (cell, w) in hist.weights().iter().enumerate() {
            if *w >= threshold {
                support[cell] = true;
            }
        }
        let rep = Measure::empirical(&system.space, orbit.points)?;
        let residual = invariance_residual(system, &rep, family, n_terms)?;
        clusters.push(SrbCluster {
            representative: rep,
            basin_fraction: members.len() as f64 / samples.len() as f64,
            members: members.len(),
            invariance_residual: residual,
            residual_bound: 4.0 / n as f64,
        });
    }
    clusters.sort_by(|a, b| b.members.cmp(&a.members));
    Ok(SRBLikeReport {
        clusters,
        epsilon: eps,
        support_cells: GridSet::from_fn(*partition, |c| support[c]),
        escaped_fraction: 1.0 - live.len() as f64 / samples.len() as f64,
        n,
    })
}

/// Jaccard overlap of the SRB-like support cells and an attractor
/// candidate on the same partition.
pub fn support_attractor_correspondence(report: &SRBLikeReport, attractor: &AttractorReport) -> Result<f64> {
    if report.support_cells.partition() != attractor.candidate.partition() {
        return Err(Error::SpaceMismatch("reports use different partitions".into()));
    }
    Ok(report.support_cells.jaccard(&attractor.candidate))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityProbe {
    pub delta: f64,
    pub samples: usize,
    /// `max dist(fʲx, K)` over samples within `delta` of `K` and `j < n`;
    /// infinite if an orbit escapes.
    pub max_excursion: f64,
    /// `max_excursion < eps`.
    pub stable: bool,
}

/// Deterministic grid of about `count` points within `delta` of `K`.
pub fn neighbourhood_samples(k: &GridSet, delta: f64, count: usize) -> Vec<Point> {
    let part = k.partition();
    let space = part.space;
    let dim = space.dim();
    if k.is_empty() || count == 0 {
        return Vec::new();
    }
    let per_cell = count.div_ceil(k.len()).max(1);
    let m = ((per_cell as f64).powf(1.0 / dim as f64).ceil() as usize).max(2);
    let mut out = Vec::new();
    for &c in k.cells() {
        let (lo, hi) = part.cell_box(c);
        let total = m.pow(dim as u32);
        for idx in 0..total {
            let mut a = [0.0; 3];
            let mut rem = idx;
            for d in 0..dim {
                let i = rem % m;
                rem /= m;
                let (l, h) = (lo[d] - delta, hi[d] + delta);
                a[d] = l + (h - l) * i as f64 / (m - 1) as f64;
            }
            let raw: Vec<f64> = space.from_ambient(a).coords().to_vec();
            let p = if space.is_periodic() {
                match crate::phase_space::wrap(&space, &raw) {
                    Ok(p) => p.to_float(),
                    Err(_) => continue,
                }
            } else {
                Point::float(&raw)
            };
            if space.contains(&p) && k.distance(&p) <= delta {
                out.push(p);
            }
        }
    }
    out
}

/// Largest distance from `K` reached within `n` iterates by orbits starting
/// within each `δ` of `K`.
pub fn orbital_stability_probe(
    system: &SystemSpec,
    k: &GridSet,
    deltas: &[f64],
    eps: f64,
    samples_per_delta: usize,
    n: usize,
) -> Result<Vec<StabilityProbe>> {
    check_set(system, k)?;
    if k.is_empty() {
        return Err(Error::InvalidArgument("K must be nonempty".into()));
    }
    if deltas.iter().any(|d| !(*d >= 0.0)) || !(eps > 0.0) {
        return Err(Error::InvalidArgument("deltas must be nonnegative and eps positive".into()));
    }
    deltas
        .iter()
        .map(|&delta| {
            let samples = neighbourhood_samples(k, delta, samples_per_delta);
            let max = samples
                .par_iter()
                .map(|x| match orbit_runs(system, x, 0, n.max(1)) {
                    Some(runs) => runs.iter().map(|(p, _)| k.distance(p)).fold(0.0, f64::max),
                    None => f64::INFINITY,
                })
                .reduce(|| 0.0, f64::max);
            Ok(StabilityProbe { delta, samples: samples.len(), max_excursion: max, stable: max < eps })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{default_family, weak_star_distance};
    use crate::systems::Params;

    fn sys(name: &str) -> SystemSpec {
        SystemSpec::build(name, &Params::new()).unwrap()
    }

    #[test]
    fn grid_sample_counts() {
        assert_eq!(grid_samples(&PhaseSpace::disc(1.5), 1000).len(), 1000);
        assert_eq!(grid_samples(&PhaseSpace::torus2(), 1024).len(), 1024);
        let c = grid_samples(&PhaseSpace::circle(), 256);
        assert!((c[0].coords()[0] - 0.5 / 256.0).abs() < 1e-15);
    }

    #[test]
    fn runs_compress_fixed_points() {
        let ns = sys("north_south");
        let r = orbit_runs(&ns, &Point::float(&[0.5]), 0, 1000).unwrap();
        assert_eq!(r, vec![(Point::float(&[0.5]), 1000)]);
        let r = orbit_runs(&ns, &Point::float(&[0.3]), 100, 1000).unwrap();
        assert_eq!(r.iter().map(|x| x.1).sum::<usize>(), 900);
        let rot = sys("rotation");
        let r = orbit_runs(&rot, &Point::float(&[0.3]), 10, 20).unwrap();
        assert_eq!(r.len(), 10);
    }

    #[test]
    fn whole_space_basins() {
        let cat = sys("cat_map").exact().unwrap();
        let part = Partition::new(cat.space, 8).unwrap();
        let whole = GridSet::whole(part);
        let s = grid_samples(&cat.space, 64);
        assert_eq!(topological_basin_fraction(&cat, &whole, &s, 100, 10, 0.2).unwrap(), 1.0);
        assert_eq!(statistical_basin_fraction(&cat, &whole, &s, 100, 1e-9).unwrap(), 1.0);
        let missing = whole.without(0);
        assert_eq!(statistical_basin_fraction(&cat, &missing, &s, 2000, 1e-6).unwrap(), 0.0);
    }

    #[test]
    fn disc_rot_topological_attraction() {
        let d = sys("disc_rot");
        let part = Partition::new(d.space, 64).unwrap();
        let ring = cells_meeting_circle(&part, 1.0);
        let s = grid_samples(&d.space, 400);
        let f = topological_basin_fraction(&d, &ring, &s, 2000, 200, 2.0 * part.cell_diameter()).unwrap();
        // only the fixed centre stays away
        assert!(f >= 1.0 - 1.0 / 400.0, "{f}");
    }

    #[test]
    fn disc_b_statistical_not_topological_without_burn_in() {
        let d = sys("disc_b");
        let part = Partition::new(d.space, 64).unwrap();
        let k = GridSet::covering(part, &[Point::float(&[1.0, 0.0])]);
        let s = grid_samples(&d.space, 200);
        let stat = statistical_basin_fraction(&d, &k, &s, 100_000, 0.02).unwrap();
        assert!(stat >= 0.99, "{stat}");
        let topo = topological_basin_fraction(&d, &k, &s, 100_000, 0, 1.0 / 6.0).unwrap();
        assert!(topo < 0.2, "{topo}");
    }

    #[test]
    fn visit_frequency_examples() {
        let d = sys("disc_b");
        let part = Partition::new(d.space, 64).unwrap();
        let k = GridSet::covering(part, &[Point::float(&[1.0, 0.0])]);
        let r = visit_frequency_equivalence(&d, &k, &Point::float(&[0.3, -0.2]), 100_000, &[0.01, 0.05, 0.2], DEFAULT_MARGIN)
            .unwrap();
        assert!(r.frequencies.iter().all(|&f| f > 0.999));
        assert!(r.frequency_attracted && r.cesaro_attracted && r.consistent);

        let fixed = visit_frequency_equivalence(&d, &k, &Point::float(&[1.0, 0.0]), 1000, &[0.01], DEFAULT_MARGIN).unwrap();
        assert_eq!(fixed.frequencies, vec![1.0]);

        let ns = sys("north_south");
        let part = Partition::new(ns.space, 256).unwrap();
        let ks = GridSet::covering(part, &[Point::float(&[0.5])]);
        let r = visit_frequency_equivalence(&ns, &ks, &Point::float(&[0.0]), 1000, &[0.01, 0.1], DEFAULT_MARGIN).unwrap();
        assert_eq!(r.frequencies, vec![0.0, 0.0]);
        assert!(!r.frequency_attracted && !r.cesaro_attracted && r.agree());
    }

    #[test]
    fn north_south_minimal_attractor() {
        let ns = sys("north_south");
        let part = Partition::new(ns.space, 256).unwrap();
        let s = grid_samples(&ns.space, 256);
        let rep = minimal_statistical_attractor(&ns, &s, 10_000, 1.0, &part).unwrap();
        let cell = part.cell_index(&Point::float(&[0.5]));
        assert_eq!(rep.candidate.cells(), &[cell]);
        assert!(rep.alpha_attained);
        assert_eq!(rep.statistical_basin_fraction, 1.0);
    }

    #[test]
    fn cat_map_keeps_every_cell() {
        let cat = sys("cat_map").exact().unwrap();
        let part = Partition::new(cat.space, 8).unwrap();
        let s = grid_samples(&cat.space, 64);
        let rep = minimal_statistical_attractor(&cat, &s, 20_000, 1.0, &part).unwrap();
        assert_eq!(rep.candidate.len(), 64);
    }

    #[test]
    fn disc_b_minimal_attractor_and_srb() {
        let d = sys("disc_b");
        let part = Partition::new(d.space, 64).unwrap();
        let s = grid_samples(&d.space, 256);
        let rep = minimal_statistical_attractor(&d, &s, 10_000, 1.0, &part).unwrap();
        assert_eq!(rep.candidate.len(), 1);
        assert!(rep.candidate.contains_point(&Point::float(&[1.0, 0.0])) || rep.candidate.distance(&Point::float(&[1.0, 0.0])) == 0.0);
        let f = default_family(&d.space);
        let srb = srb_like_estimate(&d, &s, 10_000, &f, 64, 0.05, &part).unwrap();
        assert_eq!(srb.clusters.len(), 1);
        assert!(srb.clusters[0].basin_fraction >= 0.99);
        assert!(srb.clusters[0].invariance_residual <= srb.clusters[0].residual_bound);
        let one = Measure::dirac(&d.space, Point::float(&[1.0, 0.0]));
        assert!(weak_star_distance(&srb.clusters[0].representative, &one, &f, 64).unwrap() < 0.05);
        assert_eq!(support_attractor_correspondence(&srb, &rep).unwrap(), 1.0);
    }

    #[test]
    fn stability_probes() {
        let a = sys("disc_a");
        let part = Partition::new(a.space, 64).unwrap();
        let circle = cells_meeting_circle(&part, 1.0);
        let probe = orbital_stability_probe(&a, &circle, &[0.01, 0.05], 0.2, 2000, 500).unwrap();
        for p in &probe {
            assert!(p.samples > 0);
            assert!(p.max_excursion <= p.delta + part.cell_diameter(), "{p:?}");
        }
        let b = sys("disc_b");
        let k = GridSet::covering(part, &[Point::float(&[1.0, 0.0])]);
        let probe = orbital_stability_probe(&b, &k, &[1e-3], 1.0 / 6.0, 400, 1000).unwrap();
        assert!(probe[0].max_excursion > 1.0 / 6.0 && !probe[0].stable);
        let ns = sys("north_south");
        let pn = Partition::new(ns.space, 256).unwrap();
        let ks = GridSet::covering(pn, &[Point::float(&[0.5])]);
        let probe = orbital_stability_probe(&ns, &ks, &[0.0], 0.01, 10, 100).unwrap();
        assert_eq!(probe[0].max_excursion, 0.0);
    }
}
