//! Birkhoff averages, sojourn frequencies, recurrence and the set `pω(x)` of
//! limits of empirical measures.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::{weak_star_from_moments, Measure, MomentAccumulator, TestFunctionFamily};
use crate::phase_space::{GridSet, Point};
use crate::systems::SystemSpec;

/// Number of geometric checkpoints used by default.
pub const DEFAULT_CHECKPOINTS: u32 = 8;

/// Default clustering threshold for empirical measures.
pub const DEFAULT_CLUSTER_EPS: f64 = 0.05;

/// `n_k = ⌈n·2^{k−K}⌉` for `k = 1..=K`, without duplicates.
pub fn geometric_checkpoints(n: usize, k: u32) -> Vec<usize> {
    let mut out: Vec<usize> = (1..=k)
        .map(|j| ((n as f64) * 2f64.powi(j as i32 - k as i32)).ceil().max(1.0) as usize)
        .collect();
    out.dedup();
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BirkhoffSeries {
    pub checkpoints: Vec<usize>,
    /// `a_n = (1/n) Σ_{j<n} ψ(fʲx)` at each checkpoint.
    pub values: Vec<f64>,
    /// Set when the orbit left the domain; the series stops there.
    pub escaped_at: Option<usize>,
}

impl BirkhoffSeries {
    /// Last recorded average.
    pub fn last(&self) -> Option<f64> {
        self.values.last().copied()
    }

    /// `n,value` rows with a header line.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("n,value\n");
        for (n, v) in self.checkpoints.iter().zip(&self.values) {
            s.push_str(&format!("{n},{v}\n"));
        }
        s
    }
}

fn checked_checkpoints(n: usize, checkpoints: Option<&[usize]>) -> Result<Vec<usize>> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    let mut cps = match checkpoints {
        None => geometric_checkpoints(n, DEFAULT_CHECKPOINTS),
        Some(c) => c.to_vec(),
    };
    if cps.windows(2).any(|w| w[0] >= w[1]) || cps.first() == Some(&0) {
        return Err(Error::InvalidArgument("checkpoints must be positive and increasing".into()));
    }
    if cps.last().is_some_and(|&l| l > n) {
        return Err(Error::InvalidArgument("checkpoints may not exceed n".into()));
    }
    if cps.last() != Some(&n) {
        cps.push(n);
    }
    Ok(cps)
}

/// Partial Birkhoff averages of `ψ` along the orbit of `x`.
pub fn birkhoff_average(
    system: &SystemSpec,
    x: &Point,
    psi: impl Fn(&Point) -> f64,
    n: usize,
    checkpoints: Option<&[usize]>,
) -> Result<BirkhoffSeries> {
    system.check_point(x)?;
    let cps = checked_checkpoints(n, checkpoints)?;
    let mut values = Vec::with_capacity(cps.len());
    let mut recorded = Vec::with_capacity(cps.len());
    let mut sum = 0.0;
    let mut next = 0;
    let mut escaped_at = None;
    let mut p = *x;
    for j in 1..=n {
        sum += psi(&p);
        if j == cps[next] {
            values.push(sum / j as f64);
            recorded.push(j);
            next += 1;
        }
        if j == n {
            break;
        }
        match system.forward(&p) {
            Some(q) => p = q,
            None => {
                escaped_at = Some(j);
                break;
            }
        }
    }
    Ok(BirkhoffSeries { checkpoints: recorded, values, escaped_at })
}

/// `#{0 ≤ j < m : fʲx ∈ A}` and `m`, where `m = n` unless the orbit escapes
/// earlier.
pub fn sojourn_count(system: &SystemSpec, x: &Point, cells: &GridSet, n: usize) -> Result<(usize, usize)> {
    system.check_point(x)?;
    if cells.partition().space.kind != system.space.kind {
        return Err(Error::SpaceMismatch("cell set is on another space".into()));
    }
    let mut hits = 0;
    let mut total = 0;
    for p in system.trajectory(*x).take(n) {
        total += 1;
        if cells.contains_point(&p) {
            hits += 1;
        }
    }
    Ok((hits, total))
}

/// Fraction of the first `n` iterates that lie in `A` (`σ_{n,x}(A)`).
pub fn sojourn_frequency(system: &SystemSpec, x: &Point, cells: &GridSet, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    let (hits, total) = sojourn_count(system, x, cells, n)?;
    Ok(hits as f64 / total as f64)
}

/// Fraction of `samples` (all in `A`) whose orbit returns to `A` at least
/// `r` times among `f¹x … fⁿx`.
pub fn recurrence_fraction(
    system: &SystemSpec,
    cells: &GridSet,
    samples: &[Point],
    n: usize,
    r: usize,
) -> Result<f64> {
    if r == 0 {
        return Err(Error::InvalidArgument("revisit threshold must be at least 1".into()));
    }
    if samples.is_empty() {
        return Err(Error::InvalidArgument("no samples".into()));
    }
    for s in samples {
        system.check_point(s)?;
        if !cells.contains_point(s) {
            return Err(Error::InvalidArgument(format!("sample {:?} is not in A", s.coords())));
        }
    }
    let returned = samples
        .par_iter()
        .filter(|s| {
            system
                .trajectory(**s)
                .skip(1)
                .take(n)
                .filter(|p| cells.contains_point(p))
                .take(r)
                .count()
                >= r
        })
        .count();
    Ok(returned as f64 / samples.len() as f64)
}

/// Cluster labels (numbered by first appearance) of single-linkage
/// clustering at threshold `eps`.
pub fn single_linkage(dist: &[Vec<f64>], eps: f64) -> Vec<usize> {
    let n = dist.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    for i in 0..n {
        for j in 0..i {
            if dist[i][j] <= eps {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut label = vec![usize::MAX; n];
    let mut out = vec![0; n];
    let mut next = 0;
    for i in 0..n {
        let root = find(&mut parent, i);
        if label[root] == usize::MAX {
            label[root] = next;
            next += 1;
        }
        out[i] = label[root];
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct POmegaEstimate {
    /// One empirical measure per cluster: its member with the most samples.
    pub cluster_measures: Vec<Measure>,
    /// Weak* distances between the empirical measures at all checkpoints.
    pub pairwise_distances: Vec<Vec<f64>>,
    pub n_checkpoints: Vec<usize>,
    /// Cluster label of each checkpoint.
    pub labels: Vec<usize>,
}

/// Clusters the empirical measures `σ_{n_k,x}` of one orbit.
pub fn p_omega_estimate(
    system: &SystemSpec,
    x: &Point,
    checkpoints: &[usize],
    family: &TestFunctionFamily,
    n_terms: usize,
    cluster_eps: f64,
) -> Result<POmegaEstimate> {
    system.check_point(x)?;
    if checkpoints.len() < 2 {
        return Err(Error::InvalidArgument("at least two checkpoints are needed".into()));
    }
    if checkpoints.windows(2).any(|w| w[0] >= w[1]) || checkpoints[0] == 0 {
        return Err(Error::InvalidArgument("checkpoints must be positive and increasing".into()));
    }
    let n = *checkpoints.last().expect("nonempty");
    let orbit = system.orbit(x, n)?;
    if let Some(at) = orbit.escaped_at {
        return Err(Error::Escaped(at));
    }
    let mut acc = MomentAccumulator::new(family, n_terms);
    let mut moments = Vec::with_capacity(checkpoints.len());
    let mut next = 0;
    for (j, p) in orbit.points.iter().enumerate() {
        acc.push(p);
        if j + 1 == checkpoints[next] {
            moments.push(acc.moments());
            next += 1;
        }
    }
    let k = checkpoints.len();
    let dist: Vec<Vec<f64>> = (0..k)
        .map(|i| (0..k).map(|j| weak_star_from_moments(&moments[i], &moments[j])).collect())
        .collect();
    let labels = single_linkage(&dist, cluster_eps);
    let clusters = labels.iter().max().map_or(0, |m| m + 1);
    let mut cluster_measures = Vec::with_capacity(clusters);
    for c in 0..clusters {
        let last = (0..k).rev().find(|&i| labels[i] == c).expect("every label is used");
        cluster_measures
            .push(Measure::empirical(&system.space, orbit.points[..checkpoints[last]].to_vec())?);
    }
    Ok(POmegaEstimate {
        cluster_measures,
        pairwise_distances: dist,
        n_checkpoints: checkpoints.to_vec(),
        labels,
    })
}
