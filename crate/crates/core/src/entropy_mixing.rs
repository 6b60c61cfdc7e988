//! Correlation decay, mixing and ergodicity verdicts, partition entropy, the
//! Pesin residual and bounded distortion for expanding circle maps.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lyapunov::{scalar_exponent, spectrum};
use crate::phase_space::{GridSet, Partition, Point};
use crate::systems::{MapKind, SystemSpec};

/// Default tolerance of [`mixing_verdict`].
pub const DEFAULT_MIXING_TOL: f64 = 0.02;

/// Minimum average number of samples per occupied cylinder.
pub const MIN_SAMPLES_PER_CYLINDER: f64 = 30.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelationSeries {
    /// `c_n = μ̂(f⁻ⁿA ∩ B)` for `n = 0..=n_max`.
    pub values: Vec<f64>,
    /// `μ̂(A)·μ̂(B)`.
    pub target: f64,
    /// `cesaro[n]` is the mean of `values[0..=n]`.
    pub cesaro: Vec<f64>,
}

impl CorrelationSeries {
    pub fn n_max(&self) -> usize {
        self.values.len().saturating_sub(1)
    }

    /// `n,value` rows of `c_n`.
    pub fn to_csv(&self) -> String {
        series_csv(self.values.iter().copied().enumerate())
    }

    /// `n,value` rows of the Cesàro means.
    pub fn cesaro_csv(&self) -> String {
        series_csv(self.cesaro.iter().copied().enumerate())
    }
}

fn series_csv(rows: impl Iterator<Item = (usize, f64)>) -> String {
    let mut s = String::from("n,value\n");
    for (n, v) in rows {
        s.push_str(&format!("{n},{v}\n"));
    }
    s
}

fn same_space(system: &SystemSpec, partition: &Partition) -> Result<()> {
    if partition.space.kind != system.space.kind {
        return Err(Error::SpaceMismatch(format!(
            "partition is on {}, system `{}` on {}",
            partition.space.kind, system.name, system.space.kind
        )));
    }
    Ok(())
}

/// Estimates `μ̂(f⁻ⁿA ∩ B)` as the fraction of samples `x ∈ B` with
/// `fⁿx ∈ A`. Escaped orbits count as outside `A`.
pub fn correlation_series(
    system: &SystemSpec,
    a: &GridSet,
    b: &GridSet,
    samples: &[Point],
    n_max: usize,
) -> Result<CorrelationSeries> {
    same_space(system, a.partition())?;
    same_space(system, b.partition())?;
    if samples.is_empty() {
        return Err(Error::InvalidArgument("no samples".into()));
    }
    for x in samples {
        system.check_point(x)?;
    }
    let zero = || (vec![0usize; n_max + 1], 0usize, 0usize);
    let (hits, in_a, in_b) = samples
        .par_iter()
        .fold(zero, |(mut hits, mut in_a, mut in_b), x| {
            let x_in_b = b.contains_point(x);
            in_a += a.contains_point(x) as usize;
            in_b += x_in_b as usize;
            if x_in_b {
                for (n, p) in system.trajectory(*x).take(n_max + 1).enumerate() {
                    if a.contains_point(&p) {
                        hits[n] += 1;
                    }
                }
            }
            (hits, in_a, in_b)
        })
        .reduce(zero, |(mut h1, a1, b1), (h2, a2, b2)| {
            for (u, v) in h1.iter_mut().zip(h2) {
                *u += v;
            }
            (h1, a1 + a2, b1 + b2)
        });
    let total = samples.len() as f64;
    let values: Vec<f64> = hits.iter().map(|&h| h as f64 / total).collect();
    let mut cesaro = Vec::with_capacity(values.len());
    let mut sum = 0.0;
    for (n, v) in values.iter().enumerate() {
        sum += v;
        cesaro.push(sum / (n + 1) as f64);
    }
    Ok(CorrelationSeries { values, target: (in_a as f64 / total) * (in_b as f64 / total), cesaro })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MixingVerdict {
    MixingConsistent,
    ErgodicOnly,
    Neither,
}

/// Last quarter of the series, at least one term.
pub fn default_window(series: &CorrelationSeries) -> usize {
    series.values.len().div_ceil(4).max(1)
}

/// Mixing-consistent when every `c_n` in the final `window` terms is within
/// `tol` of the target; ergodic-only when only the Cesàro means are.
pub fn mixing_verdict(series: &CorrelationSeries, tol: f64, window: usize) -> MixingVerdict {
    let len = series.values.len();
    let from = len.saturating_sub(window.max(1));
    let close = |v: &[f64]| v[from..].iter().all(|c| (c - series.target).abs() < tol);
    if close(&series.values) {
        MixingVerdict::MixingConsistent
    } else if close(&series.cesaro) {
        MixingVerdict::ErgodicOnly
    } else {
        MixingVerdict::Neither
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyEstimate {
    /// `H_n` for `n = 1..=n_max`, in nats.
    pub h: Vec<f64>,
    /// Occupied `n`-cylinders for `n = 1..=n_max`.
    pub occupied: Vec<usize>,
    /// `H_r − H_{r−1}` with `r = n_reliable` and `H_0 = 0`.
    pub slope: f64,
    pub n_reliable: usize,
    pub warning: Option<String>,
}

impl EntropyEstimate {
    /// `n,value` rows of `H_n`.
    pub fn to_csv(&self) -> String {
        series_csv(self.h.iter().copied().enumerate().map(|(i, v)| (i + 1, v)))
    }
}

/// Entropies of the itinerary partitions `𝓟 ∨ f⁻¹𝓟 ∨ … ∨ f^{−(n−1)}𝓟`
/// estimated from cylinder frequencies of `samples`. Samples whose orbit
/// escapes drop out from that length on.
pub fn entropy_estimate(
    system: &SystemSpec,
    samples: &[Point],
    partition: &Partition,
    n_max: usize,
) -> Result<EntropyEstimate> {
    same_space(system, partition)?;
    if n_max == 0 {
        return Err(Error::InvalidArgument("n_max must be at least 1".into()));
    }
    for x in samples {
        system.check_point(x)?;
    }
    let mut current: Vec<Option<Point>> = samples.iter().map(|x| Some(*x)).collect();
    let mut ids = vec![0u32; samples.len()];
    let mut h = Vec::with_capacity(n_max);
    let mut occupied = Vec::with_capacity(n_max);
    let mut alive = Vec::with_capacity(n_max);
    for _ in 0..n_max {
        let cells: Vec<Option<u32>> =
            current.par_iter().map(|p| p.map(|p| partition.cell_index(&p) as u32)).collect();
        current.par_iter_mut().for_each(|p| *p = p.and_then(|q| system.forward(&q)));
        let mut intern: HashMap<(u32, u32), u32> = HashMap::new();
        let mut counts: Vec<usize> = Vec::new();
        for (cell, id) in cells.iter().zip(ids.iter_mut()) {
            let Some(cell) = *cell else { continue };
            let next = intern.len() as u32;
            let new_id = *intern.entry((*id, cell)).or_insert(next);
            if new_id as usize == counts.len() {
                counts.push(0);
            }
            counts[new_id as usize] += 1;
            *id = new_id;
        }
        let total: usize = counts.iter().sum();
        let hn = if total == 0 {
            0.0
        } else {
            let t = total as f64;
            -counts.iter().map(|&c| c as f64 / t).map(|p| p * p.ln()).sum::<f64>()
        };
        h.push(hn);
        occupied.push(counts.len());
        alive.push(total);
    }

    let n_reliable = (0..n_max)
        .take_while(|&i| occupied[i] > 0 && alive[i] as f64 / occupied[i] as f64 >= MIN_SAMPLES_PER_CYLINDER)
        .count();
    let (slope, warning) = match n_reliable {
        0 => (
            0.0,
            Some(format!(
                "{} samples give fewer than {MIN_SAMPLES_PER_CYLINDER} per occupied cylinder at n = 1",
                samples.len()
            )),
        ),
        1 => (h[0], None),
        r => (h[r - 1] - h[r - 2], None),
    };
    Ok(EntropyEstimate { h, occupied, slope, n_reliable, warning })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PesinResidual {
    pub entropy: EntropyEstimate,
    /// Sample mean of the sum of positive Lyapunov exponents.
    pub positive_exponent_sum: f64,
    /// `slope − Σχ⁺`.
    pub residual: f64,
}

/// Orbit length used for the exponents in [`pesin_residual`].
pub const PESIN_LYAPUNOV_STEPS: usize = 2000;

const PESIN_LYAPUNOV_SAMPLES: usize = 64;

/// Entropy slope minus the averaged sum of positive Lyapunov exponents.
/// Exponents are taken on at most 64 evenly spaced samples.
pub fn pesin_residual(
    system: &SystemSpec,
    samples: &[Point],
    partition: &Partition,
    n_max: usize,
) -> Result<PesinResidual> {
    if !system.has_jacobian() {
        return Err(Error::MissingCapability(system.name.clone(), "derivative"));
    }
    if samples.is_empty() {
        return Err(Error::InvalidArgument("no samples".into()));
    }
    let entropy = entropy_estimate(system, samples, partition, n_max)?;
    let step = samples.len().div_ceil(PESIN_LYAPUNOV_SAMPLES);
    let picks: Vec<Point> = samples.iter().step_by(step).map(|p| p.to_float()).collect();
    let sums = picks
        .par_iter()
        .map(|x| -> Result<f64> {
            let exps = if system.dim() == 1 {
                vec![scalar_exponent(system, x, PESIN_LYAPUNOV_STEPS)?]
            } else {
                spectrum(system, x, PESIN_LYAPUNOV_STEPS)?.exponents
            };
            Ok(exps.iter().filter(|&&e| e > 0.0).sum())
        })
        .collect::<Result<Vec<f64>>>()?;
    let positive_exponent_sum = sums.iter().sum::<f64>() / sums.len() as f64;
    let residual = entropy.slope - positive_exponent_sum;
    Ok(PesinResidual { entropy, positive_exponent_sum, residual })
}

fn branch(system: &SystemSpec, v: f64) -> Result<usize> {
    match system.map {
        MapKind::Identity | MapKind::Rotation { .. } => Ok(0),
        MapKind::Tent => Ok(usize::from(v > 0.5)),
        MapKind::Expanding { k, eps } => {
            let lift = k as f64 * v + eps * (std::f64::consts::TAU * v).sin() / std::f64::consts::TAU;
            Ok((lift.floor().max(0.0) as usize).min(k as usize - 1))
        }
        _ => Err(Error::UnsupportedSpace { op: "distortion_ratio", space: system.space.kind.to_string() }),
    }
}

/// `Π_{j<n} |f′(fʲx)| / |f′(fʲy)|` for `x`, `y` in the same depth-`n`
/// branch cylinder of a one-dimensional map.
pub fn distortion_ratio(system: &SystemSpec, x: &Point, y: &Point, n: usize) -> Result<f64> {
    system.check_point(x)?;
    system.check_point(y)?;
    if system.dim() != 1 {
        return Err(Error::UnsupportedSpace { op: "distortion_ratio", space: system.space.kind.to_string() });
    }
    let (mut p, mut q) = (x.to_float(), y.to_float());
    let mut log_ratio = 0.0;
    for j in 0..n {
        if branch(system, p.coords()[0])? != branch(system, q.coords()[0])? {
            return Err(Error::DifferentCylinders(j));
        }
        let dp = system.jacobian(&p).ok_or_else(|| Error::MissingCapability(system.name.clone(), "derivative"))?;
        let dq = system.jacobian(&q).ok_or_else(|| Error::MissingCapability(system.name.clone(), "derivative"))?;
        log_ratio += dp[(0, 0)].abs().ln() - dq[(0, 0)].abs().ln();
        let (Some(np), Some(nq)) = (system.forward(&p), system.forward(&q)) else {
            return Err(Error::Escaped(j + 1));
        };
        p = np;
        q = nq;
    }
    Ok(log_ratio.exp())
}
