//! Lyapunov exponents: log-derivative averages in one dimension, the
//! discrete QR method in higher dimension, and uniform hyperbolicity checks.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::phase_space::Point;
use crate::systems::SystemSpec;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LyapunovSpectrum {
    /// Sorted descending, in nats per iterate.
    pub exponents: Vec<f64>,
    pub n_used: usize,
    /// Half-range of the partial estimates over the last 10% of iterates.
    pub convergence_halfwidth: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct QrOptions {
    pub reorth_every: usize,
    /// Iterates spent aligning the frame before averaging starts. `None`
    /// means `n/10`.
    pub transient: Option<usize>,
    /// Initial orthonormal frame; identity when `None`.
    pub initial_frame: Option<DMatrix<f64>>,
}

impl Default for QrOptions {
    fn default() -> Self {
        Self { reorth_every: 1, transient: None, initial_frame: None }
    }
}

fn nudge_off_breaks(system: &SystemSpec, p: Point) -> Point {
    if p.is_exact() {
        return p;
    }
    let v = p.coords()[0];
    for &b in system.break_points() {
        if (v - b).abs() <= f64::EPSILON * b.abs().max(f64::MIN_POSITIVE) {
            return Point::float(&[f64::from_bits(b.to_bits() + 1)]);
        }
    }
    p
}

/// `(1/n) Σ_{j<n} log|f′(fʲx)|` for one-dimensional systems. Orbit points
/// on a break point are moved one ulp to the right. A vanishing derivative
/// gives `−∞`.
pub fn scalar_exponent(system: &SystemSpec, x: &Point, n: usize) -> Result<f64> {
    system.check_point(x)?;
    if system.dim() != 1 {
        return Err(Error::UnsupportedSpace { op: "scalar_exponent", space: system.space.kind.to_string() });
    }
    if !system.has_jacobian() {
        return Err(Error::MissingCapability(system.name.clone(), "derivative"));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    let mut sum = 0.0;
    let mut p = *x;
    for j in 0..n {
        p = nudge_off_breaks(system, p);
        let d = system.jacobian(&p).ok_or(Error::Escaped(j))?[(0, 0)].abs();
        if d == 0.0 {
            return Ok(f64::NEG_INFINITY);
        }
        sum += d.ln();
        if j + 1 < n {
            p = system.forward(&p).ok_or(Error::Escaped(j + 1))?;
        }
    }
    Ok(sum / n as f64)
}

/// Lyapunov spectrum at `x` from `n` averaged QR steps with default options.
pub fn spectrum(system: &SystemSpec, x: &Point, n: usize) -> Result<LyapunovSpectrum> {
    spectrum_qr(system, x, n, &QrOptions::default())
}

/// Discrete QR method: an orthonormal frame is pushed through the Jacobians
/// and re-orthonormalised every `reorth_every` steps; the logs of the
/// diagonal of `R` are averaged over `n` iterates following the transient.
pub fn spectrum_qr(system: &SystemSpec, x: &Point, n: usize, opts: &QrOptions) -> Result<LyapunovSpectrum> {
    system.check_point(x)?;
    if !system.has_jacobian() {
        return Err(Error::MissingCapability(system.name.clone(), "Jacobian"));
    }
    if n == 0 || opts.reorth_every == 0 {
        return Err(Error::InvalidArgument("n and reorth_every must be at least 1".into()));
    }
    let d = system.dim();
    let transient = opts.transient.unwrap_or(n / 10);
    let mut q = match &opts.initial_frame {
        Some(f) if f.nrows() == d && f.ncols() == d => f.clone().qr().q(),
        Some(_) => return Err(Error::InvalidArgument(format!("initial frame must be {d}×{d}"))),
        None => DMatrix::identity(d, d),
    };
    let total = transient + n;
    let tail_start = transient + n - (n / 10).max(1);
    let mut sums = vec![0.0; d];
    let mut lo = vec![f64::INFINITY; d];
    let mut hi = vec![f64::NEG_INFINITY; d];
    let mut y = q.clone();
    let mut p = *x;
    for j in 0..total {
        if d == 1 {
            p = nudge_off_breaks(system, p);
        }
        let jac = system.jacobian(&p).ok_or(Error::Escaped(j))?;
        y = &jac * &y;
        let step = j + 1;
        if step % opts.reorth_every == 0 || step == total {
            let qr = y.clone().qr();
            let r = qr.r();
            for i in 0..d {
                let rii = r[(i, i)].abs();
                if rii == 0.0 || !rii.is_finite() {
                    return Err(Error::SingularJacobian(j));
                }
                if j >= transient {
                    sums[i] += rii.ln();
                }
            }
            q = qr.q();
            y = q.clone();
            if j >= tail_start {
                let used = (step - transient) as f64;
                for i in 0..d {
                    let est = sums[i] / used;
                    lo[i] = lo[i].min(est);
                    hi[i] = hi[i].max(est);
                }
            }
        } else if j + 1 == transient {
            // averaging has to start on a reorthonormalised frame
            let qr = y.clone().qr();
            q = qr.q();
            y = q.clone();
        }
        if step < total {
            p = system.forward(&p).ok_or(Error::Escaped(step))?;
        }
    }
    let mut pairs: Vec<(f64, f64)> = (0..d)
        .map(|i| {
            let hw = if hi[i].is_finite() { 0.5 * (hi[i] - lo[i]) } else { 0.0 };
            (sums[i] / n as f64, hw)
        })
        .collect();
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
    Ok(LyapunovSpectrum {
        exponents: pairs.iter().map(|p| p.0).collect(),
        n_used: n,
        convergence_halfwidth: pairs.iter().map(|p| p.1).collect(),
    })
}

/// `(1/n) Σ_{j<n} log|det Df(fʲx)|`, the sum of all exponents.
pub fn log_det_average(system: &SystemSpec, x: &Point, skip: usize, n: usize) -> Result<f64> {
    let mut p = *x;
    let mut sum = 0.0;
    for j in 0..skip + n {
        if j >= skip {
            sum += system.jacobian(&p).ok_or(Error::Escaped(j))?.determinant().abs().ln();
        }
        if j + 1 < skip + n {
            p = system.forward(&p).ok_or(Error::Escaped(j + 1))?;
        }
    }
    Ok(sum / n as f64)
}

/// Candidate stable and unstable directions at a point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Splitting {
    pub stable: Option<Vec<f64>>,
    pub unstable: Option<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HyperbolicityReport {
    pub pass: bool,
    pub c: f64,
    /// Smallest `λ` with `‖dfʲs‖ ≤ Cλʲ‖s‖` for all tested `j`.
    pub tightest_lambda: Option<f64>,
    /// Largest `σ` with `‖dfʲu‖ ≥ C⁻¹σʲ‖u‖` for all tested `j`.
    pub tightest_sigma: Option<f64>,
    /// Smallest constant `C` (doubling from the given one, capped) for
    /// which the requested rates hold.
    pub feasible_c: Option<f64>,
    pub splitting: Splitting,
}

const HYPERBOLICITY_TOL: f64 = 1e-6;
const C_CAP: f64 = 1024.0;

fn log_growth(system: &SystemSpec, x: &Point, v: &[f64], n: usize) -> Result<Vec<f64>> {
    let mut w = DVector::from_column_slice(v);
    let mut log_norm = 0.0;
    let base = w.norm();
    if base == 0.0 {
        return Err(Error::InvalidArgument("splitting vectors must be nonzero".into()));
    }
    w /= base;
    let mut out = Vec::with_capacity(n);
    let mut p = *x;
    for j in 0..n {
        let jac = system.jacobian(&p).ok_or(Error::Escaped(j))?;
        w = jac * w;
        let s = w.norm();
        if s == 0.0 {
            return Err(Error::SingularJacobian(j));
        }
        log_norm += s.ln();
        w /= s;
        out.push(log_norm);
        if j + 1 < n {
            p = system.forward(&p).ok_or(Error::Escaped(j + 1))?;
        }
    }
    Ok(out)
}

fn estimate_splitting(system: &SystemSpec, x: &Point, n: usize) -> Result<Splitting> {
    let d = system.dim();
    if d == 1 {
        let chi = scalar_exponent(system, x, n)?;
        return Ok(if chi < 0.0 {
            Splitting { stable: Some(vec![1.0]), unstable: None }
        } else {
            Splitting { stable: None, unstable: Some(vec![1.0]) }
        });
    }
    let mut m = DMatrix::<f64>::identity(d, d);
    let mut p = *x;
    for j in 0..n {
        let jac = system.jacobian(&p).ok_or(Error::Escaped(j))?;
        m = jac * m;
        let s = m.amax();
        if s > 0.0 {
            m /= s;
        }
        if j + 1 < n {
            p = system.forward(&p).ok_or(Error::Escaped(j + 1))?;
        }
    }
    let svd = m.svd(false, true);
    let vt = svd.v_t.expect("requested");
    let (imax, imin) = {
        let sv = &svd.singular_values;
        let imax = sv.imax();
        let imin = sv.imin();
        (imax, imin)
    };
    Ok(Splitting {
        stable: Some(vt.row(imin).iter().cloned().collect()),
        unstable: Some(vt.row(imax).iter().cloned().collect()),
    })
}

/// Checks `‖dfʲs‖ ≤ Cλʲ‖s‖` and `‖dfʲu‖ ≥ C⁻¹σʲ‖u‖` for `j = 1..=n`.
///
/// Without an explicit splitting the directions are the extreme right
/// singular vectors of `dfⁿ(x)`. Stable vectors are pushed forward in
/// floating point, so rounding leaks into the unstable direction once
/// `(σ/λ)ⁿ` approaches `1/ε`; keep `n` below that.
///
/// Fails with [`Error::NotHyperbolic`] when the rates do not hold for any
/// `C` up to 1024.
pub fn hyperbolicity_check(
    system: &SystemSpec,
    x: &Point,
    n: usize,
    lambda: f64,
    sigma: f64,
    c: f64,
    splitting: Option<Splitting>,
) -> Result<HyperbolicityReport> {
    system.check_point(x)?;
    if !system.has_jacobian() {
        return Err(Error::MissingCapability(system.name.clone(), "Jacobian"));
    }
    if n == 0 || !(c >= 1.0) || !(lambda > 0.0 && lambda < 1.0) || !(sigma > 1.0) {
        return Err(Error::InvalidArgument("need n ≥ 1, C ≥ 1 and 0 < λ < 1 < σ".into()));
    }
    let splitting = match splitting {
        Some(s) => s,
        None => estimate_splitting(system, x, n)?,
    };
    if splitting.stable.is_none() && splitting.unstable.is_none() {
        return Err(Error::InvalidArgument("empty splitting".into()));
    }
    let stable = splitting.stable.as_ref().map(|s| log_growth(system, x, s, n)).transpose()?;
    let unstable = splitting.unstable.as_ref().map(|u| log_growth(system, x, u, n)).transpose()?;

    let rates_hold = |cc: f64| {
        let lc = cc.ln();
        let s_ok = stable.as_ref().is_none_or(|g| {
            g.iter().enumerate().all(|(j, &lg)| lg <= lc + (j + 1) as f64 * lambda.ln() + HYPERBOLICITY_TOL)
        });
        let u_ok = unstable.as_ref().is_none_or(|g| {
            g.iter().enumerate().all(|(j, &lg)| lg >= -lc + (j + 1) as f64 * sigma.ln() - HYPERBOLICITY_TOL)
        });
        s_ok && u_ok
    };
    let lc = c.ln();
    let tightest_lambda = stable.as_ref().map(|g| {
        g.iter().enumerate().map(|(j, &lg)| ((lg - lc) / (j + 1) as f64).exp()).fold(0.0, f64::max)
    });
    let tightest_sigma = unstable.as_ref().map(|g| {
        g.iter()
            .enumerate()
            .map(|(j, &lg)| ((lg + lc) / (j + 1) as f64).exp())
            .fold(f64::INFINITY, f64::min)
    });
    let pass = rates_hold(c);
    let mut feasible_c = None;
    let mut cc = c;
    while cc <= C_CAP {
        if rates_hold(cc) {
            feasible_c = Some(cc);
            break;
        }
        cc *= 2.0;
    }
    if feasible_c.is_none() {
        return Err(Error::NotHyperbolic(format!(
            "rates λ={lambda}, σ={sigma} fail for every C ≤ {C_CAP} over {n} iterates"
        )));
    }
    Ok(HyperbolicityReport { pass, c, tightest_lambda, tightest_sigma, feasible_c, splitting })
}

/// Fraction of `samples` whose exponents all satisfy `|χ| ≥ gap` with a
/// convergence halfwidth below `gap/2`. Samples that escape or meet a
/// singular Jacobian do not count.
pub fn pesin_region_fraction(system: &SystemSpec, samples: &[Point], n: usize, gap: f64) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::InvalidArgument("no samples".into()));
    }
    if !system.has_jacobian() {
        return Err(Error::MissingCapability(system.name.clone(), "Jacobian"));
    }
    for s in samples {
        system.check_point(s)?;
    }
    let inside = samples
        .par_iter()
        .filter(|s| match spectrum(system, s, n) {
            Ok(sp) => sp
                .exponents
                .iter()
                .zip(&sp.convergence_halfwidth)
                .all(|(e, h)| e.abs() >= gap && *h < gap / 2.0),
            Err(_) => false,
        })
        .count();
    Ok(inside as f64 / samples.len() as f64)
}
