//! Probability measures, the weak* metric, the push-forward `T*` and the
//! Krylov–Bogoliubov averages.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::phase_space::{Partition, PhaseSpace, Point};
use crate::systems::SystemSpec;

/// Default truncation index of the weak* metric.
pub const DEFAULT_TRUNCATION: usize = 64;

/// Default number of subsample points per cell in histogram push-forwards.
pub const DEFAULT_SUBSAMPLES: usize = 16;

/// The countable family `ψ₁, ψ₂, …` of continuous functions `X → [0,1]`
/// that defines the weak* metric.
///
/// `ψ₁ = ½`. Further functions are products over the axes of
/// one-dimensional factors: on periodic axes `(1+cos 2πmx)/2` and
/// `(1+sin 2πmx)/2` interleaved, on the remaining axes the half-period
/// cosines `(1+cos πmt)/2` of the bounding box coordinate `t ∈ [0,1]`.
/// Multi-indices are enumerated by total degree.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TestFunctionFamily {
    space: PhaseSpace,
}

pub fn default_family(space: &PhaseSpace) -> TestFunctionFamily {
    TestFunctionFamily { space: *space }
}

fn multi_indices(dim: usize, n: usize) -> Vec<[usize; 3]> {
    let mut out = Vec::with_capacity(n);
    let mut deg = 0;
    while out.len() < n {
        match dim {
            1 => out.push([deg, 0, 0]),
            2 => {
                for a in 0..=deg {
                    out.push([a, deg - a, 0]);
                }
            }
            _ => {
                for a in 0..=deg {
                    for b in 0..=deg - a {
                        out.push([a, b, deg - a - b]);
                    }
                }
            }
        }
        deg += 1;
    }
    out.truncate(n);
    out
}

impl TestFunctionFamily {
    pub fn space(&self) -> &PhaseSpace {
        &self.space
    }

    /// Multi-index of `ψ_i` (1-based).
    pub fn index(&self, i: usize) -> [usize; 3] {
        assert!(i >= 1, "test functions are numbered from 1");
        multi_indices(self.space.dim(), i)[i - 1]
    }

    /// `ψ_i(x)`.
    pub fn eval(&self, i: usize, x: &Point) -> f64 {
        let ev = self.evaluator(i);
        let mut out = vec![0.0; i];
        ev.values(x, &mut out);
        out[i - 1]
    }

    /// Lipschitz constant of `ψ_i` in the space's metric.
    pub fn lipschitz(&self, i: usize) -> f64 {
        let idx = self.index(i);
        let (lo, hi) = self.space.bounding_box();
        (0..self.space.dim())
            .map(|d| {
                let m = idx[d];
                if self.space.is_periodic() {
                    PI * m.div_ceil(2) as f64
                } else {
                    PI * m as f64 / (2.0 * (hi[d] - lo[d]))
                }
            })
            .sum()
    }

    /// Batch evaluator of `ψ₁ … ψ_n`.
    pub fn evaluator(&self, n: usize) -> Evaluator {
        let idx = multi_indices(self.space.dim(), n);
        let mut max = [0; 3];
        for m in &idx {
            for d in 0..3 {
                max[d] = max[d].max(m[d]);
            }
        }
        let (lo, hi) = self.space.bounding_box();
        Evaluator { space: self.space, idx, max, lo, hi }
    }
}

/// Evaluates the first `n` test functions at a point in one pass.
#[derive(Clone, Debug)]
pub struct Evaluator {
    space: PhaseSpace,
    idx: Vec<[usize; 3]>,
    max: [usize; 3],
    lo: [f64; 3],
    hi: [f64; 3],
}

impl Evaluator {
    pub fn len(&self) -> usize {
        self.idx.len()
    }

    pub fn is_empty(&self) -> bool {
        self.idx.is_empty()
    }

    fn axis_values(&self, v: f64, d: usize, out: &mut [f64; 64]) {
        let top = self.max[d];
        out[0] = 1.0;
        if top == 0 {
            return;
        }
        if self.space.is_periodic() {
            let (s1, c1) = (TAU * v).sin_cos();
            let (mut sp, mut cp) = (0.0, 1.0);
            let (mut s, mut c) = (s1, c1);
            let mut m = 1;
            while 2 * m - 1 <= top {
                out[2 * m - 1] = (0.5 * (1.0 + c)).clamp(0.0, 1.0);
                if 2 * m <= top {
                    out[2 * m] = (0.5 * (1.0 + s)).clamp(0.0, 1.0);
                }
                let (sn, cn) = (2.0 * c1 * s - sp, 2.0 * c1 * c - cp);
                sp = s;
                cp = c;
                s = sn;
                c = cn;
                m += 1;
            }
        } else {
            let t = (v - self.lo[d]) / (self.hi[d] - self.lo[d]);
            let c1 = (PI * t).cos();
            let (mut cp, mut c) = (1.0, c1);
            for slot in out.iter_mut().take(top + 1).skip(1) {
                *slot = (0.5 * (1.0 + c)).clamp(0.0, 1.0);
                let cn = 2.0 * c1 * c - cp;
                cp = c;
                c = cn;
            }
        }
    }

    /// Writes `ψ_i(x)` into `out[i−1]`.
    pub fn values(&self, x: &Point, out: &mut [f64]) {
        let dim = self.space.dim();
        let a = self.space.ambient(x);
        let mut axes = [[0.0; 64]; 3];
        for d in 0..dim {
            if self.max[d] >= 64 {
                // rare: fall back to direct evaluation for very long families
                return self.values_direct(&a, out);
            }
            self.axis_values(a[d], d, &mut axes[d]);
        }
        for (o, m) in out.iter_mut().zip(&self.idx) {
            *o = if m == &[0, 0, 0] {
                0.5
            } else {
                (0..dim).map(|d| axes[d][m[d]]).product()
            };
        }
    }

    fn values_direct(&self, a: &[f64; 3], out: &mut [f64]) {
        let dim = self.space.dim();
        for (o, m) in out.iter_mut().zip(&self.idx) {
            if m == &[0, 0, 0] {
                *o = 0.5;
                continue;
            }
            *o = (0..dim)
                .map(|d| {
                    let k = m[d];
                    if k == 0 {
                        1.0
                    } else if self.space.is_periodic() {
                        let f = TAU * k.div_ceil(2) as f64 * a[d];
                        0.5 * (1.0 + if k % 2 == 1 { f.cos() } else { f.sin() })
                    } else {
                        let t = (a[d] - self.lo[d]) / (self.hi[d] - self.lo[d]);
                        0.5 * (1.0 + (PI * k as f64 * t).cos())
                    }
                })
                .product();
        }
    }
}

/// Running sums of test-function values along a stream of points.
#[derive(Clone, Debug)]
pub struct MomentAccumulator {
    eval: Evaluator,
    sums: Vec<f64>,
    scratch: Vec<f64>,
    count: usize,
}

impl MomentAccumulator {
    pub fn new(family: &TestFunctionFamily, n: usize) -> Self {
        Self { eval: family.evaluator(n), sums: vec![0.0; n], scratch: vec![0.0; n], count: 0 }
    }

    pub fn push(&mut self, x: &Point) {
        self.push_weighted(x, 1);
    }

    /// Adds `times` copies of `x`.
    pub fn push_weighted(&mut self, x: &Point, times: usize) {
        self.eval.values(x, &mut self.scratch);
        let w = times as f64;
        for (s, v) in self.sums.iter_mut().zip(&self.scratch) {
            *s += w * v;
        }
        self.count += times;
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// `∫ψ_i dσ` for the empirical measure of the pushed points.
    pub fn moments(&self) -> Vec<f64> {
        let c = self.count.max(1) as f64;
        self.sums.iter().map(|s| s / c).collect()
    }
}

/// `Σ 2^{−i} |a_i − b_i|` over moment vectors.
pub fn weak_star_from_moments(a: &[f64], b: &[f64]) -> f64 {
    let mut w = 1.0;
    let mut total = 0.0;
    for (x, y) in a.iter().zip(b) {
        w *= 0.5;
        total += w * (x - y).abs();
    }
    total
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiracMeasure {
    pub space: PhaseSpace,
    pub atom: Point,
}

/// `σ = (1/n) Σ δ_{x_j}`.
#[derive(Clone, Debug, PartialEq)]
pub struct EmpiricalMeasure {
    space: PhaseSpace,
    samples: Vec<Point>,
}

impl EmpiricalMeasure {
    pub fn new(space: PhaseSpace, samples: Vec<Point>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InvalidArgument("empirical measure needs at least one sample".into()));
        }
        if let Some(p) = samples.iter().find(|p| p.dim() != space.dim()) {
            return Err(Error::SpaceMismatch(format!(
                "{}-dimensional sample in a {}-dimensional space",
                p.dim(),
                space.dim()
            )));
        }
        Ok(Self { space, samples })
    }

    pub fn samples(&self) -> &[Point] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Cell weights on a partition, summing to one.
#[derive(Clone, Debug, PartialEq)]
pub struct HistogramMeasure {
    partition: Partition,
    weights: Vec<f64>,
}

impl HistogramMeasure {
    pub fn new(partition: Partition, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != partition.cell_count() {
            return Err(Error::InvalidArgument(format!(
                "expected {} weights, got {}",
                partition.cell_count(),
                weights.len()
            )));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::InvalidArgument("weights must be finite and nonnegative".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!("weights sum to {total}, not 1")));
        }
        Ok(Self { partition, weights })
    }

    /// Normalises arbitrary nonnegative masses.
    pub fn from_masses(partition: Partition, masses: Vec<f64>) -> Result<Self> {
        let total: f64 = masses.iter().sum();
        if !(total > 0.0) {
            return Err(Error::InvalidArgument("total mass must be positive".into()));
        }
        Self::new(partition, masses.into_iter().map(|m| m / total).collect())
    }

    /// Lebesgue proxy: equal weight on every cell whose centre is in the
    /// space.
    pub fn uniform(partition: Partition) -> Self {
        let inside: Vec<bool> = (0..partition.cell_count())
            .map(|c| partition.space.contains(&partition.cell_center(c)))
            .collect();
        let n = inside.iter().filter(|b| **b).count() as f64;
        let weights = inside.iter().map(|&b| if b { 1.0 / n } else { 0.0 }).collect();
        Self { partition, weights }
    }

    /// Binning of a point cloud.
    pub fn from_points(partition: Partition, points: &[Point]) -> Result<Self> {
        let mut m = vec![0.0; partition.cell_count()];
        for p in points {
            m[partition.cell_index(p)] += 1.0;
        }
        Self::from_masses(partition, m)
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Measure {
    Dirac(DiracMeasure),
    Empirical(EmpiricalMeasure),
    Histogram(HistogramMeasure),
}

impl From<DiracMeasure> for Measure {
    fn from(m: DiracMeasure) -> Self {
        Measure::Dirac(m)
    }
}

impl From<EmpiricalMeasure> for Measure {
    fn from(m: EmpiricalMeasure) -> Self {
        Measure::Empirical(m)
    }
}

impl From<HistogramMeasure> for Measure {
    fn from(m: HistogramMeasure) -> Self {
        Measure::Histogram(m)
    }
}

impl Measure {
    pub fn dirac(space: &PhaseSpace, atom: Point) -> Self {
        Measure::Dirac(DiracMeasure { space: *space, atom })
    }

    pub fn empirical(space: &PhaseSpace, samples: Vec<Point>) -> Result<Self> {
        Ok(Measure::Empirical(EmpiricalMeasure::new(*space, samples)?))
    }

    pub fn space(&self) -> &PhaseSpace {
        match self {
            Measure::Dirac(m) => &m.space,
            Measure::Empirical(m) => &m.space,
            Measure::Histogram(m) => &m.partition.space,
        }
    }

    /// `∫ψ_i dμ` for `i = 1..=n`. Histograms use the cell-centre rule.
    pub fn moments(&self, family: &TestFunctionFamily, n: usize) -> Vec<f64> {
        let mut acc = MomentAccumulator::new(family, n);
        match self {
            Measure::Dirac(m) => acc.push(&m.atom),
            Measure::Empirical(m) => m.samples.iter().for_each(|p| acc.push(p)),
            Measure::Histogram(h) => {
                let ev = family.evaluator(n);
                let mut out = vec![0.0; n];
                let mut vals = vec![0.0; n];
                for (c, &w) in h.weights.iter().enumerate() {
                    if w == 0.0 {
                        continue;
                    }
                    ev.values(&h.partition.cell_center(c), &mut vals);
                    for (o, v) in out.iter_mut().zip(&vals) {
                        *o += w * v;
                    }
                }
                return out;
            }
        }
        acc.moments()
    }
}

/// `∫ψ dμ`.
pub fn integrate(mu: &Measure, psi: impl Fn(&Point) -> f64) -> f64 {
    match mu {
        Measure::Dirac(m) => psi(&m.atom),
        Measure::Empirical(m) => m.samples.iter().map(&psi).sum::<f64>() / m.samples.len() as f64,
        Measure::Histogram(h) => h
            .weights
            .iter()
            .enumerate()
            .filter(|(_, w)| **w > 0.0)
            .map(|(c, w)| w * psi(&h.partition.cell_center(c)))
            .sum(),
    }
}

fn same_space(a: &PhaseSpace, b: &PhaseSpace) -> Result<()> {
    if a.kind != b.kind || a.dim() != b.dim() {
        return Err(Error::SpaceMismatch(format!("{} vs {}", a.kind, b.kind)));
    }
    Ok(())
}

/// `Σ_{i=1}^{N} 2^{−i} |∫ψ_i dμ − ∫ψ_i dν|`. The neglected tail is at most
/// `2^{−N}`.
pub fn weak_star_distance(
    mu: &Measure,
    nu: &Measure,
    family: &TestFunctionFamily,
    n: usize,
) -> Result<f64> {
    same_space(mu.space(), nu.space())?;
    same_space(mu.space(), family.space())?;
    if n == 0 {
        return Err(Error::InvalidArgument("truncation index must be at least 1".into()));
    }
    Ok(weak_star_from_moments(&mu.moments(family, n), &nu.moments(family, n)))
}

/// Image measure together with the mass that left the domain.
#[derive(Clone, Debug, PartialEq)]
pub struct Pushforward {
    /// Renormalised image of the surviving mass.
    pub measure: Measure,
    pub escaped_mass: f64,
}

fn subsample_offsets(dim: usize, s: usize) -> Vec<[f64; 3]> {
    let per = ((s as f64).powf(1.0 / dim as f64) + 1e-9).floor().max(1.0) as usize;
    let total = per.pow(dim as u32);
    (0..total)
        .map(|mut i| {
            let mut o = [0.5; 3];
            for v in o.iter_mut().take(dim) {
                *v = ((i % per) as f64 + 0.5) / per as f64;
                i /= per;
            }
            o
        })
        .collect()
}

/// `T*μ` with the default of 16 subsample points per histogram cell.
pub fn pushforward(system: &SystemSpec, mu: &Measure) -> Result<Pushforward> {
    pushforward_with(system, mu, DEFAULT_SUBSAMPLES)
}

/// `T*μ`. Histogram cells are represented by a stratified grid of about
/// `subsamples` points that are mapped forward individually.
pub fn pushforward_with(system: &SystemSpec, mu: &Measure, subsamples: usize) -> Result<Pushforward> {
    same_space(mu.space(), &system.space)?;
    match mu {
        Measure::Dirac(m) => match system.forward(&m.atom) {
            Some(p) => Ok(Pushforward { measure: Measure::dirac(&system.space, p), escaped_mass: 0.0 }),
            None => Err(Error::Escaped(1)),
        },
        Measure::Empirical(m) => {
            let image: Vec<Point> = m.samples.iter().filter_map(|p| system.forward(p)).collect();
            if image.is_empty() {
                return Err(Error::Escaped(1));
            }
            let escaped = 1.0 - image.len() as f64 / m.samples.len() as f64;
            Ok(Pushforward {
                measure: Measure::empirical(&system.space, image)?,
                escaped_mass: escaped,
            })
        }
        Measure::Histogram(h) => {
            let part = h.partition;
            let space = part.space;
            let offsets = subsample_offsets(space.dim(), subsamples.max(1));
            let mut out = vec![0.0; part.cell_count()];
            let mut escaped = 0.0;
            for (c, &w) in h.weights.iter().enumerate() {
                if w == 0.0 {
                    continue;
                }
                let (lo, hi) = part.cell_box(c);
                let mut pts = Vec::with_capacity(offsets.len());
                for o in &offsets {
                    let mut a = [0.0; 3];
                    for d in 0..space.dim() {
                        a[d] = lo[d] + o[d] * (hi[d] - lo[d]);
                    }
                    let p = space.from_ambient(a);
                    if space.contains(&p) {
                        pts.push(p);
                    }
                }
                if pts.is_empty() {
                    pts.push(part.cell_center(c));
                }
                let share = w / pts.len() as f64;
                for p in &pts {
                    match system.forward(p) {
                        Some(y) => out[part.cell_index(&y)] += share,
                        None => escaped += share,
                    }
                }
            }
            if escaped >= 1.0 - 1e-15 {
                return Err(Error::Escaped(1));
            }
            Ok(Pushforward {
                measure: Measure::Histogram(HistogramMeasure::from_masses(part, out)?),
                escaped_mass: escaped,
            })
        }
    }
}

/// Cesàro average `(1/n) Σ_{j<n} (T*)ʲ ρ`, in the representation of `ρ`.
/// Dirac and empirical inputs give empirical measures made of the orbit
/// samples; histograms give averaged weights.
pub fn krylov_bogoliubov(system: &SystemSpec, rho: &Measure, n: usize) -> Result<Measure> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    same_space(rho.space(), &system.space)?;
    if n == 1 {
        return Ok(rho.clone());
    }
    match rho {
        Measure::Dirac(m) => {
            let orbit = system.orbit(&m.atom, n)?;
            Measure::empirical(&system.space, orbit.points)
        }
        Measure::Empirical(m) => {
            let mut all = Vec::with_capacity(m.len() * n);
            for x in &m.samples {
                all.extend(system.orbit(x, n)?.points);
            }
            Measure::empirical(&system.space, all)
        }
        Measure::Histogram(h) => {
            let mut acc = h.weights.clone();
            let mut cur = rho.clone();
            for _ in 1..n {
                cur = pushforward(system, &cur)?.measure;
                if let Measure::Histogram(c) = &cur {
                    for (a, w) in acc.iter_mut().zip(&c.weights) {
                        *a += w;
                    }
                }
            }
            Ok(Measure::Histogram(HistogramMeasure::from_masses(h.partition, acc)?))
        }
    }
}

/// `dist(T*μ, μ)`: zero exactly for invariant measures.
pub fn invariance_residual(
    system: &SystemSpec,
    mu: &Measure,
    family: &TestFunctionFamily,
    n: usize,
) -> Result<f64> {
    let pushed = pushforward(system, mu)?;
    weak_star_distance(&pushed.measure, mu, family, n)
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MeasureDoc {
    #[serde(rename = "type")]
    kind: String,
    space: PhaseSpace,
    data: serde_json::Value,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DiracData {
    atom: Point,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EmpiricalData {
    samples: Vec<Point>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct HistogramData {
    k: usize,
    weights: Vec<f64>,
}

impl Serialize for Measure {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::Error as _;
        let (kind, data) = match self {
            Measure::Dirac(m) => ("dirac", serde_json::to_value(DiracData { atom: m.atom })),
            Measure::Empirical(m) => {
                ("empirical", serde_json::to_value(EmpiricalData { samples: m.samples.clone() }))
            }
            Measure::Histogram(h) => (
                "histogram",
                serde_json::to_value(HistogramData {
                    k: h.partition.cells_per_axis,
                    weights: h.weights.clone(),
                }),
            ),
        };
        let data = data.map_err(S::Error::custom)?;
        MeasureDoc { kind: kind.into(), space: *self.space(), data }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Measure {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let doc = MeasureDoc::deserialize(d)?;
        let space = doc.space;
        match doc.kind.as_str() {
            "dirac" => {
                let data: DiracData = serde_json::from_value(doc.data).map_err(D::Error::custom)?;
                Ok(Measure::dirac(&space, data.atom))
            }
            "empirical" => {
                let data: EmpiricalData =
                    serde_json::from_value(doc.data).map_err(D::Error::custom)?;
                Measure::empirical(&space, data.samples).map_err(D::Error::custom)
            }
            "histogram" => {
                let data: HistogramData =
                    serde_json::from_value(doc.data).map_err(D::Error::custom)?;
                let part = Partition::new(space, data.k).map_err(D::Error::custom)?;
                HistogramMeasure::new(part, data.weights)
                    .map(Measure::Histogram)
                    .map_err(D::Error::custom)
            }
            other => Err(D::Error::custom(format!("unknown measure type `{other}`"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::Params;

    fn sys(name: &str) -> SystemSpec {
        SystemSpec::build(name, &Params::new()).unwrap()
    }

    #[test]
    fn circle_family_examples() {
        let f = default_family(&PhaseSpace::circle());
        assert_eq!(f.eval(1, &Point::float(&[0.37])), 0.5);
        assert!((f.eval(2, &Point::float(&[0.0])) - 1.0).abs() < 1e-15);
        assert!((f.eval(3, &Point::float(&[0.25])) - 1.0).abs() < 1e-15);
        // ψ₄ = (1+cos 4πx)/2
        assert!((f.eval(4, &Point::float(&[0.25])) - 0.0).abs() < 1e-15);
    }

    #[test]
    fn evaluator_matches_direct_formulas() {
        for space in [
            PhaseSpace::circle(),
            PhaseSpace::torus2(),
            PhaseSpace::square(),
            PhaseSpace::disc(1.5),
            PhaseSpace::solid_torus(0.3),
        ] {
            let f = default_family(&space);
            let ev = f.evaluator(64);
            for x in space.lebesgue_grid(7) {
                let mut fast = vec![0.0; 64];
                ev.values(&x, &mut fast);
                let mut slow = vec![0.0; 64];
                ev.values_direct(&space.ambient(&x), &mut slow);
                for i in 0..64 {
                    assert!((fast[i] - slow[i]).abs() < 1e-12, "{:?} ψ{}", space.kind, i + 1);
                    assert!((0.0..=1.0).contains(&fast[i]));
                }
            }
        }
    }

    #[test]
    fn torus_indices_follow_diagonals() {
        let f = default_family(&PhaseSpace::torus2());
        assert_eq!(f.index(1), [0, 0, 0]);
        assert_eq!(f.index(2), [0, 1, 0]);
        assert_eq!(f.index(3), [1, 0, 0]);
        assert_eq!(f.index(4), [0, 2, 0]);
        let all = multi_indices(2, 200);
        let mut seen = std::collections::BTreeSet::new();
        assert!(all.iter().all(|m| seen.insert(*m)));
    }

    #[test]
    fn uniform_circle_quadrature() {
        let part = Partition::new(PhaseSpace::circle(), 100).unwrap();
        let u = Measure::Histogram(HistogramMeasure::uniform(part));
        let v = integrate(&u, |p| 0.5 * (1.0 + (TAU * p.coords()[0]).cos()));
        assert!((v - 0.5).abs() < 1e-12);
    }

    #[test]
    fn weak_star_dyadic_diracs_decrease() {
        let s = PhaseSpace::circle();
        let f = default_family(&s);
        let d0 = Measure::dirac(&s, Point::float(&[0.0]));
        let mut prev = f64::INFINITY;
        for n in 1..20 {
            let dn = Measure::dirac(&s, Point::float(&[0.5f64.powi(n)]));
            let d = weak_star_distance(&dn, &d0, &f, 64).unwrap();
            assert!(d < prev, "n={n}");
            prev = d;
        }
        assert!(prev < 1e-4);
        assert_eq!(weak_star_distance(&d0, &d0, &f, 64).unwrap(), 0.0);
    }

    #[test]
    fn pushforward_examples() {
        let rot = sys("rotation");
        let a = crate::systems::golden_mean();
        let d = Measure::dirac(&rot.space, Point::float(&[0.1]));
        match pushforward(&rot, &d).unwrap().measure {
            Measure::Dirac(m) => assert!((m.atom.coords()[0] - (0.1 + a)).abs() < 1e-15),
            _ => panic!(),
        }
        let tent = sys("tent");
        let u = Measure::Histogram(HistogramMeasure::uniform(Partition::new(tent.space, 1024).unwrap()));
        let p = pushforward(&tent, &u).unwrap();
        if let (Measure::Histogram(a), Measure::Histogram(b)) = (&p.measure, &u) {
            let dev = a.weights.iter().zip(&b.weights).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
            assert!(dev < 1e-12);
        }
        let cat = sys("cat_map");
        let u = Measure::Histogram(HistogramMeasure::uniform(Partition::new(cat.space, 64).unwrap()));
        let f = default_family(&cat.space);
        assert!(invariance_residual(&cat, &u, &f, 64).unwrap() < 1e-3);
    }

    #[test]
    fn pushforward_integral_identity() {
        // ∫ψ d(T*μ) = ∫ψ∘T dμ exactly for empirical measures
        let cat = sys("cat_map");
        let f = default_family(&cat.space);
        let pts = cat.space.lebesgue_grid(13);
        let mu = Measure::empirical(&cat.space, pts).unwrap();
        let pushed = pushforward(&cat, &mu).unwrap().measure;
        for i in [1, 2, 5, 17, 40] {
            let lhs = integrate(&pushed, |p| f.eval(i, p));
            let rhs = integrate(&mu, |p| f.eval(i, &cat.forward(p).unwrap()));
            assert!((lhs - rhs).abs() < 1e-14);
        }
    }

    #[test]
    fn horseshoe_escape_mass() {
        let h = sys("horseshoe");
        let u = Measure::Histogram(HistogramMeasure::uniform(Partition::new(h.space, 40).unwrap()));
        let p = pushforward(&h, &u).unwrap();
        // the two strips carry 2/5 of the area
        assert!((p.escaped_mass - 0.6).abs() < 1e-9, "{}", p.escaped_mass);
        let total: f64 = match &p.measure {
            Measure::Histogram(m) => m.weights.iter().sum(),
            _ => panic!(),
        };
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn krylov_bogoliubov_examples() {
        let rot = sys("rotation");
        let f = default_family(&rot.space);
        let d = Measure::dirac(&rot.space, Point::float(&[0.2]));
        assert_eq!(krylov_bogoliubov(&rot, &d, 1).unwrap(), d);
        let mu = krylov_bogoliubov(&rot, &d, 10_000).unwrap();
        let u = Measure::Histogram(HistogramMeasure::uniform(Partition::new(rot.space, 4096).unwrap()));
        assert!(weak_star_distance(&mu, &u, &f, 64).unwrap() < 0.01);

        let ns = sys("north_south");
        let d = Measure::dirac(&ns.space, Point::float(&[0.3]));
        let r1 = invariance_residual(&ns, &d, &f, 64).unwrap();
        assert!(r1 > 0.01);
        let mut prev = r1;
        for n in [10, 100, 1000] {
            let r = invariance_residual(&ns, &krylov_bogoliubov(&ns, &d, n).unwrap(), &f, 64).unwrap();
            assert!(r <= 2.0 / n as f64 + 1e-12 && r < prev);
            prev = r;
        }
        let s = Measure::dirac(&ns.space, Point::float(&[0.5]));
        assert_eq!(invariance_residual(&ns, &s, &f, 64).unwrap(), 0.0);
    }

    #[test]
    fn measure_json_round_trip() {
        let s = PhaseSpace::torus2();
        let ms = vec![
            Measure::dirac(&s, Point::float(&[0.1, 0.2])),
            Measure::empirical(&s, vec![Point::float(&[0.1, 0.2]), Point::float(&[0.3, 0.9])]).unwrap(),
            Measure::Histogram(HistogramMeasure::uniform(Partition::new(s, 3).unwrap())),
        ];
        for m in ms {
            let js = serde_json::to_value(&m).unwrap();
            assert!(js.get("type").is_some() && js.get("space").is_some() && js.get("data").is_some());
            let back: Measure = serde_json::from_value(js).unwrap();
            assert_eq!(back, m);
        }
    }

    #[test]
    fn invalid_histograms_rejected() {
        let p = Partition::new(PhaseSpace::circle(), 4).unwrap();
        assert!(HistogramMeasure::new(p, vec![0.5, 0.5, 0.5, -0.5]).is_err());
        assert!(HistogramMeasure::new(p, vec![0.5, 0.5, 0.5, 0.5]).is_err());
        assert!(HistogramMeasure::new(p, vec![0.5; 3]).is_err());
    }
}
