//! Phase-space geometry: points, quotient metrics, grid partitions and the
//! exact odd-modulus representation used for maps that degenerate in binary
//! floating point.
//!
//! Circle and torus coordinates are kept in `[0,1)`. A space may carry an odd
//! modulus `q`; points of such a space can then be stored as residues
//! `r ∈ {0,…,q−1}` standing for `r/q`. The doubling-type maps (tent, `k·x`,
//! integer toral automorphisms) act on these residues without rounding.

use std::collections::BTreeSet;
use std::f64::consts::TAU;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default modulus for exact mode, the Mersenne prime 2³¹−1.
pub const DEFAULT_MODULUS: u64 = 2_147_483_647;

/// Default disc radius.
pub const DEFAULT_DISC_RADIUS: f64 = 1.5;

/// Default tube radius of the solid torus.
pub const DEFAULT_TUBE_RADIUS: f64 = 0.3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpaceKind {
    Circle,
    Torus2,
    Square,
    Disc,
    SolidTorus,
}

impl fmt::Display for SpaceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SpaceKind::Circle => "circle",
            SpaceKind::Torus2 => "torus2",
            SpaceKind::Square => "square",
            SpaceKind::Disc => "disc",
            SpaceKind::SolidTorus => "solid_torus",
        };
        f.write_str(s)
    }
}

/// A compact metric phase space.
///
/// `radius` is the disc radius for [`SpaceKind::Disc`] and the tube radius
/// for [`SpaceKind::SolidTorus`]; it is ignored otherwise. The solid torus is
/// the tube of that radius around the unit circle in the `xy`-plane; its
/// points are stored in intrinsic coordinates `(t, u, v)` with `t ∈ [0,1)`
/// the turn fraction and `(u, v)` the offset inside the meridian disc.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseSpace {
    pub kind: SpaceKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact_modulus: Option<u64>,
}

impl PhaseSpace {
    pub fn circle() -> Self {
        Self { kind: SpaceKind::Circle, radius: None, exact_modulus: None }
    }

    pub fn torus2() -> Self {
        Self { kind: SpaceKind::Torus2, radius: None, exact_modulus: None }
    }

    pub fn square() -> Self {
        Self { kind: SpaceKind::Square, radius: None, exact_modulus: None }
    }

    pub fn disc(radius: f64) -> Self {
        Self { kind: SpaceKind::Disc, radius: Some(radius), exact_modulus: None }
    }

    pub fn solid_torus(tube: f64) -> Self {
        Self { kind: SpaceKind::SolidTorus, radius: Some(tube), exact_modulus: None }
    }

    /// Switches the space to exact residue arithmetic modulo `q`.
    pub fn with_exact_modulus(mut self, q: u64) -> Result<Self> {
        if !self.is_periodic() {
            return Err(Error::UnsupportedSpace { op: "exact mode", space: self.kind.to_string() });
        }
        if q < 3 || q % 2 == 0 || q > u32::MAX as u64 {
            return Err(Error::InvalidArgument(format!(
                "exact modulus must be an odd integer in [3, 2^32), got {q}"
            )));
        }
        self.exact_modulus = Some(q);
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        match self.kind {
            SpaceKind::Circle => 1,
            SpaceKind::Torus2 | SpaceKind::Square | SpaceKind::Disc => 2,
            SpaceKind::SolidTorus => 3,
        }
    }

    /// True for quotient spaces (`ℝ/ℤ`, `ℝ²/ℤ²`).
    pub fn is_periodic(&self) -> bool {
        matches!(self.kind, SpaceKind::Circle | SpaceKind::Torus2)
    }

    pub fn is_exact(&self) -> bool {
        self.exact_modulus.is_some()
    }

    fn r(&self) -> f64 {
        match self.kind {
            SpaceKind::Disc => self.radius.unwrap_or(DEFAULT_DISC_RADIUS),
            SpaceKind::SolidTorus => self.radius.unwrap_or(DEFAULT_TUBE_RADIUS),
            _ => 0.0,
        }
    }

    pub fn diameter(&self) -> f64 {
        match self.kind {
            SpaceKind::Circle => 0.5,
            SpaceKind::Torus2 => std::f64::consts::FRAC_1_SQRT_2,
            SpaceKind::Square => std::f64::consts::SQRT_2,
            SpaceKind::Disc => 2.0 * self.r(),
            SpaceKind::SolidTorus => 2.0 * (1.0 + self.r()),
        }
    }

    /// Axis-aligned box (in ambient coordinates) used by partitions and by
    /// the test-function families.
    pub fn bounding_box(&self) -> ([f64; 3], [f64; 3]) {
        match self.kind {
            SpaceKind::Circle => ([0.0; 3], [1.0, 0.0, 0.0]),
            SpaceKind::Torus2 | SpaceKind::Square => ([0.0; 3], [1.0, 1.0, 0.0]),
            SpaceKind::Disc => {
                let r = self.r();
                ([-r, -r, 0.0], [r, r, 0.0])
            }
            SpaceKind::SolidTorus => {
                let a = self.r();
                ([-(1.0 + a), -(1.0 + a), -a], [1.0 + a, 1.0 + a, a])
            }
        }
    }

    /// Ambient coordinates of a point. Identity except for the solid torus,
    /// which is embedded in ℝ³.
    pub fn ambient(&self, x: &Point) -> [f64; 3] {
        match self.kind {
            SpaceKind::SolidTorus => {
                let c = x.coords();
                let (s, co) = (TAU * c[0]).sin_cos();
                let rad = 1.0 + c[1];
                [rad * co, rad * s, c[2]]
            }
            _ => x.x,
        }
    }

    /// Inverse of [`PhaseSpace::ambient`] for the solid torus; for the other
    /// spaces it just builds a float point from the first `dim` coordinates.
    pub fn from_ambient(&self, a: [f64; 3]) -> Point {
        match self.kind {
            SpaceKind::SolidTorus => {
                let t = frac(a[1].atan2(a[0]) / TAU);
                let u = a[0].hypot(a[1]) - 1.0;
                Point::float(&[t, u, a[2]])
            }
            _ => Point::float(&a[..self.dim()]),
        }
    }

    pub fn contains(&self, x: &Point) -> bool {
        if x.dim() != self.dim() {
            return false;
        }
        let c = x.coords();
        if c.iter().any(|v| !v.is_finite()) {
            return false;
        }
        match self.kind {
            SpaceKind::Circle | SpaceKind::Torus2 => c.iter().all(|&v| (0.0..1.0).contains(&v)),
            SpaceKind::Square => c.iter().all(|&v| (0.0..=1.0).contains(&v)),
            SpaceKind::Disc => c[0].hypot(c[1]) <= self.r() * (1.0 + 1e-12),
            SpaceKind::SolidTorus => {
                (0.0..1.0).contains(&c[0]) && c[1].hypot(c[2]) <= self.r() * (1.0 + 1e-12)
            }
        }
    }

    /// Converts a float point of a periodic exact space to residues.
    pub fn to_exact(&self, x: &Point) -> Result<Point> {
        let q = self.exact_modulus.ok_or(Error::UnsupportedSpace {
            op: "to_exact",
            space: self.kind.to_string(),
        })?;
        if x.is_exact() {
            return Ok(*x);
        }
        let res: Vec<u64> = x
            .coords()
            .iter()
            .map(|&v| ((frac(v) * q as f64).round() as u64) % q)
            .collect();
        Ok(Point::exact(&res, q))
    }

    /// Uniform grid of cell-centre sample points, `per_axis` per axis of the
    /// bounding box, restricted to the space. Used as the deterministic
    /// Lebesgue proxy. Exact spaces receive residue points.
    pub fn lebesgue_grid(&self, per_axis: usize) -> Vec<Point> {
        let (lo, hi) = self.bounding_box();
        let dim = self.dim();
        let total = per_axis.pow(dim as u32);
        let mut out = Vec::with_capacity(total);
        for idx in 0..total {
            let mut a = [0.0; 3];
            let mut rem = idx;
            for d in 0..dim {
                let i = rem % per_axis;
                rem /= per_axis;
                a[d] = lo[d] + (hi[d] - lo[d]) * (i as f64 + 0.5) / per_axis as f64;
            }
            let p = self.from_ambient(a);
            if self.contains(&p) {
                out.push(match self.exact_modulus {
                    Some(_) => self.to_exact(&p).expect("periodic exact space"),
                    None => p,
                });
            }
        }
        out
    }
}

/// Reduction into `[0,1)`.
#[inline]
pub fn frac(v: f64) -> f64 {
    let f = v - v.floor();
    if f >= 1.0 {
        0.0
    } else {
        f
    }
}

/// Distance between two points of the circle `ℝ/ℤ`.
#[inline]
pub fn circle_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).abs() % 1.0;
    d.min(1.0 - d)
}

/// A point of a phase space. Up to three coordinates; exact points carry
/// residues `r` together with the float values `r/q`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(into = "PointDoc", try_from = "PointDoc")]
pub struct Point {
    x: [f64; 3],
    r: [u64; 3],
    dim: u8,
    exact: bool,
}

#[derive(Serialize, Deserialize)]
struct PointDoc {
    coords: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    residues: Option<Vec<u64>>,
}

impl From<Point> for PointDoc {
    fn from(p: Point) -> Self {
        PointDoc { coords: p.coords().to_vec(), residues: p.residues().map(|r| r.to_vec()) }
    }
}

impl TryFrom<PointDoc> for Point {
    type Error = String;
    fn try_from(doc: PointDoc) -> std::result::Result<Self, String> {
        if doc.coords.is_empty() || doc.coords.len() > 3 {
            return Err(format!("point must have 1 to 3 coordinates, got {}", doc.coords.len()));
        }
        let mut p = Point::float(&doc.coords);
        if let Some(res) = doc.residues {
            if res.len() != doc.coords.len() {
                return Err("residue and coordinate counts differ".into());
            }
            p.r[..res.len()].copy_from_slice(&res);
            p.exact = true;
        }
        Ok(p)
    }
}

impl PartialEq for Point {
    fn eq(&self, other: &Self) -> bool {
        if self.dim != other.dim || self.exact != other.exact {
            return false;
        }
        if self.exact {
            self.residues() == other.residues()
        } else {
            self.coords() == other.coords()
        }
    }
}

impl Point {
    /// A float point. Panics if `coords` is empty or longer than three.
    pub fn float(coords: &[f64]) -> Self {
        assert!(!coords.is_empty() && coords.len() <= 3, "points have 1 to 3 coordinates");
        let mut x = [0.0; 3];
        x[..coords.len()].copy_from_slice(coords);
        Self { x, r: [0; 3], dim: coords.len() as u8, exact: false }
    }

    /// An exact point with residues modulo `q`. Residues are reduced.
    pub fn exact(residues: &[u64], q: u64) -> Self {
        assert!(!residues.is_empty() && residues.len() <= 3, "points have 1 to 3 coordinates");
        let mut x = [0.0; 3];
        let mut r = [0; 3];
        for (i, &v) in residues.iter().enumerate() {
            r[i] = v % q;
            x[i] = r[i] as f64 / q as f64;
        }
        Self { x, r, dim: residues.len() as u8, exact: true }
    }

    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    pub fn coords(&self) -> &[f64] {
        &self.x[..self.dim()]
    }

    pub fn is_exact(&self) -> bool {
        self.exact
    }

    pub fn residues(&self) -> Option<&[u64]> {
        self.exact.then(|| &self.r[..self.dim()])
    }

    /// Float copy of the point (drops residues).
    pub fn to_float(&self) -> Point {
        Point::float(self.coords())
    }
}

/// Reduces raw coordinates into a periodic space. In exact mode the float
/// inputs are rounded to the nearest residue.
pub fn wrap(space: &PhaseSpace, raw: &[f64]) -> Result<Point> {
    if !space.is_periodic() {
        return Err(Error::UnsupportedSpace { op: "wrap", space: space.kind.to_string() });
    }
    if raw.len() != space.dim() {
        return Err(Error::SpaceMismatch(format!(
            "expected {} coordinates, got {}",
            space.dim(),
            raw.len()
        )));
    }
    if let Some(&bad) = raw.iter().find(|v| !v.is_finite()) {
        return Err(Error::NonFinite(bad));
    }
    let reduced: Vec<f64> = raw.iter().map(|&v| frac(v)).collect();
    let p = Point::float(&reduced);
    match space.exact_modulus {
        Some(_) => space.to_exact(&p),
        None => Ok(p),
    }
}

/// Reduces integer residues modulo the space's exact modulus.
pub fn wrap_residues(space: &PhaseSpace, raw: &[i64]) -> Result<Point> {
    let q = space.exact_modulus.ok_or(Error::UnsupportedSpace {
        op: "wrap_residues",
        space: space.kind.to_string(),
    })?;
    if raw.len() != space.dim() {
        return Err(Error::SpaceMismatch(format!(
            "expected {} residues, got {}",
            space.dim(),
            raw.len()
        )));
    }
    let res: Vec<u64> = raw.iter().map(|&v| v.rem_euclid(q as i64) as u64).collect();
    Ok(Point::exact(&res, q))
}

/// The space's metric: quotient metric on circle/torus, Euclidean on the
/// square and disc, Euclidean in the ℝ³ embedding for the solid torus.
pub fn distance(space: &PhaseSpace, x: &Point, y: &Point) -> Result<f64> {
    if x.dim() != space.dim() || y.dim() != space.dim() {
        return Err(Error::SpaceMismatch(format!(
            "{}-dimensional space, points of dimension {} and {}",
            space.dim(),
            x.dim(),
            y.dim()
        )));
    }
    Ok(dist_unchecked(space, x, y))
}

#[inline]
pub(crate) fn dist_unchecked(space: &PhaseSpace, x: &Point, y: &Point) -> f64 {
    match space.kind {
        SpaceKind::Circle => circle_gap(x.x[0], y.x[0]),
        SpaceKind::Torus2 => circle_gap(x.x[0], y.x[0]).hypot(circle_gap(x.x[1], y.x[1])),
        SpaceKind::Square | SpaceKind::Disc => (x.x[0] - y.x[0]).hypot(x.x[1] - y.x[1]),
        SpaceKind::SolidTorus => {
            let (a, b) = (space.ambient(x), space.ambient(y));
            ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
        }
    }
}

/// Partition of a space into `k^dim` congruent half-open boxes of its
/// bounding box, indexed with axis 0 varying fastest.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Partition {
    pub space: PhaseSpace,
    pub cells_per_axis: usize,
}

impl Partition {
    pub fn new(space: PhaseSpace, cells_per_axis: usize) -> Result<Self> {
        if cells_per_axis == 0 {
            return Err(Error::InvalidArgument("cells_per_axis must be positive".into()));
        }
        Ok(Self { space, cells_per_axis })
    }

    pub fn cell_count(&self) -> usize {
        self.cells_per_axis.pow(self.space.dim() as u32)
    }

    /// Side length along each axis.
    pub fn sides(&self) -> [f64; 3] {
        let (lo, hi) = self.space.bounding_box();
        let k = self.cells_per_axis as f64;
        [(hi[0] - lo[0]) / k, (hi[1] - lo[1]) / k, (hi[2] - lo[2]) / k]
    }

    pub fn min_side(&self) -> f64 {
        self.sides()[..self.space.dim()].iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn cell_diameter(&self) -> f64 {
        self.sides()[..self.space.dim()].iter().map(|s| s * s).sum::<f64>().sqrt()
    }

    fn axis_indices(&self, x: &Point) -> [usize; 3] {
        let (lo, hi) = self.space.bounding_box();
        let a = self.space.ambient(x);
        let k = self.cells_per_axis;
        let mut out = [0; 3];
        for d in 0..self.space.dim() {
            let mut v = a[d];
            if self.space.is_periodic() {
                v = frac(v);
            }
            let t = ((v - lo[d]) / (hi[d] - lo[d]) * k as f64).floor();
            out[d] = if t <= 0.0 || t.is_nan() { 0 } else { (t as usize).min(k - 1) };
        }
        out
    }

    fn flatten(&self, idx: [usize; 3]) -> usize {
        let k = self.cells_per_axis;
        (0..self.space.dim()).rev().fold(0, |acc, d| acc * k + idx[d])
    }

    fn unflatten(&self, mut cell: usize) -> [usize; 3] {
        let k = self.cells_per_axis;
        let mut out = [0; 3];
        for o in out.iter_mut().take(self.space.dim()) {
            *o = cell % k;
            cell /= k;
        }
        out
    }

    /// Index of the lower-closed, upper-open cell containing `x`. Points on
    /// the upper boundary of a non-periodic space fall in the last cell.
    pub fn cell_index(&self, x: &Point) -> usize {
        self.flatten(self.axis_indices(x))
    }

    /// Ambient box `[lo, hi)` of a cell.
    pub fn cell_box(&self, cell: usize) -> ([f64; 3], [f64; 3]) {
        let (lo, _) = self.space.bounding_box();
        let s = self.sides();
        let idx = self.unflatten(cell);
        let mut a = [0.0; 3];
        let mut b = [0.0; 3];
        for d in 0..self.space.dim() {
            a[d] = lo[d] + s[d] * idx[d] as f64;
            b[d] = a[d] + s[d];
        }
        (a, b)
    }

    /// Centre of a cell as a float point of the space.
    pub fn cell_center(&self, cell: usize) -> Point {
        let (a, b) = self.cell_box(cell);
        let mut c = [0.0; 3];
        for d in 0..3 {
            c[d] = 0.5 * (a[d] + b[d]);
        }
        self.space.from_ambient(c)
    }

    /// Distance from `x` to the closed box of `cell` in the space's metric.
    pub fn distance_to_cell(&self, x: &Point, cell: usize) -> f64 {
        let a = self.space.ambient(x);
        self.box_distance_ambient(&a, cell)
    }

    fn box_distance_ambient(&self, a: &[f64; 3], cell: usize) -> f64 {
        let (lo, hi) = self.cell_box(cell);
        let mut s2 = 0.0;
        for d in 0..self.space.dim() {
            let g = if self.space.is_periodic() {
                let c = 0.5 * (lo[d] + hi[d]);
                (circle_gap(a[d], c) - 0.5 * (hi[d] - lo[d])).max(0.0)
            } else {
                (lo[d] - a[d]).max(a[d] - hi[d]).max(0.0)
            };
            s2 += g * g;
        }
        s2.sqrt()
    }
}

/// A set of cells of a partition: the numerical stand-in for a compact set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "GridSetDoc", try_from = "GridSetDoc")]
pub struct GridSet {
    partition: Partition,
    cells: Vec<usize>,
    mask: Vec<bool>,
}

#[derive(Serialize, Deserialize)]
struct GridSetDoc {
    partition: Partition,
    cells: Vec<usize>,
}

impl From<GridSet> for GridSetDoc {
    fn from(g: GridSet) -> Self {
        GridSetDoc { partition: g.partition, cells: g.cells }
    }
}

impl TryFrom<GridSetDoc> for GridSet {
    type Error = String;
    fn try_from(doc: GridSetDoc) -> std::result::Result<Self, String> {
        GridSet::new(doc.partition, doc.cells).map_err(|e| e.to_string())
    }
}

const BRUTE_FORCE_CELLS: usize = 32;

impl GridSet {
    pub fn new(partition: Partition, cells: impl IntoIterator<Item = usize>) -> Result<Self> {
        let n = partition.cell_count();
        let set: BTreeSet<usize> = cells.into_iter().collect();
        if let Some(&bad) = set.iter().find(|&&c| c >= n) {
            return Err(Error::InvalidArgument(format!("cell {bad} out of range 0..{n}")));
        }
        let mut mask = vec![false; n];
        for &c in &set {
            mask[c] = true;
        }
        Ok(Self { partition, cells: set.into_iter().collect(), mask })
    }

    pub fn empty(partition: Partition) -> Self {
        Self { partition, cells: Vec::new(), mask: vec![false; partition.cell_count()] }
    }

    /// Every cell of the partition whose centre lies in the space.
    pub fn whole(partition: Partition) -> Self {
        let cells = (0..partition.cell_count())
            .filter(|&c| partition.space.contains(&partition.cell_center(c)));
        Self::new(partition, cells).expect("indices in range")
    }

    /// Cells containing the given points.
    pub fn covering<'a>(partition: Partition, points: impl IntoIterator<Item = &'a Point>) -> Self {
        let cells: Vec<usize> = points.into_iter().map(|p| partition.cell_index(p)).collect();
        Self::new(partition, cells).expect("indices in range")
    }

    /// Cells whose box satisfies a predicate.
    pub fn from_fn(partition: Partition, mut keep: impl FnMut(usize) -> bool) -> Self {
        let cells: Vec<usize> = (0..partition.cell_count()).filter(|&c| keep(c)).collect();
        Self::new(partition, cells).expect("indices in range")
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn cells(&self) -> &[usize] {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn contains_cell(&self, cell: usize) -> bool {
        self.mask.get(cell).copied().unwrap_or(false)
    }

    pub fn contains_point(&self, x: &Point) -> bool {
        self.mask[self.partition.cell_index(x)]
    }

    pub fn without(&self, cell: usize) -> Self {
        let mut out = self.clone();
        if out.mask[cell] {
            out.mask[cell] = false;
            out.cells.retain(|&c| c != cell);
        }
        out
    }

    pub fn complement(&self) -> Self {
        GridSet::from_fn(self.partition, |c| !self.mask[c])
    }

    pub fn is_subset_of(&self, other: &GridSet) -> bool {
        self.cells.iter().all(|&c| other.contains_cell(c))
    }

    /// `|A ∩ B| / |A ∪ B|`; 1 for two empty sets.
    pub fn jaccard(&self, other: &GridSet) -> f64 {
        let inter = self.cells.iter().filter(|&&c| other.contains_cell(c)).count();
        let union = self.len() + other.len() - inter;
        if union == 0 {
            1.0
        } else {
            inter as f64 / union as f64
        }
    }

    /// Distance from `x` to the union of the cells (∞ when empty).
    pub fn distance(&self, x: &Point) -> f64 {
        self.nearest(x).map_or(f64::INFINITY, |(_, d)| d)
    }

    /// A closest cell to `x` and its distance; `None` when empty.
    pub fn nearest(&self, x: &Point) -> Option<(usize, f64)> {
        if self.cells.is_empty() {
            return None;
        }
        let p = &self.partition;
        let a = p.space.ambient(x);
        let mut best = (usize::MAX, f64::INFINITY);
        if self.cells.len() <= BRUTE_FORCE_CELLS {
            for &c in &self.cells {
                let d = p.box_distance_ambient(&a, c);
                if d < best.1 {
                    best = (c, d);
                }
            }
            return Some(best);
        }
        let centre = p.axis_indices(x);
        let own = p.flatten(centre);
        if self.mask[own] {
            return Some((own, 0.0));
        }
        let k = p.cells_per_axis as i64;
        let dim = p.space.dim();
        let periodic = p.space.is_periodic();
        let side = p.min_side();
        for r in 1..=k {
            visit_ring(dim, r, &mut |off| {
                let mut idx = [0usize; 3];
                for d in 0..dim {
                    let mut i = centre[d] as i64 + off[d];
                    if periodic {
                        i = i.rem_euclid(k);
                    } else if i < 0 || i >= k {
                        return;
                    }
                    idx[d] = i as usize;
                }
                let cell = p.flatten(idx);
                if self.mask[cell] {
                    let d = p.box_distance_ambient(&a, cell);
                    if d < best.1 {
                        best = (cell, d);
                    }
                }
            });
            if best.1 <= r as f64 * side {
                break;
            }
        }
        Some(best)
    }

    /// Dense occupancy table: one `n,value` row per cell, value 0 or 1.
    pub fn to_occupancy_csv(&self) -> String {
        let mut out = String::from("n,value\n");
        for (c, &m) in self.mask.iter().enumerate() {
            out.push_str(&format!("{c},{}\n", m as u8));
        }
        out
    }
}

/// Calls `f` on every integer offset of Chebyshev norm exactly `r`.
fn visit_ring(dim: usize, r: i64, f: &mut impl FnMut([i64; 3])) {
    match dim {
        1 => {
            f([-r, 0, 0]);
            f([r, 0, 0]);
        }
        2 => {
            for i in -r..=r {
                f([i, -r, 0]);
                f([i, r, 0]);
            }
            for j in (-r + 1)..r {
                f([-r, j, 0]);
                f([r, j, 0]);
            }
        }
        _ => {
            for i in -r..=r {
                for j in -r..=r {
                    for l in -r..=r {
                        if i.abs().max(j.abs()).max(l.abs()) == r {
                            f([i, j, l]);
                        }
                    }
                }
            }
        }
    }
}
