//! Registry of the built-in dynamical systems.
//!
//! Every system is a plain value ([`SystemSpec`]) with a forward map, and
//! where they exist an inverse and a Jacobian. Maps are dispatched through a
//! closed enum so the hot iteration loops stay monomorphic.

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::phase_space::{
    frac, PhaseSpace, Point, SpaceKind, DEFAULT_DISC_RADIUS, DEFAULT_MODULUS, DEFAULT_TUBE_RADIUS,
};

/// Named numeric parameters of a system family.
pub type Params = BTreeMap<String, f64>;

/// The golden-mean rotation number `(√5−1)/2`.
pub fn golden_mean() -> f64 {
    (5f64.sqrt() - 1.0) / 2.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum MapKind {
    Identity,
    Rotation { alpha: f64 },
    Tent,
    Expanding { k: u32, eps: f64 },
    Toral { matrix: [[i64; 2]; 2] },
    Horseshoe,
    NorthSouth { beta: f64 },
    DiscA,
    DiscB,
    DiscRot { a: f64 },
    Solenoid { a: f64 },
}

/// Known invariant measure of a system, as far as it is needed for checks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MeasureTruth {
    Lebesgue,
    AbsolutelyContinuous,
    Dirac { points: Vec<Vec<f64>> },
    CircleLebesgue { radius: f64 },
    Unknown,
}

/// Known attractor of a system.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AttractorTruth {
    WholeSpace,
    Points { points: Vec<Vec<f64>> },
    Circle { radius: f64 },
    Other { description: String },
    None,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub lyapunov_exponents: Option<Vec<f64>>,
    pub invariant_measure: MeasureTruth,
    pub attractor: AttractorTruth,
    pub mixing: Option<bool>,
}

/// A discrete dynamical system on one of the built-in phase spaces.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemSpec {
    pub name: String,
    pub params: Params,
    pub space: PhaseSpace,
    pub map: MapKind,
    pub ground_truth: Option<GroundTruth>,
}

/// Result of iterating a map that may leave its domain.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Iterate {
    Inside(Point),
    /// The orbit left the domain; `at` is the index of the first iterate
    /// that is not defined.
    Escaped { at: usize },
}

impl Iterate {
    pub fn point(self) -> Option<Point> {
        match self {
            Iterate::Inside(p) => Some(p),
            Iterate::Escaped { .. } => None,
        }
    }
}

/// `f⁰x, …, f^{n−1}x`, truncated at an escape.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrbitSegment {
    pub system: String,
    pub start: Point,
    pub points: Vec<Point>,
    pub escaped_at: Option<usize>,
}

fn param(params: &Params, name: &str, default: f64) -> f64 {
    params.get(name).copied().unwrap_or(default)
}

fn invalid(system: &str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter { system: system.to_string(), reason: reason.into() }
}

fn check_known(system: &str, params: &Params, allowed: &[&str]) -> Result<()> {
    for k in params.keys() {
        if !allowed.contains(&k.as_str()) {
            return Err(invalid(system, format!("unknown parameter `{k}`")));
        }
    }
    Ok(())
}

fn integer_param(system: &str, params: &Params, name: &str, default: i64) -> Result<i64> {
    let v = param(params, name, default as f64);
    if v.fract() != 0.0 || !v.is_finite() {
        return Err(invalid(system, format!("`{name}` must be an integer, got {v}")));
    }
    Ok(v as i64)
}

fn toral_exponents(m: [[i64; 2]; 2]) -> Vec<f64> {
    let tr = (m[0][0] + m[1][1]) as f64;
    let det = (m[0][0] * m[1][1] - m[0][1] * m[1][0]) as f64;
    let disc = (tr * tr - 4.0 * det).sqrt();
    let l1 = ((tr + disc) / 2.0).abs().ln();
    let l2 = ((tr - disc) / 2.0).abs().ln();
    vec![l1.max(l2), l1.min(l2)]
}

impl SystemSpec {
    /// Builds a built-in system from its name and parameters.
    ///
    /// A parameter `exact_modulus` switches circle/torus systems with exact
    /// residue dynamics into exact mode.
    pub fn build(name: &str, params: &Params) -> Result<Self> {
        let mut params = params.clone();
        let modulus = params.remove("exact_modulus");
        let spec = Self::build_float(name, &params)?;
        match modulus {
            Some(q) => {
                if q.fract() != 0.0 || q < 3.0 {
                    return Err(invalid(name, "exact_modulus must be an odd integer ≥ 3"));
                }
                spec.with_exact_modulus(q as u64)
            }
            None => Ok(spec),
        }
    }

    fn build_float(name: &str, params: &Params) -> Result<Self> {
        let (space, map, truth) = match name {
            "identity" => {
                check_known(name, params, &["dim"])?;
                let dim = integer_param(name, params, "dim", 1)?;
                let space = match dim {
                    1 => PhaseSpace::circle(),
                    2 => PhaseSpace::torus2(),
                    _ => return Err(invalid(name, "dim must be 1 or 2")),
                };
                let truth = GroundTruth {
                    lyapunov_exponents: Some(vec![0.0; dim as usize]),
                    invariant_measure: MeasureTruth::Lebesgue,
                    attractor: AttractorTruth::WholeSpace,
                    mixing: Some(false),
                };
                (space, MapKind::Identity, truth)
            }
            "rotation" => {
                check_known(name, params, &["alpha"])?;
                let alpha = param(params, "alpha", golden_mean());
                if !(0.0..1.0).contains(&alpha) {
                    return Err(invalid(name, format!("alpha must lie in [0,1), got {alpha}")));
                }
                let truth = GroundTruth {
                    lyapunov_exponents: Some(vec![0.0]),
                    invariant_measure: MeasureTruth::Lebesgue,
                    attractor: AttractorTruth::WholeSpace,
                    mixing: Some(false),
                };
                (PhaseSpace::circle(), MapKind::Rotation { alpha }, truth)
            }
            "tent" => {
                check_known(name, params, &[])?;
                let truth = GroundTruth {
                    lyapunov_exponents: Some(vec![2f64.ln()]),
                    invariant_measure: MeasureTruth::Lebesgue,
                    attractor: AttractorTruth::WholeSpace,
                    mixing: Some(true),
                };
                (PhaseSpace::circle(), MapKind::Tent, truth)
            }
            "expanding" => {
                check_known(name, params, &["k", "eps"])?;
                let k = integer_param(name, params, "k", 2)?;
                if k < 2 {
                    return Err(invalid(name, "k must be at least 2"));
                }
                let eps = param(params, "eps", 0.0);
                if !eps.is_finite() || eps.abs() >= (k - 1) as f64 {
                    return Err(invalid(name, format!("|eps| must be below k−1 = {}", k - 1)));
                }
                let truth = GroundTruth {
                    lyapunov_exponents: (eps == 0.0).then(|| vec![(k as f64).ln()]),
                    invariant_measure: if eps == 0.0 {
                        MeasureTruth::Lebesgue
                    } else {
                        MeasureTruth::AbsolutelyContinuous
                    },
                    attractor: AttractorTruth::WholeSpace,
                    mixing: Some(true),
                };
                (PhaseSpace::circle(), MapKind::Expanding { k: k as u32, eps }, truth)
            }
            "cat_map" | "toral" => {
                let matrix = if name == "cat_map" {
                    check_known(name, params, &[])?;
                    [[2, 1], [1, 1]]
                } else {
                    check_known(name, params, &["a", "b", "c", "d"])?;
                    [
                        [integer_param(name, params, "a", 2)?, integer_param(name, params, "b", 1)?],
                        [integer_param(name, params, "c", 1)?, integer_param(name, params, "d", 1)?],
                    ]
                };
                let det = matrix[0][0] * matrix[1][1] - matrix[0][1] * matrix[1][0];
                if det.abs() != 1 {
                    return Err(invalid(name, format!("determinant must be ±1, got {det}")));
                }
                let tr = matrix[0][0] + matrix[1][1];
                let hyperbolic = if det == 1 { tr.abs() > 2 } else { tr != 0 };
                if !hyperbolic {
                    return Err(invalid(name, "matrix is not hyperbolic"));
                }
                let truth = GroundTruth {
                    lyapunov_exponents: Some(toral_exponents(matrix)),
                    invariant_measure: MeasureTruth::Lebesgue,
                    attractor: AttractorTruth::WholeSpace,
                    mixing: Some(true),
                };
                (PhaseSpace::torus2(), MapKind::Toral { matrix }, truth)
            }
            "horseshoe" => {
                check_known(name, params, &[])?;
                let truth = GroundTruth {
                    lyapunov_exponents: Some(vec![5f64.ln(), -(5f64.ln())]),
                    invariant_measure: MeasureTruth::Unknown,
                    attractor: AttractorTruth::None,
                    mixing: None,
                };
                (PhaseSpace::square(), MapKind::Horseshoe, truth)
            }
            "north_south" => {
                check_known(name, params, &["beta"])?;
                let beta = param(params, "beta", 0.5);
                if !(beta > 0.0 && beta < 1.0) {
                    return Err(invalid(name, format!("beta must lie in (0,1), got {beta}")));
                }
                let truth = GroundTruth {
                    lyapunov_exponents: Some(vec![(1.0 - beta).ln()]),
                    invariant_measure: MeasureTruth::Dirac { points: vec![vec![0.5]] },
                    attractor: AttractorTruth::Points { points: vec![vec![0.5]] },
                    mixing: None,
                };
                (PhaseSpace::circle(), MapKind::NorthSouth { beta }, truth)
            }
            "disc_a" | "disc_b" | "disc_rot" => {
                let radius = if name == "disc_rot" {
                    check_known(name, params, &["a", "radius"])?;
                    param(params, "radius", DEFAULT_DISC_RADIUS)
                } else {
                    check_known(name, params, &["radius"])?;
                    param(params, "radius", DEFAULT_DISC_RADIUS)
                };
                if !(radius > 1.0 && radius < 2.0) {
                    return Err(invalid(name, format!("radius must lie in (1,2), got {radius}")));
                }
                let (map, measure, attractor) = match name {
                    "disc_a" => (
                        MapKind::DiscA,
                        MeasureTruth::Unknown,
                        AttractorTruth::Circle { radius: 1.0 },
                    ),
                    "disc_b" => (
                        MapKind::DiscB,
                        MeasureTruth::Dirac { points: vec![vec![1.0, 0.0]] },
                        AttractorTruth::Points { points: vec![vec![1.0, 0.0]] },
                    ),
                    _ => {
                        let a = param(params, "a", TAU * golden_mean());
                        if !(0.0..TAU).contains(&a) {
                            return Err(invalid(name, format!("a must lie in [0, 2π), got {a}")));
                        }
                        (
                            MapKind::DiscRot { a },
                            MeasureTruth::CircleLebesgue { radius: 1.0 },
                            AttractorTruth::Circle { radius: 1.0 },
                        )
                    }
                };
                let truth = GroundTruth {
                    lyapunov_exponents: None,
                    invariant_measure: measure,
                    attractor,
                    mixing: None,
                };
                (PhaseSpace::disc(radius), map, truth)
            }
            "solenoid" => {
                check_known(name, params, &["a"])?;
                let a = param(params, "a", DEFAULT_TUBE_RADIUS);
                if !(a > 0.0 && a < 0.5) {
                    return Err(invalid(name, format!("a must lie in (0, 1/2), got {a}")));
                }
                let truth = GroundTruth {
                    lyapunov_exponents: Some(vec![2f64.ln(), -(4f64.ln()), -(4f64.ln())]),
                    invariant_measure: MeasureTruth::Unknown,
                    attractor: AttractorTruth::Other {
                        description: "Smale-Williams solenoid ⋂ fⁿ(S)".into(),
                    },
                    mixing: Some(true),
                };
                (PhaseSpace::solid_torus(a), MapKind::Solenoid { a }, truth)
            }
            other => return Err(Error::UnknownSystem(other.to_string())),
        };
        Ok(SystemSpec {
            name: name.to_string(),
            params: params.clone(),
            space,
            map,
            ground_truth: Some(truth),
        })
    }

    /// Switches to exact residue arithmetic modulo `q` (odd). Only systems
    /// that map residues to residues support this.
    pub fn with_exact_modulus(mut self, q: u64) -> Result<Self> {
        let ok = match &self.map {
            MapKind::Identity | MapKind::Rotation { .. } | MapKind::Tent | MapKind::Toral { .. } => {
                true
            }
            MapKind::Expanding { eps, .. } => *eps == 0.0,
            _ => false,
        };
        if !ok {
            return Err(invalid(&self.name, "exact mode is not supported by this system"));
        }
        self.space = self.space.with_exact_modulus(q)?;
        self.params.insert("exact_modulus".into(), q as f64);
        Ok(self)
    }

    /// Exact mode with the default modulus 2³¹−1, or for `tent` and
    /// `expanding` the largest prime below it of which the slope is a
    /// primitive root.
    pub fn exact(self) -> Result<Self> {
        let q = match self.map {
            MapKind::Tent => primitive_root_prime(2),
            MapKind::Expanding { k, .. } => primitive_root_prime(k as u64),
            _ => DEFAULT_MODULUS,
        };
        self.with_exact_modulus(q)
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn has_inverse(&self) -> bool {
        !matches!(self.map, MapKind::Tent | MapKind::Expanding { .. } | MapKind::Solenoid { .. })
    }

    pub fn has_jacobian(&self) -> bool {
        !matches!(self.map, MapKind::DiscA | MapKind::DiscB | MapKind::DiscRot { .. })
    }

    /// Points where a piecewise map has a corner (1D maps only).
    pub fn break_points(&self) -> &'static [f64] {
        match self.map {
            MapKind::Tent => &[0.5],
            _ => &[],
        }
    }

    /// Checks that `x` is a point of this system's space.
    pub fn check_point(&self, x: &Point) -> Result<()> {
        if x.dim() != self.dim() {
            return Err(Error::SpaceMismatch(format!(
                "{} is {}-dimensional, point has {} coordinates",
                self.name,
                self.dim(),
                x.dim()
            )));
        }
        if x.is_exact() && !self.space.is_exact() {
            return Err(Error::SpaceMismatch(format!("{} is not in exact mode", self.name)));
        }
        if !self.space.contains(x) {
            return Err(Error::OutsideSpace(x.coords().to_vec()));
        }
        Ok(())
    }

    /// One step of the map. `None` when the map is undefined at `x`
    /// (horseshoe points outside the two strips).
    pub fn forward(&self, x: &Point) -> Option<Point> {
        if let (true, Some(q)) = (x.is_exact(), self.space.exact_modulus) {
            if let Some(p) = self.forward_exact(x, q) {
                return Some(p);
            }
        }
        let c = x.coords();
        let p = match self.map {
            MapKind::Identity => x.to_float(),
            MapKind::Rotation { alpha } => Point::float(&[frac(c[0] + alpha)]),
            MapKind::Tent => {
                let y = if c[0] <= 0.5 { 2.0 * c[0] } else { 2.0 - 2.0 * c[0] };
                Point::float(&[frac(y)])
            }
            MapKind::Expanding { k, eps } => {
                Point::float(&[frac(k as f64 * c[0] + eps * (TAU * c[0]).sin() / TAU)])
            }
            MapKind::Toral { matrix: m } => Point::float(&[
                frac(m[0][0] as f64 * c[0] + m[0][1] as f64 * c[1]),
                frac(m[1][0] as f64 * c[0] + m[1][1] as f64 * c[1]),
            ]),
            MapKind::Horseshoe => return horseshoe_forward(c[0], c[1]),
            MapKind::NorthSouth { beta } => {
                Point::float(&[frac(c[0] + beta * (TAU * c[0]).sin() / TAU)])
            }
            MapKind::DiscA | MapKind::DiscB | MapKind::DiscRot { .. } => {
                let rho = c[0].hypot(c[1]);
                let phi = norm_angle(c[1].atan2(c[0]));
                let rho2 = rho * (4.0 - rho) / 3.0;
                let phi2 = match self.map {
                    MapKind::DiscA => phi + (rho - 1.0),
                    MapKind::DiscB => {
                        // same map; the second form cannot round past 2π
                        if phi < PI {
                            phi * (2.0 - phi / TAU)
                        } else {
                            let psi = TAU - phi;
                            TAU - psi * psi / TAU
                        }
                    }
                    MapKind::DiscRot { a } => phi + a,
                    _ => unreachable!(),
                };
                let phi2 = norm_angle(phi2);
                Point::float(&[rho2 * phi2.cos(), rho2 * phi2.sin()])
            }
            MapKind::Solenoid { a } => {
                let (s, co) = (TAU * c[0]).sin_cos();
                let zr = 0.5 * a + 0.25 * c[1];
                let zi = 0.25 * c[2];
                Point::float(&[frac(2.0 * c[0]), co * zr - s * zi, s * zr + co * zi])
            }
        };
        Some(p)
    }

    fn forward_exact(&self, x: &Point, q: u64) -> Option<Point> {
        let r = x.residues()?;
        let qi = q as i128;
        let p = match self.map {
            MapKind::Identity => *x,
            MapKind::Rotation { alpha } => {
                let a = ((alpha * q as f64).round() as u64) % q;
                Point::exact(&[(r[0] + a) % q], q)
            }
            MapKind::Tent => {
                let v = if 2 * r[0] < q { 2 * r[0] } else { 2 * q - 2 * r[0] };
                Point::exact(&[v % q], q)
            }
            MapKind::Expanding { k, eps } if eps == 0.0 => {
                Point::exact(&[(k as u64 * r[0]) % q], q)
            }
            MapKind::Toral { matrix: m } => {
                let (a, b) = (r[0] as i128, r[1] as i128);
                let u = (m[0][0] as i128 * a + m[0][1] as i128 * b).rem_euclid(qi);
                let v = (m[1][0] as i128 * a + m[1][1] as i128 * b).rem_euclid(qi);
                Point::exact(&[u as u64, v as u64], q)
            }
            _ => return None,
        };
        Some(p)
    }

    /// Inverse map, when the system is invertible and `x` lies in its image.
    pub fn inverse(&self, x: &Point) -> Option<Point> {
        if let (true, Some(q)) = (x.is_exact(), self.space.exact_modulus) {
            let r = x.residues()?;
            let qi = q as i128;
            return match self.map {
                MapKind::Identity => Some(*x),
                MapKind::Rotation { alpha } => {
                    let a = ((alpha * q as f64).round() as u64) % q;
                    Some(Point::exact(&[(r[0] + q - a) % q], q))
                }
                MapKind::Toral { matrix } => {
                    let inv = toral_inverse(matrix);
                    let (a, b) = (r[0] as i128, r[1] as i128);
                    let u = (inv[0][0] as i128 * a + inv[0][1] as i128 * b).rem_euclid(qi);
                    let v = (inv[1][0] as i128 * a + inv[1][1] as i128 * b).rem_euclid(qi);
                    Some(Point::exact(&[u as u64, v as u64], q))
                }
                _ => None,
            };
        }
        let c = x.coords();
        match self.map {
            MapKind::Identity => Some(x.to_float()),
            MapKind::Rotation { alpha } => Some(Point::float(&[frac(c[0] - alpha)])),
            MapKind::Toral { matrix } => {
                let m = toral_inverse(matrix);
                Some(Point::float(&[
                    frac(m[0][0] as f64 * c[0] + m[0][1] as f64 * c[1]),
                    frac(m[1][0] as f64 * c[0] + m[1][1] as f64 * c[1]),
                ]))
            }
            MapKind::Horseshoe => {
                let (u, v) = (c[0], c[1]);
                if !(0.0..=1.0).contains(&v) {
                    None
                } else if (0.2..=0.4).contains(&u) {
                    Some(Point::float(&[(5.0 * u - 1.0).clamp(0.0, 1.0), (v + 1.0) / 5.0]))
                } else if (0.6..=0.8).contains(&u) {
                    Some(Point::float(&[(4.0 - 5.0 * u).clamp(0.0, 1.0), (4.0 - v) / 5.0]))
                } else {
                    None
                }
            }
            MapKind::NorthSouth { beta } => Some(Point::float(&[north_south_inverse(beta, c[0])])),
            MapKind::DiscA | MapKind::DiscB | MapKind::DiscRot { .. } => {
                let rho2 = c[0].hypot(c[1]);
                let phi2 = norm_angle(c[1].atan2(c[0]));
                // ρ* = ρ(4−ρ)/3 is increasing on [0,2]
                let rho = 2.0 - (4.0 - 3.0 * rho2).max(0.0).sqrt();
                let phi = match self.map {
                    MapKind::DiscA => phi2 - (rho - 1.0),
                    MapKind::DiscB => TAU * (1.0 - (1.0 - phi2 / TAU).max(0.0).sqrt()),
                    MapKind::DiscRot { a } => phi2 - a,
                    _ => unreachable!(),
                };
                let phi = norm_angle(phi);
                Some(Point::float(&[rho * phi.cos(), rho * phi.sin()]))
            }
            MapKind::Tent | MapKind::Expanding { .. } | MapKind::Solenoid { .. } => None,
        }
    }

    /// Derivative matrix of the forward map at `x` (in the space's
    /// coordinates). `None` if the system has none or `x` is outside the
    /// map's domain.
    pub fn jacobian(&self, x: &Point) -> Option<DMatrix<f64>> {
        let c = x.coords();
        let m = match self.map {
            MapKind::Identity => DMatrix::identity(self.dim(), self.dim()),
            MapKind::Rotation { .. } => DMatrix::from_element(1, 1, 1.0),
            MapKind::Tent => DMatrix::from_element(1, 1, if c[0] <= 0.5 { 2.0 } else { -2.0 }),
            MapKind::Expanding { k, eps } => {
                DMatrix::from_element(1, 1, k as f64 + eps * (TAU * c[0]).cos())
            }
            MapKind::Toral { matrix: m } => DMatrix::from_row_slice(
                2,
                2,
                &[m[0][0] as f64, m[0][1] as f64, m[1][0] as f64, m[1][1] as f64],
            ),
            MapKind::Horseshoe => {
                let y = c[1];
                if !(0.0..=1.0).contains(&c[0]) {
                    return None;
                }
                if (0.2..=0.4).contains(&y) {
                    DMatrix::from_row_slice(2, 2, &[0.2, 0.0, 0.0, 5.0])
                } else if (0.6..=0.8).contains(&y) {
                    DMatrix::from_row_slice(2, 2, &[-0.2, 0.0, 0.0, -5.0])
                } else {
                    return None;
                }
            }
            MapKind::NorthSouth { beta } => {
                DMatrix::from_element(1, 1, 1.0 + beta * (TAU * c[0]).cos())
            }
            MapKind::Solenoid { .. } => {
                let (s, co) = (TAU * c[0]).sin_cos();
                let img = self.forward(x)?;
                let (u2, v2) = (img.coords()[1], img.coords()[2]);
                DMatrix::from_row_slice(
                    3,
                    3,
                    &[
                        2.0,
                        0.0,
                        0.0,
                        -TAU * v2,
                        0.25 * co,
                        -0.25 * s,
                        TAU * u2,
                        0.25 * s,
                        0.25 * co,
                    ],
                )
            }
            MapKind::DiscA | MapKind::DiscB | MapKind::DiscRot { .. } => return None,
        };
        Some(m)
    }

    /// `fⁿ(x)`.
    pub fn iterate(&self, x: &Point, n: usize) -> Result<Iterate> {
        self.check_point(x)?;
        let mut p = *x;
        for j in 0..n {
            match self.forward(&p) {
                Some(next) => p = next,
                None => return Ok(Iterate::Escaped { at: j + 1 }),
            }
        }
        Ok(Iterate::Inside(p))
    }

    /// `f⁻ⁿ(x)` for invertible systems.
    pub fn iterate_inverse(&self, x: &Point, n: usize) -> Result<Iterate> {
        self.check_point(x)?;
        if !self.has_inverse() {
            return Err(Error::MissingCapability(self.name.clone(), "inverse"));
        }
        let mut p = *x;
        for j in 0..n {
            match self.inverse(&p) {
                Some(prev) => p = prev,
                None => return Ok(Iterate::Escaped { at: j + 1 }),
            }
        }
        Ok(Iterate::Inside(p))
    }

    /// The first `n` points of the forward orbit of `x`.
    pub fn orbit(&self, x: &Point, n: usize) -> Result<OrbitSegment> {
        self.check_point(x)?;
        let mut points = Vec::with_capacity(n.min(1 << 24));
        let mut escaped_at = None;
        let mut p = *x;
        for j in 0..n {
            points.push(p);
            if j + 1 == n {
                break;
            }
            match self.forward(&p) {
                Some(next) => p = next,
                None => {
                    escaped_at = Some(j + 1);
                    break;
                }
            }
        }
        Ok(OrbitSegment { system: self.name.clone(), start: *x, points, escaped_at })
    }

    /// Lazy forward orbit `x, f(x), f²(x), …`; ends at an escape.
    pub fn trajectory(&self, x: Point) -> Trajectory<'_> {
        Trajectory { system: self, next: Some(x) }
    }

    /// A generic default start point for this system.
    pub fn default_start(&self) -> Point {
        let p = match self.space.kind {
            SpaceKind::Circle => Point::float(&[0.1234567]),
            SpaceKind::Torus2 => Point::float(&[0.1234567, 0.7654321]),
            SpaceKind::Square => horseshoe_cylinder_point(&[0, 1, 1, 0, 1, 0, 0, 1, 1, 1, 0, 1, 0, 0, 0, 1, 1, 0, 1, 0])
                .expect("nonempty code"),
            SpaceKind::Disc => Point::float(&[0.3, 0.2]),
            SpaceKind::SolidTorus => Point::float(&[0.1234567, 0.05, -0.03]),
        };
        if self.space.is_exact() {
            self.space.to_exact(&p).expect("periodic exact space")
        } else {
            p
        }
    }
}

pub struct Trajectory<'a> {
    system: &'a SystemSpec,
    next: Option<Point>,
}

impl Iterator for Trajectory<'_> {
    type Item = Point;

    fn next(&mut self) -> Option<Point> {
        let cur = self.next?;
        self.next = self.system.forward(&cur);
        Some(cur)
    }
}

fn norm_angle(phi: f64) -> f64 {
    let p = phi.rem_euclid(TAU);
    if p >= TAU {
        0.0
    } else {
        p
    }
}

fn toral_inverse(m: [[i64; 2]; 2]) -> [[i64; 2]; 2] {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    [[det * m[1][1], -det * m[0][1]], [-det * m[1][0], det * m[0][0]]]
}

fn horseshoe_forward(x: f64, y: f64) -> Option<Point> {
    if !(0.0..=1.0).contains(&x) {
        return None;
    }
    if (0.2..=0.4).contains(&y) {
        Some(Point::float(&[(x + 1.0) / 5.0, (5.0 * y - 1.0).clamp(0.0, 1.0)]))
    } else if (0.6..=0.8).contains(&y) {
        Some(Point::float(&[(4.0 - x) / 5.0, (4.0 - 5.0 * y).clamp(0.0, 1.0)]))
    } else {
        None
    }
}

/// Solves `y + β sin(2πy)/2π = x` for `y ∈ [0,1)`; the lift is increasing.
fn north_south_inverse(beta: f64, x: f64) -> f64 {
    let g = |y: f64| y + beta * (TAU * y).sin() / TAU - x;
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut y = x;
    for _ in 0..100 {
        let gy = g(y);
        if gy.abs() < 1e-16 {
            break;
        }
        if gy > 0.0 {
            hi = y;
        } else {
            lo = y;
        }
        let step = y - gy / (1.0 + beta * (TAU * y).cos());
        y = if step > lo && step < hi { step } else { 0.5 * (lo + hi) };
        if hi - lo < 1e-17 {
            break;
        }
    }
    frac(y)
}

/// A point of the linear horseshoe whose forward itinerary through the
/// strips `T⁻¹(Q₀)`, `T⁻¹(Q₁)` starts with `code`, and whose backward
/// itinerary through `Q₀`, `Q₁` follows the same word. It is the centre of
/// the corresponding square cylinder, so it survives `code.len()` iterates.
pub fn horseshoe_cylinder_point(code: &[u8]) -> Result<Point> {
    if code.is_empty() {
        return Err(Error::InvalidArgument("cylinder code must be nonempty".into()));
    }
    if let Some(&s) = code.iter().find(|&&s| s > 1) {
        return Err(Error::InvalidArgument(format!("cylinder symbols are 0 or 1, got {s}")));
    }
    // Both coordinates pull back through the same affine contractions:
    // symbol 0: v ↦ (v+1)/5, symbol 1: v ↦ (4−v)/5.
    let v = code.iter().rev().fold(0.5, |v, &s| if s == 0 { (v + 1.0) / 5.0 } else { (4.0 - v) / 5.0 });
    Ok(Point::float(&[v, v]))
}

fn pow_mod(b: u64, mut e: u64, q: u64) -> u64 {
    let mut acc = 1u128;
    let mut base = (b % q) as u128;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % q as u128;
        }
        base = base * base % q as u128;
        e >>= 1;
    }
    acc as u64
}

fn prime_factors(mut m: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= m {
        if m % p == 0 {
            out.push(p);
            while m % p == 0 {
                m /= p;
            }
        }
        p += 1;
    }
    if m > 1 {
        out.push(m);
    }
    out
}

/// Largest prime `q ≤ 2³¹−1` of which `k` is a primitive root.
pub fn primitive_root_prime(k: u64) -> u64 {
    let mut q = DEFAULT_MODULUS;
    loop {
        if k % q != 0 && prime_factors(q) == [q] && prime_factors(q - 1).iter().all(|&f| pow_mod(k, (q - 1) / f, q) != 1) {
            return q;
        }
        q -= 2;
    }
}

/// Entry of the built-in system catalogue.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CatalogEntry {
    pub name: String,
    pub space: SpaceKind,
    pub params: Vec<ParamSchema>,
    pub exact_mode: bool,
    pub ground_truth: GroundTruth,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamSchema {
    pub name: String,
    pub default: f64,
    pub constraint: String,
}

fn ps(name: &str, default: f64, constraint: &str) -> ParamSchema {
    ParamSchema { name: name.into(), default, constraint: constraint.into() }
}

/// Names, parameter schemas and ground truth (at default parameters) of
/// every built-in system.
pub fn catalog() -> Vec<CatalogEntry> {
    let entries: Vec<(&str, Vec<ParamSchema>)> = vec![
        ("identity", vec![ps("dim", 1.0, "1 or 2")]),
        ("rotation", vec![ps("alpha", golden_mean(), "0 <= alpha < 1")]),
        ("tent", vec![]),
        ("expanding", vec![ps("k", 2.0, "integer >= 2"), ps("eps", 0.0, "|eps| < k-1")]),
        ("cat_map", vec![]),
        (
            "toral",
            vec![
                ps("a", 2.0, "integer"),
                ps("b", 1.0, "integer"),
                ps("c", 1.0, "integer"),
                ps("d", 1.0, "integer; |ad-bc| = 1, hyperbolic"),
            ],
        ),
        ("horseshoe", vec![]),
        ("north_south", vec![ps("beta", 0.5, "0 < beta < 1")]),
        ("disc_a", vec![ps("radius", DEFAULT_DISC_RADIUS, "1 < radius < 2")]),
        ("disc_b", vec![ps("radius", DEFAULT_DISC_RADIUS, "1 < radius < 2")]),
        (
            "disc_rot",
            vec![ps("a", TAU * golden_mean(), "0 <= a < 2*pi"), ps("radius", DEFAULT_DISC_RADIUS, "1 < radius < 2")],
        ),
        ("solenoid", vec![ps("a", DEFAULT_TUBE_RADIUS, "0 < a < 1/2")]),
    ];
    entries
        .into_iter()
        .map(|(name, params)| {
            let sys = SystemSpec::build(name, &Params::new()).expect("defaults are valid");
            CatalogEntry {
                name: name.to_string(),
                space: sys.space.kind,
                exact_mode: sys.clone().exact().is_ok(),
                params,
                ground_truth: sys.ground_truth.expect("built-ins carry ground truth"),
            }
        })
        .collect()
}
