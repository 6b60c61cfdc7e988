//! Experiment configuration, execution and reporting behind the `ergolab`
//! command line.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::attractors::{cells_meeting_circle, grid_samples, minimal_statistical_attractor_with, srb_like_estimate, AttractorOptions};
use crate::entropy_mixing::{
    correlation_series, default_window, entropy_estimate, mixing_verdict, pesin_residual, MixingVerdict,
};
use crate::ergodic_stats::birkhoff_average;
use crate::error::{Error, Result};
use crate::lyapunov::{scalar_exponent, spectrum_qr, QrOptions};
use crate::measures::{default_family, invariance_residual, weak_star_distance, HistogramMeasure, Measure};
use crate::phase_space::{GridSet, Partition, Point, SpaceKind};
use crate::systems::{horseshoe_cylinder_point, AttractorTruth, MeasureTruth, Params, SystemSpec};

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "ERGOLAB_THREADS";

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Orbit,
    Measure,
    Birkhoff,
    Lyapunov,
    Attractor,
    SrbLike,
    Mixing,
    Entropy,
    All,
}

impl Task {
    const EACH: [Task; 8] = [
        Task::Orbit,
        Task::Measure,
        Task::Birkhoff,
        Task::Lyapunov,
        Task::Attractor,
        Task::SrbLike,
        Task::Mixing,
        Task::Entropy,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Task::Orbit => "orbit",
            Task::Measure => "measure",
            Task::Birkhoff => "birkhoff",
            Task::Lyapunov => "lyapunov",
            Task::Attractor => "attractor",
            Task::SrbLike => "srb_like",
            Task::Mixing => "mixing",
            Task::Entropy => "entropy",
            Task::All => "all",
        }
    }
}

fn default_n() -> usize {
    10_000
}
fn default_grid_k() -> usize {
    16
}
fn default_samples_per_axis() -> usize {
    16
}
fn default_truncation() -> usize {
    crate::measures::DEFAULT_TRUNCATION
}
fn default_eps() -> f64 {
    crate::ergodic_stats::DEFAULT_CLUSTER_EPS
}
fn default_alpha() -> f64 {
    1.0
}
fn default_tol() -> f64 {
    0.02
}
fn default_stat_samples() -> usize {
    1_000_000
}
fn default_n_max() -> usize {
    24
}
fn default_partition_k() -> usize {
    2
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub system: String,
    #[serde(default)]
    pub params: Params,
    pub task: Task,
    /// Orbit length.
    #[serde(default = "default_n")]
    pub n: usize,
    /// Iterates discarded before averaging (attractor search, QR
    /// exponents); defaults to `n/10`.
    #[serde(default)]
    pub burn_in: Option<usize>,
    /// Cells per axis of the attractor and SRB grids.
    #[serde(default = "default_grid_k")]
    pub grid_k: usize,
    #[serde(default = "default_samples_per_axis")]
    pub samples_per_axis: usize,
    /// Number of test functions in the weak* metric.
    #[serde(default = "default_truncation")]
    pub truncation: usize,
    /// SRB clustering threshold.
    #[serde(default = "default_eps")]
    pub eps: f64,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    /// Mixing tolerance and ground-truth check tolerance.
    #[serde(default = "default_tol")]
    pub tol: f64,
    /// Grid points sampling Lebesgue measure for `mixing` and `entropy`.
    #[serde(default = "default_stat_samples")]
    pub stat_samples: usize,
    /// Correlation and itinerary length for `mixing` and `entropy`.
    #[serde(default = "default_n_max")]
    pub n_max: usize,
    /// Cells per axis of the mixing sets and the entropy partition.
    #[serde(default = "default_partition_k")]
    pub partition_k: usize,
    /// Start point; drawn from `seed` when absent.
    #[serde(default)]
    pub x0: Option<Vec<f64>>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub exact_mode: bool,
}

impl ExperimentConfig {
    /// A config with every optional field at its default.
    pub fn new(system: &str, task: Task) -> Self {
        Self {
            system: system.to_string(),
            params: Params::new(),
            task,
            n: default_n(),
            burn_in: None,
            grid_k: default_grid_k(),
            samples_per_axis: default_samples_per_axis(),
            truncation: default_truncation(),
            eps: default_eps(),
            alpha: default_alpha(),
            tol: default_tol(),
            stat_samples: default_stat_samples(),
            n_max: default_n_max(),
            partition_k: default_partition_k(),
            x0: None,
            seed: 0,
            output_dir: None,
            exact_mode: false,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Every numeric parameter must be positive; `n = 0` is allowed for the
    /// orbit task only.
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::Config(format!("`{what}` must be positive")));
        if self.n == 0 && self.task != Task::Orbit {
            return bad("n");
        }
        for (name, v) in [
            ("grid_k", self.grid_k),
            ("samples_per_axis", self.samples_per_axis),
            ("truncation", self.truncation),
            ("stat_samples", self.stat_samples),
            ("n_max", self.n_max),
            ("partition_k", self.partition_k),
        ] {
            if v == 0 {
                return bad(name);
            }
        }
        for (name, v) in [("eps", self.eps), ("alpha", self.alpha), ("tol", self.tol)] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(name);
            }
        }
        if self.alpha > 1.0 {
            return Err(Error::Config("`alpha` may not exceed 1".into()));
        }
        if self.burn_in.is_some_and(|b| b >= self.n.max(1)) {
            return Err(Error::Config("`burn_in` must be below `n`".into()));
        }
        self.system_spec()?;
        Ok(())
    }

    pub fn system_spec(&self) -> Result<SystemSpec> {
        let sys = SystemSpec::build(&self.system, &self.params).map_err(|e| Error::Config(e.to_string()))?;
        if self.exact_mode && !sys.space.is_exact() {
            return sys.exact().map_err(|e| Error::Config(e.to_string()));
        }
        Ok(sys)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrbitResult {
    /// `f⁰x, …, fⁿx`, truncated at an escape.
    pub points: Vec<Point>,
    pub escaped_at: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureResult {
    /// Residual of the uniform grid histogram.
    pub lebesgue_invariance_residual: f64,
    /// Weak* distance from `σ_{n,x}` to the uniform grid histogram.
    pub empirical_to_lebesgue: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BirkhoffResult {
    /// Index of the observable in the default test-function family.
    pub observable: usize,
    pub checkpoints: Vec<usize>,
    pub values: Vec<f64>,
    pub escaped_at: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LyapunovResult {
    pub exponents: Vec<f64>,
    pub n: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttractorResult {
    pub candidate: Vec<usize>,
    pub resolution: usize,
    pub topological_basin_fraction: f64,
    pub statistical_basin_fraction: f64,
    pub alpha_attained: bool,
    pub samples: usize,
    pub burn_in: usize,
    pub tolerance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SrbClusterSummary {
    pub basin_fraction: f64,
    pub members: usize,
    pub invariance_residual: f64,
    pub residual_bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SrbResult {
    pub clusters: Vec<SrbClusterSummary>,
    pub support_cells: Vec<usize>,
    pub resolution: usize,
    pub escaped_fraction: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixingResult {
    pub values: Vec<f64>,
    pub cesaro: Vec<f64>,
    pub target: f64,
    pub verdict: MixingVerdict,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyResult {
    pub h: Vec<f64>,
    pub slope: f64,
    pub n_reliable: usize,
    pub warning: Option<String>,
    /// Sample mean of the sum of positive exponents, when the system has a
    /// derivative.
    pub positive_exponent_sum: Option<f64>,
    pub pesin_residual: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TaskResults {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub orbit: Option<OrbitResult>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measure: Option<MeasureResult>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub birkhoff: Option<BirkhoffResult>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lyapunov: Option<LyapunovResult>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub attractor: Option<AttractorResult>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub srb_like: Option<SrbResult>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mixing: Option<MixingResult>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entropy: Option<EntropyResult>,
}

/// One row of the ground-truth comparison table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub quantity: String,
    pub expected: String,
    pub observed: String,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub version: String,
    /// Seconds; the only field that differs between identical runs.
    pub wall_time: f64,
    pub start: Point,
    pub results: TaskResults,
    /// Tasks that do not apply to the system, with the reason.
    pub skipped: BTreeMap<String, String>,
    pub checks: Vec<Check>,
    pub checks_passed: bool,
}

impl ExperimentReport {
    /// Pretty JSON with keys sorted at every level.
    pub fn to_json(&self) -> Result<String> {
        let v = serde_json::to_value(self)?;
        Ok(serde_json::to_string_pretty(&v)? + "\n")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// `(file name, contents)` of every CSV series in the report.
    pub fn csv_files(&self) -> Vec<(String, String)> {
        let r = &self.results;
        let mut out = Vec::new();
        if let Some(o) = &r.orbit {
            let dim = o.points.first().map_or(0, |p| p.dim());
            for d in 0..dim {
                out.push((format!("orbit_x{d}.csv"), csv_rows(o.points.iter().map(|p| p.coords()[d]).enumerate())));
            }
        }
        if let Some(b) = &r.birkhoff {
            out.push(("birkhoff.csv".into(), csv_rows(b.checkpoints.iter().copied().zip(b.values.iter().copied()))));
        }
        if let Some(l) = &r.lyapunov {
            out.push(("lyapunov.csv".into(), csv_rows(l.exponents.iter().copied().enumerate().map(|(i, v)| (i + 1, v)))));
        }
        if let Some(a) = &r.attractor {
            out.push(("attractor_cells.csv".into(), occupancy(&a.candidate, a.resolution, &self.start)));
        }
        if let Some(s) = &r.srb_like {
            out.push(("srb_support.csv".into(), occupancy(&s.support_cells, s.resolution, &self.start)));
        }
        if let Some(m) = &r.mixing {
            out.push(("correlation.csv".into(), csv_rows(m.values.iter().copied().enumerate())));
            out.push(("cesaro.csv".into(), csv_rows(m.cesaro.iter().copied().enumerate())));
        }
        if let Some(e) = &r.entropy {
            out.push(("entropy.csv".into(), csv_rows(e.h.iter().copied().enumerate().map(|(i, v)| (i + 1, v)))));
        }
        out
    }

    /// Writes `report.json` and the CSV series into `dir`, each file through
    /// a temporary file that is renamed into place.
    pub fn write_to(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let mut files = vec![("report.json".to_string(), self.to_json()?)];
        files.extend(self.csv_files());
        let mut written = Vec::with_capacity(files.len());
        for (name, body) in files {
            let path = dir.join(name);
            let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
            tmp.write_all(body.as_bytes())?;
            tmp.as_file().sync_all()?;
            tmp.persist(&path).map_err(|e| Error::Io(e.error))?;
            written.push(path);
        }
        Ok(written)
    }
}

fn csv_rows(rows: impl Iterator<Item = (usize, f64)>) -> String {
    let mut s = String::from("n,value\n");
    for (n, v) in rows {
        s.push_str(&format!("{n},{v}\n"));
    }
    s
}

fn occupancy(cells: &[usize], resolution: usize, start: &Point) -> String {
    let total = resolution.pow(start.dim() as u32);
    let mut mask = vec![0.0; total];
    for &c in cells {
        if c < total {
            mask[c] = 1.0;
        }
    }
    csv_rows(mask.into_iter().enumerate())
}

/// Reads [`THREADS_ENV`]; `None` when unset.
pub fn threads_from_env() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Error::Config(format!("{THREADS_ENV} must be a positive integer, got `{v}`"))),
        },
    }
}

fn random_start(system: &SystemSpec, rng: &mut ChaCha8Rng) -> Result<Point> {
    let p = if system.space.kind == SpaceKind::Square {
        let code: Vec<u8> = (0..20).map(|_| rng.gen_range(0..2u8)).collect();
        horseshoe_cylinder_point(&code)?
    } else {
        let (lo, hi) = system.space.bounding_box();
        loop {
            let mut a = [0.0; 3];
            for d in 0..system.dim() {
                a[d] = rng.gen_range(lo[d]..hi[d]);
            }
            let p = system.space.from_ambient(a);
            if system.space.contains(&p) {
                break p;
            }
        }
    };
    if system.space.is_exact() {
        system.space.to_exact(&p)
    } else {
        Ok(p)
    }
}

fn start_point(cfg: &ExperimentConfig, system: &SystemSpec) -> Result<Point> {
    let p = match &cfg.x0 {
        Some(c) => {
            if c.len() != system.dim() {
                return Err(Error::Config(format!("`x0` needs {} coordinates", system.dim())));
            }
            let p = Point::float(c);
            if system.space.is_exact() {
                system.space.to_exact(&p).map_err(|e| Error::Config(e.to_string()))?
            } else {
                p
            }
        }
        None => random_start(system, &mut ChaCha8Rng::seed_from_u64(cfg.seed))?,
    };
    system.check_point(&p).map_err(|e| Error::Config(format!("`x0`: {e}")))?;
    Ok(p)
}

fn skippable(e: &Error) -> bool {
    matches!(e, Error::MissingCapability(..) | Error::UnsupportedSpace { .. } | Error::Escaped(_))
}

struct Runner<'a> {
    cfg: &'a ExperimentConfig,
    system: SystemSpec,
    start: Point,
    results: TaskResults,
    checks: Vec<Check>,
}

impl Runner<'_> {
    fn samples(&self) -> Vec<Point> {
        self.system.space.lebesgue_grid(self.cfg.samples_per_axis)
    }

    /// Long float orbits of non-invertible maps collapse onto a few dyadic
    /// points, so long-run checks need exact arithmetic there.
    fn trusted(&self) -> bool {
        self.system.space.is_exact() || self.system.has_inverse()
    }

    fn check(&mut self, quantity: String, expected: String, observed: String, pass: bool) {
        self.checks.push(Check { quantity, expected, observed, pass });
    }

    fn run_task(&mut self, task: Task) -> Result<()> {
        let cfg = self.cfg;
        let sys = &self.system;
        let truth = sys.ground_truth.clone();
        match task {
            Task::Orbit => {
                let o = sys.orbit(&self.start, cfg.n + 1)?;
                self.results.orbit = Some(OrbitResult { points: o.points, escaped_at: o.escaped_at });
            }
            Task::Measure => {
                let part = Partition::new(sys.space, cfg.grid_k)?;
                let family = default_family(&sys.space);
                let uniform = Measure::Histogram(HistogramMeasure::uniform(part));
                let residual = invariance_residual(sys, &uniform, &family, cfg.truncation)?;
                let orbit = sys.orbit(&self.start, cfg.n)?;
                let sigma = Measure::empirical(&sys.space, orbit.points)?;
                let d = weak_star_distance(&sigma, &uniform, &family, cfg.truncation)?;
                if truth.as_ref().is_some_and(|t| t.invariant_measure == MeasureTruth::Lebesgue) {
                    self.check(
                        "lebesgue invariance residual".into(),
                        format!("< {}", cfg.tol),
                        residual.to_string(),
                        residual < cfg.tol,
                    );
                }
                self.results.measure =
                    Some(MeasureResult { lebesgue_invariance_residual: residual, empirical_to_lebesgue: d });
            }
            Task::Birkhoff => {
                let family = default_family(&sys.space);
                let observable = 1;
                let series = birkhoff_average(sys, &self.start, |x| family.eval(observable, x), cfg.n, None)?;
                if let (true, Some(t), Some(last)) = (self.trusted(), truth.as_ref(), series.last()) {
                    if t.invariant_measure == MeasureTruth::Lebesgue && sys.space.is_periodic() {
                        let grid = sys.space.lebesgue_grid(if sys.dim() == 1 { 4096 } else { 64 });
                        let mean = grid.iter().map(|x| family.eval(observable, x)).sum::<f64>() / grid.len() as f64;
                        self.check(
                            "birkhoff average".into(),
                            format!("{mean} ± {}", cfg.tol),
                            last.to_string(),
                            (last - mean).abs() <= cfg.tol,
                        );
                    }
                }
                self.results.birkhoff = Some(BirkhoffResult {
                    observable,
                    checkpoints: series.checkpoints,
                    values: series.values,
                    escaped_at: series.escaped_at,
                });
            }
            Task::Lyapunov => {
                let x = self.start.to_float();
                let exponents = if sys.dim() == 1 {
                    vec![scalar_exponent(sys, &x, cfg.n)?]
                } else {
                    spectrum_qr(sys, &x, cfg.n, &QrOptions { transient: cfg.burn_in, ..QrOptions::default() })?.exponents
                };
                if let Some(&e) = exponents.iter().find(|e| !e.is_finite()) {
                    return Err(Error::NonFinite(e));
                }
                if let Some(expected) = truth.and_then(|t| t.lyapunov_exponents) {
                    let pass = expected.len() == exponents.len()
                        && expected.iter().zip(&exponents).all(|(a, b)| (a - b).abs() <= cfg.tol);
                    self.check("lyapunov exponents".into(), format!("{expected:?}"), format!("{exponents:?}"), pass);
                }
                self.results.lyapunov = Some(LyapunovResult { exponents, n: cfg.n });
            }
            Task::Attractor => {
                let part = Partition::new(sys.space, cfg.grid_k)?;
                let samples = self.samples();
                let opts = AttractorOptions { burn_in: cfg.burn_in, tolerance: None };
                let rep = minimal_statistical_attractor_with(sys, &samples, cfg.n, cfg.alpha, &part, &opts)?;
                if let Some(t) = truth {
                    self.attractor_checks(&t.attractor, &rep.candidate, rep.statistical_basin_fraction, samples.len());
                }
                self.results.attractor = Some(AttractorResult {
                    candidate: rep.candidate.cells().to_vec(),
                    resolution: rep.resolution,
                    topological_basin_fraction: rep.topological_basin_fraction,
                    statistical_basin_fraction: rep.statistical_basin_fraction,
                    alpha_attained: rep.alpha_attained,
                    samples: samples.len(),
                    burn_in: rep.burn_in,
                    tolerance: rep.tolerance,
                });
            }
            Task::SrbLike => {
                let part = Partition::new(sys.space, cfg.grid_k)?;
                let family = default_family(&sys.space);
                let samples = self.samples();
                let rep = srb_like_estimate(sys, &samples, cfg.n, &family, cfg.truncation, cfg.eps, &part)?;
                if let Some(MeasureTruth::Dirac { points }) = truth.map(|t| t.invariant_measure) {
                    let frac = rep.clusters.first().map_or(0.0, |c| c.basin_fraction);
                    let pass = points.len() == 1 && rep.clusters.len() == 1 && frac >= 1.0 - 2.0 / samples.len() as f64;
                    self.check(
                        "srb-like clusters".into(),
                        format!("1 cluster, fraction ≥ {}", 1.0 - 2.0 / samples.len() as f64),
                        format!("{} clusters, fraction {frac}", rep.clusters.len()),
                        pass,
                    );
                }
                self.results.srb_like = Some(SrbResult {
                    clusters: rep
                        .clusters
                        .iter()
                        .map(|c| SrbClusterSummary {
                            basin_fraction: c.basin_fraction,
                            members: c.members,
                            invariance_residual: c.invariance_residual,
                            residual_bound: c.residual_bound,
                        })
                        .collect(),
                    support_cells: rep.support_cells.cells().to_vec(),
                    resolution: cfg.grid_k,
                    escaped_fraction: rep.escaped_fraction,
                });
            }
            Task::Mixing => {
                let part = Partition::new(sys.space, cfg.partition_k)?;
                let half = cfg.partition_k.div_ceil(2);
                let a = GridSet::from_fn(part, |c| c % cfg.partition_k < half);
                let samples = grid_samples(&sys.space, cfg.stat_samples);
                let series = correlation_series(sys, &a, &a, &samples, cfg.n_max)?;
                let verdict = mixing_verdict(&series, cfg.tol, default_window(&series));
                let lebesgue = truth.as_ref().is_some_and(|t| t.invariant_measure == MeasureTruth::Lebesgue);
                if let (true, Some(m)) = (lebesgue, truth.and_then(|t| t.mixing)) {
                    let pass = m == (verdict == MixingVerdict::MixingConsistent);
                    self.check(
                        "mixing verdict".into(),
                        if m { "mixing-consistent" } else { "not mixing-consistent" }.into(),
                        format!("{verdict:?}"),
                        pass,
                    );
                }
                self.results.mixing =
                    Some(MixingResult { values: series.values, cesaro: series.cesaro, target: series.target, verdict });
            }
            Task::Entropy => {
                let part = Partition::new(sys.space, cfg.partition_k)?;
                let samples = grid_samples(&sys.space, cfg.stat_samples);
                let (est, chi, residual) = if sys.has_jacobian() {
                    let p = pesin_residual(sys, &samples, &part, cfg.n_max)?;
                    (p.entropy, Some(p.positive_exponent_sum), Some(p.residual))
                } else {
                    (entropy_estimate(sys, &samples, &part, cfg.n_max)?, None, None)
                };
                if let Some(r) = residual {
                    self.check(
                        "margulis-ruelle inequality".into(),
                        "slope − Σχ⁺ ≤ 0.05".into(),
                        r.to_string(),
                        r <= 0.05,
                    );
                }
                self.results.entropy = Some(EntropyResult {
                    h: est.h,
                    slope: est.slope,
                    n_reliable: est.n_reliable,
                    warning: est.warning,
                    positive_exponent_sum: chi,
                    pesin_residual: residual,
                });
            }
            Task::All => unreachable!("expanded by the caller"),
        }
        Ok(())
    }

    fn attractor_checks(&mut self, truth: &AttractorTruth, candidate: &GridSet, basin: f64, samples: usize) {
        let part = *candidate.partition();
        match truth {
            AttractorTruth::Points { points } => {
                let cells: Vec<usize> = points.iter().map(|p| part.cell_index(&Point::float(p))).collect();
                let pass = cells.iter().all(|&c| candidate.contains_cell(c)) && candidate.len() <= cells.len();
                self.check("attractor cells".into(), format!("{cells:?}"), format!("{:?}", candidate.cells()), pass);
                let bound = self.cfg.alpha - 2.0 / samples as f64;
                self.check(
                    "statistical basin fraction".into(),
                    format!("≥ {bound}"),
                    basin.to_string(),
                    basin >= bound,
                );
            }
            AttractorTruth::Circle { radius } => {
                let ring = cells_meeting_circle(&part, *radius);
                self.check(
                    "attractor near circle".into(),
                    format!("within the {} cells meeting |z| = {radius}", ring.len()),
                    format!("{} cells", candidate.len()),
                    candidate.is_subset_of(&ring) && !candidate.is_empty(),
                );
            }
            AttractorTruth::WholeSpace if samples >= part.cell_count() && self.trusted() => {
                let inside = GridSet::covering(part, &self.system.space.lebesgue_grid(part.cells_per_axis));
                let covered = candidate.len() as f64 / inside.len() as f64;
                self.check(
                    "attractor covers the space".into(),
                    format!("≥ {}", 1.0 - self.cfg.tol),
                    covered.to_string(),
                    covered >= 1.0 - self.cfg.tol,
                );
            }
            _ => {}
        }
    }
}

/// Runs the configured task (every task for `all`; those that do not apply
/// to the system are listed as skipped).
pub fn run(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let clock = Instant::now();
    let system = cfg.system_spec()?;
    let start = start_point(cfg, &system)?;
    let mut runner = Runner { cfg, system, start, results: TaskResults::default(), checks: Vec::new() };
    let mut skipped = BTreeMap::new();
    if cfg.task == Task::All {
        for t in Task::EACH {
            match runner.run_task(t) {
                Ok(()) => {}
                Err(e) if skippable(&e) => {
                    skipped.insert(t.name().to_string(), e.to_string());
                }
                Err(e) => return Err(e),
            }
        }
    } else {
        runner.run_task(cfg.task)?;
    }
    let checks_passed = runner.checks.iter().all(|c| c.pass);
    Ok(ExperimentReport {
        config: cfg.clone(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        wall_time: clock.elapsed().as_secs_f64(),
        start,
        results: runner.results,
        skipped,
        checks: runner.checks,
        checks_passed,
    })
}

/// Names of the built-in demonstrations.
pub const DEMOS: [&str; 7] = ["cat_map", "horseshoe", "tent", "rotation", "north_south", "disc_b", "solenoid"];

/// A ready-made configuration for `ergolab demo <name>`.
pub fn demo_config(name: &str) -> Result<ExperimentConfig> {
    let cfg = match name {
        "cat_map" => ExperimentConfig::new("cat_map", Task::Lyapunov),
        "horseshoe" => ExperimentConfig {
            n: 20,
            burn_in: Some(0),
            ..ExperimentConfig::new("horseshoe", Task::Lyapunov)
        },
        "tent" => ExperimentConfig { stat_samples: 100_000, ..ExperimentConfig::new("tent", Task::Mixing) },
        "rotation" => ExperimentConfig { n: 100_000, ..ExperimentConfig::new("rotation", Task::Birkhoff) },
        "north_south" => ExperimentConfig {
            grid_k: 256,
            samples_per_axis: 256,
            ..ExperimentConfig::new("north_south", Task::Attractor)
        },
        "disc_b" => ExperimentConfig { grid_k: 32, n: 2000, ..ExperimentConfig::new("disc_b", Task::SrbLike) },
        "solenoid" => ExperimentConfig::new("solenoid", Task::Lyapunov),
        other => return Err(Error::Config(format!("unknown demo `{other}`; known: {}", DEMOS.join(", ")))),
    };
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_are_rejected() {
        let e = ExperimentConfig::from_json(r#"{"system":"tent","task":"orbit","colour":1}"#);
        assert!(matches!(e, Err(Error::Config(_))));
    }

    #[test]
    fn nonpositive_parameters_are_rejected() {
        for body in [
            r#"{"system":"tent","task":"lyapunov","n":0}"#,
            r#"{"system":"tent","task":"mixing","tol":-1}"#,
            r#"{"system":"tent","task":"attractor","grid_k":0}"#,
            r#"{"system":"nope","task":"orbit"}"#,
        ] {
            assert!(ExperimentConfig::from_json(body).is_err(), "{body}");
        }
    }

    #[test]
    fn orbit_of_length_zero_is_the_start() {
        let cfg = ExperimentConfig { n: 0, x0: Some(vec![0.3]), ..ExperimentConfig::new("tent", Task::Orbit) };
        let r = run(&cfg).unwrap();
        assert_eq!(r.results.orbit.unwrap().points, vec![Point::float(&[0.3])]);
    }

    #[test]
    fn cat_map_lyapunov_check_passes() {
        let r = run(&demo_config("cat_map").unwrap()).unwrap();
        let ex = &r.results.lyapunov.as_ref().unwrap().exponents;
        assert!((ex[0] - 0.962_423_650_119_206_9).abs() < 1e-6);
        assert!(r.checks_passed && !r.checks.is_empty());
    }

    #[test]
    fn report_round_trips() {
        let cfg = ExperimentConfig { n: 50, ..ExperimentConfig::new("rotation", Task::All) };
        let r = run(&cfg).unwrap();
        let back = ExperimentReport::from_json(&r.to_json().unwrap()).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn same_seed_same_start() {
        let cfg = ExperimentConfig { seed: 7, ..ExperimentConfig::new("cat_map", Task::Orbit) };
        let a = run(&cfg).unwrap();
        let b = run(&cfg).unwrap();
        assert_eq!(a.start, b.start);
        let c = run(&ExperimentConfig { seed: 8, ..cfg }).unwrap();
        assert_ne!(a.start, c.start);
    }
}
