use std::f64::consts::{LN_2, PI};
use std::process::ExitCode;
use std::time::Instant;

use ergolab::attractors::{
    classify_sample, grid_samples, minimal_statistical_attractor, orbital_stability_probe, srb_like_estimate,
    statistical_basin_fraction, support_attractor_correspondence, visit_frequency_equivalence,
};
use ergolab::entropy_mixing::{
    correlation_series, default_window, entropy_estimate, mixing_verdict, pesin_residual, MixingVerdict,
    DEFAULT_MIXING_TOL,
};
use ergolab::ergodic_stats::{birkhoff_average, recurrence_fraction};
use ergolab::lyapunov::{hyperbolicity_check, scalar_exponent, spectrum_qr, QrOptions};
use ergolab::measures::{
    default_family, invariance_residual, krylov_bogoliubov, weak_star_distance, HistogramMeasure, Measure,
};
use ergolab::phase_space::DEFAULT_MODULUS;
use ergolab::systems::horseshoe_cylinder_point;
use ergolab::{GridSet, Iterate, Params, Partition, Point, SystemSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn sys(name: &str) -> SystemSpec {
    SystemSpec::build(name, &Params::new()).expect("built-in system")
}

fn sys_with(name: &str, params: &[(&str, f64)]) -> SystemSpec {
    let p: Params = params.iter().map(|(k, v)| (k.to_string(), *v)).collect();
    SystemSpec::build(name, &p).expect("built-in system")
}

fn ensure(ok: bool, msg: String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg)
    }
}

fn e(err: ergolab::Error) -> String {
    err.to_string()
}

/// λ₊ of [[2,1],[1,1]] from the characteristic polynomial.
fn cat_exponent() -> f64 {
    ((3.0 + 5f64.sqrt()) / 2.0).ln()
}

fn criterion_1() -> Outcome {
    let cat = sys("cat_map");
    let chi = cat_exponent();
    let mut worst: f64 = 0.0;
    for start in [[0.1234567, 0.7654321], [0.5, 0.25], [0.0, 0.0], [0.999, 0.3141]] {
        let s = spectrum_qr(&cat, &Point::float(&start), 10_000, &QrOptions::default()).map_err(e)?;
        worst = worst.max((s.exponents[0] - chi).abs()).max((s.exponents[1] + chi).abs());
    }
    ensure(worst <= 1e-9, format!("max error {worst:e}"))?;
    Ok(format!("max error {worst:e} over 4 starts"))
}

fn criterion_2() -> Outcome {
    let h = sys("horseshoe");
    let code: Vec<u8> = (0..20).map(|i| ((i * 7 + 3) % 5 % 2) as u8).collect();
    let x = horseshoe_cylinder_point(&code).map_err(e)?;
    let opts = QrOptions { transient: Some(0), ..QrOptions::default() };
    let s = spectrum_qr(&h, &x, 20, &opts).map_err(e)?;
    let l5 = 5f64.ln();
    let err = (s.exponents[0] - l5).abs().max((s.exponents[1] + l5).abs());
    ensure(err <= 1e-9, format!("exponents {:?}", s.exponents))?;
    let rep = hyperbolicity_check(&h, &x, 19, 0.2, 5.0, 1.0, None).map_err(e)?;
    ensure(rep.pass && rep.c == 1.0, format!("hyperbolicity {rep:?}"))?;
    Ok(format!("exponent error {err:e}; hyperbolic with C=1, λ=1/5, σ=5"))
}

fn criterion_3() -> Outcome {
    let cat = sys("cat_map").with_exact_modulus(DEFAULT_MODULUS).map_err(e)?;
    let family = default_family(&cat.space);
    let x = cat.default_start();
    let orbit = cat.orbit(&x, 1_000_000).map_err(e)?;
    let sigma = Measure::empirical(&cat.space, orbit.points).map_err(e)?;
    let uniform = Measure::Histogram(HistogramMeasure::uniform(Partition::new(cat.space, 64).map_err(e)?));
    let d = weak_star_distance(&sigma, &uniform, &family, 64).map_err(e)?;
    ensure(d < 0.05, format!("weak* distance {d}"))?;
    let starts = cat.space.lebesgue_grid(32);
    let part = Partition::new(cat.space, 32).map_err(e)?;
    let rep = srb_like_estimate(&cat, &starts, 10_000, &family, 64, 0.05, &part).map_err(e)?;
    let frac = rep.clusters.first().map_or(0.0, |c| c.basin_fraction);
    ensure(
        rep.clusters.len() == 1 && frac >= 0.99,
        format!("{} clusters, top fraction {frac}", rep.clusters.len()),
    )?;
    Ok(format!("weak* distance {d:.2e}; 1 cluster with fraction {frac}"))
}

/// `Leb{x ∈ [0,½) : Tⁿx ∈ [0,½)}` computed on dyadic numerators. `Tⁿ` is
/// affine on every interval of length `2^{−(n+1)}`, so testing midpoints is
/// exact.
fn tent_dyadic_correlation(n: u32) -> f64 {
    let den: u64 = 1 << (n + 2);
    let mut count = 0u64;
    for j in 0..(1u64 << n) {
        let mut a = 2 * j + 1;
        for _ in 0..n {
            a = if 2 * a <= den { 2 * a } else { 2 * den - 2 * a };
        }
        if 2 * a < den {
            count += 1;
        }
    }
    count as f64 / (1u64 << (n + 1)) as f64
}

fn criterion_4() -> Outcome {
    let tent = sys("tent");
    let family = default_family(&tent.space);
    let uniform = Measure::Histogram(HistogramMeasure::uniform(Partition::new(tent.space, 1024).map_err(e)?));
    let r = invariance_residual(&tent, &uniform, &family, 64).map_err(e)?;
    ensure(r < 1e-10, format!("invariance residual {r:e}"))?;
    let part = Partition::new(tent.space, 2).map_err(e)?;
    let a = GridSet::new(part, [0]).map_err(e)?;
    let c = correlation_series(&tent, &a, &a, &grid_samples(&tent.space, 100_000), 12).map_err(e)?;
    let mut worst: f64 = 0.0;
    for n in 1..=12u32 {
        let exact = tent_dyadic_correlation(n);
        ensure((exact - 0.25).abs() < 1e-15, format!("oracle c_{n} = {exact}"))?;
        worst = worst.max((c.values[n as usize] - exact).abs());
    }
    ensure(worst < 0.01, format!("max |c_n − ¼| = {worst}"))?;
    Ok(format!("residual {r:.1e}; max |c_n − ¼| = {worst:.4}"))
}

fn criterion_5() -> Outcome {
    let rot = sys("rotation");
    let x = Point::float(&[0.1]);
    let chi = scalar_exponent(&rot, &x, 100_000).map_err(e)?;
    ensure(chi.abs() <= 1e-9, format!("exponent {chi}"))?;
    let n = 100_000;
    let b = birkhoff_average(&rot, &x, |p| (1.0 + (2.0 * PI * p.coords()[0]).cos()) / 2.0, n, None).map_err(e)?;
    let last = b.last().unwrap_or(f64::NAN);
    ensure((last - 0.5).abs() <= 2.0 / n as f64, format!("Birkhoff average {last}"))?;
    let part = Partition::new(rot.space, 2).map_err(e)?;
    let a = GridSet::new(part, [0]).map_err(e)?;
    let c = correlation_series(&rot, &a, &a, &grid_samples(&rot.space, 10_000), 2000).map_err(e)?;
    let verdict = mixing_verdict(&c, DEFAULT_MIXING_TOL, default_window(&c));
    let ces = *c.cesaro.last().unwrap_or(&f64::NAN);
    ensure(verdict == MixingVerdict::ErgodicOnly, format!("verdict {verdict:?}"))?;
    ensure((ces - 0.25).abs() < 0.01, format!("Cesàro mean {ces}"))?;
    Ok(format!("χ = {chi}; |a_n − ½| = {:.1e}; ergodic-only, Cesàro {ces:.4}", (last - 0.5).abs()))
}

fn criterion_6() -> Outcome {
    let ns = sys("north_south");
    let part = Partition::new(ns.space, 256).map_err(e)?;
    let samples = grid_samples(&ns.space, 256);
    let s_point = Point::float(&[0.5]);
    let att = minimal_statistical_attractor(&ns, &samples, 10_000, 1.0, &part).map_err(e)?;
    let s_cell = part.cell_index(&s_point);
    ensure(att.candidate.cells() == [s_cell], format!("candidate {:?}", att.candidate.cells()))?;
    let family = default_family(&ns.space);
    let srb = srb_like_estimate(&ns, &samples, 10_000, &family, 64, 0.05, &part).map_err(e)?;
    ensure(srb.clusters.len() == 1, format!("{} clusters", srb.clusters.len()))?;
    let c = &srb.clusters[0];
    let d = weak_star_distance(&c.representative, &Measure::dirac(&ns.space, s_point), &family, 64).map_err(e)?;
    ensure(d < 0.05, format!("distance to δ_S {d}"))?;
    ensure(c.basin_fraction >= 1.0 - 2.0 / 256.0, format!("basin fraction {}", c.basin_fraction))?;
    let j = support_attractor_correspondence(&srb, &att).map_err(e)?;
    ensure(j == 1.0, format!("Jaccard {j}"))?;
    Ok(format!("candidate = S cell {s_cell}; 1 cluster at distance {d:.1e}, fraction {}; Jaccard 1", c.basin_fraction))
}

fn criterion_7() -> Outcome {
    let d = sys("disc_b");
    let part = Partition::new(d.space, 64).map_err(e)?;
    let k = GridSet::covering(part, &[Point::float(&[1.0, 0.0])]);
    let samples = grid_samples(&d.space, 1000);
    let frac = statistical_basin_fraction(&d, &k, &samples, 100_000, 0.02).map_err(e)?;
    ensure(frac >= 0.99, format!("statistical basin fraction {frac}"))?;
    let probe = orbital_stability_probe(&d, &k, &[1e-3], 1.0 / 6.0, 400, 1000).map_err(e)?;
    let exc = probe[0].max_excursion;
    ensure(exc > 1.0 / 6.0, format!("max excursion {exc}"))?;
    Ok(format!("statistical basin {frac}; excursion {exc:.3} > 1/6 at δ = 1e-3"))
}

fn criterion_8() -> Outcome {
    let tent = sys("tent");
    let bin = Partition::new(tent.space, 2).map_err(e)?;
    let et = entropy_estimate(&tent, &grid_samples(&tent.space, 100_000), &bin, 12).map_err(e)?;
    ensure((et.slope - LN_2).abs() <= 0.1 * LN_2, format!("tent slope {}", et.slope))?;

    let cat = sys("cat_map");
    let chi = cat_exponent();
    let p22 = Partition::new(cat.space, 2).map_err(e)?;
    let ec = entropy_estimate(&cat, &grid_samples(&cat.space, 1_000_000), &p22, 12).map_err(e)?;
    ensure((ec.slope - 0.9624).abs() <= 0.15 * 0.9624, format!("cat slope {}", ec.slope))?;

    let invariant = [
        sys("identity"),
        sys_with("identity", &[("dim", 2.0)]),
        sys("rotation"),
        sys("tent"),
        sys("expanding"),
        sys_with("expanding", &[("k", 3.0), ("eps", 0.5)]),
        sys("cat_map"),
        sys_with("toral", &[("a", 3.0), ("b", 2.0), ("c", 1.0), ("d", 1.0)]),
        sys("north_south"),
        sys("solenoid"),
    ];
    let mut worst = f64::NEG_INFINITY;
    let mut worst_name = String::new();
    for s in &invariant {
        let part = Partition::new(s.space, 2).map_err(e)?;
        // Lebesgue measure is not invariant for the solenoid; start on its attractor.
        let burn_in = if s.name == "solenoid" { 50 } else { 0 };
        let samples: Vec<Point> = grid_samples(&s.space, 200_000)
            .into_iter()
            .map(|x| s.iterate(&x, burn_in).ok().and_then(Iterate::point).expect("invariant systems do not escape"))
            .collect();
        let r = pesin_residual(s, &samples, &part, 24).map_err(e)?;
        if r.residual > worst {
            worst = r.residual;
            worst_name = s.name.clone();
        }
        ensure(
            r.residual <= 0.05,
            format!("Margulis–Ruelle fails on {}: slope {} vs Σχ⁺ {}", s.name, r.entropy.slope, r.positive_exponent_sum),
        )?;
    }
    Ok(format!(
        "tent slope {:.4}, cat slope {:.4} (χ {chi:.4}); worst slope − Σχ⁺ = {worst:.4} ({worst_name})",
        et.slope, ec.slope
    ))
}

fn random_measure(rng: &mut ChaCha8Rng, space: &ergolab::PhaseSpace) -> Measure {
    let dim = space.dim();
    let point = |rng: &mut ChaCha8Rng| Point::float(&(0..dim).map(|_| rng.gen::<f64>()).collect::<Vec<_>>());
    match rng.gen_range(0..3) {
        0 => Measure::dirac(space, point(rng)),
        1 => {
            let m = rng.gen_range(1..20);
            Measure::empirical(space, (0..m).map(|_| point(rng)).collect()).expect("points inside")
        }
        _ => {
            let part = Partition::new(*space, rng.gen_range(1..9)).expect("positive");
            let w: Vec<f64> = (0..part.cell_count()).map(|_| rng.gen::<f64>() + 1e-3).collect();
            Measure::Histogram(HistogramMeasure::from_masses(part, w).expect("positive masses"))
        }
    }
}

fn weak_star_axioms() -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for space in [ergolab::PhaseSpace::circle(), ergolab::PhaseSpace::torus2()] {
        let family = default_family(&space);
        for _ in 0..500 {
            let (a, b, c) = (random_measure(&mut rng, &space), random_measure(&mut rng, &space), random_measure(&mut rng, &space));
            let d = |x: &Measure, y: &Measure| weak_star_distance(x, y, &family, 64).expect("same space");
            let (ab, ba, bc, ac, aa) = (d(&a, &b), d(&b, &a), d(&b, &c), d(&a, &c), d(&a, &a));
            ensure(aa.abs() <= 1e-12, format!("d(μ,μ) = {aa}"))?;
            ensure(ab >= 0.0 && (ab - ba).abs() <= 1e-12, format!("symmetry {ab} {ba}"))?;
            ensure(ac <= ab + bc + 1e-12, format!("triangle {ac} > {ab} + {bc}"))?;
        }
    }
    Ok(())
}

fn all_systems() -> Vec<SystemSpec> {
    [
        "identity",
        "rotation",
        "tent",
        "expanding",
        "cat_map",
        "toral",
        "horseshoe",
        "north_south",
        "disc_a",
        "disc_b",
        "disc_rot",
        "solenoid",
    ]
    .iter()
    .map(|n| sys(n))
    .collect()
}

fn group_property() -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut systems = all_systems();
    systems.push(sys("cat_map").with_exact_modulus(DEFAULT_MODULUS).map_err(e)?);
    for s in &systems {
        for x in grid_samples(&s.space, 20) {
            let (m, n) = (rng.gen_range(0..40), rng.gen_range(0..40));
            let whole = s.iterate(&x, m + n).map_err(e)?;
            let split = match s.iterate(&x, n).map_err(e)? {
                Iterate::Inside(y) => match s.iterate(&y, m).map_err(e)? {
                    Iterate::Escaped { at } => Iterate::Escaped { at: at + n },
                    inside => inside,
                },
                escaped => escaped,
            };
            ensure(whole == split, format!("{}: f^{m}∘f^{n} ≠ f^{} at {:?}", s.name, m + n, x.coords()))?;
        }
    }
    Ok(())
}

fn topological_implies_statistical() -> Result<usize, String> {
    let cases = [
        (sys("north_south"), vec![vec![0.5]], 256),
        (sys("disc_b"), vec![vec![1.0, 0.0]], 64),
        (sys("disc_a"), vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![-1.0, 0.0], vec![0.0, -1.0]], 16),
        (sys("rotation"), vec![vec![0.25], vec![0.75]], 8),
    ];
    let mut checked = 0;
    for (s, pts, k) in cases {
        let part = Partition::new(s.space, k).map_err(e)?;
        let pts: Vec<Point> = pts.iter().map(|p| Point::float(p)).collect();
        let set = GridSet::covering(part, &pts);
        let n = 2000;
        for x in grid_samples(&s.space, 250) {
            let c = classify_sample(&s, &set, &x, n, n / 10).map_err(e)?;
            for tol in [0.01, 0.05, 0.2, 0.5] {
                ensure(!c.topological(tol) || c.statistical(tol), format!("{} violates at {:?}", s.name, x.coords()))?;
                checked += 1;
            }
        }
    }
    Ok(checked)
}

fn krylov_bogoliubov_residuals() -> Result<f64, String> {
    let n = 1000;
    let mut worst: f64 = 0.0;
    for s in all_systems().into_iter().filter(|s| s.name != "horseshoe") {
        let family = default_family(&s.space);
        let mu = krylov_bogoliubov(&s, &Measure::dirac(&s.space, s.default_start()), n).map_err(e)?;
        let r = invariance_residual(&s, &mu, &family, 64).map_err(e)?;
        ensure(r <= 2.0 / n as f64, format!("{}: residual {r} > 2/n", s.name))?;
        worst = worst.max(r * n as f64);
    }
    Ok(worst)
}

fn recurrence() -> Result<f64, String> {
    let mut worst: f64 = 1.0;
    for s in [sys("cat_map"), sys("rotation")] {
        let part = Partition::new(s.space, 8).map_err(e)?;
        let a = GridSet::new(part, [3]).map_err(e)?;
        let samples: Vec<Point> = grid_samples(&s.space, 20_000).into_iter().filter(|x| a.contains_point(x)).collect();
        let f = recurrence_fraction(&s, &a, &samples, 10_000, 1).map_err(e)?;
        ensure(f >= 0.999, format!("{}: recurrence {f}", s.name))?;
        worst = worst.min(f);
    }
    Ok(worst)
}

fn frequency_cesaro_agreement() -> Result<usize, String> {
    let cases = [
        (sys("north_south"), vec![0.5], 256, 500),
        (sys("disc_b"), vec![1.0, 0.0], 64, 500),
    ];
    let mut checked = 0;
    for (s, p, k, count) in cases {
        let part = Partition::new(s.space, k).map_err(e)?;
        let set = GridSet::covering(part, &[Point::float(&p)]);
        for x in grid_samples(&s.space, count) {
            let r = visit_frequency_equivalence(&s, &set, &x, 20_000, &[0.01, 0.02, 0.05], 0.05).map_err(e)?;
            ensure(r.agree() && r.consistent, format!("{} disagrees at {:?}: {r:?}", s.name, x.coords()))?;
            checked += 1;
        }
    }
    Ok(checked)
}

fn criterion_9() -> Outcome {
    weak_star_axioms()?;
    group_property()?;
    let checked = topological_implies_statistical()?;
    let kb = krylov_bogoliubov_residuals()?;
    let rec = recurrence()?;
    let agreed = frequency_cesaro_agreement()?;
    Ok(format!(
        "1000 metric triples; group property; {checked} attraction checks; KB residual ≤ {kb:.2}/n; recurrence ≥ {rec}; {agreed} frequency/Cesàro agreements"
    ))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("cat-map Lyapunov spectrum", criterion_1),
        ("horseshoe spectrum and hyperbolicity", criterion_2),
        ("cat-map equidistribution and SRB-like uniqueness", criterion_3),
        ("tent invariance and mixing", criterion_4),
        ("golden rotation exponent, Birkhoff and ergodic-only verdict", criterion_5),
        ("north-south attractor and SRB-like measure", criterion_6),
        ("disc B statistical but unstable attractor", criterion_7),
        ("entropy slopes and Margulis-Ruelle", criterion_8),
        ("property suites", criterion_9),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = f();
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {}. {name}: {detail} ({secs:.1}s)", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {}. {name}: {detail} ({secs:.1}s)", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
