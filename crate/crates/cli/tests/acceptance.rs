//! One line per acceptance criterion; the process fails if any criterion does.

use std::f64::consts::PI;
use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use ordfix::asymcenter::{solve_asym_center, AsymCenterProblem, Side, SolverConfig};
use ordfix::harness::{corpus, run_suite, CampaignConfig, Scenario, Suite};
use ordfix::iterate::{picard_orbit, IterationConfig};
use ordfix::mapping::{
    affine_fixed_point, alpha_pair, comparable_pairs, is_alpha_nonexpansive, lemma22_pair,
    nonexpansive_pair,
};
use ordfix::order::{is_norm_monotonic, ConeKind};
use ordfix::sample::{self, SamplerConfig, SeededRng};
use ordfix::space::{
    convexity_inequality_sides, lp_norm, modulus_of_convexity, ConvexityProfile, ModulusSolverConfig,
    ProfileConfig, SpaceSpec,
};
use ordfix::vector::Vector;
use rand::Rng;

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within(elapsed: Duration, limit: f64) -> Result<(), String> {
    ensure(
        elapsed.as_secs_f64() < limit,
        format!("took {:.2}s, limit {limit}s", elapsed.as_secs_f64()),
    )
}

fn repo_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ordfix"))
}

/// Exhaustive pair search on an angular grid of the planar unit sphere.
fn grid_search_delta(eps: f64, p: f64, n: usize) -> f64 {
    let pts: Vec<[f64; 2]> = (0..n)
        .map(|k| {
            let (s, c) = (2.0 * PI * k as f64 / n as f64).sin_cos();
            let r = lp_norm(&[c, s], p);
            [c / r, s / r]
        })
        .collect();
    let mut best = 1.0_f64;
    for x in &pts[..n / 2] {
        for y in &pts {
            if lp_norm(&[x[0] - y[0], x[1] - y[1]], p) >= eps {
                best = best.min(1.0 - lp_norm(&[x[0] + y[0], x[1] + y[1]], p) / 2.0);
            }
        }
    }
    best
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let space = SpaceSpec::euclidean(2);
    let cfg = ModulusSolverConfig::default();
    let mut worst = 0.0_f64;
    for eps in [0.5_f64, 1.0, 1.5, 2.0] {
        let exact = 1.0 - (1.0 - eps * eps / 4.0).sqrt();
        let d = modulus_of_convexity(&space, eps, &cfg).map_err(|e| e.to_string())?;
        worst = worst.max((d - exact).abs());
        if eps < 2.0 {
            let g = grid_search_delta(eps, 2.0, 720);
            ensure(
                g >= exact - 1e-12 && g - exact < 1e-2,
                format!("grid oracle {g} disagrees with closed form {exact} at eps {eps}"),
            )?;
        }
    }
    ensure(worst <= 1e-5, format!("max error {worst:.3e}"))?;

    let out = bin()
        .args(["modulus", "--p", "2", "--eps-grid", "4"])
        .output()
        .map_err(|e| e.to_string())?;
    ensure(out.status.success(), "modulus subcommand failed")?;
    let text = String::from_utf8_lossy(&out.stdout);
    for line in text.lines().skip(1) {
        let (e, d) = line.split_once(',').ok_or("bad CSV row")?;
        let (e, d): (f64, f64) = (e.parse().map_err(|_| "bad eps")?, d.parse().map_err(|_| "bad delta")?);
        let exact = 1.0 - (1.0 - e * e / 4.0).sqrt();
        ensure((d - exact).abs() <= 1e-5, format!("CLI row {line}"))?;
    }
    within(start.elapsed(), 10.0)?;
    Ok(format!("max |delta - closed form| = {worst:.2e}, {:.2}s", start.elapsed().as_secs_f64()))
}

fn draw_in_ball(rng: &mut SeededRng, space: &SpaceSpec, r: f64, on_sphere: bool) -> Vector {
    let dim = space.dim();
    let v = Vector::new((0..dim).map(|_| rng.random_range(-1.0..1.0)).collect()).expect("finite");
    let n = space.norm(&v).expect("dims agree");
    let scale = if on_sphere { r } else { r * rng.random_range(0.0..=1.0) };
    v.map(|c| c * scale / n)
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let mut total = 0;
    for p in [1.5, 2.0, 3.0] {
        let prof = ConvexityProfile::compute(&SpaceSpec::new(2, p).expect("valid"), &ProfileConfig::default())
            .map_err(|e| e.to_string())?;
        for dim in [2, 5] {
            let space = SpaceSpec::new(dim, p).expect("valid");
            let mut rng = sample::rng(sample::derive_seed(2024, (p * 10.0) as u64 * 100 + dim as u64));
            let mut violations = 0;
            for i in 0..10_000 {
                let r = rng.random_range(0.05..10.0);
                // a third of the tuples sit on the sphere, where the bound is tight
                let x = draw_in_ball(&mut rng, &space, r, i % 3 == 0);
                let y = draw_in_ball(&mut rng, &space, r, i % 3 == 0);
                let lambda = if i % 4 == 0 { 0.5 } else { rng.random_range(0.0..=1.0) };
                let (lhs, rhs) =
                    convexity_inequality_sides(&space, &x, &y, lambda, r, &prof).map_err(|e| e.to_string())?;
                if lhs > rhs + 1e-9 {
                    violations += 1;
                }
                total += 1;
            }
            ensure(violations == 0, format!("p {p} dim {dim}: {violations} violations"))?;
        }
    }
    within(start.elapsed(), 30.0)?;
    Ok(format!("{total} tuples, 0 violations, {:.2}s", start.elapsed().as_secs_f64()))
}

fn criterion_3() -> Outcome {
    let mut pairs = 0;
    for s in corpus() {
        let space = s.space(2.0).map_err(|e| e.to_string())?;
        for (x, y) in comparable_pairs(&s.mapping, &s.cone, &SamplerConfig::new(1000, 3)) {
            let a = alpha_pair(&s.mapping, &space, 0.0, &x, &y).map_err(|e| e.to_string())?;
            let n = nonexpansive_pair(&s.mapping, &space, &x, &y).map_err(|e| e.to_string())?;
            ensure(a.holds == n.holds, format!("{}: verdicts differ at {x:?}, {y:?}", s.id))?;
            pairs += 1;
        }
    }
    Ok(format!("{pairs} pairs over {} maps, all verdicts equal", corpus().len()))
}

fn alpha_maps() -> Vec<Scenario> {
    corpus()
        .into_iter()
        .filter(|s| {
            let space = s.space(2.0).expect("valid");
            is_alpha_nonexpansive(&s.mapping, &s.cone, &space, s.alpha, &SamplerConfig::new(1000, 4))
                .map(|r| r.passed())
                .unwrap_or(false)
        })
        .collect()
}

fn criterion_4() -> Outcome {
    let maps = alpha_maps();
    ensure(maps.iter().any(|s| s.alpha > 0.0), "no map with alpha > 0 in the corpus")?;
    let mut pairs = 0;
    for s in &maps {
        let space = s.space(2.0).map_err(|e| e.to_string())?;
        for (x, y) in comparable_pairs(&s.mapping, &s.cone, &SamplerConfig::new(1000, 4)) {
            let c = lemma22_pair(&s.mapping, &space, s.alpha, &x, &y).map_err(|e| e.to_string())?;
            ensure(c.holds, format!("{}: {} > {}", s.id, c.lhs, c.rhs))?;
            pairs += 1;
        }
    }
    Ok(format!("{pairs} pairs over {} alpha-maps, 0 violations", maps.len()))
}

fn criterion_5() -> Outcome {
    let start = Instant::now();
    let reports = run_suite(Suite::T34, &CampaignConfig::default(), 5).map_err(|e| e.to_string())?;
    ensure(reports.len() >= 100, format!("only {} maps", reports.len()))?;
    let failed: Vec<_> = reports.iter().filter(|r| !r.passed()).map(|r| r.trial.clone()).collect();
    ensure(failed.is_empty(), format!("failed trials: {failed:?}"))?;
    within(start.elapsed(), 60.0)?;
    Ok(format!("{} maps, biconditional held in all, {:.2}s", reports.len(), start.elapsed().as_secs_f64()))
}

/// Orthant affine corpus maps with a unique fixed point and `0 <= T0`.
fn affine_cases() -> Vec<(Scenario, Vector)> {
    corpus()
        .into_iter()
        .filter(|s| s.cone.kind() == ConeKind::Orthant && s.mapping.domain().contains(&Vector::zeros(s.mapping.dim())))
        .filter_map(|s| {
            let f = affine_fixed_point(&s.mapping).ok()??;
            let t0 = s.mapping.apply(&Vector::zeros(s.mapping.dim())).ok()?;
            (f.unique && s.cone.contains(&t0).ok()?).then_some((s, f.point))
        })
        .collect()
}

fn criterion_6() -> Outcome {
    let cases = affine_cases();
    ensure(!cases.is_empty(), "no affine cases")?;
    let mut worst = (0.0_f64, 0.0_f64, 0.0_f64);
    for (s, exact) in &cases {
        let space = s.space(2.0).map_err(|e| e.to_string())?;
        let x0 = Vector::zeros(s.mapping.dim());
        let orbit = picard_orbit(&s.mapping, &x0, &s.cone, &space, &IterationConfig::default())
            .map_err(|e| e.to_string())?;
        let prob = AsymCenterProblem::from_orbit(&orbit.points, None, s.cone, space.clone(), Side::Above)
            .map_err(|e| e.to_string())?;
        let res = solve_asym_center(&prob, &SolverConfig::default()).map_err(|e| e.to_string())?;
        let tz = s.mapping.apply(&res.z).map_err(|e| e.to_string())?;
        let fixed = space.dist(&tz, &res.z).map_err(|e| e.to_string())?;
        let infeasible = (-prob.feasibility_margin(&res.z)).max(0.0);
        let err = space.dist(&res.z, exact).map_err(|e| e.to_string())?;
        ensure(fixed <= 1e-6, format!("{}: |Tz - z| = {fixed:.3e}", s.id))?;
        ensure(infeasible <= 1e-9, format!("{}: infeasible by {infeasible:.3e}", s.id))?;
        ensure(err <= 1e-5, format!("{}: |z - z*| = {err:.3e}", s.id))?;
        worst = (worst.0.max(fixed), worst.1.max(infeasible), worst.2.max(err));
    }
    Ok(format!(
        "{} maps; max |Tz-z| {:.1e}, infeasibility {:.1e}, |z-z*| {:.1e}",
        cases.len(),
        worst.0,
        worst.1,
        worst.2
    ))
}

fn criterion_7() -> Outcome {
    let cases = affine_cases();
    let mut worst = 0.0_f64;
    for (s, exact) in &cases {
        let space = s.space(2.0).map_err(|e| e.to_string())?;
        let mono = is_norm_monotonic(&s.cone, &space, 500, 7).map_err(|e| e.to_string())?;
        ensure(mono.passed, format!("{}: norm is not monotonic", s.id))?;
        let x0 = Vector::zeros(s.mapping.dim());
        let orbit = picard_orbit(&s.mapping, &x0, &s.cone, &space, &IterationConfig::default())
            .map_err(|e| e.to_string())?;
        for w in orbit.norms.windows(2) {
            ensure(w[1] >= w[0] - 1e-12, format!("{}: norm dropped {} -> {}", s.id, w[0], w[1]))?;
        }
        let err = space.dist(orbit.last(), exact).map_err(|e| e.to_string())?;
        ensure(err <= 1e-8, format!("{}: |x_n - z| = {err:.3e}", s.id))?;
        worst = worst.max(err);
    }
    Ok(format!("{} orbits, norms non-decreasing, max |x_n - z| {worst:.1e}", cases.len()))
}

fn criterion_8() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let status = bin()
        .args(["verify", "--suite", "all", "--seed", "8", "--config"])
        .arg(repo_root().join("configs/injected_non_monotone.json"))
        .arg("--out")
        .arg(dir.path())
        .output()
        .map_err(|e| e.to_string())?
        .status;
    ensure(!status.success(), "injected non-monotone map passed")?;
    ensure(status.code() == Some(1), format!("unexpected status {status}"))?;
    Ok(format!("injected map rejected, {status}"))
}

fn criterion_9() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut summaries = Vec::new();
    for run in ["a", "b"] {
        let out = dir.path().join(run);
        let status = bin()
            .args(["verify", "--suite", "all", "--seed", "9", "--out"])
            .arg(&out)
            .output()
            .map_err(|e| e.to_string())?
            .status;
        ensure(status.success(), format!("verify run {run} failed: {status}"))?;
        summaries.push(std::fs::read(out.join("summary.txt")).map_err(|e| e.to_string())?);
    }
    ensure(summaries[0] == summaries[1], "summaries differ")?;
    Ok(format!("{} identical bytes", summaries[0].len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("modulus of convexity, Euclidean plane", criterion_1),
        ("uniform convexity inequality", criterion_2),
        ("alpha = 0 reduces to nonexpansive", criterion_3),
        ("perturbed nonexpansive bound", criterion_4),
        ("bounded orbit iff fixed point exists", criterion_5),
        ("asymptotic center", criterion_6),
        ("increasing orbit norm convergence", criterion_7),
        ("self-falsification on a non-monotone map", criterion_8),
        ("deterministic verify summaries", criterion_9),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(detail) => println!("[PASS] criterion {}: {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("[FAIL] criterion {}: {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
