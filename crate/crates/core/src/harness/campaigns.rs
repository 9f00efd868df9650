//! Theorem-level campaigns.
//!
//! Each campaign turns one scenario (or one generated map) into a
//! [`CampaignReport`]. Errors raised inside a campaign become failed checks,
//! so one broken trial never hides the others.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::Rng;

use super::config::CampaignConfig;
use super::report::{self, num, CampaignReport};
use super::scenario::{corpus, family_matrix, Expected, Scenario};
use crate::asymcenter::{self, AsymCenterProblem, Side, SolverConfig};
use crate::error::{Error, Result};
use crate::iterate::{self, IterationConfig, OrbitRecord, Verdict};
use crate::mapping::{self, Domain, MapKind, Mapping, OracleConfig};
use crate::order::{self, ConeSpec};
use crate::sample::{self, derive_seed, SamplerConfig};
use crate::space::SpaceSpec;
use crate::tol;
use crate::vector::Vector;

pub const WEAK_CAVEAT: &str =
    "weak convergence is checked as norm convergence (the two coincide in finite dimension)";
pub const T42_CAVEAT: &str = "the decreasing-orbit convergence result states z in F_>=(T); it is checked as z in F(T) with z <= x0, i.e. z in F_<=(T) or F_>=(T)";
pub const T42_NORMAL_CAVEAT: &str =
    "the decreasing-orbit convergence result omits the normal-cone hypothesis; the monotonic-norm check is required anyway";
pub const LORENTZ_CAVEAT: &str =
    "non-minihedral cone: the monotone orbit limit replaces the asymptotic center";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    T32,
    T33,
    T34,
    T41To44,
    C45To46,
    All,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::T32 => "t32",
            Suite::T33 => "t33",
            Suite::T34 => "t34",
            Suite::T41To44 => "t41-44",
            Suite::C45To46 => "c45-46",
            Suite::All => "all",
        }
    }

    fn expand(self) -> Vec<Suite> {
        match self {
            Suite::All => vec![Suite::T32, Suite::T33, Suite::T34, Suite::T41To44, Suite::C45To46],
            s => vec![s],
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [Suite::T32, Suite::T33, Suite::T34, Suite::T41To44, Suite::C45To46, Suite::All]
            .into_iter()
            .find(|x| x.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| {
                Error::InvalidParameter(format!(
                    "unknown suite `{s}` (expected t32, t33, t34, t41-44, c45-46 or all)"
                ))
            })
    }
}

fn par_map<T: Sync, R: Send>(items: &[T], f: impl Fn(usize, &T) -> R + Sync + Send) -> Vec<R> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        items.par_iter().enumerate().map(|(i, t)| f(i, t)).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().enumerate().map(|(i, t)| f(i, t)).collect()
    }
}

/// Picard orbit; an inconclusive run is repeated once with ten times the
/// iteration budget.
fn orbit(map: &Mapping, x0: &Vector, cone: &ConeSpec, space: &SpaceSpec, cfg: &IterationConfig) -> Result<(OrbitRecord, bool)> {
    let rec = iterate::picard_orbit(map, x0, cone, space, cfg)?;
    if rec.verdict != Verdict::MaxIterReached {
        return Ok((rec, false));
    }
    let bigger = IterationConfig {
        max_iter: cfg.max_iter.saturating_mul(10),
        ..*cfg
    };
    Ok((iterate::picard_orbit(map, x0, cone, space, &bigger)?, true))
}

fn orbit_detail(rec: &OrbitRecord, rerun: bool) -> String {
    format!(
        "verdict={} steps={} last_residual={}{}",
        rec.verdict,
        rec.steps(),
        num(rec.last_residual()),
        if rerun { " (rerun with 10x budget)" } else { "" }
    )
}

fn oracle(s: &Scenario, cfg: &CampaignConfig) -> Result<Vec<Vector>> {
    let ocfg = OracleConfig {
        region: s.oracle_region.clone().or_else(|| cfg.oracle.region.clone()),
        ..cfg.oracle.clone()
    };
    mapping::fixed_point_oracle(&s.mapping, &ocfg)
}

/// Closed-form fixed point of an affine map when it is the only one.
fn exact_fixed_point(map: &Mapping) -> Option<Vector> {
    match mapping::affine_fixed_point(map) {
        Ok(Some(f)) if f.unique => Some(f.point),
        _ => None,
    }
}

/// Shared hypothesis block: ordered start and monotone α-nonexpansiveness.
/// Returns the starting point when every hypothesis holds.
struct Setup {
    space: SpaceSpec,
    x0: Vector,
}

fn setup(rep: &mut CampaignReport, s: &Scenario, cfg: &CampaignConfig, up: bool, seed: u64) -> Option<Setup> {
    let policy = if up { &s.x0_up } else { &s.x0_down };
    let rel = if up { "x0 <= Tx0" } else { "x0 >= Tx0" };
    let Some(policy) = policy else {
        rep.skip(rel, "scenario has no starting point in this direction");
        return None;
    };
    let run = || -> Result<(SpaceSpec, Vector, bool)> {
        s.validate()?;
        let space = s.space(cfg.p)?;
        let x0 = s.resolve_x0(policy, up, derive_seed(seed, 1))?;
        let tx0 = s.mapping.apply(&x0)?;
        let ok = if up { s.cone.leq(&x0, &tx0)? } else { s.cone.leq(&tx0, &x0)? };
        Ok((space, x0, ok))
    };
    let (space, x0) = match run() {
        Ok((space, x0, ok)) => {
            if !rep.check(rel, ok, format!("x0={x0:.6}")) {
                return None;
            }
            (space, x0)
        }
        Err(e) => {
            rep.fail(rel, e.to_string());
            return None;
        }
    };
    if !alpha_hypothesis(rep, s, &space, cfg, derive_seed(seed, 2)) {
        return None;
    }
    Some(Setup { space, x0 })
}

fn alpha_hypothesis(rep: &mut CampaignReport, s: &Scenario, space: &SpaceSpec, cfg: &CampaignConfig, seed: u64) -> bool {
    let name = "hypothesis: monotone alpha-nonexpansive";
    let sampler = SamplerConfig::new(cfg.samples, seed);
    match mapping::is_alpha_nonexpansive(&s.mapping, &s.cone, space, s.alpha, &sampler) {
        Ok(r) => {
            let detail = match r.violations.first() {
                None => format!("alpha={} pairs={}", num(s.alpha), r.samples),
                Some(v) => format!(
                    "alpha={} {} violations; first [{}] x={:.6} y={:.6} lhs={} rhs={}",
                    num(s.alpha),
                    r.violations.len(),
                    v.check,
                    v.x,
                    v.y,
                    num(v.lhs),
                    num(v.rhs)
                ),
            };
            rep.check(name, r.passed(), detail)
        }
        Err(e) => {
            rep.fail(name, e.to_string());
            false
        }
    }
}

fn norm_hypothesis(rep: &mut CampaignReport, s: &Scenario, space: &SpaceSpec, cfg: &CampaignConfig, seed: u64) -> bool {
    let name = "hypothesis: monotonic norm";
    match order::is_norm_monotonic(&s.cone, space, cfg.samples, seed) {
        Ok(r) => {
            let detail = match &r.witness {
                None => format!("pairs={}", r.samples),
                Some((x, y, nx, ny)) => format!("0 <= x={x:.6} <= y={y:.6} but |x|={} > |y|={}", num(*nx), num(*ny)),
            };
            rep.check(name, r.passed, detail)
        }
        Err(e) => {
            rep.fail(name, e.to_string());
            false
        }
    }
}

/// Increasing (`up`) or decreasing orbit campaign shared by the existence
/// theorems for `x0 <= Tx0` and `x0 >= Tx0`.
fn existence(s: &Scenario, cfg: &CampaignConfig, seed: u64, up: bool) -> CampaignReport {
    let suite = if up { "t32" } else { "t33" };
    let mut rep = CampaignReport::new(suite, &s.id);
    let Some(Setup { space, x0 }) = setup(&mut rep, s, cfg, up, seed) else {
        return rep;
    };
    if let Err(e) = existence_body(&mut rep, s, cfg, &space, &x0, up) {
        rep.fail("campaign error", e.to_string());
    }
    rep
}

fn existence_body(
    rep: &mut CampaignReport,
    s: &Scenario,
    cfg: &CampaignConfig,
    space: &SpaceSpec,
    x0: &Vector,
    up: bool,
) -> Result<()> {
    let (rec, rerun) = orbit(&s.mapping, x0, &s.cone, space, &cfg.iteration)?;
    let chain = iterate::check_orbit_monotone(&rec, &s.cone);
    let chain_ok = chain.first_violation.is_none()
        && if up { chain.monotonicity.is_increasing() } else { chain.monotonicity.is_decreasing() };
    rep.check(
        if up { "increasing chain" } else { "decreasing chain" },
        chain_ok,
        format!("order={} first_violation={:?}", chain.monotonicity, chain.first_violation),
    );
    let fixed = oracle(s, cfg);
    let ordered_fixed = |p: &Vector| if up { s.cone.leq_unchecked(x0, p) } else { s.cone.leq_unchecked(p, x0) };
    let set_name = if up { "F_>=" } else { "F_<=" };

    match rec.verdict {
        Verdict::Converged => {
            center_checks(rep, s, cfg, space, &rec, x0, up)?;
            match &fixed {
                Ok(pts) => {
                    rep.check(
                        &format!("bounded orbit => {set_name}(T) nonempty (oracle)"),
                        !pts.is_empty(),
                        format!("{}; oracle points={}", orbit_detail(&rec, rerun), pts.len()),
                    );
                }
                Err(e) => rep.skip("bounded orbit => fixed point (oracle)", format!("oracle unavailable: {e}")),
            }
        }
        Verdict::UnboundedSuspected => {
            rep.skip("asymptotic center", format!("orbit unbounded, conclusion vacuous; {}", orbit_detail(&rec, rerun)));
            match &fixed {
                Ok(pts) => {
                    let n = pts.iter().filter(|p| ordered_fixed(p)).count();
                    rep.check(
                        &format!("unbounded orbit => no ordered fixed point (oracle)"),
                        n == 0,
                        format!("ordered oracle points={n}"),
                    );
                }
                Err(e) => rep.skip("unbounded orbit => no fixed point (oracle)", format!("oracle unavailable: {e}")),
            }
        }
        Verdict::MaxIterReached => {
            rep.fail("orbit verdict", format!("inconclusive: {}", orbit_detail(&rec, rerun)));
        }
    }

    // descent toward an ordered fixed point
    match &fixed {
        Ok(pts) => match pts.iter().find(|p| ordered_fixed(p)) {
            Some(p) => {
                let d: Vec<f64> = rec.points.iter().map(|x| space.dist_unchecked(x, p)).collect();
                let bad = d.windows(2).position(|w| !tol::holds(w[1], w[0]));
                rep.check(
                    "quasi-nonexpansive descent |x_n - p| non-increasing",
                    bad.is_none(),
                    match bad {
                        None => format!("p={p:.6} |x0-p|={}", num(d[0])),
                        Some(n) => format!("p={p:.6} breaks at n={n}: {} -> {}", num(d[n]), num(d[n + 1])),
                    },
                );
            }
            None => rep.skip("quasi-nonexpansive descent", "oracle found no fixed point ordered with x0"),
        },
        Err(e) => rep.skip("quasi-nonexpansive descent", format!("oracle unavailable: {e}")),
    }

    if let Ok(pts) = &fixed {
        let found = !pts.is_empty();
        match s.expected {
            Expected::Unknown => {}
            Expected::FixedPointExists => {
                rep.check("oracle agrees with expectation", found, format!("oracle points={}", pts.len()));
            }
            Expected::NoFixedPoint => {
                rep.check("oracle agrees with expectation", !found, format!("oracle points={}", pts.len()));
            }
        }
    }
    Ok(())
}

fn center_checks(
    rep: &mut CampaignReport,
    s: &Scenario,
    cfg: &CampaignConfig,
    space: &SpaceSpec,
    rec: &OrbitRecord,
    x0: &Vector,
    up: bool,
) -> Result<()> {
    let exact = exact_fixed_point(&s.mapping);
    let z = if s.cone.is_minihedral() {
        let side = if up { Side::Above } else { Side::Below };
        let problem = AsymCenterProblem::from_orbit(&rec.points, None, s.cone, *space, side)?;
        let mut res = match asymcenter::solve_asym_center(&problem, &SolverConfig::default()) {
            Ok(r) => r,
            Err(e) => {
                rep.fail("asymptotic center solve", e.to_string());
                return Ok(());
            }
        };
        let fixed = asymcenter::verify_center_is_fixed(&s.mapping, space, &mut res, cfg.fixed_tol)?;
        rep.check(
            "center is fixed |Tz - z| <= tol",
            fixed,
            format!(
                "z={:.6} residual={} r={} gap={}",
                res.z,
                num(res.fixed_point_residual.unwrap_or(f64::NAN)),
                num(res.r),
                num(res.gap())
            ),
        );
        let margin = problem.feasibility_margin(&res.z);
        rep.check("center feasibility", margin >= -cfg.feasibility_tol, format!("min margin={}", num(margin)));
        let tz = s.mapping.apply(&res.z)?;
        let f_tz = asymcenter::asymptotic_radius(&problem, &tz)?;
        rep.check(
            "f(Tz) <= f(z)",
            f_tz <= res.r + cfg.fixed_tol,
            format!("f(Tz)={} f(z)={}", num(f_tz), num(res.r)),
        );
        res.z
    } else {
        rep.caveat(LORENTZ_CAVEAT);
        let z = match iterate::monotone_limit(rec, &s.cone) {
            Ok(z) => z,
            Err(e) => {
                rep.fail("monotone limit", e.to_string());
                return Ok(());
            }
        };
        let residual = space.dist(&s.mapping.apply(&z)?, &z)?;
        rep.check(
            "limit is fixed |Tz - z| <= tol",
            residual <= cfg.fixed_tol,
            format!("z={z:.6} residual={}", num(residual)),
        );
        z
    };
    let ordered = if up { s.cone.leq(x0, &z)? } else { s.cone.leq(&z, x0)? };
    rep.check(if up { "x0 <= z" } else { "z <= x0" }, ordered, format!("z={z:.6}"));
    if let Some(e) = exact {
        let d = space.dist(&z, &e)?;
        rep.check("|z - z_exact| <= tol", d <= cfg.exact_tol, format!("z_exact={e:.6} distance={}", num(d)));
    }
    Ok(())
}

/// Increasing orbits: a bounded orbit from `x0 <= Tx0` yields a fixed point
/// above `x0` (the asymptotic center), and orbits descend toward ordered
/// fixed points.
pub fn verify_theorem_32(s: &Scenario, cfg: &CampaignConfig, seed: u64) -> CampaignReport {
    existence(s, cfg, seed, true)
}

/// Dual of [`verify_theorem_32`] for `x0 >= Tx0`.
pub fn verify_theorem_33(s: &Scenario, cfg: &CampaignConfig, seed: u64) -> CampaignReport {
    existence(s, cfg, seed, false)
}

/// One generated map of the boundedness/fixed-point family.
#[derive(Debug, Clone)]
struct FamilyTrial {
    id: String,
    map: Mapping,
    rho: Option<f64>,
}

fn family_trials(cfg: &CampaignConfig, seed: u64) -> Result<Vec<FamilyTrial>> {
    let f = &cfg.family;
    let mut out = Vec::new();
    let mut idx = 0u64;
    for &dim in &f.dims {
        for &rho in &f.radii {
            for k in 0..f.trials_per_cell {
                let mut rng = sample::rng(derive_seed(seed ^ 0x7334, idx));
                idx += 1;
                let a = family_matrix(&mut rng, dim, rho, cfg.p);
                let b = Vector::new((0..dim).map(|_| rng.random_range(f.b_range.0..=f.b_range.1)).collect())?;
                out.push(FamilyTrial {
                    id: format!("d{dim:02}-rho{rho:.2}-{k:02}"),
                    map: Mapping::new(MapKind::Affine { a, b }, Domain::cone(ConeSpec::orthant(dim)))?,
                    rho: Some(rho),
                });
            }
        }
    }
    for i in 0..f.identity_trials {
        let dim = f.dims[i % f.dims.len().max(1)];
        let mut rng = sample::rng(derive_seed(seed ^ 0x1d, i as u64));
        let zero = i % 4 == 0;
        let b = if zero {
            Vector::zeros(dim)
        } else {
            Vector::new((0..dim).map(|_| rng.random_range(f.b_range.0..=f.b_range.1)).collect())?
        };
        out.push(FamilyTrial {
            id: format!("d{dim:02}-identity-{}-{i:02}", if zero { "b0" } else { "b+" }),
            map: Mapping::new(MapKind::Translation { b }, Domain::cone(ConeSpec::orthant(dim)))?,
            rho: None,
        });
    }
    Ok(out)
}

fn family_trial(t: &FamilyTrial, cfg: &CampaignConfig, seed: u64) -> CampaignReport {
    let mut rep = CampaignReport::new("t34", &t.id);
    let run = |rep: &mut CampaignReport| -> Result<()> {
        let dim = t.map.dim();
        let cone = ConeSpec::orthant(dim);
        let space = SpaceSpec::new(dim, cfg.p)?;
        let hyp = mapping::is_monotone_nonexpansive(&t.map, &cone, &space, &SamplerConfig::new(cfg.samples, seed))?;
        if !rep.check(
            "hypothesis: monotone nonexpansive",
            hyp.passed(),
            format!("pairs={} violations={}", hyp.samples, hyp.violations.len()),
        ) {
            return Ok(());
        }
        let (rec, rerun) = orbit(&t.map, &Vector::zeros(dim), &cone, &space, &cfg.iteration)?;
        let pts = mapping::fixed_point_oracle(&t.map, &cfg.oracle)?;
        let rho = t.rho.map_or_else(|| "identity".to_string(), |r| format!("{r:.2}"));
        if rec.verdict == Verdict::MaxIterReached {
            rep.fail("orbit verdict", format!("inconclusive: {}", orbit_detail(&rec, rerun)));
            return Ok(());
        }
        let mut bounded = rec.verdict == Verdict::Converged;
        let mut detail = format!(
            "rho={rho} spectral_radius={} {} oracle points={}",
            num(spectral_radius(&t.map)),
            orbit_detail(&rec, rerun),
            pts.len()
        );
        if !bounded {
            // near-critical maps approach a far-away limit too slowly to
            // converge within budget; geometric residual decay still bounds them
            match iterate::geometric_tail_bound(&rec, Some(TAIL_SPAN.min(rec.steps() / 2))) {
                Some(tb) => {
                    bounded = true;
                    detail.push_str(&format!(
                        "; tail ratio={} bound={}",
                        num(tb.ratio),
                        num(tb.norm_bound)
                    ));
                }
                None => detail.push_str("; residuals do not decay"),
            }
        }
        rep.check("O(0) bounded <=> F(T) nonempty", bounded == !pts.is_empty(), detail);
        Ok(())
    };
    if let Err(e) = run(&mut rep) {
        rep.fail("campaign error", e.to_string());
    }
    rep
}

/// Trailing steps used to estimate the residual decay rate.
const TAIL_SPAN: usize = 1000;

fn spectral_radius(map: &Mapping) -> f64 {
    match map.kind() {
        MapKind::Affine { a, .. } => {
            let n = a.len();
            nalgebra::DMatrix::from_fn(n, n, |i, j| a[i][j])
                .complex_eigenvalues()
                .iter()
                .map(|c| c.norm())
                .fold(0.0, f64::max)
        }
        _ => 1.0,
    }
}

/// Boundedness of `O(0)` against nonemptiness of the fixed-point set over
/// the generated family.
pub fn verify_theorem_34(cfg: &CampaignConfig, seed: u64) -> Result<Vec<CampaignReport>> {
    let trials = family_trials(cfg, seed)?;
    Ok(par_map(&trials, |i, t| family_trial(t, cfg, derive_seed(seed, 0x3400 + i as u64))))
}

/// Convergence of monotone orbits under a monotonic norm: the norm limit is
/// a fixed point, and from starts on the right side of 0 the norms are
/// monotone and tend to `‖z‖`.
pub fn verify_convergence_41_to_44(s: &Scenario, cfg: &CampaignConfig, seed: u64) -> CampaignReport {
    let mut rep = CampaignReport::new("t41-44", &s.id);
    for up in [true, false] {
        let Some(Setup { space, x0 }) = setup(&mut rep, s, cfg, up, derive_seed(seed, up as u64)) else {
            continue;
        };
        if !norm_hypothesis(&mut rep, s, &space, cfg, derive_seed(seed, 3)) {
            continue;
        }
        if let Err(e) = convergence_body(&mut rep, s, cfg, &space, &x0, up) {
            rep.fail("campaign error", e.to_string());
        }
    }
    rep
}

fn convergence_body(
    rep: &mut CampaignReport,
    s: &Scenario,
    cfg: &CampaignConfig,
    space: &SpaceSpec,
    x0: &Vector,
    up: bool,
) -> Result<()> {
    let (weak, strong) = if up { ("4.1", "4.3") } else { ("4.2", "4.4") };
    rep.caveat(WEAK_CAVEAT);
    if !up {
        rep.caveat(T42_CAVEAT);
        rep.caveat(T42_NORMAL_CAVEAT);
    }
    let (rec, rerun) = orbit(&s.mapping, x0, &s.cone, space, &cfg.iteration)?;
    match rec.verdict {
        Verdict::UnboundedSuspected => {
            let why = format!("orbit unbounded, hypothesis not met; {}", orbit_detail(&rec, rerun));
            rep.skip(&format!("{weak} convergence"), why.clone());
            rep.skip(&format!("{strong} norm monotone"), why);
            return Ok(());
        }
        Verdict::MaxIterReached => {
            rep.fail(&format!("{weak} orbit verdict"), format!("inconclusive: {}", orbit_detail(&rec, rerun)));
            return Ok(());
        }
        Verdict::Converged => {}
    }
    let z = match iterate::monotone_limit(&rec, &s.cone) {
        Ok(z) => z,
        Err(e) => {
            rep.fail(&format!("{weak} monotone limit"), e.to_string());
            return Ok(());
        }
    };
    let z_ref = exact_fixed_point(&s.mapping).unwrap_or_else(|| z.clone());
    let dist = space.dist(rec.last(), &z_ref)?;
    rep.check(
        &format!("{weak} norm convergence |x_n - z| <= tol"),
        dist <= cfg.strong_tol,
        format!("z={z_ref:.6} distance={} {}", num(dist), orbit_detail(&rec, rerun)),
    );
    let residual = space.dist(&s.mapping.apply(&z)?, &z)?;
    rep.check(&format!("{weak} limit is fixed"), residual <= cfg.fixed_tol, format!("residual={}", num(residual)));
    let ordered = if up { s.cone.leq(x0, &z)? } else { s.cone.leq(&z, x0)? };
    rep.check(
        &format!("{weak} {}", if up { "z in F_>=(T), x0 <= z" } else { "z in F_<=(T) or F_>=(T), z <= x0" }),
        ordered && residual <= cfg.fixed_tol,
        format!("z={z:.6}"),
    );

    // the norm hypotheses: 0 <= x0 (up) or x0 <= 0, read through -x_n (down)
    let signed = if up { x0.clone() } else { -x0 };
    if !s.cone.contains(&signed)? {
        rep.skip(
            &format!("{strong} norm monotone"),
            format!("x0 is not {} 0", if up { ">=" } else { "<=" }),
        );
        return Ok(());
    }
    let drop = rec
        .norms
        .windows(2)
        .enumerate()
        .find(|(_, w)| w[1] < w[0] - cfg.norm_monotone_tol);
    rep.check(
        &format!("{strong} norm sequence non-decreasing"),
        drop.is_none(),
        match drop {
            None => format!("norms {} -> {}", num(rec.norms[0]), num(*rec.norms.last().expect("non-empty"))),
            Some((n, w)) => format!("drop at n={n}: {} -> {}", num(w[0]), num(w[1])),
        },
    );
    let zn = space.norm(&z_ref)?;
    let gamma = *rec.norms.last().expect("non-empty");
    rep.check(
        &format!("{strong} lim |x_n| = |z|"),
        (gamma - zn).abs() <= cfg.strong_tol && rec.norms.iter().all(|&n| tol::holds(n, zn)),
        format!("gamma={} |z|={}", num(gamma), num(zn)),
    );
    rep.check(
        &format!("{strong} strong convergence |x_n - z| <= tol"),
        dist <= cfg.strong_tol,
        format!("distance={}", num(dist)),
    );
    Ok(())
}

/// Orbits from 0, and from sampled `x <= Tx`, on cone domains with a
/// fixed point; the orbit from 0 dominates: `‖T^n 0 - T^n x‖ <= ‖x‖`.
pub fn verify_corollaries_45_46(s: &Scenario, cfg: &CampaignConfig, seed: u64) -> CampaignReport {
    let mut rep = CampaignReport::new("c45-46", &s.id);
    if let Err(e) = corollaries_body(&mut rep, s, cfg, seed) {
        rep.fail("campaign error", e.to_string());
    }
    rep
}

fn corollaries_body(rep: &mut CampaignReport, s: &Scenario, cfg: &CampaignConfig, seed: u64) -> Result<()> {
    s.validate()?;
    if !matches!(s.mapping.domain(), Domain::Cone { .. }) {
        rep.skip("4.5 / 4.6", "domain is not the whole cone");
        return Ok(());
    }
    let fixed = match oracle(s, cfg) {
        Ok(f) => f,
        Err(e) => {
            rep.skip("4.5 / 4.6", format!("fixed-point set not verifiable: {e}"));
            return Ok(());
        }
    };
    if fixed.is_empty() {
        rep.skip("4.5 / 4.6", "precondition: fixed-point set is empty");
        return Ok(());
    }
    let space = s.space(cfg.p)?;
    if !alpha_hypothesis(rep, s, &space, cfg, derive_seed(seed, 2)) {
        return Ok(());
    }
    let dim = s.mapping.dim();
    let zero = Vector::zeros(dim);
    let exact = exact_fixed_point(&s.mapping);
    let converges_to_fixed = |rep: &mut CampaignReport, name: &str, x: &Vector| -> Result<usize> {
        let (rec, rerun) = orbit(&s.mapping, x, &s.cone, &space, &cfg.iteration)?;
        let z = rec.last().clone();
        let residual = space.dist(&s.mapping.apply(&z)?, &z)?;
        let mut ok = rec.verdict == Verdict::Converged && residual <= cfg.fixed_tol;
        let mut detail = format!("z={z:.6} {}", orbit_detail(&rec, rerun));
        if let Some(e) = &exact {
            let d = space.dist(&z, e)?;
            ok &= d <= cfg.exact_tol;
            detail.push_str(&format!(" |z - z_exact|={}", num(d)));
        }
        rep.check(name, ok, detail);
        Ok(rec.steps())
    };
    let steps0 = converges_to_fixed(rep, "4.5 orbit of 0 converges to a fixed point", &zero)?;

    let ne = mapping::is_monotone_nonexpansive(&s.mapping, &s.cone, &space, &SamplerConfig::new(cfg.samples, derive_seed(seed, 4)))?;
    if !ne.passed() {
        rep.skip("4.6", "map is not nonexpansive");
        return Ok(());
    }
    let mut rng = sample::rng(derive_seed(seed, 5));
    let mut starts = Vec::new();
    for _ in 0..4096 {
        if starts.len() >= cfg.corollary_samples {
            break;
        }
        let x = s.mapping.sample_point(&mut rng, 4.0);
        if s.cone.leq(&x, &s.mapping.apply(&x)?)? {
            starts.push(x);
        }
    }
    if starts.is_empty() {
        rep.skip("4.6", "no sampled x in P with x <= Tx");
        return Ok(());
    }
    for (k, x) in starts.iter().enumerate() {
        let steps = converges_to_fixed(rep, &format!("4.6 orbit of x[{k}] converges to a fixed point"), x)?;
        let bound = space.norm(x)?;
        let (mut a, mut b) = (zero.clone(), x.clone());
        let mut worst: f64 = space.dist(&a, &b)?;
        for _ in 0..steps.max(steps0) {
            a = s.mapping.apply(&a)?;
            b = s.mapping.apply(&b)?;
            worst = worst.max(space.dist(&a, &b)?);
        }
        rep.check(
            &format!("4.6 domination |T^n 0 - T^n x[{k}]| <= |x[{k}]|"),
            tol::holds(worst, bound),
            format!("x={x:.6} max distance={} |x|={}", num(worst), num(bound)),
        );
    }
    Ok(())
}

/// Corpus scenarios (when enabled) followed by the configured ones.
pub fn scenarios(cfg: &CampaignConfig) -> Vec<Scenario> {
    let mut out = if cfg.include_corpus { corpus() } else { Vec::new() };
    out.extend(cfg.scenarios.iter().cloned());
    out
}

/// Runs one suite (or all of them, in a fixed order) and returns every
/// trial report in generation order.
pub fn run_suite(suite: Suite, cfg: &CampaignConfig, seed: u64) -> Result<Vec<CampaignReport>> {
    cfg.validate()?;
    let list = scenarios(cfg);
    let mut out = Vec::new();
    for s in suite.expand() {
        log::info!("running suite {s}");
        let tag = match s {
            Suite::T32 => 0x32,
            Suite::T33 => 0x33,
            Suite::T34 => 0x34,
            Suite::T41To44 => 0x41,
            Suite::C45To46 => 0x45,
            Suite::All => unreachable!("expanded"),
        };
        let seed_for = |i: usize| derive_seed(derive_seed(seed, tag), i as u64);
        let reports = match s {
            Suite::T32 => par_map(&list, |i, sc| verify_theorem_32(sc, cfg, seed_for(i))),
            Suite::T33 => par_map(&list, |i, sc| verify_theorem_33(sc, cfg, seed_for(i))),
            Suite::T34 => verify_theorem_34(cfg, seed_for(0))?,
            Suite::T41To44 => par_map(&list, |i, sc| verify_convergence_41_to_44(sc, cfg, seed_for(i))),
            Suite::C45To46 => par_map(&list, |i, sc| verify_corollaries_45_46(sc, cfg, seed_for(i))),
            Suite::All => unreachable!("expanded"),
        };
        for r in &reports {
            if !r.passed() {
                log::warn!("{} / {} failed", r.suite, r.trial);
            }
        }
        out.extend(reports);
    }
    Ok(out)
}

/// Writes `trials.csv` and `summary.txt` into `dir`.
pub fn write_outputs(reports: &[CampaignReport], dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir)?;
    report::write_trials_csv(reports, std::fs::File::create(dir.join("trials.csv"))?)?;
    std::fs::write(dir.join("summary.txt"), report::summary_table(reports))?;
    Ok(())
}
