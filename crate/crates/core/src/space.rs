//! Finite-dimensional ℓp spaces and their convexity geometry.
//!
//! The modulus of convexity is only defined as an infimum, so it is computed
//! numerically: every admissible pair can be rotated into a 2-dimensional
//! section of ℓp, where both points sit on the unit sphere and the distance
//! constraint is active. The outer search runs over the angle of `x`, the
//! inner one walks `y` along the sphere and locates where `‖x - y‖` crosses
//! `eps`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tol;
use crate::vector::Vector;

/// ℓp norm on `R^dim`, restricted to `1 < p < inf` so the space is uniformly
/// convex.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpaceSpec {
    dim: usize,
    p: f64,
}

impl SpaceSpec {
    pub fn new(dim: usize, p: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("dimension must be positive".into()));
        }
        if !(p > 1.0 && p.is_finite()) {
            return Err(Error::InvalidExponent(p));
        }
        Ok(SpaceSpec { dim, p })
    }

    pub fn euclidean(dim: usize) -> Self {
        SpaceSpec::new(dim, 2.0).expect("valid euclidean space")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn is_euclidean(&self) -> bool {
        self.p == 2.0
    }

    /// Same exponent, different dimension.
    pub fn with_dim(&self, dim: usize) -> Result<Self> {
        SpaceSpec::new(dim, self.p)
    }

    pub fn norm(&self, x: &Vector) -> Result<f64> {
        x.ensure_dim(self.dim)?;
        x.ensure_finite()?;
        Ok(lp_norm(x.coords(), self.p))
    }

    pub fn dist(&self, x: &Vector, y: &Vector) -> Result<f64> {
        y.ensure_dim(x.dim())?;
        self.norm(&(x - y))
    }

    /// Norm without dimension checks, for inner loops on validated data.
    pub(crate) fn norm_unchecked(&self, x: &Vector) -> f64 {
        lp_norm(x.coords(), self.p)
    }

    pub(crate) fn dist_unchecked(&self, x: &Vector, y: &Vector) -> f64 {
        lp_norm_diff(x.coords(), y.coords(), self.p)
    }
}

/// `(Σ|x_i|^p)^(1/p)`, scaled by the largest magnitude to avoid overflow.
pub fn lp_norm(coords: &[f64], p: f64) -> f64 {
    let m = coords.iter().fold(0.0_f64, |m, c| m.max(c.abs()));
    if m == 0.0 {
        return 0.0;
    }
    if p == 2.0 {
        let s: f64 = coords.iter().map(|c| (c / m) * (c / m)).sum();
        return m * s.sqrt();
    }
    let s: f64 = coords.iter().map(|c| (c.abs() / m).powf(p)).sum();
    m * s.powf(1.0 / p)
}

fn lp_norm_diff(a: &[f64], b: &[f64], p: f64) -> f64 {
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    lp_norm(&d, p)
}

/// Resolution of the nested search used for the modulus of convexity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModulusSolverConfig {
    /// Angles of `x` sampled on `[0, pi)` before golden-section refinement.
    pub outer_points: usize,
    /// Angular offsets of `y` sampled on `(0, pi]`.
    pub inner_points: usize,
    /// Bisection steps when locating `‖x - y‖ = eps`.
    pub bisection_steps: usize,
    /// Golden-section steps around the best outer angle.
    pub refine_steps: usize,
}

impl Default for ModulusSolverConfig {
    fn default() -> Self {
        ModulusSolverConfig {
            outer_points: 180,
            inner_points: 512,
            bisection_steps: 80,
            refine_steps: 60,
        }
    }
}

impl ModulusSolverConfig {
    /// Cheaper resolution, used when a whole profile is tabulated.
    pub fn coarse() -> Self {
        ModulusSolverConfig {
            outer_points: 48,
            inner_points: 256,
            bisection_steps: 70,
            refine_steps: 40,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.outer_points < 3 || self.inner_points < 4 || self.bisection_steps == 0 {
            return Err(Error::InvalidParameter(
                "modulus solver needs at least 3 outer and 4 inner samples".into(),
            ));
        }
        Ok(())
    }
}

/// Point of the 2-dimensional ℓp unit sphere at angle `theta`.
fn sphere_point(theta: f64, p: f64) -> [f64; 2] {
    let (s, c) = theta.sin_cos();
    let n = lp_norm(&[c, s], p);
    [c / n, s / n]
}

fn norm2(v: [f64; 2], p: f64) -> f64 {
    lp_norm(&v, p)
}

/// Best value of `1 - ‖x + y‖/2` over `y` on the sphere with `‖x - y‖ >= eps`,
/// for `x` fixed at angle `theta`.
fn inner_minimum(theta: f64, eps: f64, p: f64, cfg: &ModulusSolverConfig) -> Option<f64> {
    let x = sphere_point(theta, p);
    // measure eps against the computed radius of x so that y = -x is
    // feasible at eps = 2 without admitting neighbouring points
    let radius = norm2(x, p);
    let eval = |t: f64| -> (f64, f64) {
        let y = if t >= PI {
            [-x[0], -x[1]]
        } else {
            sphere_point(theta + t, p)
        };
        (
            norm2([x[0] - y[0], x[1] - y[1]], p),
            norm2([x[0] + y[0], x[1] + y[1]], p),
        )
    };

    let m = cfg.inner_points;
    let ts: Vec<f64> = (0..=m).map(|k| PI * k as f64 / m as f64).collect();
    let vals: Vec<(f64, f64)> = ts.iter().map(|&t| eval(t)).collect();

    let feasible = |d: f64| d >= eps * radius;
    let mut best_sum: Option<f64> = None;
    let mut consider = |s: f64| {
        best_sum = Some(best_sum.map_or(s, |b: f64| b.max(s)));
    };

    for k in 0..=m {
        if feasible(vals[k].0) {
            consider(vals[k].1);
        }
        if k < m && feasible(vals[k].0) != feasible(vals[k + 1].0) {
            // bracket the boundary point where ‖x - y‖ = eps
            let (mut lo, mut hi) = (ts[k], ts[k + 1]);
            let lo_feasible = feasible(vals[k].0);
            for _ in 0..cfg.bisection_steps {
                let mid = 0.5 * (lo + hi);
                if feasible(eval(mid).0) == lo_feasible {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let boundary = if lo_feasible { lo } else { hi };
            let (d, s) = eval(boundary);
            if feasible(d) {
                consider(s);
            }
        }
    }
    best_sum.map(|s| (1.0 - s / 2.0).clamp(0.0, 1.0))
}

/// Numerical modulus of convexity `δ(eps)` of the given ℓp space.
pub fn modulus_of_convexity(space: &SpaceSpec, eps: f64, cfg: &ModulusSolverConfig) -> Result<f64> {
    if !(0.0..=2.0).contains(&eps) {
        return Err(Error::InvalidParameter(format!(
            "eps = {eps} is outside [0, 2]"
        )));
    }
    cfg.validate()?;
    if eps == 0.0 {
        return Ok(0.0);
    }
    if eps == 2.0 {
        // strict convexity leaves y = -x as the only admissible pair; near
        // the antipode ‖x - y‖ = 2 is below rounding resolution
        return Ok(1.0);
    }
    if space.dim() == 1 {
        // on the real line the best pair is x = 1, y = 1 - eps
        return Ok(eps / 2.0);
    }
    let p = space.p();

    let n = cfg.outer_points;
    let step = PI / n as f64;
    let mut best: Option<(f64, usize)> = None;
    for i in 0..n {
        let v = inner_minimum(i as f64 * step, eps, p, cfg).ok_or_else(|| {
            Error::Solver(format!("no feasible pair found for eps = {eps}"))
        })?;
        if best.is_none_or(|(b, _)| v < b) {
            best = Some((v, i));
        }
    }
    let (mut best_val, i) = best.expect("at least one outer sample");

    // golden-section refinement on the bracket around the best sample
    let phi = 0.5 * (5.0_f64.sqrt() - 1.0);
    let (mut a, mut b) = ((i as f64 - 1.0) * step, (i as f64 + 1.0) * step);
    let f = |t: f64| inner_minimum(t, eps, p, cfg).unwrap_or(f64::INFINITY);
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..cfg.refine_steps {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = f(d);
        }
    }
    best_val = best_val.min(fc).min(fd);
    Ok(best_val)
}

/// Tabulated modulus of convexity on a uniform grid over `[0, 2]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexityProfile {
    pub epsilons: Vec<f64>,
    pub deltas: Vec<f64>,
    /// Largest grid `eps` whose `δ` is numerically zero.
    pub eps0: f64,
    pub zero_tol: f64,
}

/// Grid-level noise of the numerical `δ` (bisection and rounding limited).
pub const DELTA_NOISE_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileConfig {
    /// Number of grid intervals; the grid has `intervals + 1` points.
    pub intervals: usize,
    pub solver: ModulusSolverConfig,
}

impl Default for ProfileConfig {
    fn default() -> Self {
        ProfileConfig {
            intervals: 100,
            solver: ModulusSolverConfig::coarse(),
        }
    }
}

impl ConvexityProfile {
    pub fn compute(space: &SpaceSpec, cfg: &ProfileConfig) -> Result<Self> {
        if cfg.intervals == 0 {
            return Err(Error::InvalidParameter("profile grid is empty".into()));
        }
        let n = cfg.intervals;
        let epsilons: Vec<f64> = (0..=n).map(|i| 2.0 * i as f64 / n as f64).collect();
        let deltas = tabulate(space, &epsilons, &cfg.solver)?;
        let zero_tol = 10.0 * DELTA_NOISE_FLOOR;
        let eps0 = epsilons
            .iter()
            .zip(&deltas)
            .filter(|(_, &d)| d <= zero_tol)
            .map(|(&e, _)| e)
            .fold(0.0, f64::max);
        Ok(ConvexityProfile {
            epsilons,
            deltas,
            eps0,
            zero_tol,
        })
    }

    pub fn resolution(&self) -> f64 {
        self.epsilons.get(1).copied().unwrap_or(2.0)
    }

    /// `δ` at the largest grid point not exceeding `eps`. Since `δ` is
    /// non-decreasing this never overstates the true modulus by more than the
    /// solver error.
    pub fn delta_floor(&self, eps: f64) -> f64 {
        let eps = eps.clamp(0.0, 2.0);
        let idx = self.epsilons.partition_point(|&e| e <= eps);
        if idx == 0 {
            0.0
        } else {
            self.deltas[idx - 1]
        }
    }
}

#[cfg(feature = "parallel")]
fn tabulate(space: &SpaceSpec, eps: &[f64], cfg: &ModulusSolverConfig) -> Result<Vec<f64>> {
    use rayon::prelude::*;
    eps.par_iter()
        .map(|&e| modulus_of_convexity(space, e, cfg))
        .collect()
}

#[cfg(not(feature = "parallel"))]
fn tabulate(space: &SpaceSpec, eps: &[f64], cfg: &ModulusSolverConfig) -> Result<Vec<f64>> {
    eps.iter()
        .map(|&e| modulus_of_convexity(space, e, cfg))
        .collect()
}

/// Characteristic of convexity `ε0`, read off a computed profile.
pub fn characteristic_of_convexity(space: &SpaceSpec, cfg: &ProfileConfig) -> Result<f64> {
    Ok(ConvexityProfile::compute(space, cfg)?.eps0)
}

/// Both sides of `‖λx + (1-λ)y‖ <= r[1 - 2 min(λ, 1-λ) δ(‖x-y‖/r)]`.
pub fn convexity_inequality_sides(
    space: &SpaceSpec,
    x: &Vector,
    y: &Vector,
    lambda: f64,
    r: f64,
    profile: &ConvexityProfile,
) -> Result<(f64, f64)> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::Precondition(format!("radius r = {r} must be positive")));
    }
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::Precondition(format!(
            "lambda = {lambda} is outside [0, 1]"
        )));
    }
    let nx = space.norm(x)?;
    let ny = space.norm(y)?;
    for (name, n) in [("x", nx), ("y", ny)] {
        if !tol::holds(n, r) {
            return Err(Error::Precondition(format!(
                "‖{name}‖ = {n} exceeds r = {r}"
            )));
        }
    }
    let lhs = space.norm_unchecked(&x.lerp(y, lambda));
    let delta = profile.delta_floor(space.dist_unchecked(x, y) / r);
    let rhs = r * (1.0 - 2.0 * lambda.min(1.0 - lambda) * delta);
    Ok((lhs, rhs))
}

pub fn check_convexity_inequality(
    space: &SpaceSpec,
    x: &Vector,
    y: &Vector,
    lambda: f64,
    r: f64,
    profile: &ConvexityProfile,
) -> Result<bool> {
    let (lhs, rhs) = convexity_inequality_sides(space, x, y, lambda, r, profile)?;
    Ok(tol::holds(lhs, rhs))
}
