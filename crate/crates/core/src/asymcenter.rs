//! Asymptotic center of an orbit tail over its order upper bounds.
//!
//! The objective `f(y) = max_n ‖x_n - y‖` (a finite-tail surrogate of the
//! limsup) is minimized over `C = {y : x_n <= y for all n}`, which for the
//! orthant is `{y >= sup_n x_n}`. The solver is a projected subgradient
//! method; its output carries a certified lower bound on `inf_C f`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mapping::Mapping;
use crate::order::{ConeKind, ConeSpec};
use crate::space::SpaceSpec;
use crate::vector::Vector;

/// Which side of the tail the constraint set lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    /// `y >= x_n` for every tail point (increasing orbits).
    Above,
    /// `y <= x_n` for every tail point (decreasing orbits).
    Below,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AsymCenterProblem {
    tail: Vec<Vector>,
    cone: ConeSpec,
    space: SpaceSpec,
    side: Side,
    /// Componentwise sup (side `Above`) or inf (side `Below`) of the tail.
    bound: Vector,
}

impl AsymCenterProblem {
    pub fn new(tail: Vec<Vector>, cone: ConeSpec, space: SpaceSpec, side: Side) -> Result<Self> {
        if tail.is_empty() {
            return Err(Error::Precondition("empty orbit tail".into()));
        }
        if cone.kind() != ConeKind::Orthant {
            return Err(Error::Unsupported(
                "asymptotic centers need the orthant order (the constraint set is a single bound)".into(),
            ));
        }
        for d in [cone.dim(), space.dim()] {
            if d != tail[0].dim() {
                return Err(Error::DimensionMismatch {
                    expected: tail[0].dim(),
                    found: d,
                });
            }
        }
        for x in &tail {
            x.ensure_dim(cone.dim())?;
            x.ensure_finite()?;
        }
        let bound = match side {
            Side::Above => cone.sup_set(&tail)?,
            Side::Below => cone.inf_set(&tail)?,
        };
        Ok(AsymCenterProblem {
            tail,
            cone,
            space,
            side,
            bound,
        })
    }

    /// Tail `points[from..]`; `None` takes the second half.
    pub fn from_orbit(
        points: &[Vector],
        tail_from: Option<usize>,
        cone: ConeSpec,
        space: SpaceSpec,
        side: Side,
    ) -> Result<Self> {
        let from = tail_from.unwrap_or(points.len() / 2);
        if from >= points.len() {
            return Err(Error::Precondition(format!(
                "tail offset {from} leaves no points of an orbit of length {}",
                points.len()
            )));
        }
        Self::new(points[from..].to_vec(), cone, space, side)
    }

    pub fn tail(&self) -> &[Vector] {
        &self.tail
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn bound(&self) -> &Vector {
        &self.bound
    }

    pub fn space(&self) -> &SpaceSpec {
        &self.space
    }

    fn project(&self, y: &Vector) -> Vector {
        match self.side {
            Side::Above => y.zip_with(&self.bound, f64::max),
            Side::Below => y.zip_with(&self.bound, f64::min),
        }
    }

    /// Smallest cone margin of `z - x_n` (side `Above`) or `x_n - z`.
    pub fn feasibility_margin(&self, z: &Vector) -> f64 {
        self.tail
            .iter()
            .map(|x| match self.side {
                Side::Above => self.cone.margin(&(z - x)),
                Side::Below => self.cone.margin(&(x - z)),
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Lower bound on `f` over the constraint set: half the tail diameter
    /// (triangle inequality) and `max_n ‖bound - x_n‖`, valid because every
    /// feasible `y - x_n` dominates `bound - x_n` in the orthant and the
    /// norm is monotonic there.
    pub fn certified_lower_bound(&self) -> f64 {
        let mut half_diam: f64 = 0.0;
        for (i, a) in self.tail.iter().enumerate() {
            for b in &self.tail[i + 1..] {
                half_diam = half_diam.max(self.space.dist_unchecked(a, b) / 2.0);
            }
        }
        half_diam.max(
            self.tail
                .iter()
                .map(|x| self.space.dist_unchecked(&self.bound, x))
                .fold(0.0, f64::max),
        )
    }
}

/// `max_n ‖x_n - y‖` over the tail.
pub fn asymptotic_radius(problem: &AsymCenterProblem, y: &Vector) -> Result<f64> {
    y.ensure_dim(problem.cone.dim())?;
    Ok(problem
        .tail
        .iter()
        .map(|x| problem.space.dist_unchecked(x, y))
        .fold(0.0, f64::max))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub iterations: usize,
    /// Accepted gap between the attained value and the certified bound,
    /// relative to `1 + bound`.
    pub tol: f64,
    /// Starting point; `None` projects the last tail point.
    pub start: Option<Vector>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            iterations: 5000,
            tol: 1e-6,
            start: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymCenterResult {
    pub z: Vector,
    pub r: f64,
    pub lower_bound: f64,
    pub iterations: usize,
    /// `‖Tz - z‖`, filled in when the map is known.
    pub fixed_point_residual: Option<f64>,
}

impl AsymCenterResult {
    pub fn gap(&self) -> f64 {
        self.r - self.lower_bound
    }
}

/// Subgradient of `y -> ‖x - y‖_p`.
fn dist_subgradient(space: &SpaceSpec, x: &Vector, y: &Vector) -> Vector {
    let u = x - y;
    let n = space.norm_unchecked(&u);
    if n == 0.0 {
        return Vector::zeros(u.dim());
    }
    let p = space.p();
    u.map(|c| -c.signum() * (c.abs() / n).powf(p - 1.0))
}

/// Projected subgradient descent with steps `c/√k`, `c` the tail diameter.
/// Returns the best iterate; fails when its value stays above the certified
/// lower bound by more than the tolerance.
pub fn solve_asym_center(problem: &AsymCenterProblem, cfg: &SolverConfig) -> Result<AsymCenterResult> {
    let lower = problem.certified_lower_bound();
    let start = match &cfg.start {
        Some(s) => {
            s.ensure_dim(problem.cone.dim())?;
            s.clone()
        }
        None => problem.tail.last().expect("non-empty tail").clone(),
    };
    let mut y = problem.project(&start);
    let mut best = y.clone();
    let mut best_val = asymptotic_radius(problem, &y)?;
    let accept = cfg.tol * (1.0 + lower);
    let c = 2.0 * lower;
    let mut k = 0;
    while k < cfg.iterations && best_val - lower > accept {
        k += 1;
        let far = problem
            .tail
            .iter()
            .max_by(|a, b| {
                problem
                    .space
                    .dist_unchecked(a, &y)
                    .total_cmp(&problem.space.dist_unchecked(b, &y))
            })
            .expect("non-empty tail");
        let g = dist_subgradient(&problem.space, far, &y);
        let gn = g.dot(&g).sqrt();
        if gn == 0.0 {
            break;
        }
        let step = c / (k as f64).sqrt() / gn;
        y = problem.project(&(&y - &(&g * step)));
        let val = asymptotic_radius(problem, &y)?;
        if val < best_val {
            best_val = val;
            best = y.clone();
        }
    }
    if best_val - lower > accept {
        return Err(Error::Solver(format!(
            "asymptotic-center solver stalled after {k} iterations: f = {best_val:.6e}, certified bound = {lower:.6e}, gap = {:.3e}",
            best_val - lower
        )));
    }
    Ok(AsymCenterResult {
        z: best,
        r: best_val,
        lower_bound: lower,
        iterations: k,
        fixed_point_residual: None,
    })
}

/// Records `‖Tz - z‖` on the result and reports whether it is at most `tol`.
pub fn verify_center_is_fixed(
    map: &Mapping,
    space: &SpaceSpec,
    result: &mut AsymCenterResult,
    tol: f64,
) -> Result<bool> {
    let tz = map.apply(&result.z)?;
    let residual = space.dist(&tz, &result.z)?;
    result.fixed_point_residual = Some(residual);
    Ok(residual <= tol)
}
