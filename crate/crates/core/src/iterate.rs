//! Picard and Mann orbits with order tracking.
//!
//! Each recorded step stores the residual `‖Tx_n - x_n‖`, the norm `‖x_n‖`
//! and two order flags relating `x_n` to `x_{n+1}`.

use std::fmt;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mapping::Mapping;
use crate::order::ConeSpec;
use crate::space::SpaceSpec;
use crate::tol::CONE_TOL;
use crate::vector::Vector;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IterationConfig {
    pub max_iter: usize,
    pub residual_tol: f64,
    /// Norm ceiling above which sustained growth is read as divergence.
    pub bound_threshold: f64,
    /// Trailing window for the growth test.
    pub window: usize,
}

impl Default for IterationConfig {
    fn default() -> Self {
        IterationConfig {
            max_iter: 100_000,
            residual_tol: 1e-10,
            bound_threshold: 1e8,
            window: 50,
        }
    }
}

impl IterationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iter == 0 {
            return Err(Error::InvalidParameter("max_iter must be at least 1".into()));
        }
        if !(self.residual_tol > 0.0 && self.residual_tol.is_finite()) {
            return Err(Error::InvalidParameter("residual_tol must be positive".into()));
        }
        if !(self.bound_threshold > 0.0) {
            return Err(Error::InvalidParameter("bound_threshold must be positive".into()));
        }
        if self.window == 0 {
            return Err(Error::InvalidParameter("window must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Converged,
    UnboundedSuspected,
    MaxIterReached,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Converged => "converged",
            Verdict::UnboundedSuspected => "unbounded_suspected",
            Verdict::MaxIterReached => "max_iter_reached",
        })
    }
}

/// Order shape of an orbit. A stationary orbit is both increasing and
/// decreasing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Monotonicity {
    Increasing,
    Decreasing,
    Stationary,
    Neither,
}

impl Monotonicity {
    pub fn is_increasing(self) -> bool {
        matches!(self, Monotonicity::Increasing | Monotonicity::Stationary)
    }

    pub fn is_decreasing(self) -> bool {
        matches!(self, Monotonicity::Decreasing | Monotonicity::Stationary)
    }

    fn from_flags(up: &[bool], down: &[bool]) -> Self {
        match (up.iter().all(|&b| b), down.iter().all(|&b| b)) {
            (true, true) => Monotonicity::Stationary,
            (true, false) => Monotonicity::Increasing,
            (false, true) => Monotonicity::Decreasing,
            (false, false) => Monotonicity::Neither,
        }
    }
}

impl fmt::Display for Monotonicity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Monotonicity::Increasing => "increasing",
            Monotonicity::Decreasing => "decreasing",
            Monotonicity::Stationary => "stationary",
            Monotonicity::Neither => "neither",
        })
    }
}

/// A recorded orbit. `leq_up[n]` is `x_n <= x_{n+1}` and `leq_down[n]` is
/// `x_{n+1} <= x_n`, so both are one shorter than `points`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitRecord {
    pub points: Vec<Vector>,
    pub residuals: Vec<f64>,
    pub norms: Vec<f64>,
    pub leq_up: Vec<bool>,
    pub leq_down: Vec<bool>,
    pub order_monotone: Monotonicity,
    pub verdict: Verdict,
}

impl OrbitRecord {
    pub fn last(&self) -> &Vector {
        self.points.last().expect("orbit records are non-empty")
    }

    pub fn last_residual(&self) -> f64 {
        *self.residuals.last().expect("orbit records are non-empty")
    }

    /// Number of map applications that produced the recorded points.
    pub fn steps(&self) -> usize {
        self.points.len() - 1
    }
}

/// Averaging weights `β_n` of the Mann scheme.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BetaSchedule {
    Constant { beta: f64 },
    /// `β_n = 1/(n+2)`.
    Harmonic,
    /// Explicit weights; the last one repeats once the list runs out.
    List { betas: Vec<f64> },
}

impl BetaSchedule {
    pub fn validate(&self) -> Result<()> {
        let ok = |b: f64| (0.0..=1.0).contains(&b);
        match self {
            BetaSchedule::Constant { beta } if !ok(*beta) => Err(Error::InvalidParameter(format!(
                "beta = {beta} is outside [0, 1]"
            ))),
            BetaSchedule::List { betas } if betas.is_empty() => {
                Err(Error::InvalidParameter("empty beta list".into()))
            }
            BetaSchedule::List { betas } => match betas.iter().find(|b| !ok(**b)) {
                Some(b) => Err(Error::InvalidParameter(format!("beta = {b} is outside [0, 1]"))),
                None => Ok(()),
            },
            _ => Ok(()),
        }
    }

    pub fn beta(&self, n: usize) -> f64 {
        match self {
            BetaSchedule::Constant { beta } => *beta,
            BetaSchedule::Harmonic => 1.0 / (n as f64 + 2.0),
            BetaSchedule::List { betas } => betas[n.min(betas.len() - 1)],
        }
    }
}

impl std::str::FromStr for BetaSchedule {
    type Err = Error;

    /// `harmonic`, a single number, or a comma-separated list.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let sched = if s.eq_ignore_ascii_case("harmonic") {
            BetaSchedule::Harmonic
        } else {
            let betas = s
                .split(',')
                .map(|t| {
                    t.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::Format(format!("bad beta `{t}`")))
                })
                .collect::<Result<Vec<f64>>>()?;
            if betas.len() == 1 {
                BetaSchedule::Constant { beta: betas[0] }
            } else {
                BetaSchedule::List { betas }
            }
        };
        sched.validate()?;
        Ok(sched)
    }
}

fn check_setup(map: &Mapping, x0: &Vector, cone: &ConeSpec, space: &SpaceSpec, cfg: &IterationConfig) -> Result<()> {
    cfg.validate()?;
    for d in [x0.dim(), cone.dim(), space.dim()] {
        if d != map.dim() {
            return Err(Error::DimensionMismatch {
                expected: map.dim(),
                found: d,
            });
        }
    }
    Ok(())
}

fn run(
    map: &Mapping,
    x0: &Vector,
    cone: &ConeSpec,
    space: &SpaceSpec,
    cfg: &IterationConfig,
    mut step: impl FnMut(usize, &Vector, Vector) -> Vector,
) -> Result<OrbitRecord> {
    check_setup(map, x0, cone, space, cfg)?;
    let mut points = Vec::new();
    let mut residuals = Vec::new();
    let mut norms: Vec<f64> = Vec::new();
    let mut leq_up = Vec::new();
    let mut leq_down = Vec::new();
    let mut x = x0.clone();
    let verdict = loop {
        let tx = map.apply(&x)?;
        let r = space.dist_unchecked(&tx, &x);
        let norm = space.norm_unchecked(&x);
        norms.push(norm);
        residuals.push(r);
        let n = points.len();
        if r <= cfg.residual_tol {
            points.push(x);
            break Verdict::Converged;
        }
        if n >= cfg.max_iter {
            points.push(x);
            break Verdict::MaxIterReached;
        }
        if norm > cfg.bound_threshold && n >= cfg.window {
            let growth = (norms[n] - norms[n - cfg.window]) / cfg.window as f64;
            if growth > 0.0 {
                points.push(x);
                break Verdict::UnboundedSuspected;
            }
        }
        let next = step(n, &x, tx);
        leq_up.push(cone.leq_unchecked(&x, &next));
        leq_down.push(cone.leq_unchecked(&next, &x));
        points.push(std::mem::replace(&mut x, next));
    };
    Ok(OrbitRecord {
        order_monotone: Monotonicity::from_flags(&leq_up, &leq_down),
        points,
        residuals,
        norms,
        leq_up,
        leq_down,
        verdict,
    })
}

/// `x_{n+1} = T x_n` until convergence, suspected divergence or `max_iter`.
pub fn picard_orbit(
    map: &Mapping,
    x0: &Vector,
    cone: &ConeSpec,
    space: &SpaceSpec,
    cfg: &IterationConfig,
) -> Result<OrbitRecord> {
    run(map, x0, cone, space, cfg, |_, _, tx| tx)
}

/// `x_{n+1} = β_n x_n + (1 - β_n) T x_n`. With `β_n = 0` the update is `T x_n`
/// itself, so the record equals the Picard record bit for bit.
pub fn mann_orbit(
    map: &Mapping,
    x0: &Vector,
    schedule: &BetaSchedule,
    cone: &ConeSpec,
    space: &SpaceSpec,
    cfg: &IterationConfig,
) -> Result<OrbitRecord> {
    schedule.validate()?;
    run(map, x0, cone, space, cfg, |n, x, tx| {
        let b = schedule.beta(n);
        if b == 0.0 {
            tx
        } else if b == 1.0 {
            x.clone()
        } else {
            x.zip_with(&tx, |a, t| b * a + (1.0 - b) * t)
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonotoneCheck {
    pub monotonicity: Monotonicity,
    /// First `n` at which the chain started by `x_0, x_1` breaks.
    pub first_violation: Option<usize>,
}

/// Follows the chain set by the first pair: `x_0 <= x_1` must continue as an
/// increasing chain, `x_0 >= x_1` as a decreasing one.
pub fn check_orbit_monotone(record: &OrbitRecord, cone: &ConeSpec) -> MonotoneCheck {
    let pts = &record.points;
    let up: Vec<bool> = pts.windows(2).map(|w| cone.leq_unchecked(&w[0], &w[1])).collect();
    let down: Vec<bool> = pts.windows(2).map(|w| cone.leq_unchecked(&w[1], &w[0])).collect();
    let monotonicity = Monotonicity::from_flags(&up, &down);
    let first_violation = match (up.first(), down.first()) {
        (None, _) => None,
        (Some(true), _) => up.iter().position(|b| !b),
        (Some(false), Some(true)) => down.iter().position(|b| !b),
        _ => Some(0),
    };
    MonotoneCheck {
        monotonicity,
        first_violation,
    }
}

/// Norm limit of a monotone orbit: its last point, checked to bound every
/// earlier point in the direction of the chain.
pub fn monotone_limit(record: &OrbitRecord, cone: &ConeSpec) -> Result<Vector> {
    if record.verdict == Verdict::UnboundedSuspected {
        return Err(Error::Precondition("orbit is suspected unbounded".into()));
    }
    let check = check_orbit_monotone(record, cone);
    if check.first_violation.is_some() || check.monotonicity == Monotonicity::Neither {
        return Err(Error::Precondition(format!(
            "orbit is not monotone (first violation at n = {:?})",
            check.first_violation
        )));
    }
    let limit = record.last().clone();
    let bounded = record.points.iter().all(|x| {
        if check.monotonicity.is_increasing() {
            cone.margin(&(&limit - x)) >= -CONE_TOL
        } else {
            cone.margin(&(x - &limit)) >= -CONE_TOL
        }
    });
    if !bounded {
        return Err(Error::Precondition(
            "limit does not bound the orbit in the chain direction".into(),
        ));
    }
    Ok(limit)
}

/// Residual decay measured over the trailing part of an orbit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailBound {
    /// Mean per-step ratio of consecutive residuals.
    pub ratio: f64,
    /// `‖x_n‖ + r_n / (1 - ratio)`, the norm bound implied by geometric decay.
    pub norm_bound: f64,
}

/// Smallest per-step contraction of the residuals that counts as decay;
/// anything closer to 1 is indistinguishable from rounding.
pub const TAIL_RATIO_MAX: f64 = 1.0 - 1e-7;

/// Geometric extrapolation of the last `span` residuals (half the orbit by
/// default). `None` when they do not decay at a measurable rate, which is
/// how a translation orbit looks.
pub fn geometric_tail_bound(record: &OrbitRecord, span: Option<usize>) -> Option<TailBound> {
    let r = &record.residuals;
    let n = r.len();
    let span = span.unwrap_or(n / 2).min(n.saturating_sub(1));
    if span == 0 {
        return None;
    }
    let (first, last) = (r[n - 1 - span], r[n - 1]);
    let norm = *record.norms.last()?;
    if last == 0.0 {
        return Some(TailBound { ratio: 0.0, norm_bound: norm });
    }
    if first <= 0.0 {
        return None;
    }
    let ratio = (last / first).powf(1.0 / span as f64);
    (ratio <= TAIL_RATIO_MAX).then(|| TailBound {
        ratio,
        norm_bound: norm + last / (1.0 - ratio),
    })
}

/// Writes `n, x1..xd, residual, norm, leq_up, leq_down`; the flags of the
/// last row are empty.
pub fn write_orbit_csv<W: Write>(record: &OrbitRecord, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let dim = record.points.first().map_or(0, Vector::dim);
    let mut header = vec!["n".to_string()];
    header.extend((1..=dim).map(|i| format!("x{i}")));
    header.extend(["residual", "norm", "leq_up", "leq_down"].map(String::from));
    w.write_record(&header)?;
    for (n, x) in record.points.iter().enumerate() {
        let mut row = vec![n.to_string()];
        row.extend(x.coords().iter().map(f64::to_string));
        row.push(record.residuals[n].to_string());
        row.push(record.norms[n].to_string());
        let flag = |v: &Vec<bool>| v.get(n).map_or(String::new(), bool::to_string);
        row.push(flag(&record.leq_up));
        row.push(flag(&record.leq_down));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads the points of an orbit CSV written by [`write_orbit_csv`].
pub fn read_orbit_csv<R: Read>(input: R) -> Result<Vec<Vector>> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers()?.clone();
    let cols: Vec<usize> = header
        .iter()
        .enumerate()
        .filter(|(_, h)| h.starts_with('x') && h[1..].parse::<usize>().is_ok())
        .map(|(i, _)| i)
        .collect();
    if cols.is_empty() {
        return Err(Error::Format("orbit CSV has no coordinate columns x1..xd".into()));
    }
    let mut points = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec?;
        let coords = cols
            .iter()
            .map(|&i| {
                rec.get(i)
                    .and_then(|s| s.trim().parse::<f64>().ok())
                    .ok_or_else(|| Error::Format(format!("row {}: bad coordinate", line + 1)))
            })
            .collect::<Result<Vec<f64>>>()?;
        points.push(Vector::new(coords)?);
    }
    if points.is_empty() {
        return Err(Error::Format("orbit CSV has no rows".into()));
    }
    Ok(points)
}
