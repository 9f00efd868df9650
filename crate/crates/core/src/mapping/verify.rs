//! Sampled verifiers for the mapping classes.
//!
//! Every class is universally quantified over (comparable) pairs; the
//! verifiers test it on a seeded sample and return a [`PropertyReport`]
//! listing each violated pair with both sides of the inequality, so a
//! failure can be recomputed by hand.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::Mapping;
use crate::error::{Error, Result};
use crate::order::ConeSpec;
use crate::sample::{self, SamplerConfig};
use crate::space::SpaceSpec;
use crate::tol::{self, CONE_TOL, FIXED_POINT_TOL};
use crate::vector::Vector;

/// One failed instance of a checked inequality `lhs <= rhs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub check: String,
    pub x: Vector,
    pub y: Vector,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyReport {
    pub property: String,
    pub alpha: Option<f64>,
    pub samples: usize,
    pub violations: Vec<Violation>,
}

impl PropertyReport {
    fn new(property: impl Into<String>, alpha: Option<f64>) -> Self {
        PropertyReport {
            property: property.into(),
            alpha,
            samples: 0,
            violations: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    fn record(&mut self, check: &str, x: &Vector, y: &Vector, c: PairCheck) {
        if !c.holds {
            self.violations.push(Violation {
                check: check.to_string(),
                x: x.clone(),
                y: y.clone(),
                lhs: c.lhs,
                rhs: c.rhs,
            });
        }
    }
}

impl fmt::Display for PropertyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let alpha = self
            .alpha
            .map_or_else(|| "-".to_string(), |a| format!("{a:.4}"));
        write!(
            f,
            "{:<28} alpha={:<8} samples={:<6} violations={:<5} {}",
            self.property,
            alpha,
            self.samples,
            self.violations.len(),
            if self.passed() { "PASS" } else { "FAIL" }
        )?;
        if let Some(v) = self.violations.first() {
            write!(
                f,
                "\n    first witness [{}]: x={:.6} y={:.6} lhs={:.6e} rhs={:.6e}",
                v.check, v.x, v.y, v.lhs, v.rhs
            )?;
        }
        Ok(())
    }
}

/// Both sides of one inequality instance and its verdict.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

impl PairCheck {
    fn ineq(lhs: f64, rhs: f64) -> Self {
        PairCheck {
            lhs,
            rhs,
            holds: tol::holds(lhs, rhs),
        }
    }
}

fn check_dims(map: &Mapping, cone: &ConeSpec, space: Option<&SpaceSpec>) -> Result<()> {
    if cone.dim() != map.dim() {
        return Err(Error::DimensionMismatch {
            expected: map.dim(),
            found: cone.dim(),
        });
    }
    if let Some(s) = space {
        if s.dim() != map.dim() {
            return Err(Error::DimensionMismatch {
                expected: map.dim(),
                found: s.dim(),
            });
        }
    }
    Ok(())
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha.is_finite() && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "alpha = {alpha} must be finite and < 1"
        )))
    }
}

/// `Tx <= Ty`, encoded as `-margin(Ty - Tx) <= 0`.
pub fn monotone_pair(map: &Mapping, cone: &ConeSpec, x: &Vector, y: &Vector) -> Result<PairCheck> {
    let tx = map.apply(x)?;
    let ty = map.apply(y)?;
    let lhs = -cone.margin(&(&ty - &tx));
    Ok(PairCheck {
        lhs,
        rhs: 0.0,
        holds: lhs <= CONE_TOL,
    })
}

/// `‖Tx - Ty‖² <= ‖x - y‖²`.
pub fn nonexpansive_pair(map: &Mapping, space: &SpaceSpec, x: &Vector, y: &Vector) -> Result<PairCheck> {
    let tx = map.apply(x)?;
    let ty = map.apply(y)?;
    let lhs = space.dist_unchecked(&tx, &ty).powi(2);
    let rhs = space.dist_unchecked(x, y).powi(2);
    Ok(PairCheck::ineq(lhs, rhs))
}

/// `‖Tx - Ty‖² <= α‖Tx - y‖² + α‖Ty - x‖² + (1 - 2α)‖x - y‖²`.
///
/// At `α = 0` the right-hand side is bit-identical to the one used by
/// [`nonexpansive_pair`].
pub fn alpha_pair(
    map: &Mapping,
    space: &SpaceSpec,
    alpha: f64,
    x: &Vector,
    y: &Vector,
) -> Result<PairCheck> {
    check_alpha(alpha)?;
    let tx = map.apply(x)?;
    let ty = map.apply(y)?;
    let lhs = space.dist_unchecked(&tx, &ty).powi(2);
    let rhs = alpha * space.dist_unchecked(&tx, y).powi(2)
        + alpha * space.dist_unchecked(&ty, x).powi(2)
        + (1.0 - 2.0 * alpha) * space.dist_unchecked(x, y).powi(2);
    Ok(PairCheck::ineq(lhs, rhs))
}

/// Both sides of the perturbed nonexpansiveness bound satisfied by every
/// monotone α-nonexpansive map on comparable pairs:
/// `‖Tx-Ty‖² <= ‖x-y‖² + 2α/(1-α)‖Tx-x‖² + 2|α|/(1-α)‖Tx-x‖(‖x-y‖+‖Tx-Ty‖)`.
pub fn lemma22_pair(
    map: &Mapping,
    space: &SpaceSpec,
    alpha: f64,
    x: &Vector,
    y: &Vector,
) -> Result<PairCheck> {
    check_alpha(alpha)?;
    let tx = map.apply(x)?;
    let ty = map.apply(y)?;
    let txy = space.dist_unchecked(&tx, &ty);
    let xy = space.dist_unchecked(x, y);
    let res = space.dist_unchecked(&tx, x);
    let k = 1.0 - alpha;
    let rhs = xy * xy + 2.0 * alpha / k * res * res + 2.0 * alpha.abs() / k * res * (xy + txy);
    Ok(PairCheck::ineq(txy * txy, rhs))
}

pub fn check_lemma22_inequality(
    map: &Mapping,
    cone: &ConeSpec,
    space: &SpaceSpec,
    alpha: f64,
    x: &Vector,
    y: &Vector,
) -> Result<bool> {
    check_dims(map, cone, Some(space))?;
    if !cone.comparable(x, y)? {
        return Err(Error::IncomparablePair);
    }
    Ok(lemma22_pair(map, space, alpha, x, y)?.holds)
}

/// The seeded sample of comparable pairs shared by all order-based verifiers:
/// equal configurations give identical pairs.
pub fn comparable_pairs(map: &Mapping, cone: &ConeSpec, cfg: &SamplerConfig) -> Vec<(Vector, Vector)> {
    let mut rng = sample::rng(cfg.seed);
    (0..cfg.samples)
        .map(|_| map.sample_comparable_pair(cone, &mut rng, cfg.scale))
        .collect()
}

pub fn is_monotone(map: &Mapping, cone: &ConeSpec, cfg: &SamplerConfig) -> Result<PropertyReport> {
    check_dims(map, cone, None)?;
    let mut rep = PropertyReport::new("monotone", None);
    for (x, y) in comparable_pairs(map, cone, cfg) {
        rep.samples += 1;
        rep.record("Tx <= Ty", &x, &y, monotone_pair(map, cone, &x, &y)?);
    }
    Ok(rep)
}

pub fn is_monotone_nonexpansive(
    map: &Mapping,
    cone: &ConeSpec,
    space: &SpaceSpec,
    cfg: &SamplerConfig,
) -> Result<PropertyReport> {
    check_dims(map, cone, Some(space))?;
    let mut rep = PropertyReport::new("monotone nonexpansive", None);
    for (x, y) in comparable_pairs(map, cone, cfg) {
        rep.samples += 1;
        rep.record("Tx <= Ty", &x, &y, monotone_pair(map, cone, &x, &y)?);
        rep.record("nonexpansive", &x, &y, nonexpansive_pair(map, space, &x, &y)?);
    }
    Ok(rep)
}

pub fn is_alpha_nonexpansive(
    map: &Mapping,
    cone: &ConeSpec,
    space: &SpaceSpec,
    alpha: f64,
    cfg: &SamplerConfig,
) -> Result<PropertyReport> {
    check_alpha(alpha)?;
    check_dims(map, cone, Some(space))?;
    let mut rep = PropertyReport::new("monotone alpha-nonexpansive", Some(alpha));
    for (x, y) in comparable_pairs(map, cone, cfg) {
        rep.samples += 1;
        rep.record("Tx <= Ty", &x, &y, monotone_pair(map, cone, &x, &y)?);
        rep.record("alpha-nonexpansive", &x, &y, alpha_pair(map, space, alpha, &x, &y)?);
    }
    Ok(rep)
}

/// `‖Tx - p‖ <= ‖x - p‖` for sampled `x` comparable with each supplied fixed
/// point `p`. A supplied point that is not fixed is an error, not a failure.
pub fn is_quasi_nonexpansive(
    map: &Mapping,
    cone: &ConeSpec,
    space: &SpaceSpec,
    fixed_points: &[Vector],
    cfg: &SamplerConfig,
) -> Result<PropertyReport> {
    check_dims(map, cone, Some(space))?;
    if fixed_points.is_empty() {
        return Err(Error::Precondition(
            "quasi-nonexpansiveness needs at least one fixed point".into(),
        ));
    }
    for p in fixed_points {
        let residual = space.dist(&map.apply(p)?, p)?;
        if residual > FIXED_POINT_TOL {
            return Err(Error::NotFixedPoint { residual });
        }
    }
    let mut rep = PropertyReport::new("monotone quasi-nonexpansive", None);
    let mut rng = sample::rng(cfg.seed);
    for i in 0..cfg.samples {
        let p = &fixed_points[i % fixed_points.len()];
        let x = match map.sample_comparable_to(cone, p, &mut rng, cfg.scale) {
            Some(x) => x,
            None => continue,
        };
        rep.samples += 1;
        let tx = map.apply(&x)?;
        let c = PairCheck::ineq(space.dist_unchecked(&tx, p), space.dist_unchecked(&x, p));
        rep.record("|Tx - p| <= |x - p|", &x, p, c);
    }
    Ok(rep)
}

/// Parameters of the `(a, b)`-monotone class, `a > 1/2`, `b < a`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AbMonotone {
    pub a: f64,
    pub b: f64,
}

/// Hilbert-space classes checked on arbitrary (not necessarily comparable)
/// sampled pairs: nonspreading, hybrid, TJ and optionally `(a, b)`-monotone.
/// The inner product comes from the norm by polarization.
pub fn classify_hilbert_variants(
    map: &Mapping,
    space: &SpaceSpec,
    cfg: &SamplerConfig,
    ab: Option<AbMonotone>,
) -> Result<Vec<PropertyReport>> {
    if !space.is_euclidean() {
        return Err(Error::Unsupported(format!(
            "Hilbert-space classes need p = 2, got p = {}",
            space.p()
        )));
    }
    if space.dim() != map.dim() {
        return Err(Error::DimensionMismatch {
            expected: map.dim(),
            found: space.dim(),
        });
    }
    if let Some(AbMonotone { a, b }) = ab {
        if !(a > 0.5 && b < a) {
            return Err(Error::InvalidParameter(format!(
                "(a, b)-monotone needs a > 1/2 and b < a, got a = {a}, b = {b}"
            )));
        }
    }
    let sq = |u: &Vector, v: &Vector| space.dist_unchecked(u, v).powi(2);
    let inner = |u: &Vector, v: &Vector| {
        (space.norm_unchecked(&(u + v)).powi(2) - space.norm_unchecked(&(u - v)).powi(2)) / 4.0
    };

    let mut nonspreading = PropertyReport::new("nonspreading", None);
    let mut hybrid = PropertyReport::new("hybrid", None);
    let mut tj = PropertyReport::new("TJ", None);
    let mut abm = PropertyReport::new("(a,b)-monotone", None);

    let mut rng = sample::rng(cfg.seed);
    for _ in 0..cfg.samples {
        let x = map.sample_point(&mut rng, cfg.scale);
        let y = map.sample_point(&mut rng, cfg.scale);
        let tx = map.apply(&x)?;
        let ty = map.apply(&y)?;
        let txy = sq(&tx, &ty);
        for r in [&mut nonspreading, &mut hybrid, &mut tj] {
            r.samples += 1;
        }
        nonspreading.record(
            "2|Tx-Ty|^2 <= |Tx-y|^2 + |Ty-x|^2",
            &x,
            &y,
            PairCheck::ineq(2.0 * txy, sq(&tx, &y) + sq(&ty, &x)),
        );
        hybrid.record(
            "|Tx-Ty|^2 <= |x-y|^2 + <x-Tx, y-Ty>",
            &x,
            &y,
            PairCheck::ineq(txy, sq(&x, &y) + inner(&(&x - &tx), &(&y - &ty))),
        );
        tj.record(
            "2|Tx-Ty|^2 <= |x-y|^2 + |Tx-y|^2",
            &x,
            &y,
            PairCheck::ineq(2.0 * txy, sq(&x, &y) + sq(&tx, &y)),
        );
        if let Some(AbMonotone { a, b }) = ab {
            abm.samples += 1;
            let lhs = a * txy + (1.0 - a) * sq(&x, &y) - b * sq(&x, &tx) - b * sq(&y, &ty);
            let rhs = inner(&(&x - &y), &(&tx - &ty));
            abm.record("(a,b)-monotone", &x, &y, PairCheck::ineq(lhs, rhs));
        }
    }
    let mut out = vec![nonspreading, hybrid, tj];
    if ab.is_some() {
        abm.property = format!(
            "(a,b)-monotone a={} b={}",
            ab.map(|p| p.a).unwrap_or_default(),
            ab.map(|p| p.b).unwrap_or_default()
        );
        out.push(abm);
    }
    Ok(out)
}

/// Exhaustive check over every comparable pair of lattice nodes of a
/// grid-defined map: monotonicity plus the α-inequality (`alpha = None`
/// checks plain nonexpansiveness).
pub fn exhaustive_grid_check(
    map: &Mapping,
    cone: &ConeSpec,
    space: &SpaceSpec,
    alpha: Option<f64>,
) -> Result<PropertyReport> {
    check_dims(map, cone, Some(space))?;
    let grid = map
        .grid()
        .ok_or_else(|| Error::Unsupported("exhaustive check needs a grid-defined map".into()))?;
    if let Some(a) = alpha {
        check_alpha(a)?;
    }
    let name = if alpha.is_some() {
        "exhaustive alpha-nonexpansive"
    } else {
        "exhaustive nonexpansive"
    };
    let mut rep = PropertyReport::new(name, alpha);
    let nodes: Vec<Vector> = grid.nodes().filter(|n| map.domain().contains(n)).collect();
    for x in &nodes {
        for y in &nodes {
            if !cone.leq(x, y)? {
                continue;
            }
            rep.samples += 1;
            rep.record("Tx <= Ty", x, y, monotone_pair(map, cone, x, y)?);
            let c = match alpha {
                Some(a) => alpha_pair(map, space, a, x, y)?,
                None => nonexpansive_pair(map, space, x, y)?,
            };
            rep.record(name, x, y, c);
        }
    }
    Ok(rep)
}
