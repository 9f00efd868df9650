//! Fixed-point oracles, independent of the iteration schemes.
//!
//! Affine maps (and compositions of affine maps and translations) are solved
//! in closed form: an LU solve when `I - A` is invertible, an eigenbasis of
//! `(I - A)ᵀ(I - A)` otherwise. Grid-defined maps have their
//! fixed points among their own values, which are checked exactly. Any other
//! map is scanned on a lattice over a bounded region, and near-fixed nodes
//! are refined by a few Picard steps.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{MapKind, Mapping};
use crate::error::{Error, Result};
use crate::sample;
use crate::vector::Vector;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OracleConfig {
    /// Search box; `None` uses the domain's bounding box.
    pub region: Option<(Vector, Vector)>,
    pub points_per_axis: usize,
    /// Sup-norm residual below which a point is reported as fixed.
    pub tol: f64,
    pub refine_steps: usize,
    /// Largest lattice the scan may visit.
    pub max_nodes: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            region: None,
            points_per_axis: 41,
            tol: 1e-9,
            refine_steps: 200,
            max_nodes: 2_000_000,
        }
    }
}

/// Closed-form fixed point of an affine map.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineFixedPoint {
    pub point: Vector,
    /// `I - A` is invertible, so this is the only fixed point in the space.
    pub unique: bool,
}

/// `(A, b)` with `T(x) = A x + b`, when the map is affine.
fn affine_parts(kind: &MapKind, dim: usize) -> Option<(DMatrix<f64>, DVector<f64>)> {
    match kind {
        MapKind::Affine { a, b } => Some((
            DMatrix::from_fn(dim, dim, |i, j| a[i][j]),
            DVector::from_column_slice(b.coords()),
        )),
        MapKind::Translation { b } => Some((
            DMatrix::identity(dim, dim),
            DVector::from_column_slice(b.coords()),
        )),
        MapKind::Composition { maps } => {
            let mut acc = (DMatrix::identity(dim, dim), DVector::zeros(dim));
            for m in maps {
                let (a, b) = affine_parts(m, dim)?;
                acc = (&a * &acc.0, &a * &acc.1 + b);
            }
            Some(acc)
        }
        _ => None,
    }
}

fn to_vector(v: &DVector<f64>) -> Vector {
    Vector::raw(v.iter().copied().collect())
}

/// Fixed point of an affine map inside its domain, `Ok(None)` when there is
/// none. When `I - A` is singular the solution set is an affine subspace;
/// the minimum-norm solution is tried first, then projections of domain
/// corners and samples onto the subspace.
pub fn affine_fixed_point(map: &Mapping) -> Result<Option<AffineFixedPoint>> {
    let n = map.dim();
    let (a, b) = affine_parts(map.kind(), n)
        .ok_or_else(|| Error::Unsupported(format!("{} map is not affine", map.kind().label())))?;
    let m = DMatrix::identity(n, n) - a;
    let accept = |x: &DVector<f64>| (&m * x - &b).amax() <= 1e-9 * (1.0 + b.amax());

    // singular values of I - A are square roots of the eigenvalues of MᵀM
    let eig = (m.transpose() * &m).symmetric_eigen();
    let lmax = eig.eigenvalues.max().max(1.0);
    let singular = |l: f64| l <= 1e-14 * lmax;
    let unique = !eig.eigenvalues.iter().any(|&l| singular(l));

    let x = if unique {
        m.clone()
            .full_piv_lu()
            .solve(&b)
            .ok_or_else(|| Error::Solver("LU solve of I - A failed".into()))?
    } else {
        // minimum-norm least-squares solution through the eigenbasis
        let mtb = m.transpose() * &b;
        let mut x = DVector::zeros(n);
        for (i, &l) in eig.eigenvalues.iter().enumerate() {
            if !singular(l) {
                let v = eig.eigenvectors.column(i);
                x += v * (v.dot(&mtb) / l);
            }
        }
        x
    };
    if !accept(&x) {
        return Ok(None);
    }
    let point = to_vector(&x);
    if map.domain().contains(&point) {
        return Ok(Some(AffineFixedPoint { point, unique }));
    }
    if unique {
        return Ok(None);
    }
    let kernel: Vec<DVector<f64>> = eig
        .eigenvalues
        .iter()
        .enumerate()
        .filter(|(_, &l)| singular(l))
        .map(|(i, _)| eig.eigenvectors.column(i).into_owned())
        .collect();
    let project = |z: &Vector| {
        let d = DVector::from_column_slice(z.coords()) - &x;
        let mut p = x.clone();
        for k in &kernel {
            p += k * k.dot(&d);
        }
        to_vector(&p)
    };
    let mut candidates = map.domain().corners();
    let mut rng = sample::rng(0x0fac_1e);
    candidates.extend((0..256).map(|_| map.domain().sample(&mut rng, 4.0)));
    Ok(candidates
        .iter()
        .map(project)
        .find(|p| map.domain().contains(p))
        .map(|point| AffineFixedPoint {
            point,
            unique: false,
        }))
}

fn residual(map: &Mapping, x: &Vector) -> Option<f64> {
    map.apply(x).ok().map(|tx| (&tx - x).max_abs())
}

/// All fixed points the oracle can certify, deduplicated within `1e-6` and
/// sorted lexicographically. An empty result means none was found in the
/// searched region.
pub fn fixed_point_oracle(map: &Mapping, cfg: &OracleConfig) -> Result<Vec<Vector>> {
    if affine_parts(map.kind(), map.dim()).is_some() {
        return Ok(affine_fixed_point(map)?.map(|f| vec![f.point]).unwrap_or_default());
    }
    let mut found = Vec::new();
    if let Some(g) = map.grid() {
        // T is constant on each floor cell, so a fixed point is a value
        for v in &g.values {
            if residual(map, v).is_some_and(|r| r <= cfg.tol) {
                found.push(v.clone());
            }
        }
        return Ok(finish(found));
    }

    let (lo, hi) = match (&cfg.region, map.domain().bounding_box()) {
        (Some(r), _) => r.clone(),
        (None, Some(b)) => b,
        (None, None) => return Err(Error::UnboundedRegion),
    };
    lo.ensure_dim(map.dim())?;
    hi.ensure_dim(map.dim())?;
    let k = cfg.points_per_axis.max(2);
    let total = (k as f64).powi(map.dim() as i32);
    if total > cfg.max_nodes as f64 {
        return Err(Error::InvalidParameter(format!(
            "lattice of {total} nodes exceeds max_nodes = {}",
            cfg.max_nodes
        )));
    }
    let steps: Vec<f64> = lo
        .coords()
        .iter()
        .zip(hi.coords())
        .map(|(l, h)| (h - l) / (k - 1) as f64)
        .collect();
    let near = 2.0 * steps.iter().cloned().fold(0.0, f64::max);
    let mut idx = vec![0usize; map.dim()];
    for _ in 0..total as usize {
        let x = Vector::raw(
            idx.iter()
                .zip(lo.coords().iter().zip(&steps))
                .map(|(&i, (l, s))| l + s * i as f64)
                .collect(),
        );
        if let Some(r) = residual(map, &x) {
            if r <= cfg.tol {
                found.push(x);
            } else if r <= near {
                if let Some(z) = refine(map, x, cfg) {
                    found.push(z);
                }
            }
        }
        for d in (0..idx.len()).rev() {
            idx[d] += 1;
            if idx[d] < k {
                break;
            }
            idx[d] = 0;
        }
    }
    Ok(finish(found))
}

fn refine(map: &Mapping, mut x: Vector, cfg: &OracleConfig) -> Option<Vector> {
    for _ in 0..cfg.refine_steps {
        let tx = map.apply(&x).ok()?;
        if (&tx - &x).max_abs() <= cfg.tol {
            return Some(tx);
        }
        x = tx;
    }
    residual(map, &x).filter(|&r| r <= cfg.tol).map(|_| x)
}

fn finish(mut points: Vec<Vector>) -> Vec<Vector> {
    points.sort_by(|a, b| {
        a.coords()
            .iter()
            .zip(b.coords())
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let mut out: Vec<Vector> = Vec::new();
    for p in points {
        if out.iter().all(|q| (q - &p).max_abs() > 1e-6) {
            out.push(p);
        }
    }
    out
}
