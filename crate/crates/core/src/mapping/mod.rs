//! Declarative self-maps `T : K -> K` on closed convex domains.
//!
//! A [`Mapping`] pairs a [`MapKind`] with its [`Domain`]. Construction checks
//! that `T` maps sampled domain points back into the domain, so every value
//! that exists is a self-map as far as sampling can tell.

mod oracle;
mod verify;

pub use oracle::{affine_fixed_point, fixed_point_oracle, AffineFixedPoint, OracleConfig};
pub use verify::{
    alpha_pair, check_lemma22_inequality, classify_hilbert_variants, comparable_pairs,
    exhaustive_grid_check, is_alpha_nonexpansive, is_monotone, is_monotone_nonexpansive,
    is_quasi_nonexpansive, lemma22_pair, monotone_pair, nonexpansive_pair, AbMonotone, PairCheck,
    PropertyReport, Violation,
};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::order::{ConeSpec, OrderInterval};
use crate::sample::{self, SeededRng};
use crate::tol::CONE_TOL;
use crate::vector::Vector;

/// Values of a map on a rectangular lattice, extended to the lattice's
/// bounding box by flooring each coordinate to the nearest node below.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridTable {
    /// Strictly increasing node coordinates per axis.
    pub axes: Vec<Vec<f64>>,
    /// One value per node, row-major with the last axis varying fastest.
    pub values: Vec<Vector>,
}

impl GridTable {
    fn validate(&self) -> Result<()> {
        if self.axes.is_empty() || self.axes.iter().any(|a| a.is_empty()) {
            return Err(Error::InvalidParameter("grid axes must be non-empty".into()));
        }
        for a in &self.axes {
            if a.iter().any(|c| !c.is_finite()) || a.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidParameter(
                    "grid axes must be finite and strictly increasing".into(),
                ));
            }
        }
        let nodes: usize = self.axes.iter().map(Vec::len).product();
        if self.values.len() != nodes {
            return Err(Error::InvalidParameter(format!(
                "grid has {nodes} nodes but {} values",
                self.values.len()
            )));
        }
        for v in &self.values {
            v.ensure_dim(self.axes.len())?;
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn node_count(&self) -> usize {
        self.values.len()
    }

    fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter()
            .zip(&self.axes)
            .fold(0, |acc, (&i, axis)| acc * axis.len() + i)
    }

    fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.axes.len()];
        for (k, axis) in self.axes.iter().enumerate().rev() {
            idx[k] = flat % axis.len();
            flat /= axis.len();
        }
        idx
    }

    pub fn node(&self, flat: usize) -> Vector {
        let idx = self.multi_index(flat);
        Vector::raw(
            idx.iter()
                .zip(&self.axes)
                .map(|(&i, axis)| axis[i])
                .collect(),
        )
    }

    pub fn nodes(&self) -> impl Iterator<Item = Vector> + '_ {
        (0..self.node_count()).map(|i| self.node(i))
    }

    /// Per-axis index of the node at or below each coordinate.
    fn floor_index(&self, x: &Vector) -> Vec<usize> {
        x.coords()
            .iter()
            .zip(&self.axes)
            .map(|(&c, axis)| axis.partition_point(|&a| a <= c + CONE_TOL).saturating_sub(1))
            .collect()
    }

    fn eval(&self, x: &Vector) -> Vector {
        self.values[self.flat_index(&self.floor_index(x))].clone()
    }

    pub fn lower_corner(&self) -> Vector {
        Vector::raw(self.axes.iter().map(|a| a[0]).collect())
    }

    pub fn upper_corner(&self) -> Vector {
        Vector::raw(self.axes.iter().map(|a| a[a.len() - 1]).collect())
    }
}

/// The declarative description of `T`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum MapKind {
    /// `x -> A x + b`, with `A` given by rows.
    Affine { a: Vec<Vec<f64>>, b: Vector },
    /// `x -> min(x, c)` componentwise.
    Truncation { c: Vector },
    /// `x -> x + b`.
    Translation { b: Vector },
    /// `x -> clamp(x, lo, hi)` componentwise.
    BoxProjection { lo: Vector, hi: Vector },
    /// Applies `maps[0]` first, then `maps[1]`, and so on.
    Composition { maps: Vec<MapKind> },
    Grid(GridTable),
}

impl MapKind {
    pub fn dim(&self) -> Result<usize> {
        match self {
            MapKind::Affine { a, b } => {
                let n = b.dim();
                if a.len() != n || a.iter().any(|row| row.len() != n) {
                    return Err(Error::InvalidParameter(format!(
                        "affine matrix must be {n}x{n} to match b"
                    )));
                }
                if a.iter().flatten().any(|c| !c.is_finite()) {
                    return Err(Error::InvalidParameter("affine matrix is not finite".into()));
                }
                Ok(n)
            }
            MapKind::Truncation { c } => Ok(c.dim()),
            MapKind::Translation { b } => Ok(b.dim()),
            MapKind::BoxProjection { lo, hi } => {
                hi.ensure_dim(lo.dim())?;
                if lo.coords().iter().zip(hi.coords()).any(|(l, h)| l > h) {
                    return Err(Error::InvalidParameter("box projection needs lo <= hi".into()));
                }
                Ok(lo.dim())
            }
            MapKind::Composition { maps } => {
                let (first, rest) = maps
                    .split_first()
                    .ok_or_else(|| Error::InvalidParameter("empty composition".into()))?;
                let d = first.dim()?;
                for m in rest {
                    if m.dim()? != d {
                        return Err(Error::DimensionMismatch {
                            expected: d,
                            found: m.dim()?,
                        });
                    }
                }
                Ok(d)
            }
            MapKind::Grid(g) => {
                g.validate()?;
                Ok(g.dim())
            }
        }
    }

    fn eval(&self, x: &Vector) -> Vector {
        match self {
            MapKind::Affine { a, b } => Vector::raw(
                a.iter()
                    .zip(b.coords())
                    .map(|(row, bi)| row.iter().zip(x.coords()).map(|(r, c)| r * c).sum::<f64>() + bi)
                    .collect(),
            ),
            MapKind::Truncation { c } => x.zip_with(c, f64::min),
            MapKind::Translation { b } => x + b,
            MapKind::BoxProjection { lo, hi } => {
                x.zip_with(lo, f64::max).zip_with(hi, f64::min)
            }
            MapKind::Composition { maps } => maps
                .iter()
                .fold(x.clone(), |acc, m| m.eval(&acc)),
            MapKind::Grid(g) => g.eval(x),
        }
    }

    /// Short label used in reports.
    pub fn label(&self) -> &'static str {
        match self {
            MapKind::Affine { .. } => "affine",
            MapKind::Truncation { .. } => "truncation",
            MapKind::Translation { .. } => "translation",
            MapKind::BoxProjection { .. } => "box_projection",
            MapKind::Composition { .. } => "composition",
            MapKind::Grid(_) => "grid",
        }
    }
}

/// The closed convex set `K` a mapping acts on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Domain {
    Cone { cone: ConeSpec },
    Interval { interval: OrderInterval },
    Box { lo: Vector, hi: Vector },
}

impl Domain {
    pub fn cone(cone: ConeSpec) -> Self {
        Domain::Cone { cone }
    }

    pub fn interval(interval: OrderInterval) -> Self {
        Domain::Interval { interval }
    }

    pub fn boxed(lo: Vector, hi: Vector) -> Result<Self> {
        let d = Domain::Box { lo, hi };
        d.validate()?;
        Ok(d)
    }

    fn validate(&self) -> Result<usize> {
        match self {
            Domain::Cone { cone } => Ok(cone.dim()),
            Domain::Interval { interval } => {
                // re-validate: deserialized intervals skip the constructor
                OrderInterval::new(*interval.cone(), interval.lo().clone(), interval.hi().clone())?;
                Ok(interval.cone().dim())
            }
            Domain::Box { lo, hi } => {
                hi.ensure_dim(lo.dim())?;
                if lo.coords().iter().zip(hi.coords()).any(|(l, h)| l > h) {
                    return Err(Error::InvalidParameter("box domain needs lo <= hi".into()));
                }
                Ok(lo.dim())
            }
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Domain::Cone { cone } => cone.dim(),
            Domain::Interval { interval } => interval.cone().dim(),
            Domain::Box { lo, .. } => lo.dim(),
        }
    }

    pub fn contains(&self, x: &Vector) -> bool {
        if x.dim() != self.dim() {
            return false;
        }
        match self {
            Domain::Cone { cone } => cone.margin(x) >= -CONE_TOL,
            Domain::Interval { interval } => interval.contains(x).unwrap_or(false),
            Domain::Box { lo, hi } => x
                .coords()
                .iter()
                .zip(lo.coords().iter().zip(hi.coords()))
                .all(|(&c, (&l, &h))| c >= l - CONE_TOL && c <= h + CONE_TOL),
        }
    }

    pub fn sample(&self, rng: &mut SeededRng, scale: f64) -> Vector {
        match self {
            Domain::Cone { cone } => cone.sample_member(rng, scale),
            Domain::Interval { interval } => interval.sample(rng),
            Domain::Box { lo, hi } => sample::uniform_box(rng, lo.coords(), hi.coords()),
        }
    }

    /// Axis-aligned bounding box, when the domain is bounded and one is
    /// cheaply available.
    pub fn bounding_box(&self) -> Option<(Vector, Vector)> {
        match self {
            Domain::Cone { .. } => None,
            Domain::Interval { interval } if interval.cone().is_minihedral() => {
                Some((interval.lo().clone(), interval.hi().clone()))
            }
            Domain::Interval { .. } => None,
            Domain::Box { lo, hi } => Some((lo.clone(), hi.clone())),
        }
    }

    /// Corners of a box domain (up to dimension 12).
    fn corners(&self) -> Vec<Vector> {
        match self.bounding_box() {
            Some((lo, hi)) if lo.dim() <= 12 => (0..1usize << lo.dim())
                .map(|mask| {
                    Vector::raw(
                        (0..lo.dim())
                            .map(|i| if mask >> i & 1 == 1 { hi[i] } else { lo[i] })
                            .collect(),
                    )
                })
                .collect(),
            _ => Vec::new(),
        }
    }
}

/// Number of sampled points used by the constructor's self-map check.
const SELF_MAP_SAMPLES: usize = 512;
const SELF_MAP_SEED: u64 = 0x5e1f_3a9;

/// A self-map `T : K -> K`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MappingFile", into = "MappingFile")]
pub struct Mapping {
    kind: MapKind,
    domain: Domain,
    dim: usize,
}

/// On-disk form of a mapping: `{"map": {...}, "domain": {...}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MappingFile {
    pub map: MapKind,
    pub domain: Domain,
}

impl TryFrom<MappingFile> for Mapping {
    type Error = Error;

    fn try_from(f: MappingFile) -> Result<Self> {
        Mapping::new(f.map, f.domain)
    }
}

impl From<Mapping> for MappingFile {
    fn from(m: Mapping) -> Self {
        MappingFile {
            map: m.kind,
            domain: m.domain,
        }
    }
}

impl Mapping {
    pub fn new(kind: MapKind, domain: Domain) -> Result<Self> {
        let dim = kind.dim()?;
        let ddim = domain.validate()?;
        if dim != ddim {
            return Err(Error::DimensionMismatch {
                expected: ddim,
                found: dim,
            });
        }
        let m = Mapping { kind, domain, dim };
        m.check_self_map()?;
        Ok(m)
    }

    fn check_self_map(&self) -> Result<()> {
        let mut rng = sample::rng(SELF_MAP_SEED);
        let mut probes: Vec<Vector> = self.domain.corners();
        if let MapKind::Grid(g) = &self.kind {
            probes.extend(g.nodes().filter(|n| self.domain.contains(n)));
        }
        probes.extend((0..SELF_MAP_SAMPLES).map(|_| self.domain.sample(&mut rng, 4.0)));
        for x in probes.iter().filter(|x| self.domain.contains(x)) {
            let tx = self.kind.eval(x);
            if tx.ensure_finite().is_err() || !self.domain.contains(&tx) {
                return Err(Error::NotSelfMap(format!("T{x} = {tx} leaves the domain")));
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn kind(&self) -> &MapKind {
        &self.kind
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn grid(&self) -> Option<&GridTable> {
        match &self.kind {
            MapKind::Grid(g) => Some(g),
            _ => None,
        }
    }

    /// `T(x)`; fails if `x` is outside the domain or the image is not finite.
    pub fn apply(&self, x: &Vector) -> Result<Vector> {
        x.ensure_dim(self.dim)?;
        x.ensure_finite()?;
        if !self.domain.contains(x) {
            return Err(Error::OutsideDomain(format!("{x}")));
        }
        let tx = self.kind.eval(x);
        tx.ensure_finite()?;
        Ok(tx)
    }

    /// Domain point; grid maps draw lattice nodes.
    pub fn sample_point(&self, rng: &mut SeededRng, scale: f64) -> Vector {
        match &self.kind {
            MapKind::Grid(g) => {
                let nodes: Vec<Vector> = g.nodes().filter(|n| self.domain.contains(n)).collect();
                if nodes.is_empty() {
                    self.domain.sample(rng, scale)
                } else {
                    nodes[rng.random_range(0..nodes.len())].clone()
                }
            }
            _ => self.domain.sample(rng, scale),
        }
    }

    /// Pair `x <= y` inside the domain.
    pub fn sample_comparable_pair(
        &self,
        cone: &ConeSpec,
        rng: &mut SeededRng,
        scale: f64,
    ) -> (Vector, Vector) {
        if let (MapKind::Grid(g), crate::order::ConeKind::Orthant) = (&self.kind, cone.kind()) {
            // lattice pair: every axis index of y at least that of x
            let lo: Vec<usize> = g.axes.iter().map(|a| rng.random_range(0..a.len())).collect();
            let hi: Vec<usize> = lo
                .iter()
                .zip(&g.axes)
                .map(|(&i, a)| rng.random_range(i..a.len()))
                .collect();
            let x = g.node(g.flat_index(&lo));
            let y = g.node(g.flat_index(&hi));
            if self.domain.contains(&x) && self.domain.contains(&y) {
                return (x, y);
            }
        }
        let x = self.sample_point(rng, scale);
        let d = cone.sample_member(rng, scale);
        let mut s = 1.0;
        for _ in 0..48 {
            let y = &x + &(&d * s);
            if self.domain.contains(&y) {
                return (x, y);
            }
            s *= 0.5;
        }
        (x.clone(), x)
    }

    /// Point comparable with `p`, on a random side of it, inside the domain.
    pub(crate) fn sample_comparable_to(
        &self,
        cone: &ConeSpec,
        p: &Vector,
        rng: &mut SeededRng,
        scale: f64,
    ) -> Option<Vector> {
        let d = cone.sample_member(rng, scale);
        let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        let mut s = sign;
        for _ in 0..48 {
            let x = p + &(&d * s);
            if self.domain.contains(&x) {
                return Some(x);
            }
            s *= 0.5;
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::order::ConeKind;

    fn v(c: &[f64]) -> Vector {
        Vector::from_slice(c).unwrap()
    }

    fn orthant2() -> Domain {
        Domain::cone(ConeSpec::orthant(2))
    }

    #[test]
    fn apply_examples() {
        let t = Mapping::new(MapKind::Truncation { c: v(&[1.0, 2.0]) }, orthant2()).unwrap();
        assert_eq!(t.apply(&v(&[0.5, 2.0])).unwrap(), v(&[0.5, 2.0]));
        assert_eq!(t.apply(&v(&[3.0, 0.5])).unwrap(), v(&[1.0, 0.5]));

        let b = v(&[0.7, 0.2]);
        let c = Mapping::new(
            MapKind::Affine {
                a: vec![vec![0.0; 2]; 2],
                b: b.clone(),
            },
            orthant2(),
        )
        .unwrap();
        assert_eq!(c.apply(&v(&[9.0, 4.0])).unwrap(), b);

        let a = Mapping::new(
            MapKind::Affine {
                a: vec![vec![0.5, 0.25], vec![0.1, 0.3]],
                b: v(&[1.0, 2.0]),
            },
            orthant2(),
        )
        .unwrap();
        // hand-expanded matrix-vector product
        let got = a.apply(&v(&[2.0, 4.0])).unwrap();
        assert_eq!(got, v(&[0.5 * 2.0 + 0.25 * 4.0 + 1.0, 0.1 * 2.0 + 0.3 * 4.0 + 2.0]));
    }

    #[test]
    fn outside_domain_is_an_error() {
        let t = Mapping::new(MapKind::Truncation { c: v(&[1.0, 2.0]) }, orthant2()).unwrap();
        assert!(matches!(t.apply(&v(&[-1.0, 0.0])), Err(Error::OutsideDomain(_))));
        assert!(matches!(
            t.apply(&v(&[1.0, 0.0, 0.0])),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn rejects_non_self_maps() {
        let neg = MapKind::Translation { b: v(&[-1.0, 0.0]) };
        assert!(matches!(Mapping::new(neg, orthant2()), Err(Error::NotSelfMap(_))));
        let bad = MapKind::Affine {
            a: vec![vec![0.5, -0.3], vec![0.0, 0.5]],
            b: v(&[0.0, 0.0]),
        };
        assert!(matches!(Mapping::new(bad, orthant2()), Err(Error::NotSelfMap(_))));
        let shape = MapKind::Affine {
            a: vec![vec![0.5, 0.0]],
            b: v(&[0.0, 0.0]),
        };
        assert!(Mapping::new(shape, orthant2()).is_err());
    }

    #[test]
    fn composition_applies_in_order() {
        let dom = Domain::boxed(v(&[0.0, 0.0]), v(&[4.0, 4.0])).unwrap();
        let m = Mapping::new(
            MapKind::Composition {
                maps: vec![
                    MapKind::Translation { b: v(&[-1.0, -1.0]) },
                    MapKind::BoxProjection {
                        lo: v(&[0.0, 0.0]),
                        hi: v(&[4.0, 4.0]),
                    },
                ],
            },
            dom,
        )
        .unwrap();
        assert_eq!(m.apply(&v(&[3.5, 0.5])).unwrap(), v(&[2.5, 0.0]));
    }

    #[test]
    fn grid_floor_extension() {
        let g = GridTable {
            axes: vec![vec![0.0, 1.0, 2.0]],
            values: vec![v(&[0.0]), v(&[0.0]), v(&[1.0])],
        };
        let m = Mapping::new(
            MapKind::Grid(g),
            Domain::boxed(v(&[0.0]), v(&[2.0])).unwrap(),
        )
        .unwrap();
        assert_eq!(m.apply(&v(&[1.999])).unwrap(), v(&[0.0]));
        assert_eq!(m.apply(&v(&[2.0])).unwrap(), v(&[1.0]));
        assert_eq!(m.grid().unwrap().node(2), v(&[2.0]));
    }

    #[test]
    fn grid_index_roundtrip() {
        let g = GridTable {
            axes: vec![vec![0.0, 1.0], vec![0.0, 1.0, 2.0]],
            values: vec![v(&[0.0, 0.0]); 6],
        };
        for flat in 0..6 {
            assert_eq!(g.flat_index(&g.multi_index(flat)), flat);
        }
        assert_eq!(g.node(4), v(&[1.0, 1.0]));
    }

    #[test]
    fn json_file_format() {
        let text = r#"{
            "map": {"variant": "affine", "a": [[0.5, 0.0], [0.0, 0.5]], "b": [1.0, 1.0]},
            "domain": {"kind": "cone", "cone": {"kind": "orthant", "dim": 2}}
        }"#;
        let m = Mapping::from_json(text).unwrap();
        assert_eq!(m.dim(), 2);
        assert_eq!(m.apply(&v(&[2.0, 2.0])).unwrap(), v(&[2.0, 2.0]));
        let back = Mapping::from_json(&m.to_json().unwrap()).unwrap();
        assert_eq!(back, m);

        // schema violations surface as errors, not panics
        let bad = r#"{"map": {"variant": "translation", "b": [-1.0, 0.0]},
                      "domain": {"kind": "cone", "cone": {"kind": "orthant", "dim": 2}}}"#;
        assert!(Mapping::from_json(bad).is_err());
        let unknown = r#"{"map": {"variant": "rotation"}, "domain": {"kind": "box", "lo": [0], "hi": [1]}}"#;
        assert!(Mapping::from_json(unknown).is_err());
    }

    #[test]
    fn comparable_pairs_are_ordered_and_in_domain() {
        let dom = Domain::boxed(v(&[0.0, 0.0]), v(&[1.0, 1.0])).unwrap();
        let m = Mapping::new(MapKind::Translation { b: v(&[0.0, 0.0]) }, dom).unwrap();
        let mut rng = sample::rng(3);
        for kind in [ConeKind::Orthant, ConeKind::Lorentz] {
            let cone = ConeSpec::new(kind, 2).unwrap();
            for _ in 0..200 {
                let (x, y) = m.sample_comparable_pair(&cone, &mut rng, 4.0);
                assert!(cone.leq(&x, &y).unwrap());
                assert!(m.domain().contains(&x) && m.domain().contains(&y));
            }
        }
    }
}
