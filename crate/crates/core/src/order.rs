//! Cone-induced partial orders on `R^d`.
//!
//! `x <= y` iff `y - x` lies in the cone. Two cones ship: the non-negative
//! orthant (a lattice, so pairwise and set suprema exist) and the Lorentz
//! (second-order) cone, which is normal but not minihedral.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sample::{self, SeededRng};
use crate::space::{lp_norm, SpaceSpec};
use crate::tol::CONE_TOL;
use crate::vector::Vector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConeKind {
    Orthant,
    Lorentz,
}

impl fmt::Display for ConeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ConeKind::Orthant => "orthant",
            ConeKind::Lorentz => "lorentz",
        })
    }
}

impl FromStr for ConeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "orthant" => Ok(ConeKind::Orthant),
            "lorentz" => Ok(ConeKind::Lorentz),
            other => Err(Error::Format(format!("unknown cone {other:?}"))),
        }
    }
}

/// A closed convex pointed cone in `R^dim`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawCone")]
pub struct ConeSpec {
    kind: ConeKind,
    dim: usize,
}

#[derive(Deserialize)]
struct RawCone {
    kind: ConeKind,
    dim: usize,
}

impl TryFrom<RawCone> for ConeSpec {
    type Error = Error;

    fn try_from(raw: RawCone) -> Result<Self> {
        ConeSpec::new(raw.kind, raw.dim)
    }
}

impl ConeSpec {
    pub fn new(kind: ConeKind, dim: usize) -> Result<Self> {
        match (kind, dim) {
            (_, 0) => Err(Error::InvalidParameter("cone dimension must be positive".into())),
            (ConeKind::Lorentz, 1) => Err(Error::InvalidParameter(
                "the Lorentz cone needs dimension >= 2".into(),
            )),
            _ => Ok(ConeSpec { kind, dim }),
        }
    }

    pub fn orthant(dim: usize) -> Self {
        ConeSpec::new(ConeKind::Orthant, dim).expect("positive dimension")
    }

    pub fn lorentz(dim: usize) -> Result<Self> {
        ConeSpec::new(ConeKind::Lorentz, dim)
    }

    pub fn kind(&self) -> ConeKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_minihedral(&self) -> bool {
        self.kind == ConeKind::Orthant
    }

    /// Signed distance-like margin: non-negative exactly on the cone.
    /// Orthant: smallest coordinate. Lorentz: `x_last - ‖x_rest‖₂`.
    pub fn margin(&self, x: &Vector) -> f64 {
        let c = x.coords();
        match self.kind {
            ConeKind::Orthant => c.iter().copied().fold(f64::INFINITY, f64::min),
            ConeKind::Lorentz => {
                let (last, rest) = c.split_last().expect("non-empty");
                last - lp_norm(rest, 2.0)
            }
        }
    }

    fn check(&self, x: &Vector) -> Result<()> {
        x.ensure_dim(self.dim)
    }

    pub fn contains(&self, x: &Vector) -> Result<bool> {
        self.check(x)?;
        Ok(self.margin(x) >= -CONE_TOL)
    }

    pub fn interior_contains(&self, x: &Vector) -> Result<bool> {
        self.check(x)?;
        Ok(self.margin(x) > CONE_TOL)
    }

    /// `x <= y`.
    pub fn leq(&self, x: &Vector, y: &Vector) -> Result<bool> {
        self.check(x)?;
        self.contains(&(y - x))
    }

    pub fn geq(&self, x: &Vector, y: &Vector) -> Result<bool> {
        self.leq(y, x)
    }

    /// `x < y`: ordered and distinct.
    pub fn lt(&self, x: &Vector, y: &Vector) -> Result<bool> {
        Ok(self.leq(x, y)? && x != y)
    }

    /// `x << y`: `y - x` in the interior of the cone.
    pub fn ll(&self, x: &Vector, y: &Vector) -> Result<bool> {
        self.check(x)?;
        self.interior_contains(&(y - x))
    }

    pub fn comparable(&self, x: &Vector, y: &Vector) -> Result<bool> {
        Ok(self.leq(x, y)? || self.leq(y, x)?)
    }

    pub(crate) fn leq_unchecked(&self, x: &Vector, y: &Vector) -> bool {
        self.margin(&(y - x)) >= -CONE_TOL
    }

    /// Euclidean projection onto the cone.
    pub fn project(&self, x: &Vector) -> Result<Vector> {
        self.check(x)?;
        Ok(match self.kind {
            ConeKind::Orthant => x.map(|c| c.max(0.0)),
            ConeKind::Lorentz => {
                let c = x.coords();
                let (&t, rest) = c.split_last().expect("non-empty");
                let r = lp_norm(rest, 2.0);
                if r <= t {
                    x.clone()
                } else if r <= -t {
                    Vector::zeros(self.dim)
                } else {
                    let a = 0.5 * (t + r);
                    let mut out: Vec<f64> = rest.iter().map(|u| a * u / r).collect();
                    out.push(a);
                    Vector::raw(out)
                }
            }
        })
    }

    /// Random cone member of magnitude roughly `scale`.
    pub fn sample_member(&self, rng: &mut SeededRng, scale: f64) -> Vector {
        match self.kind {
            ConeKind::Orthant => {
                Vector::raw((0..self.dim).map(|_| rng.random_range(0.0..=scale)).collect())
            }
            ConeKind::Lorentz => {
                // axis component plus a perturbation, pushed back into the cone
                let t = rng.random_range(0.0..=scale);
                let spread = 1.25 * t / ((self.dim - 1) as f64).sqrt();
                let mut c: Vec<f64> = (0..self.dim - 1)
                    .map(|_| rng.random_range(-1.0..=1.0) * spread)
                    .collect();
                c.push(t);
                self.project(&Vector::raw(c)).expect("dimension matches")
            }
        }
    }

    /// `x` uniform in a box, `y = x + d` with `d` drawn from the cone, so
    /// `x <= y` by construction.
    pub fn sample_ordered_pair(&self, rng: &mut SeededRng, scale: f64) -> (Vector, Vector) {
        let x = sample::uniform_cube(rng, self.dim, scale);
        let d = self.sample_member(rng, scale);
        let y = &x + &d;
        (x, y)
    }

    /// Ordered pair with `0 <= x <= y`.
    pub fn sample_positive_pair(&self, rng: &mut SeededRng, scale: f64) -> (Vector, Vector) {
        let x = self.sample_member(rng, scale);
        let d = self.sample_member(rng, scale);
        let y = &x + &d;
        (x, y)
    }

    fn require_minihedral(&self, what: &str) -> Result<()> {
        if self.is_minihedral() {
            Ok(())
        } else {
            Err(Error::Unsupported(format!(
                "{what} requires a minihedral cone; the {} cone is not",
                self.kind
            )))
        }
    }

    /// Least upper bound of a pair (componentwise maximum on the orthant).
    pub fn sup_pair(&self, x: &Vector, y: &Vector) -> Result<Vector> {
        self.require_minihedral("sup")?;
        self.check(x)?;
        self.check(y)?;
        Ok(x.zip_with(y, f64::max))
    }

    pub fn inf_pair(&self, x: &Vector, y: &Vector) -> Result<Vector> {
        self.require_minihedral("inf")?;
        self.check(x)?;
        self.check(y)?;
        Ok(x.zip_with(y, f64::min))
    }

    /// Supremum of a finite set (the orthant is strongly minihedral).
    pub fn sup_set(&self, points: &[Vector]) -> Result<Vector> {
        self.require_minihedral("sup")?;
        let (first, rest) = points
            .split_first()
            .ok_or_else(|| Error::InvalidParameter("supremum of an empty set".into()))?;
        self.check(first)?;
        rest.iter().try_fold(first.clone(), |acc, p| {
            self.check(p)?;
            Ok(acc.zip_with(p, f64::max))
        })
    }

    pub fn inf_set(&self, points: &[Vector]) -> Result<Vector> {
        self.require_minihedral("inf")?;
        let (first, rest) = points
            .split_first()
            .ok_or_else(|| Error::InvalidParameter("infimum of an empty set".into()))?;
        self.check(first)?;
        rest.iter().try_fold(first.clone(), |acc, p| {
            self.check(p)?;
            Ok(acc.zip_with(p, f64::min))
        })
    }
}

/// Order interval `[lo, hi] = {z : lo <= z <= hi}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderInterval {
    cone: ConeSpec,
    lo: Vector,
    hi: Vector,
}

impl OrderInterval {
    pub fn new(cone: ConeSpec, lo: Vector, hi: Vector) -> Result<Self> {
        if !cone.leq(&lo, &hi)? {
            return Err(Error::InvalidParameter(format!(
                "interval endpoints are not ordered: {lo} is not <= {hi}"
            )));
        }
        Ok(OrderInterval { cone, lo, hi })
    }

    pub fn cone(&self) -> &ConeSpec {
        &self.cone
    }

    pub fn lo(&self) -> &Vector {
        &self.lo
    }

    pub fn hi(&self) -> &Vector {
        &self.hi
    }

    pub fn contains(&self, z: &Vector) -> Result<bool> {
        Ok(self.cone.leq(&self.lo, z)? && self.cone.leq(z, &self.hi)?)
    }

    /// Random member: walk from `lo` along a cone direction, staying below `hi`.
    pub fn sample(&self, rng: &mut SeededRng) -> Vector {
        let span = &self.hi - &self.lo;
        let scale = span.max_abs().max(1e-12);
        for _ in 0..8 {
            let d = self.cone.sample_member(rng, scale);
            // largest t with lo + t d <= hi, by bisection on [0, 1]
            let fits = |t: f64| self.cone.leq_unchecked(&(&self.lo + &(&d * t)), &self.hi);
            if !fits(1e-9) {
                continue;
            }
            let (mut a, mut b) = (0.0, 1.0);
            if fits(1.0) {
                a = 1.0;
            } else {
                for _ in 0..50 {
                    let m = 0.5 * (a + b);
                    if fits(m) {
                        a = m;
                    } else {
                        b = m;
                    }
                }
            }
            let t = rng.random_range(0.0..=a);
            return &self.lo + &(&d * t);
        }
        let t = rng.random_range(0.0..=1.0);
        self.lo.lerp(&self.hi, t)
    }
}

/// Free-function form of [`OrderInterval::contains`] with an explicit cone.
pub fn interval_contains(interval: &OrderInterval, cone: &ConeSpec, z: &Vector) -> Result<bool> {
    if cone != interval.cone() {
        return Err(Error::InvalidParameter(
            "interval was built under a different cone".into(),
        ));
    }
    interval.contains(z)
}

/// Largest `‖x‖ / ‖y‖` over the supplied pairs `0 <= x <= y` (pairs with
/// `y = 0` are skipped).
pub fn normality_ratio(space: &SpaceSpec, pairs: &[(Vector, Vector)]) -> Result<f64> {
    let mut best = 0.0_f64;
    for (x, y) in pairs {
        let ny = space.norm(y)?;
        if ny > 0.0 {
            best = best.max(space.norm(x)? / ny);
        }
    }
    Ok(best)
}

/// Sampled lower bound on the normality constant of the cone under `space`.
pub fn normality_constant_estimate(
    cone: &ConeSpec,
    space: &SpaceSpec,
    n_samples: usize,
    seed: u64,
) -> Result<f64> {
    if n_samples == 0 {
        return Err(Error::InvalidParameter("n_samples must be positive".into()));
    }
    if cone.dim() != space.dim() {
        return Err(Error::DimensionMismatch {
            expected: space.dim(),
            found: cone.dim(),
        });
    }
    let mut rng = sample::rng(seed);
    let pairs: Vec<_> = (0..n_samples)
        .map(|_| cone.sample_positive_pair(&mut rng, 4.0))
        .collect();
    normality_ratio(space, &pairs)
}

/// Outcome of a monotonic-norm check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotonicNormReport {
    pub samples: usize,
    pub passed: bool,
    /// First pair `0 <= x <= y` with `‖x‖ > ‖y‖`, with both norms.
    pub witness: Option<(Vector, Vector, f64, f64)>,
}

/// Checks `‖x‖ <= ‖y‖` on pairs assumed to satisfy `0 <= x <= y`.
pub fn check_norm_monotonic_on_pairs(
    pairs: &[(Vector, Vector)],
    norm: impl Fn(&Vector) -> f64,
) -> MonotonicNormReport {
    let witness = pairs.iter().find_map(|(x, y)| {
        let (nx, ny) = (norm(x), norm(y));
        (!crate::tol::holds(nx, ny)).then(|| (x.clone(), y.clone(), nx, ny))
    });
    MonotonicNormReport {
        samples: pairs.len(),
        passed: witness.is_none(),
        witness,
    }
}

pub fn is_norm_monotonic(
    cone: &ConeSpec,
    space: &SpaceSpec,
    n_samples: usize,
    seed: u64,
) -> Result<MonotonicNormReport> {
    if n_samples == 0 {
        return Err(Error::InvalidParameter("n_samples must be positive".into()));
    }
    if cone.dim() != space.dim() {
        return Err(Error::DimensionMismatch {
            expected: space.dim(),
            found: cone.dim(),
        });
    }
    let mut rng = sample::rng(seed);
    let mut pairs: Vec<_> = (0..n_samples)
        .map(|_| cone.sample_positive_pair(&mut rng, 4.0))
        .collect();
    // the origin against a cone member is always part of the sample
    pairs.push((Vector::zeros(cone.dim()), cone.sample_member(&mut rng, 4.0)));
    Ok(check_norm_monotonic_on_pairs(&pairs, |v| {
        space.norm_unchecked(v)
    }))
}

/// Lattice-axiom check for `sup_pair` / `inf_pair` on sampled triples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeReport {
    pub samples: usize,
    pub idempotent: bool,
    pub commutative: bool,
    pub associative: bool,
    pub absorptive: bool,
    pub upper_bound: bool,
}

impl LatticeReport {
    pub fn passed(&self) -> bool {
        self.idempotent && self.commutative && self.associative && self.absorptive && self.upper_bound
    }
}

pub fn lattice_check(cone: &ConeSpec, n_samples: usize, seed: u64) -> Result<LatticeReport> {
    cone.require_minihedral("lattice check")?;
    let mut rng = sample::rng(seed);
    let mut rep = LatticeReport {
        samples: n_samples,
        idempotent: true,
        commutative: true,
        associative: true,
        absorptive: true,
        upper_bound: true,
    };
    for _ in 0..n_samples {
        let x = sample::uniform_cube(&mut rng, cone.dim(), 4.0);
        let y = sample::uniform_cube(&mut rng, cone.dim(), 4.0);
        let z = sample::uniform_cube(&mut rng, cone.dim(), 4.0);
        let sup = |a: &Vector, b: &Vector| cone.sup_pair(a, b);
        let inf = |a: &Vector, b: &Vector| cone.inf_pair(a, b);
        rep.idempotent &= sup(&x, &x)? == x && inf(&x, &x)? == x;
        rep.commutative &= sup(&x, &y)? == sup(&y, &x)? && inf(&x, &y)? == inf(&y, &x)?;
        rep.associative &= sup(&sup(&x, &y)?, &z)? == sup(&x, &sup(&y, &z)?)?
            && inf(&inf(&x, &y)?, &z)? == inf(&x, &inf(&y, &z)?)?;
        rep.absorptive &= sup(&x, &inf(&x, &y)?)? == x && inf(&x, &sup(&x, &y)?)? == x;
        let s = sup(&x, &y)?;
        let i = inf(&x, &y)?;
        rep.upper_bound &= cone.leq(&x, &s)?
            && cone.leq(&y, &s)?
            && cone.leq(&i, &x)?
            && cone.leq(&i, &y)?;
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(c: &[f64]) -> Vector {
        Vector::from_slice(c).unwrap()
    }

    #[test]
    fn membership_examples() {
        let o = ConeSpec::orthant(3);
        assert!(o.contains(&v(&[1.0, 2.0, 0.0])).unwrap());
        assert!(!ConeSpec::orthant(2).contains(&v(&[1.0, -1e-3])).unwrap());
        let l = ConeSpec::lorentz(3).unwrap();
        assert!(l.contains(&v(&[3.0, 4.0, 5.0])).unwrap());
        assert!(!l.contains(&v(&[3.0, 4.0, 4.99])).unwrap());
        assert!(o.contains(&v(&[1.0, 2.0])).is_err());
        assert!(ConeSpec::lorentz(1).is_err());
    }

    #[test]
    fn order_relations() {
        let o = ConeSpec::orthant(2);
        let x = v(&[0.3, 0.7]);
        assert!(o.leq(&x, &x).unwrap());
        assert!(!o.lt(&x, &x).unwrap());
        let (a, b) = (v(&[0.0, 0.0]), v(&[1.0, 2.0]));
        assert!(o.leq(&a, &b).unwrap() && o.ll(&a, &b).unwrap() && o.lt(&a, &b).unwrap());
        let (c, d) = (v(&[0.0, 1.0]), v(&[1.0, 0.0]));
        assert!(!o.leq(&c, &d).unwrap() && !o.geq(&c, &d).unwrap());
        assert!(!o.comparable(&c, &d).unwrap());
        // boundary direction is ordered but not strongly ordered
        assert!(o.leq(&a, &v(&[1.0, 0.0])).unwrap());
        assert!(!o.ll(&a, &v(&[1.0, 0.0])).unwrap());
    }

    #[test]
    fn interval_membership() {
        let o = ConeSpec::orthant(2);
        let iv = OrderInterval::new(o, v(&[0.0, 0.0]), v(&[1.0, 1.0])).unwrap();
        assert!(iv.contains(iv.lo()).unwrap() && iv.contains(iv.hi()).unwrap());
        assert!(!iv.contains(&v(&[2.0, 0.5])).unwrap());
        for t in [0.0, 0.25, 0.5, 1.0] {
            assert!(iv.contains(&iv.lo().lerp(iv.hi(), t)).unwrap());
        }
        assert!(OrderInterval::new(o, v(&[1.0, 0.0]), v(&[0.0, 1.0])).is_err());
        let l = ConeSpec::lorentz(2).unwrap();
        assert!(interval_contains(&iv, &l, &v(&[0.5, 0.5])).is_err());
        assert!(interval_contains(&iv, &o, &v(&[0.5, 0.5])).unwrap());
    }

    #[test]
    fn sup_and_inf_on_orthant() {
        let o = ConeSpec::orthant(2);
        let (x, y) = (v(&[1.0, 0.0]), v(&[0.0, 1.0]));
        assert_eq!(o.sup_pair(&x, &y).unwrap(), v(&[1.0, 1.0]));
        assert_eq!(o.inf_pair(&x, &y).unwrap(), v(&[0.0, 0.0]));
        let (a, b) = (v(&[0.0, 0.5]), v(&[2.0, 3.0]));
        assert_eq!(o.sup_pair(&a, &b).unwrap(), b);
        assert_eq!(o.sup_set(&[x.clone(), y.clone(), a]).unwrap(), v(&[1.0, 1.0]));
        assert!(o.sup_set(&[]).is_err());
    }

    #[test]
    fn lorentz_is_not_minihedral() {
        let l = ConeSpec::lorentz(3).unwrap();
        let x = v(&[1.0, 0.0, 0.0]);
        assert!(matches!(l.sup_pair(&x, &x), Err(Error::Unsupported(_))));
        assert!(matches!(l.inf_pair(&x, &x), Err(Error::Unsupported(_))));
        assert!(lattice_check(&l, 10, 0).is_err());
    }

    #[test]
    fn lorentz_projection_lands_in_cone() {
        let l = ConeSpec::lorentz(3).unwrap();
        let p = l.project(&v(&[3.0, 4.0, 1.0])).unwrap();
        assert!(l.margin(&p).abs() < 1e-12);
        assert_eq!(l.project(&v(&[3.0, 4.0, -6.0])).unwrap(), Vector::zeros(3));
        let inside = v(&[0.1, 0.1, 1.0]);
        assert_eq!(l.project(&inside).unwrap(), inside);
    }

    #[test]
    fn normality_examples() {
        let o = ConeSpec::orthant(3);
        for p in [1.5, 2.0, 3.0] {
            let s = SpaceSpec::new(3, p).unwrap();
            let g = normality_constant_estimate(&o, &s, 500, 11).unwrap();
            assert!(g <= 1.0 + 1e-12, "p = {p}: {g}");
        }
        let s = SpaceSpec::euclidean(2);
        let x = v(&[0.5, 2.0]);
        assert_eq!(normality_ratio(&s, &[(x.clone(), x)]).unwrap(), 1.0);
        let a = normality_constant_estimate(&ConeSpec::orthant(2), &s, 50, 3).unwrap();
        let b = normality_constant_estimate(&ConeSpec::orthant(2), &s, 50, 3).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
        assert!(normality_constant_estimate(&ConeSpec::orthant(2), &s, 0, 3).is_err());
    }

    #[test]
    fn monotonic_norm_checks() {
        let o = ConeSpec::orthant(2);
        let e = SpaceSpec::euclidean(2);
        assert!(is_norm_monotonic(&o, &e, 500, 5).unwrap().passed);
        let l = ConeSpec::lorentz(3).unwrap();
        assert!(is_norm_monotonic(&l, &SpaceSpec::euclidean(3), 500, 5).unwrap().passed);

        // a genuine norm that is not monotonic on the orthant: |(x1 - x2, x2)|₂
        let skew = |u: &Vector| lp_norm(&[u[0] - u[1], u[1]], 2.0);
        let pairs = vec![
            (v(&[0.0, 0.0]), v(&[1.0, 1.0])),
            (v(&[1.0, 0.0]), v(&[1.0, 0.5])),
        ];
        let rep = check_norm_monotonic_on_pairs(&pairs, skew);
        assert!(!rep.passed);
        let (x, y, nx, ny) = rep.witness.unwrap();
        assert_eq!((x, y), pairs[1].clone());
        assert!(nx > ny);
    }

    #[test]
    fn lattice_axioms_hold_on_orthant() {
        assert!(lattice_check(&ConeSpec::orthant(4), 200, 9).unwrap().passed());
    }
}
