//! Scenarios and the shipped corpus.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mapping::{Domain, GridTable, MapKind, Mapping};
use crate::order::ConeSpec;
use crate::sample::{self, SeededRng};
use crate::space::SpaceSpec;
use crate::vector::Vector;

/// How the starting point of an orbit is chosen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "snake_case")]
pub enum X0Policy {
    Zero,
    /// Rejection-sampled domain point with `x0 <= T x0`.
    SampledBelowTx0,
    /// Rejection-sampled domain point with `x0 >= T x0`.
    SampledAboveTx0,
    Explicit { point: Vector },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Expected {
    FixedPointExists,
    NoFixedPoint,
    #[default]
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub id: String,
    pub mapping: Mapping,
    pub cone: ConeSpec,
    /// Overrides the campaign exponent.
    #[serde(default)]
    pub p: Option<f64>,
    /// Claimed α of the monotone α-nonexpansive hypothesis.
    #[serde(default)]
    pub alpha: f64,
    /// Start of the increasing orbit (`x0 <= T x0`).
    #[serde(default)]
    pub x0_up: Option<X0Policy>,
    /// Start of the decreasing orbit (`x0 >= T x0`).
    #[serde(default)]
    pub x0_down: Option<X0Policy>,
    #[serde(default)]
    pub expected: Expected,
    /// Search box for the fixed-point oracle when the domain is unbounded.
    #[serde(default)]
    pub oracle_region: Option<(Vector, Vector)>,
}

const X0_TRIES: usize = 4096;

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        if self.cone.dim() != self.mapping.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.mapping.dim(),
                found: self.cone.dim(),
            });
        }
        if !(self.alpha < 1.0 && self.alpha.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "scenario {}: alpha = {} must be < 1",
                self.id, self.alpha
            )));
        }
        Ok(())
    }

    pub fn space(&self, default_p: f64) -> Result<SpaceSpec> {
        SpaceSpec::new(self.mapping.dim(), self.p.unwrap_or(default_p))
    }

    /// Starting point for the given policy; `up` selects `x0 <= T x0`.
    pub fn resolve_x0(&self, policy: &X0Policy, up: bool, seed: u64) -> Result<Vector> {
        let dim = self.mapping.dim();
        match policy {
            X0Policy::Zero => Ok(Vector::zeros(dim)),
            X0Policy::Explicit { point } => {
                point.ensure_dim(dim)?;
                Ok(point.clone())
            }
            X0Policy::SampledBelowTx0 | X0Policy::SampledAboveTx0 => {
                let below = matches!(policy, X0Policy::SampledBelowTx0);
                if below != up {
                    return Err(Error::InvalidParameter(format!(
                        "scenario {}: x0 policy does not match the orbit direction",
                        self.id
                    )));
                }
                let mut rng = sample::rng(seed);
                for _ in 0..X0_TRIES {
                    let x = self.mapping.sample_point(&mut rng, 4.0);
                    let tx = self.mapping.apply(&x)?;
                    let ok = if below {
                        self.cone.leq(&x, &tx)?
                    } else {
                        self.cone.leq(&tx, &x)?
                    };
                    if ok {
                        return Ok(x);
                    }
                }
                Err(Error::Precondition(format!(
                    "no starting point with x0 {} T x0 in {X0_TRIES} samples",
                    if below { "<=" } else { ">=" }
                )))
            }
        }
    }
}

/// Largest singular value, from the eigenvalues of `MᵀM`.
fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    (m.transpose() * m).symmetric_eigen().eigenvalues.max().max(0.0).sqrt()
}

/// `ρ M / ‖M‖` with `M` uniform in `[0, 1]`: the spectral norm for `p = 2`,
/// otherwise the Riesz–Thorin bound `‖M‖₁^{1/p} ‖M‖_∞^{1-1/p}` on the ℓp
/// operator norm, so `‖A‖_p <= ρ` in every case.
pub fn family_matrix(rng: &mut SeededRng, dim: usize, rho: f64, p: f64) -> Vec<Vec<f64>> {
    let m = DMatrix::from_fn(dim, dim, |_, _| rng.random_range(0.0..1.0));
    let norm = if p == 2.0 {
        spectral_norm(&m)
    } else {
        let col = (0..dim).map(|j| m.column(j).sum()).fold(0.0, f64::max);
        let row = (0..dim).map(|i| m.row(i).sum()).fold(0.0, f64::max);
        col.powf(1.0 / p) * row.powf(1.0 - 1.0 / p)
    };
    (0..dim)
        .map(|i| (0..dim).map(|j| rho * m[(i, j)] / norm).collect())
        .collect()
}

/// `x* + (I - A)^{-1} 1` for an affine contraction with non-negative `A`:
/// `x0 - T x0 = 1`, so the orbit from it decreases.
fn affine_point_above(a: &[Vec<f64>], b: &Vector) -> Vector {
    let n = b.dim();
    let m = DMatrix::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 } - a[i][j]);
    let rhs = DVector::from_iterator(n, b.coords().iter().map(|c| c + 1.0));
    let x = m.lu().solve(&rhs).expect("I - A is invertible for a contraction");
    Vector::new(x.iter().copied().collect()).expect("finite solve")
}

fn v(c: &[f64]) -> Vector {
    Vector::from_slice(c).expect("finite literal")
}

fn build(
    id: &str,
    kind: MapKind,
    domain: Domain,
    cone: ConeSpec,
    alpha: f64,
    x0_up: Option<X0Policy>,
    x0_down: Option<X0Policy>,
    expected: Expected,
) -> Scenario {
    Scenario {
        id: id.to_string(),
        mapping: Mapping::new(kind, domain).expect("corpus maps are self-maps"),
        cone,
        p: None,
        alpha,
        x0_up,
        x0_down,
        expected,
        oracle_region: None,
    }
}

fn explicit(c: &[f64]) -> Option<X0Policy> {
    Some(X0Policy::Explicit { point: v(c) })
}

/// Monotone, α-nonexpansive for α = 1/3, not nonexpansive: each coordinate
/// is `g(s) = 0` for `s < 3`, `g(3) = 1`, tabulated on `{0, 0.5, ..., 3}²`.
/// The pair `s = 2.5, t = 3` has `|g(s) - g(t)| = 1 > 0.5`.
pub fn grid_alpha_map() -> Mapping {
    let axis: Vec<f64> = (0..=6).map(|k| 0.5 * k as f64).collect();
    let g = |s: f64| if s >= 3.0 { 1.0 } else { 0.0 };
    let mut values = Vec::new();
    for &s in &axis {
        for &t in &axis {
            values.push(v(&[g(s), g(t)]));
        }
    }
    Mapping::new(
        MapKind::Grid(GridTable {
            axes: vec![axis.clone(), axis],
            values,
        }),
        Domain::boxed(v(&[0.0, 0.0]), v(&[3.0, 3.0])).expect("box"),
    )
    .expect("grid map is a self-map")
}

/// Non-monotone affine map on `[0, 1]²`: raising `x2` lowers `(Tx)1`.
pub fn injected_non_monotone() -> Scenario {
    build(
        "injected-non-monotone",
        MapKind::Affine {
            a: vec![vec![0.5, -0.2], vec![0.0, 0.5]],
            b: v(&[0.3, 0.1]),
        },
        Domain::boxed(v(&[0.0, 0.0]), v(&[1.0, 1.0])).expect("box"),
        ConeSpec::orthant(2),
        0.0,
        Some(X0Policy::Zero),
        explicit(&[1.0, 1.0]),
        Expected::FixedPointExists,
    )
}

/// The shipped scenarios.
pub fn corpus() -> Vec<Scenario> {
    let o2 = ConeSpec::orthant(2);
    let orthant = |d| Domain::cone(ConeSpec::orthant(d));
    let mut out = vec![
        build(
            "affine-half",
            MapKind::Affine {
                a: vec![vec![0.5, 0.0], vec![0.0, 0.5]],
                b: v(&[1.0, 1.0]),
            },
            orthant(2),
            o2,
            0.0,
            Some(X0Policy::Zero),
            explicit(&[5.0, 4.0]),
            Expected::FixedPointExists,
        ),
        build(
            "affine-coupled",
            MapKind::Affine {
                a: vec![vec![0.3, 0.2], vec![0.1, 0.4]],
                b: v(&[0.5, 1.0]),
            },
            orthant(2),
            o2,
            0.0,
            Some(X0Policy::Zero),
            explicit(&[4.0, 4.0]),
            Expected::FixedPointExists,
        ),
    ];

    let mut rng = sample::rng(0x5eed_0005);
    let a5 = family_matrix(&mut rng, 5, 0.8, 2.0);
    let b5 = Vector::new((0..5).map(|_| rng.random_range(0.1..1.0)).collect()).expect("finite");
    let above = affine_point_above(&a5, &b5);
    out.push(build(
        "affine-random-5d",
        MapKind::Affine { a: a5, b: b5 },
        orthant(5),
        ConeSpec::orthant(5),
        0.0,
        Some(X0Policy::Zero),
        Some(X0Policy::Explicit { point: above }),
        Expected::FixedPointExists,
    ));

    out.push(build(
        "translation",
        MapKind::Translation { b: v(&[1.0, 0.5]) },
        orthant(2),
        o2,
        0.0,
        Some(X0Policy::Zero),
        None,
        Expected::NoFixedPoint,
    ));
    out.push(build(
        "constant",
        MapKind::Affine {
            a: vec![vec![0.0, 0.0], vec![0.0, 0.0]],
            b: v(&[1.5, 0.5]),
        },
        orthant(2),
        o2,
        0.0,
        Some(X0Policy::Zero),
        explicit(&[3.0, 3.0]),
        Expected::FixedPointExists,
    ));
    let mut trunc = build(
        "truncation",
        MapKind::Truncation { c: v(&[1.0, 2.0]) },
        orthant(2),
        o2,
        0.0,
        Some(X0Policy::SampledBelowTx0),
        explicit(&[3.0, 3.0]),
        Expected::FixedPointExists,
    );
    trunc.oracle_region = Some((v(&[0.0, 0.0]), v(&[3.0, 3.0])));
    out.push(trunc);

    out.push(Scenario {
        id: "grid-alpha".into(),
        mapping: grid_alpha_map(),
        cone: o2,
        p: Some(2.0),
        alpha: 1.0 / 3.0,
        x0_up: Some(X0Policy::Zero),
        x0_down: explicit(&[3.0, 3.0]),
        expected: Expected::FixedPointExists,
        oracle_region: None,
    });
    out.push(build(
        "neg-translation-box",
        MapKind::Composition {
            maps: vec![
                MapKind::Translation { b: v(&[-1.0, -1.0]) },
                MapKind::BoxProjection {
                    lo: v(&[0.0, 0.0]),
                    hi: v(&[4.0, 4.0]),
                },
            ],
        },
        Domain::boxed(v(&[0.0, 0.0]), v(&[4.0, 4.0])).expect("box"),
        o2,
        0.0,
        Some(X0Policy::Zero),
        explicit(&[3.5, 2.0]),
        Expected::FixedPointExists,
    ));
    out.push(build(
        "neg-affine-box",
        MapKind::Affine {
            a: vec![vec![0.5, 0.0], vec![0.0, 0.5]],
            b: v(&[-1.0, -1.0]),
        },
        Domain::boxed(v(&[-4.0, -4.0]), v(&[0.0, 0.0])).expect("box"),
        o2,
        0.0,
        explicit(&[-4.0, -4.0]),
        Some(X0Policy::Zero),
        Expected::FixedPointExists,
    ));
    let lorentz = ConeSpec::lorentz(3).expect("dim 3");
    out.push(build(
        "lorentz-scale",
        MapKind::Affine {
            a: vec![vec![0.5, 0.0, 0.0], vec![0.0, 0.5, 0.0], vec![0.0, 0.0, 0.5]],
            b: v(&[0.0, 0.0, 1.0]),
        },
        Domain::cone(lorentz),
        lorentz,
        0.0,
        Some(X0Policy::Zero),
        explicit(&[0.5, 0.0, 4.0]),
        Expected::FixedPointExists,
    ));
    let mut boxp = build(
        "box-projection",
        MapKind::BoxProjection {
            lo: v(&[0.5, 0.5]),
            hi: v(&[2.0, 3.0]),
        },
        orthant(2),
        o2,
        0.0,
        Some(X0Policy::Zero),
        explicit(&[4.0, 4.0]),
        Expected::FixedPointExists,
    );
    boxp.oracle_region = Some((v(&[0.0, 0.0]), v(&[4.0, 4.0])));
    out.push(boxp);
    out.push(build(
        "identity-negative-alpha",
        MapKind::Translation { b: v(&[0.0, 0.0]) },
        orthant(2),
        o2,
        -0.5,
        explicit(&[1.0, 2.0]),
        explicit(&[1.0, 2.0]),
        Expected::FixedPointExists,
    ));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_is_valid_and_ids_unique() {
        let c = corpus();
        let mut ids: Vec<&str> = c.iter().map(|s| s.id.as_str()).collect();
        for s in &c {
            s.validate().unwrap();
        }
        ids.sort_unstable();
        ids.dedup();
        assert_eq!(ids.len(), c.len());
    }

    #[test]
    fn corpus_starting_points_are_ordered() {
        for s in corpus() {
            for (policy, up) in [(&s.x0_up, true), (&s.x0_down, false)] {
                if let Some(p) = policy {
                    let x0 = s.resolve_x0(p, up, 3).unwrap();
                    let tx = s.mapping.apply(&x0).unwrap();
                    let ok = if up { s.cone.leq(&x0, &tx) } else { s.cone.leq(&tx, &x0) };
                    assert!(ok.unwrap(), "{} up={up}", s.id);
                }
            }
        }
    }

    #[test]
    fn family_matrix_norm_is_rho() {
        let mut r = sample::rng(1);
        for p in [2.0, 3.0] {
            let a = family_matrix(&mut r, 4, 0.8, p);
            assert!(a.iter().flatten().all(|&x| x >= 0.0));
            if p == 2.0 {
                let m = DMatrix::from_fn(4, 4, |i, j| a[i][j]);
                let s = spectral_norm(&m);
                assert!((s - 0.8).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn scenario_json_roundtrip() {
        let s = injected_non_monotone();
        let text = serde_json::to_string(&s).unwrap();
        let back: Scenario = serde_json::from_str(&text).unwrap();
        assert_eq!(back, s);
    }
}
