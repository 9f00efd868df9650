//! Browser bindings. Each export takes and returns JSON strings; the plain
//! functions below them are what the bindings call and what the tests use.

use serde::{Deserialize, Serialize};
use wasm_bindgen::prelude::*;

use ordfix::asymcenter::{solve_asym_center, AsymCenterProblem, Side, SolverConfig};
use ordfix::iterate::{mann_orbit, picard_orbit, BetaSchedule, IterationConfig, OrbitRecord};
use ordfix::mapping::{fixed_point_oracle, is_alpha_nonexpansive, Domain, MapKind, Mapping, OracleConfig};
use ordfix::order::ConeSpec;
use ordfix::sample::SamplerConfig;
use ordfix::space::{ConvexityProfile, ModulusSolverConfig, ProfileConfig, SpaceSpec};
use ordfix::vector::Vector;

#[derive(Debug, Clone, Serialize)]
pub struct ModulusCurve {
    pub p: f64,
    pub epsilons: Vec<f64>,
    pub deltas: Vec<f64>,
    pub eps0: f64,
}

pub fn modulus_curve(p: f64, intervals: usize) -> Result<ModulusCurve, String> {
    if !(1..=400).contains(&intervals) {
        return Err("intervals must be between 1 and 400".into());
    }
    let space = SpaceSpec::new(2, p).map_err(|e| e.to_string())?;
    let cfg = ProfileConfig {
        intervals,
        solver: ModulusSolverConfig::coarse(),
    };
    let prof = ConvexityProfile::compute(&space, &cfg).map_err(|e| e.to_string())?;
    Ok(ModulusCurve {
        p,
        epsilons: prof.epsilons,
        deltas: prof.deltas,
        eps0: prof.eps0,
    })
}

/// A planar affine map `x -> A x + b` on the non-negative quadrant.
#[derive(Debug, Clone, Deserialize)]
pub struct OrbitRequest {
    pub a: [[f64; 2]; 2],
    pub b: [f64; 2],
    pub x0: [f64; 2],
    #[serde(default = "default_p")]
    pub p: f64,
    /// `picard` or `mann`.
    #[serde(default = "default_scheme")]
    pub scheme: String,
    /// Constant Mann parameter.
    #[serde(default)]
    pub beta: f64,
    #[serde(default)]
    pub alpha: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    /// First orbit index of the tail used by the asymptotic center.
    #[serde(default)]
    pub tail_from: Option<usize>,
}

fn default_p() -> f64 {
    2.0
}

fn default_scheme() -> String {
    "picard".into()
}

fn default_max_iter() -> usize {
    2000
}

#[derive(Debug, Clone, Serialize)]
pub struct OrbitResult {
    pub points: Vec<[f64; 2]>,
    pub residuals: Vec<f64>,
    pub verdict: String,
    pub monotonicity: String,
    pub fixed_points: Vec<[f64; 2]>,
    /// Sampled monotone α-nonexpansive check at the requested α.
    pub alpha_check: String,
    pub alpha_passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct CenterResult {
    pub tail: Vec<[f64; 2]>,
    pub bound: [f64; 2],
    pub center: [f64; 2],
    pub radius: f64,
    pub lower_bound: f64,
    /// `‖Tz - z‖`.
    pub fixed_residual: f64,
}

fn pair(v: &Vector) -> [f64; 2] {
    [v[0], v[1]]
}

impl OrbitRequest {
    fn mapping(&self) -> Result<Mapping, String> {
        let kind = MapKind::Affine {
            a: self.a.iter().map(|r| r.to_vec()).collect(),
            b: Vector::new(self.b.to_vec()).map_err(|e| e.to_string())?,
        };
        Mapping::new(kind, Domain::cone(ConeSpec::orthant(2))).map_err(|e| e.to_string())
    }

    fn run(&self) -> Result<(Mapping, SpaceSpec, OrbitRecord), String> {
        if self.max_iter == 0 || self.max_iter > 100_000 {
            return Err("max_iter must be between 1 and 100000".into());
        }
        let map = self.mapping()?;
        let space = SpaceSpec::new(2, self.p).map_err(|e| e.to_string())?;
        let cone = ConeSpec::orthant(2);
        let x0 = Vector::new(self.x0.to_vec()).map_err(|e| e.to_string())?;
        let cfg = IterationConfig {
            max_iter: self.max_iter,
            bound_threshold: 1e6,
            ..IterationConfig::default()
        };
        let rec = match self.scheme.as_str() {
            "picard" => picard_orbit(&map, &x0, &cone, &space, &cfg),
            "mann" => mann_orbit(&map, &x0, &BetaSchedule::Constant { beta: self.beta }, &cone, &space, &cfg),
            other => return Err(format!("unknown scheme {other:?}")),
        }
        .map_err(|e| e.to_string())?;
        Ok((map, space, rec))
    }
}

pub fn orbit(req: &OrbitRequest) -> Result<OrbitResult, String> {
    let (map, space, rec) = req.run()?;
    let fixed = fixed_point_oracle(&map, &OracleConfig::default()).map_err(|e| e.to_string())?;
    let check = is_alpha_nonexpansive(&map, &ConeSpec::orthant(2), &space, req.alpha, &SamplerConfig::new(500, 1))
        .map_err(|e| e.to_string())?;
    Ok(OrbitResult {
        points: rec.points.iter().map(pair).collect(),
        residuals: rec.residuals.clone(),
        verdict: rec.verdict.to_string(),
        monotonicity: rec.order_monotone.to_string(),
        fixed_points: fixed.iter().map(pair).collect(),
        alpha_check: check.to_string(),
        alpha_passed: check.passed(),
    })
}

pub fn center(req: &OrbitRequest) -> Result<CenterResult, String> {
    let (map, space, rec) = req.run()?;
    let side = if rec.order_monotone.is_increasing() {
        Side::Above
    } else if rec.order_monotone.is_decreasing() {
        Side::Below
    } else {
        return Err(format!("the orbit is {}, not monotone", rec.order_monotone));
    };
    let prob = AsymCenterProblem::from_orbit(&rec.points, req.tail_from, ConeSpec::orthant(2), space.clone(), side)
        .map_err(|e| e.to_string())?;
    let res = solve_asym_center(&prob, &SolverConfig::default()).map_err(|e| e.to_string())?;
    let tz = map.apply(&res.z).map_err(|e| e.to_string())?;
    Ok(CenterResult {
        tail: prob.tail().iter().map(pair).collect(),
        bound: pair(prob.bound()),
        center: pair(&res.z),
        radius: res.r,
        lower_bound: res.lower_bound,
        fixed_residual: space.dist(&tz, &res.z).map_err(|e| e.to_string())?,
    })
}

fn to_js<T: Serialize>(r: Result<T, String>) -> Result<String, JsError> {
    let v = r.map_err(|e| JsError::new(&e))?;
    serde_json::to_string(&v).map_err(|e| JsError::new(&e.to_string()))
}

fn parse(json: &str) -> Result<OrbitRequest, String> {
    serde_json::from_str(json).map_err(|e| format!("bad request: {e}"))
}

#[wasm_bindgen(js_name = modulusCurve)]
pub fn modulus_curve_js(p: f64, intervals: usize) -> Result<String, JsError> {
    to_js(modulus_curve(p, intervals))
}

#[wasm_bindgen(js_name = affineOrbit)]
pub fn orbit_js(request: &str) -> Result<String, JsError> {
    to_js(parse(request).and_then(|r| orbit(&r)))
}

#[wasm_bindgen(js_name = asymptoticCenter)]
pub fn center_js(request: &str) -> Result<String, JsError> {
    to_js(parse(request).and_then(|r| center(&r)))
}
