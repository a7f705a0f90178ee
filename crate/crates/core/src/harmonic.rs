//! Dirichlet problems, Green's functions, gradient fields and the checks built on them.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::Serialize;

use crate::curvature::{self, CurvatureMode, CurvatureOutsideReport};
use crate::error::{Error, Result};
use crate::generators::GraphGenerator;
use crate::graph::{Label, VertexId, VertexSet};
use crate::linalg::{solve_spd, SolveInfo, SparseSym};
use crate::site::Site;
use crate::{Ball, Function, Graph};

/// Residual bound, relative to `1 + ‖u‖_∞`, for a function to count as harmonic.
pub const HARMONIC_TOLERANCE: f64 = 1e-8;

/// Solution of a Dirichlet problem.
#[derive(Clone, Debug)]
pub struct HarmonicSolution {
    /// Defined on `interior ∪ boundary`.
    pub values: Function,
    pub interior: VertexSet,
    pub boundary: VertexSet,
    /// `max |Δu|` over the interior.
    pub residual: f64,
    pub solver: SolveInfo,
}

/// `max_{x ∈ region} |Δu(x)|`.
pub fn harmonic_residual(g: &Graph, u: &Function, region: &VertexSet) -> Result<f64> {
    let mut r = 0.0f64;
    for &x in region {
        r = r.max(g.laplacian(u, x)?.abs());
    }
    Ok(r)
}

fn require_harmonic(g: &Graph, u: &Function, region: &VertexSet) -> Result<f64> {
    let residual = harmonic_residual(g, u, region)?;
    let bound = HARMONIC_TOLERANCE * (1.0 + u.sup_norm());
    if residual > bound {
        return Err(Error::Precondition(format!("function is not harmonic on the region: max |Δu| = {residual:e} > {bound:e}")));
    }
    Ok(residual)
}

/// Solve `Δu = 0` on `interior`, `u = data` on the boundary.
///
/// The system is multiplied through by `m`, which makes it symmetric positive definite.
/// Each interior component must touch the boundary. Interior values are clamped to the
/// range of the data, which contains the exact solution.
pub fn dirichlet_solve(g: &Graph, interior: &VertexSet, boundary: &BTreeMap<VertexId, f64>, tol: f64) -> Result<HarmonicSolution> {
    if !(tol > 0.0) {
        return Err(Error::Domain("tolerance must be positive".into()));
    }
    for &v in interior.iter().chain(boundary.keys()) {
        g.check(v)?;
    }
    if let Some(v) = interior.iter().find(|v| boundary.contains_key(v)) {
        return Err(Error::Domain(format!("{} is both interior and boundary", g.label(*v))));
    }
    let order: Vec<VertexId> = interior.iter().copied().collect();
    let pos: HashMap<VertexId, usize> = order.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut rhs = vec![0.0; order.len()];
    let mut triplets = Vec::new();
    for (i, &x) in order.iter().enumerate() {
        let mut diag = 0.0;
        for (y, &w) in g.neighbors(x) {
            diag += w;
            if let Some(&j) = pos.get(&y) {
                if j > i {
                    triplets.push((i, j, -w));
                }
            } else if let Some(&b) = boundary.get(&y) {
                rhs[i] += w * b;
            } else {
                return Err(Error::Domain(format!("neighbor {} of interior vertex {} has no boundary value", g.label(y), g.label(x))));
            }
        }
        triplets.push((i, i, diag));
    }
    for comp in g.components_within(interior) {
        let touches = comp.iter().any(|&x| g.neighbor_ids(x).any(|y| boundary.contains_key(&y)));
        if !touches {
            let first = comp.iter().next().unwrap();
            return Err(Error::IllPosed(format!("interior component containing {} has no boundary contact", g.label(*first))));
        }
    }
    let a = SparseSym::from_triplets(order.len(), triplets);
    let (x, solver) = solve_spd(&a, &rhs)?;
    let (lo, hi) = boundary.values().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &b| (lo.min(b), hi.max(b)));
    let mut values = Function::undefined(g.vertex_count());
    for (&v, &b) in boundary {
        values.set(v, b);
    }
    for (i, &v) in order.iter().enumerate() {
        values.set(v, if lo <= hi { x[i].clamp(lo, hi) } else { x[i] });
    }
    let residual = harmonic_residual(g, &values, interior)?;
    if residual > tol * (1.0 + values.sup_norm()) {
        return Err(Error::Numeric(format!("Dirichlet residual {residual:e} exceeds tolerance {tol:e}")));
    }
    Ok(HarmonicSolution { values, interior: interior.clone(), boundary: boundary.keys().copied().collect(), residual, solver })
}

/// Dirichlet Green's function `Γ_ρ(·, x₁)` on `B_ρ(x₀)`.
#[derive(Clone, Debug)]
pub struct GreenFunction {
    pub x0: VertexId,
    pub rho: usize,
    pub source: VertexId,
    /// Defined on `B_ρ(x₀) ∪ ∂B_ρ(x₀)`; zero on the boundary.
    pub values: Function,
    pub solver: SolveInfo,
}

/// Solve `ΔΓ_ρ(·,x₁) = −m(x₁)⁻¹ 1_{x₁}` on `B_ρ(x₀)` with zero data on `∂B_ρ(x₀)`.
pub fn green_dirichlet(g: &Graph, x0: VertexId, rho: usize, x1: VertexId, tol: f64) -> Result<GreenFunction> {
    green_with_sources(g, x0, rho, &[(x1, 1.0)], tol).map(|(values, solver)| GreenFunction { x0, rho, source: x1, values, solver })
}

/// `Σ_k c_k Γ_ρ(·, s_k)` in one solve; used by the separating-harmonics construction.
pub fn green_with_sources(g: &Graph, x0: VertexId, rho: usize, sources: &[(VertexId, f64)], tol: f64) -> Result<(Function, SolveInfo)> {
    let local = g.local_ball(x0, rho + 1)?;
    let interior: VertexSet = local.iter().filter(|(_, d)| *d <= rho).map(|&(v, _)| v).collect();
    let boundary: BTreeMap<VertexId, f64> = local.iter().filter(|(_, d)| *d == rho + 1).map(|&(v, _)| (v, 0.0)).collect();
    for &(s, _) in sources {
        if !interior.contains(&s) {
            return Err(Error::Domain(format!("source {} is not in B_{rho}({})", g.label(s), g.label(x0))));
        }
    }
    let order: Vec<VertexId> = interior.iter().copied().collect();
    let pos: HashMap<VertexId, usize> = order.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut triplets = Vec::new();
    for (i, &x) in order.iter().enumerate() {
        let mut diag = 0.0;
        for (y, &w) in g.neighbors(x) {
            diag += w;
            if let Some(&j) = pos.get(&y) {
                if j > i {
                    triplets.push((i, j, -w));
                }
            }
        }
        triplets.push((i, i, diag));
    }
    for comp in g.components_within(&interior) {
        if !comp.iter().any(|&x| g.neighbor_ids(x).any(|y| boundary.contains_key(&y))) {
            return Err(Error::IllPosed("a component of the ball has no boundary contact".into()));
        }
    }
    let mut rhs = vec![0.0; order.len()];
    for &(s, c) in sources {
        rhs[pos[&s]] += c;
    }
    let a = SparseSym::from_triplets(order.len(), triplets);
    let (x, info) = solve_spd(&a, &rhs)?;
    let mut values = Function::undefined(g.vertex_count());
    for &v in boundary.keys() {
        values.set(v, 0.0);
    }
    let nonneg = sources.iter().all(|&(_, c)| c >= 0.0);
    let peak = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for (i, &v) in order.iter().enumerate() {
        if nonneg && x[i] < -tol * (1.0 + peak) {
            return Err(Error::Numeric(format!("Green's function is negative at {} ({:e})", g.label(v), x[i])));
        }
        values.set(v, if nonneg { x[i].max(0.0) } else { x[i] });
    }
    Ok((values, info))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GreenVerdict {
    Converged,
    Growing,
}

#[derive(Clone, Debug, Serialize)]
pub struct GreenRow {
    pub rho: usize,
    pub values: BTreeMap<String, f64>,
    /// `sup` over the window of `Γ_ρ − Γ_{ρ_prev}`; absent on the first row.
    pub sup_increment: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct GreenLimitReport {
    pub source: String,
    pub window_radius: usize,
    pub rows: Vec<GreenRow>,
    pub verdict: GreenVerdict,
    /// Set when a ball could not be materialized; rows hold the partial table.
    pub stopped: Option<String>,
}

/// Green's functions `Γ_ρ(·,x₁)` on `B_ρ(x₁)` for growing `ρ`, sampled on `B_window(x₁)`.
pub fn green_limit(gen: &GraphGenerator, x1: &Site, schedule: &[usize], stall_eps: f64, window: usize) -> Result<GreenLimitReport> {
    check_schedule(schedule)?;
    if window > schedule[0] {
        return Err(Error::Domain("window radius must not exceed the first schedule entry".into()));
    }
    let x1 = gen.validate_site(x1)?;
    let mut rows: Vec<GreenRow> = Vec::new();
    let mut stopped = None;
    for &rho in schedule {
        let ball = match gen.materialize_ball(&x1, rho + 1) {
            Ok(b) => b,
            Err(e @ Error::Resource { .. }) => {
                stopped = Some(e.to_string());
                break;
            }
            Err(e) => return Err(e),
        };
        let green = green_dirichlet(&ball.graph, ball.root, rho, ball.root, 1e-9)?;
        let values: BTreeMap<String, f64> = ball
            .within(window)
            .into_iter()
            .map(|v| (ball.graph.label(v).to_string(), *green.values.get(v).unwrap()))
            .collect();
        let sup_increment = rows.last().map(|prev| {
            values.iter().map(|(k, v)| v - prev.values[k]).fold(f64::NEG_INFINITY, f64::max)
        });
        rows.push(GreenRow { rho, values, sup_increment });
    }
    let verdict = match rows.last().and_then(|r| r.sup_increment) {
        Some(inc) if inc < stall_eps => GreenVerdict::Converged,
        _ => GreenVerdict::Growing,
    };
    Ok(GreenLimitReport { source: x1.to_string(), window_radius: window, rows, verdict, stopped })
}

pub(crate) fn check_schedule(schedule: &[usize]) -> Result<()> {
    if schedule.is_empty() {
        return Err(Error::Domain("schedule is empty".into()));
    }
    if schedule.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Domain("schedule must be strictly increasing".into()));
    }
    Ok(())
}

/// `Γ(u)` per vertex and `|∇_e u|` per edge.
#[derive(Clone, Debug)]
pub struct GradientField {
    pub vertex_gradient: Function,
    pub edge_gradient: Vec<((VertexId, VertexId), f64)>,
}

/// Gradient field of `u`; vertices and edges where `u` is not fully defined are skipped.
pub fn gradient_field(g: &Graph, u: &Function) -> GradientField {
    let mut vertex_gradient = Function::undefined(g.vertex_count());
    for x in g.vertices() {
        if let Ok(v) = curvature::gamma(g, u, x) {
            vertex_gradient.set(x, v);
        }
    }
    let edge_gradient = g
        .edges()
        .iter()
        .filter_map(|e| match (u.value(e.u), u.value(e.v)) {
            (Some(a), Some(b)) => Some(((e.u, e.v), (a - b).abs())),
            _ => None,
        })
        .collect();
    GradientField { vertex_gradient, edge_gradient }
}

#[derive(Clone, Debug, Serialize)]
pub struct GradientPair {
    pub edge: (String, String),
    pub value: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct GradientMaxReport {
    pub max_interior_pair: Option<GradientPair>,
    pub max_boundary_pair: Option<GradientPair>,
    pub holds: bool,
    pub harmonic_residual: f64,
    /// `false` when some edge of `W ∖ δW` has `κ < −tol`; the check still runs.
    pub curvature_precondition: bool,
    pub curvature_violations: Vec<curvature::Violation>,
}

fn max_pair(g: &Graph, u: &Function, from: &VertexSet) -> Option<GradientPair> {
    let mut best: Option<(f64, (VertexId, VertexId))> = None;
    for &x in from {
        let Some(&ux) = u.value(x) else { continue };
        for y in g.neighbor_ids(x) {
            let Some(&uy) = u.value(y) else { continue };
            let v = (ux - uy).abs();
            let key = if x < y { (x, y) } else { (y, x) };
            best = match best {
                Some((b, k)) if b > v || (b == v && k <= key) => Some((b, k)),
                _ => Some((v, key)),
            };
        }
    }
    best.map(|(value, (a, b))| GradientPair { edge: (g.label(a).to_string(), g.label(b).to_string()), value })
}

/// Compare `max_{x∈W, y∼x} |∇_{xy}u|` with the same maximum over `x ∈ δW`.
///
/// Pairs are restricted to vertices where `u` is defined. `u` must be harmonic on
/// `W ∖ δW`; the Ollivier precondition on `W ∖ δW` is evaluated and reported.
pub fn gradient_max_principle_check(g: &Graph, w: &VertexSet, u: &Function, curvature_tol: f64) -> Result<GradientMaxReport> {
    let delta = g.interior_boundary(w);
    let inner: VertexSet = w.difference(&delta).copied().collect();
    let harmonic_residual = require_harmonic(g, u, &inner)?;
    let curv = curvature::curvature_outside_region(g, &inner, &VertexSet::new(), CurvatureMode::Ollivier, curvature_tol)?;
    let max_interior_pair = max_pair(g, u, w);
    let max_boundary_pair = max_pair(g, u, &delta);
    let a = max_interior_pair.as_ref().map_or(0.0, |p| p.value);
    let b = max_boundary_pair.as_ref().map_or(0.0, |p| p.value);
    Ok(GradientMaxReport {
        holds: (a - b).abs() <= 1e-12,
        max_interior_pair,
        max_boundary_pair,
        harmonic_residual,
        curvature_precondition: curv.pass,
        curvature_violations: curv.violations,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SubharmonicEntry {
    pub vertex: String,
    pub lap_gamma: f64,
    /// `CD(0,∞)` holds at the vertex.
    pub cd0: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SubharmonicityReport {
    pub entries: Vec<SubharmonicEntry>,
    /// Vertices with verified `CD(0,∞)` where `ΔΓ(u) < −tol`.
    pub violations: Vec<String>,
    pub pass: bool,
}

/// `ΔΓ(u)(x)` on `region` for harmonic `u`, flagged against `CD(0,∞)` at each vertex.
pub fn subharmonicity_check(g: &Graph, u: &Function, region: &VertexSet, tol: f64) -> Result<SubharmonicityReport> {
    require_harmonic(g, u, region)?;
    let order: Vec<VertexId> = region.iter().copied().collect();
    let entries: Vec<SubharmonicEntry> = order
        .par_iter()
        .map(|&x| {
            let mut gam = Function::undefined(g.vertex_count());
            gam.set(x, curvature::gamma(g, u, x)?);
            for y in g.neighbor_ids(x) {
                gam.set(y, curvature::gamma(g, u, y)?);
            }
            let lap_gamma = g.laplacian(&gam, x)?;
            let cd0 = curvature::cd_check(g, x, 0.0, f64::INFINITY)?;
            Ok(SubharmonicEntry { vertex: g.label(x).to_string(), lap_gamma, cd0 })
        })
        .collect::<Result<_>>()?;
    let violations: Vec<String> = entries.iter().filter(|e| e.cd0 && e.lap_gamma < -tol).map(|e| e.vertex.clone()).collect();
    Ok(SubharmonicityReport { pass: violations.is_empty(), entries, violations })
}

#[derive(Clone, Debug, Serialize)]
pub struct UniqueContinuationProbe {
    pub probe_radius: usize,
    /// Largest `|∇_e u|` over edges meeting `S_{R0}`.
    pub sphere_gradient: f64,
    /// Largest `|∇_e u|` over edges of the annulus `B_probe ∖ B_{R0}`.
    pub annulus_gradient: f64,
    pub holds: bool,
}

/// Bound `dim H₀(G) ≤ ♯S_{R0+1}(x₀)` together with the curvature evidence behind it.
#[derive(Clone, Debug, Serialize)]
pub struct DimensionCertificate {
    pub x0: String,
    pub r0: usize,
    pub sphere_count: usize,
    pub mode: CurvatureMode,
    pub probe: usize,
    pub curvature_report: CurvatureOutsideReport,
    pub certified: bool,
    pub unique_continuation: Option<UniqueContinuationProbe>,
}

/// Certificate for the dimension bound. Curvature is tested outside `B_{R0}(x₀)` unless
/// `omega` overrides the excluded set. A failed curvature test yields `certified = false`.
pub fn dimension_certificate(
    gen: &GraphGenerator,
    x0: &Site,
    r0: usize,
    mode: CurvatureMode,
    probe: usize,
    omega: Option<&[Site]>,
    probe_function: Option<&BTreeMap<Site, f64>>,
) -> Result<DimensionCertificate> {
    if probe <= r0 {
        return Err(Error::Domain(format!("probe radius {probe} must exceed R0 = {r0}")));
    }
    let x0 = gen.validate_site(x0)?;
    let inner = gen.materialize_ball(&x0, r0 + 1)?;
    let sphere_count = inner.sphere(r0 + 1).len();
    let default_omega: Vec<Site>;
    let omega = match omega {
        Some(o) => o,
        None => {
            default_omega = inner.within(r0).into_iter().map(|v| site_of(&inner.graph, v)).collect();
            &default_omega
        }
    };
    let tol = curvature::default_outside_tolerance(mode);
    let curvature_report = curvature::curvature_outside_at(gen, &x0, omega, mode, probe, tol)?;
    let unique_continuation = match probe_function {
        Some(values) => Some(unique_continuation_probe(gen, &x0, r0, probe, values)?),
        None => None,
    };
    Ok(DimensionCertificate {
        x0: x0.to_string(),
        r0,
        sphere_count,
        mode,
        probe,
        certified: curvature_report.pass && unique_continuation.as_ref().is_none_or(|u| u.holds),
        curvature_report,
        unique_continuation,
    })
}

pub(crate) fn site_of(g: &Graph, v: VertexId) -> Site {
    match g.label(v) {
        Label::Site(s) => s.clone(),
        other => panic!("generated ball carries non-site label {other}"),
    }
}

fn unique_continuation_probe(gen: &GraphGenerator, x0: &Site, r0: usize, probe: usize, values: &BTreeMap<Site, f64>) -> Result<UniqueContinuationProbe> {
    let ball = gen.materialize_ball(x0, probe)?;
    let mut u = Function::undefined(ball.graph.vertex_count());
    for v in ball.graph.vertices() {
        let s = site_of(&ball.graph, v);
        let val = values.get(&s).copied().ok_or_else(|| Error::Domain(format!("probe function undefined at {s}")))?;
        u.set(v, val);
    }
    if let Some(v) = ball.within(r0 + 1).into_iter().find(|&v| *u.get(v).unwrap() != 0.0) {
        return Err(Error::Precondition(format!("probe function does not vanish on B_{}: u({}) ≠ 0", r0 + 1, ball.graph.label(v))));
    }
    require_harmonic(&ball.graph, &u, &ball.within(probe - 1))?;
    let mut sphere_gradient = 0.0f64;
    let mut annulus_gradient = 0.0f64;
    for e in ball.graph.edges() {
        let grad = (u.get(e.u)? - u.get(e.v)?).abs();
        let (du, dv) = (ball.depth_of(e.u), ball.depth_of(e.v));
        if du == r0 || dv == r0 {
            sphere_gradient = sphere_gradient.max(grad);
        }
        if du.min(dv) >= r0 {
            annulus_gradient = annulus_gradient.max(grad);
        }
    }
    let tol = HARMONIC_TOLERANCE * (1.0 + u.sup_norm());
    Ok(UniqueContinuationProbe { probe_radius: probe, sphere_gradient, annulus_gradient, holds: (annulus_gradient - sphere_gradient).abs() <= tol })
}

#[derive(Clone, Debug, Serialize)]
pub struct DecayRow {
    pub r: usize,
    pub max_gamma: f64,
    pub max_edge_grad: f64,
}

/// Per-radius maxima of `Γ(u)` on `S_r` and of `|∇_e u|` on edges meeting `S_r`.
pub fn gradient_decay_profile(ball: &Ball, u: &Function, radii: &[usize]) -> Result<Vec<DecayRow>> {
    let max_r = radii.iter().copied().max().unwrap_or(0);
    if ball.radius < max_r + 2 {
        return Err(Error::Precondition(format!("profile to radius {max_r} needs a ball of radius {}", max_r + 2)));
    }
    radii
        .iter()
        .map(|&r| {
            let mut max_gamma = 0.0f64;
            let mut max_edge_grad = 0.0f64;
            for x in ball.sphere(r) {
                max_gamma = max_gamma.max(curvature::gamma(&ball.graph, u, x)?);
                for y in ball.graph.neighbor_ids(x) {
                    max_edge_grad = max_edge_grad.max((u.get(x)? - u.get(y)?).abs());
                }
            }
            Ok(DecayRow { r, max_gamma, max_edge_grad })
        })
        .collect()
}
