//! Carré du champ, Bakry-Émery curvature and Ollivier curvature.
//!
//! Bakry-Émery curvature at `x` is the largest `K` with
//! `Γ₂(f)(x) ≥ (1/n)(Δf(x))² + K Γ(f)(x)` for all `f`. Both sides are
//! quadratic forms in the values of `f` on `B₂(x)`, so `K` is found by
//! bisection on the smallest eigenvalue of `Q₂ − K Q₁`.
//!
//! Ollivier curvature of an edge is the optimum of a small linear program over
//! 1-Lipschitz functions on `B₁(x) ∪ B₁(y)`.

use std::collections::{BTreeMap, HashMap, VecDeque};

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generators::GraphGenerator;
use crate::graph::{FunctionOnVertices, Label, RootedBall, VertexId, VertexSet, WeightedGraph};
use crate::linalg::smallest_eigenpair;
use crate::lp::{LinearProgram, Relation};
use crate::scalar::{Real, Scalar};
use crate::site::Site;
use crate::Graph;

/// Absolute bisection tolerance on `K`.
pub const BE_TOLERANCE: f64 = 1e-8;
/// Largest `|K|` the bracket may reach.
pub const BE_LIMIT: f64 = 1e6;

/// `Γ(f,h)(x) = (1/2m(x)) Σ_{y∼x} w(x,y)(f(y)−f(x))(h(y)−h(x))`.
pub fn gamma_bilinear<S: Scalar>(g: &WeightedGraph<S>, f: &FunctionOnVertices<S>, h: &FunctionOnVertices<S>, x: VertexId) -> Result<S> {
    g.check(x)?;
    let (fx, hx) = (f.get(x)?.clone(), h.get(x)?.clone());
    let mut acc = S::zero();
    for (y, w) in g.neighbors(x) {
        acc = acc + w.clone() * (f.get(y)?.clone() - fx.clone()) * (h.get(y)?.clone() - hx.clone());
    }
    Ok(acc / (g.mass(x).clone() + g.mass(x).clone()))
}

/// `Γ(f)(x) = Γ(f,f)(x)`.
pub fn gamma<S: Scalar>(g: &WeightedGraph<S>, f: &FunctionOnVertices<S>, x: VertexId) -> Result<S> {
    gamma_bilinear(g, f, f, x)
}

/// `Γ₂(f)(x) = ½ΔΓ(f)(x) − Γ(f,Δf)(x)`; needs `f` on `B₂(x)`.
pub fn gamma2<S: Scalar>(g: &WeightedGraph<S>, f: &FunctionOnVertices<S>, x: VertexId) -> Result<S> {
    let mut gam = FunctionOnVertices::undefined(g.vertex_count());
    let mut lap = FunctionOnVertices::undefined(g.vertex_count());
    gam.set(x, gamma(g, f, x)?);
    lap.set(x, g.laplacian(f, x)?);
    for y in g.neighbor_ids(x) {
        gam.set(y, gamma(g, f, y)?);
        lap.set(y, g.laplacian(f, y)?);
    }
    let half_lap_gamma = g.laplacian(&gam, x)? * S::half();
    Ok(half_lap_gamma - gamma_bilinear(g, f, &lap, x)?)
}

/// `Q₂` and `Q₁` on functions over `B₂(x) ∖ {x}` with `f(x) = 0`.
#[derive(Clone, Debug)]
pub struct LocalForms<S> {
    /// Coordinates of the forms, in id order.
    pub vertices: Vec<VertexId>,
    /// `Γ₂(f)(x) − inv_n·(Δf(x))²`.
    pub q2: Vec<Vec<S>>,
    /// `Γ(f)(x)`.
    pub q1: Vec<Vec<S>>,
}

/// Assemble the Bakry-Émery quadratic forms at `x`. `inv_n` is `1/n` (zero for `n = ∞`).
pub fn be_forms<S: Scalar>(g: &WeightedGraph<S>, x: VertexId, inv_n: S) -> Result<LocalForms<S>> {
    let local = g.local_ball(x, 2)?;
    let k = local.len();
    let idx: HashMap<VertexId, usize> = local.iter().enumerate().map(|(i, &(v, _))| (v, i)).collect();
    let b1: Vec<VertexId> = local.iter().filter(|(_, d)| *d <= 1).map(|&(v, _)| v).collect();
    let zero_matrix = || vec![vec![S::zero(); k]; k];

    // Γ(·,·)(z) and Δ·(z) for z ∈ B₁(x) as dense forms over B₂(x).
    let mut gz: HashMap<VertexId, Vec<Vec<S>>> = HashMap::new();
    let mut lz: HashMap<VertexId, Vec<S>> = HashMap::new();
    for &z in &b1 {
        let mz = g.mass(z).clone();
        let two_mz = mz.clone() + mz.clone();
        let iz = idx[&z];
        let mut gm = zero_matrix();
        let mut row = vec![S::zero(); k];
        for (u, w) in g.neighbors(z) {
            let iu = idx[&u];
            let c = w.clone() / two_mz.clone();
            gm[iu][iu] = gm[iu][iu].clone() + c.clone();
            gm[iz][iz] = gm[iz][iz].clone() + c.clone();
            gm[iu][iz] = gm[iu][iz].clone() - c.clone();
            gm[iz][iu] = gm[iz][iu].clone() - c;
            let a = w.clone() / mz.clone();
            row[iu] = row[iu].clone() + a.clone();
            row[iz] = row[iz].clone() - a;
        }
        gz.insert(z, gm);
        lz.insert(z, row);
    }
    let ix = idx[&x];
    let gx = &gz[&x];
    let mx = g.mass(x).clone();
    let mut q2 = zero_matrix();
    // ½ Σ_{y∼x} (w/m(x)) (Γ(y) − Γ(x))
    for (y, w) in g.neighbors(x) {
        let c = w.clone() / (mx.clone() + mx.clone());
        let gy = &gz[&y];
        for a in 0..k {
            for b in 0..k {
                q2[a][b] = q2[a][b].clone() + c.clone() * (gy[a][b].clone() - gx[a][b].clone());
            }
        }
    }
    // − sym(Γ(x) · Δ), Δ restricted to rows in B₁(x)
    for a in 0..k {
        for b in 0..k {
            let mut s = S::zero();
            for &z in &b1 {
                let iz = idx[&z];
                if !gx[a][iz].is_zero() {
                    s = s + gx[a][iz].clone() * lz[&z][b].clone();
                }
            }
            let half = s * S::half();
            q2[a][b] = q2[a][b].clone() - half.clone();
            q2[b][a] = q2[b][a].clone() - half;
        }
    }
    if !inv_n.is_zero() {
        let lx = &lz[&x];
        for a in 0..k {
            for b in 0..k {
                q2[a][b] = q2[a][b].clone() - inv_n.clone() * lx[a].clone() * lx[b].clone();
            }
        }
    }
    let keep: Vec<usize> = (0..k).filter(|&i| i != ix).collect();
    let restrict = |m: &Vec<Vec<S>>| keep.iter().map(|&a| keep.iter().map(|&b| m[a][b].clone()).collect()).collect();
    Ok(LocalForms { vertices: keep.iter().map(|&i| local[i].0).collect(), q2: restrict(&q2), q1: restrict(gx) })
}

/// Outcome of a Bakry-Émery curvature computation at one vertex.
#[derive(Clone, Debug)]
pub struct BakryEmeryResult<T = f64> {
    pub vertex: VertexId,
    /// Dimension parameter; `f64::INFINITY` for `n = ∞`.
    pub n: f64,
    pub curvature: T,
    /// Near-minimizer of `Γ₂/Γ` on `B₂(x)`, zero at `x`.
    pub witness: FunctionOnVertices<T>,
    pub tolerance: T,
    /// Set when `x` has no neighbors; `curvature` is then `+∞`.
    pub degenerate: bool,
    pub bisection_steps: usize,
}

struct PsdTester<T> {
    q2: DMatrix<T>,
    q1: DMatrix<T>,
    slack: T,
}

impl<T: Real> PsdTester<T> {
    fn new(forms: &LocalForms<T>) -> Self {
        let k = forms.vertices.len();
        let q2 = DMatrix::from_fn(k, k, |a, b| forms.q2[a][b]);
        let q1 = DMatrix::from_fn(k, k, |a, b| forms.q1[a][b]);
        let norm = (0..k).map(|a| (0..k).fold(T::zero(), |s, b| s + q2[(a, b)].abs())).fold(T::zero(), |m, r| if r > m { r } else { m });
        PsdTester { q2, q1, slack: T::psd_floor() * (T::one() + norm) }
    }

    fn eig(&self, kappa: T) -> (T, nalgebra::DVector<T>) {
        smallest_eigenpair(&(&self.q2 - &self.q1 * kappa))
    }

    fn passes(&self, kappa: T) -> bool {
        self.eig(kappa).0 >= -self.slack
    }
}

fn inv_dimension<T: Real>(n: f64) -> Result<T> {
    if !(n > 0.0) {
        return Err(Error::Domain(format!("dimension parameter must be positive, got {n}")));
    }
    Ok(if n.is_infinite() { T::zero() } else { T::of(1.0 / n) })
}

/// Bakry-Émery curvature `K_n(x)` on a graph that contains `B₂(x)`.
pub fn bakry_emery_curvature<T: Real>(g: &WeightedGraph<T>, x: VertexId, n: f64) -> Result<BakryEmeryResult<T>> {
    let forms = be_forms(g, x, inv_dimension::<T>(n)?)?;
    let tol = T::of(BE_TOLERANCE);
    if g.degree(x) == 0 {
        let mut witness = FunctionOnVertices::undefined(g.vertex_count());
        witness.set(x, T::zero());
        let inf = T::from_f64(f64::INFINITY).unwrap();
        return Ok(BakryEmeryResult { vertex: x, n, curvature: inf, witness, tolerance: tol, degenerate: true, bisection_steps: 0 });
    }
    let tester = PsdTester::new(&forms);
    let limit = T::of(BE_LIMIT);
    let unbounded = || Error::UnboundedCurvature { vertex: g.label(x).to_string(), limit: BE_LIMIT };

    // Upper bound: Rayleigh quotient of the indicator of the first neighbor.
    let y = g.neighbor_ids(x).next().unwrap();
    let j = forms.vertices.iter().position(|&v| v == y).unwrap();
    let mut hi = tester.q2[(j, j)] / tester.q1[(j, j)];
    let mut step = T::one();
    while tester.passes(hi) {
        hi += step;
        step += step;
        if hi.abs() > limit {
            return Err(unbounded());
        }
    }
    let mut lo = -hi.abs() - T::one();
    let mut step = T::one() + hi.abs();
    while !tester.passes(lo) {
        lo -= step;
        step += step;
        if lo.abs() > limit {
            return Err(unbounded());
        }
    }
    let mut steps = 0;
    while hi - lo > tol {
        let mid = (lo + hi) * T::half();
        if tester.passes(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
        steps += 1;
    }
    let (_, v) = tester.eig(hi);
    let mut witness = FunctionOnVertices::undefined(g.vertex_count());
    witness.set(x, T::zero());
    for (k, &u) in forms.vertices.iter().enumerate() {
        witness.set(u, v[k]);
    }
    Ok(BakryEmeryResult { vertex: x, n, curvature: lo, witness, tolerance: tol, degenerate: false, bisection_steps: steps })
}

/// Bakry-Émery curvature at a vertex of a ball, checking that `B₂(x)` is inside.
pub fn bakry_emery_curvature_in_ball<T: Real>(ball: &RootedBall<T>, x: VertexId, n: f64) -> Result<BakryEmeryResult<T>> {
    if !ball.contains_ball(x, 2) {
        return Err(Error::Precondition(format!("B_2({}) is not contained in the ball of radius {}", ball.graph.label(x), ball.radius)));
    }
    bakry_emery_curvature(&ball.graph, x, n)
}

/// `true` iff `Q₂ − K Q₁ ⪰ −ε_psd` at `x`, i.e. `CD(K, n)` holds at `x`.
pub fn cd_check<T: Real>(g: &WeightedGraph<T>, x: VertexId, kappa: T, n: f64) -> Result<bool> {
    let forms = be_forms(g, x, inv_dimension::<T>(n)?)?;
    if forms.vertices.is_empty() {
        return Ok(true);
    }
    Ok(PsdTester::new(&forms).passes(kappa))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LpStatus {
    Optimal,
    Infeasible,
}

/// Outcome of an Ollivier curvature computation on one edge.
#[derive(Clone, Debug)]
pub struct OllivierResult<S = f64> {
    pub edge: (VertexId, VertexId),
    pub kappa: S,
    /// Minimizer on `B₁(x) ∪ B₁(y)` with `f(x) = 0`, `f(y) = 1`.
    pub optimizer: FunctionOnVertices<S>,
    pub lp_status: LpStatus,
    pub duality_gap: S,
    /// Largest violation of `f(u) − f(v) ≤ d(u,v)` found on re-evaluation.
    pub max_violation: S,
}

/// Distances between all pairs of `targets`, by BFS inside `B₃(x)`.
fn local_distances<S: Scalar>(g: &WeightedGraph<S>, x: VertexId, targets: &[VertexId]) -> Result<Vec<Vec<usize>>> {
    let region: HashMap<VertexId, usize> = g.local_ball(x, 3)?.into_iter().collect();
    let mut out = Vec::with_capacity(targets.len());
    for &s in targets {
        let mut depth = HashMap::from([(s, 0usize)]);
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            let d = depth[&u];
            if d == 3 {
                continue;
            }
            for v in g.neighbor_ids(u) {
                if region.contains_key(&v) && !depth.contains_key(&v) {
                    depth.insert(v, d + 1);
                    queue.push_back(v);
                }
            }
        }
        let row = targets
            .iter()
            .map(|t| depth.get(t).copied().ok_or_else(|| Error::Precondition(format!("no path of length ≤ 3 between {} and {}", g.label(s), g.label(*t)))))
            .collect::<Result<Vec<_>>>()?;
        out.push(row);
    }
    Ok(out)
}

/// Ollivier curvature `κ(x,y)` of an edge, on a graph that contains `B₃(x)`.
pub fn ollivier_curvature<S: Scalar>(g: &WeightedGraph<S>, x: VertexId, y: VertexId) -> Result<OllivierResult<S>> {
    g.check(x)?;
    g.check(y)?;
    if !g.has_edge(x, y) {
        return Err(Error::Domain(format!("{} and {} are not adjacent", g.label(x), g.label(y))));
    }
    let mut nodes: Vec<VertexId> = g.neighbor_ids(x).chain(g.neighbor_ids(y)).chain([x, y]).collect();
    nodes.sort_unstable();
    nodes.dedup();
    let dist = local_distances(g, x, &nodes)?;
    let pos = |v: VertexId| nodes.binary_search(&v).unwrap();
    let (px, py) = (pos(x), pos(y));

    // Objective Δf(x) − Δf(y) as Σ c_u f(u).
    let mut c = vec![S::zero(); nodes.len()];
    for (src, sign) in [(x, S::one()), (y, S::zero() - S::one())] {
        let ps = pos(src);
        let m = g.mass(src).clone();
        for (u, w) in g.neighbors(src) {
            let a = sign.clone() * w.clone() / m.clone();
            c[pos(u)] = c[pos(u)].clone() + a.clone();
            c[ps] = c[ps].clone() - a;
        }
    }
    // Free variables g(u) = f(u) + d(u,x) ≥ 0 for u ∉ {x,y}; f(x) = 0, f(y) = 1.
    let free: Vec<usize> = (0..nodes.len()).filter(|&i| i != px && i != py).collect();
    let col = |i: usize| free.iter().position(|&j| j == i);
    let d = |a: usize, b: usize| S::from_usize(dist[a][b]).unwrap();
    let fixed = |i: usize| if i == py { Some(S::one()) } else if i == px { Some(S::zero()) } else { None };
    let mut lp = LinearProgram::new(free.len());
    for (k, &i) in free.iter().enumerate() {
        lp.objective[k] = c[i].clone();
    }
    for a in 0..nodes.len() {
        for b in 0..nodes.len() {
            if a == b || (fixed(a).is_some() && fixed(b).is_some()) {
                continue;
            }
            // f(a) − f(b) ≤ d(a,b)  ⇔  g(a) − g(b) ≤ d(a,b) + d(a,x) − d(b,x) with fixed values moved right.
            let mut coeffs = vec![S::zero(); free.len()];
            let mut rhs = d(a, b);
            match (fixed(a), col(a)) {
                (Some(v), _) => rhs = rhs - v,
                (None, Some(k)) => {
                    coeffs[k] = S::one();
                    rhs = rhs + d(a, px);
                }
                _ => unreachable!(),
            }
            match (fixed(b), col(b)) {
                (Some(v), _) => rhs = rhs + v,
                (None, Some(k)) => {
                    coeffs[k] = S::zero() - S::one();
                    rhs = rhs - d(b, px);
                }
                _ => unreachable!(),
            }
            lp.push(coeffs, Relation::Le, rhs);
        }
    }
    let sol = lp.solve().map_err(|e| match e {
        Error::Numeric(msg) if msg.contains("infeasible") => Error::Numeric(format!("Lipschitz program at {}-{} is infeasible", g.label(x), g.label(y))),
        other => other,
    })?;
    let mut f = vec![S::zero(); nodes.len()];
    f[py] = S::one();
    for (k, &i) in free.iter().enumerate() {
        f[i] = sol.x[k].clone() - d(i, px);
    }
    let kappa = c.iter().zip(&f).fold(S::zero(), |acc, (ci, fi)| acc + ci.clone() * fi.clone());
    let mut max_violation = S::zero();
    for a in 0..nodes.len() {
        for b in 0..nodes.len() {
            if a != b {
                max_violation = S::max_of(max_violation, f[a].clone() - f[b].clone() - d(a, b));
            }
        }
    }
    let mut optimizer = FunctionOnVertices::undefined(g.vertex_count());
    for (i, &v) in nodes.iter().enumerate() {
        optimizer.set(v, f[i].clone());
    }
    Ok(OllivierResult { edge: (x, y), kappa, optimizer, lp_status: LpStatus::Optimal, duality_gap: sol.duality_gap, max_violation })
}

/// Ollivier curvature on an edge of a ball, checking that `B₃(x)` is inside.
pub fn ollivier_curvature_in_ball<S: Scalar>(ball: &RootedBall<S>, x: VertexId, y: VertexId) -> Result<OllivierResult<S>> {
    if !ball.contains_ball(x, 3) {
        return Err(Error::Precondition(format!("B_3({}) is not contained in the ball of radius {}", ball.graph.label(x), ball.radius)));
    }
    ollivier_curvature(&ball.graph, x, y)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurvatureMode {
    BakryEmery,
    Ollivier,
}

impl std::str::FromStr for CurvatureMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "be" | "bakry_emery" | "bakry-emery" => Ok(CurvatureMode::BakryEmery),
            "ollivier" => Ok(CurvatureMode::Ollivier),
            _ => Err(Error::Domain(format!("unknown curvature mode {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Violation {
    /// Vertex label, or `u-v` for an edge.
    pub at: String,
    pub value: f64,
}

/// Curvature lower bound check outside a finite set.
#[derive(Clone, Debug, Serialize)]
pub struct CurvatureOutsideReport {
    pub omega: Vec<String>,
    pub mode: CurvatureMode,
    pub probe_radius: Option<usize>,
    pub tolerance: f64,
    pub checked: usize,
    pub min_value: Option<f64>,
    pub violations: Vec<Violation>,
    pub pass: bool,
}

/// Default slack for `κ ≥ −tol` and `K_∞ ≥ −tol`.
pub fn default_outside_tolerance(mode: CurvatureMode) -> f64 {
    match mode {
        CurvatureMode::BakryEmery => 2.0 * BE_TOLERANCE,
        CurvatureMode::Ollivier => 1e-9,
    }
}

fn edge_name(g: &Graph, u: VertexId, v: VertexId) -> String {
    format!("{}-{}", g.label(u), g.label(v))
}

/// Check `K_∞ ≥ −tol` on `region ∖ Ω` or `κ ≥ −tol` on edges inside `region ∖ Ω`.
/// The graph must contain `B₂` (resp. `B₃`) of every tested vertex.
pub fn curvature_outside_region(g: &Graph, region: &VertexSet, omega: &VertexSet, mode: CurvatureMode, tol: f64) -> Result<CurvatureOutsideReport> {
    let outside: Vec<VertexId> = region.iter().copied().filter(|v| !omega.contains(v)).collect();
    let values: Vec<(String, f64)> = match mode {
        CurvatureMode::BakryEmery => outside
            .par_iter()
            .map(|&x| bakry_emery_curvature(g, x, f64::INFINITY).map(|r| (g.label(x).to_string(), r.curvature)))
            .collect::<Result<_>>()?,
        CurvatureMode::Ollivier => {
            let set: VertexSet = outside.iter().copied().collect();
            let edges: Vec<(VertexId, VertexId)> =
                g.edges().iter().filter(|e| set.contains(&e.u) && set.contains(&e.v)).map(|e| (e.u, e.v)).collect();
            edges
                .par_iter()
                .map(|&(u, v)| {
                    let a = ollivier_curvature(g, u, v)?.kappa;
                    let b = ollivier_curvature(g, v, u)?.kappa;
                    Ok((edge_name(g, u, v), a.min(b)))
                })
                .collect::<Result<_>>()?
        }
    };
    let violations: Vec<Violation> =
        values.iter().filter(|(_, k)| *k < -tol).map(|(at, k)| Violation { at: at.clone(), value: *k }).collect();
    let min_value = values.iter().map(|(_, k)| *k).fold(None, |m: Option<f64>, k| Some(m.map_or(k, |m| m.min(k))));
    let mut omega_names: Vec<String> = omega.iter().map(|&v| g.label(v).to_string()).collect();
    omega_names.sort();
    Ok(CurvatureOutsideReport {
        omega: omega_names,
        mode,
        probe_radius: None,
        tolerance: tol,
        checked: values.len(),
        min_value,
        pass: violations.is_empty(),
        violations,
    })
}

/// [`curvature_outside_region`] over all vertices of a finite graph.
pub fn curvature_outside_graph(g: &Graph, omega: &VertexSet, mode: CurvatureMode, tol: f64) -> Result<CurvatureOutsideReport> {
    let all: VertexSet = g.vertices().collect();
    curvature_outside_region(g, &all, omega, mode, tol)
}

/// Curvature check on `B_probe(root) ∖ Ω` of a generated graph.
pub fn curvature_outside(gen: &GraphGenerator, omega: &[Site], mode: CurvatureMode, probe: usize, tol: f64) -> Result<CurvatureOutsideReport> {
    let root = gen.root();
    curvature_outside_at(gen, &root, omega, mode, probe, tol)
}

/// Curvature check on `B_probe(center) ∖ Ω`.
pub fn curvature_outside_at(gen: &GraphGenerator, center: &Site, omega: &[Site], mode: CurvatureMode, probe: usize, tol: f64) -> Result<CurvatureOutsideReport> {
    let margin = match mode {
        CurvatureMode::BakryEmery => 2,
        CurvatureMode::Ollivier => 3,
    };
    let ball = gen.materialize_ball(center, probe + margin)?;
    let mut omega_ids = VertexSet::new();
    for s in omega {
        let s = gen.validate_site(s)?;
        let id = ball.graph.id_of(&Label::Site(s.clone())).filter(|&v| ball.depth_of(v) <= probe);
        omega_ids.insert(id.ok_or_else(|| Error::Precondition(format!("omega vertex {s} lies outside the probe ball")))?);
    }
    let region = ball.within(probe);
    let mut report = curvature_outside_region(&ball.graph, &region, &omega_ids, mode, tol)?;
    report.probe_radius = Some(probe);
    Ok(report)
}

/// Per-vertex Bakry-Émery curvature over a set, keyed by label, computed in parallel.
pub fn be_sweep(g: &Graph, vertices: &[VertexId], n: f64) -> Result<BTreeMap<VertexId, BakryEmeryResult>> {
    let results: Vec<BakryEmeryResult> = vertices.par_iter().map(|&x| bakry_emery_curvature(g, x, n)).collect::<Result<_>>()?;
    Ok(results.into_iter().map(|r| (r.vertex, r)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GraphBuilder;
    use crate::scalar::Rational;
    use crate::site::Site;

    fn edge() -> Graph {
        Graph::unit(2, &[(0, 1)]).unwrap()
    }

    fn func(g: &Graph, vals: &[f64]) -> FunctionOnVertices {
        FunctionOnVertices::from_fn(g, |v| vals[v.index()])
    }

    #[test]
    fn gamma_examples() {
        let g = edge();
        let f = func(&g, &[0.0, 1.0]);
        assert_eq!(gamma(&g, &f, VertexId(0)).unwrap(), 0.5);
        assert_eq!(gamma2(&g, &f, VertexId(0)).unwrap(), 1.0);
        let c = func(&g, &[3.0, 3.0]);
        assert_eq!(gamma(&g, &c, VertexId(0)).unwrap(), 0.0);
        assert_eq!(gamma2(&g, &c, VertexId(0)).unwrap(), 0.0);
        let partial = FunctionOnVertices::from_values(vec![0.0]);
        assert!(gamma(&g, &partial, VertexId(0)).is_err());
    }

    #[test]
    fn gamma2_on_second_sphere() {
        // f supported on S₂(x): Γ₂(f)(x) = ½ Σ_{y∼x} (w/m) Γ(f)(y)
        let g = Graph::unit(5, &[(0, 1), (1, 2), (0, 3), (3, 4)]).unwrap();
        let f = func(&g, &[0.0, 0.0, 2.0, 0.0, -1.0]);
        let expected = 0.5 * (gamma(&g, &f, VertexId(1)).unwrap() + gamma(&g, &f, VertexId(3)).unwrap());
        assert!((gamma2(&g, &f, VertexId(0)).unwrap() - expected).abs() < 1e-14);
        assert!(expected > 0.0);
    }

    #[test]
    fn single_edge_be() {
        let g = edge();
        let r = bakry_emery_curvature(&g, VertexId(0), f64::INFINITY).unwrap();
        assert!((r.curvature - 2.0).abs() <= 1e-8);
        assert!(cd_check(&g, VertexId(0), 2.0, f64::INFINITY).unwrap());
        assert!(!cd_check(&g, VertexId(0), 2.1, f64::INFINITY).unwrap());
        assert!(cd_check(&g, VertexId(0), -1e6, f64::INFINITY).unwrap());
    }

    #[test]
    fn isolated_vertex_is_flagged() {
        let g = Graph::unit(1, &[]).unwrap();
        let r = bakry_emery_curvature(&g, VertexId(0), f64::INFINITY).unwrap();
        assert!(r.degenerate && r.curvature.is_infinite());
    }

    #[test]
    fn be_witness_attains_bound() {
        let g = Graph::unit(5, &[(0, 1), (0, 2), (0, 3), (3, 4), (1, 2)]).unwrap();
        for x in g.vertices() {
            let r = bakry_emery_curvature(&g, x, f64::INFINITY).unwrap();
            let mut w = r.witness.clone();
            for v in g.vertices() {
                if w.value(v).is_none() {
                    w.set(v, 0.0);
                }
            }
            let q1 = gamma(&g, &w, x).unwrap();
            let q2 = gamma2(&g, &w, x).unwrap();
            assert!(q1 > 0.0);
            assert!(q2 / q1 <= r.curvature + 1e-6, "{} vs {}", q2 / q1, r.curvature);
            assert!(cd_check(&g, x, r.curvature - 2e-8, f64::INFINITY).unwrap());
        }
    }

    #[test]
    fn finite_dimension_lowers_curvature() {
        // single edge: Γ₂ = 1, Γ = ½, (Δf)² = 1, so K_n = 2 − 2/n
        let g = edge();
        let two = bakry_emery_curvature(&g, VertexId(0), 2.0).unwrap().curvature;
        assert!((two - 1.0).abs() <= 1e-8);
        let star = Graph::unit(4, &[(0, 1), (0, 2), (0, 3)]).unwrap();
        let inf = bakry_emery_curvature(&star, VertexId(0), f64::INFINITY).unwrap().curvature;
        let three = bakry_emery_curvature(&star, VertexId(0), 3.0).unwrap().curvature;
        assert!(three <= inf + 1e-8);
    }

    #[test]
    fn forms_are_exact_in_rationals() {
        let g: WeightedGraph<Rational> = Graph::unit(3, &[(0, 1), (1, 2)]).unwrap().map_scalar(|w| Rational::of(*w));
        let forms = be_forms(&g, VertexId(1), Rational::of(0.0)).unwrap();
        assert_eq!(forms.vertices, vec![VertexId(0), VertexId(2)]);
        assert_eq!(forms.q1[0][0], Rational::of(0.5));
    }

    #[test]
    fn ollivier_pinned_values() {
        let g = edge();
        let r = ollivier_curvature(&g, VertexId(0), VertexId(1)).unwrap();
        assert_eq!(r.kappa, 2.0);
        let k3 = Graph::unit(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        assert!((ollivier_curvature(&k3, VertexId(0), VertexId(1)).unwrap().kappa - 3.0).abs() < 1e-12);
        let c4 = Graph::unit(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        let r = ollivier_curvature(&c4, VertexId(0), VertexId(1)).unwrap();
        assert!((r.kappa - 2.0).abs() < 1e-12);
        assert!(r.duality_gap < 1e-9 && r.max_violation <= 1e-12);
        assert!(ollivier_curvature(&c4, VertexId(0), VertexId(2)).is_err());
    }

    #[test]
    fn ollivier_on_lattice_edge() {
        let z = GraphGenerator::lattice(1).root_ball(4).unwrap();
        let x = z.graph.id_of(&Label::Site(Site::Lattice(vec![0]))).unwrap();
        let y = z.graph.id_of(&Label::Site(Site::Lattice(vec![1]))).unwrap();
        assert!(ollivier_curvature_in_ball(&z, x, y).unwrap().kappa.abs() < 1e-12);
        let edge_of_sphere = z.graph.id_of(&Label::Site(Site::Lattice(vec![3]))).unwrap();
        let out = z.graph.id_of(&Label::Site(Site::Lattice(vec![4]))).unwrap();
        assert!(matches!(ollivier_curvature_in_ball(&z, edge_of_sphere, out), Err(Error::Precondition(_))));
    }

    #[test]
    fn ollivier_exact_rational() {
        let mut b = GraphBuilder::new();
        for i in 0..4i64 {
            b.vertex(i, Rational::of(1.0)).unwrap();
        }
        for (u, v, w) in [(0, 1, 0.5), (1, 2, 2.0), (2, 3, 1.0), (3, 0, 1.5), (0, 2, 1.0)] {
            b.edge(u as i64, v as i64, Rational::of(w)).unwrap();
        }
        let g = b.build().unwrap();
        let r = ollivier_curvature(&g, VertexId(0), VertexId(1)).unwrap();
        assert_eq!(r.duality_gap, Rational::of(0.0));
        assert!(r.max_violation <= Rational::of(0.0));
    }

    #[test]
    fn outside_reports() {
        let g = edge();
        let rep = curvature_outside_graph(&g, &VertexSet::new(), CurvatureMode::BakryEmery, 1e-8).unwrap();
        assert!(rep.pass && rep.checked == 2);
        let z2 = GraphGenerator::lattice(2);
        let rep = curvature_outside(&z2, &[], CurvatureMode::Ollivier, 2, 1e-9).unwrap();
        assert!(rep.pass);
        assert_eq!(rep.checked, 16);
    }
}
