//! Discrete pointed Gromov-Hausdorff machinery on rooted balls.
//!
//! Every verdict is evidence over the tested indices only; no report claims
//! anything about indices that were not materialized.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::curvature::{bakry_emery_curvature_in_ball, ollivier_curvature_in_ball, CurvatureMode};
use crate::error::{Error, Result};
use crate::generators::RootedGeneratorSequence;
use crate::graph::{RootedBall, VertexId};
use crate::scalar::Scalar;
use crate::{Ball, Function};

/// Default cap on search nodes for one isomorphism query.
pub const ISO_NODE_BUDGET: usize = 5_000_000;

const CAVEAT: &str = "evidence over tested indices only";

/// Root-fixing isomorphism between two rooted balls.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RootedIsomorphism {
    /// `mapping[v]` is the image of source vertex `v`.
    pub mapping: Vec<VertexId>,
    pub source_root: VertexId,
    pub target_root: VertexId,
}

impl RootedIsomorphism {
    pub fn map(&self, v: VertexId) -> VertexId {
        self.mapping[v.index()]
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![VertexId(0); self.mapping.len()];
        for (i, &t) in self.mapping.iter().enumerate() {
            inv[t.index()] = VertexId(i as u32);
        }
        RootedIsomorphism { mapping: inv, source_root: self.target_root, target_root: self.source_root }
    }

    /// Check bijectivity, root preservation and adjacency in both directions.
    pub fn verify<S: Scalar, T: Scalar>(&self, a: &RootedBall<S>, b: &RootedBall<T>) -> bool {
        let n = a.graph.vertex_count();
        if n != b.graph.vertex_count() || self.mapping.len() != n || self.map(a.root) != b.root {
            return false;
        }
        let mut seen = vec![false; n];
        for &t in &self.mapping {
            if t.index() >= n || std::mem::replace(&mut seen[t.index()], true) {
                return false;
            }
        }
        a.graph.edge_count() == b.graph.edge_count() && a.graph.edges().iter().all(|e| b.graph.has_edge(self.map(e.u), self.map(e.v)))
    }
}

/// Joint colour refinement seeded with `(depth, degree)`.
fn refine<S: Scalar, T: Scalar>(a: &RootedBall<S>, b: &RootedBall<T>) -> Option<(Vec<u32>, Vec<u32>)> {
    let init = |ball_depth: &[usize], deg: &dyn Fn(usize) -> usize, n: usize| -> Vec<(usize, usize)> {
        (0..n).map(|i| (ball_depth[i], deg(i))).collect()
    };
    let na = a.graph.vertex_count();
    let nb = b.graph.vertex_count();
    let ia = init(&a.depth, &|i| a.graph.degree(VertexId(i as u32)), na);
    let ib = init(&b.depth, &|i| b.graph.degree(VertexId(i as u32)), nb);
    let mut table: BTreeMap<(usize, usize), u32> = BTreeMap::new();
    for k in ia.iter().chain(&ib) {
        let next = table.len() as u32;
        table.entry(*k).or_insert(next);
    }
    let mut ca: Vec<u32> = ia.iter().map(|k| table[k]).collect();
    let mut cb: Vec<u32> = ib.iter().map(|k| table[k]).collect();
    let mut classes = table.len();
    loop {
        let hist = |c: &[u32]| {
            let mut h = BTreeMap::new();
            for &x in c {
                *h.entry(x).or_insert(0usize) += 1;
            }
            h
        };
        if hist(&ca) != hist(&cb) {
            return None;
        }
        let mut t: BTreeMap<(u32, Vec<u32>), u32> = BTreeMap::new();
        let sig = |c: &[u32], v: usize, nbrs: Vec<VertexId>| {
            let mut s: Vec<u32> = nbrs.iter().map(|u| c[u.index()]).collect();
            s.sort_unstable();
            (c[v], s)
        };
        let sa: Vec<_> = (0..na).map(|v| sig(&ca, v, a.graph.neighbor_ids(VertexId(v as u32)).collect())).collect();
        let sb: Vec<_> = (0..nb).map(|v| sig(&cb, v, b.graph.neighbor_ids(VertexId(v as u32)).collect())).collect();
        for s in sa.iter().chain(&sb) {
            let next = t.len() as u32;
            t.entry(s.clone()).or_insert(next);
        }
        let stable = t.len() == classes;
        classes = t.len();
        ca = sa.iter().map(|s| t[s]).collect();
        cb = sb.iter().map(|s| t[s]).collect();
        if stable {
            return (hist(&ca) == hist(&cb)).then_some((ca, cb));
        }
    }
}

/// Root-fixing isomorphism search; `Ok(None)` when none exists.
pub fn rooted_isomorphism<S: Scalar, T: Scalar>(a: &RootedBall<S>, b: &RootedBall<T>) -> Result<Option<RootedIsomorphism>> {
    rooted_isomorphism_with_budget(a, b, ISO_NODE_BUDGET)
}

pub fn rooted_isomorphism_with_budget<S: Scalar, T: Scalar>(a: &RootedBall<S>, b: &RootedBall<T>, budget: usize) -> Result<Option<RootedIsomorphism>> {
    let n = a.graph.vertex_count();
    if n != b.graph.vertex_count() || a.graph.edge_count() != b.graph.edge_count() {
        return Ok(None);
    }
    let mut pa = a.depth.clone();
    let mut pb = b.depth.clone();
    pa.sort_unstable();
    pb.sort_unstable();
    if pa != pb {
        return Ok(None);
    }
    let Some((ca, cb)) = refine(a, b) else { return Ok(None) };
    if ca[a.root.index()] != cb[b.root.index()] {
        return Ok(None);
    }

    let nbr_degrees = |g: &crate::graph::WeightedGraph<T>, v: VertexId| {
        let mut d: Vec<usize> = g.neighbor_ids(v).map(|u| g.degree(u)).collect();
        d.sort_unstable();
        d
    };
    let keys: Vec<(usize, usize, Vec<usize>, u32)> =
        b.graph.vertices().map(|v| (b.depth_of(v), b.graph.degree(v), nbr_degrees(&b.graph, v), v.0)).collect();

    let mut order: Vec<VertexId> = a.graph.vertices().collect();
    order.sort_by_key(|&v| (a.depth_of(v), v));
    if order.first() != Some(&a.root) {
        order.retain(|&v| v != a.root);
        order.insert(0, a.root);
    }
    let parent: Vec<Option<VertexId>> = order
        .iter()
        .map(|&v| a.graph.neighbor_ids(v).filter(|&u| a.depth_of(u) + 1 == a.depth_of(v)).min())
        .collect();

    let mut map_ab: Vec<Option<VertexId>> = vec![None; n];
    let mut used = vec![false; n];
    let mut stack: Vec<(Vec<VertexId>, usize)> = Vec::with_capacity(n);
    let mut nodes = 0usize;

    let candidates = |k: usize, map_ab: &[Option<VertexId>], used: &[bool]| -> Vec<VertexId> {
        let v = order[k];
        let mut c: Vec<VertexId> = match parent[k] {
            None => vec![b.root],
            Some(p) => b.graph.neighbor_ids(map_ab[p.index()].unwrap()).filter(|c| !used[c.index()]).collect(),
        };
        c.retain(|x| cb[x.index()] == ca[v.index()]);
        c.sort_by(|x, y| keys[x.index()].cmp(&keys[y.index()]));
        c
    };

    stack.push((candidates(0, &map_ab, &used), 0));
    while !stack.is_empty() {
        let k = stack.len() - 1;
        let top = &mut stack[k];
        let v = order[k];
        if let Some(prev) = map_ab[v.index()].take() {
            used[prev.index()] = false;
        }
        let mut placed = false;
        while top.1 < top.0.len() {
            let c = top.0[top.1];
            top.1 += 1;
            nodes += 1;
            if nodes > budget {
                return Err(Error::Resource { what: "isomorphism search nodes".into(), needed: nodes, budget });
            }
            if used[c.index()] {
                continue;
            }
            let mut mapped_v = 0;
            let mut ok = true;
            for u in a.graph.neighbor_ids(v) {
                if let Some(x) = map_ab[u.index()] {
                    mapped_v += 1;
                    if !b.graph.has_edge(c, x) {
                        ok = false;
                        break;
                    }
                }
            }
            if ok && b.graph.neighbor_ids(c).filter(|x| used[x.index()]).count() == mapped_v {
                map_ab[v.index()] = Some(c);
                used[c.index()] = true;
                placed = true;
                break;
            }
        }
        if !placed {
            stack.pop();
            continue;
        }
        if k + 1 == n {
            let mapping = map_ab.into_iter().map(Option::unwrap).collect();
            return Ok(Some(RootedIsomorphism { mapping, source_root: a.root, target_root: b.root }));
        }
        stack.push((candidates(k + 1, &map_ab, &used), 0));
    }
    Ok(None)
}

/// `max |m_a − m_b∘φ|` and `|w_a − w_b∘φ|` over vertices and edges.
pub fn weight_deviation(a: &Ball, b: &Ball, phi: &RootedIsomorphism) -> f64 {
    let mut dev = 0.0f64;
    for v in a.graph.vertices() {
        dev = dev.max((a.graph.mass(v) - b.graph.mass(phi.map(v))).abs());
    }
    for e in a.graph.edges() {
        let w = b.graph.edge_weight(phi.map(e.u), phi.map(e.v)).copied().unwrap_or(f64::NAN);
        dev = dev.max((e.w - w).abs());
    }
    dev
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConvergenceVerdict {
    Converged,
    NotStabilized,
    WeightsDiverge,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceReport {
    pub radius: usize,
    pub indices: Vec<usize>,
    pub eps: f64,
    /// Least tested index from which every tested ball is root-isomorphic to the last one.
    pub stabilization_index: Option<usize>,
    pub isomorphic_to_last: BTreeMap<usize, bool>,
    /// Deviation to the last tested ball, for indices isomorphic to it.
    pub weight_sup_deviation: BTreeMap<usize, f64>,
    pub verdict: ConvergenceVerdict,
    pub caveat: &'static str,
}

impl ConvergenceReport {
    pub fn tail(&self) -> Vec<usize> {
        match self.stabilization_index {
            Some(s) => self.indices.iter().copied().filter(|&i| i >= s).collect(),
            None => Vec::new(),
        }
    }
}

fn check_indices(indices: &[usize]) -> Result<()> {
    if indices.is_empty() {
        return Err(Error::Domain("index list is empty".into()));
    }
    if indices.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Domain("indices must be strictly increasing".into()));
    }
    Ok(())
}

fn balls(seq: &RootedGeneratorSequence, indices: &[usize], radius: usize) -> Result<Vec<Arc<Ball>>> {
    indices.par_iter().map(|&i| seq.ball_at(i, radius)).collect()
}

/// Ball stabilization and weight convergence across the tested indices.
pub fn pgh_converges(seq: &RootedGeneratorSequence, indices: &[usize], radius: usize, eps: f64) -> Result<ConvergenceReport> {
    check_indices(indices)?;
    if !(eps > 0.0) {
        return Err(Error::Domain("eps must be positive".into()));
    }
    let bs = balls(seq, indices, radius)?;
    let last = bs.last().unwrap();
    let isos: Vec<Option<RootedIsomorphism>> = bs.par_iter().map(|b| rooted_isomorphism(b.as_ref(), last.as_ref())).collect::<Result<_>>()?;
    let mut stab = None;
    for (k, iso) in isos.iter().enumerate().rev() {
        if iso.is_none() {
            break;
        }
        stab = Some(indices[k]);
    }
    let isomorphic_to_last = indices.iter().zip(&isos).map(|(&i, x)| (i, x.is_some())).collect();
    let weight_sup_deviation: BTreeMap<usize, f64> = indices
        .iter()
        .zip(bs.iter().zip(&isos))
        .filter_map(|(&i, (b, iso))| iso.as_ref().map(|phi| (i, weight_deviation(b, last, phi))))
        .collect();
    let tail: Vec<usize> = indices.iter().copied().filter(|&i| stab.is_some_and(|s| i >= s)).collect();
    let verdict = if indices.len() > 1 && tail.len() < 2 {
        ConvergenceVerdict::NotStabilized
    } else if tail.iter().all(|i| weight_sup_deviation[i] < eps) {
        ConvergenceVerdict::Converged
    } else {
        ConvergenceVerdict::WeightsDiverge
    };
    Ok(ConvergenceReport {
        radius,
        indices: indices.to_vec(),
        eps,
        stabilization_index: stab,
        isomorphic_to_last,
        weight_sup_deviation,
        verdict,
        caveat: CAVEAT,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct LimitBall {
    #[serde(skip)]
    pub ball: Arc<Ball>,
    pub radius: usize,
    pub vertex_count: usize,
    pub edge_count: usize,
    pub depth_profile: Vec<usize>,
    /// Index whose weights represent the limit.
    pub representative_index: usize,
    /// Tail indices the limit is root-isomorphic to.
    pub provenance: Vec<usize>,
    /// The radius-`R` limit agrees with the restriction of the radius-`R+1` limit.
    pub consistent_with_next_radius: bool,
    pub convergence: ConvergenceReport,
}

/// Limit ball at radius `R` with the last tested index's weights.
pub fn pgh_limit(seq: &RootedGeneratorSequence, indices: &[usize], radius: usize, eps: f64) -> Result<LimitBall> {
    let conv = pgh_converges(seq, indices, radius, eps)?;
    if conv.verdict != ConvergenceVerdict::Converged {
        return Err(Error::Refused(format!("sequence is {:?} at radius {radius}; no limit extracted", conv.verdict)));
    }
    let last = *indices.last().unwrap();
    let ball = seq.ball_at(last, radius)?;
    let next = seq.ball_at(last, radius + 1)?.restrict(radius);
    let consistent = match rooted_isomorphism(&next, ball.as_ref())? {
        Some(phi) => weight_deviation(&next, &ball, &phi) == 0.0,
        None => false,
    };
    Ok(LimitBall {
        radius,
        vertex_count: ball.graph.vertex_count(),
        edge_count: ball.graph.edge_count(),
        depth_profile: ball.depth_profile(),
        representative_index: last,
        provenance: conv.tail(),
        consistent_with_next_radius: consistent,
        convergence: conv,
        ball,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct FunctionConvergenceReport {
    pub radius: usize,
    pub eps: f64,
    /// `max_{B_R(p_∞)} |u_i∘φ⁻¹ − u|` per index.
    pub deviations: BTreeMap<usize, f64>,
    /// Least tested index from which every deviation is below `eps`.
    pub converged_from: Option<usize>,
    pub converged: bool,
    pub caveat: &'static str,
}

/// Compare `u_i` on `B_R(p_i)` with `u` on the limit ball through rooted isomorphisms.
pub fn function_convergence(limit: &LimitBall, balls_and_functions: &[(usize, Arc<Ball>, Function)], u: &Function, eps: f64) -> Result<FunctionConvergenceReport> {
    let lim = &limit.ball;
    let mut deviations = BTreeMap::new();
    for (i, ball, ui) in balls_and_functions {
        let phi = rooted_isomorphism(ball.as_ref(), lim.as_ref())?
            .ok_or_else(|| Error::Refused(format!("ball at index {i} is not root-isomorphic to the limit ball")))?;
        let inv = phi.inverse();
        let mut dev = 0.0f64;
        for y in lim.graph.vertices() {
            let a = ui.get(inv.map(y)).map_err(|_| Error::Precondition(format!("u_{i} is undefined on part of B_R(p_{i})")))?;
            let b = u.get(y).map_err(|_| Error::Precondition("limit function is undefined on part of the limit ball".into()))?;
            dev = dev.max((a - b).abs());
        }
        deviations.insert(*i, dev);
    }
    let mut converged_from = None;
    for (&i, &d) in deviations.iter().rev() {
        if d >= eps {
            break;
        }
        converged_from = Some(i);
    }
    Ok(FunctionConvergenceReport { radius: limit.radius, eps, converged: converged_from.is_some(), deviations, converged_from, caveat: CAVEAT })
}

/// Function convergence along a sequence for functions given per index.
pub fn function_convergence_along(
    seq: &RootedGeneratorSequence,
    indices: &[usize],
    radius: usize,
    eps: f64,
    u_i: impl Fn(usize, &Ball) -> Result<Function> + Sync,
    u: impl Fn(&Ball) -> Result<Function>,
) -> Result<FunctionConvergenceReport> {
    let limit = pgh_limit(seq, indices, radius, eps)?;
    let bs = balls(seq, indices, radius)?;
    let items: Vec<(usize, Arc<Ball>, Function)> = indices
        .par_iter()
        .zip(bs.par_iter())
        .map(|(&i, b)| Ok((i, Arc::clone(b), u_i(i, b)?)))
        .collect::<Result<_>>()?;
    let uf = u(&limit.ball)?;
    function_convergence(&limit, &items, &uf, eps)
}

#[derive(Clone, Debug, Serialize)]
pub struct SemicontinuityReport {
    pub mode: CurvatureMode,
    pub radius: usize,
    pub tol: f64,
    /// Curvature at `p_i` (BE) or on the edge from `p_i` to the mapped limit neighbour (Ollivier).
    pub per_index: BTreeMap<usize, f64>,
    pub limit_curvature: f64,
    pub tail_min: f64,
    /// Curvature of the undecayed base graph at the last root, when weight schedules are present.
    pub base_curvature: Option<f64>,
    pub holds: bool,
    pub convergence: ConvergenceReport,
    pub caveat: &'static str,
}

fn curvature_at(ball: &Ball, x: VertexId, y: Option<VertexId>, mode: CurvatureMode) -> Result<f64> {
    match mode {
        CurvatureMode::BakryEmery => Ok(bakry_emery_curvature_in_ball(ball, x, f64::INFINITY)?.curvature),
        CurvatureMode::Ollivier => Ok(ollivier_curvature_in_ball(ball, x, y.unwrap())?.kappa),
    }
}

/// Check `K(limit) ≥ min over tail − tol` at the root.
pub fn curvature_semicontinuity_check(seq: &RootedGeneratorSequence, indices: &[usize], mode: CurvatureMode, eps: f64, tol: f64) -> Result<SemicontinuityReport> {
    let radius = match mode {
        CurvatureMode::BakryEmery => 2,
        CurvatureMode::Ollivier => 3,
    };
    let limit = pgh_limit(seq, indices, radius, eps).map_err(|e| match e {
        Error::Refused(m) => Error::Precondition(m),
        e => e,
    })?;
    let lim = &limit.ball;
    let y_lim = match mode {
        CurvatureMode::Ollivier => {
            Some(lim.graph.neighbor_ids(lim.root).min().ok_or_else(|| Error::Domain("root is isolated; no edge to evaluate".into()))?)
        }
        CurvatureMode::BakryEmery => None,
    };
    let tail = limit.provenance.clone();
    let per_index: BTreeMap<usize, f64> = tail
        .par_iter()
        .map(|&i| {
            let b = seq.ball_at(i, radius)?;
            let phi = rooted_isomorphism(b.as_ref(), lim.as_ref())?.ok_or_else(|| Error::Refused(format!("index {i} lost its isomorphism")))?;
            let inv = phi.inverse();
            Ok((i, curvature_at(&b, b.root, y_lim.map(|y| inv.map(y)), mode)?))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .collect();
    let limit_curvature = curvature_at(lim, lim.root, y_lim, mode)?;
    let tail_min = per_index.values().copied().fold(f64::INFINITY, f64::min);
    let base_curvature = if seq.decay_w.is_empty() && seq.decay_m.is_empty() {
        None
    } else {
        let b = seq.base().materialize_ball(&seq.root_at(*indices.last().unwrap())?, radius)?;
        let phi = rooted_isomorphism(b.as_ref(), lim.as_ref())?;
        match phi {
            Some(phi) => Some(curvature_at(&b, b.root, y_lim.map(|y| phi.inverse().map(y)), mode)?),
            None => None,
        }
    };
    Ok(SemicontinuityReport {
        mode,
        radius,
        tol,
        holds: limit_curvature >= tail_min - tol,
        per_index,
        limit_curvature,
        tail_min,
        base_curvature,
        convergence: limit.convergence,
        caveat: CAVEAT,
    })
}

/// Site labels of `B_R(p_∞)` keyed by limit-ball vertex, for display.
pub fn limit_labels(limit: &LimitBall) -> HashMap<VertexId, String> {
    limit.ball.graph.vertices().map(|v| (v, limit.ball.graph.label(v).to_string())).collect()
}
