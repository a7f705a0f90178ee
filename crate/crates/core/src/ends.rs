//! Ends with respect to a finite set, barrier functions and parabolicity.
//!
//! Ends are approximated by the components of `B_probe ∖ Ω` that reach the
//! probe sphere. An end `Π` is classified from the barrier `f_ρ`, the harmonic
//! function on `Π ∩ B_ρ` equal to 1 on `∂Π` and 0 on `Π ∩ S_ρ`: it is
//! non-parabolic when `f_ρ` stays below 1 at infinity.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::generators::GraphGenerator;
use crate::graph::{Label, VertexId, VertexSet};
use crate::harmonic::{check_schedule, dirichlet_solve, green_dirichlet, green_with_sources, site_of};
use crate::linalg::singular_values;
use crate::site::Site;
use crate::{Ball, Function};

pub const DEFAULT_MARGIN: f64 = 0.05;
pub const DEFAULT_STALL_EPS: f64 = 1e-3;
pub const DEFAULT_SCHEDULE: [usize; 5] = [4, 6, 8, 10, 12];
const SOLVE_TOL: f64 = 1e-8;

/// One end of the graph with respect to `Ω`, seen inside the probe ball.
#[derive(Clone, Debug, Serialize)]
pub struct End {
    pub omega: Vec<Site>,
    /// Smallest site of the component.
    pub representative: Site,
    /// Smallest site of the component adjacent to `Ω`; `None` when `Ω` is empty.
    pub anchor: Option<Site>,
    pub probe_radius: usize,
    #[serde(skip)]
    pub component_probe: BTreeSet<Site>,
    pub size_in_probe: usize,
    pub touches_probe_sphere: bool,
    /// Smallest-site vertices of the component at depths `probe/2`, `3·probe/4`, `probe − 1`.
    pub sentinels: Vec<Site>,
}

#[derive(Clone, Debug, Serialize)]
pub struct EndsReport {
    pub omega: Vec<Site>,
    pub probe_radius: usize,
    pub ends: Vec<End>,
    /// `true` when the count agrees with the count at `probe − 2`.
    pub stable: bool,
    pub count_at_smaller_probe: Option<usize>,
}

fn omega_ids(gen: &GraphGenerator, ball: &Ball, omega: &[Site], limit: usize) -> Result<VertexSet> {
    let mut out = VertexSet::new();
    for s in omega {
        let s = gen.validate_site(s)?;
        match ball.graph.id_of(&Label::Site(s.clone())) {
            Some(v) if ball.depth_of(v) < limit => {
                out.insert(v);
            }
            _ => return Err(Error::Precondition(format!("omega vertex {s} reaches the probe sphere S_{limit}; enlarge the probe"))),
        }
    }
    Ok(out)
}

fn raw_ends(gen: &GraphGenerator, omega: &[Site], probe: usize) -> Result<(Arc<Ball>, VertexSet, Vec<VertexSet>)> {
    let ball = gen.root_ball(probe)?;
    let om = omega_ids(gen, &ball, omega, probe)?;
    let rest: VertexSet = ball.graph.vertices().filter(|v| !om.contains(v)).collect();
    let comps = ball
        .graph
        .components_within(&rest)
        .into_iter()
        .filter(|c| c.iter().any(|&v| ball.depth_of(v) == probe))
        .collect();
    Ok((ball, om, comps))
}

fn canonical_omega(gen: &GraphGenerator, omega: &[Site]) -> Result<Vec<Site>> {
    let mut out = omega.iter().map(|s| gen.validate_site(s)).collect::<Result<Vec<_>>>()?;
    out.sort();
    out.dedup();
    Ok(out)
}

/// Ends of the generated graph with respect to `Ω`, within `B_probe(root)`.
pub fn ends_wrt(gen: &GraphGenerator, omega: &[Site], probe: usize) -> Result<EndsReport> {
    let omega = canonical_omega(gen, omega)?;
    let (ball, om, comps) = raw_ends(gen, &omega, probe)?;
    let depths = [probe / 2, 3 * probe / 4, probe.saturating_sub(1)];
    let ends = comps
        .iter()
        .map(|comp| {
            let sites: BTreeSet<Site> = comp.iter().map(|&v| site_of(&ball.graph, v)).collect();
            let anchor = comp
                .iter()
                .find(|&&v| ball.graph.neighbor_ids(v).any(|y| om.contains(&y)))
                .map(|&v| site_of(&ball.graph, v));
            let sentinels = depths
                .iter()
                .filter_map(|&d| comp.iter().find(|&&v| ball.depth_of(v) == d).map(|&v| site_of(&ball.graph, v)))
                .collect();
            End {
                omega: omega.clone(),
                representative: site_of(&ball.graph, *comp.iter().next().unwrap()),
                anchor,
                probe_radius: probe,
                size_in_probe: sites.len(),
                component_probe: sites,
                touches_probe_sphere: true,
                sentinels,
            }
        })
        .collect::<Vec<_>>();
    let count_at_smaller_probe = if probe >= 2 {
        match raw_ends(gen, &omega, probe - 2) {
            Ok((_, _, c)) => Some(c.len()),
            Err(Error::Precondition(_)) => None,
            Err(e) => return Err(e),
        }
    } else {
        None
    };
    Ok(EndsReport { stable: count_at_smaller_probe == Some(ends.len()), omega, probe_radius: probe, ends, count_at_smaller_probe })
}

/// Barrier `f_ρ` on the closure of `Π ∩ B_ρ`, extended by zero to the rest of `Π`.
#[derive(Clone, Debug)]
pub struct Barrier {
    pub rho: usize,
    pub ball: Arc<Ball>,
    /// `Π ∩ B_ρ` in ball ids.
    pub domain: VertexSet,
    pub values: Function,
    pub residual: f64,
}

impl Barrier {
    pub fn at(&self, s: &Site) -> f64 {
        self.ball.graph.id_of(&Label::Site(s.clone())).and_then(|v| self.values.value(v).copied()).unwrap_or(0.0)
    }

    pub fn labeled(&self) -> BTreeMap<String, f64> {
        self.values.labeled(&self.ball.graph)
    }
}

/// The component of `B_{ρ+2} ∖ Ω` through `anchor`, and its intersection with `B_ρ`.
fn end_in_ball(gen: &GraphGenerator, omega: &[Site], anchor: &Site, radius: usize) -> Result<(Arc<Ball>, VertexSet, VertexSet)> {
    let ball = gen.root_ball(radius + 2)?;
    let om = omega_ids(gen, &ball, omega, radius + 2)?;
    let a = ball.graph.id_of(&Label::Site(anchor.clone())).ok_or_else(|| Error::Domain(format!("anchor {anchor} is outside the ball")))?;
    let rest: VertexSet = ball.graph.vertices().filter(|v| !om.contains(v)).collect();
    let comp = ball.graph.components_within(&rest).into_iter().find(|c| c.contains(&a)).unwrap();
    let pi: VertexSet = comp.into_iter().filter(|&v| ball.depth_of(v) <= radius).collect();
    Ok((ball, om, pi))
}

/// Solve `Δf_ρ = 0` on `Π ∩ B_{ρ−1}`, `f_ρ = 1` on `∂Π`, `f_ρ = 0` on `Π ∩ S_ρ`.
pub fn barrier(gen: &GraphGenerator, end: &End, rho: usize) -> Result<Barrier> {
    let anchor = end.anchor.as_ref().ok_or_else(|| Error::Domain("barrier needs a non-empty Ω".into()))?;
    let (ball, om, pi) = end_in_ball(gen, &end.omega, anchor, rho)?;
    if pi.is_empty() {
        return Err(Error::Domain(format!("Π ∩ B_{rho} is empty")));
    }
    let interior: VertexSet = pi.iter().copied().filter(|&v| ball.depth_of(v) < rho).collect();
    let mut data: BTreeMap<VertexId, f64> = pi.iter().copied().filter(|&v| ball.depth_of(v) == rho).map(|v| (v, 0.0)).collect();
    for v in ball.graph.exterior_boundary(&pi) {
        if om.contains(&v) {
            data.insert(v, 1.0);
        }
    }
    if interior.is_empty() {
        let mut values = Function::undefined(ball.graph.vertex_count());
        for (&v, &b) in &data {
            values.set(v, b);
        }
        return Ok(Barrier { rho, ball, domain: pi, values, residual: 0.0 });
    }
    let sol = dirichlet_solve(&ball.graph, &interior, &data, SOLVE_TOL)?;
    Ok(Barrier { rho, ball, domain: pi, values: sol.values, residual: sol.residual })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Parabolic,
    NonParabolic,
    Inconclusive,
}

#[derive(Clone, Debug, Serialize)]
pub struct TraceRow {
    pub rho: usize,
    pub sentinel: String,
    pub value: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct EndClassification {
    pub end: End,
    pub verdict: Verdict,
    /// Long-format `(ρ, sentinel, f_ρ(sentinel))`; the anchor comes first in each ρ block.
    pub barrier_trace: Vec<TraceRow>,
    /// Extrapolated `lim f_ρ(anchor)`.
    pub limit_estimate: Option<f64>,
    pub limit_history: Vec<f64>,
    /// `f_ρ` non-decreasing in `ρ` at every sentinel.
    pub monotone: bool,
    /// `max Γ_ρ(x, anchor)/f_ρ(x)` over `Π ∩ B_{ρ−1}` at the last `ρ`, for non-parabolic ends.
    pub domination_ratio: Option<f64>,
    pub margin: f64,
    pub stall_eps: f64,
    pub stopped: Option<String>,
}

/// Largest depth of a vertex of `Ω`.
fn omega_radius(gen: &GraphGenerator, omega: &[Site]) -> Result<usize> {
    if omega.is_empty() {
        return Ok(0);
    }
    let mut r = 0;
    loop {
        let ball = gen.root_ball(r)?;
        if omega.iter().all(|s| ball.graph.id_of(&Label::Site(s.clone())).is_some()) {
            return Ok(r);
        }
        r += 1;
    }
}

/// Richardson extrapolation under `f ≈ L − c/ρ`, clamped to `[f_k, 1]`.
fn extrapolate(r0: f64, f0: f64, r1: f64, f1: f64) -> f64 {
    ((r1 * f1 - r0 * f0) / (r1 - r0)).clamp(f1, 1.0)
}

/// Classify an end from its barrier trace over a schedule of radii.
pub fn classify_end(gen: &GraphGenerator, end: &End, schedule: &[usize], margin: f64, stall_eps: f64) -> Result<EndClassification> {
    check_schedule(schedule)?;
    let anchor = end.anchor.clone().ok_or_else(|| Error::Domain("classification needs a non-empty Ω".into()))?;
    let r_omega = omega_radius(gen, &end.omega)?;
    let mut sentinels = vec![anchor.clone()];
    sentinels.extend(end.sentinels.iter().cloned());
    let mut trace = Vec::new();
    let mut primary: Vec<(usize, f64)> = Vec::new();
    let mut stopped = None;
    let mut last_barrier = None;
    for &rho in schedule {
        let b = match barrier(gen, end, rho) {
            Ok(b) => b,
            Err(e @ Error::Resource { .. }) => {
                stopped = Some(e.to_string());
                break;
            }
            Err(e) => return Err(e),
        };
        for s in &sentinels {
            trace.push(TraceRow { rho, sentinel: s.to_string(), value: b.at(s) });
        }
        primary.push((rho, b.at(&anchor)));
        last_barrier = Some(b);
    }
    let k = sentinels.len();
    let monotone = (k..trace.len()).all(|i| trace[i].value >= trace[i - k].value - 1e-9);
    let eff = |rho: usize| rho.saturating_sub(r_omega) as f64;
    let limit_history: Vec<f64> =
        primary.windows(2).map(|w| extrapolate(eff(w[0].0), w[0].1, eff(w[1].0), w[1].1)).collect();
    let limit_estimate = limit_history.last().copied();
    let converged = limit_history.len() >= 2 && {
        let n = limit_history.len();
        (limit_history[n - 1] - limit_history[n - 2]).abs() < stall_eps
    };
    let verdict = match limit_estimate {
        _ if primary.len() < 3 => Verdict::Inconclusive,
        Some(l) if converged && l <= 1.0 - margin => Verdict::NonParabolic,
        Some(l) if l >= 1.0 - margin && primary.windows(2).all(|w| w[1].1 >= w[0].1 - 1e-12) => Verdict::Parabolic,
        _ => Verdict::Inconclusive,
    };
    let domination_ratio = match (&last_barrier, verdict) {
        (Some(b), Verdict::NonParabolic) => Some(domination(b, &anchor)?),
        _ => None,
    };
    Ok(EndClassification {
        end: end.clone(),
        verdict,
        barrier_trace: trace,
        limit_estimate,
        limit_history,
        monotone,
        domination_ratio,
        margin,
        stall_eps,
        stopped,
    })
}

fn domination(b: &Barrier, anchor: &Site) -> Result<f64> {
    let g = &b.ball.graph;
    let a = g.id_of(&Label::Site(anchor.clone())).unwrap();
    let green = green_dirichlet(g, b.ball.root, b.rho.saturating_sub(1), a, SOLVE_TOL)?;
    let mut ratio = 0.0f64;
    for &v in &b.domain {
        if b.ball.depth_of(v) < b.rho {
            if let (Some(&gv), Some(&fv)) = (green.values.value(v), b.values.value(v)) {
                if fv > 0.0 {
                    ratio = ratio.max(gv / fv);
                }
            }
        }
    }
    Ok(ratio)
}

/// How the probe radius is chosen for each set of an exhaustion.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeRule {
    Fixed(usize),
    /// `r_Ω + offset`.
    Offset(usize),
}

#[derive(Clone, Debug, Serialize)]
pub struct EndCountRow {
    pub omega_size: usize,
    pub omega_radius: usize,
    pub probe_radius: usize,
    pub n: usize,
    pub n_nonparabolic: usize,
    pub n_parabolic: usize,
    pub n_inconclusive: usize,
    pub stable: bool,
    pub classifications: Vec<EndClassification>,
}

#[derive(Clone, Debug, Serialize)]
pub struct EndCountReport {
    pub rows: Vec<EndCountRow>,
    /// `N_{Ω₁} ≤ N_{Ω₂}` along the exhaustion.
    pub monotone: bool,
    pub n: Option<usize>,
    pub n0: Option<usize>,
    pub nprime: Option<usize>,
    /// Some classification along the exhaustion was inconclusive.
    pub has_inconclusive: bool,
}

/// End counts along an exhaustion `Ω₁ ⊆ Ω₂ ⊆ …`, with every end classified.
pub fn count_ends(gen: &GraphGenerator, exhaustion: &[Vec<Site>], probe_rule: ProbeRule, schedule: &[usize], margin: f64, stall_eps: f64) -> Result<EndCountReport> {
    if exhaustion.is_empty() {
        return Err(Error::Domain("exhaustion is empty".into()));
    }
    let mut rows = Vec::new();
    let mut prev: Option<BTreeSet<Site>> = None;
    for omega in exhaustion {
        let omega = canonical_omega(gen, omega)?;
        let set: BTreeSet<Site> = omega.iter().cloned().collect();
        if let Some(p) = &prev {
            if !p.is_subset(&set) {
                return Err(Error::Domain("exhaustion must be increasing".into()));
            }
        }
        prev = Some(set);
        let r_omega = omega_radius(gen, &omega)?;
        let probe = match probe_rule {
            ProbeRule::Fixed(p) => p,
            ProbeRule::Offset(o) => r_omega + o,
        };
        let report = ends_wrt(gen, &omega, probe)?;
        let classifications: Vec<EndClassification> = if omega.is_empty() {
            Vec::new()
        } else {
            report.ends.par_iter().map(|e| classify_end(gen, e, schedule, margin, stall_eps)).collect::<Result<_>>()?
        };
        let count = |v: Verdict| classifications.iter().filter(|c| c.verdict == v).count();
        rows.push(EndCountRow {
            omega_size: omega.len(),
            omega_radius: r_omega,
            probe_radius: probe,
            n: report.ends.len(),
            n_nonparabolic: count(Verdict::NonParabolic),
            n_parabolic: count(Verdict::Parabolic),
            n_inconclusive: count(Verdict::Inconclusive),
            stable: report.stable,
            classifications,
        });
    }
    let monotone = rows.windows(2).all(|w| w[0].n <= w[1].n);
    let has_inconclusive = rows.iter().any(|r| r.n_inconclusive > 0);
    let last = rows.last().unwrap();
    let settled = last.stable && last.n_inconclusive == 0 && last.omega_size > 0;
    Ok(EndCountReport {
        n: last.stable.then_some(last.n),
        n0: settled.then_some(last.n_nonparabolic),
        nprime: settled.then_some(last.n_parabolic),
        monotone,
        has_inconclusive,
        rows,
    })
}

/// Bounded harmonic approximants separating the non-parabolic ends.
#[derive(Clone, Debug, Serialize)]
pub struct EndSeparatingBasis {
    pub omega: Vec<Site>,
    pub rho_green: usize,
    /// Anchors of the ends that received a function, in order.
    pub ends: Vec<Site>,
    pub verdicts: Vec<Verdict>,
    /// One sentinel per non-parabolic end at depth `probe − 2`.
    pub sentinels: Vec<Site>,
    /// `gram_matrix[i][j] = h_i(sentinel_j)`.
    pub gram_matrix: Vec<Vec<f64>>,
    pub singular_values: Vec<f64>,
    pub rank: usize,
    /// `‖h_i‖_∞` on the ball.
    pub sup_norms: Vec<f64>,
    /// `‖h_i − g_i‖_∞`, the Green correction.
    pub corrections: Vec<f64>,
    /// Values of `h_i` at the anchors, for reports.
    #[serde(skip)]
    pub functions: Vec<Function>,
    #[serde(skip)]
    pub ball: Option<Arc<Ball>>,
    /// `true` when the basis degenerates to constants.
    pub constants: bool,
}

/// Build `h_i = g_i + Σ_x Δg_i(x)·m(x)·Γ_ρ(·,x)` for each non-parabolic end `Π_i`, with
/// `g_i = 1` on the closure of `Π_i`.
pub fn separating_harmonics(gen: &GraphGenerator, omega: &[Site], probe: usize, rho_green: usize) -> Result<EndSeparatingBasis> {
    let omega = canonical_omega(gen, omega)?;
    if omega.is_empty() {
        return Err(Error::Refused("Ω = ∅ gives a single end, the whole graph; the basis degenerates to constants".into()));
    }
    if probe < 2 || probe - 2 > rho_green {
        return Err(Error::Domain(format!("sentinel depth {} must not exceed the Green radius {rho_green}", probe.saturating_sub(2))));
    }
    let report = ends_wrt(gen, &omega, probe)?;
    let classes: Vec<EndClassification> = report
        .ends
        .par_iter()
        .map(|e| classify_end(gen, e, &DEFAULT_SCHEDULE, DEFAULT_MARGIN, DEFAULT_STALL_EPS))
        .collect::<Result<_>>()?;
    let nonpar: Vec<&End> = classes.iter().filter(|c| c.verdict == Verdict::NonParabolic).map(|c| &c.end).collect();
    let verdicts: Vec<Verdict> = classes.iter().map(|c| c.verdict).collect();
    if nonpar.is_empty() {
        return Err(Error::Refused("no end is non-parabolic; bounded harmonic functions reduce to constants".into()));
    }
    let ball = gen.root_ball(rho_green + 2)?;
    let g = &ball.graph;
    let om = omega_ids(gen, &ball, &omega, rho_green + 2)?;
    let rest: VertexSet = g.vertices().filter(|v| !om.contains(v)).collect();
    let comps = g.components_within(&rest);
    let id = |s: &Site| g.id_of(&Label::Site(s.clone())).unwrap();
    let sentinels: Vec<Site> = nonpar
        .iter()
        .map(|e| {
            e.component_probe
                .iter()
                .find(|s| ball.depth_of(id(s)) == probe - 2)
                .cloned()
                .ok_or_else(|| Error::Precondition(format!("end through {} has no vertex at depth {}", e.representative, probe - 2)))
        })
        .collect::<Result<_>>()?;
    if nonpar.len() == 1 {
        let ones = Function::constant(g.vertex_count(), 1.0);
        return Ok(EndSeparatingBasis {
            omega,
            rho_green,
            ends: vec![nonpar[0].anchor.clone().unwrap()],
            verdicts,
            sentinels,
            gram_matrix: vec![vec![1.0]],
            singular_values: vec![1.0],
            rank: 1,
            sup_norms: vec![1.0],
            corrections: vec![0.0],
            functions: vec![ones],
            ball: Some(Arc::clone(&ball)),
            constants: true,
        });
    }
    let built: Vec<(Function, f64, f64)> = nonpar
        .par_iter()
        .map(|e| {
            let a = id(e.anchor.as_ref().unwrap());
            let comp = comps.iter().find(|c| c.contains(&a)).unwrap();
            let closure = g.closure(comp);
            let gi = Function::from_fn(g, |v| if closure.contains(&v) { 1.0 } else { 0.0 });
            let support: Vec<VertexId> = g.local_ball(ball.root, omega_radius(gen, &omega)? + 1)?.into_iter().map(|(v, _)| v).collect();
            let mut sources: Vec<(VertexId, f64)> = Vec::new();
            for v in support {
                let lap = g.laplacian(&gi, v)?;
                if lap != 0.0 {
                    sources.push((v, lap * g.mass(v)));
                }
            }
            let (corr, _) = green_with_sources(g, ball.root, rho_green, &sources, SOLVE_TOL)?;
            let mut h = Function::undefined(g.vertex_count());
            let mut sup = 0.0f64;
            let mut sup_corr = 0.0f64;
            for (v, &c) in corr.iter() {
                let val = gi.get(v)? + c;
                sup = sup.max(val.abs());
                sup_corr = sup_corr.max(c.abs());
                h.set(v, val);
            }
            Ok((h, sup, sup_corr))
        })
        .collect::<Result<_>>()?;
    let n = built.len();
    let gram: Vec<Vec<f64>> = built.iter().map(|(h, _, _)| sentinels.iter().map(|s| *h.get(id(s)).unwrap()).collect()).collect();
    let sv = singular_values(&DMatrix::from_fn(n, n, |i, j| gram[i][j]));
    Ok(EndSeparatingBasis {
        omega,
        rho_green,
        ends: nonpar.iter().map(|e| e.anchor.clone().unwrap()).collect(),
        verdicts,
        sentinels,
        rank: sv.iter().filter(|&&s| s > 0.5).count(),
        gram_matrix: gram,
        singular_values: sv,
        sup_norms: built.iter().map(|b| b.1).collect(),
        corrections: built.iter().map(|b| b.2).collect(),
        functions: built.into_iter().map(|b| b.0).collect(),
        ball: Some(ball.clone()),
        constants: false,
    })
}

/// Site-keyed view of a function on a generated ball.
pub fn sites_of(ball: &Ball, f: &Function) -> HashMap<Site, f64> {
    f.iter().map(|(v, &x)| (site_of(&ball.graph, v), x)).collect()
}
