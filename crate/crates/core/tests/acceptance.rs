//! Acceptance suite: one line per criterion, non-zero exit if any fails.

mod common;

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use common::{be_oracle, hop_distances, ollivier_enumeration, random_graph};
use curvgraph::corpus::{decaying_sequence, glued_lattice, marching_sequence, run_corpus, small_graphs};
use curvgraph::curvature::{bakry_emery_curvature, cd_check, curvature_outside, ollivier_curvature, ollivier_curvature_in_ball, CurvatureMode};
use curvgraph::ends::{classify_end, ends_wrt, separating_harmonics, Verdict, DEFAULT_MARGIN, DEFAULT_SCHEDULE, DEFAULT_STALL_EPS};
use curvgraph::generators::{GraphGenerator, RootedGeneratorSequence};
use curvgraph::gh::{curvature_semicontinuity_check, pgh_converges, pgh_limit, rooted_isomorphism, weight_deviation, ConvergenceVerdict};
use curvgraph::harmonic::{dimension_certificate, dirichlet_solve, gradient_max_principle_check, green_dirichlet};
use curvgraph::{Function, Graph, Label, Result, Site, VertexId, VertexSet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Result<Outcome> {
    Ok(Outcome { pass, detail: detail.into() })
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

fn ollivier_oracle() -> Result<Outcome> {
    let mut worst = 0.0f64;
    let mut edges = 0;
    let mut pinned = BTreeMap::new();
    for (name, g) in small_graphs() {
        for e in g.edges() {
            let lp = ollivier_curvature(&g, e.u, e.v)?.kappa;
            worst = worst.max((lp - ollivier_enumeration(&g, e.u.index(), e.v.index())).abs());
            edges += 1;
            pinned.entry(name).or_insert(lp);
        }
    }
    let z = GraphGenerator::lattice(1).root_ball(3)?;
    let y = z.graph.neighbor_ids(z.root).next().unwrap();
    let kz = ollivier_curvature_in_ball(&z, z.root, y)?.kappa;
    let pins = close(pinned["edge"], 2.0, 1e-9) && close(pinned["c3"], 3.0, 1e-9) && close(pinned["c4"], 2.0, 1e-9) && close(kz, 0.0, 1e-9);
    outcome(
        worst <= 1e-9 && pins,
        format!("{edges} edges, max |LP - enumeration| = {worst:e}; edge {}, K3 {}, C4 {}, Z {kz}", pinned["edge"], pinned["c3"], pinned["c4"]),
    )
}

fn bakry_emery() -> Result<Outcome> {
    let edge = Graph::unit(2, &[(0, 1)])?;
    let k_edge = bakry_emery_curvature(&edge, VertexId(0), f64::INFINITY)?.curvature;
    let mut worst = 0.0f64;
    let mut monotone = true;
    for seed in 0..50u64 {
        let n = 2 + (seed as usize % 11);
        let g = random_graph(1000 + seed, n, 0.3, 0.5, 2.0, true);
        let x = VertexId((seed as usize % n) as u32);
        let k = bakry_emery_curvature(&g, x, f64::INFINITY)?.curvature;
        worst = worst.max((k - be_oracle(&g, x.index(), f64::INFINITY)).abs());
        let mut seen_false = false;
        for step in -8..=8 {
            let ok = cd_check(&g, x, k + 0.25 * step as f64, f64::INFINITY)?;
            if ok && seen_false {
                monotone = false;
            }
            seen_false |= !ok;
        }
    }
    outcome(
        close(k_edge, 2.0, 1e-8) && worst <= 1e-6 && monotone,
        format!("single edge K = {k_edge}; 50 random graphs, max |bisection - oracle| = {worst:e}; cd_check monotone: {monotone}"),
    )
}

fn curvature_outside_glue() -> Result<Outcome> {
    let gen = glued_lattice(2, 2);
    let glue = gen.root();
    let ball = gen.root_ball(4)?;
    let glue_min = ball
        .graph
        .neighbor_ids(ball.root)
        .map(|y| ollivier_curvature(&ball.graph, ball.root, y).map(|r| r.kappa))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    let rep = curvature_outside(&gen, &[glue], CurvatureMode::Ollivier, 4, 1e-9)?;
    outcome(
        glue_min < 0.0 && rep.pass,
        format!("min glue-edge kappa = {glue_min}; {} edges outside the glue, min kappa = {:?}", rep.checked, rep.min_value),
    )
}

fn harmonic_solver() -> Result<Outcome> {
    let n = 11;
    let path = Graph::unit(n, &(0..n - 1).map(|i| (i, i + 1)).collect::<Vec<_>>())?;
    let interior: VertexSet = (1..n - 1).map(|i| VertexId(i as u32)).collect();
    let data = BTreeMap::from([(VertexId(0), 0.0), (VertexId(n as u32 - 1), 1.0)]);
    let sol = dirichlet_solve(&path, &interior, &data, 1e-10)?;
    let path_err = (0..n).map(|i| (sol.values.get(VertexId(i as u32)).unwrap() - i as f64 / (n - 1) as f64).abs()).fold(0.0, f64::max);

    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut max_ok = true;
    for trial in 0..200u64 {
        let n = rng.gen_range(3..14);
        let g = random_graph(5000 + trial, n, 0.3, 0.5, 2.0, true);
        let mut interior = VertexSet::new();
        let mut data = BTreeMap::new();
        for v in g.vertices() {
            if v.index() > 0 && rng.gen_bool(0.6) {
                interior.insert(v);
            } else {
                data.insert(v, rng.gen_range(-5.0..5.0));
            }
        }
        let (lo, hi) = data.values().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x: &f64| (a.min(x), b.max(x)));
        let u = dirichlet_solve(&g, &interior, &data, 1e-8)?.values;
        max_ok &= g.vertices().all(|v| (lo..=hi).contains(u.get(v).unwrap()));
    }

    let mut sym = 0.0f64;
    let mut sym_trials = 0;
    for seed in 0..60u64 {
        let g = random_graph(7000 + seed, 10, 0.1, 0.5, 2.0, true);
        let d0 = &hop_distances(&g)[0];
        let rho = d0.iter().copied().max().unwrap() - 1;
        let inner: Vec<usize> = (1..10).filter(|&i| d0[i] <= rho).collect();
        if rho == 0 || inner.len() < 2 {
            continue;
        }
        sym_trials += 1;
        let (a, b) = (VertexId(inner[0] as u32), VertexId(*inner.last().unwrap() as u32));
        let ga = green_dirichlet(&g, VertexId(0), rho, a, 1e-12)?;
        let gb = green_dirichlet(&g, VertexId(0), rho, b, 1e-12)?;
        sym = sym.max((ga.values.value(b).copied().unwrap_or(0.0) - gb.values.value(a).copied().unwrap_or(0.0)).abs());
    }
    let z2 = GraphGenerator::lattice(2).root_ball(6)?;
    let (a, b) = (z2.graph.id_of(&Label::Site(Site::Lattice(vec![1, 0]))).unwrap(), z2.graph.id_of(&Label::Site(Site::Lattice(vec![-2, 3]))).unwrap());
    let ga = green_dirichlet(&z2.graph, z2.root, 5, a, 1e-12)?;
    let gb = green_dirichlet(&z2.graph, z2.root, 5, b, 1e-12)?;
    let literal = (z2.graph.mass(b) * ga.values.get(b)? - z2.graph.mass(a) * gb.values.get(a)?).abs();
    sym = sym.max(literal);

    let mut mono_worst = 0.0f64;
    for d in [2, 3] {
        let ball = GraphGenerator::lattice(d).root_ball(14)?;
        let mut prev: Option<Function> = None;
        for rho in 1..=12 {
            let g = green_dirichlet(&ball.graph, ball.root, rho, ball.root, 1e-12)?.values;
            if let Some(p) = &prev {
                for (v, &x) in p.iter() {
                    mono_worst = mono_worst.max(x - g.value(v).copied().unwrap_or(0.0));
                }
            }
            prev = Some(g);
        }
    }
    outcome(
        path_err <= 1e-12 && max_ok && sym_trials >= 10 && sym <= 1e-10 && mono_worst <= 1e-9,
        format!("path error {path_err:e}; max principle on 200 problems: {max_ok}; Green symmetry defect {sym:e} over {sym_trials} random graphs; monotonicity defect {mono_worst:e}"),
    )
}

fn gradient_max_principle() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst = 0.0f64;
    let mut all = true;
    let mut curvature_ok = true;
    for trial in 0..50 {
        let d = if trial % 2 == 0 { 2 } else { 3 };
        let outer = rng.gen_range(4..=6);
        let inner = rng.gen_range(1..=2);
        let ball = GraphGenerator::lattice(d).root_ball(outer + 4)?;
        let w: VertexSet = ball.graph.vertices().filter(|&v| (inner..=outer).contains(&ball.depth_of(v))).collect();
        let delta = ball.graph.interior_boundary(&w);
        let interior: VertexSet = w.difference(&delta).copied().collect();
        let data: BTreeMap<VertexId, f64> = delta.iter().map(|&v| (v, rng.gen_range(-1.0..1.0))).collect();
        let sol = dirichlet_solve(&ball.graph, &interior, &data, 1e-10)?;
        let mut u = Function::undefined(ball.graph.vertex_count());
        for &v in &w {
            u.set(v, *sol.values.get(v)?);
        }
        let rep = gradient_max_principle_check(&ball.graph, &w, &u, 1e-9)?;
        curvature_ok &= rep.curvature_precondition;
        all &= rep.holds;
        let a = rep.max_interior_pair.map_or(0.0, |p| p.value);
        let b = rep.max_boundary_pair.map_or(0.0, |p| p.value);
        worst = worst.max((a - b).abs());
    }
    outcome(all && curvature_ok, format!("50 annuli; interior curvature verified: {curvature_ok}; max |interior max - boundary max| = {worst:e}"))
}

fn ends_and_parabolicity() -> Result<Outcome> {
    let z = GraphGenerator::lattice(1);
    let rep = ends_wrt(&z, &[z.root()], 10)?;
    let mut z_ok = rep.ends.len() == 2;
    let mut fit = 0.0f64;
    for end in &rep.ends {
        let c = classify_end(&z, end, &[5, 10, 20], DEFAULT_MARGIN, DEFAULT_STALL_EPS)?;
        z_ok &= c.verdict == Verdict::Parabolic;
        let anchor = end.anchor.as_ref().unwrap().to_string();
        for row in c.barrier_trace.iter().filter(|r| r.sentinel == anchor) {
            fit = fit.max((row.value - (1.0 - 1.0 / row.rho as f64)).abs());
        }
    }
    z_ok &= fit <= 1e-10;

    let z3 = GraphGenerator::lattice(3);
    let rep3 = ends_wrt(&z3, &[z3.root()], 10)?;
    let c3 = classify_end(&z3, &rep3.ends[0], &DEFAULT_SCHEDULE, DEFAULT_MARGIN, DEFAULT_STALL_EPS)?;
    let last = c3.barrier_trace.iter().filter(|r| r.rho == 12).map(|r| r.value).next().unwrap_or(1.0);
    let limit = c3.limit_estimate.unwrap_or(1.0);
    let z3_ok = rep3.ends.len() == 1 && c3.verdict == Verdict::NonParabolic && last < 0.95 && limit < 0.95;

    let glued = glued_lattice(3, 2);
    let repg = ends_wrt(&glued, &[glued.root()], 10)?;
    let gv = repg.ends.iter().map(|e| classify_end(&glued, e, &DEFAULT_SCHEDULE, DEFAULT_MARGIN, DEFAULT_STALL_EPS).map(|c| c.verdict)).collect::<Result<Vec<_>>>()?;
    let glued_ok = gv.len() == 2 && gv.iter().all(|&v| v == Verdict::NonParabolic);

    let z2 = GraphGenerator::lattice(2);
    let rep2 = ends_wrt(&z2, &[z2.root()], 10)?;
    let c2 = classify_end(&z2, &rep2.ends[0], &DEFAULT_SCHEDULE, DEFAULT_MARGIN, DEFAULT_STALL_EPS)?;
    let z2_ok = c2.verdict != Verdict::NonParabolic;

    outcome(
        z_ok && z3_ok && glued_ok && z2_ok,
        format!(
            "Z: {} ends, fit error {fit:e}; Z3: {:?}, f_12 = {last:.4}, limit {limit:.4}; glued Z3: {gv:?}; Z2: {:?}",
            rep.ends.len(),
            c3.verdict,
            c2.verdict
        ),
    )
}

fn theorem_chain() -> Result<Outcome> {
    let gen = glued_lattice(3, 2);
    let glue = gen.root();
    let basis = separating_harmonics(&gen, std::slice::from_ref(&glue), 10, 12)?;
    let n0 = basis.verdicts.iter().filter(|&&v| v == Verdict::NonParabolic).count();
    let gram_dev = basis
        .gram_matrix
        .iter()
        .enumerate()
        .flat_map(|(i, row)| row.iter().enumerate().map(move |(j, &x)| (x - if i == j { 1.0 } else { 0.0 }).abs()))
        .fold(0.0, f64::max);
    let cert = dimension_certificate(&gen, &glue, 1, CurvatureMode::Ollivier, 4, None, None)?;
    let refused = dimension_certificate(&gen, &glue, 1, CurvatureMode::Ollivier, 4, Some(&[]), None)?;
    let chain = n0 == 2 && basis.rank == 2 && basis.rank <= cert.sphere_count && cert.certified;
    outcome(
        chain && gram_dev <= 0.15 && !refused.certified,
        format!(
            "N0 = {n0} <= rank {} <= #S2 = {} (certified {}); Gram deviation {gram_dev:.4}; empty-omega certificate refused: {}",
            basis.rank, cert.sphere_count, cert.certified, !refused.certified
        ),
    )
}

fn pgh_machinery() -> Result<Outcome> {
    let constant = RootedGeneratorSequence::constant(GraphGenerator::lattice(2));
    let c = pgh_converges(&constant, &[1, 2, 3, 4], 3, 1e-9)?;
    let const_ok = c.verdict == ConvergenceVerdict::Converged && c.weight_sup_deviation.values().all(|&d| d == 0.0);

    let march = marching_sequence();
    let idx: Vec<usize> = (4..=12).collect();
    let lim = pgh_limit(&march, &idx, 3, 1e-9)?;
    let z2 = GraphGenerator::lattice(2).root_ball(3)?;
    let march_ok = match rooted_isomorphism(lim.ball.as_ref(), z2.as_ref())? {
        Some(phi) => weight_deviation(&lim.ball, &z2, &phi) == 0.0 && lim.consistent_with_next_radius,
        None => false,
    };

    let decay = decaying_sequence();
    let long: Vec<usize> = (1..=10).map(|k| 1000 * k).collect();
    let mut semis = Vec::new();
    for (seq, ix, eps) in [(&constant, vec![1, 2, 3], 1e-9), (&march, idx.clone(), 1e-9), (&decay, long, 1e-3)] {
        for mode in [CurvatureMode::BakryEmery, CurvatureMode::Ollivier] {
            let s = curvature_semicontinuity_check(seq, &ix, mode, eps, 1e-6)?;
            semis.push(s.holds);
        }
    }
    let semi_ok = semis.iter().all(|&h| h);
    outcome(
        const_ok && march_ok && semi_ok,
        format!("constant sequence converged with zero deviation: {const_ok}; marching limit is the Z2 ball: {march_ok}; semicontinuity {}/{} sequences", semis.iter().filter(|&&h| h).count(), semis.len()),
    )
}

fn tree_bytes(dir: &std::path::Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push((p.strip_prefix(dir).unwrap().display().to_string(), std::fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

fn determinism() -> Result<Outcome> {
    let dir = tempfile::tempdir()?;
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    run_corpus(&a)?;
    run_corpus(&b)?;
    let (ta, tb) = (tree_bytes(&a), tree_bytes(&b));
    outcome(!ta.is_empty() && ta == tb, format!("{} files, identical: {}", ta.len(), ta == tb))
}

type Check = fn() -> Result<Outcome>;

fn main() {
    let criteria: [(&str, Check, u64); 9] = [
        ("ollivier oracle equivalence", ollivier_oracle, 10),
        ("bakry-emery bisection vs oracle", bakry_emery, 30),
        ("curvature outside the glue vertex", curvature_outside_glue, 60),
        ("harmonic solver", harmonic_solver, 60),
        ("gradient maximum principle", gradient_max_principle, 300),
        ("ends and parabolicity", ends_and_parabolicity, 300),
        ("ends, basis rank and dimension bound", theorem_chain, 300),
        ("pointed convergence machinery", pgh_machinery, 120),
        ("corpus determinism", determinism, 600),
    ];
    let mut failed = 0;
    for (k, (name, check, limit)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        let in_time = elapsed <= Duration::from_secs(*limit);
        let (pass, detail) = match result {
            Ok(o) => (o.pass && in_time, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failed += 1;
        }
        println!(
            "criterion {} [{name}]: {} ({detail}; {:.2} s of {limit} s)",
            k + 1,
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64()
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
