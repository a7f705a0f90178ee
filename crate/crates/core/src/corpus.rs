//! Example corpus: small graphs, generated families and the report tree built from them.

use std::path::Path;

use serde::Serialize;

use crate::curvature::{self, bakry_emery_curvature, ollivier_curvature, CurvatureMode};
use crate::ends::{self, classify_end, ends_wrt, separating_harmonics, DEFAULT_MARGIN, DEFAULT_SCHEDULE, DEFAULT_STALL_EPS};
use crate::error::Result;
use crate::generators::{Family, GraphGenerator, RootRule, RootedGeneratorSequence};
use crate::gh::{curvature_semicontinuity_check, pgh_converges, pgh_limit};
use crate::graph::VertexId;
use crate::harmonic::{dimension_certificate, gradient_decay_profile, green_limit};
use crate::report::{barrier_table, decay_table, green_table, to_json, write_text, Cell, Table};
use crate::site::Site;
use crate::Graph;

/// Unit-weight graphs with at most eight vertices.
pub fn small_graphs() -> Vec<(&'static str, Graph)> {
    let cube = [(0, 1), (1, 3), (3, 2), (2, 0), (4, 5), (5, 7), (7, 6), (6, 4), (0, 4), (1, 5), (2, 6), (3, 7)];
    vec![
        ("edge", Graph::unit(2, &[(0, 1)])),
        ("path4", Graph::unit(4, &[(0, 1), (1, 2), (2, 3)])),
        ("c3", Graph::unit(3, &[(0, 1), (1, 2), (2, 0)])),
        ("c4", Graph::unit(4, &[(0, 1), (1, 2), (2, 3), (3, 0)])),
        ("c5", Graph::unit(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)])),
        ("k4", Graph::unit(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)])),
        ("star4", Graph::unit(5, &[(0, 1), (0, 2), (0, 3), (0, 4)])),
        ("cube", Graph::unit(8, &cube)),
    ]
    .into_iter()
    .map(|(n, g)| (n, g.expect("corpus graphs are well formed")))
    .collect()
}

/// Glued copies of `Z^d` sharing the origin.
pub fn glued_lattice(dim: usize, copies: u32) -> GraphGenerator {
    GraphGenerator::glued_at_root(Family::Lattice { dim }, copies)
}

/// Roots `(i, 0)` marching into copy 0 of glued `Z² ⊔ Z²`.
pub fn marching_sequence() -> RootedGeneratorSequence {
    let g = glued_lattice(2, 2);
    RootedGeneratorSequence::new(g, RootRule::Ray { start: Site::Glued(0, Box::new(Site::Lattice(vec![0, 0]))), step: vec![1, 0] })
}

/// `Z²` with `w = 1 + 1/i` on the root edge towards `(1,0)`.
pub fn decaying_sequence() -> RootedGeneratorSequence {
    RootedGeneratorSequence::constant(GraphGenerator::lattice(2)).with_edge_decay(Site::Lattice(vec![0, 0]), Site::Lattice(vec![1, 0]), 1.0)
}

#[derive(Serialize)]
struct Manifest {
    files: Vec<String>,
}

struct Writer<'a> {
    root: &'a Path,
    files: Vec<String>,
}

impl Writer<'_> {
    fn put(&mut self, rel: &str, text: &str) -> Result<()> {
        write_text(&self.root.join(rel), text)?;
        self.files.push(rel.to_string());
        Ok(())
    }

    fn json<T: Serialize>(&mut self, rel: &str, v: &T) -> Result<()> {
        self.put(rel, &to_json(v)?)
    }

    fn csv(&mut self, rel: &str, t: &Table) -> Result<()> {
        self.put(rel, &t.to_csv())
    }
}

/// Regenerate every corpus table below `dir`; returns the relative paths written.
pub fn run_corpus(dir: &Path) -> Result<Vec<String>> {
    let mut w = Writer { root: dir, files: Vec::new() };

    let mut oll = Table::new(&["graph", "u", "v", "kappa", "duality_gap"]);
    let mut be = Table::new(&["graph", "vertex", "k_inf", "k_2"]);
    for (name, g) in small_graphs() {
        for e in g.edges() {
            let r = ollivier_curvature(&g, e.u, e.v)?;
            oll.push(vec![name.into(), g.label(e.u).to_string().into(), g.label(e.v).to_string().into(), r.kappa.into(), r.duality_gap.into()]);
        }
        for v in g.vertices() {
            let inf = bakry_emery_curvature(&g, v, f64::INFINITY)?.curvature;
            let two = bakry_emery_curvature(&g, v, 2.0)?.curvature;
            be.push(vec![name.into(), g.label(v).to_string().into(), inf.into(), two.into()]);
        }
    }
    w.csv("curvature/ollivier_small.csv", &oll)?;
    w.csv("curvature/bakry_emery_small.csv", &be)?;

    let z2z2 = glued_lattice(2, 2);
    let glue = z2z2.root();
    let outside = curvature::curvature_outside(&z2z2, std::slice::from_ref(&glue), CurvatureMode::Ollivier, 4, 1e-9)?;
    w.json("curvature/glued_z2_outside.json", &outside)?;
    let ball = z2z2.root_ball(4)?;
    let mut glue_edges = Table::new(&["u", "v", "kappa"]);
    for y in ball.graph.neighbor_ids(ball.root) {
        let k = ollivier_curvature(&ball.graph, ball.root, y)?.kappa;
        glue_edges.push(vec![ball.graph.label(ball.root).to_string().into(), ball.graph.label(y).to_string().into(), k.into()]);
    }
    w.csv("curvature/glued_z2_glue_edges.csv", &glue_edges)?;

    let z = GraphGenerator::lattice(1);
    let gz = green_limit(&z, &z.root(), &[1, 2, 4, 8, 16], 1e-3, 0)?;
    w.json("harmonic/green_z.json", &gz)?;
    w.csv("harmonic/green_z.csv", &green_table(&gz))?;
    let z3 = GraphGenerator::lattice(3);
    let g3 = green_limit(&z3, &z3.root(), &[2, 4, 6, 8, 10], 1e-2, 1)?;
    w.json("harmonic/green_z3.json", &g3)?;
    w.csv("harmonic/green_z3.csv", &green_table(&g3))?;

    for (name, gen) in [("z", GraphGenerator::lattice(1)), ("z2", GraphGenerator::lattice(2)), ("z3", GraphGenerator::lattice(3)), ("glued_z3", glued_lattice(3, 2))] {
        let omega = [gen.root()];
        let rep = ends_wrt(&gen, &omega, 10)?;
        w.json(&format!("ends/{name}_ends.json"), &rep)?;
        for (k, end) in rep.ends.iter().enumerate() {
            let c = classify_end(&gen, end, &DEFAULT_SCHEDULE, DEFAULT_MARGIN, DEFAULT_STALL_EPS)?;
            w.json(&format!("ends/{name}_end{k}.json"), &c)?;
            w.csv(&format!("ends/{name}_end{k}_barrier.csv"), &barrier_table(&c))?;
        }
    }

    let z3z3 = glued_lattice(3, 2);
    let glue3 = z3z3.root();
    let basis = separating_harmonics(&z3z3, std::slice::from_ref(&glue3), 10, 12)?;
    w.json("ends/glued_z3_basis.json", &basis)?;
    if let (Some(b), Some(h)) = (&basis.ball, basis.functions.first()) {
        let radii: Vec<usize> = (1..=10).collect();
        w.csv("harmonic/glued_z3_decay.csv", &decay_table(&gradient_decay_profile(b, h, &radii)?))?;
    }
    let cert = dimension_certificate(&z3z3, &glue3, 1, CurvatureMode::Ollivier, 4, None, None)?;
    w.json("harmonic/glued_z3_dimbound.json", &cert)?;
    let refused = dimension_certificate(&z3z3, &glue3, 1, CurvatureMode::Ollivier, 4, Some(&[]), None)?;
    w.json("harmonic/glued_z3_dimbound_empty_omega.json", &refused)?;
    let n0 = basis.verdicts.iter().filter(|&&v| v == ends::Verdict::NonParabolic).count();
    let mut chain = Table::new(&["n0", "basis_rank", "sphere_count", "holds"]);
    chain.push(vec![n0.into(), basis.rank.into(), cert.sphere_count.into(), Cell::Text((n0 <= basis.rank && basis.rank <= cert.sphere_count).to_string())]);
    w.csv("harmonic/glued_z3_chain.csv", &chain)?;

    let constant = RootedGeneratorSequence::constant(GraphGenerator::lattice(2));
    w.json("gh/constant.json", &pgh_limit(&constant, &[1, 2, 3], 3, 1e-9)?)?;
    let march = marching_sequence();
    let idx: Vec<usize> = (4..=12).collect();
    w.json("gh/marching_limit.json", &pgh_limit(&march, &idx, 3, 1e-9)?)?;
    w.json("gh/marching_semicontinuity_ollivier.json", &curvature_semicontinuity_check(&march, &idx, CurvatureMode::Ollivier, 1e-9, 1e-6)?)?;
    w.json("gh/marching_semicontinuity_be.json", &curvature_semicontinuity_check(&march, &idx, CurvatureMode::BakryEmery, 1e-9, 1e-6)?)?;
    let decay = decaying_sequence();
    let short: Vec<usize> = (4..=10).collect();
    w.json("gh/decay_short.json", &pgh_converges(&decay, &short, 2, 1e-3)?)?;
    let long: Vec<usize> = (1..=10).map(|k| 1000 * k).collect();
    w.json("gh/decay_long.json", &pgh_converges(&decay, &long, 2, 1e-3)?)?;
    w.json("gh/decay_semicontinuity_be.json", &curvature_semicontinuity_check(&decay, &long, CurvatureMode::BakryEmery, 1e-3, 1e-6)?)?;
    w.json("gh/decay_semicontinuity_ollivier.json", &curvature_semicontinuity_check(&decay, &long, CurvatureMode::Ollivier, 1e-3, 1e-6)?)?;

    let mut files = w.files.clone();
    files.push("manifest.json".into());
    w.json("manifest.json", &Manifest { files })?;
    Ok(w.files)
}

/// Vertex id helper for corpus graphs built with [`Graph::unit`].
pub fn v(i: u32) -> VertexId {
    VertexId(i)
}
