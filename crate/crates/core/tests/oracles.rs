mod common;

use common::{be_oracle, gamma2_naive, gamma_naive, ollivier_enumeration, random_graph};
use curvgraph::curvature::{bakry_emery_curvature, be_forms, gamma, gamma2, ollivier_curvature};
use curvgraph::generators::GraphGenerator;
use curvgraph::linalg::is_psd_exact;
use curvgraph::{Function, Rational, Scalar, VertexId};

#[test]
fn ollivier_matches_enumeration_on_random_unit_graphs() {
    for seed in 0..40 {
        let n = 3 + (seed as usize % 5);
        let g = random_graph(seed, n, 0.35, 1.0, 1.0, false);
        for e in g.edges() {
            let lp = ollivier_curvature(&g, e.u, e.v).unwrap().kappa;
            let oracle = ollivier_enumeration(&g, e.u.index(), e.v.index());
            assert!((lp - oracle).abs() <= 1e-9, "seed {seed} edge {:?}: lp {lp}, oracle {oracle}", (e.u, e.v));
        }
    }
}

#[test]
fn exact_rational_ollivier_agrees_with_float() {
    for seed in 100..110 {
        let g = random_graph(seed, 6, 0.4, 1.0, 1.0, false);
        let q = g.map_scalar(|w| Rational::of(*w));
        for e in g.edges() {
            let exact = ollivier_curvature(&q, e.u, e.v).unwrap();
            assert_eq!(exact.duality_gap, Rational::of(0.0));
            assert!((exact.kappa.to_f64_lossy() - ollivier_curvature(&g, e.u, e.v).unwrap().kappa).abs() < 1e-9);
        }
    }
}

#[test]
fn gamma_agrees_with_product_rule() {
    let g = random_graph(7, 9, 0.3, 0.5, 2.0, true);
    let vals: Vec<f64> = (0..9).map(|i| ((i * 37) % 11) as f64 / 3.0 - 1.5).collect();
    let f = Function::from_values(vals.clone());
    for x in 0..9 {
        let v = VertexId(x as u32);
        assert!((gamma(&g, &f, v).unwrap() - gamma_naive(&g, &vals, &vals, x)).abs() < 1e-12);
        assert!((gamma2(&g, &f, v).unwrap() - gamma2_naive(&g, &vals, x)).abs() < 1e-10);
    }
}

#[test]
fn bakry_emery_matches_schur_oracle() {
    for seed in 200..220 {
        let n = 4 + (seed as usize % 8);
        let g = random_graph(seed, n, 0.3, 0.5, 2.0, true);
        for x in [0, n / 2] {
            for dim in [f64::INFINITY, 2.0] {
                let k = bakry_emery_curvature(&g, VertexId(x as u32), dim).unwrap().curvature;
                let oracle = be_oracle(&g, x, dim);
                assert!((k - oracle).abs() <= 1e-6, "seed {seed} x {x} n {dim}: {k} vs {oracle}");
            }
        }
    }
}

#[test]
fn z3_satisfies_cd0_exactly() {
    let z3 = GraphGenerator::lattice(3);
    let ball = z3.root_ball(3).unwrap();
    let q = ball.graph.map_scalar(|w| Rational::of(*w));
    let forms = be_forms(&q, ball.root, Rational::of(0.0)).unwrap();
    assert!(is_psd_exact(&forms.q2));
    let eps = Rational::new(1.into(), 100.into());
    let shifted: Vec<Vec<Rational>> = forms
        .q2
        .iter()
        .zip(&forms.q1)
        .map(|(r2, r1)| r2.iter().zip(r1).map(|(a, b)| a.clone() - eps.clone() * b.clone()).collect())
        .collect();
    assert!(!is_psd_exact(&shifted));
}
