#![allow(dead_code)]

use curvgraph::{Graph, GraphBuilder, VertexId};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Connected random graph: a random spanning tree plus extra edges, weights in `[lo, hi]`.
pub fn random_graph(seed: u64, n: usize, extra_p: f64, lo: f64, hi: f64, random_mass: bool) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut b = GraphBuilder::new();
    for i in 0..n {
        let m = if random_mass { rng.gen_range(lo..=hi) } else { 1.0 };
        b.vertex(i as i64, m).unwrap();
    }
    let mut present = std::collections::HashSet::new();
    for i in 1..n {
        let j = rng.gen_range(0..i);
        present.insert((j, i));
        b.edge(j as i64, i as i64, rng.gen_range(lo..=hi)).unwrap();
    }
    for i in 0..n {
        for j in i + 1..n {
            if !present.contains(&(i, j)) && rng.gen_bool(extra_p) {
                b.edge(i as i64, j as i64, rng.gen_range(lo..=hi)).unwrap();
            }
        }
    }
    b.build().unwrap()
}

/// All-pairs hop distances by Floyd-Warshall, `usize::MAX` when disconnected.
pub fn hop_distances(g: &Graph) -> Vec<Vec<usize>> {
    let n = g.vertex_count();
    let inf = usize::MAX / 2;
    let mut d = vec![vec![inf; n]; n];
    for i in 0..n {
        d[i][i] = 0;
    }
    for e in g.edges() {
        d[e.u.index()][e.v.index()] = 1;
        d[e.v.index()][e.u.index()] = 1;
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if d[i][k] + d[k][j] < d[i][j] {
                    d[i][j] = d[i][k] + d[k][j];
                }
            }
        }
    }
    d
}

pub fn laplacian_at(g: &Graph, f: &[f64], x: usize) -> f64 {
    let v = VertexId(x as u32);
    g.neighbors(v).map(|(y, w)| w / g.mass(v) * (f[y.index()] - f[x])).sum()
}

/// Ollivier curvature by enumerating integer 1-Lipschitz functions on `B₁(x) ∪ B₁(y)`
/// with `f(x) = 0`, `f(y) = 1`, values in `{−3, …, 3}`, minimizing `Δf(x) − Δf(y)`.
pub fn ollivier_enumeration(g: &Graph, x: usize, y: usize) -> f64 {
    let d = hop_distances(g);
    let n = g.vertex_count();
    let near: Vec<usize> = (0..n).filter(|&u| d[x][u] <= 1 || d[y][u] <= 1).collect();
    let free: Vec<usize> = near.iter().copied().filter(|&u| u != x && u != y).collect();
    let mut f = vec![0.0; n];
    f[y] = 1.0;
    let mut best = f64::INFINITY;
    let mut digits = vec![-3i64; free.len()];
    loop {
        for (k, &u) in free.iter().enumerate() {
            f[u] = digits[k] as f64;
        }
        let lipschitz = near.iter().all(|&a| near.iter().all(|&b| (f[a] - f[b]).abs() <= d[a][b] as f64));
        if lipschitz {
            best = best.min(laplacian_at(g, &f, x) - laplacian_at(g, &f, y));
        }
        let mut k = 0;
        loop {
            if k == digits.len() {
                return best;
            }
            digits[k] += 1;
            if digits[k] <= 3 {
                break;
            }
            digits[k] = -3;
            k += 1;
        }
    }
}

/// `Γ(f)(x)` and `Γ₂(f)(x)` straight from the product-rule definitions.
pub fn gamma_naive(g: &Graph, f: &[f64], h: &[f64], x: usize) -> f64 {
    let fh: Vec<f64> = f.iter().zip(h).map(|(a, b)| a * b).collect();
    0.5 * (laplacian_at(g, &fh, x) - f[x] * laplacian_at(g, h, x) - h[x] * laplacian_at(g, f, x))
}

pub fn gamma2_naive(g: &Graph, f: &[f64], x: usize) -> f64 {
    let n = g.vertex_count();
    let gf: Vec<f64> = (0..n).map(|z| gamma_naive(g, f, f, z)).collect();
    let lf: Vec<f64> = (0..n).map(|z| laplacian_at(g, f, z)).collect();
    0.5 * laplacian_at(g, &gf, x) - gamma_naive(g, f, &lf, x)
}

/// `K_n(x)` from the generalized eigenproblem of the `Γ₂` and `Γ` forms, after fixing
/// `f(x) = 0` and eliminating `S₂(x)` by a Schur complement.
pub fn be_oracle(g: &Graph, x: usize, n_dim: f64) -> f64 {
    use nalgebra::DMatrix;
    let d = hop_distances(g);
    let s1: Vec<usize> = (0..g.vertex_count()).filter(|&u| d[x][u] == 1).collect();
    let s2: Vec<usize> = (0..g.vertex_count()).filter(|&u| d[x][u] == 2).collect();
    let vars: Vec<usize> = s1.iter().chain(&s2).copied().collect();
    let k = vars.len();
    let nv = g.vertex_count();
    let unit = |i: usize| {
        let mut e = vec![0.0; nv];
        e[i] = 1.0;
        e
    };
    let form = |q: &dyn Fn(&[f64]) -> f64| {
        let mut m = DMatrix::zeros(k, k);
        for a in 0..k {
            for b in 0..k {
                let ea = unit(vars[a]);
                let eb = unit(vars[b]);
                let s: Vec<f64> = ea.iter().zip(&eb).map(|(p, q)| p + q).collect();
                m[(a, b)] = 0.5 * (q(&s) - q(&ea) - q(&eb));
            }
        }
        m
    };
    let m2 = form(&|f: &[f64]| {
        let lap = laplacian_at(g, f, x);
        gamma2_naive(g, f, x) - if n_dim.is_finite() { lap * lap / n_dim } else { 0.0 }
    });
    let m1 = form(&|f: &[f64]| gamma_naive(g, f, f, x));
    let a = s1.len();
    let b = s2.len();
    let maa = m2.view((0, 0), (a, a)).into_owned();
    let schur = if b == 0 {
        maa
    } else {
        let mab = m2.view((0, a), (a, b)).into_owned();
        let mbb = m2.view((a, a), (b, b)).into_owned();
        maa - &mab * mbb.try_inverse().expect("Γ₂ is definite on S₂") * mab.transpose()
    };
    let gaa = m1.view((0, 0), (a, a)).into_owned();
    let inv_sqrt = DMatrix::from_fn(a, a, |i, j| if i == j { 1.0 / gaa[(i, i)].sqrt() } else { 0.0 });
    let sym = &inv_sqrt * schur * &inv_sqrt;
    sym.symmetric_eigen().eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
}
