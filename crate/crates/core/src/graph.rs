//! Finite weighted graphs, combinatorial metric queries, boundaries and the Laplacian.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::site::Site;

/// Stable external name of a vertex.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Label {
    Int(i64),
    Name(String),
    Site(Site),
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Int(i) => write!(f, "{i}"),
            Label::Name(s) => write!(f, "{s}"),
            Label::Site(s) => write!(f, "{s}"),
        }
    }
}

impl From<&str> for Label {
    fn from(s: &str) -> Self {
        Label::Name(s.to_string())
    }
}

impl From<i64> for Label {
    fn from(i: i64) -> Self {
        Label::Int(i)
    }
}

impl From<Site> for Label {
    fn from(s: Site) -> Self {
        Label::Site(s)
    }
}

/// Dense vertex index inside one graph. Ids follow label order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VertexId(pub u32);

impl VertexId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

pub type VertexSet = BTreeSet<VertexId>;

/// An undirected edge stored once, with `u < v`.
#[derive(Clone, Debug, PartialEq)]
pub struct Edge<S> {
    pub u: VertexId,
    pub v: VertexId,
    pub w: S,
}

/// Locally finite simple graph with vertex measure `m > 0` and symmetric edge weights `w > 0`.
#[derive(Clone, Debug)]
pub struct WeightedGraph<S = f64> {
    labels: Vec<Label>,
    index: HashMap<Label, VertexId>,
    mass: Vec<S>,
    edges: Vec<Edge<S>>,
    adjacency: Vec<Vec<(VertexId, usize)>>,
}

/// Collects vertices and edges by label, then canonicalizes ids on [`GraphBuilder::build`].
#[derive(Clone, Debug, Default)]
pub struct GraphBuilder<S> {
    vertices: BTreeMap<Label, S>,
    edges: BTreeMap<(Label, Label), S>,
}

impl<S: Scalar> GraphBuilder<S> {
    pub fn new() -> Self {
        GraphBuilder { vertices: BTreeMap::new(), edges: BTreeMap::new() }
    }

    pub fn vertex(&mut self, label: impl Into<Label>, m: S) -> Result<&mut Self> {
        let label = label.into();
        if m <= S::zero() {
            return Err(Error::Domain(format!("vertex {label}: weight must be positive, got {m}")));
        }
        if self.vertices.insert(label.clone(), m).is_some() {
            return Err(Error::Domain(format!("duplicate vertex {label}")));
        }
        Ok(self)
    }

    pub fn edge(&mut self, a: impl Into<Label>, b: impl Into<Label>, w: S) -> Result<&mut Self> {
        let (a, b) = (a.into(), b.into());
        if a == b {
            return Err(Error::Domain(format!("self-loop at {a}")));
        }
        if w <= S::zero() {
            return Err(Error::Domain(format!("edge {a}-{b}: weight must be positive, got {w}")));
        }
        let key = if a < b { (a, b) } else { (b, a) };
        if self.edges.contains_key(&key) {
            return Err(Error::Domain(format!("duplicate edge {}-{}", key.0, key.1)));
        }
        self.edges.insert(key, w);
        Ok(self)
    }

    pub fn build(self) -> Result<WeightedGraph<S>> {
        let labels: Vec<Label> = self.vertices.keys().cloned().collect();
        let index: HashMap<Label, VertexId> =
            labels.iter().enumerate().map(|(i, l)| (l.clone(), VertexId(i as u32))).collect();
        let mass: Vec<S> = self.vertices.into_values().collect();
        let mut edges = Vec::with_capacity(self.edges.len());
        for ((a, b), w) in self.edges {
            let u = *index.get(&a).ok_or_else(|| Error::Domain(format!("edge endpoint {a} is not a vertex")))?;
            let v = *index.get(&b).ok_or_else(|| Error::Domain(format!("edge endpoint {b} is not a vertex")))?;
            let (u, v) = if u < v { (u, v) } else { (v, u) };
            edges.push(Edge { u, v, w });
        }
        Ok(WeightedGraph::from_parts(labels, index, mass, edges))
    }
}

impl<S: Scalar> WeightedGraph<S> {
    fn from_parts(labels: Vec<Label>, index: HashMap<Label, VertexId>, mass: Vec<S>, mut edges: Vec<Edge<S>>) -> Self {
        edges.sort_by_key(|e| (e.u, e.v));
        let mut adjacency = vec![Vec::new(); labels.len()];
        for (k, e) in edges.iter().enumerate() {
            adjacency[e.u.index()].push((e.v, k));
            adjacency[e.v.index()].push((e.u, k));
        }
        for list in &mut adjacency {
            list.sort_by_key(|&(y, _)| y);
        }
        WeightedGraph { labels, index, mass, edges, adjacency }
    }

    pub fn empty() -> Self {
        WeightedGraph::from_parts(Vec::new(), HashMap::new(), Vec::new(), Vec::new())
    }

    /// Unit-weight graph on labels `0..n` with the given edge list.
    pub fn unit(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut b = GraphBuilder::new();
        for i in 0..n {
            b.vertex(i as i64, S::one())?;
        }
        for &(x, y) in edges {
            b.edge(x as i64, y as i64, S::one())?;
        }
        b.build()
    }

    pub fn vertex_count(&self) -> usize {
        self.labels.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        (0..self.labels.len() as u32).map(VertexId)
    }

    pub fn edges(&self) -> &[Edge<S>] {
        &self.edges
    }

    pub fn label(&self, v: VertexId) -> &Label {
        &self.labels[v.index()]
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn id_of(&self, label: &Label) -> Option<VertexId> {
        self.index.get(label).copied()
    }

    /// Resolve a user-supplied vertex token: an integer, a site in JSON form, or a display name.
    pub fn resolve(&self, token: &str) -> Result<VertexId> {
        let token = token.trim();
        if let Ok(i) = token.parse::<i64>() {
            if let Some(v) = self.id_of(&Label::Int(i)) {
                return Ok(v);
            }
        }
        if let Some(site) = Site::parse(token) {
            if let Some(v) = self.id_of(&Label::Site(site)) {
                return Ok(v);
            }
        }
        if let Some(v) = self.id_of(&Label::Name(token.to_string())) {
            return Ok(v);
        }
        self.vertices()
            .find(|&v| self.label(v).to_string() == token)
            .ok_or_else(|| Error::Domain(format!("unknown vertex {token}")))
    }

    pub fn contains(&self, v: VertexId) -> bool {
        v.index() < self.labels.len()
    }

    pub(crate) fn check(&self, v: VertexId) -> Result<()> {
        if self.contains(v) {
            Ok(())
        } else {
            Err(Error::Domain(format!("vertex {v} is not in the graph")))
        }
    }

    pub fn mass(&self, v: VertexId) -> &S {
        &self.mass[v.index()]
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.adjacency[v.index()].len()
    }

    /// Neighbors of `v` in id order, with edge weights.
    pub fn neighbors(&self, v: VertexId) -> impl Iterator<Item = (VertexId, &S)> + '_ {
        self.adjacency[v.index()].iter().map(move |&(y, k)| (y, &self.edges[k].w))
    }

    pub fn neighbor_ids(&self, v: VertexId) -> impl Iterator<Item = VertexId> + '_ {
        self.adjacency[v.index()].iter().map(|&(y, _)| y)
    }

    pub fn edge_weight(&self, a: VertexId, b: VertexId) -> Option<&S> {
        let list = &self.adjacency[a.index()];
        list.binary_search_by_key(&b, |&(y, _)| y).ok().map(|i| &self.edges[list[i].1].w)
    }

    pub fn has_edge(&self, a: VertexId, b: VertexId) -> bool {
        self.edge_weight(a, b).is_some()
    }

    /// Same combinatorial graph with weights mapped through `f`.
    pub fn map_scalar<T: Scalar>(&self, f: impl Fn(&S) -> T) -> WeightedGraph<T> {
        WeightedGraph {
            labels: self.labels.clone(),
            index: self.index.clone(),
            mass: self.mass.iter().map(&f).collect(),
            edges: self.edges.iter().map(|e| Edge { u: e.u, v: e.v, w: f(&e.w) }).collect(),
            adjacency: self.adjacency.clone(),
        }
    }

    /// Replace vertex and edge weights in place of the current ones.
    pub fn reweighted(&self, m: impl Fn(VertexId, &S) -> S, w: impl Fn(&Edge<S>) -> S) -> Self {
        let mut out = self.clone();
        for v in self.vertices() {
            out.mass[v.index()] = m(v, &self.mass[v.index()]);
        }
        for (k, e) in self.edges.iter().enumerate() {
            out.edges[k].w = w(e);
        }
        out
    }

    /// Breadth-first depths from `root`, truncated at `max_depth`. Unreached vertices are `None`.
    pub fn bfs_depths(&self, root: VertexId, max_depth: usize) -> Result<Vec<Option<usize>>> {
        self.check(root)?;
        let mut depth = vec![None; self.vertex_count()];
        depth[root.index()] = Some(0);
        let mut queue = VecDeque::from([root]);
        while let Some(x) = queue.pop_front() {
            let d = depth[x.index()].unwrap();
            if d == max_depth {
                continue;
            }
            for y in self.neighbor_ids(x) {
                if depth[y.index()].is_none() {
                    depth[y.index()] = Some(d + 1);
                    queue.push_back(y);
                }
            }
        }
        Ok(depth)
    }

    /// `(vertex, depth)` for `B_r(x)`, sorted by id. Cost is local to the ball.
    pub fn local_ball(&self, x: VertexId, r: usize) -> Result<Vec<(VertexId, usize)>> {
        self.check(x)?;
        let mut depth = HashMap::from([(x, 0usize)]);
        let mut queue = VecDeque::from([x]);
        while let Some(u) = queue.pop_front() {
            let d = depth[&u];
            if d == r {
                continue;
            }
            for v in self.neighbor_ids(u) {
                if let std::collections::hash_map::Entry::Vacant(e) = depth.entry(v) {
                    e.insert(d + 1);
                    queue.push_back(v);
                }
            }
        }
        let mut out: Vec<(VertexId, usize)> = depth.into_iter().collect();
        out.sort_unstable();
        Ok(out)
    }

    /// Combinatorial distance; `None` when `x` and `y` are disconnected.
    pub fn distance(&self, x: VertexId, y: VertexId) -> Result<Option<usize>> {
        self.check(y)?;
        Ok(self.bfs_depths(x, usize::MAX)?[y.index()])
    }

    pub fn is_connected(&self) -> bool {
        if self.vertex_count() == 0 {
            return true;
        }
        self.bfs_depths(VertexId(0), usize::MAX).map(|d| d.iter().all(Option::is_some)).unwrap_or(false)
    }

    /// Rooted ball `B_R(x0)` as an induced subgraph with inherited weights.
    pub fn ball(&self, x0: VertexId, radius: usize) -> Result<RootedBall<S>> {
        let depth = self.bfs_depths(x0, radius)?;
        let members: VertexSet = self.vertices().filter(|v| depth[v.index()].is_some()).collect();
        let graph = self.induced_subgraph(&members);
        let root = graph.id_of(self.label(x0)).unwrap();
        let depth = graph.vertices().map(|v| depth[self.id_of(graph.label(v)).unwrap().index()].unwrap()).collect();
        Ok(RootedBall { graph, root, radius, depth })
    }

    /// `S_R(x0)`, possibly empty.
    pub fn sphere(&self, x0: VertexId, radius: usize) -> Result<VertexSet> {
        let depth = self.bfs_depths(x0, radius)?;
        Ok(self.vertices().filter(|v| depth[v.index()] == Some(radius)).collect())
    }

    /// `Δf(x) = Σ_{y∼x} w(x,y)/m(x) (f(y) − f(x))`.
    pub fn laplacian(&self, f: &FunctionOnVertices<S>, x: VertexId) -> Result<S> {
        self.check(x)?;
        let fx = f.get(x)?;
        let mut acc = S::zero();
        for (y, w) in self.neighbors(x) {
            acc = acc + w.clone() * (f.get(y)?.clone() - fx.clone());
        }
        Ok(acc / self.mass(x).clone())
    }

    /// Vertices outside `k` adjacent to `k`.
    pub fn exterior_boundary(&self, k: &VertexSet) -> VertexSet {
        k.iter()
            .filter(|v| self.contains(**v))
            .flat_map(|&x| self.neighbor_ids(x))
            .filter(|y| !k.contains(y))
            .collect()
    }

    /// `K ∪ ∂K`.
    pub fn closure(&self, k: &VertexSet) -> VertexSet {
        let mut out = self.exterior_boundary(k);
        out.extend(k.iter().copied().filter(|v| self.contains(*v)));
        out
    }

    /// Vertices of `w` with a neighbor outside `w`.
    pub fn interior_boundary(&self, w: &VertexSet) -> VertexSet {
        w.iter()
            .copied()
            .filter(|&x| self.contains(x) && self.neighbor_ids(x).any(|y| !w.contains(&y)))
            .collect()
    }

    /// Induced subgraph on `s` with inherited weights. Labels are kept; ids are renumbered.
    pub fn induced_subgraph(&self, s: &VertexSet) -> WeightedGraph<S> {
        let kept: Vec<VertexId> = s.iter().copied().filter(|v| self.contains(*v)).collect();
        let mut remap = vec![u32::MAX; self.vertex_count()];
        for (i, v) in kept.iter().enumerate() {
            remap[v.index()] = i as u32;
        }
        let labels: Vec<Label> = kept.iter().map(|&v| self.label(v).clone()).collect();
        let index = labels.iter().enumerate().map(|(i, l)| (l.clone(), VertexId(i as u32))).collect();
        let mass = kept.iter().map(|&v| self.mass(v).clone()).collect();
        let edges = self
            .edges
            .iter()
            .filter(|e| remap[e.u.index()] != u32::MAX && remap[e.v.index()] != u32::MAX)
            .map(|e| Edge { u: VertexId(remap[e.u.index()]), v: VertexId(remap[e.v.index()]), w: e.w.clone() })
            .collect();
        WeightedGraph::from_parts(labels, index, mass, edges)
    }

    /// Connected components of the induced subgraph on `s`, each sorted, ordered by smallest id.
    pub fn components_within(&self, s: &VertexSet) -> Vec<VertexSet> {
        let mut seen = VertexSet::new();
        let mut out = Vec::new();
        for &start in s {
            if seen.contains(&start) || !self.contains(start) {
                continue;
            }
            let mut comp = VertexSet::from([start]);
            seen.insert(start);
            let mut queue = VecDeque::from([start]);
            while let Some(x) = queue.pop_front() {
                for y in self.neighbor_ids(x) {
                    if s.contains(&y) && seen.insert(y) {
                        comp.insert(y);
                        queue.push_back(y);
                    }
                }
            }
            out.push(comp);
        }
        out
    }

    /// Translate a vertex set of `other` into this graph through labels; missing labels are dropped.
    pub fn translate_set<T: Scalar>(&self, other: &WeightedGraph<T>, set: &VertexSet) -> VertexSet {
        set.iter().filter_map(|&v| self.id_of(other.label(v))).collect()
    }
}

/// Induced ball `B_R(root)` with breadth-first depths.
#[derive(Clone, Debug)]
pub struct RootedBall<S = f64> {
    pub graph: WeightedGraph<S>,
    pub root: VertexId,
    pub radius: usize,
    pub depth: Vec<usize>,
}

impl<S: Scalar> RootedBall<S> {
    pub fn depth_of(&self, v: VertexId) -> usize {
        self.depth[v.index()]
    }

    pub fn sphere(&self, r: usize) -> VertexSet {
        self.graph.vertices().filter(|v| self.depth[v.index()] == r).collect()
    }

    pub fn within(&self, r: usize) -> VertexSet {
        self.graph.vertices().filter(|v| self.depth[v.index()] <= r).collect()
    }

    /// `true` when `B_r(x)` of the ambient graph lies inside this ball.
    pub fn contains_ball(&self, x: VertexId, r: usize) -> bool {
        self.graph.contains(x) && self.depth[x.index()] + r <= self.radius
    }

    pub fn root_label(&self) -> &Label {
        self.graph.label(self.root)
    }

    /// The sub-ball of radius `r <= radius`.
    pub fn restrict(&self, r: usize) -> RootedBall<S> {
        let r = r.min(self.radius);
        let members = self.within(r);
        let graph = self.graph.induced_subgraph(&members);
        let depth = graph.vertices().map(|v| self.depth[self.graph.id_of(graph.label(v)).unwrap().index()]).collect();
        let root = graph.id_of(self.root_label()).unwrap();
        RootedBall { graph, root, radius: r, depth }
    }

    pub fn depth_profile(&self) -> Vec<usize> {
        let mut counts = vec![0; self.radius + 1];
        for &d in &self.depth {
            counts[d] += 1;
        }
        counts
    }
}

/// Real-valued function defined on a subset of the vertices of one graph.
#[derive(Clone, Debug, PartialEq)]
pub struct FunctionOnVertices<S = f64> {
    values: Vec<Option<S>>,
}

impl<S: Scalar> FunctionOnVertices<S> {
    /// Function with empty domain on a graph with `n` vertices.
    pub fn undefined(n: usize) -> Self {
        FunctionOnVertices { values: vec![None; n] }
    }

    pub fn constant(n: usize, c: S) -> Self {
        FunctionOnVertices { values: vec![Some(c); n] }
    }

    pub fn from_fn(g: &WeightedGraph<S>, f: impl Fn(VertexId) -> S) -> Self {
        FunctionOnVertices { values: g.vertices().map(|v| Some(f(v))).collect() }
    }

    pub fn from_values(values: Vec<S>) -> Self {
        FunctionOnVertices { values: values.into_iter().map(Some).collect() }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.iter().all(Option::is_none)
    }

    pub fn get(&self, v: VertexId) -> Result<&S> {
        self.values
            .get(v.index())
            .and_then(Option::as_ref)
            .ok_or_else(|| Error::Domain(format!("function undefined at {v}")))
    }

    pub fn value(&self, v: VertexId) -> Option<&S> {
        self.values.get(v.index()).and_then(Option::as_ref)
    }

    pub fn set(&mut self, v: VertexId, x: S) {
        if v.index() >= self.values.len() {
            self.values.resize(v.index() + 1, None);
        }
        self.values[v.index()] = Some(x);
    }

    pub fn domain(&self) -> VertexSet {
        self.values.iter().enumerate().filter(|(_, x)| x.is_some()).map(|(i, _)| VertexId(i as u32)).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = (VertexId, &S)> + '_ {
        self.values.iter().enumerate().filter_map(|(i, x)| x.as_ref().map(|x| (VertexId(i as u32), x)))
    }

    /// Sup norm over the domain; zero for an empty domain.
    pub fn sup_norm(&self) -> S {
        self.iter().fold(S::zero(), |acc, (_, x)| S::max_of(acc, x.abs_val()))
    }

    pub fn map(&self, f: impl Fn(&S) -> S) -> Self {
        FunctionOnVertices { values: self.values.iter().map(|x| x.as_ref().map(&f)).collect() }
    }

    /// Values keyed by vertex label, for reports.
    pub fn labeled(&self, g: &WeightedGraph<S>) -> BTreeMap<String, f64> {
        self.iter().map(|(v, x)| (g.label(v).to_string(), x.to_f64_lossy())).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(n: usize) -> WeightedGraph<f64> {
        let edges: Vec<_> = (0..n - 1).map(|i| (i, i + 1)).collect();
        WeightedGraph::unit(n, &edges).unwrap()
    }

    fn grid(radius: i64) -> WeightedGraph<f64> {
        let mut b = GraphBuilder::new();
        for x in -radius..=radius {
            for y in -radius..=radius {
                b.vertex(Site::Lattice(vec![x, y]), 1.0).unwrap();
            }
        }
        for x in -radius..=radius {
            for y in -radius..=radius {
                if x < radius {
                    b.edge(Site::Lattice(vec![x, y]), Site::Lattice(vec![x + 1, y]), 1.0).unwrap();
                }
                if y < radius {
                    b.edge(Site::Lattice(vec![x, y]), Site::Lattice(vec![x, y + 1]), 1.0).unwrap();
                }
            }
        }
        b.build().unwrap()
    }

    fn origin(g: &WeightedGraph<f64>) -> VertexId {
        g.id_of(&Label::Site(Site::Lattice(vec![0, 0]))).unwrap()
    }

    #[test]
    fn distances() {
        let p = path(3);
        assert_eq!(p.distance(VertexId(0), VertexId(2)).unwrap(), Some(2));
        assert_eq!(p.distance(VertexId(1), VertexId(1)).unwrap(), Some(0));
        let c4 = WeightedGraph::<f64>::unit(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        assert_eq!(c4.distance(VertexId(0), VertexId(2)).unwrap(), Some(2));
        let split = WeightedGraph::<f64>::unit(3, &[(0, 1)]).unwrap();
        assert_eq!(split.distance(VertexId(0), VertexId(2)).unwrap(), None);
        assert!(matches!(p.distance(VertexId(0), VertexId(7)), Err(Error::Domain(_))));
    }

    #[test]
    fn balls_and_spheres() {
        let p = path(3);
        let b = p.ball(VertexId(1), 1).unwrap();
        assert_eq!((b.graph.vertex_count(), b.graph.edge_count()), (3, 2));
        let b0 = p.ball(VertexId(1), 0).unwrap();
        assert_eq!((b0.graph.vertex_count(), b0.graph.edge_count()), (1, 0));
        assert!(matches!(p.ball(VertexId(9), 1), Err(Error::Domain(_))));

        let g = grid(4);
        let o = origin(&g);
        assert_eq!(g.ball(o, 2).unwrap().graph.vertex_count(), 13);
        assert_eq!(g.sphere(o, 1).unwrap().len(), 4);
        assert_eq!(g.sphere(o, 0).unwrap(), VertexSet::from([o]));
    }

    #[test]
    fn laplacian_examples() {
        let e = WeightedGraph::<f64>::unit(2, &[(0, 1)]).unwrap();
        let f = FunctionOnVertices::from_values(vec![0.0, 1.0]);
        assert_eq!(e.laplacian(&f, VertexId(0)).unwrap(), 1.0);
        let c = FunctionOnVertices::constant(2, 3.5);
        assert_eq!(e.laplacian(&c, VertexId(1)).unwrap(), 0.0);
        let p = path(7);
        let lin = FunctionOnVertices::from_fn(&p, |v| v.0 as f64);
        assert_eq!(p.laplacian(&lin, VertexId(3)).unwrap(), 0.0);
        let partial = FunctionOnVertices::<f64>::undefined(2);
        assert!(matches!(e.laplacian(&partial, VertexId(0)), Err(Error::Domain(_))));
    }

    #[test]
    fn boundaries() {
        let p = path(7);
        let mid = VertexSet::from([VertexId(3)]);
        assert_eq!(p.exterior_boundary(&mid), VertexSet::from([VertexId(2), VertexId(4)]));
        let all: VertexSet = p.vertices().collect();
        assert!(p.exterior_boundary(&all).is_empty());
        assert!(p.interior_boundary(&all).is_empty());
        let w: VertexSet = [2, 3, 4].map(VertexId).into();
        assert_eq!(p.interior_boundary(&w), VertexSet::from([VertexId(2), VertexId(4)]));
        assert_eq!(p.closure(&mid).len(), 3);

        let g = grid(4);
        let o = origin(&g);
        assert_eq!(g.exterior_boundary(&VertexSet::from([o])).len(), 4);
        let b2 = g.ball(o, 2).unwrap();
        let w2 = g.translate_set(&b2.graph, &b2.within(2));
        let delta = g.interior_boundary(&w2);
        assert_eq!(delta.len(), 8);
        assert_eq!(delta, g.sphere(o, 2).unwrap());
    }

    #[test]
    fn induced_subgraphs() {
        let p = path(4);
        let one = p.induced_subgraph(&VertexSet::from([VertexId(1), VertexId(2)]));
        assert_eq!((one.vertex_count(), one.edge_count()), (2, 1));
        let none = p.induced_subgraph(&VertexSet::new());
        assert_eq!(none.vertex_count(), 0);
        let all = p.induced_subgraph(&p.vertices().collect());
        assert_eq!(all.edges(), p.edges());
        assert_eq!(all.labels(), p.labels());
    }

    #[test]
    fn builder_rejects_bad_input() {
        let mut b = GraphBuilder::<f64>::new();
        b.vertex("a", 1.0).unwrap();
        b.vertex("b", 1.0).unwrap();
        assert!(b.edge("a", "a", 1.0).is_err());
        assert!(b.edge("a", "b", 0.0).is_err());
        b.edge("a", "b", 1.0).unwrap();
        assert!(b.edge("b", "a", 2.0).is_err());
        assert!(b.vertex("c", -1.0).is_err());
        assert!(b.vertex("a", 1.0).is_err());
    }

    #[test]
    fn rational_graph() {
        use crate::scalar::Rational;
        let g = path(3).map_scalar(|x| Rational::of(*x));
        let f = FunctionOnVertices::from_values(vec![Rational::of(0.0), Rational::of(0.5), Rational::of(2.0)]);
        assert_eq!(g.laplacian(&f, VertexId(1)).unwrap(), Rational::of(1.0));
    }

    #[test]
    fn restrict_ball() {
        let g = grid(5);
        let b3 = g.ball(origin(&g), 3).unwrap();
        let b2 = b3.restrict(2);
        assert_eq!(b2.graph.vertex_count(), 13);
        assert_eq!(b2.depth_profile(), vec![1, 4, 8]);
        assert!(b3.contains_ball(b3.root, 3));
        assert!(!b3.contains_ball(b3.root, 4));
    }
}
