//! Finitely presented infinite graphs exposed through a pure neighbor oracle.
//!
//! A [`GraphGenerator`] describes lattices `Z^d`, regular trees `T_d`, glued
//! copies of a family and products of families, with default weights and a
//! finite perturbation table. Any ball `B_R(x0)` can be materialized as a
//! finite [`RootedBall`].

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{GraphBuilder, Label, RootedBall};
use crate::site::Site;
use crate::Ball;

/// Default cap on the number of vertices in one materialized ball.
pub const DEFAULT_BUDGET: usize = 200_000;
const CACHE_SLOTS: usize = 8;

/// Vertex budget, overridable through `CURVGRAPH_BUDGET`.
pub fn default_budget() -> usize {
    std::env::var("CURVGRAPH_BUDGET").ok().and_then(|s| s.trim().parse().ok()).filter(|&b| b > 0).unwrap_or(DEFAULT_BUDGET)
}

/// Combinatorial structure of a generated graph.
#[derive(Clone, Debug, PartialEq)]
pub enum Family {
    Lattice { dim: usize },
    Tree { degree: u32 },
    Product(Vec<Family>),
    /// `copies` copies of `base` with the listed base sites identified across copies.
    Glued { base: Box<Family>, copies: u32, identify: BTreeSet<Site> },
}

impl Family {
    pub fn root(&self) -> Site {
        match self {
            Family::Lattice { dim } => Site::Lattice(vec![0; *dim]),
            Family::Tree { .. } => Site::Tree(Vec::new()),
            Family::Product(parts) => Site::Product(parts.iter().map(Family::root).collect()),
            Family::Glued { base, identify, .. } => glued_canonical(identify, 0, base.root()),
        }
    }

    /// Upper bound on vertex degrees.
    pub fn max_degree(&self) -> usize {
        match self {
            Family::Lattice { dim } => 2 * dim,
            Family::Tree { degree } => *degree as usize,
            Family::Product(parts) => parts.iter().map(Family::max_degree).sum(),
            Family::Glued { base, copies, .. } => base.max_degree() * *copies as usize,
        }
    }

    /// `true` when `s` is a canonical site of this family.
    pub fn is_valid(&self, s: &Site) -> bool {
        match (self, s) {
            (Family::Lattice { dim }, Site::Lattice(c)) => c.len() == *dim,
            (Family::Tree { degree }, Site::Tree(path)) => {
                *degree >= 1
                    && path.iter().enumerate().all(|(i, &k)| if i == 0 { k < *degree } else { k + 1 < *degree })
            }
            (Family::Product(parts), Site::Product(ss)) => {
                parts.len() == ss.len() && parts.iter().zip(ss).all(|(f, s)| f.is_valid(s))
            }
            (Family::Glued { base, copies, identify }, Site::Glued(c, inner)) => {
                *c < *copies && base.is_valid(inner) && (*c == 0 || !identify.contains(inner))
            }
            _ => false,
        }
    }

    /// Canonical form of a site (identified glue points live in copy 0).
    pub fn canonical(&self, s: Site) -> Site {
        match (self, s) {
            (Family::Glued { identify, .. }, Site::Glued(c, inner)) => glued_canonical(identify, c, *inner),
            (_, s) => s,
        }
    }

    /// Neighbors in canonical form, sorted and deduplicated.
    pub fn neighbors(&self, s: &Site) -> Vec<Site> {
        let mut out = match (self, s) {
            (Family::Lattice { .. }, Site::Lattice(c)) => {
                let mut out = Vec::with_capacity(2 * c.len());
                for k in 0..c.len() {
                    for delta in [-1, 1] {
                        let mut t = c.clone();
                        t[k] += delta;
                        out.push(Site::Lattice(t));
                    }
                }
                out
            }
            (Family::Tree { degree }, Site::Tree(path)) => {
                let mut out = Vec::new();
                let children = if path.is_empty() { *degree } else { degree.saturating_sub(1) };
                for k in 0..children {
                    let mut t = path.clone();
                    t.push(k);
                    out.push(Site::Tree(t));
                }
                if !path.is_empty() {
                    out.push(Site::Tree(path[..path.len() - 1].to_vec()));
                }
                out
            }
            (Family::Product(parts), Site::Product(ss)) => {
                let mut out = Vec::new();
                for (k, (f, sk)) in parts.iter().zip(ss).enumerate() {
                    for t in f.neighbors(sk) {
                        let mut next = ss.clone();
                        next[k] = t;
                        out.push(Site::Product(next));
                    }
                }
                out
            }
            (Family::Glued { base, copies, identify }, Site::Glued(c, inner)) => {
                let copy_range: Vec<u32> = if identify.contains(inner.as_ref()) { (0..*copies).collect() } else { vec![*c] };
                let mut out = Vec::new();
                for t in base.neighbors(inner) {
                    for &cc in &copy_range {
                        out.push(glued_canonical(identify, cc, t.clone()));
                    }
                }
                out
            }
            _ => Vec::new(),
        };
        out.sort();
        out.dedup();
        out
    }
}

fn glued_canonical(identify: &BTreeSet<Site>, copy: u32, inner: Site) -> Site {
    if identify.contains(&inner) {
        Site::Glued(0, Box::new(inner))
    } else {
        Site::Glued(copy, Box::new(inner))
    }
}

fn pair_key(a: Site, b: Site) -> (Site, Site) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

type BallCache = Arc<Mutex<HashMap<(Site, usize), Arc<Ball>>>>;

/// Infinite weighted graph given by a family, default weights and a finite perturbation table.
#[derive(Debug)]
pub struct GraphGenerator {
    family: Family,
    base_m: f64,
    base_w: f64,
    perturb_m: BTreeMap<Site, f64>,
    perturb_w: BTreeMap<(Site, Site), f64>,
    bg_constant: f64,
    r_pert: usize,
    budget: usize,
    cache: BallCache,
}

impl Clone for GraphGenerator {
    fn clone(&self) -> Self {
        GraphGenerator {
            family: self.family.clone(),
            base_m: self.base_m,
            base_w: self.base_w,
            perturb_m: self.perturb_m.clone(),
            perturb_w: self.perturb_w.clone(),
            bg_constant: self.bg_constant,
            r_pert: self.r_pert,
            budget: self.budget,
            cache: Arc::default(),
        }
    }
}

impl GraphGenerator {
    /// Unit-weight generator with the bounded-geometry constant implied by the family.
    pub fn new(family: Family) -> Self {
        let c = family.max_degree().max(1) as f64;
        GraphGenerator {
            family,
            base_m: 1.0,
            base_w: 1.0,
            perturb_m: BTreeMap::new(),
            perturb_w: BTreeMap::new(),
            bg_constant: c,
            r_pert: 0,
            budget: default_budget(),
            cache: Arc::default(),
        }
    }

    pub fn lattice(dim: usize) -> Self {
        Self::new(Family::Lattice { dim })
    }

    pub fn tree(degree: u32) -> Self {
        Self::new(Family::Tree { degree })
    }

    /// `copies` copies of `base` identified at its root.
    pub fn glued_at_root(base: Family, copies: u32) -> Self {
        let identify = BTreeSet::from([base.root()]);
        Self::new(Family::Glued { base: Box::new(base), copies, identify })
    }

    pub fn product(factors: Vec<Family>) -> Self {
        Self::new(Family::Product(factors))
    }

    pub fn with_weights(mut self, m: f64, w: f64) -> Result<Self> {
        if !(m > 0.0 && w > 0.0) {
            return Err(Error::Domain("default weights must be positive".into()));
        }
        self.base_m = m;
        self.base_w = w;
        self.cache = Arc::default();
        Ok(self)
    }

    pub fn with_constant(mut self, c: f64) -> Self {
        self.bg_constant = c;
        self
    }

    pub fn with_budget(mut self, budget: usize) -> Self {
        self.budget = budget.max(1);
        self
    }

    /// Override `m` at a site. The site must lie within the declared perturbation radius.
    pub fn perturb_mass(mut self, site: Site, m: f64) -> Result<Self> {
        let site = self.family.canonical(site);
        if !self.family.is_valid(&site) {
            return Err(Error::Domain(format!("perturbed site {site} is not a vertex")));
        }
        if !(m > 0.0) {
            return Err(Error::Domain(format!("perturbed weight at {site} must be positive")));
        }
        self.perturb_m.insert(site, m);
        self.cache = Arc::default();
        Ok(self)
    }

    /// Override `w` on an edge.
    pub fn perturb_edge(mut self, a: Site, b: Site, w: f64) -> Result<Self> {
        let (a, b) = (self.family.canonical(a), self.family.canonical(b));
        if !self.family.is_valid(&a) || !self.family.neighbors(&a).contains(&b) {
            return Err(Error::Domain(format!("perturbed pair {a}-{b} is not an edge")));
        }
        if !(w > 0.0) {
            return Err(Error::Domain(format!("perturbed weight on {a}-{b} must be positive")));
        }
        self.perturb_w.insert(pair_key(a, b), w);
        self.cache = Arc::default();
        Ok(self)
    }

    /// Declare the radius around the root that contains every perturbation.
    pub fn with_perturbation_radius(mut self, r: usize) -> Result<Self> {
        self.r_pert = r;
        self.check_perturbation_radius()?;
        Ok(self)
    }

    fn check_perturbation_radius(&self) -> Result<()> {
        if self.perturb_m.is_empty() && self.perturb_w.is_empty() {
            return Ok(());
        }
        let depth = self.site_depths(&self.root(), self.r_pert)?;
        let outside = self
            .perturb_m
            .keys()
            .chain(self.perturb_w.keys().flat_map(|(a, b)| [a, b]))
            .find(|s| !depth.contains_key(*s));
        match outside {
            Some(s) => Err(Error::Domain(format!("perturbation at {s} lies outside radius {} of the root", self.r_pert))),
            None => Ok(()),
        }
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn root(&self) -> Site {
        self.family.root()
    }

    pub fn bg_constant(&self) -> f64 {
        self.bg_constant
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    pub fn perturbation_radius(&self) -> usize {
        self.r_pert
    }

    pub fn validate_site(&self, s: &Site) -> Result<Site> {
        let c = self.family.canonical(s.clone());
        if self.family.is_valid(&c) {
            Ok(c)
        } else {
            Err(Error::Domain(format!("{s} is not a vertex of the generator")))
        }
    }

    pub fn mass(&self, s: &Site) -> f64 {
        self.perturb_m.get(s).copied().unwrap_or(self.base_m)
    }

    pub fn edge_weight(&self, a: &Site, b: &Site) -> f64 {
        self.perturb_w.get(&pair_key(a.clone(), b.clone())).copied().unwrap_or(self.base_w)
    }

    /// Weighted neighbor oracle.
    pub fn neighbors(&self, s: &Site) -> Vec<(Site, f64)> {
        self.family.neighbors(s).into_iter().map(|t| {
            let w = self.edge_weight(s, &t);
            (t, w)
        }).collect()
    }

    fn site_depths(&self, x0: &Site, radius: usize) -> Result<HashMap<Site, usize>> {
        let x0 = self.validate_site(x0)?;
        let mut depth = HashMap::from([(x0.clone(), 0usize)]);
        let mut queue = VecDeque::from([x0]);
        while let Some(x) = queue.pop_front() {
            let d = depth[&x];
            if d == radius {
                continue;
            }
            for y in self.family.neighbors(&x) {
                if !depth.contains_key(&y) {
                    if depth.len() >= self.budget {
                        return Err(Error::Resource {
                            what: format!("ball of radius {radius}"),
                            needed: depth.len() + 1,
                            budget: self.budget,
                        });
                    }
                    depth.insert(y.clone(), d + 1);
                    queue.push_back(y);
                }
            }
        }
        Ok(depth)
    }

    /// Materialize `B_R(x0)`. Vertex ids follow site order, so ids are deterministic.
    pub fn materialize_ball(&self, x0: &Site, radius: usize) -> Result<Arc<Ball>> {
        let x0 = self.validate_site(x0)?;
        let key = (x0.clone(), radius);
        if let Some(hit) = self.cache.lock().unwrap().get(&key) {
            return Ok(Arc::clone(hit));
        }
        let depth = self.site_depths(&x0, radius)?;
        let mut b = GraphBuilder::new();
        let mut sites: Vec<&Site> = depth.keys().collect();
        sites.sort();
        for s in &sites {
            b.vertex(Label::Site((*s).clone()), self.mass(s))?;
        }
        for s in &sites {
            for (t, w) in self.neighbors(s) {
                if *s < &t && depth.contains_key(&t) {
                    b.edge(Label::Site((*s).clone()), Label::Site(t), w)?;
                }
            }
        }
        let graph = b.build()?;
        let root = graph.id_of(&Label::Site(x0)).unwrap();
        let depth_vec = graph
            .vertices()
            .map(|v| match graph.label(v) {
                Label::Site(s) => depth[s],
                _ => unreachable!(),
            })
            .collect();
        let ball = Arc::new(RootedBall { graph, root, radius, depth: depth_vec });
        let mut cache = self.cache.lock().unwrap();
        if cache.len() >= CACHE_SLOTS {
            cache.clear();
        }
        cache.insert(key, Arc::clone(&ball));
        Ok(ball)
    }

    /// Ball around the root.
    pub fn root_ball(&self, radius: usize) -> Result<Arc<Ball>> {
        self.materialize_ball(&self.root(), radius)
    }

    /// Check Definition-style bounded geometry on `B_{sample_radius}(root)` and the perturbation table.
    pub fn validate_bounded_geometry(&self, sample_radius: usize) -> Result<BoundedGeometryReport> {
        let c = self.bg_constant;
        let depth = self.site_depths(&self.root(), sample_radius)?;
        let mut sites: Vec<Site> = depth.into_keys().collect();
        sites.extend(self.perturb_m.keys().cloned());
        sites.extend(self.perturb_w.keys().flat_map(|(a, b)| [a.clone(), b.clone()]));
        sites.sort();
        sites.dedup();
        let mut witnesses = Vec::new();
        let mut edges_checked = 0;
        let in_range = |x: f64| x >= 1.0 / c && x <= c;
        for s in &sites {
            let nbrs = self.neighbors(s);
            if nbrs.len() as f64 > c {
                witnesses.push(format!("deg({s}) = {} > {c}", nbrs.len()));
            }
            let m = self.mass(s);
            if !in_range(m) {
                witnesses.push(format!("m({s}) = {m} outside [{}, {c}]", 1.0 / c));
            }
            for (t, w) in &nbrs {
                let back = self.neighbors(t);
                match back.iter().find(|(u, _)| u == s) {
                    None => return Err(Error::Integrity(format!("{t} is a neighbor of {s} but not conversely"))),
                    Some((_, wb)) if wb != w => {
                        return Err(Error::Integrity(format!("w({s},{t}) = {w} but w({t},{s}) = {wb}")))
                    }
                    _ => {}
                }
                if s < t {
                    edges_checked += 1;
                    if !in_range(*w) {
                        witnesses.push(format!("w({s},{t}) = {w} outside [{}, {c}]", 1.0 / c));
                    }
                }
            }
        }
        Ok(BoundedGeometryReport { constant: c, sample_radius, vertices_checked: sites.len(), edges_checked, pass: witnesses.is_empty(), witnesses })
    }
}

/// Outcome of a bounded-geometry check.
#[derive(Clone, Debug, Serialize)]
pub struct BoundedGeometryReport {
    pub constant: f64,
    pub sample_radius: usize,
    pub vertices_checked: usize,
    pub edges_checked: usize,
    pub pass: bool,
    pub witnesses: Vec<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FamilySpec {
    family: String,
    #[serde(default)]
    d: Option<usize>,
    #[serde(default)]
    degree: Option<u32>,
    #[serde(default)]
    factors: Vec<FamilySpec>,
    #[serde(default)]
    base: Option<Box<FamilySpec>>,
    #[serde(default)]
    copies: Option<u32>,
    #[serde(default)]
    identify: Option<Vec<Site>>,
    #[serde(default)]
    glue: Option<GlueSpec>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GlueSpec {
    #[serde(default = "two")]
    copies: u32,
    #[serde(default)]
    identify: Option<Vec<Site>>,
}

fn two() -> u32 {
    2
}

#[derive(Deserialize)]
struct MassEntry {
    site: Site,
    m: f64,
}

#[derive(Deserialize)]
struct WeightEntry {
    u: Site,
    v: Site,
    w: f64,
}

#[derive(Deserialize)]
struct GeneratorSpec {
    #[serde(flatten)]
    family: FamilySpec,
    #[serde(default = "one")]
    m: f64,
    #[serde(default = "one")]
    w: f64,
    #[serde(default)]
    perturb_m: Vec<MassEntry>,
    #[serde(default)]
    perturb_w: Vec<WeightEntry>,
    #[serde(rename = "C", default)]
    c: Option<f64>,
    #[serde(default)]
    r_pert: Option<usize>,
}

fn one() -> f64 {
    1.0
}

fn family_from_spec(spec: &FamilySpec) -> Result<Family> {
    let plain = match spec.family.as_str() {
        "lattice" => Family::Lattice { dim: spec.d.ok_or_else(|| Error::Domain("lattice needs \"d\"".into()))? },
        "tree" => Family::Tree { degree: spec.degree.or(spec.d.map(|d| d as u32)).ok_or_else(|| Error::Domain("tree needs \"degree\"".into()))? },
        "product" => {
            if spec.factors.is_empty() {
                return Err(Error::Domain("product needs \"factors\"".into()));
            }
            Family::Product(spec.factors.iter().map(family_from_spec).collect::<Result<_>>()?)
        }
        "glued" => {
            let base = family_from_spec(spec.base.as_deref().ok_or_else(|| Error::Domain("glued needs \"base\"".into()))?)?;
            return glue(base, spec.copies.unwrap_or(2), spec.identify.clone());
        }
        other => return Err(Error::Domain(format!("unknown family {other:?}"))),
    };
    match &spec.glue {
        Some(g) => glue(plain, g.copies, g.identify.clone()),
        None => Ok(plain),
    }
}

fn glue(base: Family, copies: u32, identify: Option<Vec<Site>>) -> Result<Family> {
    if copies < 1 {
        return Err(Error::Domain("glue needs at least one copy".into()));
    }
    let identify: BTreeSet<Site> = identify.unwrap_or_else(|| vec![base.root()]).into_iter().collect();
    if let Some(bad) = identify.iter().find(|s| !base.is_valid(s)) {
        return Err(Error::Domain(format!("identified site {bad} is not a vertex of the base family")));
    }
    Ok(Family::Glued { base: Box::new(base), copies, identify })
}

/// Parse a generator description.
///
/// `{"family":"lattice","d":3,"m":1.0,"w":1.0,"glue":{"copies":2},"perturb_m":[...],"perturb_w":[...],"C":6.0}`
pub fn parse_generator(text: &str) -> Result<GraphGenerator> {
    let spec: GeneratorSpec = serde_json::from_str(text)?;
    let family = family_from_spec(&spec.family)?;
    let mut gen = GraphGenerator::new(family).with_weights(spec.m, spec.w)?;
    let implied = gen.family.max_degree().max(1) as f64;
    let implied = implied.max(spec.m).max(1.0 / spec.m).max(spec.w).max(1.0 / spec.w);
    gen.bg_constant = spec.c.unwrap_or(implied);
    for e in spec.perturb_m {
        gen = gen.perturb_mass(e.site, e.m)?;
    }
    for e in spec.perturb_w {
        gen = gen.perturb_edge(e.u, e.v, e.w)?;
    }
    let r = match spec.r_pert {
        Some(r) => r,
        None => gen.smallest_perturbation_radius()?,
    };
    gen.with_perturbation_radius(r)
}

pub fn read_generator(path: impl AsRef<std::path::Path>) -> Result<GraphGenerator> {
    parse_generator(&std::fs::read_to_string(path)?)
}

impl GraphGenerator {
    fn smallest_perturbation_radius(&self) -> Result<usize> {
        let targets: BTreeSet<&Site> =
            self.perturb_m.keys().chain(self.perturb_w.keys().flat_map(|(a, b)| [a, b])).collect();
        if targets.is_empty() {
            return Ok(0);
        }
        let mut r = 0;
        loop {
            let depth = self.site_depths(&self.root(), r)?;
            if targets.iter().all(|s| depth.contains_key(*s)) {
                return Ok(r);
            }
            r += 1;
        }
    }
}

/// Rule producing the root `p_i` for index `i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RootRule {
    Fixed(Site),
    /// `p_i = start + i · step` on the innermost lattice coordinates.
    Ray { start: Site, step: Vec<i64> },
    List(Vec<Site>),
}

/// Edge weight schedule `w_i = w + amp / i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeDecay {
    pub u: Site,
    pub v: Site,
    pub amp: f64,
}

/// Vertex weight schedule `m_i = m + amp / i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MassDecay {
    pub site: Site,
    pub amp: f64,
}

/// Sequence of rooted graphs `(G_i, p_i)` built from one generator.
#[derive(Clone, Debug)]
pub struct RootedGeneratorSequence {
    base: Arc<GraphGenerator>,
    pub roots: RootRule,
    pub decay_w: Vec<EdgeDecay>,
    pub decay_m: Vec<MassDecay>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SequenceSpec {
    #[serde(default)]
    fixed: Option<Site>,
    #[serde(default)]
    ray: Option<RaySpec>,
    #[serde(default)]
    list: Option<Vec<Site>>,
    #[serde(default)]
    decay_w: Vec<EdgeDecay>,
    #[serde(default)]
    decay_m: Vec<MassDecay>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RaySpec {
    start: Site,
    step: Vec<i64>,
}

impl RootedGeneratorSequence {
    pub fn new(generator: GraphGenerator, roots: RootRule) -> Self {
        RootedGeneratorSequence { base: Arc::new(generator), roots, decay_w: Vec::new(), decay_m: Vec::new() }
    }

    /// Constant sequence `(G, root)`.
    pub fn constant(generator: GraphGenerator) -> Self {
        let root = generator.root();
        Self::new(generator, RootRule::Fixed(root))
    }

    pub fn with_edge_decay(mut self, u: Site, v: Site, amp: f64) -> Self {
        self.decay_w.push(EdgeDecay { u, v, amp });
        self
    }

    pub fn with_mass_decay(mut self, site: Site, amp: f64) -> Self {
        self.decay_m.push(MassDecay { site, amp });
        self
    }

    /// Parse `{"ray":{"start":..,"step":[..]}}`, `{"fixed":site}` or `{"list":[..]}` with optional decays.
    pub fn parse(generator: GraphGenerator, text: &str) -> Result<Self> {
        let spec: SequenceSpec = serde_json::from_str(text)?;
        let roots = match (spec.fixed, spec.ray, spec.list) {
            (Some(s), None, None) => RootRule::Fixed(s),
            (None, Some(r), None) => RootRule::Ray { start: r.start, step: r.step },
            (None, None, Some(l)) => RootRule::List(l),
            (None, None, None) => RootRule::Fixed(generator.root()),
            _ => return Err(Error::Domain("give exactly one of \"fixed\", \"ray\", \"list\"".into())),
        };
        let mut seq = Self::new(generator, roots);
        seq.decay_w = spec.decay_w;
        seq.decay_m = spec.decay_m;
        Ok(seq)
    }

    pub fn base(&self) -> &GraphGenerator {
        &self.base
    }

    pub fn root_at(&self, i: usize) -> Result<Site> {
        let site = match &self.roots {
            RootRule::Fixed(s) => s.clone(),
            RootRule::Ray { start, step } => {
                let offset: Vec<i64> = step.iter().map(|s| s * i as i64).collect();
                start.translated(&offset).ok_or_else(|| Error::Domain(format!("cannot translate {start} by {offset:?}")))?
            }
            RootRule::List(l) => l.get(i).cloned().ok_or_else(|| Error::Domain(format!("root list has no index {i}")))?,
        };
        self.base.validate_site(&site)
    }

    /// The graph `G_i`; shares the base generator when no decay is configured.
    pub fn generator_at(&self, i: usize) -> Result<Arc<GraphGenerator>> {
        if self.decay_w.is_empty() && self.decay_m.is_empty() {
            return Ok(Arc::clone(&self.base));
        }
        if i == 0 {
            return Err(Error::Domain("weight schedules are indexed from 1".into()));
        }
        let mut g = (*self.base).clone();
        for d in &self.decay_w {
            let (a, b) = (g.validate_site(&d.u)?, g.validate_site(&d.v)?);
            let w = g.edge_weight(&a, &b) + d.amp / i as f64;
            g = g.perturb_edge(a, b, w)?;
        }
        for d in &self.decay_m {
            let s = g.validate_site(&d.site)?;
            let m = g.mass(&s) + d.amp / i as f64;
            g = g.perturb_mass(s, m)?;
        }
        let r = g.smallest_perturbation_radius()?.max(g.r_pert);
        Ok(Arc::new(g.with_perturbation_radius(r)?))
    }

    /// `B_R(p_i)` in `G_i`.
    pub fn ball_at(&self, i: usize, radius: usize) -> Result<Arc<Ball>> {
        self.generator_at(i)?.materialize_ball(&self.root_at(i)?, radius)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lattice_sphere_count(d: usize, r: usize) -> usize {
        // |{x ∈ Z^d : |x|_1 = r}| = Σ_k 2^k C(d,k) C(r-1,k-1)
        if r == 0 {
            return 1;
        }
        let binom = |n: usize, k: usize| -> usize {
            if k > n {
                return 0;
            }
            (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
        };
        (1..=d.min(r)).map(|k| (1 << k) * binom(d, k) * binom(r - 1, k - 1)).sum()
    }

    #[test]
    fn small_balls() {
        let z2 = GraphGenerator::lattice(2);
        let b = z2.root_ball(1).unwrap();
        assert_eq!((b.graph.vertex_count(), b.graph.edge_count()), (5, 4));
        let t3 = GraphGenerator::tree(3);
        assert_eq!(t3.root_ball(2).unwrap().graph.vertex_count(), 10);
        let glued = GraphGenerator::glued_at_root(Family::Lattice { dim: 3 }, 2);
        assert_eq!(glued.root_ball(1).unwrap().graph.vertex_count(), 13);
        assert_eq!(glued.root_ball(2).unwrap().sphere(2).len(), 36);
    }

    #[test]
    fn sphere_counts_match_closed_form() {
        for d in 1..=4 {
            let g = GraphGenerator::lattice(d);
            let radius = if d <= 2 { 6 } else { 4 };
            let ball = g.root_ball(radius).unwrap();
            for r in 0..=radius {
                assert_eq!(ball.sphere(r).len(), lattice_sphere_count(d, r), "d={d} r={r}");
            }
        }
        assert_eq!(lattice_sphere_count(3, 2), 18);
    }

    #[test]
    fn balls_are_nested() {
        let gen = GraphGenerator::glued_at_root(Family::Lattice { dim: 2 }, 2)
            .perturb_edge(Site::Glued(0, Box::new(Site::Lattice(vec![0, 0]))), Site::Glued(1, Box::new(Site::Lattice(vec![1, 0]))), 2.5)
            .unwrap()
            .with_perturbation_radius(1)
            .unwrap();
        for r in 0..4 {
            let small = gen.root_ball(r).unwrap();
            let big = gen.root_ball(r + 1).unwrap().restrict(r);
            assert_eq!(small.graph.labels(), big.graph.labels());
            assert_eq!(small.graph.edges(), big.graph.edges());
            assert_eq!(small.depth, big.depth);
        }
    }

    #[test]
    fn bounded_geometry() {
        let z3 = GraphGenerator::lattice(3).with_constant(6.0);
        assert!(z3.validate_bounded_geometry(3).unwrap().pass);
        let t3 = GraphGenerator::tree(3).with_constant(3.0);
        assert!(t3.validate_bounded_geometry(3).unwrap().pass);
        let z = GraphGenerator::lattice(1)
            .with_constant(6.0)
            .perturb_edge(Site::Lattice(vec![0]), Site::Lattice(vec![1]), 10.0)
            .unwrap()
            .with_perturbation_radius(1)
            .unwrap();
        let rep = z.validate_bounded_geometry(3).unwrap();
        assert!(!rep.pass);
        assert!(rep.witnesses.iter().any(|w| w.contains("w((0),(1)) = 10")));
    }

    #[test]
    fn oracle_is_symmetric() {
        let families = [
            Family::Lattice { dim: 3 },
            Family::Tree { degree: 4 },
            Family::Product(vec![Family::Lattice { dim: 1 }, Family::Tree { degree: 3 }]),
            Family::Glued { base: Box::new(Family::Lattice { dim: 2 }), copies: 3, identify: BTreeSet::from([Site::Lattice(vec![0, 0]), Site::Lattice(vec![1, 0])]) },
        ];
        for f in families {
            let gen = GraphGenerator::new(f);
            let ball = gen.root_ball(3).unwrap();
            for v in ball.graph.vertices() {
                let Label::Site(s) = ball.graph.label(v) else { unreachable!() };
                for (t, _) in gen.neighbors(s) {
                    assert!(gen.family().neighbors(&t).contains(s));
                }
            }
            assert!(gen.validate_bounded_geometry(2).unwrap().pass);
        }
    }

    #[test]
    fn budget_is_enforced() {
        let g = GraphGenerator::lattice(3).with_budget(100);
        assert!(matches!(g.root_ball(5), Err(Error::Resource { budget: 100, .. })));
    }

    #[test]
    fn parse_specs() {
        let g = parse_generator(r#"{"family":"lattice","d":3,"m":1.0,"w":1.0,"glue":{"copies":2},"C":12.0}"#).unwrap();
        assert_eq!(g.root_ball(1).unwrap().graph.vertex_count(), 13);
        let p = parse_generator(r#"{"family":"lattice","d":1,"perturb_w":[{"u":[0],"v":[1],"w":10.0}],"C":6}"#).unwrap();
        assert_eq!(p.perturbation_radius(), 1);
        assert!(!p.validate_bounded_geometry(2).unwrap().pass);
        let t = parse_generator(r#"{"family":"product","factors":[{"family":"lattice","d":1},{"family":"tree","degree":3}]}"#).unwrap();
        assert_eq!(t.root_ball(1).unwrap().graph.vertex_count(), 6);
        assert!(parse_generator(r#"{"family":"lattice","d":1,"perturb_m":[{"site":[5],"m":2}],"r_pert":2}"#).is_err());
        assert!(parse_generator(r#"{"family":"moebius"}"#).is_err());
    }

    #[test]
    fn sequences() {
        let gen = GraphGenerator::glued_at_root(Family::Lattice { dim: 2 }, 2);
        let seq = RootedGeneratorSequence::parse(gen, r#"{"ray":{"start":{"glued":[1,[0,0]]},"step":[1,0]}}"#).unwrap();
        assert_eq!(seq.root_at(3).unwrap().to_string(), "g1:(3,0)");
        assert_eq!(seq.root_at(0).unwrap().to_string(), "g0:(0,0)");
        let dec = RootedGeneratorSequence::constant(GraphGenerator::lattice(2))
            .with_edge_decay(Site::Lattice(vec![0, 0]), Site::Lattice(vec![1, 0]), 1.0);
        let g4 = dec.generator_at(4).unwrap();
        assert_eq!(g4.edge_weight(&Site::Lattice(vec![0, 0]), &Site::Lattice(vec![1, 0])), 1.25);
        assert!(dec.generator_at(0).is_err());
    }
}
