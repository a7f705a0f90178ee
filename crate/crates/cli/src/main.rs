//! `curvgraph` command-line front end.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use curvgraph::curvature::{self, bakry_emery_curvature, be_sweep, ollivier_curvature, CurvatureMode};
use curvgraph::ends::{self, classify_end, count_ends, ends_wrt, separating_harmonics, ProbeRule};
use curvgraph::generators::{parse_generator, GraphGenerator, RootedGeneratorSequence};
use curvgraph::gh::{curvature_semicontinuity_check, pgh_converges, pgh_limit, ConvergenceVerdict};
use curvgraph::harmonic::{self, dimension_certificate, dirichlet_solve, gradient_decay_profile, gradient_max_principle_check, green_dirichlet, green_limit};
use curvgraph::report::{barrier_table, decay_table, green_table, to_json, write_text, Cell, Table};
use curvgraph::{io, Error, Rational, Result, Scalar, Site};

#[derive(Parser)]
#[command(name = "curvgraph", version, about = "Curvature, harmonic functions and ends on weighted graphs")]
struct Cli {
    /// Emit errors as JSON on stderr.
    #[arg(long, global = true)]
    json_errors: bool,
    /// Emit the tabular form of the report instead of JSON.
    #[arg(long, global = true)]
    csv: bool,
    /// Write the report to this file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Vertex budget for generated balls (overrides CURVGRAPH_BUDGET).
    #[arg(long, global = true)]
    budget: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    #[command(subcommand)]
    Curvature(CurvatureCmd),
    #[command(subcommand)]
    Harmonic(HarmonicCmd),
    #[command(subcommand)]
    Ends(EndsCmd),
    #[command(subcommand)]
    Gh(GhCmd),
    /// Regenerate the example report tree.
    Corpus {
        #[arg(long, default_value = "corpus")]
        dir: PathBuf,
    },
}

#[derive(Subcommand)]
enum CurvatureCmd {
    /// Bakry-Émery curvature at one vertex, or at every vertex with --all.
    Be {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, required_unless_present = "all")]
        vertex: Option<String>,
        #[arg(long)]
        all: bool,
        /// Dimension parameter; `inf` for n = ∞.
        #[arg(long, default_value = "inf")]
        n: String,
    },
    /// Ollivier curvature of one edge.
    Ollivier {
        #[arg(long)]
        graph: PathBuf,
        /// Edge endpoints as `a,b`.
        #[arg(long)]
        edge: String,
        /// Solve in exact rational arithmetic.
        #[arg(long)]
        exact: bool,
    },
    /// Curvature lower bound outside a finite set.
    Outside {
        #[command(flatten)]
        source: Source,
        /// JSON list of sites (generator) or labels (graph), inline or as a file.
        #[arg(long, default_value = "[]")]
        omega: String,
        #[arg(long, default_value = "ollivier")]
        mode: CurvatureMode,
        #[arg(long, default_value_t = 4)]
        probe: usize,
        #[arg(long)]
        tol: Option<f64>,
    },
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct Source {
    #[arg(long)]
    graph: Option<PathBuf>,
    #[arg(long)]
    r#gen: Option<String>,
}

#[derive(Subcommand)]
enum HarmonicCmd {
    /// Dirichlet problem on a finite graph.
    Solve {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        interior: String,
        #[arg(long)]
        boundary: String,
        #[arg(long, default_value_t = harmonic::HARMONIC_TOLERANCE)]
        tol: f64,
    },
    /// Green's function on a ball of a graph, or its radius sweep on a generator.
    Green {
        #[command(flatten)]
        source: Source,
        /// Ball centre (graph) or unused (generator).
        #[arg(long)]
        x0: Option<String>,
        #[arg(long)]
        rho: Option<usize>,
        /// Source vertex or site; defaults to the centre or root.
        #[arg(long)]
        pole: Option<String>,
        #[arg(long, default_value = "2,4,8,16")]
        schedule: String,
        #[arg(long, default_value_t = 1e-3)]
        stall_eps: f64,
        #[arg(long, default_value_t = 1)]
        window: usize,
    },
    /// Dimension bound certificate for bounded harmonic functions.
    Dimbound {
        #[arg(long)]
        r#gen: String,
        #[arg(long, default_value = "root")]
        x0: String,
        #[arg(long, default_value_t = 1)]
        r0: usize,
        #[arg(long, default_value = "ollivier")]
        mode: CurvatureMode,
        #[arg(long, default_value_t = 4)]
        probe: usize,
        /// Override the excluded set (default `B_{R0}(x0)`).
        #[arg(long)]
        omega: Option<String>,
    },
    /// Gradient maximum principle on a finite graph.
    Maxgrad {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        region: String,
        #[arg(long)]
        function: String,
        #[arg(long, default_value_t = 1e-9)]
        curvature_tol: f64,
    },
    /// Gradient decay profile of a function around a vertex.
    Decay {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        x0: String,
        #[arg(long)]
        function: String,
        #[arg(long)]
        radii: String,
    },
}

#[derive(Subcommand)]
enum EndsCmd {
    /// End counts along an exhaustion.
    Count {
        #[arg(long)]
        r#gen: String,
        #[arg(long)]
        exhaustion: String,
        #[arg(long, conflicts_with = "offset")]
        probe: Option<usize>,
        /// Probe radius `r_Ω + offset`.
        #[arg(long)]
        offset: Option<usize>,
        #[command(flatten)]
        classify: ClassifyArgs,
    },
    /// Ends w.r.t. Ω and their parabolicity.
    Classify {
        #[arg(long)]
        r#gen: String,
        #[arg(long)]
        omega: String,
        #[arg(long, default_value_t = 10)]
        probe: usize,
        #[command(flatten)]
        classify: ClassifyArgs,
    },
    /// Bounded harmonic functions separating the non-parabolic ends.
    Basis {
        #[arg(long)]
        r#gen: String,
        #[arg(long)]
        omega: String,
        #[arg(long, default_value_t = 10)]
        probe: usize,
        #[arg(long, default_value_t = 12)]
        rho: usize,
    },
}

#[derive(Args)]
struct ClassifyArgs {
    #[arg(long, default_value = "4,6,8,10,12")]
    schedule: String,
    #[arg(long, default_value_t = ends::DEFAULT_MARGIN)]
    margin: f64,
    #[arg(long, default_value_t = ends::DEFAULT_STALL_EPS)]
    stall_eps: f64,
}

#[derive(Args)]
struct SequenceArgs {
    #[arg(long)]
    r#gen: String,
    /// Root rule: `{"fixed":site}`, `{"ray":{"start":site,"step":[..]}}` or `{"list":[..]}`.
    #[arg(long, default_value = "{}")]
    roots: String,
    /// `a..b`, `a..b:step` or a comma list.
    #[arg(long)]
    indices: String,
    #[arg(long, default_value_t = 1e-3)]
    eps: f64,
}

#[derive(Subcommand)]
enum GhCmd {
    /// Ball stabilization and weight convergence.
    Check {
        #[command(flatten)]
        seq: SequenceArgs,
        #[arg(long)]
        radius: usize,
    },
    /// Limit ball at a radius.
    Limit {
        #[command(flatten)]
        seq: SequenceArgs,
        #[arg(long)]
        radius: usize,
    },
    /// Curvature semicontinuity along a converging sequence.
    Semicontinuity {
        #[command(flatten)]
        seq: SequenceArgs,
        #[arg(long, default_value = "ollivier")]
        mode: CurvatureMode,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
}

/// A rendered report and whether its verdict passed.
struct Outcome {
    json: String,
    csv: Option<String>,
    pass: bool,
}

impl Outcome {
    fn new<T: serde::Serialize>(report: &T, csv: Option<Table>, pass: bool) -> Result<Self> {
        Ok(Outcome { json: to_json(report)?, csv: csv.map(|t| t.to_csv()), pass })
    }
}

/// Inline JSON or the contents of a file.
fn text_arg(arg: &str) -> Result<String> {
    let p = Path::new(arg);
    if p.is_file() {
        Ok(std::fs::read_to_string(p)?)
    } else {
        Ok(arg.to_string())
    }
}

fn load_generator(arg: &str, budget: Option<usize>) -> Result<GraphGenerator> {
    let g = parse_generator(&text_arg(arg)?)?;
    Ok(match budget {
        Some(b) => g.with_budget(b),
        None => g,
    })
}

fn site_arg(gen: &GraphGenerator, arg: &str) -> Result<Site> {
    if arg == "root" {
        return Ok(gen.root());
    }
    let s = Site::parse(arg).ok_or_else(|| Error::Domain(format!("cannot parse site {arg:?}")))?;
    gen.validate_site(&s)
}

fn parse_n(s: &str) -> Result<f64> {
    if s == "inf" {
        return Ok(f64::INFINITY);
    }
    s.parse::<f64>().ok().filter(|n| *n > 0.0).ok_or_else(|| Error::Domain(format!("dimension must be positive or inf, got {s:?}")))
}

/// `a..b` (inclusive), `a..b:step` or `a,b,c`; must be strictly increasing.
fn parse_list(s: &str) -> Result<Vec<usize>> {
    let bad = || Error::Domain(format!("cannot parse index list {s:?}"));
    let out: Vec<usize> = if let Some((lo, rest)) = s.split_once("..") {
        let (hi, step) = match rest.split_once(':') {
            Some((hi, st)) => (hi, st.parse::<usize>().map_err(|_| bad())?),
            None => (rest, 1),
        };
        let lo: usize = lo.trim().parse().map_err(|_| bad())?;
        let hi: usize = hi.trim().parse().map_err(|_| bad())?;
        if step == 0 {
            return Err(bad());
        }
        (lo..=hi).step_by(step).collect()
    } else {
        s.split(',').map(|t| t.trim().parse().map_err(|_| bad())).collect::<Result<_>>()?
    };
    if out.is_empty() || out.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Domain(format!("list {s:?} must be non-empty and strictly increasing")));
    }
    Ok(out)
}

fn positive(name: &str, x: f64) -> Result<f64> {
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(Error::Domain(format!("{name} must be positive, got {x}")))
    }
}

fn run(cli: &Cli) -> Result<Outcome> {
    let budget = cli.budget;
    if budget == Some(0) {
        return Err(Error::Domain("budget must be positive".into()));
    }
    match &cli.command {
        Command::Curvature(c) => curvature_cmd(c, budget),
        Command::Harmonic(c) => harmonic_cmd(c, budget),
        Command::Ends(c) => ends_cmd(c, budget),
        Command::Gh(c) => gh_cmd(c, budget),
        Command::Corpus { dir } => {
            let files = curvgraph::corpus::run_corpus(dir)?;
            let mut t = Table::new(&["file"]);
            for f in &files {
                t.push(vec![f.as_str().into()]);
            }
            Outcome::new(&serde_json::json!({ "dir": dir.display().to_string(), "files": files }), Some(t), true)
        }
    }
}

fn curvature_cmd(c: &CurvatureCmd, budget: Option<usize>) -> Result<Outcome> {
    match c {
        CurvatureCmd::Be { graph, vertex, all, n } => {
            let g = io::read_graph(graph)?;
            let n = parse_n(n)?;
            if *all {
                let vs: Vec<_> = g.vertices().collect();
                let sweep = be_sweep(&g, &vs, n)?;
                let mut t = Table::new(&["vertex", "curvature", "degenerate"]);
                let mut json = BTreeMap::new();
                for (v, r) in &sweep {
                    t.push(vec![g.label(*v).to_string().into(), r.curvature.into(), r.degenerate.to_string().into()]);
                    json.insert(g.label(*v).to_string(), r.curvature);
                }
                return Outcome::new(&json, Some(t), true);
            }
            let x = g.resolve(vertex.as_deref().unwrap())?;
            let r = bakry_emery_curvature(&g, x, n)?;
            let json = serde_json::json!({
                "vertex": g.label(x).to_string(),
                "n": if n.is_finite() { serde_json::json!(n) } else { serde_json::json!("inf") },
                "curvature": r.curvature,
                "degenerate": r.degenerate,
                "tolerance": r.tolerance,
                "bisection_steps": r.bisection_steps,
                "witness": r.witness.labeled(&g),
            });
            Outcome::new(&json, None, true)
        }
        CurvatureCmd::Ollivier { graph, edge, exact } => {
            let g = io::read_graph(graph)?;
            let (a, b) = edge.split_once(',').ok_or_else(|| Error::Domain(format!("edge must be `a,b`, got {edge:?}")))?;
            let (x, y) = (g.resolve(a.trim())?, g.resolve(b.trim())?);
            let json = if *exact {
                let q = g.map_scalar(|w| Rational::of(*w));
                let r = ollivier_curvature(&q, x, y)?;
                serde_json::json!({
                    "edge": [g.label(x).to_string(), g.label(y).to_string()],
                    "kappa": r.kappa.to_f64_lossy(),
                    "kappa_exact": r.kappa.to_string(),
                    "lp_status": r.lp_status,
                    "duality_gap": r.duality_gap.to_string(),
                    "max_violation": r.max_violation.to_string(),
                })
            } else {
                let r = ollivier_curvature(&g, x, y)?;
                serde_json::json!({
                    "edge": [g.label(x).to_string(), g.label(y).to_string()],
                    "kappa": r.kappa,
                    "lp_status": r.lp_status,
                    "duality_gap": r.duality_gap,
                    "max_violation": r.max_violation,
                    "optimizer": r.optimizer.labeled(&g),
                })
            };
            Outcome::new(&json, None, true)
        }
        CurvatureCmd::Outside { source, omega, mode, probe, tol } => {
            let tol = positive("tol", tol.unwrap_or_else(|| curvature::default_outside_tolerance(*mode)))?;
            let rep = match (&source.graph, &source.r#gen) {
                (Some(path), _) => {
                    let g = io::read_graph(path)?;
                    let om = io::parse_vertex_set(&g, &text_arg(omega)?)?;
                    curvature::curvature_outside_graph(&g, &om, *mode, tol)?
                }
                (None, Some(gen)) => {
                    let gen = load_generator(gen, budget)?;
                    let om = io::parse_sites(&text_arg(omega)?)?;
                    curvature::curvature_outside(&gen, &om, *mode, *probe, tol)?
                }
                (None, None) => unreachable!("clap enforces a source"),
            };
            let mut t = Table::new(&["at", "value"]);
            for v in &rep.violations {
                t.push(vec![v.at.clone().into(), v.value.into()]);
            }
            let pass = rep.pass;
            Outcome::new(&rep, Some(t), pass)
        }
    }
}

fn labeled_table(values: &BTreeMap<String, f64>) -> Table {
    let mut t = Table::new(&["vertex", "value"]);
    for (k, &v) in values {
        t.push(vec![k.clone().into(), v.into()]);
    }
    t
}

fn harmonic_cmd(c: &HarmonicCmd, budget: Option<usize>) -> Result<Outcome> {
    match c {
        HarmonicCmd::Solve { graph, interior, boundary, tol } => {
            let g = io::read_graph(graph)?;
            let interior = io::parse_vertex_set(&g, &text_arg(interior)?)?;
            let data = io::parse_values(&g, &text_arg(boundary)?)?;
            let sol = dirichlet_solve(&g, &interior, &data, positive("tol", *tol)?)?;
            let values = sol.values.labeled(&g);
            let json = serde_json::json!({ "values": values, "residual": sol.residual, "solver": sol.solver });
            Outcome::new(&json, Some(labeled_table(&values)), true)
        }
        HarmonicCmd::Green { source, x0, rho, pole, schedule, stall_eps, window } => match (&source.graph, &source.r#gen) {
            (Some(path), _) => {
                let g = io::read_graph(path)?;
                let x0 = g.resolve(x0.as_deref().ok_or_else(|| Error::Domain("--x0 is required with --graph".into()))?)?;
                let rho = rho.ok_or_else(|| Error::Domain("--rho is required with --graph".into()))?;
                let x1 = match pole {
                    Some(p) => g.resolve(p)?,
                    None => x0,
                };
                let gf = green_dirichlet(&g, x0, rho, x1, harmonic::HARMONIC_TOLERANCE)?;
                let values = gf.values.labeled(&g);
                let json = serde_json::json!({ "rho": rho, "source": g.label(x1).to_string(), "values": values, "solver": gf.solver });
                Outcome::new(&json, Some(labeled_table(&values)), true)
            }
            (None, Some(gen)) => {
                let gen = load_generator(gen, budget)?;
                let x1 = site_arg(&gen, pole.as_deref().unwrap_or("root"))?;
                let rep = green_limit(&gen, &x1, &parse_list(schedule)?, positive("stall-eps", *stall_eps)?, *window)?;
                let t = green_table(&rep);
                Outcome::new(&rep, Some(t), true)
            }
            (None, None) => unreachable!("clap enforces a source"),
        },
        HarmonicCmd::Dimbound { r#gen, x0, r0, mode, probe, omega } => {
            let gen = load_generator(r#gen, budget)?;
            let x0 = site_arg(&gen, x0)?;
            let omega = omega.as_deref().map(|o| text_arg(o).and_then(|t| io::parse_sites(&t))).transpose()?;
            let cert = dimension_certificate(&gen, &x0, *r0, *mode, *probe, omega.as_deref(), None)?;
            let mut t = Table::new(&["x0", "r0", "sphere_count", "certified", "violations"]);
            t.push(vec![
                cert.x0.clone().into(),
                cert.r0.into(),
                cert.sphere_count.into(),
                cert.certified.to_string().into(),
                cert.curvature_report.violations.len().into(),
            ]);
            let pass = cert.certified;
            Outcome::new(&cert, Some(t), pass)
        }
        HarmonicCmd::Maxgrad { graph, region, function, curvature_tol } => {
            let g = io::read_graph(graph)?;
            let w = io::parse_vertex_set(&g, &text_arg(region)?)?;
            let u = io::parse_function(&g, &text_arg(function)?)?;
            let rep = gradient_max_principle_check(&g, &w, &u, positive("curvature-tol", *curvature_tol)?)?;
            let pass = rep.holds;
            Outcome::new(&rep, None, pass)
        }
        HarmonicCmd::Decay { graph, x0, function, radii } => {
            let g = io::read_graph(graph)?;
            let x0 = g.resolve(x0)?;
            let radii = parse_list(radii)?;
            let ball = g.ball(x0, radii.last().unwrap() + 2)?;
            let u_full = io::parse_function(&g, &text_arg(function)?)?;
            let mut u = curvgraph::Function::undefined(ball.graph.vertex_count());
            for v in ball.graph.vertices() {
                if let Some(&x) = g.id_of(ball.graph.label(v)).and_then(|w| u_full.value(w)) {
                    u.set(v, x);
                }
            }
            let rows = gradient_decay_profile(&ball, &u, &radii)?;
            let t = decay_table(&rows);
            Outcome::new(&rows, Some(t), true)
        }
    }
}

fn ends_cmd(c: &EndsCmd, budget: Option<usize>) -> Result<Outcome> {
    match c {
        EndsCmd::Count { r#gen, exhaustion, probe, offset, classify } => {
            let gen = load_generator(r#gen, budget)?;
            let ex = io::parse_site_lists(&text_arg(exhaustion)?)?;
            let rule = match (probe, offset) {
                (Some(p), _) => ProbeRule::Fixed(*p),
                (None, Some(o)) => ProbeRule::Offset(*o),
                (None, None) => ProbeRule::Offset(8),
            };
            let rep = count_ends(&gen, &ex, rule, &parse_list(&classify.schedule)?, positive("margin", classify.margin)?, positive("stall-eps", classify.stall_eps)?)?;
            let mut t = Table::new(&["omega_size", "probe", "n", "n_nonparabolic", "n_parabolic", "n_inconclusive", "stable"]);
            for r in &rep.rows {
                t.push(vec![
                    r.omega_size.into(),
                    r.probe_radius.into(),
                    r.n.into(),
                    r.n_nonparabolic.into(),
                    r.n_parabolic.into(),
                    r.n_inconclusive.into(),
                    r.stable.to_string().into(),
                ]);
            }
            let pass = rep.monotone;
            Outcome::new(&rep, Some(t), pass)
        }
        EndsCmd::Classify { r#gen, omega, probe, classify } => {
            let gen = load_generator(r#gen, budget)?;
            let om = io::parse_sites(&text_arg(omega)?)?;
            let schedule = parse_list(&classify.schedule)?;
            let rep = ends_wrt(&gen, &om, *probe)?;
            let classes = rep
                .ends
                .iter()
                .map(|e| classify_end(&gen, e, &schedule, positive("margin", classify.margin)?, positive("stall-eps", classify.stall_eps)?))
                .collect::<Result<Vec<_>>>()?;
            let mut t = Table::new(&["end", "rho", "sentinel_id", "value"]);
            for (k, c) in classes.iter().enumerate() {
                for row in &barrier_table(c).rows {
                    let mut r = vec![Cell::Int(k as i64)];
                    r.extend(row.iter().cloned());
                    t.push(r);
                }
            }
            let json = serde_json::json!({ "ends": rep, "classifications": classes });
            Outcome::new(&json, Some(t), true)
        }
        EndsCmd::Basis { r#gen, omega, probe, rho } => {
            let gen = load_generator(r#gen, budget)?;
            let om = io::parse_sites(&text_arg(omega)?)?;
            let basis = separating_harmonics(&gen, &om, *probe, *rho)?;
            let mut t = Table::new(&["i", "j", "value"]);
            for (i, row) in basis.gram_matrix.iter().enumerate() {
                for (j, &x) in row.iter().enumerate() {
                    t.push(vec![i.into(), j.into(), x.into()]);
                }
            }
            Outcome::new(&basis, Some(t), true)
        }
    }
}

fn sequence(args: &SequenceArgs, budget: Option<usize>) -> Result<(RootedGeneratorSequence, Vec<usize>, f64)> {
    let gen = load_generator(&args.r#gen, budget)?;
    let seq = RootedGeneratorSequence::parse(gen, &text_arg(&args.roots)?)?;
    Ok((seq, parse_list(&args.indices)?, positive("eps", args.eps)?))
}

fn deviation_table(dev: &BTreeMap<usize, f64>) -> Table {
    let mut t = Table::new(&["index", "weight_sup_deviation"]);
    for (&i, &d) in dev {
        t.push(vec![i.into(), d.into()]);
    }
    t
}

fn gh_cmd(c: &GhCmd, budget: Option<usize>) -> Result<Outcome> {
    match c {
        GhCmd::Check { seq, radius } => {
            let (s, idx, eps) = sequence(seq, budget)?;
            let rep = pgh_converges(&s, &idx, *radius, eps)?;
            let pass = rep.verdict == ConvergenceVerdict::Converged;
            Outcome::new(&rep, Some(deviation_table(&rep.weight_sup_deviation)), pass)
        }
        GhCmd::Limit { seq, radius } => {
            let (s, idx, eps) = sequence(seq, budget)?;
            let lim = pgh_limit(&s, &idx, *radius, eps)?;
            let graph: serde_json::Value = serde_json::from_str(&io::graph_to_json(&lim.ball.graph))?;
            let json = serde_json::json!({ "limit": lim, "ball": graph });
            Outcome::new(&json, None, lim.consistent_with_next_radius)
        }
        GhCmd::Semicontinuity { seq, mode, tol } => {
            let (s, idx, eps) = sequence(seq, budget)?;
            let rep = curvature_semicontinuity_check(&s, &idx, *mode, eps, positive("tol", *tol)?)?;
            let mut t = Table::new(&["index", "curvature"]);
            for (&i, &k) in &rep.per_index {
                t.push(vec![i.into(), k.into()]);
            }
            let pass = rep.holds;
            Outcome::new(&rep, Some(t), pass)
        }
    }
}

fn error_kind(e: &Error) -> (&'static str, u8) {
    match e {
        Error::Refused(_) => ("refused", 1),
        Error::Parse { .. } => ("parse", 2),
        Error::Domain(_) => ("domain", 2),
        Error::Precondition(_) => ("precondition", 2),
        Error::IllPosed(_) => ("ill_posed", 2),
        Error::Integrity(_) => ("integrity", 2),
        Error::Resource { .. } => ("resource", 3),
        Error::Numeric(_) => ("numeric", 3),
        Error::UnboundedCurvature { .. } => ("unbounded_curvature", 3),
        Error::Io(_) => ("io", 3),
    }
}

fn report_error(e: &Error, json: bool) -> ExitCode {
    let (kind, code) = error_kind(e);
    if json {
        let mut obj = serde_json::json!({ "error": kind, "message": e.to_string(), "exit_code": code });
        if let Error::Parse { line, column, .. } = e {
            obj["line"] = (*line).into();
            obj["column"] = (*column).into();
        }
        eprintln!("{obj}");
    } else {
        eprintln!("curvgraph: {e}");
    }
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match run(&cli) {
        Ok(o) => o,
        Err(e) => return report_error(&e, cli.json_errors),
    };
    let text = if cli.csv {
        match outcome.csv {
            Some(t) => t,
            None => return report_error(&Error::Domain("this report has no CSV form".into()), cli.json_errors),
        }
    } else {
        outcome.json
    };
    match &cli.out {
        Some(path) => {
            if let Err(e) = write_text(path, &text) {
                return report_error(&e, cli.json_errors);
            }
        }
        None => print!("{text}"),
    }
    if outcome.pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
