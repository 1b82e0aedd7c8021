//! Command-line front end. `run` parses arguments, executes one command on a
//! dedicated worker pool and returns the exit code with the captured output.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use levelgraph_core::collision::{enhancement_multiset, enumerate_collision_graphs};
use levelgraph_core::compare::{compare_fibers, compare_square, FiberComparisonReport, Parity};
use levelgraph_core::cover::{count_double_covers, enumerate_double_covers, CoverGraph};
use levelgraph_core::graph::{DifferentialKind, EnhancedLevelGraph};
use levelgraph_core::image::{check_rank2_image_conditions, Involution};
use levelgraph_core::polarization::{
    check_degenerate_on, component_count, enumerate_semistable, enumerate_strata, gcd_nondegeneracy, is_semistable,
    phi_canonical, MultidegreeClass, NumericalPolarization, Stability,
};
use levelgraph_core::rational::format_q;
use levelgraph_core::spectral::{det_degree_feasible, prym_degree_feasible, pushforward_multidegree, NodeType, RankTwoDegrees};
use levelgraph_core::{corpus, dot, symmetry, Error};

#[derive(Parser, Debug)]
#[command(name = "levelgraph", version, about = "Enhanced level graphs, double covers and compactified Jacobians")]
struct Cli {
    /// Emit JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Write Graphviz files into this directory.
    #[arg(long, global = true, value_name = "DIR")]
    dot: Option<PathBuf>,
    /// Suppress normal output; the exit code still reports the result.
    #[arg(long, global = true)]
    quiet: bool,
    /// Worker threads (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the level, enhancement, order-sum and stability rules.
    Validate {
        graph: PathBuf,
        /// Check abelian instead of quadratic order sums.
        #[arg(long)]
        abelian: bool,
    },
    /// Enumerate the canonical double covers of a graph.
    Covers { graph: PathBuf },
    /// Enumerate collision graphs over a smooth base curve.
    Boundary {
        #[arg(long)]
        genus: u32,
        #[arg(long, default_value_t = 2)]
        levels: u32,
    },
    /// Canonical polarization and its degeneracy.
    Phi {
        graph: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        degree: i64,
    },
    /// Semistable multidegrees of the compactified Jacobian.
    Jac(JacArgs),
    /// Push a source multidegree down to the target.
    Push(SourceArgs),
    /// Multidegree-level Prym condition.
    Prym {
        #[command(flatten)]
        source: SourceArgs,
        #[arg(long = "degL", allow_hyphen_values = true)]
        deg_l: i64,
    },
    /// Multidegree-level fixed-determinant condition.
    Det(DetArgs),
    /// Compare Hitchin and Jacobian fibers over one collision.
    Compare {
        #[arg(long)]
        genus: u32,
        #[arg(long = "zero-order")]
        zero_order: u32,
        #[arg(long, allow_hyphen_values = true)]
        degree: i64,
        /// The differential is a global square.
        #[arg(long)]
        square: bool,
    },
    /// Necessary conditions for a graph with involution to be a cover source.
    Image {
        graph: PathBuf,
        /// JSON file `{"vertex": {..}, "edge": {..}}`; omitted means identity.
        #[arg(long)]
        sigma: Option<PathBuf>,
        /// Keep fixed self-nodes instead of replacing them with bridges.
        #[arg(long)]
        no_bridge: bool,
    },
    /// Regenerate the example graphs and golden outputs.
    SeedCorpus { dir: PathBuf },
}

#[derive(Args, Debug)]
struct JacArgs {
    graph: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    degree: i64,
    /// `canonical` or a JSON file of weights.
    #[arg(long, default_value = "canonical")]
    phi: String,
    /// Print component counts.
    #[arg(long)]
    count: bool,
    /// List every NS stratum, not only locally free classes.
    #[arg(long)]
    strata: bool,
}

#[derive(Args, Debug)]
struct SourceArgs {
    cover: PathBuf,
    /// Comma-separated degrees in vertex order, or `id=value` pairs.
    #[arg(long, allow_hyphen_values = true)]
    multidegree: String,
    /// Comma-separated NS edge ids of the source.
    #[arg(long, default_value = "")]
    ns: String,
}

#[derive(Args, Debug)]
struct DetArgs {
    cover: PathBuf,
    /// Source multidegree to push forward.
    #[arg(long, allow_hyphen_values = true, conflicts_with_all = ["degrees", "taxonomy"])]
    multidegree: Option<String>,
    #[arg(long, default_value = "", requires = "multidegree")]
    ns: String,
    /// Target degrees of the rank-two sheaf.
    #[arg(long, allow_hyphen_values = true, requires = "taxonomy")]
    degrees: Option<String>,
    /// Node types per target edge, e.g. `LF/fix,NS/swap-one`.
    #[arg(long)]
    taxonomy: Option<String>,
    #[arg(long = "degL", allow_hyphen_values = true)]
    deg_l: i64,
}

/// Result of one invocation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

enum Failure {
    /// Exit 1: the input is well formed but fails a domain check.
    Domain(String),
    /// Exit 2: unreadable or malformed input.
    Input(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Json(_)
            | Error::UnknownVertex { .. }
            | Error::DuplicateVertex(_)
            | Error::DuplicateEdge(_)
            | Error::UnknownEdge(_)
            | Error::EmptyGraph
            | Error::MultidegreeLength { .. } => Failure::Input(e.to_string()),
            _ => Failure::Domain(e.to_string()),
        }
    }
}

type Res<T> = std::result::Result<T, Failure>;

struct Ctx {
    json: bool,
    dot: Option<PathBuf>,
    out: String,
}

impl Ctx {
    fn line(&mut self, text: impl AsRef<str>) {
        self.out.push_str(text.as_ref());
        self.out.push('\n');
    }

    fn json(&mut self, value: &serde_json::Value) {
        self.line(serde_json::to_string_pretty(value).expect("values serialize"));
    }

    fn write_dot(&self, name: &str, text: &str) -> Res<()> {
        if let Some(dir) = &self.dot {
            write_file(&dir.join(name), text)?;
        }
        Ok(())
    }
}

fn write_file(path: &Path, text: &str) -> Res<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Failure::Input(format!("{}: {e}", parent.display())))?;
    }
    fs::write(path, text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn read(path: &Path) -> Res<String> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn load_graph(path: &Path) -> Res<EnhancedLevelGraph> {
    Ok(EnhancedLevelGraph::from_json(&read(path)?)?)
}

fn load_cover(path: &Path) -> Res<CoverGraph> {
    CoverGraph::from_json(&read(path)?).map_err(|e| match e {
        Error::Cover(m) => Failure::Input(format!("invalid cover: {m}")),
        other => other.into(),
    })
}

fn to_value<T: serde::Serialize>(x: &T) -> serde_json::Value {
    serde_json::to_value(x).expect("values serialize")
}

/// Parses `3,1,0` (vertex order) or `a=3,b=1,c=0`.
fn parse_multidegree(graph: &EnhancedLevelGraph, text: &str) -> Res<Vec<i64>> {
    let parts: Vec<&str> = text.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    let bad = |p: &str| Failure::Input(format!("cannot read `{p}` as a degree"));
    if parts.iter().any(|p| p.contains('=')) {
        let mut out = vec![None; graph.num_vertices()];
        for p in &parts {
            let (id, value) = p.split_once('=').ok_or_else(|| bad(p))?;
            let v = graph
                .vertex_index(id.trim())
                .ok_or_else(|| Failure::Input(format!("unknown vertex `{}`", id.trim())))?;
            out[v] = Some(value.trim().parse::<i64>().map_err(|_| bad(p))?);
        }
        out.into_iter()
            .enumerate()
            .map(|(v, x)| x.ok_or_else(|| Failure::Input(format!("no degree for vertex `{}`", graph.vertex_id(v)))))
            .collect()
    } else {
        let out = parts.iter().map(|p| p.parse::<i64>().map_err(|_| bad(p))).collect::<Res<Vec<_>>>()?;
        if out.len() != graph.num_vertices() {
            return Err(Error::MultidegreeLength { expected: graph.num_vertices(), actual: out.len() }.into());
        }
        Ok(out)
    }
}

fn parse_ns(graph: &EnhancedLevelGraph, text: &str) -> Res<BTreeSet<usize>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|id| graph.edge_index(id).ok_or_else(|| Failure::Input(format!("unknown edge `{id}`"))))
        .collect()
}

fn join<T: ToString>(xs: impl IntoIterator<Item = T>) -> String {
    xs.into_iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

fn ns_text(graph: &EnhancedLevelGraph, ns: &BTreeSet<usize>) -> String {
    if ns.is_empty() {
        "-".into()
    } else {
        join(ns.iter().map(|&e| graph.edge_id(e)))
    }
}

fn cmd_validate(ctx: &mut Ctx, path: &Path, abelian: bool) -> Res<()> {
    let graph = load_graph(path)?;
    let kind = if abelian { DifferentialKind::Abelian } else { DifferentialKind::Quadratic };
    let report = graph.validate_as(kind);
    if ctx.json {
        ctx.json(&serde_json::json!({ "ok": report.ok(), "violations": to_value(&report.violations) }));
    } else if report.ok() {
        ctx.line("ok");
    } else {
        for v in &report.violations {
            ctx.line(v.to_string());
        }
    }
    ctx.write_dot("graph.dot", &dot::graph_to_dot(&graph))?;
    if report.ok() {
        Ok(())
    } else {
        Err(Failure::Domain(format!("{} violation(s)", report.violations.len())))
    }
}

fn fiber_text(cover: &CoverGraph) -> String {
    let t = cover.target();
    join((0..t.num_vertices()).map(|v| format!("{}:{}", t.vertex_id(v), cover.vertex_fiber(v).len())))
}

fn cmd_covers(ctx: &mut Ctx, path: &Path) -> Res<()> {
    let graph = load_graph(path)?;
    let covers = enumerate_double_covers(&graph)?;
    let count = count_double_covers(&graph)?;
    if ctx.json {
        let list: Vec<serde_json::Value> = covers
            .iter()
            .map(|c| serde_json::from_str(&c.to_json()).expect("cover JSON is valid"))
            .collect();
        ctx.json(&serde_json::json!({
            "count": to_value(&count),
            "covers": list,
        }));
    } else {
        ctx.line(format!("covers\t{}\tlabeled\t{}", count.up_to_isomorphism, count.labeled));
        ctx.line("index\tfibers\tsource-genus\tsource-vertices\tconnected");
        for (i, c) in covers.iter().enumerate() {
            let s = c.source();
            ctx.line(format!(
                "{}\t{}\t{}\t{}\t{}",
                i + 1,
                fiber_text(c),
                s.arithmetic_genus()?,
                s.num_vertices(),
                c.is_connected()
            ));
        }
    }
    ctx.write_dot("target.dot", &dot::graph_to_dot(&graph))?;
    for (i, c) in covers.iter().enumerate() {
        ctx.write_dot(&format!("cover-{}.dot", i + 1), &dot::cover_to_dot(c))?;
    }
    Ok(())
}

fn cmd_boundary(ctx: &mut Ctx, genus: u32, levels: u32) -> Res<()> {
    if genus < 2 {
        return Err(Failure::Domain("genus must be at least 2".into()));
    }
    let graphs = enumerate_collision_graphs(genus, levels);
    let mut rows = Vec::new();
    for (i, g) in graphs.iter().enumerate() {
        let covers = enumerate_double_covers(g)?;
        rows.push((i + 1, g, covers.len()));
    }
    if ctx.json {
        let list: Vec<serde_json::Value> = rows
            .iter()
            .map(|(i, g, n)| {
                serde_json::json!({
                    "index": i,
                    "levels": g.levels().len(),
                    "covers": n,
                    "graph": serde_json::from_str::<serde_json::Value>(&g.to_json()).expect("graph JSON is valid"),
                })
            })
            .collect();
        ctx.json(&serde_json::Value::Array(list));
    } else {
        ctx.line(format!("graphs\t{}", graphs.len()));
        ctx.line("index\tlevels\tvertices\tenhancements\tcovers");
        for (i, g, n) in &rows {
            ctx.line(format!("{i}\t{}\t{}\t{}\t{n}", g.levels().len(), g.num_vertices(), join(enhancement_multiset(g))));
        }
    }
    for (i, g, _) in &rows {
        ctx.write_dot(&format!("boundary-{i}.dot"), &dot::graph_to_dot(g))?;
    }
    Ok(())
}

fn cmd_phi(ctx: &mut Ctx, path: &Path, degree: i64) -> Res<()> {
    let graph = load_graph(path)?;
    let phi = phi_canonical(&graph, degree)?;
    let degenerate = check_degenerate_on(&graph, &phi)?;
    let g = graph.arithmetic_genus()?;
    let gcd = gcd_nondegeneracy(g, graph.num_legs() as i64, degree);
    if ctx.json {
        let weights: serde_json::Map<String, serde_json::Value> = (0..graph.num_vertices())
            .map(|v| (graph.vertex_id(v).to_string(), format_q(&phi.weight(v)).into()))
            .collect();
        ctx.json(&serde_json::json!({
            "phi": weights,
            "non_degenerate": degenerate.is_none(),
            "degenerate_on": degenerate.map(|y| y.ids(&graph)),
            "gcd_criterion": gcd,
        }));
    } else {
        ctx.line("vertex\tphi");
        for v in 0..graph.num_vertices() {
            ctx.line(format!("{}\t{}", graph.vertex_id(v), format_q(&phi.weight(v))));
        }
        match degenerate {
            None => ctx.line("non-degenerate\ttrue"),
            Some(y) => ctx.line(format!("non-degenerate\tfalse\t{}", y.display(&graph))),
        }
        ctx.line(format!("gcd-criterion\t{gcd}"));
    }
    Ok(())
}

fn load_phi(graph: &EnhancedLevelGraph, choice: &str, degree: i64) -> Res<NumericalPolarization> {
    if choice == "canonical" {
        Ok(phi_canonical(graph, degree)?)
    } else {
        let phi = NumericalPolarization::from_json(graph, &read(Path::new(choice))?)?;
        if phi.degree() != degree {
            return Err(Error::DegreeMismatch { expected: degree, actual: phi.degree() }.into());
        }
        Ok(phi)
    }
}

fn cmd_jac(ctx: &mut Ctx, args: &JacArgs) -> Res<()> {
    let graph = load_graph(&args.graph)?;
    let phi = load_phi(&graph, &args.phi, args.degree)?;
    let mut rows = Vec::new();
    if args.strata {
        for st in enumerate_strata(&graph, &phi)? {
            rows.push((st.class, st.verdict, st.dimension));
        }
    } else {
        let (stable, semi) = enumerate_semistable(&graph, &phi)?;
        let dim = levelgraph_core::polarization::stratum_dimension(&graph, &BTreeSet::new());
        for d in stable {
            rows.push((MultidegreeClass::locally_free(d), Stability::Stable, dim));
        }
        for d in semi {
            rows.push((MultidegreeClass::locally_free(d), Stability::StrictlySemistable, dim));
        }
    }
    let mut table = Vec::new();
    for (class, verdict, dim) in &rows {
        let report = is_semistable(&graph, &phi, class)?;
        let eq: Vec<String> = report.equality.iter().map(|y| y.display(&graph)).collect();
        table.push((class, *verdict, eq, *dim));
    }
    let counts = if args.count {
        let group = symmetry::vertex_automorphisms(&graph);
        let (stable, semi) = enumerate_semistable(&graph, &phi)?;
        let comps = component_count(&graph, &phi)?;
        Some((
            stable.len(),
            symmetry::count_orbits(&stable, &group),
            semi.len(),
            symmetry::count_orbits(&semi, &group),
            comps,
        ))
    } else {
        None
    };
    if ctx.json {
        let list: Vec<serde_json::Value> = table
            .iter()
            .map(|(class, verdict, eq, dim)| {
                serde_json::json!({
                    "multidegree": class.degrees,
                    "ns": class.ns_ids(&graph),
                    "verdict": to_value(verdict),
                    "equality_subcurves": eq,
                    "dimension": dim,
                })
            })
            .collect();
        let mut value = serde_json::json!({
            "vertices": (0..graph.num_vertices()).map(|v| graph.vertex_id(v)).collect::<Vec<_>>(),
            "phi": phi.weights().iter().map(format_q).collect::<Vec<_>>(),
            "classes": list,
        });
        if let Some((s, s_sym, ss, ss_sym, comps)) = &counts {
            value["counts"] = serde_json::json!({
                "stable": s,
                "stable_up_to_symmetry": s_sym,
                "strictly_semistable": ss,
                "strictly_semistable_up_to_symmetry": ss_sym,
                "components": to_value(comps),
            });
        }
        ctx.json(&value);
    } else {
        ctx.line(format!("# vertices\t{}", join((0..graph.num_vertices()).map(|v| graph.vertex_id(v)))));
        ctx.line("multidegree\tns\tverdict\tequality-subcurves\tdimension");
        for (class, verdict, eq, dim) in &table {
            let eq = if eq.is_empty() { "-".to_string() } else { eq.join(" ") };
            ctx.line(format!("{}\t{}\t{}\t{}\t{}", join(&class.degrees), ns_text(&graph, &class.ns), verdict, eq, dim));
        }
        if let Some((s, s_sym, ss, ss_sym, comps)) = &counts {
            ctx.line(format!("stable\t{s}\tup-to-symmetry\t{s_sym}"));
            ctx.line(format!("strictly-semistable\t{ss}\tup-to-symmetry\t{ss_sym}"));
            ctx.line(format!(
                "components\t{}\tup-to-symmetry\t{}\tmerged\t{}",
                comps.labeled, comps.up_to_symmetry, comps.merged
            ));
            for w in &comps.warnings {
                ctx.line(format!("warning\t{w}"));
            }
        }
    }
    Ok(())
}

fn source_class(cover: &CoverGraph, args: &SourceArgs) -> Res<MultidegreeClass> {
    let s = cover.source();
    let degrees = parse_multidegree(s, &args.multidegree)?;
    let ns = parse_ns(s, &args.ns)?;
    Ok(MultidegreeClass::new(s, degrees, ns)?)
}

fn taxonomy_rows(ctx: &mut Ctx, target: &EnhancedLevelGraph, data: &RankTwoDegrees) {
    ctx.line("vertex\tdegree");
    for v in 0..target.num_vertices() {
        ctx.line(format!("{}\t{}", target.vertex_id(v), data.degrees[v]));
    }
    ctx.line("edge\ttype");
    for e in 0..target.num_edges() {
        ctx.line(format!("{}\t{}", target.edge_id(e), data.taxonomy[e].label()));
    }
    ctx.line(format!("total\t{}", data.total()));
}

fn rank_two_value(target: &EnhancedLevelGraph, data: &RankTwoDegrees) -> serde_json::Value {
    let degrees: serde_json::Map<String, serde_json::Value> =
        (0..target.num_vertices()).map(|v| (target.vertex_id(v).to_string(), data.degrees[v].into())).collect();
    let taxonomy: serde_json::Map<String, serde_json::Value> =
        (0..target.num_edges()).map(|e| (target.edge_id(e).to_string(), data.taxonomy[e].label().into())).collect();
    serde_json::json!({ "degrees": degrees, "taxonomy": taxonomy, "total": data.total() })
}

fn cmd_push(ctx: &mut Ctx, args: &SourceArgs) -> Res<()> {
    let cover = load_cover(&args.cover)?;
    let class = source_class(&cover, args)?;
    let data = pushforward_multidegree(&cover, &class)?;
    if ctx.json {
        ctx.json(&rank_two_value(cover.target(), &data));
    } else {
        taxonomy_rows(ctx, cover.target(), &data);
    }
    Ok(())
}

fn feasibility_out(ctx: &mut Ctx, target: &EnhancedLevelGraph, f: &levelgraph_core::spectral::Feasibility) {
    if ctx.json {
        let witness = f.witness.as_ref().map(|m| {
            (0..target.num_edges())
                .map(|e| (target.edge_id(e).to_string(), serde_json::Value::from(m[e])))
                .collect::<serde_json::Map<_, _>>()
        });
        ctx.json(&serde_json::json!({ "feasible": f.feasible, "witness": witness }));
    } else {
        ctx.line(format!("feasible\t{}", f.feasible));
        if let Some(m) = &f.witness {
            for e in 0..target.num_edges() {
                ctx.line(format!("m\t{}\t{}", target.edge_id(e), m[e]));
            }
        }
    }
}

fn cmd_prym(ctx: &mut Ctx, args: &SourceArgs, deg_l: i64) -> Res<()> {
    let cover = load_cover(&args.cover)?;
    let class = source_class(&cover, args)?;
    let f = prym_degree_feasible(&cover, &class, deg_l)?;
    feasibility_out(ctx, cover.target(), &f);
    Ok(())
}

fn cmd_det(ctx: &mut Ctx, args: &DetArgs) -> Res<()> {
    let cover = load_cover(&args.cover)?;
    let t = cover.target();
    let data = match (&args.multidegree, &args.degrees, &args.taxonomy) {
        (Some(md), _, _) => {
            let source = SourceArgs { cover: args.cover.clone(), multidegree: md.clone(), ns: args.ns.clone() };
            pushforward_multidegree(&cover, &source_class(&cover, &source)?)?
        }
        (None, Some(deg), Some(tax)) => {
            let degrees = parse_multidegree(t, deg)?;
            let taxonomy = tax
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| NodeType::parse(s).map_err(|e| Failure::Input(e.to_string())))
                .collect::<Res<Vec<_>>>()?;
            RankTwoDegrees { degrees, taxonomy }
        }
        _ => return Err(Failure::Input("give --multidegree, or --degrees with --taxonomy".into())),
    };
    let f = det_degree_feasible(&cover, &data, args.deg_l)?;
    feasibility_out(ctx, t, &f);
    Ok(())
}

fn fraction(x: &levelgraph_core::compare::Fraction) -> String {
    if x.den == 1 {
        x.num.to_string()
    } else {
        format!("{}/{}", x.num, x.den)
    }
}

fn report_text(ctx: &mut Ctx, r: &FiberComparisonReport) {
    ctx.line(format!("case\t{}", r.case));
    ctx.line(format!("genus\t{}\tzero-order\t{}\tdegree\t{}", r.genus, r.zero_order, r.d_hat));
    let j = &r.jacobian;
    ctx.line(format!("source-vertices\t{}", join(&j.vertices)));
    ctx.line(format!("source-genera\t{}", join(&j.genera)));
    ctx.line(format!("non-degenerate\t{}\tgcd-criterion\t{}", j.non_degenerate, j.gcd_criterion));
    ctx.line(format!(
        "jacobian-components\t{}\tup-to-symmetry\t{}\tmerged\t{}",
        j.components, j.components_up_to_symmetry, j.merged_semistable
    ));
    let h = &r.hitchin;
    let hc = match h.components.value() {
        Some(n) => format!("{n}\t{}", to_value(&h.components)["status"].as_str().unwrap_or("")),
        None => "unknown".into(),
    };
    ctx.line(format!("hitchin-components\t{hc}"));
    ctx.line(format!(
        "components-equal\t{}",
        r.components_equal.map_or("unknown".to_string(), |b| b.to_string())
    ));
    ctx.line(format!("abelian-ranks\tjacobian\t{}\thitchin\t{}", j.abelian_rank, h.abelian_rank));
    ctx.line(format!("strata-nonisomorphic\t{}", r.strata_nonisomorphic));
    if let Some(t) = &r.thresholds {
        ctx.line(format!(
            "threshold-top\t{}\tclosed-form\t{}",
            fraction(&t.top),
            fraction(&t.top_closed_form)
        ));
        ctx.line(format!(
            "threshold-bottom\t{}\tclosed-form\t{}",
            fraction(&t.bottom),
            fraction(&t.bottom_closed_form)
        ));
        ctx.line(format!("thresholds-match\t{}", t.matches));
    }
    ctx.line("jacobian-strata");
    for s in &j.strata {
        ctx.line(format!(
            "\t{}\t{}\t{}\t{}",
            join(&s.degrees),
            if s.ns.is_empty() { "-".to_string() } else { s.ns.join(",") },
            s.verdict,
            s.dimension
        ));
    }
    ctx.line("hitchin-strata");
    for s in &h.strata {
        let r = |x: Option<i64>| x.map_or("?".to_string(), |v| v.to_string());
        ctx.line(format!("\t{}\t{}\t{}\t{}", join(&s.divisor), s.abelian_genus, r(s.r1), r(s.r2)));
    }
    for n in &r.notes {
        ctx.line(format!("note\t{n}"));
    }
}

fn cmd_compare(ctx: &mut Ctx, genus: u32, m: u32, degree: i64, square: bool) -> Res<()> {
    let report = if square {
        if m != 2 {
            return Err(Failure::Domain("--square needs --zero-order 2".into()));
        }
        compare_square(genus, degree)?
    } else {
        let parity = if m % 2 == 0 { Parity::Even } else { Parity::Odd };
        compare_fibers(genus, m / 2, parity, degree)?
    };
    if ctx.json {
        ctx.json(&to_value(&report));
    } else {
        report_text(ctx, &report);
    }
    Ok(())
}

fn cmd_image(ctx: &mut Ctx, path: &Path, sigma: Option<&Path>, no_bridge: bool) -> Res<()> {
    let graph = load_graph(path)?;
    let inv = match sigma {
        Some(p) => Involution::from_json(&graph, &read(p)?)?,
        None => Involution::identity(&graph),
    };
    let cert = check_rank2_image_conditions(&graph, &inv, !no_bridge)?;
    if ctx.json {
        ctx.json(&to_value(&cert));
    } else {
        ctx.line(format!("verdict\t{}", to_value(&cert.verdict).as_str().unwrap_or("")));
        ctx.line(format!("level-structures\t{}", cert.level_structures_checked));
        for (v, l) in &cert.levels {
            ctx.line(format!("level\t{v}\t{l}\tdouble-zeros\t{}", cert.double_zeros[v]));
        }
        for (e, k) in &cert.kappa {
            ctx.line(format!("kappa\t{e}\t{k}"));
        }
        if let Some(reason) = &cert.reason {
            ctx.line(format!("reason\t{reason}"));
        }
    }
    Ok(())
}

/// Files written by `seed-corpus`: example inputs and their golden outputs.
pub fn corpus_files() -> Vec<(String, String)> {
    let mut files = vec![
        ("fig1-left-g2.json".to_string(), corpus::fig1_left(2).to_json()),
        ("fig1-right-g2.json".to_string(), corpus::fig1_right_pair(2).to_json()),
        ("fig2-target.json".to_string(), corpus::fig2_target(3).to_json()),
        ("fig2-cover.json".to_string(), corpus::fig2_cover().to_json()),
    ];
    for (name, graph) in [("fig1-left-g2", corpus::fig1_left(2)), ("fig2-target", corpus::fig2_target(3))] {
        for (i, c) in enumerate_double_covers(&graph).expect("corpus graphs are valid").iter().enumerate() {
            files.push((format!("{name}.cover-{}.json", i + 1), c.to_json()));
        }
    }
    files.push((
        "fig2-sigma.json".into(),
        concat!(
            "{\n  \"vertex\": {\"t1\": \"t2\", \"t2\": \"t1\"},\n",
            "  \"edge\": {\"e1a\": \"e1b\", \"e1b\": \"e1a\", \"e2a\": \"e2b\", \"e2b\": \"e2a\",\n",
            "           \"e3a\": \"e3b\", \"e3b\": \"e3a\", \"e4a\": \"e4b\", \"e4b\": \"e4a\"}\n}\n"
        )
        .into(),
    ));
    files
}

/// Golden invocations: output file name and arguments, paths relative to the
/// corpus directory.
pub fn golden_invocations() -> Vec<(&'static str, Vec<&'static str>)> {
    vec![
        ("validate-fig1-left.txt", vec!["validate", "fig1-left-g2.json"]),
        ("covers-fig1-left.txt", vec!["covers", "fig1-left-g2.json"]),
        ("covers-fig1-right.txt", vec!["covers", "fig1-right-g2.json"]),
        ("covers-fig2-target.txt", vec!["covers", "fig2-target.json"]),
        ("boundary-g2.txt", vec!["boundary", "--genus", "2"]),
        ("phi-fig2-cover-d4.txt", vec!["phi", "fig2-cover.json", "--degree", "4"]),
        ("jac-fig2-cover-d4.tsv", vec!["jac", "fig2-cover.json", "--degree", "4", "--phi", "canonical", "--count"]),
        ("push-fig2-split.txt", vec!["push", "fig2-target.cover-2.json", "--multidegree", "3,1,0,0,0,0"]),
        ("prym-fig1-left.txt", vec!["prym", "fig1-left-g2.cover-1.json", "--multidegree", "4,0", "--degL", "2"]),
        ("det-fig1-left.txt", vec!["det", "fig1-left-g2.cover-1.json", "--multidegree", "4,0", "--degL", "2"]),
        ("compare-g2-m2-d7.txt", vec!["compare", "--genus", "2", "--zero-order", "2", "--degree", "7"]),
        ("compare-g3-square-d4.txt", vec!["compare", "--genus", "3", "--zero-order", "2", "--degree", "4", "--square"]),
        ("image-fig2-cover.txt", vec!["image", "fig2-cover.json", "--sigma", "fig2-sigma.json"]),
    ]
}

fn cmd_seed(ctx: &mut Ctx, dir: &Path, threads: usize) -> Res<()> {
    for (name, text) in corpus_files() {
        write_file(&dir.join(&name), &text)?;
        ctx.line(format!("wrote\t{name}"));
    }
    for (name, args) in golden_invocations() {
        let mut full: Vec<String> = vec!["levelgraph".into(), "--threads".into(), threads.to_string()];
        for a in args {
            full.push(if a.ends_with(".json") { dir.join(a).display().to_string() } else { a.to_string() });
        }
        let outcome = run_unpooled(&full);
        if outcome.code != 0 {
            return Err(Failure::Domain(format!("golden run for {name} failed: {}", outcome.stderr.trim())));
        }
        let text = outcome.stdout.replace(&format!("{}/", dir.display()), "");
        write_file(&dir.join("golden").join(name), &text)?;
        ctx.line(format!("wrote\tgolden/{name}"));
    }
    Ok(())
}

fn dispatch(cli: &Cli, ctx: &mut Ctx) -> Res<()> {
    match &cli.command {
        Command::Validate { graph, abelian } => cmd_validate(ctx, graph, *abelian),
        Command::Covers { graph } => cmd_covers(ctx, graph),
        Command::Boundary { genus, levels } => cmd_boundary(ctx, *genus, *levels),
        Command::Phi { graph, degree } => cmd_phi(ctx, graph, *degree),
        Command::Jac(args) => cmd_jac(ctx, args),
        Command::Push(args) => cmd_push(ctx, args),
        Command::Prym { source, deg_l } => cmd_prym(ctx, source, *deg_l),
        Command::Det(args) => cmd_det(ctx, args),
        Command::Compare { genus, zero_order, degree, square } => cmd_compare(ctx, *genus, *zero_order, *degree, *square),
        Command::Image { graph, sigma, no_bridge } => cmd_image(ctx, graph, sigma.as_deref(), *no_bridge),
        Command::SeedCorpus { dir } => cmd_seed(ctx, dir, cli.threads),
    }
}

fn execute(cli: &Cli) -> Outcome {
    let mut ctx = Ctx { json: cli.json, dot: cli.dot.clone(), out: String::new() };
    let result = dispatch(cli, &mut ctx);
    let stdout = if cli.quiet { String::new() } else { std::mem::take(&mut ctx.out) };
    match result {
        Ok(()) => Outcome { code: 0, stdout, stderr: String::new() },
        Err(Failure::Domain(m)) => Outcome { code: 1, stdout, stderr: format!("error: {m}\n") },
        Err(Failure::Input(m)) => Outcome { code: 2, stdout, stderr: format!("error: {m}\n") },
    }
}

fn parse(args: &[String]) -> Result<Cli, Outcome> {
    Cli::try_parse_from(args).map_err(|e| {
        let text = e.render().to_string();
        if e.use_stderr() {
            Outcome { code: 2, stdout: String::new(), stderr: text }
        } else {
            Outcome { code: 0, stdout: text, stderr: String::new() }
        }
    })
}

/// Runs in the current worker pool.
fn run_unpooled(args: &[String]) -> Outcome {
    match parse(args) {
        Ok(cli) => execute(&cli),
        Err(o) => o,
    }
}

/// Runs one invocation (`args[0]` is the program name) on a pool sized by
/// `--threads`.
pub fn run(args: &[String]) -> Outcome {
    let cli = match parse(args) {
        Ok(cli) => cli,
        Err(o) => return o,
    };
    match rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build() {
        Ok(pool) => pool.install(|| execute(&cli)),
        Err(e) => Outcome { code: 2, stdout: String::new(), stderr: format!("error: worker pool: {e}\n") },
    }
}
