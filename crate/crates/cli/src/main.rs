//! `mutuality` command-line tool.
//!
//! Thread count for parallel sections follows `RAYON_NUM_THREADS`.

use std::collections::HashMap;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use mutuality::report::round_floats;
use mutuality::*;
use serde_json::{json, Value};

const DIGITS: u32 = 12;

#[derive(Parser)]
#[command(name = "mutuality", version, about = "Mutuality-tendency spectral clustering of directed graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Dyad census and graph-wide average tendency.
    Census(CensusArgs),
    /// Cluster a graph with the tendency method or a symmetrization baseline.
    Cluster(ClusterArgs),
    /// Generate a planted-partition graph from a JSON spec.
    Synth(SynthArgs),
    /// Tendency report, TRCut and RCut of a given labeling.
    Eval(EvalArgs),
    /// Degree filter followed by the largest strongly connected component.
    CoreExtract(CoreArgs),
    /// Repeated planted-partition experiment comparing methods by ARI.
    Compare(CompareArgs),
}

#[derive(Clone, Copy, ValueEnum, PartialEq, Eq)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum IdBaseArg {
    /// Renumber IDs by sorted order.
    Compact,
    Zero,
    One,
}

#[derive(Args)]
struct InputArgs {
    /// Edge list: two node IDs per line, `#` comments.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "compact")]
    id_base: IdBaseArg,
}

impl InputArgs {
    fn load(&self) -> anyhow::Result<LoadedGraph> {
        let id_base = match self.id_base {
            IdBaseArg::Compact => IdBase::Compact,
            IdBaseArg::Zero => IdBase::ZeroBased,
            IdBaseArg::One => IdBase::OneBased,
        };
        let opts = LoadOptions {
            id_base,
            ..Default::default()
        };
        Ok(read_edge_list_file(&self.input, opts)?)
    }
}

#[derive(Args)]
struct CensusArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Args)]
struct SolverArgs {
    /// Number of clusters, or `auto` for the eigengap heuristic.
    #[arg(long, default_value = "2")]
    k: String,
    /// Largest K considered by `--k auto` (default min(20, n-1)).
    #[arg(long)]
    k_max: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Eigensolver residual tolerance, relative to the operator norm.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Cap on operator applications in the eigensolver.
    #[arg(long, default_value_t = 50_000)]
    max_iter: usize,
}

impl SolverArgs {
    fn options(&self) -> anyhow::Result<SpectralOptions> {
        let k = if self.k == "auto" {
            KChoice::Auto { k_max: self.k_max }
        } else {
            let k: usize = self.k.parse().map_err(|_| anyhow!("--k must be an integer >= 2 or `auto`"))?;
            if k < 2 {
                bail!("--k must be at least 2");
            }
            KChoice::Fixed(k)
        };
        if self.tol.is_nan() || self.tol <= 0.0 {
            bail!("--tol must be positive");
        }
        Ok(SpectralOptions {
            k,
            tol: self.tol,
            max_iter: self.max_iter,
            seed: self.seed,
            ..Default::default()
        })
    }
}

#[derive(Args)]
struct ClusterArgs {
    #[command(flatten)]
    input: InputArgs,
    /// `tendency` or `baseline:<average|bibliographic|cocitation|circulation|modularity>`.
    #[arg(long, default_value = "tendency")]
    method: Method,
    #[command(flatten)]
    solver: SolverArgs,
    /// Cluster only the core: drop low-degree nodes, keep the largest SCC.
    #[arg(long)]
    core_threshold: Option<usize>,
    #[arg(long, default_value = "either_low")]
    core_mode: CoreMode,
    /// Result JSON (or labels CSV with `--format csv`); stdout if absent.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Also write the labels as `node,cluster` CSV here.
    #[arg(long)]
    labels_out: Option<PathBuf>,
    /// Also write a Graphviz file with cluster-colored nodes.
    #[arg(long)]
    dot: Option<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    /// JSON spec: cluster_sizes, n_mutual_dyads or n_bidirectional_edges,
    /// n_oneway_edges, frac_mutual_within, frac_oneway_across, seed, placement.
    #[arg(long)]
    spec: PathBuf,
    /// Overrides the spec's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Edge list output; stdout if absent.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Planted labels as `node,cluster` CSV.
    #[arg(long)]
    labels: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    input: InputArgs,
    /// `node,cluster` CSV keyed by the edge list's node IDs.
    #[arg(long)]
    labels: PathBuf,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Args)]
struct CoreArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, default_value_t = 2)]
    core_threshold: usize,
    #[arg(long, default_value = "either_low")]
    core_mode: CoreMode,
    /// Edge list of the core; stdout if absent.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    #[arg(long)]
    spec: PathBuf,
    /// Methods to compare (repeatable or comma-separated).
    #[arg(long, value_delimiter = ',', default_values = ["tendency", "baseline:average"])]
    method: Vec<Method>,
    #[arg(long, default_value_t = 10)]
    repeats: usize,
    #[command(flatten)]
    solver: SolverArgs,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

fn open_output(path: Option<&Path>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("cannot create {}", p.display()))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_json(path: Option<&Path>, mut v: Value) -> anyhow::Result<()> {
    round_floats(&mut v, DIGITS);
    let mut out = open_output(path)?;
    serde_json::to_writer_pretty(&mut out, &v)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

fn fmt_f(x: f64) -> String {
    report::round_sig(x, DIGITS).to_string()
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f).unwrap_or_default()
}

fn census(args: &CensusArgs) -> anyhow::Result<()> {
    let loaded = args.input.load()?;
    let g = &loaded.graph;
    let c = dyad_census(g);
    let theta = graph_tendency(g)?;
    if args.format == Format::Csv {
        let mut out = open_output(args.output.as_deref())?;
        writeln!(out, "key,value")?;
        for (k, v) in [
            ("nodes", g.node_count().to_string()),
            ("edges", g.edge_count().to_string()),
            ("m", c.mutual.to_string()),
            ("b", c.asymmetric.to_string()),
            ("u", c.null.to_string()),
            ("n_dyads", c.n_dyads.to_string()),
            ("theta_G", fmt_opt(theta.theta_avg)),
            ("theta_total", fmt_f(theta.theta_total)),
        ] {
            writeln!(out, "{k},{v}")?;
        }
        out.flush()?;
        return Ok(());
    }
    write_json(
        args.output.as_deref(),
        json!({
            "nodes": g.node_count(),
            "edges": g.edge_count(),
            "bidirectional_edges": c.bidirectional_edges(),
            "m": c.mutual,
            "b": c.asymmetric,
            "u": c.null,
            "n_dyads": c.n_dyads,
            "theta_G": theta.theta_avg,
            "theta_total": theta.theta_total,
            "self_loops_dropped": loaded.self_loops_dropped,
            "duplicates_merged": loaded.duplicates_merged,
        }),
    )
}

const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
];

fn write_dot(g: &Digraph, labels: &[usize], path: &Path) -> anyhow::Result<()> {
    let mut out = open_output(Some(path))?;
    writeln!(out, "digraph clusters {{")?;
    writeln!(out, "  node [style=filled, shape=circle, label=\"\"];")?;
    for (v, &c) in labels.iter().enumerate() {
        writeln!(out, "  {} [cluster={c}, fillcolor=\"{}\"];", g.label(v), PALETTE[c % PALETTE.len()])?;
    }
    for (i, j) in g.edges() {
        writeln!(out, "  {} -> {};", g.label(i), g.label(j))?;
    }
    writeln!(out, "}}")?;
    out.flush()?;
    Ok(())
}

fn cluster(args: &ClusterArgs) -> anyhow::Result<()> {
    let loaded = args.input.load()?;
    let opts = args.solver.options()?;
    let g = match args.core_threshold {
        Some(t) => extract_core(&loaded.graph, t, args.core_mode)?.graph,
        None => loaded.graph,
    };
    let result = run_method(&g, args.method, &opts)?;
    if let Some(p) = &args.labels_out {
        result.write_labels_csv(&g, open_output(Some(p))?)?;
    }
    if let Some(p) = &args.dot {
        write_dot(&g, &result.labels, p)?;
    }
    match args.format {
        Format::Json => write_json(args.output.as_deref(), result.to_json(&g)),
        Format::Csv => {
            let mut out = open_output(args.output.as_deref())?;
            result.write_labels_csv(&g, &mut out)?;
            out.flush()?;
            Ok(())
        }
    }
}

fn read_spec(path: &Path) -> anyhow::Result<SyntheticSpec> {
    let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    Ok(serde_json::from_reader(BufReader::new(file)).map_err(mutuality::Error::from)?)
}

fn synth(args: &SynthArgs) -> anyhow::Result<()> {
    let mut spec = read_spec(&args.spec)?;
    if let Some(seed) = args.seed {
        spec.seed = seed;
    }
    let planted = generate_planted(&spec)?;
    let mut out = open_output(args.output.as_deref())?;
    write_edge_list(&planted.graph, &mut out)?;
    out.flush()?;
    if let Some(p) = &args.labels {
        let mut out = open_output(Some(p))?;
        writeln!(out, "node,cluster")?;
        for (v, c) in planted.labels.iter().enumerate() {
            writeln!(out, "{},{c}", planted.graph.label(v))?;
        }
        out.flush()?;
    }
    Ok(())
}

fn read_labels(path: &Path, g: &Digraph) -> anyhow::Result<Vec<usize>> {
    let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    let index: HashMap<u64, usize> = g.labels().iter().enumerate().map(|(i, &l)| (l, i)).collect();
    let mut labels = vec![None; g.node_count()];
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || (lineno == 0 && line.starts_with("node")) {
            continue;
        }
        let malformed = |message: String| mutuality::Error::MalformedLine { line: lineno + 1, message };
        let (node, cluster) = line.split_once(',').ok_or_else(|| malformed("expected node,cluster".into()))?;
        let node: u64 = node.trim().parse().map_err(|_| malformed(format!("bad node ID {node:?}")))?;
        let cluster: usize = cluster.trim().parse().map_err(|_| malformed(format!("bad cluster {cluster:?}")))?;
        let &v = index.get(&node).ok_or_else(|| malformed(format!("node {node} is not in the graph")))?;
        labels[v] = Some(cluster);
    }
    labels
        .into_iter()
        .enumerate()
        .map(|(v, c)| c.ok_or_else(|| anyhow!(mutuality::Error::InvalidPartition(format!("node {} has no label", g.label(v))))))
        .collect()
}

fn eval(args: &EvalArgs) -> anyhow::Result<()> {
    let loaded = args.input.load()?;
    let g = &loaded.graph;
    let labels = canonicalize(&read_labels(&args.labels, g)?);
    let k = labels.iter().max().map_or(0, |m| m + 1);
    let report = average_tendency_report(g, &labels)?;
    let trc = trcut(g, &labels, k)?;
    let cuts = cut_objectives(&symmetrize(g, AffinityKind::Average)?, &labels)?;
    if args.format == Format::Csv {
        let mut out = open_output(args.output.as_deref())?;
        writeln!(out, "scope,n_pairs,theta_total,theta_avg")?;
        for (name, s) in report.rows() {
            writeln!(out, "{name},{},{},{}", s.n_pairs, fmt_f(s.theta_total), fmt_opt(s.theta_avg))?;
        }
        out.flush()?;
        return Ok(());
    }
    write_json(
        args.output.as_deref(),
        json!({
            "K": k,
            "trcut": trc,
            "rcut": cuts.rcut,
            "ncut": cuts.ncut,
            "cut": cuts.cut,
            "tendency_report": report,
        }),
    )
}

fn core_extract(args: &CoreArgs) -> anyhow::Result<()> {
    let loaded = args.input.load()?;
    let core = extract_core(&loaded.graph, args.core_threshold, args.core_mode)?;
    let mut out = open_output(args.output.as_deref())?;
    write_edge_list(&core.graph, &mut out)?;
    out.flush()?;
    Ok(())
}

fn compare(args: &CompareArgs) -> anyhow::Result<()> {
    let spec = read_spec(&args.spec)?;
    let opts = args.solver.options()?;
    let report = planted_ari_experiment(&spec, &args.method, args.repeats, args.solver.seed, &opts)?;
    if args.format == Format::Csv {
        let mut out = open_output(args.output.as_deref())?;
        writeln!(out, "method,repeat,seed,K,ari,cluster_sizes,theta_G,theta_clusters,theta_boundary,objective")?;
        for r in &report.runs {
            let sizes: Vec<String> = r.cluster_sizes.iter().map(|s| s.to_string()).collect();
            let thetas: Vec<String> = r.tendency_report.clusters.iter().map(|s| fmt_opt(s.theta_avg)).collect();
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{}",
                r.method,
                r.repeat,
                r.seed,
                r.k,
                fmt_opt(r.ari),
                sizes.join(";"),
                fmt_opt(r.tendency_report.graph.theta_avg),
                thetas.join(";"),
                fmt_opt(r.tendency_report.boundary.theta_avg),
                fmt_f(r.objective)
            )?;
        }
        out.flush()?;
        return Ok(());
    }
    write_json(args.output.as_deref(), serde_json::to_value(&report)?)
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match &cli.command {
        Command::Census(a) => census(a),
        Command::Cluster(a) => cluster(a),
        Command::Synth(a) => synth(a),
        Command::Eval(a) => eval(a),
        Command::CoreExtract(a) => core_extract(a),
        Command::Compare(a) => compare(a),
    }
}

fn error_json(code: &str, message: String) {
    let v = json!({ "error": { "code": code, "message": message } });
    eprintln!("{v}");
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            error_json("usage", e.to_string().trim_end().to_string());
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let code = match e.downcast_ref::<mutuality::Error>() {
                Some(err) => err.code(),
                None if e.downcast_ref::<io::Error>().is_some() => "io",
                None => "invalid_argument",
            };
            error_json(code, format!("{e:#}"));
            ExitCode::FAILURE
        }
    }
}
