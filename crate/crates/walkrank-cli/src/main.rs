//! `walkrank`: ranking, centrality, similarity, recommendation, and
//! absorbing-walk computations over edge-list and rating files.
//!
//! Exit codes: 0 on success, 2 for input or parameter problems (including
//! usage errors), 3 when an algorithm fails to converge or parts of the
//! graph cannot reach their targets.

use std::collections::BTreeSet;
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use walkrank::absorbing::{heat_equilibrium, AbsorbingPartition};
use walkrank::centrality::{
    degree_centrality, random_walk_betweenness, second_order_centrality,
    shortest_path_betweenness, SecondOrderParams,
};
use walkrank::graph::{load_bipartite, load_directed_graph, BipartiteGraph, ParseOptions};
use walkrank::recommender::{
    evaluate, heats_scores, hybrid_scores, predict_rating_or_mean, probs_scores,
    temperature_recommend, top_n, EvaluationConfig, HybridParams, RecommendationList, ScoreMethod,
};
use walkrank::similarity::{
    commute_time, cosine_similarity, ectd, laplacian_pseudoinverse, lrw_similarity,
    pearson_similarity, regularized_similarity, srw_similarity, ProfileAxis, SimilarityMatrix,
};
use walkrank::spectral::{
    citerank, eigenvector_centrality, ground_node_rank, hits, pagerank, totalrank,
    trusted_teleport, PageRankParams,
};
use walkrank::{DanglingPolicy, DirectedGraph, Normalization, ScoreVector, TransitionMatrix};

/// Version tag stamped into every JSON document this binary emits.
const SCHEMA: &str = "walkrank/1";

#[derive(Parser)]
#[command(
    name = "walkrank",
    version,
    about = "Random-walk ranking, centrality, similarity and recommendation over TSV graphs"
)]
struct Cli {
    /// Worker threads (default: all cores; WALKRANK_THREADS as fallback).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output format; recommend and evaluate default to json, the rest to tsv.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Tsv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Rank nodes of a directed graph by a spectral walk score.
    Rank(RankArgs),
    /// Score nodes by a centrality measure, normalized to mean one.
    Centrality(CentralityArgs),
    /// List the nodes (or users/items) most similar to one of them.
    Similar(SimilarArgs),
    /// Recommend items to a user from bipartite ratings or an item graph.
    Recommend(RecommendArgs),
    /// Absorbing-walk quantities: absorption probabilities or equilibrium
    /// temperatures against a fixed boundary.
    Absorb(AbsorbArgs),
    /// Leave-probe-out evaluation of a recommendation method.
    Evaluate(EvaluateArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum RankAlgo {
    Pagerank,
    Totalrank,
    Hits,
    Eigenvector,
    Citerank,
    Ground,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Dangling {
    /// Jump anywhere with equal probability from a node without out-links.
    Uniform,
    /// Stay put on nodes without out-links.
    SelfLoop,
    /// Refuse graphs containing nodes without out-links.
    Reject,
}

impl From<Dangling> for DanglingPolicy {
    fn from(d: Dangling) -> Self {
        match d {
            Dangling::Uniform => DanglingPolicy::Uniform,
            Dangling::SelfLoop => DanglingPolicy::SelfLoop,
            Dangling::Reject => DanglingPolicy::Error,
        }
    }
}

#[derive(Args)]
struct RankArgs {
    #[arg(long, value_enum)]
    algo: RankAlgo,
    /// Damping: probability of following a link instead of teleporting.
    #[arg(long, default_value_t = 0.85)]
    alpha: f64,
    #[arg(long, default_value_t = 1e-12)]
    tolerance: f64,
    #[arg(long, default_value_t = 1000)]
    max_iterations: usize,
    /// Characteristic age for citerank teleportation (required with it).
    #[arg(long)]
    tau: Option<f64>,
    /// Node ages for citerank: TSV of label<TAB>age.
    #[arg(long)]
    ages: Option<PathBuf>,
    /// Comma-separated labels receiving all teleportation (pagerank only).
    #[arg(long)]
    trusted: Option<String>,
    /// Quadrature points for totalrank's damping average.
    #[arg(long, default_value_t = 64)]
    points: usize,
    /// Emit hub scores instead of authorities (hits only).
    #[arg(long)]
    hub: bool,
    #[arg(long, value_enum, default_value_t = Dangling::Uniform)]
    dangling: Dangling,
    /// Mirror every edge while loading.
    #[arg(long)]
    undirected: bool,
    graph: PathBuf,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Measure {
    Degree,
    Betweenness,
    RwBetweenness,
    SecondOrder,
    Eigenvector,
    Pagerank,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Normalize {
    MeanOne,
    SumOne,
    MaxOne,
    Raw,
}

impl From<Normalize> for Normalization {
    fn from(n: Normalize) -> Self {
        match n {
            Normalize::MeanOne => Normalization::MeanOne,
            Normalize::SumOne => Normalization::SumOne,
            Normalize::MaxOne => Normalization::MaxOne,
            Normalize::Raw => Normalization::Raw,
        }
    }
}

#[derive(Args)]
struct CentralityArgs {
    #[arg(long, value_enum)]
    measure: Measure,
    #[arg(long, value_enum, default_value_t = Normalize::MeanOne)]
    normalize: Normalize,
    /// Count only interior nodes of shortest paths, not their endpoints.
    #[arg(long)]
    exclude_endpoints: bool,
    /// Walk seed; required by the second-order measure.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 10_000_000)]
    walk_steps: u64,
    /// Discarded steps before recording (default: 10·N).
    #[arg(long)]
    burn_in: Option<u64>,
    #[arg(long, default_value_t = 50)]
    min_returns: usize,
    /// Independent pooled walks sharing the budget.
    #[arg(long, default_value_t = 1)]
    walks: usize,
    /// Damping for the pagerank measure.
    #[arg(long, default_value_t = 0.85)]
    alpha: f64,
    #[arg(long)]
    undirected: bool,
    graph: PathBuf,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SimilarKind {
    Commute,
    Ectd,
    Lrw,
    Srw,
    Regularized,
    Pearson,
    Cosine,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Axis {
    Users,
    Items,
}

#[derive(Args)]
struct SimilarArgs {
    #[arg(long, value_enum)]
    kind: SimilarKind,
    /// Label of the node (or user/item) to compare everything against.
    #[arg(long)]
    node: String,
    #[arg(long, default_value_t = 10)]
    top: usize,
    /// Walk length for the lrw/srw kinds.
    #[arg(long, default_value_t = 3)]
    steps: usize,
    /// Series weight for the regularized kind; horizon is 1/alpha.
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    /// Which side of a ratings file pearson/cosine compare.
    #[arg(long, value_enum, default_value_t = Axis::Users)]
    axis: Axis,
    #[arg(long, value_enum, default_value_t = Dangling::Uniform)]
    dangling: Dangling,
    #[arg(long)]
    undirected: bool,
    /// Edge-list TSV (graph kinds) or ratings TSV (pearson/cosine).
    input: PathBuf,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Probs,
    Heats,
    Hybrid,
    Cf,
    Temperature,
    Random,
}

#[derive(Args)]
struct RecommendArgs {
    #[arg(long, value_enum)]
    method: Method,
    /// Receiving user's label (all methods except temperature).
    #[arg(long)]
    user: Option<String>,
    /// Spreading/averaging balance of the hybrid; 1 = probs, 0 = heats.
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    /// Initial resource exponent on item degree.
    #[arg(long, default_value_t = 0.0)]
    theta: f64,
    #[arg(long, default_value_t = 10)]
    top: usize,
    /// Comma-separated labels pinned to temperature 1 (temperature only).
    #[arg(long)]
    liked: Option<String>,
    /// Comma-separated labels pinned to temperature 0 (temperature only).
    #[arg(long)]
    disliked: Option<String>,
    #[arg(long)]
    undirected: bool,
    /// Ratings TSV, or an item-graph edge list for temperature.
    input: PathBuf,
}

#[derive(Args)]
struct AbsorbArgs {
    /// File of absorbing node labels, one per line.
    #[arg(long)]
    sinks: Option<PathBuf>,
    /// File of label<TAB>temperature pairs held fixed.
    #[arg(long)]
    boundary: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Dangling::SelfLoop)]
    dangling: Dangling,
    #[arg(long)]
    undirected: bool,
    graph: PathBuf,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long, value_enum, default_value_t = Method::Probs)]
    method: Method,
    /// Per-user fraction of items withheld as the probe, in (0,1).
    #[arg(long)]
    probe: f64,
    /// Probe-split (and random-scorer) seed.
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    #[arg(long, default_value_t = 0.0)]
    theta: f64,
    /// Length of the per-user lists behind precision and diversity.
    #[arg(long, default_value_t = 10)]
    top: usize,
    ratings: PathBuf,
}

/// Anything that can stop a run, tagged with its exit code class.
enum Failure {
    Lib(walkrank::Error),
    Usage(String),
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Lib(e) => write!(f, "{e}"),
            Failure::Usage(msg) => write!(f, "{msg}"),
        }
    }
}

impl From<walkrank::Error> for Failure {
    fn from(e: walkrank::Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Lib(walkrank::Error::Io(e))
    }
}

impl Failure {
    fn code(&self) -> ExitCode {
        match self {
            Failure::Usage(_) => ExitCode::from(2),
            Failure::Lib(e) => {
                if e.is_input_error() {
                    ExitCode::from(2)
                } else {
                    ExitCode::from(3)
                }
            }
        }
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    configure_threads(cli.threads);
    let format = cli.format;
    let result = match cli.command {
        Command::Rank(args) => run_rank(args, format.unwrap_or(Format::Tsv)),
        Command::Centrality(args) => run_centrality(args, format.unwrap_or(Format::Tsv)),
        Command::Similar(args) => run_similar(args, format.unwrap_or(Format::Tsv)),
        Command::Recommend(args) => run_recommend(args, format.unwrap_or(Format::Json)),
        Command::Absorb(args) => run_absorb(args, format.unwrap_or(Format::Tsv)),
        Command::Evaluate(args) => run_evaluate(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            f.code()
        }
    }
}

fn configure_threads(flag: Option<usize>) {
    let n = flag.or_else(|| {
        std::env::var("WALKRANK_THREADS")
            .ok()
            .and_then(|v| v.parse().ok())
    });
    if let Some(n) = n {
        // Capping the shared pool caps all library parallelism without
        // changing any result. Ignore failure: the pool is set only once.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

fn open(path: &Path) -> Result<File, Failure> {
    File::open(path).map_err(|e| usage(format!("cannot open {}: {e}", path.display())))
}

fn load_graph(path: &Path, undirected: bool) -> Result<DirectedGraph, Failure> {
    let file = open(path)?;
    Ok(load_directed_graph(file, ParseOptions { undirected })?)
}

fn load_ratings(path: &Path) -> Result<BipartiteGraph, Failure> {
    let file = open(path)?;
    let (b, warnings) = load_bipartite(file)?;
    for w in warnings {
        eprintln!("warning: {w}");
    }
    Ok(b)
}

/// label<TAB>value pairs from a TSV file; `#` starts a comment.
fn load_labeled_values(path: &Path) -> Result<Vec<(String, f64)>, Failure> {
    let reader = BufReader::new(open(path)?);
    let mut out = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split('\t');
        let label = parts.next().unwrap_or_default();
        let value: f64 = parts
            .next()
            .ok_or_else(|| usage(format!("{}:{}: missing value column", path.display(), idx + 1)))?
            .trim()
            .parse()
            .map_err(|e| usage(format!("{}:{}: {e}", path.display(), idx + 1)))?;
        out.push((label.to_owned(), value));
    }
    Ok(out)
}

/// One label per line; `#` starts a comment.
fn load_labels(path: &Path) -> Result<Vec<String>, Failure> {
    let reader = BufReader::new(open(path)?);
    let mut out = Vec::new();
    for line in reader.lines() {
        let line = line?;
        let line = line.trim();
        if !line.is_empty() && !line.starts_with('#') {
            out.push(line.to_owned());
        }
    }
    Ok(out)
}

fn split_labels(list: &str) -> Vec<&str> {
    list.split(',').map(str::trim).filter(|s| !s.is_empty()).collect()
}

/// Writes scores as ranked TSV or a schema-tagged JSON document.
fn emit_scores(labels: &[&str], scores: &ScoreVector, format: Format) -> Result<(), Failure> {
    let order = scores.ranked();
    let stdout = std::io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    match format {
        Format::Tsv => {
            for i in order {
                writeln!(out, "{}\t{}", labels[i], scores.values()[i])?;
            }
        }
        Format::Json => {
            let results: Vec<_> = order
                .iter()
                .enumerate()
                .map(|(rank, &i)| {
                    json!({"label": labels[i], "score": scores.values()[i], "rank": rank + 1})
                })
                .collect();
            let doc = json!({"schema": SCHEMA, "results": results});
            writeln!(out, "{}", serde_json::to_string_pretty(&doc)?)?;
        }
    }
    Ok(())
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        usage(format!("JSON encoding failed: {e}"))
    }
}

fn run_rank(args: RankArgs, format: Format) -> Result<(), Failure> {
    let g = load_graph(&args.graph, args.undirected)?;
    let labels: Vec<&str> = g.labels().collect();
    let mut params = PageRankParams::with_alpha(args.alpha);
    params.tolerance = args.tolerance;
    params.max_iterations = args.max_iterations;
    let scores = match args.algo {
        RankAlgo::Pagerank => {
            let p = TransitionMatrix::from_graph(&g, args.dangling.into())?;
            if let Some(trusted) = &args.trusted {
                let ids = split_labels(trusted)
                    .iter()
                    .map(|l| g.id(l))
                    .collect::<walkrank::Result<Vec<_>>>()?;
                params.teleport = Some(trusted_teleport(&ids, g.node_count())?);
            }
            pagerank(&p, &params)?
        }
        RankAlgo::Totalrank => {
            let p = TransitionMatrix::from_graph(&g, args.dangling.into())?;
            totalrank(&p, args.points)?
        }
        RankAlgo::Hits => {
            let result = hits(&g, args.tolerance, args.max_iterations)?;
            if args.hub {
                result.hub
            } else {
                result.authority
            }
        }
        RankAlgo::Eigenvector => eigenvector_centrality(&g, args.tolerance, args.max_iterations)?,
        RankAlgo::Citerank => {
            let tau = args
                .tau
                .ok_or_else(|| usage("citerank requires --tau (characteristic age)"))?;
            let ages_path = args
                .ages
                .as_ref()
                .ok_or_else(|| usage("citerank requires --ages FILE (label<TAB>age)"))?;
            let mut ages = vec![f64::NAN; g.node_count()];
            for (label, age) in load_labeled_values(ages_path)? {
                ages[g.id(&label)?] = age;
            }
            if let Some(missing) = ages.iter().position(|a| a.is_nan()) {
                return Err(usage(format!(
                    "ages file misses node {}",
                    g.label(missing)
                )));
            }
            let p = TransitionMatrix::from_graph(&g, args.dangling.into())?;
            citerank(&p, &ages, tau, args.alpha)?
        }
        RankAlgo::Ground => ground_node_rank(&g)?,
    };
    emit_scores(&labels, &scores, format)
}

fn run_centrality(args: CentralityArgs, format: Format) -> Result<(), Failure> {
    let g = load_graph(&args.graph, args.undirected)?;
    let labels: Vec<&str> = g.labels().collect();
    let scores = match args.measure {
        Measure::Degree => degree_centrality(&g)?,
        Measure::Betweenness => shortest_path_betweenness(&g, !args.exclude_endpoints)?,
        Measure::RwBetweenness => random_walk_betweenness(&g)?,
        Measure::SecondOrder => {
            let seed = args.seed.ok_or(walkrank::Error::SeedRequired)?;
            let mut params = SecondOrderParams::seeded(seed);
            params.walk_steps = args.walk_steps;
            params.burn_in = args.burn_in;
            params.min_returns = args.min_returns;
            params.walks = args.walks;
            second_order_centrality(&g, &params)?
        }
        Measure::Eigenvector => eigenvector_centrality(&g, 1e-12, 1000)?,
        Measure::Pagerank => {
            let p = TransitionMatrix::from_graph(&g, DanglingPolicy::Uniform)?;
            pagerank(&p, &PageRankParams::with_alpha(args.alpha))?
        }
    };
    let scores = ScoreVector::normalized(scores.into_values(), args.normalize.into())?;
    emit_scores(&labels, &scores, format)
}

fn run_similar(args: SimilarArgs, format: Format) -> Result<(), Failure> {
    let (matrix, labels): (SimilarityMatrix, Vec<String>) = match args.kind {
        SimilarKind::Pearson | SimilarKind::Cosine => {
            let b = load_ratings(&args.input)?;
            let axis = match args.axis {
                Axis::Users => ProfileAxis::Users,
                Axis::Items => ProfileAxis::Items,
            };
            let m = match args.kind {
                SimilarKind::Pearson => pearson_similarity(&b, axis)?,
                _ => cosine_similarity(&b, axis)?,
            };
            let labels = match axis {
                ProfileAxis::Users => (0..b.user_count())
                    .map(|u| b.user_label(u).to_owned())
                    .collect(),
                ProfileAxis::Items => (0..b.item_count())
                    .map(|i| b.item_label(i).to_owned())
                    .collect(),
            };
            (m, labels)
        }
        _ => {
            let g = load_graph(&args.input, args.undirected)?;
            let labels = g.labels().map(str::to_owned).collect();
            let m = match args.kind {
                SimilarKind::Commute => {
                    let lp = laplacian_pseudoinverse(&g)?;
                    commute_time(&g, &lp)?
                }
                SimilarKind::Ectd => {
                    let lp = laplacian_pseudoinverse(&g)?;
                    ectd(&g, &lp)?
                }
                SimilarKind::Lrw => lrw_similarity(&g, args.steps)?,
                SimilarKind::Srw => srw_similarity(&g, args.steps)?,
                SimilarKind::Regularized => {
                    let p = TransitionMatrix::from_graph(&g, args.dangling.into())?;
                    regularized_similarity(&p, args.alpha)?
                }
                _ => unreachable!("profile kinds handled above"),
            };
            (m, labels)
        }
    };
    let node = labels
        .iter()
        .position(|l| *l == args.node)
        .ok_or_else(|| walkrank::Error::UnknownLabel {
            label: args.node.clone(),
        })?;
    let ranked = matrix.ranked_for(node);
    let top = ranked.iter().take(args.top);
    let stdout = std::io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    match format {
        Format::Tsv => {
            for &(j, v) in top {
                writeln!(out, "{}\t{}", labels[j], v)?;
            }
        }
        Format::Json => {
            let results: Vec<_> = top
                .enumerate()
                .map(|(rank, &(j, v))| {
                    json!({"label": labels[j], "score": v, "rank": rank + 1})
                })
                .collect();
            let doc = json!({"schema": SCHEMA, "node": args.node, "results": results});
            writeln!(out, "{}", serde_json::to_string_pretty(&doc)?)?;
        }
    }
    Ok(())
}

fn emit_recommendations(
    list: &RecommendationList,
    labels: &[String],
    user: Option<&str>,
    format: Format,
) -> Result<(), Failure> {
    let stdout = std::io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    match format {
        Format::Tsv => {
            for &(i, score) in &list.items {
                writeln!(out, "{}\t{}", labels[i], score)?;
            }
        }
        Format::Json => {
            let items: Vec<_> = list
                .items
                .iter()
                .enumerate()
                .map(|(rank, &(i, score))| {
                    json!({"label": labels[i], "score": score, "rank": rank + 1})
                })
                .collect();
            let excluded: Vec<_> = list.excluded.iter().map(|&i| &labels[i]).collect();
            let doc = json!({
                "schema": SCHEMA,
                "user": user,
                "items": items,
                "excluded": excluded,
            });
            writeln!(out, "{}", serde_json::to_string_pretty(&doc)?)?;
        }
    }
    Ok(())
}

fn run_recommend(args: RecommendArgs, format: Format) -> Result<(), Failure> {
    if args.method == Method::Temperature {
        let g = load_graph(&args.input, args.undirected)?;
        let liked = args
            .liked
            .as_ref()
            .ok_or_else(|| usage("temperature requires --liked LABEL[,LABEL...]"))?;
        let liked = split_labels(liked)
            .iter()
            .map(|l| g.id(l))
            .collect::<walkrank::Result<Vec<_>>>()?;
        let disliked = match &args.disliked {
            Some(list) => split_labels(list)
                .iter()
                .map(|l| g.id(l))
                .collect::<walkrank::Result<Vec<_>>>()?,
            None => Vec::new(),
        };
        let mut list = temperature_recommend(&g, &liked, &disliked)?;
        list.items.truncate(args.top);
        let labels: Vec<String> = g.labels().map(str::to_owned).collect();
        return emit_recommendations(&list, &labels, None, format);
    }
    if args.method == Method::Random {
        return Err(usage(
            "the random scorer exists only for evaluation baselines",
        ));
    }
    let b = load_ratings(&args.input)?;
    let user_label = args
        .user
        .as_ref()
        .ok_or_else(|| usage("recommend requires --user LABEL"))?;
    let user = b.user_id(user_label)?;
    let scores = match args.method {
        Method::Probs => probs_scores(&b, user, args.theta)?,
        Method::Heats => heats_scores(&b, user)?,
        Method::Hybrid => hybrid_scores(
            &b,
            user,
            HybridParams {
                lambda: args.lambda,
                theta: args.theta,
            },
        )?,
        Method::Cf => {
            let sim = pearson_similarity(&b, ProfileAxis::Users)?;
            let values = (0..b.item_count())
                .map(|item| predict_rating_or_mean(&b, &sim, user, item))
                .collect::<walkrank::Result<Vec<_>>>()?;
            ScoreVector::raw(values)?
        }
        Method::Temperature | Method::Random => unreachable!("handled above"),
    };
    let collected: BTreeSet<usize> = b.items_of(user).map(|e| e.item).collect();
    let mut list = top_n(&scores, &collected, args.top);
    list.user = Some(user);
    let labels: Vec<String> = (0..b.item_count())
        .map(|i| b.item_label(i).to_owned())
        .collect();
    emit_recommendations(&list, &labels, Some(user_label), format)
}

fn run_absorb(args: AbsorbArgs, format: Format) -> Result<(), Failure> {
    let g = load_graph(&args.graph, args.undirected)?;
    match (&args.sinks, &args.boundary) {
        (Some(_), Some(_)) | (None, None) => Err(usage(
            "absorb needs exactly one of --sinks FILE or --boundary FILE",
        )),
        (Some(sinks_path), None) => {
            let sink_ids = load_labels(sinks_path)?
                .iter()
                .map(|l| g.id(l))
                .collect::<walkrank::Result<Vec<_>>>()?;
            let p = TransitionMatrix::from_graph(&g, args.dangling.into())?;
            let node_labels: Vec<String> = g.labels().map(str::to_owned).collect();
            let partition = AbsorbingPartition::with_sinks(&p, &sink_ids, node_labels.clone())?;
            let result = partition.absorption_result()?;
            let stdout = std::io::stdout();
            let mut out = BufWriter::new(stdout.lock());
            match format {
                Format::Tsv => {
                    write!(out, "node")?;
                    for &s in partition.sinks() {
                        write!(out, "\t{}", node_labels[s])?;
                    }
                    writeln!(out, "\tabsorption_time")?;
                    for (row, &t) in partition.transients().iter().enumerate() {
                        write!(out, "{}", node_labels[t])?;
                        for col in 0..partition.sinks().len() {
                            write!(out, "\t{}", result.f[(row, col)])?;
                        }
                        writeln!(out, "\t{}", result.absorption_time[row])?;
                    }
                }
                Format::Json => {
                    let sinks: Vec<_> =
                        partition.sinks().iter().map(|&s| &node_labels[s]).collect();
                    let rows: Vec<_> = partition
                        .transients()
                        .iter()
                        .enumerate()
                        .map(|(row, &t)| {
                            let probs: Vec<f64> = (0..partition.sinks().len())
                                .map(|col| result.f[(row, col)])
                                .collect();
                            json!({
                                "node": node_labels[t],
                                "absorption": probs,
                                "absorption_time": result.absorption_time[row],
                            })
                        })
                        .collect();
                    let doc = json!({"schema": SCHEMA, "sinks": sinks, "rows": rows});
                    writeln!(out, "{}", serde_json::to_string_pretty(&doc)?)?;
                }
            }
            Ok(())
        }
        (None, Some(boundary_path)) => {
            let boundary = load_labeled_values(boundary_path)?
                .iter()
                .map(|(l, v)| Ok((g.id(l)?, *v)))
                .collect::<walkrank::Result<Vec<_>>>()?;
            let temperatures = heat_equilibrium(&g, &boundary)?;
            let labels: Vec<&str> = g.labels().collect();
            emit_scores(&labels, &temperatures, format)
        }
    }
}

fn method_config(method: Method, lambda: f64, theta: f64) -> Result<ScoreMethod, Failure> {
    match method {
        Method::Probs => Ok(ScoreMethod::Probs { theta }),
        Method::Heats => Ok(ScoreMethod::Heats),
        Method::Hybrid => Ok(ScoreMethod::Hybrid(HybridParams { lambda, theta })),
        Method::Cf => Ok(ScoreMethod::CollaborativeFiltering),
        Method::Random => Ok(ScoreMethod::Random),
        Method::Temperature => Err(usage(
            "temperature works on item graphs and cannot be probe-evaluated",
        )),
    }
}

fn run_evaluate(args: EvaluateArgs) -> Result<(), Failure> {
    let b = load_ratings(&args.ratings)?;
    let config = EvaluationConfig {
        method: method_config(args.method, args.lambda, args.theta)?,
        probe_fraction: args.probe,
        seed: args.seed,
        list_length: args.top,
    };
    let report = evaluate(&b, &config)?;
    let doc = json!({
        "schema": SCHEMA,
        "recovery": report.recovery,
        "precision": report.precision,
        "diversity": report.diversity,
        "average_recommended_degree": report.average_recommended_degree,
        "users_evaluated": report.users_evaluated,
        "users_skipped": report.users_skipped,
        "probe_size": report.probe_size,
    });
    println!("{}", serde_json::to_string_pretty(&doc)?);
    Ok(())
}
