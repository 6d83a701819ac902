//! `score`: spectral community detection, mixed memberships, global testing,
//! and topic estimation from the command line.
//!
//! Every subcommand writes its artifact files into `--out-dir` plus a
//! `report.json` describing the run, and prints the same report on stdout.
//! Rerunning with an identical config and seed reproduces every artifact
//! byte for byte. Exit codes: 0 on success, 2 on usage errors, 1 when the
//! computation itself fails.

mod report;
mod sweep;
mod tables;

use std::fmt;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use ndarray::{Array2, ArrayView2};
use score_core::community::{
    dscore, hamming_error, score_plus, score_star, spectral_cluster, ClusterError, ClusterResult,
    MethodConfig, PostPca,
};
use score_core::inference::{
    gof_statistic, hier_score, sgnq, stepwise_gof, InfError, KSelector,
};
use score_core::mixedmem::{dynamic_mixed_score, mixed_score, MixedError};
use score_core::netcore::synthetic::{
    dcbm_instance, mixed_instance, plsi_instance, DirichletGroup, MixedInstanceSpec,
    PlsiInstanceSpec, ThetaSpec,
};
use score_core::netcore::{
    giant_component, load_corpus, load_edge_list, sample_dcmm, sample_plsi, EdgeListOptions,
    Graph, NetError,
};
use score_core::rng::derive_seed;
use score_core::spectra::{SpectraError, ThresholdRule};
use score_core::topics::{
    anchor_diagnostics, topic_score, tr_score, AnchorReport, CitationPairs, TopicError,
    TopicOptions,
};
use score_core::vertexhunt::{VhError, VhMethod, VhParams};

use report::Reporter;

#[derive(Parser)]
#[command(
    name = "score",
    version,
    about = "Spectral community detection, memberships, testing, and topics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a synthetic network or corpus and write it out.
    Generate(GenerateArgs),
    /// Cluster a network into k communities.
    Detect(DetectArgs),
    /// Estimate mixed community memberships.
    Mixed(MixedArgs),
    /// Track memberships across snapshots in the first snapshot's basis.
    Dynamic(DynamicArgs),
    /// Estimate topic vectors and document weights from a corpus.
    Topics(TopicsArgs),
    /// Test whether a network has more than one community.
    Testglobal(TestGlobalArgs),
    /// Scan candidate community counts with a goodness-of-fit statistic.
    #[command(name = "estimate-k")]
    EstimateK(EstimateKArgs),
    /// Goodness-of-fit test at a single candidate community count.
    Gof(GofArgs),
    /// Split communities recursively until a stopping test accepts.
    Hier(HierArgs),
    /// Run a parameter sweep from a JSON spec and write long-format results.
    Bench(BenchArgs),
}

/// Flags shared by every subcommand.
#[derive(Args, serde::Serialize)]
struct Common {
    /// Base seed for every random choice in the run.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Directory for artifacts and the report.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Clone, Copy, ValueEnum, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
enum GenModel {
    /// Degree-corrected block model with hard labels.
    Dcbm,
    /// Degree-corrected mixed-membership network.
    Mixed,
    /// Topic-model corpus.
    Plsi,
}

#[derive(Clone, Copy, ValueEnum, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
enum ThetaKind {
    Fixed,
    Uniform,
    /// Reciprocals drawn uniformly from [lo, hi].
    InverseUniform,
}

#[derive(Args, serde::Serialize)]
struct GenerateArgs {
    /// Model family to sample from.
    #[arg(value_enum)]
    model: GenModel,
    /// Node count (dcbm only; mixed derives it from the group sizes).
    #[arg(long, default_value_t = 100)]
    n: usize,
    /// Communities or topics.
    #[arg(long, default_value_t = 2)]
    k: usize,
    /// Within-community edge intensity.
    #[arg(long, default_value_t = 0.3)]
    within: f64,
    /// Between-community edge intensity.
    #[arg(long, default_value_t = 0.05)]
    between: f64,
    /// Degree parameter distribution.
    #[arg(long, value_enum, default_value_t = ThetaKind::Fixed)]
    theta: ThetaKind,
    /// Lower bound, or the constant itself when --theta fixed.
    #[arg(long, default_value_t = 1.0)]
    theta_lo: f64,
    #[arg(long, default_value_t = 1.0)]
    theta_hi: f64,
    /// Pure nodes per community (mixed).
    #[arg(long, default_value_t = 25)]
    pure_per_community: usize,
    /// Dirichlet-mixed nodes (mixed).
    #[arg(long, default_value_t = 50)]
    mixed_count: usize,
    /// Symmetric Dirichlet parameter for mixed rows or mixed documents.
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    /// Words exclusive to each topic (plsi).
    #[arg(long, default_value_t = 3)]
    anchors_per_topic: usize,
    /// Words shared across topics (plsi).
    #[arg(long, default_value_t = 40)]
    shared_words: usize,
    /// Single-topic documents per topic (plsi).
    #[arg(long, default_value_t = 10)]
    pure_docs: usize,
    /// Mixed documents (plsi).
    #[arg(long, default_value_t = 60)]
    mixed_docs: usize,
    /// Words per sampled document (plsi).
    #[arg(long, default_value_t = 300)]
    doc_length: u64,
    #[command(flatten)]
    #[serde(flatten)]
    common: Common,
}

#[derive(Args, serde::Serialize)]
struct DetectArgs {
    /// Edge list file: `u v` per line, `#` starts a comment.
    #[arg(long)]
    input: PathBuf,
    /// Number of communities.
    #[arg(long)]
    k: usize,
    /// score | score-plus | score-star | score-q | rsc | laplacian | glm |
    /// osc | dscore
    #[arg(long, default_value = "score", conflicts_with = "config")]
    method: String,
    /// Full method config as a JSON object (inline or a file path).
    #[arg(long)]
    config: Option<String>,
    /// Fixed ratio clip threshold (default: the adaptive ln-n rule).
    #[arg(long, conflicts_with = "quantile")]
    threshold: Option<f64>,
    /// Clip ratios at this upper quantile of their magnitudes.
    #[arg(long)]
    quantile: Option<f64>,
    /// Normalization ridge (laplacian/glm default 0.1, score-plus 0.05).
    #[arg(long)]
    delta: Option<f64>,
    /// Relative spectral-gap threshold for score-plus.
    #[arg(long, default_value_t = 0.1)]
    gap_threshold: f64,
    /// Eigenvalue shift for score-star.
    #[arg(long, default_value_t = 1.0)]
    c0: f64,
    /// Row-norm exponent for score-q.
    #[arg(long, default_value_t = 2.0)]
    q: f64,
    /// Treat the edge list as directed (dscore only).
    #[arg(long)]
    directed: bool,
    /// Node ids in the file start at 1.
    #[arg(long)]
    one_indexed: bool,
    /// Truth labels CSV (`node,label`) for error metrics.
    #[arg(long)]
    truth: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    common: Common,
}

#[derive(Clone, Copy, ValueEnum, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
enum VhKind {
    Sp,
    Cvs,
    Svs0,
    SvsStar,
    SvsPlus,
}

impl VhKind {
    fn method(self) -> VhMethod {
        match self {
            VhKind::Sp => VhMethod::Sp,
            VhKind::Cvs => VhMethod::Cvs,
            VhKind::Svs0 => VhMethod::Svs0,
            VhKind::SvsStar => VhMethod::SvsStar,
            VhKind::SvsPlus => VhMethod::SvsPlus,
        }
    }
}

/// Vertex hunting tunables shared by the membership and topic commands.
#[derive(Args, serde::Serialize)]
struct VhArgs {
    /// Vertex hunting method [default: sp for networks, svs-plus for topics].
    #[arg(long = "vh", value_enum)]
    vh: Option<VhKind>,
    /// k-means sketch size for svs0/svs-star/svs-plus.
    #[arg(long)]
    sketch_size: Option<usize>,
    /// Nearby points a point needs to survive the svs-plus denoise.
    #[arg(long)]
    knn_min_neighbors: Option<usize>,
    /// Neighbors averaged into each survivor for svs-plus.
    #[arg(long)]
    knn_average: Option<usize>,
}

impl VhArgs {
    fn params(&self) -> VhParams {
        let mut p = VhParams::default();
        if self.sketch_size.is_some() {
            p.sketch_size = self.sketch_size;
        }
        if let Some(m) = self.knn_min_neighbors {
            p.knn_min_neighbors = m;
        }
        if self.knn_average.is_some() {
            p.knn_average = self.knn_average;
        }
        p
    }
}

#[derive(Args, serde::Serialize)]
struct MixedArgs {
    /// Edge list file.
    #[arg(long)]
    input: PathBuf,
    /// Number of communities.
    #[arg(long)]
    k: usize,
    #[command(flatten)]
    #[serde(flatten)]
    vh_args: VhArgs,
    /// Fixed ratio clip threshold (default: the adaptive ln-n rule).
    #[arg(long, conflicts_with = "quantile")]
    threshold: Option<f64>,
    /// Clip ratios at this upper quantile of their magnitudes.
    #[arg(long)]
    quantile: Option<f64>,
    /// Node ids in the file start at 1.
    #[arg(long)]
    one_indexed: bool,
    /// Truth memberships CSV (`node,pi_1,..`) for error metrics.
    #[arg(long)]
    truth: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    common: Common,
}

#[derive(Args, serde::Serialize)]
struct DynamicArgs {
    /// Snapshot edge lists in time order; repeat the flag per snapshot.
    /// All snapshots must index the same node set.
    #[arg(long, required = true)]
    input: Vec<PathBuf>,
    /// Number of communities.
    #[arg(long)]
    k: usize,
    #[command(flatten)]
    #[serde(flatten)]
    vh_args: VhArgs,
    /// Clip ratio magnitudes at this value.
    #[arg(long)]
    cap: Option<f64>,
    /// Hunt vertices once on the pooled ratio rows of all snapshots.
    #[arg(long)]
    pool: bool,
    /// Node ids in the files start at 1.
    #[arg(long)]
    one_indexed: bool,
    #[command(flatten)]
    #[serde(flatten)]
    common: Common,
}

#[derive(Args, serde::Serialize)]
struct TopicsArgs {
    /// Sparse corpus file: `doc word count` per line, `#` comments.
    #[arg(long)]
    corpus: PathBuf,
    /// Vocabulary file, one token per line.
    #[arg(long)]
    vocab: PathBuf,
    /// Number of topics.
    #[arg(long)]
    k: usize,
    #[command(flatten)]
    #[serde(flatten)]
    vh_args: VhArgs,
    /// Ratio truncation: `auto` or a fixed threshold (default: none).
    #[arg(long)]
    truncate: Option<String>,
    /// Estimate through document space instead of word space.
    #[arg(long)]
    doc_space: bool,
    /// Anchor candidates reported per topic.
    #[arg(long, default_value_t = 3)]
    top_anchors: usize,
    /// Citations CSV (`citing,cited[,count]`) for export ranking.
    #[arg(long)]
    citations: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    common: Common,
}

#[derive(Args, serde::Serialize)]
struct TestGlobalArgs {
    /// Edge list file.
    #[arg(long)]
    input: PathBuf,
    /// Node ids in the file start at 1.
    #[arg(long)]
    one_indexed: bool,
    #[command(flatten)]
    #[serde(flatten)]
    common: Common,
}

#[derive(Args, serde::Serialize)]
struct EstimateKArgs {
    /// Edge list file.
    #[arg(long)]
    input: PathBuf,
    /// Test level for each step of the scan.
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Largest candidate community count.
    #[arg(long, default_value_t = 6)]
    m_max: usize,
    /// Bootstrap resamples per candidate.
    #[arg(long, default_value_t = 30)]
    resamples: usize,
    /// Node ids in the file start at 1.
    #[arg(long)]
    one_indexed: bool,
    #[command(flatten)]
    #[serde(flatten)]
    common: Common,
}

#[derive(Args, serde::Serialize)]
struct GofArgs {
    /// Edge list file.
    #[arg(long)]
    input: PathBuf,
    /// Candidate community count to test.
    #[arg(long)]
    k: usize,
    /// Test level the rejection metric is judged at.
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Bootstrap resamples.
    #[arg(long, default_value_t = 30)]
    resamples: usize,
    /// Node ids in the file start at 1.
    #[arg(long)]
    one_indexed: bool,
    #[command(flatten)]
    #[serde(flatten)]
    common: Common,
}

#[derive(Args, serde::Serialize)]
struct HierArgs {
    /// Edge list file.
    #[arg(long)]
    input: PathBuf,
    /// Keep splitting while the test p-value is at most this; 1 disables
    /// the test and splits whenever a split is possible.
    #[arg(long, default_value_t = 0.001)]
    alpha0: f64,
    /// Pick each split size by the largest relative eigengap up to this.
    #[arg(long, default_value_t = 4, conflicts_with = "fixed_k")]
    k_max: usize,
    /// Comma-separated split sizes per depth (last repeats), e.g. `2,3`.
    #[arg(long)]
    fixed_k: Option<String>,
    /// Leave nodes sets smaller than this alone.
    #[arg(long, default_value_t = 20)]
    min_split: usize,
    /// Node ids in the file start at 1.
    #[arg(long)]
    one_indexed: bool,
    #[command(flatten)]
    #[serde(flatten)]
    common: Common,
}

#[derive(Args, serde::Serialize)]
pub(crate) struct BenchArgs {
    /// Sweep spec JSON file.
    #[arg(long)]
    spec: PathBuf,
    #[command(flatten)]
    #[serde(flatten)]
    pub(crate) common: Common,
}

/// A CLI failure: either the arguments cannot be acted on (exit 2) or the
/// computation itself failed (exit 1).
#[derive(Debug)]
pub(crate) enum CliError {
    Usage(String),
    Runtime(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Runtime(m) => f.write_str(m),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

macro_rules! runtime_from {
    ($($ty:ty),* $(,)?) => {$(
        impl From<$ty> for CliError {
            fn from(e: $ty) -> Self {
                CliError::Runtime(e.to_string())
            }
        }
    )*};
}

runtime_from!(
    NetError,
    ClusterError,
    MixedError,
    TopicError,
    InfError,
    VhError,
    SpectraError,
);

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli.command) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}

/// Print without panicking when stdout is a closed pipe (`score ... | head`).
pub(crate) fn print_stdout(text: &str) {
    use std::io::Write as _;
    let _ = std::io::stdout().write_all(text.as_bytes());
}

fn run(cmd: Command) -> Result<(), CliError> {
    match cmd {
        Command::Generate(a) => run_generate(a),
        Command::Detect(a) => run_detect(a),
        Command::Mixed(a) => run_mixed(a),
        Command::Dynamic(a) => run_dynamic(a),
        Command::Topics(a) => run_topics(a),
        Command::Testglobal(a) => run_testglobal(a),
        Command::EstimateK(a) => run_estimate_k(a),
        Command::Gof(a) => run_gof(a),
        Command::Hier(a) => run_hier(a),
        Command::Bench(a) => sweep::run_bench(&a),
    }
}

fn load_graph(path: &Path, directed: bool, one_indexed: bool) -> Result<Graph, CliError> {
    load_edge_list(
        path,
        EdgeListOptions {
            directed,
            one_indexed,
        },
    )
    .map_err(|e| match e {
        // The read error already names the path.
        NetError::Io { .. } => CliError::Runtime(e.to_string()),
        other => CliError::Runtime(format!("{}: {other}", path.display())),
    })
}

fn theta_spec(kind: ThetaKind, lo: f64, hi: f64) -> ThetaSpec {
    match kind {
        ThetaKind::Fixed => ThetaSpec::Fixed { value: lo },
        ThetaKind::Uniform => ThetaSpec::Uniform { lo, hi },
        ThetaKind::InverseUniform => ThetaSpec::InverseUniform { lo, hi },
    }
}

fn ratio_rule(threshold: Option<f64>, quantile: Option<f64>) -> Option<ThresholdRule> {
    match (threshold, quantile) {
        (Some(t), _) => Some(ThresholdRule::Fixed(t)),
        (_, Some(q)) => Some(ThresholdRule::UpperQuantile(q)),
        _ => None,
    }
}

fn run_generate(args: GenerateArgs) -> Result<(), CliError> {
    let seed = args.common.seed;
    let mut rep = Reporter::new("generate", &args, seed, &args.common.out_dir)?;
    let net_seed = derive_seed(seed, "generate-net", 0);
    match args.model {
        GenModel::Dcbm => {
            let theta = theta_spec(args.theta, args.theta_lo, args.theta_hi);
            let (params, labels) =
                dcbm_instance(args.n, args.k, args.within, args.between, theta, seed)?;
            let g = sample_dcmm(&params, net_seed)?;
            let nodes: Vec<usize> = (0..g.node_count()).collect();
            rep.artifact("edges.txt", &tables::edges_text(&g))?;
            rep.artifact("labels.csv", &tables::labels_csv(&nodes, &labels))?;
            rep.metric("n", g.node_count() as f64);
            rep.metric("edges", g.edges().len() as f64);
            rep.metric("k", args.k as f64);
        }
        GenModel::Mixed => {
            let spec = MixedInstanceSpec {
                k: args.k,
                within: args.within,
                between: args.between,
                pure_per_community: args.pure_per_community,
                groups: vec![DirichletGroup {
                    count: args.mixed_count,
                    alpha: vec![args.alpha; args.k],
                }],
                theta: theta_spec(args.theta, args.theta_lo, args.theta_hi),
            };
            let (params, pi) = mixed_instance(&spec, seed)?;
            let g = sample_dcmm(&params, net_seed)?;
            let nodes: Vec<usize> = (0..g.node_count()).collect();
            rep.artifact("edges.txt", &tables::edges_text(&g))?;
            rep.artifact("memberships.csv", &tables::memberships_csv(&nodes, &pi.view()))?;
            rep.metric("n", g.node_count() as f64);
            rep.metric("edges", g.edges().len() as f64);
            rep.metric("k", args.k as f64);
        }
        GenModel::Plsi => {
            let spec = PlsiInstanceSpec {
                k: args.k,
                anchors_per_topic: args.anchors_per_topic,
                shared_words: args.shared_words,
                pure_docs_per_topic: args.pure_docs,
                mixed_docs: args.mixed_docs,
                dirichlet_alpha: args.alpha,
            };
            let params = plsi_instance(&spec, seed)?;
            let lengths = vec![args.doc_length; params.doc_count()];
            let corpus = sample_plsi(&params, &lengths, net_seed)?;
            let vocab: Vec<String> = (0..params.word_count()).map(|j| format!("w{j}")).collect();
            let docs: Vec<String> = (0..params.doc_count()).map(|i| i.to_string()).collect();
            rep.artifact("corpus.txt", &corpus_text(&corpus))?;
            rep.artifact("vocab.txt", &format!("{}\n", vocab.join("\n")))?;
            rep.artifact(
                "a_true.csv",
                &tables::topic_rows_csv("word", &vocab, &params.a.view()),
            )?;
            rep.artifact(
                "w_true.csv",
                &tables::topic_rows_csv("doc", &docs, &params.w.t()),
            )?;
            rep.metric("words", params.word_count() as f64);
            rep.metric("docs", params.doc_count() as f64);
            rep.metric("k", args.k as f64);
        }
    }
    rep.finish()
}

/// Rebuild integer counts from the stored frequencies: `doc word count`
/// triplets for the nonzero cells, documents in order.
fn corpus_text(corpus: &score_core::netcore::Corpus) -> String {
    let d = corpus.frequencies();
    let mut out = String::new();
    for i in 0..corpus.doc_count() {
        let len = corpus.lengths()[i] as f64;
        for j in 0..corpus.word_count() {
            let c = (d[[j, i]] * len).round() as u64;
            if c > 0 {
                let _ = writeln!(out, "{i} {j} {c}");
            }
        }
    }
    out
}

/// Per-method tuning knobs, shared between `detect` and the bench sweeps.
pub(crate) struct MethodTuning {
    pub threshold: Option<f64>,
    pub quantile: Option<f64>,
    pub delta: Option<f64>,
    pub gap_threshold: f64,
    pub c0: f64,
    pub q: f64,
}

impl Default for MethodTuning {
    fn default() -> Self {
        MethodTuning {
            threshold: None,
            quantile: None,
            delta: None,
            gap_threshold: 0.1,
            c0: 1.0,
            q: 2.0,
        }
    }
}

fn override_ratio_threshold(
    mut cfg: MethodConfig,
    rule: Option<ThresholdRule>,
) -> Result<MethodConfig, CliError> {
    if let Some(rule) = rule {
        match &mut cfg.post_pca {
            PostPca::Score { threshold } => *threshold = rule,
            _ => {
                return Err(CliError::Usage(
                    "--threshold/--quantile only apply to ratio methods".into(),
                ))
            }
        }
    }
    Ok(cfg)
}

/// Run one of the named clustering methods with the given tuning.
pub(crate) fn run_named_method(
    g: &Graph,
    k: usize,
    name: &str,
    tun: &MethodTuning,
    seed: u64,
) -> Result<ClusterResult, CliError> {
    let rule = ratio_rule(tun.threshold, tun.quantile);
    let cfg = match name {
        "score" => Some(MethodConfig::score()),
        "osc" => Some(MethodConfig::osc()),
        "rsc" => Some(MethodConfig::rsc()),
        "laplacian" => Some(MethodConfig::laplacian(tun.delta.unwrap_or(0.1))),
        "glm" => Some(MethodConfig::glm(tun.delta.unwrap_or(0.1))),
        "score-q" => Some(MethodConfig::score_q(tun.q)),
        _ => None,
    };
    if let Some(cfg) = cfg {
        let cfg = override_ratio_threshold(cfg, rule)?;
        return Ok(spectral_cluster(g, k, &cfg, seed)?);
    }
    match name {
        "score-plus" => Ok(score_plus(
            g,
            k,
            tun.gap_threshold,
            tun.delta.unwrap_or(0.05),
            seed,
        )?),
        "score-star" => Ok(score_star(g, k, tun.c0, seed)?),
        "dscore" => {
            let t = tun
                .threshold
                .unwrap_or_else(|| (g.node_count() as f64).ln());
            Ok(dscore(g, k, t, seed)?)
        }
        other => Err(CliError::Usage(format!(
            "unknown method `{other}`; expected one of score, score-plus, \
             score-star, score-q, rsc, laplacian, glm, osc, dscore"
        ))),
    }
}

fn parse_method_config(blob: &str) -> Result<MethodConfig, CliError> {
    let text = if blob.trim_start().starts_with('{') {
        blob.to_string()
    } else {
        std::fs::read_to_string(blob)
            .map_err(|e| CliError::Runtime(format!("cannot read {blob}: {e}")))?
    };
    serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("invalid method config: {e}")))
}

fn run_detect(args: DetectArgs) -> Result<(), CliError> {
    if args.k == 0 {
        return Err(CliError::Usage("--k must be at least 1".into()));
    }
    let seed = args.common.seed;
    let mut rep = Reporter::new("detect", &args, seed, &args.common.out_dir)?;
    if args.directed && (args.method != "dscore" || args.config.is_some()) {
        return Err(CliError::Usage(
            "--directed only works with --method dscore".into(),
        ));
    }
    if args.method == "dscore" && !args.directed {
        return Err(CliError::Usage("dscore needs --directed".into()));
    }
    let g = load_graph(&args.input, args.directed, args.one_indexed)?;
    let n_total = g.node_count();
    // Directed graphs are clustered whole; undirected ones on the giant
    // component, reported under their original node ids.
    let (sub, nodes) = if args.directed {
        let nodes = (0..g.node_count()).collect::<Vec<_>>();
        (g, nodes)
    } else {
        giant_component(&g)
    };
    let tun = MethodTuning {
        threshold: args.threshold,
        quantile: args.quantile,
        delta: args.delta,
        gap_threshold: args.gap_threshold,
        c0: args.c0,
        q: args.q,
    };
    let res = match &args.config {
        Some(blob) => {
            let cfg = override_ratio_threshold(
                parse_method_config(blob)?,
                ratio_rule(args.threshold, args.quantile),
            )?;
            spectral_cluster(&sub, args.k, &cfg, seed)?
        }
        None => run_named_method(&sub, args.k, &args.method, &tun, seed)?,
    };
    rep.artifact("labels.csv", &tables::labels_csv(&nodes, &res.labels))?;
    rep.metric("n_total", n_total as f64);
    rep.metric("n_giant", sub.node_count() as f64);
    rep.metric("k", args.k as f64);
    rep.metric("inertia", res.inertia);
    if let Some(fired) = res.used_extra_eigenvector {
        rep.metric("used_extra_eigenvector", f64::from(u8::from(fired)));
    }
    if let Some((l, r)) = res.off_support {
        rep.metric("off_support_left", l as f64);
        rep.metric("off_support_right", r as f64);
    }
    if let Some(truth_path) = &args.truth {
        let rows = tables::read_labels_csv(truth_path)?;
        let truth = lookup_truth_labels(&rows, &nodes, truth_path)?;
        let (errors, rate) = hamming_error(&res.labels, &truth)?;
        rep.metric("errors_vs_truth", errors as f64);
        rep.metric("error_rate", rate);
    }
    rep.finish()
}

/// Arrange truth labels in the order of `nodes`, insisting every node has one.
fn lookup_truth_labels(
    rows: &[(usize, usize)],
    nodes: &[usize],
    path: &Path,
) -> Result<Vec<usize>, CliError> {
    let by_node: std::collections::HashMap<usize, usize> = rows.iter().copied().collect();
    nodes
        .iter()
        .map(|&n| {
            by_node.get(&n).copied().ok_or_else(|| {
                CliError::Runtime(format!("{}: no label for node {n}", path.display()))
            })
        })
        .collect()
}

fn run_mixed(args: MixedArgs) -> Result<(), CliError> {
    let seed = args.common.seed;
    let mut rep = Reporter::new("mixed", &args, seed, &args.common.out_dir)?;
    let g = load_graph(&args.input, false, args.one_indexed)?;
    let (sub, nodes) = giant_component(&g);
    let rule = ratio_rule(args.threshold, args.quantile).unwrap_or(ThresholdRule::Auto);
    let est = mixed_score(
        &sub,
        args.k,
        args.vh_args.vh.unwrap_or(VhKind::Sp).method(),
        &args.vh_args.params(),
        rule,
        seed,
    )?;
    rep.artifact(
        "memberships.csv",
        &tables::memberships_csv(&nodes, &est.pi_hat.view()),
    )?;
    rep.metric("n_total", g.node_count() as f64);
    rep.metric("n_giant", sub.node_count() as f64);
    rep.metric("k", args.k as f64);
    rep.metric("uniform_fallbacks", est.uniform_fallbacks as f64);
    rep.metric("vh_candidates", est.vertices.candidate_count as f64);
    rep.metric("vh_max_residual", est.vertices.max_residual);
    if let Some(truth_path) = &args.truth {
        let rows = tables::read_memberships_csv(truth_path)?;
        let truth = align_truth_memberships(&rows, &nodes, args.k, truth_path)?;
        let (mse, max_l1) = sweep::best_membership_metrics(&est.pi_hat.view(), &truth.view())?;
        rep.metric("membership_mse", mse);
        rep.metric("max_l1_error", max_l1);
    }
    rep.finish()
}

fn align_truth_memberships(
    rows: &[(usize, Vec<f64>)],
    nodes: &[usize],
    k: usize,
    path: &Path,
) -> Result<Array2<f64>, CliError> {
    let by_node: std::collections::HashMap<usize, &Vec<f64>> =
        rows.iter().map(|(n, pi)| (*n, pi)).collect();
    let mut truth = Array2::zeros((nodes.len(), k));
    for (r, &n) in nodes.iter().enumerate() {
        let pi = by_node.get(&n).ok_or_else(|| {
            CliError::Runtime(format!("{}: no memberships for node {n}", path.display()))
        })?;
        if pi.len() != k {
            return Err(CliError::Runtime(format!(
                "{}: node {n} has {} weights, expected {k}",
                path.display(),
                pi.len()
            )));
        }
        for (c, &v) in pi.iter().enumerate() {
            truth[[r, c]] = v;
        }
    }
    Ok(truth)
}

fn run_dynamic(args: DynamicArgs) -> Result<(), CliError> {
    let seed = args.common.seed;
    let mut rep = Reporter::new("dynamic", &args, seed, &args.common.out_dir)?;
    let mut snapshots = Vec::new();
    for path in &args.input {
        snapshots.push(load_graph(path, false, args.one_indexed)?);
    }
    let out = dynamic_mixed_score(
        &snapshots,
        args.k,
        args.vh_args.vh.unwrap_or(VhKind::Sp).method(),
        &args.vh_args.params(),
        args.cap,
        args.pool,
        seed,
    )?;
    let traj_views: Vec<ArrayView2<f64>> = out.trajectories.iter().map(|m| m.view()).collect();
    let pi_views: Vec<ArrayView2<f64>> =
        out.estimates.iter().map(|e| e.pi_hat.view()).collect();
    rep.artifact(
        "trajectories.csv",
        &tables::snapshots_csv("dist_to_v", &traj_views),
    )?;
    rep.artifact("memberships.csv", &tables::snapshots_csv("pi", &pi_views))?;
    rep.metric("snapshots", snapshots.len() as f64);
    rep.metric("n", snapshots[0].node_count() as f64);
    rep.metric("k", args.k as f64);
    rep.finish()
}

fn parse_truncate(arg: &Option<String>) -> Result<Option<ThresholdRule>, CliError> {
    match arg.as_deref() {
        None => Ok(None),
        Some("auto") => Ok(Some(ThresholdRule::Auto)),
        Some(text) => text
            .parse::<f64>()
            .map(|t| Some(ThresholdRule::Fixed(t)))
            .map_err(|_| {
                CliError::Usage(format!(
                    "--truncate takes `auto` or a number, got `{text}`"
                ))
            }),
    }
}

fn anchors_csv(report: &AnchorReport, names: &[String]) -> String {
    let mut out = String::from("topic,rank,word,score\n");
    for (t, list) in report.per_topic.iter().enumerate() {
        for (r, a) in list.iter().enumerate() {
            let _ = writeln!(out, "{},{},{},{}", t + 1, r + 1, names[a.word], a.score);
        }
    }
    out
}

fn run_topics(args: TopicsArgs) -> Result<(), CliError> {
    let seed = args.common.seed;
    let mut rep = Reporter::new("topics", &args, seed, &args.common.out_dir)?;
    let corpus = load_corpus(&args.corpus, &args.vocab).map_err(|e| match e {
        NetError::Io { .. } => CliError::Runtime(e.to_string()),
        other => CliError::Runtime(format!("{}: {other}", args.corpus.display())),
    })?;
    let options = TopicOptions {
        vh_method: args.vh_args.vh.unwrap_or(VhKind::SvsPlus).method(),
        vh_params: args.vh_args.params(),
        truncate: parse_truncate(&args.truncate)?,
        doc_space: args.doc_space,
    };
    let est = topic_score(&corpus, args.k, &options, seed)?;
    let vocab: Vec<String> = match corpus.vocab() {
        Some(tokens) => tokens.to_vec(),
        None => (0..corpus.word_count()).map(|j| format!("w{j}")).collect(),
    };
    let docs: Vec<String> = (0..corpus.doc_count()).map(|i| i.to_string()).collect();
    rep.artifact(
        "a_hat.csv",
        &tables::topic_rows_csv("word", &vocab, &est.a_hat.view()),
    )?;
    rep.artifact(
        "w_hat.csv",
        &tables::topic_rows_csv("doc", &docs, &est.w_hat.t()),
    )?;
    let anchors = anchor_diagnostics(&est, args.top_anchors);
    rep.artifact("anchors.csv", &anchors_csv(&anchors, &vocab))?;
    rep.metric("words", corpus.word_count() as f64);
    rep.metric("docs", corpus.doc_count() as f64);
    rep.metric("k", args.k as f64);
    rep.metric("dropped_words", est.dropped_words.len() as f64);
    rep.metric("anchor_free", f64::from(u8::from(anchors.anchor_free)));
    rep.metric("vh_candidates", est.vertices.candidate_count as f64);
    rep.metric("vh_max_residual", est.vertices.max_residual);
    if let Some(cit_path) = &args.citations {
        let (pairs, counts) = tables::read_citations_csv(cit_path)?;
        let cites = CitationPairs::new(pairs, counts)?;
        match tr_score(&est.w_hat.view(), &cites) {
            Ok(tr) => {
                rep.metric("tr_separated", 0.0);
                rep.metric("tr_iterations", tr.iterations as f64);
                rep.metric("tr_grad_norm", tr.grad_norm);
                rep.metric("tr_log_likelihood", tr.log_likelihood);
                for (t, &m) in tr.mu_hat.iter().enumerate() {
                    rep.metric(&format!("mu_{}", t + 1), m);
                }
                let mut ranking = String::from("rank,topic,mu\n");
                for (r, &t) in tr.ranking.iter().enumerate() {
                    let _ = writeln!(ranking, "{},{},{}", r + 1, t + 1, tr.mu_hat[t]);
                }
                rep.artifact("ranking.csv", &ranking)?;
            }
            Err(TopicError::Separation { direction }) => {
                // A diverging likelihood still identifies which topics sit on
                // the exporting side, so report the direction instead.
                eprintln!(
                    "note: citation exports separated; reporting the direction only"
                );
                rep.metric("tr_separated", 1.0);
                for (t, &d) in direction.iter().enumerate() {
                    rep.metric(&format!("tr_direction_{}", t + 1), d);
                }
            }
            Err(e) => return Err(e.into()),
        }
    }
    rep.finish()
}

fn run_testglobal(args: TestGlobalArgs) -> Result<(), CliError> {
    let seed = args.common.seed;
    let mut rep = Reporter::new("testglobal", &args, seed, &args.common.out_dir)?;
    let g = load_graph(&args.input, false, args.one_indexed)?;
    let (sub, _) = giant_component(&g);
    let res = sgnq(&sub)?;
    rep.metric("n_total", g.node_count() as f64);
    rep.metric("n_giant", sub.node_count() as f64);
    rep.metric("q_n", res.q_n);
    rep.metric("phi_n", res.phi_n);
    rep.metric("eta_norm_sq", res.eta_norm_sq);
    rep.metric("p_value", res.p_value);
    rep.finish()
}

fn run_estimate_k(args: EstimateKArgs) -> Result<(), CliError> {
    let seed = args.common.seed;
    let mut rep = Reporter::new("estimate-k", &args, seed, &args.common.out_dir)?;
    let g = load_graph(&args.input, false, args.one_indexed)?;
    let (sub, _) = giant_component(&g);
    let trace = stepwise_gof(&sub, args.alpha, args.m_max, args.resamples, seed)?;
    rep.artifact(
        "gof_trace.csv",
        &tables::gof_trace_csv(&trace.psi, &trace.q, &trace.bias),
    )?;
    rep.metric("n_total", g.node_count() as f64);
    rep.metric("n_giant", sub.node_count() as f64);
    rep.metric("z_alpha", trace.z_alpha);
    rep.metric("c_n", trace.c_n as f64);
    rep.metric("steps", trace.psi.len() as f64);
    for (m, &psi) in trace.psi.iter().enumerate() {
        rep.metric(&format!("psi_{}", m + 1), psi);
    }
    if let Some(k_hat) = trace.k_hat {
        rep.metric("k_hat", k_hat as f64);
    }
    rep.finish()
}

fn run_gof(args: GofArgs) -> Result<(), CliError> {
    if !(0.0 < args.alpha && args.alpha < 1.0) {
        return Err(CliError::Usage(format!(
            "--alpha must lie in (0,1), got {}",
            args.alpha
        )));
    }
    let seed = args.common.seed;
    let mut rep = Reporter::new("gof", &args, seed, &args.common.out_dir)?;
    let g = load_graph(&args.input, false, args.one_indexed)?;
    let (sub, _) = giant_component(&g);
    let step = gof_statistic(&sub, args.k, args.resamples, seed)?;
    let z_alpha = score_core::inference::normal_quantile(1.0 - args.alpha);
    rep.metric("n_total", g.node_count() as f64);
    rep.metric("n_giant", sub.node_count() as f64);
    rep.metric("k", args.k as f64);
    rep.metric("psi", step.psi);
    rep.metric("q", step.q);
    rep.metric("bias", step.bias);
    rep.metric("c_n", step.c_n as f64);
    rep.metric("z_alpha", z_alpha);
    rep.metric("reject", f64::from(u8::from(step.psi > z_alpha)));
    rep.finish()
}

fn parse_fixed_k(text: &str) -> Result<Vec<usize>, CliError> {
    let sizes: Result<Vec<usize>, _> =
        text.split(',').map(|f| f.trim().parse::<usize>()).collect();
    match sizes {
        Ok(v) if !v.is_empty() => Ok(v),
        _ => Err(CliError::Usage(format!(
            "--fixed-k takes comma-separated split sizes, got `{text}`"
        ))),
    }
}

fn run_hier(args: HierArgs) -> Result<(), CliError> {
    let seed = args.common.seed;
    let mut rep = Reporter::new("hier", &args, seed, &args.common.out_dir)?;
    let g = load_graph(&args.input, false, args.one_indexed)?;
    let selector = match &args.fixed_k {
        Some(list) => KSelector::Fixed {
            per_depth: parse_fixed_k(list)?,
        },
        None => KSelector::Scree { k_max: args.k_max },
    };
    let tree = hier_score(&g, args.alpha0, &selector, args.min_split, seed)?;
    print_stdout(&tree.render_text());
    let json = serde_json::to_string_pretty(&tree)
        .map_err(|e| CliError::Runtime(format!("cannot encode tree: {e}")))?;
    rep.artifact("tree.json", &format!("{json}\n"))?;
    let mut assignments: Vec<(usize, usize)> = Vec::new();
    for (idx, leaf) in tree.leaves().iter().enumerate() {
        for &node in &leaf.members {
            assignments.push((node, idx));
        }
    }
    assignments.sort_unstable();
    rep.artifact("leaves.csv", &tables::pair_csv("node,leaf", &assignments))?;
    rep.metric("n_total", g.node_count() as f64);
    rep.metric("leaves", tree.leaves().len() as f64);
    rep.metric("root_p_value", tree.root.p_value);
    rep.finish()
}
