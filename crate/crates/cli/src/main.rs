//! `biprec`: screen, predict and evaluate links in a weighted bipartite
//! rating graph.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use biprec::eval::{self, subsample_test, write_histogram_csv, write_records_csv, EvalOptions};
use biprec::ingest::parse_dataset;
use biprec::scalar::fmt_sig6;
use biprec::{
    split_edges, DatasetFormat, Edge, Graph, GuardMode, RatingRange, RecommendError, Recommender,
    RecommenderConfig, SplitConfig,
};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "biprec", version, about = "Link recommendation on weighted bipartite graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print node/edge counts, mean degrees and the screening threshold.
    Stats {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        rec: RecArgs,
    },
    /// Split, screen and predict held-out edges, then write the summary.
    Evaluate(EvaluateArgs),
    /// Screen one (bottom, top) pair and predict its weight if sufficient.
    /// Exits 2 when the pair is screened out.
    Predict {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        rec: RecArgs,
        #[arg(long)]
        bottom: String,
        #[arg(long)]
        top: String,
    },
    /// Rank unrated tops for one bottom by predicted weight.
    Recommend {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        rec: RecArgs,
        #[arg(long)]
        bottom: String,
        #[arg(long, default_value_t = 10)]
        top_k: usize,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FormatArg {
    Movielens,
    Epinions,
    Tsv,
}

impl From<FormatArg> for DatasetFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Movielens => DatasetFormat::MovieLensTab,
            FormatArg::Epinions => DatasetFormat::EpinionsWhitespace,
            FormatArg::Tsv => DatasetFormat::CanonicalTsv,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum GuardArg {
    Total,
    PerPair,
}

#[derive(Args, Debug)]
struct DataArgs {
    /// Ratings file.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "tsv")]
    format: FormatArg,
    #[arg(long, default_value_t = 1.0)]
    min_rating: f64,
    #[arg(long, default_value_t = 5.0)]
    max_rating: f64,
}

#[derive(Args, Debug)]
struct RecArgs {
    #[arg(long, default_value_t = 0.9)]
    threshold_cap: f64,
    #[arg(long, default_value_t = 4.0)]
    threshold_constant: f64,
    #[arg(long, default_value_t = 1)]
    min_common_tops: usize,
    #[arg(long, default_value_t = 0.0)]
    similarity_floor: f64,
    /// How the low-sample guard aggregates common-neighbor counts.
    #[arg(long, value_enum, default_value = "total")]
    guard: GuardArg,
}

#[derive(Args, Debug)]
struct EvaluateArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    rec: RecArgs,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Fraction of edges used for training.
    #[arg(long, default_value_t = 0.8)]
    split: f64,
    /// Evaluate a seeded uniform sample of at most this many test edges.
    #[arg(long)]
    max_test_edges: Option<usize>,
    /// Histogram bin width in percentage points.
    #[arg(long, default_value_t = eval::DEFAULT_BIN_WIDTH)]
    bin_width: f64,
    /// Summary JSON path.
    #[arg(long, default_value = "summary.json")]
    out: PathBuf,
    /// Histogram CSV path.
    #[arg(long, default_value = "histogram.csv")]
    hist: PathBuf,
    /// Optional per-edge records CSV path.
    #[arg(long)]
    records: Option<PathBuf>,
}

impl RecArgs {
    fn config(&self) -> Result<RecommenderConfig> {
        let cfg = RecommenderConfig {
            threshold_cap: self.threshold_cap,
            threshold_constant: self.threshold_constant,
            min_common_tops: self.min_common_tops,
            similarity_floor: self.similarity_floor,
            guard: match self.guard {
                GuardArg::Total => GuardMode::Total,
                GuardArg::PerPair => GuardMode::PerPair,
            },
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

impl DataArgs {
    fn range(&self) -> Result<RatingRange<f64>> {
        Ok(RatingRange::new(self.min_rating, self.max_rating)?)
    }

    fn load_edges(&self) -> Result<Vec<Edge>> {
        parse_dataset(&self.input, self.format.into(), &self.range()?)
            .with_context(|| format!("reading {}", self.input.display()))
    }

    fn load_graph(&self) -> Result<Graph> {
        Ok(Graph::build(&self.load_edges()?, self.range()?)?)
    }
}

fn thread_limit() -> Result<usize> {
    match std::env::var("BIPREC_THREADS") {
        Ok(v) => v.trim().parse().with_context(|| format!("BIPREC_THREADS must be an integer, got `{v}`")),
        Err(_) => Ok(0),
    }
}

fn cmd_stats(data: &DataArgs, rec: &RecArgs, out: &mut impl Write) -> Result<ExitCode> {
    let cfg = rec.config()?;
    let graph = data.load_graph()?;
    let stats = graph.degree_stats()?;
    let threshold = biprec::threshold(&stats, &cfg);
    writeln!(out, "bottom_nodes\t{}", graph.bottom_count())?;
    writeln!(out, "top_nodes\t{}", graph.top_count())?;
    writeln!(out, "edges\t{}", graph.edge_count())?;
    writeln!(out, "x\t{}", fmt_sig6(stats.x))?;
    writeln!(out, "y\t{}", fmt_sig6(stats.y))?;
    writeln!(out, "threshold\t{}", fmt_sig6(threshold))?;
    Ok(ExitCode::SUCCESS)
}

fn create(path: &PathBuf) -> Result<BufWriter<File>> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(file))
}

fn cmd_evaluate(args: &EvaluateArgs, out: &mut impl Write) -> Result<ExitCode> {
    let cfg = args.rec.config()?;
    let range = args.data.range()?;
    let edges = args.data.load_edges()?;
    let split_cfg = SplitConfig { train_fraction: args.split, seed: args.seed };
    let split = split_edges(&edges, &split_cfg)?;
    let train = Graph::build(&split.train, range)?;
    let test = match args.max_test_edges {
        Some(max) => subsample_test(&split.test, max, args.seed),
        None => split.test,
    };
    let opts = EvalOptions { bin_width: args.bin_width, split: Some(split_cfg), max_test_edges: args.max_test_edges };
    let (records, summary) = eval::with_threads(thread_limit()?, || eval::evaluate(&train, &test, &cfg, &opts))?;

    let mut json = create(&args.out)?;
    json.write_all(summary.to_json().as_bytes())?;
    json.flush()?;
    let mut hist = create(&args.hist)?;
    write_histogram_csv(&summary.histogram, &mut hist)?;
    hist.flush()?;
    if let Some(path) = &args.records {
        let mut w = create(path)?;
        write_records_csv(&records, &mut w)?;
        w.flush()?;
    }

    let opt = |v: Option<f64>| v.map(fmt_sig6).unwrap_or_else(|| "undefined".to_string());
    writeln!(out, "n_test\t{}", summary.n_test)?;
    writeln!(out, "n_predicted\t{}", summary.n_predicted)?;
    writeln!(out, "coverage\t{}", if summary.coverage_defined { fmt_sig6(summary.coverage) } else { "undefined".into() })?;
    writeln!(out, "mean_error\t{}", opt(summary.mean_error))?;
    writeln!(out, "median_error\t{}", opt(summary.median_error))?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_predict(data: &DataArgs, rec: &RecArgs, bottom: &str, top: &str, out: &mut impl Write) -> Result<ExitCode> {
    let cfg = rec.config()?;
    let graph = data.load_graph()?;
    let recommender = Recommender::new(&graph, cfg)?;
    let (report, prediction) = recommender.assess_and_predict(bottom, top)?;

    writeln!(out, "bottom\t{bottom}")?;
    writeln!(out, "top\t{top}")?;
    writeln!(out, "bottom_known\t{}", report.bottom_known)?;
    writeln!(out, "t\t{}", report.t)?;
    writeln!(out, "n\t{}", report.n)?;
    writeln!(out, "ratio\t{}", report.ratio.map(fmt_sig6).unwrap_or_else(|| "undefined".into()))?;
    writeln!(out, "threshold\t{}", fmt_sig6(report.threshold))?;
    writeln!(out, "total_common\t{}", report.total_common)?;
    writeln!(out, "guard_required\t{}", fmt_sig6(report.guard_required))?;
    writeln!(out, "sufficient\t{}", report.sufficient)?;

    match prediction {
        None => Ok(ExitCode::from(2)),
        Some(Err(RecommendError::NoConfidence { .. })) => {
            writeln!(out, "prediction\tno_confidence")?;
            Ok(ExitCode::from(2))
        }
        Some(Err(e)) => Err(e.into()),
        Some(Ok(p)) => {
            writeln!(out, "p\t{}", fmt_sig6(p.p))?;
            writeln!(out, "k\t{}", p.k)?;
            writeln!(out, "contributor\tsimilarity\tcommon\trating")?;
            for c in &p.contributors {
                writeln!(
                    out,
                    "{}\t{}\t{}\t{}",
                    c.similarity.other_bottom,
                    fmt_sig6(c.similarity.value),
                    c.similarity.common_count,
                    fmt_sig6(c.rating)
                )?;
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn cmd_recommend(data: &DataArgs, rec: &RecArgs, bottom: &str, top_k: usize, out: &mut impl Write) -> Result<ExitCode> {
    let cfg = rec.config()?;
    let graph = data.load_graph()?;
    if !graph.has_bottom(bottom) {
        bail!("unknown bottom node `{bottom}`");
    }
    let recommender = Recommender::new(&graph, cfg)?;
    for (rank, p) in recommender.recommend_for(bottom, top_k)?.iter().enumerate() {
        writeln!(out, "{}\t{}\t{}", rank + 1, p.top, fmt_sig6(p.p))?;
    }
    Ok(ExitCode::SUCCESS)
}

fn run(cli: Cli) -> Result<ExitCode> {
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    let code = match &cli.command {
        Command::Stats { data, rec } => cmd_stats(data, rec, &mut out)?,
        Command::Evaluate(args) => cmd_evaluate(args, &mut out)?,
        Command::Predict { data, rec, bottom, top } => cmd_predict(data, rec, bottom, top, &mut out)?,
        Command::Recommend { data, rec, bottom, top_k } => cmd_recommend(data, rec, bottom, *top_k, &mut out)?,
    };
    out.flush()?;
    Ok(code)
}

fn main() -> ExitCode {
    // usage errors exit 1 so that 2 stays reserved for "screened out"
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
