//! `skeledim` command line tool.
//!
//! Exit codes: 0 success, 1 usage error, 2 verification failure, 3 I/O or
//! format error. Every command echoes `command`, `seed` and the graph
//! fingerprint, on stderr for plain-text results and inside the JSON body
//! otherwise. Node ids on the command line and in files are 1-based.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};
use skeledim::dpres::{verify_d_preserving, DPresLabeling, DQuery};
use skeledim::generators::random_connected;
use skeledim::grid::generate_grid;
use skeledim::hub::{verify_labeling, LabelStats, Labeling, PairSelection, VerifyReport};
use skeledim::packing::{pack_paths, separation_study, write_separation_csv};
use skeledim::skeleton::{format_ratio, skeleton_dimension, Alpha, RootSelection, SkeletonParams};
use skeledim::{Error, Graph, Metric, NodeId};

#[derive(Parser)]
#[command(name = "skeledim", version, about = "Skeleton dimension and hub labelings of road-like graphs")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Skeleton dimension statistics as JSON: k, width histogram, average
    /// width ("p/q"), average integrated skeleton dimension, parameters.
    Stats(StatsArgs),
    /// Randomized edge-hub labels (file header `HUBLABELS 1 n= seed= fp=`,
    /// records `L <node> <h> (<a> <b> <d_a> <d_b>)*h`, distances in 1/12 units).
    #[command(subcommand)]
    Label(LabelCommand),
    /// D-preserving labels on hop distances (header `DPRESLABELS 1 D= n= seed=
    /// fp= dmax=`, records `L <node> <h> (<node> <dist>)*h`).
    #[command(subcommand)]
    Dpres(DpresCommand),
    /// Graph generators writing DIMACS `.gr` files.
    #[command(subcommand)]
    Gen(GenCommand),
    /// Greedy packing of disjoint shortest paths of length in (r/2, r]
    /// meeting the ball B(center, r); prints JSON.
    Pack(PackArgs),
    /// Batch studies.
    #[command(subcommand)]
    Study(StudyCommand),
}

#[derive(Args)]
struct StatsArgs {
    graph: PathBuf,
    /// Metric used for reach: time, dist or hop.
    #[arg(long, default_value = "time")]
    metric: Metric,
    /// Second DIMACS file providing the `dist` metric on the same arcs.
    #[arg(long)]
    dist_graph: Option<PathBuf>,
    /// Reach threshold alpha as "p/q".
    #[arg(long, default_value = "1/2")]
    alpha: Alpha,
    /// Number of sampled roots; all roots when omitted.
    #[arg(long)]
    roots: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also report the integrated dimension restricted to distances above D/6.
    #[arg(long = "isk-D")]
    isk_d: Option<u64>,
}

#[derive(Subcommand)]
enum LabelCommand {
    Build {
        graph: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Prints the decoded distance.
    Query { labels: PathBuf, u: u64, v: u64 },
    /// Compares decoded distances with Dijkstra; prints "<m> mismatches / <N> pairs".
    Verify {
        graph: PathBuf,
        labels: PathBuf,
        #[command(flatten)]
        pairs: PairArgs,
    },
    /// Label size histogram, mean and max as JSON.
    Stats { labels: PathBuf },
}

#[derive(Args)]
struct PairArgs {
    /// Check every ordered pair (default).
    #[arg(long, conflicts_with = "pairs")]
    exhaustive: bool,
    /// Check this many random pairs instead.
    #[arg(long)]
    pairs: Option<usize>,
    /// Seed of the pair sample.
    #[arg(long, default_value_t = 0)]
    pair_seed: u64,
}

impl PairArgs {
    fn selection(&self) -> PairSelection {
        match self.pairs {
            Some(count) if !self.exhaustive => PairSelection::Sample {
                count,
                seed: self.pair_seed,
            },
            _ => PairSelection::Exhaustive,
        }
    }
}

#[derive(Subcommand)]
enum DpresCommand {
    Build {
        graph: PathBuf,
        #[arg(long = "D")]
        d: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Threshold above which edge hubs are used (default max(D, sqrt(n)/ln n)).
        #[arg(long)]
        dmax: Option<u64>,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Prints the decoded distance or `below-range`.
    Query { labels: PathBuf, u: u64, v: u64 },
    Verify {
        graph: PathBuf,
        labels: PathBuf,
        /// Only pairs at least this far apart are checked (default D).
        #[arg(long)]
        min_dist: Option<u64>,
        #[command(flatten)]
        pairs: PairArgs,
    },
    Stats { labels: PathBuf },
}

#[derive(Subcommand)]
enum GenCommand {
    /// The perturbed grid G_L, 1 <= L <= 7.
    Grid {
        #[arg(long = "L")]
        level: u32,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Random connected graph: random spanning tree plus extra chords.
    Random {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        extra: usize,
        #[arg(long, default_value_t = 20)]
        max_len: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: PathBuf,
    },
}

#[derive(Args)]
struct PackArgs {
    graph: PathBuf,
    #[arg(long)]
    center: u64,
    #[arg(long)]
    radius: u64,
    #[arg(long, default_value_t = 20)]
    budget: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum StudyCommand {
    /// CSV `L,n,k,pack_lb`: exact skeleton dimension of G_L and the
    /// corner-ball packing bound.
    Separation {
        #[arg(long = "Lmin", default_value_t = 2)]
        lmin: u32,
        #[arg(long = "Lmax", default_value_t = 5)]
        lmax: u32,
        #[arg(long, default_value_t = 20)]
        budget: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: PathBuf,
    },
}

/// Failure with its exit code.
struct Failure {
    code: u8,
    msg: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Parameter(_) | Error::NodeOutOfRange(_) | Error::MissingMetric(_) => 1,
            Error::FingerprintMismatch { .. } | Error::EmptyIntersection(..) => 2,
            Error::Parse { .. } | Error::Disconnected { .. } | Error::InvalidGraph(_) | Error::Io(_) => 3,
        };
        Failure {
            code,
            msg: e.to_string(),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure {
            code: 3,
            msg: e.to_string(),
        }
    }
}

type Outcome = Result<(), Failure>;

fn with_path<T>(path: &Path, r: skeledim::Result<T>) -> Result<T, Failure> {
    r.map_err(|e| {
        let mut f = Failure::from(e);
        f.msg = format!("{}: {}", path.display(), f.msg);
        f
    })
}

fn read_graph(path: &Path) -> Result<Graph, Failure> {
    with_path(path, Graph::read_dimacs_file(path))
}

fn open(path: &Path) -> Result<BufReader<File>, Failure> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Failure {
            code: 3,
            msg: format!("{}: {e}", path.display()),
        })
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Failure {
            code: 3,
            msg: format!("{}: {e}", path.display()),
        })
}

fn node(g_n: usize, v: u64) -> Result<NodeId, Failure> {
    if v == 0 || v > g_n as u64 {
        return Err(Error::NodeOutOfRange(v).into());
    }
    Ok((v - 1) as NodeId)
}

fn echo(command: &str, seed: u64, fp: &str) {
    eprintln!("command={command} seed={seed} fp={fp}");
}

fn print_json(v: &Value) -> Outcome {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, v).map_err(io::Error::from)?;
    writeln!(out)?;
    Ok(())
}

fn size_json(s: &LabelStats) -> Value {
    json!({
        "nodes": s.nodes,
        "mean": s.mean,
        "max": s.max,
        "total": s.total,
        "histogram": s.histogram.iter().map(|(k, v)| (k.to_string(), json!(v))).collect::<serde_json::Map<_, _>>(),
    })
}

fn report_verify(r: &VerifyReport) -> Outcome {
    println!("{} mismatches / {} pairs", r.mismatches.len(), r.pairs);
    if let Some(m) = r.mismatches.first() {
        return Err(Failure {
            code: 2,
            msg: format!(
                "first mismatch: ({}, {}) expected {} decoded {:?}",
                m.u + 1,
                m.v + 1,
                m.expected,
                m.decoded
            ),
        });
    }
    Ok(())
}

fn stats(a: StatsArgs) -> Outcome {
    let mut g = read_graph(&a.graph)?;
    if let Some(p) = &a.dist_graph {
        let other = read_graph(p)?;
        with_path(p, g.attach_dist(&other))?;
    }
    let selection = match a.roots {
        Some(count) => RootSelection::Sample { count, seed: a.seed },
        None => RootSelection::All,
    };
    let params = SkeletonParams {
        reach_metric: a.metric,
        alpha: a.alpha,
    };
    let cutoff = a.isk_d.map(skeledim::skeleton::isk_cutoff_for);
    let s = skeleton_dimension(&g, &selection, params, cutoff)?;
    let total: u128 = s.per_root.iter().map(|r| r.width as u128).sum();
    let hist: serde_json::Map<String, Value> = s
        .width_histogram()
        .iter()
        .map(|(w, c)| (w.to_string(), json!(c)))
        .collect();
    let mut body = json!({
        "command": "stats",
        "seed": a.seed,
        "fingerprint": g.fingerprint(),
        "params": { "metric": a.metric.name(), "alpha": a.alpha.to_string() },
        "roots": s.per_root.len(),
        "exhaustive": s.exhaustive,
        "k": s.k,
        "per_root_width": hist,
        "avg_width": format_ratio(total, s.per_root.len().max(1) as u128),
        "isk_avg": s.isk_avg(),
    });
    if let (Some(d), Some(v)) = (a.isk_d, s.isk_restricted_avg()) {
        body["isk_D"] = json!({ "D": d, "avg": v });
    }
    print_json(&body)
}

fn label(c: LabelCommand) -> Outcome {
    match c {
        LabelCommand::Build { graph, seed, output } => {
            let g = read_graph(&graph)?;
            let l = Labeling::build(&g, seed, true)?;
            let mut out = create(&output)?;
            l.write(&mut out)?;
            out.flush()?;
            echo("label build", seed, l.fingerprint());
            Ok(())
        }
        LabelCommand::Query { labels, u, v } => {
            let l = with_path(&labels, Labeling::read(open(&labels)?))?;
            let d = l.query(node(l.n(), u)?, node(l.n(), v)?)?;
            println!("{d}");
            echo("label query", l.seed(), l.fingerprint());
            Ok(())
        }
        LabelCommand::Verify { graph, labels, pairs } => {
            let g = read_graph(&graph)?;
            let l = with_path(&labels, Labeling::read(open(&labels)?))?;
            echo("label verify", l.seed(), &g.fingerprint());
            let r = verify_labeling(&g, &l, pairs.selection())?;
            report_verify(&r)
        }
        LabelCommand::Stats { labels } => {
            let l = with_path(&labels, Labeling::read(open(&labels)?))?;
            let mut body = size_json(&l.stats());
            body["command"] = json!("label stats");
            body["seed"] = json!(l.seed());
            body["fingerprint"] = json!(l.fingerprint());
            print_json(&body)
        }
    }
}

fn dpres(c: DpresCommand) -> Outcome {
    match c {
        DpresCommand::Build { graph, d, seed, dmax, output } => {
            let g = read_graph(&graph)?;
            let l = DPresLabeling::build(&g, d, seed, dmax, true)?;
            let mut out = create(&output)?;
            l.write(&mut out)?;
            out.flush()?;
            echo("dpres build", seed, l.fingerprint());
            Ok(())
        }
        DpresCommand::Query { labels, u, v } => {
            let l = with_path(&labels, DPresLabeling::read(open(&labels)?))?;
            match l.query(node(l.n(), u)?, node(l.n(), v)?)? {
                DQuery::Distance(d) => println!("{d}"),
                DQuery::BelowRange => println!("below-range"),
            }
            echo("dpres query", l.seed(), l.fingerprint());
            Ok(())
        }
        DpresCommand::Verify { graph, labels, min_dist, pairs } => {
            let g = read_graph(&graph)?;
            let l = with_path(&labels, DPresLabeling::read(open(&labels)?))?;
            echo("dpres verify", l.seed(), &g.fingerprint());
            let r = verify_d_preserving(&g, &l, min_dist.unwrap_or(l.d()), pairs.selection())?;
            report_verify(&r)
        }
        DpresCommand::Stats { labels } => {
            let l = with_path(&labels, DPresLabeling::read(open(&labels)?))?;
            let mut body = size_json(&l.stats());
            body["command"] = json!("dpres stats");
            body["seed"] = json!(l.seed());
            body["fingerprint"] = json!(l.fingerprint());
            body["D"] = json!(l.d());
            body["dmax"] = json!(l.d_max());
            print_json(&body)
        }
    }
}

fn write_graph(g: &Graph, output: &Path, command: &str, seed: u64) -> Outcome {
    let mut out = create(output)?;
    g.write_dimacs(&mut out)?;
    out.flush()?;
    echo(command, seed, &g.fingerprint());
    Ok(())
}

fn gen(c: GenCommand) -> Outcome {
    match c {
        GenCommand::Grid { level, output } => write_graph(&generate_grid(level)?, &output, "gen grid", 0),
        GenCommand::Random { n, extra, max_len, seed, output } => {
            write_graph(&random_connected(n, extra, max_len, seed)?, &output, "gen random", seed)
        }
    }
}

fn pack(a: PackArgs) -> Outcome {
    let g = read_graph(&a.graph)?;
    let center = node(g.n(), a.center)?;
    let p = pack_paths(&g, center, a.radius, a.budget, a.seed)?;
    let paths: Vec<Vec<u64>> = p
        .paths
        .iter()
        .map(|path| path.iter().map(|&v| v as u64 + 1).collect())
        .collect();
    print_json(&json!({
        "command": "pack",
        "seed": a.seed,
        "fingerprint": g.fingerprint(),
        "center": a.center,
        "radius": a.radius,
        "size": p.size(),
        "paths": paths,
    }))
}

fn study(c: StudyCommand) -> Outcome {
    match c {
        StudyCommand::Separation { lmin, lmax, budget, seed, output } => {
            let rows = separation_study(lmin, lmax, budget, seed)?;
            let mut out = create(&output)?;
            write_separation_csv(&rows, &mut out)?;
            out.flush()?;
            eprintln!("command=study separation seed={seed}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Outcome {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure { code: 1, msg: e.to_string() })?;
    }
    match cli.command {
        Command::Stats(a) => stats(a),
        Command::Label(c) => label(c),
        Command::Dpres(c) => dpres(c),
        Command::Gen(c) => gen(c),
        Command::Pack(a) => pack(a),
        Command::Study(c) => study(c),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}
