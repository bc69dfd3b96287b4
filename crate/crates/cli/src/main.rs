//! Command-line front end.
//!
//! Output is one JSON object per line. Every query record carries a `config`
//! object with the grid (divisions, `s`, bounds), the sweep tolerances and the
//! generator seed when the points file records one.
//!
//! Points files hold one `vx,x0,vy,y0,vz,z0` line per point; `#` lines are
//! comments. `gen` writes a `# gen key=value ...` header that `query` reads
//! back to echo the seed.
//!
//! Index snapshots (`build --save`, `--index`) are plain text, one record per
//! line, fields separated by spaces:
//!
//! ```text
//! hexbucket-index 1
//! lower <6 reals>
//! upper <6 reals>
//! divisions <6 integers>
//! subdivisions <s>
//! buckets <B>
//! bucket <6 zero-based cell indices>   then, for that bucket,
//! hist <s counts>                      six times, axes in hex order
//! ```
//!
//! Trends and normalization are refit from the histograms on load. A query
//! against a reloaded index gives bit-identical results.
//!
//! Exit codes: 0 on success, 2 on usage errors, 1 on data errors (the
//! diagnostic starts with the error name).

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use hexbucket::bench::{range_errors, relative_error, run_benchmark, BenchConfig};
use hexbucket::datagen::{generate_clustered, CorpusConfig, GenConfig};
use hexbucket::estimate::{count_range, max_count_with, threshold_range_with};
use hexbucket::index::DEFAULT_SUBDIVISIONS;
use hexbucket::io::{format_points, load_index, parse_hex, parse_points, save_index};
use hexbucket::{
    exact_count_range, exact_max_count, exact_threshold_ops, normalize_query, threshold_stats, Error, Extremum,
    GridConfig, Hex6, IntervalSet, MovingIndex, SweepParams, TimeInterval,
};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "hexbucket", version, about = "Threshold aggregation over linearly moving 3-D points")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate clustered moving points.
    Gen(GenArgs),
    /// Build an index from a points file.
    Build(BuildArgs),
    /// Run one query, or every line of a query file.
    Query(QueryCmd),
    /// Run the estimated-vs-exact benchmark.
    Bench(BenchArgs),
    /// Dump bucket statistics.
    Inspect(InspectArgs),
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, default_value_t = 10_000)]
    n: usize,
    #[arg(long, default_value_t = 10)]
    clusters: usize,
    #[arg(long, default_value_t = 0.5)]
    spread: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    lower: f64,
    #[arg(long, default_value_t = 100.0, allow_hyphen_values = true)]
    upper: f64,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct GridArgs {
    /// Cells per axis.
    #[arg(long, default_value_t = 10)]
    divisions: u32,
    /// Histogram subdivisions per cell.
    #[arg(long, default_value_t = DEFAULT_SUBDIVISIONS)]
    s: usize,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    lower: f64,
    #[arg(long, default_value_t = 100.0, allow_hyphen_values = true)]
    upper: f64,
}

impl GridArgs {
    fn config(&self) -> GridConfig {
        GridConfig::uniform(self.lower, self.upper, self.divisions).with_subdivisions(self.s)
    }
}

#[derive(Args)]
struct BuildArgs {
    #[arg(long)]
    points: PathBuf,
    #[command(flatten)]
    grid: GridArgs,
    /// Write an index snapshot here.
    #[arg(long)]
    save: Option<PathBuf>,
}

#[derive(Args)]
struct Source {
    /// Points file; required for exact results.
    #[arg(long)]
    points: Option<PathBuf>,
    /// Index snapshot; used instead of building from `--points`.
    #[arg(long)]
    index: Option<PathBuf>,
    #[command(flatten)]
    grid: GridArgs,
}

#[derive(Args)]
struct QueryCmd {
    #[command(flatten)]
    source: Source,
    /// File of queries, one per line, each written as the query flags.
    #[arg(long, conflicts_with_all = ["op", "a", "b", "t"])]
    file: Option<PathBuf>,
    #[command(flatten)]
    spec: QuerySpecArgs,
}

#[derive(Args, Clone)]
struct QuerySpecArgs {
    #[arg(long, value_enum)]
    op: Option<Op>,
    /// Corner A as six comma-separated reals.
    #[arg(long, value_parser = parse_hex, allow_hyphen_values = true)]
    a: Option<Hex6>,
    /// Corner B as six comma-separated reals.
    #[arg(long, value_parser = parse_hex, allow_hyphen_values = true)]
    b: Option<Hex6>,
    /// Query interval as `begin:end`.
    #[arg(long, value_parser = parse_interval)]
    t: Option<TimeInterval>,
    /// Absolute count, or `p<percent>max` relative to the estimated MaxCount.
    #[arg(long, value_parser = parse_threshold, allow_hyphen_values = true)]
    threshold: Option<Threshold>,
    #[arg(long, value_enum, default_value_t = Mode::Est)]
    mode: Mode,
}

#[derive(Parser)]
#[command(no_binary_name = true)]
struct QueryLine {
    #[command(flatten)]
    spec: QuerySpecArgs,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Op {
    Maxcount,
    Mincount,
    Countrange,
    Trange,
    Tcount,
    Tsum,
    Tavg,
}

impl Op {
    fn name(self) -> &'static str {
        match self {
            Op::Maxcount => "maxcount",
            Op::Mincount => "mincount",
            Op::Countrange => "countrange",
            Op::Trange => "trange",
            Op::Tcount => "tcount",
            Op::Tsum => "tsum",
            Op::Tavg => "tavg",
        }
    }

    fn needs_threshold(self) -> bool {
        matches!(self, Op::Trange | Op::Tcount | Op::Tsum | Op::Tavg)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Est,
    Exact,
    Both,
}

impl Mode {
    fn est(self) -> bool {
        self != Mode::Exact
    }

    fn exact(self) -> bool {
        self != Mode::Est
    }

    fn name(self) -> &'static str {
        match self {
            Mode::Est => "est",
            Mode::Exact => "exact",
            Mode::Both => "both",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Threshold {
    Absolute(f64),
    OfMax(f64),
}

fn parse_threshold(s: &str) -> Result<Threshold, String> {
    if let Some(pct) = s.strip_prefix('p').and_then(|r| r.strip_suffix("max")) {
        let v: f64 = pct.parse().map_err(|e| format!("bad percentage {pct:?}: {e}"))?;
        return Ok(Threshold::OfMax(v / 100.0));
    }
    s.parse::<f64>()
        .map(Threshold::Absolute)
        .map_err(|e| format!("expected a number or p<percent>max, got {s:?}: {e}"))
}

fn parse_interval(s: &str) -> Result<TimeInterval, String> {
    let (l, u) = s.split_once(':').ok_or_else(|| format!("expected begin:end, got {s:?}"))?;
    let l: f64 = l.trim().parse().map_err(|e| format!("bad begin {l:?}: {e}"))?;
    let u: f64 = u.trim().parse().map_err(|e| format!("bad end {u:?}: {e}"))?;
    Ok(TimeInterval::new(l, u))
}

fn parse_list<T: std::str::FromStr>(s: &str) -> Result<Vec<T>, String>
where
    T::Err: std::fmt::Display,
{
    s.split(',')
        .map(|x| x.trim().parse::<T>().map_err(|e| format!("bad list entry {x:?}: {e}")))
        .collect()
}

#[derive(Args)]
struct BenchArgs {
    /// Data set sizes, comma separated.
    #[arg(long, default_value = "10000", value_parser = parse_list::<usize>)]
    sizes: std::vec::Vec<usize>,
    /// Cells per axis, comma separated.
    #[arg(long, default_value = "5,10", value_parser = parse_list::<u32>)]
    divisions: std::vec::Vec<u32>,
    #[arg(long, default_value_t = DEFAULT_SUBDIVISIONS)]
    s: usize,
    #[arg(long, default_value_t = 10)]
    clusters: usize,
    #[arg(long, default_value_t = 0.5)]
    spread: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    queries: usize,
    #[arg(long, default_value_t = 7)]
    corpus_seed: u64,
    /// Thresholds as fractions of each query's exact maximum.
    #[arg(long, default_value = "0.1,0.5", value_parser = parse_list::<f64>)]
    thresholds: std::vec::Vec<f64>,
    /// Queries with fewer exact hits are reported apart.
    #[arg(long, default_value_t = 100)]
    min_points: u64,
    /// Write records here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print a summary table after the records.
    #[arg(long)]
    table: bool,
}

#[derive(Args)]
struct InspectArgs {
    #[command(flatten)]
    source: Source,
}

/// Failure of one command.
enum Fail {
    Usage(String),
    Data(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Data(e)
    }
}

type CmdResult = Result<(), Fail>;

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    let mut out = std::io::stdout().lock();
    let res = match cli.cmd {
        Cmd::Gen(a) => gen(&a, &mut out),
        Cmd::Build(a) => build(&a, &mut out),
        Cmd::Query(a) => query(&a, &mut out),
        Cmd::Bench(a) => bench(&a, &mut out),
        Cmd::Inspect(a) => inspect(&a, &mut out),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(Fail::Usage(msg)) => Cli::command().error(ErrorKind::MissingRequiredArgument, msg).exit(),
        Err(Fail::Data(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn emit(out: &mut impl Write, v: &Value) -> CmdResult {
    writeln!(out, "{v}").map_err(|e| Fail::Data(Error::Io(e.to_string())))
}

fn io_err(path: &Path, e: std::io::Error) -> Fail {
    Fail::Data(Error::Io(format!("{}: {e}", path.display())))
}

fn gen(a: &GenArgs, out: &mut impl Write) -> CmdResult {
    let cfg = GenConfig {
        n: a.n,
        clusters: a.clusters,
        lower: a.lower,
        upper: a.upper,
        spread: a.spread,
        seed: a.seed,
    };
    let points = generate_clustered(&cfg)?;
    let text = format!(
        "# gen n={} clusters={} spread={} seed={} lower={} upper={}\n{}",
        cfg.n,
        cfg.clusters,
        cfg.spread,
        cfg.seed,
        cfg.lower,
        cfg.upper,
        format_points(&points)
    );
    match &a.out {
        Some(p) => {
            fs::write(p, text).map_err(|e| io_err(p, e))?;
            emit(out, &json!({"command": "gen", "points": points.len(), "out": p, "config": cfg}))
        }
        None => out.write_all(text.as_bytes()).map_err(|e| Fail::Data(Error::Io(e.to_string()))),
    }
}

struct Loaded {
    points: Option<Vec<Hex6>>,
    seed: Option<u64>,
    idx: MovingIndex,
}

fn read_points_file(path: &Path) -> Result<(Vec<Hex6>, Option<u64>), Fail> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let seed = text
        .lines()
        .filter(|l| l.starts_with('#'))
        .flat_map(|l| l.split_whitespace())
        .find_map(|w| w.strip_prefix("seed=").and_then(|s| s.parse().ok()));
    Ok((parse_points(&text)?, seed))
}

fn load(src: &Source) -> Result<Loaded, Fail> {
    let (points, seed) = match &src.points {
        Some(p) => {
            let (pts, seed) = read_points_file(p)?;
            (Some(pts), seed)
        }
        None => (None, None),
    };
    let idx = match (&src.index, &points) {
        (Some(path), _) => load_index(path)?,
        (None, Some(pts)) => MovingIndex::from_points(src.grid.config(), pts)?,
        (None, None) => return Err(Fail::Usage("one of --points or --index is required".into())),
    };
    Ok(Loaded { points, seed, idx })
}

fn config_record(idx: &MovingIndex, params: &SweepParams, seed: Option<u64>) -> Value {
    let g = idx.config();
    json!({
        "n": idx.n(),
        "divisions": g.divisions,
        "s": g.subdivisions,
        "lower": g.lower,
        "upper": g.upper,
        "eps_time": params.eps_time,
        "bisect_max": params.bisect_max,
        "c_scan": params.c_scan,
        "seed": seed,
    })
}

fn build(a: &BuildArgs, out: &mut impl Write) -> CmdResult {
    let (points, seed) = read_points_file(&a.points)?;
    let idx = MovingIndex::from_points(a.grid.config(), &points)?;
    if let Some(p) = &a.save {
        save_index(p, &idx)?;
    }
    emit(
        out,
        &json!({
            "command": "build",
            "buckets": idx.bucket_count(),
            "saved": a.save,
            "config": config_record(&idx, &SweepParams::from_env(), seed),
        }),
    )
}

fn query(a: &QueryCmd, out: &mut impl Write) -> CmdResult {
    let specs = match &a.file {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
            let mut v = Vec::new();
            for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
                let parsed = QueryLine::try_parse_from(line.split_whitespace())
                    .map_err(|e| Fail::Usage(format!("{}: {line:?}: {e}", path.display())))?;
                v.push(parsed.spec);
            }
            v
        }
        None => vec![a.spec.clone()],
    };
    let resolved = specs.iter().map(resolve).collect::<Result<Vec<_>, _>>()?;
    let data = load(&a.source)?;
    let params = SweepParams::from_env();
    for q in &resolved {
        emit(out, &run_query(q, &data, &params)?)?;
    }
    Ok(())
}

struct QuerySpec {
    op: Op,
    a: Hex6,
    b: Hex6,
    t: TimeInterval,
    threshold: Option<Threshold>,
    mode: Mode,
}

fn resolve(s: &QuerySpecArgs) -> Result<QuerySpec, Fail> {
    let missing = |f: &str| Fail::Usage(format!("--{f} is required"));
    let op = s.op.ok_or_else(|| missing("op"))?;
    if op.needs_threshold() && s.threshold.is_none() {
        return Err(Fail::Usage(format!("--op {} requires --threshold", op.name())));
    }
    Ok(QuerySpec {
        op,
        a: s.a.ok_or_else(|| missing("a"))?,
        b: s.b.ok_or_else(|| missing("b"))?,
        t: s.t.ok_or_else(|| missing("t"))?,
        threshold: s.threshold,
        mode: s.mode,
    })
}

fn intervals_json(set: &IntervalSet) -> Value {
    Value::Array(set.intervals().iter().map(|iv| json!([iv.l, iv.u])).collect())
}

fn run_query(q: &QuerySpec, data: &Loaded, params: &SweepParams) -> Result<Value, Fail> {
    let bx = normalize_query(q.a, q.b, q.t)?;
    let idx = &data.idx;
    let points = match (q.mode.exact(), &data.points) {
        (true, None) => return Err(Fail::Usage("exact results need --points".into())),
        (_, p) => p.as_deref(),
    };
    let m = match q.threshold {
        Some(Threshold::Absolute(m)) => Some(m),
        Some(Threshold::OfMax(f)) => Some(f * max_count_with(idx, &bx, Extremum::Max, params).count),
        None => None,
    };
    let mut rec = json!({
        "command": "query",
        "op": q.op.name(),
        "mode": q.mode.name(),
        "a": q.a,
        "b": q.b,
        "t": [bx.t.l, bx.t.u],
        "threshold": m,
        "config": config_record(idx, params, data.seed),
    });
    let (mut est, mut exact) = (Value::Null, Value::Null);
    let mut error = Value::Null;
    match q.op {
        Op::Maxcount | Op::Mincount => {
            let mode = if q.op == Op::Maxcount { Extremum::Max } else { Extremum::Min };
            let e = q.mode.est().then(|| max_count_with(idx, &bx, mode, params));
            let x = points.map(|p| exact_max_count(p, &bx, mode));
            if let Some(e) = e {
                est = json!({"t": e.t_max, "count": e.count, "count_rounded": e.count_rounded});
            }
            if let (true, Some(x)) = (q.mode.exact(), x) {
                exact = json!({"t": x.t_max, "count": x.count});
            }
            if let (Some(e), Some(x), true) = (e, x, q.mode == Mode::Both) {
                error = json!(relative_error(x.count, e.count));
            }
        }
        Op::Countrange => {
            let e = q.mode.est().then(|| count_range(idx, &bx));
            let x = points.filter(|_| q.mode.exact()).map(|p| exact_count_range(p, &bx));
            est = json!(e.map(|c| json!({"count": c})));
            exact = json!(x.map(|c| json!({"count": c})));
            if let (Some(e), Some(x)) = (e, x) {
                error = json!(relative_error(x as f64, e));
            }
        }
        Op::Trange | Op::Tcount | Op::Tsum | Op::Tavg => {
            let m = m.unwrap_or(f64::INFINITY);
            let summarize = |set: &IntervalSet| {
                let st = threshold_stats(set);
                match q.op {
                    Op::Trange => json!({"intervals": intervals_json(set), "count": st.count, "sum": st.sum}),
                    Op::Tcount => json!({"count": st.count}),
                    Op::Tsum => json!({"sum": st.sum}),
                    _ => json!({"average": st.average}),
                }
            };
            let e = q.mode.est().then(|| threshold_range_with(idx, &bx, m, params));
            let x = points.filter(|_| q.mode.exact()).map(|p| exact_threshold_ops(p, &bx, m).intervals);
            if let Some(e) = &e {
                est = summarize(e);
            }
            if let Some(x) = &x {
                exact = summarize(x);
            }
            if let (Some(e), Some(x)) = (&e, &x) {
                let (range, excess) = range_errors(x, e);
                let (se, sx) = (threshold_stats(e), threshold_stats(x));
                error = json!({
                    "range": range,
                    "excess": excess,
                    "count_diff": (se.count as i64 - sx.count as i64).abs(),
                });
            }
        }
    }
    rec["est"] = est;
    rec["exact"] = exact;
    if q.mode == Mode::Both {
        rec["error"] = error;
    }
    Ok(rec)
}

fn bench(a: &BenchArgs, out: &mut impl Write) -> CmdResult {
    let cfg = BenchConfig {
        sizes: a.sizes.clone(),
        divisions: a.divisions.clone(),
        subdivisions: a.s,
        gen: GenConfig {
            clusters: a.clusters,
            spread: a.spread,
            seed: a.seed,
            ..GenConfig::default()
        },
        corpus: CorpusConfig {
            count: a.queries,
            seed: a.corpus_seed,
            ..CorpusConfig::default()
        },
        thresholds: a.thresholds.clone(),
        min_points: a.min_points,
        params: SweepParams::from_env(),
    };
    let report = run_benchmark(&cfg)?;
    let mut text = String::new();
    for row in &report.rows {
        text.push_str(&serde_json::to_string(row).map_err(|e| Fail::Data(Error::Io(e.to_string())))?);
        text.push('\n');
    }
    match &a.out {
        Some(p) => fs::write(p, &text).map_err(|e| io_err(p, e))?,
        None => out.write_all(text.as_bytes()).map_err(|e| Fail::Data(Error::Io(e.to_string())))?,
    }
    if a.table {
        out.write_all(report.to_table().as_bytes())
            .map_err(|e| Fail::Data(Error::Io(e.to_string())))?;
    }
    Ok(())
}

fn inspect(a: &InspectArgs, out: &mut impl Write) -> CmdResult {
    let data = load(&a.source)?;
    let idx = &data.idx;
    let n = idx.n();
    let mut worst: f64 = 0.0;
    for b in idx.buckets() {
        // Mass the density assigns to the whole bucket, against the stored count.
        let residual = (n as f64 * b.c_norm(n) * b.trend_integral() - b.count as f64).abs() / b.count as f64;
        worst = worst.max(residual);
        let trends: Vec<Value> = b
            .trend
            .iter()
            .map(|t| json!({"slope": t.slope, "intercept": t.intercept, "shift": t.shift}))
            .collect();
        emit(
            out,
            &json!({
                "bucket": b.id.0,
                "count": b.count,
                "trends": trends,
                "c_norm": b.c_norm(n),
                "degenerate": b.degenerate,
                "residual": residual,
            }),
        )?;
    }
    emit(
        out,
        &json!({
            "command": "inspect",
            "buckets": idx.bucket_count(),
            "max_residual": worst,
            "config": config_record(idx, &SweepParams::from_env(), data.seed),
        }),
    )
}
