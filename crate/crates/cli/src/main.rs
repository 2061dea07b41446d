use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use supersat_core::container::{
    container_step_on, verify_containers, ContainerFamily, ContainerReport, StepConfig, SupersatHypergraph, TauChoice,
    DEFAULT_LEAF_GUARD, DEFAULT_VERIFY_GUARD,
};
use supersat_core::experiments::{random_host, supersat_trend, Density, HostSeries, TrendRow, DEFAULT_TREND_GUARD};
use supersat_core::family::{AnyFamily, AuditReport, FamilyFile, GoodnessReport, ScanOrder};
use supersat_core::params::m_of_n;
use supersat_core::pattern::{enumerate_rpartite, enumerate_theta, oracle_count_with_guard, DEFAULT_ORACLE_GUARD};
use supersat_core::pipeline::{
    brute_force_free_count, check_coverage, power_bound, run_pipeline, CoverageReport, FreeCount, PipelineConfig,
    PipelineResult, DEFAULT_COUNT_GUARD, DEFAULT_MAX_LEVELS,
};
use supersat_core::{HostGraph, Pattern, PatternCopy, ScaleParams};

const CONFIG_PREFIX: &str = "# config: ";

#[derive(Parser, Debug)]
#[command(
    name = "supersat",
    version,
    about = "Balanced supersaturation families, containers and H-free counts"
)]
struct Cli {
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Re-run the configuration echoed at the top of an earlier output.
    #[arg(long, value_name = "FILE")]
    replay: Option<PathBuf>,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct RunConfig {
    format: Format,
    command: Command,
}

#[derive(Subcommand, Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum Command {
    /// Generate a seeded random r-graph.
    Gen(GenArgs),
    /// Enumerate pattern copies in a graph.
    Enum(EnumArgs),
    /// Greedily build a balanced family.
    Build(BuildArgs),
    /// Re-audit a family file from scratch.
    Audit(AuditArgs),
    /// Run one container step and verify it exhaustively.
    Containers(ContainersArgs),
    /// Run the counting pipeline on K_n.
    Count(CountArgs),
    /// Exact number of pattern-free r-graphs on [n].
    Oracle(OracleArgs),
    /// Copy counts against the supersaturation benchmark.
    Trend(TrendArgs),
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
struct GenArgs {
    #[arg(long)]
    n: usize,
    /// Exact number of edges.
    #[arg(long, conflicts_with = "p", required_unless_present = "p")]
    m: Option<usize>,
    /// Edge probability.
    #[arg(long)]
    p: Option<f64>,
    #[arg(long, default_value_t = 2)]
    r: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
struct EnumArgs {
    #[arg(long)]
    graph: PathBuf,
    /// theta:A,B or complete:A1,...,Ar
    #[arg(long)]
    pattern: Pattern,
    /// Cross-check the count against the brute-force oracle.
    #[arg(long)]
    oracle: bool,
    #[arg(long, default_value_t = DEFAULT_ORACLE_GUARD)]
    oracle_guard: usize,
    /// Include every copy in the output.
    #[arg(long)]
    list: bool,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
struct BuildArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    pattern: Pattern,
    #[arg(long)]
    delta: Option<f64>,
    /// Density parameter; e(G)/m(n) when absent.
    #[arg(long)]
    k: Option<f64>,
    /// Member count to stop at; δk^{…}n^{…} rounded up when absent.
    #[arg(long)]
    target: Option<usize>,
    /// Scan candidates in a seeded random order instead of canonical order.
    #[arg(long)]
    shuffle: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also write the family file here.
    #[arg(long)]
    save: Option<PathBuf>,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
struct AuditArgs {
    #[arg(long)]
    family: PathBuf,
    /// Exponent α for the degree-decay audit; 1/(e(H)−1) when absent.
    #[arg(long)]
    alpha: Option<f64>,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
struct ContainersArgs {
    /// Family file; when absent every copy of --pattern in --graph is used.
    #[arg(long, required_unless_present_all = ["graph", "pattern"])]
    family: Option<PathBuf>,
    #[arg(long, conflicts_with = "family", requires = "pattern")]
    graph: Option<PathBuf>,
    #[arg(long, conflicts_with = "family", requires = "graph")]
    pattern: Option<Pattern>,
    #[arg(long)]
    eps: f64,
    /// formula, auto, or a number in (0, 1).
    #[arg(long, default_value = "formula", value_parser = parse_tau)]
    tau: TauChoice,
    #[arg(long)]
    alpha: Option<f64>,
    /// k in the τ formula; the family's k (or e(G)/m(n)) when absent.
    #[arg(long)]
    k: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_LEAF_GUARD)]
    leaf_guard: usize,
    /// Largest e(G) for the exhaustive verification.
    #[arg(long, default_value_t = DEFAULT_VERIFY_GUARD)]
    guard: usize,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
struct CountArgs {
    #[arg(long)]
    pattern: Pattern,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    eps: f64,
    #[arg(long)]
    k0: f64,
    #[arg(long, default_value_t = 0.5)]
    delta: f64,
    /// Density parameter for every per-container family.
    #[arg(long)]
    family_k: Option<f64>,
    #[arg(long)]
    target: Option<usize>,
    #[arg(long, default_value = "auto", value_parser = parse_tau)]
    tau: TauChoice,
    /// Compare against the exact count and check coverage exhaustively.
    #[arg(long)]
    oracle: bool,
    #[arg(long, default_value_t = DEFAULT_COUNT_GUARD)]
    count_guard: usize,
    #[arg(long, default_value_t = DEFAULT_LEAF_GUARD)]
    leaf_guard: usize,
    #[arg(long, default_value_t = DEFAULT_MAX_LEVELS)]
    max_levels: usize,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
struct OracleArgs {
    #[arg(long)]
    pattern: Pattern,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = DEFAULT_COUNT_GUARD)]
    guard: usize,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
struct TrendArgs {
    #[arg(long)]
    pattern: Pattern,
    /// Vertex counts, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    sizes: Vec<usize>,
    /// Random hosts with round(c·m(n)) edges instead of complete ones.
    #[arg(long)]
    random: bool,
    /// Threshold constant C, and the edge factor for random hosts.
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_TREND_GUARD)]
    guard: usize,
}

fn parse_tau(s: &str) -> Result<TauChoice, String> {
    match s {
        "formula" => Ok(TauChoice::Formula),
        "auto" => Ok(TauChoice::Auto),
        other => other
            .parse::<f64>()
            .map(TauChoice::Fixed)
            .map_err(|_| format!("expected formula, auto or a number, got {other:?}")),
    }
}

#[derive(Debug)]
enum Failure {
    /// Bad input, guard exceeded, or a library error.
    Usage(String),
}

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Usage(e.to_string())
    }
}

type Out = Result<(String, bool), Failure>;

#[derive(Serialize)]
struct Envelope<'a, T> {
    config: &'a RunConfig,
    result: &'a T,
}

struct Emitter<'a> {
    config: &'a RunConfig,
}

impl Emitter<'_> {
    fn json<T: Serialize>(&self, result: &T) -> Result<String, Failure> {
        let mut s = serde_json::to_string_pretty(&Envelope {
            config: self.config,
            result,
        })?;
        s.push('\n');
        Ok(s)
    }

    fn csv<R: Serialize>(&self, notes: &[String], rows: impl IntoIterator<Item = R>) -> Result<String, Failure> {
        let mut out = format!("{CONFIG_PREFIX}{}\n", serde_json::to_string(self.config)?);
        for note in notes {
            out.push_str(&format!("# {note}\n"));
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        for row in rows {
            w.serialize(row)?;
        }
        out.push_str(&String::from_utf8(w.into_inner().map_err(|e| e.to_string())?)?);
        Ok(out)
    }

    fn emit<T: Serialize, R: Serialize>(
        &self,
        result: &T,
        notes: &[String],
        rows: impl IntoIterator<Item = R>,
    ) -> Result<String, Failure> {
        match self.config.format {
            Format::Json => self.json(result),
            Format::Csv => self.csv(notes, rows),
        }
    }
}

fn join(ids: impl IntoIterator<Item = usize>) -> String {
    ids.into_iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ")
}

/// Parses a JSON file, unwrapping the `result` of an earlier report.
fn read_payload<T: serde::de::DeserializeOwned>(path: &Path, pointer: &str) -> Result<T, Failure> {
    let context = |e: &dyn std::fmt::Display| format!("{}: {e}", path.display());
    let text = fs::read_to_string(path).map_err(|e| context(&e))?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| context(&e))?;
    let inner = match value.pointer(pointer) {
        Some(v) if value.get("config").is_some() => v.clone(),
        _ => value,
    };
    Ok(serde_json::from_value(inner).map_err(|e| context(&e))?)
}

fn read_graph(path: &Path) -> Result<HostGraph, Failure> {
    read_payload(path, "/result")
}

fn read_family(path: &Path) -> Result<(AnyFamily, ScaleParams), Failure> {
    let file: FamilyFile = read_payload(path, "/result/family")?;
    Ok(file.load()?)
}

fn copies_of(g: &HostGraph, pattern: &Pattern) -> Result<Vec<PatternCopy>, Failure> {
    Ok(match pattern {
        Pattern::Theta { a, b } => enumerate_theta(g, *a, *b)?
            .into_iter()
            .map(PatternCopy::Theta)
            .collect(),
        Pattern::Complete(p) => enumerate_rpartite(g, p)?
            .into_iter()
            .map(PatternCopy::Complete)
            .collect(),
    })
}

fn gen(args: &GenArgs, out: &Emitter) -> Out {
    let density = match (args.m, args.p) {
        (Some(m), None) => Density::Edges(m),
        (None, Some(p)) => Density::Prob(p),
        _ => return Err(Failure::Usage("give exactly one of --m and --p".into())),
    };
    let g = random_host(args.n, density, args.r, args.seed)?;
    #[derive(Serialize)]
    struct Row {
        id: usize,
        vertices: String,
    }
    let rows = g.edges().iter().enumerate().map(|(id, e)| Row {
        id,
        vertices: join(e.iter().copied()),
    });
    Ok((out.emit(&g, &[format!("n = {}, r = {}", g.n(), g.r())], rows)?, true))
}

fn enumerate(args: &EnumArgs, out: &Emitter) -> Out {
    let g = read_graph(&args.graph)?;
    args.pattern.check_host(&g)?;
    let copies = copies_of(&g, &args.pattern)?;
    let oracle = if args.oracle {
        Some(oracle_count_with_guard(&g, &args.pattern, args.oracle_guard)?)
    } else {
        None
    };
    #[derive(Serialize)]
    struct Report {
        pattern: Pattern,
        n: usize,
        m: usize,
        copies: usize,
        oracle: Option<u64>,
        agree: Option<bool>,
        members: Option<Vec<PatternCopy>>,
    }
    let agree = oracle.map(|o| o == copies.len() as u64);
    let report = Report {
        pattern: args.pattern.clone(),
        n: g.n(),
        m: g.m(),
        copies: copies.len(),
        oracle,
        agree,
        members: args.list.then_some(copies),
    };
    #[derive(Serialize)]
    struct Row {
        pattern: String,
        n: usize,
        m: usize,
        copies: usize,
        oracle: Option<u64>,
    }
    let row = Row {
        pattern: report.pattern.to_string(),
        n: report.n,
        m: report.m,
        copies: report.copies,
        oracle,
    };
    Ok((out.emit(&report, &[], [row])?, agree != Some(false)))
}

fn build(args: &BuildArgs, out: &Emitter) -> Out {
    let g = Arc::new(read_graph(&args.graph)?);
    let mut p = ScaleParams::for_host(args.pattern.clone(), &g, args.delta)?;
    if let Some(k) = args.k {
        p = p.with_k(k)?;
    }
    let target = args.target.unwrap_or_else(|| p.target_count());
    let order = if args.shuffle {
        ScanOrder::Shuffled(args.seed)
    } else {
        ScanOrder::Canonical
    };
    let (fam, summary) = AnyFamily::build(g, &p, target, order)?;
    let goodness = fam.is_good(&p)?;
    let file = FamilyFile::new(&fam, &p, Some(summary.clone()));
    if let Some(path) = &args.save {
        fs::write(path, serde_json::to_string_pretty(&file)? + "\n").map_err(|e| format!("{}: {e}", path.display()))?;
    }
    #[derive(Serialize)]
    struct Report<'a> {
        family: &'a FamilyFile,
        goodness: &'a GoodnessReport,
    }
    #[derive(Serialize)]
    struct Row {
        stop: String,
        target: usize,
        scanned: usize,
        rejected: usize,
        members: usize,
        k: f64,
        delta: f64,
        good: bool,
    }
    let row = Row {
        stop: serde_json::to_value(summary.stop)?
            .as_str()
            .unwrap_or_default()
            .to_string(),
        target: summary.target,
        scanned: summary.scanned,
        rejected: summary.rejected,
        members: fam.len(),
        k: p.k,
        delta: p.delta,
        good: goodness.pass,
    };
    let text = out.emit(
        &Report {
            family: &file,
            goodness: &goodness,
        },
        &[],
        [row],
    )?;
    Ok((text, goodness.pass))
}

fn audit(args: &AuditArgs, out: &Emitter) -> Out {
    let (fam, p) = read_family(&args.family)?;
    let alpha = args.alpha.unwrap_or_else(|| fam.pattern().alpha());
    let report: AuditReport = fam.audit(&p, alpha)?;
    #[derive(Serialize)]
    struct Row {
        check: &'static str,
        pass: bool,
        detail: String,
    }
    let mut rows = vec![
        Row {
            check: "ledger",
            pass: report.ledger_matches,
            detail: format!("{} members", report.members),
        },
        Row {
            check: "goodness",
            pass: report.good.pass,
            detail: format!("{} queries", report.good.checked),
        },
        Row {
            check: "handshake",
            pass: report.handshake.holds(),
            detail: format!("{} vs {}", report.handshake.lhs, report.handshake.rhs),
        },
        Row {
            check: "monotone",
            pass: report.monotone,
            detail: String::new(),
        },
        Row {
            check: "bound",
            pass: report.bound.pass(),
            detail: format!("{} audited, max ratio {}", report.bound.checked, report.bound.max_ratio),
        },
    ];
    if let Some(c) = &report.condition_ii {
        rows.push(Row {
            check: "condition_ii",
            pass: c.pass,
            detail: format!("C = {}", c.c),
        });
    }
    Ok((out.emit(&report, &[], rows)?, report.pass()))
}

fn containers(args: &ContainersArgs, out: &Emitter) -> Out {
    let (g, pattern, edge_sets, family_k) = match (&args.family, &args.graph, &args.pattern) {
        (Some(path), _, _) => {
            let (fam, p) = read_family(path)?;
            (fam.host().clone(), fam.pattern().clone(), fam.edge_sets(), Some(p.k))
        }
        (None, Some(path), Some(pattern)) => {
            let g = Arc::new(read_graph(path)?);
            pattern.check_host(&g)?;
            let fam = AnyFamily::from_copies(g.clone(), pattern.clone(), copies_of(&g, pattern)?)?;
            (g, pattern.clone(), fam.edge_sets(), None)
        }
        _ => return Err(Failure::Usage("give --family, or --graph with --pattern".into())),
    };
    let k = args
        .k
        .or(family_k)
        .unwrap_or_else(|| g.m() as f64 / m_of_n(&pattern, g.n()));
    let cfg = StepConfig {
        eps: args.eps,
        alpha: args.alpha.unwrap_or_else(|| pattern.alpha()),
        k,
        tau: args.tau,
        leaf_guard: args.leaf_guard,
    };
    let cf = container_step_on(SupersatHypergraph::new(g.m(), edge_sets)?, &cfg)?;
    let report = if g.m() <= args.guard {
        Some(verify_containers(&cf, &g, &pattern, args.guard)?)
    } else {
        log::warn!("e(G) = {} exceeds the verification guard {}", g.m(), args.guard);
        None
    };
    #[derive(Serialize)]
    struct Report<'a> {
        containers: &'a ContainerFamily,
        verification: &'a Option<ContainerReport>,
    }
    #[derive(Serialize)]
    struct Row {
        index: usize,
        edges: usize,
        fingerprint: String,
        container: String,
    }
    let rows = cf
        .containers
        .iter()
        .zip(&cf.fingerprints)
        .enumerate()
        .map(|(index, (c, f))| Row {
            index,
            edges: c.len(),
            fingerprint: join(f.iter()),
            container: join(c.iter()),
        });
    let mut notes = vec![format!(
        "tau = {}, codegree = {}, count bound = {}, shrink = {}",
        cf.tau, cf.codegree, cf.count_bound, cf.shrink
    )];
    if let Some(r) = &report {
        notes.push(format!(
            "coverage = {}, fingerprints = {}, sparse = {}, count = {}",
            r.coverage, r.fingerprints, r.sparse_containers, r.count_within_bound
        ));
    }
    let pass = report.as_ref().is_none_or(ContainerReport::pass);
    let text = out.emit(
        &Report {
            containers: &cf,
            verification: &report,
        },
        &notes,
        rows,
    )?;
    Ok((text, pass))
}

fn count(args: &CountArgs, out: &Emitter) -> Out {
    let cfg = PipelineConfig {
        pattern: args.pattern.clone(),
        n: args.n,
        eps: args.eps,
        k0: args.k0,
        delta: args.delta,
        family_k: args.family_k,
        target: args.target,
        order: ScanOrder::Canonical,
        tau: args.tau,
        leaf_guard: args.leaf_guard,
        max_levels: args.max_levels,
    };
    let result = run_pipeline(&cfg)?;
    #[derive(Serialize)]
    struct Check {
        exact: FreeCount,
        coverage: CoverageReport,
        sound: bool,
    }
    let check = if args.oracle {
        let exact = brute_force_free_count(args.n, &args.pattern, args.count_guard)?;
        let coverage = check_coverage(args.n, &args.pattern, result.tree.last(), args.count_guard)?;
        let sound = result.bound >= exact.count.into() && coverage.covered;
        Some(Check { exact, coverage, sound })
    } else {
        None
    };
    #[derive(Serialize)]
    struct Report<'a> {
        pipeline: &'a PipelineResult,
        oracle: &'a Option<Check>,
    }
    #[derive(Serialize)]
    struct Row {
        level: usize,
        k: Option<f64>,
        containers: usize,
        max_edges: usize,
        bound: String,
    }
    let first = result.tree.levels[0][0].len();
    let mut rows = vec![Row {
        level: 0,
        k: None,
        containers: 1,
        max_edges: first,
        bound: power_bound(&result.tree.levels[0]).to_string(),
    }];
    rows.extend(result.tree.stats.iter().map(|s| Row {
        level: s.level,
        k: Some(s.k),
        containers: s.containers,
        max_edges: s.max_edges,
        bound: s.bound.to_string(),
    }));
    let mut notes = vec![format!(
        "schedule length = {}, bound = {}, sparse threshold = {}, sparse bound = {}",
        result.schedule.len(),
        result.bound,
        result.sparse_threshold,
        result.sparse_bound
    )];
    if let Some(h) = &result.halted {
        notes.push(format!(
            "halted at level {}, container {}: {}",
            h.level, h.container, h.reason
        ));
    }
    if let Some(c) = &check {
        notes.push(format!(
            "exact = {}, covered = {}, sound = {}",
            c.exact.count, c.coverage.covered, c.sound
        ));
    }
    let pass = check.as_ref().is_none_or(|c| c.sound);
    let text = out.emit(
        &Report {
            pipeline: &result,
            oracle: &check,
        },
        &notes,
        rows,
    )?;
    Ok((text, pass))
}

fn oracle(args: &OracleArgs, out: &Emitter) -> Out {
    let fc = brute_force_free_count(args.n, &args.pattern, args.guard)?;
    #[derive(Serialize)]
    struct Row {
        edges: usize,
        count: u64,
    }
    let rows = fc.by_edges.iter().map(|(&edges, &count)| Row { edges, count });
    Ok((out.emit(&fc, &[format!("total = {}", fc.count)], rows)?, true))
}

fn trend(args: &TrendArgs, out: &Emitter) -> Out {
    let series = if args.random {
        HostSeries::Random {
            sizes: args.sizes.clone(),
            c: args.c,
            seed: args.seed,
        }
    } else {
        HostSeries::Complete {
            sizes: args.sizes.clone(),
        }
    };
    let hosts = series.hosts(&args.pattern)?;
    let rows: Vec<TrendRow> = supersat_trend(&args.pattern, &hosts, args.c, args.guard)?;
    Ok((out.emit(&rows, &[], rows.iter())?, true))
}

fn run(config: &RunConfig) -> Out {
    let out = Emitter { config };
    match &config.command {
        Command::Gen(a) => gen(a, &out),
        Command::Enum(a) => enumerate(a, &out),
        Command::Build(a) => build(a, &out),
        Command::Audit(a) => audit(a, &out),
        Command::Containers(a) => containers(a, &out),
        Command::Count(a) => count(a, &out),
        Command::Oracle(a) => oracle(a, &out),
        Command::Trend(a) => trend(a, &out),
    }
}

/// Reads the config echoed by an earlier run: the CSV header line or the
/// "config" field of a JSON report.
fn load_replay(path: &Path) -> Result<RunConfig, Failure> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    if let Some(rest) = text.lines().next().and_then(|l| l.strip_prefix(CONFIG_PREFIX)) {
        return Ok(serde_json::from_str(rest)?);
    }
    let value: serde_json::Value = serde_json::from_str(&text)?;
    let config = value
        .get("config")
        .cloned()
        .ok_or_else(|| format!("{}: no config header", path.display()))?;
    Ok(serde_json::from_value(config)?)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    let config = match (cli.replay, cli.command) {
        (Some(path), None) => match load_replay(&path) {
            Ok(c) => c,
            Err(Failure::Usage(msg)) => {
                eprintln!("error: {msg}");
                return ExitCode::from(2);
            }
        },
        (None, Some(command)) => RunConfig {
            format: cli.format,
            command,
        },
        _ => {
            eprintln!("error: give a subcommand or --replay FILE, not both");
            return ExitCode::from(2);
        }
    };
    match run(&config) {
        Ok((text, pass)) => {
            print!("{text}");
            if pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
