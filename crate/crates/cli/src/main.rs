use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use avoidsq_core::gen::{infeasible_pair, random_array, random_pls, CBlock, FrontierPoint, RandomArrayModel, RandomPlsModel};
use avoidsq_core::io::{self, Instance};
use avoidsq_core::pipeline::{replay, solve, SolveResult};
use avoidsq_core::square::check_order;
use avoidsq_core::sweep::{run_sweep, to_csv, GridPoint};
use avoidsq_core::verify::{verify_solution, Violation};
use avoidsq_core::{AvoidanceArray, FallbackPolicy, Fraction, LatinSquare, LinearFloor, Params, PartialLatinSquare};

const EXIT_OK: u8 = 0;
const EXIT_VERIFY_FAILED: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_INFEASIBLE: u8 = 3;
const EXIT_GAVE_UP: u8 = 4;

/// Complete partial Latin squares while avoiding an array of forbidden symbols.
#[derive(Parser)]
#[command(name = "avoidsq", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a random or blocked instance.
    Generate(GenerateArgs),
    /// Complete P avoiding A; stats JSON goes to stdout.
    Solve(SolveArgs),
    /// Check that L is a Latin square completing P and avoiding A.
    Verify(VerifyArgs),
    /// Rebuild a solution from a trade log.
    Replay(ReplayArgs),
    /// Success rates over a grid of instance models, as CSV.
    Sweep(SweepArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Model {
    Pls,
    Array,
    Frontier,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, value_enum)]
    model: Model,
    #[arg(long)]
    n: Option<usize>,
    /// Cell density of the random PLS.
    #[arg(long)]
    p: Option<f64>,
    /// Forbidden symbols per cell of the random array.
    #[arg(long)]
    m: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// PLS whose entries are removed from the generated array.
    #[arg(long)]
    avoid: Option<PathBuf>,
    #[arg(long)]
    r: Option<usize>,
    #[arg(long)]
    t: Option<usize>,
    /// Use the literal bottom-right block range, which overlaps the middle block.
    #[arg(long)]
    literal_c_block: bool,
    /// Output file. Frontier pairs use it as a prefix for `.pls` and `.array` files.
    #[arg(long, short)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Profile {
    Paper,
    Desk,
    Custom,
}

#[derive(Args)]
struct ProfileArgs {
    #[arg(long, value_enum, default_value = "desk")]
    profile: Profile,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_parser = parse_policy)]
    policy: Option<FallbackPolicy>,
    #[arg(long, value_parser = parse_fraction)]
    alpha: Option<Fraction>,
    #[arg(long, value_parser = parse_fraction)]
    beta: Option<Fraction>,
    #[arg(long, value_parser = parse_fraction)]
    eps: Option<Fraction>,
    #[arg(long, value_parser = parse_fraction)]
    k: Option<Fraction>,
    #[arg(long, value_parser = parse_fraction)]
    d: Option<Fraction>,
    #[arg(long, value_parser = parse_fraction)]
    c_slope: Option<Fraction>,
    #[arg(long, value_parser = parse_fraction)]
    f_slope: Option<Fraction>,
}

#[derive(Args)]
struct SolveArgs {
    pls: PathBuf,
    array: PathBuf,
    #[arg(long, short)]
    out: PathBuf,
    #[arg(long)]
    trade_log: Option<PathBuf>,
    #[command(flatten)]
    profile: ProfileArgs,
}

#[derive(Args)]
struct VerifyArgs {
    latin: PathBuf,
    pls: PathBuf,
    array: PathBuf,
}

#[derive(Args)]
struct ReplayArgs {
    log: PathBuf,
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// Exit 1 unless the replayed square equals this file.
    #[arg(long)]
    expect: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Grid {
    Random,
    Frontier,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, value_enum, default_value = "random")]
    grid: Grid,
    #[arg(long, value_delimiter = ',')]
    n: Vec<usize>,
    #[arg(long, value_delimiter = ',')]
    p: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    m: Vec<usize>,
    #[arg(long, value_delimiter = ',')]
    r: Vec<usize>,
    /// Defaults to every t in 1..=r+1.
    #[arg(long, value_delimiter = ',')]
    t: Vec<usize>,
    #[arg(long, default_value_t = 10)]
    replicates: usize,
    #[arg(long, short)]
    out: Option<PathBuf>,
    #[command(flatten)]
    profile: ProfileArgs,
}

fn parse_fraction(s: &str) -> Result<Fraction, String> {
    s.parse().map_err(|e: avoidsq_core::Error| e.to_string())
}

fn parse_policy(s: &str) -> Result<FallbackPolicy, String> {
    s.parse().map_err(|e: avoidsq_core::Error| e.to_string())
}

/// A failed command: message for stderr and the exit code.
struct Failure(u8, String);

impl From<avoidsq_core::Error> for Failure {
    fn from(e: avoidsq_core::Error) -> Self {
        Failure(EXIT_USAGE, e.to_string())
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure(EXIT_USAGE, msg.into())
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => write(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_pls(path: &Path) -> Result<PartialLatinSquare, Failure> {
    io::parse_pls(&read(path)?).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn load_array(path: &Path) -> Result<AvoidanceArray, Failure> {
    io::parse_array(&read(path)?).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn load_latin(path: &Path) -> Result<LatinSquare, Failure> {
    io::parse_latin(&read(path)?).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn render(instance: &Instance, format: Format) -> String {
    match (format, instance) {
        (Format::Json, i) => i.to_json(),
        (Format::Text, Instance::Pls(p)) => io::pls_to_text(p),
        (Format::Text, Instance::Latin(l)) => io::pls_to_text(&l.to_partial()),
        (Format::Text, Instance::Array(a)) => io::array_to_text(a),
    }
}

fn need<T>(v: Option<T>, flag: &str, model: &str) -> Result<T, Failure> {
    v.ok_or_else(|| usage(format!("--model {model} requires --{flag}")))
}

fn cmd_generate(args: GenerateArgs) -> Result<u8, Failure> {
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    match args.model {
        Model::Pls => {
            let n = need(args.n, "n", "pls")?;
            check_order(n)?;
            let p = need(args.p, "p", "pls")?;
            if !(0.0..=1.0).contains(&p) {
                return Err(usage(format!("--p must lie in [0, 1], got {p}")));
            }
            let pls = random_pls(RandomPlsModel { n, p }, &mut rng);
            emit(args.out.as_deref(), &render(&Instance::Pls(pls), args.format))?;
        }
        Model::Array => {
            let n = need(args.n, "n", "array")?;
            check_order(n)?;
            let m = need(args.m, "m", "array")?;
            let avoid = args.avoid.as_deref().map(load_pls).transpose()?;
            if let Some(p) = &avoid {
                if p.order() != n {
                    return Err(usage(format!("--avoid has order {}, expected {n}", p.order())));
                }
            }
            let a = random_array(RandomArrayModel { n, m }, &mut rng, avoid.as_ref());
            emit(args.out.as_deref(), &render(&Instance::Array(a), args.format))?;
        }
        Model::Frontier => {
            let r = need(args.r, "r", "frontier")?;
            let t = need(args.t, "t", "frontier")?;
            let point = FrontierPoint::new(r, t)?;
            let variant = if args.literal_c_block { CBlock::Literal } else { CBlock::Corrected };
            let (p, a) = infeasible_pair(point, variant);
            let prefix = args.out.unwrap_or_else(|| PathBuf::from(format!("frontier_r{r}_t{t}")));
            let ext = if args.format == Format::Json { "json" } else { "txt" };
            let pls_path = with_suffix(&prefix, &format!("pls.{ext}"));
            let array_path = with_suffix(&prefix, &format!("array.{ext}"));
            write(&pls_path, &render(&Instance::Pls(p), args.format))?;
            write(&array_path, &render(&Instance::Array(a), args.format))?;
            eprintln!("wrote {} and {}", pls_path.display(), array_path.display());
        }
    }
    Ok(EXIT_OK)
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(".");
    s.push(suffix);
    PathBuf::from(s)
}

fn build_params(args: &ProfileArgs) -> Result<Params, Failure> {
    let overrides = [args.alpha, args.beta, args.eps, args.k, args.d, args.c_slope, args.f_slope];
    let mut params = match args.profile {
        Profile::Paper => Params::paper(),
        Profile::Desk => Params::desk(),
        Profile::Custom => Params::desk(),
    };
    if args.profile != Profile::Custom && overrides.iter().any(Option::is_some) {
        return Err(usage("constant overrides need --profile custom"));
    }
    let set = |slot: &mut Fraction, v: Option<Fraction>| {
        if let Some(v) = v {
            *slot = v;
        }
    };
    set(&mut params.alpha, args.alpha);
    set(&mut params.beta, args.beta);
    set(&mut params.epsilon, args.eps);
    set(&mut params.k, args.k);
    set(&mut params.d, args.d);
    if let Some(s) = args.c_slope {
        params.c_of_n = LinearFloor::new(s, params.c_of_n.min);
    }
    if let Some(s) = args.f_slope {
        params.f_of_n = LinearFloor::new(s, params.f_of_n.min);
    }
    if let Some(policy) = args.policy {
        params.fallback_policy = policy;
    }
    params.validate()?;
    Ok(params.with_seed(args.seed))
}

fn profile_name(p: Profile) -> &'static str {
    match p {
        Profile::Paper => "paper",
        Profile::Desk => "desk",
        Profile::Custom => "custom",
    }
}

fn cmd_solve(args: SolveArgs) -> Result<u8, Failure> {
    let started = Instant::now();
    let params = build_params(&args.profile)?;
    let p = load_pls(&args.pls)?;
    let a = load_array(&args.array)?;
    let out = solve(&p, &a, &params)?;
    if let Some(path) = &args.trade_log {
        write(path, &io::trade_log_to_jsonl(&out.trade_log))?;
    }
    let code = match &out.result {
        SolveResult::Solved(l) => {
            write(&args.out, &io::latin_to_json(l))?;
            EXIT_OK
        }
        SolveResult::Infeasible => EXIT_INFEASIBLE,
        SolveResult::GaveUp(reason) => {
            eprintln!("gave up: {reason}");
            EXIT_GAVE_UP
        }
    };
    let mut stats = serde_json::to_value(&out.stats).expect("stats serialize");
    let obj = stats.as_object_mut().expect("stats is an object");
    obj.insert("profile".into(), json!(profile_name(args.profile.profile)));
    obj.insert("seed".into(), json!(params.rng_seed));
    if args.profile.profile != Profile::Paper {
        obj.insert("note".into(), json!("constants outside the paper profile carry no completion guarantee"));
    }
    obj.insert("timings".into(), serde_json::to_value(&out.timings).expect("timings serialize"));
    obj.insert("wall_ms".into(), json!(started.elapsed().as_secs_f64() * 1e3));
    println!("{stats}");
    Ok(code)
}

fn violation_json(v: &Violation) -> Value {
    let cell = |c: avoidsq_core::CellRef| (c.row + 1, c.col + 1);
    let mut out = match *v {
        Violation::RowDuplicate { row, symbol } => json!({"kind": "row_duplicate", "row": row + 1, "symbol": symbol + 1}),
        Violation::ColDuplicate { col, symbol } => json!({"kind": "col_duplicate", "col": col + 1, "symbol": symbol + 1}),
        Violation::EmptyCell(c) => json!({"kind": "empty_cell", "row": cell(c).0, "col": cell(c).1}),
        Violation::Completion { cell: c, expected, found } => json!({
            "kind": "completion",
            "row": cell(c).0,
            "col": cell(c).1,
            "expected": expected + 1,
            "found": found.map(|s| s + 1),
        }),
        Violation::Conflict { cell: c, symbol } => {
            json!({"kind": "conflict", "row": cell(c).0, "col": cell(c).1, "symbol": symbol + 1})
        }
    };
    out["message"] = json!(v.to_string());
    out
}

fn cmd_verify(args: VerifyArgs) -> Result<u8, Failure> {
    let text = read(&args.latin)?;
    let l = io::parse_candidate(&text).map_err(|e| usage(format!("{}: {e}", args.latin.display())))?;
    let p = load_pls(&args.pls)?;
    let a = load_array(&args.array)?;
    if l.order() != p.order() || p.order() != a.order() {
        return Err(usage(format!("orders differ: L {}, P {}, A {}", l.order(), p.order(), a.order())));
    }
    let report = verify_solution(&l, &p, &a);
    let violations: Vec<Value> = report.violations.iter().map(violation_json).collect();
    println!("{}", json!({"clean": report.is_clean(), "violations": violations}));
    Ok(if report.is_clean() { EXIT_OK } else { EXIT_VERIFY_FAILED })
}

fn cmd_replay(args: ReplayArgs) -> Result<u8, Failure> {
    let log = io::parse_trade_log(&read(&args.log)?)?;
    let Some(l) = replay(&log)? else {
        return Err(usage("log records an exhaustive-search solve, which has no trades to replay"));
    };
    let text = io::latin_to_json(&l);
    emit(args.out.as_deref(), &text)?;
    if let Some(path) = &args.expect {
        if load_latin(path)? != l {
            eprintln!("replayed square differs from {}", path.display());
            return Ok(EXIT_VERIFY_FAILED);
        }
    }
    Ok(EXIT_OK)
}

fn cmd_sweep(args: SweepArgs) -> Result<u8, Failure> {
    let params = build_params(&args.profile)?;
    let mut points = Vec::new();
    match args.grid {
        Grid::Random => {
            if args.n.is_empty() || args.p.is_empty() || args.m.is_empty() {
                return Err(usage("--grid random needs --n, --p and --m"));
            }
            for &n in &args.n {
                for &p in &args.p {
                    if !(0.0..=1.0).contains(&p) {
                        return Err(usage(format!("--p must lie in [0, 1], got {p}")));
                    }
                    check_order(n)?;
                    for &m in &args.m {
                        points.push(GridPoint::Random { n, p, m });
                    }
                }
            }
        }
        Grid::Frontier => {
            if args.r.is_empty() {
                return Err(usage("--grid frontier needs --r"));
            }
            for &r in &args.r {
                let ts: Vec<usize> = if args.t.is_empty() { (1..=r + 1).collect() } else { args.t.clone() };
                for t in ts {
                    points.push(GridPoint::Frontier(FrontierPoint::new(r, t)?));
                }
            }
        }
    }
    eprintln!("sweeping {} points x {} replicates", points.len(), args.replicates);
    let rows = run_sweep(&points, args.replicates, params.rng_seed, &params);
    emit(args.out.as_deref(), &to_csv(&rows))?;
    Ok(EXIT_OK)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate(a) => cmd_generate(a),
        Command::Solve(a) => cmd_solve(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Replay(a) => cmd_replay(a),
        Command::Sweep(a) => cmd_sweep(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(Failure(code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}
