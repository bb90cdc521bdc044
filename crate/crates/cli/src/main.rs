//! `aifv`: construct, apply and benchmark N-bit-delay AIFV codes.
//!
//! Exit codes: 0 success, 2 invalid input or rule violation, 3 resource
//! limit, 4 I/O failure.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use aifv::bench::{rows_to_csv, run_simulation, run_theoretical, seed_comment, Coder, ExperimentConfig, SimulationConfig};
use aifv::bits::BitStream;
use aifv::builder::{construct, BuildConfig, Backend, InitRule};
use aifv::forest::{decode, encode, parse_codebook, validate_full, validate_rule1, write_codebook, CodeForest};
use aifv::mode::FamilyKind;
use aifv::source::{binary_grid, polynomial_sources, SourceDistribution};
use aifv::{Error, ErrorClass, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;

#[derive(Parser)]
#[command(name = "aifv", version, about = "N-bit-delay AIFV code construction and coding")]
struct Cli {
    /// Worker threads for tree solves and simulation trials (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a code forest for a distribution file.
    Construct(ConstructArgs),
    /// Encode a symbol file into a packed bitstream.
    Encode(EncodeArgs),
    /// Decode a packed bitstream into a symbol file.
    Decode(DecodeArgs),
    /// Check a codebook against the decodability and fullness rules.
    Check {
        #[arg(long)]
        codebook: PathBuf,
    },
    /// Expected-length table from stationary distributions.
    Eval(EvalArgs),
    /// Finite-sequence simulation table.
    Simulate(SimulateArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendArg {
    Ilp,
    Brute,
}

#[derive(Clone, Copy, ValueEnum)]
enum InitArg {
    Formula,
    HuffmanFloor,
}

#[derive(Args)]
struct ConstructArgs {
    /// Distribution file with lines `a<m> <probability>`.
    #[arg(long)]
    dist: PathBuf,
    /// Decoding delay bound in bits.
    #[arg(short = 'N', long = "delay")]
    n: usize,
    #[arg(long, value_enum, default_value = "ilp")]
    backend: BackendArg,
    /// Restrict links to the AIFV-N modes.
    #[arg(long)]
    aifvm: bool,
    /// Use every basic mode instead of the continuous ones (brute backend only).
    #[arg(long, conflicts_with = "aifvm")]
    all_modes: bool,
    #[arg(long)]
    max_depth: Option<usize>,
    #[arg(long, default_value_t = aifv::markov::DEFAULT_TOLERANCE)]
    tol: f64,
    #[arg(long, default_value_t = aifv::builder::DEFAULT_MAX_ITERATIONS)]
    max_iter: usize,
    #[arg(long, value_enum, default_value = "formula")]
    init: InitArg,
    #[arg(long, default_value_t = aifv::optimizer::DEFAULT_NODE_BUDGET)]
    node_budget: u64,
    /// Solve mirror-image modes separately instead of flipping trees.
    #[arg(long)]
    no_mirror: bool,
    /// Codebook path; the report goes to `<path>.report` and the trace to `<path>.trace.csv`.
    #[arg(short = 'o', long)]
    output: PathBuf,
}

#[derive(Args)]
struct EncodeArgs {
    #[arg(long)]
    codebook: PathBuf,
    /// Whitespace-separated symbol indices.
    #[arg(long)]
    input: PathBuf,
    #[arg(short = 'o', long)]
    output: PathBuf,
}

#[derive(Args)]
struct DecodeArgs {
    #[arg(long)]
    codebook: PathBuf,
    #[arg(long)]
    input: PathBuf,
    /// Number of symbols to decode.
    #[arg(short = 'L', long = "count")]
    count: usize,
    #[arg(short = 'o', long)]
    output: PathBuf,
}

#[derive(Args, Clone)]
struct TableArgs {
    /// `grid` (binary p0 = 0.51..0.99), `poly` (P0..P2) or a distribution file; repeatable.
    #[arg(long = "source", default_value = "grid")]
    sources: Vec<String>,
    /// Alphabet size for `poly`.
    #[arg(long, default_value_t = 5)]
    alphabet: usize,
    /// Delays of the AIFV builds, comma-separated.
    #[arg(short = 'N', long = "delays", value_delimiter = ',', default_value = "1,2,3")]
    delays: Vec<usize>,
    /// Orders of AIFV-m builds.
    #[arg(long, value_delimiter = ',')]
    aifvm: Vec<usize>,
    /// Block lengths of extended Huffman codes.
    #[arg(long, value_delimiter = ',')]
    ext: Vec<usize>,
    #[arg(long, default_value_t = aifv::optimizer::DEFAULT_NODE_BUDGET)]
    node_budget: u64,
    /// CSV path; standard output when absent.
    #[arg(short = 'o', long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    table: TableArgs,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    table: TableArgs,
    #[arg(long, value_delimiter = ',', default_value = "512,1024,2048")]
    seq_len: Vec<usize>,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("AIFV_LOG")).init();
    let cli = Cli::parse();
    if let Some(j) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(j).build_global() {
            eprintln!("error: cannot start {j} worker threads: {e}");
            return ExitCode::from(3);
        }
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e.class() {
        ErrorClass::Validation => 2,
        ErrorClass::Resource => 3,
        ErrorClass::Io => 4,
    }
}

fn run(cmd: Command) -> Result<()> {
    match cmd {
        Command::Construct(a) => cmd_construct(a),
        Command::Encode(a) => cmd_encode(a),
        Command::Decode(a) => cmd_decode(a),
        Command::Check { codebook } => cmd_check(&codebook),
        Command::Eval(a) => cmd_eval(a),
        Command::Simulate(a) => cmd_simulate(a),
    }
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| io_error(path, e))
}

fn io_error(path: &Path, e: io::Error) -> Error {
    Error::Io(io::Error::new(e.kind(), format!("{}: {e}", path.display())))
}

/// Writes through a temporary file in the same directory, then renames.
fn write_atomic(path: &Path, data: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().ok_or_else(|| Error::Domain(format!("{} is not a file path", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    let result = fs::File::create(&tmp)
        .and_then(|mut f| f.write_all(data).and_then(|_| f.sync_all()))
        .and_then(|_| fs::rename(&tmp, path));
    if let Err(e) = result {
        let _ = fs::remove_file(&tmp);
        return Err(io_error(path, e));
    }
    Ok(())
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn read_forest(path: &Path) -> Result<CodeForest> {
    aifv::forest::read_codebook(&read_text(path)?)
}

fn cmd_construct(a: ConstructArgs) -> Result<()> {
    let source = SourceDistribution::parse(&read_text(&a.dist)?)?;
    let family = match (a.aifvm, a.all_modes) {
        (true, _) => FamilyKind::AifvM,
        (_, true) => FamilyKind::Basic,
        _ => FamilyKind::Continuous,
    };
    let backend = match a.backend {
        BackendArg::Ilp => Backend::Ilp,
        BackendArg::Brute => Backend::Brute,
    };
    if a.aifvm && matches!(backend, Backend::Brute) {
        return Err(Error::Domain("--aifvm uses the ilp backend".into()));
    }
    let cfg = BuildConfig {
        family,
        backend,
        max_depth: a.max_depth,
        tolerance: a.tol,
        max_iterations: a.max_iter,
        init: match a.init {
            InitArg::Formula => InitRule::Formula,
            InitArg::HuffmanFloor => InitRule::HuffmanFloor,
        },
        node_budget: a.node_budget,
        cosmos: !a.no_mirror,
        ..BuildConfig::new(a.n)
    };
    let (forest, report) = construct(&source, &cfg)?;
    write_atomic(&a.output, write_codebook(&forest).as_bytes())?;
    write_atomic(&with_suffix(&a.output, ".report"), report.to_text().as_bytes())?;
    write_atomic(&with_suffix(&a.output, ".trace.csv"), report.trace_csv().as_bytes())?;
    info!("wrote {}", a.output.display());
    println!(
        "trees={} expected_length={:.15} entropy={:.15} iterations={} f_optimal={} g_checked={}",
        forest.len(),
        report.expected_length,
        source.entropy(),
        report.iterations,
        report.f_optimal,
        report.g_checked
    );
    Ok(())
}

fn parse_symbols(text: &str, alphabet: usize) -> Result<Vec<usize>> {
    text.split_whitespace()
        .enumerate()
        .map(|(i, t)| {
            let s: usize = t.parse().map_err(|_| Error::Domain(format!("symbol {i}: {t:?} is not an index")))?;
            if s >= alphabet {
                return Err(Error::UnknownSymbol { symbol: s, alphabet });
            }
            Ok(s)
        })
        .collect()
}

fn cmd_encode(a: EncodeArgs) -> Result<()> {
    let forest = read_forest(&a.codebook)?;
    let symbols = parse_symbols(&read_text(&a.input)?, forest.alphabet_size())?;
    let bits = encode(&forest, &symbols)?;
    write_atomic(&a.output, bits.as_bytes())?;
    println!("symbols={} bits={} bytes={}", symbols.len(), bits.len(), bits.as_bytes().len());
    Ok(())
}

fn cmd_decode(a: DecodeArgs) -> Result<()> {
    let forest = read_forest(&a.codebook)?;
    let bytes = fs::read(&a.input).map_err(|e| io_error(&a.input, e))?;
    let stream = BitStream::from_bytes(&bytes, bytes.len() * 8)?;
    let symbols = decode(&forest, &stream, a.count)?;
    let mut text = symbols.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(" ");
    text.push('\n');
    write_atomic(&a.output, text.as_bytes())?;
    println!("symbols={}", symbols.len());
    Ok(())
}

fn cmd_check(path: &Path) -> Result<()> {
    let forest = parse_codebook(&read_text(path)?)?;
    let mut failures = 0;
    for (k, r) in validate_rule1(&forest)?.iter().enumerate() {
        let status = if r.ok() { "ok" } else { "FAIL" };
        let forms = if r.forms_agree() { "agree" } else { "DISAGREE" };
        println!("T{k} mode {{{}}}: rule1 {status} (interval form {forms})", forest.tree(k).mode);
        for v in &r.violations {
            println!("  {v}");
        }
        failures += usize::from(!r.ok() || !r.forms_agree());
    }
    let full = validate_full(&forest)?;
    println!("rule2 {}", if full.is_empty() { "ok" } else { "FAIL" });
    for v in &full {
        println!("  {v}");
    }
    failures += full.len();
    println!("delay_bound={}", forest.delay_bound());
    println!("modes:");
    for t in forest.trees() {
        let id = t.mode.continuous_id().map_or_else(|| "discontinuous".to_string(), |id| id.to_string());
        println!("  {{{}}} {id}", t.mode);
    }
    if failures > 0 {
        println!("result=fail");
        return Err(Error::InvalidForest(format!("{failures} rule violation(s) in {}", path.display())));
    }
    println!("result=pass");
    Ok(())
}

fn sources(t: &TableArgs) -> Result<Vec<(String, SourceDistribution)>> {
    let mut out = Vec::new();
    for s in &t.sources {
        match s.as_str() {
            "grid" => out.extend(binary_grid()),
            "poly" => out.extend(polynomial_sources(t.alphabet)?),
            file => {
                let p = Path::new(file);
                let name = p.file_stem().map_or_else(|| file.to_string(), |n| n.to_string_lossy().into_owned());
                out.push((name, SourceDistribution::parse(&read_text(p)?)?));
            }
        }
    }
    Ok(out)
}

fn experiment(t: &TableArgs, range: bool) -> Result<ExperimentConfig> {
    let mut coders = vec![Coder::Huffman];
    coders.extend(t.ext.iter().map(|&n| Coder::ExtendedHuffman(n)));
    coders.extend(t.delays.iter().map(|&n| Coder::Aifv(n)));
    coders.extend(t.aifvm.iter().map(|&m| Coder::AifvM(m)));
    if range {
        coders.push(Coder::Range);
    }
    let build = BuildConfig { node_budget: t.node_budget, ..BuildConfig::new(1) };
    Ok(ExperimentConfig { sources: sources(t)?, coders, build })
}

fn emit(output: &Option<PathBuf>, csv: &str) -> Result<()> {
    match output {
        Some(p) => write_atomic(p, csv.as_bytes()),
        None => io::stdout().write_all(csv.as_bytes()).map_err(Error::Io),
    }
}

fn cmd_eval(a: EvalArgs) -> Result<()> {
    let rows = run_theoretical(&experiment(&a.table, false)?)?;
    emit(&a.table.output, &rows_to_csv(&["expected lengths from stationary distributions".into()], &rows))
}

fn cmd_simulate(a: SimulateArgs) -> Result<()> {
    let cfg = SimulationConfig {
        experiment: experiment(&a.table, true)?,
        seq_lens: a.seq_len,
        trials: a.trials,
        seed: a.seed,
    };
    let rows = run_simulation(&cfg)?;
    emit(&a.table.output, &rows_to_csv(&[seed_comment(a.seed)], &rows))
}
