//! `pgc`: construct, snapshot, census, and evolve cycles of gaps among
//! the generators of primorial moduli.

mod table13;
mod verify;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use pgc_core::gapcycle::read_header;
use pgc_core::SnapshotHeader;
use pgc_core::numtheory::next_prime_after;
use pgc_core::{
    advance_counts, census, decimal_string, hl_ratio, is_prime, max_gap_by_stage,
    primes_up_to, read_snapshot, stage_ratio_sum, total_driving_terms, write_snapshot,
    CensusSink, Cycle, DrivingTermTable, Error as CoreError, ExactRational, RatioTable,
};

#[derive(Parser)]
#[command(
    name = "pgc",
    version,
    about = "Cycles of gaps among primorial generators: construction, census, dynamics"
)]
struct Cli {
    #[command(flatten)]
    config: RunConfig,
    #[command(subcommand)]
    command: Command,
}

/// Knobs shared by every subcommand.
#[derive(Args)]
struct RunConfig {
    /// Largest number of gaps a cycle may hold in memory.
    #[arg(
        long,
        global = true,
        env = "PGC_MAX_RESIDENT_GAPS",
        value_name = "N",
        default_value_t = 1_100_000_000
    )]
    max_resident_gaps: u64,

    /// Largest number of gaps a single streaming pass may emit.
    #[arg(
        long,
        global = true,
        env = "PGC_MAX_STREAM_GAPS",
        value_name = "N",
        default_value_t = 40_000_000_000
    )]
    max_stream_gaps: u64,

    /// Significant digits when rendering exact ratios as decimals.
    #[arg(long, global = true, value_name = "D", default_value_t = 5)]
    digits: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Construct a cycle of gaps and write it as a .pgc snapshot.
    #[command(group(ArgGroup::new("source").required(true).args(["up_to", "extend"])))]
    Build {
        /// Build the cycle of the primorial of P from scratch.
        #[arg(long, value_name = "P")]
        up_to: Option<u64>,
        /// Extend the cycle in this snapshot by one prime (see --by).
        #[arg(long, value_name = "SNAPSHOT", requires = "by")]
        extend: Option<PathBuf>,
        /// The prime to extend by; may divide the modulus.
        #[arg(long, value_name = "Q", requires = "extend")]
        by: Option<u64>,
        /// Where to write the snapshot.
        #[arg(long, value_name = "PATH")]
        out: PathBuf,
    },

    /// Census driving terms: runs of consecutive gaps summing to each g.
    #[command(group(ArgGroup::new("source").required(true).args(["input", "stream_from"])))]
    Census {
        /// Census a materialized snapshot.
        #[arg(long = "in", value_name = "SNAPSHOT")]
        input: Option<PathBuf>,
        /// Census the extension of this snapshot by --by without
        /// materializing the larger cycle.
        #[arg(long, value_name = "SNAPSHOT", requires = "by")]
        stream_from: Option<PathBuf>,
        /// The prime to extend by while streaming.
        #[arg(long, value_name = "Q", requires = "stream_from")]
        by: Option<u64>,
        /// Largest gap sum to tabulate (even).
        #[arg(long, value_name = "G")]
        gmax: u64,
        /// Longest run length to tabulate.
        #[arg(long, value_name = "J")]
        jmax: usize,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        /// Output path; stdout if omitted.
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },

    /// Advance a census table by the stage recurrence and compare each
    /// row's ratio sum with its limiting value.
    Dynamics {
        /// A census table in JSON form (from `census --format json`).
        #[arg(long, value_name = "TABLE")]
        table: PathBuf,
        /// The prime stage to advance to.
        #[arg(long, value_name = "P")]
        to: u64,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        /// Output path for the per-gap summary; stdout if omitted.
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
        /// Also write every stage's counts as CSV.
        #[arg(long, value_name = "PATH")]
        counts_out: Option<PathBuf>,
        /// Also write every stage's ratio sums as CSV.
        #[arg(long, value_name = "PATH")]
        ratios_out: Option<PathBuf>,
    },

    /// Maximum gap of each primorial stage up to a prime.
    Maxgap {
        #[arg(long, value_name = "P")]
        up_to: u64,
    },

    /// Closed-form limiting ratios and driving-term totals for even gaps.
    Hl {
        /// Even gaps to report on.
        #[arg(value_name = "GAP", required = true)]
        gaps: Vec<u64>,
        /// Also show the partial ratio sum at this prime stage.
        #[arg(long, value_name = "P")]
        stage: Option<u64>,
    },

    /// Run the built-in verification suites.
    Verify {
        #[arg(long, value_enum, default_value_t = Level::Quick)]
        level: Level,
        /// Validate one snapshot file instead of running a suite.
        #[arg(long, value_name = "SNAPSHOT")]
        snapshot: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Level {
    Quick,
    Full,
}

enum AppError {
    /// Bad arguments beyond what clap can see. Exit 2.
    Usage(String),
    /// An error from the library. Exit 3 for resource guards, else 1.
    Core(CoreError),
    /// A verification suite reported failures. Exit 1.
    Failed(String),
}

impl AppError {
    fn exit_code(&self) -> u8 {
        match self {
            AppError::Usage(_) => 2,
            AppError::Core(CoreError::ResourceGuard { .. }) => 3,
            AppError::Core(_) | AppError::Failed(_) => 1,
        }
    }
}

impl std::fmt::Display for AppError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AppError::Usage(m) | AppError::Failed(m) => f.write_str(m),
            AppError::Core(e) => {
                write!(f, "{e}")?;
                let mut source = std::error::Error::source(e);
                while let Some(s) = source {
                    write!(f, ": {s}")?;
                    source = s.source();
                }
                Ok(())
            }
        }
    }
}

impl From<CoreError> for AppError {
    fn from(e: CoreError) -> Self {
        AppError::Core(e)
    }
}

impl From<std::io::Error> for AppError {
    fn from(e: std::io::Error) -> Self {
        AppError::Core(CoreError::Io(e))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            if let AppError::Core(CoreError::ResourceGuard { .. }) = err {
                eprintln!(
                    "hint: raise --max-resident-gaps / --max-stream-gaps (or the \
                     PGC_MAX_RESIDENT_GAPS / PGC_MAX_STREAM_GAPS environment variables), \
                     or census the next stage with `census --stream-from` instead of \
                     materializing it"
                );
            }
            ExitCode::from(err.exit_code())
        }
    }
}

fn run(cli: Cli) -> Result<(), AppError> {
    let cfg = &cli.config;
    match cli.command {
        Command::Build { up_to, extend, by, out } => cmd_build(cfg, up_to, extend, by, &out),
        Command::Census {
            input,
            stream_from,
            by,
            gmax,
            jmax,
            format,
            out,
        } => cmd_census(cfg, input, stream_from, by, gmax, jmax, format, out.as_deref()),
        Command::Dynamics {
            table,
            to,
            format,
            out,
            counts_out,
            ratios_out,
        } => cmd_dynamics(
            cfg,
            &table,
            to,
            format,
            out.as_deref(),
            counts_out.as_deref(),
            ratios_out.as_deref(),
        ),
        Command::Maxgap { up_to } => cmd_maxgap(cfg, up_to),
        Command::Hl { gaps, stage } => cmd_hl(cfg, &gaps, stage),
        Command::Verify { level, snapshot } => cmd_verify(level, snapshot.as_deref()),
    }
}

/// Attach the offending path to bare I/O errors.
fn with_path(e: CoreError, path: &Path) -> AppError {
    match e {
        CoreError::Io(io) => AppError::Failed(format!("{}: {io}", path.display())),
        other => AppError::Core(other),
    }
}

/// Peek a snapshot header, cross-checking the declared cycle against the
/// file's actual length so that a corrupt header reads as corruption
/// instead of tripping a resource guard.
fn read_checked_header(path: &Path) -> Result<SnapshotHeader, AppError> {
    let header = read_header(path).map_err(|e| with_path(e, path))?;
    let actual = std::fs::metadata(path)?.len();
    if u128::from(actual) != header.expected_file_len() {
        return Err(AppError::Core(CoreError::Malformed(format!(
            "{}: file is {actual} bytes but the header calls for {}",
            path.display(),
            header.expected_file_len()
        ))));
    }
    Ok(header)
}

fn require_prime(p: u64, flag: &str) -> Result<(), AppError> {
    if is_prime(p) {
        Ok(())
    } else {
        Err(AppError::Usage(format!("{flag} {p}: not a prime")))
    }
}

fn open_out(path: Option<&Path>) -> Result<Box<dyn Write>, AppError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(std::io::stdout().lock()),
    })
}

/// Refuse to materialize `needed` gaps when it exceeds the resident guard.
fn guard_resident(needed: u128, limit: u64) -> Result<(), AppError> {
    if needed > u128::from(limit) {
        return Err(AppError::Core(CoreError::ResourceGuard {
            what: "cycle materialization",
            needed: u64::try_from(needed).unwrap_or(u64::MAX),
            limit,
        }));
    }
    Ok(())
}

fn cmd_build(
    cfg: &RunConfig,
    up_to: Option<u64>,
    extend: Option<PathBuf>,
    by: Option<u64>,
    out: &Path,
) -> Result<(), AppError> {
    let started = Instant::now();
    let mut peak_bytes: u64 = 0;
    let cycle = match (up_to, extend) {
        (Some(p), None) => {
            require_prime(p, "--up-to")?;
            let mut cycle = Cycle::base(2)?;
            for q in primes_up_to(p)?.into_iter().skip(1) {
                let next = u128::from(cycle.len()) * u128::from(q - 1);
                guard_resident(next, cfg.max_resident_gaps)?;
                let before = cycle.resident_bytes();
                let bigger = cycle.extend(q)?;
                peak_bytes = peak_bytes.max(before + bigger.resident_bytes());
                cycle = bigger;
            }
            cycle
        }
        (None, Some(path)) => {
            let q = by.expect("clap enforces --by with --extend");
            require_prime(q, "--by")?;
            let header = read_checked_header(&path)?;
            let n = header.modulus()?;
            // φ(qN) is (q-1)·φ(N) for new primes, q·φ(N) for dividing ones
            let growth = if n.contains_prime(q) { q } else { q - 1 };
            guard_resident(u128::from(header.phi), cfg.max_resident_gaps)?;
            guard_resident(
                u128::from(header.phi) * u128::from(growth),
                cfg.max_resident_gaps,
            )?;
            let base = read_snapshot(&path).map_err(|e| with_path(e, &path))?;
            let bigger = base.extend(q)?;
            peak_bytes = base.resident_bytes() + bigger.resident_bytes();
            bigger
        }
        _ => unreachable!("clap enforces exactly one source"),
    };
    write_snapshot(out, &cycle)?;
    print_stage_report(&cycle, out, peak_bytes, started.elapsed());
    Ok(())
}

fn print_stage_report(
    cycle: &Cycle,
    snapshot: &Path,
    peak_bytes: u64,
    elapsed: std::time::Duration,
) {
    let modulus = cycle.modulus();
    match modulus.value_u64() {
        Some(n) => println!("modulus: {} ({n})", modulus.display_factors()),
        None => println!("modulus: {}", modulus.display_factors()),
    }
    if let Some(p) = modulus.as_primorial() {
        println!("stage prime: {p}");
    }
    println!("phi: {}", cycle.len());
    println!("max gap: {}", cycle.max_gap());
    println!(
        "single-gap counts: 2 x{}, 4 x{}, 6 x{}",
        cycle.count_of(2),
        cycle.count_of(4),
        cycle.count_of(6)
    );
    println!(
        "resident: {} bytes ({} per gap), peak ~{} bytes",
        cycle.resident_bytes(),
        cycle.width(),
        peak_bytes.max(cycle.resident_bytes())
    );
    let size = std::fs::metadata(snapshot).map(|m| m.len()).unwrap_or(0);
    println!("snapshot: {} ({size} bytes)", snapshot.display());
    println!("elapsed: {elapsed:.2?}");
}

#[allow(clippy::too_many_arguments)]
fn cmd_census(
    cfg: &RunConfig,
    input: Option<PathBuf>,
    stream_from: Option<PathBuf>,
    by: Option<u64>,
    gmax: u64,
    jmax: usize,
    format: Format,
    out: Option<&Path>,
) -> Result<(), AppError> {
    if gmax == 0 || gmax % 2 != 0 {
        return Err(AppError::Usage(format!(
            "--gmax {gmax}: must be a positive even sum"
        )));
    }
    if jmax == 0 {
        return Err(AppError::Usage("--jmax 0: need at least length 1".into()));
    }
    let table = match (input, stream_from) {
        (Some(path), None) => {
            let header = read_checked_header(&path)?;
            guard_resident(u128::from(header.phi), cfg.max_resident_gaps)?;
            let cycle = read_snapshot(&path).map_err(|e| with_path(e, &path))?;
            census(&cycle, gmax, jmax)
        }
        (None, Some(path)) => {
            let q = by.expect("clap enforces --by with --stream-from");
            require_prime(q, "--by")?;
            let header = read_checked_header(&path)?;
            let n = header.modulus()?;
            let growth = if n.contains_prime(q) { q } else { q - 1 };
            let emitted = u128::from(header.phi) * u128::from(growth);
            if emitted > u128::from(cfg.max_stream_gaps) {
                return Err(AppError::Core(CoreError::ResourceGuard {
                    what: "streaming pass",
                    needed: u64::try_from(emitted).unwrap_or(u64::MAX),
                    limit: cfg.max_stream_gaps,
                }));
            }
            guard_resident(u128::from(header.phi), cfg.max_resident_gaps)?;
            let cycle = read_snapshot(&path).map_err(|e| with_path(e, &path))?;
            let mut sink = CensusSink::new(n.times_prime(q)?, gmax, jmax)?;
            cycle.extend_streaming(q, &mut sink)?;
            sink.finish()?
        }
        _ => unreachable!("clap enforces exactly one source"),
    };
    let mut w = open_out(out)?;
    match format {
        Format::Csv => table.to_csv(&mut w)?,
        Format::Json => writeln!(w, "{}", table.to_json_string())?,
    }
    w.flush()?;
    Ok(())
}

fn cmd_dynamics(
    cfg: &RunConfig,
    table_path: &Path,
    to: u64,
    format: Format,
    out: Option<&Path>,
    counts_out: Option<&Path>,
    ratios_out: Option<&Path>,
) -> Result<(), AppError> {
    require_prime(to, "--to")?;
    let text = std::fs::read_to_string(table_path)
        .map_err(|e| AppError::Failed(format!("{}: {e}", table_path.display())))?;
    let start = DrivingTermTable::from_json_str(&text)?;
    let stage = start
        .modulus()
        .as_primorial()
        .ok_or_else(|| AppError::Usage(format!(
            "table modulus {} is not a primorial stage",
            start.modulus().display_factors()
        )))?;
    if to < stage {
        return Err(AppError::Usage(format!(
            "--to {to} precedes the table's stage {stage}"
        )));
    }
    // keep every stage so the trajectory files cover the whole path
    let mut tables = vec![start];
    let mut p = stage;
    while p < to {
        let next = next_prime_after(p);
        let (advanced, report) = advance_counts(tables.last().expect("nonempty"), next)?;
        if !report.dropped.is_empty() {
            let rows: Vec<String> = report.dropped.iter().map(|g| g.to_string()).collect();
            eprintln!(
                "warning: stage {next} drops rows {} (the recurrence covers g < {})",
                rows.join(", "),
                2 * next
            );
        }
        tables.push(advanced);
        p = next;
    }
    let finish = tables.last().expect("nonempty");
    let ratios = RatioTable::from_table(finish)?;
    let mut w = open_out(out)?;
    match format {
        Format::Csv => {
            writeln!(
                w,
                "gap,total,ratio_sum_exact,ratio_sum_decimal,limit_exact,limit_decimal,settled"
            )?;
            for (g, _) in finish.rows() {
                let row = summary_row(finish, &ratios, g, cfg.digits)?;
                writeln!(
                    w,
                    "{g},{},{},{},{},{},{}",
                    row.total,
                    row.sum,
                    row.sum_decimal,
                    row.limit,
                    row.limit_decimal,
                    if row.settled { "yes" } else { "no" }
                )?;
            }
        }
        Format::Json => {
            let mut rows = Vec::new();
            for (g, counts) in finish.rows() {
                let row = summary_row(finish, &ratios, g, cfg.digits)?;
                let counts: serde_json::Map<String, serde_json::Value> = counts
                    .iter()
                    .map(|(j, n)| (j.to_string(), n.to_string().into()))
                    .collect();
                rows.push(serde_json::json!({
                    "gap": g,
                    "counts": counts,
                    "total": row.total,
                    "ratio_sum_exact": row.sum.to_string(),
                    "ratio_sum_decimal": row.sum_decimal,
                    "limit_exact": row.limit.to_string(),
                    "limit_decimal": row.limit_decimal,
                    "settled": row.settled,
                }));
            }
            let doc = serde_json::json!({
                "stage": p,
                "g_max": finish.g_max(),
                "j_max": finish.j_max(),
                "rows": rows,
            });
            writeln!(w, "{}", serde_json::to_string_pretty(&doc).expect("valid json"))?;
        }
    }
    w.flush()?;
    if let Some(path) = counts_out {
        let mut w = BufWriter::new(File::create(path)?);
        pgc_core::dynamics::count_trajectory_csv(&tables, &mut w)?;
        w.flush()?;
    }
    if let Some(path) = ratios_out {
        let mut w = BufWriter::new(File::create(path)?);
        pgc_core::dynamics::ratio_trajectory_csv(&tables, cfg.digits, &mut w)?;
        w.flush()?;
    }
    Ok(())
}

/// One summary line of the dynamics report: the gap's total, its exact
/// ratio sum, the limiting ratio, and whether the two already agree.
struct SummaryRow {
    total: String,
    sum: ExactRational,
    sum_decimal: String,
    limit: ExactRational,
    limit_decimal: String,
    settled: bool,
}

fn summary_row(
    table: &DrivingTermTable,
    ratios: &RatioTable,
    g: u64,
    digits: usize,
) -> Result<SummaryRow, AppError> {
    let sum = ratios.row_sum(g);
    let limit = hl_ratio(g)?;
    Ok(SummaryRow {
        total: table.row_total(g).to_string(),
        sum_decimal: decimal_string(&sum, digits),
        limit_decimal: decimal_string(&limit, digits),
        settled: sum == limit,
        sum,
        limit,
    })
}

fn cmd_maxgap(cfg: &RunConfig, up_to: u64) -> Result<(), AppError> {
    require_prime(up_to, "--up-to")?;
    let rows = max_gap_by_stage(up_to, cfg.max_resident_gaps)?;
    println!("stage,phi,max_gap");
    let mut phi: u128 = 1;
    for (p, max) in rows {
        phi *= u128::from(p - 1);
        println!("{p},{phi},{max}");
    }
    Ok(())
}

fn cmd_hl(cfg: &RunConfig, gaps: &[u64], stage: Option<u64>) -> Result<(), AppError> {
    if let Some(p) = stage {
        require_prime(p, "--stage")?;
    }
    let mut header = String::from("gap,hl_exact,hl_decimal,qbar,total_driving_terms");
    if stage.is_some() {
        header.push_str(",stage_sum_exact,stage_sum_decimal");
    }
    println!("{header}");
    for &g in gaps {
        let hl = hl_ratio(g).map_err(|e| AppError::Usage(e.to_string()))?;
        let (q_bar, total) = total_driving_terms(g).map_err(|e| AppError::Usage(e.to_string()))?;
        let mut line = format!(
            "{g},{hl},{},{q_bar},{total}",
            decimal_string(&hl, cfg.digits)
        );
        if let Some(p) = stage {
            let sum = stage_ratio_sum(g, p)?;
            line.push_str(&format!(",{sum},{}", decimal_string(&sum, cfg.digits)));
        }
        println!("{line}");
    }
    Ok(())
}

fn cmd_verify(level: Level, snapshot: Option<&Path>) -> Result<(), AppError> {
    if let Some(path) = snapshot {
        let cycle = read_snapshot(path).map_err(|e| with_path(e, path))?;
        let report = cycle.validate();
        for check in &report.checks {
            println!(
                "{} {}",
                if check.passed { "ok  " } else { "FAIL" },
                check.name
            );
        }
        return if report.is_valid() {
            println!(
                "snapshot {} holds a valid cycle of {} gaps",
                path.display(),
                cycle.len()
            );
            Ok(())
        } else {
            Err(AppError::Failed(format!(
                "snapshot {} holds an invalid cycle",
                path.display()
            )))
        };
    }
    if verify::run_suite(level == Level::Full) {
        Ok(())
    } else {
        Err(AppError::Failed("verification suite failed".into()))
    }
}
