//! Command-line front end.
//!
//! Exit codes: 0 success, 1 verification or runtime failure, 2 usage error.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::Error;
use crate::format::{
    write_csv, write_json, LevelRecord, LiftRecord, PairRecord, RowPairRecord,
};
use crate::matrix::{MatrixSpec, MAX_ENUMERATION_K};
use crate::numtheory::{MatrixPrimes, MAX_BASIS_LEN};
use crate::sieve::{primes_up_to, twin_primes};
use crate::stats::{gap_recursion_check, scan_level, twin_census_via_rows};
use crate::verify::{run_checks, MAX_VERIFY_K, MIN_VERIFY_K};

pub const EXIT_FAILURE: u8 = 1;
pub const EXIT_USAGE: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "prime-matrix", version, about = "Primorial prime matrices and twin-row statistics")]
pub struct Cli {
    /// Worker threads for scans (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    pub jobs: usize,
    /// Write output here instead of standard output (replaced atomically).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Timing and progress on standard error.
    #[arg(short, long, global = true)]
    pub verbose: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Csv,
    Json,
    Pgm,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// First primes, each read off as the first uncolored cell of the next matrix.
    Primes {
        #[arg(long)]
        count: u64,
        /// Use the classical sieve instead.
        #[arg(long)]
        oracle: bool,
    },
    /// Twin-row pairs of A_k with row indices and residues.
    Rows {
        #[arg(long)]
        k: usize,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Per-pair prime scan of A_k over a column window.
    Twins {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        columns: u64,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Lifts of every twin-row pair of A_{k-1} into A_k.
    Lift {
        #[arg(long)]
        k: usize,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Counting, lifting, and recount laws for every level up to k.
    Verify {
        #[arg(long)]
        k: usize,
    },
    /// Mean column gap per level 2..=k with all levels scanning values up to the bound.
    Stats {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        bound: u64,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Twin primes up to a bound.
    Census(CensusArgs),
    /// Plain PGM picture of a matrix fragment: white primes, black composites.
    Render {
        #[arg(long)]
        k: usize,
        /// Row range, e.g. `1..6` (inclusive).
        #[arg(long, value_parser = parse_rows)]
        rows: (u64, u64),
        #[arg(long)]
        columns: u64,
        #[arg(long, value_enum, default_value = "pgm")]
        format: Format,
    },
}

#[derive(Debug, Args)]
pub struct CensusArgs {
    #[arg(long)]
    bound: u64,
    /// Matrix level whose twin-row pairs are walked.
    #[arg(long, default_value_t = 4)]
    k: usize,
    /// Count with the classical sieve instead of the twin-row walk.
    #[arg(long)]
    oracle: bool,
    /// Also list every pair.
    #[arg(long)]
    list: bool,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

fn parse_rows(s: &str) -> Result<(u64, u64), String> {
    let (a, b) = s
        .split_once("..")
        .ok_or_else(|| format!("expected FIRST..LAST, got {s:?}"))?;
    let b = b.strip_prefix('=').unwrap_or(b);
    let a: u64 = a.trim().parse().map_err(|e| format!("{a:?}: {e}"))?;
    let b: u64 = b.trim().parse().map_err(|e| format!("{b:?}: {e}"))?;
    Ok((a, b))
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Failure(String),
    /// A law failed to hold; the report is still written.
    Verification(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Range(_) | Error::Domain(_) => CliError::Usage(e.to_string()),
            Error::UndefinedStatistic(_) => CliError::Failure(e.to_string()),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Failure(format!("i/o: {e}"))
    }
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Failure(_) | CliError::Verification(_) => EXIT_FAILURE,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Failure(m) | CliError::Verification(m) => m,
        }
    }
}

type CliResult<T = ()> = Result<T, CliError>;

/// Output sink: standard output, or a sibling temp file renamed over `--out`
/// once the command succeeds.
struct Sink {
    writer: Box<dyn Write + Send>,
    target: Option<(PathBuf, PathBuf)>,
}

impl Sink {
    fn open(out: Option<&Path>) -> CliResult<Self> {
        match out {
            None => Ok(Sink { writer: Box::new(BufWriter::new(io::stdout())), target: None }),
            Some(path) => {
                let mut name = path.file_name().unwrap_or_default().to_os_string();
                name.push(format!(".{}.partial", std::process::id()));
                let tmp = path.with_file_name(name);
                let file = File::create(&tmp)?;
                Ok(Sink {
                    writer: Box::new(BufWriter::new(file)),
                    target: Some((tmp, path.to_path_buf())),
                })
            }
        }
    }

    fn commit(mut self) -> CliResult {
        self.writer.flush()?;
        drop(self.writer);
        if let Some((tmp, path)) = self.target.take() {
            fs::rename(&tmp, &path)?;
        }
        Ok(())
    }

    fn abandon(self) {
        drop(self.writer);
        if let Some((tmp, _)) = self.target {
            let _ = fs::remove_file(tmp);
        }
    }
}

impl Write for Sink {
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        self.writer.write(buf)
    }

    fn flush(&mut self) -> io::Result<()> {
        self.writer.flush()
    }
}

/// Parses `args` and runs the command; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { 0 };
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}", e.message());
            e.exit_code()
        }
    }
}

pub fn run(cli: &Cli) -> CliResult {
    check_args(&cli.command)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.jobs)
        .build()
        .map_err(|e| CliError::Failure(e.to_string()))?;
    let mut sink = Sink::open(cli.out.as_deref())?;
    let started = Instant::now();
    let result = pool.install(|| dispatch(&cli.command, &mut sink));
    if cli.verbose {
        eprintln!("elapsed: {:.3}s", started.elapsed().as_secs_f64());
    }
    match result {
        Ok(()) => sink.commit(),
        Err(e @ CliError::Verification(_)) => {
            sink.commit()?;
            Err(e)
        }
        Err(e) => {
            sink.abandon();
            Err(e)
        }
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn require_format(format: Format, allowed: &[Format]) -> CliResult {
    if allowed.contains(&format) {
        Ok(())
    } else {
        let name = |f: &Format| f.to_possible_value().map(|v| v.get_name().to_owned()).unwrap_or_default();
        let allowed: Vec<String> = allowed.iter().map(name).collect();
        Err(usage(format!("format '{}' is not available here; use one of {}", name(&format), allowed.join(", "))))
    }
}

fn require_enumeration_k(k: usize) -> CliResult {
    if (2..=MAX_ENUMERATION_K).contains(&k) {
        Ok(())
    } else {
        Err(usage(format!("--k must be in 2..={MAX_ENUMERATION_K}, got {k}")))
    }
}

/// Validates arguments before any output is produced.
fn check_args(command: &Command) -> CliResult {
    const TABLES: &[Format] = &[Format::Text, Format::Csv, Format::Json];
    const RECORDS: &[Format] = &[Format::Csv, Format::Json];
    match *command {
        Command::Primes { count: 0, .. } => Err(usage("--count must be at least 1")),
        Command::Primes { .. } => Ok(()),
        Command::Rows { k, format } => {
            require_enumeration_k(k)?;
            require_format(format, TABLES)
        }
        Command::Twins { k, columns, format } => {
            require_enumeration_k(k)?;
            if columns == 0 {
                return Err(usage("--columns must be at least 1"));
            }
            require_format(format, RECORDS)
        }
        Command::Lift { k, format } => {
            if !(3..=MAX_ENUMERATION_K).contains(&k) {
                return Err(usage(format!("--k must be in 3..={MAX_ENUMERATION_K}, got {k}")));
            }
            require_format(format, TABLES)
        }
        Command::Verify { k } => {
            if !(MIN_VERIFY_K..=MAX_VERIFY_K).contains(&k) {
                return Err(usage(format!("--k must be in {MIN_VERIFY_K}..={MAX_VERIFY_K}, got {k}")));
            }
            Ok(())
        }
        Command::Stats { k, bound, format } => {
            require_enumeration_k(k)?;
            if bound == 0 {
                return Err(usage("--bound must be positive"));
            }
            require_format(format, RECORDS)
        }
        Command::Census(ref args) => {
            if args.bound < 5 {
                return Err(usage("--bound must be at least 5"));
            }
            if !args.oracle {
                require_enumeration_k(args.k)?;
            }
            require_format(args.format, TABLES)
        }
        Command::Render { k, rows: (first, last), columns, format } => {
            if !(1..=MAX_BASIS_LEN).contains(&k) {
                return Err(usage(format!("--k must be in 1..={MAX_BASIS_LEN}, got {k}")));
            }
            if columns == 0 {
                return Err(usage("--columns must be at least 1"));
            }
            if first == 0 || first > last {
                return Err(usage(format!("bad row range {first}..{last}")));
            }
            require_format(format, &[Format::Pgm])
        }
    }
}

fn dispatch(command: &Command, out: &mut Sink) -> CliResult {
    match *command {
        Command::Primes { count, oracle } => cmd_primes(count, oracle, out),
        Command::Rows { k, format } => cmd_rows(k, format, out),
        Command::Twins { k, columns, format } => cmd_twins(k, columns, format, out),
        Command::Lift { k, format } => cmd_lift(k, format, out),
        Command::Verify { k } => cmd_verify(k, out),
        Command::Stats { k, bound, format } => cmd_stats(k, bound, format, out),
        Command::Census(ref args) => cmd_census(args, out),
        Command::Render { k, rows, columns, .. } => cmd_render(k, rows, columns, out),
    }
}

/// Upper bound on the `n`-th prime (Rosser), for sizing the oracle sieve.
fn nth_prime_bound(n: u64) -> u64 {
    if n < 6 {
        return 13;
    }
    let x = n as f64;
    (x * (x.ln() + x.ln().ln())).ceil() as u64
}

fn cmd_primes(count: u64, oracle: bool, out: &mut Sink) -> CliResult {
    let primes: Box<dyn Iterator<Item = u64>> = if oracle {
        Box::new(primes_up_to(nth_prime_bound(count)).into_iter())
    } else {
        Box::new(MatrixPrimes::new())
    };
    for p in primes.take(count as usize) {
        writeln!(out, "{p}")?;
    }
    Ok(())
}

/// Writes records one at a time so large listings never sit in memory.
struct RecordStream<'a> {
    format: Format,
    out: &'a mut Sink,
    written: u64,
}

impl<'a> RecordStream<'a> {
    fn new(format: Format, out: &'a mut Sink) -> Self {
        RecordStream { format, out, written: 0 }
    }

    fn push<T: serde::Serialize>(&mut self, record: &T, text: impl FnOnce() -> String) -> CliResult {
        match self.format {
            Format::Csv => {
                let mut w = csv::WriterBuilder::new()
                    .has_headers(self.written == 0)
                    .from_writer(&mut *self.out);
                w.serialize(record).map_err(|e| CliError::Failure(e.to_string()))?;
                w.flush()?;
            }
            Format::Json => {
                let sep = if self.written == 0 { "[\n  " } else { ",\n  " };
                self.out.write_all(sep.as_bytes())?;
                serde_json::to_writer(&mut *self.out, record).map_err(io::Error::other)?;
            }
            Format::Text | Format::Pgm => writeln!(self.out, "{}", text())?,
        }
        self.written += 1;
        Ok(())
    }

    fn finish(self) -> CliResult<u64> {
        if self.format == Format::Json {
            let tail: &[u8] = if self.written == 0 { b"[]\n" } else { b"\n]\n" };
            self.out.write_all(tail)?;
        }
        Ok(self.written)
    }
}

fn cmd_rows(k: usize, format: Format, out: &mut Sink) -> CliResult {
    let spec = MatrixSpec::for_level(k)?;
    let formula = spec.twin_pair_count()?;
    let mut stream = RecordStream::new(format, out);
    for pair in spec.twin_pairs()? {
        stream.push(&RowPairRecord::new(k, &pair), || {
            format!(
                "rows {} {}  residues {} {}",
                pair.lower_row, pair.upper_row, pair.lower_residue, pair.upper_residue
            )
        })?;
    }
    let count = stream.finish()?;
    let summary = format!("k={k} twin-row pairs: {count} (formula {formula})");
    if format == Format::Text {
        writeln!(out, "{summary}")?;
    } else {
        eprintln!("{summary}");
    }
    if count != formula {
        return Err(CliError::Verification(summary));
    }
    Ok(())
}

fn cmd_twins(k: usize, columns: u64, format: Format, out: &mut Sink) -> CliResult {
    let spec = MatrixSpec::for_level(k)?;
    let records: Vec<PairRecord> = scan_level(&spec, columns)?.iter().map(PairRecord::from).collect();
    write_records(format, out, &records)
}

fn write_records<T: serde::Serialize>(format: Format, out: &mut Sink, records: &[T]) -> CliResult {
    match format {
        Format::Json => write_json(out, records)?,
        _ => write_csv(out, records)?,
    }
    Ok(())
}

fn cmd_lift(k: usize, format: Format, out: &mut Sink) -> CliResult {
    let spec = MatrixSpec::for_level(k)?;
    let parent = MatrixSpec::new(spec.basis().parent().expect("k >= 3"));
    let mut stream = RecordStream::new(format, out);
    for pair in parent.twin_pairs()? {
        let killed = spec.killed_offsets(&pair)?;
        if format == Format::Text {
            let (low, high) = killed.one_based();
            writeln!(
                stream.out,
                "parent ({}, {}) mod {}: killed offsets low {} high {} (counted from 1: {low}, {high})",
                pair.lower_residue,
                pair.upper_residue,
                parent.rows(),
                killed.low,
                killed.high
            )?;
        }
        let kids = spec.lift_pair(&pair)?;
        for child in &kids {
            let record = LiftRecord::new(k, &pair, child);
            stream.push(&record, || {
                format!(
                    "parent ({}, {})  offset {}  child ({}, {})  {}",
                    record.parent_lo, record.parent_hi, record.offset, record.child_lo, record.child_hi, record.fate
                )
            })?;
        }
    }
    stream.finish()?;
    Ok(())
}

fn cmd_verify(k_max: usize, out: &mut Sink) -> CliResult {
    let outcomes = run_checks(k_max)?;
    let mut failed = 0;
    for o in &outcomes {
        let verdict = if o.passed { "PASS" } else { "FAIL" };
        writeln!(out, "{verdict} k={} {}: {}", o.k, o.name, o.detail)?;
        failed += usize::from(!o.passed);
    }
    writeln!(out, "{} checks, {failed} failed", outcomes.len())?;
    if failed > 0 {
        return Err(CliError::Verification(format!("{failed} verification checks failed")));
    }
    Ok(())
}

fn cmd_stats(k: usize, bound: u64, format: Format, out: &mut Sink) -> CliResult {
    let report = gap_recursion_check(bound, 2..=k)?;
    let records: Vec<LevelRecord> = report.levels.iter().map(LevelRecord::from).collect();
    write_records(format, out, &records)
}

#[derive(serde::Serialize)]
struct TwinRecord {
    p: u64,
    p_plus_2: u64,
}

fn cmd_census(args: &CensusArgs, out: &mut Sink) -> CliResult {
    let (method, twins): (String, Box<dyn Iterator<Item = (u64, u64)>>) = if args.oracle {
        ("sieve".into(), Box::new(twin_primes(args.bound)))
    } else {
        let found = twin_census_via_rows(args.bound, args.k)?;
        (format!("twin rows of A_{}", args.k), Box::new(found.into_iter()))
    };
    if args.list {
        let mut stream = RecordStream::new(args.format, out);
        let mut n = 0u64;
        for (p, q) in twins {
            stream.push(&TwinRecord { p, p_plus_2: q }, || format!("{p} {q}"))?;
            n += 1;
        }
        stream.finish()?;
        eprintln!("twin primes up to {}: {n} ({method})", args.bound);
        return Ok(());
    }
    let count = twins.count() as u64;
    #[derive(serde::Serialize)]
    struct CensusRecord<'a> {
        bound: u64,
        count: u64,
        method: &'a str,
    }
    match args.format {
        Format::Text => writeln!(out, "twin primes up to {}: {count} ({method})", args.bound)?,
        f => write_records(f, out, &[CensusRecord { bound: args.bound, count, method: &method }])?,
    }
    Ok(())
}

fn cmd_render(k: usize, (first, last): (u64, u64), columns: u64, out: &mut Sink) -> CliResult {
    let spec = MatrixSpec::for_level(k)?;
    let image = spec.render_fragment(first..=last, columns)?;
    out.write_all(image.to_pgm().as_bytes())?;
    Ok(())
}
