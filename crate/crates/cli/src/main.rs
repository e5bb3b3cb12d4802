//! `pancake`: generate, verify, trace, search and solve burnt pancake sequences.
//!
//! Exit codes: 0 success, 1 failed verification / golden mismatch / no
//! successes with `--expect-some`, 2 unusable input or a size outside what
//! the requested operation supports.

mod document;

use std::fs::{self, File};
use std::io::{self, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use pancake_core::corpus::{self, CorpusEntry, CorpusId};
use pancake_core::exact::{t_bounds, ExactError, Limits, Method, Oracle, SolveResult};
use pancake_core::search::{
    exhaustive_search, extension_search, randomized_search, ExtensionSpec, SearchConfig, SearchOutcome, SearchRecord,
};
use pancake_core::sequences::Part;
use pancake_core::verify::{trace_from, verify_from};
use pancake_core::{generate, SignedStack};

use document::SequenceDocument;

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser)]
#[command(name = "pancake", version, about = "Burnt pancake sorting of -I_n")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the generated sorting sequence for n ≡ 1 (mod 4), n ≥ 29.
    Generate {
        n: usize,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check that a sequence sorts -I_n (and respects its phase tags).
    Verify {
        /// Sequence document, JSON or text.
        file: Option<PathBuf>,
        /// Read bare flip lengths from stdin for this n.
        #[arg(long, requires = "stdin", conflicts_with_all = ["file", "corpus"])]
        n: Option<usize>,
        #[arg(long)]
        stdin: bool,
        #[arg(long, conflicts_with = "file")]
        corpus: Option<CorpusId>,
        #[arg(long)]
        corpus_dir: Option<PathBuf>,
        /// Print the report as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Print every intermediate stack, or compare against a golden trace.
    Trace {
        n: usize,
        /// Sequence document; defaults to the generated sequence.
        file: Option<PathBuf>,
        /// Comma-separated flips instead of a file.
        #[arg(long, value_delimiter = ',', conflicts_with = "file")]
        flips: Option<Vec<usize>>,
        #[arg(long)]
        golden: Option<CorpusId>,
        #[arg(long)]
        corpus_dir: Option<PathBuf>,
    },
    /// Search waste prefixes that complete with improves only.
    Search {
        n: usize,
        #[arg(long, value_enum, default_value_t = Mode::Exhaustive)]
        mode: Mode,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1_000_000)]
        samples: u64,
        #[arg(long, env = "PANCAKE_WORKERS")]
        workers: Option<usize>,
        #[arg(long)]
        stop_after: Option<usize>,
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// JSON-lines results file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Exit 1 when nothing is found.
        #[arg(long)]
        expect_some: bool,
    },
    /// Exact T(n) for small n.
    Solve {
        n: usize,
        #[arg(long, value_enum, default_value_t = MethodArg::Bfs)]
        method: MethodArg,
        /// e.g. "bfs=8,reverse=7,ida=12"
        #[arg(long, env = "PANCAKE_SOLVER_LIMITS")]
        limits: Option<String>,
        /// Give up IDA* after this many seconds.
        #[arg(long)]
        budget_secs: Option<u64>,
        #[arg(long)]
        cache: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// What is known about T(n) without search.
    Bounds { n: usize },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Exhaustive,
    Randomized,
    /// Grow the generated waste phase of n - 12 into candidates for n.
    Extension,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Bfs,
    Bidir,
    Ida,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Bfs => Method::Bfs,
            MethodArg::Bidir => Method::Bidirectional,
            MethodArg::Ida => Method::IdaStar,
        }
    }
}

/// An error carrying its exit code.
#[derive(Debug)]
struct Exit(u8, String);

impl std::fmt::Display for Exit {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.1)
    }
}

impl std::error::Error for Exit {}

fn fail<T>(code: u8, msg: impl Into<String>) -> Result<T> {
    Err(Exit(code, msg.into()).into())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate { n, format, out } => cmd_generate(n, format, out.as_deref()),
        Command::Verify { file, n, stdin, corpus, corpus_dir, json } => {
            cmd_verify(file.as_deref(), n.filter(|_| stdin), corpus, corpus_dir.as_deref(), json)
        }
        Command::Trace { n, file, flips, golden, corpus_dir } => {
            cmd_trace(n, file.as_deref(), flips, golden, corpus_dir.as_deref())
        }
        Command::Search { n, mode, seed, samples, workers, stop_after, checkpoint, out, expect_some } => {
            let workers = workers.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |p| p.get()));
            cmd_search(n, mode, seed, samples, workers, stop_after, checkpoint, out.as_deref(), expect_some)
        }
        Command::Solve { n, method, limits, budget_secs, cache, json } => {
            cmd_solve(n, method.into(), limits.as_deref(), budget_secs.map(Duration::from_secs), cache.as_deref(), json)
        }
        Command::Bounds { n } => {
            println!("{}", t_bounds(n));
            Ok(0)
        }
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            let code = e.downcast_ref::<Exit>().map_or(2, |x| x.0);
            eprintln!("error: {e:#}");
            ExitCode::from(code)
        }
    }
}

fn write_output(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => io::stdout().write_all(text.as_bytes()).context("writing stdout"),
    }
}

fn cmd_generate(n: usize, format: Format, out: Option<&Path>) -> Result<u8> {
    let seq = match generate(n) {
        Ok(s) => s,
        Err(e) => return fail(2, e.to_string()),
    };
    let doc = SequenceDocument::from_generated(&seq, format!("pancake {VERSION} generate {n}"));
    let text = match format {
        Format::Json => serde_json::to_string_pretty(&doc)? + "\n",
        Format::Text => doc.to_text(),
    };
    write_output(out, &text)?;
    Ok(0)
}

fn read_document(path: &Path) -> Result<SequenceDocument> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    SequenceDocument::parse(&text).with_context(|| format!("parsing {}", path.display()))
}

fn load_corpus(id: CorpusId, dir: Option<&Path>) -> Result<CorpusEntry> {
    Ok(match dir {
        Some(d) => corpus::load_from_dir(d, id)?,
        None => corpus::load(id)?,
    })
}

fn cmd_verify(
    file: Option<&Path>,
    stdin_n: Option<usize>,
    corpus_id: Option<CorpusId>,
    corpus_dir: Option<&Path>,
    json: bool,
) -> Result<u8> {
    let doc = if let Some(n) = stdin_n {
        let mut input = String::new();
        io::stdin().read_to_string(&mut input).context("reading stdin")?;
        SequenceDocument::parse(&format!("n {n}\nflips: {}", input.split_whitespace().collect::<Vec<_>>().join(" ")))?
    } else if let Some(id) = corpus_id {
        let entry = load_corpus(id, corpus_dir)?;
        SequenceDocument {
            n: entry.n,
            family: None,
            flips: entry.flips().to_vec(),
            phases: entry.trace.phases.clone(),
            provenance: format!("corpus {id}"),
        }
    } else if let Some(path) = file {
        read_document(path)?
    } else {
        bail!("nothing to verify: pass a file, --corpus, or --n with --stdin");
    };

    let start = SignedStack::neg_identity(doc.n)?;
    let report = verify_from(start, &doc.flips, doc.phases.as_deref())?;
    if json {
        println!("{}", serde_json::to_string_pretty(&report)?);
    } else {
        println!(
            "n {}: {} flips, wastes {}, improves {}, {}",
            report.n,
            report.total_flips,
            report.waste_count,
            report.improve_count,
            if report.sorted { "sorted" } else { "NOT sorted" }
        );
        for v in &report.phase_violations {
            println!("flip #{} ({}) is {:?}, expected {:?}", v.index, v.phase, v.actual, v.expected);
        }
        if !report.sorted {
            println!("final stack {}", report.final_stack);
        }
    }
    Ok(if report.is_certificate() { 0 } else { 1 })
}

fn cmd_trace(
    n: usize,
    file: Option<&Path>,
    flips: Option<Vec<usize>>,
    golden: Option<CorpusId>,
    corpus_dir: Option<&Path>,
) -> Result<u8> {
    let doc = match (file, flips) {
        (Some(path), _) => read_document(path)?,
        (None, Some(flips)) => {
            let doc = SequenceDocument { n, family: None, flips, phases: None, provenance: String::new() };
            doc.check()?;
            doc
        }
        (None, None) => match generate(n) {
            Ok(seq) => SequenceDocument::from_generated(&seq, String::new()),
            Err(e) => return fail(2, e.to_string()),
        },
    };
    if doc.n != n {
        return fail(2, format!("document is for n = {}, not {n}", doc.n));
    }
    let mut trace = trace_from(SignedStack::neg_identity(n)?, &doc.flips)?;
    if let Some(p) = doc.phases {
        trace = trace.with_phases(p);
    }

    let Some(id) = golden else {
        print!("{}", trace.to_text());
        return Ok(0);
    };
    let entry = load_corpus(id, corpus_dir)?;
    match trace.first_divergence(&entry.trace) {
        None => {
            println!("trace matches {id}: {} states", trace.states.len());
            Ok(0)
        }
        Some(d) => {
            let show = |s: &Option<SignedStack>| s.as_ref().map_or("(none)".to_string(), |s| s.to_string());
            println!("trace diverges from {id} at state {}", d.step);
            println!("  expected {}", show(&d.expected));
            println!("  actual   {}", show(&d.actual));
            Ok(1)
        }
    }
}

#[derive(Serialize)]
struct Provenance {
    version: &'static str,
    mode: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    workers: usize,
    elapsed_ms: u128,
}

#[derive(Serialize)]
struct ResultLine<'a> {
    #[serde(flatten)]
    record: &'a SearchRecord,
    provenance: &'a Provenance,
}

#[allow(clippy::too_many_arguments)]
fn cmd_search(
    n: usize,
    mode: Mode,
    seed: u64,
    samples: u64,
    workers: usize,
    stop_after: Option<usize>,
    checkpoint: Option<PathBuf>,
    out: Option<&Path>,
    expect_some: bool,
) -> Result<u8> {
    let started = Instant::now();
    let mut cfg = match mode {
        Mode::Randomized => SearchConfig::randomized(seed, samples, workers),
        Mode::Exhaustive | Mode::Extension => SearchConfig::exhaustive(workers),
    };
    cfg.stop_after = stop_after;
    cfg.checkpoint_dir = checkpoint;
    let outcome: SearchOutcome = match mode {
        Mode::Exhaustive => exhaustive_search(n, &cfg),
        Mode::Randomized => randomized_search(n, &cfg),
        Mode::Extension => {
            let base = n.checked_sub(12).map(generate);
            let Some(Ok(seq)) = base else {
                return fail(2, format!("extension search needs a generated sequence for n - 12 = {}", n as i64 - 12));
            };
            extension_search(&ExtensionSpec::new(n - 12, seq.part(Part::W))?, &cfg)
        }
    }
    .or_else(|e| fail(2, e.to_string()))?;
    let elapsed = started.elapsed();

    let provenance = Provenance {
        version: VERSION,
        mode: match mode {
            Mode::Exhaustive => "exhaustive",
            Mode::Randomized => "randomized",
            Mode::Extension => "extension",
        },
        seed: (mode == Mode::Randomized).then_some(seed),
        workers,
        elapsed_ms: elapsed.as_millis(),
    };
    let sink: Box<dyn Write> = match out {
        Some(path) => Box::new(File::create(path).with_context(|| format!("creating {}", path.display()))?),
        None => Box::new(io::stdout().lock()),
    };
    let mut sink = BufWriter::new(sink);
    for c in &outcome.successes {
        let record = c.record(n);
        serde_json::to_writer(&mut sink, &ResultLine { record: &record, provenance: &provenance })?;
        sink.write_all(b"\n")?;
    }
    sink.flush()?;

    let s = &outcome.stats;
    eprintln!(
        "n = {n}: {} successes, {} of {} candidates evaluated{}{} in {elapsed:.2?}",
        outcome.successes.len(),
        s.evaluated,
        s.total,
        if s.resumed_ranges > 0 { format!(", {} ranges resumed", s.resumed_ranges) } else { String::new() },
        if s.stopped_early { ", stopped early" } else { "" },
    );
    Ok(if expect_some && outcome.successes.is_empty() { 1 } else { 0 })
}

fn parse_limits(spec: &str) -> Result<Limits> {
    let mut limits = Limits::default();
    for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let Some((key, value)) = part.split_once('=') else {
            bail!("bad solver limit {part:?}, expected key=value");
        };
        let value: usize = value.trim().parse().with_context(|| format!("bad solver limit {part:?}"))?;
        match key.trim() {
            "bfs" => limits.bfs = value,
            "reverse" | "reverse_bfs" => limits.reverse_bfs = value,
            "ida" => limits.ida = value,
            other => bail!("unknown solver limit {other:?} (expected bfs, reverse or ida)"),
        }
    }
    Ok(limits)
}

fn cmd_solve(
    n: usize,
    method: Method,
    limits: Option<&str>,
    budget: Option<Duration>,
    cache: Option<&Path>,
    json: bool,
) -> Result<u8> {
    let limits = limits.map(parse_limits).transpose()?.unwrap_or_default();
    let cache_file = cache.map(|d| d.join(format!("n{n}-{method}.json")));
    let cached = match &cache_file {
        Some(path) if path.exists() => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            Some(serde_json::from_str::<SolveResult>(&text).with_context(|| format!("parsing {}", path.display()))?)
        }
        _ => None,
    };
    let result = match cached {
        Some(r) => r,
        None => {
            let oracle = Oracle::new(limits);
            let solved = match (method, budget) {
                (Method::IdaStar, Some(b)) => oracle.ida_t(n, Some(b)),
                _ => oracle.solve(n, method),
            };
            let r = match solved {
                Ok(r) => r,
                Err(e @ ExactError::LimitExceeded { .. }) => return fail(2, e.to_string()),
                Err(e) => return fail(1, e.to_string()),
            };
            if let Some(path) = &cache_file {
                fs::create_dir_all(path.parent().expect("joined"))?;
                fs::write(path, serde_json::to_string_pretty(&r)?)?;
            }
            r
        }
    };
    if json {
        println!("{}", serde_json::to_string_pretty(&result)?);
    } else {
        println!("T({n}) = {}", result.t_value);
        println!("witness: {}", result.witness.iter().map(usize::to_string).collect::<Vec<_>>().join(" "));
        println!("method {}, {} states explored", result.method, result.explored);
    }
    Ok(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn limits_parse() {
        let l = parse_limits("bfs=9, reverse=6,ida=11").unwrap();
        assert_eq!((l.bfs, l.reverse_bfs, l.ida), (9, 6, 11));
        assert_eq!(parse_limits("").unwrap(), Limits::default());
        assert!(parse_limits("bfs").is_err());
        assert!(parse_limits("dfs=3").is_err());
    }
}
