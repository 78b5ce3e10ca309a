//! `qudit-sim`: run entanglement-simulation experiments and checks.
//!
//! Exit codes: 0 when every statistical check passes, 2 when one fails,
//! 1 on usage or configuration errors.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qudit_sim::harness::{
    estimate_joint_correlation, run_verify_suite, scan_dimension, verify_embedding, with_jobs,
    write_checks_csv, write_experiment_csv, write_json, write_scan_csv, CheckLine, HarnessError,
    PartialConfig, Suite, VerifyOptions, EMBEDDING_TOL,
};
use qudit_sim::protocol::CodecChoice;

#[derive(Debug, Parser)]
#[command(
    name = "qudit-sim",
    version,
    about = "Classical simulation of maximally entangled qudit correlations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the protocol against exact quantum correlations.
    Simulate(SimulateArgs),
    /// Check analytic claims numerically.
    Verify(VerifyArgs),
    /// Message cost as a function of the qudit dimension.
    Scan(ScanArgs),
    /// Check the vector embedding on random states and observables.
    EmbedCheck(EmbedArgs),
}

#[derive(Debug, Args)]
struct Common {
    /// Master seed; every random draw derives from it.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default: all cores). Output does not depend on it.
    #[arg(long)]
    jobs: Option<usize>,
    /// Output prefix; writes `<PREFIX>.csv` and `<PREFIX>.json`.
    /// Without it `simulate` and `scan` print the CSV to standard output.
    #[arg(long, value_name = "PREFIX")]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[command(flatten)]
    common: Common,
    /// TOML config file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Local dimension of each party (even).
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    trials: Option<u64>,
    /// bell | singlet | random | schmidt:c1,c2,... | json:{...} | file:PATH
    #[arg(long)]
    state: Option<String>,
    /// random | random:K | json:[...] | file:PATH
    #[arg(long)]
    observables: Option<String>,
    /// Shorthand for `--observables random:K`.
    #[arg(long, conflicts_with = "observables")]
    pairs: Option<usize>,
    /// golomb | golomb(M) | elias-gamma | unary
    #[arg(long)]
    codec: Option<String>,
    /// protocol | postselected | abstract-vectors
    #[arg(long)]
    mode: Option<String>,
    /// Sphere dimension for abstract-vectors mode.
    #[arg(long)]
    n: Option<usize>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[command(flatten)]
    common: Common,
    /// lemma1 | bounds | distribution | embedding | all
    #[arg(long, default_value = "all")]
    suite: String,
    /// Sphere dimensions for the normalization suite.
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<usize>>,
    /// Monte-Carlo samples per integral.
    #[arg(long)]
    samples: Option<u64>,
    /// Largest n in the bounds sweep.
    #[arg(long)]
    max_n: Option<usize>,
    #[arg(long)]
    d: Option<usize>,
    /// Observable pairs (distribution) or random triples (embedding).
    #[arg(long)]
    pairs: Option<usize>,
    /// Protocol runs per pair in the distribution suite.
    #[arg(long)]
    trials: Option<u64>,
}

#[derive(Debug, Args)]
struct ScanArgs {
    #[command(flatten)]
    common: Common,
    /// Comma-separated even dimensions.
    #[arg(long, value_delimiter = ',', required = true)]
    d_list: Vec<usize>,
    #[arg(long, default_value_t = 100_000)]
    trials: u64,
    #[arg(long, default_value = "golomb")]
    codec: String,
}

#[derive(Debug, Args)]
struct EmbedArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 2)]
    d: usize,
    /// Random (state, A, B) triples.
    #[arg(long, default_value_t = 1000)]
    pairs: usize,
}

enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        match e {
            HarnessError::Io(_) | HarnessError::Csv(_) | HarnessError::Json(_) => {
                Failure::Runtime(e.to_string())
            }
            other => Failure::Usage(other.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<bool, Failure> {
    match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Verify(a) => verify(a),
        Command::Scan(a) => scan(a),
        Command::EmbedCheck(a) => embed_check(a),
    }
}

/// Writes the CSV to `<prefix>.csv` (or stdout) and the JSON to `<prefix>.json`.
fn emit<S: serde::Serialize>(
    out: Option<&Path>,
    csv: impl FnOnce(&mut dyn Write) -> Result<(), HarnessError>,
    json: &S,
) -> Result<(), Failure> {
    match out {
        Some(prefix) => {
            let mut f = BufWriter::new(File::create(prefix.with_extension("csv"))?);
            csv(&mut f)?;
            f.flush()?;
            let mut f = BufWriter::new(File::create(prefix.with_extension("json"))?);
            write_json(json, &mut f)?;
            f.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            csv(&mut lock)?;
            lock.flush()?;
        }
    }
    Ok(())
}

fn simulate(a: SimulateArgs) -> Result<bool, Failure> {
    let base = match &a.config {
        Some(path) => PartialConfig::from_file(path)?,
        None => PartialConfig::default(),
    };
    let flags = PartialConfig {
        d: a.d,
        state: a.state,
        observables: a.observables.or(a.pairs.map(|k| format!("random:{k}"))),
        trials: a.trials,
        seed: a.common.seed,
        codec: a.codec,
        mode: a.mode,
        n: a.n,
    };
    let cfg = base.overridden_by(flags).resolve()?;
    let report = with_jobs(a.common.jobs, || estimate_joint_correlation(&cfg))?;
    for inst in &report.instances {
        let s = &inst.stats;
        let mut line = format!(
            "instance {}: E(AB) = {:.6} +/- {:.6} vs {:.6} (z = {:.2})",
            inst.index, s.correlation_hat, s.correlation_stderr, s.oracle_correlation, s.z_score
        );
        if let Some(ps) = &s.postselection {
            line.push_str(&format!(
                ", success rate {:.4} vs {:.4}",
                ps.success_rate, ps.expected_success_rate
            ));
        }
        line.push_str(if inst.pass { " PASS" } else { " FAIL" });
        eprintln!("{line}");
    }
    eprintln!(
        "{}/{} instances within {} stderr: {}",
        report.pass_count,
        report.instances.len(),
        qudit_sim::harness::Z_LIMIT,
        if report.pass { "PASS" } else { "FAIL" }
    );
    emit(
        a.common.out.as_deref(),
        |w| write_experiment_csv(&report, w),
        &report,
    )?;
    Ok(report.pass)
}

fn verify(a: VerifyArgs) -> Result<bool, Failure> {
    let suite: Suite = a.suite.parse()?;
    let mut opts = VerifyOptions::default();
    if let Some(ns) = a.n {
        opts.ns = ns;
    }
    if let Some(s) = a.samples {
        opts.samples = s;
    }
    if let Some(m) = a.max_n {
        opts.max_n = m;
    }
    if let Some(d) = a.d {
        opts.d = d;
    }
    if let Some(p) = a.pairs {
        opts.pairs = p;
    }
    if let Some(t) = a.trials {
        opts.trials = t;
    }
    if let Some(s) = a.common.seed {
        opts.seed = s;
    }
    let report = with_jobs(a.common.jobs, || run_verify_suite(suite, &opts))?;
    print_lines(&report.lines);
    if let Some(prefix) = a.common.out.as_deref() {
        emit(
            Some(prefix),
            |w| write_checks_csv(&report.lines, w),
            &report,
        )?;
    }
    Ok(report.pass)
}

fn print_lines(lines: &[CheckLine]) {
    for l in lines {
        println!("{l}");
    }
}

fn scan(a: ScanArgs) -> Result<bool, Failure> {
    let codec: CodecChoice = a
        .codec
        .parse()
        .map_err(|e: qudit_sim::protocol::CodecError| Failure::Usage(e.to_string()))?;
    let seed = a.common.seed.unwrap_or(0);
    let report = with_jobs(a.common.jobs, || {
        scan_dimension(&a.d_list, a.trials, seed, codec)
    })?;
    for r in &report.rows {
        eprintln!(
            "d={} n={} iterations {:.4} bits {:.4} excess {:.4} (bound {:.4})",
            r.d, r.n, r.mean_iterations, r.mean_message_bits, r.excess_bits, r.length_bound
        );
    }
    eprintln!(
        "excess spread {:.4} <= {}: {}",
        report.excess_spread,
        report.spread_limit,
        if report.pass { "PASS" } else { "FAIL" }
    );
    emit(
        a.common.out.as_deref(),
        |w| write_scan_csv(&report, w),
        &report,
    )?;
    Ok(report.pass)
}

fn embed_check(a: EmbedArgs) -> Result<bool, Failure> {
    let seed = a.common.seed.unwrap_or(0);
    let c = with_jobs(a.common.jobs, || verify_embedding(a.d, a.pairs, seed))?;
    let line = CheckLine {
        check: format!("embedding d={}", c.d),
        claim: "embedding".into(),
        computed: c.max_dot_error.max(c.max_norm_error),
        expected: 0.0,
        tolerance: format!("max error <= {EMBEDDING_TOL:e} over {} triples", c.triples),
        pass: c.pass,
    };
    print_lines(std::slice::from_ref(&line));
    if let Some(prefix) = a.common.out.as_deref() {
        emit(
            Some(prefix),
            |w| write_checks_csv(std::slice::from_ref(&line), w),
            &c,
        )?;
    }
    Ok(c.pass)
}
