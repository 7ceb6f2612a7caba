//! Command-line front end. Angles are radians throughout.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::analysis::{
    grid_scan, honest_rate_from_table, retention_probability, Axis, DEFAULT_GRID_POINTS,
};
use crate::error::Error;
use crate::io::{read_database, scan_csv, table_csv, to_json, write_atomic, Transcript};
use crate::protocol::{
    detect_attack, estimate_qber, position_guess_study, private_query, run_attack, run_sift,
    AttackConfig, BobStrategy, GuessStudy,
};
use crate::qstate::ProtocolParams;
use crate::sift::{joint_table, normalize_columns, Sifter};

/// Environment variable naming the directory relative output paths resolve
/// against.
pub const OUT_DIR_ENV: &str = "MDIQPQ_OUT_DIR";

pub const EXIT_OTHER: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DOMAIN: i32 = 3;
pub const EXIT_RESTART: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "mdiqpq", version, about = "Qutrit MDI private query toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print a Bell-outcome probability table.
    Table(TableArgs),
    /// Evaluate the closed-form security quantities over an angle grid.
    Scan(ScanArgs),
    /// Run honest key distribution and error estimation.
    Simulate(SimulateArgs),
    /// Run the middle-state attack and report detection statistics.
    Attack(AttackArgs),
    /// Run key distribution followed by one private query.
    Query(QueryArgs),
}

#[derive(Debug, Clone, Args)]
pub struct ParamArgs {
    /// Dimension: 2 (qubit) or 3 (qutrit).
    #[arg(long, default_value_t = 3)]
    pub dim: usize,
    #[arg(long, allow_negative_numbers = true)]
    pub gamma1: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub gamma2: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub theta: Option<f64>,
    /// Use the Fourier qutrit basis instead of the rotated one.
    #[arg(long)]
    pub fourier: bool,
    /// Bell outcome index to keep.
    #[arg(long)]
    pub target: Option<usize>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Output file; standard output when absent.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TableArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    /// Bob sends the middle (attack) states.
    #[arg(long)]
    pub middle: bool,
    /// Divide each column by its sum.
    #[arg(long)]
    pub normalized: bool,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    /// Points per axis, spread evenly inside the open range.
    #[arg(long, conflicts_with = "step")]
    pub points: Option<usize>,
    /// Grid spacing; the range endpoints are excluded.
    #[arg(long)]
    pub step: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    pub min: f64,
    #[arg(long, default_value_t = std::f64::consts::FRAC_PI_2)]
    pub max: f64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[arg(long, default_value_t = 100_000)]
    pub rounds: u64,
    #[arg(long)]
    pub seed: u64,
    /// Fraction of conclusive positions disclosed for error estimation.
    #[arg(long, default_value_t = 0.5)]
    pub test_fraction: f64,
    #[arg(long, default_value_t = 0.05)]
    pub threshold: f64,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[command(flatten)]
    pub run: RunArgs,
    /// Also write the per-round transcript as JSON.
    #[arg(long)]
    pub transcript: Option<PathBuf>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct AttackArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[command(flatten)]
    pub run: RunArgs,
    /// Short attacked sessions used to score Bob's position guess.
    #[arg(long, default_value_t = 0)]
    pub sessions: usize,
    #[arg(long, default_value_t = 300)]
    pub session_rounds: u64,
    #[arg(long)]
    pub transcript: Option<PathBuf>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct QueryArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[command(flatten)]
    pub run: RunArgs,
    /// Database file: ASCII 0/1 characters unless --bits is given.
    #[arg(long)]
    pub db: PathBuf,
    /// Read the database as raw bytes, eight bits per byte.
    #[arg(long)]
    pub bits: bool,
    #[arg(long)]
    pub index: usize,
    #[command(flatten)]
    pub out: OutputArgs,
}

/// Failure carrying the process exit status.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Domain(_)
            | Error::UnsupportedDimension(_)
            | Error::NotNormalized(_)
            | Error::UnequalColumnSums(_)
            | Error::EmptyGrid => EXIT_DOMAIN,
            Error::InvalidParams(_)
            | Error::DimensionMismatch { .. }
            | Error::QueryIndex { .. } => EXIT_USAGE,
            Error::Restart | Error::NoConclusive => EXIT_RESTART,
            Error::Database(_) | Error::Io(_) | Error::Json(_) => EXIT_OTHER,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

impl ParamArgs {
    pub fn to_params(&self) -> CliResult<ProtocolParams> {
        let params = match (self.dim, self.fourier) {
            (3, true) => {
                if self.gamma1.is_some() || self.gamma2.is_some() || self.theta.is_some() {
                    return Err(CliError::usage("--fourier takes no angles"));
                }
                ProtocolParams::fourier()
            }
            (3, false) => {
                if self.theta.is_some() {
                    return Err(CliError::usage("--theta applies to --dim 2"));
                }
                match (self.gamma1, self.gamma2) {
                    (Some(g1), Some(g2)) => ProtocolParams::qutrit(g1, g2)?,
                    _ => return Err(CliError::usage("--dim 3 needs --gamma1 and --gamma2")),
                }
            }
            (2, false) => {
                if self.gamma1.is_some() || self.gamma2.is_some() {
                    return Err(CliError::usage("--gamma1/--gamma2 apply to --dim 3"));
                }
                let theta = self
                    .theta
                    .ok_or_else(|| CliError::usage("--dim 2 needs --theta"))?;
                ProtocolParams::qubit(theta)?
            }
            (2, true) => return Err(CliError::usage("--fourier requires --dim 3")),
            (d, _) => return Err(Error::UnsupportedDimension(d).into()),
        };
        match self.target {
            Some(t) => Ok(params.with_target(t)?),
            None => Ok(params),
        }
    }
}

fn resolve_output(path: &Path) -> PathBuf {
    match std::env::var_os(OUT_DIR_ENV) {
        Some(dir) if path.is_relative() => Path::new(&dir).join(path),
        _ => path.to_path_buf(),
    }
}

fn emit(out: &OutputArgs, contents: &str) -> CliResult<()> {
    match &out.output {
        Some(p) => write_atomic(&resolve_output(p), contents.as_bytes()).map_err(Into::into),
        None => {
            print!("{contents}");
            Ok(())
        }
    }
}

fn emit_transcript<S: Serialize>(
    path: &Option<PathBuf>,
    summary: &S,
    run: &crate::protocol::SiftRun,
) -> CliResult<()> {
    if let Some(p) = path {
        let doc = to_json(&Transcript::new(summary, run))?;
        write_atomic(&resolve_output(p), doc.as_bytes())?;
    }
    Ok(())
}

fn check_run_args(run: &RunArgs) -> CliResult<()> {
    if run.rounds == 0 {
        return Err(CliError::usage("--rounds must be at least 1"));
    }
    if !(run.test_fraction > 0.0 && run.test_fraction <= 1.0) {
        return Err(CliError::usage("--test-fraction must lie in (0, 1]"));
    }
    if !(0.0..=1.0).contains(&run.threshold) {
        return Err(CliError::usage("--threshold must lie in [0, 1]"));
    }
    Ok(())
}

pub fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Table(a) => cmd_table(&a),
        Command::Scan(a) => cmd_scan(&a),
        Command::Simulate(a) => cmd_simulate(&a),
        Command::Attack(a) => cmd_attack(&a),
        Command::Query(a) => cmd_query(&a),
    }
}

pub fn cmd_table(args: &TableArgs) -> CliResult<()> {
    let params = args.params.to_params()?;
    let sifter = Sifter::new(&params)?;
    let alice = sifter.ensemble();
    let raw = if args.middle {
        let middle = params
            .middle_states()
            .map_err(|_| CliError::usage("--middle is not available with --fourier"))?;
        joint_table(alice, &middle, sifter.bell(), sifter.target())?
    } else {
        joint_table(alice, alice, sifter.bell(), sifter.target())?
    };
    let table = if args.normalized {
        normalize_columns(&raw)?
    } else {
        raw
    };
    let text = match args.format {
        Format::Csv => table_csv(&table),
        Format::Json => to_json(&table)?,
    };
    emit(&args.out, &text)
}

pub fn cmd_scan(args: &ScanArgs) -> CliResult<()> {
    let axis = match (args.points, args.step) {
        (_, Some(step)) => Axis::stepped(args.min, args.max, step)?,
        (points, None) => Axis::open(args.min, args.max, points.unwrap_or(DEFAULT_GRID_POINTS))?,
    };
    let scan = grid_scan(axis, axis)?;
    let text = match args.format {
        Format::Csv => scan_csv(&scan),
        Format::Json => to_json(&scan)?,
    };
    emit(&args.out, &text)
}

#[derive(Debug, Serialize)]
struct SimulateSummary {
    params: ProtocolParams,
    strategy: BobStrategy,
    rounds: u64,
    seed: u64,
    retained: usize,
    retention_observed: f64,
    retention_expected: f64,
    conclusive: usize,
    conclusive_rate_observed: Option<f64>,
    conclusive_rate_expected: f64,
    degenerate: usize,
    test_fraction: f64,
    tested_bits: usize,
    qber_observed: f64,
    qber_expected: f64,
    threshold: f64,
    detected: bool,
    usable_after_test: usize,
}

pub fn cmd_simulate(args: &SimulateArgs) -> CliResult<()> {
    check_run_args(&args.run)?;
    let params = args.params.to_params()?;
    let r = &args.run;
    let mut run = run_sift(&params, r.rounds, BobStrategy::Honest, r.seed)?;
    let estimate = estimate_qber(&mut run.record, r.test_fraction, r.seed)?;
    let summary = SimulateSummary {
        params,
        strategy: BobStrategy::Honest,
        rounds: r.rounds,
        seed: r.seed,
        retained: run.retained(),
        retention_observed: run.retention_rate(),
        retention_expected: retention_probability(&params)?,
        conclusive: run.record.conclusive_count(),
        conclusive_rate_observed: run.conclusive_rate(),
        conclusive_rate_expected: honest_rate_from_table(&params)?,
        degenerate: run.record.degenerate,
        test_fraction: r.test_fraction,
        tested_bits: estimate.tested.len(),
        qber_observed: estimate.qber,
        qber_expected: 0.0,
        threshold: r.threshold,
        detected: detect_attack(estimate.qber, r.threshold),
        usable_after_test: run.record.usable_positions().len(),
    };
    emit_transcript(&args.transcript, &summary, &run)?;
    emit(&args.out, &to_json(&summary)?)
}

#[derive(Debug, Serialize)]
struct AttackSummary {
    params: ProtocolParams,
    seed: u64,
    test_fraction: f64,
    #[serde(flatten)]
    report: crate::protocol::AttackReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    guess_study: Option<GuessStudy>,
}

pub fn cmd_attack(args: &AttackArgs) -> CliResult<()> {
    check_run_args(&args.run)?;
    let params = args.params.to_params()?;
    let r = &args.run;
    let config = AttackConfig {
        rounds: r.rounds,
        seed: r.seed,
        test_fraction: r.test_fraction,
        threshold: r.threshold,
    };
    let report = run_attack(&params, &config)?;
    let guess_study = if args.sessions > 0 {
        if args.session_rounds == 0 {
            return Err(CliError::usage("--session-rounds must be at least 1"));
        }
        Some(position_guess_study(
            &params,
            args.session_rounds,
            args.sessions,
            r.test_fraction,
            r.seed,
        )?)
    } else {
        None
    };
    let summary = AttackSummary {
        params,
        seed: r.seed,
        test_fraction: r.test_fraction,
        report,
        guess_study,
    };
    if args.transcript.is_some() {
        // the report does not retain rounds; rerun the same seeded stream
        let run = run_sift(&params, r.rounds, BobStrategy::MiddleAttack, r.seed)?;
        emit_transcript(&args.transcript, &summary, &run)?;
    }
    emit(&args.out, &to_json(&summary)?)
}

#[derive(Debug, Serialize)]
struct QuerySummary {
    params: ProtocolParams,
    rounds: u64,
    seed: u64,
    retained: usize,
    conclusive: usize,
    tested_bits: usize,
    qber_observed: f64,
    threshold: f64,
    detected: bool,
    database_len: usize,
    query_index: usize,
    alice_position: usize,
    shift: usize,
    recovered_bit: u8,
    expected_bit: u8,
    correct: bool,
}

pub fn cmd_query(args: &QueryArgs) -> CliResult<()> {
    check_run_args(&args.run)?;
    let params = args.params.to_params()?;
    let r = &args.run;
    let database = read_database(&args.db, args.bits)?;
    if args.index >= database.len() {
        return Err(Error::QueryIndex {
            index: args.index,
            len: database.len(),
        }
        .into());
    }
    let mut run = run_sift(&params, r.rounds, BobStrategy::Honest, r.seed)?;
    let estimate = estimate_qber(&mut run.record, r.test_fraction, r.seed)?;
    let session = private_query(&run.record, &database, args.index, r.seed)?;
    let summary = QuerySummary {
        params,
        rounds: r.rounds,
        seed: r.seed,
        retained: run.retained(),
        conclusive: run.record.conclusive_count(),
        tested_bits: estimate.tested.len(),
        qber_observed: estimate.qber,
        threshold: r.threshold,
        detected: detect_attack(estimate.qber, r.threshold),
        database_len: database.len(),
        query_index: args.index,
        alice_position: session.alice_position,
        shift: session.shift,
        recovered_bit: session.recovered_bit,
        expected_bit: database[args.index],
        correct: session.correct,
    };
    emit(&args.out, &to_json(&summary)?)
}
