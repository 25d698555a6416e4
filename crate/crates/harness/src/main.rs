use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use brsp_core::entcf::Backend;
use brsp_core::qsim::BinaryObservable;
use brsp_core::rigidity::{jordan_extract, parse_matrix_text, parse_vector_text, IsometryReport};
use brsp_core::zq::{hardcore_distance_oracle, is_moderate_matrix, BitString, HardcoreModulus, ResidueMatrix};
use brsp_core::SeedTree;
use brsp_dqc::{fk_delegate, library, rsp_fk_run, PatternId, ServerKind, Verdict};
use brsp_harness::experiments::{run_experiment, ExperimentSpec, EXPERIMENTS};
use brsp_protocol::{run_session, Basis, BufferMode, ProtocolConfig, StrategyKind, TransportMode};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

/// Remote state preparation, delegation and rigidity toolkit.
#[derive(Parser)]
#[command(name = "brsp", version)]
struct Cli {
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    report: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// One remote state preparation session.
    Rsp {
        #[command(subcommand)]
        action: RspAction,
    },
    /// Blind delegation of a library pattern.
    Dqc {
        #[command(subcommand)]
        action: DqcAction,
    },
    /// Jordan isometry extraction for observables read from matrix files.
    Rigidity(RigidityArgs),
    /// Exact hardcore distance table for one matrix C.
    HardcoreOracle(HardcoreArgs),
    /// Named, seeded experiments.
    Experiment {
        #[command(subcommand)]
        action: ExperimentAction,
    },
}

#[derive(Subcommand)]
enum RspAction {
    Run(RspArgs),
}

#[derive(Args)]
struct RspArgs {
    #[arg(long, default_value = "X")]
    basis: Basis,
    #[arg(long, default_value_t = 2000)]
    rounds: u64,
    #[arg(long, default_value_t = 0.15)]
    delta: f64,
    /// honest, zonly, random or defector:RATE.
    #[arg(long, default_value = "honest")]
    prover: StrategyKind,
    #[arg(long, value_enum, default_value_t = BackendArg::Mock)]
    backend: BackendArg,
    /// local, inproc or tcp.
    #[arg(long, default_value = "local")]
    transport: TransportMode,
    #[arg(long, value_enum, default_value_t = Toggle::Off)]
    buffered: Toggle,
    #[arg(long, default_value_t = 16)]
    lambda: u32,
    /// Include every frame in the report.
    #[arg(long)]
    frames: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendArg {
    Mock,
    Lwe,
}

#[derive(Clone, Copy, ValueEnum)]
enum Toggle {
    On,
    Off,
}

#[derive(Subcommand)]
enum DqcAction {
    Run(DqcArgs),
}

#[derive(Args)]
struct DqcArgs {
    /// teleport, rotation or cz.
    #[arg(long, default_value = "teleport")]
    pattern: PatternId,
    /// honest, flipall or flip:VERTEX.
    #[arg(long, default_value = "honest")]
    server: ServerKind,
    #[arg(long, value_enum, default_value_t = Source::Direct)]
    source: Source,
    /// Rounds per preparation session when `--source rsp`.
    #[arg(long, default_value_t = 2000)]
    rounds: u64,
    #[arg(long, default_value_t = 0.15)]
    delta: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum Source {
    Direct,
    Rsp,
}

#[derive(Args)]
struct RigidityArgs {
    #[arg(long)]
    z: PathBuf,
    #[arg(long)]
    x: PathBuf,
    #[arg(long)]
    x_prime: Option<PathBuf>,
    /// A state on the observables' space, one entry per token.
    #[arg(long)]
    state: Option<PathBuf>,
}

#[derive(Args)]
struct HardcoreArgs {
    #[arg(long, default_value_t = 17)]
    q: u32,
    #[arg(long, default_value_t = 1)]
    ell: usize,
    #[arg(long, default_value_t = 12)]
    n: usize,
    /// 2 or 8.
    #[arg(long, default_value_t = 8)]
    modulus: u32,
    /// Bit string such as 1011; all ones when omitted.
    #[arg(long)]
    d_hat: Option<String>,
    /// Comma-separated row-major entries of C; drawn from --seed when omitted.
    #[arg(long)]
    c: Option<String>,
}

#[derive(Subcommand)]
enum ExperimentAction {
    Run(ExperimentArgs),
    List,
}

#[derive(Args)]
struct ExperimentArgs {
    name: String,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    rounds: Option<u64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    workers: Option<usize>,
    /// Per-trial CSV dump, in addition to the report.
    #[arg(long)]
    csv: Option<PathBuf>,
}

/// Whether the command ran to a successful or an ERR/reject result.
enum Status {
    Ok,
    Rejected,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::Rejected) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: &Cli) -> Result<Status> {
    match &cli.command {
        Command::Rsp { action: RspAction::Run(args) } => rsp(cli, args),
        Command::Dqc { action: DqcAction::Run(args) } => dqc(cli, args),
        Command::Rigidity(args) => rigidity(cli, args),
        Command::HardcoreOracle(args) => hardcore(cli, args),
        Command::Experiment { action: ExperimentAction::List } => {
            for e in EXPERIMENTS {
                println!("{:<22} {:>6}  {}", e.name, e.default_trials, e.summary);
            }
            Ok(Status::Ok)
        }
        Command::Experiment { action: ExperimentAction::Run(args) } => experiment(cli, args),
    }
}

fn rsp(cli: &Cli, args: &RspArgs) -> Result<Status> {
    let cfg = ProtocolConfig {
        lambda: args.lambda,
        max_rounds: args.rounds,
        delta: args.delta,
        basis: args.basis,
        backend: match args.backend {
            BackendArg::Mock => Backend::Mock,
            BackendArg::Lwe => Backend::Lwe,
        },
        buffer_mode: match args.buffered {
            Toggle::On => BufferMode::Buffered,
            Toggle::Off => BufferMode::Direct,
        },
        transport: args.transport,
        seed: cli.seed,
        ..Default::default()
    };
    let report = run_session(&cfg, args.prover)?;
    let t = &report.transcript;
    let mut out = json!({
        "command": "rsp",
        "seed": cli.seed,
        "config": cfg,
        "prover": args.prover.to_string(),
        "outcome": report.outcome,
        "prover_qubit": report.prover_qubit,
        "planned_rounds": t.planned_rounds,
        "rounds_played": t.rounds.len(),
        "tally": t.tally,
        "frame_count": t.frames.len(),
    });
    if args.frames {
        out["frames"] = json!(t.frames);
    }
    emit(cli, &out)?;
    Ok(if report.outcome.is_err() { Status::Rejected } else { Status::Ok })
}

fn dqc(cli: &Cli, args: &DqcArgs) -> Result<Status> {
    let lib = library(args.pattern);
    let (transcript, sessions) = match args.source {
        Source::Direct => (fk_delegate(&lib.pattern, &lib.graph, args.server, cli.seed)?, Value::Null),
        Source::Rsp => {
            let cfg = ProtocolConfig { max_rounds: args.rounds, delta: args.delta, ..Default::default() };
            let r = rsp_fk_run(&cfg, args.pattern, args.server, cli.seed)?;
            (r.transcript, json!(r.sessions))
        }
    };
    let out = json!({
        "command": "dqc",
        "seed": cli.seed,
        "pattern": args.pattern,
        "server": args.server.to_string(),
        "verdict": transcript.verdict,
        "outputs": transcript.outputs,
        "circuit_distribution": lib.circuit.output_distribution()?,
        "transcript": transcript,
        "sessions": sessions,
    });
    emit(cli, &out)?;
    Ok(if transcript.verdict == Verdict::Accept { Status::Ok } else { Status::Rejected })
}

fn read_observable(path: &Path) -> Result<BinaryObservable> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let m = parse_matrix_text(&text).with_context(|| format!("parsing {}", path.display()))?;
    BinaryObservable::new(m).with_context(|| format!("{} is not a binary observable", path.display()))
}

fn isometry_json(r: &IsometryReport) -> Value {
    json!({
        "block_dim": r.block_dim,
        "block_overlaps": r.block_overlaps,
        "isometry_defect": r.isometry_defect,
        "z_residual": r.z_residual,
        "x_residual": r.x_residual,
        "z_residual_state": r.z_residual_state,
        "x_residual_state": r.x_residual_state,
        "x_prime": r.x_prime.as_ref().map(|p| json!({
            "residual": p.residual,
            "identity_defect": p.identity_defect,
            "commutator": p.commutator,
        })),
    })
}

fn rigidity(cli: &Cli, args: &RigidityArgs) -> Result<Status> {
    let z = read_observable(&args.z)?;
    let x = read_observable(&args.x)?;
    let x_prime = args.x_prime.as_deref().map(read_observable).transpose()?;
    let psi = match &args.state {
        Some(p) => Some(parse_vector_text(&fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?)?),
        None => None,
    };
    let report = jordan_extract(&z, &x, x_prime.as_ref(), psi.as_ref())?;
    let mut out = isometry_json(&report);
    out["command"] = json!("rigidity");
    out["dimension"] = json!(z.dim());
    emit(cli, &out)?;
    Ok(Status::Ok)
}

fn hardcore(cli: &Cli, args: &HardcoreArgs) -> Result<Status> {
    let c = match &args.c {
        Some(text) => {
            let entries = text
                .split(',')
                .map(|e| e.trim().parse::<u32>().with_context(|| format!("bad entry `{e}` in --c")))
                .collect::<Result<Vec<_>>>()?;
            ResidueMatrix::new(args.q, args.ell, args.n, entries)?
        }
        None => ResidueMatrix::random(args.q, args.ell, args.n, &mut SeedTree::new(cli.seed).rng()),
    };
    let bits = match &args.d_hat {
        Some(s) => s
            .chars()
            .map(|ch| match ch {
                '0' => Ok(0),
                '1' => Ok(1),
                _ => bail!("--d-hat must be a bit string, found `{ch}`"),
            })
            .collect::<Result<Vec<u8>>>()?,
        None => vec![1; args.n],
    };
    let modulus = HardcoreModulus::try_from(args.modulus)?;
    let table = hardcore_distance_oracle(&c, &BitString::new(bits)?, modulus)?;
    let out = json!({
        "command": "hardcore-oracle",
        "seed": cli.seed,
        "c": c,
        "moderate": is_moderate_matrix(&c)?,
        "table": table,
    });
    emit(cli, &out)?;
    Ok(Status::Ok)
}

fn experiment(cli: &Cli, args: &ExperimentArgs) -> Result<Status> {
    let spec = ExperimentSpec {
        name: args.name.clone(),
        trials: args.trials,
        seed: cli.seed,
        rounds: args.rounds,
        delta: args.delta,
        workers: args.workers,
        output: None,
        csv: args.csv.clone(),
    };
    let report = run_experiment(&spec)?;
    match cli.format {
        Format::Json => write_out(cli, report.to_json()?.as_bytes())?,
        Format::Csv => {
            let mut buf = Vec::new();
            report.write_csv(&mut buf)?;
            write_out(cli, &buf)?;
        }
    }
    Ok(Status::Ok)
}

/// Prints a command report as pretty JSON or as `key,value` rows with
/// dotted paths.
fn emit(cli: &Cli, value: &Value) -> Result<()> {
    match cli.format {
        Format::Json => {
            let mut text = serde_json::to_string_pretty(value)?;
            text.push('\n');
            write_out(cli, text.as_bytes())
        }
        Format::Csv => {
            let mut rows = Vec::new();
            flatten("", value, &mut rows);
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["key", "value"])?;
            for (k, v) in rows {
                w.write_record([k, v])?;
            }
            write_out(cli, &w.into_inner().context("flushing CSV")?)
        }
    }
}

fn flatten(prefix: &str, value: &Value, rows: &mut Vec<(String, String)>) {
    let key = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match value {
        Value::Object(map) => map.iter().for_each(|(k, v)| flatten(&key(k), v, rows)),
        Value::Array(items) => items.iter().enumerate().for_each(|(i, v)| flatten(&key(&i.to_string()), v, rows)),
        Value::String(s) => rows.push((prefix.to_string(), s.clone())),
        other => rows.push((prefix.to_string(), other.to_string())),
    }
}

fn write_out(cli: &Cli, bytes: &[u8]) -> Result<()> {
    match &cli.report {
        Some(path) => fs::write(path, bytes).with_context(|| format!("writing {}", path.display())),
        None => Ok(io::stdout().lock().write_all(bytes)?),
    }
}
