//! Named, seeded experiments. Each one turns an [`ExperimentSpec`] into a
//! [`ReportRecord`]; the same spec always produces the same record apart
//! from its wall-clock field.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::Instant;

use brsp_core::entcf::Backend;
use brsp_core::linalg::{self, c};
use brsp_core::qsim::BinaryObservable;
use brsp_core::rigidity::{jordan_extract, qrac_optimize, qrac_optimize_from, qrac_success, QracInstance};
use brsp_core::zq::{
    hardcore_bound, hardcore_distance_oracle, is_moderate_matrix, BitString, HardcoreModulus, ResidueMatrix,
};
use brsp_core::{SeedTree, SimRng, OPT_Q};
use brsp_dqc::{fk_delegate, library, rsp_fk_run, PatternId, ServerKind, Verdict};
use brsp_protocol::{
    run_session, Basis, BufferMode, ErrCause, ProtocolConfig, RspOutcome, StrategyKind, TransportMode,
};
use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{HarnessError, Result};
use crate::pool::{default_workers, run_trials};
use crate::report::{ReportRecord, TrialRecord};
use crate::stats::{chi_square_statistic, chi_square_uniform, normalize, total_variation, wilson_interval};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub name: String,
    /// `None` takes the experiment's default.
    pub trials: Option<u64>,
    pub seed: u64,
    /// Overrides the protocol's `N` where the experiment runs sessions.
    pub rounds: Option<u64>,
    /// Overrides the protocol's `δ` where the experiment runs sessions.
    pub delta: Option<f64>,
    /// Worker threads; `None` uses every available core. Does not affect results.
    pub workers: Option<usize>,
    pub output: Option<PathBuf>,
    pub csv: Option<PathBuf>,
}

impl ExperimentSpec {
    pub fn new(name: impl Into<String>, seed: u64) -> Self {
        ExperimentSpec {
            name: name.into(),
            trials: None,
            seed,
            rounds: None,
            delta: None,
            workers: None,
            output: None,
            csv: None,
        }
    }

    pub fn trials(mut self, n: u64) -> Self {
        self.trials = Some(n);
        self
    }
}

pub struct ExperimentInfo {
    pub name: &'static str,
    pub default_trials: u64,
    pub summary: &'static str,
}

pub const EXPERIMENTS: &[ExperimentInfo] = &[
    ExperimentInfo { name: "qrac-optimum", default_trials: 10_000, summary: "canonical QRAC value and a random-restart search for a better one" },
    ExperimentInfo { name: "honest-accept-rate", default_trials: 200, summary: "honest sessions at N=2000, δ=0.15, alternating W=X and W=Z" },
    ExperimentInfo { name: "theta-uniformity", default_trials: 10_000, summary: "distribution of the prepared angle over honest final rounds" },
    ExperimentInfo { name: "zonly-soundness", default_trials: 100, summary: "abort rate against the Z-only prover at N=2000, δ=0.05" },
    ExperimentInfo { name: "random-soundness", default_trials: 100, summary: "abort rate against the random-answer prover at N=2000, δ=0.05" },
    ExperimentInfo { name: "jordan-residuals", default_trials: 30, summary: "isometry residuals for exact and perturbed anticommuting pairs, D ∈ {2,4,8}" },
    ExperimentInfo { name: "moderate-frequency", default_trials: 1000, summary: "fraction of random C ∈ Z_17^{1×n} that are moderate, n ∈ {8,12,16}" },
    ExperimentInfo { name: "hardcore-table", default_trials: 20, summary: "exact hardcore distance tables for random C, n ∈ {8,…,16}" },
    ExperimentInfo { name: "fk-flipall", default_trials: 100, summary: "delegation of the teleport pattern against a server flipping every bit" },
    ExperimentInfo { name: "rsp-fk-honest", default_trials: 100, summary: "teleport pattern on remotely prepared qubits, N=20000, δ=0.15" },
    ExperimentInfo { name: "rsp-fk-distribution", default_trials: 1000, summary: "output law of accepted remote-prepared teleport runs (N=2000) against the circuit" },
    ExperimentInfo { name: "transport-determinism", default_trials: 20, summary: "random configurations replayed over the in-process and TCP transports" },
];

/// Shared per-run context.
struct Ctx<'a> {
    spec: &'a ExperimentSpec,
    trials: u64,
    workers: usize,
    tree: SeedTree,
}

impl Ctx<'_> {
    fn trial_seed(&self, i: u64) -> u64 {
        self.tree.child(i).value()
    }

    fn rounds(&self, default: u64) -> u64 {
        self.spec.rounds.unwrap_or(default)
    }

    fn delta(&self, default: f64) -> f64 {
        self.spec.delta.unwrap_or(default)
    }

    fn run<T: Send>(&self, trial: impl Fn(u64, u64) -> Result<T> + Sync) -> Result<Vec<T>> {
        self.run_range(0, self.trials, trial)
    }

    fn run_range<T: Send>(&self, start: u64, count: u64, trial: impl Fn(u64, u64) -> Result<T> + Sync) -> Result<Vec<T>> {
        run_trials(start, count, self.workers, |i| trial(i, self.trial_seed(i)))
    }
}

/// What an experiment body hands back.
struct Outcome {
    parameters: serde_json::Value,
    trials: Vec<TrialRecord>,
    statistics: BTreeMap<String, f64>,
    details: Option<serde_json::Value>,
}

fn stats<const N: usize>(pairs: [(&str, f64); N]) -> BTreeMap<String, f64> {
    pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

pub fn run_experiment(spec: &ExperimentSpec) -> Result<ReportRecord> {
    let info = EXPERIMENTS
        .iter()
        .find(|e| e.name == spec.name)
        .ok_or_else(|| HarnessError::UnknownExperiment(spec.name.clone()))?;
    let trials = spec.trials.unwrap_or(info.default_trials);
    if trials == 0 {
        return Err(HarnessError::NoTrials);
    }
    let ctx = Ctx {
        spec,
        trials,
        workers: spec.workers.unwrap_or_else(default_workers),
        tree: SeedTree::new(spec.seed).named(info.name),
    };
    let start = Instant::now();
    let out = match info.name {
        "qrac-optimum" => qrac_optimum(&ctx)?,
        "honest-accept-rate" => honest_accept_rate(&ctx)?,
        "theta-uniformity" => theta_uniformity(&ctx)?,
        "zonly-soundness" => soundness(&ctx, StrategyKind::ZOnly)?,
        "random-soundness" => soundness(&ctx, StrategyKind::RandomAnswer)?,
        "jordan-residuals" => jordan_residuals(&ctx)?,
        "moderate-frequency" => moderate_frequency(&ctx)?,
        "hardcore-table" => hardcore_table(&ctx)?,
        "fk-flipall" => fk_flipall(&ctx)?,
        "rsp-fk-honest" => rsp_fk_honest(&ctx)?,
        "rsp-fk-distribution" => rsp_fk_distribution(&ctx)?,
        "transport-determinism" => transport_determinism(&ctx)?,
        other => unreachable!("{other} is listed but not dispatched"),
    };
    let mut parameters = out.parameters;
    parameters["trials"] = json!(trials);
    let report = ReportRecord {
        experiment: info.name.to_string(),
        seed: spec.seed,
        parameters,
        trials: out.trials,
        statistics: out.statistics,
        details: out.details,
        wall_clock_seconds: start.elapsed().as_secs_f64(),
    };
    if let Some(path) = &spec.output {
        report.write_json(path)?;
    }
    if let Some(path) = &spec.csv {
        report.write_csv_file(path)?;
    }
    Ok(report)
}

fn qrac_optimum(ctx: &Ctx) -> Result<Outcome> {
    let canonical = qrac_success(&QracInstance::canonical());
    let seed = ctx.trial_seed(0);
    let searched = qrac_optimize(ctx.trials as usize, seed)?;
    let from_canonical = qrac_optimize_from(QracInstance::canonical(), 1, seed)?;
    Ok(Outcome {
        parameters: json!({}),
        trials: vec![TrialRecord::new(0, seed, "search").value(searched.success)],
        statistics: stats([
            ("canonical_success", canonical),
            ("canonical_start_success", from_canonical.success),
            ("search_success", searched.success),
            ("opt_q", OPT_Q),
            ("search_excess", searched.success - OPT_Q),
        ]),
        details: None,
    })
}

fn session_cfg(seed: u64, rounds: u64, delta: f64, basis: Basis) -> ProtocolConfig {
    ProtocolConfig { seed, max_rounds: rounds, delta, basis, ..Default::default() }
}

fn outcome_label(o: &RspOutcome) -> &'static str {
    match o {
        RspOutcome::Z { .. } | RspOutcome::X { .. } => "accept",
        RspOutcome::Err { cause: ErrCause::Abort(_) } => "abort",
        RspOutcome::Err { .. } => "err",
    }
}

fn honest_accept_rate(ctx: &Ctx) -> Result<Outcome> {
    let (rounds, delta) = (ctx.rounds(2000), ctx.delta(0.15));
    let trials = ctx.run(|i, seed| {
        let basis = if i % 2 == 0 { Basis::X } else { Basis::Z };
        let r = run_session(&session_cfg(seed, rounds, delta, basis), StrategyKind::Honest)?;
        let (value, matched) = match (&r.outcome, r.prover_qubit) {
            (RspOutcome::X { theta }, Some(q)) => (Some(*theta), q.plus_index_of() == Some(*theta)),
            (RspOutcome::Z { b }, Some(q)) => (Some(*b), q.basis_index_of() == Some(*b)),
            _ => (None, false),
        };
        let mut rec = TrialRecord::new(i, seed, outcome_label(&r.outcome)).detail(format!("{basis}"));
        if let Some(v) = value {
            rec = rec.value(f64::from(v)).detail(format!("{basis} {}", if matched { "match" } else { "mismatch" }));
        }
        Ok((rec, r.transcript.planned_rounds))
    })?;
    let accepted = trials.iter().filter(|(t, _)| t.outcome == "accept").count() as u64;
    let matched = trials.iter().filter(|(t, _)| t.detail.as_deref().is_some_and(|d| d.ends_with(" match"))).count() as u64;
    let (lo, hi) = wilson_interval(accepted, ctx.trials, 1.96);
    let mean_rounds = trials.iter().map(|(_, r)| *r as f64).sum::<f64>() / ctx.trials as f64;
    Ok(Outcome {
        parameters: json!({"rounds": rounds, "delta": delta, "prover": "honest", "backend": "mock"}),
        trials: trials.into_iter().map(|(t, _)| t).collect(),
        statistics: stats([
            ("accepted", accepted as f64),
            ("accept_rate", accepted as f64 / ctx.trials as f64),
            ("accept_rate_lo95", lo),
            ("accept_rate_hi95", hi),
            ("matched_outputs", matched as f64),
            ("output_match_rate", if accepted == 0 { 0.0 } else { matched as f64 / accepted as f64 }),
            ("mean_planned_rounds", mean_rounds),
        ]),
        details: None,
    })
}

/// Attempts per sample before giving up on finding an accepted final round.
const UNIFORMITY_ATTEMPTS: u64 = 64;

fn theta_uniformity(ctx: &Ctx) -> Result<Outcome> {
    let (rounds, delta) = (ctx.rounds(1), ctx.delta(0.15));
    let trials = ctx.run(|i, seed| {
        for attempt in 0..UNIFORMITY_ATTEMPTS {
            let s = SeedTree::new(seed).child(attempt).value();
            if let RspOutcome::X { theta } = run_session(&session_cfg(s, rounds, delta, Basis::X), StrategyKind::Honest)?.outcome {
                return Ok(TrialRecord::new(i, s, "accept").value(f64::from(theta)));
            }
        }
        Err(HarnessError::Exhausted(format!("sample {i}: no accepted run in {UNIFORMITY_ATTEMPTS} attempts")))
    })?;
    let mut counts = [0u64; 8];
    for t in &trials {
        counts[t.value.expect("accepted samples carry θ") as usize] += 1;
    }
    let theta_hat: Vec<u64> = (0..4).map(|t| counts[t] + counts[t + 4]).collect();
    let v_hat = [counts[..4].iter().sum(), counts[4..].iter().sum()];
    let mut s = stats([
        ("chi_square", chi_square_statistic(&counts)),
        ("p_value", chi_square_uniform(&counts)?),
        ("theta_hat_p_value", chi_square_uniform(&theta_hat)?),
        ("v_hat_p_value", chi_square_uniform(&v_hat)?),
    ]);
    for (k, &n) in counts.iter().enumerate() {
        s.insert(format!("count_{k}"), n as f64);
    }
    Ok(Outcome {
        parameters: json!({"rounds": rounds, "delta": delta, "categories": "θ̂ + 4v̂"}),
        trials,
        statistics: s,
        details: None,
    })
}

fn soundness(ctx: &Ctx, strategy: StrategyKind) -> Result<Outcome> {
    let (rounds, delta) = (ctx.rounds(2000), ctx.delta(0.05));
    let trials = ctx.run(|i, seed| {
        let r = run_session(&session_cfg(seed, rounds, delta, Basis::X), strategy)?;
        Ok(TrialRecord::new(i, seed, outcome_label(&r.outcome)).value(r.transcript.planned_rounds as f64))
    })?;
    let rejected = trials.iter().filter(|t| t.outcome != "accept").count() as u64;
    let aborts = trials.iter().filter(|t| t.outcome == "abort").count() as u64;
    Ok(Outcome {
        parameters: json!({"rounds": rounds, "delta": delta, "prover": strategy.to_string()}),
        trials,
        statistics: stats([
            ("rejected", rejected as f64),
            ("aborts", aborts as f64),
            ("reject_rate", rejected as f64 / ctx.trials as f64),
        ]),
        details: None,
    })
}

const JORDAN_DIMS: [usize; 3] = [2, 4, 8];
const PERTURBATIONS: [f64; 2] = [1e-2, 1e-4];

fn observable(m: linalg::CMat) -> Result<BinaryObservable> {
    Ok(BinaryObservable::new(m).map_err(brsp_core::rigidity::RigidityError::from)?)
}

fn jordan_residuals(ctx: &Ctx) -> Result<Outcome> {
    let results = ctx.run(|i, seed| {
        let d = JORDAN_DIMS[(i % 3) as usize];
        let mut rng: SimRng = SeedTree::new(seed).rng();
        let u = linalg::random_unitary(d, &mut rng);
        let id = linalg::identity(d / 2);
        let z = observable(&u * linalg::kron(&linalg::sigma_z(), &id) * u.adjoint())?;
        let x_matrix = &u * linalg::kron(&linalg::sigma_x(), &id) * u.adjoint();
        let x = observable(x_matrix.clone())?;
        let exact = jordan_extract(&z, &x, None, None)?;
        let exact_residual = exact.z_residual.max(exact.x_residual).max(exact.isometry_defect);
        let mut ratios = Vec::new();
        for delta in PERTURBATIONS {
            let h = linalg::random_hermitian(d, &mut rng);
            let xd = observable(linalg::matrix_sign(&(&x_matrix + h * c(delta, 0.0))))?;
            // Z is diagonalized exactly, so the perturbation shows up in the X residual
            let rep = jordan_extract(&z, &xd, None, None)?;
            let scale = 5.0 * delta.sqrt();
            ratios.push((rep.z_residual / scale, rep.x_residual / scale));
        }
        let rec = TrialRecord::new(i, seed, format!("D={d}")).value(exact_residual).detail(format!(
            "residual/5√δ (Z, X) at δ=1e-2: ({:.3e}, {:.3e}), δ=1e-4: ({:.3e}, {:.3e})",
            ratios[0].0, ratios[0].1, ratios[1].0, ratios[1].1
        ));
        Ok((rec, exact_residual, ratios))
    })?;
    let exact_max = results.iter().map(|r| r.1).fold(0.0, f64::max);
    let worst = |pick: fn(&(f64, f64)) -> f64, k: usize| results.iter().map(|r| pick(&r.2[k])).fold(0.0, f64::max);
    let (z_ratios, x_ratios) = ([worst(|p| p.0, 0), worst(|p| p.0, 1)], [worst(|p| p.1, 0), worst(|p| p.1, 1)]);
    let overall = z_ratios.iter().chain(&x_ratios).copied().fold(0.0, f64::max);
    Ok(Outcome {
        parameters: json!({"dimensions": JORDAN_DIMS, "perturbations": PERTURBATIONS}),
        statistics: stats([
            ("exact_max_residual", exact_max),
            ("z_ratio_1e-2", z_ratios[0]),
            ("z_ratio_1e-4", z_ratios[1]),
            ("x_ratio_1e-2", x_ratios[0]),
            ("x_ratio_1e-4", x_ratios[1]),
            ("perturbed_max_ratio", overall),
        ]),
        trials: results.into_iter().map(|r| r.0).collect(),
        details: None,
    })
}

const MODERATE_Q: u32 = 17;
const MODERATE_SIZES: [usize; 3] = [8, 12, 16];

fn moderate_frequency(ctx: &Ctx) -> Result<Outcome> {
    let per = ctx.trials;
    let results = ctx.run_range(0, per * MODERATE_SIZES.len() as u64, |i, seed| {
        let n = MODERATE_SIZES[(i / per) as usize];
        let c = ResidueMatrix::random(MODERATE_Q, 1, n, &mut SeedTree::new(seed).rng());
        let moderate = is_moderate_matrix(&c)?;
        Ok(TrialRecord::new(i, seed, if moderate { "moderate" } else { "not-moderate" }).detail(format!("n={n}")))
    })?;
    let mut s = BTreeMap::new();
    let mut margin = f64::INFINITY;
    for (k, n) in MODERATE_SIZES.iter().enumerate() {
        let chunk = &results[k * per as usize..(k + 1) * per as usize];
        let freq = chunk.iter().filter(|t| t.outcome == "moderate").count() as f64 / per as f64;
        let bound = 1.0 - f64::from(MODERATE_Q) * 2f64.powf(-(*n as f64) / 32.0);
        s.insert(format!("frequency_n{n}"), freq);
        s.insert(format!("bound_n{n}"), bound);
        margin = margin.min(freq - bound);
    }
    s.insert("min_margin".into(), margin);
    Ok(Outcome {
        parameters: json!({"q": MODERATE_Q, "ell": 1, "n": MODERATE_SIZES, "samples_per_n": per}),
        trials: results,
        statistics: s,
        details: None,
    })
}

const HARDCORE_SIZES: [usize; 5] = [8, 10, 12, 14, 16];

fn hardcore_table(ctx: &Ctx) -> Result<Outcome> {
    let per = ctx.trials;
    let results = ctx.run_range(0, per * HARDCORE_SIZES.len() as u64, |i, seed| {
        let n = HARDCORE_SIZES[(i / per) as usize];
        let c = ResidueMatrix::random(MODERATE_Q, 1, n, &mut SeedTree::new(seed).rng());
        let d_hat = BitString::new(vec![1; n])?;
        let table = hardcore_distance_oracle(&c, &d_hat, HardcoreModulus::Eight)?;
        let rec = TrialRecord::new(i, seed, format!("n={n}"))
            .value(table.mean_distance)
            .detail(format!("max {:.6} bound {:.6}", table.max_distance, table.bound));
        Ok((rec, table.mean_distance, table.max_distance, table.bound))
    })?;
    let mut s = BTreeMap::new();
    let mut means = Vec::new();
    let mut within_bound = true;
    for (k, n) in HARDCORE_SIZES.iter().enumerate() {
        let chunk = &results[k * per as usize..(k + 1) * per as usize];
        let mean = chunk.iter().map(|r| r.1).sum::<f64>() / per as f64;
        let max = chunk.iter().map(|r| r.2).fold(0.0, f64::max);
        within_bound &= chunk.iter().all(|r| r.2 <= r.3);
        s.insert(format!("mean_distance_n{n}"), mean);
        s.insert(format!("max_distance_n{n}"), max);
        s.insert(format!("bound_n{n}"), hardcore_bound(MODERATE_Q, 1, *n));
        means.push(mean);
    }
    let monotone = means.windows(2).all(|w| w[1] <= w[0]);
    s.insert("non_increasing".into(), f64::from(u8::from(monotone)));
    s.insert("within_bound".into(), f64::from(u8::from(within_bound)));
    Ok(Outcome {
        parameters: json!({"q": MODERATE_Q, "ell": 1, "n": HARDCORE_SIZES, "modulus": 8, "d_hat": "all ones", "matrices_per_n": per}),
        trials: results.into_iter().map(|r| r.0).collect(),
        statistics: s,
        details: None,
    })
}

fn verdict_label(v: Verdict) -> &'static str {
    match v {
        Verdict::Accept => "accept",
        Verdict::Reject => "reject",
        Verdict::Abort => "abort",
    }
}

fn fk_flipall(ctx: &Ctx) -> Result<Outcome> {
    let lib = library(PatternId::Teleport);
    let trials = ctx.run(|i, seed| {
        let t = fk_delegate(&lib.pattern, &lib.graph, ServerKind::FlipAll, seed)?;
        Ok(TrialRecord::new(i, seed, verdict_label(t.verdict)).value(t.failed_traps.len() as f64))
    })?;
    let rejects = trials.iter().filter(|t| t.outcome == "reject").count() as u64;
    Ok(Outcome {
        parameters: json!({"pattern": "teleport", "server": "flipall", "source": "direct"}),
        trials,
        statistics: stats([("rejects", rejects as f64), ("reject_rate", rejects as f64 / ctx.trials as f64)]),
        details: None,
    })
}

fn rsp_fk_trial(i: u64, seed: u64, rounds: u64, delta: f64) -> Result<(TrialRecord, Option<usize>)> {
    let cfg = ProtocolConfig { max_rounds: rounds, delta, ..Default::default() };
    let report = rsp_fk_run(&cfg, PatternId::Teleport, ServerKind::Honest, seed)?;
    let t = &report.transcript;
    let output = (t.verdict == Verdict::Accept).then(|| t.output_index());
    let mut rec = TrialRecord::new(i, seed, verdict_label(t.verdict));
    if let Some(o) = output {
        rec = rec.value(o as f64);
    }
    if let Some(reason) = &t.abort {
        rec = rec.detail(reason.clone());
    }
    Ok((rec, output))
}

fn rsp_fk_honest(ctx: &Ctx) -> Result<Outcome> {
    let (rounds, delta) = (ctx.rounds(20_000), ctx.delta(0.15));
    let trials = ctx.run(|i, seed| rsp_fk_trial(i, seed, rounds, delta).map(|r| r.0))?;
    let count = |label: &str| trials.iter().filter(|t| t.outcome == label).count() as f64;
    let (accepts, rejects, aborts) = (count("accept"), count("reject"), count("abort"));
    Ok(Outcome {
        parameters: json!({"pattern": "teleport", "rounds": rounds, "delta": delta, "server": "honest"}),
        trials,
        statistics: stats([
            ("accepts", accepts),
            ("rejects", rejects),
            ("aborts", aborts),
            ("accept_rate", accepts / ctx.trials as f64),
        ]),
        details: None,
    })
}

/// Runs are drawn in batches until `trials` of them have been accepted.
fn rsp_fk_distribution(ctx: &Ctx) -> Result<Outcome> {
    let (rounds, delta) = (ctx.rounds(2000), ctx.delta(0.15));
    let exact = library(PatternId::Teleport).circuit.output_distribution()?;
    let mut records = Vec::new();
    let mut counts = vec![0u64; exact.len()];
    let mut accepted = 0u64;
    let mut next = 0u64;
    while accepted < ctx.trials {
        // ERR and rejection are rare, so a small surplus usually suffices
        let batch = (ctx.trials - accepted) + (ctx.trials - accepted) / 4 + 8;
        if next > 20 * ctx.trials {
            return Err(HarnessError::Exhausted(format!("only {accepted} of {next} runs accepted")));
        }
        for (rec, output) in ctx.run_range(next, batch, |i, seed| rsp_fk_trial(i, seed, rounds, delta))? {
            if let Some(o) = output.filter(|_| accepted < ctx.trials) {
                counts[o] += 1;
                accepted += 1;
            }
            records.push(rec);
        }
        next += batch;
    }
    let empirical = normalize(&counts);
    let mut s = stats([
        ("accepted", accepted as f64),
        ("runs", next as f64),
        ("total_variation", total_variation(&empirical, &exact)),
    ]);
    for (k, (p, q)) in empirical.iter().zip(&exact).enumerate() {
        s.insert(format!("empirical_{k}"), *p);
        s.insert(format!("exact_{k}"), *q);
    }
    Ok(Outcome {
        parameters: json!({"pattern": "teleport", "rounds": rounds, "delta": delta, "server": "honest", "accepted_runs": ctx.trials}),
        trials: records,
        statistics: s,
        details: None,
    })
}

/// A random but reproducible configuration for the transport comparison.
fn random_config(rng: &mut SimRng, seed: u64) -> (ProtocolConfig, StrategyKind) {
    let backend = if rng.random_bool(0.2) { Backend::Lwe } else { Backend::Mock };
    let max_rounds = match backend {
        Backend::Lwe => rng.random_range(5..=25),
        Backend::Mock => rng.random_range(10..=200),
    };
    let cfg = ProtocolConfig {
        lambda: rng.random_range(8..=24),
        max_rounds,
        delta: rng.random_range(0.05..0.3),
        basis: if rng.random_bool(0.5) { Basis::X } else { Basis::Z },
        backend,
        buffer_mode: if rng.random_bool(0.5) { BufferMode::Buffered } else { BufferMode::Direct },
        seed,
        ..Default::default()
    };
    let strategy = match rng.random_range(0..4) {
        0 => StrategyKind::Honest,
        1 => StrategyKind::ZOnly,
        2 => StrategyKind::RandomAnswer,
        _ => StrategyKind::PreimageDefector { rate: 0.3 },
    };
    (cfg, strategy)
}

fn transport_determinism(ctx: &Ctx) -> Result<Outcome> {
    let trials = ctx.run(|i, seed| {
        let (cfg, strategy) = random_config(&mut SeedTree::new(seed).named("config").rng(), seed);
        let over = |transport| run_session(&ProtocolConfig { transport, ..cfg }, strategy);
        let (inproc, tcp) = (over(TransportMode::InProc)?, over(TransportMode::Tcp)?);
        let identical = inproc.transcript.frame_bytes() == tcp.transcript.frame_bytes()
            && inproc.outcome == tcp.outcome
            && inproc.prover_qubit == tcp.prover_qubit;
        Ok(TrialRecord::new(i, seed, if identical { "identical" } else { "differ" })
            .value(inproc.transcript.frames.len() as f64)
            .detail(format!(
                "{:?} {:?} {} N={} {}",
                cfg.backend, cfg.buffer_mode, cfg.basis, cfg.max_rounds, strategy
            )))
    })?;
    let identical = trials.iter().filter(|t| t.outcome == "identical").count() as f64;
    Ok(Outcome {
        parameters: json!({"transports": ["inproc", "tcp"]}),
        trials,
        statistics: stats([("identical", identical), ("configs", ctx.trials as f64)]),
        details: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_listed_experiment_is_dispatched() {
        for info in EXPERIMENTS {
            // the χ² test refuses fewer than five samples per category
            let trials = if info.name == "theta-uniformity" { 40 } else { 2 };
            let spec = ExperimentSpec { rounds: Some(20), workers: Some(1), ..ExperimentSpec::new(info.name, 1).trials(trials) };
            let report = run_experiment(&spec).unwrap_or_else(|e| panic!("{}: {e}", info.name));
            assert_eq!(report.experiment, info.name);
        }
    }

    #[test]
    fn zero_trials_is_an_error() {
        assert!(matches!(run_experiment(&ExperimentSpec::new("fk-flipall", 0).trials(0)), Err(HarnessError::NoTrials)));
        assert!(matches!(run_experiment(&ExperimentSpec::new("nope", 0)), Err(HarnessError::UnknownExperiment(_))));
    }
}
