use brsp_core::qsim::QubitState;
use brsp_core::{rng_from_seed, SimRng};
use brsp_dqc::fk::{blind_angle, corrected_angle, run_delegation, secrets_from_preparations, PreparedQubit};
use brsp_dqc::{
    fk_delegate, library, prepare_server_state, rsp_fk_run, rsp_fk_run_with, DqcError, FkServer, GraphSpec,
    MeasurementPattern, PatternId, Role, ServerKind, StateSource, StateVector, Verdict,
};
use brsp_protocol::{
    run_session, Basis, ErrCause, ProtocolConfig, ProtocolError, ProverEndpoint, Responder, RspOutcome, StrategyKind,
};
use brsp_protocol::wire::Message;
use rand::Rng;

/// A computation line with traps hanging off it, each trap shielded by one
/// or two dummies that also touch random computation vertices.
fn random_pattern(rng: &mut SimRng) -> (GraphSpec, MeasurementPattern) {
    let line = rng.random_range(1..=4usize);
    let mut edges: Vec<(usize, usize)> = (1..line).map(|i| (i - 1, i)).collect();
    let flow: Vec<(usize, usize)> = (1..line).map(|i| (i - 1, i)).collect();
    let (mut dummies, mut traps) = (Vec::new(), Vec::new());
    let mut next = line;
    while next + 3 <= 12 && (traps.is_empty() || rng.random_bool(0.5)) {
        let trap = next;
        traps.push(trap);
        next += 1;
        for _ in 0..rng.random_range(1..=2) {
            let dummy = next;
            next += 1;
            dummies.push(dummy);
            edges.push((trap, dummy));
            for v in 0..line {
                if rng.random_bool(0.5) {
                    edges.push((v, dummy));
                }
            }
        }
    }
    let graph = GraphSpec::new(next, &edges, &[0], &[line - 1], &flow).unwrap();
    let phi = (0..next).map(|v| if v < line { rng.random_range(0..8) } else { 0 }).collect();
    let pattern = MeasurementPattern::new(&graph, phi, &dummies, &traps).unwrap();
    (graph, pattern.with_random_secrets(rng))
}

#[test]
fn honest_traps_always_pass() {
    let mut rng = rng_from_seed(11);
    for seed in 0..1000 {
        let (graph, pattern) = random_pattern(&mut rng);
        let t = fk_delegate(&pattern, &graph, ServerKind::Honest, seed).unwrap();
        assert_eq!(t.verdict, Verdict::Accept, "seed {seed}");
        for rec in t.vertices.iter().filter(|r| r.role == Role::Trap) {
            assert_eq!(rec.s, Some(0));
        }
    }
}

#[test]
fn flipping_servers_hit_the_traps() {
    for id in PatternId::ALL {
        let lib = library(id);
        let trap = *lib.pattern.traps.iter().next().unwrap();
        for seed in 0..200 {
            let t = fk_delegate(&lib.pattern, &lib.graph, ServerKind::FlipAll, seed).unwrap();
            assert_eq!(t.verdict, Verdict::Reject);
            assert_eq!(t.failed_traps.len(), lib.pattern.traps.len());
            let t = fk_delegate(&lib.pattern, &lib.graph, ServerKind::FlipVertex { vertex: trap }, seed).unwrap();
            assert_eq!(t.failed_traps, [trap]);
            // a flip away from the traps goes unnoticed
            let t = fk_delegate(&lib.pattern, &lib.graph, ServerKind::FlipVertex { vertex: 0 }, seed).unwrap();
            assert_eq!(t.verdict, Verdict::Accept);
        }
    }
}

fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>() / 2.0
}

#[test]
fn outputs_match_the_circuit() {
    for id in PatternId::ALL {
        let lib = library(id);
        let exact = lib.circuit.output_distribution().unwrap();
        let mut counts = vec![0usize; exact.len()];
        let runs = 1000;
        for seed in 0..runs {
            let t = fk_delegate(&lib.pattern, &lib.graph, ServerKind::Honest, seed).unwrap();
            counts[t.output_index()] += 1;
        }
        let empirical: Vec<f64> = counts.iter().map(|&c| c as f64 / runs as f64).collect();
        let tv = total_variation(&empirical, &exact);
        assert!(tv < 0.05, "{id}: tv {tv}, {empirical:?} vs {exact:?}");
    }
}

#[test]
fn dummies_isolate_traps_exactly() {
    let mut rng = rng_from_seed(12);
    for _ in 0..200 {
        let (graph, pattern) = random_pattern(&mut rng);
        let full = prepare_server_state(&pattern, &graph, &StateSource::DirectQuantum).unwrap();
        // traps and dummies unentangled, computation vertices entangled only among themselves
        let qubits: Vec<QubitState> = (0..graph.vertices())
            .map(|v| match pattern.role(v) {
                Role::Dummy => QubitState::basis(pattern.secrets.d[v]),
                _ => QubitState::plus_index(pattern.secrets.theta[v]),
            })
            .collect();
        let mut expected = StateVector::product(&qubits).unwrap();
        for (a, b) in graph.edges() {
            if pattern.role(a) == Role::Computation && pattern.role(b) == Role::Computation {
                expected.cz(a, b);
            }
        }
        assert!((full.fidelity(&expected) - 1.0).abs() < 1e-10);
    }
}

#[test]
fn trap_between_dummies_stays_put() {
    let graph = GraphSpec::new(3, &[(0, 1), (1, 2)], &[], &[], &[]).unwrap();
    for theta in 0..8 {
        for (d0, d2) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            let mut p = MeasurementPattern::new(&graph, vec![0; 3], &[0, 2], &[1]).unwrap();
            p.secrets.theta[1] = theta;
            p.secrets.d = vec![d0, 0, d2];
            let state = prepare_server_state(&p, &graph, &StateSource::DirectQuantum).unwrap();
            let expected = StateVector::product(&[
                QubitState::basis(d0),
                QubitState::plus_index(theta),
                QubitState::basis(d2),
            ])
            .unwrap();
            assert!((state.fidelity(&expected) - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn blind_angles_are_a_one_time_pad() {
    for phi in 0..8 {
        for s_x in 0..2 {
            for s_z in 0..2 {
                let mut counts = [0u32; 8];
                for theta in 0..8 {
                    for r in 0..2 {
                        counts[blind_angle(corrected_angle(phi, s_x, s_z), theta, r) as usize] += 1;
                    }
                }
                assert_eq!(counts, [2; 8]);
            }
        }
    }
}

fn honest_preparations(pattern: &MeasurementPattern, rounds: u64, seed: u64) -> Vec<PreparedQubit> {
    (0..pattern.vertices())
        .map(|v| {
            let basis = if pattern.role(v) == Role::Dummy { Basis::Z } else { Basis::X };
            (0..)
                .map(|k| {
                    let cfg = ProtocolConfig { basis, max_rounds: rounds, seed: seed * 1000 + v as u64 * 50 + k, ..Default::default() };
                    run_session(&cfg, StrategyKind::Honest).unwrap()
                })
                .find(|r| !r.outcome.is_err())
                .map(|r| PreparedQubit { outcome: r.outcome, qubit: r.prover_qubit })
                .unwrap()
        })
        .collect()
}

#[test]
fn prepared_qubits_reproduce_the_direct_state() {
    for id in PatternId::ALL {
        let lib = library(id);
        for seed in 0..5 {
            let preps = honest_preparations(&lib.pattern, 60, seed);
            let mut pattern = lib.pattern.clone().with_random_secrets(&mut rng_from_seed(seed));
            secrets_from_preparations(&mut pattern, &lib.graph, &preps).unwrap();
            let direct = prepare_server_state(&pattern, &lib.graph, &StateSource::DirectQuantum).unwrap();
            let remote = prepare_server_state(&pattern, &lib.graph, &StateSource::FromRsp(preps)).unwrap();
            assert!((direct.fidelity(&remote) - 1.0).abs() < 1e-10);
        }
    }
}

#[test]
fn mismatched_preparations_are_refused() {
    let lib = library(PatternId::Teleport);
    let mut preps = honest_preparations(&lib.pattern, 30, 1);
    let dummy = *lib.pattern.dummies.iter().next().unwrap();
    preps[dummy].outcome = RspOutcome::X { theta: 0 };
    let err = prepare_server_state(&lib.pattern, &lib.graph, &StateSource::FromRsp(preps.clone())).unwrap_err();
    assert!(matches!(err, DqcError::BranchMismatch { expected: "Z", .. }));
    preps[dummy].outcome = RspOutcome::Err { cause: ErrCause::NoPreimage };
    let err = prepare_server_state(&lib.pattern, &lib.graph, &StateSource::FromRsp(preps.clone())).unwrap_err();
    assert!(matches!(err, DqcError::PreparationErr { .. }));
    preps.pop();
    assert!(prepare_server_state(&lib.pattern, &lib.graph, &StateSource::FromRsp(preps)).is_err());
}

struct Garbled;

impl FkServer for Garbled {
    fn measure(&mut self, state: &mut StateVector, v: usize, delta: u8, rng: &mut SimRng) -> u8 {
        state.measure_xy(v, delta, rng) + 2
    }
}

#[test]
fn non_bit_answers_abort() {
    let lib = library(PatternId::Cz);
    let state = prepare_server_state(&lib.pattern, &lib.graph, &StateSource::DirectQuantum).unwrap();
    let t = run_delegation(&lib.pattern, &lib.graph, state, &mut Garbled, &mut rng_from_seed(1), &mut rng_from_seed(2))
        .unwrap();
    assert_eq!(t.verdict, Verdict::Abort);
    assert!(t.abort.is_some());
}

fn small() -> ProtocolConfig {
    ProtocolConfig { max_rounds: 100, ..Default::default() }
}

#[test]
fn remote_preparation_feeds_the_delegation() {
    let mut completed = 0;
    for seed in 0..10 {
        let honest = rsp_fk_run(&small(), PatternId::Teleport, ServerKind::Honest, seed).unwrap();
        assert_eq!(honest.sessions.len(), honest.transcript.vertices.len().max(honest.sessions.len()));
        if honest.transcript.verdict == Verdict::Abort {
            continue;
        }
        completed += 1;
        assert_eq!(honest.transcript.verdict, Verdict::Accept);
        let flipped = rsp_fk_run(&small(), PatternId::Teleport, ServerKind::FlipAll, seed).unwrap();
        assert_eq!(flipped.transcript.verdict, Verdict::Reject);
        assert_eq!(flipped.sessions, honest.sessions);
    }
    assert!(completed >= 5, "{completed}/10 completed");
}

struct HangUp;

impl Responder for HangUp {
    fn respond(&mut self, _: &Message) -> Result<Vec<Message>, ProtocolError> {
        Err(ProtocolError::Disconnected)
    }

    fn final_qubit(&self) -> Option<QubitState> {
        None
    }
}

#[test]
fn one_failed_preparation_aborts_the_run() {
    for seed in 0..5 {
        let report = rsp_fk_run_with(&small(), PatternId::Teleport, ServerKind::Honest, seed, |v, s| {
            if v == 2 {
                Box::new(HangUp)
            } else {
                Box::new(ProverEndpoint::new(StrategyKind::Honest, s))
            }
        })
        .unwrap();
        assert_eq!(report.transcript.verdict, Verdict::Abort);
        assert!(report.sessions.iter().any(|s| s.outcome.is_err()));
    }
}

mod properties {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(128))]

        #[test]
        fn traps_separate_honest_from_flipping(pattern_seed in any::<u64>(), run_seed in any::<u64>()) {
            let (graph, pattern) = random_pattern(&mut rng_from_seed(pattern_seed));
            let honest = fk_delegate(&pattern, &graph, ServerKind::Honest, run_seed).unwrap();
            prop_assert_eq!(honest.verdict, Verdict::Accept);
            let flipped = fk_delegate(&pattern, &graph, ServerKind::FlipAll, run_seed).unwrap();
            prop_assert_eq!(flipped.failed_traps.len(), pattern.traps.len());
        }
    }
}
