//! The acceptance criteria, each run by name through the experiment registry
//! with one fixed seed. Prints one PASS/FAIL line per criterion, then fails
//! if any criterion did.

use brsp_harness::{run_experiment, ExperimentSpec, ReportRecord};

const SEED: u64 = 0x5EED_2026;

const OPT_Q: f64 = 0.8535533906;
const QRAC_TOL: f64 = 1e-9;
const QRAC_SECONDS: f64 = 10.0;
const HONEST_ACCEPT_MIN: f64 = 0.85;
const HONEST_SECONDS: f64 = 120.0;
const UNIFORMITY_P_MIN: f64 = 0.001;
const SOUNDNESS_ABORTS_MIN: f64 = 99.0;
const EXACT_RESIDUAL_MAX: f64 = 1e-8;
const ORACLE_SECONDS: f64 = 60.0;
const FK_ACCEPTS_MIN: f64 = 95.0;
const FK_TV_MAX: f64 = 0.05;

fn run(name: &str) -> ReportRecord {
    run_experiment(&ExperimentSpec::new(name, SEED)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn stat(r: &ReportRecord, key: &str) -> f64 {
    r.stat(key).unwrap_or_else(|| panic!("{} has no statistic {key}", r.experiment))
}

struct Verdicts(Vec<(u32, bool)>);

impl Verdicts {
    fn record(&mut self, id: u32, title: &str, pass: bool, detail: String) {
        println!("{} {id}. {title}: {detail}", if pass { "PASS" } else { "FAIL" });
        self.0.push((id, pass));
    }
}

fn main() {
    let mut v = Verdicts(Vec::new());

    let r = run("qrac-optimum");
    let (canonical, searched, secs) = (stat(&r, "canonical_success"), stat(&r, "search_success"), r.wall_clock_seconds);
    let closed_form = 0.5 + 0.5 / 2f64.sqrt();
    v.record(
        1,
        "QRAC optimum",
        (canonical - OPT_Q).abs() <= QRAC_TOL
            && (closed_form - OPT_Q).abs() <= QRAC_TOL
            && searched <= closed_form + QRAC_TOL
            && secs < QRAC_SECONDS,
        format!("canonical {canonical:.10}, best of 10^4 searched {searched:.10}, {secs:.2}s"),
    );

    let r = run("honest-accept-rate");
    let (rate, matched, secs) = (stat(&r, "accept_rate"), stat(&r, "output_match_rate"), r.wall_clock_seconds);
    v.record(
        2,
        "completeness",
        rate >= HONEST_ACCEPT_MIN && matched == 1.0 && secs < HONEST_SECONDS,
        format!(
            "accept {rate:.3} (95% CI {:.3}..{:.3}), outputs matching the prover's qubit {matched:.3}, {secs:.1}s",
            stat(&r, "accept_rate_lo95"),
            stat(&r, "accept_rate_hi95")
        ),
    );

    let r = run("theta-uniformity");
    let p = stat(&r, "p_value");
    v.record(
        3,
        "output uniformity",
        p > UNIFORMITY_P_MIN,
        format!("χ² {:.2} over (θ̂, v̂), p = {p:.4}", stat(&r, "chi_square")),
    );

    let zonly = run("zonly-soundness");
    let random = run("random-soundness");
    let (za, ra) = (stat(&zonly, "aborts"), stat(&random, "aborts"));
    v.record(
        4,
        "soundness smoke tests",
        za >= SOUNDNESS_ABORTS_MIN && ra >= SOUNDNESS_ABORTS_MIN,
        format!("Z-only aborted {za}/100, random-answer aborted {ra}/100"),
    );

    let r = run("jordan-residuals");
    let exact = stat(&r, "exact_max_residual");
    let worst = stat(&r, "perturbed_max_ratio");
    v.record(
        5,
        "rigidity numerics",
        exact <= EXACT_RESIDUAL_MAX && worst <= 1.0,
        format!(
            "exact residual {exact:.2e}; residual/5√δ Z {:.2e}, {:.2e} and X {:.2e}, {:.2e} at δ = 1e-2, 1e-4",
            stat(&r, "z_ratio_1e-2"),
            stat(&r, "z_ratio_1e-4"),
            stat(&r, "x_ratio_1e-2"),
            stat(&r, "x_ratio_1e-4")
        ),
    );

    let moderate = run("moderate-frequency");
    let hardcore = run("hardcore-table");
    let margin = stat(&moderate, "min_margin");
    let monotone = stat(&hardcore, "non_increasing") == 1.0;
    let bounded = stat(&hardcore, "within_bound") == 1.0;
    let secs = moderate.wall_clock_seconds + hardcore.wall_clock_seconds;
    let means: Vec<String> =
        [8, 10, 12, 14, 16].iter().map(|n| format!("{:.4}", stat(&hardcore, &format!("mean_distance_n{n}")))).collect();
    v.record(
        6,
        "moderate matrices and hardcore tables",
        margin >= 0.0 && monotone && bounded && secs < ORACLE_SECONDS,
        format!(
            "moderate frequency {:.3}/{:.3}/{:.3} at n = 8/12/16 (min margin over bound {margin:.3}); \
             mean distance n = 8..16: {}; non-increasing {monotone}; within bound {bounded}; {secs:.2}s",
            stat(&moderate, "frequency_n8"),
            stat(&moderate, "frequency_n12"),
            stat(&moderate, "frequency_n16"),
            means.join(" ")
        ),
    );

    let flip = run("fk-flipall");
    let honest = run("rsp-fk-honest");
    let dist = run("rsp-fk-distribution");
    let (rejects, accepts, tv) = (stat(&flip, "rejects"), stat(&honest, "accepts"), stat(&dist, "total_variation"));
    v.record(
        7,
        "delegation layer",
        rejects == 100.0 && accepts >= FK_ACCEPTS_MIN && tv < FK_TV_MAX,
        format!(
            "flip-all rejected {rejects}/100; honest remote-prepared runs accepted {accepts}/100; \
             TV {tv:.4} over {} accepted runs",
            stat(&dist, "accepted")
        ),
    );

    let r = run("transport-determinism");
    let identical = stat(&r, "identical");
    v.record(
        8,
        "transport determinism",
        identical == stat(&r, "configs") && identical == 20.0,
        format!("{identical}/20 configurations byte-identical over in-process and TCP"),
    );

    let failed: Vec<u32> = v.0.iter().filter(|(_, pass)| !pass).map(|(id, _)| *id).collect();
    println!("{} of {} criteria passed", v.0.len() - failed.len(), v.0.len());
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
