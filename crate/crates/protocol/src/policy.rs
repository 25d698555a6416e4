//! Round classification and the abort rule.

use brsp_core::OPT_Q;
use serde::{Deserialize, Serialize};

/// Which check a round ended up performing.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestKind {
    Preimage,
    /// Every Z-measurement test, whatever `G` was; only `G = 1` can fail.
    ZMeas,
    /// `X_θ` test with `θ = θ̂`.
    XMeasA,
    /// `X_θ` test run as a QRAC test.
    XMeasB,
    /// An `X_θ` test where neither part applies.
    Vacuous,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Flag {
    Pass,
    FailP,
    FailZ,
    FailX,
    FailQ,
}

impl TestKind {
    /// The only failing flag a round of this kind may carry.
    pub fn failure(self) -> Option<Flag> {
        match self {
            TestKind::Preimage => Some(Flag::FailP),
            TestKind::ZMeas => Some(Flag::FailZ),
            TestKind::XMeasA => Some(Flag::FailX),
            TestKind::XMeasB => Some(Flag::FailQ),
            TestKind::Vacuous => None,
        }
    }

    pub fn allows(self, flag: Flag) -> bool {
        flag == Flag::Pass || self.failure() == Some(flag)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryCount {
    pub tests: u64,
    pub fails: u64,
}

impl CategoryCount {
    /// Failure fraction; an empty category counts as 0.
    pub fn fraction(&self) -> f64 {
        if self.tests == 0 {
            0.0
        } else {
            self.fails as f64 / self.tests as f64
        }
    }
}

/// Per-category test and failure counts over the test rounds.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tally {
    pub preimage: CategoryCount,
    pub z: CategoryCount,
    pub x_a: CategoryCount,
    pub qrac: CategoryCount,
    pub vacuous: u64,
}

impl Tally {
    pub fn record(&mut self, kind: TestKind, flag: Flag) {
        let fail = u64::from(flag != Flag::Pass);
        let slot = match kind {
            TestKind::Preimage => &mut self.preimage,
            TestKind::ZMeas => &mut self.z,
            TestKind::XMeasA => &mut self.x_a,
            TestKind::XMeasB => &mut self.qrac,
            TestKind::Vacuous => {
                self.vacuous += 1;
                return;
            }
        };
        slot.tests += 1;
        slot.fails += fail;
    }

    pub fn rounds(&self) -> u64 {
        self.preimage.tests + self.z.tests + self.x_a.tests + self.qrac.tests + self.vacuous
    }

    /// Mean pass rate over the four categories (empty ones count as 1). The
    /// honest prover's expectation is `3/4 + opt_Q/4`.
    pub fn aggregate_score(&self) -> f64 {
        [self.preimage, self.z, self.x_a, self.qrac].iter().map(|c| 1.0 - c.fraction()).sum::<f64>() / 4.0
    }
}

/// Labels (a)–(d) of the abort rule.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AbortCondition {
    Preimage,
    ZTest,
    XTest,
    Qrac,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AbortReason {
    pub condition: AbortCondition,
    pub fraction: f64,
    pub threshold: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AbortPolicy {
    pub delta: f64,
}

impl AbortPolicy {
    pub fn new(delta: f64) -> Self {
        AbortPolicy { delta }
    }

    pub fn thresholds(&self) -> [(AbortCondition, f64); 4] {
        [
            (AbortCondition::Preimage, self.delta),
            (AbortCondition::ZTest, self.delta),
            (AbortCondition::XTest, self.delta),
            (AbortCondition::Qrac, (1.0 - OPT_Q) + self.delta),
        ]
    }

    /// The first violated condition, or `None` to continue to the final round.
    pub fn evaluate(&self, tally: &Tally) -> Option<AbortReason> {
        let counts = [tally.preimage, tally.z, tally.x_a, tally.qrac];
        self.thresholds().into_iter().zip(counts).find_map(|((condition, threshold), count)| {
            let fraction = count.fraction();
            (fraction > threshold).then_some(AbortReason { condition, fraction, threshold })
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn tally(c: [(u64, u64); 4]) -> Tally {
        let cc = |(tests, fails): (u64, u64)| CategoryCount { tests, fails: fails.min(tests) };
        Tally { preimage: cc(c[0]), z: cc(c[1]), x_a: cc(c[2]), qrac: cc(c[3]), vacuous: 0 }
    }

    #[test]
    fn empty_tally_accepts() {
        assert_eq!(AbortPolicy::new(0.05).evaluate(&Tally::default()), None);
    }

    #[test]
    fn qrac_threshold_is_offset() {
        let p = AbortPolicy::new(0.1);
        // 24% QRAC failures is within (1 − 0.8536) + 0.1 ≈ 0.246
        assert_eq!(p.evaluate(&tally([(0, 0), (0, 0), (0, 0), (100, 24)])), None);
        let r = p.evaluate(&tally([(0, 0), (0, 0), (0, 0), (100, 25)])).unwrap();
        assert_eq!(r.condition, AbortCondition::Qrac);
        assert!((r.threshold - (1.0 - OPT_Q + 0.1)).abs() < 1e-15);
    }

    #[test]
    fn boundary_is_strict() {
        let p = AbortPolicy::new(0.25);
        assert_eq!(p.evaluate(&tally([(4, 1), (0, 0), (0, 0), (0, 0)])), None);
        assert!(p.evaluate(&tally([(4, 2), (0, 0), (0, 0), (0, 0)])).is_some());
    }

    #[test]
    fn flags_per_kind() {
        assert!(TestKind::Vacuous.allows(Flag::Pass));
        assert!(!TestKind::Vacuous.allows(Flag::FailX));
        assert!(TestKind::ZMeas.allows(Flag::FailZ));
        assert!(!TestKind::ZMeas.allows(Flag::FailP));
    }

    proptest! {
        #[test]
        fn one_more_failure_never_rescues_an_abort(
            counts in prop::array::uniform4((0u64..60, 0u64..60)),
            which in 0usize..4,
            delta in 0.01f64..0.5,
        ) {
            let policy = AbortPolicy::new(delta);
            let before = tally(counts);
            let mut after = before;
            let slot = match which {
                0 => &mut after.preimage,
                1 => &mut after.z,
                2 => &mut after.x_a,
                _ => &mut after.qrac,
            };
            slot.tests += 1;
            slot.fails += 1;
            if policy.evaluate(&before).is_some() {
                prop_assert!(policy.evaluate(&after).is_some());
            }
        }
    }
}
