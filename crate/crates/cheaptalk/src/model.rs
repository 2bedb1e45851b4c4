//! Game primitives and validation of every standing assumption.
//!
//! A [`GameSpec`] bundles the ordered states, both players' proposal payoffs
//! (status quo is normalized to zero), the common prior, and the per-state
//! high-signal probabilities. Validation admits any number of states with the
//! threshold payoff structure; the solver modules additionally require the
//! three-state scenario with a middle disagreement state.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Absolute tolerance for the prior summing to one. Strict inequalities are
/// enforced with zero tolerance: a tie is a violation.
pub const PRIOR_SUM_TOL: f64 = 1e-12;

/// A named model assumption, used to report exactly which one failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Assumption {
    /// Prior entries nonnegative and summing to one.
    PriorSimplex,
    /// State labels strictly increasing.
    StateOrdering,
    /// High-signal probabilities strictly increasing and interior.
    SignalAccuracyOrdering,
    /// Receiver's proposal payoff weakly above the senders' in every state.
    PayoffDominance,
    /// Payoffs strictly increasing in the state.
    PayoffMonotonicity,
    /// Payoffs switch sign exactly once, from negative to positive.
    PayoffThreshold,
    /// Three-state sign pattern: bottom and top are agreement states, the
    /// middle state has the receiver for and the senders against.
    DisagreementPattern,
    /// The senders' threshold of doubt weakly exceeds the receiver's.
    ThresholdOfDoubtOrdering,
    /// Field lengths agree and there are at least three states.
    Shape,
}

impl Assumption {
    pub fn label(self) -> &'static str {
        match self {
            Assumption::PriorSimplex => "prior simplex",
            Assumption::StateOrdering => "state ordering",
            Assumption::SignalAccuracyOrdering => "signal accuracy ordering",
            Assumption::PayoffDominance => "receiver payoff dominance",
            Assumption::PayoffMonotonicity => "payoff monotonicity",
            Assumption::PayoffThreshold => "payoff sign threshold",
            Assumption::DisagreementPattern => "disagreement-state sign pattern",
            Assumption::ThresholdOfDoubtOrdering => "threshold-of-doubt ordering",
            Assumption::Shape => "field shape",
        }
    }
}

/// One violated assumption with both sides of the failed comparison.
#[derive(Debug, Clone, Serialize)]
pub struct Violation {
    pub assumption: Assumption,
    /// Zero-based state index the violation occurred at, when meaningful.
    pub state: Option<usize>,
    pub lhs: f64,
    pub rhs: f64,
    pub detail: String,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} violated: {} (lhs={:.17e}, rhs={:.17e})",
            self.assumption.label(),
            self.detail,
            self.lhs,
            self.rhs
        )
    }
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("invalid game specification: {}", report(.0))]
    Invalid(Vec<Violation>),
    #[error("strategy probabilities must satisfy 0 <= x_low <= x_high <= 1, got ({x_low}, {x_high})")]
    InvalidStrategy { x_low: f64, x_high: f64 },
    #[error("operation requires exactly 3 states, spec has {0}")]
    NotThreeState(usize),
}

fn report(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

/// Full primitive of the game: states, payoffs, prior, signal accuracies.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct GameSpec {
    /// Ordered real state labels.
    pub states: Vec<f64>,
    /// Receiver's proposal payoff per state (status quo pays zero).
    pub u_receiver: Vec<f64>,
    /// Senders' common proposal payoff per state.
    pub u_senders: Vec<f64>,
    /// Common prior over states.
    pub prior: Vec<f64>,
    /// Probability of the high signal per state.
    pub rho: Vec<f64>,
}

impl GameSpec {
    pub fn n_states(&self) -> usize {
        self.states.len()
    }

    /// Checks every standing assumption; returns the violations by name with
    /// both sides of each failed inequality. Pure and idempotent.
    pub fn validate(&self) -> Result<(), ModelError> {
        let mut violations = Vec::new();
        let n = self.states.len();
        if n < 3
            || self.u_receiver.len() != n
            || self.u_senders.len() != n
            || self.prior.len() != n
            || self.rho.len() != n
        {
            violations.push(Violation {
                assumption: Assumption::Shape,
                state: None,
                lhs: n as f64,
                rhs: 3.0,
                detail: format!(
                    "need >= 3 states and matching field lengths, got states={}, u_receiver={}, u_senders={}, prior={}, rho={}",
                    n,
                    self.u_receiver.len(),
                    self.u_senders.len(),
                    self.prior.len(),
                    self.rho.len()
                ),
            });
            return Err(ModelError::Invalid(violations));
        }

        let sum: f64 = self.prior.iter().sum();
        if (sum - 1.0).abs() > PRIOR_SUM_TOL {
            violations.push(Violation {
                assumption: Assumption::PriorSimplex,
                state: None,
                lhs: sum,
                rhs: 1.0,
                detail: "prior must sum to one".into(),
            });
        }
        for (i, &q) in self.prior.iter().enumerate() {
            if q < 0.0 {
                violations.push(Violation {
                    assumption: Assumption::PriorSimplex,
                    state: Some(i),
                    lhs: q,
                    rhs: 0.0,
                    detail: format!("prior entry {i} is negative"),
                });
            }
        }

        for i in 1..n {
            if self.states[i] <= self.states[i - 1] {
                violations.push(Violation {
                    assumption: Assumption::StateOrdering,
                    state: Some(i),
                    lhs: self.states[i - 1],
                    rhs: self.states[i],
                    detail: format!("states must strictly increase at index {i}"),
                });
            }
        }

        if self.rho[0] <= 0.0 || self.rho[n - 1] >= 1.0 {
            violations.push(Violation {
                assumption: Assumption::SignalAccuracyOrdering,
                state: None,
                lhs: self.rho[0],
                rhs: self.rho[n - 1],
                detail: "signal accuracies must be interior to (0,1)".into(),
            });
        }
        for i in 1..n {
            if self.rho[i] <= self.rho[i - 1] {
                violations.push(Violation {
                    assumption: Assumption::SignalAccuracyOrdering,
                    state: Some(i),
                    lhs: self.rho[i - 1],
                    rhs: self.rho[i],
                    detail: format!("signal accuracy must strictly increase at index {i}"),
                });
            }
        }

        for i in 0..n {
            if self.u_receiver[i] < self.u_senders[i] {
                violations.push(Violation {
                    assumption: Assumption::PayoffDominance,
                    state: Some(i),
                    lhs: self.u_receiver[i],
                    rhs: self.u_senders[i],
                    detail: format!("receiver payoff below senders' at state {i}"),
                });
            }
        }
        if n > 3 {
            // The general setting demands strictly increasing payoffs with a
            // single sign change. The three-state scenario asks only for the
            // sign pattern below; its canonical instances flatten the two
            // losing states to a common payoff.
            for i in 1..n {
                for (name, u) in [("receiver", &self.u_receiver), ("senders", &self.u_senders)] {
                    if u[i] <= u[i - 1] {
                        violations.push(Violation {
                            assumption: Assumption::PayoffMonotonicity,
                            state: Some(i),
                            lhs: u[i - 1],
                            rhs: u[i],
                            detail: format!("{name} payoff must strictly increase at index {i}"),
                        });
                    }
                }
            }
            for (name, u) in [("receiver", &self.u_receiver), ("senders", &self.u_senders)] {
                if let Some(v) = check_sign_threshold(name, u) {
                    violations.push(v);
                }
            }
        }

        if n == 3 {
            // Bottom/top agreement, middle disagreement: the receiver is for
            // the proposal in the middle state, the senders against.
            let pattern: [(usize, f64, bool, &str); 6] = [
                (0, self.u_senders[0], false, "senders"),
                (0, self.u_receiver[0], false, "receiver"),
                (1, self.u_senders[1], false, "senders"),
                (1, self.u_receiver[1], true, "receiver"),
                (2, self.u_senders[2], true, "senders"),
                (2, self.u_receiver[2], true, "receiver"),
            ];
            for (i, u, positive, who) in pattern {
                let ok = if positive { u > 0.0 } else { u < 0.0 };
                if !ok {
                    violations.push(Violation {
                        assumption: Assumption::DisagreementPattern,
                        state: Some(i),
                        lhs: u,
                        rhs: 0.0,
                        detail: format!(
                            "{who} payoff at state {i} must be {}",
                            if positive { "positive" } else { "negative" }
                        ),
                    });
                }
            }
            // Receiver's threshold of doubt must not exceed the senders'.
            if self.u_receiver[2] > 0.0
                && self.u_senders[2] > 0.0
                && self.u_receiver[0] < 0.0
                && self.u_senders[0] < 0.0
            {
                let lhs = -self.u_receiver[0] / self.u_receiver[2];
                let rhs = -self.u_senders[0] / self.u_senders[2];
                if lhs > rhs {
                    violations.push(Violation {
                        assumption: Assumption::ThresholdOfDoubtOrdering,
                        state: None,
                        lhs,
                        rhs,
                        detail: "receiver's threshold of doubt exceeds the senders'".into(),
                    });
                }
            }
        }

        if violations.is_empty() {
            Ok(())
        } else {
            Err(ModelError::Invalid(violations))
        }
    }

    /// Solver modules target the three-state scenario.
    pub fn require_three_states(&self) -> Result<(), ModelError> {
        if self.n_states() == 3 {
            Ok(())
        } else {
            Err(ModelError::NotThreeState(self.n_states()))
        }
    }
}

fn check_sign_threshold(name: &str, u: &[f64]) -> Option<Violation> {
    // Strictly negative up to some index, strictly positive from there on;
    // zeros are ties and count as violations.
    let first_pos = u.iter().position(|&v| v >= 0.0).unwrap_or(u.len());
    for (i, &v) in u.iter().enumerate() {
        let ok = if i < first_pos { v < 0.0 } else { v > 0.0 };
        if !ok {
            return Some(Violation {
                assumption: Assumption::PayoffThreshold,
                state: Some(i),
                lhs: v,
                rhs: 0.0,
                detail: format!("{name} payoff at state {i} breaks the single sign change"),
            });
        }
    }
    None
}

/// Symmetric sender strategy: approval probabilities on the low and high
/// signal. Informative play requires `x_low < x_high`; in equilibrium the
/// low-signal probability collapses to zero and the pair is the scalar `x`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct SenderStrategy {
    x_low: f64,
    x_high: f64,
}

impl SenderStrategy {
    pub fn new(x_low: f64, x_high: f64) -> Result<Self, ModelError> {
        let ok = (0.0..=1.0).contains(&x_low) && (0.0..=1.0).contains(&x_high) && x_low <= x_high;
        if ok {
            Ok(SenderStrategy { x_low, x_high })
        } else {
            Err(ModelError::InvalidStrategy { x_low, x_high })
        }
    }

    /// Equilibrium-shaped strategy: reject on low, approve on high w.p. `x`.
    pub fn informative(x: f64) -> Result<Self, ModelError> {
        SenderStrategy::new(0.0, x)
    }

    pub fn x_low(&self) -> f64 {
        self.x_low
    }

    pub fn x_high(&self) -> f64 {
        self.x_high
    }

    pub fn is_informative(&self) -> bool {
        self.x_low < self.x_high
    }

    /// Probability a sender approves in a state with high-signal mass `rho`.
    pub fn approval_prob(&self, rho: f64) -> f64 {
        rho * self.x_high + (1.0 - rho) * self.x_low
    }
}

/// The two conflicts of interest: the thresholds-of-doubt ratio across the
/// agreement states, and the prior mass on the disagreement state.
#[derive(Debug, Clone, Copy, Serialize, PartialEq)]
pub struct ConflictProfile {
    pub ratio: f64,
    pub q2: f64,
}

/// Computes the conflict profile of a three-state spec. The ratio is at
/// least one for any spec passing validation.
pub fn conflict_profile(spec: &GameSpec) -> Result<ConflictProfile, ModelError> {
    spec.require_three_states()?;
    let ratio = (spec.u_senders[0] / spec.u_senders[2]) * (spec.u_receiver[2] / spec.u_receiver[0]);
    Ok(ConflictProfile {
        ratio,
        q2: spec.prior[1],
    })
}

/// Reference instances used across tests and the verification suite.
pub mod test_specs {
    use super::GameSpec;

    /// The running example: senders (-1, -1, 1), receiver (-1, 1, t), with
    /// prior (0.45, 0.10, 0.45) and accuracies (0.2, 0.5, 0.8).
    pub fn table2(t: f64) -> GameSpec {
        GameSpec {
            states: vec![1.0, 2.0, 3.0],
            u_receiver: vec![-1.0, 1.0, t],
            u_senders: vec![-1.0, -1.0, 1.0],
            prior: vec![0.45, 0.10, 0.45],
            rho: vec![0.2, 0.5, 0.8],
        }
    }

    /// Same payoffs with a custom prior.
    pub fn table2_with_prior(t: f64, prior: [f64; 3]) -> GameSpec {
        GameSpec {
            prior: prior.to_vec(),
            ..table2(t)
        }
    }

    /// No disagreement mass: prior (0.5, 0, 0.5).
    pub fn table2_zero_q2(t: f64) -> GameSpec {
        table2_with_prior(t, [0.5, 0.0, 0.5])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use test_specs::*;

    #[test]
    fn baseline_instance_is_valid() {
        assert!(table2(2.0).validate().is_ok());
        assert!(table2_zero_q2(8.0).validate().is_ok());
    }

    #[test]
    fn reversed_accuracies_are_rejected() {
        let spec = GameSpec {
            rho: vec![0.8, 0.5, 0.2],
            ..table2(2.0)
        };
        let err = spec.validate().unwrap_err();
        match err {
            ModelError::Invalid(v) => {
                assert!(v
                    .iter()
                    .all(|v| v.assumption == Assumption::SignalAccuracyOrdering));
                assert!(!v.is_empty());
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn receiver_payoff_below_senders_is_rejected() {
        let spec = GameSpec {
            u_receiver: vec![-3.0, 1.0, 2.0],
            ..table2(2.0)
        };
        let err = spec.validate().unwrap_err();
        match err {
            ModelError::Invalid(v) => {
                let hit = v
                    .iter()
                    .find(|v| v.assumption == Assumption::PayoffDominance)
                    .expect("payoff dominance violation");
                assert_eq!(hit.state, Some(0));
                assert_eq!(hit.lhs, -3.0);
                assert_eq!(hit.rhs, -1.0);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn validation_is_idempotent() {
        let spec = table2(2.0);
        assert!(spec.validate().is_ok());
        assert!(spec.validate().is_ok());
        let bad = GameSpec {
            prior: vec![0.5, 0.5, 0.5],
            ..table2(2.0)
        };
        assert!(bad.validate().is_err());
        assert!(bad.validate().is_err());
    }

    #[test]
    fn conflict_ratio_frozen_values() {
        assert_eq!(conflict_profile(&table2(2.0)).unwrap().ratio, 2.0);
        assert_eq!(conflict_profile(&table2(8.0)).unwrap().ratio, 8.0);
        assert!((conflict_profile(&table2(2.0)).unwrap().q2 - 0.10).abs() < 1e-15);

        // Identical payoffs in the agreement states, no disagreement mass.
        let identity = GameSpec {
            u_receiver: vec![-1.0, 1.0, 1.0],
            ..table2_zero_q2(1.0)
        };
        assert!(identity.validate().is_ok());
        assert_eq!(conflict_profile(&identity).unwrap().ratio, 1.0);
    }

    #[test]
    fn conflict_ratio_at_least_one_for_valid_specs() {
        for t in [1.0, 1.5, 2.0, 4.0, 16.0] {
            let spec = table2(t);
            spec.validate().unwrap();
            assert!(conflict_profile(&spec).unwrap().ratio >= 1.0);
        }
    }

    #[test]
    fn strategy_bounds_enforced() {
        assert!(SenderStrategy::new(0.2, 0.1).is_err());
        assert!(SenderStrategy::new(-0.1, 0.5).is_err());
        assert!(SenderStrategy::new(0.0, 1.5).is_err());
        let s = SenderStrategy::new(0.1, 0.7).unwrap();
        assert!((s.approval_prob(0.5) - 0.4).abs() < 1e-15);
        assert!(s.is_informative());
        assert!(!SenderStrategy::new(0.3, 0.3).unwrap().is_informative());
    }

    #[test]
    fn five_state_threshold_structure_validates() {
        let spec = GameSpec {
            states: vec![1.0, 2.0, 3.0, 4.0, 5.0],
            u_receiver: vec![-2.0, -1.0, 1.0, 2.0, 3.0],
            u_senders: vec![-3.0, -2.0, -1.0, 1.0, 2.0],
            prior: vec![0.2; 5],
            rho: vec![0.1, 0.3, 0.5, 0.7, 0.9],
        };
        assert!(spec.validate().is_ok());
        assert!(spec.require_three_states().is_err());
        // A zero payoff breaks the strict threshold.
        let tied = GameSpec {
            u_senders: vec![-3.0, -2.0, 0.0, 1.0, 2.0],
            ..spec
        };
        assert!(tied.validate().is_err());
    }
}
