//! Payoff-weighted likelihood ratios and both players' best responses.
//!
//! A sender who conditions on being pivotal weighs the favorable state
//! against the unfavorable ones through `L_S`; the receiver weighs the
//! observed tally through `L_R`. Both are computed as log numerator minus
//! log denominator with log-sum-exp aggregation of same-sign terms.

use serde::Serialize;
use thiserror::Error;

use crate::model::{GameSpec, SenderStrategy};
use crate::prob::{log_sum_exp, pivot_logpmf, tally_logpmf, ProbError};

/// Log-space indifference tolerance: ratios within it count as exactly one.
pub const INDIFFERENCE_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum BestRespError {
    #[error(transparent)]
    Prob(#[from] ProbError),
    #[error(transparent)]
    Model(#[from] crate::model::ModelError),
    #[error("pivotal event has zero probability in every state")]
    PivotImpossible,
    #[error("strategy is uninformative (x_low == x_high)")]
    Uninformative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Signal {
    Low,
    High,
}

/// P[s | state] under the binary signal structure.
pub fn signal_prob(spec: &GameSpec, state: usize, signal: Signal) -> f64 {
    match signal {
        Signal::High => spec.rho[state],
        Signal::Low => 1.0 - spec.rho[state],
    }
}

/// Log of the senders' payoff-weighted likelihood ratio conditional on the
/// given signal and on being pivotal at `cutoff`. Positive log favors the
/// proposal. Requires a three-state spec.
pub fn sender_log_ratio(
    spec: &GameSpec,
    strategy: &SenderStrategy,
    n: u32,
    cutoff: u32,
    signal: Signal,
) -> Result<f64, BestRespError> {
    spec.require_three_states()?;
    let mut piv = [0.0f64; 3];
    let mut any_positive = false;
    for (state, p) in piv.iter_mut().enumerate() {
        *p = pivot_logpmf(spec, strategy, n, cutoff, state)?.value();
        any_positive |= *p > f64::NEG_INFINITY;
    }
    if !any_positive {
        return Err(BestRespError::PivotImpossible);
    }
    let log_term = |state: usize| -> f64 {
        let q = spec.prior[state];
        if q == 0.0 {
            return f64::NEG_INFINITY;
        }
        q.ln() + signal_prob(spec, state, signal).ln() + piv[state]
    };
    // Numerator: the single favorable state. Denominator: the two states
    // where the senders' proposal payoff is negative, entered with |U_S|.
    let log_num = log_term(2) + spec.u_senders[2].ln();
    let log_den = log_sum_exp(&[
        log_term(0) + (-spec.u_senders[0]).ln(),
        log_term(1) + (-spec.u_senders[1]).ln(),
    ]);
    Ok(log_num - log_den)
}

/// Log of the receiver's payoff-weighted likelihood ratio at tally `t`.
/// Strictly increasing in `t` for informative strategies.
pub fn receiver_log_ratio(
    spec: &GameSpec,
    strategy: &SenderStrategy,
    n: u32,
    t: u32,
) -> Result<f64, BestRespError> {
    spec.require_three_states()?;
    let mut tally = [0.0f64; 3];
    for (state, lp) in tally.iter_mut().enumerate() {
        *lp = tally_logpmf(spec, strategy, n, t, state)?.value();
    }
    let log_term = |state: usize| -> f64 {
        let q = spec.prior[state];
        if q == 0.0 {
            return f64::NEG_INFINITY;
        }
        q.ln() + tally[state]
    };
    let log_num = log_sum_exp(&[
        log_term(1) + spec.u_receiver[1].ln(),
        log_term(2) + spec.u_receiver[2].ln(),
    ]);
    let log_den = log_term(0) + (-spec.u_receiver[0]).ln();
    Ok(log_num - log_den)
}

/// The receiver's best-response cutoff: the smallest tally at which her
/// payoff-weighted ratio reaches one, with ties broken toward the proposal.
/// Returns `n + 1` when no tally convinces her. Requires an informative
/// strategy, which makes the log ratio strictly increasing and the binary
/// search below exact.
pub fn receiver_cutoff(
    spec: &GameSpec,
    strategy: &SenderStrategy,
    n: u32,
) -> Result<u32, BestRespError> {
    if !strategy.is_informative() {
        return Err(BestRespError::Uninformative);
    }
    let favors = |t: u32| -> Result<bool, BestRespError> {
        Ok(receiver_log_ratio(spec, strategy, n, t)? >= 0.0)
    };
    if !favors(n)? {
        return Ok(n + 1);
    }
    if favors(0)? {
        return Ok(0);
    }
    // Invariant: lo never favors, hi favors.
    let (mut lo, mut hi) = (0u32, n);
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if favors(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SignalAction {
    Approve,
    Indifferent,
    Reject,
}

fn classify(log_ratio: f64) -> SignalAction {
    if log_ratio > INDIFFERENCE_TOL {
        SignalAction::Approve
    } else if log_ratio < -INDIFFERENCE_TOL {
        SignalAction::Reject
    } else {
        SignalAction::Indifferent
    }
}

/// Per-signal classification of the senders' pivotal preference.
#[derive(Debug, Clone, Serialize)]
pub struct SenderConditions {
    pub high: SignalAction,
    pub low: SignalAction,
    pub log_ls_high: f64,
    pub log_ls_low: f64,
}

/// Classifies both signals at the pivotal event. Refuses uninformative
/// strategies: the pivotal calculus below is built for senders who separate.
pub fn sender_condition(
    spec: &GameSpec,
    strategy: &SenderStrategy,
    n: u32,
    cutoff: u32,
) -> Result<SenderConditions, BestRespError> {
    if !strategy.is_informative() {
        return Err(BestRespError::Uninformative);
    }
    let log_ls_high = sender_log_ratio(spec, strategy, n, cutoff, Signal::High)?;
    let log_ls_low = sender_log_ratio(spec, strategy, n, cutoff, Signal::Low)?;
    Ok(SenderConditions {
        high: classify(log_ls_high),
        low: classify(log_ls_low),
        log_ls_high,
        log_ls_low,
    })
}

/// Whether the strategy is a symmetric best response to `cutoff`: each
/// approval probability matches its signal's classification, including the
/// corner structure (approving on low forces approving on high for sure).
pub fn is_symmetric_best_response(
    spec: &GameSpec,
    strategy: &SenderStrategy,
    n: u32,
    cutoff: u32,
) -> Result<bool, BestRespError> {
    let cond = sender_condition(spec, strategy, n, cutoff)?;
    let consistent = |action: SignalAction, x: f64| -> bool {
        match action {
            SignalAction::Approve => x == 1.0,
            SignalAction::Reject => x == 0.0,
            SignalAction::Indifferent => true,
        }
    };
    let corners = !(strategy.x_low() > 0.0 && strategy.x_high() < 1.0);
    Ok(consistent(cond.high, strategy.x_high())
        && consistent(cond.low, strategy.x_low())
        && corners)
}
