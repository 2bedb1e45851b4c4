//! Committed decision rules: incentive checks for cutoff mechanisms, the
//! senders' preferred cutoff under pooled information, and the two-cutoff
//! randomized mechanism that restores truthful reporting.
//!
//! Under commitment the senders report signals, so pivotal probabilities use
//! the truthful approval probability (the high-signal accuracy) in place of
//! the equilibrium approval probability.

use serde::Serialize;
use thiserror::Error;

use crate::model::{GameSpec, ModelError};
use crate::prob::{kl_bernoulli, log_add_exp, log_binomial_pmf, log_sum_exp};

/// Tolerance on the conditional payoff comparisons, in payoff units.
pub const IC_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum MechanismError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("cutoff {cutoff} out of range 1..={n}")]
    CutoffOutOfRange { cutoff: u32, n: u32 },
    #[error("interior point {value} outside the admissible interval ({lo}, {hi})")]
    OutsideInterval { value: f64, lo: f64, hi: f64 },
    #[error("rate condition fails: KL(t_alpha, rho1) = {kl_alpha} must exceed KL(t_beta, rho3) = {kl_beta}")]
    RateConditionFails { kl_alpha: f64, kl_beta: f64 },
    #[error("cutoffs collide at n = {n}: alpha and beta both round to {cutoff}")]
    CutoffsCollide { n: u32, cutoff: u32 },
}

/// Incentive report for a committed rule: expected sender payoffs
/// conditional on each signal and on being pivotal, with the per-state
/// log pivotal probabilities behind them.
#[derive(Debug, Clone, Serialize)]
pub struct IcReport {
    pub expected_high: f64,
    pub expected_low: f64,
    pub ic: bool,
    pub log_pivot_alpha: [f64; 3],
    pub log_pivot_beta: [f64; 3],
    pub log_pivot_mixed: [f64; 3],
}

fn truthful_pivot_logs(spec: &GameSpec, n: u32, cutoff: u32) -> [f64; 3] {
    let mut piv = [0.0f64; 3];
    for (state, p) in piv.iter_mut().enumerate() {
        *p = log_binomial_pmf((n - 1) as u64, (cutoff - 1) as u64, spec.rho[state]);
    }
    piv
}

/// E[U_S | signal, pivotal] in payoff units, given per-state log pivotal
/// probabilities under truthful reporting.
fn conditional_sender_payoff(spec: &GameSpec, log_pivot: &[f64; 3], high: bool) -> f64 {
    let mut log_terms = [f64::NEG_INFINITY; 3];
    for state in 0..3 {
        let q = spec.prior[state];
        if q == 0.0 {
            continue;
        }
        let sig = if high { spec.rho[state] } else { 1.0 - spec.rho[state] };
        log_terms[state] = q.ln() + sig.ln() + log_pivot[state];
    }
    let log_norm = log_sum_exp(&log_terms);
    if log_norm == f64::NEG_INFINITY {
        return 0.0;
    }
    (0..3)
        .map(|state| {
            if log_terms[state] == f64::NEG_INFINITY {
                0.0
            } else {
                spec.u_senders[state] * (log_terms[state] - log_norm).exp()
            }
        })
        .sum()
}

fn ic_verdict(expected_high: f64, expected_low: f64) -> bool {
    expected_high >= -IC_TOL && expected_low <= IC_TOL
}

/// Incentive compatibility of a single committed cutoff, assuming the other
/// senders report truthfully.
pub fn cutoff_ic(spec: &GameSpec, n: u32, cutoff: u32) -> Result<IcReport, MechanismError> {
    spec.require_three_states()?;
    if cutoff == 0 || cutoff > n {
        return Err(MechanismError::CutoffOutOfRange { cutoff, n });
    }
    let piv = truthful_pivot_logs(spec, n, cutoff);
    let expected_high = conditional_sender_payoff(spec, &piv, true);
    let expected_low = conditional_sender_payoff(spec, &piv, false);
    Ok(IcReport {
        expected_high,
        expected_low,
        ic: ic_verdict(expected_high, expected_low),
        log_pivot_alpha: piv,
        log_pivot_beta: [f64::NEG_INFINITY; 3],
        log_pivot_mixed: piv,
    })
}

/// The senders' preferred cutoff under pooled truthful information: the
/// smallest tally of high signals at which their conditional expected payoff
/// turns nonnegative. Returns n + 1 when they never prefer the proposal.
pub fn sender_optimal_cutoff(spec: &GameSpec, n: u32) -> u32 {
    for t in 0..=n {
        let mut num = 0.0;
        for state in 0..3 {
            let lp = log_binomial_pmf(n as u64, t as u64, spec.rho[state]);
            num += spec.prior[state] * lp.exp() * spec.u_senders[state];
        }
        if num >= 0.0 {
            return t;
        }
    }
    n + 1
}

/// Commitment to mix two cutoff rules: the alpha cutoff with probability mu,
/// the beta cutoff otherwise. The log odds of the beta branch are kept
/// alongside mu because mu approaches one exponentially fast.
#[derive(Debug, Clone, Serialize)]
pub struct RandomizedMechanism {
    pub mu: f64,
    /// log((1 - mu) / mu), the exact solution of the indifference equation.
    pub log_mu_odds: f64,
    pub cutoff_alpha: u32,
    pub cutoff_beta: u32,
    pub n: u32,
    pub t_alpha: f64,
    pub t_beta: f64,
}

impl RandomizedMechanism {
    /// ln mu, computed stably from the log odds.
    pub fn log_mu(&self) -> f64 {
        -softplus(self.log_mu_odds)
    }

    /// ln (1 - mu).
    pub fn log_one_minus_mu(&self) -> f64 {
        self.log_mu_odds - softplus(self.log_mu_odds)
    }

    /// Residual of the indifference equation in log space, recomputed from
    /// the stored fields.
    pub fn indifference_residual(&self, spec: &GameSpec) -> f64 {
        let piv_alpha_1 =
            log_binomial_pmf((self.n - 1) as u64, (self.cutoff_alpha - 1) as u64, spec.rho[0]);
        let piv_beta_3 =
            log_binomial_pmf((self.n - 1) as u64, (self.cutoff_beta - 1) as u64, spec.rho[2]);
        self.log_mu_odds + piv_beta_3 - piv_alpha_1
            + (spec.u_senders[2] / -spec.u_senders[0]).ln()
    }
}

fn softplus(z: f64) -> f64 {
    if z > 35.0 {
        z
    } else {
        z.exp().ln_1p()
    }
}

/// The admissible interval for the alpha share: from the bottom accuracy up
/// to the equal-divergence point between the bottom and middle accuracies.
pub fn alpha_interval(spec: &GameSpec) -> (f64, f64) {
    (spec.rho[0], equal_kl_point(spec.rho[0], spec.rho[1]))
}

/// The admissible interval for the beta share: from the equal-divergence
/// point between the middle and top accuracies up to the top accuracy.
pub fn beta_interval(spec: &GameSpec) -> (f64, f64) {
    (equal_kl_point(spec.rho[1], spec.rho[2]), spec.rho[2])
}

/// The share t at which KL(t, a) = KL(t, b): the crossing point of two
/// Bernoulli divergences, in closed form.
pub fn equal_kl_point(a: f64, b: f64) -> f64 {
    let log_odds = ((1.0 - a) / (1.0 - b)).ln();
    log_odds / ((b / a).ln() + log_odds)
}

/// Deterministic default interior shares: midpoints of the admissible
/// intervals, with the beta share pushed toward the top accuracy until the
/// alpha branch's large-deviations rate dominates with a safety margin. The
/// margin keeps the mixing weight's convergence fast enough to be observable
/// at desk-scale ladders; without it, symmetric accuracies put the two rates
/// in a dead heat.
pub fn default_interior_shares(spec: &GameSpec) -> (f64, f64) {
    let (a_lo, a_hi) = alpha_interval(spec);
    let (b_lo, b_hi) = beta_interval(spec);
    let t_alpha = 0.5 * (a_lo + a_hi);
    let mut t_beta = 0.5 * (b_lo + b_hi);
    let kl_alpha = kl_bernoulli(t_alpha, spec.rho[0]).expect("interior");
    for _ in 0..200 {
        let kl_beta = kl_bernoulli(t_beta, spec.rho[2]).expect("interior");
        if kl_alpha > kl_beta + 0.25 * kl_alpha {
            break;
        }
        t_beta = 0.5 * (t_beta + b_hi);
    }
    (t_alpha, t_beta)
}

fn nearest_int_half_up(x: f64) -> i64 {
    (x + 0.5).floor() as i64
}

/// Builds the randomized mechanism at sender count `n`. Explicit shares must
/// sit strictly inside their admissible intervals and satisfy the rate
/// condition; defaults are adjusted automatically.
pub fn build_randomized(
    spec: &GameSpec,
    n: u32,
    t_alpha: Option<f64>,
    t_beta: Option<f64>,
) -> Result<(RandomizedMechanism, IcReport), MechanismError> {
    spec.require_three_states()?;
    let (defaults_alpha, defaults_beta) = default_interior_shares(spec);
    let explicit = t_alpha.is_some() || t_beta.is_some();
    let ta = t_alpha.unwrap_or(defaults_alpha);
    let tb = t_beta.unwrap_or(defaults_beta);
    let (a_lo, a_hi) = alpha_interval(spec);
    if !(ta > a_lo && ta < a_hi) {
        return Err(MechanismError::OutsideInterval { value: ta, lo: a_lo, hi: a_hi });
    }
    let (b_lo, b_hi) = beta_interval(spec);
    if !(tb > b_lo && tb < b_hi) {
        return Err(MechanismError::OutsideInterval { value: tb, lo: b_lo, hi: b_hi });
    }
    if explicit {
        let kl_alpha = kl_bernoulli(ta, spec.rho[0]).expect("interior");
        let kl_beta = kl_bernoulli(tb, spec.rho[2]).expect("interior");
        if kl_alpha <= kl_beta {
            return Err(MechanismError::RateConditionFails { kl_alpha, kl_beta });
        }
    }

    let cutoff_alpha = nearest_int_half_up(n as f64 * ta).clamp(1, n as i64) as u32;
    let cutoff_beta = nearest_int_half_up(n as f64 * tb).clamp(1, n as i64) as u32;
    if cutoff_alpha >= cutoff_beta {
        return Err(MechanismError::CutoffsCollide { n, cutoff: cutoff_alpha });
    }

    let piv_alpha = truthful_pivot_logs(spec, n, cutoff_alpha);
    let piv_beta = truthful_pivot_logs(spec, n, cutoff_beta);
    // Indifference between the two pivotal events pins the mixing odds.
    let log_mu_odds =
        -(piv_beta[2] - piv_alpha[0] + (spec.u_senders[2] / -spec.u_senders[0]).ln());
    let mu = 1.0 / (1.0 + log_mu_odds.exp());
    let mech = RandomizedMechanism {
        mu,
        log_mu_odds,
        cutoff_alpha,
        cutoff_beta,
        n,
        t_alpha: ta,
        t_beta: tb,
    };

    let log_mu = mech.log_mu();
    let log_1m_mu = mech.log_one_minus_mu();
    let mut piv_mixed = [0.0f64; 3];
    for state in 0..3 {
        piv_mixed[state] = log_add_exp(log_mu + piv_alpha[state], log_1m_mu + piv_beta[state]);
    }
    let expected_high = conditional_sender_payoff(spec, &piv_mixed, true);
    let expected_low = conditional_sender_payoff(spec, &piv_mixed, false);
    let report = IcReport {
        expected_high,
        expected_low,
        ic: ic_verdict(expected_high, expected_low),
        log_pivot_alpha: piv_alpha,
        log_pivot_beta: piv_beta,
        log_pivot_mixed: piv_mixed,
    };
    Ok((mech, report))
}

/// P[T >= cutoff | state] under truthful reporting.
fn truthful_tail(spec: &GameSpec, n: u32, cutoff: u32, state: usize) -> f64 {
    let terms: Vec<f64> = (cutoff..=n)
        .map(|t| log_binomial_pmf(n as u64, t as u64, spec.rho[state]))
        .collect();
    log_sum_exp(&terms).min(0.0).exp()
}

/// P[proposal | state] under the mixed mechanism, per state.
pub fn outcome_probabilities(spec: &GameSpec, mech: &RandomizedMechanism) -> [f64; 3] {
    let mut out = [0.0f64; 3];
    for (state, o) in out.iter_mut().enumerate() {
        let pa = truthful_tail(spec, mech.n, mech.cutoff_alpha, state);
        let pb = truthful_tail(spec, mech.n, mech.cutoff_beta, state);
        *o = mech.mu * pa + (1.0 - mech.mu) * pb;
    }
    out
}

/// The mixed payoff-weighted ratio conditional on a signal, in log space,
/// and its limiting value (the plain signal likelihood ratio between the top
/// and bottom states).
pub fn mixed_sender_ratio(
    spec: &GameSpec,
    report: &IcReport,
    high: bool,
) -> (f64, f64) {
    let sig = |state: usize| -> f64 {
        if high { spec.rho[state] } else { 1.0 - spec.rho[state] }
    };
    let term = |state: usize| -> f64 {
        let q = spec.prior[state];
        if q == 0.0 {
            return f64::NEG_INFINITY;
        }
        q.ln() + sig(state).ln() + report.log_pivot_mixed[state]
            + spec.u_senders[state].abs().ln()
    };
    let log_ratio = term(2) - log_add_exp(term(0), term(1));
    let limit = (sig(2) / sig(0)).ln();
    (log_ratio, limit)
}

/// One ladder row of the randomized-mechanism convergence diagnostics.
#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceRow {
    pub n: u32,
    pub mu: f64,
    pub cutoff_alpha: u32,
    pub cutoff_beta: u32,
    pub ic: bool,
    pub p_sq_theta1: f64,
    pub p_prop_theta2: f64,
    pub p_prop_theta3: f64,
    pub log_ratio_high: f64,
    pub log_ratio_low: f64,
    pub limit_log_ratio_high: f64,
    pub limit_log_ratio_low: f64,
}

/// Builds the mechanism at each ladder point and reports the incentive
/// verdict, the first-best outcome probabilities, and the mixed ratios.
pub fn randomized_convergence(
    spec: &GameSpec,
    ladder: &[u32],
    t_alpha: Option<f64>,
    t_beta: Option<f64>,
) -> Result<Vec<ConvergenceRow>, MechanismError> {
    ladder
        .iter()
        .map(|&n| {
            let (mech, report) = build_randomized(spec, n, t_alpha, t_beta)?;
            let outcomes = outcome_probabilities(spec, &mech);
            let (log_ratio_high, limit_high) = mixed_sender_ratio(spec, &report, true);
            let (log_ratio_low, limit_low) = mixed_sender_ratio(spec, &report, false);
            Ok(ConvergenceRow {
                n,
                mu: mech.mu,
                cutoff_alpha: mech.cutoff_alpha,
                cutoff_beta: mech.cutoff_beta,
                ic: report.ic,
                p_sq_theta1: 1.0 - outcomes[0],
                p_prop_theta2: outcomes[1],
                p_prop_theta3: outcomes[2],
                log_ratio_high,
                log_ratio_low,
                limit_log_ratio_high: limit_high,
                limit_log_ratio_low: limit_low,
            })
        })
        .collect()
}
