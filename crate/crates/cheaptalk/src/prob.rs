//! Numerically stable probability kernels in natural-log space.
//!
//! Everything downstream (best responses, equilibrium search, mechanism
//! checks, large-deviations rates) runs on these primitives. Probabilities
//! stay in log space until the reporting boundary; exponents of order
//! `N * KL` overflow linear-space doubles long before desk-scale `N`.

use std::sync::OnceLock;

use thiserror::Error;

use crate::model::{GameSpec, SenderStrategy};

/// Largest factorial held in the precomputed table. Tallies beyond this fall
/// back to a Stirling tail, which is more than accurate enough there.
const LN_FACTORIAL_TABLE_SIZE: usize = 8193;

#[derive(Debug, Error, PartialEq)]
pub enum ProbError {
    #[error("tally {t} out of range 0..={n}")]
    TallyOutOfRange { t: u32, n: u32 },
    #[error("cutoff {cutoff} out of range 1..={n}")]
    CutoffOutOfRange { cutoff: u32, n: u32 },
    #[error("divergence undefined: reference mass {b} is degenerate while a={a}")]
    DegenerateReference { a: f64, b: f64 },
    #[error("reference distribution has a zero coordinate at index {index}")]
    ZeroReferenceCoordinate { index: usize },
    #[error("state index {state} out of range for {n_states} states")]
    StateOutOfRange { state: usize, n_states: usize },
}

/// A natural-log probability. `value` lives in `[-inf, 0]` up to roundoff.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogProb(f64);

impl LogProb {
    pub fn new(value: f64) -> Self {
        debug_assert!(value <= 1e-9, "log-probability {value} above zero");
        LogProb(value)
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Exponentiates back to linear space. Only for the reporting boundary.
    pub fn prob(self) -> f64 {
        self.0.exp()
    }
}

/// Stable log(exp(a) + exp(b)).
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + (-(a - b).abs()).exp().ln_1p()
}

/// Stable log(sum(exp(values))). Empty input yields -inf.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let sum: f64 = values.iter().map(|v| (v - max).exp()).sum();
    max + sum.ln()
}

fn ln_factorial_table() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        // Compensated cumulative sum of ln k keeps the absolute error near
        // 2*eps*|value|, which the exact big-integer cross-checks require.
        let mut table = vec![0.0f64; LN_FACTORIAL_TABLE_SIZE];
        let mut sum = 0.0f64;
        let mut comp = 0.0f64;
        for k in 2..LN_FACTORIAL_TABLE_SIZE {
            let term = (k as f64).ln();
            let y = term - comp;
            let t = sum + y;
            comp = (t - sum) - y;
            sum = t;
            table[k] = sum;
        }
        table
    })
}

/// ln(n!) from the table, with a Stirling series tail for very large n.
pub fn ln_factorial(n: u64) -> f64 {
    let table = ln_factorial_table();
    if (n as usize) < table.len() {
        return table[n as usize];
    }
    let x = n as f64 + 1.0;
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x - 0.5) * x.ln() - x
        + inv * (1.0 / 12.0 + inv2 * (-1.0 / 360.0 + inv2 * (1.0 / 1260.0 - inv2 / 1680.0)))
}

/// ln C(n, k); -inf when k > n.
pub fn ln_choose(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    if k == 0 || k == n {
        return 0.0;
    }
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

/// Log-pmf of Binomial(n, p) at k, exact for the degenerate p in {0, 1}.
pub fn log_binomial_pmf(n: u64, k: u64, p: f64) -> f64 {
    debug_assert!((0.0..=1.0).contains(&p), "binomial parameter {p} outside [0,1]");
    debug_assert!(k <= n);
    if p == 0.0 {
        return if k == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    if p == 1.0 {
        return if k == n { 0.0 } else { f64::NEG_INFINITY };
    }
    let kf = k as f64;
    let nkf = (n - k) as f64;
    ln_choose(n, k) + kf * p.ln() + nkf * (-p).ln_1p()
}

/// Per-state approval probabilities induced by a symmetric sender strategy.
///
/// Entry `i` is `rho_i * x_high + (1 - rho_i) * x_low`; the ordering of the
/// signal accuracies makes these strictly increasing across states whenever
/// the strategy is informative.
#[derive(Debug, Clone)]
pub struct ApprovalModel {
    probs: Vec<f64>,
}

impl ApprovalModel {
    pub fn new(spec: &GameSpec, strategy: &SenderStrategy) -> Self {
        let probs = spec
            .rho
            .iter()
            .map(|&rho| strategy.approval_prob(rho))
            .collect();
        ApprovalModel { probs }
    }

    pub fn prob(&self, state: usize) -> f64 {
        self.probs[state]
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }
}

/// Log-likelihood of `t` approvals out of `n` senders in the given state.
pub fn tally_logpmf(
    spec: &GameSpec,
    strategy: &SenderStrategy,
    n: u32,
    t: u32,
    state: usize,
) -> Result<LogProb, ProbError> {
    if t > n {
        return Err(ProbError::TallyOutOfRange { t, n });
    }
    if state >= spec.rho.len() {
        return Err(ProbError::StateOutOfRange {
            state,
            n_states: spec.rho.len(),
        });
    }
    let a = strategy.approval_prob(spec.rho[state]);
    Ok(LogProb::new(log_binomial_pmf(n as u64, t as u64, a)))
}

/// Log-likelihood of being pivotal at `cutoff` in the given state: exactly
/// `cutoff - 1` of the other `n - 1` senders approve.
pub fn pivot_logpmf(
    spec: &GameSpec,
    strategy: &SenderStrategy,
    n: u32,
    cutoff: u32,
    state: usize,
) -> Result<LogProb, ProbError> {
    if cutoff == 0 || cutoff > n {
        return Err(ProbError::CutoffOutOfRange { cutoff, n });
    }
    if state >= spec.rho.len() {
        return Err(ProbError::StateOutOfRange {
            state,
            n_states: spec.rho.len(),
        });
    }
    let a = strategy.approval_prob(spec.rho[state]);
    Ok(LogProb::new(log_binomial_pmf(
        (n - 1) as u64,
        (cutoff - 1) as u64,
        a,
    )))
}

/// Binary relative entropy KL(a, b) with the 0*log(0) := 0 convention.
pub fn kl_bernoulli(a: f64, b: f64) -> Result<f64, ProbError> {
    if !(0.0..=1.0).contains(&a) || !(0.0..=1.0).contains(&b) {
        return Err(ProbError::DegenerateReference { a, b });
    }
    if (b == 0.0 || b == 1.0) && a != b {
        return Err(ProbError::DegenerateReference { a, b });
    }
    if a == b {
        return Ok(0.0);
    }
    let mut kl = 0.0;
    if a > 0.0 {
        kl += a * (a / b).ln();
    }
    if a < 1.0 {
        kl += (1.0 - a) * ((1.0 - a) / (1.0 - b)).ln();
    }
    Ok(kl.max(0.0))
}

/// Relative entropy between distributions on the K-simplex. `gamma` may sit
/// on the boundary; `g` must be strictly interior.
pub fn kl_categorical(gamma: &[f64], g: &[f64]) -> Result<f64, ProbError> {
    debug_assert_eq!(gamma.len(), g.len());
    if let Some(index) = g.iter().position(|&gk| gk <= 0.0) {
        return Err(ProbError::ZeroReferenceCoordinate { index });
    }
    let mut kl = 0.0;
    for (&gam, &gk) in gamma.iter().zip(g) {
        if gam > 0.0 {
            kl += gam * (gam / gk).ln();
        }
    }
    Ok(kl.max(0.0))
}

/// Log tally-likelihood ratio between two states expressed through binary
/// divergences of the empirical approval share from each state's approval
/// probability. Must agree with the direct log-pmf difference.
pub fn tally_ratio_via_kl(
    spec: &GameSpec,
    strategy: &SenderStrategy,
    n: u32,
    t: u32,
    state_i: usize,
    state_j: usize,
) -> Result<f64, ProbError> {
    if t > n {
        return Err(ProbError::TallyOutOfRange { t, n });
    }
    let n_states = spec.rho.len();
    if state_i >= n_states || state_j >= n_states {
        return Err(ProbError::StateOutOfRange {
            state: state_i.max(state_j),
            n_states,
        });
    }
    if state_i == state_j {
        return Ok(0.0);
    }
    let share = t as f64 / n as f64;
    let a_i = strategy.approval_prob(spec.rho[state_i]);
    let a_j = strategy.approval_prob(spec.rho[state_j]);
    let kl_j = kl_bernoulli(share, a_j)?;
    let kl_i = kl_bernoulli(share, a_i)?;
    Ok(n as f64 * (kl_j - kl_i))
}

/// Log-pmf of Multinomial(n, probs) at the count vector `counts`.
pub fn log_multinomial_pmf(n: u64, counts: &[u32], probs: &[f64]) -> f64 {
    debug_assert_eq!(counts.len(), probs.len());
    debug_assert_eq!(counts.iter().map(|&c| c as u64).sum::<u64>(), n);
    let mut logp = ln_factorial(n);
    for (&c, &p) in counts.iter().zip(probs) {
        logp -= ln_factorial(c as u64);
        if c > 0 {
            if p == 0.0 {
                return f64::NEG_INFINITY;
            }
            logp += c as f64 * p.ln();
        }
    }
    logp
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::test_specs::table2;

    fn strategy(x_low: f64, x_high: f64) -> SenderStrategy {
        SenderStrategy::new(x_low, x_high).unwrap()
    }

    #[test]
    fn tally_matches_hand_evaluation() {
        // C(2,1) * 0.5 * 0.5 = 0.5 at a uniform approval probability.
        let spec = table2(2.0);
        let babble_half = strategy(0.5, 0.5);
        for state in 0..3 {
            let lp = tally_logpmf(&spec, &babble_half, 2, 1, state).unwrap();
            assert!((lp.prob() - 0.5).abs() < 1e-14);
        }
    }

    #[test]
    fn tally_degenerate_point_mass() {
        let spec = table2(2.0);
        let silent = strategy(0.0, 0.0);
        let lp = tally_logpmf(&spec, &silent, 5, 0, 0).unwrap();
        assert_eq!(lp.value(), 0.0);
        let lp1 = tally_logpmf(&spec, &silent, 5, 1, 0).unwrap();
        assert_eq!(lp1.value(), f64::NEG_INFINITY);
    }

    #[test]
    fn tally_rejects_out_of_range() {
        let spec = table2(2.0);
        let err = tally_logpmf(&spec, &strategy(0.0, 0.5), 4, 5, 0).unwrap_err();
        assert_eq!(err, ProbError::TallyOutOfRange { t: 5, n: 4 });
    }

    #[test]
    fn pivot_single_sender_is_certain() {
        let spec = table2(2.0);
        for x in [0.0, 0.3, 1.0] {
            let s = strategy(0.0, x);
            for state in 0..3 {
                let lp = pivot_logpmf(&spec, &s, 1, 1, state).unwrap();
                assert_eq!(lp.value(), 0.0);
            }
        }
    }

    #[test]
    fn pivot_matches_hand_evaluation() {
        // C(2,1) * 0.5 * 0.5 = 0.5.
        let spec = table2(2.0);
        let lp = pivot_logpmf(&spec, &strategy(0.5, 0.5), 3, 2, 1).unwrap();
        assert!((lp.prob() - 0.5).abs() < 1e-14);
    }

    #[test]
    fn pivot_rejects_zero_cutoff() {
        let spec = table2(2.0);
        let err = pivot_logpmf(&spec, &strategy(0.0, 0.5), 3, 0, 0).unwrap_err();
        assert_eq!(err, ProbError::CutoffOutOfRange { cutoff: 0, n: 3 });
    }

    #[test]
    fn approval_probabilities_ordered_for_informative_strategies() {
        let spec = table2(2.0);
        for (lo, hi) in [(0.0, 0.4), (0.1, 0.9), (0.0, 1.0), (0.5, 0.6)] {
            let model = ApprovalModel::new(&spec, &strategy(lo, hi));
            let probs = model.probs();
            assert!(probs[0] < probs[1] && probs[1] < probs[2], "{probs:?}");
            assert!(probs.iter().all(|p| (0.0..=1.0).contains(p)));
            assert_eq!(model.prob(1), probs[1]);
        }
    }

    #[test]
    fn kl_bernoulli_frozen_value() {
        // 0.5 ln(0.5/0.25) + 0.5 ln(0.5/0.75) = 0.5 ln(4/3), by hand.
        let expected = 0.5 * (4.0f64 / 3.0).ln();
        assert!((kl_bernoulli(0.5, 0.25).unwrap() - expected).abs() < 1e-15);
    }

    #[test]
    fn kl_bernoulli_identity_and_degenerate() {
        for p in [0.0, 0.1, 0.5, 0.999, 1.0] {
            assert_eq!(kl_bernoulli(p, p).unwrap(), 0.0);
        }
        assert!(kl_bernoulli(0.5, 0.0).is_err());
        assert!(kl_bernoulli(0.5, 1.0).is_err());
    }

    #[test]
    fn kl_categorical_frozen_values() {
        let uniform = [1.0 / 3.0; 3];
        assert_eq!(kl_categorical(&uniform, &uniform).unwrap(), 0.0);
        let corner = [1.0, 0.0, 0.0];
        let kl = kl_categorical(&corner, &uniform).unwrap();
        assert!((kl - 3.0f64.ln()).abs() < 1e-14);
        assert!(kl_categorical(&corner, &[0.0, 0.5, 0.5]).is_err());
    }

    #[test]
    fn kl_categorical_binary_reduces_to_bernoulli() {
        for (a, b) in [(0.3, 0.6), (0.0, 0.2), (1.0, 0.7), (0.55, 0.54)] {
            let kc = kl_categorical(&[a, 1.0 - a], &[b, 1.0 - b]).unwrap();
            let kb = kl_bernoulli(a, b).unwrap();
            assert!((kc - kb).abs() < 1e-14, "a={a} b={b}: {kc} vs {kb}");
        }
    }

    #[test]
    fn tally_ratio_identity_frozen_case() {
        let spec = table2(2.0);
        let s = strategy(0.0, 0.4);
        let via_kl = tally_ratio_via_kl(&spec, &s, 100, 37, 2, 0).unwrap();
        let direct = tally_logpmf(&spec, &s, 100, 37, 2).unwrap().value()
            - tally_logpmf(&spec, &s, 100, 37, 0).unwrap().value();
        assert!((via_kl - direct).abs() < 1e-9, "{via_kl} vs {direct}");
        assert_eq!(tally_ratio_via_kl(&spec, &s, 100, 37, 1, 1).unwrap(), 0.0);
    }

    #[test]
    fn multinomial_pmf_sums_to_one() {
        let probs = [0.2, 0.3, 0.5];
        let n = 25u32;
        let mut terms = Vec::new();
        for t1 in 0..=n {
            for t2 in 0..=(n - t1) {
                let t3 = n - t1 - t2;
                terms.push(log_multinomial_pmf(n as u64, &[t1, t2, t3], &probs));
            }
        }
        assert!((log_sum_exp(&terms)).abs() < 1e-12);
    }

    #[test]
    fn log_sum_exp_handles_extremes() {
        assert_eq!(log_sum_exp(&[]), f64::NEG_INFINITY);
        assert_eq!(
            log_sum_exp(&[f64::NEG_INFINITY, f64::NEG_INFINITY]),
            f64::NEG_INFINITY
        );
        assert!((log_sum_exp(&[-1000.0, 0.0]) - 0.0).abs() < 1e-12);
        assert!((log_add_exp(0.0, 0.0) - 2.0f64.ln()).abs() < 1e-15);
    }
}
