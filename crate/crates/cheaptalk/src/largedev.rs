//! Multi-message machinery: induced message models, the receiver's decision
//! rule over tally vectors, pivotal event sets, equal-divergence points of
//! message distributions, and the exponential decay of pivotal odds.
//!
//! Message counts live on the discrete simplex of tally vectors; pivotal
//! enumeration is specialized to three messages, which keeps the lattice at
//! a quadratic desk scale, while the divergence operations accept any width.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::GameSpec;
use crate::prob::{kl_categorical, log_multinomial_pmf, log_sum_exp, ProbError};

#[derive(Debug, Error)]
pub enum LargeDevError {
    #[error(transparent)]
    Prob(#[from] ProbError),
    #[error(transparent)]
    Model(#[from] crate::model::ModelError),
    #[error("strategy matrix row {row} sums to {sum}, expected 1")]
    RowNotStochastic { row: usize, sum: f64 },
    #[error("strategy matrix violates monotonicity at rows ({j}, {jp}), columns ({k}, {kp}): {lhs} > {rhs}")]
    NotMonotone { j: usize, jp: usize, k: usize, kp: usize, lhs: f64, rhs: f64 },
    #[error("message column {column} has zero total mass")]
    DeadMessage { column: usize },
    #[error("signal kernel entry ({state}, {signal}) = {value} breaks the floor {floor}")]
    KernelFloor { state: usize, signal: usize, value: f64, floor: f64 },
    #[error("signal kernel row {state} sums to {sum}, expected 1")]
    KernelNotStochastic { state: usize, sum: f64 },
    #[error("signal kernel likelihood ratios not increasing at states ({state}, {next}), signals ({signal}, {next_signal})")]
    KernelNotMlrp { state: usize, next: usize, signal: usize, next_signal: usize },
    #[error("message distributions violate the likelihood-ratio ordering at states ({state}, {next}), messages ({k}, {kp})")]
    MessagesNotMlrp { state: usize, next: usize, k: usize, kp: usize },
    #[error("distributions are identical; no equal-divergence point between distinct laws")]
    IdenticalDistributions,
    #[error("pivotal enumeration needs at least two senders, got {0}")]
    TooFewSenders(u32),
    #[error("pivotal enumeration is specialized to three messages, got {0}")]
    NotThreeMessages(usize),
}

/// Row-stochastic signal-to-message strategy with the monotone structure:
/// higher signals tilt toward higher messages.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct MonotoneStrategyMatrix {
    rows: Vec<Vec<f64>>,
}

impl MonotoneStrategyMatrix {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self, LargeDevError> {
        let k_len = rows.first().map(|r| r.len()).unwrap_or(0);
        for (j, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), k_len, "ragged strategy matrix");
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > 1e-12 {
                return Err(LargeDevError::RowNotStochastic { row: j, sum });
            }
        }
        for column in 0..k_len {
            if rows.iter().map(|r| r[column]).sum::<f64>() <= 0.0 {
                return Err(LargeDevError::DeadMessage { column });
            }
        }
        for j in 0..rows.len() {
            for jp in (j + 1)..rows.len() {
                for k in 0..k_len {
                    for kp in (k + 1)..k_len {
                        let lhs = rows[jp][k] * rows[j][kp];
                        let rhs = rows[j][k] * rows[jp][kp];
                        if lhs > rhs + 1e-15 {
                            return Err(LargeDevError::NotMonotone { j, jp, k, kp, lhs, rhs });
                        }
                    }
                }
            }
        }
        Ok(MonotoneStrategyMatrix { rows })
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn n_signals(&self) -> usize {
        self.rows.len()
    }

    pub fn n_messages(&self) -> usize {
        self.rows.first().map(|r| r.len()).unwrap_or(0)
    }
}

/// Per-state message distributions induced by a signal kernel and a monotone
/// strategy, with both parents held for simulation and reference.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct MessageModel {
    /// P[signal j | state i], strictly above the floor.
    pub kernel: Vec<Vec<f64>>,
    /// The signal-to-message strategy the distributions derive from.
    pub strategy: MonotoneStrategyMatrix,
    /// P[message k | state i].
    pub g: Vec<Vec<f64>>,
    pub alpha_floor: f64,
}

impl MessageModel {
    /// Builds the model and validates the kernel: row-stochastic, every
    /// entry above the floor (no signal rules out any state), and strictly
    /// increasing likelihood ratios across adjacent states.
    pub fn from_parts(
        kernel: Vec<Vec<f64>>,
        strategy: &MonotoneStrategyMatrix,
        alpha_floor: f64,
    ) -> Result<Self, LargeDevError> {
        assert!(alpha_floor > 0.0);
        let n_signals = strategy.n_signals();
        let n_messages = strategy.n_messages();
        for (state, row) in kernel.iter().enumerate() {
            assert_eq!(row.len(), n_signals, "kernel width must match signal count");
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > 1e-12 {
                return Err(LargeDevError::KernelNotStochastic { state, sum });
            }
            for (signal, &value) in row.iter().enumerate() {
                if value < alpha_floor {
                    return Err(LargeDevError::KernelFloor { state, signal, value, floor: alpha_floor });
                }
            }
        }
        for state in 0..kernel.len().saturating_sub(1) {
            for j in 0..n_signals {
                for jp in (j + 1)..n_signals {
                    let lhs = kernel[state + 1][j] * kernel[state][jp];
                    let rhs = kernel[state][j] * kernel[state + 1][jp];
                    if lhs >= rhs {
                        return Err(LargeDevError::KernelNotMlrp {
                            state,
                            next: state + 1,
                            signal: j,
                            next_signal: jp,
                        });
                    }
                }
            }
        }
        let g = kernel
            .iter()
            .map(|krow| {
                (0..n_messages)
                    .map(|k| {
                        krow.iter()
                            .zip(strategy.rows())
                            .map(|(&ks, prow)| ks * prow[k])
                            .sum()
                    })
                    .collect()
            })
            .collect();
        Ok(MessageModel { kernel, strategy: strategy.clone(), g, alpha_floor })
    }

    /// Message distribution prescribed for one observed signal.
    pub fn strategy_row(&self, signal: usize) -> &[f64] {
        &self.strategy.rows()[signal]
    }

    pub fn n_states(&self) -> usize {
        self.g.len()
    }

    pub fn n_messages(&self) -> usize {
        self.g.first().map(|r| r.len()).unwrap_or(0)
    }

    /// Verifies the induced message distributions inherit the monotone
    /// likelihood-ratio ordering. The property follows from kernel MLRP and
    /// strategy monotonicity; it is checked, not assumed.
    pub fn assert_message_mlrp(&self) -> Result<(), LargeDevError> {
        let k_len = self.n_messages();
        for state in 0..self.g.len() - 1 {
            for k in 0..k_len {
                for kp in (k + 1)..k_len {
                    let lhs = self.g[state + 1][k] * self.g[state][kp];
                    let rhs = self.g[state][k] * self.g[state + 1][kp];
                    if lhs > rhs + 1e-12 {
                        return Err(LargeDevError::MessagesNotMlrp {
                            state,
                            next: state + 1,
                            k,
                            kp,
                        });
                    }
                }
            }
        }
        Ok(())
    }

    /// The deterministic reference model used by the decay traces: three
    /// signals, three messages, a 0.05 kernel floor.
    pub fn reference() -> Self {
        let strategy = MonotoneStrategyMatrix::new(vec![
            vec![0.8, 0.15, 0.05],
            vec![0.3, 0.4, 0.3],
            vec![0.05, 0.15, 0.8],
        ])
        .expect("reference strategy is monotone");
        let kernel = vec![
            vec![0.7, 0.2, 0.1],
            vec![0.3, 0.4, 0.3],
            vec![0.1, 0.2, 0.7],
        ];
        MessageModel::from_parts(kernel, &strategy, 0.05).expect("reference kernel is valid")
    }
}

/// Serialized form of a model configuration: a signal kernel plus a strategy
/// matrix, exactly as the file interface expects them.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MessageModelConfig {
    pub signal_kernel: Vec<Vec<f64>>,
    pub strategy_matrix: Vec<Vec<f64>>,
    #[serde(default = "default_alpha_floor")]
    pub alpha_floor: f64,
}

fn default_alpha_floor() -> f64 {
    0.05
}

impl MessageModelConfig {
    pub fn build(&self) -> Result<MessageModel, LargeDevError> {
        let strategy = MonotoneStrategyMatrix::new(self.strategy_matrix.clone())?;
        MessageModel::from_parts(self.signal_kernel.clone(), &strategy, self.alpha_floor)
    }
}

/// The receiver's committed-belief decision over message tallies: proposal
/// exactly when the payoff-weighted posterior mass is nonnegative.
pub struct ReceiverRule<'a> {
    spec: &'a GameSpec,
    model: &'a MessageModel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Decision {
    Proposal,
    StatusQuo,
}

impl<'a> ReceiverRule<'a> {
    pub fn new(spec: &'a GameSpec, model: &'a MessageModel) -> Result<Self, LargeDevError> {
        spec.require_three_states()?;
        assert!(model.n_messages() >= 2);
        Ok(ReceiverRule { spec, model })
    }

    /// Decision at an observed tally vector (counts over messages).
    pub fn decide(&self, counts: &[u32]) -> Decision {
        let n: u64 = counts.iter().map(|&c| c as u64).sum();
        let mut log_pos = Vec::with_capacity(2);
        let mut log_neg = Vec::with_capacity(1);
        for state in 0..3 {
            let q = self.spec.prior[state];
            let u = self.spec.u_receiver[state];
            if q == 0.0 || u == 0.0 {
                continue;
            }
            let lp = q.ln() + u.abs().ln() + log_multinomial_pmf(n, counts, &self.model.g[state]);
            if u > 0.0 {
                log_pos.push(lp);
            } else {
                log_neg.push(lp);
            }
        }
        if log_sum_exp(&log_pos) >= log_sum_exp(&log_neg) {
            Decision::Proposal
        } else {
            Decision::StatusQuo
        }
    }

    /// Exhaustively verifies the monotone-step property at `n` senders for
    /// three messages: swapping one message for a higher one never moves the
    /// decision away from the proposal.
    pub fn verify_monotone_steps(&self, n: u32) -> bool {
        if n == 0 {
            return true;
        }
        let favors = |d: Decision| d == Decision::Proposal;
        for t in SimplexIter::new(n - 1) {
            let d1 = favors(self.decide(&[t[0] + 1, t[1], t[2]]));
            let d2 = favors(self.decide(&[t[0], t[1] + 1, t[2]]));
            let d3 = favors(self.decide(&[t[0], t[1], t[2] + 1]));
            if (d1 && !d2) || (d2 && !d3) {
                return false;
            }
        }
        true
    }
}

/// Iterator over the discrete simplex of three-part tallies summing to `m`.
pub struct SimplexIter {
    m: u32,
    t1: u32,
    t2: u32,
    done: bool,
}

impl SimplexIter {
    pub fn new(m: u32) -> Self {
        SimplexIter { m, t1: 0, t2: 0, done: false }
    }
}

impl Iterator for SimplexIter {
    type Item = [u32; 3];

    fn next(&mut self) -> Option<[u32; 3]> {
        if self.done {
            return None;
        }
        let item = [self.t1, self.t2, self.m - self.t1 - self.t2];
        if self.t2 < self.m - self.t1 {
            self.t2 += 1;
        } else if self.t1 < self.m {
            self.t1 += 1;
            self.t2 = 0;
        } else {
            self.done = true;
        }
        Some(item)
    }
}

/// The set of tally vectors of the other senders at which one additional
/// message swings the receiver between her two actions, with its per-state
/// log probabilities.
#[derive(Debug, Clone, Serialize)]
pub struct PivotalSet {
    pub n: u32,
    pub members: Vec<[u32; 3]>,
    /// log P[pivotal | state] for each of the three states.
    pub log_prob: [f64; 3],
}

impl PivotalSet {
    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Empirical frequency chart of a member among the other senders.
    pub fn frequency(&self, member: &[u32; 3]) -> [f64; 3] {
        let m = (self.n - 1) as f64;
        [member[0] as f64 / m, member[1] as f64 / m, member[2] as f64 / m]
    }
}

/// Enumerates the pivotal events at `n` senders: tallies of the other
/// `n - 1` where the lowest and highest message disagree about the outcome.
/// An empty set means the receiver is unresponsive at this scale; it is
/// returned as such rather than treated as an error.
pub fn pivotal_set(
    spec: &GameSpec,
    model: &MessageModel,
    n: u32,
) -> Result<PivotalSet, LargeDevError> {
    if n < 2 {
        return Err(LargeDevError::TooFewSenders(n));
    }
    if model.n_messages() != 3 {
        return Err(LargeDevError::NotThreeMessages(model.n_messages()));
    }
    let rule = ReceiverRule::new(spec, model)?;
    let mut members = Vec::new();
    for t in SimplexIter::new(n - 1) {
        let low = rule.decide(&[t[0] + 1, t[1], t[2]]);
        let high = rule.decide(&[t[0], t[1], t[2] + 1]);
        if low != high {
            members.push(t);
        }
    }
    let mut log_prob = [f64::NEG_INFINITY; 3];
    for (state, lp) in log_prob.iter_mut().enumerate() {
        let terms: Vec<f64> = members
            .iter()
            .map(|m| log_multinomial_pmf((n - 1) as u64, m, &model.g[state]))
            .collect();
        *lp = log_sum_exp(&terms);
    }
    Ok(PivotalSet { n, members, log_prob })
}

/// The equal-divergence point between two distributions: the distribution
/// closest to the first (in relative entropy) among those equidistant from
/// both. Its divergence is the exponential decay rate of confusing the two.
#[derive(Debug, Clone, Serialize)]
pub struct ChernoffPoint {
    pub gamma: Vec<f64>,
    pub rate: f64,
    /// The geometric-mixture weight placing `gamma` between the two laws.
    pub tilt: f64,
}

/// Finds the equal-divergence point by bisecting the geometric-mixture path
/// between the two distributions; the divergence difference is linear in the
/// mixture, so the path crosses the constraint exactly once.
pub fn chernoff_point(g_i: &[f64], g_j: &[f64]) -> Result<ChernoffPoint, LargeDevError> {
    assert_eq!(g_i.len(), g_j.len());
    if let Some(index) = g_i.iter().position(|&v| v <= 0.0) {
        return Err(ProbError::ZeroReferenceCoordinate { index }.into());
    }
    if let Some(index) = g_j.iter().position(|&v| v <= 0.0) {
        return Err(ProbError::ZeroReferenceCoordinate { index }.into());
    }
    if g_i.iter().zip(g_j).all(|(a, b)| a == b) {
        return Ok(ChernoffPoint { gamma: g_i.to_vec(), rate: 0.0, tilt: 0.0 });
    }
    let log_i: Vec<f64> = g_i.iter().map(|v| v.ln()).collect();
    let log_j: Vec<f64> = g_j.iter().map(|v| v.ln()).collect();
    let mixture = |lambda: f64| -> Vec<f64> {
        let logs: Vec<f64> = log_i
            .iter()
            .zip(&log_j)
            .map(|(&li, &lj)| (1.0 - lambda) * li + lambda * lj)
            .collect();
        let norm = log_sum_exp(&logs);
        logs.iter().map(|l| (l - norm).exp()).collect()
    };
    let residual = |gamma: &[f64]| -> f64 {
        kl_categorical(gamma, g_i).expect("interior") - kl_categorical(gamma, g_j).expect("interior")
    };
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut gamma = mixture(0.5);
    let mut lambda = 0.5;
    for _ in 0..200 {
        lambda = 0.5 * (lo + hi);
        gamma = mixture(lambda);
        let r = residual(&gamma);
        if r.abs() < 1e-12 {
            break;
        }
        if r < 0.0 {
            lo = lambda;
        } else {
            hi = lambda;
        }
        if hi - lo < 1e-16 {
            break;
        }
    }
    let rate = kl_categorical(&gamma, g_i).expect("interior");
    Ok(ChernoffPoint { gamma, rate, tilt: lambda })
}

/// The four divergences behind the rate orderings of a three-state message
/// model, with the pairwise equal-divergence points resolved.
#[derive(Debug, Clone, Serialize)]
pub struct RateOrdering {
    pub rate_12_g1: f64,
    pub rate_13_g1: f64,
    pub rate_12_g2: f64,
    pub rate_12_g3: f64,
    pub ordered: bool,
}

/// Verifies the likelihood-ratio ordering of decay rates: separating the
/// bottom state from the middle is easier than from the top, and the
/// bottom-middle crossing point sits strictly closer to both than to the
/// top distribution.
pub fn mlrp_rate_ordering(model: &MessageModel) -> Result<RateOrdering, LargeDevError> {
    let g = &model.g;
    let p12 = chernoff_point(&g[0], &g[1])?;
    let p13 = chernoff_point(&g[0], &g[2])?;
    if p12.rate == 0.0 || p13.rate == 0.0 {
        return Err(LargeDevError::IdenticalDistributions);
    }
    let rate_12_g1 = p12.rate;
    let rate_13_g1 = p13.rate;
    let rate_12_g2 = kl_categorical(&p12.gamma, &g[1])?;
    let rate_12_g3 = kl_categorical(&p12.gamma, &g[2])?;
    let ordered = rate_12_g1 < rate_13_g1 && rate_12_g1 < rate_12_g3 && rate_12_g2 < rate_12_g3;
    Ok(RateOrdering { rate_12_g1, rate_13_g1, rate_12_g2, rate_12_g3, ordered })
}

/// One ladder row of the pivotal decay trace.
#[derive(Debug, Clone, Serialize)]
pub struct DecayRow {
    pub n: u32,
    /// log of P[pivotal | top] / P[pivotal | bottom].
    pub log_ratio_31: f64,
    /// log of P[pivotal | top] / P[pivotal | middle].
    pub log_ratio_32: f64,
    /// Share of the bottom-state pivotal mass carried by members whose
    /// frequency lies within the ball around the bottom-middle crossing.
    pub mass_in_ball: f64,
    pub pivotal_count: usize,
}

/// Trace of the pivotal decay diagnostics along a ladder, with fitted slope.
#[derive(Debug, Clone, Serialize)]
pub struct DecayTrace {
    pub rows: Vec<DecayRow>,
    /// Ladder points whose pivotal set came back empty.
    pub skipped: Vec<u32>,
    pub ball_radius: f64,
    pub slope_31: f64,
    pub r2_31: f64,
    pub slope_32: f64,
    pub r2_32: f64,
}

/// Computes the pivotal log-odds of the top state along the ladder under a
/// fixed informative strategy, plus the concentration of pivotal mass near
/// the bottom-middle crossing point.
pub fn pivotal_decay_trace(
    spec: &GameSpec,
    model: &MessageModel,
    ladder: &[u32],
    ball_radius: f64,
) -> Result<DecayTrace, LargeDevError> {
    let crossing = chernoff_point(&model.g[0], &model.g[1])?;
    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    for &n in ladder {
        let set = pivotal_set(spec, model, n)?;
        if set.is_empty() {
            skipped.push(n);
            continue;
        }
        let mut in_ball = Vec::new();
        for member in &set.members {
            let freq = set.frequency(member);
            let dist = freq
                .iter()
                .zip(&crossing.gamma)
                .map(|(f, c)| (f - c) * (f - c))
                .sum::<f64>()
                .sqrt();
            if dist < ball_radius {
                in_ball.push(log_multinomial_pmf((n - 1) as u64, member, &model.g[0]));
            }
        }
        let mass_in_ball = (log_sum_exp(&in_ball) - set.log_prob[0]).exp();
        rows.push(DecayRow {
            n,
            log_ratio_31: set.log_prob[2] - set.log_prob[0],
            log_ratio_32: set.log_prob[2] - set.log_prob[1],
            mass_in_ball,
            pivotal_count: set.members.len(),
        });
    }
    let ns: Vec<f64> = rows.iter().map(|r| r.n as f64).collect();
    let r31: Vec<f64> = rows.iter().map(|r| r.log_ratio_31).collect();
    let r32: Vec<f64> = rows.iter().map(|r| r.log_ratio_32).collect();
    let (slope_31, r2_31) = if rows.len() >= 2 {
        crate::asympt::fit_slope(&ns, &r31)
    } else {
        (f64::NAN, f64::NAN)
    };
    let (slope_32, r2_32) = if rows.len() >= 2 {
        crate::asympt::fit_slope(&ns, &r32)
    } else {
        (f64::NAN, f64::NAN)
    };
    Ok(DecayTrace { rows, skipped, ball_radius, slope_31, r2_31, slope_32, r2_32 })
}
