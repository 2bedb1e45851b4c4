//! Seeded Monte Carlo oracle: simulates states, signals, messages, and
//! receiver decisions to validate the analytic probabilities and welfare.
//!
//! Randomness is counter-based: each trial owns a generator keyed by
//! (seed, trial index), so results are independent of scheduling, and all
//! aggregation happens on integer counters, whose parallel reduction is
//! exact. Fixed seed means bit-identical estimates at any thread count.

use rayon::prelude::*;
use serde::Serialize;

use crate::largedev::{Decision, MessageModel, ReceiverRule};
use crate::model::GameSpec;

/// One simulation scenario.
#[derive(Debug, Clone)]
pub enum Scenario {
    /// Symmetric equilibrium play against a responsive receiver cutoff.
    EquilibriumPlay { x_low: f64, x_high: f64, cutoff: u32 },
    /// Truthful reporting against a committed cutoff.
    CutoffMechanism { cutoff: u32 },
    /// Truthful reporting against the two-cutoff randomized commitment.
    RandomizedMechanism { mu: f64, cutoff_alpha: u32, cutoff_beta: u32 },
    /// Message play through a signal kernel and monotone strategy, scored
    /// by the committed-belief receiver rule.
    MessageModelPlay { model: MessageModel },
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SimConfig {
    pub trials: u64,
    pub seed: u64,
    pub n: u32,
}

/// A point estimate with its binomial or sample standard error.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
}

impl Estimate {
    fn from_counts(hits: u64, trials: u64) -> Estimate {
        if trials == 0 {
            return Estimate { value: f64::NAN, std_error: f64::NAN };
        }
        let p = hits as f64 / trials as f64;
        Estimate { value: p, std_error: (p * (1.0 - p) / trials as f64).sqrt() }
    }
}

/// Deterministic per-trial generator: a 64-bit mixing sequence keyed by the
/// run seed and the trial index.
#[derive(Debug, Clone)]
pub struct TrialRng {
    state: u64,
}

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl TrialRng {
    pub fn new(seed: u64, trial: u64) -> Self {
        let state = mix(seed ^ mix(trial.wrapping_mul(GOLDEN).wrapping_add(1)));
        TrialRng { state }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN);
        mix(self.state)
    }

    /// Uniform draw in [0, 1) with 53 bits of precision.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.next_f64() < p
    }

    /// Index draw from an unnormalized nonnegative weight vector.
    pub fn categorical(&mut self, weights: &[f64]) -> usize {
        let total: f64 = weights.iter().sum();
        let mut u = self.next_f64() * total;
        for (i, &w) in weights.iter().enumerate() {
            if u < w {
                return i;
            }
            u -= w;
        }
        weights.len() - 1
    }
}

/// Raw integer tallies from a run. Merging two count blocks is exact, which
/// is what makes the parallel reduction deterministic.
#[derive(Debug, Clone, Serialize)]
pub struct SimCounts {
    pub state_trials: [u64; 3],
    /// tally_hist[t][state]: full-panel approval tally (binary scenarios).
    pub tally_hist: Vec<[u64; 3]>,
    /// Pivotal event among the other senders, per state. For the randomized
    /// mechanism this is the mixed event under the drawn rule.
    pub pivot_hits: [u64; 3],
    pub pivot_alpha_hits: [u64; 3],
    pub pivot_beta_hits: [u64; 3],
    pub proposal_hits: [u64; 3],
}

impl SimCounts {
    fn new(n: u32) -> Self {
        SimCounts {
            state_trials: [0; 3],
            tally_hist: vec![[0; 3]; (n + 2) as usize],
            pivot_hits: [0; 3],
            pivot_alpha_hits: [0; 3],
            pivot_beta_hits: [0; 3],
            proposal_hits: [0; 3],
        }
    }

    fn merge(mut self, other: SimCounts) -> SimCounts {
        for s in 0..3 {
            self.state_trials[s] += other.state_trials[s];
            self.pivot_hits[s] += other.pivot_hits[s];
            self.pivot_alpha_hits[s] += other.pivot_alpha_hits[s];
            self.pivot_beta_hits[s] += other.pivot_beta_hits[s];
            self.proposal_hits[s] += other.proposal_hits[s];
        }
        for (a, b) in self.tally_hist.iter_mut().zip(other.tally_hist) {
            for s in 0..3 {
                a[s] += b[s];
            }
        }
        self
    }
}

/// Empirical estimates from a seeded run.
#[derive(Debug, Clone, Serialize)]
pub struct SimReport {
    pub config: SimConfig,
    pub counts: SimCounts,
}

impl SimReport {
    /// P[tally = t | state].
    pub fn p_tally(&self, state: usize, t: u32) -> Estimate {
        Estimate::from_counts(
            self.counts.tally_hist[t as usize][state],
            self.counts.state_trials[state],
        )
    }

    /// P[pivotal | state] under the scenario's pivotal event.
    pub fn p_pivot(&self, state: usize) -> Estimate {
        Estimate::from_counts(self.counts.pivot_hits[state], self.counts.state_trials[state])
    }

    /// P[proposal | state].
    pub fn p_proposal(&self, state: usize) -> Estimate {
        Estimate::from_counts(self.counts.proposal_hits[state], self.counts.state_trials[state])
    }

    /// Unconditional expected payoffs (senders, receiver), with sample
    /// standard errors. Per-trial payoffs take one of finitely many values,
    /// so moments come straight off the counters.
    pub fn welfare(&self, spec: &GameSpec) -> (Estimate, Estimate) {
        let trials = self.config.trials as f64;
        let mut mean = [0.0f64; 2];
        let mut second = [0.0f64; 2];
        for state in 0..3 {
            let hits = self.counts.proposal_hits[state] as f64;
            for (j, u) in [spec.u_senders[state], spec.u_receiver[state]]
                .into_iter()
                .enumerate()
            {
                mean[j] += hits * u;
                second[j] += hits * u * u;
            }
        }
        let finish = |sum: f64, sumsq: f64| {
            let m = sum / trials;
            let var = (sumsq / trials - m * m).max(0.0);
            Estimate { value: m, std_error: (var / trials).sqrt() }
        };
        (finish(mean[0], second[0]), finish(mean[1], second[1]))
    }
}

fn run_trial(spec: &GameSpec, scenario: &Scenario, n: u32, rng: &mut TrialRng, counts: &mut SimCounts) {
    let state = rng.categorical(&spec.prior);
    counts.state_trials[state] += 1;
    match scenario {
        Scenario::EquilibriumPlay { x_low, x_high, cutoff } => {
            let (t_all, t_others) = draw_approvals(spec, state, n, rng, |signal, rng| {
                if signal { rng.bernoulli(*x_high) } else { rng.bernoulli(*x_low) }
            });
            counts.tally_hist[t_all as usize][state] += 1;
            if t_others == cutoff.saturating_sub(1) {
                counts.pivot_hits[state] += 1;
            }
            if t_all >= *cutoff {
                counts.proposal_hits[state] += 1;
            }
        }
        Scenario::CutoffMechanism { cutoff } => {
            let (t_all, t_others) = draw_approvals(spec, state, n, rng, |signal, _| signal);
            counts.tally_hist[t_all as usize][state] += 1;
            if t_others == cutoff.saturating_sub(1) {
                counts.pivot_hits[state] += 1;
                counts.pivot_alpha_hits[state] += 1;
            }
            if t_all >= *cutoff {
                counts.proposal_hits[state] += 1;
            }
        }
        Scenario::RandomizedMechanism { mu, cutoff_alpha, cutoff_beta } => {
            let alpha_rule = rng.bernoulli(*mu);
            let (t_all, t_others) = draw_approvals(spec, state, n, rng, |signal, _| signal);
            counts.tally_hist[t_all as usize][state] += 1;
            if t_others == cutoff_alpha - 1 {
                counts.pivot_alpha_hits[state] += 1;
            }
            if t_others == cutoff_beta - 1 {
                counts.pivot_beta_hits[state] += 1;
            }
            let cutoff = if alpha_rule { *cutoff_alpha } else { *cutoff_beta };
            if t_others == cutoff - 1 {
                counts.pivot_hits[state] += 1;
            }
            if t_all >= cutoff {
                counts.proposal_hits[state] += 1;
            }
        }
        Scenario::MessageModelPlay { model } => {
            let rule = ReceiverRule::new(spec, model).expect("three-state spec");
            let k = model.n_messages();
            let mut others = vec![0u32; k];
            for _ in 0..n - 1 {
                let signal = rng.categorical(&model.kernel[state]);
                let message = rng.categorical(model.strategy_row(signal));
                others[message] += 1;
            }
            let last_signal = rng.categorical(&model.kernel[state]);
            let last_message = rng.categorical(model.strategy_row(last_signal));
            // Pivotal: the extreme messages disagree about the outcome.
            let mut low = others.clone();
            low[0] += 1;
            let mut high = others.clone();
            high[k - 1] += 1;
            if rule.decide(&low) != rule.decide(&high) {
                counts.pivot_hits[state] += 1;
            }
            let mut full = others;
            full[last_message] += 1;
            if rule.decide(&full) == Decision::Proposal {
                counts.proposal_hits[state] += 1;
            }
        }
    }
}

fn draw_approvals<F: Fn(bool, &mut TrialRng) -> bool>(
    spec: &GameSpec,
    state: usize,
    n: u32,
    rng: &mut TrialRng,
    approve: F,
) -> (u32, u32) {
    let rho = spec.rho[state];
    let mut t_all = 0u32;
    let mut t_others = 0u32;
    for sender in 0..n {
        let signal = rng.bernoulli(rho);
        if approve(signal, rng) {
            t_all += 1;
            if sender < n - 1 {
                t_others += 1;
            }
        }
    }
    (t_all, t_others)
}

/// Runs the scenario for the configured number of trials. Deterministic for
/// a fixed seed regardless of the worker count.
pub fn simulate(spec: &GameSpec, scenario: &Scenario, config: SimConfig) -> SimReport {
    assert!(config.trials >= 1);
    const CHUNK: u64 = 1 << 14;
    let chunks: Vec<(u64, u64)> = (0..config.trials)
        .step_by(CHUNK as usize)
        .map(|start| (start, (start + CHUNK).min(config.trials)))
        .collect();
    let counts = chunks
        .into_par_iter()
        .map(|(start, end)| {
            let mut local = SimCounts::new(config.n);
            for trial in start..end {
                let mut rng = TrialRng::new(config.seed, trial);
                run_trial(spec, scenario, config.n, &mut rng, &mut local);
            }
            local
        })
        .reduce(|| SimCounts::new(config.n), SimCounts::merge);
    SimReport { config, counts }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibrium::{solve, welfare};
    use crate::model::test_specs::table2;
    use crate::model::SenderStrategy;
    use crate::prob::tally_logpmf;

    const TRIALS: u64 = 200_000;

    fn within(analytic: f64, est: Estimate, sigmas: f64) -> bool {
        let band = sigmas * est.std_error.max(1e-9);
        (analytic - est.value).abs() <= band
    }

    // Binomial standard error evaluated at the analytic probability, which
    // stays meaningful when the empirical count is zero.
    fn within_analytic(analytic: f64, observed: f64, trials: u64, sigmas: f64) -> bool {
        let se = (analytic * (1.0 - analytic) / trials as f64).sqrt();
        (analytic - observed).abs() <= sigmas * se.max(1e-9)
    }

    #[test]
    fn fixed_seed_is_bit_identical() {
        let spec = table2(2.0);
        let scenario = Scenario::EquilibriumPlay { x_low: 0.0, x_high: 0.3, cutoff: 2 };
        let config = SimConfig { trials: 50_000, seed: 7, n: 20 };
        let a = simulate(&spec, &scenario, config);
        let b = simulate(&spec, &scenario, config);
        assert_eq!(a.counts.tally_hist, b.counts.tally_hist);
        assert_eq!(a.counts.proposal_hits, b.counts.proposal_hits);
        // And across thread counts.
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let c = pool.install(|| simulate(&spec, &scenario, config));
        assert_eq!(a.counts.tally_hist, c.counts.tally_hist);
    }

    #[test]
    fn tally_distribution_matches_analytic() {
        let spec = table2(2.0);
        let x = 0.3;
        let n = 20u32;
        let scenario = Scenario::EquilibriumPlay { x_low: 0.0, x_high: x, cutoff: 5 };
        let report = simulate(&spec, &scenario, SimConfig { trials: TRIALS, seed: 11, n });
        let strategy = SenderStrategy::informative(x).unwrap();
        for state in 0..3 {
            let conditional = report.counts.state_trials[state];
            for t in 0..=n {
                let analytic = tally_logpmf(&spec, &strategy, n, t, state).unwrap().prob();
                let est = report.p_tally(state, t);
                assert!(
                    within_analytic(analytic, est.value, conditional, 5.0),
                    "state {state} t {t}: {analytic} vs {:?}",
                    est
                );
            }
        }
    }

    #[test]
    fn degenerate_strategy_never_approves() {
        let spec = table2(2.0);
        let scenario = Scenario::EquilibriumPlay { x_low: 0.0, x_high: 0.0, cutoff: 1 };
        let report = simulate(&spec, &scenario, SimConfig { trials: 10_000, seed: 3, n: 10 });
        for state in 0..3 {
            let zeros = report.counts.tally_hist[0][state];
            assert_eq!(zeros, report.counts.state_trials[state]);
        }
    }

    #[test]
    fn welfare_matches_analytic() {
        let spec = table2(2.0);
        let set = solve(&spec, 30).unwrap();
        let eq = set.most_informative().unwrap();
        let scenario = Scenario::EquilibriumPlay { x_low: 0.0, x_high: eq.x, cutoff: eq.cutoff };
        let report = simulate(&spec, &scenario, SimConfig { trials: TRIALS, seed: 23, n: 30 });
        let (vs, vr) = welfare(&spec, &eq.strategy(), 30, eq.cutoff);
        let (es, er) = report.welfare(&spec);
        assert!(within(vs, es, 5.0), "{vs} vs {es:?}");
        assert!(within(vr, er, 5.0), "{vr} vs {er:?}");
    }

    #[test]
    fn standard_error_shrinks_at_root_rate() {
        let spec = table2(2.0);
        let scenario = Scenario::CutoffMechanism { cutoff: 10 };
        let small = simulate(&spec, &scenario, SimConfig { trials: 50_000, seed: 5, n: 20 });
        let large = simulate(&spec, &scenario, SimConfig { trials: 200_000, seed: 5, n: 20 });
        let se_small = small.p_proposal(2).std_error;
        let se_large = large.p_proposal(2).std_error;
        let shrink = se_small / se_large;
        assert!((shrink - 2.0).abs() < 0.4, "shrink factor {shrink}");
    }
}
