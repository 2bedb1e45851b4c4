//! Numerical verification of the limit results: transmission regimes, the
//! disagreement-mass threshold, decay and boundedness traces along sender
//! ladders, the information index, and comparative-statics sweeps.
//!
//! Limit statements are checked as finite-N trends on explicit ladders; the
//! outputs are labeled finite-N evidence, never proofs.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::equilibrium::{log_tail_prob, solve, Equilibrium, SolveError};
use crate::model::{conflict_profile, GameSpec, ModelError};

/// Default sender-count ladder for asymptotic traces.
pub const DEFAULT_LADDER: [u32; 6] = [50, 100, 200, 400, 800, 1600];

#[derive(Debug, Error)]
pub enum AsymptError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error("regime classification at zero disagreement mass requires q2 = 0, got {0}")]
    NonzeroDisagreementMass(f64),
    #[error("index undefined: full-information payoff {v_full} does not exceed babbling payoff {v_babble}")]
    IndexUndefined { v_full: f64, v_babble: f64 },
    #[error("sweep point {param} produced an invalid spec: {source}")]
    InvalidSweepPoint {
        param: f64,
        #[source]
        source: ModelError,
    },
}

/// Transmission regime when the disagreement state carries no prior mass:
/// the conflict ratio against the double likelihood jump of replacing one
/// rejection by one high signal under truthful reporting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TransmissionRegime {
    BabblingOnly,
    Aggregating,
    KnifeEdge,
}

/// Classifies the zero-disagreement-mass regime. The threshold is
/// `(rho3 / rho1) * ((1 - rho1) / (1 - rho3))`.
pub fn zero_disagreement_regime(spec: &GameSpec) -> Result<TransmissionRegime, AsymptError> {
    let profile = conflict_profile(spec)?;
    if profile.q2 != 0.0 {
        return Err(AsymptError::NonzeroDisagreementMass(profile.q2));
    }
    let threshold = aggregation_threshold(spec);
    Ok(if profile.ratio > threshold {
        TransmissionRegime::BabblingOnly
    } else if profile.ratio < threshold {
        TransmissionRegime::Aggregating
    } else {
        TransmissionRegime::KnifeEdge
    })
}

/// The zero-mass aggregation threshold `(rho3/rho1) * ((1-rho1)/(1-rho3))`.
pub fn aggregation_threshold(spec: &GameSpec) -> f64 {
    (spec.rho[2] / spec.rho[0]) * ((1.0 - spec.rho[0]) / (1.0 - spec.rho[2]))
}

/// Transmission regime with positive disagreement mass: the conflict ratio
/// against the single likelihood jump `rho3 / rho1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PersistenceRegime {
    /// Below the jump: transmission persists for small enough q2.
    PersistCandidate,
    /// Above the jump: transmission fails for every positive q2.
    Fail,
    /// Exactly at the jump.
    Boundary,
}

/// Classifies the positive-disagreement-mass regime. Meaningful for q2 > 0;
/// the comparison itself involves only payoffs and signal accuracies.
pub fn disagreement_regime(spec: &GameSpec) -> Result<PersistenceRegime, AsymptError> {
    let profile = conflict_profile(spec)?;
    let threshold = persistence_threshold(spec);
    Ok(if profile.ratio > threshold {
        PersistenceRegime::Fail
    } else if profile.ratio < threshold {
        PersistenceRegime::PersistCandidate
    } else {
        PersistenceRegime::Boundary
    })
}

/// The persistence threshold `rho3 / rho1`.
pub fn persistence_threshold(spec: &GameSpec) -> f64 {
    spec.rho[2] / spec.rho[0]
}

/// Builds the prior with disagreement mass `q2`, keeping the relative odds
/// of the two agreement states from the base spec.
pub fn with_disagreement_mass(spec: &GameSpec, q2: f64) -> GameSpec {
    let base = spec.prior[0] + spec.prior[2];
    let w1 = spec.prior[0] / base;
    let w3 = spec.prior[2] / base;
    GameSpec {
        prior: vec![(1.0 - q2) * w1, q2, (1.0 - q2) * w3],
        ..spec.clone()
    }
}

/// Bracket for the critical disagreement mass, reported both as the final
/// prior mass and as the unnormalized weight against the agreement states.
#[derive(Debug, Clone, Serialize)]
pub struct ThresholdMassEstimate {
    /// Bracket on the prior mass of the disagreement state.
    pub mass_lo: f64,
    pub mass_hi: f64,
    /// The same bracket expressed as a weight w with prior proportional to
    /// (w1, w, w3): w = mass / (1 - mass).
    pub weight_lo: f64,
    pub weight_hi: f64,
    /// Probe ladder used for the finite-N persistence proxy.
    pub ladder: Vec<u32>,
    /// False when existence along the ladder resurrected after a failure at
    /// either bracket endpoint, in which case the bracket was widened by one
    /// bisection step.
    pub ladder_monotone: bool,
    /// This estimate proxies a tail property in the sender count by
    /// existence at every ladder point; it is finite-N evidence.
    pub note: &'static str,
}

impl ThresholdMassEstimate {
    pub fn midpoint(&self) -> f64 {
        0.5 * (self.mass_lo + self.mass_hi)
    }
}

struct ProxyOutcome {
    persists: bool,
    ladder_monotone: bool,
}

fn persistence_proxy(spec: &GameSpec, q2: f64, ladder: &[u32]) -> Result<ProxyOutcome, AsymptError> {
    let probe = with_disagreement_mass(spec, q2);
    let mut seen_empty = false;
    let mut persists = true;
    let mut ladder_monotone = true;
    for &n in ladder {
        let nonempty = !solve(&probe, n)?.is_empty();
        if !nonempty {
            seen_empty = true;
            persists = false;
        } else if seen_empty {
            ladder_monotone = false;
        }
    }
    Ok(ProxyOutcome { persists, ladder_monotone })
}

/// Bisects on the disagreement mass for the boundary of the persistence
/// proxy: an informative equilibrium exists at every ladder point up to
/// `n_probe`. Returns a bracket of width at most `tol`.
pub fn estimate_threshold_mass(
    spec: &GameSpec,
    n_probe: u32,
    tol: f64,
) -> Result<ThresholdMassEstimate, AsymptError> {
    spec.require_three_states()?;
    let ladder: Vec<u32> = [50u32, 100, 200, 400, 800, 1600]
        .into_iter()
        .filter(|&n| n <= n_probe)
        .collect();
    let ladder = if ladder.is_empty() { vec![n_probe] } else { ladder };

    let mut lo = 0.0f64;
    let mut hi = 1.0 - 1e-9;
    let mut monotone = true;
    let low_end = persistence_proxy(spec, lo, &ladder)?;
    monotone &= low_end.ladder_monotone;
    if !low_end.persists {
        // No informative equilibrium even without disagreement mass: the
        // threshold is at zero.
        return Ok(ThresholdMassEstimate {
            mass_lo: 0.0,
            mass_hi: 0.0,
            weight_lo: 0.0,
            weight_hi: 0.0,
            ladder,
            ladder_monotone: monotone,
            note: "finite-N proxy on the probe ladder",
        });
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let out = persistence_proxy(spec, mid, &ladder)?;
        monotone &= out.ladder_monotone;
        if out.persists {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if !monotone {
        // Resurrections along the ladder blur the boundary; widen by one
        // step each way (clamped) and report.
        lo = (lo - tol).max(0.0);
        hi = (hi + tol).min(1.0);
    }
    Ok(ThresholdMassEstimate {
        mass_lo: lo,
        mass_hi: hi,
        weight_lo: lo / (1.0 - lo),
        weight_hi: hi / (1.0 - hi),
        ladder,
        ladder_monotone: monotone,
        note: "finite-N proxy on the probe ladder",
    })
}

/// Per-N record of the most informative equilibrium and its diagnostics.
#[derive(Debug, Clone, Serialize)]
pub struct LadderPoint {
    pub n: u32,
    /// Largest equilibrium x, zero when only babbling exists.
    pub x_max: f64,
    /// Cutoff of the most informative equilibrium, zero when babbling.
    pub cutoff_max: u32,
    pub n_times_x: f64,
    pub v_sender_max: f64,
    pub v_receiver_max: f64,
    pub v_receiver_babbling: f64,
    /// P[proposal | bottom state] + P[status quo | top state]; equals one
    /// under babbling because the decision ignores the tally.
    pub learning_gap: f64,
    pub informative: bool,
    pub equilibrium_count: usize,
}

/// Traces the most informative equilibrium along a sender-count ladder.
pub fn ladder_trace(spec: &GameSpec, ladder: &[u32]) -> Result<Vec<LadderPoint>, AsymptError> {
    spec.require_three_states()?;
    ladder
        .par_iter()
        .map(|&n| {
            let set = solve(spec, n)?;
            let (b_s, b_r) = set.babbling;
            let point = match set.most_informative() {
                Some(eq) => LadderPoint {
                    n,
                    x_max: eq.x,
                    cutoff_max: eq.cutoff,
                    n_times_x: n as f64 * eq.x,
                    v_sender_max: eq.v_sender,
                    v_receiver_max: eq.v_receiver,
                    v_receiver_babbling: b_r,
                    learning_gap: learning_gap(spec, eq),
                    informative: true,
                    equilibrium_count: set.equilibria.len(),
                },
                None => LadderPoint {
                    n,
                    x_max: 0.0,
                    cutoff_max: 0,
                    n_times_x: 0.0,
                    v_sender_max: b_s,
                    v_receiver_max: b_r,
                    v_receiver_babbling: b_r,
                    learning_gap: 1.0,
                    informative: false,
                    equilibrium_count: 0,
                },
            };
            Ok(point)
        })
        .collect()
}

/// The per-sender informativeness of the most informative equilibrium along
/// the ladder, zero where only babbling exists.
pub fn max_informativeness_trace(
    spec: &GameSpec,
    ladder: &[u32],
) -> Result<Vec<(u32, f64)>, AsymptError> {
    Ok(ladder_trace(spec, ladder)?.into_iter().map(|p| (p.n, p.x_max)).collect())
}

/// The agreement-state error sum at the most informative equilibrium along
/// the ladder (one under babbling: the decision ignores the tally).
pub fn learning_gap_trace(
    spec: &GameSpec,
    ladder: &[u32],
) -> Result<Vec<(u32, f64)>, AsymptError> {
    Ok(ladder_trace(spec, ladder)?.into_iter().map(|p| (p.n, p.learning_gap)).collect())
}

/// The senders' welfare at the most informative equilibrium along the
/// ladder (babbling welfare where no informative equilibrium exists).
pub fn sender_welfare_trace(
    spec: &GameSpec,
    ladder: &[u32],
) -> Result<Vec<(u32, f64)>, AsymptError> {
    Ok(ladder_trace(spec, ladder)?.into_iter().map(|p| (p.n, p.v_sender_max)).collect())
}

/// P[proposal | bottom state] + P[status quo | top state] at an equilibrium.
pub fn learning_gap(spec: &GameSpec, eq: &Equilibrium) -> f64 {
    let strategy = eq.strategy();
    let p_prop_bottom = log_tail_prob(spec, &strategy, eq.n, eq.cutoff, 0).exp();
    let p_sq_top = 1.0 - log_tail_prob(spec, &strategy, eq.n, eq.cutoff, 2).exp();
    p_prop_bottom + p_sq_top
}

/// Walks the ladder for the smallest sender count carrying an equilibrium
/// with x at least `1 - epsilon`. `None` is inconclusive, not a refutation.
pub fn almost_truthful_witness(
    spec: &GameSpec,
    epsilon: f64,
    ladder: &[u32],
) -> Result<Option<(u32, Equilibrium)>, AsymptError> {
    for &n in ladder {
        let set = solve(spec, n)?;
        if let Some(eq) = set
            .equilibria
            .iter()
            .find(|eq| eq.x >= 1.0 - epsilon)
        {
            return Ok(Some((n, eq.clone())));
        }
    }
    Ok(None)
}

/// The information index proxied at a single sender count.
#[derive(Debug, Clone, Serialize)]
pub struct IndexReport {
    pub n: u32,
    pub value: f64,
    pub v_receiver_max: f64,
    pub v_receiver_babbling: f64,
    pub v_receiver_full: f64,
    /// The limiting index is proxied at this single sender count.
    pub note: &'static str,
}

/// Receiver's expected payoff under full state observation.
pub fn full_information_receiver_payoff(spec: &GameSpec) -> f64 {
    spec.prior
        .iter()
        .zip(&spec.u_receiver)
        .map(|(q, u)| q * u.max(0.0))
        .sum()
}

/// Share of the babbling-to-full-information payoff gap the receiver
/// recovers in the most informative equilibrium at sender count `n`.
pub fn information_index(spec: &GameSpec, n: u32) -> Result<IndexReport, AsymptError> {
    let set = solve(spec, n)?;
    let (_, v_babble) = set.babbling;
    let v_full = full_information_receiver_payoff(spec);
    if v_full - v_babble <= 0.0 {
        return Err(AsymptError::IndexUndefined { v_full, v_babble });
    }
    let v_max = set
        .most_informative()
        .map(|eq| eq.v_receiver)
        .unwrap_or(v_babble);
    Ok(IndexReport {
        n,
        value: (v_max - v_babble) / (v_full - v_babble),
        v_receiver_max: v_max,
        v_receiver_babbling: v_babble,
        v_receiver_full: v_full,
        note: "limiting index proxied at a single sender count",
    })
}

/// One cell of a comparative-statics sweep.
#[derive(Debug, Clone, Serialize)]
pub struct SweepCell {
    pub param: f64,
    pub x_max: f64,
    pub cutoff_max: u32,
    pub n_times_x: f64,
    pub v_sender_max: f64,
    pub v_receiver_max: f64,
    pub index_proxy: f64,
    pub informative: bool,
}

fn sweep_cell(spec: &GameSpec, param: f64, n: u32) -> Result<SweepCell, AsymptError> {
    let set = solve(spec, n)?;
    let (_, v_babble) = set.babbling;
    let v_full = full_information_receiver_payoff(spec);
    let denom = v_full - v_babble;
    Ok(match set.most_informative() {
        Some(eq) => SweepCell {
            param,
            x_max: eq.x,
            cutoff_max: eq.cutoff,
            n_times_x: n as f64 * eq.x,
            v_sender_max: eq.v_sender,
            v_receiver_max: eq.v_receiver,
            index_proxy: if denom > 0.0 { (eq.v_receiver - v_babble) / denom } else { f64::NAN },
            informative: true,
        },
        None => SweepCell {
            param,
            x_max: 0.0,
            cutoff_max: 0,
            n_times_x: 0.0,
            v_sender_max: set.babbling.0,
            v_receiver_max: v_babble,
            index_proxy: if denom > 0.0 { 0.0 } else { f64::NAN },
            informative: false,
        },
    })
}

/// Rescales the receiver's top-state payoff to hit a target conflict ratio.
pub fn with_conflict_ratio(spec: &GameSpec, ratio: f64) -> GameSpec {
    let u_r3 = ratio * (spec.u_receiver[0] / spec.u_senders[0]) * spec.u_senders[2];
    let mut u_receiver = spec.u_receiver.clone();
    u_receiver[2] = u_r3;
    GameSpec { u_receiver, ..spec.clone() }
}

/// Sweep of the most informative equilibrium over conflict ratios at a fixed
/// sender count, varying the receiver's top-state payoff.
pub fn conflict_sweep(
    spec: &GameSpec,
    ratios: &[f64],
    n: u32,
) -> Result<Vec<SweepCell>, AsymptError> {
    let specs: Vec<(f64, GameSpec)> = ratios
        .iter()
        .map(|&r| {
            let s = with_conflict_ratio(spec, r);
            s.validate()
                .map_err(|e| AsymptError::InvalidSweepPoint { param: r, source: e })?;
            Ok((r, s))
        })
        .collect::<Result<_, AsymptError>>()?;
    specs
        .par_iter()
        .map(|(r, s)| sweep_cell(s, *r, n))
        .collect()
}

/// Sweep over the disagreement-state prior mass, holding the agreement-state
/// odds fixed, at a fixed sender count.
pub fn disagreement_sweep(
    spec: &GameSpec,
    masses: &[f64],
    n: u32,
) -> Result<Vec<SweepCell>, AsymptError> {
    let specs: Vec<(f64, GameSpec)> = masses
        .iter()
        .map(|&q2| {
            let s = with_disagreement_mass(spec, q2);
            s.validate()
                .map_err(|e| AsymptError::InvalidSweepPoint { param: q2, source: e })?;
            Ok((q2, s))
        })
        .collect::<Result<_, AsymptError>>()?;
    specs
        .par_iter()
        .map(|(q2, s)| sweep_cell(s, *q2, n))
        .collect()
}

/// Least-squares slope and R^2 of y against x.
pub fn fit_slope(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    (slope, r2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::test_specs::{table2, table2_zero_q2};
    use crate::model::GameSpec;

    #[test]
    fn zero_mass_regime_classification() {
        // Threshold is 16 at accuracies (0.2, 0.5, 0.8).
        assert_eq!(
            zero_disagreement_regime(&table2_zero_q2(2.0)).unwrap(),
            TransmissionRegime::Aggregating
        );
        assert_eq!(
            zero_disagreement_regime(&table2_zero_q2(20.0)).unwrap(),
            TransmissionRegime::BabblingOnly
        );
        assert!(zero_disagreement_regime(&table2(2.0)).is_err());

        // Exactly representable boundary: accuracies (0.25, 0.5, 0.75) give
        // threshold (3)*(3) = 9.
        let knife = GameSpec {
            rho: vec![0.25, 0.5, 0.75],
            ..table2_zero_q2(9.0)
        };
        assert_eq!(
            zero_disagreement_regime(&knife).unwrap(),
            TransmissionRegime::KnifeEdge
        );
    }

    #[test]
    fn positive_mass_regime_classification() {
        // rho3 / rho1 = 4.
        assert_eq!(
            disagreement_regime(&table2(2.0)).unwrap(),
            PersistenceRegime::PersistCandidate
        );
        assert_eq!(
            disagreement_regime(&table2(8.0)).unwrap(),
            PersistenceRegime::Fail
        );
        assert_eq!(
            disagreement_regime(&table2(4.0)).unwrap(),
            PersistenceRegime::Boundary
        );
    }

    #[test]
    fn regimes_match_direct_comparison_on_many_specs() {
        // Pseudo-random parameter draws, fixed seed.
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = move || {
            state ^= state >> 30;
            state = state.wrapping_mul(0xbf58476d1ce4e5b9);
            state ^= state >> 27;
            state = state.wrapping_mul(0x94d049bb133111eb);
            state ^= state >> 31;
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..1000 {
            let r1 = 0.05 + 0.4 * next();
            let r3 = 0.55 + 0.4 * next();
            let r2 = 0.5 * (r1 + r3);
            let t = 1.0 + 15.0 * next();
            let spec = GameSpec {
                rho: vec![r1, r2, r3],
                ..table2(t)
            };
            let regime = disagreement_regime(&spec).unwrap();
            let expected = if t > r3 / r1 {
                PersistenceRegime::Fail
            } else if t < r3 / r1 {
                PersistenceRegime::PersistCandidate
            } else {
                PersistenceRegime::Boundary
            };
            assert_eq!(regime, expected);
            let zero = GameSpec {
                prior: vec![0.5, 0.0, 0.5],
                ..spec
            };
            let agg = zero_disagreement_regime(&zero).unwrap();
            let thr = (r3 / r1) * ((1.0 - r1) / (1.0 - r3));
            let expected = if t > thr {
                TransmissionRegime::BabblingOnly
            } else if t < thr {
                TransmissionRegime::Aggregating
            } else {
                TransmissionRegime::KnifeEdge
            };
            assert_eq!(agg, expected);
        }
    }

    #[test]
    fn ladder_trace_baseline_decays() {
        let spec = table2(2.0);
        let trace = ladder_trace(&spec, &[50, 100, 200]).unwrap();
        assert!(trace.iter().all(|p| p.informative));
        assert!(trace[2].x_max < trace[0].x_max);
        assert!(trace.iter().all(|p| p.learning_gap > 0.0 && p.learning_gap < 2.0));
        // The column extractors agree with the full trace.
        let xs = max_informativeness_trace(&spec, &[50, 100, 200]).unwrap();
        let gaps = learning_gap_trace(&spec, &[50, 100, 200]).unwrap();
        let vs = sender_welfare_trace(&spec, &[50, 100, 200]).unwrap();
        for (i, p) in trace.iter().enumerate() {
            assert_eq!(xs[i], (p.n, p.x_max));
            assert_eq!(gaps[i], (p.n, p.learning_gap));
            assert_eq!(vs[i], (p.n, p.v_sender_max));
        }
    }

    #[test]
    fn babbling_only_trace_reports_unit_gap_and_zero_x() {
        let spec = table2(8.0);
        let trace = ladder_trace(&spec, &[100, 200]).unwrap();
        for p in &trace {
            assert!(!p.informative);
            assert_eq!(p.x_max, 0.0);
            assert_eq!(p.learning_gap, 1.0);
        }
    }

    #[test]
    fn witness_found_quickly_without_disagreement() {
        let spec = table2_zero_q2(2.0);
        let witness = almost_truthful_witness(&spec, 0.1, &[5, 10, 25, 50]).unwrap();
        let (n, eq) = witness.expect("witness exists");
        assert!(eq.x >= 0.9, "x={} at n={n}", eq.x);
    }

    #[test]
    fn index_bounds_and_babbling_zero() {
        let spec = table2(2.0);
        let report = information_index(&spec, 100).unwrap();
        assert!(report.value > 0.0 && report.value <= 1.0);

        // Babbling-only spec: high conflict.
        let spec = table2(8.0);
        let report = information_index(&spec, 200).unwrap();
        assert_eq!(report.value, 0.0);
    }

    #[test]
    fn conflict_rescaling_hits_target_ratio() {
        let spec = table2(2.0);
        for r in [1.0, 1.5, 3.3, 10.0] {
            let s = with_conflict_ratio(&spec, r);
            let got = conflict_profile(&s).unwrap().ratio;
            assert!((got - r).abs() < 1e-12);
            s.validate().unwrap();
        }
    }

    #[test]
    fn disagreement_mass_rebalances_prior() {
        let spec = table2(2.0);
        let s = with_disagreement_mass(&spec, 0.3);
        assert!((s.prior.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!((s.prior[1] - 0.3).abs() < 1e-15);
        assert!((s.prior[0] / s.prior[2] - spec.prior[0] / spec.prior[2]).abs() < 1e-12);
    }

    #[test]
    fn sweep_cells_reproduce_fresh_solves_bitwise() {
        let spec = table2(2.0);
        let n = 120;
        let cells = conflict_sweep(&spec, &[1.5, 2.5], n).unwrap();
        for cell in &cells {
            let fresh = crate::equilibrium::solve(&with_conflict_ratio(&spec, cell.param), n)
                .unwrap();
            match fresh.most_informative() {
                Some(eq) => {
                    assert_eq!(eq.x.to_bits(), cell.x_max.to_bits());
                    assert_eq!(eq.v_sender.to_bits(), cell.v_sender_max.to_bits());
                    assert_eq!(eq.cutoff, cell.cutoff_max);
                }
                None => assert!(!cell.informative),
            }
        }
    }

    #[test]
    fn slope_fit_recovers_line() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys = [2.0, 4.0, 6.0, 8.0];
        let (slope, r2) = fit_slope(&xs, &ys);
        assert!((slope - 2.0).abs() < 1e-12);
        assert!((r2 - 1.0).abs() < 1e-12);
    }
}
