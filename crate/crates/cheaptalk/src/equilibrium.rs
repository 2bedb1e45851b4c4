//! Enumeration of all symmetric informative equilibria for a given sender
//! count, plus welfare accounting and the brute-force grid oracles.
//!
//! For each responsive cutoff the solver scans the high-signal indifference
//! condition over a fine grid of approval probabilities, refines every sign
//! change by bisection, adds the approve-for-sure corner, and keeps a
//! candidate only if the low-signal condition and the receiver's cutoff both
//! agree. The scan works on precomputed per-grid-point log tables so a full
//! sweep over cutoffs stays cheap at desk scale.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::bestresp::{receiver_cutoff, sender_condition, BestRespError, INDIFFERENCE_TOL};
use crate::model::{GameSpec, ModelError, SenderStrategy};
use crate::prob::{log_sum_exp, tally_logpmf};

/// Number of grid points for the root scan over the approval probability.
pub const ROOT_SCAN_GRID: usize = 1 << 12;
/// Bisection target on |log L_S(high)| for interior roots.
pub const ROOT_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum SolveError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    BestResp(#[from] BestRespError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EquilibriumKind {
    /// The high-signal condition holds with indifference at an interior x.
    Interior,
    /// x = 1 with the high-signal ratio weakly above one.
    Corner,
}

/// One informative equilibrium: the scalar approval probability on the high
/// signal (the low signal is rejected outright), the receiver's cutoff, and
/// welfare plus ratio diagnostics.
#[derive(Debug, Clone, Serialize)]
pub struct Equilibrium {
    pub x: f64,
    pub cutoff: u32,
    pub n: u32,
    pub kind: EquilibriumKind,
    pub log_ls_high: f64,
    pub log_ls_low: f64,
    pub v_sender: f64,
    pub v_receiver: f64,
}

impl Equilibrium {
    pub fn strategy(&self) -> SenderStrategy {
        SenderStrategy::informative(self.x).expect("x in (0,1]")
    }
}

/// All informative equilibria at a given sender count, sorted by x, with the
/// babbling benchmark welfare attached.
#[derive(Debug, Clone, Serialize)]
pub struct EquilibriumSet {
    pub n: u32,
    pub equilibria: Vec<Equilibrium>,
    /// (senders', receiver's) expected payoff when the tally is ignored.
    pub babbling: (f64, f64),
    /// Cutoffs that attracted more than one root in the scan. The theory
    /// suggests at most one equilibrium per cutoff; this flags exceptions
    /// rather than assuming them away.
    pub multi_root_cutoffs: Vec<u32>,
}

impl EquilibriumSet {
    pub fn is_empty(&self) -> bool {
        self.equilibria.is_empty()
    }

    /// The Pareto-dominant equilibrium: the one with the largest x.
    pub fn most_informative(&self) -> Option<&Equilibrium> {
        self.equilibria.last()
    }
}

/// Precomputed log tables for one (spec, n): per grid point x, the per-state
/// log approval and rejection probabilities. The binomial coefficient of the
/// pivotal event is common to numerator and denominator of the sender ratio
/// and cancels, so the scan never touches log-gamma.
struct ScanContext {
    xs: Vec<f64>,
    log_a: Vec<[f64; 3]>,
    log_r: Vec<[f64; 3]>,
    /// ln(q_i * rho_i * |U_S(theta_i)|) per state (high signal), -inf for
    /// zero prior mass.
    c_high: [f64; 3],
}

impl ScanContext {
    fn new(spec: &GameSpec, grid: usize) -> Self {
        let mut xs = Vec::with_capacity(grid + 1);
        for k in 1..=grid {
            xs.push(k as f64 / grid as f64);
        }
        let log_a: Vec<[f64; 3]> = xs
            .iter()
            .map(|&x| {
                [
                    (spec.rho[0] * x).ln(),
                    (spec.rho[1] * x).ln(),
                    (spec.rho[2] * x).ln(),
                ]
            })
            .collect();
        let log_r: Vec<[f64; 3]> = xs
            .iter()
            .map(|&x| {
                [
                    (-spec.rho[0] * x).ln_1p(),
                    (-spec.rho[1] * x).ln_1p(),
                    (-spec.rho[2] * x).ln_1p(),
                ]
            })
            .collect();
        let weight = |state: usize, sig: f64| -> f64 {
            let q = spec.prior[state];
            if q == 0.0 {
                f64::NEG_INFINITY
            } else {
                q.ln() + sig.ln() + spec.u_senders[state].abs().ln()
            }
        };
        let c_high = [
            weight(0, spec.rho[0]),
            weight(1, spec.rho[1]),
            weight(2, spec.rho[2]),
        ];
        ScanContext { xs, log_a, log_r, c_high }
    }
}

/// log L_S(high) with the pivotal binomial coefficient cancelled.
fn scan_ratio_high(ctx: &ScanContext, n: u32, cutoff: u32, idx: usize) -> f64 {
    let k = (cutoff - 1) as f64;
    let m = (n - cutoff) as f64;
    let la = &ctx.log_a[idx];
    let lr = &ctx.log_r[idx];
    let term = |s: usize| ctx.c_high[s] + k * la[s] + m * lr[s];
    term(2) - crate::prob::log_add_exp(term(0), term(1))
}

fn scan_ratio_high_at(spec: &GameSpec, c_high: &[f64; 3], x: f64, n: u32, cutoff: u32) -> f64 {
    let k = (cutoff - 1) as f64;
    let m = (n - cutoff) as f64;
    let term = |s: usize| {
        c_high[s] + k * (spec.rho[s] * x).ln() + m * (-spec.rho[s] * x).ln_1p()
    };
    term(2) - crate::prob::log_add_exp(term(0), term(1))
}

/// Enumerates every symmetric informative equilibrium at sender count `n`.
/// An empty set (babbling only) is a valid outcome.
pub fn solve(spec: &GameSpec, n: u32) -> Result<EquilibriumSet, SolveError> {
    spec.require_three_states()?;
    assert!(n >= 1);
    let ctx = ScanContext::new(spec, ROOT_SCAN_GRID);

    let mut found: Vec<(f64, u32, EquilibriumKind)> = (1..=n)
        .into_par_iter()
        .map(|cutoff| {
            let mut candidates: Vec<(f64, u32, EquilibriumKind)> = Vec::new();
            let mut prev = scan_ratio_high(&ctx, n, cutoff, 0);
            for idx in 1..ctx.xs.len() {
                let cur = scan_ratio_high(&ctx, n, cutoff, idx);
                if prev == 0.0 {
                    candidates.push((ctx.xs[idx - 1], cutoff, EquilibriumKind::Interior));
                } else if prev.signum() != cur.signum() && cur != 0.0 {
                    let f = |x: f64| scan_ratio_high_at(spec, &ctx.c_high, x, n, cutoff);
                    if let Some(x) = bisect(f, ctx.xs[idx - 1], ctx.xs[idx], prev) {
                        candidates.push((x, cutoff, EquilibriumKind::Interior));
                    }
                }
                prev = cur;
            }
            // Corner: approve for sure on the high signal. The last grid
            // point is x = 1; a weakly positive ratio sustains it. Interior
            // roots within indifference tolerance of the corner are the
            // corner, not a separate equilibrium.
            let corner = scan_ratio_high(&ctx, n, cutoff, ctx.xs.len() - 1);
            if corner >= -INDIFFERENCE_TOL {
                candidates.retain(|&(x, _, _)| {
                    !(x == 1.0
                        || scan_ratio_high_at(spec, &ctx.c_high, x, n, cutoff).abs()
                            <= INDIFFERENCE_TOL && (1.0 - x) < 1e-9)
                });
                candidates.push((1.0, cutoff, EquilibriumKind::Corner));
            }
            candidates
        })
        .flatten()
        .collect();

    found.sort_by(|a, b| a.0.total_cmp(&b.0));

    // Keep candidates whose low-signal condition and receiver cutoff agree.
    let mut equilibria = Vec::new();
    let mut roots_per_cutoff = vec![0u32; (n + 1) as usize];
    for (x, cutoff, kind) in found {
        let strategy = SenderStrategy::informative(x).expect("grid x in (0,1]");
        let cond = sender_condition(spec, &strategy, n, cutoff)?;
        let high_ok = match kind {
            EquilibriumKind::Interior => cond.log_ls_high.abs() <= 1e-9,
            EquilibriumKind::Corner => cond.log_ls_high >= -INDIFFERENCE_TOL,
        };
        let low_ok = cond.log_ls_low <= INDIFFERENCE_TOL;
        if !(high_ok && low_ok) {
            continue;
        }
        if receiver_cutoff(spec, &strategy, n)? != cutoff {
            continue;
        }
        roots_per_cutoff[cutoff as usize] += 1;
        let (v_sender, v_receiver) = welfare(spec, &strategy, n, cutoff);
        equilibria.push(Equilibrium {
            x,
            cutoff,
            n,
            kind,
            log_ls_high: cond.log_ls_high,
            log_ls_low: cond.log_ls_low,
            v_sender,
            v_receiver,
        });
    }

    let multi_root_cutoffs = (1..=n).filter(|&c| roots_per_cutoff[c as usize] > 1).collect();
    Ok(EquilibriumSet {
        n,
        equilibria,
        babbling: babbling_welfare(spec),
        multi_root_cutoffs,
    })
}

/// Bisection on [lo, hi] given f(lo) has sign `sign_lo`; refines until
/// |f| < ROOT_TOL. Returns None if the tolerance is unreachable.
fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, f_lo: f64) -> Option<f64> {
    let sign_lo = f_lo.signum();
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm.abs() < ROOT_TOL {
            return Some(mid);
        }
        if fm.signum() == sign_lo {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < f64::EPSILON * mid {
            let best = 0.5 * (lo + hi);
            return if f(best).abs() < 1e-9 { Some(best) } else { None };
        }
    }
    None
}

/// Expected payoffs (senders, receiver) from any strategy-and-cutoff pair.
/// Cutoff `n + 1` never implements; cutoff 0 always implements. Tail masses
/// are aggregated in log space per state, then combined with payoff signs.
pub fn welfare(spec: &GameSpec, strategy: &SenderStrategy, n: u32, cutoff: u32) -> (f64, f64) {
    if cutoff > n {
        return (0.0, 0.0);
    }
    let mut v_s = 0.0;
    let mut v_r = 0.0;
    for state in 0..3 {
        let log_tail = log_tail_prob(spec, strategy, n, cutoff, state);
        let p = log_tail.exp();
        v_s += spec.prior[state] * spec.u_senders[state] * p;
        v_r += spec.prior[state] * spec.u_receiver[state] * p;
    }
    (v_s, v_r)
}

/// log P[T >= cutoff | state].
pub fn log_tail_prob(
    spec: &GameSpec,
    strategy: &SenderStrategy,
    n: u32,
    cutoff: u32,
    state: usize,
) -> f64 {
    if cutoff > n {
        return f64::NEG_INFINITY;
    }
    let terms: Vec<f64> = (cutoff..=n)
        .map(|t| {
            tally_logpmf(spec, strategy, n, t, state)
                .expect("t in range")
                .value()
        })
        .collect();
    log_sum_exp(&terms).min(0.0)
}

/// Welfare in the babbling benchmark: the receiver implements exactly when
/// the prior-expected payoff is nonnegative (ties to the proposal).
pub fn babbling_welfare(spec: &GameSpec) -> (f64, f64) {
    let e_r: f64 = spec
        .prior
        .iter()
        .zip(&spec.u_receiver)
        .map(|(q, u)| q * u)
        .sum();
    if e_r >= 0.0 {
        let e_s = spec
            .prior
            .iter()
            .zip(&spec.u_senders)
            .map(|(q, u)| q * u)
            .sum();
        (e_s, e_r)
    } else {
        (0.0, 0.0)
    }
}

/// Profile of the senders' welfare across every receiver cutoff, with the
/// verdict on whether the equilibrium cutoff attains the maximum.
#[derive(Debug, Clone, Serialize)]
pub struct CutoffWelfareProfile {
    pub optimal: bool,
    pub best_cutoff: u32,
    /// v_sender at each cutoff 0..=n+1, index = cutoff.
    pub profile: Vec<f64>,
}

/// Checks that the receiver's equilibrium cutoff maximizes the senders'
/// expected payoff over all cutoff strategies, holding the senders at x.
pub fn cutoff_maximizes_sender_welfare(spec: &GameSpec, eq: &Equilibrium) -> CutoffWelfareProfile {
    let strategy = eq.strategy();
    let profile: Vec<f64> = (0..=eq.n + 1)
        .map(|c| welfare(spec, &strategy, eq.n, c).0)
        .collect();
    let best = profile.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let best_cutoff = profile
        .iter()
        .position(|&v| v == best)
        .expect("profile nonempty") as u32;
    let scale = 1.0f64.max(best.abs());
    let optimal = profile[eq.cutoff as usize] >= best - 1e-9 * scale;
    CutoffWelfareProfile { optimal, best_cutoff, profile }
}

/// Expected sender payoff conditional on an exact tally, in payoff units.
/// Zero at the equilibrium cutoff for interior equilibria.
pub fn sender_payoff_at_tally(spec: &GameSpec, strategy: &SenderStrategy, n: u32, t: u32) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for state in 0..3 {
        let p = tally_logpmf(spec, strategy, n, t, state)
            .expect("t in range")
            .prob();
        num += spec.prior[state] * p * spec.u_senders[state];
        den += spec.prior[state] * p;
    }
    num / den
}

/// One row of the verified welfare ordering.
#[derive(Debug, Clone, Serialize)]
pub struct WelfareRow {
    pub x: f64,
    pub cutoff: u32,
    pub v_sender: f64,
    pub v_receiver: f64,
}

#[derive(Debug, Error)]
#[error("welfare ordering violated between x={x_lo} and x={x_hi}: {side} falls from {v_lo} to {v_hi}")]
pub struct ParetoViolation {
    pub x_lo: f64,
    pub x_hi: f64,
    pub side: &'static str,
    pub v_lo: f64,
    pub v_hi: f64,
}

/// Verifies that welfare is nondecreasing in x across the set for both
/// players and that every equilibrium weakly dominates babbling. Returns the
/// ordered welfare table, or the offending pair.
pub fn pareto_order(spec: &GameSpec, set: &EquilibriumSet) -> Result<Vec<WelfareRow>, ParetoViolation> {
    let _ = spec;
    let tol = 1e-11;
    let (b_s, b_r) = set.babbling;
    let mut rows = Vec::with_capacity(set.equilibria.len());
    for eq in &set.equilibria {
        if eq.v_sender < b_s - tol || eq.v_receiver < b_r - tol {
            return Err(ParetoViolation {
                x_lo: 0.0,
                x_hi: eq.x,
                side: if eq.v_sender < b_s - tol { "senders" } else { "receiver" },
                v_lo: if eq.v_sender < b_s - tol { b_s } else { b_r },
                v_hi: if eq.v_sender < b_s - tol { eq.v_sender } else { eq.v_receiver },
            });
        }
        rows.push(WelfareRow {
            x: eq.x,
            cutoff: eq.cutoff,
            v_sender: eq.v_sender,
            v_receiver: eq.v_receiver,
        });
    }
    for w in set.equilibria.windows(2) {
        if w[1].v_sender < w[0].v_sender - tol {
            return Err(ParetoViolation {
                x_lo: w[0].x,
                x_hi: w[1].x,
                side: "senders",
                v_lo: w[0].v_sender,
                v_hi: w[1].v_sender,
            });
        }
        if w[1].v_receiver < w[0].v_receiver - tol {
            return Err(ParetoViolation {
                x_lo: w[0].x,
                x_hi: w[1].x,
                side: "receiver",
                v_lo: w[0].v_receiver,
                v_hi: w[1].v_receiver,
            });
        }
    }
    Ok(rows)
}

/// A grid point that would contradict the rejection-on-low property: an
/// informative profile with positive low-signal approval satisfying both
/// best-response conditions and the receiver's cutoff consistency.
#[derive(Debug, Clone, Serialize)]
pub struct LowApprovalCandidate {
    pub x_low: f64,
    pub x_high: f64,
    pub cutoff: u32,
    pub log_ls_high: f64,
    pub log_ls_low: f64,
}

/// Dense grid search for informative equilibria with positive low-signal
/// approval. Intended for small n; an empty result confirms none exist at
/// grid resolution. Tolerance on the indifference conditions is 1e-6 in log
/// space.
pub fn scan_low_approval_equilibria(
    spec: &GameSpec,
    n: u32,
    resolution: usize,
) -> Result<Vec<LowApprovalCandidate>, SolveError> {
    spec.require_three_states()?;
    let tol = 1e-6;
    let grid: Vec<f64> = (1..resolution).map(|k| k as f64 / resolution as f64).collect();
    let mut hits = Vec::new();
    for (li, &x_low) in grid.iter().enumerate() {
        for &x_high in grid[li..].iter().chain(std::iter::once(&1.0)) {
            if x_low >= x_high {
                continue;
            }
            let strategy = SenderStrategy::new(x_low, x_high).expect("grid in bounds");
            for cutoff in 1..=n {
                let cond = match sender_condition(spec, &strategy, n, cutoff) {
                    Ok(c) => c,
                    Err(BestRespError::PivotImpossible) => continue,
                    Err(e) => return Err(e.into()),
                };
                // Positive low-signal approval below one needs indifference
                // on the low signal; x_high then sits at its own corner or
                // indifference point.
                let low_ok = cond.log_ls_low.abs() <= tol;
                let high_ok = if x_high == 1.0 {
                    cond.log_ls_high >= -tol
                } else {
                    cond.log_ls_high.abs() <= tol
                };
                if !(low_ok && high_ok) {
                    continue;
                }
                if receiver_cutoff(spec, &strategy, n)? != cutoff {
                    continue;
                }
                hits.push(LowApprovalCandidate {
                    x_low,
                    x_high,
                    cutoff,
                    log_ls_high: cond.log_ls_high,
                    log_ls_low: cond.log_ls_low,
                });
            }
        }
    }
    Ok(hits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bestresp::is_symmetric_best_response;
    use crate::model::test_specs::{table2, table2_with_prior, table2_zero_q2};
    use crate::model::GameSpec;

    #[test]
    fn single_sender_corner_equilibrium() {
        // Receiver (-2, ., 4) keeps her cutoff responsive at one sender; the
        // payoff-dominance footnote case is accepted by the solver, which
        // does not re-validate.
        let spec = GameSpec {
            u_receiver: vec![-2.0, 1.0, 4.0],
            ..table2_zero_q2(2.0)
        };
        let set = solve(&spec, 1).unwrap();
        assert_eq!(set.equilibria.len(), 1);
        let eq = &set.equilibria[0];
        assert_eq!(eq.x, 1.0);
        assert_eq!(eq.cutoff, 1);
        assert_eq!(eq.kind, EquilibriumKind::Corner);
    }

    #[test]
    fn high_conflict_yields_babbling_only() {
        // Conflict ratio 20 against a likelihood-jump bound of 16.
        let spec = table2_zero_q2(20.0);
        for n in [1u32, 5, 25, 100, 200] {
            let set = solve(&spec, n).unwrap();
            assert!(set.is_empty(), "unexpected equilibrium at n={n}");
        }
    }

    #[test]
    fn fixed_point_property_of_solutions() {
        let spec = table2(2.0);
        for n in [10u32, 50] {
            let set = solve(&spec, n).unwrap();
            assert!(!set.is_empty());
            for eq in &set.equilibria {
                let strategy = eq.strategy();
                assert!(is_symmetric_best_response(&spec, &strategy, n, eq.cutoff).unwrap());
                assert_eq!(receiver_cutoff(&spec, &strategy, n).unwrap(), eq.cutoff);
            }
            // Sorted by x; larger x pairs with a strictly larger cutoff
            // whenever no cutoff attracted multiple roots.
            for w in set.equilibria.windows(2) {
                assert!(w[0].x < w[1].x);
                if set.multi_root_cutoffs.is_empty() {
                    assert!(w[0].cutoff < w[1].cutoff);
                }
            }
        }
    }

    #[test]
    fn welfare_degenerate_cutoffs() {
        let spec = table2(2.0);
        let s = SenderStrategy::informative(0.5).unwrap();
        assert_eq!(welfare(&spec, &s, 10, 11), (0.0, 0.0));
        let (v_s, v_r) = welfare(&spec, &s, 10, 0);
        let e_s: f64 = spec.prior.iter().zip(&spec.u_senders).map(|(q, u)| q * u).sum();
        let e_r: f64 = spec.prior.iter().zip(&spec.u_receiver).map(|(q, u)| q * u).sum();
        assert!((v_s - e_s).abs() < 1e-12);
        assert!((v_r - e_r).abs() < 1e-12);
    }

    #[test]
    fn babbling_welfare_cases() {
        let bottom = table2_with_prior(2.0, [1.0, 0.0, 0.0]);
        assert_eq!(babbling_welfare(&bottom), (0.0, 0.0));
        let top = table2_with_prior(2.0, [0.0, 0.0, 1.0]);
        assert_eq!(babbling_welfare(&top), (1.0, 2.0));
        // Cross-check through the full welfare computation at cutoff 0/N+1.
        let spec = table2(2.0);
        let s = SenderStrategy::informative(0.5).unwrap();
        let e_r: f64 = spec.prior.iter().zip(&spec.u_receiver).map(|(q, u)| q * u).sum();
        let direct = babbling_welfare(&spec);
        let via = if e_r >= 0.0 { welfare(&spec, &s, 10, 0) } else { welfare(&spec, &s, 10, 11) };
        assert!((direct.0 - via.0).abs() < 1e-12);
        assert!((direct.1 - via.1).abs() < 1e-12);
    }

    #[test]
    fn cutoff_maximizes_sender_welfare_on_solutions() {
        let spec = table2(2.0);
        let set = solve(&spec, 30).unwrap();
        assert!(!set.is_empty());
        for eq in &set.equilibria {
            let check = cutoff_maximizes_sender_welfare(&spec, eq);
            assert!(check.optimal, "cutoff {} profile {:?}", eq.cutoff, check.profile);
            // Interior equilibria make the senders exactly indifferent at
            // the cutoff tally.
            if eq.kind == EquilibriumKind::Interior {
                let at_cutoff = sender_payoff_at_tally(&spec, &eq.strategy(), eq.n, eq.cutoff);
                assert!(at_cutoff.abs() < 1e-8, "tally payoff {at_cutoff}");
            }
        }
    }

    #[test]
    fn perturbed_pair_fails_sender_optimality() {
        let spec = table2(2.0);
        let set = solve(&spec, 30).unwrap();
        let eq = set.most_informative().unwrap();
        let perturbed = Equilibrium {
            x: (eq.x + 0.1).min(1.0),
            ..eq.clone()
        };
        let check = cutoff_maximizes_sender_welfare(&spec, &perturbed);
        assert!(!check.optimal || check.best_cutoff == perturbed.cutoff);
    }

    #[test]
    fn pareto_order_holds_on_baseline() {
        let spec = table2(2.0);
        let set = solve(&spec, 50).unwrap();
        assert!(!set.is_empty());
        let rows = pareto_order(&spec, &set).unwrap();
        assert_eq!(rows.len(), set.equilibria.len());
    }

    #[test]
    fn no_low_approval_equilibria_small_grid() {
        let spec = table2(2.0);
        let hits = scan_low_approval_equilibria(&spec, 3, 60).unwrap();
        assert!(hits.is_empty(), "unexpected hits {hits:?}");
    }
}
