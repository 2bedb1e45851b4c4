//! Heavyweight independent oracles: exact big-integer binomials, linear-
//! space summation of the payoff-weighted ratios, and a dense-grid
//! re-derivation of the equilibrium set.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};

use cheaptalk::bestresp::{receiver_cutoff, receiver_log_ratio, sender_log_ratio, Signal};
use cheaptalk::equilibrium::solve;
use cheaptalk::model::test_specs::table2;
use cheaptalk::model::{GameSpec, SenderStrategy};
use cheaptalk::prob::{log_binomial_pmf, log_sum_exp, tally_logpmf};

fn big_binomial(n: u64, k: u64) -> BigUint {
    let mut num = BigUint::one();
    let mut den = BigUint::one();
    for i in 0..k.min(n - k) {
        num *= n - i;
        den *= i + 1;
    }
    num / den
}

/// ln of a big integer via the float conversion of the leading bits.
fn ln_big(value: &BigUint) -> f64 {
    let bits = value.bits();
    if bits <= 1020 {
        return value.to_f64().unwrap().ln();
    }
    let shift = bits - 1020;
    let reduced = value >> shift;
    reduced.to_f64().unwrap().ln() + shift as f64 * 2f64.ln()
}

#[test]
fn binomial_pmf_matches_exact_big_integer_oracle() {
    // pmf(n, k; p/q) = C(n,k) p^k (q-p)^(n-k) / q^n, exactly in integers.
    let cases: [(u64, u64, u64, u64); 4] =
        [(300, 150, 1, 2), (300, 40, 1, 5), (250, 200, 4, 5), (300, 111, 3, 8)];
    for (n, k, p_num, p_den) in cases {
        let exact_num = big_binomial(n, k)
            * BigUint::from(p_num).pow(k as u32)
            * BigUint::from(p_den - p_num).pow((n - k) as u32);
        let exact_den = BigUint::from(p_den).pow(n as u32);
        let log_exact = ln_big(&exact_num) - ln_big(&exact_den);
        let log_impl = log_binomial_pmf(n, k, p_num as f64 / p_den as f64);
        let rel = ((log_impl - log_exact) / log_exact).abs();
        assert!(rel < 1e-12, "n={n} k={k} p={p_num}/{p_den}: rel {rel:.3e}");
    }
}

#[test]
fn tally_pmf_normalizes_up_to_large_panels() {
    let spec = table2(2.0);
    let strategy = SenderStrategy::new(0.1, 0.7).unwrap();
    for n in [1u32, 7, 100, 999, 5000] {
        for state in 0..3 {
            let logs: Vec<f64> = (0..=n)
                .map(|t| tally_logpmf(&spec, &strategy, n, t, state).unwrap().value())
                .collect();
            let total = log_sum_exp(&logs);
            assert!(total.abs() < 1e-10, "n={n} state={state}: {total:.3e}");
        }
    }
}

/// Direct linear-space evaluation of the senders' payoff-weighted ratio.
fn sender_ratio_linear(spec: &GameSpec, x: f64, n: u32, cutoff: u32, high: bool) -> f64 {
    let pivot = |state: usize| -> f64 {
        let a = spec.rho[state] * x;
        let mut coeff = 1.0f64;
        for i in 0..(cutoff - 1).min(n - cutoff) {
            coeff *= (n - 1 - i) as f64 / (i + 1) as f64;
        }
        coeff * a.powi((cutoff - 1) as i32) * (1.0 - a).powi((n - cutoff) as i32)
    };
    let sig = |state: usize| if high { spec.rho[state] } else { 1.0 - spec.rho[state] };
    let num = spec.prior[2] * sig(2) * pivot(2) * spec.u_senders[2];
    let den: f64 = (0..2)
        .map(|s| spec.prior[s] * sig(s) * pivot(s) * -spec.u_senders[s])
        .sum();
    num / den
}

#[test]
fn sender_ratio_matches_linear_summation_oracle() {
    let spec = table2(2.0);
    let strategy = SenderStrategy::informative(0.1).unwrap();
    for (cutoff, signal, high) in [(3u32, Signal::High, true), (3, Signal::Low, false)] {
        let log_impl = sender_log_ratio(&spec, &strategy, 50, cutoff, signal).unwrap();
        let direct = sender_ratio_linear(&spec, 0.1, 50, cutoff, high);
        let rel = (log_impl - direct.ln()).abs();
        assert!(rel < 1e-9, "cutoff={cutoff} high={high}: {rel:.3e}");
    }
}

#[test]
fn receiver_ratio_matches_linear_summation_oracle() {
    let spec = table2(2.0);
    let x = 0.05;
    let strategy = SenderStrategy::informative(x).unwrap();
    let n = 100u32;
    for t in [0u32, 3, 7, 12] {
        let tally = |state: usize| -> f64 {
            let a = spec.rho[state] * x;
            let mut coeff = 1.0f64;
            for i in 0..t.min(n - t) {
                coeff *= (n - i) as f64 / (i + 1) as f64;
            }
            coeff * a.powi(t as i32) * (1.0 - a).powi((n - t) as i32)
        };
        let num = spec.prior[1] * tally(1) * spec.u_receiver[1]
            + spec.prior[2] * tally(2) * spec.u_receiver[2];
        let den = spec.prior[0] * tally(0) * -spec.u_receiver[0];
        let log_impl = receiver_log_ratio(&spec, &strategy, n, t).unwrap();
        let rel = (log_impl - (num / den).ln()).abs();
        assert!(rel < 1e-9, "t={t}: {rel:.3e}");
    }
}

/// Re-derives the equilibrium set from the public ratio functions on a
/// ten-thousand-point grid, independently of the solver's internal scan.
fn dense_grid_equilibria(spec: &GameSpec, n: u32) -> Vec<(f64, u32)> {
    let grid = 10_000usize;
    let mut found = Vec::new();
    for cutoff in 1..=n {
        let f = |x: f64| -> f64 {
            let s = SenderStrategy::informative(x).unwrap();
            sender_log_ratio(spec, &s, n, cutoff, Signal::High).unwrap()
        };
        let mut prev_x = 1.0 / grid as f64;
        let mut prev = f(prev_x);
        for k in 2..=grid {
            let x = k as f64 / grid as f64;
            let cur = f(x);
            if prev.signum() != cur.signum() {
                let (mut lo, mut hi, lo_sign) = (prev_x, x, prev.signum());
                for _ in 0..100 {
                    let mid = 0.5 * (lo + hi);
                    if f(mid).signum() == lo_sign {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                let root = 0.5 * (lo + hi);
                let s = SenderStrategy::informative(root).unwrap();
                let low_ok =
                    sender_log_ratio(spec, &s, n, cutoff, Signal::Low).unwrap() <= 1e-10;
                if low_ok && receiver_cutoff(spec, &s, n).unwrap() == cutoff {
                    found.push((root, cutoff));
                }
            }
            prev_x = x;
            prev = cur;
        }
        // Approve-for-sure corner.
        if f(1.0) >= -1e-10 {
            let s = SenderStrategy::informative(1.0).unwrap();
            let low_ok = sender_log_ratio(spec, &s, n, cutoff, Signal::Low).unwrap() <= 1e-10;
            if low_ok && receiver_cutoff(spec, &s, n).unwrap() == cutoff {
                found.push((1.0, cutoff));
            }
        }
    }
    found.sort_by(|a, b| a.0.total_cmp(&b.0));
    found
}

#[test]
fn solver_matches_dense_grid_oracle_on_baseline() {
    let spec = table2(2.0);
    let n = 50u32;
    let set = solve(&spec, n).unwrap();
    let oracle = dense_grid_equilibria(&spec, n);
    assert_eq!(set.equilibria.len(), oracle.len(), "oracle {oracle:?}");
    for (eq, (x, cutoff)) in set.equilibria.iter().zip(&oracle) {
        assert_eq!(eq.cutoff, *cutoff);
        assert!((eq.x - x).abs() < 1e-6, "x {} vs oracle {x}", eq.x);
    }
}

#[test]
fn solver_matches_dense_grid_oracle_without_disagreement() {
    let spec = cheaptalk::model::test_specs::table2_zero_q2(8.0);
    let n = 25u32;
    let set = solve(&spec, n).unwrap();
    let oracle = dense_grid_equilibria(&spec, n);
    assert_eq!(set.equilibria.len(), oracle.len(), "oracle {oracle:?}");
    for (eq, (x, cutoff)) in set.equilibria.iter().zip(&oracle) {
        assert_eq!(eq.cutoff, *cutoff);
        assert!((eq.x - x).abs() < 1e-6, "x {} vs oracle {x}", eq.x);
    }
}
