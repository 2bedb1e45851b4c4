//! The bundled verification suite: twelve numbered checks covering the
//! probability identities, the equilibrium characterization, the welfare
//! orderings, the transmission thresholds and limit trends, the mechanism
//! constructions, the multi-message rate machinery, Monte Carlo coherence,
//! and byte-level reproducibility.
//!
//! Every check pins its tolerances and thresholds in code and runs at desk
//! scale in minutes. Asymptotic claims are checked as finite-ladder trends.

use std::time::Instant;

use serde::Serialize;

use crate::asympt::{
    self, conflict_sweep, disagreement_sweep, estimate_threshold_mass, ladder_trace,
    persistence_threshold, with_disagreement_mass, PersistenceRegime,
};
use crate::equilibrium::{
    cutoff_maximizes_sender_welfare, pareto_order, scan_low_approval_equilibria, solve, welfare,
};
use crate::largedev::{
    chernoff_point, mlrp_rate_ordering, pivotal_decay_trace, pivotal_set, MessageModel,
    MonotoneStrategyMatrix,
};
use crate::mc::{simulate, Scenario, SimConfig, TrialRng};
use crate::mechanism::{build_randomized, equal_kl_point, randomized_convergence};
use crate::model::{test_specs, GameSpec, SenderStrategy};
use crate::prob::{
    kl_bernoulli, kl_categorical, log_multinomial_pmf, pivot_logpmf, tally_logpmf,
    tally_ratio_via_kl,
};
use crate::report::{write_csv, Cell, RunManifest};

/// Outcome of one verification check.
#[derive(Debug, Clone, Serialize)]
pub struct CriterionResult {
    pub id: u32,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        format!(
            "check {:02} {} ({:.2}s) {} — {}",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.seconds,
            self.name,
            self.detail
        )
    }
}

fn finish(
    id: u32,
    name: &'static str,
    started: Instant,
    failures: Vec<String>,
    summary: String,
) -> CriterionResult {
    let passed = failures.is_empty();
    let detail = if passed {
        summary
    } else {
        let mut d = failures.join("; ");
        if d.len() > 400 {
            d.truncate(400);
        }
        d
    };
    CriterionResult { id, name, passed, detail, seconds: started.elapsed().as_secs_f64() }
}

/// Draws a spec satisfying every standing assumption: accuracy ordering,
/// payoff dominance with ratio at least one, simplex prior.
pub fn random_valid_spec(rng: &mut TrialRng, allow_zero_mass: bool) -> GameSpec {
    let r1 = 0.05 + 0.35 * rng.next_f64();
    let r3 = 0.60 + 0.35 * rng.next_f64();
    let r2 = r1 + (0.1 + 0.8 * rng.next_f64()) * (r3 - r1);
    let a = 0.5 + 1.5 * rng.next_f64();
    let b = 0.2 + 1.3 * rng.next_f64();
    let c = 0.5 + 1.5 * rng.next_f64();
    let k1 = 1.0 + 2.0 * rng.next_f64();
    let k3 = 1.0 + 2.0 * rng.next_f64();
    let d = 0.2 + rng.next_f64();
    let q2 = if allow_zero_mass && rng.bernoulli(0.3) {
        0.0
    } else {
        0.02 + 0.28 * rng.next_f64()
    };
    let w = 0.25 + 0.5 * rng.next_f64();
    let spec = GameSpec {
        states: vec![1.0, 2.0, 3.0],
        u_receiver: vec![-a / k1, d, c * k3],
        u_senders: vec![-a, -b, c],
        prior: vec![(1.0 - q2) * w, q2, (1.0 - q2) * (1.0 - w)],
        rho: vec![r1, r2, r3],
    };
    spec.validate().expect("sampler output must validate");
    spec
}

/// Draws a message model with a strictly MLRP kernel and a monotone
/// strategy, both from log-linear families so the orderings hold exactly.
pub fn random_mlrp_model(rng: &mut TrialRng) -> MessageModel {
    let softmax = |b: f64| -> Vec<f64> {
        let w: Vec<f64> = (0..3).map(|j| (b * j as f64).exp()).collect();
        let z: f64 = w.iter().sum();
        w.into_iter().map(|v| v / z).collect()
    };
    let b1 = -1.4 + 0.8 * rng.next_f64();
    let b2 = b1 + 0.4 + 0.6 * rng.next_f64();
    let b3 = b2 + 0.4 + 0.6 * rng.next_f64();
    let kernel = vec![softmax(b1), softmax(b2), softmax(b3)];
    let d1 = -1.2 + 0.6 * rng.next_f64();
    let d2 = d1 + 0.4 + 0.6 * rng.next_f64();
    let d3 = d2 + 0.4 + 0.6 * rng.next_f64();
    let strategy = MonotoneStrategyMatrix::new(vec![softmax(d1), softmax(d2), softmax(d3)])
        .expect("log-linear rows are monotone");
    MessageModel::from_parts(kernel, &strategy, 1e-3).expect("log-linear kernel is MLRP")
}

/// Check 1: the binomial and multinomial likelihood-ratio identities through
/// binary/categorical divergences, and the pivot/tally substitutions.
pub fn criterion_01(_baseline: &GameSpec) -> CriterionResult {
    let started = Instant::now();
    let mut failures = Vec::new();
    let mut rng = TrialRng::new(0xC1, 0);
    let draws = 10_000;

    let mut max_binary: f64 = 0.0;
    let mut max_subst: f64 = 0.0;
    for k in 0..draws {
        let spec = random_valid_spec(&mut rng, true);
        let n = 1 + (rng.next_u64() % 2000) as u32;
        let t = (rng.next_u64() % (n as u64 + 1)) as u32;
        let x = 0.01 + 0.99 * rng.next_f64();
        let strategy = SenderStrategy::informative(x).unwrap();
        let i = (rng.next_u64() % 3) as usize;
        let j = (rng.next_u64() % 3) as usize;
        let via_kl = tally_ratio_via_kl(&spec, &strategy, n, t, i, j).unwrap();
        let direct = tally_logpmf(&spec, &strategy, n, t, i).unwrap().value()
            - tally_logpmf(&spec, &strategy, n, t, j).unwrap().value();
        let err = if direct.is_finite() { (via_kl - direct).abs() } else { 0.0 };
        max_binary = max_binary.max(err);
        if err > 1e-9 {
            failures.push(format!("binary identity draw {k}: error {err:.3e}"));
        }

        // Pivot/tally substitutions at a responsive cutoff.
        let cutoff = 1 + (rng.next_u64() % n as u64) as u32;
        for state in 0..3 {
            let piv = pivot_logpmf(&spec, &strategy, n, cutoff, state).unwrap().value();
            let rho = spec.rho[state];
            let up = tally_logpmf(&spec, &strategy, n, cutoff, state).unwrap().value();
            let lhs = (x * rho).ln() + piv;
            let rhs = (cutoff as f64 / n as f64).ln() + up;
            let rel = ((lhs - rhs).exp() - 1.0).abs();
            max_subst = max_subst.max(rel);
            if rel > 1e-10 {
                failures.push(format!("approval substitution draw {k}: rel {rel:.3e}"));
            }
            let down = tally_logpmf(&spec, &strategy, n, cutoff - 1, state).unwrap().value();
            let lhs = (-rho * x).ln_1p() + piv;
            let rhs = ((n - cutoff + 1) as f64 / n as f64).ln() + down;
            let rel = ((lhs - rhs).exp() - 1.0).abs();
            max_subst = max_subst.max(rel);
            if rel > 1e-10 {
                failures.push(format!("rejection substitution draw {k}: rel {rel:.3e}"));
            }
        }
    }

    let mut max_multi: f64 = 0.0;
    for k in 0..draws {
        let model = random_mlrp_model(&mut rng);
        let n = 2 + (rng.next_u64() % 1999) as u32;
        let m = (n - 1) as u64;
        let t1 = rng.next_u64() % (m + 1);
        let t2 = rng.next_u64() % (m - t1 + 1);
        let counts = [t1 as u32, t2 as u32, (m - t1 - t2) as u32];
        let freq = [
            counts[0] as f64 / m as f64,
            counts[1] as f64 / m as f64,
            counts[2] as f64 / m as f64,
        ];
        let i = (rng.next_u64() % 3) as usize;
        let j = (rng.next_u64() % 3) as usize;
        let direct = log_multinomial_pmf(m, &counts, &model.g[i])
            - log_multinomial_pmf(m, &counts, &model.g[j]);
        let via_kl = m as f64
            * (kl_categorical(&freq, &model.g[j]).unwrap()
                - kl_categorical(&freq, &model.g[i]).unwrap());
        let err = (via_kl - direct).abs();
        max_multi = max_multi.max(err);
        if err > 1e-9 {
            failures.push(format!("multinomial identity draw {k}: error {err:.3e}"));
        }
    }

    finish(
        1,
        "likelihood-ratio and substitution identities",
        started,
        failures,
        format!(
            "max errors: binary {max_binary:.2e}, multinomial {max_multi:.2e}, substitutions {max_subst:.2e} over {draws} draws each"
        ),
    )
}

/// Check 2: dense-grid search finds no informative equilibrium that approves
/// on the low signal, across random small panels.
pub fn criterion_02(_baseline: &GameSpec) -> CriterionResult {
    let started = Instant::now();
    let mut failures = Vec::new();
    let mut rng = TrialRng::new(0xC2, 0);
    for k in 0..20 {
        let spec = random_valid_spec(&mut rng, true);
        let n = 2 + (rng.next_u64() % 4) as u32;
        match scan_low_approval_equilibria(&spec, n, 400) {
            Ok(hits) if hits.is_empty() => {}
            Ok(hits) => failures.push(format!(
                "spec {k} (n={n}): {} grid hits, first at x_low={:.4}, x_high={:.4}, cutoff={}",
                hits.len(),
                hits[0].x_low,
                hits[0].x_high,
                hits[0].cutoff
            )),
            Err(e) => failures.push(format!("spec {k}: solver error {e}")),
        }
    }
    finish(
        2,
        "no equilibrium approves on the low signal (grid oracle)",
        started,
        failures,
        "20 random specs, panels up to 5 senders, 400x400 grid: no low-approval equilibrium".into(),
    )
}

/// Check 3: across a random sweep, the receiver's equilibrium cutoff
/// maximizes the senders' welfare, and welfare orders by informativeness
/// with babbling dominated.
pub fn criterion_03(_baseline: &GameSpec) -> CriterionResult {
    let started = Instant::now();
    let mut failures = Vec::new();
    let mut rng = TrialRng::new(0xC3, 0);
    let mut total_eqs = 0usize;
    for k in 0..100 {
        let spec = random_valid_spec(&mut rng, true);
        let n = 5 + (rng.next_u64() % 96) as u32;
        let set = match solve(&spec, n) {
            Ok(s) => s,
            Err(e) => {
                failures.push(format!("spec {k}: {e}"));
                continue;
            }
        };
        total_eqs += set.equilibria.len();
        for eq in &set.equilibria {
            let check = cutoff_maximizes_sender_welfare(&spec, eq);
            if !check.optimal {
                failures.push(format!(
                    "spec {k} n={n} x={:.4}: cutoff {} not sender-optimal (best {})",
                    eq.x, eq.cutoff, check.best_cutoff
                ));
            }
        }
        if let Err(v) = pareto_order(&spec, &set) {
            failures.push(format!("spec {k} n={n}: {v}"));
        }
    }
    finish(
        3,
        "cutoff sender-optimality and welfare ordering",
        started,
        failures,
        format!("100 random instances, {total_eqs} equilibria, zero violations"),
    )
}

/// Check 4: without disagreement mass, high conflict kills every informative
/// equilibrium at every panel size, while moderate conflict admits an
/// almost-truthful equilibrium at desk scale.
pub fn criterion_04(_baseline: &GameSpec) -> CriterionResult {
    let started = Instant::now();
    let mut failures = Vec::new();

    let high_conflict = test_specs::table2_zero_q2(20.0);
    for n in 1..=500u32 {
        match solve(&high_conflict, n) {
            Ok(set) if set.is_empty() => {}
            Ok(set) => failures.push(format!(
                "conflict 20, n={n}: unexpected equilibrium x={:.4}",
                set.equilibria[0].x
            )),
            Err(e) => failures.push(format!("conflict 20, n={n}: {e}")),
        }
    }

    let moderate = test_specs::table2_zero_q2(8.0);
    let ladder = [10, 25, 50, 100, 200, 400, 800, 1600, 2000];
    let witness = asympt::almost_truthful_witness(&moderate, 0.1, &ladder);
    let summary = match witness {
        Ok(Some((n, eq))) => format!(
            "conflict 20 babbling-only for n <= 500; conflict 8 witness x={:.4} >= 0.9 at n={n}",
            eq.x
        ),
        Ok(None) => {
            failures.push("conflict 8: no x >= 0.9 equilibrium up to n=2000".into());
            String::new()
        }
        Err(e) => {
            failures.push(format!("witness search: {e}"));
            String::new()
        }
    };
    finish(4, "all-or-nothing transmission without disagreement mass", started, failures, summary)
}

/// Check 5: an arbitrarily small disagreement mass destroys the moderate-
/// conflict equilibria that exist without it.
pub fn criterion_05(_baseline: &GameSpec) -> CriterionResult {
    let started = Instant::now();
    let mut failures = Vec::new();
    let perturbed = with_disagreement_mass(&test_specs::table2_zero_q2(8.0), 0.01);
    for n in [200u32, 400, 800, 1600, 2000] {
        match solve(&perturbed, n) {
            Ok(set) if set.is_empty() => {}
            Ok(set) => failures.push(format!(
                "q2=0.01, n={n}: unexpected equilibrium x={:.4}",
                set.equilibria[0].x
            )),
            Err(e) => failures.push(format!("n={n}: {e}")),
        }
    }
    finish(
        5,
        "discontinuity at vanishing disagreement mass",
        started,
        failures,
        "conflict 8 with q2=0.01: babbling-only on the whole ladder, against the q2=0 witness".into(),
    )
}

/// Check 6: informativeness per sender vanishes while total informativeness
/// and the cutoff stay bounded, and the learning gap keeps a positive floor.
pub fn criterion_06(baseline: &GameSpec) -> CriterionResult {
    let started = Instant::now();
    let mut failures = Vec::new();
    let ladder = [100u32, 200, 400, 800, 1600];
    let trace = match ladder_trace(baseline, &ladder) {
        Ok(t) => t,
        Err(e) => {
            return finish(6, "vanishing x with bounded totals", started, vec![e.to_string()], String::new());
        }
    };
    if trace.iter().any(|p| !p.informative) {
        failures.push("expected informative equilibria along the whole ladder".into());
    }
    let x100 = trace[0].x_max;
    let x1600 = trace[4].x_max;
    if !(x1600 < x100 / 4.0) {
        failures.push(format!("x_max(1600)={x1600:.5} not below x_max(100)/4={:.5}", x100 / 4.0));
    }
    let tail = &trace[1..];
    let nx_min = tail.iter().map(|p| p.n_times_x).fold(f64::INFINITY, f64::min);
    let nx_max = tail.iter().map(|p| p.n_times_x).fold(0.0f64, f64::max);
    if nx_max / nx_min >= 10.0 {
        failures.push(format!("n*x varies by {:.2}x", nx_max / nx_min));
    }
    let c_min = tail.iter().map(|p| p.cutoff_max).min().unwrap().max(1);
    let c_max = tail.iter().map(|p| p.cutoff_max).max().unwrap();
    if (c_max as f64) / (c_min as f64) >= 10.0 {
        failures.push(format!("cutoff varies by {:.2}x", c_max as f64 / c_min as f64));
    }
    for p in &trace {
        if p.learning_gap < 1e-3 {
            failures.push(format!("learning gap {:.2e} below floor at n={}", p.learning_gap, p.n));
        }
    }
    finish(
        6,
        "vanishing x with bounded totals and a learning-gap floor",
        started,
        failures,
        format!(
            "x_max {x100:.5} -> {x1600:.5}; n*x in [{nx_min:.3}, {nx_max:.3}]; cutoffs in [{c_min}, {c_max}]; min gap {:.3}",
            trace.iter().map(|p| p.learning_gap).fold(f64::INFINITY, f64::min)
        ),
    )
}

/// Check 7: the persistence classification matches the direct accuracy-odds
/// comparison, and the estimated critical disagreement mass is bracketed,
/// self-consistent, and nonincreasing in the conflict ratio.
pub fn criterion_07(baseline: &GameSpec) -> CriterionResult {
    let started = Instant::now();
    let mut failures = Vec::new();
    let mut rng = TrialRng::new(0xC7, 0);
    for k in 0..1000 {
        let spec = random_valid_spec(&mut rng, false);
        let ratio = crate::model::conflict_profile(&spec).unwrap().ratio;
        let threshold = persistence_threshold(&spec);
        let expected = if ratio > threshold {
            PersistenceRegime::Fail
        } else if ratio < threshold {
            PersistenceRegime::PersistCandidate
        } else {
            PersistenceRegime::Boundary
        };
        match asympt::disagreement_regime(&spec) {
            Ok(r) if r == expected => {}
            Ok(r) => failures.push(format!("spec {k}: {r:?} vs expected {expected:?}")),
            Err(e) => failures.push(format!("spec {k}: {e}")),
        }
    }

    let n_probe = 400;
    let tol = 0.01;
    let ratios = [1.2, 1.6, 2.0, 3.0];
    let mut mids = Vec::new();
    let mut brackets = Vec::new();
    for &r in &ratios {
        let family = asympt::with_conflict_ratio(baseline, r);
        match estimate_threshold_mass(&family, n_probe, tol) {
            Ok(est) => {
                mids.push(est.midpoint());
                brackets.push((est.mass_lo, est.mass_hi));
            }
            Err(e) => failures.push(format!("ratio {r}: {e}")),
        }
    }
    if mids.len() == ratios.len() {
        for i in 1..mids.len() {
            if mids[i] > mids[i - 1] + tol {
                failures.push(format!(
                    "threshold mass not nonincreasing: {:.4} at ratio {} vs {:.4} at ratio {}",
                    mids[i],
                    ratios[i],
                    mids[i - 1],
                    ratios[i - 1]
                ));
            }
        }
        // Self-consistency at the baseline's own ratio bracket.
        let (lo, hi) = brackets[2];
        let ladder = [50u32, 100, 200, 400];
        let below = with_disagreement_mass(baseline, lo * 0.5);
        for &n in &ladder {
            if solve(&below, n).map(|s| s.is_empty()).unwrap_or(true) {
                failures.push(format!("below bracket (q2={:.4}): empty at n={n}", lo * 0.5));
            }
        }
        let above = with_disagreement_mass(baseline, (hi * 2.0).min(0.9));
        let empties: Vec<bool> = ladder
            .iter()
            .map(|&n| solve(&above, n).map(|s| s.is_empty()).unwrap_or(false))
            .collect();
        let tail_all_empty = empties
            .iter()
            .rposition(|&e| !e)
            .map(|idx| idx + 1 < empties.len())
            .unwrap_or(true);
        if !(tail_all_empty && *empties.last().unwrap()) {
            failures.push(format!("above bracket (q2={:.4}): existence pattern {empties:?}", hi * 2.0));
        }
    }
    finish(
        7,
        "persistence regime and critical-mass bracket",
        started,
        failures,
        format!("1000 classification draws; threshold-mass midpoints {mids:.3?} at ratios {ratios:?}"),
    )
}

/// Check 8: informativeness falls along both conflict sweeps, sender welfare
/// admits a never-exceeded ladder point, and the information index behaves.
pub fn criterion_08(baseline: &GameSpec) -> CriterionResult {
    let started = Instant::now();
    let mut failures = Vec::new();
    let n = 400;

    let ratios = [1.2, 1.6, 2.0, 2.4, 2.8];
    match conflict_sweep(baseline, &ratios, n) {
        Ok(cells) => {
            for w in cells.windows(2) {
                if w[1].x_max > w[0].x_max + 1e-12 {
                    failures.push(format!(
                        "x_max rises {:.5} -> {:.5} at ratio {:.2}",
                        w[0].x_max, w[1].x_max, w[1].param
                    ));
                }
                if w[1].index_proxy > w[0].index_proxy + 1e-12 {
                    failures.push(format!(
                        "index rises {:.5} -> {:.5} at ratio {:.2}",
                        w[0].index_proxy, w[1].index_proxy, w[1].param
                    ));
                }
            }
            for cell in &cells {
                if !(0.0..=1.0).contains(&cell.index_proxy) {
                    failures.push(format!("index {:.4} outside [0,1]", cell.index_proxy));
                }
                if !cell.informative && cell.index_proxy != 0.0 {
                    failures.push(format!("babbling-only cell with nonzero index {:.4}", cell.index_proxy));
                }
            }
        }
        Err(e) => failures.push(format!("conflict sweep: {e}")),
    }

    let masses = [0.02, 0.05, 0.10, 0.15, 0.20];
    match disagreement_sweep(baseline, &masses, n) {
        Ok(cells) => {
            for w in cells.windows(2) {
                if w[1].x_max > w[0].x_max + 1e-12 {
                    failures.push(format!(
                        "x_max rises {:.5} -> {:.5} at q2 {:.2}",
                        w[0].x_max, w[1].x_max, w[1].param
                    ));
                }
            }
        }
        Err(e) => failures.push(format!("mass sweep: {e}")),
    }

    match ladder_trace(baseline, &[50, 100, 200, 400, 800, 1600]) {
        Ok(trace) => {
            let vs: Vec<f64> = trace.iter().map(|p| p.v_sender_max).collect();
            let argmax = vs
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.total_cmp(b.1))
                .map(|(i, _)| i)
                .unwrap();
            if argmax + 1 == vs.len() {
                failures.push(format!("sender welfare still rising at the ladder top: {vs:.5?}"));
            }
        }
        Err(e) => failures.push(format!("welfare ladder: {e}")),
    }

    finish(
        8,
        "comparative statics of informativeness, welfare, and the index",
        started,
        failures,
        "x_max and index nonincreasing in conflict; x_max nonincreasing in disagreement mass; sender welfare peaks before the ladder top".into(),
    )
}

/// Check 9: the two-cutoff randomized commitment is incentive compatible at
/// scale, its mixing weight tends to one, the first-best probabilities rise
/// toward one, and the indifference equation is solved to machine residual.
pub fn criterion_09(baseline: &GameSpec) -> CriterionResult {
    let started = Instant::now();
    let mut failures = Vec::new();
    let ladder = [250u32, 500, 1000, 2000];
    let rows = match randomized_convergence(baseline, &ladder, None, None) {
        Ok(r) => r,
        Err(e) => {
            return finish(9, "randomized mechanism convergence", started, vec![e.to_string()], String::new());
        }
    };
    for r in &rows {
        if r.n >= 500 && !r.ic {
            failures.push(format!("not incentive compatible at n={}", r.n));
        }
    }
    for w in rows.windows(2) {
        if w[1].mu <= w[0].mu {
            failures.push(format!("mixing weight not increasing at n={}", w[1].n));
        }
        for (a, b, name) in [
            (w[0].p_sq_theta1, w[1].p_sq_theta1, "status quo in the bottom state"),
            (w[0].p_prop_theta2, w[1].p_prop_theta2, "proposal in the middle state"),
            (w[0].p_prop_theta3, w[1].p_prop_theta3, "proposal in the top state"),
        ] {
            if b < a - 1e-12 {
                failures.push(format!("{name} falls {a:.5} -> {b:.5} at n={}", w[1].n));
            }
        }
        // The mixed ratios approach their limits monotonically until the
        // gap hits float noise.
        for (ga, gb) in [
            (
                (w[0].log_ratio_high - w[0].limit_log_ratio_high).abs(),
                (w[1].log_ratio_high - w[1].limit_log_ratio_high).abs(),
            ),
            (
                (w[0].log_ratio_low - w[0].limit_log_ratio_low).abs(),
                (w[1].log_ratio_low - w[1].limit_log_ratio_low).abs(),
            ),
        ] {
            if gb > ga && gb > 1e-12 {
                failures.push(format!("mixed ratio gap grows {ga:.2e} -> {gb:.2e} at n={}", w[1].n));
            }
        }
    }
    let last = rows.last().unwrap();
    if last.mu < 0.99 {
        failures.push(format!("mixing weight {:.4} below 0.99 at the ladder top", last.mu));
    }
    for (p, name) in [
        (last.p_sq_theta1, "status quo in the bottom state"),
        (last.p_prop_theta2, "proposal in the middle state"),
        (last.p_prop_theta3, "proposal in the top state"),
    ] {
        if p < 0.95 {
            failures.push(format!("{name} = {p:.4} below 0.95 at the ladder top"));
        }
    }
    for &n in &ladder {
        let (mech, _) = build_randomized(baseline, n, None, None).unwrap();
        let residual = mech.indifference_residual(baseline).abs();
        if residual >= 1e-12 {
            failures.push(format!("indifference residual {residual:.2e} at n={n}"));
        }
    }
    finish(
        9,
        "randomized mechanism convergence",
        started,
        failures,
        format!(
            "mu: {:.4} -> {:.10}; top-ladder outcome probabilities ({:.4}, {:.4}, {:.4})",
            rows[0].mu, last.mu, last.p_sq_theta1, last.p_prop_theta2, last.p_prop_theta3
        ),
    )
}

/// Check 10: equal-divergence points match an independent constrained-grid
/// minimization and the closed binary form; the rate orderings hold across
/// random models; pivotal odds decay exponentially along the ladder.
pub fn criterion_10(baseline: &GameSpec) -> CriterionResult {
    let started = Instant::now();
    let mut failures = Vec::new();
    let model = MessageModel::reference();

    // Constrained 1e6-point scan: the divergence difference is linear in
    // gamma, so each grid abscissa pins the remaining coordinates exactly.
    let oracle = |g_i: &[f64], g_j: &[f64]| -> Option<(Vec<f64>, f64)> {
        let c: Vec<f64> = g_i.iter().zip(g_j).map(|(a, b)| (a / b).ln()).collect();
        let steps = 1_000_000u32;
        let mut best: Option<(Vec<f64>, f64)> = None;
        for s in 0..=steps {
            let g1 = s as f64 / steps as f64;
            let denom = c[1] - c[2];
            let g2 = (-c[2] - g1 * (c[0] - c[2])) / denom;
            if !(0.0..=1.0 - g1).contains(&g2) {
                continue;
            }
            let gamma = vec![g1, g2, 1.0 - g1 - g2];
            let rate = kl_categorical(&gamma, g_i).unwrap();
            if best.as_ref().map(|(_, r)| rate < *r).unwrap_or(true) {
                best = Some((gamma, rate));
            }
        }
        best
    };
    for (i, j) in [(0usize, 1usize), (0, 2), (1, 2)] {
        let point = chernoff_point(&model.g[i], &model.g[j]).unwrap();
        let (oracle_gamma, oracle_rate) = oracle(&model.g[i], &model.g[j]).unwrap();
        let gamma_err = point
            .gamma
            .iter()
            .zip(&oracle_gamma)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        let rate_err = (point.rate - oracle_rate).abs();
        if gamma_err > 1e-4 {
            failures.push(format!("pair ({i},{j}): gamma off by {gamma_err:.2e}"));
        }
        if rate_err > 1e-8 {
            failures.push(format!("pair ({i},{j}): rate off by {rate_err:.2e}"));
        }
    }

    // Binary closed form.
    let (r1, r2) = (baseline.rho[0], baseline.rho[1]);
    let point = chernoff_point(&[r1, 1.0 - r1], &[r2, 1.0 - r2]).unwrap();
    let endpoint = equal_kl_point(r1, r2);
    if (point.gamma[0] - endpoint).abs() > 1e-12 {
        failures.push(format!(
            "binary crossing {:.15} vs closed form {endpoint:.15}",
            point.gamma[0]
        ));
    }
    let ka = kl_bernoulli(endpoint, r1).unwrap();
    let kb = kl_bernoulli(endpoint, r2).unwrap();
    if (ka - kb).abs() > 1e-12 {
        failures.push(format!("closed-form crossing divergences differ by {:.2e}", (ka - kb).abs()));
    }

    let mut rng = TrialRng::new(0xC10, 0);
    for k in 0..100 {
        let m = random_mlrp_model(&mut rng);
        match mlrp_rate_ordering(&m) {
            Ok(o) if o.ordered => {}
            Ok(o) => failures.push(format!("model {k}: orderings violated {o:?}")),
            Err(e) => failures.push(format!("model {k}: {e}")),
        }
    }

    let ladder = [50u32, 100, 150, 200, 250, 300];
    match pivotal_decay_trace(baseline, &model, &ladder, 0.15) {
        Ok(trace) => {
            if !trace.skipped.is_empty() {
                failures.push(format!("empty pivotal sets at {:?}", trace.skipped));
            } else {
                let first = &trace.rows[0];
                let last = trace.rows.last().unwrap();
                let drop = 10.0f64.ln();
                if !(last.log_ratio_31 <= first.log_ratio_31 - drop) {
                    failures.push(format!(
                        "top/bottom pivotal odds fell only {:.2} -> {:.2}",
                        first.log_ratio_31, last.log_ratio_31
                    ));
                }
                if !(last.log_ratio_32 <= first.log_ratio_32 - drop) {
                    failures.push(format!(
                        "top/middle pivotal odds fell only {:.2} -> {:.2}",
                        first.log_ratio_32, last.log_ratio_32
                    ));
                }
                if !(trace.slope_31 < 0.0 && trace.r2_31 >= 0.9) {
                    failures.push(format!("slope {:.4} r2 {:.4}", trace.slope_31, trace.r2_31));
                }
                if !(trace.slope_32 < 0.0 && trace.r2_32 >= 0.9) {
                    failures.push(format!("slope {:.4} r2 {:.4}", trace.slope_32, trace.r2_32));
                }
                if last.mass_in_ball < 0.99 {
                    failures.push(format!("ball mass {:.4} at the ladder top", last.mass_in_ball));
                }
            }
        }
        Err(e) => failures.push(format!("decay trace: {e}")),
    }

    finish(
        10,
        "equal-divergence points, rate orderings, pivotal decay",
        started,
        failures,
        "grid oracle, closed binary form, 100 random models, six-point decay ladder".into(),
    )
}

/// Check 11: the seeded simulator reproduces the analytic tally, pivot, and
/// outcome probabilities and both welfare values within four standard
/// errors.
pub fn criterion_11(baseline: &GameSpec) -> CriterionResult {
    let started = Instant::now();
    let mut failures = Vec::new();
    let sigmas = 4.0;
    let band = |p: f64, trials: u64| -> f64 {
        sigmas * (p * (1.0 - p) / trials as f64).sqrt().max(1e-9)
    };

    // Equilibrium play at the baseline with fifty senders.
    let n = 50u32;
    let set = solve(baseline, n).unwrap();
    let eq = set.most_informative().expect("baseline has equilibria");
    let strategy = eq.strategy();
    let config = SimConfig { trials: 1_000_000, seed: 0xC11, n };
    let scenario = Scenario::EquilibriumPlay { x_low: 0.0, x_high: eq.x, cutoff: eq.cutoff };
    let report = simulate(baseline, &scenario, config);
    for state in 0..3 {
        let trials = report.counts.state_trials[state];
        for t in 0..=n {
            let analytic = tally_logpmf(baseline, &strategy, n, t, state).unwrap().prob();
            let est = report.p_tally(state, t);
            if (analytic - est.value).abs() > band(analytic, trials) {
                failures.push(format!("tally state {state} t {t}: {analytic:.3e} vs {:.3e}", est.value));
            }
        }
        let analytic_piv = pivot_logpmf(baseline, &strategy, n, eq.cutoff, state).unwrap().prob();
        let est = report.p_pivot(state);
        if (analytic_piv - est.value).abs() > band(analytic_piv, trials) {
            failures.push(format!("pivot state {state}: {analytic_piv:.3e} vs {:.3e}", est.value));
        }
    }
    let (vs, vr) = welfare(baseline, &strategy, n, eq.cutoff);
    let (es, er) = report.welfare(baseline);
    if (vs - es.value).abs() > sigmas * es.std_error.max(1e-9) {
        failures.push(format!("sender welfare {vs:.5} vs {:.5}", es.value));
    }
    if (vr - er.value).abs() > sigmas * er.std_error.max(1e-9) {
        failures.push(format!("receiver welfare {vr:.5} vs {:.5}", er.value));
    }

    // Randomized mechanism outcome frequencies at five hundred senders.
    let (mech, mech_report) = build_randomized(baseline, 500, None, None).unwrap();
    let outcomes = crate::mechanism::outcome_probabilities(baseline, &mech);
    let config = SimConfig { trials: 100_000, seed: 0xC11 + 1, n: 500 };
    let scenario = Scenario::RandomizedMechanism {
        mu: mech.mu,
        cutoff_alpha: mech.cutoff_alpha,
        cutoff_beta: mech.cutoff_beta,
    };
    let sim = simulate(baseline, &scenario, config);
    for state in 0..3 {
        let trials = sim.counts.state_trials[state];
        let est = sim.p_proposal(state);
        if (outcomes[state] - est.value).abs() > band(outcomes[state], trials) {
            failures.push(format!(
                "mechanism outcome state {state}: {:.4} vs {:.4}",
                outcomes[state], est.value
            ));
        }
        let analytic_mixed = mech_report.log_pivot_mixed[state].exp();
        let piv = ratio_of(sim.counts.pivot_hits[state], trials);
        if (analytic_mixed - piv).abs() > band(analytic_mixed, trials) {
            failures.push(format!("mixed pivot state {state}: {analytic_mixed:.3e} vs {piv:.3e}"));
        }
    }

    // Message-model pivotal frequencies at a moderate panel.
    let model = MessageModel::reference();
    let n_msg = 60u32;
    let piv_set = pivotal_set(baseline, &model, n_msg).unwrap();
    let config = SimConfig { trials: 200_000, seed: 0xC11 + 2, n: n_msg };
    let sim = simulate(baseline, &Scenario::MessageModelPlay { model: model.clone() }, config);
    for state in 0..2 {
        let trials = sim.counts.state_trials[state];
        let analytic = piv_set.log_prob[state].exp();
        let est = sim.p_pivot(state);
        if (analytic - est.value).abs() > band(analytic, trials) {
            failures.push(format!(
                "message pivotal state {state}: {analytic:.4e} vs {:.4e}",
                est.value
            ));
        }
    }

    finish(
        11,
        "Monte Carlo coherence of probabilities and welfare",
        started,
        failures,
        "equilibrium play (1e6 trials), randomized mechanism (1e5), message play (2e5): all within four standard errors".into(),
    )
}

fn ratio_of(hits: u64, trials: u64) -> f64 {
    if trials == 0 { f64::NAN } else { hits as f64 / trials as f64 }
}

/// Check 12: rerunning the emitter from identical resolved parameters gives
/// byte-identical CSV, the whole-file reproducibility contract.
pub fn criterion_12(baseline: &GameSpec) -> CriterionResult {
    let started = Instant::now();
    let mut failures = Vec::new();
    let dir = std::env::temp_dir().join(format!("cheaptalk-verify-{}", std::process::id()));
    if let Err(e) = std::fs::create_dir_all(&dir) {
        return finish(12, "byte-identical reruns", started, vec![e.to_string()], String::new());
    }
    let emit = |path: &std::path::Path| -> Result<Vec<u8>, String> {
        let set = solve(baseline, 50).map_err(|e| e.to_string())?;
        let rows: Vec<Vec<Cell>> = set
            .equilibria
            .iter()
            .map(|eq| {
                vec![
                    Cell::from(eq.n),
                    Cell::from(eq.x),
                    Cell::from(eq.cutoff),
                    Cell::from(eq.log_ls_high.exp()),
                    Cell::from(eq.log_ls_low.exp()),
                    Cell::from(eq.v_sender),
                    Cell::from(eq.v_receiver),
                ]
            })
            .collect();
        write_csv(path, &["N", "x", "cutoff", "ls_h", "ls_l", "v_sender", "v_receiver"], &rows)
            .map_err(|e| e.to_string())?;
        std::fs::read(path).map_err(|e| e.to_string())
    };
    let a = emit(&dir.join("first.csv"));
    let b = emit(&dir.join("second.csv"));
    match (a, b) {
        (Ok(a), Ok(b)) if a == b => {}
        (Ok(_), Ok(_)) => failures.push("reruns differ".into()),
        (Err(e), _) | (_, Err(e)) => failures.push(e),
    }
    // The manifest must carry the resolved parameters.
    let manifest = RunManifest::new(
        "solve",
        serde_json::json!({ "n": 50, "game": baseline }),
    );
    if manifest.params["game"]["prior"].as_array().is_none() {
        failures.push("manifest does not embed the resolved game".into());
    }
    std::fs::remove_dir_all(&dir).ok();
    finish(
        12,
        "byte-identical reruns",
        started,
        failures,
        "equilibrium CSV emitted twice from the same resolved parameters: identical bytes".into(),
    )
}

/// Runs the whole suite in order.
pub fn run_all(baseline: &GameSpec) -> Vec<CriterionResult> {
    let checks: Vec<fn(&GameSpec) -> CriterionResult> = vec![
        criterion_01,
        criterion_02,
        criterion_03,
        criterion_04,
        criterion_05,
        criterion_06,
        criterion_07,
        criterion_08,
        criterion_09,
        criterion_10,
        criterion_11,
        criterion_12,
    ];
    checks.into_iter().map(|c| c(baseline)).collect()
}

/// The reference configuration the suite is calibrated against.
pub fn reference_baseline() -> GameSpec {
    test_specs::table2(2.0)
}
