//! Command-line front door: config parsing, dispatch, CSV/JSON emission,
//! and the bundled verification suite.
//!
//! Every output file is paired with a manifest holding the fully resolved
//! parameters (game and model inline), and `rerun` re-executes a manifest
//! to reproduce the file byte-for-byte.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use cheaptalk::asympt::{conflict_sweep, estimate_threshold_mass, information_index, ladder_trace};
use cheaptalk::equilibrium::solve;
use cheaptalk::largedev::{pivotal_decay_trace, MessageModel, MessageModelConfig};
use cheaptalk::mc::{simulate, Scenario, SimConfig};
use cheaptalk::mechanism::{build_randomized, randomized_convergence, sender_optimal_cutoff};
use cheaptalk::model::GameSpec;
use cheaptalk::report::{write_csv, write_json, Cell, RunManifest};
use cheaptalk::verify;

#[derive(Parser)]
#[command(
    name = "cheaptalk",
    version,
    about = "Equilibrium laboratory for multi-sender cheap talk: solve, sweep, verify, and simulate"
)]
struct Cli {
    /// Cap the worker pool (overrides the CHEAPTALK_THREADS variable).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigOut {
    /// Game configuration JSON with keys states, u_receiver, u_senders,
    /// prior, rho.
    #[arg(long)]
    config: PathBuf,
    /// Output CSV path; a manifest is written next to it.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Enumerate all informative equilibria at one sender count.
    Solve {
        #[command(flatten)]
        io: ConfigOut,
        #[arg(long)]
        n: u32,
    },
    /// Trace the most informative equilibrium along a sender ladder.
    SweepN {
        #[command(flatten)]
        io: ConfigOut,
        /// Comma-separated sender counts.
        #[arg(long, default_value = "50,100,200,400,800,1600")]
        ladder: String,
    },
    /// Sweep the conflict ratio at a fixed sender count.
    SweepConflict {
        #[command(flatten)]
        io: ConfigOut,
        #[arg(long, default_value = "1.2,1.6,2.0,2.4,2.8")]
        ratios: String,
        #[arg(long, default_value_t = 400)]
        n: u32,
    },
    /// Bracket the critical disagreement-state mass.
    ThresholdQ {
        #[command(flatten)]
        io: ConfigOut,
        #[arg(long, default_value_t = 400)]
        n_probe: u32,
        #[arg(long, default_value_t = 0.01)]
        tol: f64,
    },
    /// Information index at one sender count.
    Index {
        #[command(flatten)]
        io: ConfigOut,
        #[arg(long, default_value_t = 800)]
        n: u32,
    },
    /// Randomized two-cutoff mechanism along a sender ladder.
    Mechanism {
        #[command(flatten)]
        io: ConfigOut,
        #[arg(long, default_value = "250,500,1000,2000")]
        ladder: String,
        /// Interior share for the working cutoff (defaults derived).
        #[arg(long)]
        t_alpha: Option<f64>,
        /// Interior share for the counterbalancing cutoff.
        #[arg(long)]
        t_beta: Option<f64>,
    },
    /// Pivotal decay trace under a three-message model.
    Largedev {
        #[command(flatten)]
        io: ConfigOut,
        /// Model JSON with keys signal_kernel, strategy_matrix; the built-in
        /// reference model when omitted.
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long, default_value = "50,100,150,200,250,300")]
        ladder: String,
        #[arg(long, default_value_t = 0.15)]
        ball_radius: f64,
    },
    /// Seeded Monte Carlo oracle run.
    Simulate {
        #[command(flatten)]
        io: ConfigOut,
        /// One of: equilibrium, cutoff, randomized, message.
        #[arg(long)]
        scenario: String,
        #[arg(long, default_value_t = 1_000_000)]
        trials: u64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 50)]
        n: u32,
        /// Approval probability on the high signal (equilibrium scenario);
        /// resolved from the most informative equilibrium when omitted.
        #[arg(long)]
        x: Option<f64>,
        /// Receiver cutoff; resolved when omitted.
        #[arg(long)]
        cutoff: Option<u32>,
        /// Model JSON for the message scenario.
        #[arg(long)]
        model: Option<PathBuf>,
    },
    /// Run the full verification suite; nonzero exit on any failure.
    Verify {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Optional CSV of per-check results.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-execute a recorded run from its manifest.
    Rerun {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() {
    let cli = Cli::parse();
    let threads = cli
        .threads
        .or_else(|| std::env::var("CHEAPTALK_THREADS").ok().and_then(|v| v.parse().ok()));
    if let Some(threads) = threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .ok();
    }
    std::process::exit(match run(cli.command, threads) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    });
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("reading {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("parsing {path}: {source}")]
    Parse {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error(transparent)]
    Model(#[from] cheaptalk::model::ModelError),
    #[error(transparent)]
    Solve(#[from] cheaptalk::equilibrium::SolveError),
    #[error(transparent)]
    Asympt(#[from] cheaptalk::asympt::AsymptError),
    #[error(transparent)]
    Mechanism(#[from] cheaptalk::mechanism::MechanismError),
    #[error(transparent)]
    LargeDev(#[from] cheaptalk::largedev::LargeDevError),
    #[error(transparent)]
    Report(#[from] cheaptalk::report::ReportError),
    #[error("encoding manifest: {0}")]
    Encode(#[from] serde_json::Error),
    #[error("{0}")]
    Usage(String),
}

fn load_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let body = std::fs::read_to_string(path)
        .map_err(|source| CliError::Read { path: path.to_owned(), source })?;
    serde_json::from_str(&body).map_err(|source| CliError::Parse { path: path.to_owned(), source })
}

fn load_game(path: &Path) -> Result<GameSpec, CliError> {
    let game: GameSpec = load_json(path)?;
    game.validate()?;
    Ok(game)
}

fn parse_list<T: std::str::FromStr>(raw: &str, what: &str) -> Result<Vec<T>, CliError> {
    raw.split(',')
        .map(|s| s.trim().parse::<T>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|_| CliError::Usage(format!("could not parse {what} list {raw:?}")))
}

/// Resolved parameters for each command, embedded into manifests so reruns
/// need no external files.
#[derive(Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
enum ResolvedRun {
    Solve { n: u32, game: GameSpec },
    SweepN { ladder: Vec<u32>, game: GameSpec },
    SweepConflict { ratios: Vec<f64>, n: u32, game: GameSpec },
    ThresholdQ { n_probe: u32, tol: f64, game: GameSpec },
    Index { n: u32, game: GameSpec },
    Mechanism { ladder: Vec<u32>, t_alpha: Option<f64>, t_beta: Option<f64>, game: GameSpec },
    Largedev { ladder: Vec<u32>, ball_radius: f64, model: MessageModelConfig, game: GameSpec },
    Simulate { scenario: ResolvedScenario, trials: u64, seed: u64, n: u32, game: GameSpec },
    Verify { game: GameSpec },
}

#[derive(Serialize, Deserialize, Clone)]
#[serde(tag = "kind", rename_all = "kebab-case")]
enum ResolvedScenario {
    Equilibrium { x: f64, cutoff: u32 },
    Cutoff { cutoff: u32 },
    Randomized { mu: f64, cutoff_alpha: u32, cutoff_beta: u32 },
    Message { model: MessageModelConfig },
}

impl ResolvedRun {
    fn command_name(&self) -> &'static str {
        match self {
            ResolvedRun::Solve { .. } => "solve",
            ResolvedRun::SweepN { .. } => "sweep-n",
            ResolvedRun::SweepConflict { .. } => "sweep-conflict",
            ResolvedRun::ThresholdQ { .. } => "threshold-q",
            ResolvedRun::Index { .. } => "index",
            ResolvedRun::Mechanism { .. } => "mechanism",
            ResolvedRun::Largedev { .. } => "largedev",
            ResolvedRun::Simulate { .. } => "simulate",
            ResolvedRun::Verify { .. } => "verify",
        }
    }

    fn seed(&self) -> Option<u64> {
        match self {
            ResolvedRun::Simulate { seed, .. } => Some(*seed),
            _ => None,
        }
    }
}

fn run(command: Command, threads: Option<usize>) -> Result<i32, CliError> {
    let (resolved, out) = match command {
        Command::Solve { io, n } => {
            (ResolvedRun::Solve { n, game: load_game(&io.config)? }, io.out)
        }
        Command::SweepN { io, ladder } => (
            ResolvedRun::SweepN {
                ladder: parse_list(&ladder, "ladder")?,
                game: load_game(&io.config)?,
            },
            io.out,
        ),
        Command::SweepConflict { io, ratios, n } => (
            ResolvedRun::SweepConflict {
                ratios: parse_list(&ratios, "ratio")?,
                n,
                game: load_game(&io.config)?,
            },
            io.out,
        ),
        Command::ThresholdQ { io, n_probe, tol } => (
            ResolvedRun::ThresholdQ { n_probe, tol, game: load_game(&io.config)? },
            io.out,
        ),
        Command::Index { io, n } => {
            (ResolvedRun::Index { n, game: load_game(&io.config)? }, io.out)
        }
        Command::Mechanism { io, ladder, t_alpha, t_beta } => (
            ResolvedRun::Mechanism {
                ladder: parse_list(&ladder, "ladder")?,
                t_alpha,
                t_beta,
                game: load_game(&io.config)?,
            },
            io.out,
        ),
        Command::Largedev { io, model, ladder, ball_radius } => {
            let model: MessageModelConfig = match model {
                Some(path) => load_json(&path)?,
                None => reference_model_config(),
            };
            model.build()?;
            (
                ResolvedRun::Largedev {
                    ladder: parse_list(&ladder, "ladder")?,
                    ball_radius,
                    model,
                    game: load_game(&io.config)?,
                },
                io.out,
            )
        }
        Command::Simulate { io, scenario, trials, seed, n, x, cutoff, model } => {
            let game = load_game(&io.config)?;
            let scenario = resolve_scenario(&game, &scenario, n, x, cutoff, model)?;
            (ResolvedRun::Simulate { scenario, trials, seed, n, game }, io.out)
        }
        Command::Verify { config, out } => {
            let game = match config {
                Some(path) => load_game(&path)?,
                None => verify::reference_baseline(),
            };
            return match out {
                Some(out) => {
                    let resolved = ResolvedRun::Verify { game };
                    let started = Instant::now();
                    let exit = execute(&resolved, &out)?;
                    let mut manifest =
                        RunManifest::new("verify", serde_json::to_value(&resolved)?);
                    manifest.threads = threads;
                    manifest.outputs = vec![out.display().to_string()];
                    manifest.duration_seconds = started.elapsed().as_secs_f64();
                    manifest.write(&out)?;
                    Ok(exit)
                }
                None => {
                    let results = verify::run_all(&game);
                    let failed = print_results(&results);
                    Ok(if failed == 0 { 0 } else { 1 })
                }
            };
        }
        Command::Rerun { manifest, out } => {
            let loaded = RunManifest::load(&manifest)?;
            let resolved: ResolvedRun = serde_json::from_value(loaded.params)
                .map_err(|source| CliError::Parse { path: manifest.clone(), source })?;
            (resolved, out)
        }
    };

    let started = Instant::now();
    let exit = execute(&resolved, &out)?;
    let mut manifest = RunManifest::new(resolved.command_name(), serde_json::to_value(&resolved)?);
    manifest.seed = resolved.seed();
    manifest.threads = threads;
    manifest.outputs = vec![out.display().to_string()];
    manifest.duration_seconds = started.elapsed().as_secs_f64();
    manifest.write(&out)?;
    Ok(exit)
}

fn print_results(results: &[verify::CriterionResult]) -> usize {
    let mut failed = 0;
    for r in results {
        println!("{}", r.line());
        if !r.passed {
            failed += 1;
        }
    }
    println!("{} of {} checks passed", results.len() - failed, results.len());
    failed
}

fn reference_model_config() -> MessageModelConfig {
    let model = MessageModel::reference();
    MessageModelConfig {
        signal_kernel: model.kernel.clone(),
        strategy_matrix: model.strategy.rows().to_vec(),
        alpha_floor: model.alpha_floor,
    }
}

fn resolve_scenario(
    game: &GameSpec,
    scenario: &str,
    n: u32,
    x: Option<f64>,
    cutoff: Option<u32>,
    model: Option<PathBuf>,
) -> Result<ResolvedScenario, CliError> {
    match scenario {
        "equilibrium" => {
            let (x, cutoff) = match (x, cutoff) {
                (Some(x), Some(cutoff)) => (x, cutoff),
                _ => {
                    let set = solve(game, n)?;
                    let eq = set.most_informative().ok_or_else(|| {
                        CliError::Usage(
                            "no informative equilibrium to resolve; pass --x and --cutoff".into(),
                        )
                    })?;
                    (x.unwrap_or(eq.x), cutoff.unwrap_or(eq.cutoff))
                }
            };
            Ok(ResolvedScenario::Equilibrium { x, cutoff })
        }
        "cutoff" => {
            let cutoff = cutoff.unwrap_or_else(|| sender_optimal_cutoff(game, n).clamp(1, n));
            Ok(ResolvedScenario::Cutoff { cutoff })
        }
        "randomized" => {
            let (mech, _) = build_randomized(game, n, None, None)?;
            Ok(ResolvedScenario::Randomized {
                mu: mech.mu,
                cutoff_alpha: mech.cutoff_alpha,
                cutoff_beta: mech.cutoff_beta,
            })
        }
        "message" => {
            let model: MessageModelConfig = match model {
                Some(path) => load_json(&path)?,
                None => reference_model_config(),
            };
            model.build()?;
            Ok(ResolvedScenario::Message { model })
        }
        other => Err(CliError::Usage(format!(
            "unknown scenario {other:?}; expected equilibrium, cutoff, randomized, or message"
        ))),
    }
}

fn execute(resolved: &ResolvedRun, out: &Path) -> Result<i32, CliError> {
    match resolved {
        ResolvedRun::Solve { n, game } => {
            let set = solve(game, *n)?;
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
            write_csv(out, &["N", "x", "cutoff", "ls_h", "ls_l", "v_sender", "v_receiver"], &rows)?;
            Ok(0)
        }
        ResolvedRun::SweepN { ladder, game } => {
            let trace = ladder_trace(game, ladder)?;
            let rows: Vec<Vec<Cell>> = trace
                .iter()
                .map(|p| {
                    vec![
                        Cell::from(p.n),
                        Cell::from(p.x_max),
                        Cell::from(p.cutoff_max),
                        Cell::from(p.n_times_x),
                        Cell::from(p.v_sender_max),
                        Cell::from(p.v_receiver_max),
                        Cell::from(p.v_receiver_babbling),
                        Cell::from(p.learning_gap),
                        Cell::from(p.equilibrium_count),
                    ]
                })
                .collect();
            write_csv(
                out,
                &[
                    "N",
                    "x_max",
                    "cutoff_max",
                    "n_x",
                    "v_s_max",
                    "v_r_max",
                    "v_r_babbling",
                    "learning_gap",
                    "equilibria",
                ],
                &rows,
            )?;
            let nx: Vec<f64> = trace.iter().filter(|p| p.informative).map(|p| p.n_times_x).collect();
            let bounded = !nx.is_empty()
                && nx.iter().cloned().fold(0.0f64, f64::max)
                    < 10.0 * nx.iter().cloned().fold(f64::INFINITY, f64::min);
            let summary = serde_json::json!({
                "note": "finite-ladder evidence for the limit claims, not a proof",
                "x_max_decays": trace.first().zip(trace.last()).map(|(f, l)| l.x_max < f.x_max),
                "total_informativeness_bounded": bounded,
                "learning_gap_min": trace.iter().map(|p| p.learning_gap).fold(f64::INFINITY, f64::min),
            });
            write_json(&summary_path(out), &summary)?;
            Ok(0)
        }
        ResolvedRun::SweepConflict { ratios, n, game } => {
            let cells = conflict_sweep(game, ratios, *n)?;
            let rows: Vec<Vec<Cell>> = cells
                .iter()
                .map(|c| {
                    vec![
                        Cell::from(c.param),
                        Cell::from(c.x_max),
                        Cell::from(c.cutoff_max),
                        Cell::from(c.n_times_x),
                        Cell::from(c.v_sender_max),
                        Cell::from(c.v_receiver_max),
                        Cell::from(c.index_proxy),
                    ]
                })
                .collect();
            write_csv(
                out,
                &["conflict_ratio", "x_max", "cutoff_max", "n_x", "v_s_max", "v_r_max", "index_proxy"],
                &rows,
            )?;
            let monotone = cells.windows(2).all(|w| w[1].x_max <= w[0].x_max + 1e-12);
            write_json(
                &summary_path(out),
                &serde_json::json!({ "x_max_nonincreasing": monotone, "n": n }),
            )?;
            Ok(0)
        }
        ResolvedRun::ThresholdQ { n_probe, tol, game } => {
            let est = estimate_threshold_mass(game, *n_probe, *tol)?;
            let rows = vec![vec![
                Cell::from(est.mass_lo),
                Cell::from(est.mass_hi),
                Cell::from(est.weight_lo),
                Cell::from(est.weight_hi),
                Cell::from(est.ladder_monotone),
            ]];
            write_csv(
                out,
                &["mass_lo", "mass_hi", "weight_lo", "weight_hi", "ladder_monotone"],
                &rows,
            )?;
            Ok(0)
        }
        ResolvedRun::Index { n, game } => {
            let report = information_index(game, *n)?;
            let rows = vec![vec![
                Cell::from(report.n),
                Cell::from(report.value),
                Cell::from(report.v_receiver_max),
                Cell::from(report.v_receiver_babbling),
                Cell::from(report.v_receiver_full),
            ]];
            write_csv(out, &["N", "index", "v_r_max", "v_r_babbling", "v_r_full"], &rows)?;
            Ok(0)
        }
        ResolvedRun::Mechanism { ladder, t_alpha, t_beta, game } => {
            let rows = randomized_convergence(game, ladder, *t_alpha, *t_beta)?;
            let cells: Vec<Vec<Cell>> = rows
                .iter()
                .map(|r| {
                    vec![
                        Cell::from(r.n),
                        Cell::from(r.mu),
                        Cell::from(r.cutoff_alpha),
                        Cell::from(r.cutoff_beta),
                        Cell::from(r.ic),
                        Cell::from(r.p_sq_theta1),
                        Cell::from(r.p_prop_theta2),
                        Cell::from(r.p_prop_theta3),
                    ]
                })
                .collect();
            write_csv(
                out,
                &[
                    "N",
                    "mu",
                    "cutoff_alpha",
                    "cutoff_beta",
                    "ic",
                    "p_sq_theta1",
                    "p_prop_theta2",
                    "p_prop_theta3",
                ],
                &cells,
            )?;
            Ok(0)
        }
        ResolvedRun::Largedev { ladder, ball_radius, model, game } => {
            let model = model.build()?;
            let trace = pivotal_decay_trace(game, &model, ladder, *ball_radius)?;
            let rows: Vec<Vec<Cell>> = trace
                .rows
                .iter()
                .map(|r| {
                    vec![
                        Cell::from(r.n),
                        Cell::from(r.log_ratio_31),
                        Cell::from(r.log_ratio_32),
                        Cell::from(r.mass_in_ball),
                        Cell::from(r.pivotal_count),
                    ]
                })
                .collect();
            write_csv(
                out,
                &["N", "log_ratio_31", "log_ratio_32", "mass_in_ball", "pivotal_count"],
                &rows,
            )?;
            write_json(
                &summary_path(out),
                &serde_json::json!({
                    "slope_31": trace.slope_31,
                    "r2_31": trace.r2_31,
                    "slope_32": trace.slope_32,
                    "r2_32": trace.r2_32,
                    "skipped": trace.skipped,
                }),
            )?;
            Ok(0)
        }
        ResolvedRun::Simulate { scenario, trials, seed, n, game } => {
            let sim_scenario = match scenario {
                ResolvedScenario::Equilibrium { x, cutoff } => Scenario::EquilibriumPlay {
                    x_low: 0.0,
                    x_high: *x,
                    cutoff: *cutoff,
                },
                ResolvedScenario::Cutoff { cutoff } => {
                    Scenario::CutoffMechanism { cutoff: *cutoff }
                }
                ResolvedScenario::Randomized { mu, cutoff_alpha, cutoff_beta } => {
                    Scenario::RandomizedMechanism {
                        mu: *mu,
                        cutoff_alpha: *cutoff_alpha,
                        cutoff_beta: *cutoff_beta,
                    }
                }
                ResolvedScenario::Message { model } => {
                    Scenario::MessageModelPlay { model: model.build()? }
                }
            };
            let report =
                simulate(game, &sim_scenario, SimConfig { trials: *trials, seed: *seed, n: *n });
            let mut rows: Vec<Vec<Cell>> = Vec::new();
            for state in 0..3 {
                let p = report.p_proposal(state);
                rows.push(vec![
                    Cell::from("p_proposal"),
                    Cell::from(state),
                    Cell::from(p.value),
                    Cell::from(p.std_error),
                ]);
            }
            for state in 0..3 {
                let p = report.p_pivot(state);
                rows.push(vec![
                    Cell::from("p_pivot"),
                    Cell::from(state),
                    Cell::from(p.value),
                    Cell::from(p.std_error),
                ]);
            }
            let (vs, vr) = report.welfare(game);
            rows.push(vec![
                Cell::from("v_sender"),
                Cell::from("all"),
                Cell::from(vs.value),
                Cell::from(vs.std_error),
            ]);
            rows.push(vec![
                Cell::from("v_receiver"),
                Cell::from("all"),
                Cell::from(vr.value),
                Cell::from(vr.std_error),
            ]);
            write_csv(out, &["quantity", "state", "estimate", "std_error"], &rows)?;
            Ok(0)
        }
        ResolvedRun::Verify { game } => {
            let results = verify::run_all(game);
            let failed = print_results(&results);
            let rows: Vec<Vec<Cell>> = results
                .iter()
                .map(|r| {
                    vec![
                        Cell::from(r.id),
                        Cell::from(r.name),
                        Cell::from(r.passed),
                        Cell::from(r.detail.as_str()),
                    ]
                })
                .collect();
            write_csv(out, &["criterion", "name", "passed", "detail"], &rows)?;
            Ok(if failed == 0 { 0 } else { 1 })
        }
    }
}

fn summary_path(out: &Path) -> PathBuf {
    let mut os = out.as_os_str().to_owned();
    os.push(".summary.json");
    PathBuf::from(os)
}
