use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use bestchoice::asymptotics::{
    emit_figure_data, ewens_limit, mallows_global_max, mallows_series_peak, mallows_sub_limit,
    mallows_super_limit, mallows_super_series, Figure, Grid,
};
use bestchoice::checks::{run_suite, Suite, DEFAULT_ORACLE_BUDGET};
use bestchoice::exactnum::{format_rational, parse_rational, BigRat};
use bestchoice::permutation::{check_prefix_equivariance, Equivariance, Permutation, Statistic};
use bestchoice::positional::{
    ewens_kappa, ewens_profile, mallows_optimal_k, mallows_win, profile, roots_csv, w_rows,
    w_table_csv, Model,
};
use bestchoice::sampler::{
    run_simulation, run_simulation_observed, SimConfig, SimModel, Strategy, DEFAULT_WORKERS,
};
use bestchoice::tree_solver::{
    solve_with, GameSpec, SolveMode, SolveOptions, StrikeSet, DEFAULT_SOLVE_BUDGET,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

/// Largest N accepted by check-equivariance without --unsafe-n.
const EQUIVARIANCE_BUDGET: usize = 8;

#[derive(Parser)]
#[command(
    name = "bestchoice",
    version,
    about = "Exact and asymptotic analysis of the best-choice game under weighted permutation models"
)]
struct Cli {
    /// Write output to FILE instead of stdout.
    #[arg(long, global = true, value_name = "FILE")]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the game exactly by exploring the prefix tree.
    Solve {
        #[arg(long, default_value = "lrmax")]
        statistic: Statistic,
        #[arg(long)]
        n: usize,
        #[arg(long, value_parser = exact_theta)]
        theta: BigRat,
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        /// Allow N above the enumeration budget.
        #[arg(long)]
        unsafe_n: bool,
    },
    /// CSV of W(N,k) coefficients for every N up to --n.
    Wtable {
        #[arg(long)]
        model: Model,
        #[arg(long)]
        n: usize,
    },
    /// Optimal number of rejections and its exact win probability.
    Kappa {
        #[arg(long)]
        model: Model,
        #[arg(long)]
        n: usize,
        #[arg(long, value_parser = exact_theta)]
        theta: BigRat,
        /// Print the win probability of every k.
        #[arg(long)]
        profile: bool,
    },
    /// CSV of the Ewens critical roots for every N up to --n.
    Roots {
        #[arg(long)]
        n: usize,
    },
    /// Limiting strategies and win probabilities as N grows.
    Asympt(AsymptArgs),
    /// Monte Carlo estimate of a strategy's win probability.
    Simulate(SimulateArgs),
    /// Test whether a statistic is prefix equivariant up to size --n.
    CheckEquivariance {
        #[arg(long)]
        statistic: Statistic,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        unsafe_n: bool,
    },
    /// Run a verification suite and print one line per property.
    Verify {
        suite: Suite,
        #[arg(long, default_value_t = DEFAULT_ORACLE_BUDGET)]
        n_max: usize,
        #[arg(long)]
        unsafe_n: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Exhaustive,
    Equivariant,
}

#[derive(Args)]
struct AsymptArgs {
    #[arg(long)]
    model: Option<Model>,
    #[arg(long)]
    theta: Option<f64>,
    /// Number of rejections for the Mallows θ > 1 series.
    #[arg(long)]
    k: Option<usize>,
    /// Emit CSV data for a figure: f4, m1 or m2.
    #[arg(long)]
    figure: Option<Figure>,
    #[arg(long)]
    theta_min: Option<f64>,
    #[arg(long)]
    theta_max: Option<f64>,
    #[arg(long)]
    steps: Option<usize>,
    /// Maximize the Mallows θ > 1 limit over θ and k (or over θ for --k).
    #[arg(long)]
    global_max: bool,
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    model: SimModel,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 1.0)]
    theta: f64,
    /// Positional strategy: reject k candidates.
    #[arg(
        long,
        conflicts_with = "strike_set",
        required_unless_present = "strike_set"
    )]
    k: Option<usize>,
    /// Strike set as prefixes separated by ';', e.g. "12;213;312;321".
    #[arg(long)]
    strike_set: Option<String>,
    #[arg(long, default_value_t = 1_000_000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_WORKERS)]
    workers: usize,
    /// Write every sampled order to FILE, one per line.
    #[arg(long, value_name = "FILE")]
    dump_perms: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Check(String),
    Internal(String),
}

impl Failure {
    fn usage(e: impl std::fmt::Display) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Internal(e.to_string())
    }
}

/// Exact θ as "p/q"; decimals are refused with the equivalent fraction.
fn exact_theta(s: &str) -> Result<BigRat, String> {
    let t = s.trim();
    if let Some((int, frac)) = t.split_once('.') {
        let digits = format!("{int}{frac}");
        let hint = parse_rational(&format!("{digits}/1{}", "0".repeat(frac.len())))
            .map(|r| format!("; write {t} as {}", format_rational(&r)))
            .unwrap_or_default();
        return Err(format!(
            "this command needs an exact θ as \"p/q\", not a decimal{hint}"
        ));
    }
    let theta = parse_rational(t).map_err(|e| e.to_string())?;
    if theta <= BigRat::from_integer(0.into()) {
        return Err("θ must be positive".into());
    }
    Ok(theta)
}

fn check_budget(n: usize, budget: usize, unsafe_n: bool) -> Result<(), Failure> {
    if n > budget && !unsafe_n {
        return Err(Failure::Usage(format!(
            "N = {n} exceeds the budget of {budget}; pass --unsafe-n to run anyway"
        )));
    }
    Ok(())
}

fn pretty(v: &impl serde::Serialize) -> String {
    serde_json::to_string_pretty(v).expect("plain data") + "\n"
}

fn run(command: Command, out: &mut dyn Write) -> Result<(), Failure> {
    match command {
        Command::Solve {
            statistic,
            n,
            theta,
            mode,
            unsafe_n,
        } => {
            check_budget(n, DEFAULT_SOLVE_BUDGET, unsafe_n)?;
            let spec = GameSpec::new(n, statistic, theta).map_err(Failure::usage)?;
            let options = SolveOptions {
                mode: mode.map(|m| match m {
                    ModeArg::Exhaustive => SolveMode::Exhaustive,
                    ModeArg::Equivariant => SolveMode::Equivariant,
                }),
                budget: n.max(DEFAULT_SOLVE_BUDGET),
            };
            let result = solve_with(&spec, options).map_err(Failure::usage)?;
            write!(out, "{}", pretty(&result.to_json()))?;
        }
        Command::Wtable { model, n } => {
            if n == 0 {
                return Err(Failure::usage("N must be at least 1"));
            }
            write!(out, "{}", w_table_csv(&w_rows(model, n)))?;
        }
        Command::Kappa {
            model,
            n,
            theta,
            profile: full,
        } => {
            if full {
                let p = profile(model, n, &theta).map_err(Failure::usage)?;
                write!(out, "{}", pretty(&p))?;
            } else {
                let (kappa, win) = match model {
                    Model::Ewens => {
                        let kappa = ewens_kappa(n, &theta).map_err(Failure::usage)?;
                        let p = ewens_profile(n, &theta).map_err(Failure::usage)?;
                        (kappa, p.win_by_k[kappa].clone())
                    }
                    Model::Mallows => {
                        let kappa = mallows_optimal_k(n, &theta).map_err(Failure::usage)?;
                        (
                            kappa,
                            mallows_win(n, kappa, &theta).map_err(Failure::usage)?,
                        )
                    }
                };
                let value = json!({
                    "model": model,
                    "N": n,
                    "theta": format_rational(&theta),
                    "kappa": kappa,
                    "win": format_rational(&win),
                    "win_f64": bestchoice::exactnum::rat_to_f64(&win),
                });
                write!(out, "{}", pretty(&value))?;
            }
        }
        Command::Roots { n } => {
            if n < 2 {
                return Err(Failure::usage("critical roots exist from N = 2"));
            }
            write!(out, "{}", roots_csv(n))?;
        }
        Command::Asympt(args) => asympt(args, out)?,
        Command::Simulate(args) => simulate(args, out)?,
        Command::CheckEquivariance {
            statistic,
            n,
            unsafe_n,
        } => {
            check_budget(n, EQUIVARIANCE_BUDGET, unsafe_n)?;
            let value = match check_prefix_equivariance(&statistic, n) {
                Equivariance::Holds { checked } => {
                    json!({ "statistic": statistic.name(), "N": n, "equivariant": true, "checked": checked })
                }
                Equivariance::Violated(v) => json!({
                    "statistic": statistic.name(),
                    "N": n,
                    "equivariant": false,
                    "q": v.q.to_string(),
                    "pi": v.pi.to_string(),
                    "image": v.image.to_string(),
                    "observed": v.observed,
                    "expected": v.expected,
                }),
            };
            write!(out, "{}", pretty(&value))?;
        }
        Command::Verify {
            suite,
            n_max,
            unsafe_n,
        } => {
            check_budget(n_max, DEFAULT_ORACLE_BUDGET, unsafe_n)?;
            let report = run_suite(suite, n_max);
            write!(out, "{report}")?;
            if !report.passed() {
                return Err(Failure::Check(format!("{suite:?} suite failed")));
            }
        }
    }
    Ok(())
}

fn asympt(args: AsymptArgs, out: &mut dyn Write) -> Result<(), Failure> {
    if let Some(figure) = args.figure {
        let default = Grid::for_figure(figure);
        let grid = Grid::new(
            args.theta_min.unwrap_or(default.min),
            args.theta_max.unwrap_or(default.max),
            args.steps.unwrap_or(default.steps),
        )
        .map_err(Failure::usage)?;
        let mut csv = Vec::new();
        emit_figure_data(figure, &grid, args.k, args.tol, &mut csv).map_err(Failure::usage)?;
        out.write_all(&csv)?;
        return Ok(());
    }
    if args.global_max {
        let best = match args.k {
            Some(k) => mallows_series_peak(k, args.tol),
            None => mallows_global_max(args.tol),
        }
        .map_err(Failure::usage)?;
        write!(out, "{}", pretty(&best))?;
        return Ok(());
    }
    let model = args.model.ok_or_else(|| {
        Failure::usage("--model is required unless --figure or --global-max is given")
    })?;
    let theta = args
        .theta
        .ok_or_else(|| Failure::usage("--theta is required"))?;
    match (model, args.k) {
        (Model::Mallows, Some(k)) => {
            let v = mallows_super_series(theta, k, args.tol).map_err(Failure::usage)?;
            write!(out, "{}", pretty(&v))?;
        }
        (Model::Ewens, Some(_)) => {
            return Err(Failure::usage(
                "--k applies to the Mallows θ > 1 series only",
            ))
        }
        (Model::Ewens, None) => write!(
            out,
            "{}",
            pretty(&ewens_limit(theta).map_err(Failure::usage)?)
        )?,
        (Model::Mallows, None) => {
            let report = if theta < 1.0 {
                mallows_sub_limit(theta)
            } else {
                mallows_super_limit(theta, args.tol)
            }
            .map_err(Failure::usage)?;
            write!(out, "{}", pretty(&report))?;
        }
    }
    Ok(())
}

fn parse_strike_set(s: &str, n: usize) -> Result<StrikeSet, Failure> {
    let prefixes = s
        .split(';')
        .map(|p| p.trim())
        .filter(|p| !p.is_empty())
        .map(|p| {
            if p.contains([' ', ',']) {
                p.parse::<Permutation>()
            } else {
                p.chars()
                    .map(|c| c.to_digit(10).map(|d| d as usize).ok_or(()))
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|_| ())
                    .and_then(|w| Permutation::new(w).map_err(|_| ()))
                    .or_else(|_| p.parse::<Permutation>())
            }
        })
        .collect::<Result<Vec<_>, _>>()
        .map_err(Failure::usage)?;
    let set = StrikeSet::new(prefixes);
    set.validate(n)
        .map_err(|v| Failure::usage(format!("invalid strike set: {v:?}")))?;
    Ok(set)
}

fn simulate(args: SimulateArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let strategy = match (&args.strike_set, args.k) {
        (Some(s), _) => Strategy::StrikeSet(parse_strike_set(s, args.n)?),
        (None, Some(k)) => Strategy::Positional(k),
        (None, None) => return Err(Failure::usage("either --k or --strike-set is required")),
    };
    let mut cfg = SimConfig::new(
        args.model,
        args.n,
        args.theta,
        strategy,
        args.trials,
        args.seed,
    );
    cfg.workers = args.workers;
    let result = match &args.dump_perms {
        None => run_simulation(&cfg).map_err(Failure::usage)?,
        Some(path) => {
            let mut dump = BufWriter::new(File::create(path)?);
            let mut io_error = None;
            let result = run_simulation_observed(&cfg, |pi| {
                if io_error.is_none() {
                    if let Err(e) = writeln!(dump, "{pi}") {
                        io_error = Some(e);
                    }
                }
            })
            .map_err(Failure::usage)?;
            if let Some(e) = io_error {
                return Err(e.into());
            }
            dump.flush()?;
            result
        }
    };
    write!(out, "{}", pretty(&result))?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut buffer = Vec::new();
    let outcome = run(cli.command, &mut buffer);
    let written = match &cli.output {
        Some(path) => std::fs::write(path, &buffer),
        None => io::stdout().write_all(&buffer),
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Check(msg)) | Err(Failure::Internal(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
