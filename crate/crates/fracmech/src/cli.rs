//! Batch command-line front end: problem files in, CSV data and JSON
//! reports out, with a stable exit-code contract.
//!
//! Exit codes: 0 success, 1 check failed, 2 input error, 3 numerical
//! non-convergence.

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::dynamics::{
    canonical_hamiltonian, check_equivalence_ops, combined_equation, derive_momenta, el_residual,
    lvl_el_residual, poisson, primary_constraints, OpTerm, OperatorExpr, OperatorPair,
};
use crate::error::{Error, Result};
use crate::expr::{parse, Binding};
use crate::frac_ops::{build_operator, Grid, Side};
use crate::problem::{BuiltProblem, ModelForm, ProblemFile};
use crate::report::{format_csv, RunReport};
use crate::solver::solve_lvl;
use crate::varprob::{
    left_ladder_var, left_momentum_var, multiplier_var, random_smooth_samples, right_momentum_var,
    LinearVelocityLagrangian, PhaseTrajectory, TIME_VAR,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_INPUT_ERROR: i32 = 2;
pub const EXIT_NO_CONVERGENCE: i32 = 3;

#[derive(Parser)]
#[command(
    name = "fracmech",
    version,
    about = "Fractional variational mechanics: discrete operators, derived equations, solvers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a one-sided fractional derivative of an expression in t as CSV
    Deriv(DerivArgs),
    /// Derive momenta, Hamiltonian, constraints, and equations from a problem file
    Derive(DeriveArgs),
    /// Evaluate equation-of-motion residuals along the trajectory in a problem file
    Residual(ResidualArgs),
    /// Solve the boundary-value problem in a problem file with damped Newton
    Solve(SolveArgs),
    /// Check that the Lagrangian and Hamiltonian routes give identical equations
    CheckEquivalence(CheckEquivalenceArgs),
    /// Compute a Poisson bracket over declared conjugate pairs
    Poisson(PoissonArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SideArg {
    Left,
    Right,
}

impl From<SideArg> for Side {
    fn from(side: SideArg) -> Side {
        match side {
            SideArg::Left => Side::Left,
            SideArg::Right => Side::Right,
        }
    }
}

#[derive(Args)]
struct DerivArgs {
    /// Expression in t to differentiate
    #[arg(long)]
    expr: String,
    /// Fractional order
    #[arg(long)]
    alpha: f64,
    /// Operator side
    #[arg(long, value_enum, default_value_t = SideArg::Left)]
    side: SideArg,
    /// Interval start
    #[arg(long, default_value_t = 0.0)]
    a: f64,
    /// Interval end
    #[arg(long, default_value_t = 1.0)]
    b: f64,
    /// Grid node count
    #[arg(long, default_value_t = 1025)]
    n: usize,
    /// Write the CSV here instead of stdout
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct DeriveArgs {
    /// Problem file
    file: PathBuf,
}

#[derive(Args)]
struct ResidualArgs {
    /// Problem file with a trajectory section
    file: PathBuf,
    /// Write the residual CSV to this path
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SolveArgs {
    /// Problem file with boundary pins
    file: PathBuf,
    /// Residual tolerance for convergence
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Newton iteration cap
    #[arg(long, default_value_t = 25)]
    max_iter: usize,
    /// Write the trajectory CSV to this path
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct CheckEquivalenceArgs {
    /// Problem file with a linear-velocity model
    file: PathBuf,
    /// Number of random trajectories
    #[arg(long, default_value_t = 100)]
    trials: u64,
    /// Seed for trajectory generation
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Evaluate the Hamiltonian route with operators of a slightly different
    /// order; the check must then fail, demonstrating its sensitivity
    #[arg(long)]
    debug_mismatch_operators: bool,
}

#[derive(Args)]
struct PoissonArgs {
    /// First expression
    #[arg(long)]
    a_expr: String,
    /// Second expression
    #[arg(long)]
    b_expr: String,
    /// Conjugate pairs as q:p, comma separated (example: q1:p1,q2:p2)
    #[arg(long)]
    pairs: String,
    /// Optional evaluation point as name=value, comma separated
    #[arg(long)]
    at: Option<String>,
}

/// Parse arguments from the process environment, dispatch, and return the
/// exit code.
pub fn run() -> i32 {
    let cli = Cli::parse();
    match dispatch(&cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Accuracy { .. } => EXIT_NO_CONVERGENCE,
                _ => EXIT_INPUT_ERROR,
            }
        }
    }
}

fn dispatch(command: &Command) -> Result<i32> {
    match command {
        Command::Deriv(args) => cmd_deriv(args),
        Command::Derive(args) => cmd_derive(args),
        Command::Residual(args) => cmd_residual(args),
        Command::Solve(args) => cmd_solve(args),
        Command::CheckEquivalence(args) => cmd_check_equivalence(args),
        Command::Poisson(args) => cmd_poisson(args),
    }
}

fn emit(path: &Option<PathBuf>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(Error::from),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_problem(path: &PathBuf) -> Result<(ProblemFile, BuiltProblem)> {
    let text = std::fs::read_to_string(path)?;
    let file = ProblemFile::parse(&text)?;
    let built = file.build()?;
    Ok((file, built))
}

fn cmd_deriv(args: &DerivArgs) -> Result<i32> {
    let scope: BTreeSet<String> = std::iter::once(TIME_VAR.to_string()).collect();
    let e = parse(&args.expr, &scope)?;
    let grid = Grid::new(args.a, args.b, args.n)?;
    let nodes = grid.nodes();
    let mut channels: BTreeMap<&str, &[f64]> = BTreeMap::new();
    channels.insert(TIME_VAR, &nodes);
    let samples = e.eval_batch(grid.n_points(), &channels)?;
    let op = build_operator(args.side.into(), args.alpha, &grid)?;
    let value = op.apply_vec(&samples)?;
    let csv = format_csv(&["t", "value"], &[&nodes, &value])?;
    emit(&args.output, &csv)?;
    Ok(EXIT_OK)
}

fn require_lvl<'a>(built: &'a BuiltProblem, what: &str) -> Result<&'a LinearVelocityLagrangian> {
    built
        .lvl()
        .ok_or_else(|| Error::Usage(format!("{what} needs a linear_velocity lagrangian")))
}

fn cmd_derive(args: &DeriveArgs) -> Result<i32> {
    let (file, built) = load_problem(&args.file)?;
    let lvl = require_lvl(&built, "derive")?;
    let lag = built.augmented()?;
    let momenta = derive_momenta(&lag);
    let hamiltonian = canonical_hamiltonian(&lag, &momenta)?;
    let constraints = primary_constraints(&momenta, lvl, None)?;
    let coords = lag.coords();
    let alpha = lvl.alpha();
    let full = lag.lagrangian();

    let mut momentum_map = serde_json::Map::new();
    for r in 1..=coords.count() {
        for n in 0..=coords.n_left() {
            momentum_map.insert(
                left_momentum_var(r, n),
                json!(momenta.left_momentum(r, n).to_string()),
            );
        }
        if coords.n_right() > 0 {
            for n in 0..=coords.n_right() {
                momentum_map.insert(
                    right_momentum_var(r, n),
                    json!(momenta.right_momentum(r, n).to_string()),
                );
            }
        }
    }

    let mut euler_lagrange = Vec::new();
    for k in 1..=coords.count() {
        let mut terms = Vec::new();
        let plain = full.diff(&left_ladder_var(k, 0));
        if plain != crate::expr::Expr::Const(0.0) {
            terms.push(OpTerm::Plain(plain));
        }
        let a_k = lvl.coefficient(k - 1);
        if *a_k != crate::expr::Expr::Const(0.0) {
            terms.push(OpTerm::Operator {
                side: Side::Right,
                order: alpha,
                power: 1,
                inner: a_k.clone(),
            });
        }
        euler_lagrange.push(format!("0 = {}", OperatorExpr::from_terms(terms)));
    }

    let combined: Vec<String> = combined_equation(&hamiltonian, lvl)?
        .iter()
        .map(|eq| format!("0 = {eq}"))
        .collect();

    let h = hamiltonian.expr();
    let mut stationarity = Vec::new();
    let mut momentum_evolution = Vec::new();
    let mut reconstruction = Vec::new();
    for r in 1..=coords.count() {
        stationarity.push(format!("0 = {}", h.diff(&left_ladder_var(r, 1))));
        momentum_evolution.push(format!(
            "Dright^{alpha}[{}] = {}",
            left_momentum_var(r, 0),
            h.diff(&left_ladder_var(r, 0))
        ));
        reconstruction.push(format!(
            "Dleft^{alpha}[{}] = {}",
            left_ladder_var(r, 0),
            h.diff(&left_momentum_var(r, 0))
        ));
    }

    let mut report = RunReport::new("derive");
    report.input_echo_toml = Some(file.to_toml()?);
    report.results = json!({
        "lagrangian": full.to_string(),
        "momenta": momentum_map,
        "hamiltonian": h.to_string(),
        "multipliers": (1..=lag.multiplier_count()).map(multiplier_var).collect::<Vec<_>>(),
        "primary_constraints": constraints
            .constraints()
            .iter()
            .map(|c| c.to_string())
            .collect::<Vec<_>>(),
        "euler_lagrange": euler_lagrange,
        "hamilton_equations": {
            "stationarity": stationarity,
            "momentum": momentum_evolution,
            "reconstruction": reconstruction,
        },
        "combined": combined,
    });
    print!("{}", report.to_json());
    Ok(EXIT_OK)
}

fn cmd_residual(args: &ResidualArgs) -> Result<i32> {
    let (file, built) = load_problem(&args.file)?;
    let traj = built
        .trajectory()
        .ok_or_else(|| Error::Usage("problem file has no trajectory section".into()))?;
    let pair = OperatorPair::new(built.grid(), built.orders().alpha())?;
    let field = match built.form() {
        ModelForm::LinearVelocity(lvl) if built.constraints().is_empty() => {
            lvl_el_residual(lvl, traj, &pair)?
        }
        _ => el_residual(&built.augmented()?, traj, &pair)?,
    };
    let times: Vec<f64> = field.nodes().iter().map(|&i| built.grid().node(i)).collect();
    let mut headers = vec!["t"];
    let mut columns: Vec<&[f64]> = vec![&times];
    for (i, label) in field.labels().iter().enumerate() {
        headers.push(label);
        columns.push(field.equation(i));
    }
    let csv = format_csv(&headers, &columns)?;
    if args.output.is_some() {
        emit(&args.output, &csv)?;
    }
    let mut report = RunReport::new("residual");
    report.input_echo_toml = Some(file.to_toml()?);
    report.results = json!({
        "equations": field.labels(),
        "nodes": field.nodes().len(),
        "max_abs": field.max_abs(),
        "l2": field.l2(),
        "csv": args.output.as_ref().map(|p| p.display().to_string()),
    });
    print!("{}", report.to_json());
    Ok(EXIT_OK)
}

fn cmd_solve(args: &SolveArgs) -> Result<i32> {
    let (file, built) = load_problem(&args.file)?;
    let lvl = require_lvl(&built, "solve")?;
    if !built.constraints().is_empty() {
        return Err(Error::Usage(
            "solving constrained models is not supported".into(),
        ));
    }
    let solved = solve_lvl(lvl, built.grid(), built.boundary(), args.tol, args.max_iter)?;
    let nodes = built.grid().nodes();
    let traj = solved.trajectory();
    let names = traj.channel_names();
    let mut headers = vec!["t"];
    let mut columns: Vec<&[f64]> = vec![&nodes];
    for name in &names {
        headers.push(name);
        columns.push(traj.channel(name).expect("listed channel exists"));
    }
    let csv = format_csv(&headers, &columns)?;
    if args.output.is_some() {
        emit(&args.output, &csv)?;
    }
    let mut report = RunReport::new("solve");
    report.input_echo_toml = Some(file.to_toml()?);
    report.pass = Some(solved.converged());
    report.results = json!({
        "converged": solved.converged(),
        "iterations": solved.iterations(),
        "final_residual": solved.final_residual(),
        "tolerance": args.tol,
        "unknowns": solved.unknown_count(),
        "equations": solved.equation_count(),
        "constraint_violation": solved.constraint_violation(),
        "conditioning_warning": solved.conditioning_warning(),
        "csv": args.output.as_ref().map(|p| p.display().to_string()),
    });
    print!("{}", report.to_json());
    Ok(if solved.converged() {
        EXIT_OK
    } else {
        EXIT_NO_CONVERGENCE
    })
}

fn cmd_check_equivalence(args: &CheckEquivalenceArgs) -> Result<i32> {
    let (file, built) = load_problem(&args.file)?;
    let lvl = require_lvl(&built, "check-equivalence")?;
    if args.trials == 0 {
        return Err(Error::Usage("at least one trial is required".into()));
    }
    let pair = OperatorPair::new(built.grid(), lvl.alpha())?;
    let hamiltonian_ops = if args.debug_mismatch_operators {
        OperatorPair::new(built.grid(), lvl.alpha() + 0.01)?
    } else {
        pair.clone()
    };
    let tolerance = 1e-12;
    let mut worst = 0.0f64;
    for trial in 0..args.trials {
        let samples = random_smooth_samples(
            built.grid(),
            lvl.coords().count(),
            args.seed.wrapping_add(trial),
        );
        let mut traj = PhaseTrajectory::new(built.grid().clone());
        for (r0, f) in samples.iter().enumerate() {
            traj.set(left_ladder_var(r0 + 1, 0), f.values().to_vec())?;
        }
        let outcome = check_equivalence_ops(lvl, &traj, &pair, &hamiltonian_ops)?;
        worst = worst.max(outcome.max_abs_diff());
    }
    let pass = worst < tolerance;
    let mut report = RunReport::new("check-equivalence");
    report.input_echo_toml = Some(file.to_toml()?);
    report.pass = Some(pass);
    report.results = json!({
        "trials": args.trials,
        "seed": args.seed,
        "max_abs_diff": worst,
        "tolerance": tolerance,
        "operator_mismatch_debug": args.debug_mismatch_operators,
    });
    print!("{}", report.to_json());
    Ok(if pass { EXIT_OK } else { EXIT_CHECK_FAILED })
}

fn parse_pairs(text: &str) -> Result<Vec<(String, String)>> {
    let mut pairs = Vec::new();
    for part in text.split(',') {
        let mut halves = part.split(':');
        match (halves.next(), halves.next(), halves.next()) {
            (Some(q), Some(p), None) if !q.trim().is_empty() && !p.trim().is_empty() => {
                pairs.push((q.trim().to_string(), p.trim().to_string()));
            }
            _ => {
                return Err(Error::Usage(format!(
                    "pair {part:?} is not of the form q:p"
                )));
            }
        }
    }
    Ok(pairs)
}

fn parse_binding(text: &str) -> Result<Binding> {
    let mut binding = Binding::new();
    for part in text.split(',') {
        let mut halves = part.split('=');
        match (halves.next(), halves.next(), halves.next()) {
            (Some(name), Some(value), None) if !name.trim().is_empty() => {
                let v: f64 = value.trim().parse().map_err(|_| {
                    Error::Usage(format!("binding value {value:?} is not a number"))
                })?;
                binding.insert(name.trim().to_string(), v);
            }
            _ => {
                return Err(Error::Usage(format!(
                    "binding {part:?} is not of the form name=value"
                )));
            }
        }
    }
    Ok(binding)
}

fn cmd_poisson(args: &PoissonArgs) -> Result<i32> {
    let pairs = parse_pairs(&args.pairs)?;
    let mut scope: BTreeSet<String> = pairs
        .iter()
        .flat_map(|(q, p)| [q.clone(), p.clone()])
        .collect();
    scope.insert(TIME_VAR.to_string());
    let a = parse(&args.a_expr, &scope)?;
    let b = parse(&args.b_expr, &scope)?;
    let bracket = poisson(&a, &b, &pairs)?;
    let mut report = RunReport::new("poisson");
    let mut results = json!({
        "a": a.to_string(),
        "b": b.to_string(),
        "pairs": pairs.iter().map(|(q, p)| format!("{q}:{p}")).collect::<Vec<_>>(),
        "bracket": bracket.to_string(),
    });
    if let Some(at) = &args.at {
        let binding = parse_binding(at)?;
        results["at"] = json!(at);
        results["value"] = json!(bracket.eval(&binding)?);
    }
    report.results = results;
    print!("{}", report.to_json());
    Ok(EXIT_OK)
}
