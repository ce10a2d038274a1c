//! Command-line front end: parsing, solving, reductions, strategy
//! verification, sweeps and instance generation.
//!
//! Exit codes: 0 = Player 0 wins / success, 1 = Player 1 wins / rejected,
//! 2 = any usage or input error.

use std::fmt::Display;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::anyhow;
use clap::{Args, Parser, Subcommand, ValueEnum};
use energygames::arena::{parse_arena, serialize_arena};
use energygames::evaluation::{
    avg_energy_of_lasso, mean_payoff_of_lasso, parse_lasso, serialize_lasso, AvgEnergyMode,
    ObjectiveValue,
};
use energygames::oracle::{generate_arena, generate_countdown, GenParams};
use energygames::reductions::{
    build_fig4_gadget, default_cap_max, exists_cap_energy_lu, exists_cap_recharge,
    exists_threshold_avg_energy_l, reduce_avg_recharge, reduce_countdown_to_avg_recharge,
    reduce_exists_cap_to_parity, solve_avg_energy_lu, solve_avg_recharge, CapSearchResult,
    ExistsCapResult, ReductionOutput, ThresholdSearchResult,
};
use energygames::solvers::{
    solve_countdown, solve_energy_l, solve_energy_lu, solve_mean_payoff_threshold, solve_parity3,
    solve_recharge, Coloring, CountdownBudget, SolveResult,
};
use energygames::strategies::{parse_strategy, serialize_strategy, verify_strategy, Objective};
use energygames::tradeoff::{sweep_capacity, sweep_memory};
use energygames::{Player, Rational, WeightedArena};

#[derive(Parser)]
#[command(name = "energygames", version, about = "Weighted graph game toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide an objective on an arena from its initial vertex.
    Solve(SolveArgs),
    /// Does any capacity let Player 0 win the recharge objective?
    ExistsCap(ExistsCapArgs),
    /// Smallest capacity (up to a bound) winning the bounded energy objective.
    ExistsCapLu(ExistsCapLuArgs),
    /// Smallest integer threshold (up to a bound) winning lower-bounded average-energy.
    ExistsThreshold(ExistsCapLuArgs),
    /// Check a strategy file against an objective.
    VerifyStrategy(VerifyArgs),
    /// Optimal average level per capacity, as CSV.
    SweepCap(SweepCapArgs),
    /// Best average level per memory-state count, as CSV.
    SweepMemory(SweepMemoryArgs),
    /// Emit a reduced arena file.
    Reduce(ReduceArgs),
    /// Emit a seeded random arena.
    Gen(GenArgs),
    /// Evaluate an objective value on a lasso.
    EvalLasso(EvalLassoArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ObjectiveName {
    EnergyL,
    EnergyLu,
    AvgEnergyL,
    AvgEnergyLu,
    Recharge,
    AvgRecharge,
    MeanPayoff,
    Parity3,
    Countdown,
}

#[derive(Args)]
struct ObjectiveFlags {
    #[arg(long, value_enum)]
    objective: ObjectiveName,
    /// Capacity / upper energy bound.
    #[arg(long)]
    cap: Option<u64>,
    /// Threshold, as an integer or `P/Q`.
    #[arg(long, value_parser = parse_rational)]
    threshold: Option<Rational>,
    /// Coloring file (`color <vertex> <0|1|2>` lines) for parity.
    #[arg(long)]
    color_file: Option<PathBuf>,
    /// Countdown budget.
    #[arg(long)]
    budget: Option<u64>,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    objective: ObjectiveFlags,
    /// Write the winner's strategy here.
    #[arg(long)]
    emit_strategy: Option<PathBuf>,
    /// Write the solver's certificate here.
    #[arg(long)]
    emit_certificate: Option<PathBuf>,
    arena: PathBuf,
}

#[derive(Args)]
struct ExistsCapArgs {
    #[arg(long)]
    emit_strategy: Option<PathBuf>,
    arena: PathBuf,
}

#[derive(Args)]
struct ExistsCapLuArgs {
    /// Search ceiling; defaults to |V| * W * 256.
    #[arg(long)]
    cap_max: Option<u64>,
    #[arg(long)]
    emit_strategy: Option<PathBuf>,
    arena: PathBuf,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    objective: ObjectiveFlags,
    /// Strategy file to check.
    #[arg(long)]
    strategy: PathBuf,
    arena: PathBuf,
}

#[derive(Args)]
struct SweepCapArgs {
    #[arg(long)]
    from: u64,
    #[arg(long)]
    to: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    ascii_plot: bool,
    #[arg(long, env = "ENERGYGAMES_JOBS", default_value_t = 1)]
    jobs: usize,
    arena: PathBuf,
}

#[derive(Args)]
struct SweepMemoryArgs {
    #[arg(long)]
    cap: u64,
    #[arg(long)]
    from: usize,
    #[arg(long)]
    to: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    ascii_plot: bool,
    #[arg(long, env = "ENERGYGAMES_JOBS", default_value_t = 1)]
    jobs: usize,
    arena: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReduceKind {
    /// Average-bounded recharge to mean-payoff (level product).
    AvgRechargeMp,
    /// Existential-capacity recharge to three-color parity (tripling).
    ExistsCapParity,
    /// Countdown to average-bounded recharge (fresh recharge initial).
    CountdownAvgRecharge,
    /// Countdown to the charge/commit/drain capacity gadget.
    Fig4,
}

#[derive(Args)]
struct ReduceArgs {
    #[arg(long, value_enum)]
    kind: ReduceKind,
    #[arg(long)]
    cap: Option<u64>,
    #[arg(long, value_parser = parse_rational)]
    threshold: Option<Rational>,
    #[arg(long)]
    budget: Option<u64>,
    /// Output arena file (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output coloring file (exists-cap-parity only).
    #[arg(long)]
    colors: Option<PathBuf>,
    arena: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum GenMode {
    General,
    Recharge,
    Countdown,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    seed: u64,
    #[arg(long, value_enum, default_value = "recharge")]
    mode: GenMode,
    #[arg(long, default_value_t = 5)]
    vertices: usize,
    #[arg(long, default_value_t = 3)]
    max_weight: u64,
    /// Probability (percent) of each extra edge.
    #[arg(long, default_value_t = 40)]
    extra_edge_pct: u32,
    /// Probability (percent) of an R label per edge (recharge mode).
    #[arg(long, default_value_t = 25)]
    recharge_pct: u32,
    /// Share (percent) of vertices owned by Player 1.
    #[arg(long, default_value_t = 40)]
    p1_pct: u32,
    /// Budget ceiling (countdown mode).
    #[arg(long, default_value_t = 12)]
    max_budget: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvalLassoArgs {
    #[command(flatten)]
    objective: ObjectiveFlags,
    /// Lasso text: `prefix: v0 v2 ; cycle: v0 v1`.
    #[arg(long)]
    lasso: String,
    arena: PathBuf,
}

type CliError = anyhow::Error;

fn parse_rational(s: &str) -> Result<Rational, String> {
    let parse_int = |t: &str| t.trim().parse::<i128>().map_err(|e| e.to_string());
    match s.split_once('/') {
        Some((p, q)) => {
            let q = parse_int(q)?;
            if q <= 0 {
                return Err("denominator must be positive".into());
            }
            Ok(Rational::new(parse_int(p)?, q))
        }
        None => Ok(Rational::new(parse_int(s)?, 1)),
    }
}

fn load_arena(path: &Path) -> Result<WeightedArena, CliError> {
    let text = fs::read_to_string(path).map_err(|e| anyhow!("{}: {}", path.display(), e))?;
    Ok(parse_arena(&text).map_err(|e| anyhow!("{}: {}", path.display(), e))?)
}

/// Temp-file-and-rename write; partial output never lands on `path`.
fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.persist(path)?;
    Ok(())
}

fn emit(path: &Option<PathBuf>, contents: &str) -> Result<(), CliError> {
    match path {
        Some(p) => write_atomic(p, contents),
        None => {
            print!("{}", contents);
            Ok(())
        }
    }
}

fn build_objective(a: &WeightedArena, f: &ObjectiveFlags) -> Result<Objective, CliError> {
    let cap = || f.cap.ok_or_else(|| anyhow!("this objective needs --cap"));
    let t = || f.threshold.ok_or_else(|| anyhow!("this objective needs --threshold"));
    Ok(match f.objective {
        ObjectiveName::EnergyL => Objective::EnergyL,
        ObjectiveName::EnergyLu => Objective::EnergyLU { cap: cap()? },
        ObjectiveName::AvgEnergyL => Objective::AvgEnergyL { t: t()? },
        ObjectiveName::AvgEnergyLu => Objective::AvgEnergyLU { cap: cap()?, t: t()? },
        ObjectiveName::Recharge => Objective::Recharge { cap: cap()? },
        ObjectiveName::AvgRecharge => Objective::AvgRecharge { cap: cap()?, t: t()? },
        ObjectiveName::MeanPayoff => Objective::MeanPayoff { t: t()? },
        ObjectiveName::Parity3 => {
            let path =
                f.color_file.as_ref().ok_or_else(|| anyhow!("parity3 needs --color-file"))?;
            let text = fs::read_to_string(path)
                .map_err(|e| anyhow!("{}: {}", path.display(), e))?;
            Objective::Parity(Coloring::parse(a, &text)?)
        }
        ObjectiveName::Countdown => {
            Objective::Countdown { budget: f.budget.ok_or_else(|| anyhow!("countdown needs --budget"))? }
        }
    })
}

fn cmd_solve(args: &SolveArgs) -> Result<u8, CliError> {
    let a = load_arena(&args.arena)?;
    let objective = build_objective(&a, &args.objective)?;
    let res: SolveResult = match &objective {
        Objective::EnergyL => solve_energy_l(&a)?,
        Objective::EnergyLU { cap } => solve_energy_lu(&a, *cap)?,
        Objective::AvgEnergyL { .. } => {
            return Err(anyhow!(
                "avg-energy-l has no direct solver; use exists-threshold or avg-energy-lu"
            ))
        }
        Objective::AvgEnergyLU { cap, t } => solve_avg_energy_lu(&a, *cap, *t)?,
        Objective::Recharge { cap } => solve_recharge(&a, *cap)?,
        Objective::AvgRecharge { cap, t } => solve_avg_recharge(&a, *cap, *t)?,
        Objective::MeanPayoff { t } => {
            let res = solve_mean_payoff_threshold(&a, *t)?;
            let value = energygames::solvers::mean_payoff_value(&a, a.initial())?;
            println!("value={}/{}", value.numer(), value.denom());
            res
        }
        Objective::Parity(coloring) => solve_parity3(&a, coloring)?,
        Objective::Countdown { budget } => solve_countdown(&a, CountdownBudget(*budget))?,
    };
    println!("winner={}", player_name(res.winner));
    if let Some(path) = &args.emit_strategy {
        let sigma = res.strategy.as_ref().ok_or_else(|| anyhow!("no strategy available"))?;
        write_atomic(path, &serialize_strategy(&a, sigma))?;
    }
    if let Some(path) = &args.emit_certificate {
        write_atomic(path, &res.certificate.render())?;
    }
    Ok(if res.winner == Player::P0 { 0 } else { 1 })
}

fn player_name(p: Player) -> &'static str {
    match p {
        Player::P0 => "Player0",
        Player::P1 => "Player1",
    }
}

fn cmd_exists_cap(args: &ExistsCapArgs) -> Result<u8, CliError> {
    let a = load_arena(&args.arena)?;
    match exists_cap_recharge(&a)? {
        ExistsCapResult::Yes { witness_cap, strategy } => {
            println!("result=YES cap={}", witness_cap);
            if let Some(path) = &args.emit_strategy {
                write_atomic(path, &serialize_strategy(&a, &strategy))?;
            }
            Ok(0)
        }
        ExistsCapResult::No => {
            println!("result=NO");
            Ok(1)
        }
    }
}

fn cmd_exists_cap_lu(args: &ExistsCapLuArgs) -> Result<u8, CliError> {
    let a = load_arena(&args.arena)?;
    let cap_max = args.cap_max.unwrap_or_else(|| default_cap_max(&a));
    match exists_cap_energy_lu(&a, cap_max)? {
        CapSearchResult::Yes { min_cap, strategy } => {
            println!("result=YES cap={}", min_cap);
            if let Some(path) = &args.emit_strategy {
                write_atomic(path, &serialize_strategy(&a, &strategy))?;
            }
            Ok(0)
        }
        CapSearchResult::NoUpTo(bound) => {
            println!("result=NO-UP-TO bound={}", bound);
            Ok(1)
        }
    }
}

fn cmd_exists_threshold(args: &ExistsCapLuArgs) -> Result<u8, CliError> {
    let a = load_arena(&args.arena)?;
    let cap_max = args.cap_max.unwrap_or_else(|| default_cap_max(&a));
    match exists_threshold_avg_energy_l(&a, cap_max)? {
        ThresholdSearchResult::Yes { threshold_witness, min_cap, strategy } => {
            println!("result=YES threshold={} cap={}", threshold_witness, min_cap);
            if let Some(path) = &args.emit_strategy {
                write_atomic(path, &serialize_strategy(&a, &strategy))?;
            }
            Ok(0)
        }
        ThresholdSearchResult::NoUpTo(bound) => {
            println!("result=NO-UP-TO bound={}", bound);
            Ok(1)
        }
    }
}

fn cmd_verify(args: &VerifyArgs) -> Result<u8, CliError> {
    let a = load_arena(&args.arena)?;
    let objective = build_objective(&a, &args.objective)?;
    let text = fs::read_to_string(&args.strategy)
        .map_err(|e| anyhow!("{}: {}", args.strategy.display(), e))?;
    let sigma = parse_strategy(&a, &text)?;
    let verdict = verify_strategy(&a, &sigma, &objective)?;
    if let Some(value) = &verdict.worst_value {
        println!("worst={}", render_value(value));
    }
    if verdict.accepted {
        println!("verdict=ACCEPTED");
        Ok(0)
    } else {
        if let Some(w) = &verdict.witness {
            println!("witness={}", serialize_lasso(&a, w));
        }
        println!("verdict=REJECTED");
        Ok(1)
    }
}

fn render_value(v: &ObjectiveValue) -> String {
    match v {
        ObjectiveValue::Finite(r) => format!("{}/{}", r.numer(), r.denom()),
        ObjectiveValue::PlusInfinity => "INF".into(),
        ObjectiveValue::Violated { at, .. } => format!("VIOLATED at={}", at),
    }
}

fn csv_table<K: Display>(key: &str, rows: &[(K, ObjectiveValue)]) -> String {
    let mut out = format!("{},numerator,denominator,status\n", key);
    for (k, v) in rows {
        match v {
            ObjectiveValue::Finite(r) => {
                out.push_str(&format!("{},{},{},OK\n", k, r.numer(), r.denom()))
            }
            ObjectiveValue::PlusInfinity => out.push_str(&format!("{},,,INF\n", k)),
            ObjectiveValue::Violated { at, .. } => {
                out.push_str(&format!("{},,,VIOLATED:{}\n", k, at))
            }
        }
    }
    out
}

fn ascii_plot<K: Display>(rows: &[(K, ObjectiveValue)]) -> String {
    let finite: Vec<f64> = rows
        .iter()
        .filter_map(|(_, v)| match v {
            ObjectiveValue::Finite(r) => Some(*r.numer() as f64 / *r.denom() as f64),
            _ => None,
        })
        .collect();
    let max = finite.iter().cloned().fold(f64::MIN, f64::max).max(1e-9);
    let mut out = String::new();
    for (k, v) in rows {
        match v {
            ObjectiveValue::Finite(r) => {
                let x = *r.numer() as f64 / *r.denom() as f64;
                let bar = ((x / max) * 40.0).round().max(0.0) as usize;
                out.push_str(&format!(
                    "{:>6} {:>8} |{}\n",
                    k,
                    format!("{}/{}", r.numer(), r.denom()),
                    "#".repeat(bar)
                ));
            }
            _ => out.push_str(&format!("{:>6} {:>8} |\n", k, render_value(v))),
        }
    }
    out
}

/// Runs `point` over `keys` on a bounded pool, preserving input order.
fn parallel_points<K, E>(
    keys: Vec<K>,
    jobs: usize,
    point: impl Fn(&K) -> Result<ObjectiveValue, E> + Sync,
) -> Result<Vec<(K, ObjectiveValue)>, E>
where
    K: Copy + Display + Send + Sync,
    E: Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .expect("thread pool");
    use rayon::prelude::*;
    let values: Result<Vec<ObjectiveValue>, E> =
        pool.install(|| keys.par_iter().map(|k| point(k)).collect());
    Ok(keys.into_iter().zip(values?).collect())
}

fn cmd_sweep_cap(args: &SweepCapArgs) -> Result<u8, CliError> {
    let a = load_arena(&args.arena)?;
    if args.from > args.to {
        return Err(anyhow!("--from exceeds --to"));
    }
    let rows = parallel_points((args.from..=args.to).collect(), args.jobs, |&cap| {
        sweep_capacity(&a, cap, cap).map(|r| r[0].1)
    })?;
    emit(&args.out, &csv_table("cap", &rows))?;
    if args.ascii_plot {
        print!("{}", ascii_plot(&rows));
    }
    Ok(0)
}

fn cmd_sweep_memory(args: &SweepMemoryArgs) -> Result<u8, CliError> {
    let a = load_arena(&args.arena)?;
    if args.from > args.to || args.from == 0 {
        return Err(anyhow!("need 1 <= --from <= --to"));
    }
    let rows = parallel_points((args.from..=args.to).collect(), args.jobs, |&n| {
        sweep_memory(&a, args.cap, n, n).map(|r| r[0].1)
    })?;
    emit(&args.out, &csv_table("n", &rows))?;
    if args.ascii_plot {
        print!("{}", ascii_plot(&rows));
    }
    Ok(0)
}

fn cmd_reduce(args: &ReduceArgs) -> Result<u8, CliError> {
    let a = load_arena(&args.arena)?;
    let need = |o: Option<u64>, what: &str| o.ok_or_else(|| anyhow!("this kind needs {}", what));
    match args.kind {
        ReduceKind::AvgRechargeMp => {
            let cap = need(args.cap, "--cap")?;
            let t = args.threshold.ok_or_else(|| anyhow!("this kind needs --threshold"))?;
            let out = reduce_avg_recharge(&a, cap, t)?;
            emit(&args.out, &out.serialize(&a))?;
        }
        ReduceKind::ExistsCapParity => {
            let (tripled, coloring, back_map) = reduce_exists_cap_to_parity(&a)?;
            let colors = coloring.serialize(&tripled);
            let out = ReductionOutput {
                arena: tripled,
                back_map,
                objective_note: "three-color parity (from exists-cap recharge)".into(),
                mp_threshold: None,
            };
            emit(&args.out, &out.serialize(&a))?;
            match &args.colors {
                Some(p) => write_atomic(p, &colors)?,
                None => print!("{}", colors),
            }
        }
        ReduceKind::CountdownAvgRecharge => {
            let budget = need(args.budget, "--budget")?;
            let out = reduce_countdown_to_avg_recharge(&a, budget)?;
            emit(&args.out, &out.serialize(&a))?;
        }
        ReduceKind::Fig4 => {
            let budget = need(args.budget, "--budget")?;
            let gadget = build_fig4_gadget(&a, budget)?;
            emit(&args.out, &serialize_arena(&gadget))?;
        }
    }
    Ok(0)
}

fn cmd_gen(args: &GenArgs) -> Result<u8, CliError> {
    let text = match args.mode {
        GenMode::Countdown => {
            let (a, budget) = generate_countdown(args.seed, args.max_budget);
            println!("budget={}", budget);
            format!("# budget {}\n{}", budget, serialize_arena(&a))
        }
        mode => {
            let params = GenParams {
                vertices: args.vertices,
                extra_edge_pct: args.extra_edge_pct,
                max_weight: args.max_weight,
                recharge_pct: if matches!(mode, GenMode::Recharge) { args.recharge_pct } else { 0 },
                p1_pct: args.p1_pct,
                recharge_mode: matches!(mode, GenMode::Recharge),
            };
            serialize_arena(&generate_arena(&params, args.seed))
        }
    };
    emit(&args.out, &text)?;
    Ok(0)
}

fn cmd_eval_lasso(args: &EvalLassoArgs) -> Result<u8, CliError> {
    let a = load_arena(&args.arena)?;
    let lasso = parse_lasso(&a, &args.lasso)?;
    let value = match args.objective.objective {
        ObjectiveName::AvgEnergyL | ObjectiveName::AvgEnergyLu => {
            avg_energy_of_lasso(&a, &lasso, AvgEnergyMode::Plain)?
        }
        ObjectiveName::AvgRecharge | ObjectiveName::Recharge => {
            let cap = args.objective.cap.ok_or_else(|| anyhow!("recharge evaluation needs --cap"))?;
            avg_energy_of_lasso(&a, &lasso, AvgEnergyMode::RechargeWith(cap))?
        }
        ObjectiveName::MeanPayoff => ObjectiveValue::Finite(mean_payoff_of_lasso(&a, &lasso)?),
        _ => return Err(anyhow!("eval-lasso supports average and mean-payoff objectives")),
    };
    println!("value={}", render_value(&value));
    Ok(0)
}

fn run() -> Result<u8, CliError> {
    let cli = Cli::parse();
    match &cli.command {
        Command::Solve(args) => cmd_solve(args),
        Command::ExistsCap(args) => cmd_exists_cap(args),
        Command::ExistsCapLu(args) => cmd_exists_cap_lu(args),
        Command::ExistsThreshold(args) => cmd_exists_threshold(args),
        Command::VerifyStrategy(args) => cmd_verify(args),
        Command::SweepCap(args) => cmd_sweep_cap(args),
        Command::SweepMemory(args) => cmd_sweep_memory(args),
        Command::Reduce(args) => cmd_reduce(args),
        Command::Gen(args) => cmd_gen(args),
        Command::EvalLasso(args) => cmd_eval_lasso(args),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}", e);
            ExitCode::from(2)
        }
    }
}
