use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qsched_core::harness::{
    parse_params, parse_suite, ratio_report, read_file, run_solver, run_sweep, GenFlags, HarnessError, OptSource,
    RatioRequest, Solver,
};
use qsched_core::io::{instance_to_json, log_to_csv, parse_instance, parse_schedule};
use qsched_core::model::Instance;
use qsched_core::schedulers::Checks;
use qsched_core::verify::verify_schedule;

#[derive(Parser)]
#[command(name = "qsched", version, about = "Finite-queue packet scheduling simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build an instance from one of the generator families.
    Generate(GenerateArgs),
    /// Simulate one algorithm and write its transmission log.
    Run(RunArgs),
    /// Compare an algorithm's gain with an optimum.
    Ratio(RatioArgs),
    /// Check a schedule or log against an instance.
    Verify(VerifyArgs),
    /// Run every row of a suite file and print the result table.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct SeedArg {
    /// Master seed.
    #[arg(long, env = "QSCHED_SEED", default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct GenerateArgs {
    /// edf-nemesis | best-effort-lb | greedy-lb | random
    #[arg(long)]
    family: String,
    /// Buffer capacity.
    #[arg(long)]
    b: usize,
    #[arg(long)]
    eps: Option<String>,
    #[arg(long)]
    rounds: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    slack: Option<u64>,
    #[arg(long)]
    wmax: Option<u64>,
    #[arg(long)]
    horizon: Option<u64>,
    #[command(flatten)]
    seed: SeedArg,
    /// Instance file to write; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AlgorithmArgs {
    #[arg(long)]
    instance: PathBuf,
    /// me | rme | edf | greedy | offline-greedy | oracle
    #[arg(long)]
    algorithm: String,
    #[arg(long)]
    alpha: Option<String>,
    #[arg(long)]
    gamma: Option<String>,
    #[command(flatten)]
    seed: SeedArg,
    /// Run the invariant suite; any violation exits with status 1.
    #[arg(long)]
    check: bool,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: AlgorithmArgs,
    /// Where to write the transmission log (CSV).
    #[arg(long)]
    log: Option<PathBuf>,
}

#[derive(Args)]
struct RatioArgs {
    #[command(flatten)]
    common: AlgorithmArgs,
    /// oracle | reference | file:PATH
    #[arg(long, default_value = "oracle")]
    opt: String,
    /// RME trials.
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    /// Also write the report as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    instance: PathBuf,
    /// Schedule as CSV (`step,packet_id[,weight]`) or a JSON list of
    /// `{step, packet}`.
    #[arg(long, visible_alias = "schedule")]
    log: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    /// JSON list of suite rows.
    suite: PathBuf,
    #[command(flatten)]
    seed: SeedArg,
    #[arg(long)]
    check: bool,
    /// Table file to write; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn write_file(path: &Path, contents: &str) -> Result<(), HarnessError> {
    std::fs::write(path, contents).map_err(|source| HarnessError::Io { path: path.display().to_string(), source })
}

fn load_instance(path: &Path) -> Result<Instance, HarnessError> {
    Ok(parse_instance(&read_file(&path.to_string_lossy())?)?)
}

fn instance_id(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| path.display().to_string())
}

fn checks(on: bool) -> Checks {
    if on {
        Checks::Collect
    } else {
        Checks::Off
    }
}

fn generate(args: GenerateArgs) -> Result<ExitCode, HarnessError> {
    let flags = GenFlags {
        family: args.family,
        b: args.b,
        eps: args.eps,
        rounds: args.rounds,
        n: args.n,
        slack: args.slack,
        wmax: args.wmax,
        horizon: args.horizon,
        seed: Some(args.seed.seed),
    };
    let spec = flags.to_spec(args.seed.seed)?;
    let instance = spec.generate().map_err(|e| HarnessError::Usage(e.to_string()))?;
    let json = instance_to_json(&instance);
    let reference = instance.reference_opt_weight.map_or_else(|| "none".to_string(), |w| w.to_string());
    match &args.out {
        Some(path) => {
            write_file(path, &json)?;
            println!("packets: {}", instance.len());
            println!("reference weight: {reference}");
        }
        None => {
            print!("{json}");
            eprintln!("packets: {}", instance.len());
            eprintln!("reference weight: {reference}");
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn run(args: RunArgs) -> Result<ExitCode, HarnessError> {
    let c = &args.common;
    let instance = load_instance(&c.instance)?;
    let solver: Solver = c.algorithm.parse().map_err(HarnessError::Usage)?;
    let params = parse_params(solver, c.alpha.as_deref(), c.gamma.as_deref())?;
    let out = run_solver(&instance, solver, &params, c.seed.seed, checks(c.check))?;
    if let Some(path) = &args.log {
        write_file(path, &log_to_csv(&out.log))?;
    }
    println!("algorithm: {}", solver.name());
    println!("sent: {}", out.log.len());
    println!("dropped: {}", instance.len() - out.log.len());
    println!("total: {}", out.total_weight());
    if c.check {
        println!("checks: {}", out.report.checks);
        for v in &out.report.violations {
            eprintln!("{v}");
        }
        if !out.report.is_clean() {
            eprintln!("{} invariant violation(s)", out.report.violations.len());
            return Ok(ExitCode::from(1));
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn ratio(args: RatioArgs) -> Result<ExitCode, HarnessError> {
    let c = &args.common;
    let instance = load_instance(&c.instance)?;
    let solver: Solver = c.algorithm.parse().map_err(HarnessError::Usage)?;
    let params = parse_params(solver, c.alpha.as_deref(), c.gamma.as_deref())?;
    let opt: OptSource = args.opt.parse().map_err(HarnessError::Usage)?;
    let report = ratio_report(&RatioRequest {
        instance: &instance,
        instance_id: instance_id(&c.instance),
        solver,
        params,
        opt,
        trials: args.trials,
        seed: c.seed.seed,
        checks: if c.check { Checks::Enforce } else { Checks::Off },
    })?;
    print!("{}", report.render());
    if let Some(path) = &args.out {
        let json = serde_json::to_string_pretty(&report.to_json()).expect("json value");
        write_file(path, &(json + "\n"))?;
    }
    Ok(ExitCode::SUCCESS)
}

fn verify(args: VerifyArgs) -> Result<ExitCode, HarnessError> {
    let instance = load_instance(&args.instance)?;
    let text = read_file(&args.log.to_string_lossy())?;
    let schedule =
        parse_schedule(&text).map_err(|e| HarnessError::Usage(format!("{}: {e}", args.log.display())))?;
    let verdict = verify_schedule(&instance, &schedule).map_err(|e| HarnessError::Usage(e.to_string()))?;
    if verdict.is_ok() {
        println!("ok: {} sends, weight {}", schedule.len(), schedule.total_weight(&instance));
        Ok(ExitCode::SUCCESS)
    } else {
        for v in &verdict.violations {
            println!("{v}");
        }
        Ok(ExitCode::from(1))
    }
}

fn sweep(args: SweepArgs) -> Result<ExitCode, HarnessError> {
    let rows = parse_suite(&read_file(&args.suite.to_string_lossy())?)?;
    let table = run_sweep(&rows, args.seed.seed, if args.check { Checks::Enforce } else { Checks::Off })?;
    match &args.out {
        Some(path) => write_file(path, &table)?,
        None => print!("{table}"),
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate(a) => generate(a),
        Command::Run(a) => run(a),
        Command::Ratio(a) => ratio(a),
        Command::Verify(a) => verify(a),
        Command::Sweep(a) => sweep(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
