//! Ratio measurement and batch sweeps shared by the CLI and the FFI layer.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use num_rational::Ratio;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::Deserialize;
use thiserror::Error;

use crate::error::{BudgetExceeded, InstanceError, ParamError};
use crate::golden::GoldenNumber;
use crate::instances::{Family, GeneratorSpec, RandomParams};
use crate::io::parse_schedule;
use crate::model::{total_weight, Instance, TransmissionLog};
use crate::offline::{greedy_opt, oracle_opt};
use crate::schedulers::{
    simulate, Algorithm, Checks, DropRecord, InvariantReport, InvariantViolation, RandomSource, SchedulerParams,
};
use crate::verify::verify_schedule;
use crate::weight::{exact_ratio, Weight};

pub const SWEEP_HEADER: &str = "family,b,eps,algorithm,alg_weight,opt_weight,ratio,paper_bound";

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error(transparent)]
    Budget(#[from] BudgetExceeded),
    #[error("instance: {0}")]
    Instance(#[from] InstanceError),
    #[error("instance carries no reference_opt_weight")]
    MissingReference,
    #[error("invariant violation: {0}")]
    Invariant(#[from] InvariantViolation),
    #[error("{0}")]
    Property(String),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("suite row {index}: {source}")]
    Row { index: usize, source: Box<HarnessError> },
}

impl HarnessError {
    /// 1 for property or invariant failures, 2 for usage and input errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Invariant(_) | HarnessError::Property(_) | HarnessError::Row { .. } => 1,
            _ => 2,
        }
    }
}

fn usage(msg: impl Into<String>) -> HarnessError {
    HarnessError::Usage(msg.into())
}

pub fn read_file(path: &str) -> Result<String, HarnessError> {
    std::fs::read_to_string(path).map_err(|source| HarnessError::Io { path: path.to_string(), source })
}

/// Anything that turns an instance into a send plan.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Solver {
    Online(Algorithm),
    OfflineGreedy,
    Oracle,
}

impl Solver {
    pub fn name(&self) -> &'static str {
        match self {
            Solver::Online(a) => a.name(),
            Solver::OfflineGreedy => "offline-greedy",
            Solver::Oracle => "oracle",
        }
    }
}

impl FromStr for Solver {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "offline-greedy" => Ok(Solver::OfflineGreedy),
            "oracle" => Ok(Solver::Oracle),
            other => other
                .parse::<Algorithm>()
                .map(Solver::Online)
                .map_err(|_| format!("unknown algorithm {s:?} (me|rme|edf|greedy|offline-greedy|oracle)")),
        }
    }
}

pub fn params_label(solver: Solver, params: &SchedulerParams) -> String {
    match solver {
        Solver::Online(Algorithm::Me) => format!("alpha={}", params.alpha),
        Solver::Online(Algorithm::Rme) => format!("alpha={} gamma={}", params.alpha, params.gamma),
        _ => String::new(),
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub log: TransmissionLog,
    pub drops: Vec<DropRecord>,
    pub report: InvariantReport,
}

impl RunOutput {
    pub fn total_weight(&self) -> Weight {
        total_weight(&self.log)
    }
}

pub fn run_solver(
    instance: &Instance,
    solver: Solver,
    params: &SchedulerParams,
    seed: u64,
    checks: Checks,
) -> Result<RunOutput, HarnessError> {
    params.validate()?;
    match solver {
        Solver::Online(a) => {
            let out = simulate(instance, a, params, &mut RandomSource::new(seed), checks)?;
            Ok(RunOutput { log: out.log, drops: out.drops, report: out.report })
        }
        Solver::OfflineGreedy | Solver::Oracle => {
            let sol = if solver == Solver::Oracle { oracle_opt(instance)? } else { greedy_opt(instance) };
            let log = TransmissionLog::from_schedule(&sol.schedule, instance);
            Ok(RunOutput { log, drops: Vec::new(), report: InvariantReport::default() })
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OptSource {
    Oracle,
    Reference,
    /// A file holding either a weight or a schedule for the instance.
    File(PathBuf),
}

impl OptSource {
    pub fn label(&self) -> String {
        match self {
            OptSource::Oracle => "oracle".into(),
            OptSource::Reference => "reference".into(),
            OptSource::File(p) => format!("file:{}", p.display()),
        }
    }
}

impl FromStr for OptSource {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "oracle" => Ok(OptSource::Oracle),
            "reference" => Ok(OptSource::Reference),
            other => match other.strip_prefix("file:") {
                Some(path) if !path.is_empty() => Ok(OptSource::File(PathBuf::from(path))),
                _ => Err(format!("unknown opt source {s:?} (oracle|reference|file:PATH)")),
            },
        }
    }
}

pub fn resolve_opt(instance: &Instance, source: &OptSource) -> Result<Weight, HarnessError> {
    match source {
        OptSource::Oracle => Ok(oracle_opt(instance)?.weight),
        OptSource::Reference => instance.reference_opt_weight.ok_or(HarnessError::MissingReference),
        OptSource::File(path) => {
            let text = read_file(&path.to_string_lossy())?;
            if let Ok(w) = text.trim().parse::<Weight>() {
                return Ok(w);
            }
            let schedule = parse_schedule(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?;
            let verdict = verify_schedule(instance, &schedule).map_err(|e| usage(e.to_string()))?;
            if !verdict.is_ok() {
                return Err(usage(format!("{}: schedule does not verify: {verdict}", path.display())));
            }
            Ok(schedule.total_weight(instance))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialStats {
    pub trials: usize,
    /// Exact mean of the per-trial totals.
    pub mean: Weight,
    pub min: Weight,
    pub max: Weight,
    pub stddev: f64,
}

impl TrialStats {
    pub fn from_weights(weights: &[Weight]) -> Option<TrialStats> {
        let trials = weights.len();
        if trials == 0 {
            return None;
        }
        let sum: Weight = weights.iter().sum();
        let mean = sum.checked_div(&Weight::from_integer(trials as u64))?;
        let m = mean.to_f64();
        let var = weights.iter().map(|w| (w.to_f64() - m).powi(2)).sum::<f64>() / trials as f64;
        Some(TrialStats {
            trials,
            mean,
            min: *weights.iter().min()?,
            max: *weights.iter().max()?,
            stddev: var.sqrt(),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum AlgWeight {
    Exact(Weight),
    Trials(TrialStats),
}

impl AlgWeight {
    /// The deterministic total, or the exact trial mean.
    pub fn value(&self) -> Weight {
        match self {
            AlgWeight::Exact(w) => *w,
            AlgWeight::Trials(s) => s.mean,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RatioReport {
    pub instance_id: String,
    pub algorithm: String,
    pub params: String,
    pub opt_source: String,
    pub opt_weight: Weight,
    pub alg: AlgWeight,
    /// `opt / alg`; `None` when the algorithm gained nothing but opt did.
    pub ratio: Option<Ratio<i128>>,
}

fn ratio_text(r: &Option<Ratio<i128>>) -> String {
    match r {
        None => "inf".into(),
        Some(r) if *r.denom() == 1 => r.numer().to_string(),
        Some(r) => format!("{}/{}", r.numer(), r.denom()),
    }
}

pub fn ratio_decimal(r: &Option<Ratio<i128>>) -> String {
    match r {
        None => "inf".into(),
        Some(r) => format!("{:.6}", r.to_f64().unwrap_or(f64::NAN)),
    }
}

impl RatioReport {
    pub fn ratio_f64(&self) -> f64 {
        self.ratio.as_ref().and_then(|r| r.to_f64()).unwrap_or(f64::INFINITY)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "instance: {}", self.instance_id);
        let _ = writeln!(out, "algorithm: {}", self.algorithm);
        if !self.params.is_empty() {
            let _ = writeln!(out, "params: {}", self.params);
        }
        let _ = writeln!(out, "opt ({}): {}", self.opt_source, self.opt_weight);
        match &self.alg {
            AlgWeight::Exact(w) => {
                let _ = writeln!(out, "alg: {w}");
                let _ = writeln!(out, "ratio: {} (~{})", ratio_text(&self.ratio), ratio_decimal(&self.ratio));
            }
            AlgWeight::Trials(s) => {
                let _ = writeln!(
                    out,
                    "alg: mean {:.6} over {} trials (min {}, max {}, stddev {:.6})",
                    s.mean.to_f64(),
                    s.trials,
                    s.min,
                    s.max,
                    s.stddev
                );
                let _ = writeln!(out, "ratio: ~{} (opt / mean)", ratio_decimal(&self.ratio));
            }
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        let alg = match &self.alg {
            AlgWeight::Exact(w) => serde_json::json!({ "weight": w.to_string() }),
            AlgWeight::Trials(s) => serde_json::json!({
                "trials": s.trials,
                "mean": format!("{:.6}", s.mean.to_f64()),
                "min": s.min.to_string(),
                "max": s.max.to_string(),
                "stddev": format!("{:.6}", s.stddev),
            }),
        };
        serde_json::json!({
            "instance": self.instance_id,
            "algorithm": self.algorithm,
            "params": self.params,
            "opt_source": self.opt_source,
            "opt_weight": self.opt_weight.to_string(),
            "alg": alg,
            "ratio": ratio_text(&self.ratio),
            "ratio_decimal": ratio_decimal(&self.ratio),
        })
    }
}

/// Totals of `trials` independent RME runs; trial `i` draws from stream `i`
/// of `seed`, and results come back in trial order.
pub fn rme_trial_weights(
    instance: &Instance,
    params: &SchedulerParams,
    trials: usize,
    seed: u64,
    checks: Checks,
) -> Result<Vec<Weight>, InvariantViolation> {
    (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = RandomSource::for_trial(seed, t as u64);
            simulate(instance, Algorithm::Rme, params, &mut rng, checks).map(|o| o.total_weight())
        })
        .collect()
}

pub struct RatioRequest<'a> {
    pub instance: &'a Instance,
    pub instance_id: String,
    pub solver: Solver,
    pub params: SchedulerParams,
    pub opt: OptSource,
    pub trials: usize,
    pub seed: u64,
    pub checks: Checks,
}

pub fn ratio_report(req: &RatioRequest<'_>) -> Result<RatioReport, HarnessError> {
    req.params.validate()?;
    let opt_weight = resolve_opt(req.instance, &req.opt)?;
    let alg = if req.solver == Solver::Online(Algorithm::Rme) {
        if req.trials == 0 {
            return Err(usage("--trials must be at least 1"));
        }
        let weights = rme_trial_weights(req.instance, &req.params, req.trials, req.seed, req.checks)?;
        AlgWeight::Trials(TrialStats::from_weights(&weights).expect("non-empty"))
    } else {
        AlgWeight::Exact(run_solver(req.instance, req.solver, &req.params, req.seed, req.checks)?.total_weight())
    };
    let value = alg.value();
    if req.opt == OptSource::Oracle && value > opt_weight {
        return Err(HarnessError::Property(format!(
            "{} gained {value}, more than the oracle optimum {opt_weight}",
            req.solver.name()
        )));
    }
    let ratio = if value.is_zero() && opt_weight.is_zero() {
        Some(Ratio::from_integer(1))
    } else {
        exact_ratio(opt_weight, value)
    };
    Ok(RatioReport {
        instance_id: req.instance_id.clone(),
        algorithm: req.solver.name().to_string(),
        params: params_label(req.solver, &req.params),
        opt_source: req.opt.label(),
        opt_weight,
        alg,
        ratio,
    })
}

/// Generator flags as they appear on the command line or in a suite row.
#[derive(Debug, Clone, Default, PartialEq, Eq, Deserialize)]
pub struct GenFlags {
    pub family: String,
    pub b: usize,
    #[serde(default)]
    pub eps: Option<String>,
    #[serde(default)]
    pub rounds: Option<usize>,
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default)]
    pub slack: Option<u64>,
    #[serde(default)]
    pub wmax: Option<u64>,
    #[serde(default)]
    pub horizon: Option<u64>,
    #[serde(default)]
    pub seed: Option<u64>,
}

impl GenFlags {
    /// Defaults: edf-nemesis uses `rounds = b` and `eps = 1/rounds`;
    /// best-effort-lb uses `eps = 1/b`; greedy-lb needs an explicit eps;
    /// random uses `n = 10`, `slack = 4`, `wmax = 10`, `horizon = n`.
    pub fn to_spec(&self, default_seed: u64) -> Result<GeneratorSpec, HarnessError> {
        let family: Family = self.family.parse().map_err(usage)?;
        let eps = match &self.eps {
            Some(s) => Some(s.parse::<Weight>().map_err(|e| usage(format!("--eps: {e}")))?),
            None => None,
        };
        let inverse = |k: usize| Weight::new(1, k.max(1) as i128).expect("positive");
        Ok(match family {
            Family::EdfNemesis => {
                let rounds = self.rounds.unwrap_or(self.b);
                GeneratorSpec::EdfNemesis { b: self.b, rounds, eps: eps.unwrap_or_else(|| inverse(rounds)) }
            }
            Family::BestEffortLb => GeneratorSpec::BestEffortLb { b: self.b, eps: eps.unwrap_or_else(|| inverse(self.b)) },
            Family::GreedyLb => GeneratorSpec::GreedyLb {
                b: self.b,
                eps: eps.ok_or_else(|| usage("greedy-lb needs --eps"))?,
            },
            Family::Random => {
                let n = self.n.unwrap_or(10);
                GeneratorSpec::Random(RandomParams {
                    n,
                    capacity: self.b,
                    horizon: self.horizon.unwrap_or(n.max(1) as u64),
                    max_slack: self.slack.unwrap_or(4),
                    max_weight: self.wmax.unwrap_or(10),
                    seed: self.seed.unwrap_or(default_seed),
                })
            }
        })
    }
}

#[derive(Debug, Clone, Deserialize)]
pub struct SuiteRow {
    #[serde(flatten)]
    pub generator: GenFlags,
    pub algorithm: String,
    #[serde(default)]
    pub alpha: Option<String>,
    #[serde(default)]
    pub gamma: Option<String>,
    #[serde(default)]
    pub trials: Option<usize>,
    /// `reference`, `oracle`, `offline-greedy`, or absent for the first of
    /// those that applies.
    #[serde(default)]
    pub opt: Option<String>,
}

pub fn parse_suite(text: &str) -> Result<Vec<SuiteRow>, HarnessError> {
    serde_json::from_str(text).map_err(|e| usage(format!("suite: {e}")))
}

pub fn parse_params(solver: Solver, alpha: Option<&str>, gamma: Option<&str>) -> Result<SchedulerParams, HarnessError> {
    let mut params = match solver {
        Solver::Online(a) => SchedulerParams::default_for(a),
        _ => SchedulerParams::me_default(),
    };
    if let Some(a) = alpha {
        params.alpha = a.parse::<GoldenNumber>().map_err(|e| usage(format!("--alpha: {e}")))?;
    }
    if let Some(g) = gamma {
        params.gamma = g.parse::<GoldenNumber>().map_err(|e| usage(format!("--gamma: {e}")))?;
    }
    params.validate()?;
    Ok(params)
}

fn proven_bound(solver: Solver) -> &'static str {
    match solver {
        Solver::Online(Algorithm::Me) => "3",
        Solver::Online(Algorithm::Rme) => "2.618034",
        _ => "",
    }
}

fn sweep_row(row: &SuiteRow, index: usize, master_seed: u64, checks: Checks) -> Result<String, HarnessError> {
    use crate::schedulers::BetaSource;
    let row_seed = RandomSource::for_trial(master_seed, index as u64).next_bits();
    let spec = row.generator.to_spec(row_seed)?;
    let instance = spec.generate().map_err(|e| usage(e.to_string()))?;
    let solver: Solver = row.algorithm.parse().map_err(usage)?;
    let params = parse_params(solver, row.alpha.as_deref(), row.gamma.as_deref())?;
    let opt = match row.opt.as_deref() {
        Some("offline-greedy") => greedy_opt(&instance).weight,
        Some(s) => resolve_opt(&instance, &s.parse::<OptSource>().map_err(usage)?)?,
        None if instance.reference_opt_weight.is_some() => resolve_opt(&instance, &OptSource::Reference)?,
        None if instance.len() <= crate::offline::ORACLE_LIMIT => resolve_opt(&instance, &OptSource::Oracle)?,
        None => greedy_opt(&instance).weight,
    };
    // Report against the opt resolved above by passing it as the reference.
    let mut instance = instance;
    instance.reference_opt_weight = Some(opt);
    let report = ratio_report(&RatioRequest {
        instance: &instance,
        instance_id: spec.family().name().to_string(),
        solver,
        params,
        opt: OptSource::Reference,
        trials: row.trials.unwrap_or(1000),
        seed: row_seed,
        checks,
    })?;
    let alg_weight = match &report.alg {
        AlgWeight::Exact(w) => w.to_string(),
        AlgWeight::Trials(s) => format!("{:.6}", s.mean.to_f64()),
    };
    let eps = instance.meta.get("eps").cloned().unwrap_or_default();
    Ok(format!(
        "{},{},{},{},{},{},{},{}",
        spec.family().name(),
        instance.capacity(),
        eps,
        solver.name(),
        alg_weight,
        report.opt_weight,
        ratio_decimal(&report.ratio),
        proven_bound(solver)
    ))
}

/// Runs every suite row and returns the comma-separated table. Row seeds
/// derive from `master_seed` and the row index.
pub fn run_sweep(rows: &[SuiteRow], master_seed: u64, checks: Checks) -> Result<String, HarnessError> {
    let mut out = String::new();
    out.push_str(SWEEP_HEADER);
    out.push('\n');
    for (index, row) in rows.iter().enumerate() {
        let line = sweep_row(row, index, master_seed, checks)
            .map_err(|e| HarnessError::Row { index, source: Box::new(e) })?;
        out.push_str(&line);
        out.push('\n');
    }
    Ok(out)
}
