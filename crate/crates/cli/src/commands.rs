use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use fmsm::analysis::{
    brute_force_opt, excess_ratio, min_inf_norm_auto, min_inf_norm_lp, NormReport, Optimum, Summary,
};
use fmsm::continuous::ContinuousConfig;
use fmsm::instance::{
    feasibility_check, gen_integrality_gap, gen_random, gen_welfare, Instance, RandomParams,
};
use fmsm::seed::derive_seed;
use fmsm::solvers::{
    calibrate, two_pass_monotone, two_pass_nonmonotone, uniform_nonmonotone, Calibration,
    CalibrationPlan, CalibrationSetting, Relaxation, SolveReport, SolverName, SubSolver,
};
use fmsm::{FmsmError, Result as CoreResult};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{CliError, CliResult};
use crate::{BenchArgs, GenFamily, InstanceArgs, Params, SolveArgs, SubKind};

/// Largest instance the `bruteforce` command and automatic optima accept.
pub const CLI_BRUTE_FORCE_LIMIT: usize = 16;

fn read_instance(path: &Path) -> CliResult<Instance> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    Ok(Instance::from_json(&text)?)
}

fn write_json<T: Serialize>(value: &T, out: Option<&Path>) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value).map_err(FmsmError::from)?;
    write_text(&text, out)
}

fn write_text(text: &str, out: Option<&Path>) -> CliResult<()> {
    match out {
        Some(path) => std::fs::write(path, format!("{text}\n")).map_err(|e| CliError::io(path, e)),
        None => match writeln!(std::io::stdout().lock(), "{text}") {
            Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
                Err(CliError::io("<stdout>", e))
            }
            _ => Ok(()),
        },
    }
}

pub fn gen(family: GenFamily) -> CliResult<()> {
    let (inst, out) = match family {
        GenFamily::Random {
            n,
            colors,
            matroid,
            objective,
            seed,
            out,
        } => (
            gen_random(RandomParams::new(n, colors, matroid, objective), seed)?,
            out,
        ),
        GenFamily::Gap { t, s, out } => (gen_integrality_gap(t, s)?, out),
        GenFamily::Welfare {
            agents,
            items,
            colors,
            seed,
            out,
        } => (gen_welfare(agents, items, colors, seed)?, out),
    };
    write_text(&inst.to_json(), out.as_deref())
}

#[derive(Debug, Serialize)]
struct AnalyzeReport {
    n: usize,
    colors: usize,
    lower: Vec<usize>,
    upper: Vec<usize>,
    feasible: bool,
    monotone: bool,
    decomposability: String,
    excess_ratio: f64,
    norms: NormReport,
    /// LP values for the closed-form case, as a cross-check.
    #[serde(skip_serializing_if = "Option::is_none")]
    lp_norms: Option<NormReport>,
}

pub fn analyze(args: InstanceArgs) -> CliResult<()> {
    let inst = read_instance(&args.instance)?;
    let feasible = feasibility_check(&inst)?;
    if !feasible {
        return Err(FmsmError::Infeasible("instance has no feasible set".into()).into());
    }
    let norms = min_inf_norm_auto(&inst)?;
    let lp_norms = if inst.uniform_rank().is_some() {
        Some(min_inf_norm_lp(&inst)?)
    } else {
        None
    };
    let report = AnalyzeReport {
        n: inst.n(),
        colors: inst.num_colors(),
        lower: inst.lower().to_vec(),
        upper: inst.upper().to_vec(),
        feasible,
        monotone: inst.objective().is_monotone(),
        decomposability: format!("{:?}", inst.decomposability()),
        excess_ratio: excess_ratio(&inst),
        norms,
        lp_norms,
    };
    write_json(&report, args.out.as_deref())
}

fn optimum(inst: &Instance) -> CliResult<Optimum> {
    if inst.n() > CLI_BRUTE_FORCE_LIMIT {
        return Err(FmsmError::Unsupported(format!(
            "brute force is limited to {CLI_BRUTE_FORCE_LIMIT} elements, instance has {}",
            inst.n()
        ))
        .into());
    }
    Ok(brute_force_opt(inst)?)
}

pub fn bruteforce(args: InstanceArgs) -> CliResult<()> {
    let inst = read_instance(&args.instance)?;
    write_json(&optimum(&inst)?, args.out.as_deref())
}

#[derive(Debug, Serialize)]
struct ValidateReport {
    valid: bool,
    feasible: bool,
    n: usize,
    colors: usize,
}

pub fn validate(args: InstanceArgs) -> CliResult<()> {
    let inst = read_instance(&args.instance)?;
    let feasible = feasibility_check(&inst)?;
    write_json(
        &ValidateReport {
            valid: true,
            feasible,
            n: inst.n(),
            colors: inst.num_colors(),
        },
        args.out.as_deref(),
    )?;
    if feasible {
        Ok(())
    } else {
        Err(FmsmError::Infeasible("instance has no feasible set".into()).into())
    }
}

/// A solver ready to run repeatedly on one instance.
enum Prepared {
    TwoPassMonotone(SubSolver),
    TwoPassNonmonotone(SubSolver, f64),
    Uniform(SubSolver),
    RelaxRound(Relaxation),
    Decomposable(Relaxation),
}

impl Prepared {
    fn run(&self, inst: &Instance, seed: u64) -> CoreResult<SolveReport> {
        match self {
            Prepared::TwoPassMonotone(sub) => two_pass_monotone(inst, sub),
            Prepared::TwoPassNonmonotone(sub, beta) => two_pass_nonmonotone(inst, *beta, sub, seed),
            Prepared::Uniform(sub) => uniform_nonmonotone(inst, sub, seed),
            Prepared::RelaxRound(relax) => relax.round_matroid(seed),
            Prepared::Decomposable(relax) => relax.round_intersection(seed),
        }
    }
}

fn sub_solver(params: &Params, nonmonotone: bool) -> SubSolver {
    match params.sub {
        SubKind::LocalSearch => {
            SubSolver::local_search(params.swap_size, params.epsilon, nonmonotone)
        }
        SubKind::RandomGreedy => SubSolver::random_greedy(),
    }
}

/// The sub-solver with its ratio, calibrated unless given.
fn measured(
    sub: SubSolver,
    params: &Params,
    setting: CalibrationSetting,
    monotone: bool,
) -> CoreResult<(SubSolver, Option<Calibration>)> {
    if let Some(a) = params.alpha_hat {
        let sub = sub.with_alpha(a);
        sub.check()?;
        return Ok((sub, None));
    }
    let calibration = calibrate(&sub, CalibrationPlan::new(setting, monotone))?;
    Ok((sub.with_alpha(calibration.alpha_hat), Some(calibration)))
}

fn prepare(
    solver: SolverName,
    inst: &Instance,
    params: &Params,
) -> CoreResult<(Prepared, Option<Calibration>)> {
    let relax_cfg = || -> CoreResult<ContinuousConfig> {
        Ok(
            ContinuousConfig::new(params.epsilon, derive_seed(params.seed, &[0]))?
                .with_samples(params.samples),
        )
    };
    Ok(match solver {
        SolverName::TwoPassMonotone => {
            if !inst.objective().is_monotone() {
                return Err(FmsmError::Config(
                    "two-pass-monotone needs a monotone objective".into(),
                ));
            }
            let (sub, cal) = measured(
                sub_solver(params, false),
                params,
                CalibrationSetting::TwoMatroid,
                true,
            )?;
            (Prepared::TwoPassMonotone(sub), cal)
        }
        SolverName::TwoPassNonmonotone => {
            if !(0.0..=0.5).contains(&params.beta) {
                return Err(FmsmError::Argument(format!(
                    "beta must lie in [0, 1/2], got {}",
                    params.beta
                )));
            }
            let (sub, cal) = measured(
                sub_solver(params, true),
                params,
                CalibrationSetting::TwoMatroid,
                false,
            )?;
            (Prepared::TwoPassNonmonotone(sub, params.beta), cal)
        }
        SolverName::UniformNonmonotone => {
            if inst.uniform_rank().is_none() {
                return Err(FmsmError::Config(
                    "uniform-nonmonotone needs a uniform matroid".into(),
                ));
            }
            let (sub, cal) = measured(
                sub_solver(params, true),
                params,
                CalibrationSetting::Partition,
                false,
            )?;
            (Prepared::Uniform(sub), cal)
        }
        SolverName::RelaxRound => (
            Prepared::RelaxRound(Relaxation::new(inst, &relax_cfg()?)?),
            None,
        ),
        SolverName::Decomposable => {
            let status = inst.decomposability();
            if !status.holds() {
                return Err(FmsmError::Config(format!(
                    "objective is not decomposable: {status:?}"
                )));
            }
            (
                Prepared::Decomposable(Relaxation::new(inst, &relax_cfg()?)?),
                None,
            )
        }
    })
}

#[derive(Debug, Clone, Serialize)]
struct ColorHistogram {
    color: usize,
    lower: usize,
    upper: usize,
    /// Number of runs per observed count.
    counts: BTreeMap<usize, u64>,
    below_lower: u64,
    above_upper: u64,
}

#[derive(Debug, Clone, Serialize)]
struct RunSummary {
    runs: u64,
    value: Summary,
    ratio: Option<Summary>,
    feasible_rate: f64,
    independent_rate: f64,
    within_floors_rate: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    concentration_rate: Option<f64>,
    violations: Vec<ColorHistogram>,
}

fn rate(reports: &[SolveReport], pred: impl Fn(&SolveReport) -> bool) -> f64 {
    if reports.is_empty() {
        return 0.0;
    }
    reports.iter().filter(|r| pred(r)).count() as f64 / reports.len() as f64
}

fn summarize(inst: &Instance, reports: &[SolveReport]) -> RunSummary {
    let values: Vec<f64> = reports.iter().map(|r| r.value).collect();
    let ratios: Vec<f64> = reports.iter().filter_map(|r| r.ratio).collect();
    let mut violations: Vec<ColorHistogram> = (0..inst.num_colors())
        .map(|c| ColorHistogram {
            color: c,
            lower: inst.lower()[c],
            upper: inst.upper()[c],
            counts: BTreeMap::new(),
            below_lower: 0,
            above_upper: 0,
        })
        .collect();
    for r in reports {
        for (h, a) in violations.iter_mut().zip(&r.colors) {
            *h.counts.entry(a.count).or_default() += 1;
            h.below_lower += u64::from(!a.meets_lower);
            h.above_upper += u64::from(!a.meets_upper);
        }
    }
    let with_concentration = reports.iter().any(|r| r.concentration.is_some());
    RunSummary {
        runs: reports.len() as u64,
        value: Summary::of(&values),
        ratio: (!ratios.is_empty()).then(|| Summary::of(&ratios)),
        feasible_rate: rate(reports, |r| r.feasible),
        independent_rate: rate(reports, |r| r.independent),
        within_floors_rate: rate(reports, SolveReport::within_floors),
        concentration_rate: with_concentration.then(|| {
            rate(reports, |r| {
                r.concentration.as_ref().is_some_and(|c| c.inside)
            })
        }),
        violations,
    }
}

#[derive(Debug, Serialize)]
struct SolveOutput {
    solver: SolverName,
    instance: String,
    n: usize,
    seed: u64,
    reps: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    calibration: Option<Calibration>,
    opt: Option<f64>,
    summary: RunSummary,
    runs: Vec<SolveReport>,
}

fn solve_instance(
    solver: SolverName,
    path: &Path,
    inst: &Instance,
    params: &Params,
) -> CliResult<SolveOutput> {
    if params.reps == 0 {
        return Err(CliError::Usage("--reps must be at least 1".into()));
    }
    let (prepared, calibration) = prepare(solver, inst, params)?;
    let opt = if params.no_opt || inst.n() > CLI_BRUTE_FORCE_LIMIT {
        None
    } else {
        Some(brute_force_opt(inst)?.value)
    };
    let runs: Vec<SolveReport> = (0..params.reps)
        .into_par_iter()
        .map(|rep| {
            let start = Instant::now();
            let mut report = prepared.run(inst, derive_seed(params.seed, &[1, rep]))?;
            if params.timing {
                report.wall_time_ms = Some(start.elapsed().as_secs_f64() * 1e3);
            }
            Ok(match opt {
                Some(o) => report.with_opt(o),
                None => report,
            })
        })
        .collect::<CoreResult<_>>()?;
    Ok(SolveOutput {
        solver,
        instance: path.display().to_string(),
        n: inst.n(),
        seed: params.seed,
        reps: params.reps,
        calibration,
        opt,
        summary: summarize(inst, &runs),
        runs,
    })
}

pub fn solve(args: SolveArgs) -> CliResult<()> {
    let inst = read_instance(&args.instance)?;
    let output = solve_instance(args.solver, &args.instance, &inst, &args.params)?;
    write_json(&output, args.out.as_deref())
}

#[derive(Debug, Serialize)]
struct BenchEntry {
    instance: String,
    solver: SolverName,
    #[serde(skip_serializing_if = "Option::is_none")]
    skipped: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    opt: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    summary: Option<RunSummary>,
}

#[derive(Debug, Serialize)]
struct SolverAggregate {
    solver: SolverName,
    instances: usize,
    skipped: usize,
    runs: u64,
    mean_ratio: Option<f64>,
    min_ratio: Option<f64>,
    feasible_rate: f64,
    /// Fraction of (run, colour) pairs below the lower bound.
    lower_violation_rate: f64,
    /// Fraction of (run, colour) pairs above the upper bound.
    upper_violation_rate: f64,
}

#[derive(Debug, Serialize)]
struct BenchOutput {
    seed: u64,
    reps: u64,
    total_runs: u64,
    solvers: Vec<SolverAggregate>,
    entries: Vec<BenchEntry>,
}

fn corpus_files(args: &BenchArgs) -> CliResult<Vec<PathBuf>> {
    let mut files = args.instance.clone();
    if let Some(dir) = &args.corpus {
        let mut found: Vec<PathBuf> = std::fs::read_dir(dir)
            .map_err(|e| CliError::io(dir, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect();
        found.sort();
        files.extend(found);
    }
    if files.is_empty() {
        return Err(CliError::Usage("bench needs --instance or --corpus".into()));
    }
    Ok(files)
}

fn aggregate(solver: SolverName, entries: &[BenchEntry]) -> SolverAggregate {
    let mine: Vec<&BenchEntry> = entries.iter().filter(|e| e.solver == solver).collect();
    let summaries: Vec<&RunSummary> = mine.iter().filter_map(|e| e.summary.as_ref()).collect();
    let runs: u64 = summaries.iter().map(|s| s.runs).sum();
    let ratio_weight: u64 = summaries
        .iter()
        .filter_map(|s| s.ratio.map(|r| r.count as u64))
        .sum();
    let ratio_sum: f64 = summaries
        .iter()
        .filter_map(|s| s.ratio.map(|r| r.mean * r.count as f64))
        .sum();
    let min_ratio = summaries
        .iter()
        .filter_map(|s| s.ratio.map(|r| r.min))
        .reduce(f64::min);
    let pairs: u64 = summaries
        .iter()
        .map(|s| s.runs * s.violations.len() as u64)
        .sum();
    let below: u64 = summaries
        .iter()
        .flat_map(|s| &s.violations)
        .map(|h| h.below_lower)
        .sum();
    let above: u64 = summaries
        .iter()
        .flat_map(|s| &s.violations)
        .map(|h| h.above_upper)
        .sum();
    let feasible: f64 = summaries
        .iter()
        .map(|s| s.feasible_rate * s.runs as f64)
        .sum();
    let frac = |num: f64, den: u64| if den == 0 { 0.0 } else { num / den as f64 };
    SolverAggregate {
        solver,
        instances: summaries.len(),
        skipped: mine.len() - summaries.len(),
        runs,
        mean_ratio: (ratio_weight > 0).then(|| ratio_sum / ratio_weight as f64),
        min_ratio,
        feasible_rate: frac(feasible, runs),
        lower_violation_rate: frac(below as f64, pairs),
        upper_violation_rate: frac(above as f64, pairs),
    }
}

pub fn bench(args: BenchArgs) -> CliResult<()> {
    let files = corpus_files(&args)?;
    let solvers = if args.solver.is_empty() {
        SolverName::ALL.to_vec()
    } else {
        args.solver.clone()
    };
    let mut entries = Vec::new();
    for (i, path) in files.iter().enumerate() {
        let inst = read_instance(path)?;
        let params = Params {
            seed: derive_seed(args.params.seed, &[i as u64]),
            ..args.params.clone()
        };
        for &solver in &solvers {
            let instance = path.display().to_string();
            match solve_instance(solver, path, &inst, &params) {
                Ok(out) => entries.push(BenchEntry {
                    instance,
                    solver,
                    skipped: None,
                    opt: out.opt,
                    summary: Some(out.summary),
                }),
                Err(CliError::Core(e @ (FmsmError::Config(_) | FmsmError::Unsupported(_)))) => {
                    entries.push(BenchEntry {
                        instance,
                        solver,
                        skipped: Some(e.to_string()),
                        opt: None,
                        summary: None,
                    })
                }
                Err(e) => return Err(e),
            }
        }
    }
    let aggregates: Vec<SolverAggregate> =
        solvers.iter().map(|&s| aggregate(s, &entries)).collect();
    let output = BenchOutput {
        seed: args.params.seed,
        reps: args.params.reps,
        total_runs: aggregates.iter().map(|a| a.runs).sum(),
        solvers: aggregates,
        entries,
    };
    write_json(&output, args.out.as_deref())
}
