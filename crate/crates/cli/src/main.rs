//! Command-line front end: run a mechanism, sweep recommendations, audit
//! strategyproofness, generate named instances, or query an optimum oracle.
//!
//! Exit codes: 0 success, 1 usage error, 2 data or validation error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use mechadvice::auctions::{mir_with_advice, mu_opt, BundleAllocation};
use mechadvice::facility::{cmp, mbb, opt_egalitarian, opt_utilitarian, CmpConfig, Point2, TieBreak};
use mechadvice::formats::{
    parse_indices, parse_reals, read_house_csv, read_multi_unit_csv, read_scheduling_csv, write_house_csv,
    write_points_csv, write_scheduling_csv,
};
use mechadvice::harness::{
    audit_sp_with_fault, ingest_points_csv, rows_to_csv, rows_to_json_lines, run_asg_beta_sweep, run_cmp_sweep,
    run_mbb_sweep, AuditSetting, PaymentFault,
};
use mechadvice::house::{opt_matching, ttc, Matching, Normalization};
use mechadvice::instances::{build, NamedInstance, NamedKey, NamedKind, DEFAULT_EPS};
use mechadvice::scheduling::{asg, opt_makespan, AsgConfig, Assignment, OracleMode, OptSource};
use mechadvice::{Error, Seed};

#[derive(Parser, Debug)]
#[command(name = "mechadvice", version, about = "Strategyproof mechanisms with a recommended outcome")]
struct Cli {
    /// Worker threads for parallel sweeps and audits (default: all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Write output here instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Indent JSON output
    #[arg(long, global = true)]
    pretty: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one mechanism on an input file and print its outcome and report
    Run(RunArgs),
    /// Evaluate a mechanism over many recommendations
    Sweep(SweepArgs),
    /// Strategyproofness audits
    Audit {
        #[command(subcommand)]
        kind: AuditKind,
    },
    /// Write a named adversarial instance
    Gen(GenArgs),
    /// Compute the exact optimum of an instance
    Oracle(OracleArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Mech {
    FacilityMbb,
    FacilityCmp,
    Asg,
    Ttc,
    MultiUnit,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq)]
enum TieArg {
    Low,
    High,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq)]
enum OnOff {
    On,
    Off,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum NormArg {
    UnitRange,
    UnitSum,
    None,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq)]
enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug)]
struct RunArgs {
    /// Mechanism to run
    mech: Mech,
    /// Instance file (points CSV, cost matrix, valuation matrix or value curves)
    #[arg(long)]
    input: PathBuf,
    /// Recommendation: `x,y` (facility), zero-indexed machine per job (asg),
    /// one-indexed house per agent (ttc)
    #[arg(long, conflicts_with = "advice_file")]
    advice: Option<String>,
    /// File holding the recommendation in the `--advice` syntax
    #[arg(long)]
    advice_file: Option<PathBuf>,
    /// Recommended item counts per bidder (multi-unit)
    #[arg(long)]
    advice_counts: Option<String>,
    /// Confidence in the recommendation for facility-cmp, in [0, 1)
    #[arg(long, default_value_t = 0.5)]
    lambda: f64,
    /// Median tie-break for facility-cmp
    #[arg(long, value_enum, default_value_t = TieArg::Low)]
    tie_break: TieArg,
    /// Confidence in the recommendation for asg, in [1, n]
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    /// Brute-force optimum for asg reports; off reports a lower bound
    #[arg(long, value_enum, default_value_t = OnOff::On)]
    oracle: OnOff,
    /// Valuation normalization checked on ttc input
    #[arg(long, value_enum, default_value_t = NormArg::None)]
    normalization: NormArg,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum SweepMech {
    FacilityCmp,
    FacilityMbb,
    Asg,
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// Mechanism to sweep
    mech: SweepMech,
    /// Points CSV (facility) or cost matrix (asg)
    #[arg(long)]
    input: PathBuf,
    /// Grid size k: k x k predictions over the bounding box (facility)
    #[arg(long, default_value_t = 10)]
    grid: usize,
    /// Confidence for facility-cmp, in [0, 1)
    #[arg(long, default_value_t = 0.5)]
    lambda: f64,
    /// Median tie-break for facility-cmp
    #[arg(long, value_enum, default_value_t = TieArg::Low)]
    tie_break: TieArg,
    /// Comma-separated confidence values for asg
    #[arg(long)]
    betas: Option<String>,
    /// Zero-indexed recommended machine per job (asg)
    #[arg(long)]
    advice: Option<String>,
    /// Output table format
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Subcommand, Debug)]
enum AuditKind {
    /// Sample misreports and report any utility gain
    Sp(AuditArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum SettingArg {
    FacilityMbb,
    FacilityCmp,
    Scheduling,
    House,
    MultiUnit,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq)]
enum FaultArg {
    None,
    SignFlip,
}

#[derive(Args, Debug)]
struct AuditArgs {
    /// Setting to audit
    #[arg(long, value_enum)]
    setting: SettingArg,
    /// Number of sampled instances
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    /// Random seed
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Corrupt payments to check the auditor itself
    #[arg(long, value_enum, default_value_t = FaultArg::None)]
    fault: FaultArg,
}

#[derive(Args, Debug)]
struct GenArgs {
    /// Instance name, e.g. fl-worst-max, sched-lb1, house-lb-unit-range
    #[arg(long)]
    named: String,
    /// Target quality of recommendation
    #[arg(long)]
    rho: Option<f64>,
    /// Number of agents or machines
    #[arg(long)]
    n: Option<usize>,
    /// Multiplicity parameter for fl-worst-sum
    #[arg(long)]
    m: Option<usize>,
    /// Confidence parameter for the scheduling families
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    /// Perturbation size
    #[arg(long, default_value_t = DEFAULT_EPS)]
    eps: f64,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum OracleSetting {
    FacilityEgalitarian,
    FacilityUtilitarian,
    Scheduling,
    House,
    MultiUnit,
}

#[derive(Args, Debug)]
struct OracleArgs {
    /// Which optimum to compute
    setting: OracleSetting,
    /// Instance file
    #[arg(long)]
    input: PathBuf,
    /// Valuation normalization checked on house input
    #[arg(long, value_enum, default_value_t = NormArg::None)]
    normalization: NormArg,
}

enum Failure {
    Usage(String),
    Data(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Data(e)
    }
}

type CliResult<T> = Result<T, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(t) = cli.threads {
        if t == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(1);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Data(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: &Cli) -> CliResult<()> {
    let out = cli.out.as_deref();
    match &cli.command {
        Command::Run(a) => emit_json(&run(a)?, out, cli.pretty),
        Command::Sweep(a) => sweep(a, out),
        Command::Audit { kind: AuditKind::Sp(a) } => {
            let setting = match a.setting {
                SettingArg::FacilityMbb => AuditSetting::FacilityMbb,
                SettingArg::FacilityCmp => AuditSetting::FacilityCmp,
                SettingArg::Scheduling => AuditSetting::Scheduling,
                SettingArg::House => AuditSetting::House,
                SettingArg::MultiUnit => AuditSetting::MultiUnit,
            };
            let fault = match a.fault {
                FaultArg::None => PaymentFault::None,
                FaultArg::SignFlip => PaymentFault::SignFlip,
            };
            let report = audit_sp_with_fault(setting, Seed(a.seed), a.trials, fault)?;
            emit_json(&serde_json::to_value(report).expect("report serializes"), out, cli.pretty)
        }
        Command::Gen(a) => gen(a, out, cli.pretty),
        Command::Oracle(a) => emit_json(&oracle(a)?, out, cli.pretty),
    }
}

fn emit(text: &str, out: Option<&Path>) -> CliResult<()> {
    match out {
        Some(p) => fs::write(p, text).map_err(|source| {
            Failure::Data(Error::Io {
                path: p.to_path_buf(),
                source,
            })
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit_json(v: &Value, out: Option<&Path>, pretty: bool) -> CliResult<()> {
    let mut s = if pretty {
        serde_json::to_string_pretty(v)
    } else {
        serde_json::to_string(v)
    }
    .expect("JSON values serialize");
    s.push('\n');
    emit(&s, out)
}

fn tie(t: TieArg) -> TieBreak {
    match t {
        TieArg::Low => TieBreak::Low,
        TieArg::High => TieBreak::High,
    }
}

fn norm(n: NormArg) -> Normalization {
    match n {
        NormArg::UnitRange => Normalization::UnitRange,
        NormArg::UnitSum => Normalization::UnitSum,
        NormArg::None => Normalization::None,
    }
}

fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path)
        .map(|s| s.trim().to_owned())
        .map_err(|source| {
            Failure::Data(Error::Io {
                path: path.to_path_buf(),
                source,
            })
        })
}

fn advice_text(a: &RunArgs) -> CliResult<String> {
    match (&a.advice, &a.advice_file) {
        (Some(s), _) => Ok(s.clone()),
        (None, Some(p)) => read_text(p),
        (None, None) => Err(Failure::Usage(format!(
            "{:?} needs a recommendation: pass --advice or --advice-file",
            a.mech
        ))),
    }
}

fn usage_parse<T>(flag: &str, r: mechadvice::Result<T>) -> CliResult<T> {
    r.map_err(|e| Failure::Usage(format!("invalid {flag}: {e}")))
}

fn point_flag(flag: &str, s: &str) -> CliResult<Point2> {
    let v = usage_parse(flag, parse_reals(s))?;
    match v.as_slice() {
        [x, y] if x.is_finite() && y.is_finite() => Ok(Point2::new(*x, *y)),
        _ => Err(Failure::Usage(format!("{flag} expects two finite numbers `x,y`, got {s:?}"))),
    }
}

fn real(v: f64) -> Value {
    if v.is_infinite() && v > 0.0 {
        json!("inf")
    } else {
        json!(v)
    }
}

fn outcome_json(mech: &str, alternative: Value, payments: &[f64], report: &mechadvice::QualityReport) -> Value {
    json!({
        "mechanism": mech,
        "alternative": alternative,
        "payments": payments.iter().map(|&p| real(p)).collect::<Vec<_>>(),
        "report": serde_json::to_value(report).expect("report serializes"),
    })
}

fn run(a: &RunArgs) -> CliResult<Value> {
    if a.advice_counts.is_some() && !matches!(a.mech, Mech::MultiUnit) {
        return Err(Failure::Usage("--advice-counts only applies to multi-unit".into()));
    }
    match a.mech {
        Mech::FacilityMbb | Mech::FacilityCmp => {
            let a_hat = point_flag("--advice", &advice_text(a)?)?;
            let inst = ingest_points_csv(&a.input)?;
            let (name, out) = if matches!(a.mech, Mech::FacilityMbb) {
                ("facility-mbb", mbb(&inst, a_hat)?)
            } else {
                let cfg = CmpConfig::new(a.lambda, tie(a.tie_break))?;
                ("facility-cmp", cmp(&inst, a_hat, &cfg)?)
            };
            Ok(outcome_json(name, json!(out.alternative), &out.payments, &out.report))
        }
        Mech::Asg => {
            let a_hat = Assignment::new(usage_parse("--advice", parse_indices(&advice_text(a)?))?);
            let inst = read_scheduling_csv(&a.input)?;
            let cfg = AsgConfig::new(a.beta, inst.machines())?;
            let mode = if a.oracle == OnOff::On { OracleMode::On } else { OracleMode::Off };
            let (out, source) = asg(&inst, &a_hat, &cfg, mode)?;
            let mut v = outcome_json("asg", json!(out.alternative.machine_of), &out.payments, &out.report);
            v["opt_source"] = json!(match source {
                OptSource::BruteForce => "brute-force",
                OptSource::LowerBound => "lower-bound",
            });
            Ok(v)
        }
        Mech::Ttc => {
            let endowment = usage_parse("--advice", Matching::parse_one_indexed(&advice_text(a)?))?;
            let v = read_house_csv(&a.input, norm(a.normalization))?;
            let out = ttc(&v, &endowment)?;
            Ok(outcome_json("ttc", json!(out.alternative.to_one_indexed()), &out.payments, &out.report))
        }
        Mech::MultiUnit => {
            let Some(counts) = &a.advice_counts else {
                return Err(Failure::Usage("multi-unit needs --advice-counts".into()));
            };
            let a_hat = usage_parse("--advice-counts", BundleAllocation::parse(counts))?;
            let inst = read_multi_unit_csv(&a.input)?;
            let out = mir_with_advice(&inst, &a_hat)?;
            Ok(outcome_json("multi-unit", json!(out.alternative.count_of), &out.payments, &out.report))
        }
    }
}

fn sweep(a: &SweepArgs, out: Option<&Path>) -> CliResult<()> {
    let rows = match a.mech {
        SweepMech::FacilityCmp => {
            let inst = ingest_points_csv(&a.input)?;
            run_cmp_sweep(&inst, a.grid, &CmpConfig::new(a.lambda, tie(a.tie_break))?)?
        }
        SweepMech::FacilityMbb => run_mbb_sweep(&ingest_points_csv(&a.input)?, a.grid)?,
        SweepMech::Asg => {
            let (Some(advice), Some(betas)) = (&a.advice, &a.betas) else {
                return Err(Failure::Usage("sweep asg needs --advice and --betas".into()));
            };
            let a_hat = Assignment::new(usage_parse("--advice", parse_indices(advice))?);
            let betas = usage_parse("--betas", parse_reals(betas))?;
            let inst = read_scheduling_csv(&a.input)?;
            run_asg_beta_sweep(&inst, &a_hat, &betas)?
        }
    };
    let text = match a.format {
        Format::Csv => rows_to_csv(&rows),
        Format::Json => rows_to_json_lines(&rows),
    };
    emit(&text, out)
}

fn need<T: Copy>(v: Option<T>, flag: &str, key: NamedKind) -> CliResult<T> {
    v.ok_or_else(|| Failure::Usage(format!("{key} needs {flag}")))
}

fn gen(a: &GenArgs, out: Option<&Path>, pretty: bool) -> CliResult<()> {
    let kind: NamedKind = a.named.parse().map_err(|e: Error| Failure::Usage(e.to_string()))?;
    let key = match kind {
        NamedKind::FlWorstMax => NamedKey::FlWorstMax {
            rho_hat: need(a.rho, "--rho", kind)?,
        },
        NamedKind::FlWorstSum => NamedKey::FlWorstSum {
            m: need(a.m, "--m", kind)?,
        },
        NamedKind::FlSum1 => NamedKey::FlSum1,
        NamedKind::SchedLb1 => NamedKey::SchedLb1 {
            n: need(a.n, "--n", kind)?,
            rho_hat: need(a.rho, "--rho", kind)?,
            beta: a.beta,
            eps: a.eps,
        },
        NamedKind::SchedLb2 => NamedKey::SchedLb2 {
            n: need(a.n, "--n", kind)?,
            rho_hat: need(a.rho, "--rho", kind)?,
            beta: a.beta,
            eps: a.eps,
        },
        NamedKind::SchedJump => NamedKey::SchedJump {
            n: need(a.n, "--n", kind)?,
            eps: a.eps,
        },
        NamedKind::HouseLbUnitRange => NamedKey::HouseLbUnitRange {
            n: need(a.n, "--n", kind)?,
            rho_hat: a.rho,
            eps: a.eps,
        },
        NamedKind::HouseLbUnitSum => NamedKey::HouseLbUnitSum {
            n: need(a.n, "--n", kind)?,
            rho_hat: a.rho,
            eps: a.eps,
        },
    };
    let (csv, advice) = match build(key)? {
        NamedInstance::Facility { instance, advice } => (write_points_csv(&instance), json!(advice)),
        NamedInstance::Scheduling { instance, advice } => (
            write_scheduling_csv(&instance),
            json!(advice.machine_of.iter().map(|m| m.to_string()).collect::<Vec<_>>().join(",")),
        ),
        NamedInstance::SchedulingPair { predicted, actual } => (
            write_scheduling_csv(&actual),
            json!({ "predicted": write_scheduling_csv(&predicted) }),
        ),
        NamedInstance::House { values, endowment } => (write_house_csv(&values), json!(endowment.to_one_indexed())),
    };
    match out {
        Some(p) => {
            emit(&csv, Some(p))?;
            let summary = json!({ "named": kind.to_string(), "out": p.display().to_string(), "advice": advice });
            emit_json(&summary, None, pretty)
        }
        None => {
            eprintln!("advice: {advice}");
            emit(&csv, None)
        }
    }
}

fn oracle(a: &OracleArgs) -> CliResult<Value> {
    Ok(match a.setting {
        OracleSetting::FacilityEgalitarian => {
            let (c, r) = opt_egalitarian(&ingest_points_csv(&a.input)?);
            json!({ "setting": "facility-egalitarian", "optimum": c, "value": r })
        }
        OracleSetting::FacilityUtilitarian => {
            let (c, v) = opt_utilitarian(&ingest_points_csv(&a.input)?)?;
            json!({ "setting": "facility-utilitarian", "optimum": c, "value": v })
        }
        OracleSetting::Scheduling => {
            let (asg, v) = opt_makespan(&read_scheduling_csv(&a.input)?)?;
            json!({ "setting": "scheduling", "optimum": asg.machine_of, "value": real(v) })
        }
        OracleSetting::House => {
            let (m, v) = opt_matching(&read_house_csv(&a.input, norm(a.normalization))?)?;
            json!({ "setting": "house", "optimum": m.to_one_indexed(), "value": v })
        }
        OracleSetting::MultiUnit => {
            let (alloc, v) = mu_opt(&read_multi_unit_csv(&a.input)?)?;
            json!({ "setting": "multi-unit", "optimum": alloc.count_of, "value": v })
        }
    })
}
