//! Command-line front end for the auction planner and its sensitivity
//! analysis. Every subcommand is a plain function writing to the given
//! streams and returning a process exit code, so the binary is a thin shell
//! and tests can run commands in-process.

pub mod bench;
pub mod verify;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use auction_sensitivity::io::{instance_to_json, parse_instance, FamilyFile, PlanFile, RouteRecord};
use auction_sensitivity::oracle::brute_force_minsum;
use auction_sensitivity::{
    assign, auction_sensitivity, quotient_metricize, replan_check, route_cost, run_auction_traced,
    validate_metric, Error, MrtaInstance, ReplanDecision, Side, DEFAULT_TOL,
};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

/// Exit codes shared by every subcommand.
pub mod exit {
    pub const OK: i32 = 0;
    pub const FAILED: i32 = 1;
    pub const INPUT: i32 = 2;
    pub const INFEASIBLE: i32 = 3;
    pub const TIES: i32 = 4;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "mrta", version, about = "Auction-based task allocation with cost sensitivity intervals")]
pub struct Cli {
    /// Output format for tabular reports.
    #[arg(long, global = true, value_enum, default_value = "csv")]
    pub format: Format,
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Tolerance for metric validation.
    #[arg(long, global = true, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the auction and shortcut its trees into robot routes.
    Plan {
        instance: PathBuf,
        /// Include every bid round's candidates in the output.
        #[arg(long)]
        trace: bool,
        /// Write the plan here instead of standard output.
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Compute the per-edge intervals that keep the auction outcome.
    Sensitivity {
        instance: PathBuf,
        /// Decimal places in the CSV report.
        #[arg(long = "round", default_value_t = 2)]
        digits: usize,
    },
    /// Decide whether observed costs still fall inside a family.
    Check {
        instance: PathBuf,
        family: PathBuf,
        observed: PathBuf,
    },
    /// Check the approximation ratio, robustness and tightness.
    Verify {
        /// Instance file; omit when using --random.
        instance: Option<PathBuf>,
        /// Generate COUNT random instances with M robots and N tasks.
        #[arg(long, num_args = 4, value_names = ["M", "N", "COUNT", "SEED"])]
        random: Option<Vec<u64>>,
        /// Verify this family instead of the computed one.
        #[arg(long)]
        family: Option<PathBuf>,
        #[arg(long, default_value_t = 1000)]
        draws: usize,
        #[arg(long, default_value_t = 0.1)]
        epsilon: f64,
    },
    /// Time the subroutines on random Euclidean instances.
    Bench {
        #[arg(long, default_value_t = 10)]
        m: usize,
        #[arg(long, default_value_t = 100)]
        n: usize,
        #[arg(long, default_value_t = 10)]
        trials: usize,
        /// Task counts for the scaling fit, e.g. 25,50,100.
        #[arg(long, value_delimiter = ',')]
        sizes: Vec<usize>,
    },
    /// Solve small instances exactly by enumeration.
    Oracle { instance: PathBuf },
    /// Print the cost matrix an instance file resolves to.
    Costs {
        instance: PathBuf,
        /// Fold execution and boot-up costs into a metric quotient.
        #[arg(long)]
        quotient: bool,
    },
}

/// Why a command stopped early.
#[derive(Debug)]
pub enum Failure {
    Core(Error),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Core(Error::TiedCosts { .. }) => exit::TIES,
            Failure::Core(Error::UnreachableTask { .. }) => exit::INFEASIBLE,
            _ => exit::INPUT,
        }
    }
}

pub type CmdResult = Result<i32, Failure>;

/// Parses `args` (including the program name) and runs the command.
pub fn run_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(&cli, out, err),
        Err(e) => {
            let _ = write!(err, "{e}");
            if e.use_stderr() {
                exit::INPUT
            } else {
                exit::OK
            }
        }
    }
}

pub fn run(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let result = match &cli.command {
        Command::Plan { instance, trace, output } => {
            cmd_plan(instance, *trace, output.as_deref(), out, err)
        }
        Command::Sensitivity { instance, digits } => {
            cmd_sensitivity(instance, cli.format, *digits, out, err)
        }
        Command::Check { instance, family, observed } => {
            cmd_check(instance, family, observed, cli.format, out)
        }
        Command::Verify { instance, random, family, draws, epsilon } => {
            let source = match (instance, random.as_deref()) {
                (Some(path), None) => Ok(verify::Source::File(path.clone())),
                (None, Some(&[m, n, count, seed])) => Ok(verify::Source::Random {
                    m: m as usize,
                    n: n as usize,
                    count: count as usize,
                    seed,
                }),
                _ => Err(Failure::Io("verify needs an instance file or --random M N COUNT SEED".into())),
            };
            source.and_then(|source| {
                let options = verify::Options {
                    family: family.clone(),
                    draws: *draws,
                    epsilon: *epsilon,
                    seed: cli.seed,
                };
                verify::cmd_verify(&source, &options, cli.format, out)
            })
        }
        Command::Bench { m, n, trials, sizes } => {
            bench::cmd_bench(*m, *n, *trials, sizes, cli.seed, cli.format, out)
        }
        Command::Oracle { instance } => cmd_oracle(instance, out),
        Command::Costs { instance, quotient } => {
            cmd_costs(instance, *quotient, cli.tol, cli.format, out, err)
        }
    };
    match result {
        Ok(code) => code,
        Err(failure) => {
            report_failure(&failure, err);
            failure.exit_code()
        }
    }
}

fn report_failure(failure: &Failure, err: &mut dyn Write) {
    let _ = match failure {
        Failure::Core(e) => writeln!(err, "error: {e}"),
        Failure::Io(msg) => writeln!(err, "error: {msg}"),
    };
}

pub fn load_instance(path: &Path) -> Result<MrtaInstance<f64>, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    Ok(parse_instance(&text)?)
}

/// Fixed-point rendering with `"inf"` for infinity.
pub fn fixed(value: f64, digits: usize) -> String {
    if value == f64::INFINITY {
        "inf".to_string()
    } else {
        format!("{value:.digits$}")
    }
}

pub fn cmd_plan(
    path: &Path,
    trace: bool,
    output: Option<&Path>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> CmdResult {
    let instance = load_instance(path)?;
    let (plan, outcome) = assign(&instance)?;
    let rounds = if trace {
        Some(run_auction_traced(&instance.costs)?.1)
    } else {
        None
    };
    let file = PlanFile::new(&instance, &plan, &outcome, rounds.as_deref())?;
    let json = serde_json::to_string_pretty(&file)? + "\n";
    match output {
        Some(p) => fs::write(p, json).map_err(|e| Failure::Io(format!("{}: {e}", p.display())))?,
        None => out.write_all(json.as_bytes())?,
    }
    writeln!(err, "total cost: {}", plan.total_cost)?;
    Ok(exit::OK)
}

pub fn cmd_sensitivity(
    path: &Path,
    format: Format,
    digits: usize,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> CmdResult {
    let instance = load_instance(path)?;
    let (_, outcome) = assign(&instance)?;
    let family = match auction_sensitivity(&instance.costs, &outcome) {
        Ok(f) => f,
        Err(Error::TiedCosts { ties }) => {
            let named: Vec<String> = ties
                .iter()
                .map(|(a, b)| format!("{} = {}", instance.edge_label(*a), instance.edge_label(*b)))
                .collect();
            writeln!(err, "error: bid costs must be distinct; tied edges: {}", named.join(", "))?;
            return Ok(exit::TIES);
        }
        Err(e) => return Err(e.into()),
    };
    let file = FamilyFile::new(&instance, &outcome, &family);
    match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut *out, &file)?;
            writeln!(out)?;
        }
        Format::Csv => write_family_csv(&file, digits, out)?,
    }
    Ok(exit::OK)
}

/// The four-column table; robot-robot edges carry no bids and are left out.
pub fn write_family_csv(file: &FamilyFile, digits: usize, out: &mut dyn Write) -> Result<(), Failure> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(["edge", "cost", "max_decrease", "max_increase"])?;
    for rec in file.edges.iter().filter(|r| !r.unconstrained) {
        w.write_record([
            rec.edge.clone(),
            fixed(rec.cost, digits),
            fixed(rec.max_decrease, digits),
            fixed(rec.max_increase.get(), digits),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Six decimals at most, trailing zeros dropped.
fn short(v: f64) -> f64 {
    (v * 1e6).round() / 1e6
}

#[derive(Debug, Serialize)]
struct ViolationRecord {
    edge: String,
    side: &'static str,
    original: f64,
    observed: f64,
    bound: f64,
    limit: f64,
}

#[derive(Debug, Serialize)]
struct CheckRecord {
    decision: &'static str,
    violations: Vec<ViolationRecord>,
}

pub fn cmd_check(
    instance_path: &Path,
    family_path: &Path,
    observed_path: &Path,
    format: Format,
    out: &mut dyn Write,
) -> CmdResult {
    let instance = load_instance(instance_path)?;
    let text = fs::read_to_string(family_path)
        .map_err(|e| Failure::Io(format!("{}: {e}", family_path.display())))?;
    let family = serde_json::from_str::<FamilyFile>(&text)?.to_family(&instance)?;
    let observed = load_instance(observed_path)?;
    let decision = replan_check(&instance.costs, &family, &observed.costs)?;

    let violations: Vec<ViolationRecord> = match &decision {
        ReplanDecision::KeepPlan => Vec::new(),
        ReplanDecision::Replan { violations } => violations
            .iter()
            .map(|v| {
                let i = instance.costs.edge_index(v.edge);
                let (side, bound) = match v.side {
                    Side::Lower => ("lower", family.lower[i]),
                    Side::Upper => ("upper", family.upper[i]),
                };
                ViolationRecord {
                    edge: instance.edge_label(v.edge),
                    side,
                    original: v.original,
                    observed: v.observed,
                    bound,
                    limit: v.limit,
                }
            })
            .collect(),
    };
    let record = CheckRecord {
        decision: if decision.keeps_plan() { "keep_plan" } else { "replan" },
        violations,
    };
    match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut *out, &record)?;
            writeln!(out)?;
        }
        Format::Csv => {
            writeln!(out, "{}", record.decision)?;
            for v in &record.violations {
                match v.side {
                    "upper" => writeln!(
                        out,
                        "{}: observed {} > {} + {} = {} (upper bound)",
                        v.edge, short(v.observed), short(v.original), short(v.bound), short(v.limit)
                    )?,
                    _ => writeln!(
                        out,
                        "{}: observed {} <= {} - {} = {} (lower bound)",
                        v.edge, short(v.observed), short(v.original), short(v.bound), short(v.limit)
                    )?,
                }
            }
        }
    }
    Ok(if decision.keeps_plan() { exit::OK } else { exit::FAILED })
}

#[derive(Debug, Serialize)]
struct OracleRecord {
    routes: Vec<RouteRecord>,
    total_cost: f64,
}

pub fn cmd_oracle(path: &Path, out: &mut dyn Write) -> CmdResult {
    let instance = load_instance(path)?;
    let plan = brute_force_minsum(&instance.costs)?;
    let record = OracleRecord {
        routes: plan
            .routes
            .iter()
            .map(|r| {
                Ok(RouteRecord {
                    robot: instance.label(r.vertices[0]).to_string(),
                    sequence: r.tasks().iter().map(|t| instance.label(*t).to_string()).collect(),
                    cost: route_cost(r, &instance.costs)?,
                })
            })
            .collect::<Result<_, Error>>()?,
        total_cost: plan.total_cost,
    };
    serde_json::to_writer_pretty(&mut *out, &record)?;
    writeln!(out)?;
    Ok(exit::OK)
}

pub fn cmd_costs(
    path: &Path,
    quotient: bool,
    tol: f64,
    format: Format,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> CmdResult {
    let mut instance = load_instance(path)?;
    if quotient {
        let q = quotient_metricize(&instance, tol)?;
        let label = |cell: &Vec<_>| {
            cell.iter()
                .map(|v| instance.label(*v))
                .collect::<Vec<_>>()
                .join("+")
        };
        let ids: Vec<String> = q.partition.iter().map(label).collect();
        let robots = q.qcosts.m();
        let mut folded = MrtaInstance::new(q.qcosts.clone()).with_name(instance.name.clone());
        folded.robot_ids = ids[..robots].to_vec();
        folded.task_ids = ids[robots..].to_vec();
        if !q.cprime_is_metric {
            writeln!(err, "warning: task execution costs differ; the quotient is not a metric")?;
        }
        instance = folded;
    }

    let report = validate_metric(&instance.costs, tol);
    writeln!(
        err,
        "M1 {} M2 {} M2' {} M3 {} M4 {} injective {}",
        report.holds_m1,
        report.holds_m2,
        report.holds_m2_prime,
        report.holds_m3,
        report.holds_m4,
        report.is_injective_on_edges
    )?;
    for v in report.violations.iter().take(10) {
        let at: Vec<&str> = v
            .witness
            .iter()
            .map(|&i| instance.label(instance.costs.entity(i)))
            .collect();
        writeln!(err, "violation of {} at {}", v.axiom, at.join(", "))?;
    }

    match format {
        Format::Json => writeln!(out, "{}", instance_to_json(&instance)?)?,
        Format::Csv => {
            let mut w = csv::WriterBuilder::new()
                .terminator(csv::Terminator::Any(b'\n'))
                .from_writer(&mut *out);
            let ids: Vec<&str> = (0..instance.costs.len())
                .map(|i| instance.label(instance.costs.entity(i)))
                .collect();
            w.write_record(std::iter::once("").chain(ids.iter().copied()))?;
            for (i, row) in instance.costs.rows().into_iter().enumerate() {
                w.write_record(
                    std::iter::once(ids[i].to_string()).chain(row.into_iter().map(|v| v.to_string())),
                )?;
            }
            w.flush()?;
        }
    }
    Ok(exit::OK)
}
