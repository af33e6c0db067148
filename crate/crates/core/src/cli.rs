//! Command-line front end: `generate`, `solve`, `bench`, `verify`.
//!
//! Exit codes: 0 success (Optimal or GapLimit for `solve`), 1 runtime error or
//! failed verification, 2 usage error, 3 time limit, 4 infeasible.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::bnb::{self, BnbParams, SolveReport, Status};
use crate::cobnb;
use crate::error::{OedError, Result};
use crate::instance::{generate, Correlation, Criterion, CriterionKind, GeneratorSpec, Instance, Variant};
use crate::verify::{self, Suite};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_TIME_LIMIT: i32 = 3;
pub const EXIT_INFEASIBLE: i32 = 4;

/// Benchmark instance grid.
pub const GRID_M: [usize; 5] = [50, 60, 80, 100, 120];
pub const GRID_SEEDS: [u64; 5] = [1, 2, 3, 4, 5];

#[derive(Debug, Parser)]
#[command(name = "oed", about = "Integer optimal experiment design by branch-and-bound")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write random instances as JSON.
    Generate(GenerateArgs),
    /// Solve one instance and print the report as JSON.
    Solve(SolveArgs),
    /// Solve every instance in a directory and write a CSV summary.
    Bench(BenchArgs),
    /// Run the verification harnesses.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    Optimal,
    Fusion,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Optimal => Variant::Optimal,
            VariantArg::Fusion => Variant::Fusion,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CorrArg {
    Independent,
    Correlated,
}

impl From<CorrArg> for Correlation {
    fn from(c: CorrArg) -> Self {
        match c {
            CorrArg::Independent => Correlation::Independent,
            CorrArg::Correlated => Correlation::Correlated,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GridArg {
    Paper,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..), required_unless_present = "grid")]
    pub m: Option<u64>,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..), required_unless_present = "grid")]
    pub n: Option<u64>,
    /// Restricts the grid when combined with `--grid`.
    #[arg(long, value_enum)]
    pub variant: Option<VariantArg>,
    #[arg(long, value_enum)]
    pub corr: Option<CorrArg>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Output file, or output directory with `--grid`.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, conflicts_with_all = ["m", "n", "seed"])]
    pub grid: Option<GridArg>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
pub enum SolverArg {
    Boscia,
    Cobnb,
    Brute,
}

impl SolverArg {
    pub fn name(self) -> &'static str {
        match self {
            SolverArg::Boscia => "boscia",
            SolverArg::Cobnb => "cobnb",
            SolverArg::Brute => "brute",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CriterionArg {
    Dopt,
    Aopt,
    Logaopt,
    Gti,
    Loggti,
}

fn positive_f64(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("{s} is not a positive number"))
    }
}

fn nonnegative_f64(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v >= 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("{s} is not a nonnegative number"))
    }
}

#[derive(Debug, Clone, Args)]
pub struct SolverOptions {
    #[arg(long, value_enum, default_value_t = CriterionArg::Dopt)]
    pub criterion: CriterionArg,
    /// Exponent of the trace criteria.
    #[arg(long, value_parser = positive_f64, default_value_t = 1.0)]
    pub p: f64,
    /// Seconds.
    #[arg(long, value_parser = nonnegative_f64)]
    pub time_limit: Option<f64>,
    #[arg(long, value_parser = nonnegative_f64, default_value_t = 1e-6)]
    pub abs_tol: f64,
    #[arg(long, value_parser = nonnegative_f64, default_value_t = 1e-4)]
    pub rel_tol: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub workers: u64,
    #[arg(long)]
    pub node_limit: Option<usize>,
}

impl SolverOptions {
    pub fn criterion(&self) -> Result<Criterion> {
        let kind = match self.criterion {
            CriterionArg::Dopt => CriterionKind::DOpt,
            CriterionArg::Aopt => CriterionKind::AOpt,
            CriterionArg::Logaopt => CriterionKind::LogAOpt,
            CriterionArg::Gti => CriterionKind::GTIOpt,
            CriterionArg::Loggti => CriterionKind::LogGTIOpt,
        };
        Criterion::new(kind, self.p)
    }

    pub fn params(&self, record_trace: bool) -> BnbParams {
        BnbParams {
            abs_tol: self.abs_tol,
            rel_tol: self.rel_tol,
            time_limit: self.time_limit,
            node_limit: self.node_limit,
            seed: self.seed,
            workers: self.workers as usize,
            record_trace,
            ..Default::default()
        }
    }
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long, value_enum, default_value_t = SolverArg::Boscia)]
    pub solver: SolverArg,
    #[command(flatten)]
    pub options: SolverOptions,
    /// Per-node trace CSV.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Also write the JSON report here.
    #[arg(long)]
    pub report: Option<PathBuf>,
    pub instance: PathBuf,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// One or more solvers, comma separated.
    #[arg(long, value_enum, value_delimiter = ',', default_value = "boscia")]
    pub solver: Vec<SolverArg>,
    #[command(flatten)]
    pub options: SolverOptions,
    #[arg(long)]
    pub out: PathBuf,
    pub dir: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SuiteArg {
    All,
    Criteria,
    Lmo,
    Fw,
    Bnb,
    Cobnb,
}

impl From<SuiteArg> for Suite {
    fn from(s: SuiteArg) -> Self {
        match s {
            SuiteArg::All => Suite::All,
            SuiteArg::Criteria => Suite::Criteria,
            SuiteArg::Lmo => Suite::Lmo,
            SuiteArg::Fw => Suite::Fw,
            SuiteArg::Bnb => Suite::Bnb,
            SuiteArg::Cobnb => Suite::Cobnb,
        }
    }
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value_t = SuiteArg::All)]
    pub suite: SuiteArg,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value = "verify_report.json")]
    pub report: PathBuf,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let _ = env_logger::Builder::from_env(env_logger::Env::new().filter("OED_LOG")).try_init();
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(OedError::InvalidSpec(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}

fn dispatch(cmd: Command) -> Result<i32> {
    match cmd {
        Command::Generate(a) => cmd_generate(&a).map(|paths| {
            for p in paths {
                println!("{}", p.display());
            }
            EXIT_OK
        }),
        Command::Solve(a) => cmd_solve(&a),
        Command::Bench(a) => cmd_bench(&a).map(|_| EXIT_OK),
        Command::Verify(a) => cmd_verify(&a),
    }
}

pub fn grid_file_name(variant: Variant, corr: Correlation, m: usize, n: usize, seed: u64) -> String {
    let v = match variant {
        Variant::Optimal => "optimal",
        Variant::Fusion => "fusion",
    };
    let c = match corr {
        Correlation::Independent => "independent",
        Correlation::Correlated => "correlated",
    };
    format!("{v}_{c}_m{m}_n{n}_s{seed}.json")
}

/// Writes the requested instances and returns their paths.
pub fn cmd_generate(args: &GenerateArgs) -> Result<Vec<PathBuf>> {
    if args.grid.is_none() {
        let spec = GeneratorSpec::new(
            args.m.unwrap_or(0) as usize,
            args.n.unwrap_or(0) as usize,
            args.variant.unwrap_or(VariantArg::Optimal).into(),
            args.corr.unwrap_or(CorrArg::Independent).into(),
            args.seed,
        );
        let inst = generate(&spec)?;
        if let Some(dir) = args.out.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir)?;
        }
        inst.save(&args.out)?;
        return Ok(vec![args.out.clone()]);
    }
    fs::create_dir_all(&args.out)?;
    let variants: Vec<Variant> = match args.variant {
        Some(v) => vec![v.into()],
        None => vec![Variant::Optimal, Variant::Fusion],
    };
    let corrs: Vec<Correlation> = match args.corr {
        Some(c) => vec![c.into()],
        None => vec![Correlation::Independent, Correlation::Correlated],
    };
    let mut out = Vec::new();
    for &variant in &variants {
        for &corr in &corrs {
            for m in GRID_M {
                for n in [m / 4, m / 10] {
                    for seed in GRID_SEEDS {
                        let inst = generate(&GeneratorSpec::new(m, n, variant, corr, seed))?;
                        let path = args.out.join(grid_file_name(variant, corr, m, n, seed));
                        inst.save(&path)?;
                        out.push(path);
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Enumeration solve reported in the common schema.
pub fn brute_report(instance: &Instance) -> Result<SolveReport> {
    let start = std::time::Instant::now();
    let (incumbent, objective, status) = match verify::brute_force(instance) {
        Ok(b) => (b.x, b.value, Status::Optimal),
        Err(OedError::AllInfeasible) => (Vec::new(), f64::INFINITY, Status::Infeasible),
        Err(e) => return Err(e),
    };
    let (abs_gap, rel_gap) = if status == Status::Optimal { (0.0, 0.0) } else { (f64::INFINITY, f64::INFINITY) };
    Ok(SolveReport {
        solver: "brute".into(),
        improvements: Vec::new(),
        incumbent,
        objective,
        lower_bound: objective,
        abs_gap,
        rel_gap,
        nodes: 0,
        lmo_calls: 0,
        wall_time: start.elapsed().as_secs_f64(),
        status,
        trace: Vec::new(),
    })
}

pub fn run_solver(solver: SolverArg, instance: &Instance, params: &BnbParams) -> Result<SolveReport> {
    match solver {
        SolverArg::Boscia => bnb::solve(instance, params),
        SolverArg::Cobnb => cobnb::cobnb_solve(instance, params),
        SolverArg::Brute => brute_report(instance),
    }
}

pub fn exit_code(status: Status) -> i32 {
    match status {
        Status::Optimal | Status::GapLimit => EXIT_OK,
        Status::TimeLimit => EXIT_TIME_LIMIT,
        Status::Infeasible => EXIT_INFEASIBLE,
    }
}

pub fn write_trace(path: &Path, report: &SolveReport) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for row in &report.trace {
        w.serialize(row)?;
    }
    if report.trace.is_empty() {
        w.write_record(["node_id", "depth", "lower_bound", "incumbent", "abs_gap", "time"])?;
    }
    w.flush()?;
    Ok(())
}

pub fn cmd_solve(args: &SolveArgs) -> Result<i32> {
    let criterion = args.options.criterion()?;
    let instance = Instance::load(&args.instance)?.with_criterion(criterion);
    let params = args.options.params(args.trace.is_some());
    let report = run_solver(args.solver, &instance, &params)?;
    let json = serde_json::to_string_pretty(&report).map_err(|e| OedError::Parse(e.to_string()))?;
    println!("{json}");
    if let Some(path) = &args.report {
        fs::write(path, &json)?;
    }
    if let Some(path) = &args.trace {
        write_trace(path, &report)?;
    }
    Ok(exit_code(report.status))
}

/// One row of the benchmark CSV. Summary rows use `instance = "SUMMARY"`,
/// put the share of instances solved to optimality in `status` and the
/// shifted geometric mean of the solve time in `time_s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub instance: String,
    pub solver: String,
    pub status: String,
    pub time_s: f64,
    pub objective: f64,
    pub lower_bound: f64,
    pub rel_gap: f64,
    pub nodes: usize,
    pub lmo_calls: usize,
}

/// `exp(mean(log(t + 1))) - 1`.
pub fn shifted_geomean(times: &[f64]) -> f64 {
    if times.is_empty() {
        return 0.0;
    }
    let mean = times.iter().map(|t| (t + 1.0).ln()).sum::<f64>() / times.len() as f64;
    mean.exp() - 1.0
}

pub fn summary_rows(rows: &[BenchRow]) -> Vec<BenchRow> {
    let mut solvers: Vec<&str> = Vec::new();
    for r in rows {
        if !solvers.contains(&r.solver.as_str()) {
            solvers.push(&r.solver);
        }
    }
    solvers
        .into_iter()
        .map(|s| {
            let mine: Vec<&BenchRow> = rows.iter().filter(|r| r.solver == s).collect();
            let times: Vec<f64> = mine.iter().map(|r| r.time_s).collect();
            let solved = mine.iter().filter(|r| r.status == "Optimal").count();
            let gaps: Vec<f64> = mine.iter().map(|r| r.rel_gap).filter(|g| g.is_finite()).collect();
            BenchRow {
                instance: "SUMMARY".into(),
                solver: s.to_string(),
                status: format!("{:.1}%", 100.0 * solved as f64 / mine.len() as f64),
                time_s: shifted_geomean(&times),
                objective: f64::NAN,
                lower_bound: f64::NAN,
                rel_gap: if gaps.is_empty() {
                    f64::NAN
                } else {
                    gaps.iter().sum::<f64>() / gaps.len() as f64
                },
                nodes: mine.iter().map(|r| r.nodes).sum(),
                lmo_calls: mine.iter().map(|r| r.lmo_calls).sum(),
            }
        })
        .collect()
}

pub fn cmd_bench(args: &BenchArgs) -> Result<Vec<BenchRow>> {
    let mut files: Vec<PathBuf> = fs::read_dir(&args.dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(OedError::Io(std::io::Error::new(
            std::io::ErrorKind::NotFound,
            format!("no instance files in {}", args.dir.display()),
        )));
    }
    let criterion = args.options.criterion()?;
    let params = args.options.params(false);
    let mut rows = Vec::new();
    for path in &files {
        let instance = Instance::load(path)?.with_criterion(criterion);
        let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        for &solver in &args.solver {
            let r = run_solver(solver, &instance, &params)?;
            log::info!("{name} {}: {} in {:.3}s", solver.name(), r.status, r.wall_time);
            rows.push(BenchRow {
                instance: name.clone(),
                solver: solver.name().into(),
                status: r.status.to_string(),
                time_s: r.wall_time,
                objective: r.objective,
                lower_bound: r.lower_bound,
                rel_gap: r.rel_gap,
                nodes: r.nodes,
                lmo_calls: r.lmo_calls,
            });
        }
    }
    let summary = summary_rows(&rows);
    rows.extend(summary);
    if let Some(dir) = args.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let mut w = csv::Writer::from_path(&args.out)?;
    for r in &rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(rows)
}

pub fn read_bench(path: &Path) -> Result<Vec<BenchRow>> {
    let mut r = csv::Reader::from_path(path)?;
    let rows: std::result::Result<Vec<BenchRow>, _> = r.deserialize().collect();
    Ok(rows?)
}

pub fn cmd_verify(args: &VerifyArgs) -> Result<i32> {
    let results = verify::run_suite(args.suite.into(), args.seed);
    let json = serde_json::to_string_pretty(&results).map_err(|e| OedError::Parse(e.to_string()))?;
    fs::write(&args.report, &json)?;
    let mut ok = true;
    for r in &results {
        println!(
            "{:?} {} worst={:.3e} tol={:.1e}",
            r.status, r.check_name, r.worst_case, r.tolerance
        );
        ok &= r.passed();
    }
    if ok {
        Ok(EXIT_OK)
    } else {
        eprintln!("verification failed; report at {}", args.report.display());
        Ok(EXIT_ERROR)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shifted_geomean_example() {
        assert!((shifted_geomean(&[0.0, 1.0, 3.0]) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(run_from(["oed", "generate", "--m", "5", "--n", "0", "--out", "x.json"]), EXIT_USAGE);
        assert_eq!(run_from(["oed", "solve", "--criterion", "gti", "--p", "0", "i.json"]), EXIT_USAGE);
        assert_eq!(run_from(["oed", "solve", "--solver", "simplex", "i.json"]), EXIT_USAGE);
        assert_eq!(run_from(["oed", "verify", "--suite", "nope"]), EXIT_USAGE);
    }

    #[test]
    fn summary_groups_by_solver() {
        let row = |solver: &str, status: &str, t: f64| BenchRow {
            instance: "a".into(),
            solver: solver.into(),
            status: status.into(),
            time_s: t,
            objective: 1.0,
            lower_bound: 1.0,
            rel_gap: 0.0,
            nodes: 1,
            lmo_calls: 1,
        };
        let rows = vec![
            row("boscia", "Optimal", 0.0),
            row("cobnb", "TimeLimit", 2.0),
            row("boscia", "TimeLimit", 3.0),
        ];
        let s = summary_rows(&rows);
        assert_eq!(s.len(), 2);
        assert_eq!(s[0].status, "50.0%");
        assert_eq!(s[1].status, "0.0%");
        assert!((s[0].time_s - 1.0).abs() < 1e-12);
    }
}
