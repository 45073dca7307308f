//! `betadyn` — classification verdicts, cylinder enumeration, and
//! verification suites for shrinking-target sets in β-dynamical systems.
//!
//! Exit codes: 0 success (verdicts count as success even when a hypothesis
//! is flagged), 1 verification-check failure, 2 usage/config error,
//! 3 resource-limit error.

mod plan;
mod report;
mod runners;
mod suites;

use clap::{Parser, Subcommand, ValueEnum};
use plan::{parse_plan_text, ExperimentPlan, PlanFile};
use report::{CheckResult, ReportBundle};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "betadyn",
    version,
    about = "Zero-full dichotomy toolkit for shrinking-target sets in beta-dynamical systems"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// Experiment config file (TOML, or JSON with a .json extension).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// RNG seed for every randomized check.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output directory for the report bundle; stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Report format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Working precision for base arithmetic.
    #[arg(long, global = true, default_value_t = 128)]
    precision_bits: usize,
    /// Worker-thread bound for parallel checks.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Cmd {
    /// Zero/full verdict for a configured target set.
    Classify,
    /// Verdict for the two-base (2, 3) family with rate e^(-nt).
    W2star,
    /// Cylinder table at one level.
    Enumerate,
    /// Expansion combinatorics checks.
    VerifyCore,
    /// Divergence-side construction checks.
    VerifyDivergence,
    /// Exact/Monte-Carlo measure checks.
    Measure,
    /// Hyperboloid cover scaling checks.
    CoverScaling,
    /// Every suite; passes iff they all pass.
    VerifyAll,
}

impl Cmd {
    fn mode(&self) -> &'static str {
        match self {
            Cmd::Classify => "classify",
            Cmd::W2star => "w2star",
            Cmd::Enumerate => "enumerate",
            Cmd::VerifyCore => "verify-core",
            Cmd::VerifyDivergence => "verify-divergence",
            Cmd::Measure => "measure",
            Cmd::CoverScaling => "cover-scaling",
            Cmd::VerifyAll => "verify-all",
        }
    }

    /// Verdict modes exit 0 once the answer is delivered; verification
    /// modes exit 1 on any failed check.
    fn is_verification(&self) -> bool {
        !matches!(self, Cmd::Classify | Cmd::W2star | Cmd::Enumerate)
    }
}

fn load_plan(cli: &Cli) -> Result<ExperimentPlan, String> {
    let file = match &cli.config {
        None => PlanFile::default(),
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
            let json = path.extension().is_some_and(|e| e == "json");
            parse_plan_text(&text, json).map_err(|e| e.to_string())?
        }
    };
    ExperimentPlan::new(cli.cmd.mode(), file, cli.seed, cli.precision_bits, cli.jobs)
        .map_err(|e| e.to_string())
}

fn run_mode(
    cmd: &Cmd,
    plan: &ExperimentPlan,
) -> betadyn_core::Result<(Vec<CheckResult>, serde_json::Value)> {
    match cmd {
        Cmd::Classify => runners::classify(plan),
        Cmd::W2star => runners::w2star(plan),
        Cmd::Enumerate => runners::enumerate(plan),
        Cmd::VerifyAll => {
            let mut checks = Vec::new();
            for suite in suites::registry() {
                for c in suite.run(plan)? {
                    checks.push(CheckResult::new(
                        format!("{}/{}", suite.name(), c.name),
                        c.pass,
                        c.details,
                    ));
                }
            }
            Ok((checks, serde_json::Value::Null))
        }
        _ => {
            let suite = suites::suite_by_name(cmd.mode())
                .expect("every verification mode is registered");
            Ok((suite.run(plan)?, serde_json::Value::Null))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.jobs > 1 {
        // Bound worker parallelism for the rayon-backed checks; ignore the
        // error if a pool was already installed.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(cli.jobs).build_global();
    }

    let plan = match load_plan(&cli) {
        Ok(p) => p,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };

    let mut bundle = ReportBundle::new(cli.cmd.mode(), plan.hash(), plan.seed);
    let code = match run_mode(&cli.cmd, &plan) {
        Ok((checks, data)) => {
            bundle.checks = checks;
            bundle.data = data;
            if cli.cmd.is_verification() && !bundle.all_pass() {
                1
            } else {
                0
            }
        }
        Err(betadyn_core::Error::Resource(msg)) => {
            eprintln!("error: resource limit exceeded: {msg}");
            bundle.incomplete = true;
            3
        }
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };

    if let Err(e) = bundle.emit(cli.out.as_deref(), matches!(cli.format, Format::Csv)) {
        eprintln!("error: cannot write report: {e}");
        return ExitCode::from(3);
    }
    ExitCode::from(code)
}
