//! `stepwise`: translate PDDL or SAS input to facts, tidy PDDL, solve and
//! validate step plans.
//!
//! Exit codes: 0 success, 10 no plan within the cap or an invalid plan,
//! 1 usage error, 2 input error.

use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use stepwise_core::{read_facts, validate_plan, write_facts, Semantics, StepPlan, Task};
use stepwise_frontend::pddl::{self, Severity};
use stepwise_frontend::{translate_pddl, translate_sas, GroundOptions};
use stepwise_planner::{plan, Algorithm, GcStrategy, Mode, PlanOutcome, PlannerConfig};
use thiserror::Error;

const EXIT_NO_PLAN: u8 = 10;
const EXIT_USAGE: u8 = 1;
const EXIT_INPUT: u8 = 2;

#[derive(Parser, Debug)]
#[command(name = "stepwise", version, about = "Parallel-step planning over multivalued tasks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Ground PDDL or read SAS and print the task as facts.
    Translate {
        #[command(flatten)]
        input: Input,
    },
    /// Print the PDDL pair with implications, universals and negations rewritten.
    Normalize { domain: PathBuf, problem: PathBuf },
    /// Report parse errors and constructs outside the supported fragment.
    CheckSyntax { domain: PathBuf, problem: PathBuf },
    /// Print the PDDL pair in canonical layout.
    Beautify { domain: PathBuf, problem: PathBuf },
    /// Search for a plan and print it on stdout; statistics go to stderr.
    Solve {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        opts: SolveOpts,
    },
    /// Check a plan against a task. The last path is the plan file.
    Validate {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_enum, default_value_t = SemanticsArg::Exists)]
        semantics: SemanticsArg,
    },
}

#[derive(clap::Args, Debug)]
struct Input {
    /// Domain and problem, one SAS file, or one facts file; `-` or nothing reads stdin.
    paths: Vec<PathBuf>,
    #[arg(long, value_enum)]
    from: Option<Format>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Pddl,
    Sas,
    Facts,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Encoding {
    Seq,
    Forall,
    #[value(alias = "exists-acyc")]
    Exists,
    ExistsFixpoint,
    Gc,
    Relaxed,
}

impl Encoding {
    fn mode(self) -> (Mode, GcStrategy) {
        match self {
            Encoding::Seq => (Mode::Seq, GcStrategy::default_for(Mode::Seq)),
            Encoding::Forall => (Mode::Forall, GcStrategy::default_for(Mode::Forall)),
            Encoding::Exists => (Mode::ExistsAcyc, GcStrategy::default_for(Mode::ExistsAcyc)),
            Encoding::ExistsFixpoint => (Mode::GcExists, GcStrategy::Nogood),
            Encoding::Gc => (Mode::GcExists, GcStrategy::SwitchToForall),
            Encoding::Relaxed => (Mode::GcRelaxed, GcStrategy::default_for(Mode::GcRelaxed)),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum AlgorithmArg {
    #[value(name = "S", alias = "s")]
    S,
    #[value(name = "A", alias = "a")]
    A,
    #[value(name = "B", alias = "b")]
    B,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum OutputArg {
    Steps,
    Facts,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum SemanticsArg {
    #[value(alias = "seq")]
    Sequential,
    Forall,
    Exists,
    Relaxed,
}

impl From<SemanticsArg> for Semantics {
    fn from(s: SemanticsArg) -> Self {
        match s {
            SemanticsArg::Sequential => Semantics::Sequential,
            SemanticsArg::Forall => Semantics::Forall,
            SemanticsArg::Exists => Semantics::Exists,
            SemanticsArg::Relaxed => Semantics::Relaxed,
        }
    }
}

#[derive(clap::Args, Debug)]
struct SolveOpts {
    #[arg(long, value_enum, default_value_t = Encoding::Exists)]
    encoding: Encoding,
    #[arg(long, value_enum, default_value_t = AlgorithmArg::B)]
    algorithm: AlgorithmArg,
    /// Horizons run side by side under `A`.
    #[arg(long, default_value_t = 16)]
    n: usize,
    /// Geometric rate under `B`.
    #[arg(long, default_value_t = 0.9)]
    gamma: f64,
    #[arg(long, default_value_t = 5)]
    increment: usize,
    #[arg(long)]
    heuristic: bool,
    #[arg(long, default_value_t = 200)]
    horizon_cap: usize,
    /// Conflicts per time slice.
    #[arg(long, default_value_t = 512)]
    slice: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = OutputArg::Steps)]
    output: OutputArg,
}

impl SolveOpts {
    fn config(&self) -> PlannerConfig {
        let (mode, gc_strategy) = self.encoding.mode();
        let algorithm = match self.algorithm {
            AlgorithmArg::S => Algorithm::S,
            AlgorithmArg::A => Algorithm::A { n: self.n },
            AlgorithmArg::B => Algorithm::B { gamma: self.gamma },
        };
        PlannerConfig {
            mode,
            algorithm,
            heuristic: self.heuristic,
            increment: self.increment,
            slice: self.slice,
            seed: self.seed,
            horizon_cap: Some(self.horizon_cap),
            gc_strategy,
        }
    }
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("{0}")]
    Input(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Io { .. } | CliError::Input(_) => EXIT_INPUT,
        }
    }
}

fn read_input(path: Option<&Path>) -> Result<String, CliError> {
    match path {
        None => read_stdin(),
        Some(p) if p.as_os_str() == "-" => read_stdin(),
        Some(p) => fs::read_to_string(p).map_err(|source| CliError::Io { path: p.display().to_string(), source }),
    }
}

fn read_stdin() -> Result<String, CliError> {
    let mut s = String::new();
    io::stdin().read_to_string(&mut s).map_err(|source| CliError::Io { path: "<stdin>".into(), source })?;
    Ok(s)
}

fn input_error(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Input(format!("{}: {e}", path.display()))
}

fn load_task(paths: &[PathBuf], from: Option<Format>) -> Result<Task, CliError> {
    let format = match from {
        Some(f) => f,
        None if paths.len() == 2 => Format::Pddl,
        None => Format::Facts,
    };
    match (format, paths) {
        (Format::Pddl, [d, p]) => {
            let (dt, pt) = (read_input(Some(d))?, read_input(Some(p))?);
            let g = translate_pddl(&dt, &pt, &GroundOptions::default()).map_err(|e| input_error(d, e))?;
            for w in &g.warnings {
                eprintln!("warning: {w}");
            }
            Ok(g.task)
        }
        (Format::Pddl, _) => Err(CliError::Usage("PDDL input needs a domain and a problem file".into())),
        (f, [] | [_]) => {
            let path = paths.first().map(PathBuf::as_path);
            let text = read_input(path)?;
            let shown = path.unwrap_or(Path::new("<stdin>"));
            let sas = f == Format::Sas || (from.is_none() && text.trim_start().starts_with("begin_version"));
            if sas {
                let (task, warnings) = translate_sas(&text).map_err(|e| input_error(shown, e))?;
                for w in &warnings {
                    eprintln!("warning: {w}");
                }
                Ok(task)
            } else {
                read_facts(&text).map_err(|e| input_error(shown, e))
            }
        }
        (_, _) => Err(CliError::Usage(format!("expected one input file, got {}", paths.len()))),
    }
}

fn load_ast(domain: &Path, problem: &Path) -> Result<pddl::PddlAst, CliError> {
    let (d, p) = (read_input(Some(domain))?, read_input(Some(problem))?);
    pddl::parse_pddl(&d, &p).map_err(|e| {
        let file = if e.part == pddl::Part::Domain { domain } else { problem };
        CliError::Input(format!("{}:{}: {}", file.display(), e.span, e.message))
    })
}

fn print_pair(out: &mut impl Write, (d, p): (String, String)) -> io::Result<()> {
    write!(out, "{d}\n{p}")
}

fn run(cli: Cli) -> Result<u8, CliError> {
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let io_err = |source| CliError::Io { path: "<stdout>".into(), source };
    match cli.command {
        Command::Translate { input } => {
            let task = load_task(&input.paths, input.from)?;
            out.write_all(write_facts(&task).as_bytes()).map_err(io_err)?;
            Ok(0)
        }
        Command::Normalize { domain, problem } => {
            let ast = pddl::normalize(&load_ast(&domain, &problem)?);
            print_pair(&mut out, pddl::beautify(&ast)).map_err(io_err)?;
            Ok(0)
        }
        Command::Beautify { domain, problem } => {
            let ast = load_ast(&domain, &problem)?;
            print_pair(&mut out, pddl::beautify(&ast)).map_err(io_err)?;
            Ok(0)
        }
        Command::CheckSyntax { domain, problem } => {
            let (d, p) = (read_input(Some(&domain))?, read_input(Some(&problem))?);
            let diags = pddl::check_syntax(&d, &p);
            let (dn, pn) = (domain.display().to_string(), problem.display().to_string());
            for diag in &diags {
                writeln!(out, "{}", diag.render(&dn, &pn)).map_err(io_err)?;
            }
            Ok(if diags.iter().any(|d| d.severity == Severity::Error) { EXIT_INPUT } else { 0 })
        }
        Command::Solve { input, opts } => {
            let task = load_task(&input.paths, input.from)?;
            let cfg = opts.config();
            let result = plan(&task, &cfg).map_err(|e| match e {
                stepwise_planner::PlanError::Config(m) => CliError::Usage(m),
                other => CliError::Input(other.to_string()),
            })?;
            eprintln!("encoding={}", cfg.mode);
            eprint!("{}", result.stats);
            match &result.outcome {
                PlanOutcome::Found { plan, .. } => {
                    let text = match opts.output {
                        OutputArg::Steps => plan.to_step_text(&task),
                        OutputArg::Facts => plan.to_occurs_text(&task),
                    };
                    out.write_all(text.as_bytes()).map_err(io_err)?;
                    Ok(0)
                }
                PlanOutcome::Exhausted { cap } => {
                    eprintln!("no plan up to horizon {cap}");
                    Ok(EXIT_NO_PLAN)
                }
            }
        }
        Command::Validate { mut input, semantics } => {
            let plan_path = input.paths.pop().ok_or_else(|| CliError::Usage("validate needs a plan file".into()))?;
            if input.paths.is_empty() {
                return Err(CliError::Usage("validate needs a task and a plan file".into()));
            }
            let task = load_task(&input.paths, input.from)?;
            let text = read_input(Some(&plan_path))?;
            let steps = StepPlan::parse(&task, &text, semantics.into()).map_err(|e| input_error(&plan_path, e))?;
            let report = validate_plan(&task, &steps).map_err(|e| input_error(&plan_path, e))?;
            writeln!(out, "{report}").map_err(io_err)?;
            Ok(if report.is_valid() { 0 } else { EXIT_NO_PLAN })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
