mod commands;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::Value;
use supercut::{Budget, Error, ErrorKind, ExtRational, Rational};

pub const BUDGET_ENV: &str = "SUPERCUT_BUDGET";

#[derive(Parser, Debug)]
#[command(name = "supercut", version, about = "Bounded generalised min-cut and lower-bounded VCSP toolkit")]
struct Cli {
    /// Evaluation budget for exhaustive sweeps (overrides SUPERCUT_BUDGET).
    #[arg(long, global = true)]
    budget: Option<u64>,
    /// Worker threads for batch inputs.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    /// Write the JSON result here instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Bounded generalised min-cut instances.
    #[command(subcommand)]
    Bgmc(BgmcCommand),
    /// Valued constraint satisfaction instances and languages.
    #[command(subcommand)]
    Vcsp(VcspCommand),
    /// Seeded random test corpora.
    #[command(subcommand)]
    Gen(GenCommand),
}

#[derive(Subcommand, Debug)]
enum BgmcCommand {
    /// Decide whether the optimum is zero, positive finite or infinite.
    Classify(Inputs),
    /// Enumerate all alpha-optimal solutions.
    Enumerate {
        #[arg(long)]
        alpha: String,
        /// Use the exhaustive oracle instead of the engine.
        #[arg(long, conflicts_with = "check")]
        oracle: bool,
        /// Run engine and oracle; exit 1 if they differ.
        #[arg(long)]
        check: bool,
        #[command(flatten)]
        inputs: Inputs,
    },
}

#[derive(Subcommand, Debug)]
enum VcspCommand {
    /// Solve an instance through the SDS or SEDS pipeline.
    Solve {
        #[command(flatten)]
        mode: ModeArgs,
        /// Report every optimal assignment.
        #[arg(long)]
        enumerate: bool,
        #[command(flatten)]
        inputs: Inputs,
    },
    /// Class factors and tractability verdicts of a language.
    ClassifyLanguage(Inputs),
    /// Emit the reduced language over the non-zero labels.
    Fix(Inputs),
    /// Build the hardness gadget for an instance over the reduced language.
    Gadget {
        /// Language the instance's relations were fixed from.
        #[arg(long)]
        gamma: PathBuf,
        /// Write the provenance sidecar here; otherwise it is embedded in the output.
        #[arg(long)]
        sidecar: Option<PathBuf>,
        input: PathBuf,
    },
    /// Exhaustive reference solver.
    Brute {
        #[command(flatten)]
        mode: ModeArgs,
        #[arg(long)]
        enumerate: bool,
        #[command(flatten)]
        inputs: Inputs,
    },
}

#[derive(Subcommand, Debug)]
enum GenCommand {
    /// Random BGMC instances with superadditive generator functions.
    Bgmc {
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 8)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        q: usize,
        #[arg(long, default_value_t = 1)]
        p: usize,
        #[arg(long, default_value_t = 1)]
        count: usize,
    },
    /// Random languages of a chosen class.
    Language {
        #[arg(long)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = LanguageClass::Sds)]
        class: LanguageClass,
        #[arg(long, default_value_t = 3)]
        domain: usize,
        #[arg(long, default_value_t = 2)]
        size: usize,
        #[arg(long, default_value_t = 2)]
        max_arity: usize,
        #[arg(long, default_value_t = 1)]
        count: usize,
    },
    /// Random instances over a language file.
    Instance {
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        language: PathBuf,
        #[arg(long, default_value_t = 6)]
        n: usize,
        #[arg(long, default_value_t = 6)]
        m: usize,
        #[command(flatten)]
        mode: ModeArgs,
        #[arg(long, default_value_t = 1)]
        count: usize,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum LanguageClass {
    Sds,
    SimNotSds,
    Random,
}

#[derive(Args, Debug)]
struct Inputs {
    /// Instance files or directories of `.json` files.
    #[arg(required = true)]
    paths: Vec<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct ModeArgs {
    /// Override the instance's mode.
    #[arg(long, value_enum)]
    mode: Option<ModeFlag>,
    /// Comma-separated per-label lower bounds for lower-bounded mode.
    #[arg(long, value_delimiter = ',')]
    bounds: Option<Vec<usize>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeFlag {
    Plain,
    Surjective,
    LowerBounded,
}

impl ModeArgs {
    pub fn resolve(&self) -> Result<Option<supercut::vcsp::Mode>, Error> {
        use supercut::vcsp::Mode;
        match (self.mode, &self.bounds) {
            (None, None) => Ok(None),
            (None, Some(_)) | (Some(ModeFlag::LowerBounded), None) => {
                Err(Error::InvalidInput("--bounds goes with --mode lower-bounded".into()))
            }
            (Some(ModeFlag::LowerBounded), Some(b)) => Ok(Some(Mode::LowerBounded(b.clone()))),
            (Some(_), Some(_)) => Err(Error::InvalidInput("--bounds only applies to --mode lower-bounded".into())),
            (Some(ModeFlag::Plain), None) => Ok(Some(Mode::Plain)),
            (Some(ModeFlag::Surjective), None) => Ok(Some(Mode::Surjective)),
        }
    }
}

/// Failure of a single command: a library error or an engine/oracle divergence.
#[derive(Debug)]
pub enum Failure {
    Lib(Error),
    Divergence(Value),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Divergence(_) => 1,
            Failure::Lib(e) => match e.kind() {
                ErrorKind::Input => 2,
                ErrorKind::Precondition => 3,
                ErrorKind::Budget => 4,
                ErrorKind::Internal => 1,
            },
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Failure::Divergence(v) => v.clone(),
            Failure::Lib(e) => serde_json::json!({
                "error": { "kind": format!("{:?}", e.kind()).to_lowercase(), "message": e.to_string() }
            }),
        }
    }
}

fn resolve_budget(flag: Option<u64>) -> Result<Budget, Error> {
    if let Some(b) = flag {
        return Ok(Budget::new(b));
    }
    match std::env::var(BUDGET_ENV) {
        Ok(s) => s
            .trim()
            .parse()
            .map(Budget::new)
            .map_err(|_| Error::InvalidInput(format!("{BUDGET_ENV}={s:?} is not a non-negative integer"))),
        Err(std::env::VarError::NotPresent) => Ok(Budget::default()),
        Err(e) => Err(Error::InvalidInput(format!("{BUDGET_ENV}: {e}"))),
    }
}

pub fn parse_alpha(s: &str) -> Result<Rational, Error> {
    let a: ExtRational = s.parse()?;
    match a.finite() {
        Some(r) if *r >= Rational::one() => Ok(r.clone()),
        _ => Err(Error::InvalidInput(format!("--alpha must be a finite rational >= 1, got {s:?}"))),
    }
}

/// Files named directly, plus `.json` files of directories in sorted order.
fn expand(paths: &[PathBuf]) -> Result<Vec<PathBuf>, Error> {
    let mut out = Vec::new();
    for p in paths {
        if p.is_dir() {
            let mut entries: Vec<PathBuf> = std::fs::read_dir(p)?
                .map(|e| e.map(|e| e.path()))
                .collect::<std::io::Result<_>>()?;
            entries.retain(|e| e.is_file() && e.extension().is_some_and(|x| x == "json"));
            entries.sort();
            out.extend(entries);
        } else {
            out.push(p.clone());
        }
    }
    Ok(out)
}

fn emit(output: Option<&Path>, text: &str) -> Result<(), Error> {
    match output {
        Some(path) => std::fs::write(path, format!("{text}\n"))?,
        None => println!("{text}"),
    }
    Ok(())
}

fn fail(e: Error) -> ExitCode {
    let f = Failure::Lib(e);
    eprintln!("{}", f.to_json());
    ExitCode::from(f.exit_code())
}

/// Runs `work` over every input file; one result object, or one line per file for batches.
fn run_batch<F>(cli: &Cli, paths: &[PathBuf], work: F) -> ExitCode
where
    F: Fn(&Path) -> Result<Value, Failure> + Sync,
{
    let files = match expand(paths) {
        Ok(f) if f.is_empty() => return fail(Error::InvalidInput("no input files".into())),
        Ok(f) => f,
        Err(e) => return fail(e),
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.jobs.max(1)).build() {
        Ok(p) => p,
        Err(e) => return fail(Error::InvalidInput(format!("--jobs: {e}"))),
    };
    let results: Vec<Result<Value, Failure>> = pool.install(|| files.par_iter().map(|f| work(f)).collect());
    let mut code = 0u8;
    let text = if files.len() == 1 {
        match &results[0] {
            Ok(v) => v.to_string(),
            Err(f) => {
                code = f.exit_code();
                if let Failure::Lib(e) = f {
                    eprintln!("{}: {e}", files[0].display());
                    return ExitCode::from(code);
                }
                f.to_json().to_string()
            }
        }
    } else {
        let mut lines = Vec::with_capacity(files.len());
        for (file, r) in files.iter().zip(&results) {
            let body = match r {
                Ok(v) => serde_json::json!({ "file": file.display().to_string(), "result": v }),
                Err(f) => {
                    if code == 0 {
                        code = f.exit_code();
                    }
                    serde_json::json!({ "file": file.display().to_string(), "failure": f.to_json() })
                }
            };
            lines.push(body.to_string());
        }
        lines.join("\n")
    };
    if let Err(e) = emit(cli.output.as_deref(), &text) {
        return fail(e);
    }
    ExitCode::from(code)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let budget = match resolve_budget(cli.budget) {
        Ok(b) => b,
        Err(e) => return fail(e),
    };
    match &cli.command {
        Command::Bgmc(BgmcCommand::Classify(inputs)) => {
            run_batch(&cli, &inputs.paths, |p| commands::bgmc_classify(p, &budget))
        }
        Command::Bgmc(BgmcCommand::Enumerate { alpha, oracle, check, inputs }) => {
            let alpha = match parse_alpha(alpha) {
                Ok(a) => a,
                Err(e) => return fail(e),
            };
            run_batch(&cli, &inputs.paths, |p| commands::bgmc_enumerate(p, &alpha, *oracle, *check, &budget))
        }
        Command::Vcsp(VcspCommand::Solve { mode, enumerate, inputs }) => {
            let mode = match mode.resolve() {
                Ok(m) => m,
                Err(e) => return fail(e),
            };
            run_batch(&cli, &inputs.paths, |p| commands::vcsp_solve(p, mode.as_ref(), *enumerate, &budget))
        }
        Command::Vcsp(VcspCommand::Brute { mode, enumerate, inputs }) => {
            let mode = match mode.resolve() {
                Ok(m) => m,
                Err(e) => return fail(e),
            };
            run_batch(&cli, &inputs.paths, |p| commands::vcsp_brute(p, mode.as_ref(), *enumerate, &budget))
        }
        Command::Vcsp(VcspCommand::ClassifyLanguage(inputs)) => {
            run_batch(&cli, &inputs.paths, |p| commands::vcsp_classify_language(p, &budget))
        }
        Command::Vcsp(VcspCommand::Fix(inputs)) => run_batch(&cli, &inputs.paths, commands::vcsp_fix),
        Command::Vcsp(VcspCommand::Gadget { gamma, sidecar, input }) => {
            run_batch(&cli, std::slice::from_ref(input), |p| {
                commands::vcsp_gadget(p, gamma, sidecar.as_deref(), &budget)
            })
        }
        Command::Gen(g) => {
            let generated = match g {
                GenCommand::Bgmc { seed, n, q, p, count } => commands::gen_bgmc(*seed, *n, *q, *p, *count, &budget),
                GenCommand::Language { seed, class, domain, size, max_arity, count } => {
                    commands::gen_language(*seed, *class, *domain, *size, *max_arity, *count)
                }
                GenCommand::Instance { seed, language, n, m, mode, count } => mode
                    .resolve()
                    .and_then(|mode| commands::gen_instance(*seed, language, *n, *m, mode, *count)),
            };
            match generated.and_then(|items| write_generated(cli.output.as_deref(), items)) {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => fail(e),
            }
        }
    }
}

/// One item goes to stdout or the output file; several go to numbered files in the output directory.
fn write_generated(output: Option<&Path>, items: Vec<Value>) -> Result<(), Error> {
    if items.len() == 1 {
        return emit(output, &items[0].to_string());
    }
    let dir = output.ok_or_else(|| Error::InvalidInput("--count above 1 needs --output DIR".into()))?;
    std::fs::create_dir_all(dir)?;
    let width = (items.len() - 1).to_string().len();
    for (i, item) in items.iter().enumerate() {
        std::fs::write(dir.join(format!("{i:0width$}.json")), format!("{item}\n"))?;
    }
    Ok(())
}
