use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use kapfree_core::bounds::EpsilonModel;
use kapfree_core::harness::{self, Command, ExperimentConfig, OutputFormat};
use kapfree_core::tensor::{Tensor, DEFAULT_CAP};

/// Dense AP-free sets from random difference sets, checked at desk scale.
#[derive(Parser)]
#[command(name = "kapfree", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// sample S, solve for the tensor, enumerate A, verify no k-AP
    Endtoend(Common),
    /// exhaustive partition/analytic rank classification
    RankAudit(Common),
    /// probability that Veronese images are independent
    Independence(Common),
    /// threshold s, r0, r and the two exponent terms
    Bounds(Common),
    /// fixed battery of identity checks
    VerifyLemmas(Common),
    /// position <-> exponent vector table of the monomial basis
    Monomials(Common),
    /// convert a tensor between the text and JSON forms
    ConvertTensor(Convert),
}

#[derive(Args, Clone)]
struct Common {
    #[arg(long, default_value_t = 5)]
    p: u32,
    #[arg(long, default_value_t = 3)]
    n: usize,
    #[arg(long, default_value_t = 3)]
    k: usize,
    /// tensor order (defaults to k-1)
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    s: Option<usize>,
    #[arg(long, default_value_t = 100)]
    trials: u64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    /// calibrated on a 0.01 grid when omitted (bounds)
    #[arg(long)]
    beta: Option<f64>,
    /// default | zero | <constant>
    #[arg(long, default_value = "default")]
    epsilon: String,
    /// last n of the bounds table
    #[arg(long)]
    n_max: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_CAP)]
    cap_enum: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// exact enumeration instead of Monte Carlo
    #[arg(long)]
    exact: bool,
    /// worker threads, 0 = all cores
    #[arg(long, default_value_t = 0)]
    workers: usize,
}

#[derive(Args)]
struct Convert {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, value_enum)]
    to: TensorForm,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum TensorForm {
    Json,
    Text,
}

fn config(command: Command, c: &Common) -> Result<ExperimentConfig, String> {
    let mut cfg = ExperimentConfig::new(command);
    cfg.p = c.p;
    cfg.n = c.n;
    cfg.k = c.k;
    cfg.d = c.d;
    cfg.s = c.s;
    cfg.trials = c.trials;
    cfg.seed = c.seed;
    cfg.alpha = c.alpha;
    cfg.beta = c.beta;
    cfg.epsilon = EpsilonModel::parse(&c.epsilon).map_err(|e| e.to_string())?;
    cfg.n_max = c.n_max;
    cfg.cap_enum = c.cap_enum;
    cfg.exact = c.exact;
    cfg.workers = c.workers;
    cfg.format = match c.format {
        Format::Json => OutputFormat::Json,
        Format::Csv => OutputFormat::Csv,
    };
    Ok(cfg)
}

fn emit(text: &str, out: Option<&PathBuf>) -> Result<(), String> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| format!("{}: {e}", path.display())),
        None => {
            print!("{text}");
            if !text.ends_with('\n') {
                println!();
            }
            Ok(())
        }
    }
}

fn fail(command: &str, msg: &str) -> ExitCode {
    eprintln!("{}", serde_json::json!({"command": command, "passed": false, "error": msg}));
    ExitCode::from(2)
}

fn convert(args: &Convert) -> ExitCode {
    let raw = match fs::read_to_string(&args.input) {
        Ok(s) => s,
        Err(e) => return fail("convert-tensor", &format!("{}: {e}", args.input.display())),
    };
    let parsed = if raw.trim_start().starts_with('{') {
        Tensor::from_json(&raw)
    } else {
        Tensor::from_text(&raw)
    };
    let tensor = match parsed {
        Ok(t) => t,
        Err(e) => return fail("convert-tensor", &e.to_string()),
    };
    let text = match args.to {
        TensorForm::Json => tensor.to_json(),
        TensorForm::Text => tensor.to_text(),
    };
    match emit(&text, args.out.as_ref()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail("convert-tensor", &e),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, common) = match &cli.command {
        Sub::Endtoend(c) => (Command::Endtoend, c),
        Sub::RankAudit(c) => (Command::RankAudit, c),
        Sub::Independence(c) => (Command::Independence, c),
        Sub::Bounds(c) => (Command::Bounds, c),
        Sub::VerifyLemmas(c) => (Command::VerifyLemmas, c),
        Sub::Monomials(c) => (Command::Monomials, c),
        Sub::ConvertTensor(args) => return convert(args),
    };
    let cfg = match config(command, common) {
        Ok(cfg) => cfg,
        Err(e) => return fail(command.name(), &e),
    };
    let report = match harness::run(&cfg) {
        Ok(r) => r,
        Err(e) => return fail(command.name(), &e.to_string()),
    };
    if let Err(e) = emit(&report.render(cfg.format), common.out.as_ref()) {
        return fail(command.name(), &e);
    }
    if report.passed {
        ExitCode::SUCCESS
    } else {
        for f in &report.failures {
            eprintln!("{}", serde_json::json!({"command": command.name(), "failure": f}));
        }
        ExitCode::from(1)
    }
}
