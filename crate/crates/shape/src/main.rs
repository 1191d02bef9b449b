use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use shape::config::{EvaluatorSpec, RunConfig};
use shape::format::{read_dataset, write_dataset, write_dataset_to};
use shape::output::{render_table, report_json, write_csv};
use shape::run::run_score;
use shape::{echo, ThreadExecutor};
use shape_core::toybench::{generate, Regime, RegimeSpec, ToyModel, ToyModelKind};
use shape_core::utility::DEFAULT_COALITION_CAP;
use shape_core::PermutationPlan;

const USAGE: u8 = 2;
const FAILURE: u8 = 1;

#[derive(Parser)]
#[command(
    name = "shape",
    version,
    about = "Modality contribution, cooperation and perceptual scores"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Write a synthetic regime dataset.
    Generate(GenerateArgs),
    /// Score a dataset with a toy model or an external evaluator.
    Score(ScoreArgs),
    /// Run the built-in Shapley consistency checks.
    Selftest,
    /// Serve a toy model over the evaluator protocol on stdin/stdout.
    ProtocolEcho(EchoArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// dominant-redundant, correlated-complementary or indispensable-xor
    #[arg(long)]
    regime: Regime,
    #[arg(long = "n")]
    n_samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 2)]
    classes: usize,
    /// Class proportions, comma separated (default: balanced).
    #[arg(long, value_delimiter = ',')]
    balance: Option<Vec<f64>>,
    /// Modality dimensions, comma separated.
    #[arg(long, value_delimiter = ',')]
    dims: Option<Vec<usize>>,
    #[arg(long)]
    noise: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    xor_bias: f64,
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ScoreArgs {
    #[arg(long)]
    dataset: PathBuf,
    /// Toy model: majority, nearest-centroid, additive-linear, interaction.
    #[arg(long, conflicts_with = "external", required_unless_present = "external")]
    model: Option<ToyModelKind>,
    /// Command line of an external evaluator, run through `sh -c`.
    #[arg(long)]
    external: Option<String>,
    /// Training data for the toy model (default: the scored dataset).
    #[arg(long, conflicts_with = "external")]
    train: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = PermutationPlan::DEFAULT_REPEATS)]
    repeats: usize,
    #[arg(long, default_value_t = DEFAULT_COALITION_CAP)]
    cap: usize,
    /// Cooperation set as a coalition key such as `V+T`; repeatable.
    #[arg(long = "coop")]
    cooperation: Vec<String>,
    /// Show Z_f-normalized cooperation in the printed table.
    #[arg(long)]
    normalize_cooperation: bool,
    /// Value replacing absent modalities.
    #[arg(long, default_value_t = 0.0)]
    fill: f64,
    /// Per-request timeout for external evaluators, in seconds.
    #[arg(long, default_value_t = 300.0)]
    timeout: f64,
    #[arg(long)]
    out_json: Option<PathBuf>,
    #[arg(long)]
    out_csv: Option<PathBuf>,
    /// Do not print the table.
    #[arg(long, short)]
    quiet: bool,
}

#[derive(Args)]
struct EchoArgs {
    #[arg(long)]
    train: PathBuf,
    #[arg(long)]
    model: ToyModelKind,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Cmd::Generate(a) => cmd_generate(a),
        Cmd::Score(a) => cmd_score(a),
        Cmd::Selftest => cmd_selftest(),
        Cmd::ProtocolEcho(a) => cmd_echo(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(FAILURE)
        }
    }
}

fn usage(message: impl std::fmt::Display) -> anyhow::Result<ExitCode> {
    eprintln!("error: {message}");
    Ok(ExitCode::from(USAGE))
}

fn cmd_generate(a: GenerateArgs) -> anyhow::Result<ExitCode> {
    let mut spec = RegimeSpec::new(a.regime, a.n_samples, a.seed);
    spec.n_classes = a.classes;
    spec.class_balance = a.balance.unwrap_or_else(|| vec![1.0 / a.classes as f64; a.classes]);
    if let Some(d) = a.dims {
        spec.dims = d;
    }
    if let Some(n) = a.noise {
        spec.noise = n;
    }
    spec.xor_bias = a.xor_bias;
    if let Err(e) = spec.validate() {
        return usage(e);
    }
    let ds = generate(&spec).context("generate")?;
    match a.out {
        Some(path) => write_dataset(&ds, &path)?,
        None => write_dataset_to(&ds, BufWriter::new(io::stdout().lock()))?,
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_score(a: ScoreArgs) -> anyhow::Result<ExitCode> {
    if !a.timeout.is_finite() || a.timeout <= 0.0 {
        return usage("--timeout must be a positive number of seconds");
    }
    let evaluator = match (a.model, a.external) {
        (Some(model), None) => EvaluatorSpec::Toy { model },
        (None, Some(command)) => EvaluatorSpec::External { command },
        _ => return usage("give exactly one of --model and --external"),
    };
    let config = RunConfig {
        dataset: a.dataset,
        train: a.train,
        evaluator,
        seed: a.seed,
        repeats: a.repeats,
        cap: a.cap,
        fill: a.fill,
        cooperation: (!a.cooperation.is_empty()).then_some(a.cooperation),
        normalize_cooperation: a.normalize_cooperation,
        timeout: Duration::from_secs_f64(a.timeout),
        out_json: a.out_json,
        out_csv: a.out_csv,
    };
    let executor = match ThreadExecutor::from_env() {
        Ok(x) => x,
        Err(e) => return usage(e),
    };
    let report = match run_score(&config, &executor) {
        Ok(out) => out.report,
        Err(e) if e.is_usage() => return usage(e),
        Err(e) => return Err(e.into()),
    };

    if let Some(path) = &config.out_json {
        std::fs::write(path, report_json(&report)).with_context(|| format!("writing {}", path.display()))?;
    }
    if let Some(path) = &config.out_csv {
        let file = std::fs::File::create(path).with_context(|| format!("writing {}", path.display()))?;
        write_csv(&report, BufWriter::new(file)).with_context(|| format!("writing {}", path.display()))?;
    }
    if !a.quiet {
        print!("{}", render_table(&report, config.normalize_cooperation));
    }
    if report.partial {
        for e in &report.errors {
            eprintln!("error: {e}");
        }
        return Ok(ExitCode::from(FAILURE));
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_selftest() -> anyhow::Result<ExitCode> {
    let checks = shape_core::selftest::run();
    let mut out = io::stdout().lock();
    for c in &checks {
        writeln!(
            out,
            "{} {} ({})",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.detail
        )?;
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    writeln!(out, "{} checks, {failed} failed", checks.len())?;
    Ok(if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(FAILURE)
    })
}

fn cmd_echo(a: EchoArgs) -> anyhow::Result<ExitCode> {
    let train = read_dataset(&a.train).with_context(|| format!("reading {}", a.train.display()))?;
    let model = ToyModel::fit(a.model, &train)?;
    echo::serve(&model, io::stdin().lock(), io::stdout().lock())?;
    Ok(ExitCode::SUCCESS)
}
