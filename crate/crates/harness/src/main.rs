use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mpclab::attack::{run_attack, AttackSpec};
use mpclab::config::{env_seed, ConfigFile};
use mpclab::fit::{fit_rows, read_rows, FitOptions};
use mpclab::report::RunReportJson;
use mpclab::sweep::{run_sweep, write_csv, HonestSpec, SweepSpec};
use mpclab::HarnessError;
use mpclab_core::adversary::{AdversarySpec, Strategy, STRATEGY_NAMES};
use mpclab_core::protocols::{random_inputs, RunConfig, PROTOCOLS};
use mpclab_core::{run_protocol, ProtocolId};

#[derive(Parser)]
#[command(name = "mpclab", version, about = "Simulate, sweep, fit and attack MPC-with-abort protocols")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one configuration and print its report as JSON.
    Run(RunArgs),
    /// Run a parameter grid and write one CSV row per (point, seed).
    Sweep(SweepArgs),
    /// Run one strategy over many seeds and report success rates.
    Attack(AttackArgs),
    /// Fit a log-log slope to sweep CSVs.
    Fit(FitArgs),
    /// List protocol names.
    ListProtocols,
    /// List adversary strategy names.
    ListStrategies,
}

#[derive(Args)]
struct Common {
    /// Flat `key = value` file; command-line flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    protocol: Option<String>,
    /// Root seed; `MPCLAB_SEED` is used when this is absent.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    lambda: Option<u32>,
    /// Circuit depth D of the evaluated function.
    #[arg(long, short = 'D')]
    depth: Option<u32>,
    #[arg(long = "f", alias = "function")]
    function: Option<String>,
    /// Input width in bits.
    #[arg(long)]
    width: Option<usize>,
    /// Write output here instead of stdout.
    #[arg(long, short = 'o')]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    h: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    /// Adversary strategy; `n - h` random parties are corrupted.
    #[arg(long)]
    strategy: Option<String>,
    #[arg(long)]
    sender: Option<u32>,
    /// Skip the all-honest rerun that measures communication.
    #[arg(long)]
    no_twin: bool,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_delimiter = ',')]
    n: Vec<usize>,
    #[arg(long, value_delimiter = ',', conflicts_with = "h_ratio")]
    h: Vec<usize>,
    /// Honest fraction; `h = round(ratio * n)`.
    #[arg(long)]
    h_ratio: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    alpha: Vec<f64>,
    /// Seeds per grid point.
    #[arg(long)]
    seeds: Option<u64>,
    #[arg(long)]
    strategy: Option<String>,
}

#[derive(Args)]
struct AttackArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    h: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    strategy: Option<String>,
    #[arg(long)]
    seeds: Option<u64>,
}

#[derive(Args)]
struct FitArgs {
    /// Sweep CSV files; rows are pooled.
    #[arg(long, required = true, num_args = 1..)]
    input: Vec<PathBuf>,
    /// Divide communication by log2(n)^k before fitting.
    #[arg(long, default_value_t = 1.0)]
    polylog_k: f64,
    #[arg(long, default_value_t = 0.95)]
    confidence: f64,
    /// Fit only this protocol's rows.
    #[arg(long)]
    protocol: Option<String>,
    #[arg(long, short = 'o')]
    output: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Attack(a) => cmd_attack(a),
        Command::Fit(a) => cmd_fit(a),
        Command::ListProtocols => {
            for (name, about) in PROTOCOLS {
                println!("{name:<26} {about}");
            }
            Ok(())
        }
        Command::ListStrategies => {
            for name in STRATEGY_NAMES {
                println!("{name}");
            }
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("mpclab: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn sink(path: Option<&Path>) -> Result<Box<dyn Write>, HarnessError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_json<T: serde::Serialize>(value: &T, path: Option<&Path>) -> Result<(), HarnessError> {
    let mut out = sink(path)?;
    serde_json::to_writer_pretty(&mut out, value).map_err(io::Error::from)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

/// Settings shared by every subcommand after merging flags and the file.
struct Resolved {
    file: ConfigFile,
    protocol: ProtocolId,
    seed: u64,
    lambda: u32,
    depth: u32,
    function: String,
    width: usize,
    output: Option<PathBuf>,
}

fn resolve(c: Common) -> Result<Resolved, HarnessError> {
    let file = ConfigFile::load_opt(c.config.as_deref())?;
    let protocol: String = file
        .pick_opt(c.protocol, "protocol")?
        .ok_or_else(|| HarnessError::config("missing --protocol"))?;
    Ok(Resolved {
        protocol: protocol.parse()?,
        seed: file.root_seed(c.seed, env_seed().as_deref(), 0)?,
        lambda: file.pick(c.lambda, "lambda", 8)?,
        depth: file.pick(c.depth, "depth", 8)?,
        function: file.pick(c.function, "function", "xor".to_string())?,
        width: file.pick(c.width, "width", 1)?,
        output: file.pick_opt(c.output, "output")?,
        file,
    })
}

fn strategy(file: &ConfigFile, cli: Option<String>) -> Result<Option<Strategy>, HarnessError> {
    file.pick_opt(cli, "strategy")?
        .map(|s: String| s.parse::<Strategy>().map_err(|e| HarnessError::config(e.to_string())))
        .transpose()
}

fn required<T>(v: Option<T>, name: &str) -> Result<T, HarnessError> {
    v.ok_or_else(|| HarnessError::config(format!("missing --{name}")))
}

fn cmd_run(a: RunArgs) -> Result<(), HarnessError> {
    let r = resolve(a.common)?;
    let n = required(r.file.pick_opt(a.n, "n")?, "n")?;
    let h = required(r.file.pick_opt(a.h, "h")?, "h")?;
    let mut cfg = RunConfig::new(n, h, r.seed);
    cfg.alpha = r.file.pick(a.alpha, "alpha", 2.0)?;
    cfg.lambda = r.lambda;
    cfg.depth = r.depth;
    cfg.function = r.function;
    cfg.width = r.width;
    cfg.sender = r.file.pick_opt(a.sender, "sender")?;
    cfg.measure_honest_twin = !a.no_twin && r.file.pick(None, "twin", true)?;
    let strat = strategy(&r.file, a.strategy)?;
    if let Some(s) = strat {
        if let Strategy::IsolationAttacker { sender, .. } = s {
            cfg.sender.get_or_insert(sender);
        }
        cfg.adversary = Some(AdversarySpec::random(n, h, s, r.seed).map_err(|e| HarnessError::config(e.to_string()))?);
    }
    let inputs = random_inputs(n, cfg.width, r.seed);
    let report = run_protocol(&cfg, r.protocol, &inputs)?;
    write_json(&RunReportJson::from(&report), r.output.as_deref())?;
    if cfg.adversary.is_none() && !(report.consistency_ok && report.matches_evaluator) {
        return Err(HarnessError::Invariant(format!(
            "all-honest run of {} at seed {} produced inconsistent or wrong outputs",
            r.protocol, r.seed
        )));
    }
    Ok(())
}

fn cmd_sweep(a: SweepArgs) -> Result<(), HarnessError> {
    let r = resolve(a.common)?;
    let ns = r.file.pick_list(a.n, "n", Vec::new())?;
    if ns.is_empty() {
        return Err(HarnessError::config("missing --n"));
    }
    let honest = match (a.h_ratio, a.h.is_empty()) {
        (Some(ratio), _) => HonestSpec::Ratio(ratio),
        (None, false) => HonestSpec::Fixed(a.h),
        (None, true) => match (r.file.get::<f64>("h_ratio")?, r.file.get_list::<usize>("h")?) {
            (Some(ratio), _) => HonestSpec::Ratio(ratio),
            (None, Some(hs)) => HonestSpec::Fixed(hs),
            (None, None) => return Err(HarnessError::config("missing --h or --h-ratio")),
        },
    };
    if let HonestSpec::Ratio(ratio) = honest {
        if !(ratio > 0.0 && ratio <= 1.0) {
            return Err(HarnessError::config(format!("--h-ratio {ratio} outside (0, 1]")));
        }
    }
    let mut spec = SweepSpec::new(r.protocol, ns, honest);
    spec.alphas = r.file.pick_list(a.alpha, "alpha", vec![2.0])?;
    spec.lambdas = vec![r.lambda];
    spec.depths = vec![r.depth];
    spec.seeds = r.file.pick(a.seeds, "seeds", 1)?;
    spec.root_seed = r.seed;
    spec.strategy = strategy(&r.file, a.strategy)?;
    spec.function = r.function;
    spec.width = r.width;

    let summary = run_sweep(&spec);
    for s in &summary.skipped {
        eprintln!(
            "mpclab: skipped n={} h={} alpha={}: {}",
            s.point.n, s.point.h, s.point.alpha, s.reason
        );
    }
    write_csv(&summary.rows, sink(r.output.as_deref())?)?;
    if spec.strategy.is_none() && summary.inconsistent() > 0 {
        return Err(HarnessError::Invariant(format!(
            "{} all-honest rows are inconsistent",
            summary.inconsistent()
        )));
    }
    Ok(())
}

fn cmd_attack(a: AttackArgs) -> Result<(), HarnessError> {
    let r = resolve(a.common)?;
    let n = required(r.file.pick_opt(a.n, "n")?, "n")?;
    let h = required(r.file.pick_opt(a.h, "h")?, "h")?;
    let strat = required(strategy(&r.file, a.strategy)?, "strategy")?;
    let mut spec = AttackSpec::new(r.protocol, strat, n, h);
    spec.alpha = r.file.pick(a.alpha, "alpha", 2.0)?;
    spec.lambda = r.lambda;
    spec.depth = r.depth;
    spec.seeds = r.file.pick(a.seeds, "seeds", 100)?;
    spec.root_seed = r.seed;
    spec.function = r.function;
    spec.width = r.width;
    let report = run_attack(&spec)?;
    write_json(&report, r.output.as_deref())
}

fn cmd_fit(a: FitArgs) -> Result<(), HarnessError> {
    if !(a.confidence > 0.0 && a.confidence < 1.0) {
        return Err(HarnessError::config(format!("--confidence {} outside (0, 1)", a.confidence)));
    }
    let mut rows = Vec::new();
    for path in &a.input {
        let f = File::open(path).map_err(|e| HarnessError::config(format!("{}: {e}", path.display())))?;
        rows.extend(read_rows(f)?);
    }
    let result = fit_rows(
        &rows,
        &FitOptions {
            polylog_k: a.polylog_k,
            confidence: a.confidence,
            protocol: a.protocol,
        },
    )?;
    write_json(&result, a.output.as_deref())
}
