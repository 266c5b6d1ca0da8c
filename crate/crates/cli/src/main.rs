//! `kdist`: parameter reports, simulations, sweeps and checks for the
//! k-distinctness staggered quantum walk.

use std::fs;
use std::io::{IsTerminal, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use kdist_core::experiments::{self, ExperimentConfig, OutputFormat, Report};
use kdist_core::full::DumpHeader;
use kdist_core::{Execution, StepMode};

#[derive(Parser, Debug)]
#[command(
    name = "kdist",
    version,
    about = "Staggered quantum walk for element k-distinctness"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    #[command(flatten)]
    flags: Flags,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// r, t1, t2 in both modes, success probabilities, spectrum, query counts.
    Params,
    /// Marked probability after each main block in the reduced model.
    SimulateReduced,
    /// Brute-force walk on the full vertex set, compared with the reduced model.
    SimulateFull,
    /// Best t1 for each t2 in a range.
    SweepT2,
    /// Marked probability against t1 at a fixed t2.
    SweepT1,
    /// Exact success probability along a ladder of N.
    Convergence,
    /// Built-in numerical cross-checks; exit status 1 if any fails.
    Verify,
    /// Measure the final full-walk state with a seeded RNG.
    Sample,
    /// Two-register simulation carrying the oracle queries.
    Microsim,
}

#[derive(Args, Debug, Default)]
struct Flags {
    /// JSON config file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    n: Option<usize>,
    #[arg(long, global = true)]
    k: Option<usize>,
    /// Override the default r = round(N^(k/(k+1))).
    #[arg(long, global = true)]
    r: Option<usize>,
    /// Largest list value.
    #[arg(long, global = true)]
    m: Option<u64>,
    #[arg(long, global = true)]
    t1: Option<usize>,
    #[arg(long, global = true)]
    t2: Option<usize>,
    #[arg(long, global = true, value_parser = parse_mode)]
    mode: Option<StepMode>,
    #[arg(long, global = true)]
    samples: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_parser = parse_format)]
    format: Option<OutputFormat>,
    /// Replaces every check tolerance.
    #[arg(long, global = true)]
    tolerance: Option<f64>,
    /// Largest state-vector dimension the full simulators may allocate.
    #[arg(long, global = true)]
    cap: Option<u64>,
    /// Inclusive range `lo:hi`.
    #[arg(long, global = true, value_parser = parse_range)]
    t1_range: Option<[usize; 2]>,
    /// Inclusive range `lo:hi`.
    #[arg(long, global = true, value_parser = parse_range)]
    t2_range: Option<[usize; 2]>,
    /// Comma-separated N values; may be empty.
    #[arg(long, global = true, value_parser = parse_usize_list)]
    ladder: Option<Indices>,
    /// Comma-separated list values x_1..x_N.
    #[arg(long, global = true, value_parser = parse_u64_list)]
    values: Option<Values>,
    /// Comma-separated 1-based positions of the colliding set.
    #[arg(long, global = true, value_parser = parse_usize_list)]
    collision: Option<Indices>,
    /// Skip a verify suite (reduced, full, microsim); repeatable.
    #[arg(long, global = true, value_delimiter = ',')]
    skip: Vec<String>,
    /// Write the final full state (binary, or JSON for a `.json` path).
    #[arg(long, global = true)]
    dump: Option<PathBuf>,
    /// Run without the thread pool.
    #[arg(long, global = true)]
    sequential: bool,
}

// Aliases keep clap from treating the flags as repeatable.
type Indices = Vec<usize>;
type Values = Vec<u64>;

fn parse_mode(s: &str) -> Result<StepMode, String> {
    s.parse().map_err(|e: kdist_core::Error| e.to_string())
}

fn parse_format(s: &str) -> Result<OutputFormat, String> {
    s.parse().map_err(|e: kdist_core::Error| e.to_string())
}

fn parse_range(s: &str) -> Result<[usize; 2], String> {
    let (lo, hi) = s.split_once(':').ok_or("expected lo:hi")?;
    let lo = lo.trim().parse().map_err(|_| format!("bad bound `{lo}`"))?;
    let hi = hi.trim().parse().map_err(|_| format!("bad bound `{hi}`"))?;
    Ok([lo, hi])
}

fn parse_list<T: std::str::FromStr>(s: &str) -> Result<Vec<T>, String> {
    s.split(',')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .map(|x| x.parse().map_err(|_| format!("bad list entry `{x}`")))
        .collect()
}

fn parse_usize_list(s: &str) -> Result<Vec<usize>, String> {
    parse_list(s)
}

fn parse_u64_list(s: &str) -> Result<Vec<u64>, String> {
    parse_list(s)
}

impl Flags {
    fn to_config(&self) -> ExperimentConfig {
        ExperimentConfig {
            n: self.n,
            k: self.k,
            r: self.r,
            m: self.m,
            t1: self.t1,
            t2: self.t2,
            mode: self.mode,
            samples: self.samples,
            seed: self.seed,
            t1_range: self.t1_range,
            t2_range: self.t2_range,
            ladder: self.ladder.clone(),
            values: self.values.clone(),
            collision: self.collision.clone(),
            tolerance: self.tolerance,
            skip: (!self.skip.is_empty()).then(|| self.skip.clone()),
            cap: self.cap,
            out: self.out.as_ref().map(|p| p.display().to_string()),
            format: self.format,
        }
    }
}

/// Exit status 2 for problems with the inputs.
#[derive(Debug)]
struct ConfigError(anyhow::Error);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:#}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn config_err(e: impl Into<anyhow::Error>) -> anyhow::Error {
    ConfigError(e.into()).into()
}

/// Core errors caused by the inputs become config errors.
fn classify(e: kdist_core::Error) -> anyhow::Error {
    if e.is_config() {
        config_err(e)
    } else {
        e.into()
    }
}

struct Style {
    color: bool,
}

impl Style {
    fn detect() -> Self {
        let no_color = std::env::var_os("NO_COLOR").is_some_and(|v| !v.is_empty());
        Self {
            color: !no_color && std::io::stderr().is_terminal(),
        }
    }

    fn paint(&self, code: &str, text: &str) -> String {
        if self.color {
            format!("\x1b[{code}m{text}\x1b[0m")
        } else {
            text.to_string()
        }
    }
}

fn default_format(command: Command) -> OutputFormat {
    match command {
        Command::SimulateReduced
        | Command::SimulateFull
        | Command::SweepT2
        | Command::SweepT1
        | Command::Convergence => OutputFormat::Csv,
        _ => OutputFormat::Json,
    }
}

fn load_config(flags: &Flags) -> anyhow::Result<ExperimentConfig> {
    let base = match &flags.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading config {}", path.display()))
                .map_err(config_err)?;
            ExperimentConfig::from_json(&text).map_err(classify)?
        }
        None => ExperimentConfig::default(),
    };
    Ok(base.overlay(flags.to_config()))
}

fn write_dump(path: &Path, header: DumpHeader, state: &kdist_core::full::FullState) -> anyhow::Result<()> {
    let file = fs::File::create(path)
        .with_context(|| format!("creating {}", path.display()))
        .map_err(config_err)?;
    let mut out = std::io::BufWriter::new(file);
    if path.extension().is_some_and(|e| e == "json") {
        serde_json::to_writer(&mut out, &state.to_json(header))?;
    } else {
        state.write_binary(header, &mut out)?;
    }
    out.flush()?;
    Ok(())
}

fn emit(text: &str, out: Option<&str>) -> anyhow::Result<()> {
    match out {
        Some(path) => fs::write(path, text)
            .with_context(|| format!("writing {path}"))
            .map_err(config_err),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

/// Per-check lines on stderr for `verify`; stdout keeps the report.
fn summarize_verify(report: &experiments::VerifyReport, style: &Style) {
    for c in &report.checks {
        let tag = if c.passed {
            style.paint("32", "PASS")
        } else {
            style.paint("31", "FAIL")
        };
        eprintln!(
            "{tag} {}/{} measured={:e} tolerance={:e}",
            c.suite, c.name, c.measured, c.tolerance
        );
    }
}

fn run(cli: Cli, style: &Style) -> anyhow::Result<bool> {
    let config = load_config(&cli.flags)?;
    let format = config.format.unwrap_or_else(|| default_format(cli.command));
    let exec = if cli.flags.sequential {
        Execution::Sequential
    } else {
        Execution::default()
    };

    fn finish<R: Report>(report: &R, format: OutputFormat, out: Option<&str>) -> anyhow::Result<bool> {
        emit(&report.render(format), out)?;
        Ok(report.passed())
    }

    let out = config.out.as_deref();
    match cli.command {
        Command::Params => finish(
            &experiments::params_report(&config).map_err(classify)?,
            format,
            out,
        ),
        Command::SimulateReduced => finish(
            &experiments::simulate_reduced(&config).map_err(classify)?,
            format,
            out,
        ),
        Command::SimulateFull => {
            let sim = experiments::simulate_full(&config, exec).map_err(classify)?;
            if let Some(path) = &cli.flags.dump {
                let r = &sim.report;
                write_dump(path, DumpHeader::new(r.n, r.k, r.r), &sim.state)?;
            }
            finish(&sim.report, format, out)
        }
        Command::SweepT2 => finish(
            &experiments::sweep_t2(&config, exec).map_err(classify)?,
            format,
            out,
        ),
        Command::SweepT1 => finish(&experiments::sweep_t1(&config).map_err(classify)?, format, out),
        Command::Convergence => finish(
            &experiments::convergence(&config, exec).map_err(classify)?,
            format,
            out,
        ),
        Command::Verify => {
            let report = experiments::verify(&config, exec).map_err(classify)?;
            summarize_verify(&report, style);
            finish(&report, format, out)
        }
        Command::Sample => finish(
            &experiments::sample(&config, exec).map_err(classify)?,
            format,
            out,
        ),
        Command::Microsim => finish(
            &experiments::microsim(&config, exec).map_err(classify)?,
            format,
            out,
        ),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let style = Style::detect();
    let command = cli.command;
    match run(cli, &style) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!(
                "{}: {command:?} reported a failed check",
                style.paint("31", "error")
            );
            ExitCode::from(1)
        }
        Err(e) => {
            let code = if e.downcast_ref::<ConfigError>().is_some() {
                2
            } else {
                1
            };
            eprintln!("{}: {e:#}", style.paint("31", "error"));
            ExitCode::from(code)
        }
    }
}
