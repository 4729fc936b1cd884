//! Batch runner for the fibered calculus: one subcommand per experiment, JSON reports and
//! CSV curves, exit code 0 when every contract check passes, 1 on a contract failure, and 2
//! on a usage error.

mod commands;
mod settings;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use serde_json::json;
use settings::{Settings, UsageError};
use std::path::PathBuf;
use std::process::ExitCode;

/// Version tag of the JSON report layout.
const SCHEMA: &str = "fibered-report/1";

/// Environment variable fixing the worker-thread count.
const THREADS_ENV: &str = "FIBERED_THREADS";

#[derive(Parser, Debug)]
#[command(name = "fibered", version, about = "Experiments with a pseudodifferential calculus on a torus fibered over a circle")]
struct Cli {
    /// INI-style config: `[general]` plus one section per subcommand, `key = value` lines.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory receiving `<command>.json` and `<command>.csv` (stdout gets the JSON otherwise).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Print the CSV curve to stdout instead of the JSON report.
    #[arg(long, global = true)]
    csv: bool,
    /// Enumerate the registered symbols and problems.
    #[arg(long)]
    list_builtins: bool,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Quantize a symbol on a grid and check convention independence.
    Quantize(QuantizeArgs),
    /// Shell-norm decay of the composition residual `Â B̂ − (ab)^`.
    ComposeTest(ComposeArgs),
    /// Extrapolated essential norm against the symbol norm, with a rank-5 perturbation.
    EssNorm(EssNormArgs),
    /// Kernel/cokernel ladder and index.
    Fredholm(FredholmArgs),
    /// Boundary problem: ellipticity margins, index ladder, and solve.
    Bvp(BvpArgs),
    /// Obstruction invariant of a boundary problem (and the homotopy for example3).
    Obstruction(ObstructionArgs),
}

#[derive(Args, Debug)]
struct QuantizeArgs {
    /// Built-in name or `expr:<principal symbol>`.
    #[arg(long)]
    symbol: Option<String>,
    #[arg(long)]
    grid: Option<String>,
    /// `plus` or `minus`: which directional limit is used on `η = 0`.
    #[arg(long)]
    convention: Option<String>,
    /// Write the operator (JSON) to this file.
    #[arg(long)]
    output: Option<String>,
}

#[derive(Args, Debug)]
struct ComposeArgs {
    #[arg(long)]
    a: Option<String>,
    #[arg(long)]
    b: Option<String>,
    #[arg(long)]
    grid: Option<String>,
    #[arg(long)]
    shells: Option<String>,
    #[arg(long)]
    max_slope: Option<String>,
}

#[derive(Args, Debug)]
struct EssNormArgs {
    #[arg(long)]
    symbol: Option<String>,
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    shells: Option<String>,
    #[arg(long)]
    tolerance: Option<String>,
}

#[derive(Args, Debug)]
struct FredholmArgs {
    #[arg(long)]
    symbol: Option<String>,
    #[arg(long)]
    ladder: Option<String>,
    /// `square`, `base` (N_y = 0) or `fiber` (N_x = 0).
    #[arg(long)]
    shape: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    expect_index: Option<String>,
}

#[derive(Args, Debug)]
struct BvpArgs {
    /// `example3`, `example4:<n>`, `example4-half` or `scalar`.
    #[arg(long)]
    problem: Option<String>,
    #[arg(long)]
    grid: Option<String>,
    #[arg(long)]
    ladder: Option<String>,
    /// Interior and boundary data files (JSON) instead of seeded random data.
    #[arg(long, num_args = 2, value_names = ["F_JSON", "G_JSON"])]
    solve: Option<Vec<String>>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    expect_index: Option<String>,
}

#[derive(Args, Debug)]
struct ObstructionArgs {
    /// `example3` or `example4:<n>`.
    #[arg(long)]
    problem: Option<String>,
    /// Degree of the base symbol for `example4:<n>` (−1, 0, 1).
    #[arg(long, allow_hyphen_values = true)]
    w: Option<String>,
    #[arg(long)]
    truncation: Option<String>,
    /// `rescaled` or `difference`.
    #[arg(long)]
    representative: Option<String>,
    /// Skip the homotopy for example3.
    #[arg(long)]
    no_homotopy: bool,
    #[arg(long, allow_hyphen_values = true)]
    expect: Option<String>,
}

fn settings_for(cli: &Cli, cmd: &Command) -> Result<(&'static str, Settings)> {
    let section = match cmd {
        Command::Quantize(_) => "quantize",
        Command::ComposeTest(_) => "compose-test",
        Command::EssNorm(_) => "ess-norm",
        Command::Fredholm(_) => "fredholm",
        Command::Bvp(_) => "bvp",
        Command::Obstruction(_) => "obstruction",
    };
    let mut s = Settings::load(cli.config.as_deref(), section)?;
    match cmd {
        Command::Quantize(a) => {
            s.set("symbol", a.symbol.clone());
            s.set("grid", a.grid.clone());
            s.set("convention", a.convention.clone());
            s.set("output", a.output.clone());
        }
        Command::ComposeTest(a) => {
            s.set("a", a.a.clone());
            s.set("b", a.b.clone());
            s.set("grid", a.grid.clone());
            s.set("shells", a.shells.clone());
            s.set("max-slope", a.max_slope.clone());
        }
        Command::EssNorm(a) => {
            s.set("symbol", a.symbol.clone());
            s.set("n", a.n.clone());
            s.set("shells", a.shells.clone());
            s.set("tolerance", a.tolerance.clone());
        }
        Command::Fredholm(a) => {
            s.set("symbol", a.symbol.clone());
            s.set("ladder", a.ladder.clone());
            s.set("shape", a.shape.clone());
            s.set("expect-index", a.expect_index.clone());
        }
        Command::Bvp(a) => {
            s.set("problem", a.problem.clone());
            s.set("grid", a.grid.clone());
            s.set("ladder", a.ladder.clone());
            s.set("seed", a.seed.clone());
            s.set("expect-index", a.expect_index.clone());
            if let Some(v) = &a.solve {
                s.set("f", v.first().cloned());
                s.set("g", v.get(1).cloned());
            }
        }
        Command::Obstruction(a) => {
            s.set("problem", a.problem.clone());
            s.set("w", a.w.clone());
            s.set("truncation", a.truncation.clone());
            s.set("representative", a.representative.clone());
            s.set("expect", a.expect.clone());
            if a.no_homotopy {
                s.set("homotopy", Some("false".into()));
            }
        }
    }
    Ok((section, s))
}

fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v.trim().parse().map_err(|_| settings::usage(format!("{THREADS_ENV} must be a positive integer, not '{v}'")))?;
        if n == 0 {
            return Err(settings::usage(format!("{THREADS_ENV} must be positive")));
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().ok();
    }
    Ok(())
}

/// Writes to stdout; a closed pipe (e.g. `| head`) is not an error.
fn emit(text: &str) -> Result<()> {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn run(cli: &Cli) -> Result<bool> {
    configure_threads()?;
    if cli.list_builtins {
        emit(&format!("{}\n", serde_json::to_string_pretty(&commands::list_builtins())?))?;
        return Ok(true);
    }
    let Some(cmd) = &cli.command else {
        return Err(settings::usage("no subcommand given (see --help)"));
    };
    let (section, s) = settings_for(cli, cmd)?;
    let outcome = match cmd {
        Command::Quantize(_) => commands::quantize_cmd(&s),
        Command::ComposeTest(_) => commands::compose_cmd(&s),
        Command::EssNorm(_) => commands::ess_norm_cmd(&s),
        Command::Fredholm(_) => commands::fredholm_cmd(&s),
        Command::Bvp(_) => commands::bvp_cmd(&s),
        Command::Obstruction(_) => commands::obstruction_cmd(&s),
    }?;
    let pass = outcome.checks.iter().all(|c| c.pass);
    let doc = json!({
        "schema": SCHEMA,
        "command": section,
        "settings": s.entries(),
        "checks": outcome.checks,
        "pass": pass,
        "report": outcome.report,
    });
    let text = serde_json::to_string_pretty(&doc)?;
    if let Some(dir) = &cli.out {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join(format!("{section}.json")), format!("{text}\n"))?;
        if let Some(csv) = &outcome.csv {
            std::fs::write(dir.join(format!("{section}.csv")), csv)?;
        }
    }
    if cli.csv {
        emit(outcome.csv.as_deref().unwrap_or(""))?;
    } else {
        emit(&format!("{text}\n"))?;
    }
    for c in outcome.checks.iter().filter(|c| !c.pass) {
        eprintln!("contract failed: {} (value {})", c.name, c.value);
    }
    Ok(pass)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) if e.downcast_ref::<UsageError>().is_some() => {
            eprintln!("usage error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
