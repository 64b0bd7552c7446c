use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use netgame::config::KeyValues;
use netgame::solver::DEFAULT_TOL;

mod commands;

const DEFAULT_MAX_ORDER: usize = 10;

/// Bayesian-Nash equilibria of linear-quadratic network games under local
/// network information.
#[derive(Debug, Parser)]
#[command(name = "netgame", version)]
struct Cli {
    /// Key=value config file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output CSV path (stdout when omitted).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Fixed-point stopping tolerance.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Highest walk length for `walks`.
    #[arg(long, global = true)]
    max_order: Option<usize>,
    /// Worker threads.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Override or add a config entry, e.g. `--set lambda=0.2`.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    set: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Solve the full type space and print one action per type.
    Solve,
    /// Evaluate a closed-form family.
    ClosedForm,
    /// Core-size welfare sweep on core-periphery graphs.
    SweepWelfare,
    /// Interim posterior table.
    Posterior,
    /// Expected walk counts per type and length.
    Walks,
    /// Closed form (or complete information) against the full solve.
    Compare,
    /// List the graphs of a class.
    Enumerate,
}

impl Command {
    fn needs_lambda(self) -> bool {
        matches!(self, Command::Solve | Command::ClosedForm | Command::SweepWelfare | Command::Compare)
    }
}

/// Everything a command needs, validated before any computation.
#[derive(Debug)]
pub struct RunConfig {
    pub command: Command,
    pub kv: KeyValues,
    pub n: usize,
    pub lambda: Option<f64>,
    pub tol: f64,
    pub max_order: usize,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    fn from_cli(cli: &Cli) -> Result<Self> {
        let mut kv = match &cli.config {
            Some(path) => KeyValues::load(path)?,
            None => KeyValues::default(),
        };
        for entry in &cli.set {
            let (k, v) = entry
                .split_once('=')
                .with_context(|| format!("--set expects KEY=VALUE, got `{entry}`"))?;
            kv.set(k.trim(), v.trim());
        }
        let n: usize = kv.require_value("n")?;
        let lambda: Option<f64> = kv.parse_value("lambda")?;
        if cli.command.needs_lambda() {
            let l = lambda.context("missing config key `lambda`")?;
            netgame::solver::check_lambda(n, l)?;
        }
        let tol = match cli.tol {
            Some(t) => t,
            None => kv.parse_value("tol")?.unwrap_or(DEFAULT_TOL),
        };
        if !(tol > 0.0 && tol < 1.0) {
            bail!("tolerance must lie in (0, 1), got {tol}");
        }
        let max_order = match cli.max_order {
            Some(s) => s,
            None => kv.parse_value("max_order")?.unwrap_or(DEFAULT_MAX_ORDER),
        };
        if let Some(dir) = cli.out.as_ref().and_then(|p| p.parent()) {
            if !dir.as_os_str().is_empty() && !dir.is_dir() {
                bail!("output directory {} does not exist", dir.display());
            }
        }
        Ok(RunConfig {
            command: cli.command,
            kv,
            n,
            lambda,
            tol,
            max_order,
            out: cli.out.clone(),
        })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda.unwrap_or(0.0)
    }
}

fn run(cli: Cli) -> Result<()> {
    if let Some(t) = cli.threads {
        if t == 0 {
            bail!("--threads must be at least 1");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .context("thread pool")?;
    }
    let cfg = RunConfig::from_cli(&cli)?;
    let mut buf = Vec::new();
    commands::dispatch(&cfg, &mut buf)?;
    match &cfg.out {
        Some(path) => fs::write(path, &buf).with_context(|| format!("writing {}", path.display()))?,
        None => std::io::stdout().lock().write_all(&buf)?,
    }
    Ok(())
}

fn one_line(msg: &str) -> String {
    msg.lines().map(str::trim).filter(|l| !l.is_empty()).collect::<Vec<_>>().join(" ")
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.render().to_string();
            let first = text.lines().next().unwrap_or("invalid arguments");
            eprintln!("{}", one_line(first));
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", one_line(&format!("{e:#}")));
            ExitCode::FAILURE
        }
    }
}
