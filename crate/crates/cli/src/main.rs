//! `nullshell`: verification, shell reports, figure data and product tables
//! for null shells obtained by cut and paste.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;
mod products;
mod sweep;
mod verify;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use nullshell::expr::{parse, ParseOptions};
use serde::Serialize;

use config::{JumpConfig, Overrides, RunConfig};

#[derive(Parser)]
#[command(name = "nullshell", version, about = "Null thin shells from cut-and-paste matchings")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the invariant suite and write a JSON report; exit 1 if any check fails.
    Verify(Common),
    /// Classification and ρ / j / p statistics over the grid.
    ShellReport(Common),
    /// CSV of v,r,dvH,p,rho,jr over the grid.
    FigureData(Common),
    /// Model-product pairings for each mollifier and test function.
    Products(Common),
    /// Dump the AST of a jump expression.
    Parse(Common),
    /// Print the configuration schema with all defaults.
    Schema(Common),
}

#[derive(Args, Clone, Default)]
struct Common {
    /// TOML run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Cosmological constant Λ.
    #[arg(long, allow_hyphen_values = true)]
    lambda: Option<f64>,
    /// Jump function expression in v, z2..zN and r.
    #[arg(long, allow_hyphen_values = true)]
    expr: Option<String>,
    /// Example-family parameter a.
    #[arg(long, allow_hyphen_values = true)]
    a: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    b: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    c: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    h0: Option<f64>,
    /// lo:hi:step
    #[arg(long, allow_hyphen_values = true)]
    v_range: Option<String>,
    /// lo:hi:step, lo > 0
    #[arg(long, allow_hyphen_values = true)]
    r_range: Option<String>,
    /// Comma-separated decreasing ε values.
    #[arg(long, value_delimiter = ',')]
    eps: Option<Vec<f64>>,
    /// Dimension 𝔫 of the shell (spacetime dimension 𝔫 + 1).
    #[arg(long)]
    dim_n: Option<usize>,
}

impl Common {
    fn overrides(&self) -> Overrides {
        Overrides {
            out: self.out.clone(),
            lambda: self.lambda,
            dim_n: self.dim_n,
            expr: self.expr.clone(),
            a: self.a,
            b: self.b,
            c: self.c,
            h0: self.h0,
            v_range: self.v_range.clone(),
            r_range: self.r_range.clone(),
            eps: self.eps.clone(),
        }
    }

    fn config(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::from_file(p)?,
            None => RunConfig::default(),
        };
        cfg.apply(&self.overrides())?;
        Ok(cfg)
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut so = std::io::stdout().lock();
            so.write_all(text.as_bytes())?;
            so.flush()?;
            Ok(())
        }
    }
}

fn json<T: Serialize>(report: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(report)?;
    s.push('\n');
    Ok(s)
}

#[derive(Serialize)]
struct ParseDump {
    command: &'static str,
    input: String,
    dim_n: usize,
    normalized: String,
    tree: String,
    uses_v: bool,
    constant: Option<f64>,
}

/// Returns whether every check passed.
fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Schema(c) => {
            emit(c.out.as_deref(), &config::schema())?;
            Ok(true)
        }
        Command::Parse(c) => {
            let cfg = c.config()?;
            let input = match &cfg.jump {
                JumpConfig::Expression { expr } => expr.clone(),
                _ => bail!("parse needs --expr or a jump expression in the config"),
            };
            let e = parse(&input, ParseOptions::new(cfg.dim_n))?;
            let dump = ParseDump {
                command: "parse",
                dim_n: cfg.dim_n,
                normalized: e.to_string(),
                tree: e.tree(),
                uses_v: e.uses_v(),
                constant: e.constant_value(),
                input,
            };
            emit(cfg.out.as_deref(), &json(&dump)?)?;
            Ok(true)
        }
        Command::Verify(c) => {
            let cfg = c.config()?.load()?;
            let report = verify::run(&cfg);
            emit(cfg.raw.out.as_deref(), &json(&report)?)?;
            Ok(report.pass)
        }
        Command::ShellReport(c) => {
            let cfg = c.config()?.load()?;
            let report = sweep::shell_report(&cfg);
            emit(cfg.raw.out.as_deref(), &json(&report)?)?;
            Ok(report.pass)
        }
        Command::FigureData(c) => {
            let cfg = c.config()?.load()?;
            let csv = sweep::figure_csv(&cfg)?;
            emit(cfg.raw.out.as_deref(), &csv)?;
            Ok(true)
        }
        Command::Products(c) => {
            let cfg = c.config()?.load()?;
            let report = products::run(&cfg);
            emit(cfg.raw.out.as_deref(), &json(&report)?)?;
            Ok(report.pass)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
