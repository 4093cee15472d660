use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use turing_rd_cli::config::CONFIG_HELP;
use turing_rd_cli::{
    cmd_analyze, cmd_simulate, cmd_sweep, export_pattern, output_dir, parse_config, CliError,
    ExperimentConfig,
};

#[derive(Parser)]
#[command(
    name = "turing-rd",
    version,
    about = "Turing instability analysis and simulation for a ratio-dependent predator-prey model",
    after_long_help = CONFIG_HELP
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Equilibrium, stability classification and critical d2.
    Analyze(Overrides),
    /// Integrate the PDE and write snapshots and norm series.
    Simulate(Overrides),
    /// Stability map over a (d1, d2) grid.
    Sweep(Overrides),
    /// Write the first-order pattern profile.
    Pattern(Overrides),
}

#[derive(Args)]
#[command(after_long_help = CONFIG_HELP)]
struct Overrides {
    /// Configuration file (see --help for keys and defaults).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory [default: $TURING_RD_OUT/<command> or ./turing-rd-out/<command>].
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    d1: Option<f64>,
    #[arg(long)]
    d2: Option<f64>,
    /// Pattern amplitude.
    #[arg(long)]
    s: Option<f64>,
    /// Mesh size.
    #[arg(long)]
    h: Option<f64>,
    /// Time step, or `auto`.
    #[arg(long)]
    dt: Option<String>,
    #[arg(long)]
    t_end: Option<f64>,
    #[arg(long)]
    steady_tol: Option<f64>,
    #[arg(long)]
    probe_x: Option<f64>,
}

impl Overrides {
    /// Loads the config file and folds the flags in as extra `key = value`
    /// lines, so they get the same parsing and validation.
    fn load(&self) -> Result<ExperimentConfig, CliError> {
        let mut text = match &self.config {
            Some(path) => std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?,
            None => String::new(),
        };
        let mut flag = |key: &str, value: Option<String>| {
            if let Some(v) = value {
                // drop the file's own setting so the flag wins
                text = text
                    .lines()
                    .map(|l| {
                        let body = l.split('#').next().unwrap_or("");
                        match body.split_once('=') {
                            Some((k, _)) if k.trim() == key => "",
                            _ => l,
                        }
                    })
                    .collect::<Vec<_>>()
                    .join("\n");
                text.push_str(&format!("\n{key} = {v}"));
            }
        };
        flag("d1", self.d1.map(|v| v.to_string()));
        flag("d2", self.d2.map(|v| v.to_string()));
        flag("s", self.s.map(|v| v.to_string()));
        flag("h", self.h.map(|v| v.to_string()));
        flag("dt", self.dt.clone());
        flag("t_end", self.t_end.map(|v| v.to_string()));
        flag("steady_tol", self.steady_tol.map(|v| v.to_string()));
        flag("probe_x", self.probe_x.map(|v| v.to_string()));
        Ok(parse_config(&text)?)
    }
}

fn dispatch(cli: Cli) -> Result<String, CliError> {
    let (name, ov, cmd): (_, _, fn(&ExperimentConfig, &std::path::Path) -> _) = match &cli.command {
        Command::Analyze(o) => ("analyze", o, cmd_analyze),
        Command::Simulate(o) => ("simulate", o, cmd_simulate),
        Command::Sweep(o) => ("sweep", o, cmd_sweep),
        Command::Pattern(o) => ("pattern", o, export_pattern),
    };
    let cfg = ov.load()?;
    let out = output_dir(ov.out.as_deref(), &cfg, name);
    cmd(&cfg, &out)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match dispatch(cli) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
