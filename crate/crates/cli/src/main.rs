//! `resonance`: command-line experiments on large values of `ζ'/ζ` and
//! `L'/L` near the 1-line.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser};

mod commands;
mod config;
mod output;

use config::{Command, Format, Height, Params, RunConfig};

#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Io(String),
    Core(resonance_core::Error),
}

impl CliError {
    pub fn invalid(key: &str, msg: String) -> Self {
        CliError::Validation(format!("{key}: {msg}"))
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Io(_) => 3,
            CliError::Core(e) => e.exit_code() as u8,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Validation(m) => write!(f, "invalid configuration: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<resonance_core::Error> for CliError {
    fn from(e: resonance_core::Error) -> Self {
        CliError::Core(e)
    }
}

#[derive(Parser, Debug)]
#[command(name = "resonance", version, about = "Resonance-method experiments for zeta'/zeta and L'/L")]
struct Cli {
    /// Experiment to run; may be omitted when --config names one.
    #[arg(value_enum)]
    command: Option<Command>,

    #[command(flatten)]
    params: ParamFlags,

    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    out: Option<String>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// JSON config; a previous JSON output is accepted too.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ParamFlags {
    /// Height, e.g. `1e5`, `10^10^3`, `exp(500)`; comma list for gain-trend.
    #[arg(long = "T")]
    t: Option<String>,
    #[arg(long)]
    q: Option<u64>,
    #[arg(long = "A")]
    a: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    kappa: Option<f64>,
    /// Threshold offset.
    #[arg(long)]
    x: Option<f64>,
    #[arg(long = "E")]
    e: Option<f64>,
    /// Polynomial cutoff.
    #[arg(long = "Y")]
    y: Option<u64>,
    /// Smoothness bound, overriding κ·log T·log log T.
    #[arg(long = "X")]
    x_bound: Option<f64>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    t_min: Option<f64>,
    #[arg(long)]
    t_max: Option<f64>,
    #[arg(long)]
    nmax: Option<u64>,
    #[arg(long)]
    grid_points: Option<usize>,
    #[arg(long)]
    log2_t: Option<f64>,
    #[arg(long)]
    include_principal: Option<bool>,
    #[arg(long)]
    grid_step: Option<f64>,
    #[arg(long)]
    samples: Option<u64>,
    #[arg(long)]
    top_k: Option<usize>,
}

impl ParamFlags {
    fn into_params(self) -> Params {
        Params {
            t: self.t.map(Height::Text),
            q: self.q,
            a: self.a,
            beta: self.beta,
            epsilon: self.epsilon,
            kappa: self.kappa,
            x: self.x,
            e: self.e,
            y: self.y,
            x_bound: self.x_bound,
            sigma: self.sigma,
            t_min: self.t_min,
            t_max: self.t_max,
            nmax: self.nmax,
            grid_points: self.grid_points,
            log2_t: self.log2_t,
            include_principal: self.include_principal,
            grid_step: self.grid_step,
            samples: self.samples,
            top_k: self.top_k,
        }
    }
}

fn resolve(cli: Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match (&cli.config, cli.command) {
        (Some(path), cmd) => {
            let file = RunConfig::load(path)?;
            if let Some(c) = cmd {
                if c != file.command {
                    return Err(CliError::invalid(
                        "command",
                        format!("{c} on the command line but {} in {}", file.command, path.display()),
                    ));
                }
            }
            file
        }
        (None, Some(c)) => RunConfig::new(c),
        (None, None) => return Err(CliError::Validation("no command given".into())),
    };
    cfg.parameters.overlay(&cli.params.into_params());
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(w) = cli.workers {
        cfg.workers = Some(w);
    }
    if let Some(o) = cli.out {
        cfg.output_path = Some(o);
    }
    if let Some(f) = cli.format {
        cfg.output_format = f;
    }
    cfg.tool_version = Some(env!("CARGO_PKG_VERSION").to_string());
    Ok(cfg)
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut cfg = resolve(cli)?;
    if let Some(w) = cfg.workers {
        if w == 0 {
            return Err(CliError::invalid("workers", "must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build_global()
            .map_err(|e| CliError::Io(format!("thread pool: {e}")))?;
    }
    let table = commands::run(&mut cfg)?;
    output::emit(&cfg, &table)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("resonance: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
