//! Command-line front end. Every subcommand builds an [`ExperimentConfig`]
//! from its flags, layered over `--config` when one is given.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use super::config::{Axis, ExperimentConfig, Operation, SweepAxis};
use super::{emit_plot, execute, parse_values};
use crate::error::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "perctrunc", version, about = "Truncated long-range percolation experiments")]
pub struct Cli {
    /// TOML experiment file; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Summability and support diagnostics of a sequence.
    Analyze(Params),
    /// Monte Carlo simulation of a model.
    #[command(subcommand)]
    Simulate(Simulate),
    /// Block-construction parameters and exact event probabilities.
    BlockParams(Params),
    /// Renormalized exploration, optionally re-verified edge by edge.
    Explore(Params),
    /// Couplings on the anisotropic lattice.
    #[command(subcommand)]
    Aniso(Aniso),
    /// Connection probability of the long-range line graph.
    Kw(Params),
    /// Box crossing of anisotropic nearest-neighbour percolation.
    Kesten(Params),
    /// Oriented site threshold by bisection on the survival ratio.
    SiteThreshold(Params),
    /// One row per value of a swept parameter.
    Sweep(SweepArgs),
    /// SVG chart of a sweep CSV.
    Plot(PlotArgs),
    /// Runs the experiment described by `--config`.
    Run(Params),
}

#[derive(Debug, Subcommand)]
pub enum Simulate {
    /// Survival to height H of the truncated oriented model.
    Oriented(Params),
}

#[derive(Debug, Subcommand)]
pub enum Aniso {
    /// Red bonds from shifted horizontal pairs.
    Thm2(Params),
    /// Red sites from windowed clusters and vertical detours.
    Thm3(Params),
}

#[derive(Debug, Clone, Default, Args)]
pub struct Params {
    /// Sequence spec, e.g. `const:p=0.5`, `powlaw:c=1,alpha=0.5`, `invsqrt`.
    #[arg(long)]
    pub seq: Option<String>,
    /// Truncation range.
    #[arg(long = "K")]
    pub cutoff: Option<u64>,
    /// Target level (oriented), generations (red sites) or levels (site threshold).
    #[arg(long, visible_alias = "H")]
    pub height: Option<u64>,
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Vertical bond probability.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Horizontal shift of the red-bond pairs.
    #[arg(long = "N")]
    pub shift: Option<u64>,
    #[arg(long)]
    pub eta: Option<f64>,
    /// Window of the red-site clusters.
    #[arg(long = "W", visible_alias = "window")]
    pub window: Option<u64>,
    /// Marked sites `0..=l` of the line graph.
    #[arg(long = "l")]
    pub l: Option<u64>,
    /// Line-graph window `0..=L`.
    #[arg(long = "L")]
    pub span: Option<u64>,
    #[arg(long)]
    pub pv: Option<f64>,
    #[arg(long)]
    pub ph: Option<f64>,
    /// Side of the crossing box.
    #[arg(long = "n")]
    pub n: Option<u64>,
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long)]
    pub steps: Option<u64>,
    #[arg(long = "box")]
    pub box_size: Option<u64>,
    #[arg(long)]
    pub horizon: Option<u64>,
    /// Bisection steps of the site-threshold search.
    #[arg(long)]
    pub iterations: Option<u32>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Re-check footprints and open paths of every exploration.
    #[arg(long)]
    pub verify: bool,
    /// JSON record path; printed to stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// CSV rows path.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// K, H, L, ph or epsilon.
    #[arg(long)]
    pub axis: String,
    /// Comma-separated values, e.g. `2,8,32,128`.
    #[arg(long)]
    pub values: String,
    #[command(flatten)]
    pub params: Params,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    /// Sweep CSV to read.
    #[arg(long)]
    pub csv: PathBuf,
    /// SVG to write.
    #[arg(long)]
    pub out: PathBuf,
}

impl Params {
    fn to_config(&self, operation: Option<Operation>) -> ExperimentConfig {
        ExperimentConfig {
            operation,
            seq: self.seq.clone(),
            cutoff: self.cutoff,
            height: self.height,
            d: self.d,
            epsilon: self.epsilon,
            delta: self.delta,
            shift: self.shift,
            eta: self.eta,
            window: self.window,
            l: self.l,
            span: self.span,
            pv: self.pv,
            ph: self.ph,
            n: self.n,
            trials: self.trials,
            steps: self.steps,
            box_size: self.box_size,
            horizon: self.horizon,
            iterations: self.iterations,
            seed: self.seed,
            verify: self.verify.then_some(true),
            out: self.out.clone(),
            csv: self.csv.clone(),
            sweep: None,
        }
    }
}

/// Config file (if any) overlaid with the flags.
fn layered(file: Option<&PathBuf>, flags: ExperimentConfig) -> Result<ExperimentConfig> {
    let base = match file {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    Ok(base.overlay(&flags))
}

/// Parses `args` and runs the command. Records go to `--out` or stdout.
pub fn main_with_args<I, T>(args: I) -> Result<()>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| {
        // help and version are not errors
        if !e.use_stderr() {
            let _ = e.print();
            std::process::exit(0);
        }
        Error::Config(e.to_string())
    })?;
    dispatch(cli)
}

pub fn dispatch(cli: Cli) -> Result<()> {
    let file = cli.config.as_ref();
    let (params, op) = match &cli.command {
        Command::Plot(p) => return emit_plot(&p.csv, &p.out),
        Command::Sweep(s) => {
            let mut flags = s.params.to_config(None);
            flags.sweep = Some(SweepAxis { param: Axis::parse(&s.axis)?, values: parse_values(&s.values)? });
            return emit(layered(file, flags)?);
        }
        Command::Run(p) => {
            if file.is_none() {
                return Err(Error::Config("`run` needs --config".into()));
            }
            (p, None)
        }
        Command::Analyze(p) => (p, Some(Operation::Analyze)),
        Command::Simulate(Simulate::Oriented(p)) => (p, Some(Operation::SimulateOriented)),
        Command::BlockParams(p) => (p, Some(Operation::BlockParams)),
        Command::Explore(p) => (p, Some(Operation::Explore)),
        Command::Aniso(Aniso::Thm2(p)) => (p, Some(Operation::AnisoThm2)),
        Command::Aniso(Aniso::Thm3(p)) => (p, Some(Operation::AnisoThm3)),
        Command::Kw(p) => (p, Some(Operation::Kw)),
        Command::Kesten(p) => (p, Some(Operation::Kesten)),
        Command::SiteThreshold(p) => (p, Some(Operation::SiteThreshold)),
    };
    emit(layered(file, params.to_config(op))?)
}

fn emit(config: ExperimentConfig) -> Result<()> {
    let record = execute(&config)?;
    match &config.out {
        Some(path) => eprintln!("wrote {}", path.display()),
        None => println!("{}", record.to_json()?),
    }
    Ok(())
}
