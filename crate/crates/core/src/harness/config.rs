use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sequences::ProbSequence;

/// Which computation an experiment runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Operation {
    Analyze,
    SimulateOriented,
    BlockParams,
    Explore,
    AnisoThm2,
    AnisoThm3,
    Kw,
    Kesten,
    SiteThreshold,
}

impl Operation {
    pub fn name(self) -> &'static str {
        match self {
            Operation::Analyze => "analyze",
            Operation::SimulateOriented => "simulate-oriented",
            Operation::BlockParams => "block-params",
            Operation::Explore => "explore",
            Operation::AnisoThm2 => "aniso-thm2",
            Operation::AnisoThm3 => "aniso-thm3",
            Operation::Kw => "kw",
            Operation::Kesten => "kesten",
            Operation::SiteThreshold => "site-threshold",
        }
    }
}

/// Parameter swept by [`super::sweep`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Axis {
    /// Truncation of the oriented survival estimate.
    K,
    /// Height of the oriented survival estimate.
    H,
    /// Window of the line-graph connection estimate.
    L,
    /// Horizontal parameter of the crossing estimate.
    #[serde(rename = "ph")]
    Ph,
    /// Block-construction error of the exploration survival estimate.
    #[serde(rename = "epsilon")]
    Epsilon,
}

impl Axis {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "K" => Ok(Axis::K),
            "H" => Ok(Axis::H),
            "L" => Ok(Axis::L),
            "ph" => Ok(Axis::Ph),
            "epsilon" => Ok(Axis::Epsilon),
            _ => Err(Error::Config(format!("unknown sweep axis `{s}` (expected K, H, L, ph or epsilon)"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Axis::K => "K",
            Axis::H => "H",
            Axis::L => "L",
            Axis::Ph => "ph",
            Axis::Epsilon => "epsilon",
        }
    }

    fn integral(self) -> bool {
        matches!(self, Axis::K | Axis::H | Axis::L)
    }

    fn operation(self) -> Operation {
        match self {
            Axis::K | Axis::H => Operation::SimulateOriented,
            Axis::L => Operation::Kw,
            Axis::Ph => Operation::Kesten,
            Axis::Epsilon => Operation::Explore,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepAxis {
    pub param: Axis,
    pub values: Vec<f64>,
}

/// One experiment: an operation plus every parameter it may need. Field
/// names match the command-line flags; flags override file values.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub operation: Option<Operation>,
    pub seq: Option<String>,
    #[serde(rename = "K", skip_serializing_if = "Option::is_none")]
    pub cutoff: Option<u64>,
    #[serde(rename = "H", skip_serializing_if = "Option::is_none")]
    pub height: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(rename = "N", skip_serializing_if = "Option::is_none")]
    pub shift: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    /// Window `W` of the red-site construction.
    #[serde(rename = "W", skip_serializing_if = "Option::is_none")]
    pub window: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l: Option<u64>,
    #[serde(rename = "L", skip_serializing_if = "Option::is_none")]
    pub span: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pv: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ph: Option<f64>,
    /// Side of the crossing box.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steps: Option<u64>,
    #[serde(rename = "box", skip_serializing_if = "Option::is_none")]
    pub box_size: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub horizon: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iterations: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verify: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepAxis>,
}

pub const DEFAULT_TRIALS: u64 = 1000;
pub const DEFAULT_STEPS: u64 = 1000;

macro_rules! overlay {
    ($base:ident, $top:ident; $($f:ident),* $(,)?) => {
        $( if $top.$f.is_some() { $base.$f = $top.$f.clone(); } )*
    };
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Values set in `top` replace those in `self`.
    pub fn overlay(mut self, top: &ExperimentConfig) -> Self {
        let base = &mut self;
        overlay!(base, top; operation, seq, cutoff, height, d, epsilon, delta, shift, eta, window,
            l, span, pv, ph, n, trials, steps, box_size, horizon, iterations, seed, verify, out, csv, sweep);
        self
    }

    pub fn operation(&self) -> Result<Operation> {
        match (self.operation, &self.sweep) {
            (Some(op), _) => Ok(op),
            (None, Some(axis)) => Ok(axis.param.operation()),
            (None, None) => Err(Error::Config("no operation selected".into())),
        }
    }

    pub fn sequence(&self) -> Result<ProbSequence> {
        self.seq.as_deref().ok_or_else(|| Error::Config("missing sequence (`seq`)".into()))?.parse()
    }

    pub fn trials(&self) -> u64 {
        self.trials.unwrap_or(DEFAULT_TRIALS)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub(crate) fn need<T: Copy>(&self, v: Option<T>, name: &str) -> Result<T> {
        v.ok_or_else(|| {
            Error::Config(format!(
                "`{name}` is required for {}",
                self.operation().map(|o| o.name()).unwrap_or("this operation")
            ))
        })
    }

    /// Checks that everything the selected operation reads is present and in range.
    pub fn validate(&self) -> Result<()> {
        let op = self.operation()?;
        let prob = |v: Option<f64>, name: &str| -> Result<()> {
            match v {
                Some(p) if !(0.0..=1.0).contains(&p) => Err(Error::domain(format!("{name} = {p} outside [0,1]"))),
                _ => Ok(()),
            }
        };
        let open_unit = |v: Option<f64>, name: &str| -> Result<()> {
            match v {
                Some(e) if !(e > 0.0 && e < 1.0) => Err(Error::domain(format!("{name} = {e} must lie in (0,1)"))),
                _ => Ok(()),
            }
        };
        open_unit(self.epsilon, "epsilon")?;
        prob(self.delta, "delta")?;
        prob(self.pv, "pv")?;
        prob(self.ph, "ph")?;
        if self.trials == Some(0) {
            return Err(Error::domain("trials must be >= 1"));
        }
        if let Some(seq) = &self.seq {
            seq.parse::<ProbSequence>()?;
        }
        match op {
            Operation::Analyze => {
                self.sequence()?;
            }
            Operation::SimulateOriented => {
                self.sequence()?;
                if self.sweep.as_ref().map(|s| s.param) != Some(Axis::K) {
                    self.need(self.cutoff, "K")?;
                }
                if self.sweep.as_ref().map(|s| s.param) != Some(Axis::H) {
                    self.need(self.height, "H")?;
                }
            }
            Operation::BlockParams => {
                self.sequence()?;
                self.need(self.epsilon, "epsilon")?;
            }
            Operation::Explore => {
                self.sequence()?;
                if self.sweep.as_ref().map(|s| s.param) != Some(Axis::Epsilon) {
                    self.need(self.epsilon, "epsilon")?;
                }
            }
            Operation::AnisoThm2 => {
                self.sequence()?;
                self.need(self.delta, "delta")?;
                self.need(self.shift, "N")?;
                self.need(self.epsilon, "epsilon")?;
            }
            Operation::AnisoThm3 => {
                self.sequence()?;
                self.need(self.delta, "delta")?;
                self.need(self.epsilon, "epsilon")?;
            }
            Operation::Kw => {
                self.sequence()?;
                self.need(self.l, "l")?;
                if self.sweep.as_ref().map(|s| s.param) != Some(Axis::L) {
                    self.need(self.span, "L")?;
                }
            }
            Operation::Kesten => {
                self.need(self.pv, "pv")?;
                if self.sweep.as_ref().map(|s| s.param) != Some(Axis::Ph) {
                    self.need(self.ph, "ph")?;
                }
                self.need(self.n, "n")?;
            }
            Operation::SiteThreshold => {}
        }
        if let Some(sweep) = &self.sweep {
            validate_sweep(op, sweep)?;
        }
        Ok(())
    }
}

fn validate_sweep(op: Operation, sweep: &SweepAxis) -> Result<()> {
    if sweep.param.operation() != op {
        return Err(Error::Config(format!(
            "axis {} sweeps {}, not {}",
            sweep.param.name(),
            sweep.param.operation().name(),
            op.name()
        )));
    }
    if sweep.values.is_empty() {
        return Err(Error::Config("sweep needs at least one value".into()));
    }
    if sweep.param.integral() {
        if sweep.values.iter().any(|v| v.fract() != 0.0 || *v < 1.0) {
            return Err(Error::domain(format!("{} values must be positive integers", sweep.param.name())));
        }
        if sweep.values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::domain(format!("{} values must be strictly increasing", sweep.param.name())));
        }
    }
    Ok(())
}
