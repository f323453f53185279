use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::Deserialize;
use thermomeasure::battery::{Mode, MomentumGrid, ProtocolConfig};

use crate::CliError;

pub const DEFAULT_S: f64 = 0.001;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeArg {
    Ideal,
    Battery,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Ideal => Mode::Ideal,
            ModeArg::Battery => Mode::Battery,
        }
    }
}

/// Flags shared by every subcommand. Each one overrides the matching key of
/// the `--config` file.
#[derive(Args, Debug, Default)]
pub struct Common {
    /// JSON file with default values for any of these flags
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// System dimension
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    /// Battery momentum width
    #[arg(long)]
    pub s: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Momentum grid length (power of two)
    #[arg(long = "grid-l")]
    pub grid_l: Option<usize>,
    /// Momentum grid half-width
    #[arg(long = "p-max")]
    pub p_max: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output file; stdout when omitted
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Commutator-norm tolerance for isolation checks
    #[arg(long)]
    pub tol: Option<f64>,
}

/// Config file contents. Unknown keys are rejected.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub d: Option<usize>,
    pub mode: Option<ModeArg>,
    pub s: Option<f64>,
    pub gamma: Option<f64>,
    pub grid_l: Option<usize>,
    pub p_max: Option<f64>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub tol: Option<f64>,
    pub samples: Option<u64>,
    pub s_list: Option<Vec<f64>>,
    pub label: Option<String>,
    pub n: Option<u64>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Input(format!("bad config {}: {e}", path.display())))
    }
}

/// Flags merged over the config file.
#[derive(Debug)]
pub struct Settings {
    pub d: Option<usize>,
    pub mode: Option<Mode>,
    pub s: Option<f64>,
    pub gamma: f64,
    pub grid_l: Option<usize>,
    pub p_max: Option<f64>,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub tol: Option<f64>,
    pub file: RunConfig,
}

impl Settings {
    pub fn resolve(common: Common) -> Result<Self, CliError> {
        let mut file = match &common.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        let settings = Settings {
            d: common.d.or(file.d),
            mode: common.mode.or(file.mode).map(Mode::from),
            s: common.s.or(file.s),
            gamma: common.gamma.or(file.gamma).unwrap_or(1.0),
            grid_l: common.grid_l.or(file.grid_l),
            p_max: common.p_max.or(file.p_max),
            seed: common.seed.or(file.seed).unwrap_or(0),
            out: common.out.or(file.out.take()),
            tol: common.tol.or(file.tol),
            file,
        };
        if let Some(tol) = settings.tol {
            if !(tol.is_finite() && tol >= 0.0) {
                return Err(CliError::Input(format!(
                    "tol must be non-negative, got {tol}"
                )));
            }
        }
        Ok(settings)
    }

    /// Protocol configuration for a `d`-dimensional state; `default_mode`
    /// applies when neither flag nor file picks one.
    pub fn protocol(&self, d: usize, default_mode: Mode) -> Result<ProtocolConfig, CliError> {
        if let Some(flag_d) = self.d {
            if flag_d != d {
                return Err(CliError::Input(format!(
                    "--d {flag_d} does not match input dimension {d}"
                )));
            }
        }
        let mode = self.mode.unwrap_or(default_mode);
        let s = match mode {
            Mode::Ideal => self.s.unwrap_or(0.0),
            Mode::Battery => self.s.unwrap_or(DEFAULT_S),
        };
        let config = ProtocolConfig {
            d,
            mode,
            s,
            gamma: self.gamma,
            grid: self.grid(s)?,
            seed: self.seed,
            samples: None,
        };
        config.validate()?;
        Ok(config)
    }

    fn grid(&self, s: f64) -> Result<Option<MomentumGrid>, CliError> {
        if self.grid_l.is_none() && self.p_max.is_none() {
            return Ok(None);
        }
        let p_max = match self.p_max {
            Some(p) => p,
            None => MomentumGrid::for_width(s)?.p_max(),
        };
        let len = self.grid_l.unwrap_or(MomentumGrid::DEFAULT_LEN);
        Ok(Some(MomentumGrid::new(p_max, len)?))
    }
}
