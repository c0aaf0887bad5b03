use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use hcwalk_core::HoppingMode;
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(
    name = "hcwalk",
    version,
    about = "Quantum walks of two hard-core bosons with power-law hopping and interactions"
)]
pub struct Cli {
    /// Output directory, created if missing.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,

    /// Worker threads for ensemble runs (0 = all cores).
    #[arg(long, global = true, env = "HCWALK_THREADS")]
    pub threads: Option<usize>,

    /// Re-run the command recorded in a manifest written by an earlier run.
    #[arg(long, global = true)]
    pub from_manifest: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Pair correlations and density of a walk from two adjacent sites.
    Walk(WalkArgs),
    /// Survival between two vacancies with absorbing outer regions, scanned over v/t.
    Impurity(ImpurityArgs),
    /// Disorder-averaged pair correlations at one interaction strength.
    Disorder(DisorderArgs),
    /// Disorder-averaged participation ratio over a v/t grid.
    Participation(ParticipationArgs),
    /// Two-particle ring spectrum against total quasimomentum.
    Dispersion(DispersionArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Walk(_) => "walk",
            Command::Impurity(_) => "impurity",
            Command::Disorder(_) => "disorder",
            Command::Participation(_) => "participation",
            Command::Dispersion(_) => "dispersion",
        }
    }
}

/// Hopping range: `--nn` for nearest neighbours, otherwise `t/|i-j|^alpha`.
#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct HoppingArgs {
    /// Hopping exponent.
    #[arg(long, default_value_t = 3.0)]
    pub alpha: f64,

    /// Nearest-neighbour hopping only; overrides --alpha.
    #[arg(long)]
    pub nn: bool,
}

impl HoppingArgs {
    pub fn mode(&self) -> HoppingMode {
        if self.nn {
            HoppingMode::NearestNeighbour
        } else {
            HoppingMode::PowerLaw { alpha: self.alpha }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct WalkArgs {
    #[arg(long, default_value_t = 50)]
    pub n_sites: usize,

    #[command(flatten)]
    pub hopping: HoppingArgs,

    /// Interaction exponent.
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,

    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub v_over_t: f64,

    /// Evolution time in units of 1/t.
    #[arg(long, default_value_t = std::f64::consts::TAU)]
    pub tau: f64,

    /// Initially occupied sites, 1-based.
    #[arg(long, default_value = "25,26")]
    pub starts: SitePair,

    /// Vacant sites, 1-based.
    #[arg(long, value_delimiter = ',')]
    pub vacancies: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct ImpurityArgs {
    #[arg(long, default_value_t = 41)]
    pub n_sites: usize,

    #[command(flatten)]
    pub hopping: HoppingArgs,

    #[arg(long, default_value_t = 3.0)]
    pub beta: f64,

    /// Vacant barrier sites, 1-based.
    #[arg(long, default_value = "10,31")]
    pub barriers: SitePair,

    /// Initially occupied sites, 1-based.
    #[arg(long, default_value = "20,21")]
    pub starts: SitePair,

    #[arg(long, default_value_t = 20.0)]
    pub tau: f64,

    /// Absorber strength in units of t.
    #[arg(long, default_value_t = hcwalk_core::openprop::DEFAULT_ABSORB_STRENGTH)]
    pub gamma: f64,

    /// Runge-Kutta step in units of 1/t.
    #[arg(long, default_value_t = hcwalk_core::openprop::DEFAULT_DTAU)]
    pub dtau: f64,

    #[arg(long, value_enum, default_value_t = Survival::Density)]
    pub survival: Survival,

    #[command(flatten)]
    pub grid: VGrid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Survival {
    /// Single-particle density summed over the interior.
    Density,
    /// Probability that both particles are in the interior.
    Pair,
}

/// Interaction grid: an explicit list, or an inclusive range with a step.
#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct VGrid {
    #[arg(long, default_value_t = -10.0, allow_negative_numbers = true)]
    pub v_min: f64,

    #[arg(long, default_value_t = 10.0, allow_negative_numbers = true)]
    pub v_max: f64,

    #[arg(long, default_value_t = 0.5)]
    pub v_step: f64,

    /// Explicit comma-separated v/t values; overrides the range.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub v_values: Vec<f64>,
}

impl VGrid {
    pub fn values(&self) -> Result<Vec<f64>, String> {
        if !self.v_values.is_empty() {
            return Ok(self.v_values.clone());
        }
        if !(self.v_step > 0.0) || self.v_max < self.v_min {
            return Err(format!(
                "bad v/t range {}..{} step {}",
                self.v_min, self.v_max, self.v_step
            ));
        }
        let count = ((self.v_max - self.v_min) / self.v_step + 1e-9).floor() as usize + 1;
        Ok((0..count)
            .map(|k| self.v_min + k as f64 * self.v_step)
            .collect())
    }
}

/// Ensemble settings shared by `disorder` and `participation`.
#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct EnsembleArgs {
    #[arg(long, default_value_t = 50)]
    pub n_sites: usize,

    #[command(flatten)]
    pub hopping: HoppingArgs,

    #[arg(long, default_value_t = 3.0)]
    pub beta: f64,

    /// Fraction of sites made vacant in each realization.
    #[arg(long, default_value_t = 0.1)]
    pub vacancy_fraction: f64,

    #[arg(long, default_value_t = 5000)]
    pub realizations: usize,

    #[arg(long, default_value_t = 1)]
    pub master_seed: u64,

    #[arg(long, default_value_t = 1e4)]
    pub tau: f64,

    /// Initially occupied sites, 1-based; never made vacant.
    #[arg(long, default_value = "25,26")]
    pub starts: SitePair,

    /// Largest |i-j| counted as co-walking.
    #[arg(long, default_value_t = 2)]
    pub cowalk_band: usize,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct DisorderArgs {
    #[command(flatten)]
    pub ensemble: EnsembleArgs,

    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub v_over_t: f64,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct ParticipationArgs {
    #[command(flatten)]
    pub ensemble: EnsembleArgs,

    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        default_value = "0,0.5,1,1.5,2,3,4,6,8"
    )]
    pub v_values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct DispersionArgs {
    /// Ring length.
    #[arg(long, default_value_t = 50)]
    pub n_sites: usize,

    /// Hopping modes: `nn` or an exponent.
    #[arg(long, value_delimiter = ',', default_value = "nn,3,2,1")]
    pub modes: Vec<ModeArg>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct ModeArg(pub HoppingMode);

impl FromStr for ModeArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("nn") {
            return Ok(ModeArg(HoppingMode::NearestNeighbour));
        }
        s.parse::<f64>()
            .map(|alpha| ModeArg(HoppingMode::PowerLaw { alpha }))
            .map_err(|_| format!("expected `nn` or a hopping exponent, got `{s}`"))
    }
}

impl fmt::Display for ModeArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0.label())
    }
}

impl From<ModeArg> for String {
    fn from(m: ModeArg) -> Self {
        m.to_string()
    }
}

impl TryFrom<String> for ModeArg {
    type Error = String;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

/// Two 1-based site labels written `a,b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SitePair(pub usize, pub usize);

impl SitePair {
    /// 0-based indices; fails on a zero label.
    pub fn zero_based(&self) -> Result<(usize, usize), String> {
        match (self.0.checked_sub(1), self.1.checked_sub(1)) {
            (Some(a), Some(b)) => Ok((a, b)),
            _ => Err(format!("site labels are 1-based, got {self}")),
        }
    }
}

impl FromStr for SitePair {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (a, b) = s
            .split_once(',')
            .ok_or_else(|| format!("expected two sites `a,b`, got `{s}`"))?;
        let parse = |x: &str| {
            x.trim()
                .parse::<usize>()
                .map_err(|e| format!("bad site `{x}`: {e}"))
        };
        Ok(SitePair(parse(a)?, parse(b)?))
    }
}

impl fmt::Display for SitePair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.0, self.1)
    }
}
