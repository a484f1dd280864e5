//! Resolved configurations. Each subcommand reads an optional JSON document
//! (unknown keys rejected) and then applies its command-line flags on top.

use std::f64::consts::FRAC_PI_4;
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use ppfilter_core::scatter::{Polarization, SlabParams};
use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::grid::GridSpec;

fn grid(s: &str) -> GridSpec {
    GridSpec::Text(s.to_owned())
}

macro_rules! overlay {
    ($cfg:expr, $args:expr; $($field:ident),* $(,)?) => {
        $( if let Some(v) = $args.$field.clone() { $cfg.$field = v; } )*
    };
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SlabConfig {
    /// `omega_p L / c`.
    pub scale: f64,
    /// Incidence angle in radians.
    pub theta: f64,
    pub polarization: Polarization,
}

impl Default for SlabConfig {
    fn default() -> Self {
        Self {
            scale: 1.0,
            theta: FRAC_PI_4,
            polarization: Polarization::Te,
        }
    }
}

impl SlabConfig {
    pub fn params(&self) -> Result<SlabParams, CliError> {
        Ok(SlabParams::with_scale(self.scale, self.theta, self.polarization)?)
    }
}

#[derive(Args, Clone, Debug, Default)]
pub struct SlabArgs {
    /// Slab thickness in units of c / omega_p.
    #[arg(long)]
    pub scale: Option<f64>,
    /// Incidence angle (rad).
    #[arg(long)]
    pub theta: Option<f64>,
    /// te or tm.
    #[arg(long)]
    pub polarization: Option<Polarization>,
}

impl SlabArgs {
    fn apply(&self, cfg: &mut SlabConfig) {
        overlay!(cfg, self; scale, theta, polarization);
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum DistKind {
    Delta,
    #[default]
    Gaussian,
}

// slab ---------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SlabCmdConfig {
    pub omega: GridSpec,
    pub slab: SlabConfig,
}

impl Default for SlabCmdConfig {
    fn default() -> Self {
        Self {
            omega: grid("0.2:3:0.01"),
            slab: SlabConfig::default(),
        }
    }
}

#[derive(Args, Clone, Debug, Default)]
pub struct SlabCmdArgs {
    /// Normalized frequencies omega / omega_p.
    #[arg(long = "omega-grid")]
    pub omega: Option<GridSpec>,
    #[command(flatten)]
    pub slab: SlabArgs,
}

impl SlabCmdArgs {
    pub fn apply(&self, cfg: &mut SlabCmdConfig) {
        overlay!(cfg, self; omega);
        self.slab.apply(&mut cfg.slab);
    }
}

// transmit / reflect -------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectralConfig {
    /// Center frequencies omega_0 / omega_p.
    pub omega: GridSpec,
    pub p: GridSpec,
    pub dist: DistKind,
    /// Relative Gaussian width.
    pub sigma: f64,
    pub tau: f64,
    pub slab: SlabConfig,
    /// Constant reflectance replacing the slab (reflect only).
    pub reflectance: Option<f64>,
    /// Two-column CSV `(omega_bar, R)` replacing the slab (reflect only).
    pub reflectivity_table: Option<PathBuf>,
}

impl SpectralConfig {
    pub fn transmit_default() -> Self {
        Self {
            omega: grid("0.2:3:0.01"),
            p: grid("0.1,0.5,1"),
            dist: DistKind::Gaussian,
            sigma: 1.0 / 40.0,
            tau: 1.0,
            slab: SlabConfig::default(),
            reflectance: None,
            reflectivity_table: None,
        }
    }

    pub fn reflect_default() -> Self {
        Self {
            p: grid("0.1,0.3,0.5,0.7,1"),
            ..Self::transmit_default()
        }
    }
}

impl Default for SpectralConfig {
    fn default() -> Self {
        Self::transmit_default()
    }
}

#[derive(Args, Clone, Debug, Default)]
pub struct SpectralArgs {
    #[arg(long = "omega-grid")]
    pub omega: Option<GridSpec>,
    /// Postselection parameters.
    #[arg(long = "p", visible_alias = "p-grid")]
    pub p: Option<GridSpec>,
    #[arg(long, value_enum)]
    pub dist: Option<DistKind>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub tau: Option<f64>,
    #[command(flatten)]
    pub slab: SlabArgs,
}

impl SpectralArgs {
    pub fn apply(&self, cfg: &mut SpectralConfig) {
        overlay!(cfg, self; omega, p, dist, sigma, tau);
        self.slab.apply(&mut cfg.slab);
    }
}

#[derive(Args, Clone, Debug, Default)]
pub struct ReflectArgs {
    #[command(flatten)]
    pub spectral: SpectralArgs,
    /// Use a constant reflectance instead of the slab.
    #[arg(long, conflicts_with = "reflectivity_table")]
    pub reflectance: Option<f64>,
    /// Use a tabulated reflectance `(omega_bar, R)` instead of the slab.
    #[arg(long)]
    pub reflectivity_table: Option<PathBuf>,
}

impl ReflectArgs {
    pub fn apply(&self, cfg: &mut SpectralConfig) {
        self.spectral.apply(cfg);
        if let Some(r) = self.reflectance {
            cfg.reflectance = Some(r);
            cfg.reflectivity_table = None;
        }
        if let Some(path) = &self.reflectivity_table {
            cfg.reflectivity_table = Some(path.clone());
            cfg.reflectance = None;
        }
    }
}

// catalysis ----------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CatalysisConfig {
    pub p: GridSpec,
    /// Detector efficiencies.
    pub eta: GridSpec,
    /// Transmittance of the lossy channel.
    pub transmittance: f64,
}

impl Default for CatalysisConfig {
    fn default() -> Self {
        Self {
            p: grid("0.05:1:0.05"),
            eta: grid("0.8,0.85,0.9,0.95"),
            transmittance: 0.01,
        }
    }
}

#[derive(Args, Clone, Debug, Default)]
pub struct CatalysisArgs {
    #[arg(long = "p-grid", visible_alias = "p")]
    pub p: Option<GridSpec>,
    #[arg(long)]
    pub eta: Option<GridSpec>,
    #[arg(long = "transmittance", visible_alias = "t")]
    pub transmittance: Option<f64>,
}

impl CatalysisArgs {
    pub fn apply(&self, cfg: &mut CatalysisConfig) {
        overlay!(cfg, self; p, eta, transmittance);
    }
}

// mc -----------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct McConfig {
    pub omega: GridSpec,
    pub p: GridSpec,
    /// Trials per measurement.
    pub trials: u64,
    /// Noisy measurements per point.
    pub samples: u64,
    pub sigma: f64,
    pub freeze_counts: bool,
    pub slab: SlabConfig,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            omega: grid("0.2:3:0.05"),
            p: grid("0.1,1"),
            trials: 1000,
            samples: 2000,
            sigma: 0.02,
            freeze_counts: false,
            slab: SlabConfig::default(),
        }
    }
}

#[derive(Args, Clone, Debug, Default)]
pub struct McArgs {
    #[arg(long = "omega-grid")]
    pub omega: Option<GridSpec>,
    #[arg(long = "p", visible_alias = "p-grid")]
    pub p: Option<GridSpec>,
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long)]
    pub samples: Option<u64>,
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Reuse one count table for every noise sample.
    #[arg(long)]
    pub freeze_counts: Option<bool>,
    #[command(flatten)]
    pub slab: SlabArgs,
}

impl McArgs {
    pub fn apply(&self, cfg: &mut McConfig) {
        overlay!(cfg, self; omega, p, trials, samples, sigma, freeze_counts);
        self.slab.apply(&mut cfg.slab);
    }
}

// mse ----------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MseConfig {
    /// Reflection amplitude |r| (or intensity with `r_is_intensity`).
    pub r: f64,
    pub r_is_intensity: bool,
    pub p: GridSpec,
    /// Numbers of independent measurements.
    pub n_step: GridSpec,
    pub trials: u64,
    pub sigma: f64,
    /// Independent repetitions averaged per point.
    pub seeds: u64,
}

impl Default for MseConfig {
    fn default() -> Self {
        Self {
            r: 0.2,
            r_is_intensity: false,
            p: grid("0.2,0.5,0.8,1"),
            n_step: grid("10,100,1000,10000"),
            trials: 1000,
            sigma: 0.02,
            seeds: 1,
        }
    }
}

#[derive(Args, Clone, Debug, Default)]
pub struct MseArgs {
    #[arg(long)]
    pub r: Option<f64>,
    /// Read `--r` as the intensity reflectivity R instead of |r|.
    #[arg(long)]
    pub r_is_intensity: Option<bool>,
    #[arg(long = "p", visible_alias = "p-grid")]
    pub p: Option<GridSpec>,
    #[arg(long = "n-step")]
    pub n_step: Option<GridSpec>,
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub seeds: Option<u64>,
}

impl MseArgs {
    pub fn apply(&self, cfg: &mut MseConfig) {
        overlay!(cfg, self; r, r_is_intensity, p, n_step, trials, sigma, seeds);
    }
}

// image --------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ImageConfig {
    pub width: usize,
    pub height: usize,
    pub r_fg: f64,
    pub r_bg: f64,
    pub p: GridSpec,
    pub trials: u64,
    pub sigma: f64,
    /// Target from an ASCII PGM (white = r_fg, black = r_bg).
    pub map_pgm: Option<PathBuf>,
    /// Target from a CSV grid of reflectivities.
    pub map_csv: Option<PathBuf>,
}

impl Default for ImageConfig {
    fn default() -> Self {
        use ppfilter_core::imaging::*;
        Self {
            width: DEFAULT_WIDTH,
            height: DEFAULT_HEIGHT,
            r_fg: DEFAULT_R_FG,
            r_bg: DEFAULT_R_BG,
            p: grid("1,0.8,0.6,0.4,0.2"),
            trials: 1000,
            sigma: 0.02,
            map_pgm: None,
            map_csv: None,
        }
    }
}

#[derive(Args, Clone, Debug, Default)]
pub struct ImageArgs {
    #[arg(long)]
    pub width: Option<usize>,
    #[arg(long)]
    pub height: Option<usize>,
    #[arg(long)]
    pub r_fg: Option<f64>,
    #[arg(long)]
    pub r_bg: Option<f64>,
    #[arg(long = "p", visible_alias = "p-grid")]
    pub p: Option<GridSpec>,
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long, conflicts_with = "map_csv")]
    pub map_pgm: Option<PathBuf>,
    #[arg(long)]
    pub map_csv: Option<PathBuf>,
}

impl ImageArgs {
    pub fn apply(&self, cfg: &mut ImageConfig) {
        overlay!(cfg, self; width, height, r_fg, r_bg, p, trials, sigma);
        if let Some(path) = &self.map_pgm {
            cfg.map_pgm = Some(path.clone());
            cfg.map_csv = None;
        }
        if let Some(path) = &self.map_csv {
            cfg.map_csv = Some(path.clone());
            cfg.map_pgm = None;
        }
    }
}

// oracle-check -------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OracleConfig {
    pub omega: GridSpec,
    pub slab: SlabConfig,
    pub tolerance: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            omega: grid("0.2:3:0.01407035175879397"),
            slab: SlabConfig::default(),
            tolerance: 1e-9,
        }
    }
}

#[derive(Args, Clone, Debug, Default)]
pub struct OracleArgs {
    #[arg(long = "omega-grid")]
    pub omega: Option<GridSpec>,
    #[arg(long)]
    pub tolerance: Option<f64>,
    #[command(flatten)]
    pub slab: SlabArgs,
}

impl OracleArgs {
    pub fn apply(&self, cfg: &mut OracleConfig) {
        overlay!(cfg, self; omega, tolerance);
        self.slab.apply(&mut cfg.slab);
    }
}
