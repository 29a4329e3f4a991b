//! Flat run configuration: one TOML table whose keys mirror the
//! command-line flags. Flags win over file values.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use phototherm::{Discretization, NeutralConfig, Params, ParamsConfig};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum, Default)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    // physical parameters; unset keys take the library defaults
    pub ra: Option<f64>,
    pub rt: Option<f64>,
    pub rm: Option<f64>,
    pub le: Option<f64>,
    pub pr: Option<f64>,
    pub us: Option<f64>,
    pub optical_depth: Option<f64>,
    pub incident_intensity: Option<f64>,
    pub chi: Option<f64>,
    pub gc: Option<f64>,

    // discretization
    pub basic_grid: usize,
    pub steps: usize,
    pub ortho_interval: usize,
    pub ncheb: usize,

    // neutral curves
    pub a_lo: f64,
    pub a_hi: f64,
    pub n_points: usize,
    pub seed_ncheb: usize,
    pub seed_probes: usize,
    pub arclength_step: f64,
    pub search_oscillatory: bool,
    pub rt_list: Vec<f64>,
    pub le_list: Vec<f64>,

    // single-mode commands
    pub a: Option<f64>,
    pub gamma_re: f64,
    pub gamma_im: f64,
    pub spectrum_count: usize,
    pub scan_points: usize,

    // fields and time series
    pub nx: usize,
    pub nz: usize,
    pub times: Vec<f64>,
    pub probe_x1: Option<f64>,
    pub probe_x3: f64,
    pub t_end: f64,
    pub t_samples: usize,

    // output and execution
    pub output_dir: PathBuf,
    pub format: Format,
    pub threads: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        let n = NeutralConfig::default();
        Self {
            ra: None,
            rt: None,
            rm: None,
            le: None,
            pr: None,
            us: None,
            optical_depth: None,
            incident_intensity: None,
            chi: None,
            gc: None,
            basic_grid: n.basic_grid,
            steps: n.discretization.steps,
            ortho_interval: n.discretization.ortho_interval,
            ncheb: phototherm::oracle::DEFAULT_NCHEB,
            a_lo: n.a_lo,
            a_hi: n.a_hi,
            n_points: n.n_points,
            seed_ncheb: n.seed_ncheb,
            seed_probes: n.seed_probes,
            arclength_step: n.arclength_step,
            search_oscillatory: n.search_oscillatory,
            rt_list: vec![0.0, -250.0, -500.0, -1000.0],
            le_list: vec![1.0, 4.0, 10.0, 40.0],
            a: None,
            gamma_re: 0.0,
            gamma_im: 0.0,
            spectrum_count: 10,
            scan_points: 24,
            nx: 128,
            nz: 64,
            times: vec![0.0],
            probe_x1: None,
            probe_x3: 0.5,
            t_end: 4.0,
            t_samples: 401,
            output_dir: PathBuf::from("out"),
            format: Format::Csv,
            threads: 0,
        }
    }
}

/// Command-line overrides. Every flag is optional and replaces the
/// matching config key when present.
#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    /// TOML file with run settings
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub ra: Option<f64>,
    /// Thermal Rayleigh number
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub rt: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub rm: Option<f64>,
    /// Lewis number
    #[arg(long, global = true)]
    pub le: Option<f64>,
    /// Prandtl number
    #[arg(long, global = true)]
    pub pr: Option<f64>,
    /// Scaled swimming speed
    #[arg(long, global = true)]
    pub us: Option<f64>,
    #[arg(long, global = true)]
    pub optical_depth: Option<f64>,
    #[arg(long, global = true)]
    pub incident_intensity: Option<f64>,
    /// Taxis shape parameter; exclusive with --gc
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub chi: Option<f64>,
    /// Critical intensity; exclusive with --chi
    #[arg(long, global = true)]
    pub gc: Option<f64>,
    #[arg(long, global = true)]
    pub basic_grid: Option<usize>,
    #[arg(long, global = true)]
    pub steps: Option<usize>,
    #[arg(long, global = true)]
    pub ortho_interval: Option<usize>,
    #[arg(long, global = true)]
    pub ncheb: Option<usize>,
    #[arg(long, global = true)]
    pub a_lo: Option<f64>,
    #[arg(long, global = true)]
    pub a_hi: Option<f64>,
    #[arg(long, global = true)]
    pub n_points: Option<usize>,
    #[arg(long, global = true)]
    pub search_oscillatory: Option<bool>,
    /// Comma-separated thermal Rayleigh numbers
    #[arg(long, global = true, value_delimiter = ',', allow_hyphen_values = true)]
    pub rt_list: Option<Vec<f64>>,
    /// Comma-separated Lewis numbers
    #[arg(long, global = true, value_delimiter = ',')]
    pub le_list: Option<Vec<f64>>,
    /// Wavenumber for single-mode commands
    #[arg(long, global = true)]
    pub a: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub gamma_re: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub gamma_im: Option<f64>,
    #[arg(long, global = true)]
    pub spectrum_count: Option<usize>,
    #[arg(long, global = true)]
    pub nx: Option<usize>,
    #[arg(long, global = true)]
    pub nz: Option<usize>,
    /// Comma-separated frame times
    #[arg(long, global = true, value_delimiter = ',')]
    pub times: Option<Vec<f64>>,
    #[arg(long, global = true)]
    pub probe_x1: Option<f64>,
    #[arg(long, global = true)]
    pub probe_x3: Option<f64>,
    #[arg(long, global = true)]
    pub t_end: Option<f64>,
    #[arg(long, global = true)]
    pub t_samples: Option<usize>,
    #[arg(long, short, global = true)]
    pub output_dir: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Worker threads for sweeps; 0 uses every core
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

macro_rules! apply {
    ($cfg:ident, $ov:ident; $($opt:ident),* ; $($val:ident),*) => {
        $( if $ov.$opt.is_some() { $cfg.$opt = $ov.$opt.clone(); } )*
        $( if let Some(v) = $ov.$val.clone() { $cfg.$val = v; } )*
    };
}

impl RunConfig {
    pub fn from_toml(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::ReadConfig {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml(&text)
    }

    /// Config file (if any) with flags applied on top, validated.
    pub fn resolve(ov: &Overrides) -> CliResult<Self> {
        let mut cfg = match &ov.config {
            Some(path) => Self::load(path)?,
            None => Self::default(),
        };
        cfg.apply(ov);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn apply(&mut self, ov: &Overrides) {
        let cfg = self;
        apply!(cfg, ov;
            ra, rt, rm, le, pr, us, optical_depth, incident_intensity, chi, gc, a, probe_x1;
            basic_grid, steps, ortho_interval, ncheb, a_lo, a_hi, n_points, search_oscillatory,
            rt_list, le_list, gamma_re, gamma_im, spectrum_count, nx, nz, times, probe_x3, t_end,
            t_samples, output_dir, format, threads);
        // a flag for one taxis key displaces the other from the file
        if ov.chi.is_some() && ov.gc.is_none() {
            cfg.gc = None;
        }
        if ov.gc.is_some() && ov.chi.is_none() {
            cfg.chi = None;
        }
    }

    pub fn validate(&self) -> CliResult<()> {
        let bad = |msg: String| Err(CliError::Config(msg));
        if !(self.a_lo > 0.0 && self.a_hi > self.a_lo) {
            return bad(format!("need 0 < a_lo < a_hi, got [{}, {}]", self.a_lo, self.a_hi));
        }
        if self.n_points < 2 {
            return bad("n_points must be at least 2".into());
        }
        if !(self.arclength_step > 0.0) {
            return bad("arclength_step must be positive".into());
        }
        if self.rt_list.is_empty() || self.le_list.is_empty() || self.times.is_empty() {
            return bad("rt_list, le_list and times must be nonempty".into());
        }
        if self.steps == 0 || self.ortho_interval == 0 {
            return bad("steps and ortho_interval must be positive".into());
        }
        if self.a.is_some_and(|a| !(a > 0.0)) {
            return bad("a must be positive".into());
        }
        if !(self.t_end > 0.0) || self.t_samples < 2 {
            return bad("need t_end > 0 and at least 2 time samples".into());
        }
        if self.spectrum_count == 0 || self.scan_points < 3 {
            return bad("spectrum_count must be positive and scan_points at least 3".into());
        }
        if self.le_list.iter().any(|&v| !(v > 0.0)) {
            return bad("Lewis numbers must be positive".into());
        }
        if self.output_dir.as_os_str().is_empty() {
            return bad("output_dir is empty".into());
        }
        self.params().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(())
    }

    pub fn params_config(&self) -> ParamsConfig {
        ParamsConfig {
            ra: self.ra,
            rt: self.rt,
            rm: self.rm,
            le: self.le,
            pr: self.pr,
            us: self.us,
            optical_depth: self.optical_depth,
            incident_intensity: self.incident_intensity,
            chi: self.chi,
            gc: self.gc,
        }
    }

    pub fn params(&self) -> phototherm::Result<Params> {
        self.params_config().resolve()
    }

    pub fn discretization(&self) -> Discretization {
        Discretization {
            steps: self.steps,
            ortho_interval: self.ortho_interval,
        }
    }

    pub fn neutral(&self) -> NeutralConfig {
        NeutralConfig {
            a_lo: self.a_lo,
            a_hi: self.a_hi,
            n_points: self.n_points,
            basic_grid: self.basic_grid,
            discretization: self.discretization(),
            seed_ncheb: self.seed_ncheb,
            seed_probes: self.seed_probes,
            arclength_step: self.arclength_step,
            search_oscillatory: self.search_oscillatory,
        }
    }

    /// Required wavenumber for single-mode commands.
    pub fn wavenumber(&self) -> CliResult<f64> {
        self.a.ok_or_else(|| CliError::Config("this command needs a wavenumber (--a)".into()))
    }

    pub fn rayleigh(&self) -> CliResult<f64> {
        self.ra
            .filter(|r| *r > 0.0)
            .ok_or_else(|| CliError::Config("this command needs a positive bioconvection Rayleigh number (--ra)".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(RunConfig::from_toml("rt = -500.0\nbogus = 1\n").is_err());
    }

    #[test]
    fn flags_override_file_values() {
        let mut cfg = RunConfig::from_toml("rt = -500.0\ngc = 0.65\nn_points = 12\n").unwrap();
        let ov = Overrides {
            rt: Some(-1000.0),
            chi: Some(-0.485),
            ..Overrides::default()
        };
        cfg.apply(&ov);
        assert_eq!(cfg.rt, Some(-1000.0));
        assert_eq!(cfg.n_points, 12);
        assert_eq!((cfg.chi, cfg.gc), (Some(-0.485), None));
        cfg.validate().unwrap();
    }

    #[test]
    fn invalid_ranges_fail_validation() {
        let cfg = RunConfig {
            a_lo: 3.0,
            a_hi: 1.0,
            ..RunConfig::default()
        };
        assert!(matches!(cfg.validate(), Err(CliError::Config(_))));
        let both = RunConfig::from_toml("chi = 0.1\ngc = 0.6\n").unwrap();
        assert_eq!(both.validate().unwrap_err().exit_code(), 2);
    }
}
