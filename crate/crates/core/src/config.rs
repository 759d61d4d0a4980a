//! Experiment configuration: a JSON-serializable description of a spectrum,
//! propagate, or store run, with builders producing the validated domain
//! objects. Unknown keys are hard errors so typos cannot silently change a
//! simulation. Every run is fully deterministic; there is no randomness to
//! seed.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::Error;
use crate::params::{CavityParams, HyperfineField, Orientation};
use crate::propagation::{Grid1D, PropagationError};
use crate::pulses::PulseShape;
use crate::schedule::{FieldSchedule, Segment};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("mode '{mode}' requires the '{section}' section")]
    MissingSection { mode: &'static str, section: &'static str },
    #[error("could not read config {path}: {reason}")]
    Io { path: String, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Spectrum,
    Propagate,
    Store,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Spectrum => "spectrum",
            Mode::Propagate => "propagate",
            Mode::Store => "store",
        }
    }
}

/// Cavity parameters in units of gamma. `a_in` is `[re, im]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CavityConfig {
    pub kappa: f64,
    pub kappa_r: f64,
    #[serde(default)]
    pub delta_c: f64,
    pub g: f64,
    pub n_nuclei: f64,
    #[serde(default = "default_a_in")]
    pub a_in: [f64; 2],
    /// Skip the bad-cavity validity guard (kappa >= 10 g sqrt(N)).
    #[serde(default)]
    pub allow_bad_cavity: bool,
}

fn default_a_in() -> [f64; 2] {
    [1.0, 0.0]
}

/// Static hyperfine field: magnitude in Tesla, orientation +1 or -1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldConfig {
    pub b_tesla: f64,
    #[serde(default = "default_orientation")]
    pub orientation: i8,
}

fn default_orientation() -> i8 {
    1
}

/// One schedule segment: times in tau0, fields in Tesla, linear ramp between
/// the endpoint values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentConfig {
    pub t_start: f64,
    pub t_end: f64,
    pub b_start: f64,
    pub b_end: f64,
    #[serde(default = "default_orientation")]
    pub orientation: i8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleConfig {
    pub segments: Vec<SegmentConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum PulseConfig {
    /// `amplitude * exp(-(t/t0)^2)`, peaked at t = 0.
    Gaussian { amplitude: f64, t0: f64 },
    /// Synchrotron Mössbauer source profile with optical depth `xi`.
    BesselSr {
        #[serde(default = "default_xi")]
        xi: f64,
        #[serde(default = "default_scale")]
        scale: f64,
    },
    /// CSV file with header `t_tau0,re_amp,im_amp`.
    Tabulated { path: String },
}

fn default_xi() -> f64 {
    4.0
}

fn default_scale() -> f64 {
    1.0
}

/// Spatial grid in units of c*tau0 plus the nominal time step in tau0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default)]
    pub z_min: f64,
    pub z_max: f64,
    pub n_points: usize,
    pub dt: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    pub t_start: f64,
    pub t_end: f64,
}

/// Detuning scan in units of gamma.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanConfig {
    pub delta_min: f64,
    pub delta_max: f64,
    pub n_points: usize,
}

/// Complete description of one experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub cavity: CavityConfig,
    /// Static field (spectrum and propagate modes).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<FieldConfig>,
    /// Time-dependent schedule (store mode).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<ScheduleConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pulse: Option<PulseConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time: Option<TimeConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scan: Option<ScanConfig>,
    /// Probe plane for outflow records \[c*tau0\]; defaults to 3/4 of the
    /// domain.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probe_z: Option<f64>,
    /// Override of the reflectivity coupling constant `[re, im]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coupling_const: Option<[f64; 2]>,
    /// Enable incoherent nuclear decay of the matter fraction.
    #[serde(default)]
    pub decay: bool,
    /// Times \[tau0\] at which full field snapshots are recorded.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub snapshot_times: Vec<f64>,
    /// Peak-velocity fit window `[t_lo, t_hi]` (propagate mode); defaults to
    /// the last 40% of the run.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit_window: Option<[f64; 2]>,
    /// Optional linear coefficient \[urad per gamma\] labeling the cavity
    /// detuning as an incidence-angle deviation in reports.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub angle_coeff_urad_per_gamma: Option<f64>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        serde_json::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.display().to_string(),
            reason: e.to_string(),
        })?;
        Self::from_json(&text)
    }

    pub fn cavity_params(&self) -> Result<CavityParams, Error> {
        let c = &self.cavity;
        let a_in = Complex64::new(c.a_in[0], c.a_in[1]);
        let params = if c.allow_bad_cavity {
            CavityParams::without_regime_check(c.kappa, c.kappa_r, c.delta_c, c.g, c.n_nuclei, a_in)
        } else {
            CavityParams::new(c.kappa, c.kappa_r, c.delta_c, c.g, c.n_nuclei, a_in)
        };
        Ok(params?)
    }

    pub fn hyperfine_field(&self) -> Result<HyperfineField, Error> {
        let f = self
            .field
            .as_ref()
            .ok_or(ConfigError::MissingSection { mode: self.mode.as_str(), section: "field" })?;
        Ok(HyperfineField::from_field_strength(f.b_tesla, Orientation::from_sign(f.orientation)?)?)
    }

    /// The schedule for store mode, or the constant-field schedule spanning
    /// the time window for propagate mode.
    pub fn build_schedule(&self) -> Result<FieldSchedule, Error> {
        if let Some(s) = &self.schedule {
            let segments = s
                .segments
                .iter()
                .map(|seg| {
                    Ok(Segment {
                        t_start: seg.t_start,
                        t_end: seg.t_end,
                        b_start: seg.b_start,
                        b_end: seg.b_end,
                        orientation: Orientation::from_sign(seg.orientation)?,
                    })
                })
                .collect::<Result<Vec<_>, Error>>()?;
            return Ok(FieldSchedule::new(segments)?);
        }
        let f = self.field.as_ref().ok_or(ConfigError::MissingSection {
            mode: self.mode.as_str(),
            section: "schedule (or field)",
        })?;
        let (t_start, t_end) = self.time_window()?;
        Ok(FieldSchedule::constant(
            f.b_tesla,
            Orientation::from_sign(f.orientation)?,
            t_start,
            t_end,
        )?)
    }

    pub fn build_pulse(&self) -> Result<PulseShape, Error> {
        let p = self
            .pulse
            .as_ref()
            .ok_or(ConfigError::MissingSection { mode: self.mode.as_str(), section: "pulse" })?;
        Ok(match p {
            PulseConfig::Gaussian { amplitude, t0 } => PulseShape::gaussian(*amplitude, *t0)?,
            PulseConfig::BesselSr { xi, scale } => PulseShape::bessel_sr(*xi, *scale)?,
            PulseConfig::Tabulated { path } => {
                PulseShape::tabulated_from_csv(std::path::Path::new(path))?
            }
        })
    }

    pub fn build_grid(&self) -> Result<Grid1D, Error> {
        let g = self
            .grid
            .as_ref()
            .ok_or(ConfigError::MissingSection { mode: self.mode.as_str(), section: "grid" })?;
        Ok(Grid1D::new(g.z_min, g.z_max, g.n_points, g.dt)?)
    }

    pub fn time_window(&self) -> Result<(f64, f64), Error> {
        let t = self
            .time
            .as_ref()
            .ok_or(ConfigError::MissingSection { mode: self.mode.as_str(), section: "time" })?;
        Ok((t.t_start, t.t_end))
    }

    pub fn scan_config(&self) -> Result<&ScanConfig, Error> {
        Ok(self
            .scan
            .as_ref()
            .ok_or(ConfigError::MissingSection { mode: self.mode.as_str(), section: "scan" })?)
    }

    /// Grid index of the probe plane (defaults to 3/4 of the domain).
    pub fn probe_index(&self, grid: &Grid1D) -> Result<usize, Error> {
        let z = self
            .probe_z
            .unwrap_or(grid.z_min + 0.75 * (grid.z_max - grid.z_min));
        if !(z > grid.z_min && z < grid.z_max) {
            return Err(PropagationError::BadProbe(z).into());
        }
        let idx = ((z - grid.z_min) / grid.dz()).round() as usize;
        Ok(idx.clamp(1, grid.n_points - 1))
    }

    /// Velocity fit window, defaulting to the last 40% of the run.
    pub fn fit_window(&self, t_start: f64, t_end: f64) -> (f64, f64) {
        match self.fit_window {
            Some([lo, hi]) => (lo, hi),
            None => (t_end - 0.4 * (t_end - t_start), t_end),
        }
    }

    pub fn coupling_const_override(&self) -> Option<Complex64> {
        self.coupling_const.map(|[re, im]| Complex64::new(re, im))
    }
}
