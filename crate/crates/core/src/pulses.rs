//! Input pulse amplitude models: Gaussian probe, synchrotron Mössbauer source
//! profile with Bessel modulation, and tabulated custom shapes.

use num_complex::Complex64;
use thiserror::Error;

use crate::bessel::bessel_j1;
use crate::interp::MonotoneCubic;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PulseError {
    #[error("gaussian width t0 must be positive (got {0})")]
    NonPositiveWidth(f64),
    #[error("optical depth xi must be positive (got {0})")]
    NonPositiveOpticalDepth(f64),
    #[error("pulse amplitude must be finite")]
    NonFiniteAmplitude,
    #[error("negative time {0} rejected for the source intensity profile")]
    NegativeTime(f64),
    #[error("tabulated pulse needs at least two samples (got {0})")]
    TooFewSamples(usize),
    #[error("tabulated pulse times must be strictly increasing and finite")]
    NonMonotonicTimes,
    #[error("tabulated pulse has {times} times but {amps} amplitude samples")]
    LengthMismatch { times: usize, amps: usize },
    #[error("time grid must be strictly increasing, finite, and NaN-free")]
    BadTimeGrid,
    #[error("could not read tabulated pulse from {path}: {reason}")]
    CsvRead { path: String, reason: String },
}

/// Temporal amplitude model of the incoming x-ray pulse.
#[derive(Debug, Clone, PartialEq)]
pub enum PulseShape {
    /// `Omega_p0 * exp(-(t/t0)^2)`, peaked at t = 0, zero phase.
    Gaussian { amplitude: f64, t0: f64 },
    /// Square root of the synchrotron Mössbauer source intensity, starting at
    /// t = 0 with amplitude `scale * xi`, zero phase.
    BesselSr { xi: f64, scale: f64 },
    /// Monotone-cubic interpolation of sampled complex amplitudes inside the
    /// sample support, zero outside.
    Tabulated { times: Vec<f64>, amplitudes: Vec<Complex64> },
}

impl PulseShape {
    pub fn gaussian(amplitude: f64, t0: f64) -> Result<Self, PulseError> {
        if t0 <= 0.0 || !t0.is_finite() {
            return Err(PulseError::NonPositiveWidth(t0));
        }
        if !amplitude.is_finite() {
            return Err(PulseError::NonFiniteAmplitude);
        }
        Ok(Self::Gaussian { amplitude, t0 })
    }

    pub fn bessel_sr(xi: f64, scale: f64) -> Result<Self, PulseError> {
        if xi <= 0.0 || !xi.is_finite() {
            return Err(PulseError::NonPositiveOpticalDepth(xi));
        }
        if !scale.is_finite() {
            return Err(PulseError::NonFiniteAmplitude);
        }
        Ok(Self::BesselSr { xi, scale })
    }

    pub fn tabulated(times: Vec<f64>, amplitudes: Vec<Complex64>) -> Result<Self, PulseError> {
        if times.len() != amplitudes.len() {
            return Err(PulseError::LengthMismatch { times: times.len(), amps: amplitudes.len() });
        }
        if times.len() < 2 {
            return Err(PulseError::TooFewSamples(times.len()));
        }
        if !times.iter().all(|t| t.is_finite()) || times.windows(2).any(|w| w[0] >= w[1]) {
            return Err(PulseError::NonMonotonicTimes);
        }
        if !amplitudes.iter().all(|a| a.re.is_finite() && a.im.is_finite()) {
            return Err(PulseError::NonFiniteAmplitude);
        }
        Ok(Self::Tabulated { times, amplitudes })
    }

    /// Load a tabulated pulse from CSV with header `t_tau0,re_amp,im_amp`.
    pub fn tabulated_from_csv(path: &std::path::Path) -> Result<Self, PulseError> {
        let err = |reason: String| PulseError::CsvRead {
            path: path.display().to_string(),
            reason,
        };
        let text = std::fs::read_to_string(path).map_err(|e| err(e.to_string()))?;
        let mut times = Vec::new();
        let mut amps = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if lineno == 0 {
                if line != "t_tau0,re_amp,im_amp" {
                    return Err(err(format!("expected header 't_tau0,re_amp,im_amp', got '{line}'")));
                }
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 3 {
                return Err(err(format!("line {}: expected 3 fields", lineno + 1)));
            }
            let parse = |s: &str| {
                s.trim().parse::<f64>().map_err(|e| err(format!("line {}: {e}", lineno + 1)))
            };
            times.push(parse(fields[0])?);
            amps.push(Complex64::new(parse(fields[1])?, parse(fields[2])?));
        }
        Self::tabulated(times, amps)
    }

    /// Complex amplitude at time `t`. Zero outside a tabulated or source
    /// profile's support.
    pub fn amplitude(&self, t: f64) -> Complex64 {
        match self {
            Self::Gaussian { amplitude, t0 } => gaussian_amplitude(t, *amplitude, *t0),
            Self::BesselSr { xi, scale } => {
                if t < 0.0 {
                    Complex64::new(0.0, 0.0)
                } else {
                    let intensity = bessel_sr_intensity(t, *xi)
                        .expect("non-negative t cannot fail");
                    Complex64::new(scale * intensity.sqrt(), 0.0)
                }
            }
            Self::Tabulated { times, amplitudes } => {
                // Rebuilding the interpolant per call would be wasteful in the
                // solver loop; sampled shapes go through `sampler()` there.
                self.make_sampler(times, amplitudes).eval(t)
            }
        }
    }

    /// Peak of |amplitude| over the pulse support.
    pub fn peak_abs(&self) -> f64 {
        match self {
            Self::Gaussian { amplitude, .. } => amplitude.abs(),
            Self::BesselSr { xi, scale } => (scale * xi).abs(),
            Self::Tabulated { amplitudes, .. } => {
                amplitudes.iter().map(|a| a.norm()).fold(0.0, f64::max)
            }
        }
    }

    /// Duration over which |amplitude| stays above `rel_cutoff * peak`,
    /// measured by dense sampling of the support.
    pub fn support_duration(&self, rel_cutoff: f64) -> f64 {
        match self {
            Self::Gaussian { t0, .. } => 2.0 * t0 * (1.0 / rel_cutoff).ln().sqrt(),
            _ => {
                let (lo, hi) = self.sampling_window();
                let peak = self.peak_abs();
                let sampler = self.sampler();
                let n = 8192;
                let dt = (hi - lo) / n as f64;
                let mut first = None;
                let mut last = lo;
                for i in 0..=n {
                    let t = lo + i as f64 * dt;
                    if sampler.amplitude(t).norm() > rel_cutoff * peak {
                        if first.is_none() {
                            first = Some(t);
                        }
                        last = t;
                    }
                }
                first.map_or(0.0, |f| last - f)
            }
        }
    }

    /// A window guaranteed to contain the pulse support (for sampled checks).
    pub fn sampling_window(&self) -> (f64, f64) {
        match self {
            Self::Gaussian { t0, .. } => (-8.0 * t0, 8.0 * t0),
            Self::BesselSr { .. } => (0.0, 40.0),
            Self::Tabulated { times, .. } => (times[0], *times.last().unwrap()),
        }
    }

    fn make_sampler(&self, times: &[f64], amplitudes: &[Complex64]) -> TabulatedSampler {
        TabulatedSampler {
            re: MonotoneCubic::new(times.to_vec(), amplitudes.iter().map(|a| a.re).collect()),
            im: MonotoneCubic::new(times.to_vec(), amplitudes.iter().map(|a| a.im).collect()),
        }
    }

    /// Reusable evaluator (tabulated shapes precompute their interpolant).
    pub fn sampler(&self) -> PulseSampler<'_> {
        match self {
            Self::Tabulated { times, amplitudes } => {
                PulseSampler { shape: self, table: Some(self.make_sampler(times, amplitudes)) }
            }
            _ => PulseSampler { shape: self, table: None },
        }
    }
}

/// Evaluator that amortizes interpolant construction for tabulated shapes.
pub struct PulseSampler<'a> {
    shape: &'a PulseShape,
    table: Option<TabulatedSampler>,
}

struct TabulatedSampler {
    re: MonotoneCubic,
    im: MonotoneCubic,
}

impl TabulatedSampler {
    fn eval(&self, t: f64) -> Complex64 {
        Complex64::new(self.re.eval(t), self.im.eval(t))
    }
}

impl PulseSampler<'_> {
    pub fn amplitude(&self, t: f64) -> Complex64 {
        match &self.table {
            Some(table) => table.eval(t),
            None => self.shape.amplitude(t),
        }
    }
}

/// Gaussian probe amplitude `Omega_p0 * exp(-(t/t0)^2)` with zero phase.
pub fn gaussian_amplitude(t: f64, omega_p0: f64, t0: f64) -> Complex64 {
    let arg = t / t0;
    Complex64::new(omega_p0 * (-arg * arg).exp(), 0.0)
}

/// Temporal intensity of the synchrotron Mössbauer source,
/// `(xi / sqrt(xi g t) * J1(2 sqrt(xi g t)))^2 * exp(-g t)` with `g = gamma = 1`.
///
/// The removable singularity at t = 0 evaluates to its analytic limit `xi^2`.
pub fn bessel_sr_intensity(t: f64, xi: f64) -> Result<f64, PulseError> {
    if xi <= 0.0 || !xi.is_finite() {
        return Err(PulseError::NonPositiveOpticalDepth(xi));
    }
    if t.is_nan() || t < 0.0 {
        return Err(PulseError::NegativeTime(t));
    }
    if t == 0.0 {
        return Ok(xi * xi);
    }
    let root = (xi * t).sqrt();
    let modulation = xi / root * bessel_j1(2.0 * root);
    Ok(modulation * modulation * (-t).exp())
}

/// Evaluate a pulse shape on a strictly increasing time grid.
pub fn sample_pulse(shape: &PulseShape, time_grid: &[f64]) -> Result<Vec<Complex64>, PulseError> {
    if !time_grid.iter().all(|t| t.is_finite()) || time_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(PulseError::BadTimeGrid);
    }
    let sampler = shape.sampler();
    Ok(time_grid.iter().map(|&t| sampler.amplitude(t)).collect())
}
