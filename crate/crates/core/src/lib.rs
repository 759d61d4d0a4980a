//! Quantum cavity model for nuclear x-ray EIT in thin-film cavities.
//!
//! A hyperfine magnetic field splits the nuclear levels of a resonant layer
//! inside a hard-x-ray cavity and plays the role of the EIT control field:
//! the steady-state reflectivity develops a transparency dip, a narrow-band
//! pulse propagates at the strongly reduced group velocity
//! `v_g = c / (1 + 2 g^2 N / (3 phi^2))`, and switching the field off maps
//! the pulse onto collective nuclear coherences, stopping it until the field
//! returns. The crate provides:
//!
//! - [`params`]: natural units, cavity/field parameters, collective
//!   quantities, mixing angle, and group velocity;
//! - [`spectrum`]: the steady-state coherence sum, reflectivity scans, and
//!   transparency-dip analysis;
//! - [`pulses`]: Gaussian, synchrotron Mössbauer source (Bessel-modulated),
//!   and tabulated input pulses;
//! - [`schedule`]: piecewise-linear field schedules with orientation sign,
//!   mixing-angle traces, and validation;
//! - [`propagation`]: the semi-Lagrangian dark-state polariton solver, the
//!   independent upwind cross-check, and storage metrics;
//! - [`config`]: JSON experiment descriptions shared with the CLI.
//!
//! # Example
//!
//! Locate the transparency dip in a reflectivity scan:
//!
//! ```
//! use num_complex::Complex64;
//! use xeit_core::*;
//!
//! let params = CavityParams::new(4.6e5, 3.1e5, 0.0, 2.5, 1.0e6,
//!     Complex64::new(1.0, 0.0))?;
//! let field = HyperfineField::from_field_strength(6.4, Orientation::Parallel)?;
//! let scan = scan((-30.0, 30.0), 6001, &params, &field)?;
//! let dip = analyze_dip(&scan)?;
//! assert!(dip.dip_position.abs() < 0.1);
//! assert!(dip.flank_peaks[1] > 5.0 && dip.flank_peaks[1] < 7.0);
//! # Ok::<(), xeit_core::Error>(())
//! ```

pub mod bessel;
pub mod config;
pub mod error;
mod interp;
pub mod params;
pub mod propagation;
pub mod pulses;
pub mod schedule;
pub mod spectrum;

pub use bessel::bessel_j1;
pub use config::{ExperimentConfig, Mode};
pub use error::{Error, ErrorClass};
pub use params::{
    derive_collective, group_velocity, mixing_angle, phi_from_field, CavityParams,
    CollectiveQuantities, HyperfineField, NaturalUnits, Orientation,
};
pub use propagation::{
    fit_peak_velocity, propagate_comparison, run, simulate, slowlight_reference, storage_metrics,
    ComparisonOutput, FieldSnapshot, Grid1D, PolaritonSolver, PolaritonState, RunOutput,
    StorageMetrics, TimeSeries,
};
pub use pulses::{bessel_sr_intensity, gaussian_amplitude, sample_pulse, PulseShape};
pub use schedule::{
    angle_trace, validate_schedule, FieldSchedule, MixingAngleTrace, ScheduleIssue, Segment,
    Severity,
};
pub use spectrum::{
    analyze_dip, coherence_sum, default_coupling_const, reflectivity_amplitude, scan, scan_with,
    DipReport, SpectrumScan,
};
