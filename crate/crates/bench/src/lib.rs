//! Shared fixtures for the criterion benchmarks.

use num_complex::Complex64;
use xeit_core::*;

/// Desk-scale cavity with g sqrt(N) = 10.
pub fn desk_params() -> CavityParams {
    CavityParams::new(1000.0, 500.0, 0.0, 1.0, 100.0, Complex64::new(1.0, 0.0)).unwrap()
}

/// Strong-coupling cavity used for reflectivity spectra (g sqrt(N) = 2500).
pub fn spectrum_params() -> CavityParams {
    CavityParams::new(4.6e5, 3.1e5, 0.0, 2.5, 1.0e6, Complex64::new(1.0, 0.0)).unwrap()
}

pub fn hyperfine_6gamma() -> HyperfineField {
    HyperfineField::from_field_strength(6.4, Orientation::Parallel).unwrap()
}
