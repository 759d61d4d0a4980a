//! Crate-wide error type aggregating the per-module failures, with a
//! coarse classification used by callers to pick process exit codes.

use thiserror::Error;

use crate::config::ConfigError;
use crate::params::ParamError;
use crate::propagation::PropagationError;
use crate::pulses::PulseError;
use crate::schedule::ScheduleError;
use crate::spectrum::SpectrumError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error(transparent)]
    Pulse(#[from] PulseError),
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
    #[error(transparent)]
    Spectrum(#[from] SpectrumError),
    #[error(transparent)]
    Propagation(#[from] PropagationError),
    #[error(transparent)]
    Config(#[from] ConfigError),
}

/// Whether a failure stems from the problem description (configuration,
/// parameters, schedule validation) or from the numerics of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Configuration,
    Numerical,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Param(_) | Error::Pulse(_) | Error::Schedule(_) | Error::Config(_) => {
                ErrorClass::Configuration
            }
            Error::Spectrum(e) => match e {
                SpectrumError::TooFewPoints(_) | SpectrumError::BadRange(..) => {
                    ErrorClass::Configuration
                }
                _ => ErrorClass::Numerical,
            },
            Error::Propagation(e) => match e {
                PropagationError::TooFewPoints(_)
                | PropagationError::BadExtent { .. }
                | PropagationError::BadTimeStep(_)
                | PropagationError::ScheduleRejected { .. }
                | PropagationError::BadProbe(_)
                | PropagationError::NonConstantField
                | PropagationError::BadWindow { .. }
                | PropagationError::Schedule(_)
                | PropagationError::Param(_) => ErrorClass::Configuration,
                _ => ErrorClass::Numerical,
            },
        }
    }
}
