//! Time-dependent hyperfine-field schedules phi(t) with orientation sign and
//! finite linear ramps, the induced mixing-angle traces, and validation of
//! schedules against boundary-compatibility and adiabaticity constraints.

use thiserror::Error;

use crate::params::{
    derive_collective, mixing_angle, phi_from_field, CavityParams, Orientation, ParamError,
};
use crate::pulses::PulseShape;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScheduleError {
    #[error("schedule must contain at least one segment")]
    Empty,
    #[error("segment {index} has non-increasing times [{t_start}, {t_end}]")]
    BadSegmentTimes { index: usize, t_start: f64, t_end: f64 },
    #[error("segment {index} has a negative field")]
    NegativeField { index: usize },
    #[error(
        "segments {index} and {} are not contiguous: {prev_end} vs {next_start} \
         (gaps and overlaps are forbidden)", index + 1
    )]
    NotContiguous { index: usize, prev_end: f64, next_start: f64 },
    #[error("t = {t} lies outside the schedule window [{start}, {end}]")]
    OutOfWindow { t: f64, start: f64, end: f64 },
    #[error(transparent)]
    Param(#[from] ParamError),
}

/// One piecewise-linear schedule segment: the field magnitude ramps linearly
/// from `b_start` to `b_end` \[Tesla\] over `[t_start, t_end]` \[tau0\], with a
/// fixed orientation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub t_start: f64,
    pub t_end: f64,
    pub b_start: f64,
    pub b_end: f64,
    pub orientation: Orientation,
}

/// A contiguous, gap-free sequence of segments covering the full simulation
/// window.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSchedule {
    segments: Vec<Segment>,
}

impl FieldSchedule {
    pub fn new(segments: Vec<Segment>) -> Result<Self, ScheduleError> {
        if segments.is_empty() {
            return Err(ScheduleError::Empty);
        }
        for (i, seg) in segments.iter().enumerate() {
            if seg.t_start >= seg.t_end
                || !seg.t_start.is_finite()
                || !seg.t_end.is_finite()
            {
                return Err(ScheduleError::BadSegmentTimes {
                    index: i,
                    t_start: seg.t_start,
                    t_end: seg.t_end,
                });
            }
            if seg.b_start < 0.0
                || seg.b_end < 0.0
                || !seg.b_start.is_finite()
                || !seg.b_end.is_finite()
            {
                return Err(ScheduleError::NegativeField { index: i });
            }
        }
        for i in 0..segments.len() - 1 {
            if segments[i].t_end != segments[i + 1].t_start {
                return Err(ScheduleError::NotContiguous {
                    index: i,
                    prev_end: segments[i].t_end,
                    next_start: segments[i + 1].t_start,
                });
            }
        }
        Ok(Self { segments })
    }

    /// A single constant-field segment spanning `[t_start, t_end]`.
    pub fn constant(
        b: f64,
        orientation: Orientation,
        t_start: f64,
        t_end: f64,
    ) -> Result<Self, ScheduleError> {
        Self::new(vec![Segment { t_start, t_end, b_start: b, b_end: b, orientation }])
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    /// `(t_start, t_end)` of the covered window.
    pub fn window(&self) -> (f64, f64) {
        (self.segments[0].t_start, self.segments.last().unwrap().t_end)
    }

    /// Interior segment boundaries, in increasing order.
    pub fn breakpoints(&self) -> impl Iterator<Item = f64> + '_ {
        self.segments.iter().skip(1).map(|s| s.t_start)
    }

    /// `Some((b, orientation))` when the field is constant over the window.
    pub fn constant_field(&self) -> Option<(f64, Orientation)> {
        let first = &self.segments[0];
        let constant = self.segments.iter().all(|s| {
            s.b_start == first.b_start
                && s.b_end == first.b_start
                && s.orientation == first.orientation
        });
        (constant && first.b_start == first.b_end)
            .then_some((first.b_start, first.orientation))
    }

    fn segment_at(&self, t: f64) -> Result<&Segment, ScheduleError> {
        let (start, end) = self.window();
        if !(t >= start && t <= end) {
            return Err(ScheduleError::OutOfWindow { t, start, end });
        }
        // Shared breakpoints belong to the later segment (right-continuous).
        let idx = self.segments.partition_point(|s| s.t_start <= t);
        Ok(&self.segments[(idx - 1).min(self.segments.len() - 1)])
    }

    /// Field magnitude \[Tesla\] and orientation at time `t` (linear
    /// interpolation within the active segment).
    pub fn field_at(&self, t: f64) -> Result<(f64, Orientation), ScheduleError> {
        let seg = self.segment_at(t)?;
        let frac = (t - seg.t_start) / (seg.t_end - seg.t_start);
        Ok((seg.b_start + (seg.b_end - seg.b_start) * frac, seg.orientation))
    }

    /// Splitting and orientation at time `t`: linear interpolation of the
    /// field within the active segment, mapped through the calibration.
    pub fn phi_at(&self, t: f64) -> Result<(f64, Orientation), ScheduleError> {
        let (b, orientation) = self.field_at(t)?;
        Ok((phi_from_field(b)?, orientation))
    }

    /// Signed mixing angle at time `t`: `(orientation * cos(theta), sin(theta))`
    /// with `sin(theta) >= 0` always.
    pub fn angle_at(&self, t: f64, params: &CavityParams) -> Result<(f64, f64), ScheduleError> {
        let (phi, orientation) = self.phi_at(t)?;
        let (c, s) = mixing_angle(phi, params.g, params.n_nuclei)?;
        Ok((orientation.sign() * c, s))
    }

    /// Polariton velocity `cos^2(theta)` \[c\] at time `t`; blind to the
    /// orientation sign.
    pub fn velocity_at(&self, t: f64, params: &CavityParams) -> Result<f64, ScheduleError> {
        let (c, _) = self.angle_at(t, params)?;
        Ok(c * c)
    }
}

/// Sampled mixing-angle history induced by a schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct MixingAngleTrace {
    pub times: Vec<f64>,
    /// `orientation * cos(theta)` per sample.
    pub cos_theta_signed: Vec<f64>,
    /// `sin(theta) >= 0` per sample.
    pub sin_theta: Vec<f64>,
    /// `cos^2(theta)` \[c\] per sample.
    pub velocity: Vec<f64>,
}

/// Evaluate the mixing angle along `time_grid` (which must lie inside the
/// schedule window).
pub fn angle_trace(
    schedule: &FieldSchedule,
    params: &CavityParams,
    time_grid: &[f64],
) -> Result<MixingAngleTrace, ScheduleError> {
    let mut cos_theta_signed = Vec::with_capacity(time_grid.len());
    let mut sin_theta = Vec::with_capacity(time_grid.len());
    let mut velocity = Vec::with_capacity(time_grid.len());
    for &t in time_grid {
        let (c, s) = schedule.angle_at(t, params)?;
        cos_theta_signed.push(c);
        sin_theta.push(s);
        velocity.push(c * c);
    }
    Ok(MixingAngleTrace { times: time_grid.to_vec(), cos_theta_signed, sin_theta, velocity })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IssueKind {
    /// Field switch-off begins while the pulse is still entering; the
    /// polariton boundary value Omega_in / cos(theta) would diverge.
    SwitchDuringInflow,
    /// cos(theta) vanishes somewhere while the inflow is still active.
    BoundaryDivergence,
    /// The spatially compressed pulse does not fit in the domain.
    PulseDoesNotFit,
    /// Ramp faster than the adiabaticity heuristic 10 / gamma'.
    FastRamp,
    /// Discontinuous field jump at a segment boundary.
    InstantSwitch,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleIssue {
    pub severity: Severity,
    pub kind: IssueKind,
    pub message: String,
}

impl ScheduleIssue {
    fn error(kind: IssueKind, message: String) -> Self {
        Self { severity: Severity::Error, kind, message }
    }

    fn warning(kind: IssueKind, message: String) -> Self {
        Self { severity: Severity::Warning, kind, message }
    }
}

/// Relative inflow amplitude below which the pulse counts as "fully inside".
pub const INFLOW_CUTOFF: f64 = 1e-3;

/// Check a schedule against a pulse and domain. Errors abort simulation
/// setup; warnings are advisory.
pub fn validate_schedule(
    schedule: &FieldSchedule,
    params: &CavityParams,
    pulse: &PulseShape,
    domain_length: f64,
) -> Vec<ScheduleIssue> {
    let mut issues = Vec::new();
    let (start, end) = schedule.window();
    let peak = pulse.peak_abs();
    let sampler = pulse.sampler();

    // (a) Switch-off must not begin before the inflow has decayed.
    if let Some(t_off) = switch_off_start(schedule) {
        let amp = sampler.amplitude(t_off).norm();
        if peak > 0.0 && amp > INFLOW_CUTOFF * peak {
            issues.push(ScheduleIssue::error(
                IssueKind::SwitchDuringInflow,
                format!(
                    "switch-off begins at t = {t_off} while the inflow amplitude \
                     is still {:.3e} of peak (limit {INFLOW_CUTOFF:.0e})",
                    amp / peak
                ),
            ));
        }
    }

    // Direct divergence guard: active inflow requires a finite cos(theta).
    if peak > 0.0 {
        let n = 4096;
        let dt = (end - start) / n as f64;
        let mut reported = false;
        for i in 0..=n {
            let t = start + i as f64 * dt;
            if sampler.amplitude(t).norm() <= INFLOW_CUTOFF * peak {
                continue;
            }
            match schedule.angle_at(t, params) {
                Ok((c, _)) if c.abs() >= 1e-6 => {}
                _ => {
                    if !reported {
                        issues.push(ScheduleIssue::error(
                            IssueKind::BoundaryDivergence,
                            format!("cos(theta) vanishes at t = {t} during active inflow"),
                        ));
                        reported = true;
                    }
                }
            }
        }
    }

    // (b) The compressed pulse must fit in the domain.
    if peak > 0.0 {
        if let Ok(v_entry) = schedule.velocity_at(start, params) {
            let duration = pulse.support_duration(INFLOW_CUTOFF);
            let compressed = v_entry * duration;
            if compressed > domain_length {
                issues.push(ScheduleIssue::error(
                    IssueKind::PulseDoesNotFit,
                    format!(
                        "compressed pulse length {compressed:.4} exceeds the domain \
                         length {domain_length:.4}"
                    ),
                ));
            }
        }
    }

    // Adiabaticity heuristic: ramps shorter than 10 / gamma' are flagged.
    let ramp_limit = 10.0 / derive_collective(params).gamma_prime;
    for (i, seg) in schedule.segments().iter().enumerate() {
        if seg.b_start != seg.b_end && seg.t_end - seg.t_start < ramp_limit {
            issues.push(ScheduleIssue::warning(
                IssueKind::FastRamp,
                format!(
                    "segment {i} ramps over {:.4} tau0, faster than the \
                     adiabaticity heuristic {ramp_limit:.4}",
                    seg.t_end - seg.t_start
                ),
            ));
        }
    }
    for pair in schedule.segments().windows(2) {
        if pair[0].b_end != pair[1].b_start {
            issues.push(ScheduleIssue::warning(
                IssueKind::InstantSwitch,
                format!("instantaneous field jump at t = {}", pair[1].t_start),
            ));
        }
    }

    issues
}

/// Earliest time at which the field starts decreasing (ramp-down start or a
/// downward jump at a segment boundary).
fn switch_off_start(schedule: &FieldSchedule) -> Option<f64> {
    let mut earliest: Option<f64> = None;
    let mut push = |t: f64| {
        earliest = Some(earliest.map_or(t, |e: f64| e.min(t)));
    };
    for seg in schedule.segments() {
        if seg.b_end < seg.b_start {
            push(seg.t_start);
        }
    }
    for pair in schedule.segments().windows(2) {
        if pair[1].b_start < pair[0].b_end {
            push(pair[1].t_start);
        }
    }
    earliest
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::NaturalUnits;
    use approx::assert_relative_eq;
    use num_complex::Complex64;

    fn desk_params() -> CavityParams {
        // g sqrt(N) = 10 realized as g = 1, N = 100.
        CavityParams::new(1000.0, 500.0, 0.0, 1.0, 100.0, Complex64::new(1.0, 0.0)).unwrap()
    }

    fn storage_schedule(release: Orientation) -> FieldSchedule {
        FieldSchedule::new(vec![
            Segment {
                t_start: -0.75,
                t_end: 1.3,
                b_start: 6.4,
                b_end: 6.4,
                orientation: Orientation::Parallel,
            },
            Segment {
                t_start: 1.3,
                t_end: 2.2,
                b_start: 0.0,
                b_end: 0.0,
                orientation: Orientation::Parallel,
            },
            Segment { t_start: 2.2, t_end: 3.3, b_start: 6.4, b_end: 6.4, orientation: release },
        ])
        .unwrap()
    }

    #[test]
    fn constant_segment_value() {
        let s = FieldSchedule::constant(6.4, Orientation::Parallel, 0.0, 2.0).unwrap();
        for t in [0.0, 0.7, 2.0] {
            let (phi, orientation) = s.phi_at(t).unwrap();
            assert_eq!(phi, 6.0);
            assert_eq!(orientation, Orientation::Parallel);
        }
        assert!(s.phi_at(2.5).is_err());
        assert_eq!(s.constant_field(), Some((6.4, Orientation::Parallel)));
    }

    #[test]
    fn linear_ramp_midpoint() {
        let ramp = 50.0 / NaturalUnits::FE57_TAU0_NS;
        let s = FieldSchedule::new(vec![
            Segment {
                t_start: 0.0,
                t_end: 1.3,
                b_start: 6.4,
                b_end: 6.4,
                orientation: Orientation::Parallel,
            },
            Segment {
                t_start: 1.3,
                t_end: 1.3 + ramp,
                b_start: 6.4,
                b_end: 0.0,
                orientation: Orientation::Parallel,
            },
        ])
        .unwrap();
        let (phi, _) = s.phi_at(1.3 + 0.5 * ramp).unwrap();
        assert_relative_eq!(phi, 3.0, max_relative = 1e-12);
        // Off segment evaluates to zero splitting.
        let off = FieldSchedule::constant(0.0, Orientation::Parallel, 0.0, 1.0).unwrap();
        assert_eq!(off.phi_at(0.5).unwrap(), (0.0, Orientation::Parallel));
    }

    #[test]
    fn contiguity_is_enforced() {
        let r = FieldSchedule::new(vec![
            Segment {
                t_start: 0.0,
                t_end: 1.0,
                b_start: 6.4,
                b_end: 6.4,
                orientation: Orientation::Parallel,
            },
            Segment {
                t_start: 1.1,
                t_end: 2.0,
                b_start: 6.4,
                b_end: 6.4,
                orientation: Orientation::Parallel,
            },
        ]);
        assert!(matches!(r, Err(ScheduleError::NotContiguous { .. })));
    }

    #[test]
    fn angle_trace_step_velocity() {
        let params = desk_params();
        let schedule = storage_schedule(Orientation::Parallel);
        let grid: Vec<f64> = (0..=810).map(|i| -0.75 + i as f64 * 0.005).collect();
        let trace = angle_trace(&schedule, &params, &grid).unwrap();
        let v_on = 0.3506493506493506;
        for (t, v) in trace.times.iter().zip(&trace.velocity) {
            let expected = if *t >= 1.3 && *t < 2.2 { 0.0 } else { v_on };
            assert_relative_eq!(*v, expected, max_relative = 1e-12);
        }
        for (c, s) in trace.cos_theta_signed.iter().zip(&trace.sin_theta) {
            assert!((c * c + s * s - 1.0).abs() <= 1e-12);
            assert!(*s >= 0.0);
        }
        assert!(trace.velocity.iter().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn full_storage_trace() {
        let params = desk_params();
        let schedule = FieldSchedule::constant(0.0, Orientation::Parallel, 0.0, 1.0).unwrap();
        let grid = [0.0, 0.5, 1.0];
        let trace = angle_trace(&schedule, &params, &grid).unwrap();
        assert!(trace.cos_theta_signed.iter().all(|c| *c == 0.0));
        assert!(trace.velocity.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn orientation_flip_keeps_velocity_bitwise() {
        let params = desk_params();
        let grid: Vec<f64> = (0..=405).map(|i| -0.75 + i as f64 * 0.01).collect();
        let parallel = angle_trace(&storage_schedule(Orientation::Parallel), &params, &grid).unwrap();
        let flipped =
            angle_trace(&storage_schedule(Orientation::Antiparallel), &params, &grid).unwrap();
        assert_eq!(parallel.velocity, flipped.velocity);
        let n = grid.len();
        // Sign differs only in the release segment.
        assert_eq!(parallel.cos_theta_signed[0], flipped.cos_theta_signed[0]);
        assert_eq!(parallel.cos_theta_signed[n - 1], -flipped.cos_theta_signed[n - 1]);
    }

    #[test]
    fn trace_continuity_through_ramp() {
        let params = desk_params();
        let s = FieldSchedule::new(vec![
            Segment {
                t_start: 0.0,
                t_end: 1.0,
                b_start: 6.4,
                b_end: 6.4,
                orientation: Orientation::Parallel,
            },
            Segment {
                t_start: 1.0,
                t_end: 1.3546,
                b_start: 6.4,
                b_end: 0.0,
                orientation: Orientation::Parallel,
            },
            Segment {
                t_start: 1.3546,
                t_end: 2.0,
                b_start: 0.0,
                b_end: 0.0,
                orientation: Orientation::Parallel,
            },
        ])
        .unwrap();
        let grid: Vec<f64> = (0..=2000).map(|i| i as f64 * 0.001).collect();
        let trace = angle_trace(&s, &params, &grid).unwrap();
        for w in trace.velocity.windows(2) {
            assert!((w[1] - w[0]).abs() < 0.01, "velocity jump {} -> {}", w[0], w[1]);
        }
    }

    #[test]
    fn validate_storage_schedule_passes() {
        let params = desk_params();
        let pulse = PulseShape::gaussian(1.0, 0.2).unwrap();
        let issues = validate_schedule(&storage_schedule(Orientation::Parallel), &params, &pulse, 1.3);
        assert!(
            issues.iter().all(|i| i.severity != Severity::Error),
            "unexpected errors: {issues:?}"
        );
    }

    #[test]
    fn validate_rejects_switch_during_inflow() {
        let params = desk_params();
        let pulse = PulseShape::gaussian(1.0, 0.2).unwrap();
        let schedule = FieldSchedule::new(vec![
            Segment {
                t_start: -0.75,
                t_end: 0.0,
                b_start: 6.4,
                b_end: 6.4,
                orientation: Orientation::Parallel,
            },
            Segment {
                t_start: 0.0,
                t_end: 1.0,
                b_start: 0.0,
                b_end: 0.0,
                orientation: Orientation::Parallel,
            },
        ])
        .unwrap();
        let issues = validate_schedule(&schedule, &params, &pulse, 1.3);
        assert!(issues
            .iter()
            .any(|i| i.severity == Severity::Error && i.kind == IssueKind::SwitchDuringInflow));
    }

    #[test]
    fn validate_rejects_short_domain() {
        let params = desk_params();
        let pulse = PulseShape::gaussian(1.0, 0.2).unwrap();
        let schedule = storage_schedule(Orientation::Parallel);
        // Compressed length is v_g * 5.26 t0 ~ 0.37; a 0.1 domain cannot fit it.
        let issues = validate_schedule(&schedule, &params, &pulse, 0.1);
        assert!(issues
            .iter()
            .any(|i| i.severity == Severity::Error && i.kind == IssueKind::PulseDoesNotFit));
    }

    #[test]
    fn fast_ramp_warns() {
        // Fig.-2-scale cavity parameters make gamma' = 19.1, so a 50 ns ramp
        // (0.355 tau0) is faster than 10 / gamma' = 0.523 tau0.
        let params =
            CavityParams::new(4.6e5, 3.1e5, 0.0, 2.5, 1.0e6, Complex64::new(1.0, 0.0)).unwrap();
        let pulse = PulseShape::gaussian(1.0, 0.2).unwrap();
        let ramp = 50.0 / NaturalUnits::FE57_TAU0_NS;
        let schedule = FieldSchedule::new(vec![
            Segment {
                t_start: -0.75,
                t_end: 1.3,
                b_start: 6.4,
                b_end: 6.4,
                orientation: Orientation::Parallel,
            },
            Segment {
                t_start: 1.3,
                t_end: 1.3 + ramp,
                b_start: 6.4,
                b_end: 0.0,
                orientation: Orientation::Parallel,
            },
            Segment {
                t_start: 1.3 + ramp,
                t_end: 3.0,
                b_start: 0.0,
                b_end: 0.0,
                orientation: Orientation::Parallel,
            },
        ])
        .unwrap();
        let issues = validate_schedule(&schedule, &params, &pulse, 100.0);
        assert!(issues
            .iter()
            .any(|i| i.severity == Severity::Warning && i.kind == IssueKind::FastRamp));
        assert!(issues.iter().all(|i| i.severity != Severity::Error));
    }
}
