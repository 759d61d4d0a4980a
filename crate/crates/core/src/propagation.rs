//! Time-domain solver for the dark-state polariton dynamics on a 1-D grid
//! under a hyperfine-field schedule.
//!
//! The polariton field obeys pure variable-speed advection,
//!
//! ```text
//! [d/dt + c cos^2(theta(t)) d/dz] Psi(z, t) = 0 ,
//! ```
//!
//! which the primary solver integrates by semi-Lagrangian characteristic
//! tracing: each step displaces the field by `s = integral of cos^2(theta)`
//! (4-point Gauss quadrature per smooth schedule piece) and resamples it with
//! monotone cubic interpolation. The scheme is unconditionally stable, exact
//! through instantaneous switches, and regular at phi = 0 where the closed
//! field equation is singular. That closed constant-coefficient equation
//! survives here as [`slowlight_reference`], an independent first-order
//! upwind solver used only for cross-validation at constant splitting.

use num_complex::Complex64;
use thiserror::Error;

use crate::config::ExperimentConfig;
use crate::error::Error;
use crate::interp::sample_uniform_complex;
use crate::params::{group_velocity, CavityParams};
use crate::pulses::{PulseSampler, PulseShape};
use crate::schedule::{validate_schedule, FieldSchedule, ScheduleError, ScheduleIssue, Severity};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PropagationError {
    #[error("grid needs at least 16 points (got {0})")]
    TooFewPoints(usize),
    #[error("grid extent [{z_min}, {z_max}] is empty or not finite")]
    BadExtent { z_min: f64, z_max: f64 },
    #[error("time step must be positive and finite (got {0})")]
    BadTimeStep(f64),
    #[error("schedule validation failed: {reasons}")]
    ScheduleRejected { reasons: String },
    #[error(
        "boundary value diverges at t = {t}: cos(theta) = {cos_theta:.3e} \
         while the inflow amplitude is {amplitude:.3e}"
    )]
    BoundaryDivergence { t: f64, cos_theta: f64, amplitude: f64 },
    #[error(
        "runaway displacement at t = {t}: step displacement {displacement:.3e} \
         exceeds the domain length {domain:.3e} (max |Psi| = {max_abs_psi:.3e})"
    )]
    Runaway { t: f64, displacement: f64, domain: f64, max_abs_psi: f64 },
    #[error(
        "outflow reached the far boundary at t = {t}: |Psi(z_max)| = {edge:.3e} \
         against a field maximum of {max_abs_psi:.3e}; enlarge the domain"
    )]
    FarBoundaryReached { t: f64, edge: f64, max_abs_psi: f64 },
    #[error("record truncated: amplitude at the {which} end is {relative:.3e} of peak (limit 1e-4)")]
    TruncatedRecord { which: &'static str, relative: f64 },
    #[error("record is empty or has no interior peak")]
    NoPeak,
    #[error("probe plane z = {0} lies outside the open interval (z_min, z_max)")]
    BadProbe(f64),
    #[error("the reference solver requires a constant splitting phi > 0 over the run")]
    NonConstantField,
    #[error("velocity fit window [{0}, {1}] contains fewer than two peak samples")]
    EmptyFitWindow(f64, f64),
    #[error("simulation window [{t_start}, {t_end}] is empty or not covered by the schedule")]
    BadWindow { t_start: f64, t_end: f64 },
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
    #[error(transparent)]
    Param(#[from] crate::params::ParamError),
}

/// Uniform 1-D spatial grid plus the nominal time step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    pub z_min: f64,
    pub z_max: f64,
    pub n_points: usize,
    /// Nominal time step \[tau0\]. The semi-Lagrangian scheme is
    /// unconditionally stable; the CFL number is reported for reference and
    /// enforced (<= 0.9) only by the upwind cross-check solver.
    pub dt: f64,
}

impl Grid1D {
    pub fn new(z_min: f64, z_max: f64, n_points: usize, dt: f64) -> Result<Self, PropagationError> {
        if n_points < 16 {
            return Err(PropagationError::TooFewPoints(n_points));
        }
        if z_max <= z_min || !z_min.is_finite() || !z_max.is_finite() {
            return Err(PropagationError::BadExtent { z_min, z_max });
        }
        if dt <= 0.0 || !dt.is_finite() {
            return Err(PropagationError::BadTimeStep(dt));
        }
        Ok(Self { z_min, z_max, n_points, dt })
    }

    pub fn dz(&self) -> f64 {
        (self.z_max - self.z_min) / (self.n_points - 1) as f64
    }

    pub fn length(&self) -> f64 {
        self.z_max - self.z_min
    }

    pub fn cfl(&self, max_velocity: f64) -> f64 {
        max_velocity * self.dt / self.dz()
    }

    pub fn z(&self, i: usize) -> f64 {
        self.z_min + i as f64 * self.dz()
    }
}

/// The polariton field on the grid at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct PolaritonState {
    pub t: f64,
    pub psi: Vec<Complex64>,
    pub cos_theta_signed: f64,
    pub sin_theta: f64,
    pub decay_enabled: bool,
}

impl PolaritonState {
    pub fn n_z(&self) -> usize {
        self.psi.len()
    }

    pub fn max_abs_psi(&self) -> f64 {
        self.psi.iter().map(|p| p.norm()).fold(0.0, f64::max)
    }
}

/// Field and matter components reconstructed from the polariton at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSnapshot {
    pub t: f64,
    pub psi: Vec<Complex64>,
    /// Electromagnetic part `Omega = cos_theta_signed * Psi`.
    pub omega: Vec<Complex64>,
    /// Matter part `-sin_theta * Psi` (the collective coherence combination).
    pub matter: Vec<Complex64>,
    pub omega_intensity: Vec<f64>,
    pub psi_intensity: Vec<f64>,
}

impl FieldSnapshot {
    pub fn from_state(state: &PolaritonState) -> Self {
        let c = state.cos_theta_signed;
        let s = state.sin_theta;
        let omega: Vec<Complex64> = state.psi.iter().map(|p| c * p).collect();
        let matter: Vec<Complex64> = state.psi.iter().map(|p| -s * p).collect();
        let omega_intensity = omega.iter().map(|o| o.norm_sqr()).collect();
        let psi_intensity = state.psi.iter().map(|p| p.norm_sqr()).collect();
        Self { t: state.t, psi: state.psi.clone(), omega, matter, omega_intensity, psi_intensity }
    }
}

/// Storage figures of merit, measured at the probe plane against the
/// automatically executed no-switch baseline.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct StorageMetrics {
    /// Outflow pulse energy over baseline pulse energy.
    pub retrieval_efficiency: f64,
    /// Peak-time difference against the baseline \[tau0\].
    pub delay: f64,
    /// arg(Omega_out / Omega_baseline) at the respective peaks \[rad\].
    pub phase_shift: f64,
    /// Normalized L2 distance between the outflow envelope and the baseline
    /// envelope delayed by the measured delay.
    pub l2_shape_error: f64,
}

/// Uniformly sampled complex time series.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub t_start: f64,
    pub dt: f64,
    pub values: Vec<Complex64>,
}

impl TimeSeries {
    pub fn time(&self, i: usize) -> f64 {
        self.t_start + i as f64 * self.dt
    }

    pub fn t_end(&self) -> f64 {
        self.time(self.values.len().saturating_sub(1))
    }

    /// Complex value at arbitrary `t` by monotone cubic interpolation;
    /// `None` outside the sampled range.
    pub fn value_at(&self, t: f64) -> Option<Complex64> {
        let n = self.values.len();
        let x = (t - self.t_start) / self.dt;
        if !(0.0..=(n - 1) as f64).contains(&x) {
            return None;
        }
        let j = (x.floor() as usize).min(n - 1);
        let u = x - j as f64;
        if u == 0.0 {
            return Some(self.values[j]);
        }
        Some(sample_uniform_complex(&self.values, j.min(n - 2), u))
    }

    /// Refined time and height of the |value| peak. A least-squares parabola
    /// over the contiguous half-maximum region makes the position robust
    /// against sample-level noise; identical pulse shapes therefore yield
    /// exactly cancelling biases in delay measurements. Errors when the peak
    /// sits on a record edge.
    pub fn abs_peak(&self) -> Result<(f64, f64), PropagationError> {
        let abs: Vec<f64> = self.values.iter().map(|v| v.norm()).collect();
        let (i, &y_max) = abs
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .ok_or(PropagationError::NoPeak)?;
        if i == 0 || i + 1 == abs.len() || y_max <= 0.0 {
            return Err(PropagationError::NoPeak);
        }
        let mut lo = i;
        while lo > 0 && abs[lo - 1] >= 0.5 * y_max {
            lo -= 1;
        }
        let mut hi = i;
        while hi + 1 < abs.len() && abs[hi + 1] >= 0.5 * y_max {
            hi += 1;
        }
        if hi - lo + 1 >= 5 {
            if let Some((di, y)) = quadratic_vertex(&abs[lo..=hi], i - lo) {
                return Ok((self.time(i) + di * self.dt, y));
            }
        }
        let (di, y) = refine_peak(abs[i - 1], abs[i], abs[i + 1]);
        Ok((self.time(i) + di * self.dt, y))
    }

    /// Trapezoidal integral of |value|^2 over the record.
    pub fn power_integral(&self) -> f64 {
        trapezoid_power(&self.values, self.dt)
    }

    fn ends_below(&self, rel: f64) -> Result<(), PropagationError> {
        let peak = self.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        if peak == 0.0 {
            return Err(PropagationError::NoPeak);
        }
        let first = self.values.first().unwrap().norm() / peak;
        let last = self.values.last().unwrap().norm() / peak;
        if first > rel {
            return Err(PropagationError::TruncatedRecord { which: "start", relative: first });
        }
        if last > rel {
            return Err(PropagationError::TruncatedRecord { which: "end", relative: last });
        }
        Ok(())
    }
}

fn trapezoid_power(values: &[Complex64], dt: f64) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let inner: f64 = values[1..values.len() - 1].iter().map(|v| v.norm_sqr()).sum();
    (inner + 0.5 * (values[0].norm_sqr() + values.last().unwrap().norm_sqr())) * dt
}

/// Parabolic vertex through three equidistant samples; returns the offset
/// from the center sample (in sample units) and the refined height.
fn refine_peak(ym: f64, y0: f64, yp: f64) -> (f64, f64) {
    let denom = ym - 2.0 * y0 + yp;
    if denom == 0.0 {
        return (0.0, y0);
    }
    let d = 0.5 * (ym - yp) / denom;
    (d, y0 - 0.25 * (ym - yp) * d)
}

/// Least-squares parabola `y = a x^2 + b x + c` over equidistant samples,
/// with x measured in sample units from `center`. Returns the vertex offset
/// from `center` and its height, or `None` if the fit does not curve
/// downward.
fn quadratic_vertex(ys: &[f64], center: usize) -> Option<(f64, f64)> {
    let n = ys.len() as f64;
    let (mut s1, mut s2, mut s3, mut s4) = (0.0, 0.0, 0.0, 0.0);
    let (mut sy, mut sxy, mut sx2y) = (0.0, 0.0, 0.0);
    for (k, &y) in ys.iter().enumerate() {
        let x = k as f64 - center as f64;
        let x2 = x * x;
        s1 += x;
        s2 += x2;
        s3 += x2 * x;
        s4 += x2 * x2;
        sy += y;
        sxy += x * y;
        sx2y += x2 * y;
    }
    // Solve the 3x3 normal equations by Cramer's rule.
    let det = n * (s2 * s4 - s3 * s3) - s1 * (s1 * s4 - s2 * s3) + s2 * (s1 * s3 - s2 * s2);
    if det == 0.0 {
        return None;
    }
    let c = (sy * (s2 * s4 - s3 * s3) - s1 * (sxy * s4 - sx2y * s3)
        + s2 * (sxy * s3 - sx2y * s2))
        / det;
    let b = (n * (sxy * s4 - sx2y * s3) - sy * (s1 * s4 - s2 * s3)
        + s2 * (s1 * sx2y - s2 * sxy))
        / det;
    let a = (n * (s2 * sx2y - s3 * sxy) - s1 * (s1 * sx2y - s2 * sxy)
        + sy * (s1 * s3 - s2 * s2))
        / det;
    if a >= 0.0 {
        return None;
    }
    let x0 = -b / (2.0 * a);
    Some((x0, c - b * b / (4.0 * a)))
}

/// Gauss-Legendre nodes and weights (4 points) on [-1, 1].
const GAUSS_NODES: [f64; 4] = [
    -0.8611363115940526,
    -0.3399810435848563,
    0.3399810435848563,
    0.8611363115940526,
];
const GAUSS_WEIGHTS: [f64; 4] = [
    0.3478548451374538,
    0.6521451548625461,
    0.6521451548625461,
    0.3478548451374538,
];

/// Semi-Lagrangian solver for the polariton advection under a schedule.
pub struct PolaritonSolver<'a> {
    pub grid: Grid1D,
    schedule: &'a FieldSchedule,
    params: &'a CavityParams,
    sampler: PulseSampler<'a>,
    peak_abs: f64,
    decay_enabled: bool,
}

impl<'a> PolaritonSolver<'a> {
    /// Build a solver, rejecting schedules that fail validation against the
    /// pulse and domain.
    pub fn new(
        grid: Grid1D,
        schedule: &'a FieldSchedule,
        params: &'a CavityParams,
        pulse: &'a PulseShape,
        decay_enabled: bool,
    ) -> Result<Self, PropagationError> {
        let issues = validate_schedule(schedule, params, pulse, grid.length());
        let errors: Vec<&ScheduleIssue> =
            issues.iter().filter(|i| i.severity == Severity::Error).collect();
        if !errors.is_empty() {
            let reasons =
                errors.iter().map(|i| i.message.clone()).collect::<Vec<_>>().join("; ");
            return Err(PropagationError::ScheduleRejected { reasons });
        }
        Ok(Self {
            grid,
            schedule,
            params,
            sampler: pulse.sampler(),
            peak_abs: pulse.peak_abs(),
            decay_enabled,
        })
    }

    /// Zero field at time `t` with the schedule's instantaneous angle.
    pub fn initial_state(&self, t: f64) -> Result<PolaritonState, PropagationError> {
        let (c, s) = self.schedule.angle_at(t, self.params)?;
        Ok(PolaritonState {
            t,
            psi: vec![Complex64::new(0.0, 0.0); self.grid.n_points],
            cos_theta_signed: c,
            sin_theta: s,
            decay_enabled: self.decay_enabled,
        })
    }

    /// Polariton displacement `integral of cos^2 theta` over `[t0, t1]`,
    /// split at schedule breakpoints so each quadrature piece is smooth.
    pub fn displacement(&self, t0: f64, t1: f64) -> Result<f64, PropagationError> {
        let mut total = 0.0;
        let mut a = t0;
        for b in self.splits(t0, t1) {
            total += self.displacement_smooth(a, b)?;
            a = b;
        }
        total += self.displacement_smooth(a, t1)?;
        Ok(total)
    }

    fn splits(&self, t0: f64, t1: f64) -> Vec<f64> {
        self.schedule.breakpoints().filter(|b| *b > t0 && *b < t1).collect()
    }

    fn displacement_smooth(&self, a: f64, b: f64) -> Result<f64, PropagationError> {
        if b <= a {
            return Ok(0.0);
        }
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = 0.0;
        for (node, weight) in GAUSS_NODES.iter().zip(GAUSS_WEIGHTS) {
            let v = self.schedule.velocity_at(mid + half * node, self.params)?;
            acc += weight * v;
        }
        Ok(acc * half)
    }

    /// Polariton boundary value `Omega_in(t) / cos_theta_signed(t)`: the field
    /// amplitude is continuous across the vacuum-medium interface, which is
    /// what compresses the pulse spatially by the factor v_g/c inside.
    pub fn boundary_value(&self, t: f64) -> Result<Complex64, PropagationError> {
        let (c, _) = self.schedule.angle_at(t, self.params)?;
        let amp = self.sampler.amplitude(t);
        if c.abs() < 1e-6 {
            if amp.norm() > 1e-3 * self.peak_abs {
                return Err(PropagationError::BoundaryDivergence {
                    t,
                    cos_theta: c,
                    amplitude: amp.norm(),
                });
            }
            return Ok(Complex64::new(0.0, 0.0));
        }
        Ok(amp / c)
    }

    /// Set the inflow boundary node from the pulse at time `t`.
    pub fn inject_boundary(
        &self,
        state: &mut PolaritonState,
        t: f64,
    ) -> Result<(), PropagationError> {
        state.psi[0] = self.boundary_value(t)?;
        Ok(())
    }

    /// Advance the state by `dt` (internally split at schedule breakpoints).
    /// Returns the displacement covered by the step.
    pub fn step(&self, state: &mut PolaritonState, dt: f64) -> Result<f64, PropagationError> {
        if dt <= 0.0 || !dt.is_finite() {
            return Err(PropagationError::BadTimeStep(dt));
        }
        self.step_to(state, state.t + dt)
    }

    /// Advance the state to exactly `target` (which must not precede the
    /// current time). Returns the displacement covered.
    pub fn step_to(&self, state: &mut PolaritonState, target: f64) -> Result<f64, PropagationError> {
        let t0 = state.t;
        if target < t0 || !target.is_finite() {
            return Err(PropagationError::BadTimeStep(target - t0));
        }
        let mut total = 0.0;
        let mut a = t0;
        for b in self.splits(t0, target) {
            total += self.substep(state, a, b)?;
            a = b;
        }
        total += self.substep(state, a, target)?;
        Ok(total)
    }

    fn substep(&self, state: &mut PolaritonState, a: f64, b: f64) -> Result<f64, PropagationError> {
        if b <= a {
            return Ok(0.0);
        }
        let s = self.displacement_smooth(a, b)?;
        let (cos_b, sin_b) = self.schedule.angle_at(b, self.params)?;
        if s == 0.0 {
            // Fully stopped: the field is frozen; only the matter decay acts.
            if state.decay_enabled {
                let factor = (-0.5 * (b - a)).exp();
                for p in state.psi.iter_mut() {
                    *p *= factor;
                }
            }
            state.t = b;
            state.cos_theta_signed = cos_b;
            state.sin_theta = sin_b;
            return Ok(0.0);
        }
        let dz = self.grid.dz();
        let n = self.grid.n_points;
        if s >= self.grid.length() {
            return Err(PropagationError::Runaway {
                t: b,
                displacement: s,
                domain: self.grid.length(),
                max_abs_psi: state.max_abs_psi(),
            });
        }
        // Matter-fraction damping accumulated over the substep:
        // (1/2) * integral of sin^2 theta = (1/2) * ((b - a) - s).
        let interior_damp =
            if state.decay_enabled { (-0.5 * ((b - a) - s)).exp() } else { 1.0 };
        let shift = s / dz;
        let old = &state.psi;
        let mut new = Vec::with_capacity(n);
        for i in 0..n {
            let foot = i as f64 - shift;
            if foot >= 0.0 {
                let j = foot.floor() as usize;
                let u = foot - j as f64;
                let value = if u == 0.0 {
                    old[j]
                } else {
                    sample_uniform_complex(old, j, u)
                };
                new.push(interior_damp * value);
            } else {
                // The characteristic crossed the inflow boundary; find the
                // crossing time and take the boundary value there.
                let dist = i as f64 * dz;
                let t_c = self.crossing_time(a, b, dist)?;
                let mut value = self.boundary_value(t_c)?;
                if state.decay_enabled {
                    value *= (-0.5 * ((b - t_c) - dist)).exp();
                }
                new.push(value);
            }
        }
        state.psi = new;
        state.t = b;
        state.cos_theta_signed = cos_b;
        state.sin_theta = sin_b;

        let max_abs = state.max_abs_psi();
        let edge = state.psi[n - 1].norm();
        if max_abs > 0.0 && edge > 1e-6 * max_abs {
            return Err(PropagationError::FarBoundaryReached { t: b, edge, max_abs_psi: max_abs });
        }
        Ok(s)
    }

    /// Time `t_c` in `[a, b]` at which the characteristic arriving at depth
    /// `dist` entered the domain: `integral_{t_c}^{b} v = dist`. Bisection on
    /// the monotone displacement integral.
    fn crossing_time(&self, a: f64, b: f64, dist: f64) -> Result<f64, PropagationError> {
        if dist == 0.0 {
            return Ok(b);
        }
        let (mut lo, mut hi) = (a, b); // remaining displacement > dist at lo, < dist at hi
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if self.displacement_smooth(mid, b)? > dist {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }
}

/// Everything recorded over one simulated trajectory.
#[derive(Debug, Clone)]
pub struct SimulationTrace {
    pub snapshots: Vec<FieldSnapshot>,
    /// Omega at the probe plane per step.
    pub outflow: TimeSeries,
    /// Driving amplitude Omega_in at the entry face per step.
    pub inflow: TimeSeries,
    /// Peak position of |Omega(z)| per step (refined), where an interior
    /// peak exists: `(t, z_peak)`.
    pub peak_track: Vec<(f64, f64)>,
    /// Max relative drift of the flux-corrected norm
    /// `integral |Psi|^2 dz - inflow flux` (meaningful with decay disabled).
    pub norm_drift: f64,
    pub final_state: PolaritonState,
}

/// March a solver from `t_start` to `t_end` with the grid's nominal step,
/// recording the probe plane, inflow, snapshots, and bookkeeping.
pub fn simulate(
    solver: &PolaritonSolver,
    t_start: f64,
    t_end: f64,
    probe_index: usize,
    snapshot_times: &[f64],
) -> Result<SimulationTrace, PropagationError> {
    let span = t_end - t_start;
    if span.is_nan() || span <= 0.0 {
        return Err(PropagationError::BadWindow { t_start, t_end });
    }
    let n_steps = (span / solver.grid.dt).round().max(1.0) as usize;
    let dt = span / n_steps as f64;
    let dz = solver.grid.dz();
    let n = solver.grid.n_points;
    if probe_index == 0 || probe_index >= n {
        return Err(PropagationError::BadProbe(solver.grid.z(probe_index.min(n - 1))));
    }

    let mut state = solver.initial_state(t_start)?;
    let mut snap_steps: Vec<usize> = snapshot_times
        .iter()
        .map(|t| ((t - t_start) / dt).round().clamp(0.0, n_steps as f64) as usize)
        .collect();
    snap_steps.sort_unstable();
    snap_steps.dedup();

    let mut outflow = Vec::with_capacity(n_steps + 1);
    let mut inflow = Vec::with_capacity(n_steps + 1);
    let mut snapshots = Vec::new();
    let mut peak_track = Vec::new();
    let mut max_diff = 0.0_f64;
    let mut max_norm = 0.0_f64;
    let mut flux = 0.0_f64;

    // Trapezoidal rule in space; the half-weights at the ends matter while
    // the pulse straddles the inflow boundary.
    let norm_of = |state: &PolaritonState| -> f64 {
        let sum: f64 = state.psi.iter().map(|p| p.norm_sqr()).sum();
        let edges = 0.5 * (state.psi[0].norm_sqr() + state.psi.last().unwrap().norm_sqr());
        (sum - edges) * dz
    };

    for k in 0..=n_steps {
        // Step to the exact target time rather than accumulating dt, so the
        // final step lands on t_end bitwise and never leaves the schedule
        // window.
        let t = if k == n_steps { t_end } else { t_start + k as f64 * dt };
        if k > 0 {
            let edge_before = state.psi[0].norm_sqr();
            let s = solver.step_to(&mut state, t)?;
            let edge_after = state.psi[0].norm_sqr();
            flux += s * 0.5 * (edge_before + edge_after);
        }
        outflow.push(state.cos_theta_signed * state.psi[probe_index]);
        inflow.push(solver.sampler.amplitude(t));

        let norm = norm_of(&state);
        max_norm = max_norm.max(norm);
        max_diff = max_diff.max((norm - flux).abs());
        if snap_steps.binary_search(&k).is_ok() {
            snapshots.push(FieldSnapshot::from_state(&state));
        }
        if let Some((zi, _)) = interior_peak(&state) {
            peak_track.push((state.t, solver.grid.z_min + zi * dz));
        }
    }

    let norm_drift = if max_norm > 0.0 { max_diff / max_norm } else { 0.0 };
    Ok(SimulationTrace {
        snapshots,
        outflow: TimeSeries { t_start, dt, values: outflow },
        inflow: TimeSeries { t_start, dt, values: inflow },
        peak_track,
        norm_drift,
        final_state: state,
    })
}

/// Refined index of the interior |psi| maximum, if one exists away from the
/// edges and above the noise floor.
fn interior_peak(state: &PolaritonState) -> Option<(f64, f64)> {
    let abs: Vec<f64> = state.psi.iter().map(|p| p.norm()).collect();
    let (i, &y) = abs
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())?;
    if i < 2 || i + 2 >= abs.len() || y <= 0.0 {
        return None;
    }
    let (d, h) = refine_peak(abs[i - 1], abs[i], abs[i + 1]);
    Some((i as f64 + d, h))
}

/// Compare an outflow record against a baseline record: efficiency, delay,
/// phase at peak, and the normalized L2 envelope distance after delaying the
/// baseline by the measured delay.
pub fn storage_metrics(
    outflow: &TimeSeries,
    baseline: &TimeSeries,
) -> Result<StorageMetrics, PropagationError> {
    outflow.ends_below(1e-4)?;
    baseline.ends_below(1e-4)?;
    let (t_peak_out, _) = outflow.abs_peak()?;
    let (t_peak_base, _) = baseline.abs_peak()?;
    let delay = t_peak_out - t_peak_base;

    let retrieval_efficiency = outflow.power_integral() / baseline.power_integral();

    let out_at_peak = outflow.value_at(t_peak_out).ok_or(PropagationError::NoPeak)?;
    let base_at_peak = baseline.value_at(t_peak_base).ok_or(PropagationError::NoPeak)?;
    let phase_shift = (out_at_peak * base_at_peak.conj()).arg();

    let mut num = 0.0;
    let mut den = 0.0;
    for (i, v) in outflow.values.iter().enumerate() {
        let t = outflow.time(i);
        if let Some(b) = baseline.value_at(t - delay) {
            let diff = v.norm() - b.norm();
            num += diff * diff;
            den += b.norm_sqr();
        }
    }
    if den == 0.0 {
        return Err(PropagationError::NoPeak);
    }
    let l2_shape_error = (num / den).sqrt();

    Ok(StorageMetrics { retrieval_efficiency, delay, phase_shift, l2_shape_error })
}

/// Full storage experiment: the configured schedule plus an automatic
/// no-switch baseline (the schedule's initial field held constant), with
/// metrics measured at the probe plane.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub snapshots: Vec<FieldSnapshot>,
    pub metrics: StorageMetrics,
    pub outflow: TimeSeries,
    pub baseline_outflow: TimeSeries,
    pub inflow: TimeSeries,
    /// Delay predicted from the schedule's displacement deficit \[tau0\].
    pub predicted_delay: f64,
    pub norm_drift: f64,
    /// Trapezoidal `integral |Omega_in|^2 dt` over the record.
    pub input_power: f64,
    /// Non-fatal findings from schedule validation (fast ramps, instant
    /// switches).
    pub warnings: Vec<ScheduleIssue>,
}

/// Execute a `store`-mode experiment described by `config`.
pub fn run(config: &ExperimentConfig) -> Result<RunOutput, Error> {
    let params = config.cavity_params()?;
    let schedule = config.build_schedule()?;
    let pulse = config.build_pulse()?;
    let grid = config.build_grid()?;
    let (t_start, t_end) = config.time_window()?;
    let (win_start, win_end) = schedule.window();
    if t_start < win_start || t_end > win_end {
        return Err(PropagationError::BadWindow { t_start, t_end }.into());
    }
    let probe_index = config.probe_index(&grid)?;
    let warnings: Vec<ScheduleIssue> = validate_schedule(&schedule, &params, &pulse, grid.length())
        .into_iter()
        .filter(|i| i.severity == Severity::Warning)
        .collect();

    let solver = PolaritonSolver::new(grid, &schedule, &params, &pulse, config.decay)?;
    let switched = simulate(&solver, t_start, t_end, probe_index, &config.snapshot_times)?;

    // Baseline: initial field held constant; its end time is shortened by the
    // predicted delay so both records cover the same retrieved pulse.
    let (b0, orientation) = schedule.field_at(t_start)?;
    let span = t_end - t_start;
    let v0 = schedule.velocity_at(t_start, &params)?;
    let displacement = solver.displacement(t_start, t_end)?;
    let predicted_delay = if v0 > 0.0 { span - displacement / v0 } else { 0.0 };
    let base_end = t_end - predicted_delay;
    let base_schedule = FieldSchedule::constant(b0, orientation, t_start, t_end)?;
    let base_solver = PolaritonSolver::new(grid, &base_schedule, &params, &pulse, config.decay)?;
    let baseline = simulate(&base_solver, t_start, base_end, probe_index, &[])?;

    let metrics = storage_metrics(&switched.outflow, &baseline.outflow)?;
    let input_power = switched.inflow.power_integral();

    Ok(RunOutput {
        snapshots: switched.snapshots,
        metrics,
        outflow: switched.outflow,
        baseline_outflow: baseline.outflow,
        inflow: switched.inflow,
        predicted_delay,
        norm_drift: switched.norm_drift,
        input_power,
        warnings,
    })
}

/// Output of the first-order upwind reference solver.
#[derive(Debug, Clone)]
pub struct UpwindOutput {
    pub final_omega: Vec<Complex64>,
    pub final_time: f64,
    /// Omega profiles recorded at the steps nearest the requested times.
    pub snapshots: Vec<(f64, Vec<Complex64>)>,
    pub peak_track: Vec<(f64, f64)>,
    pub dt: f64,
    pub cfl: f64,
}

/// Independent slow-light solver for constant splitting: integrates the
/// closed constant-coefficient form
/// `(1 + 2 g^2 N / (3 phi^2)) dOmega/dt + c dOmega/dz = 0`
/// by first-order upwind differencing at CFL <= 0.9. Used only as a
/// cross-check oracle against the polariton solver.
pub fn slowlight_reference(
    params: &CavityParams,
    schedule: &FieldSchedule,
    pulse: &PulseShape,
    grid: Grid1D,
    t_start: f64,
    t_end: f64,
    snapshot_times: &[f64],
) -> Result<UpwindOutput, PropagationError> {
    let (b, _) = schedule.constant_field().ok_or(PropagationError::NonConstantField)?;
    let phi = crate::params::phi_from_field(b)?;
    if phi <= 0.0 && params.g2n() > 0.0 {
        return Err(PropagationError::NonConstantField);
    }
    let v = group_velocity(phi, params.g, params.n_nuclei)?;
    let span = t_end - t_start;
    if span.is_nan() || span <= 0.0 {
        return Err(PropagationError::BadWindow { t_start, t_end });
    }
    let dz = grid.dz();
    let n_steps = (span * v / (0.9 * dz)).ceil().max(1.0) as usize;
    let dt = span / n_steps as f64;
    let cfl = v * dt / dz;

    let mut snap_steps: Vec<usize> = snapshot_times
        .iter()
        .map(|t| ((t - t_start) / dt).round().clamp(0.0, n_steps as f64) as usize)
        .collect();
    snap_steps.sort_unstable();
    snap_steps.dedup();

    let sampler = pulse.sampler();
    let n = grid.n_points;
    let mut omega = vec![Complex64::new(0.0, 0.0); n];
    omega[0] = sampler.amplitude(t_start);
    let mut peak_track = Vec::with_capacity(n_steps);
    let mut snapshots = Vec::new();
    if snap_steps.binary_search(&0).is_ok() {
        snapshots.push((t_start, omega.clone()));
    }
    for k in 1..=n_steps {
        let t = if k == n_steps { t_end } else { t_start + k as f64 * dt };
        for i in (1..n).rev() {
            let upwind = omega[i] - omega[i - 1];
            omega[i] -= cfl * upwind;
        }
        omega[0] = sampler.amplitude(t);
        if let Some((zi, _)) = interior_peak_abs(&omega) {
            peak_track.push((t, grid.z_min + zi * dz));
        }
        if snap_steps.binary_search(&k).is_ok() {
            snapshots.push((t, omega.clone()));
        }
    }
    Ok(UpwindOutput { final_omega: omega, final_time: t_end, snapshots, peak_track, dt, cfl })
}

fn interior_peak_abs(values: &[Complex64]) -> Option<(f64, f64)> {
    let abs: Vec<f64> = values.iter().map(|v| v.norm()).collect();
    let (i, &y) = abs.iter().enumerate().max_by(|a, b| a.1.partial_cmp(b.1).unwrap())?;
    if i < 2 || i + 2 >= abs.len() || y <= 0.0 {
        return None;
    }
    let (d, h) = refine_peak(abs[i - 1], abs[i], abs[i + 1]);
    Some((i as f64 + d, h))
}

/// Least-squares slope of `z(t)` over the peak-track samples inside
/// `[t_lo, t_hi]`.
pub fn fit_peak_velocity(
    track: &[(f64, f64)],
    t_lo: f64,
    t_hi: f64,
) -> Result<f64, PropagationError> {
    let pts: Vec<(f64, f64)> =
        track.iter().copied().filter(|(t, _)| *t >= t_lo && *t <= t_hi).collect();
    if pts.len() < 2 {
        return Err(PropagationError::EmptyFitWindow(t_lo, t_hi));
    }
    let n = pts.len() as f64;
    let mean_t = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_z = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let mut cov = 0.0;
    let mut var = 0.0;
    for (t, z) in &pts {
        cov += (t - mean_t) * (z - mean_z);
        var += (t - mean_t) * (t - mean_t);
    }
    if var == 0.0 {
        return Err(PropagationError::EmptyFitWindow(t_lo, t_hi));
    }
    Ok(cov / var)
}

/// Two-solver comparison for a constant-splitting run.
#[derive(Debug, Clone)]
pub struct ComparisonOutput {
    pub sl_snapshots: Vec<FieldSnapshot>,
    pub upwind_snapshots: Vec<(f64, Vec<Complex64>)>,
    pub sl_final_omega: Vec<Complex64>,
    pub upwind_final_omega: Vec<Complex64>,
    /// Normalized L2 distance between the two |Omega(z)| profiles at t_end.
    pub l2_distance: f64,
    pub sl_fitted_velocity: f64,
    pub upwind_fitted_velocity: f64,
    pub formula_velocity: f64,
    pub upwind_cfl: f64,
    pub warnings: Vec<ScheduleIssue>,
}

/// Execute a `propagate`-mode experiment: run both solvers on the same
/// constant-field configuration and measure their agreement.
pub fn propagate_comparison(config: &ExperimentConfig) -> Result<ComparisonOutput, Error> {
    let params = config.cavity_params()?;
    let schedule = config.build_schedule()?;
    let pulse = config.build_pulse()?;
    let grid = config.build_grid()?;
    let (t_start, t_end) = config.time_window()?;
    let probe_index = config.probe_index(&grid)?;
    let (fit_lo, fit_hi) = config.fit_window(t_start, t_end);

    if schedule.constant_field().is_none() {
        return Err(PropagationError::NonConstantField.into());
    }
    let warnings: Vec<ScheduleIssue> = validate_schedule(&schedule, &params, &pulse, grid.length())
        .into_iter()
        .filter(|i| i.severity == Severity::Warning)
        .collect();
    let solver = PolaritonSolver::new(grid, &schedule, &params, &pulse, config.decay)?;
    let trace = simulate(&solver, t_start, t_end, probe_index, &config.snapshot_times)?;
    let upwind = slowlight_reference(&params, &schedule, &pulse, grid, t_start, t_end, &config.snapshot_times)?;

    let sl_final = FieldSnapshot::from_state(&trace.final_state);
    let mut num = 0.0;
    let mut den = 0.0;
    for (a, b) in sl_final.omega.iter().zip(&upwind.final_omega) {
        let diff = a.norm() - b.norm();
        num += diff * diff;
        den += a.norm_sqr();
    }
    let l2_distance = if den > 0.0 { (num / den).sqrt() } else { 0.0 };

    let (b0, _) = schedule.constant_field().unwrap();
    let phi = crate::params::phi_from_field(b0)?;
    let formula_velocity = group_velocity(phi, params.g, params.n_nuclei)?;
    let sl_fitted_velocity = fit_peak_velocity(&trace.peak_track, fit_lo, fit_hi)?;
    let upwind_fitted_velocity = fit_peak_velocity(&upwind.peak_track, fit_lo, fit_hi)?;

    Ok(ComparisonOutput {
        sl_snapshots: trace.snapshots,
        upwind_snapshots: upwind.snapshots,
        sl_final_omega: sl_final.omega,
        upwind_final_omega: upwind.final_omega,
        l2_distance,
        sl_fitted_velocity,
        upwind_fitted_velocity,
        formula_velocity,
        upwind_cfl: upwind.cfl,
        warnings,
    })
}
