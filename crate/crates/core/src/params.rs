//! Physical parameters of the nuclear x-ray cavity in natural units, and the
//! derived collective quantities entering the steady-state coherence formula.
//!
//! All rates and energies are measured in units of the single-nucleus
//! linewidth `gamma`, times in units of the mean lifetime `tau0` (so
//! `gamma * tau0 = 1`), and lengths in units of `c * tau0`. The magnetic field
//! is the one quantity kept in laboratory units (Tesla); it enters the model
//! only through the hyperfine splitting `phi`, via a one-point linear
//! calibration.

use num_complex::Complex64;
use thiserror::Error;

/// Errors from parameter construction and the angle/velocity formulas.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamError {
    #[error("{name} must be positive (got {value})")]
    NonPositive { name: &'static str, value: f64 },
    #[error("{name} must be non-negative (got {value})")]
    Negative { name: &'static str, value: f64 },
    #[error("{name} must be finite (got {value})")]
    NonFinite { name: &'static str, value: f64 },
    #[error("in-coupling rate kappa_r = {kappa_r} exceeds total cavity loss kappa = {kappa}")]
    InCouplingExceedsLoss { kappa_r: f64, kappa: f64 },
    #[error(
        "bad-cavity regime violated: kappa = {kappa} < 10 * g*sqrt(N) = {threshold}; \
         the steady-state model assumes the cavity mode can be adiabatically eliminated"
    )]
    BadCavityViolated { kappa: f64, threshold: f64 },
    #[error("mixing angle undefined: phi and g*sqrt(N) are both zero")]
    UndefinedMixingAngle,
    #[error("orientation must be +1 or -1 (got {0})")]
    InvalidOrientation(i8),
}

/// The natural unit system used throughout: `gamma = 1`, `tau0 = 1`,
/// `c = 1` (lengths in `c * tau0`). Everything else is expressed relative
/// to these three.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct NaturalUnits;

impl NaturalUnits {
    /// Single-nucleus linewidth, the reference rate and width.
    pub const GAMMA: f64 = 1.0;
    /// Mean lifetime of the excited state; `GAMMA * TAU0 = 1` by definition.
    pub const TAU0: f64 = 1.0;
    /// Light speed in domain lengths per `tau0`.
    pub const C_SCALED: f64 = 1.0;
    /// Laboratory value of `tau0` for the 14.4 keV Mössbauer transition of
    /// ⁵⁷Fe, in nanoseconds. Convenience for converting coil switching times.
    pub const FE57_TAU0_NS: f64 = 141.0;
}

/// Hyperfine splitting per Tesla, anchored at the calibration point
/// `B = 6.4 T  <=>  phi = 6 gamma`.
pub const PHI_PER_TESLA: f64 = 6.0 / 6.4;

/// Hyperfine splitting `phi` \[gamma\] induced by a magnetic field `b_magnitude`
/// \[Tesla\]. Zeeman splitting is linear in the field, so a one-point linear
/// map anchored at (6.4 T, 6 gamma) fixes it completely.
pub fn phi_from_field(b_magnitude: f64) -> Result<f64, ParamError> {
    if !b_magnitude.is_finite() {
        return Err(ParamError::NonFinite { name: "b_magnitude", value: b_magnitude });
    }
    if b_magnitude < 0.0 {
        return Err(ParamError::Negative { name: "b_magnitude", value: b_magnitude });
    }
    Ok(PHI_PER_TESLA * b_magnitude)
}

/// Inverse of [`phi_from_field`]: the field \[Tesla\] producing splitting `phi`.
pub fn field_from_phi(phi: f64) -> Result<f64, ParamError> {
    if !phi.is_finite() {
        return Err(ParamError::NonFinite { name: "phi", value: phi });
    }
    if phi < 0.0 {
        return Err(ParamError::Negative { name: "phi", value: phi });
    }
    Ok(phi / PHI_PER_TESLA)
}

/// Direction of the hyperfine magnetic field along the fixed reference axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    Parallel,
    Antiparallel,
}

impl Orientation {
    /// Sign factor applied to `cos(theta)`.
    pub fn sign(self) -> f64 {
        match self {
            Orientation::Parallel => 1.0,
            Orientation::Antiparallel => -1.0,
        }
    }

    pub fn from_sign(sign: i8) -> Result<Self, ParamError> {
        match sign {
            1 => Ok(Orientation::Parallel),
            -1 => Ok(Orientation::Antiparallel),
            other => Err(ParamError::InvalidOrientation(other)),
        }
    }
}

/// Cavity-mode parameters, all rates in units of `gamma`.
///
/// `n_nuclei` is a real-valued effective number: only the product `g^2 N`
/// enters any formula, so it is treated as a continuous parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityParams {
    /// Total cavity loss rate \[gamma\].
    pub kappa: f64,
    /// In-coupling rate of the driving field into the cavity mode \[gamma\].
    pub kappa_r: f64,
    /// Cavity detuning \[gamma\]; zero at the resonant incidence angle.
    pub delta_c: f64,
    /// Single-nucleus coupling strength \[gamma\].
    pub g: f64,
    /// Effective number of nuclei (real-valued).
    pub n_nuclei: f64,
    /// External drive amplitude of the cavity mode (arbitrary normalization).
    pub a_in: Complex64,
}

/// Ratio `kappa / (g sqrt(N))` required by the bad-cavity validity guard.
pub const BAD_CAVITY_RATIO: f64 = 10.0;

impl CavityParams {
    /// Validating constructor. Enforces positivity constraints and the
    /// bad-cavity regime guard `kappa >= 10 * g * sqrt(N)`.
    pub fn new(
        kappa: f64,
        kappa_r: f64,
        delta_c: f64,
        g: f64,
        n_nuclei: f64,
        a_in: Complex64,
    ) -> Result<Self, ParamError> {
        let params = Self::without_regime_check(kappa, kappa_r, delta_c, g, n_nuclei, a_in)?;
        let threshold = BAD_CAVITY_RATIO * params.g_sqrt_n();
        if kappa < threshold {
            return Err(ParamError::BadCavityViolated { kappa, threshold });
        }
        Ok(params)
    }

    /// Like [`CavityParams::new`] but skips only the bad-cavity regime guard.
    /// Intended for configs that explicitly opt out of the validity check.
    pub fn without_regime_check(
        kappa: f64,
        kappa_r: f64,
        delta_c: f64,
        g: f64,
        n_nuclei: f64,
        a_in: Complex64,
    ) -> Result<Self, ParamError> {
        for (name, value) in [("kappa", kappa), ("kappa_r", kappa_r), ("n_nuclei", n_nuclei)] {
            if !value.is_finite() {
                return Err(ParamError::NonFinite { name, value });
            }
            if value <= 0.0 {
                return Err(ParamError::NonPositive { name, value });
            }
        }
        if !delta_c.is_finite() {
            return Err(ParamError::NonFinite { name: "delta_c", value: delta_c });
        }
        if !g.is_finite() {
            return Err(ParamError::NonFinite { name: "g", value: g });
        }
        if g < 0.0 {
            return Err(ParamError::Negative { name: "g", value: g });
        }
        if kappa_r > kappa {
            return Err(ParamError::InCouplingExceedsLoss { kappa_r, kappa });
        }
        Ok(Self { kappa, kappa_r, delta_c, g, n_nuclei, a_in })
    }

    /// Collective coupling `g * sqrt(N)` \[gamma\].
    pub fn g_sqrt_n(&self) -> f64 {
        self.g * self.n_nuclei.sqrt()
    }

    /// The product `g^2 N` \[gamma^2\].
    pub fn g2n(&self) -> f64 {
        self.g * self.g * self.n_nuclei
    }
}

/// Hyperfine magnetic field and the level splittings it induces.
///
/// `delta_g` and `delta_e` are the adjacent-sublevel splittings of the ground
/// and excited manifolds \[gamma\]; only their mean `phi = (delta_g + delta_e)/2`
/// enters the dynamics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HyperfineField {
    /// Field magnitude \[Tesla\].
    pub b_magnitude: f64,
    /// Field direction along the reference axis.
    pub orientation: Orientation,
    /// Ground-state adjacent-sublevel splitting \[gamma\].
    pub delta_g: f64,
    /// Excited-state adjacent-sublevel splitting \[gamma\].
    pub delta_e: f64,
}

impl HyperfineField {
    /// Build from a field magnitude; both splittings are set equal to the
    /// calibrated `phi` so that `phi == (delta_g + delta_e)/2` holds exactly.
    pub fn from_field_strength(
        b_magnitude: f64,
        orientation: Orientation,
    ) -> Result<Self, ParamError> {
        let phi = phi_from_field(b_magnitude)?;
        Ok(Self { b_magnitude, orientation, delta_g: phi, delta_e: phi })
    }

    /// Build from explicit splittings; the field magnitude is recovered from
    /// the calibration so that `phi(B)` stays on the linear anchor.
    pub fn from_splittings(
        delta_g: f64,
        delta_e: f64,
        orientation: Orientation,
    ) -> Result<Self, ParamError> {
        for (name, value) in [("delta_g", delta_g), ("delta_e", delta_e)] {
            if !value.is_finite() {
                return Err(ParamError::NonFinite { name, value });
            }
            if value < 0.0 {
                return Err(ParamError::Negative { name, value });
            }
        }
        let phi = 0.5 * (delta_g + delta_e);
        let b_magnitude = field_from_phi(phi)?;
        Ok(Self { b_magnitude, orientation, delta_g, delta_e })
    }

    /// Hyperfine splitting parameter `phi = (delta_g + delta_e)/2` \[gamma\].
    pub fn phi(&self) -> f64 {
        0.5 * (self.delta_g + self.delta_e)
    }
}

/// Collective, cavity-enhanced quantities derived from [`CavityParams`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollectiveQuantities {
    /// Collective decay rate `gamma' = gamma + (4/3) g^2 N zeta_s` \[gamma\].
    pub gamma_prime: f64,
    /// Collective Lamb-shift term `(2/3) g^2 N delta_ls` \[gamma\]; the
    /// collective detuning is `delta' = delta - delta_prime_offset`.
    pub delta_prime_offset: f64,
    /// `-delta_c / (kappa^2 + delta_c^2)` \[1/gamma\].
    pub delta_ls: f64,
    /// `kappa / (kappa^2 + delta_c^2)` \[1/gamma\].
    pub zeta_s: f64,
    /// Cavity drive `Omega = sqrt(2 kappa_r) a_in / (kappa + i delta_c)`.
    pub omega_drive: Complex64,
}

/// Compute all collective quantities from the cavity parameters.
pub fn derive_collective(params: &CavityParams) -> CollectiveQuantities {
    // On resonance the Lorentzian factors are exact: zeta_s = 1/kappa and
    // delta_ls = 0 bitwise, not just to rounding.
    let (zeta_s, delta_ls) = if params.delta_c == 0.0 {
        (1.0 / params.kappa, 0.0)
    } else {
        let denom = params.kappa * params.kappa + params.delta_c * params.delta_c;
        (params.kappa / denom, -params.delta_c / denom)
    };
    let g2n = params.g2n();
    let gamma_prime = NaturalUnits::GAMMA + (4.0 / 3.0) * g2n * zeta_s;
    let delta_prime_offset = (2.0 / 3.0) * g2n * delta_ls;
    let omega_drive =
        (2.0 * params.kappa_r).sqrt() * params.a_in / Complex64::new(params.kappa, params.delta_c);
    CollectiveQuantities { gamma_prime, delta_prime_offset, delta_ls, zeta_s, omega_drive }
}

/// Polariton mixing angle for splitting `phi`, coupling `g`, and nucleus
/// number `n`:
///
/// ```text
/// cos(theta) = phi / sqrt(phi^2 + (2/3) g^2 N)
/// sin(theta) = sqrt((2/3) g^2 N) / sqrt(phi^2 + (2/3) g^2 N)
/// ```
///
/// Returns `(cos_theta, sin_theta)`. Errors when both `phi` and `g sqrt(N)`
/// vanish (the angle is undefined there).
pub fn mixing_angle(phi: f64, g: f64, n: f64) -> Result<(f64, f64), ParamError> {
    if phi < 0.0 {
        return Err(ParamError::Negative { name: "phi", value: phi });
    }
    let q = ((2.0 / 3.0) * g * g * n).sqrt();
    if phi == 0.0 && q == 0.0 {
        return Err(ParamError::UndefinedMixingAngle);
    }
    let hyp = phi.hypot(q);
    Ok((phi / hyp, q / hyp))
}

/// Group velocity of the pulse inside the medium, in units of `c`:
///
/// ```text
/// v_g / c = 1 / (1 + 2 g^2 N / (3 phi^2))
/// ```
///
/// Equal to `cos^2(theta)` from [`mixing_angle`]. `phi == 0` returns exactly
/// zero (full storage limit, not an error) as long as the coupling is
/// non-zero.
pub fn group_velocity(phi: f64, g: f64, n: f64) -> Result<f64, ParamError> {
    if phi < 0.0 {
        return Err(ParamError::Negative { name: "phi", value: phi });
    }
    let g2n = g * g * n;
    if phi == 0.0 {
        if g2n == 0.0 {
            return Err(ParamError::UndefinedMixingAngle);
        }
        return Ok(0.0);
    }
    if g2n == 0.0 {
        return Ok(1.0);
    }
    Ok(1.0 / (1.0 + 2.0 * g2n / (3.0 * phi * phi)))
}
