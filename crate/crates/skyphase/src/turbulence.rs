//! Altitude-dependent turbulence strength, wind profiles, and channel
//! coherence time.
//!
//! The model combines the Bufton wind profile with a Hufnagel-Valley-style
//! refractive-index structure parameter C²ₙ(h) whose ground term and
//! ground wind speed are the two randomly sampled channel conditions.
//! Coherence time follows the Greenwood-style 5/3-moment integral of
//! C²ₙ·v^(5/3) along the path.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::integrate;

/// Relative tolerance for the profile integrals; tight enough that the
/// grid-convergence property (halving the step moves results by < 1e-6)
/// holds with margin.
const QUAD_REL_TOL: f64 = 1e-9;

/// Geometry and turbulence parameters for one channel draw.
///
/// `cn2_ground` and `v_ground` vary between draws (see
/// [`sample_atmosphere`]); the remaining fields describe the fixed
/// downlink geometry and optics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AtmosphereProfile {
    /// Ground-level refractive-index structure parameter C²ₙ(0), m^(-2/3).
    pub cn2_ground: f64,
    /// Ground wind speed v_g, m/s.
    pub v_ground: f64,
    /// Receiver altitude h₀ above sea level, m.
    pub receiver_altitude: f64,
    /// Satellite altitude H above sea level, m.
    pub satellite_altitude: f64,
    /// Zenith angle θ_z, rad; path integrals scale by sec(θ_z).
    pub zenith_angle: f64,
    /// Optical wavelength λ, m.
    pub wavelength: f64,
    /// Turbulence outer scale L₀, m.
    pub outer_scale: f64,
    /// Turbulence inner scale l₀, m.
    pub inner_scale: f64,
}

impl Default for AtmosphereProfile {
    /// Canonical downlink scenario: 500 km satellite, 2 km mountain-top
    /// receiver at zenith, 1550 nm carrier, mid-range ground conditions.
    fn default() -> Self {
        AtmosphereProfile {
            cn2_ground: 5.85e-15,
            v_ground: 3.65,
            receiver_altitude: 2.0e3,
            satellite_altitude: 5.0e5,
            zenith_angle: 0.0,
            wavelength: 1550e-9,
            outer_scale: 5.0,
            inner_scale: 0.025,
        }
    }
}

impl AtmosphereProfile {
    pub fn validate(&self) -> Result<()> {
        if !(self.cn2_ground > 0.0) {
            return Err(Error::config("cn2_ground must be positive"));
        }
        if !(self.v_ground >= 0.0) {
            return Err(Error::config("v_ground must be non-negative"));
        }
        if !(self.zenith_angle >= 0.0 && self.zenith_angle < std::f64::consts::FRAC_PI_2) {
            return Err(Error::config("zenith_angle must lie in [0, pi/2)"));
        }
        if !(self.receiver_altitude < self.satellite_altitude) {
            return Err(Error::config("receiver_altitude must lie below satellite_altitude"));
        }
        if !(self.inner_scale < self.outer_scale) {
            return Err(Error::config("inner_scale must be smaller than outer_scale"));
        }
        if !(self.wavelength > 0.0 && self.inner_scale > 0.0) {
            return Err(Error::config("wavelength and inner_scale must be positive"));
        }
        Ok(())
    }

    /// Path-length factor sec(θ_z) applied to altitude integrals.
    pub fn sec_zenith(&self) -> f64 {
        1.0 / self.zenith_angle.cos()
    }
}

/// Uniform sampling ranges for the per-window channel conditions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplingRanges {
    /// Ground wind speed range [low, high], m/s.
    pub v_ground_range: [f64; 2],
    /// Ground C²ₙ range [low, high], m^(-2/3).
    pub cn2_ground_range: [f64; 2],
}

impl Default for SamplingRanges {
    fn default() -> Self {
        SamplingRanges {
            v_ground_range: [2.3, 5.0],
            cn2_ground_range: [1.7e-15, 1.0e-14],
        }
    }
}

impl SamplingRanges {
    pub fn validate(&self) -> Result<()> {
        for (name, r) in [("v_ground_range", self.v_ground_range), ("cn2_ground_range", self.cn2_ground_range)] {
            if !(r[0] > 0.0 && r[0] <= r[1]) {
                return Err(Error::config(format!("{name} must satisfy 0 < low <= high")));
            }
        }
        Ok(())
    }
}

/// Bufton wind profile: v(h) = v_g + 30·exp(−((h − 9400)/4800)²), m/s.
///
/// A ground wind speed plus a Gaussian jet-stream bump centred at
/// 9.4 km altitude.
pub fn bufton_wind(h: f64, v_g: f64) -> f64 {
    let t = (h - 9400.0) / 4800.0;
    v_g + 30.0 * (-t * t).exp()
}

/// Root-mean-square wind speed over the 5–20 km band:
/// v_rms = [1/(15×10³) ∫₅ᵏᵐ²⁰ᵏᵐ v²(h) dh]^(1/2).
pub fn rms_wind(v_g: f64) -> Result<f64> {
    let integral = integrate(|h| bufton_wind(h, v_g).powi(2), 5.0e3, 20.0e3, QUAD_REL_TOL)?;
    Ok((integral / 15.0e3).sqrt())
}

/// Refractive-index structure parameter C²ₙ(h), m^(-2/3):
///
/// C²ₙ(h) = 0.00594·(v_rms/27)²·(10⁻⁵h)¹⁰·e^(−h/1000)
///        + 2.7×10⁻¹⁶·e^(−h/1500)
///        + C²ₙ(0)·e^(−h/100)
///
/// The first term (high-altitude, wind-driven) peaks near 10 km; the
/// ground term dies off within a few hundred metres.
pub fn cn2(h: f64, v_rms: f64, cn2_ground: f64) -> f64 {
    let wind_term = 0.00594 * (v_rms / 27.0).powi(2) * (1e-5 * h).powi(10) * (-h / 1000.0).exp();
    let mid_term = 2.7e-16 * (-h / 1500.0).exp();
    let ground_term = cn2_ground * (-h / 100.0).exp();
    wind_term + mid_term + ground_term
}

/// Profile-agnostic coherence-time core:
/// τ = [118·λ⁻²·sec(θ_z)·∫ C²ₙ(h)·v(h)^(5/3) dh]^(−3/5)
/// with the integral over [h_lo, h_hi].
///
/// Exposed separately so that scaling properties (uniform C²ₙ scaling,
/// wavelength scaling) can be exercised against arbitrary profiles.
pub fn coherence_time_with<C, V>(
    cn2_of: C,
    wind_of: V,
    wavelength: f64,
    h_lo: f64,
    h_hi: f64,
    sec_zenith: f64,
) -> Result<f64>
where
    C: Fn(f64) -> f64,
    V: Fn(f64) -> f64,
{
    let moment = integrate(|h| cn2_of(h) * wind_of(h).powf(5.0 / 3.0), h_lo, h_hi, QUAD_REL_TOL)?;
    if !(moment > 0.0) {
        return Err(Error::numerical("non-positive turbulence moment integral"));
    }
    Ok((118.0 * wavelength.powi(-2) * sec_zenith * moment).powf(-3.0 / 5.0))
}

/// Channel coherence time for one atmosphere draw.
///
/// Integration runs from the receiver altitude to the satellite altitude:
/// contributions outside that span are negligible and the modeled channel
/// physically occupies it.
pub fn coherence_time(profile: &AtmosphereProfile) -> Result<f64> {
    profile.validate()?;
    let v_rms = rms_wind(profile.v_ground)?;
    coherence_time_with(
        |h| cn2(h, v_rms, profile.cn2_ground),
        |h| bufton_wind(h, profile.v_ground),
        profile.wavelength,
        profile.receiver_altitude,
        profile.satellite_altitude,
        profile.sec_zenith(),
    )
}

/// Draws the per-window channel conditions uniformly from `ranges`,
/// copying every other field from `template`.
pub fn sample_atmosphere<R: Rng + ?Sized>(
    rng: &mut R,
    ranges: &SamplingRanges,
    template: &AtmosphereProfile,
) -> AtmosphereProfile {
    let unif = |rng: &mut R, r: [f64; 2]| {
        if r[0] == r[1] {
            r[0]
        } else {
            rng.gen_range(r[0]..r[1])
        }
    };
    AtmosphereProfile {
        v_ground: unif(rng, ranges.v_ground_range),
        cn2_ground: unif(rng, ranges.cn2_ground_range),
        ..template.clone()
    }
}
